//! Membership, separation certificates, and the divisibility oracle.

use serde::Serialize;

use crate::complex::{CoverComplex, LabeledComplex, Vertex};
use crate::construct::theorem_a;
use crate::error::{Error, Result};
use crate::raag::{DefiningGraph, Letter, NormalForm};

/// `g ∈ π₁Z`: the normal form of `g` lifts to a closed path at the base.
///
/// Geodesics between points of the convex `Z̃` stay inside it, so one
/// geodesic word decides membership.
pub fn member(z: &LabeledComplex, g: &NormalForm) -> bool {
    z.trace(g.letters(), z.base()) == Ok(z.base())
}

/// A finite-index subgroup (the stabilizer of `base` in a finite cover)
/// containing the subgroup generated by `subgroup_gens` and not `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationCertificate {
    pub cover: CoverComplex,
    pub base: Vertex,
    pub subgroup_gens: Vec<NormalForm>,
    pub g: NormalForm,
    pub index: usize,
}

impl SeparationCertificate {
    /// Re-checks every claim from the raw permutations.
    pub fn verify(&self) -> Result<()> {
        let cover = CoverComplex::new(self.cover.complex().clone())?;
        if self.index != cover.degree() {
            return Err(Error::Verification(format!(
                "index {} differs from the cover degree {}",
                self.index,
                cover.degree()
            )));
        }
        for h in &self.subgroup_gens {
            if cover.act(self.base, h.letters()) != self.base {
                return Err(Error::Verification(format!(
                    "subgroup generator {} is not in the stabilizer",
                    cover.complex().graph().format_word(h.letters())
                )));
            }
        }
        if cover.act(self.base, self.g.letters()) == self.base {
            return Err(Error::Verification("g fixes the base point".into()));
        }
        Ok(())
    }
}

fn certificate(z: &LabeledComplex, g: &NormalForm, y: &LabeledComplex, bound: usize) -> Result<SeparationCertificate> {
    let cover = y.canonical_completion().map_err(|e| match e {
        Error::Precondition(msg) => Error::Invariant(msg),
        other => other,
    })?;
    let cert = SeparationCertificate {
        base: y.base(),
        index: cover.degree(),
        cover,
        subgroup_gens: z.pi1_generators(),
        g: g.clone(),
    };
    cert.verify().map_err(|e| Error::Invariant(format!("certificate does not check: {e}")))?;
    if cert.index > bound {
        return Err(Error::Verification(format!("index {} exceeds the bound {bound}", cert.index)));
    }
    Ok(cert)
}

/// Completes the Theorem A complex `Y` to a cover; its base stabilizer
/// contains `π₁Z`, misses `g`, and has index at most `|Z⁰|(|g|+1)`.
pub fn separate(z: &LabeledComplex, g: &NormalForm) -> Result<SeparationCertificate> {
    let y = theorem_a(z, g)?;
    certificate(z, g, &y, z.vertex_count() * (g.len() + 1))
}

/// Free-group separation: trace `g` until it falls off `Z`, hang the rest
/// of `g` off that vertex as a fresh path, complete.
pub fn stallings_separate(r: usize, z: &LabeledComplex, g: &NormalForm) -> Result<SeparationCertificate> {
    let graph = z.graph();
    if graph.len() != r || !graph.edges().is_empty() {
        return Err(Error::Precondition(format!("expected the edgeless graph on {r} generators")));
    }
    graph.check_word(g.letters())?;
    if member(z, g) {
        return Err(Error::Precondition("g lies in π₁Z".into()));
    }
    let mut y = z.clone();
    if let Err(i) = z.trace(g.letters(), z.base()) {
        let mut x = z.trace(&g.letters()[..i], z.base()).unwrap();
        for &l in &g.letters()[i..] {
            let fresh = y.add_vertex();
            if l.is_inverse() {
                y.add_edge(l.gen(), fresh, x)?;
            } else {
                y.add_edge(l.gen(), x, fresh)?;
            }
            x = fresh;
        }
    }
    certificate(z, g, &y, z.vertex_count() + g.len())
}

/// One representative word per vertex of the cover (indexed by vertex), read
/// off a breadth-first search from `base` along positive generator steps.
///
/// Each fiber permutation has finite order, so positive steps reach every
/// vertex of a connected cover and each word has length below the degree.
pub fn short_transversal(cover: &CoverComplex, base: Vertex) -> Result<Vec<NormalForm>> {
    let mut c = cover.complex().clone();
    if base >= c.vertex_count() {
        return Err(Error::Input(format!("base {base} is not a vertex of the cover")));
    }
    c.set_base(base);
    c.tree_paths()
        .into_iter()
        .map(|p| {
            p.map(|w| c.graph().nf(&w))
                .ok_or_else(|| Error::Invariant("cover is not connected".into()))
        })
        .collect()
}

/// Partial coset table with deduction, for the oracle search.
struct Table {
    m: usize,
    used: usize,
    r: usize,
    /// `fwd[x * r + v]`, `bwd[x * r + v]`
    fwd: Vec<Option<usize>>,
    bwd: Vec<Option<usize>>,
}

impl Table {
    fn step(&self, x: usize, l: Letter) -> Option<usize> {
        let i = x * self.r + l.gen();
        if l.is_inverse() {
            self.bwd[i]
        } else {
            self.fwd[i]
        }
    }

    fn define(&mut self, x: usize, l: Letter, y: usize, trail: &mut Vec<(usize, usize)>) {
        let (src, dst) = if l.is_inverse() { (y, x) } else { (x, y) };
        self.fwd[src * self.r + l.gen()] = Some(dst);
        self.bwd[dst * self.r + l.gen()] = Some(src);
        trail.push((src, l.gen()));
    }

    fn undo(&mut self, trail: &mut Vec<(usize, usize)>, to: usize) {
        while trail.len() > to {
            let (src, v) = trail.pop().unwrap();
            let dst = self.fwd[src * self.r + v].take().unwrap();
            self.bwd[dst * self.r + v] = None;
        }
    }

    /// Scans `word` as a relator at `p`; returns false on a contradiction.
    fn scan(&mut self, word: &[Letter], p: usize, trail: &mut Vec<(usize, usize)>, changed: &mut bool) -> bool {
        let n = word.len();
        let (mut f, mut i) = (p, 0);
        while i < n {
            match self.step(f, word[i]) {
                Some(q) => {
                    f = q;
                    i += 1;
                }
                None => break,
            }
        }
        if i == n {
            return f == p;
        }
        let (mut b, mut j) = (p, n);
        while j > i {
            match self.step(b, word[j - 1].inverse()) {
                Some(q) => {
                    b = q;
                    j -= 1;
                }
                None => break,
            }
        }
        if j == i {
            return f == b;
        }
        if j == i + 1 {
            self.define(f, word[i], b, trail);
            *changed = true;
        }
        true
    }

    fn propagate(&mut self, relators: &[Vec<Letter>], based: &[Vec<Letter>], trail: &mut Vec<(usize, usize)>) -> bool {
        loop {
            let mut changed = false;
            for w in based {
                if !self.scan(w, 0, trail, &mut changed) {
                    return false;
                }
            }
            for p in 0..self.used {
                for w in relators {
                    if !self.scan(w, p, trail, &mut changed) {
                        return false;
                    }
                }
            }
            if !changed {
                return true;
            }
        }
    }
}

struct Search<'a> {
    relators: Vec<Vec<Letter>>,
    based: Vec<Vec<Letter>>,
    g: &'a [Letter],
    nodes: u64,
    budget: u64,
}

impl Search<'_> {
    /// Depth-first search for a complete table on at most `t.m` points.
    fn dfs(&mut self, t: &mut Table, trail: &mut Vec<(usize, usize)>) -> Result<bool> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::Budget {
                msg: format!("oracle exceeded {} search nodes", self.budget),
                partial: None,
            });
        }
        // prune once g is fully traced back to the base
        let mut x = 0;
        let mut traced = true;
        for &l in self.g {
            match t.step(x, l) {
                Some(y) => x = y,
                None => {
                    traced = false;
                    break;
                }
            }
        }
        if traced && x == 0 {
            return Ok(false);
        }
        let slot = (0..t.used)
            .flat_map(|x| (0..t.r).flat_map(move |v| [(x, Letter::new(v, false)), (x, Letter::new(v, true))]))
            .find(|&(x, l)| t.step(x, l).is_none());
        let Some((x, l)) = slot else {
            return Ok(true);
        };
        let mut targets: Vec<usize> = (0..t.used).filter(|&y| t.step(y, l.inverse()).is_none()).collect();
        if t.used < t.m {
            targets.push(t.used);
        }
        for y in targets {
            let mark = trail.len();
            let grew = y == t.used;
            if grew {
                t.used += 1;
            }
            t.define(x, l, y, trail);
            if t.propagate(&self.relators, &self.based, trail) && self.dfs(t, trail)? {
                return Ok(true);
            }
            t.undo(trail, mark);
            if grew {
                t.used -= 1;
            }
        }
        Ok(false)
    }
}

/// Node budget of one oracle call.
pub const ORACLE_BUDGET: u64 = 2_000_000;

/// Smallest index `m ≤ m_max` of a subgroup containing `subgroup_gens` and
/// not `g`: the least degree of a transitive action of `A_Γ` in which every
/// generator fixes point 0 and `g` moves it.
pub fn min_sep_index_oracle(
    graph: &DefiningGraph,
    subgroup_gens: &[NormalForm],
    g: &NormalForm,
    m_max: usize,
) -> Result<Option<usize>> {
    min_sep_index_oracle_with_budget(graph, subgroup_gens, g, m_max, ORACLE_BUDGET)
}

pub fn min_sep_index_oracle_with_budget(
    graph: &DefiningGraph,
    subgroup_gens: &[NormalForm],
    g: &NormalForm,
    m_max: usize,
    budget: u64,
) -> Result<Option<usize>> {
    graph.check_word(g.letters())?;
    for h in subgroup_gens {
        graph.check_word(h.letters())?;
    }
    let r = graph.len();
    let relators: Vec<Vec<Letter>> = graph
        .edges()
        .iter()
        .map(|&(v, w)| {
            let (a, b) = (Letter::new(v, false), Letter::new(w, false));
            vec![a, b, a.inverse(), b.inverse()]
        })
        .collect();
    let mut search = Search {
        relators,
        based: subgroup_gens.iter().filter(|h| !h.is_empty()).map(|h| h.letters().to_vec()).collect(),
        g: g.letters(),
        nodes: 0,
        budget,
    };
    for m in 1..=m_max {
        let mut t = Table {
            m,
            used: 1,
            r,
            fwd: vec![None; m * r],
            bwd: vec![None; m * r],
        };
        let mut trail = Vec::new();
        if !t.propagate(&search.relators, &search.based, &mut trail) {
            continue;
        }
        match search.dfs(&mut t, &mut trail) {
            Ok(true) => return Ok(Some(m)),
            Ok(false) => {}
            Err(Error::Budget { msg, .. }) => {
                // every index below m was ruled out
                return Err(Error::Budget {
                    msg,
                    partial: Some(m - 1),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

/// Status of one row of a growth table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Complete,
    NoneUpToMax,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthEntry {
    #[serde(skip)]
    pub g: NormalForm,
    pub word: String,
    pub oracle: Option<usize>,
    /// Index of the certificate from [`separate`], when the construction completes.
    pub certificate: Option<usize>,
    pub status: EntryStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrowthReport {
    pub subgroup: Vec<String>,
    pub n: usize,
    pub m_max: usize,
    /// Maximum oracle value over the complete rows.
    pub value: usize,
    pub complete: bool,
    pub entries: Vec<GrowthEntry>,
}

fn growth_entry(z: &LabeledComplex, gens: &[NormalForm], g: NormalForm, m_max: usize) -> GrowthEntry {
    let graph = z.graph();
    let (oracle, status) = match min_sep_index_oracle(graph, gens, &g, m_max) {
        Ok(Some(m)) => (Some(m), EntryStatus::Complete),
        Ok(None) => (None, EntryStatus::NoneUpToMax),
        Err(_) => (None, EntryStatus::BudgetExceeded),
    };
    GrowthEntry {
        word: graph.format_word(g.letters()),
        certificate: separate(z, &g).ok().map(|c| c.index),
        oracle,
        status,
        g,
    }
}

fn growth_report(z: &LabeledComplex, n: usize, m_max: usize, parallel: bool) -> Result<GrowthReport> {
    let graph = z.graph();
    let gens = z.pi1_generators();
    let candidates: Vec<NormalForm> = graph
        .ball(n)
        .into_iter()
        .filter(|g| !g.is_empty() && !member(z, g))
        .collect();
    let entries: Vec<GrowthEntry> = if parallel {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            candidates
                .into_par_iter()
                .map(|g| growth_entry(z, &gens, g, m_max))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        unreachable!("parallel growth without the parallel feature")
    } else {
        candidates
            .into_iter()
            .map(|g| growth_entry(z, &gens, g, m_max))
            .collect()
    };
    Ok(GrowthReport {
        subgroup: gens.iter().map(|h| graph.format_word(h.letters())).collect(),
        n,
        m_max,
        value: entries.iter().filter_map(|e| e.oracle).max().unwrap_or(0),
        complete: entries.iter().all(|e| e.status == EntryStatus::Complete),
        entries,
    })
}

/// Separability growth of `π₁Z` at radius `n`: the largest minimal
/// separating index over elements of length `≤ n` outside `π₁Z`.
///
/// Rows are computed on the rayon pool when the `parallel` feature is on.
pub fn sep_growth(z: &LabeledComplex, n: usize, m_max: usize) -> Result<GrowthReport> {
    growth_report(z, n, m_max, cfg!(feature = "parallel"))
}

/// [`sep_growth`] on the calling thread.
pub fn sep_growth_sequential(z: &LabeledComplex, n: usize, m_max: usize) -> Result<GrowthReport> {
    growth_report(z, n, m_max, false)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn w(g: &DefiningGraph, s: &str) -> NormalForm {
        g.normal_form(&g.parse_word(s).unwrap()).unwrap()
    }

    fn z3() -> LabeledComplex {
        let g = Arc::new(DefiningGraph::new(&["v"], &[] as &[(&str, &str)]).unwrap());
        let mut c = LabeledComplex::new(g, 3, 0);
        for i in 0..3 {
            c.add_edge(0, i, (i + 1) % 3).unwrap();
        }
        c
    }

    fn aloop(graph: DefiningGraph) -> LabeledComplex {
        let mut c = LabeledComplex::new(Arc::new(graph), 1, 0);
        c.add_edge(0, 0, 0).unwrap();
        c
    }

    fn zz() -> DefiningGraph {
        DefiningGraph::new(&["a", "b"], &[("a", "b")]).unwrap()
    }

    #[test]
    fn membership_examples() {
        let z = z3();
        assert!(member(&z, &w(z.graph(), "v v v")));
        assert!(!member(&z, &w(z.graph(), "v")));
        let a = aloop(zz());
        assert!(member(&a, &w(a.graph(), "b a b^-1")));
    }

    #[test]
    fn oracle_examples() {
        let z = z3();
        let gr = z.graph();
        assert_eq!(min_sep_index_oracle(gr, &[w(gr, "v v v")], &w(gr, "v"), 6), Ok(Some(3)));
        let g2 = zz();
        assert_eq!(min_sep_index_oracle(&g2, &[w(&g2, "a")], &w(&g2, "b"), 4), Ok(Some(2)));
        assert_eq!(min_sep_index_oracle(&g2, &[w(&g2, "a")], &w(&g2, "a a"), 4), Ok(None));
    }

    #[test]
    fn oracle_budget_reports_progress() {
        let z = z3();
        let gr = z.graph();
        let err = min_sep_index_oracle_with_budget(gr, &[w(gr, "v v v v v v v")], &w(gr, "v"), 8, 4).unwrap_err();
        let Error::Budget { partial: Some(m), .. } = err else {
            panic!("expected a budget error, got {err:?}");
        };
        assert!((1..7).contains(&m));
    }

    #[test]
    fn certificates_for_curated_threads() {
        let z = z3();
        let c = separate(&z, &w(z.graph(), "v")).unwrap();
        assert_eq!(c.index, 3);
        let a = aloop(zz());
        let c = separate(&a, &w(a.graph(), "b")).unwrap();
        assert_eq!(c.index, 2);
        let f = aloop(DefiningGraph::free(2));
        let c = separate(&f, &w(f.graph(), "b a")).unwrap();
        assert_eq!(c.index, 3);
    }

    #[test]
    fn stallings_examples() {
        let f = aloop(DefiningGraph::free(2));
        assert_eq!(stallings_separate(2, &f, &w(f.graph(), "b a")).unwrap().index, 3);
        assert_eq!(stallings_separate(2, &f, &w(f.graph(), "a b")).unwrap().index, 2);
        let z = z3();
        assert_eq!(stallings_separate(1, &z, &w(z.graph(), "v")).unwrap().index, 3);
        assert!(stallings_separate(2, &aloop(zz()), &w(&zz(), "b")).is_err());
    }

    #[test]
    fn transversal_examples() {
        let s = LabeledComplex::salvetti(Arc::new(zz()));
        let c = CoverComplex::new(s).unwrap();
        assert_eq!(short_transversal(&c, 0).unwrap(), vec![NormalForm::identity()]);
        let z = z3();
        let c = z.canonical_completion().unwrap();
        let t = short_transversal(&c, 0).unwrap();
        let words: Vec<String> = t.iter().map(|p| z.graph().format_word(p.letters())).collect();
        assert_eq!(words, ["ε", "v", "v v"]);
        let a = aloop(zz());
        let cert = separate(&a, &w(a.graph(), "b")).unwrap();
        let t = short_transversal(&cert.cover, cert.base).unwrap();
        let words: Vec<String> = t.iter().map(|p| a.graph().format_word(p.letters())).collect();
        assert_eq!(words, ["ε", "b"]);
    }

    #[test]
    fn growth_examples() {
        let z = z3();
        let rep = sep_growth(&z, 4, 6).unwrap();
        assert_eq!(rep.value, 3);
        assert!(rep.complete);
        // b² needs index 3, so the radius-2 value is 3
        let a = aloop(zz());
        assert_eq!(sep_growth(&a, 1, 4).unwrap().value, 2);
        assert_eq!(sep_growth(&a, 2, 4).unwrap().value, 3);
        assert_eq!(sep_growth_sequential(&z, 4, 6).unwrap(), rep);
        let rep = sep_growth(&z, 0, 6).unwrap();
        assert!(rep.entries.is_empty());
        assert_eq!(rep.value, 0);
    }
}
