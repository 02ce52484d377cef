//! Γ-labeled cube complexes over the Salvetti complex `S_Γ`.
//!
//! A complex is a finite vertex set with one partial injection `σ_v` per
//! generator; `σ_v(x)` is the far end of the `v`-labeled edge leaving `x`.
//! Squares and higher cubes are implicit: a square on commuting germs is
//! present exactly when both two-step compositions are defined and agree.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raag::{DefiningGraph, Gen, Letter, NormalForm};

pub type Vertex = usize;

#[derive(Clone, PartialEq, Eq)]
pub struct LabeledComplex {
    graph: Arc<DefiningGraph>,
    ids: Vec<u64>,
    base: Vertex,
    fwd: Vec<Vec<Option<Vertex>>>,
    bwd: Vec<Vec<Option<Vertex>>>,
}

/// A missing square: germs `a` and `b` at `vertex` on adjacent generators whose
/// two-step compositions are not both defined and equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SquareViolation {
    pub vertex: Vertex,
    #[serde(serialize_with = "ser_letter")]
    pub a: Letter,
    #[serde(serialize_with = "ser_letter")]
    pub b: Letter,
}

fn ser_letter<S: serde::Serializer>(l: &Letter, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}{}", l.gen(), if l.is_inverse() { "-" } else { "+" }))
}

/// Outcome of [`LabeledComplex::check_local_isometry`].
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LocalIsometryReport {
    pub violations: Vec<SquareViolation>,
}

impl LocalIsometryReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

impl LabeledComplex {
    /// `n` isolated vertices with ids `0..n`.
    pub fn new(graph: Arc<DefiningGraph>, n: usize, base: Vertex) -> Self {
        assert!(base < n.max(1));
        let r = graph.len();
        LabeledComplex {
            graph,
            ids: (0..n as u64).collect(),
            base,
            fwd: vec![vec![None; n]; r],
            bwd: vec![vec![None; n]; r],
        }
    }

    /// The Salvetti complex: one vertex and a loop per generator.
    pub fn salvetti(graph: Arc<DefiningGraph>) -> Self {
        let mut c = Self::new(graph.clone(), 1, 0);
        for v in 0..graph.len() {
            c.fwd[v][0] = Some(0);
            c.bwd[v][0] = Some(0);
        }
        c
    }

    /// Builds a complex from raw forward maps, rejecting non-injective ones.
    pub fn from_maps(
        graph: Arc<DefiningGraph>,
        ids: Vec<u64>,
        base: Vertex,
        fwd: Vec<Vec<Option<Vertex>>>,
    ) -> Result<Self> {
        let n = ids.len();
        if base >= n {
            return Err(Error::Input("base vertex out of range".into()));
        }
        if fwd.len() != graph.len() || fwd.iter().any(|m| m.len() != n) {
            return Err(Error::Input("map table has the wrong shape".into()));
        }
        let mut bwd = vec![vec![None; n]; graph.len()];
        for (v, map) in fwd.iter().enumerate() {
            for (x, y) in map.iter().enumerate() {
                if let Some(y) = *y {
                    if y >= n {
                        return Err(Error::Input(format!("edge target {y} out of range")));
                    }
                    if let Some(prev) = bwd[v][y] {
                        return Err(Error::Invariant(format!(
                            "σ_{} is not injective: {} and {} both map to {}",
                            graph.name(v),
                            ids[prev],
                            ids[x],
                            ids[y]
                        )));
                    }
                    bwd[v][y] = Some(x);
                }
            }
        }
        Ok(LabeledComplex {
            graph,
            ids,
            base,
            fwd,
            bwd,
        })
    }

    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    pub fn vertex_count(&self) -> usize {
        self.ids.len()
    }

    pub fn base(&self) -> Vertex {
        self.base
    }

    pub fn set_base(&mut self, base: Vertex) {
        assert!(base < self.vertex_count());
        self.base = base;
    }

    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn set_ids(&mut self, ids: Vec<u64>) {
        assert_eq!(ids.len(), self.vertex_count());
        self.ids = ids;
    }

    pub fn vertex_of_id(&self, id: u64) -> Option<Vertex> {
        self.ids.iter().position(|&i| i == id)
    }

    pub fn add_vertex(&mut self) -> Vertex {
        let next = self.ids.iter().max().map_or(0, |m| m + 1);
        self.ids.push(next);
        for m in self.fwd.iter_mut().chain(self.bwd.iter_mut()) {
            m.push(None);
        }
        self.ids.len() - 1
    }

    /// Adds the edge `x →v y`; fails if it would break injectivity.
    pub fn add_edge(&mut self, v: Gen, x: Vertex, y: Vertex) -> Result<()> {
        match (self.fwd[v][x], self.bwd[v][y]) {
            (Some(t), _) if t == y => Ok(()),
            (Some(_), _) | (_, Some(_)) => Err(Error::Invariant(format!(
                "edge {} →{} {} conflicts with an existing {}-edge",
                self.ids[x],
                self.graph.name(v),
                self.ids[y],
                self.graph.name(v)
            ))),
            (None, None) => {
                self.fwd[v][x] = Some(y);
                self.bwd[v][y] = Some(x);
                Ok(())
            }
        }
    }

    pub fn has_edge(&self, v: Gen, x: Vertex, y: Vertex) -> bool {
        self.fwd[v][x] == Some(y)
    }

    pub fn remove_edge(&mut self, v: Gen, x: Vertex) -> Option<Vertex> {
        let y = self.fwd[v][x].take()?;
        self.bwd[v][y] = None;
        Some(y)
    }

    pub fn sigma(&self, v: Gen) -> &[Option<Vertex>] {
        &self.fwd[v]
    }

    /// Follows one letter: `σ_v` for `v`, `σ_v⁻¹` for `v⁻¹`.
    pub fn step(&self, x: Vertex, l: Letter) -> Option<Vertex> {
        if l.is_inverse() {
            self.bwd[l.gen()][x]
        } else {
            self.fwd[l.gen()][x]
        }
    }

    /// Endpoint of the lift of `word` at `start`, or the index of the first
    /// letter that cannot be lifted.
    pub fn trace(&self, word: &[Letter], start: Vertex) -> std::result::Result<Vertex, usize> {
        let mut x = start;
        for (i, &l) in word.iter().enumerate() {
            x = self.step(x, l).ok_or(i)?;
        }
        Ok(x)
    }

    /// All edges `(v, x, y)` ordered by generator, then source.
    pub fn edges(&self) -> impl Iterator<Item = (Gen, Vertex, Vertex)> + '_ {
        self.fwd
            .iter()
            .enumerate()
            .flat_map(|(v, m)| m.iter().enumerate().filter_map(move |(x, y)| y.map(|y| (v, x, y))))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Letters whose partial map is defined at `x`.
    pub fn germs(&self, x: Vertex) -> impl Iterator<Item = Letter> + '_ {
        Letter::all(self.graph.len()).filter(move |&l| self.step(x, l).is_some())
    }

    pub fn is_connected(&self) -> bool {
        self.component(self.base).len() == self.vertex_count()
    }

    /// Vertices reachable from `x` along edges in either direction.
    pub fn component(&self, x: Vertex) -> Vec<Vertex> {
        self.component_within(x, self.graph.all())
    }

    /// Vertices reachable from `x` along edges whose labels lie in `labels`.
    pub fn component_within(&self, x: Vertex, labels: u64) -> Vec<Vertex> {
        let mut seen = vec![false; self.vertex_count()];
        seen[x] = true;
        let mut queue = VecDeque::from([x]);
        let mut out = vec![x];
        while let Some(y) = queue.pop_front() {
            for l in Letter::all(self.graph.len()) {
                if labels >> l.gen() & 1 == 0 {
                    continue;
                }
                if let Some(z) = self.step(y, l) {
                    if !seen[z] {
                        seen[z] = true;
                        out.push(z);
                        queue.push_back(z);
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn validate(&self) -> Result<()> {
        for v in 0..self.graph.len() {
            for x in 0..self.vertex_count() {
                if let Some(y) = self.fwd[v][x] {
                    if self.bwd[v][y] != Some(x) {
                        return Err(Error::Invariant(format!(
                            "σ_{} is not injective at {}",
                            self.graph.name(v),
                            self.ids[y]
                        )));
                    }
                }
                if let Some(w) = self.bwd[v][x] {
                    if self.fwd[v][w] != Some(x) {
                        return Err(Error::Invariant(format!(
                            "inverse table of σ_{} is stale at {}",
                            self.graph.name(v),
                            self.ids[x]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Square-completeness ("no missing corners") at every vertex.
    ///
    /// Malformed maps are an `Err`; missing squares are listed in the report.
    pub fn check_local_isometry(&self) -> Result<LocalIsometryReport> {
        self.validate()?;
        let mut report = LocalIsometryReport::default();
        for x in 0..self.vertex_count() {
            report.violations.extend(self.violations_at(x));
        }
        Ok(report)
    }

    pub fn violations_at(&self, x: Vertex) -> Vec<SquareViolation> {
        let mut out = Vec::new();
        let germs: Vec<Letter> = self.germs(x).collect();
        for (i, &a) in germs.iter().enumerate() {
            for &b in &germs[i + 1..] {
                if a.gen() == b.gen() || !self.graph.adjacent(a.gen(), b.gen()) {
                    continue;
                }
                let ab = self.step(x, a).and_then(|y| self.step(y, b));
                let ba = self.step(x, b).and_then(|y| self.step(y, a));
                if ab.is_none() || ab != ba {
                    out.push(SquareViolation { vertex: x, a, b });
                }
            }
        }
        out
    }

    pub fn is_local_isometry(&self) -> bool {
        self.check_local_isometry().is_ok_and(|r| r.passes())
    }

    /// Every `σ_v` is a bijection of the vertex set.
    pub fn is_total(&self) -> bool {
        self.fwd.iter().all(|m| m.iter().all(Option::is_some))
    }

    /// Haglund–Wise canonical completion: close every maximal `σ_v`-chain
    /// `x → σ_v(x) → ⋯ → t` into a cycle by adding `t ↦ x`.
    ///
    /// Chains are taken in order of their smallest-id start vertex; an isolated
    /// vertex becomes a loop. The commutation of the resulting permutations is
    /// checked, and a failure means the input was not a local isometry.
    pub fn canonical_completion(&self) -> Result<CoverComplex> {
        let mut out = self.clone();
        for v in 0..self.graph.len() {
            for x in 0..self.vertex_count() {
                if out.bwd[v][x].is_some() {
                    continue;
                }
                // x starts a chain (possibly of length 0)
                let mut t = x;
                while let Some(y) = out.fwd[v][t] {
                    t = y;
                }
                out.fwd[v][t] = Some(x);
                out.bwd[v][x] = Some(t);
            }
        }
        CoverComplex::new(out).map_err(|e| match e {
            Error::Invariant(msg) => Error::Precondition(format!(
                "input not a local isometry (completion does not commute: {msg})"
            )),
            other => other,
        })
    }

    /// Spanning tree: for each vertex the letter path from the base.
    ///
    /// Breadth-first along positive steps; an inverse step is taken only when
    /// no positive step reaches a new vertex. On a cycle this gives the path
    /// `ε, v, v², …` rather than one going both ways round.
    pub fn tree_paths(&self) -> Vec<Option<Vec<Letter>>> {
        let n = self.vertex_count();
        let r = self.graph.len();
        let mut paths: Vec<Option<Vec<Letter>>> = vec![None; n];
        paths[self.base] = Some(Vec::new());
        let mut order = vec![self.base];
        let mut head = 0;
        loop {
            while head < order.len() {
                let x = order[head];
                head += 1;
                for v in 0..r {
                    let l = Letter::new(v, false);
                    if let Some(y) = self.step(x, l) {
                        if paths[y].is_none() {
                            let mut p = paths[x].clone().unwrap();
                            p.push(l);
                            paths[y] = Some(p);
                            order.push(y);
                        }
                    }
                }
            }
            let back = order.iter().find_map(|&x| {
                (0..r).find_map(|v| {
                    let l = Letter::new(v, true);
                    self.step(x, l).filter(|&y| paths[y].is_none()).map(|y| (x, l, y))
                })
            });
            let Some((x, l, y)) = back else {
                return paths;
            };
            let mut p = paths[x].clone().unwrap();
            p.push(l);
            paths[y] = Some(p);
            order.push(y);
        }
    }

    /// Generators of `π₁` at the base as elements of `A_Γ`, one per non-tree edge.
    pub fn pi1_generators(&self) -> Vec<NormalForm> {
        let paths = self.tree_paths();
        let mut tree_edge = vec![vec![false; self.vertex_count()]; self.graph.len()];
        for (y, p) in paths.iter().enumerate() {
            if let Some(p) = p {
                if let Some(&l) = p.last() {
                    // y was reached from its parent by l
                    let parent = self.step(y, l.inverse()).unwrap();
                    let src = if l.is_inverse() { y } else { parent };
                    tree_edge[l.gen()][src] = true;
                }
            }
        }
        let mut gens = Vec::new();
        for (v, x, y) in self.edges() {
            if tree_edge[v][x] {
                continue;
            }
            let (Some(px), Some(py)) = (&paths[x], &paths[y]) else {
                continue;
            };
            let mut w = px.clone();
            w.push(Letter::new(v, false));
            w.extend(py.iter().rev().map(|l| l.inverse()));
            gens.push(self.graph.nf(&w));
        }
        gens
    }

    /// The induced labeled complex on a vertex subset (ids preserved).
    pub fn induced(&self, keep: &[Vertex], base: Vertex) -> LabeledComplex {
        let mut pos = vec![None; self.vertex_count()];
        for (i, &x) in keep.iter().enumerate() {
            pos[x] = Some(i);
        }
        let mut c = LabeledComplex::new(self.graph.clone(), keep.len(), pos[base].unwrap());
        c.ids = keep.iter().map(|&x| self.ids[x]).collect();
        for (v, x, y) in self.edges() {
            if let (Some(a), Some(b)) = (pos[x], pos[y]) {
                c.fwd[v][a] = Some(b);
                c.bwd[v][b] = Some(a);
            }
        }
        c
    }

    /// `self` is a labeled subcomplex of `other` through the vertex map `f`.
    pub fn embeds_via(&self, other: &LabeledComplex, f: &[Vertex]) -> bool {
        f.len() == self.vertex_count()
            && f[self.base] == other.base
            && {
                let mut used = vec![false; other.vertex_count()];
                f.iter().all(|&y| y < other.vertex_count() && !std::mem::replace(&mut used[y], true))
            }
            && self.edges().all(|(v, x, y)| other.has_edge(v, f[x], f[y]))
    }
}

impl fmt::Debug for LabeledComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LabeledComplex(n={}, base={}, edges=[", self.vertex_count(), self.ids[self.base])?;
        for (i, (v, x, y)) in self.edges().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}:{}→{}", self.graph.name(v), self.ids[x], self.ids[y])?;
        }
        write!(f, "])")
    }
}

/// A finite cover of `S_Γ`: every `σ_v` is a permutation and adjacent
/// generators commute, so the maps define an action of `A_Γ` on the fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverComplex(LabeledComplex);

impl CoverComplex {
    pub fn new(c: LabeledComplex) -> Result<Self> {
        c.validate()?;
        if !c.is_total() {
            return Err(Error::Invariant("some σ_v is not a bijection".into()));
        }
        let g = c.graph.clone();
        for &(v, w) in g.edges() {
            for x in 0..c.vertex_count() {
                let vw = c.fwd[w][c.fwd[v][x].unwrap()];
                let wv = c.fwd[v][c.fwd[w][x].unwrap()];
                if vw != wv {
                    return Err(Error::Invariant(format!(
                        "σ_{} and σ_{} do not commute at {}",
                        g.name(v),
                        g.name(w),
                        c.ids[x]
                    )));
                }
            }
        }
        Ok(CoverComplex(c))
    }

    pub fn degree(&self) -> usize {
        self.0.vertex_count()
    }

    pub fn complex(&self) -> &LabeledComplex {
        &self.0
    }

    pub fn into_complex(self) -> LabeledComplex {
        self.0
    }

    /// The action of a word on a fiber point; always defined.
    pub fn act(&self, x: Vertex, word: &[Letter]) -> Vertex {
        self.0.trace(word, x).expect("covers lift every path")
    }

    /// Permutation images of `σ_v`, indexed by vertex.
    pub fn permutation(&self, v: Gen) -> Vec<Vertex> {
        self.0.fwd[v].iter().map(|y| y.unwrap()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1() -> Arc<DefiningGraph> {
        Arc::new(DefiningGraph::new(&["v"], &[] as &[(&str, &str)]).unwrap())
    }

    fn zz() -> Arc<DefiningGraph> {
        Arc::new(DefiningGraph::new(&["a", "b"], &[("a", "b")]).unwrap())
    }

    pub(crate) fn cycle(graph: Arc<DefiningGraph>, gen: Gen, n: usize) -> LabeledComplex {
        let mut c = LabeledComplex::new(graph, n, 0);
        for i in 0..n {
            c.add_edge(gen, i, (i + 1) % n).unwrap();
        }
        c
    }

    #[test]
    fn salvetti_is_a_degree_one_cover() {
        for g in [g1(), zz(), Arc::new(DefiningGraph::path(3))] {
            let s = LabeledComplex::salvetti(g.clone());
            assert_eq!(s.vertex_count(), 1);
            assert_eq!(s.edge_count(), g.len());
            assert!(s.is_local_isometry());
            assert_eq!(CoverComplex::new(s).unwrap().degree(), 1);
        }
    }

    #[test]
    fn open_square_is_reported() {
        let g = Arc::new(DefiningGraph::new(&["v", "w"], &[("v", "w")]).unwrap());
        let mut c = LabeledComplex::new(g, 3, 0);
        c.add_edge(0, 0, 1).unwrap();
        c.add_edge(1, 1, 2).unwrap();
        let r = c.check_local_isometry().unwrap();
        assert!(!r.passes());
        assert!(r.violations.iter().any(|v| v.vertex == 1));
    }

    #[test]
    fn loop_and_edge_pass() {
        let mut c = LabeledComplex::new(zz(), 2, 0);
        c.add_edge(0, 0, 0).unwrap();
        c.add_edge(0, 1, 1).unwrap();
        c.add_edge(1, 0, 1).unwrap();
        assert!(c.is_local_isometry());
    }

    #[test]
    fn non_injective_maps_are_invariant_errors() {
        let fwd = vec![vec![Some(1), Some(1)]];
        let err = LabeledComplex::from_maps(g1(), vec![0, 1], 0, fwd).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
        let mut c = LabeledComplex::new(g1(), 2, 0);
        c.add_edge(0, 0, 1).unwrap();
        assert!(c.add_edge(0, 1, 1).is_err());
    }

    #[test]
    fn tracing() {
        let z3 = cycle(g1(), 0, 3);
        let v = Letter::new(0, false);
        assert_eq!(z3.trace(&[v, v, v], 0), Ok(0));
        assert_eq!(z3.trace(&[v], 0), Ok(1));
        assert_eq!(z3.trace(&[v.inverse()], 0), Ok(2));
        let mut aloop = LabeledComplex::new(zz(), 1, 0);
        aloop.add_edge(0, 0, 0).unwrap();
        assert_eq!(aloop.trace(&[Letter::new(1, false)], 0), Err(0));
    }

    #[test]
    fn completion_examples() {
        let z3 = cycle(g1(), 0, 3);
        let c = z3.canonical_completion().unwrap();
        assert_eq!(c.complex(), &z3);
        assert_eq!(c.degree(), 3);

        let mut chain = LabeledComplex::new(g1(), 2, 0);
        chain.add_edge(0, 0, 1).unwrap();
        let c = chain.canonical_completion().unwrap();
        assert_eq!(c.permutation(0), vec![1, 0]);

        let mut aloop = LabeledComplex::new(zz(), 1, 0);
        aloop.add_edge(0, 0, 0).unwrap();
        let c = aloop.canonical_completion().unwrap();
        assert_eq!(c.complex(), &LabeledComplex::salvetti(zz()));
    }

    #[test]
    fn completion_rejects_non_local_isometry() {
        // open corner: v then w with no square
        let g = Arc::new(DefiningGraph::new(&["v", "w"], &[("v", "w")]).unwrap());
        let mut c = LabeledComplex::new(g, 3, 0);
        c.add_edge(0, 0, 1).unwrap();
        c.add_edge(1, 1, 2).unwrap();
        assert!(matches!(c.canonical_completion(), Err(Error::Precondition(_))));
    }

    #[test]
    fn pi1_generator_examples() {
        let z3 = cycle(g1(), 0, 3);
        let gens = z3.pi1_generators();
        assert_eq!(gens.len(), 1);
        assert_eq!(z3.graph().format_word(gens[0].letters()), "v v v");

        let mut aloop = LabeledComplex::new(zz(), 1, 0);
        aloop.add_edge(0, 0, 0).unwrap();
        let gens = aloop.pi1_generators();
        assert_eq!(aloop.graph().format_word(gens[0].letters()), "a");

        let mut tree = LabeledComplex::new(zz(), 3, 0);
        tree.add_edge(0, 0, 1).unwrap();
        tree.add_edge(1, 2, 0).unwrap();
        assert!(tree.pi1_generators().is_empty());
    }
}
