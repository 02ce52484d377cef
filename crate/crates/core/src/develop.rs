//! Finite convex subcomplexes of the universal cover `S̃_Γ`.
//!
//! Vertices are group elements in normal form; the 1-skeleton is the Cayley
//! graph, and squares are implicit between commuting generators. Convex
//! subcomplexes are exactly the interval-closed vertex sets.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raag::{DefiningGraph, Gen, Letter, NormalForm};

#[derive(Clone, Debug)]
pub struct DevelopedComplex {
    graph: Arc<DefiningGraph>,
    verts: Vec<NormalForm>,
    index: HashMap<NormalForm, usize>,
    /// `out[v][i]` = index of `verts[i]·v`, when present.
    out: Vec<Vec<Option<usize>>>,
    inn: Vec<Vec<Option<usize>>>,
}

impl PartialEq for DevelopedComplex {
    fn eq(&self, other: &Self) -> bool {
        self.verts == other.verts
    }
}

impl Eq for DevelopedComplex {}

impl DevelopedComplex {
    /// The full subcomplex on `points`; convexity is not checked.
    pub fn spanned(graph: &Arc<DefiningGraph>, points: impl IntoIterator<Item = NormalForm>) -> Self {
        let set: BTreeSet<NormalForm> = points.into_iter().collect();
        let verts: Vec<NormalForm> = set.into_iter().collect();
        let index: HashMap<NormalForm, usize> =
            verts.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let r = graph.len();
        let mut out = vec![vec![None; verts.len()]; r];
        let mut inn = vec![vec![None; verts.len()]; r];
        for (i, p) in verts.iter().enumerate() {
            for v in 0..r {
                if let Some(&j) = index.get(&graph.mul_letter(p, Letter::new(v, false))) {
                    out[v][i] = Some(j);
                    inn[v][j] = Some(i);
                }
            }
        }
        DevelopedComplex {
            graph: graph.clone(),
            verts,
            index,
            out,
            inn,
        }
    }

    pub fn graph(&self) -> &Arc<DefiningGraph> {
        &self.graph
    }

    /// Vertices in ascending shortlex order.
    pub fn vertices(&self) -> &[NormalForm] {
        &self.verts
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    pub fn contains(&self, p: &NormalForm) -> bool {
        self.index.contains_key(p)
    }

    pub fn index_of(&self, p: &NormalForm) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn vertex(&self, i: usize) -> &NormalForm {
        &self.verts[i]
    }

    /// Neighbor of vertex `i` across the edge labeled by `l`, if it lies in the complex.
    pub fn step(&self, i: usize, l: Letter) -> Option<usize> {
        if l.is_inverse() {
            self.inn[l.gen()][i]
        } else {
            self.out[l.gen()][i]
        }
    }

    /// Edges `(i, v, j)` with `verts[j] = verts[i]·v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, Gen, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(v, m)| m.iter().enumerate().filter_map(move |(i, j)| j.map(|j| (i, v, j))))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// The edge met when leaving `i` along `l`, as `(source, label)`.
    pub fn edge_at(&self, i: usize, l: Letter) -> Option<(usize, Gen)> {
        let j = self.step(i, l)?;
        Some(if l.is_inverse() { (j, l.gen()) } else { (i, l.gen()) })
    }

    /// Quadratic convexity certificate: every interval between two vertices lies inside.
    pub fn is_interval_closed(&self) -> bool {
        for (i, a) in self.verts.iter().enumerate() {
            for b in &self.verts[i + 1..] {
                if !self.graph.interval(a, b).iter().all(|p| self.contains(p)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_subset_of(&self, other: &DevelopedComplex) -> bool {
        self.verts.iter().all(|p| other.contains(p))
    }

    /// The unique vertex closest to `x`.
    pub fn gate(&self, x: &NormalForm) -> Result<NormalForm> {
        if self.contains(x) {
            return Ok(x.clone());
        }
        let mut best: Option<(usize, usize)> = None;
        let mut ties = 0;
        for (i, p) in self.verts.iter().enumerate() {
            let d = self.graph.dist(p, x);
            match best {
                Some((bd, _)) if d > bd => {}
                Some((bd, _)) if d == bd => ties += 1,
                _ => {
                    best = Some((d, i));
                    ties = 0;
                }
            }
        }
        match best {
            None => Err(Error::Input("gate onto an empty complex".into())),
            Some(_) if ties > 0 => Err(Error::Invariant(format!(
                "no unique closest point to {}: complex is not convex",
                self.graph.format_word(x.letters())
            ))),
            Some((_, i)) => Ok(self.verts[i].clone()),
        }
    }

    /// Global keys of the hyperplanes crossing this complex.
    pub fn crossed_keys(&self) -> BTreeSet<HyperplaneKey> {
        self.edges()
            .map(|(i, v, _)| HyperplaneKey::of_edge(&self.graph, &self.verts[i], v))
            .collect()
    }

    /// Vertices on the far side of `key`'s hyperplane, as a mask over indices.
    pub fn far_side(&self, key: &HyperplaneKey) -> Vec<bool> {
        self.verts.iter().map(|y| key.far_side(&self.graph, y)).collect()
    }
}

/// Smallest convex subcomplex containing `points`.
///
/// Connects the points by intervals from the first one, then closes the set
/// under square completion. In a median graph a connected set closed under
/// completing squares is convex, so this equals the interval closure.
pub fn develop_hull(graph: &Arc<DefiningGraph>, points: &[NormalForm]) -> DevelopedComplex {
    assert!(!points.is_empty(), "hull of an empty set");
    let mut set: BTreeSet<NormalForm> = BTreeSet::new();
    for p in points {
        set.extend(graph.interval(&points[0], p));
    }
    let letters: Vec<Letter> = Letter::all(graph.len()).collect();
    let mut queue: VecDeque<NormalForm> = set.iter().cloned().collect();
    while let Some(x) = queue.pop_front() {
        let nbrs: Vec<(Letter, NormalForm)> = letters
            .iter()
            .map(|&l| (l, graph.mul_letter(&x, l)))
            .filter(|(_, y)| set.contains(y))
            .collect();
        for (i, (a, xa)) in nbrs.iter().enumerate() {
            for (b, _) in &nbrs[i + 1..] {
                if a.gen() != b.gen() && graph.adjacent(a.gen(), b.gen()) {
                    let corner = graph.mul_letter(xa, *b);
                    if set.insert(corner.clone()) {
                        queue.push_back(corner.clone());
                        // the corner's neighbors may now complete further squares
                        for &l in &letters {
                            let y = graph.mul_letter(&corner, l);
                            if set.contains(&y) {
                                queue.push_back(y);
                            }
                        }
                    }
                }
            }
        }
    }
    DevelopedComplex::spanned(graph, set)
}

/// Reference hull: add `interval(a, b)` for all pairs until nothing changes.
pub fn develop_hull_by_intervals(graph: &Arc<DefiningGraph>, points: &[NormalForm]) -> DevelopedComplex {
    let mut set: BTreeSet<NormalForm> = points.iter().cloned().collect();
    loop {
        let cur: Vec<NormalForm> = set.iter().cloned().collect();
        let before = set.len();
        for (i, a) in cur.iter().enumerate() {
            for b in &cur[i + 1..] {
                set.extend(graph.interval(a, b));
            }
        }
        if set.len() == before {
            return DevelopedComplex::spanned(graph, set);
        }
    }
}

pub fn gate(x: &NormalForm, d: &DevelopedComplex) -> Result<NormalForm> {
    d.gate(x)
}

/// Hull of the gates of `d2`'s vertices in `d`.
pub fn gate_projection(d: &DevelopedComplex, d2: &DevelopedComplex) -> Result<DevelopedComplex> {
    let gates = d2
        .vertices()
        .iter()
        .map(|x| d.gate(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(develop_hull(d.graph(), &gates))
}

/// A hyperplane of `S̃_Γ`, named by the shortest element `p` of its coset
/// `p·A_link(v)` and its label `v`. Its dual edges are `(p·c, p·c·v)` for
/// `c ∈ A_link(v)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct HyperplaneKey {
    pub rep: NormalForm,
    pub label: Gen,
}

impl HyperplaneKey {
    /// Key of the hyperplane dual to the edge `(p, p·v)`.
    pub fn of_edge(graph: &DefiningGraph, p: &NormalForm, v: Gen) -> Self {
        HyperplaneKey {
            rep: graph.coset_rep(p, graph.link(v)),
            label: v,
        }
    }

    /// Whether `y` lies in the halfspace containing `rep·v`.
    pub fn far_side(&self, graph: &DefiningGraph, y: &NormalForm) -> bool {
        let near = &self.rep;
        let far = graph.mul_letter(near, Letter::new(self.label, false));
        graph.dist(&far, y) < graph.dist(near, y)
    }

    pub fn separates(&self, graph: &DefiningGraph, a: &NormalForm, b: &NormalForm) -> bool {
        self.far_side(graph, a) != self.far_side(graph, b)
    }

    pub fn format(&self, graph: &DefiningGraph) -> String {
        format!("H({}, {})", graph.format_word(self.rep.letters()), graph.name(self.label))
    }
}

/// Collateral hyperplanes share a dual standard line: same label `v` and
/// representatives differing by an element of `A_star(v)`.
pub fn collateral(graph: &DefiningGraph, h: &HyperplaneKey, k: &HyperplaneKey) -> bool {
    h.label == k.label
        && graph.in_standard_subgroup(&graph.left_quotient(&h.rep, &k.rep), graph.star(h.label))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hyperplane {
    pub label: Gen,
    /// Dual edges `(i, j)` as vertex indices, `verts[j] = verts[i]·label`, ascending.
    pub dual_edges: Vec<(usize, usize)>,
    pub key: HyperplaneKey,
}

/// The hyperplanes of one developed complex, with edge lookup and crossings.
#[derive(Clone, Debug)]
pub struct Hyperplanes {
    pub list: Vec<Hyperplane>,
    edge_class: HashMap<(usize, Gen), usize>,
    crossing: Vec<Vec<bool>>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Squares of `d` as `(vertex, a, b)` with `a < b` letters on adjacent generators.
fn squares(d: &DevelopedComplex) -> Vec<(usize, Letter, Letter)> {
    let g = d.graph();
    let mut out = Vec::new();
    for i in 0..d.len() {
        let present: Vec<Letter> = Letter::all(g.len()).filter(|&l| d.step(i, l).is_some()).collect();
        for (k, &a) in present.iter().enumerate() {
            for &b in &present[k + 1..] {
                if a.gen() != b.gen() && g.adjacent(a.gen(), b.gen()) {
                    out.push((i, a, b));
                }
            }
        }
    }
    out
}

/// Partition of the edges of `d` into hyperplanes under square transport.
pub fn hyperplanes_of(d: &DevelopedComplex) -> Hyperplanes {
    let g = d.graph();
    let r = g.len();
    let id = |(i, v): (usize, Gen)| i * r + v;
    let mut uf = UnionFind((0..d.len() * r).collect());
    let sq = squares(d);
    for &(i, a, b) in &sq {
        let ib = d.step(i, b).unwrap();
        let ia = d.step(i, a).unwrap();
        // convexity guarantees the fourth corner
        let (Some(e1), Some(e2)) = (d.edge_at(i, a), d.edge_at(ib, a)) else {
            continue;
        };
        uf.union(id(e1), id(e2));
        if let (Some(f1), Some(f2)) = (d.edge_at(i, b), d.edge_at(ia, b)) {
            uf.union(id(f1), id(f2));
        }
    }
    let mut roots: HashMap<usize, usize> = HashMap::new();
    let mut list: Vec<Hyperplane> = Vec::new();
    let mut edge_class = HashMap::new();
    for (i, v, j) in d.edges() {
        let root = uf.find(id((i, v)));
        let c = *roots.entry(root).or_insert_with(|| {
            list.push(Hyperplane {
                label: v,
                dual_edges: Vec::new(),
                key: HyperplaneKey::of_edge(g, d.vertex(i), v),
            });
            list.len() - 1
        });
        list[c].dual_edges.push((i, j));
        edge_class.insert((i, v), c);
    }
    let n = list.len();
    let mut crossing = vec![vec![false; n]; n];
    for &(i, a, b) in &sq {
        let (Some(e1), Some(e2)) = (d.edge_at(i, a), d.edge_at(i, b)) else {
            continue;
        };
        if d.step(d.step(i, a).unwrap(), b).is_none() {
            continue;
        }
        let (h1, h2) = (edge_class[&e1], edge_class[&e2]);
        crossing[h1][h2] = true;
        crossing[h2][h1] = true;
    }
    Hyperplanes {
        list,
        edge_class,
        crossing,
    }
}

impl Hyperplanes {
    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    /// Class of the edge `(i, i·v)`.
    pub fn class_of(&self, i: usize, v: Gen) -> Option<usize> {
        self.edge_class.get(&(i, v)).copied()
    }

    /// Class of the edge met leaving `i` along `l`.
    pub fn class_at(&self, d: &DevelopedComplex, i: usize, l: Letter) -> Option<usize> {
        let (s, v) = d.edge_at(i, l)?;
        self.class_of(s, v)
    }

    pub fn crosses(&self, h: usize, k: usize) -> bool {
        self.crossing[h][k]
    }

    pub fn find_key(&self, key: &HyperplaneKey) -> Option<usize> {
        self.list.iter().position(|h| &h.key == key)
    }

    /// Whether `h` separates `a` from `b`: they fall in different components
    /// once the dual edges of `h` are removed.
    pub fn separates(&self, d: &DevelopedComplex, h: usize, a: &NormalForm, b: &NormalForm) -> Result<bool> {
        let (Some(ia), Some(ib)) = (d.index_of(a), d.index_of(b)) else {
            return Err(Error::Input("separation query for a vertex outside the complex".into()));
        };
        let mut seen = vec![false; d.len()];
        seen[ia] = true;
        let mut queue = VecDeque::from([ia]);
        while let Some(x) = queue.pop_front() {
            for l in Letter::all(d.graph().len()) {
                if self.class_at(d, x, l) == Some(h) {
                    continue;
                }
                if let Some(y) = d.step(x, l) {
                    if !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        Ok(!seen[ib])
    }
}

/// The frame `(H ∩ K) × (L ∩ K)` of a hyperplane in a convex complex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FrameData {
    pub hyperplane: HyperplaneKey,
    pub line_base: NormalForm,
    pub line_label: Gen,
    pub segment_length: usize,
    /// Number of vertices of the `H ∩ K` factor.
    pub cross_section: usize,
}

/// Splits `h ∈ A_star(v)` into its `A_link(v)` part and its `v`-exponent.
fn split_star(graph: &DefiningGraph, h: &NormalForm, v: Gen) -> (NormalForm, i64) {
    let mut exp = 0;
    let mut rest = Vec::new();
    for &l in h.letters() {
        if l.gen() == v {
            exp += l.sign() as i64;
        } else {
            rest.push(l);
        }
    }
    (graph.nf(&rest), exp)
}

pub fn frame_in(k: &DevelopedComplex, hs: &Hyperplanes, h: usize) -> Result<FrameData> {
    let g = k.graph();
    let hyp = &hs.list[h];
    let v = hyp.label;
    let (src, _) = hyp.dual_edges[0];
    let p = k.vertex(src).clone();
    let vl = Letter::new(v, false);
    let (mut lo, mut hi) = (0i64, 1i64);
    let mut x = src;
    while let Some(y) = k.step(x, vl.inverse()) {
        x = y;
        lo -= 1;
    }
    let line_base = k.vertex(x).clone();
    let mut x = hyp.dual_edges[0].1;
    while let Some(y) = k.step(x, vl) {
        x = y;
        hi += 1;
    }
    let star = g.star(v);
    let mut sections: BTreeSet<NormalForm> = BTreeSet::new();
    let mut cells = 0usize;
    for y in k.vertices() {
        let q = g.left_quotient(&p, y);
        if !g.in_standard_subgroup(&q, star) {
            continue;
        }
        let (c, e) = split_star(g, &q, v);
        if e < lo || e > hi {
            return Err(Error::Invariant(format!(
                "frame of {} is not a product: line coordinate {e} outside [{lo}, {hi}]",
                hyp.key.format(g)
            )));
        }
        sections.insert(c);
        cells += 1;
    }
    let width = (hi - lo + 1) as usize;
    if cells != sections.len() * width {
        return Err(Error::Invariant(format!(
            "frame of {} is not a product: {} vertices for {} × {}",
            hyp.key.format(g),
            cells,
            sections.len(),
            width
        )));
    }
    Ok(FrameData {
        hyperplane: hyp.key.clone(),
        line_base,
        line_label: v,
        segment_length: (hi - lo) as usize,
        cross_section: sections.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zz() -> Arc<DefiningGraph> {
        Arc::new(DefiningGraph::new(&["a", "b"], &[("a", "b")]).unwrap())
    }

    fn f2() -> Arc<DefiningGraph> {
        Arc::new(DefiningGraph::free(2))
    }

    fn w(g: &DefiningGraph, s: &str) -> NormalForm {
        g.normal_form(&g.parse_word(s).unwrap()).unwrap()
    }

    fn names(d: &DevelopedComplex) -> Vec<String> {
        d.vertices().iter().map(|p| d.graph().format_word(p.letters())).collect()
    }

    #[test]
    fn hull_examples() {
        let g = zz();
        let d = develop_hull(&g, &[w(&g, ""), w(&g, "a b")]);
        assert_eq!(names(&d), ["ε", "a", "b", "a b"]);
        let d = develop_hull(&g, &[w(&g, "a b^-1")]);
        assert_eq!(d.len(), 1);
        let f = f2();
        let d = develop_hull(&f, &[w(&f, ""), w(&f, "a b a")]);
        assert_eq!(names(&d), ["ε", "a", "a b", "a b a"]);
    }

    #[test]
    fn hull_matches_interval_iteration() {
        let g = Arc::new(DefiningGraph::path(3));
        let pts = [w(&g, "a c"), w(&g, "b^-1 c^-1"), w(&g, "a^-1 b a")];
        let fast = develop_hull(&g, &pts);
        assert_eq!(fast, develop_hull_by_intervals(&g, &pts));
        assert!(fast.is_interval_closed());
    }

    #[test]
    fn gate_examples() {
        let g = zz();
        let d = develop_hull(&g, &[w(&g, ""), w(&g, "a")]);
        assert_eq!(d.gate(&w(&g, "a b")).unwrap(), w(&g, "a"));
        assert_eq!(d.gate(&w(&g, "a")).unwrap(), w(&g, "a"));
        let f = f2();
        let d = develop_hull(&f, &[w(&f, "")]);
        assert_eq!(d.gate(&w(&f, "b a")).unwrap(), w(&f, ""));
        let bad = DevelopedComplex::spanned(&g, [w(&g, "a"), w(&g, "b")]);
        assert!(matches!(bad.gate(&w(&g, "")), Err(Error::Invariant(_))));
    }

    #[test]
    fn projection_examples() {
        let g = zz();
        let d = develop_hull(&g, &[w(&g, ""), w(&g, "a")]);
        let d2 = develop_hull(&g, &[w(&g, "b"), w(&g, "a b")]);
        assert_eq!(gate_projection(&d, &d2).unwrap(), d);
        assert_eq!(gate_projection(&d, &d).unwrap(), d);
        let f = f2();
        let d = develop_hull(&f, &[w(&f, ""), w(&f, "a")]);
        let d2 = develop_hull(&f, &[w(&f, "b a")]);
        assert_eq!(names(&gate_projection(&d, &d2).unwrap()), ["ε"]);
    }

    #[test]
    fn hyperplane_examples() {
        let g = zz();
        let sq = develop_hull(&g, &[w(&g, ""), w(&g, "a b")]);
        let hs = hyperplanes_of(&sq);
        assert_eq!(hs.len(), 2);
        assert!(hs.list.iter().all(|h| h.dual_edges.len() == 2));
        assert!(hs.crosses(0, 1));
        let ha = hs.list.iter().position(|h| h.label == 0).unwrap();
        assert!(hs.separates(&sq, ha, &w(&g, ""), &w(&g, "a")).unwrap());
        assert!(!hs.separates(&sq, ha, &w(&g, ""), &w(&g, "b")).unwrap());
        assert!(hs.separates(&sq, ha, &w(&g, "a a"), &w(&g, "")).is_err());

        let f = f2();
        let path = develop_hull(&f, &[w(&f, ""), w(&f, "a b a")]);
        let hs = hyperplanes_of(&path);
        assert_eq!(hs.len(), 3);
        assert!(!hs.crosses(0, 1) && !hs.crosses(1, 2));
        assert!(hyperplanes_of(&develop_hull(&f, &[w(&f, "b")])).is_empty());
    }

    #[test]
    fn keys_agree_with_union_find() {
        let g = Arc::new(DefiningGraph::path(3));
        let d = develop_hull(&g, &[w(&g, ""), w(&g, "a b c a^-1"), w(&g, "c b^-1")]);
        let hs = hyperplanes_of(&d);
        let keys: BTreeSet<_> = hs.list.iter().map(|h| h.key.clone()).collect();
        assert_eq!(keys.len(), hs.len());
        for h in &hs.list {
            for &(i, _) in &h.dual_edges {
                assert_eq!(HyperplaneKey::of_edge(&g, d.vertex(i), h.label), h.key);
            }
        }
        for (c, h) in hs.list.iter().enumerate() {
            for a in d.vertices() {
                for b in d.vertices() {
                    assert_eq!(hs.separates(&d, c, a, b).unwrap(), h.key.separates(&g, a, b));
                }
            }
        }
    }

    #[test]
    fn collateral_examples() {
        let f = f2();
        let k = |p: &str, v| HyperplaneKey::of_edge(&f, &w(&f, p), v);
        assert!(collateral(&f, &k("", 0), &k("a", 0)));
        let g = Arc::new(DefiningGraph::path(3));
        let k3 = |p: &str, v| HyperplaneKey::of_edge(&g, &w(&g, p), v);
        assert!(!collateral(&g, &k3("", 0), &k3("c", 0)));
        let z = zz();
        let kz = |p: &str, v| HyperplaneKey::of_edge(&z, &w(&z, p), v);
        assert!(collateral(&z, &kz("", 0), &kz("b", 0)));
        assert_eq!(kz("", 0), kz("b", 0));
    }

    #[test]
    fn frame_examples() {
        let g = zz();
        let sq = develop_hull(&g, &[w(&g, ""), w(&g, "a b")]);
        let hs = hyperplanes_of(&sq);
        let hb = hs.list.iter().position(|h| h.label == 1).unwrap();
        let fr = frame_in(&sq, &hs, hb).unwrap();
        assert_eq!((fr.segment_length, fr.line_label, fr.cross_section), (1, 1, 2));

        let z = Arc::new(DefiningGraph::free(1));
        let seg = develop_hull(&z, &[w(&z, ""), w(&z, "a a a")]);
        let hs = hyperplanes_of(&seg);
        let mid = hs.find_key(&HyperplaneKey::of_edge(&z, &w(&z, "a"), 0)).unwrap();
        let fr = frame_in(&seg, &hs, mid).unwrap();
        assert_eq!(fr.segment_length, 3);
        assert_eq!(fr.line_base, NormalForm::identity());

        let f = f2();
        let path = develop_hull(&f, &[w(&f, ""), w(&f, "a b")]);
        let hs = hyperplanes_of(&path);
        let hb = hs.list.iter().position(|h| h.label == 1).unwrap();
        assert_eq!(frame_in(&path, &hs, hb).unwrap().segment_length, 1);
    }
}
