//! Building the complex `Y` that separates `g` from `π₁Z`.
//!
//! Given a compact based local isometry `Z → S_Γ` and `g ∉ π₁Z`, the
//! construction develops a fundamental domain `Ẑ` and the hull `K` of
//! `Ẑ ∪ {g}` in `S̃_Γ`, sorts the hyperplanes of `K`, and maps `K` onto a
//! stack of copies of the canonical completion of `Z`, one copy per
//! hyperplane crossed on the way from `Z̃` to `g`. The union with `Z` is then
//! saturated until it has no missing corners.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::complex::{CoverComplex, LabeledComplex, Vertex};
use crate::develop::{
    collateral, develop_hull, frame_in, gate_projection, hyperplanes_of, DevelopedComplex, HyperplaneKey,
    Hyperplanes,
};
use crate::error::{Error, Result};
use crate::raag::{DefiningGraph, Gen, Letter, NormalForm};
use crate::separate::member;

/// Image in `Z` of a vertex of `Z̃`: the endpoint of its normal form traced from the base.
pub fn project(z: &LabeledComplex, p: &NormalForm) -> Option<Vertex> {
    z.trace(p.letters(), z.base()).ok()
}

#[derive(Clone, Debug)]
pub struct Setup {
    pub z_hat: DevelopedComplex,
    pub k: DevelopedComplex,
    pub g: NormalForm,
}

/// Lift of a spanning tree of `Z` plus the far endpoint of
/// every non-tree edge.
pub fn fundamental_domain(z: &LabeledComplex) -> Result<Vec<NormalForm>> {
    let graph = z.graph();
    let paths = z.tree_paths();
    if paths.iter().any(Option::is_none) {
        return Err(Error::Input("complex is not connected".into()));
    }
    let paths: Vec<Vec<Letter>> = paths.into_iter().map(Option::unwrap).collect();
    let mut points: BTreeSet<NormalForm> = paths.iter().map(|p| graph.nf(p)).collect();
    for (v, x, _) in z.edges() {
        let mut w = paths[x].clone();
        w.push(Letter::new(v, false));
        points.insert(graph.nf(&w));
    }
    Ok(points.into_iter().collect())
}

fn check_input(z: &LabeledComplex, g: &NormalForm) -> Result<()> {
    z.graph().check_word(g.letters())?;
    let report = z.check_local_isometry()?;
    if !report.passes() {
        return Err(Error::Precondition(format!(
            "complex is not a local isometry ({} missing squares)",
            report.violations.len()
        )));
    }
    if !z.is_connected() {
        return Err(Error::Input("complex is not connected".into()));
    }
    if member(z, g) {
        return Err(Error::Precondition("g lies in π₁Z".into()));
    }
    Ok(())
}

pub fn setup(z: &LabeledComplex, g: &NormalForm) -> Result<Setup> {
    check_input(z, g)?;
    let graph = z.graph();
    let points = fundamental_domain(z)?;
    let z_hat = develop_hull(graph, &points);
    let mut with_g = z_hat.vertices().to_vec();
    with_g.push(g.clone());
    let k = develop_hull(graph, &with_g);
    Ok(Setup {
        z_hat,
        k,
        g: g.clone(),
    })
}

/// A standard segment `base, base·v, …, base·v^length`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Segment {
    pub base: NormalForm,
    pub label: Gen,
    pub length: usize,
}

/// Vertex indices of the maximal `v`-segment of `k` through vertex `i`.
fn maximal_segment(k: &DevelopedComplex, i: usize, v: Gen) -> Vec<usize> {
    let l = Letter::new(v, false);
    let mut start = i;
    while let Some(j) = k.step(start, l.inverse()) {
        start = j;
    }
    let mut out = vec![start];
    while let Some(j) = k.step(*out.last().unwrap(), l) {
        out.push(j);
    }
    out
}

/// Length of the `σ_v`-cycle through `x` in `Z`, if its orbit is a cycle.
fn cycle_length(z: &LabeledComplex, x: Vertex, v: Gen) -> Option<usize> {
    let l = Letter::new(v, false);
    let mut y = z.step(x, l)?;
    let mut n = 1;
    while y != x {
        y = z.step(y, l)?;
        n += 1;
    }
    Some(n)
}

/// If `segment ∩ Ẑ` has non-contractible image in `Z`, the length of the
/// cycle it wraps around.
fn wraps(z: &LabeledComplex, k: &DevelopedComplex, z_hat: &DevelopedComplex, segment: &[usize], v: Gen) -> Option<usize> {
    let inside: Vec<usize> = segment.iter().copied().filter(|&i| z_hat.contains(k.vertex(i))).collect();
    let first = *inside.first()?;
    let x = project(z, k.vertex(first))?;
    let n = cycle_length(z, x, v)?;
    (inside.len() > n).then_some(n)
}

/// Whether the conditions on the chosen hyperplanes hold.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChainConditions {
    /// Each `H_i` separates `H_{i+1}` from the floor.
    pub nested: bool,
    /// Hyperplanes between chain members are collateral to a member in between.
    pub collateral_gaps: bool,
    /// Frame lines of chain members meet `Ẑ` in contractible pieces.
    pub contractible: bool,
}

impl ChainConditions {
    pub fn all(&self) -> bool {
        self.nested && self.collateral_gaps && self.contractible
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainLink {
    /// Index of `H_i` among the hyperplanes of `K`.
    pub hyperplane: usize,
    pub key: HyperplaneKey,
    /// The standard segment `L_i` of its frame in `K`.
    pub segment: Segment,
    /// Members of `ℌ` collateral to `H_i`.
    pub members: Vec<usize>,
}

impl ChainLink {
    pub fn length(&self) -> usize {
        self.segment.length
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Chain {
    pub links: Vec<ChainLink>,
    pub conditions: ChainConditions,
}

/// The classification of the hyperplanes `𝔖` of `K`.
///
/// `𝔷` crosses `Ẑ`; `𝔑` crosses the floor `⌊Z⌋ = hull(Ẑ ∪ 𝔏)` but not `Ẑ`;
/// `ℌ` separates `Z̃ ∩ K` from `g`; `𝔗` crosses `Z̃ ∩ K` without being in
/// `𝔷 ∪ 𝔑`; `𝔅` is everything else.
#[derive(Clone, Debug)]
pub struct HyperplanePartition {
    pub hyperplanes: Hyperplanes,
    pub z_class: Vec<usize>,
    pub n_class: Vec<usize>,
    /// `n_N` for each member of `𝔑`.
    pub n_cycle: BTreeMap<usize, usize>,
    /// Collateral classes `𝔑′_j` in `𝔖` of the members of `𝔑` (they include `𝔷` members).
    pub n_collateral: Vec<Vec<usize>>,
    /// The segment list `𝔏`.
    pub segments: Vec<Segment>,
    pub floor: DevelopedComplex,
    /// `K ∩ Z̃`: the vertices of `K` whose normal forms lift to `Z`.
    pub lifted_floor: DevelopedComplex,
    pub t_class: Vec<usize>,
    /// Hyperplanes separating `Z̃ ∩ K` from `g`.
    pub separating: Vec<usize>,
    pub h_class: Vec<usize>,
    pub b_class: Vec<usize>,
    pub chain: Chain,
    /// Side of `g` for each hyperplane (true = far side).
    g_side: Vec<bool>,
    /// `far[h][i]`: vertex `i` of `K` is on the far side of hyperplane `h`.
    far: Vec<Vec<bool>>,
}

impl HyperplanePartition {
    /// Number of `ℌ` hyperplanes separating vertex `i` of `K` from `Z̃ ∩ K`.
    pub fn level(&self, i: usize) -> usize {
        self.h_class.iter().filter(|&&h| self.far[h][i] == self.g_side[h]).count()
    }

    pub fn is_h(&self, h: usize) -> bool {
        self.h_class.binary_search(&h).is_ok()
    }

    /// Class name of hyperplane `h`.
    pub fn class_name(&self, h: usize) -> &'static str {
        let has = |v: &Vec<usize>| v.contains(&h);
        if has(&self.z_class) {
            "Z"
        } else if has(&self.n_class) {
            "N"
        } else if has(&self.h_class) {
            "H"
        } else if has(&self.t_class) {
            "T"
        } else {
            "B"
        }
    }
}

fn crosses_complex(hs: &Hyperplanes, h: usize, d: &DevelopedComplex, k: &DevelopedComplex) -> bool {
    hs.list[h]
        .dual_edges
        .iter()
        .any(|&(i, j)| d.contains(k.vertex(i)) && d.contains(k.vertex(j)))
}

pub fn partition_hyperplanes(s: &Setup, z: &LabeledComplex) -> Result<HyperplanePartition> {
    let graph = z.graph();
    let k = &s.k;
    let hs = hyperplanes_of(k);
    let n = hs.len();

    let z_class: Vec<usize> = (0..n).filter(|&h| crosses_complex(&hs, h, &s.z_hat, k)).collect();

    // 𝔏: maximal segments of K whose part in Ẑ wraps a cycle of Z
    let mut segments = BTreeSet::new();
    let mut floor_points = s.z_hat.vertices().to_vec();
    for p in s.z_hat.vertices() {
        let i = k.index_of(p).unwrap();
        for v in 0..graph.len() {
            let seg = maximal_segment(k, i, v);
            if wraps(z, k, &s.z_hat, &seg, v).is_some()
                && segments.insert(Segment {
                    base: k.vertex(seg[0]).clone(),
                    label: v,
                    length: seg.len() - 1,
                })
            {
                floor_points.extend(seg.iter().map(|&j| k.vertex(j).clone()));
            }
        }
    }
    let floor = develop_hull(graph, &floor_points);

    let mut n_class = Vec::new();
    let mut n_cycle = BTreeMap::new();
    for h in 0..n {
        if z_class.contains(&h) {
            continue;
        }
        let v = hs.list[h].label;
        let mut lengths = BTreeSet::new();
        for &(i, _) in &hs.list[h].dual_edges {
            if let Some(c) = wraps(z, k, &s.z_hat, &maximal_segment(k, i, v), v) {
                lengths.insert(c);
            }
        }
        match lengths.len() {
            0 => {}
            1 => {
                n_class.push(h);
                n_cycle.insert(h, *lengths.first().unwrap());
            }
            _ => {
                return Err(Error::Invariant(format!(
                    "cycle lengths {:?} disagree across the frame of {}",
                    lengths,
                    hs.list[h].key.format(graph)
                )))
            }
        }
    }
    for h in 0..n {
        let crosses_floor = crosses_complex(&hs, h, &floor, k);
        if crosses_floor != (z_class.contains(&h) || n_class.contains(&h)) {
            return Err(Error::Invariant(format!(
                "{} crosses the floor but is neither in 𝔷 nor in 𝔑, or the reverse",
                hs.list[h].key.format(graph)
            )));
        }
    }
    let mut n_collateral: Vec<Vec<usize>> = Vec::new();
    for &h in &n_class {
        if n_collateral.iter().any(|c| c.contains(&h)) {
            continue;
        }
        let class: Vec<usize> = (0..n)
            .filter(|&x| collateral(graph, &hs.list[h].key, &hs.list[x].key))
            .collect();
        if !class.iter().any(|x| z_class.contains(x)) {
            return Err(Error::Invariant(format!(
                "{} is collateral to no hyperplane crossing Ẑ",
                hs.list[h].key.format(graph)
            )));
        }
        n_collateral.push(class);
    }

    let lifted: Vec<NormalForm> = k.vertices().iter().filter(|p| project(z, p).is_some()).cloned().collect();
    let lifted_floor = DevelopedComplex::spanned(graph, lifted);
    if !floor.is_subset_of(&lifted_floor) {
        return Err(Error::Invariant("floor does not lift to Z".into()));
    }

    let far: Vec<Vec<bool>> = hs.list.iter().map(|h| k.far_side(&h.key)).collect();
    let g_idx = k.index_of(&s.g).unwrap();
    let g_side: Vec<bool> = (0..n).map(|h| far[h][g_idx]).collect();
    let lifted_idx: Vec<usize> = lifted_floor.vertices().iter().map(|p| k.index_of(p).unwrap()).collect();
    let separating: Vec<usize> = (0..n)
        .filter(|&h| lifted_idx.iter().all(|&i| far[h][i] != g_side[h]))
        .collect();
    let t_class: Vec<usize> = (0..n)
        .filter(|&h| {
            !z_class.contains(&h) && !n_class.contains(&h) && crosses_complex(&hs, h, &lifted_floor, k)
        })
        .collect();

    let mut part = HyperplanePartition {
        hyperplanes: hs,
        z_class,
        n_class,
        n_cycle,
        n_collateral,
        segments: segments.into_iter().collect(),
        floor,
        lifted_floor,
        t_class,
        separating,
        h_class: Vec::new(),
        b_class: Vec::new(),
        chain: Chain::default(),
        g_side,
        far,
    };
    part.chain = select_chain(&part, s, z)?;
    let mut h_class: Vec<usize> = part.chain.links.iter().flat_map(|l| l.members.iter().copied()).collect();
    h_class.sort_unstable();
    part.b_class = (0..n)
        .filter(|h| {
            !part.z_class.contains(h)
                && !part.n_class.contains(h)
                && !part.t_class.contains(h)
                && h_class.binary_search(h).is_err()
        })
        .collect();
    part.h_class = h_class;
    Ok(part)
}

/// Greedy nested chain among the hyperplanes separating `Z̃ ∩ K` from `g`:
/// take them by depth and keep each one that lies beyond the previous pick
/// and is not collateral to an earlier pick. The chain conditions are
/// evaluated and reported.
pub fn select_chain(part: &HyperplanePartition, s: &Setup, z: &LabeledComplex) -> Result<Chain> {
    let graph = z.graph();
    let k = &s.k;
    let hs = &part.hyperplanes;
    let floor_idx: Vec<usize> = part.lifted_floor.vertices().iter().map(|p| k.index_of(p).unwrap()).collect();
    // h separates the vertex sets a and b
    let splits = |h: usize, a: &[usize], b: &[usize]| {
        let sa = part.far[h][a[0]];
        a.iter().all(|&i| part.far[h][i] == sa) && b.iter().all(|&i| part.far[h][i] != sa)
    };
    let ends = |h: usize| -> Vec<usize> { hs.list[h].dual_edges.iter().flat_map(|&(i, j)| [i, j]).collect() };
    let behind = |i: usize| {
        part.separating
            .iter()
            .filter(|&&h| part.far[h][i] == part.g_side[h])
            .count()
    };
    let depth = |h: usize| {
        hs.list[h]
            .dual_edges
            .iter()
            .map(|&(i, j)| behind(i).min(behind(j)))
            .min()
            .unwrap()
    };
    let mut candidates = part.separating.clone();
    candidates.sort_by_key(|&h| (depth(h), hs.list[h].key.clone()));
    let mut reps: Vec<usize> = Vec::new();
    for h in candidates {
        let key = &hs.list[h].key;
        if reps.iter().any(|&r| collateral(graph, &hs.list[r].key, key)) {
            continue;
        }
        if reps.last().is_some_and(|&last| !splits(last, &floor_idx, &ends(h))) {
            continue;
        }
        reps.push(h);
    }
    let mut links = Vec::new();
    for rep in reps {
        let frame = frame_in(k, hs, rep)?;
        let members: Vec<usize> = part
            .separating
            .iter()
            .copied()
            .filter(|&h| collateral(graph, &hs.list[rep].key, &hs.list[h].key))
            .collect();
        links.push(ChainLink {
            hyperplane: rep,
            key: hs.list[rep].key.clone(),
            segment: Segment {
                base: frame.line_base,
                label: frame.line_label,
                length: frame.segment_length,
            },
            members,
        });
    }

    let g_idx = k.index_of(&s.g).unwrap();
    let nested = links
        .windows(2)
        .all(|w| splits(w[0].hyperplane, &floor_idx, &ends(w[1].hyperplane)));
    let coll = |h: usize, range: &[ChainLink]| range.iter().any(|l| collateral(graph, &hs.list[h].key, &l.key));
    let mut gaps = true;
    for i in 0..links.len() {
        for j in i + 1..links.len() {
            let (a, b) = (ends(links[i].hyperplane), ends(links[j].hyperplane));
            for h in 0..hs.len() {
                if h != links[i].hyperplane && h != links[j].hyperplane && splits(h, &a, &b) && !coll(h, &links[i..=j]) {
                    gaps = false;
                }
            }
        }
    }
    if let (Some(first), Some(last)) = (links.first(), links.last()) {
        let (a, b) = (ends(first.hyperplane), ends(last.hyperplane));
        for h in 0..hs.len() {
            if h != first.hyperplane && splits(h, &a, &floor_idx) && !coll(h, std::slice::from_ref(first)) {
                gaps = false;
            }
            if h != last.hyperplane && splits(h, &b, &[g_idx]) && !coll(h, std::slice::from_ref(last)) {
                gaps = false;
            }
        }
    }
    let contractible = links.iter().all(|l| {
        hs.list[l.hyperplane]
            .dual_edges
            .iter()
            .all(|&(i, _)| wraps(z, k, &s.z_hat, &maximal_segment(k, i, l.key.label), l.key.label).is_none())
    });
    Ok(Chain {
        links,
        conditions: ChainConditions {
            nested,
            collateral_gaps: gaps,
            contractible,
        },
    })
}

/// The map `𝔮: ⌊Z⌋ → Z` as a table, with the exponent data defining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientPlan {
    pub points: Vec<NormalForm>,
    pub image: Vec<Vertex>,
    /// Signed counts `r_j` of `𝔑′_j` hyperplanes between each point and `Ẑ`.
    pub exponents: Vec<Vec<i64>>,
    pub moduli: Vec<usize>,
    pub labels: Vec<Gen>,
}

impl QuotientPlan {
    pub fn get(&self, p: &NormalForm) -> Option<Vertex> {
        self.points.binary_search(p).ok().map(|i| self.image[i])
    }
}

fn push(z: &LabeledComplex, x: Vertex, v: Gen, steps: usize) -> Option<Vertex> {
    let l = Letter::new(v, false);
    (0..steps).try_fold(x, |y, _| z.step(y, l))
}

/// Applies the class pushes in `order` starting from `x`.
fn push_all(z: &LabeledComplex, x: Vertex, plan_row: &[i64], moduli: &[usize], labels: &[Gen], order: &[usize]) -> Option<Vertex> {
    order.iter().try_fold(x, |y, &j| {
        push(z, y, labels[j], plan_row[j].rem_euclid(moduli[j] as i64) as usize)
    })
}

fn orders(s: usize) -> Vec<Vec<usize>> {
    let id: Vec<usize> = (0..s).collect();
    if s <= 4 {
        let mut out = vec![];
        fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k == cur.len() {
                out.push(cur.clone());
            }
            for i in k..cur.len() {
                cur.swap(k, i);
                rec(k + 1, cur, out);
                cur.swap(k, i);
            }
        }
        rec(0, &mut id.clone(), &mut out);
        out
    } else {
        (0..s).map(|r| (0..s).map(|i| (i + r) % s).collect()).collect()
    }
}

/// `⌊Z⌋` and the quotient `𝔮`: gate into `Ẑ`, project, then push along each
/// `𝔑` class by the signed number of its hyperplanes crossed, modulo its cycle.
pub fn floor_and_quotient(s: &Setup, z: &LabeledComplex, part: &HyperplanePartition) -> Result<(DevelopedComplex, QuotientPlan)> {
    let graph = z.graph();
    let hs = &part.hyperplanes;
    let k = &s.k;
    let floor = part.floor.clone();
    let mut moduli = Vec::new();
    let mut labels = Vec::new();
    for class in &part.n_collateral {
        let ns: BTreeSet<usize> = class.iter().filter_map(|h| part.n_cycle.get(h)).copied().collect();
        if ns.len() != 1 {
            return Err(Error::Invariant(format!("collateral class carries cycle lengths {ns:?}")));
        }
        moduli.push(*ns.first().unwrap());
        labels.push(hs.list[class[0]].label);
    }
    let all_orders = orders(moduli.len());
    let mut plan = QuotientPlan {
        points: floor.vertices().to_vec(),
        image: Vec::new(),
        exponents: Vec::new(),
        moduli,
        labels,
    };
    for p in floor.vertices() {
        let gate = s.z_hat.gate(p)?;
        let start = project(z, &gate).ok_or_else(|| Error::Invariant("Ẑ does not lift to Z".into()))?;
        let (ip, ig) = (k.index_of(p).unwrap(), k.index_of(&gate).unwrap());
        let mut row = vec![0i64; plan.moduli.len()];
        for h in 0..hs.len() {
            if part.far[h][ip] == part.far[h][ig] {
                continue;
            }
            let j = part
                .n_collateral
                .iter()
                .position(|c| c.contains(&h))
                .ok_or_else(|| Error::Invariant(format!("{} separates the floor from Ẑ outside 𝔑", hs.list[h].key.format(graph))))?;
            row[j] += if part.far[h][ip] { 1 } else { -1 };
        }
        let mut images = BTreeSet::new();
        for order in &all_orders {
            let img = push_all(z, start, &row, &plan.moduli, &plan.labels, order)
                .ok_or_else(|| Error::Invariant("quotient push leaves Z".into()))?;
            images.insert(img);
        }
        if images.len() != 1 {
            return Err(Error::Invariant("quotient depends on the order of the 𝔑 classes".into()));
        }
        let img = *images.first().unwrap();
        if Some(img) != project(z, p) {
            return Err(Error::Invariant(format!(
                "quotient disagrees with the covering projection at {}",
                graph.format_word(p.letters())
            )));
        }
        plan.image.push(img);
        plan.exponents.push(row);
    }
    for (i, v, j) in floor.edges() {
        if !z.has_edge(v, plan.image[i], plan.image[j]) {
            return Err(Error::Invariant("quotient does not map edges to edges".into()));
        }
    }
    Ok((floor, plan))
}

/// Where each vertex of `K` goes: a level (the number of `ℌ` hyperplanes
/// crossed from the floor) and a vertex of the completion of `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelMap {
    pub level: Vec<usize>,
    pub position: Vec<Vertex>,
    pub top: usize,
}

/// Follows `K` outward from the base: `ℌ` edges raise or lower the level,
/// all other edges move by the canonical completion of `Z`.
pub fn level_map(s: &Setup, z: &LabeledComplex, part: &HyperplanePartition, cover: &CoverComplex) -> Result<LevelMap> {
    let k = &s.k;
    let hs = &part.hyperplanes;
    let r = z.graph().len();
    let level: Vec<usize> = (0..k.len()).map(|i| part.level(i)).collect();
    let start = k.index_of(&NormalForm::identity()).unwrap();
    let mut position: Vec<Option<Vertex>> = vec![None; k.len()];
    position[start] = Some(z.base());
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        let px = position[x].unwrap();
        for l in Letter::all(r) {
            let Some(y) = k.step(x, l) else { continue };
            let h = hs.class_at(k, x, l).unwrap();
            let py = if part.is_h(h) {
                if level[x].abs_diff(level[y]) != 1 {
                    return Err(Error::Invariant("ℌ edge does not change level by one".into()));
                }
                px
            } else {
                if level[x] != level[y] {
                    return Err(Error::Invariant("non-ℌ edge changes level".into()));
                }
                cover.act(px, &[l])
            };
            match position[y] {
                None => {
                    position[y] = Some(py);
                    queue.push_back(y);
                }
                Some(q) if q != py => {
                    return Err(Error::Invariant("level map is not well defined".into()));
                }
                Some(_) => {}
            }
        }
    }
    let position: Vec<Vertex> = position.into_iter().map(|p| p.expect("K is connected")).collect();
    for p in part.lifted_floor.vertices() {
        let i = k.index_of(p).unwrap();
        if level[i] != 0 || Some(position[i]) != project(z, p) {
            return Err(Error::Invariant("level map disagrees with the projection on Z̃ ∩ K".into()));
        }
    }
    let top = level.iter().copied().max().unwrap_or(0);
    Ok(LevelMap { level, position, top })
}

/// Identifier of the copy of `Z` vertex `x` at `level` in an assembled piece.
pub fn piece_id(z: &LabeledComplex, level: usize, x: Vertex) -> u64 {
    (level * z.vertex_count() + x) as u64
}

fn decode(z: &LabeledComplex, id: u64) -> (usize, Vertex) {
    let n = z.vertex_count() as u64;
    ((id / n) as usize, (id % n) as usize)
}

/// Image of a set of vertices of `K` under the level map, as a labeled
/// complex with ids from [`piece_id`].
fn image_piece(s: &Setup, z: &LabeledComplex, lm: &LevelMap, verts: &[usize], base: usize) -> Result<LabeledComplex> {
    let k = &s.k;
    let inside: BTreeSet<usize> = verts.iter().copied().collect();
    let ids: BTreeSet<u64> = verts.iter().map(|&i| piece_id(z, lm.level[i], lm.position[i])).collect();
    let ids: Vec<u64> = ids.into_iter().collect();
    let at = |i: usize| ids.binary_search(&piece_id(z, lm.level[i], lm.position[i])).unwrap();
    let mut c = LabeledComplex::new(z.graph().clone(), ids.len(), at(base));
    for (i, v, j) in k.edges() {
        if inside.contains(&i) && inside.contains(&j) {
            c.add_edge(v, at(i), at(j)).map_err(|e| Error::ConstructionIncomplete(format!("piece is not immersed: {e}")))?;
        }
    }
    c.set_ids(ids);
    Ok(c)
}

/// The quotient of the frame of a chain hyperplane.
#[derive(Clone, Debug)]
pub struct FramePiece {
    pub link: usize,
    /// The frame's hyperplane crosses a hyperplane of `Ẑ`.
    pub interfered: bool,
    pub complex: LabeledComplex,
}

pub fn frame_quotient(s: &Setup, z: &LabeledComplex, part: &HyperplanePartition, lm: &LevelMap, link: usize) -> Result<FramePiece> {
    let graph = z.graph();
    let k = &s.k;
    let hs = &part.hyperplanes;
    let l = &part.chain.links[link];
    let v = l.key.label;
    let (src, _) = hs.list[l.hyperplane].dual_edges[0];
    let p = k.vertex(src);
    let verts: Vec<usize> = (0..k.len())
        .filter(|&i| graph.in_standard_subgroup(&graph.left_quotient(p, k.vertex(i)), graph.star(v)))
        .collect();
    let base = *verts
        .iter()
        .min_by_key(|&&i| (lm.level[i], lm.position[i]))
        .unwrap();
    let carrier: Vec<NormalForm> = hs.list[l.hyperplane]
        .dual_edges
        .iter()
        .map(|&(i, j)| if lm.level[i] < lm.level[j] { k.vertex(i) } else { k.vertex(j) }.clone())
        .collect();
    let near = develop_hull(graph, &carrier);
    let interfered = gate_projection(&s.z_hat, &near)?.edge_count() > 0;
    debug_assert_eq!(
        interfered,
        part.z_class.iter().any(|&w| hs.crosses(w, l.hyperplane))
    );
    Ok(FramePiece {
        link,
        interfered,
        complex: image_piece(s, z, lm, &verts, base)?,
    })
}

/// Image of all of `K`; it contains every frame piece and the path to `g`.
pub fn hull_piece(s: &Setup, z: &LabeledComplex, lm: &LevelMap) -> Result<LabeledComplex> {
    let all: Vec<usize> = (0..s.k.len()).collect();
    let base = s.k.index_of(&NormalForm::identity()).unwrap();
    image_piece(s, z, lm, &all, base)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SaturationLog {
    /// Edges added between existing vertices.
    pub transports: usize,
    /// Added edges that closed a chain into a cycle.
    pub closures: usize,
    /// Level copies of `Z` vertices created as missing corners.
    pub corners: usize,
}

/// `Y` under construction: every vertex is a copy `(level, x)` of a vertex
/// `x` of `Z`. An edge either changes the level by one and keeps `x`
/// (vertical) or keeps the level and follows the completion of `Z`
/// (horizontal), so the missing corner of any square is determined.
struct Layered<'a> {
    y: LabeledComplex,
    coords: Vec<(usize, Vertex)>,
    cover: &'a CoverComplex,
    z_len: usize,
}

impl<'a> Layered<'a> {
    fn new(z: &LabeledComplex, cover: &'a CoverComplex) -> Self {
        Layered {
            y: z.clone(),
            coords: (0..z.vertex_count()).map(|x| (0, x)).collect(),
            cover,
            z_len: z.vertex_count(),
        }
    }

    fn find(&self, c: (usize, Vertex)) -> Option<Vertex> {
        if c.0 == 0 {
            Some(c.1)
        } else {
            self.coords[self.z_len..].iter().position(|&d| d == c).map(|i| i + self.z_len)
        }
    }

    fn vertex(&mut self, c: (usize, Vertex), log: &mut SaturationLog) -> Vertex {
        self.find(c).unwrap_or_else(|| {
            log.corners += 1;
            self.coords.push(c);
            self.y.add_vertex()
        })
    }

    /// Where the edge of type `(x --l--> x')` leads when moved to `w`.
    fn shift(&self, x: Vertex, l: Letter, w: Vertex) -> Option<(usize, Vertex)> {
        let (lx, _) = self.coords[x];
        let (lt, _) = self.coords[self.y.step(x, l)?];
        let (lw, pw) = self.coords[w];
        Some(if lt == lx {
            (lw, self.cover.act(pw, &[l]))
        } else {
            ((lw + lt).checked_sub(lx)?, pw)
        })
    }

    fn add(&mut self, w: Vertex, l: Letter, t: Vertex, log: &mut SaturationLog) -> Result<()> {
        let (src, dst) = if l.is_inverse() { (t, w) } else { (w, t) };
        let closes = self.y.trace(&[l], t).is_ok() || {
            // does the new edge close its chain into a cycle?
            let fwd = Letter::new(l.gen(), false);
            let mut p = dst;
            while let Some(q) = self.y.step(p, fwd) {
                p = q;
            }
            p == src
        };
        self.y
            .add_edge(l.gen(), src, dst)
            .map_err(|e| Error::ConstructionIncomplete(format!("saturation blocked: {e}")))?;
        if closes {
            log.closures += 1;
        } else {
            log.transports += 1;
        }
        Ok(())
    }

    /// Completes missing squares in breadth-first order from the base until
    /// none remain.
    fn saturate(&mut self) -> Result<SaturationLog> {
        let mut log = SaturationLog::default();
        let cap = self.z_len * (self.coords.iter().map(|c| c.0).max().unwrap_or(0) + 2);
        loop {
            let report = self.y.check_local_isometry()?;
            let order = bfs_order(&self.y);
            let mut rank = vec![0; self.y.vertex_count()];
            for (i, &x) in order.iter().enumerate() {
                rank[x] = i;
            }
            let Some(viol) = report.violations.iter().min_by_key(|v| (rank[v.vertex], v.a, v.b)).copied() else {
                return Ok(log);
            };
            let (x, a, b) = (viol.vertex, viol.a, viol.b);
            let (xa, xb) = (self.y.step(x, a).unwrap(), self.y.step(x, b).unwrap());
            let c1 = self.shift(x, b, xa);
            let c2 = self.shift(x, a, xb);
            let corner = match (c1, c2) {
                (Some(c1), Some(c2)) if c1 == c2 => c1,
                _ => {
                    return Err(Error::ConstructionIncomplete(format!(
                        "square at vertex {} has no consistent corner",
                        self.y.ids()[x]
                    )))
                }
            };
            let w = self.vertex(corner, &mut log);
            if self.y.vertex_count() > cap {
                return Err(Error::Invariant("saturation exceeded the level bound".into()));
            }
            if self.y.step(xa, b) != Some(w) {
                self.add(xa, b, w, &mut log)?;
            }
            if self.y.step(xb, a) != Some(w) {
                self.add(xb, a, w, &mut log)?;
            }
        }
    }
}

fn bfs_order(y: &LabeledComplex) -> Vec<Vertex> {
    let mut seen = vec![false; y.vertex_count()];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([y.base()]);
    seen[y.base()] = true;
    while let Some(x) = queue.pop_front() {
        order.push(x);
        for l in Letter::all(y.graph().len()) {
            if let Some(w) = y.step(x, l) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order.extend((0..y.vertex_count()).filter(|&x| !seen[x]));
    order
}

/// Glues the pieces onto `Z` (level-0 copies are `Z` itself) and saturates.
///
/// Piece vertex ids are [`piece_id`]s. Saturation may create further level
/// copies of `Z` vertices as corners of missing squares.
pub fn glue_and_saturate(z: &LabeledComplex, cover: &CoverComplex, pieces: &[LabeledComplex]) -> Result<(LabeledComplex, SaturationLog)> {
    let mut lay = Layered::new(z, cover);
    let mut glue_log = SaturationLog::default();
    let mut extra: BTreeSet<(usize, Vertex)> = BTreeSet::new();
    for piece in pieces {
        extra.extend(piece.ids().iter().map(|&id| decode(z, id)).filter(|c| c.0 > 0));
    }
    for c in extra {
        lay.vertex(c, &mut glue_log);
    }
    for piece in pieces {
        for (v, a, b) in piece.edges() {
            let ya = lay.find(decode(z, piece.ids()[a])).unwrap();
            let yb = lay.find(decode(z, piece.ids()[b])).unwrap();
            lay.y
                .add_edge(v, ya, yb)
                .map_err(|e| Error::ConstructionIncomplete(format!("gluing conflict: {e}")))?;
        }
    }
    let log = lay.saturate()?;
    Ok((lay.y, log))
}

/// Every intermediate object of one run.
#[derive(Clone, Debug)]
pub struct Construction {
    pub setup: Setup,
    pub partition: HyperplanePartition,
    pub floor: DevelopedComplex,
    pub plan: QuotientPlan,
    pub levels: LevelMap,
    pub pieces: Vec<FramePiece>,
    pub y: LabeledComplex,
    pub saturation: SaturationLog,
}

pub fn construct(z: &LabeledComplex, g: &NormalForm) -> Result<Construction> {
    let s = setup(z, g)?;
    let part = partition_hyperplanes(&s, z)?;
    let (floor, plan) = floor_and_quotient(&s, z, &part)?;
    let cover = z.canonical_completion()?;
    let lm = level_map(&s, z, &part, &cover)?;
    let pieces = (0..part.chain.links.len())
        .map(|i| frame_quotient(&s, z, &part, &lm, i))
        .collect::<Result<Vec<_>>>()?;
    let mut all: Vec<LabeledComplex> = pieces.iter().map(|p| p.complex.clone()).collect();
    all.push(hull_piece(&s, z, &lm)?);
    let (y, saturation) = glue_and_saturate(z, &cover, &all)?;
    let report = verify_theorem_a(z, g, &y);
    if !report.passes() {
        return Err(Error::Verification(format!("constructed Y fails: {}", report.failures().join(", "))));
    }
    Ok(Construction {
        setup: s,
        partition: part,
        floor,
        plan,
        levels: lm,
        pieces,
        y,
        saturation,
    })
}

/// The complex `Y`: contains `Z`, locally isometric to `S_Γ`, `g` lifts to a
/// non-closed path, and `|Y⁰| ≤ |Z⁰|(|g| + 1)`.
pub fn theorem_a(z: &LabeledComplex, g: &NormalForm) -> Result<LabeledComplex> {
    Ok(construct(z, g)?.y)
}

/// Outcome of checking the four conclusions on a candidate `Y`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TheoremAReport {
    pub contains_z: bool,
    pub local_isometry: bool,
    pub g_not_closed: bool,
    pub sampled_words: usize,
    pub sampled_words_ok: bool,
    pub size: usize,
    pub bound: usize,
    pub within_bound: bool,
}

impl TheoremAReport {
    pub fn passes(&self) -> bool {
        self.contains_z && self.local_isometry && self.g_not_closed && self.sampled_words_ok && self.within_bound
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.contains_z {
            out.push("Z is not a based subcomplex of Y");
        }
        if !self.local_isometry {
            out.push("Y is not a local isometry");
        }
        if !self.g_not_closed {
            out.push("g lifts to a closed path or not at all");
        }
        if !self.sampled_words_ok {
            out.push("some word for g lifts to a closed path");
        }
        if !self.within_bound {
            out.push("|Y⁰| exceeds |Z⁰|(|g|+1)");
        }
        out
    }
}

/// Other words for `g`: commutation shuffles and inserted cancelling pairs.
pub fn sample_words(graph: &DefiningGraph, g: &NormalForm, count: usize, seed: u64) -> Vec<Vec<Letter>> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let letters: Vec<Letter> = Letter::all(graph.len()).collect();
    let mut out = Vec::with_capacity(count);
    for t in 0..count {
        let mut w = g.letters().to_vec();
        for _ in 0..w.len() {
            let i = rng.gen_range(0..w.len().max(1));
            if i + 1 < w.len() && w[i].gen() != w[i + 1].gen() && graph.adjacent(w[i].gen(), w[i + 1].gen()) {
                w.swap(i, i + 1);
            }
        }
        for _ in 0..t % 3 {
            let l = *letters.choose(&mut rng).unwrap();
            let i = rng.gen_range(0..=w.len());
            w.splice(i..i, [l, l.inverse()]);
        }
        debug_assert_eq!(graph.nf(&w), *g);
        out.push(w);
    }
    out
}

/// Checks the four conclusions. `Z` sits inside `Y` through matching vertex ids.
pub fn verify_theorem_a(z: &LabeledComplex, g: &NormalForm, y: &LabeledComplex) -> TheoremAReport {
    let map: Option<Vec<Vertex>> = z.ids().iter().map(|&id| y.vertex_of_id(id)).collect();
    let contains_z = z.graph() == y.graph() && map.as_ref().is_some_and(|f| z.embeds_via(y, f));
    let local_isometry = y.is_local_isometry();
    let g_not_closed = matches!(y.trace(g.letters(), y.base()), Ok(end) if end != y.base());
    let words = sample_words(y.graph(), g, 12, g.len() as u64 * 7919 + y.vertex_count() as u64);
    let sampled_words_ok = words
        .iter()
        .all(|w| y.trace(w, y.base()) != Ok(y.base()));
    let bound = z.vertex_count() * (g.len() + 1);
    TheoremAReport {
        contains_z,
        local_isometry,
        g_not_closed,
        sampled_words: words.len(),
        sampled_words_ok,
        size: y.vertex_count(),
        bound,
        within_bound: y.vertex_count() <= bound,
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;

    fn w(g: &DefiningGraph, s: &str) -> NormalForm {
        g.normal_form(&g.parse_word(s).unwrap()).unwrap()
    }

    fn words(d: &DevelopedComplex) -> Vec<String> {
        d.vertices().iter().map(|p| d.graph().format_word(p.letters())).collect()
    }

    fn cycle(graph: Arc<DefiningGraph>, n: usize) -> LabeledComplex {
        let mut c = LabeledComplex::new(graph, n, 0);
        for i in 0..n {
            c.add_edge(0, i, (i + 1) % n).unwrap();
        }
        c
    }

    fn aloop(graph: DefiningGraph) -> LabeledComplex {
        cycle(Arc::new(graph), 1)
    }

    fn e1() -> (LabeledComplex, NormalForm) {
        let z = cycle(Arc::new(DefiningGraph::free(1)), 3);
        let g = w(z.graph(), "a");
        (z, g)
    }

    fn e2() -> (LabeledComplex, NormalForm) {
        let z = aloop(DefiningGraph::complete(2));
        let g = w(z.graph(), "b");
        (z, g)
    }

    fn e3() -> (LabeledComplex, NormalForm) {
        let z = aloop(DefiningGraph::free(2));
        let g = w(z.graph(), "b a");
        (z, g)
    }

    #[test]
    fn setup_examples() {
        let (z, g) = e1();
        let s = setup(&z, &g).unwrap();
        assert_eq!(words(&s.z_hat), ["ε", "a", "a a", "a a a"]);
        assert_eq!(words(&s.k), words(&s.z_hat));
        let (z, g) = e2();
        let s = setup(&z, &g).unwrap();
        assert_eq!(words(&s.z_hat), ["ε", "a"]);
        assert_eq!(words(&s.k), ["ε", "a", "b", "a b"]);
        let (z, g) = e3();
        let s = setup(&z, &g).unwrap();
        assert_eq!(words(&s.k), ["ε", "a", "b", "b a"]);
    }

    #[test]
    fn setup_rejects_members() {
        let (z, _) = e1();
        let g = w(z.graph(), "a a a");
        assert!(matches!(setup(&z, &g), Err(Error::Precondition(_))));
    }

    #[test]
    fn partition_examples() {
        let (z, g) = e1();
        let c = construct(&z, &g).unwrap();
        let p = &c.partition;
        assert_eq!(p.z_class.len(), p.hyperplanes.list.len());
        assert!(p.n_class.is_empty() && p.h_class.is_empty() && p.b_class.is_empty());
        assert!(p.chain.links.is_empty());

        let (z, g) = e2();
        let c = construct(&z, &g).unwrap();
        let p = &c.partition;
        let label = |h: usize| p.hyperplanes.list[h].label;
        assert_eq!(p.z_class.iter().map(|&h| label(h)).collect::<Vec<_>>(), [0]);
        assert_eq!(p.h_class.iter().map(|&h| label(h)).collect::<Vec<_>>(), [1]);
        assert!(p.n_class.is_empty() && p.b_class.is_empty());
        assert_eq!(p.chain.links.len(), 1);
        assert_eq!(p.chain.links[0].length(), 1);
    }

    #[test]
    fn wrapped_segment_gives_n_class() {
        // a⁴b leaves Ẑ = {ε, a, a², a³} along the a-line before turning
        let z = cycle(Arc::new(DefiningGraph::free(2)), 3);
        let g = w(z.graph(), "a a a a b");
        let c = construct(&z, &g).unwrap();
        let p = &c.partition;
        assert_eq!(p.n_class.len(), 1);
        let n = p.n_class[0];
        assert_eq!(p.hyperplanes.list[n].label, 0);
        assert_eq!(p.n_cycle[&n], 3);
        assert!(p.floor.contains(&w(z.graph(), "a a a a")));
        assert_eq!(c.plan.get(&w(z.graph(), "a a a a")), Some(1));
        assert_eq!(c.plan.get(&w(z.graph(), "a a a")), Some(0));
        assert!(verify_theorem_a(&z, &g, &c.y).passes());
    }

    #[test]
    fn tree_chain_is_nested() {
        let (z, g) = e3();
        let c = construct(&z, &g).unwrap();
        let links = &c.partition.chain.links;
        assert_eq!(links.len(), 2);
        assert!(links.iter().all(|l| l.length() == 1));
        assert_eq!(c.partition.chain.links[0].key.label, 1);
        assert_eq!(c.partition.chain.links[1].key.label, 0);
    }

    #[test]
    fn floor_examples() {
        let (z, g) = e2();
        let c = construct(&z, &g).unwrap();
        assert_eq!(words(&c.floor), ["ε", "a"]);
        assert_eq!(c.plan.image, [0, 0]);
        let (z, g) = e1();
        let c = construct(&z, &g).unwrap();
        assert_eq!(c.plan.get(&w(z.graph(), "a a a")), Some(0));
        assert_eq!(c.plan.get(&w(z.graph(), "a")), Some(1));
    }

    #[test]
    fn theorem_a_examples() {
        let (z, g) = e1();
        let y = theorem_a(&z, &g).unwrap();
        assert_eq!(y, z);

        let (z, g) = e2();
        let y = theorem_a(&z, &g).unwrap();
        assert_eq!(y.vertex_count(), 2);
        let far = y.trace(g.letters(), y.base()).unwrap();
        assert!(y.has_edge(0, 0, 0) && y.has_edge(0, far, far));
        assert_eq!(y.edge_count(), 3);

        let (z, g) = e3();
        let y = theorem_a(&z, &g).unwrap();
        assert_eq!(y.vertex_count(), 3);
        assert_eq!(y.edge_count(), 3);
        for (z, g) in [e1(), e2(), e3()] {
            let y = theorem_a(&z, &g).unwrap();
            let r = verify_theorem_a(&z, &g, &y);
            assert!(r.passes(), "{:?}", r.failures());
        }
    }

    #[test]
    fn tampering_is_caught() {
        let (z, g) = e2();
        let mut y = theorem_a(&z, &g).unwrap();
        let far = y.trace(g.letters(), y.base()).unwrap();
        y.remove_edge(0, far);
        let r = verify_theorem_a(&z, &g, &y);
        assert!(!r.local_isometry && !r.passes());

        // the trivial subgroup of F₂ and g = ba: re-route the a-edge home
        let z = LabeledComplex::new(Arc::new(DefiningGraph::free(2)), 1, 0);
        let g = w(z.graph(), "b a");
        let mut y = theorem_a(&z, &g).unwrap();
        let mid = y.trace(&g.letters()[..1], 0).unwrap();
        y.remove_edge(0, mid);
        y.add_edge(0, mid, 0).unwrap();
        let r = verify_theorem_a(&z, &g, &y);
        assert!(!r.g_not_closed && !r.passes());
    }

    #[test]
    fn levels_respect_the_bound() {
        let (z, g) = e3();
        let c = construct(&z, &g).unwrap();
        assert!(c.levels.top <= g.len());
        assert!(c.pieces.iter().all(|p| !p.interfered));
        let (z, g) = e2();
        let c = construct(&z, &g).unwrap();
        assert!(c.pieces.iter().all(|p| p.interfered));
    }
}
