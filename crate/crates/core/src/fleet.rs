//! Seeded random instances: defining graphs, valid complexes, and elements
//! outside their fundamental groups.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use serde::Serialize;

use crate::complex::LabeledComplex;
use crate::construct::{theorem_a, verify_theorem_a};
use crate::raag::{DefiningGraph, Gen, Letter, NormalForm};
use crate::separate::member;

pub type FleetRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FleetRng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// A random graph on `1..=max_vertices` generators; each edge present with probability ½.
pub fn random_graph(rng: &mut FleetRng, max_vertices: usize) -> Arc<DefiningGraph> {
    let r = rng.gen_range(1..=max_vertices);
    let mut edges = Vec::new();
    for a in 0..r {
        for b in a + 1..r {
            if rng.gen_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    let names = (0..r).map(|i| ((b'a' + i as u8) as char).to_string()).collect();
    Arc::new(DefiningGraph::from_indices(names, &edges).unwrap())
}

fn compose(p: &[usize], q: &[usize]) -> Vec<usize> {
    // first p, then q
    p.iter().map(|&x| q[x]).collect()
}

fn all_permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    fn rec(k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == cur.len() {
            out.push(cur.clone());
            return;
        }
        for i in k..cur.len() {
            cur.swap(k, i);
            rec(k + 1, cur, out);
            cur.swap(k, i);
        }
    }
    rec(0, &mut cur, &mut out);
    out
}

/// Permutations of `0..m`, one per generator, commuting along the edges of `graph`.
pub fn random_commuting_permutations(rng: &mut FleetRng, graph: &DefiningGraph, m: usize) -> Vec<Vec<usize>> {
    let mut chosen: Vec<Vec<usize>> = Vec::new();
    if m <= 6 {
        let all = all_permutations(m);
        for v in 0..graph.len() {
            let ok: Vec<&Vec<usize>> = all
                .iter()
                .filter(|p| {
                    (0..v)
                        .filter(|&w| graph.adjacent(v, w))
                        .all(|w| compose(p, &chosen[w]) == compose(&chosen[w], p))
                })
                .collect();
            chosen.push((*ok.choose(rng).unwrap()).clone());
        }
    } else {
        // translations of a cyclic group always commute
        for _ in 0..graph.len() {
            let c = rng.gen_range(0..m);
            chosen.push((0..m).map(|x| (x + c) % m).collect());
        }
    }
    chosen
}

/// A random cover of `S_Γ` of degree `m`, not necessarily connected.
pub fn random_cover(rng: &mut FleetRng, graph: &Arc<DefiningGraph>, m: usize) -> LabeledComplex {
    let perms = random_commuting_permutations(rng, graph, m);
    let mut c = LabeledComplex::new(graph.clone(), m, 0);
    for (v, p) in perms.iter().enumerate() {
        for (x, &y) in p.iter().enumerate() {
            c.add_edge(v, x, y).unwrap();
        }
    }
    c
}

/// Removes edges of `c` until it is a local isometry: each missing square
/// is repaired by deleting one of its two germ edges.
pub fn prune_to_local_isometry(rng: &mut FleetRng, c: &mut LabeledComplex) {
    loop {
        let report = c.check_local_isometry().expect("maps stay injective");
        let Some(bad) = report.violations.choose(rng).copied() else {
            return;
        };
        let l = if rng.gen_bool(0.5) { bad.a } else { bad.b };
        remove_germ(c, bad.vertex, l);
    }
}

fn remove_germ(c: &mut LabeledComplex, x: usize, l: Letter) {
    let src = if l.is_inverse() { c.step(x, l).unwrap() } else { x };
    c.remove_edge(l.gen(), src);
}

/// The base component of `c`, renumbered `0..n` in vertex order.
pub fn base_component(c: &LabeledComplex) -> LabeledComplex {
    let keep = c.component(c.base());
    let mut out = c.induced(&keep, c.base());
    out.set_ids((0..keep.len() as u64).collect());
    out
}

/// A random connected local isometry with at most `max_vertices` vertices:
/// a random cover with random edges deleted, pruned until square-complete.
pub fn random_local_isometry(rng: &mut FleetRng, graph: &Arc<DefiningGraph>, max_vertices: usize) -> LabeledComplex {
    let m = rng.gen_range(1..=max_vertices);
    let mut c = random_cover(rng, graph, m);
    let keep_prob = rng.gen_range(0.3..1.0);
    let edges: Vec<(Gen, usize, usize)> = c.edges().collect();
    for (v, x, _) in edges {
        if !rng.gen_bool(keep_prob) {
            c.remove_edge(v, x);
        }
    }
    prune_to_local_isometry(rng, &mut c);
    c.set_base(rng.gen_range(0..m));
    base_component(&c)
}

/// A random folded labeled graph over the free group on `graph`'s generators.
pub fn random_stallings_graph(rng: &mut FleetRng, graph: &Arc<DefiningGraph>, max_vertices: usize) -> LabeledComplex {
    assert!(graph.edges().is_empty());
    let n = rng.gen_range(1..=max_vertices);
    let mut c = LabeledComplex::new(graph.clone(), n, 0);
    let tries = rng.gen_range(n..=3 * n);
    for _ in 0..tries {
        let v = rng.gen_range(0..graph.len());
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let _ = c.add_edge(v, x, y);
    }
    base_component(&c)
}

pub fn random_word(rng: &mut FleetRng, graph: &DefiningGraph, len: usize) -> Vec<Letter> {
    (0..len)
        .map(|_| Letter::new(rng.gen_range(0..graph.len()), rng.gen_bool(0.5)))
        .collect()
}

/// A random element of length `1..=max_len` (after reduction) outside `π₁Z`.
pub fn random_non_member(rng: &mut FleetRng, z: &LabeledComplex, max_len: usize) -> Option<NormalForm> {
    let graph = z.graph();
    for _ in 0..200 {
        let len = rng.gen_range(1..=max_len);
        let g = graph.normal_form(&random_word(rng, graph, len)).unwrap();
        if g.len() <= max_len && !member(z, &g) {
            return Some(g);
        }
    }
    None
}

/// One Theorem A instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub seed: u64,
    pub z: LabeledComplex,
    pub g: NormalForm,
}

/// A random instance with at most `max_gens` generators, `max_vertices`
/// vertices in `Z`, and `|g| ≤ max_len`.
pub fn random_instance(seed: u64, max_gens: usize, max_vertices: usize, max_len: usize) -> Instance {
    let mut r = rng(seed);
    loop {
        let graph = random_graph(&mut r, max_gens);
        let z = random_local_isometry(&mut r, &graph, max_vertices);
        if let Some(g) = random_non_member(&mut r, &z, max_len) {
            return Instance { seed, z, g };
        }
    }
}

/// Outcome of running the construction over a range of seeds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Survey {
    pub instances: usize,
    pub verified: usize,
    /// Seeds where the construction stopped or `Y` failed a check.
    pub failed: Vec<u64>,
    /// Runs where `Y` has vertices beyond `Z`.
    pub grew: usize,
    /// Largest `|Y⁰| / (|Z⁰|(|g|+1))` seen, as a numerator/denominator pair.
    pub tightest: (usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FleetParams {
    pub max_gens: usize,
    pub max_vertices: usize,
    pub max_len: usize,
}

impl Default for FleetParams {
    fn default() -> Self {
        FleetParams {
            max_gens: 4,
            max_vertices: 6,
            max_len: 6,
        }
    }
}

/// `(size, bound)` of a verified run, or `None`.
fn survey_one(seed: u64, p: FleetParams) -> Option<(usize, usize, bool)> {
    let inst = random_instance(seed, p.max_gens, p.max_vertices, p.max_len);
    let y = theorem_a(&inst.z, &inst.g).ok()?;
    let report = verify_theorem_a(&inst.z, &inst.g, &y);
    report
        .passes()
        .then_some((report.size, report.bound, report.size > inst.z.vertex_count()))
}

fn merge(seeds: &[u64], results: Vec<Option<(usize, usize, bool)>>) -> Survey {
    let mut s = Survey {
        instances: seeds.len(),
        tightest: (0, 1),
        ..Survey::default()
    };
    for (&seed, r) in seeds.iter().zip(results) {
        match r {
            Some((size, bound, grew)) => {
                s.verified += 1;
                s.grew += grew as usize;
                if size * s.tightest.1 > s.tightest.0 * bound {
                    s.tightest = (size, bound);
                }
            }
            None => s.failed.push(seed),
        }
    }
    s
}

/// Constructs and verifies one instance per seed, on the rayon pool when the
/// `parallel` feature is on.
pub fn survey(seeds: std::ops::Range<u64>, p: FleetParams) -> Survey {
    let seeds: Vec<u64> = seeds.collect();
    #[cfg(feature = "parallel")]
    let results = {
        use rayon::prelude::*;
        seeds.par_iter().map(|&s| survey_one(s, p)).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results = seeds.iter().map(|&s| survey_one(s, p)).collect();
    merge(&seeds, results)
}

/// [`survey`] on the calling thread.
pub fn survey_sequential(seeds: std::ops::Range<u64>, p: FleetParams) -> Survey {
    let seeds: Vec<u64> = seeds.collect();
    let results = seeds.iter().map(|&s| survey_one(s, p)).collect();
    merge(&seeds, results)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible() {
        let a = random_instance(11, 4, 6, 6);
        let b = random_instance(11, 4, 6, 6);
        assert_eq!((a.z, a.g), (b.z, b.g));
    }

    #[test]
    fn random_complexes_are_local_isometries() {
        let mut r = rng(5);
        for _ in 0..50 {
            let graph = random_graph(&mut r, 4);
            let z = random_local_isometry(&mut r, &graph, 8);
            assert!(z.is_local_isometry() && z.is_connected());
        }
    }

    #[test]
    fn survey_modes_agree() {
        let p = FleetParams::default();
        let a = survey(0..40, p);
        assert_eq!(a, survey_sequential(0..40, p));
        assert_eq!(a.verified, 40);
    }
}
