//! Defining graphs, letters and canonical words for right-angled Artin groups.
//!
//! Elements of `A_Γ` are stored as [`NormalForm`]s: the shortlex-least geodesic
//! word under the declared generator order, with `v < v⁻¹ < w < w⁻¹` whenever
//! `v` is declared before `w`. Two words represent the same element exactly
//! when their normal forms are identical, so normal forms double as vertex
//! names in the universal cover of the Salvetti complex.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generator index in declaration order.
pub type Gen = usize;

/// Upper bound on generator count; adjacency is stored as a `u64` mask.
pub const MAX_GENERATORS: usize = 64;

/// Bitmask of generators.
pub type GenSet = u64;

/// A finite simplicial graph whose vertices are the standard generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefiningGraph {
    names: Vec<String>,
    adj: Vec<GenSet>,
    edges: Vec<(Gen, Gen)>,
}

impl DefiningGraph {
    pub fn new<S: AsRef<str>>(names: &[S], edges: &[(S, S)]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let mut idx = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains(char::is_whitespace) || n.contains('^') {
                return Err(Error::Input(format!("invalid generator name {n:?}")));
            }
            if idx.insert(n.clone(), i).is_some() {
                return Err(Error::Input(format!("generator {n} declared twice")));
            }
        }
        let mut pairs = Vec::new();
        for (u, v) in edges {
            let a = *idx
                .get(u.as_ref())
                .ok_or_else(|| Error::Input(format!("edge endpoint {} undeclared", u.as_ref())))?;
            let b = *idx
                .get(v.as_ref())
                .ok_or_else(|| Error::Input(format!("edge endpoint {} undeclared", v.as_ref())))?;
            pairs.push((a, b));
        }
        Self::from_indices(names, &pairs)
    }

    /// Builds a graph from generator names and index pairs.
    pub fn from_indices(names: Vec<String>, edges: &[(Gen, Gen)]) -> Result<Self> {
        if names.len() > MAX_GENERATORS {
            return Err(Error::Input(format!(
                "at most {MAX_GENERATORS} generators are supported"
            )));
        }
        let n = names.len();
        let mut adj = vec![0u64; n];
        let mut list = Vec::new();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::Input(format!("edge ({a},{b}) out of range")));
            }
            if a == b {
                return Err(Error::Input(format!("loop at generator {}", names[a])));
            }
            if adj[a] >> b & 1 == 1 {
                return Err(Error::Input(format!(
                    "repeated edge {} {}",
                    names[a], names[b]
                )));
            }
            adj[a] |= 1 << b;
            adj[b] |= 1 << a;
            list.push((a.min(b), a.max(b)));
        }
        Ok(DefiningGraph {
            names,
            adj,
            edges: list,
        })
    }

    /// The free group on `r` generators named `a, b, c, …` (or `x0, x1, …` past 26).
    pub fn free(r: usize) -> Self {
        Self::from_indices(default_names(r), &[]).expect("edgeless graph is valid")
    }

    /// The free abelian group on `r` generators.
    pub fn complete(r: usize) -> Self {
        let mut e = Vec::new();
        for a in 0..r {
            for b in a + 1..r {
                e.push((a, b));
            }
        }
        Self::from_indices(default_names(r), &e).expect("complete graph is valid")
    }

    /// Path graph `x0 – x1 – … – x(r-1)`.
    pub fn path(r: usize) -> Self {
        let e: Vec<_> = (1..r).map(|i| (i - 1, i)).collect();
        Self::from_indices(default_names(r), &e).expect("path graph is valid")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, g: Gen) -> &str {
        &self.names[g]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn edges(&self) -> &[(Gen, Gen)] {
        &self.edges
    }

    pub fn index_of(&self, name: &str) -> Option<Gen> {
        self.names.iter().position(|n| n == name)
    }

    pub fn adjacent(&self, a: Gen, b: Gen) -> bool {
        self.adj[a] >> b & 1 == 1
    }

    pub fn link(&self, v: Gen) -> GenSet {
        self.adj[v]
    }

    pub fn star(&self, v: Gen) -> GenSet {
        self.adj[v] | 1 << v
    }

    pub fn all(&self) -> GenSet {
        if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        }
    }

    /// Two letters commute as heap pieces: distinct adjacent generators.
    fn independent(&self, x: Letter, y: Letter) -> bool {
        x.gen() != y.gen() && self.adjacent(x.gen(), y.gen())
    }

    pub fn letter(&self, name: &str, inverse: bool) -> Result<Letter> {
        self.index_of(name)
            .map(|g| Letter::new(g, inverse))
            .ok_or_else(|| Error::Input(format!("unknown generator {name}")))
    }

    /// Parses whitespace-separated tokens `a` or `a^-1`.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Letter>> {
        text.split_whitespace()
            .map(|tok| match tok.strip_suffix("^-1") {
                Some(base) => self.letter(base, true),
                None => match tok.strip_suffix("^1") {
                    Some(base) => self.letter(base, false),
                    None => self.letter(tok, false),
                },
            })
            .collect()
    }

    pub fn check_word(&self, word: &[Letter]) -> Result<()> {
        match word.iter().find(|l| l.gen() >= self.len()) {
            Some(l) => Err(Error::Input(format!("unknown generator index {}", l.gen()))),
            None => Ok(()),
        }
    }

    /// Freely and commutatively reduces a word to a geodesic (not yet shortlex).
    fn reduce(&self, word: &[Letter]) -> Vec<Letter> {
        let mut stack: Vec<Letter> = Vec::with_capacity(word.len());
        'next: for &x in word {
            for j in (0..stack.len()).rev() {
                let y = stack[j];
                if y.gen() == x.gen() {
                    if y.is_inverse() != x.is_inverse() {
                        stack.remove(j);
                        continue 'next;
                    }
                    break;
                }
                if !self.adjacent(x.gen(), y.gen()) {
                    break;
                }
            }
            stack.push(x);
        }
        stack
    }

    /// Lexicographically least linearization of the heap of a reduced word.
    fn shortlex_sort(&self, reduced: Vec<Letter>) -> Vec<Letter> {
        let mut rest = reduced;
        let mut out = Vec::with_capacity(rest.len());
        while !rest.is_empty() {
            let mut best: Option<usize> = None;
            for j in 0..rest.len() {
                let free = rest[..j].iter().all(|&y| self.independent(y, rest[j]));
                if free && best.is_none_or(|b| rest[j] < rest[b]) {
                    best = Some(j);
                }
            }
            let j = best.expect("a heap always has a minimal piece");
            out.push(rest.remove(j));
        }
        out
    }

    /// Canonical representative of the element spelled by `word`.
    pub fn normal_form(&self, word: &[Letter]) -> Result<NormalForm> {
        self.check_word(word)?;
        Ok(self.nf(word))
    }

    /// Unchecked variant of [`normal_form`](Self::normal_form) for internal words.
    pub(crate) fn nf(&self, word: &[Letter]) -> NormalForm {
        NormalForm(self.shortlex_sort(self.reduce(word)))
    }

    pub fn mul(&self, a: &NormalForm, b: &NormalForm) -> NormalForm {
        let mut w = a.0.clone();
        w.extend_from_slice(&b.0);
        self.nf(&w)
    }

    pub fn mul_letter(&self, a: &NormalForm, l: Letter) -> NormalForm {
        let mut w = a.0.clone();
        w.push(l);
        self.nf(&w)
    }

    pub fn inverse(&self, a: &NormalForm) -> NormalForm {
        let w: Vec<Letter> = a.0.iter().rev().map(|l| l.inverse()).collect();
        NormalForm(self.shortlex_sort(w))
    }

    /// `a⁻¹·b`.
    pub fn left_quotient(&self, a: &NormalForm, b: &NormalForm) -> NormalForm {
        let mut w: Vec<Letter> = a.0.iter().rev().map(|l| l.inverse()).collect();
        w.extend_from_slice(&b.0);
        self.nf(&w)
    }

    /// Combinatorial distance in the 1-skeleton of the universal cover.
    pub fn dist(&self, a: &NormalForm, b: &NormalForm) -> usize {
        self.left_quotient(a, b).len()
    }

    /// All vertices on geodesics from `a` to `b`.
    ///
    /// These are `a·p` for the prefixes `p` of `a⁻¹b` in the trace monoid,
    /// i.e. the products of downward-closed sets of pieces of its heap.
    pub fn interval(&self, a: &NormalForm, b: &NormalForm) -> BTreeSet<NormalForm> {
        let h = self.left_quotient(a, b);
        let n = h.len();
        assert!(n < 64, "interval endpoints too far apart");
        // preds[j] = pieces that must be taken before piece j
        let preds: Vec<u64> = (0..n)
            .map(|j| {
                (0..j)
                    .filter(|&i| !self.independent(h.0[i], h.0[j]))
                    .fold(0u64, |m, i| m | 1 << i)
            })
            .collect();
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![0u64];
        seen.insert(0u64);
        let mut out = BTreeSet::new();
        while let Some(mask) = stack.pop() {
            let word: Vec<Letter> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| h.0[i]).collect();
            let mut full = a.0.clone();
            full.extend(word);
            out.insert(self.nf(&full));
            for (j, &pred) in preds.iter().enumerate() {
                if mask >> j & 1 == 0 && pred & !mask == 0 {
                    let next = mask | 1 << j;
                    if seen.insert(next) {
                        stack.push(next);
                    }
                }
            }
        }
        out
    }

    /// Membership in the standard subgroup `A_Λ`.
    pub fn in_standard_subgroup(&self, g: &NormalForm, lambda: GenSet) -> bool {
        g.0.iter().all(|l| lambda >> l.gen() & 1 == 1)
    }

    /// Shortest representative of the coset `p·A_Λ`.
    ///
    /// Pieces of the heap of `p` that lie in `Λ` and can be slid to the end
    /// are stripped, repeatedly. Parabolic cosets in RAAGs have a unique
    /// minimal-length element, so the result does not depend on the order.
    pub fn coset_rep(&self, p: &NormalForm, lambda: GenSet) -> NormalForm {
        let mut w = p.0.clone();
        loop {
            let n = w.len();
            let pos = (0..n).rev().find(|&j| {
                lambda >> w[j].gen() & 1 == 1
                    && w[j + 1..].iter().all(|&y| self.independent(w[j], y))
            });
            match pos {
                Some(j) => {
                    w.remove(j);
                }
                None => break,
            }
        }
        self.nf(&w)
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "ε".to_string();
        }
        w.iter()
            .map(|l| self.format_letter(*l))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn format_letter(&self, l: Letter) -> String {
        if l.is_inverse() {
            format!("{}^-1", self.name(l.gen()))
        } else {
            self.name(l.gen()).to_string()
        }
    }

    /// Every element of word length exactly `n`, as normal forms, ascending.
    pub fn sphere(&self, n: usize) -> Vec<NormalForm> {
        let mut layer: BTreeSet<NormalForm> = BTreeSet::new();
        layer.insert(NormalForm::identity());
        for _ in 0..n {
            let mut next = BTreeSet::new();
            for g in &layer {
                for l in Letter::all(self.len()) {
                    let h = self.mul_letter(g, l);
                    if h.len() == g.len() + 1 {
                        next.insert(h);
                    }
                }
            }
            layer = next;
        }
        layer.into_iter().collect()
    }

    /// Every element of word length at most `n`.
    pub fn ball(&self, n: usize) -> Vec<NormalForm> {
        (0..=n).flat_map(|k| self.sphere(k)).collect()
    }
}

fn default_names(r: usize) -> Vec<String> {
    (0..r)
        .map(|i| {
            if r <= 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("x{i}")
            }
        })
        .collect()
}

/// A generator or its inverse. Orders as `v < v⁻¹ < w < w⁻¹` for `v` before `w`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(u8);

impl Letter {
    pub fn new(gen: Gen, inverse: bool) -> Self {
        assert!(gen < MAX_GENERATORS);
        Letter((gen as u8) << 1 | inverse as u8)
    }

    pub fn gen(self) -> Gen {
        (self.0 >> 1) as Gen
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn sign(self) -> i8 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    pub fn inverse(self) -> Self {
        Letter(self.0 ^ 1)
    }

    /// All `2r` letters in shortlex order.
    pub fn all(r: usize) -> impl Iterator<Item = Letter> {
        (0..2 * r).map(|i| Letter(i as u8))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "g{}^-1", self.gen())
        } else {
            write!(f, "g{}", self.gen())
        }
    }
}

/// Canonical geodesic word; its length is the word length `|g|`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct NormalForm(#[serde(with = "letters_serde")] Vec<Letter>);

impl NormalForm {
    pub fn identity() -> Self {
        NormalForm(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }

    /// Generators occurring in the word.
    pub fn support(&self) -> GenSet {
        self.0.iter().fold(0, |m, l| m | 1 << l.gen())
    }
}

impl Ord for NormalForm {
    /// Shortlex: shorter first, then lexicographic on letters.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for NormalForm {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "ε");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "·")?;
            }
            write!(f, "{l:?}")?;
        }
        Ok(())
    }
}

mod letters_serde {
    use super::Letter;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Letter], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<(usize, bool)> = v.iter().map(|l| (l.gen(), l.is_inverse())).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Letter>, D::Error> {
        let raw: Vec<(usize, bool)> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(|(g, i)| Letter::new(g, i)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zz() -> DefiningGraph {
        DefiningGraph::new(&["a", "b"], &[("a", "b")]).unwrap()
    }

    fn w(g: &DefiningGraph, s: &str) -> NormalForm {
        g.normal_form(&g.parse_word(s).unwrap()).unwrap()
    }

    #[test]
    fn single_commutation_prefers_first_generator() {
        let g = zz();
        assert_eq!(w(&g, "b a"), w(&g, "a b"));
        assert_eq!(g.format_word(w(&g, "b a").letters()), "a b");
    }

    #[test]
    fn free_cancellation() {
        let g = DefiningGraph::free(2);
        assert!(w(&g, "a a^-1").is_identity());
        assert_eq!(w(&g, "a b b^-1 a^-1").len(), 0);
    }

    #[test]
    fn no_shuffle_across_missing_edge() {
        let g = DefiningGraph::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        assert_eq!(g.format_word(w(&g, "c a").letters()), "c a");
    }

    #[test]
    fn inverse_sorts_before_next_generator() {
        let g = zz();
        assert_eq!(g.format_word(w(&g, "b a^-1").letters()), "a^-1 b");
        assert_eq!(g.format_word(w(&g, "a^-1 a^-1 a").letters()), "a^-1");
    }

    #[test]
    fn cancellation_across_commuting_block() {
        let g = zz();
        assert_eq!(g.format_word(w(&g, "b a b^-1").letters()), "a");
    }

    #[test]
    fn unknown_generator_is_input_error() {
        let g = zz();
        assert!(matches!(g.parse_word("a c"), Err(Error::Input(_))));
    }

    #[test]
    fn intervals() {
        let g = zz();
        let e = NormalForm::identity();
        let iv = g.interval(&e, &w(&g, "a b"));
        let want: BTreeSet<_> = ["", "a", "b", "a b"].iter().map(|s| w(&g, s)).collect();
        assert_eq!(iv, want);

        let f = DefiningGraph::free(2);
        let iv = f.interval(&e, &w(&f, "a b a"));
        let want: BTreeSet<_> = ["", "a", "a b", "a b a"].iter().map(|s| w(&f, s)).collect();
        assert_eq!(iv, want);

        let x = w(&g, "a b^-1 a");
        assert_eq!(g.interval(&x, &x).len(), 1);
    }

    #[test]
    fn standard_subgroup_membership() {
        let p = DefiningGraph::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let a = p.index_of("a").unwrap();
        assert!(!p.in_standard_subgroup(&w(&p, "c"), p.star(a)));
        assert!(p.in_standard_subgroup(&NormalForm::identity(), 0));
        let g = zz();
        assert!(g.in_standard_subgroup(&w(&g, "b a b^-1"), 1));
    }

    #[test]
    fn coset_rep_strips_sliding_suffix() {
        let p = DefiningGraph::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        // link(a) = {b}: both b's slide to the right end
        let x = w(&p, "c b a b");
        let r = p.coset_rep(&x, p.link(0));
        assert_eq!(p.format_word(r.letters()), "c a");
        // with c isolated from b the b is blocked
        let q = DefiningGraph::new(&["a", "b", "c"], &[("a", "b")]).unwrap();
        let r = q.coset_rep(&w(&q, "b c"), 1 << 1);
        assert_eq!(q.format_word(r.letters()), "b c");
    }
}
