//! Multi-indices, downward-closed (lower) index sets and their enumeration.
//!
//! A multi-index ν ∈ N_0^d collects polynomial degrees, one per coordinate.
//! A set Λ of multi-indices is *lower* (downward closed) when μ ≤ ν
//! componentwise and ν ∈ Λ imply μ ∈ Λ. The hyperbolic cross
//! H_s = { ν : Π_k (ν_k + 1) ≤ s } is the union of all lower sets of
//! cardinality s and is the default truncation universe everywhere in this
//! crate.
//!
//! All index sets carry a canonical order: graded lexicographic (total
//! degree first, ties broken lexicographically). Determinism of this order
//! is what makes sensing matrices and enumeration reproducible.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Default cap on the number of sets explored by [`LowerSetEnumerator`].
pub const DEFAULT_ENUMERATION_BUDGET: usize = 1_000_000;

/// Cap on the cardinality of any constructed index set.
const MAX_SET_SIZE: usize = 1 << 26;

/// A d-tuple of nonnegative polynomial degrees.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    degrees: Vec<u32>,
}

impl MultiIndex {
    /// Builds a multi-index from its degree tuple. `degrees` must be nonempty.
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        if degrees.is_empty() {
            return Err(Error::Domain("multi-index dimension must be >= 1".into()));
        }
        Ok(Self { degrees })
    }

    /// The zero index in dimension `d`.
    pub fn zero(d: usize) -> Result<Self> {
        Self::new(vec![0; d])
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn degree(&self, k: usize) -> u32 {
        self.degrees[k]
    }

    /// Total degree |ν|₁.
    pub fn total_degree(&self) -> u64 {
        self.degrees.iter().map(|&a| a as u64).sum()
    }

    /// Number of nonzero entries ‖ν‖₀.
    pub fn support_size(&self) -> usize {
        self.degrees.iter().filter(|&&a| a > 0).count()
    }

    pub fn is_zero(&self) -> bool {
        self.degrees.iter().all(|&a| a == 0)
    }

    /// Componentwise partial order μ ≤ ν.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.dim() == other.dim() && self.degrees.iter().zip(&other.degrees).all(|(a, b)| a <= b)
    }

    /// ν + e_k.
    pub fn plus_unit(&self, k: usize) -> MultiIndex {
        let mut degrees = self.degrees.clone();
        degrees[k] += 1;
        MultiIndex { degrees }
    }

    /// ν − e_k, or `None` when ν_k = 0.
    pub fn minus_unit(&self, k: usize) -> Option<MultiIndex> {
        if self.degrees[k] == 0 {
            return None;
        }
        let mut degrees = self.degrees.clone();
        degrees[k] -= 1;
        Some(MultiIndex { degrees })
    }

    /// Π_k (ν_k + 1), the cardinality of the rectangular block {μ ≤ ν}.
    pub fn block_cardinality(&self) -> Result<usize> {
        let mut prod: usize = 1;
        for &a in &self.degrees {
            prod = prod
                .checked_mul(a as usize + 1)
                .filter(|&p| p <= MAX_SET_SIZE)
                .ok_or_else(|| {
                    Error::Size(format!("rectangular block of {self} exceeds the size cap"))
                })?;
        }
        Ok(prod)
    }

    /// Graded lexicographic comparison: total degree first, then
    /// lexicographic on the degree tuple.
    pub fn grlex_cmp(&self, other: &MultiIndex) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.degrees.cmp(&other.degrees))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.degrees.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// An ordered, duplicate-free collection of multi-indices in a common
/// dimension, kept in canonical (graded lexicographic) order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    dim: usize,
    members: Vec<MultiIndex>,
    position: HashMap<MultiIndex, usize>,
}

impl IndexSet {
    /// Builds a set from arbitrary members: sorts canonically, rejects
    /// duplicates and dimension mismatches.
    pub fn new(dim: usize, mut members: Vec<MultiIndex>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("index set dimension must be >= 1".into()));
        }
        for nu in &members {
            if nu.dim() != dim {
                return Err(Error::Shape(format!(
                    "index {nu} has dimension {}, expected {dim}",
                    nu.dim()
                )));
            }
        }
        members.sort_by(|a, b| a.grlex_cmp(b));
        members.dedup();
        let position = members
            .iter()
            .enumerate()
            .map(|(i, nu)| (nu.clone(), i))
            .collect();
        Ok(Self {
            dim,
            members,
            position,
        })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[MultiIndex] {
        &self.members
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MultiIndex> {
        self.members.iter()
    }

    pub fn contains(&self, nu: &MultiIndex) -> bool {
        self.position.contains_key(nu)
    }

    /// Position of `nu` in canonical order.
    pub fn position(&self, nu: &MultiIndex) -> Option<usize> {
        self.position.get(nu).copied()
    }

    pub fn member(&self, j: usize) -> &MultiIndex {
        &self.members[j]
    }

    /// Set union, preserving the canonical order.
    pub fn union(&self, other: &IndexSet) -> Result<IndexSet> {
        if self.dim != other.dim {
            return Err(Error::Shape(
                "union of sets with different dimensions".into(),
            ));
        }
        let mut members = self.members.clone();
        members.extend(other.members.iter().cloned());
        IndexSet::new(self.dim, members)
    }

    /// Members of `self` not present in `other`.
    pub fn difference(&self, other: &IndexSet) -> Result<IndexSet> {
        if self.dim != other.dim {
            return Err(Error::Shape(
                "difference of sets with different dimensions".into(),
            ));
        }
        let members = self
            .members
            .iter()
            .filter(|nu| !other.contains(nu))
            .cloned()
            .collect();
        IndexSet::new(self.dim, members)
    }

    /// Maximum degree appearing in any coordinate.
    pub fn max_degree(&self) -> u32 {
        self.members
            .iter()
            .flat_map(|nu| nu.degrees().iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Serializes to the line-oriented text format: first line `d=<int>`,
    /// then one index per line as space-separated integers.
    pub fn to_text(&self) -> String {
        let mut out = format!("d={}\n", self.dim);
        for nu in &self.members {
            let parts: Vec<String> = nu.degrees().iter().map(|a| a.to_string()).collect();
            out.push_str(&parts.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the format produced by [`IndexSet::to_text`].
    pub fn from_text(text: &str) -> Result<IndexSet> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Usage("empty index-set document".into()))?;
        let dim: usize = header
            .strip_prefix("d=")
            .ok_or_else(|| Error::Usage(format!("expected 'd=<int>' header, got '{header}'")))?
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("bad dimension in header '{header}'")))?;
        let mut members = Vec::new();
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let degrees: Vec<u32> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<u32>()
                        .map_err(|_| Error::Usage(format!("bad degree '{tok}'")))
                })
                .collect::<Result<_>>()?;
            members.push(MultiIndex::new(degrees)?);
        }
        IndexSet::new(dim, members)
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a MultiIndex;
    type IntoIter = std::slice::Iter<'a, MultiIndex>;
    fn into_iter(self) -> Self::IntoIter {
        self.members.iter()
    }
}

/// True iff the set is downward closed: for every ν in the set and every
/// coordinate k with ν_k > 0, the predecessor ν − e_k is also present.
/// The empty set is lower.
pub fn is_lower(set: &IndexSet) -> bool {
    set.iter().all(|nu| {
        (0..set.dim()).all(|k| match nu.minus_unit(k) {
            Some(pred) => set.contains(&pred),
            None => true,
        })
    })
}

/// The hyperbolic cross H_s = { ν ∈ N_0^d : Π_k (ν_k + 1) ≤ s }.
pub fn hyperbolic_cross(s: usize, d: usize) -> Result<IndexSet> {
    if s == 0 || d == 0 {
        return Err(Error::Domain(
            "hyperbolic cross needs s >= 1 and d >= 1".into(),
        ));
    }
    let mut members = Vec::new();
    let mut current = vec![0u32; d];
    push_cross(s, d, 0, &mut current, &mut members)?;
    IndexSet::new(d, members)
}

fn push_cross(
    budget: usize,
    d: usize,
    k: usize,
    current: &mut Vec<u32>,
    out: &mut Vec<MultiIndex>,
) -> Result<()> {
    if k == d {
        if out.len() >= MAX_SET_SIZE {
            return Err(Error::Size(
                "hyperbolic cross cardinality exceeds the size cap".into(),
            ));
        }
        out.push(MultiIndex::new(current.clone())?);
        return Ok(());
    }
    let mut a = 0u32;
    while (a as usize + 1) <= budget {
        current[k] = a;
        push_cross(budget / (a as usize + 1), d, k + 1, current, out)?;
        a += 1;
    }
    current[k] = 0;
    Ok(())
}

/// The closed-form bound ε^{-1} s^{1+1/ε} (1-ε)^{-d/ε} on #(H_s);
/// with ε = 1/2 this is 2 s³ 4^d.
pub fn hyperbolic_cross_cardinality_bound(s: usize, d: usize, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) || eps == 0.0 {
        return Err(Error::Domain("eps must lie in (0,1)".into()));
    }
    if s == 0 || d == 0 {
        return Err(Error::Domain("bound needs s >= 1 and d >= 1".into()));
    }
    let s = s as f64;
    let d = d as f64;
    Ok(eps.recip() * s.powf(1.0 + 1.0 / eps) * (1.0 - eps).powf(-d / eps))
}

/// The rectangular block R_ν = { μ : μ ≤ ν componentwise }.
pub fn rectangular_block(nu: &MultiIndex) -> Result<IndexSet> {
    let card = nu.block_cardinality()?;
    let d = nu.dim();
    let mut members = Vec::with_capacity(card);
    let mut current = vec![0u32; d];
    loop {
        members.push(MultiIndex::new(current.clone())?);
        // odometer over the block
        let mut k = 0;
        loop {
            if k == d {
                return IndexSet::new(d, members);
            }
            if current[k] < nu.degree(k) {
                current[k] += 1;
                break;
            }
            current[k] = 0;
            k += 1;
        }
    }
}

/// All indices ν ∉ Λ such that Λ ∪ {ν} is still lower. Requires Λ lower.
pub fn admissible_extensions(set: &IndexSet) -> Result<IndexSet> {
    if !is_lower(set) {
        return Err(Error::Precondition(
            "admissible_extensions requires a lower set".into(),
        ));
    }
    let d = set.dim();
    if set.is_empty() {
        return IndexSet::new(d, vec![MultiIndex::zero(d)?]);
    }
    let mut found = Vec::new();
    for nu in set {
        for k in 0..d {
            let cand = nu.plus_unit(k);
            if set.contains(&cand) {
                continue;
            }
            let ok = (0..d).all(|j| match cand.minus_unit(j) {
                Some(pred) => set.contains(&pred),
                None => true,
            });
            if ok {
                found.push(cand);
            }
        }
    }
    IndexSet::new(d, found)
}

/// Streaming enumeration of every lower subset of a lower universe with a
/// fixed cardinality, each produced exactly once.
///
/// A lower set is grown by admissible extensions whose canonical rank
/// strictly increases along the build; since every canonical prefix of a
/// lower set is lower, each target set has exactly one accepted build
/// sequence. The `budget` caps the number of sets explored (not only
/// emitted) and converts combinatorial blow-up into [`Error::Size`].
pub struct LowerSetEnumerator {
    universe: IndexSet,
    cardinality: usize,
    budget: usize,
    explored: usize,
    // DFS over (current set as universe positions, last added rank)
    stack: Vec<(Vec<usize>, usize)>,
    exhausted: bool,
}

impl LowerSetEnumerator {
    pub fn new(universe: &IndexSet, cardinality: usize) -> Result<Self> {
        if !is_lower(universe) {
            return Err(Error::Precondition(
                "enumeration universe must be lower".into(),
            ));
        }
        if cardinality == 0 || cardinality > universe.len() {
            return Err(Error::Precondition(format!(
                "cardinality must lie in 1..=#(universe)={}",
                universe.len()
            )));
        }
        // The root (zero index) is the unique canonical start.
        let root = universe
            .position(&MultiIndex::zero(universe.dim())?)
            .expect("a nonempty lower universe contains the zero index");
        Ok(Self {
            universe: universe.clone(),
            cardinality,
            budget: DEFAULT_ENUMERATION_BUDGET,
            explored: 0,
            stack: vec![(vec![root], root)],
            exhausted: false,
        })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    /// Admissible extension ranks of `current` (as universe positions)
    /// strictly above `last`.
    fn extension_ranks(&self, current: &[usize], last: usize) -> Vec<usize> {
        let d = self.universe.dim();
        let mut ranks = Vec::new();
        for &pos in current {
            let nu = self.universe.member(pos);
            for k in 0..d {
                let cand = nu.plus_unit(k);
                let Some(rank) = self.universe.position(&cand) else {
                    continue;
                };
                if rank <= last || current.contains(&rank) {
                    continue;
                }
                let ok = (0..d).all(|j| match cand.minus_unit(j) {
                    Some(pred) => {
                        let p = self.universe.position(&pred);
                        matches!(p, Some(p) if current.contains(&p))
                    }
                    None => true,
                });
                if ok && !ranks.contains(&rank) {
                    ranks.push(rank);
                }
            }
        }
        ranks.sort_unstable();
        ranks
    }

    fn build_set(&self, positions: &[usize]) -> Result<IndexSet> {
        let members = positions
            .iter()
            .map(|&p| self.universe.member(p).clone())
            .collect();
        IndexSet::new(self.universe.dim(), members)
    }
}

impl Iterator for LowerSetEnumerator {
    type Item = Result<IndexSet>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.exhausted {
            return None;
        }
        while let Some((current, last)) = self.stack.pop() {
            self.explored += 1;
            if self.explored > self.budget {
                self.exhausted = true;
                return Some(Err(Error::Size(format!(
                    "lower-set enumeration exceeded the budget of {} sets",
                    self.budget
                ))));
            }
            if current.len() == self.cardinality {
                return Some(self.build_set(&current));
            }
            // Push extensions in descending rank so ascending rank pops first.
            for rank in self.extension_ranks(&current, last).into_iter().rev() {
                let mut next = current.clone();
                next.push(rank);
                self.stack.push((next, rank));
            }
        }
        self.exhausted = true;
        None
    }
}

/// Collects the full enumeration into a vector, propagating budget errors.
pub fn enumerate_lower_sets(
    universe: &IndexSet,
    cardinality: usize,
    budget: Option<usize>,
) -> Result<Vec<IndexSet>> {
    let mut it = LowerSetEnumerator::new(universe, cardinality)?;
    if let Some(b) = budget {
        it = it.with_budget(b);
    }
    it.collect()
}
