//! Permutations of `0..N` with sign and cycle statistics.

mod bundle;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use bundle::{
    bundle_total_permutation, bundle_trials, conic_fiber_points, elliptic_example, f2_counterexample, random_bundle,
    AbstractBundle, BundleError, BundleReport, BundleTrials, ConicType, EllipticExample, FiberKind, Transition,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermutationError {
    #[error("image sequence is not a bijection of 0..{0}")]
    NotABijection(usize),
    #[error("permutations act on sets of different sizes ({0} and {1})")]
    SizeMismatch(usize, usize),
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    img: Vec<u32>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.img)
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Permutation {
    pub fn new(img: Vec<u32>) -> Result<Permutation, PermutationError> {
        let n = img.len();
        let mut seen = vec![false; n];
        for &x in &img {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(PermutationError::NotABijection(n));
            }
            seen[x] = true;
        }
        Ok(Permutation { img })
    }

    pub fn identity(n: usize) -> Permutation {
        Permutation { img: (0..n as u32).collect() }
    }

    /// The transposition of `a` and `b` on `n` points.
    pub fn transposition(n: usize, a: usize, b: usize) -> Permutation {
        let mut img: Vec<u32> = (0..n as u32).collect();
        img.swap(a, b);
        Permutation { img }
    }

    pub fn len(&self) -> usize {
        self.img.len()
    }

    pub fn is_empty(&self) -> bool {
        self.img.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.img[i] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.img
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, PermutationError> {
        if self.len() != other.len() {
            return Err(PermutationError::SizeMismatch(self.len(), other.len()));
        }
        Ok(Permutation { img: other.img.iter().map(|&i| self.img[i as usize]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.len()];
        for (i, &x) in self.img.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Permutation { img: inv }
    }

    pub fn pow(&self, mut e: u64) -> Permutation {
        let mut acc = Permutation::identity(self.len());
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&base).expect("same size");
            }
            base = base.compose(&base).expect("same size");
            e >>= 1;
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// Disjoint cycles, each starting at its least element, ordered by that element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cyc.push(i);
                i = self.apply(i);
            }
            out.push(cyc);
        }
        out
    }

    pub fn cycle_type(&self) -> BTreeMap<usize, usize> {
        let mut ct = BTreeMap::new();
        let mut seen = vec![false; self.len()];
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.apply(i);
                len += 1;
            }
            *ct.entry(len).or_insert(0) += 1;
        }
        ct
    }

    /// +1 or -1.
    pub fn sign(&self) -> i8 {
        let cycles: usize = self.cycle_type().values().sum();
        if (self.len() - cycles).is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Least common multiple of the cycle lengths, saturating at `u128::MAX`.
    pub fn order(&self) -> u128 {
        self.cycle_type().keys().fold(1u128, |acc, &l| {
            let l = l as u128;
            (acc / gcd(acc, l)).saturating_mul(l)
        })
    }

    pub fn fixed_points(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.apply(i) == i).collect()
    }

    pub fn census(&self) -> CycleCensus {
        CycleCensus::from_cycle_type(&self.cycle_type())
    }
}

/// Sign, cycle type and order of a permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PermStats {
    pub sign: i8,
    pub cycle_type: BTreeMap<usize, usize>,
    pub order: u128,
}

pub fn perm_stats(p: &Permutation) -> PermStats {
    PermStats { sign: p.sign(), cycle_type: p.cycle_type(), order: p.order() }
}

/// Cycle counts by length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleCensus {
    pub counts: BTreeMap<usize, usize>,
    pub moved: usize,
    pub parity: i8,
}

impl CycleCensus {
    pub fn from_cycle_type(ct: &BTreeMap<usize, usize>) -> CycleCensus {
        let moved = ct.iter().filter(|(&l, _)| l > 1).map(|(&l, &c)| l * c).sum();
        let odd_cycles: usize = ct.iter().filter(|(&l, _)| l % 2 == 0).map(|(_, &c)| c).sum();
        let counts = ct.iter().filter(|(_, &c)| c > 0).map(|(&l, &c)| (l, c)).collect();
        CycleCensus { counts, moved, parity: if odd_cycles.is_multiple_of(2) { 1 } else { -1 } }
    }

    pub fn size(&self) -> usize {
        self.counts.iter().map(|(&l, &c)| l * c).sum()
    }

    pub fn count(&self, len: usize) -> usize {
        self.counts.get(&len).copied().unwrap_or(0)
    }
}

/// Compact cycle-type notation such as `6,1^25`, longest cycles first.
pub fn format_cycle_type(ct: &BTreeMap<usize, usize>) -> String {
    ct.iter()
        .rev()
        .map(|(&l, &c)| if c == 1 { l.to_string() } else { format!("{l}^{c}") })
        .collect::<Vec<_>>()
        .join(",")
}
