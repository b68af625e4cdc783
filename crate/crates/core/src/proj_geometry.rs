//! Rational points of projective and weighted projective spaces.
//!
//! Points of P^n(F_q) are stored in canonical form (leftmost nonzero
//! coordinate equal to 1). Points are grouped by the position of that leading
//! coordinate, earlier positions first, and ordered lexicographically on the
//! remaining coordinates inside each group, so P^1(F_2) reads
//! `[1:0], [1:1], [0:1]`. This ordering admits an arithmetic index.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::finite_field::{Field, FieldRef};
use crate::linalg;

/// Tables larger than this are refused.
pub const MAX_TABLE_SIZE: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("table of {0} points exceeds the limit of {MAX_TABLE_SIZE}")]
    TableTooLarge(u64),
    #[error("points must be distinct")]
    DegenerateInput,
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the zero tuple is not a projective point")]
    ZeroPoint,
    #[error("weights must be positive and at most 4 coordinates are supported")]
    InvalidWeights,
}

/// Number of points of P^n over a field with `q` elements.
pub fn projective_size(n: usize, q: u64) -> u64 {
    (0..=n).map(|i| q.pow(i as u32)).sum()
}

/// Scales `v` in place so its leftmost nonzero entry is 1; false for the zero tuple.
pub fn normalize(f: &Field, v: &mut [u32]) -> bool {
    let Some(lead) = v.iter().position(|&x| x != 0) else {
        return false;
    };
    let inv = f.inv(v[lead]).expect("nonzero");
    if inv != 1 {
        for x in v[lead..].iter_mut() {
            *x = f.mul(*x, inv);
        }
    }
    true
}

/// All rational points of P^n in canonical order.
#[derive(Debug, Clone)]
pub struct PointTable {
    field: FieldRef,
    n: usize,
    coords: Vec<u32>,
    /// offsets[i] = index of the first point whose leading coordinate is x_i.
    offsets: Vec<usize>,
}

impl PointTable {
    pub fn new(n: usize, field: &FieldRef) -> Result<PointTable, GeometryError> {
        let q = field.order();
        let size = (0..=n)
            .try_fold(0u64, |acc, i| q.checked_pow(i as u32).and_then(|x| x.checked_add(acc)))
            .unwrap_or(u64::MAX);
        if size > MAX_TABLE_SIZE {
            return Err(GeometryError::TableTooLarge(size));
        }
        let width = n + 1;
        let mut coords = Vec::with_capacity(size as usize * width);
        let mut offsets = Vec::with_capacity(width);
        let mut count = 0usize;
        for lead in 0..=n {
            offsets.push(count);
            let tail = n - lead;
            let block = q.pow(tail as u32);
            let mut digits = vec![0u32; tail];
            for _ in 0..block {
                coords.extend(std::iter::repeat_n(0, lead));
                coords.push(1);
                coords.extend_from_slice(&digits);
                // Increment the base-q counter, last coordinate fastest.
                for d in digits.iter_mut().rev() {
                    if (*d as u64) + 1 < q {
                        *d += 1;
                        break;
                    }
                    *d = 0;
                }
            }
            count += block as usize;
        }
        Ok(PointTable { field: Arc::clone(field), n, coords, offsets })
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.coords.len() / (self.n + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[u32] {
        let w = self.n + 1;
        &self.coords[i * w..(i + 1) * w]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.coords.chunks_exact(self.n + 1)
    }

    /// Index of a canonical point.
    pub fn index_of(&self, p: &[u32]) -> Option<usize> {
        if p.len() != self.n + 1 {
            return None;
        }
        let lead = p.iter().position(|&x| x != 0)?;
        if p[lead] != 1 {
            return None;
        }
        let q = self.field.order();
        let mut idx: u64 = 0;
        for &c in &p[lead + 1..] {
            idx = idx * q + c as u64;
        }
        Some(self.offsets[lead] + idx as usize)
    }

    /// Index of the point represented by an arbitrary nonzero tuple.
    pub fn lookup(&self, p: &[u32]) -> Option<usize> {
        let mut v = p.to_vec();
        if !normalize(&self.field, &mut v) {
            return None;
        }
        self.index_of(&v)
    }

    /// Coefficient vectors of all lines of P^2, in point-table order of the dual.
    pub fn lines(&self) -> impl Iterator<Item = &[u32]> {
        assert_eq!(self.n, 2, "lines are only enumerated in the plane");
        self.iter()
    }

    /// Indices of the points on the hyperplane `Σ l_i x_i = 0`, ascending.
    pub fn hyperplane_points(&self, l: &[u32]) -> Vec<usize> {
        let f = &self.field;
        (0..self.len())
            .filter(|&i| {
                self.point(i)
                    .iter()
                    .zip(l)
                    .fold(0, |acc, (&x, &c)| f.add(acc, f.mul(x, c)))
                    == 0
            })
            .collect()
    }
}

pub fn enumerate_points(n: usize, field: &FieldRef) -> Result<PointTable, GeometryError> {
    PointTable::new(n, field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Incidence {
    Collinear,
    NotCollinear,
}

fn det3(f: &Field, a: &[u32], b: &[u32], c: &[u32]) -> u32 {
    linalg::determinant(f, &vec![a.to_vec(), b.to_vec(), c.to_vec()])
}

fn same_point(f: &Field, a: &[u32], b: &[u32]) -> bool {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    normalize(f, &mut x) && normalize(f, &mut y) && x == y
}

fn check_plane(points: &[&[u32]]) -> Result<(), GeometryError> {
    for p in points {
        if p.len() != 3 {
            return Err(GeometryError::DimensionMismatch { expected: 3, got: p.len() });
        }
        if p.iter().all(|&x| x == 0) {
            return Err(GeometryError::ZeroPoint);
        }
    }
    Ok(())
}

/// Whether three distinct points of P^2 lie on a common line.
pub fn incidence(f: &Field, p1: &[u32], p2: &[u32], p3: &[u32]) -> Result<Incidence, GeometryError> {
    check_plane(&[p1, p2, p3])?;
    if same_point(f, p1, p2) || same_point(f, p1, p3) || same_point(f, p2, p3) {
        return Err(GeometryError::DegenerateInput);
    }
    Ok(if det3(f, p1, p2, p3) == 0 {
        Incidence::Collinear
    } else {
        Incidence::NotCollinear
    })
}

/// Collinearity test that tolerates repeated points.
pub fn collinear(f: &Field, p1: &[u32], p2: &[u32], p3: &[u32]) -> bool {
    det3(f, p1, p2, p3) == 0
}

/// The q+1 rational points of the line through two distinct points, canonical.
pub fn line_points(f: &Field, p1: &[u32], p2: &[u32]) -> Result<Vec<Vec<u32>>, GeometryError> {
    if p1.len() != p2.len() {
        return Err(GeometryError::DimensionMismatch { expected: p1.len(), got: p2.len() });
    }
    if p1.iter().all(|&x| x == 0) || p2.iter().all(|&x| x == 0) {
        return Err(GeometryError::ZeroPoint);
    }
    if same_point(f, p1, p2) {
        return Err(GeometryError::DegenerateInput);
    }
    let mut out: Vec<Vec<u32>> = f
        .elements()
        .map(|l| {
            let mut v: Vec<u32> = p1.iter().zip(p2).map(|(&a, &b)| f.add(a, f.mul(l, b))).collect();
            normalize(f, &mut v);
            v
        })
        .collect();
    let mut last = p2.to_vec();
    normalize(f, &mut last);
    out.push(last);
    Ok(out)
}

/// Orbit representatives of nonzero tuples under `λ·x = (λ^{a_i} x_i)`.
#[derive(Debug, Clone)]
pub struct WeightedPointTable {
    field: FieldRef,
    weights: Vec<u32>,
    points: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl WeightedPointTable {
    pub fn new(weights: &[u32], field: &FieldRef) -> Result<WeightedPointTable, GeometryError> {
        if weights.is_empty() || weights.len() > 4 || weights.contains(&0) {
            return Err(GeometryError::InvalidWeights);
        }
        let q = field.order();
        let tuples = q
            .checked_pow(weights.len() as u32)
            .filter(|&t| t <= MAX_TABLE_SIZE)
            .ok_or(GeometryError::TableTooLarge(u64::MAX))?;
        let mut table = WeightedPointTable {
            field: Arc::clone(field),
            weights: weights.to_vec(),
            points: Vec::new(),
            index: HashMap::new(),
        };
        let k = weights.len();
        for t in 1..tuples {
            // Digits most significant first, so t runs in lexicographic order.
            let mut v = vec![0u32; k];
            let mut r = t;
            for d in v.iter_mut().rev() {
                *d = (r % q) as u32;
                r /= q;
            }
            if table.canonical(&v) == v {
                table.index.insert(v.clone(), table.points.len());
                table.points.push(v);
            }
        }
        Ok(table)
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[u32] {
        &self.points[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.points.iter().map(|p| p.as_slice())
    }

    /// `λ·v` under the weighted action.
    pub fn act(&self, lambda: u32, v: &[u32]) -> Vec<u32> {
        v.iter()
            .zip(&self.weights)
            .map(|(&x, &a)| self.field.mul(self.field.pow(lambda, a as u64), x))
            .collect()
    }

    /// Lexicographically least member of the orbit of `v`.
    pub fn canonical(&self, v: &[u32]) -> Vec<u32> {
        self.field
            .nonzero()
            .map(|l| self.act(l, v))
            .min()
            .expect("the multiplicative group is nonempty")
    }

    pub fn lookup(&self, v: &[u32]) -> Option<usize> {
        if v.iter().all(|&x| x == 0) {
            return None;
        }
        self.index.get(&self.canonical(v)).copied()
    }
}

pub fn enumerate_weighted_points(weights: &[u32], field: &FieldRef) -> Result<WeightedPointTable, GeometryError> {
    WeightedPointTable::new(weights, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::make_field_q;

    #[test]
    fn p1_over_gf2_order() {
        let f = make_field_q(2).unwrap();
        let t = enumerate_points(1, &f).unwrap();
        let pts: Vec<&[u32]> = t.iter().collect();
        assert_eq!(pts, vec![&[1, 0][..], &[1, 1], &[0, 1]]);
    }

    #[test]
    fn sizes_and_index_roundtrip() {
        for (n, q, size) in [(2, 4, 21), (2, 16, 273), (3, 3, 40), (1, 9, 10)] {
            let f = make_field_q(q).unwrap();
            let t = enumerate_points(n, &f).unwrap();
            assert_eq!(t.len(), size);
            assert_eq!(t.len() as u64, projective_size(n, q));
            for i in 0..t.len() {
                assert_eq!(t.index_of(t.point(i)), Some(i));
            }
        }
    }

    #[test]
    fn oversized_table_is_refused() {
        let f = make_field_q(256).unwrap();
        assert!(matches!(enumerate_points(3, &f), Err(GeometryError::TableTooLarge(_))));
    }

    #[test]
    fn incidence_examples() {
        let f = make_field_q(4).unwrap();
        assert_eq!(incidence(&f, &[1, 0, 0], &[0, 1, 0], &[1, 1, 0]), Ok(Incidence::Collinear));
        assert_eq!(incidence(&f, &[1, 0, 0], &[0, 1, 0], &[0, 0, 1]), Ok(Incidence::NotCollinear));
        assert_eq!(
            incidence(&f, &[1, 0, 0], &[2, 0, 0], &[0, 0, 1]),
            Err(GeometryError::DegenerateInput)
        );
        assert_eq!(line_points(&f, &[1, 0, 0], &[0, 1, 0]).unwrap().len(), 5);
    }

    #[test]
    fn weighted_unweighted_case_matches_projective_table() {
        let f = make_field_q(4).unwrap();
        let w = enumerate_weighted_points(&[1, 1, 1], &f).unwrap();
        let t = enumerate_points(2, &f).unwrap();
        let mut a: Vec<Vec<u32>> = w.iter().map(|p| {
            let mut v = p.to_vec();
            normalize(&f, &mut v);
            v
        }).collect();
        let mut b: Vec<Vec<u32>> = t.iter().map(|p| p.to_vec()).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn weighted_orbits_partition_tuples() {
        let f2 = make_field_q(2).unwrap();
        let w = enumerate_weighted_points(&[2, 1, 1, 1], &f2).unwrap();
        assert_eq!(w.len(), 15, "over GF(2) every orbit is a single tuple");
        let f = make_field_q(4).unwrap();
        let w = enumerate_weighted_points(&[2, 1, 1, 1], &f).unwrap();
        // Brute-force orbit partition with a union of explicit orbit sets.
        let mut seen = std::collections::HashSet::new();
        let mut orbits = 0;
        for t in 1u32..256 {
            let v: Vec<u32> = (0..4).rev().map(|i| t >> (2 * i) & 3).collect();
            if seen.contains(&v) {
                continue;
            }
            orbits += 1;
            for l in 1..4 {
                seen.insert(w.act(l, &v));
            }
        }
        assert_eq!(w.len(), orbits);
        for i in 0..w.len() {
            for l in 1..4 {
                assert_eq!(w.lookup(&w.act(l, w.point(i))), Some(i));
            }
        }
    }
}
