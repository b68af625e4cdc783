//! Parity of projective linear maps: the two-element generating sets of
//! GL_{n+1}(F_q), their factorizations, cycle censuses, and PGL sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::finite_field::{make_field, subfield_embed, FieldError, FieldRef};
use crate::linalg::{self, Matrix};
use crate::par;
use crate::permutations::{CycleCensus, Permutation};
use crate::proj_geometry::{GeometryError, PointTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinearError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix size {got} does not match P^{n}")]
    DimensionMismatch { n: usize, got: usize },
    #[error("permutation does not reduce to 2-power order")]
    NotTwoPowerOrder,
    #[error("operation requires q = 2^m with m >= {0}")]
    UnsupportedField(u32),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// An invertible (n+1)x(n+1) matrix acting on P^n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProjLinearMap {
    pub field: FieldRef,
    pub matrix: Matrix,
}

impl ProjLinearMap {
    pub fn new(field: &FieldRef, matrix: Matrix) -> Result<ProjLinearMap, LinearError> {
        let k = matrix.len();
        if k < 2 || matrix.iter().any(|r| r.len() != k) {
            return Err(LinearError::DimensionMismatch { n: k.saturating_sub(1), got: k });
        }
        if linalg::determinant(field, &matrix) == 0 {
            return Err(LinearError::SingularMatrix);
        }
        Ok(ProjLinearMap { field: field.clone(), matrix })
    }

    pub fn dimension(&self) -> usize {
        self.matrix.len() - 1
    }

    pub fn compose(&self, other: &ProjLinearMap) -> ProjLinearMap {
        ProjLinearMap { field: self.field.clone(), matrix: linalg::mat_mul(&self.field, &self.matrix, &other.matrix) }
    }
}

fn unit(k: usize, i: usize, j: usize) -> Matrix {
    let mut m = vec![vec![0; k]; k];
    m[i][j] = 1;
    m
}

/// `E_{1,2} + E_{2,3} + ... + E_{n+1,1}`.
pub fn cyclic_shift(n: usize) -> Matrix {
    let k = n + 1;
    (0..k).map(|i| (0..k).map(|j| u32::from(j == (i + 1) % k)).collect()).collect()
}

/// `I + E_{n+1,1}`.
pub fn t_matrix(n: usize) -> Matrix {
    add_int(&linalg::identity(n + 1), &unit(n + 1, n, 0))
}

fn add_int(a: &Matrix, b: &Matrix) -> Matrix {
    // Entries of b are 0/1 and only hit zero entries of a.
    a.iter().zip(b).map(|(r, s)| r.iter().zip(s).map(|(&x, &y)| x | y).collect()).collect()
}

/// `diag(1, α, 1, ..., 1)`.
pub fn m_matrix(field: &FieldRef, n: usize) -> Matrix {
    let mut m = linalg::identity(n + 1);
    m[1][1] = field.generator();
    m
}

/// Parameters of the n = 1, q > 2 generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadraticParams {
    pub alpha: u32,
    pub r: u32,
    pub s: u32,
}

/// `α = β^{q+1}`, `s = Tr β`, `r = -Norm β` for the least generator β of GF(q^2).
pub fn quadratic_params(field: &FieldRef) -> Result<QuadraticParams, LinearError> {
    let f = field;
    let ext = make_field(f.characteristic() as u64, 2 * f.degree())?;
    let emb = subfield_embed(f, &ext)?;
    let beta = ext.generator();
    let conj = ext.pow(beta, f.order());
    let s = emb.restrict(ext.add(beta, conj)).expect("trace in GF(q)");
    let norm = emb.restrict(ext.mul(beta, conj)).expect("norm in GF(q)");
    Ok(QuadraticParams { alpha: norm, r: f.neg(norm), s })
}

pub fn waterhouse_generators(n: usize, field: &FieldRef) -> Result<(ProjLinearMap, ProjLinearMap), LinearError> {
    let f = field;
    if n == 0 {
        return Err(LinearError::DimensionMismatch { n, got: 1 });
    }
    let (a, b) = if n >= 2 {
        let mut a = linalg::identity(n + 1);
        a[1][1] = f.generator();
        a[n][0] = 1;
        (a, cyclic_shift(n))
    } else if f.order() == 2 {
        (vec![vec![0, 1], vec![1, 1]], vec![vec![1, 1], vec![0, 1]])
    } else {
        let p = quadratic_params(f)?;
        (vec![vec![0, p.r], vec![1, p.s]], vec![vec![p.alpha, 0], vec![0, 1]])
    };
    Ok((ProjLinearMap::new(f, a)?, ProjLinearMap::new(f, b)?))
}

/// The factors `diag(r,1)`, `[[1,0],[s,1]]`, `[[0,1],[1,0]]` of A_1.
pub fn a1_factors(field: &FieldRef) -> Result<[ProjLinearMap; 3], LinearError> {
    let p = quadratic_params(field)?;
    Ok([
        ProjLinearMap::new(field, vec![vec![p.r, 0], vec![0, 1]])?,
        ProjLinearMap::new(field, vec![vec![1, 0], vec![p.s, 1]])?,
        ProjLinearMap::new(field, vec![vec![0, 1], vec![1, 0]])?,
    ])
}

pub fn linear_permutation(map: &ProjLinearMap, table: &PointTable) -> Result<(Permutation, CycleCensus), LinearError> {
    let perm = matrix_permutation(&map.field, &map.matrix, table)?;
    let census = perm.census();
    Ok((perm, census))
}

fn matrix_permutation(f: &crate::finite_field::Field, m: &Matrix, table: &PointTable) -> Result<Permutation, LinearError> {
    if m.len() != table.dimension() + 1 {
        return Err(LinearError::DimensionMismatch { n: table.dimension(), got: m.len() });
    }
    let img: Option<Vec<u32>> = table
        .iter()
        .map(|p| table.lookup(&linalg::mat_vec(f, m, p)).map(|i| i as u32))
        .collect();
    let img = img.ok_or(LinearError::SingularMatrix)?;
    Permutation::new(img).map_err(|_| LinearError::SingularMatrix)
}

/// Census of `B^u` (u the odd part of n+1) against the filtration count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BnCensus {
    pub n: usize,
    pub q: u64,
    pub u: usize,
    pub ell: u32,
    pub observed: CycleCensus,
    pub predicted: CycleCensus,
    pub matches: bool,
    /// Parity of B itself.
    pub parity: i8,
}

pub fn predicted_bn_census(n: usize, q: u64) -> CycleCensus {
    let mut u = n + 1;
    let mut ell = 0;
    while u.is_multiple_of(2) {
        u /= 2;
        ell += 1;
    }
    let mut ct = BTreeMap::new();
    ct.insert(1usize, ((q.pow(u as u32) - 1) / (q - 1)) as usize);
    for r in 1..=ell {
        let e = (u as u32) << (r - 1);
        let qe = q.pow(e);
        let count = (qe >> r) * ((qe - 1) / (q - 1));
        ct.insert(1usize << r, count as usize);
    }
    CycleCensus::from_cycle_type(&ct)
}

pub fn bn_cycle_census(n: usize, field: &FieldRef) -> Result<BnCensus, LinearError> {
    let f = field;
    if !f.is_char2() {
        return Err(LinearError::UnsupportedField(1));
    }
    let mut u = n + 1;
    let mut ell = 0;
    while u.is_multiple_of(2) {
        u /= 2;
        ell += 1;
    }
    let table = PointTable::new(n, f)?;
    let b = matrix_permutation(f, &cyclic_shift(n), &table)?;
    let observed = b.pow(u as u64).census();
    let predicted = predicted_bn_census(n, f.order());
    Ok(BnCensus {
        n,
        q: f.order(),
        u,
        ell,
        matches: observed == predicted,
        observed,
        predicted,
        parity: b.sign(),
    })
}

/// Summary of a parity sweep over PGL elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PglParityReport {
    pub n: usize,
    pub q: u64,
    pub exhaustive: bool,
    pub checked: u64,
    pub even: u64,
    pub odd: u64,
    /// Up to eight odd elements, as matrices.
    pub odd_examples: Vec<Matrix>,
}

fn random_invertible(f: &crate::finite_field::Field, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    loop {
        let m: Matrix = (0..k)
            .map(|_| (0..k).map(|_| rng.gen_range(0..f.order()) as u32).collect())
            .collect();
        if linalg::determinant(f, &m) != 0 {
            return m;
        }
    }
}

pub fn pgl_sample_parity(n: usize, field: &FieldRef, count: u64, seed: u64) -> Result<PglParityReport, LinearError> {
    let f = field;
    let table = PointTable::new(n, f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PglParityReport { n, q: f.order(), exhaustive: false, checked: 0, even: 0, odd: 0, odd_examples: vec![] };
    for _ in 0..count {
        let m = random_invertible(f, n + 1, &mut rng);
        tally(&mut report, &m, matrix_permutation(f, &m, &table)?.sign());
    }
    Ok(report)
}

fn tally(report: &mut PglParityReport, m: &Matrix, sign: i8) {
    report.checked += 1;
    if sign == 1 {
        report.even += 1;
    } else {
        report.odd += 1;
        if report.odd_examples.len() < 8 {
            report.odd_examples.push(m.clone());
        }
    }
}

/// All invertible matrices whose first nonzero entry (row-major) is 1, one per PGL element.
pub fn enumerate_pgl(n: usize, field: &FieldRef, jobs: usize) -> Result<Vec<Matrix>, LinearError> {
    let f = field;
    let k = n + 1;
    let q = f.order();
    let total = q
        .checked_pow((k * k) as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or(LinearError::Geometry(GeometryError::TableTooLarge(u64::MAX)))?;
    let chunk = 4096u64;
    let chunks = total.div_ceil(chunk) as usize;
    let parts = par::map_range(chunks, jobs, |c| {
        let mut out = Vec::new();
        for idx in c as u64 * chunk..((c as u64 + 1) * chunk).min(total) {
            let mut digits = vec![0u32; k * k];
            let mut r = idx;
            for d in digits.iter_mut().rev() {
                *d = (r % q) as u32;
                r /= q;
            }
            if digits.iter().find(|&&d| d != 0) != Some(&1) {
                continue;
            }
            let m: Matrix = digits.chunks(k).map(|r| r.to_vec()).collect();
            if linalg::determinant(f, &m) != 0 {
                out.push(m);
            }
        }
        out
    });
    Ok(parts.into_iter().flatten().collect())
}

pub fn pgl_exhaustive_parity(n: usize, field: &FieldRef, jobs: usize) -> Result<PglParityReport, LinearError> {
    let f = field;
    let table = PointTable::new(n, f)?;
    let all = enumerate_pgl(n, f, jobs)?;
    let signs = par::map_range(all.len(), jobs, |i| matrix_permutation(f, &all[i], &table).map(|p| p.sign()));
    let mut report = PglParityReport { n, q: f.order(), exhaustive: true, checked: 0, even: 0, odd: 0, odd_examples: vec![] };
    for (m, s) in all.iter().zip(signs) {
        tally(&mut report, m, s?);
    }
    Ok(report)
}

/// Counts `c_j` of `2^j`-cycles of the 2-part of a P^1 permutation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleConstraint {
    pub counts: BTreeMap<u32, usize>,
    pub holds: bool,
}

/// For a map of P^1 over GF(2^m), m >= 2: after raising to the odd part of
/// its order the census is the identity, or `c_0 = 1` with one nonzero
/// `c_j = q / 2^j`.
pub fn cycle_constraint_check(map: &ProjLinearMap) -> Result<CycleConstraint, LinearError> {
    let f = &map.field;
    if !f.is_char2() || f.order() < 4 {
        return Err(LinearError::UnsupportedField(2));
    }
    if map.dimension() != 1 {
        return Err(LinearError::DimensionMismatch { n: 1, got: map.matrix.len() });
    }
    let table = PointTable::new(1, f)?;
    let perm = matrix_permutation(f, &map.matrix, &table)?;
    let mut odd = perm.order();
    while odd % 2 == 0 {
        odd /= 2;
    }
    let reduced = perm.pow(odd as u64);
    let mut counts = BTreeMap::new();
    for (len, c) in reduced.cycle_type() {
        if !len.is_power_of_two() {
            return Err(LinearError::NotTwoPowerOrder);
        }
        counts.insert(len.trailing_zeros(), c);
    }
    let q = f.order() as usize;
    let nontrivial: Vec<(u32, usize)> = counts.iter().filter(|(&j, _)| j > 0).map(|(&j, &c)| (j, c)).collect();
    let holds = match nontrivial.as_slice() {
        [] => counts.get(&0) == Some(&(q + 1)),
        [(j, c)] => counts.get(&0) == Some(&1) && *c == q >> j && *c > 1,
        _ => false,
    };
    Ok(CycleConstraint { counts, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::make_field_q;

    #[test]
    fn b2_over_gf4_is_the_cycle_matrix() {
        let f = make_field_q(4).unwrap();
        let (a, b) = waterhouse_generators(2, &f).unwrap();
        assert_eq!(b.matrix, vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        assert_eq!(a.matrix, vec![vec![1, 0, 0], vec![0, f.generator(), 0], vec![1, 0, 1]]);
    }

    #[test]
    fn b1_over_gf4_fixes_axes_and_cycles_the_rest() {
        let f = make_field_q(4).unwrap();
        let (_, b) = waterhouse_generators(1, &f).unwrap();
        let t = PointTable::new(1, &f).unwrap();
        let (perm, census) = linear_permutation(&b, &t).unwrap();
        assert_eq!(perm.apply(t.index_of(&[1, 0]).unwrap()), t.index_of(&[1, 0]).unwrap());
        assert_eq!(perm.apply(t.index_of(&[0, 1]).unwrap()), t.index_of(&[0, 1]).unwrap());
        assert_eq!(census.counts, BTreeMap::from([(1, 2), (3, 1)]));
        assert_eq!(census.parity, 1);
    }

    #[test]
    fn gf2_line_generators() {
        let f = make_field_q(2).unwrap();
        let (a, b) = waterhouse_generators(1, &f).unwrap();
        let t = PointTable::new(1, &f).unwrap();
        assert_eq!(linear_permutation(&a, &t).unwrap().1.counts, BTreeMap::from([(3, 1)]));
        assert_eq!(linear_permutation(&b, &t).unwrap().1.counts, BTreeMap::from([(1, 1), (2, 1)]));
    }

    #[test]
    fn a_equals_t_times_m() {
        for q in [2u64, 4, 8] {
            let f = make_field_q(q).unwrap();
            for n in 2..5 {
                let (a, _) = waterhouse_generators(n, &f).unwrap();
                assert_eq!(linalg::mat_mul(&f, &t_matrix(n), &m_matrix(&f, n)), a.matrix);
                let t2 = linalg::mat_mul(&f, &t_matrix(n), &t_matrix(n));
                assert_eq!(t2, linalg::identity(n + 1));
            }
        }
    }

    #[test]
    fn a1_factorization() {
        for q in [4u64, 8, 16] {
            let f = make_field_q(q).unwrap();
            let (a, _) = waterhouse_generators(1, &f).unwrap();
            let [x, y, z] = a1_factors(&f).unwrap();
            assert_eq!(x.compose(&y).compose(&z).matrix, a.matrix);
            let t = PointTable::new(1, &f).unwrap();
            for m in [x, y, z] {
                assert_eq!(linear_permutation(&m, &t).unwrap().0.sign(), 1);
            }
        }
    }

    #[test]
    fn t_and_m_censuses_over_gf4() {
        let f = make_field_q(4).unwrap();
        let t = PointTable::new(2, &f).unwrap();
        let tm = ProjLinearMap::new(&f, t_matrix(2)).unwrap();
        let (perm, census) = linear_permutation(&tm, &t).unwrap();
        assert_eq!(census.counts, BTreeMap::from([(1, 5), (2, 8)]));
        for i in perm.fixed_points() {
            assert_eq!(t.point(i)[0], 0);
        }
        let mm = ProjLinearMap::new(&f, m_matrix(&f, 2)).unwrap();
        let (perm, census) = linear_permutation(&mm, &t).unwrap();
        assert_eq!(perm.order(), 3);
        assert_eq!(census.parity, 1);
        let f2 = make_field_q(2).unwrap();
        let t2 = PointTable::new(2, &f2).unwrap();
        let (_, c) = linear_permutation(&ProjLinearMap::new(&f2, t_matrix(2)).unwrap(), &t2).unwrap();
        assert_eq!((c.count(2), c.parity), (2, 1));
    }

    #[test]
    fn singular_maps_are_rejected() {
        let f = make_field_q(4).unwrap();
        assert_eq!(
            ProjLinearMap::new(&f, vec![vec![1, 1], vec![1, 1]]).unwrap_err(),
            LinearError::SingularMatrix
        );
    }

    #[test]
    fn bn_census_small_cases() {
        let f2 = make_field_q(2).unwrap();
        let c = bn_cycle_census(1, &f2).unwrap();
        assert_eq!(c.observed.count(2), 1);
        assert_eq!(c.parity, -1);
        let f4 = make_field_q(4).unwrap();
        let c = bn_cycle_census(2, &f4).unwrap();
        assert_eq!(c.u, 3);
        assert_eq!(c.observed.counts, BTreeMap::from([(1, 21)]));
        assert_eq!(c.parity, 1);
        assert!(c.matches);
    }

    #[test]
    fn pgl_sizes() {
        let f8 = make_field_q(8).unwrap();
        assert_eq!(enumerate_pgl(1, &f8, 1).unwrap().len(), 504);
        let f2 = make_field_q(2).unwrap();
        let r = pgl_exhaustive_parity(2, &f2, 1).unwrap();
        assert_eq!(r.checked, 168);
        // GL_3(F_2) is simple, so it has no odd elements.
        assert_eq!(r.odd, 0);
        let r = pgl_exhaustive_parity(1, &f2, 1).unwrap();
        assert_eq!((r.checked, r.odd), (6, 3));
    }

    #[test]
    fn translation_constraint() {
        let f = make_field_q(4).unwrap();
        let m = ProjLinearMap::new(&f, vec![vec![1, 1], vec![0, 1]]).unwrap();
        let c = cycle_constraint_check(&m).unwrap();
        assert!(c.holds);
        assert_eq!(c.counts, BTreeMap::from([(0, 1), (1, 2)]));
        let f8 = make_field_q(8).unwrap();
        let id = ProjLinearMap::new(&f8, linalg::identity(2)).unwrap();
        let c = cycle_constraint_check(&id).unwrap();
        assert_eq!(c.counts, BTreeMap::from([(0, 9)]));
        assert!(c.holds);
    }
}
