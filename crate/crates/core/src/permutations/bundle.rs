//! Bundles over finite sets: a permutation of the base together with
//! fiberwise isomorphisms, assembled into a permutation of the total space.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use super::Permutation;
use crate::finite_field::{Field, FieldRef};
use crate::linalg::{self, Matrix};
use crate::proj_geometry::{GeometryError, PointTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BundleError {
    #[error("transition over base point {0} is not an invertible map of the right kind")]
    InvalidTransition(usize),
    #[error("fibers over {0} and its image have different kinds")]
    FiberMismatch(usize),
    #[error("base permutation has {base} points but {fibers} fibers were given")]
    LengthMismatch { base: usize, fibers: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Rational configurations of a plane conic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ConicType {
    /// Smooth conic.
    I,
    /// Double line, modeled by its reduced line.
    II,
    /// Two rational lines through a rational node.
    III,
    /// Two conjugate lines; the node is the only rational point.
    IV,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FiberKind {
    Projective(usize),
    Conic(ConicType),
}

/// Isomorphism from the fiber over `i` to the fiber over `σ_B(i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transition {
    /// Projective linear map on P^n (also used for conic types I and II via P^1).
    Linear(Matrix),
    /// Type III: each line's affine coordinate `t` goes to `a t + b`, with the
    /// lines optionally exchanged. The node is fixed.
    LinePair { swap: bool, maps: [(u32, u32); 2] },
    /// Type IV: the node goes to the node.
    Node,
}

#[derive(Debug, Clone)]
pub struct AbstractBundle {
    pub field: FieldRef,
    pub base: Permutation,
    pub fibers: Vec<FiberKind>,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone)]
pub struct BundleReport {
    pub total: Permutation,
    pub base_parity: i8,
    pub total_parity: i8,
    pub parity_match: bool,
    /// Offset of each fiber in the total-space indexing.
    pub offsets: Vec<usize>,
}

/// Rational points of a conic fiber of the given type, as points of P^2.
///
/// Type III is the line pair `xy = 0`: the node `[0:0:1]`, then `[1:0:t]`,
/// then `[0:1:t]` for `t` in field order. Types I and II are parametrized by P^1.
pub fn conic_fiber_points(kind: ConicType, field: &FieldRef) -> Vec<Vec<u32>> {
    match kind {
        ConicType::I | ConicType::II => {
            // Parametrize the conic y^2 = xz (smooth) or the line z = 0 (reduced double line).
            let p1 = PointTable::new(1, field).expect("P^1 is small");
            p1.iter()
                .map(|p| {
                    let (s, t) = (p[0], p[1]);
                    if kind == ConicType::I {
                        vec![field.mul(s, s), field.mul(s, t), field.mul(t, t)]
                    } else {
                        vec![s, t, 0]
                    }
                })
                .collect()
        }
        ConicType::III => {
            let mut pts = vec![vec![0, 0, 1]];
            pts.extend(field.elements().map(|t| vec![1, 0, t]));
            pts.extend(field.elements().map(|t| vec![0, 1, t]));
            pts
        }
        ConicType::IV => vec![vec![0, 0, 1]],
    }
}

fn fiber_size(kind: FiberKind, q: u64) -> usize {
    match kind {
        FiberKind::Projective(n) => crate::proj_geometry::projective_size(n, q) as usize,
        FiberKind::Conic(ConicType::I | ConicType::II) => q as usize + 1,
        FiberKind::Conic(ConicType::III) => 2 * q as usize + 1,
        FiberKind::Conic(ConicType::IV) => 1,
    }
}

fn transition_fits(f: &Field, kind: FiberKind, t: &Transition) -> bool {
    let square = |m: &Matrix, k: usize| m.len() == k && m.iter().all(|r| r.len() == k);
    match (kind, t) {
        (FiberKind::Projective(n), Transition::Linear(m)) => {
            square(m, n + 1) && linalg::determinant(f, m) != 0
        }
        (FiberKind::Conic(ConicType::I | ConicType::II), Transition::Linear(m)) => {
            square(m, 2) && linalg::determinant(f, m) != 0
        }
        (FiberKind::Conic(ConicType::III), Transition::LinePair { maps, .. }) => {
            maps.iter().all(|&(a, b)| a != 0 && (a as u64) < f.order() && (b as u64) < f.order())
        }
        (FiberKind::Conic(ConicType::IV), Transition::Node) => true,
        _ => false,
    }
}

pub fn bundle_total_permutation(b: &AbstractBundle) -> Result<BundleReport, BundleError> {
    let f = &b.field;
    let r = b.base.len();
    if b.fibers.len() != r || b.transitions.len() != r {
        return Err(BundleError::LengthMismatch { base: r, fibers: b.fibers.len() });
    }
    for i in 0..r {
        if b.fibers[i] != b.fibers[b.base.apply(i)] {
            return Err(BundleError::FiberMismatch(i));
        }
        if !transition_fits(f, b.fibers[i], &b.transitions[i]) {
            return Err(BundleError::InvalidTransition(i));
        }
    }
    let q = f.order();
    let mut offsets = Vec::with_capacity(r + 1);
    let mut total = 0usize;
    for &k in &b.fibers {
        offsets.push(total);
        total += fiber_size(k, q);
    }
    let mut tables: HashMap<usize, PointTable> = HashMap::new();
    let mut img = vec![0u32; total];
    for i in 0..r {
        let j = b.base.apply(i);
        let (src, dst) = (offsets[i], offsets[j]);
        let kind = b.fibers[i];
        match &b.transitions[i] {
            Transition::Linear(m) => {
                let dim = m.len() - 1;
                if let std::collections::hash_map::Entry::Vacant(e) = tables.entry(dim) {
                    e.insert(PointTable::new(dim, f)?);
                }
                let table = &tables[&dim];
                for (k, p) in table.iter().enumerate() {
                    let image = linalg::mat_vec(f, m, p);
                    let idx = table.lookup(&image).expect("invertible maps send points to points");
                    img[src + k] = (dst + idx) as u32;
                }
            }
            Transition::LinePair { swap, maps } => {
                img[src] = dst as u32;
                for line in 0..2 {
                    let (a, c) = maps[line];
                    let to = if *swap { 1 - line } else { line };
                    for t in f.elements() {
                        let u = f.add(f.mul(a, t), c);
                        let from = src + 1 + line * q as usize + t as usize;
                        img[from] = (dst + 1 + to * q as usize + u as usize) as u32;
                    }
                }
            }
            Transition::Node => {
                debug_assert_eq!(kind, FiberKind::Conic(ConicType::IV));
                img[src] = dst as u32;
            }
        }
    }
    let total = Permutation::new(img).map_err(|_| BundleError::InvalidTransition(0))?;
    let base_parity = b.base.sign();
    let total_parity = total.sign();
    Ok(BundleReport { total, base_parity, total_parity, parity_match: base_parity == total_parity, offsets })
}

fn random_invertible<R: Rng>(f: &Field, k: usize, rng: &mut R) -> Matrix {
    loop {
        let m: Matrix = (0..k)
            .map(|_| (0..k).map(|_| rng.gen_range(0..f.order()) as u32).collect())
            .collect();
        if linalg::determinant(f, &m) != 0 {
            return m;
        }
    }
}

fn random_transition<R: Rng>(f: &Field, kind: FiberKind, rng: &mut R) -> Transition {
    match kind {
        FiberKind::Projective(n) => Transition::Linear(random_invertible(f, n + 1, rng)),
        FiberKind::Conic(ConicType::I | ConicType::II) => Transition::Linear(random_invertible(f, 2, rng)),
        FiberKind::Conic(ConicType::III) => {
            let mut affine = || (rng.gen_range(1..f.order()) as u32, rng.gen_range(0..f.order()) as u32);
            let maps = [affine(), affine()];
            Transition::LinePair { swap: rng.gen_bool(0.5), maps }
        }
        FiberKind::Conic(ConicType::IV) => Transition::Node,
    }
}

/// A random bundle on at most `max_base` base points; fibers are constant
/// along each orbit of the base permutation.
pub fn random_bundle<R: Rng>(field: &FieldRef, max_base: usize, rng: &mut R) -> AbstractBundle {
    let r = rng.gen_range(1..=max_base);
    let mut img: Vec<u32> = (0..r as u32).collect();
    img.shuffle(rng);
    let base = Permutation::new(img).expect("a shuffle is a bijection");
    let kinds = [
        FiberKind::Projective(1),
        FiberKind::Projective(2),
        FiberKind::Conic(ConicType::I),
        FiberKind::Conic(ConicType::II),
        FiberKind::Conic(ConicType::III),
        FiberKind::Conic(ConicType::IV),
    ];
    let mut fibers = vec![FiberKind::Projective(1); r];
    for cycle in base.cycles() {
        let k = *kinds.choose(rng).expect("nonempty");
        for i in cycle {
            fibers[i] = k;
        }
    }
    let transitions = fibers.iter().map(|&k| random_transition(field, k, rng)).collect();
    AbstractBundle { field: field.clone(), base, fibers, transitions }
}

/// Outcome of a batch of seeded random bundles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BundleTrials {
    pub trials: usize,
    pub parity_match: usize,
    pub odd_totals: usize,
    /// Up to 16 trial indices where the parities differ.
    pub mismatches: Vec<usize>,
}

pub fn bundle_trials(field: &FieldRef, trials: usize, max_base: usize, seed: u64) -> Result<BundleTrials, BundleError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BundleTrials { trials, parity_match: 0, odd_totals: 0, mismatches: Vec::new() };
    for i in 0..trials {
        let r = bundle_total_permutation(&random_bundle(field, max_base.max(1), &mut rng))?;
        if r.parity_match {
            out.parity_match += 1;
        } else if out.mismatches.len() < 16 {
            out.mismatches.push(i);
        }
        if r.total_parity == -1 {
            out.odd_totals += 1;
        }
    }
    Ok(out)
}

/// One base point with fiber P^1 and transition `[[1,1],[0,1]]`.
pub fn f2_counterexample(field: &FieldRef) -> AbstractBundle {
    AbstractBundle {
        field: field.clone(),
        base: Permutation::identity(1),
        fibers: vec![FiberKind::Projective(1)],
        transitions: vec![Transition::Linear(vec![vec![1, 1], vec![0, 1]])],
    }
}

/// The curve `y^2 + xy = x^3 + 1` over a field of characteristic 2 with the
/// involution `(x, y) -> (x, y + x)`, and the trivial P^1-bundle over it.
#[derive(Debug, Clone)]
pub struct EllipticExample {
    /// Affine points in lexicographic order; the point at infinity comes last.
    pub points: Vec<Option<(u32, u32)>>,
    pub involution: Permutation,
    pub bundle: AbstractBundle,
}

pub fn elliptic_example(field: &FieldRef) -> EllipticExample {
    let f = field;
    let mut points: Vec<Option<(u32, u32)>> = Vec::new();
    for x in f.elements() {
        for y in f.elements() {
            let lhs = f.add(f.mul(y, y), f.mul(x, y));
            let rhs = f.add(f.pow(x, 3), 1);
            if lhs == rhs {
                points.push(Some((x, y)));
            }
        }
    }
    points.push(None);
    let index: HashMap<Option<(u32, u32)>, usize> =
        points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let img = points
        .iter()
        .map(|p| {
            let image = p.map(|(x, y)| (x, f.add(y, x)));
            index[&image] as u32
        })
        .collect();
    let involution = Permutation::new(img).expect("the involution permutes the curve");
    let n = points.len();
    let bundle = AbstractBundle {
        field: field.clone(),
        base: involution.clone(),
        fibers: vec![FiberKind::Projective(1); n],
        transitions: vec![Transition::Linear(linalg::identity(2)); n],
    };
    EllipticExample { points, involution, bundle }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::make_field_q;

    #[test]
    fn conic_fiber_counts() {
        for q in [2u64, 4, 8] {
            let f = make_field_q(q).unwrap();
            let n = q as usize;
            assert_eq!(conic_fiber_points(ConicType::I, &f).len(), n + 1);
            assert_eq!(conic_fiber_points(ConicType::II, &f).len(), n + 1);
            assert_eq!(conic_fiber_points(ConicType::III, &f).len(), 2 * n + 1);
            assert_eq!(conic_fiber_points(ConicType::IV, &f).len(), 1);
        }
        // Type I points lie on y^2 = xz and are distinct.
        let f = make_field_q(4).unwrap();
        let pts = conic_fiber_points(ConicType::I, &f);
        for p in &pts {
            assert_eq!(f.mul(p[1], p[1]), f.mul(p[0], p[2]));
        }
        let mut d = pts.clone();
        d.dedup();
        assert_eq!(d.len(), pts.len());
    }

    #[test]
    fn single_fiber_linear_bundle_is_even_over_gf4() {
        let f = make_field_q(4).unwrap();
        let b = AbstractBundle {
            field: f.clone(),
            base: Permutation::identity(1),
            fibers: vec![FiberKind::Projective(1)],
            transitions: vec![Transition::Linear(vec![vec![1, 2], vec![2, 1]])],
        };
        let r = bundle_total_permutation(&b).unwrap();
        assert_eq!((r.base_parity, r.total_parity), (1, 1));
        assert!(r.parity_match);
    }

    #[test]
    fn swapped_nodes_are_a_transposition() {
        let f = make_field_q(4).unwrap();
        let b = AbstractBundle {
            field: f.clone(),
            base: Permutation::transposition(2, 0, 1),
            fibers: vec![FiberKind::Conic(ConicType::IV); 2],
            transitions: vec![Transition::Node; 2],
        };
        let r = bundle_total_permutation(&b).unwrap();
        assert_eq!(r.total, Permutation::transposition(2, 0, 1));
        assert_eq!((r.base_parity, r.total_parity), (-1, -1));
        assert!(r.parity_match);
    }

    #[test]
    fn invalid_transitions_are_rejected() {
        let f = make_field_q(4).unwrap();
        let mut b = f2_counterexample(&f);
        b.transitions = vec![Transition::Linear(vec![vec![1, 1], vec![1, 1]])];
        assert_eq!(bundle_total_permutation(&b).unwrap_err(), BundleError::InvalidTransition(0));
        b.transitions = vec![Transition::Node];
        assert_eq!(bundle_total_permutation(&b).unwrap_err(), BundleError::InvalidTransition(0));
        let b = AbstractBundle {
            field: f.clone(),
            base: Permutation::transposition(2, 0, 1),
            fibers: vec![FiberKind::Conic(ConicType::IV), FiberKind::Projective(1)],
            transitions: vec![Transition::Node, Transition::Linear(linalg::identity(2))],
        };
        assert_eq!(bundle_total_permutation(&b).unwrap_err(), BundleError::FiberMismatch(0));
    }

    #[test]
    fn gf2_counterexample_breaks_parity_match() {
        let f = make_field_q(2).unwrap();
        let r = bundle_total_permutation(&f2_counterexample(&f)).unwrap();
        assert_eq!((r.base_parity, r.total_parity), (1, -1));
        assert!(!r.parity_match);
    }

    #[test]
    fn elliptic_bundle_is_odd() {
        let f = make_field_q(4).unwrap();
        let e = elliptic_example(&f);
        assert_eq!(e.points.len(), 8);
        assert_eq!(e.involution.cycle_type().get(&2), Some(&3));
        let r = bundle_total_permutation(&e.bundle).unwrap();
        assert_eq!(r.total_parity, -1);
        assert_eq!(r.total.cycle_type().get(&2), Some(&15));
    }

    #[test]
    fn random_bundles_match_parity_in_even_characteristic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [4u64, 8] {
            let f = make_field_q(q).unwrap();
            for _ in 0..100 {
                let b = random_bundle(&f, 5, &mut rng);
                assert!(bundle_total_permutation(&b).unwrap().parity_match);
            }
        }
    }
}
