//! Geiser and Bertini involutions on del Pezzo surfaces of degree 2 and 1
//! over GF(2^m), and regular quadratic involutions of the plane whose base
//! points form a Galois orbit of degree 3.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::finite_field::{make_field, subfield_embed, Field, FieldError, FieldRef};
use crate::linalg::{self, Matrix};
use crate::permutations::Permutation;
use crate::proj_geometry::{normalize, GeometryError, PointTable};
use crate::rational_maps::{
    homogeneous_monomials, induced_permutation, Evaluation, MapError, Polynomial, RationalMapData,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InvolutionError {
    #[error("construction requires characteristic 2")]
    OddCharacteristic,
    #[error("branch polynomial f is zero")]
    ZeroBranchPolynomial,
    #[error("both a1 and a3 vanish, so the involution is trivial")]
    TrivialInvolution,
    #[error("`{name}` must be homogeneous of degree {degree} in {nvars} variables")]
    BadCoefficient { name: &'static str, degree: u32, nvars: usize },
    #[error("surface is singular at the rational point {0:?}")]
    SingularSurface(Vec<u32>),
    #[error("involution does not preserve the surface equation")]
    InvolutionDoesNotPreserveSurface,
    #[error("the Galois conjugates of the seed point are collinear")]
    CollinearOrbit,
    #[error("seed point does not have degree 3")]
    NotDegreeThree,
    #[error("no instance passed the singularity screen in {0} attempts")]
    NoInstance(usize),
    #[error("map is not defined over the base field")]
    NotRational,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A hypersurface in weighted projective space with its rational points.
///
/// Points are stored in a canonical representative where the weight-1
/// coordinates are normalized (leftmost nonzero equal to 1).
#[derive(Debug, Clone)]
pub struct WeightedHypersurface {
    pub weights: Vec<u32>,
    pub field: FieldRef,
    pub equation: Polynomial,
    points: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl WeightedHypersurface {
    fn from_points(weights: &[u32], field: &FieldRef, equation: Polynomial, points: Vec<Vec<u32>>) -> Self {
        let index = points.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        WeightedHypersurface { weights: weights.to_vec(), field: field.clone(), equation, points, index }
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

    pub fn points(&self) -> &[Vec<u32>] {
        &self.points
    }

    /// Index of a point given in canonical form.
    pub fn index_of(&self, p: &[u32]) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// First rational point where the equation and all partials vanish.
    pub fn rational_singularity(&self) -> Option<Vec<u32>> {
        let partials: Vec<Polynomial> =
            (0..self.equation.nvars()).map(|i| self.equation.partial_derivative(i)).collect();
        self.points
            .iter()
            .find(|p| self.equation.eval(p) == 0 && partials.iter().all(|d| d.eval(p) == 0))
            .cloned()
    }
}

/// Fixed points and parity of an involution on a finite point set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InvolutionCensus {
    pub points: usize,
    pub fixed: usize,
    pub transpositions: usize,
    pub parity: i8,
    pub fixed_mod4: usize,
    pub is_involution: bool,
    #[serde(skip)]
    pub permutation: Permutation,
}

impl InvolutionCensus {
    pub fn from_permutation(permutation: Permutation) -> InvolutionCensus {
        let fixed = permutation.fixed_points().len();
        let points = permutation.len();
        InvolutionCensus {
            points,
            fixed,
            transpositions: (points - fixed) / 2,
            parity: permutation.sign(),
            fixed_mod4: fixed % 4,
            is_involution: permutation.pow(2).is_identity(),
            permutation,
        }
    }
}

/// Roots of `w^2 + b w + c` in GF(2^m).
struct Char2Quadratic {
    /// Least `u` with `u^2 + u = c`, indexed by `c`.
    artin_schreier: Vec<Option<u32>>,
}

impl Char2Quadratic {
    fn new(f: &Field) -> Char2Quadratic {
        let mut artin_schreier = vec![None; f.order() as usize];
        for u in f.elements() {
            let c = f.add(f.mul(u, u), u) as usize;
            if artin_schreier[c].is_none() {
                artin_schreier[c] = Some(u);
            }
        }
        Char2Quadratic { artin_schreier }
    }

    fn roots(&self, f: &Field, b: u32, c: u32) -> Vec<u32> {
        if b == 0 {
            // Squaring is bijective.
            return vec![f.sqrt(c).expect("every element is a square")];
        }
        // w = b u turns the equation into u^2 + u = c / b^2.
        let t = f.div(c, f.mul(b, b)).expect("b is nonzero");
        match self.artin_schreier[t as usize] {
            Some(u) => {
                let mut r = vec![f.mul(b, u), f.mul(b, f.add(u, 1))];
                r.sort_unstable();
                r
            }
            None => Vec::new(),
        }
    }
}

fn check_coefficient(p: &Polynomial, name: &'static str, degree: u32, nvars: usize) -> Result<(), InvolutionError> {
    let ok = p.nvars() == nvars && (p.is_zero() || (p.is_homogeneous() && p.degree() == Some(degree)));
    if ok {
        Ok(())
    } else {
        Err(InvolutionError::BadCoefficient { name, degree, nvars })
    }
}

fn require_char2(f: &Field) -> Result<(), InvolutionError> {
    if f.is_char2() {
        Ok(())
    } else {
        Err(InvolutionError::OddCharacteristic)
    }
}

/// Lifts a polynomial in `k` variables into `n` variables, placing them at `offset`.
fn lift(p: &Polynomial, n: usize, offset: usize) -> Polynomial {
    let subs: Vec<Polynomial> = (0..p.nvars()).map(|i| Polynomial::var(p.field(), n, offset + i)).collect();
    p.substitute(&subs)
}

/// The degree-2 del Pezzo model `w^2 + f w = g` in P[2:1:1:1], coordinates `(w, x, y, z)`.
#[derive(Debug, Clone)]
pub struct GeiserSurface {
    pub f: Polynomial,
    pub g: Polynomial,
    pub surface: WeightedHypersurface,
}

pub fn geiser_surface(f: &Polynomial, g: &Polynomial, field: &FieldRef) -> Result<GeiserSurface, InvolutionError> {
    require_char2(field)?;
    check_coefficient(f, "f", 2, 3)?;
    check_coefficient(g, "g", 4, 3)?;
    if f.is_zero() {
        return Err(InvolutionError::ZeroBranchPolynomial);
    }
    let w = Polynomial::var(field, 4, 0);
    let (f4, g4) = (lift(f, 4, 1), lift(g, 4, 1));
    let equation = w.mul(&w).add(&f4.mul(&w)).add(&g4);

    let solver = Char2Quadratic::new(field);
    let plane = PointTable::new(2, field)?;
    let mut points = Vec::new();
    for p in plane.iter() {
        for w in solver.roots(field, f.eval(p), g.eval(p)) {
            points.push(vec![w, p[0], p[1], p[2]]);
        }
    }
    let surface = WeightedHypersurface::from_points(&[2, 1, 1, 1], field, equation, points);
    if let Some(p) = surface.rational_singularity() {
        return Err(InvolutionError::SingularSurface(p));
    }
    Ok(GeiserSurface { f: f.clone(), g: g.clone(), surface })
}

/// Census of `γ: w ↦ w + f` (the negation `-w - f` in characteristic 2).
pub fn geiser_census(f: &Polynomial, g: &Polynomial, field: &FieldRef) -> Result<InvolutionCensus, InvolutionError> {
    let s = geiser_surface(f, g, field)?;
    Ok(geiser_census_on(&s))
}

pub fn geiser_census_on(s: &GeiserSurface) -> InvolutionCensus {
    let fld = &s.surface.field;
    let img: Vec<u32> = s
        .surface
        .points()
        .iter()
        .map(|p| {
            let w = fld.add(p[0], s.f.eval(&p[1..]));
            s.surface.index_of(&[w, p[1], p[2], p[3]]).expect("γ preserves the surface") as u32
        })
        .collect();
    InvolutionCensus::from_permutation(Permutation::new(img).expect("γ is a bijection"))
}

/// The degree-1 del Pezzo model
/// `w^2 + a1 w z + a3 w = z^3 + a2 z^2 + a4 z + a6` in P[3:2:1:1],
/// coordinates `(w, z, x, y)`.
#[derive(Debug, Clone)]
pub struct BertiniSurface {
    /// `a1, a2, a3, a4, a6` in `(x, y)`.
    pub a: [Polynomial; 5],
    pub surface: WeightedHypersurface,
}

impl BertiniSurface {
    fn a(&self, i: usize) -> &Polynomial {
        &self.a[match i {
            1 => 0,
            2 => 1,
            3 => 2,
            4 => 3,
            6 => 4,
            _ => unreachable!("no coefficient a{i}"),
        }]
    }

    /// The involution as a substitution `w := w + a1 z + a3`.
    pub fn involution_substitution(&self) -> Vec<Polynomial> {
        let fld = &self.surface.field;
        let v = |i| Polynomial::var(fld, 4, i);
        let shift = lift(self.a(1), 4, 2).mul(&v(1)).add(&lift(self.a(3), 4, 2));
        vec![v(0).add(&shift), v(1), v(2), v(3)]
    }

    /// Whether the involution maps the equation to itself as a polynomial.
    pub fn involution_preserves_equation(&self) -> bool {
        self.surface.equation.substitute(&self.involution_substitution()) == self.surface.equation
    }
}

/// Canonical representative of the unique point over `x = y = 0`.
pub const BERTINI_BASE_POINT: [u32; 4] = [1, 1, 0, 0];

pub fn bertini_surface(a: [&Polynomial; 5], field: &FieldRef) -> Result<BertiniSurface, InvolutionError> {
    require_char2(field)?;
    const NAMES: [(&str, u32); 5] = [("a1", 1), ("a2", 2), ("a3", 3), ("a4", 4), ("a6", 6)];
    for (p, (name, d)) in a.iter().zip(NAMES) {
        check_coefficient(p, name, d, 2)?;
    }
    if a[0].is_zero() && a[2].is_zero() {
        return Err(InvolutionError::TrivialInvolution);
    }
    let v = |i| Polynomial::var(field, 4, i);
    let (w, z) = (v(0), v(1));
    let l = |p: &Polynomial| lift(p, 4, 2);
    let lhs = w.mul(&w).add(&l(a[0]).mul(&w).mul(&z)).add(&l(a[2]).mul(&w));
    let rhs = z.pow(3).add(&l(a[1]).mul(&z.pow(2))).add(&l(a[3]).mul(&z)).add(&l(a[4]));
    let equation = lhs.sub(&rhs);

    let solver = Char2Quadratic::new(field);
    let line = PointTable::new(1, field)?;
    let mut points = vec![BERTINI_BASE_POINT.to_vec()];
    for xy in line.iter() {
        let ev: Vec<u32> = a.iter().map(|p| p.eval(xy)).collect();
        let [a1, a2, a3, a4, a6] = [ev[0], ev[1], ev[2], ev[3], ev[4]];
        for z in field.elements() {
            let b = field.add(field.mul(a1, z), a3);
            let z2 = field.mul(z, z);
            let r = field.add(
                field.add(field.mul(z2, z), field.mul(a2, z2)),
                field.add(field.mul(a4, z), a6),
            );
            // w^2 + b w - r = 0 and -r = r.
            for w in solver.roots(field, b, r) {
                points.push(vec![w, z, xy[0], xy[1]]);
            }
        }
    }
    let surface = WeightedHypersurface::from_points(&[3, 2, 1, 1], field, equation, points);
    let s = BertiniSurface { a: a.map(|p| p.clone()), surface };
    if !s.involution_preserves_equation() {
        return Err(InvolutionError::InvolutionDoesNotPreserveSurface);
    }
    if let Some(p) = s.surface.rational_singularity() {
        return Err(InvolutionError::SingularSurface(p));
    }
    Ok(s)
}

/// Census of the Bertini involution `w ↦ w + a1 z + a3`.
pub fn bertini_census(a: [&Polynomial; 5], field: &FieldRef) -> Result<InvolutionCensus, InvolutionError> {
    let s = bertini_surface(a, field)?;
    Ok(bertini_census_on(&s))
}

pub fn bertini_census_on(s: &BertiniSurface) -> InvolutionCensus {
    let fld = &s.surface.field;
    let img: Vec<u32> = s
        .surface
        .points()
        .iter()
        .map(|p| {
            let shift = fld.add(fld.mul(s.a(1).eval(&p[2..]), p[1]), s.a(3).eval(&p[2..]));
            let w = fld.add(p[0], shift);
            s.surface.index_of(&[w, p[1], p[2], p[3]]).expect("β preserves the surface") as u32
        })
        .collect();
    InvolutionCensus::from_permutation(Permutation::new(img).expect("β is a bijection"))
}

fn random_form<R: Rng>(field: &FieldRef, nvars: usize, degree: u32, rng: &mut R) -> Polynomial {
    let terms: Vec<(Vec<u32>, u32)> = homogeneous_monomials(nvars, degree)
        .into_iter()
        .map(|e| (e, rng.gen_range(0..field.order()) as u32))
        .collect();
    Polynomial::from_terms(field, nvars, &terms)
}

const MAX_ATTEMPTS: usize = 10_000;

/// Seeded random `(f, g)` passing the rational-singularity screen.
pub fn random_geiser_surface<R: Rng>(field: &FieldRef, rng: &mut R) -> Result<GeiserSurface, InvolutionError> {
    for _ in 0..MAX_ATTEMPTS {
        let f = random_form(field, 3, 2, rng);
        let g = random_form(field, 3, 4, rng);
        match geiser_surface(&f, &g, field) {
            Ok(s) => return Ok(s),
            Err(InvolutionError::SingularSurface(_) | InvolutionError::ZeroBranchPolynomial) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(InvolutionError::NoInstance(MAX_ATTEMPTS))
}

/// Seeded random Bertini model passing the screen.
pub fn random_bertini_surface<R: Rng>(field: &FieldRef, rng: &mut R) -> Result<BertiniSurface, InvolutionError> {
    for _ in 0..MAX_ATTEMPTS {
        let a = [1, 2, 3, 4, 6].map(|d| random_form(field, 2, d, rng));
        match bertini_surface([&a[0], &a[1], &a[2], &a[3], &a[4]], field) {
            Ok(s) => return Ok(s),
            Err(InvolutionError::SingularSurface(_) | InvolutionError::TrivialInvolution) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(InvolutionError::NoInstance(MAX_ATTEMPTS))
}

/// Checks applied to each sampled instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceCheck {
    pub index: usize,
    /// Defining data, rendered as polynomials.
    pub coefficients: Vec<String>,
    pub census: InvolutionCensus,
    pub points_mod_q: u64,
    /// `(|X| - fixed) / 2` is even.
    pub even_by_count: bool,
    pub base_point_fixed: Option<bool>,
    pub preserves_equation: Option<bool>,
    pub violations: Vec<String>,
}

impl InstanceCheck {
    fn new(index: usize, q: u64, coefficients: Vec<String>, census: InvolutionCensus) -> InstanceCheck {
        let mut c = InstanceCheck {
            index,
            coefficients,
            points_mod_q: census.points as u64 % q,
            even_by_count: census.transpositions.is_multiple_of(2),
            census,
            base_point_fixed: None,
            preserves_equation: None,
            violations: Vec::new(),
        };
        if !c.census.is_involution {
            c.violations.push("permutation squared is not the identity".into());
        }
        if q > 2 {
            if c.census.fixed_mod4 != 1 {
                c.violations.push(format!("fixed count {} is not 1 mod 4", c.census.fixed));
            }
            if c.census.parity != 1 {
                c.violations.push("involution is odd".into());
            }
        }
        if c.points_mod_q != 1 % q {
            c.violations.push(format!("|X| = {} is not 1 mod q", c.census.points));
        }
        c
    }
}

/// `count` seeded Geiser instances over `field`.
pub fn geiser_batch(field: &FieldRef, count: usize, seed: u64) -> Result<Vec<InstanceCheck>, InvolutionError> {
    require_char2(field)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let s = random_geiser_surface(field, &mut rng)?;
        let census = geiser_census_on(&s);
        out.push(InstanceCheck::new(index, field.order(), vec![s.f.to_string(), s.g.to_string()], census));
    }
    Ok(out)
}

/// `count` seeded Bertini instances over `field`.
pub fn bertini_batch(field: &FieldRef, count: usize, seed: u64) -> Result<Vec<InstanceCheck>, InvolutionError> {
    require_char2(field)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for index in 0..count {
        let s = random_bertini_surface(field, &mut rng)?;
        let census = bertini_census_on(&s);
        let base = s.surface.index_of(&BERTINI_BASE_POINT).expect("base point lies on X");
        let coeffs = s.a.iter().map(|p| p.to_string()).collect();
        let mut c = InstanceCheck::new(index, field.order(), coeffs, census);
        let fixed = c.census.permutation.apply(base) == base;
        let preserves = s.involution_preserves_equation();
        if !fixed {
            c.violations.push("base point is not fixed".into());
        }
        if !preserves {
            c.violations.push("involution does not preserve the equation".into());
        }
        c.base_point_fixed = Some(fixed);
        c.preserves_equation = Some(preserves);
        out.push(c);
    }
    Ok(out)
}

/// A regular quadratic involution `f = g s g^{-1}` with base points a degree-3 orbit.
#[derive(Debug, Clone)]
pub struct QuadraticTransformation {
    pub cubic_field: FieldRef,
    /// `[1 : b : c]` over GF(q^3).
    pub seed: [u32; 3],
    pub map: RationalMapData,
    pub census: InvolutionCensus,
    /// `g([1:1:1])`, normalized, over GF(q).
    pub predicted_fixed_point: Vec<u32>,
    pub fixed_points: Vec<Vec<u32>>,
    /// The orbit points are exactly the base points over GF(q^3).
    pub orbit_are_base_points: bool,
}

fn conjugate_matrix(ext: &Field, p: &[u32; 3], q: u64) -> Matrix {
    let conj = |x: u32, i: u32| ext.pow(x, q.pow(i));
    (0..3).map(|r| (0..3).map(|c| conj(p[r], c as u32)).collect()).collect()
}

/// First `[1:b:c]` over GF(q^3), in index order of `(b, c)`, with non-collinear conjugates.
pub fn default_cubic_orbit(field: &FieldRef) -> Result<[u32; 3], InvolutionError> {
    let ext = make_field(field.characteristic() as u64, 3 * field.degree())?;
    for b in ext.elements() {
        for c in ext.elements() {
            let p = [1, b, c];
            if linalg::determinant(&ext, &conjugate_matrix(&ext, &p, field.order())) != 0 {
                return Ok(p);
            }
        }
    }
    unreachable!("GF(q^3) contains points of degree 3")
}

pub fn quadratic_transformation(
    field: &FieldRef,
    seed: Option<[u32; 3]>,
) -> Result<QuadraticTransformation, InvolutionError> {
    let q = field.order();
    let ext = make_field(field.characteristic() as u64, 3 * field.degree())?;
    let emb = subfield_embed(field, &ext)?;
    let seed = match seed {
        Some(p) => p,
        None => default_cubic_orbit(field)?,
    };
    if seed.iter().any(|&x| u64::from(x) >= ext.order()) || seed.iter().all(|&x| x == 0) {
        return Err(InvolutionError::NotDegreeThree);
    }
    let mut np = seed;
    normalize(&ext, &mut np);
    let mut frob = np.map(|x| ext.pow(x, q));
    normalize(&ext, &mut frob);
    if frob == np {
        return Err(InvolutionError::NotDegreeThree);
    }
    let g = conjugate_matrix(&ext, &seed, q);
    if linalg::determinant(&ext, &g) == 0 {
        return Err(InvolutionError::CollinearOrbit);
    }

    // f(v) = g s(adj(g) v), composed symbolically over GF(q^3).
    let adj = linalg::adjugate3(&ext, &g);
    let lin: Vec<Polynomial> = adj
        .iter()
        .map(|row| {
            let terms: Vec<(Vec<u32>, u32)> =
                (0..3).map(|j| ((0..3).map(|k| u32::from(k == j)).collect(), row[j])).collect();
            Polynomial::from_terms(&ext, 3, &terms)
        })
        .collect();
    let s = [lin[1].mul(&lin[2]), lin[2].mul(&lin[0]), lin[0].mul(&lin[1])];
    let comps: Vec<Polynomial> = (0..3)
        .map(|i| (0..3).fold(Polynomial::zero(&ext, 3), |acc, j| acc.add(&s[j].scale(g[i][j]))))
        .collect();

    // Scale into GF(q) by the first nonzero coefficient.
    let lead = comps
        .iter()
        .find_map(|c| c.terms().last().map(|(_, c)| c))
        .ok_or(InvolutionError::NotRational)?;
    let inv = ext.inv(lead).expect("nonzero");
    let mut base_comps = Vec::with_capacity(3);
    for c in &comps {
        let mut terms = Vec::new();
        for (e, v) in c.terms() {
            let r = emb.restrict(ext.mul(v, inv)).ok_or(InvolutionError::NotRational)?;
            terms.push((e.to_vec(), r));
        }
        base_comps.push(Polynomial::from_terms(field, 3, &terms));
    }
    let map = RationalMapData::new("quadratic involution", base_comps)?;

    let table = PointTable::new(2, field)?;
    let induced = induced_permutation(&map, &table)?;
    let perm = induced.permutation.ok_or(InvolutionError::NotRational)?;
    let census = InvolutionCensus::from_permutation(perm);
    let fixed_points = census.permutation.fixed_points().into_iter().map(|i| table.point(i).to_vec()).collect();

    let mut predicted: Vec<u32> = g.iter().map(|row| row.iter().fold(0, |a, &x| ext.add(a, x))).collect();
    normalize(&ext, &mut predicted);
    let predicted_fixed_point = predicted
        .iter()
        .map(|&x| emb.restrict(x).ok_or(InvolutionError::NotRational))
        .collect::<Result<Vec<u32>, _>>()?;

    let orbit_are_base_points = (0..3).all(|i| {
        let p: Vec<u32> = seed.iter().map(|&x| ext.pow(x, q.pow(i))).collect();
        map.evaluate_over(&emb, &p) == Ok(Evaluation::BasePoint)
    });

    Ok(QuadraticTransformation {
        cubic_field: ext,
        seed,
        map,
        census,
        predicted_fixed_point,
        fixed_points,
        orbit_are_base_points,
    })
}
