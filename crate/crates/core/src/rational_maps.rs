//! Sparse multivariate polynomials over a finite field, rational maps given
//! by tuples of homogeneous polynomials, and the permutations they induce.
//!
//! Text format: terms `c*x0^a*x1^b` joined by `+`, where `c` is a field
//! element index (omitted when 1). A term may be a bare constant.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::finite_field::{FieldRef, SubfieldEmbedding};
use crate::permutations::Permutation;
use crate::proj_geometry::{self, PointTable};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("cannot parse polynomial term `{0}`")]
    Parse(String),
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("map components must be homogeneous of a common degree")]
    NotHomogeneous,
    #[error("all map components are zero")]
    ZeroMap,
    #[error("polynomials have different variable counts or fields")]
    Incompatible,
}

/// Exponent vector -> nonzero coefficient.
#[derive(Clone, PartialEq, Eq)]
pub struct Polynomial {
    field: FieldRef,
    nvars: usize,
    terms: BTreeMap<Vec<u32>, u32>,
}

/// Polynomials used as map components; homogeneity is checked where required.
pub type HomogeneousPolynomial = Polynomial;

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest exponent vectors first.
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(e, &c)| {
                let mut factors: Vec<String> = Vec::new();
                if c != 1 || e.iter().all(|&x| x == 0) {
                    factors.push(c.to_string());
                }
                for (i, &x) in e.iter().enumerate() {
                    match x {
                        0 => {}
                        1 => factors.push(format!("x{i}")),
                        _ => factors.push(format!("x{i}^{x}")),
                    }
                }
                factors.join("*")
            })
            .collect();
        write!(f, "{}", parts.join("+"))
    }
}

impl Polynomial {
    pub fn zero(field: &FieldRef, nvars: usize) -> Polynomial {
        Polynomial { field: Arc::clone(field), nvars, terms: BTreeMap::new() }
    }

    pub fn constant(field: &FieldRef, nvars: usize, c: u32) -> Polynomial {
        let mut p = Polynomial::zero(field, nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The variable `x_i`.
    pub fn var(field: &FieldRef, nvars: usize, i: usize) -> Polynomial {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Polynomial::monomial(field, e, 1)
    }

    pub fn monomial(field: &FieldRef, exps: Vec<u32>, c: u32) -> Polynomial {
        let mut p = Polynomial::zero(field, exps.len());
        p.add_term(exps, c);
        p
    }

    /// Builds from `(exponents, coefficient)` pairs, summing repeats.
    pub fn from_terms(field: &FieldRef, nvars: usize, terms: &[(Vec<u32>, u32)]) -> Polynomial {
        let mut p = Polynomial::zero(field, nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e.clone(), *c);
        }
        p
    }

    pub fn parse(text: &str, field: &FieldRef, nvars: usize) -> Result<Polynomial, MapError> {
        let mut p = Polynomial::zero(field, nvars);
        let text: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if text == "0" {
            return Ok(p);
        }
        for term in text.split('+') {
            let bad = || MapError::Parse(term.to_string());
            if term.is_empty() {
                return Err(bad());
            }
            let mut coeff = 1u32;
            let mut exps = vec![0u32; nvars];
            for factor in term.split('*') {
                if let Some(var) = factor.strip_prefix('x') {
                    let (idx, pow) = match var.split_once('^') {
                        Some((i, e)) => (i, e.parse::<u32>().map_err(|_| bad())?),
                        None => (var, 1),
                    };
                    let idx: usize = idx.parse().map_err(|_| bad())?;
                    if idx >= nvars {
                        return Err(bad());
                    }
                    exps[idx] += pow;
                } else {
                    let c: u64 = factor.parse().map_err(|_| bad())?;
                    if c >= field.order() {
                        return Err(bad());
                    }
                    coeff = field.mul(coeff, c as u32);
                }
            }
            p.add_term(exps, coeff);
        }
        Ok(p)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: u32) {
        if c == 0 {
            return;
        }
        let f = &self.field;
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = f.add(*o.get(), c);
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], u32)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    pub fn coefficient(&self, exps: &[u32]) -> u32 {
        self.terms.get(exps).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Degree with respect to variable weights.
    pub fn weighted_degree(&self, weights: &[u32]) -> Option<u32> {
        self.terms
            .keys()
            .map(|e| e.iter().zip(weights).map(|(a, w)| a * w).sum())
            .max()
    }

    pub fn is_weighted_homogeneous(&self, weights: &[u32]) -> bool {
        let mut degs = self
            .terms
            .keys()
            .map(|e| e.iter().zip(weights).map(|(a, w)| a * w).sum::<u32>());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|x| x == d),
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_weighted_homogeneous(&vec![1; self.nvars])
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(self.field.neg(1)))
    }

    pub fn scale(&self, c: u32) -> Polynomial {
        let mut out = Polynomial::zero(&self.field, self.nvars);
        for (e, &x) in &self.terms {
            out.add_term(e.clone(), self.field.mul(x, c));
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let f = &self.field;
        let mut out = Polynomial::zero(f, self.nvars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, f.mul(c1, c2));
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut acc = Polynomial::constant(&self.field, self.nvars, 1);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Formal derivative in `x_var`; the factor `e` is reduced mod p.
    pub fn partial_derivative(&self, var: usize) -> Polynomial {
        let f = &self.field;
        let mut out = Polynomial::zero(f, self.nvars);
        for (e, &c) in &self.terms {
            if e[var] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[var] -= 1;
            out.add_term(d, f.mul_int(c, e[var] as u64));
        }
        out
    }

    /// Substitutes `x_i := subs[i]`; the result lives in the substitutes' ring.
    pub fn substitute(&self, subs: &[Polynomial]) -> Polynomial {
        assert_eq!(subs.len(), self.nvars, "one substitute per variable");
        let nv = subs.first().map_or(0, |s| s.nvars);
        let mut out = Polynomial::zero(&self.field, nv);
        for (e, &c) in &self.terms {
            let mut t = Polynomial::constant(&self.field, nv, c);
            for (i, &x) in e.iter().enumerate() {
                if x > 0 {
                    t = t.mul(&subs[i].pow(x));
                }
            }
            out = out.add(&t);
        }
        out
    }

    pub fn eval(&self, x: &[u32]) -> u32 {
        let f = &self.field;
        self.terms.iter().fold(0, |acc, (e, &c)| {
            let m = e
                .iter()
                .zip(x)
                .fold(c, |m, (&k, &v)| if k == 0 { m } else { f.mul(m, f.pow(v, k as u64)) });
            f.add(acc, m)
        })
    }

    /// Evaluates at a point over an extension, embedding the coefficients.
    pub fn eval_embedded(&self, emb: &SubfieldEmbedding, x: &[u32]) -> u32 {
        let t = emb.target();
        self.terms.iter().fold(0, |acc, (e, &c)| {
            let m = e
                .iter()
                .zip(x)
                .fold(emb.embed(c), |m, (&k, &v)| if k == 0 { m } else { t.mul(m, t.pow(v, k as u64)) });
            t.add(acc, m)
        })
    }
}

/// Exponent vectors of degree `degree` in `nvars` variables, lexicographically descending.
pub fn homogeneous_monomials(nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(nvars: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == nvars {
            prefix.push(degree);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=degree).rev() {
            prefix.push(e);
            rec(nvars, degree - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars > 0 {
        rec(nvars, degree, &mut Vec::new(), &mut out);
    }
    out
}

pub fn partial_derivative(p: &Polynomial, var: usize) -> Polynomial {
    p.partial_derivative(var)
}

/// A rational map P^n --> P^m given by homogeneous components of equal degree.
#[derive(Debug, Clone)]
pub struct RationalMapData {
    pub label: String,
    source_dim: usize,
    components: Vec<Polynomial>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evaluation {
    Point(Vec<u32>),
    BasePoint,
}

impl RationalMapData {
    pub fn new(label: impl Into<String>, components: Vec<Polynomial>) -> Result<RationalMapData, MapError> {
        let first = components.first().ok_or(MapError::ZeroMap)?;
        let nvars = first.nvars();
        if components
            .iter()
            .any(|c| c.nvars() != nvars || !crate::finite_field::same_field(c.field(), first.field()))
        {
            return Err(MapError::Incompatible);
        }
        if components.iter().all(|c| c.is_zero()) {
            return Err(MapError::ZeroMap);
        }
        let mut degree = None;
        for c in components.iter().filter(|c| !c.is_zero()) {
            if !c.is_homogeneous() || degree.is_some_and(|d| Some(d) != c.degree()) {
                return Err(MapError::NotHomogeneous);
            }
            degree = c.degree();
        }
        Ok(RationalMapData { label: label.into(), source_dim: nvars - 1, components })
    }

    pub fn field(&self) -> &FieldRef {
        self.components[0].field()
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.components.len() - 1
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().filter_map(|c| c.degree()).max().unwrap_or(0)
    }

    /// Canonical image of a rational point, or `BasePoint`.
    pub fn evaluate(&self, p: &[u32]) -> Result<Evaluation, MapError> {
        if p.len() != self.source_dim + 1 {
            return Err(MapError::DimensionMismatch { expected: self.source_dim + 1, got: p.len() });
        }
        let mut v: Vec<u32> = self.components.iter().map(|c| c.eval(p)).collect();
        Ok(if proj_geometry::normalize(self.field(), &mut v) {
            Evaluation::Point(v)
        } else {
            Evaluation::BasePoint
        })
    }

    /// Evaluation at a point with coordinates in an extension field.
    pub fn evaluate_over(&self, emb: &SubfieldEmbedding, p: &[u32]) -> Result<Evaluation, MapError> {
        if p.len() != self.source_dim + 1 {
            return Err(MapError::DimensionMismatch { expected: self.source_dim + 1, got: p.len() });
        }
        let mut v: Vec<u32> = self.components.iter().map(|c| c.eval_embedded(emb, p)).collect();
        Ok(if proj_geometry::normalize(emb.target(), &mut v) {
            Evaluation::Point(v)
        } else {
            Evaluation::BasePoint
        })
    }
}

/// Outcome of evaluating a map on every point of a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InducedMapReport {
    /// Image index per source point; `None` at base points.
    #[serde(skip)]
    pub images: Vec<Option<usize>>,
    #[serde(skip)]
    pub permutation: Option<Permutation>,
    pub base_points: Vec<usize>,
    /// `(first source, second source, common image)`.
    pub non_injective: Vec<(usize, usize, usize)>,
}

impl InducedMapReport {
    pub fn from_images(images: Vec<Option<usize>>) -> InducedMapReport {
        let n = images.len();
        let base_points: Vec<usize> = (0..n).filter(|&i| images[i].is_none()).collect();
        let mut first_source: Vec<Option<usize>> = vec![None; n];
        let mut non_injective = Vec::new();
        for (i, img) in images.iter().enumerate() {
            if let Some(j) = *img {
                match first_source[j] {
                    Some(k) => non_injective.push((k, i, j)),
                    None => first_source[j] = Some(i),
                }
            }
        }
        let permutation = if base_points.is_empty() && non_injective.is_empty() {
            Some(
                Permutation::new(images.iter().map(|x| x.expect("total") as u32).collect())
                    .expect("total and injective on a finite set"),
            )
        } else {
            None
        };
        InducedMapReport { images, permutation, base_points, non_injective }
    }

    pub fn is_bijective(&self) -> bool {
        self.permutation.is_some()
    }
}

/// Evaluates `map` on every point of `table`.
pub fn induced_permutation(map: &RationalMapData, table: &PointTable) -> Result<InducedMapReport, MapError> {
    if map.source_dim() != table.dimension() || map.target_dim() != table.dimension() {
        return Err(MapError::DimensionMismatch { expected: table.dimension() + 1, got: map.source_dim() + 1 });
    }
    induced_from_fn(table, |p| match map.evaluate(p).expect("dimension checked") {
        Evaluation::Point(v) => Some(v),
        Evaluation::BasePoint => None,
    })
}

/// Builds the report for a pointwise self-map given as a closure returning
/// image coordinates (any representative) or `None` at base points.
pub fn induced_from_fn<F>(table: &PointTable, f: F) -> Result<InducedMapReport, MapError>
where
    F: Fn(&[u32]) -> Option<Vec<u32>>,
{
    let mut images = Vec::with_capacity(table.len());
    for p in table.iter() {
        let img = match f(p) {
            Some(v) => {
                if v.len() != table.dimension() + 1 {
                    return Err(MapError::DimensionMismatch { expected: table.dimension() + 1, got: v.len() });
                }
                table.lookup(&v)
            }
            None => None,
        };
        images.push(img);
    }
    Ok(InducedMapReport::from_images(images))
}

/// First collinear triple (in line order, then point order) whose images are
/// not collinear. The triple is returned as point indices.
pub fn collinearity_witness(perm: &Permutation, table: &PointTable) -> Option<[usize; 3]> {
    assert_eq!(table.dimension(), 2, "collinearity is checked in the plane");
    let f = table.field();
    for line in table.lines() {
        let pts = table.hyperplane_points(line);
        let (a, b) = (pts[0], pts[1]);
        let (ia, ib) = (table.point(perm.apply(a)), table.point(perm.apply(b)));
        for &c in &pts[2..] {
            if !proj_geometry::collinear(f, ia, ib, table.point(perm.apply(c))) {
                return Some([a, b, c]);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::make_field_q;

    fn standard_quadratic(f: &FieldRef) -> RationalMapData {
        let c = |s: &str| Polynomial::parse(s, f, 3).unwrap();
        RationalMapData::new("s", vec![c("x1*x2"), c("x0*x2"), c("x0*x1")]).unwrap()
    }

    #[test]
    fn quintic_monomials() {
        let m = homogeneous_monomials(3, 5);
        assert_eq!(m.len(), 21);
        assert_eq!(m[0], vec![5, 0, 0]);
        assert_eq!(m[1], vec![4, 1, 0]);
        assert_eq!(m[20], vec![0, 0, 5]);
        assert!(m.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(homogeneous_monomials(2, 6).len(), 7);
    }

    #[test]
    fn standard_quadratic_evaluations() {
        let f = make_field_q(4).unwrap();
        let s = standard_quadratic(&f);
        assert_eq!(s.evaluate(&[1, 1, 1]).unwrap(), Evaluation::Point(vec![1, 1, 1]));
        assert_eq!(s.evaluate(&[1, 0, 0]).unwrap(), Evaluation::BasePoint);
        assert_eq!(s.evaluate(&[1, 1, 0]).unwrap(), Evaluation::Point(vec![0, 0, 1]));
        assert!(matches!(s.evaluate(&[1, 1]), Err(MapError::DimensionMismatch { .. })));
    }

    #[test]
    fn standard_quadratic_over_gf2_has_three_base_points() {
        let f = make_field_q(2).unwrap();
        let t = PointTable::new(2, &f).unwrap();
        let r = induced_permutation(&standard_quadratic(&f), &t).unwrap();
        let mut bp: Vec<&[u32]> = r.base_points.iter().map(|&i| t.point(i)).collect();
        bp.sort();
        assert_eq!(bp, vec![&[0, 0, 1][..], &[0, 1, 0], &[1, 0, 0]]);
        assert!(r.permutation.is_none());
    }

    #[test]
    fn derivatives_respect_characteristic() {
        let f = make_field_q(2).unwrap();
        let p = |s: &str| Polynomial::parse(s, &f, 3).unwrap();
        assert!(p("x0^2*x1^3").partial_derivative(0).is_zero());
        assert_eq!(p("x0^3*x1^2").partial_derivative(0), p("x0^2*x1^2"));
        let f4 = make_field_q(4).unwrap();
        let q = Polynomial::parse("x0^2*x1^3+x0*x2^4", &f4, 3).unwrap();
        assert_eq!(q.partial_derivative(1), Polynomial::parse("x0^2*x1^2", &f4, 3).unwrap());
    }

    #[test]
    fn text_format_roundtrip() {
        let f = make_field_q(9).unwrap();
        let p = Polynomial::parse("3*x0^2*x1 + x2^3 + 7*x0*x1*x2 + 2", &f, 3).unwrap();
        let again = Polynomial::parse(&p.to_string(), &f, 3).unwrap();
        assert_eq!(p, again);
        assert!(Polynomial::parse("9*x0", &f, 3).is_err());
        assert!(Polynomial::parse("x3", &f, 3).is_err());
        assert!(Polynomial::parse("x0 + + x1", &f, 3).is_err());
    }

    #[test]
    fn map_construction_rejects_bad_components() {
        let f = make_field_q(3).unwrap();
        let p = |s: &str| Polynomial::parse(s, &f, 3).unwrap();
        assert!(matches!(
            RationalMapData::new("bad", vec![p("x0^2"), p("x1"), p("x2")]),
            Err(MapError::NotHomogeneous)
        ));
        assert!(matches!(RationalMapData::new("zero", vec![p("0"), p("0")]), Err(MapError::ZeroMap)));
    }

    #[test]
    fn identity_has_no_collinearity_witness() {
        let f = make_field_q(3).unwrap();
        let t = PointTable::new(2, &f).unwrap();
        assert_eq!(collinearity_witness(&Permutation::identity(t.len()), &t), None);
        // A transposition of two points is never a collineation.
        let w = collinearity_witness(&Permutation::transposition(t.len(), 0, 5), &t);
        assert!(w.is_some());
    }

    #[test]
    fn substitution_matches_pointwise_evaluation() {
        let f = make_field_q(8).unwrap();
        let p = Polynomial::parse("x0^2*x1+5*x1^3+x0*x1*x2", &f, 3).unwrap();
        let subs = vec![
            Polynomial::parse("x0+x1", &f, 2).unwrap(),
            Polynomial::parse("3*x1", &f, 2).unwrap(),
            Polynomial::parse("x0", &f, 2).unwrap(),
        ];
        let s = p.substitute(&subs);
        for a in f.elements() {
            for b in f.elements() {
                let inner = [f.add(a, b), f.mul(3, b), a];
                assert_eq!(s.eval(&[a, b]), p.eval(&inner));
            }
        }
    }
}
