//! Cremona maps of the plane realizing odd permutations, obtained by
//! conjugating fiberwise maps of a conic-fibered quadric by the projection
//! from a node of a degenerate fiber.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::finite_field::{find_special_multiplier, make_field, subfield_embed, FieldError, FieldRef};
use crate::linalg;
use crate::permutations::{format_cycle_type, Permutation};
use crate::proj_geometry::{normalize, GeometryError, PointTable};
use crate::rational_maps::{collinearity_witness, induced_from_fn, MapError, Polynomial, RationalMapData};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RealizationError {
    #[error("construction requires odd characteristic")]
    EvenCharacteristic,
    #[error("construction requires characteristic 2")]
    OddCharacteristic,
    #[error("no rational fiber with a single rational point")]
    NoDegenerateRationalFiber,
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("quadric model check failed: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// A quadratic form in four variables, `Σ_{i<=j} c[i][j] x_i x_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticForm {
    pub c: [[u32; 4]; 4],
}

impl QuadraticForm {
    pub fn eval(&self, f: &crate::finite_field::Field, x: &[u32]) -> u32 {
        let mut acc = 0;
        for i in 0..4 {
            for j in i..4 {
                if self.c[i][j] != 0 {
                    acc = f.add(acc, f.mul(self.c[i][j], f.mul(x[i], x[j])));
                }
            }
        }
        acc
    }

    /// `Q(x + y) - Q(x) - Q(y)`.
    pub fn polar(&self, f: &crate::finite_field::Field, x: &[u32], y: &[u32]) -> u32 {
        let mut acc = 0;
        for i in 0..4 {
            for j in i..4 {
                let c = self.c[i][j];
                if c == 0 {
                    continue;
                }
                let term = if i == j {
                    f.mul_int(f.mul(x[i], y[i]), 2)
                } else {
                    f.add(f.mul(x[i], y[j]), f.mul(x[j], y[i]))
                };
                acc = f.add(acc, f.mul(c, term));
            }
        }
        acc
    }

    pub fn partial(&self, f: &crate::finite_field::Field, k: usize, x: &[u32]) -> u32 {
        let mut acc = 0;
        for j in 0..4 {
            let (a, b) = if k <= j { (k, j) } else { (j, k) };
            let c = self.c[a][b];
            if c == 0 {
                continue;
            }
            let term = if j == k { f.mul_int(x[k], 2) } else { x[j] };
            acc = f.add(acc, f.mul(c, term));
        }
        acc
    }

    pub fn to_polynomial(&self, field: &FieldRef) -> Polynomial {
        let mut terms = Vec::new();
        for i in 0..4 {
            for j in i..4 {
                let mut e = vec![0u32; 4];
                e[i] += 1;
                e[j] += 1;
                terms.push((e, self.c[i][j]));
            }
        }
        Polynomial::from_terms(field, 4, &terms)
    }
}

/// Model parameters specific to the characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ModelParams {
    /// `x^2 - t y^2 + z^2 - w^2`.
    Odd { t: u32 },
    /// `x^2 + r xy + s y^2 + z^2 + x(z+w) + y(z+w) + zw`.
    Even { r: u32, s: u32 },
}

/// A smooth quadric in P^3 fibered in conics by `[x:y:z:w] -> [z:w]`.
#[derive(Debug, Clone)]
pub struct QuadricModel {
    pub field: FieldRef,
    pub form: QuadraticForm,
    pub params: ModelParams,
    /// Rational node of a degenerate fiber.
    pub node: [u32; 4],
    /// The projection plane is `{x_i = 0}` for this `i`.
    pub plane_coord: usize,
    /// Rational points of the quadric, canonical, in P^3 table order.
    pub points: Vec<[u32; 4]>,
    /// Rational points of the smooth fiber over `[0:1]` (`z = 0`).
    pub c0_points: Vec<[u32; 4]>,
}

fn to4(p: &[u32]) -> [u32; 4] {
    [p[0], p[1], p[2], p[3]]
}

impl QuadricModel {
    fn from_form(field: &FieldRef, form: QuadraticForm, params: ModelParams) -> Result<QuadricModel, RealizationError> {
        let f = field;
        let p3 = PointTable::new(3, f)?;
        let points: Vec<[u32; 4]> = p3.iter().filter(|x| form.eval(f, x) == 0).map(to4).collect();
        let c0_points: Vec<[u32; 4]> = points.iter().filter(|x| x[2] == 0).copied().collect();
        // Fibers over rational base points; keep those with one rational point.
        let p1 = PointTable::new(1, f)?;
        let mut nodes: Vec<[u32; 4]> = Vec::new();
        for b in p1.iter() {
            let fiber: Vec<&[u32; 4]> = points
                .iter()
                .filter(|x| f.sub(f.mul(x[2], b[1]), f.mul(x[3], b[0])) == 0)
                .collect();
            if fiber.len() == 1 {
                nodes.push(*fiber[0]);
            }
        }
        let node = nodes
            .into_iter()
            .min_by_key(|p| p3.index_of(p).expect("canonical"))
            .ok_or(RealizationError::NoDegenerateRationalFiber)?;
        let plane_coord = node.iter().position(|&c| c != 0).expect("nonzero point");
        let model = QuadricModel { field: f.clone(), form, params, node, plane_coord, points, c0_points };
        model.verify()?;
        Ok(model)
    }

    /// Checks the structural invariants of the model.
    pub fn verify(&self) -> Result<(), RealizationError> {
        let f = &self.field;
        let q = f.order() as usize;
        let bad = |m: &str| Err(RealizationError::InvalidModel(m.to_string()));
        let p3 = PointTable::new(3, f)?;
        for x in p3.iter() {
            let grad_zero = (0..4).all(|k| self.form.partial(f, k, x) == 0);
            if grad_zero && (!f.is_char2() || self.form.eval(f, x) == 0) {
                return bad("rational singular point");
            }
        }
        if self.form.eval(f, &self.node) != 0 {
            return bad("node is not on the quadric");
        }
        if self.c0_points.len() != q + 1 {
            return bad("smooth fiber does not have q+1 points");
        }
        // C0 as a plane conic in (x, y, w) must be smooth: no rational singular
        // point over the algebraic closure is tested via the half-discriminant.
        let c = &self.form.c;
        let (a, b, cc, d, e, g) = (c[0][0], c[1][1], c[3][3], c[0][1], c[0][3], c[1][3]);
        let disc = [
            f.mul_int(f.mul(a, f.mul(b, cc)), 4),
            f.mul(d, f.mul(e, g)),
            f.neg(f.mul(a, f.mul(g, g))),
            f.neg(f.mul(b, f.mul(e, e))),
            f.neg(f.mul(cc, f.mul(d, d))),
        ]
        .iter()
        .fold(0, |s, &x| f.add(s, x));
        if disc == 0 {
            return bad("smooth fiber is singular");
        }
        // The line z = w = 0 has no rational point on the quadric.
        if self.points.iter().any(|x| x[2] == 0 && x[3] == 0) {
            return bad("the line z = w = 0 meets the quadric rationally");
        }
        Ok(())
    }

    pub fn polynomial(&self) -> Polynomial {
        self.form.to_polynomial(&self.field)
    }

    /// Projection from the node onto the plane `{x_i = 0}`, in the remaining coordinates.
    pub fn forward(&self, x: &[u32]) -> Vec<u32> {
        let f = &self.field;
        let i = self.plane_coord;
        let (xi, pi) = (x[i], self.node[i]);
        let mut out: Vec<u32> = (0..4)
            .filter(|&k| k != i)
            .map(|k| f.sub(f.mul(xi, self.node[k]), f.mul(pi, x[k])))
            .collect();
        normalize(f, &mut out);
        out
    }

    /// Second intersection of the line through the node and `y` with the
    /// quadric; `None` when the line is tangent at the node.
    pub fn backward(&self, y: &[u32]) -> Option<[u32; 4]> {
        let f = &self.field;
        let yy = self.lift(y);
        let b = self.form.polar(f, &self.node, &yy);
        if b == 0 {
            return None;
        }
        let qy = self.form.eval(f, &yy);
        let mut x: Vec<u32> = (0..4)
            .map(|k| f.sub(f.mul(qy, self.node[k]), f.mul(b, yy[k])))
            .collect();
        normalize(f, &mut x);
        Some(to4(&x))
    }

    /// Plane coordinates to P^3 coordinates with `x_i = 0`.
    pub fn lift(&self, y: &[u32]) -> [u32; 4] {
        let mut out = [0u32; 4];
        let mut it = y.iter();
        for (k, slot) in out.iter_mut().enumerate() {
            if k != self.plane_coord {
                *slot = *it.next().expect("three plane coordinates");
            }
        }
        out
    }

    /// Closed-form inverse projection `[2ux : 2uy : x^2-ty^2-u^2 : x^2-ty^2+u^2]`
    /// of the odd-characteristic model; `None` at tangent directions.
    pub fn backward_closed_form(&self, y: &[u32]) -> Option<[u32; 4]> {
        let ModelParams::Odd { t } = self.params else { return None };
        let f = &self.field;
        let (x, yv, u) = (y[0], y[1], y[2]);
        let n = f.sub(f.mul(x, x), f.mul(t, f.mul(yv, yv)));
        let uu = f.mul(u, u);
        let mut v = vec![f.mul_int(f.mul(u, x), 2), f.mul_int(f.mul(u, yv), 2), f.sub(n, uu), f.add(n, uu)];
        normalize(f, &mut v);
        if v == [0, 0, 1, 1] && u == 0 {
            return None;
        }
        Some(to4(&v))
    }
}

pub fn build_quadric_odd(field: &FieldRef) -> Result<QuadricModel, RealizationError> {
    let f = field;
    if f.is_char2() {
        return Err(RealizationError::EvenCharacteristic);
    }
    let t = f.first_nonsquare().expect("odd fields have nonsquares");
    let minus1 = f.neg(1);
    let mut c = [[0u32; 4]; 4];
    c[0][0] = 1;
    c[1][1] = f.neg(t);
    c[2][2] = 1;
    c[3][3] = minus1;
    let model = QuadricModel::from_form(f, QuadraticForm { c }, ModelParams::Odd { t })?;
    debug_assert_eq!(model.node, [0, 0, 1, 1]);
    Ok(model)
}

/// Characteristic-2 model with `s = 1` and the least `r` making `X^2 + rX + 1` rootless.
pub fn build_quadric_char2(field: &FieldRef) -> Result<QuadricModel, RealizationError> {
    let f = field;
    if !f.is_char2() {
        return Err(RealizationError::OddCharacteristic);
    }
    let s = 1;
    let r = f
        .elements()
        .find(|&r| f.elements().all(|x| f.add(f.add(f.mul(x, x), f.mul(r, x)), s) != 0))
        .ok_or_else(|| RealizationError::InvalidParameters("no rootless X^2+rX+1".into()))?;
    let mut c = [[0u32; 4]; 4];
    c[0][0] = 1;
    c[0][1] = r;
    c[1][1] = s;
    c[2][2] = 1;
    c[0][2] = 1;
    c[0][3] = 1;
    c[1][2] = 1;
    c[1][3] = 1;
    c[2][3] = 1;
    QuadricModel::from_form(f, QuadraticForm { c }, ModelParams::Even { r, s })
}

/// A fiber-preserving self-map of the quadric's rational points that acts on
/// the fiber over `[0:1]` and fixes every other rational fiber pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FiberMap {
    /// `[x:y:0:w] -> [αx + tβy : βx + αy : 0 : w]`.
    Rotation { alpha: u32, beta: u32 },
    /// `[x:y:0:w] -> [y:x:0:w]`.
    Swap,
}

impl FiberMap {
    pub fn apply(&self, model: &QuadricModel, x: &[u32; 4]) -> [u32; 4] {
        if x[2] != 0 {
            return *x;
        }
        let f = &model.field;
        let mut v = match *self {
            FiberMap::Rotation { alpha, beta } => {
                let ModelParams::Odd { t } = model.params else { unreachable!("rotation needs t") };
                vec![
                    f.add(f.mul(alpha, x[0]), f.mul(t, f.mul(beta, x[1]))),
                    f.add(f.mul(beta, x[0]), f.mul(alpha, x[1])),
                    0,
                    x[3],
                ]
            }
            FiberMap::Swap => vec![x[1], x[0], 0, x[3]],
        };
        normalize(f, &mut v);
        to4(&v)
    }
}

/// The rotation on the fiber over `[0:1]`; identity elsewhere.
pub fn fiberwise_extension(model: &QuadricModel, alpha0: u32, beta0: u32) -> Result<FiberMap, RealizationError> {
    let ModelParams::Odd { t } = model.params else {
        return Err(RealizationError::EvenCharacteristic);
    };
    let f = &model.field;
    if f.sub(f.mul(alpha0, alpha0), f.mul(t, f.mul(beta0, beta0))) != 1 {
        return Err(RealizationError::InvalidParameters("alpha^2 - t beta^2 != 1".into()));
    }
    Ok(FiberMap::Rotation { alpha: alpha0, beta: beta0 })
}

/// Permutation of the quadric's rational points induced by a fiber map.
pub fn quadric_permutation(model: &QuadricModel, g: &FiberMap) -> Permutation {
    let index: std::collections::HashMap<[u32; 4], usize> =
        model.points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let img = model.points.iter().map(|p| index[&g.apply(model, p)] as u32).collect();
    Permutation::new(img).expect("fiber maps permute the quadric")
}

/// `forward ∘ g ∘ backward` as a pointwise map of the plane.
pub fn descend(model: &QuadricModel, g: &FiberMap, y: &[u32]) -> Vec<u32> {
    match model.backward(y) {
        None => {
            let mut v = y.to_vec();
            normalize(&model.field, &mut v);
            v
        }
        Some(x) => model.forward(&g.apply(model, &x)),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RealizationReport {
    pub q: u64,
    pub params: ModelParams,
    pub node: [u32; 4],
    pub fiber_map: FiberMap,
    pub bijective: bool,
    pub sign: i8,
    pub fixed_points: usize,
    pub cycle_type: BTreeMap<usize, usize>,
    pub cycle_type_text: String,
    /// Cycle lengths of the permutation on the projected smooth fiber.
    pub c0_cycle_lengths: Vec<usize>,
    /// Parity of the fiber map on the quadric's rational points.
    pub quadric_parity: i8,
    pub collinearity_witness: Option<[[u32; 3]; 3]>,
    pub violations: Vec<String>,
    #[serde(skip)]
    pub permutation: Option<Permutation>,
}

/// Builds the realization map for any prime power and checks its contracts.
pub fn build_realization(field: &FieldRef) -> Result<RealizationReport, RealizationError> {
    let f = field;
    let (model, g) = if f.is_char2() {
        (build_quadric_char2(f)?, FiberMap::Swap)
    } else {
        let model = build_quadric_odd(f)?;
        let ModelParams::Odd { t } = model.params else { unreachable!() };
        let sm = find_special_multiplier(f, &f.element(t))?;
        let g = fiberwise_extension(&model, sm.alpha.value(), sm.beta.value())?;
        (model, g)
    };
    let table = PointTable::new(2, f)?;
    let report = induced_from_fn(&table, |y| Some(descend(&model, &g, y)))?;
    let mut violations = Vec::new();
    let quadric_parity = quadric_permutation(&model, &g).sign();
    let c0_image: Vec<usize> = model
        .c0_points
        .iter()
        .map(|x| table.lookup(&model.forward(x)).expect("projection lands in the plane"))
        .collect();
    let Some(perm) = report.permutation.clone() else {
        violations.push("induced map is not a bijection of the plane".to_string());
        return Ok(RealizationReport {
            q: f.order(),
            params: model.params,
            node: model.node,
            fiber_map: g,
            bijective: false,
            sign: 0,
            fixed_points: 0,
            cycle_type: BTreeMap::new(),
            cycle_type_text: String::new(),
            c0_cycle_lengths: Vec::new(),
            quadric_parity,
            collinearity_witness: None,
            violations,
            permutation: None,
        });
    };
    let cycle_type = perm.cycle_type();
    let c0_cycle_lengths: Vec<usize> = perm
        .cycles()
        .into_iter()
        .filter(|c| c0_image.contains(&c[0]))
        .map(|c| c.len())
        .collect();
    let witness = collinearity_witness(&perm, &table)
        .map(|w| w.map(|i| [table.point(i)[0], table.point(i)[1], table.point(i)[2]]));
    let q = f.order() as usize;
    let fixed = perm.fixed_points();
    if witness.is_none() {
        violations.push("no collinearity witness".to_string());
    }
    if !f.is_char2() {
        if perm.sign() != -1 {
            violations.push("sign is not -1".to_string());
        }
        if fixed.len() != q * q || fixed.iter().any(|i| c0_image.contains(i)) {
            violations.push("points off the smooth fiber are not all fixed".to_string());
        }
        if c0_cycle_lengths != vec![q + 1] {
            violations.push("smooth fiber is not a single (q+1)-cycle".to_string());
        }
    } else if q == 2 && perm.sign() != -1 {
        violations.push("sign is not -1 over GF(2)".to_string());
    }
    Ok(RealizationReport {
        q: f.order(),
        params: model.params,
        node: model.node,
        fiber_map: g,
        bijective: true,
        sign: perm.sign(),
        fixed_points: fixed.len(),
        cycle_type_text: format_cycle_type(&cycle_type),
        cycle_type,
        c0_cycle_lengths,
        quadric_parity,
        collinearity_witness: witness,
        violations,
        permutation: Some(perm),
    })
}

/// Checks that the rotation of `x^2 - t y^2 = w^2`, read through the
/// stereographic coordinate `ζ = y / (w + x)`, is multiplication by
/// `β + (α - 1) s` on GF(q^2) with `s^2 = 1/t`, at every rational point.
pub fn multiplier_action_check(field: &FieldRef, alpha: u32, beta: u32) -> Result<bool, RealizationError> {
    let f = field;
    if f.is_char2() {
        return Err(RealizationError::EvenCharacteristic);
    }
    let t = f.first_nonsquare().expect("odd");
    if alpha == 1 || f.sub(f.mul(alpha, alpha), f.mul(t, f.mul(beta, beta))) != 1 {
        return Err(RealizationError::InvalidParameters(
            "need alpha^2 - t beta^2 = 1 and alpha != 1".into(),
        ));
    }
    let ext = make_field(f.characteristic() as u64, 2 * f.degree())?;
    let emb = subfield_embed(f, &ext)?;
    let s = ext.sqrt(ext.inv(emb.embed(t)).expect("t != 0")).expect("square in GF(q^2)");
    let mult = ext.add(emb.embed(beta), ext.mul(emb.embed(f.sub(alpha, 1)), s));
    // ζ = [a:b] corresponds to a + b s.
    let theta = |p: &[u32; 3]| {
        let (x, y, w) = (p[0], p[1], p[2]);
        let (a, b) = if y == 0 && f.add(w, x) == 0 {
            (f.sub(x, w), f.mul(t, y))
        } else {
            (y, f.add(w, x))
        };
        ext.add(emb.embed(a), ext.mul(emb.embed(b), s))
    };
    let table = PointTable::new(2, f)?;
    for p in table.iter() {
        let (x, y, w) = (p[0], p[1], p[2]);
        if f.sub(f.mul(x, x), f.mul(t, f.mul(y, y))) != f.mul(w, w) {
            continue;
        }
        let img = [
            f.add(f.mul(alpha, x), f.mul(t, f.mul(beta, y))),
            f.add(f.mul(beta, x), f.mul(alpha, y)),
            w,
        ];
        let lhs = theta(&img);
        let rhs = ext.mul(mult, theta(&[x, y, w]));
        let ratio = ext.div(rhs, lhs).expect("nonzero");
        if !emb.contains(ratio) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `x_0^{q-1} Π_{i>=1} (x_0^{q-1} - x_i^{q-1})`, the indicator of `[1:0:...:0]`.
fn indicator_at_origin(field: &FieldRef, nvars: usize, vars: &[Polynomial]) -> Polynomial {
    let e = (field.order() - 1) as u32;
    let x0 = vars[0].pow(e);
    let mut out = x0.clone();
    for v in &vars[1..] {
        out = out.mul(&x0.sub(&v.pow(e)));
    }
    debug_assert_eq!(out.nvars(), nvars);
    out
}

/// Indicator polynomial of a rational point `p0` of P^n on rational points.
pub fn point_indicator(field: &FieldRef, p0: &[u32]) -> Polynomial {
    let n1 = p0.len();
    let f = field;
    let lead = p0.iter().position(|&c| c != 0).expect("nonzero point");
    // Columns of M^{-1}: p0, then e_j for j != lead; M p0 = e_0.
    let mut minv = vec![vec![0u32; n1]; n1];
    for (r, row) in minv.iter_mut().enumerate() {
        row[0] = p0[r];
    }
    let mut col = 1;
    for j in (0..n1).filter(|&j| j != lead) {
        minv[j][col] = 1;
        col += 1;
    }
    let m = linalg::inverse(f, &minv).expect("p0 and the other unit vectors form a basis");
    let vars: Vec<Polynomial> = m
        .iter()
        .map(|row| {
            let terms: Vec<(Vec<u32>, u32)> = row
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let mut e = vec![0; n1];
                    e[k] = 1;
                    (e, c)
                })
                .collect();
            Polynomial::from_terms(f, n1, &terms)
        })
        .collect();
    indicator_at_origin(f, n1, &vars)
}

/// A map P^n --> P^1 sending `p0` to `p1` and every other rational point to `p2`.
pub fn interpolation_map(
    n: usize,
    field: &FieldRef,
    p0: &[u32],
    p1: &[u32],
    p2: &[u32],
) -> Result<RationalMapData, RealizationError> {
    let f = field;
    if p0.len() != n + 1 || p1.len() != 2 || p2.len() != 2 {
        return Err(RealizationError::InvalidParameters("point dimensions".into()));
    }
    let table = PointTable::new(n, f)?;
    let f0 = point_indicator(f, p0);
    let mut total = Polynomial::zero(f, n + 1);
    for p in table.iter() {
        total = total.add(&point_indicator(f, p));
    }
    let (a, b) = (p1[0], p1[1]);
    let (c, d) = (p2[0], p2[1]);
    let h0 = total.scale(c).add(&f0.scale(f.sub(a, c)));
    let h1 = total.scale(d).add(&f0.scale(f.sub(b, d)));
    Ok(RationalMapData::new("interpolation", vec![h0, h1])?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::make_field_q;

    #[test]
    fn odd_models() {
        for q in [3u64, 5, 7, 9] {
            let f = make_field_q(q).unwrap();
            let m = build_quadric_odd(&f).unwrap();
            assert_eq!(m.node, [0, 0, 1, 1]);
            assert_eq!(m.plane_coord, 2);
            assert_eq!(m.points.len() as u64, q * q + 1, "elliptic quadric");
        }
        let f3 = make_field_q(3).unwrap();
        let m = build_quadric_odd(&f3).unwrap();
        assert_eq!(m.params, ModelParams::Odd { t: 2 });
        assert_eq!(m.c0_points.len(), 4);
        let f4 = make_field_q(4).unwrap();
        assert_eq!(build_quadric_odd(&f4).unwrap_err(), RealizationError::EvenCharacteristic);
    }

    #[test]
    fn char2_model_over_gf2() {
        let f = make_field_q(2).unwrap();
        let m = build_quadric_char2(&f).unwrap();
        assert_eq!(m.params, ModelParams::Even { r: 1, s: 1 });
        let c0: Vec<[u32; 3]> = m.c0_points.iter().map(|p| [p[0], p[1], p[3]]).collect();
        let mut want = vec![[0, 0, 1], [1, 0, 1], [0, 1, 1]];
        want.sort();
        let mut got = c0.clone();
        got.sort();
        assert_eq!(got, want);
        // Degenerate fibers over [1:0] and [1:1] with single rational points.
        let over = |z: u32, w: u32| -> Vec<[u32; 4]> {
            m.points
                .iter()
                .filter(|p| f.mul(p[2], w) == f.mul(p[3], z))
                .copied()
                .collect()
        };
        assert_eq!(over(1, 0), vec![[1, 1, 1, 0]]);
        assert_eq!(over(1, 1), vec![[0, 0, 1, 1]]);
        assert_eq!(m.node, [1, 1, 1, 0]);
        let f3 = make_field_q(3).unwrap();
        assert_eq!(build_quadric_char2(&f3).unwrap_err(), RealizationError::OddCharacteristic);
    }

    #[test]
    fn char2_models_are_valid() {
        for q in [4u64, 8, 16] {
            let f = make_field_q(q).unwrap();
            let m = build_quadric_char2(&f).unwrap();
            assert_eq!(m.points.len() as u64, q * q + 1);
        }
    }

    #[test]
    fn projection_roundtrip_and_closed_forms() {
        for q in [3u64, 5, 4, 2] {
            let f = make_field_q(q).unwrap();
            let m = if f.is_char2() { build_quadric_char2(&f) } else { build_quadric_odd(&f) }.unwrap();
            let plane = PointTable::new(2, &f).unwrap();
            let mut tangent = 0;
            for y in plane.iter() {
                match m.backward(y) {
                    Some(x) => {
                        assert_eq!(m.form.eval(&f, &x), 0);
                        assert_eq!(m.forward(&x), y.to_vec());
                    }
                    None => tangent += 1,
                }
                if !f.is_char2() {
                    assert_eq!(m.backward_closed_form(y), m.backward(y));
                    if let Some(x) = m.backward(y) {
                        // pi_P = [x : y : w - z]
                        let mut v = vec![x[0], x[1], f.sub(x[3], x[2])];
                        normalize(&f, &mut v);
                        assert_eq!(v, y.to_vec());
                    }
                }
            }
            assert_eq!(tangent, q as usize + 1);
        }
        let f = make_field_q(5).unwrap();
        let m = build_quadric_odd(&f).unwrap();
        assert_eq!(m.backward_closed_form(&[1, 0, 0]), None);
        // Points of C0 lie in the projection plane and are their own preimages.
        for x in &m.c0_points {
            let y = [x[0], x[1], x[3]];
            assert_eq!(m.backward(&y), Some(*x));
        }
    }

    #[test]
    fn realization_odd_q5() {
        let f = make_field_q(5).unwrap();
        let r = build_realization(&f).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_eq!(r.sign, -1);
        assert_eq!(r.fixed_points, 25);
        assert_eq!(r.cycle_type, BTreeMap::from([(1, 25), (6, 1)]));
    }

    #[test]
    fn realization_gf2_is_one_transposition() {
        let f = make_field_q(2).unwrap();
        let r = build_realization(&f).unwrap();
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert_eq!(r.cycle_type, BTreeMap::from([(1, 5), (2, 1)]));
        assert!(r.collinearity_witness.is_some());
    }

    #[test]
    fn identity_rotation_fixes_the_quadric() {
        let f = make_field_q(7).unwrap();
        let m = build_quadric_odd(&f).unwrap();
        let g = fiberwise_extension(&m, 1, 0).unwrap();
        assert!(quadric_permutation(&m, &g).is_identity());
        assert!(matches!(fiberwise_extension(&m, 2, 0), Err(RealizationError::InvalidParameters(_))));
    }

    #[test]
    fn interpolation_small() {
        let f = make_field_q(3).unwrap();
        let h = interpolation_map(1, &f, &[0, 1], &[1, 1], &[0, 1]).unwrap();
        let t = PointTable::new(1, &f).unwrap();
        for p in t.iter() {
            let want: &[u32] = if p == [0, 1] { &[1, 1] } else { &[0, 1] };
            assert_eq!(h.evaluate(p).unwrap(), crate::rational_maps::Evaluation::Point(want.to_vec()));
        }
    }

    #[test]
    fn multiplier_check_q3() {
        let f = make_field_q(3).unwrap();
        let t = 2;
        let mut checked = 0;
        for a in f.elements() {
            for b in f.elements() {
                if a != 1 && f.sub(f.mul(a, a), f.mul(t, f.mul(b, b))) == 1 {
                    assert!(multiplier_action_check(&f, a, b).unwrap());
                    checked += 1;
                }
            }
        }
        assert_eq!(checked, 3);
        assert!(multiplier_action_check(&f, 1, 0).is_err());
    }
}
