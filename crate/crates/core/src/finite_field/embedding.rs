use std::collections::HashMap;
use std::sync::Arc;

use super::{make_field, same_field, FieldElement, FieldError, FieldRef};

/// An embedding GF(Q) -> GF(Q^k) fixed by the image of the source modulus root.
#[derive(Debug, Clone)]
pub struct SubfieldEmbedding {
    source: FieldRef,
    target: FieldRef,
    generator_image: u32,
    images: Vec<u32>,
    preimages: HashMap<u32, u32>,
}

impl SubfieldEmbedding {
    pub fn source(&self) -> &FieldRef {
        &self.source
    }

    pub fn target(&self) -> &FieldRef {
        &self.target
    }

    /// Image of the source modulus root.
    pub fn generator_image(&self) -> u32 {
        self.generator_image
    }

    /// Relative degree k.
    pub fn relative_degree(&self) -> u32 {
        self.target.degree() / self.source.degree()
    }

    #[inline]
    pub fn embed(&self, x: u32) -> u32 {
        self.images[x as usize]
    }

    /// Preimage of a target element lying in the embedded subfield.
    pub fn restrict(&self, y: u32) -> Option<u32> {
        self.preimages.get(&y).copied()
    }

    pub fn contains(&self, y: u32) -> bool {
        self.preimages.contains_key(&y)
    }

    /// `y^(Q^i)` in the target.
    pub fn relative_frobenius(&self, y: u32, i: u32) -> u32 {
        let mut out = y;
        for _ in 0..i % self.relative_degree() {
            out = self.target.pow(out, self.source.order());
        }
        out
    }

    pub fn embed_element(&self, x: &FieldElement) -> Result<FieldElement, FieldError> {
        if !same_field(x.field(), &self.source) {
            return Err(FieldError::MixedFields);
        }
        Ok(self.target.element(self.embed(x.value())))
    }
}

/// Builds the embedding whose generator image is the least-index root of the
/// source modulus in the target.
pub fn subfield_embed(src: &FieldRef, tgt: &FieldRef) -> Result<SubfieldEmbedding, FieldError> {
    let not_sub = || FieldError::NotASubfield {
        source_order: src.order(),
        target_order: tgt.order(),
    };
    if src.characteristic() != tgt.characteristic() || !tgt.degree().is_multiple_of(src.degree()) {
        return Err(not_sub());
    }
    let qs = src.order();
    let qt = tgt.order();
    // The subfield of order Qs is {0} together with the powers of h.
    let h = tgt.pow(tgt.generator(), (qt - 1) / (qs - 1));
    let modulus = src.modulus();
    let eval = |x: u32| modulus.iter().rev().fold(0u32, |acc, &c| tgt.add(tgt.mul(acc, x), c));
    let mut root = None;
    let mut y = 1u32;
    for _ in 0..qs - 1 {
        if eval(y) == 0 && root.is_none_or(|r| y < r) {
            root = Some(y);
        }
        y = tgt.mul(y, h);
    }
    let root = root.ok_or_else(not_sub)?;
    let mut powers = Vec::with_capacity(src.degree() as usize);
    let mut acc = 1u32;
    for _ in 0..src.degree() {
        powers.push(acc);
        acc = tgt.mul(acc, root);
    }
    let images: Vec<u32> = src
        .elements()
        .map(|x| {
            src.coefficients(x)
                .iter()
                .zip(&powers)
                .fold(0u32, |s, (&c, &pw)| tgt.add(s, tgt.mul(c, pw)))
        })
        .collect();
    let preimages = images.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    Ok(SubfieldEmbedding {
        source: Arc::clone(src),
        target: Arc::clone(tgt),
        generator_image: root,
        images,
        preimages,
    })
}

/// Trace, norm, multiplicative order and Frobenius orbit of a target element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisData {
    pub trace: FieldElement,
    pub norm: FieldElement,
    pub order: u64,
    pub frobenius_orbit: Vec<FieldElement>,
}

pub fn galois_data(x: &FieldElement, sub: &SubfieldEmbedding) -> Result<GaloisData, FieldError> {
    if !same_field(x.field(), sub.target()) {
        return Err(FieldError::MixedFields);
    }
    let t = sub.target();
    let mut conj = x.value();
    let mut trace = 0u32;
    let mut norm = 1u32;
    let mut orbit: Vec<u32> = Vec::new();
    for _ in 0..sub.relative_degree() {
        trace = t.add(trace, conj);
        norm = t.mul(norm, conj);
        if !orbit.contains(&conj) {
            orbit.push(conj);
        }
        conj = t.pow(conj, sub.source().order());
    }
    let trace = sub.restrict(trace).expect("trace lies in the subfield");
    let norm = sub.restrict(norm).expect("norm lies in the subfield");
    Ok(GaloisData {
        trace: sub.source().element(trace),
        norm: sub.source().element(norm),
        order: x.multiplicative_order(),
        frobenius_orbit: orbit.into_iter().map(|v| t.element(v)).collect(),
    })
}

/// Output of [`find_special_multiplier`].
#[derive(Debug, Clone)]
pub struct SpecialMultiplier {
    pub alpha: FieldElement,
    pub beta: FieldElement,
    /// The quadratic extension GF(q^2) with its embedding of GF(q).
    pub embedding: SubfieldEmbedding,
    /// The chosen square root of 1/t in GF(q^2).
    pub s: u32,
    /// beta + (alpha - 1) s in GF(q^2).
    pub multiplier: u32,
}

/// Scans the affine conic `a^2 - t b^2 = 1` over GF(q), `a` then `b` in index
/// order, for the first point with `b + (a - 1) s` primitive in GF(q^2).
pub fn find_special_multiplier(qfield: &FieldRef, t: &FieldElement) -> Result<SpecialMultiplier, FieldError> {
    if qfield.is_char2() {
        return Err(FieldError::EvenCharacteristic);
    }
    if !same_field(t.field(), qfield) {
        return Err(FieldError::MixedFields);
    }
    let tv = t.value();
    if qfield.is_square(tv) {
        return Err(FieldError::NotANonSquare(qfield.order()));
    }
    let ext = make_field(qfield.characteristic() as u64, 2 * qfield.degree())?;
    let emb = subfield_embed(qfield, &ext)?;
    let t_inv = ext.inv(emb.embed(tv)).expect("t is nonzero");
    let s = ext.sqrt(t_inv).expect("every element of GF(q) is a square in GF(q^2)");
    let f = qfield;
    for a in f.elements() {
        for b in f.elements() {
            if f.sub(f.mul(a, a), f.mul(tv, f.mul(b, b))) != 1 {
                continue;
            }
            let mult = ext.add(emb.embed(b), ext.mul(emb.embed(f.sub(a, 1)), s));
            if ext.is_generator(mult) {
                return Ok(SpecialMultiplier {
                    alpha: f.element(a),
                    beta: f.element(b),
                    embedding: emb,
                    s,
                    multiplier: mult,
                });
            }
        }
    }
    unreachable!("a primitive multiplier exists on every such conic")
}
