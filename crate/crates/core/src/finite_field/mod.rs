//! Exact arithmetic in GF(p^m).
//!
//! A [`Field`] fixes a monic irreducible modulus over the prime field and
//! represents every element by its index `c_0 + c_1 p + ... + c_{m-1} p^{m-1}`,
//! where `c_i` are the power-basis coefficients of the element in terms of a
//! root of the modulus. Index order is the canonical element enumeration used
//! throughout the crate: `0` is zero, `1` is one, and prime-field constants
//! keep their integer value in every extension.
//!
//! Hot loops work on raw `u32` indices through the [`Field`] methods;
//! [`FieldElement`] is the owner-tagged value type for checked, mixed-field
//! safe arithmetic.

mod conway;
mod embedding;
pub(crate) mod gfp_poly;

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

pub use embedding::{find_special_multiplier, galois_data, subfield_embed, GaloisData, SubfieldEmbedding};

/// Fields up to this cardinality get exp/log tables.
const TABLE_LIMIT: u64 = 1 << 20;
/// Odd-characteristic extension fields up to this cardinality get an addition table.
const ADD_TABLE_LIMIT: u64 = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("characteristic {0} is not prime")]
    NonPrimeCharacteristic(u64),
    #[error("GF({p}^{m}) exceeds the supported size of 2^32 elements")]
    UnsupportedSize { p: u64, m: u32 },
    #[error("extension degree must be at least 1")]
    InvalidDegree,
    #[error("modulus is not a monic irreducible polynomial of the requested degree")]
    ReducibleModulus,
    #[error("division by zero")]
    DivisionByZero,
    #[error("operands belong to different fields")]
    MixedFields,
    #[error("GF({source_order}) is not a subfield of GF({target_order})")]
    NotASubfield { source_order: u64, target_order: u64 },
    #[error("operation requires odd characteristic")]
    EvenCharacteristic,
    #[error("element is a square in GF({0})")]
    NotANonSquare(u64),
    #[error("{0} is not a prime power")]
    NotAPrimePower(u64),
}

pub type FieldRef = Arc<Field>;

enum MulRepr {
    Tables { exp: Vec<u32>, log: Vec<u32> },
    Direct,
}

/// A finite field GF(p^m) with a fixed modulus.
pub struct Field {
    p: u32,
    m: u32,
    order: u64,
    modulus: Vec<u32>,
    modulus_bits: u64,
    factored_order: Vec<(u64, u32)>,
    generator: u32,
    mul_repr: MulRepr,
    add_table: Option<Vec<u32>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.modulus == other.modulus
    }
}

impl Eq for Field {}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime factorization by trial division, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub(crate) fn prime_factors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// Splits `q` into `(p, m)` with `q = p^m`.
pub fn prime_power(q: u64) -> Result<(u32, u32), FieldError> {
    let f = factorize(q);
    match f.as_slice() {
        [(p, m)] if *p <= u32::MAX as u64 => Ok((*p as u32, *m)),
        _ => Err(FieldError::NotAPrimePower(q)),
    }
}

fn checked_order(p: u64, m: u32) -> Result<u64, FieldError> {
    let mut q: u64 = 1;
    for _ in 0..m {
        q = q.checked_mul(p).ok_or(FieldError::UnsupportedSize { p, m })?;
        if q > 1 << 32 {
            return Err(FieldError::UnsupportedSize { p, m });
        }
    }
    Ok(q)
}

/// Builds GF(p^m) with the standard modulus.
///
/// Conway polynomials are used where tabulated (p in {2, 3, 5, 7}); otherwise
/// the lexicographically smallest monic irreducible of degree `m`, comparing
/// coefficients from `x^{m-1}` down to the constant term.
pub fn make_field(p: u64, m: u32) -> Result<FieldRef, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NonPrimeCharacteristic(p));
    }
    if m == 0 {
        return Err(FieldError::InvalidDegree);
    }
    let order = checked_order(p, m)?;
    let p32 = p as u32;
    let modulus = match conway::lookup(p32, m) {
        Some(c) => c.to_vec(),
        None if m == 1 => {
            let g = least_primitive_root(p);
            vec![(p - g) as u32 % p32, 1]
        }
        None => smallest_irreducible(p32, m),
    };
    debug_assert_eq!(order, p.pow(m));
    Field::with_modulus(p32, modulus).map(Arc::new)
}

/// Builds GF(q) for a prime power `q`.
pub fn make_field_q(q: u64) -> Result<FieldRef, FieldError> {
    let (p, m) = prime_power(q)?;
    make_field(p as u64, m)
}

fn least_primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let primes = prime_factors(p - 1);
    (2..p)
        .find(|&g| primes.iter().all(|&l| gfp_poly::pow_mod(g, (p - 1) / l, p) != 1))
        .expect("every prime has a primitive root")
}

fn smallest_irreducible(p: u32, m: u32) -> Vec<u32> {
    let total = (p as u64).pow(m);
    // Coefficient c_{m-1} is the most significant digit of the counter.
    for idx in 0..total {
        let mut f = Vec::with_capacity(m as usize + 1);
        let mut r = idx;
        for _ in 0..m {
            f.push((r % p as u64) as u32);
            r /= p as u64;
        }
        f.push(1);
        if gfp_poly::is_irreducible(&f, p) {
            return f;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

fn clmul_reduce(a: u32, b: u32, m: u32, modulus_bits: u64) -> u32 {
    let mut acc: u64 = 0;
    let a = a as u64;
    let mut b = b;
    let mut shift = 0;
    while b != 0 {
        if b & 1 == 1 {
            acc ^= a << shift;
        }
        b >>= 1;
        shift += 1;
    }
    if m == 0 {
        return acc as u32;
    }
    let mut bit = 2 * m as i64 - 2;
    while bit >= m as i64 {
        if acc >> bit & 1 == 1 {
            acc ^= modulus_bits << (bit as u32 - m);
        }
        bit -= 1;
    }
    acc as u32
}

impl Field {
    /// Builds a field from an explicit monic modulus (constant term first).
    pub fn with_modulus(p: u32, modulus: Vec<u32>) -> Result<Field, FieldError> {
        if !is_prime(p as u64) {
            return Err(FieldError::NonPrimeCharacteristic(p as u64));
        }
        let Some(deg) = gfp_poly::degree(&modulus) else {
            return Err(FieldError::InvalidDegree);
        };
        if deg == 0 {
            return Err(FieldError::InvalidDegree);
        }
        let m = deg as u32;
        if modulus[deg] != 1 || modulus.iter().any(|&c| c >= p) {
            return Err(FieldError::ReducibleModulus);
        }
        let order = checked_order(p as u64, m)?;
        if !gfp_poly::is_irreducible(&modulus, p) {
            return Err(FieldError::ReducibleModulus);
        }
        let modulus_bits = if p == 2 {
            modulus.iter().enumerate().fold(0u64, |acc, (i, &c)| acc | (c as u64) << i)
        } else {
            0
        };
        let factored_order = factorize(order - 1);
        debug_assert_eq!(
            factored_order.iter().map(|&(l, e)| l.pow(e)).product::<u64>(),
            order - 1
        );
        let mut field = Field {
            p,
            m,
            order,
            modulus,
            modulus_bits,
            factored_order,
            generator: 1,
            mul_repr: MulRepr::Direct,
            add_table: None,
        };
        if p != 2 && m > 1 && order <= ADD_TABLE_LIMIT {
            let q = order as u32;
            let mut table = vec![0u32; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    table[(a * q + b) as usize] = field.add_digits(a, b);
                }
            }
            field.add_table = Some(table);
        }
        field.generator = (1..=(order - 1) as u32)
            .find(|&g| field.is_generator(g))
            .expect("multiplicative group is cyclic");
        if order <= TABLE_LIMIT {
            let q = order as usize;
            let mut exp = vec![0u32; 2 * (q - 1)];
            let mut log = vec![0u32; q];
            let mut x = 1u32;
            for i in 0..q - 1 {
                exp[i] = x;
                exp[i + q - 1] = x;
                log[x as usize] = i as u32;
                x = field.mul_direct(x, field.generator);
            }
            field.mul_repr = MulRepr::Tables { exp, log };
        }
        Ok(field)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.m
    }

    /// Number of elements Q = p^m.
    pub fn order(&self) -> u64 {
        self.order
    }

    /// Cardinality as a `usize`, for sizing tables.
    pub fn size(&self) -> usize {
        self.order as usize
    }

    /// Modulus coefficients, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Prime factorization of Q - 1.
    pub fn factored_order(&self) -> &[(u64, u32)] {
        &self.factored_order
    }

    /// The least element (in index order) generating the multiplicative group.
    pub fn generator(&self) -> u32 {
        self.generator
    }

    pub fn is_char2(&self) -> bool {
        self.p == 2
    }

    pub fn elements(&self) -> std::ops::RangeInclusive<u32> {
        0..=(self.order - 1) as u32
    }

    pub fn nonzero(&self) -> std::ops::RangeInclusive<u32> {
        1..=(self.order - 1) as u32
    }

    /// Power-basis coefficients of an element.
    pub fn coefficients(&self, a: u32) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.m as usize);
        let mut r = a;
        for _ in 0..self.m {
            out.push(r % self.p);
            r /= self.p;
        }
        out
    }

    pub fn from_coefficients(&self, coeffs: &[u32]) -> u32 {
        coeffs.iter().rev().fold(0u32, |acc, &c| acc * self.p + c % self.p)
    }

    fn add_digits(&self, a: u32, b: u32) -> u32 {
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for i in 0..self.m {
            let s = (a % self.p + b % self.p) % self.p;
            out += s * place;
            a /= self.p;
            b /= self.p;
            if i + 1 < self.m {
                place *= self.p;
            }
        }
        out
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            a ^ b
        } else if self.m == 1 {
            ((a as u64 + b as u64) % self.p as u64) as u32
        } else if let Some(t) = &self.add_table {
            t[(a as u64 * self.order + b as u64) as usize]
        } else {
            self.add_digits(a, b)
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        if self.p == 2 || a == 0 {
            return a;
        }
        if self.m == 1 {
            return self.p - a;
        }
        let coeffs: Vec<u32> = self.coefficients(a).iter().map(|&c| (self.p - c) % self.p).collect();
        self.from_coefficients(&coeffs)
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    fn mul_direct(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.p == 2 {
            return clmul_reduce(a, b, self.m, self.modulus_bits);
        }
        if self.m == 1 {
            return ((a as u64 * b as u64) % self.p as u64) as u32;
        }
        let prod = gfp_poly::mul(&self.coefficients(a), &self.coefficients(b), self.p);
        let r = gfp_poly::rem(&prod, &self.modulus, self.p);
        self.from_coefficients(&r)
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.mul_repr {
            MulRepr::Tables { exp, log } => {
                if a == 0 || b == 0 {
                    0
                } else {
                    exp[(log[a as usize] + log[b as usize]) as usize]
                }
            }
            MulRepr::Direct => self.mul_direct(a, b),
        }
    }

    /// Multiplies by the integer `k` reduced into the prime field.
    pub fn mul_int(&self, a: u32, k: u64) -> u32 {
        self.mul(a, (k % self.p as u64) as u32)
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        if let MulRepr::Tables { exp, log } = &self.mul_repr {
            let n = self.order - 1;
            let k = (log[a as usize] as u64 * (e % n)) % n;
            return exp[k as usize];
        }
        let mut acc = 1u32;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Power with a signed exponent; `None` for a negative power of zero.
    pub fn pow_signed(&self, a: u32, e: i64) -> Option<u32> {
        if e >= 0 {
            Some(self.pow(a, e as u64))
        } else {
            self.inv(a).map(|b| self.pow(b, e.unsigned_abs()))
        }
    }

    pub fn inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        if let MulRepr::Tables { exp, log } = &self.mul_repr {
            let n = (self.order - 1) as u32;
            return Some(exp[((n - log[a as usize]) % n) as usize]);
        }
        Some(self.pow(a, self.order - 2))
    }

    pub fn div(&self, a: u32, b: u32) -> Option<u32> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// `a^(p^k)`, the k-th power of the absolute Frobenius.
    pub fn frobenius(&self, a: u32, k: u32) -> u32 {
        let e = (self.p as u64).pow(k % self.m);
        self.pow(a, e)
    }

    /// Multiplicative order of `a`, or 0 for zero.
    pub fn multiplicative_order(&self, a: u32) -> u64 {
        if a == 0 {
            return 0;
        }
        let mut ord = self.order - 1;
        for &(l, e) in &self.factored_order {
            for _ in 0..e {
                if self.pow(a, ord / l) == 1 {
                    ord /= l;
                } else {
                    break;
                }
            }
        }
        ord
    }

    pub fn is_generator(&self, a: u32) -> bool {
        a != 0
            && self
                .factored_order
                .iter()
                .all(|&(l, _)| self.pow(a, (self.order - 1) / l) != 1)
    }

    pub fn is_square(&self, a: u32) -> bool {
        a == 0 || self.p == 2 || self.pow(a, (self.order - 1) / 2) == 1
    }

    /// A square root, choosing the one with the smaller index.
    pub fn sqrt(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return Some(0);
        }
        if self.p == 2 {
            return Some(self.pow(a, self.order / 2));
        }
        if !self.is_square(a) {
            return None;
        }
        // Tonelli-Shanks on Q - 1 = 2^s * t.
        let mut t = self.order - 1;
        let mut s = 0;
        while t.is_multiple_of(2) {
            t /= 2;
            s += 1;
        }
        let z = self.nonzero().find(|&z| !self.is_square(z))?;
        let mut c = self.pow(z, t);
        let mut x = self.pow(a, t.div_ceil(2));
        let mut b = self.pow(a, t);
        let mut r = s;
        while b != 1 {
            let mut i = 0;
            let mut b2 = b;
            while b2 != 1 {
                b2 = self.mul(b2, b2);
                i += 1;
            }
            let mut w = c;
            for _ in 0..r - i - 1 {
                w = self.mul(w, w);
            }
            x = self.mul(x, w);
            c = self.mul(w, w);
            b = self.mul(b, c);
            r = i;
        }
        let y = self.neg(x);
        debug_assert_eq!(self.mul(x, x), a);
        Some(x.min(y))
    }

    /// Multiplication and inverse tables for small fields, indexed `a * Q + b`.
    pub fn small_tables(&self) -> Option<(Vec<u8>, Vec<u8>)> {
        if self.order > 256 {
            return None;
        }
        let q = self.order as u32;
        let mut mul = vec![0u8; (q * q) as usize];
        let mut inv = vec![0u8; q as usize];
        for a in 0..q {
            for b in 0..q {
                mul[(a * q + b) as usize] = self.mul(a, b) as u8;
            }
            inv[a as usize] = self.inv(a).unwrap_or(0) as u8;
        }
        Some((mul, inv))
    }

    /// First element (in index order) that is not a square, odd characteristic only.
    pub fn first_nonsquare(&self) -> Option<u32> {
        if self.p == 2 {
            return None;
        }
        self.nonzero().find(|&a| !self.is_square(a))
    }

    pub fn element(self: &Arc<Self>, value: u32) -> FieldElement {
        assert!((value as u64) < self.order, "element index out of range");
        FieldElement { field: Arc::clone(self), value }
    }

    /// Human-readable power-basis expression of an element in the root `x`.
    pub fn format(&self, a: u32) -> String {
        if self.m == 1 {
            return a.to_string();
        }
        let coeffs = self.coefficients(a);
        let terms: Vec<String> = coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "x".to_string(),
                (1, c) => format!("{c}x"),
                (i, 1) => format!("x^{i}"),
                (i, c) => format!("{c}x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join("+")
        }
    }
}

pub(crate) fn same_field(a: &FieldRef, b: &FieldRef) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Arithmetic requested through [`FieldElement::apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow(i64),
}

/// An element together with the field it belongs to.
#[derive(Clone)]
pub struct FieldElement {
    field: FieldRef,
    value: u32,
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.format(self.value))
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && same_field(&self.field, &other.field)
    }
}

impl Eq for FieldElement {}

impl FieldElement {
    pub fn field(&self) -> &FieldRef {
        &self.field
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn coefficients(&self) -> Vec<u32> {
        self.field.coefficients(self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn with(&self, value: u32) -> FieldElement {
        FieldElement { field: Arc::clone(&self.field), value }
    }

    /// Binary arithmetic; for `Pow` the right operand is ignored.
    pub fn apply(&self, op: ArithOp, rhs: &FieldElement) -> Result<FieldElement, FieldError> {
        if !same_field(&self.field, &rhs.field) {
            return Err(FieldError::MixedFields);
        }
        let f = &self.field;
        let v = match op {
            ArithOp::Add => f.add(self.value, rhs.value),
            ArithOp::Sub => f.sub(self.value, rhs.value),
            ArithOp::Mul => f.mul(self.value, rhs.value),
            ArithOp::Div => f.div(self.value, rhs.value).ok_or(FieldError::DivisionByZero)?,
            ArithOp::Pow(e) => f.pow_signed(self.value, e).ok_or(FieldError::DivisionByZero)?,
        };
        Ok(self.with(v))
    }

    pub fn pow(&self, e: i64) -> Result<FieldElement, FieldError> {
        self.field
            .pow_signed(self.value, e)
            .map(|v| self.with(v))
            .ok_or(FieldError::DivisionByZero)
    }

    pub fn inv(&self) -> Result<FieldElement, FieldError> {
        self.pow(-1)
    }

    pub fn multiplicative_order(&self) -> u64 {
        self.field.multiplicative_order(self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf4_basics() {
        let f = make_field(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
        assert_eq!(f.order(), 4);
        let w = 2; // the modulus root
        assert_eq!(f.mul(w, w), 3, "w^2 = w + 1");
        assert_eq!(f.pow(w, 3), 1);
        assert_eq!(f.multiplicative_order(w), 3);
    }

    #[test]
    fn prime_field_gf3() {
        let f = make_field(3, 1).unwrap();
        assert_eq!(f.order(), 3);
        assert_eq!(f.add(2, 2), 1);
        assert_eq!(f.neg(1), 2);
        assert_eq!(f.inv(2), Some(2));
    }

    #[test]
    fn construction_errors() {
        assert_eq!(make_field(4, 1).unwrap_err(), FieldError::NonPrimeCharacteristic(4));
        assert_eq!(make_field(1, 1).unwrap_err(), FieldError::NonPrimeCharacteristic(1));
        assert!(matches!(make_field(2, 33), Err(FieldError::UnsupportedSize { .. })));
        assert!(matches!(make_field(3, 21), Err(FieldError::UnsupportedSize { .. })));
        assert_eq!(make_field(2, 0).unwrap_err(), FieldError::InvalidDegree);
        assert!(make_field(2, 32).is_ok());
    }

    #[test]
    fn gf4096_modulus_is_irreducible_and_primitive() {
        let f = make_field(2, 12).unwrap();
        assert!(gfp_poly::is_irreducible(f.modulus(), 2));
        // Exhaustive root/factor check: no polynomial of degree <= 6 divides it.
        for idx in 2u32..(1 << 7) {
            let g: Vec<u32> = (0..7).map(|i| idx >> i & 1).collect();
            let mut g = g;
            gfp_poly::trim(&mut g);
            if gfp_poly::degree(&g).unwrap_or(0) == 0 {
                continue;
            }
            assert!(!gfp_poly::rem(f.modulus(), &g, 2).is_empty(), "factor {g:?}");
        }
        // Conway polynomials are primitive: x has full order.
        assert_eq!(f.multiplicative_order(2), 4095);
    }

    #[test]
    fn conway_table_entries_are_primitive_and_compatible() {
        for &(p, m, coeffs) in conway::CONWAY {
            let f = Field::with_modulus(p, coeffs.to_vec()).unwrap();
            if m > 1 {
                assert!(f.is_generator(p), "x not primitive for ({p},{m})");
            }
            // Compatibility: x^((p^m-1)/(p^d-1)) is a root of the degree-d entry.
            for d in 1..m {
                if m % d != 0 || m > 12 {
                    continue;
                }
                let sub = conway::lookup(p, d).unwrap();
                let root = if m == 1 { coeffs[0] } else { p };
                let e = (f.order() - 1) / ((p as u64).pow(d) - 1);
                let y = f.pow(root, e);
                let val = sub
                    .iter()
                    .rev()
                    .fold(0u32, |acc, &c| f.add(f.mul(acc, y), c));
                assert_eq!(val, 0, "({p},{m}) not compatible with degree {d}");
            }
        }
    }

    #[test]
    fn sqrt_roundtrip_in_odd_fields() {
        for (p, m) in [(3, 2), (5, 1), (7, 2), (3, 5)] {
            let f = make_field(p, m).unwrap();
            for a in f.elements() {
                match f.sqrt(a) {
                    Some(r) => assert_eq!(f.mul(r, r), a),
                    None => assert!(!f.is_square(a)),
                }
            }
        }
    }

    #[test]
    fn direct_and_table_multiplication_agree() {
        let f = make_field(2, 10).unwrap();
        for a in (0..1024).step_by(7) {
            for b in (0..1024).step_by(11) {
                assert_eq!(f.mul(a, b), f.mul_direct(a, b));
            }
        }
        let g = make_field(3, 4).unwrap();
        for a in g.elements() {
            for b in (0..81).step_by(5) {
                assert_eq!(g.mul(a, b), g.mul_direct(a, b));
            }
        }
    }

    #[test]
    fn large_binary_field_without_tables() {
        let f = make_field(2, 24).unwrap();
        assert!(matches!(f.mul_repr, MulRepr::Direct));
        let g = f.generator();
        assert_eq!(f.multiplicative_order(g), (1 << 24) - 1);
        let a = 0x5a5a5a;
        assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
    }

    #[test]
    fn checked_element_arithmetic() {
        let f4 = make_field(2, 2).unwrap();
        let f3 = make_field(3, 1).unwrap();
        let w = f4.element(2);
        assert_eq!(w.apply(ArithOp::Mul, &w).unwrap().value(), 3);
        assert_eq!(w.apply(ArithOp::Pow(3), &w).unwrap().value(), 1);
        assert_eq!(w.pow(-1).unwrap().value(), 3);
        assert_eq!(
            w.apply(ArithOp::Div, &f4.element(0)).unwrap_err(),
            FieldError::DivisionByZero
        );
        assert_eq!(w.apply(ArithOp::Add, &f3.element(1)).unwrap_err(), FieldError::MixedFields);
        let two = f3.element(2);
        assert_eq!(two.apply(ArithOp::Add, &two).unwrap().value(), 1);
    }
}
