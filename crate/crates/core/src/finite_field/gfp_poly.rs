//! Dense univariate polynomials over a prime field GF(p).
//!
//! Coefficients are stored constant term first and kept trimmed, so the zero
//! polynomial is the empty vector.

pub(crate) type Poly = Vec<u32>;

pub(crate) fn trim(a: &mut Poly) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

pub(crate) fn degree(a: &[u32]) -> Option<usize> {
    if a.is_empty() {
        None
    } else {
        Some(a.len() - 1)
    }
}

fn inv_mod(a: u32, p: u32) -> u32 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a as u64, (p - 2) as u64, p as u64) as u32
}

pub(crate) fn pow_mod(mut base: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    acc
}

pub(crate) fn sub(a: &[u32], b: &[u32], p: u32) -> Poly {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = *a.get(i).unwrap_or(&0);
        let y = *b.get(i).unwrap_or(&0);
        out.push((x + p - y) % p);
    }
    trim(&mut out);
    out
}

pub(crate) fn mul(a: &[u32], b: &[u32], p: u32) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let p64 = p as u64;
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x as u64 * y as u64) % p64;
        }
    }
    let mut out: Poly = out.into_iter().map(|c| c as u32).collect();
    trim(&mut out);
    out
}

/// Remainder of `a` modulo a nonzero `b`.
pub(crate) fn rem(a: &[u32], b: &[u32], p: u32) -> Poly {
    let db = degree(b).expect("division by the zero polynomial");
    let lead_inv = inv_mod(b[db], p) as u64;
    let p64 = p as u64;
    let mut r: Vec<u64> = a.iter().map(|&c| c as u64).collect();
    while r.len() > db {
        let top = r.len() - 1;
        let c = r[top] * lead_inv % p64;
        if c != 0 {
            let shift = top - db;
            for (j, &bj) in b.iter().enumerate() {
                r[shift + j] = (r[shift + j] + (p64 - c) * bj as u64) % p64;
            }
        }
        r.pop();
        while r.last() == Some(&0) {
            r.pop();
        }
    }
    let mut out: Poly = r.into_iter().map(|c| c as u32).collect();
    trim(&mut out);
    out
}

pub(crate) fn mul_mod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Poly {
    rem(&mul(a, b, p), m, p)
}

pub(crate) fn pow_mod_poly(base: &[u32], mut e: u64, m: &[u32], p: u32) -> Poly {
    let mut acc: Poly = rem(&[1], m, p);
    let mut b = rem(base, m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(&acc, &b, m, p);
        }
        b = mul_mod(&b, &b, m, p);
        e >>= 1;
    }
    acc
}

pub(crate) fn gcd(a: &[u32], b: &[u32], p: u32) -> Poly {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    trim(&mut x);
    trim(&mut y);
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

pub(crate) fn eval(a: &[u32], x: u32, p: u32) -> u32 {
    let p64 = p as u64;
    a.iter()
        .rev()
        .fold(0u64, |acc, &c| (acc * x as u64 + c as u64) % p64) as u32
}

/// `x^(p^k) mod m`, computed by `k` successive p-th powers.
fn frobenius_power_of_x(k: u32, m: &[u32], p: u32) -> Poly {
    let mut acc = rem(&[0, 1], m, p);
    for _ in 0..k {
        acc = pow_mod_poly(&acc, p as u64, m, p);
    }
    acc
}

/// Rabin's irreducibility test for a monic polynomial of degree `deg >= 1`.
pub(crate) fn is_irreducible(f: &[u32], p: u32) -> bool {
    let Some(deg) = degree(f) else { return false };
    if deg == 0 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    let x: Poly = vec![0, 1];
    // Cheap root screen first.
    if (0..p).any(|r| eval(f, r, p) == 0) {
        return false;
    }
    let deg = deg as u32;
    if !sub(&frobenius_power_of_x(deg, f, p), &x, p).is_empty() {
        return false;
    }
    for r in crate::finite_field::prime_factors(deg as u64) {
        let h = sub(&frobenius_power_of_x(deg / r as u32, f, p), &x, p);
        if degree(&gcd(&h, f, p)) != Some(0) {
            return false;
        }
    }
    true
}
