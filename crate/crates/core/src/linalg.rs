//! Dense matrices over a [`Field`], stored row-major as element indices.

use crate::finite_field::Field;

pub type Matrix = Vec<Vec<u32>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| u32::from(i == j)).collect())
        .collect()
}

pub fn mat_mul(f: &Field, a: &Matrix, b: &Matrix) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, |r| r.len());
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(0, |acc, k| f.add(acc, f.mul(row[k], b[k][j]))))
                .collect()
        })
        .collect()
}

pub fn mat_vec(f: &Field, a: &Matrix, v: &[u32]) -> Vec<u32> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(0, |acc, (&x, &y)| f.add(acc, f.mul(x, y))))
        .collect()
}

/// In-place reduced row echelon form; returns the pivot columns.
pub fn rref(f: &Field, m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, pr);
        let inv = f.inv(m[r][c]).expect("pivot is nonzero");
        for x in m[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let factor = m[i][c];
                for j in c..cols {
                    let t = f.mul(factor, m[r][j]);
                    m[i][j] = f.sub(m[i][j], t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(f: &Field, m: &Matrix) -> usize {
    let mut m = m.clone();
    rref(f, &mut m).len()
}

/// Basis of the right kernel `{v : m v = 0}`, one vector per free column in
/// increasing column order, each with a 1 in its free column.
pub fn kernel(f: &Field, m: &Matrix, cols: usize) -> Vec<Vec<u32>> {
    let mut m = m.clone();
    let pivots = rref(f, &mut m);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u32; cols];
        v[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = f.neg(m[r][free]);
        }
        out.push(v);
    }
    out
}

pub fn determinant(f: &Field, m: &Matrix) -> u32 {
    let n = m.len();
    let mut a = m.clone();
    let mut det = 1u32;
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| a[i][c] != 0) else {
            return 0;
        };
        if pr != c {
            a.swap(pr, c);
            det = f.neg(det);
        }
        det = f.mul(det, a[c][c]);
        let inv = f.inv(a[c][c]).expect("pivot is nonzero");
        for i in c + 1..n {
            if a[i][c] != 0 {
                let factor = f.mul(a[i][c], inv);
                for j in c..n {
                    let t = f.mul(factor, a[c][j]);
                    a[i][j] = f.sub(a[i][j], t);
                }
            }
        }
    }
    det
}

pub fn inverse(f: &Field, m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut aug: Matrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u32::from(i == j)));
            r
        })
        .collect();
    let pivots = rref(f, &mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Adjugate via cofactors; only used for small (3x3) matrices.
pub fn adjugate3(f: &Field, m: &Matrix) -> Matrix {
    let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
        f.sub(f.mul(m[r0][c0], m[r1][c1]), f.mul(m[r0][c1], m[r1][c0]))
    };
    let others = |i: usize| match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let mut adj = vec![vec![0u32; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = others(i);
            let (c0, c1) = others(j);
            let c = minor(r0, r1, c0, c1);
            // adj[j][i] is the (i, j) cofactor.
            adj[j][i] = if (i + j) % 2 == 0 { c } else { f.neg(c) };
        }
    }
    adj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite_field::make_field_q;

    #[test]
    fn inverse_and_adjugate_agree() {
        let f = make_field_q(9).unwrap();
        let m: Matrix = vec![vec![1, 2, 3], vec![0, 4, 5], vec![7, 0, 8]];
        let det = determinant(&f, &m);
        assert_ne!(det, 0);
        let inv = inverse(&f, &m).unwrap();
        assert_eq!(mat_mul(&f, &m, &inv), identity(3));
        let adj = adjugate3(&f, &m);
        let scaled: Matrix = inv.iter().map(|r| r.iter().map(|&x| f.mul(x, det)).collect()).collect();
        assert_eq!(adj, scaled);
    }

    #[test]
    fn kernel_vectors_are_annihilated() {
        let f = make_field_q(4).unwrap();
        let m: Matrix = vec![vec![1, 2, 3, 0], vec![2, 3, 1, 0], vec![3, 1, 2, 0]];
        let k = kernel(&f, &m, 4);
        assert_eq!(k.len(), 4 - rank(&f, &m));
        for v in &k {
            assert!(mat_vec(&f, &m, v).iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let f = make_field_q(2).unwrap();
        let m: Matrix = vec![vec![1, 1], vec![1, 1]];
        assert_eq!(determinant(&f, &m), 0);
        assert!(inverse(&f, &m).is_none());
    }
}
