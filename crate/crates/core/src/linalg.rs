//! Thin wrappers over faer's dense complex decompositions.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, Side};

use crate::error::{Error, Result};

/// Eigenvalues and right eigenvectors (columns), sorted by descending real
/// part, then descending imaginary part.
pub fn eig(m: &Mat<c64>) -> Result<(Vec<c64>, Mat<c64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), Mat::zeros(0, 0)));
    }
    let e = m
        .eigen()
        .map_err(|err| Error::NumericalFailure(format!("eigendecomposition of {n}x{n}: {err:?}")))?;
    let s = e.S().column_vector();
    let u = e.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| cmp_desc(s[a], s[b]));
    let vals = order.iter().map(|&k| s[k]).collect();
    let vecs = Mat::from_fn(n, n, |i, j| u[(i, order[j])]);
    Ok((vals, vecs))
}

/// Eigenvalues only, same ordering as [`eig`].
pub fn eigvals(m: &Mat<c64>) -> Result<Vec<c64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let mut v = m
        .eigenvalues()
        .map_err(|err| Error::NumericalFailure(format!("eigenvalues: {err:?}")))?;
    v.sort_by(|&a, &b| cmp_desc(a, b));
    Ok(v)
}

/// Ascending eigenvalues of the Hermitian part of `m` (lower triangle read).
pub fn hermitian_eigvals(m: &Mat<c64>) -> Result<Vec<f64>> {
    let n = m.nrows();
    let h = Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = h
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|err| Error::NumericalFailure(format!("hermitian eigenvalues: {err:?}")))?;
    v.sort_by(|a, b| a.total_cmp(b));
    Ok(v)
}

/// LU solve with partial pivoting. Also returns the ratio of the smallest to
/// the largest |U_ii|, a cheap rank indicator.
pub fn lu_solve(a: &Mat<c64>, b: &Mat<c64>) -> (Mat<c64>, f64) {
    let lu = a.partial_piv_lu();
    let u = lu.U();
    let n = u.nrows().min(u.ncols());
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let d = u[(i, i)].norm();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    (lu.solve(b), ratio)
}

fn cmp_desc(a: c64, b: c64) -> std::cmp::Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

pub fn column(m: &Mat<c64>, j: usize) -> Vec<c64> {
    (0..m.nrows()).map(|i| m[(i, j)]).collect()
}

pub fn norm2(v: &[c64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨a|b⟩ with conjugation on the left.
pub fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn normalize(v: &mut [c64]) {
    let n = norm2(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// Pairs `a[i]` with `b[perm[i]]` minimising the summed distance. Exhaustive
/// for up to 7 entries, greedy beyond.
pub fn match_pairs(a: &[c64], b: &[c64]) -> Vec<usize> {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n <= 7 {
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best = perm.clone();
        let mut best_cost = f64::INFINITY;
        permute(&mut perm, 0, &mut |p| {
            let c: f64 = p.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).norm()).sum();
            if c < best_cost {
                best_cost = c;
                best = p.to_vec();
            }
        });
        best
    } else {
        let mut used = vec![false; n];
        a.iter()
            .map(|&x| {
                let j = (0..n)
                    .filter(|&j| !used[j])
                    .min_by(|&i, &j| (x - b[i]).norm().total_cmp(&(x - b[j]).norm()))
                    .unwrap();
                used[j] = true;
                j
            })
            .collect()
    }
}

fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, f);
        p.swap(k, i);
    }
}

/// Largest |a_i − b_π(i)| / max(|a_i|, scale) under the optimal pairing.
pub fn multiset_rel_error(a: &[c64], b: &[c64], scale: f64) -> f64 {
    let perm = match_pairs(a, b);
    a.iter()
        .enumerate()
        .map(|(i, &x)| (x - b[perm[i]]).norm() / x.norm().max(scale))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eig_of_diagonal() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { c64::new(i as f64, -1.0) } else { c64::new(0.0, 0.0) });
        let (v, u) = eig(&m).unwrap();
        assert_eq!(v[0], c64::new(2.0, -1.0));
        assert!((u[(2, 0)].norm() - 1.0).abs() < 1e-14);
        assert_eq!(eigvals(&m).unwrap(), v);
    }

    #[test]
    fn lu_ratio_flags_singular() {
        let a = Mat::from_fn(2, 2, |_, _| c64::new(1.0, 0.0));
        let b = Mat::from_fn(2, 1, |_, _| c64::new(1.0, 0.0));
        assert!(lu_solve(&a, &b).1 < 1e-12);
    }

    #[test]
    fn pairing_is_optimal() {
        let a = [c64::new(0.0, 0.0), c64::new(1.0, 0.0), c64::new(5.0, 0.0)];
        let b = [c64::new(5.1, 0.0), c64::new(0.1, 0.0), c64::new(1.1, 0.0)];
        assert_eq!(match_pairs(&a, &b), vec![1, 2, 0]);
        assert!(multiset_rel_error(&a, &b, 1.0) < 0.11);
    }
}
