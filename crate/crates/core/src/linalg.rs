//! Dense complex window matrices and the few factorizations the library needs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Binomial coefficient as a float; exact for the small arguments used here.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

pub fn cis(t: f64) -> C64 {
    C64::new(t.cos(), t.sin())
}

/// Singular values in descending order.
pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn op_norm(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

pub fn min_singular_value(m: &CMat) -> f64 {
    singular_values(m).last().copied().unwrap_or(0.0)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(dim: usize) -> CMat {
    CMat::identity(dim, dim)
}

pub fn diag(values: impl IntoIterator<Item = C64>) -> CMat {
    let v: Vec<C64> = values.into_iter().collect();
    CMat::from_diagonal(&CVec::from_vec(v))
}

/// Top-left `n x n` block.
pub fn block(m: &CMat, n: usize) -> CMat {
    m.view((0, 0), (n.min(m.nrows()), n.min(m.ncols()))).into_owned()
}

pub fn inverse(m: &CMat) -> Option<CMat> {
    m.clone().lu().try_inverse()
}

/// Eigenvalues from the complex Schur form.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let schur = nalgebra::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Eigen-decomposition of a Hermitian matrix: (eigenvalues, unitary eigenvectors).
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// Apply a real function through the Hermitian eigen-decomposition.
pub fn hermitian_apply(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = hermitian_eigen(m);
    let d = diag(vals.iter().map(|&x| C64::new(f(x), 0.0)));
    &vecs * d * vecs.adjoint()
}

/// Count of singular values above `tau` together with the separation it relies on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankSplit {
    pub rank: usize,
    /// Ratio between the smallest value kept and the largest value dropped.
    pub gap: f64,
}

pub fn rank_split(sv: &[f64], tau: f64) -> RankSplit {
    let rank = sv.iter().filter(|&&s| s > tau).count();
    let kept = if rank == 0 { f64::INFINITY } else { sv[rank - 1] };
    let dropped = sv.get(rank).copied().unwrap_or(0.0);
    let gap = if dropped == 0.0 { f64::INFINITY } else { kept / dropped };
    RankSplit { rank, gap }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(6, 3), 20.0);
        assert_eq!(binom(0, 0), 1.0);
        assert_eq!(binom(3, 5), 0.0);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let mut m = CMat::zeros(3, 3);
        m[(0, 0)] = C64::new(1.0, 1.0);
        m[(1, 1)] = C64::new(-2.0, 0.0);
        m[(2, 2)] = C64::new(0.5, 0.0);
        m[(0, 2)] = ONE;
        let mut ev = eigenvalues(&m);
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - C64::new(-2.0, 0.0)).norm() < 1e-12);
        assert!((ev[2] - C64::new(1.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn rank_split_reports_gap() {
        let r = rank_split(&[3.0, 1.0, 1e-9, 0.0], 1e-6);
        assert_eq!(r.rank, 2);
        assert!((r.gap - 1e9).abs() < 1.0);
    }
}
