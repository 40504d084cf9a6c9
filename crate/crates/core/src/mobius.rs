//! SU(1,1) acting on the quantum disk: Mobius symbols, the isometry `W_g`,
//! the kernel vector `F_0`, and the unitary `U_g` with columns `W_g^k F_0`.

use serde::{Deserialize, Serialize};

use crate::error::{QdiskError, Result};
use crate::linalg::{identity, inverse, max_abs, op_norm, CMat, CVec, C64, ONE};
use crate::operators::{label_operator, shift, toeplitz_window, CompactOp, ToeplitzElem};
use crate::sequences::Symbol;

/// `g = [[alpha, beta], [conj(beta), conj(alpha)]]`, acting by `z -> (alpha z + beta)/(conj(beta) z + conj(alpha))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SU11Element {
    pub alpha: C64,
    pub beta: C64,
}

impl SU11Element {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let det = alpha.norm_sqr() - beta.norm_sqr();
        if (det - 1.0).abs() >= 1e-12 {
            return Err(QdiskError::SpecViolation(format!("|alpha|^2 - |beta|^2 = {det}, expected 1")));
        }
        Ok(SU11Element { alpha, beta })
    }

    pub fn identity() -> Self {
        SU11Element { alpha: ONE, beta: C64::new(0.0, 0.0) }
    }

    /// Group element with `|beta/alpha| = ratio`, phases `phi` (alpha) and `psi` (beta).
    pub fn from_ratio(ratio: f64, phi: f64, psi: f64) -> Self {
        let a = 1.0 / (1.0 - ratio * ratio).sqrt();
        SU11Element { alpha: C64::from_polar(a, phi), beta: C64::from_polar(a * ratio, psi) }
    }

    /// Matrix product; corresponds to composition `self o other` of Mobius maps.
    pub fn compose(&self, other: &Self) -> Self {
        SU11Element {
            alpha: self.alpha * other.alpha + self.beta * other.beta.conj(),
            beta: self.alpha * other.beta + self.beta * other.alpha.conj(),
        }
    }

    pub fn inverse(&self) -> Self {
        SU11Element { alpha: self.alpha.conj(), beta: -self.beta }
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.alpha * z + self.beta) / (self.beta.conj() * z + self.alpha.conj())
    }

    pub fn ratio(&self) -> f64 {
        self.beta.norm() / self.alpha.norm()
    }

    /// `max |g'|` on the circle, `(|alpha| + |beta|)/(|alpha| - |beta|)`.
    pub fn lipschitz(&self) -> f64 {
        (self.alpha.norm() + self.beta.norm()) / (self.alpha.norm() - self.beta.norm())
    }

    /// Ratio `q = -conj(beta)/conj(alpha)` of the geometric expansions.
    fn q(&self) -> C64 {
        -self.beta.conj() / self.alpha.conj()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MobiusSymbol {
    pub symbol: Symbol,
    /// Bound on `sum_{n > band} |g_n|`.
    pub tail_bound: f64,
}

/// Taylor coefficients of `g` on the circle: `g_0 = beta/conj(alpha)`, `g_n = q^{n-1}/conj(alpha)^2`.
pub fn mobius_symbol(g: &SU11Element, band: usize) -> MobiusSymbol {
    let band = band.max(1);
    let ab = g.alpha.conj();
    let q = g.q();
    let mut pairs = vec![(0i64, g.beta / ab)];
    let mut qp = ONE;
    for n in 1..=band {
        pairs.push((n as i64, qp / (ab * ab)));
        qp *= q;
    }
    let r = q.norm();
    let tail_bound = r.powi(band as i32) / (g.alpha.norm_sqr() * (1.0 - r));
    MobiusSymbol { symbol: Symbol::from_pairs(pairs), tail_bound }
}

/// `f o g` through symbol arithmetic: `sum_n f_n g^n` with `g^{-1} = conj(g)` on the circle.
pub fn composed_symbol(f: &Symbol, g: &SU11Element, band: usize) -> Symbol {
    let w = mobius_symbol(g, band).symbol;
    let wc = w.conj();
    let lo = f.nonzero().map(|(n, _)| n).min().unwrap_or(0);
    let hi = f.nonzero().map(|(n, _)| n).max().unwrap_or(0);
    let cut = |s: Symbol| Symbol::from_pairs(s.iter().filter(|(n, _)| n.unsigned_abs() as usize <= band));
    let mut out = Symbol::constant(f.coeff(0));
    let mut pw = Symbol::constant(ONE);
    for n in 1..=hi.max(0) {
        pw = cut(pw.product(&w));
        out = out.add(&pw.scale(f.coeff(n)));
    }
    let mut pw = Symbol::constant(ONE);
    for n in 1..=(-lo).max(0) {
        pw = cut(pw.product(&wc));
        out = out.add(&pw.scale(f.coeff(-n)));
    }
    out
}

/// `W_g = (alpha U + beta)(conj(beta) U + conj(alpha))^{-1}` realized from its two factors.
///
/// Returns the element and the largest entry of the (chopped) compact remainder.
pub fn w_g(g: &SU11Element, dim: usize) -> Result<(ToeplitzElem, f64)> {
    let num = Symbol::from_pairs([(0, g.beta), (1, g.alpha)]);
    let den = Symbol::from_pairs([(0, g.alpha.conj()), (1, g.beta.conj())]);
    let den_inv = inverse(&toeplitz_window(&den, dim)).ok_or(QdiskError::Singular(0.0))?;
    let realized = toeplitz_window(&num, dim) * den_inv;
    let symbol = mobius_symbol(g, dim.saturating_sub(1)).symbol;
    let rest = realized - toeplitz_window(&symbol, dim);
    let rest_max = max_abs(&rest);
    let mut chopped = rest;
    for z in chopped.iter_mut() {
        if z.norm() < 1e-12 {
            *z = C64::new(0.0, 0.0);
        }
    }
    Ok((ToeplitzElem::new(symbol, CompactOp::from_matrix(chopped)), rest_max))
}

/// `F_0[k] = (-conj(beta))^k / conj(alpha)^{k+1}`, spanning the kernel of `W_g*`.
pub fn f0(g: &SU11Element, dim: usize) -> CVec {
    let ab = g.alpha.conj();
    let q = g.q();
    CVec::from_iterator(
        dim,
        (0..dim).scan(ONE / ab, |acc, _| {
            let v = *acc;
            *acc *= q;
            Some(v)
        }),
    )
}

/// Size of the block on which window truncation of `U_g` is negligible.
///
/// Column `k` of `U_g` carries frequencies up to about `k max|g'|`, so the block
/// is `dim / (2 max|g'|)`.
pub fn central_block(g: &SU11Element, dim: usize) -> usize {
    ((dim as f64 / (2.0 * g.lipschitz())).floor() as usize).clamp(1, dim)
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryWindow {
    pub matrix: CMat,
    /// `||G - I||` on the central block, `G` the column Gram matrix.
    pub orthonormality_residual: f64,
    pub block: usize,
}

/// Window of `U_g`: columns `W_g^k F_0`, built by repeated application without re-orthogonalization.
pub fn u_g(g: &SU11Element, dim: usize) -> Result<UnitaryWindow> {
    let (w, _) = w_g(g, dim)?;
    let wm = w.realize();
    let mut matrix = CMat::zeros(dim, dim);
    let mut x = f0(g, dim);
    for k in 0..dim {
        matrix.set_column(k, &x);
        x = &wm * x;
    }
    let block = central_block(g, dim);
    let gram = matrix.adjoint() * &matrix;
    let orthonormality_residual = op_norm(&(sub_block(&gram, block) - identity(block)));
    if orthonormality_residual > 1e-6 {
        return Err(QdiskError::IllConditioned(format!(
            "orthonormality residual {orthonormality_residual:e} on block {block} at dim {dim}"
        )));
    }
    Ok(UnitaryWindow { matrix, orthonormality_residual, block })
}

fn sub_block(m: &CMat, n: usize) -> CMat {
    m.view((0, 0), (n, n)).into_owned()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Conjugated {
    pub result: CompactOp,
    /// `max |r_{k,l}| (1+k)^r (1+l)^r` for `r = 1..=4`.
    pub decay_profile: [f64; 4],
}

pub fn decay_profile(a: &CompactOp) -> [f64; 4] {
    let mut out = [0.0f64; 4];
    for (k, l, z) in a.entries() {
        for (r, slot) in out.iter_mut().enumerate() {
            let w = ((1.0 + k as f64) * (1.0 + l as f64)).powi(r as i32 + 1);
            *slot = f64::max(*slot, z.norm() * w);
        }
    }
    out
}

/// `rho_g(a) = U_g a U_g^*` for a finitely supported `a` inside the resolved block.
pub fn conjugate(g: &SU11Element, a: &CompactOp) -> Result<Conjugated> {
    let dim = a.dim();
    let u = u_g(g, dim)?;
    if a.extent() > u.block {
        return Err(QdiskError::IllConditioned(format!("operand support {} exceeds resolved block {}", a.extent(), u.block)));
    }
    let m = &u.matrix * a.matrix() * u.matrix.adjoint();
    let result = CompactOp::from_matrix(m);
    let decay_profile = decay_profile(&result);
    Ok(Conjugated { result, decay_profile })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusReport {
    pub g: SU11Element,
    pub dim: usize,
    pub central_block: usize,
    pub w_symbol: Symbol,
    pub w_symbol_tail_bound: f64,
    pub w_compact_max: f64,
    pub f0: Vec<C64>,
    pub f0_norm: f64,
    /// Closed-form `|F_0|^2` mass beyond the window.
    pub f0_tail_mass: f64,
    pub f0_kernel_residual: f64,
    pub isometry_residual: f64,
    pub orthonormality_residual: f64,
    pub conjugation_residual: f64,
    pub delta_k_w_residual: f64,
    pub delta_k_v_residual: f64,
    pub decay_profile: [f64; 4],
}

/// Every diagnostic for one group element.
pub fn mobius_report(g: &SU11Element, dim: usize) -> Result<MobiusReport> {
    let (w, w_compact_max) = w_g(g, dim)?;
    let wm = w.realize();
    let block = central_block(g, dim);
    let isometry_residual = op_norm(&sub_block(&(wm.adjoint() * &wm - identity(dim)), block));

    let f = f0(g, dim);
    let f0_norm = f.norm();
    let f0_tail_mass = g.ratio().powi(2 * dim as i32);
    let f0_kernel_residual = (wm.adjoint() * &f).norm();

    let u = u_g(g, dim)?;
    let us = shift(dim);
    let conj_diff = &u.matrix * &us * u.matrix.adjoint() - &wm;
    let conjugation_residual = op_norm(&sub_block(&conj_diff, block));

    let kk = label_operator(dim);
    let dw = &kk * &wm - &wm * &kk;
    let den = identity(dim) * g.alpha.conj() + &us * g.beta.conj();
    let den_inv = inverse(&den).ok_or(QdiskError::Singular(0.0))?;
    let delta_k_w_residual = max_abs(&(&dw - &us * &den_inv * &den_inv));

    let v = &den * &u.matrix;
    let lhs = &kk * &v - &v * &kk;
    let rhs = (&dw * wm.adjoint() - identity(dim)) * &v * &kk;
    let delta_k_v_residual = op_norm(&sub_block(&(lhs - rhs), block));

    let p00 = CompactOp::unit(0, 0, dim)?;
    let decay = conjugate(g, &p00)?.decay_profile;
    let ms = mobius_symbol(g, dim.saturating_sub(1));

    Ok(MobiusReport {
        g: *g,
        dim,
        central_block: block,
        w_symbol: ms.symbol,
        w_symbol_tail_bound: ms.tail_bound,
        w_compact_max,
        f0: f.iter().copied().collect(),
        f0_norm,
        f0_tail_mass,
        f0_kernel_residual,
        isometry_residual,
        orthonormality_residual: u.orthonormality_residual,
        conjugation_residual,
        delta_k_w_residual,
        delta_k_v_residual,
        decay_profile: decay,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn g0() -> SU11Element {
        SU11Element::new(r(1.25), r(0.75)).unwrap()
    }

    #[test]
    fn rejects_off_group() {
        assert!(SU11Element::new(r(1.0), r(0.5)).is_err());
    }

    #[test]
    fn identity_examples() {
        let id = SU11Element::identity();
        let s = mobius_symbol(&id, 5).symbol.trimmed(0.0);
        assert_eq!(s, Symbol::monomial(1, ONE));
        let (w, _) = w_g(&id, 8).unwrap();
        assert_eq!(w.realize(), shift(8));
        let f = f0(&id, 6);
        assert_eq!(f[0], ONE);
        assert!(f.iter().skip(1).all(|z| z.norm() == 0.0));
        let u = u_g(&id, 8).unwrap();
        assert_eq!(u.matrix, identity(8));
        let a = CompactOp::from_entries(8, [(1, 2, r(3.0))]).unwrap();
        assert_eq!(conjugate(&id, &a).unwrap().result, a);
    }

    /// Coefficients by sampling `g` on a fine grid and a direct DFT.
    fn sampled_coeffs(g: &SU11Element, n_max: i64) -> Vec<C64> {
        let pts = 512;
        (-n_max..=n_max)
            .map(|n| {
                (0..pts)
                    .map(|j| {
                        let x = j as f64 / pts as f64;
                        let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * x);
                        g.apply(z) * C64::from_polar(1.0, -2.0 * std::f64::consts::PI * n as f64 * x)
                    })
                    .sum::<C64>()
                    / pts as f64
            })
            .collect()
    }

    #[test]
    fn symbol_matches_sampling() {
        let g = g0();
        let s = mobius_symbol(&g, 30).symbol;
        let want = sampled_coeffs(&g, 30);
        for (i, n) in (-30..=30i64).enumerate() {
            assert!((s.coeff(n) - want[i]).norm() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn f0_closed_form() {
        let f = f0(&g0(), 64);
        for k in 0..64 {
            assert!((f[k] - r(0.8 * (-0.6f64).powi(k as i32))).norm() < 1e-15);
        }
        // sum 0.64 * 0.36^k = 1 - 0.36^64.
        assert!((f.norm_squared() - (1.0 - 0.36f64.powi(64))).abs() < 1e-15);
    }

    #[test]
    fn report_at_golden_element() {
        let rep = mobius_report(&g0(), 64).unwrap();
        assert!(rep.isometry_residual < 1e-8, "{}", rep.isometry_residual);
        assert!(rep.f0_kernel_residual < 1e-8);
        assert!(rep.conjugation_residual < 1e-7, "{}", rep.conjugation_residual);
        assert!(rep.delta_k_w_residual < 1e-8);
        assert!(rep.delta_k_v_residual < 1e-7);
        assert!(rep.w_compact_max < 1e-8);
        assert!((rep.f0[0] - r(0.8)).norm() < 1e-15);
    }

    #[test]
    fn composition_matches_matrix_product() {
        let g1 = SU11Element::from_ratio(0.4, 0.3, -1.1);
        let g2 = SU11Element::from_ratio(0.3, 2.0, 0.5);
        let z = C64::from_polar(1.0, 0.7);
        assert!((g1.apply(g2.apply(z)) - g1.compose(&g2).apply(z)).norm() < 1e-14);
        assert!((g1.compose(&g1.inverse()).alpha - ONE).norm() < 1e-14);
    }
}
