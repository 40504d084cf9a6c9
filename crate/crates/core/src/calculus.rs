//! Inverses, exponentials, contour-integral and Fourier-series functional calculus.

use serde::{Deserialize, Serialize};

use crate::error::{QdiskError, Result};
use crate::linalg::{eigenvalues, frobenius, identity, inverse, max_abs, min_singular_value, op_norm, CMat, C64, I};
use crate::mobius::decay_profile;
use crate::operators::{toeplitz_window, CompactOp, ToeplitzElem};
use crate::sequences::Symbol;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Smallest singular value below which a window matrix counts as singular.
pub const SINGULAR_TOL: f64 = 1e-12;

fn embed(block: &CMat, dim: usize) -> CompactOp {
    let mut m = CMat::zeros(dim, dim);
    let s = block.nrows();
    m.view_mut((0, 0), (s, s)).copy_from(block);
    CompactOp::from_matrix(m)
}

/// `e^m - I` by scaling and squaring, kept in the `e^X - I` form so small
/// exponents do not lose digits to cancellation.
pub fn exp_minus_identity(m: &CMat) -> CMat {
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let nf = frobenius(m);
    let squarings = if nf > 0.5 { (nf / 0.5).log2().ceil() as u32 } else { 0 };
    let y = m / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut term = y.clone();
    let mut sum = y.clone();
    for k in 2..60 {
        term = &term * &y / C64::new(k as f64, 0.0);
        sum += &term;
        if frobenius(&term) <= 1e-18 * frobenius(&sum) {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum + &sum * C64::new(2.0, 0.0);
    }
    sum
}

/// `e^c - I` for a finitely supported `c`, computed on its support block.
pub fn exp_compact(c: &CompactOp) -> CompactOp {
    if c.is_zero() {
        return CompactOp::zeros(c.dim());
    }
    embed(&exp_minus_identity(&c.support_block()), c.dim())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompactInverse {
    /// `(I + c)^{-1} - I`.
    pub value: CompactOp,
    pub decay_profile: [f64; 4],
}

/// `(I + c)^{-1} - I` on the support block of `c`.
pub fn invert_one_plus(c: &CompactOp) -> Result<CompactInverse> {
    if c.is_zero() {
        return Ok(CompactInverse { value: CompactOp::zeros(c.dim()), decay_profile: [0.0; 4] });
    }
    let b = c.support_block();
    let s = b.nrows();
    let m = identity(s) + &b;
    let smin = min_singular_value(&m);
    if smin < SINGULAR_TOL {
        return Err(QdiskError::Singular(smin));
    }
    let inv = inverse(&m).ok_or(QdiskError::Singular(smin))?;
    let value = embed(&(inv - identity(s)), c.dim());
    let decay_profile = decay_profile(&value);
    Ok(CompactInverse { value, decay_profile })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToeplitzInverse {
    pub value: ToeplitzElem,
    /// `sup |f r - 1|` for the symbol part.
    pub symbol_residual: f64,
    /// `||a a^{-1} - I||` on the top-left quarter of the window.
    pub residual: f64,
    pub decay_profile: [f64; 4],
}

/// `(T(f) + c)^{-1} = T(1/f) + b`, with `b` read off the window inverse.
///
/// The window inverse is a finite section, so `b` is kept on the top-left half
/// of the window, away from the corner where the section deviates.
pub fn invert_toeplitz(a: &ToeplitzElem) -> Result<ToeplitzInverse> {
    let dim = a.dim();
    let rec = a.symbol.reciprocal(dim.saturating_sub(1))?;
    let w = a.realize();
    let smin = min_singular_value(&w);
    if a.symbol.winding_number()? != 0 || smin < SINGULAR_TOL {
        return Err(QdiskError::Singular(smin));
    }
    let inv = inverse(&w).ok_or(QdiskError::Singular(smin))?;
    let r = rec.symbol.trimmed(1e-16 * rec.symbol.max_coeff_abs());
    let full = &inv - toeplitz_window(&r, dim);
    let half = dim / 2;
    let cut = 1e-13 * max_abs(&inv).max(1.0);
    let mut b = CMat::zeros(dim, dim);
    for l in 0..half {
        for k in 0..half {
            if full[(k, l)].norm() > cut {
                b[(k, l)] = full[(k, l)];
            }
        }
    }
    let value = ToeplitzElem::new(r, CompactOp::from_matrix(b));
    let quarter = (dim / 4).max(1);
    let prod = &w * value.realize() - identity(dim);
    let residual = op_norm(&prod.view((0, 0), (quarter, quarter)).into_owned());
    let decay_profile = decay_profile(&value.compact);
    Ok(ToeplitzInverse { value, symbol_residual: rec.residual, residual, decay_profile })
}

/// Circle `center + radius e^{i theta}` sampled at `nodes` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

impl Contour {
    /// Circle about the origin of radius `2 ||m||` with 64 nodes.
    pub fn around(m: &CMat) -> Self {
        Contour { center: C64::new(0.0, 0.0), radius: (2.0 * op_norm(m)).max(1e-3), nodes: 64 }
    }

    pub fn with_nodes(self, nodes: usize) -> Self {
        Contour { nodes, ..self }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoloResult<T> {
    pub value: T,
    /// Largest `|lambda - center| / radius` over the enclosed spectrum.
    pub spectral_ratio: f64,
}

/// `(1/2 pi i) \oint f(z) (z - m)^{-1} dz` by the trapezoid rule.
pub fn holo_calc_matrix(m: &CMat, f: &dyn Fn(C64) -> C64, contour: &Contour, with_zero: bool) -> Result<HoloResult<CMat>> {
    let n = m.nrows();
    let mut spec = eigenvalues(m);
    if with_zero {
        spec.push(C64::new(0.0, 0.0));
    }
    let spectral_ratio = spec.iter().map(|l| (l - contour.center).norm() / contour.radius).fold(0.0, f64::max);
    if spectral_ratio >= 1.0 - 1e-9 {
        return Err(QdiskError::ContourTooTight { distance: contour.radius * (1.0 - spectral_ratio) });
    }
    let q = contour.nodes.max(1);
    let mut acc = CMat::zeros(n, n);
    for j in 0..q {
        let e = C64::from_polar(1.0, TAU * j as f64 / q as f64);
        let z = contour.center + e * contour.radius;
        let res = inverse(&(identity(n) * z - m)).ok_or(QdiskError::Singular(0.0))?;
        acc += res * (f(z) * e * contour.radius);
    }
    Ok(HoloResult { value: acc / C64::new(q as f64, 0.0), spectral_ratio })
}

/// `f(c) - f(0) I` for a finitely supported `c`; the contour must enclose `0` as well.
pub fn holo_calc(c: &CompactOp, f: &dyn Fn(C64) -> C64, contour: &Contour) -> Result<HoloResult<CompactOp>> {
    let b = c.support_block();
    let s = b.nrows();
    let r = holo_calc_matrix(&b, f, contour, true)?;
    let value = embed(&(r.value - identity(s) * f(C64::new(0.0, 0.0))), c.dim());
    Ok(HoloResult { value, spectral_ratio: r.spectral_ratio })
}

/// Split a window-level result into `T(h) + b` with `b` kept on the top-left half.
fn split_window(result: &CMat, h: Symbol) -> ToeplitzElem {
    let dim = result.nrows();
    let h = h.trimmed(1e-15 * h.max_coeff_abs().max(1.0));
    let full = result - toeplitz_window(&h, dim);
    let half = dim / 2;
    let mut b = CMat::zeros(dim, dim);
    b.view_mut((0, 0), (half, half)).copy_from(&full.view((0, 0), (half, half)));
    ToeplitzElem::new(h, CompactOp::from_matrix_chopped(b, 1e-15))
}

/// Holomorphic calculus of `T(g) + c` through its window; the symbol part is `f o g`.
pub fn holo_calc_toeplitz(a: &ToeplitzElem, f: &dyn Fn(C64) -> C64, contour: &Contour) -> Result<HoloResult<ToeplitzElem>> {
    let r = holo_calc_matrix(&a.realize(), f, contour, false)?;
    let band = a.dim().saturating_sub(1);
    let h = Symbol::from_function(|x| f(a.symbol.eval(x)), band, 8 * (band + 1));
    Ok(HoloResult { value: split_window(&r.value, h), spectral_ratio: r.spectral_ratio })
}

/// Fourier data of an `L`-periodic smooth function agreeing with `f` on `[-s, s]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicExtension {
    pub period: f64,
    /// Coefficients in the variable `x / L`.
    pub coeffs: Symbol,
    pub half_width: f64,
    /// `max |extension - f|` sampled on `[-s, s]`.
    pub reproduction_error: f64,
}

/// Samples used to build an extension.
pub const EXTENSION_GRID: usize = 8192;

impl PeriodicExtension {
    /// Multiply `f` by an erf-smoothed indicator that is 1 on `[-s, s]` and
    /// vanishes to machine precision before `+-L/2`, then transform.
    pub fn build(f: &dyn Fn(f64) -> f64, half_width: f64, period: f64) -> Result<Self> {
        let s = half_width;
        if period <= 2.0 * s {
            return Err(QdiskError::BadExtension(format!("period {period} not above 2 * {s}")));
        }
        let w = (period / 8.0).min(period / 2.0 - s);
        let sigma = w / 12.0;
        let edge = s + w / 2.0;
        let bump = |x: f64| 0.5 * (libm::erf((x + edge) / sigma) - libm::erf((x - edge) / sigma));
        let h = |t: f64| {
            let mut x = t * period;
            if x >= period / 2.0 {
                x -= period;
            }
            C64::new(f(x) * bump(x), 0.0)
        };
        let full = Symbol::from_function(h, EXTENSION_GRID / 2 - 1, EXTENSION_GRID);
        let total: f64 = full.iter().map(|(_, z)| z.norm()).sum();
        let mut keep = full.band();
        let mut tail = 0.0;
        while keep > 0 {
            let drop = full.coeff(keep as i64).norm() + full.coeff(-(keep as i64)).norm();
            if tail + drop > 1e-14 * total.max(1.0) {
                break;
            }
            tail += drop;
            keep -= 1;
        }
        let coeffs = Symbol::from_pairs(full.iter().filter(|(n, _)| n.unsigned_abs() as usize <= keep));
        let mut ext = PeriodicExtension { period, coeffs, half_width: s, reproduction_error: 0.0 };
        let scale = (0..=400).map(|i| f(-s + 2.0 * s * i as f64 / 400.0).abs()).fold(1.0, f64::max);
        ext.reproduction_error = (0..=400)
            .map(|i| {
                let x = -s + 2.0 * s * i as f64 / 400.0;
                (ext.eval(x) - f(x)).abs()
            })
            .fold(0.0, f64::max);
        if ext.reproduction_error > 1e-9 * scale {
            return Err(QdiskError::BadExtension(format!("reproduction error {:e}", ext.reproduction_error)));
        }
        Ok(ext)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.eval(x / self.period).re
    }

    /// Default period `4 s`.
    pub fn for_radius(f: &dyn Fn(f64) -> f64, half_width: f64) -> Result<Self> {
        let s = half_width.max(1e-3);
        Self::build(f, s, 4.0 * s)
    }
}

/// `sum_{n != 0} F_n (E^n - I)` with `E = e^{2 pi i m / L}`.
fn fourier_sum(m: &CMat, ext: &PeriodicExtension) -> CMat {
    let n = m.nrows();
    let d1 = exp_minus_identity(&(m * (I * (TAU / ext.period))));
    let dm1 = d1.adjoint();
    let mut acc = CMat::zeros(n, n);
    for (step, sign) in [(&d1, 1i64), (&dm1, -1i64)] {
        let mut d = step.clone();
        for k in 1..=ext.coeffs.band() as i64 {
            let fk = ext.coeffs.coeff(sign * k);
            if fk != C64::new(0.0, 0.0) {
                acc += &d * fk;
            }
            d = &d + step + step * &d;
        }
    }
    acc
}

fn check_self_adjoint(m: &CMat) -> Result<()> {
    let dev = max_abs(&(m - m.adjoint()));
    if dev > 1e-12 * max_abs(m).max(1.0) {
        return Err(QdiskError::NotSelfAdjoint(dev));
    }
    Ok(())
}

fn check_extension(norm: f64, ext: &PeriodicExtension) -> Result<()> {
    if ext.period <= 2.0 * norm || ext.half_width < norm * (1.0 - 1e-12) {
        return Err(QdiskError::BadExtension(format!(
            "extension on [-{}, {}] with period {} does not cover norm {norm}",
            ext.half_width, ext.half_width, ext.period
        )));
    }
    Ok(())
}

/// `f(c) - f(0) I` for self-adjoint finitely supported `c`, by the Fourier method.
pub fn smooth_calc_sa(c: &CompactOp, ext: &PeriodicExtension) -> Result<CompactOp> {
    if c.is_zero() {
        return Ok(CompactOp::zeros(c.dim()));
    }
    let b = c.support_block();
    check_self_adjoint(&b)?;
    check_extension(op_norm(&b), ext)?;
    Ok(embed(&fourier_sum(&b, ext), c.dim()))
}

/// `f(T(g) + c)` through the window; the symbol part is `f o g`.
pub fn smooth_calc_sa_toeplitz(a: &ToeplitzElem, f: &dyn Fn(f64) -> f64, ext: &PeriodicExtension) -> Result<ToeplitzElem> {
    let m = a.realize();
    check_self_adjoint(&m)?;
    check_extension(op_norm(&m), ext)?;
    let f0 = ext.coeffs.iter().map(|(_, z)| z).sum::<C64>();
    let r = fourier_sum(&m, ext) + identity(m.nrows()) * f0;
    let band = a.dim().saturating_sub(1);
    let h = Symbol::from_function(|x| C64::new(f(a.symbol.eval(x).re), 0.0), band, 8 * (band + 1));
    Ok(split_window(&r, h))
}

/// `e^{i c} - I`.
pub fn exp_i_minus_identity(c: &CompactOp) -> CompactOp {
    exp_compact(&c.scale(I))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_apply, max_abs_diff, ONE};

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn p(k: usize, l: usize, d: usize) -> CompactOp {
        CompactOp::unit(k, l, d).unwrap()
    }

    #[test]
    fn invert_one_plus_examples() {
        assert!(invert_one_plus(&CompactOp::zeros(6)).unwrap().value.is_zero());
        for t in [0.5, -0.3, 2.0] {
            let v = invert_one_plus(&p(0, 0, 6).scale(r(t))).unwrap().value;
            assert!((v.get(0, 0) - r(1.0 / (1.0 + t) - 1.0)).norm() < 1e-15);
        }
        assert!(matches!(invert_one_plus(&p(0, 0, 6).scale(r(-1.0))), Err(QdiskError::Singular(_))));
    }

    #[test]
    fn exp_examples() {
        assert!(exp_compact(&CompactOp::zeros(5)).is_zero());
        for t in [1e-9, 0.3, -2.0, 7.5] {
            let v = exp_compact(&p(0, 0, 5).scale(r(t)));
            assert!((v.get(0, 0) - r(t.exp_m1())).norm() < 1e-14 * t.exp().max(1.0), "t = {t}");
        }
    }

    #[test]
    fn invert_toeplitz_examples() {
        let d = 32;
        let two = ToeplitzElem::toeplitz(Symbol::constant(r(2.0)), d);
        let inv = invert_toeplitz(&two).unwrap();
        assert!((inv.value.symbol.coeff(0) - r(0.5)).norm() < 1e-15);
        assert!(inv.value.compact.is_zero());

        let f = Symbol::from_pairs([(0, r(1.25)), (1, r(0.75))]);
        let inv = invert_toeplitz(&ToeplitzElem::toeplitz(f, d)).unwrap();
        assert!((inv.value.symbol.coeff(3) - r(0.8 * (-0.6f64).powi(3))).norm() < 1e-13);
        assert!(inv.value.compact.max_abs() < 1e-12);

        let a = ToeplitzElem::identity(d).add(&p(0, 0, d).into()).unwrap();
        let inv = invert_toeplitz(&a).unwrap();
        assert!((inv.value.compact.get(0, 0) - r(-0.5)).norm() < 1e-14);
        assert_eq!(inv.value.compact.support(), (1, 1));

        let z = ToeplitzElem::shift(d);
        assert!(matches!(invert_toeplitz(&z), Err(QdiskError::Singular(_))));
    }

    #[test]
    fn holo_examples() {
        let d = 8;
        let c = p(0, 1, d).add(&p(1, 0, d)).unwrap();
        let ct = Contour::around(c.matrix()).with_nodes(64);
        let id = holo_calc(&c, &|z| z, &ct).unwrap().value;
        assert!(max_abs_diff(id.matrix(), c.matrix()) < 1e-13);
        let sq = holo_calc(&c, &|z| z * z, &ct).unwrap().value;
        let want = c.matmul(&c).unwrap();
        assert!(max_abs_diff(sq.matrix(), want.matrix()) < 1e-10);

        let t = 0.4;
        let c = p(0, 0, d).scale(r(t));
        let ct = Contour { center: r(0.0), radius: 0.7, nodes: 128 };
        let v = holo_calc(&c, &|z| ONE / (ONE + z), &ct).unwrap().value;
        let w = invert_one_plus(&c).unwrap().value;
        assert!(max_abs_diff(v.matrix(), w.matrix()) < 1e-12);

        let tight = Contour { center: r(0.0), radius: 0.3, nodes: 64 };
        assert!(matches!(holo_calc(&c, &|z| z, &tight), Err(QdiskError::ContourTooTight { .. })));
    }

    #[test]
    fn smooth_examples() {
        let d = 8;
        let c = p(0, 1, d).add(&p(1, 0, d)).unwrap();
        let ext = PeriodicExtension::for_radius(&|x| x * x, 1.0).unwrap();
        let v = smooth_calc_sa(&c, &ext).unwrap();
        let want = p(0, 0, d).add(&p(1, 1, d)).unwrap();
        assert!(max_abs_diff(v.matrix(), want.matrix()) < 1e-10);

        let ext = PeriodicExtension::for_radius(&|x| x, 1.0).unwrap();
        let v = smooth_calc_sa(&c, &ext).unwrap();
        assert!(max_abs_diff(v.matrix(), c.matrix()) < 1e-10);

        let a = CompactOp::from_entries(d, [(0, 0, r(0.3)), (1, 2, C64::new(0.2, -0.5)), (2, 1, C64::new(0.2, 0.5))]).unwrap();
        let f = |x: f64| (x * 1.7).sin() * x;
        let ext = PeriodicExtension::for_radius(&f, 0.9).unwrap();
        let v = smooth_calc_sa(&a, &ext).unwrap();
        let oracle = hermitian_apply(&a.support_block(), f);
        assert!(max_abs_diff(&v.support_block(), &oracle) < 1e-10);

        let ns = p(0, 1, d);
        assert!(matches!(smooth_calc_sa(&ns, &ext), Err(QdiskError::NotSelfAdjoint(_))));
        let big = c.scale(r(3.0));
        assert!(matches!(smooth_calc_sa(&big, &ext), Err(QdiskError::BadExtension(_))));
    }

    #[test]
    fn toeplitz_square_through_window() {
        let d = 32;
        let g = Symbol::from_pairs([(-1, r(0.3)), (0, r(0.2)), (1, r(0.3))]);
        let a = ToeplitzElem::new(g, p(0, 0, d).scale(r(0.25)));
        let ext = PeriodicExtension::for_radius(&|x| x * x, 1.0).unwrap();
        let v = smooth_calc_sa_toeplitz(&a, &|x| x * x, &ext).unwrap();
        let sq = a.mul(&a).unwrap();
        assert!((v.symbol.coeff(2) - sq.symbol.coeff(2)).norm() < 1e-10);
        let q = d / 4;
        let diff = max_abs_diff(&v.realize().view((0, 0), (q, q)).into_owned(), &sq.realize().view((0, 0), (q, q)).into_owned());
        assert!(diff < 1e-9, "{diff}");
    }
}
