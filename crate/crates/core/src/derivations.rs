//! Derivations: covariant ones from coefficient data, Fourier components,
//! the lift `delta = [alpha, .]` from generator data, and the vector-field lifts `delta_F`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{QdiskError, Result};
use crate::linalg::{cis, max_abs_diff, CMat, C64, ZERO};
use crate::operators::{compact_times_toeplitz, shift, toeplitz_times_compact, CompactOp, ToeplitzElem};
use crate::sequences::Symbol;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Relative tolerance for the generator compatibility conditions.
pub const COMPAT_TOL: f64 = 1e-10;

/// A derivation given by its action.
pub trait Derivation: Sync {
    fn apply(&self, a: &ToeplitzElem) -> Result<ToeplitzElem>;

    fn apply_compact(&self, a: &CompactOp) -> Result<CompactOp> {
        let r = self.apply(&a.clone().into())?;
        Ok(r.compact)
    }
}

/// `delta_K = [K, .]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct DeltaK;

impl Derivation for DeltaK {
    fn apply(&self, a: &ToeplitzElem) -> Result<ToeplitzElem> {
        Ok(a.delta_k())
    }
}

/// `[alpha, .]` for a fixed element.
#[derive(Clone, Debug)]
pub struct Inner(pub ToeplitzElem);

impl Derivation for Inner {
    fn apply(&self, a: &ToeplitzElem) -> Result<ToeplitzElem> {
        self.0.commutator(a)
    }
}

impl<F> Derivation for F
where
    F: Fn(&ToeplitzElem) -> Result<ToeplitzElem> + Sync,
{
    fn apply(&self, a: &ToeplitzElem) -> Result<ToeplitzElem> {
        self(a)
    }
}

/// Sum of derivations.
pub struct Sum<'a>(pub Vec<&'a dyn Derivation>);

impl Derivation for Sum<'_> {
    fn apply(&self, a: &ToeplitzElem) -> Result<ToeplitzElem> {
        let mut acc = ToeplitzElem::from(CompactOp::zeros(a.dim()));
        for d in &self.0 {
            acc = acc.add(&d.apply(a)?)?;
        }
        Ok(acc)
    }
}

/// Matrix position of the coefficient `beta_j` in the generator of an `n`-covariant derivation.
fn covariant_slot(n: i64, j: usize) -> (usize, usize) {
    if n >= 0 {
        (j, j + n as usize)
    } else {
        (j + n.unsigned_abs() as usize, j)
    }
}

/// `|beta_j| <= C (1 + j)^N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthCert {
    pub c: f64,
    pub n: u32,
}

/// `[sum_j beta_j P_{j,j+n}, .]` for `n >= 0`, `[sum_j beta_j P_{j-n,j}, .]` for `n < 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariantDerivation {
    pub n: i64,
    pub beta: Vec<C64>,
    pub growth_cert: GrowthCert,
}

impl CovariantDerivation {
    pub fn new(n: i64, beta: Vec<C64>, growth_cert: GrowthCert) -> Result<Self> {
        for (j, b) in beta.iter().enumerate() {
            let bound = growth_cert.c * (1.0 + j as f64).powi(growth_cert.n as i32);
            if b.norm() > bound * (1.0 + 1e-12) {
                return Err(QdiskError::GrowthViolation { n, j, value: b.norm(), bound });
            }
        }
        Ok(CovariantDerivation { n, beta, growth_cert })
    }

    /// Certificate with the given exponent and the smallest constant.
    pub fn with_exponent(n: i64, beta: Vec<C64>, exponent: u32) -> Self {
        let c = beta.iter().enumerate().map(|(j, b)| b.norm() / (1.0 + j as f64).powi(exponent as i32)).fold(0.0, f64::max);
        CovariantDerivation { n, beta, growth_cert: GrowthCert { c, n: exponent } }
    }

    pub fn generator(&self, dim: usize) -> Result<CompactOp> {
        CompactOp::from_entries(
            dim,
            self.beta.iter().enumerate().filter(|(_, b)| **b != ZERO).map(|(j, &b)| {
                let (r, c) = covariant_slot(self.n, j);
                (r, c, b)
            }),
        )
        .map_err(|_| QdiskError::SupportOverflow { needed: self.beta.len() + self.n.unsigned_abs() as usize, dim })
    }
}

impl Derivation for CovariantDerivation {
    fn apply(&self, a: &ToeplitzElem) -> Result<ToeplitzElem> {
        ToeplitzElem::from(self.generator(a.dim())?).commutator(a)
    }
}

pub fn apply_covariant(d: &CovariantDerivation, a: &CompactOp) -> Result<CompactOp> {
    d.generator(a.dim())?.commutator(a)
}

/// Finite two-index coefficient table `beta_{n,j}` with the growth bound
/// `|beta_{n,j}| <= constant (1+j)^r / (1+|n|)^p`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralDerivation {
    pub betas: BTreeMap<(i64, usize), C64>,
    pub r: f64,
    pub p: f64,
    pub constant: f64,
}

impl GeneralDerivation {
    pub fn new(betas: BTreeMap<(i64, usize), C64>, r: f64, p: f64, constant: f64) -> Result<Self> {
        let d = GeneralDerivation { betas, r, p, constant };
        d.check_growth()?;
        Ok(d)
    }

    pub fn bound(&self, n: i64, j: usize) -> f64 {
        self.constant * (1.0 + j as f64).powf(self.r) / (1.0 + n.abs() as f64).powf(self.p)
    }

    pub fn check_growth(&self) -> Result<()> {
        for (&(n, j), b) in &self.betas {
            let bound = self.bound(n, j);
            if b.norm() > bound * (1.0 + 1e-12) {
                return Err(QdiskError::GrowthViolation { n, j, value: b.norm(), bound });
            }
        }
        Ok(())
    }

    pub fn generator(&self, dim: usize) -> Result<CompactOp> {
        let mut m = CMat::zeros(dim, dim);
        for (&(n, j), &b) in &self.betas {
            let (r, c) = covariant_slot(n, j);
            if r >= dim || c >= dim {
                return Err(QdiskError::SupportOverflow { needed: r.max(c) + 1, dim });
            }
            m[(r, c)] += b;
        }
        Ok(CompactOp::from_matrix(m))
    }

    /// Largest `|n|` present.
    pub fn band(&self) -> usize {
        self.betas.keys().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0)
    }
}

impl Derivation for GeneralDerivation {
    fn apply(&self, a: &ToeplitzElem) -> Result<ToeplitzElem> {
        self.check_growth()?;
        ToeplitzElem::from(self.generator(a.dim())?).commutator(a)
    }
}

pub fn apply_general(d: &GeneralDerivation, a: &CompactOp) -> Result<CompactOp> {
    d.check_growth()?;
    d.generator(a.dim())?.commutator(a)
}

/// `delta_n(a) = int e^{2 pi i n theta} rho_theta^{-1} delta rho_theta (a) dtheta`
/// by the trapezoid rule on `quad_points` uniform nodes.
pub struct FourierComponent<'a> {
    pub d: &'a dyn Derivation,
    pub n: i64,
    pub quad_points: usize,
}

impl<'a> FourierComponent<'a> {
    pub fn new(d: &'a dyn Derivation, n: i64, quad_points: usize) -> Self {
        FourierComponent { d, n, quad_points }
    }

    /// Whether the rule is exact for a derivation whose components vanish beyond `band`.
    pub fn alias_free(&self, band: usize) -> bool {
        self.quad_points > band + self.n.unsigned_abs() as usize
    }
}

impl Derivation for FourierComponent<'_> {
    fn apply(&self, a: &ToeplitzElem) -> Result<ToeplitzElem> {
        let q = self.quad_points.max(1);
        let mut acc = ToeplitzElem::from(CompactOp::zeros(a.dim()));
        for i in 0..q {
            let th = i as f64 / q as f64;
            let v = self.d.apply(&a.rho_theta(th))?.rho_theta(-th);
            acc = acc.add(&v.scale(cis(TAU * self.n as f64 * th)))?;
        }
        Ok(acc.scale(C64::new(1.0 / q as f64, 0.0)))
    }
}

pub fn fourier_component(d: &dyn Derivation, n: i64, quad_points: usize) -> FourierComponent<'_> {
    FourierComponent::new(d, n, quad_points)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftResiduals {
    /// `max |cU + U*b|`.
    pub compatibility: f64,
    /// `max |[T(f)+alpha~, U] - b|`, computed exactly.
    pub commutator_u: f64,
    /// `max |[T(f)+alpha~, U*] - c|`, computed exactly.
    pub commutator_u_star: f64,
    /// Same two quantities from window matrices, on rows and columns `< dim - 1`.
    pub window_u: f64,
    pub window_u_star: f64,
}

impl LiftResiduals {
    pub fn max(&self) -> f64 {
        self.commutator_u.max(self.commutator_u_star).max(self.window_u).max(self.window_u_star)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftResult {
    pub f: Symbol,
    pub alpha_tilde: CompactOp,
    pub alpha_realized: CMat,
    pub residuals: LiftResiduals,
}

impl LiftResult {
    pub fn alpha(&self) -> ToeplitzElem {
        ToeplitzElem::new(self.f.clone(), self.alpha_tilde.clone())
    }
}

fn max_abs_elem(a: &ToeplitzElem) -> f64 {
    a.symbol.max_coeff_abs().max(a.compact.max_abs())
}

/// Find `alpha = T(f) + alpha~` with `[alpha, U] = b`, `[alpha, U*] = c`, normalized by `alpha_0(0) = 0`.
pub fn lift_derivation(b: &CompactOp, c: &CompactOp) -> Result<LiftResult> {
    if b.dim() != c.dim() {
        return Err(QdiskError::DimMismatch(b.dim(), c.dim()));
    }
    let dim = b.dim();
    let scale = b.max_abs().max(c.max_abs()).max(1.0);
    let u = ToeplitzElem::shift(dim);
    let us = ToeplitzElem::shift_adjoint(dim);
    let bt = ToeplitzElem::from(b.clone());
    let ct = ToeplitzElem::from(c.clone());
    let compat = ct.mul(&u)?.add(&us.mul(&bt)?)?;
    let compatibility = max_abs_elem(&compat);
    if compatibility > COMPAT_TOL * scale {
        return Err(QdiskError::CompatibilityViolation { residual: compatibility });
    }

    let beta = b.to_modes();
    let gamma = c.to_modes();
    let mut f_pairs: Vec<(i64, C64)> = Vec::new();
    let mut tilde: BTreeMap<i64, Vec<C64>> = BTreeMap::new();

    // n >= 1: alpha_n(k) = -sum_{j<=k} gamma_{n-1}(j).
    for (&m, seq) in gamma.modes.range(0..) {
        let n = m + 1;
        let total: C64 = seq.iter().sum();
        let mut run = ZERO;
        let t: Vec<C64> = seq
            .iter()
            .map(|&g| {
                run -= g;
                run + total
            })
            .collect();
        f_pairs.push((n, -total));
        tilde.insert(n, t);
    }
    // n <= 0: alpha_n(k) = sum_{j<=k} beta_{n+1}(j), shifted by one step when n = 0.
    for (&m, seq) in beta.modes.range(..=1) {
        let n = m - 1;
        let total: C64 = seq.iter().sum();
        let mut run = ZERO;
        let mut t = Vec::with_capacity(seq.len() + 1);
        if n == 0 {
            t.push(-total);
            for &x in seq {
                run += x;
                t.push(run - total);
            }
        } else {
            for &x in seq {
                run += x;
                t.push(run - total);
            }
        }
        f_pairs.push((n, total));
        tilde.insert(n, t);
    }

    let f = Symbol::from_pairs(f_pairs.into_iter().filter(|(_, z)| *z != ZERO));
    let modes = crate::operators::FourierModes { modes: tilde };
    let alpha_tilde = modes.to_matrix(dim)?;
    let alpha = ToeplitzElem::new(f.clone(), alpha_tilde.clone());

    let du = alpha.commutator(&u)?.sub(&bt)?;
    let dus = alpha.commutator(&us)?.sub(&ct)?;
    let alpha_realized = alpha.realize();
    let uw = shift(dim);
    let usw = uw.adjoint();
    let inner = dim.saturating_sub(1);
    let cut = |m: CMat| m.view((0, 0), (inner, inner)).into_owned();
    let window_u = max_abs_diff(&cut(&alpha_realized * &uw - &uw * &alpha_realized), &cut(b.matrix().clone()));
    let window_u_star = max_abs_diff(&cut(&alpha_realized * &usw - &usw * &alpha_realized), &cut(c.matrix().clone()));

    Ok(LiftResult {
        f,
        alpha_tilde,
        alpha_realized,
        residuals: LiftResiduals {
            compatibility,
            commutator_u: max_abs_elem(&du),
            commutator_u_star: max_abs_elem(&dus),
            window_u,
            window_u_star,
        },
    })
}

/// Admissible generator data: `b` free, `c` fixed by `c_{k,l+1} = -b_{k+1,l}` apart from its first column.
pub fn admissible_pair(b: &CompactOp, first_column: &[C64]) -> Result<CompactOp> {
    let dim = b.dim();
    let mut m = CMat::zeros(dim, dim);
    for (k, &z) in first_column.iter().enumerate() {
        if k >= dim {
            return Err(QdiskError::SupportOverflow { needed: k + 1, dim });
        }
        m[(k, 0)] = z;
    }
    for (k, l, z) in b.entries() {
        if k == 0 {
            continue;
        }
        if l + 1 >= dim {
            return Err(QdiskError::SupportOverflow { needed: l + 2, dim });
        }
        m[(k - 1, l + 1)] = -z;
    }
    Ok(CompactOp::from_matrix(m))
}

/// `delta_F = [T(F_+) K + K T(F_-), .]`, evaluated through `T(F) K + T(D F_-)`.
pub fn delta_f(f_field: &Symbol, a: &ToeplitzElem) -> Result<ToeplitzElem> {
    let dim = a.dim();
    let (_, fm) = f_field.split();
    let dfm = fm.derivative();
    let tf = ToeplitzElem::toeplitz(f_field.clone(), dim);
    let td = ToeplitzElem::toeplitz(dfm.clone(), dim);
    let tg = ToeplitzElem::toeplitz(a.symbol.clone(), dim);
    let tdg = ToeplitzElem::toeplitz(a.symbol.derivative(), dim);

    let mut out = tf.mul(&tdg)?;
    let comm = tf.commutator(&tg)?.compact.label_right();
    out.compact = out.compact.add(&comm)?;
    out.compact = out.compact.add(&td.commutator(&tg)?.compact)?;

    let c = &a.compact;
    if !c.is_zero() {
        let left = toeplitz_times_compact(f_field, &c.label_left())?;
        let right = compact_times_toeplitz(c, f_field)?.label_right();
        out.compact = out.compact.add(&left)?.sub(&right)?;
        let tdc = td.mul(&ToeplitzElem::from(c.clone()))?.sub(&ToeplitzElem::from(c.clone()).mul(&td)?)?;
        out.compact = out.compact.add(&tdc.compact)?;
    }
    Ok(out)
}

/// `delta_F` as a [`Derivation`].
#[derive(Clone, Debug)]
pub struct DeltaF(pub Symbol);

impl Derivation for DeltaF {
    fn apply(&self, a: &ToeplitzElem) -> Result<ToeplitzElem> {
        delta_f(&self.0, a)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub f_field: Symbol,
    pub inner: LiftResult,
    /// `max |delta(U*) U + U* delta(U)|` over symbol and compact parts.
    pub unit_relation_residual: f64,
    /// `max |q(delta(U*)) + F zbar|`.
    pub symbol_residual: f64,
}

/// Split a derivation given on generators into `delta_F + [alpha~, .]`.
pub fn classify(b: &ToeplitzElem, c: &ToeplitzElem) -> Result<Classification> {
    let dim = b.dim();
    let u = ToeplitzElem::shift(dim);
    let us = ToeplitzElem::shift_adjoint(dim);
    let scale = max_abs_elem(b).max(max_abs_elem(c)).max(1.0);
    let rel = c.mul(&u)?.add(&us.mul(b)?)?;
    let unit_relation_residual = max_abs_elem(&rel);
    if unit_relation_residual > COMPAT_TOL * scale {
        return Err(QdiskError::CompatibilityViolation { residual: unit_relation_residual });
    }
    let lo = b.symbol.band() as i64;
    let f_field = Symbol::from_pairs((-lo - 1..lo).map(|n| (n, b.symbol.coeff(n + 1))).filter(|(_, z)| *z != ZERO));
    let expect_c = f_field.product(&Symbol::monomial(-1, C64::new(-1.0, 0.0)));
    let symbol_residual = c.symbol.sub(&expect_c).max_coeff_abs();
    if symbol_residual > COMPAT_TOL * scale {
        return Err(QdiskError::CompatibilityViolation { residual: symbol_residual });
    }
    let bt = b.sub(&delta_f(&f_field, &u)?)?;
    let ct = c.sub(&delta_f(&f_field, &us)?)?;
    let inner = lift_derivation(&bt.compact, &ct.compact)?;
    Ok(Classification { f_field, inner, unit_relation_residual, symbol_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn p(k: usize, l: usize, dim: usize) -> CompactOp {
        CompactOp::unit(k, l, dim).unwrap()
    }

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn covariant_examples() {
        let d = 12;
        let dk = CovariantDerivation::with_exponent(0, (0..10).map(|j| r(j as f64)).collect(), 1);
        for (k, l) in [(3, 1), (0, 5), (2, 2)] {
            assert_eq!(apply_covariant(&dk, &p(k, l, d)).unwrap(), p(k, l, d).delta_k());
        }
        let flat = CovariantDerivation::with_exponent(0, vec![r(2.5); 10], 0);
        assert!(apply_covariant(&flat, &p(3, 7, d)).unwrap().is_zero());
        let one = CovariantDerivation::with_exponent(1, vec![ONE], 0);
        assert_eq!(apply_covariant(&one, &p(1, 1, d)).unwrap(), p(0, 1, d));
    }

    #[test]
    fn growth_violation() {
        let err = CovariantDerivation::new(0, vec![r(1.0), r(5.0)], GrowthCert { c: 1.0, n: 1 });
        assert!(matches!(err, Err(QdiskError::GrowthViolation { j: 1, .. })));
    }

    #[test]
    fn general_single_mode_matches_covariant() {
        let d = 10;
        let mut betas = BTreeMap::new();
        betas.insert((-2, 3), r(1.5));
        let g = GeneralDerivation::new(betas, 0.0, 0.0, 2.0).unwrap();
        let cov = CovariantDerivation::with_exponent(-2, vec![ZERO, ZERO, ZERO, r(1.5)], 0);
        let a = CompactOp::from_entries(d, [(5, 3, ONE), (1, 2, r(-2.0))]).unwrap();
        assert_eq!(apply_general(&g, &a).unwrap(), apply_covariant(&cov, &a).unwrap());
    }

    #[test]
    fn delta_k_has_only_component_zero() {
        let d = 10;
        let a: ToeplitzElem = ToeplitzElem::new(Symbol::from_pairs([(1, ONE), (-2, r(0.5))]), p(1, 3, d));
        for n in -3..=3 {
            let comp = fourier_component(&DeltaK, n, 7);
            let got = comp.apply(&a).unwrap();
            let want = if n == 0 { a.delta_k() } else { ToeplitzElem::from(CompactOp::zeros(d)) };
            let diff = got.sub(&want).unwrap();
            assert!(diff.symbol.max_coeff_abs() < 1e-12 && diff.compact.max_abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn lift_examples() {
        let d = 8;
        let z = CompactOp::zeros(d);
        let res = lift_derivation(&z, &z).unwrap();
        assert!(res.f.is_zero() && res.alpha_tilde.is_zero());

        let b = p(1, 0, d).scale(r(-1.0));
        let c = p(0, 1, d);
        let res = lift_derivation(&b, &c).unwrap();
        assert_eq!(res.f.trimmed(0.0), Symbol::constant(r(-1.0)));
        assert_eq!(res.alpha_tilde, p(0, 0, d));
        assert!(res.residuals.max() < 1e-14);

        let bad = lift_derivation(&b, &p(0, 2, d));
        assert!(matches!(bad, Err(QdiskError::CompatibilityViolation { .. })));
    }

    #[test]
    fn delta_f_examples() {
        let d = 10;
        let u = ToeplitzElem::shift(d);
        let one = delta_f(&Symbol::constant(ONE), &u).unwrap();
        assert_eq!(one.symbol.trimmed(0.0), Symbol::monomial(1, ONE));
        assert!(one.compact.is_zero());
        let z = delta_f(&Symbol::monomial(1, ONE), &u).unwrap();
        assert_eq!(z.symbol.trimmed(0.0), Symbol::monomial(2, ONE));
        assert!(z.compact.is_zero());
    }

    #[test]
    fn classify_examples() {
        let d = 10;
        let u = ToeplitzElem::shift(d);
        let us = ToeplitzElem::shift_adjoint(d);
        let cl = classify(&u, &us.scale(r(-1.0))).unwrap();
        assert_eq!(cl.f_field.trimmed(0.0), Symbol::constant(ONE));
        assert!(cl.inner.f.is_zero() && cl.inner.alpha_tilde.is_zero());

        let b = ToeplitzElem::from(p(1, 0, d).scale(r(-1.0)));
        let c = ToeplitzElem::from(p(0, 1, d));
        let cl = classify(&b, &c).unwrap();
        assert!(cl.f_field.is_zero());
        assert_eq!(cl.inner.alpha_tilde, p(0, 0, d));

        let fz = Symbol::monomial(1, ONE);
        let b = u.mul(&ToeplitzElem::toeplitz(fz.clone(), d)).unwrap();
        let c = delta_f(&fz, &us).unwrap();
        let cl = classify(&b, &c).unwrap();
        assert_eq!(cl.f_field.trimmed(0.0), fz);
        assert!(cl.inner.f.is_zero() && cl.inner.alpha_tilde.is_zero());
    }
}
