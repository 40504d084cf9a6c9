//! Trigonometric polynomials on the circle: symbols of Toeplitz operators.

use std::collections::BTreeMap;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{QdiskError, Result};
use crate::linalg::{binom, cis, C64, ZERO};

/// Absolute tolerance below which a coefficient or sample counts as zero.
pub const ZERO_TOL: f64 = 1e-12;

/// Grid points per unit of `band + 1` used for sup norms, before peak refinement.
pub const SUP_GRID_FACTOR: usize = 64;

/// Finitely supported Fourier series `f(x) = sum_n f_n e^{2 pi i n x}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "SymbolJson", into = "SymbolJson")]
pub struct Symbol {
    band: usize,
    /// `coeffs[n + band]` holds `f_n`.
    coeffs: Vec<C64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClNormValue {
    pub l: usize,
    pub value: f64,
}

impl Symbol {
    pub fn zero() -> Self {
        Symbol { band: 0, coeffs: vec![ZERO] }
    }

    pub fn constant(c: C64) -> Self {
        Symbol { band: 0, coeffs: vec![c] }
    }

    /// `c z^n` with `z = e^{2 pi i x}`.
    pub fn monomial(n: i64, c: C64) -> Self {
        let mut s = Self::with_band(n.unsigned_abs() as usize);
        s.set(n, c);
        s
    }

    pub fn with_band(band: usize) -> Self {
        Symbol { band, coeffs: vec![ZERO; 2 * band + 1] }
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, C64)>) -> Self {
        let pairs: Vec<(i64, C64)> = pairs.into_iter().collect();
        let band = pairs.iter().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0);
        let mut s = Self::with_band(band);
        for (n, c) in pairs {
            s.coeffs[(n + band as i64) as usize] += c;
        }
        s
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn coeff(&self, n: i64) -> C64 {
        if n.unsigned_abs() as usize > self.band {
            ZERO
        } else {
            self.coeffs[(n + self.band as i64) as usize]
        }
    }

    fn set(&mut self, n: i64, c: C64) {
        assert!(n.unsigned_abs() as usize <= self.band);
        self.coeffs[(n + self.band as i64) as usize] = c;
    }

    /// Pairs `(n, f_n)` in increasing `n`, zeros included.
    pub fn iter(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let b = self.band as i64;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - b, c))
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.iter().filter(|(_, c)| *c != ZERO)
    }

    /// Largest `|n|` with a nonzero coefficient.
    pub fn effective_band(&self) -> usize {
        self.nonzero().map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0)
    }

    pub fn lowest_frequency(&self) -> Option<i64> {
        self.nonzero().map(|(n, _)| n).next()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() < ZERO_TOL)
    }

    pub fn max_coeff_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |a, c| a.max(c.norm()))
    }

    /// Drop coefficients with modulus at most `tol` and shrink the band to fit.
    pub fn trimmed(&self, tol: f64) -> Self {
        Self::from_pairs(self.iter().filter(|(_, c)| c.norm() > tol))
    }

    /// Extend the declared band without changing the function.
    pub fn widened(&self, band: usize) -> Self {
        let band = band.max(self.band);
        let mut s = Self::with_band(band);
        for (n, c) in self.iter() {
            s.set(n, c);
        }
        s
    }

    pub fn eval(&self, x: f64) -> C64 {
        self.iter().filter(|(_, c)| *c != ZERO).map(|(n, c)| c * cis(2.0 * std::f64::consts::PI * n as f64 * x)).sum()
    }

    pub fn map_coeffs(&self, f: impl Fn(i64, C64) -> C64) -> Self {
        let b = self.band as i64;
        Symbol { band: self.band, coeffs: self.coeffs.iter().enumerate().map(|(i, &c)| f(i as i64 - b, c)).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map_coeffs(|_, c| c * s)
    }

    pub fn add(&self, other: &Symbol) -> Self {
        let band = self.band.max(other.band);
        let mut s = Self::with_band(band);
        for n in -(band as i64)..=band as i64 {
            s.set(n, self.coeff(n) + other.coeff(n));
        }
        s
    }

    pub fn sub(&self, other: &Symbol) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// Coefficient convolution; bands add.
    pub fn product(&self, other: &Symbol) -> Self {
        let mut s = Self::with_band(self.band + other.band);
        for (n, a) in self.nonzero() {
            for (m, b) in other.nonzero() {
                let idx = (n + m + s.band as i64) as usize;
                s.coeffs[idx] += a * b;
            }
        }
        s
    }

    /// `(1/2 pi i) d/dx`, i.e. `f_n -> n f_n`.
    pub fn derivative(&self) -> Self {
        self.map_coeffs(|n, c| c * n as f64)
    }

    pub fn derivative_pow(&self, j: usize) -> Self {
        self.map_coeffs(|n, c| c * (n as f64).powi(j as i32))
    }

    /// `(f_+, f_-)` with frequencies `n >= 0` and `n < 0`.
    pub fn split(&self) -> (Symbol, Symbol) {
        (self.map_coeffs(|n, c| if n >= 0 { c } else { ZERO }), self.map_coeffs(|n, c| if n < 0 { c } else { ZERO }))
    }

    /// Pointwise complex conjugate: coefficients `conj(f_{-n})`.
    pub fn conj(&self) -> Self {
        let mut s = Self::with_band(self.band);
        for (n, c) in self.iter() {
            s.set(-n, c.conj());
        }
        s
    }

    /// Samples `f(j/g)` for `j < g`; requires `g > 2 * effective_band()`.
    pub fn samples(&self, g: usize) -> Vec<C64> {
        assert!(g > 2 * self.effective_band(), "grid too coarse for band");
        let mut buf = vec![ZERO; g];
        for (n, c) in self.nonzero() {
            buf[n.rem_euclid(g as i64) as usize] += c;
        }
        fft_plan(g, true).process(&mut buf);
        buf
    }

    fn sup_grid_size(&self) -> usize {
        SUP_GRID_FACTOR * (self.effective_band() + 1)
    }

    /// Maximum of `|f|` over the uniform grid alone.
    pub fn sup_norm_grid(&self, g: usize) -> f64 {
        self.samples(g).iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    /// Sup norm: oversampled grid, then golden-section refinement of the leading peaks.
    pub fn sup_norm(&self) -> f64 {
        if self.nonzero().next().is_none() {
            return 0.0;
        }
        let g = self.sup_grid_size();
        let vals: Vec<f64> = self.samples(g).iter().map(|z| z.norm()).collect();
        let mut peaks: Vec<usize> = (0..g)
            .filter(|&j| {
                let prev = vals[(j + g - 1) % g];
                let next = vals[(j + 1) % g];
                vals[j] >= prev && vals[j] >= next
            })
            .collect();
        peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        peaks.truncate(4);
        let h = 1.0 / g as f64;
        let mut best = vals.iter().copied().fold(0.0, f64::max);
        for j in peaks {
            let x = j as f64 * h;
            best = best.max(golden_max(|t| self.eval(t).norm(), x - h, x + h));
        }
        best
    }

    /// `||f||_{C^l} = sum_j C(l,j) sup |D^j f|`.
    pub fn cl_norm(&self, l: usize) -> ClNormValue {
        let value = (0..=l).map(|j| binom(l, j) * self.derivative_pow(j).sup_norm()).sum();
        ClNormValue { l, value }
    }

    /// `sum_n |f_n| (1 + |n|)^l`.
    pub fn weighted_l1(&self, l: usize) -> f64 {
        self.iter().map(|(n, c)| c.norm() * (1.0 + n.abs() as f64).powi(l as i32)).sum()
    }

    /// Fourier coefficients of `1/f` up to `target_band`, from a sampled transform.
    pub fn reciprocal(&self, target_band: usize) -> Result<Reciprocal> {
        let g = (8 * target_band).max(16 * (self.effective_band() + 1)).max(64).next_power_of_two();
        let samples = self.samples(g);
        let min_abs = samples.iter().fold(f64::INFINITY, |a, z| a.min(z.norm()));
        if min_abs < ZERO_TOL {
            return Err(QdiskError::NearZeroSymbol { min_abs });
        }
        let mut buf: Vec<C64> = samples.iter().map(|z| z.inv()).collect();
        fft_plan(g, false).process(&mut buf);
        let scale = 1.0 / g as f64;
        let mut r = Self::with_band(target_band);
        for n in -(target_band as i64)..=target_band as i64 {
            r.set(n, buf[n.rem_euclid(g as i64) as usize] * scale);
        }
        let residual = self.product(&r).sub(&Symbol::constant(C64::new(1.0, 0.0))).sup_norm();
        Ok(Reciprocal { symbol: r, residual })
    }

    /// Fourier coefficients of a smooth function up to `band`, from `grid` samples.
    pub fn from_function(h: impl Fn(f64) -> C64, band: usize, grid: usize) -> Self {
        let g = grid.max(2 * band + 1);
        let mut buf: Vec<C64> = (0..g).map(|j| h(j as f64 / g as f64)).collect();
        fft_plan(g, false).process(&mut buf);
        let scale = 1.0 / g as f64;
        Self::from_pairs((-(band as i64)..=band as i64).map(|n| (n, buf[n.rem_euclid(g as i64) as usize] * scale)))
    }

    /// Winding number about the origin by the argument principle on a refined grid.
    pub fn winding_number(&self) -> Result<i64> {
        let mut g = (self.sup_grid_size()).max(64);
        loop {
            let s = self.samples(g);
            let min_abs = s.iter().fold(f64::INFINITY, |a, z| a.min(z.norm()));
            if min_abs < ZERO_TOL * self.max_coeff_abs().max(1.0) {
                return Err(QdiskError::NearZeroSymbol { min_abs });
            }
            let mut total = 0.0;
            let mut max_step: f64 = 0.0;
            for j in 0..g {
                let step = (s[(j + 1) % g] / s[j]).arg();
                max_step = max_step.max(step.abs());
                total += step;
            }
            if max_step < std::f64::consts::FRAC_PI_2 || g > (1 << 22) {
                return Ok((total / (2.0 * std::f64::consts::PI)).round() as i64);
            }
            g *= 4;
        }
    }
}

/// Reciprocal symbol together with `sup |f r - 1|`.
#[derive(Clone, Debug, PartialEq)]
pub struct Reciprocal {
    pub symbol: Symbol,
    pub residual: f64,
}

fn fft_plan(g: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(g)
    } else {
        planner.plan_fft_forward(g)
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    fc.max(fd)
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    n: i64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SymbolJson {
    coeffs: Vec<CoeffJson>,
}

impl From<SymbolJson> for Symbol {
    fn from(j: SymbolJson) -> Self {
        let mut merged: BTreeMap<i64, C64> = BTreeMap::new();
        for c in j.coeffs {
            *merged.entry(c.n).or_insert(ZERO) += C64::new(c.re, c.im);
        }
        Symbol::from_pairs(merged)
    }
}

impl From<Symbol> for SymbolJson {
    fn from(s: Symbol) -> Self {
        SymbolJson { coeffs: s.nonzero().map(|(n, c)| CoeffJson { n, re: c.re, im: c.im }).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    /// Dense-grid sup, independent of the FFT path.
    fn brute_sup(f: &Symbol, pts: usize) -> f64 {
        (0..pts).map(|j| f.eval(j as f64 / pts as f64).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn eval_examples() {
        assert_relative_eq!(Symbol::constant(c(1.0)).eval(0.37).re, 1.0);
        let z = Symbol::monomial(1, c(1.0)).eval(0.25);
        assert!((z - C64::new(0.0, 1.0)).norm() < 1e-15);
        let f = Symbol::from_pairs([(-1, c(1.0)), (1, c(1.0))]);
        assert!((f.eval(0.0) - c(2.0)).norm() < 1e-15);
    }

    #[test]
    fn cl_norm_examples() {
        assert_relative_eq!(Symbol::constant(c(1.0)).cl_norm(3).value, 1.0);
        let z = Symbol::monomial(1, c(1.0));
        assert_relative_eq!(z.cl_norm(2).value, 4.0, max_relative = 1e-12);
        for l in 0..8 {
            assert_relative_eq!(z.cl_norm(l).value, 2f64.powi(l as i32), max_relative = 1e-12);
        }
    }

    #[test]
    fn sup_matches_brute_force() {
        let f = Symbol::from_pairs([(-2, C64::new(0.3, -0.7)), (0, c(0.2)), (1, C64::new(-0.4, 0.9)), (3, c(0.25))]);
        let brute = brute_sup(&f, 200_000);
        let fast = f.sup_norm();
        assert!(fast >= brute - 1e-12);
        assert!((fast - brute) / brute < 1e-8);
    }

    #[test]
    fn weighted_l1_examples() {
        assert_relative_eq!(Symbol::constant(c(1.0)).weighted_l1(5), 1.0);
        assert_relative_eq!(Symbol::monomial(-2, c(1.0)).weighted_l1(1), 3.0);
    }

    #[test]
    fn split_derivative_product() {
        let (a, b, cc) = (C64::new(1.0, 2.0), c(3.0), C64::new(0.0, -1.0));
        let f = Symbol::from_pairs([(-1, a), (0, b), (2, cc)]);
        let (p, m) = f.split();
        assert_eq!(p.trimmed(0.0), Symbol::from_pairs([(0, b), (2, cc)]));
        assert_eq!(m.trimmed(0.0), Symbol::from_pairs([(-1, a)]));
        assert_eq!(Symbol::monomial(3, c(1.0)).derivative(), Symbol::monomial(3, c(3.0)));
        let prod = Symbol::monomial(1, c(1.0)).product(&Symbol::monomial(-1, c(1.0)));
        assert_eq!(prod.trimmed(0.0), Symbol::constant(c(1.0)));
    }

    #[test]
    fn reciprocal_examples() {
        let r = Symbol::constant(c(2.0)).reciprocal(4).unwrap();
        assert!((r.symbol.coeff(0) - c(0.5)).norm() < 1e-15);
        assert!(r.symbol.trimmed(1e-15).effective_band() == 0);

        let f = Symbol::from_pairs([(0, c(1.25)), (1, c(0.75))]);
        let r = f.reciprocal(40).unwrap();
        for n in -40..=40i64 {
            let want = if n >= 0 { 0.8 * (-0.6f64).powi(n as i32) } else { 0.0 };
            assert!((r.symbol.coeff(n) - c(want)).norm() < 1e-12, "n = {n}");
        }
        assert!(r.residual < 1e-8);

        let g = Symbol::from_pairs([(0, c(1.0)), (1, c(1.0))]);
        assert!(matches!(g.reciprocal(8), Err(QdiskError::NearZeroSymbol { .. })));
    }

    #[test]
    fn winding_numbers() {
        assert_eq!(Symbol::monomial(1, c(1.0)).winding_number().unwrap(), 1);
        assert_eq!(Symbol::monomial(-3, c(2.0)).winding_number().unwrap(), -3);
        let f = Symbol::from_pairs([(0, c(1.0)), (2, c(0.3)), (-1, c(0.2))]);
        assert_eq!(f.winding_number().unwrap(), 0);
    }

    #[test]
    fn json_round_trip() {
        let f = Symbol::from_pairs([(-2, C64::new(0.5, -1.0)), (3, c(2.0))]);
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"coeffs":[{"n":-2,"re":0.5,"im":-1.0},{"n":3,"re":2.0,"im":0.0}]}"#);
        let back: Symbol = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
