//! Operators on l^2(Z>=0): finitely supported compacts, Fourier modes, and `T(f) + c`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{QdiskError, Result};
use crate::linalg::{cis, CMat, C64, ONE, ZERO};
use crate::sequences::Symbol;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// A finitely supported operator stored in a `dim x dim` window.
///
/// The support is the tight box `[0, rows) x [0, cols)` of the nonzero entries,
/// so entries outside it are zero by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CompactJson", into = "CompactJson")]
pub struct CompactOp {
    m: CMat,
    rows: usize,
    cols: usize,
}

impl CompactOp {
    pub fn zeros(dim: usize) -> Self {
        CompactOp { m: CMat::zeros(dim, dim), rows: 0, cols: 0 }
    }

    pub fn from_matrix(m: CMat) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "window must be square");
        let mut rows = 0;
        let mut cols = 0;
        for l in 0..m.ncols() {
            for k in 0..m.nrows() {
                if m[(k, l)] != ZERO {
                    rows = rows.max(k + 1);
                    cols = cols.max(l + 1);
                }
            }
        }
        CompactOp { m, rows, cols }
    }

    /// Zero out entries below `tol * max|entry|` before fixing the support.
    pub fn from_matrix_chopped(mut m: CMat, tol: f64) -> Self {
        let cut = tol * m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        for z in m.iter_mut() {
            if z.norm() <= cut {
                *z = ZERO;
            }
        }
        Self::from_matrix(m)
    }

    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        let mut m = CMat::zeros(dim, dim);
        for (k, l, z) in entries {
            if k >= dim || l >= dim {
                return Err(QdiskError::IndexOutOfWindow { k, l, dim });
            }
            m[(k, l)] += z;
        }
        Ok(Self::from_matrix(m))
    }

    /// Matrix unit `P_{k,l}` sending `E_l` to `E_k`.
    pub fn unit(k: usize, l: usize, dim: usize) -> Result<Self> {
        Self::from_entries(dim, [(k, l, ONE)])
    }

    /// Projection onto the first `n` basis vectors.
    pub fn projection_below(n: usize, dim: usize) -> Result<Self> {
        if n > dim {
            return Err(QdiskError::SupportOverflow { needed: n, dim });
        }
        Self::from_entries(dim, (0..n).map(|k| (k, k, ONE)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }

    /// `(rows, cols)` bound of the nonzero entries.
    pub fn support(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Largest of the two support bounds.
    pub fn extent(&self) -> usize {
        self.rows.max(self.cols)
    }

    pub fn get(&self, k: usize, l: usize) -> C64 {
        if k < self.dim() && l < self.dim() {
            self.m[(k, l)]
        } else {
            ZERO
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rows == 0
    }

    /// Nonzero entries in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.cols).flat_map(move |l| {
            (0..self.rows).filter_map(move |k| {
                let z = self.m[(k, l)];
                (z != ZERO).then_some((k, l, z))
            })
        })
    }

    /// The square `s x s` block with `s = extent()`, holding all nonzero entries.
    pub fn support_block(&self) -> CMat {
        let s = self.extent();
        self.m.view((0, 0), (s, s)).into_owned()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().fold(0.0, |a, (_, _, z)| a.max(z.norm()))
    }

    fn check_dim(&self, other: &CompactOp) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(QdiskError::DimMismatch(self.dim(), other.dim()));
        }
        Ok(())
    }

    pub fn add(&self, other: &CompactOp) -> Result<CompactOp> {
        self.check_dim(other)?;
        Ok(Self::from_matrix(&self.m + &other.m))
    }

    pub fn sub(&self, other: &CompactOp) -> Result<CompactOp> {
        self.check_dim(other)?;
        Ok(Self::from_matrix(&self.m - &other.m))
    }

    pub fn scale(&self, s: C64) -> CompactOp {
        Self::from_matrix(&self.m * s)
    }

    pub fn adjoint(&self) -> CompactOp {
        CompactOp { m: self.m.adjoint(), rows: self.cols, cols: self.rows }
    }

    /// Product of two compacts; always exact inside the window.
    pub fn matmul(&self, other: &CompactOp) -> Result<CompactOp> {
        self.check_dim(other)?;
        let inner = self.cols.min(other.rows);
        let mut m = CMat::zeros(self.dim(), self.dim());
        if inner > 0 && self.rows > 0 && other.cols > 0 {
            let a = self.m.view((0, 0), (self.rows, inner));
            let b = other.m.view((0, 0), (inner, other.cols));
            m.view_mut((0, 0), (self.rows, other.cols)).copy_from(&(a * b));
        }
        Ok(Self::from_matrix(m))
    }

    pub fn commutator(&self, other: &CompactOp) -> Result<CompactOp> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Entry-wise map `a_{k,l} -> w(k,l) a_{k,l}`.
    pub fn weighted(&self, w: impl Fn(usize, usize) -> C64) -> CompactOp {
        let mut m = self.m.clone();
        for l in 0..self.cols {
            for k in 0..self.rows {
                m[(k, l)] *= w(k, l);
            }
        }
        Self::from_matrix(m)
    }

    /// `K c`.
    pub fn label_left(&self) -> CompactOp {
        self.weighted(|k, _| C64::new(k as f64, 0.0))
    }

    /// `c K`.
    pub fn label_right(&self) -> CompactOp {
        self.weighted(|_, l| C64::new(l as f64, 0.0))
    }

    /// `delta_K(a) = [K, a]`, entries `(k - l) a_{k,l}`.
    pub fn delta_k(&self) -> CompactOp {
        self.weighted(|k, l| C64::new(k as f64 - l as f64, 0.0))
    }

    /// Circle action `rho_theta`: entries pick up `e^{2 pi i (l - k) theta}`.
    pub fn rho_theta(&self, theta: f64) -> CompactOp {
        self.weighted(|k, l| cis(TAU * (l as f64 - k as f64) * theta))
    }

    /// Integral-kernel coefficients, `a_{k,l}` stored at `(k, -l)`.
    pub fn kernel_coeffs(&self) -> BTreeMap<(i64, i64), C64> {
        self.entries().map(|(k, l, z)| ((k as i64, -(l as i64)), z)).collect()
    }

    /// Fourier modes: `a_n(k)` sits at `(k + n, k)` for `n >= 0` and `(k, k - n)` for `n < 0`.
    pub fn to_modes(&self) -> FourierModes {
        let mut modes: BTreeMap<i64, Vec<C64>> = BTreeMap::new();
        for (r, c, z) in self.entries() {
            let n = r as i64 - c as i64;
            let k = if n >= 0 { c } else { r };
            let v = modes.entry(n).or_default();
            if v.len() <= k {
                v.resize(k + 1, ZERO);
            }
            v[k] = z;
        }
        FourierModes { modes }
    }

    /// Rescale to a different window size, failing if the support does not fit.
    pub fn with_dim(&self, dim: usize) -> Result<CompactOp> {
        if self.extent() > dim {
            return Err(QdiskError::SupportOverflow { needed: self.extent(), dim });
        }
        let mut m = CMat::zeros(dim, dim);
        let s = self.extent();
        m.view_mut((0, 0), (s, s)).copy_from(&self.m.view((0, 0), (s, s)));
        Ok(Self::from_matrix(m))
    }
}

/// Formal series `sum_{n>=0} U^n a_n(K) + sum_{n<0} a_n(K) (U*)^{-n}` with finitely many terms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FourierModes {
    pub modes: BTreeMap<i64, Vec<C64>>,
}

impl FourierModes {
    pub fn to_matrix(&self, dim: usize) -> Result<CompactOp> {
        let mut m = CMat::zeros(dim, dim);
        for (&n, seq) in &self.modes {
            for (k, &z) in seq.iter().enumerate() {
                if z == ZERO {
                    continue;
                }
                let (r, c) = if n >= 0 { (k + n as usize, k) } else { (k, k + n.unsigned_abs() as usize) };
                if r >= dim || c >= dim {
                    return Err(QdiskError::SupportOverflow { needed: r.max(c) + 1, dim });
                }
                m[(r, c)] = z;
            }
        }
        Ok(CompactOp::from_matrix(m))
    }

    pub fn mode(&self, n: i64, k: usize) -> C64 {
        self.modes.get(&n).and_then(|v| v.get(k).copied()).unwrap_or(ZERO)
    }
}

/// Diagonal operator `f(K)`: tabulated values followed by a constant tail.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalOp {
    pub values: Vec<C64>,
    pub tail: C64,
}

impl DiagonalOp {
    pub fn from_fn(dim: usize, f: impl Fn(usize) -> C64) -> Self {
        DiagonalOp { values: (0..dim).map(f).collect(), tail: ZERO }
    }

    pub fn value(&self, k: usize) -> C64 {
        self.values.get(k).copied().unwrap_or(self.tail)
    }

    pub fn window(&self, dim: usize) -> CMat {
        CMat::from_diagonal(&nalgebra::DVector::from_iterator(dim, (0..dim).map(|k| self.value(k))))
    }
}

/// Window of the unilateral shift `U E_k = E_{k+1}`.
pub fn shift(dim: usize) -> CMat {
    CMat::from_fn(dim, dim, |k, l| if k == l + 1 { ONE } else { ZERO })
}

/// Window of the label operator `K E_k = k E_k`.
pub fn label_operator(dim: usize) -> CMat {
    CMat::from_fn(dim, dim, |k, l| if k == l { C64::new(k as f64, 0.0) } else { ZERO })
}

/// Window of `T(f)`, entries `f_{k-l}`.
pub fn toeplitz_window(f: &Symbol, dim: usize) -> CMat {
    CMat::from_fn(dim, dim, |k, l| f.coeff(k as i64 - l as i64))
}

/// `T(f) + c` with `f` a trigonometric polynomial and `c` finitely supported.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzElem {
    pub symbol: Symbol,
    pub compact: CompactOp,
}

impl From<CompactOp> for ToeplitzElem {
    fn from(c: CompactOp) -> Self {
        ToeplitzElem { symbol: Symbol::zero(), compact: c }
    }
}

impl ToeplitzElem {
    pub fn new(symbol: Symbol, compact: CompactOp) -> Self {
        ToeplitzElem { symbol, compact }
    }

    pub fn toeplitz(f: Symbol, dim: usize) -> Self {
        ToeplitzElem { symbol: f, compact: CompactOp::zeros(dim) }
    }

    pub fn identity(dim: usize) -> Self {
        Self::toeplitz(Symbol::constant(ONE), dim)
    }

    /// `T(z) = U`.
    pub fn shift(dim: usize) -> Self {
        Self::toeplitz(Symbol::monomial(1, ONE), dim)
    }

    /// `T(z^{-1}) = U*`.
    pub fn shift_adjoint(dim: usize) -> Self {
        Self::toeplitz(Symbol::monomial(-1, ONE), dim)
    }

    pub fn dim(&self) -> usize {
        self.compact.dim()
    }

    /// The quotient map: `T(f) + c -> f`.
    pub fn quotient(&self) -> &Symbol {
        &self.symbol
    }

    /// Window matrix of `T(f) + c`.
    pub fn realize(&self) -> CMat {
        toeplitz_window(&self.symbol, self.dim()) + self.compact.matrix()
    }

    /// Realization in a window of size `dim`; the compact part must fit.
    pub fn realize_in(&self, dim: usize) -> CMat {
        let mut m = toeplitz_window(&self.symbol, dim);
        for (k, l, z) in self.compact.entries() {
            m[(k, l)] += z;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        ToeplitzElem { symbol: self.symbol.conj(), compact: self.compact.adjoint() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(ToeplitzElem { symbol: self.symbol.add(&other.symbol), compact: self.compact.add(&other.compact)? })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(ToeplitzElem { symbol: self.symbol.sub(&other.symbol), compact: self.compact.sub(&other.compact)? })
    }

    pub fn scale(&self, s: C64) -> Self {
        ToeplitzElem { symbol: self.symbol.scale(s), compact: self.compact.scale(s) }
    }

    /// `(T(f) + a)(T(g) + b) = T(fg) + [T(f)T(g) - T(fg)] + T(f) b + a T(g) + a b`, all parts exact.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.compact.check_dim(&other.compact)?;
        let dim = self.dim();
        let f = &self.symbol;
        let g = &other.symbol;
        let mut c = toeplitz_defect(f, g, dim)?;
        if !other.compact.is_zero() {
            c = c.add(&toeplitz_times_compact(f, &other.compact)?)?;
        }
        if !self.compact.is_zero() {
            c = c.add(&compact_times_toeplitz(&self.compact, g)?)?;
            c = c.add(&self.compact.matmul(&other.compact)?)?;
        }
        Ok(ToeplitzElem { symbol: f.product(g), compact: c })
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// `delta_K`: differentiate the symbol, weight the compact by `k - l`.
    pub fn delta_k(&self) -> Self {
        ToeplitzElem { symbol: self.symbol.derivative(), compact: self.compact.delta_k() }
    }

    pub fn rho_theta(&self, theta: f64) -> Self {
        ToeplitzElem { symbol: self.symbol.map_coeffs(|n, z| z * cis(-TAU * n as f64 * theta)), compact: self.compact.rho_theta(theta) }
    }
}

pub fn positive_band(f: &Symbol) -> usize {
    f.nonzero().filter(|(n, _)| *n > 0).map(|(n, _)| n as usize).max().unwrap_or(0)
}

pub fn negative_band(f: &Symbol) -> usize {
    f.nonzero().filter(|(n, _)| *n < 0).map(|(n, _)| n.unsigned_abs() as usize).max().unwrap_or(0)
}

/// `T(f)T(g) - T(fg) = -sum_{n<0} g_n (U*)^{-n} T(f_+) P_{<-n}`, entry by entry.
///
/// Entry `(k, l)` collects `-g_n f_{k - n - l}` over `n < -l`; the block is
/// `band_+(f) x band_-(g)`.
pub fn toeplitz_defect(f: &Symbol, g: &Symbol, dim: usize) -> Result<CompactOp> {
    let rows = positive_band(f);
    let cols = negative_band(g);
    if rows == 0 || cols == 0 {
        return Ok(CompactOp::zeros(dim));
    }
    let needed = rows.max(cols);
    if needed > dim {
        return Err(QdiskError::SupportOverflow { needed, dim });
    }
    let mut m = CMat::zeros(dim, dim);
    for l in 0..cols {
        for k in 0..rows {
            let mut acc = ZERO;
            for p in (l + 1)..=cols {
                let gn = g.coeff(-(p as i64));
                if gn != ZERO {
                    acc -= gn * f.coeff((k + p - l) as i64);
                }
            }
            m[(k, l)] = acc;
        }
    }
    Ok(CompactOp::from_matrix(m))
}

/// `T(f) c`: rows grow by the analytic band of `f`.
pub fn toeplitz_times_compact(f: &Symbol, c: &CompactOp) -> Result<CompactOp> {
    let dim = c.dim();
    if c.is_zero() {
        return Ok(CompactOp::zeros(dim));
    }
    let (r, s) = c.support();
    let out_rows = r + positive_band(f);
    if out_rows > dim {
        return Err(QdiskError::SupportOverflow { needed: out_rows, dim });
    }
    let t = CMat::from_fn(out_rows, r, |k, m| f.coeff(k as i64 - m as i64));
    let prod = t * c.matrix().view((0, 0), (r, s));
    let mut m = CMat::zeros(dim, dim);
    m.view_mut((0, 0), (out_rows, s)).copy_from(&prod);
    Ok(CompactOp::from_matrix(m))
}

/// `c T(g)`: columns grow by the co-analytic band of `g`.
pub fn compact_times_toeplitz(c: &CompactOp, g: &Symbol) -> Result<CompactOp> {
    let dim = c.dim();
    if c.is_zero() {
        return Ok(CompactOp::zeros(dim));
    }
    let (r, s) = c.support();
    let out_cols = s + negative_band(g);
    if out_cols > dim {
        return Err(QdiskError::SupportOverflow { needed: out_cols, dim });
    }
    let t = CMat::from_fn(s, out_cols, |m, l| g.coeff(m as i64 - l as i64));
    let prod = c.matrix().view((0, 0), (r, s)) * t;
    let mut m = CMat::zeros(dim, dim);
    m.view_mut((0, 0), (r, out_cols)).copy_from(&prod);
    Ok(CompactOp::from_matrix(m))
}

#[derive(Serialize, Deserialize)]
struct EntryJson {
    k: usize,
    l: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct CompactJson {
    dim: usize,
    entries: Vec<EntryJson>,
}

impl TryFrom<CompactJson> for CompactOp {
    type Error = QdiskError;
    fn try_from(j: CompactJson) -> Result<Self> {
        CompactOp::from_entries(j.dim, j.entries.into_iter().map(|e| (e.k, e.l, C64::new(e.re, e.im))))
    }
}

impl From<CompactOp> for CompactJson {
    fn from(c: CompactOp) -> Self {
        let mut entries: Vec<EntryJson> = c.entries().map(|(k, l, z)| EntryJson { k, l, re: z.re, im: z.im }).collect();
        entries.sort_by_key(|e| (e.k, e.l));
        CompactJson { dim: c.dim(), entries }
    }
}
