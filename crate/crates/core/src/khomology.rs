//! Fredholm modules as concrete matrices and their index pairings.
//!
//! Kernel and cokernel dimensions come from singular values of tall
//! truncations: for an operator with lower bandwidth at most `m`, the first
//! `n` columns of an `(n + m)`-row window see the whole image of those columns.

use serde::{Deserialize, Serialize};

use crate::error::{QdiskError, Result};
use crate::linalg::{hermitian_eigen, max_abs, op_norm, rank_split, singular_values, CMat, C64, ONE};
use crate::operators::toeplitz_window;
use crate::sequences::Symbol;

/// Relative threshold separating zero from nonzero singular values.
pub const RANK_TOL: f64 = 1e-8;
/// Required ratio between the two clusters.
pub const MIN_GAP: f64 = 1e3;
/// Columns dropped at the edge of a compression.
pub const EDGE_MARGIN: usize = 4;
const TAIL_LEN: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexResult {
    pub ker_dim: usize,
    pub coker_dim: usize,
    pub index: i64,
    /// Smallest singular values of the operator's truncation, ascending.
    pub singular_values: Vec<f64>,
    /// Smallest singular values of the adjoint's truncation, ascending.
    pub adjoint_singular_values: Vec<f64>,
    /// Worst ratio between the kept and dropped clusters.
    pub gap: f64,
}

impl IndexResult {
    fn new(ker: usize, coker: usize, sv: &[f64], sv_adj: &[f64], gap: f64) -> Self {
        let tail = |s: &[f64]| s.iter().rev().take(TAIL_LEN).copied().collect::<Vec<f64>>();
        IndexResult {
            ker_dim: ker,
            coker_dim: coker,
            index: ker as i64 - coker as i64,
            singular_values: tail(sv),
            adjoint_singular_values: tail(sv_adj),
            gap,
        }
    }
}

/// Rank at absolute threshold `tau`, refusing to decide unless the count is the
/// same at `tau / 10` and `10 tau` and the clusters are separated.
pub fn decide_rank(sv: &[f64], tau: f64) -> Result<(usize, f64)> {
    let s = rank_split(sv, tau);
    let lo = rank_split(sv, tau / 10.0);
    let hi = rank_split(sv, tau * 10.0);
    if s.rank != lo.rank || s.rank != hi.rank || s.gap < MIN_GAP {
        return Err(QdiskError::Indeterminate(format!(
            "rank {} at tau {tau:e} (neighbours {} / {}), gap {:e}",
            s.rank, lo.rank, hi.rank, s.gap
        )));
    }
    Ok((s.rank, s.gap))
}

/// Index of a map between finite-dimensional spaces: `dim domain - dim codomain`,
/// with kernel and cokernel reported separately.
pub fn finite_index(a: &CMat) -> Result<IndexResult> {
    let sv = singular_values(a);
    let scale = sv.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let (rank, gap) = decide_rank(&sv, RANK_TOL * scale)?;
    Ok(IndexResult::new(a.ncols() - rank, a.nrows() - rank, &sv, &sv, gap))
}

/// Index of the operator whose window is `full`, from its first `n` columns and
/// the first `n` columns of its adjoint. Both bandwidths must fit in `full.nrows() - n`.
pub fn banded_index(full: &CMat, n: usize) -> Result<IndexResult> {
    let rows = full.nrows();
    if n == 0 || n > rows || full.ncols() != rows {
        return Err(QdiskError::SupportOverflow { needed: n + 1, dim: rows });
    }
    let scale = op_norm(full).max(f64::MIN_POSITIVE);
    let tall = full.columns(0, n).into_owned();
    let tall_adj = full.rows(0, n).adjoint();
    let sv = singular_values(&tall);
    let sv_adj = singular_values(&tall_adj);
    let (ra, ga) = decide_rank(&sv, RANK_TOL * scale)?;
    let (rb, gb) = decide_rank(&sv_adj, RANK_TOL * scale)?;
    Ok(IndexResult::new(n - ra, n - rb, &sv, &sv_adj, ga.min(gb)))
}

/// Multiplication by `f` on `l^2` of `[-L, L]`; index `j` stands for `j - L`.
pub fn bilateral_multiplication(f: &Symbol, half_width: usize) -> CMat {
    let size = 2 * half_width + 1;
    CMat::from_fn(size, size, |r, c| f.coeff(r as i64 - c as i64))
}

/// `[F_1, M_f]` with `F_1 = +1` on nonnegative and `-1` on negative indices.
pub fn odd_circle_commutator(f: &Symbol, half_width: usize) -> CMat {
    let m = bilateral_multiplication(f, half_width);
    let sign = |j: usize| if j >= half_width { 1.0 } else { -1.0 };
    CMat::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * (sign(r) - sign(c)))
}

/// Rank of `[F_1, M_f]` away from the window edges.
pub fn odd_circle_commutator_rank(f: &Symbol, half_width: usize) -> Result<usize> {
    let c = odd_circle_commutator(f, half_width);
    let m = EDGE_MARGIN.max(f.effective_band());
    if 2 * m >= c.nrows() {
        return Err(QdiskError::SupportOverflow { needed: 2 * m + 1, dim: c.nrows() });
    }
    let inner = c.view((m, m), (c.nrows() - 2 * m, c.ncols() - 2 * m)).into_owned();
    let sv = singular_values(&inner);
    let scale = sv.first().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    Ok(decide_rank(&sv, RANK_TOL * scale)?.0)
}

/// Index of `P_{>=0} M_f P_{>=0}` for the odd module over the circle.
pub fn index_odd_circle(f: &Symbol, half_width: usize) -> Result<IndexResult> {
    f.winding_number()?;
    let m = bilateral_multiplication(f, half_width);
    let l = half_width;
    let compressed = m.view((l, l), (l + 1, l + 1)).into_owned();
    let margin = EDGE_MARGIN.max(f.effective_band());
    if margin > l {
        return Err(QdiskError::SupportOverflow { needed: margin + 1, dim: l + 1 });
    }
    banded_index(&compressed, l + 1 - margin)
}

fn partial_isometry_defect(tall: &CMat, tau: f64) -> Result<i64> {
    let svd = tall.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut sv: Vec<(f64, usize)> = svd.singular_values.iter().copied().zip(0..).collect();
    sv.sort_by(|a, b| b.0.total_cmp(&a.0));
    let values: Vec<f64> = sv.iter().map(|p| p.0).collect();
    let (rank, _) = decide_rank(&values, tau)?;
    let n = tall.ncols();
    // W*W = sum of the kept right singular projections.
    let mut ww = CMat::zeros(n, n);
    for &(_, i) in sv.iter().take(rank) {
        let row = v_t.row(i);
        ww += row.adjoint() * row;
    }
    let trace: f64 = (0..n).map(|i| (ONE - ww[(i, i)]).re).sum();
    Ok(trace.round() as i64)
}

/// `ind([u]_1) = [I - W*W]_0 - [I - WW*]_0` for the partial isometry `W` in the
/// polar decomposition of the lift `T(u)`, as an integer in `K_0(K)`.
pub fn index_map_k1(u: &Symbol, dim: usize) -> Result<i64> {
    u.winding_number()?;
    let t = toeplitz_window(u, dim);
    let margin = EDGE_MARGIN.max(u.effective_band());
    if margin >= dim {
        return Err(QdiskError::SupportOverflow { needed: margin + 1, dim });
    }
    let n = dim - margin;
    let tau = RANK_TOL * op_norm(&t).max(f64::MIN_POSITIVE);
    let left = partial_isometry_defect(&t.columns(0, n).into_owned(), tau)?;
    let right = partial_isometry_defect(&t.rows(0, n).adjoint(), tau)?;
    Ok(left - right)
}

/// Orthonormal basis of the range of a Hermitian projection.
fn range_basis(p: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(p);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > 0.5).collect();
    CMat::from_fn(p.nrows(), keep.len(), |r, c| vecs[(r, keep[c])])
}

fn unit_projection(dim: usize) -> CMat {
    let mut p = CMat::zeros(dim, dim);
    p[(0, 0)] = ONE;
    p
}

fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let mut m = CMat::zeros(a.nrows() + b.nrows(), a.ncols() + b.ncols());
    m.view_mut((0, 0), a.shape()).copy_from(a);
    m.view_mut((a.nrows(), a.ncols()), b.shape()).copy_from(b);
    m
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvenModuleK {
    pub pairing_p00: IndexResult,
    pub pairing_i: IndexResult,
    /// `max(||U_i* U_j - delta_ij I||, ||U_1 U_1* + U_2 U_2* - I||)`.
    pub relation_residual: f64,
}

/// Isometries `U_1 E_k = E_{2k}`, `U_2 E_k = E_{2k+1}` from an `n`-window into a `2n`-window.
pub fn interleaving_isometries(n: usize) -> (CMat, CMat) {
    let mut u1 = CMat::zeros(2 * n, n);
    let mut u2 = CMat::zeros(2 * n, n);
    for k in 0..n {
        u1[(2 * k, k)] = ONE;
        u2[(2 * k + 1, k)] = ONE;
    }
    (u1, u2)
}

/// The even module over `K^+` built from `G(y, z) = U_1 y + U_2 z`.
pub fn even_module_over_k(dim: usize) -> Result<EvenModuleK> {
    even_module_over_k_conjugated(dim, None)
}

/// Same module after conjugating both isometries by a unitary `v` acting on the
/// first `v.nrows()` basis vectors.
pub fn even_module_over_k_conjugated(dim: usize, v: Option<&CMat>) -> Result<EvenModuleK> {
    if !dim.is_multiple_of(2) || dim < 2 {
        return Err(QdiskError::SpecViolation(format!("window {dim} must be even and positive")));
    }
    let n = dim / 2;
    let (mut u1, mut u2) = interleaving_isometries(n);
    if let Some(v) = v {
        let s = v.nrows();
        if s > n {
            return Err(QdiskError::SupportOverflow { needed: s, dim: n });
        }
        let embed = |size: usize| {
            let mut m = CMat::identity(size, size);
            m.view_mut((0, 0), (s, s)).copy_from(v);
            m
        };
        let (vd, vn) = (embed(dim), embed(n));
        u1 = &vd * u1 * vn.adjoint();
        u2 = &vd * u2 * vn.adjoint();
    }
    let id_n = CMat::identity(n, n);
    let id_d = CMat::identity(dim, dim);
    let relation_residual = [
        max_abs(&(u1.adjoint() * &u1 - &id_n)),
        max_abs(&(u2.adjoint() * &u2 - &id_n)),
        max_abs(&(u1.adjoint() * &u2)),
        max_abs(&(&u1 * u1.adjoint() + &u2 * u2.adjoint() - &id_d)),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let mut g = CMat::zeros(dim, 2 * n);
    g.view_mut((0, 0), (dim, n)).copy_from(&u1);
    g.view_mut((0, n), (dim, n)).copy_from(&u2);

    let pairing = |p_ev: &CMat, p_odd: &CMat| {
        let b_ev = range_basis(p_ev);
        let b_odd = range_basis(p_odd);
        finite_index(&(b_ev.adjoint() * p_ev * &g * p_odd * b_odd))
    };
    let p_ev = unit_projection(dim);
    let p_odd = direct_sum(&unit_projection(n), &unit_projection(n));
    let pairing_p00 = pairing(&p_ev, &p_odd)?;
    let pairing_i = pairing(&id_d, &CMat::identity(2 * n, 2 * n))?;
    Ok(EvenModuleK { pairing_p00, pairing_i, relation_residual })
}

/// Pairing of `[1]_0` with the even module `({0} + C, rho_0, F_0, Gamma)`:
/// the zero map from `Ran(1) = C` to `{0}`.
pub fn even_module_circle_pairing() -> Result<IndexResult> {
    let rho_odd = |f: &Symbol| CMat::from_element(1, 1, f.eval(0.0));
    let ran = range_basis(&rho_odd(&Symbol::constant(ONE)));
    finite_index(&(CMat::zeros(0, 1) * ran))
}

/// The same pairing pulled back along the quotient map, evaluated at `[I]_0`.
pub fn even_module_toeplitz_pullback(dim: usize) -> Result<IndexResult> {
    let id = crate::operators::ToeplitzElem::identity(dim);
    let q = id.quotient();
    let ran = range_basis(&CMat::from_element(1, 1, q.eval(0.0)));
    finite_index(&(CMat::zeros(0, 1) * ran))
}

/// Grading and the odd operator of the circle's even module on `{0} + C`.
pub fn even_circle_grading() -> (CMat, CMat) {
    (CMat::from_element(1, 1, C64::new(-1.0, 0.0)), CMat::zeros(1, 1))
}

/// Tabulated weights for the weighted shift `d f(k) = -alpha(k) f(k+1)` and
/// the operator `D f = U beta(K) f - f U alpha(K)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedShiftSpec {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub mu: Vec<f64>,
    pub w: Vec<f64>,
    pub w_prime: Vec<f64>,
}

/// Partial sum over the table and the share contributed by its upper half.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableSum {
    pub value: f64,
    pub tail_fraction: f64,
    pub finite_on_table: bool,
}

/// Upper-half share above which a tabulated series counts as divergent.
pub const DIVERGENCE_SHARE: f64 = 0.1;

impl TableSum {
    fn from_terms(terms: &[f64]) -> Self {
        let value: f64 = terms.iter().sum();
        let tail: f64 = terms[terms.len() / 2..].iter().sum();
        let tail_fraction = if value > 0.0 { tail / value } else { 0.0 };
        TableSum { value, tail_fraction, finite_on_table: value.is_finite() && tail_fraction < DIVERGENCE_SHARE }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpecChecks {
    /// `max |alpha(k) - beta(k) mu(k+1) / mu(k)|`.
    pub relation_residual: f64,
    pub beta_difference_sum: TableSum,
    /// `max` of the ratio bound for `k <= j`, `n < 4`.
    pub beta_ratio_bound: f64,
    pub mixed_weight_sum: TableSum,
    /// First `n` for which `sum (1+k)^{2n} w(k) / mu(k)^2` looks divergent.
    pub n_proxy: Option<usize>,
}

const N_PROXY_MAX: usize = 8;

impl WeightedShiftSpec {
    /// `alpha(k) = beta(k) mu(k+1) / mu(k)`, tabulated on `len` points.
    pub fn from_beta_mu(
        len: usize,
        beta: impl Fn(usize) -> f64,
        mu: impl Fn(usize) -> f64,
        w: impl Fn(usize) -> f64,
        w_prime: impl Fn(usize) -> f64,
    ) -> Self {
        let normalize = |v: Vec<f64>| {
            let s: f64 = v.iter().sum();
            v.into_iter().map(|x| x / s).collect::<Vec<f64>>()
        };
        WeightedShiftSpec {
            alpha: (0..len).map(|k| beta(k) * mu(k + 1) / mu(k)).collect(),
            beta: (0..len).map(&beta).collect(),
            mu: (0..len).map(&mu).collect(),
            w: normalize((0..len).map(w).collect()),
            w_prime: normalize((0..len).map(w_prime).collect()),
        }
    }

    /// `beta(k) = k + 1`, `mu(k) = 1 / (k + 1)`, `w ~ (1+k)^-4`, `w' ~ (1+k)^-6`.
    pub fn default_table(len: usize) -> Self {
        let p = |e: i32| move |k: usize| (1.0 + k as f64).powi(e);
        Self::from_beta_mu(len, |k| k as f64 + 1.0, p(-1), p(-4), p(-6))
    }

    pub fn len(&self) -> usize {
        [self.alpha.len(), self.beta.len(), self.mu.len(), self.w.len(), self.w_prime.len()].into_iter().min().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Hard conditions raise; summability conditions are reported on the table.
    pub fn validate(&self) -> Result<SpecChecks> {
        let len = self.len();
        if len < 2 {
            return Err(QdiskError::SpecViolation("table shorter than 2".into()));
        }
        for k in 0..len {
            if self.alpha[k] == 0.0 || self.beta[k] == 0.0 {
                return Err(QdiskError::SpecViolation(format!("alpha or beta vanishes at {k}")));
            }
            if !(self.w[k] > 0.0 && self.w_prime[k] > 0.0 && self.mu[k] != 0.0) {
                return Err(QdiskError::SpecViolation(format!("weights or mu not positive at {k}")));
            }
        }
        if (self.mu[0] - 1.0).abs() > 1e-12 {
            return Err(QdiskError::SpecViolation(format!("mu(0) = {}", self.mu[0])));
        }
        let relation_residual = (0..len - 1)
            .map(|k| (self.alpha[k] - self.beta[k] * self.mu[k + 1] / self.mu[k]).abs() / self.alpha[k].abs().max(1.0))
            .fold(0.0, f64::max);
        if relation_residual > 1e-10 {
            return Err(QdiskError::SpecViolation(format!("alpha/beta/mu relation residual {relation_residual:e}")));
        }
        let diff: Vec<f64> = (0..len).map(|k| (self.beta[k] - self.alpha[k]).powi(2) * self.w_prime[k]).collect();
        let mut beta_ratio_bound: f64 = 0.0;
        for n in 0..4 {
            let prods: Vec<f64> = (0..len.saturating_sub(n)).map(|k| self.beta[k..=k + n].iter().product::<f64>().abs()).collect();
            for k in 0..prods.len() {
                for j in k..prods.len() {
                    beta_ratio_bound = beta_ratio_bound.max(prods[k] / prods[j]);
                }
            }
        }
        let mixed: Vec<f64> = (0..len)
            .map(|m| {
                // terms with max(j, k) = m, so the table order matches growth
                let mut s = 0.0;
                for i in 0..=m {
                    for (j, k) in [(m, i), (i, m)] {
                        if j == k && i != m {
                            continue;
                        }
                        s += (self.mu[j] / self.mu[k]).powi(2) * self.w[k] / self.w_prime[j];
                    }
                }
                s / (m as f64 + 1.0).powi(2)
            })
            .collect();
        let n_proxy = (0..N_PROXY_MAX).find(|&n| {
            let terms: Vec<f64> = (0..len).map(|k| (1.0 + k as f64).powi(2 * n as i32) * self.w[k] / self.mu[k].powi(2)).collect();
            !TableSum::from_terms(&terms).finite_on_table
        });
        Ok(SpecChecks {
            relation_residual,
            beta_difference_sum: TableSum::from_terms(&diff),
            beta_ratio_bound,
            mixed_weight_sum: TableSum::from_terms(&mixed),
            n_proxy,
        })
    }
}

/// Window of `d` from `l^2_w` to `l^2_{w'}` in orthonormal coordinates:
/// `A_{k,k+1} = -alpha(k) sqrt(w'(k) / w(k+1))`.
pub fn weighted_shift_matrix(spec: &WeightedShiftSpec, dim: usize) -> Result<CMat> {
    if spec.len() < dim + 1 {
        return Err(QdiskError::SpecViolation(format!("table length {} below {}", spec.len(), dim + 1)));
    }
    let mut a = CMat::zeros(dim, dim);
    for k in 0..dim - 1 {
        a[(k, k + 1)] = C64::new(-spec.alpha[k] * (spec.w_prime[k] / spec.w[k + 1]).sqrt(), 0.0);
    }
    Ok(a)
}

pub fn weighted_shift_index(spec: &WeightedShiftSpec, dim: usize) -> Result<IndexResult> {
    spec.validate()?;
    let a = weighted_shift_matrix(spec, dim + 1)?;
    banded_index(&a, dim)
}

/// `D_n`: Fourier mode `n - 1` of `f` to mode `n` of `D f`, in orthonormal coordinates.
pub fn spectral_d_block(spec: &WeightedShiftSpec, n: i64, size: usize) -> Result<CMat> {
    let need = size + n.unsigned_abs() as usize + 2;
    if spec.len() < need {
        return Err(QdiskError::SpecViolation(format!("table length {} below {need}", spec.len())));
    }
    // mode m lives on columns k (m >= 0) or k - m (m < 0) of the matrix picture
    let col = |m: i64, k: usize| if m >= 0 { k } else { k + m.unsigned_abs() as usize };
    let w_in = |k: usize| spec.w[col(n - 1, k)];
    let w_out = |k: usize| spec.w_prime[col(n, k)];
    let mut d = CMat::zeros(size, size);
    let mut put = |r: usize, c: usize, v: f64| {
        if r < size && c < size {
            d[(r, c)] = C64::new(v * (w_out(r) / w_in(c)).sqrt(), 0.0);
        }
    };
    for k in 0..size {
        if n >= 1 {
            put(k, k, spec.beta[k + n as usize - 1]);
            put(k, k + 1, -spec.alpha[k]);
        } else {
            if k >= 1 {
                put(k, k - 1, spec.beta[k - 1]);
            }
            put(k, k, -spec.alpha[k + n.unsigned_abs() as usize]);
        }
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralDReport {
    /// `None` when some mode block has no clear singular-value gap.
    pub index: Option<IndexResult>,
    pub indeterminate: Option<String>,
    /// Per-mode indices for `n` in `[-band, band]`, where decided.
    pub mode_indices: Vec<(i64, Option<i64>)>,
    pub checks: SpecChecks,
}

/// Numerical index of `D` on modes `|n| <= band`, `k < dim`, next to the table proxy for `N`.
pub fn spectral_triple_d_index(spec: &WeightedShiftSpec, band: usize, dim: usize) -> Result<SpectralDReport> {
    spectral_d_index_impl(spec, band, dim, false)
}

/// The same computation for `D*`; its index is the negative of `D`'s.
pub fn spectral_triple_d_adjoint_index(spec: &WeightedShiftSpec, band: usize, dim: usize) -> Result<SpectralDReport> {
    spectral_d_index_impl(spec, band, dim, true)
}

/// Per-doubling shrink factor of `sigma_1 / sigma_2` above which a mode counts as having a
/// limiting kernel vector, and below which it counts as having none.
pub const SCALING_KERNEL: f64 = 1.1;
pub const SCALING_NONE: f64 = 1.03;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeScaling {
    pub mode: i64,
    /// `sigma_1 / sigma_2` of the truncated block at `dim`, `2 dim`, `4 dim`.
    pub ratios: [f64; 3],
    pub adjoint_ratios: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingIndex {
    pub index: i64,
    pub kernel_modes: Vec<i64>,
    pub cokernel_modes: Vec<i64>,
    pub modes: Vec<ModeScaling>,
}

/// Index of `D` read off from finite-size scaling: a mode block has a kernel vector in the
/// limit when its smallest singular value separates from the rest as the window doubles.
///
/// Polynomial weights give kernel vectors with polynomial tails, whose truncations never
/// fall below the fixed rank threshold of [`spectral_triple_d_index`].
pub fn spectral_d_scaling_index(spec: &WeightedShiftSpec, band: usize, dim: usize) -> Result<ScalingIndex> {
    spec.validate()?;
    let need = 4 * dim + band + 2;
    if spec.len() < need {
        return Err(QdiskError::SupportOverflow { needed: need, dim: spec.len() });
    }
    let ratio = |sv: &[f64]| {
        let n = sv.len();
        if n < 2 || sv[n - 2] <= 0.0 {
            0.0
        } else {
            sv[n - 1] / sv[n - 2]
        }
    };
    let classify = |r: &[f64; 3], mode: i64| -> Result<bool> {
        let step = |a: f64, b: f64| if b <= f64::MIN_POSITIVE { f64::INFINITY } else { a / b };
        let shrink = [step(r[0], r[1]), step(r[1], r[2])];
        if shrink.iter().all(|&s| s >= SCALING_KERNEL) {
            Ok(true)
        } else if shrink.iter().all(|&s| s <= SCALING_NONE) {
            Ok(false)
        } else {
            Err(QdiskError::Indeterminate(format!("mode {mode}: sigma_1/sigma_2 shrinks by {:.3} then {:.3}", shrink[0], shrink[1])))
        }
    };
    let b = band as i64;
    let mut out = ScalingIndex { index: 0, kernel_modes: Vec::new(), cokernel_modes: Vec::new(), modes: Vec::new() };
    for n in -b..=b {
        let mut ratios = [0.0; 3];
        let mut adjoint_ratios = [0.0; 3];
        for (i, d) in [dim, 2 * dim, 4 * dim].into_iter().enumerate() {
            let full = spectral_d_block(spec, n, d + 1)?;
            ratios[i] = ratio(&singular_values(&full.columns(0, d).into_owned()));
            adjoint_ratios[i] = ratio(&singular_values(&full.rows(0, d).adjoint()));
        }
        if classify(&ratios, n)? {
            out.kernel_modes.push(n);
        }
        if classify(&adjoint_ratios, n)? {
            out.cokernel_modes.push(n);
        }
        out.modes.push(ModeScaling { mode: n, ratios, adjoint_ratios });
    }
    out.index = out.kernel_modes.len() as i64 - out.cokernel_modes.len() as i64;
    Ok(out)
}

fn spectral_d_index_impl(spec: &WeightedShiftSpec, band: usize, dim: usize, adjoint: bool) -> Result<SpectralDReport> {
    let checks = spec.validate()?;
    let b = band as i64;
    let mut mode_indices = Vec::new();
    let mut ker = 0;
    let mut coker = 0;
    let mut sv = Vec::new();
    let mut sv_adj = Vec::new();
    let mut gap = f64::INFINITY;
    let mut indeterminate = None;
    for n in -b..=b {
        let mut block = spectral_d_block(spec, n, dim + 1)?;
        if adjoint {
            block = block.adjoint();
        }
        match banded_index(&block, dim) {
            Ok(r) => {
                mode_indices.push((n, Some(r.index)));
                ker += r.ker_dim;
                coker += r.coker_dim;
                gap = gap.min(r.gap);
                sv.extend(r.singular_values);
                sv_adj.extend(r.adjoint_singular_values);
            }
            Err(QdiskError::Indeterminate(msg)) => {
                mode_indices.push((n, None));
                indeterminate.get_or_insert(format!("mode {n}: {msg}"));
            }
            Err(e) => return Err(e),
        }
    }
    sv.sort_by(|a, b| b.total_cmp(a));
    sv_adj.sort_by(|a, b| b.total_cmp(a));
    let index = indeterminate.is_none().then(|| IndexResult::new(ker, coker, &sv, &sv_adj, gap));
    Ok(SpectralDReport { index, indeterminate, mode_indices, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn r(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn odd_circle_examples() {
        for l in [32, 64] {
            assert_eq!(index_odd_circle(&Symbol::monomial(1, ONE), l).unwrap().index, -1);
            assert_eq!(index_odd_circle(&Symbol::constant(ONE), l).unwrap().index, 0);
            assert_eq!(index_odd_circle(&Symbol::monomial(2, ONE), l).unwrap().index, -2);
            assert_eq!(index_odd_circle(&Symbol::monomial(-1, ONE), l).unwrap().index, 1);
        }
        let near = Symbol::from_pairs([(0, r(1.0)), (1, r(-1.0))]);
        assert!(matches!(index_odd_circle(&near, 32), Err(QdiskError::NearZeroSymbol { .. })));
    }

    #[test]
    fn odd_circle_follows_winding() {
        // zeros at 0.5 and 2: winding 1
        let f = Symbol::from_pairs([(0, r(1.0)), (1, r(-2.5)), (2, r(1.0))]);
        assert_eq!(index_odd_circle(&f, 64).unwrap().index, -f.winding_number().unwrap());
        assert_eq!(f.winding_number().unwrap(), 1);
    }

    #[test]
    fn commutator_rank_matches_degree() {
        for n in 1..4 {
            assert_eq!(odd_circle_commutator_rank(&Symbol::monomial(n, ONE), 32).unwrap(), n as usize);
        }
    }

    #[test]
    fn index_map_examples() {
        for d in [64, 128] {
            assert_eq!(index_map_k1(&Symbol::monomial(1, ONE), d).unwrap(), -1);
            assert_eq!(index_map_k1(&Symbol::constant(ONE), d).unwrap(), 0);
            assert_eq!(index_map_k1(&Symbol::monomial(-1, ONE), d).unwrap(), 1);
        }
    }

    #[test]
    fn even_module_examples() {
        for d in [64, 128] {
            let m = even_module_over_k(d).unwrap();
            assert_eq!((m.pairing_p00.index, m.pairing_i.index), (1, 0));
            assert_eq!((m.pairing_p00.ker_dim, m.pairing_p00.coker_dim), (1, 0));
            assert!(m.relation_residual < 1e-15);
        }
        assert!(even_module_over_k(7).is_err());
    }

    #[test]
    fn even_module_other_realization() {
        // a fixed unitary: Householder reflection on C^4
        let v = crate::linalg::CVec::from_vec(vec![r(1.0), I, r(-0.5), C64::new(0.3, 0.2)]);
        let v = &v / C64::new(v.norm(), 0.0);
        let h = CMat::identity(4, 4) - (&v * v.adjoint()) * r(2.0);
        let m = even_module_over_k_conjugated(64, Some(&h)).unwrap();
        assert_eq!((m.pairing_p00.index, m.pairing_i.index), (1, 0));
        assert!(m.relation_residual < 1e-14);
    }

    #[test]
    fn even_circle_examples() {
        assert_eq!(even_module_circle_pairing().unwrap().index, 1);
        assert_eq!(even_module_toeplitz_pullback(16).unwrap().index, 1);
        let (gamma, f) = even_circle_grading();
        assert_eq!(max_abs(&(&gamma * &f + &f * &gamma)), 0.0);
    }

    #[test]
    fn weighted_shift_examples() {
        for d in [64, 128] {
            let spec = WeightedShiftSpec::default_table(d + 8);
            assert_eq!(weighted_shift_index(&spec, d).unwrap().index, 1);
        }
        let plain = WeightedShiftSpec::from_beta_mu(80, |_| 1.0, |_| 1.0, |_| 1.0, |_| 1.0);
        assert_eq!(weighted_shift_index(&plain, 64).unwrap().index, 1);
        let p4 = |k: usize| (1.0 + k as f64).powi(-4);
        let growing = WeightedShiftSpec::from_beta_mu(80, |k| k as f64 + 1.0, |_| 1.0, p4, p4);
        assert_eq!(weighted_shift_index(&growing, 64).unwrap().index, 1);
        let mut bad = WeightedShiftSpec::default_table(80);
        bad.alpha[5] = 0.0;
        assert!(matches!(weighted_shift_index(&bad, 64), Err(QdiskError::SpecViolation(_))));
    }

    #[test]
    fn default_spec_checks() {
        let c = WeightedShiftSpec::default_table(200).validate().unwrap();
        assert!(c.relation_residual < 1e-14);
        assert_eq!(c.n_proxy, Some(1));
        assert!(c.beta_difference_sum.finite_on_table);
        let same =
            WeightedShiftSpec::from_beta_mu(200, |k| k as f64 + 1.0, |_| 1.0, |k| (1.0 + k as f64).powi(-4), |k| (1.0 + k as f64).powi(-4));
        assert_eq!(same.validate().unwrap().n_proxy, Some(2));
    }

    #[test]
    fn spectral_d_with_geometric_mu() {
        // every positive mode carries a geometrically decaying kernel vector
        let p4 = |k: usize| (1.0 + k as f64).powi(-4);
        let spec = WeightedShiftSpec::from_beta_mu(120, |k| k as f64 + 1.0, |k| 2f64.powi(k as i32), p4, p4);
        for band in [0usize, 1, 3] {
            let d = spectral_triple_d_index(&spec, band, 48).unwrap();
            let ds = spectral_triple_d_adjoint_index(&spec, band, 48).unwrap();
            let i = d.index.expect("determinate").index;
            assert_eq!(i, band as i64);
            assert_eq!(ds.index.unwrap().index, -i);
            assert_eq!(d.checks.n_proxy, None);
        }
    }

    #[test]
    fn spectral_d_scaling_matches_weight_threshold() {
        let p4 = |k: usize| (1.0 + k as f64).powi(-4);
        let default = WeightedShiftSpec::default_table(4 * 32 + 8);
        let s = spectral_d_scaling_index(&default, 3, 32).unwrap();
        assert_eq!((s.index, s.kernel_modes.as_slice()), (1, &[1][..]));
        let flat = WeightedShiftSpec::from_beta_mu(4 * 32 + 8, |k| k as f64 + 1.0, |_| 1.0, p4, p4);
        assert_eq!(spectral_d_scaling_index(&flat, 3, 32).unwrap().index, 2);
        let geo = WeightedShiftSpec::from_beta_mu(4 * 32 + 8, |k| k as f64 + 1.0, |k| 2f64.powi(k as i32), p4, p4);
        assert_eq!(spectral_d_scaling_index(&geo, 2, 32).unwrap().index, 2);
        assert!(matches!(spectral_d_scaling_index(&default, 3, 64), Err(QdiskError::SupportOverflow { .. })));
    }

    #[test]
    fn spectral_d_band_zero_is_one_block() {
        let spec = WeightedShiftSpec::from_beta_mu(120, |k| k as f64 + 1.0, |k| 2f64.powi(k as i32), |_| 1.0, |_| 1.0);
        let d = spectral_triple_d_index(&spec, 0, 48).unwrap();
        let block = banded_index(&spectral_d_block(&spec, 0, 49).unwrap(), 48).unwrap();
        assert_eq!(d.index.unwrap().index, block.index);
        assert_eq!(d.mode_indices, vec![(0, Some(block.index))]);
    }
}
