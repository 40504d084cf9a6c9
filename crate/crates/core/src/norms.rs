//! The (M,N) norm family, weighted Hilbert-Schmidt sums and the Toeplitz norm.

use serde::{Deserialize, Serialize};

use crate::error::{QdiskError, Result};
use crate::linalg::{binom, op_norm, C64};
use crate::operators::{compact_times_toeplitz, toeplitz_times_compact, CompactOp, FourierModes, ToeplitzElem};

/// Smallest constant making the Toeplitz norm submultiplicative.
pub fn toeplitz_constant() -> f64 {
    0.5 + ((4.0 * std::f64::consts::PI.powi(2) - 9.0) / 12.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NormKind {
    OpN,
    HsN,
    #[serde(rename = "MN")]
    Mn,
    PartialL,
    #[serde(rename = "toeplitzMN")]
    ToeplitzMn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub kind: NormKind,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub j: usize,
    pub l: usize,
    pub value: f64,
}

fn check_window(a: &CompactOp) -> Result<()> {
    if a.extent() >= a.dim() && !a.is_zero() {
        return Err(QdiskError::SupportOverflow { needed: a.extent() + 1, dim: a.dim() });
    }
    Ok(())
}

fn weight(l: usize, n: usize) -> f64 {
    (1.0 + l as f64).powi(n as i32)
}

/// `[(I + K)^l, a]`, entries `((1+k)^l - (1+l)^l) a_{k,l}`.
pub fn partial_l(a: &CompactOp, l: usize) -> CompactOp {
    a.weighted(|r, c| C64::new(weight(r, l) - weight(c, l), 0.0))
}

/// `||a (I + K)^N||`, computed on the support block.
pub fn norm_0n(a: &CompactOp, n: usize) -> Result<f64> {
    check_window(a)?;
    Ok(norm_0n_unchecked(a, n))
}

fn norm_0n_unchecked(a: &CompactOp, n: usize) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    let mut b = a.support_block();
    for (l, mut col) in b.column_iter_mut().enumerate() {
        col *= C64::new(weight(l, n), 0.0);
    }
    op_norm(&b)
}

/// `sqrt(sum (1+l)^{2N} (k-l)^{2j} |a_{k,l}|^2)`.
pub fn hs_weighted(a: &CompactOp, j: usize, n: usize) -> Result<f64> {
    check_window(a)?;
    Ok(a.entries().map(|(k, l, z)| weight(l, 2 * n) * (k as f64 - l as f64).powi(2 * j as i32) * z.norm_sqr()).sum::<f64>().sqrt())
}

/// The same sum written in Fourier modes.
pub fn hs_weighted_modes(m: &FourierModes, j: usize, n: usize) -> f64 {
    let mut acc = 0.0;
    for (&p, seq) in &m.modes {
        let pj = (p as f64).powi(2 * j as i32);
        for (k, z) in seq.iter().enumerate() {
            let col = if p >= 0 { k } else { k + p.unsigned_abs() as usize };
            acc += pj * weight(col, 2 * n) * z.norm_sqr();
        }
    }
    acc.sqrt()
}

/// `||a||_{M,N} = sum_j C(M,j) ||delta_K^j(a)||_{0,N}`.
pub fn norm_mn(a: &CompactOp, m: usize, n: usize) -> Result<f64> {
    check_window(a)?;
    let mut d = a.clone();
    let mut total = 0.0;
    for j in 0..=m {
        total += binom(m, j) * norm_0n_unchecked(&d, n);
        if j < m {
            d = d.delta_k();
        }
    }
    Ok(total)
}

/// `S ||f||_{C^{M+N+2}} + ||c||_{M,N}`.
pub fn toeplitz_norm_mn(a: &ToeplitzElem, m: usize, n: usize) -> Result<f64> {
    let sym = if a.symbol.nonzero().next().is_some() { toeplitz_constant() * a.symbol.cl_norm(m + n + 2).value } else { 0.0 };
    Ok(sym + norm_mn(&a.compact, m, n)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs <= rhs` up to a relative 1e-9; the identities need `|lhs - rhs|` within the same margin.
    pub holds: bool,
}

/// The norm inequalities that involve one operand, evaluated on `a` at orders `(m, n)`.
/// The `T(f) c` and `c T(f)` bounds use the symbol of `a` against its compact part.
pub fn single_operand_inequalities(a: &ToeplitzElem, m: usize, n: usize) -> Result<Vec<InequalityCheck>> {
    let c = &a.compact;
    let f = &a.symbol;
    let le =
        |name: &str, lhs: f64, rhs: f64| InequalityCheck { name: name.into(), lhs, rhs, holds: lhs <= rhs + 1e-9 * rhs.abs().max(1.0) };
    let eq = |name: &str, lhs: f64, rhs: f64| InequalityCheck {
        name: name.into(),
        lhs,
        rhs,
        holds: (lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0),
    };
    let hs_factor = (std::f64::consts::PI.powi(2) / 6.0).sqrt();
    Ok(vec![
        eq("norm_00_is_operator_norm", norm_0n(c, 0)?, op_norm(c.matrix())),
        le("n_monotone", norm_0n(c, n)?, norm_0n(c, n + 1)?),
        le("hs_lower", norm_0n(c, n)?, hs_weighted(c, 0, n)?),
        le("hs_upper", hs_weighted(c, 0, n)?, hs_factor * norm_0n(c, n + 1)?),
        le("adjoint_0n", norm_0n(&c.adjoint(), n)?, norm_mn(c, n, n)?),
        eq("mn_recursion", norm_mn(c, m + 1, n)?, norm_mn(c, m, n)? + norm_mn(&c.delta_k(), m, n)?),
        le("delta_k_bound", norm_mn(&c.delta_k(), m, n)?, norm_mn(c, m + 1, n)?),
        le("adjoint_mn", norm_mn(&c.adjoint(), m, n)?, norm_mn(c, m + n, n)?),
        le("left_toeplitz", norm_mn(&toeplitz_times_compact(f, c)?, m, n)?, f.cl_norm(m).value * norm_mn(c, m, n)?),
        le("right_toeplitz", norm_mn(&compact_times_toeplitz(c, f)?, m, n)?, f.cl_norm(m + n).value * norm_mn(c, m, n)?),
    ])
}

/// Every norm of `a` up to the given orders, in a fixed order.
pub fn norm_reports(a: &ToeplitzElem, m_max: usize, n_max: usize) -> Result<Vec<NormReport>> {
    let c = &a.compact;
    let mut out = Vec::new();
    let rep = |kind, m, n, j, l, value| NormReport { kind, m, n, j, l, value };
    for n in 0..=n_max {
        out.push(rep(NormKind::OpN, 0, n, 0, 0, norm_0n(c, n)?));
    }
    for j in 0..=m_max {
        for n in 0..=n_max {
            out.push(rep(NormKind::HsN, 0, n, j, 0, hs_weighted(c, j, n)?));
        }
    }
    for m in 0..=m_max {
        for n in 0..=n_max {
            out.push(rep(NormKind::Mn, m, n, 0, 0, norm_mn(c, m, n)?));
        }
    }
    for l in 1..=m_max.max(1) {
        out.push(rep(NormKind::PartialL, 0, 0, 0, l, norm_0n(&partial_l(c, l), 0)?));
    }
    out.push(rep(NormKind::ToeplitzMn, m_max, n_max, 0, 0, toeplitz_norm_mn(a, m_max, n_max)?));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;
    use crate::sequences::Symbol;
    use approx::assert_relative_eq;

    #[test]
    fn unit_row_golden() {
        for l in 0..=10 {
            let p = CompactOp::unit(0, l, 32).unwrap();
            for m in 0..=3 {
                for n in 0..=3 {
                    let want = (1.0 + l as f64).powi((m + n) as i32);
                    assert_relative_eq!(norm_mn(&p, m, n).unwrap(), want, max_relative = 1e-12);
                }
            }
        }
        assert_relative_eq!(norm_0n(&CompactOp::unit(0, 0, 4).unwrap(), 5).unwrap(), 1.0);
    }

    #[test]
    fn lower_projection_norm() {
        for n in 1..8 {
            let p = CompactOp::projection_below(n, 16).unwrap();
            for big_n in 0..4 {
                assert_relative_eq!(norm_0n(&p, big_n).unwrap(), (n as f64).powi(big_n as i32), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn partial_examples() {
        let p = CompactOp::unit(0, 1, 8).unwrap();
        assert_eq!(partial_l(&p, 2), p.scale(C64::new(-3.0, 0.0)));
        let a = CompactOp::from_entries(8, [(2, 0, ONE), (1, 4, C64::new(0.5, 2.0))]).unwrap();
        assert_eq!(partial_l(&a, 1), a.delta_k());
    }

    #[test]
    fn toeplitz_norm_examples() {
        let s = toeplitz_constant();
        let id = ToeplitzElem::identity(8);
        assert_relative_eq!(toeplitz_norm_mn(&id, 0, 0).unwrap(), s, max_relative = 1e-14);
        let zero = ToeplitzElem::toeplitz(Symbol::zero(), 8);
        assert_eq!(toeplitz_norm_mn(&zero, 2, 2).unwrap(), 0.0);
    }

    #[test]
    fn edge_support_is_rejected() {
        let p = CompactOp::unit(3, 0, 4).unwrap();
        assert!(matches!(norm_0n(&p, 1), Err(QdiskError::SupportOverflow { .. })));
    }

    #[test]
    fn report_json_names() {
        let r = NormReport { kind: NormKind::ToeplitzMn, m: 1, n: 2, j: 0, l: 0, value: 1.5 };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"kind":"toeplitzMN","M":1,"N":2,"j":0,"l":0,"value":1.5}"#);
    }

    #[test]
    fn single_operand_inequalities_hold_on_a_corner() {
        let c = CompactOp::from_entries(16, [(0, 3, ONE), (2, 1, C64::new(0.5, -1.0)), (4, 4, C64::new(0.0, 2.0))]).unwrap();
        let f = Symbol::from_pairs([(-1, ONE), (2, C64::new(0.3, 0.1))]);
        let checks = single_operand_inequalities(&ToeplitzElem::new(f, c), 2, 1).unwrap();
        assert_eq!(checks.len(), 10);
        assert!(checks.iter().all(|c| c.holds), "{checks:?}");
    }
}
