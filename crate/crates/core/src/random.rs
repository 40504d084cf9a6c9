//! Seeded random instances for property checks and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{CMat, CVec, C64};
use crate::mobius::SU11Element;
use crate::operators::{CompactOp, ToeplitzElem};
use crate::sequences::Symbol;

/// Generator for case `case` of check `stream`; independent of evaluation order.
pub fn case_rng(seed: u64, stream: u64, case: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((stream << 32) | (case & 0xffff_ffff));
    rng
}

/// Uniform in the square `[-1, 1]^2`.
pub fn complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Coefficients on `[-band, band]` damped by `1 / (1 + |n|)`.
pub fn symbol(rng: &mut impl Rng, band: usize) -> Symbol {
    let b = band as i64;
    Symbol::from_pairs((-b..=b).map(|n| (n, complex(rng) / (1.0 + n.abs() as f64))))
}

/// Real-valued symbol: `f_{-n} = conj(f_n)`.
pub fn real_symbol(rng: &mut impl Rng, band: usize) -> Symbol {
    let mut pairs = vec![(0, C64::new(rng.random_range(-1.0..1.0), 0.0))];
    for n in 1..=band as i64 {
        let z = complex(rng) / (1.0 + n as f64);
        pairs.push((n, z));
        pairs.push((-n, z.conj()));
    }
    Symbol::from_pairs(pairs)
}

/// Only nonnegative frequencies.
pub fn analytic_symbol(rng: &mut impl Rng, band: usize) -> Symbol {
    Symbol::from_pairs((0..=band as i64).map(|n| (n, complex(rng) / (1.0 + n as f64))))
}

/// `c + f` with `|c| = 3` and `sum |f_n| < 3`, so the symbol has winding 0 and the
/// Toeplitz operator is invertible.
pub fn invertible_symbol(rng: &mut impl Rng, band: usize) -> Symbol {
    let b = band as i64;
    let mut pairs: Vec<(i64, C64)> = (-b..=b).filter(|&n| n != 0).map(|n| (n, complex(rng) * (0.7 / (1.0 + n.abs() as f64)))).collect();
    pairs.push((0, C64::from_polar(3.0, rng.random_range(0.0..std::f64::consts::TAU))));
    Symbol::from_pairs(pairs)
}

/// Entries on a `support x support` corner, each present with probability 0.6.
pub fn compact(rng: &mut impl Rng, dim: usize, support: usize) -> CompactOp {
    let s = support.min(dim - 1);
    let mut m = CMat::zeros(dim, dim);
    for l in 0..s {
        for k in 0..s {
            if rng.random_bool(0.6) {
                m[(k, l)] = complex(rng);
            }
        }
    }
    CompactOp::from_matrix(m)
}

pub fn hermitian(rng: &mut impl Rng, dim: usize, support: usize) -> CompactOp {
    let c = compact(rng, dim, support);
    c.add(&c.adjoint()).expect("same window").scale(C64::new(0.5, 0.0))
}

pub fn toeplitz(rng: &mut impl Rng, dim: usize, band: usize, support: usize) -> ToeplitzElem {
    ToeplitzElem::new(symbol(rng, band), compact(rng, dim, support))
}

/// `|beta / alpha| <= max_ratio` with random phases.
pub fn su11(rng: &mut impl Rng, max_ratio: f64) -> SU11Element {
    let tau = std::f64::consts::TAU;
    SU11Element::from_ratio(rng.random_range(0.0..max_ratio), rng.random_range(0.0..tau), rng.random_range(0.0..tau))
}

/// Vector with `len` leading entries decaying like `2^{-k/4}`.
pub fn rd_vector(rng: &mut impl Rng, dim: usize, len: usize) -> CVec {
    CVec::from_fn(dim, |k, _| if k < len { complex(rng) * 2f64.powf(-(k as f64) / 4.0) } else { C64::new(0.0, 0.0) })
}

/// Unitary from the QR factorization of a random matrix.
pub fn unitary(rng: &mut impl Rng, n: usize) -> CMat {
    let m = CMat::from_fn(n, n, |_, _| complex(rng));
    m.qr().q()
}
