//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use qdisk::khomology::{
    even_module_circle_pairing, even_module_over_k, index_map_k1, index_odd_circle, weighted_shift_index, WeightedShiftSpec,
};
use qdisk::linalg::{C64, ONE};
use qdisk::mobius::{mobius_report, SU11Element};
use qdisk::norms::norm_mn;
use qdisk::suite::{run_property_suite, CheckRecord, Status, SuiteConfig, SuiteReport};
use qdisk::{CompactOp, Result, Symbol};

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line { ok, detail: detail.into() }
}

fn config(suites: &[&str]) -> SuiteConfig {
    SuiteConfig { seed: 20240611, suites: suites.iter().map(|s| s.to_string()).collect(), ..SuiteConfig::default() }
}

/// Every named record must exist, pass, and have at least `min_cases` cases.
fn records_pass(rep: &SuiteReport, names: &[&str], min_cases: usize) -> (bool, String) {
    let mut bad = Vec::new();
    let mut worst: f64 = 0.0;
    for name in names {
        match rep.record(name) {
            Some(CheckRecord { status: Status::Pass, cases, lhs, .. }) if *cases >= min_cases => {
                worst = worst.max(lhs.abs());
            }
            Some(r) => bad.push(format!("{name}: {:?} {}/{} violations {}", r.status, r.violations, r.cases, r.note)),
            None => bad.push(format!("{name}: missing")),
        }
    }
    if bad.is_empty() {
        (true, format!("{} checks", names.len()))
    } else {
        (false, bad.join("; "))
    }
}

fn golden_indices(dim: usize) -> Result<Vec<(&'static str, i64, i64)>> {
    let z = Symbol::monomial(1, ONE);
    let even = even_module_over_k(dim)?;
    Ok(vec![
        ("odd circle", index_odd_circle(&z, dim)?.index, -1),
        ("index map", index_map_k1(&z, dim)?, -1),
        ("even K, P00", even.pairing_p00.index, 1),
        ("even K, I", even.pairing_i.index, 0),
        ("even circle", even_module_circle_pairing()?.index, 1),
        ("weighted shift", weighted_shift_index(&WeightedShiftSpec::default_table(dim + 8), dim)?.index, 1),
    ])
}

fn criterion_1() -> Line {
    let t = Instant::now();
    let mut misses = Vec::new();
    for dim in [64, 128] {
        match golden_indices(dim) {
            Ok(v) => misses
                .extend(v.into_iter().filter(|(_, got, want)| got != want).map(|(n, got, want)| format!("{n} at {dim}: {got} != {want}"))),
            Err(e) => misses.push(format!("dim {dim}: {e}")),
        }
    }
    let el = t.elapsed();
    let ok = misses.is_empty() && el < Duration::from_secs(30);
    line(ok, if misses.is_empty() { format!("six indices exact at dims 64 and 128 in {el:.2?}") } else { misses.join("; ") })
}

fn criterion_2() -> Line {
    let mut worst: f64 = 0.0;
    for l in 0..=10 {
        let p = match CompactOp::unit(0, l, 32) {
            Ok(p) => p,
            Err(e) => return line(false, e.to_string()),
        };
        for m in 0..=6 {
            for n in 0..=6 - m {
                let want = (1.0 + l as f64).powi((m + n) as i32);
                match norm_mn(&p, m, n) {
                    Ok(v) => worst = worst.max((v - want).abs() / want),
                    Err(e) => return line(false, e.to_string()),
                }
            }
        }
    }
    line(worst < 1e-12, format!("max relative error {worst:.2e} over l <= 10, M + N <= 6"))
}

const NORM_INEQUALITIES: [&str; 11] =
    ["n_basics_2", "n_basics_3_lower", "n_basics_3_upper", "n_basics_4", "n_star", "mn_4", "mn_5", "mn_6", "left_t", "right_t", "t_prod"];

fn criterion_3() -> Line {
    let t = Instant::now();
    let rep = match run_property_suite(&config(&["norms"])) {
        Ok(r) => r,
        Err(e) => return line(false, e.to_string()),
    };
    let el = t.elapsed();
    let (ok, detail) = records_pass(&rep, &NORM_INEQUALITIES, 200);
    let (eq_ok, eq_detail) = records_pass(&rep, &["n_basics_1", "mn_2"], 200);
    line(
        ok && eq_ok && el < Duration::from_secs(120),
        format!("{detail} inequalities plus {eq_detail} identities, 200 cases each, tolerance 1e-9, {el:.2?}"),
    )
}

fn criterion_4(rep: &SuiteReport) -> Line {
    let (ok, detail) = records_pass(rep, &["lift_residual", "classify_delta_k"], 1);
    let cases = rep.record("lift_residual").map(|r| (r.cases, r.lhs)).unwrap_or((0, f64::NAN));
    line(ok && cases.0 >= 50, format!("{detail}; {} lifts, worst residual {:.2e}", cases.0, cases.1))
}

fn criterion_5(rep: &SuiteReport) -> Line {
    let (ok, detail) = records_pass(rep, &["fourier_reconstruction", "fourier_covariance"], 1);
    let worst = ["fourier_reconstruction", "fourier_covariance"].map(|n| rep.record(n).map(|r| r.lhs).unwrap_or(f64::NAN));
    line(ok, format!("{detail}; reconstruction {:.2e}, covariance {:.2e}", worst[0], worst[1]))
}

fn criterion_6() -> Line {
    let g = match SU11Element::new(C64::new(1.25, 0.0), C64::new(0.75, 0.0)) {
        Ok(g) => g,
        Err(e) => return line(false, e.to_string()),
    };
    match mobius_report(&g, 64) {
        Ok(r) => {
            let ok =
                r.isometry_residual < 1e-8 && r.f0_kernel_residual < 1e-8 && r.conjugation_residual < 1e-7 && r.delta_k_w_residual < 1e-8;
            line(
                ok,
                format!(
                    "isometry {:.2e}, kernel {:.2e}, conjugation {:.2e}, delta_K(W) {:.2e} on block {}",
                    r.isometry_residual, r.f0_kernel_residual, r.conjugation_residual, r.delta_k_w_residual, r.central_block
                ),
            )
        }
        Err(e) => line(false, e.to_string()),
    }
}

fn criterion_7(rep: &SuiteReport) -> Line {
    let names = ["smooth_square", "smooth_sine", "smooth_bump", "holo_polynomial", "exp_0n", "exp_of_c"];
    let (ok, detail) = records_pass(rep, &names, 20);
    line(ok, format!("{detail} on 20 self-adjoint operands"))
}

fn criterion_8(rep: &SuiteReport) -> Line {
    let names = ["unit_relations", "label_shift_commutation", "rho_multiplicative", "analytic_product"];
    let (ok, detail) = records_pass(rep, &names, 1);
    let worst = names.iter().filter_map(|n| rep.record(n)).map(|r| r.lhs).fold(0.0f64, f64::max);
    line(ok && worst < 1e-12, format!("{detail}; worst residual {worst:.2e}"))
}

fn criterion_9() -> Line {
    let cfg = SuiteConfig { cases: 40, ..config(&qdisk::suite::SUITES) };
    let run = || run_property_suite(&cfg).map_err(|e| e.to_string()).and_then(|r| serde_json::to_vec(&r).map_err(|e| e.to_string()));
    match (run(), run()) {
        (Ok(a), Ok(b)) => line(a == b, format!("two full runs, {} bytes each, identical: {}", a.len(), a == b)),
        (Err(e), _) | (_, Err(e)) => line(false, e),
    }
}

fn main() {
    let main_report = run_property_suite(&config(&["operators", "derivations", "calculus"]));
    let lines: Vec<Line> = match &main_report {
        Ok(rep) => vec![
            criterion_1(),
            criterion_2(),
            criterion_3(),
            criterion_4(rep),
            criterion_5(rep),
            criterion_6(),
            criterion_7(rep),
            criterion_8(rep),
            criterion_9(),
        ],
        Err(e) => {
            let mut v = vec![criterion_1(), criterion_2(), criterion_3()];
            v.extend((4..=5).map(|_| line(false, e.to_string())));
            v.push(criterion_6());
            v.extend((7..=8).map(|_| line(false, e.to_string())));
            v.push(criterion_9());
            v
        }
    };
    let mut failed = 0;
    for (i, l) in lines.iter().enumerate() {
        println!("criterion {}: {} ({})", i + 1, if l.ok { "PASS" } else { "FAIL" }, l.detail);
        failed += !l.ok as usize;
    }
    println!("acceptance: {} of {} criteria pass", lines.len() - failed, lines.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
