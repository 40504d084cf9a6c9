use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use qdisk::calculus::{exp_compact, holo_calc, invert_one_plus, smooth_calc_sa, Contour, PeriodicExtension};
use qdisk::derivations::lift_derivation;
use qdisk::khomology::{
    even_module_circle_pairing, even_module_over_k, index_map_k1, index_odd_circle, spectral_d_scaling_index, spectral_triple_d_index,
    weighted_shift_index, WeightedShiftSpec,
};
use qdisk::linalg::{hermitian_apply, identity, max_abs, op_norm, ONE};
use qdisk::mobius::{mobius_report, SU11Element};
use qdisk::norms::{norm_reports, single_operand_inequalities};
use qdisk::suite::{run_property_suite, SuiteConfig, SUITES};
use qdisk::{CompactOp, Symbol, ToeplitzElem, C64};

#[derive(Parser)]
#[command(name = "qdisk", version, about = "Numerical lab for the smooth Toeplitz algebra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Function {
    Exp,
    InverseShift,
    Square,
    Fourier,
}

#[derive(Clone, Copy, ValueEnum)]
enum Module {
    OddCircle,
    IndexMap,
    #[value(name = "even-K")]
    EvenK,
    WeightedShift,
    #[value(name = "spectral-D")]
    SpectralD,
    EvenCircle,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded property suites; exit status 1 if any check fails.
    Suite {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, env = "QDISK_DIM", default_value_t = 64)]
        dim: usize,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        /// Comma-separated suite names; all by default.
        #[arg(long, value_delimiter = ',')]
        suites: Vec<String>,
        #[arg(long, default_value_t = 200)]
        cases: usize,
        #[arg(long = "max-MN", default_value_t = 3)]
        max_mn: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Norm table of an operator given as `{dim, entries}` or `{symbol, compact}` JSON.
    Norms {
        /// JSON file, or `-` for stdin.
        #[arg(long, default_value = "-")]
        input: String,
        #[arg(long = "M", default_value_t = 2)]
        m: usize,
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
        /// Also evaluate the one-operand norm inequalities at (M, N).
        #[arg(long)]
        all_inequalities: bool,
    },
    /// Lift a derivation from `{b, c}` = (delta(U), delta(U*)).
    Lift {
        #[arg(long, default_value = "-")]
        input: String,
    },
    /// Mobius action of g = (alpha, beta) on the shift.
    Mobius {
        #[arg(long, allow_hyphen_values = true)]
        alpha_re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        alpha_im: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta_re: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        beta_im: f64,
        #[arg(long, env = "QDISK_DIM", default_value_t = 64)]
        dim: usize,
    },
    /// Functional calculus of a finitely supported operand.
    Calculus {
        #[arg(long, default_value = "-")]
        input: String,
        #[arg(long, value_enum)]
        function: Function,
        /// Period of the extension (square, fourier).
        #[arg(long = "L")]
        period: Option<f64>,
        /// Quadrature nodes on the contour (exp).
        #[arg(long, default_value_t = 64)]
        nodes: usize,
        /// Symbol JSON with the coefficients of an L-periodic function in x / L (fourier).
        #[arg(long)]
        fourier: Option<PathBuf>,
    },
    /// Index pairings of the Fredholm modules.
    Index {
        #[arg(long, value_enum)]
        module: Module,
        /// Symbol JSON (odd-circle, index-map) or weighted-shift spec JSON; defaults are z and the built-in table.
        #[arg(long)]
        input: Option<String>,
        #[arg(long, env = "QDISK_DIM", default_value_t = 64)]
        dim: usize,
        /// Mode band for spectral-D.
        #[arg(long, default_value_t = 2)]
        band: usize,
    },
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn parse<T: DeserializeOwned>(path: &str) -> Result<T> {
    serde_json::from_str(&read_input(path)?).with_context(|| format!("parsing {path}"))
}

fn print_json(v: &impl Serialize) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Operand {
    Toeplitz(ToeplitzElem),
    Compact(CompactOp),
}

impl Operand {
    fn into_elem(self) -> ToeplitzElem {
        match self {
            Operand::Toeplitz(t) => t,
            Operand::Compact(c) => c.into(),
        }
    }
}

#[derive(Deserialize)]
struct LiftInput {
    b: CompactOp,
    c: CompactOp,
}

fn suite_report(cfg: SuiteConfig, out: Option<PathBuf>, format: Format) -> Result<bool> {
    let rep = run_property_suite(&cfg)?;
    let bytes = match format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(&rep)?;
            v.push(b'\n');
            v
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rep.records {
                w.serialize(r)?;
            }
            w.into_inner()?
        }
    };
    match out {
        Some(p) => fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => io::stdout().lock().write_all(&bytes)?,
    }
    eprintln!("{} checks: {} passed, {} failed, {} info", rep.summary.checks, rep.summary.passed, rep.summary.failed, rep.summary.info);
    Ok(rep.all_passed())
}

fn calculus(input: &str, function: Function, period: Option<f64>, nodes: usize, fourier: Option<PathBuf>) -> Result<()> {
    let c: CompactOp = parse(input)?;
    let block = c.support_block();
    let n = block.nrows();
    let norm = op_norm(&block);
    let on_block = |v: &CompactOp| v.matrix().view((0, 0), (n, n)).into_owned();
    let (value, residual, extra) = match function {
        Function::Exp => {
            let h = holo_calc(&c, &|z: C64| z.exp(), &Contour::around(&block).with_nodes(nodes))?;
            let r = max_abs(&(h.value.matrix() - exp_compact(&c).matrix()));
            (h.value, r, json!({ "spectral_ratio": h.spectral_ratio, "oracle": "scaling and squaring" }))
        }
        Function::InverseShift => {
            let inv = invert_one_plus(&c)?;
            let id = identity(n);
            let r = max_abs(&((&id + &block) * (&id + on_block(&inv.value)) - &id));
            (inv.value, r, json!({ "decay_profile": inv.decay_profile, "oracle": "(I + c)(I + v) - I" }))
        }
        Function::Square => {
            let half = 1.01 * norm + 1e-3;
            let ext = PeriodicExtension::build(&|x| x * x, half, period.unwrap_or(4.0 * half))?;
            let v = smooth_calc_sa(&c, &ext)?;
            let r = max_abs(&(on_block(&v) - hermitian_apply(&block, |x| x * x)));
            (v, r, json!({ "period": ext.period, "reproduction_error": ext.reproduction_error, "oracle": "eigendecomposition" }))
        }
        Function::Fourier => {
            let Some(path) = fourier else { bail!("--fourier is required for --function fourier") };
            let Some(l) = period else { bail!("--L is required for --function fourier") };
            let coeffs: Symbol = parse(&path.to_string_lossy())?;
            let ext = PeriodicExtension { period: l, coeffs, half_width: l / 2.0, reproduction_error: 0.0 };
            let v = smooth_calc_sa(&c, &ext)?;
            let g0 = ext.eval(0.0);
            let oracle = hermitian_apply(&block, |x| ext.eval(x)) - identity(n) * C64::new(g0, 0.0);
            let r = max_abs(&(on_block(&v) - oracle));
            (v, r, json!({ "period": l, "oracle": "eigendecomposition" }))
        }
    };
    print_json(&json!({ "value": value, "residual": residual, "details": extra }))
}

fn index(module: Module, input: Option<String>, dim: usize, band: usize) -> Result<()> {
    let symbol = || -> Result<Symbol> { input.as_deref().map(parse).unwrap_or_else(|| Ok(Symbol::monomial(1, ONE))) };
    let spec = |len: usize| -> Result<WeightedShiftSpec> {
        input.as_deref().map(parse).unwrap_or_else(|| Ok(WeightedShiftSpec::default_table(len)))
    };
    match module {
        Module::OddCircle => print_json(&index_odd_circle(&symbol()?, dim)?),
        Module::IndexMap => print_json(&json!({ "index": index_map_k1(&symbol()?, dim)? })),
        Module::EvenK => print_json(&even_module_over_k(dim)?),
        Module::WeightedShift => print_json(&weighted_shift_index(&spec(dim + 8)?, dim)?),
        Module::SpectralD => {
            let s = spec(4 * dim + band + 8)?;
            let fixed = spectral_triple_d_index(&s, band, dim)?;
            let scaling = spectral_d_scaling_index(&s, band, dim)?;
            print_json(&json!({ "fixed_threshold": fixed, "scaling": scaling }))
        }
        Module::EvenCircle => print_json(&even_module_circle_pairing()?),
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Suite { seed, dim, tolerance, suites, cases, max_mn, out, format } => {
            let suites = if suites.is_empty() { SUITES.iter().map(|s| s.to_string()).collect() } else { suites };
            return suite_report(SuiteConfig { seed, dim, max_mn, tolerance, suites, cases }, out, format);
        }
        Command::Norms { input, m, n, all_inequalities } => {
            let a = parse::<Operand>(&input)?.into_elem();
            let norms = norm_reports(&a, m, n)?;
            if all_inequalities {
                print_json(&json!({ "norms": norms, "inequalities": single_operand_inequalities(&a, m, n)? }))?;
            } else {
                print_json(&norms)?;
            }
        }
        Command::Lift { input } => {
            let LiftInput { b, c } = parse(&input)?;
            let r = lift_derivation(&b, &c)?;
            print_json(&json!({ "f": r.f, "alpha_tilde": r.alpha_tilde, "residuals": r.residuals }))?;
        }
        Command::Mobius { alpha_re, alpha_im, beta_re, beta_im, dim } => {
            let g = SU11Element::new(C64::new(alpha_re, alpha_im), C64::new(beta_re, beta_im))?;
            print_json(&mobius_report(&g, dim)?)?;
        }
        Command::Calculus { input, function, period, nodes, fourier } => calculus(&input, function, period, nodes, fourier)?,
        Command::Index { module, input, dim, band } => index(module, input, dim, band)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
