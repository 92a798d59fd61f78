use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use abstain::divergences::{
    chernoff, d_star, fidelity, max_relative_entropy, min_relative_entropy_zero, petz, projective_metrics,
    relative_entropy, reverse_sandwiched, sandwiched,
};
use abstain::io::{fmt15, fmt17, parse_state_or_distribution, StateInput};
use abstain::measured::measured_relative_entropy;
use abstain::pinching::{pinching_scan as scan_pinching, PinchDirection};
use abstain::regions::{boundary_scan, BoundaryKind, ScanParams, SymmetricMode};
use abstain::sequential::{estimate_statistics, optimal_measurements, HypothesisSummary, ProtocolConfig};
use abstain::states::{ClassicalDistribution, DensityMatrix};
use abstain::types::{eval_hoeffding_test, eval_reject_test, eval_stein_test, stein_delta, EngineConfig, Fallback};
use acceptance::{run_suites, Suite};

use crate::manifest::RunManifest;
use crate::{read_input, CliError, CliResult, GlobalOpts};

const DEFAULT_SEED: u64 = 0x5EED;

fn arguments<A: Serialize>(args: &A, g: &GlobalOpts) -> Value {
    json!({ "command": args, "global": g })
}

fn load_state(path: &PathBuf, manifest: &mut RunManifest) -> CliResult<DensityMatrix> {
    let text = read_input(path)?;
    manifest.input(path, &text);
    Ok(parse_state_or_distribution(&text, true)?.to_density()?)
}

fn load_distribution(path: &PathBuf, manifest: &mut RunManifest) -> CliResult<ClassicalDistribution> {
    let text = read_input(path)?;
    manifest.input(path, &text);
    match parse_state_or_distribution(&text, true)? {
        StateInput::Classical(p) => Ok(p),
        StateInput::Quantum(s) => s
            .diagonal_probs(1e-12)
            .ok_or_else(|| CliError::input(format!("{}: state is not diagonal", path.display())))
            .and_then(|p| Ok(ClassicalDistribution::new(p)?)),
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("JSON value serializes") + "\n"
}

fn finish(manifest: RunManifest, out: Option<&Path>, contents: &str) -> CliResult<()> {
    if let Some(path) = out {
        manifest.write_output(path, contents)?;
    }
    Ok(())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum DivergenceKind {
    Umegaki,
    Petz,
    Sandwiched,
    ReverseSandwiched,
    Max,
    MinZero,
    NegLogFidelity,
    Chernoff,
    DStar,
    Measured,
    Hilbert,
    Thompson,
}

#[derive(Args, Debug, Serialize)]
pub struct DivergenceArgs {
    #[arg(long, value_enum)]
    pub kind: DivergenceKind,
    /// Rényi order for the petz, sandwiched and reverse_sandwiched kinds.
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long)]
    pub sigma: PathBuf,
    /// Also write the JSON record (and its manifest) to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn divergence(a: &DivergenceArgs, g: &GlobalOpts) -> CliResult<()> {
    let mut manifest = RunManifest::new("divergence", arguments(a, g), None);
    let rho = load_state(&a.rho, &mut manifest)?;
    let sigma = load_state(&a.sigma, &mut manifest)?;
    let order = || a.s.ok_or_else(|| CliError::input(format!("--s is required for kind {:?}", a.kind)));
    let mut extra = json!({});
    let nats = match a.kind {
        DivergenceKind::Umegaki => relative_entropy(&rho, &sigma)?,
        DivergenceKind::Petz => petz(order()?, &rho, &sigma)?,
        DivergenceKind::Sandwiched => sandwiched(order()?, &rho, &sigma)?,
        DivergenceKind::ReverseSandwiched => reverse_sandwiched(order()?, &rho, &sigma)?,
        DivergenceKind::Max => max_relative_entropy(&rho, &sigma)?,
        DivergenceKind::MinZero => min_relative_entropy_zero(&rho, &sigma),
        DivergenceKind::NegLogFidelity => -fidelity(&rho, &sigma).ln(),
        DivergenceKind::Chernoff => chernoff(&rho, &sigma)?,
        DivergenceKind::DStar => {
            let d = d_star(&rho, &sigma)?;
            extra = json!({ "check": d.check, "step": d.step, "lower": d.lower, "upper": d.upper, "bracket_ok": d.bracket_ok });
            d.value
        }
        DivergenceKind::Measured => {
            let m = measured_relative_entropy(&rho, &sigma)?;
            extra = json!({ "quality": m.quality });
            m.value
        }
        DivergenceKind::Hilbert => projective_metrics(&rho, &sigma)?.0,
        DivergenceKind::Thompson => projective_metrics(&rho, &sigma)?.1,
    };
    let value = nats * g.base.from_nats();
    let record = json!({
        "kind": a.kind,
        "s": a.s,
        "base": g.base,
        "dim": rho.dim(),
        "value": value,
        "value_nats": nats,
        "details": extra,
    });
    let text = pretty(&record);
    if g.json {
        print!("{text}");
    } else {
        println!("{}", fmt15(value));
    }
    finish(manifest, a.out.as_deref(), &text)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Average,
    Maximal,
}

#[derive(Args, Debug, Serialize)]
pub struct RegionArgs {
    /// Boundary kind, e.g. deterministic_hoeffding or conclusive_KL_slice.
    #[arg(long)]
    pub which: String,
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long)]
    pub sigma: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Conclusiveness exponent under ρ, in the chosen base.
    #[arg(long, default_value_t = 0.0)]
    pub k: f64,
    /// Conclusiveness exponent under σ, in the chosen base.
    #[arg(long, default_value_t = 0.0)]
    pub l: f64,
    /// Fixed Z for a single symmetric row, in the chosen base.
    #[arg(long = "Z")]
    pub z: Option<f64>,
    /// Upper end of the Z grid for symmetric scans, in the chosen base.
    #[arg(long = "Z-max")]
    pub z_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Average)]
    pub mode: ModeArg,
    /// Output CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn region(a: &RegionArgs, g: &GlobalOpts) -> CliResult<()> {
    let mut manifest = RunManifest::new("region", arguments(a, g), None);
    let kind = BoundaryKind::parse(&a.which)?;
    let rho = load_state(&a.rho, &mut manifest)?;
    let sigma = load_state(&a.sigma, &mut manifest)?;
    let to_nats = 1.0 / g.base.from_nats();
    let params = ScanParams {
        k: a.k * to_nats,
        l: a.l * to_nats,
        z: a.z.map(|z| z * to_nats),
        z_max: a.z_max.map(|z| z * to_nats),
        mode: match a.mode {
            ModeArg::Average => SymmetricMode::Average,
            ModeArg::Maximal => SymmetricMode::Maximal,
        },
    };
    let boundary = boundary_scan(kind, &params, &rho, &sigma, a.samples)?.scaled(g.base.from_nats());
    let text = if g.json { pretty(&boundary.to_json()) } else { boundary.to_csv() };
    if a.out.is_none() {
        print!("{text}");
    } else if !g.json {
        println!("{} points", boundary.points.len());
    }
    finish(manifest, a.out.as_deref(), &text)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassicalMode {
    Stein,
    Reject,
    Hoeffding,
}

#[derive(Args, Debug, Serialize)]
pub struct ClassicalArgs {
    /// Bernoulli parameter of P.
    #[arg(long = "P", conflicts_with = "p_file")]
    pub p: Option<f64>,
    /// Bernoulli parameter of Q.
    #[arg(long = "Q", conflicts_with = "q_file")]
    pub q: Option<f64>,
    /// Distribution file for P.
    #[arg(long)]
    pub p_file: Option<PathBuf>,
    /// Distribution file for Q.
    #[arg(long)]
    pub q_file: Option<PathBuf>,
    #[arg(long)]
    pub n: u64,
    #[arg(long, value_enum)]
    pub mode: ClassicalMode,
    /// Typicality radius for the stein mode; defaults to n^{-1/3}.
    #[arg(long)]
    pub delta: Option<f64>,
    /// K for the reject mode, in the chosen base.
    #[arg(long, default_value_t = 0.0)]
    pub k: f64,
    /// L for the reject mode, in the chosen base.
    #[arg(long, default_value_t = 0.0)]
    pub l: f64,
    /// Type-I exponent A for the hoeffding mode, in the chosen base.
    #[arg(long, default_value_t = 0.0)]
    pub a: f64,
    /// Refuse instead of falling back to Monte Carlo when enumeration is too large.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn pick_distribution(
    param: Option<f64>,
    file: &Option<PathBuf>,
    name: &str,
    manifest: &mut RunManifest,
) -> CliResult<ClassicalDistribution> {
    match (param, file) {
        (Some(p), _) => Ok(ClassicalDistribution::bernoulli(p)?),
        (None, Some(path)) => load_distribution(path, manifest),
        (None, None) => Err(CliError::input(format!("either --{name} or --{}-file is required", name.to_lowercase()))),
    }
}

pub fn simulate_classical(a: &ClassicalArgs, g: &GlobalOpts) -> CliResult<()> {
    let mut manifest = RunManifest::new("simulate-classical", arguments(a, g), Some(a.seed));
    let p = pick_distribution(a.p, &a.p_file, "P", &mut manifest)?;
    let q = pick_distribution(a.q, &a.q_file, "Q", &mut manifest)?;
    let cfg = if a.exact {
        EngineConfig::exact_only()
    } else {
        EngineConfig { fallback: Fallback::MonteCarlo { trials: a.trials, seed: a.seed }, ..EngineConfig::default() }
    };
    let to_nats = 1.0 / g.base.from_nats();
    let delta = a.delta.unwrap_or_else(|| stein_delta(a.n));
    let stats = match a.mode {
        ClassicalMode::Stein => eval_stein_test(&p, &q, a.n, delta, &cfg)?,
        ClassicalMode::Reject => eval_reject_test(&p, &q, a.n, a.k * to_nats, a.l * to_nats, &cfg)?,
        ClassicalMode::Hoeffding => eval_hoeffding_test(&p, &q, a.n, a.a * to_nats, &cfg)?,
    };
    let f = g.base.from_nats();
    let exponents = json!({
        "alpha": stats.alpha_exponent() * f,
        "beta": stats.beta_exponent() * f,
        "abstain_P": stats.abstain_exponent_p() * f,
        "abstain_Q": stats.abstain_exponent_q() * f,
    });
    let record = json!({
        "config": {
            "P": p.probs(),
            "Q": q.probs(),
            "n": a.n,
            "mode": a.mode,
            "delta": matches!(a.mode, ClassicalMode::Stein).then_some(delta),
            "K_nats": a.k * to_nats,
            "L_nats": a.l * to_nats,
            "A_nats": a.a * to_nats,
            "exact_only": a.exact,
            "trials": a.trials,
            "seed": a.seed,
            "base": g.base,
        },
        "statistics": stats.to_json(),
        "exponents": exponents,
    });
    let text = pretty(&record);
    if g.json {
        print!("{text}");
    } else {
        println!("exact {}", stats.exact);
        for (name, v) in [
            ("alpha_exponent", stats.alpha_exponent()),
            ("beta_exponent", stats.beta_exponent()),
            ("abstain_exponent_P", stats.abstain_exponent_p()),
            ("abstain_exponent_Q", stats.abstain_exponent_q()),
        ] {
            println!("{name} {}", fmt15(v * f));
        }
        println!("pi_P {}", fmt15(stats.log_pi_p.exp()));
        println!("pi_Q {}", fmt15(stats.log_pi_q.exp()));
    }
    finish(manifest, a.out.as_deref(), &text)
}

#[derive(Args, Debug, Serialize)]
pub struct SequentialArgs {
    /// State file for ρ; defaults to diag(0.9, 0.1).
    #[arg(long)]
    pub rho: Option<PathBuf>,
    /// State file for σ; defaults to diag(0.2, 0.8).
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    /// Threshold slack ε in bits.
    #[arg(long, default_value_t = 0.3)]
    pub epsilon_bits: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn summary_json(h: &HypothesisSummary, f: f64) -> Value {
    json!({
        "counts": h.counts,
        "conditional_error": h.conditional_error,
        "conclusive": h.conclusive,
        "mean_rate": h.mean_rate * f,
        "drift": h.drift,
        "error_bound": h.error_bound,
        "azuma": h.azuma,
        "no_switch_fraction": h.no_switch_fraction,
    })
}

pub fn simulate_sequential(a: &SequentialArgs, g: &GlobalOpts) -> CliResult<()> {
    let start = Instant::now();
    let mut manifest = RunManifest::new("simulate-sequential", arguments(a, g), Some(a.seed));
    let rho = match &a.rho {
        Some(p) => load_state(p, &mut manifest)?,
        None => DensityMatrix::from_probs(&[0.9, 0.1])?,
    };
    let sigma = match &a.sigma {
        Some(p) => load_state(p, &mut manifest)?,
        None => DensityMatrix::from_probs(&[0.2, 0.8])?,
    };
    let pair = optimal_measurements(&rho, &sigma)?;
    let epsilon = a.epsilon_bits * std::f64::consts::LN_2;
    let cfg = ProtocolConfig::new(&pair, a.n, epsilon, a.seed, a.trials)?;
    let rep = estimate_statistics(&pair, &cfg)?;
    let f = g.base.from_nats();
    let mut record = json!({
        "config": {
            "n": cfg.n,
            "epsilon_bits": a.epsilon_bits,
            "epsilon_nats": cfg.epsilon,
            "A_n": cfg.a_n,
            "B_n": cfg.b_n,
            "L_bound": cfg.l_bound,
            "seed": cfg.seed,
            "trials": cfg.trials,
            "base": g.base,
        },
        "measurements": {
            "D_M_rho_sigma": pair.d_rho_sigma * f,
            "D_M_sigma_rho": pair.d_sigma_rho * f,
            "quality": pair.quality,
            "distinct": pair.distinct,
        },
        "statistics": {
            "alpha_bar": rep.rho.conditional_error,
            "beta_bar": rep.sigma.conditional_error,
            "pi_rho": rep.rho.conclusive,
            "pi_sigma": rep.sigma.conclusive,
        },
        "under_rho": summary_json(&rep.rho, f),
        "under_sigma": summary_json(&rep.sigma, f),
    });
    let text = pretty(&record);
    record["wall_clock_secs"] = json!(start.elapsed().as_secs_f64());
    if g.json {
        print!("{}", pretty(&record));
    } else {
        for (name, e) in [
            ("alpha_bar", rep.rho.conditional_error),
            ("beta_bar", rep.sigma.conditional_error),
            ("pi_rho", rep.rho.conclusive),
            ("pi_sigma", rep.sigma.conclusive),
        ] {
            println!("{name} {} [{}, {}]", fmt15(e.value), fmt15(e.lower), fmt15(e.upper));
        }
        println!("mean_rate_rho {}", fmt15(rep.rho.mean_rate * f));
        println!("mean_rate_sigma {}", fmt15(rep.sigma.mean_rate * f));
        println!("wall_clock_secs {:.3}", start.elapsed().as_secs_f64());
    }
    finish(manifest, a.out.as_deref(), &text)
}

#[derive(Args, Debug, Serialize)]
pub struct PinchingArgs {
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long)]
    pub sigma: PathBuf,
    /// Rényi order.
    #[arg(long)]
    pub s: f64,
    #[arg(long, default_value_t = 8)]
    pub k_max: usize,
    /// pinch_first_arg or pinch_second_arg.
    #[arg(long, default_value = "pinch_first_arg")]
    pub direction: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn pinching_scan(a: &PinchingArgs, g: &GlobalOpts) -> CliResult<()> {
    let mut manifest = RunManifest::new("pinching-scan", arguments(a, g), None);
    let dir = PinchDirection::parse(&a.direction)?;
    let rho = load_state(&a.rho, &mut manifest)?;
    let sigma = load_state(&a.sigma, &mut manifest)?;
    let rows = scan_pinching(a.s, &rho, &sigma, a.k_max, dir)?;
    let f = g.base.from_nats();
    let text = if g.json {
        let rows: Vec<Value> = rows
            .iter()
            .map(|r| json!({ "k": r.k, "rate": r.rate * f, "target": r.target * f, "gap": r.gap * f, "bound": r.bound * f }))
            .collect();
        pretty(&json!({ "s": a.s, "direction": dir, "base": g.base, "rows": rows }))
    } else {
        let mut csv = String::from("k,rate,target,gap,bound\n");
        for r in &rows {
            let cells = [r.rate, r.target, r.gap, r.bound].map(|x| fmt17(x * f));
            csv.push_str(&format!("{},{}\n", r.k, cells.join(",")));
        }
        csv
    };
    if a.out.is_none() {
        print!("{text}");
    }
    finish(manifest, a.out.as_deref(), &text)
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    /// divergences, regions, classical, sequential, pinching or all.
    #[arg(long, default_value = "all")]
    pub suite: String,
}

pub fn verify(a: &VerifyArgs, g: &GlobalOpts) -> CliResult<()> {
    let suites = Suite::parse(&a.suite).ok_or_else(|| {
        CliError::input(format!("unknown suite '{}'; expected divergences, regions, classical, sequential, pinching or all", a.suite))
    })?;
    let reports = run_suites(&suites);
    if g.json {
        print!("{}", pretty(&serde_json::to_value(&reports).expect("reports serialize")));
    } else {
        for r in &reports {
            println!(
                "{} criterion {:>2}: {} ({:.1} s)",
                if r.passed() { "PASS" } else { "FAIL" },
                r.id,
                r.title,
                r.elapsed_secs
            );
            if let Some(e) = &r.error {
                println!("    error: {e}");
            }
            for c in &r.checks {
                println!(
                    "    [{}] {:<52} measured {:>23}  expected {:?} {:>23}  tol {:e}",
                    if c.pass { "ok" } else { "!!" },
                    c.name,
                    fmt15(c.measured),
                    c.relation,
                    fmt15(c.expected),
                    c.tolerance
                );
            }
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(CliError { code: 1, message: format!("{failed} of {} criteria failed", reports.len()) });
    }
    Ok(())
}
