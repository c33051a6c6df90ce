use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use jacobi_envelope::envelope::{delta, sonin_s, window_b};
use jacobi_envelope::extrema::{global_max_of, scan_extrema, DEFAULT_NODES_PER_DEGREE};
use jacobi_envelope::jacobi::{eval_orthonormal, weighted_m};
use jacobi_envelope::verify::{
    fit_exponent, fmt_real, parse_report, sweep, AlphaSpec, BetaMode, Execution, Format, KSpec, Predictor, Report,
    Status, SweepConfig, Tolerances, CHECK_IDS,
};
use jacobi_envelope::{Error, Params, Window};

#[derive(Parser)]
#[command(name = "jacobi-envelope", version, about = "Weighted Jacobi polynomial envelopes and bound verification")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate M, ln M, the orthonormal polynomial and the Sonin function at a point.
    #[command(allow_negative_numbers = true)]
    Eval {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        alpha: f64,
        /// Defaults to alpha.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        x: f64,
        /// full, delta, or custom:DM,DMX
        #[arg(long, default_value = "full")]
        window: String,
    },
    /// List every local extremum of M on the window.
    #[command(allow_negative_numbers = true)]
    Extrema {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value = "full")]
        window: String,
        #[arg(long, default_value_t = DEFAULT_NODES_PER_DEGREE)]
        nodes_per_degree: u32,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run checks over a grid (the config's, or a single point, or a small default grid).
    #[command(allow_negative_numbers = true)]
    Verify {
        /// Check id, comma-separated list, or `all`.
        #[arg(long, default_value = "all")]
        check: String,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// Evaluate parameter points one after another.
        #[arg(long)]
        serial: bool,
    },
    /// Run a full sweep config and write the report.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[arg(long)]
        serial: bool,
    },
    /// Fit the growth exponent of max M from a report.
    Fit {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "alpha")]
        predictor: PredictorArg,
        /// Only rows of this check (default: every global-maximum check, one row per point).
        #[arg(long)]
        check: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PredictorArg {
    Alpha,
    Composite,
}

/// Setup problems exit with 2; everything else is decided by the report.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

const MAX_CHECKS: &[&str] = &["chow_eq1", "emn_eq2", "krasikov_eq3", "lemma_glav", "thm1"];

fn color(code: &str, text: &str) -> String {
    if std::env::var_os("NO_COLOR").is_some() || !std::io::stderr().is_terminal() {
        text.to_string()
    } else {
        format!("\x1b[{code}m{text}\x1b[0m")
    }
}

fn params(k: u32, alpha: f64, beta: Option<f64>) -> Result<Params, Usage> {
    Ok(Params::new(k, alpha, beta.unwrap_or(alpha))?)
}

fn parse_window(spec: &str, p: &Params) -> Result<Window, Usage> {
    match spec {
        "full" => Ok(Window::FULL),
        "delta" => {
            if !p.is_ultraspherical() {
                return Err(Usage(anyhow::anyhow!("--window delta needs alpha = beta")));
            }
            let d = delta(p.k, p.alpha).context("--window delta needs alpha >= 1/2")?;
            Ok(Window::symmetric(d)?)
        }
        s => {
            let Some(rest) = s.strip_prefix("custom:") else {
                return Err(Usage(anyhow::anyhow!("window must be full, delta or custom:DM,DMX (got '{s}')")));
            };
            let (a, b) = rest.split_once(',').context("custom window needs two numbers: custom:DM,DMX")?;
            Ok(Window::new(a.trim().parse()?, b.trim().parse()?)?)
        }
    }
}

fn timestamp() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("unix:{secs}")
}

fn read_config(path: &Path) -> Result<SweepConfig, Usage> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    Ok(SweepConfig::from_json(&text).with_context(|| format!("in {}", path.display()))?)
}

fn format_for(explicit: Option<FormatArg>, out: Option<&Path>, cfg: &SweepConfig) -> Format {
    if let Some(f) = explicit {
        return f.into();
    }
    if let Some(o) = &cfg.output {
        return o.format;
    }
    match out.and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        _ => Format::Csv,
    }
}

fn emit(report: &Report, format: Format, out: Option<&Path>) -> Result<(), Usage> {
    let text = report.render(format, &timestamp());
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing report {}", path.display()))?,
        None => print!("{text}"),
    }
    for (id, c) in &report.metadata.counts {
        let verdict = if c.failed > 0 {
            color("31", "FAIL")
        } else if c.numeric_failure > 0 {
            color("33", "NUMERIC")
        } else {
            color("32", "ok")
        };
        eprintln!(
            "{verdict:>7} {id}: {} checked, {} failed, {} skipped, {} numeric failures",
            c.checked, c.failed, c.skipped_hypothesis, c.numeric_failure
        );
    }
    Ok(())
}

fn default_grid(checks: Vec<String>) -> SweepConfig {
    SweepConfig {
        checks,
        k_spec: KSpec { min: 2, max: 20, step: 1, parity: Default::default() },
        alpha_spec: AlphaSpec::List(vec![0.6, 1.0, 2.0, 5.0]),
        beta_mode: BetaMode::EqualAlpha,
        tolerances: Tolerances::default(),
        output: None,
    }
}

fn run(cli: Cli) -> Result<u8, Usage> {
    match cli.cmd {
        Cmd::Eval { k, alpha, beta, x, window } => {
            let p = params(k, alpha, beta)?;
            let w = parse_window(&window, &p)?;
            let m = weighted_m(&p, x, &w)?;
            let pk = eval_orthonormal(&p, x)?;
            println!("M      = {}", fmt_real(m.value));
            println!("ln M   = {}", fmt_real(m.ln_value));
            println!("P      = {}", fmt_real(pk.to_f64_saturating()));
            println!("ln|P|  = {}", fmt_real(pk.ln_abs()));
            match window_b(&p, x, &w) {
                Ok(b) if b > 0.0 => {
                    let s = sonin_s(&p, x, &w)?;
                    println!("S      = {}", fmt_real(s.value));
                    println!("ln S   = {}", fmt_real(s.ln_value));
                }
                Ok(b) => println!("S      = n/a (B = {} <= 0)", fmt_real(b)),
                Err(e) => println!("S      = n/a ({e})"),
            }
            Ok(0)
        }
        Cmd::Extrema { k, alpha, beta, window, nodes_per_degree, csv } => {
            let p = params(k, alpha, beta)?;
            let w = parse_window(&window, &p)?;
            let recs = scan_extrema(&p, &w, nodes_per_degree)?;
            let mut table = String::from("index,kind,x,M,ln_M\n");
            for r in &recs {
                let kind = match r.kind {
                    jacobi_envelope::extrema::Kind::Max => "max",
                    jacobi_envelope::extrema::Kind::Min => "min",
                };
                table.push_str(&format!("{},{kind},{},{},{}\n", r.index, fmt_real(r.x), fmt_real(r.m), fmt_real(r.ln_m)));
            }
            match csv {
                Some(path) => fs::write(&path, &table).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{table}"),
            }
            let g = global_max_of(&p, &w, &recs)?;
            eprintln!("global max: M = {} at x = {}", fmt_real(g.m), fmt_real(g.x));
            Ok(0)
        }
        Cmd::Verify { check, config, out, format, k, alpha, beta, serial } => {
            let checks: Vec<String> = check.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            let mut cfg = match (&config, k, alpha) {
                (Some(path), None, None) => read_config(path)?,
                (None, Some(k), Some(a)) => SweepConfig {
                    k_spec: KSpec { min: k, max: k, step: 1, parity: Default::default() },
                    alpha_spec: AlphaSpec::List(vec![a]),
                    beta_mode: match beta {
                        Some(b) => BetaMode::Grid(vec![b]),
                        None => BetaMode::EqualAlpha,
                    },
                    ..default_grid(Vec::new())
                },
                (None, None, None) => default_grid(Vec::new()),
                _ => return Err(Usage(anyhow::anyhow!("use either --config or both --k and --alpha"))),
            };
            // --check overrides the config's list unless left at its default with a config given
            if config.is_none() || check != "all" {
                cfg.checks = checks;
            }
            let format = format_for(format, out.as_deref(), &cfg);
            let out = out.or_else(|| cfg.output.as_ref().map(|o| PathBuf::from(&o.path)));
            let report = sweep(&cfg, if serial { Execution::Serial } else { Execution::Parallel })?;
            emit(&report, format, out.as_deref())?;
            Ok(report.exit_code() as u8)
        }
        Cmd::Sweep { config, out, format, serial } => {
            let cfg = read_config(&config)?;
            let format = format_for(format, Some(&out), &cfg);
            let report = sweep(&cfg, if serial { Execution::Serial } else { Execution::Parallel })?;
            emit(&report, format, Some(&out))?;
            Ok(report.exit_code() as u8)
        }
        Cmd::Fit { input, predictor, check } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let mut rows = parse_report(&text).with_context(|| format!("in {}", input.display()))?;
            match &check {
                Some(id) => {
                    if !CHECK_IDS.contains(&id.as_str()) {
                        return Err(Usage(anyhow::anyhow!("unknown check id '{id}'")));
                    }
                    rows.retain(|r| &r.check_id == id);
                }
                None => {
                    rows.retain(|r| MAX_CHECKS.contains(&r.check_id.as_str()) && r.status == Status::Checked);
                    rows.sort_by(|a, b| (a.k, a.alpha, a.beta).partial_cmp(&(b.k, b.alpha, b.beta)).unwrap());
                    rows.dedup_by(|a, b| (a.k, a.alpha.to_bits(), a.beta.to_bits()) == (b.k, b.alpha.to_bits(), b.beta.to_bits()));
                }
            }
            let pred = match predictor {
                PredictorArg::Alpha => Predictor::Alpha,
                PredictorArg::Composite => Predictor::AlphaComposite,
            };
            let fit = fit_exponent(&rows, pred)?;
            println!("slope  = {}", fmt_real(fit.slope));
            println!("stderr = {}", fmt_real(fit.stderr));
            println!("n      = {}", fit.n);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Usage(e)) => {
            let tag = match e.downcast_ref::<Error>() {
                Some(Error::Config(_)) => "config error",
                _ => "error",
            };
            eprintln!("{}: {e:#}", color("31", tag));
            ExitCode::from(2)
        }
    }
}
