use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use ks_selfsim::analysis::{self, MStarWindow};
use ks_selfsim::bounds;
use ks_selfsim::cumulated::{self, CumulatedParams};
use ks_selfsim::error::Error;
use ks_selfsim::export;
use ks_selfsim::wmodel::{self, WParams, CROSSCHECK_TOL};

mod table;

#[derive(Parser, Debug)]
#[command(
    name = "ks-selfsim",
    version,
    about = "Self-similar Keller-Segel profiles: solves, bounds and bifurcation scans"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format; defaults to json, or csv for sweep and sdiagram
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Write output here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads for sweeps (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
struct CumulatedArgs {
    /// Shooting parameter a = u(0)/2
    #[arg(long)]
    a: f64,
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 30.0)]
    ymax: f64,
}

impl CumulatedArgs {
    fn params(&self) -> Result<CumulatedParams, Error> {
        let p = CumulatedParams::new(self.a, self.tau)
            .with_eps(self.eps)
            .with_y_max(self.ymax);
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args, Debug, Clone, Serialize)]
#[command(allow_negative_numbers = true)]
struct CurveArgs {
    #[arg(long)]
    tau: f64,
    #[arg(long, default_value_t = 1e-3)]
    a_min: f64,
    #[arg(long, default_value_t = 1e4)]
    a_max: f64,
    /// Number of log-spaced samples in a
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 30.0)]
    ymax: f64,
}

impl CurveArgs {
    fn base(&self) -> Result<CumulatedParams, Error> {
        let p = CumulatedParams::new(1.0, self.tau)
            .with_eps(self.eps)
            .with_y_max(self.ymax);
        p.validate()?;
        Ok(p)
    }

    fn window(&self) -> Result<MStarWindow, Error> {
        analysis::log_grid(self.a_min, self.a_max, self.n)?;
        Ok(MStarWindow {
            a_lo: self.a_min,
            a_hi: self.a_max,
            samples: self.n,
        })
    }
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command", content = "parameters")]
enum Command {
    /// Solve the cumulated problem for one (a, tau)
    Solve(CumulatedArgs),
    /// Solve the w-formulation for one (s, tau); --a sets s = log(2a)
    #[command(allow_negative_numbers = true)]
    SolveW {
        #[arg(long, conflicts_with = "a", required_unless_present = "a")]
        s: Option<f64>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        #[arg(long, default_value_t = 10.0)]
        rmax: f64,
    },
    /// Mass curve a -> M(a, tau)/2pi on a log grid
    Sweep(CurveArgs),
    /// Maximal mass over a for one tau
    Mstar(CurveArgs),
    /// Bracket the critical tau where the maximal mass first exceeds 8pi
    #[command(allow_negative_numbers = true)]
    Taustar {
        #[arg(long, default_value_t = 0.5)]
        lo: f64,
        #[arg(long, default_value_t = 1.0)]
        hi: f64,
        #[arg(long, default_value_t = 0.02)]
        width: f64,
        /// Excess of max M/2pi over 4 that counts as supercritical
        #[arg(long, default_value_t = analysis::TAU_STAR_THRESHOLD)]
        threshold: f64,
        /// Log samples per maximal-mass search
        #[arg(long, default_value_t = 200)]
        n: usize,
    },
    /// All a with M(a, tau)/2pi equal to a target
    #[command(allow_negative_numbers = true)]
    Multiplicity {
        #[arg(long)]
        tau: f64,
        /// Target value of M/2pi
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 400)]
        n: usize,
    },
    /// Check every a-priori bound on one solve; exit 1 if any fails
    Verify(CumulatedArgs),
    /// Compare the cumulated and w formulations at s = log(2a)
    #[command(allow_negative_numbers = true)]
    Crosscheck {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        tau: f64,
    },
    /// Large-a concentration diagnostics
    #[command(allow_negative_numbers = true)]
    Dirac {
        #[arg(long)]
        tau: f64,
        /// Increasing list of a values
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000,10000")]
        a: Vec<f64>,
    },
    /// s -> (sigma, v0, M) diagram of the w-formulation
    #[command(allow_negative_numbers = true)]
    Sdiagram {
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value_t = -10.0)]
        s_min: f64,
        #[arg(long, default_value_t = 20.0)]
        s_max: f64,
        #[arg(long, default_value_t = 0.25)]
        ds: f64,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        #[arg(long, default_value_t = 10.0)]
        rmax: f64,
    },
}

impl Command {
    fn default_format(&self) -> Format {
        match self {
            Command::Sweep(_) | Command::Sdiagram { .. } => Format::Csv,
            _ => Format::Json,
        }
    }
}

/// Failures mapped onto exit codes.
enum Failure {
    Usage(String),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::InvalidSeed(_) => Failure::Usage(e.to_string()),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

/// What a command produced.
struct Outcome {
    result: Value,
    diagnostics: Value,
    csv: Option<String>,
    table: Option<String>,
    ok: bool,
}

impl Outcome {
    fn new(result: Value, diagnostics: Value) -> Self {
        Self {
            result,
            diagnostics,
            csv: None,
            table: None,
            ok: true,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let format = cli.format.unwrap_or_else(|| cli.command.default_format());
    if let Some(0) = cli.jobs {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Runtime(e.into()))?;
    let outcome = pool.install(|| execute(&cli.command))?;

    let text = match format {
        Format::Json => {
            let mut config =
                serde_json::to_value(&cli.command).map_err(|e| Failure::Runtime(e.into()))?;
            config["format"] = json!(format);
            config["output"] = json!(cli.output);
            config["jobs"] = json!(cli.jobs);
            export::round_json(&mut config);
            export::to_json_text(&export::envelope(
                config,
                outcome.result,
                outcome.diagnostics,
            ))?
        }
        Format::Csv => match outcome.csv {
            Some(csv) => csv,
            None => {
                return Err(Failure::Usage(
                    "this command has no csv output; use --format json or table".into(),
                ))
            }
        },
        Format::Table => match outcome.table {
            Some(t) => t,
            None => table::render(&outcome.result),
        },
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(|e| Failure::Usage(format!("{e:#}")))?,
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write to stdout")?,
    }
    Ok(outcome.ok)
}

fn execute(command: &Command) -> Result<Outcome, Failure> {
    Ok(match command {
        Command::Solve(args) => {
            let p = args.params()?;
            let prof = cumulated::solve(&p)?;
            let d = cumulated::derive(&prof)?;
            let diag = json!({
                "mass_consistency": d.mass_consistency(),
                "mass_identity_residual": cumulated::mass_identity_residual(&prof, &d)?,
                "phi_at_y_max": d.phi_at_y_max,
                "nodes": prof.nodes().len(),
                "window_nodes": prof.window().len(),
                "y_far": p.y_far(),
            });
            let mut o = Outcome::new(
                export::derived_json(&p, &d)?,
                export::to_rounded_value(&diag)?,
            );
            o.csv = Some(export::profile_csv(&prof)?);
            o
        }
        Command::SolveW {
            s,
            a,
            tau,
            eps,
            rmax,
        } => {
            let s = match (s, a) {
                (Some(s), _) => *s,
                (None, Some(a)) if *a > 0.0 => (2.0 * a).ln(),
                _ => return Err(Failure::Usage("solve-w needs --s or a positive --a".into())),
            };
            let p = WParams::new(s, *tau).with_eps(*eps).with_r_max(*rmax);
            p.validate()?;
            let prof = wmodel::solve_w(&p)?;
            let d = wmodel::derive_w(&prof)?;
            let diag = json!({
                "w_at_r_max": d.w_at_r_max,
                "window_tail": d.window_tail,
                "neglected_bound": d.neglected_bound,
                "nodes": prof.nodes().len(),
                "window_nodes": prof.window().len(),
                "r_far": p.r_far(),
            });
            let mut o = Outcome::new(
                export::w_derived_json(&d)?,
                export::to_rounded_value(&diag)?,
            );
            o.csv = Some(export::w_profile_csv(&prof)?);
            o
        }
        Command::Sweep(args) => {
            let base = args.base()?;
            let grid = analysis::log_grid(args.a_min, args.a_max, args.n)?;
            let curve = analysis::mass_curve_with(&base, &grid)?;
            let diag = json!({
                "failures": curve.failures,
                "envelope_violations": curve.envelope_violations().len(),
            });
            let mut o = Outcome::new(
                export::to_rounded_value(&curve)?,
                export::to_rounded_value(&diag)?,
            );
            o.csv = Some(export::mass_curve_csv(&curve)?);
            o
        }
        Command::Mstar(args) => {
            let m = analysis::m_star_with(&args.base()?, &args.window()?)?;
            Outcome::new(export::to_rounded_value(&m)?, json!({}))
        }
        Command::Taustar {
            lo,
            hi,
            width,
            threshold,
            n,
        } => {
            let window = MStarWindow {
                samples: *n,
                ..Default::default()
            };
            analysis::log_grid(window.a_lo, window.a_hi, window.samples)?;
            let t = analysis::tau_star_with(
                &CumulatedParams::new(1.0, 1.0),
                &window,
                *lo,
                *hi,
                *width,
                *threshold,
            )?;
            Outcome::new(
                export::to_rounded_value(&t)?,
                json!({ "width": t.hi - t.lo }),
            )
        }
        Command::Multiplicity { tau, target, n } => {
            let base = CumulatedParams::new(1.0, *tau);
            base.validate()?;
            let r = analysis::multiplicity_with(&base, *target, *n)?;
            let diag = json!({ "roots_found": r.roots.len(), "failures": r.failures });
            let csv = format!(
                "a,mass_over_2pi\n{}",
                r.roots
                    .iter()
                    .map(|x| format!(
                        "{},{}\n",
                        export::fmt_sig(x.a),
                        export::fmt_sig(x.mass_over_2pi)
                    ))
                    .collect::<String>()
            );
            let mut o = Outcome::new(
                export::to_rounded_value(&r)?,
                export::to_rounded_value(&diag)?,
            );
            o.csv = Some(csv);
            o
        }
        Command::Verify(args) => {
            let report = bounds::check_params(&args.params()?)?;
            let failed: Vec<&str> = report.failures().map(|e| e.name.as_str()).collect();
            for e in report.failures() {
                eprintln!(
                    "FAILED {}: worst slack {:?}, tolerance {:e}, at {:?}",
                    e.name, e.worst_slack, e.tolerance, e.location
                );
            }
            let diag = json!({ "all_passed": failed.is_empty(), "failed": failed });
            let mut o = Outcome::new(export::to_rounded_value(&report)?, diag);
            o.table = Some(report.table());
            o.ok = report.all_passed();
            o
        }
        Command::Crosscheck { a, tau } => {
            CumulatedParams::new(*a, *tau).validate()?;
            let c = wmodel::crosscheck(*a, *tau)?;
            let diag = json!({ "tolerance": CROSSCHECK_TOL, "passed": c.passes(CROSSCHECK_TOL) });
            let mut o = Outcome::new(export::to_rounded_value(&c)?, diag);
            o.ok = c.passes(CROSSCHECK_TOL);
            o
        }
        Command::Dirac { tau, a } => {
            let base = CumulatedParams::new(1.0, *tau);
            base.validate()?;
            let r = analysis::dirac_diagnostic_with(&base, a)?;
            let mut csv = String::from(
                "a,mass_over_2pi,gap,v0,v0_floor,identity_residual,fraction_within_unit\n",
            );
            for row in &r.rows {
                let cols = [
                    row.a,
                    row.mass_over_2pi,
                    row.gap,
                    row.v0,
                    row.v0_floor,
                    row.identity_residual,
                    row.fraction_within_unit,
                ];
                csv.push_str(&cols.map(export::fmt_sig).join(","));
                csv.push('\n');
            }
            let mut o = Outcome::new(export::to_rounded_value(&r)?, json!({}));
            o.csv = Some(csv);
            o
        }
        Command::Sdiagram {
            tau,
            s_min,
            s_max,
            ds,
            eps,
            rmax,
        } => {
            if !(s_max > s_min && *ds > 0.0) {
                return Err(Failure::Usage(
                    "sdiagram needs s-max > s-min and ds > 0".into(),
                ));
            }
            let n = ((s_max - s_min) / ds + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=n).map(|i| s_min + ds * i as f64).collect();
            let base = WParams::new(0.0, *tau).with_eps(*eps).with_r_max(*rmax);
            let d = analysis::s_diagram_with(&base, &grid)?;
            let diag = json!({ "failures": d.failures });
            let mut o = Outcome::new(
                export::to_rounded_value(&d)?,
                export::to_rounded_value(&diag)?,
            );
            o.csv = Some(export::s_diagram_csv(&d)?);
            o
        }
    })
}
