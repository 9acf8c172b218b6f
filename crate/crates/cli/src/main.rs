//! `qmeas`: classification, moment reports, trajectories, distribution
//! transforms, oracle runs and the verification suite.
//!
//! Exit codes: 0 success, 1 failed verification, 2 degenerate or
//! negative-determinant interaction, 64 usage, 73 grid failure, 74 I/O.

// `!(x > 0.0)` is how NaN gets rejected along with the non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod config;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use qmeas_core::distribution::{
    distribution_error_disturbance, format_real, general_output_distributions, GriddedDistribution, InputDistributions,
};
use qmeas_core::fourier::KernelSign;
use qmeas_core::interaction::{classify, InteractionParams};
use qmeas_core::moments::{extended_real, log_spaced, report, trajectory, ObjectStateSpec, ProbeStateSpec};
use qmeas_core::oracle::apply_interaction;
use qmeas_core::verify::{self, compare_with_oracle, fig1_gains, Level, OracleCase, VerifyConfig};
use qmeas_core::{Error, Hbar, UncertaintyReport};

use args::{
    ClassifyArgs, Cli, Coefficients, Command, DataFormat, LevelArg, OracleArgs, ReportArgs, SimulateArgs, States,
    TextFormat, TrajectoryArgs, VerifyArgs,
};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_DEGENERATE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_GRID: u8 = 73;
const EXIT_IO: u8 = 74;

#[derive(Debug)]
enum Failure {
    Core(Error),
    Usage(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::DegenerateInteraction { .. } | Error::NegativeDeterminant { .. } => EXIT_DEGENERATE,
        Error::GridTooNarrow(_)
        | Error::GridResolution { .. }
        | Error::Extrapolation { .. }
        | Error::MismatchedGrids { .. }
        | Error::InvalidDistribution(_)
        | Error::InvalidWavefunction(_) => EXIT_GRID,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    let args = match config::merge(std::env::args_os().collect()) {
        Ok(args) => args,
        Err(config::ConfigError::Io(e)) => {
            eprintln!("error: cannot read config file: {e}");
            return ExitCode::from(EXIT_IO);
        }
        Err(config::ConfigError::Syntax(msg)) => {
            eprintln!("error: config file: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Report(a) => cmd_report(a),
        Command::Trajectory(a) => cmd_trajectory(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Verify) => ExitCode::from(EXIT_VERIFY_FAILED),
    }
}

fn params_of(c: &Coefficients) -> Result<InteractionParams, Error> {
    InteractionParams::new(c.a, c.b, c.c, c.d)
}

fn states_of(s: &States) -> Result<(Hbar, ObjectStateSpec, ProbeStateSpec), Failure> {
    if !(s.hbar > 0.0) || !s.hbar.is_finite() {
        return Err(Failure::Usage(format!("--hbar must be positive, got {}", s.hbar)));
    }
    let hbar = Hbar(s.hbar);
    let sigma_p = s.sigma_p.unwrap_or(hbar.half() / s.sigma_q);
    let sigma_big_p = s.sigma_big_p.unwrap_or(hbar.half() / s.sigma_big_q);
    let object = ObjectStateSpec::new(0.0, 0.0, s.sigma_q, sigma_p, hbar)?;
    let probe = ProbeStateSpec::new(s.sigma_big_q, sigma_big_p, hbar)?;
    Ok((hbar, object, probe))
}

/// Writes `text` to `path`, or to stdout when there is no path.
fn emit(path: Option<&Path>, text: &str) -> Outcome {
    match path {
        Some(p) => fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

fn fmt_matrix(m: &[[f64; 2]; 2]) -> String {
    format!("[[{}, {}], [{}, {}]]", m[0][0], m[0][1], m[1][0], m[1][1])
}

fn cmd_classify(args: ClassifyArgs) -> Outcome {
    let params = params_of(&args.coefficients)?;
    let class = classify(&params);
    let text = match args.format {
        TextFormat::Json => {
            #[derive(Serialize)]
            struct Classification<'a> {
                params: &'a InteractionParams,
                omega: f64,
                #[serde(flatten)]
                class: &'a qmeas_core::StandardFormClass,
            }
            to_json(&Classification { params: &params, omega: params.omega(), class: &class })
        }
        TextFormat::Text => {
            let s = class.scale_triple;
            format!(
                "class: {}\ncoefficients: a={} b={} c={} d={}\ndelta: {}\nomega: {}\n\
                 scale: Lambda={} lambda={} mu={}\nreduced position: {}\nreduced momentum: {}\n",
                class.tag,
                params.a(),
                params.b(),
                params.c(),
                params.d(),
                params.delta(),
                params.omega(),
                s.big_lambda,
                s.lambda,
                s.mu,
                fmt_matrix(&class.reduced_position_matrix),
                fmt_matrix(&class.reduced_momentum_matrix),
            )
        }
    };
    emit(None, &text)
}

fn cmd_report(args: ReportArgs) -> Outcome {
    let params = params_of(&args.coefficients)?;
    let (hbar, object, probe) = states_of(&args.states)?;
    emit(None, &to_json(&report(&params, &object, &probe, hbar)))
}

const TRAJECTORY_HEADER: &str = "w,eps_tilde,eta_tilde,hur_lhs,our_lhs,circle_lhs";

fn render_trajectory(params: &InteractionParams, grid: &[f64], format: DataFormat) -> Result<String, Failure> {
    let rows = trajectory(params, grid)?;
    Ok(match format {
        DataFormat::Csv => {
            let mut s = String::with_capacity(64 * rows.len());
            s.push_str(TRAJECTORY_HEADER);
            s.push('\n');
            for r in &rows {
                let b = &r.bounds;
                let fields = [r.w, r.epsilon_tilde, r.eta_tilde, b.hur_lhs, b.our_lhs, b.circle_lhs];
                s.push_str(&fields.map(format_real).join(","));
                s.push('\n');
            }
            s
        }
        DataFormat::Json => {
            #[derive(Serialize)]
            struct Row {
                w: f64,
                eps_tilde: f64,
                eta_tilde: f64,
                hur_lhs: f64,
                our_lhs: f64,
                circle_lhs: f64,
            }
            let rows: Vec<Row> = rows
                .iter()
                .map(|r| Row {
                    w: r.w,
                    eps_tilde: r.epsilon_tilde,
                    eta_tilde: r.eta_tilde,
                    hur_lhs: r.bounds.hur_lhs,
                    our_lhs: r.bounds.our_lhs,
                    circle_lhs: r.bounds.circle_lhs,
                })
                .collect();
            to_json(&rows)
        }
    })
}

fn cmd_trajectory(args: TrajectoryArgs) -> Outcome {
    let grid = match args.w {
        Some(w) => vec![w],
        None => {
            if !(args.w_min < args.w_max) || args.n < 2 {
                return Err(Failure::Usage("need --w-min < --w-max and --n ≥ 2".into()));
            }
            log_spaced(args.w_min, args.w_max, args.n)?
        }
    };
    let ext = match args.format {
        DataFormat::Csv => "csv",
        DataFormat::Json => "json",
    };
    if args.fig1 {
        let dir = args.out.as_deref().expect("clap enforces --out");
        fs::create_dir_all(dir)?;
        for a in fig1_gains() {
            let params = InteractionParams::from_gains(a, 1.0 - a, 1.0)?;
            let text = render_trajectory(&params, &grid, args.format)?;
            emit(Some(&dir.join(format!("fig1_a{a}.{ext}"))), &text)?;
        }
        return Ok(());
    }
    let params = InteractionParams::from_gains(args.a, args.b, args.delta)?;
    let text = render_trajectory(&params, &grid, args.format)?;
    emit(args.out.as_deref(), &text)
}

fn write_distribution(dir: &Path, name: &str, d: &GriddedDistribution) -> Outcome {
    let file = fs::File::create(dir.join(name))?;
    let mut w = std::io::BufWriter::new(file);
    d.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct Variances {
    f: f64,
    #[serde(rename = "F")]
    big_f: f64,
    g: f64,
    #[serde(rename = "G")]
    big_g: f64,
    #[serde(rename = "F_out")]
    big_f_out: f64,
    g_out: f64,
}

#[derive(Serialize)]
struct SimulationReport<'a> {
    params: &'a InteractionParams,
    hbar: f64,
    object: ObjectStateSpec,
    probe: ProbeStateSpec,
    grid_points: usize,
    span_sigmas: f64,
    #[serde(flatten)]
    moments: UncertaintyReport,
    variances: Variances,
    #[serde(serialize_with = "extended_real")]
    distribution_epsilon_star: f64,
    #[serde(serialize_with = "extended_real")]
    distribution_eta_star: f64,
}

fn check_grid(points: usize, span: f64) -> Outcome {
    if points < 16 || !points.is_power_of_two() {
        return Err(Failure::Usage(format!("--grid-points must be a power of two ≥ 16, got {points}")));
    }
    if !(span > 0.0) || !span.is_finite() {
        return Err(Failure::Usage(format!("--span must be positive, got {span}")));
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Outcome {
    let params = params_of(&args.coefficients)?;
    let (hbar, object, probe) = states_of(&args.states)?;
    check_grid(args.grid_points, args.span)?;
    let inputs = InputDistributions::gaussian(&object, &probe, args.grid_points, args.span)?;
    let out = general_output_distributions(&params, &inputs)?;

    fs::create_dir_all(&args.out)?;
    let dir = args.out.as_path();
    write_distribution(dir, "obj_f.csv", &inputs.f)?;
    write_distribution(dir, "probe_F.csv", &inputs.big_f)?;
    write_distribution(dir, "obj_g.csv", &inputs.g)?;
    write_distribution(dir, "probe_G.csv", &inputs.big_g)?;
    write_distribution(dir, "out_F.csv", &out.big_f_out)?;
    write_distribution(dir, "out_g.csv", &out.g_out)?;

    let sampled = distribution_error_disturbance(&params, &inputs.big_f, &inputs.big_g);
    let variance = |d: &GriddedDistribution| d.moments().variance;
    let summary = SimulationReport {
        params: &params,
        hbar: hbar.value(),
        object,
        probe,
        grid_points: args.grid_points,
        span_sigmas: args.span,
        moments: report(&params, &object, &probe, hbar),
        variances: Variances {
            f: variance(&inputs.f),
            big_f: variance(&inputs.big_f),
            g: variance(&inputs.g),
            big_g: variance(&inputs.big_g),
            big_f_out: variance(&out.big_f_out),
            g_out: variance(&out.g_out),
        },
        distribution_epsilon_star: sampled.epsilon_star,
        distribution_eta_star: sampled.eta_star,
    };
    let text = to_json(&summary);
    emit(Some(&dir.join("report.json")), &text)?;
    emit(None, &text)
}

fn cmd_oracle(args: OracleArgs) -> Outcome {
    let params = params_of(&args.coefficients)?;
    let (hbar, object, probe) = states_of(&args.states)?;
    if args.grid_points < 16 {
        return Err(Failure::Usage(format!("--grid-points must be at least 16, got {}", args.grid_points)));
    }
    let probe = ProbeStateSpec::displaced(0.0, args.mean_big_p, probe.sigma_big_q, probe.sigma_big_p, hbar)?;
    let case = OracleCase { name: "cli".into(), params, object, probe };
    let comparison = compare_with_oracle(&case, args.grid_points, hbar, KernelSign::Negative)?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        let (psi, big_psi) = verify::packets(&case, hbar)?;
        let joint = apply_interaction(&params, &psi, &big_psi, hbar, args.grid_points)?;
        let mut w = std::io::BufWriter::new(fs::File::create(dir.join("joint.qmo"))?);
        joint.write_binary(&mut w)?;
        w.flush()?;
        let (_, big_f) = joint.marginals()?;
        let (g, _) = joint.momentum_representation(hbar).marginals()?;
        write_distribution(dir, "oracle_F.csv", &big_f)?;
        write_distribution(dir, "oracle_g.csv", &g)?;
    }
    emit(None, &to_json(&comparison))
}

fn cmd_verify(args: VerifyArgs) -> Outcome {
    let config = VerifyConfig {
        seed: args.seed,
        level: match args.level {
            LevelArg::Quick => Level::Quick,
            LevelArg::Full => Level::Full,
        },
        hbar: Hbar::NATURAL,
        kernel_sign: if args.inject_kernel_fault { KernelSign::Positive } else { KernelSign::Negative },
    };
    let report = verify::run(&config);
    emit(args.out.as_deref(), &to_json(&report))?;
    if report.passed {
        Ok(())
    } else {
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("failed: {} (measured {}, tolerance {})", c.name, c.measured, c.tolerance);
        }
        Err(Failure::Verify)
    }
}
