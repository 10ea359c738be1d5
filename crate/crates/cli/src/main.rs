use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use curvecft::classgroup::Orientation;
use curvecft::curve::{Curve, CurveRecord};
use curvecft::divisor::Divisor;
use curvecft::experiment::{
    compare, dynamics_summary, dynsys_report, lseries_report, places_report, rayclass_report,
    run_experiment, zeta_report, BoundsConfig, CurveSession, ExperimentConfig, ModulusShape,
    X_MINUS, X_PLUS,
};
use curvecft::Error;

const THREADS_VAR: &str = "CURVECFT_THREADS";

#[derive(Parser)]
#[command(
    name = "curvecft",
    version,
    about = "Class field theory experiments on hyperelliptic curves over finite fields"
)]
#[command(
    after_help = "Curves are given as {q: 3, f: [-1, -1, 1, 1, 0, 1]} (ascending coefficients of f), \
as @path to a file holding such a record, or as X+ / X-.\n\
Divisors are written 2*[0,1:i] + [1,1:i] with place descriptors as printed by `places`.\n\
Set CURVECFT_THREADS to fix the worker thread count.\n\
Exit codes: 0 success, 1 a checked claim failed, 2 bad input, 3 internal error."
)]
struct Cli {
    #[command(flatten)]
    out: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// write the JSON report to this file
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// what to print on stdout
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Point counts, L-polynomial, class number and their checks
    Zeta {
        /// one or more curves; with several, equality of P(T) is reported
        #[arg(long = "curve", required = true)]
        curves: Vec<String>,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
    },
    /// Places by degree, with the Möbius count
    Places {
        #[arg(long)]
        curve: String,
        #[arg(long, default_value_t = 2)]
        max_degree: u32,
        /// list descriptors up to this degree
        #[arg(long, default_value_t = 2)]
        list: u32,
    },
    /// Structure of a ray class group
    Rayclass {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        modulus: String,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// L-polynomials of all characters of Cl_D into μ_n
    Lseries {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        modulus: String,
        #[arg(long, default_value_t = 3)]
        order: u32,
        /// compare Euler and weighted expansions up to T^N
        #[arg(long)]
        truncation: Option<usize>,
        #[arg(long, default_value_t = 1e-9)]
        tolerance: f64,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// The degree-3 cover experiment from a TOML configuration
    CoversExperiment {
        /// configuration file; the built-in defaults when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// print the effective configuration and stop
        #[arg(long)]
        print_config: bool,
    },
    /// Zeta and L-spectrum comparison of two curves
    Compare {
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
        /// multiplicities of the modulus shape
        #[arg(long, value_delimiter = ',', default_value = "2,1,1")]
        shape: Vec<i64>,
        #[arg(long, default_value_t = 2)]
        place_degree: u32,
        #[arg(long, default_value_t = 3)]
        order: u32,
        /// exit with 1 unless the curves are told apart
        #[arg(long)]
        expect_distinct: bool,
    },
    /// Laws of the finite dynamical system attached to D
    DynsysCheck {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        modulus: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OrientationArg::Place)]
        orientation: OrientationArg,
        #[command(flatten)]
        bounds: BoundArgs,
    },
}

#[derive(Args)]
struct BoundArgs {
    /// generator degree bound B
    #[arg(long)]
    bound: Option<u32>,
    /// highest pole order of relation functions
    #[arg(long)]
    n_max: Option<i64>,
}

impl BoundArgs {
    fn config(&self) -> BoundsConfig {
        BoundsConfig {
            generator_bound: self.bound,
            n_max: self.n_max,
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrientationArg {
    Place,
    Inverse,
}

impl From<OrientationArg> for Orientation {
    fn from(o: OrientationArg) -> Self {
        match o {
            OrientationArg::Place => Orientation::Place,
            OrientationArg::Inverse => Orientation::Inverse,
        }
    }
}

enum Failure {
    Verdict,
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Outcome = Result<(), Failure>;

fn parse_curve(text: &str) -> Result<CurveRecord, Error> {
    match text.trim() {
        "X+" | "x+" => Ok(CurveRecord {
            q: 3,
            f: X_PLUS.to_vec(),
        }),
        "X-" | "x-" => Ok(CurveRecord {
            q: 3,
            f: X_MINUS.to_vec(),
        }),
        t => match t.strip_prefix('@') {
            Some(path) => {
                let body = fs::read_to_string(path)
                    .map_err(|e| Error::InvalidInput(format!("{}: {}", path, e)))?;
                CurveRecord::parse(&body).map_err(|e| within(path, e))
            }
            None => CurveRecord::parse(t),
        },
    }
}

fn within(path: &str, e: Error) -> Error {
    match e {
        Error::InvalidInput(m) => Error::InvalidInput(format!("{}: {}", path, m)),
        e => e,
    }
}

fn session(text: &str, bounds: &BoundsConfig) -> Result<CurveSession, Error> {
    let rec = parse_curve(text)?;
    CurveSession::new(&rec.to_string(), &rec, bounds)
}

fn emit<T: Serialize>(out: &Output, report: &T, summary: &str) -> Outcome {
    let json = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Internal(format!("report: {}", e)))?;
    if let Some(path) = &out.json {
        fs::write(path, format!("{}\n", json))
            .map_err(|e| Error::InvalidInput(format!("{}: {}", path.display(), e)))?;
    }
    match out.format {
        Format::Text => print!("{}", summary),
        Format::Json => println!("{}", json),
    }
    Ok(())
}

fn check(passed: bool) -> Outcome {
    if passed {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

#[derive(Serialize)]
struct ZetaComparison<'a> {
    curves: &'a [curvecft::experiment::ZetaReport],
    all_equal: bool,
}

fn run(cli: &Cli) -> Outcome {
    let out = &cli.out;
    match &cli.command {
        Command::Zeta { curves, tolerance } => {
            let reports = curves
                .iter()
                .map(|t| {
                    let c = Curve::from_record(&parse_curve(t)?)?;
                    zeta_report(&c, *tolerance)
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let all_equal = reports
                .windows(2)
                .all(|w| w[0].record.q == w[1].record.q && w[0].l_polynomial == w[1].l_polynomial);
            let mut summary: String = reports.iter().map(|r| r.summary()).collect();
            if reports.len() > 1 {
                summary.push_str(&format!(
                    "P(T) equal for all curves: {}\n",
                    if all_equal { "yes" } else { "no" }
                ));
            }
            emit(
                out,
                &ZetaComparison {
                    curves: &reports,
                    all_equal,
                },
                &summary,
            )?;
            check(reports.iter().all(|r| r.passed()))
        }
        Command::Places {
            curve,
            max_degree,
            list,
        } => {
            let c = Curve::from_record(&parse_curve(curve)?)?;
            if *max_degree == 0 {
                return Err(Error::InvalidInput("--max-degree must be positive".into()).into());
            }
            let r = places_report(&c, *max_degree, *list)?;
            emit(out, &r, &r.summary())?;
            check(r.passed())
        }
        Command::Rayclass {
            curve,
            modulus,
            bounds,
        } => {
            let s = session(curve, &bounds.config())?;
            let d = Divisor::parse(&s.curve, modulus)?;
            let r = rayclass_report(s.groups(), &d)?;
            emit(out, &r, &r.summary())?;
            check(r.order_law)
        }
        Command::Lseries {
            curve,
            modulus,
            order,
            truncation,
            tolerance,
            bounds,
        } => {
            if *order == 0 {
                return Err(Error::InvalidInput("--order must be positive".into()).into());
            }
            let s = session(curve, &bounds.config())?;
            let d = Divisor::parse(&s.curve, modulus)?;
            let r = lseries_report(&s.engine, &d, *order, *truncation, *tolerance)?;
            emit(out, &r, &r.summary())?;
            check(r.passed())
        }
        Command::CoversExperiment {
            config,
            print_config,
        } => {
            let cfg = match config {
                Some(path) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| Error::InvalidInput(format!("{}: {}", path.display(), e)))?;
                    ExperimentConfig::from_toml(&text)
                        .map_err(|e| within(&path.display().to_string(), e))?
                }
                None => ExperimentConfig::default(),
            };
            if *print_config {
                print!("{}", cfg.to_toml()?);
                return Ok(());
            }
            let r = run_experiment(&cfg)?;
            emit(out, &r, &r.summary())?;
            check(r.passed)
        }
        Command::Compare {
            first,
            second,
            shape,
            place_degree,
            order,
            expect_distinct,
        } => {
            if *order == 0 || shape.is_empty() || shape.iter().any(|&m| m <= 0) {
                return Err(Error::InvalidInput(
                    "--order and every --shape multiplicity must be positive".into(),
                )
                .into());
            }
            let bounds = BoundsConfig::default();
            let a = session(first, &bounds)?;
            let b = session(second, &bounds)?;
            let shape = ModulusShape {
                multiplicities: shape.clone(),
                place_degree: *place_degree,
                expected_count: None,
            };
            let r = compare(&a, &b, &shape, *order)?;
            emit(out, &r, &r.summary())?;
            check(!*expect_distinct || r.distinguished())
        }
        Command::DynsysCheck {
            curve,
            modulus,
            samples,
            seed,
            orientation,
            bounds,
        } => {
            let s = session(curve, &bounds.config())?;
            let d = Divisor::parse(&s.curve, modulus)?;
            let r = dynsys_report(s.groups(), &d, (*orientation).into(), *samples, *seed)?;
            emit(out, &r, &dynamics_summary(&r))?;
            check(r.passed)
        }
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| {
        Error::InvalidInput(format!("{}={:?} is not a thread count", THREADS_VAR, v))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Internal(format!("thread pool: {}", e)))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = configure_threads()
        .map_err(Failure::from)
        .and_then(|_| run(&cli));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Error(e)) => {
            eprintln!("error: {}", e);
            match e {
                Error::InvalidField(_)
                | Error::InvalidCurve(_)
                | Error::InvalidInput(_)
                | Error::Undefined(_) => ExitCode::from(2),
                Error::InsufficientBounds(_) | Error::Internal(_) => ExitCode::from(3),
            }
        }
    }
}
