//! `petersson`: command-line front end to the numerical toolkit. Every
//! result is printed as one JSON object per line, or as CSV.

use std::io::{self, Write};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use petersson::chebyshev::ChebTable;
use petersson::expsums::{gab_bruteforce, gab_closed_c2, gab_closed_even, gab_crt_factor, gab_degenerate, kloosterman};
use petersson::lfun::{cubic_moment, l_half_twisted, root_number, MomentConfig, MomentMode, VFunction, VKind};
use petersson::spectral::{default_c_max, delta_geometric, delta_star_truncated, delta_tilde, derive_one_dimensional, HeckeSystem};
use petersson::verify::{run_suite, Suite, VerifyOptions};
use petersson::{factor, Error, Factored, Mod8Sign, QuadraticCharacter};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(name = "petersson", version, about = "Petersson formulas, exponential sums and cubic moments of quadratic twists")]
struct Cli {
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, env = "PETERSSON_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// The Kloosterman sum S(m,n;c).
    Kloosterman {
        #[arg(short, allow_hyphen_values = true)]
        m: i64,
        #[arg(short, allow_hyphen_values = true)]
        n: i64,
        #[arg(short, value_parser = clap::value_parser!(u64).range(1..))]
        c: u64,
    },
    /// The triple sum G_{A,B}(m1,m2,m3;c) along one evaluation route.
    Gab(GabArgs),
    /// The coefficients c_{j,n} of x^n in the basis U_j(x/2).
    ChebTable {
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(0..=60))]
        max_n: u32,
    },
    /// Δ_N(m,n) from the Kloosterman–Bessel side.
    Delta(DeltaArgs),
    /// The newform sum Δ*_N(m,n) through the oldform sieve with ℓ ≤ Y.
    DeltaStar {
        #[command(flatten)]
        delta: DeltaArgs,
        #[arg(long, default_value_t = 10_000)]
        y: u64,
    },
    /// The hybrid sum Δ̃_{N,q}(m,n).
    DeltaTilde {
        #[command(flatten)]
        delta: DeltaArgs,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 10_000)]
        y: u64,
    },
    /// The root number of f⊗χ_q.
    RootNumber(FormArgs),
    /// L(1/2, f⊗χ_q) from the smoothed approximate functional equation.
    Lvalue(FormArgs),
    /// The cubic moment M(r,q) from eigenforms, from Petersson sums, or both.
    CubicMoment {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value = "even", value_parser = parse_sign8)]
        sign8: Mod8Sign,
        #[arg(long, default_value_t = 2)]
        kappa: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Both)]
        mode: ModeArg,
        #[arg(long)]
        c_max: Option<u64>,
        #[arg(long)]
        y: Option<u64>,
        #[arg(long)]
        prime_bound: Option<u64>,
        #[arg(long)]
        prune_tolerance: Option<f64>,
    },
    /// Runs one oracle suite.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        max_modulus: Option<u64>,
        #[arg(long)]
        c_max: Option<u64>,
        #[arg(long)]
        y: Option<u64>,
    },
}

#[derive(Args, Debug)]
struct GabArgs {
    #[arg(long, allow_hyphen_values = true)]
    m1: i64,
    #[arg(long, allow_hyphen_values = true)]
    m2: i64,
    #[arg(long, allow_hyphen_values = true)]
    m3: i64,
    #[arg(short = 'A', default_value_t = 1)]
    a: u64,
    #[arg(short = 'B', default_value_t = 1)]
    b: u64,
    #[arg(short)]
    c: u64,
    #[arg(short, default_value_t = 1)]
    q: u64,
    #[arg(long, default_value = "even", value_parser = parse_sign8)]
    sign8: Mod8Sign,
    #[arg(long, value_enum, default_value_t = RouteArg::Brute)]
    route: RouteArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RouteArg {
    Brute,
    Crt,
    ClosedC2,
    ClosedEven,
    Degenerate,
}

#[derive(Args, Debug)]
struct DeltaArgs {
    #[arg(long)]
    level: u64,
    #[arg(long, default_value_t = 2)]
    kappa: u32,
    #[arg(short)]
    m: u64,
    #[arg(short)]
    n: u64,
    /// Largest modulus; defaults to clamp(200·N·√(mn), 10⁴, 4096²−1).
    #[arg(long)]
    c_max: Option<u64>,
}

#[derive(Args, Debug)]
struct FormArgs {
    #[arg(long)]
    r: u64,
    #[arg(long)]
    q: u64,
    #[arg(long, default_value = "even", value_parser = parse_sign8)]
    sign8: Mod8Sign,
    /// Level rq′ of the form; defaults to r.
    #[arg(long)]
    level: Option<u64>,
    #[arg(long, default_value_t = 2)]
    kappa: u32,
    /// Use a synthetic eigenvalue system with this seed instead of deriving
    /// the form of a one-dimensional space.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 600)]
    prime_bound: u64,
    #[arg(long, default_value_t = 100_000)]
    c_max: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Spectral,
    Geometric,
    Both,
}

fn parse_sign8(s: &str) -> Result<Mod8Sign, String> {
    match s {
        "even" => Ok(Mod8Sign::Even),
        "odd" => Ok(Mod8Sign::Odd),
        _ => Err(format!("expected even or odd, got {s:?}")),
    }
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|_| format!("expected one of {}", Suite::ALL.map(Suite::name).join(", ")))
}

fn form(args: &FormArgs) -> petersson::Result<(HeckeSystem, Factored, QuadraticCharacter)> {
    let level = factor(args.level.unwrap_or(args.r))?;
    let f = match args.seed {
        Some(seed) => HeckeSystem::synthetic(level, args.kappa, args.prime_bound, seed)?,
        None => derive_one_dimensional(&level, args.kappa, args.prime_bound, args.c_max)?.system,
    };
    Ok((f, factor(args.r)?, QuadraticCharacter::new(args.q, args.sign8)?))
}

/// The Kloosterman cutoff used to derive the form, absent for synthetic ones.
fn derivation_c_max(args: &FormArgs) -> Option<u64> {
    args.seed.is_none().then_some(args.c_max)
}

/// The records a command prints.
enum Output {
    Records(Vec<Value>),
    /// Rows of the coefficient triangle; CSV prints them without a header.
    Triangle(Vec<Vec<u128>>),
}

fn record<T: Serialize>(value: &T) -> anyhow::Result<Output> {
    Ok(Output::Records(vec![serde_json::to_value(value)?]))
}

fn execute(command: &Command) -> anyhow::Result<Output> {
    match command {
        Command::Kloosterman { m, n, c } => Ok(Output::Records(vec![json!({ "m": m, "n": n, "c": c, "value": kloosterman(*m, *n, *c) })])),
        Command::Gab(g) => {
            let chi = QuadraticCharacter::new(g.q, g.sign8)?;
            let m = [g.m1, g.m2, g.m3];
            match g.route {
                RouteArg::Brute => record(&gab_bruteforce(m, g.a, g.b, g.c, &chi)?),
                RouteArg::Crt => {
                    let f = gab_crt_factor(m, g.a, g.b, g.c, &chi)?;
                    Ok(Output::Records(vec![json!({ "value": f.product(), "prefactor": f.prefactor, "factors": f.factors })]))
                }
                RouteArg::ClosedC2 => {
                    if g.q != 1 {
                        return Err(Error::Precondition("the (AB)^∞ closed form carries no character; pass -q 1".into()).into());
                    }
                    record(&gab_closed_c2(m, g.a, g.b, g.c)?)
                }
                RouteArg::ClosedEven => {
                    if g.a != 1 || g.b != 1 {
                        return Err(Error::Precondition("the 2-power closed form has A = B = 1".into()).into());
                    }
                    record(&gab_closed_even(m, &chi, g.c)?)
                }
                RouteArg::Degenerate => record(&gab_degenerate(m, g.a, g.b, g.c, &chi)?),
            }
        }
        Command::ChebTable { max_n } => {
            let table = ChebTable::new(*max_n)?;
            Ok(Output::Triangle((0..=*max_n).map(|n| table.row(n).to_vec()).collect()))
        }
        Command::Delta(d) => {
            let level = factor(d.level)?;
            let c_max = d.c_max.unwrap_or_else(|| default_c_max(level.n(), d.m, d.n));
            record(&delta_geometric(&level, d.kappa, d.m, d.n, c_max)?)
        }
        Command::DeltaStar { delta: d, y } => {
            let level = factor(d.level)?;
            let c_max = d.c_max.unwrap_or_else(|| default_c_max(level.n(), d.m, d.n));
            record(&delta_star_truncated(&level, d.kappa, d.m, d.n, *y, c_max)?)
        }
        Command::DeltaTilde { delta: d, q, y } => {
            let level = factor(d.level)?;
            let qf = factor(*q)?;
            let c_max = d.c_max.unwrap_or_else(|| default_c_max(d.level.saturating_mul(*q), d.m, d.n));
            record(&delta_tilde(&level, &qf, d.kappa, d.m, d.n, *y, c_max)?)
        }
        Command::RootNumber(args) => {
            let (f, r, chi) = form(args)?;
            let epsilon = root_number(&f, &r, &chi)?;
            Ok(Output::Records(vec![json!({
                "level": f.level().n(),
                "r": args.r,
                "q": args.q,
                "kappa": args.kappa,
                "root_number": epsilon,
                "provenance": f.provenance(),
                "prime_bound": args.prime_bound,
                "c_max": derivation_c_max(args),
            })]))
        }
        Command::Lvalue(args) => {
            let (f, r, chi) = form(args)?;
            let v1 = VFunction::new(VKind::V1, args.kappa)?;
            let mut out = serde_json::to_value(l_half_twisted(&f, &r, &chi, &v1)?)?;
            out["provenance"] = serde_json::to_value(f.provenance())?;
            out["prime_bound"] = json!(args.prime_bound);
            out["c_max"] = json!(derivation_c_max(args));
            Ok(Output::Records(vec![out]))
        }
        Command::CubicMoment { r, q, sign8, kappa, mode, c_max, y, prime_bound, prune_tolerance } => {
            let base = MomentConfig::default();
            let config = MomentConfig {
                c_max: c_max.unwrap_or(base.c_max),
                y: y.unwrap_or(base.y),
                prime_bound: prime_bound.unwrap_or(base.prime_bound),
                prune_tolerance: prune_tolerance.unwrap_or(base.prune_tolerance),
            };
            let mode = match mode {
                ModeArg::Spectral => MomentMode::Spectral,
                ModeArg::Geometric => MomentMode::Geometric,
                ModeArg::Both => MomentMode::Both,
            };
            let chi = QuadraticCharacter::new(*q, *sign8)?;
            record(&cubic_moment(&factor(*r)?, &chi, *kappa, mode, &config)?)
        }
        Command::Verify { suite, seed, samples, max_modulus, c_max, y } => {
            let options = VerifyOptions { seed: *seed, samples: *samples, max_modulus: *max_modulus, c_max: *c_max, y: *y };
            let mut out = serde_json::to_value(run_suite(*suite, &options)?)?;
            out["options"] = serde_json::to_value(&options)?;
            Ok(Output::Records(vec![out]))
        }
    }
}

/// Flattens nested objects and arrays into dotted keys for CSV.
fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match value {
        Value::Object(map) => map.iter().for_each(|(k, v)| flatten(&key(k), v, out)),
        Value::Array(items) => items.iter().enumerate().for_each(|(i, v)| flatten(&key(&i.to_string()), v, out)),
        Value::String(s) => out.push((prefix.to_string(), s.clone())),
        Value::Null => out.push((prefix.to_string(), String::new())),
        other => out.push((prefix.to_string(), other.to_string())),
    }
}

fn emit(output: &Output, format: Format) -> anyhow::Result<()> {
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    match (output, format) {
        (Output::Records(records), Format::Json) => {
            for r in records {
                serde_json::to_writer(&mut lock, r)?;
                writeln!(lock)?;
            }
        }
        (Output::Triangle(rows), Format::Json) => {
            for (n, row) in rows.iter().enumerate() {
                serde_json::to_writer(&mut lock, &json!({ "n": n, "coefficients": row }))?;
                writeln!(lock)?;
            }
        }
        (Output::Records(records), Format::Csv) => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(lock);
            for (i, r) in records.iter().enumerate() {
                let mut cells = Vec::new();
                flatten("", r, &mut cells);
                if i == 0 {
                    w.write_record(cells.iter().map(|c| c.0.as_str()))?;
                }
                w.write_record(cells.iter().map(|c| c.1.as_str()))?;
            }
            w.flush()?;
        }
        (Output::Triangle(rows), Format::Csv) => {
            let mut w = csv::WriterBuilder::new().flexible(true).from_writer(lock);
            for row in rows {
                w.write_record(row.iter().map(u128::to_string))?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Precondition(_) | Error::Degenerate(_)) => 2,
        Some(Error::Budget(_) | Error::Overflow(_)) => 3,
        None => 1,
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().context("configuring the worker pool")?;
    }
    let output = execute(&cli.command)?;
    emit(&output, cli.format)?;
    // a verification suite that ran but found failures is reported through
    // the exit status as well
    Ok(match &output {
        Output::Records(records) if matches!(cli.command, Command::Verify { .. }) => records.iter().all(|r| r["passed"] == json!(true)),
        _ => true,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
