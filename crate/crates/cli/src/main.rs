use charsum::characters::{CharacterGroup, Parity, SweepPath};
use charsum::dickman::RhoEvaluator;
use charsum::expsum::{main_constant_residual, Sign};
use charsum::harness::{load_last_run, report, run_experiment, ExperimentConfig};
use charsum::lattice::{dichotomy_check, enumerate_small_multiples, LatticeInstance, ResidueSign, SearchLimits};
use charsum::numeric::floor_pow;
use charsum::parse::{format_ratio, parse_ratio, parse_real_list};
use charsum::pretentious::{certify, search_pretentious};
use charsum::smooth::{SmoothSieve, DEFAULT_LIMIT};
use charsum::{Error, Result};
use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "charsum", version, about = "Long character sums and the tools behind them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dickman ρ values or tail integrals, as CSV `u,value,flag`.
    Rho(RhoArgs),
    #[command(subcommand)]
    Smooth(SmoothCmd),
    #[command(subcommand)]
    Char(CharCmd),
    #[command(subcommand)]
    Lattice(LatticeCmd),
    #[command(subcommand)]
    Pretend(PretendCmd),
    #[command(subcommand)]
    Expsum(ExpsumCmd),
    #[command(subcommand)]
    Harness(HarnessCmd),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct RhoArgs {
    /// Comma-separated arguments.
    #[arg(long, value_delimiter = ',', value_parser = parse_finite)]
    u: Option<Vec<f64>>,
    /// Lower limit B of ∫_B^∞ ρ.
    #[arg(long)]
    tail_integral: Option<f64>,
}

#[derive(Subcommand)]
enum SmoothCmd {
    /// ψ(x, y) as CSV.
    Psi {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        y: f64,
    },
    /// Σ 1/n over y-smooth n in (y^s, y^r], as CSV.
    Logsum {
        #[arg(long)]
        y: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        r: f64,
    },
}

#[derive(Subcommand)]
enum CharCmd {
    /// Largest |Σ_{n<=x} χ(n)| over nonprincipal characters of a parity.
    Sweep {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value = "any", value_parser = parse_parity)]
        parity: Parity,
    },
    /// Both sides of the truncated Pólya expansion at x = αq.
    Polya {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        alpha: f64,
        /// Truncation; defaults to round(q^(11/21)).
        #[arg(long)]
        z: Option<f64>,
    },
}

#[derive(Subcommand)]
enum LatticeCmd {
    /// Multipliers ℓ with every ℓu_j/M within η of an integer.
    Enum {
        #[arg(long = "M")]
        m: u64,
        /// Comma-separated numerators.
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<u64>,
        #[arg(long)]
        n: u64,
        /// Threshold as `p/q`.
        #[arg(long, value_parser = parse_eta)]
        eta: Ratio<u64>,
        #[arg(long, value_parser = parse_residue_sign, allow_hyphen_values = true)]
        sign: ResidueSign,
    },
    /// Short relation or many multipliers in C_{n−}(2/N).
    Dichotomy {
        #[arg(long = "M")]
        m: u64,
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<u64>,
        #[arg(long)]
        n: u64,
        #[arg(long = "N")]
        big_n: u64,
    },
}

#[derive(Subcommand)]
enum PretendCmd {
    /// Characters with |χ(p) − 1| <= ε for every prime p <= T.
    Search {
        #[arg(long)]
        q: u64,
        #[arg(long = "T")]
        t: u64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value = "any", value_parser = parse_parity)]
        parity: Parity,
        /// Stop after this many certificates.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// max_{p<=T} |χ(p) − 1| for one character.
    Certify {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        ell: u64,
        #[arg(long = "T")]
        t: u64,
    },
}

#[derive(Subcommand)]
enum ExpsumCmd {
    /// Normalized residual of head − tail against log 2π + γ ∓ iπ/2.
    Constant {
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_finite)]
        alpha: Vec<f64>,
        #[arg(long, default_value = "plus", value_parser = parse_sign, allow_hyphen_values = true)]
        sign: Sign,
    },
}

#[derive(Subcommand)]
enum HarnessCmd {
    /// Runs the probes of a configuration file, appending JSON lines.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// CSV tables from the last complete run in a record file.
    Report {
        #[arg(long)]
        input: PathBuf,
        /// Only this payload kind.
        #[arg(long)]
        kind: Option<String>,
    },
}

fn parse_finite(s: &str) -> Result<f64> {
    match parse_real_list(s)?.as_slice() {
        [x] => Ok(*x),
        _ => Err(Error::Parse(format!("expected one number, got {s:?}"))),
    }
}

fn parse_eta(s: &str) -> Result<Ratio<u64>> {
    parse_ratio(s)
}

fn parse_parity(s: &str) -> Result<Parity> {
    s.parse()
}

fn parse_sign(s: &str) -> Result<Sign> {
    s.parse()
}

fn parse_residue_sign(s: &str) -> Result<ResidueSign> {
    s.parse()
}

fn sieve_to(top: f64) -> Result<SmoothSieve> {
    if top > DEFAULT_LIMIT as f64 {
        return Err(Error::Capacity(format!("{top} exceeds the sieve limit {DEFAULT_LIMIT}")));
    }
    SmoothSieve::new(top.max(1.0) as u64)
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn run(cli: Cli) -> Result<String> {
    let mut out = String::new();
    match cli.command {
        Command::Rho(args) => {
            let rho = RhoEvaluator::shared();
            out.push_str("u,value,flag\n");
            if let Some(us) = args.u {
                for u in us {
                    let r = rho.evaluate(u)?;
                    let flag = if r.approximate { "approximate" } else { "exact" };
                    out.push_str(&format!("{u},{},{flag}\n", r.value));
                }
            } else if let Some(b) = args.tail_integral {
                let t = rho.tail_integral(b)?;
                let flag = if t.approximate { "approximate" } else { "exact" };
                out.push_str(&format!("{b},{},{flag}\n", t.value));
            }
        }
        Command::Smooth(SmoothCmd::Psi { x, y }) => {
            let psi = sieve_to(x)?.psi(x, y)?;
            out.push_str(&format!("x,y,psi\n{x},{y},{psi}\n"));
        }
        Command::Smooth(SmoothCmd::Logsum { y, s, r }) => {
            let sum = sieve_to(floor_pow(y, r))?.smooth_log_sum(y, s, r)?;
            out.push_str(&format!("y,s,r,sum\n{y},{s},{r},{sum}\n"));
        }
        Command::Char(CharCmd::Sweep { q, x, parity }) => {
            let g = CharacterGroup::new(q)?;
            let m = g.sweep_max(x, parity, true, SweepPath::Fast)?;
            out = pretty(&json!({ "q": q, "x": x, "parity": parity, "max": m.max_abs, "argmax_ell": m.argmax_ell }))?;
        }
        Command::Char(CharCmd::Polya { q, ell, alpha, z }) => {
            let g = CharacterGroup::new(q)?;
            let z = z.unwrap_or_else(|| g.default_polya_z());
            let c = g.polya_check(ell, alpha, z)?;
            out = pretty(&json!({ "q": q, "ell": ell, "alpha": alpha, "z": z, "lhs": c.lhs, "rhs": c.rhs, "error": c.error }))?;
        }
        Command::Lattice(LatticeCmd::Enum { m, u, n, eta, sign }) => {
            let inst = LatticeInstance::new(m, &u)?;
            let set = enumerate_small_multiples(&inst, n, eta, sign)?;
            out = pretty(&json!({ "M": inst.order(), "u": inst.numerators(), "count": set.members.len(), "set": set }))?;
        }
        Command::Lattice(LatticeCmd::Dichotomy { m, u, n, big_n }) => {
            let inst = LatticeInstance::new(m, &u)?;
            let d = dichotomy_check(&inst, n, big_n, SearchLimits::default())?;
            let eta = format_ratio(&Ratio::new(2, big_n.max(1)));
            out = pretty(&json!({ "M": inst.order(), "u": inst.numerators(), "n": n, "N": big_n, "eta": eta, "result": d }))?;
        }
        Command::Pretend(PretendCmd::Search { q, t, eps, parity, limit }) => {
            let g = CharacterGroup::new(q)?;
            out = pretty(&search_pretentious(&g, t, eps, parity, limit.unwrap_or(usize::MAX))?)?;
        }
        Command::Pretend(PretendCmd::Certify { q, ell, t }) => {
            out = pretty(&certify(&CharacterGroup::new(q)?, ell, t)?)?;
        }
        Command::Expsum(ExpsumCmd::Constant { alpha, sign }) => {
            out.push_str("alpha,residual\n");
            for a in alpha {
                let r = main_constant_residual(a, sign)?;
                out.push_str(&format!("{a},{}\n", r.normalized_residual));
            }
        }
        Command::Harness(HarnessCmd::Run { config }) => {
            let text = std::fs::read_to_string(&config).map_err(|source| Error::Io { written: 0, source })?;
            let rec = run_experiment(&ExperimentConfig::from_json(&text)?)?;
            out = pretty(&json!({ "config_hash": rec.config_hash, "entries": rec.entries.len(), "reused": rec.reused }))?;
        }
        Command::Harness(HarnessCmd::Report { input, kind }) => {
            let rec = load_last_run(&input)?;
            let tables = report(&rec.entries)?;
            if let Some(kind) = kind {
                out = tables.get(kind.as_str()).cloned().ok_or_else(|| Error::Validation(format!("no {kind} entries")))?;
            } else {
                for (name, csv) in tables {
                    out.push_str(&format!("# {name}\n{csv}\n"));
                }
            }
        }
    }
    Ok(out)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(text) => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
