use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use sscmod::bench::{self, Algo, BenchConfig};
use sscmod::greedy::greedy_with;
use sscmod::mcmc::{mcmc_run, RunOptions};
use sscmod::oracle::{brute_force_optimal, feasible_set_size, BRUTE_FORCE_CAP};
use sscmod::{
    feasibility_report, t_stop_bound, worst_case_instance, Error, Evaluator, FeasibilityReport, InstanceSpec,
    McmcParams, ModificationResult, Result, StructuredSystem,
};

#[derive(Parser)]
#[command(name = "sscmod", version, about = "Strong structural controllability and minimal input modification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenType {
    Er,
    Worstcase,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Greedy,
    Mcmc,
    Brute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Er,
    Worstcase,
}

#[derive(clap::Args, Clone)]
struct ChainArgs {
    /// Proposals per temperature level.
    #[arg(long, default_value_t = 50_000)]
    rmax: u64,
    #[arg(long, default_value_t = 1.0)]
    tstart: f64,
    #[arg(long, default_value_t = 1e-10)]
    tstop: f64,
    /// Cooling factor applied after each level.
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Penalty weight on white rows; defaults to nm + 1.
    #[arg(long)]
    epsilon: Option<u64>,
}

impl ChainArgs {
    fn params(&self, seed: u64) -> McmcParams {
        McmcParams {
            r_max: self.rmax,
            t_start: self.tstart,
            t_stop: self.tstop,
            alpha: self.alpha,
            seed,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a system file.
    Gen {
        #[arg(long = "type", value_enum)]
        kind: GenType,
        #[arg(long)]
        n: usize,
        /// Input columns (defaults to n).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0.45)]
        p_star: f64,
        #[arg(long, default_value_t = 0.1)]
        p_any: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test strong structural controllability of a system file.
    Check {
        file: PathBuf,
        /// Print key=value lines instead of the readable report.
        #[arg(long)]
        record: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Find a cheap controllable modification of the input pattern.
    Modify {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "greedy")]
        algo: AlgoArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        chain: ChainArgs,
        /// Per-step CSV trace of the chain (mcmc only).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Where to write the modified input pattern.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Feasibility bounds and the stopping-temperature bound.
    Bound {
        file: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Seeded benchmark sweep with CSV output.
    Bench {
        #[arg(long, value_enum, default_value = "er")]
        family: FamilyArg,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "5,10,15")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "5")]
        m: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.45,0.8")]
        p_star: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        p_any: f64,
        #[arg(long, value_delimiter = ',', default_value = "greedy,mcmc")]
        algos: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        chain: ChainArgs,
        /// Per-run wall-clock limit for the chain, in seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Record runtimes (output is then no longer byte-reproducible).
        #[arg(long)]
        timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the per-cell summary table here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path) -> Result<StructuredSystem> {
    std::fs::read_to_string(path)?.parse()
}

fn write_report(out: &mut dyn Write, r: &FeasibilityReport) -> Result<()> {
    writeln!(out, "n = {}, m = {}", r.n, r.m)?;
    writeln!(out, "Z(A) = {}, Z(Q(A)) = {}", r.z_a, r.z_qa)?;
    writeln!(out, "necessary m >= {}", r.necessary_m)?;
    writeln!(out, "sufficient m >= {} (common forcing set {})", r.sufficient_m, r.witness)?;
    if r.certainly_infeasible() {
        writeln!(out, "status: infeasible, m is below the necessary bound")?;
    } else if r.certainly_feasible() {
        writeln!(out, "status: feasible")?;
    } else {
        writeln!(out, "status: undecided by zero forcing bounds")?;
    }
    if r.cost_lower > 0 {
        writeln!(out, "optimal cost >= {}", r.cost_lower)?;
    }
    if r.upper_bound_applies() {
        writeln!(out, "optimal cost <= {}", r.cost_upper)?;
    }
    Ok(())
}

fn cmd_gen(kind: GenType, n: usize, m: Option<usize>, p_star: f64, p_any: f64, seed: u64, out: Option<&Path>) -> Result<()> {
    let sys = match kind {
        GenType::Er => InstanceSpec::erdos_renyi(n, m.unwrap_or(n), p_star, p_any, seed).generate()?,
        GenType::Worstcase => {
            if m.is_some_and(|m| m != n) {
                return Err(Error::Parameter("the worst-case family has m = n".into()));
            }
            worst_case_instance(n)?
        }
    };
    let mut w = open_out(out)?;
    write!(w, "{sys}")?;
    w.flush()?;
    Ok(())
}

fn cmd_check(path: &Path, record: bool) -> Result<()> {
    let sys = load(path)?;
    let ev = Evaluator::with_default_epsilon(&sys);
    let v = ev.verdict(sys.b_bar());
    let report = feasibility_report(&sys)?;
    let mut w = open_out(None)?;
    if record {
        writeln!(w, "controllable={}", v.controllable)?;
        writeln!(w, "white_a={}", v.white_first)?;
        writeln!(w, "white_qa={}", v.white_second)?;
        writeln!(w, "z_a={}", report.z_a)?;
        writeln!(w, "z_qa={}", report.z_qa)?;
        writeln!(w, "necessary_m={}", report.necessary_m)?;
        writeln!(w, "sufficient_m={}", report.sufficient_m)?;
        writeln!(w, "joint_witness={}", report.witness)?;
    } else {
        let verdict = if v.controllable { "strongly structurally controllable" } else { "not strongly structurally controllable" };
        writeln!(w, "{verdict}")?;
        writeln!(w, "W([A B])    = {}", v.white_first)?;
        writeln!(w, "W([Q(A) B]) = {}", v.white_second)?;
        write_report(&mut *w, &report)?;
    }
    w.flush()?;
    Ok(())
}

/// Returns whether the result is controllable.
fn cmd_modify(
    path: &Path,
    algo: AlgoArg,
    seed: u64,
    chain: &ChainArgs,
    trace: Option<&Path>,
    out: Option<&Path>,
) -> Result<bool> {
    let sys = load(path)?;
    let params = chain.params(seed);
    params.validate(&sys)?;
    let ev = Evaluator::new(&sys, params.epsilon_for(&sys))?;
    let mut w = open_out(None)?;
    let result: ModificationResult = match algo {
        AlgoArg::Greedy => {
            if trace.is_some() {
                return Err(Error::Parameter("--trace applies to --algo mcmc only".into()));
            }
            let g = greedy_with(&ev);
            writeln!(w, "{:>4} {:>4} {:>4} {:>6} {:>6} {:>10}", "iter", "i", "j", "dist", "white", "cost")?;
            for h in &g.history {
                writeln!(
                    w,
                    "{:>4} {:>4} {:>4} {:>6} {:>6} {:>10}",
                    h.iteration,
                    h.row + 1,
                    h.column + 1,
                    h.cost.distance,
                    h.cost.white_total,
                    h.cost.total
                )?;
            }
            g.result
        }
        AlgoArg::Mcmc => {
            let opts = RunOptions {
                record_trace: trace.is_some(),
                deadline: None,
            };
            let o = mcmc_run(&sys, &params, opts)?;
            if let Some(p) = trace {
                let mut tw = BufWriter::new(File::create(p)?);
                o.trace.write_csv(&mut tw)?;
                tw.flush()?;
            }
            writeln!(w, "iterations = {}", o.iterations)?;
            writeln!(w, "final cost = {}", o.final_state.cost.total)?;
            o.best
        }
        AlgoArg::Brute => {
            let size = feasible_set_size(sys.b_bar()).filter(|&s| s <= BRUTE_FORCE_CAP);
            if size.is_none() {
                return Err(Error::Capacity(format!(
                    "exhaustive search is limited to {BRUTE_FORCE_CAP} candidate patterns"
                )));
            }
            let o = brute_force_optimal(&sys, ev.epsilon())?;
            writeln!(w, "|B| = {}", o.feasible_count)?;
            writeln!(w, "B* = {}", o.optimizer_count)?;
            writeln!(w, "c* = {}", o.optimal_cost)?;
            let b = o.witnesses.into_iter().next().expect("feasible set is never empty");
            ModificationResult::evaluate(&ev, b)
        }
    };
    writeln!(w, "cost: {}", result.cost)?;
    writeln!(w, "controllable: {}", result.is_controllable())?;
    match out {
        Some(p) => {
            let mut bw = BufWriter::new(File::create(p)?);
            write!(bw, "{}", result.b)?;
            bw.flush()?;
        }
        None => write!(w, "{}", result.b)?,
    }
    w.flush()?;
    Ok(result.is_controllable())
}

fn cmd_bound(path: &Path, delta: f64) -> Result<()> {
    let sys = load(path)?;
    let report = feasibility_report(&sys)?;
    let mut w = open_out(None)?;
    write_report(&mut *w, &report)?;
    let size = feasible_set_size(sys.b_bar());
    writeln!(w, "|B| = {}", size.map_or("overflow".to_string(), |s| s.to_string()))?;
    // B* is known exactly only when the oracle can run; 1 is always a valid
    // lower bound and gives the most conservative temperature.
    let (b_star, exact) = match size {
        Some(s) if s <= BRUTE_FORCE_CAP => {
            let ev = Evaluator::with_default_epsilon(&sys);
            (brute_force_optimal(&sys, ev.epsilon())?.optimizer_count as f64, true)
        }
        _ => (1.0, false),
    };
    let total = size.map_or(f64::INFINITY, |s| s as f64);
    writeln!(w, "B* {} {}", if exact { "=" } else { ">=" }, b_star)?;
    if b_star >= total {
        writeln!(w, "T_stop bound: none needed, every pattern is optimal")?;
    } else if total.is_infinite() {
        writeln!(w, "T_stop bound: not computable, |B| overflows")?;
    } else {
        let t = t_stop_bound(delta, total, b_star)?;
        writeln!(w, "T_stop bound (delta = {delta}): {t:e}")?;
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    family: FamilyArg,
    trials: usize,
    ns: Vec<usize>,
    ms: Vec<usize>,
    p_stars: Vec<f64>,
    p_any: f64,
    algos: &[String],
    seed: u64,
    chain: &ChainArgs,
    time_limit: Option<f64>,
    timing: bool,
    out: Option<&Path>,
    summary: Option<&Path>,
) -> Result<()> {
    let mut config = match family {
        FamilyArg::Er => BenchConfig::erdos_renyi(ns, ms, p_stars, trials, seed),
        FamilyArg::Worstcase => BenchConfig::worst_case(ns, trials, seed),
    };
    if family == FamilyArg::Er {
        config.p_any = p_any;
    }
    config.algos = algos.iter().map(|a| a.parse()).collect::<Result<Vec<Algo>>>()?;
    config.mcmc = chain.params(0);
    config.time_limit = match time_limit {
        Some(s) if !(s > 0.0 && s.is_finite()) => {
            return Err(Error::Parameter(format!("time limit must be positive, got {s}")))
        }
        Some(s) => Some(Duration::from_secs_f64(s)),
        None => None,
    };
    config.timing = timing;

    let records = bench::run_bench(&config)?;
    let mut w = open_out(out)?;
    bench::write_records(&records, &mut w)?;
    w.flush()?;
    if let Some(p) = summary {
        let mut sw = BufWriter::new(File::create(p)?);
        bench::write_summary(&bench::summarize(&records)?, &mut sw)?;
        sw.flush()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { kind, n, m, p_star, p_any, seed, out } => {
            cmd_gen(kind, n, m, p_star, p_any, seed, out.as_deref())?
        }
        Command::Check { file, record, seed: _ } => cmd_check(&file, record)?,
        Command::Modify { file, algo, seed, chain, trace, out } => {
            if !cmd_modify(&file, algo, seed, &chain, trace.as_deref(), out.as_deref())? {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Bound { file, delta, seed: _ } => cmd_bound(&file, delta)?,
        Command::Bench {
            family,
            trials,
            n,
            m,
            p_star,
            p_any,
            algos,
            seed,
            chain,
            time_limit,
            timing,
            out,
            summary,
        } => cmd_bench(
            family,
            trials,
            n,
            m,
            p_star,
            p_any,
            &algos,
            seed,
            &chain,
            time_limit,
            timing,
            out.as_deref(),
            summary.as_deref(),
        )?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sscmod: {e}");
            ExitCode::from(2)
        }
    }
}
