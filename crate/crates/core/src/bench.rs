//! Seeded benchmark sweeps comparing the solvers on generated instances.
//!
//! Every `(n, m, p_star, trial)` cell derives its instance seed from the
//! master seed alone, so all algorithms see the same instance. Records come
//! out in `(cell, trial, algorithm)` order regardless of thread scheduling.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controllability::Evaluator;
use crate::error::{Error, Result};
use crate::greedy::greedy_with;
use crate::instances::{worst_case_instance, InstanceSpec};
use crate::mcmc::{mcmc_run, McmcParams, RunOptions};
use crate::oracle::{brute_force_optimal, feasible_set_size, BRUTE_FORCE_CAP};
use crate::pattern::{hamming_dist, StructuredSystem};

/// First line of every bench CSV file.
pub const SCHEMA_LINE: &str = "# sscmod-bench schema=1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Greedy,
    Mcmc,
    Brute,
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Greedy => "greedy",
            Algo::Mcmc => "mcmc",
            Algo::Brute => "brute",
        })
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Algo::Greedy),
            "mcmc" => Ok(Algo::Mcmc),
            "brute" => Ok(Algo::Brute),
            _ => Err(Error::Parameter(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    ErdosRenyi,
    /// The adversarial family; `m = n` and the probabilities are ignored.
    WorstCase,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Timeout,
    /// The instance exceeded the exhaustive search cap.
    Skipped,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub family: Family,
    pub algos: Vec<Algo>,
    pub ns: Vec<usize>,
    pub ms: Vec<usize>,
    pub p_stars: Vec<f64>,
    pub p_any: f64,
    pub trials: usize,
    pub master_seed: u64,
    /// Chain parameters; the seed field is replaced per trial.
    pub mcmc: McmcParams,
    pub time_limit: Option<Duration>,
    /// Measure wall-clock runtimes. Off by default so that output is
    /// byte-reproducible.
    pub timing: bool,
}

impl BenchConfig {
    pub fn erdos_renyi(ns: Vec<usize>, ms: Vec<usize>, p_stars: Vec<f64>, trials: usize, master_seed: u64) -> Self {
        BenchConfig {
            family: Family::ErdosRenyi,
            algos: vec![Algo::Greedy, Algo::Mcmc],
            ns,
            ms,
            p_stars,
            p_any: 0.1,
            trials,
            master_seed,
            mcmc: McmcParams::standard(0),
            time_limit: None,
            timing: false,
        }
    }

    pub fn worst_case(ns: Vec<usize>, trials: usize, master_seed: u64) -> Self {
        BenchConfig {
            family: Family::WorstCase,
            algos: vec![Algo::Greedy, Algo::Mcmc],
            ns,
            ms: Vec::new(),
            p_stars: vec![0.0],
            p_any: 0.0,
            trials,
            master_seed,
            mcmc: McmcParams::standard(0),
            time_limit: None,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.algos.is_empty() || self.ns.is_empty() {
            return Err(Error::Parameter("need at least one algorithm and one n".into()));
        }
        if self.family == Family::ErdosRenyi {
            if self.ms.is_empty() || self.p_stars.is_empty() {
                return Err(Error::Parameter("need at least one m and one p_star".into()));
            }
            for &p in self.p_stars.iter().chain(std::iter::once(&self.p_any)) {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Parameter(format!("probability {p} outside [0, 1]")));
                }
            }
        }
        Ok(())
    }

    /// Grid cells `(n, m, p_star)` in output order.
    pub fn cells(&self) -> Vec<(usize, usize, f64)> {
        match self.family {
            Family::WorstCase => self.ns.iter().map(|&n| (n, n, 0.0)).collect(),
            Family::ErdosRenyi => {
                let mut out = Vec::new();
                for &n in &self.ns {
                    for &m in &self.ms {
                        for &p in &self.p_stars {
                            out.push((n, m, p));
                        }
                    }
                }
                out
            }
        }
    }

    pub fn instance(&self, n: usize, m: usize, p_star: f64, seed: u64) -> Result<StructuredSystem> {
        match self.family {
            Family::WorstCase => worst_case_instance(n),
            Family::ErdosRenyi => InstanceSpec::erdos_renyi(n, m, p_star, self.p_any, seed).generate(),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable seed for one trial, independent of the algorithm.
pub fn trial_seed(master: u64, n: usize, m: usize, p_star: f64, trial: usize) -> u64 {
    [n as u64, m as u64, p_star.to_bits(), trial as u64]
        .into_iter()
        .fold(splitmix64(master), |h, x| splitmix64(h ^ x))
}

/// Chain seed derived from a trial seed.
pub fn chain_seed(trial_seed: u64) -> u64 {
    splitmix64(trial_seed ^ 0x6d63_6d63)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algo: Algo,
    pub n: usize,
    pub m: usize,
    pub p_star: f64,
    pub p_any: f64,
    pub trial: usize,
    pub seed: u64,
    pub cost: u64,
    pub dist: u64,
    pub white_total: u64,
    pub controllable: bool,
    pub status: RunStatus,
    pub runtime_ms: u64,
}

/// Runs one algorithm on one instance.
fn run_algo(config: &BenchConfig, algo: Algo, sys: &StructuredSystem, seed: u64) -> Result<(crate::ModificationResult, RunStatus, u64)> {
    let ev = Evaluator::new(sys, config.mcmc.epsilon_for(sys))?;
    let start = Instant::now();
    let (result, status) = match algo {
        Algo::Greedy => (greedy_with(&ev).result, RunStatus::Ok),
        Algo::Mcmc => {
            let params = McmcParams {
                seed: chain_seed(seed),
                ..config.mcmc.clone()
            };
            let opts = RunOptions {
                record_trace: false,
                deadline: config.time_limit.map(|d| start + d),
            };
            let out = mcmc_run(sys, &params, opts)?;
            let status = if out.timed_out { RunStatus::Timeout } else { RunStatus::Ok };
            (out.best, status)
        }
        Algo::Brute => {
            if feasible_set_size(sys.b_bar()).map_or(true, |s| s > BRUTE_FORCE_CAP) {
                let r = crate::ModificationResult::evaluate(&ev, sys.b_bar().clone());
                return Ok((r, RunStatus::Skipped, 0));
            }
            let oracle = brute_force_optimal(sys, ev.epsilon())?;
            let b = oracle.witnesses.into_iter().next().expect("at least one optimizer");
            (crate::ModificationResult::evaluate(&ev, b), RunStatus::Ok)
        }
    };
    let ms = if config.timing { start.elapsed().as_millis() as u64 } else { 0 };
    Ok((result, status, ms))
}

fn trial_records(config: &BenchConfig, (n, m, p_star): (usize, usize, f64), trial: usize) -> Result<Vec<BenchRecord>> {
    let seed = trial_seed(config.master_seed, n, m, p_star, trial);
    let sys = config.instance(n, m, p_star, seed)?;
    config
        .algos
        .iter()
        .map(|&algo| {
            let (r, status, runtime_ms) = run_algo(config, algo, &sys, seed)?;
            Ok(BenchRecord {
                algo,
                n,
                m,
                p_star,
                p_any: if config.family == Family::WorstCase { 0.0 } else { config.p_any },
                trial,
                seed,
                cost: r.cost.total,
                dist: hamming_dist(&r.b, sys.b_bar())? as u64,
                white_total: r.cost.white_total,
                controllable: r.is_controllable(),
                status,
                runtime_ms,
            })
        })
        .collect()
}

/// Runs the whole sweep. Trials run in parallel; output order is fixed.
pub fn run_bench(config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    config.validate()?;
    let jobs: Vec<((usize, usize, f64), usize)> = config
        .cells()
        .into_iter()
        .flat_map(|cell| (0..config.trials).map(move |t| (cell, t)))
        .collect();
    let chunks: Vec<Vec<BenchRecord>> = jobs
        .par_iter()
        .map(|&(cell, t)| trial_records(config, cell, t))
        .collect::<Result<_>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Re-runs the algorithm named in `record` on its instance and returns the cost.
pub fn rerun(config: &BenchConfig, record: &BenchRecord) -> Result<u64> {
    let sys = config.instance(record.n, record.m, record.p_star, record.seed)?;
    Ok(run_algo(config, record.algo, &sys, record.seed)?.0.cost.total)
}

pub fn write_records<W: Write>(records: &[BenchRecord], mut out: W) -> Result<()> {
    writeln!(out, "{SCHEMA_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<BenchRecord>> {
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let mut out = Vec::new();
    for r in reader.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

/// Aggregates for one `(algo, n, m, p_star)` group. Cost statistics cover the
/// runs that ended controllable.
#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub algo: Algo,
    pub n: usize,
    pub m: usize,
    pub p_star: f64,
    pub runs: usize,
    pub controllable: usize,
    pub infeasible: usize,
    pub timeouts: usize,
    pub mean_cost: Option<f64>,
    pub min_cost: Option<u64>,
    pub max_cost: Option<u64>,
}

pub fn summarize(records: &[BenchRecord]) -> Result<Vec<CellSummary>> {
    if records.is_empty() {
        return Err(Error::Parameter("cannot summarize an empty record set".into()));
    }
    let mut out: Vec<(CellSummary, u64)> = Vec::new();
    for r in records {
        let key = (r.algo, r.n, r.m, r.p_star.to_bits());
        let pos = out
            .iter()
            .position(|(s, _)| (s.algo, s.n, s.m, s.p_star.to_bits()) == key)
            .unwrap_or_else(|| {
                out.push((
                    CellSummary {
                        algo: r.algo,
                        n: r.n,
                        m: r.m,
                        p_star: r.p_star,
                        runs: 0,
                        controllable: 0,
                        infeasible: 0,
                        timeouts: 0,
                        mean_cost: None,
                        min_cost: None,
                        max_cost: None,
                    },
                    0,
                ));
                out.len() - 1
            });
        let (s, sum) = &mut out[pos];
        s.runs += 1;
        match r.status {
            RunStatus::Timeout => s.timeouts += 1,
            RunStatus::Skipped => {}
            RunStatus::Ok if r.controllable => {
                s.controllable += 1;
                *sum += r.cost;
                s.min_cost = Some(s.min_cost.map_or(r.cost, |c| c.min(r.cost)));
                s.max_cost = Some(s.max_cost.map_or(r.cost, |c| c.max(r.cost)));
            }
            RunStatus::Ok => s.infeasible += 1,
        }
    }
    Ok(out
        .into_iter()
        .map(|(mut s, sum)| {
            if s.controllable > 0 {
                s.mean_cost = Some(sum as f64 / s.controllable as f64);
            }
            s
        })
        .collect())
}

pub fn write_summary<W: Write>(summary: &[CellSummary], mut out: W) -> Result<()> {
    writeln!(
        out,
        "{:<7} {:>4} {:>4} {:>7} {:>5} {:>5} {:>6} {:>5} {:>9} {:>5} {:>5}",
        "algo", "n", "m", "p_star", "runs", "ok", "infeas", "tmout", "mean", "min", "max"
    )?;
    let opt = |v: Option<u64>| v.map_or("-".to_string(), |c| c.to_string());
    for s in summary {
        writeln!(
            out,
            "{:<7} {:>4} {:>4} {:>7} {:>5} {:>5} {:>6} {:>5} {:>9} {:>5} {:>5}",
            s.algo.to_string(),
            s.n,
            s.m,
            s.p_star,
            s.runs,
            s.controllable,
            s.infeasible,
            s.timeouts,
            s.mean_cost.map_or("-".to_string(), |c| format!("{c:.3}")),
            opt(s.min_cost),
            opt(s.max_cost),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_mcmc() -> McmcParams {
        McmcParams {
            r_max: 500,
            ..McmcParams::standard(0)
        }
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        let a = trial_seed(1, 5, 5, 0.45, 0);
        assert_eq!(a, trial_seed(1, 5, 5, 0.45, 0));
        assert_ne!(a, trial_seed(1, 5, 5, 0.45, 1));
        assert_ne!(a, trial_seed(2, 5, 5, 0.45, 0));
        assert_ne!(a, trial_seed(1, 5, 5, 0.1, 0));
        assert_ne!(chain_seed(a), a);
    }

    #[test]
    fn worst_case_greedy_sweep() {
        let mut config = BenchConfig::worst_case(vec![6, 7, 8], 1, 3);
        config.algos = vec![Algo::Greedy];
        let records = run_bench(&config).unwrap();
        assert_eq!(records.len(), 3);
        for r in &records {
            assert_eq!(r.cost, r.n as u64 - 2);
            assert!(r.controllable);
        }
        let summary = summarize(&records).unwrap();
        for s in &summary {
            assert_eq!(s.mean_cost, Some(s.n as f64 - 2.0));
        }
    }

    #[test]
    fn records_round_trip_and_rerun() {
        let mut config = BenchConfig::erdos_renyi(vec![3, 4], vec![2], vec![0.1, 0.8], 3, 17);
        config.algos = vec![Algo::Greedy, Algo::Mcmc, Algo::Brute];
        config.mcmc = small_mcmc();
        let records = run_bench(&config).unwrap();
        assert_eq!(records.len(), 2 * 2 * 3 * 3);
        let mut buf = Vec::new();
        write_records(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(SCHEMA_LINE));
        assert_eq!(read_records(buf.as_slice()).unwrap(), records);

        for r in &records {
            assert_eq!(rerun(&config, r).unwrap(), r.cost);
            assert_eq!(r.controllable, r.white_total == 0);
        }
        // brute force is a lower bound for both heuristics
        for chunk in records.chunks(3) {
            assert!(chunk[0].cost >= chunk[2].cost);
            assert!(chunk[1].cost >= chunk[2].cost);
        }
    }

    #[test]
    fn output_is_deterministic() {
        let mut config = BenchConfig::erdos_renyi(vec![4], vec![2, 3], vec![0.45], 4, 99);
        config.mcmc = small_mcmc();
        let render = |c: &BenchConfig| {
            let mut buf = Vec::new();
            write_records(&run_bench(c).unwrap(), &mut buf).unwrap();
            buf
        };
        assert_eq!(render(&config), render(&config));
    }

    #[test]
    fn summary_of_single_record() {
        let r = BenchRecord {
            algo: Algo::Greedy,
            n: 3,
            m: 2,
            p_star: 0.1,
            p_any: 0.1,
            trial: 0,
            seed: 1,
            cost: 4,
            dist: 4,
            white_total: 0,
            controllable: true,
            status: RunStatus::Ok,
            runtime_ms: 0,
        };
        let s = summarize(std::slice::from_ref(&r)).unwrap();
        assert_eq!((s[0].mean_cost, s[0].min_cost, s[0].max_cost), (Some(4.0), Some(4), Some(4)));
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn invalid_config_rejected() {
        let mut c = BenchConfig::erdos_renyi(vec![3], vec![2], vec![0.1], 0, 1);
        assert!(run_bench(&c).is_err());
        c.trials = 1;
        c.p_any = 2.0;
        assert!(run_bench(&c).is_err());
    }

    #[test]
    fn timeouts_are_flagged() {
        let mut config = BenchConfig::erdos_renyi(vec![6], vec![3], vec![0.45], 1, 5);
        config.algos = vec![Algo::Mcmc];
        config.time_limit = Some(Duration::ZERO);
        let records = run_bench(&config).unwrap();
        assert_eq!(records[0].status, RunStatus::Timeout);
        let s = summarize(&records).unwrap();
        assert_eq!(s[0].timeouts, 1);
    }
}
