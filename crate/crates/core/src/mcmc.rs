//! Annealed Metropolis chain over the feasible input patterns.
//!
//! The state space is every pattern that places `Any` only where `B̄` does.
//! A proposal changes exactly one cell and is uniform over the
//! `nm + #Any(B̄)` neighbors of the current state; it is accepted with
//! probability `min(1, exp((c_old - c_new) / T))`. For a fixed temperature
//! the chain is reversible with respect to `exp(-c/T) / G`. The schedule runs
//! `r_max` proposals per temperature and multiplies `T` by `alpha` until it
//! drops below `t_stop`.

use std::io::Write;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::controllability::{is_feasible_member, Evaluator};
use crate::error::{Error, Result};
use crate::oracle::{cell_options, for_each_feasible, feasible_set_size};
use crate::pattern::{PatternEntry, PatternMatrix, StructuredSystem};
use crate::solution::ModificationResult;

/// Largest state space for which an explicit transition matrix is built.
pub const TRANSITION_MATRIX_CAP: u64 = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct McmcParams {
    pub r_max: u64,
    pub t_start: f64,
    pub t_stop: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Penalty weight; `None` means `nm + 1`.
    pub epsilon: Option<u64>,
}

impl McmcParams {
    /// `r_max = 50000`, `T = 1 → 1e-10`, `alpha = 0.1`, `ε = nm + 1`.
    pub fn standard(seed: u64) -> Self {
        McmcParams {
            r_max: 50_000,
            t_start: 1.0,
            t_stop: 1e-10,
            alpha: 0.1,
            seed,
            epsilon: None,
        }
    }

    pub fn epsilon_for(&self, sys: &StructuredSystem) -> u64 {
        self.epsilon.unwrap_or_else(|| sys.default_epsilon())
    }

    pub fn validate(&self, sys: &StructuredSystem) -> Result<()> {
        if !(self.t_stop > 0.0 && self.t_stop <= self.t_start && self.t_start.is_finite()) {
            return Err(Error::Parameter(format!(
                "need 0 < t_stop <= t_start, got t_stop = {}, t_start = {}",
                self.t_stop, self.t_start
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {}", self.alpha)));
        }
        if self.r_max == 0 {
            return Err(Error::Parameter("r_max must be at least 1".into()));
        }
        let nm = (sys.n() * sys.m()) as u64;
        let eps = self.epsilon_for(sys);
        if eps <= nm {
            return Err(Error::Parameter(format!("epsilon must exceed nm = {nm}, got {eps}")));
        }
        Ok(())
    }

    /// Temperatures of the geometric schedule, from `t_start` down to the last
    /// value not below `t_stop`. A relative slack of `1e-9` absorbs rounding in
    /// the repeated products (`0.1^10` is not exactly `1e-10`).
    pub fn temperatures(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut t = self.t_start;
        while t >= self.t_stop * (1.0 - 1e-9) {
            out.push(t);
            t *= self.alpha;
        }
        out
    }
}

/// Number of neighbors of any feasible state: `nm + #Any(b_bar)`.
pub fn neighborhood_size(b_bar: &PatternMatrix) -> usize {
    b_bar.rows() * b_bar.cols() + b_bar.count(PatternEntry::Any)
}

/// Samples a neighbor uniformly: cells whose `B̄` entry is `Any` are twice as
/// likely, and the new value is uniform over the other allowed values.
#[derive(Clone, Debug)]
pub struct Proposer {
    /// Cell index per slot; `Any` cells of `B̄` occupy two slots.
    slots: Vec<usize>,
    bar: Vec<PatternEntry>,
    cols: usize,
}

impl Proposer {
    pub fn new(b_bar: &PatternMatrix) -> Self {
        let mut slots = Vec::with_capacity(neighborhood_size(b_bar));
        for (k, &e) in b_bar.entries().iter().enumerate() {
            slots.push(k);
            if e == PatternEntry::Any {
                slots.push(k);
            }
        }
        Proposer {
            slots,
            bar: b_bar.entries().to_vec(),
            cols: b_bar.cols(),
        }
    }

    /// Picks a cell and its new value without touching `b`.
    pub fn draw<R: Rng + ?Sized>(&self, b: &PatternMatrix, rng: &mut R) -> (usize, usize, PatternEntry) {
        let k = self.slots[rng.gen_range(0..self.slots.len())];
        let (i, j) = (k / self.cols, k % self.cols);
        let current = b.get(i, j);
        let mut alternatives = [PatternEntry::Zero; 2];
        let mut len = 0;
        for &v in cell_options(self.bar[k]) {
            if v != current {
                alternatives[len] = v;
                len += 1;
            }
        }
        let v = if len == 1 {
            alternatives[0]
        } else {
            alternatives[rng.gen_range(0..len)]
        };
        (i, j, v)
    }
}

/// One proposal from `b`: the neighbor and the changed cell (0-based).
pub fn propose<R: Rng + ?Sized>(
    b: &PatternMatrix,
    b_bar: &PatternMatrix,
    rng: &mut R,
) -> Result<(PatternMatrix, (usize, usize))> {
    if !is_feasible_member(b, b_bar)? {
        return Err(Error::State("proposal from a state outside the feasible set".into()));
    }
    let (i, j, v) = Proposer::new(b_bar).draw(b, rng);
    let mut next = b.clone();
    next.set(i, j, v);
    Ok((next, (i, j)))
}

/// Metropolis acceptance probability `min(1, exp((c_old - c_new) / t))`.
pub fn acceptance_probability(c_old: u64, c_new: u64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("temperature must be positive, got {t}")));
    }
    if c_new <= c_old {
        return Ok(1.0);
    }
    // exp underflows to 0 for very small t
    Ok((-((c_new - c_old) as f64) / t).exp())
}

/// One proposal of the chain. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McmcStep {
    pub iter: u64,
    pub temperature: f64,
    pub row: usize,
    pub column: usize,
    pub proposed_cost: u64,
    pub accepted: bool,
    pub current_cost: u64,
    pub best_cost: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct McmcTrace {
    pub steps: Vec<McmcStep>,
}

impl McmcTrace {
    pub const CSV_HEADER: &'static str = "iter,T,i,j,proposed_cost,accepted,current_cost,best_cost";

    /// Writes the trace as CSV with 1-based cell indices.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for s in &self.steps {
            writeln!(
                out,
                "{},{:e},{},{},{},{},{},{}",
                s.iter,
                s.temperature,
                s.row + 1,
                s.column + 1,
                s.proposed_cost,
                u8::from(s.accepted),
                s.current_cost,
                s.best_cost
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct McmcOutcome {
    /// Lowest-cost state visited.
    pub best: ModificationResult,
    /// State at the end of the schedule.
    pub final_state: ModificationResult,
    pub trace: McmcTrace,
    pub iterations: u64,
    pub timed_out: bool,
}

/// Extra knobs that do not change the chain itself.
#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub record_trace: bool,
    /// Stop early (flagging `timed_out`) once this instant has passed.
    pub deadline: Option<Instant>,
}

/// Runs the annealed chain from `B̄` and records every proposal.
pub fn mcmc_modify(sys: &StructuredSystem, params: &McmcParams) -> Result<McmcOutcome> {
    mcmc_run(
        sys,
        params,
        RunOptions {
            record_trace: true,
            deadline: None,
        },
    )
}

pub fn mcmc_run(sys: &StructuredSystem, params: &McmcParams, opts: RunOptions) -> Result<McmcOutcome> {
    params.validate(sys)?;
    let ev = Evaluator::new(sys, params.epsilon_for(sys))?;
    Ok(run_chain(&ev, params, opts))
}

fn run_chain(ev: &Evaluator, params: &McmcParams, opts: RunOptions) -> McmcOutcome {
    let b_bar = ev.system().b_bar();
    let eps = ev.epsilon();
    let proposer = Proposer::new(b_bar);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let mut b = b_bar.clone();
    let mut distance: u64 = 0;
    let mut current = eps * ev.white_total(&b);
    let mut best_b = b.clone();
    let mut best = current;

    let mut trace = McmcTrace::default();
    let mut iter: u64 = 0;
    let mut timed_out = false;

    'schedule: for t in params.temperatures() {
        for _ in 0..params.r_max {
            if let Some(deadline) = opts.deadline {
                if iter % 1024 == 0 && Instant::now() >= deadline {
                    timed_out = true;
                    break 'schedule;
                }
            }
            iter += 1;
            let (i, j, v) = proposer.draw(&b, &mut rng);
            let old = b.get(i, j);
            let bar = b_bar.get(i, j);
            b.set(i, j, v);
            let new_distance = distance + u64::from(v != bar) - u64::from(old != bar);
            let proposed = new_distance + eps * ev.white_total(&b);

            let accepted = proposed <= current || {
                let p = (-((proposed - current) as f64) / t).exp();
                rng.gen::<f64>() < p
            };
            if accepted {
                distance = new_distance;
                current = proposed;
                if current < best {
                    best = current;
                    best_b = b.clone();
                }
            } else {
                b.set(i, j, old);
            }
            if opts.record_trace {
                trace.steps.push(McmcStep {
                    iter,
                    temperature: t,
                    row: i,
                    column: j,
                    proposed_cost: proposed,
                    accepted,
                    current_cost: current,
                    best_cost: best,
                });
            }
        }
    }

    McmcOutcome {
        best: ModificationResult::evaluate(ev, best_b),
        final_state: ModificationResult::evaluate(ev, b),
        trace,
        iterations: iter,
        timed_out,
    }
}

/// Position of a feasible `b` in the enumeration order of the feasible set.
pub fn feasible_index(b: &PatternMatrix, b_bar: &PatternMatrix) -> Option<usize> {
    let mut idx = 0usize;
    for (&v, &bar) in b.entries().iter().zip(b_bar.entries()) {
        let opts = cell_options(bar);
        let d = opts.iter().position(|&o| o == v)?;
        idx = idx * opts.len() + d;
    }
    Some(idx)
}

/// Explicit one-step transition matrix of the chain at a fixed temperature.
#[derive(Clone, Debug)]
pub struct TransitionMatrix {
    /// Feasible states in enumeration order.
    pub states: Vec<PatternMatrix>,
    pub costs: Vec<u64>,
    pub temperature: f64,
    pub p: DMatrix<f64>,
}

pub fn transition_matrix(sys: &StructuredSystem, t: f64, epsilon: u64) -> Result<TransitionMatrix> {
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("temperature must be positive, got {t}")));
    }
    let b_bar = sys.b_bar();
    let size = feasible_set_size(b_bar).filter(|&s| s <= TRANSITION_MATRIX_CAP).ok_or_else(|| {
        Error::Capacity(format!(
            "transition matrix is limited to {TRANSITION_MATRIX_CAP} states"
        ))
    })? as usize;
    let ev = Evaluator::new(sys, epsilon)?;
    let mut states = Vec::with_capacity(size);
    let mut costs = Vec::with_capacity(size);
    for_each_feasible(b_bar, |b| {
        states.push(b.clone());
        costs.push(ev.cost(b).total);
    })?;

    let s = neighborhood_size(b_bar) as f64;
    let mut p = DMatrix::zeros(size, size);
    for (from, b) in states.iter().enumerate() {
        let mut off = 0.0;
        let mut nb = b.clone();
        for (i, j, bar) in b_bar.cells() {
            let cur = b.get(i, j);
            for &v in cell_options(bar) {
                if v == cur {
                    continue;
                }
                nb.set(i, j, v);
                let to = feasible_index(&nb, b_bar).expect("neighbor stays feasible");
                let q = acceptance_probability(costs[from], costs[to], t)? / s;
                p[(from, to)] = q;
                off += q;
            }
            nb.set(i, j, cur);
        }
        p[(from, from)] = 1.0 - off;
    }
    Ok(TransitionMatrix {
        states,
        costs,
        temperature: t,
        p,
    })
}

impl TransitionMatrix {
    /// The target law `exp(-c/T) / G`, computed with the minimum cost shifted
    /// out for numerical range.
    pub fn boltzmann(&self) -> Vec<f64> {
        boltzmann(&self.costs, self.temperature)
    }

    /// Stationary distribution by Grassmann-Taksar-Heyman elimination, which
    /// avoids the cancellation a plain linear solve suffers at low `T`.
    pub fn stationary(&self) -> Vec<f64> {
        let n = self.p.nrows();
        let mut a = self.p.clone();
        for k in (1..n).rev() {
            let s: f64 = (0..k).map(|j| a[(k, j)]).sum();
            assert!(s > 0.0, "chain is irreducible");
            for i in 0..k {
                a[(i, k)] /= s;
            }
            for i in 0..k {
                let f = a[(i, k)];
                if f == 0.0 {
                    continue;
                }
                for j in 0..k {
                    a[(i, j)] += f * a[(k, j)];
                }
            }
        }
        let mut pi = vec![0.0; n];
        if n > 0 {
            pi[0] = 1.0;
        }
        for k in 1..n {
            pi[k] = (0..k).map(|i| pi[i] * a[(i, k)]).sum();
        }
        let total: f64 = pi.iter().sum();
        pi.iter().map(|x| x / total).collect()
    }
}

pub fn boltzmann(costs: &[u64], t: f64) -> Vec<f64> {
    let min = costs.iter().copied().min().unwrap_or(0);
    let w: Vec<f64> = costs.iter().map(|&c| (-((c - min) as f64) / t).exp()).collect();
    let g: f64 = w.iter().sum();
    w.into_iter().map(|x| x / g).collect()
}

/// Temperature below which the stationary law puts mass at least `1 - delta`
/// on the optimal set: `1 / (ln(1/δ - 1) + ln(|B|/B* - 1))`.
pub fn t_stop_bound(delta: f64, feasible_count: f64, optimal_count_lower: f64) -> Result<f64> {
    if !(optimal_count_lower >= 1.0 && feasible_count > optimal_count_lower) {
        return Err(Error::Parameter(format!(
            "need 1 <= B* < |B|, got B* = {optimal_count_lower}, |B| = {feasible_count}"
        )));
    }
    let limit = 1.0 - optimal_count_lower / feasible_count;
    if !(delta > 0.0 && delta < limit) {
        return Err(Error::Parameter(format!(
            "delta must lie in (0, {limit}), got {delta}"
        )));
    }
    Ok(1.0 / ((1.0 / delta - 1.0).ln() + (feasible_count / optimal_count_lower - 1.0).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_optimal;
    use crate::pattern::hamming_dist;

    fn pm(rows: &[&str]) -> PatternMatrix {
        PatternMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn neighborhood_size_examples() {
        assert_eq!(neighborhood_size(&PatternMatrix::zeros(2, 3).unwrap()), 6);
        assert_eq!(neighborhood_size(&pm(&["? ?", "0 *"])), 6);
    }

    #[test]
    fn neighborhood_size_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let rows = rng.gen_range(1..=3);
            let cols = rng.gen_range(1..=3);
            let e = (0..rows * cols).map(|_| PatternEntry::ALL[rng.gen_range(0..3)]).collect();
            let b_bar = PatternMatrix::new(rows, cols, e).unwrap();
            let mut feasible = Vec::new();
            for_each_feasible(&b_bar, |b| feasible.push(b.clone())).unwrap();
            for b in &feasible {
                let neighbors = feasible.iter().filter(|x| hamming_dist(b, x).unwrap() == 1).count();
                assert_eq!(neighbors, neighborhood_size(&b_bar));
            }
        }
    }

    #[test]
    fn proposals_without_any_flip_zero_and_star() {
        let b_bar = pm(&["0 *", "* 0"]);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut b = b_bar.clone();
        for _ in 0..500 {
            let (next, (i, j)) = propose(&b, &b_bar, &mut rng).unwrap();
            assert_eq!(hamming_dist(&b, &next).unwrap(), 1);
            assert_ne!(next.get(i, j), PatternEntry::Any);
            assert_ne!(next.get(i, j), b.get(i, j));
            b = next;
        }
        assert!(matches!(
            propose(&pm(&["? *", "* 0"]), &b_bar, &mut rng),
            Err(Error::State(_))
        ));
    }

    #[test]
    fn proposals_are_uniform_over_neighbors() {
        let b_bar = pm(&["? 0", "0 *"]);
        let b = pm(&["* 0", "0 *"]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws = 100_000;
        let mut counts = std::collections::HashMap::new();
        let proposer = Proposer::new(&b_bar);
        for _ in 0..draws {
            let (i, j, v) = proposer.draw(&b, &mut rng);
            *counts.entry((i, j, v)).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 5);
        let p = 0.2;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        for (&k, &c) in &counts {
            assert!((c as f64 - draws as f64 * p).abs() <= 3.0 * sigma, "{k:?}: {c}");
        }
    }

    #[test]
    fn acceptance_examples() {
        assert_eq!(acceptance_probability(5, 3, 1.0).unwrap(), 1.0);
        assert_eq!(acceptance_probability(4, 4, 1e-12).unwrap(), 1.0);
        let p = acceptance_probability(3, 5, 1.0).unwrap();
        assert!((p - (-2.0f64).exp()).abs() < 1e-15);
        assert!((p - 0.1353).abs() < 1e-4);
        assert_eq!(acceptance_probability(0, 50, 1e-10).unwrap(), 0.0);
        assert!(acceptance_probability(3, 5, 0.0).is_err());
        assert!(acceptance_probability(3, 5, -1.0).is_err());
    }

    #[test]
    fn schedule_has_eleven_levels_with_standard_params() {
        let t = McmcParams::standard(0).temperatures();
        assert_eq!(t.len(), 11);
        assert_eq!(t[0], 1.0);
    }

    #[test]
    fn params_validation() {
        let sys = StructuredSystem::new(pm(&["*"]), pm(&["0"])).unwrap();
        let ok = McmcParams::standard(0);
        assert!(ok.validate(&sys).is_ok());
        for bad in [
            McmcParams { alpha: 1.0, ..ok.clone() },
            McmcParams { t_stop: 2.0, ..ok.clone() },
            McmcParams { t_stop: 0.0, ..ok.clone() },
            McmcParams { r_max: 0, ..ok.clone() },
            McmcParams { epsilon: Some(1), ..ok.clone() },
        ] {
            assert!(matches!(bad.validate(&sys), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn controllable_start_is_kept_as_best() {
        let b = pm(&["* 0", "* 0", "0 *"]);
        let sys = StructuredSystem::new(pm(&["0 0 0", "0 * 0", "0 0 *"]), b.clone()).unwrap();
        let params = McmcParams { r_max: 200, ..McmcParams::standard(3) };
        let out = mcmc_modify(&sys, &params).unwrap();
        assert_eq!(out.best.cost.total, 0);
        assert_eq!(out.best.b, b);
    }

    #[test]
    fn chain_invariants_and_determinism() {
        let sys = StructuredSystem::new(pm(&["0 ? *", "* 0 0", "0 * ?"]), pm(&["? 0", "0 *", "* ?"])).unwrap();
        let params = McmcParams { r_max: 5000, ..McmcParams::standard(42) };
        let out = mcmc_modify(&sys, &params).unwrap();
        let again = mcmc_modify(&sys, &params).unwrap();
        assert_eq!(out.trace, again.trace);
        assert_eq!(out.best, again.best);

        let ev = Evaluator::with_default_epsilon(&sys);
        assert_eq!(out.trace.steps.len() as u64, out.iterations);
        let mut prev_best = u64::MAX;
        let mut prev_current = ev.cost(sys.b_bar()).total;
        for s in &out.trace.steps {
            assert!(s.best_cost <= prev_best);
            assert!(s.best_cost <= s.current_cost);
            if s.proposed_cost <= prev_current {
                assert!(s.accepted);
            }
            prev_best = s.best_cost;
            prev_current = s.current_cost;
        }
        assert!(is_feasible_member(&out.best.b, sys.b_bar()).unwrap());
        assert!(is_feasible_member(&out.final_state.b, sys.b_bar()).unwrap());
        assert_eq!(out.best.cost.total, prev_best);
        assert!(out.best.cost.total <= out.final_state.cost.total);
        assert_eq!(out.best.cost.total, brute_force_optimal(&sys, ev.epsilon()).unwrap().optimal_cost);

        let other = mcmc_modify(&sys, &McmcParams { seed: 43, ..params }).unwrap();
        assert_ne!(out.trace, other.trace);
    }

    #[test]
    fn trace_csv_shape() {
        let sys = StructuredSystem::new(pm(&["*"]), pm(&["0"])).unwrap();
        let params = McmcParams { r_max: 3, t_start: 1.0, t_stop: 0.5, alpha: 0.5, seed: 1, epsilon: None };
        let out = mcmc_modify(&sys, &params).unwrap();
        let mut buf = Vec::new();
        out.trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], McmcTrace::CSV_HEADER);
        assert_eq!(lines.len(), 1 + 6);
        assert!(lines[1].starts_with("1,1e0,1,1,"));
    }

    #[test]
    fn t_stop_bound_examples() {
        let b = t_stop_bound(0.1, 64.0, 1.0).unwrap();
        assert!((b - 1.0 / (9f64.ln() + 63f64.ln())).abs() < 1e-15);
        assert!((b - 0.15772).abs() < 1e-5);
        assert!(t_stop_bound(0.5, 64.0, 1.0).is_ok());
        assert!(t_stop_bound(0.99, 64.0, 1.0).is_err());
        assert!(t_stop_bound(0.0, 64.0, 1.0).is_err());
        assert!(t_stop_bound(0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn feasible_index_matches_enumeration() {
        let b_bar = pm(&["? 0", "* ?"]);
        let mut k = 0;
        for_each_feasible(&b_bar, |b| {
            assert_eq!(feasible_index(b, &b_bar), Some(k));
            k += 1;
        })
        .unwrap();
        assert_eq!(feasible_index(&pm(&["0 ?", "0 0"]), &b_bar), None);
    }
}
