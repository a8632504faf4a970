//! Strong structural controllability test, the penalized modification cost,
//! and feasibility bounds.
//!
//! `(Ā, B)` is strongly structurally controllable iff both `[Ā B]` and
//! `[Q(Ā) B]` have pattern full row rank, i.e. the color change rule leaves no
//! white row in either. The cost of a candidate input pattern `B` is its
//! Hamming distance to `B̄` plus `ε` times the total number of white rows, with
//! `ε > nm` so that every controllable candidate is cheaper than every
//! uncontrollable one.

use std::fmt;

use crate::error::{Error, Result};
use crate::pattern::{hamming_dist, q_transform, PatternEntry, PatternMatrix, StructuredSystem};
use crate::rowset::RowSet;
use crate::zero_forcing::{joint_zero_forcing_number, white_set_of, zero_forcing_number};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SscVerdict {
    pub controllable: bool,
    /// White rows of `[Ā B]`.
    pub white_first: RowSet,
    /// White rows of `[Q(Ā) B]`.
    pub white_second: RowSet,
}

impl SscVerdict {
    pub fn white_union(&self) -> RowSet {
        self.white_first.union(self.white_second)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostBreakdown {
    pub distance: u64,
    /// `|W([Ā B])| + |W([Q(Ā) B])|`
    pub white_total: u64,
    pub epsilon: u64,
    pub total: u64,
}

impl CostBreakdown {
    pub fn new(distance: u64, white_total: u64, epsilon: u64) -> Self {
        CostBreakdown {
            distance,
            white_total,
            epsilon,
            total: distance + epsilon * white_total,
        }
    }

    pub fn is_controllable(&self) -> bool {
        self.white_total == 0
    }
}

impl fmt::Display for CostBreakdown {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "cost={} (dist={} + eps={} x white={})",
            self.total, self.distance, self.epsilon, self.white_total
        )
    }
}

fn check_input(sys: &StructuredSystem, b: &PatternMatrix) -> Result<()> {
    if b.rows() != sys.n() {
        return Err(Error::Dimension(format!(
            "input pattern has {} rows, system has n = {}",
            b.rows(),
            sys.n()
        )));
    }
    Ok(())
}

fn check_epsilon(sys: &StructuredSystem, epsilon: u64) -> Result<()> {
    let nm = (sys.n() * sys.m()) as u64;
    if epsilon <= nm {
        return Err(Error::Parameter(format!(
            "epsilon must exceed nm = {nm}, got {epsilon}"
        )));
    }
    Ok(())
}

/// Precomputed `Ā` and `Q(Ā)` for repeated verdict and cost evaluation.
#[derive(Clone, Debug)]
pub struct Evaluator {
    sys: StructuredSystem,
    q_a: PatternMatrix,
    epsilon: u64,
}

impl Evaluator {
    pub fn new(sys: &StructuredSystem, epsilon: u64) -> Result<Self> {
        check_epsilon(sys, epsilon)?;
        Ok(Evaluator {
            sys: sys.clone(),
            q_a: q_transform(sys.a_bar())?,
            epsilon,
        })
    }

    pub fn with_default_epsilon(sys: &StructuredSystem) -> Self {
        Self::new(sys, sys.default_epsilon()).expect("nm + 1 is a valid epsilon")
    }

    pub fn system(&self) -> &StructuredSystem {
        &self.sys
    }

    pub fn q_a(&self) -> &PatternMatrix {
        &self.q_a
    }

    pub fn epsilon(&self) -> u64 {
        self.epsilon
    }

    /// Both white sets. `b` must have `n` rows.
    pub fn verdict(&self, b: &PatternMatrix) -> SscVerdict {
        let full = RowSet::full(self.sys.n());
        let white_first = white_set_of(&[self.sys.a_bar(), b], full);
        let white_second = white_set_of(&[&self.q_a, b], full);
        SscVerdict {
            controllable: white_first.is_empty() && white_second.is_empty(),
            white_first,
            white_second,
        }
    }

    pub fn white_total(&self, b: &PatternMatrix) -> u64 {
        let v = self.verdict(b);
        (v.white_first.len() + v.white_second.len()) as u64
    }

    /// Cost breakdown of `b`, which must have the shape of `B̄`.
    pub fn cost(&self, b: &PatternMatrix) -> CostBreakdown {
        let distance = hamming_dist(b, self.sys.b_bar()).expect("shape checked by caller") as u64;
        CostBreakdown::new(distance, self.white_total(b), self.epsilon)
    }

    pub fn check_shape(&self, b: &PatternMatrix) -> Result<()> {
        if b.rows() != self.sys.n() || b.cols() != self.sys.m() {
            return Err(Error::Dimension(format!(
                "candidate is {}x{}, input pattern is {}x{}",
                b.rows(),
                b.cols(),
                self.sys.n(),
                self.sys.m()
            )));
        }
        Ok(())
    }
}

/// Strong structural controllability of `(Ā, b)`; `b` may have any column count.
pub fn is_ssc(sys: &StructuredSystem, b: &PatternMatrix) -> Result<SscVerdict> {
    check_input(sys, b)?;
    let q_a = q_transform(sys.a_bar())?;
    let full = RowSet::full(sys.n());
    let white_first = white_set_of(&[sys.a_bar(), b], full);
    let white_second = white_set_of(&[&q_a, b], full);
    Ok(SscVerdict {
        controllable: white_first.is_empty() && white_second.is_empty(),
        white_first,
        white_second,
    })
}

/// Rows left white by at least one of the two color change runs.
pub fn white_index_set(sys: &StructuredSystem, b: &PatternMatrix) -> Result<RowSet> {
    Ok(is_ssc(sys, b)?.white_union())
}

/// `b` places `Any` only where `b_bar` has `Any`.
pub fn is_feasible_member(b: &PatternMatrix, b_bar: &PatternMatrix) -> Result<bool> {
    if b.rows() != b_bar.rows() || b.cols() != b_bar.cols() {
        return Err(Error::Dimension(format!(
            "is_feasible_member needs equal shapes, got {}x{} and {}x{}",
            b.rows(),
            b.cols(),
            b_bar.rows(),
            b_bar.cols()
        )));
    }
    Ok(b
        .entries()
        .iter()
        .zip(b_bar.entries())
        .all(|(&x, &y)| x != PatternEntry::Any || y == PatternEntry::Any))
}

pub fn cost(sys: &StructuredSystem, b: &PatternMatrix, epsilon: u64) -> Result<CostBreakdown> {
    let ev = Evaluator::new(sys, epsilon)?;
    ev.check_shape(b)?;
    Ok(ev.cost(b))
}

/// Zero forcing based feasibility bounds and the bracket on the optimal cost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub n: usize,
    pub m: usize,
    pub z_a: usize,
    pub z_qa: usize,
    /// `max{Z(Ā), Z(Q(Ā))}`: no fewer input columns can work.
    pub necessary_m: usize,
    /// Joint zero forcing number: this many columns always suffice.
    pub sufficient_m: usize,
    /// A minimum common zero forcing set of `Ā` and `Q(Ā)`.
    pub witness: RowSet,
    /// `max{Z(Ā), Z(Q(Ā))}` when `B̄` is all `Zero`, otherwise 0: entries of
    /// `B̄` that are already nonzero can be kept for free.
    pub cost_lower: usize,
    pub cost_upper: usize,
}

impl FeasibilityReport {
    /// `m` is below the necessary bound: no input pattern can work.
    pub fn certainly_infeasible(&self) -> bool {
        self.m < self.necessary_m
    }

    /// `m` reaches the joint zero forcing number: a solution exists.
    pub fn certainly_feasible(&self) -> bool {
        self.m >= self.sufficient_m
    }

    /// The upper end of the cost bracket assumes `m ≥ Z^joint`.
    pub fn upper_bound_applies(&self) -> bool {
        self.certainly_feasible()
    }
}

pub fn feasibility_report(sys: &StructuredSystem) -> Result<FeasibilityReport> {
    let a = sys.a_bar();
    let q_a = q_transform(a)?;
    let z_a = zero_forcing_number(a)?.number;
    let z_qa = zero_forcing_number(&q_a)?.number;
    let joint = joint_zero_forcing_number(a, &q_a)?;
    let necessary_m = z_a.max(z_qa);
    Ok(FeasibilityReport {
        n: sys.n(),
        m: sys.m(),
        z_a,
        z_qa,
        necessary_m,
        sufficient_m: joint.number,
        witness: joint.witness,
        cost_lower: if sys.b_bar().count(PatternEntry::Zero) == sys.n() * sys.m() {
            necessary_m
        } else {
            0
        },
        cost_upper: sys.n() * joint.number,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::worst_case_instance;
    use crate::zero_forcing::{diagonal_witness, pad_columns};

    fn pm(rows: &[&str]) -> PatternMatrix {
        PatternMatrix::from_rows(rows).unwrap()
    }

    fn a1() -> PatternMatrix {
        pm(&["0 ? ?", "0 * ?", "0 ? ?"])
    }

    fn a2() -> PatternMatrix {
        pm(&["0 0 0", "0 * 0", "0 0 *"])
    }

    fn b_star() -> PatternMatrix {
        pm(&["* 0", "* 0", "0 *"])
    }

    #[test]
    fn example_pair_is_controllable() {
        let sys = StructuredSystem::new(a2(), b_star()).unwrap();
        let v = is_ssc(&sys, &b_star()).unwrap();
        assert!(v.controllable);
        assert!(white_index_set(&sys, &b_star()).unwrap().is_empty());
        let c = cost(&sys, &b_star(), 7).unwrap();
        assert_eq!(c.total, 0);
    }

    #[test]
    fn star_diagonal_input_controls_anything() {
        let a = pm(&["? * 0", "* ? ?", "0 0 ?"]);
        let sys = StructuredSystem::new(a, PatternMatrix::zeros(3, 3).unwrap()).unwrap();
        assert!(is_ssc(&sys, &PatternMatrix::identity(3).unwrap()).unwrap().controllable);
    }

    #[test]
    fn worst_case_with_zero_input_is_all_white() {
        let sys = worst_case_instance(6).unwrap();
        let v = is_ssc(&sys, sys.b_bar()).unwrap();
        assert!(!v.controllable);
        assert_eq!(v.white_first, RowSet::full(6));
        assert_eq!(v.white_second, RowSet::full(6));
        assert_eq!(white_index_set(&sys, sys.b_bar()).unwrap(), RowSet::full(6));
    }

    #[test]
    fn is_ssc_rejects_row_mismatch() {
        let sys = StructuredSystem::new(a2(), b_star()).unwrap();
        assert!(matches!(
            is_ssc(&sys, &PatternMatrix::zeros(2, 2).unwrap()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn feasible_member_examples() {
        let b_bar = pm(&["? 0", "* 0"]);
        assert!(is_feasible_member(&b_bar, &b_bar).unwrap());
        assert!(is_feasible_member(&pm(&["0 0", "* *"]), &b_bar).unwrap());
        let zero = PatternMatrix::zeros(2, 2).unwrap();
        assert!(!is_feasible_member(&pm(&["0 ?", "0 0"]), &zero).unwrap());
        assert!(is_feasible_member(&zero, &pm(&["0"])).is_err());
    }

    #[test]
    fn feasible_set_size_matches_counting_formula() {
        // enumerate all 3^(nm) matrices for several shapes and Any placements
        for (rows, cols, any_cells) in [(1, 2, vec![]), (2, 2, vec![0, 3]), (3, 3, vec![1, 4, 5, 8]), (3, 2, vec![0])] {
            let mut entries = vec![PatternEntry::Zero; rows * cols];
            for &k in &any_cells {
                entries[k] = PatternEntry::Any;
            }
            let b_bar = PatternMatrix::new(rows, cols, entries).unwrap();
            let nm = rows * cols;
            let mut count = 0u64;
            for code in 0..3u64.pow(nm as u32) {
                let mut c = code;
                let e = (0..nm)
                    .map(|_| {
                        let v = PatternEntry::ALL[(c % 3) as usize];
                        c /= 3;
                        v
                    })
                    .collect();
                let b = PatternMatrix::new(rows, cols, e).unwrap();
                if is_feasible_member(&b, &b_bar).unwrap() {
                    count += 1;
                }
            }
            let k = any_cells.len() as u32;
            assert_eq!(count, 2u64.pow(nm as u32 - k) * 3u64.pow(k));
        }
    }

    #[test]
    fn cost_rejects_small_epsilon() {
        let sys = StructuredSystem::new(a2(), b_star()).unwrap();
        assert!(matches!(cost(&sys, &b_star(), 6), Err(Error::Parameter(_))));
        assert!(cost(&sys, &PatternMatrix::zeros(3, 1).unwrap(), 7).is_err());
    }

    #[test]
    fn worst_case_costs() {
        for n in [6usize, 7, 9] {
            let sys = worst_case_instance(n).unwrap();
            let eps = sys.default_epsilon();
            let mut greedy_like = PatternMatrix::zeros(n, n).unwrap();
            for i in 0..n - 2 {
                greedy_like.set(i, i, PatternEntry::Star);
            }
            assert_eq!(cost(&sys, &greedy_like, eps).unwrap().total, (n - 2) as u64);

            let v: RowSet = [0, n - 3, n - 2, n - 1].into_iter().collect();
            let w = pad_columns(&diagonal_witness(v, n).unwrap(), n).unwrap();
            assert_eq!(cost(&sys, &w, eps).unwrap().total, 4);
        }
    }

    #[test]
    fn feasibility_report_examples() {
        let r1 = feasibility_report(&StructuredSystem::new(a1(), PatternMatrix::zeros(3, 2).unwrap()).unwrap()).unwrap();
        assert_eq!((r1.z_a, r1.z_qa, r1.necessary_m), (2, 2, 2));
        assert!(!r1.certainly_infeasible());

        let r2 = feasibility_report(&StructuredSystem::new(a2(), b_star()).unwrap()).unwrap();
        assert_eq!(r2.sufficient_m, 3);
        assert_eq!(r2.cost_upper, 9);
        assert!(!r2.upper_bound_applies());

        // Star diagonal: Ā forces itself, Q(Ā) has an all-Any diagonal
        let id = PatternMatrix::identity(3).unwrap();
        let r3 = feasibility_report(&StructuredSystem::new(id, PatternMatrix::zeros(3, 1).unwrap()).unwrap()).unwrap();
        assert_eq!(r3.z_a, 0);
        assert_eq!(r3.z_qa, 3);
        assert_eq!(r3.sufficient_m, 3);
        assert!(r3.necessary_m <= r3.sufficient_m);
    }
}
