//! Greedy column-by-column modification of the input pattern.
//!
//! Each iteration picks one untouched column `j` and one currently white row
//! `i`, rewrites column `j` to `Star` at `i` and `Zero` at the other white rows
//! (entries at black rows are kept), and commits the choice with the lowest
//! cost. A rewritten column is never touched again. The loop ends when no row
//! is white (success) or every column has been used (failure).

use crate::controllability::{CostBreakdown, Evaluator};
use crate::error::{Error, Result};
use crate::pattern::{PatternEntry, PatternMatrix, StructuredSystem};
use crate::rowset::RowSet;
use crate::solution::ModificationResult;

/// One committed greedy iteration. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GreedyRecord {
    pub iteration: usize,
    pub row: usize,
    pub column: usize,
    pub cost: CostBreakdown,
}

#[derive(Clone, Debug)]
pub struct GreedyState {
    pub b: PatternMatrix,
    /// Columns still identical to the original input pattern, ascending.
    pub remaining_columns: Vec<usize>,
    /// Rows white in at least one of the two augmented matrices.
    pub white: RowSet,
    pub history: Vec<GreedyRecord>,
}

impl GreedyState {
    pub fn initial(ev: &Evaluator) -> Self {
        let b = ev.system().b_bar().clone();
        let white = ev.verdict(&b).white_union();
        GreedyState {
            remaining_columns: (0..b.cols()).collect(),
            b,
            white,
            history: Vec::new(),
        }
    }

    pub fn is_done(&self) -> bool {
        self.white.is_empty() || self.remaining_columns.is_empty()
    }
}

/// Best single-column rewrite from a state.
#[derive(Clone, Debug)]
pub struct GreedyChoice {
    pub row: usize,
    pub column: usize,
    pub b: PatternMatrix,
    pub cost: CostBreakdown,
}

fn rewrite_column(b: &mut PatternMatrix, white: RowSet, row: usize, column: usize) {
    for r in white.iter() {
        let e = if r == row { PatternEntry::Star } else { PatternEntry::Zero };
        b.set(r, column, e);
    }
}

/// Evaluates every `(white row, remaining column)` rewrite and returns the
/// cheapest, breaking ties by smallest column, then smallest row.
pub fn greedy_step(ev: &Evaluator, state: &GreedyState) -> Result<GreedyChoice> {
    if state.white.is_empty() || state.remaining_columns.is_empty() {
        return Err(Error::State(
            "greedy step needs a white row and an unused column".into(),
        ));
    }
    let mut best: Option<GreedyChoice> = None;
    let mut candidate = state.b.clone();
    for &column in &state.remaining_columns {
        for row in state.white.iter() {
            rewrite_column(&mut candidate, state.white, row, column);
            let cost = ev.cost(&candidate);
            if best.as_ref().map_or(true, |b| cost.total < b.cost.total) {
                best = Some(GreedyChoice {
                    row,
                    column,
                    b: candidate.clone(),
                    cost,
                });
            }
        }
        // restore the column before moving on
        for r in state.white.iter() {
            candidate.set(r, column, state.b.get(r, column));
        }
    }
    Ok(best.expect("non-empty candidate set"))
}

#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub result: ModificationResult,
    pub history: Vec<GreedyRecord>,
}

pub fn greedy_modify(sys: &StructuredSystem, epsilon: u64) -> Result<GreedyOutcome> {
    let ev = Evaluator::new(sys, epsilon)?;
    Ok(greedy_with(&ev))
}

pub fn greedy_with(ev: &Evaluator) -> GreedyOutcome {
    let mut state = GreedyState::initial(ev);
    while !state.is_done() {
        let choice = greedy_step(ev, &state).expect("loop guard checked");
        state.b = choice.b;
        state.remaining_columns.retain(|&j| j != choice.column);
        state.white = ev.verdict(&state.b).white_union();
        state.history.push(GreedyRecord {
            iteration: state.history.len() + 1,
            row: choice.row,
            column: choice.column,
            cost: choice.cost,
        });
    }
    GreedyOutcome {
        result: ModificationResult::evaluate(ev, state.b),
        history: state.history,
    }
}
