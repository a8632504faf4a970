use crate::controllability::{CostBreakdown, Evaluator, SscVerdict};
use crate::pattern::PatternMatrix;

/// A candidate input pattern together with its cost and verdict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModificationResult {
    pub b: PatternMatrix,
    pub cost: CostBreakdown,
    pub verdict: SscVerdict,
}

impl ModificationResult {
    pub fn evaluate(ev: &Evaluator, b: PatternMatrix) -> Self {
        let verdict = ev.verdict(&b);
        let cost = ev.cost(&b);
        ModificationResult { b, cost, verdict }
    }

    pub fn is_controllable(&self) -> bool {
        self.verdict.controllable
    }

    /// No controllable pattern was found: the cost still carries an `ε` penalty.
    pub fn is_infeasible(&self) -> bool {
        self.cost.total >= self.cost.epsilon
    }
}
