//! Ground truth for small instances: exhaustive search over the feasible set
//! and a numerical Kalman rank test on realizations.

use nalgebra::DMatrix;

use crate::controllability::Evaluator;
use crate::error::{Error, Result};
use crate::pattern::{PatternEntry, PatternMatrix, StructuredSystem};
use crate::realization::{numerical_rank, RealMatrix};

/// Largest feasible set the exhaustive search will enumerate.
pub const BRUTE_FORCE_CAP: u64 = 1 << 24;

/// At most this many optimal witnesses are kept; the count stays exact.
pub const WITNESS_CAP: usize = 100;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub optimal_cost: u64,
    /// Number of minimizers over the feasible set.
    pub optimizer_count: u64,
    /// First minimizers in enumeration order.
    pub witnesses: Vec<PatternMatrix>,
    /// Size of the feasible set.
    pub feasible_count: u64,
    pub epsilon: u64,
}

impl OracleResult {
    pub fn is_feasible(&self) -> bool {
        self.optimal_cost < self.epsilon
    }
}

/// Size of the feasible set for `b_bar`: two choices per non-`Any` cell, three
/// per `Any` cell. `None` on overflow.
pub fn feasible_set_size(b_bar: &PatternMatrix) -> Option<u64> {
    let k = b_bar.count(PatternEntry::Any) as u32;
    let free = (b_bar.rows() * b_bar.cols()) as u32 - k;
    2u64.checked_pow(free)?.checked_mul(3u64.checked_pow(k)?)
}

/// The values a feasible cell may take, in enumeration order.
pub(crate) fn cell_options(bar: PatternEntry) -> &'static [PatternEntry] {
    use PatternEntry::*;
    if bar == Any {
        &[Zero, Star, Any]
    } else {
        &[Zero, Star]
    }
}

/// Visits every member of the feasible set in lexicographic row-major order
/// (`Zero < Star < Any`, last cell fastest).
pub fn for_each_feasible<F: FnMut(&PatternMatrix)>(b_bar: &PatternMatrix, mut visit: F) -> Result<u64> {
    let size = feasible_set_size(b_bar)
        .filter(|&s| s <= BRUTE_FORCE_CAP)
        .ok_or_else(|| {
            Error::Capacity(format!(
                "feasible set of a {}x{} input pattern with {} Any cells exceeds {BRUTE_FORCE_CAP}",
                b_bar.rows(),
                b_bar.cols(),
                b_bar.count(PatternEntry::Any)
            ))
        })?;
    let (rows, cols) = (b_bar.rows(), b_bar.cols());
    let options: Vec<&[PatternEntry]> = b_bar.entries().iter().map(|&e| cell_options(e)).collect();
    let mut digits = vec![0usize; rows * cols];
    let mut b = PatternMatrix::zeros(rows, cols)?;
    loop {
        visit(&b);
        // odometer increment from the last cell
        let mut k = digits.len();
        loop {
            if k == 0 {
                return Ok(size);
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < options[k].len() {
                b.set(k / cols, k % cols, options[k][digits[k]]);
                break;
            }
            digits[k] = 0;
            b.set(k / cols, k % cols, options[k][0]);
        }
    }
}

/// Exact minimum of the penalized cost over the feasible set.
pub fn brute_force_optimal(sys: &StructuredSystem, epsilon: u64) -> Result<OracleResult> {
    let ev = Evaluator::new(sys, epsilon)?;
    let mut best = u64::MAX;
    let mut count = 0u64;
    let mut witnesses = Vec::new();
    let feasible_count = for_each_feasible(sys.b_bar(), |b| {
        let c = ev.cost(b).total;
        if c < best {
            best = c;
            count = 0;
            witnesses.clear();
        }
        if c == best {
            count += 1;
            if witnesses.len() < WITNESS_CAP {
                witnesses.push(b.clone());
            }
        }
    })?;
    Ok(OracleResult {
        optimal_cost: best,
        optimizer_count: count,
        witnesses,
        feasible_count,
        epsilon,
    })
}

/// Controllability matrix `[B, AB, ..., A^{n-1}B]`.
pub fn controllability_matrix(a: &RealMatrix, b: &RealMatrix) -> Result<DMatrix<f64>> {
    let n = a.rows();
    if a.cols() != n || b.rows() != n {
        return Err(Error::Dimension(format!(
            "need square A and B with matching rows, got A {}x{} and B {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    let m = b.cols();
    let mut out = DMatrix::zeros(n, n * m);
    let mut block = b.as_matrix().clone();
    for k in 0..n {
        out.columns_mut(k * m, m).copy_from(&block);
        block = a.as_matrix() * &block;
    }
    Ok(out)
}

/// Numerical Kalman test: the controllability matrix has `n` singular values
/// above `tol` times the largest one.
pub fn kalman_controllable(a: &RealMatrix, b: &RealMatrix, tol: f64) -> Result<bool> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Parameter(format!("relative tolerance must lie in (0, 1), got {tol}")));
    }
    let c = controllability_matrix(a, b)?;
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("controllability matrix overflowed".into()));
    }
    Ok(numerical_rank(&c, tol) == a.rows())
}
