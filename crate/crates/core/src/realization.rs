//! Real matrices drawn from a pattern class, and the membership test.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::pattern::{PatternEntry, PatternMatrix};

/// Dense real matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix(DMatrix<f64>);

impl RealMatrix {
    pub fn new(inner: DMatrix<f64>) -> Result<Self> {
        if inner.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("real matrix has non-finite entries".into()));
        }
        Ok(RealMatrix(inner))
    }

    pub fn from_row_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_row_slice(rows, cols, data))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

/// Draws one member of the pattern class of `m`.
///
/// `Star` cells get a uniform sign times a magnitude uniform in `[lo, hi]`;
/// `Any` cells are exactly zero with probability one half and otherwise drawn
/// like `Star`.
pub fn sample_realization<R: Rng + ?Sized>(
    m: &PatternMatrix,
    rng: &mut R,
    magnitude_range: (f64, f64),
) -> Result<RealMatrix> {
    let (lo, hi) = magnitude_range;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::Parameter(format!(
            "magnitude range must satisfy 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }
    let draw_nonzero = |rng: &mut R| {
        let mag = rng.gen_range(lo..=hi);
        if rng.gen_bool(0.5) {
            mag
        } else {
            -mag
        }
    };
    let mut out = DMatrix::zeros(m.rows(), m.cols());
    for (i, j, e) in m.cells() {
        out[(i, j)] = match e {
            PatternEntry::Zero => 0.0,
            PatternEntry::Star => draw_nonzero(rng),
            PatternEntry::Any => {
                if rng.gen_bool(0.5) {
                    0.0
                } else {
                    draw_nonzero(rng)
                }
            }
        };
    }
    Ok(RealMatrix(out))
}

/// True iff `real` lies in the pattern class of `pattern`.
pub fn member_check(real: &RealMatrix, pattern: &PatternMatrix) -> Result<bool> {
    if real.rows() != pattern.rows() || real.cols() != pattern.cols() {
        return Err(Error::Dimension(format!(
            "member_check needs equal shapes, got {}x{} and {}x{}",
            real.rows(),
            real.cols(),
            pattern.rows(),
            pattern.cols()
        )));
    }
    Ok(pattern.cells().all(|(i, j, e)| {
        let v = real.get(i, j);
        match e {
            PatternEntry::Zero => v == 0.0,
            PatternEntry::Star => v != 0.0,
            PatternEntry::Any => true,
        }
    }))
}

/// Numerical rank: number of singular values above `rel_tol` times the largest.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}
