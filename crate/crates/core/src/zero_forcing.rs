//! The color change rule, pattern full-row-rank test and zero forcing sets.
//!
//! Rows start white except for an initially black set. In every sweep a white
//! row `i` turns black if some column has `Star` at row `i` and `Zero` at every
//! other white row. All forces of a sweep are collected before the white set
//! is updated, so the fixed point does not depend on the column order; the
//! trace lists forces in ascending (column, row) order within each sweep.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::pattern::{PatternEntry, PatternMatrix};
use crate::rowset::RowSet;

/// Default row cap for exhaustive zero forcing searches.
pub const ZERO_FORCING_CAP: usize = 20;

/// One color change: `row` turned black because of `column`. 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Force {
    pub row: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColorChangeResult {
    pub white: RowSet,
    pub trace: Vec<Force>,
}

impl ColorChangeResult {
    pub fn forced(&self) -> RowSet {
        self.trace.iter().map(|f| f.row).collect()
    }
}

/// White set of the column-wise concatenation of `blocks`, starting from
/// `white`. No trace is kept.
pub(crate) fn white_set_of(blocks: &[&PatternMatrix], mut white: RowSet) -> RowSet {
    loop {
        let mut del = 0u64;
        for block in blocks {
            for (star, nonzero) in block.column_masks() {
                let x = nonzero.bits() & white.bits();
                if x != 0 && x & (x - 1) == 0 && x & star.bits() != 0 {
                    del |= x;
                }
            }
        }
        if del == 0 {
            return white;
        }
        white = white.difference(RowSet::from_bits(del));
    }
}

fn check_rows(p: usize, set: RowSet) -> Result<()> {
    if !set.is_subset(RowSet::full(p)) {
        return Err(Error::Parameter(format!(
            "row set {set} out of range for {p} rows"
        )));
    }
    Ok(())
}

/// Runs the color change rule on `m` with `initially_black` rows already black.
pub fn color_change(m: &PatternMatrix, initially_black: RowSet) -> Result<ColorChangeResult> {
    let p = m.rows();
    check_rows(p, initially_black)?;
    let mut white = RowSet::full(p).difference(initially_black);
    let mut trace = Vec::new();
    loop {
        let mut del = RowSet::empty();
        for j in 0..m.cols() {
            let x = m.nonzero_rows(j).intersection(white);
            if x.len() == 1 && x.is_subset(m.star_rows(j)) {
                let row = x.iter().next().unwrap();
                if !del.contains(row) {
                    trace.push(Force { row, column: j });
                    del.insert(row);
                }
            }
        }
        if del.is_empty() {
            break;
        }
        white = white.difference(del);
    }
    Ok(ColorChangeResult { white, trace })
}

/// Pattern full row rank: every realization has full row rank.
pub fn is_full_row_rank(m: &PatternMatrix) -> bool {
    white_set_of(&[m], RowSet::full(m.rows())).is_empty()
}

pub fn is_zero_forcing_set(m: &PatternMatrix, v0: RowSet) -> Result<bool> {
    check_rows(m.rows(), v0)?;
    Ok(white_set_of(&[m], RowSet::full(m.rows()).difference(v0)).is_empty())
}

/// Minimum zero forcing set size together with the lexicographically
/// smallest witness of that size.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZeroForcing {
    pub number: usize,
    pub witness: RowSet,
}

fn min_common_forcing_set(mats: &[&PatternMatrix], cap: usize) -> Result<ZeroForcing> {
    let p = mats[0].rows();
    if p > cap {
        return Err(Error::Capacity(format!(
            "exhaustive zero forcing search is capped at {cap} rows, got {p}"
        )));
    }
    let all = RowSet::full(p);
    for k in 0..=p {
        for combo in (0..p).combinations(k) {
            let v: RowSet = combo.into_iter().collect();
            let white = all.difference(v);
            if mats.iter().all(|m| white_set_of(&[m], white).is_empty()) {
                return Ok(ZeroForcing { number: k, witness: v });
            }
        }
    }
    unreachable!("the full row set always forces")
}

pub fn zero_forcing_number(m: &PatternMatrix) -> Result<ZeroForcing> {
    zero_forcing_number_capped(m, ZERO_FORCING_CAP)
}

pub fn zero_forcing_number_capped(m: &PatternMatrix, cap: usize) -> Result<ZeroForcing> {
    min_common_forcing_set(&[m], cap)
}

/// Smallest set that is a zero forcing set of both `a` and `qa`.
pub fn joint_zero_forcing_number(a: &PatternMatrix, qa: &PatternMatrix) -> Result<ZeroForcing> {
    if !a.is_square() || a.rows() != qa.rows() || a.cols() != qa.cols() {
        return Err(Error::Dimension(format!(
            "joint zero forcing needs equal square matrices, got {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            qa.rows(),
            qa.cols()
        )));
    }
    min_common_forcing_set(&[a, qa], ZERO_FORCING_CAP)
}

/// `n × |v|` input pattern whose k-th column has `Star` at the k-th smallest
/// member of `v`.
pub fn diagonal_witness(v: RowSet, n: usize) -> Result<PatternMatrix> {
    check_rows(n, v)?;
    if v.is_empty() {
        return Err(Error::Parameter(
            "diagonal witness of an empty row set has no columns".into(),
        ));
    }
    let mut b = PatternMatrix::zeros(n, v.len())?;
    for (k, i) in v.iter().enumerate() {
        b.set(i, k, PatternEntry::Star);
    }
    Ok(b)
}

/// Pads `b` on the right with all-`Zero` columns up to `m` columns.
pub fn pad_columns(b: &PatternMatrix, m: usize) -> Result<PatternMatrix> {
    if m < b.cols() {
        return Err(Error::Dimension(format!(
            "cannot pad {} columns down to {m}",
            b.cols()
        )));
    }
    if m == b.cols() {
        return Ok(b.clone());
    }
    crate::pattern::hstack(b, &PatternMatrix::zeros(b.rows(), m - b.cols())?)
}
