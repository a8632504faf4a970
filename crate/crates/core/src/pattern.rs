//! Pattern matrices over the alphabet `{0, *, ?}` and structured systems.
//!
//! A `Zero` cell forces the real entry to be zero, a `Star` cell forces it to
//! be nonzero, and an `Any` cell leaves it unconstrained. Besides the dense
//! grid, every matrix keeps two bitmasks per column (rows holding `Star`, rows
//! holding `Star` or `Any`) which the color change rule works on directly.
//!
//! Text format: a `p q` header line, then `p` lines of `q` symbols separated by
//! single spaces. A structured system file is the state pattern followed by
//! the input pattern.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rowset::{RowSet, MAX_ROWS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternEntry {
    Zero,
    Star,
    Any,
}

impl PatternEntry {
    pub const ALL: [PatternEntry; 3] = [PatternEntry::Zero, PatternEntry::Star, PatternEntry::Any];

    pub fn symbol(self) -> char {
        match self {
            PatternEntry::Zero => '0',
            PatternEntry::Star => '*',
            PatternEntry::Any => '?',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '0' => Some(PatternEntry::Zero),
            '*' => Some(PatternEntry::Star),
            '?' => Some(PatternEntry::Any),
            _ => None,
        }
    }

    /// `Star` or `Any`: the entry may be nonzero in some realization.
    pub fn may_be_nonzero(self) -> bool {
        self != PatternEntry::Zero
    }
}

impl fmt::Display for PatternEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PatternMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<PatternEntry>,
    star_cols: Vec<RowSet>,
    nonzero_cols: Vec<RowSet>,
}

fn check_shape(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension(format!(
            "pattern matrix must be at least 1x1, got {rows}x{cols}"
        )));
    }
    if rows > MAX_ROWS {
        return Err(Error::Capacity(format!(
            "pattern matrices support at most {MAX_ROWS} rows, got {rows}"
        )));
    }
    Ok(())
}

impl PatternMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, entries: Vec<PatternEntry>) -> Result<Self> {
        check_shape(rows, cols)?;
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let mut m = PatternMatrix {
            rows,
            cols,
            entries,
            star_cols: vec![RowSet::empty(); cols],
            nonzero_cols: vec![RowSet::empty(); cols],
        };
        for j in 0..cols {
            m.rebuild_column_masks(j);
        }
        Ok(m)
    }

    pub fn filled(rows: usize, cols: usize, value: PatternEntry) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::filled(rows, cols, PatternEntry::Zero)
    }

    /// `Star` on the diagonal, `Zero` elsewhere.
    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m.set(i, i, PatternEntry::Star);
        }
        Ok(m)
    }

    /// Parses rows written as space-separated symbols, e.g. `["0 ? ?", "0 * ?"]`.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let mut entries = Vec::new();
        let mut cols = None;
        for (r, line) in rows.iter().enumerate() {
            let row = parse_row(line.as_ref(), r + 1, None)?;
            match cols {
                None => cols = Some(row.len()),
                Some(q) if q != row.len() => {
                    return Err(Error::Parse {
                        line: r + 1,
                        column: 1,
                        message: format!("expected {q} entries, found {}", row.len()),
                    })
                }
                _ => {}
            }
            entries.extend(row);
        }
        Self::new(rows.len(), cols.unwrap_or(0), entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> PatternEntry {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: PatternEntry) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of range");
        let old = std::mem::replace(&mut self.entries[i * self.cols + j], value);
        if old != value {
            let bit = RowSet::singleton(i);
            self.star_cols[j] = self.star_cols[j].difference(bit);
            self.nonzero_cols[j] = self.nonzero_cols[j].difference(bit);
            if value == PatternEntry::Star {
                self.star_cols[j] = self.star_cols[j].union(bit);
            }
            if value.may_be_nonzero() {
                self.nonzero_cols[j] = self.nonzero_cols[j].union(bit);
            }
        }
    }

    pub fn entries(&self) -> &[PatternEntry] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[PatternEntry] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Rows holding `Star` in column `j`.
    pub fn star_rows(&self, j: usize) -> RowSet {
        self.star_cols[j]
    }

    /// Rows holding `Star` or `Any` in column `j`.
    pub fn nonzero_rows(&self, j: usize) -> RowSet {
        self.nonzero_cols[j]
    }

    pub(crate) fn column_masks(&self) -> impl Iterator<Item = (RowSet, RowSet)> + '_ {
        self.star_cols.iter().copied().zip(self.nonzero_cols.iter().copied())
    }

    pub fn count(&self, value: PatternEntry) -> usize {
        self.entries.iter().filter(|&&e| e == value).count()
    }

    /// Iterator over `(i, j, entry)` in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, PatternEntry)> + '_ {
        let q = self.cols;
        self.entries.iter().enumerate().map(move |(k, &e)| (k / q, k % q, e))
    }

    fn rebuild_column_masks(&mut self, j: usize) {
        let mut star = RowSet::empty();
        let mut nonzero = RowSet::empty();
        for i in 0..self.rows {
            let e = self.entries[i * self.cols + j];
            if e == PatternEntry::Star {
                star.insert(i);
            }
            if e.may_be_nonzero() {
                nonzero.insert(i);
            }
        }
        self.star_cols[j] = star;
        self.nonzero_cols[j] = nonzero;
    }

    /// Reads one matrix from `lines`, advancing the iterator. `line_no` tracks
    /// the 1-based line number for diagnostics.
    fn parse_from<'a, I>(lines: &mut I, line_no: &mut usize) -> Result<Self>
    where
        I: Iterator<Item = &'a str>,
    {
        let header = next_line(lines, line_no)?;
        let dims: Vec<&str> = header.split(' ').collect();
        if dims.len() != 2 {
            return Err(Error::Parse {
                line: *line_no,
                column: 1,
                message: format!("expected header `p q`, found {header:?}"),
            });
        }
        let parse_dim = |s: &str, column: usize| -> Result<usize> {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: *line_no,
                column,
                message: format!("invalid dimension {s:?}"),
            })
        };
        let p = parse_dim(dims[0], 1)?;
        let q = parse_dim(dims[1], dims[0].len() + 2)?;
        if p == 0 || q == 0 {
            return Err(Error::Parse {
                line: *line_no,
                column: 1,
                message: format!("dimensions must be positive, found {p}x{q}"),
            });
        }
        let mut entries = Vec::with_capacity(p * q);
        for _ in 0..p {
            let line = next_line(lines, line_no)?;
            entries.extend(parse_row(line, *line_no, Some(q))?);
        }
        Self::new(p, q, entries)
    }
}

fn next_line<'a, I>(lines: &mut I, line_no: &mut usize) -> Result<&'a str>
where
    I: Iterator<Item = &'a str>,
{
    *line_no += 1;
    lines.next().ok_or_else(|| Error::Parse {
        line: *line_no,
        column: 1,
        message: "unexpected end of input".into(),
    })
}

fn parse_row(line: &str, line_no: usize, expected: Option<usize>) -> Result<Vec<PatternEntry>> {
    let mut out = Vec::new();
    for (k, c) in line.chars().enumerate() {
        let column = k + 1;
        if k % 2 == 1 {
            if c != ' ' {
                return Err(Error::Parse {
                    line: line_no,
                    column,
                    message: format!("expected a single space, found {c:?}"),
                });
            }
            continue;
        }
        let e = PatternEntry::from_symbol(c).ok_or_else(|| Error::Parse {
            line: line_no,
            column,
            message: format!("invalid pattern symbol {c:?}, expected one of `0`, `*`, `?`"),
        })?;
        out.push(e);
    }
    if line.is_empty() || line.ends_with(' ') {
        return Err(Error::Parse {
            line: line_no,
            column: line.chars().count().max(1),
            message: "empty row or trailing whitespace".into(),
        });
    }
    if let Some(q) = expected {
        if out.len() != q {
            return Err(Error::Parse {
                line: line_no,
                column: 1,
                message: format!("expected {q} entries, found {}", out.len()),
            });
        }
    }
    Ok(out)
}

impl fmt::Display for PatternMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for (j, e) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{e}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PatternMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PatternMatrix[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for (j, e) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{e}")?;
            }
        }
        write!(f, "]")
    }
}

fn split_lines(s: &str) -> impl Iterator<Item = &str> {
    s.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l))
}

fn expect_end<'a, I>(lines: &mut I, line_no: usize) -> Result<()>
where
    I: Iterator<Item = &'a str>,
{
    // Exactly one trailing newline is allowed, which leaves an empty final piece.
    let rest: Vec<&str> = lines.collect();
    match rest.as_slice() {
        [] | [""] => Ok(()),
        _ => Err(Error::Parse {
            line: line_no + 1,
            column: 1,
            message: "unexpected trailing content".into(),
        }),
    }
}

impl FromStr for PatternMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = split_lines(s);
        let mut line_no = 0;
        let m = Self::parse_from(&mut lines, &mut line_no)?;
        expect_end(&mut lines, line_no)?;
        Ok(m)
    }
}

/// Concatenates two matrices with equal row counts column-wise.
pub fn hstack(left: &PatternMatrix, right: &PatternMatrix) -> Result<PatternMatrix> {
    if left.rows != right.rows {
        return Err(Error::Dimension(format!(
            "hstack needs equal row counts, got {} and {}",
            left.rows, right.rows
        )));
    }
    let cols = left.cols + right.cols;
    let mut entries = Vec::with_capacity(left.rows * cols);
    for i in 0..left.rows {
        entries.extend_from_slice(left.row(i));
        entries.extend_from_slice(right.row(i));
    }
    PatternMatrix::new(left.rows, cols, entries)
}

/// Diagonal rewrite used by the second full-rank condition: off-diagonal
/// entries are kept, a `Zero` diagonal becomes `Star`, anything else `Any`.
pub fn q_transform(a: &PatternMatrix) -> Result<PatternMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "q_transform needs a square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    let mut q = a.clone();
    for i in 0..a.rows {
        let d = match a.get(i, i) {
            PatternEntry::Zero => PatternEntry::Star,
            PatternEntry::Star | PatternEntry::Any => PatternEntry::Any,
        };
        q.set(i, i, d);
    }
    Ok(q)
}

/// Number of cells where the two patterns differ.
pub fn hamming_dist(b1: &PatternMatrix, b2: &PatternMatrix) -> Result<usize> {
    if b1.rows != b2.rows || b1.cols != b2.cols {
        return Err(Error::Dimension(format!(
            "hamming_dist needs equal shapes, got {}x{} and {}x{}",
            b1.rows, b1.cols, b2.rows, b2.cols
        )));
    }
    Ok(b1.entries.iter().zip(&b2.entries).filter(|(x, y)| x != y).count())
}

/// State pattern `a_bar` (n×n) and input pattern `b_bar` (n×m).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredSystem {
    a_bar: PatternMatrix,
    b_bar: PatternMatrix,
}

impl StructuredSystem {
    pub fn new(a_bar: PatternMatrix, b_bar: PatternMatrix) -> Result<Self> {
        if !a_bar.is_square() {
            return Err(Error::Dimension(format!(
                "state pattern must be square, got {}x{}",
                a_bar.rows, a_bar.cols
            )));
        }
        if b_bar.rows != a_bar.rows {
            return Err(Error::Dimension(format!(
                "input pattern has {} rows, state pattern has {}",
                b_bar.rows, a_bar.rows
            )));
        }
        Ok(StructuredSystem { a_bar, b_bar })
    }

    pub fn a_bar(&self) -> &PatternMatrix {
        &self.a_bar
    }

    pub fn b_bar(&self) -> &PatternMatrix {
        &self.b_bar
    }

    pub fn n(&self) -> usize {
        self.a_bar.rows
    }

    pub fn m(&self) -> usize {
        self.b_bar.cols
    }

    /// Default penalty weight `nm + 1`.
    pub fn default_epsilon(&self) -> u64 {
        (self.n() * self.m()) as u64 + 1
    }
}

impl fmt::Display for StructuredSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.a_bar, self.b_bar)
    }
}

impl FromStr for StructuredSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = split_lines(s);
        let mut line_no = 0;
        let a = PatternMatrix::parse_from(&mut lines, &mut line_no)?;
        let b = PatternMatrix::parse_from(&mut lines, &mut line_no)?;
        expect_end(&mut lines, line_no)?;
        StructuredSystem::new(a, b)
    }
}
