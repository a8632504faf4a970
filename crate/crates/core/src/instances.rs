//! Instance generators: the adversarial family on which the greedy heuristic
//! is far from optimal, and Erdős–Rényi style random patterns.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pattern::{PatternEntry, PatternMatrix, StructuredSystem};

#[derive(Clone, Debug, PartialEq)]
pub enum InstanceKind {
    ErdosRenyi,
    WorstCase,
    FromFile(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub kind: InstanceKind,
    pub n: usize,
    pub m: usize,
    pub p_star: f64,
    pub p_any: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn erdos_renyi(n: usize, m: usize, p_star: f64, p_any: f64, seed: u64) -> Self {
        InstanceSpec {
            kind: InstanceKind::ErdosRenyi,
            n,
            m,
            p_star,
            p_any,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_star", self.p_star), ("p_any", self.p_any)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        Ok(())
    }

    /// Builds the system described by this spec. Random kinds draw from a
    /// ChaCha stream seeded with `seed`.
    pub fn generate(&self) -> Result<StructuredSystem> {
        match &self.kind {
            InstanceKind::ErdosRenyi => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                erdos_renyi_instance(self, &mut rng)
            }
            InstanceKind::WorstCase => worst_case_instance(self.n),
            InstanceKind::FromFile(path) => {
                let text = std::fs::read_to_string(path)?;
                text.parse()
            }
        }
    }
}

/// Adversarial family for the greedy heuristic (`n ≥ 6`, `B̄ = 0`, `m = n`).
///
/// `Ā` has an all-`Any` diagonal, `Zero` between rows/columns at distance more
/// than one inside the blocks `{1..n-3}` and `{n-2..n}`, and `Star` everywhere
/// else.
pub fn worst_case_instance(n: usize) -> Result<StructuredSystem> {
    if n < 6 {
        return Err(Error::Parameter(format!(
            "the worst-case construction needs n >= 6, got {n}"
        )));
    }
    let mut a = PatternMatrix::filled(n, n, PatternEntry::Star)?;
    // 1-based block membership
    let block = |i: usize| if i <= n - 3 { 0 } else { 1 };
    for i in 1..=n {
        for j in 1..=n {
            let e = if i == j {
                PatternEntry::Any
            } else if block(i) == block(j) && i.abs_diff(j) > 1 {
                PatternEntry::Zero
            } else {
                PatternEntry::Star
            };
            a.set(i - 1, j - 1, e);
        }
    }
    StructuredSystem::new(a, PatternMatrix::zeros(n, n)?)
}

/// Random structured system: every cell of `Ā` (n×n, diagonal included) and
/// `B̄` (n×m) is `Any` with probability `p_any`, otherwise `Star` with
/// probability `p_star`, otherwise `Zero`.
pub fn erdos_renyi_instance<R: Rng + ?Sized>(spec: &InstanceSpec, rng: &mut R) -> Result<StructuredSystem> {
    spec.validate()?;
    let mut draw = |rows: usize, cols: usize| -> Result<PatternMatrix> {
        let entries = (0..rows * cols)
            .map(|_| {
                if rng.gen_bool(spec.p_any) {
                    PatternEntry::Any
                } else if rng.gen_bool(spec.p_star) {
                    PatternEntry::Star
                } else {
                    PatternEntry::Zero
                }
            })
            .collect();
        PatternMatrix::new(rows, cols, entries)
    };
    let a = draw(spec.n, spec.n)?;
    let b = draw(spec.n, spec.m)?;
    StructuredSystem::new(a, b)
}
