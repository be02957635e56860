//! Double sequences, rectangular partial sums, and finite-budget detectors
//! for the three convergence notions of double series: Pringsheim, regular
//! (Pringsheim plus every row and column series), and absolute.
//!
//! All detectors work on a truncated index square and report `Undetermined`
//! when the budget is too small to witness either stability or escape; they
//! never assert divergence without an escape witness.

use crate::error::{Error, Result};
use crate::kahan::CompensatedSum;
use serde::{Deserialize, Serialize};

/// Default escape bound: partial sums beyond this magnitude are reported
/// as diverged. Far above any magnitude the test corpus produces.
pub const ESCAPE_BOUND: f64 = 1e12;

/// Relative tail-growth threshold for the absolute-convergence doubling rule.
pub const STABILITY_RATIO: f64 = 0.01;

/// A total, deterministic double sequence `u_{j,k}` over `j, k >= 1`.
///
/// The wrapped generator must be pure: repeated evaluation at the same
/// index pair must return bit-identical values.
pub struct DoubleSequence {
    generator: Box<dyn Fn(usize, usize) -> f64 + Send + Sync>,
}

impl DoubleSequence {
    pub fn new<F>(generator: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            generator: Box::new(generator),
        }
    }

    /// Term `u_{j,k}`; indices are 1-based.
    pub fn term(&self, j: usize, k: usize) -> f64 {
        debug_assert!(j >= 1 && k >= 1, "DoubleSequence indices are 1-based");
        (self.generator)(j, k)
    }
}

impl std::fmt::Debug for DoubleSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("DoubleSequence(..)")
    }
}

/// Table of rectangular partial sums `S_{m,n} = sum_{j<=m} sum_{k<=n} u_{j,k}`,
/// stored row-major with 1-based accessors. Out-of-range indices (m or n = 0)
/// read as zero so the two-dimensional prefix identity holds on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialSumGrid {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl PartialSumGrid {
    /// Build the grid from a term generator in one O(rows * cols) pass.
    pub fn from_term_fn<F>(rows: usize, cols: usize, term: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> f64,
    {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "partial sum grid needs positive dims, got {rows}x{cols}"
            )));
        }
        let mut values = vec![0.0; rows * cols];
        for m in 1..=rows {
            for n in 1..=cols {
                let above = if m > 1 { values[(m - 2) * cols + (n - 1)] } else { 0.0 };
                let left = if n > 1 { values[(m - 1) * cols + (n - 2)] } else { 0.0 };
                let diag = if m > 1 && n > 1 {
                    values[(m - 2) * cols + (n - 2)]
                } else {
                    0.0
                };
                values[(m - 1) * cols + (n - 1)] = term(m, n) + above + left - diag;
            }
        }
        Ok(Self { values, rows, cols })
    }

    /// Wrap an existing table of values `S_{m,n}` (row-major, 1-based logical
    /// indexing). Used when the entries are produced elsewhere, e.g. partial
    /// sums of a wavelet expansion evaluated at a point.
    pub fn from_values(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDimension(format!(
                "partial sum grid needs positive dims, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values for a {rows}x{cols} grid, got {}",
                rows * cols,
                values.len()
            )));
        }
        Ok(Self { values, rows, cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// `S_{m,n}` with 1-based indices; `m = 0` or `n = 0` reads as 0.
    ///
    /// Panics if an index exceeds the grid dimensions.
    pub fn value(&self, m: usize, n: usize) -> f64 {
        if m == 0 || n == 0 {
            return 0.0;
        }
        assert!(m <= self.rows && n <= self.cols, "index ({m},{n}) out of range");
        self.values[(m - 1) * self.cols + (n - 1)]
    }

    /// The deepest partial sum `S_{rows,cols}`.
    pub fn corner(&self) -> f64 {
        self.value(self.rows, self.cols)
    }

    /// Recover the underlying term via the prefix identity.
    pub fn term(&self, m: usize, n: usize) -> f64 {
        self.value(m, n) - self.value(m.wrapping_sub(1), n) - self.value(m, n.wrapping_sub(1))
            + self.value(m.wrapping_sub(1), n.wrapping_sub(1))
    }
}

/// Rectangular partial sums of `u` over the `m <= rows`, `n <= cols` box.
pub fn partial_sum_grid(u: &DoubleSequence, rows: usize, cols: usize) -> Result<PartialSumGrid> {
    PartialSumGrid::from_term_fn(rows, cols, |j, k| u.term(j, k))
}

/// Classification outcome of a finite-budget convergence check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceStatus {
    Pringsheim,
    Regular,
    Absolute,
    Diverged,
    Undetermined,
}

/// Outcome of a convergence detector, with the tolerance and index cutoff
/// that witnessed it. Serializes with keys `status`, `limit`, `epsilon`,
/// `cutoff_K`, `evidence`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub status: ConvergenceStatus,
    #[serde(rename = "limit")]
    pub limit_estimate: Option<f64>,
    pub epsilon: f64,
    #[serde(rename = "cutoff_K")]
    pub cutoff_k: usize,
    pub evidence: String,
}

impl ConvergenceReport {
    pub fn is_decided(&self) -> bool {
        self.status != ConvergenceStatus::Undetermined
    }
}

fn require_positive_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

fn require_budget(k_max: usize) -> Result<()> {
    if k_max < 2 {
        return Err(Error::InvalidArgument(format!(
            "index budget must be at least 2, got {k_max}"
        )));
    }
    Ok(())
}

/// Scan for an escape witness: the first partial sum whose magnitude
/// exceeds the bound.
fn find_escape(grid: &PartialSumGrid, bound: f64) -> Option<(usize, usize, f64)> {
    for m in 1..=grid.rows() {
        for n in 1..=grid.cols() {
            let v = grid.value(m, n);
            if v.abs() > bound {
                return Some((m, n, v));
            }
        }
    }
    None
}

/// Detect convergence in Pringsheim's sense on the `k_max x k_max` budget
/// square: the limit estimate is the corner sum, and the cutoff is the
/// smallest `K <= k_max/2` such that every partial sum with
/// `min(m,n) > K` stays within `epsilon` of it.
pub fn detect_pringsheim(
    u: &DoubleSequence,
    epsilon: f64,
    k_max: usize,
) -> Result<ConvergenceReport> {
    require_positive_epsilon(epsilon)?;
    require_budget(k_max)?;
    let grid = partial_sum_grid(u, k_max, k_max)?;
    Ok(classify_pringsheim(&grid, epsilon))
}

/// Pringsheim classification over an already computed budget square.
fn classify_pringsheim(grid: &PartialSumGrid, epsilon: f64) -> ConvergenceReport {
    let k_max = grid.rows();
    debug_assert_eq!(grid.rows(), grid.cols());

    if let Some((m, n, v)) = find_escape(grid, ESCAPE_BOUND) {
        return ConvergenceReport {
            status: ConvergenceStatus::Diverged,
            limit_estimate: None,
            epsilon,
            cutoff_k: k_max,
            evidence: format!("partial sum {v:e} at ({m},{n}) exceeds escape bound {ESCAPE_BOUND:e}"),
        };
    }

    let s = grid.corner();
    // suffix_max[m][n] = max |S_{m',n'} - s| over m' >= m, n' >= n
    let mut suffix_max = vec![0.0f64; (k_max + 1) * (k_max + 1)];
    let idx = |m: usize, n: usize| m * (k_max + 1) + n;
    for m in (1..=k_max).rev() {
        for n in (1..=k_max).rev() {
            let mut v = (grid.value(m, n) - s).abs();
            if m < k_max {
                v = v.max(suffix_max[idx(m + 1, n)]);
            }
            if n < k_max {
                v = v.max(suffix_max[idx(m, n + 1)]);
            }
            suffix_max[idx(m, n)] = v;
        }
    }

    for cutoff in 1..=(k_max / 2) {
        if suffix_max[idx(cutoff + 1, cutoff + 1)] <= epsilon {
            return ConvergenceReport {
                status: ConvergenceStatus::Pringsheim,
                limit_estimate: Some(s),
                epsilon,
                cutoff_k: cutoff,
                evidence: format!(
                    "partial sums with min(m,n) > {cutoff} stay within {epsilon:e} of corner sum at ({k_max},{k_max})"
                ),
            };
        }
    }

    let spread = suffix_max[idx(k_max / 2 + 1, k_max / 2 + 1)];
    ConvergenceReport {
        status: ConvergenceStatus::Undetermined,
        limit_estimate: None,
        epsilon,
        cutoff_k: k_max,
        evidence: format!(
            "no cutoff K <= {} stabilizes the tail within {epsilon:e} (best residual spread {spread:e}); no escape witness either",
            k_max / 2
        ),
    }
}

/// Smallest cutoff `K <= len/2` after which the partial sums spread by at
/// most `epsilon`, or None when no such cutoff exists within the budget.
fn cauchy_tail_cutoff(partials: &[f64], epsilon: f64) -> Option<usize> {
    let len = partials.len();
    if len < 2 {
        return None;
    }
    // suffix extrema over indices > K (1-based)
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    let mut spread_after = vec![0.0f64; len + 1];
    for m in (1..=len).rev() {
        hi = hi.max(partials[m - 1]);
        lo = lo.min(partials[m - 1]);
        spread_after[m - 1] = hi - lo;
    }
    (1..=len / 2).find(|&k| spread_after[k] <= epsilon)
}

/// Detect regular convergence: Pringsheim convergence plus a Cauchy tail
/// test on every row series (fixed k, summing over j) and every column
/// series (fixed j, summing over k) within the budget.
///
/// When the double sums converge in Pringsheim's sense but some row or
/// column series fails its tail test, the report keeps the Pringsheim
/// status and records the failing series in the evidence.
pub fn detect_regular(u: &DoubleSequence, epsilon: f64, k_max: usize) -> Result<ConvergenceReport> {
    require_positive_epsilon(epsilon)?;
    require_budget(k_max)?;
    let grid = partial_sum_grid(u, k_max, k_max)?;
    let base = classify_pringsheim(&grid, epsilon);
    if base.status != ConvergenceStatus::Pringsheim {
        return Ok(base);
    }

    let mut worst_cutoff = base.cutoff_k;
    // Row series: fixed k, partial sums over j. Recovered from the grid as
    // differences of adjacent columns; column series symmetrically.
    let mut partials = vec![0.0f64; k_max];
    for k in 1..=k_max {
        for m in 1..=k_max {
            partials[m - 1] = grid.value(m, k) - grid.value(m, k - 1);
        }
        match cauchy_tail_cutoff(&partials, epsilon) {
            Some(c) => worst_cutoff = worst_cutoff.max(c),
            None => {
                return Ok(ConvergenceReport {
                    evidence: format!(
                        "row series at k={k} fails the Cauchy tail test at {epsilon:e}; regular convergence not witnessed"
                    ),
                    ..base
                });
            }
        }
    }
    for j in 1..=k_max {
        for n in 1..=k_max {
            partials[n - 1] = grid.value(j, n) - grid.value(j - 1, n);
        }
        match cauchy_tail_cutoff(&partials, epsilon) {
            Some(c) => worst_cutoff = worst_cutoff.max(c),
            None => {
                return Ok(ConvergenceReport {
                    evidence: format!(
                        "column series at j={j} fails the Cauchy tail test at {epsilon:e}; regular convergence not witnessed"
                    ),
                    ..base
                });
            }
        }
    }

    Ok(ConvergenceReport {
        status: ConvergenceStatus::Regular,
        limit_estimate: base.limit_estimate,
        epsilon,
        cutoff_k: worst_cutoff,
        evidence: format!(
            "Pringsheim-stable and all {k_max} row and {k_max} column series pass the Cauchy tail test at {epsilon:e}"
        ),
    })
}

/// Detect absolute convergence by tail-doubling: the |u| sums over the
/// half-budget and full-budget squares must agree to within a relative
/// `STABILITY_RATIO`; sums exceeding `bound` are an escape witness.
///
/// The reported epsilon is the absolute stability margin
/// `STABILITY_RATIO * (full |u| sum)`, which also bounds the |u| mass in
/// the region between the two squares; the reported cutoff is the
/// half budget.
pub fn detect_absolute(u: &DoubleSequence, budget: usize, bound: f64) -> Result<ConvergenceReport> {
    if budget < 1 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    if !(bound > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "escape bound must be positive, got {bound}"
        )));
    }
    let half = (budget / 2).max(1);

    let mut acc = CompensatedSum::new();
    for j in 1..=half {
        for k in 1..=half {
            acc.add(u.term(j, k).abs());
        }
    }
    let abs_half = acc.value();

    let mut abs_full = CompensatedSum::new();
    let mut signed_full = CompensatedSum::new();
    for j in 1..=budget {
        for k in 1..=budget {
            let v = u.term(j, k);
            abs_full.add(v.abs());
            signed_full.add(v);
            if abs_full.value() > bound {
                return Ok(ConvergenceReport {
                    status: ConvergenceStatus::Diverged,
                    limit_estimate: None,
                    epsilon: STABILITY_RATIO,
                    cutoff_k: budget,
                    evidence: format!(
                        "|u| partial sum {:e} exceeds bound {bound:e} by ({j},{k})",
                        abs_full.value()
                    ),
                });
            }
        }
    }

    let full = abs_full.value();
    let tail = full - abs_half;
    let margin = (STABILITY_RATIO * full).max(f64::EPSILON);
    if tail <= margin {
        Ok(ConvergenceReport {
            status: ConvergenceStatus::Absolute,
            limit_estimate: Some(signed_full.value()),
            epsilon: margin,
            cutoff_k: half,
            evidence: format!(
                "|u| sums {abs_half:e} ({half}^2 box) and {full:e} ({budget}^2 box) agree within {margin:e}"
            ),
        })
    } else {
        Ok(ConvergenceReport {
            status: ConvergenceStatus::Undetermined,
            limit_estimate: None,
            epsilon: margin,
            cutoff_k: budget,
            evidence: format!(
                "|u| tail {tail:e} between the {half}^2 and {budget}^2 boxes exceeds the stability margin {margin:e}; no escape witness"
            ),
        })
    }
}
