//! Cesaro means of partial-sum grids and the strong (squared-deviation)
//! summability functionals built on top of them.
//!
//! Everything here is an O(rows * cols) prefix-sum pass; squared deviations
//! are accumulated with compensation because the interesting values decay
//! toward zero.

use crate::double_series::PartialSumGrid;
use crate::error::{Error, Result};
use crate::kahan::CompensatedSum;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Grid of arithmetic means `sigma_{M,N} = (1/(MN)) sum_{m<=M} sum_{n<=N} s_{m,n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CesaroGrid {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl CesaroGrid {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// `sigma_{m,n}` with 1-based indices; `m = 0` or `n = 0` reads as 0.
    pub fn value(&self, m: usize, n: usize) -> f64 {
        if m == 0 || n == 0 {
            return 0.0;
        }
        assert!(m <= self.rows && n <= self.cols, "index ({m},{n}) out of range");
        self.values[(m - 1) * self.cols + (n - 1)]
    }
}

/// Full grid of (C,1,1) means of the partial sums, one compensated
/// prefix-sum pass.
pub fn cesaro_means(s: &PartialSumGrid) -> CesaroGrid {
    let (rows, cols) = s.dims();
    let mut col_acc: Vec<CompensatedSum> = vec![CompensatedSum::new(); cols];
    let mut values = vec![0.0; rows * cols];
    for m in 1..=rows {
        let mut row_acc = CompensatedSum::new();
        for n in 1..=cols {
            col_acc[n - 1].add(s.value(m, n));
            row_acc.add(col_acc[n - 1].value());
            values[(m - 1) * cols + (n - 1)] = row_acc.value() / (m * n) as f64;
        }
    }
    CesaroGrid { values, rows, cols }
}

/// (C,1) means of a single sequence of partial sums: every prefix average.
pub fn single_cesaro_means(s: &[f64]) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Err(Error::InvalidDimension(
            "single Cesaro means need a non-empty sequence".into(),
        ));
    }
    let mut acc = CompensatedSum::new();
    Ok(s.iter()
        .enumerate()
        .map(|(i, &v)| {
            acc.add(v);
            acc.value() / (i + 1) as f64
        })
        .collect())
}

/// Prefix averages along a strictly increasing subsequence `v` of 1-based
/// indices into `s`: the M'-th output is `(1/M') sum_{m<=M'} s_{v_m}`.
pub fn subsequence_means(s: &[f64], v: &[usize]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::InvalidSubsequence("empty index sequence".into()));
    }
    let mut prev = 0usize;
    for &idx in v {
        if idx <= prev {
            return Err(Error::InvalidSubsequence(format!(
                "indices must be strictly increasing, got {idx} after {prev}"
            )));
        }
        if idx > s.len() {
            return Err(Error::InvalidSubsequence(format!(
                "index {idx} exceeds sequence length {}",
                s.len()
            )));
        }
        prev = idx;
    }
    let picked: Vec<f64> = v.iter().map(|&idx| s[idx - 1]).collect();
    single_cesaro_means(&picked)
}

/// Which deviation the strong functional averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    /// Deviations of partial sums from their Cesaro means.
    VsSigma,
    /// Deviations of partial sums from a fixed limit value.
    VsLimit,
}

/// Table of averaged squared deviations
/// `T_{M,N} = (1/(MN)) sum_{m<=M} sum_{n<=N} d_{m,n}^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongCesaroSeries {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    kind: DeviationKind,
}

impl StrongCesaroSeries {
    fn from_deviations<F>(rows: usize, cols: usize, kind: DeviationKind, d: F) -> Self
    where
        F: Fn(usize, usize) -> f64,
    {
        let mut col_acc: Vec<CompensatedSum> = vec![CompensatedSum::new(); cols];
        let mut values = vec![0.0; rows * cols];
        for m in 1..=rows {
            let mut row_acc = CompensatedSum::new();
            for n in 1..=cols {
                let dev = d(m, n);
                col_acc[n - 1].add(dev * dev);
                row_acc.add(col_acc[n - 1].value());
                values[(m - 1) * cols + (n - 1)] = row_acc.value() / (m * n) as f64;
            }
        }
        Self { values, rows, cols, kind }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kind(&self) -> DeviationKind {
        self.kind
    }

    /// `T_{m,n}` with 1-based indices.
    pub fn value(&self, m: usize, n: usize) -> f64 {
        assert!(
            (1..=self.rows).contains(&m) && (1..=self.cols).contains(&n),
            "index ({m},{n}) out of range"
        );
        self.values[(m - 1) * self.cols + (n - 1)]
    }

    /// CSV rows `(M, N, T)` with a header line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "m,n,t")?;
        for m in 1..=self.rows {
            for n in 1..=self.cols {
                writeln!(w, "{},{},{}", m, n, self.value(m, n))?;
            }
        }
        Ok(())
    }
}

/// Strong functional with deviations `s_{m,n} - sigma_{m,n}`.
pub fn strong_deviation_vs_sigma(
    s: &PartialSumGrid,
    sigma: &CesaroGrid,
) -> Result<StrongCesaroSeries> {
    if s.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "partial sums are {:?} but Cesaro means are {:?}",
            s.dims(),
            sigma.dims()
        )));
    }
    let (rows, cols) = s.dims();
    Ok(StrongCesaroSeries::from_deviations(
        rows,
        cols,
        DeviationKind::VsSigma,
        |m, n| s.value(m, n) - sigma.value(m, n),
    ))
}

/// Strong functional with deviations `s_{m,n} - g` for a fixed limit value.
pub fn strong_deviation_vs_limit(s: &PartialSumGrid, g_value: f64) -> StrongCesaroSeries {
    let (rows, cols) = s.dims();
    StrongCesaroSeries::from_deviations(rows, cols, DeviationKind::VsLimit, |m, n| {
        s.value(m, n) - g_value
    })
}

/// Both sides of the mean-vs-root-mean-square comparison over the
/// `(1..=m) x (1..=n)` deviation box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CauchyBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compare the average absolute deviation `(1/mn) sum |s - g|` against the
/// root of the averaged squared deviations. The Cauchy-Schwarz inequality
/// makes `lhs <= rhs` an identity-level fact; `holds` allows 1e-12 slack
/// for rounding.
pub fn cauchy_bound_check(
    s: &PartialSumGrid,
    g_value: f64,
    m: usize,
    n: usize,
) -> Result<CauchyBound> {
    let (rows, cols) = s.dims();
    if m == 0 || n == 0 || m > rows || n > cols {
        return Err(Error::IndexOutOfRange(format!(
            "({m},{n}) not within the {rows}x{cols} grid"
        )));
    }
    let mut abs_acc = CompensatedSum::new();
    let mut sq_acc = CompensatedSum::new();
    for mm in 1..=m {
        for nn in 1..=n {
            let d = s.value(mm, nn) - g_value;
            abs_acc.add(d.abs());
            sq_acc.add(d * d);
        }
    }
    let count = (m * n) as f64;
    let lhs = abs_acc.value() / count;
    let rhs = (sq_acc.value() / count).sqrt();
    Ok(CauchyBound {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::double_series::PartialSumGrid;

    fn grid_from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> PartialSumGrid {
        let mut values = Vec::with_capacity(rows * cols);
        for m in 1..=rows {
            for n in 1..=cols {
                values.push(f(m, n));
            }
        }
        PartialSumGrid::from_values(rows, cols, values).unwrap()
    }

    /// Quadruple-loop oracle for the (C,1,1) mean.
    fn naive_cesaro(s: &PartialSumGrid, m: usize, n: usize) -> f64 {
        let mut acc = 0.0;
        for mm in 1..=m {
            for nn in 1..=n {
                acc += s.value(mm, nn);
            }
        }
        acc / (m * n) as f64
    }

    #[test]
    fn mean_of_constant_grid_is_the_constant() {
        let s = grid_from_fn(5, 7, |_, _| 3.25);
        let sigma = cesaro_means(&s);
        for m in 1..=5 {
            for n in 1..=7 {
                assert!((sigma.value(m, n) - 3.25).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mean_of_m_plus_n_has_closed_form() {
        let s = grid_from_fn(8, 8, |m, n| (m + n) as f64);
        let sigma = cesaro_means(&s);
        for m in 1..=8 {
            for n in 1..=8 {
                let expected = (m + 1) as f64 / 2.0 + (n + 1) as f64 / 2.0;
                assert!((sigma.value(m, n) - expected).abs() < 1e-12);
                assert!((naive_cesaro(&s, m, n) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn corner_mean_equals_first_partial_sum() {
        let s = grid_from_fn(3, 3, |m, n| (m * 10 + n) as f64);
        let sigma = cesaro_means(&s);
        assert_eq!(sigma.value(1, 1), s.value(1, 1));
    }

    #[test]
    fn recovery_identity_reconstructs_partial_sums() {
        let s = grid_from_fn(9, 6, |m, n| ((m * 7 + n * 13) % 11) as f64 - 5.0);
        let sigma = cesaro_means(&s);
        for m in 1..=9 {
            for n in 1..=6 {
                let recovered = (m * n) as f64 * sigma.value(m, n)
                    - ((m - 1) * n) as f64 * sigma.value(m - 1, n)
                    - (m * (n - 1)) as f64 * sigma.value(m, n - 1)
                    + ((m - 1) * (n - 1)) as f64 * sigma.value(m - 1, n - 1);
                let target = s.value(m, n);
                assert!(
                    (recovered - target).abs() <= 1e-12 * target.abs().max(1.0),
                    "({m},{n}): {recovered} vs {target}"
                );
            }
        }
    }

    #[test]
    fn single_means_of_ones_are_one() {
        let sigma = single_cesaro_means(&[1.0; 10]).unwrap();
        assert!(sigma.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn single_means_of_alternating_signs_cancel_pairwise() {
        let s: Vec<f64> = (1..=101).map(|m| if m % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let sigma = single_cesaro_means(&s).unwrap();
        for (i, &v) in sigma.iter().enumerate() {
            let m = i + 1;
            let expected = if m % 2 == 0 { 0.0 } else { -1.0 / m as f64 };
            assert!((v - expected).abs() < 1e-15, "m={m}: {v}");
        }
    }

    #[test]
    fn single_means_of_singleton_is_identity() {
        assert_eq!(single_cesaro_means(&[3.0]).unwrap(), vec![3.0]);
        assert!(single_cesaro_means(&[]).is_err());
    }

    #[test]
    fn identity_subsequence_reduces_to_plain_means() {
        let s: Vec<f64> = (1..=12).map(|m| (m as f64).sin()).collect();
        let v: Vec<usize> = (1..=12).collect();
        assert_eq!(
            subsequence_means(&s, &v).unwrap(),
            single_cesaro_means(&s).unwrap()
        );
    }

    #[test]
    fn odd_index_subsequence_means_match_arithmetic() {
        let s: Vec<f64> = (1..=5).map(|m| m as f64).collect();
        let means = subsequence_means(&s, &[1, 3, 5]).unwrap();
        assert_eq!(means, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn singleton_subsequence_picks_one_value() {
        let s = [5.0, -2.0, 7.0];
        assert_eq!(subsequence_means(&s, &[2]).unwrap(), vec![-2.0]);
    }

    #[test]
    fn bad_subsequences_are_rejected() {
        let s = [1.0, 2.0, 3.0];
        assert!(subsequence_means(&s, &[2, 2]).is_err());
        assert!(subsequence_means(&s, &[3, 1]).is_err());
        assert!(subsequence_means(&s, &[1, 4]).is_err());
        assert!(subsequence_means(&s, &[]).is_err());
    }

    #[test]
    fn constant_partial_sums_have_zero_strong_deviation() {
        // A single leading coefficient makes every partial sum equal, so the
        // means coincide with the sums and all deviations vanish.
        let s = grid_from_fn(6, 6, |_, _| 2.5);
        let sigma = cesaro_means(&s);
        let t = strong_deviation_vs_sigma(&s, &sigma).unwrap();
        for m in 1..=6 {
            for n in 1..=6 {
                assert_eq!(t.value(m, n), 0.0);
            }
        }
        assert_eq!(t.kind(), DeviationKind::VsSigma);
    }

    #[test]
    fn strong_functional_matches_brute_force() {
        let s = grid_from_fn(5, 4, |m, n| ((m * 3 + n * 5) % 7) as f64 - 3.0);
        let sigma = cesaro_means(&s);
        let t = strong_deviation_vs_sigma(&s, &sigma).unwrap();
        for m in 1..=5 {
            for n in 1..=4 {
                let mut acc = 0.0;
                for mm in 1..=m {
                    for nn in 1..=n {
                        let d = s.value(mm, nn) - sigma.value(mm, nn);
                        acc += d * d;
                    }
                }
                let oracle = acc / (m * n) as f64;
                assert!((t.value(m, n) - oracle).abs() <= 1e-12 * oracle.max(1.0));
                assert!(t.value(m, n) >= 0.0);
            }
        }
    }

    #[test]
    fn vs_limit_vanishes_when_sums_equal_the_limit() {
        let s = grid_from_fn(4, 4, |_, _| -1.5);
        let t = strong_deviation_vs_limit(&s, -1.5);
        for m in 1..=4 {
            for n in 1..=4 {
                assert_eq!(t.value(m, n), 0.0);
            }
        }
        assert_eq!(t.kind(), DeviationKind::VsLimit);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let s = grid_from_fn(3, 3, |m, n| (m + n) as f64);
        let sigma = cesaro_means(&grid_from_fn(3, 4, |m, n| (m + n) as f64));
        assert!(matches!(
            strong_deviation_vs_sigma(&s, &sigma),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn equal_magnitude_deviations_hit_cauchy_equality() {
        let s = grid_from_fn(4, 4, |m, n| if (m + n) % 2 == 0 { 1.0 } else { -1.0 });
        let bound = cauchy_bound_check(&s, 0.0, 4, 4).unwrap();
        assert!((bound.lhs - bound.rhs).abs() < 1e-15);
        assert!(bound.holds);
    }

    #[test]
    fn zero_deviations_give_zero_bound() {
        let s = grid_from_fn(3, 5, |_, _| 0.75);
        let bound = cauchy_bound_check(&s, 0.75, 3, 5).unwrap();
        assert_eq!(bound.lhs, 0.0);
        assert_eq!(bound.rhs, 0.0);
        assert!(bound.holds);
    }

    #[test]
    fn cauchy_bound_validates_indices() {
        let s = grid_from_fn(3, 3, |_, _| 1.0);
        assert!(cauchy_bound_check(&s, 0.0, 0, 2).is_err());
        assert!(cauchy_bound_check(&s, 0.0, 4, 2).is_err());
    }

    #[test]
    fn csv_output_has_header_and_one_row_per_cell() {
        let s = grid_from_fn(2, 3, |m, n| (m * n) as f64);
        let t = strong_deviation_vs_limit(&s, 0.0);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + 2 * 3);
        assert_eq!(lines[0], "m,n,t");
    }
}
