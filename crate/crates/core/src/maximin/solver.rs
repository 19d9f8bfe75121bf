//! Max-min solvers for finite two-player zero-sum payoff matrices.
//!
//! The row player maximizes. [`solve_pure`] scans rows; [`solve_mixed`]
//! solves the game LP with a dense simplex tableau and then certifies the
//! answer from the final strategies alone: the row mixture guarantees
//! `lower`, the column mixture caps every row at `upper`, and the game value
//! lies in between.

use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Dense row-major payoff matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Payoff {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl Payoff {
    pub fn new(n_rows: usize, n_cols: usize, data: Vec<f64>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(Error::InvalidArgument("payoff matrix is empty".to_string()));
        }
        if data.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n_rows}x{n_cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("payoff entries must be finite".to_string()));
        }
        Ok(Self { n_rows, n_cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_cols) {
            return Err(Error::DimensionMismatch("ragged payoff rows".to_string()));
        }
        Self::new(rows.len(), n_cols, rows.concat())
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.n_cols)
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Payoff> {
        let data = self.rows().flat_map(|row| cols.iter().map(move |&j| row[j])).collect();
        Payoff::new(self.n_rows, cols.len(), data)
    }

    /// Payoff of each column against a row mixture.
    pub fn column_payoffs(&self, row_weights: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_cols];
        for (row, &w) in self.rows().zip(row_weights) {
            if w != 0.0 {
                out.iter_mut().zip(row).for_each(|(o, x)| *o += w * x);
            }
        }
        out
    }

    /// Payoff of each row against a column mixture.
    pub fn row_payoffs(&self, col_weights: &[f64]) -> Vec<f64> {
        self.rows()
            .map(|row| row.iter().zip(col_weights).map(|(x, y)| x * y).sum())
            .collect()
    }
}

/// First index of the minimum (strict comparison keeps the earliest).
pub(crate) fn first_argmin(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v < best.1 {
            best = (j, v);
        }
    }
    best
}

pub(crate) fn first_argmax(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v > best.1 {
            best = (j, v);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureSolution {
    pub row: usize,
    pub value: f64,
    pub worst_col: usize,
}

/// Lexicographically first row maximizing its row minimum.
pub fn solve_pure(g: &Payoff) -> PureSolution {
    let mut best: Option<PureSolution> = None;
    for (i, row) in g.rows().enumerate() {
        let (worst_col, value) = first_argmin(row);
        if best.is_none_or(|b| value > b.value) {
            best = Some(PureSolution {
                row: i,
                value,
                worst_col,
            });
        }
    }
    best.expect("payoff matrices are non-empty")
}

/// `min_j max_i g[i][j]`: what the column player can enforce with a pure column.
pub fn pure_upper_value(g: &Payoff) -> f64 {
    (0..g.n_cols())
        .map(|j| (0..g.n_rows()).map(|i| g.get(i, j)).fold(f64::NEG_INFINITY, f64::max))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedSolution {
    pub row_weights: Vec<f64>,
    pub col_weights: Vec<f64>,
    /// Worst-column payoff of `row_weights`; the value the mixture guarantees.
    pub lower: f64,
    /// Best-row payoff against `col_weights`.
    pub upper: f64,
    /// `upper - lower`, never negative.
    pub gap: f64,
    pub worst_col: usize,
}

const PIVOT_TOL: f64 = 1e-12;

fn clean_simplex_weights(raw: &[f64]) -> Option<Vec<f64>> {
    let mut w: Vec<f64> = raw.iter().map(|x| x.max(0.0)).collect();
    let total: f64 = w.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return None;
    }
    w.iter_mut().for_each(|x| *x /= total);
    Some(w)
}

/// Certificate of an arbitrary pair of strategies.
pub fn certify(g: &Payoff, row_weights: Vec<f64>, col_weights: Vec<f64>) -> MixedSolution {
    let cols = g.column_payoffs(&row_weights);
    let (worst_col, lower) = first_argmin(&cols);
    let upper = g
        .row_payoffs(&col_weights)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    MixedSolution {
        row_weights,
        col_weights,
        lower,
        upper,
        gap: (upper - lower).max(0.0),
        worst_col,
    }
}

/// Mixed max-min strategy with a certified duality gap at most `eps`.
///
/// After shifting the matrix to be strictly positive, the column player's
/// problem `max 1'w  s.t.  B w <= 1, w >= 0` starts feasible at the slack
/// basis. Bland's rule guarantees termination; the row strategy is read off
/// the slack reduced costs.
pub fn solve_mixed(g: &Payoff, eps: f64) -> Result<MixedSolution> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "gap tolerance must be positive, got {eps}"
        )));
    }
    let (m, n) = (g.n_rows(), g.n_cols());
    let min_entry = g.data.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min_entry;

    // Tableau rows: m constraints then the objective row; columns n + m + rhs.
    let width = n + m + 1;
    let rhs = n + m;
    let mut tab = vec![0.0; (m + 1) * width];
    for i in 0..m {
        for j in 0..n {
            tab[i * width + j] = g.get(i, j) + shift;
        }
        tab[i * width + n + i] = 1.0;
        tab[i * width + rhs] = 1.0;
    }
    let obj = m * width;
    for j in 0..n {
        tab[obj + j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let budget = 200 * (m + n) + 1000;
    let mut optimal = false;
    for _ in 0..budget {
        let Some(enter) = (0..n + m).find(|&j| tab[obj + j] < -PIVOT_TOL) else {
            optimal = true;
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab[i * width + enter];
            if a > PIVOT_TOL {
                let ratio = tab[i * width + rhs] / a;
                let better = match leave {
                    None => true,
                    Some((li, lr)) => ratio < lr - PIVOT_TOL || (ratio <= lr + PIVOT_TOL && basis[i] < basis[li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // B > 0 bounds every column, so a leaving row always exists.
        let (pr, _) = leave.ok_or(Error::NonConvergence {
            gap: f64::INFINITY,
            eps,
        })?;
        let pivot = tab[pr * width + enter];
        for x in &mut tab[pr * width..(pr + 1) * width] {
            *x /= pivot;
        }
        for i in 0..=m {
            if i == pr {
                continue;
            }
            let factor = tab[i * width + enter];
            if factor != 0.0 {
                for k in 0..width {
                    tab[i * width + k] -= factor * tab[pr * width + k];
                }
            }
        }
        basis[pr] = enter;
    }

    let mut w = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            w[b] = tab[i * width + rhs];
        }
    }
    let u: Vec<f64> = (0..m).map(|i| tab[obj + n + i]).collect();
    let (Some(x), Some(y)) = (clean_simplex_weights(&u), clean_simplex_weights(&w)) else {
        return Err(Error::NonConvergence {
            gap: f64::INFINITY,
            eps,
        });
    };
    let sol = certify(g, x, y);
    if !optimal || sol.gap > eps {
        return Err(Error::NonConvergence { gap: sol.gap, eps });
    }
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_examples() {
        let g = Payoff::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(
            solve_pure(&g),
            PureSolution {
                row: 0,
                value: 0.0,
                worst_col: 1
            }
        );
        let g = Payoff::from_rows(&[vec![2.0, 3.0], vec![1.0, 5.0]]).unwrap();
        let s = solve_pure(&g);
        assert_eq!((s.row, s.value, s.worst_col), (0, 2.0, 0));
    }

    #[test]
    fn matching_pennies_like() {
        let g = Payoff::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = solve_mixed(&g, 1e-9).unwrap();
        assert!((s.lower - 0.5).abs() < 1e-9);
        assert!((s.row_weights[0] - 0.5).abs() < 1e-9);
        assert!(s.gap <= 1e-9);
    }

    #[test]
    fn dominant_row_is_degenerate_mixture() {
        let g = Payoff::from_rows(&[vec![0.0, 0.1], vec![0.5, 0.7], vec![0.2, 0.3]]).unwrap();
        let s = solve_mixed(&g, 1e-9).unwrap();
        assert!((s.row_weights[1] - 1.0).abs() < 1e-12);
        assert!((s.lower - 0.5).abs() < 1e-12);
        assert_eq!(s.worst_col, 0);
    }

    #[test]
    fn single_entry_and_constant_matrices() {
        let g = Payoff::new(1, 1, vec![-3.0]).unwrap();
        let s = solve_mixed(&g, 1e-9).unwrap();
        assert_eq!(s.row_weights, vec![1.0]);
        assert!((s.lower + 3.0).abs() < 1e-12);
        let g = Payoff::new(3, 2, vec![0.0; 6]).unwrap();
        let s = solve_mixed(&g, 1e-9).unwrap();
        assert_eq!(s.lower, 0.0);
        assert_eq!(s.gap, 0.0);
    }

    #[test]
    fn rejects_nonpositive_eps_and_bad_shapes() {
        let g = Payoff::new(1, 1, vec![0.0]).unwrap();
        assert!(solve_mixed(&g, 0.0).is_err());
        assert!(Payoff::new(0, 2, vec![]).is_err());
        assert!(Payoff::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(Payoff::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn pure_bounds_bracket_mixed_value() {
        let g = Payoff::from_rows(&[vec![3.0, -1.0, 0.5], vec![-2.0, 4.0, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let s = solve_mixed(&g, 1e-10).unwrap();
        assert!(solve_pure(&g).value <= s.lower + 1e-12);
        assert!(s.upper <= pure_upper_value(&g) + 1e-12);
    }
}
