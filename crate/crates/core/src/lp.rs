//! Dense two-phase simplex for small feasibility programs.
//!
//! Programs are in standard form: minimize `c . x` subject to `A x = b` and
//! `x >= 0`. Phase one drives a full set of artificial variables to zero;
//! phase two optimizes the original objective. Pricing is Dantzig until
//! degeneracy is detected, then Bland's rule, which guarantees termination.
//! Pivot selection is index-deterministic, so identical programs pivot
//! identically.

use crate::error::{Error, Result};
use crate::experiment::Experiment;
use crate::matrix::Matrix;

/// Default feasibility/pricing tolerance.
pub const DEFAULT_LP_TOL: f64 = 1e-9;

/// Default pivot budget across both phases.
pub const DEFAULT_LP_MAX_ITERS: usize = 50_000;

/// Standard-form linear program: minimize `objective . x` subject to
/// `constraints * x = rhs`, `x >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl LinearProgram {
    fn validate(&self) -> Result<()> {
        if self.constraints.len() != self.rhs.len() {
            return Err(Error::MalformedProgram {
                reason: format!(
                    "{} constraint rows but {} right-hand sides",
                    self.constraints.len(),
                    self.rhs.len()
                ),
            });
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if row.len() != self.objective.len() {
                return Err(Error::MalformedProgram {
                    reason: format!(
                        "row {} has {} coefficients, objective has {}",
                        i,
                        row.len(),
                        self.objective.len()
                    ),
                });
            }
        }
        for (i, v) in self
            .objective
            .iter()
            .chain(self.rhs.iter())
            .chain(self.constraints.iter().flatten())
            .enumerate()
        {
            if !v.is_finite() {
                return Err(Error::MalformedProgram {
                    reason: format!("non-finite coefficient at flat index {i}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// Solver outcome; `solution` is present exactly when `status` is
/// [`LpStatus::Optimal`].
#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub solution: Option<Vec<f64>>,
    pub objective_value: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    obj: Vec<f64>,
    n_structural: usize,
    tol: f64,
    pivots: usize,
    max_iters: usize,
    degenerate_pivots: usize,
    bland: bool,
}

impl Tableau {
    fn width(&self) -> usize {
        self.obj.len()
    }

    fn rhs_col(&self) -> usize {
        self.width() - 1
    }

    fn pivot(&mut self, row: usize, col: usize) -> Result<()> {
        let pivot = self.rows[row][col];
        if pivot.abs() < 1e-13 {
            return Err(Error::SingularBasis { row });
        }
        let inv = 1.0 / pivot;
        for v in self.rows[row].iter_mut() {
            *v *= inv;
        }
        let pivot_row = self.rows[row].clone();
        for (r, other) in self.rows.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let factor = other[col];
            if factor == 0.0 {
                continue;
            }
            for (o, p) in other.iter_mut().zip(&pivot_row) {
                *o -= factor * p;
            }
            other[col] = 0.0;
        }
        let factor = self.obj[col];
        if factor != 0.0 {
            for (o, p) in self.obj.iter_mut().zip(&pivot_row) {
                *o -= factor * p;
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
        self.pivots += 1;
        Ok(())
    }

    /// Entering column among `eligible` columns, or None when optimal.
    fn entering(&self, eligible: usize) -> Option<usize> {
        if self.bland {
            (0..eligible).find(|&j| self.obj[j] < -self.tol)
        } else {
            let mut best: Option<(usize, f64)> = None;
            for j in 0..eligible {
                let c = self.obj[j];
                if c < -self.tol && best.map_or(true, |(_, bc)| c < bc) {
                    best = Some((j, c));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    /// Minimum-ratio leaving row for `col`, ties broken on the smallest
    /// basic variable index. None means unbounded in that direction.
    fn leaving(&self, col: usize) -> Option<usize> {
        let rhs_col = self.rhs_col();
        let mut best: Option<(usize, f64)> = None;
        for (r, row) in self.rows.iter().enumerate() {
            let a = row[col];
            if a > self.tol {
                let ratio = row[rhs_col] / a;
                let better = match best {
                    None => true,
                    Some((br, bratio)) => {
                        ratio < bratio - 1e-12
                            || (ratio < bratio + 1e-12 && self.basis[r] < self.basis[br])
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
        }
        best.map(|(r, _)| r)
    }

    /// Runs pivots until optimal, unbounded, or out of budget.
    fn optimize(&mut self, eligible: usize) -> Result<LpStatus> {
        loop {
            let Some(col) = self.entering(eligible) else {
                return Ok(LpStatus::Optimal);
            };
            let Some(row) = self.leaving(col) else {
                return Ok(LpStatus::Unbounded);
            };
            if self.pivots >= self.max_iters {
                return Ok(LpStatus::IterationLimit);
            }
            if self.rows[row][self.rhs_col()].abs() <= self.tol {
                self.degenerate_pivots += 1;
                if self.degenerate_pivots >= 2 * self.width() {
                    self.bland = true;
                }
            }
            self.pivot(row, col)?;
        }
    }
}

/// Two-phase simplex. `tol` is both the feasibility and pricing tolerance;
/// `max_iters` bounds total pivots.
pub fn solve(lp: &LinearProgram, tol: f64, max_iters: usize) -> Result<LpOutcome> {
    lp.validate()?;
    let n = lp.objective.len();
    let m = lp.constraints.len();

    // Phase 1 tableau with one artificial variable per row.
    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for (i, row) in lp.constraints.iter().enumerate() {
        let flip = if lp.rhs[i] < 0.0 { -1.0 } else { 1.0 };
        let mut t = vec![0.0; width];
        for (j, &v) in row.iter().enumerate() {
            t[j] = flip * v;
        }
        t[n + i] = 1.0;
        t[width - 1] = flip * lp.rhs[i];
        rows.push(t);
    }
    let mut obj = vec![0.0; width];
    for row in &rows {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[width - 1] -= row[width - 1];
    }
    let mut tab = Tableau {
        rows,
        basis: (n..n + m).collect(),
        obj,
        n_structural: n,
        tol,
        pivots: 0,
        max_iters,
        degenerate_pivots: 0,
        bland: false,
    };

    match tab.optimize(n + m)? {
        LpStatus::Optimal => {}
        LpStatus::IterationLimit => {
            return Ok(LpOutcome {
                status: LpStatus::IterationLimit,
                solution: None,
                objective_value: f64::NAN,
            })
        }
        // Phase 1 is bounded below by zero; unbounded cannot happen.
        other => {
            return Err(Error::MalformedProgram {
                reason: format!("phase 1 ended in unexpected state {other:?}"),
            })
        }
    }
    let phase1_value = -tab.obj[tab.rhs_col()];
    if phase1_value > tol {
        return Ok(LpOutcome {
            status: LpStatus::Infeasible,
            solution: None,
            objective_value: f64::NAN,
        });
    }

    // Drive any artificial variable out of the basis; a row with no
    // structural pivot candidate is redundant and gets dropped.
    let mut drop_rows = Vec::new();
    for r in 0..tab.rows.len() {
        if tab.basis[r] < n {
            continue;
        }
        let col = (0..n).find(|&j| tab.rows[r][j].abs() > tol);
        match col {
            Some(c) => tab.pivot(r, c)?,
            None => drop_rows.push(r),
        }
    }
    for &r in drop_rows.iter().rev() {
        tab.rows.remove(r);
        tab.basis.remove(r);
    }

    // Discard artificial columns and install the phase 2 objective.
    for row in tab.rows.iter_mut() {
        let rhs = row[n + m];
        row.truncate(n);
        row.push(rhs);
    }
    let mut obj = lp.objective.clone();
    obj.push(0.0);
    tab.obj = obj;
    for r in 0..tab.rows.len() {
        let c = tab.obj[tab.basis[r]];
        if c != 0.0 {
            let row = tab.rows[r].clone();
            for (o, p) in tab.obj.iter_mut().zip(&row) {
                *o -= c * p;
            }
            tab.obj[tab.basis[r]] = 0.0;
        }
    }
    tab.degenerate_pivots = 0;

    let status = tab.optimize(n)?;
    match status {
        LpStatus::Optimal => {
            let mut x = vec![0.0; n];
            let rhs_col = tab.rhs_col();
            for (r, &b) in tab.basis.iter().enumerate() {
                debug_assert!(b < tab.n_structural);
                x[b] = tab.rows[r][rhs_col];
            }
            let objective_value = lp
                .objective
                .iter()
                .zip(&x)
                .map(|(c, v)| c * v)
                .sum();
            Ok(LpOutcome {
                status: LpStatus::Optimal,
                solution: Some(x),
                objective_value,
            })
        }
        other => Ok(LpOutcome {
            status: other,
            solution: None,
            objective_value: f64::NAN,
        }),
    }
}

/// Builds the witness-garbling feasibility program for a pair of same-size
/// square experiments: variables are the n^2 entries of the garbling (row
/// major), one residual bound t, and 2n^2 slacks; constraints pin
/// `G a - b` entrywise within [-t, t] and make every column of G sum to 1;
/// the objective minimizes t.
pub fn garbling_feasibility_program(a: &Experiment, b: &Experiment) -> Result<LinearProgram> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.n_signals(),
            cols: a.n_states(),
        });
    }
    if a.n_signals() != b.n_signals() || a.n_states() != b.n_states() || !b.is_square() {
        return Err(Error::DimensionMismatch {
            left_rows: a.n_signals(),
            left_cols: a.n_states(),
            right_rows: b.n_signals(),
            right_cols: b.n_states(),
        });
    }
    let n = a.n_signals();
    let n_gamma = n * n;
    let t_col = n_gamma;
    let n_vars = 3 * n_gamma + 1;
    let amat = a.matrix();
    let bmat = b.matrix();

    let mut constraints = Vec::with_capacity(2 * n_gamma + n);
    let mut rhs = Vec::with_capacity(2 * n_gamma + n);
    for i in 0..n {
        for j in 0..n {
            // (G a)_ij - b_ij <= t
            let mut up = vec![0.0; n_vars];
            for k in 0..n {
                up[i * n + k] = amat.get(k, j);
            }
            up[t_col] = -1.0;
            up[n_gamma + 1 + i * n + j] = 1.0;
            constraints.push(up);
            rhs.push(bmat.get(i, j));

            // b_ij - (G a)_ij <= t
            let mut down = vec![0.0; n_vars];
            for k in 0..n {
                down[i * n + k] = -amat.get(k, j);
            }
            down[t_col] = -1.0;
            down[2 * n_gamma + 1 + i * n + j] = 1.0;
            constraints.push(down);
            rhs.push(-bmat.get(i, j));
        }
    }
    for k in 0..n {
        let mut row = vec![0.0; n_vars];
        for i in 0..n {
            row[i * n + k] = 1.0;
        }
        constraints.push(row);
        rhs.push(1.0);
    }

    let mut objective = vec![0.0; n_vars];
    objective[t_col] = 1.0;
    Ok(LinearProgram {
        objective,
        constraints,
        rhs,
    })
}

/// Reads the garbling candidate and the residual bound t out of an optimal
/// outcome of [`garbling_feasibility_program`].
pub fn extract_garbling_candidate(n: usize, outcome: &LpOutcome) -> Option<(Matrix, f64)> {
    let x = outcome.solution.as_ref()?;
    let entries = x[..n * n].to_vec();
    let t = x[n * n];
    Matrix::new(n, n, entries).ok().map(|m| (m, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::Garbling;
    use approx::assert_abs_diff_eq;

    fn solve_default(lp: &LinearProgram) -> LpOutcome {
        solve(lp, DEFAULT_LP_TOL, DEFAULT_LP_MAX_ITERS).unwrap()
    }

    #[test]
    fn trivial_equality_is_optimal() {
        let lp = LinearProgram {
            objective: vec![0.0],
            constraints: vec![vec![1.0]],
            rhs: vec![1.0],
        };
        let out = solve_default(&lp);
        assert_eq!(out.status, LpStatus::Optimal);
        assert_abs_diff_eq!(out.solution.unwrap()[0], 1.0, epsilon = 1e-9);
    }

    #[test]
    fn negative_rhs_with_nonnegative_variable_is_infeasible() {
        let lp = LinearProgram {
            objective: vec![0.0],
            constraints: vec![vec![1.0]],
            rhs: vec![-1.0],
        };
        assert_eq!(solve_default(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn free_descent_is_unbounded() {
        let lp = LinearProgram {
            objective: vec![-1.0],
            constraints: vec![],
            rhs: vec![],
        };
        assert_eq!(solve_default(&lp).status, LpStatus::Unbounded);
    }

    #[test]
    fn bounded_minimum_found() {
        // min -x - y subject to x + y = 1.
        let lp = LinearProgram {
            objective: vec![-1.0, -1.0],
            constraints: vec![vec![1.0, 1.0]],
            rhs: vec![1.0],
        };
        let out = solve_default(&lp);
        assert_eq!(out.status, LpStatus::Optimal);
        assert_abs_diff_eq!(out.objective_value, -1.0, epsilon = 1e-9);
    }

    #[test]
    fn garbling_program_with_identity_base_recovers_target() {
        let a = Experiment::identity(2);
        let b = Garbling::random(2, 17)
            .unwrap()
            .apply(&Experiment::identity(2))
            .unwrap();
        let lp = garbling_feasibility_program(&a, &b).unwrap();
        let out = solve_default(&lp);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!(out.objective_value <= 1e-9);
        let (gamma, t) = extract_garbling_candidate(2, &out).unwrap();
        assert!(t <= 1e-9);
        for (x, y) in gamma.entries().iter().zip(b.matrix().entries()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-8);
        }
    }

    #[test]
    fn garbling_program_self_pair_has_zero_residual() {
        let a = Experiment::random(3, 3, 4).unwrap();
        let lp = garbling_feasibility_program(&a, &a).unwrap();
        let out = solve_default(&lp);
        assert_eq!(out.status, LpStatus::Optimal);
        assert!(out.objective_value.abs() <= 1e-9);
    }

    #[test]
    fn optimal_solutions_replay_through_constraints() {
        for seed in 0..20u64 {
            let n = 2 + (seed as usize % 3);
            let a = Experiment::random(n, n, seed).unwrap();
            let b = if seed % 2 == 0 {
                Garbling::random(n, seed + 100).unwrap().apply(&a).unwrap()
            } else {
                Experiment::random(n, n, seed + 200).unwrap()
            };
            let lp = garbling_feasibility_program(&a, &b).unwrap();
            let out = solve_default(&lp);
            assert_eq!(out.status, LpStatus::Optimal);
            let x = out.solution.as_ref().unwrap();
            for (row, &b_i) in lp.constraints.iter().zip(&lp.rhs) {
                let lhs: f64 = row.iter().zip(x).map(|(c, v)| c * v).sum();
                assert_abs_diff_eq!(lhs, b_i, epsilon = 10.0 * DEFAULT_LP_TOL);
            }
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let a = Experiment::random(3, 3, 9).unwrap();
        let b = Experiment::random(3, 3, 10).unwrap();
        let lp = garbling_feasibility_program(&a, &b).unwrap();
        let first = solve_default(&lp);
        let second = solve_default(&lp);
        assert_eq!(first, second);
    }

    #[test]
    fn malformed_program_is_rejected() {
        let lp = LinearProgram {
            objective: vec![1.0, 2.0],
            constraints: vec![vec![1.0]],
            rhs: vec![0.0],
        };
        assert!(matches!(
            solve(&lp, DEFAULT_LP_TOL, DEFAULT_LP_MAX_ITERS),
            Err(Error::MalformedProgram { .. })
        ));
    }
}
