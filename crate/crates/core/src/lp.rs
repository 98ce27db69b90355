//! The slack-maximization linear program of the cutting-plane loop.
//!
//! Variables `c ∈ ℝ^r` (coordinates in a basis of the closure subspace) and `t`:
//! maximize `t` subject to `Σ_b c_b v_{ib} ≥ t` for every witness plane `i`,
//! `Σ_b c_b tr_b = N` and `|c_b| ≤ bound`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT::{NonnegativeConeT, ZeroConeT},
};

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SlackSolution {
    pub t: f64,
    pub c: Vec<f64>,
    /// Multipliers of the witness constraints (nonnegative, summing to one).
    pub weights: Vec<f64>,
    /// Multiplier of the trace normalization.
    pub mu: f64,
}

/// `values[i][b]` is the value of basis form `b` on witness plane `i`.
/// A positive `reg` subtracts `reg/2 · |c|²` from the objective, which picks
/// the smallest optimizer when the optimal face is large.
pub fn max_slack(values: &[Vec<f64>], traces: &[f64], target: f64, bound: f64, reg: f64) -> Result<SlackSolution> {
    let r = traces.len();
    let m = values.len();
    let nvars = r + 1;
    let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    let mut b = Vec::new();
    // Trace equality.
    for (j, &tr) in traces.iter().enumerate() {
        if tr != 0.0 {
            rows.push(0);
            cols.push(j);
            vals.push(tr);
        }
    }
    b.push(target);
    // t - Σ c_b v_ib ≤ 0.
    for (i, v) in values.iter().enumerate() {
        for (j, &x) in v.iter().enumerate() {
            if x != 0.0 {
                rows.push(1 + i);
                cols.push(j);
                vals.push(-x);
            }
        }
        rows.push(1 + i);
        cols.push(r);
        vals.push(1.0);
        b.push(0.0);
    }
    // ±c_b ≤ bound.
    for j in 0..r {
        for (k, s) in [1.0, -1.0].into_iter().enumerate() {
            rows.push(1 + m + 2 * j + k);
            cols.push(j);
            vals.push(s);
            b.push(bound);
        }
    }
    let nrows = 1 + m + 2 * r;
    let a = CscMatrix::new_from_triplets(nrows, nvars, rows, cols, vals);
    let p = if reg > 0.0 {
        CscMatrix::new_from_triplets(nvars, nvars, (0..r).collect(), (0..r).collect(), vec![reg; r])
    } else {
        CscMatrix::zeros((nvars, nvars))
    };
    let mut q = vec![0.0; nvars];
    q[r] = -1.0;
    let cones = [ZeroConeT(1), NonnegativeConeT(m + 2 * r)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(500)
        .build()
        .map_err(|e| Error::Certificate(format!("solver settings: {e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings);
    solver.solve();
    let sol = &solver.solution;
    match sol.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        s => return Err(Error::Certificate(format!("linear program ended with status {s:?}"))),
    }
    Ok(SlackSolution {
        t: sol.x[r],
        c: sol.x[..r].to_vec(),
        weights: sol.z[1..1 + m].iter().map(|w| w.max(0.0)).collect(),
        mu: sol.z[0],
    })
}

/// A point `w ≥ 0`, `Σ w = 1` with `Σ_g columns[g][b] w_g = 0` for every row `b`,
/// or `None` when the system is infeasible.
pub fn nonnegative_kernel(columns: &[Vec<f64>]) -> Result<Option<Vec<f64>>> {
    let g = columns.len();
    if g == 0 {
        return Ok(None);
    }
    let nrows_m = columns[0].len();
    let row_scale: Vec<f64> = (0..nrows_m)
        .map(|b| columns.iter().map(|c| c[b].abs()).fold(0.0, f64::max))
        .map(|s| if s > 0.0 { 1.0 / s } else { 0.0 })
        .collect();
    let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
    let mut b = Vec::new();
    for r in 0..nrows_m {
        for (j, c) in columns.iter().enumerate() {
            if c[r] != 0.0 && row_scale[r] != 0.0 {
                rows.push(r);
                cols.push(j);
                vals.push(c[r] * row_scale[r]);
            }
        }
        b.push(0.0);
    }
    for j in 0..g {
        rows.push(nrows_m);
        cols.push(j);
        vals.push(1.0);
    }
    b.push(1.0);
    for j in 0..g {
        rows.push(nrows_m + 1 + j);
        cols.push(j);
        vals.push(-1.0);
        b.push(0.0);
    }
    let a = CscMatrix::new_from_triplets(nrows_m + 1 + g, g, rows, cols, vals);
    let p = CscMatrix::zeros((g, g));
    let q = vec![0.0; g];
    let cones = [ZeroConeT(nrows_m + 1), NonnegativeConeT(g)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(500)
        .build()
        .map_err(|e| Error::Certificate(format!("solver settings: {e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings);
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => Ok(Some(solver.solution.x.iter().map(|w| w.max(0.0)).collect())),
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_variable_slack() {
        // Planes: value c0 and value c1; trace c0 + c1 = 2. Best t = 1.
        let sol = max_slack(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 1.0], 2.0, 100.0, 0.0).unwrap();
        assert!((sol.t - 1.0).abs() < 1e-6);
        assert!((sol.weights.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn regularization_picks_small_solution() {
        // The second coordinate is invisible to the planes; without a trace on it
        // any value is optimal and the regularized problem picks zero.
        let sol = max_slack(&[vec![1.0, 0.0]], &[1.0, 0.0], 1.0, 100.0, 1e-3).unwrap();
        assert!(sol.c[1].abs() < 1e-6);
        assert!((sol.t - 1.0).abs() < 1e-3);
    }

    #[test]
    fn infeasible_direction_gives_nonpositive_slack() {
        // The only basis form is positive on one plane and negative on the other.
        let sol = max_slack(&[vec![1.0], vec![-1.0]], &[1.0], 1.0, 100.0, 0.0).unwrap();
        assert!((sol.t + 1.0).abs() < 1e-6);
        // Stationarity in c: Σ y_i v_i = μ · trace.
        assert!((sol.weights[0] - sol.weights[1] - sol.mu).abs() < 1e-6);
        assert!(sol.mu < 0.0);
    }

    #[test]
    fn nonnegative_kernel_finds_balanced_weights() {
        // Columns (1) and (-2): w = (2/3, 1/3).
        let w = nonnegative_kernel(&[vec![1.0], vec![-2.0]]).unwrap().unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-6 && (w[1] - 1.0 / 3.0).abs() < 1e-6);
        assert!(nonnegative_kernel(&[vec![1.0], vec![2.0]]).unwrap().is_none());
    }
}
