//! Internal optimization primitives: a dense two-phase simplex solver for
//! the small feasibility LPs (symmetrizability), and multiplicative-update
//! helpers for ascent over probability simplices.

/// minimize c.x subject to A x = b, x >= 0.
#[derive(Debug, Clone)]
pub(crate) struct LinearProgram {
    pub c: Vec<f64>,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 200_000;

/// Two-phase dense tableau simplex with Bland's rule. Sized for the small,
/// dense programs this crate produces (a few hundred variables).
pub(crate) fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome, String> {
    let m = lp.a.len();
    let n = lp.c.len();
    for (i, row) in lp.a.iter().enumerate() {
        if row.len() != n {
            return Err(format!("row {i} has {} entries, expected {n}", row.len()));
        }
    }
    if lp.b.len() != m {
        return Err("rhs length mismatch".into());
    }

    // Tableau layout: columns [x_0..x_{n-1} | artificial_0..artificial_{m-1} | rhs].
    let width = n + m + 1;
    let mut t = vec![vec![0.0_f64; width]; m];
    for i in 0..m {
        let flip = if lp.b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = flip * lp.a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = flip * lp.b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // Phase 1: minimize the sum of artificials. Reduced costs relative to
    // the all-artificial starting basis: c1 - sum of rows, with c1 = 1 on
    // artificial columns.
    let mut cost = vec![0.0_f64; width];
    for i in 0..m {
        cost[n + i] = 1.0;
    }
    for i in 0..m {
        for j in 0..width {
            cost[j] -= t[i][j];
        }
    }
    run_simplex(&mut t, &mut cost, &mut basis, n + m)?;
    let phase1 = -cost[width - 1];
    if phase1 > 1e-7 {
        return Ok(LpOutcome::Infeasible);
    }

    // Drive any artificial still in the basis out (or detect a zero row).
    for i in 0..m {
        if basis[i] >= n {
            let pivot_col = (0..n).find(|&j| t[i][j].abs() > PIVOT_TOL);
            if let Some(j) = pivot_col {
                pivot(&mut t, &mut cost, &mut basis, i, j);
            }
            // A redundant constraint row can keep its artificial at value 0.
        }
    }

    // Phase 2: original objective, artificial columns frozen.
    let mut cost = vec![0.0_f64; width];
    cost[..n].copy_from_slice(&lp.c);
    // Express the objective in terms of non-basic variables.
    for i in 0..m {
        let cb = if basis[i] < n { lp.c[basis[i]] } else { 0.0 };
        if cb != 0.0 {
            for j in 0..width {
                cost[j] -= cb * t[i][j];
            }
        }
    }
    match run_simplex(&mut t, &mut cost, &mut basis, n)? {
        SimplexEnd::Optimal => {}
        SimplexEnd::Unbounded => return Ok(LpOutcome::Unbounded),
    }

    let mut x = vec![0.0_f64; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][width - 1];
        }
    }
    let value = lp.c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpOutcome::Optimal { x, value })
}

enum SimplexEnd {
    Optimal,
    Unbounded,
}

fn run_simplex(
    t: &mut [Vec<f64>],
    cost: &mut [f64],
    basis: &mut [usize],
    allowed_cols: usize,
) -> Result<SimplexEnd, String> {
    let m = t.len();
    let width = cost.len();
    for _ in 0..MAX_PIVOTS {
        // Bland's rule: first column with negative reduced cost.
        let Some(enter) = (0..allowed_cols).find(|&j| cost[j] < -PIVOT_TOL) else {
            return Ok(SimplexEnd::Optimal);
        };
        // Ratio test, Bland tie-break on smallest basis index.
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[i][enter] > PIVOT_TOL {
                let ratio = t[i][width - 1] / t[i][enter];
                if ratio < best - PIVOT_TOL
                    || (ratio < best + PIVOT_TOL
                        && leave.map(|l| basis[i] < basis[l]).unwrap_or(true))
                {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let Some(row) = leave else {
            return Ok(SimplexEnd::Unbounded);
        };
        pivot(t, cost, basis, row, enter);
    }
    Err("simplex exceeded the pivot budget".into())
}

fn pivot(t: &mut [Vec<f64>], cost: &mut [f64], basis: &mut [usize], row: usize, col: usize) {
    let width = cost.len();
    let p = t[row][col];
    for j in 0..width {
        t[row][j] /= p;
    }
    for i in 0..t.len() {
        if i != row {
            let f = t[i][col];
            if f != 0.0 {
                for j in 0..width {
                    t[i][j] -= f * t[row][j];
                }
            }
        }
    }
    let f = cost[col];
    if f != 0.0 {
        for j in 0..width {
            cost[j] -= f * t[row][j];
        }
    }
    basis[row] = col;
}

// ---------------------------------------------------------------------------
// Simplex ascent helpers
// ---------------------------------------------------------------------------

/// Multiplicative (exponentiated-gradient) step on the probability simplex,
/// stabilized in the log domain: p_i <- p_i * 2^(eta g_i) / Z.
pub(crate) fn exp_grad_step(p: &[f64], grad: &[f64], eta: f64) -> Vec<f64> {
    const LOG_FLOOR: f64 = -745.0; // ln of the smallest positive normal f64
    let mut logs: Vec<f64> = p
        .iter()
        .zip(grad)
        .map(|(&pi, &gi)| pi.max(1e-300).ln() + eta * gi * std::f64::consts::LN_2)
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for l in &mut logs {
        *l = (*l - top).max(LOG_FLOOR);
    }
    let mut out: Vec<f64> = logs.into_iter().map(f64::exp).collect();
    let z: f64 = out.iter().sum();
    for o in &mut out {
        *o /= z;
    }
    out
}

/// Frank-Wolfe gap of a convex objective at q: sum_t q_t g_t - min_t g_t.
/// A valid bound on f(q) - min f when g is the gradient of convex f.
pub(crate) fn frank_wolfe_gap(q: &[f64], grad: &[f64]) -> f64 {
    let avg: f64 = q.iter().zip(grad).map(|(qi, gi)| qi * gi).sum();
    let min = grad.iter().cloned().fold(f64::INFINITY, f64::min);
    (avg - min).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn lp_solves_textbook_problem() {
        // minimize -3x - 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 (slacks s1..s3).
        // Optimum x = 2, y = 6, value -36.
        let lp = LinearProgram {
            c: vec![-3.0, -5.0, 0.0, 0.0, 0.0],
            a: vec![
                vec![1.0, 0.0, 1.0, 0.0, 0.0],
                vec![0.0, 2.0, 0.0, 1.0, 0.0],
                vec![3.0, 2.0, 0.0, 0.0, 1.0],
            ],
            b: vec![4.0, 12.0, 18.0],
        };
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert_abs_diff_eq!(value, -36.0, epsilon = 1e-9);
                assert_abs_diff_eq!(x[0], 2.0, epsilon = 1e-9);
                assert_abs_diff_eq!(x[1], 6.0, epsilon = 1e-9);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn lp_detects_infeasible() {
        // x = 1 and x = 2 simultaneously.
        let lp = LinearProgram {
            c: vec![1.0],
            a: vec![vec![1.0], vec![1.0]],
            b: vec![1.0, 2.0],
        };
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Infeasible);
    }

    #[test]
    fn lp_detects_unbounded() {
        // minimize -x s.t. x - y = 1, x, y >= 0 (x can grow without bound).
        let lp = LinearProgram {
            c: vec![-1.0, 0.0],
            a: vec![vec![1.0, -1.0]],
            b: vec![1.0],
        };
        assert_eq!(solve_lp(&lp).unwrap(), LpOutcome::Unbounded);
    }

    #[test]
    fn lp_handles_degenerate_equalities() {
        // Redundant rows: x + y = 1 twice; minimize x.
        let lp = LinearProgram {
            c: vec![1.0, 0.0],
            a: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            b: vec![1.0, 1.0],
        };
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert_abs_diff_eq!(value, 0.0, epsilon = 1e-10);
                assert_abs_diff_eq!(x[1], 1.0, epsilon = 1e-10);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn lp_chebyshev_fit() {
        // minimize r s.t. |x - 0.3| <= r, |x - 0.7| <= r over x in [0, 1]:
        // optimum r = 0.2 at x = 0.5. Variables: x, r, 4 slacks.
        //   x - r + s1 = 0.3, -x - r + s2' = -0.7 -> rewrite as equalities
        //   with nonnegative slacks:
        //   x - r + s1 = 0.3   (x - 0.3 <= r)
        //   -x - r + s2 = -0.3 (0.3 - x <= r)
        //   x - r + s3 = 0.7
        //   -x - r + s4 = -0.7
        let lp = LinearProgram {
            c: vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            a: vec![
                vec![1.0, -1.0, 1.0, 0.0, 0.0, 0.0],
                vec![-1.0, -1.0, 0.0, 1.0, 0.0, 0.0],
                vec![1.0, -1.0, 0.0, 0.0, 1.0, 0.0],
                vec![-1.0, -1.0, 0.0, 0.0, 0.0, 1.0],
            ],
            b: vec![0.3, -0.3, 0.7, -0.7],
        };
        match solve_lp(&lp).unwrap() {
            LpOutcome::Optimal { x, value } => {
                assert_abs_diff_eq!(value, 0.2, epsilon = 1e-9);
                assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-9);
            }
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn exp_grad_step_moves_toward_large_gradient() {
        let p = vec![0.5, 0.5];
        let q = exp_grad_step(&p, &[1.0, 0.0], 1.0);
        assert!(q[0] > 0.6 && q[0] < 0.7); // 2/(2+1)
        assert_abs_diff_eq!(q.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn frank_wolfe_gap_zero_at_vertex_optimum() {
        assert_abs_diff_eq!(
            frank_wolfe_gap(&[1.0, 0.0], &[0.0, 5.0]),
            0.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            frank_wolfe_gap(&[0.5, 0.5], &[0.0, 2.0]),
            1.0,
            epsilon = 1e-12
        );
    }
}
