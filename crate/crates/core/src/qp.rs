//! Primal active-set solver for
//!
//! ```text
//! minimize   1/2 s' U s + c' s
//! subject to A s <= b
//! ```
//!
//! The solver starts from `s = 0` with an empty working set, so `b >= 0` is
//! required (it holds for subproblems linearised at a feasible iterate).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Constraint feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-8;
/// Allowed negative slack on multipliers before a constraint is dropped.
pub const MULTIPLIER_TOL: f64 = -1e-10;
const STEP_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    /// Symmetric D-by-D curvature.
    pub u: DMatrix<f64>,
    pub c: DVector<f64>,
    /// M-by-D constraint matrix.
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl QpProblem {
    pub fn new(u: DMatrix<f64>, c: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let p = Self { u, c, a, b };
        p.check_dims()?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    fn check_dims(&self) -> Result<()> {
        let d = self.c.len();
        let expect = |expected: usize, actual: usize| {
            if expected == actual {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected, actual })
            }
        };
        expect(d, self.u.nrows())?;
        expect(d, self.u.ncols())?;
        expect(d, self.a.ncols())?;
        expect(self.b.len(), self.a.nrows())
    }

    pub fn objective(&self, s: &DVector<f64>) -> f64 {
        0.5 * s.dot(&(&self.u * s)) + self.c.dot(s)
    }

    /// Largest `(A s - b)_i`, clipped at zero.
    pub fn max_violation(&self, s: &DVector<f64>) -> f64 {
        (&self.a * s - &self.b).iter().fold(0.0, |m, &v| m.max(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    MaxIter,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub s: DVector<f64>,
    /// Working set at exit, ascending.
    pub active_set: Vec<usize>,
    /// One multiplier per constraint; zero off the working set.
    pub multipliers: DVector<f64>,
    pub iterations: usize,
    pub status: QpStatus,
    /// Diagonal shift added to make `U` positive definite.
    pub regularization: f64,
}

/// Symmetrises `u` and adds `tau I` (tau = 1e-8, 1e-7, ...) until Cholesky
/// succeeds. A positive definite input comes back unchanged with `tau = 0`.
pub fn regularize(u: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    let sym = if u == &u.transpose() {
        u.clone()
    } else {
        (u + u.transpose()) * 0.5
    };
    if sym.clone().cholesky().is_some() {
        return (sym, 0.0);
    }
    let mut tau = 1e-8;
    loop {
        let shifted = &sym + DMatrix::identity(sym.nrows(), sym.ncols()) * tau;
        if shifted.clone().cholesky().is_some() || !tau.is_finite() {
            return (shifted, tau);
        }
        tau *= 10.0;
    }
}

/// Solves the equality-constrained step `min 1/2 p'Up + g'p s.t. A_W p = 0`,
/// returning the step and the working-set multipliers.
fn kkt_step(u: &DMatrix<f64>, a: &DMatrix<f64>, working: &[usize], g: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
    let d = u.nrows();
    let w = working.len();
    let mut kkt = DMatrix::zeros(d + w, d + w);
    kkt.view_mut((0, 0), (d, d)).copy_from(u);
    for (r, &i) in working.iter().enumerate() {
        for j in 0..d {
            kkt[(d + r, j)] = a[(i, j)];
            kkt[(j, d + r)] = a[(i, j)];
        }
    }
    let mut rhs = DVector::zeros(d + w);
    rhs.rows_mut(0, d).copy_from(&(-g));
    let sol = kkt.lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((sol.rows(0, d).into_owned(), sol.rows(d, w).into_owned()))
}

/// Solves the QP by the primal active-set method.
pub fn solve_qp(problem: &QpProblem) -> Result<QpSolution> {
    problem.check_dims()?;
    let d = problem.dim();
    let m = problem.num_constraints();
    let (u, tau) = regularize(&problem.u);
    let a = &problem.a;
    let b = &problem.b;

    let mut s = DVector::zeros(d);
    let mut working: Vec<usize> = Vec::new();
    let mut mu_w = DVector::zeros(0);

    let finish = |s: DVector<f64>, working: &[usize], mu_w: &DVector<f64>, iterations, status| {
        let mut multipliers = DVector::zeros(m);
        for (r, &i) in working.iter().enumerate() {
            multipliers[i] = mu_w[r];
        }
        let mut active_set = working.to_vec();
        active_set.sort_unstable();
        QpSolution {
            s,
            active_set,
            multipliers,
            iterations,
            status,
            regularization: tau,
        }
    };

    if b.iter().any(|&bi| bi < -FEAS_TOL) {
        return Ok(finish(s, &working, &mu_w, 0, QpStatus::Infeasible));
    }

    let max_iter = 100 * (d + m);
    let mut at_subspace_min = false;
    for iter in 0..max_iter {
        let g = &u * &s + &problem.c;
        let Some((p, mu)) = kkt_step(&u, a, &working, &g) else {
            // Dependent working set; drop the most recent addition.
            working.pop();
            at_subspace_min = false;
            continue;
        };
        mu_w = mu;

        let negligible = p.norm() <= STEP_TOL * (1.0 + s.norm());
        if at_subspace_min || negligible {
            let mut worst: Option<(usize, f64)> = None;
            for (r, &v) in mu_w.iter().enumerate() {
                if v < MULTIPLIER_TOL {
                    let better = match worst {
                        None => true,
                        Some((wr, wv)) => v < wv || (v == wv && working[r] < working[wr]),
                    };
                    if better {
                        worst = Some((r, v));
                    }
                }
            }
            match worst {
                None => return Ok(finish(s, &working, &mu_w, iter, QpStatus::Optimal)),
                Some((r, _)) => {
                    working.remove(r);
                    at_subspace_min = false;
                }
            }
            continue;
        }

        let mut alpha = 1.0;
        let mut blocking = None;
        for i in 0..m {
            if working.contains(&i) {
                continue;
            }
            let row = a.row(i);
            let ap = row.dot(&p.transpose());
            if ap <= 0.0 {
                continue;
            }
            let slack = (b[i] - row.dot(&s.transpose())).max(0.0);
            let t = slack / ap;
            if t < alpha || (t == alpha && blocking.is_none() && t <= 1.0) {
                alpha = t;
                blocking = Some(i);
            }
        }
        s += &p * alpha;
        match blocking {
            Some(i) => {
                working.push(i);
                at_subspace_min = false;
            }
            None => at_subspace_min = true,
        }
    }
    Ok(finish(s, &working, &mu_w, max_iter, QpStatus::MaxIter))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(u: &[f64], c: &[f64], a: &[f64], b: &[f64]) -> QpProblem {
        let d = c.len();
        let m = b.len();
        QpProblem::new(
            DMatrix::from_row_slice(d, d, u),
            DVector::from_row_slice(c),
            DMatrix::from_row_slice(m, d, a),
            DVector::from_row_slice(b),
        )
        .unwrap()
    }

    #[test]
    fn unconstrained_scalar() {
        let sol = solve_qp(&problem(&[1.0], &[-1.0], &[], &[])).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.s[0] - 1.0).abs() < 1e-12);
        assert!(sol.active_set.is_empty());
    }

    #[test]
    fn active_upper_bound() {
        let sol = solve_qp(&problem(&[1.0], &[-1.0], &[1.0], &[0.5])).unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.s[0] - 0.5).abs() < 1e-12);
        assert_eq!(sol.active_set, vec![0]);
        assert!((sol.multipliers[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn simplex_corner() {
        let sol = solve_qp(&problem(
            &[1.0, 0.0, 0.0, 1.0],
            &[-2.0, 0.0],
            &[1.0, 1.0, -1.0, 0.0, 0.0, -1.0],
            &[1.0, 0.0, 0.0],
        ))
        .unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.s[0] - 1.0).abs() < 1e-10);
        assert!(sol.s[1].abs() < 1e-10);
    }

    #[test]
    fn infeasible_origin() {
        let sol = solve_qp(&problem(&[1.0], &[0.0], &[1.0], &[-1.0])).unwrap();
        assert_eq!(sol.status, QpStatus::Infeasible);
    }

    #[test]
    fn pinned_variable_stays_put() {
        // s_1 <= 0 and -s_1 <= 0 pin the second coordinate.
        let sol = solve_qp(&problem(
            &[2.0, 0.5, 0.5, 1.0],
            &[-1.0, -3.0],
            &[0.0, 1.0, 0.0, -1.0],
            &[0.0, 0.0],
        ))
        .unwrap();
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!(sol.s[1].abs() < 1e-14);
        assert!((sol.s[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn indefinite_curvature_is_shifted() {
        let u = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let (r, tau) = regularize(&u);
        assert!(tau > 1.0);
        assert!(r.cholesky().is_some());

        let pd = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let (r, tau) = regularize(&pd);
        assert_eq!(tau, 0.0);
        assert_eq!(r, pd);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let err = QpProblem::new(
            DMatrix::identity(2, 2),
            DVector::zeros(3),
            DMatrix::zeros(0, 3),
            DVector::zeros(0),
        );
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }
}
