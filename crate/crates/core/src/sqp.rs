//! Sequential quadratic programming over antenna positions and rotations.
//!
//! The decision vector is `[x; z; psi_theta; psi_phi]` (length `4N`). Each
//! iteration linearises the pairwise spacing constraints, keeps the box
//! constraints exact, solves the resulting QP with [`crate::qp::solve_qp`]
//! and backtracks along the QP step on an l1 merit function. Curvature is
//! tracked with the DFP rank-two update starting from the identity.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::channel::{build_channel_matrix, AntennaLayout, Scenario};
use crate::error::{Error, Result};
use crate::qp::{solve_qp, QpProblem, QpStatus};
use crate::zf::zf_sum_rate;

/// Objective value reported for configurations with a singular Gram matrix.
pub const SINGULAR_PENALTY: f64 = 1e9;
/// Feasibility tolerance for accepted iterates.
pub const FEASIBILITY_TOL: f64 = 1e-6;

/// Antenna schemes compared in the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    /// Fixed positions and orientations.
    Fpa,
    /// Movable positions.
    Ma,
    /// Rotatable orientations.
    Ra,
    /// Movable and rotatable.
    Mra,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Fpa, Scheme::Ma, Scheme::Ra, Scheme::Mra];

    pub fn moves(self) -> bool {
        matches!(self, Scheme::Ma | Scheme::Mra)
    }

    pub fn rotates(self) -> bool {
        matches!(self, Scheme::Ra | Scheme::Mra)
    }

    /// Free-variable mask over `[x; z; psi_theta; psi_phi]` for `n` antennas.
    pub fn mask(self, n: usize) -> Vec<bool> {
        let mut m = vec![self.moves(); 2 * n];
        m.extend(std::iter::repeat_n(self.rotates(), 2 * n));
        m
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Fpa => "FPA",
            Scheme::Ma => "MA",
            Scheme::Ra => "RA",
            Scheme::Mra => "MRA",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "FPA" => Ok(Scheme::Fpa),
            "MA" => Ok(Scheme::Ma),
            "RA" => Ok(Scheme::Ra),
            "MRA" => Ok(Scheme::Mra),
            other => Err(format!("unknown scheme `{other}`")),
        }
    }
}

/// Flattened decision vector plus the mask of coordinates allowed to move.
#[derive(Debug, Clone, PartialEq)]
pub struct OptVariables {
    pub theta: DVector<f64>,
    pub active_mask: Vec<bool>,
}

impl OptVariables {
    pub fn from_layout(layout: &AntennaLayout, scheme: Scheme) -> Self {
        let theta = DVector::from_iterator(
            4 * layout.len(),
            layout
                .x
                .iter()
                .chain(&layout.z)
                .chain(&layout.psi_theta)
                .chain(&layout.psi_phi)
                .copied(),
        );
        Self {
            theta,
            active_mask: scheme.mask(layout.len()),
        }
    }

    pub fn num_antennas(&self) -> usize {
        self.theta.len() / 4
    }

    pub fn to_layout(&self) -> AntennaLayout {
        layout_from(&self.theta)
    }

    fn with_theta(&self, theta: DVector<f64>) -> Self {
        Self {
            theta,
            active_mask: self.active_mask.clone(),
        }
    }
}

fn layout_from(theta: &DVector<f64>) -> AntennaLayout {
    let n = theta.len() / 4;
    let block = |i: usize| theta.rows(i * n, n).iter().copied().collect::<Vec<_>>();
    AntennaLayout {
        x: block(0),
        z: block(1),
        psi_theta: block(2),
        psi_phi: block(3),
    }
}

/// Box limits: `|x_i| <= x_max`, `|z_i| <= z_max`, `|psi^theta_i| <= psi_theta_max`,
/// `|psi^phi_i| <= psi_phi_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_max: f64,
    pub z_max: f64,
    pub psi_theta_max: f64,
    pub psi_phi_max: f64,
}

impl Bounds {
    /// `x_max = z_max = r lambda / 2` and both rotation limits `psi_max`.
    pub fn for_region(r: f64, psi_max: f64, wavelength: f64) -> Self {
        let d = r * wavelength / 2.0;
        Self {
            x_max: d,
            z_max: d,
            psi_theta_max: psi_max,
            psi_phi_max: psi_max,
        }
    }

    /// Limit for coordinate `i` of a `4n` decision vector.
    pub fn limit(&self, i: usize, n: usize) -> f64 {
        match i / n {
            0 => self.x_max,
            1 => self.z_max,
            2 => self.psi_theta_max,
            _ => self.psi_phi_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptOptions {
    /// Stop when the step norm or the objective change drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// l1 penalty weight in the merit function.
    pub merit_penalty: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Backtracking tries `alpha = 2^-k` for `k = 0..=max_halvings`.
    pub max_halvings: u32,
}

impl Default for OptOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 100,
            merit_penalty: 100.0,
            armijo: 1e-4,
            max_halvings: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub theta_opt: OptVariables,
    pub sum_rate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub max_violation: f64,
    /// Merit at the initial point followed by each accepted iterate.
    pub merit_trace: Vec<f64>,
}

impl OptResult {
    pub fn layout(&self) -> AntennaLayout {
        self.theta_opt.to_layout()
    }
}

fn objective_at(theta: &DVector<f64>, scenario: &Scenario) -> f64 {
    let layout = layout_from(theta);
    match build_channel_matrix(scenario, &layout)
        .and_then(|h| zf_sum_rate(&h, scenario.power, scenario.noise_var))
    {
        Ok(rate) => -rate,
        Err(_) => SINGULAR_PENALTY,
    }
}

/// Negative ZF sum rate of the layout encoded by `theta`, or
/// [`SINGULAR_PENALTY`] when the Gram matrix is singular.
pub fn objective(theta: &OptVariables, scenario: &Scenario) -> f64 {
    objective_at(&theta.theta, scenario)
}

/// Central-difference gradient of [`objective`] on the active coordinates.
///
/// Coordinate `i` uses step `1e-6 * max(1, |theta_i|)`. When exactly one probe
/// hits a singular configuration a one-sided difference is used instead.
pub fn gradient(theta: &OptVariables, scenario: &Scenario) -> Result<DVector<f64>> {
    gradient_with(|t| objective_at(t, scenario), theta)
}

pub(crate) fn gradient_with<F>(f: F, theta: &OptVariables) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let mut grad = DVector::zeros(theta.theta.len());
    let mut center = None;
    let mut probe = theta.theta.clone();
    for i in 0..probe.len() {
        if !theta.active_mask[i] {
            continue;
        }
        let xi = theta.theta[i];
        let h = 1e-6 * xi.abs().max(1.0);
        probe[i] = xi + h;
        let fp = f(&probe);
        probe[i] = xi - h;
        let fm = f(&probe);
        probe[i] = xi;
        let bad_p = fp >= SINGULAR_PENALTY;
        let bad_m = fm >= SINGULAR_PENALTY;
        grad[i] = match (bad_p, bad_m) {
            (false, false) => (fp - fm) / (2.0 * h),
            (true, true) => return Err(Error::NonFiniteGradient(i)),
            (false, true) => (fp - *center.get_or_insert_with(|| f(&theta.theta))) / h,
            (true, false) => (*center.get_or_insert_with(|| f(&theta.theta)) - fm) / h,
        };
    }
    Ok(grad)
}

fn spacing_values(theta: &DVector<f64>, wavelength: f64) -> Vec<f64> {
    let n = theta.len() / 4;
    let mut g = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let d = (theta[i] - theta[j]).hypot(theta[n + i] - theta[n + j]);
            g.push(wavelength / 2.0 - d);
        }
    }
    g
}

/// Spacing constraints `g = lambda/2 - d_ij <= 0` for every unordered pair
/// `i < j` (pairs in lexicographic order) and their Jacobian over the full
/// decision vector.
pub fn spacing_constraints(theta: &OptVariables, wavelength: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let t = &theta.theta;
    let n = theta.num_antennas();
    let v = n * n.saturating_sub(1) / 2;
    let mut values = DVector::zeros(v);
    let mut jac = DMatrix::zeros(v, t.len());
    let mut row = 0;
    for i in 0..n {
        for j in i + 1..n {
            let dx = t[i] - t[j];
            let dz = t[n + i] - t[n + j];
            let d = dx.hypot(dz);
            if d < 1e-12 {
                return Err(Error::CoincidentAntennas(i, j));
            }
            values[row] = wavelength / 2.0 - d;
            jac[(row, i)] = -dx / d;
            jac[(row, j)] = dx / d;
            jac[(row, n + i)] = -dz / d;
            jac[(row, n + j)] = dz / d;
            row += 1;
        }
    }
    Ok((values, jac))
}

/// Worst violation over the spacing constraints and the box limits of the
/// active coordinates.
pub fn max_violation(theta: &OptVariables, bounds: &Bounds, wavelength: f64) -> f64 {
    let n = theta.num_antennas();
    let spacing = spacing_values(&theta.theta, wavelength).into_iter().fold(0.0, f64::max);
    theta
        .theta
        .iter()
        .enumerate()
        .filter(|&(i, _)| theta.active_mask[i])
        .map(|(i, v)| v.abs() - bounds.limit(i, n))
        .fold(spacing, f64::max)
}

/// QP in the step `S`: `min 1/2 S'US + grad'S` subject to
///
/// - linearised spacing rows `grad g_l' S <= -g_l`,
/// - per coordinate, either the exact box pair `S_i <= B_i - theta_i`,
///   `-S_i <= B_i + theta_i` (active) or the pinning pair `S_i <= 0`,
///   `-S_i <= 0` (masked).
pub fn build_qp_subproblem(
    theta: &OptVariables,
    grad: &DVector<f64>,
    hessian: &DMatrix<f64>,
    bounds: &Bounds,
    wavelength: f64,
) -> Result<QpProblem> {
    let d = theta.theta.len();
    if grad.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            actual: grad.len(),
        });
    }
    let n = theta.num_antennas();
    let (g, jac) = spacing_constraints(theta, wavelength)?;
    let v = g.len();
    let m = v + 2 * d;
    let mut a = DMatrix::zeros(m, d);
    let mut b = DVector::zeros(m);
    a.view_mut((0, 0), (v, d)).copy_from(&jac);
    b.rows_mut(0, v).copy_from(&(-&g));
    for i in 0..d {
        let r = v + 2 * i;
        a[(r, i)] = 1.0;
        a[(r + 1, i)] = -1.0;
        if theta.active_mask[i] {
            let lim = bounds.limit(i, n);
            b[r] = lim - theta.theta[i];
            b[r + 1] = lim + theta.theta[i];
        }
    }
    QpProblem::new(hessian.clone(), grad.clone(), a, b)
}

/// DFP update
/// `U+ = U + dθ dθ' / (dq' dθ) - U dq dq' U / (dq' U dq)`.
///
/// Returns `u` unchanged when `dq' dθ <= 1e-10 |dq| |dθ|` or `dq' U dq <= 0`.
pub fn dfp_update(u: &DMatrix<f64>, d_theta: &DVector<f64>, d_grad: &DVector<f64>) -> DMatrix<f64> {
    let curvature = d_grad.dot(d_theta);
    if curvature <= 1e-10 * d_grad.norm() * d_theta.norm() {
        return u.clone();
    }
    let u_dq = u * d_grad;
    let dq_u = u.tr_mul(d_grad);
    let q_u_q = d_grad.dot(&u_dq);
    if q_u_q <= 0.0 {
        return u.clone();
    }
    u + d_theta * d_theta.transpose() / curvature - u_dq * dq_u.transpose() / q_u_q
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchStep {
    pub alpha: f64,
    pub objective: f64,
    pub merit: f64,
}

/// Backtracking line search on the ZF objective.
pub fn line_search(
    theta: &OptVariables,
    direction: &DVector<f64>,
    grad: &DVector<f64>,
    scenario: &Scenario,
    bounds: &Bounds,
    opts: &OptOptions,
) -> Result<LineSearchStep> {
    line_search_with(|t| objective_at(t, scenario), theta, direction, grad, scenario.wavelength, bounds, opts)
}

/// Armijo backtracking over `alpha in {1, 1/2, ..., 2^-max_halvings}` on the
/// merit `f + rho * sum max(0, g_l)`. A trial point is accepted only if it is
/// also feasible within [`FEASIBILITY_TOL`].
pub fn line_search_with<F>(
    f: F,
    theta: &OptVariables,
    direction: &DVector<f64>,
    grad: &DVector<f64>,
    wavelength: f64,
    bounds: &Bounds,
    opts: &OptOptions,
) -> Result<LineSearchStep>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let merit = |t: &DVector<f64>| -> (f64, f64) {
        let fv = f(t);
        let viol: f64 = spacing_values(t, wavelength).into_iter().map(|g| g.max(0.0)).sum();
        (fv, fv + opts.merit_penalty * viol)
    };
    let (f0, m0) = merit(&theta.theta);
    if direction.iter().all(|&s| s == 0.0) {
        return Ok(LineSearchStep {
            alpha: 1.0,
            objective: f0,
            merit: m0,
        });
    }
    let viol0 = m0 - f0;
    let slope = (grad.dot(direction) - viol0).min(0.0);
    let mut alpha = 1.0;
    for _ in 0..=opts.max_halvings {
        let cand = &theta.theta + direction * alpha;
        let (fc, mc) = merit(&cand);
        if mc <= m0 + opts.armijo * alpha * slope
            && max_violation(&theta.with_theta(cand), bounds, wavelength) <= FEASIBILITY_TOL
        {
            return Ok(LineSearchStep {
                alpha,
                objective: fc,
                merit: mc,
            });
        }
        alpha *= 0.5;
    }
    Err(Error::StepFailed)
}

fn rate_from(objective: f64) -> f64 {
    if objective >= SINGULAR_PENALTY {
        0.0
    } else {
        -objective
    }
}

/// Runs SQP from `init` with the free variables selected by `scheme`.
pub fn optimize(
    scenario: &Scenario,
    scheme: Scheme,
    bounds: &Bounds,
    init: &AntennaLayout,
    opts: &OptOptions,
) -> Result<OptResult> {
    scenario.validate()?;
    init.validate()?;
    let lambda = scenario.wavelength;
    let mut vars = OptVariables::from_layout(init, scheme);
    let init_violation = max_violation(&vars, bounds, lambda);
    // Spacing is checked to the layout tolerance, boxes exactly.
    if !init.satisfies_spacing(lambda) || init_violation > crate::channel::SPACING_TOL {
        return Err(Error::InfeasibleInit(init_violation));
    }

    let mut f = objective(&vars, scenario);
    let mut merit_trace = vec![f];
    let finish = |vars: OptVariables, f: f64, iterations, converged, merit_trace| OptResult {
        max_violation: max_violation(&vars, bounds, lambda).max(0.0),
        theta_opt: vars,
        sum_rate: rate_from(f),
        iterations,
        converged,
        merit_trace,
    };

    if !vars.active_mask.iter().any(|&a| a) {
        return Ok(finish(vars, f, 0, true, merit_trace));
    }

    let Ok(mut grad) = gradient(&vars, scenario) else {
        return Ok(finish(vars, f, 0, false, merit_trace));
    };
    let dim = vars.theta.len();
    let mut u = DMatrix::<f64>::identity(dim, dim);

    for iter in 0..opts.max_iterations {
        let qp = build_qp_subproblem(&vars, &grad, &u, bounds, lambda)?;
        let sol = solve_qp(&qp)?;
        if sol.status == QpStatus::Infeasible {
            return Ok(finish(vars, f, iter, false, merit_trace));
        }
        let mut step = sol.s;
        for (s, &active) in step.iter_mut().zip(&vars.active_mask) {
            if !active {
                *s = 0.0;
            }
        }

        let Ok(ls) = line_search(&vars, &step, &grad, scenario, bounds, opts) else {
            return Ok(finish(vars, f, iter, false, merit_trace));
        };
        let d_theta = &step * ls.alpha;
        let next = vars.with_theta(&vars.theta + &d_theta);
        merit_trace.push(ls.merit);

        let small_step = d_theta.norm() < opts.tolerance;
        let small_change = (ls.objective - f).abs() < opts.tolerance;
        if small_step || small_change {
            return Ok(finish(next, ls.objective, iter + 1, true, merit_trace));
        }

        let Ok(next_grad) = gradient(&next, scenario) else {
            return Ok(finish(next, ls.objective, iter + 1, false, merit_trace));
        };
        u = dfp_update(&u, &d_theta, &(&next_grad - &grad));
        vars = next;
        grad = next_grad;
        f = ls.objective;
    }
    Ok(finish(vars, f, opts.max_iterations, false, merit_trace))
}
