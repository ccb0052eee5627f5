//! Independent reference computations shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use mra_opt::channel::{AntennaLayout, PathComponent};
use mra_opt::qp::QpProblem;
use mra_opt::C64;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn complex_normal<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_channel<R: Rng>(rng: &mut R, k: usize, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(k, n, |_, _| complex_normal(rng))
}

/// Straight-line evaluation of the multipath channel, one scalar at a time.
pub fn naive_channel(paths: &[PathComponent], layout: &AntennaLayout, wavelength: f64) -> Vec<C64> {
    let mut h = vec![C64::new(0.0, 0.0); layout.x.len()];
    for (n, hn) in h.iter_mut().enumerate() {
        for p in paths {
            let a = p.theta - layout.psi_theta[n];
            let b = p.phi - layout.psi_phi[n];
            let u = if a.abs() <= 1.0 && b.abs() <= 1.0 {
                (PI * a / 2.0).cos() * (PI * b / 2.0).cos()
            } else {
                0.0
            };
            let phase = 2.0 * PI / wavelength * (p.phi * layout.x[n] + p.theta * layout.z[n]);
            *hn += p.beta * C64::new(phase.cos(), phase.sin()) * u;
        }
        *hn /= (paths.len() as f64).sqrt();
    }
    h
}

/// Sum rate through explicit SINR loops over `|h_k^H f_i|^2`.
pub fn naive_sum_rate(h: &DMatrix<C64>, f: &DMatrix<C64>, noise: f64) -> f64 {
    let k = h.nrows();
    let n = h.ncols();
    let mut total = 0.0;
    for user in 0..k {
        let mut powers = vec![0.0; k];
        for (i, p) in powers.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..n {
                acc += h[(user, j)] * f[(j, i)];
            }
            *p = acc.norm_sqr();
        }
        let interference: f64 = (0..k).filter(|&i| i != user).map(|i| powers[i]).sum();
        total += (1.0 + powers[user] / (interference + noise)).log2();
    }
    total
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Minimiser of a small strictly convex QP found by trying every subset of
/// constraints as equalities and keeping the feasible, dual-feasible point
/// with the lowest objective.
pub fn enumerate_qp(p: &QpProblem) -> Option<DVector<f64>> {
    let d = p.dim();
    let m = p.num_constraints();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
        let w = rows.len();
        if w > d {
            continue;
        }
        let mut a = vec![vec![0.0; d + w]; d + w];
        let mut rhs = vec![0.0; d + w];
        for i in 0..d {
            for j in 0..d {
                a[i][j] = p.u[(i, j)];
            }
            rhs[i] = -p.c[i];
        }
        for (r, &ci) in rows.iter().enumerate() {
            for j in 0..d {
                a[d + r][j] = p.a[(ci, j)];
                a[j][d + r] = p.a[(ci, j)];
            }
            rhs[d + r] = p.b[ci];
        }
        let Some(sol) = solve_dense(a, rhs) else { continue };
        let s = DVector::from_row_slice(&sol[..d]);
        let primal = (0..m).all(|i| (p.a.row(i) * &s)[0] <= p.b[i] + 1e-9);
        let dual = sol[d..].iter().all(|&mu| mu >= -1e-9);
        if primal && dual {
            let obj = p.objective(&s);
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, s));
            }
        }
    }
    best.map(|(_, s)| s)
}

/// Random strictly convex QP with `s = 0` feasible.
pub fn random_qp<R: Rng>(rng: &mut R) -> QpProblem {
    let d = rng.random_range(1..=4);
    let m = rng.random_range(0..=6);
    let g = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let u = &g * g.transpose() + DMatrix::identity(d, d) * 0.1;
    let c = DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
    let a = DMatrix::from_fn(m, d, |_, _| rng.random_range(-1.0..1.0));
    let b = DVector::from_fn(m, |_, _| rng.random_range(0.0..1.0));
    QpProblem::new(u, c, a, b).unwrap()
}

/// DFP update evaluated entry by entry.
pub fn dfp_direct(u: &DMatrix<f64>, dt: &DVector<f64>, dq: &DVector<f64>) -> DMatrix<f64> {
    let n = dt.len();
    let mut uq = vec![0.0; n];
    let mut qu = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            uq[i] += u[(i, j)] * dq[j];
            qu[i] += dq[j] * u[(j, i)];
        }
    }
    let sy: f64 = (0..n).map(|i| dq[i] * dt[i]).sum();
    let quq: f64 = (0..n).map(|i| dq[i] * uq[i]).sum();
    DMatrix::from_fn(n, n, |i, j| u[(i, j)] + dt[i] * dt[j] / sy - uq[i] * qu[j] / quq)
}

/// Random layout of `n` antennas inside `|x|, |z| <= half_width` with pairwise
/// spacing of at least `wavelength / 2`, and rotations in `[-psi_max, psi_max]`.
pub fn random_feasible_layout<R: Rng>(rng: &mut R, n: usize, half_width: f64, psi_max: f64, wavelength: f64) -> AntennaLayout {
    loop {
        let pos: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(-half_width..half_width), rng.random_range(-half_width..half_width)))
            .collect();
        let ok = (0..n).all(|i| (i + 1..n).all(|j| (pos[i].0 - pos[j].0).hypot(pos[i].1 - pos[j].1) >= wavelength / 2.0 + 1e-6));
        if ok {
            return AntennaLayout {
                x: pos.iter().map(|p| p.0).collect(),
                z: pos.iter().map(|p| p.1).collect(),
                psi_theta: (0..n).map(|_| rng.random_range(-psi_max..psi_max)).collect(),
                psi_phi: (0..n).map(|_| rng.random_range(-psi_max..psi_max)).collect(),
            };
        }
    }
}
