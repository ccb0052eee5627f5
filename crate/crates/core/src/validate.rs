//! Fast self-checks run by `mra-opt validate`.

use std::f64::consts::FRAC_PI_4;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::{AntennaLayout, PathComponent, Scenario};
use crate::qp::{solve_qp, QpProblem, QpStatus};
use crate::sqp::{dfp_update, optimize, Bounds, OptOptions, Scheme};
use crate::zf::{sum_rate, zf_precoder, zf_sum_rate};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }
}

pub fn random_channel<R: Rng>(rng: &mut R, k: usize, n: usize) -> DMatrix<C64> {
    DMatrix::from_fn(k, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

fn check_zf(rng: &mut ChaCha8Rng) -> (CheckOutcome, CheckOutcome) {
    let mut worst_rel = 0.0f64;
    let mut worst_leak = 0.0f64;
    let mut failed = None;
    for _ in 0..10 {
        let h = random_channel(rng, 3, 4);
        let (closed, f) = match (zf_sum_rate(&h, 2.0, 1.0), zf_precoder(&h, 2.0)) {
            (Ok(c), Ok(f)) => (c, f),
            (Err(e), _) | (_, Err(e)) => {
                failed = Some(e.to_string());
                break;
            }
        };
        let direct = sum_rate(&h, &f, 1.0).unwrap_or(f64::NAN);
        worst_rel = worst_rel.max((closed - direct).abs() / direct.abs().max(1e-300));
        let hf = &h * &f.f;
        for i in 0..3 {
            for k in 0..3 {
                if i != k {
                    let leak = hf[(i, k)].norm() / (h.row(i).norm() * f.f.column(k).norm());
                    worst_leak = worst_leak.max(leak);
                }
            }
        }
    }
    if let Some(e) = failed {
        let fail = |name| CheckOutcome::new(name, false, e.clone());
        return (fail("zf_closed_form"), fail("zf_zero_interference"));
    }
    (
        CheckOutcome::new(
            "zf_closed_form",
            worst_rel <= 1e-9,
            format!("max relative gap {worst_rel:.3e}"),
        ),
        CheckOutcome::new(
            "zf_zero_interference",
            worst_leak <= 1e-9,
            format!("max normalised leakage {worst_leak:.3e}"),
        ),
    )
}

/// Exhaustive active-set enumeration for small QPs with positive definite `U`.
pub fn enumerate_qp(problem: &QpProblem) -> Option<DVector<f64>> {
    let d = problem.dim();
    let m = problem.num_constraints();
    let mut best: Option<(f64, DVector<f64>)> = None;
    for subset in 0u32..(1 << m) {
        let rows: Vec<usize> = (0..m).filter(|i| subset & (1 << i) != 0).collect();
        let w = rows.len();
        if w > d {
            continue;
        }
        let mut kkt = DMatrix::zeros(d + w, d + w);
        kkt.view_mut((0, 0), (d, d)).copy_from(&problem.u);
        let mut rhs = DVector::zeros(d + w);
        rhs.rows_mut(0, d).copy_from(&(-&problem.c));
        for (r, &i) in rows.iter().enumerate() {
            for j in 0..d {
                kkt[(d + r, j)] = problem.a[(i, j)];
                kkt[(j, d + r)] = problem.a[(i, j)];
            }
            rhs[d + r] = problem.b[i];
        }
        let Some(sol) = kkt.lu().solve(&rhs) else { continue };
        if sol.iter().any(|v| !v.is_finite()) {
            continue;
        }
        let s = sol.rows(0, d).into_owned();
        let feasible = problem.max_violation(&s) <= 1e-9;
        let dual_ok = sol.rows(d, w).iter().all(|&mu| mu >= -1e-9);
        if feasible && dual_ok {
            let obj = problem.objective(&s);
            if best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, s));
            }
        }
    }
    best.map(|(_, s)| s)
}

pub fn random_qp<R: Rng>(rng: &mut R) -> QpProblem {
    let d = rng.random_range(1..=4);
    let m = rng.random_range(0..=6);
    let g = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
    let u = &g * g.transpose() + DMatrix::identity(d, d) * 0.1;
    let c = DVector::from_fn(d, |_, _| rng.random_range(-2.0..2.0));
    let a = DMatrix::from_fn(m, d, |_, _| rng.random_range(-1.0..1.0));
    let b = DVector::from_fn(m, |_, _| rng.random_range(0.0..1.0));
    QpProblem::new(u, c, a, b).expect("consistent dimensions")
}

fn check_qp(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let p = random_qp(rng);
        let sol = match solve_qp(&p) {
            Ok(s) if s.status == QpStatus::Optimal => s,
            other => return CheckOutcome::new("qp_oracle", false, format!("solver returned {other:?}")),
        };
        let Some(oracle) = enumerate_qp(&p) else {
            return CheckOutcome::new("qp_oracle", false, "enumeration found no KKT point".into());
        };
        worst = worst.max((&sol.s - oracle).amax());
    }
    CheckOutcome::new("qp_oracle", worst <= 1e-6, format!("max minimiser gap {worst:.3e}"))
}

fn check_dfp() -> CheckOutcome {
    let u = DMatrix::<f64>::identity(4, 4);
    let v = DVector::from_row_slice(&[0.5, -1.0, 2.0, 0.25]);
    let gap = (dfp_update(&u, &v, &v) - u).amax();
    CheckOutcome::new("dfp_identity", gap <= 1e-14, format!("max deviation {gap:.3e}"))
}

fn check_tiny_optimize() -> CheckOutcome {
    let lambda = crate::wavelength(crate::DEFAULT_CARRIER_HZ);
    let theta = 0.45;
    let scenario = match Scenario::new(
        vec![vec![PathComponent::new(C64::new(0.9, -0.4), theta, 0.0)]],
        lambda,
        1.0,
        1.0,
    ) {
        Ok(s) => s,
        Err(e) => return CheckOutcome::new("tiny_optimize", false, e.to_string()),
    };
    let init = AntennaLayout::at_positions(&[(0.0, 0.0)]).expect("one antenna");
    let bounds = Bounds::for_region(1.0, FRAC_PI_4, lambda);
    match optimize(&scenario, Scheme::Ra, &bounds, &init, &OptOptions::default()) {
        Ok(res) => {
            let best = (1.0 + 0.97f64).log2();
            let gap = (res.sum_rate - best).abs();
            let ok = gap <= 1e-4 && res.max_violation <= 1e-6;
            CheckOutcome::new("tiny_optimize", ok, format!("rate gap {gap:.3e} after {} iterations", res.iterations))
        }
        Err(e) => CheckOutcome::new("tiny_optimize", false, e.to_string()),
    }
}

/// Runs every check with a fixed seed.
pub fn run_checks() -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (closed_form, interference) = check_zf(&mut rng);
    vec![closed_form, interference, check_qp(&mut rng), check_dfp(), check_tiny_optimize()]
}

/// 0 when every check passed, 3 otherwise.
pub fn exit_code(checks: &[CheckOutcome]) -> i32 {
    if checks.iter().all(|c| c.passed) {
        0
    } else {
        3
    }
}
