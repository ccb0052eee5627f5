//! Seeded Monte-Carlo comparison of the four antenna schemes.
//!
//! Each trial draws one set of user paths from its own ChaCha stream and
//! reuses it for every scheme and every sweep point, so scheme differences
//! are paired.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{AntennaLayout, PathComponent, Scenario};
use crate::error::{Error, Result};
use crate::sqp::{optimize, Bounds, OptOptions, Scheme};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepAxis {
    Snr,
    PsiMax,
    R,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 3] = [SweepAxis::Snr, SweepAxis::PsiMax, SweepAxis::R];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Snr => "snr",
            SweepAxis::PsiMax => "psi_max",
            SweepAxis::R => "r",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "snr" => Ok(SweepAxis::Snr),
            "psi_max" | "psi" => Ok(SweepAxis::PsiMax),
            "r" => Ok(SweepAxis::R),
            other => Err(format!("unknown sweep axis `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_x: usize,
    pub n_z: usize,
    pub users: usize,
    pub paths: usize,
    pub snr_db_list: Vec<f64>,
    pub r_list: Vec<f64>,
    pub psi_max_list: Vec<f64>,
    /// SNR used by the `psi_max` and `r` sweeps, dB.
    pub fixed_snr_db: f64,
    /// Region multiplier used by the `snr` and `psi_max` sweeps.
    pub fixed_r: f64,
    /// Rotation limit used by the `snr` and `r` sweeps.
    pub fixed_psi_max: f64,
    pub frequency_hz: f64,
    pub trials: usize,
    pub seed: u64,
    pub opts: OptOptions,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_x: 2,
            n_z: 2,
            users: 4,
            paths: 4,
            snr_db_list: (0..9).map(|i| -4.0 + 2.0 * i as f64).collect(),
            r_list: (1..=10).map(f64::from).collect(),
            psi_max_list: (1..=8).map(|k| k as f64 * PI / 16.0).collect(),
            fixed_snr_db: 1.0,
            fixed_r: 4.0,
            fixed_psi_max: PI / 4.0,
            frequency_hz: crate::DEFAULT_CARRIER_HZ,
            trials: 200,
            seed: 1,
            opts: OptOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn num_antennas(&self) -> usize {
        self.n_x * self.n_z
    }

    pub fn wavelength(&self) -> f64 {
        crate::wavelength(self.frequency_hz)
    }

    pub fn axis_values(&self, axis: SweepAxis) -> &[f64] {
        match axis {
            SweepAxis::Snr => &self.snr_db_list,
            SweepAxis::PsiMax => &self.psi_max_list,
            SweepAxis::R => &self.r_list,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.trials == 0 {
            return Err("trials must be at least 1".into());
        }
        if self.n_x == 0 || self.n_z == 0 {
            return Err("n_x and n_z must be at least 1".into());
        }
        if self.users == 0 || self.paths == 0 {
            return Err("users and paths must be at least 1".into());
        }
        if self.users > self.num_antennas() {
            return Err(format!(
                "users ({}) exceed antennas ({}); zero forcing needs N >= K",
                self.users,
                self.num_antennas()
            ));
        }
        for axis in SweepAxis::ALL {
            if self.axis_values(axis).is_empty() {
                return Err(format!("{axis} list is empty"));
            }
        }
        let all_finite = self
            .snr_db_list
            .iter()
            .chain(&self.r_list)
            .chain(&self.psi_max_list)
            .chain([&self.fixed_snr_db, &self.fixed_r, &self.fixed_psi_max])
            .all(|v| v.is_finite());
        if !all_finite {
            return Err("sweep values must be finite".into());
        }
        if self.r_list.iter().chain([&self.fixed_r]).any(|&r| r < 0.0) {
            return Err("r values must be nonnegative".into());
        }
        if self.psi_max_list.iter().chain([&self.fixed_psi_max]).any(|&p| p < 0.0) {
            return Err("psi_max values must be nonnegative".into());
        }
        if !(self.frequency_hz > 0.0) {
            return Err("frequency_hz must be positive".into());
        }
        Ok(())
    }

    /// Random stream for one trial, independent of every other trial.
    pub fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

/// Draws `K x L` paths with virtual angles uniform on `[0, 1]` and
/// `CN(0, 1)` gains; noise variance 1 and power `10^(snr_db / 10)`.
pub fn generate_scenario<R: Rng + ?Sized>(rng: &mut R, config: &ExperimentConfig, snr_db: f64) -> Result<Scenario> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let users = (0..config.users)
        .map(|_| {
            (0..config.paths)
                .map(|_| {
                    let theta = rng.random::<f64>();
                    let phi = rng.random::<f64>();
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    PathComponent::new(C64::new(s * re, s * im), theta, phi)
                })
                .collect()
        })
        .collect();
    Scenario::new(users, config.wavelength(), snr_to_power(snr_db), 1.0)
}

pub fn snr_to_power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointOutcome {
    pub sum_rate: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Optimises one scheme from the centred half-wavelength grid with
/// `x_max = z_max = r lambda / 2` and both rotation limits `psi_max`.
pub fn run_point(
    scenario: &Scenario,
    scheme: Scheme,
    r: f64,
    psi_max: f64,
    config: &ExperimentConfig,
) -> Result<PointOutcome> {
    let lambda = scenario.wavelength;
    let init = AntennaLayout::half_wavelength_grid(config.n_x, config.n_z, lambda)?;
    let bounds = Bounds::for_region(r, psi_max, lambda);
    let res = optimize(scenario, scheme, &bounds, &init, &config.opts)?;
    Ok(PointOutcome {
        sum_rate: res.sum_rate,
        iterations: res.iterations,
        converged: res.converged,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub trial: usize,
    pub sum_rate: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    /// Sorted by (scheme, axis value, trial).
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn rows_for(&self, scheme: Scheme) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.scheme == scheme)
    }

    /// Rates for one (scheme, axis value), in trial order.
    pub fn rates(&self, scheme: Scheme, axis_value: f64) -> Vec<f64> {
        self.rows_for(scheme)
            .filter(|r| r.axis_value == axis_value)
            .map(|r| r.sum_rate)
            .collect()
    }
}

/// Runs every scheme at every value of `axis` for every trial. Trials run in
/// parallel; output order does not depend on scheduling.
pub fn run_sweep(config: &ExperimentConfig, axis: SweepAxis) -> Result<SweepResult> {
    config.validate().map_err(Error::InvalidScenario)?;
    let values = config.axis_values(axis).to_vec();
    let per_trial: Vec<Vec<SweepRow>> = (0..config.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<SweepRow>> {
            let mut rng = config.trial_rng(trial);
            let base = generate_scenario(&mut rng, config, config.fixed_snr_db)?;
            let mut rows = Vec::with_capacity(values.len() * Scheme::ALL.len());
            for &value in &values {
                let (scenario, r, psi) = match axis {
                    SweepAxis::Snr => {
                        let mut s = base.clone();
                        s.power = snr_to_power(value);
                        (s, config.fixed_r, config.fixed_psi_max)
                    }
                    SweepAxis::PsiMax => (base.clone(), config.fixed_r, value),
                    SweepAxis::R => (base.clone(), value, config.fixed_psi_max),
                };
                for scheme in Scheme::ALL {
                    let out = run_point(&scenario, scheme, r, psi, config)?;
                    rows.push(SweepRow {
                        scheme,
                        axis,
                        axis_value: value,
                        trial,
                        sum_rate: out.sum_rate,
                        iterations: out.iterations,
                        converged: out.converged,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<SweepRow> = per_trial.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.scheme
            .cmp(&b.scheme)
            .then(a.axis_value.total_cmp(&b.axis_value))
            .then(a.trial.cmp(&b.trial))
    });
    Ok(SweepResult { axis, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub scheme: Scheme,
    pub axis_value: f64,
    pub mean: f64,
    pub std_error: f64,
    pub count: usize,
}

/// Mean and standard error (sample std / sqrt(n), zero for n = 1).
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per (scheme, axis value) mean and standard error over trials.
pub fn aggregate(result: &SweepResult) -> Vec<AggregateRow> {
    let mut keys: Vec<(Scheme, f64)> = result.rows.iter().map(|r| (r.scheme, r.axis_value)).collect();
    keys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    keys.dedup();
    keys.into_iter()
        .map(|(scheme, axis_value)| {
            let rates = result.rates(scheme, axis_value);
            let (mean, std_error) = mean_and_stderr(&rates);
            AggregateRow {
                scheme,
                axis_value,
                mean,
                std_error,
                count: rates.len(),
            }
        })
        .collect()
}

/// Mean and standard error of the per-trial difference `better - worse` at
/// one axis value.
pub fn paired_difference(result: &SweepResult, better: Scheme, worse: Scheme, axis_value: f64) -> (f64, f64) {
    let a = result.rates(better, axis_value);
    let b = result.rates(worse, axis_value);
    let diffs: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    mean_and_stderr(&diffs)
}
