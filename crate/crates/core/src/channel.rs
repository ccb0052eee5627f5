//! Multipath channel model for movable and rotatable antennas.
//!
//! Every user sees `L` far-field paths. A path contributes a steering
//! vector that depends on antenna positions in the x-z plane, weighted
//! per antenna by a cosine element pattern evaluated at the path's virtual
//! angles minus that antenna's rotation offsets.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Minimum inter-antenna spacing tolerance when a layout is checked, meters.
pub const SPACING_TOL: f64 = 1e-9;

/// One propagation path: complex gain plus two virtual angles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathComponent {
    pub beta: C64,
    /// Virtual elevation angle, `cos(elevation)`.
    pub theta: f64,
    /// Virtual azimuth angle, `cos(azimuth) * sin(elevation)`.
    pub phi: f64,
}

impl PathComponent {
    pub fn new(beta: C64, theta: f64, phi: f64) -> Self {
        Self { beta, theta, phi }
    }

    /// Builds a path from physical elevation/azimuth angles in radians.
    pub fn from_physical(beta: C64, elevation: f64, azimuth: f64) -> Self {
        let (theta, phi) = virtual_angles(elevation, azimuth);
        Self { beta, theta, phi }
    }
}

/// Antenna positions (meters) and rotation offsets (virtual-angle units).
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaLayout {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub psi_theta: Vec<f64>,
    pub psi_phi: Vec<f64>,
}

impl AntennaLayout {
    pub fn new(x: Vec<f64>, z: Vec<f64>, psi_theta: Vec<f64>, psi_phi: Vec<f64>) -> Result<Self> {
        let layout = Self {
            x,
            z,
            psi_theta,
            psi_phi,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// Unrotated antennas at the given positions.
    pub fn at_positions(positions: &[(f64, f64)]) -> Result<Self> {
        let n = positions.len();
        Self::new(
            positions.iter().map(|p| p.0).collect(),
            positions.iter().map(|p| p.1).collect(),
            vec![0.0; n],
            vec![0.0; n],
        )
    }

    /// Uniform `n_x` by `n_z` grid with `wavelength / 2` spacing centred at the
    /// origin and zero rotation. Antenna `iz * n_x + ix` sits at column `ix`,
    /// row `iz`.
    pub fn half_wavelength_grid(n_x: usize, n_z: usize, wavelength: f64) -> Result<Self> {
        if n_x == 0 || n_z == 0 {
            return Err(Error::InvalidLayout("grid dimensions must be positive".into()));
        }
        if !(wavelength > 0.0) {
            return Err(Error::InvalidWavelength(wavelength));
        }
        let d = wavelength / 2.0;
        let cx = (n_x as f64 - 1.0) / 2.0;
        let cz = (n_z as f64 - 1.0) / 2.0;
        let mut positions = Vec::with_capacity(n_x * n_z);
        for iz in 0..n_z {
            for ix in 0..n_x {
                positions.push(((ix as f64 - cx) * d, (iz as f64 - cz) * d));
            }
        }
        Self::at_positions(&positions)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.x.len();
        if n == 0 {
            return Err(Error::InvalidLayout("layout has no antennas".into()));
        }
        for (name, v) in [("z", &self.z), ("psi_theta", &self.psi_theta), ("psi_phi", &self.psi_phi)] {
            if v.len() != n {
                return Err(Error::InvalidLayout(format!(
                    "{name} has {} entries, expected {n}",
                    v.len()
                )));
            }
        }
        Ok(())
    }

    /// Smallest pairwise antenna distance, `f64::INFINITY` for one antenna.
    pub fn min_spacing(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                best = best.min((self.x[i] - self.x[j]).hypot(self.z[i] - self.z[j]));
            }
        }
        best
    }

    /// True when every pair is at least `wavelength / 2` apart (within 1e-9 m).
    pub fn satisfies_spacing(&self, wavelength: f64) -> bool {
        self.min_spacing() >= wavelength / 2.0 - SPACING_TOL
    }
}

/// K users' paths plus the link budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub users: Vec<Vec<PathComponent>>,
    pub wavelength: f64,
    /// Total transmit power, linear.
    pub power: f64,
    /// Noise variance, linear.
    pub noise_var: f64,
}

impl Scenario {
    pub fn new(users: Vec<Vec<PathComponent>>, wavelength: f64, power: f64, noise_var: f64) -> Result<Self> {
        let s = Self {
            users,
            wavelength,
            power,
            noise_var,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::InvalidScenario("no users".into()));
        }
        let l = self.users[0].len();
        if l == 0 {
            return Err(Error::EmptyPaths);
        }
        if self.users.iter().any(|u| u.len() != l) {
            return Err(Error::InvalidScenario("users have different path counts".into()));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::InvalidWavelength(self.wavelength));
        }
        if !(self.power > 0.0) || !(self.noise_var > 0.0) {
            return Err(Error::InvalidScenario("power and noise variance must be positive".into()));
        }
        Ok(())
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn paths_per_user(&self) -> usize {
        self.users.first().map_or(0, Vec::len)
    }
}

/// Maps physical elevation/azimuth (radians) to `(theta, phi)` virtual angles.
pub fn virtual_angles(elevation: f64, azimuth: f64) -> (f64, f64) {
    (elevation.cos(), azimuth.cos() * elevation.sin())
}

/// Steering vector `exp(j 2pi/lambda (phi x_n + theta z_n))` over the layout.
pub fn array_manifold(layout: &AntennaLayout, theta: f64, phi: f64, wavelength: f64) -> Result<DVector<C64>> {
    if !(wavelength > 0.0) {
        return Err(Error::InvalidWavelength(wavelength));
    }
    let k = 2.0 * PI / wavelength;
    Ok(DVector::from_iterator(
        layout.len(),
        layout
            .x
            .iter()
            .zip(&layout.z)
            .map(|(&x, &z)| C64::from_polar(1.0, k * (phi * x + theta * z))),
    ))
}

/// Cosine element pattern; zero outside the `|d| <= 1` support.
pub fn element_gain(d_theta: f64, d_phi: f64) -> f64 {
    if d_theta.abs() > 1.0 || d_phi.abs() > 1.0 {
        return 0.0;
    }
    // Clamp guards the edge where cos(pi/2) rounds to a tiny negative value.
    ((PI * d_theta / 2.0).cos() * (PI * d_phi / 2.0).cos()).max(0.0)
}

/// Channel vector `h = sqrt(1/L) sum_l beta_l a(theta_l, phi_l) .* u(theta_l, phi_l)`.
pub fn build_channel(paths: &[PathComponent], layout: &AntennaLayout, wavelength: f64) -> Result<DVector<C64>> {
    if paths.is_empty() {
        return Err(Error::EmptyPaths);
    }
    if !(wavelength > 0.0) {
        return Err(Error::InvalidWavelength(wavelength));
    }
    layout.validate()?;
    let k = 2.0 * PI / wavelength;
    let scale = (1.0 / paths.len() as f64).sqrt();
    let mut h = DVector::from_element(layout.len(), C64::new(0.0, 0.0));
    for p in paths {
        for n in 0..layout.len() {
            let gain = element_gain(p.theta - layout.psi_theta[n], p.phi - layout.psi_phi[n]);
            if gain == 0.0 {
                continue;
            }
            let phase = k * (p.phi * layout.x[n] + p.theta * layout.z[n]);
            h[n] += p.beta * C64::from_polar(gain, phase);
        }
    }
    Ok(h * C64::new(scale, 0.0))
}

/// Stacks `h_k^H` as row `k` of a K-by-N matrix.
pub fn build_channel_matrix(scenario: &Scenario, layout: &AntennaLayout) -> Result<DMatrix<C64>> {
    let n = layout.len();
    let mut hm = DMatrix::from_element(scenario.num_users(), n, C64::new(0.0, 0.0));
    for (k, paths) in scenario.users.iter().enumerate() {
        let h = build_channel(paths, layout, scenario.wavelength)?;
        for j in 0..n {
            hm[(k, j)] = h[j].conj();
        }
    }
    Ok(hm)
}
