// Builds the channel of one user seen by a 2x2 half-wavelength grid and
// shows how rotating the elements toward the strongest path raises the
// channel gain.

use std::error::Error;

use mra_opt::channel::{build_channel, AntennaLayout, PathComponent};
use mra_opt::{wavelength, C64, DEFAULT_CARRIER_HZ};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let lambda = wavelength(DEFAULT_CARRIER_HZ);
    let paths = [
        PathComponent::new(C64::new(1.2, -0.4), 0.7, 0.6),
        PathComponent::from_physical(C64::new(-0.3, 0.5), 1.1, 0.4),
    ];
    let mut layout = AntennaLayout::half_wavelength_grid(2, 2, lambda)?;
    println!("lambda = {lambda:.6} m");

    let h = build_channel(&paths, &layout, lambda)?;
    println!("unrotated |h|^2 = {:.4}", h.norm_squared());

    for n in 0..layout.len() {
        layout.psi_theta[n] = paths[0].theta;
        layout.psi_phi[n] = paths[0].phi;
    }
    let h = build_channel(&paths, &layout, lambda)?;
    println!("rotated   |h|^2 = {:.4}", h.norm_squared());
    for (n, v) in h.iter().enumerate() {
        println!("  h[{n}] = {:+.4} {:+.4}j", v.re, v.im);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
