// Optimises one random 4-user scenario under each antenna scheme and
// prints the achieved ZF sum rate and final layout.

use std::error::Error;
use std::f64::consts::FRAC_PI_4;

use mra_opt::channel::AntennaLayout;
use mra_opt::experiment::{generate_scenario, ExperimentConfig};
use mra_opt::sqp::{optimize, Bounds, OptOptions, Scheme};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = ExperimentConfig::default();
    let lambda = cfg.wavelength();
    let scenario = generate_scenario(&mut cfg.trial_rng(0), &cfg, 1.0)?;
    let init = AntennaLayout::half_wavelength_grid(2, 2, lambda)?;
    let bounds = Bounds::for_region(4.0, FRAC_PI_4, lambda);

    for scheme in Scheme::ALL {
        let res = optimize(&scenario, scheme, &bounds, &init, &OptOptions::default())?;
        println!(
            "{:<4} rate {:7.4} bits/s/Hz  iterations {:3}  converged {:5}  violation {:.1e}",
            scheme.name(),
            res.sum_rate,
            res.iterations,
            res.converged,
            res.max_violation
        );
        let layout = res.layout();
        for n in 0..layout.len() {
            println!(
                "     antenna {n}: x {:+.4} m  z {:+.4} m  psi ({:+.3}, {:+.3})",
                layout.x[n], layout.z[n], layout.psi_theta[n], layout.psi_phi[n]
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
