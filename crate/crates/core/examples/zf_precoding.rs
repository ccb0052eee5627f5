// Zero-forcing on a random 3-user, 4-antenna channel: the closed-form sum
// rate equals the rate obtained by building the precoder and evaluating
// every user's SINR.

use std::error::Error;

use mra_opt::zf::{sinr, sum_rate, zf_precoder, zf_sum_rate};
use mra_opt::C64;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let h = DMatrix::from_fn(3, 4, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let (power, noise) = (4.0, 1.0);

    let precoder = zf_precoder(&h, power)?;
    let leakage = &h * &precoder.f;
    println!("|H F| (off-diagonal entries vanish):");
    for i in 0..3 {
        let row: Vec<String> = (0..3).map(|k| format!("{:9.2e}", leakage[(i, k)].norm())).collect();
        println!("  {}", row.join(" "));
    }
    for k in 0..3 {
        println!("SINR_{k} = {:.4}", sinr(&h, &precoder, noise, k)?);
    }
    println!("closed form sum rate = {:.9}", zf_sum_rate(&h, power, noise)?);
    println!("SINR pipeline        = {:.9}", sum_rate(&h, &precoder, noise)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
