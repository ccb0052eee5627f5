// Solves `min 1/2 |s|^2 - 2 s_0` over the triangle `s_0 + s_1 <= 1`,
// `s >= 0` with the active-set solver.

use std::error::Error;

use mra_opt::qp::{solve_qp, QpProblem};
use nalgebra::{DMatrix, DVector};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let problem = QpProblem::new(
        DMatrix::identity(2, 2),
        DVector::from_row_slice(&[-2.0, 0.0]),
        DMatrix::from_row_slice(3, 2, &[1.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
        DVector::from_row_slice(&[1.0, 0.0, 0.0]),
    )?;
    let sol = solve_qp(&problem)?;
    println!("status      {:?}", sol.status);
    println!("minimiser   [{:.6}, {:.6}]", sol.s[0], sol.s[1]);
    println!("active set  {:?}", sol.active_set);
    println!("multipliers {:?}", sol.multipliers.as_slice());
    println!("iterations  {}", sol.iterations);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
