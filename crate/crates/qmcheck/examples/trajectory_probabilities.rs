//! Tracks the absorption probability at position 0 of the Hadamard walk
//! started at |s1>|R> and locates the step after which it stays within
//! 0.1 of the limit 1/sqrt(2) = 0.70711.

use std::f64::consts::FRAC_1_SQRT_2;

use anyhow::Result;
use qmcheck::checker::trajectory;
use qmcheck::cli::{builtin_model, Builtin};
use qmcheck::linalg::Tolerances;
use qmcheck::mltl::measure;
use qmcheck::models::Direction;

fn main() -> Result<()> {
    let tol = Tolerances::default();
    let (g, aps) = builtin_model(Builtin::Qwalk, 20, 1, Direction::Right)?;
    let abs0 = aps.iter().find(|a| a.name == "abs0").expect("builtin prop");

    let states = trajectory(&g, 501)?;
    let values: Vec<f64> =
        states.iter().map(|rho| measure(rho, abs0, &tol)).collect::<Result<_, _>>()?;

    println!("step  tr(M_s0 rho)");
    for (n, v) in values.iter().enumerate().step_by(50) {
        println!("{n:>4}  {v:.6}");
    }

    let entry = values
        .iter()
        .rposition(|v| (v - FRAC_1_SQRT_2).abs() > 0.1)
        .map_or(0, |k| k + 1);
    println!("within 0.1 of 1/sqrt(2) from step {entry} onward (horizon 500)");
    println!("final value {:.6}, limit {FRAC_1_SQRT_2:.6}", values[500]);
    Ok(())
}
