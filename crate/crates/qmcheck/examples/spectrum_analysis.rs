//! Spectral analysis of small channels: peripheral phases, rational
//! approximants, periodic stability, and the two truncation bounds.
//!
//! A diagonal unitary with phase 1/3 cycles with period 3; the same
//! construction with phase 1/sqrt(2) has no rational phase structure and
//! is rejected as undetermined.

use anyhow::Result;
use qmcheck::linalg::{C64, ComplexMatrix, DensityMatrix, Qmc, SuperOperator, Tolerances};
use qmcheck::spectral::{
    check_stability_with, decompose, stable_states_with, truncation_bound,
    truncation_bound_simulated, DEFAULT_Q_MAX,
};

fn phase_channel(psi: f64) -> Result<Qmc> {
    let tol = Tolerances::default();
    let mut u = ComplexMatrix::identity(2);
    u.set(1, 1, C64::from_polar(1.0, std::f64::consts::TAU * psi));
    let plus = ComplexMatrix::from_real_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
    Ok(Qmc::new(SuperOperator::new(vec![u], &tol)?, DensityMatrix::new(plus, &tol)?)?)
}

fn main() -> Result<()> {
    let tol = Tolerances::default();

    for (label, psi) in [("1/3", 1.0 / 3.0), ("1/sqrt(2)", 1.0 / std::f64::consts::SQRT_2)] {
        let g = phase_channel(psi)?;
        let sd = decompose(&g.transition, &tol)?;
        let report = check_stability_with(&sd, &g.initial, DEFAULT_Q_MAX)?;
        println!("phase {label}:");
        println!("  peripheral eigenvalues: {}", sd.peripheral_indices().len());
        for p in &report.contributing_phases {
            let approx = match p.rational {
                Some((num, den)) => format!("{num}/{den}"),
                None => "none".into(),
            };
            println!("  contributing phase {:.9} ~ {approx}", p.phase);
        }
        match report.period {
            Some(period) => println!("  stable with period {period}"),
            None => println!("  undetermined: {}", report.witness.as_deref().unwrap_or("?")),
        }
    }

    // A contracting channel shows the two truncation bounds diverging:
    // the closed-form bound is conservative, simulation finds the first
    // confirmed entry into the epsilon tube.
    let damp = 0.6_f64;
    let k0 = ComplexMatrix::from_real_rows(vec![vec![1.0, 0.0], vec![0.0, damp.sqrt()]]);
    let k1 = ComplexMatrix::from_real_rows(vec![vec![0.0, (1.0 - damp).sqrt()], vec![0.0, 0.0]]);
    let excited = ComplexMatrix::from_real_rows(vec![vec![0.0, 0.0], vec![0.0, 1.0]]);
    let g = Qmc::new(
        SuperOperator::new(vec![k0, k1], &tol)?,
        DensityMatrix::new(excited, &tol)?,
    )?;
    let sd = decompose(&g.transition, &tol)?;
    let report = check_stability_with(&sd, &g.initial, DEFAULT_Q_MAX)?;
    let states = stable_states_with(&sd, &g.initial, &report)?;
    println!("amplitude damping (rate {}):", 1.0 - damp);
    for eps in [0.5, 0.1, 0.01, 0.001] {
        let analytic = truncation_bound(&sd, &report, eps)?;
        let simulated = truncation_bound_simulated(&g, &states, eps, 10_000)?;
        println!("  epsilon {eps:<6} K analytic {analytic:<4} K simulated {simulated}");
    }
    Ok(())
}
