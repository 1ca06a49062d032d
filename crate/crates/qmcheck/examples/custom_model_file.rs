//! Builds a model programmatically, round-trips it through the JSON model
//! file format, and checks two formulas on the loaded copy.
//!
//! The model is a two-state chain that deterministically alternates, so
//! "the mass is on s0" holds at every other step.

use std::collections::BTreeSet;

use anyhow::Result;
use qmcheck::checker::{model_check, VerdictValue};
use qmcheck::cli::ModelFile;
use qmcheck::linalg::{MeasurementOperator, Tolerances};
use qmcheck::mltl::{parse, AtomicProp, ProbInterval};
use qmcheck::models::classical_mc_to_qmc;

fn main() -> Result<()> {
    let tol = Tolerances::default();
    let p = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let g = classical_mc_to_qmc(&p, &[1.0, 0.0], &tol)?;
    let aps = vec![AtomicProp::new(
        "on0",
        MeasurementOperator::basis_projector(2, 0),
        ProbInterval::closed(0.8, 1.0)?,
    )];

    let dir = std::env::temp_dir().join("qmcheck_custom_model");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("swap.json");
    ModelFile::from_parts(&g, &aps).save(&path)?;
    println!("wrote {}", path.display());

    let (g2, aps2) = ModelFile::load(&path)?.into_parts(&tol)?;
    let declared: BTreeSet<String> = aps2.iter().map(|a| a.name.clone()).collect();

    for formula in ["G F ap(on0)", "G ap(on0)"] {
        let phi = parse(formula, &declared)?;
        let v = model_check(&g2, &aps2, &phi, 0.1)?;
        print!("{formula}: {}", v.value);
        match (&v.value, &v.counterexample) {
            (VerdictValue::False, Some(cex)) => println!("  (violated by {cex})"),
            _ => println!(),
        }
    }
    Ok(())
}
