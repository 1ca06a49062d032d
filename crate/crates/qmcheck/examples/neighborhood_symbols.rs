//! Shows how one state's epsilon-neighborhood abstracts to symbol sets:
//! the cheap Frobenius range versus the refined traceless-radius range,
//! and how shrinking epsilon collapses the ambiguous propositions.

use anyhow::Result;
use qmcheck::linalg::{ComplexMatrix, DensityMatrix, MeasurementOperator, Tolerances};
use qmcheck::mltl::{AtomicProp, ProbInterval};
use qmcheck::neighborhood::{ap_range, classify, neighborhood, RangeMode};

fn main() -> Result<()> {
    let tol = Tolerances::default();
    let rho = DensityMatrix::new(
        ComplexMatrix::from_real_rows(vec![vec![0.7, 0.2], vec![0.2, 0.3]]),
        &tol,
    )?;
    let aps = [
        AtomicProp::new(
            "bulk",
            MeasurementOperator::basis_projector(2, 0),
            ProbInterval::closed(0.6, 0.8)?,
        ),
        AtomicProp::new(
            "tail",
            MeasurementOperator::basis_projector(2, 1),
            ProbInterval::new(0.0, 0.25, true, false)?,
        ),
    ];

    println!("state diag (0.7, 0.3) with coherence 0.2");
    for eps in [0.2, 0.05, 0.01] {
        println!("epsilon {eps}:");
        for mode in [RangeMode::Cheap, RangeMode::Refined] {
            let (lo, hi) = ap_range(&rho, &aps[0].operator, eps, mode, &tol)?;
            println!("  {mode:?} range for bulk: [{lo:.4}, {hi:.4}]");
        }
        for status in classify(&rho, eps, &aps, RangeMode::Cheap, &tol)? {
            println!("  {} is {}", status.ap, status.status);
        }
        let symbols = neighborhood(&rho, eps, &aps, RangeMode::Cheap, &tol)?;
        println!("  symbol set {symbols} ({} letters)", symbols.count());
    }
    Ok(())
}
