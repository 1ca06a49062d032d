//! Runs the same three formulas against the classical simple random walk
//! with the same absorbing boundaries, showing how the verdicts differ
//! from the quantum walk: the classical absorption probability at s0 from
//! s1 is 0.95, far from the quantum limit 1/sqrt(2).

use std::collections::BTreeSet;

use anyhow::Result;
use qmcheck::checker::{Analyzer, CheckOptions};
use qmcheck::cli::{builtin_model, Builtin};
use qmcheck::mltl::parse;
use qmcheck::models::Direction;

fn main() -> Result<()> {
    let cases = [
        (1, "F G ap(abs0)"),
        (10, "G ap(p20lt)"),
        (10, "G (ap(p19gt) -> ap(p1gt))"),
    ];

    for (start, formula) in cases {
        let (g, aps) = builtin_model(Builtin::Cwalk, 20, start, Direction::Right)?;
        let declared: BTreeSet<String> = aps.iter().map(|a| a.name.clone()).collect();
        let phi = parse(formula, &declared)?;
        let analyzer = Analyzer::new(&g, &aps, CheckOptions::default())?;

        println!("start s{start}, formula {formula}");
        for eps in [0.5, 0.25, 0.125] {
            let v = analyzer.check(&phi, eps)?;
            println!("  epsilon {eps:<6} verdict {:<8} K = {}", v.value.to_string(), v.k_eps);
        }
    }
    Ok(())
}
