//! End-to-end verification: truncate the trajectory once it stays within
//! epsilon of its limit cycle, abstract the tail by symbolic neighborhoods,
//! and compare the resulting lasso language against the formula's automaton
//! for a three-valued verdict.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::automata::{
    check_inclusion_via_negation, lasso_to_nba, ltl_to_nba, nonempty_witness, product_empty,
    LassoLanguage, LassoWord,
};
use crate::linalg::{DensityMatrix, Qmc, Tolerances};
use crate::mltl::{label, AtomicProp, Formula, MltlError};
use crate::neighborhood::{neighborhood, NeighborhoodError, RangeMode, SymbolSet};
use crate::spectral::{
    check_stability_with, decompose, stable_states_with, truncation_bound,
    truncation_bound_simulated, SpectralData, SpectralError, StabilityReport, DEFAULT_Q_MAX,
};

/// Errors from the checking pipeline.
#[derive(Debug, Error)]
pub enum CheckError {
    #[error("chain is not periodically stable: {detail}")]
    NotStable { detail: String },
    #[error("formula uses undeclared proposition {name:?}")]
    UndeclaredAp { name: String },
    #[error("proposition {name:?} has dimension {ap_dim}, model has {model_dim}")]
    ApDimension { name: String, ap_dim: usize, model_dim: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Linalg(#[from] crate::linalg::LinalgError),
    #[error(transparent)]
    Neighborhood(#[from] NeighborhoodError),
    #[error(transparent)]
    Mltl(#[from] MltlError),
}

/// Three-valued outcome of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictValue {
    True,
    False,
    Unknown,
}

impl std::fmt::Display for VerdictValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerdictValue::True => write!(f, "True"),
            VerdictValue::False => write!(f, "False"),
            VerdictValue::Unknown => write!(f, "Unknown"),
        }
    }
}

/// Which truncation bound won the minimum for this verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    Analytic,
    Simulated,
}

impl std::fmt::Display for BoundSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundSource::Analytic => write!(f, "analytic"),
            BoundSource::Simulated => write!(f, "simulated"),
        }
    }
}

/// The verdict plus the evidence that produced it.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub value: VerdictValue,
    pub epsilon_used: f64,
    pub k_eps: u64,
    pub period: u64,
    pub bound_source: BoundSource,
    pub cycle_symbols: Vec<SymbolSet>,
    pub counterexample: Option<LassoWord>,
}

/// Knobs for the pipeline; defaults follow the library-wide conventions.
#[derive(Debug, Clone, Copy)]
pub struct CheckOptions {
    /// Largest denominator tried when rationalizing peripheral phases.
    pub q_max: u64,
    /// Neighborhood range mode used for the cycle abstraction.
    pub mode: RangeMode,
    /// Numeric tolerances shared across the pipeline.
    pub tol: Tolerances,
    /// Step cap for the simulated truncation bound.
    pub sim_horizon: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            q_max: DEFAULT_Q_MAX,
            mode: RangeMode::Cheap,
            tol: Tolerances::default(),
            sim_horizon: 100_000,
        }
    }
}

/// Reusable per-model analysis: spectral decomposition, stability report,
/// and limit cycle, shared across formulas and epsilon refinements.
pub struct Analyzer {
    g: Qmc,
    aps: Vec<AtomicProp>,
    spectral: Arc<SpectralData>,
    stability: StabilityReport,
    states: Vec<DensityMatrix>,
    opts: CheckOptions,
}

impl Analyzer {
    /// Decomposes the channel and prepares the limit cycle. Fails when the
    /// chain is not periodically stable from its initial state.
    pub fn new(g: &Qmc, aps: &[AtomicProp], opts: CheckOptions) -> Result<Self, CheckError> {
        let spectral = Arc::new(decompose(&g.transition, &opts.tol)?);
        Self::with_spectral(g, aps, spectral, opts)
    }

    /// Same, reusing an existing decomposition of the channel (the costly
    /// part is independent of the initial state).
    pub fn with_spectral(
        g: &Qmc,
        aps: &[AtomicProp],
        spectral: Arc<SpectralData>,
        opts: CheckOptions,
    ) -> Result<Self, CheckError> {
        for ap in aps {
            if ap.operator.dim() != g.dim() {
                return Err(CheckError::ApDimension {
                    name: ap.name.clone(),
                    ap_dim: ap.operator.dim(),
                    model_dim: g.dim(),
                });
            }
        }
        let stability = check_stability_with(&spectral, &g.initial, opts.q_max)?;
        if !stability.is_stable() {
            let detail = stability
                .witness
                .clone()
                .unwrap_or_else(|| "no rational phase structure found".to_string());
            return Err(CheckError::NotStable { detail });
        }
        let states = stable_states_with(&spectral, &g.initial, &stability)?;
        Ok(Analyzer { g: g.clone(), aps: aps.to_vec(), spectral, stability, states, opts })
    }

    pub fn spectral(&self) -> Arc<SpectralData> {
        Arc::clone(&self.spectral)
    }

    pub fn stability(&self) -> &StabilityReport {
        &self.stability
    }

    pub fn period(&self) -> u64 {
        self.states.len() as u64
    }

    /// The limit cycle states eta_0 .. eta_{p-1}.
    pub fn limit_states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn propositions(&self) -> &[AtomicProp] {
        &self.aps
    }

    /// Number of steps after which the trajectory provably stays within
    /// epsilon of the cycle: the smaller of the closed-form decay bound and
    /// the simulated first-entry bound.
    pub fn truncation(&self, eps: f64) -> Result<(u64, BoundSource), CheckError> {
        let analytic = truncation_bound(&self.spectral, &self.stability, eps);
        let simulated =
            truncation_bound_simulated(&self.g, &self.states, eps, self.opts.sim_horizon);
        match (analytic, simulated) {
            (Ok(a), Ok(s)) => {
                if a <= s {
                    Ok((a, BoundSource::Analytic))
                } else {
                    Ok((s, BoundSource::Simulated))
                }
            }
            (Ok(a), Err(_)) => Ok((a, BoundSource::Analytic)),
            (Err(_), Ok(s)) => Ok((s, BoundSource::Simulated)),
            (Err(e), Err(_)) => Err(e.into()),
        }
    }

    /// The symbolic abstraction of the trajectory at radius eps: exactly
    /// labeled prefix up to the truncation bound, then the neighborhood
    /// symbol sets of the cycle, aligned to where the trajectory enters it
    /// (zeta_j is the neighborhood of eta_{(K + j) mod p}).
    pub fn abstraction(
        &self,
        eps: f64,
    ) -> Result<(LassoLanguage, u64, BoundSource), CheckError> {
        let (k_eps, bound_source) = self.truncation(eps)?;

        let mut prefix = Vec::with_capacity(k_eps as usize);
        let mut rho = self.g.initial.clone();
        for _ in 0..k_eps {
            prefix.push(label(&rho, &self.aps, &self.opts.tol)?);
            rho = self.g.transition.apply(&rho)?;
        }

        let p = self.states.len();
        let mut cycle_symbols = Vec::with_capacity(p);
        for j in 0..p {
            let zeta = &self.states[(k_eps as usize + j) % p];
            cycle_symbols.push(neighborhood(zeta, eps, &self.aps, self.opts.mode, &self.opts.tol)?);
        }

        Ok((LassoLanguage::new(prefix, cycle_symbols), k_eps, bound_source))
    }

    /// One verification run at a fixed epsilon.
    pub fn check(&self, phi: &Formula, eps: f64) -> Result<Verdict, CheckError> {
        let declared: BTreeSet<String> = self.aps.iter().map(|a| a.name.clone()).collect();
        if let Some(name) = phi.ap_names().into_iter().find(|n| !declared.contains(n)) {
            return Err(CheckError::UndeclaredAp { name });
        }

        let (lang, k_eps, bound_source) = self.abstraction(eps)?;
        let a_g = lasso_to_nba(&lang, &declared);
        let a_phi = ltl_to_nba(phi, &declared);

        let (value, counterexample) = if product_empty(&a_g, &a_phi).0 {
            // No abstracted behaviour satisfies the formula; any word of
            // the lasso language is a violating pattern.
            (VerdictValue::False, nonempty_witness(&a_g))
        } else if check_inclusion_via_negation(&a_g, phi) {
            (VerdictValue::True, None)
        } else {
            (VerdictValue::Unknown, None)
        };

        Ok(Verdict {
            value,
            epsilon_used: eps,
            k_eps,
            period: lang.cycle().len() as u64,
            bound_source,
            cycle_symbols: lang.cycle().to_vec(),
            counterexample,
        })
    }

    /// Halves epsilon until the verdict becomes definite or the halving
    /// budget is exhausted; returns the last verdict either way.
    pub fn check_refined(
        &self,
        phi: &Formula,
        eps0: f64,
        max_halvings: u32,
    ) -> Result<Verdict, CheckError> {
        let mut eps = eps0;
        let mut verdict = self.check(phi, eps)?;
        let mut halvings = 0;
        while verdict.value == VerdictValue::Unknown && halvings < max_halvings {
            eps /= 2.0;
            halvings += 1;
            verdict = self.check(phi, eps)?;
        }
        Ok(verdict)
    }
}

/// One-shot check with default options.
pub fn model_check(
    g: &Qmc,
    aps: &[AtomicProp],
    phi: &Formula,
    eps: f64,
) -> Result<Verdict, CheckError> {
    Analyzer::new(g, aps, CheckOptions::default())?.check(phi, eps)
}

/// One-shot check with epsilon refinement and default options.
pub fn model_check_refined(
    g: &Qmc,
    aps: &[AtomicProp],
    phi: &Formula,
    eps0: f64,
    max_halvings: u32,
) -> Result<Verdict, CheckError> {
    Analyzer::new(g, aps, CheckOptions::default())?.check_refined(phi, eps0, max_halvings)
}

/// The first n trajectory states rho_0 .. rho_{n-1}, each re-validated.
pub fn trajectory(g: &Qmc, n: usize) -> Result<Vec<DensityMatrix>, CheckError> {
    let tol = Tolerances::default();
    let mut out = Vec::with_capacity(n);
    let mut rho = g.initial.clone();
    for step in 0..n {
        if step > 0 {
            let mat = g.transition.apply_matrix(rho.matrix())?;
            rho = DensityMatrix::new(mat, &tol)?;
        }
        out.push(rho.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{C64, ComplexMatrix, MeasurementOperator, SuperOperator};
    use crate::mltl::ProbInterval;
    use crate::models::classical_mc_to_qmc;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn ap_on_s0(name: &str, interval: ProbInterval) -> AtomicProp {
        AtomicProp::new(name, MeasurementOperator::basis_projector(2, 0), interval)
    }

    fn swap_chain() -> Qmc {
        let p = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        classical_mc_to_qmc(&p, &[1.0, 0.0], &tol()).unwrap()
    }

    fn mixing_chain() -> Qmc {
        let p = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        classical_mc_to_qmc(&p, &[1.0, 0.0], &tol()).unwrap()
    }

    fn phase_channel(psi: f64) -> Qmc {
        let mut u = ComplexMatrix::identity(2);
        u.set(1, 1, C64::from_polar(1.0, std::f64::consts::TAU * psi));
        let transition = SuperOperator::new(vec![u], &tol()).unwrap();
        let plus = DensityMatrix::new(
            ComplexMatrix::from_real_rows(vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
            &tol(),
        )
        .unwrap();
        Qmc::new(transition, plus).unwrap()
    }

    #[test]
    fn true_formula_is_immediately_true() {
        let g = mixing_chain();
        let aps = [ap_on_s0("a", ProbInterval::closed(0.0, 1.0).unwrap())];
        let v = model_check(&g, &aps, &Formula::True, 0.5).unwrap();
        assert_eq!(v.value, VerdictValue::True);
        assert_eq!(v.epsilon_used, 0.5);
        assert_eq!(v.period, 1);
        assert!(v.counterexample.is_none());
    }

    #[test]
    fn periodic_chain_separates_always_from_infinitely_often() {
        let g = swap_chain();
        // 0.8 leaves the 0.1-ball strict clearance; a closed endpoint at
        // exactly 0.9 would graze the ball and stay ambiguous.
        let high = [ap_on_s0("high", ProbInterval::closed(0.8, 1.0).unwrap())];
        let infinitely_often =
            Formula::always(Formula::eventually(Formula::ap("high")));
        let v = model_check(&g, &high, &infinitely_often, 0.1).unwrap();
        assert_eq!(v.value, VerdictValue::True, "mass returns to s0 every other step");
        assert_eq!(v.period, 2);

        let always = Formula::always(Formula::ap("high"));
        let v2 = model_check(&g, &high, &always, 0.1).unwrap();
        assert_eq!(v2.value, VerdictValue::False);
        let cex = v2.counterexample.expect("refuted safety needs a counterexample");
        assert!(!cex.cycle.is_empty());
        // The violating pattern shows a cycle step without the proposition.
        let misses = cex
            .cycle
            .iter()
            .chain(cex.stem.iter())
            .any(|letter| !letter.contains("high"));
        assert!(misses, "counterexample should exhibit a low step: {cex}");
    }

    #[test]
    fn endpoint_limit_stays_unknown_after_refinement() {
        // The mixing chain settles at probability exactly 0.5, the open
        // endpoint of the interval, so every epsilon ball straddles it.
        let g = mixing_chain();
        let half = [ap_on_s0("half", ProbInterval::new(0.0, 0.5, true, false).unwrap())];
        let phi = Formula::eventually(Formula::always(Formula::ap("half")));
        let analyzer = Analyzer::new(&g, &half, CheckOptions::default()).unwrap();
        let v = analyzer.check_refined(&phi, 0.5, 3).unwrap();
        assert_eq!(v.value, VerdictValue::Unknown);
        assert!((v.epsilon_used - 0.0625).abs() < 1e-12);
        for eps in [0.5, 0.25, 0.125, 0.0625] {
            assert_eq!(analyzer.check(&phi, eps).unwrap().value, VerdictValue::Unknown);
        }
    }

    #[test]
    fn irrational_phase_chain_is_rejected_with_witness() {
        let g = phase_channel(1.0 / std::f64::consts::SQRT_2);
        let aps = [ap_on_s0("a", ProbInterval::closed(0.0, 1.0).unwrap())];
        let err = model_check(&g, &aps, &Formula::True, 0.5).unwrap_err();
        match err {
            CheckError::NotStable { detail } => {
                assert!(detail.contains("no p/q"), "witness should name the phase: {detail}");
            }
            other => panic!("expected stability rejection, got {other}"),
        }
    }

    #[test]
    fn rational_phase_chain_checks_fine() {
        let g = phase_channel(1.0 / 3.0);
        let aps = [ap_on_s0("a", ProbInterval::closed(0.0, 1.0).unwrap())];
        let analyzer = Analyzer::new(&g, &aps, CheckOptions::default()).unwrap();
        assert_eq!(analyzer.period(), 3);
        let v = analyzer.check(&Formula::always(Formula::ap("a")), 0.25).unwrap();
        assert_eq!(v.value, VerdictValue::True, "probability is always 1 >= anything");
    }

    #[test]
    fn undeclared_proposition_is_an_error() {
        let g = mixing_chain();
        let aps = [ap_on_s0("a", ProbInterval::closed(0.0, 1.0).unwrap())];
        let err = model_check(&g, &aps, &Formula::ap("b"), 0.5).unwrap_err();
        assert!(matches!(err, CheckError::UndeclaredAp { name } if name == "b"));
    }

    #[test]
    fn trajectory_enumerates_validated_states() {
        let g = swap_chain();
        assert!(trajectory(&g, 0).unwrap().is_empty());
        let one = trajectory(&g, 1).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].matrix().hs_distance(g.initial.matrix()) < 1e-15);
        let five = trajectory(&g, 5).unwrap();
        for (k, rho) in five.iter().enumerate() {
            let expect_s0 = if k % 2 == 0 { 1.0 } else { 0.0 };
            assert!((rho.matrix().get(0, 0).re - expect_s0).abs() < 1e-12, "step {k}");
        }
    }

    #[test]
    fn verdict_records_truncation_provenance() {
        let g = mixing_chain();
        let aps = [ap_on_s0("a", ProbInterval::closed(0.0, 1.0).unwrap())];
        let analyzer = Analyzer::new(&g, &aps, CheckOptions::default()).unwrap();
        let (k, source) = analyzer.truncation(0.1).unwrap();
        // The chain mixes in one step; simulation sees that immediately,
        // the closed-form bound needs the nilpotent-part dimension.
        assert_eq!((k, source), (1, BoundSource::Simulated));
        let v = analyzer.check(&Formula::True, 0.1).unwrap();
        assert_eq!(v.k_eps, 1);
        assert_eq!(v.bound_source, BoundSource::Simulated);
    }
}
