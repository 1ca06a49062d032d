//! Symbolic epsilon-neighborhoods of states: which atomic propositions
//! must hold, must fail, or remain ambiguous on every state within
//! Hilbert-Schmidt distance epsilon of a given one.
//!
//! Ranges are certified over-approximations of the attained measurement
//! probabilities over the ball, so a must_hold or must_fail classification
//! is sound; only ambiguity is over-reported. Correlations between
//! different propositions inside the ball are deliberately ignored: the
//! denoted letter set factors per proposition, which over-approximates the
//! true neighborhood and preserves verdict soundness downstream.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::linalg::{hermitian_eigenvalues, DensityMatrix, MeasurementOperator, Tolerances};
use crate::mltl::{AtomicProp, Letter, ProbInterval};

/// Errors from neighborhood computation.
#[derive(Debug, Error)]
pub enum NeighborhoodError {
    #[error("dimension mismatch: operator is {operator}, state is {state}")]
    DimensionMismatch { operator: usize, state: usize },
    #[error("epsilon must be positive, got {0}")]
    BadEpsilon(f64),
}

/// How tightly to bound the attained probability range over the ball.
///
/// `Cheap` uses the Cauchy-Schwarz radius eps * ||M||. `Refined` exploits
/// that the difference of two states is traceless and Hermitian, shrinking
/// the radius to eps * ||M - (tr M / d) I||; still a certified
/// over-approximation, tight whenever the extremizing perturbation stays
/// inside the state set. Both modes clip to the spectral range of M, which
/// no state can escape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangeMode {
    #[default]
    Cheap,
    Refined,
}

/// Classification of one proposition over the ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// Attained range lies inside the proposition's interval.
    MustHold,
    /// Attained range misses the interval entirely.
    MustFail,
    /// The range straddles an interval endpoint (or ties within slack).
    Ambiguous,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::MustHold => write!(f, "must hold"),
            Status::MustFail => write!(f, "must fail"),
            Status::Ambiguous => write!(f, "ambiguous"),
        }
    }
}

/// Per-proposition outcome: status plus the bounding probability range.
#[derive(Debug, Clone)]
pub struct APStatus {
    pub ap: String,
    pub status: Status,
    pub range: (f64, f64),
}

/// A set of letters given as a product: every letter containing `base`
/// and contained in `base` plus `ambiguous`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolSet {
    base: Letter,
    ambiguous: BTreeSet<String>,
}

impl SymbolSet {
    pub fn new(base: Letter, ambiguous: BTreeSet<String>) -> Self {
        debug_assert!(base.iter().all(|n| !ambiguous.contains(n)));
        SymbolSet { base, ambiguous }
    }

    /// Propositions that hold in every denoted letter.
    pub fn base(&self) -> &Letter {
        &self.base
    }

    /// Propositions free to hold or fail.
    pub fn ambiguous(&self) -> &BTreeSet<String> {
        &self.ambiguous
    }

    /// Whether a concrete letter belongs to the denoted set.
    pub fn contains_letter(&self, letter: &Letter) -> bool {
        self.base.iter().all(|n| letter.contains(n))
            && letter.iter().all(|n| self.base.contains(n) || self.ambiguous.contains(n))
    }

    /// Whether the set denotes exactly one letter.
    pub fn is_singleton(&self) -> bool {
        self.ambiguous.is_empty()
    }

    /// Number of denoted letters (2 to the number of ambiguous names).
    pub fn count(&self) -> u128 {
        1u128 << self.ambiguous.len().min(127)
    }

    /// Whether every letter of this set is also denoted by `other`,
    /// assuming both classify the same proposition list.
    pub fn subset_of(&self, other: &SymbolSet) -> bool {
        // The minimal letter here (base alone) must satisfy other's forced
        // set, and the maximal letter here must not exceed other's allowance.
        let forced_ok = other.base.iter().all(|n| self.base.contains(n));
        let allowed_there =
            |n: &str| other.base.contains(n) || other.ambiguous.contains(n);
        forced_ok
            && self.base.iter().all(allowed_there)
            && self.ambiguous.iter().all(|n| allowed_there(n))
    }
}

impl fmt::Display for SymbolSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let amb: Vec<&str> = self.ambiguous.iter().map(String::as_str).collect();
        write!(f, "{} + any of {{{}}}", self.base, amb.join(","))
    }
}

/// Certified bounds on tr(M rho') over all states rho' within epsilon of
/// eta in Hilbert-Schmidt norm. The returned interval always contains the
/// attained values and always contains tr(M eta) itself.
pub fn ap_range(
    eta: &DensityMatrix,
    m: &MeasurementOperator,
    eps: f64,
    mode: RangeMode,
    tol: &Tolerances,
) -> Result<(f64, f64), NeighborhoodError> {
    if m.dim() != eta.dim() {
        return Err(NeighborhoodError::DimensionMismatch { operator: m.dim(), state: eta.dim() });
    }
    if !(eps > 0.0) {
        return Err(NeighborhoodError::BadEpsilon(eps));
    }
    let d = eta.dim() as f64;
    let mat = m.matrix();
    let mut t = eta.expect(mat).re;
    if t < 0.0 && t >= -tol.trace {
        t = 0.0;
    }
    if t > 1.0 && t <= 1.0 + tol.trace {
        t = 1.0;
    }

    let norm_full = mat.hs_norm();
    let radius = match mode {
        RangeMode::Cheap => eps * norm_full,
        RangeMode::Refined => {
            // rho' - eta is traceless, so only the traceless part of M moves
            // the expectation: ||M - (tr M / d) I||^2 = ||M||^2 - |tr M|^2/d.
            let tr = mat.trace();
            eps * (norm_full * norm_full - tr.norm_sqr() / d).max(0.0).sqrt()
        }
    };

    // No state can push the expectation outside the spectral range of M.
    let eigs = hermitian_eigenvalues(mat);
    let spec_lo = eigs.first().copied().unwrap_or(0.0).clamp(0.0, 1.0);
    let spec_hi = eigs.last().copied().unwrap_or(1.0).clamp(0.0, 1.0);

    let lo = (t - radius).max(0.0).max(spec_lo).min(t);
    let hi = (t + radius).min(1.0).min(spec_hi).max(t);
    Ok((lo, hi))
}

/// Classifies each proposition against its interval over the ball.
///
/// Containment and disjointness are decided with a slack of `tol.trace`:
/// a range endpoint tying an interval endpoint within slack classifies as
/// ambiguous, except that closed interval endpoints admit the tie (a range
/// reaching exactly a closed endpoint is still inside).
pub fn classify(
    eta: &DensityMatrix,
    eps: f64,
    aps: &[AtomicProp],
    mode: RangeMode,
    tol: &Tolerances,
) -> Result<Vec<APStatus>, NeighborhoodError> {
    let slack = tol.trace;
    let mut out = Vec::with_capacity(aps.len());
    for ap in aps {
        let range = ap_range(eta, &ap.operator, eps, mode, tol)?;
        let status = classify_range(range, &ap.interval, slack);
        out.push(APStatus { ap: ap.name.clone(), status, range });
    }
    Ok(out)
}

fn classify_range(r: (f64, f64), i: &ProbInterval, slack: f64) -> Status {
    let inside_lo = r.0 > i.lo + slack || (i.lo_closed && r.0 >= i.lo);
    let inside_hi = r.1 < i.hi - slack || (i.hi_closed && r.1 <= i.hi);
    if inside_lo && inside_hi {
        return Status::MustHold;
    }
    let below = r.1 < i.lo - slack;
    let above = r.0 > i.hi + slack;
    if below || above {
        return Status::MustFail;
    }
    Status::Ambiguous
}

/// The symbolic neighborhood: which letters can label a state within
/// epsilon of eta.
pub fn neighborhood(
    eta: &DensityMatrix,
    eps: f64,
    aps: &[AtomicProp],
    mode: RangeMode,
    tol: &Tolerances,
) -> Result<SymbolSet, NeighborhoodError> {
    let mut base = Letter::new();
    let mut ambiguous = BTreeSet::new();
    for st in classify(eta, eps, aps, mode, tol)? {
        match st.status {
            Status::MustHold => base.insert(st.ap),
            Status::MustFail => {}
            Status::Ambiguous => {
                ambiguous.insert(st.ap);
            }
        }
    }
    Ok(SymbolSet::new(base, ambiguous))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use crate::mltl::label;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn proj(dim: usize, k: usize) -> MeasurementOperator {
        MeasurementOperator::basis_projector(dim, k)
    }

    fn uniform(d: usize) -> DensityMatrix {
        DensityMatrix::from_probabilities(&vec![1.0 / d as f64; d])
    }

    #[test]
    fn identity_observable_pins_range_to_one() {
        let m = MeasurementOperator::new_unchecked(ComplexMatrix::identity(3));
        for eps in [1e-3, 0.1, 0.9] {
            let r = ap_range(&uniform(3), &m, eps, RangeMode::Cheap, &tol()).unwrap();
            assert_eq!(r, (1.0, 1.0));
        }
    }

    #[test]
    fn cheap_range_on_projector_is_cauchy_schwarz_window() {
        let r = ap_range(&uniform(2), &proj(2, 0), 0.1, RangeMode::Cheap, &tol()).unwrap();
        assert!((r.0 - 0.4).abs() < 1e-15 && (r.1 - 0.6).abs() < 1e-15, "{r:?}");
    }

    #[test]
    fn refined_range_shrinks_by_traceless_part() {
        let want = 0.1 * (0.5f64).sqrt();
        let r = ap_range(&uniform(2), &proj(2, 0), 0.1, RangeMode::Refined, &tol()).unwrap();
        assert!((r.0 - (0.5 - want)).abs() < 1e-12);
        assert!((r.1 - (0.5 + want)).abs() < 1e-12);
        // Refined stays inside cheap.
        let c = ap_range(&uniform(2), &proj(2, 0), 0.1, RangeMode::Cheap, &tol()).unwrap();
        assert!(c.0 <= r.0 && r.1 <= c.1);
    }

    #[test]
    fn refined_bound_is_attained_by_feasible_state() {
        // The extremizing perturbation eta + eps * M0/||M0|| is a valid
        // state here, so the refined upper end is exactly attained.
        let eps = 0.1;
        let r = ap_range(&uniform(2), &proj(2, 0), eps, RangeMode::Refined, &tol()).unwrap();
        let s = eps / 2.0f64.sqrt();
        let attained = DensityMatrix::from_probabilities(&[0.5 + s, 0.5 - s]);
        let got = attained.expect(proj(2, 0).matrix()).re;
        assert!((got - r.1).abs() < 1e-12);
        let dist = attained.matrix().hs_distance(uniform(2).matrix());
        assert!(dist <= eps + 1e-12);
    }

    #[test]
    fn range_is_clipped_to_spectral_bounds() {
        // M with eigenvalues {0.2, 0.7}: no state reads outside [0.2, 0.7].
        let m = MeasurementOperator::new_unchecked(ComplexMatrix::from_real_rows(vec![
            vec![0.2, 0.0],
            vec![0.0, 0.7],
        ]));
        let r = ap_range(&uniform(2), &m, 0.9, RangeMode::Cheap, &tol()).unwrap();
        assert!(r.0 >= 0.2 - 1e-12 && r.1 <= 0.7 + 1e-12, "{r:?}");
        // And the center value stays inside the range.
        assert!(r.0 <= 0.45 && 0.45 <= r.1);
    }

    #[test]
    fn classification_covers_all_three_statuses() {
        let t = tol();
        let eta = uniform(2);
        let hold = AtomicProp::new("hold", proj(2, 0), ProbInterval::closed(0.3, 0.7).unwrap());
        let fail = AtomicProp::new("fail", proj(2, 0), ProbInterval::closed(0.8, 1.0).unwrap());
        let amb = AtomicProp::new("amb", proj(2, 0), ProbInterval::closed(0.55, 1.0).unwrap());
        let statuses =
            classify(&eta, 0.1, &[hold, fail, amb], RangeMode::Cheap, &t).unwrap();
        assert_eq!(statuses[0].status, Status::MustHold);
        assert_eq!(statuses[1].status, Status::MustFail);
        assert_eq!(statuses[2].status, Status::Ambiguous);
    }

    #[test]
    fn identity_point_interval_always_must_holds() {
        let t = tol();
        let ap = AtomicProp::new(
            "all",
            MeasurementOperator::new_unchecked(ComplexMatrix::identity(2)),
            ProbInterval::closed(1.0, 1.0).unwrap(),
        );
        for eps in [1e-6, 0.25, 0.999] {
            let statuses = classify(&uniform(2), eps, &[ap.clone()], RangeMode::Cheap, &t).unwrap();
            assert_eq!(statuses[0].status, Status::MustHold, "eps = {eps}");
        }
    }

    #[test]
    fn endpoint_tie_on_open_bound_is_ambiguous() {
        // Range reaching exactly an open endpoint must not count as inside
        // or outside.
        let i = ProbInterval::new(0.0, 0.5, true, false).unwrap();
        assert_eq!(classify_range((0.1, 0.5), &i, 1e-9), Status::Ambiguous);
        assert_eq!(classify_range((0.5, 0.6), &i, 1e-9), Status::Ambiguous);
        // Closed endpoint admits the tie.
        let c = ProbInterval::closed(0.0, 0.5).unwrap();
        assert_eq!(classify_range((0.1, 0.5), &c, 1e-9), Status::MustHold);
        // Clear separation beyond slack is decisive.
        assert_eq!(classify_range((0.6, 0.7), &i, 1e-9), Status::MustFail);
        assert_eq!(classify_range((0.1, 0.4), &i, 1e-9), Status::MustHold);
    }

    #[test]
    fn huge_epsilon_makes_everything_ambiguous() {
        let t = tol();
        let aps = vec![
            AtomicProp::new("a", proj(2, 0), ProbInterval::new(0.0, 0.5, true, false).unwrap()),
            AtomicProp::new("b", proj(2, 1), ProbInterval::new(0.4, 1.0, false, true).unwrap()),
        ];
        let set = neighborhood(&uniform(2), 0.9, &aps, RangeMode::Cheap, &t).unwrap();
        assert!(set.base().is_empty());
        assert_eq!(set.ambiguous().len(), 2);
        assert_eq!(set.count(), 4);
        // All four letters over {a, b} are denoted.
        for names in [vec![], vec!["a"], vec!["b"], vec!["a", "b"]] {
            assert!(set.contains_letter(&Letter::from_names(names)));
        }
    }

    #[test]
    fn vanishing_epsilon_recovers_the_exact_label() {
        let t = tol();
        let eta = DensityMatrix::from_probabilities(&[0.3, 0.7]);
        let aps = vec![
            AtomicProp::new("low", proj(2, 0), ProbInterval::new(0.0, 0.5, true, false).unwrap()),
            AtomicProp::new("hi", proj(2, 1), ProbInterval::new(0.4, 1.0, false, true).unwrap()),
            AtomicProp::new("no", proj(2, 0), ProbInterval::closed(0.9, 1.0).unwrap()),
        ];
        let set = neighborhood(&eta, 1e-7, &aps, RangeMode::Cheap, &t).unwrap();
        assert!(set.is_singleton());
        let exact = label(&eta, &aps, &t).unwrap();
        assert_eq!(set.base(), &exact);
        assert!(set.contains_letter(&exact));
    }

    #[test]
    fn smaller_epsilon_denotes_a_subset() {
        let t = tol();
        let eta = DensityMatrix::from_probabilities(&[0.45, 0.55]);
        let aps = vec![
            AtomicProp::new("a", proj(2, 0), ProbInterval::new(0.0, 0.5, true, false).unwrap()),
            AtomicProp::new("b", proj(2, 1), ProbInterval::new(0.4, 1.0, false, true).unwrap()),
        ];
        let small = neighborhood(&eta, 0.01, &aps, RangeMode::Cheap, &t).unwrap();
        let big = neighborhood(&eta, 0.2, &aps, RangeMode::Cheap, &t).unwrap();
        assert!(small.subset_of(&big));
        assert!(!big.subset_of(&small));
    }
}
