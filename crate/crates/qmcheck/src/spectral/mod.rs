//! Spectral analysis of quantum channels: peripheral spectrum, periodic
//! stability, limit-cycle states, and truncation bounds.
//!
//! The matrix representation of a channel has spectral radius 1 and a
//! semisimple unit-modulus (peripheral) spectrum. [`decompose`] splits it
//! as M = S J S^-1 with J = diag(L, T22): L holds the peripheral
//! eigenvalues, T22 the strictly contracting rest. From that split follow
//! the stabilizer projection onto the peripheral subspace, the periodic
//! limit states of a chain, and two bounds on how many steps it takes the
//! trajectory to come within epsilon of its limit cycle: an analytic one
//! from the decay model C omega^n n^(d-1) and a simulated one that walks
//! the trajectory and confirms over several periods.

mod schur;

use std::fmt;

use thiserror::Error;

use crate::linalg::{
    devectorize, vec_norm, vectorize, ComplexMatrix, DensityMatrix, LinalgError, Qmc,
    SuperOperator, Tolerances, C64,
};

/// Fraction of epsilon the simulated truncation search must reach, guarding
/// against distances that hover at the threshold.
pub const SAFETY_MARGIN: f64 = 0.9;

/// Number of full periods the simulated truncation search confirms before
/// accepting a truncation point.
pub const CONFIRM_CYCLES: u64 = 3;

/// Default cap on denominators when matching eigenvalue phases to rationals.
pub const DEFAULT_Q_MAX: u64 = 64;

/// Contracting moduli at or below this count as exactly zero (nilpotent).
const ZERO_MODULUS: f64 = 1e-12;

/// Errors from spectral decomposition and its consumers.
#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("Schur iteration failed to converge on a {dim}x{dim} matrix")]
    SchurFailed { dim: usize },
    #[error("spectral radius {max_modulus} exceeds 1 beyond tolerance; not a valid channel matrix")]
    SpectralRadiusExceeded { max_modulus: f64 },
    #[error("unit-modulus spectrum is numerically defective (coupling {coupling:.3e} > {tol:.3e})")]
    DefectivePeripheral { coupling: f64, tol: f64 },
    #[error("decomposition residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    Reconstruction { residual: f64, tol: f64 },
    #[error("operation requires a periodically stable chain, but stability is undetermined")]
    NotStable,
    #[error("period overflows the supported range (lcm of phase denominators too large)")]
    PeriodOverflow,
    #[error("period {period} exceeds the supported limit {limit}")]
    PeriodTooLong { period: u64, limit: u64 },
    #[error("trajectory did not settle within {n_max} steps")]
    NoConvergence { n_max: u64 },
    #[error("analytic truncation bound exceeds 2^62 steps; decomposition too ill-conditioned")]
    TruncationOverflow,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// One cluster of numerically coinciding eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenBlock {
    /// Representative eigenvalue of the cluster.
    pub value: C64,
    /// Number of eigenvalues in the cluster.
    pub size: usize,
    /// Whether the cluster sits on the unit circle.
    pub peripheral: bool,
    /// Upper bound on the largest Jordan block inside the cluster: 1 for
    /// peripheral clusters (semisimple), the cluster size otherwise.
    pub jordan_bound: usize,
}

/// The spectral split M = S J S^-1 of a channel matrix, with the peripheral
/// part diagonalized and the contracting part kept in Schur form.
///
/// S is held in factored form S = Q X with Q unitary; `basis_matrix` and
/// `basis_inverse` materialize it on demand.
#[derive(Debug, Clone)]
pub struct SpectralData {
    dim: usize,
    eigenvalues: Vec<C64>,
    peripheral_count: usize,
    block_structure: Vec<EigenBlock>,
    omega: f64,
    d_omega: usize,
    cond_number: f64,
    transient_factor: f64,
    recon_residual: f64,
    q: ComplexMatrix,
    y1: ComplexMatrix,
    y1_inv: ComplexMatrix,
    z: ComplexMatrix,
    t22: ComplexMatrix,
    /// n x m: image of the peripheral eigenvectors, Q[., ..m] Y1.
    peripheral_basis: ComplexMatrix,
    /// m x n: peripheral rows of S^-1; coefficients are W |rho>.
    peripheral_dual: ComplexMatrix,
    tol: Tolerances,
}

impl SpectralData {
    /// Hilbert-space dimension d of the underlying channel.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Side length d^2 of the channel matrix.
    pub fn superop_dim(&self) -> usize {
        self.dim * self.dim
    }

    /// All eigenvalues, peripheral ones first (matching the internal basis).
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    /// Indices into `eigenvalues` of unit-modulus eigenvalues; the leading
    /// block after internal reordering.
    pub fn peripheral_indices(&self) -> Vec<usize> {
        (0..self.peripheral_count).collect()
    }

    pub fn peripheral_count(&self) -> usize {
        self.peripheral_count
    }

    /// Eigenvalue clusters with their conservative Jordan-size bounds.
    pub fn block_structure(&self) -> &[EigenBlock] {
        &self.block_structure
    }

    /// Largest modulus strictly inside the unit disc (0 if none).
    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Bound on the largest Jordan block among modulus-omega eigenvalues.
    pub fn d_omega(&self) -> usize {
        self.d_omega
    }

    /// Frobenius condition number of the basis change, the computable
    /// stand-in for the optimal decomposition constant.
    pub fn cond_number(&self) -> f64 {
        self.cond_number
    }

    /// Transient overshoot factor of the contracting block (>= 1).
    pub fn transient_factor(&self) -> f64 {
        self.transient_factor
    }

    /// Relative residual of the reconstruction S J S^-1 against the input.
    pub fn recon_residual(&self) -> f64 {
        self.recon_residual
    }

    /// Tolerances the decomposition was computed with.
    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    /// Materializes the basis-change matrix S.
    pub fn basis_matrix(&self) -> ComplexMatrix {
        // S = Q [[Y1, Z], [0, I]] = [Q1 Y1 | Q1 Z + Q2].
        let n = self.superop_dim();
        let m = self.peripheral_count;
        let mut s = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..m {
                s.set(i, j, self.peripheral_basis.get(i, j));
            }
        }
        let q1z = self.q1().matmul(&self.z);
        for i in 0..n {
            for j in 0..n - m {
                s.set(i, m + j, q1z.get(i, j) + self.q.get(i, m + j));
            }
        }
        s
    }

    /// Materializes the inverse basis change S^-1.
    pub fn basis_inverse(&self) -> ComplexMatrix {
        // S^-1 = [[Y1^-1, -Y1^-1 Z], [0, I]] Q' = [W ; Q2'].
        let n = self.superop_dim();
        let m = self.peripheral_count;
        let mut sinv = ComplexMatrix::zeros(n, n);
        for i in 0..m {
            for j in 0..n {
                sinv.set(i, j, self.peripheral_dual.get(i, j));
            }
        }
        for i in 0..n - m {
            for j in 0..n {
                sinv.set(m + i, j, self.q.get(j, m + i).conj());
            }
        }
        sinv
    }

    /// The block-diagonal middle factor J = diag(L, T22).
    pub fn middle_factor(&self) -> ComplexMatrix {
        let n = self.superop_dim();
        let m = self.peripheral_count;
        let mut j = ComplexMatrix::zeros(n, n);
        for i in 0..m {
            j.set(i, i, self.eigenvalues[i]);
        }
        for r in 0..n - m {
            for c in 0..n - m {
                j.set(m + r, m + c, self.t22.get(r, c));
            }
        }
        j
    }

    /// Coefficients of a state on the peripheral eigenvectors: the leading
    /// entries of S^-1 |rho>.
    pub fn peripheral_coefficients(&self, rho: &DensityMatrix) -> Result<Vec<C64>, SpectralError> {
        if rho.dim() != self.dim {
            return Err(SpectralError::Linalg(LinalgError::DimensionMismatch {
                expected: self.dim,
                found: rho.dim(),
            }));
        }
        let v = vectorize(rho.matrix())?;
        Ok(self.peripheral_dual.mul_vec(&v))
    }

    fn q1(&self) -> ComplexMatrix {
        let n = self.superop_dim();
        let m = self.peripheral_count;
        ComplexMatrix::from_fn(n, m, |i, j| self.q.get(i, j))
    }

    /// The constant C of the decay model C omega^n n^(d-1): condition number
    /// times transient overshoot, with the multi-block correction factor
    /// when d_omega exceeds 1.
    pub fn decay_constant(&self) -> f64 {
        let base = self.cond_number * self.transient_factor;
        if self.d_omega <= 1 {
            base
        } else {
            let d = self.d_omega as f64;
            base * (self.omega * (d - 1.0)).powi(self.d_omega as i32 - 1)
        }
    }

    /// Applies S J S^-1 to a vector through the factored pieces.
    fn reconstruction_matvec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.superop_dim();
        let m = self.peripheral_count;
        let w = self.q.adjoint_mul_vec(v);
        let (w1, w2) = w.split_at(m);
        // u = X^-1 w.
        let zw2 = self.z.mul_vec(w2);
        let u1_pre: Vec<C64> = w1.iter().zip(&zw2).map(|(a, b)| a - b).collect();
        let u1 = self.y1_inv.mul_vec(&u1_pre);
        // J u.
        let ju1: Vec<C64> = u1.iter().enumerate().map(|(i, x)| self.eigenvalues[i] * x).collect();
        let ju2 = self.t22.mul_vec(w2);
        // X (J u).
        let x1a = self.y1.mul_vec(&ju1);
        let x1b = self.z.mul_vec(&ju2);
        let mut x = vec![C64::ZERO; n];
        for i in 0..m {
            x[i] = x1a[i] + x1b[i];
        }
        x[m..n].copy_from_slice(&ju2);
        self.q.mul_vec(&x)
    }
}

/// Phase data for one peripheral eigenvalue: lambda = e^(i 2 pi psi).
#[derive(Debug, Clone, PartialEq)]
pub struct PeripheralPhase {
    /// Index into `SpectralData::eigenvalues`.
    pub eigen_index: usize,
    /// Normalized phase psi in [0, 1).
    pub phase: f64,
    /// Reduced rational approximation p/q of psi, if one exists within the
    /// phase tolerance at bounded denominator.
    pub rational: Option<(u64, u64)>,
    /// Magnitude of the state's coefficient on this eigencomponent.
    pub coefficient: f64,
}

impl fmt::Display for PeripheralPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.rational {
            Some((p, q)) => write!(f, "phase {:.9} = {p}/{q} (|a| = {:.3e})", self.phase, self.coefficient),
            None => write!(f, "phase {:.9} (no rational fit, |a| = {:.3e})", self.phase, self.coefficient),
        }
    }
}

/// Whether a chain settles into a periodic limit cycle.
///
/// Deciding true instability would require certifying a phase irrational,
/// which floating-point data cannot do, so the negative case is reported
/// as undetermined rather than as a definite verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Undetermined,
}

/// Outcome of the periodic-stability analysis for one chain.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub stable: Stability,
    /// Limit-cycle length; present exactly when stable.
    pub period: Option<u64>,
    /// Peripheral eigencomponents the initial state actually excites.
    pub contributing_phases: Vec<PeripheralPhase>,
    /// Human-readable description of the blocking component when not stable.
    pub witness: Option<String>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.stable == Stability::Stable
    }
}

/// Decomposes the matrix representation of a channel.
///
/// Fails when the Schur iteration does not converge, when the peripheral
/// spectrum is numerically defective, or when the reconstruction residual
/// exceeds `tol.recon`; callers can fall back to the simulated truncation
/// bound in those cases.
pub fn decompose(e: &SuperOperator, tol: &Tolerances) -> Result<SpectralData, SpectralError> {
    let m_e = e.matrix_rep();
    let n = m_e.rows();
    let norm_me = m_e.hs_norm();

    let (mut q, mut t) = schur::schur(m_e)?;
    let max_modulus = (0..n).map(|i| t.get(i, i).norm()).fold(0.0, f64::max);
    if max_modulus > 1.0 + tol.unit.max(1e-10) {
        return Err(SpectralError::SpectralRadiusExceeded { max_modulus });
    }

    let m = schur::reorder_peripheral_first(&mut q, &mut t, tol.unit);
    let defect_tol = 1e-8 * (1.0 + norm_me);
    let y1 = schur::peripheral_eigenvectors(&t, m, tol.cluster, defect_tol)?;
    let y1_inv = schur::unit_upper_inverse(&y1);
    let z = schur::solve_sylvester(&t, m);
    let t22 = ComplexMatrix::from_fn(n - m, n - m, |i, j| t.get(m + i, m + j));
    let eigenvalues: Vec<C64> = (0..n).map(|i| t.get(i, i)).collect();
    // The full triangular factor is no longer needed; free it before the
    // remaining n^2-sized intermediates to cap peak memory.
    drop(t);

    let block_structure = cluster_eigenvalues(&eigenvalues, m, tol.cluster);
    let omega_raw = eigenvalues[m..].iter().map(|l| l.norm()).fold(0.0, f64::max);
    let omega = if omega_raw <= ZERO_MODULUS { 0.0 } else { omega_raw };
    let d_omega = if omega == 0.0 {
        (n - m).max(1)
    } else {
        block_structure
            .iter()
            .filter(|b| !b.peripheral && b.value.norm() >= omega - tol.cluster)
            .map(|b| b.jordan_bound)
            .max()
            .unwrap_or(1)
    };

    // Frobenius norms of S and S^-1 through the factored form; the unitary
    // factor drops out.
    let y1inv_z = y1_inv.matmul(&z);
    let rest = (n - m) as f64;
    let norm_s = (y1.hs_norm().powi(2) + z.hs_norm().powi(2) + rest).sqrt();
    let norm_sinv = (y1_inv.hs_norm().powi(2) + y1inv_z.hs_norm().powi(2) + rest).sqrt();
    let cond_number = (norm_s * norm_sinv).max(1.0);

    let transient_factor = schur::transient_factor(&t22, omega, d_omega);

    // Peripheral image and dual: V = Q1 Y1, W = Y1^-1 Q1' - (Y1^-1 Z) Q2'.
    let q1 = ComplexMatrix::from_fn(n, m, |i, j| q.get(i, j));
    let peripheral_basis = q1.matmul(&y1);
    let q1_adj = q1.adjoint();
    let q2_adj = ComplexMatrix::from_fn(n - m, n, |i, j| q.get(j, m + i).conj());
    let peripheral_dual = &y1_inv.matmul(&q1_adj) - &y1inv_z.matmul(&q2_adj);

    let sd = SpectralData {
        dim: e.dim(),
        eigenvalues,
        peripheral_count: m,
        block_structure,
        omega,
        d_omega,
        cond_number,
        transient_factor,
        recon_residual: 0.0,
        q,
        y1,
        y1_inv,
        z,
        t22,
        peripheral_basis,
        peripheral_dual,
        tol: *tol,
    };

    let residual = reconstruction_residual(&sd, m_e, norm_me);
    if residual > tol.recon {
        return Err(SpectralError::Reconstruction { residual, tol: tol.recon });
    }
    Ok(SpectralData { recon_residual: residual, ..sd })
}

/// Relative reconstruction residual: exact on small systems, estimated by
/// random probing on large ones (where forming S J S^-1 would dominate the
/// whole analysis).
fn reconstruction_residual(sd: &SpectralData, m_e: &ComplexMatrix, norm_me: f64) -> f64 {
    let n = sd.superop_dim();
    let scale = norm_me.max(1.0);
    if n <= 128 {
        let mut err_sq = 0.0;
        let mut basis = vec![C64::ZERO; n];
        for j in 0..n {
            basis[j] = C64::ONE;
            let recon = sd.reconstruction_matvec(&basis);
            for i in 0..n {
                err_sq += (recon[i] - m_e.get(i, j)).norm_sqr();
            }
            basis[j] = C64::ZERO;
        }
        return err_sq.sqrt() / scale;
    }
    let mut rng = schur::ProbeRng::new(0x5EED_0F_5A17);
    let mut worst: f64 = 0.0;
    for _ in 0..12 {
        let v = rng.gaussian_vector(n);
        let direct = m_e.mul_vec(&v);
        let recon = sd.reconstruction_matvec(&v);
        let diff: Vec<C64> = direct.iter().zip(&recon).map(|(a, b)| a - b).collect();
        worst = worst.max(vec_norm(&diff) / (scale * vec_norm(&v)));
    }
    worst
}

/// Groups eigenvalues into clusters of numerically coinciding values and
/// assigns conservative Jordan-size bounds.
fn cluster_eigenvalues(eigenvalues: &[C64], m: usize, tol_cluster: f64) -> Vec<EigenBlock> {
    let cluster_part = |vals: &[(usize, C64)], peripheral: bool| -> Vec<EigenBlock> {
        let k = vals.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let root = find(parent, parent[i]);
                parent[i] = root;
            }
            parent[i]
        }
        for i in 0..k {
            for j in i + 1..k {
                if (vals[i].1 - vals[j].1).norm() <= tol_cluster {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[ri] = rj;
                    }
                }
            }
        }
        let mut sizes: std::collections::BTreeMap<usize, usize> = Default::default();
        for i in 0..k {
            *sizes.entry(find(&mut parent, i)).or_insert(0) += 1;
        }
        sizes
            .into_iter()
            .map(|(root, size)| EigenBlock {
                value: vals[root].1,
                size,
                peripheral,
                jordan_bound: if peripheral { 1 } else { size },
            })
            .collect()
    };
    let periph: Vec<(usize, C64)> = eigenvalues[..m].iter().copied().enumerate().collect();
    let contr: Vec<(usize, C64)> =
        eigenvalues[m..].iter().copied().enumerate().map(|(i, v)| (i + m, v)).collect();
    let mut blocks = cluster_part(&periph, true);
    blocks.extend(cluster_part(&contr, false));
    blocks
}

/// Best rational approximation p/q to x in [0, 1) with q bounded, via
/// continued-fraction convergents and the final semiconvergent.
fn best_rational(x: f64, q_max: u64) -> (u64, u64) {
    debug_assert!((0.0..1.0).contains(&x) && q_max >= 1);
    let err = |p: i128, q: i128| (x - p as f64 / q as f64).abs();
    let (mut h2, mut k2) = (0i128, 1i128);
    let (mut h1, mut k1) = (1i128, 0i128);
    let mut frac = x;
    for _ in 0..64 {
        let a = frac.floor() as i128;
        let h = a * h1 + h2;
        let k = a * k1 + k2;
        if k > q_max as i128 {
            // Best semiconvergent that still fits the denominator cap.
            let t = (q_max as i128 - k2) / k1;
            let (hs, ks) = (t * h1 + h2, t * k1 + k2);
            let (p, q) = if ks >= 1 && err(hs, ks) < err(h1, k1) { (hs, ks) } else { (h1, k1) };
            return reduce(p, q);
        }
        (h2, k2) = (h1, k1);
        (h1, k1) = (h, k);
        let rem = frac - a as f64;
        if rem.abs() < 1e-15 {
            break;
        }
        frac = 1.0 / rem;
        if !frac.is_finite() {
            break;
        }
    }
    reduce(h1, k1)
}

fn reduce(p: i128, q: i128) -> (u64, u64) {
    debug_assert!(q >= 1);
    let g = gcd(p.unsigned_abs(), q.unsigned_abs()).max(1);
    let (p, q) = ((p.unsigned_abs() / g) as u64, (q.unsigned_abs() / g) as u64);
    // Phases are defined modulo 1: p/q = 1 wraps to 0.
    (p % q.max(1), q.max(1))
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn lcm_checked(a: u128, b: u128) -> Option<u128> {
    if a == 0 || b == 0 {
        return Some(a.max(b).max(1));
    }
    (a / gcd(a, b)).checked_mul(b)
}

/// Peripheral eigencomponents a state actually excites, with their phases
/// and rational fits (at the default denominator cap).
pub fn peripheral_components(
    sd: &SpectralData,
    rho0: &DensityMatrix,
) -> Result<Vec<PeripheralPhase>, SpectralError> {
    peripheral_components_capped(sd, rho0, DEFAULT_Q_MAX)
}

fn peripheral_components_capped(
    sd: &SpectralData,
    rho0: &DensityMatrix,
    q_max: u64,
) -> Result<Vec<PeripheralPhase>, SpectralError> {
    let coeffs = sd.peripheral_coefficients(rho0)?;
    let mut out = Vec::new();
    for (k, a) in coeffs.iter().enumerate() {
        if a.norm() <= sd.tol.coeff {
            continue;
        }
        let lambda = sd.eigenvalues[k];
        let mut psi = lambda.arg() / std::f64::consts::TAU;
        if psi < 0.0 {
            psi += 1.0;
        }
        if psi >= 1.0 {
            psi = 0.0;
        }
        let (p, q) = best_rational(psi, q_max);
        // Compare on the circle: a phase just below 1 matches 0/1.
        let diff = (psi - p as f64 / q as f64).abs();
        let fits = diff.min(1.0 - diff) <= sd.tol.phase;
        out.push(PeripheralPhase {
            eigen_index: k,
            phase: psi,
            rational: fits.then_some((p, q)),
            coefficient: a.norm(),
        });
    }
    Ok(out)
}

/// Decides periodic stability of a chain by checking every contributing
/// peripheral phase for a rational fit p/q with q <= q_max.
pub fn check_stability(g: &Qmc, q_max: u64, tol: &Tolerances) -> Result<StabilityReport, SpectralError> {
    let sd = decompose(&g.transition, tol)?;
    check_stability_with(&sd, &g.initial, q_max)
}

/// Stability decision against an existing decomposition.
pub fn check_stability_with(
    sd: &SpectralData,
    rho0: &DensityMatrix,
    q_max: u64,
) -> Result<StabilityReport, SpectralError> {
    let phases = peripheral_components_capped(sd, rho0, q_max)?;
    let mut period: u128 = 1;
    for ph in &phases {
        match ph.rational {
            Some((_, q)) => match lcm_checked(period, q as u128) {
                Some(l) => period = l,
                None => {
                    return Ok(StabilityReport {
                        stable: Stability::Undetermined,
                        period: None,
                        contributing_phases: phases.clone(),
                        witness: Some("period overflows 128-bit range".into()),
                    })
                }
            },
            None => {
                let witness = format!(
                    "eigenvalue component {} has {}; no p/q with q <= {} within {:.1e}",
                    ph.eigen_index, ph, q_max, sd.tol.phase
                );
                return Ok(StabilityReport {
                    stable: Stability::Undetermined,
                    period: None,
                    contributing_phases: phases.clone(),
                    witness: Some(witness),
                });
            }
        }
    }
    if period > u64::MAX as u128 {
        return Ok(StabilityReport {
            stable: Stability::Undetermined,
            period: None,
            contributing_phases: phases,
            witness: Some("period overflows 64-bit range".into()),
        });
    }
    Ok(StabilityReport {
        stable: Stability::Stable,
        period: Some(period as u64),
        contributing_phases: phases,
        witness: None,
    })
}

/// The matrix of the stabilizer channel: the spectral projection onto the
/// peripheral subspace. Idempotent and commuting with the channel matrix.
pub fn stabilizer(sd: &SpectralData) -> ComplexMatrix {
    sd.peripheral_basis.matmul(&sd.peripheral_dual)
}

/// Limit-cycle states of a stable chain, eta_k for k in 0..period.
///
/// eta_k is the stabilizer applied to the k-th trajectory state, computed
/// through the peripheral factorization; coefficients below the coefficient
/// tolerance are dropped, which makes the returned cycle exactly periodic.
/// Each state is symmetrized before validation: the limit is Hermitian in
/// exact arithmetic, so the skew part is pure rounding noise.
pub fn stable_states(
    g: &Qmc,
    report: &StabilityReport,
    tol: &Tolerances,
) -> Result<Vec<DensityMatrix>, SpectralError> {
    let sd = decompose(&g.transition, tol)?;
    stable_states_with(&sd, &g.initial, report)
}

/// Limit-cycle states against an existing decomposition.
pub fn stable_states_with(
    sd: &SpectralData,
    rho0: &DensityMatrix,
    report: &StabilityReport,
) -> Result<Vec<DensityMatrix>, SpectralError> {
    const PERIOD_LIMIT: u64 = 1 << 20;
    if !report.is_stable() {
        return Err(SpectralError::NotStable);
    }
    let period = report.period.unwrap_or(1);
    if period > PERIOD_LIMIT {
        return Err(SpectralError::PeriodTooLong { period, limit: PERIOD_LIMIT });
    }
    let mut coeffs = sd.peripheral_coefficients(rho0)?;
    for c in coeffs.iter_mut() {
        if c.norm() <= sd.tol.coeff {
            *c = C64::ZERO;
        }
    }
    let m = sd.peripheral_count;
    let mut out = Vec::with_capacity(period as usize);
    let mut phased = coeffs;
    for _ in 0..period {
        let v = sd.peripheral_basis.mul_vec(&phased);
        let mat = devectorize(&v, sd.dim)?.hermitian_part();
        out.push(DensityMatrix::new(mat, &sd.tol)?);
        for (i, c) in phased.iter_mut().enumerate().take(m) {
            *c *= sd.eigenvalues[i];
        }
    }
    Ok(out)
}

/// Analytic truncation bound: the smallest K such that the decay model
/// C omega^n n^(d-1) stays below epsilon for every n >= K (and K >= d, so
/// the nilpotent transient is over).
pub fn truncation_bound(
    sd: &SpectralData,
    report: &StabilityReport,
    eps: f64,
) -> Result<u64, SpectralError> {
    assert!(eps > 0.0, "epsilon must be positive");
    if !report.is_stable() {
        return Err(SpectralError::NotStable);
    }
    if sd.omega == 0.0 {
        // Purely nilpotent contracting part: gone after d_omega steps.
        return Ok(sd.d_omega as u64);
    }
    minimal_decay_bound(sd.decay_constant(), sd.omega, sd.d_omega, eps)
}

/// Smallest K >= d_omega with C omega^n n^(d_omega - 1) < eps for all
/// n >= K, evaluated in log space.
fn minimal_decay_bound(c: f64, omega: f64, d_omega: usize, eps: f64) -> Result<u64, SpectralError> {
    const CAP: u64 = 1 << 62;
    debug_assert!(omega > 0.0 && omega < 1.0);
    let ln_c = c.ln();
    let ln_w = omega.ln();
    let ln_e = eps.ln();
    let de = (d_omega.max(1) - 1) as f64;
    let lf = |k: u64| ln_c + k as f64 * ln_w + de * (k as f64).ln();
    let start = d_omega.max(1) as u64;
    // The model rises until k* = -de / ln(omega), then decays forever.
    let k_star = if de == 0.0 { 0 } else { (-de / ln_w).ceil() as u64 };
    let peak = k_star.max(start);
    if lf(peak) < ln_e {
        return Ok(start);
    }
    // First sub-epsilon point on the decreasing tail, by bracket and bisect.
    let mut lo = peak;
    let mut hi = peak.saturating_mul(2).max(peak + 1);
    while lf(hi) >= ln_e {
        lo = hi;
        hi = hi.saturating_mul(2);
        if hi >= CAP {
            return Err(SpectralError::TruncationOverflow);
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if lf(mid) < ln_e {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Empirical truncation point: walks the trajectory and returns the first
/// index from which the distance to the limit cycle stays below
/// eps * SAFETY_MARGIN for CONFIRM_CYCLES full periods.
pub fn truncation_bound_simulated(
    g: &Qmc,
    states: &[DensityMatrix],
    eps: f64,
    n_max: u64,
) -> Result<u64, SpectralError> {
    assert!(eps > 0.0, "epsilon must be positive");
    assert!(!states.is_empty(), "limit cycle must be nonempty");
    let p = states.len() as u64;
    let window = (p * CONFIRM_CYCLES).max(1);
    let threshold = eps * SAFETY_MARGIN;
    let mut rho = g.initial.clone();
    let mut candidate: u64 = 0;
    let mut n: u64 = 0;
    loop {
        let target = &states[(n % p) as usize];
        let dist = rho.matrix().hs_distance(target.matrix());
        if dist >= threshold {
            candidate = n + 1;
        } else if n + 1 - candidate >= window {
            return Ok(candidate);
        }
        if n >= n_max + window {
            return Err(SpectralError::NoConvergence { n_max });
        }
        if candidate > n_max {
            return Err(SpectralError::NoConvergence { n_max });
        }
        rho = g.transition.apply(&rho)?;
        n += 1;
    }
}
