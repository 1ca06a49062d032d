//! Schur-form workhorse for the spectral module: computing the complex
//! Schur decomposition, reordering unit-modulus eigenvalues to the front,
//! extracting eigenvectors of the leading block, and decoupling the
//! contracting block with a Sylvester solve.
//!
//! The resulting factorization M = Q X J X^-1 Q' with J = diag(L, T22)
//! (L diagonal, T22 upper triangular and strictly contracting) is the
//! numerically stable stand-in for a Jordan decomposition: unit-modulus
//! eigenvalues of a quantum channel are semisimple, so they admit honest
//! eigenvectors, while the contracting part stays in Schur form.

use crate::linalg::{to_dmatrix, ComplexMatrix, C64};

use super::SpectralError;

/// Complex Schur decomposition M = Q T Q' with Q unitary and T upper
/// triangular.
pub(super) fn schur(m: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix), SpectralError> {
    let n = m.rows();
    let dm = to_dmatrix(m);
    let max_iter = 10 * n * n;
    let Some(schur) = nalgebra::linalg::Schur::try_new(dm, 1e-13, max_iter) else {
        return Err(SpectralError::SchurFailed { dim: n });
    };
    let (q, t) = schur.unpack();
    let to_cm = |d: &nalgebra::DMatrix<C64>| {
        ComplexMatrix::from_fn(d.nrows(), d.ncols(), |i, j| d[(i, j)])
    };
    let mut t_cm = to_cm(&t);
    // The strictly lower part is zero by contract; scrub rounding residue so
    // later triangular solves can trust it.
    for i in 0..n {
        for j in 0..i {
            t_cm.set(i, j, C64::ZERO);
        }
    }
    Ok((to_cm(&q), t_cm))
}

/// Swaps the diagonal entries at positions k and k+1 of the Schur form by a
/// unitary similarity, updating T and accumulating the rotation into Q.
fn swap_adjacent(q: &mut ComplexMatrix, t: &mut ComplexMatrix, k: usize) {
    let n = t.rows();
    let t11 = t.get(k, k);
    let t12 = t.get(k, k + 1);
    let t22 = t.get(k + 1, k + 1);
    // The 2x2 block [[t11,t12],[0,t22]] has eigenvector (t12, t22-t11) for
    // eigenvalue t22; a unitary with that as first column moves t22 to the
    // leading position.
    let v1 = t12;
    let v2 = t22 - t11;
    let r = (v1.norm_sqr() + v2.norm_sqr()).sqrt();
    if r <= f64::EPSILON * (t11.norm() + t22.norm() + 1.0) {
        // Coinciding eigenvalues in an already diagonal block: swapping two
        // equal values is the identity.
        return;
    }
    let g11 = v1 / r;
    let g21 = v2 / r;
    let g12 = -g21.conj();
    let g22 = g11.conj();

    // T <- G' T G restricted to rows/columns k, k+1; Q <- Q G.
    for i in 0..n {
        let a = t.get(i, k);
        let b = t.get(i, k + 1);
        t.set(i, k, a * g11 + b * g21);
        t.set(i, k + 1, a * g12 + b * g22);
    }
    for j in 0..n {
        let a = t.get(k, j);
        let b = t.get(k + 1, j);
        t.set(k, j, g11.conj() * a + g21.conj() * b);
        t.set(k + 1, j, g12.conj() * a + g22.conj() * b);
    }
    t.set(k + 1, k, C64::ZERO);
    for i in 0..n {
        let a = q.get(i, k);
        let b = q.get(i, k + 1);
        q.set(i, k, a * g11 + b * g21);
        q.set(i, k + 1, a * g12 + b * g22);
    }
}

/// Reorders the Schur form so every eigenvalue of modulus above
/// `1 - tol_unit` occupies a leading position; returns how many there are.
pub(super) fn reorder_peripheral_first(
    q: &mut ComplexMatrix,
    t: &mut ComplexMatrix,
    tol_unit: f64,
) -> usize {
    let n = t.rows();
    let mut front = 0;
    for j in 0..n {
        if t.get(j, j).norm() > 1.0 - tol_unit {
            let mut k = j;
            while k > front {
                swap_adjacent(q, t, k - 1);
                k -= 1;
            }
            front += 1;
        }
    }
    front
}

/// Eigenvectors of the leading m x m block of T, as the columns of a unit
/// upper-triangular matrix Y with T[..m,..m] Y = Y diag(T[..m,..m]).
///
/// Equal eigenvalues (within `tol_cluster`) must not couple: a nonzero
/// coupling would mean a genuine Jordan block on the unit circle, which a
/// trace-preserving channel cannot have, so couplings beyond `defect_tol`
/// are reported as a decomposition failure rather than silently inverted.
pub(super) fn peripheral_eigenvectors(
    t: &ComplexMatrix,
    m: usize,
    tol_cluster: f64,
    defect_tol: f64,
) -> Result<ComplexMatrix, SpectralError> {
    let mut y = ComplexMatrix::zeros(m, m);
    let mut max_coupling = 0.0f64;
    for i in 0..m {
        let lam = t.get(i, i);
        y.set(i, i, C64::ONE);
        for j in (0..i).rev() {
            let mut r = C64::ZERO;
            for k in j + 1..=i {
                r += t.get(j, k) * y.get(k, i);
            }
            let denom = t.get(j, j) - lam;
            if denom.norm() <= tol_cluster {
                let scale = (j + 1..=i).map(|k| y.get(k, i).norm()).fold(1.0, f64::max);
                max_coupling = max_coupling.max(r.norm() / scale);
                y.set(j, i, C64::ZERO);
            } else {
                y.set(j, i, -r / denom);
            }
        }
    }
    if max_coupling > defect_tol {
        return Err(SpectralError::DefectivePeripheral { coupling: max_coupling, tol: defect_tol });
    }
    Ok(y)
}

/// Inverse of a unit upper-triangular matrix by back substitution.
pub(super) fn unit_upper_inverse(y: &ComplexMatrix) -> ComplexMatrix {
    let m = y.rows();
    let mut x = ComplexMatrix::zeros(m, m);
    for c in 0..m {
        x.set(c, c, C64::ONE);
        for j in (0..c).rev() {
            let mut s = C64::ZERO;
            for k in j + 1..=c {
                s += y.get(j, k) * x.get(k, c);
            }
            x.set(j, c, -s);
        }
    }
    x
}

/// Solves T11 Z - Z T22 = -T12 for the block decoupling, where T11 is the
/// leading m x m block of T, T22 the trailing block, and T12 the coupling.
///
/// Solvable because the two diagonals never meet: T11 carries unit-modulus
/// eigenvalues, T22 strictly smaller ones. Near-tangent pairs produce a
/// large Z; that ill conditioning is real and is surfaced through the
/// condition number, not hidden.
pub(super) fn solve_sylvester(t: &ComplexMatrix, m: usize) -> ComplexMatrix {
    let n = t.rows();
    let w = n - m;
    let mut z = ComplexMatrix::zeros(m, w);
    for col in 0..w {
        let mut rhs: Vec<C64> = (0..m).map(|i| -t.get(i, m + col)).collect();
        for k in 0..col {
            let c = t.get(m + k, m + col);
            if c == C64::ZERO {
                continue;
            }
            for (i, r) in rhs.iter_mut().enumerate() {
                *r += z.get(i, k) * c;
            }
        }
        let mu = t.get(m + col, m + col);
        for i in (0..m).rev() {
            let mut s = rhs[i];
            for k in i + 1..m {
                s -= t.get(i, k) * z.get(k, col);
            }
            let denom = t.get(i, i) - mu;
            z.set(i, col, s / denom);
        }
    }
    z
}

/// Ratio by which powers of the contracting block overshoot the model decay
/// omega^n n^(d-1), maximized over a fixed horizon.
///
/// The analytic truncation bound multiplies its constant by this factor so
/// that transient growth of a non-normal T22 cannot make the bound claim
/// decay before it happens. Blocks too large to power up cheaply return 1;
/// the checker independently cross-validates with simulation in that case.
pub(super) fn transient_factor(t22: &ComplexMatrix, omega: f64, d_omega: usize) -> f64 {
    const MAX_SIDE: usize = 160;
    const HORIZON: usize = 64;
    let w = t22.rows();
    if w == 0 || w > MAX_SIDE || omega <= 0.0 {
        return 1.0;
    }
    let mut power = t22.clone();
    let mut factor = 1.0f64;
    for n in 1..=HORIZON {
        if n > 1 {
            power = power.matmul(t22);
        }
        let norm = power.hs_norm();
        let model = omega.powi(n as i32) * (n as f64).powi(d_omega as i32 - 1);
        if model <= f64::MIN_POSITIVE || norm == 0.0 {
            break;
        }
        factor = factor.max(norm / model);
    }
    factor
}

/// Minimal deterministic RNG for residual probing (splitmix64 stream).
pub(super) struct ProbeRng(u64);

impl ProbeRng {
    pub(super) fn new(seed: u64) -> Self {
        ProbeRng(seed)
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn next_unit(&mut self) -> f64 {
        // In (0, 1]: safe as a Box-Muller log argument.
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    pub(super) fn next_gaussian(&mut self) -> (f64, f64) {
        let r = (-2.0 * self.next_unit().ln()).sqrt();
        let theta = std::f64::consts::TAU * self.next_unit();
        (r * theta.cos(), r * theta.sin())
    }

    pub(super) fn gaussian_vector(&mut self, n: usize) -> Vec<C64> {
        (0..n)
            .map(|_| {
                let (re, im) = self.next_gaussian();
                C64::new(re, im)
            })
            .collect()
    }
}
