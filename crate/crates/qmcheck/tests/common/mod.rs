//! Shared generators and independent oracles for the integration suites.
//!
//! Everything here is deliberately written against first principles (dense
//! loops, explicit Kronecker products, fixpoint evaluation on lasso graphs)
//! rather than through the library's own machinery, so agreement between
//! the two is evidence, not tautology.

#![allow(dead_code)]

use qmcheck::linalg::{C64, ComplexMatrix, DensityMatrix, SuperOperator, Tolerances};
use qmcheck::mltl::{Formula, Letter};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn tol() -> Tolerances {
    Tolerances::default()
}

// ---------------------------------------------------------------------
// Matrices and channels.

pub fn standard_complex(rng: &mut ChaCha8Rng) -> C64 {
    // Box-Muller pairs; unit-variance complex Gaussian.
    let u1: f64 = rng.random::<f64>().max(1e-12);
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    C64::new(r * (std::f64::consts::TAU * u2).cos(), r * (std::f64::consts::TAU * u2).sin())
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            m.set(i, j, standard_complex(rng));
        }
    }
    m
}

/// Gram-Schmidt orthonormalization of the columns of a (rows x cols)
/// Gaussian matrix: a Haar-ish isometry, rows >= cols.
pub fn random_isometry(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    assert!(rows >= cols);
    let mut cols_v: Vec<Vec<C64>> = Vec::with_capacity(cols);
    while cols_v.len() < cols {
        let mut v: Vec<C64> = (0..rows).map(|_| standard_complex(rng)).collect();
        for prev in &cols_v {
            let inner: C64 = prev.iter().zip(&v).map(|(p, x)| p.conj() * x).sum();
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= inner * p;
            }
        }
        let norm: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-6 {
            continue;
        }
        for x in &mut v {
            *x /= norm;
        }
        cols_v.push(v);
    }
    let mut m = ComplexMatrix::zeros(rows, cols);
    for (j, v) in cols_v.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            m.set(i, j, *x);
        }
    }
    m
}

pub fn random_unitary(rng: &mut ChaCha8Rng, d: usize) -> ComplexMatrix {
    random_isometry(rng, d, d)
}

/// A random channel with n_kraus operators: stack an isometry V from
/// C^d to C^(n_kraus * d) and slice it into d x d blocks. Completeness
/// sum E_k^dag E_k = V^dag V = I holds by construction.
pub fn random_channel(rng: &mut ChaCha8Rng, d: usize, n_kraus: usize) -> SuperOperator {
    let iso = random_isometry(rng, n_kraus * d, d);
    let mut kraus = Vec::with_capacity(n_kraus);
    for k in 0..n_kraus {
        let mut e = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                e.set(i, j, iso.get(k * d + i, j));
            }
        }
        kraus.push(e);
    }
    SuperOperator::new(kraus, &tol()).expect("isometry blocks form a channel")
}

pub fn random_density(rng: &mut ChaCha8Rng, d: usize) -> DensityMatrix {
    let a = random_matrix(rng, d, d);
    let psd = a.matmul(&a.adjoint());
    let trace: f64 = (0..d).map(|i| psd.get(i, i).re).sum();
    let rho = psd.scale(C64::new(1.0 / trace, 0.0));
    DensityMatrix::new(rho, &tol()).expect("normalized Gram matrix is a state")
}

pub fn random_stochastic(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<f64>> {
    (0..d).map(|_| random_distribution(rng, d)).collect()
}

pub fn random_distribution(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

// ---------------------------------------------------------------------
// Dense reference arithmetic.

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ar, ac, br, bc) = (a.rows(), a.cols(), b.rows(), b.cols());
    let mut out = ComplexMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let aij = a.get(i, j);
            for k in 0..br {
                for l in 0..bc {
                    out.set(i * br + k, j * bc + l, aij * b.get(k, l));
                }
            }
        }
    }
    out
}

pub fn conj_matrix(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint().transpose()
}

/// Row-major vectorization: entry (i, j) lands at index i * cols + j.
pub fn vec_row_major(m: &ComplexMatrix) -> Vec<C64> {
    let mut v = Vec::with_capacity(m.rows() * m.cols());
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            v.push(m.get(i, j));
        }
    }
    v
}

/// The matrix representation sum_k E_k (x) conj(E_k), built directly.
pub fn superop_matrix(kraus: &[ComplexMatrix]) -> ComplexMatrix {
    let d = kraus[0].rows();
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for e in kraus {
        let term = kron(e, &conj_matrix(e));
        for i in 0..d * d {
            for j in 0..d * d {
                m.set(i, j, m.get(i, j) + term.get(i, j));
            }
        }
    }
    m
}

pub fn matrix_sub(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows(), a.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            out.set(i, j, a.get(i, j) - b.get(i, j));
        }
    }
    out
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    let mut s = 0.0;
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            s += m.get(i, j).norm_sqr();
        }
    }
    s.sqrt()
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------
// LTL on ultimately periodic words, by fixpoint on the lasso graph.

/// Truth of `phi` at position 0 of the word stem . cycle^omega.
pub fn eval_lasso(phi: &Formula, stem: &[Letter], cycle: &[Letter]) -> bool {
    assert!(!cycle.is_empty());
    let letters: Vec<&Letter> = stem.iter().chain(cycle.iter()).collect();
    eval_positions(phi, &letters, stem.len())[0]
}

/// Truth of `phi` at every position of the lasso graph: positions
/// 0..stem+cycle, where the last position loops back to `loop_start`.
fn eval_positions(phi: &Formula, letters: &[&Letter], loop_start: usize) -> Vec<bool> {
    let n = letters.len();
    let succ = |i: usize| if i + 1 < n { i + 1 } else { loop_start };
    match phi {
        Formula::True => vec![true; n],
        Formula::Ap(name) => letters.iter().map(|l| l.contains(name)).collect(),
        Formula::Not(f) => {
            let v = eval_positions(f, letters, loop_start);
            v.into_iter().map(|x| !x).collect()
        }
        Formula::Or(a, b) => {
            let va = eval_positions(a, letters, loop_start);
            let vb = eval_positions(b, letters, loop_start);
            va.into_iter().zip(vb).map(|(x, y)| x || y).collect()
        }
        Formula::And(a, b) => {
            let va = eval_positions(a, letters, loop_start);
            let vb = eval_positions(b, letters, loop_start);
            va.into_iter().zip(vb).map(|(x, y)| x && y).collect()
        }
        Formula::Implies(a, b) => {
            let va = eval_positions(a, letters, loop_start);
            let vb = eval_positions(b, letters, loop_start);
            va.into_iter().zip(vb).map(|(x, y)| !x || y).collect()
        }
        Formula::Next(f) => {
            let v = eval_positions(f, letters, loop_start);
            (0..n).map(|i| v[succ(i)]).collect()
        }
        Formula::Until(l, r) => {
            let vl = eval_positions(l, letters, loop_start);
            let vr = eval_positions(r, letters, loop_start);
            // Least fixpoint of x = r or (l and X x).
            let mut x = vec![false; n];
            for _ in 0..=n {
                let mut changed = false;
                for i in (0..n).rev() {
                    let next = vr[i] || (vl[i] && x[succ(i)]);
                    if next != x[i] {
                        x[i] = next;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            x
        }
        Formula::Eventually(f) => {
            let vf = eval_positions(f, letters, loop_start);
            let mut x = vec![false; n];
            for _ in 0..=n {
                let mut changed = false;
                for i in (0..n).rev() {
                    let next = vf[i] || x[succ(i)];
                    if next != x[i] {
                        x[i] = next;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            x
        }
        Formula::Always(f) => {
            let vf = eval_positions(f, letters, loop_start);
            // Greatest fixpoint of x = f and X x.
            let mut x = vec![true; n];
            for _ in 0..=n {
                let mut changed = false;
                for i in (0..n).rev() {
                    let next = vf[i] && x[succ(i)];
                    if next != x[i] {
                        x[i] = next;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            x
        }
    }
}

// ---------------------------------------------------------------------
// Random formulas and words.

pub fn random_letter(rng: &mut ChaCha8Rng, names: &[&str]) -> Letter {
    Letter::from_names(names.iter().filter(|_| rng.random_bool(0.5)).copied())
}

pub fn random_word(rng: &mut ChaCha8Rng, names: &[&str], max_len: usize, min_len: usize) -> Vec<Letter> {
    let len = rng.random_range(min_len..=max_len);
    (0..len).map(|_| random_letter(rng, names)).collect()
}

pub fn random_formula(rng: &mut ChaCha8Rng, names: &[&str], depth: usize) -> Formula {
    if depth == 0 || rng.random_bool(0.2) {
        return match rng.random_range(0..6) {
            0 => Formula::True,
            1 => Formula::not(Formula::True),
            _ => Formula::ap(names[rng.random_range(0..names.len())]),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_formula(rng, names, depth - 1);
    match rng.random_range(0..8) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        3 => Formula::implies(sub(rng), sub(rng)),
        4 => Formula::next(sub(rng)),
        5 => Formula::until(sub(rng), sub(rng)),
        6 => Formula::eventually(sub(rng)),
        _ => Formula::always(sub(rng)),
    }
}

// ---------------------------------------------------------------------
// Classical reference dynamics.

/// One step of the classical pushforward mu -> mu P.
pub fn push_distribution(mu: &[f64], p: &[Vec<f64>]) -> Vec<f64> {
    let d = mu.len();
    let mut out = vec![0.0; d];
    for k in 0..d {
        for l in 0..d {
            out[l] += mu[k] * p[k][l];
        }
    }
    out
}
