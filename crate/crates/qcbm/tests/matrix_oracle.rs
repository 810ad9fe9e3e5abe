//! Checks the statevector simulator against an independent dense-matrix
//! route: every gate is embedded as a Kronecker product into the full
//! 2^n × 2^n unitary and the circuit is evaluated by matrix-vector products.
//! The two routes share no code, so agreement pins both the gate definitions
//! and the qubit-0-is-the-top-bit index convention.

use num_complex::Complex64;
use qcbm::sim::{born_probabilities, AnsatzSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Matrix = Vec<Vec<Complex64>>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn identity(dim: usize) -> Matrix {
    let mut m = vec![vec![zero(); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

fn kronecker(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![zero(); ra * rb]; ra * rb];
    for (i, out_row) in out.iter_mut().enumerate() {
        for (j, entry) in out_row.iter_mut().enumerate() {
            *entry = a[i / rb][j / rb] * b[i % rb][j % rb];
        }
    }
    out
}

fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let dim = a.len();
    let mut out = vec![vec![zero(); dim]; dim];
    for (i, out_row) in out.iter_mut().enumerate() {
        for k in 0..dim {
            let aik = a[i][k];
            for (j, entry) in out_row.iter_mut().enumerate() {
                *entry += aik * b[k][j];
            }
        }
    }
    out
}

/// Single-qubit gate on qubit `j` of `n` (qubit 0 = most significant bit):
/// I^{⊗j} ⊗ U ⊗ I^{⊗(n−1−j)}.
fn embed(gate: &Matrix, qubit: usize, n: usize) -> Matrix {
    let left = identity(1 << qubit);
    let right = identity(1 << (n - 1 - qubit));
    kronecker(&kronecker(&left, gate), &right)
}

fn hadamard() -> Matrix {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    vec![vec![h, h], vec![h, -h]]
}

fn rz(theta: f64) -> Matrix {
    vec![
        vec![Complex64::from_polar(1.0, -theta), zero()],
        vec![zero(), Complex64::from_polar(1.0, theta)],
    ]
}

fn rx(theta: f64) -> Matrix {
    let c = Complex64::new(theta.cos(), 0.0);
    let ms = Complex64::new(0.0, -theta.sin());
    vec![vec![c, ms], vec![ms, c]]
}

/// CZ on qubits (a, b): −1 on basis states with both bits set.
fn cz(a: usize, b: usize, n: usize) -> Matrix {
    let dim = 1 << n;
    let mask = (1 << (n - 1 - a)) | (1 << (n - 1 - b));
    let mut m = identity(dim);
    for (i, row) in m.iter_mut().enumerate() {
        if i & mask == mask {
            row[i] = -row[i];
        }
    }
    m
}

/// The full circuit unitary: initial H wall, then depth blocks of per-qubit
/// Rz·Rx followed by a CZ ladder, then one final Rz·Rx layer.
fn circuit_matrix(ansatz: &AnsatzSpec, params: &[f64]) -> Matrix {
    let n = ansatz.n_qubits();
    let mut unitary = identity(1 << n);
    for qubit in 0..n {
        unitary = matmul(&embed(&hadamard(), qubit, n), &unitary);
    }
    let mut next = 0;
    for layer in 0..=ansatz.depth() {
        for qubit in 0..n {
            unitary = matmul(&embed(&rz(params[next]), qubit, n), &unitary);
            unitary = matmul(&embed(&rx(params[next + 1]), qubit, n), &unitary);
            next += 2;
        }
        if layer < ansatz.depth() && n > 1 {
            for qubit in 0..n - 1 {
                unitary = matmul(&cz(qubit, qubit + 1, n), &unitary);
            }
        }
    }
    unitary
}

fn matrix_probabilities(ansatz: &AnsatzSpec, params: &[f64]) -> Vec<f64> {
    let unitary = circuit_matrix(ansatz, params);
    // the state is the first column: U applied to |0…0⟩
    unitary.iter().map(|row| row[0].norm_sqr()).collect()
}

#[test]
fn simulator_matches_the_kronecker_route() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for n in 1..=3 {
        for depth in 0..=2 {
            let ansatz = AnsatzSpec::new(n, depth).unwrap();
            for _ in 0..4 {
                let params: Vec<f64> = (0..ansatz.param_count())
                    .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
                    .collect();
                let fast = born_probabilities(&ansatz, &params).unwrap();
                let slow = matrix_probabilities(&ansatz, &params);
                for (x, (&a, &b)) in fast.probabilities().iter().zip(&slow).enumerate() {
                    assert!(
                        (a - b).abs() < 1e-12,
                        "n={n} depth={depth} outcome={x}: {a} vs {b}"
                    );
                }
            }
        }
    }
}

#[test]
fn one_qubit_probabilities_match_the_closed_form() {
    // Rx(θx)·Rz(θz)·H|0⟩ gives p(0) = (1 + sin 2θx · sin 2θz)/2.
    let ansatz = AnsatzSpec::new(1, 0).unwrap();
    for &(tz, tx) in &[
        (0.0, 0.0),
        (std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_8),
        (0.3, -0.7),
        (-1.2, 0.4),
    ] {
        let dist = born_probabilities(&ansatz, &[tz, tx]).unwrap();
        let expected = 0.5 * (1.0 + (2.0 * tx).sin() * (2.0 * tz).sin());
        assert!(
            (dist.prob(0) - expected).abs() < 1e-12,
            "θz={tz} θx={tx}: {} vs {expected}",
            dist.prob(0)
        );
    }
}
