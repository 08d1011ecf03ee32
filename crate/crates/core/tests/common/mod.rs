//! Shared test oracles: reference computations written independently of
//! the library's own dense helpers (own matrix algebra, own gate
//! definitions, own Fock-basis ladder operators, own eigensolver), so
//! agreement between the two is evidence rather than tautology.

#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use sparse_vqe::{AnsatzCircuit, Gate, OneSparseHermitian, SelfInverseTerm};

pub type Mat = Vec<Vec<Complex64>>;

pub fn zeros(dim: usize) -> Mat {
    vec![vec![Complex64::new(0.0, 0.0); dim]; dim]
}

pub fn identity(dim: usize) -> Mat {
    let mut m = zeros(dim);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    m
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let dim = a.len();
    let mut out = zeros(dim);
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i][k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..dim {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn mat_adjoint(a: &Mat) -> Mat {
    let dim = a.len();
    let mut out = zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            out[j][i] = a[i][j].conj();
        }
    }
    out
}

pub fn mat_scale(a: &Mat, s: Complex64) -> Mat {
    a.iter()
        .map(|row| row.iter().map(|v| v * s).collect())
        .collect()
}

pub fn mat_add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn mat_vec(a: &Mat, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
        .collect()
}

/// Largest entry-magnitude difference.
pub fn max_norm_diff(a: &Mat, b: &Mat) -> f64 {
    let mut worst = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).norm());
        }
    }
    worst
}

pub fn is_exactly_equal(a: &Mat, b: &Mat) -> bool {
    a.iter()
        .zip(b)
        .all(|(ra, rb)| ra.iter().zip(rb).all(|(x, y)| x == y))
}

pub fn is_exactly_hermitian(a: &Mat) -> bool {
    let dim = a.len();
    (0..dim).all(|i| (0..dim).all(|j| a[i][j] == a[j][i].conj()))
}

/// Number of nonzeros in the densest row (== column count by Hermiticity).
pub fn max_row_nonzeros(a: &Mat) -> usize {
    a.iter()
        .map(|row| {
            row.iter()
                .filter(|v| **v != Complex64::new(0.0, 0.0))
                .count()
        })
        .max()
        .unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Eigenvalues: cyclic Jacobi on real symmetric matrices, with Hermitian
// matrices handled through the standard real embedding [[A, -B], [B, A]]
// (H = A + iB), whose spectrum is H's with every eigenvalue doubled.
// ---------------------------------------------------------------------------

pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigenvalues.sort_by(f64::total_cmp);
    eigenvalues
}

pub fn hermitian_eigenvalues(h: &Mat) -> Vec<f64> {
    let dim = h.len();
    let mut embedded = vec![vec![0.0f64; 2 * dim]; 2 * dim];
    for i in 0..dim {
        for j in 0..dim {
            embedded[i][j] = h[i][j].re;
            embedded[i][j + dim] = -h[i][j].im;
            embedded[i + dim][j] = h[i][j].im;
            embedded[i + dim][j + dim] = h[i][j].re;
        }
    }
    let doubled = symmetric_eigenvalues(embedded);
    doubled.into_iter().step_by(2).collect()
}

// ---------------------------------------------------------------------------
// Random operator generators. All take the caller's RNG so tests stay
// deterministic under their fixed seeds.
// ---------------------------------------------------------------------------

/// Upper-triangle pairs of a random one-sparse Hermitian matrix: a random
/// partial involution on the basis, off-diagonal values complex with
/// modulus in [0.1, max_abs], diagonal values real.
pub fn random_one_sparse_pairs(
    rng: &mut impl Rng,
    num_qubits: usize,
    max_abs: f64,
) -> Vec<(usize, usize, Complex64)> {
    let dim = 1usize << num_qubits;
    let mut order: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let mut pairs = Vec::new();
    let mut i = 0;
    while i < dim {
        let leave_empty = rng.gen_bool(0.15);
        let diagonal = rng.gen_bool(0.3);
        if leave_empty {
            i += 1;
            continue;
        }
        let magnitude = rng.gen_range(0.1..=max_abs);
        if diagonal || i + 1 >= dim {
            pairs.push((
                order[i],
                order[i],
                Complex64::new(magnitude, 0.0) * sign_of(rng),
            ));
            i += 1;
        } else {
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let (x, y) = (order[i].min(order[i + 1]), order[i].max(order[i + 1]));
            pairs.push((x, y, Complex64::from_polar(magnitude, phase)));
            i += 2;
        }
    }
    if pairs.is_empty() {
        pairs.push((0, 0, Complex64::new(max_abs, 0.0)));
    }
    pairs
}

fn sign_of(rng: &mut impl Rng) -> Complex64 {
    if rng.gen_bool(0.5) {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(-1.0, 0.0)
    }
}

/// Upper-triangle entries of a random Hermitian matrix with at most `d`
/// nonzeros per row/column. Diagonal entries count toward their row;
/// off-diagonal entries count toward both rows.
pub fn random_d_sparse_entries(
    rng: &mut impl Rng,
    num_qubits: usize,
    d: usize,
    max_abs: f64,
) -> Vec<(usize, usize, Complex64)> {
    let dim = 1usize << num_qubits;
    let mut capacity = vec![d; dim];
    let mut taken = std::collections::HashSet::new();
    let mut entries = Vec::new();
    for _ in 0..(dim * d * 4) {
        let a = rng.gen_range(0..dim);
        let b = rng.gen_range(0..dim);
        let (x, y) = (a.min(b), a.max(b));
        if taken.contains(&(x, y)) {
            continue;
        }
        let magnitude = rng.gen_range(0.1..=max_abs);
        if x == y {
            if capacity[x] == 0 {
                continue;
            }
            capacity[x] -= 1;
            entries.push((x, y, Complex64::new(magnitude, 0.0) * sign_of(rng)));
        } else {
            if capacity[x] == 0 || capacity[y] == 0 {
                continue;
            }
            capacity[x] -= 1;
            capacity[y] -= 1;
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            entries.push((x, y, Complex64::from_polar(magnitude, phase)));
        }
        taken.insert((x, y));
    }
    if entries.is_empty() {
        entries.push((0, 0, Complex64::new(max_abs, 0.0)));
    }
    entries
}

/// Dense Hermitian matrix from upper-triangle entries (mirrors implied).
pub fn dense_from_upper(entries: &[(usize, usize, Complex64)], dim: usize) -> Mat {
    let mut m = zeros(dim);
    for &(x, y, v) in entries {
        m[x][y] = v;
        if x != y {
            m[y][x] = v.conj();
        }
    }
    m
}

/// Dense matrix of a one-sparse operator read through its oracles.
pub fn one_sparse_dense(piece: &OneSparseHermitian) -> Mat {
    let dim = piece.dimension();
    let mut m = zeros(dim);
    for x in 0..dim {
        let v = piece.entry(x);
        if v != Complex64::new(0.0, 0.0) {
            m[x][piece.partner(x)] = v;
        }
    }
    m
}

/// Dense matrix of a self-inverse term read through its oracles.
pub fn term_dense(term: &SelfInverseTerm) -> Mat {
    let dim = term.dimension();
    let mut m = zeros(dim);
    for x in 0..dim {
        m[x][term.partner(x)] = term.value(x);
    }
    m
}

// ---------------------------------------------------------------------------
// Independent circuit-to-matrix construction: own gate definitions, own
// embedding by index arithmetic (qubit q is bit q of the basis index).
// ---------------------------------------------------------------------------

fn single_qubit_dense(g: [[Complex64; 2]; 2], qubit: usize, n: usize) -> Mat {
    let dim = 1usize << n;
    let mask = 1usize << qubit;
    let mut m = zeros(dim);
    for j in 0..dim {
        let jb = (j & mask != 0) as usize;
        for ib in 0..2 {
            let i = (j & !mask) | (ib << qubit);
            m[i][j] = g[ib][jb];
        }
    }
    m
}

pub fn gate_dense(gate: &Gate, theta: &[f64], n: usize) -> Mat {
    let c0 = Complex64::new(0.0, 0.0);
    let c1 = Complex64::new(1.0, 0.0);
    let ci = Complex64::new(0.0, 1.0);
    match *gate {
        Gate::X(q) => single_qubit_dense([[c0, c1], [c1, c0]], q, n),
        Gate::Y(q) => single_qubit_dense([[c0, -ci], [ci, c0]], q, n),
        Gate::Z(q) => single_qubit_dense([[c1, c0], [c0, -c1]], q, n),
        Gate::H(q) => {
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            single_qubit_dense([[h, h], [h, -h]], q, n)
        }
        Gate::S(q) => single_qubit_dense([[c1, c0], [c0, ci]], q, n),
        Gate::SDagger(q) => single_qubit_dense([[c1, c0], [c0, -ci]], q, n),
        Gate::Rx(q, slot) => {
            let half = theta[slot] / 2.0;
            let (c, s) = (
                Complex64::new(half.cos(), 0.0),
                Complex64::new(0.0, -half.sin()),
            );
            single_qubit_dense([[c, s], [s, c]], q, n)
        }
        Gate::Ry(q, slot) => {
            let half = theta[slot] / 2.0;
            let (c, s) = (
                Complex64::new(half.cos(), 0.0),
                Complex64::new(half.sin(), 0.0),
            );
            single_qubit_dense([[c, -s], [s, c]], q, n)
        }
        Gate::Rz(q, slot) => {
            let half = theta[slot] / 2.0;
            single_qubit_dense(
                [
                    [Complex64::from_polar(1.0, -half), c0],
                    [c0, Complex64::from_polar(1.0, half)],
                ],
                q,
                n,
            )
        }
        Gate::Cnot(control, target) => {
            let dim = 1usize << n;
            let mut m = zeros(dim);
            for j in 0..dim {
                let i = if j & (1 << control) != 0 {
                    j ^ (1 << target)
                } else {
                    j
                };
                m[i][j] = c1;
            }
            m
        }
        Gate::Cz(a, b) => {
            let dim = 1usize << n;
            let mut m = zeros(dim);
            for j in 0..dim {
                m[j][j] = if j & (1 << a) != 0 && j & (1 << b) != 0 {
                    -c1
                } else {
                    c1
                };
            }
            m
        }
    }
}

/// Full unitary of an ansatz circuit: the product of its gate embeddings
/// in listed order (first gate acts first).
pub fn circuit_dense(circuit: &AnsatzCircuit, theta: &[f64]) -> Mat {
    let n = circuit.num_qubits();
    let mut u = identity(1 << n);
    for gate in circuit.gates() {
        u = mat_mul(&gate_dense(gate, theta, n), &u);
    }
    u
}

/// `circuit |0...0>` as a dense vector.
pub fn circuit_state(circuit: &AnsatzCircuit, theta: &[f64]) -> Vec<Complex64> {
    let u = circuit_dense(circuit, theta);
    (0..u.len()).map(|i| u[i][0]).collect()
}

// ---------------------------------------------------------------------------
// Brute-force Fock-basis ladder operators (Jordan-Wigner): basis index bit
// p is occupation of mode p, with the fermionic parity counted over modes
// strictly below the acted mode.
// ---------------------------------------------------------------------------

pub fn creation_dense(mode: usize, num_modes: usize) -> Mat {
    let dim = 1usize << num_modes;
    let mut m = zeros(dim);
    let bit = 1usize << mode;
    for x in 0..dim {
        if x & bit == 0 {
            let parity = (x & (bit - 1)).count_ones();
            let sign = if parity % 2 == 0 { 1.0 } else { -1.0 };
            m[x | bit][x] = Complex64::new(sign, 0.0);
        }
    }
    m
}

pub fn annihilation_dense(mode: usize, num_modes: usize) -> Mat {
    mat_adjoint(&creation_dense(mode, num_modes))
}

/// Dense matrix of coefficient * (product of ladder operators in listed
/// order), `ops` entries being (is_creation, mode).
pub fn monomial_dense(coefficient: Complex64, ops: &[(bool, usize)], num_modes: usize) -> Mat {
    let mut m = identity(1 << num_modes);
    for &(is_creation, mode) in ops {
        let op = if is_creation {
            creation_dense(mode, num_modes)
        } else {
            annihilation_dense(mode, num_modes)
        };
        m = mat_mul(&m, &op);
    }
    mat_scale(&m, coefficient)
}
