//! Dense complex matrices and state vectors for up to ~6 qubits.
//!
//! Everything the verifier needs: Kronecker products, embedding small gate
//! matrices into an n-qubit register, statevector simulation, and equality
//! up to a global phase. Qubit 0 is the most significant bit of a basis
//! index.

use num_complex::Complex64;
use thiserror::Error;

use crate::ir::{Circuit, GateKind};

pub type C = Complex64;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dim(String),
    #[error("target qubits must be distinct and in range: {0:?}")]
    BadTargets(Vec<usize>),
    #[error("gate has no defined matrix: {0}")]
    NoMatrix(String),
}

#[derive(Clone, Debug)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    a: Vec<C>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            a: vec![C::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[C]]) -> Mat {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = Mat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c);
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matrix product dimension mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let v = self[(i, k)];
                if v.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += v * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn dagger(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scaled(&self, s: C) -> Mat {
        let mut out = self.clone();
        for v in &mut out.a {
            *v *= s;
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.a
            .iter()
            .zip(&other.a)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        self.mul(&self.dagger())
            .max_abs_diff(&Mat::identity(self.rows))
            <= tol
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = C;
    fn index(&self, (i, j): (usize, usize)) -> &C {
        &self.a[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C {
        &mut self.a[i * self.cols + j]
    }
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.rows * b.rows, a.cols * b.cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let v = a[(i, j)];
            for k in 0..b.rows {
                for l in 0..b.cols {
                    out[(i * b.rows + k, j * b.cols + l)] = v * b[(k, l)];
                }
            }
        }
    }
    out
}

fn check_targets(targets: &[usize], n: usize) -> Result<(), LinalgError> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n || targets[..i].contains(&t) {
            return Err(LinalgError::BadTargets(targets.to_vec()));
        }
    }
    Ok(())
}

fn gather_bits(x: usize, targets: &[usize], n: usize) -> usize {
    let k = targets.len();
    let mut r = 0;
    for (i, &q) in targets.iter().enumerate() {
        let bit = (x >> (n - 1 - q)) & 1;
        r |= bit << (k - 1 - i);
    }
    r
}

fn scatter_bits(r: usize, targets: &[usize], n: usize) -> usize {
    let k = targets.len();
    let mut y = 0;
    for (i, &q) in targets.iter().enumerate() {
        let bit = (r >> (k - 1 - i)) & 1;
        y |= bit << (n - 1 - q);
    }
    y
}

/// Expands `u` (acting on `targets`, in the given order) to the full
/// `2^n`-dimensional register, identity elsewhere.
pub fn embed(u: &Mat, targets: &[usize], n: usize) -> Result<Mat, LinalgError> {
    check_targets(targets, n)?;
    let k = targets.len();
    if u.rows != (1 << k) || u.cols != (1 << k) {
        return Err(LinalgError::Dim(format!(
            "{}x{} gate on {} targets",
            u.rows, u.cols, k
        )));
    }
    let dim = 1usize << n;
    let mask: usize = targets.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    let mut out = Mat::zeros(dim, dim);
    for x in 0..dim {
        let rx = gather_bits(x, targets, n);
        let rest = x & !mask;
        for ry in 0..(1 << k) {
            let y = rest | scatter_bits(ry, targets, n);
            out[(y, x)] = u[(ry, rx)];
        }
    }
    Ok(out)
}

/// True iff `u == lambda * v` entrywise for some unit-modulus `lambda`,
/// within `tol` on the max entry norm. `lambda` is read off the
/// largest-magnitude entry of `v`.
pub fn equiv_global_phase(u: &Mat, v: &Mat, tol: f64) -> bool {
    if (u.rows, u.cols) != (v.rows, v.cols) {
        return false;
    }
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, e) in v.a.iter().enumerate() {
        let nn = e.norm();
        if nn > best_norm {
            best_norm = nn;
            best = i;
        }
    }
    if best_norm <= tol {
        return u.a.iter().all(|e| e.norm() <= tol);
    }
    let lambda = u.a[best] / v.a[best];
    if (lambda.norm() - 1.0).abs() > 1e-6 {
        return false;
    }
    u.max_abs_diff(&v.scaled(lambda)) <= tol
}

/// Permutation of qubit labels: qubit `q` of the input becomes qubit
/// `perm[q]` of the output.
pub fn perm_matrix(perm: &[usize]) -> Mat {
    let n = perm.len();
    let dim = 1usize << n;
    let mut out = Mat::zeros(dim, dim);
    for x in 0..dim {
        let mut y = 0;
        for q in 0..n {
            let bit = (x >> (n - 1 - q)) & 1;
            y |= bit << (n - 1 - perm[q]);
        }
        out[(y, x)] = C::new(1.0, 0.0);
    }
    out
}

/// Discrete Fourier transform on `dim` points, `U[j][k] = w^(jk)/sqrt(dim)`.
pub fn dft(dim: usize) -> Mat {
    let mut out = Mat::zeros(dim, dim);
    let s = 1.0 / (dim as f64).sqrt();
    for j in 0..dim {
        for k in 0..dim {
            let ph = 2.0 * std::f64::consts::PI * (j * k % dim) as f64 / dim as f64;
            out[(j, k)] = C::from_polar(s, ph);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct StateVector {
    pub n: usize,
    pub amp: Vec<C>,
}

impl StateVector {
    pub fn basis(n: usize, index: usize) -> StateVector {
        let mut amp = vec![C::new(0.0, 0.0); 1 << n];
        amp[index] = C::new(1.0, 0.0);
        StateVector { n, amp }
    }

    pub fn zero(n: usize) -> StateVector {
        StateVector::basis(n, 0)
    }

    pub fn norm(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amp[index].norm_sqr()
    }

    /// Applies `u` to the given target qubits in place.
    pub fn apply(&mut self, u: &Mat, targets: &[usize]) -> Result<(), LinalgError> {
        check_targets(targets, self.n)?;
        let k = targets.len();
        if u.rows != (1 << k) || u.cols != (1 << k) {
            return Err(LinalgError::Dim(format!(
                "{}x{} gate on {} targets",
                u.rows, u.cols, k
            )));
        }
        let dim = 1usize << self.n;
        let mask: usize = targets.iter().map(|&q| 1usize << (self.n - 1 - q)).sum();
        let sub = 1usize << k;
        let mut scratch = vec![C::new(0.0, 0.0); sub];
        let mut idx = vec![0usize; sub];
        for rest in 0..dim {
            if rest & mask != 0 {
                continue;
            }
            for r in 0..sub {
                idx[r] = rest | scatter_bits(r, targets, self.n);
            }
            for r in 0..sub {
                let mut acc = C::new(0.0, 0.0);
                for c in 0..sub {
                    acc += u[(r, c)] * self.amp[idx[c]];
                }
                scratch[r] = acc;
            }
            for r in 0..sub {
                self.amp[idx[r]] = scratch[r];
            }
        }
        Ok(())
    }
}

/// Runs `circuit` on `input` by applying each gate's matrix in circuit
/// order. Black-box markers and barriers have no matrix; barriers are
/// skipped, unresolved oracles are an error.
pub fn simulate(circuit: &Circuit, input: &StateVector) -> Result<StateVector, LinalgError> {
    if circuit.n != input.n {
        return Err(LinalgError::Dim(format!(
            "circuit on {} qubits, state on {}",
            circuit.n, input.n
        )));
    }
    let mut state = input.clone();
    for gate in &circuit.gates {
        match &gate.kind {
            GateKind::Barrier => continue,
            GateKind::Oracle(tag) => {
                return Err(LinalgError::NoMatrix(format!("oracle {tag}")));
            }
            _ => {
                let u = crate::gatelib::gate_matrix(gate)
                    .map_err(|e| LinalgError::NoMatrix(e.to_string()))?;
                state.apply(&u, &gate.qubits)?;
            }
        }
    }
    Ok(state)
}

/// Builds the full unitary of a circuit by simulating all basis columns.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Mat, LinalgError> {
    let dim = 1usize << circuit.n;
    let mut out = Mat::zeros(dim, dim);
    for col in 0..dim {
        let st = simulate(circuit, &StateVector::basis(circuit.n, col))?;
        for row in 0..dim {
            out[(row, col)] = st.amp[row];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn pauli_x() -> Mat {
        Mat::from_rows(&[&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)]])
    }

    #[test]
    fn kron_identities() {
        let i2 = Mat::identity(2);
        assert!(kron(&i2, &i2).max_abs_diff(&Mat::identity(4)) < 1e-15);
        let xi = kron(&pauli_x(), &i2);
        // X on the high qubit swaps the two 2x2 blocks
        let mut expect = Mat::zeros(4, 4);
        expect[(0, 2)] = c(1.0, 0.0);
        expect[(1, 3)] = c(1.0, 0.0);
        expect[(2, 0)] = c(1.0, 0.0);
        expect[(3, 1)] = c(1.0, 0.0);
        assert!(xi.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn kron_matches_elementwise_oracle() {
        // Independent definition: out[(i,j)] = a[(i/rb, j/cb)] * b[(i%rb, j%cb)]
        let a = Mat::from_rows(&[&[c(0.3, 0.1), c(0.0, -0.7)], &[c(1.0, 0.0), c(0.2, 0.2)]]);
        let b = Mat::from_rows(&[&[c(0.5, 0.5), c(-0.1, 0.0)], &[c(0.0, 1.0), c(0.4, -0.3)]]);
        let k = kron(&a, &b);
        for i in 0..4 {
            for j in 0..4 {
                let expect = a[(i / 2, j / 2)] * b[(i % 2, j % 2)];
                assert!((k[(i, j)] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn embed_trivial_cases() {
        let x = pauli_x();
        let e = embed(&x, &[0], 1).unwrap();
        assert!(e.max_abs_diff(&x) < 1e-15);
        let xx = kron(&pauli_x(), &pauli_x());
        let e = embed(&xx, &[0, 1], 2).unwrap();
        assert!(e.max_abs_diff(&xx) < 1e-15);
    }

    #[test]
    fn embed_reversed_targets_basis_oracle() {
        // CNOT embedded as control=qubit2, target=qubit0 in a 3-qubit
        // register: checked against the truth table on all 8 basis states.
        let mut cnot = Mat::zeros(4, 4);
        cnot[(0, 0)] = c(1.0, 0.0);
        cnot[(1, 1)] = c(1.0, 0.0);
        cnot[(2, 3)] = c(1.0, 0.0);
        cnot[(3, 2)] = c(1.0, 0.0);
        let e = embed(&cnot, &[2, 0], 3).unwrap();
        for x in 0..8usize {
            let b2 = (x >> 0) & 1; // qubit 2 (lsb)
            let b0 = (x >> 2) & 1; // qubit 0 (msb)
            let y = if b2 == 1 { x ^ 0b100 } else { x };
            let _ = b0;
            for row in 0..8 {
                let expect = if row == y { 1.0 } else { 0.0 };
                assert!(
                    (e[(row, x)] - c(expect, 0.0)).norm() < 1e-15,
                    "column {x}"
                );
            }
        }
    }

    #[test]
    fn embed_rejects_bad_targets() {
        let x = pauli_x();
        assert!(embed(&x, &[3], 2).is_err());
        let xx = kron(&pauli_x(), &pauli_x());
        assert!(embed(&xx, &[1, 1], 3).is_err());
    }

    #[test]
    fn embed_disjoint_commutes() {
        let u = pauli_x();
        let mut v = Mat::identity(2);
        v[(1, 1)] = C::from_polar(1.0, 0.7);
        let a = embed(&u, &[0], 3).unwrap();
        let b = embed(&v, &[2], 3).unwrap();
        assert!(a.mul(&b).max_abs_diff(&b.mul(&a)) < 1e-12);
    }

    #[test]
    fn global_phase_equivalence() {
        let u = pauli_x();
        assert!(equiv_global_phase(&u, &u.scaled(c(-1.0, 0.0)), 1e-9));
        for k in 0..100 {
            let th = 0.0628 * k as f64 + 0.01;
            let v = u.scaled(C::from_polar(1.0, th));
            assert!(equiv_global_phase(&u, &v, 1e-9));
        }
        let mut w = u.clone();
        w[(0, 1)] = c(0.9, 0.0);
        assert!(!equiv_global_phase(&u, &w, 1e-9));
    }

    #[test]
    fn perm_matrix_moves_bits() {
        // perm swaps qubits 0 and 1 on two qubits: |01> -> |10>
        let p = perm_matrix(&[1, 0]);
        assert!((p[(0b10, 0b01)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((p[(0b01, 0b10)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((p[(0b00, 0b00)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dft_is_unitary() {
        assert!(dft(8).is_unitary(1e-12));
        assert!(dft(32).is_unitary(1e-12));
    }

    #[test]
    fn state_apply_matches_embed() {
        let u = pauli_x();
        let mut st = StateVector::basis(3, 0b000);
        st.apply(&u, &[1]).unwrap();
        assert!((st.probability(0b010) - 1.0).abs() < 1e-12);
        assert!((st.norm() - 1.0).abs() < 1e-12);
    }
}
