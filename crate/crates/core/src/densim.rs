//! Dense density-matrix simulator for up to six qubits.
//!
//! States are full `2^n x 2^n` complex matrices. Qubit 0 is the leftmost
//! tensor factor, i.e. the most significant bit of a basis index, so
//! `init_state(4, "1100")` puts probability 1 on basis index 12.
//!
//! Operations return new states; they do not re-validate invariants on every
//! call (validation costs an eigendecomposition). Tests and boundaries call
//! [`DensityMatrix::validate`] explicitly.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::seeding::rng_from_seed;
use crate::{gates, C64, CMatrix, Error, Result};

/// Largest register the dense representation is meant for.
pub const MAX_QUBITS: usize = 6;

/// Max entrywise deviation from Hermitian symmetry tolerated by `validate`.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Max deviation of the trace from 1 tolerated by `validate`.
pub const TRACE_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated by `validate`.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;
/// Residual imaginary part tolerated when a real expectation is extracted.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(ch: char) -> Result<Self> {
        match ch {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            _ => Err(Error::input(format!("invalid Pauli letter '{ch}'"))),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Tensor product of Pauli letters, one per qubit, leftmost letter on
/// qubit 0. Hermitian and unitary by construction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::input("Pauli string must have at least one letter"));
        }
        Ok(PauliString { letters })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let letters = text.chars().map(Pauli::from_char).collect::<Result<Vec<_>>>()?;
        Self::new(letters)
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliString { letters: vec![Pauli::I; n_qubits] }
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    /// Action on a basis column: `P |col> = phase |row>`. Each letter acts on
    /// its own bit, so this is O(n) and the matrix never needs to be built
    /// for state-vector-like work.
    pub fn column_action(&self, col: usize) -> (usize, C64) {
        let n = self.letters.len();
        let mut row = col;
        let mut phase = C64::new(1.0, 0.0);
        for (k, &p) in self.letters.iter().enumerate() {
            let pos = n - 1 - k;
            let bit = (col >> pos) & 1;
            match p {
                Pauli::I => {}
                Pauli::X => row ^= 1 << pos,
                Pauli::Y => {
                    row ^= 1 << pos;
                    phase *= if bit == 0 { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                }
                Pauli::Z => {
                    if bit == 1 {
                        phase = -phase;
                    }
                }
            }
        }
        (row, phase)
    }

    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.letters.len();
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (row, phase) = self.column_action(col);
            m[(row, col)] = phase;
        }
        m
    }

    /// `tr(P rho)`, using the one-nonzero-per-column structure of `P`.
    pub fn trace_with(&self, rho: &CMatrix) -> C64 {
        let dim = rho.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for col in 0..dim {
            let (row, phase) = self.column_action(col);
            // (P rho)[row, row] picks up P[row, col] rho[col, row].
            acc += phase * rho[(col, row)];
        }
        acc
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &p in &self.letters {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        PauliString::parse(&text).map_err(D::Error::custom)
    }
}

/// Validated unitary operator with a label for error-model lookups.
#[derive(Clone, Debug)]
pub struct UnitaryGate {
    label: String,
    matrix: CMatrix,
    arity: usize,
}

/// Max entrywise deviation of `U† U` from the identity.
pub fn unitarity_defect(m: &CMatrix) -> f64 {
    let dim = m.nrows();
    let prod = m.adjoint() * m;
    max_abs_diff(&prod, &gates::identity(dim))
}

impl UnitaryGate {
    pub fn new(label: impl Into<String>, matrix: CMatrix) -> Result<Self> {
        let label = label.into();
        let dim = matrix.nrows();
        if dim == 0 || matrix.ncols() != dim || !dim.is_power_of_two() {
            return Err(Error::input(format!(
                "gate {label}: matrix must be square with power-of-two dimension, got {dim}x{}",
                matrix.ncols()
            )));
        }
        let defect = unitarity_defect(&matrix);
        if defect > 1e-12 {
            return Err(Error::validation(format!(
                "gate {label}: matrix is not unitary (defect {defect:.3e})"
            )));
        }
        let arity = dim.trailing_zeros() as usize;
        Ok(UnitaryGate { label, matrix, arity })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn inverse(&self) -> Self {
        UnitaryGate {
            label: format!("{}_dag", self.label),
            matrix: self.matrix.adjoint(),
            arity: self.arity,
        }
    }
}

/// Kraus decomposition of a channel. Completeness `sum K† K = I` is enforced
/// at construction.
#[derive(Clone, Debug)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
    arity: usize,
}

impl KrausChannel {
    pub const COMPLETENESS_TOL: f64 = 1e-10;

    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let first = operators
            .first()
            .ok_or_else(|| Error::input("Kraus channel needs at least one operator"))?;
        let dim = first.nrows();
        if !dim.is_power_of_two() || dim == 0 {
            return Err(Error::input(format!("Kraus operators must be power-of-two dimension, got {dim}")));
        }
        if operators.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::input("Kraus operators must share one square dimension"));
        }
        let channel = KrausChannel { operators, arity: dim.trailing_zeros() as usize };
        let defect = channel.completeness_defect();
        if defect > Self::COMPLETENESS_TOL {
            return Err(Error::validation(format!(
                "Kraus set is not trace preserving (defect {defect:.3e})"
            )));
        }
        Ok(channel)
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Max entrywise deviation of `sum K† K` from the identity.
    pub fn completeness_defect(&self) -> f64 {
        let dim = self.operators[0].nrows();
        let mut acc = CMatrix::zeros(dim, dim);
        for k in &self.operators {
            acc += k.adjoint() * k;
        }
        max_abs_diff(&acc, &gates::identity(dim))
    }
}

/// Dense density matrix over `n_qubits`.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n_qubits: usize,
    data: CMatrix,
}

/// State preparation on a computational basis string, e.g.
/// `init_state(4, "1100")` (qubits 0 and 1 set, basis index 12).
pub fn init_state(n_qubits: usize, bitstring: &str) -> Result<DensityMatrix> {
    DensityMatrix::basis_state(n_qubits, bitstring)
}

impl DensityMatrix {
    pub fn basis_state(n_qubits: usize, bitstring: &str) -> Result<Self> {
        check_register_size(n_qubits)?;
        if bitstring.len() != n_qubits {
            return Err(Error::input(format!(
                "bitstring '{bitstring}' has {} bits, register has {n_qubits}",
                bitstring.len()
            )));
        }
        let mut index = 0usize;
        for ch in bitstring.chars() {
            index = (index << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    _ => return Err(Error::input(format!("invalid bit '{ch}' in '{bitstring}'"))),
                };
        }
        let dim = 1usize << n_qubits;
        let mut data = CMatrix::zeros(dim, dim);
        data[(index, index)] = C64::new(1.0, 0.0);
        Ok(DensityMatrix { n_qubits, data })
    }

    /// Wrap an existing matrix, enforcing all state invariants.
    pub fn from_matrix(n_qubits: usize, data: CMatrix) -> Result<Self> {
        check_register_size(n_qubits)?;
        let dim = 1usize << n_qubits;
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::input(format!(
                "expected {dim}x{dim} matrix for {n_qubits} qubits, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        let state = DensityMatrix { n_qubits, data };
        state.validate()?;
        Ok(state)
    }

    /// Wrap without validation; for internal steps whose algebra preserves
    /// the invariants.
    pub(crate) fn from_matrix_unchecked(n_qubits: usize, data: CMatrix) -> Self {
        DensityMatrix { n_qubits, data }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1usize << self.n_qubits
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs_diff(&self.data, &self.data.adjoint())
    }

    pub fn trace_defect(&self) -> f64 {
        (self.data.trace() - C64::new(1.0, 0.0)).norm()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()).scale(0.5);
        let eigen = herm.symmetric_eigen();
        eigen.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Check Hermiticity, unit trace, and positivity within the module
    /// tolerances.
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > HERMITICITY_TOL {
            return Err(Error::validation(format!("state not Hermitian (defect {h:.3e})")));
        }
        let t = self.trace_defect();
        if t > TRACE_TOL {
            return Err(Error::validation(format!("state trace differs from 1 by {t:.3e}")));
        }
        let lo = self.min_eigenvalue();
        if lo < EIGENVALUE_FLOOR {
            return Err(Error::validation(format!("state has eigenvalue {lo:.3e} below floor")));
        }
        Ok(())
    }

    /// Conjugate by a validated unitary embedded on `targets`.
    pub fn apply_unitary(&self, gate: &UnitaryGate, targets: &[usize]) -> Result<Self> {
        if gate.arity() != targets.len() {
            return Err(Error::input(format!(
                "gate {} acts on {} qubits, got {} targets",
                gate.label(),
                gate.arity(),
                targets.len()
            )));
        }
        self.apply_raw_unitary(gate.matrix(), targets)
    }

    /// Same as [`apply_unitary`](Self::apply_unitary) but without re-checking
    /// unitarity; the caller vouches for the matrix.
    pub fn apply_raw_unitary(&self, matrix: &CMatrix, targets: &[usize]) -> Result<Self> {
        let embedded = embed_operator(matrix, targets, self.n_qubits)?;
        let data = &embedded * &self.data * embedded.adjoint();
        Ok(DensityMatrix { n_qubits: self.n_qubits, data })
    }

    /// Apply a Kraus channel embedded on `targets`.
    pub fn apply_kraus(&self, channel: &KrausChannel, targets: &[usize]) -> Result<Self> {
        if channel.arity() != targets.len() {
            return Err(Error::input(format!(
                "channel acts on {} qubits, got {} targets",
                channel.arity(),
                targets.len()
            )));
        }
        let dim = self.dim();
        let mut data = CMatrix::zeros(dim, dim);
        for k in channel.operators() {
            let embedded = embed_operator(k, targets, self.n_qubits)?;
            data += &embedded * &self.data * embedded.adjoint();
        }
        Ok(DensityMatrix { n_qubits: self.n_qubits, data })
    }

    /// Real expectation value of a weighted Pauli sum. The accumulated
    /// imaginary residue must stay below [`IMAG_RESIDUE_TOL`].
    pub fn expectation_pauli_sum(&self, terms: &[(f64, PauliString)]) -> Result<f64> {
        let mut acc = C64::new(0.0, 0.0);
        for (coeff, pauli) in terms {
            if pauli.n_qubits() != self.n_qubits {
                return Err(Error::input(format!(
                    "Pauli string {pauli} has {} letters, register has {}",
                    pauli.n_qubits(),
                    self.n_qubits
                )));
            }
            acc += pauli.trace_with(&self.data).scale(*coeff);
        }
        if acc.im.abs() > IMAG_RESIDUE_TOL {
            return Err(Error::numerical(format!(
                "expectation has imaginary residue {:.3e}",
                acc.im
            )));
        }
        Ok(acc.re)
    }

    /// Diagonal in the computational basis, clamped to `[0, 1]`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.data
            .diagonal()
            .iter()
            .map(|z| z.re.clamp(0.0, 1.0))
            .collect()
    }

    /// Sample measurement counts in a Pauli product basis.
    ///
    /// Each qubit is rotated into the computational basis first (`H` for X,
    /// `S† H` in time order for Y, nothing for Z or I), then `shots`
    /// bitstrings are drawn with a ChaCha stream seeded by `seed`. Keys are
    /// bitstrings with qubit 0 leftmost.
    pub fn sample_counts(
        &self,
        basis: &PauliString,
        shots: u64,
        seed: u64,
    ) -> Result<BTreeMap<String, u64>> {
        if basis.n_qubits() != self.n_qubits {
            return Err(Error::input(format!(
                "measurement basis {basis} has {} letters, register has {}",
                basis.n_qubits(),
                self.n_qubits
            )));
        }
        let rotated = self.rotate_to_measurement_basis(basis)?;
        let probs = rotated.probabilities();
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::numerical("state has no positive probability mass".to_string()));
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut running = 0.0;
        for p in &probs {
            running += p / total;
            cdf.push(running);
        }
        let mut rng = rng_from_seed(seed);
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for _ in 0..shots {
            let r: f64 = rand::Rng::random(&mut rng);
            let idx = cdf.partition_point(|&edge| edge < r).min(probs.len() - 1);
            *counts.entry(index_to_bitstring(idx, self.n_qubits)).or_insert(0) += 1;
        }
        Ok(counts)
    }

    fn rotate_to_measurement_basis(&self, basis: &PauliString) -> Result<Self> {
        let mut state = self.clone();
        for (qubit, &p) in basis.letters().iter().enumerate() {
            match p {
                Pauli::I | Pauli::Z => {}
                Pauli::X => state = state.apply_raw_unitary(&gates::hadamard(), &[qubit])?,
                Pauli::Y => {
                    let rot = gates::hadamard() * gates::s_dag();
                    state = state.apply_raw_unitary(&rot, &[qubit])?;
                }
            }
        }
        Ok(state)
    }
}

/// A completely positive map on operator space. `apply_to_operator` must be
/// linear so process tomography can probe it with non-state operators.
pub trait QuantumProcess {
    fn n_qubits(&self) -> usize;

    fn apply_to_operator(&self, op: &CMatrix) -> CMatrix;

    fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.n_qubits() != self.n_qubits() {
            return Err(Error::input(format!(
                "process acts on {} qubits, state has {}",
                self.n_qubits(),
                rho.n_qubits()
            )));
        }
        Ok(DensityMatrix::from_matrix_unchecked(
            rho.n_qubits(),
            self.apply_to_operator(rho.data()),
        ))
    }
}

impl QuantumProcess for UnitaryGate {
    fn n_qubits(&self) -> usize {
        self.arity
    }

    fn apply_to_operator(&self, op: &CMatrix) -> CMatrix {
        &self.matrix * op * self.matrix.adjoint()
    }
}

impl QuantumProcess for KrausChannel {
    fn n_qubits(&self) -> usize {
        self.arity
    }

    fn apply_to_operator(&self, op: &CMatrix) -> CMatrix {
        let dim = op.nrows();
        let mut acc = CMatrix::zeros(dim, dim);
        for k in &self.operators {
            acc += k * op * k.adjoint();
        }
        acc
    }
}

/// Wrap a closure as a process; handy for composing blocks in tests and
/// tomography.
pub struct MapProcess<F: Fn(&CMatrix) -> CMatrix> {
    n_qubits: usize,
    map: F,
}

impl<F: Fn(&CMatrix) -> CMatrix> MapProcess<F> {
    pub fn new(n_qubits: usize, map: F) -> Self {
        MapProcess { n_qubits, map }
    }
}

impl<F: Fn(&CMatrix) -> CMatrix> QuantumProcess for MapProcess<F> {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_to_operator(&self, op: &CMatrix) -> CMatrix {
        (self.map)(op)
    }
}

/// Embed a `k`-qubit operator on `targets` into the full register.
///
/// `targets[0]` owns the most significant bit of the operator's own index,
/// matching the global qubit-0-leftmost convention.
pub fn embed_operator(m: &CMatrix, targets: &[usize], n_qubits: usize) -> Result<CMatrix> {
    check_register_size(n_qubits)?;
    let k = targets.len();
    let sub_dim = 1usize << k;
    if m.nrows() != sub_dim || m.ncols() != sub_dim {
        return Err(Error::input(format!(
            "operator is {}x{}, expected {sub_dim}x{sub_dim} for {k} targets",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut seen = [false; MAX_QUBITS];
    for &t in targets {
        if t >= n_qubits {
            return Err(Error::input(format!("target qubit {t} out of range for {n_qubits} qubits")));
        }
        if seen[t] {
            return Err(Error::input(format!("duplicate target qubit {t}")));
        }
        seen[t] = true;
    }
    let dim = 1usize << n_qubits;
    let positions: Vec<usize> = targets.iter().map(|&t| n_qubits - 1 - t).collect();
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut sub_col = 0usize;
        let mut cleared = col;
        for (j, &pos) in positions.iter().enumerate() {
            sub_col |= ((col >> pos) & 1) << (k - 1 - j);
            cleared &= !(1 << pos);
        }
        for sub_row in 0..sub_dim {
            let entry = m[(sub_row, sub_col)];
            if entry == C64::new(0.0, 0.0) {
                continue;
            }
            let mut row = cleared;
            for (j, &pos) in positions.iter().enumerate() {
                row |= ((sub_row >> (k - 1 - j)) & 1) << pos;
            }
            out[(row, col)] = entry;
        }
    }
    Ok(out)
}

/// Deterministic full-rank random density matrix (a normalized complex
/// Wishart draw); used by property tests across the crate.
pub fn random_density_matrix(n_qubits: usize, seed: u64) -> DensityMatrix {
    use rand::Rng;
    let mut rng = crate::seeding::rng_from_seed(seed);
    let dim = 1usize << n_qubits;
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(rand_distr::StandardNormal);
        let im: f64 = rng.sample(rand_distr::StandardNormal);
        C64::new(re, im)
    });
    let w = &g * g.adjoint();
    let trace = w.trace().re;
    DensityMatrix::from_matrix_unchecked(n_qubits, w.map(|z| z / trace))
}

pub(crate) fn index_to_bitstring(index: usize, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if (index >> (n_qubits - 1 - q)) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_register_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::input(format!(
            "register size {n_qubits} outside supported range 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Independent embedding oracle: reorder qubits with an explicit
    /// permutation matrix so the targets sit in front, Kronecker the operator
    /// with an identity, and rotate back.
    fn oracle_embed(m: &CMatrix, targets: &[usize], n_qubits: usize) -> CMatrix {
        let dim = 1usize << n_qubits;
        let mut order: Vec<usize> = targets.to_vec();
        for q in 0..n_qubits {
            if !targets.contains(&q) {
                order.push(q);
            }
        }
        // perm[new, old] = 1 iff bit j of `new` equals the bit of `old` at
        // qubit order[j] (both counted MSB-first).
        let mut perm = CMatrix::zeros(dim, dim);
        for old in 0..dim {
            let mut new = 0usize;
            for (j, &q) in order.iter().enumerate() {
                let bit = (old >> (n_qubits - 1 - q)) & 1;
                new |= bit << (n_qubits - 1 - j);
            }
            perm[(new, old)] = c(1.0, 0.0);
        }
        let rest = 1usize << (n_qubits - targets.len());
        let front = m.kronecker(&gates::identity(rest));
        perm.transpose() * front * perm
    }

    fn random_unitary(dim: usize, seed: u64) -> CMatrix {
        use rand::Rng;
        let mut rng = rng_from_seed(seed);
        let raw = CMatrix::from_fn(dim, dim, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let qr = raw.qr();
        qr.q()
    }

    #[test]
    fn basis_state_places_probability_at_expected_index() {
        let rho = init_state(4, "1100").unwrap();
        assert_eq!(rho.dim(), 16);
        for i in 0..16 {
            let expected = if i == 12 { 1.0 } else { 0.0 };
            assert!((rho.data()[(i, i)].re - expected).abs() < 1e-15);
        }
        rho.validate().unwrap();
    }

    #[test]
    fn basis_state_rejects_bad_input() {
        assert!(matches!(init_state(3, "10"), Err(Error::Input(_))));
        assert!(matches!(init_state(2, "2x"), Err(Error::Input(_))));
        assert!(matches!(init_state(7, "0000000"), Err(Error::Input(_))));
        assert!(matches!(init_state(0, ""), Err(Error::Input(_))));
    }

    #[test]
    fn embedding_matches_permutation_oracle() {
        let cases: &[(usize, Vec<usize>, usize)] = &[
            (2, vec![0], 3),
            (2, vec![2], 3),
            (4, vec![0, 1], 3),
            (4, vec![2, 0], 3),
            (4, vec![1, 3], 4),
            (4, vec![3, 1], 4),
            (8, vec![2, 0, 3], 4),
        ];
        for (i, (dim, targets, n)) in cases.iter().enumerate() {
            let m = random_unitary(*dim, 1000 + i as u64);
            let got = embed_operator(&m, targets, *n).unwrap();
            let want = oracle_embed(&m, targets, *n);
            assert!(max_abs_diff(&got, &want) < 1e-12, "case {i}");
        }
    }

    #[test]
    fn embedding_on_full_register_is_identity_embedding() {
        let m = random_unitary(4, 7);
        let got = embed_operator(&m, &[0, 1], 2).unwrap();
        assert!(max_abs_diff(&got, &m) < 1e-15);
    }

    #[test]
    fn embed_rejects_bad_targets() {
        let m = gates::cx();
        assert!(matches!(embed_operator(&m, &[0, 3], 3), Err(Error::Input(_))));
        assert!(matches!(embed_operator(&m, &[1, 1], 3), Err(Error::Input(_))));
        assert!(matches!(embed_operator(&m, &[0], 3), Err(Error::Input(_))));
    }

    #[test]
    fn apply_unitary_cx_on_nonadjacent_qubits() {
        // CX with control 0 and target 2 in a 3-qubit register:
        // |100> (index 4) -> |101> (index 5).
        let rho = init_state(3, "100").unwrap();
        let gate = UnitaryGate::new("CX", gates::cx()).unwrap();
        let out = rho.apply_unitary(&gate, &[0, 2]).unwrap();
        assert!((out.data()[(5, 5)].re - 1.0).abs() < 1e-14);
        out.validate().unwrap();
    }

    #[test]
    fn apply_unitary_reversed_targets_swaps_roles() {
        // Control on qubit 1, target on qubit 0: |01> (index 1) -> |11>.
        let rho = init_state(2, "01").unwrap();
        let gate = UnitaryGate::new("CX", gates::cx()).unwrap();
        let out = rho.apply_unitary(&gate, &[1, 0]).unwrap();
        assert!((out.data()[(3, 3)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kraus_dephasing_at_quarter_pi_fully_mixes_plus_state() {
        // kappa = 0, epsilon = pi/4, generator Z: rho -> (rho + Z rho Z)/2,
        // which sends |+><+| to I/2.
        let eps = std::f64::consts::FRAC_PI_4;
        let ops = vec![gates::identity(2).scale(eps.cos()), gates::pauli_z().scale(eps.sin())];
        let channel = KrausChannel::new(ops).unwrap();
        let plus = DensityMatrix::from_matrix(
            1,
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.5, 0.), c(0.5, 0.), c(0.5, 0.)]),
        )
        .unwrap();
        let out = plus.apply_kraus(&channel, &[0]).unwrap();
        let want = gates::identity(2).scale(0.5);
        assert!(max_abs_diff(out.data(), &want) < 1e-14);
    }

    #[test]
    fn kraus_completeness_is_enforced() {
        let bad = vec![gates::identity(2).scale(0.9)];
        assert!(matches!(KrausChannel::new(bad), Err(Error::Validation(_))));
        assert!(matches!(KrausChannel::new(vec![]), Err(Error::Input(_))));
    }

    #[test]
    fn expectation_of_weighted_sum_on_basis_state() {
        // 0.5*II + 0.3*ZZ on |01>: Z eigenvalues +1, -1, so 0.5 - 0.3 = 0.2.
        let rho = init_state(2, "01").unwrap();
        let terms = vec![
            (0.5, PauliString::parse("II").unwrap()),
            (0.3, PauliString::parse("ZZ").unwrap()),
        ];
        let value = rho.expectation_pauli_sum(&terms).unwrap();
        assert!((value - 0.2).abs() < 1e-14);
    }

    #[test]
    fn expectation_matches_dense_trace() {
        use rand::Rng;
        let mut rng = rng_from_seed(5);
        // Random mixed state from a random unitary's columns.
        let u = random_unitary(8, 21);
        let mut data = CMatrix::zeros(8, 8);
        let mut weights = [0.0f64; 8];
        let mut total = 0.0;
        for w in &mut weights {
            *w = rng.random::<f64>();
            total += *w;
        }
        for (i, w) in weights.iter().enumerate() {
            let col = u.column(i);
            data += (col * col.adjoint()).scale(w / total);
        }
        let rho = DensityMatrix::from_matrix(3, data).unwrap();
        for text in ["XYZ", "ZZI", "IXI", "YYY"] {
            let p = PauliString::parse(text).unwrap();
            let dense = (p.matrix() * rho.data()).trace();
            let fast = p.trace_with(rho.data());
            assert!((dense - fast).norm() < 1e-12, "{text}");
        }
    }

    #[test]
    fn pauli_string_parse_display_roundtrip() {
        for text in ["I", "XYZ", "ZZXX", "YIYI"] {
            assert_eq!(PauliString::parse(text).unwrap().to_string(), text);
        }
        assert!(PauliString::parse("").is_err());
        assert!(PauliString::parse("AB").is_err());
    }

    #[test]
    fn pauli_matrices_match_kron_of_singles() {
        let p = PauliString::parse("XZ").unwrap();
        let want = gates::pauli_x().kronecker(&gates::pauli_z());
        assert!(max_abs_diff(&p.matrix(), &want) < 1e-15);
        let p = PauliString::parse("YXZ").unwrap();
        let want = gates::pauli_y().kronecker(&gates::pauli_x()).kronecker(&gates::pauli_z());
        assert!(max_abs_diff(&p.matrix(), &want) < 1e-15);
    }

    #[test]
    fn sampling_plus_state_in_z_basis_is_binomial() {
        let plus = DensityMatrix::from_matrix(
            1,
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.5, 0.), c(0.5, 0.), c(0.5, 0.)]),
        )
        .unwrap();
        let basis = PauliString::parse("Z").unwrap();
        let shots = 5000u64;
        let counts = plus.sample_counts(&basis, shots, 17).unwrap();
        let zeros = *counts.get("0").unwrap_or(&0) as f64;
        let p_hat = zeros / shots as f64;
        // Three-sigma band around 0.5 for a fair binomial.
        let sigma = (0.25f64 / shots as f64).sqrt();
        assert!((p_hat - 0.5).abs() < 3.0 * sigma, "p_hat = {p_hat}");
        let total: u64 = counts.values().sum();
        assert_eq!(total, shots);
    }

    #[test]
    fn sampling_plus_state_in_x_basis_is_deterministic() {
        let plus = DensityMatrix::from_matrix(
            1,
            CMatrix::from_row_slice(2, 2, &[c(0.5, 0.), c(0.5, 0.), c(0.5, 0.), c(0.5, 0.)]),
        )
        .unwrap();
        let basis = PauliString::parse("X").unwrap();
        let counts = plus.sample_counts(&basis, 1000, 3).unwrap();
        assert_eq!(*counts.get("0").unwrap(), 1000);
    }

    #[test]
    fn sampling_y_eigenstate_in_y_basis_is_deterministic() {
        // |+i><+i| = (I + Y)/2.
        let data = (gates::identity(2) + gates::pauli_y()).scale(0.5);
        let rho = DensityMatrix::from_matrix(1, data).unwrap();
        let basis = PauliString::parse("Y").unwrap();
        let counts = rho.sample_counts(&basis, 500, 11).unwrap();
        assert_eq!(*counts.get("0").unwrap(), 500);
    }

    #[test]
    fn sampling_is_reproducible_per_seed() {
        let rho = init_state(2, "00").unwrap();
        let gate = UnitaryGate::new("H", gates::hadamard()).unwrap();
        let rho = rho.apply_unitary(&gate, &[0]).unwrap();
        let basis = PauliString::parse("ZZ").unwrap();
        let a = rho.sample_counts(&basis, 2000, 42).unwrap();
        let b = rho.sample_counts(&basis, 2000, 42).unwrap();
        let c = rho.sample_counts(&basis, 2000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unitary_gate_rejects_non_unitary() {
        let m = gates::identity(2).scale(1.5);
        assert!(matches!(UnitaryGate::new("bad", m), Err(Error::Validation(_))));
        let m = CMatrix::zeros(3, 3);
        assert!(matches!(UnitaryGate::new("bad", m), Err(Error::Input(_))));
    }

    #[test]
    fn process_trait_agrees_with_state_application() {
        let gate = UnitaryGate::new("H", gates::hadamard()).unwrap();
        let rho = init_state(1, "0").unwrap();
        let via_trait = gate.apply_state(&rho).unwrap();
        let via_method = rho.apply_unitary(&gate, &[0]).unwrap();
        assert!(max_abs_diff(via_trait.data(), via_method.data()) < 1e-15);
    }

    proptest! {
        #[test]
        fn unitary_conjugation_preserves_invariants(seed in 0u64..500) {
            let u = random_unitary(4, seed);
            let rho = init_state(2, "01").unwrap();
            let state = rho.apply_raw_unitary(&u, &[0, 1]).unwrap();
            prop_assert!(state.validate().is_ok());
            // Round trip through the inverse restores the state.
            let back = state.apply_raw_unitary(&u.adjoint(), &[0, 1]).unwrap();
            prop_assert!(max_abs_diff(back.data(), rho.data()) < 1e-12);
        }

        #[test]
        fn expectation_is_linear_in_coefficients(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let rho = init_state(2, "10").unwrap();
            let gate = UnitaryGate::new("H", gates::hadamard()).unwrap();
            let rho = rho.apply_unitary(&gate, &[1]).unwrap();
            let zz = PauliString::parse("ZZ").unwrap();
            let xi = PauliString::parse("XI").unwrap();
            let combined = rho
                .expectation_pauli_sum(&[(a, zz.clone()), (b, xi.clone())])
                .unwrap();
            let separate = a * rho.expectation_pauli_sum(&[(1.0, zz)]).unwrap()
                + b * rho.expectation_pauli_sum(&[(1.0, xi)]).unwrap();
            prop_assert!((combined - separate).abs() < 1e-12);
        }

        #[test]
        fn pauli_column_action_matches_matrix(text in "[IXYZ]{1,4}") {
            let p = PauliString::parse(&text).unwrap();
            let m = p.matrix();
            let dim = 1usize << p.n_qubits();
            for col in 0..dim {
                let (row, phase) = p.column_action(col);
                for r in 0..dim {
                    let want = if r == row { phase } else { C64::new(0.0, 0.0) };
                    prop_assert!((m[(r, col)] - want).norm() < 1e-15);
                }
            }
        }
    }
}
