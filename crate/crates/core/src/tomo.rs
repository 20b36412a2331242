//! Quantum process tomography in the Pauli basis.
//!
//! A process matrix chi represents a channel as `eps(rho) = sum_{mn} chi_mn
//! P_m rho P_n†` over Pauli strings ordered lexicographically (I < X < Y < Z
//! per qubit, qubit 0 most significant). [`chi_exact`] probes the channel
//! algebraically; [`chi_sampled`] runs standard linear-inversion tomography
//! from finite measurement counts and makes no physicality repair, so a
//! sampled chi can be slightly non-physical and is only flagged as such.

use rayon::prelude::*;

use crate::densim::{DensityMatrix, Pauli, PauliString, QuantumProcess, UnitaryGate};
use crate::seeding::derive_seed;
use crate::{C64, CMatrix, Error, Result};

const CHI_EXACT_MAX_QUBITS: usize = 3;
const CHI_SAMPLED_MAX_QUBITS: usize = 2;
const PURITY_TOL: f64 = 1e-9;

/// All length-`n` Pauli strings in chi-index order.
pub fn pauli_labels(n_qubits: usize) -> Vec<PauliString> {
    (0..4usize.pow(n_qubits as u32)).map(|i| pauli_at(i, n_qubits)).collect()
}

fn pauli_at(index: usize, n_qubits: usize) -> PauliString {
    const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let letters = (0..n_qubits)
        .map(|k| LETTERS[(index >> (2 * (n_qubits - 1 - k))) & 3])
        .collect();
    PauliString::new(letters).expect("non-empty by construction")
}

/// Process matrix in the Pauli basis.
#[derive(Clone, Debug)]
pub struct ChiMatrix {
    n_qubits: usize,
    data: CMatrix,
}

impl ChiMatrix {
    pub fn new(n_qubits: usize, data: CMatrix) -> Result<Self> {
        let dim = 4usize.pow(n_qubits as u32);
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::input(format!(
                "chi for {n_qubits} qubits must be {dim}x{dim}, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(ChiMatrix { n_qubits, data })
    }

    /// Rank-one chi of a unitary: `chi = a a†` with `a_m = Tr(P_m† U)/d`.
    pub fn of_unitary(gate: &UnitaryGate) -> Self {
        let n = gate.arity();
        let d = 1usize << n;
        let labels = pauli_labels(n);
        let a: Vec<C64> = labels
            .iter()
            .map(|p| {
                let mut acc = C64::new(0.0, 0.0);
                for col in 0..d {
                    let (row, phase) = p.column_action(col);
                    acc += phase.conj() * gate.matrix()[(row, col)];
                }
                acc / d as f64
            })
            .collect();
        let dim = labels.len();
        let data = CMatrix::from_fn(dim, dim, |m, n| a[m] * a[n].conj());
        ChiMatrix { n_qubits: n, data }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn entry(&self, row_pauli: &PauliString, col_pauli: &PauliString) -> Result<C64> {
        let row = self.index_of(row_pauli)?;
        let col = self.index_of(col_pauli)?;
        Ok(self.data[(row, col)])
    }

    fn index_of(&self, pauli: &PauliString) -> Result<usize> {
        if pauli.n_qubits() != self.n_qubits {
            return Err(Error::input(format!(
                "Pauli {pauli} has {} letters, chi is over {} qubits",
                pauli.n_qubits(),
                self.n_qubits
            )));
        }
        Ok(pauli
            .letters()
            .iter()
            .fold(0usize, |acc, &p| acc * 4 + p as usize))
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// `Tr(chi²)`; equals 1 exactly for a unitary channel's chi.
    pub fn purity(&self) -> f64 {
        (&self.data * &self.data).trace().re
    }

    pub fn is_pure(&self) -> bool {
        (self.purity() - 1.0).abs() <= PURITY_TOL
    }

    pub fn hermiticity_defect(&self) -> f64 {
        crate::densim::max_abs_diff(&self.data, &self.data.adjoint())
    }

    /// `‖Σ_mn chi_mn P_n† P_m − I‖_max`, zero for a trace-preserving map.
    pub fn tp_defect(&self) -> f64 {
        let d = 1usize << self.n_qubits;
        let labels = pauli_labels(self.n_qubits);
        let mut acc = CMatrix::zeros(d, d);
        for (m, pm) in labels.iter().enumerate() {
            for (n, pn) in labels.iter().enumerate() {
                let weight = self.data[(m, n)];
                if weight.norm_sqr() < 1e-30 {
                    continue;
                }
                for col in 0..d {
                    let (mid, phase_m) = pm.column_action(col);
                    let (row, phase_n) = pn.column_action(mid);
                    acc[(row, col)] += weight * phase_m * phase_n;
                }
            }
        }
        acc -= crate::gates::identity(d);
        acc.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.data + self.data.adjoint()).map(|z| z * 0.5);
        herm.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b))
    }

    /// Hermitian, trace-preserving, and positive within `tol`. Sampled chi
    /// matrices can fail this; they are reported as-is.
    pub fn is_physical(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
            && self.tp_defect() <= tol
            && self.min_eigenvalue() >= -tol
    }

    /// Apply the represented channel to an operator.
    pub fn apply(&self, op: &CMatrix) -> CMatrix {
        let d = 1usize << self.n_qubits;
        let labels = pauli_labels(self.n_qubits);
        let mut out = CMatrix::zeros(d, d);
        for (m, pm) in labels.iter().enumerate() {
            for (n, pn) in labels.iter().enumerate() {
                let weight = self.data[(m, n)];
                if weight.norm_sqr() < 1e-30 {
                    continue;
                }
                // P_m op P_n† entrywise through the sparse column actions.
                for col in 0..d {
                    let (row_n, phase_n) = pn.column_action(col);
                    for inner in 0..d {
                        let (row_m, phase_m) = pm.column_action(inner);
                        out[(row_m, col)] += weight * phase_m * op[(inner, row_n)] * phase_n.conj();
                    }
                }
            }
        }
        out
    }
}

/// Project a superoperator (columns = vectorized images of matrix units)
/// onto the Pauli chi basis.
fn chi_from_superop(superop: &CMatrix, n_qubits: usize) -> CMatrix {
    let d = 1usize << n_qubits;
    let labels = pauli_labels(n_qubits);
    let actions: Vec<Vec<(usize, C64)>> = labels
        .iter()
        .map(|p| (0..d).map(|col| p.column_action(col)).collect())
        .collect();
    let dim = labels.len();
    let scale = 1.0 / (d * d) as f64;
    CMatrix::from_fn(dim, dim, |m, n| {
        let mut acc = C64::new(0.0, 0.0);
        for (k1, &(r1, phase_n)) in actions[n].iter().enumerate() {
            for (k2, &(r2, phase_m)) in actions[m].iter().enumerate() {
                acc += phase_n * phase_m.conj() * superop[(r1 * d + r2, k1 * d + k2)];
            }
        }
        acc * scale
    })
}

fn superop_of_channel<P: QuantumProcess + ?Sized>(channel: &P) -> CMatrix {
    let d = 1usize << channel.n_qubits();
    let mut superop = CMatrix::zeros(d * d, d * d);
    for b in 0..d {
        for a in 0..d {
            let mut unit = CMatrix::zeros(d, d);
            unit[(a, b)] = C64::new(1.0, 0.0);
            let image = channel.apply_to_operator(&unit);
            for c in 0..d {
                for r in 0..d {
                    superop[(c * d + r, b * d + a)] = image[(r, c)];
                }
            }
        }
    }
    superop
}

/// Exact chi of a channel, probed on the full matrix-unit basis.
pub fn chi_exact<P: QuantumProcess + ?Sized>(channel: &P) -> Result<ChiMatrix> {
    let n = channel.n_qubits();
    if n > CHI_EXACT_MAX_QUBITS {
        return Err(Error::input(format!(
            "chi_exact supports up to {CHI_EXACT_MAX_QUBITS} qubits, got {n}"
        )));
    }
    let superop = superop_of_channel(channel);
    Ok(ChiMatrix { n_qubits: n, data: chi_from_superop(&superop, n) })
}

fn single_input_vector(which: usize) -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match which {
        0 => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        1 => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        2 => [C64::new(s, 0.0), C64::new(s, 0.0)],
        _ => [C64::new(s, 0.0), C64::new(0.0, s)],
    }
}

fn product_input(digits: &[usize]) -> DensityMatrix {
    let n = digits.len();
    let d = 1usize << n;
    let mut v = vec![C64::new(1.0, 0.0)];
    for &digit in digits {
        let single = single_input_vector(digit);
        let mut next = Vec::with_capacity(v.len() * 2);
        for &amp in &v {
            next.push(amp * single[0]);
            next.push(amp * single[1]);
        }
        v = next;
    }
    let rho = CMatrix::from_fn(d, d, |r, c| v[r] * v[c].conj());
    DensityMatrix::from_matrix(n, rho).expect("pure product state is a valid density matrix")
}

fn digits_of(index: usize, base: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0usize; n];
    let mut rest = index;
    for k in (0..n).rev() {
        digits[k] = rest % base;
        rest /= base;
    }
    digits
}

/// Single-qubit matrix units as combinations of the four prepared inputs:
/// row = unit index (00, 01, 10, 11), column = input index.
fn unit_combination_coefficients() -> [[C64; 4]; 4] {
    let half = 0.5;
    [
        // E00 = rho_0
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
        // E01 = rho_+ + i rho_{+i} - (1+i)(rho_0 + rho_1)/2
        [
            C64::new(-half, -half),
            C64::new(-half, -half),
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
        ],
        // E10 = rho_+ - i rho_{+i} - (1-i)(rho_0 + rho_1)/2
        [
            C64::new(-half, half),
            C64::new(-half, half),
            C64::new(1.0, 0.0),
            C64::new(0.0, -1.0),
        ],
        // E11 = rho_1
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
    ]
}

#[derive(Clone, Copy)]
enum ExpectationMode {
    Exact,
    Shots { per_setting: u64, seed: u64 },
}

/// Linear-inversion tomography shared by the sampled and infinite-shot paths:
/// estimate every output state on the product-input basis, recombine into
/// matrix-unit images, project to chi.
fn chi_linear_inversion<P: QuantumProcess + ?Sized + Sync>(
    channel: &P,
    mode: ExpectationMode,
) -> Result<ChiMatrix> {
    let n = channel.n_qubits();
    if n > CHI_SAMPLED_MAX_QUBITS {
        return Err(Error::input(format!(
            "linear-inversion tomography supports up to {CHI_SAMPLED_MAX_QUBITS} qubits, got {n}"
        )));
    }
    let d = 1usize << n;
    let n_inputs = 4usize.pow(n as u32);
    let n_settings = 3usize.pow(n as u32);
    let labels = pauli_labels(n);

    // Estimated output density matrix for every product input.
    let estimated: Result<Vec<CMatrix>> = (0..n_inputs)
        .into_par_iter()
        .map(|input_idx| {
            let rho_in = product_input(&digits_of(input_idx, 4, n));
            let rho_out = channel.apply_state(&rho_in)?;
            let mut expectations = vec![0.0f64; labels.len()];
            expectations[0] = 1.0;
            match mode {
                ExpectationMode::Exact => {
                    for (p_idx, pauli) in labels.iter().enumerate().skip(1) {
                        expectations[p_idx] = pauli.trace_with(rho_out.data()).re;
                    }
                }
                ExpectationMode::Shots { per_setting, seed } => {
                    for setting_idx in 0..n_settings {
                        let setting_letters: Vec<Pauli> = digits_of(setting_idx, 3, n)
                            .iter()
                            .map(|&digit| [Pauli::X, Pauli::Y, Pauli::Z][digit])
                            .collect();
                        let basis = PauliString::new(setting_letters.clone())?;
                        let setting_seed =
                            derive_seed(seed, &[input_idx as u64, setting_idx as u64]);
                        let counts = rho_out.sample_counts(&basis, per_setting, setting_seed)?;
                        for (p_idx, pauli) in labels.iter().enumerate().skip(1) {
                            let covered = pauli
                                .letters()
                                .iter()
                                .zip(&setting_letters)
                                .all(|(&p, &s)| p == Pauli::I || p == s);
                            // Fill I positions with Z so each Pauli is read
                            // from exactly one setting.
                            let canonical = pauli
                                .letters()
                                .iter()
                                .zip(&setting_letters)
                                .all(|(&p, &s)| p != Pauli::I || s == Pauli::Z);
                            if !(covered && canonical) {
                                continue;
                            }
                            let mut acc = 0i64;
                            for (bits, &count) in &counts {
                                let parity = bits
                                    .bytes()
                                    .zip(pauli.letters())
                                    .filter(|(_, &p)| p != Pauli::I)
                                    .filter(|(bit, _)| *bit == b'1')
                                    .count();
                                let sign = if parity % 2 == 0 { 1i64 } else { -1i64 };
                                acc += sign * count as i64;
                            }
                            expectations[p_idx] = acc as f64 / per_setting as f64;
                        }
                    }
                }
            }
            let mut rho_est = CMatrix::zeros(d, d);
            for (p_idx, pauli) in labels.iter().enumerate() {
                let weight = expectations[p_idx] / d as f64;
                if weight == 0.0 {
                    continue;
                }
                for col in 0..d {
                    let (row, phase) = pauli.column_action(col);
                    rho_est[(row, col)] += phase * weight;
                }
            }
            Ok(rho_est)
        })
        .collect();
    let estimated = estimated?;

    // Recombine input states into matrix units and assemble the superoperator.
    let combos = unit_combination_coefficients();
    let mut superop = CMatrix::zeros(d * d, d * d);
    for b in 0..d {
        for a in 0..d {
            let unit_digits: Vec<usize> = (0..n)
                .map(|k| {
                    let bit_a = (a >> (n - 1 - k)) & 1;
                    let bit_b = (b >> (n - 1 - k)) & 1;
                    bit_a * 2 + bit_b
                })
                .collect();
            let mut image = CMatrix::zeros(d, d);
            for (input_idx, rho_est) in estimated.iter().enumerate() {
                let input_digits = digits_of(input_idx, 4, n);
                let coeff: C64 = unit_digits
                    .iter()
                    .zip(&input_digits)
                    .map(|(&u, &j)| combos[u][j])
                    .product();
                if coeff.norm_sqr() < 1e-30 {
                    continue;
                }
                image += rho_est.map(|z| z * coeff);
            }
            for c in 0..d {
                for r in 0..d {
                    superop[(c * d + r, b * d + a)] = image[(r, c)];
                }
            }
        }
    }
    Ok(ChiMatrix { n_qubits: n, data: chi_from_superop(&superop, n) })
}

/// Shot-based linear-inversion tomography: `shots_per_setting` measurement
/// shots for each (product input, Pauli basis) setting, deterministic under
/// `seed`. Converges to [`chi_exact`] as the shot count grows; no
/// physicality repair is applied.
pub fn chi_sampled<P: QuantumProcess + ?Sized + Sync>(
    channel: &P,
    shots_per_setting: u64,
    seed: u64,
) -> Result<ChiMatrix> {
    if shots_per_setting == 0 {
        return Err(Error::input("shots_per_setting must be positive".to_string()));
    }
    chi_linear_inversion(channel, ExpectationMode::Shots { per_setting: shots_per_setting, seed })
}

/// The infinite-shot limit of [`chi_sampled`]: the same linear-inversion
/// pipeline with exact Pauli expectations.
pub fn chi_linear_inversion_exact<P: QuantumProcess + ?Sized + Sync>(
    channel: &P,
) -> Result<ChiMatrix> {
    chi_linear_inversion(channel, ExpectationMode::Exact)
}

/// One chi entry whose difference exceeds the statistical threshold.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SignificantEntry {
    pub row_pauli: String,
    pub col_pauli: String,
    pub re_diff: f64,
    pub im_diff: f64,
}

/// Elementwise comparison of two chi matrices against the shot-noise scale.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ChiComparison {
    pub real_max_diff: f64,
    pub imag_max_diff: f64,
    /// `1/sqrt(shots)`: differences below this are within sampling noise.
    pub threshold: f64,
    pub significant_entries: Vec<SignificantEntry>,
}

pub fn compare_chi(a: &ChiMatrix, b: &ChiMatrix, shots: u64) -> Result<ChiComparison> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::input(format!(
            "chi dimensions differ: {} vs {} qubits",
            a.n_qubits, b.n_qubits
        )));
    }
    if shots == 0 {
        return Err(Error::input("shots must be positive".to_string()));
    }
    let labels = pauli_labels(a.n_qubits);
    let threshold = 1.0 / (shots as f64).sqrt();
    let mut real_max_diff = 0.0f64;
    let mut imag_max_diff = 0.0f64;
    let mut significant_entries = Vec::new();
    for (m, pm) in labels.iter().enumerate() {
        for (n, pn) in labels.iter().enumerate() {
            let diff = a.data[(m, n)] - b.data[(m, n)];
            real_max_diff = real_max_diff.max(diff.re.abs());
            imag_max_diff = imag_max_diff.max(diff.im.abs());
            if diff.norm() > threshold {
                significant_entries.push(SignificantEntry {
                    row_pauli: pm.to_string(),
                    col_pauli: pn.to_string(),
                    re_diff: diff.re,
                    im_diff: diff.im,
                });
            }
        }
    }
    Ok(ChiComparison { real_max_diff, imag_max_diff, threshold, significant_entries })
}

/// Process (entanglement) fidelity between two channels.
///
/// When either chi is pure (a unitary channel), `F = Tr(chi_a chi_b)`, the
/// standard overlap; it equals `|Tr(U†V)|²/d²` for two unitaries. When
/// neither is pure, falls back to the Uhlmann fidelity of the normalized
/// Choi states, which reduces to the same overlap in the pure case.
pub fn process_fidelity(a: &ChiMatrix, b: &ChiMatrix) -> Result<f64> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::input(format!(
            "chi dimensions differ: {} vs {} qubits",
            a.n_qubits, b.n_qubits
        )));
    }
    let value = if a.is_pure() || b.is_pure() {
        (&a.data * &b.data).trace().re
    } else {
        let choi_a = choi_of_chi(a);
        let choi_b = choi_of_chi(b);
        uhlmann_fidelity(&choi_a, &choi_b)
    };
    Ok(value.clamp(0.0, 1.0))
}

/// `(d·F_process + 1) / (d + 1)`, the mean fidelity over Haar-random inputs.
pub fn average_gate_fidelity(a: &ChiMatrix, b: &ChiMatrix) -> Result<f64> {
    let d = (1usize << a.n_qubits) as f64;
    Ok((d * process_fidelity(a, b)? + 1.0) / (d + 1.0))
}

/// Normalized Choi state `K = Σ_mn chi_mn vec(P_m) vec(P_n)† / d`.
fn choi_of_chi(chi: &ChiMatrix) -> CMatrix {
    let d = 1usize << chi.n_qubits;
    let labels = pauli_labels(chi.n_qubits);
    let vecs: Vec<Vec<(usize, C64)>> = labels
        .iter()
        .map(|p| {
            (0..d)
                .map(|col| {
                    let (row, phase) = p.column_action(col);
                    (col * d + row, phase)
                })
                .collect()
        })
        .collect();
    let mut choi = CMatrix::zeros(d * d, d * d);
    for (m, vm) in vecs.iter().enumerate() {
        for (n, vn) in vecs.iter().enumerate() {
            let weight = chi.data[(m, n)] / d as f64;
            if weight.norm_sqr() < 1e-30 {
                continue;
            }
            for &(i, phase_m) in vm {
                for &(j, phase_n) in vn {
                    choi[(i, j)] += weight * phase_m * phase_n.conj();
                }
            }
        }
    }
    choi
}

fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let herm = (m + m.adjoint()).map(|z| z * 0.5);
    let eigen = herm.symmetric_eigen();
    let mut acc = CMatrix::zeros(m.nrows(), m.ncols());
    for (k, &lambda) in eigen.eigenvalues.iter().enumerate() {
        let root = lambda.max(0.0).sqrt();
        if root == 0.0 {
            continue;
        }
        let v = eigen.eigenvectors.column(k);
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                acc[(r, c)] += v[r] * v[c].conj() * root;
            }
        }
    }
    acc
}

/// `(Tr sqrt(sqrt(A) B sqrt(A)))²` with negative eigenvalues clamped to
/// zero, tolerating mildly non-physical sampled states.
fn uhlmann_fidelity(a: &CMatrix, b: &CMatrix) -> f64 {
    let sqrt_a = psd_sqrt(a);
    let inner = &sqrt_a * b * &sqrt_a;
    let herm = (&inner + inner.adjoint()).map(|z| z * 0.5);
    let trace_of_sqrt: f64 =
        herm.symmetric_eigen().eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).sum();
    trace_of_sqrt * trace_of_sqrt
}
