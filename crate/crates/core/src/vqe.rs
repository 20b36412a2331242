//! Variational ground-state energy estimation.
//!
//! A [`VqeProblem`] couples a parameterized ansatz, a Pauli-sum Hamiltonian,
//! a gate error model, a shot budget, and a mitigation strategy.
//! [`estimate_energy`] is the single entry point all optimizers and sweeps
//! drive. Exact mode traces the Hamiltonian against the simulated noisy
//! state; shot mode groups terms into qubit-wise-commuting measurement
//! settings and estimates each group from sampled bitstrings.
//!
//! The crate ships a four-qubit H2 Hamiltonian (STO-3G, Jordan-Wigner) and a
//! matching 3-parameter coupled-cluster-style ansatz; see [`h2_hamiltonian`]
//! and [`ucc3_ansatz`].

pub mod optim;

use std::f64::consts::FRAC_PI_2;

use crate::densim::{DensityMatrix, Pauli, PauliString};
use crate::noise::{attach_noise, GateErrorModel, NoisyCircuit};
use crate::seeding::{derive_seed, rng_from_seed};
use crate::transforms::{hidden_inverse_pass, randomized_compile, Circuit, ParamBinding};
use crate::{gates, CMatrix, Error, Result};

pub use optim::{AdamParams, TrustRegionParams};

const GROUND_ENERGY_MAX_QUBITS: usize = 8;

/// Real-coefficient Pauli-sum operator.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliHamiltonian {
    terms: Vec<(f64, PauliString)>,
    n_qubits: usize,
}

impl PauliHamiltonian {
    pub fn new(terms: Vec<(f64, PauliString)>) -> Result<Self> {
        let n_qubits = terms
            .first()
            .map(|(_, p)| p.n_qubits())
            .ok_or_else(|| Error::input("Hamiltonian needs at least one term".to_string()))?;
        for (coeff, pauli) in &terms {
            if !coeff.is_finite() {
                return Err(Error::input(format!("non-finite coefficient for {pauli}")));
            }
            if pauli.n_qubits() != n_qubits {
                return Err(Error::input(format!(
                    "term {pauli} has {} letters, expected {n_qubits}",
                    pauli.n_qubits()
                )));
            }
        }
        Ok(PauliHamiltonian { terms, n_qubits })
    }

    /// Parse lines of `<coefficient> <pauli-string>`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let coeff_text = fields.next().unwrap_or("");
            let pauli_text = fields
                .next()
                .ok_or_else(|| Error::input(format!("line {}: missing Pauli string", line_no + 1)))?;
            if fields.next().is_some() {
                return Err(Error::input(format!("line {}: trailing fields", line_no + 1)));
            }
            let coeff: f64 = coeff_text.parse().map_err(|_| {
                Error::input(format!("line {}: bad coefficient {coeff_text:?}", line_no + 1))
            })?;
            terms.push((coeff, PauliString::parse(pauli_text)?));
        }
        PauliHamiltonian::new(terms)
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Dense matrix representation.
    pub fn matrix(&self) -> CMatrix {
        let dim = 1usize << self.n_qubits;
        let mut acc = CMatrix::zeros(dim, dim);
        for (coeff, pauli) in &self.terms {
            for col in 0..dim {
                let (row, phase) = pauli.column_action(col);
                acc[(row, col)] += phase * *coeff;
            }
        }
        acc
    }
}

/// Minimum eigenvalue by dense diagonalization.
pub fn exact_ground_energy(h: &PauliHamiltonian) -> Result<f64> {
    if h.n_qubits > GROUND_ENERGY_MAX_QUBITS {
        return Err(Error::input(format!(
            "dense diagonalization supports up to {GROUND_ENERGY_MAX_QUBITS} qubits, got {}",
            h.n_qubits
        )));
    }
    let eigenvalues = h.matrix().symmetric_eigen().eigenvalues;
    Ok(eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b)))
}

/// How measurement statistics are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotMode {
    /// Trace formula on the simulated density matrix; no sampling.
    Exact,
    /// Sampled bitstrings, this many shots per measurement group.
    Shots(u64),
}

/// Error-mitigation arm applied to the ansatz before execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mitigation {
    None,
    /// Replace every second same-pair CX with its inverse gate.
    HiddenInverse,
    /// Average over Pauli-twirled instances, splitting the shot budget.
    RandomizedCompile { instances: usize },
}

/// One variational energy-estimation setup.
#[derive(Clone, Debug)]
pub struct VqeProblem {
    pub ansatz: Circuit,
    pub hamiltonian: PauliHamiltonian,
    pub noise: GateErrorModel,
    pub shots: ShotMode,
    pub mitigation: Mitigation,
}

impl VqeProblem {
    pub fn new(
        ansatz: Circuit,
        hamiltonian: PauliHamiltonian,
        noise: GateErrorModel,
        shots: ShotMode,
        mitigation: Mitigation,
    ) -> Result<Self> {
        ansatz.validate()?;
        if ansatz.n_qubits != hamiltonian.n_qubits {
            return Err(Error::validation(format!(
                "ansatz acts on {} qubits, Hamiltonian on {}",
                ansatz.n_qubits, hamiltonian.n_qubits
            )));
        }
        if let ShotMode::Shots(0) = shots {
            return Err(Error::validation("shot count must be positive".to_string()));
        }
        if let Mitigation::RandomizedCompile { instances: 0 } = mitigation {
            return Err(Error::validation(
                "randomized compiling needs at least one instance".to_string(),
            ));
        }
        Ok(VqeProblem { ansatz, hamiltonian, noise, shots, mitigation })
    }
}

/// Hamiltonian terms measurable in one Pauli-product setting.
#[derive(Clone, Debug)]
pub struct MeasurementGroup {
    /// Per-qubit constraint; `I` means unconstrained.
    template: Vec<Pauli>,
    terms: Vec<(f64, PauliString)>,
}

impl MeasurementGroup {
    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    /// Basis to sample in; unconstrained qubits default to Z.
    pub fn measurement_basis(&self) -> PauliString {
        let letters = self
            .template
            .iter()
            .map(|&p| if p == Pauli::I { Pauli::Z } else { p })
            .collect();
        PauliString::new(letters).expect("template is non-empty")
    }

    fn accepts(&self, pauli: &PauliString) -> bool {
        self.template
            .iter()
            .zip(pauli.letters())
            .all(|(&t, &p)| p == Pauli::I || t == Pauli::I || t == p)
    }

    fn absorb(&mut self, coeff: f64, pauli: PauliString) {
        for (slot, &p) in self.template.iter_mut().zip(pauli.letters()) {
            if p != Pauli::I {
                *slot = p;
            }
        }
        self.terms.push((coeff, pauli));
    }
}

/// Split a Hamiltonian into an identity offset plus qubit-wise-commuting
/// groups, greedy first-fit in term order.
pub fn qwc_groups(h: &PauliHamiltonian) -> (f64, Vec<MeasurementGroup>) {
    let mut constant = 0.0;
    let mut groups: Vec<MeasurementGroup> = Vec::new();
    for (coeff, pauli) in &h.terms {
        if pauli.is_identity() {
            constant += coeff;
            continue;
        }
        match groups.iter_mut().find(|g| g.accepts(pauli)) {
            Some(group) => group.absorb(*coeff, pauli.clone()),
            None => {
                let mut group = MeasurementGroup {
                    template: vec![Pauli::I; h.n_qubits],
                    terms: Vec::new(),
                };
                group.absorb(*coeff, pauli.clone());
                groups.push(group);
            }
        }
    }
    (constant, groups)
}

fn mitigated_circuits(p: &VqeProblem, seed: u64) -> Result<Vec<Circuit>> {
    match p.mitigation {
        Mitigation::None => Ok(vec![p.ansatz.clone()]),
        Mitigation::HiddenInverse => Ok(vec![hidden_inverse_pass(&p.ansatz, None, None)?]),
        Mitigation::RandomizedCompile { instances } => (0..instances)
            .map(|i| randomized_compile(&p.ansatz, derive_seed(seed, &[1, i as u64])))
            .collect(),
    }
}

/// Shots for each instance: an even split, with the remainder spread over
/// the first instances.
fn split_shots(total: u64, instances: usize) -> Vec<u64> {
    let k = instances as u64;
    let base = total / k;
    let remainder = total % k;
    (0..k).map(|i| base + u64::from(i < remainder)).collect()
}

fn term_expectation_from_counts(
    counts: &std::collections::BTreeMap<String, u64>,
    pauli: &PauliString,
    shots: u64,
) -> f64 {
    let mut acc = 0i64;
    for (bits, &count) in counts {
        let parity = bits
            .bytes()
            .zip(pauli.letters())
            .filter(|(_, &p)| p != Pauli::I)
            .filter(|(bit, _)| *bit == b'1')
            .count();
        acc += if parity % 2 == 0 { count as i64 } else { -(count as i64) };
    }
    acc as f64 / shots as f64
}

/// Expectation value of the Hamiltonian in the prepared noisy state.
///
/// One quasi-static noise draw is made per call and shared by every
/// measurement group and mitigation instance, modeling slow drift over a
/// single estimation. Deterministic under `seed`.
pub fn estimate_energy(p: &VqeProblem, params: &[f64], seed: u64) -> Result<f64> {
    if params.len() < p.ansatz.n_slots() {
        return Err(Error::input(format!(
            "{} parameters for an ansatz with {} slots",
            params.len(),
            p.ansatz.n_slots()
        )));
    }
    let binding = ParamBinding::new(params);
    let realization = p.noise.realize(&mut rng_from_seed(derive_seed(seed, &[0])));
    let circuits = mitigated_circuits(p, seed)?;
    let zeros = "0".repeat(p.ansatz.n_qubits);
    let rho0 = DensityMatrix::basis_state(p.ansatz.n_qubits, &zeros)?;

    let noisy: Vec<NoisyCircuit> =
        circuits.iter().map(|c| attach_noise(c, &p.noise)).collect::<Result<_>>()?;

    match p.shots {
        ShotMode::Exact => {
            let mut acc = 0.0;
            for circuit in &noisy {
                let rho = circuit.run(Some(&binding), &rho0, &realization)?;
                acc += rho.expectation_pauli_sum(p.hamiltonian.terms())?;
            }
            Ok(acc / noisy.len() as f64)
        }
        ShotMode::Shots(shots) => {
            let (constant, groups) = qwc_groups(&p.hamiltonian);
            let shot_split = split_shots(shots, noisy.len());
            let total_shots: u64 = shot_split.iter().sum();
            let mut acc = constant;
            for (instance, (circuit, &instance_shots)) in
                noisy.iter().zip(&shot_split).enumerate()
            {
                if instance_shots == 0 {
                    continue;
                }
                let weight = instance_shots as f64 / total_shots as f64;
                let rho = circuit.run(Some(&binding), &rho0, &realization)?;
                for (group_idx, group) in groups.iter().enumerate() {
                    let sample_seed =
                        derive_seed(seed, &[2, instance as u64, group_idx as u64]);
                    let counts = rho.sample_counts(
                        &group.measurement_basis(),
                        instance_shots,
                        sample_seed,
                    )?;
                    for (coeff, pauli) in group.terms() {
                        acc += weight
                            * coeff
                            * term_expectation_from_counts(&counts, pauli, instance_shots);
                    }
                }
            }
            Ok(acc)
        }
    }
}

/// True when every slot is bound to exactly one Pauli-rotation gate, the
/// precondition for the two-point parameter-shift rule.
fn shift_rule_applies(ansatz: &Circuit) -> bool {
    let mut uses = vec![0usize; ansatz.n_slots()];
    for op in &ansatz.ops {
        if let Some(slot) = op.param_slot {
            uses[slot] += 1;
            let rotation = gates::lookup(&op.label).is_some_and(|def| def.is_rotation());
            if !rotation {
                return false;
            }
        }
    }
    uses.iter().all(|&count| count == 1)
}

const FINITE_DIFFERENCE_STEP: f64 = 1e-2;

/// Gradient of [`estimate_energy`].
///
/// Uses the exact two-point parameter-shift rule `[E(θ+π/2) − E(θ−π/2)]/2`
/// when every slot drives a single Pauli rotation; otherwise falls back to a
/// central finite difference with step 1e-2 rad. Each energy evaluation gets
/// a seed derived from (slot, direction), so shot noise is independent
/// across the stencil.
pub fn parameter_shift_gradient(p: &VqeProblem, params: &[f64], seed: u64) -> Result<Vec<f64>> {
    let step = if shift_rule_applies(&p.ansatz) {
        FRAC_PI_2
    } else {
        FINITE_DIFFERENCE_STEP
    };
    let scale = if step == FRAC_PI_2 { 0.5 } else { 0.5 / step };
    gradient_with_step(p, params, seed, step, scale)
}

/// Central finite difference, for cross-checking the shift rule.
pub fn finite_difference_gradient(
    p: &VqeProblem,
    params: &[f64],
    seed: u64,
    step: f64,
) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::input("finite-difference step must be positive".to_string()));
    }
    gradient_with_step(p, params, seed, step, 0.5 / step)
}

fn gradient_with_step(
    p: &VqeProblem,
    params: &[f64],
    seed: u64,
    step: f64,
    scale: f64,
) -> Result<Vec<f64>> {
    let dim = p.ansatz.n_slots();
    let mut gradient = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut plus = params.to_vec();
        plus[j] += step;
        let mut minus = params.to_vec();
        minus[j] -= step;
        let e_plus = estimate_energy(p, &plus, derive_seed(seed, &[10 + j as u64, 0]))?;
        let e_minus = estimate_energy(p, &minus, derive_seed(seed, &[10 + j as u64, 1]))?;
        gradient.push((e_plus - e_minus) * scale);
    }
    Ok(gradient)
}

/// One recorded optimizer iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct TracePoint {
    pub params: Vec<f64>,
    pub energy: f64,
    pub evaluations_used: usize,
}

/// Optimization history; `converged_energy` is the best energy observed.
#[derive(Clone, Debug, PartialEq)]
pub struct VqeTrace {
    pub iterations: Vec<TracePoint>,
    pub converged_energy: f64,
}

impl VqeTrace {
    fn from_iterations(iterations: Vec<TracePoint>) -> Self {
        let converged_energy = iterations
            .iter()
            .map(|p| p.energy)
            .fold(f64::INFINITY, f64::min);
        VqeTrace { iterations, converged_energy }
    }

    /// First recorded iterate whose energy is within `tolerance` of
    /// `target`, if any; used to compare convergence speed across arms.
    pub fn iterations_to_reach(&self, target: f64, tolerance: f64) -> Option<usize> {
        self.iterations
            .iter()
            .position(|p| (p.energy - target).abs() <= tolerance || p.energy < target)
    }
}

/// Adam on the VQE objective with parameter-shift gradients. The trace
/// records every iterate; gradients and trace energies draw seeds from the
/// iteration index, so runs are deterministic under `seed`.
pub fn minimize_adam(
    p: &VqeProblem,
    x0: &[f64],
    hyper: &AdamParams,
    max_iters: usize,
    seed: u64,
) -> Result<VqeTrace> {
    let evals_per_gradient = 2 * p.ansatz.n_slots();
    optim::adam(
        x0,
        hyper,
        max_iters,
        |x, iter| {
            let g = parameter_shift_gradient(p, x, derive_seed(seed, &[100, iter as u64]))?;
            Ok((g, evals_per_gradient))
        },
        |x, iter| estimate_energy(p, x, derive_seed(seed, &[200, iter as u64])),
    )
}

/// Derivative-free trust-region descent on the VQE objective. Each objective
/// call consumes one derived seed, so runs are deterministic under `seed`.
pub fn minimize_model_based(
    p: &VqeProblem,
    x0: &[f64],
    budget: usize,
    region: &TrustRegionParams,
    seed: u64,
) -> Result<VqeTrace> {
    let mut calls = 0u64;
    optim::model_based(x0, budget, region, None, |x| {
        calls += 1;
        estimate_energy(p, x, derive_seed(seed, &[300, calls]))
    })
}

/// The shipped four-qubit H2 Hamiltonian (STO-3G, Jordan-Wigner, total
/// energies in Hartree).
pub fn h2_hamiltonian() -> PauliHamiltonian {
    PauliHamiltonian::parse(include_str!("../data/h2_sto3g_jw.txt"))
        .expect("shipped Hamiltonian file is well-formed")
}

/// The shipped 3-parameter ansatz matching [`h2_hamiltonian`]: slots 0 and 1
/// are single-excitation rotations, slot 2 the double excitation connecting
/// |1100> and |0011>.
pub fn ucc3_ansatz() -> Circuit {
    Circuit::load_json(include_str!("../data/ucc3_ansatz.json"))
        .expect("shipped ansatz file is well-formed")
}

/// Minimize the shipped problem's energy along the double-excitation slot
/// with the single-excitation slots at zero, using four exact noiseless
/// evaluations of the 1-periodic curve `E(θ) = a + b cos θ + c sin θ`.
/// Returns the minimizing angle in (−π, π] and its energy.
pub fn ucc3_doubles_minimum() -> Result<(f64, f64)> {
    use std::f64::consts::PI;
    let problem = VqeProblem::new(
        ucc3_ansatz(),
        h2_hamiltonian(),
        GateErrorModel::noiseless(),
        ShotMode::Exact,
        Mitigation::None,
    )?;
    let energy = |theta: f64| estimate_energy(&problem, &[0.0, 0.0, theta], 0);
    let e0 = energy(0.0)?;
    let e_pi = energy(PI)?;
    let e_plus = energy(FRAC_PI_2)?;
    let e_minus = energy(-FRAC_PI_2)?;
    let a = 0.5 * (e0 + e_pi);
    let b = 0.5 * (e0 - e_pi);
    let c = 0.5 * (e_plus - e_minus);
    let mut theta_star = c.atan2(b) + PI;
    if theta_star > PI {
        theta_star -= 2.0 * PI;
    }
    let value = a + b * theta_star.cos() + c * theta_star.sin();
    Ok((theta_star, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densim::max_abs_diff;
    use crate::noise::{
        ErrorSide, InverseBehavior, MixedUnitaryNoise, NoiseRealization, NoiseSpec,
        OverRotationNoise, OverRotationSampling,
    };
    use crate::C64;
    use crate::transforms::{circuit_unitary, GateRef};

    fn noiseless_problem(shots: ShotMode, mitigation: Mitigation) -> VqeProblem {
        VqeProblem::new(
            ucc3_ansatz(),
            h2_hamiltonian(),
            GateErrorModel::noiseless(),
            shots,
            mitigation,
        )
        .unwrap()
    }

    #[test]
    fn hamiltonian_parsing_handles_comments_and_rejects_junk() {
        let h = PauliHamiltonian::parse("# header\n0.5 XX # inline\n\n-1.25e-1 ZI\n").unwrap();
        assert_eq!(h.n_qubits(), 2);
        assert_eq!(h.terms().len(), 2);
        assert_eq!(h.terms()[1].0, -0.125);
        assert!(PauliHamiltonian::parse("oops XX").is_err());
        assert!(PauliHamiltonian::parse("0.5 XQ").is_err());
        assert!(PauliHamiltonian::parse("0.5 XX\n0.5 XXX").is_err());
        assert!(PauliHamiltonian::parse("0.5 XX extra").is_err());
        assert!(PauliHamiltonian::parse("0.5").is_err());
        assert!(PauliHamiltonian::parse("# nothing\n").is_err());
    }

    #[test]
    fn ground_energy_of_single_z_is_minus_one() {
        let h = PauliHamiltonian::parse("1.0 Z").unwrap();
        assert!((exact_ground_energy(&h).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn ground_energy_matches_a_hand_built_matrix() {
        let h = PauliHamiltonian::parse("1.0 XX\n1.0 ZZ").unwrap();
        // Hand-built dense matrix of XX + ZZ.
        let mut want = CMatrix::zeros(4, 4);
        for (r, c, v) in [
            (0, 0, 1.0),
            (3, 3, 1.0),
            (1, 1, -1.0),
            (2, 2, -1.0),
            (0, 3, 1.0),
            (3, 0, 1.0),
            (1, 2, 1.0),
            (2, 1, 1.0),
        ] {
            want[(r, c)] = C64::new(v, 0.0);
        }
        assert!(max_abs_diff(&h.matrix(), &want) < 1e-15);
        let direct_min = want
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b));
        let via_op = exact_ground_energy(&h).unwrap();
        assert!((via_op - direct_min).abs() < 1e-12);
        assert!((via_op + 2.0).abs() < 1e-12);
    }

    #[test]
    fn shipped_h2_hits_the_reference_energies() {
        let h = h2_hamiltonian();
        assert_eq!(h.n_qubits(), 4);
        assert_eq!(h.terms().len(), 15);
        let ground = exact_ground_energy(&h).unwrap();
        assert!((ground - (-1.128)).abs() < 0.01, "ground = {ground}");
        // Vacuum expectation is exactly the nuclear repulsion energy.
        let vacuum = DensityMatrix::basis_state(4, "0000").unwrap();
        let e_vac = vacuum.expectation_pauli_sum(h.terms()).unwrap();
        assert!((e_vac - 0.713776).abs() < 1e-9, "vacuum = {e_vac}");
        // Hartree-Fock determinant |1100>.
        let hf = DensityMatrix::basis_state(4, "1100").unwrap();
        let e_hf = hf.expectation_pauli_sum(h.terms()).unwrap();
        assert!((e_hf - (-1.116685)).abs() < 1e-9, "hf = {e_hf}");
        // Correlation lowers the energy below Hartree-Fock.
        assert!(ground < e_hf);
    }

    #[test]
    fn ansatz_compiles_to_the_three_exact_excitation_rotations() {
        let ansatz = ucc3_ansatz();
        assert_eq!(ansatz.n_qubits, 4);
        assert_eq!(ansatz.n_slots(), 3);
        let cx_count = ansatz.ops.iter().filter(|op| op.label == "CX").count();
        assert_eq!(cx_count, 14);
        let theta = [0.37, -0.85, 0.61];
        let binding = ParamBinding::new(theta);
        let compiled = circuit_unitary(&ansatz, Some(&binding)).unwrap();
        let generators = ["XZYI", "IXZY", "XXXY"];
        let mut want = crate::densim::embed_operator(&gates::pauli_x(), &[1], 4).unwrap()
            * crate::densim::embed_operator(&gates::pauli_x(), &[0], 4).unwrap();
        for (j, letters) in generators.iter().enumerate() {
            let p = PauliString::parse(letters).unwrap();
            want = gates::pauli_rotation(&p, theta[j]) * want;
        }
        assert!(max_abs_diff(compiled.matrix(), &want) < 1e-12);
    }

    #[test]
    fn every_cx_in_the_ansatz_pairs_up_for_inversion() {
        let hi = hidden_inverse_pass(&ucc3_ansatz(), None, None).unwrap();
        let inverted = hi.ops.iter().filter(|op| op.inverted).count();
        assert_eq!(inverted, 7);
        // Pairing is exact: each ordered pair appears an even number of times.
        let mut counts = std::collections::BTreeMap::new();
        for op in hi.ops.iter().filter(|op| op.label == "CX") {
            *counts.entry((op.targets[0], op.targets[1])).or_insert(0usize) += 1;
        }
        assert!(counts.values().all(|&c| c % 2 == 0));
    }

    #[test]
    fn zero_parameters_prepare_the_hartree_fock_state() {
        let p = noiseless_problem(ShotMode::Exact, Mitigation::None);
        let e = estimate_energy(&p, &[0.0, 0.0, 0.0], 0).unwrap();
        assert!((e - (-1.116685)).abs() < 1e-9, "E(0) = {e}");
    }

    #[test]
    fn doubles_curve_reaches_the_exact_ground_state() {
        let (theta_star, e_min) = ucc3_doubles_minimum().unwrap();
        let ground = exact_ground_energy(&h2_hamiltonian()).unwrap();
        assert!((e_min - ground).abs() < 1e-9, "curve min {e_min} vs ground {ground}");
        // Confirm the curve model by direct evaluation at the minimizer.
        let p = noiseless_problem(ShotMode::Exact, Mitigation::None);
        let direct = estimate_energy(&p, &[0.0, 0.0, theta_star], 0).unwrap();
        assert!((direct - ground).abs() < 1e-9);
    }

    #[test]
    fn constant_terms_pass_through_any_configuration() {
        let h = PauliHamiltonian::parse("0.75 IIII").unwrap();
        for shots in [ShotMode::Exact, ShotMode::Shots(64)] {
            for mitigation in
                [Mitigation::None, Mitigation::HiddenInverse, Mitigation::RandomizedCompile { instances: 3 }]
            {
                let p = VqeProblem::new(
                    ucc3_ansatz(),
                    h.clone(),
                    GateErrorModel::noiseless(),
                    shots,
                    mitigation,
                )
                .unwrap();
                let e = estimate_energy(&p, &[0.4, -0.2, 1.1], 5).unwrap();
                assert!((e - 0.75).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn all_z_hamiltonian_on_an_empty_ansatz_is_plus_one() {
        let h = PauliHamiltonian::parse("1.0 ZZZZ").unwrap();
        let ansatz = Circuit::new(4, vec![]).unwrap();
        let p = VqeProblem::new(
            ansatz,
            h,
            GateErrorModel::noiseless(),
            ShotMode::Exact,
            Mitigation::None,
        )
        .unwrap();
        assert!((estimate_energy(&p, &[], 0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn qwc_grouping_of_h2_uses_five_settings() {
        let (constant, groups) = qwc_groups(&h2_hamiltonian());
        assert!((constant - (-0.098834)).abs() < 1e-12);
        assert_eq!(groups.len(), 5);
        assert_eq!(groups.iter().map(|g| g.terms().len()).sum::<usize>(), 14);
        // Every term is measurable in its group's basis.
        for group in &groups {
            let basis = group.measurement_basis();
            for (_, pauli) in group.terms() {
                for (&p, &b) in pauli.letters().iter().zip(basis.letters()) {
                    assert!(p == Pauli::I || p == b);
                }
            }
        }
    }

    #[test]
    fn exact_energy_matches_the_dense_trace_formula() {
        let spec = NoiseSpec::MixedUnitary(
            MixedUnitaryNoise::from_pauli(&PauliString::parse("ZX").unwrap(), 0.08, 0.5).unwrap(),
        );
        let noise = GateErrorModel::cx_only(spec, ErrorSide::After, InverseBehavior::InvertsWithGate);
        let p = VqeProblem::new(
            ucc3_ansatz(),
            h2_hamiltonian(),
            noise.clone(),
            ShotMode::Exact,
            Mitigation::None,
        )
        .unwrap();
        let params = [0.3, -0.4, 0.9];
        let via_estimator = estimate_energy(&p, &params, 7).unwrap();
        // Monolithic cross-check: run the noisy circuit directly and trace
        // against the dense Hamiltonian matrix.
        let noisy = attach_noise(&ucc3_ansatz(), &noise).unwrap();
        let rho0 = DensityMatrix::basis_state(4, "0000").unwrap();
        let rho = noisy
            .run(Some(&ParamBinding::new(params)), &rho0, &NoiseRealization::empty())
            .unwrap();
        let dense = (h2_hamiltonian().matrix() * rho.data()).trace().re;
        assert!((via_estimator - dense).abs() < 1e-10);
        // Determinism.
        assert_eq!(via_estimator, estimate_energy(&p, &params, 7).unwrap());
    }

    #[test]
    fn shot_estimates_are_unbiased_around_the_exact_value() {
        let exact_p = noiseless_problem(ShotMode::Exact, Mitigation::None);
        let params = [0.2, -0.3, 0.8];
        let exact = estimate_energy(&exact_p, &params, 0).unwrap();
        let sampled_p = noiseless_problem(ShotMode::Shots(1000), Mitigation::None);
        let n = 100;
        let values: Vec<f64> = (0..n)
            .map(|s| estimate_energy(&sampled_p, &params, s as u64).unwrap())
            .collect();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var =
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let standard_error = (var / n as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * standard_error,
            "mean {mean}, exact {exact}, se {standard_error}"
        );
        assert!(standard_error > 0.0);
    }

    #[test]
    fn mitigation_arms_agree_exactly_on_the_noiseless_problem() {
        let params = [0.15, 0.45, -0.95];
        let reference =
            estimate_energy(&noiseless_problem(ShotMode::Exact, Mitigation::None), &params, 3)
                .unwrap();
        for mitigation in
            [Mitigation::HiddenInverse, Mitigation::RandomizedCompile { instances: 4 }]
        {
            let e = estimate_energy(&noiseless_problem(ShotMode::Exact, mitigation), &params, 3)
                .unwrap();
            assert!((e - reference).abs() < 1e-10, "{mitigation:?}");
        }
    }

    #[test]
    fn shot_split_spreads_the_remainder_over_leading_instances() {
        assert_eq!(split_shots(5000, 20), vec![250; 20]);
        assert_eq!(split_shots(10, 3), vec![4, 3, 3]);
        assert_eq!(split_shots(2, 4), vec![1, 1, 0, 0]);
    }

    #[test]
    fn ry_gradient_is_the_negative_sine() {
        let ansatz = Circuit::new(1, vec![GateRef::slot("RY", [0], 0)]).unwrap();
        let h = PauliHamiltonian::parse("1.0 Z").unwrap();
        let p = VqeProblem::new(
            ansatz,
            h,
            GateErrorModel::noiseless(),
            ShotMode::Exact,
            Mitigation::None,
        )
        .unwrap();
        for k in -6..=6 {
            let theta = k as f64 * 0.5;
            let g = parameter_shift_gradient(&p, &[theta], 0).unwrap();
            assert!((g[0] + theta.sin()).abs() < 1e-10, "theta = {theta}");
        }
    }

    #[test]
    fn gradient_vanishes_at_a_symmetry_point_under_shots() {
        let ansatz = Circuit::new(1, vec![GateRef::slot("RY", [0], 0)]).unwrap();
        let h = PauliHamiltonian::parse("1.0 Z").unwrap();
        let p = VqeProblem::new(
            ansatz,
            h,
            GateErrorModel::noiseless(),
            ShotMode::Shots(5000),
            Mitigation::None,
        )
        .unwrap();
        let g = parameter_shift_gradient(&p, &[0.0], 21).unwrap();
        assert!(g[0].abs() < 0.05, "gradient {}", g[0]);
    }

    #[test]
    fn shift_rule_matches_finite_differences_on_h2() {
        let p = noiseless_problem(ShotMode::Exact, Mitigation::None);
        let params = [0.21, -0.54, 0.77];
        let shift = parameter_shift_gradient(&p, &params, 0).unwrap();
        let fd = finite_difference_gradient(&p, &params, 0, 1e-5).unwrap();
        for (s, f) in shift.iter().zip(&fd) {
            assert!((s - f).abs() < 1e-6, "shift {s} vs fd {f}");
        }
    }

    #[test]
    fn adam_converges_on_the_noiseless_h2_problem() {
        let p = noiseless_problem(ShotMode::Exact, Mitigation::None);
        let ground = exact_ground_energy(&p.hamiltonian).unwrap();
        let trace =
            minimize_adam(&p, &[0.1, -0.1, 0.3], &AdamParams::default(), 120, 0).unwrap();
        assert!(
            (trace.converged_energy - ground).abs() < 2e-3,
            "converged {} vs ground {ground}",
            trace.converged_energy
        );
        for pair in trace.iterations.windows(2) {
            assert!(pair[1].evaluations_used > pair[0].evaluations_used);
        }
    }

    #[test]
    fn model_based_converges_on_the_noiseless_h2_problem() {
        let p = noiseless_problem(ShotMode::Exact, Mitigation::None);
        let ground = exact_ground_energy(&p.hamiltonian).unwrap();
        let trace = minimize_model_based(
            &p,
            &[0.1, -0.1, 0.3],
            200,
            &TrustRegionParams::default(),
            0,
        )
        .unwrap();
        assert!(
            (trace.converged_energy - ground).abs() < 2e-3,
            "converged {} vs ground {ground}",
            trace.converged_energy
        );
        assert!(trace.iterations.last().unwrap().evaluations_used <= 200);
    }

    #[test]
    fn hidden_inverses_help_under_quasi_static_overrotation() {
        let spec = NoiseSpec::OverRotation(OverRotationNoise::zx(
            FRAC_PI_2,
            0.08,
            OverRotationSampling::QuasiStatic,
        ));
        let noise =
            GateErrorModel::cx_only(spec, ErrorSide::After, InverseBehavior::InvertsWithGate);
        let (theta_star, _) = ucc3_doubles_minimum().unwrap();
        let params = [0.0, 0.0, theta_star];
        let ground = exact_ground_energy(&h2_hamiltonian()).unwrap();
        let arm = |mitigation| {
            VqeProblem::new(
                ucc3_ansatz(),
                h2_hamiltonian(),
                noise.clone(),
                ShotMode::Exact,
                mitigation,
            )
            .unwrap()
        };
        let seeds: Vec<u64> = (0..12).collect();
        let mean = |mitigation: Mitigation| {
            let p = arm(mitigation);
            seeds
                .iter()
                .map(|&s| (estimate_energy(&p, &params, s).unwrap() - ground).abs())
                .sum::<f64>()
                / seeds.len() as f64
        };
        let default_err = mean(Mitigation::None);
        let hi_err = mean(Mitigation::HiddenInverse);
        assert!(
            hi_err < 0.2 * default_err,
            "hidden inverses {hi_err} vs default {default_err}"
        );
    }

    #[test]
    fn unbound_parameters_are_rejected() {
        let p = noiseless_problem(ShotMode::Exact, Mitigation::None);
        assert!(matches!(
            estimate_energy(&p, &[0.1, 0.2], 0),
            Err(crate::Error::Input(_))
        ));
    }

    #[test]
    fn mismatched_register_sizes_are_rejected() {
        let ansatz = Circuit::new(2, vec![]).unwrap();
        let h = PauliHamiltonian::parse("1.0 ZZZ").unwrap();
        assert!(matches!(
            VqeProblem::new(
                ansatz,
                h,
                GateErrorModel::noiseless(),
                ShotMode::Exact,
                Mitigation::None
            ),
            Err(crate::Error::Validation(_))
        ));
    }
}
