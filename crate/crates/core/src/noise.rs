//! Coherent and mixed-unitary gate noise.
//!
//! Two channel families: a mixed-unitary channel interpolating between a
//! purely coherent rotation `exp(-i eps G)` (kappa = 1) and its fully
//! dephased counterpart (kappa = 0), and a relative over-rotation of a Pauli
//! rotation angle, sampled once per execution in quasi-static mode.
//!
//! A [`GateErrorModel`] maps gate labels to channels and is attached to a
//! circuit with [`attach_noise`]. With `side = After` the hardware gate is
//! `U·E` (the error acts on the state first); an inverted gate under
//! `inverts_with_gate` runs `(U·E)⁻¹ = E⁻¹·U⁻¹`, which is what lets paired
//! gate/inverse errors cancel. Under `fixed` the inverse gate keeps the same
//! error on the same side, modeling hardware whose native gate is not
//! self-inverse.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::densim::{
    embed_operator, DensityMatrix, KrausChannel, PauliString, QuantumProcess, UnitaryGate,
};
use crate::transforms::{Circuit, GateRef, ParamBinding};
use crate::{gates, C64, CMatrix, Error, Result};

const HERMITICITY_TOL: f64 = 1e-12;

/// Channel `rho -> kappa·e^{-i eps G} rho e^{i eps G} + (1-kappa)·(cos²eps·rho
/// + sin²eps·G rho G)` for a Hermitian unitary generator `G`.
#[derive(Clone, Debug)]
pub struct MixedUnitaryNoise {
    generator: UnitaryGate,
    epsilon: f64,
    kappa: f64,
}

impl MixedUnitaryNoise {
    pub fn new(generator: UnitaryGate, epsilon: f64, kappa: f64) -> Result<Self> {
        let m = generator.matrix();
        let defect = crate::densim::max_abs_diff(m, &m.adjoint());
        if defect > HERMITICITY_TOL {
            return Err(Error::validation(format!(
                "mixed-unitary generator {} is not Hermitian (defect {defect:.2e})",
                generator.label()
            )));
        }
        if !(0.0..=1.0).contains(&kappa) || !kappa.is_finite() {
            return Err(Error::validation(format!("kappa must lie in [0, 1], got {kappa}")));
        }
        if !epsilon.is_finite() {
            return Err(Error::validation(format!("epsilon must be finite, got {epsilon}")));
        }
        Ok(MixedUnitaryNoise { generator, epsilon, kappa })
    }

    /// Generator given as a Pauli string.
    pub fn from_pauli(generator: &PauliString, epsilon: f64, kappa: f64) -> Result<Self> {
        let gate = UnitaryGate::new(generator.to_string(), generator.matrix())?;
        MixedUnitaryNoise::new(gate, epsilon, kappa)
    }

    pub fn generator(&self) -> &UnitaryGate {
        &self.generator
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `exp(-i eps G) = cos(eps) I - i sin(eps) G`, exact for Hermitian
    /// unitary `G`.
    pub fn coherent_part(&self) -> CMatrix {
        let dim = self.generator.matrix().nrows();
        let cos = C64::new(self.epsilon.cos(), 0.0);
        let sin = C64::new(0.0, -self.epsilon.sin());
        gates::identity(dim).map(|z| z * cos) + self.generator.matrix().map(|z| z * sin)
    }

    /// The same channel with the coherent rotation reversed. For kappa = 1
    /// this is the exact inverse channel; the incoherent part is symmetric in
    /// the sign of epsilon.
    pub fn inverse(&self) -> Self {
        MixedUnitaryNoise { epsilon: -self.epsilon, ..self.clone() }
    }
}

/// Kraus set `{√kappa·e^{-i eps G}, √(1-kappa)·cos(eps)·I, √(1-kappa)·sin(eps)·G}`.
pub fn kraus_of_mixed(spec: &MixedUnitaryNoise) -> KrausChannel {
    let dim = spec.generator.matrix().nrows();
    let sqrt_k = C64::new(spec.kappa.sqrt(), 0.0);
    let sqrt_rest = C64::new((1.0 - spec.kappa).sqrt(), 0.0);
    let cos = C64::new(spec.epsilon.cos(), 0.0);
    let sin = C64::new(spec.epsilon.sin(), 0.0);
    let operators = vec![
        spec.coherent_part().map(|z| z * sqrt_k),
        gates::identity(dim).map(|z| z * sqrt_rest * cos),
        spec.generator.matrix().map(|z| z * sqrt_rest * sin),
    ];
    KrausChannel::new(operators).expect("mixed-unitary Kraus set is complete by construction")
}

/// Entanglement fidelity of a channel to the identity: `F = Σᵢ |Tr(Kᵢ)/d|²`.
///
/// For the mixed-unitary channel this evaluates to `cos²(eps) +
/// sin²(eps)·(Tr G / d)²` for every kappa, so the fidelity carries no
/// information about the coherent/incoherent split.
pub fn process_fidelity_to_identity(ch: &KrausChannel) -> f64 {
    let d = (1usize << ch.arity()) as f64;
    ch.operators().iter().map(|k| (k.trace() / C64::new(d, 0.0)).norm_sqr()).sum()
}

/// How a relative over-rotation draw is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverRotationSampling {
    /// Fixed miscalibration: the relative error is always `epsilon`.
    Systematic { epsilon: f64 },
    /// Slow drift: the relative error is redrawn from `N(0, sigma)` once per
    /// circuit execution and shared by every use of the gate (and its
    /// inverse) within that execution.
    QuasiStatic,
}

/// A Pauli rotation whose angle is miscalibrated by a relative factor:
/// the hardware rotates by `(1 + eps)·base_angle` instead of `base_angle`.
/// The deviation `exp(-i·eps·base_angle·P/2)` is what gets attached to the
/// gate as its error.
#[derive(Clone, Debug)]
pub struct OverRotationNoise {
    generator: PauliString,
    base_angle: f64,
    sigma: f64,
    sampling: OverRotationSampling,
}

impl OverRotationNoise {
    pub fn new(
        generator: PauliString,
        base_angle: f64,
        sigma: f64,
        sampling: OverRotationSampling,
    ) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::validation(format!("sigma must be >= 0, got {sigma}")));
        }
        if !base_angle.is_finite() {
            return Err(Error::validation(format!("base_angle must be finite, got {base_angle}")));
        }
        Ok(OverRotationNoise { generator, base_angle, sigma, sampling })
    }

    /// ZX-generated over-rotation, the native error of a cross-resonance CX.
    pub fn zx(base_angle: f64, sigma: f64, sampling: OverRotationSampling) -> Self {
        OverRotationNoise::new(PauliString::parse("ZX").unwrap(), base_angle, sigma, sampling)
            .expect("valid by construction")
    }

    pub fn generator(&self) -> &PauliString {
        &self.generator
    }

    pub fn base_angle(&self) -> f64 {
        self.base_angle
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sampling(&self) -> OverRotationSampling {
        self.sampling
    }

    /// Draw the relative error for one execution.
    pub fn sample_epsilon(&self, rng: &mut impl Rng) -> f64 {
        match self.sampling {
            OverRotationSampling::Systematic { epsilon } => epsilon,
            OverRotationSampling::QuasiStatic => {
                if self.sigma == 0.0 {
                    0.0
                } else {
                    let normal = rand_distr::Normal::new(0.0, self.sigma)
                        .expect("sigma validated non-negative and finite");
                    rng.sample(normal)
                }
            }
        }
    }
}

/// Realized rotation angle `(1 + eps)·base_angle` for one execution.
pub fn sample_overrotation(spec: &OverRotationNoise, rng: &mut impl Rng) -> f64 {
    (1.0 + spec.sample_epsilon(rng)) * spec.base_angle
}

/// One error channel assignable to a gate label.
#[derive(Clone, Debug)]
pub enum NoiseSpec {
    MixedUnitary(MixedUnitaryNoise),
    OverRotation(OverRotationNoise),
}

impl NoiseSpec {
    fn arity(&self) -> usize {
        match self {
            NoiseSpec::MixedUnitary(m) => m.generator().arity(),
            NoiseSpec::OverRotation(o) => o.generator().n_qubits(),
        }
    }
}

/// Where the error sits relative to its gate: `After` composes `U·E`
/// (hardware applies the error to the state first), `Before` composes `E·U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorSide {
    After,
    Before,
}

/// What error an inverted gate carries: the inverse error on the opposite
/// side (`(U·E)⁻¹ = E⁻¹·U⁻¹`), or the same error on the same side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InverseBehavior {
    InvertsWithGate,
    Fixed,
}

/// Per-label error channels plus placement and inverse semantics.
///
/// When `entries` is non-empty, every label appearing in a circuit must be
/// either in `entries` or listed `noise_free`; an empty model means ideal
/// execution.
#[derive(Clone, Debug)]
pub struct GateErrorModel {
    entries: BTreeMap<String, NoiseSpec>,
    noise_free: BTreeSet<String>,
    side: ErrorSide,
    inverse_behavior: InverseBehavior,
}

impl GateErrorModel {
    pub fn new(
        entries: BTreeMap<String, NoiseSpec>,
        noise_free: BTreeSet<String>,
        side: ErrorSide,
        inverse_behavior: InverseBehavior,
    ) -> Result<Self> {
        for label in entries.keys().chain(noise_free.iter()) {
            if gates::lookup(label).is_none() {
                return Err(Error::config(format!("error model references unknown gate {label}")));
            }
        }
        Ok(GateErrorModel { entries, noise_free, side, inverse_behavior })
    }

    /// Ideal execution: no label carries an error.
    pub fn noiseless() -> Self {
        GateErrorModel {
            entries: BTreeMap::new(),
            noise_free: BTreeSet::new(),
            side: ErrorSide::After,
            inverse_behavior: InverseBehavior::InvertsWithGate,
        }
    }

    /// Error on CX only; every other known gate is noise-free.
    pub fn cx_only(spec: NoiseSpec, side: ErrorSide, inverse_behavior: InverseBehavior) -> Self {
        let mut entries = BTreeMap::new();
        entries.insert("CX".to_string(), spec);
        let noise_free =
            gates::KNOWN_LABELS.iter().filter(|&&l| l != "CX").map(|l| l.to_string()).collect();
        GateErrorModel { entries, noise_free, side, inverse_behavior }
    }

    pub fn is_noiseless(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn side(&self) -> ErrorSide {
        self.side
    }

    pub fn inverse_behavior(&self) -> InverseBehavior {
        self.inverse_behavior
    }

    pub fn entries(&self) -> &BTreeMap<String, NoiseSpec> {
        &self.entries
    }

    /// Draw the quasi-static relative errors for one circuit execution, one
    /// per over-rotation entry, in label order. Systematic entries record
    /// their fixed value without consuming randomness.
    pub fn realize(&self, rng: &mut impl Rng) -> NoiseRealization {
        let mut epsilons = BTreeMap::new();
        for (label, spec) in &self.entries {
            if let NoiseSpec::OverRotation(o) = spec {
                epsilons.insert(label.clone(), o.sample_epsilon(rng));
            }
        }
        NoiseRealization { epsilons }
    }
}

/// The relative over-rotation errors drawn for one circuit execution.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NoiseRealization {
    epsilons: BTreeMap<String, f64>,
}

impl NoiseRealization {
    /// Realization with no over-rotation draws (valid for models whose
    /// entries are all mixed-unitary, and for noiseless models).
    pub fn empty() -> Self {
        NoiseRealization::default()
    }

    pub fn epsilon(&self, label: &str) -> Result<f64> {
        self.epsilons.get(label).copied().ok_or_else(|| {
            Error::validation(format!(
                "no over-rotation draw for gate {label}; obtain the realization from GateErrorModel::realize"
            ))
        })
    }

    pub fn epsilons(&self) -> &BTreeMap<String, f64> {
        &self.epsilons
    }
}

/// One step of a noisy execution plan, in time order.
#[derive(Clone, Debug)]
pub enum NoisyStep {
    Gate(GateRef),
    MixedError { label: String, spec: MixedUnitaryNoise, targets: Vec<usize> },
    OverRotationError {
        label: String,
        generator: PauliString,
        base_angle: f64,
        /// -1 for the inverse error attached to an inverted gate.
        sign: f64,
        targets: Vec<usize>,
    },
}

/// A circuit with its error channels spliced in.
#[derive(Clone, Debug)]
pub struct NoisyCircuit {
    n_qubits: usize,
    steps: Vec<NoisyStep>,
}

/// Splice the model's error channels into the circuit.
///
/// Each gate carrying an entry gains an error step on the configured side
/// (in time order, `After`'s `U·E` puts the error first). Inverted gates
/// under `InvertsWithGate` get the inverse error on the opposite side.
pub fn attach_noise(circuit: &Circuit, model: &GateErrorModel) -> Result<NoisyCircuit> {
    circuit.validate()?;
    if !model.entries.is_empty() {
        for op in &circuit.ops {
            if !model.entries.contains_key(&op.label) && !model.noise_free.contains(&op.label) {
                return Err(Error::config(format!(
                    "gate {} is neither assigned an error nor marked noise-free",
                    op.label
                )));
            }
        }
    }
    let mut steps = Vec::with_capacity(2 * circuit.ops.len());
    for op in &circuit.ops {
        let Some(spec) = model.entries.get(&op.label) else {
            steps.push(NoisyStep::Gate(op.clone()));
            continue;
        };
        let arity = spec.arity();
        if arity != op.targets.len() {
            return Err(Error::config(format!(
                "error generator for {} acts on {arity} qubits, gate has {}",
                op.label,
                op.targets.len()
            )));
        }
        let invert_error =
            op.inverted && model.inverse_behavior == InverseBehavior::InvertsWithGate;
        let error_step = match spec {
            NoiseSpec::MixedUnitary(m) => NoisyStep::MixedError {
                label: op.label.clone(),
                spec: if invert_error { m.inverse() } else { m.clone() },
                targets: op.targets.clone(),
            },
            NoiseSpec::OverRotation(o) => NoisyStep::OverRotationError {
                label: op.label.clone(),
                generator: o.generator().clone(),
                base_angle: o.base_angle(),
                sign: if invert_error { -1.0 } else { 1.0 },
                targets: op.targets.clone(),
            },
        };
        // `U·E` puts the error first in time; inverting swaps the order.
        let error_first = match model.side {
            ErrorSide::After => !invert_error,
            ErrorSide::Before => invert_error,
        };
        if error_first {
            steps.push(error_step);
            steps.push(NoisyStep::Gate(op.clone()));
        } else {
            steps.push(NoisyStep::Gate(op.clone()));
            steps.push(error_step);
        }
    }
    Ok(NoisyCircuit { n_qubits: circuit.n_qubits, steps })
}

impl NoisyCircuit {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn steps(&self) -> &[NoisyStep] {
        &self.steps
    }

    /// Resolve parameters and noise draws into a concrete executable map.
    pub fn bind(
        &self,
        binding: Option<&ParamBinding>,
        realization: &NoiseRealization,
    ) -> Result<BoundNoisyCircuit> {
        let mut steps = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            let resolved = match step {
                NoisyStep::Gate(op) => {
                    let angle = op.resolve_angle(binding)?;
                    let matrix = gates::gate_matrix(&op.label, angle, op.inverted)?;
                    ResolvedStep::Unitary { matrix, targets: op.targets.clone() }
                }
                NoisyStep::MixedError { spec, targets, .. } => {
                    if spec.kappa() == 1.0 {
                        ResolvedStep::Unitary {
                            matrix: spec.coherent_part(),
                            targets: targets.clone(),
                        }
                    } else {
                        ResolvedStep::Channel {
                            channel: kraus_of_mixed(spec),
                            targets: targets.clone(),
                        }
                    }
                }
                NoisyStep::OverRotationError { label, generator, base_angle, sign, targets } => {
                    let epsilon = realization.epsilon(label)?;
                    let deviation = sign * epsilon * base_angle;
                    ResolvedStep::Unitary {
                        matrix: gates::pauli_rotation(generator, deviation),
                        targets: targets.clone(),
                    }
                }
            };
            steps.push(resolved);
        }
        Ok(BoundNoisyCircuit { n_qubits: self.n_qubits, steps })
    }

    /// Run the noisy circuit on a state.
    pub fn run(
        &self,
        binding: Option<&ParamBinding>,
        rho: &DensityMatrix,
        realization: &NoiseRealization,
    ) -> Result<DensityMatrix> {
        self.bind(binding, realization)?.apply_state(rho)
    }

    /// Total unitary of a purely coherent plan. Errors if any step is a
    /// non-unitary channel (mixed-unitary noise with kappa < 1).
    pub fn composite_matrix(
        &self,
        binding: Option<&ParamBinding>,
        realization: &NoiseRealization,
    ) -> Result<CMatrix> {
        let bound = self.bind(binding, realization)?;
        let dim = 1usize << self.n_qubits;
        let mut total = gates::identity(dim);
        for step in &bound.steps {
            match step {
                ResolvedStep::Unitary { matrix, targets } => {
                    total = embed_operator(matrix, targets, self.n_qubits)? * total;
                }
                ResolvedStep::Channel { .. } => {
                    return Err(Error::validation(
                        "composite matrix undefined: plan contains a non-unitary channel"
                            .to_string(),
                    ));
                }
            }
        }
        Ok(total)
    }
}

enum ResolvedStep {
    Unitary { matrix: CMatrix, targets: Vec<usize> },
    Channel { channel: KrausChannel, targets: Vec<usize> },
}

/// A noisy circuit with parameters bound and noise draws fixed; a concrete
/// completely positive map suitable for tomography.
pub struct BoundNoisyCircuit {
    n_qubits: usize,
    steps: Vec<ResolvedStep>,
}

impl QuantumProcess for BoundNoisyCircuit {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply_to_operator(&self, op: &CMatrix) -> CMatrix {
        let mut acc = op.clone();
        for step in &self.steps {
            acc = match step {
                ResolvedStep::Unitary { matrix, targets } => {
                    let full = embed_operator(matrix, targets, self.n_qubits)
                        .expect("targets validated at attach time");
                    &full * acc * full.adjoint()
                }
                ResolvedStep::Channel { channel, targets } => {
                    let dim = acc.nrows();
                    let mut next = CMatrix::zeros(dim, dim);
                    for k in channel.operators() {
                        let full = embed_operator(k, targets, self.n_qubits)
                            .expect("targets validated at attach time");
                        next += &full * &acc * full.adjoint();
                    }
                    next
                }
            };
        }
        acc
    }
}
