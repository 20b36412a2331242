//! Circuit representation and rewrite passes: inverted-gate substitution,
//! Pauli-twirl randomized compiling, unitary folding, and the
//! cross-resonance decomposition of CX.
//!
//! Gates are labels plus target qubits; rotations carry either a bound
//! `fixed_angle` or a `param_slot` resolved through a [`ParamBinding`]. The
//! `inverted` flag requests the adjoint of the ideal matrix; what the flag
//! means for attached noise is decided by the error model (see `noise`).

use serde::{Deserialize, Serialize};

use crate::densim::{embed_operator, Pauli, UnitaryGate};
use crate::seeding::rng_from_seed;
use crate::{gates, Error, Result};

/// Reference to one gate application inside a circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRef {
    pub label: String,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub param_slot: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_angle: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub inverted: bool,
}

impl GateRef {
    /// Fixed (non-parameterized) gate.
    pub fn fixed(label: impl Into<String>, targets: impl Into<Vec<usize>>) -> Self {
        GateRef {
            label: label.into(),
            targets: targets.into(),
            param_slot: None,
            fixed_angle: None,
            inverted: false,
        }
    }

    /// Rotation bound to a parameter slot.
    pub fn slot(label: impl Into<String>, targets: impl Into<Vec<usize>>, slot: usize) -> Self {
        GateRef { param_slot: Some(slot), ..GateRef::fixed(label, targets) }
    }

    /// Rotation with a literal angle.
    pub fn angle(label: impl Into<String>, targets: impl Into<Vec<usize>>, angle: f64) -> Self {
        GateRef { fixed_angle: Some(angle), ..GateRef::fixed(label, targets) }
    }

    pub fn inverted(mut self) -> Self {
        self.inverted = true;
        self
    }

    /// Angle at bind time: `None` for fixed gates, the literal or bound value
    /// for rotations. Errors when a slot is referenced without a binding.
    pub fn resolve_angle(&self, binding: Option<&ParamBinding>) -> Result<Option<f64>> {
        match (self.fixed_angle, self.param_slot) {
            (Some(a), None) => Ok(Some(a)),
            (None, Some(slot)) => {
                let binding = binding.ok_or_else(|| {
                    Error::input(format!("gate {} references slot {slot} but no binding given", self.label))
                })?;
                Ok(Some(binding.value(slot)?))
            }
            (None, None) => Ok(None),
            (Some(_), Some(_)) => Err(Error::validation(format!(
                "gate {} has both a fixed angle and a parameter slot",
                self.label
            ))),
        }
    }
}

/// Parameter values indexed by `param_slot`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamBinding {
    pub values: Vec<f64>,
}

impl ParamBinding {
    pub fn new(values: impl Into<Vec<f64>>) -> Self {
        ParamBinding { values: values.into() }
    }

    pub fn value(&self, slot: usize) -> Result<f64> {
        self.values
            .get(slot)
            .copied()
            .ok_or_else(|| Error::input(format!("parameter slot {slot} is unbound ({} values)", self.values.len())))
    }
}

/// Ordered list of gates on a fixed-size register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<GateRef>,
}

impl Circuit {
    pub fn new(n_qubits: usize, ops: Vec<GateRef>) -> Result<Self> {
        let circuit = Circuit { n_qubits, ops };
        circuit.validate()?;
        Ok(circuit)
    }

    /// Check labels, arities, target ranges, and parameter bookkeeping.
    pub fn validate(&self) -> Result<()> {
        for (i, op) in self.ops.iter().enumerate() {
            let def = gates::lookup(&op.label)
                .ok_or_else(|| Error::UnsupportedGate(format!("{} (op {i})", op.label)))?;
            if def.arity != op.targets.len() {
                return Err(Error::validation(format!(
                    "op {i}: {} expects {} targets, got {}",
                    op.label,
                    def.arity,
                    op.targets.len()
                )));
            }
            for &t in &op.targets {
                if t >= self.n_qubits {
                    return Err(Error::validation(format!(
                        "op {i}: target {t} out of range for {} qubits",
                        self.n_qubits
                    )));
                }
            }
            for (a, &t) in op.targets.iter().enumerate() {
                if op.targets[..a].contains(&t) {
                    return Err(Error::validation(format!("op {i}: duplicate target {t}")));
                }
            }
            match (def.is_rotation(), op.param_slot.is_some(), op.fixed_angle.is_some()) {
                (true, true, false) | (true, false, true) => {}
                (true, _, _) => {
                    return Err(Error::validation(format!(
                        "op {i}: rotation {} needs exactly one of param_slot/fixed_angle",
                        op.label
                    )));
                }
                (false, false, false) => {}
                (false, _, _) => {
                    return Err(Error::validation(format!(
                        "op {i}: fixed gate {} cannot carry parameters",
                        op.label
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of parameter slots (max referenced slot + 1).
    pub fn n_slots(&self) -> usize {
        self.ops.iter().filter_map(|op| op.param_slot).map(|s| s + 1).max().unwrap_or(0)
    }

    pub fn load_json(text: &str) -> Result<Self> {
        let circuit: Circuit =
            serde_json::from_str(text).map_err(|e| Error::input(format!("circuit JSON: {e}")))?;
        circuit.validate()?;
        Ok(circuit)
    }
}

/// Compose the ideal unitary, honoring `inverted` flags as matrix adjoints.
pub fn circuit_unitary(c: &Circuit, binding: Option<&ParamBinding>) -> Result<UnitaryGate> {
    c.validate()?;
    let dim = 1usize << c.n_qubits;
    let mut total = gates::identity(dim);
    for op in &c.ops {
        let angle = op.resolve_angle(binding)?;
        let m = gates::gate_matrix(&op.label, angle, op.inverted)?;
        let embedded = embed_operator(&m, &op.targets, c.n_qubits)?;
        total = embedded * total;
    }
    UnitaryGate::new("circuit", total)
}

/// Mark every second CX on each (control, target) pair as inverted.
///
/// Occurrences are counted per ordered pair: a CX and its opposite-direction
/// partner are physically distinct gates with distinct pulse inverses, so
/// they keep separate parities. The ideal unitary is unchanged because CX is
/// self-inverse; on hardware the substitution lets paired coherent errors
/// cancel.
///
/// With `angle_threshold` set, a substitution is skipped when any rotation
/// between the pair's two CXs has `|angle| > threshold` at bind time (large
/// interleaved rotations re-order the error terms and the inverse can amplify
/// instead of cancel). The thresholded form requires a binding to resolve
/// slot-bound angles.
pub fn hidden_inverse_pass(
    c: &Circuit,
    angle_threshold: Option<f64>,
    binding: Option<&ParamBinding>,
) -> Result<Circuit> {
    c.validate()?;
    if angle_threshold.is_some() && binding.is_none() {
        return Err(Error::config(
            "hidden-inverse angle threshold requires a parameter binding".to_string(),
        ));
    }
    let mut out = c.clone();
    let mut last_seen: std::collections::HashMap<(usize, usize), (usize, usize)> =
        std::collections::HashMap::new();
    for i in 0..out.ops.len() {
        if out.ops[i].label != "CX" {
            continue;
        }
        let key = (out.ops[i].targets[0], out.ops[i].targets[1]);
        let (count, prev_index) = last_seen.get(&key).copied().unwrap_or((0, 0));
        let mut invert = count % 2 == 1;
        if invert {
            if let Some(threshold) = angle_threshold {
                let between = &c.ops[prev_index + 1..i];
                for op in between {
                    if let Some(angle) = op.resolve_angle(binding)? {
                        if angle.abs() > threshold {
                            invert = false;
                            break;
                        }
                    }
                }
            }
        }
        out.ops[i].inverted = invert;
        last_seen.insert(key, (count + 1, i));
    }
    Ok(out)
}

const PAULI_LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

fn pauli_to_bits(p: Pauli) -> (u8, u8) {
    match p {
        Pauli::I => (0, 0),
        Pauli::X => (1, 0),
        Pauli::Y => (1, 1),
        Pauli::Z => (0, 1),
    }
}

fn bits_to_pauli(x: u8, z: u8) -> Pauli {
    match (x, z) {
        (0, 0) => Pauli::I,
        (1, 0) => Pauli::X,
        (1, 1) => Pauli::Y,
        _ => Pauli::Z,
    }
}

/// Conjugate a Pauli pair through CX (control first), dropping the overall
/// sign: `CX (P ⊗ Q) CX = ± (P' ⊗ Q')`. X propagates control→target, Z
/// propagates target→control.
pub fn cx_conjugate_pauli_pair(control: Pauli, target: Pauli) -> (Pauli, Pauli) {
    let (xc, zc) = pauli_to_bits(control);
    let (xt, zt) = pauli_to_bits(target);
    (bits_to_pauli(xc, zc ^ zt), bits_to_pauli(xt ^ xc, zt))
}

/// Pauli-twirl every CX: insert a uniformly random Pauli pair before it and
/// the CX-conjugated correction after it, as single-qubit gates (identity
/// letters are dropped). The ideal unitary is unchanged up to a global sign.
/// Deterministic under `seed`.
pub fn randomized_compile(c: &Circuit, seed: u64) -> Result<Circuit> {
    c.validate()?;
    let mut rng = rng_from_seed(seed);
    let mut ops = Vec::with_capacity(c.ops.len());
    for op in &c.ops {
        if op.targets.len() == 2 && op.label != "CX" {
            return Err(Error::UnsupportedGate(format!(
                "{} cannot be Pauli-twirled (only CX is supported)",
                op.label
            )));
        }
        if op.label != "CX" {
            ops.push(op.clone());
            continue;
        }
        let p = PAULI_LETTERS[rand::Rng::random_range(&mut rng, 0..4usize)];
        let q = PAULI_LETTERS[rand::Rng::random_range(&mut rng, 0..4usize)];
        let (control, target) = (op.targets[0], op.targets[1]);
        push_pauli_gate(&mut ops, p, control);
        push_pauli_gate(&mut ops, q, target);
        ops.push(op.clone());
        let (p2, q2) = cx_conjugate_pauli_pair(p, q);
        push_pauli_gate(&mut ops, p2, control);
        push_pauli_gate(&mut ops, q2, target);
    }
    Ok(Circuit { n_qubits: c.n_qubits, ops })
}

fn push_pauli_gate(ops: &mut Vec<GateRef>, p: Pauli, qubit: usize) {
    if p != Pauli::I {
        ops.push(GateRef::fixed(p.to_char().to_string(), [qubit]));
    }
}

/// Folding variant: repeat the gate itself or alternate with its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldVariant {
    Default,
    Inverse,
}

impl std::fmt::Display for FoldVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FoldVariant::Default => "default",
            FoldVariant::Inverse => "inverse",
        })
    }
}

/// Identity-folded circuit `[G] ++ n * U` with `U = [G, G]` (default) or
/// `U = [G⁻¹, G]` (inverse). The label must be self-inverse in the ideal
/// model, so the composition always equals a single `G`.
pub fn fold(gate_label: &str, n: usize, variant: FoldVariant) -> Result<Circuit> {
    let def = gates::lookup(gate_label)
        .ok_or_else(|| Error::UnsupportedGate(gate_label.to_string()))?;
    if !def.is_self_inverse() {
        return Err(Error::input(format!("fold requires a self-inverse gate, {gate_label} is not")));
    }
    let targets: Vec<usize> = (0..def.arity).collect();
    let base = GateRef::fixed(gate_label, targets);
    let mut ops = vec![base.clone()];
    for _ in 0..n {
        match variant {
            FoldVariant::Default => {
                ops.push(base.clone());
                ops.push(base.clone());
            }
            FoldVariant::Inverse => {
                ops.push(base.clone().inverted());
                ops.push(base.clone());
            }
        }
    }
    Ok(Circuit { n_qubits: def.arity, ops })
}

/// CX decomposed over the cross-resonance gate:
/// `CX = [ZI]_{-pi/2} [IX]_{-pi/2} [ZX]_{pi/2}` up to a global phase. The CR
/// rotation is the first op in time order.
pub fn cx_from_cr() -> Circuit {
    use std::f64::consts::FRAC_PI_2;
    Circuit {
        n_qubits: 2,
        ops: vec![
            GateRef::angle("CR", [0, 1], FRAC_PI_2),
            GateRef::angle("RX", [1], -FRAC_PI_2),
            GateRef::angle("RZ", [0], -FRAC_PI_2),
        ],
    }
}

/// Deterministic pseudo-random circuit over CX, H, X, Z, and literal-angle
/// rotations; used to property-test that rewrite passes preserve the ideal
/// unitary.
pub fn random_circuit(n_qubits: usize, n_gates: usize, seed: u64) -> Circuit {
    use rand::Rng;
    let mut rng = rng_from_seed(seed);
    let mut ops = Vec::with_capacity(n_gates);
    for _ in 0..n_gates {
        let choice = rng.random_range(0..6u32);
        let q = rng.random_range(0..n_qubits);
        let op = match choice {
            0 if n_qubits >= 2 => {
                let mut q2 = rng.random_range(0..n_qubits);
                while q2 == q {
                    q2 = rng.random_range(0..n_qubits);
                }
                GateRef::fixed("CX", [q, q2])
            }
            1 => GateRef::fixed("H", [q]),
            2 => GateRef::fixed("X", [q]),
            3 => GateRef::fixed("Z", [q]),
            4 => GateRef::angle("RZ", [q], rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)),
            _ => GateRef::angle("RY", [q], rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)),
        };
        ops.push(op);
    }
    Circuit { n_qubits, ops }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densim::{init_state, max_abs_diff, PauliString};
    use crate::pulsekit::unitary_overlap;
    use crate::{gates, C64};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn cx01() -> GateRef {
        GateRef::fixed("CX", [0, 1])
    }

    #[test]
    fn single_cx_is_left_alone() {
        let c = Circuit::new(2, vec![cx01()]).unwrap();
        let out = hidden_inverse_pass(&c, None, None).unwrap();
        assert_eq!(out, c);
    }

    #[test]
    fn second_cx_on_same_pair_gets_inverted() {
        let c = Circuit::new(2, vec![cx01(), GateRef::angle("RZ", [1], 0.3), cx01()]).unwrap();
        let out = hidden_inverse_pass(&c, None, None).unwrap();
        assert!(!out.ops[0].inverted);
        assert!(out.ops[2].inverted);
    }

    #[test]
    fn parity_is_tracked_per_pair() {
        let cx23 = GateRef::fixed("CX", [2, 3]);
        let c = Circuit::new(4, vec![cx01(), cx23.clone(), cx01(), cx23]).unwrap();
        let out = hidden_inverse_pass(&c, None, None).unwrap();
        let flags: Vec<bool> = out.ops.iter().map(|op| op.inverted).collect();
        assert_eq!(flags, vec![false, false, true, true]);
    }

    #[test]
    fn opposite_direction_cx_has_its_own_parity() {
        let cx10 = GateRef::fixed("CX", [1, 0]);
        let c = Circuit::new(2, vec![cx01(), cx10.clone(), cx01(), cx10]).unwrap();
        let out = hidden_inverse_pass(&c, None, None).unwrap();
        let flags: Vec<bool> = out.ops.iter().map(|op| op.inverted).collect();
        // Third op is the second (0,1) occurrence; fourth is the second (1,0).
        assert_eq!(flags, vec![false, false, true, true]);
    }

    #[test]
    fn threshold_skips_substitution_across_large_rotations() {
        let c = Circuit::new(2, vec![cx01(), GateRef::slot("RZ", [1], 0), cx01()]).unwrap();
        let small = ParamBinding::new([0.2]);
        let large = ParamBinding::new([2.5]);
        let kept = hidden_inverse_pass(&c, Some(FRAC_PI_2), Some(&small)).unwrap();
        assert!(kept.ops[2].inverted);
        let skipped = hidden_inverse_pass(&c, Some(FRAC_PI_2), Some(&large)).unwrap();
        assert!(!skipped.ops[2].inverted);
        // Literal angles are considered too.
        let c = Circuit::new(2, vec![cx01(), GateRef::angle("RY", [0], 3.0), cx01()]).unwrap();
        let skipped = hidden_inverse_pass(&c, Some(FRAC_PI_2), Some(&small)).unwrap();
        assert!(!skipped.ops[2].inverted);
    }

    #[test]
    fn threshold_without_binding_is_a_config_error() {
        let c = Circuit::new(2, vec![cx01(), GateRef::slot("RZ", [1], 0), cx01()]).unwrap();
        let err = hidden_inverse_pass(&c, Some(1.0), None);
        assert!(matches!(err, Err(crate::Error::Config(_))));
    }

    #[test]
    fn pass_is_idempotent() {
        for seed in 0..20 {
            let c = random_circuit(4, 25, seed);
            let once = hidden_inverse_pass(&c, None, None).unwrap();
            let twice = hidden_inverse_pass(&once, None, None).unwrap();
            assert_eq!(once, twice, "seed {seed}");
        }
    }

    #[test]
    fn conjugation_table_matches_matrix_oracle() {
        let cx = gates::cx();
        for &p in &PAULI_LETTERS {
            for &q in &PAULI_LETTERS {
                let before = PauliString::new(vec![p, q]).unwrap().matrix();
                let conjugated = &cx * before * &cx;
                let (p2, q2) = cx_conjugate_pauli_pair(p, q);
                let after = PauliString::new(vec![p2, q2]).unwrap().matrix();
                // Equal up to a sign.
                let direct = max_abs_diff(&conjugated, &after);
                let negated = max_abs_diff(&conjugated, &(-&after));
                assert!(
                    direct < 1e-12 || negated < 1e-12,
                    "{}{} -> {}{}",
                    p.to_char(),
                    q.to_char(),
                    p2.to_char(),
                    q2.to_char()
                );
            }
        }
        // The worked example: X on the control propagates to the target.
        assert_eq!(cx_conjugate_pauli_pair(Pauli::X, Pauli::I), (Pauli::X, Pauli::X));
    }

    #[test]
    fn randomized_compile_is_deterministic_and_phase_preserving() {
        let c = Circuit::new(3, vec![cx01(), GateRef::fixed("H", [2]), GateRef::fixed("CX", [1, 2])])
            .unwrap();
        let a = randomized_compile(&c, 5).unwrap();
        let b = randomized_compile(&c, 5).unwrap();
        assert_eq!(a, b);
        for seed in 0..25 {
            let twirled = randomized_compile(&c, seed).unwrap();
            let u0 = circuit_unitary(&c, None).unwrap();
            let u1 = circuit_unitary(&twirled, None).unwrap();
            let overlap = unitary_overlap(u0.matrix(), u1.matrix());
            assert!((overlap - 1.0).abs() < 1e-12, "seed {seed}: overlap {overlap}");
        }
    }

    #[test]
    fn randomized_compile_rejects_non_clifford_two_qubit_gates() {
        let c = Circuit::new(2, vec![GateRef::angle("CR", [0, 1], 0.3)]).unwrap();
        assert!(matches!(randomized_compile(&c, 0), Err(crate::Error::UnsupportedGate(_))));
    }

    #[test]
    fn fold_expansions_match_definition() {
        let f0 = fold("CX", 0, FoldVariant::Default).unwrap();
        assert_eq!(f0.ops.len(), 1);
        let f1 = fold("CX", 1, FoldVariant::Default).unwrap();
        assert_eq!(f1.ops.len(), 3);
        assert!(f1.ops.iter().all(|op| !op.inverted));
        let f2 = fold("CX", 2, FoldVariant::Inverse).unwrap();
        let flags: Vec<bool> = f2.ops.iter().map(|op| op.inverted).collect();
        assert_eq!(flags, vec![false, true, false, true, false]);
        for n in 0..6 {
            for variant in [FoldVariant::Default, FoldVariant::Inverse] {
                let c = fold("CX", n, variant).unwrap();
                let u = circuit_unitary(&c, None).unwrap();
                assert!(max_abs_diff(u.matrix(), &gates::cx()) < 1e-12, "n={n} {variant}");
            }
        }
    }

    #[test]
    fn fold_rejects_non_self_inverse_gates() {
        assert!(matches!(fold("S", 1, FoldVariant::Default), Err(crate::Error::Input(_))));
        assert!(matches!(fold("NOPE", 1, FoldVariant::Default), Err(crate::Error::UnsupportedGate(_))));
    }

    #[test]
    fn cr_decomposition_reproduces_cx() {
        let c = cx_from_cr();
        let u = circuit_unitary(&c, None).unwrap();
        let overlap = unitary_overlap(u.matrix(), &gates::cx());
        assert!(overlap >= 1.0 - 1e-12, "overlap = {overlap}");
        // |10> -> |11> up to phase.
        let rho = init_state(2, "10").unwrap();
        let out = rho.apply_unitary(&u, &[0, 1]).unwrap();
        assert!((out.data()[(3, 3)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn circuit_unitary_builds_bell_preparation() {
        let c = Circuit::new(2, vec![GateRef::fixed("H", [0]), cx01()]).unwrap();
        let u = circuit_unitary(&c, None).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let col: Vec<C64> = (0..4).map(|r| u.matrix()[(r, 0)]).collect();
        let want = [C64::new(s, 0.), C64::new(0., 0.), C64::new(0., 0.), C64::new(s, 0.)];
        for (got, want) in col.iter().zip(want.iter()) {
            assert!((got - want).norm() < 1e-14);
        }
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(2, vec![]).unwrap();
        let u = circuit_unitary(&c, None).unwrap();
        assert!(max_abs_diff(u.matrix(), &gates::identity(4)) < 1e-15);
    }

    #[test]
    fn unbound_slot_is_an_error() {
        let c = Circuit::new(1, vec![GateRef::slot("RY", [0], 2)]).unwrap();
        assert!(matches!(circuit_unitary(&c, None), Err(crate::Error::Input(_))));
        let short = ParamBinding::new([0.1]);
        assert!(matches!(circuit_unitary(&c, Some(&short)), Err(crate::Error::Input(_))));
        let ok = ParamBinding::new([0.1, 0.2, 0.3]);
        assert!(circuit_unitary(&c, Some(&ok)).is_ok());
    }

    #[test]
    fn validation_catches_malformed_ops() {
        assert!(matches!(
            Circuit::new(2, vec![GateRef::fixed("CX", [0, 0])]),
            Err(crate::Error::Validation(_))
        ));
        assert!(matches!(
            Circuit::new(1, vec![GateRef::fixed("CX", [0, 1])]),
            Err(crate::Error::Validation(_))
        ));
        assert!(Circuit::new(1, vec![GateRef::fixed("H", [0]).inverted()]).is_ok());
        assert!(matches!(
            Circuit::new(1, vec![GateRef::angle("H", [0], 0.5)]),
            Err(crate::Error::Validation(_))
        ));
        assert!(matches!(
            Circuit::new(1, vec![GateRef::fixed("RZ", [0])]),
            Err(crate::Error::Validation(_))
        ));
        assert!(matches!(
            Circuit::new(1, vec![GateRef::fixed("WAT", [0])]),
            Err(crate::Error::UnsupportedGate(_))
        ));
    }

    #[test]
    fn circuit_json_roundtrip_is_compact() {
        let c = Circuit::new(2, vec![cx01().inverted(), GateRef::slot("RY", [1], 0)]).unwrap();
        let json = serde_json::to_string(&c).unwrap();
        assert!(!json.contains("fixed_angle"));
        assert!(json.contains("inverted"));
        let back = Circuit::load_json(&json).unwrap();
        assert_eq!(c, back);
        // `inverted` defaults to false when omitted.
        let parsed = Circuit::load_json(
            r#"{"n_qubits": 1, "ops": [{"label": "H", "targets": [0]}]}"#,
        )
        .unwrap();
        assert!(!parsed.ops[0].inverted);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn passes_preserve_the_ideal_unitary(seed in 0u64..10_000) {
            let c = random_circuit(3, 18, seed);
            let reference = circuit_unitary(&c, None).unwrap();
            let hi = hidden_inverse_pass(&c, None, None).unwrap();
            let rc = randomized_compile(&c, seed ^ 0xabcd).unwrap();
            for transformed in [hi, rc] {
                let u = circuit_unitary(&transformed, None).unwrap();
                let overlap = unitary_overlap(reference.matrix(), u.matrix());
                prop_assert!((overlap - 1.0).abs() < 1e-12);
            }
        }
    }
}
