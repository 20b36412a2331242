//! Standard gate matrices and the label vocabulary used by circuits.
//!
//! Rotation gates follow the generator convention `exp(-i * angle * P / 2)`
//! where `P` is a Pauli string, so e.g. `RZ(pi)` equals `-iZ`. Two-qubit
//! matrices place the first gate qubit in the most significant bit position.

use crate::densim::PauliString;
use crate::{C64, CMatrix, Error, Result};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn hadamard() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)])
}

pub fn s_gate() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)])
}

pub fn s_dag() -> CMatrix {
    s_gate().adjoint()
}

/// CX with the first qubit as control: flips the target bit when the control
/// bit (most significant) is 1.
pub fn cx() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = c(1., 0.);
    m[(1, 1)] = c(1., 0.);
    m[(2, 3)] = c(1., 0.);
    m[(3, 2)] = c(1., 0.);
    m
}

pub fn cz() -> CMatrix {
    let mut m = identity(4);
    m[(3, 3)] = c(-1., 0.);
    m
}

/// `exp(-i * angle * P / 2)` for a Pauli-string generator. Uses the closed
/// form `cos(angle/2) I - i sin(angle/2) P`, exact because `P^2 = I`.
pub fn pauli_rotation(generator: &PauliString, angle: f64) -> CMatrix {
    let half = angle / 2.0;
    let p = generator.matrix();
    let dim = p.nrows();
    identity(dim).scale(half.cos()) - p * c(0., half.sin())
}

pub fn rx(angle: f64) -> CMatrix {
    pauli_rotation(&PauliString::parse("X").unwrap(), angle)
}

pub fn ry(angle: f64) -> CMatrix {
    pauli_rotation(&PauliString::parse("Y").unwrap(), angle)
}

pub fn rz(angle: f64) -> CMatrix {
    pauli_rotation(&PauliString::parse("Z").unwrap(), angle)
}

/// Cross-resonance rotation `exp(-i * angle * (Z ⊗ X) / 2)`, written
/// `[ZX]_angle`. `cr(pi/2)` composes with single-qubit corrections to CX.
pub fn cr(angle: f64) -> CMatrix {
    pauli_rotation(&PauliString::parse("ZX").unwrap(), angle)
}

/// How a circuit label resolves to a matrix.
#[derive(Clone, Debug)]
pub enum GateKind {
    /// Fixed matrix; `self_inverse` marks gates equal to their own adjoint.
    Fixed { matrix: CMatrix, self_inverse: bool },
    /// One-parameter rotation `exp(-i * angle * generator / 2)`.
    Rotation { generator: PauliString },
}

#[derive(Clone, Debug)]
pub struct GateDef {
    pub arity: usize,
    pub kind: GateKind,
}

impl GateDef {
    pub fn is_rotation(&self) -> bool {
        matches!(self.kind, GateKind::Rotation { .. })
    }

    pub fn is_self_inverse(&self) -> bool {
        matches!(self.kind, GateKind::Fixed { self_inverse: true, .. })
    }
}

/// Every label `lookup` resolves.
pub const KNOWN_LABELS: [&str; 13] =
    ["I", "X", "Y", "Z", "H", "S", "SDG", "CX", "CZ", "RX", "RY", "RZ", "CR"];

/// Resolve a gate label. Returns `None` for unknown labels.
pub fn lookup(label: &str) -> Option<GateDef> {
    let fixed = |matrix: CMatrix, self_inverse: bool| {
        let arity = matrix.nrows().trailing_zeros() as usize;
        Some(GateDef { arity, kind: GateKind::Fixed { matrix, self_inverse } })
    };
    let rotation = |letters: &str| {
        Some(GateDef {
            arity: letters.len(),
            kind: GateKind::Rotation { generator: PauliString::parse(letters).unwrap() },
        })
    };
    match label {
        "I" => fixed(identity(2), true),
        "X" => fixed(pauli_x(), true),
        "Y" => fixed(pauli_y(), true),
        "Z" => fixed(pauli_z(), true),
        "H" => fixed(hadamard(), true),
        "S" => fixed(s_gate(), false),
        "SDG" => fixed(s_dag(), false),
        "CX" => fixed(cx(), true),
        "CZ" => fixed(cz(), true),
        "RX" => rotation("X"),
        "RY" => rotation("Y"),
        "RZ" => rotation("Z"),
        "CR" => rotation("ZX"),
        _ => None,
    }
}

/// Matrix for a label, with `angle` required exactly when the label is a
/// rotation. `inverted` requests the adjoint (for rotations, the negated
/// angle, which is the same thing).
pub fn gate_matrix(label: &str, angle: Option<f64>, inverted: bool) -> Result<CMatrix> {
    let def = lookup(label).ok_or_else(|| Error::UnsupportedGate(label.to_string()))?;
    let m = match (&def.kind, angle) {
        (GateKind::Fixed { matrix, .. }, None) => matrix.clone(),
        (GateKind::Fixed { .. }, Some(_)) => {
            return Err(Error::input(format!("gate {label} takes no angle")));
        }
        (GateKind::Rotation { generator }, Some(a)) => pauli_rotation(generator, a),
        (GateKind::Rotation { .. }, None) => {
            return Err(Error::input(format!("gate {label} requires an angle")));
        }
    };
    Ok(if inverted { m.adjoint() } else { m })
}
