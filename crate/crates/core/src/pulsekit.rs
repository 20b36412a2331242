//! Pulse schedules, the negate-and-reverse inversion rule, and the
//! rotating-wave-approximation propagator for a driven two-level system.
//!
//! A schedule is a piecewise-constant drive envelope `u_0..u_N` with step
//! `dt` on a single generator axis. Under the RWA on resonance the propagator
//! is the time-ordered product `G = prod_k exp(-i eps u_k dt A / 2)` with the
//! `k = 0` block acting first, and the accumulated rotation angle is
//! `theta = eps * sum_k u_k * dt`. Inverting the schedule (negate amplitudes,
//! reverse order) realizes the inverse gate with the same hardware envelope.

use serde::{Deserialize, Serialize};

use crate::densim::{PauliString, UnitaryGate};
use crate::{gates, C64, CMatrix, Error, Result};

/// Piecewise-constant drive envelope on one generator axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    /// Step duration in seconds.
    pub dt: f64,
    /// Dimensionless drive amplitudes, one per step.
    pub amplitudes: Vec<f64>,
    /// Rotation axis; single-qubit X unless configured otherwise.
    #[serde(default = "default_axis")]
    pub axis: PauliString,
}

fn default_axis() -> PauliString {
    PauliString::parse("X").unwrap()
}

impl PulseSchedule {
    pub fn new(dt: f64, amplitudes: Vec<f64>) -> Result<Self> {
        Self::with_axis(dt, amplitudes, default_axis())
    }

    pub fn with_axis(dt: f64, amplitudes: Vec<f64>, axis: PauliString) -> Result<Self> {
        let schedule = PulseSchedule { dt, amplitudes, axis };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::input(format!("dt must be positive, got {}", self.dt)));
        }
        if self.amplitudes.is_empty() {
            return Err(Error::input("schedule needs at least one amplitude"));
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.amplitudes.len() as f64
    }

    /// Largest amplitude magnitude; used for the weak-driving check.
    pub fn peak_amplitude(&self) -> f64 {
        self.amplitudes.iter().map(|u| u.abs()).fold(0.0, f64::max)
    }

    /// Append `other` in time. Requires matching `dt` and axis.
    pub fn concat(&self, other: &PulseSchedule) -> Result<PulseSchedule> {
        if self.dt != other.dt {
            return Err(Error::input(format!(
                "cannot concatenate schedules with dt {} and {}",
                self.dt, other.dt
            )));
        }
        if self.axis != other.axis {
            return Err(Error::input(format!(
                "cannot concatenate schedules with axes {} and {}",
                self.axis, other.axis
            )));
        }
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.extend_from_slice(&other.amplitudes);
        Ok(PulseSchedule { dt: self.dt, amplitudes, axis: self.axis.clone() })
    }
}

/// Two-level-system drive parameters: coupling strength and the system /
/// drive angular frequencies. The propagator assumes the resonant RWA
/// (`omega1 = omega0`); the frequencies are carried to express the
/// weak-driving validity check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TlsDrive {
    /// External driving strength (rad/s).
    pub epsilon_strength: f64,
    /// System proper energy (rad/s).
    pub omega0: f64,
    /// Drive frequency (rad/s).
    pub omega1: f64,
}

impl TlsDrive {
    pub fn new(epsilon_strength: f64, omega0: f64, omega1: f64) -> Self {
        TlsDrive { epsilon_strength, omega0, omega1 }
    }

    /// Resonant drive whose frequencies are far above the coupling, so the
    /// weak-driving check passes by construction.
    pub fn resonant(epsilon_strength: f64) -> Self {
        let omega = epsilon_strength.abs().max(1.0) * 1e3;
        TlsDrive { epsilon_strength, omega0: omega, omega1: omega }
    }

    /// `|eps * peak_amplitude / omega0|`; the RWA derivation assumes this is
    /// small. Ratios above 0.1 are flagged as a warning, not an error.
    pub fn weak_driving_ratio(&self, schedule: &PulseSchedule) -> f64 {
        if self.omega0 == 0.0 {
            return f64::INFINITY;
        }
        (self.epsilon_strength * schedule.peak_amplitude() / self.omega0).abs()
    }

    pub fn weak_driving_ok(&self, schedule: &PulseSchedule) -> bool {
        self.weak_driving_ratio(schedule) <= 0.1
    }
}

/// Negate and order-reverse the amplitudes; `dt` and axis stay.
///
/// Running the inverted schedule after the original undoes it exactly, which
/// is how an inverse gate is realized at the pulse level.
pub fn invert_schedule(s: &PulseSchedule) -> PulseSchedule {
    let amplitudes = s.amplitudes.iter().rev().map(|u| -u).collect();
    PulseSchedule { dt: s.dt, amplitudes, axis: s.axis.clone() }
}

/// Time-ordered RWA propagator `prod_k exp(-i eps u_k dt A / 2)`, block
/// `k = 0` applied first. Each block uses the closed form
/// `cos(a/2) I - i sin(a/2) A`, exact for a Pauli-string axis.
pub fn propagate_rwa(s: &PulseSchedule, drive: &TlsDrive) -> Result<UnitaryGate> {
    s.validate()?;
    let axis = s.axis.matrix();
    let dim = axis.nrows();
    let mut total = gates::identity(dim);
    for &u in &s.amplitudes {
        let angle = drive.epsilon_strength * u * s.dt;
        let block = gates::identity(dim).scale((angle / 2.0).cos())
            - &axis * C64::new(0.0, (angle / 2.0).sin());
        total = block * total;
    }
    UnitaryGate::new("pulse", total)
}

/// Accumulated rotation angle `theta = eps * sum_k u_k * dt`.
pub fn accumulated_phase(s: &PulseSchedule, drive: &TlsDrive) -> f64 {
    drive.epsilon_strength * s.dt * s.amplitudes.iter().sum::<f64>()
}

/// Gaussian envelope `u(t) = u0 exp(-(t - T/2)^2 / (2 u_sigma^2))` sampled at
/// `N` midpoints of `[0, T]`, `dt = T/N`.
///
/// `T = 12 u_sigma` and `N >= 2000` keep the combined truncation and
/// discretization error of the accumulated angle below 1e-4.
pub fn gaussian_schedule(u0: f64, u_sigma: f64, t_total: f64, n_samples: usize) -> Result<PulseSchedule> {
    if n_samples < 2 {
        return Err(Error::input(format!("need at least 2 samples, got {n_samples}")));
    }
    if !(t_total > 0.0) {
        return Err(Error::input(format!("window length must be positive, got {t_total}")));
    }
    if !(u_sigma > 0.0) {
        return Err(Error::input(format!("width must be positive, got {u_sigma}")));
    }
    let dt = t_total / n_samples as f64;
    let center = t_total / 2.0;
    let amplitudes = (0..n_samples)
        .map(|k| {
            let t = (k as f64 + 0.5) * dt;
            let arg = (t - center) / u_sigma;
            u0 * (-0.5 * arg * arg).exp()
        })
        .collect();
    PulseSchedule::new(dt, amplitudes)
}

/// Peak amplitude that makes a Gaussian envelope a pi rotation:
/// `theta = eps * u0 * u_sigma * sqrt(2 pi) = pi`.
pub fn pi_pulse_amplitude(epsilon_strength: f64, u_sigma: f64) -> f64 {
    std::f64::consts::PI / (epsilon_strength * u_sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Global-phase-invariant overlap `|Tr(a† b)| / d`; 1 iff the unitaries are
/// equal up to phase.
pub fn unitary_overlap(a: &CMatrix, b: &CMatrix) -> f64 {
    let d = a.nrows() as f64;
    (a.adjoint() * b).trace().norm() / d
}
