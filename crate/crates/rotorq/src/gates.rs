//! Gate targets, Z-Y Euler decomposition, and the inverse problem: mapping a
//! 2x2 unitary onto the parameter set of a phase-locked two-pulse sequence.
//!
//! The forward model is the first-order Magnus form of a resonant pulse with
//! complex area theta e^{i phi}:
//!
//! ```text
//!   U(theta, phi) = [ cos(theta)              i sin(theta) e^{-i phi} ]
//!                   [ i sin(theta) e^{i phi}  cos(theta)              ]
//! ```
//!
//! Two such pulses, the first fixed at theta_1 = pi/2 as a reference,
//! realize any single-qubit unitary up to a global phase. The solver's
//! conventions are chosen so the canonical Z/H/S/T parameter rows come out
//! in their familiar form; see [`solve_two_pulse`] for the tie-breaks.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::fidelity::phase_wrap;
use crate::linalg::unitarity_defect2;
use crate::pulse::Waveform;
use crate::quad;
use crate::rotor::RotorSpec;
use crate::units::UnitSystem;

/// Unitarity tolerance for accepting a target gate.
pub const UNITARITY_TOL: f64 = 1e-12;

const C1: Complex64 = Complex64::new(1.0, 0.0);
const CI: Complex64 = Complex64::new(0.0, 1.0);

/// A validated 2x2 unitary target with an optional name.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetGate {
    matrix: Matrix2<Complex64>,
    name: Option<String>,
}

impl TargetGate {
    /// Validate unitarity (max |U^dag U - I| < 1e-12) and wrap the matrix.
    pub fn from_matrix(matrix: Matrix2<Complex64>, name: Option<String>) -> Result<Self> {
        let defect = unitarity_defect2(&matrix);
        if defect >= UNITARITY_TOL {
            return Err(Error::NonUnitary { defect, tol: UNITARITY_TOL });
        }
        Ok(Self { matrix, name })
    }

    /// Built-in gates: I, X, Y, Z, H, S, T (case-insensitive).
    pub fn by_name(name: &str) -> Option<Self> {
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        let m = match name.to_ascii_uppercase().as_str() {
            "I" => Matrix2::new(C1, 0.0.into(), 0.0.into(), C1),
            "X" => Matrix2::new(0.0.into(), C1, C1, 0.0.into()),
            "Y" => Matrix2::new(0.0.into(), -CI, CI, 0.0.into()),
            "Z" => Matrix2::new(C1, 0.0.into(), 0.0.into(), -C1),
            "H" => Matrix2::new(s2.into(), s2.into(), s2.into(), (-s2).into()),
            "S" => Matrix2::new(C1, 0.0.into(), 0.0.into(), CI),
            "T" => Matrix2::new(
                C1,
                0.0.into(),
                0.0.into(),
                Complex64::from_polar(1.0, PI / 4.0),
            ),
            _ => return None,
        };
        Some(Self { matrix: m, name: Some(name.to_ascii_uppercase()) })
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.matrix
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }
}

/// Rotation about z: diag(e^{-i b/2}, e^{i b/2}).
pub fn rz(beta: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        Complex64::from_polar(1.0, -beta / 2.0),
        0.0.into(),
        0.0.into(),
        Complex64::from_polar(1.0, beta / 2.0),
    )
}

/// Rotation about y.
pub fn ry(gamma: f64) -> Matrix2<Complex64> {
    let (s, c) = (gamma / 2.0).sin_cos();
    Matrix2::new(c.into(), (-s).into(), s.into(), c.into())
}

/// Euler angles of U = e^{i alpha} Rz(beta) Ry(gamma) Rz(delta), gamma in [0, pi].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZyDecomposition {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl ZyDecomposition {
    /// Rebuild e^{i alpha} Rz(beta) Ry(gamma) Rz(delta).
    pub fn reconstruct(&self) -> Matrix2<Complex64> {
        (rz(self.beta) * ry(self.gamma) * rz(self.delta))
            .map(|x| x * Complex64::from_polar(1.0, self.alpha))
    }
}

// Entries below this modulus are treated as structural zeros of the gate.
const ZERO_ENTRY_TOL: f64 = 1e-11;

/// Wrap to [-pi, pi): like `phase_wrap` but with +pi mapped to -pi. Used for
/// the relative phase of diagonal gates, where this branch choice fixes the
/// global-phase convention of the canonical parameter table.
fn wrap_lower(phi: f64) -> f64 {
    let w = phase_wrap(phi);
    if w == PI {
        -PI
    } else {
        w
    }
}

/// Z-Y decomposition of a single-qubit unitary.
///
/// Branch conventions, chosen once so every downstream table is deterministic:
/// - gamma in [0, pi]; for gamma = 0 or pi the split is delta = 0;
/// - diagonal gates take beta equal to their relative phase wrapped to
///   [-pi, pi), with alpha following from the (0,0) entry;
/// - otherwise alpha is half the principal argument of det U.
pub fn zy_decompose(gate: &TargetGate) -> ZyDecomposition {
    let m = gate.matrix();
    if m[(1, 0)].norm() <= ZERO_ENTRY_TOL {
        // diagonal: U = e^{i alpha} Rz(beta)
        let lambda = wrap_lower(m[(1, 1)].arg() - m[(0, 0)].arg());
        let alpha = phase_wrap(m[(0, 0)].arg() + lambda / 2.0);
        return ZyDecomposition { alpha, beta: lambda, gamma: 0.0, delta: 0.0 };
    }
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let alpha = 0.5 * det.arg();
    let phase = Complex64::from_polar(1.0, -alpha);
    let v00 = phase * m[(0, 0)];
    let v10 = phase * m[(1, 0)];
    if v00.norm() <= ZERO_ENTRY_TOL {
        // anti-diagonal: full transfer, gamma = pi
        return ZyDecomposition { alpha, beta: 2.0 * v10.arg(), gamma: PI, delta: 0.0 };
    }
    let gamma = 2.0 * v10.norm().atan2(v00.norm());
    let beta = v10.arg() - v00.arg();
    let delta = -v10.arg() - v00.arg();
    ZyDecomposition { alpha, beta, gamma, delta }
}

/// Timing and spectral context shared by every synthesized gate: bandwidth
/// Delta-omega (rad/s), inter-pulse delay tau (s), carrier omega_0 (rad/s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseTemplate {
    pub bandwidth: f64,
    pub tau: f64,
    pub carrier: f64,
}

impl PulseTemplate {
    /// Defaults for a molecule: Delta-omega = 0.1 omega_01, tau = 11.2 tau_0,
    /// carrier on resonance.
    pub fn for_molecule(spec: &RotorSpec) -> Self {
        Self::with_delay_revivals(spec, 11.2)
    }

    /// Same, but with the delay expressed in revival times.
    pub fn with_delay_revivals(spec: &RotorSpec, revivals: f64) -> Self {
        Self {
            bandwidth: 0.1 * spec.omega01(),
            tau: revivals * spec.revival_time(),
            carrier: spec.omega01(),
        }
    }

    pub fn sigma_t(&self) -> f64 {
        1.0 / self.bandwidth
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth > 0.0 && self.tau > 0.0 && self.carrier > 0.0) {
            return Err(Error::InvalidPulseParams(format!(
                "bandwidth, tau, carrier must all be positive (got {}, {}, {})",
                self.bandwidth, self.tau, self.carrier
            )));
        }
        Ok(())
    }
}

/// The gate-defining parameter set of the two-pulse sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPulseParams {
    /// Reference pulse area, pi/2 by convention.
    pub theta1: f64,
    pub phi1: f64,
    /// Second pulse area, in [-pi/2, pi/2]. Negative values are realized
    /// physically by a pi carrier-phase offset at synthesis time.
    pub theta2: f64,
    pub phi2: f64,
    /// Inter-pulse delay, s.
    pub tau: f64,
    /// Spectral bandwidth Delta-omega, rad/s; sigma_t = 1/Delta-omega.
    pub bandwidth: f64,
    /// Carrier frequency omega_0, rad/s.
    pub carrier: f64,
}

impl TwoPulseParams {
    pub fn from_angles(phi1: f64, theta2: f64, phi2: f64, template: &PulseTemplate) -> Self {
        Self {
            theta1: FRAC_PI_2,
            phi1: phase_wrap(phi1),
            theta2,
            phi2: phase_wrap(phi2),
            tau: template.tau,
            bandwidth: template.bandwidth,
            carrier: template.carrier,
        }
    }

    pub fn sigma_t(&self) -> f64 {
        1.0 / self.bandwidth
    }

    /// True when the pulses are too close to be treated as separate (tau < 6 sigma_t).
    pub fn pulses_overlap(&self) -> bool {
        self.tau < 6.0 * self.sigma_t()
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta1 != FRAC_PI_2 {
            return Err(Error::InvalidPulseParams(format!(
                "theta1 must be pi/2 exactly (reference-pulse convention), got {}",
                self.theta1
            )));
        }
        if self.theta2.abs() > FRAC_PI_2 + 1e-12 {
            return Err(Error::InvalidPulseParams(format!(
                "theta2 must lie in [-pi/2, pi/2], got {}",
                self.theta2
            )));
        }
        if !(self.bandwidth > 0.0 && self.tau > 0.0 && self.carrier > 0.0) {
            return Err(Error::InvalidPulseParams(format!(
                "bandwidth, tau, carrier must all be positive (got {}, {}, {})",
                self.bandwidth, self.tau, self.carrier
            )));
        }
        Ok(())
    }
}

/// Result of the inverse problem: pulse parameters plus the unobservable
/// global phase alpha with e^{-i alpha} U_gate = U_two_pulse.
#[derive(Clone, Debug, PartialEq)]
pub struct GateSolution {
    pub alpha: f64,
    pub params: TwoPulseParams,
}

/// Solve for the two-pulse parameters realizing `gate` up to a global phase.
///
/// Tie-breaks for the degenerate families:
/// - diagonal gates (sin(theta2 + pi/2) = 0): phi2 = 0 and the whole
///   relative phase goes into phi1;
/// - the identity family: theta2 = -pi/2 with phi1 = phi2 = 0 (the second
///   pulse exactly undoes the first);
/// - full-transfer gates (cos(theta2 + pi/2) = 0): the second pulse has zero
///   area and phi2 = 0.
pub fn solve_two_pulse(gate: &TargetGate, template: &PulseTemplate) -> Result<GateSolution> {
    template.validate()?;
    let zy = zy_decompose(gate);
    const ANGLE_TOL: f64 = 1e-10;
    let (theta2, phi1, phi2) = if zy.gamma <= ANGLE_TOL {
        if zy.beta.abs() <= ANGLE_TOL {
            (-FRAC_PI_2, 0.0, 0.0)
        } else {
            (FRAC_PI_2, phase_wrap(-(zy.beta / 2.0 + PI)), 0.0)
        }
    } else if (zy.gamma - PI).abs() <= ANGLE_TOL {
        (0.0, phase_wrap(zy.beta / 2.0 - FRAC_PI_2), 0.0)
    } else {
        let theta2 = (PI - zy.gamma) / 2.0;
        let phi1 = phase_wrap((zy.beta - zy.delta) / 2.0 - FRAC_PI_2);
        let phi2 = phase_wrap(phi1 + (zy.beta + zy.delta) / 2.0 + PI);
        (theta2, phi1, phi2)
    };
    Ok(GateSolution {
        alpha: zy.alpha,
        params: TwoPulseParams::from_angles(phi1, theta2, phi2, template),
    })
}

/// First-order Magnus unitary of a single resonant pulse with complex area
/// theta e^{i phi}.
pub fn magnus_single_pulse(theta: f64, phi: f64) -> Matrix2<Complex64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(
        c.into(),
        CI * s * Complex64::from_polar(1.0, -phi),
        CI * s * Complex64::from_polar(1.0, phi),
        c.into(),
    )
}

/// Composite unitary of the two-pulse sequence (second pulse applied after
/// the first): U(theta2, phi2) U(theta1, phi1).
pub fn magnus_two_pulse(params: &TwoPulseParams) -> Matrix2<Complex64> {
    magnus_single_pulse(params.theta2, params.phi2)
        * magnus_single_pulse(params.theta1, params.phi1)
}

/// Complex pulse area recovered from a sampled waveform by quadrature.
#[derive(Clone, Copy, Debug)]
pub struct PulseArea {
    /// Modulus |Theta|, rad.
    pub theta: f64,
    /// Argument arg Theta, rad; 0 by convention when theta is negligible.
    pub phi: f64,
    /// Fraction of the analytic envelope area contained in the window.
    pub envelope_captured: f64,
}

impl PulseArea {
    /// True when the integration window clips off part of the pulse support.
    pub fn is_truncated(&self) -> bool {
        self.envelope_captured < 0.9999
    }
}

/// Theta = mu_01 int_window E(t) e^{i omega t} dt, evaluated with composite
/// Gauss-Legendre panels a fraction of a carrier period wide.
///
/// `carrier` is the kernel frequency omega_01 and `mu01` the transition
/// dipole in Debye.
pub fn complex_pulse_area(
    waveform: &Waveform,
    window: (f64, f64),
    carrier: f64,
    mu01_debye: f64,
) -> PulseArea {
    let (a, b) = window;
    let mu01 = UnitSystem::default().debye_to_coupling(mu01_debye);
    let total_envelope = waveform.analytic_envelope_area();
    if b <= a || total_envelope == 0.0 {
        return PulseArea { theta: 0.0, phi: 0.0, envelope_captured: 1.0 };
    }
    // Panels no wider than a quarter carrier period or half the narrowest
    // envelope, whichever is finer.
    let period = 2.0 * PI / carrier;
    let min_sigma = waveform
        .segments
        .iter()
        .map(|s| s.sigma_t)
        .fold(f64::INFINITY, f64::min);
    let panel = (period / 4.0).min(min_sigma / 2.0);
    let panels = ((b - a) / panel).ceil() as usize;
    let theta_c = mu01
        * quad::integrate_complex(
            |t| Complex64::from_polar(1.0, carrier * t) * waveform.eval(t),
            a,
            b,
            panels,
        );
    let captured = quad::integrate(|t| waveform.envelope(t), a, b, panels) / total_envelope;
    if captured < 0.9999 {
        log::warn!(
            "pulse-area window captures only {:.6} of the envelope; area is truncated",
            captured
        );
    }
    let theta = theta_c.norm();
    let phi = if theta < 1e-12 { 0.0 } else { theta_c.arg() };
    PulseArea { theta, phi, envelope_captured: captured }
}
