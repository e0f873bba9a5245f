//! Orientation readout and angular-distribution observables.
//!
//! The orientation signal <cos theta>(t) of a two-level rotational
//! superposition oscillates as A cos(omega_01 t - phi_01) with
//! A = (2 sqrt(3)/3) |c0||c1|; its amplitude reads out the qubit coherence
//! and its temporal shift the qubit phase. Computed in the lab frame, where
//! the free-evolution phases are part of the signal.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fidelity::phase_wrap;
use crate::propagator::{Frame, QuantumState};
use crate::rotor::RotorSpec;

/// Geometric coupling <J,0|cos theta|J+1,0> = (J+1)/sqrt((2J+1)(2J+3)).
fn cos_theta_coupling(j: usize) -> f64 {
    let jf = j as f64;
    (jf + 1.0) / ((2.0 * jf + 1.0) * (2.0 * jf + 3.0)).sqrt()
}

/// Expectation value <cos theta> of a lab-frame state:
/// sum_J 2 Re[c_J^* c_{J+1}] g_J.
pub fn orientation(state: &QuantumState) -> f64 {
    debug_assert_eq!(state.frame, Frame::Lab, "orientation is a lab-frame observable");
    let n = state.amplitudes.len();
    (0..n - 1)
        .map(|j| {
            2.0 * (state.amplitudes[j].conj() * state.amplitudes[j + 1]).re
                * cos_theta_coupling(j)
        })
        .sum()
}

/// Closed-form amplitude and relative phase of the two-level orientation
/// signal: A = (2 sqrt(3)/3)|c0||c1|, phi_01 = arg c1 - arg c0.
pub fn two_level_model(c0: Complex64, c1: Complex64) -> (f64, f64) {
    let a = 2.0 / 3f64.sqrt() * c0.norm() * c1.norm();
    let phi = if a < 1e-300 { 0.0 } else { phase_wrap(c1.arg() - c0.arg()) };
    (a, phi)
}

/// Sampled orientation signal with the transition frequency it oscillates at.
#[derive(Clone, Debug)]
pub struct OrientationTrace {
    /// (t, <cos theta>) samples, seconds.
    pub samples: Vec<(f64, f64)>,
    pub omega01: f64,
}

/// Orientation under field-free evolution from a lab-frame state, sampled
/// uniformly. `samples_per_revival` defaults to 64 when zero is passed.
pub fn free_orientation_trace(
    spec: &RotorSpec,
    state: &QuantumState,
    duration: f64,
    samples_per_revival: usize,
) -> Result<OrientationTrace> {
    let lab = state.to_lab(spec)?;
    let spr = if samples_per_revival == 0 { 64 } else { samples_per_revival };
    let dt = spec.revival_time() / spr as f64;
    let n = (duration / dt).ceil() as usize + 1;
    let dim = lab.amplitudes.len();
    let energies: Vec<f64> = (0..dim)
        .map(|j| spec.rotational_energy(j as u32))
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity(n);
    let mut rotated = lab.amplitudes.clone();
    for k in 0..n {
        let t = lab.time + k as f64 * dt;
        for (j, amp) in rotated.iter_mut().enumerate() {
            *amp = lab.amplitudes[j]
                * Complex64::from_polar(1.0, -energies[j] * (t - lab.time));
        }
        let s = QuantumState::new(rotated.clone(), t, Frame::Lab);
        samples.push((t, orientation(&s)));
    }
    Ok(OrientationTrace { samples, omega01: spec.omega01() })
}

/// Cosine fit of an orientation trace with the frequency held fixed.
#[derive(Clone, Copy, Debug)]
pub struct PhaseFit {
    pub amplitude: f64,
    /// Wrapped to (-pi, pi]; meaningless when `phase_defined` is false.
    pub phase: f64,
    pub residual_rms: f64,
    /// False when the fitted amplitude is below 1e-6.
    pub phase_defined: bool,
}

/// Least-squares fit of A cos(omega_01 t - phi) with omega_01 fixed from the
/// trace. Requires at least two oscillation periods of span.
pub fn extract_phase(trace: &OrientationTrace) -> Result<PhaseFit> {
    let n = trace.samples.len();
    if n < 4 {
        return Err(Error::TraceTooShort { periods: 0.0 });
    }
    let span = trace.samples[n - 1].0 - trace.samples[0].0;
    let periods = span * trace.omega01 / (2.0 * PI);
    if periods < 2.0 {
        return Err(Error::TraceTooShort { periods });
    }
    let (mut scc, mut scs, mut sss, mut scv, mut ssv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, v) in &trace.samples {
        let (s, c) = (trace.omega01 * t).sin_cos();
        scc += c * c;
        scs += c * s;
        sss += s * s;
        scv += c * v;
        ssv += s * v;
    }
    let det = scc * sss - scs * scs;
    let a = (sss * scv - scs * ssv) / det;
    let b = (scc * ssv - scs * scv) / det;
    let amplitude = a.hypot(b);
    let phase = b.atan2(a);
    let mut ss_res = 0.0;
    for &(t, v) in &trace.samples {
        let (s, c) = (trace.omega01 * t).sin_cos();
        let r = v - a * c - b * s;
        ss_res += r * r;
    }
    let phase_defined = amplitude >= 1e-6;
    if !phase_defined {
        log::warn!("orientation amplitude {amplitude:.3e} too small; phase undefined");
    }
    Ok(PhaseFit {
        amplitude,
        phase: if phase_defined { phase_wrap(phase) } else { 0.0 },
        residual_rms: (ss_res / n as f64).sqrt(),
        phase_defined,
    })
}

/// Legendre polynomial P_n(x) by the three-term recurrence.
pub fn legendre_p(n: u32, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut pm, mut p) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * x * p - kf * pm) / (kf + 1.0);
                pm = p;
                p = next;
            }
            p
        }
    }
}

/// Normalized m = 0 spherical harmonic Y_J0(theta).
pub fn spherical_harmonic_m0(j: u32, theta: f64) -> f64 {
    ((2.0 * j as f64 + 1.0) / (4.0 * PI)).sqrt() * legendre_p(j, theta.cos())
}

/// Angular probability density |sum_J c_J Y_J0(theta)|^2 over the grid.
/// Integrates over solid angle to the state norm.
pub fn angular_distribution(state: &QuantumState, theta_grid: &[f64]) -> Vec<f64> {
    debug_assert_eq!(state.frame, Frame::Lab, "distribution is a lab-frame observable");
    theta_grid
        .iter()
        .map(|&theta| {
            let mut amp = Complex64::new(0.0, 0.0);
            for (j, c) in state.amplitudes.iter().enumerate() {
                amp += c * spherical_harmonic_m0(j as u32, theta);
            }
            amp.norm_sqr()
        })
        .collect()
}

/// Tensor light-shift scaling P_2(cos theta') = (3 cos^2 theta' - 1)/2.
pub fn tensor_shift_factor(theta_prime: f64) -> f64 {
    let c = theta_prime.cos();
    0.5 * (3.0 * c * c - 1.0)
}

/// Polarization angle nulling the tensor shift: arccos(1/sqrt(3)).
pub fn magic_angle() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use nalgebra::DVector;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn qubit_state(c0: Complex64, c1: Complex64) -> QuantumState {
        QuantumState::from_qubit(c0, c1, 11)
    }

    #[test]
    fn orientation_reference_points() {
        let ground = QuantumState::ground(11);
        assert_eq!(orientation(&ground), 0.0);

        let plus = qubit_state(FRAC_1_SQRT_2.into(), FRAC_1_SQRT_2.into());
        let want = 1.0 / 3f64.sqrt();
        assert!((orientation(&plus) - want).abs() < 1e-12);

        let quarter = qubit_state(FRAC_1_SQRT_2.into(), Complex64::new(0.0, FRAC_1_SQRT_2));
        assert!(orientation(&quarter).abs() < 1e-12);
    }

    #[test]
    fn two_level_model_reference_points() {
        let (a, _) = two_level_model(FRAC_1_SQRT_2.into(), FRAC_1_SQRT_2.into());
        assert!((a - 3f64.sqrt() / 3.0).abs() < 1e-12);
        let (a, _) = two_level_model(1.0.into(), 0.0.into());
        assert_eq!(a, 0.0);
        let (_, phi) = two_level_model(
            FRAC_1_SQRT_2.into(),
            Complex64::from_polar(FRAC_1_SQRT_2, PI / 4.0),
        );
        assert!((phi - PI / 4.0).abs() < 1e-12);
    }

    #[test]
    fn free_trace_matches_two_level_closed_form() {
        let spec = RotorSpec::nacs();
        let c0 = Complex64::from_polar(0.6, 0.3);
        let c1 = Complex64::from_polar(0.8, -1.1);
        let state = qubit_state(c0, c1);
        let (a, phi) = two_level_model(state.amplitudes[0], state.amplitudes[1]);
        let trace =
            free_orientation_trace(&spec, &state, 3.0 * spec.revival_time(), 64).unwrap();
        for &(t, v) in &trace.samples {
            let want = a * (spec.omega01() * t - phi).cos();
            assert!((v - want).abs() < 1e-9, "at t = {t}: {v} vs {want}");
        }
    }

    #[test]
    fn phase_fit_recovers_synthetic_cosine() {
        let spec = RotorSpec::nacs();
        let w = spec.omega01();
        let samples: Vec<(f64, f64)> = (0..256)
            .map(|k| {
                let t = k as f64 * spec.revival_time() / 64.0;
                (t, 0.3 * (w * t - 1.1).cos())
            })
            .collect();
        let fit = extract_phase(&OrientationTrace { samples, omega01: w }).unwrap();
        assert!((fit.amplitude - 0.3).abs() < 1e-10);
        assert!((fit.phase - 1.1).abs() < 1e-10);
        assert!(fit.residual_rms < 1e-12);
        assert!(fit.phase_defined);
    }

    #[test]
    fn phase_fit_guards() {
        let spec = RotorSpec::nacs();
        let w = spec.omega01();
        // too short a span
        let short: Vec<(f64, f64)> = (0..20)
            .map(|k| {
                let t = k as f64 * spec.revival_time() / 64.0;
                (t, (w * t).cos())
            })
            .collect();
        assert!(matches!(
            extract_phase(&OrientationTrace { samples: short, omega01: w }),
            Err(Error::TraceTooShort { .. })
        ));
        // vanishing amplitude flags the phase as undefined
        let flat: Vec<(f64, f64)> = (0..256)
            .map(|k| (k as f64 * spec.revival_time() / 64.0, 0.0))
            .collect();
        let fit = extract_phase(&OrientationTrace { samples: flat, omega01: w }).unwrap();
        assert!(!fit.phase_defined);
    }

    #[test]
    fn trace_period_is_the_revival_time() {
        let spec = RotorSpec::nacs();
        let state = qubit_state(FRAC_1_SQRT_2.into(), FRAC_1_SQRT_2.into());
        let trace =
            free_orientation_trace(&spec, &state, 4.0 * spec.revival_time(), 128).unwrap();
        // successive upward zero crossings, linearly interpolated
        let mut crossings = Vec::new();
        for w in trace.samples.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            if v0 < 0.0 && v1 >= 0.0 {
                crossings.push(t0 - v0 * (t1 - t0) / (v1 - v0));
            }
        }
        assert!(crossings.len() >= 3);
        let period = (crossings[crossings.len() - 1] - crossings[0])
            / (crossings.len() - 1) as f64;
        let rel = (period - spec.revival_time()).abs() / spec.revival_time();
        assert!(rel < 1e-3, "period off by {rel}");
    }

    #[test]
    fn distribution_reference_points() {
        let ground = QuantumState::ground(11);
        let grid: Vec<f64> = (0..=90).map(|k| k as f64 * PI / 90.0).collect();
        let dens = angular_distribution(&ground, &grid);
        for &d in &dens {
            assert!((d - 1.0 / (4.0 * PI)).abs() < 1e-14);
        }

        // aligned-phase superposition: asymmetric toward theta < pi/2
        let plus = qubit_state(FRAC_1_SQRT_2.into(), FRAC_1_SQRT_2.into());
        let dens = angular_distribution(&plus, &grid);
        assert!(dens[0] > dens[90]);
        assert!(orientation(&plus) > 0.0);
        let minus = qubit_state(FRAC_1_SQRT_2.into(), (-FRAC_1_SQRT_2).into());
        let dens = angular_distribution(&minus, &grid);
        assert!(dens[0] < dens[90]);
        assert!(orientation(&minus) < 0.0);
    }

    #[test]
    fn distribution_moments_by_quadrature() {
        // both the normalization and the first moment, via x = cos theta
        let mut amps = DVector::from_element(11, Complex64::new(0.0, 0.0));
        amps[0] = Complex64::new(0.5, 0.1);
        amps[1] = Complex64::new(-0.3, 0.4);
        amps[2] = Complex64::new(0.2, 0.0);
        amps[3] = Complex64::new(0.0, -0.45);
        let n = amps.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let state = QuantumState::new(amps / Complex64::new(n, 0.0), 0.0, Frame::Lab);

        let density_x = |x: f64| {
            let theta = x.clamp(-1.0, 1.0).acos();
            angular_distribution(&state, &[theta])[0]
        };
        let norm = 2.0 * PI * quad::integrate(density_x, -1.0, 1.0, 4);
        assert!((norm - 1.0).abs() < 1e-6, "norm = {norm}");
        let moment = 2.0 * PI * quad::integrate(|x| x * density_x(x), -1.0, 1.0, 4);
        assert!(
            (moment - orientation(&state)).abs() < 1e-8,
            "moment {moment} vs orientation {}",
            orientation(&state)
        );
    }

    #[test]
    fn distribution_invariant_under_global_phase() {
        let state = qubit_state(FRAC_1_SQRT_2.into(), Complex64::new(0.3, 0.64031242374328485));
        let rotated = QuantumState::new(
            state.amplitudes.map(|c| c * Complex64::from_polar(1.0, 2.13)),
            0.0,
            Frame::Lab,
        );
        let grid: Vec<f64> = (0..=50).map(|k| k as f64 * PI / 50.0).collect();
        let a = angular_distribution(&state, &grid);
        let b = angular_distribution(&rotated, &grid);
        for k in 0..a.len() {
            assert!((a[k] - b[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn magic_angle_kills_tensor_shift() {
        assert!((tensor_shift_factor(0.0) - 1.0).abs() < 1e-15);
        assert!((tensor_shift_factor(PI / 2.0) + 0.5).abs() < 1e-15);
        assert!(tensor_shift_factor(magic_angle()).abs() < 1e-12);
        let deg = magic_angle() * 180.0 / PI;
        assert!((deg - 54.7356).abs() < 1e-4, "magic angle {deg} deg");

        // independent bisection on 3 cos^2 - 1
        let f = |x: f64| 3.0 * x.cos() * x.cos() - 1.0;
        let (mut lo, mut hi) = (0.0f64, PI / 2.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((0.5 * (lo + hi) - magic_angle()).abs() < 1e-12);
    }

    #[test]
    fn two_level_orientation_never_exceeds_bound() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(17);
        let bound = 1.0 / 3f64.sqrt() + 1e-9;
        for _ in 0..200 {
            let c0 = Complex64::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(-PI..PI));
            let mag1 = (1.0 - c0.norm_sqr()).sqrt();
            let c1 = Complex64::from_polar(mag1, rng.gen_range(-PI..PI));
            let state = qubit_state(c0, c1);
            assert!(orientation(&state).abs() <= bound);
        }
    }
}
