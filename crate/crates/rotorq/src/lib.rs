//! Simulation library for single-qubit gates on rotational molecular qubits.
//!
//! A qubit is encoded in the two lowest rotational levels of a linear polar
//! molecule (NaCs by default). Gates are realized by a pair of phase-locked
//! resonant microwave pulses whose complex areas are solved analytically
//! from the target unitary; the result is then verified by exact numerical
//! propagation of the rotational Schrödinger equation over the full level
//! ladder, with no rotating-wave approximation.
//!
//! Pipeline: [`gates::solve_two_pulse`] -> [`pulse::synthesize`] ->
//! [`propagator::propagate`] -> [`fidelity::average_gate_fidelity`], with
//! [`scan`] sweeping error models over grids, [`circuit`] chaining gates
//! into one pulse train, and [`observables`] providing the orientation
//! readout.

pub mod circuit;
pub mod error;
pub mod fidelity;
pub mod gates;
pub mod linalg;
pub mod observables;
pub mod propagator;
pub mod pulse;
pub mod quad;
pub mod rotor;
pub mod scan;
pub mod units;

pub use error::{Error, Result};
pub use fidelity::{average_gate_fidelity, density_matrix, phase_wrap, FidelityReport};
pub use gates::{
    complex_pulse_area, magnus_single_pulse, magnus_two_pulse, solve_two_pulse, zy_decompose,
    GateSolution, PulseTemplate, TargetGate, TwoPulseParams, ZyDecomposition,
};
pub use observables::{
    angular_distribution, extract_phase, free_orientation_trace, magic_angle, orientation,
    tensor_shift_factor, two_level_model, OrientationTrace, PhaseFit,
};
pub use propagator::{
    check_convergence, default_dt, evolve_state, leakage_of, propagate,
    propagate_with_unitary_snapshots, ConvergenceReport, Frame, PropagationResult, QuantumState,
};
pub use pulse::{apply_errors, single_pulse, spectral_field, synthesize, ErrorModel, Waveform};
pub use rotor::{hamiltonian_at, RotationalBasis, RotorSpec};
pub use scan::{line_cut, scan_2d, ScanAxis, ScanParameter, ScanResult};
