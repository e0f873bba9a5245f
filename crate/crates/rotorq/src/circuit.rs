//! Compile a gate sequence into one phase-locked pulse train and score its
//! end-to-end execution.
//!
//! Every carrier phase in the train is referenced to the single global
//! clock (t = 0 at the very first pulse center), so idle gaps between gates
//! need no phase bookkeeping and the composed interaction-frame evolution is
//! the product of the per-gate unitaries.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fidelity::{average_gate_fidelity, density_matrix, FidelityReport};
use crate::gates::{solve_two_pulse, GateSolution, PulseTemplate, TargetGate};
use crate::propagator::{propagate_with_unitary_snapshots, Frame, QuantumState};
use crate::pulse::{synthesize, ErrorModel, Waveform};
use crate::rotor::{RotationalBasis, RotorSpec};

/// An ordered gate list plus scheduling choices.
#[derive(Clone, Debug)]
pub struct CircuitSpec {
    pub gates: Vec<TargetGate>,
    /// Idle time inserted after each gate window, s. Phase locking makes the
    /// result insensitive to this value.
    pub inter_gate_gap: f64,
    /// Interaction-frame amplitudes at the start of the train; |0> when None.
    pub initial_state: Option<QuantumState>,
}

impl CircuitSpec {
    /// Gap defaulted to 2 sigma_t beyond each gate window.
    pub fn new(gates: Vec<TargetGate>, template: &PulseTemplate) -> Self {
        Self { gates, inter_gate_gap: 2.0 * template.sigma_t(), initial_state: None }
    }
}

/// The compiled pulse train.
#[derive(Clone, Debug)]
pub struct CompiledCircuit {
    pub waveform: Waveform,
    /// End time of each gate's window, ascending.
    pub boundaries: Vec<f64>,
    pub solutions: Vec<GateSolution>,
}

/// Per-boundary state of the run.
#[derive(Clone, Debug)]
pub struct BoundarySnapshot {
    pub time: f64,
    /// Computational-subspace density matrix, interaction frame.
    pub rho: Matrix2<Complex64>,
    pub leakage: f64,
    /// Propagated prefix against the ideal product of gates so far.
    pub cumulative: FidelityReport,
}

#[derive(Clone, Debug)]
pub struct CircuitRun {
    pub compiled: CompiledCircuit,
    pub snapshots: Vec<BoundarySnapshot>,
    /// Lab-frame state at the end of the train, for readout observables.
    pub final_state_lab: QuantumState,
}

/// Lay the gates out on the global clock: gate k's first pulse center sits
/// 5 sigma_t after its window start; windows are tau + 10 sigma_t long and
/// separated by the configured gap.
pub fn compile(
    circuit: &CircuitSpec,
    spec: &RotorSpec,
    template: &PulseTemplate,
) -> Result<CompiledCircuit> {
    template.validate()?;
    if circuit.inter_gate_gap < 0.0 {
        return Err(Error::CircuitOverlap { index: 0 });
    }
    let sigma = template.sigma_t();
    let gate_len = template.tau + 10.0 * sigma;
    let mut segments = Vec::with_capacity(2 * circuit.gates.len());
    let mut boundaries = Vec::with_capacity(circuit.gates.len());
    let mut solutions = Vec::with_capacity(circuit.gates.len());
    let mut start = -5.0 * sigma;
    for (index, gate) in circuit.gates.iter().enumerate() {
        if !boundaries.is_empty() && start < boundaries[index - 1] {
            return Err(Error::CircuitOverlap { index });
        }
        let solution = solve_two_pulse(gate, template)?;
        let single = synthesize(&solution.params, spec.mu01_debye())?;
        let offset = start + 5.0 * sigma; // this gate's first pulse center
        for mut seg in single.segments {
            // shift the envelope; the carrier phase stays referenced to the
            // global clock, which is the phase-locking
            seg.center_time += offset;
            segments.push(seg);
        }
        boundaries.push(start + gate_len);
        solutions.push(solution);
        start += gate_len + circuit.inter_gate_gap;
    }
    let window = if boundaries.is_empty() {
        (0.0, 0.0)
    } else {
        (-5.0 * sigma, *boundaries.last().expect("non-empty"))
    };
    Ok(CompiledCircuit { waveform: Waveform { segments, window }, boundaries, solutions })
}

/// Propagate the full train once and report per-boundary density matrices,
/// leakage, and cumulative fidelity against the ideal prefix products.
pub fn run(
    circuit: &CircuitSpec,
    spec: &RotorSpec,
    basis: &RotationalBasis,
    template: &PulseTemplate,
    dt: f64,
) -> Result<CircuitRun> {
    let compiled = compile(circuit, spec, template)?;
    let dim = basis.dimension();
    let (t0, tf) = compiled.waveform.window;

    let initial_interaction = match &circuit.initial_state {
        Some(s) => {
            let mut s = s.clone();
            s.time = t0;
            s.frame = Frame::Interaction;
            let norm = s.norm();
            if (norm - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidPulseParams(format!(
                    "initial state norm deviates from 1 by {:.3e}",
                    (norm - 1.0).abs()
                )));
            }
            s
        }
        None => QuantumState::basis_state(dim, 0, t0, Frame::Interaction),
    };

    if compiled.boundaries.is_empty() {
        return Ok(CircuitRun {
            compiled,
            snapshots: vec![],
            final_state_lab: initial_interaction.to_lab(spec)?,
        });
    }

    let (result, unitaries) = propagate_with_unitary_snapshots(
        spec,
        basis,
        &compiled.waveform,
        dt,
        t0,
        tf,
        &compiled.boundaries,
    )?;

    let mut snapshots = Vec::with_capacity(compiled.boundaries.len());
    let mut ideal: Matrix2<Complex64> = Matrix2::identity();
    for (k, u_i) in unitaries.iter().enumerate() {
        ideal = circuit.gates[k].matrix() * ideal;
        let amplitudes = u_i * &initial_interaction.amplitudes;
        let state = QuantumState::new(amplitudes, compiled.boundaries[k], Frame::Interaction);
        let (rho, leakage) = density_matrix(&state);
        let names: Vec<&str> = circuit.gates[..=k]
            .iter()
            .map(|g| g.name().unwrap_or("custom"))
            .collect();
        let cumulative = average_gate_fidelity(u_i, &ideal)?.with_context(
            Some(names.join(",")),
            compiled.solutions[k].params,
            ErrorModel::default(),
        );
        snapshots.push(BoundarySnapshot {
            time: compiled.boundaries[k],
            rho,
            leakage,
            cumulative,
        });
    }

    let lab_amplitudes = &result.unitary_lab * &initial_interaction.to_lab(spec)?.amplitudes;
    let final_state_lab = QuantumState::new(lab_amplitudes, tf, Frame::Lab);
    Ok(CircuitRun { compiled, snapshots, final_state_lab })
}
