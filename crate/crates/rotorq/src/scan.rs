//! Two-parameter robustness sweeps: fidelity landscapes over pairs of
//! error-model knobs, with line-cut extraction.
//!
//! Cells are independent; they are distributed over a thread pool and
//! reassembled by index, so a grid is bit-identical however many workers
//! run it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::average_gate_fidelity;
use crate::gates::{TargetGate, TwoPulseParams};
use crate::propagator::propagate;
use crate::pulse::{apply_errors, synthesize, ErrorModel};
use crate::rotor::{RotationalBasis, RotorSpec};

/// Which error-model knob an axis moves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    /// Fractional bandwidth shift.
    BandwidthError,
    /// Common carrier-phase offset, rad.
    CommonPhaseError,
    /// Carrier detuning, rad/s.
    Detuning,
    /// Delay offset, s.
    DelayError,
}

impl ScanParameter {
    pub fn label(&self) -> &'static str {
        match self {
            ScanParameter::BandwidthError => "bandwidth_error",
            ScanParameter::CommonPhaseError => "common_phase_error",
            ScanParameter::Detuning => "detuning",
            ScanParameter::DelayError => "delay_error",
        }
    }

    fn apply(&self, model: &mut ErrorModel, value: f64) {
        match self {
            ScanParameter::BandwidthError => model.bandwidth_error = value,
            ScanParameter::CommonPhaseError => model.common_phase_error = value,
            ScanParameter::Detuning => model.detuning = value,
            ScanParameter::DelayError => model.delay_error = value,
        }
    }
}

/// One scan axis: a knob and the ordered values it takes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanAxis {
    pub parameter: ScanParameter,
    pub values: Vec<f64>,
}

impl ScanAxis {
    pub fn new(parameter: ScanParameter, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidScanAxis("axis needs at least one value".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidScanAxis(
                "axis values must be strictly increasing".into(),
            ));
        }
        Ok(Self { parameter, values })
    }

    pub fn linspace(parameter: ScanParameter, lo: f64, hi: f64, n: usize) -> Result<Self> {
        let values = (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n.max(2) - 1) as f64)
            .collect();
        Self::new(parameter, values)
    }
}

/// Fidelity and state-averaged final leakage of one grid cell.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanCell {
    pub f_av: f64,
    pub leakage: f64,
}

/// Per-cell outcome; failures carry the error text so the scan can continue.
pub type CellOutcome = std::result::Result<ScanCell, String>;

/// A complete 2D sweep with its provenance.
#[derive(Clone, Debug)]
pub struct ScanResult {
    pub gate_name: Option<String>,
    pub axis1: ScanAxis,
    pub axis2: ScanAxis,
    /// cells[i][j] pairs axis1.values[i] with axis2.values[j].
    pub cells: Vec<Vec<CellOutcome>>,
    pub nominal: TwoPulseParams,
    pub dt: f64,
    pub j_max: u32,
}

fn evaluate_cell(
    gate: &TargetGate,
    nominal: &TwoPulseParams,
    spec: &RotorSpec,
    basis: &RotationalBasis,
    model: &ErrorModel,
    dt: f64,
) -> Result<ScanCell> {
    let params = apply_errors(nominal, model)?;
    let waveform = synthesize(&params, spec.mu01_debye())?;
    let (t0, tf) = waveform.window;
    let run = propagate(spec, basis, &waveform, dt, t0, tf)?;
    let report = average_gate_fidelity(&run.unitary_interaction, gate.matrix())?;
    Ok(ScanCell { f_av: report.f_av, leakage: report.leakage })
}

/// Sweep two distinct knobs over their grids. Every cell runs the full
/// apply-errors -> synthesize -> propagate -> score pipeline.
pub fn scan_2d(
    gate: &TargetGate,
    axis1: &ScanAxis,
    axis2: &ScanAxis,
    nominal: &TwoPulseParams,
    spec: &RotorSpec,
    dt: f64,
) -> Result<ScanResult> {
    if axis1.parameter == axis2.parameter {
        return Err(Error::DuplicateScanAxes);
    }
    nominal.validate()?;
    spec.validate()?;
    let basis = RotationalBasis::new(spec);
    let (n1, n2) = (axis1.values.len(), axis2.values.len());
    let flat: Vec<CellOutcome> = (0..n1 * n2)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / n2, k % n2);
            let mut model = ErrorModel::default();
            axis1.parameter.apply(&mut model, axis1.values[i]);
            axis2.parameter.apply(&mut model, axis2.values[j]);
            evaluate_cell(gate, nominal, spec, &basis, &model, dt).map_err(|e| e.to_string())
        })
        .collect();
    let cells = flat.chunks(n2).map(|row| row.to_vec()).collect();
    Ok(ScanResult {
        gate_name: gate.name().map(String::from),
        axis1: axis1.clone(),
        axis2: axis2.clone(),
        cells,
        nominal: *nominal,
        dt,
        j_max: spec.j_max,
    })
}

/// Extract a 1D cut along `axis_index` (0 or 1) at a fixed value on the
/// other axis; an off-grid fixed value snaps to the nearest grid point with
/// a warning. Failed cells come out as NaN.
pub fn line_cut(result: &ScanResult, axis_index: usize, fixed_value: f64) -> Result<Vec<(f64, f64)>> {
    if axis_index > 1 {
        return Err(Error::InvalidScanAxis(format!(
            "axis index must be 0 or 1, got {axis_index}"
        )));
    }
    let other = &[&result.axis1, &result.axis2][1 - axis_index];
    let (nearest, off) = other
        .values
        .iter()
        .enumerate()
        .map(|(k, v)| (k, (v - fixed_value).abs()))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .expect("axes are non-empty");
    let scale = other.values.last().unwrap().abs().max(other.values[0].abs());
    if off > 1e-9 * scale.max(1e-300) {
        log::warn!(
            "fixed value {fixed_value:.6e} not on the {} grid; using nearest {:.6e}",
            other.parameter.label(),
            other.values[nearest]
        );
    }
    let running = &[&result.axis1, &result.axis2][axis_index];
    Ok(running
        .values
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let cell = if axis_index == 0 {
                &result.cells[k][nearest]
            } else {
                &result.cells[nearest][k]
            };
            (v, cell.as_ref().map(|c| c.f_av).unwrap_or(f64::NAN))
        })
        .collect())
}

/// Axes of the bandwidth x common-phase landscape: effective bandwidths
/// from 0.02 to 0.4 of the carrier (20 points, expressed as fractional
/// errors on the nominal bandwidth) against phase offsets over a full turn
/// (41 points).
pub fn bandwidth_phase_axes(nominal: &TwoPulseParams) -> Result<(ScanAxis, ScanAxis)> {
    let lo = 0.02 * nominal.carrier / nominal.bandwidth - 1.0;
    let hi = 0.4 * nominal.carrier / nominal.bandwidth - 1.0;
    Ok((
        ScanAxis::linspace(ScanParameter::BandwidthError, lo, hi, 20)?,
        ScanAxis::linspace(
            ScanParameter::CommonPhaseError,
            -std::f64::consts::PI,
            std::f64::consts::PI,
            41,
        )?,
    ))
}

/// Axes of the detuning x delay-error landscape: detunings within +-2% of
/// the carrier (41 points) against delay errors within +-10% of the nominal
/// delay (21 points).
pub fn detuning_delay_axes(nominal: &TwoPulseParams) -> Result<(ScanAxis, ScanAxis)> {
    Ok((
        ScanAxis::linspace(
            ScanParameter::Detuning,
            -0.02 * nominal.carrier,
            0.02 * nominal.carrier,
            41,
        )?,
        ScanAxis::linspace(
            ScanParameter::DelayError,
            -0.1 * nominal.tau,
            0.1 * nominal.tau,
            21,
        )?,
    ))
}
