//! Gate-quality scoring: average gate fidelity over the computational
//! subspace, density-matrix utilities, phase wrapping.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gates::TwoPulseParams;
use crate::linalg::{qubit_block, unitarity_defect, unitarity_defect2};
use crate::propagator::QuantumState;
use crate::pulse::ErrorModel;

/// Wrap an angle into (-pi, pi].
pub fn phase_wrap(phi: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut x = phi % two_pi;
    if x <= -PI {
        x += two_pi;
    } else if x > PI {
        x -= two_pi;
    }
    x
}

/// Average-gate-fidelity report for one implemented unitary.
#[derive(Clone, Debug)]
pub struct FidelityReport {
    /// F_av in [0, 1].
    pub f_av: f64,
    /// Overlap matrix M = U_target^dag (top-left 2x2 of U_impl).
    pub m_rel: Matrix2<Complex64>,
    /// State-averaged final leakage out of the computational subspace,
    /// 1 - Tr(M M^dag)/2.
    pub leakage: f64,
    pub gate_name: Option<String>,
    pub params_used: Option<TwoPulseParams>,
    pub error_model: Option<ErrorModel>,
}

impl FidelityReport {
    pub fn with_context(
        mut self,
        gate_name: Option<String>,
        params: TwoPulseParams,
        errors: ErrorModel,
    ) -> Self {
        self.gate_name = gate_name;
        self.params_used = Some(params);
        self.error_model = Some(errors);
        self
    }
}

/// Average gate fidelity of `u_impl` (full-basis, interaction frame) against
/// a 2x2 target: F = [Tr(M M^dag) + |Tr M|^2] / 6 with M the projection of
/// U_target^dag U_impl onto the computational subspace. Global-phase
/// invariant; leakage depresses F through the non-unitarity of M.
pub fn average_gate_fidelity(
    u_impl: &DMatrix<Complex64>,
    u_target: &Matrix2<Complex64>,
) -> Result<FidelityReport> {
    let defect = unitarity_defect(u_impl);
    if defect >= 1e-8 {
        return Err(Error::NonUnitary { defect, tol: 1e-8 });
    }
    let defect2 = unitarity_defect2(u_target);
    if defect2 >= 1e-10 {
        return Err(Error::NonUnitary { defect: defect2, tol: 1e-10 });
    }
    let m = u_target.adjoint() * qubit_block(u_impl);
    let tr_mmd: f64 = m.iter().map(|x| x.norm_sqr()).sum();
    let tr_m = m[(0, 0)] + m[(1, 1)];
    let f_av = (tr_mmd + tr_m.norm_sqr()) / 6.0;
    Ok(FidelityReport {
        f_av,
        m_rel: m,
        leakage: (1.0 - tr_mmd / 2.0).max(0.0),
        gate_name: None,
        params_used: None,
        error_model: None,
    })
}

/// Density matrix over the computational subspace, rho_ij = c_i c_j^*,
/// plus the leakage 1 - Tr rho. Amplitudes are used in the state's own
/// frame; circuit snapshots convert to the interaction frame first.
pub fn density_matrix(state: &QuantumState) -> (Matrix2<Complex64>, f64) {
    let c0 = state.amplitudes[0];
    let c1 = state.amplitudes[1];
    let rho = Matrix2::new(
        c0 * c0.conj(),
        c0 * c1.conj(),
        c1 * c0.conj(),
        c1 * c1.conj(),
    );
    let trace = rho[(0, 0)].re + rho[(1, 1)].re;
    (rho, (1.0 - trace).max(0.0))
}
