//! Molecular constants, rotational basis, dipole elements, and Hamiltonian
//! assembly for a linear polar rotor driven by a linearly polarized field.
//!
//! Qubit encoding: |0> = |J=0,M=0>, |1> = |J=1,M=0>; higher J are leakage
//! levels. Linear polarization keeps M = 0 throughout.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::UnitSystem;

/// Molecule definition: rotational constant, dipole moment, basis cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotorSpec {
    #[serde(rename = "name")]
    pub molecule_name: String,
    /// Rotational constant B in cm^-1.
    #[serde(rename = "B_cm1")]
    pub rotational_constant_cm1: f64,
    /// Permanent dipole moment mu_0 in Debye.
    #[serde(rename = "mu0_debye")]
    pub dipole_moment_debye: f64,
    /// Highest rotational level kept in the basis.
    pub j_max: u32,
}

impl RotorSpec {
    /// NaCs in its rovibronic ground state, the built-in default.
    pub fn nacs() -> Self {
        Self {
            molecule_name: "NaCs".into(),
            rotational_constant_cm1: 0.0631,
            dipole_moment_debye: 4.6,
            j_max: 10,
        }
    }

    /// Parse a molecule definition from TOML (keys: name, B_cm1, mu0_debye, j_max).
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: RotorSpec =
            toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rotational_constant_cm1 > 0.0) {
            return Err(Error::InvalidRotorSpec(format!(
                "B must be positive, got {}",
                self.rotational_constant_cm1
            )));
        }
        if !(self.dipole_moment_debye > 0.0) {
            return Err(Error::InvalidRotorSpec(format!(
                "mu0 must be positive, got {}",
                self.dipole_moment_debye
            )));
        }
        if self.j_max < 2 {
            return Err(Error::InvalidRotorSpec(format!(
                "j_max must be at least 2 to keep a leakage level above the qubit pair, got {}",
                self.j_max
            )));
        }
        Ok(())
    }

    /// Rotational constant as an angular frequency, rad/s.
    pub fn b_angular(&self) -> f64 {
        UnitSystem::default().wavenumber_to_angular(self.rotational_constant_cm1)
    }

    /// Qubit transition frequency omega_01 = 2B, rad/s.
    pub fn omega01(&self) -> f64 {
        2.0 * self.b_angular()
    }

    /// Full revival time tau_0 = pi / B, seconds.
    pub fn revival_time(&self) -> f64 {
        std::f64::consts::PI / self.b_angular()
    }

    /// Level energy B J(J+1) as an angular frequency (hbar = 1), rad/s.
    pub fn rotational_energy(&self, j: u32) -> Result<f64> {
        if j > self.j_max {
            return Err(Error::JOutOfRange { j, max: self.j_max });
        }
        Ok(self.b_angular() * (j as f64) * (j as f64 + 1.0))
    }

    /// Transition frequency E_{J+1} - E_J, rad/s. For J = 0 this is 2B.
    pub fn transition_frequency(&self, j: u32) -> Result<f64> {
        if j >= self.j_max {
            return Err(Error::JOutOfRange { j, max: self.j_max });
        }
        Ok(self.rotational_energy(j + 1)? - self.rotational_energy(j)?)
    }

    /// Dipole matrix element mu_{J,J+1} between |J,M> and |J+1,M>, in Debye:
    /// mu_0 sqrt(((J+1)^2 - M^2) / ((2J+3)(2J+1))).
    pub fn dipole_element(&self, j: u32, m: i32) -> Result<f64> {
        if j >= self.j_max {
            return Err(Error::JOutOfRange { j, max: self.j_max });
        }
        if m.unsigned_abs() > j {
            return Err(Error::InvalidQuantumNumbers { j, m });
        }
        let jf = j as f64;
        let mf = m as f64;
        let ratio = ((jf + 1.0) * (jf + 1.0) - mf * mf) / ((2.0 * jf + 3.0) * (2.0 * jf + 1.0));
        Ok(self.dipole_moment_debye * ratio.sqrt())
    }

    /// Internal dipole coupling mu_{J,J+1} for M = 0, in rad/s per (V/m).
    pub fn dipole_coupling(&self, j: u32) -> Result<f64> {
        Ok(UnitSystem::default().debye_to_coupling(self.dipole_element(j, 0)?))
    }

    /// Qubit-transition coupling mu_01 in Debye (mu_0 / sqrt(3)).
    pub fn mu01_debye(&self) -> f64 {
        self.dipole_moment_debye / 3f64.sqrt()
    }

    /// Spec with the basis enlarged by `extra` levels, for convergence runs.
    pub fn with_extra_levels(&self, extra: u32) -> Self {
        let mut s = self.clone();
        s.j_max += extra;
        s
    }
}

/// Ordered rotational basis |J, M=0>, J = 0..=j_max.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationalBasis {
    states: Vec<(u32, i32)>,
}

impl RotationalBasis {
    pub fn new(spec: &RotorSpec) -> Self {
        Self::with_j_max(spec.j_max)
    }

    /// Basis truncated at an explicit cutoff, independent of the spec's
    /// default. `with_j_max(1)` is the two-level truncation.
    pub fn with_j_max(j_max: u32) -> Self {
        Self {
            states: (0..=j_max).map(|j| (j, 0)).collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    /// (J, M) labels, ascending in J.
    pub fn states(&self) -> &[(u32, i32)] {
        &self.states
    }
}

/// Hamiltonian at a fixed field value, rad/s: diagonal rotational energies,
/// off-diagonal (J, J+-1) entries -mu_{J,J+1} E. Real symmetric tridiagonal.
pub fn hamiltonian_at(spec: &RotorSpec, basis: &RotationalBasis, field_v_per_m: f64) -> DMatrix<f64> {
    let n = basis.dimension();
    let mut h = DMatrix::zeros(n, n);
    for (idx, &(j, _m)) in basis.states().iter().enumerate() {
        h[(idx, idx)] = spec.rotational_energy(j).expect("basis built from spec");
        if idx + 1 < n {
            let c = -spec.dipole_coupling(j).expect("basis built from spec") * field_v_per_m;
            h[(idx, idx + 1)] = c;
            h[(idx + 1, idx)] = c;
        }
    }
    h
}
