//! Unit conversions between spectroscopic/SI inputs and internal units.
//!
//! Internally everything runs with `hbar = 1`: energies and couplings are
//! angular frequencies in rad/s, time is in seconds, and electric fields
//! stay in V/m (the dipole moment absorbs the 1/hbar factor). Public I/O
//! uses cm^-1 for rotational constants, Debye for dipole moments, and
//! picoseconds where noted.

/// Speed of light in cm/s (exact).
pub const SPEED_OF_LIGHT_CM_PER_S: f64 = 2.997_924_58e10;

/// Reduced Planck constant in J*s.
pub const HBAR_JS: f64 = 1.054_571_817e-34;

/// One Debye in C*m.
pub const DEBYE_CM: f64 = 3.335_64e-30;

/// Conversion factors anchoring the internal unit system.
///
/// The field and time factors are identity because the internal units for
/// those quantities are already SI; they are kept explicit so round-trip
/// checks cover the full set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitSystem {
    /// cm^-1 -> rad/s.
    pub wavenumber_to_rad_per_s: f64,
    /// Debye -> internal dipole coupling, rad/s per (V/m).
    pub debye_to_coupling: f64,
    /// Internal field unit -> V/m.
    pub field_to_v_per_m: f64,
    /// Internal time unit -> s.
    pub time_to_s: f64,
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self {
            wavenumber_to_rad_per_s: 2.0 * std::f64::consts::PI * SPEED_OF_LIGHT_CM_PER_S,
            debye_to_coupling: DEBYE_CM / HBAR_JS,
            field_to_v_per_m: 1.0,
            time_to_s: 1.0,
        }
    }
}

impl UnitSystem {
    /// Angular frequency in rad/s for a spectroscopic wavenumber in cm^-1.
    pub fn wavenumber_to_angular(&self, cm1: f64) -> f64 {
        cm1 * self.wavenumber_to_rad_per_s
    }

    /// Inverse of [`Self::wavenumber_to_angular`].
    pub fn angular_to_wavenumber(&self, rad_per_s: f64) -> f64 {
        rad_per_s / self.wavenumber_to_rad_per_s
    }

    /// Dipole coupling in rad/s per (V/m) for a dipole moment in Debye.
    pub fn debye_to_coupling(&self, debye: f64) -> f64 {
        debye * self.debye_to_coupling
    }

    /// Inverse of [`Self::debye_to_coupling`].
    pub fn coupling_to_debye(&self, coupling: f64) -> f64 {
        coupling / self.debye_to_coupling
    }
}

/// Seconds -> picoseconds, for exported time columns.
pub fn s_to_ps(t: f64) -> f64 {
    t * 1e12
}
