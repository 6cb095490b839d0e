//! Circuit parameter sets, displaced frames, and driven Hamiltonian models.
//!
//! Conventions: every energy and rate is stored as an angular frequency in
//! rad/s with hbar = 1. Constructors taking "paper units" accept E/h and
//! omega/2pi in GHz and convert at the boundary.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{BasisSpec, CMat};

pub mod shunted;
pub mod unshunted;

pub use shunted::{
    build_shunted_hamiltonian, build_shunted_lab_hamiltonian, derive_shunted_frame,
    frame_unitaries, quadratic_residual, shunted_block_states, shunted_model,
    shunted_transmon_eigenbasis, time_averaged_hamiltonian, FrameUnitaries, ShuntedFrame,
};
pub use unshunted::{
    bound_level_count, build_unshunted_hamiltonian, build_unshunted_lab_hamiltonian,
    confined_level_count, derive_unshunted_frame, transmon_block_states, transmon_eigenbasis,
    unshunted_model, UnshuntedFrame,
};

pub const GHZ: f64 = 1e9;
const TAU: f64 = std::f64::consts::TAU;

fn ghz_to_rad(v: f64) -> f64 {
    TAU * v * GHZ
}

/// Transmon + oscillator circuit parameters, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnshuntedParams {
    pub e_c: f64,
    pub e_j: f64,
    pub g: f64,
    pub omega_a: f64,
    pub omega_p: f64,
    pub pump_amp: f64,
    pub n_g: f64,
}

impl UnshuntedParams {
    /// From paper units: E/h in GHz, g/2pi and omega/2pi in GHz.
    pub fn from_ghz(
        ec_over_h: f64,
        ej_over_h: f64,
        g_over_2pi: f64,
        omega_a_over_2pi: f64,
        omega_p_over_2pi: f64,
    ) -> Self {
        Self {
            e_c: ghz_to_rad(ec_over_h),
            e_j: ghz_to_rad(ej_over_h),
            g: ghz_to_rad(g_over_2pi),
            omega_a: ghz_to_rad(omega_a_over_2pi),
            omega_p: ghz_to_rad(omega_p_over_2pi),
            pump_amp: 0.0,
            n_g: 0.0,
        }
    }

    pub fn with_pump(mut self, pump_amp: f64) -> Self {
        self.pump_amp = pump_amp;
        self
    }

    pub fn with_ng(mut self, n_g: f64) -> Self {
        self.n_g = n_g;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.e_c <= 0.0 || self.e_j <= 0.0 || self.omega_a <= 0.0 || self.omega_p <= 0.0 {
            return Err(Error::Config("E_C, E_J, omega_a, omega_p must be positive".into()));
        }
        if self.pump_amp < 0.0 {
            return Err(Error::Config("pump amplitude must be nonnegative".into()));
        }
        if ((self.omega_a - self.omega_p) / self.omega_a).abs() < 1e-9 {
            return Err(Error::SingularFrame("pump resonant with the oscillator".into()));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega_p
    }
}

/// Inductively shunted transmon + oscillator parameters, all in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuntedParams {
    pub e_c: f64,
    pub e_j: f64,
    pub e_l: f64,
    pub g: f64,
    pub omega_a: f64,
    pub omega_p: f64,
    pub pump_amp: f64,
}

impl ShuntedParams {
    pub fn from_ghz(
        ec_over_h: f64,
        ej_over_h: f64,
        el_over_h: f64,
        g_over_2pi: f64,
        omega_a_over_2pi: f64,
        omega_p_over_2pi: f64,
    ) -> Self {
        Self {
            e_c: ghz_to_rad(ec_over_h),
            e_j: ghz_to_rad(ej_over_h),
            e_l: ghz_to_rad(el_over_h),
            g: ghz_to_rad(g_over_2pi),
            omega_a: ghz_to_rad(omega_a_over_2pi),
            omega_p: ghz_to_rad(omega_p_over_2pi),
            pump_amp: 0.0,
        }
    }

    pub fn with_pump(mut self, pump_amp: f64) -> Self {
        self.pump_amp = pump_amp;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.e_c <= 0.0 || self.e_j <= 0.0 || self.e_l <= 0.0 {
            return Err(Error::Config("E_C, E_J, E_L must be positive".into()));
        }
        if self.omega_a <= 0.0 || self.omega_p <= 0.0 {
            return Err(Error::Config("omega_a, omega_p must be positive".into()));
        }
        if self.pump_amp < 0.0 {
            return Err(Error::Config("pump amplitude must be nonnegative".into()));
        }
        if ((self.omega_a - self.omega_p) / self.omega_a).abs() < 1e-9 {
            return Err(Error::SingularFrame("pump resonant with the oscillator".into()));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega_p
    }
}

/// Estimated circulating photon number |A_p|^2 / 4|omega_p - omega_a|^2.
pub fn nbar_est(omega_a: f64, omega_p: f64, pump_amp: f64) -> Result<f64> {
    let det = omega_p - omega_a;
    if det == 0.0 {
        return Err(Error::SingularFrame("nbar_est undefined at pump-oscillator resonance".into()));
    }
    Ok(pump_amp * pump_amp / (4.0 * det * det))
}

/// Pump amplitude that produces a given nbar_est.
pub fn pump_amp_for_nbar(omega_a: f64, omega_p: f64, nbar: f64) -> f64 {
    2.0 * (omega_p - omega_a).abs() * nbar.max(0.0).sqrt()
}

/// Exact per-step propagator data for the unshunted model: the displaced
/// Hamiltonian is a diagonal gauge transform of its own static part,
/// H(t) = exp(-i s(t) N) H0 exp(i s(t) N) with s(t) = xi sin(omega_p t).
#[derive(Debug, Clone)]
pub struct GaugeData {
    /// Diagonal of the embedded charge operator.
    pub n_diag: Array1<f64>,
}

/// Split-step data for the shunted model: the linear part is diagonal in the
/// Fock basis and the Josephson part is diagonal in the eigenbasis of Phi.
#[derive(Debug, Clone)]
pub struct SplitData {
    /// Diagonal of the linear Hamiltonian (rad/s).
    pub h_diag: Array1<f64>,
    /// Eigenvalues of Phi = phi_a (a + a^dag) + phi_b (b + b^dag).
    pub phi_vals: Array1<f64>,
    /// Eigenvectors of Phi, columns.
    pub phi_vecs: CMat,
    /// Josephson energy (rad/s).
    pub e_j: f64,
}

/// T-periodic Hamiltonian of the form
/// H(t) = h_lin + cos(xi sin(wp t)) cos_part + sin(xi sin(wp t)) sin_part.
#[derive(Debug, Clone)]
pub struct DrivenModel {
    pub basis: BasisSpec,
    pub h_lin: CMat,
    pub cos_part: CMat,
    pub sin_part: CMat,
    pub xi: f64,
    pub omega_p: f64,
    pub gauge: Option<GaugeData>,
    pub split: Option<SplitData>,
}

impl DrivenModel {
    pub fn dim(&self) -> usize {
        self.h_lin.nrows()
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega_p
    }

    /// Scalar drive phase s(t) = xi sin(omega_p t).
    pub fn drive_phase(&self, t: f64) -> f64 {
        self.xi * (self.omega_p * t).sin()
    }

    pub fn h_at(&self, t: f64) -> CMat {
        let s = self.drive_phase(t);
        let (c, sn) = (s.cos(), s.sin());
        let mut h = self.h_lin.clone();
        h.zip_mut_with(&self.cos_part, |a, b| *a += C64::new(c, 0.0) * b);
        h.zip_mut_with(&self.sin_part, |a, b| *a += C64::new(sn, 0.0) * b);
        h
    }

    /// Static Hamiltonian at drive phase zero (equals h_at(0)).
    pub fn h_static(&self) -> CMat {
        &self.h_lin + &self.cos_part
    }
}

/// Bath coupling operator for the unshunted model: i (a - a^dag) on the
/// oscillator factor (Hermitian).
pub fn bath_coupling_unshunted(basis: &BasisSpec) -> Result<CMat> {
    use crate::hilbert::{annihilation, dagger, embed};
    let dim = basis.mode(1).dim;
    let a = annihilation(dim)?;
    let op = (&a - &dagger(&a)).mapv(|z| z * C64::new(0.0, 1.0));
    embed(&op, 1, basis)
}

/// Bath coupling operator nu for the shunted model: the transmission-line
/// coupling i (a - a^dag) re-expressed in the normal-mode frame.
pub fn bath_coupling_shunted(frame: &shunted::ShuntedFrame, basis: &BasisSpec) -> Result<CMat> {
    use crate::hilbert::{annihilation, dagger, embed};
    let (da, db) = (basis.mode(0).dim, basis.mode(1).dim);
    let a = annihilation(da)?;
    let b = annihilation(db)?;
    let ia = embed(&(&a - &dagger(&a)).mapv(|z| z * C64::new(0.0, 1.0)), 0, basis)?;
    let ib = embed(&(&b - &dagger(&b)).mapv(|z| z * C64::new(0.0, 1.0)), 1, basis)?;
    Ok(ia.mapv(|z| z * C64::new(frame.bath_weight_a, 0.0))
        + ib.mapv(|z| z * C64::new(frame.bath_weight_b, 0.0)))
}

/// Sorted eigenpairs of a single-mode diagnostic Hamiltonian, kept in the
/// native basis it was assembled in (charge window or Fock ladder).
#[derive(Debug, Clone)]
pub struct DiagnosticBasis {
    /// Eigenvalues ascending, rad/s.
    pub energies: Array1<f64>,
    /// Eigenvectors as columns, native basis.
    pub states: CMat,
    /// Native basis dimension the states are expressed in.
    pub native_dim: usize,
    /// True when the lowest levels were stable under a truncation doubling.
    pub converged: bool,
}

/// Parameter sets used throughout the examples and presets.
pub mod presets {
    use super::{ShuntedParams, UnshuntedParams};

    /// Transmon: E_C/h = 150 MHz, E_J/h = 20 GHz, g/2pi = 140 MHz,
    /// omega_a/2pi = 5.5 GHz, omega_p/2pi = 6 GHz.
    pub fn unshunted() -> UnshuntedParams {
        UnshuntedParams::from_ghz(0.15, 20.0, 0.14, 5.5, 6.0)
    }

    /// Shunted variant with the same total inductive energy:
    /// E_J/h = 6 GHz, E_L/h = 14 GHz.
    pub fn shunted() -> ShuntedParams {
        ShuntedParams::from_ghz(0.15, 6.0, 14.0, 0.14, 5.5, 6.0)
    }

    /// Alternate shunted parameters with stronger nonlinearity:
    /// E_C/h = 450 MHz, E_J/h = 2.22 GHz, E_L/h = 4.44 GHz, g/2pi = 245 MHz.
    pub fn shunted_alt() -> ShuntedParams {
        ShuntedParams::from_ghz(0.45, 2.22, 4.44, 0.245, 5.5, 6.0)
    }
}
