//! Physical parameters, unit conventions, derived quantities and resonance
//! detection.
//!
//! Units: `hbar = 1`. The natural internal choice is `omega = 1`, `v_g = 1`
//! (see [`SystemParams::from_paper_units`]); all quantities stay fully
//! general nonetheless.

use std::f64::consts::PI;
use thiserror::Error;

/// Relative tolerance (in units of the wavelength) used to decide whether a
/// separation is resonant.
pub const RESONANCE_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("Purcell factor undefined for a lossless system (Gamma = 0)")]
    LosslessPurcell,
}

/// Mirror-symmetry sector of the two-qubit + field system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subspace {
    Even,
    Odd,
}

impl Subspace {
    /// Sign `eta`: +1 for the even sector, -1 for the odd one.
    pub fn eta(self) -> f64 {
        match self {
            Subspace::Even => 1.0,
            Subspace::Odd => -1.0,
        }
    }

    pub const BOTH: [Subspace; 2] = [Subspace::Even, Subspace::Odd];
}

impl std::fmt::Display for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Subspace::Even => write!(f, "even"),
            Subspace::Odd => write!(f, "odd"),
        }
    }
}

/// Continuum eigenstate family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Nonzero incoming waveguide amplitude, normalized to `A = 1`.
    Scattering,
    /// Zero incoming waveguide amplitude, fed through the reservoir
    /// (`a = 1`). Exists only for a lossy system.
    QuasiLocalized,
}

/// Physical constants of the two-qubit/waveguide/reservoir system.
///
/// * `omega`    - qubit transition frequency (energy).
/// * `gamma_wg` - decay rate into one waveguide direction (energy).
/// * `gamma_res`- reservoir decay rate; zero means lossless.
/// * `d`        - inter-qubit separation; qubits sit at `x = -d/2, +d/2`.
/// * `v_g`      - waveguide group velocity. The reservoir group velocity is
///   fixed equal to `v_g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega: f64,
    pub gamma_wg: f64,
    pub gamma_res: f64,
    pub d: f64,
    pub v_g: f64,
}

impl SystemParams {
    pub fn new(omega: f64, gamma_wg: f64, gamma_res: f64, d: f64, v_g: f64) -> Result<Self, ModelError> {
        let p = SystemParams { omega, gamma_wg, gamma_res, d, v_g };
        p.validate()?;
        Ok(p)
    }

    /// Build from the dimensionless ratios used on the figure axes:
    /// `gamma/omega`, `Gamma/gamma` and `d/lambda`, with `omega = 1`,
    /// `v_g = 1`.
    pub fn from_paper_units(
        gamma_over_omega: f64,
        big_gamma_over_gamma: f64,
        d_over_lambda: f64,
    ) -> Result<Self, ModelError> {
        let omega = 1.0;
        let v_g = 1.0;
        let gamma_wg = gamma_over_omega * omega;
        let gamma_res = big_gamma_over_gamma * gamma_wg;
        let d = d_over_lambda * 2.0 * PI * v_g / omega;
        SystemParams::new(omega, gamma_wg, gamma_res, d, v_g)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(ModelError::InvalidParameter("omega must be > 0"));
        }
        if !(self.gamma_wg > 0.0 && self.gamma_wg.is_finite()) {
            return Err(ModelError::InvalidParameter("gamma_wg must be > 0"));
        }
        if !(self.gamma_res >= 0.0 && self.gamma_res.is_finite()) {
            return Err(ModelError::InvalidParameter("gamma_res must be >= 0"));
        }
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(ModelError::InvalidParameter("d must be > 0"));
        }
        if !(self.v_g > 0.0 && self.v_g.is_finite()) {
            return Err(ModelError::InvalidParameter("v_g must be > 0"));
        }
        Ok(())
    }

    /// Reservoir group velocity (fixed equal to `v_g`).
    pub fn v(&self) -> f64 {
        self.v_g
    }

    /// Waveguide coupling amplitude `V = sqrt(gamma_wg * v_g)`.
    pub fn coupling_v(&self) -> f64 {
        (self.gamma_wg * self.v_g).sqrt()
    }

    /// Reservoir coupling amplitude `K = sqrt(gamma_res * v)`.
    pub fn coupling_k(&self) -> f64 {
        (self.gamma_res * self.v()).sqrt()
    }

    /// Photon transit time between the qubits, `d / v_g`.
    pub fn retardation(&self) -> f64 {
        self.d / self.v_g
    }

    /// Total single-qubit decay rate `2*gamma + Gamma`.
    pub fn total_rate(&self) -> f64 {
        2.0 * self.gamma_wg + self.gamma_res
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma_res == 0.0
    }

    pub fn d_over_lambda(&self) -> f64 {
        self.d / wavelength(self)
    }
}

/// Qubit transition wavelength `lambda = 2*pi*v_g / omega`.
pub fn wavelength(params: &SystemParams) -> f64 {
    2.0 * PI * params.v_g / params.omega
}

/// Smallest positive integer `n` with `|d - n*lambda/2| <= tol * lambda`,
/// if any. Resonant separations are `d = n*lambda/2`.
pub fn resonance_order(params: &SystemParams, tol: f64) -> Option<u32> {
    let lambda = wavelength(params);
    let ratio = 2.0 * params.d / lambda;
    let n = ratio.round();
    if n >= 1.0 && (params.d - n * lambda / 2.0).abs() <= tol * lambda {
        Some(n as u32)
    } else {
        None
    }
}

/// Subspace hosting the localized state at the resonant separation
/// `d = n*lambda/2`: the one with `1 + eta * (-1)^n = 0`.
pub fn resonant_subspace(n: u32) -> Subspace {
    if n % 2 == 0 {
        Subspace::Odd
    } else {
        Subspace::Even
    }
}

/// Purcell factor `F_P = (2*gamma + Gamma) / Gamma`.
pub fn purcell_factor(params: &SystemParams) -> Result<f64, ModelError> {
    if params.gamma_res == 0.0 {
        return Err(ModelError::LosslessPurcell);
    }
    Ok((2.0 * params.gamma_wg + params.gamma_res) / params.gamma_res)
}

/// Guided-mode fraction `beta = 2*gamma / (2*gamma + Gamma)`.
pub fn beta_factor(params: &SystemParams) -> f64 {
    2.0 * params.gamma_wg / (2.0 * params.gamma_wg + params.gamma_res)
}
