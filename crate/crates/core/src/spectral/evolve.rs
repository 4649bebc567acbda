//! Time evolution of the qubit amplitudes through the closure relation.
//!
//! For an initial state with only qubit excitation, every branch enters
//! through `|alpha(eps)|^2`, so the subspace propagator is
//!
//! `S_j(t) = int f_j(eps) e^{-i eps t} deps  (+ discrete localized term)`
//!
//! with the qubit spectral density
//! `f_j = (gamma*|s|^2 + Gamma) / (2*pi*|D_j|^2)`. The integral runs over
//! the whole real line: a finite window is done by panel quadrature and the
//! far tails analytically via `TailRule`.

use crate::eigen_lossless::localized_fraction;
use crate::model::{resonance_order, resonant_subspace, Subspace, SystemParams, RESONANCE_TOL};
use crate::spectral::quad::{build_nodes, QuadratureSpec};
use crate::spectral::series::{AsymSeries, HarmonicPoly, TailRule};
use crate::C64;
use rayon::prelude::*;
use thiserror::Error;

/// Order of the `1/u` tail expansion for qubit amplitudes; the residual
/// scales as `kappa^{-(order)}` and is ~4e-9 at the default kappa = 25.
const TAIL_ORDER: usize = 6;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("quadrature did not converge: refining the mesh moved a result by {defect:.3e} (tol {tol:.3e})")]
    NonConvergence { defect: f64, tol: f64 },
}

/// Single-excitation initial state restricted to the qubits.
#[derive(Debug, Clone, Copy)]
pub struct InitialState {
    pub c1: C64,
    pub c2: C64,
}

impl InitialState {
    /// Qubit 1 excited, the canonical case.
    pub fn qubit_one() -> Self {
        Self {
            c1: C64::new(1.0, 0.0),
            c2: C64::new(0.0, 0.0),
        }
    }

    pub fn new(c1: C64, c2: C64) -> Self {
        let n = (c1.norm_sqr() + c2.norm_sqr()).sqrt();
        Self {
            c1: c1 / n,
            c2: c2 / n,
        }
    }

    /// Projection onto a subspace: (c1 + eta*c2)/sqrt(2).
    pub fn projection(&self, subspace: Subspace) -> C64 {
        (self.c1 + subspace.eta() * self.c2) / 2.0f64.sqrt()
    }
}

/// Overlap of one eigenstate with a qubit-only initial state,
/// `conj(alpha) * (c1 + eta*c2)/sqrt(2)`.
pub fn qubit_overlap(
    coeffs: &crate::eigen_lossless::EigenCoeffs,
    init: &InitialState,
    subspace: Subspace,
) -> C64 {
    coeffs.alpha.conj() * init.projection(subspace)
}

/// Qubit spectral density `f_j(eps)`.
pub fn qubit_density(params: &SystemParams, subspace: Subspace, eps: f64) -> f64 {
    let a = params.retardation();
    let eta = subspace.eta();
    let s_sq = 2.0 + 2.0 * eta * (a * eps).cos();
    let den = crate::eigen_lossy::denominator(params, subspace, eps);
    (params.gamma_wg * s_sq + params.gamma_res) / (2.0 * std::f64::consts::PI * den.norm_sqr())
}

/// `D = u + z(eps)` with `z = i(Gamma/2 + gamma) + i*gamma*eta*e^{i*a*eps}`.
pub(crate) fn z_poly(params: &SystemParams, subspace: Subspace) -> HarmonicPoly {
    HarmonicPoly::from_terms(&[
        (0, C64::new(0.0, params.gamma_res / 2.0 + params.gamma_wg)),
        (2, C64::new(0.0, params.gamma_wg * subspace.eta())),
    ])
}

fn density_tail(params: &SystemParams, subspace: Subspace, t_cut: f64) -> TailRule {
    let eta = subspace.eta();
    let z = z_poly(params, subspace);
    let inv_d = AsymSeries::inv_u_plus(&z, TAIL_ORDER);
    let inv_dc = AsymSeries::inv_u_plus(&z.conj(), TAIL_ORDER);
    let num = HarmonicPoly::from_terms(&[
        (0, C64::new(2.0 * params.gamma_wg + params.gamma_res, 0.0)),
        (2, C64::new(params.gamma_wg * eta, 0.0)),
        (-2, C64::new(params.gamma_wg * eta, 0.0)),
    ]);
    let series = inv_d
        .mul(&inv_dc, TAIL_ORDER)
        .mul_poly(&num, TAIL_ORDER)
        .scale(C64::new(1.0 / (2.0 * std::f64::consts::PI), 0.0));
    TailRule {
        t_cut,
        a: params.retardation(),
        omega0: params.omega,
        series,
    }
}

/// Weight of the discrete localized state in the given subspace (zero unless
/// lossless and resonant there).
pub fn localized_weight(params: &SystemParams, subspace: Subspace) -> f64 {
    if !params.is_lossless() {
        return 0.0;
    }
    match resonance_order(params, RESONANCE_TOL) {
        Some(n) if resonant_subspace(n) == subspace => localized_fraction(params).unwrap(),
        _ => 0.0,
    }
}

/// Frozen quadrature data for one subspace; `amplitude(t)` is `S_j(t)`.
pub struct Propagator {
    pub subspace: Subspace,
    omega: f64,
    nodes: Vec<(f64, f64)>,
    density: Vec<f64>,
    tail: TailRule,
    localized: f64,
}

impl Propagator {
    pub fn build(
        params: &SystemParams,
        subspace: Subspace,
        t_max: f64,
        spec: &QuadratureSpec,
    ) -> Self {
        let nodes = build_nodes(params, subspace, t_max, spec);
        let density = nodes
            .iter()
            .map(|&(eps, _)| qubit_density(params, subspace, eps))
            .collect();
        let tail = density_tail(params, subspace, spec.window_half_width(params));
        Self {
            subspace,
            omega: params.omega,
            nodes,
            density,
            tail,
            localized: localized_weight(params, subspace),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn amplitude(&self, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, &(eps, w)) in self.nodes.iter().enumerate() {
            acc += C64::new(0.0, -eps * t).exp() * (w * self.density[i]);
        }
        acc += self.tail.eval(t);
        if self.localized != 0.0 {
            acc += C64::new(0.0, -self.omega * t).exp() * self.localized;
        }
        acc
    }

    /// Continuum part only (no discrete localized term).
    pub fn continuum_amplitude(&self, t: f64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, &(eps, w)) in self.nodes.iter().enumerate() {
            acc += C64::new(0.0, -eps * t).exp() * (w * self.density[i]);
        }
        acc + self.tail.eval(t)
    }
}

/// Closure-relation diagnostics for one subspace.
#[derive(Debug, Clone, Copy)]
pub struct ClosureReport {
    pub subspace: Subspace,
    /// Continuum spectral weight (window + analytic tails).
    pub continuum: f64,
    /// Discrete localized-state weight (lossless resonant only).
    pub localized: f64,
    /// continuum + localized; must equal 1.
    pub total: f64,
    /// |value(base mesh) - value(refined mesh)|: quadrature error estimate.
    pub quad_error: f64,
    pub node_count: usize,
}

/// Evaluate the closure sum rule in both subspaces.
pub fn closure_check(params: &SystemParams, spec: &QuadratureSpec) -> [ClosureReport; 2] {
    Subspace::BOTH.map(|subspace| {
        let base = Propagator::build(params, subspace, 0.0, spec);
        let refined = Propagator::build(params, subspace, 0.0, &spec.refined());
        let continuum = base.continuum_amplitude(0.0).re;
        let continuum_ref = refined.continuum_amplitude(0.0).re;
        ClosureReport {
            subspace,
            continuum,
            localized: base.localized,
            total: continuum + base.localized,
            quad_error: (continuum - continuum_ref).abs(),
            node_count: base.node_count(),
        }
    })
}

/// Populations, coherence and concurrence on a time grid.
#[derive(Debug, Clone)]
pub struct QubitTrajectory {
    pub times: Vec<f64>,
    pub rho_pp: Vec<f64>,
    pub rho_mm: Vec<f64>,
    pub rho_pm: Vec<C64>,
    pub concurrence: Vec<f64>,
}

impl QubitTrajectory {
    pub fn from_amplitudes(times: Vec<f64>, c_e: &[C64], c_o: &[C64]) -> Self {
        let rho_pp: Vec<f64> = c_e.iter().map(|c| c.norm_sqr()).collect();
        let rho_mm: Vec<f64> = c_o.iter().map(|c| c.norm_sqr()).collect();
        let rho_pm: Vec<C64> = c_e
            .iter()
            .zip(c_o)
            .map(|(ce, co)| ce * co.conj())
            .collect();
        let concurrence = rho_pp
            .iter()
            .zip(&rho_mm)
            .zip(&rho_pm)
            .map(|((&pp, &mm), pm)| crate::markov::concurrence(pp, mm, *pm))
            .collect();
        Self {
            times,
            rho_pp,
            rho_mm,
            rho_pm,
            concurrence,
        }
    }
}

/// Subspace amplitudes `c_e(t), c_o(t)` for a qubit-only initial state.
///
/// When `spec.check_convergence` is set, the result is recomputed on a
/// refined mesh at probe times and the run fails if they disagree.
pub fn evolve_qubit_amplitudes(
    params: &SystemParams,
    init: &InitialState,
    times: &[f64],
    spec: &QuadratureSpec,
) -> Result<(Vec<C64>, Vec<C64>), SpectralError> {
    let t_max = times.iter().cloned().fold(0.0, f64::max);
    let props =
        Subspace::BOTH.map(|subspace| Propagator::build(params, subspace, t_max, spec));

    if spec.check_convergence {
        let refined =
            Subspace::BOTH.map(|subspace| Propagator::build(params, subspace, t_max, &spec.refined()));
        let probes = [0.0, 0.25 * t_max, 0.5 * t_max, 0.75 * t_max, t_max];
        let mut defect = 0.0f64;
        for (p, r) in props.iter().zip(&refined) {
            for &t in &probes {
                defect = defect.max((p.amplitude(t) - r.amplitude(t)).norm());
            }
        }
        if defect > spec.tol {
            return Err(SpectralError::NonConvergence {
                defect,
                tol: spec.tol,
            });
        }
    }

    let p_e = init.projection(Subspace::Even);
    let p_o = init.projection(Subspace::Odd);
    let c_e: Vec<C64> = times
        .par_iter()
        .map(|&t| p_e * props[0].amplitude(t))
        .collect();
    let c_o: Vec<C64> = times
        .par_iter()
        .map(|&t| p_o * props[1].amplitude(t))
        .collect();
    Ok((c_e, c_o))
}

/// Full population/concurrence trajectory for a qubit-only initial state.
pub fn trajectory(
    params: &SystemParams,
    init: &InitialState,
    times: &[f64],
    spec: &QuadratureSpec,
) -> Result<QubitTrajectory, SpectralError> {
    let (c_e, c_o) = evolve_qubit_amplitudes(params, init, times, spec)?;
    Ok(QubitTrajectory::from_amplitudes(times.to_vec(), &c_e, &c_o))
}
