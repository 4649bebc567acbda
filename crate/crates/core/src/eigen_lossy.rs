//! Eigenstates of the lossy Hamiltonian: the scattering branch (photon
//! incident in the waveguide) and the quasi-localized branch (photon
//! incident in the reservoir). Together they span the single-excitation
//! space for every parameter choice, with no discrete state left over.

use crate::eigen_lossless::{phase, EigenCoeffs};
use crate::model::{Branch, Subspace, SystemParams};
use crate::C64;

/// Denominator shared by both branches:
/// `eps - omega + i*Gamma/2 + i*gamma*(1 + eta*e^{i*eps*d/v_g})`.
/// It never vanishes for real `eps` once `Gamma > 0`.
pub fn denominator(params: &SystemParams, subspace: Subspace, eps: f64) -> C64 {
    let a = params.retardation();
    C64::new(eps - params.omega, params.gamma_res / 2.0)
        + C64::i() * params.gamma_wg * (1.0 + subspace.eta() * phase(a * eps))
}

/// Scattering-branch coefficients, normalized to `A = 1`, `a = 0`.
/// Identical to the lossless scattering state with the qubit frequency
/// shifted to `omega - i*Gamma/2`, plus the reservoir outflow `b`.
pub fn scattering_coeffs(params: &SystemParams, subspace: Subspace, eps: f64) -> EigenCoeffs {
    let a = params.retardation();
    let eta = subspace.eta();
    let den = denominator(params, subspace, eps);
    let w = C64::new(eps - params.omega, params.gamma_res / 2.0);
    let t0 = w / den;
    let t1 = (w - C64::i() * params.gamma_wg * (1.0 + eta * phase(-a * eps))) / den;
    let s = phase(-a * eps / 2.0) + eta * phase(a * eps / 2.0);
    let alpha = params.coupling_v() * s / den;
    let b = -C64::i() * (params.coupling_k() / params.v()) * alpha;
    EigenCoeffs {
        energy: eps,
        subspace,
        branch: Branch::Scattering,
        wg_in: C64::new(1.0, 0.0),
        t0,
        t1,
        res_in: C64::new(0.0, 0.0),
        res_out: b,
        alpha,
    }
}

/// Quasi-localized-branch coefficients, normalized to `a = 1`, `A = 0`.
pub fn quasi_localized_coeffs(params: &SystemParams, subspace: Subspace, eps: f64) -> EigenCoeffs {
    let a = params.retardation();
    let eta = subspace.eta();
    let den = denominator(params, subspace, eps);
    let root = (params.gamma_wg * params.gamma_res).sqrt();
    let t0 = -C64::i() * root * phase(a * eps / 2.0) / den;
    let t1 = -C64::i() * root * (phase(a * eps / 2.0) + eta * phase(-a * eps / 2.0)) / den;
    let alpha = params.coupling_k() / den;
    let b = C64::new(1.0, 0.0) - C64::i() * (params.coupling_k() / params.v()) * alpha;
    EigenCoeffs {
        energy: eps,
        subspace,
        branch: Branch::QuasiLocalized,
        wg_in: C64::new(0.0, 0.0),
        t0,
        t1,
        res_in: C64::new(1.0, 0.0),
        res_out: b,
        alpha,
    }
}

/// Flux balance `|outgoing|^2 - |incoming|^2` for an eigenstate; zero for
/// every correct coefficient set.
pub fn flux_defect(c: &EigenCoeffs) -> f64 {
    c.t1.norm_sqr() + c.res_out.norm_sqr() - c.wg_in.norm_sqr() - c.res_in.norm_sqr()
}
