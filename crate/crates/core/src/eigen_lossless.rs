//! Closed-form eigenstate coefficients of the lossless Hamiltonian:
//! the scattering branch and the discrete localized state.

use crate::model::{resonance_order, resonant_subspace, wavelength, Branch, Subspace, SystemParams, RESONANCE_TOL};
use crate::C64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EigenError {
    /// The scattering denominator vanishes: resonant separation with
    /// `eps = omega` in the resonant subspace. The discrete localized state
    /// lives exactly there.
    #[error("localized-pole: scattering coefficients are singular at eps = omega for a resonant separation")]
    LocalizedPole,
    #[error("off-resonant separation: no localized state exists")]
    OffResonant,
}

/// Coefficient set of one continuum eigenstate at energy `energy`.
///
/// The photon wavefunction is a piecewise plane wave `e^{i*eps*x/v_g}` with
/// amplitude `wg_in` (A) left of both qubits, `t0` between them and `t1`
/// to the right; `res_in` (a) and `res_out` (b) are the reservoir
/// amplitudes before/after the interaction point, and `alpha` is the qubit
/// amplitude.
#[derive(Debug, Clone, Copy)]
pub struct EigenCoeffs {
    pub energy: f64,
    pub subspace: Subspace,
    pub branch: Branch,
    pub wg_in: C64,
    pub t0: C64,
    pub t1: C64,
    pub res_in: C64,
    pub res_out: C64,
    pub alpha: C64,
}

/// The discrete lossless eigenstate at `eps = omega`, unit-normalized.
/// Its photon component exists only between the qubits.
#[derive(Debug, Clone, Copy)]
pub struct LocalizedState {
    pub subspace: Subspace,
    /// Real positive qubit amplitude.
    pub alpha: f64,
    /// Photon amplitude on the inter-qubit interval.
    pub t0: C64,
    /// Eigenenergy; always equal to the qubit frequency.
    pub energy: f64,
}

pub(crate) fn phase(x: f64) -> C64 {
    C64::new(0.0, x).exp()
}

/// Scattering denominator `eps - omega + i*gamma*(1 + eta*e^{i*eps*d/v_g})`.
fn denominator(params: &SystemParams, subspace: Subspace, eps: f64) -> C64 {
    let a = params.retardation();
    let eta = subspace.eta();
    C64::new(eps - params.omega, 0.0)
        + C64::i() * params.gamma_wg * (1.0 + eta * phase(a * eps))
}

/// Scattering-branch coefficients for the lossless system, normalized to
/// `A = 1`.
pub fn scattering_coeffs(
    params: &SystemParams,
    subspace: Subspace,
    eps: f64,
) -> Result<EigenCoeffs, EigenError> {
    let a = params.retardation();
    let eta = subspace.eta();
    let den = denominator(params, subspace, eps);
    // the exact zero lands off-grid in floating point; flag the pole when
    // the denominator is at rounding-noise scale
    if den.norm() < 1e-12 * ((eps - params.omega).abs() + 2.0 * params.gamma_wg) {
        return Err(EigenError::LocalizedPole);
    }
    let de = eps - params.omega;
    let t0 = C64::new(de, 0.0) / den;
    let t1 = (C64::new(de, 0.0) - C64::i() * params.gamma_wg * (1.0 + eta * phase(-a * eps))) / den;
    let s = phase(-a * eps / 2.0) + eta * phase(a * eps / 2.0);
    let alpha = params.coupling_v() * s / den;
    Ok(EigenCoeffs {
        energy: eps,
        subspace,
        branch: Branch::Scattering,
        wg_in: C64::new(1.0, 0.0),
        t0,
        t1,
        res_in: C64::new(0.0, 0.0),
        res_out: C64::new(0.0, 0.0),
        alpha,
    })
}

/// The discrete localized state, present only at resonant separations.
pub fn localized_state(params: &SystemParams) -> Option<LocalizedState> {
    let n = resonance_order(params, RESONANCE_TOL)?;
    let subspace = resonant_subspace(n);
    let a = params.retardation();
    // |alpha|^2 * (1 + gamma*d/v_g) = 1; alpha chosen real positive.
    let alpha = (1.0 / (1.0 + params.gamma_wg * a)).sqrt();
    let d_over_lambda = params.d / wavelength(params);
    // phase fixed by consistency with the scattering continuum: the t = 0
    // photon field of a bare-qubit state must vanish, which requires the
    // localized photon term to cancel the continuum's resonant spike
    let t0 = -C64::i() * (params.coupling_v() * alpha / params.v_g) * phase(PI * d_over_lambda);
    Some(LocalizedState {
        subspace,
        alpha,
        t0,
        energy: params.omega,
    })
}

/// Fraction of initial qubit population (in the resonant subspace) carried
/// by the localized state: `1 / (1 + 2*pi*(gamma/omega)*(d/lambda))`.
pub fn localized_fraction(params: &SystemParams) -> Result<f64, EigenError> {
    if resonance_order(params, RESONANCE_TOL).is_none() {
        return Err(EigenError::OffResonant);
    }
    let x = 2.0 * PI * (params.gamma_wg / params.omega) * (params.d / wavelength(params));
    Ok(1.0 / (1.0 + x))
}

/// Transmission and reflection amplitudes for a photon incident from the
/// left, reconstructed from the even/odd transmission coefficients.
///
/// At the localized pole (resonant `d`, `eps = omega`) the 0/0 in `t1` is
/// removable with limit `t1 -> 1`; that limit is used so the physically
/// continuous `(t, r)` is returned everywhere.
pub fn physical_transmission(params: &SystemParams, eps: f64) -> (C64, C64) {
    let t1 = |subspace: Subspace| -> C64 {
        match scattering_coeffs(params, subspace, eps) {
            Ok(c) => c.t1,
            Err(EigenError::LocalizedPole) => C64::new(1.0, 0.0),
            Err(_) => unreachable!(),
        }
    };
    let te = t1(Subspace::Even);
    let to = t1(Subspace::Odd);
    ((te + to) / 2.0, (te - to) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(gamma: f64, d_over_lambda: f64) -> SystemParams {
        SystemParams::from_paper_units(gamma, 0.0, d_over_lambda).unwrap()
    }

    #[test]
    fn resonant_even_point_values() {
        // even subspace, eps = omega, d = lambda: t0 = 0, t1 = -1, alpha = i V / gamma
        let p = params(0.01, 1.0);
        let c = scattering_coeffs(&p, Subspace::Even, p.omega).unwrap();
        assert_relative_eq!(c.t0.norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(c.t1.re, -1.0, epsilon = 1e-12);
        assert_relative_eq!(c.t1.im, 0.0, epsilon = 1e-12);
        let expect = C64::i() * p.coupling_v() / p.gamma_wg;
        assert_relative_eq!(c.alpha.re, expect.re, epsilon = 1e-9);
        assert_relative_eq!(c.alpha.im, expect.im, epsilon = 1e-9);
    }

    #[test]
    fn localized_pole_is_an_error() {
        let p = params(0.01, 1.0);
        assert_eq!(
            scattering_coeffs(&p, Subspace::Odd, p.omega).unwrap_err(),
            EigenError::LocalizedPole
        );
    }

    #[test]
    fn transmission_blocked_on_resonance() {
        // |t| = 0, |r| = 1 at eps = omega for any separation.
        for dl in [0.37, 0.6, 1.0, 2.4] {
            let p = params(0.02, dl);
            let (t, r) = physical_transmission(&p, p.omega);
            assert_relative_eq!(t.norm(), 0.0, epsilon = 1e-10);
            assert_relative_eq!(r.norm(), 1.0, epsilon = 1e-10);
        }
        // hand value at d = lambda: t1_even = -1, t1_odd = +1 (pole limit)
        let p = params(0.01, 1.0);
        let (t, r) = physical_transmission(&p, p.omega);
        assert_relative_eq!(t.norm(), 0.0, epsilon = 1e-12);
        assert_relative_eq!(r.re, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn transmission_recovered_far_from_resonance() {
        let p = params(0.001, 0.6);
        let (t, _) = physical_transmission(&p, p.omega + 300.0 * p.gamma_wg);
        assert!(t.norm() > 0.999, "|t| = {}", t.norm());
    }

    #[test]
    fn unitarity_of_t1_and_flux() {
        // |t1| = 1 and |t|^2 + |r|^2 = 1 on random (eps, d, gamma) triples.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let gamma: f64 = 10f64.powf(rng.gen_range(-4.0..-0.3));
            let dl: f64 = rng.gen_range(0.05..12.0);
            let p = params(gamma, dl);
            let eps = p.omega * rng.gen_range(0.2..1.8);
            for sub in Subspace::BOTH {
                if let Ok(c) = scattering_coeffs(&p, sub, eps) {
                    assert_relative_eq!(c.t1.norm(), 1.0, epsilon = 1e-12);
                }
            }
            let (t, r) = physical_transmission(&p, eps);
            assert_relative_eq!(t.norm_sqr() + r.norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn localized_state_norm_and_fraction() {
        for (gamma, dl) in [(0.01, 0.5), (0.05, 1.0), (0.5, 1.5), (0.2, 3.0)] {
            let p = params(gamma, dl);
            let loc = localized_state(&p).expect("resonant separation");
            let norm = loc.alpha * loc.alpha + loc.t0.norm_sqr() * p.d;
            assert_relative_eq!(norm, 1.0, epsilon = 1e-12);
            // |t0|^2 = (gamma / v_g) |alpha|^2
            assert_relative_eq!(
                loc.t0.norm_sqr(),
                p.gamma_wg / p.v_g * loc.alpha * loc.alpha,
                epsilon = 1e-14
            );
            let frac = localized_fraction(&p).unwrap();
            assert_relative_eq!(frac, loc.alpha * loc.alpha, epsilon = 1e-12);
        }
    }

    #[test]
    fn localized_fraction_values() {
        let p = params(0.01, 0.5);
        let f = localized_fraction(&p).unwrap();
        assert_relative_eq!(f, 1.0 / (1.0 + 0.01 * PI), epsilon = 1e-12);
        assert!(f > 0.95);

        let p = params(0.5, 0.5);
        assert_relative_eq!(
            localized_fraction(&p).unwrap(),
            1.0 / (1.0 + PI / 2.0),
            epsilon = 1e-12
        );

        // gamma -> 0 limit approaches 1
        let p = params(1e-9, 0.5);
        assert!(localized_fraction(&p).unwrap() > 1.0 - 1e-8);
    }

    #[test]
    fn no_localized_state_off_resonance() {
        let p = params(0.01, 0.6);
        assert!(localized_state(&p).is_none());
        assert_eq!(localized_fraction(&p), Err(EigenError::OffResonant));
    }

    #[test]
    fn coefficients_continuous_in_energy() {
        let p = params(0.03, 0.77);
        let mut prev = scattering_coeffs(&p, Subspace::Even, 0.8 * p.omega).unwrap();
        let n = 4000;
        for i in 1..=n {
            let eps = 0.8 * p.omega + 0.4 * p.omega * i as f64 / n as f64;
            let c = scattering_coeffs(&p, Subspace::Even, eps).unwrap();
            assert!((c.t0 - prev.t0).norm() < 0.05);
            assert!((c.t1 - prev.t1).norm() < 0.05);
            assert!((c.alpha - prev.alpha).norm() < 0.05 * p.coupling_v() / p.gamma_wg);
            prev = c;
        }
    }
}
