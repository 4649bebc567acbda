//! Markov-approximation reference dynamics for one initially excited qubit.
//!
//! In the Markovian limit the symmetric/antisymmetric qubit states decay
//! exponentially with rates `Gamma_pm = Gamma + 2*gamma*(1 +- cos(k*d))`
//! and acquire a coherent splitting `2g`, `g = gamma*sin(k*d)`, with
//! `k = omega/v_g`. This module provides those closed forms as the baseline
//! that the exact evolution is compared against.

use crate::model::SystemParams;
use crate::C64;

#[derive(Debug, Clone, Copy)]
pub struct MarkovRates {
    /// Decay rate of the symmetric (+) state.
    pub gamma_plus: f64,
    /// Decay rate of the antisymmetric (-) state.
    pub gamma_minus: f64,
    /// Coherent waveguide-mediated coupling.
    pub g: f64,
}

pub fn rates(params: &SystemParams) -> MarkovRates {
    let kd = params.omega * params.d / params.v_g;
    MarkovRates {
        gamma_plus: params.gamma_res + 2.0 * params.gamma_wg * (1.0 + kd.cos()),
        gamma_minus: params.gamma_res + 2.0 * params.gamma_wg * (1.0 - kd.cos()),
        g: params.gamma_wg * kd.sin(),
    }
}

/// One time sample of the Markovian density-matrix elements.
#[derive(Debug, Clone, Copy)]
pub struct MarkovPoint {
    pub t: f64,
    pub rho_pp: f64,
    pub rho_mm: f64,
    pub rho_pm: C64,
    pub concurrence: f64,
}

/// Populations and coherence at time `t` for the initial state with qubit 1
/// excited (equal superposition of + and -).
pub fn point(params: &SystemParams, t: f64) -> MarkovPoint {
    let r = rates(params);
    let rho_pp = 0.5 * (-r.gamma_plus * t).exp();
    let rho_mm = 0.5 * (-r.gamma_minus * t).exp();
    let total = params.gamma_res + 2.0 * params.gamma_wg;
    let rho_pm =
        0.5 * (-total * t).exp() * (C64::new(0.0, -2.0 * r.g * t)).exp();
    MarkovPoint {
        t,
        rho_pp,
        rho_mm,
        rho_pm,
        concurrence: concurrence(rho_pp, rho_mm, rho_pm),
    }
}

pub fn trajectory(params: &SystemParams, times: &[f64]) -> Vec<MarkovPoint> {
    times.iter().map(|&t| point(params, t)).collect()
}

/// Wooters concurrence restricted to the single-excitation sector with no
/// doubly-excited population.
pub fn concurrence(rho_pp: f64, rho_mm: f64, rho_pm: C64) -> f64 {
    0.5 * ((rho_pp - rho_mm).powi(2) + 4.0 * rho_pm.im.powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn resonant_rates() {
        // d = lambda: cos(kd) = 1, so the + state is superradiant at
        // Gamma + 4*gamma and the - state decays only to the reservoir.
        let p = SystemParams::from_paper_units(0.01, 0.1, 1.0).unwrap();
        let r = rates(&p);
        assert_relative_eq!(r.gamma_plus, p.gamma_res + 4.0 * p.gamma_wg, epsilon = 1e-12);
        assert_relative_eq!(r.gamma_minus, p.gamma_res, epsilon = 1e-9);
        assert_relative_eq!(r.g, 0.0, epsilon = 1e-9);

        // d = lambda/2: roles swap.
        let p = SystemParams::from_paper_units(0.01, 0.1, 0.5).unwrap();
        let r = rates(&p);
        assert_relative_eq!(r.gamma_minus, p.gamma_res + 4.0 * p.gamma_wg, epsilon = 1e-9);
        assert_relative_eq!(r.gamma_plus, p.gamma_res, epsilon = 1e-9);
    }

    #[test]
    fn initial_point_is_single_excited_qubit() {
        let p = SystemParams::from_paper_units(0.01, 0.1, 0.73).unwrap();
        let m = point(&p, 0.0);
        assert_relative_eq!(m.rho_pp, 0.5, epsilon = 1e-15);
        assert_relative_eq!(m.rho_mm, 0.5, epsilon = 1e-15);
        assert_relative_eq!(m.rho_pm.re, 0.5, epsilon = 1e-15);
        assert_relative_eq!(m.concurrence, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn concurrence_tends_to_subradiant_population() {
        // Resonant separation: at long times rho_mm dominates and
        // C -> rho_mm / ... here C = (rho_mm - rho_pp)/2 -> rho_mm/2.
        let p = SystemParams::from_paper_units(0.01, 0.1, 1.0).unwrap();
        let t = 300.0; // gamma*t = 3
        let m = point(&p, t);
        assert!(m.rho_pp < 1e-4 * m.rho_mm);
        assert_relative_eq!(m.concurrence, 0.5 * m.rho_mm, max_relative = 1e-3);
    }
}
