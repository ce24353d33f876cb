//! Prandtl-Colebrook friction factor and the pipe friction source term.

use std::f64::consts::LN_10;

/// Reynolds numbers below this are clamped; keeps λ finite as q → 0.
pub const RE_MIN: f64 = 100.0;

const TOL: f64 = 1e-12;
const MAX_ITER: usize = 50;

/// Reynolds number for mass flux `q_flux` [kg/(m²·s)].
#[inline]
pub fn reynolds(q_flux: f64, diameter: f64, viscosity: f64) -> f64 {
    diameter * q_flux.abs() / viscosity
}

/// Friction factor λ solving
/// `1/√λ = −2 log₁₀(2.51/(Re √λ) + k/(3.71 d))`.
///
/// `q_flux` is the mass flux ρ0·q/A. Reynolds numbers below [`RE_MIN`] use
/// λ(RE_MIN).
pub fn friction_lambda(q_flux: f64, diameter: f64, roughness: f64, viscosity: f64) -> f64 {
    let re = reynolds(q_flux, diameter, viscosity).max(RE_MIN);
    colebrook(re, roughness / (3.71 * diameter)).0
}

/// λ and dλ/dRe at a Reynolds number (already clamped by the caller).
///
/// Iterates on x = 1/√λ. The relaxation factor 1/(1 − g'(x)) is recomputed
/// each sweep, so the iteration converges in a handful of steps.
pub(crate) fn colebrook(re: f64, rel_rough: f64) -> (f64, f64) {
    let a = 2.51 / re;
    let g = |x: f64| -2.0 * (a * x + rel_rough).log10();
    let mut x = if rel_rough > 0.0 {
        -2.0 * rel_rough.log10()
    } else {
        // smooth pipe: start from λ = 0.02
        1.0 / 0.02_f64.sqrt()
    };
    for _ in 0..MAX_ITER {
        let gx = g(x);
        let dg = -2.0 / LN_10 * a / (a * x + rel_rough);
        let step = (gx - x) / (1.0 - dg);
        x += step;
        if step.abs() <= TOL * x.abs() {
            break;
        }
    }
    let lambda = 1.0 / (x * x);
    // implicit derivative of f(x, Re) = x + 2 log10(2.51 x / Re + r)
    let arg = a * x + rel_rough;
    let f_x = 1.0 + 2.0 / LN_10 * a / arg;
    let f_re = 2.0 / LN_10 * (-2.51 * x / (re * re)) / arg;
    let dx_dre = -f_re / f_x;
    let dlambda_dre = -2.0 / (x * x * x) * dx_dre;
    (lambda, dlambda_dre)
}

/// Geometry and material data of a pipe needed by the friction closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeFriction {
    pub diameter: f64,
    pub area: f64,
    pub roughness: f64,
    pub rho0: f64,
    pub viscosity: f64,
}

impl PipeFriction {
    /// `ρ0/A`, the factor converting volumetric standard flow into mass flux.
    #[inline]
    pub fn flux_factor(&self) -> f64 {
        self.rho0 / self.area
    }

    /// λ(q) and dλ/dq for volumetric flow `q` [m³/s].
    pub fn lambda(&self, q: f64) -> (f64, f64) {
        let c = self.flux_factor();
        let re = reynolds(c * q, self.diameter, self.viscosity);
        if re <= RE_MIN {
            let (l, _) = colebrook(RE_MIN, self.roughness / (3.71 * self.diameter));
            return (l, 0.0);
        }
        let (l, dl_dre) = colebrook(re, self.roughness / (3.71 * self.diameter));
        let dre_dq = self.diameter * c / self.viscosity * q.signum();
        (l, dl_dre * dre_dq)
    }

    /// Friction source of the flow equation in (ρ, q) variables:
    /// `S = −(λ(q)/(2d))·(ρ0/A)·q|q|/ρ`.
    ///
    /// This is the line-density friction term `−λ/(2d)·q_m|q_m|/ρ_l` divided
    /// by ρ0, so the scheme in (ρ, q) is the line-density system rescaled.
    pub fn source(&self, rho: f64, q: f64) -> f64 {
        let (l, _) = self.lambda(q);
        -l / (2.0 * self.diameter) * self.flux_factor() * q * q.abs() / rho
    }

    /// S together with ∂S/∂ρ and ∂S/∂q.
    pub fn source_with_derivatives(&self, rho: f64, q: f64) -> (f64, f64, f64) {
        let (l, dl) = self.lambda(q);
        let k = self.flux_factor() / (2.0 * self.diameter);
        let qq = q * q.abs();
        let s = -k * l * qq / rho;
        let ds_drho = k * l * qq / (rho * rho);
        let ds_dq = -k * (dl * qq + 2.0 * l * q.abs()) / rho;
        (s, ds_drho, ds_dq)
    }
}
