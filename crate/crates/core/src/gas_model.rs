//! Pressure laws, fluxes, characteristic speeds and Riemann invariants of the
//! barotropic Euler system
//!
//! ```text
//! ρ_t + m_x = 0,    m_t + (m²/ρ + p(ρ))_x = 0
//! ```
//!
//! with `p(ρ) = ρ^{2θ+1}/(2θ+1)` for `θ > 0` (the γ-law with `θ = (γ−1)/2`)
//! and `p(ρ) = ρ` for the isothermal gas `θ = 0`.
//!
//! Every evaluation follows the vacuum convention: at `ρ = 0` the momentum is
//! zero and fluxes and weak entropies vanish.

use crate::error::{domain, Error, Result};
use crate::EntropyPairValue;

/// Largest admissible `θ`. The limit analysis works on `θ ∈ (0, θ0]` for a
/// fixed `θ0 < 1`.
pub const THETA_MAX: f64 = 0.99;

/// The adiabatic parameter `θ = (γ − 1)/2 ∈ [0, THETA_MAX]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Theta(f64);

impl Theta {
    pub const ISOTHERMAL: Theta = Theta(0.0);

    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=THETA_MAX).contains(&theta) {
            return domain(format!("theta must lie in [0, {THETA_MAX}], got {theta}"));
        }
        Ok(Theta(theta))
    }

    /// Accepts `θ ∈ [0, 1]` (`γ ≤ 3`). The wave curves and the Riemann solver
    /// are valid there; the limit estimates need `θ ≤ THETA_MAX`.
    pub fn new_extended(theta: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=1.0).contains(&theta) {
            return domain(format!("theta must lie in [0, 1], got {theta}"));
        }
        Ok(Theta(theta))
    }

    /// Builds `θ` from the adiabatic exponent `γ = 1 + 2θ`.
    pub fn from_gamma(gamma: f64) -> Result<Self> {
        Self::new((gamma - 1.0) / 2.0)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn gamma(self) -> f64 {
        1.0 + 2.0 * self.0
    }

    #[inline]
    pub fn is_isothermal(self) -> bool {
        self.0 == 0.0
    }
}

/// Conserved unknowns `(ρ, m)`. Vacuum is stored as `(0, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConservedState {
    pub rho: f64,
    pub m: f64,
}

impl ConservedState {
    pub fn new(rho: f64, m: f64) -> Result<Self> {
        if !(rho.is_finite() && m.is_finite()) {
            return domain(format!("non-finite state ({rho}, {m})"));
        }
        if rho < 0.0 {
            return domain(format!("negative density {rho}"));
        }
        if rho == 0.0 && m != 0.0 {
            return domain(format!("vacuum state carries momentum {m}"));
        }
        Ok(Self { rho, m })
    }

    /// State from density and velocity; the velocity is dropped at vacuum.
    pub fn from_primitive(rho: f64, u: f64) -> Result<Self> {
        if rho == 0.0 {
            return Ok(Self::VACUUM);
        }
        Self::new(rho, rho * u)
    }

    pub const VACUUM: ConservedState = ConservedState { rho: 0.0, m: 0.0 };

    #[inline]
    pub fn is_vacuum(&self) -> bool {
        self.rho == 0.0
    }

    /// `u = m/ρ`, undefined at vacuum.
    #[inline]
    pub fn velocity(&self) -> Option<f64> {
        (self.rho > 0.0).then(|| self.m / self.rho)
    }
}

/// Uniform Riemann-invariant bound `w0 > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundBudget(f64);

impl BoundBudget {
    pub fn new(w0: f64) -> Result<Self> {
        if !(w0.is_finite() && w0 > 0.0) {
            return domain(format!("w0 must be positive, got {w0}"));
        }
        Ok(Self(w0))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

#[inline]
pub(crate) fn pressure_unchecked(theta: Theta, rho: f64) -> f64 {
    let t = theta.value();
    if t == 0.0 {
        rho
    } else if rho == 0.0 {
        0.0
    } else {
        rho.powf(2.0 * t + 1.0) / (2.0 * t + 1.0)
    }
}

#[inline]
pub(crate) fn sound_speed_unchecked(theta: Theta, rho: f64) -> f64 {
    if theta.is_isothermal() {
        1.0
    } else if rho == 0.0 {
        0.0
    } else {
        rho.powf(theta.value())
    }
}

/// `p'(ρ) = c(ρ)²`.
#[inline]
pub(crate) fn pressure_derivative(theta: Theta, rho: f64) -> f64 {
    let c = sound_speed_unchecked(theta, rho);
    c * c
}

pub fn pressure(theta: Theta, rho: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(pressure_unchecked(theta, rho))
}

/// `c(ρ) = ρ^θ`; identically one for the isothermal gas.
pub fn sound_speed(theta: Theta, rho: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(sound_speed_unchecked(theta, rho))
}

fn check_density(rho: f64) -> Result<()> {
    if rho.is_nan() || rho < 0.0 {
        return domain(format!("density must be nonnegative, got {rho}"));
    }
    Ok(())
}

/// `(ρ^θ − 1)/θ`, and `ln ρ` at `θ = 0`.
///
/// Evaluated as `expm1(θ ln ρ)/θ`, which stays accurate as `θ → 0`. At
/// vacuum the value is `−1/θ`; for the isothermal branch it is `−∞`, reported
/// as [`Error::NegativeInfinity`].
pub fn scaled_density(theta: Theta, rho: f64) -> Result<f64> {
    check_density(rho)?;
    scaled_density_log(theta, if rho == 0.0 { f64::NEG_INFINITY } else { rho.ln() })
}

/// [`scaled_density`] from `ln ρ`, for densities below the `f64` range.
pub fn scaled_density_log(theta: Theta, log_rho: f64) -> Result<f64> {
    let t = theta.value();
    if log_rho == f64::NEG_INFINITY {
        return if t == 0.0 {
            Err(Error::NegativeInfinity)
        } else {
            Ok(-1.0 / t)
        };
    }
    if t == 0.0 {
        Ok(log_rho)
    } else {
        Ok((t * log_rho).exp_m1() / t)
    }
}

/// Riemann invariants `(w1, w2)`.
///
/// `θ > 0`: `(u + ρ^θ/θ, u − ρ^θ/θ)`; `θ = 0`: `(ρ e^u, ρ e^{−u})`. The first
/// is constant across 1-rarefactions, the second across 2-rarefactions.
pub fn riemann_invariants(theta: Theta, state: &ConservedState) -> Result<(f64, f64)> {
    let u = state.velocity().ok_or(Error::VacuumInvariant)?;
    let t = theta.value();
    if t == 0.0 {
        Ok((state.rho * u.exp(), state.rho * (-u).exp()))
    } else {
        let r = state.rho.powf(t) / t;
        Ok((u + r, u - r))
    }
}

/// Shifted invariants `(u + (ρ^θ−1)/θ, u − (ρ^θ−1)/θ)`, which have the finite
/// limit `(u + ln ρ, u − ln ρ)` as `θ → 0`. These are the quantities bounded
/// by a [`BoundBudget`].
pub fn shifted_invariants(theta: Theta, state: &ConservedState) -> Result<(f64, f64)> {
    let u = state.velocity().ok_or(Error::VacuumInvariant)?;
    let s = scaled_density(theta, state.rho)?;
    Ok((u + s, u - s))
}

/// `|m|/ρ + (ρ^θ−1)/θ ≤ w0`. Vacuum always satisfies the budget.
pub fn invariant_budget(theta: Theta, state: &ConservedState, w0: BoundBudget) -> bool {
    budget_excess(theta, state, w0) <= 0.0
}

/// `|m|/ρ + (ρ^θ−1)/θ − w0`; negative infinity at vacuum.
pub fn budget_excess(theta: Theta, state: &ConservedState, w0: BoundBudget) -> f64 {
    match state.velocity() {
        None => f64::NEG_INFINITY,
        Some(u) => {
            // ρ > 0 here, so the scaled density is finite.
            let s = scaled_density(theta, state.rho).unwrap_or(f64::NEG_INFINITY);
            u.abs() + s - w0.value()
        }
    }
}

/// `ρ ≤ e^{w0} + slack`.
pub fn density_bound_holds(state: &ConservedState, w0: BoundBudget, slack: f64) -> bool {
    state.rho <= w0.value().exp() + slack
}

/// `|m| ≤ ρ(|ln ρ| + w0) + slack`.
pub fn momentum_bound_holds(state: &ConservedState, w0: BoundBudget, slack: f64) -> bool {
    if state.is_vacuum() {
        return state.m.abs() <= slack;
    }
    state.m.abs() <= state.rho * (state.rho.ln().abs() + w0.value()) + slack
}

/// Physical flux `(m, m²/ρ + p(ρ))`.
pub fn flux(theta: Theta, state: &ConservedState) -> (f64, f64) {
    if state.is_vacuum() {
        return (0.0, 0.0);
    }
    (
        state.m,
        state.m * state.m / state.rho + pressure_unchecked(theta, state.rho),
    )
}

/// Jacobian of the flux with respect to `(ρ, m)`.
pub fn flux_jacobian(theta: Theta, state: &ConservedState) -> [[f64; 2]; 2] {
    let u = state.velocity().unwrap_or(0.0);
    [
        [0.0, 1.0],
        [pressure_derivative(theta, state.rho) - u * u, 2.0 * u],
    ]
}

/// Characteristic speeds `(u − c, u + c)`.
///
/// At vacuum with `θ > 0` the velocity label is taken as zero; the isothermal
/// branch has no speeds at vacuum.
pub fn eigenvalues(theta: Theta, state: &ConservedState) -> Result<(f64, f64)> {
    let u = match state.velocity() {
        Some(u) => u,
        None if !theta.is_isothermal() => 0.0,
        None => return Err(Error::VacuumInvariant),
    };
    let c = sound_speed_unchecked(theta, state.rho);
    Ok((u - c, u + c))
}

/// Mechanical energy `η*` and its flux `q*`.
///
/// For `θ > 0`:
/// `η* = m²/(2ρ) + ρ(ρ^{2θ}−1)/(2θ(2θ+1))`,
/// `q* = m³/(2ρ²) + m((ρ^{2θ}−1)/(2θ) + 1/(2θ+1))`.
/// For `θ = 0` the pair is the pointwise limit: `η* = m²/(2ρ) + ρ ln ρ`,
/// `q* = m³/(2ρ²) + m(ln ρ + 1)`. Both vanish at `(ρ, m) = (1, 0)`.
pub fn mechanical_energy_pair(theta: Theta, state: &ConservedState) -> EntropyPairValue {
    let Some(u) = state.velocity() else {
        return EntropyPairValue::ZERO;
    };
    let rho = state.rho;
    let t = theta.value();
    let kinetic = 0.5 * rho * u * u;
    let kinetic_flux = 0.5 * rho * u * u * u;
    let ln_rho = rho.ln();
    let (internal, enthalpy) = if t == 0.0 {
        (rho * ln_rho, ln_rho + 1.0)
    } else {
        let g = (2.0 * t * ln_rho).exp_m1() / (2.0 * t);
        (rho * g / (2.0 * t + 1.0), g + 1.0 / (2.0 * t + 1.0))
    };
    EntropyPairValue {
        eta: kinetic + internal,
        q: kinetic_flux + state.m * enthalpy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn th(t: f64) -> Theta {
        Theta::new(t).unwrap()
    }

    #[test]
    fn theta_rejects_out_of_range() {
        assert!(Theta::new(-0.1).is_err());
        assert!(Theta::new(1.0).is_err());
        assert!(Theta::new(f64::NAN).is_err());
        assert_eq!(Theta::from_gamma(2.0).unwrap().value(), 0.5);
        assert_eq!(th(0.25).gamma(), 1.5);
    }

    #[test]
    fn state_vacuum_convention() {
        assert!(ConservedState::new(0.0, 1.0).is_err());
        assert!(ConservedState::new(-1.0, 0.0).is_err());
        assert_eq!(ConservedState::from_primitive(0.0, 5.0).unwrap(), ConservedState::VACUUM);
        assert_eq!(ConservedState::VACUUM.velocity(), None);
    }

    #[test]
    fn pressure_examples() {
        assert_eq!(pressure(th(0.0), 3.0).unwrap(), 3.0);
        assert_eq!(pressure(th(0.5), 1.0).unwrap(), 0.5);
        assert_eq!(pressure(th(0.3), 0.0).unwrap(), 0.0);
        assert_eq!(pressure(th(0.0), 0.0).unwrap(), 0.0);
        assert!(pressure(th(0.5), -1.0).is_err());
        // continuity at θ → 0
        assert_relative_eq!(pressure(th(1e-10), 2.5).unwrap(), 2.5, max_relative = 1e-8);
    }

    #[test]
    fn sound_speed_examples() {
        assert_eq!(sound_speed(th(0.0), 0.001).unwrap(), 1.0);
        assert_relative_eq!(sound_speed(th(0.5), 4.0).unwrap(), 2.0);
        assert_eq!(sound_speed(th(0.25), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn scaled_density_examples() {
        let e = std::f64::consts::E;
        assert!((scaled_density(th(1e-8), e).unwrap() - 1.0).abs() < 1e-7);
        assert_relative_eq!(scaled_density(th(0.9), 1.0).unwrap(), 0.0);
        assert_eq!(scaled_density(th(0.5), 0.0).unwrap(), -2.0);
        assert_eq!(scaled_density(th(0.0), 0.0), Err(Error::NegativeInfinity));
        assert_relative_eq!(scaled_density(th(0.0), e).unwrap(), 1.0);
    }

    #[test]
    fn scaled_density_theta_one() {
        // Theta::new caps at 0.99; the formula itself is checked at θ = 1.
        let v = (1.0f64 * 3.0f64.ln()).exp_m1() / 1.0;
        assert_relative_eq!(v, 2.0, max_relative = 1e-15);
        let tiny = scaled_density(th(1e-12), 7.0).unwrap();
        assert_relative_eq!(tiny, 7.0f64.ln(), max_relative = 1e-11);
    }

    #[test]
    fn riemann_invariant_examples() {
        let s = ConservedState::from_primitive(1.0, 0.0).unwrap();
        assert_eq!(riemann_invariants(th(0.0), &s).unwrap(), (1.0, 1.0));
        assert_eq!(riemann_invariants(th(0.5), &s).unwrap(), (2.0, -2.0));
        let s = ConservedState::from_primitive(2.0, 2f64.ln()).unwrap();
        let (w1, w2) = riemann_invariants(th(0.0), &s).unwrap();
        assert_relative_eq!(w1, 4.0, max_relative = 1e-15);
        assert_relative_eq!(w2, 1.0, max_relative = 1e-15);
        assert_eq!(
            riemann_invariants(th(0.5), &ConservedState::VACUUM),
            Err(Error::VacuumInvariant)
        );
    }

    #[test]
    fn budget_examples() {
        let w0 = BoundBudget::new(1.0).unwrap();
        assert!(invariant_budget(th(0.9), &ConservedState::new(1.0, 0.0).unwrap(), w0));
        assert!(!invariant_budget(th(0.9), &ConservedState::new(1.0, 2.0).unwrap(), w0));
        assert!(invariant_budget(th(0.0), &ConservedState::VACUUM, w0));
        assert!(BoundBudget::new(0.0).is_err());
    }

    #[test]
    fn flux_examples() {
        let s = ConservedState::new(1.0, 0.0).unwrap();
        assert_eq!(flux(th(0.0), &s), (0.0, 1.0));
        let s = ConservedState::new(2.0, 2.0).unwrap();
        let f = flux(th(0.5), &s);
        assert_eq!(f.0, 2.0);
        assert_relative_eq!(f.1, 4.0, max_relative = 1e-15);
        assert_eq!(flux(th(0.3), &ConservedState::VACUUM), (0.0, 0.0));
    }

    #[test]
    fn eigenvalue_examples() {
        let s = ConservedState::from_primitive(5.0, 0.0).unwrap();
        assert_eq!(eigenvalues(th(0.0), &s).unwrap(), (-1.0, 1.0));
        let s = ConservedState::from_primitive(4.0, 1.0).unwrap();
        let (a, b) = eigenvalues(th(0.5), &s).unwrap();
        assert_relative_eq!(a, -1.0);
        assert_relative_eq!(b, 3.0);
        assert_eq!(eigenvalues(th(0.5), &ConservedState::VACUUM).unwrap(), (0.0, 0.0));
        assert!(eigenvalues(th(0.0), &ConservedState::VACUUM).is_err());
    }

    #[test]
    fn energy_examples() {
        let e = mechanical_energy_pair(th(0.5), &ConservedState::new(1.0, 0.0).unwrap());
        assert_eq!((e.eta, e.q), (0.0, 0.0));
        // ρ(ρ^{2θ}−1)/(2θ(2θ+1)) = 2·1/2
        let e = mechanical_energy_pair(th(0.5), &ConservedState::new(2.0, 0.0).unwrap());
        assert_relative_eq!(e.eta, 1.0, max_relative = 1e-14);
        let e = mechanical_energy_pair(th(1e-6), &ConservedState::new(2.0, 0.0).unwrap());
        assert!((e.eta - 2.0 * 2f64.ln()).abs() < 1e-5);
        let e = mechanical_energy_pair(th(0.0), &ConservedState::new(1.0, 0.0).unwrap());
        assert_eq!((e.eta, e.q), (0.0, 0.0));
        let v = mechanical_energy_pair(th(0.2), &ConservedState::VACUUM);
        assert_eq!(v, EntropyPairValue::ZERO);
    }

    #[test]
    fn energy_matches_internal_energy_integral() {
        // ρ e(ρ) with e(ρ) = ∫_1^ρ p(τ)/τ² dτ, by composite Simpson.
        for &t in &[0.05, 0.3, 0.9] {
            let theta = th(t);
            let rho = 3.3;
            let n = 20_000;
            let h = (rho - 1.0) / n as f64;
            let f = |x: f64| pressure_unchecked(theta, x) / (x * x);
            let mut acc = f(1.0) + f(rho);
            for i in 1..n {
                let x = 1.0 + i as f64 * h;
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
            }
            let rho_e = rho * acc * h / 3.0;
            let e = mechanical_energy_pair(theta, &ConservedState::new(rho, 0.0).unwrap());
            assert_relative_eq!(e.eta, rho_e, max_relative = 1e-10);
        }
    }
}
