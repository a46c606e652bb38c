//! Weak entropy pairs.
//!
//! For `θ > 0` every weak entropy is generated by a weight `ψ` through the
//! kernel `χ^{(θ)}(ρ, u, s) = a_θ[(ρ^θ/θ)² − (s−u)²]_+^λ`, `λ = (1−θ)/(2θ)`:
//!
//! ```text
//! η = ∫ χ ψ(s) ds = ρ⟨ψ(u + (ρ^θ/θ)τ)⟩,    q = ρ⟨(u + ρ^θ τ) ψ(u + (ρ^θ/θ)τ)⟩
//! ```
//!
//! where `⟨·⟩` is the probability average against `[1−τ²]^λ`. The constant
//! `a_θ` cancels in this form and is only needed by [`kernel_chi`].
//!
//! The isothermal gas has the exponential family
//! `η_ξ = ρ^{1/(1−ξ²)} e^{ξu/(1−ξ²)}`, `q_ξ = (u + ξ)η_ξ`, and the ξ-entropies
//! of the `θ > 0` systems converge to it at rate `√θ` for
//! `|ξ| < √2 − 1`.

use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Error, Result};
use crate::gas_model::{
    flux_jacobian, invariant_budget, mechanical_energy_pair, pressure_unchecked,
    scaled_density, BoundBudget, ConservedState, Theta,
};
use crate::quadrature::{
    integrate_adaptive, weight_exponent, Averager, KernelMeasure, QuadratureSpec,
};
use crate::EntropyPairValue;

/// `√2 − 1`, the edge of the ξ-range carrying the limit entropy inequality.
pub const XI_LIMIT: f64 = std::f64::consts::SQRT_2 - 1.0;

/// Argument of the kernel `χ^{(θ)}(ρ, u, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub theta: Theta,
    pub rho: f64,
    pub u: f64,
    pub s: f64,
}

/// `ln a_θ = (1/θ) ln θ − ln B(1/2, λ+1)`.
pub fn log_kernel_normalization(theta: Theta) -> Result<f64> {
    let t = theta.value();
    if t == 0.0 {
        return Err(Error::Unsupported("kernel normalization"));
    }
    let lambda = weight_exponent(t);
    let log_beta = 0.5 * std::f64::consts::PI.ln() + ln_gamma(lambda + 1.0) - ln_gamma(lambda + 1.5);
    Ok(t.ln() / t - log_beta)
}

/// Entropy kernel `χ^{(θ)} ≥ 0`, evaluated in log space.
pub fn kernel_chi(point: KernelPoint) -> Result<f64> {
    let t = point.theta.value();
    if t == 0.0 {
        return Err(Error::Unsupported("entropy kernel"));
    }
    if !(point.rho >= 0.0) {
        return domain(format!("density must be nonnegative, got {}", point.rho));
    }
    if point.rho == 0.0 {
        return Ok(0.0);
    }
    let radius = point.rho.powf(t) / t;
    let d = (point.s - point.u).abs();
    if d >= radius {
        return Ok(0.0);
    }
    let lambda = weight_exponent(t);
    let log_gap = (radius - d).ln() + (radius + d).ln();
    Ok((log_kernel_normalization(point.theta)? + lambda * log_gap).exp())
}

/// Generating weight `ψ(s)` of a weak entropy.
#[derive(Debug, Clone, PartialEq)]
pub enum EntropyWeight {
    /// `Σ c_k s^k`, coefficients in increasing degree.
    Polynomial(Vec<f64>),
    /// `ψ*(s) = s²/2 − 1/(2θ(2θ+1))`, which generates the mechanical energy.
    EnergyStar,
    /// `ψ^{(θ)}_ξ(s) = e^{ξs/(1−ξ²)} / ⟨e^{ξτ/(θ(1−ξ²))}⟩`, generating the
    /// ξ-entropies.
    ExpXi(f64),
    /// Natural cubic spline through `(s, ψ)` samples, extended linearly.
    Tabulated(Vec<(f64, f64)>),
}

impl EntropyWeight {
    /// Resolves the θ-dependent constants so `ψ` can be evaluated cheaply.
    pub fn prepare(&self, theta: Theta, quad: &QuadratureSpec) -> Result<PreparedWeight> {
        let t = theta.value();
        match self {
            EntropyWeight::Polynomial(c) => {
                if c.is_empty() {
                    return domain("polynomial weight needs at least one coefficient");
                }
                Ok(PreparedWeight::Polynomial(c.clone()))
            }
            EntropyWeight::EnergyStar => {
                if t == 0.0 {
                    return Err(Error::Unsupported("psi* weight"));
                }
                Ok(PreparedWeight::Polynomial(vec![
                    -1.0 / (2.0 * t * (2.0 * t + 1.0)),
                    0.0,
                    0.5,
                ]))
            }
            EntropyWeight::ExpXi(xi) => {
                let a = xi_exponent(*xi)?;
                if t == 0.0 {
                    return Err(Error::Unsupported("theta xi weight"));
                }
                let z = KernelMeasure::for_theta(theta, 0.0)?
                    .averager(quad)?
                    .mean(|tau| (a / t * tau).exp())?;
                Ok(PreparedWeight::Exp { rate: a, scale: 1.0 / z })
            }
            EntropyWeight::Tabulated(samples) => Ok(PreparedWeight::Spline(Spline::new(samples)?)),
        }
    }
}

/// An [`EntropyWeight`] with its constants resolved for one `θ`.
#[derive(Debug, Clone, PartialEq)]
pub enum PreparedWeight {
    Polynomial(Vec<f64>),
    Exp { rate: f64, scale: f64 },
    Spline(Spline),
}

impl PreparedWeight {
    pub fn value(&self, s: f64) -> f64 {
        self.derivatives(s)[0]
    }

    /// `[ψ, ψ', ψ'']` at `s`.
    pub fn derivatives(&self, s: f64) -> [f64; 3] {
        match self {
            PreparedWeight::Polynomial(c) => {
                let mut v = [0.0; 3];
                for &ck in c.iter().rev() {
                    v[2] = v[2] * s + 2.0 * v[1];
                    v[1] = v[1] * s + v[0];
                    v[0] = v[0] * s + ck;
                }
                v
            }
            PreparedWeight::Exp { rate, scale } => {
                let e = scale * (rate * s).exp();
                [e, rate * e, rate * rate * e]
            }
            PreparedWeight::Spline(sp) => sp.derivatives(s),
        }
    }
}

/// Natural cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl Spline {
    fn new(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return domain("tabulated weight needs at least two samples");
        }
        let (x, y): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        if x.windows(2).any(|w| !(w[1] > w[0])) || y.iter().any(|v| !v.is_finite()) {
            return domain("tabulated weight needs strictly increasing abscissae and finite values");
        }
        let n = x.len();
        // Second derivatives from the tridiagonal system, natural ends.
        let mut m = vec![0.0; n];
        if n > 2 {
            let mut c = vec![0.0; n];
            let mut d = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let rhs = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
                let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
                c[i] = h1 / diag;
                d[i] = (rhs - h0 * d[i - 1]) / diag;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        Ok(Self { x, y, m })
    }

    fn derivatives(&self, s: f64) -> [f64; 3] {
        let n = self.x.len();
        let slope = |i: usize| {
            let h = self.x[i + 1] - self.x[i];
            (self.y[i + 1] - self.y[i]) / h - h * (2.0 * self.m[i] + self.m[i + 1]) / 6.0
        };
        if s <= self.x[0] {
            let d = slope(0);
            return [self.y[0] + d * (s - self.x[0]), d, 0.0];
        }
        if s >= self.x[n - 1] {
            let h = self.x[n - 1] - self.x[n - 2];
            let d = (self.y[n - 1] - self.y[n - 2]) / h + h * (self.m[n - 2] + 2.0 * self.m[n - 1]) / 6.0;
            return [self.y[n - 1] + d * (s - self.x[n - 1]), d, 0.0];
        }
        let i = self.x.partition_point(|&v| v <= s).saturating_sub(1).min(n - 2);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - s) / h;
        let b = (s - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let v = a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let d = (self.y[i + 1] - self.y[i]) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        [v, d, a * m0 + b * m1]
    }
}

/// `ξ/(1−ξ²)`, checking `|ξ| < 1`.
fn xi_exponent(xi: f64) -> Result<f64> {
    if !(xi.abs() < 1.0) {
        return domain(format!("xi must satisfy |xi| < 1, got {xi}"));
    }
    Ok(xi / (1.0 - xi * xi))
}

/// Weak entropy pair generated by `psi`, through the normalized τ-average.
pub fn weak_entropy_pair(
    theta: Theta,
    state: &ConservedState,
    psi: &EntropyWeight,
    quad: &QuadratureSpec,
) -> Result<EntropyPairValue> {
    if theta.is_isothermal() {
        return Err(Error::Unsupported("kernel representation of entropy pairs"));
    }
    let weight = psi.prepare(theta, quad)?;
    let averager = KernelMeasure::for_theta(theta, 0.0)?.averager(quad)?;
    pair_from_weight(theta, state, &weight, &averager)
}

fn pair_from_weight(
    theta: Theta,
    state: &ConservedState,
    weight: &PreparedWeight,
    averager: &Averager,
) -> Result<EntropyPairValue> {
    let Some(u) = state.velocity() else {
        return Ok(EntropyPairValue::ZERO);
    };
    let c = state.rho.powf(theta.value());
    let radius = c / theta.value();
    let (a, b) = averager.mean_pair(|tau| {
        let p = weight.value(u + radius * tau);
        (p, (u + c * tau) * p)
    })?;
    Ok(EntropyPairValue {
        eta: state.rho * a,
        q: state.rho * b,
    })
}

/// `∫ s² χ ds`, which equals `m²/ρ + ρ^{2θ+1}/(θ(1+2θ))`.
pub fn second_moment_identity(theta: Theta, state: &ConservedState, quad: &QuadratureSpec) -> Result<f64> {
    let psi = EntropyWeight::Polynomial(vec![0.0, 0.0, 1.0]);
    Ok(weak_entropy_pair(theta, state, &psi, quad)?.eta)
}

/// Closed form of [`second_moment_identity`].
pub fn second_moment_closed_form(theta: Theta, state: &ConservedState) -> f64 {
    let Some(u) = state.velocity() else { return 0.0 };
    let t = theta.value();
    state.rho * u * u + state.rho.powf(2.0 * t + 1.0) / (t * (1.0 + 2.0 * t))
}

/// Isothermal pair `η_ξ = ρ^{1/(1−ξ²)} e^{ξu/(1−ξ²)}`, `q_ξ = (u + ξ)η_ξ`.
pub fn isothermal_entropy_xi(state: &ConservedState, xi: f64) -> Result<EntropyPairValue> {
    let a = xi_exponent(xi)?;
    let Some(u) = state.velocity() else {
        return Ok(EntropyPairValue::ZERO);
    };
    let eta = (state.rho.ln() / (1.0 - xi * xi) + a * u).exp();
    Ok(EntropyPairValue { eta, q: (u + xi) * eta })
}

/// `∫ (η_ξ, q_ξ) ψ(ξ) dξ` for `ψ` supported in `[lo, hi] ⊂ (−1, 1)`.
pub fn isothermal_family_pair(
    state: &ConservedState,
    psi: impl Fn(f64) -> f64,
    support: (f64, f64),
) -> Result<EntropyPairValue> {
    let (lo, hi) = support;
    if !(-1.0 < lo && lo < hi && hi < 1.0) {
        return domain(format!("support [{lo}, {hi}] must lie strictly inside (-1, 1)"));
    }
    if state.is_vacuum() {
        return Ok(EntropyPairValue::ZERO);
    }
    let component = |k: usize| -> Result<f64> {
        let f = |xi: f64| {
            let p = isothermal_entropy_xi(state, xi).expect("xi inside (-1, 1)");
            psi(xi) * if k == 0 { p.eta } else { p.q }
        };
        // A coarse pass on |f| sets the absolute floor for sign-changing f.
        let mass = integrate_adaptive(|x| f(x).abs(), &[lo, hi], 1e-6, 0.0)?;
        integrate_adaptive(f, &[lo, hi], 1e-12, 1e-13 * mass)
    };
    Ok(EntropyPairValue {
        eta: component(0)?,
        q: component(1)?,
    })
}

/// ξ-entropy pair of a `θ > 0` system with its averaging rule built once.
///
/// The tilted measure `ν ∝ e^{ξτ/(θ(1−ξ²))}[1−τ²]^λ` is discretized at
/// construction; each evaluation is then
///
/// ```text
/// η = ρ e^{ξu/(1−ξ²)} ⟨e^{ξ τ (ρ^θ−1)/(θ(1−ξ²))}⟩_ν
/// ```
///
/// with the largest exponent pulled out in front so nothing overflows.
#[derive(Debug, Clone)]
pub struct ThetaXiPair {
    theta: Theta,
    xi: f64,
    rate: f64,
    averager: Averager,
}

impl ThetaXiPair {
    pub fn new(theta: Theta, xi: f64, quad: &QuadratureSpec) -> Result<Self> {
        let rate = xi_exponent(xi)?;
        let t = theta.value();
        if t == 0.0 {
            return Err(Error::Unsupported("theta xi entropy"));
        }
        let averager = KernelMeasure::for_theta(theta, rate / t)?.averager(quad)?;
        Ok(Self { theta, xi, rate, averager })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn evaluate(&self, state: &ConservedState) -> Result<EntropyPairValue> {
        let Some(u) = state.velocity() else {
            return Ok(EntropyPairValue::ZERO);
        };
        let t = self.theta.value();
        let sd = scaled_density(self.theta, state.rho)?;
        let c = 1.0 + t * sd;
        let g = self.rate * sd;
        let (a, b) = self.averager.mean_pair(|tau| {
            let e = (g * (tau - g.signum())).exp();
            (e, (u + c * tau) * e)
        })?;
        let front = (state.rho.ln() + self.rate * u + g.abs()).exp();
        Ok(EntropyPairValue {
            eta: front * a,
            q: front * b,
        })
    }
}

/// `(η^{(θ)}_ξ, q^{(θ)}_ξ)`.
pub fn theta_entropy_xi(
    theta: Theta,
    state: &ConservedState,
    xi: f64,
    quad: &QuadratureSpec,
) -> Result<EntropyPairValue> {
    ThetaXiPair::new(theta, xi, quad)?.evaluate(state)
}

/// `f_ξ(τ) = ρ e^{ξu/(1−ξ²)}(e^{ξτ(ρ^θ−1)/(θ(1−ξ²))} − ρ^{ξ²/(1−ξ²)})`.
///
/// Its average against the tilted measure is `η^{(θ)}_ξ − η_ξ`, and
/// `f_ξ(ξ) = O(θ)`.
pub fn f_xi(theta: Theta, state: &ConservedState, xi: f64, tau: f64) -> Result<f64> {
    if theta.is_isothermal() {
        return Err(Error::Unsupported("f_xi"));
    }
    if !(xi.abs() <= XI_LIMIT) {
        return domain(format!("xi must satisfy |xi| <= sqrt(2) - 1, got {xi}"));
    }
    if !(-1.0..=1.0).contains(&tau) {
        return domain(format!("tau must lie in [-1, 1], got {tau}"));
    }
    let Some(u) = state.velocity() else { return Ok(0.0) };
    let a = xi / (1.0 - xi * xi);
    let sd = scaled_density(theta, state.rho)?;
    let ln_rho = state.rho.ln();
    // Difference of exponentials as expm1 of the exponent gap.
    let hi = a * sd * tau;
    let lo = xi * a * ln_rho;
    Ok((ln_rho + a * u + lo).exp() * (hi - lo).exp_m1())
}

/// `(|η^{(θ)}_ξ − η_ξ|, |q^{(θ)}_ξ − q_ξ|)` at a state inside the invariant
/// region.
///
/// The `√θ` estimate only holds for states obeying the budget `w0` and for
/// `|ξ| ≤ √2 − 1 − margin`; both are checked.
pub fn entropy_gap(
    theta: Theta,
    state: &ConservedState,
    xi: f64,
    w0: BoundBudget,
    margin: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    check_xi_margin(xi, margin)?;
    check_budget(theta, state, w0)?;
    gap_with(&ThetaXiPair::new(theta, xi, quad)?, state)
}

pub(crate) fn check_xi_margin(xi: f64, margin: f64) -> Result<()> {
    if !(margin > 0.0) || !(xi.abs() <= XI_LIMIT - margin) {
        return domain(format!(
            "xi = {xi} must satisfy |xi| <= sqrt(2) - 1 - margin with margin > 0 (margin = {margin})"
        ));
    }
    Ok(())
}

fn check_budget(theta: Theta, state: &ConservedState, w0: BoundBudget) -> Result<()> {
    // Relative slack absorbs rounding of states sampled on the boundary.
    let slack = BoundBudget::new(w0.value() * (1.0 + 1e-12) + 1e-12)?;
    if !invariant_budget(theta, state, slack) {
        return Err(Error::Precondition {
            w0: w0.value(),
            detail: format!("state ({}, {}) lies outside the invariant region", state.rho, state.m),
        });
    }
    Ok(())
}

/// Gap at one state for a prebuilt pair; no precondition checks.
pub(crate) fn gap_with(pair: &ThetaXiPair, state: &ConservedState) -> Result<(f64, f64)> {
    let a = pair.evaluate(state)?;
    let b = isothermal_entropy_xi(state, pair.xi)?;
    Ok(((a.eta - b.eta).abs(), (a.q - b.q).abs()))
}

/// `(|η*^{(θ)} − η*^{(0)}|, |q*^{(θ)} − q*^{(0)}|)`.
pub fn energy_gap(theta: Theta, state: &ConservedState) -> (f64, f64) {
    let a = mechanical_energy_pair(theta, state);
    let b = mechanical_energy_pair(Theta::ISOTHERMAL, state);
    ((a.eta - b.eta).abs(), (a.q - b.q).abs())
}

/// Which entropy pair a diagnostic evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairSelector {
    EnergyStar,
    Xi(f64),
}

impl PairSelector {
    /// Builds an evaluator for this pair at `θ` (isothermal ξ-pairs at `θ = 0`).
    pub fn evaluator(self, theta: Theta) -> Result<PairEvaluator> {
        match self {
            PairSelector::EnergyStar => Ok(PairEvaluator::Energy(theta)),
            PairSelector::Xi(xi) if theta.is_isothermal() => {
                xi_exponent(xi)?;
                Ok(PairEvaluator::Isothermal(xi))
            }
            PairSelector::Xi(xi) => Ok(PairEvaluator::ThetaXi(ThetaXiPair::new(
                theta,
                xi,
                &QuadratureSpec::for_theta(theta),
            )?)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum PairEvaluator {
    Energy(Theta),
    Isothermal(f64),
    ThetaXi(ThetaXiPair),
}

impl PairEvaluator {
    pub fn evaluate(&self, state: &ConservedState) -> Result<EntropyPairValue> {
        match self {
            PairEvaluator::Energy(theta) => Ok(mechanical_energy_pair(*theta, state)),
            PairEvaluator::Isothermal(xi) => isothermal_entropy_xi(state, *xi),
            PairEvaluator::ThetaXi(p) => p.evaluate(state),
        }
    }
}

/// Max-norm of `∇q − ∇η ∇F`, gradients by fourth-order central differences
/// of step `h` in `(ρ, m)`.
pub fn compatibility_residual(
    theta: Theta,
    state: &ConservedState,
    pair: impl Fn(&ConservedState) -> Result<EntropyPairValue>,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0) || !(state.rho > 2.0 * h) {
        return domain(format!("need rho > 2h > 0 (rho = {}, h = {h})", state.rho));
    }
    let at = |dr: f64, dm: f64| pair(&ConservedState { rho: state.rho + dr, m: state.m + dm });
    let diff = |dir: (f64, f64)| -> Result<EntropyPairValue> {
        let p1 = at(h * dir.0, h * dir.1)?;
        let m1 = at(-h * dir.0, -h * dir.1)?;
        let p2 = at(2.0 * h * dir.0, 2.0 * h * dir.1)?;
        let m2 = at(-2.0 * h * dir.0, -2.0 * h * dir.1)?;
        let d = |a: f64, b: f64, c: f64, e: f64| (8.0 * (a - b) - (c - e)) / (12.0 * h);
        Ok(EntropyPairValue {
            eta: d(p1.eta, m1.eta, p2.eta, m2.eta),
            q: d(p1.q, m1.q, p2.q, m2.q),
        })
    };
    let dr = diff((1.0, 0.0))?;
    let dm = diff((0.0, 1.0))?;
    let (eta_r, q_r, eta_m, q_m) = (dr.eta, dr.q, dm.eta, dm.q);
    let j = flux_jacobian(theta, state);
    let r0 = q_r - (eta_r * j[0][0] + eta_m * j[1][0]);
    let r1 = q_m - (eta_r * j[0][1] + eta_m * j[1][1]);
    Ok(r0.abs().max(r1.abs()))
}

/// Affine pair `(αρ + βm, αm + β(m²/ρ + p))`, an entropy of every system.
pub fn affine_pair(theta: Theta, alpha: f64, beta: f64, state: &ConservedState) -> EntropyPairValue {
    let Some(u) = state.velocity() else {
        return EntropyPairValue::ZERO;
    };
    EntropyPairValue {
        eta: alpha * state.rho + beta * state.m,
        q: alpha * state.m + beta * (state.m * u + pressure_unchecked(theta, state.rho)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas_model::THETA_MAX;
    use crate::quadrature::QuadMode;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn th(t: f64) -> Theta {
        Theta::new(t).unwrap()
    }

    fn st(rho: f64, u: f64) -> ConservedState {
        ConservedState::from_primitive(rho, u).unwrap()
    }

    fn oracle() -> QuadratureSpec {
        QuadratureSpec::oracle(1e-13)
    }

    /// `∫ s^k χ ds` straight in the kinetic variable.
    fn kernel_moment(theta: f64, rho: f64, u: f64, k: i32) -> f64 {
        let r = rho.powf(theta) / theta;
        let f = |s: f64| {
            kernel_chi(KernelPoint { theta: th(theta), rho, u, s }).unwrap() * s.powi(k)
        };
        let floor = 1e-13 * rho * (u.abs() + r).powi(k);
        integrate_adaptive(f, &[u - r, u, u + r], 1e-13, floor).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let p = |s| KernelPoint { theta: th(0.5), rho: 1.0, u: 0.0, s };
        assert_eq!(kernel_chi(p(3.0)).unwrap(), 0.0);
        assert_eq!(kernel_chi(p(0.7)).unwrap(), kernel_chi(p(-0.7)).unwrap());
        assert_relative_eq!(kernel_moment(0.5, 1.0, 0.0, 0), 1.0, max_relative = 1e-11);
        assert!(kernel_chi(KernelPoint { theta: th(0.0), rho: 1.0, u: 0.0, s: 0.0 }).is_err());
    }

    #[test]
    fn kernel_moments_on_grid() {
        for &t in &[0.05, 0.25, 0.5, 0.75, 0.9] {
            for &rho in &[0.01, 0.3, 1.0, 2.5, 7.0] {
                for &u in &[-2.0, -0.7, 0.0, 0.4, 1.9] {
                    assert_relative_eq!(kernel_moment(t, rho, u, 0), rho, max_relative = 1e-10);
                    let m1 = kernel_moment(t, rho, u, 1);
                    assert!((m1 - rho * u).abs() <= 1e-10 * rho * (1.0 + u.abs()));
                }
            }
        }
    }

    #[test]
    fn second_moment_matches_oracle() {
        // Closed form confirmed against the s-integral of s²χ first.
        let pts = [
            (0.5, 1.0, 0.0),
            (0.07, 0.4, 1.2),
            (0.13, 3.1, -0.8),
            (0.31, 0.05, 0.3),
            (0.44, 6.0, -1.9),
            (0.62, 1.7, 0.9),
            (0.8, 0.2, -0.1),
            (0.95, 2.2, 1.5),
            (0.2, 1.0, 0.0),
            (0.9, 1.0, 0.0),
        ];
        for &(t, rho, u) in &pts {
            let s = st(rho, u);
            let direct = kernel_moment(t, rho, u, 2);
            let closed = second_moment_closed_form(th(t), &s);
            assert_relative_eq!(direct, closed, max_relative = 1e-10);
            let quad = second_moment_identity(th(t), &s, &QuadratureSpec::for_theta(th(t))).unwrap();
            assert_relative_eq!(quad, closed, max_relative = 1e-12);
        }
        assert_relative_eq!(second_moment_closed_form(th(0.5), &st(1.0, 0.0)), 1.0);
        let v = second_moment_identity(th(0.5), &ConservedState::VACUUM, &QuadratureSpec::for_theta(th(0.5)));
        assert_eq!(v.unwrap(), 0.0);
    }

    #[test]
    fn kernel_solves_entropy_equation() {
        // χ_ρρ − ρ^{2θ−2} χ_uu = 0 inside the support, θ ≤ 0.2.
        let h = 1e-3;
        for &t in &[0.1, 0.2] {
            for &(rho, u, frac) in &[(1.0f64, 0.0, 0.3), (1.5, 0.4, -0.45), (0.7, -0.2, 0.1)] {
                let s = u + frac * rho.powf(t) / t;
                let chi = |r: f64, v: f64| kernel_chi(KernelPoint { theta: th(t), rho: r, u: v, s }).unwrap();
                let c0 = chi(rho, u);
                let crr = (chi(rho + h, u) - 2.0 * c0 + chi(rho - h, u)) / (h * h);
                let cuu = (chi(rho, u + h) - 2.0 * c0 + chi(rho, u - h)) / (h * h);
                let res = crr - rho.powf(2.0 * t - 2.0) * cuu;
                assert!(res.abs() <= 1e-3, "residual {res} at theta {t}");
            }
        }
    }

    #[test]
    fn weak_pair_trivial_weights() {
        for &t in &[0.01, 0.3, 0.9] {
            let q = QuadratureSpec::for_theta(th(t));
            let s = st(2.0, -0.6);
            let one = weak_entropy_pair(th(t), &s, &EntropyWeight::Polynomial(vec![1.0]), &q).unwrap();
            assert_relative_eq!(one.eta, 2.0, max_relative = 1e-13);
            assert_relative_eq!(one.q, s.m, max_relative = 1e-12);
            let lin = weak_entropy_pair(th(t), &s, &EntropyWeight::Polynomial(vec![0.0, 1.0]), &q).unwrap();
            assert_relative_eq!(lin.eta, s.m, max_relative = 1e-12);
        }
    }

    #[test]
    fn energy_star_weight_reproduces_mechanical_energy() {
        for &t in &[1e-3, 0.02, 0.2, 0.5, 0.9] {
            let q = QuadratureSpec::for_theta(th(t));
            for &(rho, u) in &[(0.001, 1.5), (0.5, -1.0), (3.0, 0.2), (7.0, -2.0)] {
                let s = st(rho, u);
                let a = weak_entropy_pair(th(t), &s, &EntropyWeight::EnergyStar, &q).unwrap();
                let b = mechanical_energy_pair(th(t), &s);
                assert_relative_eq!(a.eta, b.eta, max_relative = 1e-9);
                assert_relative_eq!(a.q, b.q, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn isothermal_xi_examples() {
        let s = st(2.5, 0.3);
        let p = isothermal_entropy_xi(&s, 0.0).unwrap();
        assert_relative_eq!(p.eta, 2.5, max_relative = 1e-15);
        assert_relative_eq!(p.q, s.m, max_relative = 1e-15);
        let p = isothermal_entropy_xi(&st(1.0, 0.0), 0.5).unwrap();
        assert_eq!((p.eta, p.q), (1.0, 0.5));
        assert_eq!(isothermal_entropy_xi(&ConservedState::VACUUM, 0.4).unwrap(), EntropyPairValue::ZERO);
        assert!(isothermal_entropy_xi(&s, 1.0).is_err());
    }

    #[test]
    fn family_pair_concentrates_on_narrow_bump() {
        let s = st(1.8, -0.4);
        let xi0 = 0.2;
        let exact = isothermal_entropy_xi(&s, xi0).unwrap();
        let bump = |w: f64| {
            move |xi: f64| {
                let z = (xi - xi0) / w;
                if z.abs() < 1.0 {
                    // Normalized quartic kernel, unit mass.
                    15.0 / 16.0 * (1.0 - z * z).powi(2) / w
                } else {
                    0.0
                }
            }
        };
        let mut errs = Vec::new();
        for &w in &[0.04, 0.02, 0.01] {
            let p = isothermal_family_pair(&s, bump(w), (-0.5, 0.5)).unwrap();
            errs.push((p.eta - exact.eta).abs());
        }
        // Second-order convergence in the width.
        assert!(errs[0] / errs[1] > 3.5 && errs[1] / errs[2] > 3.5, "{errs:?}");
        assert!(errs[2] < 1e-4 * exact.eta);
        assert!(isothermal_family_pair(&s, |_| 1.0, (-1.0, 0.5)).is_err());
        let v = isothermal_family_pair(&ConservedState::VACUUM, bump(0.1), (-0.5, 0.5)).unwrap();
        assert_eq!(v, EntropyPairValue::ZERO);
    }

    #[test]
    fn theta_xi_reduces_at_zero() {
        let s = st(1.7, 0.8);
        for &t in &[1e-4, 0.03, 0.5] {
            let p = theta_entropy_xi(th(t), &s, 0.0, &QuadratureSpec::for_theta(th(t))).unwrap();
            assert_relative_eq!(p.eta, 1.7, max_relative = 1e-13);
            assert_relative_eq!(p.q, s.m, max_relative = 1e-12);
        }
        let v = theta_entropy_xi(th(0.3), &ConservedState::VACUUM, 0.3, &QuadratureSpec::for_theta(th(0.3)));
        assert_eq!(v.unwrap(), EntropyPairValue::ZERO);
    }

    #[test]
    fn theta_xi_two_paths_agree() {
        let t = th(0.5);
        let q = QuadratureSpec::for_theta(t);
        for &(rho, u, xi) in &[(1.0, 0.0, 0.3), (2.2, -0.5, -0.35), (0.3, 0.9, 0.1)] {
            let s = st(rho, u);
            let a = theta_entropy_xi(t, &s, xi, &q).unwrap();
            let b = weak_entropy_pair(t, &s, &EntropyWeight::ExpXi(xi), &q).unwrap();
            assert_relative_eq!(a.eta, b.eta, max_relative = 1e-9);
            assert_relative_eq!(a.q, b.q, max_relative = 1e-9);
        }
    }

    #[test]
    fn theta_xi_fixed_rules_match_oracle() {
        for &t in &[1e-4, 1e-3, 0.01, 0.049, 0.05, 0.2, 0.9] {
            for &(rho, u, xi) in &[(0.02, 1.1, 0.35), (1.0, 0.0, -0.2), (4.5, -0.3, 0.4)] {
                let s = st(rho, u);
                let a = theta_entropy_xi(th(t), &s, xi, &QuadratureSpec::for_theta(th(t))).unwrap();
                let b = theta_entropy_xi(th(t), &s, xi, &oracle()).unwrap();
                assert_relative_eq!(a.eta, b.eta, max_relative = 1e-10);
                assert_relative_eq!(a.q, b.q, max_relative = 1e-10, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn theta_xi_frozen_values() {
        // Adaptive-oracle values at θ = 0.25, ρ = 2, u = 0.5.
        let s = st(2.0, 0.5);
        let p = theta_entropy_xi(th(0.25), &s, 0.3, &QuadratureSpec::for_theta(th(0.25))).unwrap();
        let o = theta_entropy_xi(th(0.25), &s, 0.3, &oracle()).unwrap();
        assert_relative_eq!(p.eta, o.eta, max_relative = 1e-12);
        assert_relative_eq!(p.q, o.q, max_relative = 1e-12);
    }

    #[test]
    fn f_xi_examples() {
        for &t in &[0.01, 0.5] {
            assert_eq!(f_xi(th(t), &st(1.0, 0.3), 0.3, 0.7).unwrap(), 0.0);
            assert_eq!(f_xi(th(t), &st(2.0, 0.3), 0.0, 0.7).unwrap(), 0.0);
        }
        let s = st(2.5, 0.4);
        let vals: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&t| f_xi(th(t), &s, 0.3, 0.3).unwrap().abs())
            .collect();
        for w in vals.windows(2) {
            let r = w[0] / w[1];
            assert!((8.0..12.5).contains(&r), "ratio {r}");
        }
        assert!(f_xi(th(0.1), &s, 0.5, 0.0).is_err());
    }

    #[test]
    fn gap_examples() {
        let w0 = BoundBudget::new(2.0).unwrap();
        for &t in &[1e-3, 0.1] {
            let q = QuadratureSpec::for_theta(th(t));
            let (a, b) = entropy_gap(th(t), &st(1.0, 0.0), 0.0, w0, 0.05, &q).unwrap();
            assert!(a < 1e-14 && b < 1e-14);
            let (a, b) = entropy_gap(th(t), &ConservedState::VACUUM, 0.3, w0, 0.05, &q).unwrap();
            assert_eq!((a, b), (0.0, 0.0));
        }
        let q = QuadratureSpec::for_theta(th(0.1));
        let outside = st(1.0, 3.0);
        assert!(matches!(
            entropy_gap(th(0.1), &outside, 0.2, w0, 0.05, &q),
            Err(Error::Precondition { .. })
        ));
        assert!(entropy_gap(th(0.1), &st(1.0, 0.0), 0.4, w0, 0.05, &q).is_err());
    }

    #[test]
    fn gap_halves_per_quartering_of_theta() {
        let w0 = BoundBudget::new(2.0).unwrap();
        let s = st(2.0, 0.6);
        let mut prev: Option<f64> = None;
        let mut t = 0.1;
        while t >= 1e-4 {
            let q = QuadratureSpec::for_theta(th(t));
            let (a, b) = entropy_gap(th(t), &s, 0.3, w0, 0.05, &q).unwrap();
            let g = a + b;
            if let Some(p) = prev {
                assert!(p / g >= 1.8, "ratio {} at theta {t}", p / g);
            }
            prev = Some(g);
            t /= 4.0;
        }
    }

    #[test]
    fn energy_gap_examples() {
        assert_eq!(energy_gap(th(0.3), &st(1.0, 0.0)), (0.0, 0.0));
        assert_eq!(energy_gap(th(0.3), &ConservedState::VACUUM), (0.0, 0.0));
        let s = st(3.0, 0.7);
        let g1 = energy_gap(th(1e-2), &s);
        let g2 = energy_gap(th(1e-3), &s);
        for r in [g1.0 / g2.0, g1.1 / g2.1] {
            assert!((8.5..11.5).contains(&r), "ratio {r}");
        }
    }

    #[test]
    fn compatibility_examples() {
        let h = 1e-4;
        for &(rho, u) in &[(0.4, 0.3), (2.0, -1.0), (5.0, 0.5)] {
            let s = st(rho, u);
            let r = compatibility_residual(th(0.0), &s, |x| isothermal_entropy_xi(x, 0.35), h).unwrap();
            assert!(r <= 1e-6, "isothermal {r}");
            let t = th(0.5);
            let q = QuadratureSpec::for_theta(t);
            let r = compatibility_residual(t, &s, |x| weak_entropy_pair(t, x, &EntropyWeight::EnergyStar, &q), h)
                .unwrap();
            assert!(r <= 1e-6, "psi* {r}");
            let r = compatibility_residual(t, &s, |x| Ok(affine_pair(t, 0.7, -1.3, x)), h).unwrap();
            assert!(r <= 1e-9, "affine {r}");
        }
    }

    #[test]
    fn tabulated_weight_is_a_natural_spline() {
        let pts: Vec<(f64, f64)> = (0..=20).map(|i| {
            let s = -2.0 + 0.2 * i as f64;
            (s, s * s)
        }).collect();
        let w = EntropyWeight::Tabulated(pts).prepare(th(0.5), &QuadratureSpec::for_theta(th(0.5))).unwrap();
        let d = w.derivatives(0.33);
        assert!((d[0] - 0.33 * 0.33).abs() < 1e-3);
        assert!((d[1] - 0.66).abs() < 1e-2);
        assert!((d[2] - 2.0).abs() < 0.1);
        assert!(EntropyWeight::Tabulated(vec![(0.0, 1.0)]).prepare(th(0.5), &QuadratureSpec::for_theta(th(0.5))).is_err());
    }

    #[test]
    fn selector_dispatch() {
        let s = st(1.3, 0.2);
        let e = PairSelector::EnergyStar.evaluator(th(0.2)).unwrap().evaluate(&s).unwrap();
        assert_eq!(e, mechanical_energy_pair(th(0.2), &s));
        let e = PairSelector::Xi(0.2).evaluator(th(0.0)).unwrap().evaluate(&s).unwrap();
        assert_eq!(e, isothermal_entropy_xi(&s, 0.2).unwrap());
        assert!(PairSelector::Xi(1.2).evaluator(th(0.0)).is_err());
        let _ = QuadMode::JacobiWeight;
    }

    proptest! {
        #[test]
        fn isothermal_xi_is_convex(rho in 1e-3f64..7.0, u in -2.0f64..2.0, xi in -0.89f64..0.89) {
            // Hessian of η_ξ in (ρ, m) by central differences.
            let h = 1e-4 * rho;
            let e = |r: f64, m: f64| isothermal_entropy_xi(&ConservedState { rho: r, m }, xi).unwrap().eta;
            let m = rho * u;
            let e0 = e(rho, m);
            let err = (e(rho + h, m) - 2.0 * e0 + e(rho - h, m)) / (h * h);
            let emm = (e(rho, m + h) - 2.0 * e0 + e(rho, m - h)) / (h * h);
            let erm = (e(rho + h, m + h) - e(rho + h, m - h) - e(rho - h, m + h) + e(rho - h, m - h)) / (4.0 * h * h);
            let tr = err + emm;
            let det = err * emm - erm * erm;
            let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
            let scale = err.abs().max(emm.abs()).max(1.0);
            prop_assert!(0.5 * tr - disc >= -1e-6 * scale);
        }

        #[test]
        fn theta_xi_bounded_in_invariant_region(
            t in 1e-3f64..THETA_MAX, u_frac in -0.95f64..0.95, r_frac in 0.0f64..1.0, xi in -XI_LIMIT..XI_LIMIT
        ) {
            let w0 = 2.0;
            let theta = th(t);
            let u = u_frac * w0;
            let rho_max = (1.0 + t * (w0 - u.abs())).powf(1.0 / t);
            let s = st(r_frac * rho_max, u);
            let p = theta_entropy_xi(theta, &s, xi, &QuadratureSpec::for_theta(theta)).unwrap();
            prop_assert!(p.eta >= 0.0);
            prop_assert!(p.eta <= (2.0 * w0).exp());
        }

        #[test]
        fn weak_pair_nonnegative_for_nonnegative_weight(
            t in 0.05f64..0.9, rho in 0.0f64..5.0, u in -2.0f64..2.0
        ) {
            let theta = th(t);
            let psi = EntropyWeight::Polynomial(vec![0.1, 0.0, 1.0]);
            let p = weak_entropy_pair(theta, &st(rho, u), &psi, &QuadratureSpec::for_theta(theta)).unwrap();
            prop_assert!(p.eta >= 0.0);
        }
    }
}
