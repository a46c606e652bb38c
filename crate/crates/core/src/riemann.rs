//! Exact self-similar Riemann solver for `θ ≥ 0`, vacuum included.
//!
//! The middle state is the intersection of the forward 1-wave curve through
//! the left state and the backward 2-wave curve through the right state. All
//! curve arithmetic is done in `y = ln ρ`, so densities far below the `f64`
//! range (such as `θ^{1/θ}` at small `θ`) are handled exactly.
//!
//! Fans inside a `j`-rarefaction follow from `λ_j = ξ` and constancy of the
//! opposite invariant:
//!
//! ```text
//! θ > 0:  ρ^θ = (−1)^j θ(ξ − w_j)/(θ+1),   u = (ξ + θ w_j)/(θ+1)
//! θ = 0:  ρ = w_j e^{(−1)^j ξ − 1},         u = ξ − (−1)^j
//! ```

use crate::error::{domain, Error, Result};
use crate::gas_model::{pressure_unchecked, scaled_density_log, BoundBudget, ConservedState, Theta};

const MAX_ITERATIONS: usize = 200;

/// A non-vacuum primitive state, density stored as `ln ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    log_rho: f64,
    pub u: f64,
}

impl Primitive {
    pub fn new(rho: f64, u: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) || !u.is_finite() {
            return domain(format!("primitive state needs rho > 0 and finite u, got ({rho}, {u})"));
        }
        Ok(Self { log_rho: rho.ln(), u })
    }

    pub fn from_log(log_rho: f64, u: f64) -> Result<Self> {
        if !log_rho.is_finite() || !u.is_finite() {
            return domain(format!("primitive state needs finite ln rho and u, got ({log_rho}, {u})"));
        }
        Ok(Self { log_rho, u })
    }

    #[inline]
    pub fn log_rho(&self) -> f64 {
        self.log_rho
    }

    /// `ρ`, which underflows to zero for extremely thin states.
    #[inline]
    pub fn rho(&self) -> f64 {
        self.log_rho.exp()
    }

    /// `ρ^θ` (one at `θ = 0`).
    #[inline]
    pub fn sound_speed(&self, theta: Theta) -> f64 {
        (theta.value() * self.log_rho).exp()
    }

    pub fn conserved(&self) -> ConservedState {
        let rho = self.rho();
        if rho == 0.0 {
            ConservedState::VACUUM
        } else {
            ConservedState { rho, m: rho * self.u }
        }
    }

    /// `|u| + (ρ^θ−1)/θ − w0`, evaluated from `ln ρ`.
    pub fn budget_excess(&self, theta: Theta, w0: BoundBudget) -> f64 {
        let s = scaled_density_log(theta, self.log_rho).unwrap_or(f64::NEG_INFINITY);
        self.u.abs() + s - w0.value()
    }

    fn lambda(&self, theta: Theta, family: Family) -> f64 {
        let c = self.sound_speed(theta);
        match family {
            Family::One => self.u - c,
            Family::Two => self.u + c,
        }
    }
}

/// One side of the Riemann data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Side {
    State(Primitive),
    Vacuum,
}

impl Side {
    /// `ρ = 0` maps to [`Side::Vacuum`].
    pub fn from_primitive(rho: f64, u: f64) -> Result<Self> {
        if rho == 0.0 {
            Ok(Side::Vacuum)
        } else {
            Ok(Side::State(Primitive::new(rho, u)?))
        }
    }

    pub fn from_conserved(state: &ConservedState) -> Self {
        match state.velocity() {
            None => Side::Vacuum,
            Some(u) => Side::State(Primitive { log_rho: state.rho.ln(), u }),
        }
    }

    pub fn conserved(&self) -> ConservedState {
        match self {
            Side::State(p) => p.conserved(),
            Side::Vacuum => ConservedState::VACUUM,
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, Side::Vacuum)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannData {
    pub theta: Theta,
    pub left: Side,
    pub right: Side,
}

impl RiemannData {
    pub fn new(theta: Theta, left: Side, right: Side) -> Self {
        Self { theta, left, right }
    }

    /// Data from `(ρ, u)` pairs, zero density meaning vacuum.
    pub fn from_primitive(theta: Theta, left: (f64, f64), right: (f64, f64)) -> Result<Self> {
        Ok(Self {
            theta,
            left: Side::from_primitive(left.0, left.1)?,
            right: Side::from_primitive(right.0, right.1)?,
        })
    }

    pub fn from_conserved(theta: Theta, left: &ConservedState, right: &ConservedState) -> Self {
        Self {
            theta,
            left: Side::from_conserved(left),
            right: Side::from_conserved(right),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    One,
    Two,
}

/// Elementary wave, with edges given in `ξ = x/t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Wave {
    Shock { family: Family, speed: f64 },
    /// `head ≤ tail`; an edge bordering the isothermal fan's infinite tail is
    /// infinite.
    Rarefaction { family: Family, head: f64, tail: f64 },
    VacuumGap { left_edge: f64, right_edge: f64 },
}

impl Wave {
    pub fn is_shock(&self) -> bool {
        matches!(self, Wave::Shock { .. })
    }

    /// Short label used in reports, e.g. `S1`, `R2`, `V`.
    pub fn label(&self) -> &'static str {
        match self {
            Wave::Shock { family: Family::One, .. } => "S1",
            Wave::Shock { family: Family::Two, .. } => "S2",
            Wave::Rarefaction { family: Family::One, .. } => "R1",
            Wave::Rarefaction { family: Family::Two, .. } => "R2",
            Wave::VacuumGap { .. } => "V",
        }
    }
}

/// Phase-plane region of the right state relative to the left state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionTag {
    /// `S1 + R2`
    I,
    /// `S1 + S2`
    II,
    /// `R1 + S2`
    III,
    /// `R1 + R2` with `ρ_M > 0`, `θ > 0`
    IV1,
    /// `R1 + R2` with vacuum between the fans, `θ > 0`
    IV2,
    /// `R1 + R2`, `θ = 0`
    IV,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Middle {
    State(Primitive),
    Vacuum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannSolution {
    pub data: RiemannData,
    /// Non-trivial waves ordered by speed.
    pub pattern: Vec<Wave>,
    pub middle: Middle,
    /// Only set when both sides are non-vacuum.
    pub region: Option<RegionTag>,
}

impl RiemannSolution {
    /// Pattern as a compact string such as `S1+R2`, or `const`.
    pub fn pattern_label(&self) -> String {
        if self.pattern.is_empty() {
            return "const".into();
        }
        self.pattern.iter().map(Wave::label).collect::<Vec<_>>().join("+")
    }

    /// State at `ξ = x/t`.
    pub fn sample(&self, xi: f64) -> ConservedState {
        match self.sample_side(xi) {
            Side::State(p) => p.conserved(),
            Side::Vacuum => ConservedState::VACUUM,
        }
    }

    /// State at `ξ`, density kept in log form.
    pub fn sample_side(&self, xi: f64) -> Side {
        let theta = self.data.theta;
        let mut current = self.data.left;
        for (k, wave) in self.pattern.iter().enumerate() {
            let after = self.after_wave(k);
            match *wave {
                Wave::Shock { speed, .. } => {
                    if xi < speed {
                        return current;
                    }
                }
                Wave::Rarefaction { family, head, tail } => {
                    if xi < head {
                        return current;
                    }
                    if xi <= tail {
                        return self.fan(theta, family, xi);
                    }
                }
                Wave::VacuumGap { left_edge, right_edge } => {
                    if xi < left_edge {
                        return current;
                    }
                    if xi <= right_edge {
                        return Side::Vacuum;
                    }
                }
            }
            current = after;
        }
        current
    }

    /// The constant state to the right of wave `k`.
    fn after_wave(&self, k: usize) -> Side {
        if k + 1 == self.pattern.len() {
            return self.data.right;
        }
        match (self.pattern[k], self.middle) {
            (Wave::VacuumGap { .. }, _) | (_, Middle::Vacuum) => Side::Vacuum,
            (_, Middle::State(p)) => Side::State(p),
        }
    }

    fn fan(&self, theta: Theta, family: Family, xi: f64) -> Side {
        // The 1-fan always starts from the left state and the 2-fan always
        // ends at the right state.
        let base = match family {
            Family::One => self.data.left,
            Family::Two => self.data.right,
        };
        let Side::State(b) = base else {
            return Side::Vacuum;
        };
        fan_state(theta, family, &b, xi)
    }

    /// Largest finite `|ξ|` among the wave edges.
    pub fn max_wave_speed(&self) -> f64 {
        let mut s: f64 = 0.0;
        let mut add = |v: f64| {
            if v.is_finite() {
                s = s.max(v.abs());
            }
        };
        for w in &self.pattern {
            match *w {
                Wave::Shock { speed, .. } => add(speed),
                Wave::Rarefaction { head, tail, .. } => {
                    add(head);
                    add(tail);
                }
                Wave::VacuumGap { left_edge, right_edge } => {
                    add(left_edge);
                    add(right_edge);
                }
            }
        }
        s
    }
}

/// State inside a `family`-fan whose opposite invariant is that of `base`.
fn fan_state(theta: Theta, family: Family, base: &Primitive, xi: f64) -> Side {
    let t = theta.value();
    if t == 0.0 {
        let (log_rho, u) = match family {
            Family::One => (base.log_rho + base.u - xi - 1.0, xi + 1.0),
            Family::Two => (base.log_rho - base.u + xi - 1.0, xi - 1.0),
        };
        return Side::State(Primitive { log_rho, u });
    }
    let r = base.sound_speed(theta) / t;
    let (w, sign) = match family {
        Family::One => (base.u + r, -1.0),
        Family::Two => (base.u - r, 1.0),
    };
    let arg = sign * t * (xi - w) / (t + 1.0);
    if arg <= 0.0 {
        return Side::Vacuum;
    }
    Side::State(Primitive {
        log_rho: arg.ln() / t,
        u: (xi + t * w) / (t + 1.0),
    })
}

/// `ln(e^x − 1)` for `x > 0`, without overflow.
fn ln_expm1(x: f64) -> f64 {
    if x > 30.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    }
}

/// Shock jump `J ≥ 0` with `J² = (1/ρ_b − 1/ρ)(p(ρ) − p(ρ_b))` for `ρ ≥ ρ_b`,
/// and its derivative in `ln ρ`.
fn shock_jump(theta: Theta, log_base: f64, log_rho: f64) -> (f64, f64) {
    let d = log_rho - log_base;
    if d <= 0.0 {
        return (0.0, (theta.value() * log_base).exp());
    }
    let k = 2.0 * theta.value() + 1.0;
    let log_c = 2.0 * theta.value() * log_base;
    let log_j2 = log_c + ln_expm1(d) + ln_expm1(k * d) - k.ln() - d;
    let j = (0.5 * log_j2).exp();
    // G' = (C/k) e^{−d} (expm1(kd) + k e^{kd} expm1(d)), dJ/dy = G'/(2J)
    let log_g1 = log_c - k.ln() - d;
    let dg = (log_g1 + ln_expm1(k * d)).exp() + (log_g1 + k.ln() + k * d + ln_expm1(d)).exp();
    let dj = if j > 0.0 && j.is_finite() { dg / (2.0 * j) } else { (0.5 * log_c).exp() };
    (j, dj)
}

/// `ρ^θ expm1(θ d)/θ`-style rarefaction increment, `d = ln ρ − ln ρ_b`,
/// with derivative `ρ^θ`; `(d, 1)` at `θ = 0`.
fn rarefaction_increment(theta: Theta, log_base: f64, log_rho: f64) -> (f64, f64) {
    let t = theta.value();
    let d = log_rho - log_base;
    if t == 0.0 {
        return (d, 1.0);
    }
    let cb = (t * log_base).exp();
    (cb * (t * d).exp_m1() / t, (t * log_rho).exp())
}

/// `u` on the shock relation through `left`: `u_L − J(ρ_L, ρ)`.
///
/// `ρ > ρ_L` is the 1-shock branch (left state behind), `ρ < ρ_L` the
/// 2-shock branch (left state ahead). The relation is symmetric in the two
/// densities.
pub fn shock_curve_u(theta: Theta, left: (f64, f64), rho: f64) -> Result<f64> {
    let (rho_l, u_l) = left;
    if !(rho_l > 0.0 && rho > 0.0) {
        return domain(format!("shock curves need positive densities ({rho_l}, {rho})"));
    }
    let (lo, hi) = if rho >= rho_l { (rho_l, rho) } else { (rho, rho_l) };
    Ok(u_l - shock_jump(theta, lo.ln(), hi.ln()).0)
}

/// `u` on the `family`-rarefaction curve through `base`: the opposite
/// invariant is held fixed.
pub fn rarefaction_curve_u(theta: Theta, family: Family, base: (f64, f64), rho: f64) -> Result<f64> {
    let (rho_b, u_b) = base;
    if !(rho_b > 0.0) || !(rho >= 0.0) {
        return domain(format!("rarefaction curves need rho_b > 0 and rho >= 0 ({rho_b}, {rho})"));
    }
    if rho == 0.0 && theta.is_isothermal() {
        return domain("the isothermal rarefaction reaches vacuum only at infinite velocity");
    }
    let log_rho = if rho == 0.0 { f64::NEG_INFINITY } else { rho.ln() };
    let (inc, _) = rarefaction_increment(theta, rho_b.ln(), log_rho);
    Ok(match family {
        Family::One => u_b - inc,
        Family::Two => u_b + inc,
    })
}

/// Forward 1-curve from `l` and backward 2-curve from `r`, at `y = ln ρ`.
struct Curves {
    theta: Theta,
    l: Primitive,
    r: Primitive,
}

impl Curves {
    /// `(φ, φ')` with `φ = u_1(y) − u_2(y)`, strictly decreasing.
    fn phi(&self, y: f64) -> (f64, f64) {
        let (u1, d1) = if y > self.l.log_rho {
            let (j, dj) = shock_jump(self.theta, self.l.log_rho, y);
            (self.l.u - j, -dj)
        } else {
            let (inc, di) = rarefaction_increment(self.theta, self.l.log_rho, y);
            (self.l.u - inc, -di)
        };
        let (u2, d2) = if y > self.r.log_rho {
            let (j, dj) = shock_jump(self.theta, self.r.log_rho, y);
            (self.r.u + j, dj)
        } else {
            let (inc, di) = rarefaction_increment(self.theta, self.r.log_rho, y);
            (self.r.u + inc, di)
        };
        (u1 - u2, d1 - d2)
    }

    fn u_left(&self, y: f64) -> f64 {
        if y > self.l.log_rho {
            self.l.u - shock_jump(self.theta, self.l.log_rho, y).0
        } else {
            self.l.u - rarefaction_increment(self.theta, self.l.log_rho, y).0
        }
    }

    fn tolerance(&self) -> f64 {
        1e-12 * (1.0 + self.l.u.abs() + self.r.u.abs())
    }
}

/// `ξ1 = u_L + ρ_L^θ/θ ≤ ξ2 = u_R − ρ_R^θ/θ`; never true at `θ = 0`.
pub fn vacuum_criterion(theta: Theta, left: &Primitive, right: &Primitive) -> bool {
    let t = theta.value();
    if t == 0.0 {
        return false;
    }
    left.u + left.sound_speed(theta) / t <= right.u - right.sound_speed(theta) / t
}

/// Region of the right state in the phase plane of the left state.
pub fn classify(theta: Theta, left: &Primitive, right: &Primitive) -> RegionTag {
    if vacuum_criterion(theta, left, right) {
        return RegionTag::IV2;
    }
    let c = Curves { theta, l: *left, r: *right };
    let tol = c.tolerance();
    let s1 = c.phi(left.log_rho).0 > tol;
    let s2 = c.phi(right.log_rho).0 > tol;
    match (s1, s2) {
        (true, false) => RegionTag::I,
        (true, true) => RegionTag::II,
        (false, true) => RegionTag::III,
        (false, false) if theta.is_isothermal() => RegionTag::IV,
        (false, false) => RegionTag::IV1,
    }
}

/// Middle state between two non-vacuum states.
pub fn middle_state(theta: Theta, left: &Primitive, right: &Primitive) -> Result<Middle> {
    if vacuum_criterion(theta, left, right) {
        return Ok(Middle::Vacuum);
    }
    let c = Curves { theta, l: *left, r: *right };
    let tol = c.tolerance();
    let (pl, _) = c.phi(left.log_rho);
    if pl.abs() <= tol {
        return Ok(Middle::State(*left));
    }
    let (pr, _) = c.phi(right.log_rho);
    if pr.abs() <= tol {
        return Ok(Middle::State(*right));
    }
    let y = solve_phi(&c, tol)?;
    Ok(Middle::State(Primitive { log_rho: y, u: c.u_left(y) }))
}

fn solve_phi(c: &Curves, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = if c.l.log_rho <= c.r.log_rho {
        (c.l.log_rho, c.r.log_rho)
    } else {
        (c.r.log_rho, c.l.log_rho)
    };
    let (mut f_lo, _) = c.phi(lo);
    let (mut f_hi, _) = c.phi(hi);
    let mut iterations = 0;
    let fail = |iterations, lo, hi, f_lo, f_hi| Error::Solver {
        iterations,
        lo,
        hi,
        phi_lo: f_lo,
        phi_hi: f_hi,
    };
    let mut step = 1.0;
    while f_lo < 0.0 {
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(fail(iterations, lo, hi, f_lo, f_hi));
        }
        hi = lo;
        f_hi = f_lo;
        lo -= step;
        step *= 2.0;
        f_lo = c.phi(lo).0;
    }
    step = 1.0;
    while f_hi > 0.0 {
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            return Err(fail(iterations, lo, hi, f_lo, f_hi));
        }
        lo = hi;
        f_lo = f_hi;
        hi += step;
        step *= 2.0;
        f_hi = c.phi(hi).0;
    }
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    let mut y = 0.5 * (lo + hi);
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (f, df) = c.phi(y);
        if f.abs() <= tol {
            return Ok(y);
        }
        if f > 0.0 {
            lo = y;
            f_lo = f;
        } else {
            hi = y;
            f_hi = f;
        }
        let newton = y - f / df;
        y = if df < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * (1.0 + y.abs()) {
            // Bracket at float resolution.
            return Ok(y);
        }
    }
    Err(fail(iterations, lo, hi, f_lo, f_hi))
}

/// `σ = [m]/[ρ]`.
fn shock_speed(a: &Primitive, b: &Primitive) -> f64 {
    let (ra, rb) = (a.rho(), b.rho());
    (rb * b.u - ra * a.u) / (rb - ra)
}

/// Solves the Riemann problem.
pub fn solve(data: &RiemannData) -> Result<RiemannSolution> {
    let theta = data.theta;
    let t = theta.value();
    match (data.left, data.right) {
        (Side::Vacuum, Side::Vacuum) => Ok(RiemannSolution {
            data: *data,
            pattern: Vec::new(),
            middle: Middle::Vacuum,
            region: None,
        }),
        (Side::Vacuum, Side::State(r)) => {
            let head = if t == 0.0 { f64::NEG_INFINITY } else { r.u - r.sound_speed(theta) / t };
            Ok(RiemannSolution {
                data: *data,
                pattern: vec![Wave::Rarefaction {
                    family: Family::Two,
                    head,
                    tail: r.lambda(theta, Family::Two),
                }],
                middle: Middle::Vacuum,
                region: None,
            })
        }
        (Side::State(l), Side::Vacuum) => {
            let tail = if t == 0.0 { f64::INFINITY } else { l.u + l.sound_speed(theta) / t };
            Ok(RiemannSolution {
                data: *data,
                pattern: vec![Wave::Rarefaction {
                    family: Family::One,
                    head: l.lambda(theta, Family::One),
                    tail,
                }],
                middle: Middle::Vacuum,
                region: None,
            })
        }
        (Side::State(l), Side::State(r)) => solve_two_sided(data, &l, &r),
    }
}

fn solve_two_sided(data: &RiemannData, l: &Primitive, r: &Primitive) -> Result<RiemannSolution> {
    let theta = data.theta;
    let t = theta.value();
    let region = classify(theta, l, r);
    if region == RegionTag::IV2 {
        let xi1 = l.u + l.sound_speed(theta) / t;
        let xi2 = r.u - r.sound_speed(theta) / t;
        return Ok(RiemannSolution {
            data: *data,
            pattern: vec![
                Wave::Rarefaction { family: Family::One, head: l.lambda(theta, Family::One), tail: xi1 },
                Wave::VacuumGap { left_edge: xi1, right_edge: xi2 },
                Wave::Rarefaction { family: Family::Two, head: xi2, tail: r.lambda(theta, Family::Two) },
            ],
            middle: Middle::Vacuum,
            region: Some(region),
        });
    }
    let middle = middle_state(theta, l, r)?;
    let Middle::State(m) = middle else {
        unreachable!("vacuum middle handled by the criterion");
    };
    let mut pattern = Vec::with_capacity(2);
    let same = |a: &Primitive, b: &Primitive| a.log_rho == b.log_rho && a.u == b.u;
    if !same(l, &m) {
        pattern.push(match region {
            RegionTag::I | RegionTag::II => Wave::Shock { family: Family::One, speed: shock_speed(l, &m) },
            _ => Wave::Rarefaction {
                family: Family::One,
                head: l.lambda(theta, Family::One),
                tail: m.lambda(theta, Family::One),
            },
        });
    }
    if !same(&m, r) {
        pattern.push(match region {
            RegionTag::II | RegionTag::III => Wave::Shock { family: Family::Two, speed: shock_speed(&m, r) },
            _ => Wave::Rarefaction {
                family: Family::Two,
                head: m.lambda(theta, Family::Two),
                tail: r.lambda(theta, Family::Two),
            },
        });
    }
    Ok(RiemannSolution { data: *data, pattern, middle, region: Some(region) })
}

/// Riemann solution with vacuum on the left and `(ρ_R, u_R)` on the right.
pub fn one_side_vacuum_solution(theta: Theta, right: (f64, f64)) -> Result<RiemannSolution> {
    solve(&RiemannData {
        theta,
        left: Side::Vacuum,
        right: Side::State(Primitive::new(right.0, right.1)?),
    })
}

/// Smallest `θ* ∈ (1e−6, 0.99]` with `(u_R − u_L)θ* = ρ_L^{θ*} + ρ_R^{θ*}`.
///
/// The two rarefactions separate by a vacuum exactly when
/// `(u_R − u_L)θ ≥ ρ_L^θ + ρ_R^θ`; `None` when that never happens in range.
pub fn decavitation_threshold(left: (f64, f64), right: (f64, f64)) -> Result<Option<f64>> {
    let ((rho_l, u_l), (rho_r, u_r)) = (left, right);
    if !(rho_l > 0.0 && rho_r > 0.0) {
        return domain("decavitation needs two non-vacuum states");
    }
    let g = |t: f64| (u_r - u_l) * t - rho_l.powf(t) - rho_r.powf(t);
    const LO: f64 = 1e-6;
    const HI: f64 = crate::gas_model::THETA_MAX;
    const SCAN: usize = 4096;
    let mut a = LO;
    if g(a) >= 0.0 {
        return Ok(Some(a));
    }
    for i in 1..=SCAN {
        let b = LO + (HI - LO) * i as f64 / SCAN as f64;
        if g(b) >= 0.0 {
            return Ok(Some(refine_root(&g, a, b)));
        }
        a = b;
    }
    Ok(None)
}

/// Bisection to float resolution on a sign change `g(a) < 0 ≤ g(b)`, then
/// picks the neighbouring float with the smallest `|g|`.
fn refine_root(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if g(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let mut best = b;
    let mut best_g = g(b).abs();
    let mut x = a;
    for _ in 0..4 {
        let gx = g(x).abs();
        if gx < best_g {
            best = x;
            best_g = gx;
        }
        x = f64::from_bits(x.to_bits() + 1);
    }
    best
}

/// Data `(ρ_L, u_L) = (scale·θ^{1/θ}, u_R − (ρ_R^θ − ρ_L^θ)/θ)` approaching a
/// one-sided vacuum while staying inside the invariant region.
///
/// The left state lies on the 2-rarefaction curve through the right state,
/// so the solution is a single 2-fan.
pub fn approximating_family(theta: Theta, rho_r: f64, u_r: f64, scale: f64) -> Result<RiemannData> {
    let t = theta.value();
    if t == 0.0 {
        return Err(Error::Unsupported("approximating family"));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return domain(format!("scale must be positive, got {scale}"));
    }
    let right = Primitive::new(rho_r, u_r)?;
    let log_rho_l = scale.ln() + t.ln() / t;
    let c_l = scale.powf(t) * t;
    let u_l = u_r - (right.sound_speed(theta) - c_l) / t;
    Ok(RiemannData {
        theta,
        left: Side::State(Primitive { log_rho: log_rho_l, u: u_l }),
        right: Side::State(right),
    })
}

/// `w0 = |u_R| + |(ρ_R^θ−1)/θ| + 2`, a budget containing the approximating
/// family at every `θ`.
pub fn approximating_budget(theta: Theta, rho_r: f64, u_r: f64) -> Result<BoundBudget> {
    let s = crate::gas_model::scaled_density(theta, rho_r)?;
    BoundBudget::new(u_r.abs() + s.abs() + 2.0)
}

/// Residuals `(|σ[ρ] − [m]|, |σ[m] − [m²/ρ + p]|)` of a jump.
pub fn rankine_hugoniot_residual(theta: Theta, a: &ConservedState, b: &ConservedState, sigma: f64) -> (f64, f64) {
    let fa = a.m * a.m / a.rho + pressure_unchecked(theta, a.rho);
    let fb = b.m * b.m / b.rho + pressure_unchecked(theta, b.rho);
    (
        (sigma * (b.rho - a.rho) - (b.m - a.m)).abs(),
        (sigma * (b.m - a.m) - (fb - fa)).abs(),
    )
}
