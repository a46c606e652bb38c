//! θ-sweeps measuring how fast the γ-law quantities approach their
//! isothermal counterparts.
//!
//! Every experiment returns a [`SweepReport`]: a table with one row per `θ`
//! (or per `(θ, ξ)`), log-log rate fits and named pass/fail checks. The
//! envelopes and margins used by the checks are desk-scale surrogates for
//! constants that are only known to exist.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::entropy::{check_xi_margin, f_xi, gap_with, energy_gap, ThetaXiPair};
use crate::error::{domain, Error, Result};
use crate::gas_model::{budget_excess, scaled_density, BoundBudget, ConservedState, Theta, THETA_MAX};
use crate::godunov::{dissipation_tv_estimate, riemann_initial, run, CompactSet, Grid1D, SimConfig};
use crate::quadrature::QuadratureSpec;
use crate::riemann::{
    approximating_budget, approximating_family, decavitation_threshold, middle_state,
    one_side_vacuum_solution, solve, Middle, Primitive, RiemannData, RiemannSolution,
};

/// Smallest distance of every `ξ` in the grid from `±(√2−1)`.
pub const XI_MARGIN: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Strictly decreasing, in `(0, 0.99]`.
    pub thetas: Vec<f64>,
    pub sample_count: usize,
    pub seed: u64,
    pub w0: BoundBudget,
    pub xi_grid: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            thetas: geometric_thetas(0.1, 0.5, 11),
            sample_count: 2000,
            seed: 0x5eed,
            w0: BoundBudget::new(2.0).expect("positive budget"),
            xi_grid: vec![-0.35, -0.175, 0.0, 0.175, 0.35],
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thetas.is_empty() {
            return domain("theta ladder is empty");
        }
        if !self.thetas.iter().all(|&t| t > 0.0 && t <= THETA_MAX) {
            return domain(format!("thetas must lie in (0, {THETA_MAX}]"));
        }
        if !self.thetas.windows(2).all(|w| w[0] > w[1]) {
            return domain("thetas must be strictly decreasing");
        }
        if self.sample_count == 0 {
            return domain("sample_count must be positive");
        }
        for &xi in &self.xi_grid {
            check_xi_margin(xi, XI_MARGIN)?;
        }
        Ok(())
    }
}

/// `first, first·ratio, …` with `count` rungs.
pub fn geometric_thetas(first: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| first * ratio.powi(k as i32)).collect()
}

/// Shortest decimal form that parses back to the same `f64`.
pub fn csv_number(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `(ln θ, ln metric)` actually fitted.
    pub points: Vec<(f64, f64)>,
    /// Number of zero metrics left out.
    pub dropped_zeros: usize,
}

/// Least-squares line through `(ln θ, ln y)`, skipping `y = 0`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    let dropped_zeros = points.iter().filter(|p| p.1 == 0.0).count();
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(t, y)| *t > 0.0 && *y > 0.0 && t.is_finite() && y.is_finite())
        .map(|(t, y)| (t.ln(), y.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::InsufficientData { usable: pts.len(), required: 4 });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return domain("rate fit needs at least two distinct thetas");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(RateFit { slope, intercept, r_squared, points: pts, dropped_zeros })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricFit {
    pub metric: String,
    /// `None` when the metric vanished identically.
    pub fit: Option<RateFit>,
}

impl MetricFit {
    pub fn is_flat_zero(&self) -> bool {
        self.fit.is_none()
    }
}

fn metric_fit(metric: &str, thetas: &[f64], values: &[f64]) -> Result<MetricFit> {
    if values.iter().all(|&v| v == 0.0) {
        return Ok(MetricFit { metric: metric.into(), fit: None });
    }
    let pts: Vec<_> = thetas.iter().copied().zip(values.iter().copied()).collect();
    Ok(MetricFit { metric: metric.into(), fit: Some(fit_rate(&pts)?) })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Flag(bool),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Num(x) => csv_number(*x),
            Cell::Text(s) => s.clone(),
            Cell::Flag(b) => b.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub experiment_id: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    /// `key=value` lines appended after the table.
    pub scalars: Vec<(String, String)>,
    pub fits: Vec<MetricFit>,
    pub checks: Vec<Check>,
}

impl SweepReport {
    fn new(id: &str, columns: &[&'static str]) -> Self {
        Self {
            experiment_id: id.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            scalars: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Numeric column by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| *c == name)?;
        self.rows.iter().map(|r| r[k].as_f64()).collect()
    }

    pub fn scalar(&self, key: &str) -> Option<&str> {
        self.scalars.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn fit(&self, metric: &str) -> Option<&MetricFit> {
        self.fits.iter().find(|f| f.metric == metric)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        for (k, v) in &self.scalars {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }
}

/// Uniform variates shared by every θ, so that sweeps compare the same
/// points of the invariant region.
fn draws(seed: u64, count: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect()
}

/// Largest density allowed by the budget at velocity `u`.
fn rho_max(theta: Theta, w0: f64, u: f64) -> f64 {
    let room = w0 - u.abs();
    let t = theta.value();
    if t == 0.0 {
        room.exp()
    } else {
        ((t * room).ln_1p() / t).exp()
    }
}

/// States from the invariant region `|u| + (ρ^θ−1)/θ ≤ w0`.
///
/// The first 5% of the samples are vacuum, the next 10% have `ρ`
/// log-uniform in `[1e−6, 1e−3]`; the rest draw `u` uniformly from
/// `[−0.9w0, 0.9w0]` and then `ρ` uniformly from the feasible interval.
/// The same seed gives the same variates at every `θ`.
pub fn sample_states(theta: Theta, w0: BoundBudget, count: usize, seed: u64) -> Vec<ConservedState> {
    let w = w0.value();
    let n_vac = count.div_ceil(20);
    let n_near = count.div_ceil(10);
    let states: Vec<ConservedState> = draws(seed, count)
        .into_iter()
        .enumerate()
        .map(|(i, (a, b))| {
            if i < n_vac {
                return ConservedState::VACUUM;
            }
            let u = (2.0 * a - 1.0) * 0.9 * w;
            let rho = if i < n_vac + n_near {
                (1e-6f64.ln() + b * 1e3f64.ln()).exp()
            } else {
                b * rho_max(theta, w, u)
            };
            if rho == 0.0 {
                ConservedState::VACUUM
            } else {
                ConservedState { rho, m: rho * u }
            }
        })
        .collect();
    for s in &states {
        let excess = budget_excess(theta, s, w0);
        assert!(excess <= 1e-12 * (1.0 + w), "sampler left the invariant region: {s:?}");
    }
    states
}

fn thetas_of(config: &SweepConfig) -> Result<Vec<Theta>> {
    config.validate()?;
    config.thetas.iter().map(|&t| Theta::new(t)).collect()
}

/// Sup over samples and `ξ` of the entropy gap and of `|f_ξ(ξ)|`.
///
/// Fits: `gap_eta`, `gap_q` and `f_xi`, each the max over `ξ` per `θ`.
pub fn entropy_rate_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let thetas = thetas_of(config)?;
    let w = config.w0.value();
    let envelope = 5.0 * (2.0 * w).exp() * (1.0 + w);
    struct Row {
        xi: f64,
        eta: f64,
        q: f64,
        f: f64,
        envelope_ratio: f64,
    }
    let per_theta: Vec<Vec<Row>> = thetas
        .par_iter()
        .map(|&theta| {
            let states = sample_states(theta, config.w0, config.sample_count, config.seed);
            let quad = QuadratureSpec::for_theta(theta);
            config
                .xi_grid
                .iter()
                .map(|&xi| {
                    let pair = ThetaXiPair::new(theta, xi, &quad)?;
                    let mut row = Row { xi, eta: 0.0, q: 0.0, f: 0.0, envelope_ratio: 0.0 };
                    for s in &states {
                        let (ge, gq) = gap_with(&pair, s)?;
                        row.eta = row.eta.max(ge);
                        row.q = row.q.max(gq);
                        row.f = row.f.max(f_xi(theta, s, xi, xi)?.abs());
                        let scale = envelope * theta.value().sqrt();
                        row.envelope_ratio = row.envelope_ratio.max(ge.max(gq) / scale);
                    }
                    Ok(row)
                })
                .collect()
        })
        .collect::<Result<_>>()?;

    let mut rep = SweepReport::new("entropy_rate", &["theta", "xi", "sup_gap_eta", "sup_gap_q", "sup_f_xi"]);
    let (mut eta, mut q, mut f) = (Vec::new(), Vec::new(), Vec::new());
    let mut worst_envelope: f64 = 0.0;
    for (theta, rows) in config.thetas.iter().zip(&per_theta) {
        for r in rows {
            rep.rows.push(vec![Cell::Num(*theta), Cell::Num(r.xi), Cell::Num(r.eta), Cell::Num(r.q), Cell::Num(r.f)]);
            if *theta <= 0.1 {
                worst_envelope = worst_envelope.max(r.envelope_ratio);
            }
        }
        eta.push(rows.iter().map(|r| r.eta).fold(0.0, f64::max));
        q.push(rows.iter().map(|r| r.q).fold(0.0, f64::max));
        f.push(rows.iter().map(|r| r.f).fold(0.0, f64::max));
    }
    rep.fits.push(metric_fit("gap_eta", &config.thetas, &eta)?);
    rep.fits.push(metric_fit("gap_q", &config.thetas, &q)?);
    rep.fits.push(metric_fit("f_xi", &config.thetas, &f)?);
    rep.checks.push(slope_check(&rep.fits[0], 0.45));
    rep.checks.push(slope_check(&rep.fits[1], 0.45));
    rep.checks.push(slope_check(&rep.fits[2], 0.9));
    rep.checks.push(check(
        "sqrt_theta_envelope",
        worst_envelope <= 1.0,
        format!("max gap / (5√θ(e^(2w0) + w0 e^(2w0))) = {worst_envelope:.3e} over θ ≤ 0.1"),
    ));
    rep.checks.push(monotone_check("gap_eta_monotone", &eta, 0.05));
    Ok(rep)
}

/// Sup over samples of `|η*^{(θ)} − η*^{(0)}|` and of the flux gap.
pub fn energy_rate_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let thetas = thetas_of(config)?;
    let sups: Vec<(f64, f64)> = thetas
        .par_iter()
        .map(|&theta| {
            sample_states(theta, config.w0, config.sample_count, config.seed)
                .iter()
                .map(|s| energy_gap(theta, s))
                .fold((0.0f64, 0.0f64), |a, b| (a.0.max(b.0), a.1.max(b.1)))
        })
        .collect();
    let mut rep = SweepReport::new("energy_rate", &["theta", "sup_gap_eta_star", "sup_gap_q_star"]);
    for (t, (e, q)) in config.thetas.iter().zip(&sups) {
        rep.rows.push(vec![Cell::Num(*t), Cell::Num(*e), Cell::Num(*q)]);
    }
    let eta: Vec<f64> = sups.iter().map(|s| s.0).collect();
    let q: Vec<f64> = sups.iter().map(|s| s.1).collect();
    rep.fits.push(metric_fit("gap_eta_star", &config.thetas, &eta)?);
    rep.fits.push(metric_fit("gap_q_star", &config.thetas, &q)?);
    rep.checks.push(slope_check(&rep.fits[0], 0.9));
    rep.checks.push(slope_check(&rep.fits[1], 0.9));
    let (first, last) = (eta[0], eta[eta.len() - 1]);
    rep.checks.push(check(
        "largest_theta_dominates",
        first + 1e-12 >= last,
        format!("gap at θ = {} is {first:e}, at θ = {} is {last:e}", config.thetas[0], config.thetas[eta.len() - 1]),
    ));
    rep.checks.push(monotone_check("gap_eta_star_monotone", &eta, 0.05));
    Ok(rep)
}

fn slope_check(fit: &MetricFit, min_slope: f64) -> Check {
    let name = format!("{}_slope", fit.metric);
    match &fit.fit {
        None => check(&name, true, "metric vanishes identically".into()),
        Some(f) => check(
            &name,
            f.slope >= min_slope && f.r_squared >= 0.98,
            format!("slope {:.4} (need ≥ {min_slope}), r² {:.5} (need ≥ 0.98)", f.slope, f.r_squared),
        ),
    }
}

/// Values listed along a decreasing θ ladder must not grow by more than
/// `band` relative to the running minimum.
fn monotone_check(name: &str, values: &[f64], band: f64) -> Check {
    let mut worst: f64 = 0.0;
    let mut min = f64::INFINITY;
    for &v in values {
        if min.is_finite() && v > min {
            worst = worst.max((v - min) / min.max(f64::MIN_POSITIVE));
        }
        min = min.min(v);
    }
    check(name, worst <= band, format!("largest relative increase {worst:e} (band {band})"))
}

/// Window in `x` at fixed time `t` for comparing self-similar solutions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleWindow {
    pub t: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub n_samples: usize,
}

impl SampleWindow {
    pub fn new(t: f64, x_min: f64, x_max: f64, n_samples: usize) -> Result<Self> {
        if !(t > 0.0 && x_min < x_max && n_samples > 0) {
            return domain("window needs t > 0, x_min < x_max and samples");
        }
        Ok(Self { t, x_min, x_max, n_samples })
    }
}

/// Composite-midpoint `(‖ρ_a − ρ_b‖₁, ‖m_a − m_b‖₁)` over the window.
pub fn window_l1(a: &RiemannSolution, b: &RiemannSolution, w: &SampleWindow) -> (f64, f64) {
    let h = (w.x_max - w.x_min) / w.n_samples as f64;
    let mut acc = (0.0, 0.0);
    for j in 0..w.n_samples {
        let xi = (w.x_min + (j as f64 + 0.5) * h) / w.t;
        let (p, q) = (a.sample(xi), b.sample(xi));
        acc.0 += (p.rho - q.rho).abs();
        acc.1 += (p.m - q.m).abs();
    }
    (acc.0 * h, acc.1 * h)
}

/// L¹ distance between the θ-solution and the isothermal one for fixed data.
pub fn riemann_limit_sweep(
    left: (f64, f64),
    right: (f64, f64),
    window: SampleWindow,
    config: &SweepConfig,
) -> Result<SweepReport> {
    if !(left.0 > 0.0 && right.0 > 0.0) {
        return domain("riemann limit sweep needs non-vacuum data");
    }
    let thetas = thetas_of(config)?;
    let reference = solve(&RiemannData::from_primitive(Theta::ISOTHERMAL, left, right)?)?;
    let rows: Vec<(f64, f64, String)> = thetas
        .par_iter()
        .map(|&theta| {
            let s = solve(&RiemannData::from_primitive(theta, left, right)?)?;
            let (r, m) = window_l1(&s, &reference, &window);
            Ok((r, m, s.pattern_label()))
        })
        .collect::<Result<_>>()?;
    let mut rep = SweepReport::new("riemann_limit", &["theta", "l1_rho", "l1_m", "pattern"]);
    for (t, (r, m, p)) in config.thetas.iter().zip(&rows) {
        rep.rows.push(vec![Cell::Num(*t), Cell::Num(*r), Cell::Num(*m), Cell::Text(p.clone())]);
    }
    rep.scalars.push(("reference_pattern".into(), reference.pattern_label()));
    let total: Vec<f64> = rows.iter().map(|r| r.0 + r.1).collect();
    rep.fits.push(metric_fit("l1_total", &config.thetas, &total)?);
    let (first, last) = (total[0], total[total.len() - 1]);
    rep.checks.push(check(
        "decay_to_one_percent",
        last <= 1e-2 * first,
        format!("distance {last:e} at smallest θ vs {first:e} at largest"),
    ));
    rep.checks.push(monotone_check("monotone_decay", &total, 0.05));
    Ok(rep)
}

/// Middle density across the ladder and around the decavitation threshold.
///
/// When a threshold `θ*` exists the rows also include `θ* ± 0.01`.
pub fn decavitation_experiment(
    left: (f64, f64),
    right: (f64, f64),
    config: &SweepConfig,
) -> Result<SweepReport> {
    if !(right.1 > left.1) {
        return domain("decavitation needs u_R > u_L");
    }
    config.validate()?;
    let threshold = decavitation_threshold(left, right)?;
    let mut ladder = config.thetas.clone();
    if let Some(ts) = threshold {
        ladder.extend([ts + 0.01, ts - 0.01].into_iter().filter(|t| *t > 0.0 && *t <= THETA_MAX));
    }
    ladder.sort_by(|a, b| b.total_cmp(a));
    ladder.dedup();
    let (l, r) = (Primitive::new(left.0, left.1)?, Primitive::new(right.0, right.1)?);
    let mids: Vec<Middle> = ladder
        .iter()
        .map(|&t| middle_state(Theta::new(t)?, &l, &r))
        .collect::<Result<_>>()?;
    let mut rep = SweepReport::new("decavitation", &["theta", "rho_mid", "is_vacuum"]);
    let density = |m: &Middle| match m {
        Middle::State(p) => p.rho(),
        Middle::Vacuum => 0.0,
    };
    for (t, m) in ladder.iter().zip(&mids) {
        rep.rows.push(vec![Cell::Num(*t), Cell::Num(density(m)), Cell::Flag(*m == Middle::Vacuum)]);
    }
    rep.scalars.push(("theta_star".into(), threshold.map_or("none".into(), csv_number)));
    let star = threshold.unwrap_or(f64::INFINITY);
    let consistent = ladder.iter().zip(&mids).all(|(&t, m)| {
        if t < star {
            density(m) > 0.0
        } else {
            *m == Middle::Vacuum
        }
    });
    rep.checks.push(check(
        "vacuum_exactly_above_threshold",
        consistent,
        format!("threshold {}", threshold.map_or("none".into(), csv_number)),
    ));
    let iso = density(&middle_state(Theta::ISOTHERMAL, &l, &r)?);
    let t_min = ladder[ladder.len() - 1];
    let at_min = density(&mids[mids.len() - 1]);
    rep.scalars.push(("rho_mid_isothermal".into(), csv_number(iso)));
    // The middle state converges at rate O(θ).
    rep.checks.push(check(
        "isothermal_limit",
        (at_min - iso).abs() <= 10.0 * t_min * iso,
        format!("rho_mid {at_min:e} at θ = {t_min:e} vs isothermal {iso:e}"),
    ));
    Ok(rep)
}

/// Vacuum on the left of `(ρ_R, u_R)`: fan edges, distance to the isothermal
/// solution, and the same distance for the approximating non-vacuum data.
pub fn one_side_vacuum_experiment(
    rho_r: f64,
    u_r: f64,
    window: SampleWindow,
    config: &SweepConfig,
) -> Result<SweepReport> {
    if !(rho_r > 0.0) {
        return domain("one-side vacuum needs rho_R > 0");
    }
    let thetas = thetas_of(config)?;
    let reference = one_side_vacuum_solution(Theta::ISOTHERMAL, (rho_r, u_r))?;
    struct Row {
        head: f64,
        tail: f64,
        l1: f64,
        l1_approx: f64,
        budget_ok: bool,
    }
    let rows: Vec<Row> = thetas
        .par_iter()
        .map(|&theta| {
            let t = theta.value();
            let c = rho_r.powf(t);
            let s = one_side_vacuum_solution(theta, (rho_r, u_r))?;
            let (a, b) = window_l1(&s, &reference, &window);
            let data = approximating_family(theta, rho_r, u_r, 1.0)?;
            let w0 = approximating_budget(theta, rho_r, u_r)?;
            let budget_ok = [data.left, data.right].iter().all(|side| {
                crate::gas_model::invariant_budget(theta, &side.conserved(), w0)
            });
            let (ca, cb) = window_l1(&solve(&data)?, &reference, &window);
            Ok(Row { head: u_r - c / t, tail: u_r + c, l1: a + b, l1_approx: ca + cb, budget_ok })
        })
        .collect::<Result<_>>()?;
    let mut rep = SweepReport::new(
        "one_side_vacuum",
        &["theta", "left_edge", "right_edge", "l1_vacuum", "l1_approx", "budget_ok"],
    );
    for (t, r) in config.thetas.iter().zip(&rows) {
        rep.rows.push(vec![
            Cell::Num(*t),
            Cell::Num(r.head),
            Cell::Num(r.tail),
            Cell::Num(r.l1),
            Cell::Num(r.l1_approx),
            Cell::Flag(r.budget_ok),
        ]);
    }
    let ln = rho_r.ln().abs();
    let edge_ok = config
        .thetas
        .iter()
        .zip(&rows)
        .all(|(&t, r)| (r.tail - (u_r + 1.0)).abs() <= t * ln * (t * ln).exp() * (1.0 + 1e-12) + 1e-15);
    rep.checks.push(check("right_edge_bound", edge_ok, "|ρ_R^θ − 1| ≤ θ|ln ρ_R|e^{θ|ln ρ_R|}".into()));
    let far = config.thetas.iter().zip(&rows).filter(|(t, _)| **t <= 0.07).all(|(_, r)| r.head <= -10.0);
    rep.checks.push(check("left_edge_escapes", far, "u_R − ρ_R^θ/θ ≤ −10 for θ ≤ 0.07".into()));
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    rep.checks.push(check(
        "vacuum_distance_decay",
        last.l1 <= 1e-2 * first.l1,
        format!("{:e} at smallest θ vs {:e} at largest", last.l1, first.l1),
    ));
    rep.checks.push(check(
        "approximating_distance_decay",
        last.l1_approx <= 1e-2 * first.l1_approx,
        format!("{:e} at smallest θ vs {:e} at largest", last.l1_approx, first.l1_approx),
    ));
    rep.checks.push(check(
        "approximating_budget",
        rows.iter().all(|r| r.budget_ok),
        "approximating data inside the invariant region at every θ".into(),
    ));
    Ok(rep)
}

/// Fixed Riemann problem, grid and compact set for the dissipation sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationSetup {
    pub left: (f64, f64),
    pub right: (f64, f64),
    pub x0: f64,
    pub grid: Grid1D,
    pub t_end: f64,
    pub cfl: f64,
    pub set: CompactSet,
}

/// Dissipation estimate over `K` for each `θ` of the ladder.
pub fn dissipation_uniformity_sweep(setup: &DissipationSetup, config: &SweepConfig) -> Result<SweepReport> {
    let thetas = thetas_of(config)?;
    let rows: Vec<(f64, f64)> = thetas
        .par_iter()
        .map(|&theta| {
            let sides = [setup.left, setup.right];
            let mut w: f64 = 0.0;
            for &(rho, u) in &sides {
                w = w.max(u.abs() + if rho > 0.0 { scaled_density(theta, rho)?.abs() } else { 0.0 });
            }
            let cfg = SimConfig::new(theta, setup.grid, setup.cfl, setup.t_end, BoundBudget::new(w + 1.0)?)?
                .with_history();
            let l = ConservedState::from_primitive(setup.left.0, setup.left.1)?;
            let r = ConservedState::from_primitive(setup.right.0, setup.right.1)?;
            let out = run(&cfg, riemann_initial(&setup.grid, setup.x0, l, r))?;
            let rep = dissipation_tv_estimate(theta, &setup.grid, &out.history, setup.set)?;
            Ok((rep.dissipation_tv_estimate, rep.grid_floor))
        })
        .collect::<Result<_>>()?;
    let mut rep = SweepReport::new("dissipation", &["theta", "tv_estimate", "grid_floor"]);
    for (t, (v, f)) in config.thetas.iter().zip(&rows) {
        rep.rows.push(vec![Cell::Num(*t), Cell::Num(*v), Cell::Num(*f)]);
    }
    let floor = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let max = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let min = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let head = rows.iter().take(3).map(|r| r.0).fold(0.0, f64::max);
    rep.checks.push(check(
        "bounded_by_largest_thetas",
        max <= 2.0 * head + floor,
        format!("max {max:e}, 2·max over the three largest θ {:e}, floor {floor:e}", 2.0 * head),
    ));
    rep.checks.push(check(
        "factor_two_spread",
        max <= 2.0 * min + floor,
        format!("max {max:e}, 2·min {:e}, floor {floor:e}", 2.0 * min),
    ));
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gas_model::invariant_budget;
    use crate::godunov::Boundary;
    use approx::assert_relative_eq;

    fn small(thetas: Vec<f64>) -> SweepConfig {
        SweepConfig { thetas, sample_count: 200, ..SweepConfig::default() }
    }

    #[test]
    fn fit_rate_examples() {
        let ts = geometric_thetas(0.1, 0.5, 8);
        let pts: Vec<_> = ts.iter().map(|&t| (t, t.sqrt())).collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert_relative_eq!(f.r_squared, 1.0, epsilon = 1e-12);
        let pts: Vec<_> = ts.iter().map(|&t| (t, 3.0 * t)).collect();
        let f = fit_rate(&pts).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-12);
        let pts: Vec<_> = ts
            .iter()
            .enumerate()
            .map(|(k, &t)| (t, t.sqrt() * (1.0 + 0.01 * (k as f64).sin())))
            .collect();
        assert!((fit_rate(&pts).unwrap().slope - 0.5).abs() < 0.02);
        let mut pts: Vec<_> = ts.iter().take(3).map(|&t| (t, t)).collect();
        pts.push((1e-3, 0.0));
        assert!(matches!(fit_rate(&pts), Err(Error::InsufficientData { usable: 3, .. })));
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::default().validate().is_ok());
        assert_eq!(SweepConfig::default().thetas.len(), 11);
        assert!(small(vec![0.1, 0.2]).validate().is_err());
        assert!(small(vec![1.0]).validate().is_err());
        let bad_xi = SweepConfig { xi_grid: vec![0.39], ..SweepConfig::default() };
        assert!(bad_xi.validate().is_err());
    }

    #[test]
    fn sampler_covers_the_region() {
        let w0 = BoundBudget::new(2.0).unwrap();
        for &t in &[0.0, 0.01, 0.5] {
            let theta = Theta::new(t).unwrap();
            let s = sample_states(theta, w0, 1000, 7);
            let vac = s.iter().filter(|c| c.is_vacuum()).count();
            let near = s.iter().filter(|c| c.rho > 0.0 && c.rho < 1e-3).count();
            assert!(vac >= 50 && near >= 100);
            let slack = BoundBudget::new(2.0 + 1e-11).unwrap();
            assert!(s.iter().all(|c| invariant_budget(theta, c, slack)));
            assert!(s.iter().all(|c| c.rho <= 2f64.exp()));
            assert_eq!(s, sample_states(theta, w0, 1000, 7));
        }
    }

    #[test]
    fn entropy_sweep_is_deterministic_and_decays() {
        let cfg = small(geometric_thetas(0.1, 0.5, 5));
        let a = entropy_rate_sweep(&cfg).unwrap();
        assert_eq!(a.to_csv(), entropy_rate_sweep(&cfg).unwrap().to_csv());
        assert!(a.to_csv().starts_with("theta,xi,sup_gap_eta,sup_gap_q,sup_f_xi\n"));
        assert_eq!(a.rows.len(), 25);
        let fit = a.fit("gap_eta").unwrap().fit.as_ref().unwrap();
        assert!(fit.slope > 0.4, "{fit:?}");
    }

    #[test]
    fn energy_sweep_on_the_rest_state_is_flat_zero() {
        let cfg = small(geometric_thetas(0.1, 0.5, 5));
        let states = [ConservedState { rho: 1.0, m: 0.0 }];
        let g: Vec<f64> = cfg
            .thetas
            .iter()
            .map(|&t| energy_gap(Theta::new(t).unwrap(), &states[0]).0)
            .collect();
        let fit = metric_fit("gap", &cfg.thetas, &g).unwrap();
        assert!(fit.is_flat_zero());
        let rep = energy_rate_sweep(&cfg).unwrap();
        assert!(rep.fit("gap_eta_star").unwrap().fit.as_ref().unwrap().slope > 0.8);
        assert!(rep.checks.iter().find(|c| c.name == "largest_theta_dominates").unwrap().passed);
    }

    #[test]
    fn riemann_limit_equal_states_vanish() {
        let w = SampleWindow::new(1.0, -2.0, 2.0, 400).unwrap();
        let cfg = small(geometric_thetas(0.1, 0.5, 4));
        let rep = riemann_limit_sweep((1.0, 0.2), (1.0, 0.2), w, &cfg).unwrap();
        assert!(rep.column("l1_rho").unwrap().iter().all(|&d| d == 0.0));
        assert!(rep.fit("l1_total").unwrap().is_flat_zero());
    }

    #[test]
    fn two_shock_distance_drops() {
        let w = SampleWindow::new(1.0, -2.0, 2.0, 2000).unwrap();
        let cfg = small(vec![0.1, 0.01, 1e-3, 1e-4]);
        let rep = riemann_limit_sweep((1.0, 0.5), (1.0, -0.5), w, &cfg).unwrap();
        let d = rep.column("l1_rho").unwrap();
        assert!(d[3] <= d[0] / 10.0);
        assert!(rep.to_csv().contains(",S1+S2\n"));
    }

    #[test]
    fn decavitation_examples() {
        let cfg = small(geometric_thetas(0.1, 0.5, 4));
        let rep = decavitation_experiment((1.0, 0.0), (1.0, 4.0), &cfg).unwrap();
        assert_eq!(rep.scalar("theta_star"), Some("0.5"));
        assert!(rep.to_csv().contains("theta_star=0.5\n"));
        assert!(rep.passed(), "{:?}", rep.checks);
        let t = rep.column("theta").unwrap();
        let r = rep.column("rho_mid").unwrap();
        assert_relative_eq!(t[0], 0.51, epsilon = 1e-12);
        assert_eq!(r[0], 0.0);
        assert!(r[1] > 0.0);
        let rep = decavitation_experiment((1.0, 0.0), (1.0, 1.0), &cfg).unwrap();
        assert_eq!(rep.scalar("theta_star"), Some("none"));
        assert!(rep.column("rho_mid").unwrap().iter().all(|&r| r > 0.0));
        assert!(decavitation_experiment((1.0, 1.0), (1.0, 0.0), &cfg).is_err());
    }

    #[test]
    fn one_side_vacuum_edges() {
        let w = SampleWindow::new(1.0, -3.0, 3.0, 1200).unwrap();
        let cfg = small(vec![0.1, 0.05, 0.02, 0.01]);
        let rep = one_side_vacuum_experiment(1.0, 0.0, w, &cfg).unwrap();
        assert!(rep.column("right_edge").unwrap().iter().all(|&e| e == 1.0));
        let rep = one_side_vacuum_experiment(2.0, 0.0, w, &cfg).unwrap();
        let e = rep.column("right_edge").unwrap();
        assert!(e.windows(2).all(|p| p[0] > p[1]) && e.iter().all(|&x| x > 1.0));
        assert!(rep.checks.iter().find(|c| c.name == "right_edge_bound").unwrap().passed);
        assert!(rep.checks.iter().find(|c| c.name == "approximating_budget").unwrap().passed);
    }

    #[test]
    fn dissipation_sweep_small() {
        let grid = Grid1D::new(-1.0, 1.0, 100, Boundary::Outflow).unwrap();
        let set = CompactSet::new((0.1, 0.3), (-0.3, 0.3)).unwrap();
        let setup = DissipationSetup { left: (1.0, -0.3), right: (1.0, 0.3), x0: 0.0, grid, t_end: 0.5, cfl: 0.5, set };
        let cfg = small(vec![0.4, 0.2, 0.1]);
        let rep = dissipation_uniformity_sweep(&setup, &cfg).unwrap();
        let v = rep.column("tv_estimate").unwrap();
        let f = rep.column("grid_floor").unwrap();
        assert!(v.iter().zip(&f).all(|(a, b)| a <= b));
        assert!(rep.to_csv().starts_with("theta,tv_estimate,grid_floor\n"));
    }
}
