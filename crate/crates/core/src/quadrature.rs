//! Averages against the kernel weights `e^{κτ}[1−τ²]_+^λ` on `[−1, 1]`.
//!
//! Every weak entropy for `θ > 0` is a probability average of this form with
//! `λ = (1−θ)/(2θ)`. For moderate `θ` a Gauss–Jacobi (Gegenbauer) rule is
//! used. As `θ → 0` the weight collapses to a bump of width `√(θ/(1−θ))`
//! around its peak, so a fixed rule on `[−1, 1]` sees almost nothing; the
//! [`QuadMode::GaussianLimit`] rule instead substitutes
//! `τ = τ* + √(θ/(1−θ))·z` and integrates the window `|z| ≤ 10` with
//! composite Gauss–Legendre panels.
//!
//! The adaptive Gauss–Kronrod integrator is the reference oracle. It shares
//! no nodes with the fixed rules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{domain, Error, Result};
use crate::gas_model::Theta;

/// Below this `θ` the automatic choice switches to the Gaussian-limit rule.
pub const GAUSSIAN_LIMIT_THRESHOLD: f64 = 0.05;

const DEFAULT_NODES: usize = 64;
const PANEL_NODES: usize = 16;
const WINDOW_HALF_WIDTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadMode {
    JacobiWeight,
    GaussianLimit,
    AdaptiveOracle { tolerance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub node_count: usize,
    pub mode: QuadMode,
}

impl QuadratureSpec {
    pub fn new(node_count: usize, mode: QuadMode) -> Result<Self> {
        if node_count < 8 {
            return domain(format!("node_count must be at least 8, got {node_count}"));
        }
        if let QuadMode::AdaptiveOracle { tolerance } = mode {
            if !(tolerance > 0.0) {
                return domain(format!("oracle tolerance must be positive, got {tolerance}"));
            }
        }
        Ok(Self { node_count, mode })
    }

    /// 64-node rule, Jacobi for `θ ≥ 0.05` and Gaussian-limit below.
    pub fn for_theta(theta: Theta) -> Self {
        let mode = if theta.value() >= GAUSSIAN_LIMIT_THRESHOLD {
            QuadMode::JacobiWeight
        } else {
            QuadMode::GaussianLimit
        };
        Self { node_count: DEFAULT_NODES, mode }
    }

    pub fn oracle(tolerance: f64) -> Self {
        Self {
            node_count: DEFAULT_NODES,
            mode: QuadMode::AdaptiveOracle { tolerance },
        }
    }
}

/// The (unnormalized) measure `e^{tilt·τ}[1−τ²]^λ dτ` on `(−1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelMeasure {
    lambda: f64,
    tilt: f64,
}

impl KernelMeasure {
    pub fn new(lambda: f64, tilt: f64) -> Result<Self> {
        if !(lambda > -1.0) || !lambda.is_finite() || !tilt.is_finite() {
            return domain(format!("invalid kernel measure (lambda {lambda}, tilt {tilt})"));
        }
        Ok(Self { lambda, tilt })
    }

    /// Weight exponent `λ = (1−θ)/(2θ)` of the θ-kernel.
    pub fn for_theta(theta: Theta, tilt: f64) -> Result<Self> {
        if theta.is_isothermal() {
            return Err(Error::Unsupported("kernel measure needs theta > 0"));
        }
        Self::new(weight_exponent(theta.value()), tilt)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    /// Maximizer of the log-weight, the root of `κ(1−τ²) = 2λτ` in `(−1, 1)`.
    pub fn peak(&self) -> f64 {
        if self.tilt == 0.0 {
            return 0.0;
        }
        if self.lambda <= 0.0 {
            return self.tilt.signum();
        }
        self.tilt / (self.lambda + self.lambda.hypot(self.tilt))
    }

    /// Log-density relative to its value at the peak.
    pub fn log_density(&self, tau: f64) -> f64 {
        self.raw_log(tau) - self.raw_log(self.peak())
    }

    fn raw_log(&self, tau: f64) -> f64 {
        if tau.abs() >= 1.0 {
            return f64::NEG_INFINITY;
        }
        let base = (-tau).ln_1p() + tau.ln_1p();
        let mut l = self.tilt * tau;
        if self.lambda != 0.0 {
            l += self.lambda * base;
        }
        l
    }

    /// Discretizes the normalized measure according to `spec`.
    pub fn averager(&self, spec: &QuadratureSpec) -> Result<Averager> {
        match spec.mode {
            QuadMode::JacobiWeight => {
                let (nodes, weights) = gegenbauer_probability(spec.node_count, self.lambda);
                Ok(Averager::Rule(self.tilted(nodes, weights)))
            }
            QuadMode::GaussianLimit => Ok(Averager::Rule(self.window_rule(spec.node_count))),
            QuadMode::AdaptiveOracle { tolerance } => Ok(Averager::Oracle {
                measure: *self,
                tolerance,
            }),
        }
    }

    fn tilted(&self, nodes: Vec<f64>, weights: Vec<f64>) -> ProbabilityRule {
        let peak = nodes
            .iter()
            .map(|&t| self.tilt * t)
            .fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, &w)| w * (self.tilt * t - peak).exp())
            .collect();
        ProbabilityRule::normalized(nodes, weights)
    }

    fn window_rule(&self, node_count: usize) -> ProbabilityRule {
        // Curvature of the log-weight is at least 2λ everywhere, so √(1/2λ)
        // bounds the decay length on both sides of the peak.
        let scale = if self.lambda > 0.0 {
            (0.5 / self.lambda).sqrt()
        } else {
            1.0
        };
        let center = self.peak();
        let lo = (center - WINDOW_HALF_WIDTH * scale).max(-1.0);
        let hi = (center + WINDOW_HALF_WIDTH * scale).min(1.0);
        let panels = (node_count / PANEL_NODES).max(1);
        let per_panel = node_count / panels;
        let (gl_nodes, gl_weights) = gauss_legendre(per_panel);
        let width = (hi - lo) / panels as f64;
        let mut nodes = Vec::with_capacity(panels * per_panel);
        let mut weights = Vec::with_capacity(panels * per_panel);
        for p in 0..panels {
            let a = lo + p as f64 * width;
            let mid = a + 0.5 * width;
            for (x, w) in gl_nodes.iter().zip(&gl_weights) {
                let tau = mid + 0.5 * width * x;
                nodes.push(tau);
                weights.push(0.5 * width * w * self.log_density(tau).exp());
            }
        }
        ProbabilityRule::normalized(nodes, weights)
    }
}

/// `λ = (1−θ)/(2θ)`.
pub fn weight_exponent(theta: f64) -> f64 {
    (1.0 - theta) / (2.0 * theta)
}

/// Discrete probability measure on `[−1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ProbabilityRule {
    fn normalized(nodes: Vec<f64>, mut weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mean(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

/// A ready-to-use average `⟨f⟩` against a normalized [`KernelMeasure`].
#[derive(Debug, Clone)]
pub enum Averager {
    Rule(ProbabilityRule),
    Oracle { measure: KernelMeasure, tolerance: f64 },
}

impl Averager {
    pub fn mean(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        match self {
            Averager::Rule(rule) => Ok(rule.mean(f)),
            Averager::Oracle { measure, tolerance } => {
                let (num, den) = oracle_ratio(measure, *tolerance, &f)?;
                Ok(num / den)
            }
        }
    }

    /// Averages two integrands sharing the same weight evaluations.
    pub fn mean_pair(&self, f: impl Fn(f64) -> (f64, f64)) -> Result<(f64, f64)> {
        match self {
            Averager::Rule(rule) => {
                let mut a = 0.0;
                let mut b = 0.0;
                for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let (x, y) = f(t);
                    a += w * x;
                    b += w * y;
                }
                Ok((a, b))
            }
            Averager::Oracle { .. } => Ok((self.mean(|t| f(t).0)?, self.mean(|t| f(t).1)?)),
        }
    }
}

fn oracle_ratio(measure: &KernelMeasure, tol: f64, f: &dyn Fn(f64) -> f64) -> Result<(f64, f64)> {
    let peak = measure.peak();
    let scale = if measure.lambda > 0.0 {
        (0.5 / measure.lambda).sqrt()
    } else {
        1.0
    };
    let mut breaks = vec![-1.0, 1.0];
    for k in [-8.0, -2.0, 0.0, 2.0, 8.0] {
        let b = peak + k * scale;
        if b > -1.0 && b < 1.0 {
            breaks.push(b);
        }
    }
    let den = integrate_adaptive(|t| measure.log_density(t).exp(), &breaks, tol, 0.0)?;
    let num = integrate_adaptive(|t| measure.log_density(t).exp() * f(t), &breaks, tol, tol * den)?;
    Ok((num, den))
}

/// Gauss–Legendre nodes and weights on `[−1, 1]` (weights sum to 2).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let (nodes, w) = golub_welsch(&vec![0.0; n], &off);
    (nodes, w.into_iter().map(|w| 2.0 * w).collect())
}

/// Gauss rule for the probability measure `∝ [1−τ²]^λ` on `[−1, 1]`.
pub fn gegenbauer_probability(n: usize, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            let s = 2.0 * k + 2.0 * lambda;
            (k * (k + 2.0 * lambda) / ((s + 1.0) * (s - 1.0))).sqrt()
        })
        .collect();
    golub_welsch(&vec![0.0; n], &off)
}

/// Nodes and normalized weights from the Jacobi matrix of a three-term
/// recurrence (diagonal `a`, off-diagonal `b`).
fn golub_welsch(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = a.len();
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        j[(i, i)] = a[i];
        if i + 1 < n {
            j[(i, i + 1)] = b[i];
            j[(i + 1, i)] = b[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
    // Symmetrize: the measures used here are all even before tilting.
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let nodes = pairs.iter().map(|p| p.0).collect();
    let weights = pairs.iter().map(|p| p.1 / total).collect();
    (nodes, weights)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.partial_cmp(&other.err).unwrap_or(Ordering::Equal)
    }
}

const MAX_PIECES: usize = 20_000;

/// Globally adaptive Gauss–Kronrod (7/15) integration over the sorted
/// breakpoints, halving the worst interval until the summed error estimate
/// drops below `max(rel_tol·|I|, abs_tol)`.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> f64,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let mut pts = breakpoints.to_vec();
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap_or(Ordering::Equal));
    pts.dedup();
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut err = 0.0;
    for w in pts.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Piece { a: w[0], b: w[1], value: v, err: e });
    }
    loop {
        if !(total.is_finite() && err.is_finite()) {
            return Err(Error::Accuracy {
                achieved: f64::INFINITY,
                requested: rel_tol,
            });
        }
        if err <= (rel_tol * total.abs()).max(abs_tol) {
            break;
        }
        if heap.len() >= MAX_PIECES {
            return Err(Error::Accuracy {
                achieved: err / total.abs().max(f64::MIN_POSITIVE),
                requested: rel_tol,
            });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Cannot split further in floating point.
            return Err(Error::Accuracy {
                achieved: err / total.abs().max(f64::MIN_POSITIVE),
                requested: rel_tol,
            });
        }
        let (v1, e1) = gk15(&f, worst.a, mid);
        let (v2, e2) = gk15(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.err;
        heap.push(Piece { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, err: e2 });
    }
    // Re-sum to shed accumulated cancellation in the running total.
    Ok(heap.iter().map(|p| p.value).sum())
}
