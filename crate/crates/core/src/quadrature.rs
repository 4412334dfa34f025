//! Tensor-product quadrature over the base domains.
//!
//! The disc uses a polar factorization: Gauss-Legendre in `r` against the
//! weight `r`, and the trapezoid rule in `θ` (spectrally accurate for smooth
//! periodic integrands). Rectangles use Gauss-Legendre in both directions.
//! Each refinement level doubles the node counts; the error estimate is the
//! difference between the two finest levels.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conformal::{AnalyticMap, BaseDomain};
use crate::error::{Error, Result};

/// Node counts per direction on the coarsest level and the number of levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    nodes_radial_or_x: usize,
    nodes_angular_or_y: usize,
    levels: usize,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid { nodes_radial_or_x: 64, nodes_angular_or_y: 64, levels: 3 }
    }
}

impl QuadratureGrid {
    pub fn new(nodes_radial_or_x: usize, nodes_angular_or_y: usize, levels: usize) -> Result<Self> {
        if nodes_radial_or_x < 8 || nodes_angular_or_y < 8 {
            return Err(Error::domain(format!(
                "quadrature needs at least 8 nodes per direction, got {nodes_radial_or_x} x {nodes_angular_or_y}"
            )));
        }
        if !(1..=8).contains(&levels) {
            return Err(Error::domain(format!("refinement levels must be in 1..=8, got {levels}")));
        }
        Ok(QuadratureGrid { nodes_radial_or_x, nodes_angular_or_y, levels })
    }

    pub fn square(nodes: usize, levels: usize) -> Result<Self> {
        Self::new(nodes, nodes, levels)
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Node counts of each level, coarsest first. A single-level grid is
    /// preceded by a half-resolution level so an error estimate exists.
    fn level_sizes(&self) -> Vec<(usize, usize)> {
        let (a, b) = (self.nodes_radial_or_x, self.nodes_angular_or_y);
        if self.levels == 1 {
            return vec![((a / 2).max(4), (b / 2).max(4)), (a, b)];
        }
        (0..self.levels).map(|l| (a << l, b << l)).collect()
    }

    /// Nodes and weights of the finest level.
    pub fn finest_rule(&self, base: BaseDomain) -> Vec<(Complex64, f64)> {
        let (a, b) = *self.level_sizes().last().expect("at least one level");
        tensor_rule(base, a, b)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn tensor_rule(base: BaseDomain, n_a: usize, n_b: usize) -> Vec<(Complex64, f64)> {
    let mut rule = Vec::with_capacity(n_a * n_b);
    match base {
        BaseDomain::UnitDisc => {
            let (x, w) = gauss_legendre(n_a);
            let dtheta = 2.0 * PI / n_b as f64;
            for (xi, wi) in x.iter().zip(&w) {
                let r = 0.5 * (xi + 1.0);
                let wr = 0.5 * wi * r;
                for k in 0..n_b {
                    rule.push((Complex64::from_polar(r, dtheta * k as f64), wr * dtheta));
                }
            }
        }
        BaseDomain::Rectangle { half_width, half_height } => {
            let (x, wx) = gauss_legendre(n_a);
            let (y, wy) = gauss_legendre(n_b);
            for (xi, wxi) in x.iter().zip(&wx) {
                for (yj, wyj) in y.iter().zip(&wy) {
                    rule.push((
                        Complex64::new(xi * half_width, yj * half_height),
                        wxi * wyj * half_width * half_height,
                    ));
                }
            }
        }
    }
    rule
}

/// A quadrature value with its level-difference error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error_estimate: f64,
}

fn level_values<F>(f: &F, base: BaseDomain, grid: &QuadratureGrid) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> f64,
{
    grid.level_sizes()
        .into_iter()
        .map(|(a, b)| {
            let mut sum = 0.0;
            for (z, w) in tensor_rule(base, a, b) {
                let v = f(z);
                if !v.is_finite() {
                    return Err(Error::Evaluation { x: z.re, y: z.im, value: v });
                }
                sum += w * v;
            }
            Ok(sum)
        })
        .collect()
}

fn estimate_from_levels(levels: &[f64]) -> Estimate {
    let n = levels.len();
    Estimate { value: levels[n - 1], error_estimate: (levels[n - 1] - levels[n - 2]).abs() }
}

/// `∬_base f` at the finest level.
pub fn integrate<F>(f: F, base: BaseDomain, grid: &QuadratureGrid) -> Result<Estimate>
where
    F: Fn(Complex64) -> f64,
{
    Ok(estimate_from_levels(&level_values(&f, base, grid)?))
}

/// Area of the image domain, `∬_base J`.
pub fn image_area(map: &AnalyticMap, grid: &QuadratureGrid) -> Result<Estimate> {
    integrate(|z| map.jacobian_unchecked(z), map.base(), grid)
}

/// Lebesgue exponent, finite or `∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

/// `‖J | L^α(base)‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianNorm {
    /// `(∬ J^α)^{1/α}`, or for `α = ∞` the largest Jacobian at the finest
    /// nodes (a lower estimate of the essential supremum).
    pub value: f64,
    /// `ln value`, exact even when `∬ J^α` overflows.
    pub log_value: f64,
    pub error_estimate: f64,
    /// The same norm on each refinement level, coarsest first.
    pub level_norms: Vec<f64>,
    /// Closed-form essential supremum of the map family, when known.
    pub closed_form_sup: Option<f64>,
}

/// Growth of more than 1% in `(∬ J^power)^{1/max(|power|, 1)}` between the
/// two finest levels signals a non-integrable power. Takes `ln ∬ J^power`
/// per level.
fn check_refinement(log_levels: &[f64], power: f64) -> Result<()> {
    let n = log_levels.len();
    if (log_levels[n - 1] - log_levels[n - 2]) / power.abs().max(1.0) > 1.01f64.ln() {
        return Err(Error::Integrability { levels: log_levels.iter().map(|l| l.exp()).collect() });
    }
    Ok(())
}

/// `ln ∬ J^power` on every level, scaled by the nodal maximum so that large
/// powers do not overflow.
fn jacobian_power_log_levels(map: &AnalyticMap, power: f64, grid: &QuadratureGrid) -> Result<Vec<f64>> {
    grid.level_sizes()
        .into_iter()
        .map(|(a, b)| {
            let nodes: Vec<(f64, f64)> =
                tensor_rule(map.base(), a, b).into_iter().map(|(z, w)| (map.jacobian_unchecked(z), w)).collect();
            let ln_max = nodes.iter().map(|(j, _)| j.ln()).fold(f64::NEG_INFINITY, f64::max);
            let scaled: f64 = nodes.iter().map(|(j, w)| w * (power * (j.ln() - ln_max)).exp()).sum();
            let log = power * ln_max + scaled.ln();
            if !log.is_finite() {
                return Err(Error::domain(format!("∬ J^{power} is not finite on the quadrature grid")));
            }
            Ok(log)
        })
        .collect()
}

/// `∬_base J^power`, rejecting refinement sequences that keep growing.
pub fn integrate_jacobian_power(map: &AnalyticMap, power: f64, grid: &QuadratureGrid) -> Result<Estimate> {
    let logs = jacobian_power_log_levels(map, power, grid)?;
    check_refinement(&logs, power)?;
    let values: Vec<f64> = logs.iter().map(|l| l.exp()).collect();
    Ok(estimate_from_levels(&values))
}

pub fn jacobian_alpha_norm(map: &AnalyticMap, alpha: Exponent, grid: &QuadratureGrid) -> Result<JacobianNorm> {
    let level_norms: Vec<f64> = match alpha {
        Exponent::Infinite => grid
            .level_sizes()
            .into_iter()
            .map(|(a, b)| {
                tensor_rule(map.base(), a, b)
                    .into_iter()
                    .map(|(z, _)| map.jacobian_unchecked(z))
                    .fold(0.0, f64::max)
            })
            .collect(),
        Exponent::Finite(alpha) => {
            if !(alpha >= 1.0 && alpha.is_finite()) {
                return Err(Error::domain(format!("Jacobian norm exponent must be >= 1, got {alpha}")));
            }
            let logs = jacobian_power_log_levels(map, alpha, grid)?;
            check_refinement(&logs, alpha)?;
            logs.iter().map(|l| (l / alpha).exp()).collect()
        }
    };
    let e = estimate_from_levels(&level_norms);
    Ok(JacobianNorm {
        value: e.value,
        log_value: e.value.ln(),
        error_estimate: e.error_estimate,
        level_norms,
        closed_form_sup: map.jacobian_sup_closed_form(),
    })
}
