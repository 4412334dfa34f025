//! Lower bounds for the first Dirichlet eigenvalue `λ_p` of the p-Laplacian.
//!
//! Every bound has the shape `1/λ_p <= RHS`, and every RHS is assembled as a
//! sum of logarithms (the factors of the product). A [`BoundReport`] keeps
//! each labelled log factor for auditing and reports `λ_p >= exp(-ln RHS)`.
//!
//! For the conformal α-regular and ∞-regular bounds:
//!
//! ```text
//! ln RHS = min_q [ p ln A_q + p(2-q)/(2q) ln|base| ] + (p-2)/2 ln|Ω| + ln ‖J | L^α‖
//! ```
//!
//! with `q` ranging over `(q*, 2)`, `q* = 2αp / (αp + 2(α-1))`, and `A_q` the
//! open-branch Sobolev-Poincare constant. The quasidisc bounds live in
//! [`quasidisc`].

pub mod quasidisc;

use serde::{Deserialize, Serialize};

use crate::conformal::AnalyticMap;
use crate::error::{Error, Result};
use crate::optimize::{scan_then_golden, Minimum};
use crate::quadrature::{self, Exponent, QuadratureGrid};
use crate::sobolev::{ln_sp_open_branch_gap, INTERVAL_CLIP, SCAN_POINTS, SEARCH_REL_TOL};

pub use quasidisc::{
    alpha_tilde, alpha_tilde_excess, jacobian_norm_bound_quasidisc, jacobian_norm_bound_quasidisc_excess, m_p_k_log, nu,
    nu_excess, quasidisc_lower_bound, star_spiral_k, star_spiral_lower_bound, Reading,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremTag {
    AlphaRegular,
    InftyRegular,
    Quasidisc,
    StarSpiral,
}

/// One labelled logarithmic factor of a bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Factor {
    pub name: String,
    pub log_value: f64,
}

/// A positive quantity carried both as a plain number (0 on underflow) and
/// as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    pub value: f64,
    pub log_value: f64,
}

impl LogValue {
    pub fn from_log(log_value: f64) -> Self {
        LogValue { value: log_value.exp(), log_value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub theorem_tag: TheoremTag,
    pub p: f64,
    pub alpha: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub beta: Option<f64>,
    pub optimal_q: f64,
    pub optimal_alpha: Option<f64>,
    /// `ln` of the right-hand side of `1/λ <= RHS`.
    pub log_rhs: f64,
    /// `exp(-log_rhs)`.
    pub lower_bound_lambda: LogValue,
    pub factors: Vec<Factor>,
}

impl BoundReport {
    /// Log value of the named factor.
    pub fn factor(&self, name: &str) -> Option<f64> {
        self.factors.iter().find(|f| f.name == name).map(|f| f.log_value)
    }
}

pub(crate) fn factor(name: &str, log_value: f64) -> Factor {
    Factor { name: name.to_string(), log_value }
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::domain(format!("p > 2 violated: p = {p}")));
    }
    Ok(())
}

/// `q* = 2αp / (αp + 2(α-1))`, or `2p / (p+2)` for `α = ∞`.
pub fn qstar(p: f64, alpha: Exponent) -> f64 {
    2.0 - qstar_gap(p, alpha)
}

/// `2 - q*`, computed without cancellation.
pub fn qstar_gap(p: f64, alpha: Exponent) -> f64 {
    match alpha {
        Exponent::Infinite => 4.0 / (p + 2.0),
        Exponent::Finite(a) => 4.0 * (a - 1.0) / (a * p + 2.0 * (a - 1.0)),
    }
}

/// `2 - q*` for `α = 1 + excess`.
pub(crate) fn qstar_gap_from_excess(p: f64, excess: f64) -> f64 {
    4.0 * excess / ((1.0 + excess) * p + 2.0 * excess)
}

/// The q-dependent part of the conformal-regular bounds,
/// `p ln A_q + p(2-q)/(2q) ln|base|`, as a function of the gap `2 - q`.
pub fn q_objective_gap(p: f64, ln_base_measure: f64, gap: f64) -> f64 {
    p * ln_sp_open_branch_gap(gap) + p * gap / (2.0 * (2.0 - gap)) * ln_base_measure
}

/// Minimizes [`q_objective_gap`] over `q` in `(2 - gap_max, 2)`; the
/// returned `x` is the optimal gap.
pub(crate) fn q_infimum_gap(p: f64, ln_base_measure: f64, gap_max: f64) -> Minimum {
    let clip = INTERVAL_CLIP.min(1e-3 * gap_max);
    scan_then_golden(
        |gap| q_objective_gap(p, ln_base_measure, gap),
        clip,
        gap_max - clip,
        SCAN_POINTS,
        SEARCH_REL_TOL,
    )
}

/// Where the `L^∞` norm of the Jacobian comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupSource {
    /// The family's closed-form supremum when known, else the grid maximum.
    #[default]
    ClosedForm,
    GridMax,
}

fn regular_bound(
    tag: TheoremTag,
    p: f64,
    alpha: Exponent,
    map: &AnalyticMap,
    ln_jacobian_norm: f64,
    grid: &QuadratureGrid,
) -> Result<BoundReport> {
    let area = quadrature::image_area(map, grid)?.value;
    let ln_base = map.base().measure().ln();
    let min = q_infimum_gap(p, ln_base, qstar_gap(p, alpha));
    let ln_area = area.ln();
    let log_rhs = min.value + 0.5 * (p - 2.0) * ln_area + ln_jacobian_norm;
    Ok(BoundReport {
        theorem_tag: tag,
        p,
        alpha: match alpha {
            Exponent::Finite(a) => Some(a),
            Exponent::Infinite => None,
        },
        k: None,
        beta: None,
        optimal_q: 2.0 - min.x,
        optimal_alpha: None,
        log_rhs,
        lower_bound_lambda: LogValue::from_log(-log_rhs),
        factors: vec![
            factor("q_infimum", min.value),
            factor("ln_sp_constant", ln_sp_open_branch_gap(min.x)),
            factor("ln_base_measure", ln_base),
            factor("ln_image_area", ln_area),
            factor("image_area_term", 0.5 * (p - 2.0) * ln_area),
            factor("ln_jacobian_norm", ln_jacobian_norm),
        ],
    })
}

/// Bound for a conformal α-regular domain, `α > 1`:
/// `‖J | L^α‖ = (∬ J^α)^{1/α}` by quadrature over the base.
pub fn lower_bound_alpha_regular(p: f64, alpha: f64, map: &AnalyticMap, grid: &QuadratureGrid) -> Result<BoundReport> {
    check_p(p)?;
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha > 1 violated: alpha = {alpha}")));
    }
    let norm = quadrature::jacobian_alpha_norm(map, Exponent::Finite(alpha), grid)?;
    regular_bound(TheoremTag::AlphaRegular, p, Exponent::Finite(alpha), map, norm.log_value, grid)
}

/// Bound for a conformal ∞-regular domain (bounded Jacobian), `q* = 2p/(p+2)`.
pub fn lower_bound_infty_regular(
    p: f64,
    map: &AnalyticMap,
    grid: &QuadratureGrid,
    source: SupSource,
) -> Result<BoundReport> {
    check_p(p)?;
    let sup = match (source, map.jacobian_sup_closed_form()) {
        (SupSource::ClosedForm, Some(sup)) => sup,
        _ => quadrature::jacobian_alpha_norm(map, Exponent::Infinite, grid)?.value,
    };
    regular_bound(TheoremTag::InftyRegular, p, Exponent::Infinite, map, sup.ln(), grid)
}
