//! Quasidisc bounds.
//!
//! For a K-quasidisc `Ω`, `λ_p >= M_p(K) / |Ω|^{p/2}`, where `M_p(K)` depends
//! only on `p` and `K`. Its constants are extreme: the factor
//! `exp(-K²π²(2+π²)²/(2 ln 3))` is about `e^{-633}` at `K = 1`, and the
//! admissible exponents `α` lie within `1e-13` of 1. Everything here is
//! therefore computed in natural-log space with `α` carried as its excess
//! `δ = α - 1`.

use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use super::{check_p, factor, q_infimum_gap, qstar_gap_from_excess, BoundReport, Factor, LogValue, TheoremTag};
use crate::error::{Error, Result};
use crate::optimize::{log_bisect, scan_then_golden};
use crate::sobolev::{ln_sp_open_branch_gap, SEARCH_REL_TOL};

const LN_PI: f64 = 1.144_729_885_849_400_2;
const ALPHA_SCAN_POINTS: usize = 50;
/// Relative clip of the α search at both ends of `(1, α*)`.
const ALPHA_CLIP: f64 = 1e-9;
const TILDE_REL_TOL: f64 = 1e-13;

/// Which printed form of `C_α` and `ν` to use.
///
/// `Theorem` takes `C = 10⁶/[(2α-1)(1-ν)]^{1/(2α)}` with `ν ∝ (24π²K²)^{2α}`.
/// `CorollaryLiteral` takes the star/spiral statement at face value:
/// exponent `1/α` and `ν ∝ (24π²K²)^{α}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reading {
    #[default]
    Theorem,
    CorollaryLiteral,
}

impl Reading {
    fn nu_power(self, alpha: f64) -> f64 {
        match self {
            Reading::Theorem => 2.0 * alpha,
            Reading::CorollaryLiteral => alpha,
        }
    }

    fn c_exponent(self, alpha: f64) -> f64 {
        match self {
            Reading::Theorem => 1.0 / (2.0 * alpha),
            Reading::CorollaryLiteral => 1.0 / alpha,
        }
    }
}

fn check_k(k: f64) -> Result<()> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::domain(format!("K >= 1 violated: K = {k}")));
    }
    Ok(())
}

/// `K²π²(2+π²)²/(2 ln 3)`, the magnitude of the exponential term's log.
pub fn exp_term_log(k: f64) -> f64 {
    let s = 2.0 + PI * PI;
    k * k * PI * PI * s * s / (2.0 * 3f64.ln())
}

/// `ln ν` at `α = 1 + delta`.
pub fn ln_nu_excess(delta: f64, k: f64, reading: Reading) -> f64 {
    let alpha = 1.0 + delta;
    let ln_base = (24.0 * PI * PI * k * k).ln();
    8.0 * alpha * LN_10 + (2.0 * delta).ln() - (2.0 * delta).ln_1p() + reading.nu_power(alpha) * ln_base
}

/// `ν(α, K) = 10^{8α} (2α-2)/(2α-1) (24π²K²)^{2α}`, possibly above 1.
pub fn nu(alpha: f64, k: f64) -> f64 {
    nu_excess(alpha - 1.0, k)
}

/// [`nu`] at `α = 1 + delta`.
pub fn nu_excess(delta: f64, k: f64) -> f64 {
    ln_nu_excess(delta, k, Reading::Theorem).exp()
}

/// `α̃ - 1`, where `ν(α̃) = 1`.
pub fn alpha_tilde_excess(k: f64) -> Result<f64> {
    alpha_tilde_excess_with(k, Reading::Theorem)
}

pub fn alpha_tilde_excess_with(k: f64, reading: Reading) -> Result<f64> {
    check_k(k)?;
    log_bisect(|d| ln_nu_excess(d, k, reading), 1e-300, 1.0, TILDE_REL_TOL)
        .ok_or_else(|| Error::Internal(format!("ln nu has no sign change on (0, 1] for K = {k}")))
}

/// The unique root `α̃` of `ν(α) = 1`. Only about three significant digits
/// of `α̃ - 1` survive in this form; see [`alpha_tilde_excess`].
pub fn alpha_tilde(k: f64) -> Result<f64> {
    Ok(1.0 + alpha_tilde_excess(k)?)
}

/// `α* - 1` with `α* = min(K²/(K²-1), α̃)`.
pub fn alpha_star_excess(k: f64, reading: Reading) -> Result<f64> {
    let tilde = alpha_tilde_excess_with(k, reading)?;
    let cap = if k == 1.0 { f64::INFINITY } else { 1.0 / (k * k - 1.0) };
    Ok(tilde.min(cap))
}

/// `ln C` at `α = 1 + delta`; requires `ν < 1`.
pub fn ln_c_excess(delta: f64, k: f64, reading: Reading) -> Result<f64> {
    let ln_nu = ln_nu_excess(delta, k, reading);
    if !(ln_nu < 0.0) {
        return Err(Error::domain(format!("nu < 1 violated at alpha - 1 = {delta:e}, K = {k}")));
    }
    let alpha = 1.0 + delta;
    let ln_one_minus_nu = (-ln_nu.exp()).ln_1p();
    Ok(6.0 * LN_10 - reading.c_exponent(alpha) * ((2.0 * delta).ln_1p() + ln_one_minus_nu))
}

/// Constants attached to one admissible exponent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasidiscParams {
    #[serde(rename = "K")]
    pub k: f64,
    pub kappa_or_alpha: f64,
    pub kappa_excess: f64,
    pub nu: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub alpha_star: f64,
    pub alpha_star_excess: f64,
    pub alpha_tilde: f64,
    pub alpha_tilde_excess: f64,
}

impl QuasidiscParams {
    pub fn new(kappa_excess: f64, k: f64, reading: Reading) -> Result<Self> {
        check_k(k)?;
        let tilde = alpha_tilde_excess_with(k, reading)?;
        let star = alpha_star_excess(k, reading)?;
        check_kappa(kappa_excess, k, star, tilde)?;
        Ok(QuasidiscParams {
            k,
            kappa_or_alpha: 1.0 + kappa_excess,
            kappa_excess,
            nu: ln_nu_excess(kappa_excess, k, reading).exp(),
            c: ln_c_excess(kappa_excess, k, reading)?.exp(),
            alpha_star: 1.0 + star,
            alpha_star_excess: star,
            alpha_tilde: 1.0 + tilde,
            alpha_tilde_excess: tilde,
        })
    }
}

fn check_kappa(delta: f64, k: f64, star: f64, tilde: f64) -> Result<()> {
    if !(delta > 0.0 && delta < star) {
        let cap = if k == 1.0 { "inf".to_string() } else { format!("{}", k * k / (k * k - 1.0)) };
        return Err(Error::domain(format!(
            "kappa must satisfy 1 < kappa < min(K^2/(K^2-1), alpha_tilde) = min({cap}, 1 + {tilde:e}); got kappa - 1 = {delta:e}"
        )));
    }
    Ok(())
}

/// `ln` of the bound on `(∬_Ω J^κ)^{1/κ}` for the inverse Riemann map of a
/// K-quasidisc, at `κ = 1 + delta`.
pub fn jacobian_norm_bound_quasidisc_excess(delta: f64, k: f64, area: f64) -> Result<f64> {
    check_k(k)?;
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::domain(format!("area must be positive, got {area}")));
    }
    let star = alpha_star_excess(k, Reading::Theorem)?;
    check_kappa(delta, k, star, alpha_tilde_excess(k)?)?;
    let ln_c = ln_c_excess(delta, k, Reading::Theorem)?;
    let kappa = 1.0 + delta;
    Ok(2.0 * ln_c + 2.0 * k.ln() - (delta / kappa) * LN_PI - 4f64.ln() + exp_term_log(k) + area.ln())
}

/// Log-space bound on the Jacobian `L^κ` norm; `kappa` as a plain real.
pub fn jacobian_norm_bound_quasidisc(kappa: f64, k: f64, area: f64) -> Result<f64> {
    jacobian_norm_bound_quasidisc_excess(kappa - 1.0, k, area)
}

/// `ln M_p(K)` with the optimizers and an audit trail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpK {
    pub ln_m: f64,
    pub optimal_alpha_excess: f64,
    pub optimal_q: f64,
    /// `2 - optimal_q` at full precision.
    pub optimal_q_gap: f64,
    pub alpha_star_excess: f64,
    pub factors: Vec<Factor>,
}

/// Inner objective at `α = 1 + delta`: the minimum over `q` of
/// `p ln A_q + (p/q + 1/α) ln π + 2 ln C_α`, and the optimal gap `2 - q`.
fn inner(p: f64, k: f64, delta: f64, reading: Reading) -> Result<(f64, f64)> {
    let q_min = q_infimum_gap(p, LN_PI, qstar_gap_from_excess(p, delta));
    let ln_c = ln_c_excess(delta, k, reading)?;
    Ok((q_min.value + 0.5 * p * LN_PI + LN_PI / (1.0 + delta) + 2.0 * ln_c, q_min.x))
}

/// `ln M_p(K)`.
///
/// The printed constant is `(4π^{1+p/2}/K²) exp(-K²π²(2+π²)²/(2 ln 3))`
/// times an optimum over `α ∈ (1, α*)` and `q ∈ (q*, 2)` of
/// `A^{-p} π^{-p/q-1/α} C_α^{-2}`. Taking that optimum as an infimum would
/// send `M` to 0 (`A_q` blows up as `q → 2`), so this is the choice that
/// makes the bound on `1/λ` smallest, i.e. the supremum of the bracket.
pub fn m_p_k_log(p: f64, k: f64) -> Result<f64> {
    Ok(m_p_k_detail(p, k, Reading::Theorem)?.ln_m)
}

pub fn m_p_k_detail(p: f64, k: f64, reading: Reading) -> Result<MpK> {
    check_p(p)?;
    check_k(k)?;
    let star = alpha_star_excess(k, reading)?;
    if !(star > 0.0) {
        return Err(Error::domain(format!("empty alpha interval: alpha* - 1 = {star:e}")));
    }
    // Search u = δ/δ* so the scan resolves the whole interval.
    let objective = |u: f64| inner(p, k, u * star, reading).map(|v| v.0).unwrap_or(f64::INFINITY);
    let best = scan_then_golden(objective, ALPHA_CLIP, 1.0 - ALPHA_CLIP, ALPHA_SCAN_POINTS, SEARCH_REL_TOL);
    let delta = best.x * star;
    let (inner_value, gap) = inner(p, k, delta, reading)?;
    let ln_c = ln_c_excess(delta, k, reading)?;

    let exp_term = -exp_term_log(k);
    let prefactor = 4f64.ln() + (1.0 + 0.5 * p) * LN_PI - 2.0 * k.ln();
    let ln_m = prefactor + exp_term - inner_value;
    Ok(MpK {
        ln_m,
        optimal_alpha_excess: delta,
        optimal_q: 2.0 - gap,
        optimal_q_gap: gap,
        alpha_star_excess: star,
        factors: vec![
            factor("prefactor", prefactor),
            factor("exp_term", exp_term),
            factor("ln_sp_constant", ln_sp_open_branch_gap(gap)),
            factor("ln_c_alpha", ln_c),
            factor("inner_infimum", inner_value),
            factor("ln_M", ln_m),
            factor("ln_M_without_exp_term", ln_m - exp_term),
            factor("ln_M_star", ln_m - 0.5 * p * LN_PI),
            factor("ln_alpha_star_excess", star.ln()),
            factor("ln_optimal_alpha_excess", delta.ln()),
        ],
    })
}

fn quasidisc_report(tag: TheoremTag, p: f64, k: f64, beta: Option<f64>, area: f64, reading: Reading) -> Result<BoundReport> {
    if !(area > 0.0) || !area.is_finite() {
        return Err(Error::domain(format!("area must be positive, got {area}")));
    }
    let m = m_p_k_detail(p, k, reading)?;
    let ln_area = area.ln();
    // 1/λ <= |Ω|^{p/2} / M.
    let log_rhs = 0.5 * p * ln_area - m.ln_m;
    let mut factors = m.factors;
    factors.push(factor("ln_image_area", ln_area));
    factors.push(factor("ln_R_star", 0.5 * (ln_area - LN_PI)));
    Ok(BoundReport {
        theorem_tag: tag,
        p,
        alpha: None,
        k: Some(k),
        beta,
        optimal_q: m.optimal_q,
        optimal_alpha: Some(1.0 + m.optimal_alpha_excess),
        log_rhs,
        lower_bound_lambda: LogValue::from_log(-log_rhs),
        factors,
    })
}

/// `λ_p >= M_p(K)/|Ω|^{p/2} = M*_p(K)/R_*^p` for a K-quasidisc of the given area.
pub fn quasidisc_lower_bound(p: f64, k: f64, area: f64) -> Result<BoundReport> {
    quasidisc_lower_bound_with(p, k, area, Reading::Theorem)
}

pub fn quasidisc_lower_bound_with(p: f64, k: f64, area: f64, reading: Reading) -> Result<BoundReport> {
    quasidisc_report(TheoremTag::Quasidisc, p, k, None, area, reading)
}

/// `K = cot²((1-β)π/4)` for β-star-shaped and β-spiral-shaped domains.
pub fn star_spiral_k(beta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Error::domain(format!("beta must lie in [0, 1), got {beta}")));
    }
    let t = ((1.0 - beta) * PI / 4.0).tan();
    Ok(1.0 / (t * t))
}

pub fn star_spiral_lower_bound(p: f64, beta: f64, area: f64) -> Result<BoundReport> {
    star_spiral_lower_bound_with(p, beta, area, Reading::Theorem)
}

pub fn star_spiral_lower_bound_with(p: f64, beta: f64, area: f64, reading: Reading) -> Result<BoundReport> {
    let k = star_spiral_k(beta)?;
    quasidisc_report(TheoremTag::StarSpiral, p, k, Some(beta), area, reading)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::AnalyticMap;
    use crate::quadrature::{jacobian_alpha_norm, Exponent, QuadratureGrid};
    use approx::assert_relative_eq;

    // 40-digit reference values.
    const EXP_TERM_K1: f64 = 632.845_631_556_439_964_583_4;
    const LN_NU_1_01: f64 = 25.717_439_394_801_990_21;
    const TILDE_EXCESS: [(f64, f64); 3] =
        [(1.0, 8.911_442_929_391_76e-14), (1.5, 1.760_285_023_093_12e-14), (2.0, 5.569_651_830_882_49e-15)];

    #[test]
    fn constants() {
        assert_relative_eq!(exp_term_log(1.0), EXP_TERM_K1, max_relative = 1e-14);
        assert_relative_eq!(exp_term_log(2.0), 4.0 * EXP_TERM_K1, max_relative = 1e-14);
        assert_relative_eq!(ln_nu_excess(0.01, 1.0, Reading::Theorem), LN_NU_1_01, max_relative = 1e-14);
        assert_relative_eq!(nu(1.01, 1.0).ln(), LN_NU_1_01, max_relative = 1e-12);
    }

    #[test]
    fn nu_vanishes_and_grows() {
        assert!(nu_excess(1e-20, 1.0) < 1e-6);
        assert!(nu_excess(1e-300, 1.0) == 0.0 || nu_excess(1e-300, 1.0) < 1e-250);
        let mut prev = 0.0;
        for i in 1..=50 {
            let a = 1.0 + i as f64 / 50.0;
            let v = nu(a, 1.0);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn alpha_tilde_residual_and_reference() {
        for (k, reference) in TILDE_EXCESS {
            let d = alpha_tilde_excess(k).unwrap();
            assert!((nu_excess(d, k) - 1.0).abs() < 1e-8, "K={k}");
            assert_relative_eq!(d, reference, max_relative = 1e-10);
            assert!(alpha_tilde(k).unwrap() > 1.0);
        }
    }

    #[test]
    fn alpha_tilde_decreases_in_k() {
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let k = 1.0 + 0.1 * i as f64;
            let d = alpha_tilde_excess(k).unwrap();
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn m_p_k_at_k1_p3() {
        let m = m_p_k_detail(3.0, 1.0, Reading::Theorem).unwrap();
        assert!(m.ln_m.is_finite() && m.ln_m < -600.0, "{}", m.ln_m);
        let exp_term = m.factors.iter().find(|f| f.name == "exp_term").unwrap().log_value;
        assert_relative_eq!(-exp_term, EXP_TERM_K1, max_relative = 1e-10);
        let without = m.factors.iter().find(|f| f.name == "ln_M_without_exp_term").unwrap().log_value;
        assert_relative_eq!(m.ln_m - without, -EXP_TERM_K1, max_relative = 1e-12);
        assert!(m.optimal_alpha_excess > 0.0 && m.optimal_alpha_excess < m.alpha_star_excess);
        // The α-optimum is interior, not at a clip.
        let u = m.optimal_alpha_excess / m.alpha_star_excess;
        assert!(u > 1e-3 && u < 1.0 - 1e-3, "{u}");
    }

    #[test]
    fn m_p_k_finite_on_grid() {
        for p in [2.5, 3.0, 4.0] {
            for k in [1.0, 1.2, 2.0] {
                let v = m_p_k_log(p, k).unwrap();
                assert!(v.is_finite(), "p={p} K={k}");
            }
        }
    }

    #[test]
    fn m_p_k_is_the_optimum() {
        let (p, k) = (3.0, 1.0);
        let m = m_p_k_detail(p, k, Reading::Theorem).unwrap();
        let inner_best = m.factors.iter().find(|f| f.name == "inner_infimum").unwrap().log_value;
        for u in [0.01, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            let (v, _) = inner(p, k, u * m.alpha_star_excess, Reading::Theorem).unwrap();
            assert!(v >= inner_best - 1e-9, "u={u}");
        }
    }

    #[test]
    fn agrees_with_disc_bound_and_jacobian_estimate() {
        // ln M is the disc bound fed by the Jacobian estimate, for the same α, q.
        let (p, k, area) = (3.0, 1.3, 2.7);
        let m = m_p_k_detail(p, k, Reading::Theorem).unwrap();
        let delta = m.optimal_alpha_excess;
        let gap = m.optimal_q_gap;
        let jac = jacobian_norm_bound_quasidisc_excess(delta, k, area).unwrap();
        let disc = p * ln_sp_open_branch_gap(gap) + p * gap / (2.0 * (2.0 - gap)) * LN_PI + 0.5 * (p - 2.0) * area.ln() + jac;
        let r = quasidisc_lower_bound(p, k, area).unwrap();
        assert_relative_eq!(r.log_rhs, disc, max_relative = 1e-12);
    }

    #[test]
    fn two_forms_and_area_scaling() {
        let p = 3.0;
        for area in [0.5, PI, 10.0] {
            let r = quasidisc_lower_bound(p, 1.0, area).unwrap();
            let ln_m = r.factor("ln_M").unwrap();
            let ln_m_star = r.factor("ln_M_star").unwrap();
            let ln_r_star = r.factor("ln_R_star").unwrap();
            let a = ln_m - 0.5 * p * area.ln();
            let b = ln_m_star - p * ln_r_star;
            assert!((a - b).abs() <= 1e-12 * a.abs(), "{a} {b}");
            assert_relative_eq!(-r.log_rhs, a, max_relative = 1e-15);
            let doubled = quasidisc_lower_bound(p, 1.0, 2.0 * area).unwrap();
            assert_relative_eq!(r.log_rhs - doubled.log_rhs, -0.5 * p * 2f64.ln(), epsilon = 1e-10);
            assert!(r.lower_bound_lambda.value < 1e-250);
            assert!(r.lower_bound_lambda.log_value.is_finite());
        }
    }

    #[test]
    fn jacobian_bound_properties() {
        let k = 1.0;
        let d = 0.5 * alpha_tilde_excess(k).unwrap();
        let a = jacobian_norm_bound_quasidisc_excess(d, k, 1.0).unwrap();
        let b = jacobian_norm_bound_quasidisc_excess(d, k, std::f64::consts::E).unwrap();
        assert_relative_eq!(b - a, 1.0, epsilon = 1e-12);
        assert!(a > EXP_TERM_K1);
        // The exponential term alone: compare against a K-independent remainder.
        let rest = a - exp_term_log(k);
        assert!(rest.abs() < 100.0);
        assert!(jacobian_norm_bound_quasidisc(1.005, k, 1.0).is_err());
        assert!(jacobian_norm_bound_quasidisc_excess(2.0 * d + 1e-12, k, 1.0).is_err());
        assert!(jacobian_norm_bound_quasidisc_excess(d, 0.5, 1.0).is_err());
    }

    #[test]
    fn epicycloid_norm_is_below_quasidisc_estimate() {
        // Ω_3 is a quasidisc; check at admissible exponents near 1.
        let map = AnalyticMap::epicycloid(3).unwrap();
        let area = 4.0 * PI / 3.0;
        for k in [1.0, 1.5, 3.0] {
            let star = alpha_star_excess(k, Reading::Theorem).unwrap();
            for u in [0.1, 0.5, 0.9] {
                let kappa = 1.0 + u * star;
                let n = jacobian_alpha_norm(&map, Exponent::Finite(kappa), &QuadratureGrid::default()).unwrap();
                let bound = jacobian_norm_bound_quasidisc_excess(u * star, k, area).unwrap();
                assert!(n.log_value < bound - 600.0);
            }
        }
    }

    #[test]
    fn star_spiral() {
        assert_relative_eq!(star_spiral_k(0.0).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(star_spiral_k(0.5).unwrap(), 3.0 + 2.0 * 2f64.sqrt(), max_relative = 1e-14);
        assert!(star_spiral_k(1.0).is_err() && star_spiral_k(-0.1).is_err());
        let mut prev = 0.0;
        for i in 0..100 {
            let k = star_spiral_k(i as f64 / 100.0).unwrap();
            assert!(k > prev);
            prev = k;
        }
        assert!(star_spiral_k(0.999_999).unwrap() > 1e10);
        let mut prev = f64::INFINITY;
        for beta in [0.0, 0.25, 0.5] {
            let r = star_spiral_lower_bound(3.0, beta, PI).unwrap();
            assert_eq!(r.theorem_tag, TheoremTag::StarSpiral);
            assert!(r.lower_bound_lambda.log_value <= prev);
            prev = r.lower_bound_lambda.log_value;
        }
    }

    #[test]
    fn corollary_reading_differs() {
        let a = m_p_k_detail(3.0, 1.0, Reading::Theorem).unwrap();
        let b = m_p_k_detail(3.0, 1.0, Reading::CorollaryLiteral).unwrap();
        assert!(b.ln_m.is_finite());
        assert!(b.alpha_star_excess > a.alpha_star_excess);
        assert!((a.ln_m - b.ln_m).abs() > 1e-6);
    }
}
