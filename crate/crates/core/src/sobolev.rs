//! Sobolev-Poincare constants `A_{r,q}` for planar domains and the norms of
//! composition operators induced by conformal maps.
//!
//! All products of powers and gamma values are assembled as logarithms and
//! exponentiated once at the end.

use std::f64::consts::LN_2;

use crate::conformal::AnalyticMap;
use crate::error::{Error, Result};
use crate::optimize::{scan_then_golden, Minimum};
use crate::quadrature::{self, QuadratureGrid};

/// Relative tolerance of the q-infimum searches.
pub const SEARCH_REL_TOL: f64 = 1e-8;
/// Points in the guarding scan that precedes each golden-section search.
pub const SCAN_POINTS: usize = 200;
/// Distance kept from each end of an open exponent interval.
pub const INTERVAL_CLIP: f64 = 1e-9;

const LN_PI: f64 = 1.144_729_885_849_400_2;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("log_gamma needs x > 0, got {x}")));
    }
    Ok(statrs::function::gamma::ln_gamma(x))
}

/// A request for `A_{r,q}(Ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SPQuery {
    /// Target Lebesgue exponent, `r >= 1`.
    pub r: f64,
    /// Gradient exponent in `[1, 2]`.
    pub q: f64,
    /// `|Ω|`, needed only for `q = 2`.
    pub area: Option<f64>,
}

impl SPQuery {
    pub fn new(r: f64, q: f64, area: Option<f64>) -> Result<Self> {
        let query = SPQuery { r, q, area };
        query.validate()?;
        Ok(query)
    }

    fn validate(&self) -> Result<()> {
        let SPQuery { r, q, area } = *self;
        if !(r >= 1.0) || !r.is_finite() {
            return Err(Error::domain(format!("r >= 1 violated: r = {r}")));
        }
        if !(1.0..=2.0).contains(&q) {
            return Err(Error::domain(format!("1 <= q <= 2 violated: q = {q}")));
        }
        if q < 2.0 {
            let cap = 2.0 * q / (2.0 - q);
            if r > cap {
                return Err(Error::domain(format!("r <= 2q/(2-q) violated: r = {r} > {cap} for q = {q}")));
            }
        } else {
            match area {
                Some(a) if a > 0.0 && a.is_finite() => {}
                Some(a) => return Err(Error::domain(format!("area must be positive, got {a}"))),
                None => return Err(Error::domain("q = 2 needs the domain area")),
            }
        }
        Ok(())
    }
}

/// `ln A_q` for `1 < q < 2` (the Aubin-Talenti branch), parametrized by the
/// gap `2 - q` so that exponents within 1e-14 of 2 keep full precision.
pub fn ln_sp_open_branch_gap(gap: f64) -> f64 {
    let q = 2.0 - gap;
    let ln_ratio = (1.0 - gap).ln() - gap.ln();
    let ln_gammas = statrs::function::gamma::ln_gamma(2.0 / q) + statrs::function::gamma::ln_gamma(3.0 - 2.0 / q);
    ((q - 1.0) / q) * ln_ratio - 0.5 * LN_PI - LN_2 / q - 0.5 * ln_gammas
}

/// `ln A_q` for `1 < q < 2`.
pub fn ln_sp_open_branch(q: f64) -> f64 {
    ln_sp_open_branch_gap(2.0 - q)
}

/// `ln A_{r,q}(Ω)` for a validated query, with the optimal `l` for `q = 2`.
pub fn ln_sp_constant_detail(query: &SPQuery) -> Result<(f64, Option<f64>)> {
    query.validate()?;
    let SPQuery { r, q, area } = *query;
    if q == 1.0 {
        return Ok((-(LN_2 + 0.5 * LN_PI), None));
    }
    if q < 2.0 {
        return Ok((ln_sp_open_branch(q), None));
    }
    let area = area.expect("validated");
    let lower = 2.0 * r / (r + 2.0);
    let m = q2_infimum(lower);
    Ok((m.value + area.ln() / r, Some(m.x)))
}

/// Infimum of the open-branch expression over `l` in `(lower, 2)`.
fn q2_infimum(lower: f64) -> Minimum {
    let (lo, hi) = (lower + INTERVAL_CLIP, 2.0 - INTERVAL_CLIP);
    scan_then_golden(ln_sp_open_branch, lo.max(1.0 + INTERVAL_CLIP), hi, SCAN_POINTS, SEARCH_REL_TOL)
}

/// `A_{r,q}(Ω)`.
pub fn sp_constant(query: &SPQuery) -> Result<f64> {
    Ok(ln_sp_constant_detail(query)?.0.exp())
}

/// Upper bound on the composition operator norm for a conformal map:
/// `|Ω|^{(p-2)/(2p)} |Ω̃|^{(2-q)/(2q)}`.
pub fn composition_norm_bound(p: f64, q: f64, area_target: f64, area_source: f64) -> Result<f64> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::domain(format!("p > 2 violated: p = {p}")));
    }
    if !(1.0..=2.0).contains(&q) {
        return Err(Error::domain(format!("1 <= q <= 2 violated: q = {q}")));
    }
    if !(area_target > 0.0 && area_source > 0.0) {
        return Err(Error::domain("areas must be positive"));
    }
    let ln = (p - 2.0) / (2.0 * p) * area_target.ln() + (2.0 - q) / (2.0 * q) * area_source.ln();
    Ok(ln.exp())
}

/// `K_{p,q} = (∬ J^{q(p-2)/(2(p-q))})^{(p-q)/(pq)}`, the composition norm of a
/// conformal map, where `|Dφ|² = J`.
pub fn composition_norm_conformal(map: &AnalyticMap, p: f64, q: f64, grid: &QuadratureGrid) -> Result<f64> {
    if !(p > 2.0) || !p.is_finite() {
        return Err(Error::domain(format!("p > 2 violated: p = {p}")));
    }
    if !(q >= 1.0 && q < p) {
        return Err(Error::domain(format!("1 <= q < p violated: q = {q}, p = {p}")));
    }
    let power = q * (p - 2.0) / (2.0 * (p - q));
    let integral = quadrature::integrate_jacobian_power(map, power, grid)?.value;
    Ok(integral.powf((p - q) / (p * q)))
}
