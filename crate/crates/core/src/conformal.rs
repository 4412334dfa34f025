//! Closed-form conformal maps from a base domain (unit disc or centred
//! rectangle) onto the domains whose eigenvalues we bound.
//!
//! Derivatives are evaluated analytically for every kind. The Jacobian of a
//! conformal map is `|φ'(z)|²`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Inward offset used when tracing the boundary of the base domain.
pub const BOUNDARY_OFFSET: f64 = 1e-9;

/// Power series refuse evaluation beyond this fraction of their radius.
const SERIES_RADIUS_FRACTION: f64 = 0.999;

/// Source domain of a conformal map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseDomain {
    UnitDisc,
    /// `(-half_width, half_width) x (-half_height, half_height)`.
    Rectangle { half_width: f64, half_height: f64 },
}

impl BaseDomain {
    pub fn rectangle(half_width: f64, half_height: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_height > 0.0 && half_width.is_finite() && half_height.is_finite()) {
            return Err(Error::domain(format!(
                "rectangle half sides must be positive and finite, got {half_width} x {half_height}"
            )));
        }
        Ok(BaseDomain::Rectangle { half_width, half_height })
    }

    /// Lebesgue measure: `π` for the disc, `4ab` for the rectangle.
    pub fn measure(&self) -> f64 {
        match *self {
            BaseDomain::UnitDisc => PI,
            BaseDomain::Rectangle { half_width, half_height } => 4.0 * half_width * half_height,
        }
    }

    /// Membership in the open domain.
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            BaseDomain::UnitDisc => z.norm_sqr() < 1.0,
            BaseDomain::Rectangle { half_width, half_height } => {
                z.re.abs() < half_width && z.im.abs() < half_height
            }
        }
    }

    /// `n` points on the boundary shrunk by `1 - offset`, counterclockwise.
    ///
    /// For rectangles every corner is included and the remaining samples are
    /// spread over the sides in proportion to their length.
    pub fn boundary_points(&self, n: usize, offset: f64) -> Vec<Complex64> {
        let shrink = 1.0 - offset;
        match *self {
            BaseDomain::UnitDisc => (0..n)
                .map(|k| Complex64::from_polar(shrink, 2.0 * PI * k as f64 / n as f64))
                .collect(),
            BaseDomain::Rectangle { half_width, half_height } => {
                let (a, b) = (half_width * shrink, half_height * shrink);
                let corners = [
                    Complex64::new(a, -b),
                    Complex64::new(a, b),
                    Complex64::new(-a, b),
                    Complex64::new(-a, -b),
                ];
                let lengths = [2.0 * b, 2.0 * a, 2.0 * b, 2.0 * a];
                let perimeter: f64 = lengths.iter().sum();
                let mut counts = [0usize; 4];
                let mut assigned = 0;
                for side in 0..3 {
                    counts[side] = ((n as f64 * lengths[side] / perimeter).round() as usize).max(1);
                    assigned += counts[side];
                }
                counts[3] = n.saturating_sub(assigned).max(1);
                let mut points = Vec::with_capacity(n);
                for side in 0..4 {
                    let start = corners[side];
                    let end = corners[(side + 1) % 4];
                    for k in 0..counts[side] {
                        let t = k as f64 / counts[side] as f64;
                        points.push(start + (end - start) * t);
                    }
                }
                points
            }
        }
    }
}

/// The closed-form families of conformal maps.
#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Identity,
    /// `Σ c_k z^k` on the unit disc.
    Polynomial(Vec<Complex64>),
    /// `z + z^n / n` on the unit disc; the image is bounded by an epicycloid
    /// with `n - 1` cusps.
    Epicycloid { n: u32 },
    /// `sin z` on `(-π/2, π/2) x (-d, d)`; the image is an ellipse with slits
    /// from the foci to the ends of the major axis.
    Sine,
    /// Truncated power series with an explicit radius of validity.
    PowerSeries { coefficients: Vec<Complex64>, radius: f64 },
}

/// A conformal map together with its base domain.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticMap {
    kind: MapKind,
    base: BaseDomain,
}

impl AnalyticMap {
    /// Pairs a kind with a base domain. Sine needs the rectangle
    /// `(-π/2, π/2) x (-d, d)`, every other kind the unit disc. Polynomial
    /// kinds are rejected when `φ'` has a zero inside the disc.
    pub fn new(kind: MapKind, base: BaseDomain) -> Result<Self> {
        match (&kind, base) {
            (MapKind::Sine, BaseDomain::Rectangle { half_width, .. }) => {
                if (half_width - FRAC_PI_2).abs() > 1e-12 {
                    return Err(Error::domain(format!(
                        "sine map needs half_width = π/2, got {half_width}"
                    )));
                }
            }
            (MapKind::Sine, BaseDomain::UnitDisc) => {
                return Err(Error::domain("sine map is defined on a rectangle, not the unit disc"))
            }
            (_, BaseDomain::Rectangle { .. }) => {
                return Err(Error::domain("only the sine map is defined on a rectangle"))
            }
            (MapKind::Epicycloid { n }, BaseDomain::UnitDisc) if *n < 2 => {
                return Err(Error::domain(format!("epicycloid needs n >= 2, got {n}")))
            }
            (MapKind::Polynomial(c), BaseDomain::UnitDisc) if c.len() < 2 => {
                return Err(Error::domain("polynomial map needs at least a linear term"))
            }
            (MapKind::PowerSeries { coefficients, radius }, BaseDomain::UnitDisc) => {
                if coefficients.len() < 2 {
                    return Err(Error::domain("power series needs at least a linear term"));
                }
                if !(*radius > 1.0 / SERIES_RADIUS_FRACTION) {
                    return Err(Error::domain(format!(
                        "power series radius {radius} does not cover the unit disc"
                    )));
                }
            }
            _ => {}
        }
        let map = AnalyticMap { kind, base };
        if matches!(map.kind, MapKind::Polynomial(_) | MapKind::PowerSeries { .. }) {
            map.check_conformal()?;
        }
        Ok(map)
    }

    pub fn identity() -> Self {
        AnalyticMap { kind: MapKind::Identity, base: BaseDomain::UnitDisc }
    }

    pub fn epicycloid(n: u32) -> Result<Self> {
        Self::new(MapKind::Epicycloid { n }, BaseDomain::UnitDisc)
    }

    /// `sin z` on `(-π/2, π/2) x (-d, d)`.
    pub fn sine(d: f64) -> Result<Self> {
        Self::new(MapKind::Sine, BaseDomain::rectangle(FRAC_PI_2, d)?)
    }

    pub fn polynomial(coefficients: Vec<Complex64>) -> Result<Self> {
        Self::new(MapKind::Polynomial(coefficients), BaseDomain::UnitDisc)
    }

    pub fn power_series(coefficients: Vec<Complex64>, radius: f64) -> Result<Self> {
        Self::new(MapKind::PowerSeries { coefficients, radius }, BaseDomain::UnitDisc)
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn base(&self) -> BaseDomain {
        self.base
    }

    fn check_point(&self, z: Complex64) -> Result<()> {
        if !self.base.contains(z) {
            return Err(Error::domain(format!("point {z} is outside the open base domain")));
        }
        if let MapKind::PowerSeries { radius, .. } = self.kind {
            if z.norm() > SERIES_RADIUS_FRACTION * radius {
                return Err(Error::domain(format!(
                    "point {z} is beyond {SERIES_RADIUS_FRACTION} of the series radius {radius}"
                )));
            }
        }
        Ok(())
    }

    /// `φ(z)`.
    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.check_point(z)?;
        Ok(self.eval_unchecked(z))
    }

    /// `φ'(z)`, in closed form.
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        self.check_point(z)?;
        Ok(self.derivative_unchecked(z))
    }

    /// `J(z) = |φ'(z)|²`; zero means the map is not conformal at `z`.
    pub fn jacobian(&self, z: Complex64) -> Result<f64> {
        let j = self.derivative(z)?.norm_sqr();
        if !(j > 0.0) {
            return Err(Error::domain(format!("map is not conformal at {z}: φ'(z) = 0")));
        }
        Ok(j)
    }

    pub(crate) fn jacobian_unchecked(&self, z: Complex64) -> f64 {
        self.derivative_unchecked(z).norm_sqr()
    }

    pub(crate) fn eval_unchecked(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            MapKind::Identity => z,
            MapKind::Polynomial(c) | MapKind::PowerSeries { coefficients: c, .. } => horner(c, z),
            MapKind::Epicycloid { n } => z + z.powu(*n) / *n as f64,
            MapKind::Sine => z.sin(),
        }
    }

    pub(crate) fn derivative_unchecked(&self, z: Complex64) -> Complex64 {
        match &self.kind {
            MapKind::Identity => Complex64::new(1.0, 0.0),
            MapKind::Polynomial(c) | MapKind::PowerSeries { coefficients: c, .. } => {
                let derived: Vec<Complex64> =
                    c.iter().enumerate().skip(1).map(|(k, a)| a * k as f64).collect();
                horner(&derived, z)
            }
            MapKind::Epicycloid { n } => 1.0 + z.powu(n - 1),
            MapKind::Sine => z.cos(),
        }
    }

    /// Conformal radius of the image at `φ(w)`, `|φ'(w)| (1 - |w|²)`, for
    /// maps of the unit disc.
    pub fn conformal_radius(&self, w: Complex64) -> Result<f64> {
        if self.base != BaseDomain::UnitDisc {
            return Err(Error::domain("conformal radius is only available for maps of the unit disc"));
        }
        Ok(self.derivative(w)?.norm() * disc_conformal_radius(w)?)
    }

    /// Closed-form essential supremum of the Jacobian, where one is known.
    pub fn jacobian_sup_closed_form(&self) -> Option<f64> {
        match (&self.kind, self.base) {
            (MapKind::Identity, _) => Some(1.0),
            (MapKind::Epicycloid { .. }, _) => Some(4.0),
            (MapKind::Sine, BaseDomain::Rectangle { half_height, .. }) => Some(half_height.cosh().powi(2)),
            _ => None,
        }
    }

    /// Closed-form area of the image, where one is known.
    pub fn image_area_closed_form(&self) -> Option<f64> {
        match (&self.kind, self.base) {
            (MapKind::Identity, _) => Some(PI),
            (MapKind::Epicycloid { n }, _) => Some(PI * (1.0 + 1.0 / *n as f64)),
            (MapKind::Sine, BaseDomain::Rectangle { half_height, .. }) => {
                Some(PI * (2.0 * half_height).sinh() / 2.0)
            }
            _ => None,
        }
    }

    /// Segments of the image boundary that have zero width (the sine map's
    /// slits along the real axis).
    pub fn slits(&self) -> Vec<(Complex64, Complex64)> {
        match (&self.kind, self.base) {
            (MapKind::Sine, BaseDomain::Rectangle { half_height, .. }) => {
                let tip = half_height.cosh();
                vec![
                    (Complex64::new(1.0, 0.0), Complex64::new(tip, 0.0)),
                    (Complex64::new(-tip, 0.0), Complex64::new(-1.0, 0.0)),
                ]
            }
            _ => Vec::new(),
        }
    }

    /// Image of the base boundary, traced once counterclockwise at inward
    /// offset [`BOUNDARY_OFFSET`].
    pub fn boundary_polyline(&self, n_samples: usize) -> Result<Vec<Complex64>> {
        if n_samples < 4 {
            return Err(Error::domain(format!("need at least 4 boundary samples, got {n_samples}")));
        }
        self.base
            .boundary_points(n_samples, BOUNDARY_OFFSET)
            .into_iter()
            .map(|z| self.eval(z))
            .collect()
    }

    /// Rejects maps whose derivative has a zero in the closed disc of radius
    /// 0.999, counted by the winding number of `φ'` around that circle.
    fn check_conformal(&self) -> Result<()> {
        const SAMPLES: usize = 4096;
        let circle = |k: usize| Complex64::from_polar(0.999, 2.0 * PI * k as f64 / SAMPLES as f64);
        let mut winding = 0.0;
        let mut prev = self.derivative_unchecked(circle(0));
        for k in 1..=SAMPLES {
            let next = self.derivative_unchecked(circle(k % SAMPLES));
            if next.norm_sqr() < 1e-24 {
                return Err(Error::domain(format!("map derivative vanishes near {}; not conformal", circle(k))));
            }
            winding += (next / prev).arg();
            prev = next;
        }
        let zeros = (winding / (2.0 * PI)).round();
        if zeros != 0.0 {
            return Err(Error::domain(format!("map derivative has {zeros} zero(s) in the disc; not conformal")));
        }
        Ok(())
    }
}

fn horner(coefficients: &[Complex64], z: Complex64) -> Complex64 {
    coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Conformal radius of the unit disc at `w`: `1 - |w|²`.
pub fn disc_conformal_radius(w: Complex64) -> Result<f64> {
    let r2 = w.norm_sqr();
    if r2 >= 1.0 {
        return Err(Error::domain(format!("|w| = {} is not inside the unit disc", r2.sqrt())));
    }
    Ok(1.0 - r2)
}

/// Signed shoelace area of a closed polyline (positive when counterclockwise).
pub fn polygon_area(points: &[Complex64]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|k| {
            let (a, b) = (points[k], points[(k + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
        / 2.0
}

// --- Text form --------------------------------------------------------------
//
// map       := ["map="] family {param}
// family    := "identity" | "epicycloid" | "sine" | "poly" | "series"
// param     := "n=" int | "d=" real | "coeffs=" complex {"," complex} | "radius=" real
// complex   := real | real ("+"|"-") [real] "i" | [("+"|"-")] [real] "i"
//
// Examples: `epicycloid n=3`, `sine d=1.0`, `poly coeffs=0,1,0,0.25`,
// `poly coeffs=0,1,0.1+0.2i`, `series coeffs=0,1,0.1 radius=2`.

impl FromStr for AnalyticMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut tokens = s.split_whitespace();
        let head = tokens.next().ok_or_else(|| Error::Parse { token: String::new() })?;
        let family = head.strip_prefix("map=").unwrap_or(head);
        let mut n = None;
        let mut d = None;
        let mut coeffs = None;
        let mut radius = None;
        for token in tokens {
            let parse_err = || Error::Parse { token: token.to_string() };
            let (key, value) = token.split_once('=').ok_or_else(parse_err)?;
            match key {
                "n" => n = Some(value.parse::<u32>().map_err(|_| parse_err())?),
                "d" => d = Some(value.parse::<f64>().map_err(|_| parse_err())?),
                "radius" => radius = Some(value.parse::<f64>().map_err(|_| parse_err())?),
                "coeffs" => {
                    coeffs = Some(
                        value
                            .split(',')
                            .map(parse_complex)
                            .collect::<Option<Vec<_>>>()
                            .ok_or_else(parse_err)?,
                    )
                }
                _ => return Err(parse_err()),
            }
        }
        let missing = |what: &str| Error::Parse { token: format!("{family} (missing {what}=)") };
        match family {
            "identity" => Ok(AnalyticMap::identity()),
            "epicycloid" => AnalyticMap::epicycloid(n.ok_or_else(|| missing("n"))?),
            "sine" => AnalyticMap::sine(d.ok_or_else(|| missing("d"))?),
            "poly" => AnalyticMap::polynomial(coeffs.ok_or_else(|| missing("coeffs"))?),
            "series" => AnalyticMap::power_series(
                coeffs.ok_or_else(|| missing("coeffs"))?,
                radius.ok_or_else(|| missing("radius"))?,
            ),
            other => Err(Error::Parse { token: other.to_string() }),
        }
    }
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, `i`, `-i`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    // Split at the last sign that is not a leading sign or an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let re = if re_part.is_empty() { 0.0 } else { re_part.parse::<f64>().ok()? };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().ok()?,
    };
    Some(Complex64::new(re, im))
}

fn format_complex(c: &Complex64) -> String {
    if c.im == 0.0 {
        format!("{}", c.re)
    } else if c.im < 0.0 {
        format!("{}{}i", c.re, c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

impl fmt::Display for AnalyticMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |c: &[Complex64]| c.iter().map(format_complex).collect::<Vec<_>>().join(",");
        match (&self.kind, self.base) {
            (MapKind::Identity, _) => write!(f, "identity"),
            (MapKind::Epicycloid { n }, _) => write!(f, "epicycloid n={n}"),
            (MapKind::Sine, BaseDomain::Rectangle { half_height, .. }) => write!(f, "sine d={half_height}"),
            (MapKind::Sine, BaseDomain::UnitDisc) => unreachable!("sine is constructed on a rectangle"),
            (MapKind::Polynomial(c), _) => write!(f, "poly coeffs={}", join(c)),
            (MapKind::PowerSeries { coefficients, radius }, _) => {
                write!(f, "series coeffs={} radius={radius}", join(coefficients))
            }
        }
    }
}
