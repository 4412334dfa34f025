//! Numerical reference values for the first Dirichlet eigenvalue of the
//! p-Laplacian, used to check the analytic lower bounds.
//!
//! The domain is rasterized onto a square grid. The discrete quotient uses
//! forward differences with zero extension outside the mask:
//!
//! ```text
//! R(f) = Σ_cells h² |∇_h f|^p / Σ_nodes h² |f|^p
//! ```
//!
//! At `p = 2` this is the 5-point Laplacian form. The minimizer is found by
//! inverse power iteration for `p = 2`, followed for `p > 2` by gradient
//! descent preconditioned with the 5-point Laplacian. The result approximates
//! `λ_p` from above up to discretization error; it is not a certified bound.

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conformal::{polygon_area, AnalyticMap};
use crate::error::{Error, Result};

const NONE: usize = usize::MAX;
const POLYLINE_SAMPLES: usize = 8192;
const DISC_SAMPLES: usize = 4096;
const INVERSE_ITERATION_TOL: f64 = 1e-10;
const MAX_HALVINGS: usize = 50;

/// Nodes of a square grid lying inside a polygon.
#[derive(Debug, Clone)]
pub struct RasterDomain {
    pub h: f64,
    /// Position of grid node `(0, 0)`.
    pub origin: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `mask[j * nx + i]`.
    pub mask: Vec<bool>,
    pub source: Vec<Complex64>,
    /// Connected components dropped to keep the interior 4-connected.
    pub discarded_components: usize,
    index: Vec<usize>,
    nodes: Vec<usize>,
}

impl RasterDomain {
    /// Number of interior nodes (unknowns).
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `count · h²`.
    pub fn mask_area(&self) -> f64 {
        self.nodes.len() as f64 * self.h * self.h
    }

    pub fn node_position(&self, k: usize) -> (f64, f64) {
        let cell = self.nodes[k];
        let (i, j) = (cell % self.nx, cell / self.nx);
        (self.origin.0 + i as f64 * self.h, self.origin.1 + j as f64 * self.h)
    }

    /// Interior index of grid node `(i, j)`, if it is interior.
    pub fn interior_index(&self, i: usize, j: usize) -> Option<usize> {
        match self.index[j * self.nx + i] {
            NONE => None,
            k => Some(k),
        }
    }

    /// Rasterizes the image of the map's base boundary, removing nodes within
    /// `h/2` of any slit.
    pub fn from_map(map: &AnalyticMap, h: f64) -> Result<Self> {
        let polyline = map.boundary_polyline(POLYLINE_SAMPLES)?;
        rasterize_with_slits(&polyline, h, &map.slits())
    }

    fn neighbours(&self, k: usize) -> [usize; 4] {
        let cell = self.nodes[k];
        let nx = self.nx;
        [self.index[cell - 1], self.index[cell + 1], self.index[cell - nx], self.index[cell + nx]]
    }
}

/// Even-odd classification of grid nodes against a closed polyline. Nodes on
/// the polyline itself are exterior.
pub fn rasterize(polyline: &[Complex64], h: f64) -> Result<RasterDomain> {
    rasterize_with_slits(polyline, h, &[])
}

pub fn rasterize_with_slits(polyline: &[Complex64], h: f64, slits: &[(Complex64, Complex64)]) -> Result<RasterDomain> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::domain(format!("grid spacing must be positive, got {h}")));
    }
    if polyline.len() < 3 || polyline.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::domain("polyline needs at least 3 finite points"));
    }
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for z in polyline {
        xmin = xmin.min(z.re);
        xmax = xmax.max(z.re);
        ymin = ymin.min(z.im);
        ymax = ymax.max(z.im);
    }
    // One padding node on every side so interior nodes always have four
    // neighbours inside the array.
    let (i0, j0) = ((xmin / h).floor() as i64 - 1, (ymin / h).floor() as i64 - 1);
    let (i1, j1) = ((xmax / h).ceil() as i64 + 1, (ymax / h).ceil() as i64 + 1);
    let nx = (i1 - i0 + 1) as usize;
    let ny = (j1 - j0 + 1) as usize;
    if nx.saturating_mul(ny) > 50_000_000 {
        return Err(Error::domain(format!("grid of {nx} x {ny} nodes is too large; increase h")));
    }
    let tol = 1e-7 * h;
    let segments: Vec<(Complex64, Complex64)> =
        (0..polyline.len()).map(|k| (polyline[k], polyline[(k + 1) % polyline.len()])).collect();

    let mut mask = vec![false; nx * ny];
    let mut crossings = Vec::new();
    let mut near = Vec::new();
    for j in 1..ny - 1 {
        let y = (j0 + j as i64) as f64 * h;
        crossings.clear();
        near.clear();
        for (a, b) in &segments {
            if (a.im <= y && y < b.im) || (b.im <= y && y < a.im) {
                crossings.push(a.re + (y - a.im) * (b.re - a.re) / (b.im - a.im));
            }
            if a.im.min(b.im) - tol <= y && y <= a.im.max(b.im) + tol {
                near.push((*a, *b));
            }
        }
        crossings.sort_by(|a, b| a.total_cmp(b));
        for pair in crossings.chunks_exact(2) {
            let lo = ((pair[0] / h).floor() as i64 - i0).max(1) as usize;
            let hi = (((pair[1] / h).ceil() as i64 - i0) as usize).min(nx - 2);
            for i in lo..=hi {
                let x = (i0 + i as i64) as f64 * h;
                if x <= pair[0] || x >= pair[1] {
                    continue;
                }
                let z = Complex64::new(x, y);
                if near.iter().any(|(a, b)| segment_distance(z, *a, *b) <= tol) {
                    continue;
                }
                if slits.iter().any(|(a, b)| segment_distance(z, *a, *b) <= 0.5 * h) {
                    continue;
                }
                mask[j * nx + i] = true;
            }
        }
    }

    let discarded_components = keep_largest_component(&mut mask, nx, ny);
    let nodes: Vec<usize> = (0..nx * ny).filter(|&c| mask[c]).collect();
    if nodes.is_empty() {
        return Err(Error::Resolution(format!("no interior grid nodes at h = {h}; try a smaller h")));
    }
    let mut index = vec![NONE; nx * ny];
    for (k, &c) in nodes.iter().enumerate() {
        index[c] = k;
    }
    Ok(RasterDomain {
        h,
        origin: (i0 as f64 * h, j0 as f64 * h),
        nx,
        ny,
        mask,
        source: polyline.to_vec(),
        discarded_components,
        index,
        nodes,
    })
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    let t = if len2 == 0.0 { 0.0 } else { ((z - a).re * ab.re + (z - a).im * ab.im) / len2 };
    (z - (a + ab * t.clamp(0.0, 1.0))).norm()
}

/// Clears every 4-connected component but the largest; returns how many
/// were cleared.
fn keep_largest_component(mask: &mut [bool], nx: usize, ny: usize) -> usize {
    let mut label = vec![0usize; nx * ny];
    let mut sizes = vec![0usize];
    let mut queue = VecDeque::new();
    for start in 0..nx * ny {
        if !mask[start] || label[start] != 0 {
            continue;
        }
        let id = sizes.len();
        sizes.push(0);
        label[start] = id;
        queue.push_back(start);
        while let Some(c) = queue.pop_front() {
            sizes[id] += 1;
            let (i, j) = (c % nx, c / nx);
            let mut visit = |n: usize| {
                if mask[n] && label[n] == 0 {
                    label[n] = id;
                    queue.push_back(n);
                }
            };
            if i > 0 {
                visit(c - 1);
            }
            if i + 1 < nx {
                visit(c + 1);
            }
            if j > 0 {
                visit(c - nx);
            }
            if j + 1 < ny {
                visit(c + nx);
            }
        }
    }
    if sizes.len() <= 2 {
        return 0;
    }
    let keep = (1..sizes.len()).max_by_key(|&id| sizes[id]).unwrap();
    for c in 0..nx * ny {
        if mask[c] && label[c] != keep {
            mask[c] = false;
        }
    }
    sizes.len() - 2
}

/// Settings of [`first_eigenvalue`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: f64,
    pub max_iterations: usize,
    /// Stop once an accepted step changes the quotient by less than this,
    /// relatively.
    pub tolerance: f64,
}

impl SolverConfig {
    pub fn new(p: f64) -> Result<Self> {
        let config = SolverConfig { p, max_iterations: 20_000, tolerance: 1e-10 };
        config.validate()?;
        Ok(config)
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Result<Self> {
        self.tolerance = tolerance;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0) || !self.p.is_finite() {
            return Err(Error::domain(format!("solver needs p >= 2, got {}", self.p)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.max_iterations == 0 {
            return Err(Error::domain("max_iterations must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    pub lambda: f64,
    pub iterations: usize,
    /// `‖∇N - R ∇D‖ / ‖∇N‖` at the returned vector, for `R = N/D`.
    pub residual: f64,
    pub mask_area: f64,
    pub h: f64,
}

/// Forward-difference cells touching the mask: node, right and upper
/// neighbour as interior indices or `NONE`.
fn cells(domain: &RasterDomain) -> Vec<[usize; 3]> {
    let nx = domain.nx;
    let mut out = Vec::new();
    for j in 0..domain.ny - 1 {
        for i in 0..nx - 1 {
            let c = j * nx + i;
            let cell = [domain.index[c], domain.index[c + 1], domain.index[c + nx]];
            if cell.iter().any(|&k| k != NONE) {
                out.push(cell);
            }
        }
    }
    out
}

fn at(f: &[f64], k: usize) -> f64 {
    if k == NONE {
        0.0
    } else {
        f[k]
    }
}

struct Quotient {
    cells: Vec<[usize; 3]>,
    p: f64,
    scale: f64,
}

impl Quotient {
    fn new(domain: &RasterDomain, p: f64) -> Self {
        Quotient { cells: cells(domain), p, scale: domain.h.powf(-p) }
    }

    /// Unscaled `(Σ |Δf|^p, Σ |f|^p)`.
    fn sums(&self, f: &[f64]) -> (f64, f64) {
        let p = self.p;
        let num = self
            .cells
            .iter()
            .map(|&[c, r, u]| {
                let fc = at(f, c);
                let (dx, dy) = (at(f, r) - fc, at(f, u) - fc);
                (dx * dx + dy * dy).powf(0.5 * p)
            })
            .sum();
        let den = f.iter().map(|v| v.abs().powf(p)).sum();
        (num, den)
    }

    fn value(&self, f: &[f64]) -> f64 {
        let (n, d) = self.sums(f);
        self.scale * n / d
    }

    /// Unscaled sums and their gradients.
    fn gradients(&self, f: &[f64]) -> (f64, f64, Vec<f64>, Vec<f64>) {
        let p = self.p;
        let mut gn = vec![0.0; f.len()];
        let mut num = 0.0;
        for &[c, r, u] in &self.cells {
            let fc = at(f, c);
            let (dx, dy) = (at(f, r) - fc, at(f, u) - fc);
            let m2 = dx * dx + dy * dy;
            num += m2.powf(0.5 * p);
            let w = if m2 == 0.0 { 0.0 } else { p * m2.powf(0.5 * p - 1.0) };
            if c != NONE {
                gn[c] -= w * (dx + dy);
            }
            if r != NONE {
                gn[r] += w * dx;
            }
            if u != NONE {
                gn[u] += w * dy;
            }
        }
        let den = f.iter().map(|v| v.abs().powf(p)).sum();
        let gd = f.iter().map(|v| p * v.abs().powf(p - 2.0) * v).collect();
        (num, den, gn, gd)
    }

    fn residual(&self, f: &[f64]) -> f64 {
        let (n, d, gn, gd) = self.gradients(f);
        let rho = n / d;
        let r: f64 = gn.iter().zip(&gd).map(|(a, b)| (a - rho * b).powi(2)).sum();
        r.sqrt() / norm(&gn)
    }
}

/// Discrete Rayleigh quotient of nodal values `f` (one per interior node).
pub fn rayleigh_quotient(domain: &RasterDomain, f: &[f64], p: f64) -> Result<f64> {
    if f.len() != domain.node_count() {
        return Err(Error::domain(format!("expected {} nodal values, got {}", domain.node_count(), f.len())));
    }
    if !(p >= 2.0) {
        return Err(Error::domain(format!("quotient needs p >= 2, got {p}")));
    }
    if f.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("the zero function has no Rayleigh quotient".into()));
    }
    Ok(Quotient::new(domain, p).value(f))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Unscaled 5-point Laplacian with zero Dirichlet data.
fn laplacian(domain: &RasterDomain, u: &[f64], out: &mut [f64]) {
    for k in 0..u.len() {
        let s: f64 = domain.neighbours(k).iter().map(|&n| at(u, n)).sum();
        out[k] = 4.0 * u[k] - s;
    }
}

/// Conjugate gradients for the Laplacian, to relative residual `tol`.
fn solve_laplacian(domain: &RasterDomain, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut d = r.clone();
    let mut ad = vec![0.0; n];
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut rr = dot(&r, &r);
    for _ in 0..(10 * n).max(100) {
        if rr.sqrt() <= tol * b_norm {
            return Ok(x);
        }
        laplacian(domain, &d, &mut ad);
        let step = rr / dot(&d, &ad);
        for k in 0..n {
            x[k] += step * d[k];
            r[k] -= step * ad[k];
        }
        let next = dot(&r, &r);
        let beta = next / rr;
        rr = next;
        for k in 0..n {
            d[k] = r[k] + beta * d[k];
        }
    }
    Err(Error::NonConvergence("conjugate gradients for the grid Laplacian".into()))
}

/// First eigenpair of the 5-point Laplacian by inverse power iteration;
/// returns the eigenvalue (scaled by `1/h²`), the positive unit vector and the
/// number of iterations.
fn inverse_iteration(domain: &RasterDomain) -> Result<(f64, Vec<f64>, usize)> {
    let n = domain.node_count();
    let mut u = vec![1.0 / (n as f64).sqrt(); n];
    let mut mu = f64::INFINITY;
    for it in 1..=500 {
        let v = solve_laplacian(domain, &u, 1e-13)?;
        let next = dot(&u, &v) / dot(&v, &v);
        let len = norm(&v);
        u = v.into_iter().map(|x| x / len).collect();
        if (mu - next).abs() <= INVERSE_ITERATION_TOL * next {
            let sign = if u.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            u.iter_mut().for_each(|x| *x *= sign);
            return Ok((next / (domain.h * domain.h), u, it));
        }
        mu = next;
    }
    Err(Error::NonConvergence("inverse power iteration".into()))
}

/// Minimizes the p-quotient from `start`, moving along the gradient
/// preconditioned by the inverse grid Laplacian and halving the step until
/// the quotient decreases.
///
/// Returns the quotient, the minimizer and the number of accepted steps.
/// Fifty halvings in a row without decrease yield [`Error::Stagnation`],
/// unless the relative residual is already below `sqrt(tolerance)`, in which
/// case the iterate is returned as converged.
pub fn descend(domain: &RasterDomain, start: &[f64], config: &SolverConfig) -> Result<(f64, Vec<f64>, usize)> {
    config.validate()?;
    if start.len() != domain.node_count() {
        return Err(Error::domain(format!("expected {} nodal values, got {}", domain.node_count(), start.len())));
    }
    let q = Quotient::new(domain, config.p);
    let p = config.p;
    let normalize = |f: &mut Vec<f64>| {
        let s = f.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p);
        f.iter_mut().for_each(|v| *v /= s);
    };
    let mut f = start.to_vec();
    if f.iter().all(|&v| v == 0.0) {
        return Err(Error::Degenerate("descent cannot start from zero".into()));
    }
    normalize(&mut f);
    let mut rho = q.value(&f);
    let mut step = 0.1;
    for it in 1..=config.max_iterations {
        let (n, d, gn, gd) = q.gradients(&f);
        let ratio = n / d;
        let g: Vec<f64> = gn.iter().zip(&gd).map(|(a, b)| (a - ratio * b) / d).collect();
        let g_norm = norm(&g);
        if g_norm == 0.0 || g_norm <= 1e-14 * norm(&gn) / d {
            return Ok((rho, f, it - 1));
        }
        let mut dir = solve_laplacian(domain, &g, 1e-8)?;
        let scale = norm(&f) / norm(&dir);
        dir.iter_mut().for_each(|v| *v *= -scale);

        let mut halvings = 0;
        loop {
            let mut trial: Vec<f64> = f.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            normalize(&mut trial);
            let value = q.value(&trial);
            if value < rho {
                let change = (rho - value) / rho;
                f = trial;
                rho = value;
                step = (2.0 * step).min(1.0);
                if change < config.tolerance {
                    return Ok((rho, f, it));
                }
                break;
            }
            halvings += 1;
            step *= 0.5;
            if halvings >= MAX_HALVINGS {
                if q.residual(&f) <= config.tolerance.sqrt() {
                    return Ok((rho, f, it));
                }
                return Err(Error::Stagnation { best: rho });
            }
        }
    }
    Err(Error::NonConvergence(format!("descent reached {} iterations at quotient {rho}", config.max_iterations)))
}

/// [`first_eigenvalue`] together with the nodal minimizer.
pub fn first_eigenpair(domain: &RasterDomain, config: &SolverConfig) -> Result<(EigenEstimate, Vec<f64>)> {
    config.validate()?;
    let (lambda2, u, its) = inverse_iteration(domain)?;
    let (lambda, f, iterations) = if config.p == 2.0 {
        (lambda2, u, its)
    } else {
        let (lambda, f, steps) = descend(domain, &u, config)?;
        (lambda, f, its + steps)
    };
    let residual = Quotient::new(domain, config.p).residual(&f);
    Ok((EigenEstimate { lambda, iterations, residual, mask_area: domain.mask_area(), h: domain.h }, f))
}

/// Approximates the first Dirichlet eigenvalue of the p-Laplacian on the
/// rasterized domain.
pub fn first_eigenvalue(domain: &RasterDomain, config: &SolverConfig) -> Result<EigenEstimate> {
    Ok(first_eigenpair(domain, config)?.0)
}

/// Closed polyline of the circle of radius `r` about 0.
pub fn circle_polyline(r: f64, n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(r, 2.0 * PI * k as f64 / n as f64)).collect()
}

/// `λ(Ω) - λ(Ω*)` where `Ω*` is the disc with the area enclosed by the
/// domain's source polyline, both rasterized at the same `h`.
pub fn faber_krahn_gap(domain: &RasterDomain, config: &SolverConfig) -> Result<f64> {
    let area = polygon_area(&domain.source).abs();
    let disc = rasterize(&circle_polyline((area / PI).sqrt(), DISC_SAMPLES), domain.h)?;
    Ok(first_eigenvalue(domain, config)?.lambda - first_eigenvalue(&disc, config)?.lambda)
}
