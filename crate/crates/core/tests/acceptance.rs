//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command;
use std::time::Instant;

use conformal_plap::conformal::AnalyticMap;
use conformal_plap::eigen::{circle_polyline, faber_krahn_gap, first_eigenvalue, rasterize, RasterDomain, SolverConfig};
use conformal_plap::quadrature::{image_area, integrate, jacobian_alpha_norm, Exponent, QuadratureGrid};
use conformal_plap::sobolev::{composition_norm_bound, composition_norm_conformal, sp_constant, SPQuery};
use conformal_plap::spectral::quasidisc::{exp_term_log, m_p_k_detail, Reading};
use conformal_plap::spectral::{
    alpha_tilde_excess, lower_bound_alpha_regular, lower_bound_infty_regular, nu_excess, quasidisc_lower_bound,
    SupSource,
};
use conformal_plap::BaseDomain;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

const J01_SQ: f64 = 5.783_185_962_946_784_521;
/// `π²(2+π²)²/(2 ln 3)` evaluated with 40 digits.
const EXP_TERM_K1: f64 = 632.845_631_556_439_964_583_4;
const ORACLE_SLACK: f64 = 0.05;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn catalog() -> Vec<AnalyticMap> {
    vec![
        AnalyticMap::identity(),
        AnalyticMap::epicycloid(2).unwrap(),
        AnalyticMap::epicycloid(3).unwrap(),
        AnalyticMap::epicycloid(4).unwrap(),
        AnalyticMap::sine(1.0).unwrap(),
    ]
}

fn quadrature_exactness() -> Outcome {
    let t = Instant::now();
    let grid = QuadratureGrid::default();
    let disc = integrate(|_| 1.0, BaseDomain::UnitDisc, &grid).map_err(|e| e.to_string())?.value;
    let rect = integrate(|_| 1.0, BaseDomain::rectangle(PI / 2.0, 1.0).unwrap(), &grid).map_err(|e| e.to_string())?.value;
    let (e1, e2) = ((disc / PI - 1.0).abs(), (rect / (2.0 * PI) - 1.0).abs());
    let secs = t.elapsed().as_secs_f64();
    check(e1 < 1e-12 && e2 < 1e-12 && secs < 1.0, format!("disc rel {e1:.1e}, rectangle rel {e2:.1e}, {secs:.3}s"))
}

fn epicycloid_quantities() -> Outcome {
    let t = Instant::now();
    let grid = QuadratureGrid::default();
    let mut worst_area: f64 = 0.0;
    let mut worst_sup: f64 = 0.0;
    for n in 2..=6u32 {
        let map = AnalyticMap::epicycloid(n).unwrap();
        let area = image_area(&map, &grid).map_err(|e| e.to_string())?.value;
        worst_area = worst_area.max((area - PI * (1.0 + 1.0 / n as f64)).abs());
        assert!(area <= PI * ((n as f64 + 1.0) / n as f64).powi(2));
        let sup = jacobian_alpha_norm(&map, Exponent::Infinite, &grid).map_err(|e| e.to_string())?.value;
        worst_sup = worst_sup.max(sup);
        for i in 0..512 {
            for j in 0..512 {
                let z = Complex64::from_polar(i as f64 / 511.0, 2.0 * PI * j as f64 / 512.0);
                worst_sup = worst_sup.max(map.jacobian(z).unwrap_or(0.0));
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    check(
        worst_area < 1e-8 && worst_sup <= 4.0 + 1e-9 && secs < 5.0,
        format!("max area error {worst_area:.1e}, max J {worst_sup:.12}, {secs:.2}s"),
    )
}

fn sine_quantities() -> Outcome {
    let grid = QuadratureGrid::default();
    let map = AnalyticMap::sine(1.0).unwrap();
    let area = image_area(&map, &grid).map_err(|e| e.to_string())?.value;
    let exact = PI * 2f64.sinh() / 2.0;
    let rel = (area / exact - 1.0).abs();
    let sup = jacobian_alpha_norm(&map, Exponent::Infinite, &grid).map_err(|e| e.to_string())?.value;
    let cap = 1f64.cosh().powi(2);
    check(rel < 1e-6 && sup <= cap * (1.0 + 1e-12), format!("area rel {rel:.1e}, grid sup J {sup:.10} vs cosh²1 {cap:.10}"))
}

fn sp_branches() -> Outcome {
    let t = Instant::now();
    let a = |q: f64| sp_constant(&SPQuery::new(2.0, q, None).unwrap()).unwrap();
    let at_one = a(1.0);
    let exact = 1.0 / (2.0 * PI.sqrt());
    let jump = (a(1.0 + 1e-6) - at_one).abs();
    let ratio = a(2.0 - 1e-6) / a(2.0 - 1e-2);
    let secs = t.elapsed().as_secs_f64();
    check(
        (at_one - exact).abs() <= f64::EPSILON * exact && jump < 1e-3 && ratio > 10.0 && secs < 1.0,
        format!("A(1) = {at_one:.17}, |A(1+1e-6) - A(1)| = {jump:.1e}, divergence ratio {ratio:.1}, {secs:.3}s"),
    )
}

fn composition_norms() -> Outcome {
    let grid = QuadratureGrid::default();
    let id = composition_norm_conformal(&AnalyticMap::identity(), 4.0, 2.0, &grid).map_err(|e| e.to_string())?;
    let id_err = (id - PI.powf(0.25)).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut worst: f64 = f64::NEG_INFINITY;
    for _ in 0..20 {
        let map = match rng.gen_range(0..3) {
            0 => AnalyticMap::identity(),
            1 => AnalyticMap::epicycloid(rng.gen_range(2..=6)).unwrap(),
            _ => AnalyticMap::sine(rng.gen_range(0.5..2.0)).unwrap(),
        };
        let p = rng.gen_range(2.1..6.0);
        let q = rng.gen_range(1.0..2.0);
        let value = composition_norm_conformal(&map, p, q, &grid).map_err(|e| e.to_string())?;
        let area = image_area(&map, &grid).map_err(|e| e.to_string())?.value;
        let bound = composition_norm_bound(p, q, area, map.base().measure()).map_err(|e| e.to_string())?;
        worst = worst.max(value / bound - 1.0);
    }
    check(
        id_err < 1e-10 && worst <= 1e-6,
        format!("identity error {id_err:.1e}; max (quadrature/bound - 1) over 20 triples {worst:.2e}"),
    )
}

fn oracle_calibration() -> Outcome {
    let t = Instant::now();
    let h = 1.0 / 64.0;
    let unit_square = vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        Complex64::new(1.0, 1.0),
        Complex64::new(0.0, 1.0),
    ];
    let p2 = SolverConfig::new(2.0).unwrap();
    let sq = first_eigenvalue(&rasterize(&unit_square, h).unwrap(), &p2).map_err(|e| e.to_string())?.lambda;
    let sq_secs = t.elapsed().as_secs_f64();
    let disc = |h: f64| rasterize(&circle_polyline(1.0, 4096), h).unwrap();
    let d2 = first_eigenvalue(&disc(h), &p2).map_err(|e| e.to_string())?.lambda;
    let p3 = SolverConfig::new(3.0).unwrap();
    let coarse = first_eigenvalue(&disc(h), &p3).map_err(|e| e.to_string())?.lambda;
    let fine = first_eigenvalue(&disc(h / 2.0), &p3).map_err(|e| e.to_string())?.lambda;
    let e_sq = (sq / (2.0 * PI * PI) - 1.0).abs();
    let e_d = (d2 / J01_SQ - 1.0).abs();
    let e_mesh = (coarse / fine - 1.0).abs();
    check(
        e_sq < 0.01 && sq_secs < 30.0 && e_d < 0.02 && e_mesh < 0.03,
        format!(
            "square {sq:.4} (rel {e_sq:.1e}, {sq_secs:.2}s); disc {d2:.4} (rel {e_d:.1e}); p=3 disc h=1/64 {coarse:.4} vs h=1/128 {fine:.4} (rel {e_mesh:.1e})"
        ),
    )
}

fn bound_validity() -> Outcome {
    let t = Instant::now();
    let grid = QuadratureGrid::default();
    let mut lines = Vec::new();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for map in catalog() {
        let domain = RasterDomain::from_map(&map, 1.0 / 64.0).map_err(|e| e.to_string())?;
        for p in [2.5, 3.0, 4.0] {
            let lambda = first_eigenvalue(&domain, &SolverConfig::new(p).unwrap()).map_err(|e| e.to_string())?.lambda;
            let reports = [
                lower_bound_infty_regular(p, &map, &grid, SupSource::ClosedForm),
                lower_bound_alpha_regular(p, 2.0, &map, &grid),
                lower_bound_alpha_regular(p, 8.0, &map, &grid),
            ];
            for r in reports {
                let r = r.map_err(|e| e.to_string())?;
                let ratio = r.lower_bound_lambda.value / lambda;
                worst = worst.max(ratio);
                if ratio > 1.0 + ORACLE_SLACK {
                    ok = false;
                    lines.push(format!("{map} p={p} {:?}: bound {} > oracle {lambda}", r.theorem_tag, r.lower_bound_lambda.value));
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    lines.insert(0, format!("max bound/oracle ratio {worst:.4} over 5 maps x 3 p x 3 bounds, {secs:.1}s"));
    check(ok && secs < 600.0, lines.join("; "))
}

fn faber_krahn() -> Outcome {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    for map in catalog() {
        let domain = RasterDomain::from_map(&map, 1.0 / 64.0).map_err(|e| e.to_string())?;
        for p in [2.0, 3.0] {
            let config = SolverConfig::new(p).unwrap();
            let lambda = first_eigenvalue(&domain, &config).map_err(|e| e.to_string())?.lambda;
            let gap = faber_krahn_gap(&domain, &config).map_err(|e| e.to_string())?;
            worst = worst.min(gap / lambda);
            ok &= gap >= -0.05 * lambda;
        }
    }
    check(ok, format!("min gap/λ over catalog at p = 2, 3: {worst:.4}"))
}

fn quasidisc_machinery() -> Outcome {
    let mut residual: f64 = 0.0;
    for k in [1.0, 1.5, 2.0] {
        let d = alpha_tilde_excess(k).map_err(|e| e.to_string())?;
        residual = residual.max((nu_excess(d, k) - 1.0).abs());
    }
    let m = m_p_k_detail(3.0, 1.0, Reading::Theorem).map_err(|e| e.to_string())?;
    let exp_term = m.factors.iter().find(|f| f.name == "exp_term").unwrap().log_value;
    let exp_rel = (-exp_term / EXP_TERM_K1 - 1.0).abs();
    let iso_rel = (exp_term_log(1.0) / EXP_TERM_K1 - 1.0).abs();
    let r = quasidisc_lower_bound(3.0, 1.0, 4.0 * PI / 3.0).map_err(|e| e.to_string())?;
    let two_form = (r.factor("ln_M").unwrap() - 1.5 * r.factor("ln_image_area").unwrap())
        - (r.factor("ln_M_star").unwrap() - 3.0 * r.factor("ln_R_star").unwrap());
    let two_form_rel = two_form.abs() / r.log_rhs.abs();
    check(
        residual < 1e-8 && m.ln_m.is_finite() && m.ln_m < -600.0 && exp_rel < 1e-10 && iso_rel < 1e-10 && two_form_rel <= 1e-12,
        format!(
            "ν(α̃) residual {residual:.1e}; ln M_3(1) = {:.6}; exp term rel {exp_rel:.1e}; two-form rel {two_form_rel:.1e}",
            m.ln_m
        ),
    )
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_plap");
    let runs = [
        vec!["bound", "--theorem", "infty", "--map", "epicycloid n=3", "--p", "3"],
        vec!["bound", "--theorem", "alpha", "--map", "sine d=1", "--p", "2.5", "--alpha", "2"],
        vec!["bound", "--theorem", "quasidisc", "--p", "3", "--K", "1.2"],
        vec!["bound", "--theorem", "star", "--p", "4", "--beta", "0.25", "--format", "csv"],
    ];
    for args in runs {
        let a = Command::new(exe).args(&args).output().map_err(|e| e.to_string())?;
        let b = Command::new(exe).args(&args).output().map_err(|e| e.to_string())?;
        if !a.status.success() || a.stdout != b.stdout || a.stdout.is_empty() {
            return Err(format!("`{}` differs between runs or failed", args.join(" ")));
        }
    }
    Ok("4 bound invocations byte-identical across repeated runs".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("quadrature exactness", quadrature_exactness),
        ("epicycloid quantities", epicycloid_quantities),
        ("sine quantities", sine_quantities),
        ("Sobolev-Poincare branches", sp_branches),
        ("composition norms", composition_norms),
        ("oracle calibration", oracle_calibration),
        ("bound validity against the oracle", bound_validity),
        ("Faber-Krahn gap", faber_krahn),
        ("quasidisc constants", quasidisc_machinery),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    let mut out = std::io::stdout().lock();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let (status, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        writeln!(out, "criterion {:>2} {status} {name}: {detail}", i + 1).unwrap();
        out.flush().unwrap();
    }
    writeln!(out, "acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len()).unwrap();
    if failures > 0 {
        std::process::exit(1);
    }
}
