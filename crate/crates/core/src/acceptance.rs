//! Cross-validation suite: every shipped claim with its tolerance pinned,
//! runnable through `dimers verify` and the `acceptance` integration test.

use crate::aztec;
use crate::frozen::FrozenBoundaryModel;
use crate::geom::GradientPolygon;
use crate::height::{self, ArcAssignment};
use crate::quad::{ls_slope, wirtinger_fd};
use crate::tension::{self, CalibrationTarget, SurfaceTension, TabulatedTension};
use crate::variational::{
    self, aztec_diamond_domain, example_71, extract_liquid_region, DiscreteEnergyProblem,
    MinimizeOptions,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub pass: bool,
    pub details: String,
    pub seconds: f64,
}

fn run(id: usize, name: &str, f: impl FnOnce() -> (bool, String)) -> CriterionResult {
    let t0 = Instant::now();
    let (pass, details) = f();
    CriterionResult {
        id,
        name: name.to_string(),
        pass,
        details,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// 1. Lozenge gradient closed form and finite-difference agreement.
pub fn criterion_1() -> CriterionResult {
    run(1, "lozenge gradient closed form", || {
        let g = match tension::lozenge_grad_sigma(0.5, 0.25) {
            Ok(g) => g,
            Err(e) => return (false, e.to_string()),
        };
        let target = c(2.0f64.ln() / (2.0 * PI), 0.0);
        let point_err = (g - target).norm();
        if point_err > 1e-12 {
            return (false, format!("closed-form point error {point_err:.3e}"));
        }
        let mut worst = 0.0f64;
        let h = 1e-6;
        let n = 50;
        for i in 0..n {
            for j in 0..n {
                let s = 0.05 + 0.9 * (i as f64 + 0.5) / n as f64;
                let t = 0.05 + 0.9 * (j as f64 + 0.5) / n as f64;
                if s + t > 0.95 {
                    continue;
                }
                let g = tension::lozenge_grad_sigma(s, t).unwrap();
                let ds = (tension::lozenge_sigma(s + h, t).unwrap()
                    - tension::lozenge_sigma(s - h, t).unwrap())
                    / (2.0 * h);
                let dt = (tension::lozenge_sigma(s, t + h).unwrap()
                    - tension::lozenge_sigma(s, t - h).unwrap())
                    / (2.0 * h);
                let rel = (g - c(ds, dt)).norm() / (1.0 + g.norm());
                worst = worst.max(rel);
            }
        }
        (
            worst < 1e-5,
            format!("point error {point_err:.3e}, max FD relative error {worst:.3e}"),
        )
    })
}

/// 2. Hessian determinant of σ_Lo normalized to 1.
pub fn criterion_2() -> CriterionResult {
    run(2, "Hessian determinant normalization", || {
        let h = 1e-4;
        let mut rng = ChaCha8Rng::seed_from_u64(2026);
        let mut checked = 0;
        let mut worst: f64 = 1.0;
        while checked < 100 {
            let s = 0.1 + 0.8 * rng.gen::<f64>();
            let t = 0.1 + 0.8 * rng.gen::<f64>();
            // at least 0.1 from every edge of N_Lo
            if s < 0.1 || t < 0.1 || (1.0 - s - t) / 2.0f64.sqrt() < 0.1 {
                continue;
            }
            checked += 1;
            let gpp = tension::lozenge_grad_sigma(s + h, t).unwrap();
            let gpm = tension::lozenge_grad_sigma(s - h, t).unwrap();
            let gtp = tension::lozenge_grad_sigma(s, t + h).unwrap();
            let gtm = tension::lozenge_grad_sigma(s, t - h).unwrap();
            let sxx = (gpp.re - gpm.re) / (2.0 * h);
            let sxy = (gtp.re - gtm.re) / (2.0 * h);
            let syx = (gpp.im - gpm.im) / (2.0 * h);
            let syy = (gtp.im - gtm.im) / (2.0 * h);
            let det = sxx * syy - sxy * syx;
            if (det - 1.0).abs() > (worst - 1.0).abs() {
                worst = det;
            }
        }
        (
            (0.98..=1.02).contains(&worst),
            format!("worst det D²σ = {worst:.6}"),
        )
    })
}

/// 3. Aztec kernel identity and closed-form g.
pub fn criterion_3() -> CriterionResult {
    run(3, "Aztec kernel identity", || {
        let m = match FrozenBoundaryModel::canonical(2) {
            Ok(m) => m,
            Err(e) => return (false, e.to_string()),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut worst_phi = 0.0f64;
        let mut worst_g = 0.0f64;
        let mut pairs = 0;
        while pairs < 1000 {
            let z = Complex64::from_polar(1.8 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let w = Complex64::from_polar(1.8 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            if (z + w).norm() < 1e-2 || (z - w).norm() < 1e-6 || (z * z - w * w).norm() < 1e-12 {
                continue;
            }
            pairs += 1;
            let phi = m.phi_kernel(z, w).unwrap();
            worst_phi = worst_phi.max((phi - 2.0 * z * w / (z + w)).norm());
        }
        for _ in 0..1000 {
            let z = Complex64::from_polar(0.999 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let g = m.g(z).unwrap();
            worst_g = worst_g.max((g - 2.0 * z / (1.0 + z.norm_sqr())).norm());
        }
        (
            worst_phi < 1e-12 && worst_g < 1e-12,
            format!("max |Φ − 2zw/(z+w)| = {worst_phi:.3e}, max |g − 2z/(1+|z|²)| = {worst_g:.3e}"),
        )
    })
}

/// 4. Cusp census for canonical models d = 2..8.
pub fn criterion_4() -> CriterionResult {
    run(4, "cusp census", || {
        let mut details = String::new();
        for d in 2..=8usize {
            let m = match FrozenBoundaryModel::canonical(d) {
                Ok(m) => m,
                Err(e) => return (false, format!("d={d}: {e}")),
            };
            if m.cusps().len() != d - 2 {
                return (
                    false,
                    format!("d={d}: found {} cusps, expected {}", m.cusps().len(), d - 2),
                );
            }
            if d == 3 {
                let err = (m.cusps()[0].point - c(-0.5, 0.0)).norm();
                details = format!("d=3 cusp point error {err:.3e}");
                if err > 1e-10 {
                    return (false, details);
                }
            }
        }
        (true, format!("d−2 simple cusps for d = 2..8; {details}"))
    })
}

/// 5. Tangent identity f(ζ) = −τ(ζ)² on boundary samples.
pub fn criterion_5() -> CriterionResult {
    run(5, "tangent identity", || {
        let mut worst = 0.0f64;
        for d in [3usize, 5] {
            let m = match FrozenBoundaryModel::canonical(d) {
                Ok(m) => m,
                Err(e) => return (false, e.to_string()),
            };
            match m.tangent_identity_check(2048, 1e-3) {
                Ok(r) => worst = worst.max(r),
                Err(e) => return (false, e.to_string()),
            }
        }
        (worst < 1e-8, format!("max residual {worst:.3e}"))
    })
}

/// 6. Characterization conditions: pass on canonical, fail on broken γ.
pub fn criterion_6() -> CriterionResult {
    run(6, "self-reflectivity & characterization", || {
        let mut worst = 0.0f64;
        for d in 2..=8usize {
            let m = match FrozenBoundaryModel::canonical(d) {
                Ok(m) => m,
                Err(e) => return (false, e.to_string()),
            };
            let report = m.check_characterization();
            worst = worst.max(report.self_reflect_residual);
            if !report.all_pass() {
                return (
                    false,
                    format!(
                        "d={d}: univalence {}, residual {:.3e}, poles {}",
                        report.univalence_pass,
                        report.self_reflect_residual,
                        report.pole_free_pass
                    ),
                );
            }
        }
        // deliberately broken γ = z³ with B = z²
        let broken = FrozenBoundaryModel::from_parts(
            crate::geom::BlaschkeProduct::monomial(2),
            crate::frozen::RationalFn::from_poly(crate::frozen::Poly::new(vec![
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
            ])),
        );
        let report = broken.check_characterization();
        if report.self_reflect_pass {
            return (false, "broken γ = z³ passed condition ii".into());
        }
        (
            true,
            format!(
                "canonical residuals ≤ {worst:.3e}; broken case residual {:.3e} fails ii",
                report.self_reflect_residual
            ),
        )
    })
}

/// 7. Density cross-check: analytic P, harmonic measure, empirical oracle.
pub fn criterion_7() -> CriterionResult {
    run(7, "three-way density cross-check", || {
        let m = match FrozenBoundaryModel::canonical(2) {
            Ok(m) => m,
            Err(e) => return (false, e.to_string()),
        };
        let assignment = ArcAssignment::aztec();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut worst = 0.0f64;
        for _ in 0..500 {
            let z = Complex64::from_polar(0.95 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let p = height::aztec_density(z.re, z.im);
            let w = match height::tile_density(&m, &assignment.arcs, 1, z, None) {
                Ok(w) => w,
                Err(e) => return (false, e.to_string()),
            };
            worst = worst.max((p - w).abs());
        }
        if worst > 1e-8 {
            return (
                false,
                format!("analytic vs harmonic-measure max error {worst:.3e}"),
            );
        }
        // empirical: n = 64, 200 samples, rescaled to the unit-disc picture
        let field = aztec::empirical_density(64, 200, 20260810);
        let ni = 64i32;
        let mut mae = 0.0;
        let mut count = 0usize;
        for y in -ni..ni {
            for x in -ni..ni {
                if !aztec::in_diamond(ni, x, y) {
                    continue;
                }
                let f = field.north_freq[field.cell_index(x, y)];
                let (cx, cy) = field.cell_center(x, y);
                // Example 5.2 normalization: liquid disc is the unit disc
                let p = height::aztec_density(cx * 2.0f64.sqrt(), cy * 2.0f64.sqrt());
                mae += (f - p).abs();
                count += 1;
            }
        }
        mae /= count as f64;
        (
            mae < 0.05,
            format!("analytic vs harmonic {worst:.3e}; empirical MAE {mae:.4} over {count} cells"),
        )
    })
}

/// 8. Boundary exponents: radial flattening 2, cusp compression 3,
/// Pokrovsky–Talapov 3/2.
pub fn criterion_8() -> CriterionResult {
    run(8, "boundary-exponent fits", || {
        // radial exponent at 20 non-critical boundary points
        for d in [3usize, 5] {
            let m = match FrozenBoundaryModel::canonical(d) {
                Ok(m) => m,
                Err(e) => return (false, e.to_string()),
            };
            let cusp_angles: Vec<f64> = m.cusps().iter().map(|cu| cu.angle).collect();
            let mut tested = 0;
            let mut k = 0usize;
            while tested < 10 {
                let theta = TAU * (k as f64 + 0.37) / 16.0;
                k += 1;
                if cusp_angles.iter().any(|a| {
                    let dd = (theta - a).rem_euclid(TAU);
                    dd.min(TAU - dd) < 0.3
                }) {
                    continue;
                }
                tested += 1;
                let z0 = Complex64::from_polar(1.0, theta);
                let g0 = m.g(z0).unwrap();
                let mut xs = Vec::new();
                let mut ys = Vec::new();
                let mut r: f64 = 0.9;
                while r <= 0.999 {
                    xs.push((1.0 - r).ln());
                    ys.push((m.g(r * z0).unwrap() - g0).norm().ln());
                    r += 0.011;
                }
                let slope = ls_slope(&xs, &ys);
                if (slope - 2.0).abs() > 0.1 {
                    return (false, format!("radial slope {slope:.3} at d={d}, θ={theta:.3}"));
                }
            }
            // cusp compression at every cusp
            for cusp in m.cusps() {
                let z0 = cusp.preimage;
                let g0 = m.g(z0).unwrap();
                for sign in [1.0, -1.0] {
                    let dir = Complex64::from_polar(1.0, sign * PI / 6.0);
                    let mut xs = Vec::new();
                    let mut ys = Vec::new();
                    let mut t: f64 = 1e-3;
                    while t <= 1e-1 {
                        xs.push(t.ln());
                        ys.push((m.g(z0 * (1.0 - t * dir)).unwrap() - g0).norm().ln());
                        t *= 1.5;
                    }
                    let slope = ls_slope(&xs, &ys);
                    if (slope - 3.0).abs() > 0.15 {
                        return (
                            false,
                            format!("cusp ±π/6 slope {slope:.3} at d={d}, angle {:.3}", cusp.angle),
                        );
                    }
                }
            }
        }
        // Pokrovsky–Talapov exponent on the reconstructed lozenge height
        let m2 = FrozenBoundaryModel::canonical(2).unwrap();
        let a = ArcAssignment::lozenge_on_disc();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut dlt = 1e-4;
        while dlt <= 1e-2 {
            match height::normal_height_excess(&m2, &a, 2.2, dlt) {
                Ok(e) => {
                    xs.push(dlt.ln());
                    ys.push(e.abs().max(1e-300).ln());
                }
                Err(e) => return (false, e.to_string()),
            }
            dlt *= 1.8;
        }
        let pt_slope = ls_slope(&xs, &ys);
        (
            (pt_slope - 1.5).abs() < 0.15,
            format!("radial 2.0 and cusp 3.0 fits pass; Pokrovsky–Talapov slope {pt_slope:.3}"),
        )
    })
}

fn square_harmonic_tabulated(shrink: f64) -> crate::error::Result<TabulatedTension> {
    let square = GradientPolygon::domino_square();
    let cal = tension::calibrate_arcs(&square, CalibrationTarget::Symmetric)?;
    let anchor = cal.tension.anchor_from_boundary(&[0.0; 4])?;
    let st = cal.tension.with_sigma_ref((square.centroid(), anchor));
    TabulatedTension::build(&st, shrink, 257)
}

/// 9. Variational arctic circle on the Aztec diamond.
pub fn criterion_9() -> CriterionResult {
    run(9, "variational arctic circle", || {
        let table = match square_harmonic_tabulated(1e-3) {
            Ok(t) => t,
            Err(e) => return (false, e.to_string()),
        };
        let tension: Arc<dyn SurfaceTension> = Arc::new(table);
        let domain = match aztec_diamond_domain() {
            Ok(d) => d,
            Err(e) => return (false, e.to_string()),
        };
        let solve = |spacing: f64, max_iters: usize| -> crate::error::Result<(f64, f64, bool)> {
            let problem = DiscreteEnergyProblem {
                domain: domain.clone(),
                tension: tension.clone(),
                spacing,
                shrink: 1e-3,
            };
            let out = variational::minimize(
                &problem,
                &MinimizeOptions {
                    max_iters,
                    tol: 1e-12,
                    seed_field: None,
                },
            )?;
            let monotone = out
                .energy_trace
                .windows(2)
                .all(|w| w[1] <= w[0] + 1e-13);
            let region = extract_liquid_region(
                &out.field,
                &GradientPolygon::domino_square(),
                0.05,
            );
            // Hausdorff distance of the rescaled liquid boundary to the unit circle
            let scale = 2.0f64.sqrt();
            let mut d_cells_to_circle = 0.0f64;
            for p in &region.boundary_cells {
                d_cells_to_circle = d_cells_to_circle.max((p.norm() * scale - 1.0).abs());
            }
            let mut d_circle_to_cells = 0.0f64;
            for k in 0..2048 {
                let q = Complex64::from_polar(1.0 / scale, TAU * k as f64 / 2048.0);
                let mut best = f64::INFINITY;
                for p in &region.boundary_cells {
                    best = best.min((p - q).norm());
                }
                d_circle_to_cells = d_circle_to_cells.max(best * scale);
            }
            Ok((
                d_cells_to_circle.max(d_circle_to_cells),
                region.liquid_area,
                monotone,
            ))
        };
        let (hausdorff, area_coarse, monotone) = match solve(1.0 / 64.0, 4000) {
            Ok(v) => v,
            Err(e) => return (false, e.to_string()),
        };
        if !monotone {
            return (false, "energy trace increased".into());
        }
        if hausdorff >= 0.08 {
            return (false, format!("Hausdorff distance {hausdorff:.4}"));
        }
        let (_, area_fine, monotone_fine) = match solve(1.0 / 128.0, 4000) {
            Ok(v) => v,
            Err(e) => return (false, e.to_string()),
        };
        if !monotone_fine {
            return (false, "fine-mesh energy trace increased".into());
        }
        let rel = (area_coarse - area_fine).abs() / area_fine;
        (
            rel < 0.05,
            format!(
                "Hausdorff {hausdorff:.4}, liquid areas {area_coarse:.4} vs {area_fine:.4} (Δ {:.2}%)",
                100.0 * rel
            ),
        )
    })
}

/// 10. Example 7.1: trivial admissible class on the cut domain.
pub fn criterion_10() -> CriterionResult {
    run(10, "obstacle degeneracy", || {
        let dom = match example_71::cut_domain() {
            Ok(d) => d,
            Err(e) => return (false, e.to_string()),
        };
        let problem = DiscreteEnergyProblem {
            domain: dom,
            tension: Arc::new(tension::LozengeSurfaceTension::new()),
            spacing: 1.0 / 32.0,
            shrink: 1e-3,
        };
        let asm = match variational::assemble(&problem) {
            Ok(a) => a,
            Err(e) => return (false, e.to_string()),
        };
        let mut gap = 0.0f64;
        for id in 0..asm.inside.len() {
            if asm.inside[id] {
                gap = gap.max(asm.upper[id] - asm.lower[id]);
            }
        }
        if gap >= 1e-9 {
            return (false, format!("max(M − m) = {gap:.3e}"));
        }
        let out = match variational::minimize(
            &problem,
            &MinimizeOptions {
                max_iters: 50,
                ..Default::default()
            },
        ) {
            Ok(o) => o,
            Err(e) => return (false, e.to_string()),
        };
        let mut dev = 0.0f64;
        for id in 0..asm.inside.len() {
            if asm.inside[id] {
                dev = dev.max((out.field.h[id] - asm.upper[id]).abs());
            }
        }
        (
            dev < 1e-9,
            format!("max(M − m) = {gap:.3e}, max|h − M| = {dev:.3e}"),
        )
    })
}

/// 11. PDE residuals via finite-difference Wirtinger derivatives.
pub fn criterion_11() -> CriterionResult {
    run(11, "PDE residuals", || {
        let m = match FrozenBoundaryModel::canonical(2) {
            Ok(m) => m,
            Err(e) => return (false, e.to_string()),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst_f = 0.0f64;
        let mut worst_g = 0.0f64;
        for _ in 0..200 {
            let z = Complex64::from_polar(0.8 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            // Beltrami residual of f = B∘g⁻¹
            let f = |w: Complex64| height::eval_f(&m, w, None).unwrap();
            let (fz, fzb) = wirtinger_fd(&f, z, 1e-5);
            let fval = f(z);
            worst_f = worst_f.max((fzb - fval * fz).norm());
            // conjugate-Beltrami residual of g
            let gfun = |w: Complex64| m.g(w).unwrap();
            let (gz, gzb) = wirtinger_fd(&gfun, z, 1e-5);
            let b = m.blaschke().eval(z).unwrap();
            worst_g = worst_g.max((gzb + b * gz.conj()).norm() / (1.0 + gz.norm()));
        }
        (
            worst_f < 1e-4 && worst_g < 1e-5,
            format!("max Beltrami residual {worst_f:.3e}, max conjugate residual {worst_g:.3e}"),
        )
    })
}

/// Run the full suite in order.
pub fn run_all() -> Vec<CriterionResult> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
        criterion_11(),
    ]
}
