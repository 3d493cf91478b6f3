//! Limit height functions on liquid domains: inversion of the teleomorphic
//! homeomorphism, the Beltrami solution f, the harmonic-measure gradient
//! field, path integration to the height itself, and the Aztec closed forms.

use crate::error::{Error, Result};
use crate::frozen::FrozenBoundaryModel;
use crate::geom::{dist_to_segment, point_in_simple_polygon, ArcPartition, GradientPolygon};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};


/// Invert the teleomorphic homeomorphism: find w in the disc with
/// g(w) = target, by damped Newton on the explicit Wirtinger derivatives;
/// a coarse polar grid supplies the seed when none is given.
pub fn invert_g(
    model: &FrozenBoundaryModel,
    target: Complex64,
    seed: Option<Complex64>,
) -> Result<Complex64> {
    let polyline = model.boundary_polyline(512)?;
    if !point_in_simple_polygon(&polyline, target) {
        return Err(Error::Domain(format!(
            "target {target} lies outside the liquid domain"
        )));
    }
    let mut w = match seed {
        Some(s) if s.norm() < 1.0 => s,
        _ => {
            let mut best = Complex64::new(0.0, 0.0);
            let mut best_d = f64::INFINITY;
            for ir in 0..16 {
                let r = 0.995 * (ir as f64 + 0.5) / 16.0;
                for ia in 0..32 {
                    let z = Complex64::from_polar(r, TAU * ia as f64 / 32.0);
                    if let Ok(g) = model.g(z) {
                        let d = (g - target).norm();
                        if d < best_d {
                            best_d = d;
                            best = z;
                        }
                    }
                }
            }
            best
        }
    };
    let mut res = (model.g(w)? - target).norm();
    for iter in 0..100 {
        if res < 1e-12 {
            return Ok(w);
        }
        let (gz, gzb) = model.g_wirtinger(w)?;
        let jac = gz.norm_sqr() - gzb.norm_sqr();
        if jac.abs() < 1e-300 {
            return Err(Error::NonConvergence {
                iters: iter,
                residual: res,
            });
        }
        let r = target - model.g(w)?;
        let mut step = (gz.conj() * r - gzb * r.conj()) / jac;
        // g flattens quadratically at the unit circle, so undamped Newton
        // overshoots near the boundary: halve until the residual decreases.
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand = w + step;
            if cand.norm() >= 1.0 - 1e-14 {
                cand = cand / cand.norm() * (0.5 * (1.0 + w.norm()));
            }
            let new_res = (model.g(cand)? - target).norm();
            if new_res < res {
                w = cand;
                res = new_res;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if res < 1e-10 {
        Ok(w)
    } else {
        Err(Error::NonConvergence {
            iters: 100,
            residual: res,
        })
    }
}

/// The proper Beltrami solution f = B ∘ g⁻¹ on the liquid domain.
pub fn eval_f(
    model: &FrozenBoundaryModel,
    z: Complex64,
    seed: Option<Complex64>,
) -> Result<Complex64> {
    let w = invert_g(model, z, seed)?;
    model.blaschke().eval(w)
}

/// Closed-form g⁻¹ for the Aztec model (B = z², γ = 2z):
/// f(z) = (z/|z|²)(1 − √(1−|z|²)), with the removable limit f(0) = 0.
pub fn aztec_f(z: Complex64) -> Complex64 {
    let r2 = z.norm_sqr();
    if r2 < 1e-30 {
        return Complex64::new(0.0, 0.0);
    }
    z / r2 * (1.0 - (1.0 - r2).sqrt())
}

/// Asymptotic probability of the northbound domino at a point of the
/// normalized Aztec diamond (liquid domain = unit disc); outside the disc
/// the frozen values 1 (above y = 1/√2) and 0.
pub fn aztec_density(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    if r2 < 1.0 {
        0.5 + ((2.0f64.sqrt() * y - 1.0) / (1.0 - r2).sqrt()).atan() / PI
    } else if y > 1.0 / 2.0f64.sqrt() {
        1.0
    } else {
        0.0
    }
}

/// Harmonic-measure density of arc `k` for the model: ω(g⁻¹(z); I_k).
pub fn tile_density(
    model: &FrozenBoundaryModel,
    arcs: &ArcPartition,
    k: usize,
    z: Complex64,
    seed: Option<Complex64>,
) -> Result<f64> {
    let w = invert_g(model, z, seed)?;
    arcs.measure(k, w)
}

/// Which disc coordinates an arc assignment lives in. Both variants use the
/// conjugated (sense-reversing) argument, which is what makes the resulting
/// gradient field curl-free.
#[derive(Debug, Clone, Copy)]
pub enum FrozenCoordinates {
    /// w = conj(g⁻¹(z)); valid when B equals the structure coefficient μ_σ
    /// (the Aztec square, B = μ_σ = z²).
    MuConj,
    /// w = conj(c·B(g⁻¹(z))) with |c| = 1; universal-level assignments.
    UniversalConj(Complex64),
}

/// Arcs of the model disc with attached gradient-polygon corners, driving
/// the harmonic-measure sums of the height gradient.
#[derive(Debug, Clone)]
pub struct ArcAssignment {
    pub polygon: GradientPolygon,
    pub arcs: ArcPartition,
    /// arc label -> polygon corner index (may be non-injective).
    pub corner_map: Vec<usize>,
    pub coords: FrozenCoordinates,
}

impl ArcAssignment {
    /// The Aztec square: N = hull{±1,±i}, quarter arcs with endpoints at
    /// π/4 + kπ/2, east/north/west/south corners in counterclockwise order.
    pub fn aztec() -> Self {
        let endpoints = (0..4)
            .map(|k| Complex64::from_polar(1.0, FRAC_PI_4 + k as f64 * FRAC_PI_2))
            .collect();
        ArcAssignment {
            polygon: GradientPolygon::domino_square(),
            arcs: ArcPartition::new(endpoints, vec![0, 1, 2, 3], 4).expect("static arcs"),
            corner_map: vec![0, 1, 2, 3],
            coords: FrozenCoordinates::MuConj,
        }
    }

    /// The lozenge triangle N = hull{0,1,i} on a degree-2 model. The arc
    /// endpoints (−1, −i, 1) are the exact solution of the structure
    /// conditions Σ A_kη_k = 0 and Q(0) = 0, with λ = −1; equal arcs do not
    /// satisfy them because N_Lo has no Euclidean three-fold symmetry.
    pub fn lozenge_on_disc() -> Self {
        let endpoints = vec![
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(1.0, 0.0),
        ];
        ArcAssignment {
            polygon: GradientPolygon::lozenge_triangle(),
            arcs: ArcPartition::new(endpoints, vec![0, 1, 2], 3).expect("static arcs"),
            corner_map: vec![0, 1, 2],
            coords: FrozenCoordinates::UniversalConj(Complex64::new(-1.0, 0.0)),
        }
    }

    /// Degenerate assignment sending every arc to a single corner; the
    /// reconstructed field is exactly affine with slope that corner.
    pub fn constant(polygon: GradientPolygon, corner: usize) -> Self {
        let endpoints = (0..4)
            .map(|k| Complex64::from_polar(1.0, FRAC_PI_4 + k as f64 * FRAC_PI_2))
            .collect();
        let n = polygon.len();
        ArcAssignment {
            polygon,
            arcs: ArcPartition::new(endpoints, vec![0, 1, 2, 3], 4).expect("static arcs"),
            corner_map: vec![corner.min(n - 1); 4],
            coords: FrozenCoordinates::MuConj,
        }
    }

    /// Disc coordinate w for a point already mapped to the model disc.
    fn transform(&self, model: &FrozenBoundaryModel, w_disc: Complex64) -> Result<Complex64> {
        match self.coords {
            FrozenCoordinates::MuConj => Ok(w_disc.conj()),
            FrozenCoordinates::UniversalConj(c) => Ok((c * model.blaschke().eval(w_disc)?).conj()),
        }
    }

    /// ∇h(z) = Σ p_{map(k)} ω(w; I_k).
    pub fn gradient(
        &self,
        model: &FrozenBoundaryModel,
        z: Complex64,
        seed: Option<Complex64>,
    ) -> Result<Complex64> {
        let w_disc = invert_g(model, z, seed)?;
        self.gradient_at_disc(model, w_disc)
    }

    /// Gradient with the g-inversion already done (warm-start plumbing).
    pub fn gradient_at_disc(
        &self,
        model: &FrozenBoundaryModel,
        w_disc: Complex64,
    ) -> Result<Complex64> {
        let w = self.transform(model, w_disc)?;
        let corners = self.polygon.corners();
        let mut v = Complex64::new(0.0, 0.0);
        for k in 0..self.arcs.len() {
            let label = self.arcs.labels()[k];
            v += corners[self.corner_map[label]] * self.arcs.measure(k, w)?;
        }
        Ok(v)
    }

    /// Corner attached to a boundary point R(e^{iθ}) of the model: the arc
    /// containing the transformed boundary coordinate.
    pub fn boundary_corner(&self, model: &FrozenBoundaryModel, theta: f64) -> Result<usize> {
        let zb = Complex64::from_polar(1.0, theta);
        let w = match self.coords {
            FrozenCoordinates::MuConj => zb.conj(),
            FrozenCoordinates::UniversalConj(c) => (c * model.blaschke().eval(zb)?).conj(),
        };
        let ang = w.arg();
        let m = self.arcs.len();
        for k in 0..m {
            let (a, b) = self.arcs.arc(k);
            let span = (b.arg() - a.arg()).rem_euclid(TAU);
            let off = (ang - a.arg()).rem_euclid(TAU);
            if off <= span {
                return Ok(self.corner_map[self.arcs.labels()[k]]);
            }
        }
        Ok(self.corner_map[self.arcs.labels()[m - 1]])
    }
}

/// Node classification of a reconstructed or minimized height field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mask {
    Outside,
    Liquid,
    Frozen(usize),
}

impl Mask {
    /// CSV encoding: -1 outside, 0 liquid, 1+k frozen at corner k.
    pub fn code(&self) -> i64 {
        match self {
            Mask::Outside => -1,
            Mask::Liquid => 0,
            Mask::Frozen(k) => 1 + *k as i64,
        }
    }
}

/// Discrete height data over a rectangular grid.
#[derive(Debug, Clone)]
pub struct HeightField {
    pub origin: Complex64,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub mask: Vec<Mask>,
    pub h: Vec<f64>,
    pub grad: Vec<Complex64>,
    pub max_plaquette_curl: f64,
}

impl HeightField {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        self.origin + Complex64::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }
}

/// Grid request for [`integrate_h`].
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub spacing: f64,
    /// Extra width of frozen collar reconstructed outside ∂𝓛.
    pub padding: f64,
}

/// Reconstruct the height field: harmonic-measure gradients inside 𝓛,
/// affine corner continuation outside (labeled by the nearest boundary
/// sample), and h itself by trapezoid integration of the curl-free field
/// along grid edges from an anchor at the domain centroid.
pub fn integrate_h(
    model: &FrozenBoundaryModel,
    assignment: &ArcAssignment,
    spec: GridSpec,
) -> Result<HeightField> {
    let nb = 2048;
    let polyline = model.boundary_polyline(nb)?;
    let corners_at: Vec<usize> = (0..nb)
        .map(|k| assignment.boundary_corner(model, TAU * k as f64 / nb as f64))
        .collect::<Result<_>>()?;
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &polyline {
        xmin = xmin.min(p.re);
        xmax = xmax.max(p.re);
        ymin = ymin.min(p.im);
        ymax = ymax.max(p.im);
    }
    let origin = Complex64::new(xmin - spec.padding, ymin - spec.padding);
    let nx = ((xmax - xmin + 2.0 * spec.padding) / spec.spacing).ceil() as usize + 1;
    let ny = ((ymax - ymin + 2.0 * spec.padding) / spec.spacing).ceil() as usize + 1;
    let npts = nx * ny;
    let mut mask = vec![Mask::Outside; npts];
    let mut grad = vec![Complex64::new(0.0, 0.0); npts];
    let mut h = vec![0.0; npts];
    let corners = assignment.polygon.corners();

    let nearest_boundary = |p: Complex64| -> (f64, usize) {
        let mut best = (f64::INFINITY, 0usize);
        for k in 0..nb {
            let a = polyline[k];
            let b = polyline[(k + 1) % nb];
            let d = dist_to_segment(p, a, b);
            if d < best.0 {
                best = (d, k);
            }
        }
        best
    };

    // classification and gradients, row by row with a warm inversion seed
    for j in 0..ny {
        let mut seed: Option<Complex64> = None;
        for i in 0..nx {
            let id = j * nx + i;
            let p = origin + Complex64::new(i as f64 * spec.spacing, j as f64 * spec.spacing);
            let (dist, seg) = nearest_boundary(p);
            let inside = point_in_simple_polygon(&polyline, p);
            if inside && dist > 0.5 * spec.spacing {
                match invert_g(model, p, seed) {
                    Ok(w) => {
                        seed = Some(w);
                        mask[id] = Mask::Liquid;
                        grad[id] = assignment.gradient_at_disc(model, w)?;
                        continue;
                    }
                    Err(_) => {
                        seed = None;
                    }
                }
            }
            let label = corners_at[seg];
            mask[id] = Mask::Frozen(label);
            grad[id] = corners[label];
        }
    }

    // integrate h along a deterministic spanning tree from the anchor
    let centroid = polyline.iter().sum::<Complex64>() / nb as f64;
    let mut anchor = 0usize;
    let mut best = f64::INFINITY;
    for j in 0..ny {
        for i in 0..nx {
            let p = origin + Complex64::new(i as f64 * spec.spacing, j as f64 * spec.spacing);
            let d = (p - centroid).norm();
            if d < best {
                best = d;
                anchor = j * nx + i;
            }
        }
    }
    let mut visited = vec![false; npts];
    let mut queue = std::collections::VecDeque::new();
    visited[anchor] = true;
    h[anchor] = 0.0;
    queue.push_back(anchor);
    while let Some(id) = queue.pop_front() {
        let (i, j) = (id % nx, id / nx);
        let neighbors = [
            (i.wrapping_sub(1), j, -1.0, true),
            (i + 1, j, 1.0, true),
            (i, j.wrapping_sub(1), -1.0, false),
            (i, j + 1, 1.0, false),
        ];
        for (ni, nj, sign, horizontal) in neighbors {
            if ni >= nx || nj >= ny {
                continue;
            }
            let nid = nj * nx + ni;
            if visited[nid] {
                continue;
            }
            visited[nid] = true;
            let step = sign * spec.spacing;
            let avg = 0.5 * (grad[id] + grad[nid]);
            h[nid] = h[id] + if horizontal { avg.re * step } else { avg.im * step };
            queue.push_back(nid);
        }
    }

    // path-independence residual on uniform plaquettes
    let mut max_curl = 0.0f64;
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let ids = [
                j * nx + i,
                j * nx + i + 1,
                (j + 1) * nx + i + 1,
                (j + 1) * nx + i,
            ];
            let uniform = match mask[ids[0]] {
                Mask::Outside => false,
                m => ids.iter().all(|&id| mask[id] == m),
            };
            if !uniform {
                continue;
            }
            let d = spec.spacing;
            let loop_sum = 0.5 * (grad[ids[0]].re + grad[ids[1]].re) * d
                + 0.5 * (grad[ids[1]].im + grad[ids[2]].im) * d
                - 0.5 * (grad[ids[3]].re + grad[ids[2]].re) * d
                - 0.5 * (grad[ids[0]].im + grad[ids[3]].im) * d;
            max_curl = max_curl.max(loop_sum.abs());
        }
    }
    if max_curl > 1e-3 * spec.spacing {
        return Err(Error::ExcessiveCurl {
            found: max_curl,
            bound: 1e-3 * spec.spacing,
        });
    }
    Ok(HeightField {
        origin,
        spacing: spec.spacing,
        nx,
        ny,
        mask,
        h,
        grad,
        max_plaquette_curl: max_curl,
    })
}

/// Height excess h(z₀+δn) − h(z₀) − δ⟨p₀,n⟩ along the inward normal at a
/// boundary point, computed by quadrature of ⟨∇h − p₀, n⟩ with the
/// square-root substitution that absorbs the Pokrovsky–Talapov singularity.
pub fn normal_height_excess(
    model: &FrozenBoundaryModel,
    assignment: &ArcAssignment,
    boundary_angle: f64,
    delta: f64,
) -> Result<f64> {
    let zb = Complex64::from_polar(1.0, boundary_angle);
    let z0 = model.boundary_param(zb)?;
    let tangent = Complex64::i() * zb * model.boundary_deriv(zb)?;
    // inward normal: rotate the (counterclockwise) tangent left by 90°
    let n = Complex64::i() * tangent / tangent.norm();
    let label = assignment.boundary_corner(model, boundary_angle)?;
    let p0 = assignment.polygon.corners()[label];
    // ∫₀^δ ⟨∇h(z0+tn) − p0, n⟩ dt with t = u²
    let nodes = crate::quad::gauss_legendre(48);
    let sqrt_d = delta.sqrt();
    let mut seed: Option<Complex64> = None;
    let mut total = 0.0;
    for (x, wq) in nodes.0.iter().zip(nodes.1.iter()) {
        let u = 0.5 * sqrt_d * (x + 1.0);
        let t = u * u;
        let z = z0 + t * n;
        let w = invert_g(model, z, seed)?;
        seed = Some(w);
        let gdiff = assignment.gradient_at_disc(model, w)? - p0;
        total += wq * 2.0 * u * (gdiff.re * n.re + gdiff.im * n.im);
    }
    Ok(total * 0.5 * sqrt_d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::harmonic_measure;
    use crate::quad::ls_slope;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn aztec_model() -> FrozenBoundaryModel {
        FrozenBoundaryModel::canonical(2).unwrap()
    }

    #[test]
    fn invert_g_quadratic_example() {
        let m = aztec_model();
        // 2z/(1+z²) = 1/2 → z = 2 − √3
        let w = invert_g(&m, c(0.5, 0.0), None).unwrap();
        assert!((w - c(2.0 - 3.0f64.sqrt(), 0.0)).norm() < 1e-10);
        // target 0 → 0
        assert!(invert_g(&m, c(0.0, 0.0), None).unwrap().norm() < 1e-10);
    }

    #[test]
    fn invert_g_roundtrip() {
        let m = aztec_model();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..500 {
            let target = Complex64::from_polar(0.97 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let w = invert_g(&m, target, None).unwrap();
            assert!((m.g(w).unwrap() - target).norm() < 1e-9);
        }
    }

    #[test]
    fn invert_g_rejects_outside_points() {
        let m = aztec_model();
        assert!(invert_g(&m, c(1.5, 0.0), None).is_err());
    }

    #[test]
    fn aztec_closed_form_matches_inversion() {
        let m = aztec_model();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..100 {
            let z = Complex64::from_polar(0.95 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let w = invert_g(&m, z, None).unwrap();
            assert!((w - aztec_f(z)).norm() < 1e-9);
        }
        assert!((aztec_f(c(0.6, 0.0)) - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!(aztec_f(c(0.0, 0.0)).norm() == 0.0);
    }

    #[test]
    fn aztec_density_values() {
        assert!((aztec_density(0.0, 0.0) - 0.25).abs() < 1e-15);
        let y = 1.0 / 2.0f64.sqrt() - 1e-12;
        assert!((aztec_density(0.0, y) - 0.5).abs() < 1e-6);
        assert_eq!(aztec_density(0.0, 0.9), 1.0);
        assert_eq!(aztec_density(0.0, -0.9), 0.0);
        assert_eq!(aztec_density(0.9, 0.3), 0.0);
    }

    #[test]
    fn aztec_density_equals_harmonic_measure_of_north_arc() {
        let m = aztec_model();
        let assignment = ArcAssignment::aztec();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..500 {
            let z = Complex64::from_polar(0.95 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let p = aztec_density(z.re, z.im);
            let w = tile_density(&m, &assignment.arcs, 1, z, None).unwrap();
            assert!((p - w).abs() < 1e-8, "P={p} ω={w} at {z}");
        }
    }

    #[test]
    fn aztec_gradient_center_and_containment() {
        let m = aztec_model();
        let a = ArcAssignment::aztec();
        // center: all four measures 1/4, so ∇h(0) = 0; north measure 1/4
        let g0 = a.gradient(&m, c(0.0, 0.0), None).unwrap();
        assert!(g0.norm() < 1e-12);
        let w = invert_g(&m, c(0.0, 0.0), None).unwrap();
        assert!((a.arcs.measure(1, w.conj()).unwrap() - 0.25).abs() < 1e-12);
        // strict containment in N on random interior points
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        for _ in 0..300 {
            let z = Complex64::from_polar(0.95 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let g = a.gradient(&m, z, None).unwrap();
            assert!(a.polygon.signed_edge_distance(g) > 0.0, "grad {g} at {z}");
        }
    }

    #[test]
    fn gradient_fields_are_curl_free() {
        let m = aztec_model();
        for assignment in [ArcAssignment::aztec(), ArcAssignment::lozenge_on_disc()] {
            let field = |z: Complex64| assignment.gradient(&m, z, None).unwrap();
            let h = 1e-5;
            for &(x, y) in &[(0.5, 0.2), (-0.3, 0.4), (0.1, -0.6), (0.33, 0.51)] {
                let z = c(x, y);
                let dx = (field(z + h) - field(z - h)) / (2.0 * h);
                let dy = (field(z + c(0.0, h)) - field(z - c(0.0, h))) / (2.0 * h);
                let curl = dx.im - dy.re;
                assert!(curl.abs() < 1e-6, "curl {curl} at {z}");
            }
        }
    }

    #[test]
    fn lozenge_arcs_satisfy_structure_relation() {
        // conj(U_ζ̄)(ζ) = −ζ·U_ζ(ζ) for the arcs (−1, −i, 1) on hull{0,1,i}
        let a = ArcAssignment::lozenge_on_disc();
        let corners = a.polygon.corners();
        let eta = a.arcs.endpoints();
        let labels = a.arcs.labels();
        let m = eta.len();
        let coeff: Vec<Complex64> = (0..m)
            .map(|k| {
                (corners[a.corner_map[labels[k]]] - corners[a.corner_map[labels[(k + 1) % m]]])
                    / (Complex64::i() * TAU)
            })
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for _ in 0..50 {
            let z = Complex64::from_polar(0.9 * rng.gen::<f64>() + 0.05, TAU * rng.gen::<f64>());
            let uz: Complex64 = (0..m).map(|k| coeff[k] / (z - eta[k])).sum();
            let uzb: Complex64 = (0..m)
                .map(|k| -coeff[k] / (z.conj() - eta[k].conj()))
                .sum();
            assert!(
                (uzb.conj() + z * uz).norm() < 1e-12 * (1.0 + uz.norm()),
                "structure relation fails at {z}"
            );
        }
    }

    #[test]
    fn boundary_limit_of_gradient() {
        let m = aztec_model();
        let a = ArcAssignment::aztec();
        // boundary point on the east arc: ∇h → (1, 0)
        let z = c(1.0 - 1e-4, 0.0);
        let g = a.gradient(&m, z, None).unwrap();
        assert!((g - c(1.0, 0.0)).norm() < 1e-3, "grad {g}");
        // north side of the circle: gradient approaches (0, −1)
        let z = c(0.0, 1.0 - 1e-4);
        let g = a.gradient(&m, z, None).unwrap();
        assert!((g - c(0.0, -1.0)).norm() < 1e-3, "grad {g}");
    }

    #[test]
    fn integrate_h_lozenge_curl_residual() {
        let m = aztec_model();
        let a = ArcAssignment::lozenge_on_disc();
        let field = integrate_h(
            &m,
            &a,
            GridSpec {
                spacing: 1.0 / 128.0,
                padding: 0.05,
            },
        )
        .unwrap();
        assert!(
            field.max_plaquette_curl < 1e-6,
            "curl {}",
            field.max_plaquette_curl
        );
    }

    #[test]
    fn integrate_h_constant_assignment_is_affine() {
        let m = aztec_model();
        let a = ArcAssignment::constant(GradientPolygon::domino_square(), 1);
        let p = a.polygon.corners()[1];
        let field = integrate_h(
            &m,
            &a,
            GridSpec {
                spacing: 1.0 / 32.0,
                padding: 0.1,
            },
        )
        .unwrap();
        // pick the anchor value and check affinity everywhere
        let anchor = field.point(field.nx / 2, field.ny / 2);
        let h0 = field.h[field.idx(field.nx / 2, field.ny / 2)];
        for j in 0..field.ny {
            for i in 0..field.nx {
                let z = field.point(i, j);
                let expected = h0 + crate::geom::dot(p, z - anchor);
                assert!(
                    (field.h[field.idx(i, j)] - expected).abs() < 1e-9,
                    "not affine at {z}"
                );
            }
        }
    }

    #[test]
    fn integrate_h_lipschitz_consistency() {
        let m = aztec_model();
        let a = ArcAssignment::aztec();
        let field = integrate_h(
            &m,
            &a,
            GridSpec {
                spacing: 1.0 / 64.0,
                padding: 0.05,
            },
        )
        .unwrap();
        let d = field.spacing;
        let hn = |v: Complex64| a.polygon.support(v);
        for j in 0..field.ny {
            for i in 0..field.nx - 1 {
                let a_id = field.idx(i, j);
                let b_id = field.idx(i + 1, j);
                let dh = field.h[b_id] - field.h[a_id];
                let bound = hn(c(d, 0.0)).max(hn(c(-d, 0.0)));
                assert!(dh.abs() <= bound + 1e-6, "Lipschitz violated: {dh} vs {bound}");
            }
        }
    }

    #[test]
    fn divergence_free_flux_for_lozenge_reconstruction() {
        // div[∇σ∘∇h] = 0: plaquette flux residual on interior liquid cells
        let m = aztec_model();
        let a = ArcAssignment::lozenge_on_disc();
        let spacing = 1.0 / 64.0;
        let field = integrate_h(
            &m,
            &a,
            GridSpec {
                spacing,
                padding: 0.02,
            },
        )
        .unwrap();
        let mut checked = 0;
        let mut worst = 0.0f64;
        for j in 0..field.ny - 1 {
            for i in 0..field.nx - 1 {
                let ids = [
                    field.idx(i, j),
                    field.idx(i + 1, j),
                    field.idx(i + 1, j + 1),
                    field.idx(i, j + 1),
                ];
                if !ids.iter().all(|&id| field.mask[id] == Mask::Liquid) {
                    continue;
                }
                // stay well inside N to keep ∇σ bounded
                if !ids
                    .iter()
                    .all(|&id| a.polygon.signed_edge_distance(field.grad[id]) > 0.05)
                {
                    continue;
                }
                let f: Vec<Complex64> = ids
                    .iter()
                    .map(|&id| {
                        crate::tension::lozenge_grad_sigma(field.grad[id].re, field.grad[id].im)
                            .unwrap()
                    })
                    .collect();
                // outward flux of F across the plaquette boundary
                let d = spacing;
                let flux = 0.5 * (f[1].re + f[2].re) * d - 0.5 * (f[0].re + f[3].re) * d
                    + 0.5 * (f[2].im + f[3].im) * d
                    - 0.5 * (f[0].im + f[1].im) * d;
                worst = worst.max((flux / d).abs());
                checked += 1;
            }
        }
        assert!(checked > 500, "too few interior cells checked: {checked}");
        assert!(worst < 1e-3, "flux residual {worst}");
    }

    #[test]
    fn density_identity_against_poisson_quadrature() {
        // one deep cross-check of ω against the Poisson kernel at f(z)
        let m = aztec_model();
        let a = ArcAssignment::aztec();
        let z = c(0.31, 0.17);
        let w = invert_g(&m, z, None).unwrap();
        let (e1, e2) = a.arcs.arc(1);
        let direct = harmonic_measure(w, e1, e2).unwrap();
        let poisson = crate::quad::adaptive_gk(
            &|t: f64| {
                let e = Complex64::from_polar(1.0, t);
                (1.0 - w.norm_sqr()) / (e - w).norm_sqr()
            },
            e1.arg(),
            e1.arg() + (e2.arg() - e1.arg()).rem_euclid(TAU),
            1e-13,
        ) / TAU;
        assert!((direct - poisson).abs() < 1e-10);
        assert!((direct - aztec_density(z.re, z.im)).abs() < 1e-8);
    }

    #[test]
    fn pokrovsky_talapov_exponent_on_lozenge_height() {
        let m = aztec_model();
        let a = ArcAssignment::lozenge_on_disc();
        // boundary angle mapped to the corner-i arc (checked via label)
        let theta = 2.2;
        let mut deltas = Vec::new();
        let mut excesses = Vec::new();
        let mut d = 1e-4;
        while d <= 1e-2 {
            let e = normal_height_excess(&m, &a, theta, d).unwrap();
            deltas.push(d.ln());
            excesses.push(e.abs().max(1e-300).ln());
            d *= 1.8;
        }
        let slope = ls_slope(&deltas, &excesses);
        assert!(
            (slope - 1.5).abs() < 0.15,
            "Pokrovsky–Talapov exponent {slope}"
        );
    }

    #[test]
    fn f_is_proper_and_monotone_in_modulus_near_boundary() {
        let m = aztec_model();
        for k in 0..8 {
            let dir = Complex64::from_polar(1.0, TAU * (k as f64 + 0.3) / 8.0);
            let mut prev = 0.0;
            for step in 0..20 {
                let r = 0.99 + 0.0005 * step as f64;
                let z = r * dir;
                let f = eval_f(&m, z, None).unwrap().norm();
                assert!(f >= prev - 1e-12, "|f| not monotone at r={r}");
                prev = f;
            }
            assert!(prev > 0.9);
        }
    }

    #[test]
    fn hoelder_exponents_near_boundary() {
        // smooth point: |f(z)−f(z0)| ~ δ^{1/2}; cusp (d=3): δ^{1/3} transversally
        let m2 = aztec_model();
        let _z0 = c(1.0, 0.0);
        let f0 = c(1.0, 0.0) * c(1.0, 0.0); // f̂ = B(g⁻¹) → z0² on the boundary
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut d = 1e-5;
        while d <= 1e-2 {
            let z = c(1.0 - d, 0.0);
            let f = eval_f(&m2, z, None).unwrap();
            xs.push(d.ln());
            ys.push((f - f0).norm().ln());
            d *= 2.0;
        }
        let slope = ls_slope(&xs, &ys);
        assert!((slope - 0.5).abs() < 0.1, "smooth Hölder slope {slope}");

        let m3 = FrozenBoundaryModel::canonical(3).unwrap();
        let cusp = m3.cusps()[0].point; // −1/2
        let fc = {
            let w = m3.cusps()[0].preimage;
            m3.blaschke().eval(w).unwrap()
        };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut d = 1e-6;
        while d <= 1e-3 {
            // transversal line through the cusp (cusp axis is real)
            let z = cusp + c(0.0, d);
            let f = eval_f(&m3, z, None).unwrap();
            xs.push(d.ln());
            ys.push((f - fc).norm().ln());
            d *= 2.0;
        }
        let slope = ls_slope(&xs, &ys);
        assert!((slope - 1.0 / 3.0).abs() < 0.07, "cusp Hölder slope {slope}");
    }
}
