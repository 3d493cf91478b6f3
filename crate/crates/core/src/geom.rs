//! Shared geometric substrate: convex gradient polygons, arc partitions of
//! the unit circle, harmonic measure in the disc, and finite Blaschke
//! products.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Cross product of plane vectors viewed as complex numbers.
#[inline]
pub fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Real inner product of plane vectors.
#[inline]
pub fn dot(a: Complex64, b: Complex64) -> f64 {
    a.re * b.re + a.im * b.im
}

#[inline]
fn finite(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Compact convex polygon of admissible gradients (the Newton polygon N).
///
/// Corners are stored counterclockwise; the vertex sequence must be strictly
/// convex with no repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientPolygon {
    corners: Vec<Complex64>,
    contains_origin_interior: bool,
}

impl GradientPolygon {
    pub fn new(corners: Vec<Complex64>) -> Result<Self> {
        if corners.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 corners, got {}",
                corners.len()
            )));
        }
        if corners.iter().any(|c| !finite(*c)) {
            return Err(Error::InvalidPolygon("non-finite corner".into()));
        }
        let k = corners.len();
        for i in 0..k {
            let a = corners[i];
            let b = corners[(i + 1) % k];
            let c = corners[(i + 2) % k];
            if (b - a).norm() < 1e-14 {
                return Err(Error::InvalidPolygon(format!("repeated corner at index {i}")));
            }
            if cross(b - a, c - b) <= 0.0 {
                return Err(Error::InvalidPolygon(format!(
                    "vertex sequence not strictly convex counterclockwise at index {}",
                    (i + 1) % k
                )));
            }
        }
        let mut poly = GradientPolygon {
            corners,
            contains_origin_interior: false,
        };
        poly.contains_origin_interior =
            poly.signed_edge_distance(Complex64::new(0.0, 0.0)) > 0.0;
        Ok(poly)
    }

    /// The lozenge gradient constraint: triangle with corners 0, 1, i.
    pub fn lozenge_triangle() -> Self {
        Self::new(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ])
        .expect("static polygon")
    }

    /// The domino gradient constraint: square with corners ±1, ±i.
    pub fn domino_square() -> Self {
        Self::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ])
        .expect("static polygon")
    }

    pub fn corners(&self) -> &[Complex64] {
        &self.corners
    }

    pub fn len(&self) -> usize {
        self.corners.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains_origin_interior(&self) -> bool {
        self.contains_origin_interior
    }

    /// Area centroid (shoelace).
    pub fn centroid(&self) -> Complex64 {
        let mut area = 0.0;
        let mut cx = 0.0;
        let mut cy = 0.0;
        let k = self.corners.len();
        for i in 0..k {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % k];
            let w = cross(a, b);
            area += w;
            cx += (a.re + b.re) * w;
            cy += (a.im + b.im) * w;
        }
        area *= 0.5;
        Complex64::new(cx / (6.0 * area), cy / (6.0 * area))
    }

    /// Support function h_N(z) = max_j <p_j, z>.
    pub fn support(&self, z: Complex64) -> f64 {
        self.corners
            .iter()
            .map(|p| dot(*p, z))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Minimum over edges of the inward signed distance to the edge line.
    /// Positive strictly inside; for interior points of a convex polygon this
    /// is the exact Euclidean distance to the boundary.
    pub fn signed_edge_distance(&self, p: Complex64) -> f64 {
        let k = self.corners.len();
        let mut d = f64::INFINITY;
        for i in 0..k {
            let a = self.corners[i];
            let b = self.corners[(i + 1) % k];
            let e = b - a;
            d = d.min(cross(e, p - a) / e.norm());
        }
        d
    }

    pub fn contains(&self, p: Complex64, tol: f64) -> bool {
        self.signed_edge_distance(p) >= -tol
    }

    /// Euclidean projection of `p` onto (1-shrink)·N, scaled about the
    /// centroid. Brute force over edges and vertices.
    pub fn project(&self, p: Complex64, shrink: f64) -> Complex64 {
        debug_assert!((0.0..1.0).contains(&shrink));
        let c = self.centroid();
        let s = 1.0 - shrink;
        let scaled: Vec<Complex64> = self.corners.iter().map(|q| c + s * (q - c)).collect();
        let k = scaled.len();
        let mut inside = true;
        for i in 0..k {
            let a = scaled[i];
            let b = scaled[(i + 1) % k];
            if cross(b - a, p - a) < 0.0 {
                inside = false;
                break;
            }
        }
        if inside {
            return p;
        }
        let mut best = scaled[0];
        let mut best_d = f64::INFINITY;
        for i in 0..k {
            let a = scaled[i];
            let b = scaled[(i + 1) % k];
            let e = b - a;
            let t = (dot(p - a, e) / dot(e, e)).clamp(0.0, 1.0);
            let q = a + t * e;
            let d = (p - q).norm();
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }
}

/// Harmonic measure ω(ζ; I) of the counterclockwise arc I from `eta1` to
/// `eta2`, evaluated at ζ in the open unit disc.
///
/// Closed form: (1/π)·Im log((ζ−η₂)/(ζ−η₁)) plus the constant fixed by
/// ω(0; I) = |I|/2π; the principal-branch jumps (exactly ±2 in these units)
/// are removed by reduction mod 2 into (0, 1).
pub fn harmonic_measure(zeta: Complex64, eta1: Complex64, eta2: Complex64) -> Result<f64> {
    if zeta.norm() >= 1.0 - 1e-14 {
        return Err(Error::Domain(format!(
            "harmonic measure requires |zeta| < 1, got {}",
            zeta.norm()
        )));
    }
    for (name, eta) in [("eta1", eta1), ("eta2", eta2)] {
        if (eta.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "{name} must have unit modulus, got {}",
                eta.norm()
            )));
        }
    }
    let e1 = eta1 / eta1.norm();
    let e2 = eta2 / eta2.norm();
    let arc = (e2.arg() - e1.arg()).rem_euclid(TAU);
    if arc == 0.0 {
        return Err(Error::Domain("degenerate arc (eta1 == eta2)".into()));
    }
    let theta = ((zeta - e2) / (zeta - e1)).arg() - (e2 / e1).arg();
    let omega = (theta / PI + arc / TAU).rem_euclid(2.0);
    Ok(omega)
}

/// ∂_z of ω(·; I) at ζ (ω is real, so ∂_z̄ω = conj(∂_zω)).
pub fn harmonic_measure_dz(zeta: Complex64, eta1: Complex64, eta2: Complex64) -> Complex64 {
    let i2pi = Complex64::new(0.0, 2.0 * PI);
    (Complex64::new(1.0, 0.0) / (zeta - eta2) - Complex64::new(1.0, 0.0) / (zeta - eta1)) / i2pi
}

/// Ordered partition of the unit circle into arcs labeled by polygon corners.
///
/// `labels[i]` is the corner index attached to the arc running
/// counterclockwise from `endpoints[i-1]` (cyclically) to `endpoints[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcPartition {
    endpoints: Vec<Complex64>,
    labels: Vec<usize>,
}

impl ArcPartition {
    pub fn new(endpoints: Vec<Complex64>, labels: Vec<usize>, n_corners: usize) -> Result<Self> {
        let m = endpoints.len();
        if m < 2 {
            return Err(Error::InvalidArcs("need at least 2 endpoints".into()));
        }
        if labels.len() != m {
            return Err(Error::InvalidArcs(format!(
                "{} labels for {} arcs",
                labels.len(),
                m
            )));
        }
        let mut endpoints = endpoints;
        for eta in endpoints.iter_mut() {
            if (eta.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArcs(format!(
                    "endpoint modulus {} is not 1",
                    eta.norm()
                )));
            }
            *eta /= eta.norm();
        }
        let mut total = 0.0;
        for i in 0..m {
            let gap = (endpoints[(i + 1) % m].arg() - endpoints[i].arg()).rem_euclid(TAU);
            if gap <= 1e-12 {
                return Err(Error::InvalidArcs(
                    "endpoints not strictly increasing modulo 2π".into(),
                ));
            }
            total += gap;
        }
        if (total - TAU).abs() > 1e-9 {
            return Err(Error::InvalidArcs("endpoints wind more than once".into()));
        }
        let mut seen = vec![false; n_corners];
        for &l in &labels {
            if l >= n_corners {
                return Err(Error::InvalidArcs(format!(
                    "label {l} out of range for {n_corners} corners"
                )));
            }
            seen[l] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidArcs("labels do not cover all corners".into()));
        }
        Ok(ArcPartition { endpoints, labels })
    }

    /// Equal arcs: m endpoints at angles offset + 2πk/m, labels 0..m-1.
    pub fn equal(m: usize, offset: f64) -> Result<Self> {
        let endpoints = (0..m)
            .map(|k| Complex64::from_polar(1.0, offset + TAU * (k as f64 + 1.0) / m as f64))
            .collect();
        ArcPartition::new(endpoints, (0..m).collect(), m)
    }

    pub fn len(&self) -> usize {
        self.endpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.endpoints.is_empty()
    }

    pub fn endpoints(&self) -> &[Complex64] {
        &self.endpoints
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// (start, end) endpoints of arc `i`, counterclockwise.
    pub fn arc(&self, i: usize) -> (Complex64, Complex64) {
        let m = self.endpoints.len();
        (self.endpoints[(i + m - 1) % m], self.endpoints[i])
    }

    /// Harmonic measure of arc `i` at ζ.
    pub fn measure(&self, i: usize, zeta: Complex64) -> Result<f64> {
        let (a, b) = self.arc(i);
        harmonic_measure(zeta, a, b)
    }
}

/// Finite Blaschke product η·Π (z − z_k)/(1 − conj(z_k) z).
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
    unimodular: Complex64,
}

impl BlaschkeProduct {
    pub fn new(zeros: Vec<Complex64>, unimodular: Complex64) -> Result<Self> {
        if zeros.is_empty() {
            return Err(Error::InvalidBlaschke("degree must be at least 1".into()));
        }
        for z in &zeros {
            if !finite(*z) || z.norm() >= 1.0 {
                return Err(Error::InvalidBlaschke(format!(
                    "zero {z} not in the open unit disc"
                )));
            }
        }
        if (unimodular.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidBlaschke("factor must be unimodular".into()));
        }
        Ok(BlaschkeProduct {
            zeros,
            unimodular: unimodular / unimodular.norm(),
        })
    }

    /// B(z) = z^d.
    pub fn monomial(d: usize) -> Self {
        BlaschkeProduct::new(vec![Complex64::new(0.0, 0.0); d], Complex64::new(1.0, 0.0))
            .expect("monomial Blaschke")
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn unimodular(&self) -> Complex64 {
        self.unimodular
    }

    pub fn is_monomial(&self) -> bool {
        self.zeros.iter().all(|z| z.norm() == 0.0)
    }

    fn factor(&self, k: usize, z: Complex64) -> Result<Complex64> {
        let den = Complex64::new(1.0, 0.0) - self.zeros[k].conj() * z;
        if den.norm() < 1e-14 {
            return Err(Error::Pole(format!(
                "evaluation at pole 1/conj(z_{k}) of the Blaschke product"
            )));
        }
        Ok((z - self.zeros[k]) / den)
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let mut v = self.unimodular;
        for k in 0..self.zeros.len() {
            v *= self.factor(k, z)?;
        }
        Ok(v)
    }

    /// Analytic derivative by the product rule.
    pub fn deriv(&self, z: Complex64) -> Result<Complex64> {
        let d = self.zeros.len();
        let mut factors = Vec::with_capacity(d);
        for k in 0..d {
            factors.push(self.factor(k, z)?);
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for k in 0..d {
            let den = Complex64::new(1.0, 0.0) - self.zeros[k].conj() * z;
            let fk_prime = (Complex64::new(1.0, 0.0) - self.zeros[k].conj() * self.zeros[k])
                / (den * den);
            let mut rest = self.unimodular;
            for (j, f) in factors.iter().enumerate() {
                if j != k {
                    rest *= f;
                }
            }
            sum += fk_prime * rest;
        }
        Ok(sum)
    }
}

/// Even-odd test for a point inside a simple (possibly non-convex) polygon.
pub fn point_in_simple_polygon(vertices: &[Complex64], p: Complex64) -> bool {
    let n = vertices.len();
    let mut inside = false;
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        if (a.im > p.im) != (b.im > p.im) {
            let x = a.re + (p.im - a.im) / (b.im - a.im) * (b.re - a.re);
            if p.re < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Distance from `p` to the segment [a, b].
pub fn dist_to_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let e = b - a;
    let t = (dot(p - a, e) / dot(e, e)).clamp(0.0, 1.0);
    (p - (a + t * e)).norm()
}

/// Signed area of a simple polygon (positive when counterclockwise).
pub fn polygon_area(vertices: &[Complex64]) -> f64 {
    let n = vertices.len();
    let mut s = 0.0;
    for i in 0..n {
        s += cross(vertices[i], vertices[(i + 1) % n]);
    }
    0.5 * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_gk;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn support_function_examples() {
        let tri = GradientPolygon::lozenge_triangle();
        assert_eq!(tri.support(c(2.0, -1.0)), 2.0);
        assert_eq!(tri.support(c(0.0, 0.0)), 0.0);
        let sq = GradientPolygon::domino_square();
        // inner products {3, 4, -3, -4}
        assert_eq!(sq.support(c(3.0, 4.0)), 4.0);
    }

    #[test]
    fn support_function_positively_homogeneous() {
        let sq = GradientPolygon::domino_square();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let z = c(rng.gen::<f64>() * 4.0 - 2.0, rng.gen::<f64>() * 4.0 - 2.0);
            let t = rng.gen::<f64>() * 5.0 + 0.01;
            assert!((sq.support(t * z) - t * sq.support(z)).abs() < 1e-12 * (1.0 + t));
        }
    }

    #[test]
    fn projection_examples() {
        let sq = GradientPolygon::domino_square();
        assert_eq!(sq.project(c(0.0, 0.0), 0.0), c(0.0, 0.0));
        let p = sq.project(c(2.0, 0.0), 0.0);
        assert!((p - c(1.0, 0.0)).norm() < 1e-12);
        let tri = GradientPolygon::lozenge_triangle();
        let q = tri.project(c(1.0, 1.0), 0.0);
        assert!((q - c(0.5, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn projection_idempotent_and_nonexpansive() {
        let tri = GradientPolygon::lozenge_triangle();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let p = c(rng.gen::<f64>() * 6.0 - 3.0, rng.gen::<f64>() * 6.0 - 3.0);
            let q = c(rng.gen::<f64>() * 6.0 - 3.0, rng.gen::<f64>() * 6.0 - 3.0);
            let shrink = rng.gen::<f64>() * 0.4;
            let pp = tri.project(p, shrink);
            let qq = tri.project(q, shrink);
            assert!((tri.project(pp, shrink) - pp).norm() < 1e-12);
            assert!((pp - qq).norm() <= (p - q).norm() + 1e-12);
        }
    }

    #[test]
    fn invalid_polygons_rejected() {
        assert!(GradientPolygon::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).is_err());
        // clockwise
        assert!(GradientPolygon::new(vec![c(0.0, 0.0), c(0.0, 1.0), c(1.0, 0.0)]).is_err());
        // repeated corner
        assert!(
            GradientPolygon::new(vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)])
                .is_err()
        );
        // collinear triple
        assert!(GradientPolygon::new(vec![
            c(0.0, 0.0),
            c(0.5, 0.0),
            c(1.0, 0.0),
            c(0.0, 1.0)
        ])
        .is_err());
    }

    #[test]
    fn harmonic_measure_at_center_is_arclength_over_2pi() {
        let w = harmonic_measure(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert!((w - 0.5).abs() < 1e-14);
        let third = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        let w = harmonic_measure(c(0.0, 0.0), c(1.0, 0.0), third).unwrap();
        assert!((w - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn harmonic_measure_matches_poisson_kernel_quadrature() {
        // Independent oracle: ω(ζ; I) = (1/2π) ∫_I (1-|ζ|²)/|e^{it}-ζ|² dt.
        let zeta = c(0.5, 0.0);
        let poisson = |t: f64| {
            let e = Complex64::from_polar(1.0, t);
            (1.0 - zeta.norm_sqr()) / (e - zeta).norm_sqr()
        };
        let oracle = adaptive_gk(&poisson, 0.0, PI, 1e-13) / TAU;
        let w = harmonic_measure(zeta, c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert!((w - oracle).abs() < 1e-10, "w={w} oracle={oracle}");
    }

    #[test]
    fn harmonic_measure_rejects_boundary_point() {
        assert!(harmonic_measure(c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)).is_err());
    }

    #[test]
    fn arc_partition_measures_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let arcs = ArcPartition::new(
            vec![
                Complex64::from_polar(1.0, 0.3),
                Complex64::from_polar(1.0, 1.1),
                Complex64::from_polar(1.0, 2.9),
                Complex64::from_polar(1.0, 4.0),
            ],
            vec![0, 1, 2, 3],
            4,
        )
        .unwrap();
        for _ in 0..200 {
            let r = rng.gen::<f64>() * 0.97;
            let t = rng.gen::<f64>() * TAU;
            let zeta = Complex64::from_polar(r, t);
            let total: f64 = (0..4).map(|i| arcs.measure(i, zeta).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-10, "total {total} at {zeta}");
        }
    }

    #[test]
    fn harmonic_measure_is_harmonic_on_grid() {
        // five-point Laplacian residual is O(h²): it shrinks by ~4 when the
        // step halves, and is small in absolute terms away from the circle
        let arcs = ArcPartition::equal(3, 0.37).unwrap();
        for &(x, y) in &[(0.1, 0.2), (-0.4, 0.3), (0.2, -0.55), (0.0, 0.0)] {
            let z = c(x, y);
            let f = |z: Complex64| arcs.measure(1, z).unwrap();
            let lap = |h: f64| {
                (f(z + h) + f(z - h) + f(z + c(0.0, h)) + f(z - c(0.0, h)) - 4.0 * f(z))
                    / (h * h)
            };
            let coarse = lap(2e-3);
            let fine = lap(1e-3);
            assert!(fine.abs() < 1e-3, "laplacian {fine} at {z}");
            if coarse.abs() > 1e-8 {
                assert!(
                    fine.abs() < 0.4 * coarse.abs(),
                    "no O(h²) decay at {z}: {coarse} -> {fine}"
                );
            }
        }
    }

    #[test]
    fn arc_partition_validation() {
        // non-unit endpoint
        assert!(ArcPartition::new(vec![c(0.5, 0.0), c(0.0, 1.0)], vec![0, 1], 2).is_err());
        // labels not covering all corners
        assert!(ArcPartition::new(
            vec![c(1.0, 0.0), c(-1.0, 0.0)],
            vec![0, 0],
            2
        )
        .is_err());
        // duplicate endpoint
        assert!(ArcPartition::new(
            vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)],
            vec![0, 1, 2],
            3
        )
        .is_err());
    }

    #[test]
    fn blaschke_monomial_eval() {
        let b = BlaschkeProduct::monomial(2);
        let v = b.eval(c(0.0, 0.5)).unwrap();
        assert!((v - c(-0.25, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn blaschke_two_zero_example() {
        // zeros {0.5, -0.5}: B(0) = η·(0-.5)(0+.5)/((1)(1)) = -0.25·η
        let eta = Complex64::from_polar(1.0, 0.7);
        let b = BlaschkeProduct::new(vec![c(0.5, 0.0), c(-0.5, 0.0)], eta).unwrap();
        let v = b.eval(c(0.0, 0.0)).unwrap();
        assert!((v - (-0.25) * eta).norm() < 1e-15);
    }

    #[test]
    fn blaschke_unimodular_on_circle_and_deriv_nonzero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = BlaschkeProduct::new(
            vec![c(0.3, 0.2), c(-0.1, -0.6), c(0.0, 0.0)],
            c(1.0, 0.0),
        )
        .unwrap();
        for _ in 0..1000 {
            let z = Complex64::from_polar(1.0, rng.gen::<f64>() * TAU);
            assert!((b.eval(z).unwrap().norm() - 1.0).abs() < 1e-12);
            assert!(b.deriv(z).unwrap().norm() > 1e-8);
        }
        // derivative against central differences
        let z = c(0.4, 0.1);
        let h = 1e-6;
        let fd = (b.eval(z + h).unwrap() - b.eval(z - h).unwrap()) / (2.0 * h);
        assert!((fd - b.deriv(z).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn blaschke_pole_is_an_error() {
        let b = BlaschkeProduct::new(vec![c(0.5, 0.0)], c(1.0, 0.0)).unwrap();
        assert!(b.eval(c(2.0, 0.0)).is_err());
    }
}
