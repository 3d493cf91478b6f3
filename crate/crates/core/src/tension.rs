//! Dimer surface tensions: the explicit lozenge model and general polygon
//! models through the harmonic-coordinate representation
//! ∇σ∘U(ζ) = (1/π) Σ i(p_j − p_{j+1}) log 1/|ζ−η_j| + c₀ with
//! U(ζ) = Σ p_j ω(ζ; I_j).

use crate::error::{Error, Result};
use crate::geom::{dot, ArcPartition, BlaschkeProduct, GradientPolygon};
use crate::quad::{adaptive_gk, gauss_legendre, gl_integrate, solve_dense};
use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

/// Lobachevsky function 𝓛(θ) = −∫₀^θ log|2 sin x| dx.
///
/// Reduced by π-periodicity and oddness to [0, π/2]; the log singularity at 0
/// is integrated in closed form and adaptive quadrature handles the smooth
/// log(sin x / x) remainder.
pub fn lobachevsky(theta: f64) -> f64 {
    // F(s) = ∫₀^s log(2 sin x) dx on [0, π/2]; F(π/2) = 0.
    fn f_half(s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let smooth = adaptive_gk(
            &|x: f64| {
                if x.abs() < 1e-280 {
                    0.0
                } else {
                    (x.sin() / x).ln()
                }
            },
            0.0,
            s,
            1e-12,
        );
        s * (2.0 * s).ln() - s + smooth
    }
    let t = theta.rem_euclid(PI);
    let f = if t <= PI / 2.0 { f_half(t) } else { -f_half(PI - t) };
    -f
}

/// Lozenge surface tension σ_Lo(s,t) = −(1/π²)(𝓛(πs)+𝓛(πt)+𝓛(π(1−s−t))).
pub fn lozenge_sigma(s: f64, t: f64) -> Result<f64> {
    if s < -1e-15 || t < -1e-15 || s + t > 1.0 + 1e-15 {
        return Err(Error::Domain(format!(
            "({s}, {t}) outside the closed lozenge triangle"
        )));
    }
    Ok(-(lobachevsky(PI * s) + lobachevsky(PI * t) + lobachevsky(PI * (1.0 - s - t))) / (PI * PI))
}

/// π∇σ_Lo(s,t) = (log(sin πs / sin π(s+t)), log(sin πt / sin π(s+t))).
pub fn lozenge_grad_sigma(s: f64, t: f64) -> Result<Complex64> {
    if s <= 0.0 || t <= 0.0 || s + t >= 1.0 {
        return Err(Error::Domain(format!(
            "({s}, {t}) not strictly inside the lozenge triangle (gradient blows up on the boundary)"
        )));
    }
    let d = (PI * (s + t)).sin();
    Ok(Complex64::new(
        ((PI * s).sin() / d).ln() / PI,
        ((PI * t).sin() / d).ln() / PI,
    ))
}

/// Evaluator interface shared by the closed-form and harmonic models.
pub trait SurfaceTension: Send + Sync {
    fn polygon(&self) -> &GradientPolygon;
    fn sigma(&self, p: Complex64) -> Result<f64>;
    fn grad(&self, p: Complex64) -> Result<Complex64>;
}

/// The fixed lozenge model on the triangle hull{0, 1, i}.
#[derive(Debug, Clone)]
pub struct LozengeSurfaceTension {
    polygon: GradientPolygon,
}

impl LozengeSurfaceTension {
    pub fn new() -> Self {
        LozengeSurfaceTension {
            polygon: GradientPolygon::lozenge_triangle(),
        }
    }
}

impl Default for LozengeSurfaceTension {
    fn default() -> Self {
        Self::new()
    }
}

impl SurfaceTension for LozengeSurfaceTension {
    fn polygon(&self) -> &GradientPolygon {
        &self.polygon
    }
    fn sigma(&self, p: Complex64) -> Result<f64> {
        lozenge_sigma(p.re, p.im)
    }
    fn grad(&self, p: Complex64) -> Result<Complex64> {
        lozenge_grad_sigma(p.re, p.im)
    }
}

/// Analytic coefficient μ_σ of the quasilinear Beltrami equation, with the
/// degree bookkeeping m − 2 + 2ℓ (corners plus quasifrozen, gas count).
#[derive(Debug, Clone, PartialEq)]
pub enum ModelTag {
    Lozenge,
    Domino,
    Custom,
}

#[derive(Debug, Clone)]
pub enum MuMap {
    /// μ(z) = z^k.
    Power(u32),
    /// General finite Blaschke product.
    Blaschke(BlaschkeProduct),
}

#[derive(Debug, Clone)]
pub struct StructureCoefficient {
    pub tag: ModelTag,
    pub mu: MuMap,
    /// m: number of corners plus quasifrozen points.
    pub boundary_points: usize,
    /// ℓ: number of gas points (carried for degree bookkeeping only).
    pub gas_points: usize,
}

impl StructureCoefficient {
    pub fn lozenge() -> Self {
        StructureCoefficient {
            tag: ModelTag::Lozenge,
            mu: MuMap::Power(1),
            boundary_points: 3,
            gas_points: 0,
        }
    }

    pub fn domino() -> Self {
        StructureCoefficient {
            tag: ModelTag::Domino,
            mu: MuMap::Power(2),
            boundary_points: 4,
            gas_points: 0,
        }
    }

    pub fn custom(mu: MuMap, boundary_points: usize, gas_points: usize) -> Self {
        StructureCoefficient {
            tag: ModelTag::Custom,
            mu,
            boundary_points,
            gas_points,
        }
    }

    pub fn mu(&self, z: Complex64) -> Result<Complex64> {
        match &self.mu {
            MuMap::Power(k) => Ok(z.powu(*k)),
            MuMap::Blaschke(b) => b.eval(z),
        }
    }

    /// deg μ_σ = m − 2 + 2ℓ.
    pub fn degree(&self) -> usize {
        self.boundary_points - 2 + 2 * self.gas_points
    }
}

/// Surface tension of a general polygon N represented through harmonic
/// coordinates on the unit disc.
#[derive(Debug, Clone)]
pub struct HarmonicSurfaceTension {
    polygon: GradientPolygon,
    arcs: ArcPartition,
    c0: Complex64,
    sigma_ref: (Complex64, f64),
    /// Per endpoint η_k: i(p_a − p_b) with a the label of the arc ending at
    /// η_k and b the label of the arc starting there.
    grad_coeffs: Vec<Complex64>,
}

impl HarmonicSurfaceTension {
    pub fn new(
        polygon: GradientPolygon,
        arcs: ArcPartition,
        c0: Complex64,
        sigma_ref: (Complex64, f64),
    ) -> Result<Self> {
        let k = polygon.len();
        let m = arcs.len();
        // labels must traverse the corners in boundary order, cyclically
        let labels = arcs.labels();
        let mut advance = 0usize;
        for i in 0..m {
            let a = labels[i];
            let b = labels[(i + 1) % m];
            let step = (b + k - a) % k;
            if step > 1 {
                return Err(Error::InvalidArcs(
                    "labels do not traverse the polygon corners in boundary order".into(),
                ));
            }
            advance += step;
        }
        if advance != k {
            return Err(Error::InvalidArcs(
                "labels must wind once around the polygon corners".into(),
            ));
        }
        let corners = polygon.corners();
        let grad_coeffs = (0..m)
            .map(|i| {
                let a = corners[labels[i]];
                let b = corners[labels[(i + 1) % m]];
                Complex64::i() * (a - b)
            })
            .collect();
        Ok(HarmonicSurfaceTension {
            polygon,
            arcs,
            c0,
            sigma_ref,
            grad_coeffs,
        })
    }

    pub fn arcs(&self) -> &ArcPartition {
        &self.arcs
    }

    pub fn polygon_ref(&self) -> &GradientPolygon {
        &self.polygon
    }

    pub fn with_sigma_ref(mut self, sigma_ref: (Complex64, f64)) -> Self {
        self.sigma_ref = sigma_ref;
        self
    }

    pub fn c0(&self) -> Complex64 {
        self.c0
    }

    pub fn sigma_ref(&self) -> (Complex64, f64) {
        self.sigma_ref
    }

    /// U(ζ) = Σ p_j ω(ζ; I_j): sense-preserving harmonic homeomorphism of the
    /// disc onto the open polygon.
    pub fn u(&self, zeta: Complex64) -> Result<Complex64> {
        let corners = self.polygon.corners();
        let mut v = Complex64::new(0.0, 0.0);
        for i in 0..self.arcs.len() {
            v += corners[self.arcs.labels()[i]] * self.arcs.measure(i, zeta)?;
        }
        Ok(v)
    }

    /// Wirtinger derivatives (U_z, U_z̄).
    pub fn u_wirtinger(&self, zeta: Complex64) -> (Complex64, Complex64) {
        let corners = self.polygon.corners();
        let mut uz = Complex64::new(0.0, 0.0);
        let mut uzb = Complex64::new(0.0, 0.0);
        for i in 0..self.arcs.len() {
            let (a, b) = self.arcs.arc(i);
            let d = crate::geom::harmonic_measure_dz(zeta, a, b);
            let p = corners[self.arcs.labels()[i]];
            uz += p * d;
            uzb += p * d.conj();
        }
        (uz, uzb)
    }

    /// ∇σ at the point U(ζ): the logarithmic sum of Cor 3.4.
    pub fn grad_sigma_at_zeta(&self, zeta: Complex64) -> Result<Complex64> {
        if zeta.norm() >= 1.0 {
            return Err(Error::Domain("gradient representation requires |ζ| < 1".into()));
        }
        let mut v = self.c0;
        for (k, eta) in self.arcs.endpoints().iter().enumerate() {
            let r = (zeta - eta).norm();
            if r < 1e-13 {
                return Err(Error::Singularity(format!(
                    "ζ coincides with arc endpoint η_{k}"
                )));
            }
            v += self.grad_coeffs[k] * (1.0 / r).ln() / PI;
        }
        Ok(v)
    }

    /// Invert the harmonic map: find ζ with U(ζ) = p, by damped Newton with a
    /// coarse polar-grid fallback seed.
    pub fn invert_u(&self, p: Complex64, seed: Option<Complex64>) -> Result<Complex64> {
        let mut zeta = match seed {
            Some(s) if s.norm() < 1.0 => s,
            _ => {
                let mut best = Complex64::new(0.0, 0.0);
                let mut best_d = f64::INFINITY;
                for ir in 0..8 {
                    let r = 0.96 * (ir as f64 + 0.5) / 8.0;
                    for ia in 0..24 {
                        let z = Complex64::from_polar(r, TAU * ia as f64 / 24.0);
                        if let Ok(u) = self.u(z) {
                            let d = (u - p).norm();
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
        let mut res = (self.u(zeta)? - p).norm();
        for iter in 0..100 {
            if res < 1e-13 {
                return Ok(zeta);
            }
            let (uz, uzb) = self.u_wirtinger(zeta);
            let jac = uz.norm_sqr() - uzb.norm_sqr();
            if jac.abs() < 1e-300 {
                return Err(Error::NonConvergence {
                    iters: iter,
                    residual: res,
                });
            }
            let r = p - self.u(zeta)?;
            let mut step = (uz.conj() * r - uzb * r.conj()) / jac;
            // damping: halve until the residual decreases, keep inside the disc
            let mut accepted = false;
            for _ in 0..60 {
                let mut cand = zeta + step;
                if cand.norm() >= 1.0 - 1e-12 {
                    cand = cand / cand.norm() * (0.5 * (1.0 + zeta.norm()));
                }
                let new_res = (self.u(cand)? - p).norm();
                if new_res < res {
                    zeta = cand;
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
            Ok(zeta)
        } else {
            Err(Error::NonConvergence {
                iters: 100,
                residual: res,
            })
        }
    }

    /// σ(p) − σ_ref by integrating ⟨∇σ∘U, dU⟩ along the straight ζ-segment
    /// from U⁻¹(ref point) to U⁻¹(p); the integrand is closed-form, only the
    /// two segment endpoints need Newton inversions.
    fn sigma_increment(&self, zeta0: Complex64, zeta1: Complex64) -> f64 {
        let nodes = gauss_legendre(12);
        let dz = zeta1 - zeta0;
        let integrand = |t: f64| {
            let z = zeta0 + t * dz;
            let g = self
                .grad_sigma_at_zeta(z)
                .unwrap_or(Complex64::new(0.0, 0.0));
            let (uz, uzb) = self.u_wirtinger(z);
            let du = uz * dz + uzb * dz.conj();
            dot(g, du)
        };
        // dyadically graded toward t = 1 where p may sit close to ∂N
        let mut total = 0.0;
        let mut a = 0.0;
        for j in 0..7 {
            let b = if j == 6 { 1.0 } else { 1.0 - 0.5f64.powi(j + 1) };
            total += gl_integrate(&integrand, a, b, &nodes);
            a = b;
        }
        total
    }

    /// Anchor value σ(ref point) from a boundary value L given at the
    /// corners: σ(ref) = L(p₀) + ∫ along the ray from the corner p₀.
    pub fn anchor_from_boundary(&self, corner_values: &[f64]) -> Result<f64> {
        let corners = self.polygon.corners();
        if corner_values.len() != corners.len() {
            return Err(Error::ArityMismatch {
                expected: corners.len(),
                got: corner_values.len(),
            });
        }
        let p0 = corners[0];
        let target = self.sigma_ref.0;
        // integrate ⟨∇σ(p0 + t(target−p0)), target−p0⟩ over t ∈ (0, 1];
        // the directional limits of ∇σ at the corner keep the integrand bounded.
        let dir = target - p0;
        let nodes = gauss_legendre(16);
        let mut seed: Option<Complex64> = None;
        let mut total = 0.0;
        // graded from the corner end
        let mut cuts = vec![0.0];
        for j in (0..8).rev() {
            cuts.push(0.5f64.powi(j + 1));
        }
        cuts.push(1.0);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        for w in cuts.windows(2) {
            let integrand = |t: f64| {
                let p = p0 + t * dir;
                let zeta = self
                    .invert_u(p, seed)
                    .unwrap_or_else(|_| Complex64::new(0.0, 0.0));
                let g = self
                    .grad_sigma_at_zeta(zeta)
                    .unwrap_or(Complex64::new(0.0, 0.0));
                dot(g, dir)
            };
            total += gl_integrate(&integrand, w[0], w[1], &nodes);
            let mid = 0.5 * (w[0] + w[1]);
            seed = self.invert_u(p0 + mid * dir, seed).ok();
        }
        Ok(corner_values[0] + total)
    }
}

impl SurfaceTension for HarmonicSurfaceTension {
    fn polygon(&self) -> &GradientPolygon {
        &self.polygon
    }

    fn sigma(&self, p: Complex64) -> Result<f64> {
        if self.polygon.signed_edge_distance(p) < 0.0 {
            return Err(Error::Domain("point outside the gradient polygon".into()));
        }
        let zeta0 = self.invert_u(self.sigma_ref.0, None)?;
        let zeta1 = self.invert_u(p, Some(zeta0))?;
        Ok(self.sigma_ref.1 + self.sigma_increment(zeta0, zeta1))
    }

    fn grad(&self, p: Complex64) -> Result<Complex64> {
        let zeta = self.invert_u(p, None)?;
        self.grad_sigma_at_zeta(zeta)
    }
}

/// Calibration targets for [`calibrate_arcs`].
pub enum CalibrationTarget<'a> {
    /// Equal arcs: exact for triangles (Möbius gauge) and for regular
    /// polygons (symmetry); zero boundary value.
    Symmetric,
    /// User-supplied arcs, zero boundary value unless anchored otherwise.
    Arcs(ArcPartition),
    /// Least-squares fit of the arc endpoints against the tangential
    /// increment relation, for a boundary value L given at the corners.
    BoundaryValues(&'a [f64]),
}

/// Result of a calibration: the model plus the achieved fit residual.
pub struct Calibration {
    pub tension: HarmonicSurfaceTension,
    pub residual: f64,
}

fn assemble(
    polygon: &GradientPolygon,
    angles: &[f64],
    c0: Complex64,
) -> Result<HarmonicSurfaceTension> {
    let m = angles.len();
    let endpoints: Vec<Complex64> = angles.iter().map(|a| Complex64::from_polar(1.0, *a)).collect();
    let arcs = ArcPartition::new(endpoints, (0..m).collect(), m)?;
    let centroid = polygon.centroid();
    HarmonicSurfaceTension::new(polygon.clone(), arcs, c0, (centroid, 0.0))
}

/// Cor 3.6 residuals at the arc endpoints plus the base-point gauge residual.
fn calibration_residuals(
    polygon: &GradientPolygon,
    corner_values: &[f64],
    angles: &[f64],
    c0: Complex64,
) -> Result<Vec<f64>> {
    let st = assemble(polygon, angles, c0)?;
    let corners = polygon.corners();
    let labels = st.arcs().labels().to_vec();
    let m = st.arcs().len();
    let mut res = Vec::with_capacity(m + 2);
    for k in 0..m {
        // endpoint η_k separates arc k (label a, ending) from arc k+1 (label b)
        let a = labels[k];
        let b = labels[(k + 1) % m];
        let eta = st.arcs().endpoints()[k];
        // limit of the gradient sum without its own singular term
        let mut v = st.c0;
        for (j, etaj) in st.arcs().endpoints().iter().enumerate() {
            if j == k {
                continue;
            }
            v += st.grad_coeffs[j] * (1.0 / (eta - etaj).norm()).ln() / PI;
        }
        let u = 0.5 * (corners[b] - corners[a]);
        let dl = 0.5 * (corner_values[b] - corner_values[a]);
        res.push(dot(v, u) - dl);
    }
    let base = st.u(Complex64::new(0.0, 0.0))? - polygon.centroid();
    res.push(base.re);
    res.push(base.im);
    Ok(res)
}

/// Construct a harmonic surface tension for the polygon `n`.
///
/// `Symmetric` ships the exactly-known equal-arc configuration; the
/// boundary-value branch runs a Levenberg–Marquardt fit of the arc angles and
/// c₀ against the tangential-increment relation (one angle pinned as the
/// rotation gauge, the base point pinning the Möbius gauge) and reports the
/// residual.
pub fn calibrate_arcs(n: &GradientPolygon, target: CalibrationTarget) -> Result<Calibration> {
    let k = n.len();
    match target {
        CalibrationTarget::Symmetric => {
            let st = assemble(n, &equal_angles(k), Complex64::new(0.0, 0.0))?;
            Ok(Calibration {
                tension: st,
                residual: 0.0,
            })
        }
        CalibrationTarget::Arcs(arcs) => {
            let st = HarmonicSurfaceTension::new(
                n.clone(),
                arcs,
                Complex64::new(0.0, 0.0),
                (n.centroid(), 0.0),
            )?;
            Ok(Calibration {
                tension: st,
                residual: 0.0,
            })
        }
        CalibrationTarget::BoundaryValues(values) => {
            if values.len() != k {
                return Err(Error::ArityMismatch {
                    expected: k,
                    got: values.len(),
                });
            }
            fit_boundary_values(n, values, &equal_angles(k))
        }
    }
}

fn equal_angles(m: usize) -> Vec<f64> {
    (0..m).map(|j| TAU * (j as f64 + 1.0) / m as f64).collect()
}

/// Levenberg–Marquardt fit starting from `start_angles` (the last angle stays
/// pinned). Unknowns: m−1 angles and the two components of c₀.
pub fn fit_boundary_values(
    n: &GradientPolygon,
    corner_values: &[f64],
    start_angles: &[f64],
) -> Result<Calibration> {
    let m = start_angles.len();
    let dim = m - 1 + 2;
    let pinned = start_angles[m - 1];
    let unpack = |x: &[f64]| {
        let mut angles = x[..m - 1].to_vec();
        angles.push(pinned);
        (angles, Complex64::new(x[m - 1], x[m]))
    };
    let eval = |x: &[f64]| -> Result<Vec<f64>> {
        let (angles, c0) = unpack(x);
        calibration_residuals(n, corner_values, &angles, c0)
    };
    let mut x: Vec<f64> = start_angles[..m - 1].to_vec();
    x.push(0.0);
    x.push(0.0);
    let mut f = eval(&x)?;
    let nres = f.len();
    let mut lambda = 1e-3;
    let cost = |f: &[f64]| f.iter().map(|r| r * r).sum::<f64>();
    let mut c = cost(&f);
    for _ in 0..200 {
        if c.sqrt() < 1e-12 {
            break;
        }
        // forward-difference Jacobian
        let h = 1e-7;
        let mut jac = vec![0.0; nres * dim];
        for j in 0..dim {
            let mut xp = x.clone();
            xp[j] += h;
            if let Ok(fp) = eval(&xp) {
                for i in 0..nres {
                    jac[i * dim + j] = (fp[i] - f[i]) / h;
                }
            }
        }
        // normal equations with LM damping
        let mut improved = false;
        for _ in 0..20 {
            let mut a = vec![0.0; dim * dim];
            let mut b = vec![0.0; dim];
            for i in 0..nres {
                for p in 0..dim {
                    b[p] -= jac[i * dim + p] * f[i];
                    for q in 0..dim {
                        a[p * dim + q] += jac[i * dim + p] * jac[i * dim + q];
                    }
                }
            }
            for p in 0..dim {
                a[p * dim + p] *= 1.0 + lambda;
            }
            let Some(step) = solve_dense(&mut a, &mut b, dim) else {
                lambda *= 10.0;
                continue;
            };
            let xc: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a + s).collect();
            match eval(&xc) {
                Ok(fc) => {
                    let cc = cost(&fc);
                    if cc < c {
                        x = xc;
                        f = fc;
                        c = cc;
                        lambda = (lambda * 0.3).max(1e-12);
                        improved = true;
                        break;
                    }
                    lambda *= 10.0;
                }
                Err(_) => lambda *= 10.0,
            }
        }
        if !improved {
            break;
        }
    }
    let residual = c.sqrt();
    if residual > 1e-4 {
        return Err(Error::CalibrationFailure { residual });
    }
    let (angles, c0) = unpack(&x);
    Ok(Calibration {
        tension: assemble(n, &angles, c0)?,
        residual,
    })
}

/// Bicubic (Catmull–Rom) lookup table of a surface tension over the polygon
/// shrunk by `eps`. Evaluation clamps the gradient into (1−eps)N first, so
/// the table is a total function; used by the minimizer to keep the energy
/// and its gradient mutually consistent at table accuracy.
pub struct TabulatedTension {
    polygon: GradientPolygon,
    eps: f64,
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
    values: Vec<f64>,
}

impl TabulatedTension {
    pub fn build(st: &dyn SurfaceTension, eps: f64, resolution: usize) -> Result<Self> {
        let poly = st.polygon().clone();
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for c in poly.corners() {
            xmin = xmin.min(c.re);
            xmax = xmax.max(c.re);
            ymin = ymin.min(c.im);
            ymax = ymax.max(c.im);
        }
        let nx = resolution;
        let ny = resolution;
        let dx = (xmax - xmin) / (nx as f64 - 3.0);
        let dy = (ymax - ymin) / (ny as f64 - 3.0);
        let x0 = xmin - dx;
        let y0 = ymin - dy;
        let mut values = vec![0.0; nx * ny];
        // row-major sweep, warm-started through the row
        for j in 0..ny {
            for i in 0..nx {
                let p = Complex64::new(x0 + i as f64 * dx, y0 + j as f64 * dy);
                let q = poly.project(p, eps);
                values[j * nx + i] = st.sigma(q)?;
            }
        }
        Ok(TabulatedTension {
            polygon: poly,
            eps,
            x0,
            y0,
            dx,
            dy,
            nx,
            ny,
            values,
        })
    }

    fn grid_value(&self, i: isize, j: isize) -> f64 {
        let i = i.clamp(0, self.nx as isize - 1) as usize;
        let j = j.clamp(0, self.ny as isize - 1) as usize;
        self.values[j * self.nx + i]
    }

    /// Catmull–Rom weights and their derivatives for local coordinate t.
    fn kernel(t: f64) -> ([f64; 4], [f64; 4]) {
        let t2 = t * t;
        let t3 = t2 * t;
        let w = [
            0.5 * (-t3 + 2.0 * t2 - t),
            0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
            0.5 * (-3.0 * t3 + 4.0 * t2 + t),
            0.5 * (t3 - t2),
        ];
        let dw = [
            0.5 * (-3.0 * t2 + 4.0 * t - 1.0),
            0.5 * (9.0 * t2 - 10.0 * t),
            0.5 * (-9.0 * t2 + 8.0 * t + 1.0),
            0.5 * (3.0 * t2 - 2.0 * t),
        ];
        (w, dw)
    }

    /// Value and gradient of the interpolant at the clamped point.
    pub fn eval(&self, p: Complex64) -> (f64, Complex64) {
        let q = self.polygon.project(p, self.eps);
        let gx = (q.re - self.x0) / self.dx;
        let gy = (q.im - self.y0) / self.dy;
        let i0 = gx.floor() as isize;
        let j0 = gy.floor() as isize;
        let tx = gx - i0 as f64;
        let ty = gy - j0 as f64;
        let (wx, dwx) = Self::kernel(tx);
        let (wy, dwy) = Self::kernel(ty);
        let mut v = 0.0;
        let mut vx = 0.0;
        let mut vy = 0.0;
        for b in 0..4 {
            let j = j0 - 1 + b as isize;
            let mut row = 0.0;
            let mut drow = 0.0;
            for a in 0..4 {
                let g = self.grid_value(i0 - 1 + a as isize, j);
                row += wx[a] * g;
                drow += dwx[a] * g;
            }
            v += wy[b] * row;
            vx += wy[b] * drow;
            vy += dwy[b] * row;
        }
        (v, Complex64::new(vx / self.dx, vy / self.dy))
    }
}

impl SurfaceTension for TabulatedTension {
    fn polygon(&self) -> &GradientPolygon {
        &self.polygon
    }
    fn sigma(&self, p: Complex64) -> Result<f64> {
        Ok(self.eval(p).0)
    }
    fn grad(&self, p: Complex64) -> Result<Complex64> {
        Ok(self.eval(p).1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lobachevsky_values() {
        assert_eq!(lobachevsky(0.0), 0.0);
        assert!(lobachevsky(PI).abs() < 1e-9);
        // value frozen from a 30-digit quadrature oracle; this is also
        // the per-term value at the −σ_Lo maximizer (the centroid)
        assert!((lobachevsky(PI / 3.0) - 0.338313868803218).abs() < 1e-9);
    }

    #[test]
    fn lobachevsky_is_odd_and_periodic() {
        for &t in &[0.3, 1.1, 2.0, 2.9] {
            assert!((lobachevsky(-t) + lobachevsky(t)).abs() < 1e-11);
            assert!((lobachevsky(t + PI) - lobachevsky(t)).abs() < 1e-11);
        }
    }

    #[test]
    fn lobachevsky_duplication_identity() {
        // 𝓛(2θ) = 2𝓛(θ) + 2𝓛(θ + π/2)
        for &t in &[0.2, 0.7, 1.3] {
            let lhs = lobachevsky(2.0 * t);
            let rhs = 2.0 * (lobachevsky(t) + lobachevsky(t + PI / 2.0));
            assert!((lhs - rhs).abs() < 1e-10, "θ={t}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn lozenge_sigma_values() {
        let v = lozenge_sigma(1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!((v - (-3.0 / (PI * PI) * 0.338313868803218)).abs() < 1e-10);
        // symmetry s <-> t
        let a = lozenge_sigma(0.21, 0.47).unwrap();
        let b = lozenge_sigma(0.47, 0.21).unwrap();
        assert!((a - b).abs() < 1e-14);
        // corner limit
        let v = lozenge_sigma(1e-4, 1e-4).unwrap();
        assert!(v.abs() < 1e-6);
        assert!(lozenge_sigma(0.8, 0.5).is_err());
    }

    #[test]
    fn lozenge_grad_values() {
        let g = lozenge_grad_sigma(1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!(g.norm() < 1e-14);
        let g = lozenge_grad_sigma(0.5, 0.25).unwrap();
        assert!((g - c(2.0f64.ln() / (2.0 * PI), 0.0)).norm() < 1e-14);
        assert!(lozenge_grad_sigma(0.5, 0.5).is_err());
    }

    #[test]
    fn lozenge_grad_matches_finite_differences() {
        let h = 1e-6;
        let (s, t) = (0.4, 0.3);
        let g = lozenge_grad_sigma(s, t).unwrap();
        let ds = (lozenge_sigma(s + h, t).unwrap() - lozenge_sigma(s - h, t).unwrap()) / (2.0 * h);
        let dt = (lozenge_sigma(s, t + h).unwrap() - lozenge_sigma(s, t - h).unwrap()) / (2.0 * h);
        assert!((g - c(ds, dt)).norm() < 1e-6);
    }

    #[test]
    fn lozenge_hessian_determinant_is_one() {
        let h = 1e-4;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let s = 0.1 + 0.55 * rng.gen::<f64>();
            let t = 0.1 + (0.8 - s).min(0.55) * rng.gen::<f64>();
            if s + t > 0.9 {
                continue;
            }
            let gpp = lozenge_grad_sigma(s + h, t).unwrap();
            let gpm = lozenge_grad_sigma(s - h, t).unwrap();
            let gtp = lozenge_grad_sigma(s, t + h).unwrap();
            let gtm = lozenge_grad_sigma(s, t - h).unwrap();
            let sxx = (gpp.re - gpm.re) / (2.0 * h);
            let sxy = (gtp.re - gtm.re) / (2.0 * h);
            let syx = (gpp.im - gpm.im) / (2.0 * h);
            let syy = (gtp.im - gtm.im) / (2.0 * h);
            let det = sxx * syy - sxy * syx;
            assert!((det - 1.0).abs() < 0.02, "det {det} at ({s},{t})");
            // positive definiteness
            assert!(sxx > 0.0 && det > 0.0);
        }
    }

    #[test]
    fn gradient_map_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let p = c(0.05 + 0.6 * rng.gen::<f64>(), 0.05 + 0.6 * rng.gen::<f64>());
            let q = c(0.05 + 0.6 * rng.gen::<f64>(), 0.05 + 0.6 * rng.gen::<f64>());
            if p.re + p.im > 0.95 || q.re + q.im > 0.95 || (p - q).norm() < 1e-9 {
                continue;
            }
            let gp = lozenge_grad_sigma(p.re, p.im).unwrap();
            let gq = lozenge_grad_sigma(q.re, q.im).unwrap();
            assert!(dot(gp - gq, p - q) > 0.0);
        }
    }

    #[test]
    fn gradient_blows_up_logarithmically_at_edge() {
        // inward normal at the hypotenuse midpoint of N_Lo
        let mid = c(0.5, 0.5);
        let normal = c(-1.0, -1.0) / 2.0f64.sqrt();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut d = 1e-5;
        while d <= 1e-2 {
            let p = mid + d * normal;
            let g = lozenge_grad_sigma(p.re, p.im).unwrap();
            xs.push((1.0 / d).ln().ln());
            ys.push(g.norm().ln());
            d *= 2.0;
        }
        // |∇σ| ≈ C·log(1/d): slope of log|∇σ| against log log(1/d) ≈ 1
        let slope = crate::quad::ls_slope(&xs, &ys);
        assert!((slope - 1.0).abs() < 0.15, "slope {slope}");
    }

    #[test]
    fn harmonic_u_examples() {
        let tri = GradientPolygon::lozenge_triangle();
        let cal = calibrate_arcs(&tri, CalibrationTarget::Symmetric).unwrap();
        let u0 = cal.tension.u(c(0.0, 0.0)).unwrap();
        assert!((u0 - c(1.0 / 3.0, 1.0 / 3.0)).norm() < 1e-12);

        // arcs of lengths (π, π/2, π/2) -> weights (1/2, 1/4, 1/4) at the center
        let endpoints = vec![
            Complex64::from_polar(1.0, PI),
            Complex64::from_polar(1.0, 1.5 * PI),
            Complex64::from_polar(1.0, TAU),
        ];
        let arcs = ArcPartition::new(endpoints, vec![0, 1, 2], 3).unwrap();
        let st =
            HarmonicSurfaceTension::new(tri.clone(), arcs, c(0.0, 0.0), (tri.centroid(), 0.0))
                .unwrap();
        let u0 = st.u(c(0.0, 0.0)).unwrap();
        assert!((u0 - c(0.25, 0.25)).norm() < 1e-12);
    }

    #[test]
    fn harmonic_u_stays_inside_polygon() {
        let tri = GradientPolygon::lozenge_triangle();
        let cal = calibrate_arcs(&tri, CalibrationTarget::Symmetric).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let z = Complex64::from_polar(0.999 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let u = cal.tension.u(z).unwrap();
            assert!(tri.signed_edge_distance(u) > -1e-12);
        }
    }

    #[test]
    fn harmonic_u_injective_on_grid() {
        let sq = GradientPolygon::domino_square();
        let cal = calibrate_arcs(&sq, CalibrationTarget::Symmetric).unwrap();
        let mut pts = Vec::new();
        let n = 24;
        for i in 0..n {
            for j in 0..n {
                let z = c(
                    -0.92 + 1.84 * i as f64 / (n - 1) as f64,
                    -0.92 + 1.84 * j as f64 / (n - 1) as f64,
                );
                if z.norm() < 0.95 {
                    pts.push((z, cal.tension.u(z).unwrap()));
                }
            }
        }
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                if (pts[a].0 - pts[b].0).norm() > 1e-6 {
                    assert!((pts[a].1 - pts[b].1).norm() > 1e-9);
                }
            }
        }
    }

    #[test]
    fn harmonic_grad_symmetric_center_is_zero() {
        let tri = GradientPolygon::lozenge_triangle();
        let cal = calibrate_arcs(&tri, CalibrationTarget::Symmetric).unwrap();
        let g = cal.tension.grad_sigma_at_zeta(c(0.0, 0.0)).unwrap();
        assert!(g.norm() < 1e-13);
    }

    #[test]
    fn harmonic_grad_matches_lozenge_closed_form() {
        // the lozenge closed form is the oracle for the whole harmonic route
        let tri = GradientPolygon::lozenge_triangle();
        let cal = calibrate_arcs(&tri, CalibrationTarget::Symmetric).unwrap();
        let st = &cal.tension;
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let z = Complex64::from_polar(0.9 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let u = st.u(z).unwrap();
            let g_harm = st.grad_sigma_at_zeta(z).unwrap();
            let g_loz = lozenge_grad_sigma(u.re, u.im).unwrap();
            assert!(
                (g_harm - g_loz).norm() < 1e-6,
                "mismatch {} at ζ={z}",
                (g_harm - g_loz).norm()
            );
        }
    }

    #[test]
    fn lewy_pair_satisfies_cauchy_riemann() {
        // ψ = U + ∇σ∘U is analytic: discrete CR residual O(h²)
        let tri = GradientPolygon::lozenge_triangle();
        let cal = calibrate_arcs(&tri, CalibrationTarget::Symmetric).unwrap();
        let st = &cal.tension;
        let f = |z: Complex64| st.u(z).unwrap() + st.grad_sigma_at_zeta(z).unwrap();
        for &(x, y) in &[(0.2, 0.1), (-0.3, 0.4), (0.0, -0.5)] {
            let z = c(x, y);
            let (_, fzb) = crate::quad::wirtinger_fd(&f, z, 1e-5);
            assert!(fzb.norm() < 1e-8, "CR residual {} at {z}", fzb.norm());
        }
    }

    #[test]
    fn harmonic_sigma_matches_lozenge_values() {
        let tri = GradientPolygon::lozenge_triangle();
        let cal = calibrate_arcs(&tri, CalibrationTarget::Symmetric).unwrap();
        let mut st = cal.tension;
        // anchor σ(centroid) from the zero boundary value
        let anchor = st.anchor_from_boundary(&[0.0, 0.0, 0.0]).unwrap();
        let closed = lozenge_sigma(1.0 / 3.0, 1.0 / 3.0).unwrap();
        assert!(
            (anchor - closed).abs() < 1e-6,
            "anchor {anchor} vs closed form {closed}"
        );
        st.sigma_ref = (tri.centroid(), anchor);
        for &(s, t) in &[(0.3, 0.45), (0.15, 0.2), (0.55, 0.3)] {
            let v = st.sigma(c(s, t)).unwrap();
            let w = lozenge_sigma(s, t).unwrap();
            assert!((v - w).abs() < 1e-6, "σ({s},{t}) = {v} vs {w}");
        }
    }

    #[test]
    fn calibrate_square_symmetric() {
        let sq = GradientPolygon::domino_square();
        let cal = calibrate_arcs(&sq, CalibrationTarget::Symmetric).unwrap();
        let arcs = cal.tension.arcs();
        for i in 0..4 {
            let (a, b) = arcs.arc(i);
            let gap = (b.arg() - a.arg()).rem_euclid(TAU);
            assert!((gap - PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn calibration_recovers_equal_arcs_from_perturbation() {
        let tri = GradientPolygon::lozenge_triangle();
        let start = [
            TAU / 3.0 + 0.22,
            2.0 * TAU / 3.0 - 0.17,
            TAU, // pinned
        ];
        let cal = fit_boundary_values(&tri, &[0.0, 0.0, 0.0], &start).unwrap();
        assert!(cal.residual < 1e-8, "residual {}", cal.residual);
        let endpoints = cal.tension.arcs().endpoints();
        for (k, eta) in endpoints.iter().enumerate() {
            let target = TAU * (k as f64 + 1.0) / 3.0;
            let diff = (eta.arg() - target).rem_euclid(TAU).min(
                (target - eta.arg()).rem_euclid(TAU),
            );
            assert!(diff < 1e-4, "endpoint {k} off by {diff}");
        }
    }

    #[test]
    fn tabulated_tension_tracks_lozenge() {
        let lo = LozengeSurfaceTension::new();
        let tab = TabulatedTension::build(&lo, 1e-3, 128).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let s = 0.08 + 0.6 * rng.gen::<f64>();
            let t = 0.08 + 0.6 * rng.gen::<f64>();
            if s + t > 0.9 {
                continue;
            }
            let (v, g) = tab.eval(c(s, t));
            assert!((v - lozenge_sigma(s, t).unwrap()).abs() < 1e-5);
            assert!((g - lozenge_grad_sigma(s, t).unwrap()).norm() < 1e-3);
        }
    }

    #[test]
    fn structure_coefficient_degrees() {
        assert_eq!(StructureCoefficient::lozenge().degree(), 1);
        assert_eq!(StructureCoefficient::domino().degree(), 2);
        let custom = StructureCoefficient::custom(MuMap::Power(3), 4, 1);
        assert_eq!(custom.degree(), 4);
        // |μ| < 1 inside the disc
        let mu = StructureCoefficient::domino();
        assert!(mu.mu(c(0.7, 0.1)).unwrap().norm() < 1.0);
        assert!((mu.mu(c(0.5, 0.0)).unwrap() - c(0.25, 0.0)).norm() < 1e-15);
    }
}
