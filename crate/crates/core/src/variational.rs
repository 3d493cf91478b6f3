//! Discrete minimization of the dimer energy ∫ σ(∇h) over
//! gradient-constrained piecewise-affine fields on polygonal domains, with
//! McShane obstacles, natural boundary values, and liquid-region extraction.

use crate::error::{Error, Result};
use crate::geom::{dot, point_in_simple_polygon, polygon_area, GradientPolygon};
use crate::height::{HeightField, Mask};
use crate::tension::SurfaceTension;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::{HashSet, VecDeque};
use std::sync::Arc;

/// How the boundary value is carried along each side.
#[derive(Debug, Clone)]
enum SideData {
    /// Affine with the gradient of the labeled corner of N.
    Corner(usize),
    /// Linear interpolation of the endpoint values along the side.
    Interpolated,
}

/// Polygonal domain (possibly non-convex) with continuous piecewise-affine
/// boundary data whose per-side gradients are corners of N.
#[derive(Debug, Clone)]
pub struct PolygonalDomain {
    n: GradientPolygon,
    vertices: Vec<Complex64>,
    sides: Vec<SideData>,
    h0_at_vertices: Vec<f64>,
}

impl PolygonalDomain {
    /// Build from per-side corner labels; verifies the telescoping loop
    /// closure of the boundary increments.
    pub fn from_side_data(
        n: &GradientPolygon,
        vertices: Vec<Complex64>,
        side_labels: Vec<usize>,
    ) -> Result<Self> {
        let d = vertices.len();
        if d < 3 || side_labels.len() != d {
            return Err(Error::Validation(format!(
                "{d} vertices with {} side labels",
                side_labels.len()
            )));
        }
        if polygon_area(&vertices) <= 0.0 {
            return Err(Error::Validation(
                "vertices must be counterclockwise with positive area".into(),
            ));
        }
        for &l in &side_labels {
            if l >= n.len() {
                return Err(Error::Validation(format!("corner label {l} out of range")));
            }
        }
        let corners = n.corners();
        let mut h0 = vec![0.0; d];
        let mut acc = 0.0;
        for j in 0..d {
            let inc = dot(corners[side_labels[j]], vertices[(j + 1) % d] - vertices[j]);
            acc += inc;
            if j + 1 < d {
                h0[j + 1] = acc;
            }
        }
        if acc.abs() > 1e-9 {
            return Err(Error::LoopClosure { gap: acc });
        }
        Ok(PolygonalDomain {
            n: n.clone(),
            vertices,
            sides: side_labels.into_iter().map(SideData::Corner).collect(),
            h0_at_vertices: h0,
        })
    }

    /// Build from explicit vertex values, interpolated linearly along each
    /// side (used when the data is the restriction of a McShane extension
    /// whose creases run along the cut sides).
    pub fn from_vertex_values(
        n: &GradientPolygon,
        vertices: Vec<Complex64>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let d = vertices.len();
        if d < 3 || values.len() != d {
            return Err(Error::Validation(format!(
                "{d} vertices with {} values",
                values.len()
            )));
        }
        if polygon_area(&vertices) <= 0.0 {
            return Err(Error::Validation(
                "vertices must be counterclockwise with positive area".into(),
            ));
        }
        Ok(PolygonalDomain {
            n: n.clone(),
            vertices,
            sides: vec![SideData::Interpolated; d],
            h0_at_vertices: values,
        })
    }

    pub fn gradient_polygon(&self) -> &GradientPolygon {
        &self.n
    }

    pub fn vertices(&self) -> &[Complex64] {
        &self.vertices
    }

    pub fn h0_at_vertices(&self) -> &[f64] {
        &self.h0_at_vertices
    }

    /// Boundary value at the point of side `j` with parameter t in [0,1].
    pub fn h0_on_side(&self, j: usize, t: f64) -> f64 {
        let d = self.vertices.len();
        let a = self.vertices[j];
        let b = self.vertices[(j + 1) % d];
        match self.sides[j] {
            SideData::Corner(l) => {
                self.h0_at_vertices[j] + dot(self.n.corners()[l], (b - a) * t)
            }
            SideData::Interpolated => {
                (1.0 - t) * self.h0_at_vertices[j] + t * self.h0_at_vertices[(j + 1) % d]
            }
        }
    }

    pub fn contains(&self, p: Complex64) -> bool {
        point_in_simple_polygon(&self.vertices, p)
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    /// Dense boundary sample (vertices plus ≤ max_gap spaced points) with
    /// boundary values.
    pub fn boundary_samples(&self, max_gap: f64) -> Vec<(Complex64, f64)> {
        let d = self.vertices.len();
        let mut out = Vec::new();
        for j in 0..d {
            let a = self.vertices[j];
            let b = self.vertices[(j + 1) % d];
            let len = (b - a).norm();
            let steps = (len / max_gap).ceil().max(1.0) as usize;
            for s in 0..steps {
                let t = s as f64 / steps as f64;
                out.push((a + t * (b - a), self.h0_on_side(j, t)));
            }
        }
        out
    }

    /// Exact per-node extremizer candidates of the McShane formulas: the
    /// polygon vertices plus the intersections of each side with the
    /// support-function cone rays through `z` (the tangency points).
    fn exact_candidates(&self, z: Complex64) -> Vec<(Complex64, f64)> {
        let d = self.vertices.len();
        let corners = self.n.corners();
        let k = corners.len();
        let mut out = Vec::new();
        for j in 0..d {
            let a = self.vertices[j];
            let b = self.vertices[(j + 1) % d];
            out.push((a, self.h0_on_side(j, 0.0)));
            let e = b - a;
            for i in 0..k {
                // cone ray direction of h_N between corners i and i+1 is the
                // direction v with <p_{i+1} - p_i, v> = 0
                let diff = corners[(i + 1) % k] - corners[i];
                // solve (z - (a + te)) parallel to ray: <diff, z - a - t e> = 0
                let denom = dot(diff, e);
                if denom.abs() < 1e-14 {
                    continue;
                }
                let t = dot(diff, z - a) / denom;
                if (0.0..=1.0).contains(&t) {
                    out.push((a + t * e, self.h0_on_side(j, t)));
                }
            }
        }
        out
    }
}

/// Strict Def-2.6/2.7 natural boundary construction from per-vertex corner
/// labels: each vertex must satisfy one of the two orthogonality systems and
/// consecutive labels must stay consistent along the shared side.
pub fn build_natural_boundary(
    n: &GradientPolygon,
    vertices: Vec<Complex64>,
    corner_labels: Vec<usize>,
) -> Result<PolygonalDomain> {
    let d = vertices.len();
    if corner_labels.len() != d {
        return Err(Error::Validation(format!(
            "{d} vertices with {} labels",
            corner_labels.len()
        )));
    }
    let corners = n.corners();
    let k = corners.len();
    let scale = vertices.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let tol = 1e-9 * (1.0 + scale);
    for j in 0..d {
        let nj = corner_labels[j];
        if nj >= k {
            return Err(Error::Validation(format!("corner label {nj} out of range")));
        }
        let incoming = vertices[j] - vertices[(j + d - 1) % d];
        let outgoing = vertices[(j + 1) % d] - vertices[j];
        let before = corners[nj] - corners[(nj + k - 1) % k];
        let after = corners[(nj + 1) % k] - corners[nj];
        let nd1 = dot(incoming, before).abs() < tol && dot(outgoing, after).abs() < tol;
        let nd3 = dot(incoming, after).abs() < tol && dot(outgoing, before).abs() < tol;
        if !nd1 && !nd3 {
            return Err(Error::OrthogonalityViolation {
                vertex: j,
                detail: format!(
                    "corner {nj} satisfies neither orthogonality system at vertex {}",
                    vertices[j]
                ),
            });
        }
    }
    // both endpoint formulas must describe the same affine function per side
    for j in 0..d {
        let side = vertices[(j + 1) % d] - vertices[j];
        let diff = corners[corner_labels[(j + 1) % d]] - corners[corner_labels[j]];
        if dot(diff, side).abs() > tol {
            return Err(Error::OrthogonalityViolation {
                vertex: j,
                detail: "labels of the side endpoints disagree along the side".into(),
            });
        }
    }
    PolygonalDomain::from_side_data(n, vertices, corner_labels)
}

/// The hexagonal natural domain of the lozenge model (side lengths a, b, c).
pub fn lozenge_hexagon(a: f64, b: f64, c: f64) -> Result<PolygonalDomain> {
    let n = GradientPolygon::lozenge_triangle();
    let v0 = Complex64::new(0.0, 0.0);
    let v1 = v0 + Complex64::new(a, 0.0);
    let v2 = v1 + Complex64::new(b, b);
    let v3 = v2 + Complex64::new(0.0, c);
    let v4 = v3 + Complex64::new(-a, 0.0);
    let v5 = v4 + Complex64::new(-b, -b);
    build_natural_boundary(&n, vec![v0, v1, v2, v3, v4, v5], vec![0, 2, 1, 0, 2, 1])
}

/// The Aztec diamond |x|+|y| ≤ 1 with the Cohn–Elkies–Propp boundary data:
/// gradient p_k on the two half-sides adjacent to pole k, with kinks at the
/// side midpoints. (The four-vertex diamond admits no strict natural value:
/// the telescoping sum is ±4.)
pub fn aztec_diamond_domain() -> Result<PolygonalDomain> {
    let n = GradientPolygon::domino_square();
    let vertices = vec![
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, 0.5),
        Complex64::new(0.0, 1.0),
        Complex64::new(-0.5, 0.5),
        Complex64::new(-1.0, 0.0),
        Complex64::new(-0.5, -0.5),
        Complex64::new(0.0, -1.0),
        Complex64::new(0.5, -0.5),
    ];
    // east (1,0), north (0,-1), west (-1,0), south (0,1) in the curl-free
    // height convention
    PolygonalDomain::from_side_data(&n, vertices, vec![0, 3, 3, 2, 2, 1, 1, 0])
}

/// Discretized energy-minimization problem.
pub struct DiscreteEnergyProblem {
    pub domain: PolygonalDomain,
    pub tension: Arc<dyn SurfaceTension>,
    pub spacing: f64,
    /// Interior safety margin ε: σ is evaluated on (1−ε)N only.
    pub shrink: f64,
}

/// Shared discretization: grid geometry, obstacles, active cells/triangles.
pub struct Assembly {
    pub origin: Complex64,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
    pub inside: Vec<bool>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Triangles as (node ids, shape gradient per node).
    pub triangles: Vec<[usize; 3]>,
    pub tri_shapes: Vec<[Complex64; 3]>,
    pub node_triangles: Vec<Vec<usize>>,
}

impl Assembly {
    pub fn point(&self, id: usize) -> Complex64 {
        let (i, j) = (id % self.nx, id / self.nx);
        self.origin + Complex64::new(i as f64 * self.spacing, j as f64 * self.spacing)
    }

    pub fn gradient_of(&self, t: usize, h: &[f64]) -> Complex64 {
        let ids = self.triangles[t];
        let sh = self.tri_shapes[t];
        h[ids[0]] * sh[0] + h[ids[1]] * sh[1] + h[ids[2]] * sh[2]
    }
}

/// Build the grid, the obstacles and the triangulation for a problem.
pub fn assemble(problem: &DiscreteEnergyProblem) -> Result<Assembly> {
    let dom = &problem.domain;
    let spacing = problem.spacing;
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in dom.vertices() {
        xmin = xmin.min(v.re);
        xmax = xmax.max(v.re);
        ymin = ymin.min(v.im);
        ymax = ymax.max(v.im);
    }
    let origin = Complex64::new(xmin, ymin);
    let nx = ((xmax - xmin) / spacing).round() as usize + 1;
    let ny = ((ymax - ymin) / spacing).round() as usize + 1;
    let npts = nx * ny;
    let boundary_tol = 1e-9 * (1.0 + xmax.abs().max(ymax.abs()));
    let inside: Vec<bool> = (0..npts)
        .into_par_iter()
        .map(|id| {
            let p = origin
                + Complex64::new((id % nx) as f64 * spacing, (id / nx) as f64 * spacing);
            if point_in_simple_polygon(dom.vertices(), p) {
                return true;
            }
            // keep nodes on (or numerically at) the boundary
            let d = dom.vertices();
            (0..d.len()).any(|j| {
                crate::geom::dist_to_segment(p, d[j], d[(j + 1) % d.len()]) < boundary_tol
                    + 0.25 * spacing
            })
        })
        .collect();

    // obstacles from the dense sample plus the exact per-node candidates
    let samples = dom.boundary_samples(0.5 * spacing);
    let n_poly = dom.gradient_polygon().clone();
    let pairs: Vec<(f64, f64)> = (0..npts)
        .into_par_iter()
        .map(|id| {
            if !inside[id] {
                return (0.0, 0.0);
            }
            let z = origin
                + Complex64::new((id % nx) as f64 * spacing, (id / nx) as f64 * spacing);
            let mut lo = f64::NEG_INFINITY;
            let mut hi = f64::INFINITY;
            for (w, v) in samples.iter() {
                lo = lo.max(v - n_poly.support(*w - z));
                hi = hi.min(v + n_poly.support(z - *w));
            }
            for (w, v) in dom.exact_candidates(z) {
                lo = lo.max(v - n_poly.support(w - z));
                hi = hi.min(v + n_poly.support(z - w));
            }
            (lo, hi)
        })
        .collect();
    let lower: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let upper: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut worst = 0.0f64;
    for id in 0..npts {
        if inside[id] {
            worst = worst.max(lower[id] - upper[id]);
        }
    }
    if worst > 1e-9 {
        return Err(Error::InfeasibleObstacles { excess: worst });
    }

    // active cells: all four corners inside
    let mut triangles = Vec::new();
    let mut tri_shapes = Vec::new();
    let inv = 1.0 / spacing;
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let n00 = j * nx + i;
            let n10 = j * nx + i + 1;
            let n01 = (j + 1) * nx + i;
            let n11 = (j + 1) * nx + i + 1;
            if !(inside[n00] && inside[n10] && inside[n01] && inside[n11]) {
                continue;
            }
            triangles.push([n00, n10, n01]);
            tri_shapes.push([
                Complex64::new(-inv, -inv),
                Complex64::new(inv, 0.0),
                Complex64::new(0.0, inv),
            ]);
            triangles.push([n11, n01, n10]);
            tri_shapes.push([
                Complex64::new(inv, inv),
                Complex64::new(-inv, 0.0),
                Complex64::new(0.0, -inv),
            ]);
        }
    }
    let mut node_triangles = vec![Vec::new(); npts];
    for (t, ids) in triangles.iter().enumerate() {
        for &id in ids {
            node_triangles[id].push(t);
        }
    }
    Ok(Assembly {
        origin,
        spacing,
        nx,
        ny,
        inside,
        lower,
        upper,
        triangles,
        tri_shapes,
        node_triangles,
    })
}

/// The McShane obstacles (m, M) of the boundary value, as height fields.
pub fn mcshane_obstacles(problem: &DiscreteEnergyProblem) -> Result<(HeightField, HeightField)> {
    let asm = assemble(problem)?;
    let make = |values: &[f64]| HeightField {
        origin: asm.origin,
        spacing: asm.spacing,
        nx: asm.nx,
        ny: asm.ny,
        mask: asm
            .inside
            .iter()
            .map(|&b| if b { Mask::Liquid } else { Mask::Outside })
            .collect(),
        h: values.to_vec(),
        grad: vec![Complex64::new(0.0, 0.0); asm.nx * asm.ny],
        max_plaquette_curl: 0.0,
    };
    Ok((make(&asm.lower), make(&asm.upper)))
}

/// Options for [`minimize`].
#[derive(Debug, Clone)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub seed_field: Option<Vec<f64>>,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iters: 2000,
            tol: 1e-10,
            seed_field: None,
        }
    }
}

/// Result of a minimization run.
pub struct MinimizeResult {
    pub field: HeightField,
    pub energy_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

struct Feasibility<'a> {
    asm: &'a Assembly,
    polygon: &'a GradientPolygon,
    shrink: f64,
}

impl Feasibility<'_> {
    /// Cyclic projection: per-triangle least-norm nodal correction toward
    /// (1−ε)N, then the obstacle box; the box is applied last and wins where
    /// the two conflict (frozen cells pinned by m = M keep corner gradients).
    fn project(&self, h: &mut [f64]) {
        let asm = self.asm;
        for _ in 0..200 {
            let mut worst = 0.0f64;
            for t in 0..asm.triangles.len() {
                let ids = asm.triangles[t];
                // fully pinned triangles cannot move
                if ids
                    .iter()
                    .all(|&id| asm.upper[id] - asm.lower[id] < 1e-12)
                {
                    continue;
                }
                let g = asm.gradient_of(t, h);
                let q = self.polygon.project(g, self.shrink);
                let dgrad = q - g;
                if dgrad.norm() < 1e-13 {
                    continue;
                }
                worst = worst.max(dgrad.norm());
                // least-norm nodal correction: δ = Gᵀ (G Gᵀ)⁻¹ Δ
                let sh = asm.tri_shapes[t];
                let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
                for s in sh {
                    a11 += s.re * s.re;
                    a12 += s.re * s.im;
                    a22 += s.im * s.im;
                }
                let det = a11 * a22 - a12 * a12;
                let bx = (a22 * dgrad.re - a12 * dgrad.im) / det;
                let by = (-a12 * dgrad.re + a11 * dgrad.im) / det;
                for (k, &id) in ids.iter().enumerate() {
                    h[id] += sh[k].re * bx + sh[k].im * by;
                }
            }
            for id in 0..h.len() {
                if asm.inside[id] {
                    // lower can exceed upper by rounding where m = M
                    let lo = asm.lower[id].min(asm.upper[id]);
                    h[id] = h[id].clamp(lo, asm.upper[id]);
                }
            }
            if worst < 1e-12 {
                break;
            }
        }
    }
}

fn energy(asm: &Assembly, st: &dyn SurfaceTension, shrink: f64, h: &[f64]) -> f64 {
    let area = 0.5 * asm.spacing * asm.spacing;
    let terms: Vec<f64> = (0..asm.triangles.len())
        .into_par_iter()
        .map(|t| {
            let g = asm.gradient_of(t, h);
            let q = st.polygon().project(g, shrink);
            st.sigma(q).unwrap_or(0.0)
        })
        .collect();
    terms.iter().sum::<f64>() * area
}

fn energy_gradient(asm: &Assembly, st: &dyn SurfaceTension, shrink: f64, h: &[f64]) -> Vec<f64> {
    let area = 0.5 * asm.spacing * asm.spacing;
    let tri_grads: Vec<Complex64> = (0..asm.triangles.len())
        .into_par_iter()
        .map(|t| {
            let g = asm.gradient_of(t, h);
            let q = st.polygon().project(g, shrink);
            st.grad(q).unwrap_or(Complex64::new(0.0, 0.0))
        })
        .collect();
    (0..h.len())
        .into_par_iter()
        .map(|id| {
            let mut s = 0.0;
            for &t in &asm.node_triangles[id] {
                let k = asm.triangles[t].iter().position(|&n| n == id).unwrap();
                s += area * dot(tri_grads[t], asm.tri_shapes[t][k]);
            }
            s
        })
        .collect()
}

/// Projected subgradient minimization with Barzilai–Borwein steps and a
/// backtracking halving line search on the post-projection energy (the
/// energy trace is non-increasing by construction). Warm start (m+M)/2.
pub fn minimize(problem: &DiscreteEnergyProblem, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    let asm = assemble(problem)?;
    let st = problem.tension.as_ref();
    let shrink = problem.shrink;
    let feas = Feasibility {
        asm: &asm,
        polygon: st.polygon(),
        shrink,
    };
    let npts = asm.nx * asm.ny;
    let mut h: Vec<f64> = match &opts.seed_field {
        Some(seed) if seed.len() == npts => seed.clone(),
        _ => (0..npts).map(|i| 0.5 * (asm.lower[i] + asm.upper[i])).collect(),
    };
    feas.project(&mut h);
    let mut e = energy(&asm, st, shrink, &h);
    let mut trace = vec![e];
    let mut grad = energy_gradient(&asm, st, shrink, &h);
    let mut prev_h: Option<Vec<f64>> = None;
    let mut prev_grad: Option<Vec<f64>> = None;
    let mut step0 = asm.spacing * asm.spacing;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..opts.max_iters {
        iterations = iter + 1;
        // Barzilai–Borwein step seed
        let mut step = step0;
        if let (Some(ph), Some(pg)) = (&prev_h, &prev_grad) {
            let mut sy = 0.0;
            let mut ss = 0.0;
            for i in 0..npts {
                let s = h[i] - ph[i];
                let y = grad[i] - pg[i];
                sy += s * y;
                ss += s * s;
            }
            if sy > 1e-300 {
                step = ss / sy;
            }
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand: Vec<f64> = (0..npts).map(|i| h[i] - step * grad[i]).collect();
            feas.project(&mut cand);
            let ec = energy(&asm, st, shrink, &cand);
            if ec <= e {
                let delta = e - ec;
                prev_h = Some(std::mem::replace(&mut h, cand));
                prev_grad = Some(std::mem::replace(
                    &mut grad,
                    Vec::new(), // replaced below
                ));
                grad = energy_gradient(&asm, st, shrink, &h);
                e = ec;
                trace.push(e);
                accepted = true;
                step0 = step;
                if delta < opts.tol * e.abs().max(1.0) {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    // nodal gradients: average of adjacent triangle gradients
    let node_grad: Vec<Complex64> = (0..npts)
        .map(|id| {
            if asm.node_triangles[id].is_empty() {
                Complex64::new(0.0, 0.0)
            } else {
                let mut s = Complex64::new(0.0, 0.0);
                for &t in &asm.node_triangles[id] {
                    s += asm.gradient_of(t, &h);
                }
                s / asm.node_triangles[id].len() as f64
            }
        })
        .collect();
    let field = HeightField {
        origin: asm.origin,
        spacing: asm.spacing,
        nx: asm.nx,
        ny: asm.ny,
        mask: asm
            .inside
            .iter()
            .map(|&b| if b { Mask::Liquid } else { Mask::Outside })
            .collect(),
        h,
        grad: node_grad,
        max_plaquette_curl: 0.0,
    };
    Ok(MinimizeResult {
        field,
        energy_trace: trace,
        iterations,
        converged,
    })
}

/// Extracted liquid region of a solved field.
pub struct LiquidRegion {
    /// Per-cell mask on the (nx−1)×(ny−1) cell grid.
    pub cell_mask: Vec<Mask>,
    pub ncx: usize,
    pub ncy: usize,
    pub components: usize,
    pub euler_characteristic: i64,
    pub liquid_area: f64,
    /// Cell-center coordinates of liquid cells adjacent to non-liquid ones.
    pub boundary_cells: Vec<Complex64>,
}

/// Classify cells by the distance of the cell gradient to ∂N: liquid above
/// `threshold`, frozen labeled by the nearest corner; flood-fill component
/// count and Euler characteristic of the liquid complex.
pub fn extract_liquid_region(
    field: &HeightField,
    n: &GradientPolygon,
    threshold: f64,
) -> LiquidRegion {
    let (nx, ny) = (field.nx, field.ny);
    let ncx = nx - 1;
    let ncy = ny - 1;
    let corners = n.corners();
    let mut cell_mask = vec![Mask::Outside; ncx * ncy];
    let d = field.spacing;
    for j in 0..ncy {
        for i in 0..ncx {
            let ids = [
                field.idx(i, j),
                field.idx(i + 1, j),
                field.idx(i, j + 1),
                field.idx(i + 1, j + 1),
            ];
            if ids.iter().any(|&id| field.mask[id] == Mask::Outside) {
                continue;
            }
            let gx = 0.5 * (field.h[ids[1]] - field.h[ids[0]] + field.h[ids[3]] - field.h[ids[2]])
                / d;
            let gy = 0.5 * (field.h[ids[2]] - field.h[ids[0]] + field.h[ids[3]] - field.h[ids[1]])
                / d;
            let g = Complex64::new(gx, gy);
            if n.signed_edge_distance(g) > threshold {
                cell_mask[j * ncx + i] = Mask::Liquid;
            } else {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (k, c) in corners.iter().enumerate() {
                    let dd = (g - c).norm();
                    if dd < best_d {
                        best_d = dd;
                        best = k;
                    }
                }
                cell_mask[j * ncx + i] = Mask::Frozen(best);
            }
        }
    }
    // connected components of liquid cells (4-neighbor flood fill)
    let mut seen = vec![false; ncx * ncy];
    let mut components = 0;
    for start in 0..ncx * ncy {
        if seen[start] || cell_mask[start] != Mask::Liquid {
            continue;
        }
        components += 1;
        let mut queue = VecDeque::new();
        queue.push_back(start);
        seen[start] = true;
        while let Some(c) = queue.pop_front() {
            let (i, j) = (c % ncx, c / ncx);
            let mut push = |ii: usize, jj: usize, queue: &mut VecDeque<usize>| {
                if ii < ncx && jj < ncy {
                    let id = jj * ncx + ii;
                    if !seen[id] && cell_mask[id] == Mask::Liquid {
                        seen[id] = true;
                        queue.push_back(id);
                    }
                }
            };
            push(i.wrapping_sub(1), j, &mut queue);
            push(i + 1, j, &mut queue);
            push(i, j.wrapping_sub(1), &mut queue);
            push(i, j + 1, &mut queue);
        }
    }
    // Euler characteristic of the liquid cell complex
    let mut verts: HashSet<(usize, usize)> = HashSet::new();
    let mut edges: HashSet<(usize, usize, bool)> = HashSet::new();
    let mut faces = 0i64;
    let mut liquid_area = 0.0;
    let mut boundary_cells = Vec::new();
    for j in 0..ncy {
        for i in 0..ncx {
            if cell_mask[j * ncx + i] != Mask::Liquid {
                continue;
            }
            faces += 1;
            liquid_area += d * d;
            for (vi, vj) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                verts.insert((vi, vj));
            }
            edges.insert((i, j, true));
            edges.insert((i, j + 1, true));
            edges.insert((i, j, false));
            edges.insert((i + 1, j, false));
            let is_liquid = |ii: isize, jj: isize| -> bool {
                ii >= 0
                    && jj >= 0
                    && (ii as usize) < ncx
                    && (jj as usize) < ncy
                    && cell_mask[jj as usize * ncx + ii as usize] == Mask::Liquid
            };
            let (si, sj) = (i as isize, j as isize);
            if !(is_liquid(si - 1, sj) && is_liquid(si + 1, sj) && is_liquid(si, sj - 1)
                && is_liquid(si, sj + 1))
            {
                boundary_cells.push(
                    field.origin
                        + Complex64::new((i as f64 + 0.5) * d, (j as f64 + 0.5) * d),
                );
            }
        }
    }
    let euler_characteristic = verts.len() as i64 - edges.len() as i64 + faces;
    LiquidRegion {
        cell_mask,
        ncx,
        ncy,
        components,
        euler_characteristic,
        liquid_area,
        boundary_cells,
    }
}

/// Example 7.1 data: the regular hexagon natural for the even-sided triangle,
/// and the cut domain Ω′ whose boundary value is the restriction of the
/// hexagon's upper obstacle (trivial admissible class on Ω′).
pub mod example_71 {
    use super::*;

    pub fn triangle() -> GradientPolygon {
        GradientPolygon::new(vec![
            Complex64::new(0.5, -3.0f64.sqrt() / 2.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ])
        .expect("static polygon")
    }

    pub fn hexagon() -> Result<PolygonalDomain> {
        let s3 = 3.0f64.sqrt();
        let vertices = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(s3 / 2.0, -0.5),
            Complex64::new(s3, 0.0),
            Complex64::new(s3, 1.0),
            Complex64::new(s3 / 2.0, 1.5),
            Complex64::new(0.0, 1.0),
        ];
        build_natural_boundary(&triangle(), vertices, vec![1, 0, 2, 1, 0, 2])
    }

    /// Ω′ with h₀′ = M|_{∂Ω′}: the cut runs along creases of M, so the
    /// restriction is affine on every side.
    pub fn cut_domain() -> Result<PolygonalDomain> {
        let s3 = 3.0f64.sqrt();
        let hex = hexagon()?;
        let vertices = vec![
            Complex64::new(s3 / 2.0, -0.5),
            Complex64::new(s3, 0.0),
            Complex64::new(s3, 1.0),
            Complex64::new(s3 / 2.0, 1.5),
            Complex64::new(0.0, 1.0),
            Complex64::new(s3 / 2.0, 0.5),
        ];
        let values: Vec<f64> = vertices
            .iter()
            .map(|z| exact_upper_obstacle(&hex, *z))
            .collect();
        PolygonalDomain::from_vertex_values(&triangle(), vertices, values)
    }

    /// Exact upper McShane extension of a domain's boundary data.
    pub fn exact_upper_obstacle(dom: &PolygonalDomain, z: Complex64) -> f64 {
        let n = dom.gradient_polygon();
        let mut hi = f64::INFINITY;
        for (w, v) in dom.boundary_samples(1e-2) {
            hi = hi.min(v + n.support(z - w));
        }
        for (w, v) in dom.exact_candidates(z) {
            hi = hi.min(v + n.support(z - w));
        }
        hi
    }
}
