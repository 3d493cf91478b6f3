//! Serialization: JSON schemas for models and problems, CSV/SVG/PBM output.
//! Numeric CSV/SVG output uses 17 significant digits (round-trip exact).

use crate::error::{Error, Result};
use crate::frozen::{FrozenBoundaryModel, Poly, RationalFn};
use crate::geom::{ArcPartition, BlaschkeProduct, GradientPolygon};
use crate::height::{HeightField, Mask};
use crate::tension::HarmonicSurfaceTension;
use crate::variational::PolygonalDomain;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

fn cjson(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

fn cfrom(a: [f64; 2]) -> Complex64 {
    Complex64::new(a[0], a[1])
}

/// Surface-tension model document: polygon corners, arc endpoint angles,
/// the gradient constant and the σ anchor.
#[derive(Debug, Serialize, Deserialize)]
pub struct TensionJson {
    pub schema: u32,
    pub corners: Vec<[f64; 2]>,
    pub arc_angles: Vec<f64>,
    pub labels: Vec<usize>,
    pub c0: [f64; 2],
    pub sigma_anchor: SigmaAnchor,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SigmaAnchor {
    pub point: [f64; 2],
    pub value: f64,
}

impl TensionJson {
    pub fn from_tension(t: &HarmonicSurfaceTension) -> Self {
        TensionJson {
            schema: 1,
            corners: t.polygon_ref().corners().iter().map(|c| cjson(*c)).collect(),
            arc_angles: t.arcs().endpoints().iter().map(|e| e.arg()).collect(),
            labels: t.arcs().labels().to_vec(),
            c0: cjson(t.c0()),
            sigma_anchor: SigmaAnchor {
                point: cjson(t.sigma_ref().0),
                value: t.sigma_ref().1,
            },
        }
    }

    pub fn into_tension(self) -> Result<HarmonicSurfaceTension> {
        let polygon = GradientPolygon::new(self.corners.iter().map(|c| cfrom(*c)).collect())?;
        let endpoints = self
            .arc_angles
            .iter()
            .map(|a| Complex64::from_polar(1.0, *a))
            .collect();
        let arcs = ArcPartition::new(endpoints, self.labels, polygon.len())?;
        HarmonicSurfaceTension::new(
            polygon,
            arcs,
            cfrom(self.c0),
            (cfrom(self.sigma_anchor.point), self.sigma_anchor.value),
        )
    }
}

/// Frozen-boundary model document.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelJson {
    pub schema: u32,
    pub degree: usize,
    pub blaschke_zeros: Vec<[f64; 2]>,
    pub unimodular: [f64; 2],
    pub gamma_num: Vec<[f64; 2]>,
    pub gamma_den: Vec<[f64; 2]>,
    pub cusps: Vec<CuspJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CuspJson {
    pub angle: f64,
    pub point: [f64; 2],
}

impl ModelJson {
    pub fn from_model(m: &FrozenBoundaryModel) -> Self {
        ModelJson {
            schema: 1,
            degree: m.degree(),
            blaschke_zeros: m.blaschke().zeros().iter().map(|z| cjson(*z)).collect(),
            unimodular: cjson(m.blaschke().unimodular()),
            gamma_num: m.gamma().num.coeffs().iter().map(|c| cjson(*c)).collect(),
            gamma_den: m.gamma().den.coeffs().iter().map(|c| cjson(*c)).collect(),
            cusps: m
                .cusps()
                .iter()
                .map(|c| CuspJson {
                    angle: c.angle,
                    point: cjson(c.point),
                })
                .collect(),
        }
    }
}

/// Input document for the `boundary` command.
#[derive(Debug, Serialize, Deserialize)]
pub struct BoundaryInputJson {
    pub schema: u32,
    /// "canonical" | "polynomial" | "blaschke"
    pub kind: String,
    #[serde(default)]
    pub degree: usize,
    #[serde(default)]
    pub critical_angles: Vec<f64>,
    #[serde(default)]
    pub blaschke_zeros: Vec<[f64; 2]>,
    #[serde(default)]
    pub unimodular: Option<[f64; 2]>,
    #[serde(default)]
    pub gamma_circle_zeros: Vec<f64>,
    #[serde(default)]
    pub alpha: Option<[f64; 2]>,
    #[serde(default)]
    pub interior_zero: Option<[f64; 2]>,
    /// Explicit polynomial γ coefficients (ascending), for raw models.
    #[serde(default)]
    pub gamma_poly: Vec<[f64; 2]>,
}

impl BoundaryInputJson {
    pub fn build(&self) -> Result<FrozenBoundaryModel> {
        match self.kind.as_str() {
            "canonical" => FrozenBoundaryModel::canonical(self.degree),
            "polynomial" => {
                FrozenBoundaryModel::univalent_polynomial(self.degree, &self.critical_angles)
                    .map(|(m, _)| m)
            }
            "blaschke" => {
                let zeros = self.blaschke_zeros.iter().map(|z| cfrom(*z)).collect();
                let eta = self
                    .unimodular
                    .map(cfrom)
                    .unwrap_or(Complex64::new(1.0, 0.0));
                let b = BlaschkeProduct::new(zeros, eta)?;
                if !self.gamma_poly.is_empty() {
                    let gamma = RationalFn::from_poly(Poly::new(
                        self.gamma_poly.iter().map(|c| cfrom(*c)).collect(),
                    ));
                    return Ok(FrozenBoundaryModel::from_parts(b, gamma));
                }
                let gamma = crate::frozen::gamma_from_circle_zeros(
                    &b,
                    &self.gamma_circle_zeros,
                    self.alpha.map(cfrom).unwrap_or(Complex64::new(1.0, 0.0)),
                    self.interior_zero.map(cfrom),
                )?;
                FrozenBoundaryModel::validated(b, gamma)
            }
            other => Err(Error::Validation(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Input document for the `minimize` command.
#[derive(Debug, Serialize, Deserialize)]
pub struct ProblemJson {
    pub schema: u32,
    pub corners: Vec<[f64; 2]>,
    pub vertices: Vec<[f64; 2]>,
    /// "vertex" (strict natural labels), "side", or "values"
    pub label_kind: String,
    #[serde(default)]
    pub labels: Vec<usize>,
    #[serde(default)]
    pub values: Vec<f64>,
    pub spacing: f64,
    #[serde(default = "default_shrink")]
    pub shrink: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// "lozenge" or "square-harmonic"
    #[serde(default = "default_sigma")]
    pub sigma: String,
}

fn default_shrink() -> f64 {
    1e-3
}
fn default_max_iters() -> usize {
    2000
}
fn default_tol() -> f64 {
    1e-10
}
fn default_sigma() -> String {
    "lozenge".into()
}

impl ProblemJson {
    pub fn domain(&self) -> Result<PolygonalDomain> {
        let n = GradientPolygon::new(self.corners.iter().map(|c| cfrom(*c)).collect())?;
        let vertices: Vec<Complex64> = self.vertices.iter().map(|v| cfrom(*v)).collect();
        match self.label_kind.as_str() {
            "vertex" => crate::variational::build_natural_boundary(&n, vertices, self.labels.clone()),
            "side" => PolygonalDomain::from_side_data(&n, vertices, self.labels.clone()),
            "values" => PolygonalDomain::from_vertex_values(&n, vertices, self.values.clone()),
            other => Err(Error::Validation(format!("unknown label kind `{other}`"))),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// HeightField CSV: x, y, mask, h, hx, hy.
pub fn write_height_csv(path: &Path, field: &HeightField) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x,y,mask,h,hx,hy")?;
    for j in 0..field.ny {
        for i in 0..field.nx {
            let id = field.idx(i, j);
            let p = field.point(i, j);
            writeln!(
                f,
                "{},{},{},{},{},{}",
                fmt(p.re),
                fmt(p.im),
                field.mask[id].code(),
                fmt(field.h[id]),
                fmt(field.grad[id].re),
                fmt(field.grad[id].im)
            )?;
        }
    }
    Ok(())
}

pub fn write_energy_trace_csv(path: &Path, trace: &[f64]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "iteration,energy")?;
    for (i, e) in trace.iter().enumerate() {
        writeln!(f, "{},{}", i, fmt(*e))?;
    }
    Ok(())
}

/// Liquid mask as a portable bitmap (P1): 1 = liquid.
pub fn write_mask_pbm(path: &Path, mask: &[Mask], ncx: usize, ncy: usize) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "P1")?;
    writeln!(f, "{} {}", ncx, ncy)?;
    for j in (0..ncy).rev() {
        let row: Vec<&str> = (0..ncx)
            .map(|i| {
                if mask[j * ncx + i] == Mask::Liquid {
                    "1"
                } else {
                    "0"
                }
            })
            .collect();
        writeln!(f, "{}", row.join(" "))?;
    }
    Ok(())
}

/// Boundary curve CSV: theta, Re R, Im R.
pub fn write_boundary_csv(path: &Path, model: &FrozenBoundaryModel, samples: usize) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "theta,re,im")?;
    for k in 0..samples {
        let theta = std::f64::consts::TAU * k as f64 / samples as f64;
        let v = model.boundary_param(Complex64::from_polar(1.0, theta))?;
        writeln!(f, "{},{},{}", fmt(theta), fmt(v.re), fmt(v.im))?;
    }
    Ok(())
}

/// Frozen boundary as an SVG path: cubic Hermite segments of R(e^{iθ}) at
/// `samples` nodes, tangents from R′.
pub fn write_boundary_svg(path: &Path, model: &FrozenBoundaryModel, samples: usize) -> Result<()> {
    let n = samples;
    let mut pts = Vec::with_capacity(n);
    let mut tans = Vec::with_capacity(n);
    for k in 0..n {
        let theta = std::f64::consts::TAU * k as f64 / n as f64;
        let z = Complex64::from_polar(1.0, theta);
        pts.push(model.boundary_param(z)?);
        // dR/dθ = i z R'(z)
        tans.push(Complex64::i() * z * model.boundary_deriv(z)?);
    }
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        xmin = xmin.min(p.re);
        xmax = xmax.max(p.re);
        ymin = ymin.min(p.im);
        ymax = ymax.max(p.im);
    }
    let pad = 0.05 * (xmax - xmin).max(ymax - ymin).max(1e-9);
    let dt = std::f64::consts::TAU / n as f64;
    let mut d = format!("M {} {}", fmt(pts[0].re), fmt(pts[0].im));
    for k in 0..n {
        let a = pts[k];
        let b = pts[(k + 1) % n];
        let c1 = a + tans[k] * (dt / 3.0);
        let c2 = b - tans[(k + 1) % n] * (dt / 3.0);
        d.push_str(&format!(
            " C {} {}, {} {}, {} {}",
            fmt(c1.re),
            fmt(c1.im),
            fmt(c2.re),
            fmt(c2.im),
            fmt(b.re),
            fmt(b.im)
        ));
    }
    d.push_str(" Z");
    let svg = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n  <path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"{}\" transform=\"scale(1,-1)\"/>\n</svg>\n",
        fmt(xmin - pad),
        fmt(-(ymax + pad)),
        fmt(xmax - xmin + 2.0 * pad),
        fmt(ymax - ymin + 2.0 * pad),
        d,
        fmt(0.004 * (xmax - xmin + 2.0 * pad))
    );
    std::fs::write(path, svg)?;
    Ok(())
}

/// Empirical field CSV: cell x, y (rescaled center), north frequency.
pub fn write_empirical_csv(path: &Path, field: &crate::aztec::EmpiricalField) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x,y,north_freq")?;
    let n = field.n as i32;
    for y in -n..n {
        for x in -n..n {
            let v = field.north_freq[field.cell_index(x, y)];
            if v < 0.0 {
                continue;
            }
            let (cx, cy) = field.cell_center(x, y);
            writeln!(f, "{},{},{}", fmt(cx), fmt(cy), fmt(v))?;
        }
    }
    Ok(())
}

/// Raw tiling dump: one line per domino (x, y, orientation letter).
pub fn write_tiling_dump(path: &Path, tiling: &crate::aztec::AztecTiling) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    for d in &tiling.dominoes {
        writeln!(f, "{},{},{}", d.x, d.y, tiling.domino_type(d).letter())?;
    }
    Ok(())
}

/// σ and ∇σ sample CSV over a polygon grid.
pub fn write_sigma_csv(
    path: &Path,
    st: &dyn crate::tension::SurfaceTension,
    grid: usize,
) -> Result<()> {
    let poly = st.polygon();
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in poly.corners() {
        xmin = xmin.min(c.re);
        xmax = xmax.max(c.re);
        ymin = ymin.min(c.im);
        ymax = ymax.max(c.im);
    }
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x,y,inside,sigma,gx,gy")?;
    for j in 0..grid {
        for i in 0..grid {
            let p = Complex64::new(
                xmin + (xmax - xmin) * (i as f64 + 0.5) / grid as f64,
                ymin + (ymax - ymin) * (j as f64 + 0.5) / grid as f64,
            );
            let inside = poly.signed_edge_distance(p) > 1e-9;
            if inside {
                let q = poly.project(p, 1e-9);
                let s = st.sigma(q).unwrap_or(f64::NAN);
                let g = st
                    .grad(q)
                    .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
                writeln!(
                    f,
                    "{},{},1,{},{},{}",
                    fmt(p.re),
                    fmt(p.im),
                    fmt(s),
                    fmt(g.re),
                    fmt(g.im)
                )?;
            } else {
                writeln!(f, "{},{},0,nan,nan,nan", fmt(p.re), fmt(p.im))?;
            }
        }
    }
    Ok(())
}
