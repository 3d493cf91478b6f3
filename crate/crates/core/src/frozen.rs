//! Liquid domains with frozen boundary built from Blaschke-product data.
//!
//! A degree-d Blaschke product B and a self-reflective holomorphic factor γ
//! generate the teleomorphic homeomorphism g = (γ − B·conj γ)/(1 − |B|²),
//! the two-variable kernel Φ(z,w) = (γ(z)B(w) − γ(w)B(z))/(B(w) − B(z)),
//! and the rational boundary parametrization R = γ − Bγ′/B′ whose image of
//! the unit circle is the frozen boundary ∂𝓛 with exactly d−2 simple cusps.

use crate::error::{Error, Result};
use crate::geom::BlaschkeProduct;
use crate::quad::poly_roots;
use num_complex::Complex64;
use std::f64::consts::TAU;

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// Polynomial with ascending complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn zero() -> Self {
        Poly { coeffs: vec![] }
    }

    pub fn constant(c: Complex64) -> Self {
        Poly::new(vec![c])
    }

    fn trim(&mut self) {
        while let Some(last) = self.coeffs.last() {
            if last.norm() == 0.0 {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut v = C0;
        for c in self.coeffs.iter().rev() {
            v = v * z + c;
        }
        v
    }

    pub fn deriv(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::zero();
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| (k as f64 + 1.0) * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![C0; n];
        for (k, c) in self.coeffs.iter().enumerate() {
            out[k] += c;
        }
        for (k, c) in other.coeffs.iter().enumerate() {
            out[k] += c;
        }
        Poly::new(out)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![C0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, c: Complex64) -> Poly {
        Poly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Multiply by z^k.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![C0; k];
        out.extend_from_slice(&self.coeffs);
        Poly::new(out)
    }

    /// Conjugate-reversed polynomial p*(z) = z^deg · conj(p(1/conj z)).
    pub fn conj_reversed(&self) -> Poly {
        Poly::new(self.coeffs.iter().rev().map(|c| c.conj()).collect())
    }

    /// Monic product Π (z − r_k).
    pub fn from_roots(roots: &[Complex64]) -> Poly {
        let mut p = Poly::constant(C1);
        for r in roots {
            p = p.mul(&Poly::new(vec![-r, C1]));
        }
        p
    }
}

/// Ratio of two polynomials; kept unreduced.
#[derive(Debug, Clone)]
pub struct RationalFn {
    pub num: Poly,
    pub den: Poly,
}

/// The holomorphic factor γ of a teleomorphic map, stored as a rational
/// function whose denominator comes from the Blaschke zeros.
pub type HolomorphicFactor = RationalFn;

impl RationalFn {
    pub fn from_poly(p: Poly) -> Self {
        RationalFn {
            num: p,
            den: Poly::constant(C1),
        }
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        let d = self.den.eval(z);
        if d.norm() < 1e-140 {
            return Err(Error::Pole(format!("rational function pole near z = {z}")));
        }
        Ok(self.num.eval(z) / d)
    }

    pub fn deriv(&self) -> RationalFn {
        RationalFn {
            num: self.num.deriv().mul(&self.den).sub(&self.num.mul(&self.den.deriv())),
            den: self.den.mul(&self.den),
        }
    }

    pub fn mul(&self, other: &RationalFn) -> RationalFn {
        RationalFn {
            num: self.num.mul(&other.num),
            den: self.den.mul(&other.den),
        }
    }

    pub fn div(&self, other: &RationalFn) -> RationalFn {
        RationalFn {
            num: self.num.mul(&other.den),
            den: self.den.mul(&other.num),
        }
    }

    pub fn sub(&self, other: &RationalFn) -> RationalFn {
        RationalFn {
            num: self.num.mul(&other.den).sub(&other.num.mul(&self.den)),
            den: self.den.mul(&other.den),
        }
    }

    /// conj(f(1/conj z)) as a rational function of z.
    pub fn conj_reflected(&self) -> RationalFn {
        let p = self.num.degree();
        let q = self.den.degree();
        let n = self.num.conj_reversed();
        let d = self.den.conj_reversed();
        if q >= p {
            RationalFn {
                num: n.shift(q - p),
                den: d,
            }
        } else {
            RationalFn {
                num: n,
                den: d.shift(p - q),
            }
        }
    }
}

/// A cusp of the frozen boundary: simple critical point of R on the circle.
#[derive(Debug, Clone, Copy)]
pub struct Cusp {
    pub angle: f64,
    pub preimage: Complex64,
    pub point: Complex64,
}

#[derive(Debug, Clone)]
enum Boundary {
    /// B = z^d: R is exactly the univalent polynomial p.
    Poly { p: Poly, dp: Poly, ddp: Poly },
    Rational {
        r: RationalFn,
        dr: RationalFn,
        ddr: RationalFn,
    },
}

/// Polynomial model data for B = z^d: the parametrization p and factor γ.
#[derive(Debug, Clone)]
pub struct UnivalentPolynomialModel {
    pub p: Poly,
    pub gamma_poly: Poly,
}

/// Liquid domain model generated by a pair (B, γ).
#[derive(Debug, Clone)]
pub struct FrozenBoundaryModel {
    blaschke: BlaschkeProduct,
    gamma: RationalFn,
    boundary: Boundary,
    cusps: Vec<Cusp>,
    degree: usize,
}

/// Construct the holomorphic factor γ from its circle zeros (Prop 5.8 form):
/// γ = α·Π(z − e^{iθ_j}) / D(z), optionally with one simple interior zero z₀
/// paired with its reflection. The phase of α is rotated so the
/// self-reflection identity γ(z) = B(z)·conj(γ(1/conj z)) holds exactly.
pub fn gamma_from_circle_zeros(
    b: &BlaschkeProduct,
    circle_angles: &[f64],
    alpha: Complex64,
    interior_zero: Option<Complex64>,
) -> Result<HolomorphicFactor> {
    let d = b.degree();
    let expected = if interior_zero.is_some() { d - 2 } else { d };
    if circle_angles.len() != expected {
        return Err(Error::ArityMismatch {
            expected,
            got: circle_angles.len(),
        });
    }
    let mut num = Poly::from_roots(
        &circle_angles
            .iter()
            .map(|t| Complex64::from_polar(1.0, *t))
            .collect::<Vec<_>>(),
    );
    if let Some(z0) = interior_zero {
        if z0.norm() >= 1.0 {
            return Err(Error::Domain("interior zero must lie in the open disc".into()));
        }
        // (z − z0)(1 − conj(z0) z)
        num = num
            .mul(&Poly::new(vec![-z0, C1]))
            .mul(&Poly::new(vec![C1, -z0.conj()]));
    }
    num = num.scale(alpha);
    let mut den = Poly::constant(C1);
    for zk in b.zeros() {
        if zk.norm() > 0.0 {
            den = den.mul(&Poly::new(vec![C1, -zk.conj()]));
        }
    }
    let mut gamma = RationalFn { num, den };
    // phase fix: λ = γ/(B·conj γ) is a unimodular constant on the circle;
    // rotating α by −arg(λ)/2 makes it 1.
    let probe = Complex64::from_polar(1.0, 0.337);
    let gv = gamma.eval(probe)?;
    if gv.norm() < 1e-13 {
        return Err(Error::Validation(
            "probe point coincides with a zero of gamma".into(),
        ));
    }
    let lambda = gv / (b.eval(probe)? * gv.conj());
    let phase = Complex64::from_polar(1.0, -lambda.arg() / 2.0);
    gamma.num = gamma.num.scale(phase);
    // sanity: the identity now holds along the circle
    for k in 0..8 {
        let z = Complex64::from_polar(1.0, 0.11 + TAU * k as f64 / 8.0);
        let lhs = gamma.eval(z)?;
        let rhs = b.eval(z)? * gamma.eval(z)?.conj();
        if (lhs - rhs).norm() > 1e-9 * (1.0 + lhs.norm()) {
            return Err(Error::Validation(format!(
                "self-reflection identity failed at {z}: residual {}",
                (lhs - rhs).norm()
            )));
        }
    }
    Ok(gamma)
}

impl FrozenBoundaryModel {
    /// Assemble a model without validation (used for deliberately broken
    /// inputs fed to `check_characterization`).
    pub fn from_parts(blaschke: BlaschkeProduct, gamma: RationalFn) -> Self {
        let degree = blaschke.degree();
        let boundary = Self::make_boundary(&blaschke, &gamma);
        FrozenBoundaryModel {
            blaschke,
            gamma,
            boundary,
            cusps: Vec::new(),
            degree,
        }
    }

    fn make_boundary(b: &BlaschkeProduct, gamma: &RationalFn) -> Boundary {
        if b.is_monomial() && gamma.den.degree() == 0 {
            // p = γ − zγ′/d on coefficients: p_j = γ_j (d − j)/d
            let d = b.degree() as f64;
            let den0 = gamma.den.coeffs()[0];
            let p = Poly::new(
                gamma
                    .num
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c / den0 * ((d - j as f64) / d))
                    .collect(),
            );
            let dp = p.deriv();
            let ddp = dp.deriv();
            Boundary::Poly { p, dp, ddp }
        } else {
            let bn = Poly::from_roots(b.zeros()).scale(b.unimodular());
            let mut bd = Poly::constant(C1);
            for zk in b.zeros() {
                bd = bd.mul(&Poly::new(vec![C1, -zk.conj()]));
            }
            let b_rat = RationalFn { num: bn, den: bd };
            let b_prime = b_rat.deriv();
            let r = gamma.sub(&b_rat.mul(&gamma.deriv()).div(&b_prime));
            let dr = r.deriv();
            let ddr = dr.deriv();
            Boundary::Rational { r, dr, ddr }
        }
    }

    /// Canonical epicycloid model: γ = (d/(d−1))(z + z^{d−1}) for d ≥ 3,
    /// γ = 2z for d = 2 (boundary the unit circle, g = 2z/(1+|z|²)).
    pub fn canonical(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain("degree must be at least 2".into()));
        }
        let angles: Vec<f64> = (0..d.saturating_sub(2))
            .map(|i| std::f64::consts::PI * (2.0 * i as f64 + 1.0) / (d as f64 - 2.0))
            .collect();
        Self::univalent_polynomial_scaled(d, &angles, d as f64 / (d as f64 - 1.0))
            .map(|(m, _)| m)
    }

    /// Univalent polynomial model with prescribed cusp preimage angles:
    /// γ(z) = α z Π(z − e^{iθ_i}), α fixed so that conj(a₁) = (d−1)a_{d−1};
    /// p = γ − zγ′/d. Univalence is verified via `check_characterization`.
    pub fn univalent_polynomial(
        d: usize,
        critical_angles: &[f64],
    ) -> Result<(Self, UnivalentPolynomialModel)> {
        Self::univalent_polynomial_scaled(d, critical_angles, d as f64 / (d as f64 - 1.0))
    }

    fn univalent_polynomial_scaled(
        d: usize,
        critical_angles: &[f64],
        magnitude: f64,
    ) -> Result<(Self, UnivalentPolynomialModel)> {
        if d < 2 {
            return Err(Error::Domain("degree must be at least 2".into()));
        }
        if critical_angles.len() != d - 2 {
            return Err(Error::ArityMismatch {
                expected: d - 2,
                got: critical_angles.len(),
            });
        }
        for (i, a) in critical_angles.iter().enumerate() {
            for b in &critical_angles[..i] {
                if (a - b).rem_euclid(TAU).min((b - a).rem_euclid(TAU)) < 1e-9 {
                    return Err(Error::Domain(format!(
                        "critical angles {a} and {b} coincide modulo 2π"
                    )));
                }
            }
        }
        let q = Poly::from_roots(
            &critical_angles
                .iter()
                .map(|t| Complex64::from_polar(1.0, *t))
                .collect::<Vec<_>>(),
        );
        // conj(a1) = (d−1) a_{d−1} forces arg α = −arg(q(0))/2 (mod π)
        let q0 = q.coeffs().first().copied().unwrap_or(C1);
        let alpha = Complex64::from_polar(magnitude, -q0.arg() / 2.0);
        let gamma_poly = q.mul(&Poly::new(vec![C0, C1])).scale(alpha);
        let blaschke = BlaschkeProduct::monomial(d);
        let gamma = RationalFn::from_poly(gamma_poly.clone());
        let mut model = Self::from_parts(blaschke, gamma);
        let cusps = model.find_cusps()?;
        model.cusps = cusps;
        let report = model.check_characterization();
        if !report.univalence_pass {
            let detail = if report.tacnodes.is_empty() {
                format!("winding {} on the inner circle", report.winding)
            } else {
                "tangential double point".to_string()
            };
            return Err(Error::NonUnivalent(detail));
        }
        let p = match &model.boundary {
            Boundary::Poly { p, .. } => p.clone(),
            Boundary::Rational { .. } => unreachable!("monomial Blaschke yields a polynomial"),
        };
        let upm = UnivalentPolynomialModel {
            p,
            gamma_poly,
        };
        Ok((model, upm))
    }

    /// Validated construction from a general Blaschke product and factor γ:
    /// detects cusps and requires the characterization checks to pass.
    pub fn validated(blaschke: BlaschkeProduct, gamma: RationalFn) -> Result<Self> {
        let mut model = Self::from_parts(blaschke, gamma);
        let cusps = model.find_cusps()?;
        model.cusps = cusps;
        let report = model.check_characterization();
        if !report.all_pass() {
            return Err(Error::Validation(format!(
                "characterization failed: univalence {}, self-reflectivity residual {:.3e}, pole-free {}",
                report.univalence_pass, report.self_reflect_residual, report.pole_free_pass
            )));
        }
        Ok(model)
    }

    pub fn blaschke(&self) -> &BlaschkeProduct {
        &self.blaschke
    }

    pub fn gamma(&self) -> &RationalFn {
        &self.gamma
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn cusps(&self) -> &[Cusp] {
        &self.cusps
    }

    pub fn gamma_eval(&self, z: Complex64) -> Result<Complex64> {
        self.gamma.eval(z)
    }

    /// Two-variable kernel Φ(z,w); on the diagonal it equals R(z).
    pub fn phi_kernel(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        if z == w {
            return self.boundary_param(z);
        }
        let bz = self.blaschke.eval(z)?;
        let bw = self.blaschke.eval(w)?;
        let den = bw - bz;
        if den.norm() < 1e-14 {
            return Err(Error::Pole(format!(
                "kernel pole: B(z) = B(w) within 1e-14 at z={z}, w={w}"
            )));
        }
        Ok((self.gamma.eval(z)? * bw - self.gamma.eval(w)? * bz) / den)
    }

    /// Teleomorphic homeomorphism g; real-analytic on the closed disc and
    /// extended by g(1/conj z) = g(z) outside.
    pub fn g(&self, z: Complex64) -> Result<Complex64> {
        let mut z = z;
        if z.norm() > 1.0 {
            z = C1 / z.conj();
        }
        if z.norm() > 1.0 - 1e-9 {
            return self.boundary_param(z / z.norm());
        }
        let b = self.blaschke.eval(z)?;
        let gv = self.gamma.eval(z)?;
        Ok((gv - b * gv.conj()) / (1.0 - b.norm_sqr()))
    }

    /// Wirtinger derivatives (g_z, g_z̄) in the open disc.
    pub fn g_wirtinger(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        if z.norm() >= 1.0 {
            return Err(Error::Domain("g derivatives evaluated inside the disc only".into()));
        }
        let b = self.blaschke.eval(z)?;
        let db = self.blaschke.deriv(z)?;
        let gv = self.gamma.eval(z)?;
        let dg = self.gamma.deriv().eval(z)?;
        let s = b.norm_sqr();
        let one_minus = 1.0 - s;
        let numerator = gv - b * gv.conj();
        let gz = (dg - db * gv.conj()) / one_minus + numerator * (db * b.conj()) / (one_minus * one_minus);
        let gzb = (-b * dg.conj()) / one_minus + numerator * (b * db.conj()) / (one_minus * one_minus);
        Ok((gz, gzb))
    }

    /// Boundary parametrization R(z) = γ − Bγ′/B′; for |z| = 1 this traces
    /// the frozen boundary ∂𝓛.
    pub fn boundary_param(&self, z: Complex64) -> Result<Complex64> {
        match &self.boundary {
            Boundary::Poly { p, .. } => Ok(p.eval(z)),
            Boundary::Rational { r, .. } => {
                let db = self.blaschke.deriv(z)?;
                if db.norm() < 1e-13 {
                    return Err(Error::Pole(format!("critical point of B at z = {z}")));
                }
                r.eval(z)
            }
        }
    }

    pub fn boundary_deriv(&self, z: Complex64) -> Result<Complex64> {
        match &self.boundary {
            Boundary::Poly { dp, .. } => Ok(dp.eval(z)),
            Boundary::Rational { dr, .. } => dr.eval(z),
        }
    }

    pub fn boundary_second(&self, z: Complex64) -> Result<Complex64> {
        match &self.boundary {
            Boundary::Poly { ddp, .. } => Ok(ddp.eval(z)),
            Boundary::Rational { ddr, .. } => ddr.eval(z),
        }
    }

    /// Sampled boundary curve R(e^{iθ}) at n uniform angles.
    pub fn boundary_polyline(&self, n: usize) -> Result<Vec<Complex64>> {
        (0..n)
            .map(|k| self.boundary_param(Complex64::from_polar(1.0, TAU * k as f64 / n as f64)))
            .collect()
    }

    /// Continuation step for √B along the circle.
    fn sqrt_b_continued(&self, z: Complex64, anchor: Option<Complex64>) -> Result<Complex64> {
        let mut s = self.blaschke.eval(z)?.sqrt();
        if let Some(prev) = anchor {
            if (s - prev).norm() > (s + prev).norm() {
                s = -s;
            }
        }
        Ok(s)
    }

    /// A(θ) with z R′(z) = A(z)√B(z) on the circle; real up to rounding.
    fn tangent_sign_function(&self, theta: f64, anchor: Option<Complex64>) -> Result<(f64, Complex64)> {
        let z = Complex64::from_polar(1.0, theta);
        let s = self.sqrt_b_continued(z, anchor)?;
        let v = z * self.boundary_deriv(z)? / s;
        Ok((v.re, s))
    }

    /// All cusps: roots of R′ on the unit circle, located by sign changes of
    /// A over a 4096-point scan and refined by bisection to 1e-12 in angle.
    /// Each root is checked simple (|R″| > 1e-8); the count must be d − 2.
    pub fn find_cusps(&self) -> Result<Vec<Cusp>> {
        let n = 4096;
        let d = self.degree;
        let mut thetas = Vec::with_capacity(n + 1);
        let mut avals = Vec::with_capacity(n + 1);
        let mut anchor: Option<Complex64> = None;
        for k in 0..=n {
            let theta = TAU * k as f64 / n as f64;
            let (a, s) = self.tangent_sign_function(theta, anchor)?;
            anchor = Some(s);
            thetas.push(theta);
            avals.push(a);
        }
        let mut cusps = Vec::new();
        for k in 0..n {
            let (a0, a1) = (avals[k], avals[k + 1]);
            if a0 == 0.0 {
                cusps.push(thetas[k]);
                continue;
            }
            if a0 * a1 < 0.0 {
                // bisection on a locally re-anchored branch of √B; a global
                // sign flip does not move the zeros of A
                let (mut lo, mut hi) = (thetas[k], thetas[k + 1]);
                let (mut f_lo, mut s_lo) = self.tangent_sign_function(lo, None)?;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    let (f_mid, s_mid) = self.tangent_sign_function(mid, Some(s_lo))?;
                    if f_lo * f_mid <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        f_lo = f_mid;
                        s_lo = s_mid;
                    }
                    if hi - lo < 1e-12 {
                        break;
                    }
                }
                cusps.push(0.5 * (lo + hi));
            }
        }
        let mut out = Vec::with_capacity(cusps.len());
        for theta in cusps {
            let z = Complex64::from_polar(1.0, theta);
            let second = self.boundary_second(z)?;
            if second.norm() <= 1e-8 {
                return Err(Error::Validation(format!(
                    "critical point at angle {theta} is not simple (|R''| = {:.3e})",
                    second.norm()
                )));
            }
            out.push(Cusp {
                angle: theta,
                preimage: z,
                point: self.boundary_param(z)?,
            });
        }
        if out.len() != d - 2 {
            return Err(Error::RootCountMismatch {
                expected: d - 2,
                found: out.len(),
            });
        }
        Ok(out)
    }

    /// Max residual of the tangent identity f(ζ) = −τ(ζ)² over circle
    /// samples, excluding angular neighborhoods of the cusps.
    pub fn tangent_identity_check(&self, samples: usize, cusp_exclusion: f64) -> Result<f64> {
        let cusp_angles: Vec<f64> = self.cusps.iter().map(|c| c.angle).collect();
        let mut worst = 0.0f64;
        for k in 0..samples {
            let theta = TAU * k as f64 / samples as f64;
            if cusp_angles.iter().any(|a| {
                let d = (theta - a).rem_euclid(TAU);
                d.min(TAU - d) < cusp_exclusion
            }) {
                continue;
            }
            let z = Complex64::from_polar(1.0, theta);
            let dr = self.boundary_deriv(z)?;
            if dr.norm() < 1e-13 {
                continue;
            }
            let tau = Complex64::i() * z * dr / dr.norm();
            let res = (self.blaschke.eval(z)? + tau * tau).norm();
            worst = worst.max(res);
        }
        Ok(worst)
    }

    /// Theorem-5.5 condition checks: (i) univalence near the circle,
    /// (ii) self-reflectivity of R′, (iii) analyticity of B′·conj(R(1/z̄)).
    pub fn check_characterization(&self) -> CharacterizationReport {
        let n = 2048;
        // (ii) R′(z) = (B/z²)·conj(R′(1/conj z)); on the circle 1/conj z = z.
        let mut residual_ii = 0.0f64;
        for k in 0..n {
            let z = Complex64::from_polar(1.0, TAU * (k as f64 + 0.5) / n as f64);
            let dr = match self.boundary_deriv(z) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let b = match self.blaschke.eval(z) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let rhs = b / (z * z) * dr.conj();
            residual_ii = residual_ii.max((dr - rhs).norm());
        }
        // (i) winding of R on |z| = 1−ε around the curve mean, plus
        // double-point scan on the circle with local refinement.
        let eps = 1e-3;
        let inner: Vec<Complex64> = (0..n)
            .filter_map(|k| {
                self.boundary_param(Complex64::from_polar(1.0 - eps, TAU * k as f64 / n as f64))
                    .ok()
            })
            .collect();
        let winding = if inner.len() == n {
            let mean = inner.iter().sum::<Complex64>() / n as f64;
            let mut total = 0.0;
            for k in 0..n {
                let a = inner[k] - mean;
                let b = inner[(k + 1) % n] - mean;
                total += (b / a).arg();
            }
            (total / TAU).round() as i64
        } else {
            0
        };
        let circle: Vec<(Complex64, Complex64)> = (0..n)
            .filter_map(|k| {
                let z = Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
                self.boundary_param(z).ok().map(|v| (z, v))
            })
            .collect();
        let mut tacnodes = Vec::new();
        let mut min_sep = f64::INFINITY;
        if circle.len() == n {
            let mut candidates: Vec<(usize, usize)> = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    // pairs closer than 1e-2 on the circle are the two arcs
                    // of a single cusp, not a double point
                    let dz = (circle[i].0 - circle[j].0).norm();
                    if dz <= 1e-2 {
                        continue;
                    }
                    let dv = (circle[i].1 - circle[j].1).norm();
                    if dv < 1e-3 {
                        candidates.push((i, j));
                    }
                    if dv < min_sep {
                        min_sep = dv;
                    }
                }
            }
            for (i, j) in candidates {
                if let Some(pair) = self.refine_double_point(
                    TAU * i as f64 / n as f64,
                    TAU * j as f64 / n as f64,
                    TAU / n as f64,
                ) {
                    let near_known = tacnodes.iter().any(|(a, _): &(Complex64, Complex64)| {
                        (a - pair.0).norm() < 1e-4
                    });
                    if !near_known {
                        tacnodes.push(pair);
                    }
                }
            }
        }
        let univalence_pass = winding == 1 && tacnodes.is_empty();
        // (iii) argument-principle windings of h = B′·conj(R(1/z̄)) around the
        // candidate poles inside the disc (roots of the unreduced denominator).
        let (pole_free_pass, candidate_windings) = self.check_pole_freeness();
        CharacterizationReport {
            univalence_pass,
            winding,
            min_boundary_separation: min_sep,
            tacnodes,
            self_reflect_residual: residual_ii,
            self_reflect_pass: residual_ii < 1e-10,
            pole_free_pass,
            candidate_windings,
        }
    }

    /// Refine a candidate double point by alternating golden-section on the
    /// two angles; returns the preimage pair when |ΔR| drops below 1e-8 with
    /// the preimages at least 1e-4 apart.
    fn refine_double_point(
        &self,
        t1: f64,
        t2: f64,
        window: f64,
    ) -> Option<(Complex64, Complex64)> {
        let dist = |a: f64, b: f64| -> f64 {
            let za = Complex64::from_polar(1.0, a);
            let zb = Complex64::from_polar(1.0, b);
            match (self.boundary_param(za), self.boundary_param(zb)) {
                (Ok(u), Ok(v)) => (u - v).norm(),
                _ => f64::INFINITY,
            }
        };
        let golden = |f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64| -> f64 {
            let phi = 0.618_033_988_749_894_9;
            let mut x1 = hi - phi * (hi - lo);
            let mut x2 = lo + phi * (hi - lo);
            let mut f1 = f(x1);
            let mut f2 = f(x2);
            for _ in 0..48 {
                if f1 < f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = f(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = f(x2);
                }
            }
            0.5 * (lo + hi)
        };
        let (mut a, mut b) = (t1, t2);
        for _ in 0..12 {
            let bb = b;
            a = golden(&|t| dist(t, bb), a - window, a + window);
            let aa = a;
            b = golden(&|t| dist(aa, t), b - window, b + window);
        }
        let za = Complex64::from_polar(1.0, a);
        let zb = Complex64::from_polar(1.0, b);
        // genuine double points keep their preimages apart; pairs that
        // collapse toward a common critical point are a cusp seen twice
        if (za - zb).norm() > 2e-2 && dist(a, b) < 1e-8 {
            Some((za, zb))
        } else {
            None
        }
    }

    fn check_pole_freeness(&self) -> (bool, Vec<(Complex64, i64)>) {
        // h(z) = B′(z)·conj(R(1/conj z)) must be analytic in the disc.
        let bn = Poly::from_roots(self.blaschke.zeros()).scale(self.blaschke.unimodular());
        let mut bd = Poly::constant(C1);
        for zk in self.blaschke.zeros() {
            bd = bd.mul(&Poly::new(vec![C1, -zk.conj()]));
        }
        let b_prime = RationalFn { num: bn, den: bd }.deriv();
        let r = match &self.boundary {
            Boundary::Poly { p, .. } => RationalFn::from_poly(p.clone()),
            Boundary::Rational { r, .. } => r.clone(),
        };
        let h = b_prime.mul(&r.conj_reflected());
        let mut candidates: Vec<Complex64> = poly_roots(h.den.coeffs())
            .into_iter()
            .filter(|r| r.norm() < 1.0 - 1e-6)
            .collect();
        // cluster nearby candidates
        candidates.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap());
        let mut centers: Vec<Complex64> = Vec::new();
        for c in candidates {
            if !centers.iter().any(|e| (e - c).norm() < 1e-6) {
                centers.push(c);
            }
        }
        let mut windings = Vec::new();
        let mut pass = true;
        for center in centers {
            // shrink the test circle below the distance to other candidates
            let mut rho: f64 = 1e-2;
            rho = rho.min(0.5 * (1.0 - center.norm()));
            for other in windings.iter().map(|(c, _): &(Complex64, i64)| *c) {
                let d = (other - center).norm();
                if d > 1e-12 {
                    rho = rho.min(0.4 * d);
                }
            }
            let wind_at = |radius: f64| -> Option<i64> {
                let m = 1024;
                let mut total = 0.0;
                let mut prev: Option<Complex64> = None;
                let mut first: Option<Complex64> = None;
                for k in 0..m {
                    let z = center + Complex64::from_polar(radius, TAU * k as f64 / m as f64);
                    let v = h.num.eval(z);
                    let dv = h.den.eval(z);
                    if dv.norm() < 1e-280 || !v.is_finite() {
                        return None;
                    }
                    let val = v / dv;
                    if val.norm() < 1e-250 {
                        return None;
                    }
                    if let Some(p) = prev {
                        total += (val / p).arg();
                    } else {
                        first = Some(val);
                    }
                    prev = Some(val);
                }
                if let (Some(p), Some(f)) = (prev, first) {
                    total += (f / p).arg();
                }
                Some((total / TAU).round() as i64)
            };
            let w = wind_at(rho).or_else(|| wind_at(rho * 0.37));
            match w {
                Some(w) => {
                    if w < 0 {
                        pass = false;
                    }
                    windings.push((center, w));
                }
                None => {
                    pass = false;
                    windings.push((center, i64::MIN));
                }
            }
        }
        (pass, windings)
    }
}

/// Outcome of the Theorem-5.5 characterization checks.
#[derive(Debug, Clone)]
pub struct CharacterizationReport {
    pub univalence_pass: bool,
    pub winding: i64,
    pub min_boundary_separation: f64,
    pub tacnodes: Vec<(Complex64, Complex64)>,
    pub self_reflect_residual: f64,
    pub self_reflect_pass: bool,
    pub pole_free_pass: bool,
    pub candidate_windings: Vec<(Complex64, i64)>,
}

impl CharacterizationReport {
    pub fn all_pass(&self) -> bool {
        self.univalence_pass && self.self_reflect_pass && self.pole_free_pass
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
    fn canonical_d2_has_gamma_2z_and_unit_disc_boundary() {
        let m = FrozenBoundaryModel::canonical(2).unwrap();
        // γ(z) = 2z
        let z = c(0.3, -0.4);
        assert!((m.gamma_eval(z).unwrap() - 2.0 * z).norm() < 1e-14);
        // R(z) = z on the circle
        let w = Complex64::from_polar(1.0, 1.234);
        assert!((m.boundary_param(w).unwrap() - w).norm() < 1e-14);
        assert!(m.cusps().is_empty());
    }

    #[test]
    fn canonical_d3_is_the_cardioid() {
        let m = FrozenBoundaryModel::canonical(3).unwrap();
        // γ = (3/2)(z + z²)
        let z = c(0.2, 0.1);
        assert!((m.gamma_eval(z).unwrap() - 1.5 * (z + z * z)).norm() < 1e-13);
        // R = z + z²/2
        let w = Complex64::from_polar(1.0, 0.7);
        assert!((m.boundary_param(w).unwrap() - (w + w * w / 2.0)).norm() < 1e-13);
        // cusp at angle π with value −1/2
        assert_eq!(m.cusps().len(), 1);
        let cusp = m.cusps()[0];
        assert!((cusp.angle - std::f64::consts::PI).abs() < 1e-10);
        assert!((cusp.point - c(-0.5, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn canonical_d4_cusps() {
        let m = FrozenBoundaryModel::canonical(4).unwrap();
        assert_eq!(m.cusps().len(), 2);
        let mut angles: Vec<f64> = m.cusps().iter().map(|c| c.angle).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((angles[0] - std::f64::consts::PI / 2.0).abs() < 1e-10);
        assert!((angles[1] - 1.5 * std::f64::consts::PI).abs() < 1e-10);
        for cusp in m.cusps() {
            // p(±i) = ±(2/3) i
            assert!((cusp.point.norm() - 2.0 / 3.0).abs() < 1e-10);
            assert!(cusp.point.re.abs() < 1e-10);
        }
    }

    #[test]
    fn cusp_census_d2_through_d8() {
        for d in 2..=8usize {
            let m = FrozenBoundaryModel::canonical(d).unwrap();
            assert_eq!(m.cusps().len(), d - 2, "degree {d}");
        }
    }

    #[test]
    fn kernel_matches_aztec_closed_form() {
        let m = FrozenBoundaryModel::canonical(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let z = Complex64::from_polar(0.9 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let w = Complex64::from_polar(0.9 * rng.gen::<f64>() + 1.0, TAU * rng.gen::<f64>());
            if (z + w).norm() < 1e-3 || (z - w).norm() < 1e-6 {
                continue;
            }
            let phi = m.phi_kernel(z, w).unwrap();
            let closed = 2.0 * z * w / (z + w);
            assert!((phi - closed).norm() < 1e-12, "z={z} w={w}");
            // symmetry
            assert!((phi - m.phi_kernel(w, z).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn kernel_diagonal_consistency() {
        let m = FrozenBoundaryModel::canonical(3).unwrap();
        let z = Complex64::from_polar(1.0, 0.9);
        let near = m.phi_kernel(z, z + c(1e-6, 0.0)).unwrap();
        let r = m.boundary_param(z).unwrap();
        assert!((near - r).norm() < 1e-5);
    }

    #[test]
    fn g_matches_aztec_closed_form() {
        let m = FrozenBoundaryModel::canonical(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..200 {
            let z = Complex64::from_polar(0.995 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let g = m.g(z).unwrap();
            let closed = 2.0 * z / (1.0 + z.norm_sqr());
            assert!((g - closed).norm() < 1e-12, "z={z}");
        }
        // g(0) = 0 whenever γ(0) = 0
        assert!(m.g(c(0.0, 0.0)).unwrap().norm() < 1e-15);
    }

    #[test]
    fn g_reflection_symmetry() {
        let m = FrozenBoundaryModel::canonical(5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let r = 0.3 + 0.6 * rng.gen::<f64>();
            let z = Complex64::from_polar(r, TAU * rng.gen::<f64>());
            let inside = m.g(z).unwrap();
            let outside = m.g(C1 / z.conj()).unwrap();
            assert!((inside - outside).norm() < 1e-10);
        }
    }

    #[test]
    fn g_satisfies_conjugate_beltrami_equation() {
        let m = FrozenBoundaryModel::canonical(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..200 {
            let z = Complex64::from_polar(0.9 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let (gz, gzb) = m.g_wirtinger(z).unwrap();
            let b = m.blaschke().eval(z).unwrap();
            let res = (gzb + b * gz.conj()).norm();
            assert!(res < 1e-10 * (1.0 + gz.norm()), "res {res} at {z}");
            // and the analytic derivatives agree with finite differences
            let (fz, fzb) = crate::quad::wirtinger_fd(&|w| m.g(w).unwrap(), z, 1e-6);
            assert!((fz - gz).norm() < 1e-6);
            assert!((fzb - gzb).norm() < 1e-6);
        }
    }

    #[test]
    fn gamma_from_circle_zeros_matches_canonical() {
        // d = 3 canonical: interior zero at 0, one circle zero at π, α = 3/2
        let b = BlaschkeProduct::monomial(3);
        let gamma = gamma_from_circle_zeros(&b, &[std::f64::consts::PI], c(1.5, 0.0), Some(c(0.0, 0.0)))
            .unwrap();
        let z = c(0.4, -0.2);
        assert!((gamma.eval(z).unwrap() - 1.5 * (z + z * z)).norm() < 1e-13);
    }

    #[test]
    fn gamma_from_circle_zeros_self_reflective() {
        let b = BlaschkeProduct::new(vec![c(0.4, 0.1), c(-0.2, 0.3), c(0.0, 0.0)], c(1.0, 0.0))
            .unwrap();
        let gamma =
            gamma_from_circle_zeros(&b, &[0.5, 2.0, 4.1], c(1.0, 0.4), None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let z = Complex64::from_polar(1.0, TAU * rng.gen::<f64>());
            let lhs = gamma.eval(z).unwrap();
            let rhs = b.eval(z).unwrap() * gamma.eval(z).unwrap().conj();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn gamma_arity_mismatch() {
        let b = BlaschkeProduct::monomial(3);
        assert!(matches!(
            gamma_from_circle_zeros(&b, &[0.5], c(1.0, 0.0), None),
            Err(Error::ArityMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn characterization_passes_for_canonical_models() {
        for d in [2usize, 3, 5, 7] {
            let m = FrozenBoundaryModel::canonical(d).unwrap();
            let report = m.check_characterization();
            assert!(report.univalence_pass, "univalence d={d}");
            assert!(
                report.self_reflect_residual < 1e-10,
                "residual {} d={d}",
                report.self_reflect_residual
            );
            assert!(report.pole_free_pass, "poles d={d}");
        }
    }

    #[test]
    fn characterization_fails_for_broken_gamma() {
        // B = z², γ = z³ violates self-reflectivity
        let b = BlaschkeProduct::monomial(2);
        let gamma = RationalFn::from_poly(Poly::new(vec![C0, C0, C0, C1]));
        let m = FrozenBoundaryModel::from_parts(b, gamma);
        let report = m.check_characterization();
        assert!(!report.self_reflect_pass);
        assert!(report.self_reflect_residual > 1.0);
    }

    #[test]
    fn tangent_identity_residuals() {
        // d = 2: B = z², τ = iz, −τ² = z² = B exactly
        let mut m2 = FrozenBoundaryModel::canonical(2).unwrap();
        m2.cusps = vec![];
        assert!(m2.tangent_identity_check(512, 1e-3).unwrap() < 1e-12);
        for d in [3usize, 6] {
            let m = FrozenBoundaryModel::canonical(d).unwrap();
            let res = m.tangent_identity_check(2048, 1e-3).unwrap();
            assert!(res < 1e-8, "residual {res} for d={d}");
        }
    }

    #[test]
    fn rotated_cardioid_cusp_at_angle_zero() {
        let (m, upm) = FrozenBoundaryModel::univalent_polynomial(3, &[0.0]).unwrap();
        assert_eq!(m.cusps().len(), 1);
        let a = m.cusps()[0].angle.rem_euclid(TAU);
        assert!(a < 1e-9 || (TAU - a) < 1e-9, "cusp angle {a}");
        // rotation equivariance: |p| on the circle matches the standard cardioid
        let std_model = FrozenBoundaryModel::canonical(3).unwrap();
        for k in 0..64 {
            let t = TAU * k as f64 / 64.0;
            let z = Complex64::from_polar(1.0, t);
            // rotate the parameter so the cusp angles align (π vs 0)
            let w = Complex64::from_polar(1.0, t + std::f64::consts::PI);
            let a = m.boundary_param(z).unwrap().norm();
            let b = std_model.boundary_param(w).unwrap().norm();
            assert!((a - b).abs() < 1e-10, "modulus mismatch at {t}: {a} vs {b}");
        }
        // coefficient identities of the univalent class
        let d = 3.0;
        let coeffs = upm.p.coeffs();
        assert!((coeffs[1].conj() - (d - 1.0) * coeffs[2]).norm() < 1e-12);
    }

    #[test]
    fn univalent_polynomial_self_inversive_derivative() {
        let (_, upm) = FrozenBoundaryModel::univalent_polynomial(5, &[0.4, 2.2, 4.4]).unwrap();
        let dp = upm.p.deriv();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let d = 5usize;
        for _ in 0..100 {
            let z = Complex64::from_polar(0.5 + rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let lhs = dp.eval(z);
            let rhs = z.powu(d as u32 - 2) * dp.eval(C1 / z.conj()).conj();
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn merged_critical_points_are_rejected() {
        // two cusp preimages pushed past tangency create a double point
        let result = FrozenBoundaryModel::univalent_polynomial(4, &[0.0, 0.05]);
        assert!(result.is_err(), "nearly-merged critical angles must fail");
    }

    #[test]
    fn local_convexity_between_cusps() {
        // the tangent argument is strictly increasing along each smooth arc,
        // and the total smooth turning is dπ (tangent winds once while √B
        // winds d/2 times, consistent with d−2 cusps)
        for d in [3usize, 5] {
            let m = FrozenBoundaryModel::canonical(d).unwrap();
            let n = 1000;
            let mut cusp_angles: Vec<f64> = m.cusps().iter().map(|c| c.angle.rem_euclid(TAU)).collect();
            cusp_angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut total_turn = 0.0;
            let segments: Vec<(f64, f64)> = (0..cusp_angles.len())
                .map(|i| {
                    let a = cusp_angles[i];
                    let b = if i + 1 < cusp_angles.len() {
                        cusp_angles[i + 1]
                    } else {
                        cusp_angles[0] + TAU
                    };
                    (a, b)
                })
                .collect();
            for (a, b) in segments {
                let margin = 2e-3 * (b - a);
                let mut prev: Option<Complex64> = None;
                for k in 0..=n {
                    let t = a + margin + (b - a - 2.0 * margin) * k as f64 / n as f64;
                    let z = Complex64::from_polar(1.0, t);
                    let tangent = Complex64::i() * z * m.boundary_deriv(z).unwrap();
                    if let Some(p) = prev {
                        let turn = (tangent / p).arg();
                        assert!(turn > 0.0, "tangent argument not increasing at {t} (d={d})");
                        total_turn += turn;
                    }
                    prev = Some(tangent);
                }
            }
            let expected = d as f64 * std::f64::consts::PI;
            assert!(
                (total_turn - expected).abs() < 0.1,
                "smooth turning {total_turn} vs {expected} (d={d})"
            );
        }
    }

    #[test]
    fn radial_flattening_exponent() {
        // |g(r z0) − g(z0)| ≍ (1−r)² at non-critical boundary points
        let m = FrozenBoundaryModel::canonical(3).unwrap();
        let z0 = Complex64::from_polar(1.0, 1.0); // away from the cusp at π
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let g0 = m.g(z0).unwrap();
        let mut r: f64 = 0.9;
        while r <= 0.999 {
            xs.push((1.0 - r).ln());
            ys.push((m.g(r * z0).unwrap() - g0).norm().ln());
            r += 0.009;
        }
        let slope = crate::quad::ls_slope(&xs, &ys);
        assert!((slope - 2.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn cusp_compression_exponents() {
        let m = FrozenBoundaryModel::canonical(3).unwrap();
        let cusp = m.cusps()[0];
        let z0 = cusp.preimage;
        let g0 = m.g(z0).unwrap();
        for sign in [1.0, -1.0] {
            let dir = Complex64::from_polar(1.0, sign * std::f64::consts::PI / 6.0);
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            let mut t: f64 = 1e-3;
            while t <= 1e-1 {
                let z = z0 * (1.0 - t * dir);
                xs.push(t.ln());
                ys.push((m.g(z).unwrap() - g0).norm().ln());
                t *= 1.5;
            }
            let slope = crate::quad::ls_slope(&xs, &ys);
            assert!((slope - 3.0).abs() < 0.15, "±π/6 slope {slope}");
        }
        // along the normal the exponent is 2
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut t: f64 = 1e-3;
        while t <= 1e-1 {
            let z = z0 * (1.0 - t);
            xs.push(t.ln());
            ys.push((m.g(z).unwrap() - g0).norm().ln());
            t *= 1.5;
        }
        let slope = crate::quad::ls_slope(&xs, &ys);
        assert!((slope - 2.0).abs() < 0.1, "normal slope {slope}");
    }
}
