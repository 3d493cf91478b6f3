//! Small numerical utilities: adaptive Gauss–Kronrod quadrature,
//! Gauss–Legendre nodes, least-squares slope fits and finite-difference
//! Wirtinger derivatives.

use num_complex::Complex64;

/// 7-point Gauss nodes embedded in the 15-point Kronrod rule on [-1, 1].
const KRONROD_X: [f64; 8] = [
    0.000000000000000,
    0.207784955007898,
    0.405845151377397,
    0.586087235467691,
    0.741531185599394,
    0.864864423359769,
    0.949107912342759,
    0.991455371120813,
];
const KRONROD_W: [f64; 8] = [
    0.209482141084728,
    0.204432940075298,
    0.190350578064785,
    0.169004726639267,
    0.140653259715525,
    0.104790010322250,
    0.063092092629979,
    0.022935322010529,
];
const GAUSS_W: [f64; 4] = [
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = KRONROD_W[0] * fc;
    let mut gauss = GAUSS_W[0] * fc;
    for k in 1..8 {
        let x = h * KRONROD_X[k];
        let s = f(c - x) + f(c + x);
        kron += KRONROD_W[k] * s;
        if k % 2 == 0 {
            gauss += GAUSS_W[k / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod integration of `f` over [a, b] to absolute
/// tolerance `tol`. Bisects intervals until the embedded error estimate is
/// below the locally apportioned tolerance.
pub fn adaptive_gk<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, e) = gk15(f, a, b);
        if e <= tol || depth >= 48 {
            v
        } else {
            let c = 0.5 * (a + b);
            rec(f, a, c, 0.5 * tol, depth + 1) + rec(f, c, b, 0.5 * tol, depth + 1)
        }
    }
    if a == b {
        return 0.0;
    }
    rec(f, a, b, tol, 0)
}

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        xs[n - 1 - i] = x;
        ws[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (xs, ws)
}

/// Fixed-order Gauss–Legendre integral of `f` over [a, b].
pub fn gl_integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in nodes.0.iter().zip(nodes.1.iter()) {
        s += w * f(c + h * x);
    }
    s * h
}

/// Least-squares slope of y against x.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&a, &b) in x.iter().zip(y.iter()) {
        num += (a - mx) * (b - my);
        den += (a - mx) * (a - mx);
    }
    num / den
}

/// Finite-difference Wirtinger derivatives (f_z, f_zbar) of a complex field.
pub fn wirtinger_fd<F: Fn(Complex64) -> Complex64>(
    f: &F,
    z: Complex64,
    step: f64,
) -> (Complex64, Complex64) {
    let i = Complex64::i();
    let dx = f(z + step) - f(z - step);
    let dy = f(z + i * step) - f(z - i * step);
    let fz = (dx - i * dy) / (4.0 * step);
    let fzb = (dx + i * dy) / (4.0 * step);
    (fz, fzb)
}

/// Solve the dense system A x = b in place by Gaussian elimination with
/// partial pivoting. `a` is row-major n×n. Returns None when singular.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * x[k];
        }
        x[col] = s / a[col * n + col];
    }
    Some(x)
}

/// All complex roots of a polynomial (ascending coefficients) by the
/// Durand–Kerner simultaneous iteration. Intended for the modest-degree
/// polynomials arising from rational boundary parametrizations.
pub fn poly_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while let Some(last) = c.last() {
        if last.norm() < 1e-300 && c.len() > 1 {
            c.pop();
        } else {
            break;
        }
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = c[deg];
    let monic: Vec<Complex64> = c.iter().map(|a| a / lead).collect();
    let radius = 1.0
        + monic[..deg]
            .iter()
            .map(|a| a.norm())
            .fold(0.0f64, f64::max);
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64) / (deg as f64) + 0.4;
            0.7 * radius * Complex64::new(t.cos(), t.sin())
        })
        .collect();
    let eval = |z: Complex64| {
        let mut v = Complex64::new(0.0, 0.0);
        for a in monic.iter().rev() {
            v = v * z + a;
        }
        v
    };
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    den *= roots[i] - roots[j];
                }
            }
            if den.norm() < 1e-280 {
                continue;
            }
            let delta = eval(roots[i]) / den;
            roots[i] -= delta;
            moved = moved.max(delta.norm());
        }
        if moved < 1e-14 {
            break;
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomial_exactly() {
        let v = adaptive_gk(&|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        // antiderivative x^4/4 - x^2 + x
        let exact = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn gl_matches_gk_on_smooth_integrand() {
        let nodes = gauss_legendre(32);
        let a = gl_integrate(&|x: f64| (1.0 + x * x).ln(), 0.0, 2.0, &nodes);
        let b = adaptive_gk(&|x: f64| (1.0 + x * x).ln(), 0.0, 2.0, 1e-12);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn durand_kerner_finds_roots() {
        // (z-1)(z-2i)(z+3) = z^3 + (2 - 2i) z^2 + (-3 - 4i) z + ... expand numerically instead:
        let r1 = Complex64::new(1.0, 0.0);
        let r2 = Complex64::new(0.0, 2.0);
        let r3 = Complex64::new(-3.0, 0.0);
        // coefficients of (z-r1)(z-r2)(z-r3), ascending
        let c0 = -(r1 * r2 * r3);
        let c1 = r1 * r2 + r1 * r3 + r2 * r3;
        let c2 = -(r1 + r2 + r3);
        let roots = poly_roots(&[c0, c1, c2, Complex64::new(1.0, 0.0)]);
        for target in [r1, r2, r3] {
            assert!(roots.iter().any(|r| (r - target).norm() < 1e-9));
        }
    }

    #[test]
    fn wirtinger_of_analytic_function_has_zero_zbar() {
        let f = |z: Complex64| z * z * z + Complex64::new(0.5, -1.0) * z;
        let (fz, fzb) = wirtinger_fd(&f, Complex64::new(0.3, -0.2), 1e-5);
        let z = Complex64::new(0.3, -0.2);
        assert!((fz - (3.0 * z * z + Complex64::new(0.5, -1.0))).norm() < 1e-8);
        assert!(fzb.norm() < 1e-9);
    }
}
