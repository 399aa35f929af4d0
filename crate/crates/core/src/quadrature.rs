//! Gauss–Jacobi rules and collapsed-coordinate rules on simplices.
//!
//! Nodes and weights are computed once with the Golub–Welsch algorithm; the
//! simplex rules use the Duffy collapse so that a rule with `n` points per
//! direction integrates polynomials of total degree `2n − 1` exactly.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

/// A 1-D rule on `[0, 1]` for the weight `(1 − u)^α`.
#[derive(Debug, Clone)]
pub struct Rule1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Gauss–Jacobi rule with `n` points on `[0, 1]` for the weight `(1 − u)^alpha`.
pub fn gauss_jacobi01(n: usize, alpha: u32) -> Rule1D {
    assert!(n >= 1);
    let a = alpha as f64;
    // Jacobi polynomials P^{(a,0)} on [-1, 1]: recurrence coefficients.
    let b = 0.0;
    let mut jac = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        jac[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let s = 2.0 * m + a + b;
            let num = 4.0 * m * (m + a) * (m + b) * (m + a + b);
            let den = s * s * (s + 1.0) * (s - 1.0);
            let off = (num / den).sqrt();
            jac[(k, k + 1)] = off;
            jac[(k + 1, k)] = off;
        }
    }
    // μ0 = ∫_{-1}^{1} (1-x)^a dx = 2^{a+1}/(a+1)
    let mu0 = 2f64.powf(a + 1.0) / (a + 1.0);
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    // Map x ∈ [-1,1] → u = (1+x)/2 ; (1-u)^a du = 2^{-a-1} (1-x)^a dx.
    let scale = 2f64.powf(-a - 1.0);
    Rule1D {
        nodes: pairs.iter().map(|p| 0.5 * (1.0 + p.0)).collect(),
        weights: pairs.iter().map(|p| p.1 * scale).collect(),
    }
}

/// Quadrature point on a simplex: barycentric coordinates and a weight that
/// sums to 1 over the rule (multiply by the simplex measure).
#[derive(Debug, Clone, Copy)]
pub struct SimplexPoint<const N: usize> {
    pub bary: [f64; N],
    pub weight: f64,
}

/// Collapsed Gauss rule on the reference triangle, exact for degree `2n − 1`.
pub fn triangle_rule(n: usize) -> Vec<SimplexPoint<3>> {
    let gu = gauss_jacobi01(n, 1);
    let gv = gauss_jacobi01(n, 0);
    let mut out = Vec::with_capacity(n * n);
    for (u, wu) in gu.nodes.iter().zip(&gu.weights) {
        for (v, wv) in gv.nodes.iter().zip(&gv.weights) {
            let x = *u;
            let y = v * (1.0 - u);
            // reference area 1/2 → normalized weights sum to 1
            out.push(SimplexPoint {
                bary: [1.0 - x - y, x, y],
                weight: 2.0 * wu * wv,
            });
        }
    }
    out
}

/// Collapsed Gauss rule on the reference tetrahedron, exact for degree `2n − 1`.
pub fn tet_rule(n: usize) -> Vec<SimplexPoint<4>> {
    let gu = gauss_jacobi01(n, 2);
    let gv = gauss_jacobi01(n, 1);
    let gw = gauss_jacobi01(n, 0);
    let mut out = Vec::with_capacity(n * n * n);
    for (u, wu) in gu.nodes.iter().zip(&gu.weights) {
        for (v, wv) in gv.nodes.iter().zip(&gv.weights) {
            for (w, ww) in gw.nodes.iter().zip(&gw.weights) {
                let x = *u;
                let y = v * (1.0 - u);
                let z = w * (1.0 - u) * (1.0 - v);
                out.push(SimplexPoint {
                    bary: [1.0 - x - y - z, x, y, z],
                    weight: 6.0 * wu * wv * ww,
                });
            }
        }
    }
    out
}

/// Triangle rule exact to degree 7 (16 points); enough for cubic products of
/// quadratic boundary fields.
pub fn triangle_deg7() -> &'static [SimplexPoint<3>] {
    static R: OnceLock<Vec<SimplexPoint<3>>> = OnceLock::new();
    R.get_or_init(|| triangle_rule(4))
}

/// Tetrahedron rule exact to degree 5 (27 points); enough for the trilinear
/// convection forms of quadratic velocities.
pub fn tet_deg5() -> &'static [SimplexPoint<4>] {
    static R: OnceLock<Vec<SimplexPoint<4>>> = OnceLock::new();
    R.get_or_init(|| tet_rule(3))
}

/// Tetrahedron rule exact to degree 7, used for error norms.
pub fn tet_deg7() -> &'static [SimplexPoint<4>] {
    static R: OnceLock<Vec<SimplexPoint<4>>> = OnceLock::new();
    R.get_or_init(|| tet_rule(4))
}

/// Gauss–Legendre nodes/weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Rule1D {
    let r = gauss_jacobi01(n, 0);
    Rule1D {
        nodes: r.nodes.iter().map(|u| a + (b - a) * u).collect(),
        weights: r.weights.iter().map(|w| w * (b - a)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    #[test]
    fn legendre_integrates_monomials() {
        let r = gauss_legendre(5, 0.0, 1.0);
        for p in 0..10 {
            let s: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(p)).sum();
            assert!((s - 1.0 / (p as f64 + 1.0)).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn triangle_monomials() {
        // ∫_T x^a y^b = a! b! / (a+b+2)!
        for a in 0..5u32 {
            for b in 0..(8 - a) {
                let exact = factorial(a) * factorial(b) / factorial(a + b + 2);
                let s: f64 = triangle_deg7()
                    .iter()
                    .map(|q| 0.5 * q.weight * q.bary[1].powi(a as i32) * q.bary[2].powi(b as i32))
                    .sum();
                assert!((s - exact).abs() < 1e-14, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn tet_monomials() {
        // ∫_T x^a y^b z^c = a! b! c! / (a+b+c+3)!
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                for c in 0..=(5 - a - b) {
                    let exact = factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
                    let s: f64 = tet_deg5()
                        .iter()
                        .map(|q| {
                            q.weight / 6.0
                                * q.bary[1].powi(a as i32)
                                * q.bary[2].powi(b as i32)
                                * q.bary[3].powi(c as i32)
                        })
                        .sum();
                    assert!((s - exact).abs() < 1e-15, "{a} {b} {c}");
                }
            }
        }
    }
}
