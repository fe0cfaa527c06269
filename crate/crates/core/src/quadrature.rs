//! Gauss rules on the unit interval and the reference triangle, and
//! Gauss–Lobatto points for the trace basis.

use std::f64::consts::PI;

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        let s = if x > 0.0 {
            1.0
        } else {
            (-1.0f64).powi(n as i32 + 1)
        };
        s * (n * (n + 1)) as f64 / 2.0
    } else {
        n as f64 * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Gauss–Legendre rule with `n` points on `[0, 1]`, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut pts = Vec::with_capacity(n);
    let mut wts = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        pts.push(0.5 * (x + 1.0));
        wts.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (pts, wts)
}

/// Gauss–Lobatto–Legendre points for degree `p` (p + 1 points) on `[0, 1]`,
/// ascending, endpoints included.
pub fn gauss_lobatto_points(p: usize) -> Vec<f64> {
    assert!(p >= 1);
    let mut pts = vec![0.0; p + 1];
    pts[p] = 1.0;
    for i in 1..p {
        // interior points are the roots of P'_p
        let mut x = -(PI * i as f64 / p as f64).cos();
        for _ in 0..100 {
            let (pn, dpn) = legendre(p, x);
            // P''_p from the Legendre ODE
            let d2 = (2.0 * x * dpn - (p * (p + 1)) as f64 * pn) / (1.0 - x * x);
            let dx = dpn / d2;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        pts[i] = 0.5 * (x + 1.0);
    }
    pts
}

/// Quadrature rule on the reference triangle `(0,0), (1,0), (0,1)` in
/// barycentric-free coordinates `(xi, eta)`; weights sum to 1/2.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Collapsed tensor Gauss rule exact for total degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        let n = (degree + 2).div_ceil(2);
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in x.iter().zip(&w) {
            for (&v, &wv) in x.iter().zip(&w) {
                points.push([u, v * (1.0 - u)]);
                weights.push(wu * wv * (1.0 - u));
            }
        }
        Self { points, weights }
    }

    /// The collapsed rule averaged over the six vertex permutations, so that
    /// relabelling the triangle's vertices leaves the rule unchanged.
    pub fn symmetric(degree: usize) -> Self {
        let base = Self::with_degree(degree);
        let mut points = Vec::with_capacity(6 * base.points.len());
        let mut weights = Vec::with_capacity(6 * base.points.len());
        for (p, &w) in base.points.iter().zip(&base.weights) {
            let b = [1.0 - p[0] - p[1], p[0], p[1]];
            for [i, j] in [[1, 2], [2, 1], [0, 2], [2, 0], [0, 1], [1, 0]] {
                points.push([b[i], b[j]]);
                weights.push(w / 6.0);
            }
        }
        Self { points, weights }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_monomials() {
        for n in 1..8 {
            let (x, w) = gauss_legendre(n);
            for d in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                assert!((q - 1.0 / (d as f64 + 1.0)).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn lobatto_points_known_values() {
        assert_eq!(gauss_lobatto_points(1), vec![0.0, 1.0]);
        let p2 = gauss_lobatto_points(2);
        assert!((p2[1] - 0.5).abs() < 1e-15);
        let p3 = gauss_lobatto_points(3);
        let s = 0.5 * (1.0 - 1.0 / 5f64.sqrt());
        assert!((p3[1] - s).abs() < 1e-14 && (p3[2] - (1.0 - s)).abs() < 1e-14);
    }

    #[test]
    fn triangle_rule_exactness() {
        // int x^a y^b over the reference triangle = a! b! / (a + b + 2)!
        let fact = |n: usize| (1..=n).product::<usize>() as f64;
        for deg in 0..10 {
            for rule in [TriangleRule::with_degree(deg), TriangleRule::symmetric(deg)] {
                for a in 0..=deg {
                    for b in 0..=(deg - a) {
                        let q: f64 = rule
                            .points
                            .iter()
                            .zip(&rule.weights)
                            .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                            .sum();
                        let exact = fact(a) * fact(b) / fact(a + b + 2);
                        assert!((q - exact).abs() < 1e-14, "deg={deg} a={a} b={b}");
                    }
                }
            }
        }
    }
}
