//! Test problems: the Bessel exact solution, the cave model, plane waves and
//! one-dimensional Dirichlet problems, plus `J_0` and `J_1`.
//!
//! Problems are stated in second-order form
//! `-Laplace u - k^2 u = f`, `du/dn + i k u = g` and converted to the mixed
//! form used by the discretization with [`SecondOrder::to_mixed_form`].

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as c64;

use crate::error::{Error, Result};
use crate::hdg::{BoundaryField, Field, HelmholtzProblem};

/// Bessel function of the first kind of order zero.
pub fn bessel_j0(z: f64) -> f64 {
    bessel_pair(z).0
}

/// Bessel function of the first kind of order one.
pub fn bessel_j1(z: f64) -> f64 {
    bessel_pair(z).1
}

/// `(J_0(z), J_1(z))` for `z >= 0`; odd/even extension for negative `z`.
pub fn bessel_pair(z: f64) -> (f64, f64) {
    if z < 0.0 {
        let (a, b) = bessel_pair(-z);
        return (a, -b);
    }
    if z <= 2.0 {
        series(z)
    } else if z <= 30.0 {
        miller(z)
    } else {
        hankel(z)
    }
}

fn series(z: f64) -> (f64, f64) {
    let q = -0.25 * z * z;
    let (mut t0, mut t1) = (1.0, 0.5 * z);
    let (mut s0, mut s1) = (t0, t1);
    for k in 1..40 {
        let k = k as f64;
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        s0 += t0;
        s1 += t1;
        if t0.abs() < 1e-18 && t1.abs() < 1e-18 {
            break;
        }
    }
    (s0, s1)
}

/// Backward recurrence normalized by `J_0 + 2 sum J_2k = 1`.
fn miller(z: f64) -> (f64, f64) {
    let start = 2 * ((z + 20.0 + 4.0 * z.sqrt()) as usize / 2 + 1);
    let (mut next, mut cur) = (0.0, 1e-30);
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / z * cur - next;
        next = cur;
        cur = prev;
        // `cur` now holds J_{k-1}
        if k > 1 && (k - 1) % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    norm += cur;
    (cur / norm, next / norm)
}

/// Hankel asymptotic expansion, summed until the terms stop decreasing.
fn hankel(z: f64) -> (f64, f64) {
    let eval = |nu: f64| {
        let mu = 4.0 * nu * nu;
        let (mut p, mut q) = (1.0, 0.0);
        let mut term = 1.0;
        let mut last = f64::INFINITY;
        for k in 1..60 {
            let odd = (2 * k - 1) as f64;
            term *= (mu - odd * odd) / (k as f64 * 8.0 * z);
            if term.abs() >= last || term.abs() < 1e-17 {
                break;
            }
            last = term.abs();
            match k % 4 {
                1 => q += term,
                2 => p -= term,
                3 => q -= term,
                _ => p += term,
            }
        }
        let chi = z - (0.5 * nu + 0.25) * PI;
        (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
    };
    (eval(0.0), eval(1.0))
}

/// Wavenumber, source and impedance data of `-Laplace u - k^2 u = f`,
/// `du/dn + i k u = g`.
#[derive(Clone)]
pub struct SecondOrder {
    pub wavenumber: Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>,
    pub source: Field,
    pub boundary: BoundaryField,
}

impl SecondOrder {
    /// Mixed-form data with `f / (i k)` and `g / (i k)`, so that eliminating
    /// `q = -grad u / (i k)` recovers the second-order problem.
    pub fn to_mixed_form(&self, p: usize) -> HelmholtzProblem {
        let (k1, k2, k3) = (self.wavenumber.clone(), self.wavenumber.clone(), self.wavenumber.clone());
        let (f, g) = (self.source.clone(), self.boundary.clone());
        HelmholtzProblem::homogeneous(1.0, p)
            .with_wavenumber(move |x| k1(x))
            .with_source(move |x| f(x) / c64::new(0.0, k2(x)))
            .with_boundary(move |x, n| g(x, n) / c64::new(0.0, k3(x)))
    }
}

/// Radial problem on the unit square centred at the origin with source
/// `sin(k r) / r` and exact solution
/// `cos(k r) / k - e^{i k} / (k (J_0(k) + i J_1(k))) J_0(k r)`.
#[derive(Debug, Clone, Copy)]
pub struct BesselProblem {
    pub kappa: f64,
    coef: c64,
}

impl BesselProblem {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Config(format!("wavenumber must be positive, got {kappa}")));
        }
        let (j0, j1) = bessel_pair(kappa);
        let coef = c64::from_polar(1.0, kappa) / (kappa * c64::new(j0, j1));
        Ok(Self { kappa, coef })
    }

    pub fn exact(&self, x: [f64; 2]) -> c64 {
        let r = x[0].hypot(x[1]);
        let k = self.kappa;
        (k * r).cos() / k - self.coef * bessel_j0(k * r)
    }

    /// `grad u` of the exact solution.
    pub fn gradient(&self, x: [f64; 2]) -> [c64; 2] {
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            return [c64::default(); 2];
        }
        let k = self.kappa;
        let du = -(k * r).sin() + self.coef * k * bessel_j1(k * r);
        [du * (x[0] / r), du * (x[1] / r)]
    }

    /// `sin(k r) / r`, equal to `k` at the origin.
    pub fn source(&self, x: [f64; 2]) -> f64 {
        let r = x[0].hypot(x[1]);
        let kr = self.kappa * r;
        if kr < 1e-4 {
            self.kappa * (1.0 - kr * kr / 6.0)
        } else {
            kr.sin() / r
        }
    }

    /// `du/dn + i k u` for the outward normal `n`.
    pub fn boundary(&self, x: [f64; 2], n: [f64; 2]) -> c64 {
        let g = self.gradient(x);
        g[0] * n[0] + g[1] * n[1] + c64::new(0.0, self.kappa) * self.exact(x)
    }

    pub fn second_order(&self) -> SecondOrder {
        let (a, b, k) = (*self, *self, self.kappa);
        SecondOrder {
            wavenumber: Arc::new(move |_| k),
            source: Arc::new(move |x| c64::from(a.source(x))),
            boundary: Arc::new(move |x, n| b.boundary(x, n)),
        }
    }

    pub fn mixed(&self, p: usize) -> HelmholtzProblem {
        self.second_order().to_mixed_form(p)
    }
}

/// Plane wave `u = exp(i k d.x)` with `|d| = 1` and zero source.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWave {
    pub kappa: f64,
    pub direction: [f64; 2],
}

impl PlaneWave {
    pub fn new(kappa: f64, direction: [f64; 2]) -> Result<Self> {
        let len = direction[0].hypot(direction[1]);
        if !(len > 0.0 && kappa > 0.0) {
            return Err(Error::Config("plane wave needs a positive wavenumber and nonzero direction".into()));
        }
        Ok(Self { kappa, direction: [direction[0] / len, direction[1] / len] })
    }

    pub fn exact(&self, x: [f64; 2]) -> c64 {
        let d = self.direction;
        (c64::i() * self.kappa * (d[0] * x[0] + d[1] * x[1])).exp()
    }

    /// Mixed-form flux `q = -grad u / (i k) = -d u`.
    pub fn flux(&self, x: [f64; 2]) -> [c64; 2] {
        let u = self.exact(x);
        [-self.direction[0] * u, -self.direction[1] * u]
    }

    pub fn second_order(&self) -> SecondOrder {
        let w = *self;
        let k = self.kappa;
        SecondOrder {
            wavenumber: Arc::new(move |_| k),
            source: Arc::new(|_| c64::default()),
            boundary: Arc::new(move |x, n| {
                let d = w.direction;
                c64::new(0.0, k) * (1.0 + d[0] * n[0] + d[1] * n[1]) * w.exact(x)
            }),
        }
    }

    pub fn mixed(&self, p: usize) -> HelmholtzProblem {
        self.second_order().to_mixed_form(p)
    }
}

/// Axis-aligned box `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
}

impl Region {
    pub fn contains(&self, x: [f64; 2]) -> bool {
        (0..2).all(|d| x[d] >= self.lower[d] && x[d] <= self.upper[d])
    }

    pub fn area(&self) -> f64 {
        (self.upper[0] - self.lower[0]) * (self.upper[1] - self.lower[1])
    }
}

/// Piecewise-constant wavenumber `k_3 = q_2 k_2 = q_1 k_1` on the unit
/// square centred at the origin: `k_3` outside `middle`, `k_2` in `middle`
/// outside `inner`, `k_1` in `inner`. The source is the Gaussian
/// `exp(-(4 k_3 / pi)^2 |x|^2) / (i k_3)` in mixed form and `g = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaveProblem {
    pub kappa3: f64,
    pub q1: f64,
    pub q2: f64,
    pub middle: Region,
    pub inner: Region,
}

impl CaveProblem {
    /// Nested boxes of half-width 1/4 and 1/8 around the origin.
    pub fn new(kappa3: f64, q1: f64, q2: f64) -> Result<Self> {
        let cave = Self {
            kappa3,
            q1,
            q2,
            middle: Region { lower: [-0.25, -0.25], upper: [0.25, 0.25] },
            inner: Region { lower: [-0.125, -0.125], upper: [0.125, 0.125] },
        };
        cave.validate()?;
        Ok(cave)
    }

    pub fn with_regions(mut self, middle: Region, inner: Region) -> Result<Self> {
        self.middle = middle;
        self.inner = inner;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        for v in [self.kappa3, self.q1, self.q2] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("wavenumber and ratios must be positive, got {v}")));
            }
        }
        for r in [self.middle, self.inner] {
            if !(0..2).all(|d| -0.5 <= r.lower[d] && r.lower[d] < r.upper[d] && r.upper[d] <= 0.5) {
                return Err(Error::Config(format!("region {r:?} is not a box inside the domain")));
            }
        }
        Ok(())
    }

    /// `(k_1, k_2, k_3)`.
    pub fn wavenumbers(&self) -> (f64, f64, f64) {
        (self.kappa3 / self.q1, self.kappa3 / self.q2, self.kappa3)
    }

    /// Wavenumber at a point; points on region boundaries belong to the
    /// inner region. Meant for element centroids.
    pub fn wavenumber_at(&self, x: [f64; 2]) -> f64 {
        let (k1, k2, k3) = self.wavenumbers();
        if self.inner.contains(x) {
            k1
        } else if self.middle.contains(x) {
            k2
        } else {
            k3
        }
    }

    /// Rejects region boundaries that do not lie on lines of a mesh with `n`
    /// cells per side.
    pub fn check_alignment(&self, n: usize) -> Result<()> {
        for r in [self.middle, self.inner] {
            for c in r.lower.iter().chain(&r.upper) {
                let s = (c + 0.5) * n as f64;
                if (s - s.round()).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "region boundary {c} does not lie on a grid line of the {n} x {n} coarsest mesh"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn source(&self, x: [f64; 2]) -> c64 {
        let k = self.kappa3;
        let a = 4.0 * k / PI;
        c64::from((-(a * a) * (x[0] * x[0] + x[1] * x[1])).exp()) / c64::new(0.0, k)
    }

    pub fn mixed(&self, p: usize) -> HelmholtzProblem {
        let (c1, c2) = (*self, *self);
        HelmholtzProblem::homogeneous(self.kappa3, p)
            .with_wavenumber(move |x| c1.wavenumber_at(x))
            .with_source(move |x| c2.source(x))
    }
}

/// `-u'' - k^2 u = f` on `(a, b)` with homogeneous Dirichlet data, in the
/// mixed form `i k q + u' = 0`, `i k u + q' = f / (i k)`.
#[derive(Clone)]
pub struct Dirichlet1D {
    pub kappa: f64,
    pub interval: (f64, f64),
    pub source: Arc<dyn Fn(f64) -> c64 + Send + Sync>,
}

impl Dirichlet1D {
    pub fn new(kappa: f64, a: f64, b: f64) -> Result<Self> {
        if !(kappa > 0.0 && a < b) {
            return Err(Error::Config(format!("invalid 1D problem: k = {kappa}, ({a}, {b})")));
        }
        Ok(Self { kappa, interval: (a, b), source: Arc::new(|_| c64::default()) })
    }

    /// Second-order source, converted on evaluation.
    pub fn with_source(mut self, f: impl Fn(f64) -> c64 + Send + Sync + 'static) -> Self {
        self.source = Arc::new(f);
        self
    }

    pub fn mixed_source(&self, x: f64) -> c64 {
        (self.source)(x) / c64::new(0.0, self.kappa)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branches_agree_at_switch_points() {
        for z in [1.5, 2.0, 2.5] {
            let (a, b) = (series(z), miller(z));
            assert!((a.0 - b.0).abs() < 1e-14 && (a.1 - b.1).abs() < 1e-14, "z={z}");
        }
        for z in [25.0, 30.0, 35.0, 60.0] {
            let (a, b) = (miller(z), hankel(z));
            assert!((a.0 - b.0).abs() < 1e-13 && (a.1 - b.1).abs() < 1e-13, "z={z} {a:?} {b:?}");
        }
    }

    #[test]
    fn wronskian_like_derivative() {
        // J_0' = -J_1 by central differences
        for z in [0.7, 5.0, 17.0, 44.0, 300.0] {
            let h = 1e-5;
            let d = (bessel_j0(z + h) - bessel_j0(z - h)) / (2.0 * h);
            assert!((d + bessel_j1(z)).abs() < 1e-8, "z={z}");
        }
    }
}
