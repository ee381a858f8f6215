//! Tensor-product quadrature rules: Gauss–Legendre on intervals, product
//! rules on the sphere, spherical shells and boxes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Scalar;

/// Default number of Gauss points per dimension.
pub const DEFAULT_ORDER: usize = 32;

#[derive(Clone, Debug)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// `n`-point rule on `[−1, 1]`; nodes by Newton iteration on `Pₙ`.
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::QuadratureOrder { order: n, min: 1 });
        }
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(GaussLegendre {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        })
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn on(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) * T::lit(0.5);
        let mid = (a + b) * T::lit(0.5);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * *x, half * *w))
    }

    pub fn integrate(&self, a: T, b: T, f: impl Fn(T) -> T) -> T {
        self.on(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule on the unit sphere: Gauss–Legendre in `cos θ` (split at the
/// equator) times the trapezoid rule in the azimuth. The polar axis is
/// configurable so that integrands depending on one coordinate are resolved
/// exactly.
#[derive(Clone, Debug)]
pub struct SphereQuadrature<T> {
    pub points: Vec<Vec3<T>>,
    pub weights: Vec<T>,
}

impl<T: Scalar> SphereQuadrature<T> {
    pub fn new(order: usize, polar_axis: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::QuadratureOrder { order, min: 2 });
        }
        let gl = GaussLegendre::<T>::new(order)?;
        let n_phi = 2 * order;
        let (a1, a2) = ((polar_axis + 1) % 3, (polar_axis + 2) % 3);
        let dphi = T::lit(2.0 * PI) / T::from_int(n_phi as i64);
        let mut points = Vec::with_capacity(2 * order * n_phi);
        let mut weights = Vec::with_capacity(2 * order * n_phi);
        for (lo, hi) in [(-T::one(), T::zero()), (T::zero(), T::one())] {
            for (c, wc) in gl.on(lo, hi) {
                let s = (T::one() - c * c).max(T::zero()).sqrt();
                for j in 0..n_phi {
                    let phi = dphi * (T::from_int(j as i64) + T::lit(0.5));
                    let mut p = Vec3::zero();
                    p.0[polar_axis] = c;
                    p.0[a1] = s * phi.cos();
                    p.0[a2] = s * phi.sin();
                    points.push(p);
                    weights.push(wc * dphi);
                }
            }
        }
        Ok(SphereQuadrature { points, weights })
    }

    /// `∫_{𝕊²} f dσ` (total area `4π`).
    pub fn integrate(&self, f: impl Fn(&Vec3<T>) -> T) -> T {
        self.points.iter().zip(&self.weights).map(|(p, w)| *w * f(p)).sum()
    }

    pub fn integrate_vec(&self, f: impl Fn(&Vec3<T>) -> Vec3<T>) -> Vec3<T> {
        self.points
            .iter()
            .zip(&self.weights)
            .fold(Vec3::zero(), |acc, (p, w)| acc + f(p).scale(*w))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `∫_{r_in<|x|<r_out} f dx` via Gauss–Legendre in radius times a sphere rule.
pub fn integrate_shell<T: Scalar>(
    r_in: T,
    r_out: T,
    order: usize,
    sphere: &SphereQuadrature<T>,
    f: impl Fn(&Vec3<T>) -> Vec3<T>,
) -> Result<Vec3<T>> {
    let gl = GaussLegendre::<T>::new(order)?;
    let mut acc = Vec3::zero();
    for (r, wr) in gl.on(r_in, r_out) {
        let shell = sphere.integrate_vec(|n| f(&n.scale(r)));
        acc += shell.scale(wr * r * r);
    }
    Ok(acc)
}

/// `(point, outward normal, weight)`.
pub type FaceNode<T> = (Vec3<T>, Vec3<T>, T);

/// Axis-aligned box `center + ∏[−hᵢ, hᵢ]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Box3<T> {
    pub center: Vec3<T>,
    pub half: [T; 3],
}

impl<T: Scalar> Box3<T> {
    pub fn centered(half: [T; 3]) -> Self {
        Box3 { center: Vec3::zero(), half }
    }

    pub fn volume(&self) -> T {
        T::lit(8.0) * self.half[0] * self.half[1] * self.half[2]
    }

    /// `∫_box f dz` by a tensor Gauss rule on `panels³` sub-boxes.
    pub fn integrate(&self, order: usize, panels: usize, f: impl Fn(&Vec3<T>) -> T) -> Result<T> {
        let gl = GaussLegendre::<T>::new(order)?;
        let panels = panels.max(1);
        let pf = T::from_int(panels as i64);
        let mut axes: Vec<Vec<(T, T)>> = Vec::with_capacity(3);
        for i in 0..3 {
            let lo = self.center.0[i] - self.half[i];
            let step = (self.half[i] + self.half[i]) / pf;
            let mut pts = Vec::with_capacity(panels * order);
            for p in 0..panels {
                let a = lo + step * T::from_int(p as i64);
                pts.extend(gl.on(a, a + step));
            }
            axes.push(pts);
        }
        let mut total = T::zero();
        for (x, wx) in &axes[0] {
            let mut plane = T::zero();
            for (y, wy) in &axes[1] {
                let mut line = T::zero();
                for (z, wz) in &axes[2] {
                    line += *wz * f(&Vec3([*x, *y, *z]));
                }
                plane += *wy * line;
            }
            total += *wx * plane;
        }
        Ok(total)
    }

    /// Quadrature nodes on the six faces.
    pub fn face_nodes(&self, order: usize, panels: usize) -> Result<Vec<FaceNode<T>>> {
        let gl = GaussLegendre::<T>::new(order)?;
        let panels = panels.max(1);
        let pf = T::from_int(panels as i64);
        let mut out = Vec::with_capacity(6 * (panels * order).pow(2));
        for axis in 0..3 {
            let (a, b) = ((axis + 1) % 3, (axis + 2) % 3);
            let line = |i: usize| -> Vec<(T, T)> {
                let lo = self.center.0[i] - self.half[i];
                let step = (self.half[i] + self.half[i]) / pf;
                (0..panels)
                    .flat_map(|p| {
                        let s = lo + step * T::from_int(p as i64);
                        gl.on(s, s + step).collect::<Vec<_>>()
                    })
                    .collect()
            };
            let (la, lb) = (line(a), line(b));
            for sign in [-T::one(), T::one()] {
                let mut normal = Vec3::zero();
                normal.0[axis] = sign;
                for (u, wu) in &la {
                    for (v, wv) in &lb {
                        let mut p = Vec3::zero();
                        p.0[axis] = self.center.0[axis] + sign * self.half[axis];
                        p.0[a] = *u;
                        p.0[b] = *v;
                        out.push((p, normal, *wu * *wv));
                    }
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_polynomial_exactness() {
        let gl = GaussLegendre::<f64>::new(5).unwrap();
        // Exact through degree 9.
        let v = gl.integrate(-1.0, 2.0, |x| x.powi(9) - 3.0 * x.powi(4) + 1.0);
        let exact = (2f64.powi(10) - 1.0) / 10.0 - 3.0 * (2f64.powi(5) + 1.0) / 5.0 + 3.0;
        assert!((v - exact).abs() < 1e-12);
        let s: f64 = gl.weights.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn gauss_legendre_odd_and_large_orders() {
        for n in [1, 2, 3, 7, 32, 64] {
            let gl = GaussLegendre::<f64>::new(n).unwrap();
            assert!((gl.integrate(0.0, 1.0, |x| x.exp()) - (1f64.exp() - 1.0)).abs() < if n > 6 { 1e-14 } else { 1e-1 });
        }
    }

    #[test]
    fn sphere_rule_moments() {
        let q = SphereQuadrature::<f64>::new(8, 2).unwrap();
        assert!((q.integrate(|_| 1.0) - 4.0 * PI).abs() < 1e-12);
        assert!((q.integrate(|p| p.0[0] * p.0[0]) - 4.0 * PI / 3.0).abs() < 1e-12);
        assert!(q.integrate(|p| p.0[0] * p.0[1]).abs() < 1e-13);
        let q2 = SphereQuadrature::<f64>::new(8, 1).unwrap();
        // Hemisphere indicator is resolved exactly by the equatorial split.
        let hemi = q2.integrate(|p| if p.0[1] > 0.0 { p.0[1] } else { 0.0 });
        assert!((hemi - PI).abs() < 1e-13);
        assert!(SphereQuadrature::<f64>::new(1, 2).is_err());
    }

    #[test]
    fn box_volume_and_faces() {
        let b = Box3 { center: Vec3::new(1.0f64, -2.0, 0.5), half: [1.0, 0.5, 0.25] };
        let v = b.integrate(3, 1, |_| 1.0).unwrap();
        assert!((v - b.volume()).abs() < 1e-13);
        // Divergence theorem for F = x: ∮ F·n = 3·vol.
        let flux: f64 = b.face_nodes(3, 2).unwrap().iter().map(|(p, n, w)| p.dot(n) * w).sum();
        assert!((flux - 3.0 * b.volume()).abs() < 1e-12);
    }
}
