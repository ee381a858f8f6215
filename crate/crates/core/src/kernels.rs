//! Closed-form Stokes fields: the Oseen tensor, the stresslet `∇Φ:A` with
//! its gradient and curl, and the explicit solution `w` for a force- and
//! torque-free unit sphere whose interior moves with strain `A`.
//!
//! Exterior to the unit ball
//!
//! ```text
//! w(x) = (5/2)(A:xx) x/|x|⁵ + R[A](x),
//! R[A](x) = Ax/|x|⁵ − (5/2)(A:xx) x/|x|⁷,
//! ```
//!
//! the first term being `−(20π/3)∇Φ(x):A`. The remainder is homogeneous of
//! degree −4 and equals `½∇((A:xx)/|x|⁵)`, so it is curl-free.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::StrainMatrix;
use crate::linalg::{Mat3, Vec3};
use crate::quadrature::{integrate_shell, SphereQuadrature};
use crate::scalar::Scalar;

/// Coefficient of the stresslet in `w`: `w = −(20π/3) ∇Φ:A + R[A]`.
pub const STRESSLET_STRENGTH: f64 = 20.0 * PI / 3.0;

fn nonzero<T: Scalar>(x: &Vec3<T>) -> Result<T> {
    let r2 = x.norm_sq();
    if r2 == T::zero() {
        Err(Error::SingularPoint)
    } else {
        Ok(r2)
    }
}

/// `Φ(x) = (1/8π)(Id/|x| + x⊗x/|x|³)`.
pub fn oseen_tensor<T: Scalar>(x: &Vec3<T>) -> Result<Mat3<T>> {
    let r2 = nonzero(x)?;
    let r = r2.sqrt();
    let c = T::one() / (T::lit(8.0) * T::PI());
    Ok((Mat3::identity().scale(T::one() / r) + x.outer(x).scale(T::one() / (r2 * r))).scale(c))
}

/// `(∇Φ(x):A)ᵢ = −(3/8π) xᵢ xⱼ xₖ Aⱼₖ / |x|⁵`.
pub fn stresslet_velocity<T: Scalar>(x: &Vec3<T>, a: &StrainMatrix<T>) -> Result<Vec3<T>> {
    let r2 = nonzero(x)?;
    let r5 = r2 * r2 * r2.sqrt();
    let c = -T::lit(3.0) / (T::lit(8.0) * T::PI());
    Ok(x.scale(c * a.contract(x) / r5))
}

/// `curl(∇Φ:A)(x) = −(3/4π)(Ax ∧ x)/|x|⁵`.
pub fn stresslet_curl<T: Scalar>(x: &Vec3<T>, a: &StrainMatrix<T>) -> Result<Vec3<T>> {
    let r2 = nonzero(x)?;
    let r5 = r2 * r2 * r2.sqrt();
    let c = -T::lit(3.0) / (T::lit(4.0) * T::PI());
    Ok(a.apply(x).cross(x).scale(c / r5))
}

/// `∂ₖ(∇Φ:A)ᵢ`, returned with row index `i` and column index `k`.
pub fn stresslet_gradient<T: Scalar>(x: &Vec3<T>, a: &StrainMatrix<T>) -> Result<Mat3<T>> {
    let r2 = nonzero(x)?;
    let r5 = r2 * r2 * r2.sqrt();
    let r7 = r5 * r2;
    let q = a.contract(x);
    let ax = a.apply(x);
    let c = -T::lit(3.0) / (T::lit(8.0) * T::PI());
    let mut g = Mat3::zero();
    for i in 0..3 {
        for k in 0..3 {
            let delta = if i == k { q / r5 } else { T::zero() };
            g.0[i][k] = c * (delta + T::lit(2.0) * x.0[i] * ax.0[k] / r5 - T::lit(5.0) * x.0[i] * x.0[k] * q / r7);
        }
    }
    Ok(g)
}

/// Velocity, gradient and curl of the stresslet at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelEvaluation<T> {
    pub velocity: Vec3<T>,
    pub gradient: Mat3<T>,
    pub curl: Vec3<T>,
}

pub fn stresslet_evaluation<T: Scalar>(x: &Vec3<T>, a: &StrainMatrix<T>) -> Result<KernelEvaluation<T>> {
    Ok(KernelEvaluation {
        velocity: stresslet_velocity(x, a)?,
        gradient: stresslet_gradient(x, a)?,
        curl: stresslet_curl(x, a)?,
    })
}

/// `R[A](x) = Ax/|x|⁵ − (5/2)(A:xx) x/|x|⁷`.
pub fn sphere_remainder<T: Scalar>(x: &Vec3<T>, a: &StrainMatrix<T>) -> Result<Vec3<T>> {
    let r2 = nonzero(x)?;
    let r5 = r2 * r2 * r2.sqrt();
    let r7 = r5 * r2;
    Ok(a.apply(x).scale(T::one() / r5) - x.scale(T::lit(2.5) * a.contract(x) / r7))
}

/// `∂ₖ R[A]ᵢ` (row `i`, column `k`); homogeneous of degree −5.
pub fn sphere_remainder_gradient<T: Scalar>(x: &Vec3<T>, a: &StrainMatrix<T>) -> Result<Mat3<T>> {
    let r2 = nonzero(x)?;
    let r5 = r2 * r2 * r2.sqrt();
    let r7 = r5 * r2;
    let r9 = r7 * r2;
    let q = a.contract(x);
    let ax = a.apply(x);
    let m = a.matrix();
    let (two, five, seven) = (T::lit(2.0), T::lit(5.0), T::lit(7.0));
    let mut g = Mat3::zero();
    for i in 0..3 {
        for k in 0..3 {
            let delta = if i == k { q / r7 } else { T::zero() };
            g.0[i][k] = m.0[i][k] / r5 - five * ax.0[i] * x.0[k] / r7
                - T::lit(2.5) * (delta + two * x.0[i] * ax.0[k] / r7 - seven * x.0[i] * x.0[k] * q / r9);
        }
    }
    Ok(g)
}

/// The single-sphere solution `w`: `Ax` in the closed unit ball, the
/// stresslet plus remainder outside.
pub fn sphere_solution_w<T: Scalar>(x: &Vec3<T>, a: &StrainMatrix<T>) -> Vec3<T> {
    let r2 = x.norm_sq();
    if r2 <= T::one() {
        return a.apply(x);
    }
    let r5 = r2 * r2 * r2.sqrt();
    let stresslet = x.scale(T::lit(2.5) * a.contract(x) / r5);
    stresslet + sphere_remainder(x, a).expect("x outside the unit ball is nonzero")
}

/// `∇w`, with `A` inside the unit ball.
pub fn sphere_solution_gradient<T: Scalar>(x: &Vec3<T>, a: &StrainMatrix<T>) -> Mat3<T> {
    if x.norm_sq() <= T::one() {
        return *a.matrix();
    }
    let s = stresslet_gradient(x, a).expect("nonzero");
    let r = sphere_remainder_gradient(x, a).expect("nonzero");
    s.scale(-T::lit(STRESSLET_STRENGTH)) + r
}

/// `curl w`: zero inside the ball and `5(Ax∧x)/|x|⁵` outside.
pub fn sphere_solution_curl<T: Scalar>(x: &Vec3<T>, a: &StrainMatrix<T>) -> Vec3<T> {
    let r2 = x.norm_sq();
    if r2 <= T::one() {
        return Vec3::zero();
    }
    let r5 = r2 * r2 * r2.sqrt();
    a.apply(x).cross(x).scale(T::lit(5.0) / r5)
}

/// Step used by the central-difference derivative fallbacks.
pub fn fd_step<T: Scalar>() -> T {
    T::eps().cbrt().max(T::lit(1e-5))
}

/// A velocity field on `ℝ³`. Gradient and curl default to central differences.
pub trait VelocityField<T: Scalar>: Sync {
    fn velocity(&self, x: &Vec3<T>) -> Vec3<T>;

    fn gradient(&self, x: &Vec3<T>) -> Mat3<T> {
        central_gradient(|p| self.velocity(p), x, fd_step())
    }

    fn curl(&self, x: &Vec3<T>) -> Vec3<T> {
        self.gradient(x).curl_of_gradient()
    }

    fn evaluate(&self, x: &Vec3<T>) -> KernelEvaluation<T> {
        KernelEvaluation { velocity: self.velocity(x), gradient: self.gradient(x), curl: self.curl(x) }
    }
}

/// Central-difference Jacobian, row `i` = component, column `k` = direction.
pub fn central_gradient<T: Scalar>(f: impl Fn(&Vec3<T>) -> Vec3<T>, x: &Vec3<T>, h: T) -> Mat3<T> {
    let mut g = Mat3::zero();
    for k in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp.0[k] += h;
        xm.0[k] -= h;
        let d = (f(&xp) - f(&xm)).scale(T::one() / (h + h));
        for i in 0..3 {
            g.0[i][k] = d.0[i];
        }
    }
    g
}

/// Central-difference divergence.
pub fn central_divergence<T: Scalar>(f: impl Fn(&Vec3<T>) -> Vec3<T>, x: &Vec3<T>, h: T) -> T {
    central_gradient(f, x, h).trace()
}

/// The explicit sphere solution as a field with analytic derivatives.
#[derive(Clone, Copy, Debug)]
pub struct SphereSolution<T> {
    pub strain: StrainMatrix<T>,
}

impl<T: Scalar> VelocityField<T> for SphereSolution<T> {
    fn velocity(&self, x: &Vec3<T>) -> Vec3<T> {
        sphere_solution_w(x, &self.strain)
    }
    fn gradient(&self, x: &Vec3<T>) -> Mat3<T> {
        sphere_solution_gradient(x, &self.strain)
    }
    fn curl(&self, x: &Vec3<T>) -> Vec3<T> {
        sphere_solution_curl(x, &self.strain)
    }
}

/// Any closure `x ↦ u(x)`, differentiated numerically.
pub struct FnField<F>(pub F);

impl<T: Scalar, F: Fn(&Vec3<T>) -> Vec3<T> + Sync> VelocityField<T> for FnField<F> {
    fn velocity(&self, x: &Vec3<T>) -> Vec3<T> {
        (self.0)(x)
    }
}

/// Average of `curl u` over the ball `B_R`, `R ≥ 1`.
///
/// The unit ball and the shell `1 < |x| < R` are integrated separately so
/// that the quadrature never straddles the particle surface, where `∇w`
/// jumps.
pub fn ball_average_curl<T: Scalar>(field: &impl VelocityField<T>, radius: T, order: usize) -> Result<Vec3<T>> {
    if order < 2 {
        return Err(Error::QuadratureOrder { order, min: 2 });
    }
    if !(radius >= T::one()) {
        return Err(Error::Domain(format!("ball radius {radius} must be at least 1")));
    }
    let sphere = SphereQuadrature::new(order, 2)?;
    let curl = |x: &Vec3<T>| field.curl(x);
    let mut total = integrate_shell(T::zero(), T::one(), order, &sphere, curl)?;
    if radius > T::one() {
        total += integrate_shell(T::one(), radius, order, &sphere, curl)?;
    }
    let volume = T::lit(4.0 / 3.0) * T::PI() * radius * radius * radius;
    Ok(total.scale(T::one() / volume))
}
