//! Angular velocity of a sphere at the origin of a periodic array of
//! identical spheres in a strain `A`.
//!
//! To leading order in the radius the disturbance is the renormalized image
//! sum `ũ(x) = Σ_y [w(x−y) − ⨍_{Q_y} w]` of stresslets, and the rotation rate
//! is `ω = ½ curl ũ(0)`. On a cubic lattice this vanishes by symmetry. On the
//! anisotropic lattice `(4L, 2L, 2L)ℤ³` with `A = e₁⊗e₂ + e₂⊗e₁` only the third
//! component survives and `(curl ũ(0))₃ = 5c₀/L³`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    apply_symmetry, canonical_strain, shell_ordered_indices, LatticeSpec, StrainMatrix, SymmetryRotation,
    TorusGeometry,
};
use crate::kernels::{sphere_remainder_gradient, stresslet_gradient, stresslet_velocity, STRESSLET_STRENGTH};
use crate::lattice_sums::{c0_prime_interval, BoundedValue};
use crate::linalg::{Mat3, Vec3};
use crate::quadrature::{Box3, GaussLegendre, SphereQuadrature};
use crate::scalar::Scalar;
use crate::summation::{reduce_arrays, Reduction};

/// `ω = ½ curl u(0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngularVelocity<T> {
    pub omega: Vec3<T>,
}

/// `curl ũ(0)` componentwise, each with its rigorous interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OriginCurl<T> {
    pub components: [BoundedValue<T>; 3],
}

impl<T: Scalar> OriginCurl<T> {
    pub fn zero() -> Self {
        OriginCurl { components: [BoundedValue::exact(T::zero()); 3] }
    }

    pub fn estimate(&self) -> Vec3<T> {
        Vec3(self.components.map(|c| c.estimate))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum LatticeShape<T> {
    Cubic,
    /// Generators `(2s, s, s)`.
    Anisotropic(T),
}

fn classify<T: Scalar>(lattice: &LatticeSpec<T>) -> Result<LatticeShape<T>> {
    let [g1, g2, g3] = lattice.generators();
    if lattice.is_cubic() {
        Ok(LatticeShape::Cubic)
    } else if g2 == g3 && g1 == g2 + g2 {
        Ok(LatticeShape::Anisotropic(g2))
    } else {
        Err(Error::UnsupportedStrain(format!(
            "no closed form for lattice generators ({g1}, {g2}, {g3})"
        )))
    }
}

fn is_negligible<T: Scalar>(x: T, scale: T) -> bool {
    x.abs() <= T::lit(16.0) * T::eps() * scale
}

/// `5 Σ_{0<|y|∞≤radius} (Ay∧y)/|y|⁵`, the truncated image sum for `curl ũ(0)`.
pub fn truncated_curl_sum<T: Scalar>(
    lattice: &LatticeSpec<T>,
    a: &StrainMatrix<T>,
    radius: T,
    mode: Reduction,
) -> Vec3<T> {
    let idx = shell_ordered_indices(lattice, radius);
    let s = reduce_arrays(
        idx.len(),
        |i| {
            let y = lattice.point(idx[i]);
            let r2 = y.norm_sq();
            let r5 = r2 * r2 * r2.sqrt();
            a.apply(&y).cross(&y).scale(T::one() / r5).0
        },
        mode,
    );
    Vec3(s).scale(T::lit(5.0))
}

/// `curl ũ(0)` with intervals from the truncation level `k ≥ 2`.
///
/// Supported strains are those in the span of the lattice-symmetry
/// conjugates of the canonical strain: off-diagonal strains on a cubic
/// lattice (all giving zero), and `a₁₂(e₁⊗e₂+e₂⊗e₁) + a₁₃(e₁⊗e₃+e₃⊗e₁)` on an
/// anisotropic lattice. Components forced to vanish by symmetry are exact
/// zeros.
pub fn curl_tilde_u_origin<T: Scalar>(
    lattice: &LatticeSpec<T>,
    a: &StrainMatrix<T>,
    k: u32,
    mode: Reduction,
) -> Result<OriginCurl<T>> {
    let shape = classify(lattice)?;
    let m = a.matrix();
    let scale = m.max_abs();
    if (0..3).any(|i| !is_negligible(m.0[i][i], scale)) {
        return Err(Error::UnsupportedStrain("diagonal strains are not conjugate to the canonical strain".into()));
    }
    let s = match shape {
        LatticeShape::Cubic => {
            if k < 2 {
                return Err(Error::Domain(format!("truncation level k must be at least 2, got {k}")));
            }
            return Ok(OriginCurl::zero());
        }
        LatticeShape::Anisotropic(s) => s,
    };
    if !is_negligible(m.0[1][2], scale) {
        return Err(Error::UnsupportedStrain(
            "an e₂–e₃ shear is not conjugate to the canonical strain on this lattice".into(),
        ));
    }
    // Canonical value on the (2, 1, 1) lattice, rescaled by homogeneity.
    let c = c0_prime_interval::<T>(k, mode)?.scale(-T::lit(5.0) / (s * s * s));
    // curl(SᵀA₀S) = Sᵀ curl(A₀) for the conjugate carrying A₀ to e₁⊗e₃+e₃⊗e₁.
    let target = StrainMatrix::<T>::new(Mat3::from_f64([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]))?;
    let conj = SymmetryRotation::lattice_group(lattice)
        .into_iter()
        .find(|g| apply_symmetry(g, &canonical_strain::<T>()) == target)
        .ok_or(Error::NotALatticeSymmetry)?;
    let image = conj.transpose().to_mat::<T>().mul_vec(&Vec3::unit(2));
    let (a12, a13) = (m.0[0][1], m.0[0][2]);
    let mut components = [BoundedValue::exact(T::zero()); 3];
    for (j, comp) in components.iter_mut().enumerate() {
        let coef = a13 * image.0[j] + if j == 2 { a12 } else { T::zero() };
        if coef != T::zero() {
            *comp = c.scale(coef);
        }
    }
    Ok(OriginCurl { components })
}

/// Leading-order angular velocity `½R³ curl ũ(0)` of a sphere of radius `R`
/// in the torus, for `0 < R < ½`.
pub fn angular_velocity_torus<T: Scalar>(
    torus: &TorusGeometry<T>,
    a: &StrainMatrix<T>,
    radius: T,
    k: u32,
    mode: Reduction,
) -> Result<AngularVelocity<T>> {
    if !(radius > T::zero() && radius < T::lit(0.5)) {
        return Err(Error::Domain(format!("radius {radius} must lie in (0, 1/2)")));
    }
    let curl = curl_tilde_u_origin(&torus.lattice(), a, k, mode)?.estimate();
    Ok(AngularVelocity { omega: curl.scale(T::lit(0.5) * radius * radius * radius) })
}

/// Discrepancies of the identities `T(SᵀAS) = Sᵀ T(A)` and `T(−A) = −T(A)`
/// for the truncated sums `T` at level `k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport<T> {
    pub conjugation: T,
    pub negation: T,
    /// `T(A)` itself; zero for any `S` with `SᵀAS = −A` that fixes the axis.
    pub curl: Vec3<T>,
}

pub fn symmetry_relation_check<T: Scalar>(
    lattice: &LatticeSpec<T>,
    s: &SymmetryRotation,
    a: &StrainMatrix<T>,
    k: u32,
    mode: Reduction,
) -> Result<SymmetryReport<T>> {
    if !s.preserves(lattice) {
        return Err(Error::NotALatticeSymmetry);
    }
    let g = lattice.generators();
    let radius = T::from_int(2 * k as i64) * g[0].min(g[1]).min(g[2]);
    let base = truncated_curl_sum(lattice, a, radius, mode);
    let conj = truncated_curl_sum(lattice, &apply_symmetry(s, a), radius, mode);
    let rotated = s.transpose().to_mat::<T>().mul_vec(&base);
    let neg = truncated_curl_sum(lattice, &a.negated(), radius, mode);
    Ok(SymmetryReport {
        conjugation: (conj - rotated).max_abs(),
        negation: (neg + base).max_abs(),
        curl: base,
    })
}

/// Renormalized periodic stresslet field on the anisotropic lattice
/// `(4L, 2L, 2L)ℤ³`, images truncated to `|n|∞ ≤ K` cells.
///
/// `∇ũ(x) = −(20π/3)[Σ_{y≠0} ∇v(x−y) + |Q|⁻¹ ∮_{∂Box} v(x−z)⊗n dS]` with
/// `v = ∇Φ:A` and `Box` the union of all cells; the surface term is the
/// gradient of the subtracted cell averages. Surviving truncation error decays
/// like `K⁻⁴` because cube averages of harmonic functions match their centre
/// values to fourth order.
pub struct PeriodicStresslet<T> {
    strain: StrainMatrix<T>,
    images: Vec<Vec3<T>>,
    faces: Vec<(Vec3<T>, Vec3<T>, T)>,
    inv_cell_volume: T,
}

impl<T: Scalar> PeriodicStresslet<T> {
    pub fn new(l: T, a: StrainMatrix<T>, truncation: u32, face_order: usize) -> Result<Self> {
        if truncation < 1 {
            return Err(Error::Domain("image truncation must be at least 1".into()));
        }
        let lattice = LatticeSpec::anisotropic(l)?;
        let k = truncation as i64;
        let mut images = Vec::with_capacity((2 * k as usize + 1).pow(3));
        for i in -k..=k {
            for j in -k..=k {
                for m in -k..=k {
                    if (i, j, m) != (0, 0, 0) {
                        images.push(lattice.point([i, j, m]));
                    }
                }
            }
        }
        let reach = T::from_int(k) + T::lit(0.5);
        let half = lattice.generators().map(|g| g * reach);
        let faces = Box3::centered(half).face_nodes(face_order, 4)?;
        Ok(PeriodicStresslet { strain: a, images, faces, inv_cell_volume: T::one() / lattice.cell_volume() })
    }

    /// `∇ũ(x)`, row = component, column = direction; `|x|` must stay below
    /// the nearest image distance.
    pub fn gradient(&self, x: &Vec3<T>) -> Mat3<T> {
        let mut sum = Mat3::zero();
        for y in &self.images {
            sum += stresslet_gradient(&(*x - *y), &self.strain).expect("images avoid x");
        }
        let mut surface = Mat3::zero();
        for (z, n, w) in &self.faces {
            let v = stresslet_velocity(&(*x - *z), &self.strain).expect("faces avoid x");
            surface += v.outer(n).scale(*w);
        }
        (sum + surface.scale(self.inv_cell_volume)).scale(-T::lit(STRESSLET_STRENGTH))
    }

    /// `∇(ū − ũ)(x) − A = Σ_{y≠0} ∇R[A](x−y)`.
    pub fn remainder_gradient(&self, x: &Vec3<T>) -> Mat3<T> {
        let mut sum = Mat3::zero();
        for y in &self.images {
            sum += sphere_remainder_gradient(&(*x - *y), &self.strain).expect("images avoid x");
        }
        sum
    }
}

/// Deterministic quasi-random points in the closed unit ball: a Halton
/// sequence in bases 2, 3, 5 on `[−1,1]³`, rejected outside the ball.
pub fn ball_sample_points<T: Scalar>(count: usize) -> Vec<Vec3<T>> {
    fn radical_inverse(mut i: u64, base: u64) -> f64 {
        let mut f = 1.0;
        let mut r = 0.0;
        while i > 0 {
            f /= base as f64;
            r += f * (i % base) as f64;
            i /= base;
        }
        r
    }
    let mut out = Vec::with_capacity(count);
    let mut i = 1u64;
    while out.len() < count {
        let p = [2, 3, 5].map(|b| 2.0 * radical_inverse(i, b) - 1.0);
        if p.iter().map(|c| c * c).sum::<f64>() <= 1.0 {
            out.push(Vec3::from_f64(p));
        }
        i += 1;
    }
    out
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_loglog_slope<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::SizeMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(Error::InsufficientData { need: 2, got: x.len() });
    }
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let n = T::from_int(x.len() as i64);
    let mx = lx.iter().copied().sum::<T>() / n;
    let my = ly.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (*a - mx) * (*b - my);
        sxx += (*a - mx) * (*a - mx);
    }
    Ok(sxy / sxx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProbeReport<T> {
    pub box_sizes: Vec<T>,
    /// `‖∇(ū−ũ)−A‖`, `‖∇ũ−∇ũ(0)‖`, `‖∇ũ‖`, each a max over the sample points.
    pub norms: [Vec<T>; 3],
    pub fitted_slopes: [T; 3],
    /// `curl ũ(0)` at each `L`.
    pub origin_curl: Vec<Vec3<T>>,
}

#[derive(Clone, Copy, Debug)]
pub struct DecayProbeOptions {
    pub samples: usize,
    pub truncation: u32,
    pub face_order: usize,
}

impl Default for DecayProbeOptions {
    fn default() -> Self {
        DecayProbeOptions { samples: 512, truncation: 4, face_order: 8 }
    }
}

/// Sup norms over the unit ball of the three fields controlled by the
/// decay estimates, for each box size, with fitted log-log slopes.
pub fn decay_probe<T: Scalar>(l_values: &[T], opts: DecayProbeOptions) -> Result<DecayProbeReport<T>> {
    if l_values.len() < 4 {
        return Err(Error::InsufficientData { need: 4, got: l_values.len() });
    }
    if let Some(l) = l_values.iter().find(|l| !(**l >= T::lit(4.0))) {
        return Err(Error::Domain(format!("box size {l} must be at least 4")));
    }
    if opts.samples == 0 {
        return Err(Error::InsufficientData { need: 1, got: 0 });
    }
    let points = ball_sample_points::<T>(opts.samples);
    let mut norms: [Vec<T>; 3] = Default::default();
    let mut origin_curl = Vec::with_capacity(l_values.len());
    for &l in l_values {
        let field = PeriodicStresslet::new(l, canonical_strain(), opts.truncation, opts.face_order)?;
        let g0 = field.gradient(&Vec3::zero());
        origin_curl.push(g0.curl_of_gradient());
        let per_point: Vec<[T; 3]> = points
            .par_iter()
            .map(|x| {
                let g = field.gradient(x);
                [field.remainder_gradient(x).norm(), (g - g0).norm(), g.norm()]
            })
            .collect();
        for (j, series) in norms.iter_mut().enumerate() {
            series.push(per_point.iter().fold(T::zero(), |m, p| m.max(p[j])));
        }
    }
    let fitted_slopes = [
        fit_loglog_slope(l_values, &norms[0])?,
        fit_loglog_slope(l_values, &norms[1])?,
        fit_loglog_slope(l_values, &norms[2])?,
    ];
    Ok(DecayProbeReport { box_sizes: l_values.to_vec(), norms, fitted_slopes, origin_curl })
}

/// `‖A − Dū‖_{L²(B)}`, `D` the symmetric gradient, by Gauss quadrature in the
/// radius and a product rule on spheres.
pub fn dbar_u_deficit<T: Scalar>(l: T, truncation: u32, order: usize) -> Result<T> {
    if !(l >= T::lit(4.0)) {
        return Err(Error::Domain(format!("box size {l} must be at least 4")));
    }
    let field = PeriodicStresslet::new(l, canonical_strain(), truncation, 8)?;
    let sphere = SphereQuadrature::<T>::new(order, 2)?;
    let radial = GaussLegendre::<T>::new(order)?;
    let nodes: Vec<(Vec3<T>, T)> = radial
        .on(T::zero(), T::one())
        .flat_map(|(r, wr)| {
            sphere.points.iter().zip(&sphere.weights).map(move |(n, wn)| (n.scale(r), wr * *wn * r * r)).collect::<Vec<_>>()
        })
        .collect();
    let sq: Vec<T> = nodes
        .par_iter()
        .map(|(x, w)| {
            let d = (field.gradient(x) + field.remainder_gradient(x)).symmetric_part();
            let n = d.norm();
            *w * n * n
        })
        .collect();
    Ok(sq.into_iter().sum::<T>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_lattice_gives_zero() {
        let lat = LatticeSpec::<f64>::cubic(1.0).unwrap();
        let c = curl_tilde_u_origin(&lat, &canonical_strain(), 5, Reduction::Deterministic).unwrap();
        assert_eq!(c.estimate(), Vec3::zero());
    }

    #[test]
    fn anisotropic_canonical_matches_partial_sum() {
        let lat = LatticeSpec::<f64>::rescaled();
        let c = curl_tilde_u_origin(&lat, &canonical_strain(), 5, Reduction::Deterministic).unwrap();
        let t = truncated_curl_sum(&lat, &canonical_strain(), 10.0, Reduction::Deterministic);
        assert!((c.components[2].estimate - t.0[2]).abs() < 1e-12);
        assert_eq!(c.components[0].estimate, 0.0);
        assert_eq!(c.components[1].estimate, 0.0);
    }

    #[test]
    fn e13_shear_follows_conjugation() {
        let lat = LatticeSpec::<f64>::rescaled();
        let a = StrainMatrix::new(Mat3::from_f64([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])).unwrap();
        let c = curl_tilde_u_origin(&lat, &a, 5, Reduction::Deterministic).unwrap();
        let t = truncated_curl_sum(&lat, &a, 10.0, Reduction::Deterministic);
        assert!((c.estimate() - t).max_abs() < 1e-12);
        assert!(c.components[1].estimate != 0.0);
    }

    #[test]
    fn unsupported_strains_rejected() {
        let lat = LatticeSpec::<f64>::rescaled();
        let diag = StrainMatrix::new(Mat3::diag([1.0, -1.0, 0.0])).unwrap();
        assert!(matches!(curl_tilde_u_origin(&lat, &diag, 5, Reduction::Deterministic), Err(Error::UnsupportedStrain(_))));
        let e23 = StrainMatrix::new(Mat3::from_f64([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])).unwrap();
        assert!(curl_tilde_u_origin(&lat, &e23, 5, Reduction::Deterministic).is_err());
        let odd = LatticeSpec::new([1.0, 2.0, 3.0]).unwrap();
        assert!(curl_tilde_u_origin(&odd, &canonical_strain(), 5, Reduction::Deterministic).is_err());
    }

    #[test]
    fn torus_velocity_scales_cubically() {
        let t = TorusGeometry::<f64>::anisotropic(1.0).unwrap();
        let a = canonical_strain();
        let w1 = angular_velocity_torus(&t, &a, 0.1, 5, Reduction::Deterministic).unwrap().omega;
        let w2 = angular_velocity_torus(&t, &a, 0.2, 5, Reduction::Deterministic).unwrap().omega;
        assert!((w2.0[2] / w1.0[2] - 8.0).abs() < 1e-12);
        assert_eq!((w1.0[0], w1.0[1]), (0.0, 0.0));
        assert!(angular_velocity_torus(&t, &a, 0.5, 5, Reduction::Deterministic).is_err());
        assert!(angular_velocity_torus(&t, &a, 0.0, 5, Reduction::Deterministic).is_err());
    }

    #[test]
    fn halton_points_in_ball() {
        let p = ball_sample_points::<f64>(100);
        assert_eq!(p.len(), 100);
        assert!(p.iter().all(|x| x.norm() <= 1.0));
    }

    #[test]
    fn slope_of_power_law() {
        let x = [4.0, 8.0, 16.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-2.5)).collect();
        assert!((fit_loglog_slope(&x, &y).unwrap() + 2.5).abs() < 1e-12);
        assert!(fit_loglog_slope(&x[..1], &y[..1]).is_err());
    }
}
