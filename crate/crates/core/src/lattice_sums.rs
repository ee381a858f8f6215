//! Scalar lattice sums of `S(y) = (y₁² − y₂²)/|y|⁵` over the rescaled
//! anisotropic lattice `Λ = 2ℤ × ℤ × ℤ`, with rigorous truncation bounds.
//!
//! The renormalized constant is
//!
//! ```text
//! c₀′ = −⨍_{Q′₀} S + Σ_{y∈Λ\{0}} (S(y) − ⨍_{Q′_y} S),    Q′_y = y + [−1,1]×[−½,½]²,
//! ```
//!
//! and for every `k ≥ 2`
//!
//! ```text
//! |c₀′ − Σ_{0<|y|∞≤2k} S(y)| ≤ 4/(4k+1) + 84π(4k−2)²/(4k−5)³.
//! ```
//!
//! The first term bounds the telescoped cell averages (a thin slab
//! integral), the second bounds the renormalized tail `|y|∞ > 2k`.
//! Floating-point roundoff is not part of these half-widths; see
//! [`BoundedValue::slack`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{shell_ordered_indices, Cell, LatticeSpec};
use crate::linalg::Vec3;
use crate::quadrature::{Box3, SphereQuadrature};
use crate::scalar::Scalar;
use crate::summation::{reduce, reduce_arrays, Reduction};

/// An estimate together with an analytic error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundedValue<T> {
    pub estimate: T,
    pub half_width: T,
    /// Optional roundoff allowance `n·ε·Σ|terms|`, reported separately from
    /// the analytic half-width.
    pub slack: Option<T>,
}

impl<T: Scalar> BoundedValue<T> {
    pub fn new(estimate: T, half_width: T) -> Self {
        BoundedValue { estimate, half_width: half_width.abs(), slack: None }
    }

    pub fn exact(value: T) -> Self {
        Self::new(value, T::zero())
    }

    pub fn lower(&self) -> T {
        self.estimate - self.half_width
    }

    pub fn upper(&self) -> T {
        self.estimate + self.half_width
    }

    pub fn contains(&self, x: T) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    pub fn excludes_zero(&self) -> bool {
        self.lower() > T::zero() || self.upper() < T::zero()
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    /// Interval image under `x ↦ c·x`.
    pub fn scale(&self, c: T) -> Self {
        BoundedValue {
            estimate: self.estimate * c,
            half_width: self.half_width * c.abs(),
            slack: self.slack.map(|s| s * c.abs()),
        }
    }

    pub fn with_slack(mut self, slack: T) -> Self {
        self.slack = Some(slack);
        self
    }
}

/// `c₀′`, `c₀ = −c₀′/8` and `c̄ = 5c₀`, each as an interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeConstant<T> {
    pub k: u32,
    pub c0_prime: BoundedValue<T>,
    pub c0: BoundedValue<T>,
    pub cbar: BoundedValue<T>,
}

impl<T: Scalar> LatticeConstant<T> {
    pub fn from_c0_prime(k: u32, c0_prime: BoundedValue<T>) -> Self {
        let c0 = c0_prime.scale(-T::lit(0.125));
        let cbar = c0.scale(T::lit(5.0));
        LatticeConstant { k, c0_prime, c0, cbar }
    }
}

/// `S(y) = (y₁² − y₂²)/|y|⁵`.
///
/// Swapping `y₁` and `y₂` negates the result exactly in floating point.
#[inline]
pub fn summand_s<T: Scalar>(y: &Vec3<T>) -> Result<T> {
    let r2 = y.norm_sq();
    if r2 == T::zero() {
        return Err(Error::SingularPoint);
    }
    Ok(s_unchecked(y, r2))
}

#[inline]
fn s_unchecked<T: Scalar>(y: &Vec3<T>, r2: T) -> T {
    let num = y.0[0] * y.0[0] - y.0[1] * y.0[1];
    num / (r2 * r2 * r2.sqrt())
}

/// `∫_{δ_in<|z|<δ_out} S dz`, which vanishes because `S` has zero mean on
/// every sphere; evaluated by sphere quadrature.
pub fn ball_shell_integral_s<T: Scalar>(delta_in: T, delta_out: T, order: usize) -> Result<T> {
    if !(delta_in > T::zero() && delta_out >= delta_in) {
        return Err(Error::Domain("need 0 < δ_in ≤ δ_out".into()));
    }
    let sphere = SphereQuadrature::<T>::new(order, 2)?;
    let angular = sphere.integrate(|n| n.0[0] * n.0[0] - n.0[1] * n.0[1]);
    Ok(angular * (delta_out / delta_in).ln())
}

/// Default inner radius of the spherical principal value at the origin cell.
pub const DEFAULT_PV_DELTA: f64 = 0.25;

/// Quadrature order used for cells within this max-norm of the origin when
/// the caller asks for a cheaper rule.
const NEAR_FIELD_RADIUS: f64 = 4.0;

/// `⨍_{cell} S`.
///
/// Cells away from the origin use a tensor Gauss rule. The cell containing
/// the origin is evaluated as the spherical principal value, i.e. the plain
/// integral over `cell \ B_δ` (the ball contributes exactly zero). That
/// integral is computed by decomposing the cell into pyramids with apex at
/// the origin, which gives
/// `∫_{Q\B_δ} S = Σ_faces ∫_face S(p)(n·p) ln(|p|/δ) dA`.
pub fn cell_average_s_pv<T: Scalar>(cell: &Cell<T>, order: usize, delta: T) -> Result<T> {
    if order < 2 {
        return Err(Error::QuadratureOrder { order, min: 2 });
    }
    let bx = Box3 { center: cell.center, half: cell.half_extents };
    if !cell.contains(&Vec3::zero()) {
        let integral = bx.integrate(order, 1, |z| s_unchecked(z, z.norm_sq()))?;
        return Ok(integral / bx.volume());
    }
    if cell.center != Vec3::zero() {
        return Err(Error::InvalidArgument("origin lies on a non-central cell".into()));
    }
    let inner = cell.half_extents.iter().fold(T::infinity(), |m, h| m.min(*h));
    if !(delta > T::zero() && delta <= inner) {
        return Err(Error::Domain(format!("principal-value radius {delta} must lie in (0, {inner}]")));
    }
    let faces = bx.face_nodes(order, 2)?;
    let integral: T = faces
        .iter()
        .map(|(p, n, w)| {
            let r2 = p.norm_sq();
            *w * s_unchecked(p, r2) * p.dot(n) * (r2.sqrt() / delta).ln()
        })
        .sum();
    Ok(integral / bx.volume())
}

/// Rule for the per-cell averages in [`refined_c0_prime`]: `order` points per
/// axis far out, at least 16 with 2 panels near the origin.
fn refined_cell_average<T: Scalar>(lattice: &LatticeSpec<T>, index: [i64; 3], order: usize) -> T {
    let cell = Cell::of(lattice, index);
    let bx = Box3 { center: cell.center, half: cell.half_extents };
    let near = cell.center.max_abs() <= T::lit(NEAR_FIELD_RADIUS);
    let (ord, panels) = if near { (order.max(16), 2) } else { (order, 1) };
    bx.integrate(ord, panels, |z| s_unchecked(z, z.norm_sq()))
        .expect("order validated by caller")
        / bx.volume()
}

/// `Σ_{y∈Λ\{0}, |y|∞≤2k} S(y)` summed shell by shell.
pub fn partial_sum_cube<T: Scalar>(lattice: &LatticeSpec<T>, k: u32, mode: Reduction) -> Result<T> {
    Ok(partial_sum_with_abs(lattice, k, mode)?.0)
}

fn partial_sum_with_abs<T: Scalar>(lattice: &LatticeSpec<T>, k: u32, mode: Reduction) -> Result<(T, T, usize)> {
    if k < 1 {
        return Err(Error::Domain("truncation level k must be at least 1".into()));
    }
    let radius = T::from_int(2 * k as i64);
    let idx = shell_ordered_indices(lattice, radius);
    let [s, a] = reduce_arrays(
        idx.len(),
        |i| {
            let y = lattice.point(idx[i]);
            let v = s_unchecked(&y, y.norm_sq());
            [v, v.abs()]
        },
        mode,
    );
    Ok((s, a, idx.len()))
}

/// The same truncated sum as a plain left fold in lexicographic order.
pub fn partial_sum_cube_lexicographic<T: Scalar>(lattice: &LatticeSpec<T>, k: u32) -> Result<T> {
    if k < 1 {
        return Err(Error::Domain("truncation level k must be at least 1".into()));
    }
    let radius = T::from_int(2 * k as i64);
    let mut acc = T::zero();
    for idx in crate::geometry::lattice_indices_in_cube(lattice, radius) {
        let y = lattice.point(idx);
        acc += s_unchecked(&y, y.norm_sq());
    }
    Ok(acc)
}

/// Bound on the telescoped cell averages at level `k`: `4/(4k+1)`.
pub fn cell_average_bound<T: Scalar>(k: u32) -> T {
    let k = T::from_int(k as i64);
    T::lit(4.0) / (T::lit(4.0) * k + T::one())
}

/// Bound on the renormalized tail `|y|∞ > 2k`: `84π(4k−2)²/(4k−5)³`.
pub fn renormalized_tail_bound<T: Scalar>(k: u32) -> Result<T> {
    if k < 2 {
        return Err(Error::Domain(format!("tail bound needs k ≥ 2, got {k}")));
    }
    let k = T::from_int(k as i64);
    let four = T::lit(4.0);
    let a = four * k - T::lit(2.0);
    let b = four * k - T::lit(5.0);
    Ok(T::lit(84.0) * T::PI() * a * a / (b * b * b))
}

/// `4/(4k+1) + 84π(4k−2)²/(4k−5)³`.
pub fn tail_bound<T: Scalar>(k: u32) -> Result<T> {
    Ok(cell_average_bound::<T>(k) + renormalized_tail_bound::<T>(k)?)
}

/// Rigorous interval for `c₀′` from the truncated sum at level `k`.
pub fn c0_prime_interval<T: Scalar>(k: u32, mode: Reduction) -> Result<BoundedValue<T>> {
    let tail = tail_bound::<T>(k)?;
    let (sum, abs_sum, n) = partial_sum_with_abs(&LatticeSpec::rescaled(), k, mode)?;
    let slack = T::from_int(n as i64) * T::eps() * abs_sum;
    Ok(BoundedValue::new(sum, tail).with_slack(slack))
}

pub fn lattice_constants<T: Scalar>(k: u32, mode: Reduction) -> Result<LatticeConstant<T>> {
    Ok(LatticeConstant::from_c0_prime(k, c0_prime_interval(k, mode)?))
}

/// `c₀′` truncated at `|y|∞ ≤ 2k` with the cell averages evaluated
/// explicitly, so that only the renormalized tail remains in the error bar.
pub fn refined_c0_prime<T: Scalar>(k: u32, order: usize, mode: Reduction) -> Result<BoundedValue<T>> {
    if order < 2 {
        return Err(Error::QuadratureOrder { order, min: 2 });
    }
    let tail = renormalized_tail_bound::<T>(k)?;
    let lattice = LatticeSpec::<T>::rescaled();
    let origin = Cell::of(&lattice, [0, 0, 0]);
    let origin_avg = cell_average_s_pv(&origin, order.max(16), T::lit(DEFAULT_PV_DELTA))?;
    let idx = shell_ordered_indices(&lattice, T::from_int(2 * k as i64));
    let renormalized = reduce(
        idx.len(),
        |i| {
            let y = lattice.point(idx[i]);
            s_unchecked(&y, y.norm_sq()) - refined_cell_average(&lattice, idx[i], order)
        },
        mode,
    );
    Ok(BoundedValue::new(renormalized - origin_avg, tail))
}

/// `∫` of `S` over the slab `[2k+½, 2k+1] × [−2k−½, 2k+½]²`, which equals the
/// telescoped sum of all cell averages up to level `k`.
pub fn telescoped_slab_integral<T: Scalar>(k: u32, order: usize) -> Result<T> {
    let kk = T::from_int(2 * k as i64);
    let half = T::lit(0.5);
    let slab = Box3 {
        center: Vec3([kk + T::lit(0.75), T::zero(), T::zero()]),
        half: [T::lit(0.25), kk + half, kk + half],
    };
    let panels = (2 * k as usize).clamp(1, 16);
    slab.integrate(order, panels, |z| s_unchecked(z, z.norm_sq()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summand_examples() {
        assert_eq!(summand_s(&Vec3::new(2.0f64, 0.0, 0.0)).unwrap(), 0.125);
        assert_eq!(summand_s(&Vec3::new(1.0f64, 1.0, 5.0)).unwrap(), 0.0);
        assert_eq!(summand_s(&Vec3::new(0.0f64, 1.0, 0.0)).unwrap(), -1.0);
        assert_eq!(summand_s(&Vec3::<f64>::zero()), Err(Error::SingularPoint));
    }

    #[test]
    fn tail_bound_values() {
        let t35: f64 = tail_bound(35).unwrap();
        let expect = 4.0 / 141.0 + 84.0 * std::f64::consts::PI * 138.0f64.powi(2) / 135.0f64.powi(3);
        assert!((t35 - expect).abs() < 1e-15);
        assert!((t35 - 2.070984).abs() < 1e-5);
        assert!(t35 < 2.1);
        let t2: f64 = tail_bound(2).unwrap();
        assert!((t2 - (4.0 / 9.0 + 84.0 * std::f64::consts::PI * 36.0 / 27.0)).abs() < 1e-12);
        assert!((t2 - 352.30).abs() < 0.01);
        assert!(tail_bound::<f64>(36).unwrap() < t35);
        assert!(tail_bound::<f64>(1).is_err());
    }

    #[test]
    fn k1_partial_sum_matches_enumeration() {
        // 3 × 5 × 5 − 1 = 74 points: y₁ ∈ {−2,0,2}, y₂,y₃ ∈ {−2..2}.
        let mut oracle = 0.0f64;
        let mut count = 0;
        for y1 in [-2.0f64, 0.0, 2.0] {
            for y2 in -2..=2 {
                for y3 in -2..=2 {
                    let (y2, y3) = (y2 as f64, y3 as f64);
                    if y1 == 0.0 && y2 == 0.0 && y3 == 0.0 {
                        continue;
                    }
                    count += 1;
                    oracle += (y1 * y1 - y2 * y2) / (y1 * y1 + y2 * y2 + y3 * y3).powf(2.5);
                }
            }
        }
        assert_eq!(count, 74);
        let v: f64 = partial_sum_cube(&LatticeSpec::rescaled(), 1, Reduction::Deterministic).unwrap();
        assert!((v - oracle).abs() < 1e-14);
        assert!((v - (-2.193_067_471_551_886_5)).abs() < 1e-13);
    }

    #[test]
    fn cubic_lattice_partial_sum_vanishes() {
        let lat = LatticeSpec::<f64>::cubic(1.0).unwrap();
        for k in [1, 3, 6] {
            assert!(partial_sum_cube(&lat, k, Reduction::Deterministic).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn origin_ball_integral_vanishes() {
        let v = ball_shell_integral_s::<f64>(1e-3, 0.25, 8).unwrap();
        assert!(v.abs() < 1e-14);
    }

    #[test]
    fn origin_cell_principal_value_is_delta_independent() {
        let lat = LatticeSpec::<f64>::rescaled();
        let cell = Cell::of(&lat, [0, 0, 0]);
        let a = cell_average_s_pv(&cell, 24, 0.25).unwrap();
        let b = cell_average_s_pv(&cell, 24, 0.5).unwrap();
        let c = cell_average_s_pv(&cell, 24, 0.125).unwrap();
        assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
        assert!(cell_average_s_pv(&cell, 24, 0.6).is_err());
        assert!(cell_average_s_pv(&cell, 24, 0.0).is_err());
        assert!(cell_average_s_pv(&cell, 1, 0.25).is_err());
    }

    #[test]
    fn far_cell_average_approaches_point_value() {
        let lat = LatticeSpec::<f64>::rescaled();
        let idx = [10, 13, -7];
        let y = lat.point(idx);
        let avg = cell_average_s_pv(&Cell::of(&lat, idx), 8, 0.25).unwrap();
        let s = summand_s(&y).unwrap();
        // Mean-value bound (3/2)·7/(|z| − 3/2)⁴ with |z| ≥ |y| − 3/2.
        let bound = 1.5 * 7.0 / (y.norm() - 3.0).powi(4);
        assert!((avg - s).abs() <= bound);
    }

    #[test]
    fn swap_mirrored_cells_cancel() {
        let lat = LatticeSpec::<f64>::cubic(1.0).unwrap();
        let a = cell_average_s_pv(&Cell::of(&lat, [2, 1, 3]), 12, 0.25).unwrap();
        let b = cell_average_s_pv(&Cell::of(&lat, [1, 2, 3]), 12, 0.25).unwrap();
        assert!((a + b).abs() < 1e-15);
    }

    #[test]
    fn bounded_value_arithmetic() {
        let b = BoundedValue::new(-2.0, 0.5);
        assert!(b.excludes_zero());
        let s = b.scale(-0.125);
        assert_eq!((s.lower(), s.upper()), (0.1875, 0.3125));
        assert!(b.intersects(&BoundedValue::new(-1.6, 0.2)));
        assert!(!b.intersects(&BoundedValue::new(0.0, 1.0)));
        assert!(b.contains(-2.4) && !b.contains(-2.6));
    }
}
