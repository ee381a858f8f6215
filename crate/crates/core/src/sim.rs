//! Frozen-centre orientation dynamics `ξ̇ᵢ = ωᵢ ∧ ξᵢ` for periodic particle
//! configurations on the unit torus.

use std::collections::BTreeMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{torus_displacement, LatticeSpec, SpinGenerator, StrainMatrix, TorusGeometry};
use crate::linalg::{Mat3, Vec3};
use crate::mobility::curl_tilde_u_origin;
use crate::quadrature::{Box3, GaussLegendre};
use crate::summation::Reduction;

type V = Vec3<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigurationKind {
    /// `(ℤ/k)³`, `N = k³`.
    Cubic,
    /// `(ℤ/k) × (ℤ/2k)²`, `N = 4k³`.
    Noncubic,
    Custom,
}

impl std::fmt::Display for ConfigurationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConfigurationKind::Cubic => "cubic",
            ConfigurationKind::Noncubic => "noncubic",
            ConfigurationKind::Custom => "custom",
        })
    }
}

/// Particle centres in `[0,1)³` with a common radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParticleConfiguration {
    pub kind: ConfigurationKind,
    /// Grid parameter for the lattice kinds, 0 for custom.
    pub k: u32,
    pub radius: f64,
    pub positions: Vec<V>,
}

impl ParticleConfiguration {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Generators of the sub-lattice of `𝕋` carrying a lattice configuration.
    pub fn lattice(&self) -> Option<LatticeSpec<f64>> {
        let k = self.k as f64;
        match self.kind {
            ConfigurationKind::Cubic => LatticeSpec::cubic(1.0 / k).ok(),
            ConfigurationKind::Noncubic => LatticeSpec::new([1.0 / k, 0.5 / k, 0.5 / k]).ok(),
            ConfigurationKind::Custom => None,
        }
    }

    pub fn custom(positions: Vec<V>, radius: f64) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InsufficientData { need: 1, got: 0 });
        }
        let positions: Vec<V> = positions.iter().map(|p| p.map(|c| c.rem_euclid(1.0))).collect();
        let config = ParticleConfiguration { kind: ConfigurationKind::Custom, k: 0, radius, positions };
        check_radius(&config)?;
        Ok(config)
    }
}

fn check_radius(config: &ParticleConfiguration) -> Result<()> {
    if !(config.radius > 0.0) {
        return Err(Error::Domain(format!("radius {} must be positive", config.radius)));
    }
    if config.len() >= 2 {
        let d_min = min_distance(config)?;
        if 2.0 * config.radius >= d_min {
            return Err(Error::RadiusTooLarge { radius: config.radius, d_min });
        }
    }
    Ok(())
}

/// Cubic or non-cubic lattice configuration, ordered lexicographically.
pub fn build_configuration(kind: ConfigurationKind, k: u32, radius: f64) -> Result<ParticleConfiguration> {
    if k < 1 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let kf = k as f64;
    let (n1, n23, s1, s23) = match kind {
        ConfigurationKind::Cubic => (k, k, kf, kf),
        ConfigurationKind::Noncubic => (k, 2 * k, kf, 2.0 * kf),
        ConfigurationKind::Custom => {
            return Err(Error::InvalidArgument("custom configurations take explicit positions".into()))
        }
    };
    let mut positions = Vec::with_capacity((n1 * n23 * n23) as usize);
    for i in 0..n1 {
        for j in 0..n23 {
            for m in 0..n23 {
                positions.push(Vec3::new(i as f64 / s1, j as f64 / s23, m as f64 / s23));
            }
        }
    }
    let config = ParticleConfiguration { kind, k, radius, positions };
    check_radius(&config)?;
    Ok(config)
}

/// Minimum pairwise minimal-image distance on the unit torus; needs `N ≥ 2`.
pub fn min_distance(config: &ParticleConfiguration) -> Result<f64> {
    let n = config.len();
    if n < 2 {
        return Err(Error::InsufficientData { need: 2, got: n });
    }
    let torus = TorusGeometry::unit();
    let p = &config.positions;
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| torus_displacement(&p[i], &p[j], &torus).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

/// Uniformly weighted atoms `(position, orientation)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<(V, V)>,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<(V, V)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InsufficientData { need: 1, got: 0 });
        }
        if let Some((_, xi)) = atoms.iter().find(|(_, xi)| (xi.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::Domain(format!("orientation {xi:?} is not a unit vector")));
        }
        Ok(EmpiricalMeasure { atoms })
    }

    pub fn from_parts(positions: &[V], orientations: &[V]) -> Result<Self> {
        if positions.len() != orientations.len() {
            return Err(Error::SizeMismatch(positions.len(), orientations.len()));
        }
        Self::new(positions.iter().copied().zip(orientations.iter().copied()).collect())
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn orientations(&self) -> impl Iterator<Item = &V> {
        self.atoms.iter().map(|(_, xi)| xi)
    }

    /// `(1/N) Σ f(ξᵢ)`.
    pub fn mean_of(&self, f: impl Fn(&V) -> f64) -> f64 {
        self.orientations().map(f).sum::<f64>() / self.len() as f64
    }
}

/// Profiles depending on `η₂` only, `η` the density's body-frame variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DensityProfile {
    /// `exp(−1/(η₂ − a))` on `η₂ > a`.
    Bump { threshold: f64 },
    /// Constant on `η₂ > 0`.
    Hemisphere,
}

impl DensityProfile {
    fn support_start(&self) -> f64 {
        match self {
            DensityProfile::Bump { threshold } => *threshold,
            DensityProfile::Hemisphere => 0.0,
        }
    }

    fn value(&self, s: f64) -> f64 {
        match *self {
            DensityProfile::Bump { threshold } if s > threshold => (-1.0 / (s - threshold)).exp(),
            DensityProfile::Hemisphere if s > 0.0 => 1.0,
            _ => 0.0,
        }
    }

    /// `sup p`, reached at `η₂ = 1`.
    fn sup(&self) -> f64 {
        self.value(1.0)
    }
}

/// Default quadrature order per direction for orientation densities.
pub const DENSITY_QUADRATURE_ORDER: usize = 48;

/// Probability density on `𝕊²` of the form `h(ξ) = p((Rξ)₂)/Z`.
///
/// Quadrature nodes are Gauss points in `η₂` over the support of `p` times
/// an azimuthal trapezoid rule, mapped to `ξ = Rᵀη`; rotations therefore
/// move the nodes and leave every integral of `h` unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientationDensity {
    pub profile: DensityProfile,
    pub rotation: Mat3<f64>,
    pub normalization: f64,
    pub order: usize,
    /// `(ξ, w·h(ξ))`.
    grid: Vec<(V, f64)>,
}

impl OrientationDensity {
    pub fn new(profile: DensityProfile, order: usize) -> Result<Self> {
        if order < 2 {
            return Err(Error::QuadratureOrder { order, min: 2 });
        }
        let a = profile.support_start();
        if !(0.0..1.0).contains(&a) {
            return Err(Error::Domain(format!("support threshold {a} must lie in [0, 1)")));
        }
        // Z = 2π ∫ p(s) ds by a finer 1-D rule on four panels.
        let fine = GaussLegendre::<f64>::new(2 * order)?;
        let step = (1.0 - a) / 4.0;
        let z = 2.0
            * std::f64::consts::PI
            * (0..4)
                .map(|i| {
                    let lo = a + step * i as f64;
                    fine.integrate(lo, lo + step, |s| profile.value(s))
                })
                .sum::<f64>();
        let mut h = OrientationDensity { profile, rotation: Mat3::identity(), normalization: z, order, grid: Vec::new() };
        h.rebuild_grid()?;
        Ok(h)
    }

    /// The smooth default bump supported in `{ξ₂ > 1/10}`.
    pub fn bump() -> Self {
        Self::new(DensityProfile::Bump { threshold: 0.1 }, DENSITY_QUADRATURE_ORDER).expect("valid default")
    }

    /// Uniform density on `{ξ₂ > 0}`.
    pub fn hemisphere() -> Self {
        Self::new(DensityProfile::Hemisphere, DENSITY_QUADRATURE_ORDER).expect("valid default")
    }

    fn rebuild_grid(&mut self) -> Result<()> {
        let a = self.profile.support_start();
        let gl = GaussLegendre::<f64>::new(self.order)?;
        let n_phi = 4 * self.order;
        let dphi = 2.0 * std::f64::consts::PI / n_phi as f64;
        let rt = self.rotation.transpose();
        let mut grid = Vec::with_capacity(self.order * n_phi);
        for (s, ws) in gl.on(a, 1.0) {
            let weight = ws * dphi * self.profile.value(s) / self.normalization;
            let rho = (1.0 - s * s).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = dphi * (j as f64 + 0.5);
                let eta = Vec3::new(rho * phi.sin(), s, rho * phi.cos());
                grid.push((rt.mul_vec(&eta), weight));
            }
        }
        self.grid = grid;
        Ok(())
    }

    pub fn evaluate(&self, xi: &V) -> f64 {
        self.profile.value(self.rotation.mul_vec(xi).0[1]) / self.normalization
    }

    /// `∫ f h dσ`.
    pub fn integrate(&self, f: impl Fn(&V) -> f64) -> f64 {
        self.grid.iter().map(|(x, w)| w * f(x)).sum()
    }

    /// `ξ ↦ h(Qξ)`.
    pub fn composed_with(&self, q: &Mat3<f64>) -> Self {
        let mut out = self.clone();
        out.rotation = self.rotation.mul_mat(q);
        out.rebuild_grid().expect("order already validated");
        out
    }

    pub fn grid_len(&self) -> usize {
        self.grid.len()
    }
}

/// `h ∘ e^{−(c̄/2)Mt}` with `M` the spin generator about `e₃`.
pub fn rotate_density(h: &OrientationDensity, t: f64, cbar: f64) -> OrientationDensity {
    h.composed_with(&SpinGenerator::e3().exp(-0.5 * cbar * t))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingScheme {
    /// Independent draws.
    Iid,
    /// Draws in pairs related by the reflection `η₁ ↦ −η₁`, which preserves
    /// the law; the empirical mean of `η₁` is then exactly zero for even `N`.
    #[default]
    Mirrored,
}

const MAX_REJECTIONS: usize = 100_000;

fn draw_eta(h: &OrientationDensity, rng: &mut ChaCha8Rng) -> Result<V> {
    let a = h.profile.support_start();
    let sup = h.profile.sup();
    for _ in 0..MAX_REJECTIONS {
        let s: f64 = rng.gen_range(a..1.0);
        let u: f64 = rng.gen();
        let phi: f64 = rng.gen_range(0.0..2.0 * std::f64::consts::PI);
        if s > a && u * sup < h.profile.value(s) {
            let rho = (1.0 - s * s).sqrt();
            return Ok(Vec3::new(rho * phi.sin(), s, rho * phi.cos()).normalized());
        }
    }
    Err(Error::SamplingFailed { attempts: MAX_REJECTIONS })
}

/// `N` orientations with law `h`. Draw `i` (or pair `i`) uses stream `i` of a
/// ChaCha8 generator seeded with `seed`, so results do not depend on the
/// thread count.
pub fn sample_orientations(h: &OrientationDensity, n: usize, seed: u64, scheme: SamplingScheme) -> Result<Vec<V>> {
    let rt = h.rotation.transpose();
    let stream = |i: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        rng
    };
    let etas: Vec<V> = match scheme {
        SamplingScheme::Iid => (0..n).into_par_iter().map(|i| draw_eta(h, &mut stream(i))).collect::<Result<_>>()?,
        SamplingScheme::Mirrored => {
            let pairs: Vec<V> =
                (0..n.div_ceil(2)).into_par_iter().map(|i| draw_eta(h, &mut stream(i))).collect::<Result<_>>()?;
            let mut out = Vec::with_capacity(n);
            for eta in pairs {
                out.push(eta);
                out.push(Vec3::new(-eta.0[0], eta.0[1], eta.0[2]));
            }
            out.truncate(n);
            out
        }
    };
    Ok(etas.iter().map(|eta| rt.mul_vec(eta).normalized()).collect())
}

/// Reference sample of `1 ⊗ h` stratified on the cells of a lattice
/// configuration: each centre is jittered uniformly within its own cell.
pub fn stratified_reference(
    config: &ParticleConfiguration,
    h: &OrientationDensity,
    seed: u64,
    scheme: SamplingScheme,
) -> Result<EmpiricalMeasure> {
    let lattice = config
        .lattice()
        .ok_or_else(|| Error::InvalidArgument("stratified sampling needs a lattice configuration".into()))?;
    let g = lattice.generators();
    let positions: Vec<V> = config
        .positions
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((1u64 << 40) + i as u64);
            Vec3(std::array::from_fn(|c| (x.0[c] + g[c] * (rng.gen::<f64>() - 0.5)).rem_euclid(1.0)))
        })
        .collect();
    let xi = sample_orientations(h, config.len(), seed, scheme)?;
    EmpiricalMeasure::from_parts(&positions, &xi)
}

/// Scaling of the simulated rotation rate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateNormalization {
    /// Non-cubic rate `(c̄/2)e₃`, `c̄ = 5c₀`.
    #[default]
    Physical,
    /// The volume-fraction scaling taken literally: 16 times the above, 16
    /// being the volume of the torus `(ℝ/4ℤ) × (ℝ/2ℤ)²` carrying one particle.
    Rescaled,
}

impl RateNormalization {
    /// Factor applied to the leading-order physical rate
    /// `(5/2N) Σ (Ay∧y)/|y|⁵`.
    pub fn physical_factor(&self) -> f64 {
        match self {
            RateNormalization::Physical => 1.0 / 16.0,
            RateNormalization::Rescaled => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaMode {
    /// Closed-form single-lattice value with lattice sums truncated at `k`.
    Lattice { k: u32 },
    /// Renormalized superposition over the images `|n|∞ ≤ truncation` of
    /// every particle.
    Direct { truncation: u32 },
}

impl Default for OmegaMode {
    fn default() -> Self {
        OmegaMode::Lattice { k: 35 }
    }
}

/// `ωᵢ = ½ curl u(Xᵢ)` at leading order for every particle.
pub fn per_particle_omega(
    config: &ParticleConfiguration,
    a: &StrainMatrix<f64>,
    mode: OmegaMode,
    normalization: RateNormalization,
    reduction: Reduction,
) -> Result<Vec<V>> {
    match mode {
        OmegaMode::Lattice { k } => {
            let omega = match config.kind {
                ConfigurationKind::Cubic => Vec3::zero(),
                ConfigurationKind::Noncubic => {
                    // The per-particle torus is (4L,2L,2L) with L = 1 in the
                    // physical normalization.
                    let curl = curl_tilde_u_origin(&LatticeSpec::anisotropic(1.0)?, a, k, reduction)?.estimate();
                    curl.scale(0.5 * 16.0 * normalization.physical_factor())
                }
                ConfigurationKind::Custom => {
                    return Err(Error::InvalidArgument("lattice mode needs a cubic or non-cubic configuration".into()))
                }
            };
            Ok(vec![omega; config.len()])
        }
        OmegaMode::Direct { truncation } => direct_omega(config, a, truncation, normalization),
    }
}

/// `(Ax∧x)/|x|⁵`.
fn curl_density(a: &StrainMatrix<f64>, x: &V) -> V {
    let r2 = x.norm_sq();
    a.apply(x).cross(x).scale(1.0 / (r2 * r2 * r2.sqrt()))
}

/// `Σ_{|n|∞≤K, d+n≠0} F(d+n) − ∫_{d+[−K−½,K+½]³} F`, the box integral taken
/// through `F = ½ curl((A:xx)x/|x|⁵)` as `½∮ n × G dS`. This is the spherical
/// principal value when the box contains the origin.
fn renormalized_image_sum(a: &StrainMatrix<f64>, d: &V, truncation: u32, faces: &[(V, V, f64)]) -> V {
    let k = truncation as i64;
    let mut sum = Vec3::zero();
    for i in -k..=k {
        for j in -k..=k {
            for m in -k..=k {
                let y = *d + Vec3::new(i as f64, j as f64, m as f64);
                if y.norm_sq() > 0.0 {
                    sum += curl_density(a, &y);
                }
            }
        }
    }
    let mut surface = Vec3::zero();
    for (z, n, w) in faces {
        let p = *z + *d;
        let r2 = p.norm_sq();
        let g = p.scale(a.contract(&p) / (r2 * r2 * r2.sqrt()));
        surface += n.cross(&g).scale(*w);
    }
    sum - surface.scale(0.5)
}

fn direct_omega(
    config: &ParticleConfiguration,
    a: &StrainMatrix<f64>,
    truncation: u32,
    normalization: RateNormalization,
) -> Result<Vec<V>> {
    if truncation < 1 {
        return Err(Error::Domain("image truncation must be at least 1".into()));
    }
    let n = config.len();
    let torus = TorusGeometry::unit();
    let reach = truncation as f64 + 0.5;
    let faces = Box3::centered([reach; 3]).face_nodes(16, 2 * truncation as usize)?;
    let p = &config.positions;
    let key = |d: &V| d.0.map(f64::to_bits);
    let mut distinct: BTreeMap<[u64; 3], V> = BTreeMap::new();
    for x in p {
        for y in p {
            let d = torus_displacement(y, x, &torus);
            distinct.entry(key(&d)).or_insert(d);
        }
    }
    let values: BTreeMap<[u64; 3], V> = distinct
        .par_iter()
        .map(|(k, d)| (*k, renormalized_image_sum(a, d, truncation, &faces)))
        .collect();
    let scale = normalization.physical_factor() * 2.5 / n as f64;
    Ok(p
        .par_iter()
        .map(|x| {
            let mut acc = Vec3::zero();
            for y in p {
                acc += values[&key(&torus_displacement(y, x, &torus))];
            }
            acc.scale(scale)
        })
        .collect())
}

/// Rotates each `ξᵢ` by the angle `|ωᵢ|dt` about `ωᵢ` (Rodrigues).
pub fn step_orientations(orientations: &[V], omegas: &[V], dt: f64) -> Result<Vec<V>> {
    if orientations.len() != omegas.len() {
        return Err(Error::SizeMismatch(orientations.len(), omegas.len()));
    }
    if !(dt >= 0.0) {
        return Err(Error::Domain(format!("time step {dt} must be nonnegative")));
    }
    Ok(orientations
        .iter()
        .zip(omegas)
        .map(|(xi, w)| {
            let speed = w.norm();
            if speed == 0.0 || dt == 0.0 {
                return *xi;
            }
            let axis = w.scale(1.0 / speed);
            let (s, c) = (speed * dt).sin_cos();
            let r = xi.scale(c) + axis.cross(xi).scale(s) + axis.scale(axis.dot(xi) * (1.0 - c));
            r.normalized()
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub measures: Vec<EmpiricalMeasure>,
    pub omegas: Vec<V>,
}

impl Trajectory {
    /// `max_{i,t} ∠(ξᵢ(t), ξᵢ(0))`.
    pub fn max_drift_angle(&self) -> f64 {
        let first = &self.measures[0];
        self.measures
            .iter()
            .flat_map(|m| m.atoms.iter().zip(&first.atoms).map(|((_, a), (_, b))| a.cross(b).norm().atan2(a.dot(b))))
            .fold(0.0, f64::max)
    }
}

/// Output times `0, dt, 2dt, …` up to and including `T`.
pub fn output_times(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("final time {t_end} must be nonnegative")));
    }
    if !(dt > 0.0) {
        return Err(Error::Domain(format!("time step {dt} must be positive")));
    }
    let steps = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut times: Vec<f64> = (0..steps).map(|i| i as f64 * dt).collect();
    times.push(t_end);
    Ok(times)
}

/// Evolves the initial orientations with constant per-particle `ω`. Each
/// frame is the exact rotation of the initial frame, so `dt` sets only the
/// output cadence.
pub fn simulate(config: &ParticleConfiguration, initial: &[V], omegas: &[V], t_end: f64, dt: f64) -> Result<Trajectory> {
    if initial.len() != config.len() {
        return Err(Error::SizeMismatch(initial.len(), config.len()));
    }
    let times = output_times(t_end, dt)?;
    let measures = times
        .iter()
        .map(|t| EmpiricalMeasure::from_parts(&config.positions, &step_orientations(initial, omegas, *t)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Trajectory { times, measures, omegas: omegas.to_vec() })
}

/// Sidecar metadata for an exported trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetadata {
    pub kind: ConfigurationKind,
    pub k: u32,
    pub n: usize,
    pub radius: f64,
    /// Lattice constant `c̄ = 5c₀` used for the rates.
    pub cbar: f64,
    pub seed: u64,
    pub mode: OmegaMode,
    pub normalization: RateNormalization,
    pub sampling: SamplingScheme,
}

/// Round-trip decimal with 17 significant digits.
pub fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column order of [`write_trajectory_csv`].
pub const TRAJECTORY_COLUMNS: [&str; 8] = ["t", "i", "x1", "x2", "x3", "xi1", "xi2", "xi3"];

/// One CSV row per (time, particle), columns [`TRAJECTORY_COLUMNS`].
pub fn write_trajectory_csv<W: Write>(trajectory: &Trajectory, out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_COLUMNS).map_err(io)?;
    for (t, m) in trajectory.times.iter().zip(&trajectory.measures) {
        for (i, (x, xi)) in m.atoms.iter().enumerate() {
            let mut row = vec![full_precision(*t), i.to_string()];
            row.extend(x.0.iter().chain(&xi.0).map(|v| full_precision(*v)));
            w.write_record(&row).map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn configuration_examples() {
        let c = build_configuration(ConfigurationKind::Cubic, 2, 0.1).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(min_distance(&c).unwrap(), 0.5);
        let n = build_configuration(ConfigurationKind::Noncubic, 1, 0.1).unwrap();
        assert_eq!(n.len(), 4);
        assert_eq!(n.positions[3], Vec3::new(0.0, 0.5, 0.5));
        assert_eq!(min_distance(&n).unwrap(), 0.5);
        assert!(matches!(
            build_configuration(ConfigurationKind::Cubic, 2, 0.3),
            Err(Error::RadiusTooLarge { .. })
        ));
    }

    #[test]
    fn single_particle_has_no_distance() {
        let c = build_configuration(ConfigurationKind::Cubic, 1, 0.1).unwrap();
        assert!(min_distance(&c).is_err());
    }

    #[test]
    fn quarter_turn() {
        let r = step_orientations(&[Vec3::unit(0)], &[Vec3::new(0.0, 0.0, PI / 2.0)], 1.0).unwrap();
        assert!((r[0] - Vec3::unit(1)).max_abs() < 1e-15);
        let same = step_orientations(&[Vec3::new(0.6, 0.8, 0.0)], &[Vec3::zero()], 3.0).unwrap();
        assert_eq!(same[0], Vec3::new(0.6, 0.8, 0.0));
    }

    #[test]
    fn densities_normalized() {
        for h in [OrientationDensity::bump(), OrientationDensity::hemisphere()] {
            assert!((h.integrate(|_| 1.0) - 1.0).abs() < 1e-10);
        }
        let h = OrientationDensity::hemisphere();
        assert!((h.integrate(|x| x.0[1]) - 0.5).abs() < 1e-12);
        assert!((h.evaluate(&Vec3::unit(1)) - 0.5 / PI).abs() < 1e-12);
    }

    #[test]
    fn mirrored_samples_have_zero_xi1_mean() {
        let h = OrientationDensity::bump();
        let xi = sample_orientations(&h, 64, 7, SamplingScheme::Mirrored).unwrap();
        assert_eq!(xi.iter().map(|x| x.0[0]).sum::<f64>(), 0.0);
        assert!(xi.iter().all(|x| x.0[1] > 0.1));
    }

    #[test]
    fn output_time_grid() {
        assert_eq!(output_times(1.0, 0.25).unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(output_times(0.0, 0.1).unwrap(), vec![0.0]);
        assert_eq!(output_times(0.3, 0.2).unwrap(), vec![0.0, 0.2, 0.3]);
        assert!(output_times(1.0, 0.0).is_err());
    }
}
