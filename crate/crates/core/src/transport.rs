//! Exact Wasserstein distances between equal-size empirical measures on
//! `𝕋 × 𝕊²`, the `ξ₁` dual lower bound, and the divergence function `g`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{torus_displacement, SpinGenerator, TorusGeometry};
use crate::linalg::Vec3;
use crate::sim::{sample_orientations, EmpiricalMeasure, OrientationDensity, SamplingScheme};

type V = Vec3<f64>;

/// Largest instance accepted by the exact solvers.
pub const SOLVER_CAP: usize = 2000;

/// `d((x,ξ),(y,η)) = |x − y|_𝕋 + |ξ − η|`, geodesic distance on the unit
/// torus plus chordal distance on the sphere. `ξ ↦ ξ₁` is 1-Lipschitz for it.
pub fn ground_metric(p: &(V, V), q: &(V, V)) -> f64 {
    let dx = torus_displacement(&p.0, &q.0, &TorusGeometry::unit()).norm();
    dx + (p.1 - q.1).norm()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransportMethod {
    ShortestAugmentingPath,
    BottleneckBisection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportResult {
    pub distance: f64,
    /// `matching[i]` is the atom of the second measure paired with atom `i`.
    pub matching: Vec<usize>,
    pub method: TransportMethod,
}

/// Row-major `N × N` ground-cost matrix.
pub fn cost_matrix(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<Vec<Vec<f64>>> {
    if mu.len() != nu.len() {
        return Err(Error::SizeMismatch(mu.len(), nu.len()));
    }
    if mu.len() > SOLVER_CAP {
        return Err(Error::TooLarge { size: mu.len(), cap: SOLVER_CAP });
    }
    Ok(mu.atoms.par_iter().map(|p| nu.atoms.iter().map(|q| ground_metric(p, q)).collect()).collect())
}

/// Minimum-cost perfect assignment by shortest augmenting paths with dual
/// potentials, `O(N³)`. Returns the column assigned to each row.
pub fn solve_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    // 1-based arrays; column 0 is the virtual root of each search.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}

/// `W₁` between equal-weight empirical measures.
pub fn w1_exact(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<TransportResult> {
    let cost = cost_matrix(mu, nu)?;
    let matching = solve_assignment(&cost);
    let total: f64 = matching.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Ok(TransportResult {
        distance: total / mu.len() as f64,
        matching,
        method: TransportMethod::ShortestAugmentingPath,
    })
}

/// Maximum bipartite matching on `adj` (Hopcroft–Karp). Returns the column
/// matched to each row, if the matching is perfect.
fn perfect_matching(adj: &[Vec<usize>], n: usize) -> Option<Vec<usize>> {
    const FREE: usize = usize::MAX;
    let mut match_row = vec![FREE; n];
    let mut match_col = vec![FREE; n];
    let mut dist = vec![0usize; n];
    let mut size = 0;
    loop {
        // Layer rows by alternating-path distance from free rows.
        let mut queue = std::collections::VecDeque::new();
        for r in 0..n {
            if match_row[r] == FREE {
                dist[r] = 0;
                queue.push_back(r);
            } else {
                dist[r] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(r) = queue.pop_front() {
            for &c in &adj[r] {
                let next = match_col[c];
                if next == FREE {
                    found = true;
                } else if dist[next] == usize::MAX {
                    dist[next] = dist[r] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            break;
        }
        fn augment(
            r: usize,
            adj: &[Vec<usize>],
            dist: &mut [usize],
            match_row: &mut [usize],
            match_col: &mut [usize],
        ) -> bool {
            for &c in &adj[r] {
                let next = match_col[c];
                if next == usize::MAX
                    || (dist[next] == dist[r] + 1 && augment(next, adj, dist, match_row, match_col))
                {
                    match_row[r] = c;
                    match_col[c] = r;
                    return true;
                }
            }
            dist[r] = usize::MAX;
            false
        }
        for r in 0..n {
            if match_row[r] == FREE && augment(r, adj, &mut dist, &mut match_row, &mut match_col) {
                size += 1;
            }
        }
    }
    (size == n).then_some(match_row)
}

/// Bottleneck assignment: the smallest threshold admitting a perfect
/// matching among pairs at most that far apart, by bisection over the
/// sorted distinct costs.
pub fn bottleneck_assignment(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut values: Vec<f64> = cost.iter().flatten().copied().collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let feasible = |threshold: f64| {
        let adj: Vec<Vec<usize>> =
            cost.iter().map(|row| (0..n).filter(|&j| row[j] <= threshold).collect()).collect();
        perfect_matching(&adj, n)
    };
    let (mut lo, mut hi) = (0usize, values.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(values[mid]).is_some() {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let matching = feasible(values[lo]).expect("the largest cost is always feasible");
    (values[lo], matching)
}

/// `W_∞` between equal-weight empirical measures.
pub fn winf_exact(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure) -> Result<TransportResult> {
    let cost = cost_matrix(mu, nu)?;
    let (distance, matching) = bottleneck_assignment(&cost);
    Ok(TransportResult { distance, matching, method: TransportMethod::BottleneckBisection })
}

/// Right-hand side of the `ξ₁` dual bound.
pub enum DualTarget<'a> {
    Density(&'a OrientationDensity),
    Empirical(&'a EmpiricalMeasure),
}

/// `|∫ξ₁ dμ − ∫ξ₁ d(target)|`, a lower bound for `W₁` because `ξ₁` is
/// 1-Lipschitz for [`ground_metric`].
pub fn w1_dual_xi1_bound(mu: &EmpiricalMeasure, target: DualTarget<'_>) -> f64 {
    let lhs = mu.mean_of(|xi| xi.0[0]);
    let rhs = match target {
        DualTarget::Density(h) => h.integrate(|xi| xi.0[0]),
        DualTarget::Empirical(nu) => nu.mean_of(|xi| xi.0[0]),
    };
    (lhs - rhs).abs()
}

/// Monte-Carlo estimate of a distance between an empirical measure and
/// `1 ⊗ h`: mean and standard error over `replicates` sampled copies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledDistance {
    pub mean: f64,
    pub std_error: f64,
    pub replicates: usize,
}

pub fn sampled_distance_to_density(
    mu: &EmpiricalMeasure,
    h: &OrientationDensity,
    seed: u64,
    replicates: usize,
    distance: impl Fn(&EmpiricalMeasure, &EmpiricalMeasure) -> Result<TransportResult>,
) -> Result<SampledDistance> {
    if replicates < 2 {
        return Err(Error::InsufficientData { need: 2, got: replicates });
    }
    let n = mu.len();
    let mut values = Vec::with_capacity(replicates);
    for r in 0..replicates {
        let rseed = seed.wrapping_add(r as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(rseed);
        rng.set_stream(u64::MAX);
        let positions: Vec<V> = (0..n).map(|_| Vec3(std::array::from_fn(|_| rng.gen::<f64>()))).collect();
        let xi = sample_orientations(h, n, rseed, SamplingScheme::Iid)?;
        values.push(distance(mu, &EmpiricalMeasure::from_parts(&positions, &xi)?)?.distance);
    }
    let m = values.iter().sum::<f64>() / replicates as f64;
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (replicates - 1) as f64;
    Ok(SampledDistance { mean: m, std_error: (var / replicates as f64).sqrt(), replicates })
}

/// `g(t) = ∫ (ξ₁ − (e^{(c̄/2)Mt}ξ)₁) h(ξ) dξ`.
pub fn g_function(t: f64, h: &OrientationDensity, cbar: f64) -> f64 {
    let e = SpinGenerator::e3().exp(0.5 * cbar * t);
    h.integrate(|xi| xi.0[0] - e.mul_vec(xi).0[0])
}

/// `g′(0) = (c̄/2) ∫ ξ₂ h dξ`.
pub fn g_prime_zero(h: &OrientationDensity, cbar: f64) -> f64 {
    0.5 * cbar * h.integrate(|xi| xi.0[1])
}

/// A time `T*` with `g(t) ≥ g′(0)t/2` on `[0, T*]`: since
/// `|g″| ≤ (c̄/2)² ∫ (ξ₁² + ξ₂²)^{1/2} h`, one may take `T* = g′(0)/sup|g″|`.
pub fn linear_regime_time(h: &OrientationDensity, cbar: f64) -> f64 {
    let curvature = 0.25 * cbar * cbar * h.integrate(|xi| (xi.0[0] * xi.0[0] + xi.0[1] * xi.0[1]).sqrt());
    g_prime_zero(h, cbar) / curvature
}
