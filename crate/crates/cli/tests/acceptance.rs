//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use stresslet_core::geometry::{canonical_strain, shell_ordered_indices, LatticeSpec, SymmetryRotation};
use stresslet_core::kernels::{ball_average_curl, SphereSolution};
use stresslet_core::lattice_sums::{c0_prime_interval, lattice_constants, partial_sum_cube, partial_sum_cube_lexicographic, tail_bound};
use stresslet_core::linalg::Vec3;
use stresslet_core::mobility::{decay_probe, symmetry_relation_check, truncated_curl_sum, DecayProbeOptions};
use stresslet_core::sim::{
    build_configuration, per_particle_omega, sample_orientations, simulate, stratified_reference, ConfigurationKind,
    EmpiricalMeasure, OmegaMode, OrientationDensity, RateNormalization, SamplingScheme,
};
use stresslet_core::summation::with_threads;
use stresslet_core::transport::{cost_matrix, g_prime_zero, w1_dual_xi1_bound, w1_exact, winf_exact, DualTarget};
use stresslet_core::Reduction;

const D: Reduction = Reduction::Deterministic;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: u32, name: &str, pass: bool, detail: String) {
        if !pass {
            self.failures += 1;
        }
        println!("[{}] criterion {id} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    }
}

fn criterion_1(r: &mut Report) {
    let lat = LatticeSpec::<f64>::rescaled();
    let start = Instant::now();
    let shell = with_threads(1, || partial_sum_cube(&lat, 35, D)).unwrap();
    let elapsed = start.elapsed();
    let naive = partial_sum_cube_lexicographic(&lat, 35).unwrap();
    let terms = shell_ordered_indices(&lat, 70.0).len();
    let expected_terms = 71 * 141 * 141 - 1;
    let pass = shell <= -2.25 && (shell - naive).abs() < 1e-9 && elapsed < Duration::from_secs(60) && terms == expected_terms;
    r.line(
        1,
        "lattice constant partial sum",
        pass,
        format!(
            "sum = {shell:.16e}, naive order differs by {:.2e}, {terms} terms (expected {expected_terms}), {:.2} s single-threaded",
            (shell - naive).abs(),
            elapsed.as_secs_f64()
        ),
    );
}

fn criterion_2(r: &mut Report) {
    let tail: f64 = tail_bound(35).unwrap();
    let iv = c0_prime_interval::<f64>(35, D).unwrap();
    let c = lattice_constants::<f64>(35, D).unwrap();
    let pass = tail < 2.1
        && (tail - 2.070984).abs() <= 1e-5
        && iv.excludes_zero()
        && c.c0.lower() > 0.018
        && c.cbar.lower() > 0.09;
    r.line(
        2,
        "tail bound and constant intervals",
        pass,
        format!(
            "tail = {tail:.10}, c0' in [{:.4}, {:.4}], c0 >= {:.4}, cbar >= {:.4}",
            iv.lower(),
            iv.upper(),
            c.c0.lower(),
            c.cbar.lower()
        ),
    );
}

fn criterion_3(r: &mut Report) {
    let cubic = LatticeSpec::<f64>::cubic(1.0).unwrap();
    let a = canonical_strain::<f64>();
    let mut worst_sum = 0.0f64;
    for k in [5u32, 10, 20] {
        worst_sum = worst_sum.max(truncated_curl_sum(&cubic, &a, 2.0 * k as f64, D).max_abs());
    }
    let mut worst_sym = 0.0f64;
    for s in SymmetryRotation::shipped() {
        let rep = symmetry_relation_check(&cubic, &s, &a, 10, D).unwrap();
        worst_sym = worst_sym.max(rep.conjugation).max(rep.negation);
    }
    r.line(
        3,
        "cubic cancellation and symmetry relations",
        worst_sum < 1e-12 && worst_sym < 1e-12,
        format!("max |truncated sum| = {worst_sum:.2e}, max symmetry residual = {worst_sym:.2e}"),
    );
}

fn criterion_4(r: &mut Report) {
    let start = Instant::now();
    let rep = decay_probe(&[4.0, 8.0, 16.0, 32.0], DecayProbeOptions::default()).unwrap();
    let elapsed = start.elapsed();
    let bands = [(-5.3, -4.7), (-4.3, -3.7), (-3.3, -2.7)];
    let inside: Vec<bool> = rep.fitted_slopes.iter().zip(bands).map(|(s, (lo, hi))| (lo..=hi).contains(s)).collect();
    let pass = inside.iter().all(|b| *b) && elapsed < Duration::from_secs(300);
    r.line(
        4,
        "decay slopes",
        pass,
        format!(
            "slopes = [{:.4}, {:.4}, {:.4}], in band = {inside:?}, {:.1} s",
            rep.fitted_slopes[0],
            rep.fitted_slopes[1],
            rep.fitted_slopes[2],
            elapsed.as_secs_f64()
        ),
    );
}

fn criterion_5(r: &mut Report) {
    let w = SphereSolution { strain: canonical_strain::<f64>() };
    let worst = [1.5, 2.0, 3.0].iter().map(|&rad| ball_average_curl(&w, rad, 32).unwrap().norm()).fold(0.0, f64::max);
    r.line(5, "ball-average curl of the sphere solution", worst < 1e-8, format!("max |average| = {worst:.2e}"));
}

fn measure(positions: &[Vec3<f64>], xi: &[Vec3<f64>]) -> EmpiricalMeasure {
    EmpiricalMeasure::from_parts(positions, xi).unwrap()
}

/// Mean over seeds of W∞ between a sampled initial measure and a
/// stratified i.i.d. sample of `1 ⊗ h` on the same configuration.
fn winf_surrogate(kind: ConfigurationKind, k: u32, h: &OrientationDensity) -> f64 {
    let config = build_configuration(kind, k, 0.01).unwrap();
    let seeds = 0..8u64;
    let n = seeds.clone().count() as f64;
    seeds
        .map(|seed| {
            let xi = sample_orientations(h, config.len(), seed, SamplingScheme::Mirrored).unwrap();
            let reference = stratified_reference(&config, h, 1000 + seed, SamplingScheme::Iid).unwrap();
            winf_exact(&measure(&config.positions, &xi), &reference).unwrap().distance
        })
        .sum::<f64>()
        / n
}

fn criterion_6(r: &mut Report) {
    let h = OrientationDensity::bump();
    let a = canonical_strain::<f64>();

    // Cubic, N = 343: rates from the symmetric pairing sum on the particle lattice.
    let cubic = build_configuration(ConfigurationKind::Cubic, 7, 0.01).unwrap();
    let sum = truncated_curl_sum(&cubic.lattice().unwrap(), &a, 5.0, D);
    let omegas = vec![sum.scale(2.5 / cubic.len() as f64); cubic.len()];
    let xi = sample_orientations(&h, cubic.len(), 1, SamplingScheme::Mirrored).unwrap();
    let drift = simulate(&cubic, &xi, &omegas, 5.0, 0.1).unwrap().max_drift_angle();

    // Non-cubic, N = 500.
    let nc = build_configuration(ConfigurationKind::Noncubic, 5, 0.01).unwrap();
    let w = per_particle_omega(&nc, &a, OmegaMode::Lattice { k: 35 }, RateNormalization::Physical, D).unwrap();
    let cbar = lattice_constants::<f64>(35, D).unwrap().cbar.estimate;
    let gp = g_prime_zero(&h, cbar);
    let xi = sample_orientations(&h, nc.len(), 1, SamplingScheme::Mirrored).unwrap();
    let traj = simulate(&nc, &xi, &w, 1.0, 0.05).unwrap();
    let margin = traj
        .times
        .iter()
        .zip(&traj.measures)
        .map(|(t, m)| w1_dual_xi1_bound(m, DualTarget::Density(&h)) - 0.4 * gp * t)
        .fold(f64::INFINITY, f64::min);

    let nc_w: Vec<f64> = [2, 3, 4].iter().map(|&k| winf_surrogate(ConfigurationKind::Noncubic, k, &h)).collect();
    let cu_w: Vec<f64> = [3, 4, 6].iter().map(|&k| winf_surrogate(ConfigurationKind::Cubic, k, &h)).collect();
    let decreasing = |v: &[f64]| v.windows(2).all(|p| p[1] < p[0]);

    let pass = drift < 1e-12 && margin >= 0.0 && decreasing(&nc_w) && decreasing(&cu_w);
    r.line(
        6,
        "frozen cubic vs rotating non-cubic",
        pass,
        format!(
            "cubic drift = {drift:.2e}, min(dual - 0.4 g'(0) t) = {margin:.4e} with g'(0) = {gp:.5}, \
             W_inf surrogate noncubic N=32/108/256: {:.3}/{:.3}/{:.3}, cubic N=27/64/216: {:.3}/{:.3}/{:.3}",
            nc_w[0], nc_w[1], nc_w[2], cu_w[0], cu_w[1], cu_w[2]
        ),
    );
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn criterion_7(r: &mut Report) {
    // Deterministic pseudo-random atoms from a fixed linear congruential stream.
    let mut state = 0x2545_f491_4f6c_dd1du64;
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut atom = || {
        let x = Vec3::new(next(), next(), next());
        let v = Vec3::new(next() - 0.5, next() - 0.5, next() - 0.5 + 1e-3);
        (x, v.normalized())
    };
    let (mut err1, mut errinf, mut ordered) = (0.0f64, 0.0f64, true);
    for case in 0..100 {
        let n = 1 + case % 6;
        let mu = EmpiricalMeasure::new((0..n).map(|_| atom()).collect()).unwrap();
        let nu = EmpiricalMeasure::new((0..n).map(|_| atom()).collect()).unwrap();
        let c = cost_matrix(&mu, &nu).unwrap();
        let (mut b1, mut binf) = (f64::INFINITY, f64::INFINITY);
        for p in permutations(n) {
            b1 = b1.min(p.iter().enumerate().map(|(i, &j)| c[i][j]).sum::<f64>() / n as f64);
            binf = binf.min(p.iter().enumerate().map(|(i, &j)| c[i][j]).fold(0.0, f64::max));
        }
        let w1 = w1_exact(&mu, &nu).unwrap().distance;
        let winf = winf_exact(&mu, &nu).unwrap().distance;
        err1 = err1.max((w1 - b1).abs());
        errinf = errinf.max((winf - binf).abs());
        ordered &= w1 <= winf + 1e-12;
    }
    r.line(
        7,
        "transport solvers vs brute force",
        err1 < 1e-12 && errinf < 1e-12 && ordered,
        format!("max W1 error = {err1:.2e}, max Winf error = {errinf:.2e}, W1 <= Winf on all = {ordered}"),
    );
}

fn read_outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_8(r: &mut Report) {
    let runs: [&[&str]; 6] = [
        &["c0", "--k", "35"],
        &["c0", "--k", "35", "--refined"],
        &["omega", "--radius", "0.2"],
        &["simulate", "--kind", "noncubic", "--k", "3", "--T", "1", "--dt", "0.1"],
        &["simulate", "--kind", "noncubic", "--k", "1", "--mode", "direct", "--truncation", "3", "--T", "0.5"],
        &["probe-decay", "--samples", "64"],
    ];
    let mut mismatches = Vec::new();
    let mut failures = Vec::new();
    for args in runs {
        let mut reference: Option<Vec<(String, Vec<u8>)>> = None;
        for threads in [1, 2, 4, 8] {
            let dir = tempfile::tempdir().unwrap();
            let status = Command::new(env!("CARGO_BIN_EXE_stresslet"))
                .args(args)
                .args(["--deterministic", "--threads", &threads.to_string(), "--out"])
                .arg(dir.path())
                .status()
                .unwrap();
            if !status.success() {
                failures.push(format!("{} ({threads} threads)", args.join(" ")));
                continue;
            }
            let files = read_outputs(dir.path());
            match &reference {
                None => reference = Some(files),
                Some(f) if *f != files => mismatches.push(format!("{} ({threads} threads)", args.join(" "))),
                _ => {}
            }
        }
    }
    r.line(
        8,
        "byte-identical outputs for 1/2/4/8 threads",
        mismatches.is_empty() && failures.is_empty(),
        format!("{} commands, mismatches: {mismatches:?}, failed runs: {failures:?}", runs.len()),
    );
}

fn main() {
    let mut r = Report { failures: 0 };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    println!("{} of 8 criteria passed", 8 - r.failures);
    if r.failures > 0 {
        std::process::exit(1);
    }
}
