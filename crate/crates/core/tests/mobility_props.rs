use proptest::prelude::*;
use stresslet_core::geometry::{canonical_strain, LatticeSpec, StrainMatrix, SymmetryRotation, TorusGeometry};
use stresslet_core::lattice_sums::refined_c0_prime;
use stresslet_core::linalg::{Mat3, Vec3};
use stresslet_core::mobility::*;
use stresslet_core::{Error, Reduction};

const D: Reduction = Reduction::Deterministic;

fn shear(a12: f64, a13: f64) -> StrainMatrix<f64> {
    StrainMatrix::new(Mat3::from_f64([[0.0, a12, a13], [a12, 0.0, 0.0], [a13, 0.0, 0.0]])).unwrap()
}

#[test]
fn cubic_truncations_vanish_by_pairing() {
    let lat = LatticeSpec::<f64>::cubic(1.0).unwrap();
    let a = canonical_strain::<f64>();
    for radius in [1.0, 2.0, 7.0, 10.0, 20.0, 40.0] {
        let t = truncated_curl_sum(&lat, &a, radius, D);
        assert!(t.max_abs() < 1e-12, "radius {radius}: {t:?}");
    }
    // Term-by-term: y and its 1↔2 swap contribute exact opposites to the third component.
    for idx in stresslet_core::geometry::lattice_indices_in_cube(&lat, 6.0) {
        let y = lat.point(idx);
        let z = lat.point([idx[1], idx[0], idx[2]]);
        let t = |p: &Vec3<f64>| {
            let r2 = p.norm_sq();
            a.apply(p).cross(p).0[2] / (r2 * r2 * r2.sqrt())
        };
        assert_eq!(t(&y) + t(&z), 0.0);
    }
}

#[test]
fn symmetry_relations() {
    let a = canonical_strain::<f64>();
    let cubic = LatticeSpec::<f64>::cubic(1.0).unwrap();
    let aniso = LatticeSpec::<f64>::rescaled();
    for s in SymmetryRotation::shipped() {
        let r = symmetry_relation_check(&cubic, &s, &a, 10, D).unwrap();
        assert!(r.conjugation < 1e-12 && r.negation < 1e-12);
    }
    let r3 = symmetry_relation_check(&cubic, &SymmetryRotation::s3(), &a, 10, D).unwrap();
    assert!(r3.curl.max_abs() < 1e-12);
    for s in [SymmetryRotation::s1(), SymmetryRotation::s2()] {
        let r = symmetry_relation_check(&aniso, &s, &a, 10, D).unwrap();
        assert!(r.conjugation < 1e-12 && r.negation < 1e-12);
    }
    assert_eq!(
        symmetry_relation_check(&aniso, &SymmetryRotation::s3(), &a, 10, D),
        Err(Error::NotALatticeSymmetry)
    );
}

#[test]
fn negated_strain_negates_curl() {
    let lat = LatticeSpec::<f64>::rescaled();
    let a = canonical_strain::<f64>();
    let p = curl_tilde_u_origin(&lat, &a, 35, D).unwrap();
    let m = curl_tilde_u_origin(&lat, &a.negated(), 35, D).unwrap();
    assert_eq!(p.estimate(), -m.estimate());
    assert!(p.components[2].excludes_zero());
}

#[test]
fn sign_constant_across_truncations() {
    let lat = LatticeSpec::<f64>::rescaled();
    let a = canonical_strain::<f64>();
    let signs: Vec<bool> =
        [10, 20, 35].iter().map(|k| curl_tilde_u_origin(&lat, &a, *k, D).unwrap().components[2].estimate > 0.0).collect();
    assert!(signs.iter().all(|s| *s));
    for k in [35, 40] {
        assert!(curl_tilde_u_origin(&lat, &a, k, D).unwrap().components[2].excludes_zero());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn linear_over_conjugate_span(a12 in -2.0..2.0f64, a13 in -2.0..2.0f64) {
        let lat = LatticeSpec::<f64>::rescaled();
        let c = curl_tilde_u_origin(&lat, &shear(a12, a13), 10, D).unwrap().estimate();
        let c1 = curl_tilde_u_origin(&lat, &shear(1.0, 0.0), 10, D).unwrap().estimate();
        let c2 = curl_tilde_u_origin(&lat, &shear(0.0, 1.0), 10, D).unwrap().estimate();
        prop_assert!((c - (c1.scale(a12) + c2.scale(a13))).max_abs() < 1e-12);
        let direct = truncated_curl_sum(&lat, &shear(a12, a13), 20.0, D);
        prop_assert!((c - direct).max_abs() < 1e-12);
    }
}

#[test]
fn torus_angular_velocity_is_cubic_in_radius() {
    let t = TorusGeometry::<f64>::anisotropic(1.0).unwrap();
    let a = canonical_strain();
    let base = angular_velocity_torus(&t, &a, 0.2, 35, D).unwrap().omega;
    for r in [0.01, 0.05, 0.1, 0.4] {
        let w = angular_velocity_torus(&t, &a, r, 35, D).unwrap().omega;
        assert_eq!((w.0[0], w.0[1]), (0.0, 0.0));
        assert!((w.0[2] / base.0[2] - (r / 0.2f64).powi(3)).abs() < 1e-12);
    }
    let cubic = TorusGeometry::<f64>::cubic(1.0).unwrap();
    assert_eq!(angular_velocity_torus(&cubic, &a, 0.2, 35, D).unwrap().omega, Vec3::zero());
}

fn probe() -> DecayProbeReport<f64> {
    decay_probe(&[4.0, 8.0, 16.0, 32.0], DecayProbeOptions { samples: 128, ..Default::default() }).unwrap()
}

#[test]
fn decay_probe_structure() {
    let r = probe();
    let n3 = &r.norms[2];
    for w in n3.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 8.0).abs() <= 0.2 * 8.0, "gradient ratio {ratio}");
    }
    let n1 = &r.norms[0];
    let c = n1[0] * 4f64.powi(5);
    for (l, v) in r.box_sizes.iter().zip(n1) {
        assert!(*v <= c * l.powi(-5) * (1.0 + 1e-12), "L = {l}");
    }
    let dropped = |j: usize| fit_loglog_slope(&r.box_sizes[..3], &r.norms[j][..3]).unwrap();
    for j in 0..3 {
        assert!((dropped(j) - r.fitted_slopes[j]).abs() < 0.2);
        assert!(r.norms[j].iter().all(|v| *v >= 0.0));
    }
    assert!((r.fitted_slopes[2] + 3.0).abs() <= 0.3);
}

#[test]
fn probe_curl_matches_lattice_constant() {
    let refined = refined_c0_prime::<f64>(20, 4, D).unwrap().estimate;
    let expected = -5.0 * refined / 8.0;
    let r = probe();
    for (l, c) in r.box_sizes.iter().zip(&r.origin_curl) {
        let scaled = c.0[2] * l.powi(3);
        assert!(((scaled - expected) / expected).abs() < 2e-3, "L = {l}: {scaled} vs {expected}");
        assert!(c.0[0].abs() < 1e-15 && c.0[1].abs() < 1e-15);
    }
}

#[test]
fn probe_argument_checks() {
    let opts = DecayProbeOptions::default();
    assert!(decay_probe(&[4.0], opts).is_err());
    assert!(decay_probe(&[4.0, 8.0, 16.0], opts).is_err());
    assert!(decay_probe(&[2.0, 8.0, 16.0, 32.0], opts).is_err());
}

#[test]
fn deficit_decays_like_cube() {
    let d8: f64 = dbar_u_deficit(8.0, 4, 8).unwrap();
    let d16: f64 = dbar_u_deficit(16.0, 4, 8).unwrap();
    assert!(d8 > 0.0 && d16 > 0.0);
    assert!((d8 / d16 - 8.0).abs() <= 0.25 * 8.0, "ratio {}", d8 / d16);
    assert!(dbar_u_deficit::<f64>(2.0, 4, 8).is_err());
}
