use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use spdc_core::circuit::{
    buildup_at, buildup_airy_at, cascade, coupler_block, h_at, segmented_bend_block, waveguide_block, CavityCoupling,
};
use spdc_core::dispersion::{angle_interpolated_index, circular_bend_segments, Band, DispersionModel, QpmConvention};
use spdc_core::metrics::{fold_mirrored, schmidt_decompose, IslandWindow};
use spdc_core::spdc::{cavity_factor, Axis, CavityPoint, JsaGrid, Provenance, C64};
use spdc_core::units::thz_to_omega;

fn grid() -> Arc<[f64]> {
    (0..9).map(|k| thz_to_omega(192.0 + 0.25 * k as f64)).collect::<Vec<_>>().into()
}

fn model(n0: f64, n1: f64) -> DispersionModel {
    DispersionModel::taylor(Band::Telecom, thz_to_omega(193.0), n0, n1, 0.0, (thz_to_omega(180.0), thz_to_omega(206.0)))
        .unwrap()
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn angle_index_between_axes(n1 in 1.5f64..2.5, n2 in 1.5f64..2.5, phi in 0.0f64..(2.0 * PI)) {
        let n = angle_interpolated_index(n1, n2, phi);
        prop_assert!(n >= n1.min(n2) - 1e-12 && n <= n1.max(n2) + 1e-12);
        prop_assert!((angle_interpolated_index(n1, n2, phi + PI) - n).abs() < 1e-12);
    }

    #[test]
    fn taylor_group_index_at_centre(n0 in 1.8f64..2.4, n1 in -0.05f64..0.05) {
        let m = model(n0, n1);
        let ng = m.group_index(thz_to_omega(193.0)).unwrap();
        prop_assert!((ng - (n0 + n1)).abs() < 1e-6);
    }

    #[test]
    fn cascade_is_associative(
        l in proptest::collection::vec(1e-4f64..3e-3, 3),
        loss in proptest::collection::vec(0.0f64..200.0, 3),
        k2 in 0.01f64..0.99,
    ) {
        let g = grid();
        let m = model(2.2, 0.02);
        let a = waveguide_block(l[0], &m, loss[0], g.clone()).unwrap();
        let b = coupler_block(k2, g.clone()).unwrap();
        let c = waveguide_block(l[1] + l[2], &m, loss[1] + loss[2], g.clone()).unwrap();
        let left = cascade(&[cascade(&[a.clone(), b.clone()]).unwrap(), c.clone()]).unwrap();
        let right = cascade(&[a, cascade(&[b, c]).unwrap()]).unwrap();
        for k in 0..g.len() {
            let (x, y) = (left.matrix(k), right.matrix(k));
            for r in 0..2 {
                for s in 0..2 {
                    prop_assert!(close(x[r][s], y[r][s], 1e-10));
                }
            }
        }
    }

    #[test]
    fn coupler_is_unitary(k2 in 0.0f64..=1.0) {
        let b = coupler_block(k2, grid()).unwrap();
        prop_assert!(b.is_lossless() && b.is_reciprocal());
        prop_assert!(b.max_column_norm_error() < 1e-12);
    }

    #[test]
    fn allpass_magnitude_bounded(sigma in 0.0f64..1.0, eta in 0.01f64..1.0, phase in -PI..PI) {
        let c = CavityCoupling::lumped(sigma, eta).unwrap();
        prop_assert!(h_at(&c, phase).norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn buildup_forms_agree(sigma in 0.0f64..0.999, eta in 0.01f64..0.999, phase in -PI..PI) {
        let c = CavityCoupling::lumped(sigma, eta).unwrap();
        let a = buildup_at(&c, phase);
        let b = buildup_airy_at(&c, phase);
        prop_assert!((a - b).abs() <= 1e-9 * a);
    }

    #[test]
    fn cavity_factor_is_exchange_symmetric_in_magnitude(
        sigma in 0.5f64..0.999, eta in 0.5f64..0.999, p in -PI..PI, q in -PI..PI,
    ) {
        let c = CavityCoupling::lumped(sigma, eta).unwrap();
        let (a, b) = (CavityPoint::from_coupling(&c, p), CavityPoint::from_coupling(&c, q));
        prop_assert!((cavity_factor(&a, &b).norm() - cavity_factor(&b, &a).norm()).abs() <= 1e-10 * cavity_factor(&a, &b).norm());
    }

    #[test]
    fn schmidt_bounds_and_scale(values in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 36), scale in 1e-6f64..1e6) {
        let v: Vec<C64> = values.iter().map(|(a, b)| C64::new(*a, *b)).collect();
        prop_assume!(v.iter().any(|z| z.norm() > 1e-3));
        let axis = Axis::new(1.2e15, 1e9, 6).unwrap();
        let g = JsaGrid::new(axis, axis, v, Provenance::CavityJ).unwrap();
        let r = schmidt_decompose(&g).unwrap();
        prop_assert!(r.schmidt_number >= 1.0 - 1e-9 && r.schmidt_number <= 6.0 + 1e-9);
        prop_assert!(r.entropy_nats >= -1e-12 && r.entropy_nats <= 6f64.ln() + 1e-9);
        let s = schmidt_decompose(&g.scaled(scale)).unwrap();
        prop_assert!((r.schmidt_number - s.schmidt_number).abs() < 1e-9 * r.schmidt_number);
    }

    #[test]
    fn split_never_exceeds_folded_count(w in proptest::collection::vec(0.01f64..1.0, 1..20)) {
        let n = 2 * w.len();
        let windows: Vec<IslandWindow> = (0..n)
            .map(|k| {
                let (s, i) = (k, n - 1 - k);
                IslandWindow {
                    index: k,
                    signal_resonance: s,
                    idler_resonance: i,
                    signal_center: s as f64,
                    idler_center: i as f64,
                    signal_lo: s as f64 - 0.5,
                    signal_hi: s as f64 + 0.5,
                    idler_lo: i as f64 - 0.5,
                    idler_hi: i as f64 + 0.5,
                }
            })
            .collect();
        let weights: Vec<f64> = (0..n).map(|k| w[k.min(n - 1 - k)]).collect();
        let m = fold_mirrored(&windows, &weights).unwrap();
        prop_assert_eq!(m.accessible_count, w.len());
        prop_assert!(m.k_split <= w.len() as f64 + 1e-9 && m.k_split >= 1.0 - 1e-9);
    }
}

#[test]
fn bend_magnitude_converges_under_segment_doubling() {
    let g = grid();
    let (o, e) = (model(2.21, 0.02), model(2.14, 0.02));
    let s21 = |n: usize| {
        let segs = circular_bend_segments(80e-6, 0.0, PI, n).unwrap();
        segmented_bend_block(&segs, &o, &e, 300.0, g.clone()).unwrap()
    };
    let coarse = s21(16);
    let fine = s21(256);
    for k in 0..g.len() {
        let (a, b) = (coarse.s21(k).norm(), fine.s21(k).norm());
        assert!((a - b).abs() / b < 0.01);
    }
    assert!(!fine.phase_trusted());
}

#[test]
fn qpm_conventions_differ_by_factor_two() {
    let a = QpmConvention::PiOverLambda.grating_wavevector(5e-6);
    let b = QpmConvention::TwoPiOverLambda.grating_wavevector(5e-6);
    assert!((b - 2.0 * a).abs() < 1e-9 * b);
}
