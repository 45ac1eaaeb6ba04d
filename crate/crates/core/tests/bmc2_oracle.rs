mod common;

use common::{instance, naive};
use keystep_core::bmc2::{bmc2_loss, BootstrapVariant, GammaPositions, LossConfig, Reduction};
use ndarray::Array2;

#[test]
fn vectorized_matches_naive_reference() {
    for seed in 0..20 {
        let (q, raw, ts) = instance(seed, 64, 2, 32);
        let views: Vec<_> = q.iter().map(|x| x.view()).collect();
        for variant in [
            BootstrapVariant::UnionPosNeg,
            BootstrapVariant::UnionNegOnly,
            BootstrapVariant::SampledOnly,
            BootstrapVariant::None,
        ] {
            for gamma_positions in [GammaPositions::Unit, GammaPositions::ChunkIndex] {
                let cfg = LossConfig {
                    bootstrap_variant: variant,
                    gamma_positions,
                    ..Default::default()
                };
                let fast = bmc2_loss(&views, Some(raw.view()), &ts, &cfg, false).unwrap().loss;
                let slow = naive(&q, &raw, &ts, &cfg);
                assert!((fast - slow).abs() <= 1e-9 * slow.abs().max(1.0), "{variant:?}: {fast} vs {slow}");
            }
        }
    }
}

#[test]
fn three_modalities_use_default_weights() {
    let (q, raw, ts) = instance(5, 24, 3, 8);
    let views: Vec<_> = q.iter().map(|x| x.view()).collect();
    let cfg = LossConfig {
        reduction: Reduction::Sum,
        ..Default::default()
    };
    let fast = bmc2_loss(&views, Some(raw.view()), &ts, &cfg, false).unwrap().loss;
    assert!((fast - naive(&q, &raw, &ts, &cfg)).abs() < 1e-9 * fast);
}

#[test]
fn identical_modalities_quadruple_the_single_block() {
    let (q, raw, ts) = instance(3, 32, 1, 16);
    let cfg = LossConfig {
        reduction: Reduction::Sum,
        ..Default::default()
    };
    let one = bmc2_loss(&[q[0].view()], Some(raw.view()), &ts, &cfg, false).unwrap().loss;
    let two = bmc2_loss(&[q[0].view(), q[0].view()], Some(raw.view()), &ts, &cfg, false).unwrap().loss;
    assert!((two - 4.0 * one).abs() < 1e-9 * two);
}

#[test]
fn gradient_wrt_projections_matches_finite_differences() {
    let (q, raw, ts) = instance(11, 12, 2, 5);
    let cfg = LossConfig {
        margin: 1.3,
        ..Default::default()
    };
    let loss = |q: &[Array2<f64>]| {
        let v: Vec<_> = q.iter().map(|x| x.view()).collect();
        bmc2_loss(&v, Some(raw.view()), &ts, &cfg, false).unwrap().loss
    };
    let views: Vec<_> = q.iter().map(|x| x.view()).collect();
    let out = bmc2_loss(&views, Some(raw.view()), &ts, &cfg, true).unwrap();
    let eps = 1e-6;
    let mut worst = 0.0f64;
    for m in 0..2 {
        for idx in 0..q[m].len() {
            let (r, c) = (idx / q[m].ncols(), idx % q[m].ncols());
            let mut plus = q.clone();
            plus[m][[r, c]] += eps;
            let mut minus = q.clone();
            minus[m][[r, c]] -= eps;
            let fd = (loss(&plus) - loss(&minus)) / (2.0 * eps);
            let an = out.grads[m][[r, c]];
            worst = worst.max((fd - an).abs() / (fd.abs() + an.abs()).max(1e-8));
        }
    }
    assert!(worst < 1e-4, "max relative error {worst}");
}

#[test]
fn loss_is_nonnegative_and_monotone() {
    // two frames, one positive pair: moving them closer lowers the loss
    let ts = [0.0, 1.0];
    let cfg = LossConfig {
        bootstrap_enabled: false,
        reduction: Reduction::Sum,
        ..Default::default()
    };
    let pair = |angle: f64| {
        let q = ndarray::array![[1.0, 0.0], [angle.cos(), angle.sin()]];
        bmc2_loss(&[q.view()], None, &ts, &cfg, false).unwrap().loss
    };
    let mut prev = f64::INFINITY;
    for k in (0..=10).rev() {
        let l = pair(k as f64 * 0.3);
        assert!(l >= 0.0 && l <= prev);
        prev = l;
    }
    // negative pair: pushing apart beyond the margin never increases the loss
    let far = LossConfig {
        sigma: 0.5,
        margin: 1.0,
        ..cfg
    };
    let neg = |angle: f64| {
        let q = ndarray::array![[1.0, 0.0], [angle.cos(), angle.sin()]];
        bmc2_loss(&[q.view()], None, &ts, &far, false).unwrap().loss
    };
    let mut prev = f64::INFINITY;
    for k in 0..=10 {
        let l = neg(k as f64 * 0.3);
        assert!(l <= prev);
        prev = l;
    }
    assert_eq!(neg(3.0), 0.0);
}

#[test]
fn window_invariants_hold() {
    let (q, raw, ts) = instance(21, 40, 2, 4);
    let views: Vec<_> = q.iter().map(|x| x.view()).collect();
    let out = bmc2_loss(&views, Some(raw.view()), &ts, &LossConfig::default(), false).unwrap();
    let ws = &out.windows;
    for a in 0..ts.len() {
        assert!(ws.w[a][a] && ws.w_tilde[a][a]);
        for j in 0..ts.len() {
            assert_eq!(ws.w[a][j], ws.w[j][a]);
            assert_eq!(ws.w_tilde[a][j], ws.w[a][j] || ws.w_prime[a][j]);
        }
    }
    let json = serde_json::to_string(ws).unwrap();
    assert!(json.contains("w_tilde"));
}

#[test]
fn lambda_shape_mismatch_is_config_error() {
    let (q, raw, ts) = instance(1, 8, 2, 4);
    let views: Vec<_> = q.iter().map(|x| x.view()).collect();
    let cfg = LossConfig {
        lambda: Some(vec![vec![1.0]]),
        ..Default::default()
    };
    let err = bmc2_loss(&views, Some(raw.view()), &ts, &cfg, false).unwrap_err();
    assert!(matches!(err, keystep_core::Error::Config(_)));
}
