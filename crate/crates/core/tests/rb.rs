// Copyright 2026 The bbq-sim Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::HashSet;

use bbq::rb::clifford::{projective_distance, projective_key, CliffordGroup};
use bbq::rb::*;
use nalgebra::{Matrix4, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn group() -> &'static CliffordGroup {
    clifford_group()
}

#[test]
fn group_has_expected_classes() {
    let g = group();
    assert_eq!(g.len(), 11520);
    let keys: HashSet<_> = g.iter().map(|e| projective_key(&e.unitary)).collect();
    assert_eq!(keys.len(), 11520);
    let s = decomposition_stats();
    assert_eq!(s.cz_class_sizes, vec![576, 5184, 5184, 576]);
    assert_eq!(s.avg_cz, 1.5);
    assert!((3.0..=3.5).contains(&s.avg_non_z_1q), "{}", s.avg_non_z_1q);
}

#[test]
fn identity_is_free() {
    let g = group();
    let e = g.get(g.identity_index());
    assert_eq!(e.cz_count(), 0);
    assert_eq!(e.non_z_count(), 0);
}

#[test]
fn sequences_compose_to_stored_unitaries() {
    for e in group().iter() {
        assert!(projective_distance(&e.seq.unitary(), &e.unitary) < 1e-9);
        assert_eq!(e.seq.cz_count(), e.cz_count());
    }
}

#[test]
fn only_primitive_gates_appear() {
    for e in group().iter() {
        for w in e.seq.0.windows(2) {
            // no two consecutive gates that could merge on the same qubit
            if let (Gate::Z(a, _), Gate::Z(b, _)) = (w[0], w[1]) {
                assert_ne!(a, b);
            }
        }
    }
}

#[test]
fn closure_on_random_pairs() {
    let g = group();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let a = g.get(rng.random_range(0..g.len()));
        let b = g.get(rng.random_range(0..g.len()));
        assert!(g.find(&(a.unitary * b.unitary)).is_some());
    }
}

#[test]
fn ideal_noise_survival_is_one() {
    let cfg = RbConfig {
        depths: vec![1, 5, 20, 80],
        sequences_per_depth: 6,
        seed: 1,
    };
    let r = simulate_rb(&cfg, &NoiseModel::Ideal).unwrap();
    for s in &r.survival {
        assert!((s - 1.0).abs() < 1e-10);
    }
    assert_eq!(r.fit.p, 1.0);
    assert_eq!(r.epc, 0.0);
    let ir = simulate_irb(&cfg, &NoiseModel::Ideal).unwrap();
    assert_eq!(ir.epg, 0.0);
    assert!(!ir.unphysical);
}

#[test]
fn identical_seeds_identical_results() {
    let cfg = RbConfig {
        depths: vec![1, 10, 40],
        sequences_per_depth: 8,
        seed: 99,
    };
    let noise = NoiseModel::DepolarizingAfterCz { epsilon: 0.01 };
    let a = simulate_rb(&cfg, &noise).unwrap();
    let b = simulate_rb(&cfg, &noise).unwrap();
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a.to_csv(), b.to_csv());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let c = pool.install(|| simulate_rb(&cfg, &noise)).unwrap();
    assert_eq!(a, c);
}

/// Decay parameter of a random Clifford when each CZ is followed by
/// depolarizing noise: depolarizing commutes with unitaries, so only the
/// CZ-count distribution matters.
fn closed_form_p(epsilon: f64) -> f64 {
    let q = 1.0 - 4.0 * epsilon / 3.0;
    (576.0 + 5184.0 * q + 5184.0 * q * q + 576.0 * q.powi(3)) / 11520.0
}

#[test]
fn depolarizing_matches_composition() {
    let cfg = RbConfig {
        depths: vec![1, 10, 25, 50, 100, 200, 300],
        sequences_per_depth: 30,
        seed: 4,
    };
    let eps = 0.002;
    let r = simulate_rb(&cfg, &NoiseModel::DepolarizingAfterCz { epsilon: eps }).unwrap();
    let p = closed_form_p(eps);
    assert!((r.fit.p - p).abs() < 0.01 * p);
    assert!((r.epc - 1.5 * eps).abs() < 0.1 * 1.5 * eps, "epc {}", r.epc);
}

#[test]
fn interleaved_bound_holds() {
    let cfg = RbConfig {
        depths: vec![1, 25, 50, 100, 200, 300, 400, 500],
        sequences_per_depth: 30,
        seed: 12,
    };
    let r = simulate_irb(&cfg, &NoiseModel::DepolarizingAfterCz { epsilon: 0.003 }).unwrap();
    let tol = 2.0 * r.epg_std_err.unwrap();
    assert!(r.epg <= r.reference.epg_bound + tol);
    assert!((r.epg - 0.003).abs() < 0.1 * 0.003);
}

#[test]
fn noisy_fit_within_three_standard_errors() {
    // enough depths that the standard error is close to Gaussian; with few
    // residual degrees of freedom the t tails put ~3% beyond 3σ
    let depths: Vec<usize> = (0..16).map(|k| 1 + 20 * k).collect();
    let mut outside = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y: Vec<f64> = depths
            .iter()
            .map(|&m| {
                // Box-Muller
                let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
                let n = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                0.75 * 0.99f64.powi(m as i32) + 0.25 + 0.01 * n
            })
            .collect();
        let f = fit_decay(&depths, &y).unwrap();
        let se = f.std_errors[1].unwrap();
        if (f.p - 0.99).abs() > 3.0 * se {
            outside += 1;
        }
    }
    // a 3σ band should contain nearly every trial
    assert!(outside <= 2, "{outside} of 50 outside 3σ");
}

#[test]
fn readout_with_sampling_noise() {
    let conf = Matrix4::new(
        0.96, 0.04, 0.05, 0.01, //
        0.02, 0.93, 0.00, 0.04, //
        0.02, 0.00, 0.92, 0.05, //
        0.00, 0.03, 0.03, 0.90,
    );
    let truth = Vector4::new(0.97, 0.01, 0.02, 0.0);
    let mut raw = conf * truth;
    raw[3] -= 0.01;
    raw[0] += 0.01;
    let r = readout_correction([raw[0], raw[1], raw[2], raw[3]], &conf).unwrap();
    assert!((r.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(r.probabilities.iter().all(|&p| p >= 0.0));
    assert!(r.residual > 0.0);
}

#[test]
fn bad_columns_rejected() {
    let mut conf = Matrix4::<f64>::identity();
    conf[(0, 0)] = 0.9;
    let e = readout_correction([0.25; 4], &conf).unwrap_err();
    assert!(e.to_string().contains("confusion[:, 0]"));
}
