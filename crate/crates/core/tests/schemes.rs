use std::f64::consts::PI;

use udisc::circuit::{
    assemble_scheme, black_box_pair, collapse_processed_unitary, rz_matrix, Example,
    Hypothesis, MeasurementKind, NamedGate, Primitive, Processing, SchemeSpec, UnitarySpec,
};
use udisc::linalg::{c, StateVector};
use udisc::simulator::{exact_distribution, run_statevector, Distribution};
use udisc::theory::{arc_function, multi_copy_bound};

fn divisors(n: usize) -> impl Iterator<Item = usize> {
    (1..=n).filter(move |w| n.is_multiple_of(*w))
}

// Optimal success from the two exact output distributions.
fn ml_success(d0: &Distribution, d1: &Distribution) -> f64 {
    let mut keys: Vec<u64> = d0.probs().keys().chain(d1.probs().keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();
    0.5 * keys.iter().map(|&k| d0.prob(k).max(d1.prob(k))).sum::<f64>()
}

fn distributions(spec: &SchemeSpec) -> (Distribution, Distribution) {
    let d = |h| exact_distribution(&assemble_scheme(spec, h).unwrap()).unwrap();
    (d(Hypothesis::H0), d(Hypothesis::H1))
}

#[test]
fn noiseless_h0_lands_on_zero_for_every_shape() {
    for example in [Example::Example1, Example::Example2] {
        for primitive in [Primitive::Cnot, Primitive::Ecr] {
            for measurement in [MeasurementKind::Short, MeasurementKind::Xor] {
                for w in divisors(12) {
                    let spec = SchemeSpec::new(example.clone(), 12, w, 12 / w)
                        .with_primitive(primitive)
                        .with_measurement(measurement);
                    let (d0, d1) = distributions(&spec);
                    assert!((d0.prob(0) - 1.0).abs() < 1e-9, "{spec:?}");
                    let all = (1u64 << w) - 1;
                    let expected = if measurement == MeasurementKind::Xor { all } else { 1 };
                    assert!((d1.prob(expected) - 1.0).abs() < 1e-9, "{spec:?}");
                }
            }
        }
    }
}

#[test]
fn example2_state_before_measurement() {
    // Preparation and black-box layers for N = 4, w = 2, d = 2 under H0,
    // without the final post-processing, leave (|00⟩ − i|11⟩)/√2.
    let spec = SchemeSpec::new(Example::Example2, 4, 2, 2);
    let full = collapse_processed_unitary(&spec, Hypothesis::H0).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let ghz = StateVector::new(vec![c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(r, 0.0)]).unwrap();
    let out = ghz.evolve(&full).unwrap();
    let expected = StateVector::new(vec![c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -r)]).unwrap();
    assert!((out.inner(&expected).unwrap().norm() - 1.0).abs() < 1e-12);
}

#[test]
fn parity_support_is_even() {
    for w in divisors(16).filter(|&w| w <= 8) {
        let spec = SchemeSpec::new(Example::Example2, 16, w, 16 / w)
            .with_measurement(MeasurementKind::Parity);
        let (d0, d1) = distributions(&spec);
        assert!(d0.support(1e-12).iter().all(|b| b.count_ones() % 2 == 0));
        assert!(d1.support(1e-12).iter().all(|b| b.count_ones() % 2 == 1));
    }
}

#[test]
fn example1_black_box_layer_is_rz_power() {
    // Between preparation and measurement, H1 applies RZ(dπ/N) on each qubit.
    let n = 6;
    for w in divisors(n) {
        let pair = black_box_pair(&Example::Example1, n).unwrap();
        let d = n / w;
        let per_qubit = pair.v().pow(d as u32);
        assert!(per_qubit.max_abs_diff_up_to_phase(&rz_matrix(d as f64 * PI / n as f64)) < 1e-12);
    }
}

#[test]
fn collapse_matches_rz_layers() {
    for n in [4usize, 16] {
        for w in divisors(n).filter(|&w| w <= 4) {
            let d = n / w;
            let spec = SchemeSpec::new(Example::Example2, n, w, d);
            for (h, sign) in [(Hypothesis::H0, -1.0), (Hypothesis::H1, 1.0)] {
                let m = collapse_processed_unitary(&spec, h).unwrap();
                let expected = rz_matrix(sign * PI / (2.0 * n as f64)).pow(d as u32).kron_power(w);
                assert!(m.max_abs_diff_up_to_phase(&expected) < 1e-10);
            }
        }
    }
}

fn gates(list: &[(&str, Option<f64>)]) -> UnitarySpec {
    UnitarySpec::Gates {
        gates: list
            .iter()
            .map(|(n, a)| NamedGate { name: n.to_string(), angle: *a })
            .collect(),
    }
}

#[test]
fn custom_pair_reaches_multi_copy_bound() {
    let u = gates(&[("sx", None), ("rz", Some(0.3)), ("h", None)]);
    let v = gates(&[("rz", Some(0.35)), ("sx", None), ("rz", Some(0.1)), ("h", None)]);
    let example = Example::Custom { u, v, processing: Processing::Adjoint };
    let pair = black_box_pair(&example, 1).unwrap();
    let theta = arc_function(&pair.relative()).unwrap();
    let n = 4;
    assert!(n as f64 * theta < PI);
    for w in divisors(n) {
        for primitive in [Primitive::Cnot, Primitive::Ecr] {
            let spec = SchemeSpec::new(example.clone(), n, w, n / w).with_primitive(primitive);
            let (d0, d1) = distributions(&spec);
            let p = ml_success(&d0, &d1);
            let bound = multi_copy_bound(theta, n);
            assert!((p - bound).abs() < 1e-9, "w={w}: {p} vs {bound}");
            // Only the root carries information.
            assert!(d0.support(1e-9).iter().chain(d1.support(1e-9).iter()).all(|&b| b <= 1));
        }
    }
}

#[test]
fn custom_identity_processing_uses_relative_power() {
    let example = Example::Custom {
        u: gates(&[]),
        v: gates(&[("rz", Some(0.2))]),
        processing: Processing::Identity,
    };
    let spec = SchemeSpec::new(example, 6, 2, 3);
    let (d0, d1) = distributions(&spec);
    assert!((ml_success(&d0, &d1) - multi_copy_bound(0.2, 6)).abs() < 1e-9);
    let c0 = assemble_scheme(&spec, Hypothesis::H0).unwrap();
    assert!(run_statevector(&c0, None).is_ok());
}
