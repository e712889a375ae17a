mod common;

use common::*;
use gradual_core::audit::suite::par_draw;
use gradual_core::audit::ks_two_sample;
use gradual_core::audit::ks_one_sample;
use gradual_core::mechanism::{naive_composition_release, tighten_for_third_party};
use gradual_core::stats::{ks_distance_two_sample, ks_threshold_two_sample, pearson};
use gradual_core::{MechanismState, PrivateVector, RandomSource, Response};

fn zeros(n: usize) -> PrivateVector {
    PrivateVector::new(vec![0.0; n]).unwrap()
}

fn fresh(n: usize, alpha: f64, rng: &mut RandomSource) -> MechanismState {
    MechanismState::new(zeros(n), alpha, rng.next_u64()).unwrap()
}

fn mse(responses: &[Vec<f64>]) -> f64 {
    responses.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>()).sum::<f64>() / responses.len() as f64
}

#[test]
fn vector_release_mse() {
    let r = par_draw(1, 0, 100_000, |rng| fresh(3, 1.0, rng).release(lvl(1.0)).unwrap().values);
    let m = mse(&r);
    assert!((m / 6.0 - 1.0).abs() <= 0.02, "{m}");
}

#[test]
fn release_relax_unchanged_fraction() {
    // 10^5 mechanisms × 10 coordinates = 10^6 coordinate trials.
    let pairs: Vec<(f64, f64)> = par_draw(2, 0, 100_000, |rng| {
        let mut m = fresh(10, 1.0, rng);
        let a = m.release(lvl(1.0)).unwrap().values;
        let b = m.release(lvl(2.0)).unwrap().values;
        a.into_iter().zip(b).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    let target = forward_atom_probability(1.0, 2.0);
    assert!((fraction_equal(&pairs) - target).abs() <= 0.01);
}

#[test]
fn prefix_distribution_matches_joint_law() {
    let pairs: Vec<(f64, f64)> = par_draw(3, 0, 100_000, |rng| {
        let mut m = fresh(4, 1.0, rng);
        let a = m.release(lvl(1.0)).unwrap().values;
        let b = m.release(lvl(2.0)).unwrap().values;
        a.into_iter().zip(b).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();
    assert!((fraction_equal(&pairs) - diagonal_mass(1.0, 2.0)).abs() <= 0.01);
    let moved: Vec<(f64, f64)> = pairs.into_iter().filter(|(a, b)| a.to_bits() != b.to_bits()).collect();
    let mut rng = RandomSource::seed_from_u64(33);
    let oracle: Vec<(f64, f64)> = (0..moved.len()).map(|_| oracle_joint_continuous(1.0, 2.0, &mut rng)).collect();
    let threshold = ks_threshold_two_sample(moved.len(), oracle.len());
    let xs = |v: &[(f64, f64)]| v.iter().map(|q| q.0).collect::<Vec<_>>();
    let ys = |v: &[(f64, f64)]| v.iter().map(|q| q.1).collect::<Vec<_>>();
    assert!(ks_distance_two_sample(&xs(&moved), &xs(&oracle)) < threshold);
    assert!(ks_distance_two_sample(&ys(&moved), &ys(&oracle)) < threshold);
}

#[test]
fn coordinates_are_independent() {
    let n = 200_000;
    let pairs: Vec<(f64, f64)> = par_draw(4, 0, n, |rng| {
        let mut m = fresh(2, 1.0, rng);
        m.release(lvl(1.0)).unwrap();
        let v = m.release(lvl(3.0)).unwrap().values;
        (v[0], v[1])
    });
    assert!(pearson(&pairs).abs() <= 3.0 / (n as f64).sqrt());
}

#[test]
fn accuracy_improves_with_level() {
    let mut last = f64::INFINITY;
    for (i, e) in [0.5, 1.0, 2.0, 4.0].into_iter().enumerate() {
        let r = par_draw(5, i as u64, 100_000, |rng| {
            let mut m = fresh(1, 1.0, rng);
            m.release(lvl(0.5)).unwrap();
            m.release(lvl(e)).unwrap().values
        });
        let m = mse(&r);
        assert!(m <= last, "mse at {e} = {m} > {last}");
        last = m;
    }
}

#[test]
fn dp_scaling_is_lipschitz_rescaling() {
    let scaled = par_draw(6, 0, 200_000, |rng| fresh(1, 2.0, rng).release(lvl(2.0)).unwrap().values[0]);
    let unit = par_draw(6, 1, 200_000, |rng| fresh(1, 1.0, rng).release(lvl(1.0)).unwrap().values[0]);
    assert!(ks_two_sample(&scaled, &unit).unwrap().passed);
    let r = fresh(1, 2.0, &mut RandomSource::seed_from_u64(0)).release(lvl(2.0)).unwrap();
    assert_eq!(r.eps_lipschitz.value(), 1.0);
}

#[test]
fn third_party_tightening_law() {
    let pairs: Vec<(f64, f64)> = par_draw(7, 0, 1_000_000, |rng| {
        let released = fresh(1, 1.0, rng).release(lvl(2.0)).unwrap();
        let t = tighten_for_third_party(&released, lvl(1.0), 1.0, rng).unwrap();
        (released.values[0], t.values[0])
    });
    let xs: Vec<f64> = pairs.iter().map(|q| q.1).collect();
    assert!(ks_one_sample(&xs, lvl(1.0)).unwrap().passed);
    assert!((fraction_equal(&pairs) - 0.25).abs() <= 0.01);
}

#[test]
fn third_party_tightening_with_scale() {
    // α = 2: a response at ε_dp = 4 has Lipschitz level 2; tightening to
    // ε_dp = 2 must produce Laplace(1/1) noise around u.
    let xs = par_draw(8, 0, 200_000, |rng| {
        let mut m = MechanismState::new(PrivateVector::new(vec![10.0]).unwrap(), 2.0, rng.next_u64()).unwrap();
        let released: Response = m.release(lvl(4.0)).unwrap();
        tighten_for_third_party(&released, lvl(2.0), 2.0, rng).unwrap().values[0] - 10.0
    });
    assert!(ks_one_sample(&xs, lvl(1.0)).unwrap().passed);
}

#[test]
fn naive_baseline_accuracy() {
    let one = zeros(1);
    let second = |e2: f64, trials: usize, tag: u64| {
        par_draw(9, tag, trials, |rng| {
            naive_composition_release(&one, lvl(1.0), lvl(e2), 1.0, rng.next_u64()).unwrap().1.values[0]
        })
    };
    let gradual = |e2: f64, trials: usize, tag: u64| {
        par_draw(10, tag, trials, |rng| {
            let mut m = fresh(1, 1.0, rng);
            m.release(lvl(1.0)).unwrap();
            m.release(lvl(e2)).unwrap().values[0]
        })
    };
    let ms = |v: Vec<f64>| v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    assert!((ms(second(2.0, 100_000, 0)) / 2.0 - 1.0).abs() <= 0.02);
    assert!((ms(gradual(2.0, 100_000, 0)) / 0.5 - 1.0).abs() <= 0.02);
    assert!((ms(second(1.1, 1_000_000, 1)) / 200.0 - 1.0).abs() <= 0.02);
}

#[test]
fn naive_and_gradual_first_responses_agree_in_law() {
    let one = zeros(1);
    let naive = par_draw(11, 0, 200_000, |rng| {
        naive_composition_release(&one, lvl(1.0), lvl(2.0), 1.0, rng.next_u64()).unwrap().0.values[0]
    });
    let gradual = par_draw(11, 1, 200_000, |rng| fresh(1, 1.0, rng).release(lvl(1.0)).unwrap().values[0]);
    assert!(ks_two_sample(&naive, &gradual).unwrap().passed);
}
