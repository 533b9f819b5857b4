use gthsgd::block::norm;
use gthsgd::dataio::{synthesize_logistic, synthesize_quadratic};
use gthsgd::oracle::{LocalModel, LogisticModel, OracleHandle, QuadraticModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const R: f64 = 1e-4;

fn random_unit(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
    let l = norm(&v);
    v.into_iter().map(|x| x / l).collect()
}

/// Per-sample loss written out directly, independent of the library.
fn brute_sample_loss(theta: &[f64], label: f64, x: &[f64]) -> f64 {
    let z: f64 = theta.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() * label;
    (1.0 + (-z).exp()).ln()
}

#[test]
fn logistic_loss_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let p = rng.random_range(1..8);
        let m = rng.random_range(1..20);
        let features: Vec<Vec<f64>> = (0..m).map(|_| random_unit(&mut rng, p)).collect();
        let labels: Vec<f64> = (0..m).map(|_| if rng.random_bool(0.3) { 1.0 } else { -1.0 }).collect();
        let model = LogisticModel::new(features.clone(), labels.clone(), R, 0).unwrap();
        let x: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
        let want: f64 = features.iter().zip(&labels).map(|(f, &l)| brute_sample_loss(f, l, &x)).sum::<f64>() / m as f64
            + R * x.iter().map(|v| v * v / (1.0 + v * v)).sum::<f64>();
        let got = LocalModel::from(model).exact_local_loss(&x).unwrap();
        assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{got} vs {want}");
    }
}

#[test]
fn per_sample_gradients_respect_the_smoothness_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let bound = 0.25 + 2.0 * R;
    let p = 6;
    let features: Vec<Vec<f64>> = (0..200).map(|_| random_unit(&mut rng, p)).collect();
    let labels: Vec<f64> = (0..200).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let model = LocalModel::from(LogisticModel::new(features, labels, R, 0).unwrap());
    assert!((model.smoothness() - bound).abs() < 1e-15);
    let mut handle = OracleHandle::new(&model, 8, 0);
    let mut worst = 0.0f64;
    for t in 0..10_000 {
        let a: Vec<f64> = (0..p).map(|_| rng.random_range(-4.0..4.0)).collect();
        let b: Vec<f64> = a.iter().map(|v| v + rng.random_range(-1.0..1.0)).collect();
        let (ga, gb) = handle.paired_sample_gradient(&a, &b, t).unwrap();
        let diff: Vec<f64> = ga.iter().zip(&gb).map(|(x, y)| x - y).collect();
        let dx: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
        worst = worst.max(norm(&diff) / norm(&dx));
    }
    assert!(worst <= bound, "empirical ratio {worst} exceeds {bound}");
}

#[test]
fn quadratic_noise_variance_is_p_sigma_squared() {
    let p = 12;
    let sigma = 0.3;
    let model: LocalModel = synthesize_quadratic(1, p, sigma, 0.5, 2.0, 4).unwrap().remove(0).into();
    let handle = OracleHandle::new(&model, 4, 0);
    let est = handle.estimate_noise(&vec![0.7; p], 20_000).unwrap();
    let want = p as f64 * sigma * sigma;
    assert!((est - want).abs() <= 0.1 * want, "{est} vs {want}");
    assert_eq!(handle.query_count(), 0, "noise estimation is not billed as oracle queries");
}

#[test]
fn minibatch_noise_shrinks_with_batch_size() {
    let p = 4;
    let model: LocalModel = QuadraticModel::new(vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0, 0.0], vec![0.0, 0.0, 0.0, 1.0]], 1.0).unwrap().into();
    let mut handle = OracleHandle::new(&model, 6, 0);
    let x = vec![0.0; p];
    let draws = 4000;
    let mean_sq = |h: &mut OracleHandle, b: usize| -> f64 {
        (0..draws).map(|t| norm(&h.sample_gradient(&x, t, b).unwrap()).powi(2)).sum::<f64>() / draws as f64
    };
    let v1 = mean_sq(&mut handle, 1);
    let v16 = mean_sq(&mut handle, 16);
    assert!((v1 - 4.0).abs() < 0.4, "{v1}");
    assert!((v16 - 0.25).abs() < 0.025, "{v16}");
    assert_eq!(handle.query_count(), (draws * 17) as u64);
}

#[test]
fn sampling_is_a_pure_function_of_seed_node_and_iteration() {
    let models: Vec<LocalModel> = synthesize_logistic(3, 40, 5, 1.0, 2, R).unwrap().into_iter().map(Into::into).collect();
    let x = [0.2, -0.1, 0.4, 0.0, 1.0];
    for (i, m) in models.iter().enumerate() {
        let mut a = OracleHandle::new(m, 77, i);
        let mut b = OracleHandle::new(m, 77, i);
        // Different call orders, same iteration index, same answers.
        let a5 = a.sample_gradient(&x, 5, 3).unwrap();
        let _ = b.sample_gradient(&x, 1, 3).unwrap();
        let b5 = b.sample_gradient(&x, 5, 3).unwrap();
        assert_eq!(a5, b5);
        let mut c = OracleHandle::new(m, 78, i);
        assert_ne!(c.sample_gradient(&x, 5, 3).unwrap(), a5);
    }
}

#[test]
fn malformed_inputs_are_rejected() {
    assert!(LogisticModel::new(vec![vec![2.0, 0.0]], vec![1.0], R, 0).is_err());
    assert!(LogisticModel::new(vec![vec![1.0, 0.0]], vec![0.0], R, 0).is_err());
    assert!(QuadraticModel::new(vec![vec![1.0, 0.5], vec![0.0, 1.0]], 0.1).is_err());
    let model: LocalModel = QuadraticModel::new(vec![vec![1.0]], 0.1).unwrap().into();
    assert!(model.exact_local_gradient(&[f64::NAN]).is_err());
    assert!(model.exact_local_gradient(&[1.0, 2.0]).is_err());
    let mut h = OracleHandle::new(&model, 0, 0);
    assert!(h.sample_gradient(&[f64::INFINITY], 0, 1).is_err());
}

proptest! {
    #[test]
    fn regularized_gradient_matches_finite_differences(
        xs in proptest::collection::vec(-5.0f64..5.0, 1..6),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = xs.len();
        let features: Vec<Vec<f64>> = (0..5).map(|_| random_unit(&mut rng, p)).collect();
        let labels = vec![1.0, -1.0, 1.0, 1.0, -1.0];
        let model = LocalModel::from(LogisticModel::new(features, labels, 0.05, 0).unwrap());
        let g = model.exact_local_gradient(&xs).unwrap();
        let h = 1e-6;
        for k in 0..p {
            let mut up = xs.clone();
            let mut dn = xs.clone();
            up[k] += h;
            dn[k] -= h;
            let fd = (model.exact_local_loss(&up).unwrap() - model.exact_local_loss(&dn).unwrap()) / (2.0 * h);
            prop_assert!((fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1.0));
        }
    }
}
