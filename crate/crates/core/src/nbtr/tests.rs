use approx::assert_abs_diff_eq;
use ndarray::{array, Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::argmax_lowest;
use super::*;
use crate::nn::{softmax, Activation, DenseNet, Layer};

fn passthrough_estimator() -> DenseNet<f64> {
    DenseNet::from_layers(vec![Layer {
        weights: array![[1.0]],
        bias: array![0.0],
        activation: Activation::Identity,
    }])
    .unwrap()
}

fn random_record(rng: &mut ChaCha8Rng, m: usize, d: usize, env: usize) -> ComparisonRecord<f64> {
    let items = (0..m).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let env = (env > 0).then(|| (0..env).map(|_| rng.random_range(-1.0..1.0)).collect());
    ComparisonRecord::new(items, rng.random_range(0..m), env).unwrap()
}

#[test]
fn identical_items_share_a_rating() {
    let model = NbtrModel::<f64>::symmetric(&[3, 8, 1], 4, 1).unwrap();
    let item = vec![0.2, -0.4, 0.9];
    let r = ComparisonRecord::new(vec![item.clone(); 4], 2, None).unwrap();
    let ratings = model.predict_ratings(&r).unwrap();
    assert!(ratings.iter().all(|v| *v == ratings[0]));
    for p in model.predict_probs(&r).unwrap() {
        assert_abs_diff_eq!(p, 0.25, epsilon = 1e-15);
    }
    assert_eq!(model.rate_item(&item).unwrap(), ratings[0]);
}

#[test]
fn zero_estimator_rates_everything_zero() {
    let est = DenseNet::<f64>::zeros(&[2, 5, 1]).unwrap();
    let model = NbtrModel::from_parts(est, None, true, 3, 0, 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let r = random_record(&mut rng, 3, 2, 0);
    assert_eq!(model.predict_ratings(&r).unwrap(), vec![0.0; 3]);
}

#[test]
fn ratings_map_to_outcome_probabilities() {
    let model = NbtrModel::from_parts(passthrough_estimator(), None, true, 2, 0, 0).unwrap();
    let r = ComparisonRecord::new(vec![vec![2.83], vec![6.41]], 1, None).unwrap();
    let p = model.predict_probs(&r).unwrap();
    assert_abs_diff_eq!(p[0], 0.0269, epsilon = 5e-4);
    assert_abs_diff_eq!(p[1], 0.9731, epsilon = 5e-4);
    assert_abs_diff_eq!(win_prob_from_ratings(6.41, 2.83), 0.9731, epsilon = 5e-4);
    assert_eq!(win_prob_from_ratings(1.5, 1.5), 0.5);
}

#[test]
fn win_prob_is_shift_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..200 {
        let (a, b): (f64, f64) = (rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let d = rng.random_range(-50.0..50.0);
        assert_abs_diff_eq!(win_prob_from_ratings(a + d, b + d), win_prob_from_ratings(a, b), epsilon = 1e-9);
    }
}

#[test]
fn symmetric_model_is_permutation_equivariant() {
    let model = NbtrModel::<f64>::symmetric(&[4, 6, 6, 1], 3, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let r = random_record(&mut rng, 3, 4, 0);
        let perm = [2, 0, 1];
        let pr = r.permuted(&perm).unwrap();
        let (a, b) = (model.predict_probs(&r).unwrap(), model.predict_probs(&pr).unwrap());
        let (ra, rb) = (model.predict_ratings(&r).unwrap(), model.predict_ratings(&pr).unwrap());
        for k in 0..3 {
            assert_eq!(b[k], a[perm[k]]);
            assert_eq!(rb[k], ra[perm[k]]);
        }
    }
}

#[test]
fn zero_adjuster_keeps_the_fair_ranking() {
    let model = NbtrModel::<f64>::asymmetric(&[3, 5, 1], &[], 3, 2, true, 4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let r = random_record(&mut rng, 3, 3, 2);
        let ratings = model.predict_ratings(&r).unwrap();
        let fair = softmax(&ratings).unwrap();
        let q = model.predict_probs(&r).unwrap();
        let expected = softmax(&fair).unwrap();
        for k in 0..3 {
            assert_abs_diff_eq!(q[k], expected[k], epsilon = 1e-15);
        }
        assert_eq!(argmax_lowest(&q), argmax_lowest(&ratings));
        assert_abs_diff_eq!(q.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn missing_environment_is_rejected() {
    let model = NbtrModel::<f64>::asymmetric(&[2, 1], &[], 2, 1, true, 0).unwrap();
    let r = ComparisonRecord::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]], 0, None).unwrap();
    assert!(model.predict_probs(&r).is_err());
    let wrong_dim = ComparisonRecord::new(vec![vec![0.0], vec![1.0]], 0, None).unwrap();
    assert!(model.predict_ratings(&wrong_dim).is_err());
    assert!(NbtrModel::<f64>::symmetric(&[2, 3], 2, 0).is_err());
}

#[test]
fn full_graph_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for seed in 0..10u64 {
        let m = rng.random_range(2..5);
        let d = rng.random_range(1..5);
        let env = rng.random_range(0..3);
        let models = [
            NbtrModel::<f64>::symmetric(&[d, 7, 5, 1], m, seed).unwrap(),
            NbtrModel::<f64>::asymmetric(&[d, 6, 1], &[4], m, env, true, seed).unwrap(),
            NbtrModel::<f64>::asymmetric(&[d, 6, 1], &[], m, env, false, seed).unwrap(),
        ];
        for mut model in models {
            // biases off zero keep pre-activations away from the ReLU kink;
            // the zero-initialized adjuster layer gets something to differentiate through
            for l in model.estimator_mut().layers_mut() {
                l.bias.mapv_inplace(|_| rng.random_range(-0.3..0.3));
            }
            if let Some(a) = model.adjuster_mut() {
                for l in a.layers_mut() {
                    l.weights.mapv_inplace(|_| rng.random_range(-0.8..0.8));
                    l.bias.mapv_inplace(|_| rng.random_range(-0.3..0.3));
                }
            }
            let env_len = model.env_dim();
            let records: Vec<_> = loop {
                let rs: Vec<_> = (0..3).map(|_| random_record(&mut rng, m, d, env_len)).collect();
                if model.kink_margin(&rs.iter().collect::<Vec<_>>()).unwrap() > 1e-2 {
                    break rs;
                }
            };
            let refs: Vec<_> = records.iter().collect();
            let check = gradcheck_model(&model, &refs, 1e-4).unwrap();
            assert!(check.passed(), "seed {seed} {:?}: {check:?}", model.structure());
        }
    }
}

fn separable(n: usize, seed: u64) -> Dataset<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records = (0..n)
        .map(|_| {
            let (a, b): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            ComparisonRecord::new(vec![vec![a], vec![b]], usize::from(b > a), None).unwrap()
        })
        .collect();
    Dataset::from_records(records).unwrap()
}

#[test]
fn learns_a_separable_task() {
    let data = separable(1000, 1);
    let cfg = TrainConfig {
        estimator_hidden: vec![16, 16],
        seed: 3,
        ..Default::default()
    };
    let model = cfg.build_model(&data).unwrap();
    let (model, report) = train(model, &data, &cfg, Some(&data)).unwrap();
    assert_eq!(report.epoch_loss.len(), 5);
    assert!(report.test_accuracy.unwrap() >= 0.95, "{report:?}");
    // larger feature, larger rating
    assert!(model.rate_item(&[0.8]).unwrap() > model.rate_item(&[-0.8]).unwrap());
}

#[test]
fn random_labels_plateau_near_log_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let m = 3;
    let records = (0..2000).map(|_| random_record(&mut rng, m, 2, 0)).collect();
    let data = Dataset::from_records(records).unwrap();
    let cfg = TrainConfig {
        estimator_hidden: vec![8],
        adam: crate::nn::AdamConfig {
            lr: 1e-2,
            ..Default::default()
        },
        ..Default::default()
    };
    let (_, report) = train(cfg.build_model(&data).unwrap(), &data, &cfg, None).unwrap();
    let last = *report.epoch_loss.last().unwrap();
    assert!((last - (m as f64).ln()).abs() < 0.05, "{report:?}");
}

#[test]
fn training_is_deterministic_and_resumable() {
    let data = separable(300, 2);
    let cfg = TrainConfig {
        estimator_hidden: vec![8],
        structure: Structure::Asymmetric { skip: true },
        validation_fraction: 0.2,
        epochs: 2,
        seed: 77,
        ..Default::default()
    };
    let run = || train(cfg.build_model(&data).unwrap(), &data, &cfg, None).unwrap();
    let (m1, r1) = run();
    let (m2, r2) = run();
    assert_eq!(r1, r2);
    assert_eq!(m1.to_json().unwrap(), m2.to_json().unwrap());
    assert!(r1.val_accuracy.iter().all(Option::is_some));

    let restored = NbtrModel::<f64>::from_json(&m1.to_json().unwrap()).unwrap();
    assert_eq!(restored, m1);
    let r = &data.records()[0];
    assert_eq!(restored.predict_probs(r).unwrap(), m1.predict_probs(r).unwrap());
    assert_eq!(restored.optimizer().unwrap().estimator.t, m1.optimizer().unwrap().estimator.t);
}

#[test]
fn train_rejects_mismatched_data() {
    let data = separable(10, 0);
    let model = NbtrModel::<f64>::symmetric(&[2, 1], 2, 0).unwrap();
    assert!(train(model, &data, &TrainConfig::default(), None).is_err());
    let model = NbtrModel::<f64>::symmetric(&[1, 1], 2, 0).unwrap();
    let bad = TrainConfig {
        epochs: 0,
        ..Default::default()
    };
    assert!(train(model.clone(), &data, &bad, None).is_err());
    let empty = Dataset::<f64>::new(2, 1, 0).unwrap();
    assert!(train(model, &empty, &TrainConfig::default(), None).is_err());
}

#[test]
fn batch_rating_matches_single() {
    let model = NbtrModel::<f64>::symmetric(&[2, 4, 1], 2, 5).unwrap();
    let xs = Array2::from_shape_vec((3, 2), vec![0.1, 0.2, -0.3, 0.4, 1.0, -1.0]).unwrap();
    let batch = model.rate_items(xs.view()).unwrap();
    for (i, row) in xs.rows().into_iter().enumerate() {
        assert_eq!(batch[i], model.rate_item(row.as_slice().unwrap()).unwrap());
    }
    let _ = Array1::<f64>::zeros(1);
}

#[test]
fn f32_models_train() {
    let data64 = separable(2000, 3);
    let records = data64
        .records()
        .iter()
        .map(|r| {
            let items = r.items().iter().map(|i| i.iter().map(|v| *v as f32).collect()).collect();
            ComparisonRecord::new(items, r.winner(), None).unwrap()
        })
        .collect();
    let data = Dataset::<f32>::from_records(records).unwrap();
    let cfg = TrainConfig {
        estimator_hidden: vec![8],
        ..Default::default()
    };
    let (_, report) = train(cfg.build_model(&data).unwrap(), &data, &cfg, Some(&data)).unwrap();
    assert!(report.test_accuracy.unwrap() > 0.9);
}

