use chordkd::model::{ModelConfig, Student2e1d};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Scalar probe loss `sum(logits * r)` so every logit carries gradient.
fn probe(m: &Student2e1d, x: &[f64], r: &[f64]) -> f64 {
    m.forward(x).unwrap().iter().zip(r).map(|(a, b)| a * b).sum()
}

/// Relative error with a small floor so exactly-zero gradients (biases
/// feeding a layer norm) are not judged on rounding noise.
fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-5)
}

fn worst_error(seed: u64) -> f64 {
    let cfg = ModelConfig::tiny();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = Student2e1d::new(cfg.clone(), seed).unwrap();
    for v in m.params.values.iter_mut() {
        *v += rng.gen_range(-0.3..0.3);
    }
    let x: Vec<f64> = (0..cfg.seq_len * cfg.n_bins).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let r: Vec<f64> = (0..cfg.seq_len * cfg.n_classes).map(|_| rng.gen_range(-1.0..1.0)).collect();

    m.params.zero_grads();
    let (_, trace) = m.forward_train(&x, None).unwrap();
    m.backward(&trace, &r).unwrap();
    let analytic = m.params.grads.clone();

    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..m.params.len() {
        let orig = m.params.values[i];
        m.params.values[i] = orig + h;
        let up = probe(&m, &x, &r);
        m.params.values[i] = orig - h;
        let down = probe(&m, &x, &r);
        m.params.values[i] = orig;
        let e = relative(analytic[i], (up - down) / (2.0 * h));
        worst = worst.max(e);
    }
    worst
}

#[test]
fn full_model_backward_matches_finite_differences() {
    for seed in 0..20 {
        let e = worst_error(seed);
        assert!(e < 1e-4, "seed {seed}: worst relative error {e:e}");
    }
}

#[test]
fn dropout_backward_matches_finite_differences_with_fixed_mask() {
    let cfg = ModelConfig { dropout: 0.2, ..ModelConfig::tiny() };
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut m = Student2e1d::new(cfg.clone(), 77).unwrap();
    let x: Vec<f64> = (0..cfg.seq_len * cfg.n_bins).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let r: Vec<f64> = (0..cfg.seq_len * cfg.n_classes).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let run = |m: &Student2e1d| {
        let mut mask_rng = ChaCha8Rng::seed_from_u64(5);
        let (y, t) = m.forward_train(&x, Some(&mut mask_rng)).unwrap();
        (y.iter().zip(&r).map(|(a, b)| a * b).sum::<f64>(), t)
    };
    let (_, trace) = run(&m);
    m.backward(&trace, &r).unwrap();
    let analytic = m.params.grads.clone();
    let h = 1e-5;
    for i in (0..m.params.len()).step_by(7) {
        let orig = m.params.values[i];
        m.params.values[i] = orig + h;
        let up = run(&m).0;
        m.params.values[i] = orig - h;
        let down = run(&m).0;
        m.params.values[i] = orig;
        let e = relative(analytic[i], (up - down) / (2.0 * h));
        assert!(e < 1e-4, "param {i}: {e:e}");
    }
}
