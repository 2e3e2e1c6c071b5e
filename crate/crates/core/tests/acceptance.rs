//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod support;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use chordkd::annotation::{IntervalSequence, Segment};
use chordkd::chord::{ChordLabel, Quality, VOCAB_SIZE};
use chordkd::distill::{
    ce_loss, kd_grad, kd_loss, selective_weight, total_loss, KdConfig, LossBatch, Stage,
};
use chordkd::features::{RootDistribution, Spectrogram};
use chordkd::metrics::{
    compare, csr, merge_timelines, segmentation_scores, weighted_score, Comparator, ComparisonKind, WeightedTally,
};
use chordkd::model::{
    gaussian_kernel, smooth_logits, window_starts, windowed_votes, Checkpoint, LogitsSequence,
    ModelConfig, SmoothingConfig, Student2e1d,
};
use chordkd::pipeline::{format_history, train_stage1, train_stage2, NoiseConfig, TrainConfig, TrainOutcome};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::*;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("gradient correctness", gradients),
        ("loss identities", loss_identities),
        ("metric oracle equivalence", metric_oracle),
        ("segmentation correctness", segmentation),
        ("distribution statistics", distribution),
        ("stage-1 teacher agreement", stage1_agreement),
        ("distillation regularization trend", kd_trend),
        ("inference pipeline", inference),
        ("reproducibility", reproducibility),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS {name} ({secs:.1}s) {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name} ({secs:.1}s) {detail}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// `||a - b|| / max(||a||, ||b||)`, zero when both vanish.
fn vector_relative(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

fn central_difference(z: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-5;
    let mut z = z.to_vec();
    (0..z.len())
        .map(|i| {
            let orig = z[i];
            z[i] = orig + h;
            let up = f(&z);
            z[i] = orig - h;
            let down = f(&z);
            z[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn random_logits(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0) * scale).collect()
}

fn gradients() -> Outcome {
    let instances = 100u64;
    let mut worst = [0.0f64; 3];
    for seed in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = rng.gen_range(3..24);
        let tau = rng.gen_range(0.5..5.0);
        let zs = random_logits(&mut rng, c, 5.0);
        let zt = random_logits(&mut rng, c, 8.0);
        let fd = central_difference(&zs, |z| kd_loss(z, &zt, tau).unwrap());
        worst[0] = worst[0].max(vector_relative(&kd_grad(&zs, &zt, tau).unwrap(), &fd));

        let y = rng.gen_range(0..c);
        let (_, g) = ce_loss(&zs, y).unwrap();
        let fd = central_difference(&zs, |z| ce_loss(z, y).unwrap().0);
        worst[1] = worst[1].max(vector_relative(&g, &fd));

        let n = rng.gen_range(1..7);
        let student = random_logits(&mut rng, n * c, 4.0);
        let teacher_scale = rng.gen_range(0.5..12.0);
        let teacher = random_logits(&mut rng, n * c, teacher_scale);
        let targets: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let cfg = KdConfig { alpha: rng.gen_range(0.0..1.0), tau, ..KdConfig::default() };
        let stage = if seed % 2 == 0 { Stage::Continual } else { Stage::PseudoLabel };
        let loss = |z: &[f64]| {
            let batch = LossBatch { student: z, teacher: Some(&teacher), targets: &targets, classes: c };
            total_loss(stage, batch, &cfg).unwrap()
        };
        let fd = central_difference(&student, |z| loss(z).total);
        worst[2] = worst[2].max(vector_relative(&loss(&student).grad, &fd));
    }
    ensure!(worst.iter().all(|&e| e < 1e-5), "loss gradient errors {worst:?} exceed 1e-5");

    let mut worst_model = 0.0f64;
    for seed in 0..instances {
        worst_model = worst_model.max(model_gradient_error(seed));
    }
    ensure!(worst_model < 1e-4, "full model gradient error {worst_model:e} exceeds 1e-4");
    Ok(format!(
        "{instances} instances each; kd {:.1e}, ce {:.1e}, combined {:.1e}, model {worst_model:.1e}",
        worst[0], worst[1], worst[2]
    ))
}

/// Worst per-parameter relative error of the tiny model's backward pass
/// against central differences of a random linear probe of the logits.
fn model_gradient_error(seed: u64) -> f64 {
    let cfg = ModelConfig::tiny();
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let mut m = Student2e1d::new(cfg.clone(), seed).unwrap();
    for v in m.params.values.iter_mut() {
        *v += rng.gen_range(-0.3..0.3);
    }
    let x = random_logits(&mut rng, cfg.seq_len * cfg.n_bins, 1.5);
    let r = random_logits(&mut rng, cfg.seq_len * cfg.n_classes, 1.0);
    let probe = |m: &Student2e1d| -> f64 { m.forward(&x).unwrap().iter().zip(&r).map(|(a, b)| a * b).sum() };

    m.params.zero_grads();
    let (_, trace) = m.forward_train(&x, None).unwrap();
    m.backward(&trace, &r).unwrap();
    let analytic = m.params.grads.clone();
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..m.params.len() {
        let orig = m.params.values[i];
        m.params.values[i] = orig + h;
        let up = probe(&m);
        m.params.values[i] = orig - h;
        let down = probe(&m);
        m.params.values[i] = orig;
        let fd = (up - down) / (2.0 * h);
        // Floor keeps exactly-zero gradients from being judged on rounding noise.
        let e = (analytic[i] - fd).abs() / analytic[i].abs().max(fd.abs()).max(1e-5);
        worst = worst.max(e);
    }
    worst
}

fn loss_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_ce = 0.0f64;
    let mut worst_shift = 0.0f64;
    for _ in 0..100 {
        let c = rng.gen_range(2..VOCAB_SIZE);
        let n = rng.gen_range(1..9);
        let student = random_logits(&mut rng, n * c, 6.0);
        let teacher = random_logits(&mut rng, n * c, 6.0);
        let targets: Vec<usize> = (0..n).map(|_| rng.gen_range(0..c)).collect();
        let cfg = KdConfig { alpha: 0.0, ..KdConfig::default() };
        let batch = LossBatch { student: &student, teacher: Some(&teacher), targets: &targets, classes: c };
        let total = total_loss(Stage::Continual, batch, &cfg).unwrap().total;
        let ce: f64 = student
            .chunks(c)
            .zip(&targets)
            .map(|(z, &y)| ce_loss(z, y).unwrap().0)
            .sum::<f64>()
            / n as f64;
        worst_ce = worst_ce.max((total - ce).abs());

        let z = &student[..c];
        let shift = rng.gen_range(-50.0..50.0);
        let shifted: Vec<f64> = z.iter().map(|v| v + shift).collect();
        worst_shift = worst_shift.max(kd_loss(z, &shifted, rng.gen_range(0.5..5.0)).unwrap().abs());
    }
    ensure!(worst_ce <= 1e-12, "alpha = 0 total differs from cross-entropy by {worst_ce:e}");
    ensure!(worst_shift <= 1e-12, "KD loss of shifted logits is {worst_shift:e}");
    let cfg = KdConfig::default();
    let weights = [0.05, 0.5, 1.0].map(|c| selective_weight(c, &cfg));
    let expected = [0.0, 1.0, 0.2];
    for (w, e) in weights.iter().zip(expected) {
        ensure!((w - e).abs() < 1e-12, "selective weights {weights:?}, expected {expected:?}");
    }
    Ok(format!("ce gap {worst_ce:.1e}, shift {worst_shift:.1e}, weights {weights:?}"))
}

/// Independent encoding in the style of `mir_eval.chord.encode`: root (or
/// -1) and a root-relative semitone bitmap, all -1 for `X`.
fn oracle_encode(label: &ChordLabel) -> (i32, [i32; 12]) {
    match label {
        ChordLabel::NoChord => (-1, [0; 12]),
        ChordLabel::Unknown => (-1, [-1; 12]),
        ChordLabel::Chord { root, quality } => {
            let mut bits = [0; 12];
            for &i in quality.intervals() {
                bits[i as usize] = 1;
            }
            (root.value() as i32, bits)
        }
    }
}

fn bits_of(q: Quality) -> [i32; 12] {
    oracle_encode(&ChordLabel::chord(0, q)).1
}

/// Per-sample comparison: `None` excludes the sample.
fn oracle_compare(kind: Option<ComparisonKind>, r: &ChordLabel, e: &ChordLabel) -> Option<bool> {
    let (rr, rb) = oracle_encode(r);
    let (er, eb) = oracle_encode(e);
    if rb.iter().any(|&b| b < 0) {
        return None;
    }
    let Some(kind) = kind else {
        return Some(r.vocab_index() == e.vocab_index());
    };
    let root = rr == er;
    let silent = rr < 0 && rb.iter().all(|&b| b == 0);
    Some(match kind {
        ComparisonKind::Root => root,
        ComparisonKind::Thirds => root && rb[3] == eb[3],
        ComparisonKind::Triads => root && rb[..8] == eb[..8],
        ComparisonKind::Tetrads => root && rb == eb,
        ComparisonKind::Majmin => {
            let valid = [Quality::Maj, Quality::Min].iter().any(|&q| rb[..8] == bits_of(q)[..8]);
            if !(valid || silent) {
                return None;
            }
            root && rb[..8] == eb[..8]
        }
        ComparisonKind::Sevenths => {
            let valid = [Quality::Maj, Quality::Min, Quality::Maj7, Quality::Dom7, Quality::Min7]
                .iter()
                .any(|&q| rb == bits_of(q));
            if !(valid || silent) {
                return None;
            }
            root && rb == eb
        }
        ComparisonKind::Mirex => {
            if rr < 0 && er < 0 {
                true
            } else {
                let roll = |root: i32, bits: [i32; 12]| {
                    let mut out = [0; 12];
                    for (i, b) in bits.iter().enumerate() {
                        out[(i as i32 + root).rem_euclid(12) as usize] = *b;
                    }
                    out
                };
                let (rc, ec) = (roll(rr, rb), roll(er, eb));
                rc.iter().zip(&ec).map(|(a, b)| a * b).sum::<i32>() >= 3
            }
        }
    })
}

fn label_at(seq: &IntervalSequence, t: f64) -> ChordLabel {
    seq.segments()
        .iter()
        .find(|s| s.start <= t && t < s.end)
        .map(|s| s.label)
        .unwrap_or(ChordLabel::NoChord)
}

/// Scores by sampling the reference span every millisecond.
fn oracle_score(kind: Option<ComparisonKind>, reference: &IntervalSequence, estimate: &IntervalSequence) -> Option<f64> {
    let start = (reference.start()? * 1000.0).round() as i64;
    let end = (reference.end()? * 1000.0).round() as i64;
    let (mut hit, mut included) = (0u64, 0u64);
    for ms in start..end {
        let t = (ms as f64 + 0.5) / 1000.0;
        if let Some(h) = oracle_compare(kind, &label_at(reference, t), &label_at(estimate, t)) {
            included += 1;
            hit += h as u64;
        }
    }
    (included > 0).then(|| hit as f64 / included as f64)
}

fn random_sequence(rng: &mut ChaCha8Rng, pool: &[ChordLabel]) -> IntervalSequence {
    let mut t = rng.gen_range(0..2000u32);
    let mut segments = Vec::new();
    for _ in 0..rng.gen_range(1..9) {
        let d = rng.gen_range(50..3000u32);
        let label = *pool.choose(rng).unwrap();
        segments.push(Segment::new(t as f64 / 1000.0, (t + d) as f64 / 1000.0, label));
        t += d;
    }
    IntervalSequence::new(segments).unwrap()
}

/// Scores of `kinds` on the sub-intervals that every one of them includes.
fn chain_scores(kinds: &[ComparisonKind], reference: &IntervalSequence, estimate: &IntervalSequence) -> Vec<f64> {
    let shared: Vec<_> = merge_timelines(reference, estimate)
        .into_iter()
        .filter(|a| kinds.iter().all(|&k| compare(k, &a.reference, &a.estimate).is_some()))
        .collect();
    kinds
        .iter()
        .map(|&k| WeightedTally::of(Comparator::Kind(k), &shared).score().unwrap_or(f64::NAN))
        .collect()
}

fn monotone(scores: &[f64]) -> bool {
    scores.iter().all(|v| v.is_nan()) || scores.windows(2).all(|w| w[0] + 1e-12 >= w[1])
}

fn metric_oracle() -> Outcome {
    use ComparisonKind::*;
    let vocabulary: Vec<ChordLabel> = ChordLabel::vocabulary().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let pairs = 200;
    let mut sevenths_chains = 0;
    for i in 0..pairs {
        let reference = random_sequence(&mut rng, &vocabulary);
        let estimate = random_sequence(&mut rng, &vocabulary);
        for kind in ComparisonKind::ALL {
            let got = weighted_score(kind, &reference, &estimate);
            let want = oracle_score(Some(kind), &reference, &estimate);
            match (got, want) {
                (Some(g), Some(w)) => worst = worst.max((g - w).abs()),
                (None, None) => {}
                _ => return Err(format!("pair {i} {kind}: score {got:?} vs oracle {want:?}")),
            }
        }
        match (csr(&reference, &estimate), oracle_score(None, &reference, &estimate)) {
            (Some(g), Some(w)) => worst = worst.max((g - w).abs()),
            (None, None) => {}
            (g, w) => return Err(format!("pair {i} CSR: {g:?} vs oracle {w:?}")),
        }
        let triads = chain_scores(&[Root, Thirds, Triads, Tetrads], &reference, &estimate);
        ensure!(monotone(&triads), "pair {i}: Root/Thirds/Triads/Tetrads = {triads:?}");
        let sevenths = chain_scores(&[Root, Thirds, Sevenths, Tetrads], &reference, &estimate);
        ensure!(monotone(&sevenths), "pair {i}: Root/Thirds/Sevenths/Tetrads = {sevenths:?}");
        sevenths_chains += !sevenths[0].is_nan() as usize;
    }
    ensure!(worst <= 1e-3, "worst deviation from sampling oracle {worst:e}");
    ensure!(sevenths_chains >= pairs / 2, "only {sevenths_chains} pairs had sevenths-scorable time");
    Ok(format!("{pairs} pairs, worst deviation {worst:.1e}, both chains hold"))
}

fn segmentation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let labels: Vec<ChordLabel> = ChordLabel::vocabulary().collect();
    for _ in 0..200 {
        let seq = random_sequence(&mut rng, &labels);
        let s = segmentation_scores(&seq, &seq).unwrap();
        ensure!(
            (s.overseg, s.underseg, s.seg) == (1.0, 1.0, 1.0),
            "identity scored {s:?}"
        );
    }
    let one = |a: f64, b: f64| Segment::new(a, b, ChordLabel::chord(0, Quality::Maj));
    let reference = IntervalSequence::new(vec![one(0.0, 10.0)]).unwrap();
    let estimate = IntervalSequence::new(vec![
        one(0.0, 5.0),
        Segment::new(5.0, 10.0, ChordLabel::chord(7, Quality::Maj)),
    ])
    .unwrap();
    let s = segmentation_scores(&reference, &estimate).unwrap();
    ensure!(
        (s.overseg, s.underseg, s.seg) == (0.5, 1.0, 0.5),
        "hand case scored {s:?}"
    );
    for _ in 0..200 {
        let a = random_sequence(&mut rng, &labels);
        let b = random_sequence(&mut rng, &labels);
        let mut perm: Vec<usize> = (0..VOCAB_SIZE).collect();
        perm.shuffle(&mut rng);
        let relabel = |seq: &IntervalSequence| {
            IntervalSequence::new(
                seq.segments()
                    .iter()
                    .map(|s| {
                        let l = ChordLabel::from_vocab_index(perm[s.label.vocab_index()]).unwrap();
                        Segment::new(s.start, s.end, l)
                    })
                    .collect(),
            )
            .unwrap()
        };
        let before = segmentation_scores(&a, &b).unwrap();
        let after = segmentation_scores(&relabel(&a), &relabel(&b)).unwrap();
        ensure!(before == after, "relabeling changed {before:?} to {after:?}");
    }
    Ok("identity, hand case and 200 relabelings".into())
}

fn distribution() -> Outcome {
    let uniform = RootDistribution::from_weights(&[1.0; 12]).unwrap();
    ensure!(
        (uniform.entropy_bits - 12f64.log2()).abs() < 1e-12
            && uniform.cv.abs() < 1e-12
            && (uniform.uniformity_pct - 100.0).abs() < 1e-10,
        "uniform gave {uniform:?}"
    );
    // Exponential family p_i ~ exp(beta * i); entropy falls as beta grows.
    let weights = |beta: f64| {
        let mut w = [0.0; 12];
        for (i, v) in w.iter_mut().enumerate() {
            *v = (beta * i as f64).exp();
        }
        w
    };
    let entropy = |w: &[f64; 12]| {
        let total: f64 = w.iter().sum();
        -w.iter().map(|v| v / total).map(|p| p * p.log2()).sum::<f64>()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if entropy(&weights(mid)) > 3.53 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let skewed = RootDistribution::from_weights(&weights(lo)).unwrap();
    ensure!((skewed.entropy_bits - 3.53).abs() < 1e-9, "bisection gave {} bits", skewed.entropy_bits);
    ensure!(
        (skewed.uniformity_pct - 98.4).abs() <= 0.1,
        "3.53 bits reported {:.3}% uniformity",
        skewed.uniformity_pct
    );
    Ok(format!("3.53 bits -> {:.2}% uniformity", skewed.uniformity_pct))
}

struct Stage1Run {
    toy: Toy,
    outcome: TrainOutcome,
}

/// Stage-1 toy experiment, shared by the agreement and trend criteria.
fn stage1_run() -> &'static Stage1Run {
    static RUN: OnceLock<Stage1Run> = OnceLock::new();
    RUN.get_or_init(|| {
        let toy = Toy::new(&toy_synth(1, 200, 0.1), &toy_teacher(), 0.1, 0.1, 7);
        let train = toy.tracks(&toy.split.train, Targets::Teacher);
        let val = toy.tracks(&toy.split.val, Targets::Teacher);
        let student = Student2e1d::new(toy_model(), 3).unwrap();
        let outcome = train_stage1(student, &train, &val, &toy_stage1(3)).unwrap();
        Stage1Run { toy, outcome }
    })
}

fn stage1_agreement() -> Outcome {
    let run = stage1_run();
    let test = run.toy.tracks(&run.toy.split.test, Targets::Teacher);
    let acc = agreement(&run.outcome.best, &test);
    ensure!(acc >= 0.95, "held-out agreement with teacher {acc:.4} < 0.95");
    Ok(format!(
        "{} held-out tracks, agreement {acc:.4} (best epoch {})",
        test.len(),
        run.outcome.best_epoch
    ))
}

fn kd_trend() -> Outcome {
    let run = stage1_run();
    let teacher = toy_teacher();
    let labeled = Toy { norm: run.toy.norm.clone(), ..Toy::new(&toy_synth(2, 60, 0.1), &teacher, 0.1, 0.2, 8) };
    let noise = NoiseConfig { delta: 0.5, delta_n: 1.0, min_segment: 0.05, seed: 5 };
    let noisy_train = labeled.tracks(&labeled.split.train, Targets::Noisy(noise));
    let val = labeled.tracks(&labeled.split.val, Targets::Truth);
    let test = labeled.tracks(&labeled.split.test, Targets::Truth);

    let mut final_loss = Vec::new();
    for alpha in [0.0, 0.1, 0.3] {
        let out = train_stage2(run.outcome.best.clone(), &noisy_train, &val, &toy_stage2(alpha, 4)).unwrap();
        final_loss.push(out.history.last().unwrap().val_loss);
    }
    let [l0, l1, l3] = final_loss[..] else { unreachable!() };
    ensure!(
        l3 <= l1 && l1 <= l0,
        "final val loss alpha 0/0.1/0.3 = {l0:.4}/{l1:.4}/{l3:.4} not ordered"
    );

    let clean_train = labeled.tracks(&labeled.split.train, Targets::Truth);
    let clean = train_stage2(run.outcome.best.clone(), &clean_train, &val, &toy_stage2(0.3, 4)).unwrap();
    let before = agreement(&run.outcome.best, &test);
    let after = agreement(&clean.best, &test);
    ensure!(after >= before, "clean alpha 0.3 test accuracy {after:.4} < stage-1 {before:.4}");
    Ok(format!(
        "noisy final val loss alpha 0/0.1/0.3 = {l0:.4}/{l1:.4}/{l3:.4}; clean test acc {before:.4} -> {after:.4}"
    ))
}

fn inference() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let logits = LogitsSequence::new(random_logits(&mut rng, 37 * 11, 3.0), 37, 11).unwrap();
    let identity = SmoothingConfig { kernel_width: 1, window_length: 37, overlap: 0.5 };
    ensure!(smooth_logits(&logits, &identity).unwrap() == logits, "k = 1 smoothing changed the logits");
    for k in (1..=31).step_by(2) {
        let sum: f64 = gaussian_kernel(k).unwrap().iter().sum();
        ensure!((sum - 1.0).abs() <= 1e-12, "kernel {k} sums to {sum}");
    }
    let default = SmoothingConfig { kernel_width: 9, window_length: 108, overlap: 0.5 };
    ensure!(default.stride() == 54, "T = 108, r = 0.5 gave stride {}", default.stride());

    for overlap in [0.0, 0.25, 0.5, 0.75] {
        let cfg = SmoothingConfig { overlap, ..default };
        for len in 1..=500 {
            let mut covered = vec![0u32; len];
            for s in window_starts(len, cfg.stride()) {
                for c in covered.iter_mut().skip(s).take(cfg.window_length) {
                    *c += 1;
                }
            }
            ensure!(covered.iter().all(|&c| c >= 1), "r = {overlap}, {len} frames: uncovered frame");
        }
    }
    let model = ModelConfig::tiny();
    let student = Student2e1d::new(model.clone(), 1).unwrap();
    for overlap in [0.0, 0.25, 0.5, 0.75] {
        let cfg = SmoothingConfig { kernel_width: 3, window_length: model.seq_len, overlap };
        for len in [1, 2, 3, 4, 5, 7, 9, 13, 30] {
            let data = random_logits(&mut rng, len * model.n_bins, 1.0);
            let spec = Spectrogram::new(data, len, model.n_bins).unwrap();
            let (_, counts) = windowed_votes(&student, &spec, &cfg).unwrap();
            ensure!(counts.iter().all(|&c| c >= 1), "r = {overlap}, {len} frames: votes {counts:?}");
        }
    }
    Ok("identity, kernel sums, stride 54, full coverage".into())
}

fn reproducibility() -> Outcome {
    let toy = Toy::new(&toy_synth(9, 40, 0.1), &toy_teacher(), 0.1, 0.1, 9);
    let model = ModelConfig { dropout: 0.1, ..toy_model() };
    let once = || {
        let train = toy.tracks(&toy.split.train, Targets::Teacher);
        let val = toy.tracks(&toy.split.val, Targets::Teacher);
        let s1cfg = TrainConfig { max_epochs: 3, ..toy_stage1(11) };
        let s1 = train_stage1(Student2e1d::new(model.clone(), 11).unwrap(), &train, &val, &s1cfg).unwrap();
        let noise = NoiseConfig { delta: 0.5, delta_n: 1.0, min_segment: 0.05, seed: 12 };
        let train = toy.tracks(&toy.split.train, Targets::Noisy(noise));
        let s2cfg = TrainConfig { max_epochs: 2, ..toy_stage2(0.3, 13) };
        let s2 = train_stage2(s1.best.clone(), &train, &val, &s2cfg).unwrap();
        [s1, s2].map(|o| {
            let ckpt = Checkpoint { seed: 11, normalizer: Some(toy.norm.clone()), student: o.best };
            (format_history(&o.history), ckpt.to_bytes())
        })
    };
    let (a, b) = (once(), once());
    for (stage, (x, y)) in a.iter().zip(&b).enumerate() {
        ensure!(x.0 == y.0, "stage {} histories differ", stage + 1);
        ensure!(x.1 == y.1, "stage {} checkpoints differ", stage + 1);
    }
    Ok(format!(
        "stage 1 and 2 histories and checkpoints identical ({} + {} checkpoint bytes)",
        a[0].1.len(),
        a[1].1.len()
    ))
}
