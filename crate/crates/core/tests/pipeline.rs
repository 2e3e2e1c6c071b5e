mod support;

use chordkd::annotation::{IntervalSequence, Segment};
use chordkd::chord::{ChordLabel, Quality};
use chordkd::model::{Checkpoint, Student2e1d};
use chordkd::pipeline::{
    evaluate_tracks, format_history, inject_label_noise, split_dataset, train_stage1, train_stage2,
    EpochRecord, NoiseConfig,
};
use support::*;

#[test]
fn mean_boundary_shift_is_half_delta() {
    let segments: Vec<Segment> = (0..1001)
        .map(|i| {
            let label = ChordLabel::chord((i % 12) as u8, if i % 2 == 0 { Quality::Maj } else { Quality::Min });
            Segment::new(i as f64 * 5.0, (i + 1) as f64 * 5.0, label)
        })
        .collect();
    let seq = IntervalSequence::new(segments).unwrap();
    let delta = 0.5;
    let cfg = NoiseConfig { delta, delta_n: 0.0, min_segment: 0.05, seed: 21 };
    let (noisy, report) = inject_label_noise(&seq, &cfg).unwrap();
    assert_eq!(noisy.len(), 1001);
    assert!(report.dropped.is_empty());
    let shifts: Vec<f64> = seq
        .segments()
        .iter()
        .zip(noisy.segments())
        .skip(1)
        .map(|(a, b)| (b.start - a.start).abs())
        .collect();
    assert_eq!(shifts.len(), 1000);
    let mean = shifts.iter().sum::<f64>() / shifts.len() as f64;
    assert!((mean - delta / 2.0).abs() <= 0.1 * delta / 2.0, "mean shift {mean}");
}

#[test]
fn split_depends_only_on_the_seed() {
    let ids: Vec<String> = (0..600).map(|i| format!("t{i:03}")).collect();
    let a = split_dataset(&ids, 5).unwrap();
    assert_eq!((a.train.len(), a.val.len(), a.test.len()), (420, 60, 120));
    assert_eq!(a, split_dataset(&ids, 5).unwrap());
    assert_ne!(a, split_dataset(&ids, 6).unwrap());
}

/// First epoch whose validation accuracy is within one point of the run's best.
fn convergence_epoch(history: &[EpochRecord]) -> usize {
    let best = history.iter().map(|r| r.val_acc).fold(0.0, f64::max);
    history.iter().position(|r| r.val_acc >= best - 0.01).unwrap()
}

#[test]
fn zero_noise_stage_one_tracks_the_teacher_and_kd_converges_no_later() {
    let toy = Toy::new(&toy_synth(31, 60, 0.0), &toy_teacher(), 0.1, 0.1, 32);
    let train = toy.tracks(&toy.split.train, Targets::Teacher);
    let val = toy.tracks(&toy.split.val, Targets::Teacher);
    let test = toy.tracks(&toy.split.test, Targets::Teacher);

    let plain = train_stage1(Student2e1d::new(toy_model(), 33).unwrap(), &train, &val, &toy_stage1(33)).unwrap();
    let acc = agreement(&plain.best, &test);
    assert!(acc >= 0.95, "agreement {acc}");

    let mut cfg = toy_stage1(33);
    cfg.kd.alpha = 0.3;
    let kd = train_stage1(Student2e1d::new(toy_model(), 33).unwrap(), &train, &val, &cfg).unwrap();
    let (with, without) = (convergence_epoch(&kd.history), convergence_epoch(&plain.history));
    assert!(with <= without, "KD converged at epoch {with}, plain at {without}");
}

#[test]
fn checkpoint_reload_reproduces_validation_accuracy() {
    let toy = Toy::new(&toy_synth(41, 20, 0.1), &toy_teacher(), 0.1, 0.1, 42);
    let train = toy.tracks(&toy.split.train, Targets::Teacher);
    let val = toy.tracks(&toy.split.val, Targets::Teacher);
    let cfg = chordkd::pipeline::TrainConfig { max_epochs: 2, ..toy_stage1(43) };
    let out = train_stage1(Student2e1d::new(toy_model(), 43).unwrap(), &train, &val, &cfg).unwrap();
    let ckpt = Checkpoint { seed: 43, normalizer: Some(toy.norm.clone()), student: out.best };
    let back = Checkpoint::from_bytes(&ckpt.to_bytes()).unwrap();
    assert_eq!(back.normalizer, ckpt.normalizer);
    let acc = evaluate_tracks(&back.student, &val).unwrap().accuracy;
    assert_eq!(acc, out.history[out.best_epoch].val_acc);
}

#[test]
fn alpha_zero_stage_two_is_plain_fine_tuning() {
    let toy = Toy::new(&toy_synth(51, 20, 0.1), &toy_teacher(), 0.1, 0.1, 52);
    let val = toy.tracks(&toy.split.val, Targets::Truth);
    let with_teacher = toy.tracks(&toy.split.train, Targets::Truth);
    let without: Vec<_> = with_teacher
        .iter()
        .map(|t| {
            chordkd::pipeline::TrainingTrack::new(t.id.clone(), t.features.clone(), t.targets.clone(), None).unwrap()
        })
        .collect();
    let init = Student2e1d::new(toy_model(), 53).unwrap();
    let cfg = chordkd::pipeline::TrainConfig { max_epochs: 2, ..toy_stage2(0.0, 53) };
    let a = train_stage2(init.clone(), &with_teacher, &val, &cfg).unwrap();
    let b = train_stage2(init, &without, &val, &cfg).unwrap();
    assert_eq!(format_history(&a.history), format_history(&b.history));
    assert!(a.history.iter().all(|r| r.train_kd == 0.0 && r.train_loss == r.train_ce));
}
