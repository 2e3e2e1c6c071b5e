use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chordkd::annotation::{frames_to_intervals, intervals_to_frames, read_lab, write_lab, FrameLabels};
use chordkd::chord::PitchClass;
use chordkd::config::ConfigReader;
use chordkd::features::{root_distribution, synth_corpus, CorpusManifest, ManifestEntry, Normalizer, Spectrogram};
use chordkd::metrics::{framewise_agreement, EvalReport, QualityGroup, TrackPair};
use chordkd::chord::VOCAB_SIZE;
use chordkd::model::{windowed_infer, Checkpoint, LogitsSequence, ModelConfig, Student2e1d};
use chordkd::pipeline::pseudo::{read_frame_labels, read_logits, write_frame_labels, write_logits};
use chordkd::pipeline::{
    data_fingerprint, format_history, generate_pseudo_labels, inject_label_noise, split_dataset,
    split_with_fractions, train_stage1, train_stage2, RunManifest, SplitSpec, TrainingTrack,
};
use chordkd::model::teacher_infer;

use crate::index::{self, PseudoEntry};
use crate::settings;
use crate::GlobalArgs;

/// Creates the output directory, refusing a non-empty one without `--force`.
fn prepare_out(global: &GlobalArgs) -> Result<PathBuf> {
    let out = global.out.clone();
    if out.exists() {
        let non_empty = fs::read_dir(&out)
            .with_context(|| format!("reading {}", out.display()))?
            .next()
            .is_some();
        if non_empty && !global.force {
            bail!("output directory {} is not empty (use --force to overwrite)", out.display());
        }
    }
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok(out)
}

fn write_manifest(out: &Path, command: &str, config: &chordkd::config::ConfigMap, seed: u64, fingerprint: String) -> Result<()> {
    let manifest = RunManifest::new(command, config.pairs(), seed, fingerprint);
    let path = out.join("run.txt");
    fs::write(&path, manifest.to_text()).with_context(|| format!("writing {}", path.display()))
}

fn corpus_fingerprint(manifest: &CorpusManifest) -> Result<String> {
    let mut blobs = Vec::new();
    for e in &manifest.entries {
        let mut bytes = fs::read(&e.features).with_context(|| format!("reading {}", e.features.display()))?;
        if let Ok(l) = fs::read(&e.labels) {
            bytes.extend_from_slice(&l);
        }
        blobs.push((e.id.clone(), bytes));
    }
    Ok(data_fingerprint(blobs.iter().map(|(id, b)| (id.as_str(), b.as_slice()))))
}

fn file_fingerprint(paths: &[&Path]) -> Result<String> {
    let mut blobs = Vec::new();
    for p in paths {
        blobs.push((p.display().to_string(), fs::read(p).with_context(|| format!("reading {}", p.display()))?));
    }
    Ok(data_fingerprint(blobs.iter().map(|(id, b)| (id.as_str(), b.as_slice()))))
}

fn read_features(e: &ManifestEntry) -> Result<Spectrogram> {
    Spectrogram::read(&e.features).with_context(|| format!("track {}", e.id))
}

pub fn synth(global: &GlobalArgs) -> Result<()> {
    let config = settings::load(global)?;
    let mut r = ConfigReader::new(&config);
    let seed = settings::seed(&mut r)?;
    let cfg = settings::synth(&mut r, seed)?;
    r.finish()?;
    let out = prepare_out(global)?;
    write_manifest(&out, "synth", &config, seed, "-".into())?;

    fs::create_dir_all(out.join("features"))?;
    fs::create_dir_all(out.join("labels"))?;
    let mut manifest = CorpusManifest::default();
    for track in synth_corpus(&cfg)? {
        let features = PathBuf::from("features").join(format!("{}.cqt", track.id));
        let labels = PathBuf::from("labels").join(format!("{}.lab", track.id));
        track.spectrogram.write(&out.join(&features))?;
        write_lab(&out.join(&labels), &track.annotation)?;
        manifest.entries.push(ManifestEntry { id: track.id, features, labels });
    }
    manifest.write(&out.join("corpus.tsv"))?;
    println!("wrote {} tracks to {}", manifest.entries.len(), out.display());
    Ok(())
}

pub fn pseudolabel(global: &GlobalArgs, store_logits: bool) -> Result<()> {
    let config = settings::load(global)?;
    let mut r = ConfigReader::new(&config);
    let seed = settings::seed(&mut r)?;
    let manifest_path = settings::required_path(&mut r, "data.manifest")?;
    let teacher = settings::teacher(&mut r)?;
    r.finish()?;
    let manifest = CorpusManifest::read(&manifest_path)?;
    let out = prepare_out(global)?;
    write_manifest(&out, "pseudolabel", &config, seed, file_fingerprint(&[&manifest_path])?)?;

    let set = generate_pseudo_labels(&teacher, &manifest, store_logits);
    let dir = out.join("pseudo");
    fs::create_dir_all(&dir)?;
    let mut entries = Vec::new();
    let mut coverage = String::new();
    let mut seconds = 0.0;
    let mut inconsistent = 0;
    for t in &set.tracks {
        let labels = PathBuf::from("pseudo").join(format!("{}.plab", t.id));
        write_frame_labels(&out.join(&labels), &t.labels)?;
        let logits = match &t.logits {
            Some(l) => {
                let p = PathBuf::from("pseudo").join(format!("{}.logits", t.id));
                write_logits(&out.join(&p), l)?;
                Some(p)
            }
            None => None,
        };
        let entry = manifest.entries.iter().find(|e| e.id == t.id).expect("labeled track is in manifest");
        let n_features = Spectrogram::read(&entry.features)?.n_frames();
        let ok = n_features == t.labels.len();
        inconsistent += (!ok) as usize;
        seconds += t.labels.len() as f64 * t.labels.hop_seconds();
        coverage.push_str(&format!(
            "track {}\tframes={}\tfeature_frames={}\tconsistent={}\n",
            t.id,
            t.labels.len(),
            n_features,
            if ok { "yes" } else { "no" }
        ));
        entries.push(PseudoEntry { id: t.id.clone(), labels, logits });
    }
    for (id, err) in &set.failures {
        coverage.push_str(&format!("failed {id}\t{err}\n"));
    }
    let summary = format!(
        "tracks_ok = {}\ntracks_failed = {}\ntotal_hours = {:.4}\ninconsistent_tracks = {}\n",
        set.tracks.len(),
        set.failures.len(),
        seconds / 3600.0,
        inconsistent
    );
    fs::write(out.join("pseudolabels.tsv"), index::format(&entries))?;
    fs::write(out.join("coverage.txt"), format!("{summary}{coverage}"))?;
    print!("{summary}");
    if !set.failures.is_empty() || inconsistent > 0 {
        for (id, err) in &set.failures {
            eprintln!("failed {id}: {err}");
        }
        bail!("{} of {} tracks failed", set.failures.len() + inconsistent, manifest.entries.len());
    }
    Ok(())
}

fn split_text(split: &SplitSpec) -> String {
    let mut s = String::new();
    for (name, ids) in [("train", &split.train), ("val", &split.val), ("test", &split.test)] {
        for id in ids {
            s.push_str(&format!("{name}\t{id}\n"));
        }
    }
    s
}

pub fn train(global: &GlobalArgs) -> Result<()> {
    let config = settings::load(global)?;
    let mut r = ConfigReader::new(&config);
    let seed = settings::seed(&mut r)?;
    let stage: u8 = r.take("train.stage")?.unwrap_or(1);
    if stage != 1 && stage != 2 {
        bail!("config key train.stage must be 1 or 2, got {stage}");
    }
    let manifest_path = settings::required_path(&mut r, "data.manifest")?;
    let pseudo_path = settings::path(&mut r, "data.pseudo");
    let init_path = settings::path(&mut r, "train.init");
    let per_bin: bool = r.take("norm.per_bin")?.unwrap_or(false);
    let val_frac: f64 = r.take("split.val")?.unwrap_or(0.1);
    let test_frac: f64 = r.take("split.test")?.unwrap_or(if stage == 1 { 0.1 } else { 0.2 });
    let teacher = settings::teacher(&mut r)?;
    let noise = settings::noise(&mut r, seed)?;

    let manifest = CorpusManifest::read(&manifest_path)?;
    let first = manifest.entries.first().ok_or_else(|| anyhow!("corpus manifest is empty"))?;
    let n_bins = read_features(first)?.n_bins();
    let init = match (stage, &init_path) {
        (2, None) => bail!("stage 2 needs config key train.init (a stage-1 checkpoint)"),
        (2, Some(p)) => Some(Checkpoint::read(p).with_context(|| format!("loading {}", p.display()))?),
        _ => None,
    };
    let model_cfg = match &init {
        Some(c) => {
            let stored = c.student.config().clone();
            if settings::model(&mut r, stored.clone())? != stored {
                bail!("model.* keys disagree with the architecture stored in train.init");
            }
            stored
        }
        None => settings::model(&mut r, ModelConfig { n_bins, n_classes: VOCAB_SIZE, ..ModelConfig::default() })?,
    };
    let cfg = settings::train(&mut r, stage, seed, model_cfg.seq_len)?;
    r.finish()?;
    if stage == 1 && pseudo_path.is_none() {
        bail!("stage 1 needs config key data.pseudo (output of `chordkd pseudolabel`)");
    }

    let out = prepare_out(global)?;
    // Resolved values, so shrunken desk-scale runs document their ratios.
    let mut recorded = config.clone();
    recorded.insert("resolved.base_lr", cfg.base_lr);
    recorded.insert("resolved.peak_lr", cfg.peak_lr);
    recorded.insert("resolved.peak_to_base_lr", format!("{:.6}", cfg.peak_lr / cfg.base_lr));
    recorded.insert("resolved.warmup_epochs", cfg.warmup_epochs);
    recorded.insert("resolved.schedule", format!("{:?}", cfg.schedule));
    recorded.insert("resolved.batch_size", cfg.batch_size);
    recorded.insert("resolved.seq_len", cfg.seq_len);
    recorded.insert("resolved.patience", cfg.patience);
    recorded.insert("resolved.max_epochs", cfg.max_epochs);
    recorded.insert("resolved.kd_alpha", cfg.kd.alpha);
    recorded.insert("resolved.kd_tau", cfg.kd.tau);
    recorded.insert("resolved.parameters", chordkd::model::parameter_count(&model_cfg));
    write_manifest(&out, "train", &recorded, seed, corpus_fingerprint(&manifest)?)?;

    let pseudo: Vec<PseudoEntry> = match &pseudo_path {
        Some(p) => index::read(p)?,
        None => Vec::new(),
    };
    let ids = manifest.ids();
    let split = if stage == 1 {
        split_with_fractions(&ids, seed, val_frac, test_frac)?
    } else {
        if (val_frac, test_frac) == (0.1, 0.2) {
            split_dataset(&ids, seed)?
        } else {
            split_with_fractions(&ids, seed, val_frac, test_frac)?
        }
    };
    fs::write(out.join("split.txt"), split_text(&split))?;

    let mut raw = Vec::new();
    for e in &manifest.entries {
        raw.push((e, read_features(e)?));
    }
    let normalizer = match &init {
        Some(c) => c.normalizer.clone().ok_or_else(|| anyhow!("stage-1 checkpoint carries no normalization"))?,
        None => {
            let train_specs: Vec<&Spectrogram> =
                raw.iter().filter(|(e, _)| split.train.contains(&e.id)).map(|(_, s)| s).collect();
            Normalizer::fit(&train_specs, per_bin)?
        }
    };

    let needs_teacher = cfg.kd.alpha > 0.0;
    let build = |ids: &[String], noisy: bool| -> Result<Vec<TrainingTrack>> {
        let mut tracks = Vec::new();
        for (i, (e, spec)) in raw.iter().enumerate() {
            if !ids.contains(&e.id) {
                continue;
            }
            let stored = pseudo.iter().find(|p| p.id == e.id);
            let targets = if stage == 1 {
                let p = stored.ok_or_else(|| anyhow!("track {} has no pseudo-labels", e.id))?;
                read_frame_labels(&p.labels)?.labels().to_vec()
            } else {
                let mut seq = read_lab(&e.labels)?;
                if let (true, Some(n)) = (noisy, noise) {
                    let cfg = chordkd::pipeline::NoiseConfig { seed: n.seed ^ (i as u64).wrapping_mul(7919), ..n };
                    seq = inject_label_noise(&seq, &cfg)?.0;
                }
                intervals_to_frames(&seq, spec.hop_seconds(), spec.n_frames())?.labels().to_vec()
            };
            let logits: Option<LogitsSequence> = match stored.and_then(|p| p.logits.as_ref()) {
                Some(p) => Some(read_logits(p)?),
                None if needs_teacher && stage == 2 => Some(teacher_infer(&teacher, &e.id, spec)?),
                None if needs_teacher => bail!("track {} has no stored teacher logits for kd.alpha > 0", e.id),
                None => None,
            };
            let logits = if needs_teacher { logits } else { None };
            tracks.push(TrainingTrack::new(e.id.clone(), normalizer.apply(spec)?, targets, logits)?);
        }
        Ok(tracks)
    };
    let train_tracks = build(&split.train, true)?;
    let val_tracks = build(&split.val, false)?;

    let outcome = match init {
        None => {
            let student = Student2e1d::new(model_cfg, seed)?;
            println!("student parameters: {}", student.parameter_count());
            train_stage1(student, &train_tracks, &val_tracks, &cfg)?
        }
        Some(c) => train_stage2(c.student, &train_tracks, &val_tracks, &cfg)?,
    };
    fs::write(out.join("history.txt"), format_history(&outcome.history))?;
    let ckpt = Checkpoint { seed, normalizer: Some(normalizer), student: outcome.best };
    ckpt.write(&out.join("checkpoint.ckpt"))?;
    let best = &outcome.history[outcome.best_epoch];
    println!(
        "stage {stage}: {} epochs, best epoch {} (val acc {:.4}, val loss {:.4})",
        outcome.history.len(),
        outcome.best_epoch,
        best.val_acc,
        best.val_loss
    );
    Ok(())
}

fn predict(ckpt: &Checkpoint, spec: &Spectrogram, smoothing: &chordkd::model::SmoothingConfig) -> Result<FrameLabels> {
    let input = match &ckpt.normalizer {
        Some(n) => n.apply(spec)?,
        None => spec.clone(),
    };
    Ok(windowed_infer(&ckpt.student, &input, smoothing)?)
}

pub fn infer(global: &GlobalArgs) -> Result<()> {
    let config = settings::load(global)?;
    let mut r = ConfigReader::new(&config);
    let seed = settings::seed(&mut r)?;
    let ckpt_path = settings::required_path(&mut r, "infer.checkpoint")?;
    let manifest_path = settings::required_path(&mut r, "data.manifest")?;
    let ckpt = Checkpoint::read(&ckpt_path).with_context(|| format!("loading {}", ckpt_path.display()))?;
    let smoothing = settings::smoothing(&mut r, ckpt.student.config().seq_len)?;
    r.finish()?;
    let manifest = CorpusManifest::read(&manifest_path)?;
    let out = prepare_out(global)?;
    write_manifest(&out, "infer", &config, seed, file_fingerprint(&[&ckpt_path, &manifest_path])?)?;

    let dir = out.join("predictions");
    fs::create_dir_all(&dir)?;
    let mut failures = Vec::new();
    for e in &manifest.entries {
        let result = read_features(e)
            .and_then(|spec| predict(&ckpt, &spec, &smoothing))
            .and_then(|frames| Ok(frames_to_intervals(&frames)?))
            .and_then(|seq| Ok(write_lab(&dir.join(format!("{}.lab", e.id)), &seq)?));
        if let Err(err) = result {
            failures.push(format!("{}: {err:#}", e.id));
        }
    }
    println!("predicted {} of {} tracks", manifest.entries.len() - failures.len(), manifest.entries.len());
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("failed {f}");
        }
        bail!("{} tracks failed", failures.len());
    }
    Ok(())
}

pub fn eval(global: &GlobalArgs, against_teacher: bool) -> Result<()> {
    let config = settings::load(global)?;
    let mut r = ConfigReader::new(&config);
    let seed = settings::seed(&mut r)?;
    let manifest_path = settings::required_path(&mut r, "data.manifest")?;
    let predictions = settings::required_path(&mut r, "eval.predictions")?;
    let pseudo_path = settings::path(&mut r, "data.pseudo");
    r.finish()?;
    if against_teacher && pseudo_path.is_none() {
        bail!("--against-teacher needs config key data.pseudo");
    }
    let manifest = CorpusManifest::read(&manifest_path)?;
    let out = prepare_out(global)?;
    write_manifest(&out, "eval", &config, seed, corpus_fingerprint(&manifest)?)?;

    let pseudo = match &pseudo_path {
        Some(p) => index::read(p)?,
        None => Vec::new(),
    };
    let mut pairs = Vec::new();
    let mut frames = Vec::new();
    let mut teacher_frames: (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
    let mut failures = Vec::new();
    for e in &manifest.entries {
        let pred_path = predictions.join(format!("{}.lab", e.id));
        let result = (|| -> Result<()> {
            let reference = read_lab(&e.labels)?;
            let estimate = read_lab(&pred_path)?;
            let spec = read_features(e)?;
            let (hop, n) = (spec.hop_seconds(), spec.n_frames());
            let est_frames = intervals_to_frames(&estimate, hop, n)?.labels().to_vec();
            frames.push((est_frames.clone(), intervals_to_frames(&reference, hop, n)?.labels().to_vec()));
            if against_teacher {
                let p = pseudo.iter().find(|p| p.id == e.id).ok_or_else(|| anyhow!("no pseudo-labels"))?;
                let t = read_frame_labels(&p.labels)?;
                if t.len() != n {
                    bail!("pseudo-labels have {} frames, features have {n}", t.len());
                }
                teacher_frames.0.extend(est_frames);
                teacher_frames.1.extend_from_slice(t.labels());
            }
            pairs.push(TrackPair::new(reference, estimate));
            Ok(())
        })();
        if let Err(err) = result {
            failures.push(format!("{}: {err:#}", e.id));
        }
    }
    if pairs.is_empty() {
        bail!("no track could be evaluated ({} failures)", failures.len());
    }
    let report = EvalReport::evaluate(&pairs, &QualityGroup::report_groups(), &frames)?;
    fs::write(out.join("report.tsv"), report.to_tsv())?;
    fs::write(out.join("report.txt"), report.to_table())?;
    print!("{}", report.to_table());
    if against_teacher {
        let hop = 1.0;
        let scores = framewise_agreement(
            &FrameLabels::new(teacher_frames.0, hop)?,
            &FrameLabels::new(teacher_frames.1, hop)?,
        )?;
        let text = format!(
            "Acc\t{:.4}\nPrec\t{:.4}\nRec\t{:.4}\nF1\t{:.4}\n",
            scores.accuracy, scores.precision, scores.recall, scores.f1
        );
        fs::write(out.join("teacher_agreement.tsv"), &text)?;
        print!("agreement with teacher\n{text}");
    }
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("failed {f}");
        }
        bail!("{} tracks could not be evaluated", failures.len());
    }
    Ok(())
}

pub fn stats(global: &GlobalArgs) -> Result<()> {
    let config = settings::load(global)?;
    let mut r = ConfigReader::new(&config);
    let seed = settings::seed(&mut r)?;
    let manifest_path = settings::required_path(&mut r, "data.manifest")?;
    r.finish()?;
    let manifest = CorpusManifest::read(&manifest_path)?;
    let out = prepare_out(global)?;
    write_manifest(&out, "stats", &config, seed, corpus_fingerprint(&manifest)?)?;

    let labels = manifest
        .entries
        .iter()
        .map(|e| read_lab(&e.labels).with_context(|| format!("track {}", e.id)))
        .collect::<Result<Vec<_>>>()?;
    let dist = root_distribution(labels.iter())?;
    let mut report = String::new();
    let mut data = format!("# root\tpercent\n# uniform {:.2}\n", 100.0 / 12.0);
    for pc in PitchClass::all() {
        let m = dist.mass[pc.value() as usize] * 100.0;
        report.push_str(&format!("root.{} = {m:.4}\n", pc.name()));
        data.push_str(&format!("{}\t{m:.4}\n", pc.name()));
    }
    report.push_str(&format!(
        "entropy_bits = {:.4}\ncv = {:.4}\nuniformity_pct = {:.2}\n",
        dist.entropy_bits, dist.cv, dist.uniformity_pct
    ));
    fs::write(out.join("stats.txt"), &report)?;
    fs::write(out.join("root_distribution.dat"), &data)?;
    print!("{report}");
    Ok(())
}
