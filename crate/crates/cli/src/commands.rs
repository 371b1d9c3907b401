//! Batch subcommands. Each writes its artifacts plus `run_config.json`,
//! `result.json` and `summary.txt` into its output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use micromotion::evm::{magnify as run_magnify, MagnifyConfig, DEFAULT_LEVELS};
use micromotion::frame_io::{
    load_sequence_with_manifest, resize_to, write_sequence_as, FrameSequence, Manifest,
    MANIFEST_FILE,
};
use micromotion::heatmap::{self as hm, load_keypoint_track, render_track, DEFAULT_MIN_CONFIDENCE};
use micromotion::knn::{
    evaluate, k_sweep, k_sweep_csv, split, Evaluation, KnnModel, SplitSpec, DEFAULT_K,
    DEFAULT_TRAIN_FRACTION,
};
use micromotion::labeling::{validate_label_json, MotionLabel};
use micromotion::temporal_filter::BandpassSpec;
use micromotion::waveform::{
    export_mesh, extract_region_waveforms, WaveformDataset, DEFAULT_FEATURE_LENGTH,
    DEFAULT_WINDOW_SECS,
};
use serde_json::{json, Value};

use crate::config::{
    pick, FileConfig, DEFAULT_ALPHA, DEFAULT_F_HI, DEFAULT_F_LO, DEFAULT_K_VALUES,
};
use crate::{EvalArgs, ExtractArgs, HeatmapArgs, MagnifyArgs, OverlayArgs, SweepArgs, TrainArgs};

pub const RUN_CONFIG_FILE: &str = "run_config.json";
pub const RESULT_FILE: &str = "result.json";
pub const SUMMARY_FILE: &str = "summary.txt";

/// Frame rate assigned to waveforms read back from a dataset CSV. The CSV
/// does not store it and classification does not use it.
const DATASET_FPS: f64 = 30.0;

pub fn load_video(manifest: &Path) -> Result<(Manifest, FrameSequence)> {
    load_sequence_with_manifest(manifest)
        .with_context(|| format!("cannot load video {}", manifest.display()))
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn show(path: &Path) -> String {
    path.display().to_string()
}

/// Writes the run config, result and summary, and prints the summary.
fn finish(out: &Path, run_config: Value, result: Value, summary: &[String]) -> Result<()> {
    write_json(&out.join(RUN_CONFIG_FILE), &run_config)?;
    write_json(&out.join(RESULT_FILE), &result)?;
    let text = summary.join("\n") + "\n";
    write_text(&out.join(SUMMARY_FILE), &text)?;
    print!("{text}");
    Ok(())
}

fn write_video(seq: &FrameSequence, out: &Path, subject_id: &str, notes: &str) -> Result<()> {
    write_sequence_as(seq, out, subject_id, notes)
        .with_context(|| format!("cannot write video to {}", out.display()))?;
    Ok(())
}

pub fn magnify(args: &MagnifyArgs, file: &FileConfig) -> Result<()> {
    let alpha = pick(args.alpha, file.alpha, DEFAULT_ALPHA);
    let levels = pick(args.levels, file.levels, DEFAULT_LEVELS);
    let f_lo = pick(args.f_lo, file.f_lo, DEFAULT_F_LO);
    let f_hi = pick(args.f_hi, file.f_hi, DEFAULT_F_HI);

    let (manifest, seq) = load_video(&args.input)?;
    let band = BandpassSpec::new(f_lo, f_hi, seq.fps()).context("invalid band")?;
    let cfg = MagnifyConfig::new(alpha, levels, band);
    let out_seq = run_magnify(&seq, &cfg).context("magnification failed")?;
    create_out(&args.out)?;
    write_video(&out_seq, &args.out, &manifest.subject_id, "magnified")?;

    let (w, h) = out_seq.dims();
    finish(
        &args.out,
        json!({
            "command": "magnify",
            "input": show(&args.input),
            "out": show(&args.out),
            "alpha": alpha,
            "levels": levels,
            "f_lo": f_lo,
            "f_hi": f_hi,
        }),
        json!({
            "manifest": show(&args.out.join(MANIFEST_FILE)),
            "frames": out_seq.count(),
            "width": w,
            "height": h,
            "fps": out_seq.fps(),
            "input_width": seq.width(),
            "input_height": seq.height(),
        }),
        &[
            format!(
                "magnified {} frames ({}x{} -> {w}x{h})",
                seq.count(),
                seq.width(),
                seq.height()
            ),
            format!("alpha {alpha}, {levels} levels, band [{f_lo}, {f_hi}) Hz"),
            format!("written to {}", args.out.display()),
        ],
    )
}

pub fn heatmap(args: &HeatmapArgs) -> Result<()> {
    let (manifest, original) = load_video(&args.original)?;
    let (_, magnified) = load_video(&args.magnified)?;
    let (w, h) = magnified.dims();
    let original = resize_to(&original, w, h)?;
    let heat = hm::heatmap(&original, &magnified).with_context(|| {
        format!(
            "{} and {} do not match",
            args.original.display(),
            args.magnified.display()
        )
    })?;
    create_out(&args.out)?;
    write_video(&heat, &args.out, &manifest.subject_id, "heatmap")?;
    finish(
        &args.out,
        json!({
            "command": "heatmap",
            "original": show(&args.original),
            "magnified": show(&args.magnified),
            "out": show(&args.out),
        }),
        json!({
            "manifest": show(&args.out.join(MANIFEST_FILE)),
            "frames": heat.count(),
            "width": w,
            "height": h,
        }),
        &[
            format!("heatmap of {} frames at {w}x{h}", heat.count()),
            format!("written to {}", args.out.display()),
        ],
    )
}

pub fn overlay(args: &OverlayArgs, file: &FileConfig) -> Result<()> {
    let min_confidence = pick(
        args.min_confidence,
        file.min_confidence,
        DEFAULT_MIN_CONFIDENCE,
    );
    ensure!(
        (0.0..=1.0).contains(&min_confidence),
        "min confidence must lie in [0, 1], got {min_confidence}"
    );
    let (manifest, heat) = load_video(&args.heatmap)?;
    let (_, original) = load_video(&args.original)?;
    let track = load_keypoint_track(&args.keypoints)
        .with_context(|| format!("cannot load keypoints {}", args.keypoints.display()))?;

    let (w, h) = heat.dims();
    let scale = (
        w as f64 / original.width() as f64,
        h as f64 / original.height() as f64,
    );
    let skeleton = render_track(&resize_to(&original, w, h)?, &track, scale, min_confidence);
    let overlap = hm::average_overlap(&heat, &skeleton).with_context(|| {
        format!(
            "{} and {} do not match",
            args.heatmap.display(),
            args.original.display()
        )
    })?;
    create_out(&args.out)?;
    write_video(&overlap, &args.out, &manifest.subject_id, "overlap")?;

    let tracked = track
        .iter()
        .filter(|f| f.frame_index < overlap.count())
        .count();
    finish(
        &args.out,
        json!({
            "command": "overlay",
            "heatmap": show(&args.heatmap),
            "original": show(&args.original),
            "keypoints": show(&args.keypoints),
            "out": show(&args.out),
            "min_confidence": min_confidence,
        }),
        json!({
            "manifest": show(&args.out.join(MANIFEST_FILE)),
            "frames": overlap.count(),
            "width": w,
            "height": h,
            "frames_with_keypoints": tracked,
        }),
        &[
            format!("overlap video of {} frames at {w}x{h}", overlap.count()),
            format!("{tracked} frames carry keypoints (confidence >= {min_confidence})"),
            format!("written to {}", args.out.display()),
        ],
    )
}

fn label_counts(labels: &[MotionLabel]) -> BTreeMap<&'static str, usize> {
    let mut counts: BTreeMap<&'static str, usize> =
        MotionLabel::ALL.iter().map(|l| (l.as_str(), 0)).collect();
    for l in labels {
        *counts.get_mut(l.as_str()).expect("all labels present") += 1;
    }
    counts
}

fn subject_of(manifest: &Manifest, path: &Path) -> String {
    if !manifest.subject_id.is_empty() {
        return manifest.subject_id.clone();
    }
    path.parent()
        .and_then(|p| p.file_name())
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn extract(args: &ExtractArgs, file: &FileConfig) -> Result<()> {
    ensure!(
        args.video.len() == args.labels.len(),
        "{} --video but {} --labels; give one label file per video",
        args.video.len(),
        args.labels.len()
    );
    let window = pick(args.window_secs, file.window_secs, DEFAULT_WINDOW_SECS);
    let feature_length = pick(
        args.feature_length,
        file.feature_length,
        DEFAULT_FEATURE_LENGTH,
    );
    ensure!(
        window >= 0.0 && window.is_finite(),
        "window must be >= 0 seconds, got {window}"
    );

    let mut waveforms = Vec::new();
    for (video, labels) in args.video.iter().zip(&args.labels) {
        let (manifest, seq) = load_video(video)?;
        let text = fs::read_to_string(labels)
            .with_context(|| format!("cannot read label file {}", labels.display()))?;
        let label_file = match validate_label_json(&text, seq.dims(), seq.count()) {
            Ok(f) => f,
            Err(violations) => {
                let lines: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
                bail!(
                    "label file {} is invalid:\n{}",
                    labels.display(),
                    lines.join("\n")
                );
            }
        };
        let subject = subject_of(&manifest, video);
        let extracted = extract_region_waveforms(&seq, &label_file, &subject)
            .with_context(|| format!("extracting {} from {}", labels.display(), video.display()))?;
        waveforms.extend(extracted);
    }
    ensure!(
        !waveforms.is_empty(),
        "no labeled regions in the given label files"
    );

    let dataset =
        WaveformDataset::normalized(&waveforms, (window > 0.0).then_some(window), feature_length)
            .context("cannot normalize waveforms")?;
    create_out(&args.out)?;
    let csv = args.out.join("dataset.csv");
    dataset
        .write_csv(&csv)
        .with_context(|| format!("cannot write {}", csv.display()))?;
    let mesh = args.out.join("mesh.csv");
    let plot = export_mesh(dataset.items(), &mesh)
        .with_context(|| format!("cannot write {}", mesh.display()))?;

    let counts = label_counts(&dataset.labels());
    finish(
        &args.out,
        json!({
            "command": "extract",
            "video": args.video.iter().map(|p| show(p)).collect::<Vec<_>>(),
            "labels": args.labels.iter().map(|p| show(p)).collect::<Vec<_>>(),
            "out": show(&args.out),
            "window_secs": window,
            "feature_length": feature_length,
        }),
        json!({
            "dataset": show(&csv),
            "mesh": show(&mesh),
            "plot": show(&plot),
            "waveforms": dataset.len(),
            "feature_length": feature_length,
            "per_label": counts,
        }),
        &[
            format!(
                "{} waveforms of length {feature_length} from {} video(s)",
                dataset.len(),
                args.video.len()
            ),
            format!("per label: {counts:?}"),
            format!("dataset written to {}", csv.display()),
        ],
    )
}

fn read_dataset(path: &Path) -> Result<WaveformDataset> {
    WaveformDataset::read_csv(path, DATASET_FPS)
        .with_context(|| format!("cannot read dataset {}", path.display()))
}

fn evaluation_json(e: &Evaluation) -> Value {
    let recall: BTreeMap<&str, Option<f64>> = MotionLabel::ALL
        .iter()
        .map(|l| (l.as_str(), e.recall[l.index()]))
        .collect();
    json!({
        "accuracy": e.accuracy,
        "confusion": e.confusion.counts,
        "class_order": MotionLabel::ALL.iter().map(|l| l.as_str()).collect::<Vec<_>>(),
        "recall": recall,
        "test_size": e.confusion.total(),
    })
}

fn recall_line(e: &Evaluation) -> String {
    let parts: Vec<String> = MotionLabel::ALL
        .iter()
        .map(|l| match e.recall[l.index()] {
            Some(r) => format!("{l} {r:.3}"),
            None => format!("{l} n/a"),
        })
        .collect();
    format!("recall: {}", parts.join(", "))
}

pub fn train(args: &TrainArgs, file: &FileConfig) -> Result<()> {
    let k = pick(args.k, file.k, DEFAULT_K);
    let seed = pick(args.seed, file.seed, 0);
    let fraction = pick(
        args.train_fraction,
        file.train_fraction,
        DEFAULT_TRAIN_FRACTION,
    );
    let dataset = read_dataset(&args.dataset)?;
    let spec = SplitSpec::new(fraction, seed)?;
    let (train, test) = split(&dataset, &spec)?;
    let model = KnnModel::fit(&train, k)?;
    let eval = evaluate(&model, &test)?;

    create_out(&args.out)?;
    let model_path = args.out.join("model.json");
    write_json(&model_path, &model)?;
    for (name, part) in [("train.csv", &train), ("test.csv", &test)] {
        let path = args.out.join(name);
        part.write_csv(&path)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    write_text(&args.out.join("confusion.csv"), &eval.confusion.to_csv())?;

    let mut result = evaluation_json(&eval);
    result["model"] = json!(show(&model_path));
    result["train_size"] = json!(train.len());
    finish(
        &args.out,
        json!({
            "command": "train",
            "dataset": show(&args.dataset),
            "out": show(&args.out),
            "k": k,
            "seed": seed,
            "train_fraction": fraction,
        }),
        result,
        &[
            format!(
                "trained k={k} on {} items, tested on {}",
                train.len(),
                test.len()
            ),
            format!("accuracy: {:.3}", eval.accuracy),
            recall_line(&eval),
            format!("model written to {}", model_path.display()),
        ],
    )
}

fn load_model(path: &Path) -> Result<KnnModel> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read model {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid model {}", path.display()))
}

pub fn eval(args: &EvalArgs, file: &FileConfig) -> Result<()> {
    let dataset = read_dataset(&args.dataset)?;
    create_out(&args.out)?;

    if let Some(model_path) = &args.model {
        let mut model = load_model(model_path)?;
        if let Some(k) = args.k.or(file.k) {
            model = model.with_k(k)?;
        }
        let eval = evaluate(&model, &dataset)?;
        write_text(&args.out.join("confusion.csv"), &eval.confusion.to_csv())?;
        return finish(
            &args.out,
            json!({
                "command": "eval",
                "dataset": show(&args.dataset),
                "model": show(model_path),
                "out": show(&args.out),
                "k": model.k(),
            }),
            evaluation_json(&eval),
            &[
                format!("evaluated k={} on {} items", model.k(), dataset.len()),
                format!("accuracy: {:.3}", eval.accuracy),
                recall_line(&eval),
            ],
        );
    }

    let k = pick(args.k, file.k, DEFAULT_K);
    let seeds = pick(args.seeds.clone(), file.seeds.clone(), vec![0, 1, 2]);
    let fraction = pick(
        args.train_fraction,
        file.train_fraction,
        DEFAULT_TRAIN_FRACTION,
    );
    ensure!(!seeds.is_empty(), "at least one seed is required");
    let mut accuracies = Vec::new();
    let mut runs = Vec::new();
    for &seed in &seeds {
        let (train, test) = split(&dataset, &SplitSpec::new(fraction, seed)?)?;
        let eval = evaluate(&KnnModel::fit(&train, k)?, &test)?;
        write_text(
            &args.out.join(format!("confusion_seed{seed}.csv")),
            &eval.confusion.to_csv(),
        )?;
        accuracies.push(eval.accuracy);
        let mut run = evaluation_json(&eval);
        run["seed"] = json!(seed);
        runs.push(run);
    }
    let mean = accuracies.iter().sum::<f64>() / accuracies.len() as f64;
    let listed: Vec<String> = seeds
        .iter()
        .zip(&accuracies)
        .map(|(s, a)| format!("seed {s}: {a:.3}"))
        .collect();
    finish(
        &args.out,
        json!({
            "command": "eval",
            "dataset": show(&args.dataset),
            "out": show(&args.out),
            "k": k,
            "seeds": seeds,
            "train_fraction": fraction,
        }),
        json!({ "accuracies": accuracies, "mean_accuracy": mean, "runs": runs }),
        &[
            format!("k={k}, {} seeded splits", seeds.len()),
            listed.join(", "),
            format!("accuracy: {mean:.3} (mean)"),
        ],
    )
}

pub fn sweep(args: &SweepArgs, file: &FileConfig) -> Result<()> {
    let k_values = pick(
        args.k_values.clone(),
        file.k_values.clone(),
        DEFAULT_K_VALUES.to_vec(),
    );
    let seed = pick(args.seed, file.seed, 0);
    let fraction = pick(
        args.train_fraction,
        file.train_fraction,
        DEFAULT_TRAIN_FRACTION,
    );
    ensure!(!k_values.is_empty(), "at least one k is required");
    let dataset = read_dataset(&args.dataset)?;
    let rows = k_sweep(&dataset, &SplitSpec::new(fraction, seed)?, &k_values)?;

    create_out(&args.out)?;
    let csv: PathBuf = args.out.join("k_sweep.csv");
    write_text(&csv, &k_sweep_csv(&rows))?;
    let best = rows
        .iter()
        .fold(None::<(usize, f64)>, |b, &(k, a)| match b {
            Some((_, ba)) if ba >= a => b,
            _ => Some((k, a)),
        })
        .expect("non-empty sweep");
    let lines: Vec<String> = rows.iter().map(|(k, a)| format!("k={k}: {a:.3}")).collect();
    finish(
        &args.out,
        json!({
            "command": "sweep",
            "dataset": show(&args.dataset),
            "out": show(&args.out),
            "k_values": k_values,
            "seed": seed,
            "train_fraction": fraction,
        }),
        json!({
            "csv": show(&csv),
            "rows": rows.iter().map(|(k, a)| json!({"k": k, "accuracy": a})).collect::<Vec<_>>(),
            "best_k": best.0,
            "best_accuracy": best.1,
        }),
        &[
            lines.join(", "),
            format!("best: k={} ({:.3})", best.0, best.1),
        ],
    )
}
