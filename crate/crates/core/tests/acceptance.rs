//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use image::{Rgb, RgbImage};
use micromotion::evm::{magnify, MagnifyConfig};
use micromotion::frame_io::{pad_to_levels, FrameSequence};
use micromotion::heatmap::heatmap;
use micromotion::knn::{evaluate, k_sweep, k_sweep_csv, split, KnnModel, SplitSpec};
use micromotion::labeling::{validate_label_json, MotionLabel};
use micromotion::pyramid::{build_laplacian, collapse, FloatImage, Kernel5};
use micromotion::temporal_filter::{ideal_bandpass, BandpassSpec, PixelSeries};
use micromotion::waveform::{Waveform, WaveformDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::{json, Value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> Result<(), String> {
    ensure(elapsed < Duration::from_secs(limit_secs), || {
        format!("took {:.2?}, limit {limit_secs} s", elapsed)
    })
}

// ---------------------------------------------------------------------------

fn pyramid_reconstruction() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let kernel = Kernel5::binomial();
    let mut worst = 0.0f32;
    for _ in 0..50 {
        let img = FloatImage::from_fn(64, 64, |_, _, _| rng.random::<f32>());
        let pyr = build_laplacian(&img, 3, &kernel).map_err(|e| e.to_string())?;
        let back = collapse(&pyr, &kernel).map_err(|e| e.to_string())?;
        worst = worst.max(img.max_abs_diff(&back));
    }
    let elapsed = start.elapsed();
    ensure(worst <= 1e-5, || format!("max error {worst:e} > 1e-5"))?;
    within(elapsed, 10)?;
    Ok(format!("max error {worst:.2e}, {elapsed:.2?}"))
}

fn random_video(rng: &mut ChaCha8Rng, w: u32, h: u32, n: usize) -> FrameSequence {
    let frames = (0..n)
        .map(|_| RgbImage::from_fn(w, h, |_, _| Rgb([rng.random(), rng.random(), rng.random()])))
        .collect();
    FrameSequence::new(frames, 30.0).unwrap()
}

fn magnification_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let band = BandpassSpec::new(0.5, 3.0, 30.0).unwrap();
    let mut worst = 0u8;
    for &(w, h, n) in &[(37, 29, 16), (64, 48, 30), (5, 3, 2), (17, 40, 45)] {
        let seq = random_video(&mut rng, w, h, n);
        let out = magnify(&seq, &MagnifyConfig::new(0.0, 3, band)).map_err(|e| e.to_string())?;
        let padded = pad_to_levels(&seq, 3);
        ensure(out.dims() == padded.dims() && out.count() == n, || {
            format!(
                "shape {:?}x{} vs {:?}x{n}",
                out.dims(),
                out.count(),
                padded.dims()
            )
        })?;
        for (a, b) in out.frames().iter().zip(padded.frames()) {
            for (x, y) in a.as_raw().iter().zip(b.as_raw()) {
                worst = worst.max(x.abs_diff(*y));
            }
        }
    }
    ensure(worst <= 1, || format!("max deviation {worst} steps"))?;
    Ok(format!("max deviation {worst}/255 over 4 random videos"))
}

/// Per-frame centroid of the horizontal forward-difference gradient.
fn gradient_centroid(frame: &RgbImage) -> f64 {
    let (w, h) = frame.dimensions();
    let (mut num, mut den) = (0.0, 0.0);
    for y in 0..h {
        for x in 0..w - 1 {
            let g = frame.get_pixel(x + 1, y)[0] as f64 - frame.get_pixel(x, y)[0] as f64;
            num += (x as f64 + 0.5) * g;
            den += g;
        }
    }
    num / den
}

/// Amplitude of the `freq` component of `xs` sampled at `fps`.
fn tone_amplitude(xs: &[f64], freq: f64, fps: f64) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let (mut s, mut c) = (0.0, 0.0);
    for (i, x) in xs.iter().enumerate() {
        let phase = TAU * freq * i as f64 / fps;
        s += (x - mean) * phase.sin();
        c += (x - mean) * phase.cos();
    }
    2.0 * (s * s + c * c).sqrt() / n
}

fn amplification_law() -> Outcome {
    let start = Instant::now();
    let (size, fps, n) = (64u32, 30.0, 300usize);
    let blur = 2.0;
    let frames = (0..n)
        .map(|t| {
            let shift = 0.2 * (TAU * t as f64 / fps).sin();
            RgbImage::from_fn(size, size, |x, y| {
                // A slight tilt gives each row a different sub-pixel phase,
                // which dithers the 8-bit quantization.
                let x0 = 31.5 + shift + (y as f64 / size as f64 - 0.5);
                let v = 0.2 + 0.6 / (1.0 + (-(x as f64 - x0) / blur).exp());
                let b = (v * 255.0).round() as u8;
                Rgb([b, b, b])
            })
        })
        .collect();
    let seq = FrameSequence::new(frames, fps).unwrap();
    let band = BandpassSpec::new(0.5, 2.0, fps).unwrap();
    let out = magnify(&seq, &MagnifyConfig::new(9.0, 3, band)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let track =
        |s: &FrameSequence| -> Vec<f64> { s.frames().iter().map(gradient_centroid).collect() };
    let input_amp = tone_amplitude(&track(&seq), 1.0, fps);
    let output_amp = tone_amplitude(&track(&out), 1.0, fps);
    ensure((output_amp - 2.0).abs() <= 0.4, || {
        format!("output amplitude {output_amp:.3} px (input {input_amp:.3} px), want 2.0 +/- 0.4")
    })?;
    within(elapsed, 60)?;
    Ok(format!(
        "input {input_amp:.3} px -> output {output_amp:.3} px, {elapsed:.2?}"
    ))
}

fn bandpass_exactness() -> Outcome {
    let (fps, n) = (30.0, 300usize);
    let spec = BandpassSpec::new(0.5, 3.0, fps).unwrap();
    let tone = |freq: f64, amp: f64, offset: f64| -> Vec<f64> {
        (0..n)
            .map(|i| offset + amp * (TAU * freq * i as f64 / fps + 0.3).sin())
            .collect()
    };
    let run = |xs: Vec<f64>| -> Result<Vec<f64>, String> {
        let series = PixelSeries::new(xs, fps).map_err(|e| e.to_string())?;
        Ok(ideal_bandpass(&series, &spec)
            .map_err(|e| e.to_string())?
            .samples)
    };

    let mut worst_gain = 0.0f64;
    for freq in [0.5, 1.0, 1.7, 2.9] {
        let clean = tone(freq, 0.25, 0.0);
        let out = run(tone(freq, 0.25, 0.4))?;
        let gain = tone_amplitude(&out, freq, fps) / 0.25;
        let residual = out
            .iter()
            .zip(&clean)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(residual <= 1e-6 * 0.25, || {
            format!("{freq} Hz: pointwise residual {residual:e}")
        })?;
        worst_gain = worst_gain.max((gain - 1.0).abs());
    }
    ensure(worst_gain <= 1e-6, || format!("gain error {worst_gain:e}"))?;

    let mut worst_stop = 0.0f64;
    for freq in [0.1, 0.4, 3.0, 7.5, 14.9] {
        let out = run(tone(freq, 0.25, 0.0))?;
        worst_stop = worst_stop.max(out.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    ensure(worst_stop <= 1e-6, || {
        format!("stop-band residual {worst_stop:e}")
    })?;

    let dc = run(vec![0.7; n])?;
    let worst_dc = dc.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ensure(worst_dc <= 1e-6, || format!("DC residual {worst_dc:e}"))?;
    Ok(format!(
        "|gain-1| {worst_gain:.1e}, stop-band {worst_stop:.1e}, DC {worst_dc:.1e}"
    ))
}

fn heatmap_algebra() -> Outcome {
    let one = |v: u8| RgbImage::from_pixel(1, 1, Rgb([v, v, v]));
    let seq_of = |vals: &mut dyn Iterator<Item = u8>| {
        FrameSequence::new(vals.map(one).collect(), 30.0).unwrap()
    };
    let all = seq_of(&mut (0..=255u8));
    let zero = seq_of(&mut std::iter::repeat_n(0, 256));
    let hm = |a: &FrameSequence, b: &FrameSequence| heatmap(a, b).map_err(|e| e.to_string());

    ensure(hm(&all, &all)? == all, || "not idempotent".into())?;
    ensure(hm(&all, &zero)? == all && hm(&zero, &all)? == all, || {
        "zero frame is not an identity".into()
    })?;
    let mut pairs = 0usize;
    for b in 0..=255u8 {
        let other = seq_of(&mut std::iter::repeat_n(b, 256));
        let ab = hm(&all, &other)?;
        ensure(ab == hm(&other, &all)?, || {
            format!("not commutative for b = {b}")
        })?;
        for (a, f) in ab.frames().iter().enumerate() {
            ensure(f.get_pixel(0, 0).0 == [a as u8 | b; 3], || {
                format!("{a} | {b} wrong")
            })?;
            pairs += 1;
        }
    }
    Ok(format!("{pairs} byte pairs"))
}

/// Brute-force reference: full sort-free selection of the k nearest, then an
/// explicit vote with the documented tie rules.
fn oracle_predict(train: &[Vec<f64>], labels: &[usize], k: usize, x: &[f64]) -> usize {
    let dist: Vec<f64> = train
        .iter()
        .map(|v| {
            v.iter()
                .zip(x)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let mut taken = vec![false; train.len()];
    let mut votes = [0usize; 4];
    let mut nearest = [f64::INFINITY; 4];
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for i in 0..train.len() {
            if taken[i] {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(b) if dist[i] < dist[b] => best = Some(i),
                _ => {}
            }
        }
        let i = best.unwrap();
        taken[i] = true;
        votes[labels[i]] += 1;
        if dist[i] < nearest[labels[i]] {
            nearest[labels[i]] = dist[i];
        }
    }
    let mut winner = 0;
    for c in 1..4 {
        if votes[c] > votes[winner] || (votes[c] == votes[winner] && nearest[c] < nearest[winner]) {
            winner = c;
        }
    }
    winner
}

fn knn_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut queries = 0usize;
    for dataset in 0..100 {
        let n = rng.random_range(4..=200);
        // Every fourth dataset uses a coarse value grid to force ties.
        let coarse = dataset % 4 == 0;
        let sample = |rng: &mut ChaCha8Rng| -> f64 {
            if coarse {
                rng.random_range(0..3) as f64 * 0.5
            } else {
                rng.random_range(-1.0..1.0)
            }
        };
        let dim = 300;
        let mut train: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| sample(&mut rng)).collect())
            .collect();
        if coarse {
            for v in train.iter_mut() {
                // Mostly-equal vectors so that many distances coincide.
                for s in v.iter_mut().skip(3) {
                    *s = 0.0;
                }
            }
        }
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let k = rng.random_range(1..=n.min(25));
        let model = KnnModel::new(
            train.clone(),
            labels.iter().map(|&l| MotionLabel::ALL[l]).collect(),
            k,
        )
        .map_err(|e| e.to_string())?;
        let mut xs: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let mut v: Vec<f64> = (0..dim).map(|_| sample(&mut rng)).collect();
                if coarse {
                    v.iter_mut().skip(3).for_each(|s| *s = 0.0);
                }
                v
            })
            .collect();
        xs.extend((0..5).map(|_| train[rng.random_range(0..n)].clone()));
        let got = model.predict_many(&xs).map_err(|e| e.to_string())?;
        for (x, g) in xs.iter().zip(&got) {
            let want = MotionLabel::ALL[oracle_predict(&train, &labels, k, x)];
            ensure(*g == want, || {
                format!("dataset {dataset} (n={n}, k={k}): got {g}, oracle {want}")
            })?;
            queries += 1;
        }
    }
    Ok(format!("{queries} queries over 100 datasets agree"))
}

const SYNTH_FREQS: [f64; 4] = [1.2, 0.25, 0.05, 3.0];

fn synthetic_dataset(seed: u64) -> WaveformDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.02).unwrap();
    let (fps, n) = (30.0, 300);
    let mut waves = Vec::new();
    for i in 0..80 {
        let class = i % 4;
        let amp = rng.random_range(0.08..0.12);
        let samples = (0..n)
            .map(|t| {
                0.5 + amp * (TAU * SYNTH_FREQS[class] * t as f64 / fps).sin()
                    + noise.sample(&mut rng)
            })
            .collect();
        waves.push(
            Waveform::new(samples, fps)
                .with_label(MotionLabel::ALL[class])
                .with_source("synthetic", &format!("r{i:02}")),
        );
    }
    WaveformDataset::normalized(&waves, Some(10.0), 300).unwrap()
}

fn end_to_end_classification() -> Outcome {
    let start = Instant::now();
    let data = synthetic_dataset(7);
    let (train, test) = split(&data, &SplitSpec::with_seed(7)).map_err(|e| e.to_string())?;
    ensure(train.len() == 56 && test.len() == 24, || {
        format!("split {}/{}", train.len(), test.len())
    })?;
    let model = KnnModel::fit(&train, 3).map_err(|e| e.to_string())?;
    let eval = evaluate(&model, &test).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();

    let mut per_class = [0u64; 4];
    for l in test.labels() {
        per_class[l.index()] += 1;
    }
    ensure(eval.confusion.row_sums() == per_class, || {
        format!(
            "row sums {:?} vs class counts {per_class:?}",
            eval.confusion.row_sums()
        )
    })?;
    ensure(eval.accuracy >= 0.95, || {
        format!("accuracy {:.3}", eval.accuracy)
    })?;
    within(elapsed, 10)?;
    Ok(format!(
        "accuracy {:.3}, row sums {:?}, {elapsed:.2?}",
        eval.accuracy, per_class
    ))
}

fn k_sweep_output() -> Outcome {
    let ks = [1, 3, 5, 7, 9];
    let spec = SplitSpec::with_seed(8);
    let first = k_sweep(&synthetic_dataset(8), &spec, &ks).map_err(|e| e.to_string())?;
    let second = k_sweep(&synthetic_dataset(8), &spec, &ks).map_err(|e| e.to_string())?;
    ensure(first.len() == 5, || format!("{} rows", first.len()))?;
    ensure(first == second, || "reruns differ".into())?;
    ensure(first.iter().map(|r| r.0).eq(ks), || {
        "k column out of order".into()
    })?;
    let csv = k_sweep_csv(&first);
    ensure(
        csv.lines().count() == 6 && csv == k_sweep_csv(&second),
        || "csv mismatch".into(),
    )?;
    let best = first.iter().map(|r| r.1).fold(0.0, f64::max);
    let at3 = first[1].1;
    ensure(at3 >= best - 0.05, || {
        format!("k=3 accuracy {at3:.3} vs best {best:.3}")
    })?;
    let accs: Vec<String> = first.iter().map(|(k, a)| format!("{k}:{a:.3}")).collect();
    Ok(format!("5 rows, identical on rerun [{}]", accs.join(" ")))
}

const DIMS: (u32, u32) = (64, 48);
const FRAME_COUNT: usize = 300;

fn valid_region(rng: &mut ChaCha8Rng, id: &str) -> Value {
    let x0 = rng.random_range(0.0..50.0);
    let y0 = rng.random_range(0.0..35.0);
    let w = rng.random_range(2.0..(DIMS.0 as f64 - x0));
    let h = rng.random_range(2.0..(DIMS.1 as f64 - y0));
    let polygon = if rng.random_bool(0.5) {
        json!([[x0, y0], [x0 + w, y0], [x0 + w, y0 + h], [x0, y0 + h]])
    } else {
        json!([[x0, y0], [x0 + w, y0], [x0, y0 + h]])
    };
    let label = MotionLabel::ALL[rng.random_range(0..4)].as_str();
    let frame_range = if rng.random_bool(0.5) {
        let s = rng.random_range(0..FRAME_COUNT - 1);
        json!([s, rng.random_range(s + 1..=FRAME_COUNT)])
    } else {
        Value::Null
    };
    json!({ "id": id, "label": label, "polygon": polygon, "frame_range": frame_range })
}

const MUTATIONS: usize = 23;

/// Breaks region `idx` of `regions` in one of [`MUTATIONS`] ways. Returns the
/// name a violation must use for it.
fn mutate(rng: &mut ChaCha8Rng, regions: &mut [Value], idx: usize, kind: usize) -> String {
    let fallback = format!("#{idx}");
    let id = regions[idx]["id"].as_str().unwrap().to_string();
    let w = DIMS.0 as f64;
    let dup = (regions.len() > 1).then(|| {
        regions[(idx + 1) % regions.len()]["id"]
            .as_str()
            .unwrap()
            .to_string()
    });
    let r = regions[idx].as_object_mut().unwrap();
    match kind {
        0 => {
            r.remove("id");
            return fallback;
        }
        1 => {
            r.insert("id".into(), json!(""));
            return fallback;
        }
        2 => {
            r.insert("id".into(), json!(17));
            return fallback;
        }
        3 => {
            // Duplicate of another region's id; with a single region, fall
            // back to an unknown label.
            if let Some(dup) = dup {
                r.insert("id".into(), json!(dup.clone()));
                return dup;
            }
            r.insert("label".into(), json!("wrist"));
        }
        4 => {
            r.insert("label".into(), json!("tremor"));
        }
        5 => {
            r.insert("label".into(), json!(3));
        }
        6 => {
            r.remove("label");
        }
        7 => {
            r.remove("polygon");
        }
        8 => {
            r.insert("polygon".into(), json!("square"));
        }
        9 => {
            r.insert("polygon".into(), json!([[1.0, 1.0], [5.0, 5.0]]));
        }
        10 => {
            let x = w + rng.random_range(0.5..100.0);
            r["polygon"][0] = json!([x, 1.0]);
        }
        11 => {
            r["polygon"][1] = json!([-rng.random_range(0.1..10.0), 2.0]);
        }
        12 => {
            r.insert(
                "polygon".into(),
                json!([[2.0, 2.0], [10.0, 10.0], [10.0, 2.0], [2.0, 10.0]]),
            );
        }
        13 => {
            r.insert(
                "polygon".into(),
                json!([[1.0, 1.0], [4.0, 4.0], [9.0, 9.0]]),
            );
        }
        14 => {
            r["polygon"][0] = json!([1.0]);
        }
        15 => {
            r["polygon"][2] = json!(["a", 2.0]);
        }
        16 => {
            r.insert("frame_range".into(), json!([20, 10]));
        }
        17 => {
            r.insert(
                "frame_range".into(),
                json!([0, FRAME_COUNT + rng.random_range(1..50)]),
            );
        }
        18 => {
            r.insert("frame_range".into(), json!([1.5, 3]));
        }
        19 => {
            r.insert("frame_range".into(), json!([-1, 3]));
        }
        20 => {
            r.insert("frame_range".into(), json!([1, 2, 3]));
        }
        21 => {
            regions[idx] = json!("oops");
            return fallback;
        }
        22 => {
            let first = r["polygon"][0].clone();
            r["polygon"].as_array_mut().unwrap().insert(1, first);
        }
        _ => unreachable!(),
    }
    id
}

fn label_validation_fuzz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut kinds_seen = [0usize; MUTATIONS];
    for case in 0..1000 {
        let n = rng.random_range(1..=4);
        let mut regions: Vec<Value> = (0..n)
            .map(|i| valid_region(&mut rng, &format!("r{i}")))
            .collect();
        let base = json!({
            "video_ref": "synthetic", "author": "fuzz", "created_at": "2024-01-01T00:00:00Z",
            "regions": regions.clone(),
        });
        let text = base.to_string();
        ensure(
            validate_label_json(&text, DIMS, FRAME_COUNT).is_ok(),
            || format!("case {case}: unmutated base rejected: {text}"),
        )?;

        let idx = rng.random_range(0..n);
        let kind = rng.random_range(0..MUTATIONS);
        kinds_seen[kind] += 1;
        let expected = mutate(&mut rng, &mut regions, idx, kind);
        let text = json!({
            "video_ref": "synthetic", "author": "fuzz", "created_at": "2024-01-01T00:00:00Z",
            "regions": regions,
        })
        .to_string();
        let result = catch_unwind(|| validate_label_json(&text, DIMS, FRAME_COUNT))
            .map_err(|_| format!("case {case}: validation panicked on {text}"))?;
        let violations = match result {
            Ok(_) => return Err(format!("case {case} (mutation {kind}) accepted: {text}")),
            Err(v) => v,
        };
        ensure(
            violations
                .iter()
                .all(|v| v.region.as_deref().is_some_and(|r| !r.is_empty())),
            || format!("case {case}: violation without region: {violations:?}"),
        )?;
        ensure(
            violations
                .iter()
                .any(|v| v.region.as_deref() == Some(expected.as_str())),
            || {
                format!("case {case} (mutation {kind}): no violation names `{expected}`: {violations:?}")
            },
        )?;
    }
    ensure(kinds_seen.iter().all(|&c| c > 0), || {
        format!("mutation coverage {kinds_seen:?}")
    })?;

    // Byte-level corruption: only required not to panic.
    let mut crashes = 0;
    for _ in 0..1000 {
        let region = valid_region(&mut rng, "r0");
        let mut bytes =
            json!({"video_ref": "v", "author": "a", "created_at": "t", "regions": [region]})
                .to_string()
                .into_bytes();
        for _ in 0..rng.random_range(1..6) {
            if bytes.is_empty() {
                break;
            }
            let i = rng.random_range(0..bytes.len());
            match rng.random_range(0..3) {
                0 => bytes[i] = rng.random(),
                1 => {
                    bytes.remove(i);
                }
                _ => bytes.truncate(i.max(1)),
            }
        }
        let text = String::from_utf8_lossy(&bytes).into_owned();
        if catch_unwind(|| validate_label_json(&text, DIMS, FRAME_COUNT)).is_err() {
            crashes += 1;
        }
    }
    ensure(crashes == 0, || {
        format!("{crashes} panics on byte-corrupted input")
    })?;
    Ok(
        "1000 region-level cases rejected with named regions; 1000 byte-level cases, no panic"
            .into(),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("pyramid reconstruction", pyramid_reconstruction),
        ("magnification identity", magnification_identity),
        ("amplification law", amplification_law),
        ("ideal bandpass exactness", bandpass_exactness),
        ("heatmap algebra", heatmap_algebra),
        ("kNN oracle equivalence", knn_oracle_equivalence),
        (
            "end-to-end synthetic classification",
            end_to_end_classification,
        ),
        ("k-sweep output", k_sweep_output),
        ("label-file validation fuzz", label_validation_fuzz),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|payload| {
            let msg = payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    let _ = std::panic::take_hook();
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
