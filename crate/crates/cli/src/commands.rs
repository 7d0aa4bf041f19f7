use std::path::{Path, PathBuf};

use shapelet_core::forest::{self, Evaluation};
use shapelet_core::preprocess::{
    balance_by_downsampling, bandpass, decimate, rms_envelope, segment, zero_upcross_waves,
    SegmentationSpec,
};
use shapelet_core::{discover, shapelet_transform, ClassLabel, LabeledDataset, TimeSeries, TransformMatrix};

use crate::artifact::{
    check_fingerprints, load_csv_meta, load_model, load_shapelets, meta_path, CsvMeta,
    MetricsArtifact, ModelArtifact, ShapeletArtifact, ARTIFACT_VERSION, CSV_META_FORMAT,
    METRICS_FORMAT, MODEL_FORMAT, SHAPELETS_FORMAT,
};
use crate::cli::{Cli, Command, DiscoverArgs, InputFormat, Io, ModelArgs, PreprocessArgs, SynthArgs, TrainArgs, TransformArgs};
use crate::config::{sha256_hex, EnvelopeSide, RunConfig, Step};
use crate::error::{CliError, Result};
use crate::io::{
    dataset_csv, parse_dataset, parse_stream, parse_transform, predictions_csv, read_bytes, to_json,
    transform_csv, write_bytes,
};
use crate::number::{fmt_g9, round_g9};
use crate::synth::{detection_dataset, SynthSpec};

pub const DEFAULT_STREAM_LABEL: &str = "?";

/// Runs a parsed command line, inside a dedicated thread pool when `--threads` is given.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::mismatch(format!("cannot start {n} threads: {e}")))?;
            pool.install(|| run(cli))
        }
        None => run(cli),
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    }
    .with_seed(cli.seed);
    match cli.command {
        Command::Preprocess(args) => cmd_preprocess(&cfg, args),
        Command::Discover(args) => cmd_discover(&cfg, args),
        Command::Transform(args) => cmd_transform(&cfg, args),
        Command::Train(args) => cmd_train(&cfg, args),
        Command::Predict(args) => cmd_predict(&cfg, args),
        Command::Evaluate(args) => cmd_evaluate(&cfg, args),
        Command::Synth(args) => cmd_synth(&cfg, args),
    }
}

fn input_path(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    flag.or_else(|| cfg.input.clone())
        .ok_or_else(|| CliError::mismatch("no input: pass --input or set `input` in the config"))
}

fn output_path(flag: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf> {
    flag.or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::mismatch("no output: pass --output or set `output` in the config"))
}

fn paths(io: Io, cfg: &RunConfig) -> Result<(PathBuf, PathBuf)> {
    Ok((input_path(io.input, cfg)?, output_path(io.output, cfg)?))
}

fn write_csv_with_meta(path: &Path, bytes: &[u8], meta: CsvMeta) -> Result<()> {
    write_bytes(path, bytes)?;
    write_bytes(&meta_path(path), &to_json(&meta))
}

fn csv_meta(kind: &str, cfg: &RunConfig, input_sha256: String, bytes: &[u8], rows: usize) -> CsvMeta {
    CsvMeta {
        format: CSV_META_FORMAT.into(),
        version: ARTIFACT_VERSION,
        kind: kind.into(),
        config_hash: cfg.hash(),
        input_sha256,
        shapelet_fingerprint: None,
        model_sha256: None,
        artifact_sha256: sha256_hex(bytes),
        rows,
    }
}

fn cmd_preprocess(cfg: &RunConfig, args: PreprocessArgs) -> Result<()> {
    let inputs = if args.input.is_empty() {
        vec![input_path(None, cfg)?]
    } else {
        args.input
    };
    let output = output_path(args.output, cfg)?;
    let rate = args.sample_rate.or(cfg.preprocess.sample_rate_hz);
    let label = args
        .label
        .or_else(|| cfg.preprocess.label.clone())
        .unwrap_or_else(|| DEFAULT_STREAM_LABEL.into());
    let label = ClassLabel::new(label)?;

    let mut data = LabeledDataset::default();
    let mut hashes = Vec::new();
    for (i, path) in inputs.iter().enumerate() {
        let bytes = read_bytes(path)?;
        hashes.push(sha256_hex(&bytes));
        let with_rate = |s: TimeSeries| match rate {
            Some(r) => s.with_sample_rate(r),
            None => Ok(s),
        };
        match args.format {
            InputFormat::Stream => {
                let series = TimeSeries::new(i.to_string(), parse_stream(path, &bytes)?)?;
                data.push(with_rate(series)?, label.clone());
            }
            InputFormat::Dataset => {
                for e in parse_dataset(path, &bytes, args.header)?.into_entries() {
                    let id = format!("{i}:{}", e.series.id());
                    let series = TimeSeries::new(id, e.series.into_values())?;
                    data.push(with_rate(series)?, e.label);
                }
            }
        }
    }
    let input_sha256 = match hashes.as_slice() {
        [one] => one.clone(),
        many => sha256_hex(many.concat().as_bytes()),
    };

    let data = apply_steps(data, &cfg.preprocess.steps)?;
    let bytes = dataset_csv(&data);
    let meta = csv_meta("dataset", cfg, input_sha256, &bytes, data.len());
    write_csv_with_meta(&output, &bytes, meta)?;
    eprintln!("wrote {} series to {}", data.len(), output.display());
    Ok(())
}

pub fn apply_steps(mut data: LabeledDataset, steps: &[Step]) -> Result<LabeledDataset> {
    for step in steps {
        data = match step {
            Step::Balance { seed } => balance_by_downsampling(&data, seed.unwrap_or(0))?,
            _ => {
                let mut out = LabeledDataset::default();
                for e in data.into_entries() {
                    for s in apply_step(&e.series, step)? {
                        out.push(s, e.label.clone());
                    }
                }
                out
            }
        };
    }
    Ok(data)
}

fn apply_step(x: &TimeSeries, step: &Step) -> Result<Vec<TimeSeries>> {
    Ok(match *step {
        Step::Bandpass { low_hz, high_hz } => vec![bandpass(x, low_hz, high_hz)?],
        Step::Decimate { factor } => vec![decimate(x, factor)?],
        Step::Segment { window_seconds, trailing } => {
            let rate = x.sample_rate_hz().ok_or_else(|| {
                CliError::mismatch("segmentation needs a sample rate: pass --sample-rate")
            })?;
            let segs = segment(x, &SegmentationSpec::new(window_seconds, rate, trailing)?)?;
            if segs.is_empty() {
                eprintln!("warning: series {} is shorter than one {window_seconds} s window", x.id());
            }
            segs
        }
        Step::RmsEnvelope { window, side } => {
            let (upper, lower) = rms_envelope(x, window)?;
            match side {
                EnvelopeSide::Upper => vec![upper],
                EnvelopeSide::Lower => vec![lower],
                EnvelopeSide::Both => vec![upper, lower],
            }
        }
        Step::ZeroUpcrossWaves => {
            let waves = zero_upcross_waves(x);
            if waves.is_empty() {
                eprintln!("warning: series {} has fewer than 2 zero up-crossings", x.id());
            }
            waves
        }
        Step::Balance { .. } => unreachable!("handled on the whole dataset"),
    })
}

fn cmd_discover(cfg: &RunConfig, args: DiscoverArgs) -> Result<()> {
    let (input, output) = paths(args.io, cfg)?;
    let bytes = read_bytes(&input)?;
    let data = parse_dataset(&input, &bytes, args.header)?;
    let set = discover(&data, &cfg.discovery)?;
    print!("{}", discovery_report(&set));
    let artifact = ShapeletArtifact {
        format: SHAPELETS_FORMAT.into(),
        version: ARTIFACT_VERSION,
        config_hash: cfg.hash(),
        input_sha256: sha256_hex(&bytes),
        config: cfg.clone(),
        shapelet_set: set,
    };
    write_bytes(&output, &to_json(&artifact))
}

/// One line per shapelet: rank, class, IG, threshold, margin and provenance.
pub fn discovery_report(set: &shapelet_core::ShapeletSet) -> String {
    let mut out = format!("{} shapelets\nrank,class,ig,threshold,margin,source,offset,length\n", set.len());
    for (i, s) in set.shapelets.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{},{},{},{},{}\n",
            s.class_label,
            fmt_g9(s.ig),
            fmt_g9(s.split_threshold),
            fmt_g9(s.margin),
            s.source_id,
            s.offset,
            s.length
        ));
    }
    out
}

fn cmd_transform(cfg: &RunConfig, args: TransformArgs) -> Result<()> {
    let (input, output) = paths(args.io, cfg)?;
    let (shapelets, fp) = load_shapelets(&args.shapelets)?;
    let bytes = read_bytes(&input)?;
    let data = parse_dataset(&input, &bytes, args.header)?;
    let m = shapelet_transform(&data, &shapelets.shapelet_set)?;
    let out = transform_csv(&m);
    let mut meta = csv_meta("transform", cfg, sha256_hex(&bytes), &out, m.rows());
    meta.shapelet_fingerprint = Some(fp);
    write_csv_with_meta(&output, &out, meta)?;
    eprintln!("wrote {} x {} matrix to {}", m.rows(), m.cols(), output.display());
    Ok(())
}

struct Features {
    matrix: TransformMatrix,
    input_sha256: String,
    fingerprint: String,
}

/// Loads a transform CSV and checks it was built from the supplied shapelet set.
fn load_features(input: &Path, shapelets: &Path) -> Result<Features> {
    let (set, fp) = load_shapelets(shapelets)?;
    let bytes = read_bytes(input)?;
    let meta = load_csv_meta(input, &bytes, "transform")?;
    check_fingerprints(&fp, &[("transform CSV", meta.shapelet_fingerprint.as_deref())])?;
    let matrix = parse_transform(input, &bytes)?;
    if matrix.shapelet_ids() != set.shapelet_set.keys().as_slice() {
        return Err(CliError::mismatch(format!(
            "{}: columns do not match the shapelet set",
            input.display()
        )));
    }
    Ok(Features { matrix, input_sha256: sha256_hex(&bytes), fingerprint: fp })
}

fn cmd_train(cfg: &RunConfig, args: TrainArgs) -> Result<()> {
    let (input, output) = paths(args.io, cfg)?;
    let f = load_features(&input, &args.shapelets)?;
    let mut model = forest::train(&f.matrix, &cfg.forest)?;
    model.shapelet_fingerprint = Some(f.fingerprint);
    match model.oob_accuracy {
        Some(acc) => eprintln!("trained {} trees, out-of-bag accuracy {}", model.trees.len(), fmt_g9(acc)),
        None => eprintln!("trained {} trees", model.trees.len()),
    }
    let artifact = ModelArtifact {
        format: MODEL_FORMAT.into(),
        version: ARTIFACT_VERSION,
        config_hash: cfg.hash(),
        input_sha256: f.input_sha256,
        config: cfg.clone(),
        model,
    };
    write_bytes(&output, &to_json(&artifact))
}

fn load_for_model(args: ModelArgs, cfg: &RunConfig) -> Result<(Features, ModelArtifact, String, PathBuf)> {
    let (input, output) = paths(args.io, cfg)?;
    let f = load_features(&input, &args.shapelets)?;
    let (model, model_sha) = load_model(&args.model)?;
    check_fingerprints(&f.fingerprint, &[("model", model.model.shapelet_fingerprint.as_deref())])?;
    Ok((f, model, model_sha, output))
}

fn cmd_predict(cfg: &RunConfig, args: ModelArgs) -> Result<()> {
    let (f, art, model_sha, output) = load_for_model(args, cfg)?;
    let predictions = art.model.predict_matrix(&f.matrix)?;
    let bytes = predictions_csv(&art.model.classes, &predictions);
    let mut meta = csv_meta("predictions", cfg, f.input_sha256, &bytes, predictions.len());
    meta.shapelet_fingerprint = Some(f.fingerprint);
    meta.model_sha256 = Some(model_sha);
    write_csv_with_meta(&output, &bytes, meta)
}

fn cmd_evaluate(cfg: &RunConfig, args: ModelArgs) -> Result<()> {
    let (f, art, model_sha, output) = load_for_model(args, cfg)?;
    let evaluation = rounded(forest::evaluate(&art.model, &f.matrix)?);
    match evaluation.accuracy {
        Some(acc) => eprintln!("accuracy {} on {} rows", fmt_g9(acc), f.matrix.rows()),
        None => eprintln!("no rows to evaluate"),
    }
    let artifact = MetricsArtifact {
        format: METRICS_FORMAT.into(),
        version: ARTIFACT_VERSION,
        config_hash: cfg.hash(),
        input_sha256: f.input_sha256,
        model_sha256: model_sha,
        shapelet_fingerprint: f.fingerprint,
        evaluation,
    };
    write_bytes(&output, &to_json(&artifact))
}

fn rounded(mut e: Evaluation) -> Evaluation {
    let r = |x: &mut Option<f64>| *x = x.map(round_g9);
    r(&mut e.accuracy);
    r(&mut e.probability_bands.correct_at_least_0_9);
    for m in e.per_class.values_mut() {
        r(&mut m.precision);
        r(&mut m.recall);
    }
    e
}

fn cmd_synth(cfg: &RunConfig, args: SynthArgs) -> Result<()> {
    let output = output_path(args.output, cfg)?;
    let spec = SynthSpec {
        per_class: args.per_class,
        length: args.length,
        burst_len: args.burst_len,
        burst_amplitude: args.amplitude,
        seed: cfg.seed.unwrap_or(0),
        ..SynthSpec::default()
    };
    if spec.burst_len == 0 || spec.burst_len > spec.length {
        return Err(CliError::mismatch("burst length must be in [1, length]"));
    }
    let data = detection_dataset(&spec);
    let bytes = dataset_csv(&data);
    let spec_sha = sha256_hex(&serde_json::to_vec(&spec).expect("spec serializes"));
    let meta = csv_meta("dataset", cfg, spec_sha, &bytes, data.len());
    write_csv_with_meta(&output, &bytes, meta)
}
