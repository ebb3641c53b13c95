//! Subcommand implementations. Each writes its effective config as
//! `config.json` next to its outputs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use adatriplet::batching::sample_batch;
use adatriplet::dataset::{
    read_dataset_csv, read_embeddings_csv, split_by_subject, write_dataset_csv, write_embeddings_csv, EmbeddingRow,
    LabeledSample,
};
use adatriplet::losses::{surface_grid, write_surface_csv};
use adatriplet::metrics::{
    evaluate_by_year, format_report_table, write_report_csv, GalleryItem, Query, YearGroup, YearReport,
};
use adatriplet::rng::{stream_rng, Stream};
use adatriplet::synth::generate;
use adatriplet::trainer::{
    batch_margins, finite_diff_report, train, write_histogram_csv, write_history_csv, write_margin_trace_csv,
    BatchForward, EncoderMode, EncoderParams, GradCheckReport, TrainOutput, KINK_CLEARANCE,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, SweepParameter};
use crate::error::CliError;

/// Gradient checks fail at or above this relative error.
pub const GRADCHECK_TOLERANCE: f64 = 1e-5;
const GRADCHECK_MAX_TRIES: usize = 1000;

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn prepare_out_dir(dir: &Path, cfg: &ExperimentConfig) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.json"), cfg.to_json())?;
    Ok(())
}

fn load_dataset(cfg: &ExperimentConfig) -> Result<Vec<LabeledSample>, CliError> {
    match &cfg.dataset {
        Some(path) => Ok(read_dataset_csv(open(path)?)?),
        None => Ok(generate(&cfg.synth_config())?),
    }
}

fn open(path: &Path) -> Result<File, CliError> {
    File::open(path).map_err(|e| CliError::Config(format!("cannot open {}: {e}", path.display())))
}

pub fn cmd_synth(cfg: ExperimentConfig, out_dir: &Path) -> Result<PathBuf, CliError> {
    let cfg = cfg.resolve()?;
    let data = generate(&cfg.synth_config())?;
    prepare_out_dir(out_dir, &cfg)?;
    let path = out_dir.join("dataset.csv");
    write_dataset_csv(&data, create(out_dir, "dataset.csv")?)?;
    Ok(path)
}

/// Trains on the non-held-out subjects and embeds the full dataset.
fn train_and_embed(
    cfg: &ExperimentConfig,
    data: &[LabeledSample],
) -> Result<(TrainOutput, Vec<EmbeddingRow>), CliError> {
    let (train_set, _) = split_by_subject(data, cfg.holdout_fraction)?;
    let out = train(&train_set, &cfg.train_config()?)?;
    let embeddings = out.params.embed_all(data)?;
    Ok((out, embeddings))
}

pub fn cmd_train(cfg: ExperimentConfig, out_dir: &Path) -> Result<TrainOutput, CliError> {
    let cfg = cfg.resolve()?;
    cfg.check_holdout_encoder()?;
    let data = load_dataset(&cfg)?;
    let (out, embeddings) = train_and_embed(&cfg, &data)?;
    prepare_out_dir(out_dir, &cfg)?;
    write_dataset_csv(&data, create(out_dir, "dataset.csv")?)?;
    write_history_csv(&out.history, create(out_dir, "history.csv")?)?;
    write_histogram_csv(&out.history, |h| &h.delta_hist, create(out_dir, "delta_hist.csv")?)?;
    write_histogram_csv(&out.history, |h| &h.phi_an_hist, create(out_dir, "phi_an_hist.csv")?)?;
    write_margin_trace_csv(&out.trace, create(out_dir, "margins.csv")?)?;
    write_embeddings_csv(&embeddings, create(out_dir, "embeddings.csv")?)?;
    Ok(out)
}

/// Pairs embeddings with dataset rows (which must agree one-to-one) and
/// scores year-0 rows as gallery against later years. With a holdout
/// fraction only the held-out subjects are scored.
pub fn evaluate_embeddings(
    embeddings: &[EmbeddingRow],
    data: &[LabeledSample],
    holdout_fraction: f64,
) -> Result<YearReport, CliError> {
    if embeddings.len() != data.len() {
        return Err(CliError::Config(format!(
            "embeddings have {} rows but the dataset has {}",
            embeddings.len(),
            data.len()
        )));
    }
    for (i, (e, s)) in embeddings.iter().zip(data).enumerate() {
        if (e.subject_id, e.year) != (s.subject_id, s.year) {
            return Err(CliError::Config(format!(
                "row {i}: embedding labels ({}, {}) do not match dataset ({}, {})",
                e.subject_id, e.year, s.subject_id, s.year
            )));
        }
    }
    let scored: Vec<&EmbeddingRow> = if holdout_fraction > 0.0 {
        let (_, held) = split_by_subject(data, holdout_fraction)?;
        let ids: std::collections::BTreeSet<usize> = held.iter().map(|s| s.subject_id).collect();
        embeddings.iter().filter(|e| ids.contains(&e.subject_id)).collect()
    } else {
        embeddings.iter().collect()
    };
    let gallery: Vec<GalleryItem> = scored
        .iter()
        .filter(|e| e.year == 0)
        .map(|e| GalleryItem {
            embedding: e.embedding.clone(),
            subject: e.subject_id,
        })
        .collect();
    let queries: Vec<Query> = scored
        .iter()
        .filter(|e| e.year > 0)
        .map(|e| Query {
            embedding: e.embedding.clone(),
            subject: e.subject_id,
            year: e.year,
        })
        .collect();
    Ok(evaluate_by_year(&queries, &gallery)?)
}

#[derive(Serialize)]
struct ReportJson<'a> {
    /// How the `All` row aggregates: mean over every scored query.
    all_row: &'static str,
    excluded_queries: usize,
    rows: &'a [adatriplet::metrics::YearRow],
}

pub fn report_json(report: &YearReport) -> String {
    let doc = ReportJson {
        all_row: "pooled over queries",
        excluded_queries: report.excluded,
        rows: &report.rows,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn cmd_eval(cfg: ExperimentConfig, out_dir: &Path) -> Result<YearReport, CliError> {
    let cfg = cfg.resolve()?;
    let emb_path = cfg
        .embeddings
        .clone()
        .ok_or_else(|| CliError::Config("embeddings: path required for eval".into()))?;
    let data_path = cfg
        .dataset
        .clone()
        .ok_or_else(|| CliError::Config("dataset: path required for eval".into()))?;
    let embeddings = read_embeddings_csv(open(&emb_path)?)?;
    let data = read_dataset_csv(open(&data_path)?)?;
    let report = evaluate_embeddings(&embeddings, &data, cfg.holdout_fraction)?;
    prepare_out_dir(out_dir, &cfg)?;
    write_report_csv(&report, create(out_dir, "report.csv")?)?;
    fs::write(out_dir.join("report.json"), report_json(&report))?;
    Ok(report)
}

pub fn cmd_surface(cfg: ExperimentConfig, out_dir: &Path) -> Result<PathBuf, CliError> {
    let cfg = cfg.resolve_surface()?;
    let (loss, margins) = cfg.surface_params()?;
    let cells = surface_grid(loss, &margins, cfg.resolution)?;
    prepare_out_dir(out_dir, &cfg)?;
    write_surface_csv(&cells, create(out_dir, "surface.csv")?)?;
    Ok(out_dir.join("surface.csv"))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckRow {
    pub encoder: EncoderMode,
    pub batch: usize,
    pub report: GradCheckReport,
}

fn encoder_name(mode: EncoderMode) -> &'static str {
    match mode {
        EncoderMode::FreeEmbedding => "free_embedding",
        EncoderMode::Linear => "linear",
    }
}

/// Checks `gradcheck_batches` random batches for each encoder mode at
/// freshly initialized parameters. Batches whose hinges sit within
/// [`KINK_CLEARANCE`] of a boundary, or whose loss is zero, are redrawn.
pub fn run_gradcheck(cfg: &ExperimentConfig) -> Result<Vec<GradCheckRow>, CliError> {
    let data = load_dataset(cfg)?;
    let tc = cfg.train_config()?;
    let mut rows = Vec::new();
    for encoder in [EncoderMode::FreeEmbedding, EncoderMode::Linear] {
        let mut init = stream_rng(cfg.seed, Stream::Init);
        let params = EncoderParams::init(encoder, &data, cfg.embed_dim, &mut init)?;
        let mut rng = stream_rng(cfg.seed, Stream::GradCheck);
        let start = tc.initial_margins()?;
        for batch in 0..cfg.gradcheck_batches {
            let mut found = None;
            for _ in 0..GRADCHECK_MAX_TRIES {
                let plan = sample_batch(&data, cfg.gradcheck_batch_size, cfg.per_subject, &mut rng)?;
                let forward = BatchForward::new(&params, &data, &plan)?;
                let margins = batch_margins(&tc.margin_mode, &forward, start)?;
                if forward.kink_distance(&tc.loss, &margins) < KINK_CLEARANCE {
                    continue;
                }
                if forward.loss_and_embedding_grads(&tc.loss, &margins)?.0 > 0.0 {
                    found = Some((plan, margins));
                    break;
                }
            }
            let (plan, margins) = found.ok_or_else(|| {
                CliError::Verification(format!(
                    "no batch clear of hinge boundaries after {GRADCHECK_MAX_TRIES} draws"
                ))
            })?;
            let report = finite_diff_report(
                &params,
                &data,
                &plan,
                &tc.loss,
                &margins,
                cfg.gradcheck_h,
                cfg.gradcheck_corrupt,
            )?;
            rows.push(GradCheckRow { encoder, batch, report });
        }
    }
    Ok(rows)
}

/// Runs the check, writes `gradcheck.csv`, and fails verification when any
/// batch reaches [`GRADCHECK_TOLERANCE`].
pub fn cmd_gradcheck(cfg: ExperimentConfig, out_dir: &Path) -> Result<f64, CliError> {
    let cfg = cfg.resolve()?;
    let rows = run_gradcheck(&cfg)?;
    prepare_out_dir(out_dir, &cfg)?;
    let mut w = create(out_dir, "gradcheck.csv")?;
    writeln!(w, "encoder,batch,n_checked,max_rel_error,worst_index,analytic,numeric")?;
    for r in &rows {
        let g = &r.report;
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            encoder_name(r.encoder),
            r.batch,
            g.n_checked,
            g.max_rel_error,
            g.worst_index,
            g.analytic,
            g.numeric
        )?;
    }
    w.flush()?;
    let max = rows.iter().map(|r| r.report.max_rel_error).fold(0.0, f64::max);
    if max >= GRADCHECK_TOLERANCE {
        return Err(CliError::Verification(format!(
            "max relative error {max} >= {GRADCHECK_TOLERANCE}"
        )));
    }
    Ok(max)
}

/// Retrieval summary of one train-then-evaluate run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialMetrics {
    pub map: f64,
    pub map_at_r: f64,
    pub cmc1: f64,
    pub latest_year: Option<usize>,
    pub latest_map: Option<f64>,
}

/// Trains with `cfg` (already resolved) and evaluates the held-out subjects,
/// or every subject when nothing is held out.
pub fn run_trial(cfg: &ExperimentConfig) -> Result<TrialMetrics, CliError> {
    cfg.check_holdout_encoder()?;
    let data = load_dataset(cfg)?;
    let (_, embeddings) = train_and_embed(cfg, &data)?;
    let report = evaluate_embeddings(&embeddings, &data, cfg.holdout_fraction)?;
    let all = report.all();
    let latest = report
        .rows
        .iter()
        .filter_map(|r| match r.year {
            YearGroup::Year(y) => Some((y, r.map)),
            YearGroup::All => None,
        })
        .max_by_key(|&(y, _)| y);
    Ok(TrialMetrics {
        map: all.map.ok_or(adatriplet::Error::NoRelevantItems)?,
        map_at_r: all.map_at_r.ok_or(adatriplet::Error::NoRelevantItems)?,
        cmc1: all.cmc1.ok_or(adatriplet::Error::NoRelevantItems)?,
        latest_year: latest.map(|(y, _)| y),
        latest_map: latest.and_then(|(_, m)| m),
    })
}

/// Copy of `cfg` with the swept parameter set to `value`, re-resolved.
pub fn with_sweep_value(cfg: &ExperimentConfig, p: SweepParameter, value: f64) -> Result<ExperimentConfig, CliError> {
    let as_k = |v: f64| -> Result<u32, CliError> {
        if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
            Ok(v as u32)
        } else {
            Err(CliError::Config(format!(
                "sweep_values: {} is not a positive integer",
                v
            )))
        }
    };
    let mut c = cfg.clone();
    match p {
        SweepParameter::Epsilon => c.epsilon = Some(value),
        SweepParameter::Lambda => c.lambda = Some(value),
        SweepParameter::KDelta => c.k_delta = Some(as_k(value)?),
        SweepParameter::KAn => c.k_an = Some(as_k(value)?),
    }
    c.resolve()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub value: f64,
    pub seed: u64,
    pub metrics: TrialMetrics,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    v.iter().sum::<f64>() / v.len() as f64
}

/// Runs train+eval for every value over seeds `seed..seed + sweep_seeds`
/// (each seed drives both the synthetic data and training). Writes
/// `sweep.csv` with per-value means and `sweep_runs.csv` with every run.
pub fn cmd_sweep(cfg: ExperimentConfig, out_dir: &Path) -> Result<Vec<SweepRun>, CliError> {
    let cfg = cfg.resolve()?;
    let p = cfg
        .sweep_parameter
        .ok_or_else(|| CliError::Config("sweep_parameter: required for sweep".into()))?;
    if cfg.sweep_values.is_empty() {
        return Err(CliError::Config("sweep_values: at least one value required".into()));
    }
    let per_value: Vec<ExperimentConfig> = cfg
        .sweep_values
        .iter()
        .map(|&v| with_sweep_value(&cfg, p, v))
        .collect::<Result<_, _>>()?;
    let mut runs = Vec::new();
    for (&value, vc) in cfg.sweep_values.iter().zip(&per_value) {
        for k in 0..cfg.sweep_seeds as u64 {
            let seed = cfg.seed + k;
            let metrics = run_trial(&ExperimentConfig { seed, ..vc.clone() })?;
            runs.push(SweepRun { value, seed, metrics });
        }
    }

    prepare_out_dir(out_dir, &cfg)?;
    let mut w = create(out_dir, "sweep.csv")?;
    writeln!(w, "parameter,value,n_seeds,map,map_at_r,cmc1,latest_year_map")?;
    for &value in &cfg.sweep_values {
        let rs: Vec<&SweepRun> = runs.iter().filter(|r| r.value == value).collect();
        let latest: Option<Vec<f64>> = rs.iter().map(|r| r.metrics.latest_map).collect();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            p.name(),
            value,
            rs.len(),
            mean(rs.iter().map(|r| r.metrics.map)),
            mean(rs.iter().map(|r| r.metrics.map_at_r)),
            mean(rs.iter().map(|r| r.metrics.cmc1)),
            latest.map(|v| mean(v.into_iter()).to_string()).unwrap_or_default()
        )?;
    }
    w.flush()?;
    let mut w = create(out_dir, "sweep_runs.csv")?;
    writeln!(w, "parameter,value,seed,map,map_at_r,cmc1,latest_year,latest_year_map")?;
    for r in &runs {
        let m = &r.metrics;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.name(),
            r.value,
            r.seed,
            m.map,
            m.map_at_r,
            m.cmc1,
            m.latest_year.map(|y| y.to_string()).unwrap_or_default(),
            m.latest_map.map(|x| x.to_string()).unwrap_or_default()
        )?;
    }
    w.flush()?;
    Ok(runs)
}

pub fn print_report(report: &YearReport) {
    print!("{}", format_report_table(report));
}
