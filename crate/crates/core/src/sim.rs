//! Monte Carlo experiments: channel simulation, FER sweeps with Wilson
//! intervals, bound sweeps, randomized-deletion spread studies and result files.
//!
//! Every random draw comes from a counter-based stream keyed by
//! `(seed, scheme, point, frame)`, so results do not depend on the thread
//! count. Frames are evaluated in parallel batches and accounted for
//! sequentially in frame order.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::concat::{AugmentedSpec, ConcatSpec, LocalGlobalSpec};
use crate::decoding::{
    augmented_bec_peel, augmented_bp_decode, bec_peel, bp_decode, global_decode, local_decode,
    CheckRule, Schedule,
};
use crate::error::{Error, Result};
use crate::graph::FactorGraph;
use crate::polar::{awgn_sigma, construct_bec, construct_ga, encode, CodeSpec};
use crate::rng;
use crate::stopping::{deletion_bound_ii, mvss_exact_or_bounds};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_964;

/// Wilson score interval for `errors` out of `frames` at the given quantile.
pub fn wilson_interval(errors: u64, frames: u64, z: f64) -> (f64, f64) {
    if frames == 0 {
        return (0.0, 1.0);
    }
    let n = frames as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// A code under simulation.
#[derive(Clone, Debug, PartialEq)]
pub enum Scheme {
    Plain(CodeSpec),
    Augmented(AugmentedSpec),
    LocalGlobal(LocalGlobalSpec),
}

impl Scheme {
    /// Reads a code spec or concatenated spec file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read(path)?;
        let table: toml::Table =
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let with_path = |e: Error| Error::Parse(format!("{}: {e}", path.display()));
        if table.contains_key("architecture") {
            Ok(match ConcatSpec::from_toml(&text).map_err(with_path)? {
                ConcatSpec::Augmented(s) => Scheme::Augmented(s),
                ConcatSpec::LocalGlobal(s) => Scheme::LocalGlobal(s),
            })
        } else {
            Ok(Scheme::Plain(CodeSpec::from_toml(&text).map_err(with_path)?))
        }
    }

    pub fn rate(&self) -> f64 {
        match self {
            Scheme::Plain(s) => s.rate(),
            Scheme::Augmented(s) => s.rate(),
            Scheme::LocalGlobal(s) => s.rate(),
        }
    }

    /// Names of the error metrics reported per frame.
    pub fn metrics(&self) -> Vec<String> {
        match self {
            Scheme::Plain(_) | Scheme::Augmented(_) => vec!["fer".into()],
            Scheme::LocalGlobal(s) => (0..s.num_blocks())
                .map(|b| format!("local{b}"))
                .chain(std::iter::once("global".into()))
                .collect(),
        }
    }
}

/// A channel at one operating point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Channel {
    Bec { eps: f64 },
    Awgn { ebno_db: f64 },
}

/// Operating points of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelSweep {
    Bec { eps: Vec<f64> },
    Awgn { ebno_db: Vec<f64> },
}

impl ChannelSweep {
    pub fn points(&self) -> Vec<Channel> {
        match self {
            ChannelSweep::Bec { eps } => eps.iter().map(|&eps| Channel::Bec { eps }).collect(),
            ChannelSweep::Awgn { ebno_db } => ebno_db
                .iter()
                .map(|&ebno_db| Channel::Awgn { ebno_db })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let (len, ok) = match self {
            ChannelSweep::Bec { eps } => (eps.len(), eps.iter().all(|e| (0.0..=1.0).contains(e))),
            ChannelSweep::Awgn { ebno_db } => (ebno_db.len(), ebno_db.iter().all(|e| e.is_finite())),
        };
        if len == 0 {
            return Err(Error::InvalidParameter("channel sweep is empty".into()));
        }
        if !ok {
            return Err(Error::InvalidParameter("channel parameter out of range".into()));
        }
        Ok(())
    }
}

/// BP decoder settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderConfig {
    pub max_iter: usize,
    pub rule: CheckRule,
    pub schedule: Schedule,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            max_iter: 100,
            rule: CheckRule::SumProduct,
            schedule: Schedule::RoundRobin,
        }
    }
}

/// When to stop simulating a point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StopRule {
    pub max_frames: u64,
    /// Stop once every metric has this many frame errors; 0 runs `max_frames`.
    pub target_errors: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self {
            max_frames: 1_000_000,
            target_errors: 100,
        }
    }
}

const BATCH: u64 = 512;

/// Runs frames `0, 1, ...` through `frame` (which returns one error flag per
/// metric) until every metric reached `target_errors` or `max_frames` were
/// run. Returns the number of frames run and the error count per metric.
pub fn run_point<F>(metrics: usize, stop: StopRule, frame: F) -> Result<(u64, Vec<u64>)>
where
    F: Fn(u64) -> Result<Vec<bool>> + Sync,
{
    if stop.max_frames == 0 {
        return Err(Error::InvalidParameter("max_frames must be at least 1".into()));
    }
    let mut errors = vec![0u64; metrics];
    let mut frames = 0u64;
    let done = |errors: &[u64]| stop.target_errors > 0 && errors.iter().all(|&e| e >= stop.target_errors);
    while frames < stop.max_frames && !done(&errors) {
        let end = (frames + BATCH).min(stop.max_frames);
        let outcomes: Vec<Vec<bool>> = (frames..end)
            .into_par_iter()
            .map(&frame)
            .collect::<Result<_>>()?;
        for flags in outcomes {
            for (e, &bad) in errors.iter_mut().zip(&flags) {
                *e += u64::from(bad);
            }
            frames += 1;
            if done(&errors) {
                break;
            }
        }
    }
    Ok((frames, errors))
}

fn random_bits(rng: &mut ChaCha8Rng, len: usize) -> Vec<bool> {
    (0..len).map(|_| rng.random::<bool>()).collect()
}

fn awgn_llr(x: &[bool], sigma: f64, rng: &mut ChaCha8Rng) -> Vec<f32> {
    x.iter()
        .map(|&bit| {
            let z: f64 = rng.sample(StandardNormal);
            let y = if bit { -1.0 } else { 1.0 } + sigma * z;
            (2.0 * y / (sigma * sigma)) as f32
        })
        .collect()
}

fn erase(x: &[bool], eps: f64, rng: &mut ChaCha8Rng) -> Vec<Option<bool>> {
    x.iter()
        .map(|&bit| (rng.random::<f64>() >= eps).then_some(bit))
        .collect()
}

/// Transmits one random frame and returns an error flag per metric.
pub fn simulate_frame(
    scheme: &Scheme,
    channel: Channel,
    decoder: &DecoderConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<bool>> {
    let sigma = |ebno_db: f64| awgn_sigma(ebno_db, scheme.rate());
    match scheme {
        Scheme::Plain(spec) => {
            let info = random_bits(rng, spec.k());
            let x = encode(spec, &spec.embed(&info)?)?;
            let decoded = match channel {
                Channel::Bec { eps } => {
                    let r = bec_peel(spec, &erase(&x, eps, rng))?;
                    if !r.unresolved.is_empty() {
                        return Ok(vec![true]);
                    }
                    r.info
                }
                Channel::Awgn { ebno_db } => {
                    let llr = awgn_llr(&x, sigma(ebno_db), rng);
                    bp_decode(spec, &llr, decoder.max_iter, decoder.rule)?.info
                }
            };
            Ok(vec![decoded != info])
        }
        Scheme::Augmented(spec) => {
            let info = random_bits(rng, spec.info_len());
            let x = spec.encode(&info)?;
            let decoded = match channel {
                Channel::Bec { eps } => {
                    let r = augmented_bec_peel(spec, &erase(&x, eps, rng))?;
                    if !r.unresolved.is_empty() {
                        return Ok(vec![true]);
                    }
                    r.info
                }
                Channel::Awgn { ebno_db } => {
                    let llr = awgn_llr(&x, sigma(ebno_db), rng);
                    augmented_bp_decode(spec, &llr, decoder.max_iter, decoder.schedule, decoder.rule)?
                        .info
                }
            };
            Ok(vec![decoded != info])
        }
        Scheme::LocalGlobal(spec) => {
            let Channel::Awgn { ebno_db } = channel else {
                return Err(Error::UnsupportedRegime(
                    "local-global codes are simulated on the AWGN channel only".into(),
                ));
            };
            let info_a = random_bits(rng, spec.outer().k());
            let info_b = random_bits(rng, spec.global_info_len());
            let us = spec.inner_us(&info_a, &info_b)?;
            let s = sigma(ebno_db);
            let llrs: Vec<Vec<f32>> = us
                .iter()
                .map(|u| {
                    let mut x = u.clone();
                    crate::polar::encode_in_place(&mut x);
                    awgn_llr(&x, s, rng)
                })
                .collect();
            let mut flags = Vec::with_capacity(spec.num_blocks() + 1);
            for (b, (u, llr)) in us.iter().zip(&llrs).enumerate() {
                let block = &spec.blocks()[b];
                let mut expected: Vec<bool> = spec
                    .block_info(b)
                    .iter()
                    .map(|&k| u[spec.wiring()[k].1])
                    .collect();
                expected.extend(block.good.iter().map(|&p| u[p]));
                let r = local_decode(spec, b, llr, decoder.max_iter, decoder.rule)?;
                flags.push(r.info != expected);
            }
            let r = global_decode(spec, &llrs, decoder.max_iter, decoder.schedule, decoder.rule)?;
            let mut expected = info_a;
            expected.extend(info_b);
            flags.push(r.info != expected);
            Ok(flags)
        }
    }
}

/// One line of a FER table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub label: String,
    /// Erasure probability or Eb/N0 in dB.
    pub param: f64,
    pub frames: u64,
    pub errors: u64,
    pub fer: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seconds: f64,
}

impl ResultRow {
    pub fn new(label: String, param: f64, frames: u64, errors: u64, seconds: f64) -> Self {
        let (ci_low, ci_high) = wilson_interval(errors, frames, Z95);
        let fer = if frames == 0 {
            0.0
        } else {
            errors as f64 / frames as f64
        };
        Self {
            label,
            param,
            frames,
            errors,
            fer,
            ci_low,
            ci_high,
            seconds,
        }
    }
}

/// FER sweep of several schemes over a channel sweep. Row labels are the
/// scheme label, suffixed with `/metric` when a scheme reports several metrics.
/// `seconds` is recorded only when `timing` is set, so output files stay
/// reproducible by default.
pub fn fer_sweep(
    schemes: &[(String, Scheme)],
    channel: &ChannelSweep,
    stop: StopRule,
    decoder: &DecoderConfig,
    seed: u64,
    timing: bool,
) -> Result<Vec<ResultRow>> {
    channel.validate()?;
    let mut rows = Vec::new();
    for (s_idx, (label, scheme)) in schemes.iter().enumerate() {
        let metrics = scheme.metrics();
        for (p_idx, point) in channel.points().into_iter().enumerate() {
            let clock = Instant::now();
            let (frames, errors) = run_point(metrics.len(), stop, |f| {
                let mut rng = rng::stream(seed, &[s_idx as u64, p_idx as u64, f]);
                simulate_frame(scheme, point, decoder, &mut rng)
            })?;
            let seconds = if timing {
                clock.elapsed().as_secs_f64()
            } else {
                0.0
            };
            let param = match point {
                Channel::Bec { eps } => eps,
                Channel::Awgn { ebno_db } => ebno_db,
            };
            for (m, &e) in metrics.iter().zip(&errors) {
                let name = if metrics.len() == 1 {
                    label.clone()
                } else {
                    format!("{label}/{m}")
                };
                rows.push(ResultRow::new(name, param, frames, e, seconds));
            }
        }
    }
    Ok(rows)
}

/// How the index sets of a bound sweep are produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SetSource {
    /// Information set of a GA-constructed code at `ebno_db` and rate `K / N`.
    PolarConstructed { ebno_db: f64 },
    /// Information set of a BEC-constructed code.
    PolarBec { eps: f64 },
    /// Uniformly random `K`-subsets, `samples` per `K`.
    Random { samples: usize },
}

/// Parameters of a bound sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsSweepConfig {
    pub n: usize,
    pub ks: Vec<usize>,
    pub source: SetSource,
    /// Trials of the randomized deletion bound.
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub timing: bool,
}

fn default_trials() -> usize {
    10
}

/// One line of a bound sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub n: usize,
    pub k: usize,
    pub sample: usize,
    pub lb1: usize,
    pub lb2: usize,
    pub enc: usize,
    pub del1: usize,
    pub del2: usize,
    pub exact: Option<usize>,
    pub method: Option<String>,
    pub seconds: f64,
}

/// Index sets of a sweep, keyed by `(k, sample)`.
pub fn sweep_sets(cfg: &BoundsSweepConfig) -> Result<Vec<(usize, usize, Vec<usize>)>> {
    let len = 1usize << cfg.n;
    let mut out = Vec::new();
    for &k in &cfg.ks {
        if k == 0 || k > len {
            return Err(Error::InvalidParameter(format!("K = {k} outside 1..={len}")));
        }
        match cfg.source {
            SetSource::PolarConstructed { ebno_db } => {
                let spec = construct_ga(cfg.n, k, ebno_db, k as f64 / len as f64)?;
                out.push((k, 0, spec.info_set().to_vec()));
            }
            SetSource::PolarBec { eps } => {
                let spec = construct_bec(cfg.n, k, eps)?;
                out.push((k, 0, spec.info_set().to_vec()));
            }
            SetSource::Random { samples } => {
                for s in 0..samples {
                    let mut rng = rng::stream(cfg.seed, &[k as u64, s as u64, 0]);
                    let mut set = sample(&mut rng, len, k).into_vec();
                    set.sort_unstable();
                    out.push((k, s, set));
                }
            }
        }
    }
    Ok(out)
}

/// Every bound (and the exact value where available) for each set of the sweep.
pub fn run_bounds_sweep(cfg: &BoundsSweepConfig) -> Result<Vec<BoundRow>> {
    let g = FactorGraph::new(cfg.n)?;
    sweep_sets(cfg)?
        .into_iter()
        .map(|(k, s, set)| {
            let clock = Instant::now();
            let seed = rng::derive(cfg.seed, &[k as u64, s as u64, 1]);
            let r = mvss_exact_or_bounds(&g, &set, cfg.trials, seed)?;
            Ok(BoundRow {
                n: cfg.n,
                k,
                sample: s,
                lb1: r.lb1,
                lb2: r.lb2,
                enc: r.enc_ub,
                del1: r.del1_ub,
                del2: r.del2_ub,
                exact: r.exact,
                method: r.exact_method.map(|m| m.to_string()),
                seconds: if cfg.timing {
                    clock.elapsed().as_secs_f64()
                } else {
                    0.0
                },
            })
        })
        .collect()
}

/// Parameters of a randomized-deletion spread study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxPlotConfig {
    pub n: usize,
    pub ks: Vec<usize>,
    /// GA design point of the information sets.
    #[serde(default = "default_design")]
    pub ebno_db: f64,
    /// Independent runs per `K`.
    pub runs: usize,
    /// Deletion trials inside each run.
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
}

fn default_design() -> f64 {
    3.0
}

/// One run of a spread study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxRow {
    pub k: usize,
    pub run: usize,
    pub value: usize,
}

/// Runs the randomized deletion bound `runs` times per `K`, each with its own seed.
pub fn run_box_plot(cfg: &BoxPlotConfig) -> Result<Vec<BoxRow>> {
    if cfg.runs == 0 || cfg.trials == 0 {
        return Err(Error::InvalidParameter("runs and trials must be at least 1".into()));
    }
    let g = FactorGraph::new(cfg.n)?;
    let len = 1usize << cfg.n;
    let mut rows = Vec::new();
    for &k in &cfg.ks {
        let spec = construct_ga(cfg.n, k, cfg.ebno_db, k as f64 / len as f64)?;
        for run in 0..cfg.runs {
            let seed = rng::derive(cfg.seed, &[k as u64, run as u64]);
            let r = deletion_bound_ii(&g, spec.info_set(), cfg.trials, seed)?;
            rows.push(BoxRow {
                k,
                run,
                value: r.best.size,
            });
        }
    }
    Ok(rows)
}

/// Output file layout.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum OutputFormat {
    #[default]
    Csv,
    /// CSV plus a whitespace-separated `.dat` file with one gnuplot index per label.
    CsvAndGnuplot,
}

/// Header of FER tables.
pub const RESULT_HEADER: &str = "label,param,frames,errors,fer,ci_low,ci_high,seconds";

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.flush().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

/// Serializes rows as CSV with a header line.
pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| Error::Parse(format!("CSV buffer: {e}")))
}

/// Writes any row type as CSV, atomically.
pub fn write_csv<T: Serialize>(rows: &[T], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    write_atomic(path, &to_csv(rows)?)
}

/// Reads rows written by [`write_csv`].
pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = read(path)?;
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes a FER table to `path`.
pub fn emit_results(rows: &[ResultRow], path: &Path, format: OutputFormat) -> Result<()> {
    write_csv(rows, path)?;
    if format == OutputFormat::CsvAndGnuplot {
        write_atomic(&path.with_extension("dat"), gnuplot_block(rows).as_bytes())?;
    }
    Ok(())
}

/// Gnuplot data: one index per label, columns `param fer ci_low ci_high`.
pub fn gnuplot_block(rows: &[ResultRow]) -> String {
    let mut labels: Vec<&str> = Vec::new();
    for r in rows {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    let mut out = String::new();
    for (i, label) in labels.iter().enumerate() {
        if i > 0 {
            out.push_str("\n\n");
        }
        out.push_str(&format!("# {label}\n# param fer ci_low ci_high\n"));
        for r in rows.iter().filter(|r| r.label == *label) {
            out.push_str(&format!("{} {} {} {}\n", r.param, r.fer, r.ci_low, r.ci_high));
        }
    }
    out
}

/// Reads a FER table.
pub fn read_results(path: &Path) -> Result<Vec<ResultRow>> {
    read_csv(path)
}

/// A code entry of a FER experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeEntry {
    pub label: String,
    /// Spec file, relative to the experiment file.
    pub spec: PathBuf,
}

/// FER experiment over one or more spec files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FerConfig {
    pub seed: u64,
    pub codes: Vec<CodeEntry>,
    pub channel: ChannelSweep,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub decoder: DecoderConfig,
    #[serde(default)]
    pub timing: bool,
}

/// Compares a concatenated code's outer design against an OPSS redesign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OpssCompareConfig {
    pub seed: u64,
    /// Concatenated spec file, relative to the experiment file.
    pub spec: PathBuf,
    /// Number of swaps.
    pub swaps: usize,
    pub backend: crate::concat::StoppingBackend,
    pub channel: ChannelSweep,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub decoder: DecoderConfig,
    #[serde(default)]
    pub timing: bool,
}

/// An experiment file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentConfig {
    BoundsSweep(BoundsSweepConfig),
    FerSweep(FerConfig),
    OpssCompare(OpssCompareConfig),
    BoxPlot(BoxPlotConfig),
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&read(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentConfig::BoundsSweep(c) => c.seed,
            ExperimentConfig::FerSweep(c) => c.seed,
            ExperimentConfig::OpssCompare(c) => c.seed,
            ExperimentConfig::BoxPlot(c) => c.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::BoundsSweep(c) => c.seed = seed,
            ExperimentConfig::FerSweep(c) => c.seed = seed,
            ExperimentConfig::OpssCompare(c) => c.seed = seed,
            ExperimentConfig::BoxPlot(c) => c.seed = seed,
        }
    }
}

/// Loads the schemes of a FER experiment, resolving paths against `base`.
pub fn load_schemes(cfg: &FerConfig, base: &Path) -> Result<Vec<(String, Scheme)>> {
    if cfg.codes.is_empty() {
        return Err(Error::InvalidParameter("no codes to simulate".into()));
    }
    cfg.codes
        .iter()
        .map(|c| Ok((c.label.clone(), Scheme::load(&base.join(&c.spec))?)))
        .collect()
}

/// Redesigns the outer code of a concatenated scheme with OPSS and returns
/// `[("de", original), ("opss", redesigned)]`.
pub fn opss_pair(scheme: Scheme, swaps: usize, backend: crate::concat::StoppingBackend) -> Result<Vec<(String, Scheme)>> {
    use crate::concat::{augmented_d_values, local_global_d_values, opss_construct, opss_construct_grouped};
    let redesigned = match &scheme {
        Scheme::Plain(_) => {
            return Err(Error::UnsupportedRegime(
                "OPSS applies to concatenated codes only".into(),
            ))
        }
        Scheme::Augmented(spec) => {
            let d = augmented_d_values(spec, backend)?;
            let outer = spec.outer();
            let info = opss_construct(outer.reliability_order(), &d, swaps, outer.k())?;
            Scheme::Augmented(spec.with_outer(outer.with_info_set(&info)?)?)
        }
        Scheme::LocalGlobal(spec) => {
            let d = local_global_d_values(spec, backend)?;
            let outer = spec.outer();
            let info = opss_construct_grouped(
                outer.reliability_order(),
                &d,
                swaps,
                outer.k(),
                &spec.block_of(),
            )?;
            Scheme::LocalGlobal(spec.with_outer(outer.with_info_set(&info)?)?)
        }
    };
    Ok(vec![("de".into(), scheme), ("opss".into(), redesigned)])
}
