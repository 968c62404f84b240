//! `polarss`: command-line front end for stopping-set analysis, code
//! construction, decoding and FER experiments.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use polar_stopping::concat::{
    ga_augmented, ga_local_global, ConcatSpec, InterleaverPreset, StoppingBackend,
};
use polar_stopping::decoding::{
    augmented_bec_peel, augmented_bp_decode, bec_peel, bp_decode, global_decode, CheckRule,
    Schedule,
};
use polar_stopping::graph::FactorGraph;
use polar_stopping::nde::{augmented_nde, local_global_nde, NdeConfig};
use polar_stopping::polar::{construct_bec, construct_ga, encode, CodeSpec};
use polar_stopping::sim::{
    emit_results, fer_sweep, load_schemes, opss_pair, run_bounds_sweep, run_box_plot,
    write_atomic, write_csv, ExperimentConfig, OutputFormat, Scheme,
};
use polar_stopping::stopping::mvss_exact_or_bounds;

#[derive(Parser, Debug)]
#[command(name = "polarss", version, about = "Polar-code stopping sets, construction and BP simulation")]
struct Cli {
    /// Experiment or parameter file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the seed in the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file (default: standard output where applicable).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a polar code and write its spec.
    BuildCode(BuildCodeArgs),
    /// All bounds on the minimum VSS size of one index set.
    Bounds(BoundsArgs),
    /// Bound table over a sweep of K (experiment file of kind `bounds_sweep`).
    BoundsSweep,
    /// Randomized deletion bound spread (experiment file of kind `box_plot`).
    BoxPlot,
    /// Construct a concatenated code and write its spec.
    BuildConcat(BuildConcatArgs),
    /// Redesign the outer code of a concatenated spec by stopping-set swapping.
    Opss(OpssArgs),
    /// Redesign the outer code of a concatenated spec by empirical density evolution.
    Nde(NdeArgs),
    /// Encode information bits.
    Encode(EncodeArgs),
    /// Decode channel observations.
    Decode(DecodeArgs),
    /// FER simulation (experiment file of kind `fer_sweep` or `opss_compare`).
    Simulate(SimulateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Method {
    Bec,
    Ga,
}

#[derive(Args, Debug)]
struct BuildCodeArgs {
    /// Code order (length 2^n).
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, value_enum, default_value = "ga")]
    method: Method,
    /// Erasure probability for the BEC construction.
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Design Eb/N0 in dB for the GA construction.
    #[arg(long, default_value_t = 3.0)]
    ebno: f64,
    /// Design rate for the GA construction (default K/N).
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Code order.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated u-indices.
    #[arg(long, value_delimiter = ',')]
    set: Vec<usize>,
    /// Use the information set of this code spec instead of `--set`.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Randomized deletion trials.
    #[arg(long, default_value_t = 10)]
    trials: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Architecture {
    Augmented,
    LocalGlobal,
}

#[derive(Args, Debug)]
struct BuildConcatArgs {
    #[arg(long, value_enum)]
    architecture: Architecture,
    /// Inner code order.
    #[arg(long)]
    inner_n: usize,
    /// Outer code order.
    #[arg(long)]
    outer_n: usize,
    /// Good channels per inner code.
    #[arg(long)]
    good: usize,
    /// Outer information length (augmented only; local-global uses rate 1/2).
    #[arg(long)]
    outer_k: Option<usize>,
    /// Design Eb/N0 in dB.
    #[arg(long, default_value_t = 3.0)]
    ebno: f64,
    /// Random interleaver seed (default: natural order).
    #[arg(long)]
    interleaver_seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BackendKind {
    DeletionI,
    DeletionIi,
    Best,
}

#[derive(Args, Debug)]
struct OpssArgs {
    /// Concatenated spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Number of swaps.
    #[arg(long)]
    swaps: usize,
    #[arg(long, value_enum, default_value = "best")]
    backend: BackendKind,
    #[arg(long, default_value_t = 10)]
    trials: usize,
}

#[derive(Args, Debug)]
struct NdeArgs {
    /// Concatenated spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Sampling Eb/N0 in dB.
    #[arg(long)]
    ebno: f64,
    /// Inner BP iterations before sampling.
    #[arg(long, default_value_t = 4)]
    ite: usize,
    /// Sampled frames.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Use min-sum instead of sum-product in the inner decoder.
    #[arg(long)]
    min_sum: bool,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    /// Code or concatenated spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Information bits as a 0/1 string (local-global: outer bits then inner bits).
    #[arg(long)]
    info: String,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// Code or concatenated spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Whitespace-separated channel LLRs (local-global: blocks concatenated).
    #[arg(long, conflicts_with = "erasures")]
    llr: Option<PathBuf>,
    /// Erasure-channel output as a string over {0,1,?}.
    #[arg(long)]
    erasures: Option<String>,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(long)]
    min_sum: bool,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Also write a gnuplot data file next to the CSV.
    #[arg(long)]
    gnuplot: bool,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match &cli.command {
        Command::BuildCode(a) => build_code(&cli, a),
        Command::Bounds(a) => bounds(&cli, a),
        Command::BoundsSweep => bounds_sweep(&cli),
        Command::BoxPlot => box_plot(&cli),
        Command::BuildConcat(a) => build_concat(&cli, a),
        Command::Opss(a) => opss(&cli, a),
        Command::Nde(a) => nde(&cli, a),
        Command::Encode(a) => encode_cmd(&cli, a),
        Command::Decode(a) => decode_cmd(&cli, a),
        Command::Simulate(a) => simulate(&cli, a),
    }
}

/// Writes to `--out` atomically, or to standard output.
fn output(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => write_atomic(path, text.as_bytes())
            .with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn required_out(cli: &Cli) -> Result<&Path> {
    cli.out
        .as_deref()
        .ok_or_else(|| anyhow!("this command needs --out <path>"))
}

fn experiment(cli: &Cli) -> Result<(ExperimentConfig, PathBuf)> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| anyhow!("this command needs --config <path>"))?;
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((cfg, base))
}

fn build_code(cli: &Cli, a: &BuildCodeArgs) -> Result<()> {
    let spec = match a.method {
        Method::Bec => construct_bec(a.n, a.k, a.eps)?,
        Method::Ga => {
            let rate = a.rate.unwrap_or(a.k as f64 / (1usize << a.n) as f64);
            construct_ga(a.n, a.k, a.ebno, rate)?
        }
    };
    output(cli, &spec.to_toml())
}

fn bounds(cli: &Cli, a: &BoundsArgs) -> Result<()> {
    let (n, set) = match &a.spec {
        Some(path) => {
            let spec = CodeSpec::load(path)?;
            (spec.order(), spec.info_set().to_vec())
        }
        None => (
            a.n.ok_or_else(|| anyhow!("give --n and --set, or --spec"))?,
            a.set.clone(),
        ),
    };
    let g = FactorGraph::new(n)?;
    let r = mvss_exact_or_bounds(&g, &set, a.trials, cli.seed.unwrap_or(0))?;
    let fmt_opt = |v: Option<usize>| v.map_or_else(|| "-".to_string(), |v| v.to_string());
    let mut text = String::new();
    writeln!(text, "set      {:?}", r.set)?;
    writeln!(text, "lb1      {}", r.lb1)?;
    writeln!(text, "lb2      {}", r.lb2)?;
    writeln!(text, "encoding {}", r.enc_ub)?;
    writeln!(text, "del1     {}", r.del1_ub)?;
    writeln!(text, "del2     {}", r.del2_ub)?;
    writeln!(text, "exact    {}", fmt_opt(r.exact))?;
    if let Some(m) = r.exact_method {
        writeln!(text, "method   {m}")?;
    }
    if let Some(w) = &r.witness {
        writeln!(text, "witness  {w:?}")?;
    }
    output(cli, &text)
}

fn bounds_sweep(cli: &Cli) -> Result<()> {
    let (cfg, _) = experiment(cli)?;
    let ExperimentConfig::BoundsSweep(cfg) = cfg else {
        bail!("config kind must be bounds_sweep");
    };
    let rows = run_bounds_sweep(&cfg)?;
    write_csv(&rows, required_out(cli)?)?;
    Ok(())
}

fn box_plot(cli: &Cli) -> Result<()> {
    let (cfg, _) = experiment(cli)?;
    let ExperimentConfig::BoxPlot(cfg) = cfg else {
        bail!("config kind must be box_plot");
    };
    let rows = run_box_plot(&cfg)?;
    write_csv(&rows, required_out(cli)?)?;
    Ok(())
}

fn build_concat(cli: &Cli, a: &BuildConcatArgs) -> Result<()> {
    let preset = match a.interleaver_seed {
        Some(seed) => InterleaverPreset::Random { seed },
        None => InterleaverPreset::Natural,
    };
    let spec = match a.architecture {
        Architecture::Augmented => {
            let k0 = a
                .outer_k
                .ok_or_else(|| anyhow!("augmented codes need --outer-k"))?;
            ConcatSpec::Augmented(ga_augmented(
                a.inner_n, a.good, a.outer_n, k0, a.ebno, preset,
            )?)
        }
        Architecture::LocalGlobal => {
            let presets = match preset {
                InterleaverPreset::Natural => vec![preset; 2],
                InterleaverPreset::Random { seed } => (0..2)
                    .map(|b| InterleaverPreset::Random { seed: seed + b })
                    .collect(),
            };
            ConcatSpec::LocalGlobal(ga_local_global(
                a.inner_n, a.outer_n, a.good, a.ebno, &presets,
            )?)
        }
    };
    output(cli, &spec.to_toml())
}

fn load_concat(path: &Path) -> Result<Scheme> {
    match Scheme::load(path)? {
        Scheme::Plain(_) => bail!("{} is not a concatenated spec", path.display()),
        s => Ok(s),
    }
}

fn scheme_toml(s: &Scheme) -> String {
    match s {
        Scheme::Plain(c) => c.to_toml(),
        Scheme::Augmented(a) => ConcatSpec::Augmented(a.clone()).to_toml(),
        Scheme::LocalGlobal(l) => ConcatSpec::LocalGlobal(l.clone()).to_toml(),
    }
}

fn opss(cli: &Cli, a: &OpssArgs) -> Result<()> {
    let seed = cli.seed.unwrap_or(0);
    let backend = match a.backend {
        BackendKind::DeletionI => StoppingBackend::DeletionI,
        BackendKind::DeletionIi => StoppingBackend::DeletionII {
            trials: a.trials,
            seed,
        },
        BackendKind::Best => StoppingBackend::Best {
            trials: a.trials,
            seed,
        },
    };
    let pair = opss_pair(load_concat(&a.spec)?, a.swaps, backend)?;
    output(cli, &scheme_toml(&pair[1].1))
}

fn rule(min_sum: bool) -> CheckRule {
    if min_sum {
        CheckRule::min_sum()
    } else {
        CheckRule::SumProduct
    }
}

fn nde(cli: &Cli, a: &NdeArgs) -> Result<()> {
    let cfg = NdeConfig {
        ebno_db: a.ebno,
        iterations: a.ite,
        samples: a.samples,
        seed: cli.seed.unwrap_or(0),
        rule: rule(a.min_sum),
    };
    let redesigned = match load_concat(&a.spec)? {
        Scheme::Augmented(spec) => {
            let info = augmented_nde(&spec, &cfg)?.info_set;
            Scheme::Augmented(spec.with_outer(spec.outer().with_info_set(&info)?)?)
        }
        Scheme::LocalGlobal(spec) => {
            let info = local_global_nde(&spec, &cfg)?.info_set;
            Scheme::LocalGlobal(spec.with_outer(spec.outer().with_info_set(&info)?)?)
        }
        Scheme::Plain(_) => unreachable!("load_concat rejects plain specs"),
    };
    output(cli, &scheme_toml(&redesigned))
}

fn parse_bits(text: &str) -> Result<Vec<bool>> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(anyhow!("unexpected bit character {other:?}")),
        })
        .collect()
}

fn bits(v: &[bool]) -> String {
    let mut s: String = v.iter().map(|&b| if b { '1' } else { '0' }).collect();
    s.push('\n');
    s
}

fn encode_cmd(cli: &Cli, a: &EncodeArgs) -> Result<()> {
    let info = parse_bits(&a.info)?;
    let text = match Scheme::load(&a.spec)? {
        Scheme::Plain(spec) => bits(&encode(&spec, &spec.embed(&info)?)?),
        Scheme::Augmented(spec) => bits(&spec.encode(&info)?),
        Scheme::LocalGlobal(spec) => {
            let k = spec.outer().k();
            if info.len() < k {
                bail!("need {} bits, got {}", k + spec.global_info_len(), info.len());
            }
            let (ia, ib) = info.split_at(k);
            spec.encode(ia, ib)?.iter().map(|x| bits(x)).collect()
        }
    };
    output(cli, &text)
}

fn decode_cmd(cli: &Cli, a: &DecodeArgs) -> Result<()> {
    let scheme = Scheme::load(&a.spec)?;
    let result = match (&a.llr, &a.erasures) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let llr = text
                .split_whitespace()
                .map(|t| t.parse::<f32>().with_context(|| format!("bad LLR {t:?}")))
                .collect::<Result<Vec<_>>>()?;
            let r = rule(a.min_sum);
            match &scheme {
                Scheme::Plain(spec) => bp_decode(spec, &llr, a.max_iter, r)?,
                Scheme::Augmented(spec) => {
                    augmented_bp_decode(spec, &llr, a.max_iter, Schedule::RoundRobin, r)?
                }
                Scheme::LocalGlobal(spec) => {
                    let blocks: Vec<Vec<f32>> =
                        llr.chunks(spec.inner_len()).map(<[f32]>::to_vec).collect();
                    global_decode(spec, &blocks, a.max_iter, Schedule::RoundRobin, r)?
                }
            }
        }
        (None, Some(text)) => {
            let obs = text
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(|c| match c {
                    '0' => Ok(Some(false)),
                    '1' => Ok(Some(true)),
                    '?' => Ok(None),
                    other => Err(anyhow!("unexpected symbol {other:?}")),
                })
                .collect::<Result<Vec<_>>>()?;
            match &scheme {
                Scheme::Plain(spec) => bec_peel(spec, &obs)?,
                Scheme::Augmented(spec) => augmented_bec_peel(spec, &obs)?,
                Scheme::LocalGlobal(_) => bail!("erasure decoding of local-global codes is not supported"),
            }
        }
        (None, None) => bail!("give --llr <file> or --erasures <string>"),
    };
    let mut text = bits(&result.info);
    if !result.unresolved.is_empty() {
        writeln!(text, "unresolved {:?}", result.unresolved)?;
    }
    if !result.converged {
        text.push_str("not converged\n");
    }
    output(cli, &text)
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> Result<()> {
    let (cfg, base) = experiment(cli)?;
    let out = required_out(cli)?;
    let rows = match cfg {
        ExperimentConfig::FerSweep(c) => {
            let schemes = load_schemes(&c, &base)?;
            fer_sweep(&schemes, &c.channel, c.stop, &c.decoder, c.seed, c.timing)?
        }
        ExperimentConfig::OpssCompare(c) => {
            let scheme = load_concat(&base.join(&c.spec))?;
            let schemes = opss_pair(scheme, c.swaps, c.backend)?;
            fer_sweep(&schemes, &c.channel, c.stop, &c.decoder, c.seed, c.timing)?
        }
        _ => bail!("config kind must be fer_sweep or opss_compare"),
    };
    let format = if a.gnuplot {
        OutputFormat::CsvAndGnuplot
    } else {
        OutputFormat::Csv
    };
    emit_results(&rows, out, format)?;
    Ok(())
}
