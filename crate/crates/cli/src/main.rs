use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use shrinkwave::io::{read_plm_csv, read_signal, write_plm_fit, write_signal};
use shrinkwave::montecarlo::{write_results_csv, BLOCK_METHODS, DEFAULT_SEED, STANDARD_METHODS};
use shrinkwave::{
    denoise, fit_plm, run_mc, BenchMethod, BlockConfig, BlockScheme, DenoiseConfig, FilterPair,
    McConfig, Method, MethodDefaults, PlmData, PlmLambda, PlmSigma, ShrinkageRule, SigmaPolicy,
    TestSignal, ThresholdPolicy,
};

#[derive(Parser)]
#[command(
    name = "shrinkwave",
    version,
    about = "Wavelet shrinkage denoising and related estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Denoise a signal whose length is a power of two.
    Denoise(DenoiseArgs),
    /// Fit y = Xβ + f(t) + noise with a wavelet-penalized f.
    Plm(PlmArgs),
    /// Monte Carlo comparison of denoisers on the standard test signals.
    Bench(BenchArgs),
}

#[derive(Args)]
struct DenoiseArgs {
    /// One number per line, or a single-column CSV (`.csv`) with an optional header.
    #[arg(long)]
    input: PathBuf,
    /// Written in the same layout as the input.
    #[arg(long)]
    output: PathBuf,
    /// `haar`, `dbN` (N vanishing moments) or `dN` (N taps).
    #[arg(long, default_value = "db4")]
    wavelet: String,
    /// A rule such as `soft`, `hard:2.5`, `firm:1,2`, `scad:1,3.7`, or a block
    /// rule: `block_js`, `neigh_block`, `neigh_coeff`.
    #[arg(long, default_value = "soft")]
    rule: String,
    /// `universal` or a fixed value. Defaults to the threshold written in
    /// `--rule` when there is one, otherwise `universal`.
    #[arg(long, value_parser = parse_threshold)]
    threshold: Option<ThresholdPolicy>,
    /// `mad` or a known noise level.
    #[arg(long, default_value = "mad", value_parser = parse_sigma)]
    sigma: SigmaPolicy,
    /// Coarsest level; scaling coefficients at this level are kept.
    #[arg(long, default_value_t = 3)]
    j0: usize,
    /// Average over all circular shifts.
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    translation_invariant: bool,
}

#[derive(Args)]
struct PlmArgs {
    /// CSV with the response in the first column and covariates after it.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "db4")]
    wavelet: String,
    #[arg(long, default_value_t = 3)]
    j0: usize,
    /// `universal` (σ̂·√(2 ln n)) or a fixed value.
    #[arg(long, default_value = "universal", value_parser = parse_lambda)]
    lambda: PlmLambda,
    /// `qr` (estimated from the finest level) or a known noise level.
    #[arg(long, default_value = "qr", value_parser = parse_plm_sigma)]
    sigma: PlmSigma,
    /// Defaults to standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated subset of heavisine, blip, corner, wave.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "heavisine,blip,corner,wave"
    )]
    signals: Vec<String>,
    /// Comma-separated methods. Defaults to the noisy input and the ten
    /// catalog rules. Block rules and a `_ti` suffix (cycle spinning) are
    /// also accepted.
    #[arg(long, value_delimiter = ',')]
    methods: Vec<String>,
    /// Signal-to-noise ratios, sd(signal)/σ with the population sd.
    #[arg(long, value_delimiter = ',', default_value = "3,7")]
    snr: Vec<f64>,
    #[arg(long, default_value_t = 512)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "db4")]
    wavelet: String,
    #[arg(long, default_value_t = 6)]
    j0: usize,
    /// `known` uses each cell's true noise level, `mad` estimates it.
    #[arg(long, default_value = "known")]
    sigma: String,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_threshold(s: &str) -> Result<ThresholdPolicy, String> {
    if s.eq_ignore_ascii_case("universal") {
        return Ok(ThresholdPolicy::Universal);
    }
    let t: f64 = s
        .parse()
        .map_err(|_| format!("expected `universal` or a number, got `{s}`"))?;
    if !(t.is_finite() && t > 0.0) {
        return Err(format!("threshold must be positive, got {t}"));
    }
    Ok(ThresholdPolicy::Fixed(t))
}

fn parse_sigma(s: &str) -> Result<SigmaPolicy, String> {
    if s.eq_ignore_ascii_case("mad") {
        return Ok(SigmaPolicy::Mad);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("expected `mad` or a number, got `{s}`"))?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(format!("sigma must be nonnegative, got {v}"));
    }
    Ok(SigmaPolicy::Known(v))
}

fn parse_lambda(s: &str) -> Result<PlmLambda, String> {
    match parse_threshold(s)? {
        ThresholdPolicy::Universal => Ok(PlmLambda::Universal),
        ThresholdPolicy::Fixed(v) => Ok(PlmLambda::Fixed(v)),
    }
}

fn parse_plm_sigma(s: &str) -> Result<PlmSigma, String> {
    if s.eq_ignore_ascii_case("qr") {
        return Ok(PlmSigma::Qr);
    }
    match parse_sigma(s)? {
        SigmaPolicy::Known(v) => Ok(PlmSigma::Known(v)),
        SigmaPolicy::Mad => unreachable!("`mad` is not accepted here"),
    }
}

fn run_denoise(args: DenoiseArgs) -> Result<()> {
    let basis = FilterPair::by_name(&args.wavelet)?;
    let file =
        read_signal(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let (method, threshold) = match BlockScheme::from_name(&args.rule) {
        Some(scheme) => {
            if args.threshold.is_some() {
                bail!("block rules choose their own threshold; drop --threshold");
            }
            (
                Method::Block(BlockConfig::new(scheme)),
                ThresholdPolicy::Universal,
            )
        }
        None => {
            let rule: ShrinkageRule = args.rule.parse()?;
            let threshold = match args.threshold {
                Some(t) => t,
                None if args.rule.contains(':') => ThresholdPolicy::Fixed(rule.lambda()),
                None => ThresholdPolicy::Universal,
            };
            (Method::Rule(rule), threshold)
        }
    };
    let config = DenoiseConfig {
        basis,
        coarse_level: args.j0,
        method,
        threshold,
        sigma: args.sigma,
        translation_invariant: args.translation_invariant,
    };
    let out = denoise(&file.values, &config)?;
    write_signal(&args.output, &out, &file.format)
        .with_context(|| format!("writing {}", args.output.display()))?;
    Ok(())
}

fn run_plm(args: PlmArgs) -> Result<()> {
    let basis = FilterPair::by_name(&args.wavelet)?;
    let (y, x) =
        read_plm_csv(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let data = PlmData::new(y, x)?;
    let fit = fit_plm(&data, &basis, args.j0, args.sigma, args.lambda)?;
    for w in &fit.warnings {
        eprintln!("warning: {w:?}");
    }
    match args.output {
        Some(path) => write_plm_fit(
            &fit,
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        )?,
        None => write_plm_fit(&fit, io::stdout().lock())?,
    }
    Ok(())
}

fn run_bench(args: BenchArgs) -> Result<()> {
    let sigma = match args.sigma.to_ascii_lowercase().as_str() {
        "known" => SigmaPolicy::Known(1.0),
        "mad" => SigmaPolicy::Mad,
        other => bail!("--sigma must be `known` or `mad`, got `{other}`"),
    };
    let defaults = MethodDefaults {
        basis: FilterPair::by_name(&args.wavelet)?,
        coarse_level: args.j0,
        sigma,
    };
    let names: Vec<String> = if args.methods.is_empty() {
        std::iter::once("noisy")
            .chain(STANDARD_METHODS)
            .map(String::from)
            .collect()
    } else {
        args.methods
    };
    let methods = names
        .iter()
        .map(|m| BenchMethod::standard(m, &defaults))
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| {
            format!(
                "known methods: noisy, {}, {}",
                STANDARD_METHODS.join(", "),
                BLOCK_METHODS.join(", ")
            )
        })?;
    let signals = args
        .signals
        .iter()
        .map(|s| TestSignal::from_name(s))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some(bad) = args.snr.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
        bail!("snr must be positive, got {bad}");
    }
    let config = McConfig {
        methods,
        signals,
        snrs: args.snr,
        n: args.n,
        reps: args.reps,
        base_seed: args.seed,
    };
    let results = run_mc(&config);
    for r in results.iter().filter(|r| r.failure.is_some()) {
        eprintln!(
            "warning: {} on {} at snr {} failed: {}",
            r.method,
            r.signal,
            r.snr,
            r.failure.as_deref().unwrap_or_default()
        );
    }
    match args.out {
        Some(path) => write_results_csv(
            &results,
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        )?,
        None => {
            let mut out = io::stdout().lock();
            write_results_csv(&results, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Denoise(args) => run_denoise(args),
        Command::Plm(args) => run_plm(args),
        Command::Bench(args) => run_bench(args),
    }
}
