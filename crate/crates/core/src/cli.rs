//! `udr-adc` command line.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 data error
//! (unreadable or corrupt input, counter saturation), 4 growth-condition
//! violation under `--strict`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::adc::{ConversionReport, ConvertError, UdrAdc};
use crate::analysis::montecarlo::{MonteCarlo, Sampling};
use crate::analysis::sweep::{self, LogRange};
use crate::codec::{pack, unpack};
use crate::frontend::{validate_timing, AdcConfig, ClockTiming, Polarity};
use crate::presets::{preset, PresetName};
use crate::reconstruct::{reconstruct, srer, ReconstructError};
use crate::signals::{
    generate, read_csv, read_pcm_audio, write_csv, write_pcm_audio, DistributionKind,
    SampleStream, SignalError, SignalKind, SignalSpec, Sinusoid,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_STRICT: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "udr-adc", version, about = "Unlimited dynamic range ADC simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a test signal (CSV, or 16-bit WAV when the output ends in .wav).
    Gen(GenArgs),
    /// Fold and quantize a signal into a packed stream file.
    Convert(ConvertArgs),
    /// Rebuild samples from a stream file.
    Reconstruct(ReconstructArgs),
    /// Sweep closed-form (and optionally simulated) SQNR over the loading factor.
    Sqnr(SqnrArgs),
    /// Flash area and dynamic power comparison tables.
    Hwmodel(HwmodelArgs),
}

/// `freq:amplitude[:phase]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineArg(pub Sinusoid);

impl FromStr for SineArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}")))
            .collect::<Result<_, _>>()?;
        match parts.as_slice() {
            [f, a] => Ok(SineArg(Sinusoid::new(*a, *f, 0.0))),
            [f, a, p] => Ok(SineArg(Sinusoid::new(*a, *f, *p))),
            _ => Err(format!("expected freq:amplitude[:phase], got '{s}'")),
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Comma-separated `freq:amplitude[:phase]` terms.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["dist", "preset"])]
    pub sines: Vec<SineArg>,
    /// i.i.d. amplitude distribution.
    #[arg(long, conflicts_with = "preset")]
    pub dist: Option<DistributionKind>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Sample rate in Hz.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Duration in seconds.
    #[arg(long)]
    pub dur: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Use a preset's synthetic input (fig5, proto).
    #[arg(long)]
    pub preset: Option<PresetName>,
    /// Volts at digital full scale for WAV output.
    #[arg(long, default_value_t = 1.0)]
    pub full_scale: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Input signal, CSV (`index,volts`) or 16-bit mono WAV.
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Start from a preset configuration (fig5, fig6, proto); flags override it.
    #[arg(long)]
    pub preset: Option<PresetName>,
    #[arg(long)]
    pub vref: Option<f64>,
    /// Total bits per sample, including the two reset bits.
    #[arg(long)]
    pub bits: Option<u32>,
    #[arg(long)]
    pub counter_bits: Option<u32>,
    /// Positive-only quantizer window `[0, V_ref)`.
    #[arg(long)]
    pub unipolar: bool,
    /// Sample rate of CSV input in Hz.
    #[arg(long)]
    pub rate: Option<f64>,
    /// Volts at digital full scale for WAV input.
    #[arg(long)]
    pub full_scale: Option<f64>,
    /// Sample-and-hold clock period in seconds.
    #[arg(long, requires = "t_clk_cnt")]
    pub t_clk_sh: Option<f64>,
    /// Counter clock period in seconds.
    #[arg(long, requires = "t_clk_sh")]
    pub t_clk_cnt: Option<f64>,
    /// Quantizer delay in seconds.
    #[arg(long, requires = "t_clk_sh")]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = UdrAdc::DEFAULT_MAX_CYCLES)]
    pub max_cycles: u32,
    /// Fail (exit 4) instead of warning when the growth condition is violated.
    #[arg(long)]
    pub strict: bool,
    /// Print the summary as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Packed stream file.
    pub input: PathBuf,
    /// Reconstructed samples, CSV or WAV.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Reference CSV for the SRER.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    /// Volts at digital full scale for WAV output or reference.
    #[arg(long, default_value_t = 1.0)]
    pub full_scale: f64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SqnrArgs {
    /// Distributions, comma-separated (default: all three).
    #[arg(long, value_delimiter = ',')]
    pub dist: Vec<DistributionKind>,
    /// Total bit counts, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "11")]
    pub bits: Vec<u32>,
    /// Log grid `lo:hi:count` for the loading factor.
    #[arg(long, default_value = "0.01:10:200")]
    pub gamma: LogRange,
    /// Add simulated columns with this many samples per point.
    #[arg(long)]
    pub monte_carlo: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = MonteCarlo::DEFAULT_WORKERS)]
    pub workers: usize,
    /// Plain i.i.d. sampling instead of stratified.
    #[arg(long)]
    pub iid: bool,
    /// Append crossover rows.
    #[arg(long)]
    pub crossover: bool,
    /// Output file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct HwmodelArgs {
    /// Area table output (default: stdout, followed by the power table).
    #[arg(long)]
    pub area_out: Option<PathBuf>,
    #[arg(long)]
    pub power_out: Option<PathBuf>,
    /// Folding factors, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub lambda: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    pub n_min: u32,
    #[arg(long, default_value_t = 14)]
    pub n_max: u32,
    /// Log grid `lo:hi:count` of quantization steps in volts.
    #[arg(long, default_value = "0.0001:0.1:31")]
    pub resolution: LogRange,
    /// Add arbitrary-unit absolute power columns.
    #[arg(long)]
    pub absolute: bool,
    /// Folding-converter bits used for the absolute power columns.
    #[arg(long, default_value_t = 9)]
    pub n1: u32,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Strict(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Data(_) => EXIT_DATA,
            Self::Strict(_) => EXIT_STRICT,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Data(m) | Self::Strict(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Data(format!("{}: {e}", path.display()))
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdout = io::stdout();
    let stderr = io::stderr();
    match execute(cli.command, &mut stdout.lock(), &mut stderr.lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {}", e.message());
            e.code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Gen(a) => cmd_gen(a, out),
        Command::Convert(a) => cmd_convert(a, out, err),
        Command::Reconstruct(a) => cmd_reconstruct(a, out),
        Command::Sqnr(a) => cmd_sqnr(a, out),
        Command::Hwmodel(a) => cmd_hwmodel(a, out),
    }
}

fn is_wav(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("wav"))
}

fn signal_error(e: SignalError) -> CliError {
    match e {
        SignalError::InvalidSpec(_) | SignalError::Domain(_) | SignalError::Unsupported(_) => {
            usage(e)
        }
        other => data(other),
    }
}

fn write_samples(stream: &SampleStream, path: &Path, full_scale: f64) -> Result<(), CliError> {
    let r = if is_wav(path) {
        write_pcm_audio(stream, path, full_scale)
    } else {
        write_csv(stream, path)
    };
    r.map_err(|e| data(format!("{}: {e}", path.display())))
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = if let Some(name) = a.preset {
        let mut spec = preset(name)
            .signal
            .ok_or_else(|| usage(format!("preset {name:?} has no synthetic input")))?;
        if let Some(d) = a.dur {
            spec.duration = d;
        }
        if let Some(r) = a.rate {
            spec.sample_rate = r;
        }
        spec
    } else {
        let kind = match (a.sines.is_empty(), a.dist) {
            (false, None) => SignalKind::SinusoidMixture(a.sines.iter().map(|s| s.0).collect()),
            (true, Some(distribution)) => SignalKind::RandomProcess {
                distribution,
                sigma: a.sigma,
            },
            (true, None) => return Err(usage("one of --sines, --dist or --preset is required")),
            (false, Some(_)) => return Err(usage("--sines and --dist are exclusive")),
        };
        SignalSpec {
            kind,
            duration: a.dur.ok_or_else(|| usage("--dur is required"))?,
            sample_rate: a.rate.ok_or_else(|| usage("--rate is required"))?,
        }
    };
    let stream = generate(&spec, a.seed).map_err(signal_error)?;
    write_samples(&stream, &a.output, a.full_scale)?;
    writeln!(out, "wrote {} samples to {}", stream.len(), a.output.display()).map_err(data)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct ConvertSummary<'a> {
    input: &'a Path,
    output: &'a Path,
    config: &'a AdcConfig,
    sample_rate: f64,
    fold_step: f64,
    report: &'a ConversionReport,
}

fn cmd_convert(a: ConvertArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let base = a.preset.map(preset);
    let mut config = match &base {
        Some(p) => p.config,
        None => AdcConfig::new(
            a.vref.ok_or_else(|| usage("--vref is required without --preset"))?,
            a.bits.ok_or_else(|| usage("--bits is required without --preset"))?,
        )
        .map_err(usage)?,
    };
    if let Some(v) = a.vref {
        config.v_ref = v;
    }
    if let Some(b) = a.bits {
        config.total_bits = b;
    }
    if let Some(c) = a.counter_bits {
        config.counter_bits = c;
    }
    if a.unipolar {
        config.polarity = Polarity::Unipolar;
    }
    if let (Some(sh), Some(cnt)) = (a.t_clk_sh, a.t_clk_cnt) {
        let timing = ClockTiming {
            t_clk_sh: sh,
            t_clk_cnt: cnt,
            tau: a.tau.unwrap_or(0.0),
        };
        if !validate_timing(&timing).map_err(usage)? {
            return Err(usage(format!(
                "hold period {sh} s is shorter than two counter cycles plus tau ({} s)",
                2.0 * cnt + timing.tau
            )));
        }
        config.timing = Some(timing);
    }
    config.validate().map_err(usage)?;

    let input = if is_wav(&a.input) {
        let fs = a
            .full_scale
            .or(base.as_ref().and_then(|p| p.full_scale))
            .unwrap_or(1.0);
        read_pcm_audio(&a.input, fs)
    } else {
        let rate = a
            .rate
            .or(base.as_ref().and_then(|p| p.sample_rate))
            .ok_or_else(|| usage("--rate is required for CSV input without a preset"))?;
        read_csv(&a.input, rate)
    }
    .map_err(|e| match e {
        SignalError::Domain(_) => usage(e),
        other => data(format!("{}: {other}", a.input.display())),
    })?;

    let conversion = UdrAdc::new(config)
        .with_max_cycles(a.max_cycles)
        .convert(&input)
        .map_err(|e| match e {
            ConvertError::Codec(c) => usage(c),
            other => data(other),
        })?;
    let report = &conversion.report;

    let mut problems = Vec::new();
    if !report.growth_condition_holds {
        problems.push(format!(
            "max increment {} V exceeds the fold step {} V",
            report.max_increment,
            config.fold_step()
        ));
    }
    if let Some(i) = report.first_growth_violation {
        problems.push(format!(
            "{} samples moved by more than one fold (first at {i})",
            report.growth_violations
        ));
    }
    if a.strict && !problems.is_empty() {
        return Err(CliError::Strict(format!(
            "growth condition violated: {}",
            problems.join("; ")
        )));
    }
    for p in &problems {
        writeln!(err, "warning: {p}").map_err(data)?;
    }

    fs::write(&a.output, pack(&conversion.stream)).map_err(io_at(&a.output))?;

    if a.json {
        let summary = ConvertSummary {
            input: &a.input,
            output: &a.output,
            config: &config,
            sample_rate: input.sample_rate(),
            fold_step: config.fold_step(),
            report,
        };
        serde_json::to_writer_pretty(&mut *out, &summary).map_err(data)?;
        writeln!(out).map_err(data)?;
    } else {
        write_convert_text(out, &config, input.sample_rate(), report).map_err(data)?;
    }
    Ok(())
}

fn write_convert_text(
    out: &mut dyn Write,
    config: &AdcConfig,
    rate: f64,
    r: &ConversionReport,
) -> io::Result<()> {
    writeln!(out, "samples: {}", r.samples)?;
    writeln!(out, "sample_rate_hz: {rate}")?;
    writeln!(
        out,
        "v_ref: {} V, bits: {} ({} code + 2 reset), polarity: {:?}",
        config.v_ref,
        config.total_bits,
        config.quant_bits(),
        config.polarity
    )?;
    writeln!(
        out,
        "resets: none={} positive={} negative={}",
        r.resets.none, r.resets.positive, r.resets.negative
    )?;
    let hist: Vec<String> = r
        .fold_histogram
        .iter()
        .map(|(m, c)| format!("{m}:{c}"))
        .collect();
    writeln!(out, "fold_histogram: {}", hist.join(" "))?;
    writeln!(out, "max_abs_fold: {}", r.max_abs_fold)?;
    writeln!(out, "max_cycles_used: {}", r.max_cycles_used)?;
    writeln!(out, "growth_violations: {}", r.growth_violations)?;
    writeln!(out, "unwrap_failures: {}", r.unwrap_failures)?;
    writeln!(out, "max_increment_volts: {}", r.max_increment)?;
    writeln!(
        out,
        "growth_condition: {}",
        if r.growth_condition_holds { "ok" } else { "violated" }
    )
}

#[derive(Debug, Serialize)]
struct ReconstructSummary<'a> {
    input: &'a Path,
    output: &'a Path,
    samples: usize,
    sample_rate: f64,
    /// `null` when no reference was given; the string "inf" for an exact match.
    srer_db: Option<serde_json::Value>,
}

fn cmd_reconstruct(a: ReconstructArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let bytes = fs::read(&a.input).map_err(io_at(&a.input))?;
    let stream = unpack(&bytes).map_err(|e| data(format!("{}: {e}", a.input.display())))?;
    let estimate = reconstruct(&stream).map_err(data)?;
    write_samples(&estimate, &a.output, a.full_scale)?;

    let srer_db = match &a.reference {
        None => None,
        Some(path) => {
            let reference = if is_wav(path) {
                read_pcm_audio(path, a.full_scale)
            } else {
                read_csv(path, stream.sample_rate())
            }
            .map_err(|e| data(format!("{}: {e}", path.display())))?;
            Some(srer(&reference, &estimate).map_err(|e| match e {
                ReconstructError::LengthMismatch { .. } => usage(e),
                other => data(other),
            })?)
        }
    };
    let fmt = |v: f64| {
        if v.is_infinite() {
            "inf".to_string()
        } else {
            format!("{v:.4}")
        }
    };

    if a.json {
        let summary = ReconstructSummary {
            input: &a.input,
            output: &a.output,
            samples: estimate.len(),
            sample_rate: estimate.sample_rate(),
            srer_db: srer_db.map(|v| {
                if v.is_finite() {
                    serde_json::Value::from(v)
                } else {
                    serde_json::Value::from("inf")
                }
            }),
        };
        serde_json::to_writer_pretty(&mut *out, &summary).map_err(data)?;
        writeln!(out).map_err(data)?;
    } else {
        writeln!(out, "samples: {}", estimate.len()).map_err(data)?;
        if let Some(v) = srer_db {
            writeln!(out, "srer_db: {}", fmt(v)).map_err(data)?;
        }
    }
    Ok(())
}

fn open_output<'a>(
    path: &Option<PathBuf>,
    out: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p).map_err(io_at(p))?)),
        None => Box::new(out),
    })
}

fn cmd_sqnr(a: SqnrArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let dists = if a.dist.is_empty() {
        DistributionKind::ALL.to_vec()
    } else {
        a.dist.clone()
    };
    if let Some(&n) = a.bits.iter().find(|&&n| !(3..=32).contains(&n)) {
        return Err(usage(format!("bits must be in 3..=32, got {n}")));
    }
    let mc = a.monte_carlo.map(|samples| {
        MonteCarlo::new(samples, a.seed)
            .with_workers(a.workers)
            .with_sampling(if a.iid { Sampling::Iid } else { Sampling::Stratified })
    });
    let rows = sweep::sqnr_sweep(&dists, &a.bits, &a.gamma, mc.as_ref()).map_err(usage)?;
    let crossovers = if a.crossover {
        sweep::crossover_rows(&dists, &a.bits).map_err(usage)?
    } else {
        Vec::new()
    };

    let mut w = open_output(&a.output, out)?;
    if a.json {
        #[derive(Serialize)]
        struct Doc<'a> {
            monte_carlo: Option<MonteCarlo>,
            rows: &'a [sweep::SqnrRow],
            crossovers: &'a [sweep::CrossoverRow],
        }
        let doc = Doc {
            monte_carlo: mc,
            rows: &rows,
            crossovers: &crossovers,
        };
        serde_json::to_writer_pretty(&mut w, &doc).map_err(data)?;
        writeln!(w).map_err(data)?;
    } else {
        sweep::write_sqnr_csv(&mut w, &rows, &crossovers).map_err(data)?;
    }
    w.flush().map_err(data)
}

fn cmd_hwmodel(a: HwmodelArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.n_min < 1 || a.n_min > a.n_max || a.n_max > 62 {
        return Err(usage(format!(
            "need 1 <= n-min <= n-max <= 62, got {}..{}",
            a.n_min, a.n_max
        )));
    }
    if a.lambda.is_empty() {
        return Err(usage("need at least one folding factor"));
    }
    let area = sweep::area_sweep(a.n_min..=a.n_max, &a.lambda).map_err(usage)?;
    let power = sweep::power_sweep(&a.resolution, &a.lambda, a.absolute.then_some(a.n1))
        .map_err(usage)?;

    match (&a.area_out, &a.power_out) {
        (None, None) => {
            sweep::write_area_csv(&mut *out, &area).map_err(data)?;
            writeln!(out).map_err(data)?;
            sweep::write_power_csv(&mut *out, &power).map_err(data)?;
        }
        (area_path, power_path) => {
            if let Some(p) = area_path {
                let f = fs::File::create(p).map_err(io_at(p))?;
                sweep::write_area_csv(f, &area).map_err(data)?;
            }
            if let Some(p) = power_path {
                let f = fs::File::create(p).map_err(io_at(p))?;
                sweep::write_power_csv(f, &power).map_err(data)?;
            }
        }
    }
    Ok(())
}
