use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{SampleStream, SignalError};

const CSV_HEADER: [&str; 2] = ["index", "volts"];

/// Write `index,volts` rows. Values use Rust's shortest round-trip formatting,
/// so reading the file back reproduces every `f64` bit for bit.
pub fn write_csv(stream: &SampleStream, path: impl AsRef<Path>) -> Result<(), SignalError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for (i, v) in stream.samples().iter().enumerate() {
        writeln!(out, "{i},{v}")?;
    }
    out.flush()?;
    Ok(())
}

/// Read an `index,volts` file. The format carries no rate, so the caller
/// supplies it.
pub fn read_csv(path: impl AsRef<Path>, sample_rate: f64) -> Result<SampleStream, SignalError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_error)?;

    let headers = reader.headers().map_err(csv_error)?.clone();
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(SignalError::Parse {
            line: 1,
            message: format!("expected header 'index,volts', found '{}'", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }

    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let parse_err = |message: String| SignalError::Parse { line, message };
        if record.len() != 2 {
            return Err(parse_err(format!("expected 2 fields, found {}", record.len())));
        }
        let index: usize = record[0]
            .parse()
            .map_err(|_| parse_err(format!("bad index '{}'", &record[0])))?;
        if index != samples.len() {
            return Err(parse_err(format!(
                "index {index} out of sequence (expected {})",
                samples.len()
            )));
        }
        let volts: f64 = record[1]
            .parse()
            .map_err(|_| parse_err(format!("bad value '{}'", &record[1])))?;
        if !volts.is_finite() {
            return Err(parse_err(format!("non-finite value '{}'", &record[1])));
        }
        samples.push(volts);
    }
    SampleStream::new(samples, sample_rate)
}

fn csv_error(e: csv::Error) -> SignalError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SignalError::Io(io),
        other => SignalError::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Read a 16-bit signed mono WAV. A raw code `c` maps to `c / 32768 * full_scale_volts`.
pub fn read_pcm_audio(
    path: impl AsRef<Path>,
    full_scale_volts: f64,
) -> Result<SampleStream, SignalError> {
    if !(full_scale_volts.is_finite() && full_scale_volts > 0.0) {
        return Err(SignalError::Domain(format!(
            "full scale must be > 0, got {full_scale_volts}"
        )));
    }
    let mut reader = hound::WavReader::open(path).map_err(wav_error)?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(SignalError::Format(format!(
            "expected mono audio, found {} channels",
            spec.channels
        )));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(SignalError::Format(format!(
            "expected 16-bit signed PCM, found {}-bit {:?}",
            spec.bits_per_sample, spec.sample_format
        )));
    }
    let scale = full_scale_volts / 32768.0;
    let samples = reader
        .samples::<i16>()
        .map(|s| s.map(|raw| f64::from(raw) * scale))
        .collect::<Result<Vec<_>, _>>()
        .map_err(wav_error)?;
    SampleStream::new(samples, f64::from(spec.sample_rate))
}

/// Write a 16-bit mono WAV, rounding to the nearest code and saturating at
/// the code range. The sample rate is rounded to whole hertz.
pub fn write_pcm_audio(
    stream: &SampleStream,
    path: impl AsRef<Path>,
    full_scale_volts: f64,
) -> Result<(), SignalError> {
    if !(full_scale_volts.is_finite() && full_scale_volts > 0.0) {
        return Err(SignalError::Domain(format!(
            "full scale must be > 0, got {full_scale_volts}"
        )));
    }
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: stream.sample_rate().round() as u32,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::create(path, spec).map_err(wav_error)?;
    for &v in stream.samples() {
        let code = (v / full_scale_volts * 32768.0)
            .round()
            .clamp(f64::from(i16::MIN), f64::from(i16::MAX)) as i16;
        writer.write_sample(code).map_err(wav_error)?;
    }
    writer.finalize().map_err(wav_error)?;
    Ok(())
}

fn wav_error(e: hound::Error) -> SignalError {
    match e {
        hound::Error::IoError(io) => SignalError::Io(io),
        other => SignalError::Format(other.to_string()),
    }
}
