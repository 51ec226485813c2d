//! Bit-exact container for converter output.
//!
//! Layout, all little-endian:
//!
//! ```text
//! offset  size  field
//!      0     4  magic "UADC"
//!      4     2  version (1 = bipolar window, 2 = unipolar window)
//!      6     2  n, total bits per sample
//!      8     8  v_ref (f64)
//!     16     8  sample rate in Hz (f64)
//!     24     8  sample count (u64)
//!     32     .  records, ceil(n / 8) bytes each
//! ```
//!
//! Each record is an unsigned little-endian word: bits `n-3..=0` hold the
//! quantizer code, bits `n-1..=n-2` hold `R1 R0`, and any bits above `n`
//! are zero.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{AdcConfig, ConfigError, Polarity, ResetCode};

pub const MAGIC: [u8; 4] = *b"UADC";
pub const HEADER_LEN: usize = 32;
pub const VERSION_BIPOLAR: u16 = 1;
pub const VERSION_UNIPOLAR: u16 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("invalid header: {0}")]
    InvalidHeader(String),
    #[error("record {index}: reset bits form the unused pattern 10")]
    CorruptReset { index: usize },
    #[error("record {index}: padding bits are not zero")]
    CorruptPadding { index: usize },
    #[error("record {index}: code {code} does not fit in {bits} bits")]
    CodeOverflow { index: usize, code: u32, bits: u32 },
    #[error("truncated stream: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },
    #[error("trailing bytes: expected {expected} bytes, found {actual}")]
    TrailingBytes { expected: usize, actual: usize },
}

impl From<ConfigError> for CodecError {
    fn from(e: ConfigError) -> Self {
        CodecError::InvalidHeader(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StreamHeader {
    pub version: u16,
    pub total_bits: u16,
    pub v_ref: f64,
    pub sample_rate: f64,
    pub sample_count: u64,
}

impl StreamHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&MAGIC);
        out[4..6].copy_from_slice(&self.version.to_le_bytes());
        out[6..8].copy_from_slice(&self.total_bits.to_le_bytes());
        out[8..16].copy_from_slice(&self.v_ref.to_le_bytes());
        out[16..24].copy_from_slice(&self.sample_rate.to_le_bytes());
        out[24..32].copy_from_slice(&self.sample_count.to_le_bytes());
        out
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, CodecError> {
        if bytes.len() < HEADER_LEN {
            return Err(CodecError::Truncated {
                expected: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
        if magic != MAGIC {
            return Err(CodecError::BadMagic(magic));
        }
        let u16_at = |i: usize| u16::from_le_bytes(bytes[i..i + 2].try_into().unwrap());
        let f64_at = |i: usize| f64::from_le_bytes(bytes[i..i + 8].try_into().unwrap());
        let header = Self {
            version: u16_at(4),
            total_bits: u16_at(6),
            v_ref: f64_at(8),
            sample_rate: f64_at(16),
            sample_count: u64::from_le_bytes(bytes[24..32].try_into().unwrap()),
        };
        polarity_for(header.version)?;
        Ok(header)
    }

    pub fn record_bytes(&self) -> usize {
        record_bytes(u32::from(self.total_bits))
    }
}

fn polarity_for(version: u16) -> Result<Polarity, CodecError> {
    match version {
        VERSION_BIPOLAR => Ok(Polarity::Bipolar),
        VERSION_UNIPOLAR => Ok(Polarity::Unipolar),
        other => Err(CodecError::UnsupportedVersion(other)),
    }
}

fn version_for(polarity: Polarity) -> u16 {
    match polarity {
        Polarity::Bipolar => VERSION_BIPOLAR,
        Polarity::Unipolar => VERSION_UNIPOLAR,
    }
}

pub fn record_bytes(total_bits: u32) -> usize {
    total_bits.div_ceil(8) as usize
}

/// One sample of converter output: `d[n]` and the code for `y[n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Record {
    pub reset: ResetCode,
    pub code: u32,
}

impl Record {
    pub fn word(&self, quant_bits: u32) -> u32 {
        self.code | (u32::from(self.reset.bits()) << quant_bits)
    }
}

/// Converter output stream: per-sample records plus the configuration
/// needed to interpret them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuloStream {
    v_ref: f64,
    total_bits: u32,
    polarity: Polarity,
    sample_rate: f64,
    records: Vec<Record>,
}

impl ModuloStream {
    pub fn new(
        config: &AdcConfig,
        sample_rate: f64,
        records: Vec<Record>,
    ) -> Result<Self, CodecError> {
        config.validate()?;
        if !(sample_rate.is_finite() && sample_rate > 0.0) {
            return Err(CodecError::InvalidHeader(format!(
                "sample rate must be > 0, got {sample_rate}"
            )));
        }
        let quant_bits = config.quant_bits();
        if let Some((index, r)) = records
            .iter()
            .enumerate()
            .find(|(_, r)| u64::from(r.code) >= 1u64 << quant_bits)
        {
            return Err(CodecError::CodeOverflow {
                index,
                code: r.code,
                bits: quant_bits,
            });
        }
        Ok(Self {
            v_ref: config.v_ref,
            total_bits: config.total_bits,
            polarity: config.polarity,
            sample_rate,
            records,
        })
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Converter configuration implied by the header (default counter width).
    pub fn config(&self) -> AdcConfig {
        AdcConfig {
            v_ref: self.v_ref,
            total_bits: self.total_bits,
            counter_bits: AdcConfig::DEFAULT_COUNTER_BITS,
            polarity: self.polarity,
            timing: None,
        }
    }

    pub fn header(&self) -> StreamHeader {
        StreamHeader {
            version: version_for(self.polarity),
            total_bits: self.total_bits as u16,
            v_ref: self.v_ref,
            sample_rate: self.sample_rate,
            sample_count: self.records.len() as u64,
        }
    }

    pub fn encoded_len(&self) -> usize {
        HEADER_LEN + self.records.len() * record_bytes(self.total_bits)
    }
}

pub fn pack(stream: &ModuloStream) -> Vec<u8> {
    let width = record_bytes(stream.total_bits);
    let quant_bits = stream.total_bits - 2;
    let mut out = Vec::with_capacity(stream.encoded_len());
    out.extend_from_slice(&stream.header().to_bytes());
    for r in &stream.records {
        out.extend_from_slice(&r.word(quant_bits).to_le_bytes()[..width]);
    }
    out
}

pub fn unpack(bytes: &[u8]) -> Result<ModuloStream, CodecError> {
    let header = StreamHeader::parse(bytes)?;
    let polarity = polarity_for(header.version)?;
    let total_bits = u32::from(header.total_bits);
    let config = AdcConfig {
        v_ref: header.v_ref,
        total_bits,
        counter_bits: AdcConfig::DEFAULT_COUNTER_BITS,
        polarity,
        timing: None,
    };
    config.validate()?;

    let width = header.record_bytes();
    let expected = usize::try_from(header.sample_count)
        .ok()
        .and_then(|n| n.checked_mul(width))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| CodecError::InvalidHeader("sample count overflows".into()))?;
    match bytes.len().cmp(&expected) {
        std::cmp::Ordering::Less => {
            return Err(CodecError::Truncated {
                expected,
                actual: bytes.len(),
            })
        }
        std::cmp::Ordering::Greater => {
            return Err(CodecError::TrailingBytes {
                expected,
                actual: bytes.len(),
            })
        }
        std::cmp::Ordering::Equal => {}
    }

    let quant_bits = total_bits - 2;
    let code_mask = (1u32 << quant_bits) - 1;
    let records = bytes[HEADER_LEN..]
        .chunks_exact(width)
        .enumerate()
        .map(|(index, chunk)| {
            let mut word = [0u8; 4];
            word[..width].copy_from_slice(chunk);
            let word = u32::from_le_bytes(word);
            if total_bits < 32 && word >> total_bits != 0 {
                return Err(CodecError::CorruptPadding { index });
            }
            let reset = ResetCode::from_bits(((word >> quant_bits) & 0b11) as u8)
                .map_err(|_| CodecError::CorruptReset { index })?;
            Ok(Record {
                reset,
                code: word & code_mask,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    ModuloStream::new(&config, header.sample_rate, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stream(records: Vec<Record>) -> ModuloStream {
        ModuloStream::new(&AdcConfig::new(0.2, 11).unwrap(), 53_000.0, records).unwrap()
    }

    fn payload(r: Record) -> Vec<u8> {
        pack(&stream(vec![r]))[HEADER_LEN..].to_vec()
    }

    #[test]
    fn record_examples() {
        let r = |reset, code| Record { reset, code };
        assert_eq!(payload(r(ResetCode::Positive, 384)), [0x80, 0x03]);
        assert_eq!(payload(r(ResetCode::NoReset, 0)), [0x00, 0x00]);
        assert_eq!(payload(r(ResetCode::Negative, 511)), [0xFF, 0x07]);
    }

    #[test]
    fn header_layout() {
        let bytes = pack(&stream(vec![Record { reset: ResetCode::NoReset, code: 1 }; 3]));
        assert_eq!(&bytes[0..4], b"UADC");
        assert_eq!(&bytes[4..6], &[1, 0]);
        assert_eq!(&bytes[6..8], &[11, 0]);
        assert_eq!(&bytes[8..16], &0.2f64.to_le_bytes());
        assert_eq!(&bytes[16..24], &53_000.0f64.to_le_bytes());
        assert_eq!(&bytes[24..32], &3u64.to_le_bytes());
        assert_eq!(bytes.len(), HEADER_LEN + 3 * 2);
    }

    #[test]
    fn decode_errors() {
        let good = pack(&stream(vec![Record { reset: ResetCode::Positive, code: 5 }; 4]));

        let mut bad = good.clone();
        bad[0] = b'X';
        assert!(matches!(unpack(&bad), Err(CodecError::BadMagic(_))));

        let mut bad = good.clone();
        bad[4] = 9;
        assert_eq!(unpack(&bad), Err(CodecError::UnsupportedVersion(9)));

        let mut bad = good.clone();
        // Record 2, high byte: bits 9..10 -> 0b10.
        bad[HEADER_LEN + 2 * 2 + 1] = 0b0000_0100;
        assert_eq!(unpack(&bad), Err(CodecError::CorruptReset { index: 2 }));

        let mut bad = good.clone();
        bad[HEADER_LEN + 1] |= 0x80;
        assert_eq!(unpack(&bad), Err(CodecError::CorruptPadding { index: 0 }));

        assert!(matches!(
            unpack(&good[..good.len() - 1]),
            Err(CodecError::Truncated { .. })
        ));
        let mut long = good.clone();
        long.push(0);
        assert!(matches!(unpack(&long), Err(CodecError::TrailingBytes { .. })));
        assert!(matches!(unpack(&good[..10]), Err(CodecError::Truncated { .. })));
    }

    #[test]
    fn oversized_codes_are_rejected() {
        let e = ModuloStream::new(
            &AdcConfig::new(0.2, 11).unwrap(),
            1.0,
            vec![Record { reset: ResetCode::NoReset, code: 512 }],
        );
        assert!(matches!(e, Err(CodecError::CodeOverflow { index: 0, .. })));
    }

    #[test]
    fn unipolar_uses_version_two() {
        let c = AdcConfig::new(1.65, 12).unwrap().with_polarity(Polarity::Unipolar);
        let s = ModuloStream::new(&c, 200_000.0, vec![]).unwrap();
        let bytes = pack(&s);
        assert_eq!(&bytes[4..6], &[2, 0]);
        assert_eq!(unpack(&bytes).unwrap(), s);
    }

    #[test]
    fn widths() {
        assert_eq!(record_bytes(3), 1);
        assert_eq!(record_bytes(8), 1);
        assert_eq!(record_bytes(11), 2);
        assert_eq!(record_bytes(17), 3);
        assert_eq!(record_bytes(32), 4);
    }
}
