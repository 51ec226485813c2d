//! C ABI for the `udr-adc` simulator.
//!
//! Every fallible function returns a [`UdrStatus`]; on failure a message is
//! available from [`udr_last_error`] on the same thread. Handles are opaque
//! and owned by the caller until passed to the matching `_free` function.
//! Panics never cross the boundary; they surface as `UDR_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use udr_adc::analysis::crossover::crossover_gamma;
use udr_adc::analysis::hardware::{dynamic_power_ratio, flash_area_model, HwQuery};
use udr_adc::analysis::{sqnr_std, sqnr_udr, q_function};
use udr_adc::codec::CodecError;
use udr_adc::reconstruct::srer_slices;
use udr_adc::{
    modulo_fold, pack, reconstruct, unpack, AdcConfig, ConversionReport, ConvertError,
    DistributionKind, ModuloStream, Polarity, SampleStream,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UdrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The converter could not fold or quantize a sample.
    ConversionFailed = 3,
    /// Bad magic, unsupported version or inconsistent header.
    CodecFormat = 4,
    /// A record holds reset pattern 10, nonzero padding or an oversized code.
    CodecCorrupt = 5,
    /// Payload shorter or longer than the header promises.
    CodecLength = 6,
    /// The output buffer is too small; the required size was reported.
    BufferTooSmall = 7,
    /// The query is valid but has no answer (no crossover, no report).
    NoResult = 8,
    Panic = 99,
}

pub const UDR_DIST_UNIFORM: u32 = 0;
pub const UDR_DIST_GAUSSIAN: u32 = 1;
pub const UDR_DIST_LAPLACIAN: u32 = 2;

pub const UDR_RESET_NONE: u8 = 0b00;
pub const UDR_RESET_POSITIVE: u8 = 0b01;
pub const UDR_RESET_NEGATIVE: u8 = 0b11;

/// Opaque converter handle.
pub struct UdrAdc {
    inner: udr_adc::UdrAdc,
}

/// Opaque converter output.
pub struct UdrStream {
    stream: ModuloStream,
    report: Option<ConversionReport>,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UdrReport {
    pub samples: u64,
    pub resets_none: u64,
    pub resets_positive: u64,
    pub resets_negative: u64,
    pub max_abs_fold: u64,
    pub growth_violations: u64,
    pub unwrap_failures: u64,
    pub max_increment: f64,
    pub growth_condition_holds: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UdrFlashArea {
    pub n2: u32,
    pub comparators_std: u64,
    pub resistors_std: u64,
    pub comparators_udr: u64,
    pub resistors_udr: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(UdrStatus, String);

type FfiResult = Result<(), Failure>;

fn fail(status: UdrStatus, msg: impl std::fmt::Display) -> Failure {
    Failure(status, msg.to_string())
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> FfiResult) -> UdrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            UdrStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            UdrStatus::Panic
        }
    }
}

fn codec_status(e: &CodecError) -> UdrStatus {
    match e {
        CodecError::BadMagic(_) | CodecError::UnsupportedVersion(_) | CodecError::InvalidHeader(_) => {
            UdrStatus::CodecFormat
        }
        CodecError::CorruptReset { .. }
        | CodecError::CorruptPadding { .. }
        | CodecError::CodeOverflow { .. } => UdrStatus::CodecCorrupt,
        CodecError::Truncated { .. } | CodecError::TrailingBytes { .. } => UdrStatus::CodecLength,
    }
}

fn distribution(d: u32) -> Result<DistributionKind, Failure> {
    match d {
        UDR_DIST_UNIFORM => Ok(DistributionKind::Uniform),
        UDR_DIST_GAUSSIAN => Ok(DistributionKind::Gaussian),
        UDR_DIST_LAPLACIAN => Ok(DistributionKind::Laplacian),
        other => Err(fail(UdrStatus::InvalidArgument, format!("unknown distribution {other}"))),
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(UdrStatus::NullPointer, format!("{name} is null")))
}

unsafe fn in_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(UdrStatus::NullPointer, format!("{name} is null")))
}

unsafe fn in_slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(fail(UdrStatus::NullPointer, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn udr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Create a converter. `total_bits` includes the two reset bits;
/// `unipolar` selects the positive-only `[0, v_ref)` window.
#[no_mangle]
pub unsafe extern "C" fn udr_adc_new(
    v_ref: f64,
    total_bits: u32,
    unipolar: bool,
    out: *mut *mut UdrAdc,
) -> UdrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let mut config =
            AdcConfig::new(v_ref, total_bits).map_err(|e| fail(UdrStatus::InvalidArgument, e))?;
        if unipolar {
            config = config.with_polarity(Polarity::Unipolar);
        }
        *out = Box::into_raw(Box::new(UdrAdc {
            inner: udr_adc::UdrAdc::new(config),
        }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn udr_adc_free(adc: *mut UdrAdc) {
    if !adc.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(adc))));
    }
}

/// Convert `len` samples (volts) taken at `sample_rate` Hz.
#[no_mangle]
pub unsafe extern "C" fn udr_adc_convert(
    adc: *const UdrAdc,
    samples: *const f64,
    len: usize,
    sample_rate: f64,
    out: *mut *mut UdrStream,
) -> UdrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let adc = in_ref(adc, "adc")?;
        let xs = in_slice(samples, len, "samples")?;
        let input = SampleStream::new(xs.to_vec(), sample_rate)
            .map_err(|e| fail(UdrStatus::InvalidArgument, e))?;
        let conv = adc.inner.convert(&input).map_err(|e| match &e {
            ConvertError::Codec(c) => fail(codec_status(c), &e),
            _ => fail(UdrStatus::ConversionFailed, &e),
        })?;
        *out = Box::into_raw(Box::new(UdrStream {
            stream: conv.stream,
            report: Some(conv.report),
        }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn udr_stream_free(stream: *mut UdrStream) {
    if !stream.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(stream))));
    }
}

/// Number of records; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn udr_stream_len(stream: *const UdrStream) -> usize {
    stream.as_ref().map_or(0, |s| s.stream.len())
}

/// Reset bits (`R1 R0`) and quantizer code of record `index`.
#[no_mangle]
pub unsafe extern "C" fn udr_stream_record(
    stream: *const UdrStream,
    index: usize,
    reset_bits: *mut u8,
    code: *mut u32,
) -> UdrStatus {
    guard(|| {
        let s = in_ref(stream, "stream")?;
        let reset_bits = out_ref(reset_bits, "reset_bits")?;
        let code = out_ref(code, "code")?;
        let r = s.stream.records().get(index).ok_or_else(|| {
            fail(
                UdrStatus::InvalidArgument,
                format!("index {index} out of range for {} records", s.stream.len()),
            )
        })?;
        *reset_bits = r.reset.bits();
        *code = r.code;
        Ok(())
    })
}

/// Conversion statistics. `UDR_STATUS_NO_RESULT` for unpacked streams.
#[no_mangle]
pub unsafe extern "C" fn udr_stream_report(
    stream: *const UdrStream,
    out: *mut UdrReport,
) -> UdrStatus {
    guard(|| {
        let s = in_ref(stream, "stream")?;
        let out = out_ref(out, "out")?;
        let r = s
            .report
            .as_ref()
            .ok_or_else(|| fail(UdrStatus::NoResult, "stream was not produced by a conversion"))?;
        *out = UdrReport {
            samples: r.samples as u64,
            resets_none: r.resets.none as u64,
            resets_positive: r.resets.positive as u64,
            resets_negative: r.resets.negative as u64,
            max_abs_fold: r.max_abs_fold,
            growth_violations: r.growth_violations as u64,
            unwrap_failures: r.unwrap_failures as u64,
            max_increment: r.max_increment,
            growth_condition_holds: r.growth_condition_holds,
        };
        Ok(())
    })
}

/// Serialize into `buf`. `*written` receives the encoded size in every
/// case, so calling with `buf = NULL, cap = 0` queries the size
/// (returns `UDR_STATUS_BUFFER_TOO_SMALL`).
#[no_mangle]
pub unsafe extern "C" fn udr_stream_pack(
    stream: *const UdrStream,
    buf: *mut u8,
    cap: usize,
    written: *mut usize,
) -> UdrStatus {
    guard(|| {
        let s = in_ref(stream, "stream")?;
        let written = out_ref(written, "written")?;
        let need = s.stream.encoded_len();
        *written = need;
        if buf.is_null() || cap < need {
            return Err(fail(
                UdrStatus::BufferTooSmall,
                format!("need {need} bytes, have {cap}"),
            ));
        }
        let bytes = pack(&s.stream);
        ptr::copy_nonoverlapping(bytes.as_ptr(), buf, need);
        Ok(())
    })
}

/// Parse an encoded stream.
#[no_mangle]
pub unsafe extern "C" fn udr_stream_unpack(
    bytes: *const u8,
    len: usize,
    out: *mut *mut UdrStream,
) -> UdrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let bytes = in_slice(bytes, len, "bytes")?;
        let stream = unpack(bytes).map_err(|e| fail(codec_status(&e), &e))?;
        *out = Box::into_raw(Box::new(UdrStream {
            stream,
            report: None,
        }));
        Ok(())
    })
}

/// Write the reconstructed samples (volts) into `out`, which must hold
/// `udr_stream_len(stream)` values.
#[no_mangle]
pub unsafe extern "C" fn udr_stream_reconstruct(
    stream: *const UdrStream,
    out: *mut f64,
    cap: usize,
) -> UdrStatus {
    guard(|| {
        let s = in_ref(stream, "stream")?;
        let need = s.stream.len();
        if cap < need {
            return Err(fail(
                UdrStatus::BufferTooSmall,
                format!("need {need} values, have {cap}"),
            ));
        }
        if need == 0 {
            return Ok(());
        }
        if out.is_null() {
            return Err(fail(UdrStatus::NullPointer, "out is null"));
        }
        let xs = reconstruct(&s.stream).map_err(|e| fail(UdrStatus::InvalidArgument, e))?;
        ptr::copy_nonoverlapping(xs.samples().as_ptr(), out, need);
        Ok(())
    })
}

/// `x = v_mod + 2 m v_ref` with `v_mod` in `[-v_ref, v_ref)`.
#[no_mangle]
pub unsafe extern "C" fn udr_modulo_fold(
    x: f64,
    v_ref: f64,
    v_mod: *mut f64,
    m: *mut i64,
) -> UdrStatus {
    guard(|| {
        let v_mod = out_ref(v_mod, "v_mod")?;
        let m = out_ref(m, "m")?;
        if !(x.is_finite() && v_ref.is_finite() && v_ref > 0.0) {
            return Err(fail(
                UdrStatus::InvalidArgument,
                format!("need finite x and v_ref > 0, got {x}, {v_ref}"),
            ));
        }
        (*v_mod, *m) = modulo_fold(x, v_ref);
        Ok(())
    })
}

/// Gaussian tail probability.
#[no_mangle]
pub extern "C" fn udr_q_function(x: f64) -> f64 {
    q_function(x)
}

/// Linear SQNR of the clipping n-bit converter at loading factor `gamma`.
#[no_mangle]
pub unsafe extern "C" fn udr_sqnr_std(
    distribution: u32,
    n: u32,
    gamma: f64,
    out: *mut f64,
) -> UdrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let d = self::distribution(distribution)?;
        *out = sqnr_std(d, n, gamma).map_err(|e| fail(UdrStatus::InvalidArgument, e))?;
        Ok(())
    })
}

/// Linear SQNR of the folding converter with `n - 2` code bits.
#[no_mangle]
pub unsafe extern "C" fn udr_sqnr_udr(n: u32, gamma: f64, out: *mut f64) -> UdrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = sqnr_udr(n, gamma).map_err(|e| fail(UdrStatus::InvalidArgument, e))?;
        Ok(())
    })
}

/// Loading factor where both converters have equal SQNR.
/// `UDR_STATUS_NO_RESULT` when the curves do not cross.
#[no_mangle]
pub unsafe extern "C" fn udr_crossover_gamma(distribution: u32, n: u32, out: *mut f64) -> UdrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let d = self::distribution(distribution)?;
        *out = crossover_gamma(d, n)
            .map_err(|e| fail(UdrStatus::InvalidArgument, e))?
            .ok_or_else(|| fail(UdrStatus::NoResult, format!("no crossover for {d}, n = {n}")))?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn udr_flash_area(n1: u32, lambda: f64, out: *mut UdrFlashArea) -> UdrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let a = flash_area_model(&HwQuery { n1, lambda })
            .map_err(|e| fail(UdrStatus::InvalidArgument, e))?;
        *out = UdrFlashArea {
            n2: a.n2,
            comparators_std: a.comparators_std,
            resistors_std: a.resistors_std,
            comparators_udr: a.comparators_udr,
            resistors_udr: a.resistors_udr,
        };
        Ok(())
    })
}

/// `P_UDR / P_STD` for folding factor `lambda`.
#[no_mangle]
pub unsafe extern "C" fn udr_dynamic_power_ratio(lambda: f64, out: *mut f64) -> UdrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = dynamic_power_ratio(lambda).map_err(|e| fail(UdrStatus::InvalidArgument, e))?;
        Ok(())
    })
}

/// Signal-to-reconstruction-error ratio in dB; `+inf` for identical inputs.
#[no_mangle]
pub unsafe extern "C" fn udr_srer(
    reference: *const f64,
    estimate: *const f64,
    len: usize,
    out: *mut f64,
) -> UdrStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = in_slice(reference, len, "reference")?;
        let e = in_slice(estimate, len, "estimate")?;
        *out = srer_slices(r, e).map_err(|e| fail(UdrStatus::InvalidArgument, e))?;
        Ok(())
    })
}
