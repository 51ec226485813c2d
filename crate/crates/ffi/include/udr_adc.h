#ifndef UDR_ADC_H
#define UDR_ADC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define UDR_DIST_UNIFORM 0

#define UDR_DIST_GAUSSIAN 1

#define UDR_DIST_LAPLACIAN 2

#define UDR_RESET_NONE 0

#define UDR_RESET_POSITIVE 1

#define UDR_RESET_NEGATIVE 3

typedef enum UdrStatus {
  UDR_STATUS_OK = 0,
  UDR_STATUS_NULL_POINTER = 1,
  UDR_STATUS_INVALID_ARGUMENT = 2,
  // The converter could not fold or quantize a sample.
  UDR_STATUS_CONVERSION_FAILED = 3,
  // Bad magic, unsupported version or inconsistent header.
  UDR_STATUS_CODEC_FORMAT = 4,
  // A record holds reset pattern 10, nonzero padding or an oversized code.
  UDR_STATUS_CODEC_CORRUPT = 5,
  // Payload shorter or longer than the header promises.
  UDR_STATUS_CODEC_LENGTH = 6,
  // The output buffer is too small; the required size was reported.
  UDR_STATUS_BUFFER_TOO_SMALL = 7,
  // The query is valid but has no answer (no crossover, no report).
  UDR_STATUS_NO_RESULT = 8,
  UDR_STATUS_PANIC = 99,
} UdrStatus;

// Opaque converter handle.
typedef struct UdrAdc UdrAdc;

// Opaque converter output.
typedef struct UdrStream UdrStream;

typedef struct UdrReport {
  uint64_t samples;
  uint64_t resets_none;
  uint64_t resets_positive;
  uint64_t resets_negative;
  uint64_t max_abs_fold;
  uint64_t growth_violations;
  uint64_t unwrap_failures;
  double max_increment;
  bool growth_condition_holds;
} UdrReport;

typedef struct UdrFlashArea {
  uint32_t n2;
  uint64_t comparators_std;
  uint64_t resistors_std;
  uint64_t comparators_udr;
  uint64_t resistors_udr;
} UdrFlashArea;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call into this library on the
// same thread.
const char *udr_last_error(void);

// Create a converter. `total_bits` includes the two reset bits;
// `unipolar` selects the positive-only `[0, v_ref)` window.
enum UdrStatus udr_adc_new(double v_ref, uint32_t total_bits, bool unipolar, struct UdrAdc **out);

void udr_adc_free(struct UdrAdc *adc);

// Convert `len` samples (volts) taken at `sample_rate` Hz.
enum UdrStatus udr_adc_convert(const struct UdrAdc *adc,
                               const double *samples,
                               size_t len,
                               double sample_rate,
                               struct UdrStream **out);

void udr_stream_free(struct UdrStream *stream);

// Number of records; 0 for a null handle.
size_t udr_stream_len(const struct UdrStream *stream);

// Reset bits (`R1 R0`) and quantizer code of record `index`.
enum UdrStatus udr_stream_record(const struct UdrStream *stream,
                                 size_t index,
                                 uint8_t *reset_bits,
                                 uint32_t *code);

// Conversion statistics. `UDR_STATUS_NO_RESULT` for unpacked streams.
enum UdrStatus udr_stream_report(const struct UdrStream *stream, struct UdrReport *out);

// Serialize into `buf`. `*written` receives the encoded size in every
// case, so calling with `buf = NULL, cap = 0` queries the size
// (returns `UDR_STATUS_BUFFER_TOO_SMALL`).
enum UdrStatus udr_stream_pack(const struct UdrStream *stream,
                               uint8_t *buf,
                               size_t cap,
                               size_t *written);

// Parse an encoded stream.
enum UdrStatus udr_stream_unpack(const uint8_t *bytes, size_t len, struct UdrStream **out);

// Write the reconstructed samples (volts) into `out`, which must hold
// `udr_stream_len(stream)` values.
enum UdrStatus udr_stream_reconstruct(const struct UdrStream *stream, double *out, size_t cap);

// `x = v_mod + 2 m v_ref` with `v_mod` in `[-v_ref, v_ref)`.
enum UdrStatus udr_modulo_fold(double x, double v_ref, double *v_mod, int64_t *m);

// Gaussian tail probability.
double udr_q_function(double x);

// Linear SQNR of the clipping n-bit converter at loading factor `gamma`.
enum UdrStatus udr_sqnr_std(uint32_t distribution, uint32_t n, double gamma, double *out);

// Linear SQNR of the folding converter with `n - 2` code bits.
enum UdrStatus udr_sqnr_udr(uint32_t n, double gamma, double *out);

// Loading factor where both converters have equal SQNR.
// `UDR_STATUS_NO_RESULT` when the curves do not cross.
enum UdrStatus udr_crossover_gamma(uint32_t distribution, uint32_t n, double *out);

enum UdrStatus udr_flash_area(uint32_t n1, double lambda, struct UdrFlashArea *out);

// `P_UDR / P_STD` for folding factor `lambda`.
enum UdrStatus udr_dynamic_power_ratio(double lambda, double *out);

// Signal-to-reconstruction-error ratio in dB; `+inf` for identical inputs.
enum UdrStatus udr_srer(const double *reference, const double *estimate, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UDR_ADC_H */
