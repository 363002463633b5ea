#ifndef PANSHARP_H
#define PANSHARP_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum PsStatus {
  PS_STATUS_OK = 0,
  PS_STATUS_NULL_POINTER = 1,
  PS_STATUS_INVALID_ARGUMENT = 2,
  PS_STATUS_DIMENSION_MISMATCH = 3,
  PS_STATUS_DEGENERATE = 4,
  PS_STATUS_UNSUPPORTED_FORMAT = 5,
  PS_STATUS_IO = 6,
  PS_STATUS_PANIC = 7,
} PsStatus;

enum PsMethod
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  PS_METHOD_BROVEY = 0,
  PS_METHOD_IHS = 1,
  PS_METHOD_ADAPTIVE_IHS = 2,
  PS_METHOD_PCA = 3,
  PS_METHOD_HPF = 4,
  PS_METHOD_DWT_ATROUS = 5,
  PS_METHOD_DWT_MALLAT = 6,
  PS_METHOD_IDENTITY = 7,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum PsMethod PsMethod;
#else
typedef uint32_t PsMethod;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum PsDwtRule
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  PS_DWT_RULE_ADDITIVE = 0,
  PS_DWT_RULE_SUBSTITUTIVE = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum PsDwtRule PsDwtRule;
#else
typedef uint32_t PsDwtRule;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum PsResample
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  PS_RESAMPLE_NEAREST = 0,
  PS_RESAMPLE_BILINEAR = 1,
  PS_RESAMPLE_BICUBIC = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum PsResample PsResample;
#else
typedef uint32_t PsResample;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum PsHistMatch
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  PS_HIST_MATCH_NONE = 0,
  PS_HIST_MATCH_MEAN_STD = 1,
  PS_HIST_MATCH_CDF = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum PsHistMatch PsHistMatch;
#else
typedef uint32_t PsHistMatch;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/*
 Opaque multi-band image.
 */
typedef struct PsImage PsImage;

/*
 Fusion settings. Enum-valued fields hold `PsMethod`, `PsDwtRule`,
 `PsResample` and `PsHistMatch` values; `levels == 0` picks the default.
 */
typedef struct PsFusionOptions {
  uint32_t method;
  uint32_t ratio;
  uint32_t levels;
  uint32_t dwt_rule;
  uint32_t resample;
  uint32_t histmatch;
} PsFusionOptions;

/*
 Band-averaged quality indices. `scc` is meaningful only when `has_scc`.
 */
typedef struct PsMetrics {
  double cc;
  double ergas;
  double quality;
  double rase;
  double rmse;
  double scc;
  bool has_scc;
} PsMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *ps_last_error_message(void);

/*
 Builds an image from `width * height * bands` band-major samples.

 # Safety
 `samples` must point to that many readable doubles; `out` must be writable.
 */
enum PsStatus ps_image_new(size_t width,
                           size_t height,
                           size_t bands,
                           const double *samples,
                           struct PsImage **out);

/*
 # Safety
 `img` must be NULL or a handle from this library that was not yet freed.
 */
void ps_image_free(struct PsImage *img);

/*
 # Safety
 `img` must be NULL or a live handle.
 */
size_t ps_image_width(const struct PsImage *img);

/*
 # Safety
 `img` must be NULL or a live handle.
 */
size_t ps_image_height(const struct PsImage *img);

/*
 # Safety
 `img` must be NULL or a live handle.
 */
size_t ps_image_bands(const struct PsImage *img);

/*
 Copies band-major samples into `out`, which holds `len` doubles.

 # Safety
 `img` must be a live handle and `out` must have room for `len` doubles.
 */
enum PsStatus ps_image_copy_samples(const struct PsImage *img, double *out, size_t len);

/*
 Loads a PNG, TIFF or raw-f64 file; the format is sniffed from its contents.

 # Safety
 `path` must be a NUL-terminated string; `out` must be writable.
 */
enum PsStatus ps_image_load(const char *path, struct PsImage **out);

/*
 Saves with the format implied by the file extension. Integer formats
 fail on out-of-range samples unless `clamp` is set.

 # Safety
 `img` must be a live handle and `path` a NUL-terminated string.
 */
enum PsStatus ps_image_save(const struct PsImage *img, const char *path, bool clamp);

/*
 Defaults for `method` (a `PsMethod` value): ratio 4, bicubic
 resampling, mean/std matching, additive wavelet rule, automatic level
 count. An unknown method is rejected later by `ps_fuse`.
 */
struct PsFusionOptions ps_fusion_options_default(uint32_t method);

/*
 Fuses `ms` with the single-band `pan`, which must be `ratio` times larger.

 # Safety
 `ms`, `pan` and `options` must be valid; `out` must be writable.
 */
enum PsStatus ps_fuse(const struct PsImage *ms,
                      const struct PsImage *pan,
                      const struct PsFusionOptions *options,
                      struct PsImage **out);

/*
 Scores `fused` against a same-sized `reference`. SCC is computed when
 `pan` is not NULL.

 # Safety
 `reference` and `fused` must be live handles, `pan` NULL or live, and
 `out` writable.
 */
enum PsStatus ps_metrics(const struct PsImage *reference,
                         const struct PsImage *fused,
                         const struct PsImage *pan,
                         double ratio_hl,
                         struct PsMetrics *out);

/*
 Seeded synthetic scene: `size`-square truth and PAN, MS reduced by `ratio`.

 # Safety
 The three output pointers must be writable.
 */
enum PsStatus ps_synth(uint64_t seed,
                       size_t size,
                       size_t ratio,
                       size_t bands,
                       struct PsImage **truth,
                       struct PsImage **ms,
                       struct PsImage **pan);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PANSHARP_H */
