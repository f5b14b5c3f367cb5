#ifndef LIVERSEG_H
#define LIVERSEG_H

/* Generated by cbindgen from liverseg-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum LsStatus {
  LS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  LS_STATUS_NULL_ARGUMENT = 1,
  /**
   * A parameter was outside its documented range.
   */
  LS_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Reading or writing a file failed.
   */
  LS_STATUS_IO_ERROR = 3,
  /**
   * Input bytes did not parse as the expected format.
   */
  LS_STATUS_MALFORMED_INPUT = 4,
  /**
   * The pipeline found no acceptable liver candidate.
   */
  LS_STATUS_LIVER_NOT_FOUND = 5,
  /**
   * An internal panic was caught at the boundary.
   */
  LS_STATUS_PANIC = 6,
} LsStatus;

/**
 * Structuring element shape for [`ls_config_set_structuring_element`].
 */
typedef enum LsSeShape {
  LS_SE_SHAPE_SQUARE = 0,
  LS_SE_SHAPE_CROSS = 1,
} LsSeShape;

/**
 * Opaque pipeline configuration handle.
 */
typedef struct LsConfig LsConfig;

/**
 * Opaque grayscale image handle.
 */
typedef struct LsImage LsImage;

/**
 * Opaque binary mask handle.
 */
typedef struct LsMask LsMask;

/**
 * Opaque segmentation result handle.
 */
typedef struct LsResult LsResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *ls_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *ls_version(void);

/**
 * Parses a binary PGM (P5) from memory.
 *
 * # Safety
 * `bytes` must be valid for `len` reads; `out` must be a valid output
 * slot.
 */
enum LsStatus ls_image_read_pgm(const uint8_t *bytes, size_t len, struct LsImage **out);

/**
 * Reads a binary PGM file.
 *
 * # Safety
 * `path` must be a valid NUL-terminated string; `out` a valid slot.
 */
enum LsStatus ls_image_read_pgm_file(const char *path, struct LsImage **out);

/**
 * Wraps an 8-bit pixel buffer (row-major, length `width * height`).
 *
 * # Safety
 * `pixels` must be valid for `width * height` reads; `out` a valid slot.
 */
enum LsStatus ls_image_from_gray8(const uint8_t *pixels,
                                  size_t width,
                                  size_t height,
                                  struct LsImage **out);

/**
 * Writes the image as a binary PGM file.
 *
 * # Safety
 * Pointers must be valid; `path` NUL-terminated.
 */
enum LsStatus ls_image_write_pgm_file(const struct LsImage *img, const char *path);

/**
 * Rescales any image to the 8-bit intensity axis the pipeline expects.
 *
 * # Safety
 * Pointers must be valid.
 */
enum LsStatus ls_image_rescale_8bit(const struct LsImage *img, struct LsImage **out);

/**
 * Image width in pixels; 0 if `img` is null.
 *
 * # Safety
 * `img` must be null or valid.
 */
size_t ls_image_width(const struct LsImage *img);

/**
 * Image height in pixels; 0 if `img` is null.
 *
 * # Safety
 * `img` must be null or valid.
 */
size_t ls_image_height(const struct LsImage *img);

/**
 * Declared intensity ceiling; 0 if `img` is null.
 *
 * # Safety
 * `img` must be null or valid.
 */
uint16_t ls_image_max_value(const struct LsImage *img);

/**
 * Frees an image handle. Null is ignored.
 *
 * # Safety
 * `img` must be null or a pointer previously returned by this library
 * and not yet freed.
 */
void ls_image_free(struct LsImage *img);

/**
 * Builds a mask from a row-major 0/1 byte buffer.
 *
 * # Safety
 * `bits` must be valid for `width * height` reads; `out` a valid slot.
 */
enum LsStatus ls_mask_from_bits(const uint8_t *bits,
                                size_t width,
                                size_t height,
                                struct LsMask **out);

/**
 * Copies the mask's 0/1 bytes into `buf` (length must be exactly
 * `width * height`).
 *
 * # Safety
 * `mask` must be valid; `buf` valid for `len` writes.
 */
enum LsStatus ls_mask_copy_bits(const struct LsMask *mask, uint8_t *buf, size_t len);

/**
 * Renders the mask as a 0/255 PGM file.
 *
 * # Safety
 * Pointers must be valid; `path` NUL-terminated.
 */
enum LsStatus ls_mask_write_pgm_file(const struct LsMask *mask, const char *path);

/**
 * Mask width in pixels; 0 if null.
 *
 * # Safety
 * `mask` must be null or valid.
 */
size_t ls_mask_width(const struct LsMask *mask);

/**
 * Mask height in pixels; 0 if null.
 *
 * # Safety
 * `mask` must be null or valid.
 */
size_t ls_mask_height(const struct LsMask *mask);

/**
 * Number of foreground pixels; 0 if null.
 *
 * # Safety
 * `mask` must be null or valid.
 */
size_t ls_mask_count_ones(const struct LsMask *mask);

/**
 * Frees a mask handle. Null is ignored.
 *
 * # Safety
 * `mask` must be null or a pointer previously returned by this library
 * and not yet freed.
 */
void ls_mask_free(struct LsMask *mask);

/**
 * Creates a configuration with the built-in defaults.
 *
 * # Safety
 * `out` must be a valid slot.
 */
enum LsStatus ls_config_new(struct LsConfig **out);

/**
 * Sets the intensity band `[s1, s2]`.
 *
 * # Safety
 * `cfg` must be valid.
 */
enum LsStatus ls_config_set_band(struct LsConfig *cfg, uint8_t s1, uint8_t s2);

/**
 * Sets the median window side (3, 5, 7 or 9).
 *
 * # Safety
 * `cfg` must be valid.
 */
enum LsStatus ls_config_set_median_window(struct LsConfig *cfg, size_t window);

/**
 * Sets the closing's structuring element.
 *
 * # Safety
 * `cfg` must be valid.
 */
enum LsStatus ls_config_set_structuring_element(struct LsConfig *cfg,
                                                enum LsSeShape shape,
                                                size_t radius);

/**
 * Sets the minimum component area as a fraction of the image area.
 *
 * # Safety
 * `cfg` must be valid.
 */
enum LsStatus ls_config_set_min_area_fraction(struct LsConfig *cfg, double fraction);

/**
 * Frees a configuration handle. Null is ignored.
 *
 * # Safety
 * `cfg` must be null or a pointer previously returned by this library
 * and not yet freed.
 */
void ls_config_free(struct LsConfig *cfg);

/**
 * Runs the full pipeline on an 8-bit image. `cfg` may be null for the
 * defaults. Returns `LS_STATUS_LIVER_NOT_FOUND` when no acceptable
 * candidate exists.
 *
 * # Safety
 * Pointers must be valid (or null where documented).
 */
enum LsStatus ls_segment(const struct LsImage *img,
                         const struct LsConfig *cfg,
                         struct LsResult **out);

/**
 * Pixel count of the greatest connected component (stage d); 0 if null.
 *
 * # Safety
 * `result` must be null or valid.
 */
uint64_t ls_result_area_pixels(const struct LsResult *result);

/**
 * Clones the final liver mask (stage e) into a new handle.
 *
 * # Safety
 * Pointers must be valid.
 */
enum LsStatus ls_result_liver_mask(const struct LsResult *result, struct LsMask **out);

/**
 * Clones the contour mask (stage f) into a new handle.
 *
 * # Safety
 * Pointers must be valid.
 */
enum LsStatus ls_result_contour(const struct LsResult *result, struct LsMask **out);

/**
 * Writes `stage_a.pgm` .. `stage_g.ppm` plus `result.json` into `dir`.
 *
 * # Safety
 * Pointers must be valid; `dir` NUL-terminated.
 */
enum LsStatus ls_result_dump_stages(const struct LsResult *result, const char *dir);

/**
 * Frees a result handle. Null is ignored.
 *
 * # Safety
 * `result` must be null or a pointer previously returned by this
 * library and not yet freed.
 */
void ls_result_free(struct LsResult *result);

/**
 * Dice coefficient of two masks of equal dimensions.
 *
 * # Safety
 * Pointers must be valid.
 */
enum LsStatus ls_dice(const struct LsMask *a, const struct LsMask *b, double *out);

/**
 * Jaccard index of two masks of equal dimensions.
 *
 * # Safety
 * Pointers must be valid.
 */
enum LsStatus ls_jaccard(const struct LsMask *a, const struct LsMask *b, double *out);

/**
 * Generates a deterministic synthetic slice and its ground truth.
 * Liver and distractor intensities fall inside `[s1, s2]`; dimensions
 * must be at least 64.
 *
 * # Safety
 * Output slots must be valid.
 */
enum LsStatus ls_phantom(size_t width,
                         size_t height,
                         uint64_t seed,
                         double noise_sigma,
                         uint8_t s1,
                         uint8_t s2,
                         struct LsImage **out_image,
                         struct LsMask **out_truth);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIVERSEG_H */
