#ifndef INSIGHTMAP_H
#define INSIGHTMAP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every function.
 */
typedef enum IgStatus {
  IG_STATUS_OK = 0,
  IG_STATUS_NULL_ARGUMENT = 1,
  IG_STATUS_INVALID_UTF8 = 2,
  IG_STATUS_EMPTY_INPUT = 3,
  IG_STATUS_NO_RECOGNIZED_SECTIONS = 4,
  IG_STATUS_INVALID_JSON = 5,
  IG_STATUS_INVALID_DOCUMENT = 6,
  IG_STATUS_INVALID_CONFIG = 7,
  IG_STATUS_UNKNOWN_PROFILE = 8,
  IG_STATUS_PANIC = 99,
} IgStatus;

/**
 * An extracted document (page texts plus label index).
 */
typedef struct IgDocument IgDocument;

/**
 * A loaded set of reading profiles.
 */
typedef struct IgRegistry IgRegistry;

/**
 * A parsed report.
 */
typedef struct IgReport IgReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *ig_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ig_version(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ig_string_free(char *s);

/**
 * Loads the built-in profile set.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum IgStatus ig_registry_default(struct IgRegistry **out);

/**
 * Loads profiles from a YAML file; the file must pass the prompt audit.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum IgStatus ig_registry_load(const char *path, struct IgRegistry **out);

/**
 * # Safety
 * `reg` must come from `ig_registry_*` or be NULL.
 */
void ig_registry_free(struct IgRegistry *reg);

/**
 * Parses model Markdown into a report. `registry` may be NULL, in which
 * case the default signal glyph aliases are used.
 *
 * # Safety
 * `markdown` must be NUL-terminated, `registry` valid or NULL, `out` valid.
 */
enum IgStatus ig_report_parse(const char *markdown,
                              const struct IgRegistry *registry,
                              struct IgReport **out);

/**
 * Decodes a report from its JSON wire form.
 *
 * # Safety
 * `json` must be NUL-terminated and `out` valid.
 */
enum IgStatus ig_report_from_json(const char *json, struct IgReport **out);

/**
 * Canonical Markdown rendering; free the result with [`ig_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` valid.
 */
enum IgStatus ig_report_render(const struct IgReport *report, char **out);

/**
 * JSON wire form; free the result with [`ig_string_free`].
 *
 * # Safety
 * `report` must be a live handle and `out` valid.
 */
enum IgStatus ig_report_to_json(const struct IgReport *report, char **out);

/**
 * Marks each evidence reference grounded or not against `doc`, in place,
 * and writes the grounded fraction (1.0 with no references) to `ratio`
 * when it is non-NULL.
 *
 * # Safety
 * `report` and `doc` must be live handles; `ratio` valid or NULL.
 */
enum IgStatus ig_report_ground(struct IgReport *report,
                               const struct IgDocument *doc,
                               double *ratio);

/**
 * Checks the report against a profile. Writes the verdict to `passed` and,
 * when `deficiencies_json` is non-NULL, a JSON array of deficiency codes.
 *
 * # Safety
 * Handles must be live, `profile_id` NUL-terminated, `passed` valid.
 */
enum IgStatus ig_report_validate(const struct IgReport *report,
                                 const struct IgRegistry *registry,
                                 const char *profile_id,
                                 bool *passed,
                                 char **deficiencies_json);

/**
 * Builds a document from page texts (page 1 first). The document hash is
 * the SHA-256 of `pdf` when given, otherwise of the joined page text.
 *
 * # Safety
 * `pdf` must point to `pdf_len` bytes or be NULL; `pages` must point to
 * `page_count` NUL-terminated strings; `out` must be valid.
 */
enum IgStatus ig_document_new(const uint8_t *pdf,
                              size_t pdf_len,
                              const char *const *pages,
                              size_t page_count,
                              struct IgDocument **out);

/**
 * JSON form of the document, including its label index.
 *
 * # Safety
 * `doc` must be a live handle and `out` valid.
 */
enum IgStatus ig_document_to_json(const struct IgDocument *doc, char **out);

/**
 * # Safety
 * `doc` must come from [`ig_document_new`] or be NULL.
 */
void ig_document_free(struct IgDocument *doc);

/**
 * Scores raw model output on the seven analysis dimensions. Writes the
 * number satisfied to `satisfied` and, when `scores_json` is non-NULL, the
 * per-dimension rows as JSON.
 *
 * # Safety
 * `raw` must be NUL-terminated, `doc` a live handle, `satisfied` valid.
 */
enum IgStatus ig_score_output(const char *raw,
                              const struct IgDocument *doc,
                              uint32_t *satisfied,
                              char **scores_json);

/**
 * # Safety
 * `report` must come from this library or be NULL.
 */
void ig_report_free(struct IgReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INSIGHTMAP_H */
