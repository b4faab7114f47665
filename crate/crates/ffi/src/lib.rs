//! C ABI over the pure parts of `insightmap`: parsing, rendering, JSON
//! encoding, grounding, validation and scoring. Network-bound stages stay in
//! the Rust API and the HTTP service.
//!
//! Conventions:
//! - every fallible function returns an [`IgStatus`]; results go through
//!   out-pointers that are written only on [`IgStatus::Ok`];
//! - on failure, [`ig_last_error_message`] describes the error for the
//!   calling thread;
//! - handles are opaque, created by `ig_*_new`/`parse`/`load` and released
//!   with the matching `ig_*_free`; strings returned through `char **` are
//!   released with [`ig_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use insightmap::eval::{satisfied_count, score_output_with};
use insightmap::model::{content_hash, render_report, ExtractedDocument, InsightReport, PageText};
use insightmap::parser::{ground_report, parse_report_with, validate_report, ParseError};
use insightmap::prompt::ProfileRegistry;

/// Result codes shared by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    EmptyInput = 3,
    NoRecognizedSections = 4,
    InvalidJson = 5,
    InvalidDocument = 6,
    InvalidConfig = 7,
    UnknownProfile = 8,
    Panic = 99,
}

/// A parsed report.
pub struct IgReport(InsightReport);

/// An extracted document (page texts plus label index).
pub struct IgDocument(ExtractedDocument);

/// A loaded set of reading profiles.
pub struct IgRegistry(ProfileRegistry);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("NULs replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(IgStatus, String);

type FfiResult<T> = Result<T, Failure>;

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> IgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => IgStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            IgStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(IgStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(IgStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure(IgStatus::NullArgument, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> FfiResult<()> {
    if p.is_null() {
        Err(Failure(IgStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("NULs replaced")
        .into_raw()
}

fn to_json<T: serde::Serialize + ?Sized>(v: &T) -> FfiResult<String> {
    serde_json::to_string(v).map_err(|e| Failure(IgStatus::InvalidJson, e.to_string()))
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn ig_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ig_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ig_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Loads the built-in profile set.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ig_registry_default(out: *mut *mut IgRegistry) -> IgStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(IgRegistry(ProfileRegistry::shipped())));
        Ok(())
    })
}

/// Loads profiles from a YAML file; the file must pass the prompt audit.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ig_registry_load(path: *const c_char, out: *mut *mut IgRegistry) -> IgStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        out_arg(out, "out")?;
        let reg = ProfileRegistry::from_path(Path::new(path))
            .map_err(|e| Failure(IgStatus::InvalidConfig, e.to_string()))?;
        *out = Box::into_raw(Box::new(IgRegistry(reg)));
        Ok(())
    })
}

/// # Safety
/// `reg` must come from `ig_registry_*` or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ig_registry_free(reg: *mut IgRegistry) {
    if !reg.is_null() {
        drop(Box::from_raw(reg));
    }
}

/// Parses model Markdown into a report. `registry` may be NULL, in which
/// case the default signal glyph aliases are used.
///
/// # Safety
/// `markdown` must be NUL-terminated, `registry` valid or NULL, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ig_report_parse(
    markdown: *const c_char,
    registry: *const IgRegistry,
    out: *mut *mut IgReport,
) -> IgStatus {
    guard(|| {
        let raw = str_arg(markdown, "markdown")?;
        out_arg(out, "out")?;
        let default_reg;
        let aliases = match registry.as_ref() {
            Some(r) => r.0.aliases(),
            None => {
                default_reg = insightmap::model::SignalAliases::default();
                &default_reg
            }
        };
        let report = parse_report_with(raw, aliases).map_err(|e| {
            let status = match e {
                ParseError::EmptyInput => IgStatus::EmptyInput,
                ParseError::NoRecognizedSections => IgStatus::NoRecognizedSections,
            };
            Failure(status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(IgReport(report)));
        Ok(())
    })
}

/// Decodes a report from its JSON wire form.
///
/// # Safety
/// `json` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ig_report_from_json(json: *const c_char, out: *mut *mut IgReport) -> IgStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        out_arg(out, "out")?;
        let report: InsightReport = serde_json::from_str(text)
            .map_err(|e| Failure(IgStatus::InvalidJson, e.to_string()))?;
        report
            .check_invariants()
            .map_err(|e| Failure(IgStatus::InvalidJson, e.to_string()))?;
        *out = Box::into_raw(Box::new(IgReport(report)));
        Ok(())
    })
}

/// Canonical Markdown rendering; free the result with [`ig_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ig_report_render(report: *const IgReport, out: *mut *mut c_char) -> IgStatus {
    guard(|| {
        let report = ref_arg(report, "report")?;
        out_arg(out, "out")?;
        *out = c_string(render_report(&report.0));
        Ok(())
    })
}

/// JSON wire form; free the result with [`ig_string_free`].
///
/// # Safety
/// `report` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ig_report_to_json(report: *const IgReport, out: *mut *mut c_char) -> IgStatus {
    guard(|| {
        let report = ref_arg(report, "report")?;
        out_arg(out, "out")?;
        *out = c_string(to_json(&report.0)?);
        Ok(())
    })
}

/// Marks each evidence reference grounded or not against `doc`, in place,
/// and writes the grounded fraction (1.0 with no references) to `ratio`
/// when it is non-NULL.
///
/// # Safety
/// `report` and `doc` must be live handles; `ratio` valid or NULL.
#[no_mangle]
pub unsafe extern "C" fn ig_report_ground(
    report: *mut IgReport,
    doc: *const IgDocument,
    ratio: *mut f64,
) -> IgStatus {
    guard(|| {
        let report = report
            .as_mut()
            .ok_or_else(|| Failure(IgStatus::NullArgument, "report is null".into()))?;
        let doc = ref_arg(doc, "doc")?;
        report.0 = ground_report(&report.0, &doc.0);
        if !ratio.is_null() {
            *ratio = report.0.grounding_ratio();
        }
        Ok(())
    })
}

/// Checks the report against a profile. Writes the verdict to `passed` and,
/// when `deficiencies_json` is non-NULL, a JSON array of deficiency codes.
///
/// # Safety
/// Handles must be live, `profile_id` NUL-terminated, `passed` valid.
#[no_mangle]
pub unsafe extern "C" fn ig_report_validate(
    report: *const IgReport,
    registry: *const IgRegistry,
    profile_id: *const c_char,
    passed: *mut bool,
    deficiencies_json: *mut *mut c_char,
) -> IgStatus {
    guard(|| {
        let report = ref_arg(report, "report")?;
        let registry = ref_arg(registry, "registry")?;
        let id = str_arg(profile_id, "profile_id")?;
        out_arg(passed, "passed")?;
        let profile = registry
            .0
            .get(id)
            .ok_or_else(|| Failure(IgStatus::UnknownProfile, format!("unknown profile {id:?}")))?;
        let result = validate_report(&report.0, profile);
        if !deficiencies_json.is_null() {
            *deficiencies_json = c_string(to_json(&result.codes())?);
        }
        *passed = result.passed;
        Ok(())
    })
}

/// Builds a document from page texts (page 1 first). The document hash is
/// the SHA-256 of `pdf` when given, otherwise of the joined page text.
///
/// # Safety
/// `pdf` must point to `pdf_len` bytes or be NULL; `pages` must point to
/// `page_count` NUL-terminated strings; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ig_document_new(
    pdf: *const u8,
    pdf_len: usize,
    pages: *const *const c_char,
    page_count: usize,
    out: *mut *mut IgDocument,
) -> IgStatus {
    guard(|| {
        out_arg(out, "out")?;
        if pages.is_null() && page_count > 0 {
            return Err(Failure(IgStatus::NullArgument, "pages is null".into()));
        }
        let mut texts = Vec::with_capacity(page_count);
        for i in 0..page_count {
            let text = str_arg(*pages.add(i), "page")?;
            texts.push(PageText {
                page_no: i as u32 + 1,
                markdown: text.to_owned(),
            });
        }
        let hash = if pdf.is_null() {
            content_hash(texts.iter().map(|p| p.markdown.as_str()).collect::<Vec<_>>().join("\u{c}").as_bytes())
        } else {
            content_hash(std::slice::from_raw_parts(pdf, pdf_len))
        };
        let doc = ExtractedDocument::from_pages(hash, texts)
            .map_err(|e| Failure(IgStatus::InvalidDocument, e.to_string()))?;
        *out = Box::into_raw(Box::new(IgDocument(doc)));
        Ok(())
    })
}

/// JSON form of the document, including its label index.
///
/// # Safety
/// `doc` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ig_document_to_json(doc: *const IgDocument, out: *mut *mut c_char) -> IgStatus {
    guard(|| {
        let doc = ref_arg(doc, "doc")?;
        out_arg(out, "out")?;
        *out = c_string(to_json(&doc.0)?);
        Ok(())
    })
}

/// # Safety
/// `doc` must come from [`ig_document_new`] or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ig_document_free(doc: *mut IgDocument) {
    if !doc.is_null() {
        drop(Box::from_raw(doc));
    }
}

/// Scores raw model output on the seven analysis dimensions. Writes the
/// number satisfied to `satisfied` and, when `scores_json` is non-NULL, the
/// per-dimension rows as JSON.
///
/// # Safety
/// `raw` must be NUL-terminated, `doc` a live handle, `satisfied` valid.
#[no_mangle]
pub unsafe extern "C" fn ig_score_output(
    raw: *const c_char,
    doc: *const IgDocument,
    satisfied: *mut u32,
    scores_json: *mut *mut c_char,
) -> IgStatus {
    guard(|| {
        let raw = str_arg(raw, "raw")?;
        let doc = ref_arg(doc, "doc")?;
        out_arg(satisfied, "satisfied")?;
        let scores = score_output_with(raw, &doc.0, &Default::default());
        if !scores_json.is_null() {
            *scores_json = c_string(to_json(&scores)?);
        }
        *satisfied = satisfied_count(&scores) as u32;
        Ok(())
    })
}

/// # Safety
/// `report` must come from this library or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ig_report_free(report: *mut IgReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}
