use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

use insightmap_ffi::*;

const GUIDED: &str = "## Introduction\n- sets the scene\n\
## Methods\n- attention only [INNOVATION]\n\
## Results\n- strong scores [EVIDENCE]\n\
## Key Contributions\n- **Attention-only model**: drops recurrence\n\
## Evidence\n- Table 2: headline numbers\n- Table 99: does not exist\n";

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Takes ownership of a string returned by the library.
unsafe fn take(s: *mut std::os::raw::c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    ig_string_free(s);
    out
}

unsafe fn last_error() -> String {
    let p = ig_last_error_message();
    assert!(!p.is_null(), "an error message was recorded");
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

unsafe fn parse(md: &str) -> *mut IgReport {
    let mut report = ptr::null_mut();
    assert_eq!(ig_report_parse(c(md).as_ptr(), ptr::null(), &mut report), IgStatus::Ok);
    report
}

unsafe fn document(pages: &[&str]) -> *mut IgDocument {
    let owned: Vec<CString> = pages.iter().map(|p| c(p)).collect();
    let ptrs: Vec<_> = owned.iter().map(|p| p.as_ptr()).collect();
    let mut doc = ptr::null_mut();
    assert_eq!(
        ig_document_new(ptr::null(), 0, ptrs.as_ptr(), ptrs.len(), &mut doc),
        IgStatus::Ok
    );
    doc
}

#[test]
fn parse_render_json_round_trip() {
    unsafe {
        let report = parse(GUIDED);
        let mut md = ptr::null_mut();
        assert_eq!(ig_report_render(report, &mut md), IgStatus::Ok);
        let md = take(md);
        assert_eq!(md, insightmap::model::render_report(&insightmap::parser::parse_report(GUIDED).unwrap()));

        let mut json = ptr::null_mut();
        assert_eq!(ig_report_to_json(report, &mut json), IgStatus::Ok);
        let json = take(json);
        let mut back = ptr::null_mut();
        assert_eq!(ig_report_from_json(c(&json).as_ptr(), &mut back), IgStatus::Ok);
        let mut md2 = ptr::null_mut();
        assert_eq!(ig_report_render(back, &mut md2), IgStatus::Ok);
        assert_eq!(take(md2), md);

        ig_report_free(report);
        ig_report_free(back);
    }
}

#[test]
fn grounding_and_validation() {
    unsafe {
        let report = parse(GUIDED);
        let doc = document(&["Intro text.", "Table 2 reports BLEU."]);
        let mut ratio = -1.0;
        assert_eq!(ig_report_ground(report, doc, &mut ratio), IgStatus::Ok);
        assert_eq!(ratio, 0.5);

        let mut reg = ptr::null_mut();
        assert_eq!(ig_registry_default(&mut reg), IgStatus::Ok);
        let profile = c(insightmap::prompt::DEFAULT_PROFILE_ID);
        let (mut passed, mut codes) = (false, ptr::null_mut());
        assert_eq!(ig_report_validate(report, reg, profile.as_ptr(), &mut passed, &mut codes), IgStatus::Ok);
        let codes: Vec<String> = serde_json::from_str(&take(codes)).unwrap();
        assert_eq!(passed, codes.is_empty(), "{codes:?}");

        assert_eq!(
            ig_report_validate(report, reg, c("no-such-profile").as_ptr(), &mut passed, ptr::null_mut()),
            IgStatus::UnknownProfile
        );
        assert!(last_error().contains("no-such-profile"));

        let mut json = ptr::null_mut();
        assert_eq!(ig_document_to_json(doc, &mut json), IgStatus::Ok);
        assert!(take(json).contains("Table 2"));

        ig_registry_free(reg);
        ig_document_free(doc);
        ig_report_free(report);
    }
}

#[test]
fn scoring_matches_the_library() {
    unsafe {
        let doc = document(&["Table 2 reports BLEU."]);
        let (mut n, mut rows) = (0u32, ptr::null_mut());
        assert_eq!(ig_score_output(c(GUIDED).as_ptr(), doc, &mut n, &mut rows), IgStatus::Ok);
        let rows: serde_json::Value = serde_json::from_str(&take(rows)).unwrap();
        assert_eq!(rows.as_array().unwrap().len(), 7);

        let direct = insightmap::model::ExtractedDocument::from_pages(
            "x".into(),
            vec![insightmap::model::PageText { page_no: 1, markdown: "Table 2 reports BLEU.".into() }],
        )
        .unwrap();
        let expected = insightmap::eval::satisfied_count(&insightmap::eval::score_output(GUIDED, &direct));
        assert_eq!(n as usize, expected);

        assert_eq!(ig_score_output(c("ok.").as_ptr(), doc, &mut n, ptr::null_mut()), IgStatus::Ok);
        assert_eq!(n, 0);
        ig_document_free(doc);
    }
}

#[test]
fn error_codes_and_null_arguments() {
    unsafe {
        let mut report = ptr::null_mut();
        assert_eq!(ig_report_parse(c("  ").as_ptr(), ptr::null(), &mut report), IgStatus::EmptyInput);
        assert_eq!(
            ig_report_parse(c("plain prose only").as_ptr(), ptr::null(), &mut report),
            IgStatus::NoRecognizedSections
        );
        assert!(report.is_null(), "out untouched on failure");
        assert_eq!(ig_report_parse(ptr::null(), ptr::null(), &mut report), IgStatus::NullArgument);
        assert!(last_error().contains("markdown"));
        assert_eq!(ig_report_parse(c("## Methods").as_ptr(), ptr::null(), ptr::null_mut()), IgStatus::NullArgument);

        let bad_utf8 = [0xffu8, 0xfe, 0];
        assert_eq!(
            ig_report_parse(bad_utf8.as_ptr().cast(), ptr::null(), &mut report),
            IgStatus::InvalidUtf8
        );
        assert_eq!(ig_report_from_json(c("{nope").as_ptr(), &mut report), IgStatus::InvalidJson);

        let mut doc = ptr::null_mut();
        assert_eq!(ig_document_new(ptr::null(), 0, ptr::null(), 0, &mut doc), IgStatus::InvalidDocument);
        assert_eq!(ig_document_new(ptr::null(), 0, ptr::null(), 2, &mut doc), IgStatus::NullArgument);

        let mut reg = ptr::null_mut();
        assert_eq!(ig_registry_load(c("/nonexistent.yaml").as_ptr(), &mut reg), IgStatus::InvalidConfig);

        let mut s = ptr::null_mut();
        assert_eq!(ig_report_render(ptr::null(), &mut s), IgStatus::NullArgument);

        // freeing NULL is a no-op
        ig_report_free(ptr::null_mut());
        ig_document_free(ptr::null_mut());
        ig_registry_free(ptr::null_mut());
        ig_string_free(ptr::null_mut());

        assert_eq!(
            CStr::from_ptr(ig_version()).to_str().unwrap(),
            env!("CARGO_PKG_VERSION")
        );
    }
}

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/insightmap.h")).unwrap();
    let source = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split_once("extern \"C\" fn "))
        .map(|(_, rest)| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15, "{exports:?}");
    for name in exports {
        assert!(header.contains(&format!("{name}(")), "header lacks {name}");
    }
    for opaque in ["typedef struct IgReport IgReport;", "typedef struct IgDocument IgDocument;"] {
        assert!(header.contains(opaque));
    }
    assert!(header.contains("IG_STATUS_NO_RECOGNIZED_SECTIONS = 4"));
}

/// Directory holding the built library artifacts (`target/<profile>`).
fn artifact_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    exe.parent()?.parent().map(Path::to_owned)
}

#[test]
fn c_program_links_against_the_static_library() {
    let Some(dir) = artifact_dir() else { return };
    let lib = dir.join("libinsightmap_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.is_file() || std::process::Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping C link test: no {} or no C compiler", lib.display());
        return;
    }
    let out_dir = tempfile_dir();
    let exe = out_dir.join("smoke");
    let status = std::process::Command::new(&cc)
        .arg(crate_dir().join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = std::process::Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "smoke failed: {}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
    let _ = std::fs::remove_dir_all(out_dir);
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("insightmap-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
