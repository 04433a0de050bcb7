use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use aesthetics_core::{metrics, render, Drawing, Graph, Point};
use aesthetics_ffi::*;

fn k4_crossed() -> Drawing {
    Drawing::straight(
        Graph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap(),
        vec![
            Point::new(100.0, 100.0),
            Point::new(900.0, 100.0),
            Point::new(900.0, 900.0),
            Point::new(100.0, 900.0),
        ],
    )
}

fn cstring(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn take(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string();
    unsafe { aes_string_free(p) };
    s
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(aes_last_error()) }.to_string_lossy().into_owned()
}

fn load(d: &Drawing) -> *mut AesDrawing {
    let json = cstring(&serde_json::to_string(d).unwrap());
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { aes_drawing_from_json(json.as_ptr(), &mut h) }, AesStatus::Ok);
    h
}

#[test]
fn drawing_round_trip_and_metrics() {
    let d = k4_crossed();
    let h = load(&d);
    let mut json = ptr::null_mut();
    assert_eq!(unsafe { aes_drawing_to_json(h, &mut json) }, AesStatus::Ok);
    assert_eq!(serde_json::from_str::<Drawing>(&take(json)).unwrap(), d);

    let (mut n, mut m) = (0, 0);
    unsafe { aes_drawing_size(h, &mut n, &mut m) };
    assert_eq!((n, m), (4, 6));
    let mut crossings = 0;
    assert_eq!(unsafe { aes_drawing_crossings(h, &mut crossings) }, AesStatus::Ok);
    assert_eq!(crossings, 1);

    for e in aesthetics_core::catalog() {
        let id = cstring(e.id.as_str());
        let mut r = AesMetricResult::default();
        assert_eq!(unsafe { aes_metric_evaluate(h, id.as_ptr(), &mut r) }, AesStatus::Ok);
        let lib = metrics::evaluate(&d, e.id).unwrap();
        assert_eq!((r.raw.to_bits(), r.score.to_bits(), r.defined), (lib.raw.to_bits(), lib.score.to_bits(), lib.defined));
    }
    let mut report = ptr::null_mut();
    unsafe { aes_metrics_json(h, &mut report) };
    assert_eq!(take(report), metrics::evaluate_all(&d).unwrap().to_json());
    let mut svg = ptr::null_mut();
    unsafe { aes_render_svg(h, &mut svg) };
    assert_eq!(take(svg), render::render_svg(&d));
    unsafe { aes_drawing_free(h) };
}

#[test]
fn failures_set_status_and_message() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { aes_drawing_from_json(ptr::null(), &mut h) }, AesStatus::NullPointer);
    let bad = cstring("{not json");
    assert_eq!(unsafe { aes_drawing_from_json(bad.as_ptr(), &mut h) }, AesStatus::ParseError);
    let mut d = k4_crossed();
    d.positions.pop();
    let short = cstring(&serde_json::to_string(&d).unwrap());
    assert_eq!(unsafe { aes_drawing_from_json(short.as_ptr(), &mut h) }, AesStatus::InvalidDrawing);
    assert!(last_error().contains("positions"));
    assert!(h.is_null());

    let h = load(&k4_crossed());
    let unknown = cstring("prettiness");
    let mut r = AesMetricResult::default();
    assert_eq!(unsafe { aes_metric_evaluate(h, unknown.as_ptr(), &mut r) }, AesStatus::UnknownMetric);
    assert!(last_error().contains("prettiness"));
    assert_eq!(unsafe { aes_drawing_crossings(h, ptr::null_mut()) }, AesStatus::NullPointer);
    unsafe { aes_drawing_free(h) };
    unsafe { aes_drawing_free(ptr::null_mut()) };
}

#[test]
fn catalog_and_generation() {
    assert_eq!(aes_catalog_len(), 31);
    let first = unsafe { CStr::from_ptr(aes_catalog_id(0)) }.to_str().unwrap();
    assert_eq!(first, aesthetics_core::catalog()[0].id.as_str());
    assert!(aes_catalog_id(31).is_null());

    let mut h = ptr::null_mut();
    assert_eq!(unsafe { aes_drawing_generate(7, &mut h) }, AesStatus::Ok);
    let (mut n, mut m) = (0, 0);
    unsafe { aes_drawing_size(h, &mut n, &mut m) };
    assert!((5..=69).contains(&m));
    unsafe { aes_drawing_free(h) };
}

#[test]
fn optimize_removes_k4_crossings() {
    let graph = cstring(&serde_json::to_string(&k4_crossed().graph).unwrap());
    let objective = cstring(r#"{"weights": {"number_of_edge_crossings": 1.0}}"#);
    let mut h = ptr::null_mut();
    let mut value = 0.0;
    let status = unsafe { aes_optimize(graph.as_ptr(), objective.as_ptr(), 1, 10_000, &mut h, &mut value) };
    assert_eq!(status, AesStatus::Ok);
    assert_eq!(value, 1.0);
    let mut crossings = 9;
    unsafe { aes_drawing_crossings(h, &mut crossings) };
    assert_eq!(crossings, 0);
    unsafe { aes_drawing_free(h) };
}

#[test]
fn interview_through_handles() {
    let mut study = ptr::null_mut();
    assert_eq!(unsafe { aes_study_generate(3, 12, &mut study) }, AesStatus::Ok);
    let (id, who) = (cstring("s1"), cstring("p1"));
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { aes_session_start(study, id.as_ptr(), who.as_ptr(), 5, &mut s) }, AesStatus::Ok);
    let mut finished = false;
    let mut rounds = 0;
    while !finished {
        let mut triad = ptr::null_mut();
        assert_eq!(unsafe { aes_session_next_triad(s, &mut triad) }, AesStatus::Ok);
        let t: serde_json::Value = serde_json::from_str(&take(triad)).unwrap();
        assert_eq!(t["elements"].as_array().unwrap().len(), 3);
        if rounds == 0 {
            let (a, b) = (cstring("simple"), cstring("cluttered"));
            let mut cid = ptr::null_mut();
            assert_eq!(
                unsafe { aes_session_record_construct(s, 0, a.as_ptr(), b.as_ptr(), &mut cid) },
                AesStatus::Ok
            );
            assert_eq!(take(cid), "s1-c1");
        }
        assert_eq!(unsafe { aes_session_complete_triad(s, &mut finished) }, AesStatus::Ok);
        rounds += 1;
    }
    assert_eq!(rounds, 4);
    let mut triad = ptr::null_mut();
    assert_eq!(unsafe { aes_session_next_triad(s, &mut triad) }, AesStatus::SessionFinished);
    let mut export = ptr::null_mut();
    unsafe { aes_session_export_json(s, &mut export) };
    assert!(take(export).contains("\"simple\""));
    unsafe {
        aes_session_free(s);
        aes_study_free(study);
    }
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<this test>
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/aesthetics.h")).unwrap();
    let source = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|l| l.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 20);
    for f in exports {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
}

#[test]
fn c_program_links_against_the_header() {
    let lib = target_dir().join("libaesthetics_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("catalog 31 "));
}
