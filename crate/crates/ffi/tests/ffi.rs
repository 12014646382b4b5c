use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use feec_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { feec_last_error_message(buf.as_mut_ptr(), buf.len()) };
    if n == 0 {
        return String::new();
    }
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn mesh(domain: &str, res: usize) -> *mut FeecMesh {
    let name = CString::new(domain).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(
        unsafe { feec_mesh_generate(name.as_ptr(), res, &mut out) },
        FeecStatus::Ok
    );
    assert!(!out.is_null());
    out
}

fn counts(m: *const FeecMesh) -> (usize, usize, usize) {
    let (mut d, mut v, mut c) = (0, 0, 0);
    assert_eq!(
        unsafe { feec_mesh_counts(m, &mut d, &mut v, &mut c) },
        FeecStatus::Ok
    );
    (d, v, c)
}

#[test]
fn harmonic_dimension_of_the_annulus() {
    let m = mesh("square_annulus", 2);
    let (mut dim, mut mu) = (usize::MAX, f64::NAN);
    let status = unsafe { feec_harmonic(m, 1, FEEC_BC_NATURAL, &mut dim, &mut mu) };
    assert_eq!(status, FeecStatus::Ok);
    assert_eq!(dim, 1);
    assert!(mu > 0.0 && mu.is_finite());
    let status = unsafe { feec_harmonic(m, 1, 7, &mut dim, ptr::null_mut()) };
    assert_eq!(status, FeecStatus::InvalidArgument);
    assert!(last_error().contains("boundary condition"));
    unsafe { feec_mesh_free(m) };
}

#[test]
fn errors_map_to_status_codes_and_messages() {
    let mut out = ptr::null_mut();
    let bad = CString::new("torus").unwrap();
    assert_eq!(
        unsafe { feec_mesh_generate(bad.as_ptr(), 2, &mut out) },
        FeecStatus::InvalidArgument
    );
    assert!(last_error().contains("torus"));
    assert!(out.is_null());

    assert_eq!(
        unsafe { feec_mesh_generate(ptr::null(), 2, &mut out) },
        FeecStatus::NullPointer
    );
    let sq = CString::new("square").unwrap();
    assert_eq!(
        unsafe { feec_mesh_generate(sq.as_ptr(), 2, ptr::null_mut()) },
        FeecStatus::NullPointer
    );

    let missing = CString::new("/no/such/file.feecmesh").unwrap();
    assert_eq!(
        unsafe { feec_mesh_read(missing.as_ptr(), &mut out) },
        FeecStatus::Io
    );
    assert!(last_error().contains("/no/such/file.feecmesh"));

    let m = mesh("square", 1);
    assert_eq!(last_error(), "", "success clears the last error");
    let problem = CString::new("vec_laplace_k1").unwrap();
    let mut report = ptr::null_mut();
    let status = unsafe { feec_estimate(problem.as_ptr(), m, FEEC_MODE_CRUDE, &mut report) };
    assert_eq!(status, FeecStatus::InvalidArgument);
    assert!(report.is_null());
    unsafe {
        feec_mesh_free(m);
        feec_mesh_free(ptr::null_mut());
        feec_report_free(ptr::null_mut());
    }
}

#[test]
fn meshes_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("c.feecmesh").to_str().unwrap()).unwrap();
    let m = mesh("cube", 1);
    let mut fine = ptr::null_mut();
    assert_eq!(
        unsafe { feec_mesh_refine_uniform(m, &mut fine) },
        FeecStatus::Ok
    );
    assert_eq!(
        unsafe { feec_mesh_write(fine, path.as_ptr()) },
        FeecStatus::Ok
    );
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { feec_mesh_read(path.as_ptr(), &mut back) },
        FeecStatus::Ok
    );
    let (d, _, c) = counts(m);
    assert_eq!((d, c), (3, 6));
    assert_eq!(counts(fine), counts(back));
    assert_eq!(counts(fine).2, 48);
    unsafe {
        feec_mesh_free(m);
        feec_mesh_free(fine);
        feec_mesh_free(back);
    }
}

#[test]
fn estimate_matches_the_library() {
    let problem = CString::new("neumann_cos").unwrap();
    let mut report = ptr::null_mut();
    let status =
        unsafe { feec_estimate(problem.as_ptr(), ptr::null(), FEEC_MODE_SHARP, &mut report) };
    assert_eq!(status, FeecStatus::Ok, "{}", last_error());

    let spec = feec::harness::find_problem("neumann_cos").unwrap();
    let cfg = feec::harness::StudyConfig {
        mode: feec::estimator::Mode::Sharp,
        ..Default::default()
    };
    let source = spec.exact.as_ref().map(feec::estimator::ErrorSource::Exact);
    let expected = feec::harness::evaluate_level(
        &spec,
        std::sync::Arc::new(spec.base_mesh().unwrap()),
        &cfg,
        0,
        source.as_ref(),
    )
    .unwrap();

    let (mut total, mut mu, mut error) = (0.0, 0.0, 0.0);
    assert_eq!(
        unsafe { feec_report_summary(report, &mut total, &mut mu, &mut error) },
        FeecStatus::Ok
    );
    assert_eq!(total, expected.report.total());
    assert_eq!(mu, 0.0);
    assert_eq!(error, expected.row.error_h.unwrap());

    let mut cells = 0;
    assert_eq!(
        unsafe { feec_report_num_cells(report, &mut cells) },
        FeecStatus::Ok
    );
    let mut eta = vec![0.0; cells];
    assert_eq!(
        unsafe { feec_report_indicators(report, eta.as_mut_ptr(), cells - 1) },
        FeecStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { feec_report_indicators(report, eta.as_mut_ptr(), cells) },
        FeecStatus::Ok
    );
    assert_eq!(eta, expected.report.eta());

    let mut required = 0;
    assert_eq!(
        unsafe { feec_report_json(report, ptr::null_mut(), 0, &mut required) },
        FeecStatus::Ok
    );
    let mut buf = vec![0 as c_char; required];
    assert_eq!(
        unsafe { feec_report_json(report, buf.as_mut_ptr(), required - 1, ptr::null_mut()) },
        FeecStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { feec_report_json(report, buf.as_mut_ptr(), required, ptr::null_mut()) },
        FeecStatus::Ok
    );
    let json = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(json, expected.report.to_json());

    assert_eq!(
        unsafe { feec_report_csv(report, ptr::null_mut(), 0, &mut required) },
        FeecStatus::Ok
    );
    let mut buf = vec![0 as c_char; required];
    assert_eq!(
        unsafe { feec_report_csv(report, buf.as_mut_ptr(), required, ptr::null_mut()) },
        FeecStatus::Ok
    );
    let csv = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(csv, expected.report.to_csv());
    unsafe { feec_report_free(report) };
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(feec_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(include.join("feec.h")).unwrap();
    for name in [
        "feec_version",
        "feec_last_error_message",
        "feec_mesh_generate",
        "feec_mesh_read",
        "feec_mesh_write",
        "feec_mesh_refine_uniform",
        "feec_mesh_counts",
        "feec_mesh_free",
        "feec_harmonic",
        "feec_estimate",
        "feec_report_summary",
        "feec_report_num_cells",
        "feec_report_indicators",
        "feec_report_json",
        "feec_report_csv",
        "feec_report_free",
    ] {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from feec.h"
        );
    }
    let lib = target_dir().join("libfeec_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "feec.h"

int main(void) {
    FeecMesh *mesh = NULL;
    if (feec_mesh_generate("square_annulus", 2, &mesh) != FEEC_STATUS_OK) return 10;
    size_t dim = 0;
    double mu = 0.0;
    if (feec_harmonic(mesh, 1, FEEC_BC_NATURAL, &dim, &mu) != FEEC_STATUS_OK) return 11;
    FeecMesh *bad = NULL;
    if (feec_mesh_generate("torus", 2, &bad) != FEEC_STATUS_INVALID_ARGUMENT) return 12;
    char msg[128];
    if (feec_last_error_message(msg, sizeof msg) == 0) return 13;
    printf("dim=%zu\n%s\n", dim, msg);
    feec_mesh_free(mesh);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("dim=1\n"), "{text}");
    assert!(text.contains("torus"));
}
