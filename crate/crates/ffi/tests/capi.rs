use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use stability_lab_ffi::*;

fn take_string(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_owned();
    unsafe { sl_string_free(s) };
    out
}

fn last_error() -> String {
    let p = sl_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn bundle_round_trip() {
    let json = CString::new(r#"{"pieces": [{"rank": 1, "degree": 1, "multiplicity": 1}, {"rank": 1, "degree": 0, "multiplicity": 1}]}"#).unwrap();
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(sl_bundle_from_json(json.as_ptr(), &mut b), SlStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(sl_bundle_phi_squared(b, &mut s), SlStatus::Ok);
        assert_eq!(take_string(s), "1");
        let mut len = 0usize;
        assert_eq!(sl_bundle_hn_length(b, &mut len), SlStatus::Ok);
        assert_eq!(len, 2);
        let mut pass = false;
        assert_eq!(sl_bundle_verify(b, 0, &mut pass), SlStatus::Ok);
        assert!(pass);
        sl_bundle_free(b);
    }
}

#[test]
fn parse_errors_are_reported() {
    let json = CString::new("{\"pieces\": [").unwrap();
    let mut b = ptr::null_mut();
    let status = unsafe { sl_bundle_from_json(json.as_ptr(), &mut b) };
    assert_eq!(status, SlStatus::Parse);
    assert!(b.is_null());
    assert!(last_error().contains("line 1"));
}

#[test]
fn null_arguments_are_rejected() {
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(
            sl_bundle_from_json(ptr::null(), &mut b),
            SlStatus::NullPointer
        );
        let mut out = ptr::null_mut();
        assert_eq!(
            sl_bundle_phi_squared(ptr::null(), &mut out),
            SlStatus::NullPointer
        );
        sl_bundle_free(ptr::null_mut());
        sl_string_free(ptr::null_mut());
    }
}

#[test]
fn toric_config_invariants() {
    let json = CString::new(
        r#"{"polytope": {"n": 2, "facets": [
              {"normal": [1, 0], "offset": 0}, {"normal": [0, 1], "offset": 0},
              {"normal": [-1, 0], "offset": 1}, {"normal": [0, -1], "offset": 1}]},
            "function": {"pieces": [{"c": [0, 0], "d": 0}, {"c": [1, 1], "d": -1}]}}"#,
    )
    .unwrap();
    let ps = [2u32, 4];
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(
            sl_config_from_toric_json(json.as_ptr(), 1, 10, ps.as_ptr(), ps.len(), &mut c),
            SlStatus::Ok
        );
        for (name, want) in [
            ("b0", "1/6"),
            ("b1", "1/2"),
            ("futaki", "1/6"),
            ("N2^2", "1/18"),
            ("N4^4", "5/432"),
        ] {
            let key = CString::new(name).unwrap();
            let mut s = ptr::null_mut();
            assert_eq!(
                sl_config_get(c, key.as_ptr(), &mut s),
                SlStatus::Ok,
                "{name}"
            );
            assert_eq!(take_string(s), want, "{name}");
        }
        let key = CString::new("N6^6").unwrap();
        let mut s = ptr::null_mut();
        assert_eq!(
            sl_config_get(c, key.as_ptr(), &mut s),
            SlStatus::NotAvailable
        );
        sl_config_free(c);
    }
}

#[test]
fn spectrum_config_and_odd_exponent() {
    let weights: Vec<String> = (1..=8)
        .map(|k| {
            let mut w = vec![k; 2 * k as usize];
            w.extend(vec![-k; 2 * k as usize]);
            w.push(-2 * k);
            format!("\"{k}\": {w:?}")
        })
        .collect();
    let json = CString::new(format!(
        "{{\"n\": 1, \"weights\": {{{}}}}}",
        weights.join(", ")
    ))
    .unwrap();
    let mut c = ptr::null_mut();
    unsafe {
        let odd = [3u32];
        assert_eq!(
            sl_config_from_spectrum_json(json.as_ptr(), odd.as_ptr(), 1, &mut c),
            SlStatus::InvalidInput
        );
        let ps = [2u32];
        assert_eq!(
            sl_config_from_spectrum_json(json.as_ptr(), ps.as_ptr(), 1, &mut c),
            SlStatus::Ok
        );
        let mut v = 0.0;
        assert_eq!(sl_config_psi_hat(c, 2, &mut v), SlStatus::Ok);
        assert_eq!(v, 1.0);
        sl_config_free(c);
    }
}

#[test]
fn metric_queries() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(sl_metric_new(2.0, &mut m), SlStatus::InvalidInput);
        assert_eq!(sl_metric_new(0.0, &mut m), SlStatus::Ok);
        let mut norm = 1.0;
        assert_eq!(sl_metric_moment_norm(m, 6, 2.0, &mut norm), SlStatus::Ok);
        assert!(norm <= 1e-10);
        sl_metric_free(m);

        assert_eq!(sl_metric_new(0.5, &mut m), SlStatus::Ok);
        let (mut e4, mut e8) = (0.0, 0.0);
        assert_eq!(sl_metric_density_error(m, 4, &mut e4), SlStatus::Ok);
        assert_eq!(sl_metric_density_error(m, 8, &mut e8), SlStatus::Ok);
        assert!(e8 < e4);
        let (mut lhs, mut rhs) = (0.0, 0.0);
        assert_eq!(sl_metric_holder(m, 2.0, &mut lhs, &mut rhs), SlStatus::Ok);
        assert!(lhs <= rhs + 1e-8);
        sl_metric_free(m);
    }
}

#[test]
fn conic_chow_weight() {
    let name = CString::new("conic-b").unwrap();
    let mut v = 0.0;
    assert_eq!(unsafe { sl_conic_fch(name.as_ptr(), &mut v) }, SlStatus::Ok);
    assert!((v - 1.0 / 3.0).abs() <= 1e-6);
    let bad = CString::new("conic-q").unwrap();
    assert_eq!(
        unsafe { sl_conic_fch(bad.as_ptr(), &mut v) },
        SlStatus::InvalidInput
    );
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/stability_lab.h")
}

#[test]
fn header_declares_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "sl_last_error",
        "sl_string_free",
        "sl_bundle_from_json",
        "sl_bundle_verify",
        "sl_config_from_toric_json",
        "sl_config_get",
        "sl_metric_moment_norm",
        "sl_conic_fch",
        "typedef struct SlBundle SlBundle",
        "SL_STATUS_OK = 0",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = std::env::temp_dir().join(format!("sl-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ SlBundle *b = 0; return sl_bundle_from_json(\"{{}}\", &b) == SL_STATUS_OK; }}\n",
            header().display()
        ),
    )
    .unwrap();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(cc.status.success());
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    if !lib_dir.join("libstability_lab_ffi.so").exists() {
        eprintln!("shared library not built; skipping");
        return;
    }
    let dir = std::env::temp_dir().join(format!("sl-ffi-link-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include <string.h>
#include "stability_lab.h"

int main(void) {
    SlBundle *b = NULL;
    const char *json = "{\"pieces\": [{\"rank\": 1, \"degree\": 3, \"multiplicity\": 1},"
                       " {\"rank\": 2, \"degree\": 1, \"multiplicity\": 2},"
                       " {\"rank\": 1, \"degree\": -2, \"multiplicity\": 1}]}";
    if (sl_bundle_from_json(json, &b) != SL_STATUS_OK) return 1;
    char *phi2 = NULL;
    if (sl_bundle_phi_squared(b, &phi2) != SL_STATUS_OK) return 2;
    int ok = strcmp(phi2, "14") == 0;
    printf("phi^2 = %s\n", phi2);
    sl_string_free(phi2);
    sl_bundle_free(b);
    SlBundle *bad = NULL;
    if (sl_bundle_from_json("[", &bad) != SL_STATUS_PARSE) return 3;
    printf("error: %s\n", sl_last_error());
    return ok ? 0 : 4;
}
"#,
    )
    .unwrap();
    let bin = dir.join("probe");
    let include = header().parent().unwrap().to_path_buf();
    let out = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&lib_dir)
        .args(["-lstability_lab_ffi", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let run = Command::new(&bin)
        .env("LD_LIBRARY_PATH", &lib_dir)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(
        run.status.success(),
        "exit {:?}: {stdout}",
        run.status.code()
    );
    assert!(stdout.contains("phi^2 = 14"));
}
