use std::ffi::{c_char, CStr, CString};
use std::f64::consts::TAU;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use vortexlab_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe {
        vl_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn field_values(field: *const VlField) -> Vec<f64> {
    let (mut nx, mut ny) = (0, 0);
    unsafe {
        assert_eq!(vl_field_shape(field, &mut nx, &mut ny), VlStatus::Ok);
        let mut out = vec![0.0; nx * ny];
        assert_eq!(vl_field_copy(field, out.as_mut_ptr(), out.len()), VlStatus::Ok);
        out
    }
}

#[test]
fn kw_manufactured_solution() {
    let (n, eps) = (32usize, 0.1);
    let h = 1.0 / n as f64;
    let mut exact = Vec::new();
    let mut w = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (i as f64 * h, j as f64 * h);
            let f = 0.3 * (TAU * x).sin() * (TAU * y).cos();
            // Δf = -2(2π)² f for this mode
            let lap = -2.0 * TAU * TAU * f;
            exact.push(f);
            w.push(eps * lap - f.exp() + (-f).exp());
        }
    }
    let ones = vec![1.0; n * n];
    unsafe {
        let mut problem = ptr::null_mut();
        assert_eq!(vl_kw_problem_new(1.0, 1.0, n, n, eps, w.as_ptr(), &mut problem), VlStatus::Ok);
        assert_eq!(vl_kw_problem_add_term(problem, 1, ones.as_ptr(), 1.0), VlStatus::Ok);
        assert_eq!(vl_kw_problem_add_term(problem, 0, ones.as_ptr(), 1.0), VlStatus::Ok);
        let mut field = ptr::null_mut();
        let mut its = 0;
        assert_eq!(vl_kw_solve(problem, 0.0, &mut field, &mut its), VlStatus::Ok);
        let f = field_values(field);
        let err = f.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        assert!(its > 0);
        assert_eq!(vl_last_error_length(), 0);
        vl_field_free(field);
        vl_kw_problem_free(problem);
    }
}

#[test]
fn error_statuses_and_messages() {
    let (xs, ys, m) = ([0.5], [0.5], [1]);
    let mut v = ptr::null_mut();
    unsafe {
        let s = vl_classical_solve(1.0, 1.0, 32, 32, 0.45, xs.as_ptr(), ys.as_ptr(), m.as_ptr(), 1, &mut v);
        assert_eq!(s, VlStatus::Bradlow);
        assert!(v.is_null());
        assert!(last_error().contains("Bradlow"));
        assert!(vl_last_error_length() > 0);

        assert_eq!(
            vl_classical_solve(1.0, 1.0, 7, 32, 0.2, xs.as_ptr(), ys.as_ptr(), m.as_ptr(), 1, &mut v),
            VlStatus::InvalidArgument
        );
        assert_eq!(
            vl_classical_solve(1.0, 1.0, 32, 32, 0.2, ptr::null(), ys.as_ptr(), m.as_ptr(), 1, &mut v),
            VlStatus::NullPointer
        );
        // an unbalanced one-sided problem has no solution
        let w = vec![1.0; 64];
        let mut p = ptr::null_mut();
        assert_eq!(vl_kw_problem_new(1.0, 1.0, 8, 8, 0.1, w.as_ptr(), &mut p), VlStatus::Ok);
        assert_eq!(vl_kw_problem_add_term(p, 1, w.as_ptr(), 1.0), VlStatus::Ok);
        let mut f = ptr::null_mut();
        assert_eq!(vl_kw_solve(p, 0.0, &mut f, ptr::null_mut()), VlStatus::Unsolvable);
        vl_kw_problem_free(p);

        let (mut k, mut xi) = (0.0, 0.0);
        assert_eq!(vl_young_bound(1.0, 1.0, 4.0, 9.0, &mut k, &mut xi), VlStatus::Ok);
        assert!((k - 2.0).abs() < 1e-15 && (xi - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(vl_young_bound(-1.0, 1.0, 4.0, 9.0, &mut k, &mut xi), VlStatus::InvalidArgument);
    }
}

#[test]
fn mixed_vortex_accessors() {
    let (px, py, pm) = ([0.25], [0.25], [1]);
    let (qx, qy, qm) = ([0.75], [0.5], [1]);
    let mut v = ptr::null_mut();
    unsafe {
        let s = vl_mixed_solve(
            1.0, 1.0, 32, 32, 0.2, 0.0,
            px.as_ptr(), py.as_ptr(), pm.as_ptr(), 1,
            qx.as_ptr(), qy.as_ptr(), qm.as_ptr(), 1,
            &mut v,
        );
        assert_eq!(s, VlStatus::Ok, "{}", last_error());
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(vl_vortex_phi_sq(v, 0, &mut a), VlStatus::Ok);
        assert_eq!(vl_vortex_phi_sq(v, 1, &mut b), VlStatus::Ok);
        let mut missing = ptr::null_mut();
        assert_eq!(vl_vortex_phi_sq(v, 2, &mut missing), VlStatus::InvalidArgument);
        assert!(missing.is_null());
        // equal degrees and τ = 0 balance the two L² norms
        let (sa, sb): (f64, f64) = (field_values(a).iter().sum(), field_values(b).iter().sum());
        assert!((sa - sb).abs() / 1024.0 < 1e-6);
        let mut curv = ptr::null_mut();
        assert_eq!(vl_vortex_curvature(v, &mut curv), VlStatus::Ok);
        let total: f64 = field_values(curv).iter().sum::<f64>() / 1024.0;
        assert!(total.abs() < 1e-9);
        vl_field_free(a);
        vl_field_free(b);
        vl_field_free(curv);
        vl_vortex_free(v);
        vl_vortex_free(ptr::null_mut());
    }
}

#[test]
fn run_config_reports_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut code = -1;
    let good = CString::new("kind = \"classical\"\nepsilon = 0.2\ndivisor = [[0.5, 0.5, 1]]\n[grid]\nnx = 32\nny = 32\n").unwrap();
    unsafe {
        assert_eq!(vl_run_config(good.as_ptr(), out.as_ptr(), &mut code), VlStatus::Ok);
        assert_eq!(code, 0);
        assert!(dir.path().join("results.csv").exists());
        let bad = CString::new("kind = \"classical\"\nepsilon = 0.5\ndivisor = [[0.5, 0.5, 1]]\n").unwrap();
        assert_eq!(vl_run_config(bad.as_ptr(), out.as_ptr(), &mut code), VlStatus::InvalidArgument);
        assert_eq!(code, 2);
        assert!(last_error().contains("Bradlow"));
    }
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(crate_dir.join("include/vortexlab.h")).unwrap();
    for symbol in ["vl_kw_solve", "vl_classical_solve", "vl_last_error_message", "VL_STATUS_BRADLOW"] {
        assert!(header.contains(symbol), "{symbol} missing from header");
    }
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping the C build");
        return;
    };
    // the static library sits next to the deps directory of this test binary
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libvortexlab_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let status = Command::new(cc)
        .arg(crate_dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
