use std::ffi::{CStr, CString};
use std::ptr;

use intergrow_ffi::*;

fn combination(c: f64, shifts: &[i64], alphas: &[&str]) -> (IgStatus, *mut IgCombination) {
    let owned: Vec<CString> = alphas.iter().map(|a| CString::new(*a).unwrap()).collect();
    let ptrs: Vec<*const i8> = owned.iter().map(|s| s.as_ptr()).collect();
    let mut h = ptr::null_mut();
    let st = unsafe { ig_combination_new(c, shifts.as_ptr(), ptrs.as_ptr().cast(), shifts.len(), &mut h) };
    (st, h)
}

fn last_error() -> String {
    let p = ig_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn partial_sum_matches_library() {
    let (st, h) = combination(0.3, &[0, 1], &["1", "-1"]);
    assert_eq!(st, IgStatus::Ok);
    let mut s = IgSum::default();
    assert_eq!(unsafe { ig_partial_sum(h, 5000, 0, 0, 1, &mut s) }, IgStatus::Ok);
    let comb = intergrow::growth::ShiftedCombination::new(
        intergrow::growth::GrowthParams::new(0.3).unwrap(),
        vec![intergrow::growth::Coefficient::int(1), intergrow::growth::Coefficient::int(-1)],
        vec![0, 1],
    )
    .unwrap();
    let r = intergrow::expsum::partial_sum(
        &intergrow::expsum::SequenceSpec::smooth(&comb),
        5000,
        intergrow::precision::PrecisionChoice::Auto,
        Some(1),
    )
    .unwrap();
    assert_eq!((s.re, s.im, s.precision_bits), (r.sum.re, r.sum.im, r.precision_bits));
    assert!(ig_last_error().is_null());
    unsafe { ig_combination_free(h) };
}

#[test]
fn domain_errors_carry_a_message() {
    let (st, h) = combination(0.6, &[0], &["1"]);
    assert_eq!(st, IgStatus::Domain);
    assert!(h.is_null());
    assert!(last_error().contains("c out of (0,1/2)"));

    let mut f = 0.0;
    assert_eq!(unsafe { ig_growth_frac(1000, 0.3, 100, &mut f) }, IgStatus::Domain);
    assert_eq!(unsafe { ig_growth_frac(1000, 0.3, 0, ptr::null_mut()) }, IgStatus::NullPointer);
    assert_eq!(unsafe { ig_partial_sum(ptr::null(), 10, 0, 0, 1, ptr::null_mut()) }, IgStatus::NullPointer);
}

#[test]
fn bad_coefficient_is_input_error() {
    let (st, _) = combination(0.3, &[0], &["sqrt("]);
    assert_eq!(st, IgStatus::Input, "{}", last_error());
}

#[test]
fn change_of_basis_json() {
    let (_, h) = combination(0.3, &[0, 1, 2], &["1", "-2", "1"]);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ig_change_of_basis(h, &mut out) }, IgStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    assert_eq!(v["tau"], 2);
    assert_eq!(v["coefficients"], serde_json::json!(["0", "0", "1"]));
    unsafe {
        ig_string_free(out);
        ig_combination_free(h);
    }
}

#[test]
fn growth_frac_is_in_unit_interval() {
    let mut f = -1.0;
    assert_eq!(unsafe { ig_growth_frac(12345, 0.3, 0, &mut f) }, IgStatus::Ok);
    assert!((0.0..1.0).contains(&f));
}

#[test]
fn run_command_through_json() {
    let cmd = CString::new("decompose").unwrap();
    let cfg = CString::new(r#"{"c":0.3,"shifts":[0,1],"alphas":["2","-3"]}"#).unwrap();
    let mut report = ptr::null_mut();
    let mut passed = 0;
    assert_eq!(unsafe { ig_run(cmd.as_ptr(), cfg.as_ptr(), &mut report, &mut passed) }, IgStatus::Ok);
    assert_eq!(passed, 1);
    let text = unsafe { CStr::from_ptr(report) }.to_string_lossy().into_owned();
    assert!(text.contains("\"tau\": 0"), "{text}");
    unsafe { ig_string_free(report) };

    let bad = CString::new(r#"{"c":0.3,"nonsense":1}"#).unwrap();
    assert_eq!(unsafe { ig_run(cmd.as_ptr(), bad.as_ptr(), &mut report, &mut passed) }, IgStatus::Json);
    assert!(report.is_null());
    let unknown = CString::new("nope").unwrap();
    assert_eq!(unsafe { ig_run(unknown.as_ptr(), cfg.as_ptr(), &mut report, &mut passed) }, IgStatus::Input);
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ig_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// The generated header must declare every exported function and compile
/// as C.
#[test]
fn header_is_current_and_compiles() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/intergrow.h")).unwrap();
    let src = std::fs::read_to_string(dir.join("src/lib.rs")).unwrap();
    for line in src.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(header.contains(&format!("{name}(")), "{name} missing from header");
        }
    }
    let Ok(cc) = which_cc() else { return };
    let tmp = tempdir();
    let c = tmp.join("use.c");
    std::fs::write(
        &c,
        "#include \"intergrow.h\"\nint main(void) { IgSum s; IgCombination *h = 0; \
         return (int)ig_partial_sum(h, 10, 0, 0, 1, &s) + (ig_last_error() == 0); }\n",
    )
    .unwrap();
    let st = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&c)
        .status()
        .unwrap();
    assert!(st.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if std::process::Command::new(cc).arg("--version").output().is_ok() {
            return Ok(cc);
        }
    }
    Err(())
}

fn tempdir() -> std::path::PathBuf {
    let d = std::env::temp_dir().join(format!("intergrow-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
