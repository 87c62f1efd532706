use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use mhdbl_ffi::*;

const CONFIG: &str = "grid.nx = 8\ngrid.ny = 65\ngrid.ymax = 20\nrun.sample_interval = 0.1\n";

fn last_error() -> String {
    unsafe { CStr::from_ptr(mhdbl_last_error()) }.to_string_lossy().into_owned()
}

fn new_sim(text: &str) -> *mut MhdblSim {
    let c = CString::new(text).unwrap();
    let mut sim = ptr::null_mut();
    assert_eq!(unsafe { mhdbl_sim_new(c.as_ptr(), &mut sim) }, MhdblStatus::Ok, "{}", last_error());
    sim
}

#[test]
fn run_and_read_samples() {
    let sim = new_sim(CONFIG);
    unsafe {
        assert_eq!(mhdbl_sim_run_until(sim, 0.5), MhdblStatus::Ok);
        let mut t = 0.0;
        assert_eq!(mhdbl_sim_time(sim, &mut t), MhdblStatus::Ok);
        assert!((t - 0.5).abs() < 1e-12);
        let mut n = 0;
        assert_eq!(mhdbl_sim_sample_count(sim, &mut n), MhdblStatus::Ok);
        assert_eq!(n, 6);
        let mut s = MhdblSample::default();
        assert_eq!(mhdbl_sim_sample(sim, n - 1, &mut s), MhdblStatus::Ok);
        let mut theta = 0.0;
        assert_eq!(mhdbl_sim_theta(sim, &mut theta), MhdblStatus::Ok);
        assert_eq!(s.theta, theta);
        assert!(s.norm_ub > 0.0 && s.radius < 0.1);
        assert_eq!(mhdbl_sim_sample(sim, n, &mut s), MhdblStatus::Config);
        assert!(last_error().contains("out of range"));
        assert_eq!(mhdbl_sim_step(sim, 3), MhdblStatus::Ok);
        assert_eq!(mhdbl_sim_time(sim, &mut t), MhdblStatus::Ok);
        assert!(t > 0.5);
        mhdbl_sim_free(sim);
    }
}

#[test]
fn checkpoint_round_trip_through_handles() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("s.ckpt").to_str().unwrap()).unwrap();
    let sim = new_sim(CONFIG);
    unsafe {
        assert_eq!(mhdbl_sim_run_until(sim, 0.3), MhdblStatus::Ok);
        assert_eq!(mhdbl_sim_save_checkpoint(sim, path.as_ptr()), MhdblStatus::Ok);
        let mut copy = ptr::null_mut();
        assert_eq!(mhdbl_sim_load_checkpoint(path.as_ptr(), &mut copy), MhdblStatus::Ok);
        for h in [sim, copy] {
            assert_eq!(mhdbl_sim_run_until(h, 0.6), MhdblStatus::Ok);
        }
        let (mut a, mut b) = (MhdblSample::default(), MhdblSample::default());
        let mut n = 0;
        mhdbl_sim_sample_count(sim, &mut n);
        mhdbl_sim_sample(sim, n - 1, &mut a);
        mhdbl_sim_sample(copy, n - 1, &mut b);
        assert_eq!(a, b);
        mhdbl_sim_free(sim);
        mhdbl_sim_free(copy);
    }
    let missing = CString::new(dir.path().join("none.ckpt").to_str().unwrap()).unwrap();
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { mhdbl_sim_load_checkpoint(missing.as_ptr(), &mut h) }, MhdblStatus::Io);
    assert!(h.is_null());
}

#[test]
fn errors_are_reported_with_codes() {
    let mut sim = ptr::null_mut();
    unsafe {
        assert_eq!(mhdbl_sim_new(ptr::null(), &mut sim), MhdblStatus::NullPointer);
        let bad = CString::new("grid.nz = 4").unwrap();
        assert_eq!(mhdbl_sim_new(bad.as_ptr(), &mut sim), MhdblStatus::Config);
        assert!(last_error().contains("grid.nz"));
        let invalid = [0xffu8, 0xfe, 0];
        assert_eq!(mhdbl_sim_new(invalid.as_ptr().cast(), &mut sim), MhdblStatus::InvalidUtf8);
        assert_eq!(mhdbl_sim_run_until(ptr::null_mut(), 1.0), MhdblStatus::NullPointer);
        mhdbl_sim_free(ptr::null_mut());

        let closing = new_sim(&format!("{CONFIG}params.lambda = 400\nparams.epsilon = 1e-2\n"));
        assert_eq!(mhdbl_sim_run_until(closing, 5.0), MhdblStatus::TStarReached);
        mhdbl_sim_free(closing);
    }
    assert!(sim.is_null());
}

#[test]
fn stateless_helpers() {
    unsafe {
        let mut e = MhdblExponents::default();
        assert_eq!(mhdbl_derived_exponents(1.5, &mut e), MhdblStatus::Ok);
        assert_eq!((e.has_l_kappa, e.has_ell_kappa), (1, 1));
        assert!((e.ell_kappa - 2.0 / 9.0).abs() < 1e-12);
        assert_eq!(mhdbl_derived_exponents(-1.0, &mut e), MhdblStatus::Config);

        let mut s = MhdblSupConstants::default();
        assert_eq!(mhdbl_sup_constants(&mut s), MhdblStatus::Ok);
        assert!((s.sup1 - 0.541044).abs() < 1e-5);

        let t: Vec<f64> = (0..50).map(|i| 10.0 + 2.0 * i as f64).collect();
        let v: Vec<f64> = t.iter().map(|t| (1.0 + t).powf(-0.75)).collect();
        let mut fit = MhdblFit::default();
        assert_eq!(mhdbl_fit_decay(t.as_ptr(), v.as_ptr(), t.len(), 10.0, 200.0, &mut fit), MhdblStatus::Ok);
        assert!((fit.exponent + 0.75).abs() < 1e-12);
        assert_eq!(fit.samples, 50);
        assert_eq!(mhdbl_fit_decay(t.as_ptr(), v.as_ptr(), 5, 10.0, 200.0, &mut fit), MhdblStatus::Config);
        assert_eq!(mhdbl_fit_decay(ptr::null(), v.as_ptr(), 5, 10.0, 200.0, &mut fit), MhdblStatus::NullPointer);
    }
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/mhdbl.h")
}

#[test]
fn generated_header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"mhdbl.h\"\n\
         int main(void) {\n\
           MhdblSim *sim = 0;\n\
           MhdblSupConstants c;\n\
           MhdblStatus s = mhdbl_sup_constants(&c);\n\
           mhdbl_sim_free(sim);\n\
           return s == MHDBL_STATUS_OK ? 0 : 1;\n\
         }\n",
    )
    .unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let text = std::fs::read_to_string(header()).unwrap();
    for name in ["mhdbl_sim_new", "mhdbl_sim_free", "mhdbl_sim_run_until", "mhdbl_sim_save_checkpoint", "mhdbl_fit_decay"] {
        assert!(text.contains(name), "{name} missing from header");
    }
}
