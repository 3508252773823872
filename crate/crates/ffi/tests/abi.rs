use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use vilenkin_lab_ffi::*;

struct Group(*mut VlGroup);

impl Group {
    fn new(radices: &[usize]) -> Self {
        let mut g = ptr::null_mut();
        let status =
            unsafe { vl_group_new(radices.as_ptr(), radices.len(), radices.len(), &mut g) };
        assert_eq!(status, VlStatus::Ok);
        Group(g)
    }
}

impl Drop for Group {
    fn drop(&mut self) {
        unsafe { vl_group_free(self.0) }
    }
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 256];
    unsafe {
        vl_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn c(re: f64, im: f64) -> VlComplex {
    VlComplex { re, im }
}

#[test]
fn group_handle_lifecycle_and_errors() {
    let g = Group::new(&[2, 3, 4]);
    unsafe {
        assert_eq!(vl_group_size(g.0), 24);
        assert_eq!(vl_group_level(g.0), 3);
        assert_eq!(vl_group_size(ptr::null()), 0);

        let mut bad = ptr::null_mut();
        let radices = [2usize, 1];
        assert_eq!(
            vl_group_new(radices.as_ptr(), 2, 2, &mut bad),
            VlStatus::InvalidGroup
        );
        assert!(bad.is_null());
        assert!(vl_last_error_length() > 0);
        assert!(last_error().contains("radix"));
        assert_eq!(
            vl_group_new(ptr::null(), 2, 2, &mut bad),
            VlStatus::NullPointer
        );
        assert_eq!(
            vl_group_new(radices.as_ptr(), 2, 3, &mut bad),
            VlStatus::InvalidGroup
        );
        vl_group_free(ptr::null_mut());
    }
}

#[test]
fn transforms_round_trip_and_check_lengths() {
    let g = Group::new(&[2, 3, 2]);
    let f: Vec<VlComplex> = (0..12).map(|i| c(i as f64, -(i as f64) / 3.0)).collect();
    let mut coeffs = vec![VlComplex::default(); 12];
    let mut back = vec![VlComplex::default(); 12];
    unsafe {
        assert_eq!(
            vl_forward_transform(g.0, f.as_ptr(), coeffs.as_mut_ptr(), 12),
            VlStatus::Ok
        );
        assert_eq!(
            vl_inverse_transform(g.0, coeffs.as_ptr(), back.as_mut_ptr(), 12),
            VlStatus::Ok
        );
        assert_eq!(
            vl_forward_transform(g.0, f.as_ptr(), coeffs.as_mut_ptr(), 11),
            VlStatus::LengthMismatch
        );
        assert_eq!(
            vl_forward_transform(ptr::null(), f.as_ptr(), coeffs.as_mut_ptr(), 12),
            VlStatus::NullPointer
        );
    }
    // the zeroth coefficient is the mean
    let mean = f.iter().map(|v| v.re).sum::<f64>() / 12.0;
    assert!((coeffs[0].re - mean).abs() < 1e-12);
    for (a, b) in f.iter().zip(&back) {
        assert!((a.re - b.re).abs() < 1e-12 && (a.im - b.im).abs() < 1e-12);
    }
    let mut nan = f.clone();
    nan[3].re = f64::NAN;
    let status = unsafe { vl_forward_transform(g.0, nan.as_ptr(), coeffs.as_mut_ptr(), 12) };
    assert_eq!(status, VlStatus::InvalidValue);
}

#[test]
fn kernels_and_means() {
    let g = Group::new(&[2, 2, 2, 2]);
    let mut w = ptr::null_mut();
    let mut values = vec![VlComplex::default(); 16];
    let mut closed = vec![VlComplex::default(); 16];
    unsafe {
        assert_eq!(vl_weights_log(1.0, 1, 16, &mut w), VlStatus::Ok);
        // K_{M_2} summed and in closed form
        assert_eq!(
            vl_kernel(
                g.0,
                VlKernelKind::Fejer,
                4,
                0,
                ptr::null(),
                values.as_mut_ptr(),
                16
            ),
            VlStatus::Ok
        );
        assert_eq!(
            vl_kernel(
                g.0,
                VlKernelKind::FejerClosed,
                2,
                0,
                ptr::null(),
                closed.as_mut_ptr(),
                16
            ),
            VlStatus::Ok
        );
        for (a, b) in values.iter().zip(&closed) {
            assert!((a.re - b.re).abs() < 1e-12 && (a.im - b.im).abs() < 1e-12);
        }
        assert_eq!(
            vl_kernel(
                g.0,
                VlKernelKind::Norlund,
                5,
                0,
                ptr::null(),
                values.as_mut_ptr(),
                16
            ),
            VlStatus::NullPointer
        );
        assert_eq!(
            vl_kernel(g.0, VlKernelKind::Norlund, 5, 0, w, values.as_mut_ptr(), 16),
            VlStatus::Ok
        );
        // F_n has unit integral
        let integral = values.iter().map(|v| v.re).sum::<f64>() / 16.0;
        assert!((integral - 1.0).abs() < 1e-12);
        assert_eq!(
            vl_kernel(g.0, VlKernelKind::Tail, 5, 2, w, values.as_mut_ptr(), 16),
            VlStatus::Ok
        );
        assert_eq!(
            vl_kernel(g.0, VlKernelKind::Tail, 3, 2, w, values.as_mut_ptr(), 16),
            VlStatus::OutOfRange
        );

        // the mean of a constant is that constant
        let f = vec![c(2.5, 0.0); 16];
        let mut t = vec![VlComplex::default(); 16];
        assert_eq!(
            vl_norlund_mean(g.0, w, f.as_ptr(), 7, t.as_mut_ptr(), 16),
            VlStatus::Ok
        );
        assert!(t
            .iter()
            .all(|v| (v.re - 2.5).abs() < 1e-12 && v.im.abs() < 1e-12));
        vl_weights_free(w);
    }
}

#[test]
fn weights_validation() {
    let mut w = ptr::null_mut();
    unsafe {
        let q = [1.0, 2.0, 1.5];
        assert_eq!(
            vl_weights_custom(q.as_ptr(), 3, &mut w),
            VlStatus::InvalidWeights
        );
        assert!(!last_error().is_empty());
        let q = [1.0, 2.0, 2.0];
        assert_eq!(vl_weights_custom(q.as_ptr(), 3, &mut w), VlStatus::Ok);
        assert_eq!(vl_last_error_length(), 0);
        vl_weights_free(w);
        assert_eq!(vl_weights_constant(0, &mut w), VlStatus::OutOfRange);
    }
}

#[test]
fn atoms_and_norms() {
    let g = Group::new(&[2, 2, 2, 2, 2]);
    let mut a = vec![VlComplex::default(); 32];
    let mut norms = VlQuasiNorms::default();
    unsafe {
        assert_eq!(
            vl_make_atom(g.0, 2, 0.5, 0x5EED, a.as_mut_ptr(), 32),
            VlStatus::Ok
        );
        assert_eq!(vl_check_atom(g.0, a.as_ptr(), 32, 0.5, 2), VlStatus::Ok);
        let sup = a.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        assert!((sup - 16.0).abs() < 1e-9);
        let scaled: Vec<VlComplex> = a.iter().map(|v| c(v.re * 1.01, 0.0)).collect();
        assert_eq!(
            vl_check_atom(g.0, scaled.as_ptr(), 32, 0.5, 2),
            VlStatus::InvalidAtom
        );

        assert_eq!(
            vl_quasi_norms(g.0, a.as_ptr(), 32, 0.5, &mut norms),
            VlStatus::Ok
        );
        assert!(norms.hp >= norms.lp && norms.lp > 0.0);
        assert_eq!(
            vl_quasi_norms(g.0, a.as_ptr(), 32, 0.0, &mut norms),
            VlStatus::OutOfRange
        );
    }
}

#[test]
fn header_is_valid_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = dir.join("vilenkin_lab.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for symbol in [
        "vl_group_new",
        "vl_weights_log",
        "vl_forward_transform",
        "vl_kernel",
        "vl_norlund_mean",
        "vl_quasi_norms",
        "vl_make_atom",
        "typedef struct VlGroup VlGroup",
    ] {
        assert!(text.contains(symbol), "{symbol} missing from header");
    }
    let compiler = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let probe = tempfile_path("probe.c");
    std::fs::write(
        &probe,
        "#include \"vilenkin_lab.h\"\nint main(void) { VlGroup *g = 0; size_t r[2] = {2, 3};\n\
         return vl_group_new(r, 2, 2, &g) == VL_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    match Command::new(&compiler)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I"])
        .arg(&dir)
        .arg(&probe)
        .status()
    {
        Ok(status) => assert!(status.success(), "header does not compile"),
        Err(_) => eprintln!("no C compiler found; skipped compile check"),
    }
}

fn tempfile_path(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("vilenkin-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}
