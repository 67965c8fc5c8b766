use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use modgen_ffi::*;

const ALBUM: &str = "class Album {
    Album() { }
    public str strip(str s) {
        str out = \"\";
        int i = 0;
        while (i < s.length()) {
            if (\"0123456789\".contains(s.charAt(i))) { out = out.concat(s.charAt(i)); }
            i = i + 1;
        }
        return out;
    }
}";

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = modgen_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn parse(src: &str) -> *mut ModgenProgram {
    let mut p = ptr::null_mut();
    let status = unsafe { modgen_program_parse(c(src).as_ptr(), &mut p) };
    assert_eq!(status, ModgenStatus::Ok);
    assert!(!p.is_null());
    p
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(modgen_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn parse_errors_are_reported() {
    let mut p = ptr::null_mut();
    let status = unsafe { modgen_program_parse(c("class A { int f() { return x; } }").as_ptr(), &mut p) };
    assert_eq!(status, ModgenStatus::ParseError);
    assert!(p.is_null());
    assert!(last_error().starts_with("<source>:1:"), "{}", last_error());

    let status = unsafe { modgen_program_parse(ptr::null(), &mut p) };
    assert_eq!(status, ModgenStatus::NullArgument);
    assert_eq!(last_error(), "source is null");

    let bad = [0xffu8, 0];
    let status = unsafe { modgen_program_parse(bad.as_ptr().cast(), &mut p) };
    assert_eq!(status, ModgenStatus::InvalidUtf8);
}

#[test]
fn branch_counts_and_unknown_targets() {
    let p = parse(ALBUM);
    let mut n = 0usize;
    let status = unsafe { modgen_program_branch_count(p, c("Album").as_ptr(), c("strip").as_ptr(), &mut n) };
    assert_eq!(status, ModgenStatus::Ok);
    assert!(modgen_last_error().is_null());
    assert_eq!(n, 4);
    let status = unsafe { modgen_program_branch_count(p, c("Album").as_ptr(), c("nope").as_ptr(), &mut n) };
    assert_eq!(status, ModgenStatus::UnknownTarget);
    assert_eq!(last_error(), "unknown method Album.nope");
    unsafe { modgen_program_free(p) };
}

#[test]
fn config_setters_validate() {
    let cfg = modgen_config_new(ModgenMode::Emote, 1);
    unsafe {
        assert_eq!(modgen_config_set_budget(cfg, 2.5), ModgenStatus::Ok);
        assert_eq!(modgen_config_set_budget(cfg, -1.0), ModgenStatus::InvalidConfig);
        assert_eq!(modgen_config_set_population(cfg, 0), ModgenStatus::InvalidConfig);
        assert_eq!(modgen_config_set_population(cfg, 20), ModgenStatus::Ok);
        assert_eq!(modgen_config_set_max_generations(cfg, 3), ModgenStatus::Ok);
        assert_eq!(modgen_config_set_attributed(cfg, false), ModgenStatus::Ok);
        assert_eq!(modgen_config_set_budget(ptr::null_mut(), 1.0), ModgenStatus::NullArgument);
        modgen_config_free(cfg);
        modgen_config_free(ptr::null_mut());
    }
}

#[test]
fn evolve_and_read_the_result() {
    let p = parse(ALBUM);
    let cfg = modgen_config_new(ModgenMode::Emote, 7);
    unsafe {
        assert_eq!(modgen_config_set_budget(cfg, 5.0), ModgenStatus::Ok);
        let mut r = ptr::null_mut();
        let status = modgen_evolve(p, c("Album").as_ptr(), c("strip").as_ptr(), cfg, &mut r);
        assert_eq!(status, ModgenStatus::Ok);
        assert_eq!(modgen_result_goal_count(r), 4);
        assert_eq!(modgen_result_covered_count(r), 4);
        assert_eq!(modgen_result_coverage_pct(r), 100.0);
        assert!(modgen_result_evaluations(r) >= 50);
        assert!(modgen_result_diagnostic(r).is_null());

        let mut name = ptr::null_mut();
        let mut covered = false;
        assert_eq!(modgen_result_goal(r, 1, &mut name, &mut covered), ModgenStatus::Ok);
        assert_eq!(CStr::from_ptr(name).to_str().unwrap(), "Album.strip/1#0:FALSE");
        assert!(covered);
        modgen_string_free(name);
        assert_eq!(modgen_result_goal(r, 4, &mut name, &mut covered), ModgenStatus::OutOfRange);

        let tests = CStr::from_ptr(modgen_result_tests(r)).to_str().unwrap();
        assert!(tests.starts_with("// test 0\nAlbum v0 = new Album();"), "{tests}");
        assert!(tests.contains(".strip("));

        modgen_result_free(r);
        modgen_config_free(cfg);
        modgen_program_free(p);
    }
}

#[test]
fn null_handles_are_rejected() {
    let mut r = ptr::null_mut();
    let cfg = modgen_config_new(ModgenMode::Strict, 1);
    let status = unsafe { modgen_evolve(ptr::null(), c("A").as_ptr(), c("f").as_ptr(), cfg, &mut r) };
    assert_eq!(status, ModgenStatus::NullArgument);
    assert_eq!(last_error(), "program is null");
    assert!(r.is_null());
    unsafe {
        assert_eq!(modgen_result_goal_count(ptr::null()), 0);
        assert!(modgen_result_tests(ptr::null()).is_null());
        modgen_result_free(ptr::null_mut());
        modgen_string_free(ptr::null_mut());
        modgen_config_free(cfg);
    }
}

#[test]
fn errors_are_per_thread() {
    let mut p = ptr::null_mut();
    unsafe { modgen_program_parse(ptr::null(), &mut p) };
    assert!(!modgen_last_error().is_null());
    std::thread::spawn(|| assert!(modgen_last_error().is_null()))
        .join()
        .unwrap();
}

#[test]
fn header_declares_the_api() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/modgen.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for item in [
        "typedef struct ModgenProgram ModgenProgram;",
        "MODGEN_STATUS_OK = 0",
        "MODGEN_STATUS_INTERNAL = 7",
        "MODGEN_MODE_EMOTE = 1",
        "modgen_program_parse(const char *source, ModgenProgram **out)",
        "modgen_evolve(",
        "void modgen_string_free(char *s);",
        "const char *modgen_last_error(void);",
    ] {
        assert!(text.contains(item), "missing {item}");
    }
    // The header compiles as C when a compiler is around.
    if let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .output()
    {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.join("libmodgen_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no static library or C compiler");
        return;
    }
    let dir = tempfile_dir();
    let exe = dir.join("smoke");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(
        String::from_utf8_lossy(&run.stdout),
        "2/2 100.00\nGate.pass/1#0:TRUE 1\nGate.pass/1#0:FALSE 1\n"
    );
    std::fs::remove_dir_all(dir).ok();
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("c-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
