use std::path::PathBuf;
use std::process::Command;

/// Runs python/smoke_test.py against the cdylib cargo built for this test.
#[test]
fn python_smoke_test() {
    let Ok(probe) = Command::new("python3").arg("--version").output() else {
        eprintln!("python3 not found; skipping");
        return;
    };
    assert!(probe.status.success());
    // target/<profile>/deps/smoke-<hash> -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join(format!("{}specbench{}", std::env::consts::DLL_PREFIX, std::env::consts::DLL_SUFFIX));
    assert!(lib.exists(), "{} not built", lib.display());
    let script = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../python/smoke_test.py");
    let out = Command::new("python3").arg(&script).arg(&lib).output().unwrap();
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("smoke test ok"));
}
