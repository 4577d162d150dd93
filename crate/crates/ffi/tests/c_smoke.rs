//! Compiles and runs a small C program against the generated header and the
//! static library, proving the ABI surface end to end.

use std::path::PathBuf;
use std::process::Command;

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "repvol.h"

int main(void) {
    const char *json =
        "{\"tet_count\": 2, \"cusp_count\": 1, \"gluings\": ["
        "{\"tet\":0,\"face\":0,\"to_tet\":1,\"to_face\":0,\"perm\":[0,2,1,3]},"
        "{\"tet\":0,\"face\":1,\"to_tet\":1,\"to_face\":1,\"perm\":[2,1,0,3]},"
        "{\"tet\":0,\"face\":2,\"to_tet\":1,\"to_face\":3,\"perm\":[1,2,3,0]},"
        "{\"tet\":0,\"face\":3,\"to_tet\":1,\"to_face\":2,\"perm\":[1,3,0,2]}],"
        "\"peripheral\": [{\"meridian\": {\"rows\": [[0,-1,0],[0,0,1]], \"pi_offset\": 0},"
        "\"longitude\": {\"rows\": [[1,-1,0],[1,0,-1]], \"pi_offset\": 0}}],"
        "\"filling\": [null]}";
    RvTriangulation *t = NULL;
    if (rv_triangulation_parse(json, &t) != RV_STATUS_OK) {
        fprintf(stderr, "parse: %s\n", rv_last_error_message());
        return 1;
    }
    if (rv_tet_count(t) != 2 || rv_cusp_count(t) != 1) return 2;

    double shapes[4];
    double volume = 0.0, res = 0.0;
    if (rv_solve(t, NULL, shapes, &volume, &res) != RV_STATUS_OK) {
        fprintf(stderr, "solve: %s\n", rv_last_error_message());
        return 3;
    }
    if (volume < 2.0298 || volume > 2.0299 || res > 1e-11) return 4;

    RvRepresentation *rep = NULL;
    if (rv_develop(t, shapes, &rep) != RV_STATUS_OK) return 5;
    double straightened = 0.0;
    if (rv_straighten_volume(t, rep, 0, &straightened) != RV_STATUS_OK) return 6;
    if (straightened < 2.0298 || straightened > 2.0299) return 7;

    rv_representation_free(rep);
    rv_triangulation_free(t);
    printf("ok volume=%.10f\n", volume);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    if !include.join("repvol.h").exists() {
        panic!("header not generated");
    }
    // locate the staticlib next to this test binary's profile directory,
    // building it on demand (`cargo test` alone only produces the rlib)
    let mut lib_dir = std::env::current_exe().unwrap();
    lib_dir.pop(); // test binary
    if lib_dir.ends_with("deps") {
        lib_dir.pop();
    }
    let staticlib = lib_dir.join("librepvol_ffi.a");
    if !staticlib.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let mut build = Command::new(cargo);
        build.args(["build", "-p", "repvol-ffi"]);
        if lib_dir.ends_with("release") {
            build.arg("--release");
        }
        let out = build.output().expect("cargo runs");
        assert!(
            out.status.success(),
            "building the static library failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    assert!(staticlib.exists(), "missing {}", staticlib.display());

    let compiler = ["cc", "clang", "gcc"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok())
        .expect("a C compiler");

    let work = std::env::temp_dir().join(format!("repvol-c-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&work).unwrap();
    let src = work.join("smoke.c");
    let bin = work.join("smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();

    let compile = Command::new(compiler)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(staticlib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&bin)
        .output()
        .expect("compiler runs");
    assert!(
        compile.status.success(),
        "compile failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&bin).output().expect("smoke binary runs");
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("ok volume=2.02988"));
}
