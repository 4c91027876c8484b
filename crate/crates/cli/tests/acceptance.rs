//! Acceptance criteria 1–11, one verdict line each, at the documented
//! tolerances. Exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::Instant;

use lagcurv::verify::{self, CriterionOutcome};

const SEED: u64 = 20261018;

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.toml"))
}

/// 11. Each bundled config run twice, in separate processes, into separate
/// directories; every output file must match byte for byte.
fn determinism() -> (bool, String) {
    let root = std::env::temp_dir().join(format!("dynlag-acceptance-{}", std::process::id()));
    let mut notes = Vec::new();
    let mut ok = true;
    for (name, _) in dynlag::BUNDLED_CONFIGS {
        let dirs = [root.join(format!("{name}-1")), root.join(format!("{name}-2"))];
        for d in &dirs {
            let status = Command::new(env!("CARGO_BIN_EXE_dynlag"))
                .arg("run")
                .arg(bundled(name))
                .env("DYNLAG_OUT_DIR", d)
                .stdout(Stdio::null())
                .status()
                .expect("dynlag runs");
            if !status.success() {
                ok = false;
                notes.push(format!("{name}: run failed with {status}"));
            }
        }
        match dynlag::compare_outputs(&dirs[0], &dirs[1]) {
            Ok(None) => notes.push(format!("{name}: identical")),
            Ok(Some(d)) => {
                ok = false;
                notes.push(format!("{name}: {d}"));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("{name}: {e}"));
            }
        }
    }
    let _ = std::fs::remove_dir_all(&root);
    (ok, notes.join("; "))
}

fn main() {
    type Criterion = Box<dyn Fn() -> CriterionOutcome>;
    let library: Vec<Criterion> = vec![
        Box::new(verify::kepler_reduced_curvature),
        Box::new(|| verify::natural_system_oracle(SEED)),
        Box::new(|| verify::mobius_invariance(SEED)),
        Box::new(|| verify::derivative_curve_consistency(SEED)),
        Box::new(|| verify::delta_psd_rank(SEED)),
        Box::new(verify::oscillator_focal_points),
        Box::new(verify::sphere_geodesics),
        Box::new(|| verify::focal_count_suite(SEED)),
        Box::new(verify::figure_eight_table),
        Box::new(|| verify::nbody_reduced_ricci(SEED)),
    ];
    let mut failed = 0;
    for criterion in &library {
        let start = Instant::now();
        let outcome = criterion();
        failed += usize::from(!outcome.passed());
        println!("{outcome} [{:.2} s]", start.elapsed().as_secs_f64());
    }
    let start = Instant::now();
    let (ok, detail) = determinism();
    failed += usize::from(!ok);
    println!(
        "criterion 11 [{}] byte-identical reruns — {detail} [{:.2} s]",
        if ok { "PASS" } else { "FAIL" },
        start.elapsed().as_secs_f64()
    );
    println!("acceptance: {} of 11 criteria passed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
