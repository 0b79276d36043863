//! Acceptance criteria A1 to A11. Each criterion prints one `PASS`/`FAIL`
//! line to stderr (uncaptured), then the test fails if any criterion did.

mod common;

use std::io::Write;
use std::time::Instant;

use airy_ensemble::verify::{run_verify, ExperimentConfig, TestId, TWO_BRIDGE_CONFIGS};
use airy_ensemble::StatReport;

use common::run_deterministic;

const SEED: u64 = 0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn report_line(id: &str, title: &str, out: &Outcome, secs: f64) {
    let verdict = if out.pass { "PASS" } else { "FAIL" };
    let line = format!("{id:<4} {verdict}  {title} ({secs:.1} s): {}\n", out.detail);
    // write straight to the handle so the line is visible without --nocapture
    let _ = std::io::stderr().write_all(line.as_bytes());
}

fn verify(id: TestId) -> StatReport {
    run_verify(id, &ExperimentConfig::with_seed(SEED)).unwrap_or_else(|e| panic!("{id}: {e}"))
}

fn stat(r: &StatReport, key: &str) -> f64 {
    *r.statistics.get(key).unwrap_or(&f64::NAN)
}

fn a1() -> Outcome {
    let cmds: Vec<(Vec<&str>, bool, bool)> = vec![
        (vec!["simulate", "dyson", "--n", "6", "--steps", "20", "--replicas", "3"], true, false),
        (vec!["simulate", "melon", "--k", "3", "--steps", "20", "--replicas", "3"], true, false),
        (vec!["simulate", "airy-approx", "--n", "60", "--k", "3", "--steps", "6", "--replicas", "2"], true, false),
        (vec!["simulate", "bridge-rep", "--k", "3", "--n", "60", "--replicas", "2"], true, false),
        (vec!["verify", "tw-edge", "--n", "40", "--replicas", "200"], true, false),
        (vec!["verify", "kernel", "--replicas", "50"], true, false),
        (vec!["verify", "two-bridge", "--replicas", "2000"], true, false),
        (vec!["verify", "jam-scaling", "--n", "60", "--replicas", "300"], true, false),
        (vec!["verify", "greedy", "--replicas", "2000"], true, false),
        (vec!["verify", "components", "--n", "60", "--k", "4", "--replicas", "20"], true, false),
        (vec!["verify", "bridge-rep", "--n", "60", "--k", "2", "--replicas", "40"], true, false),
        (vec!["verify", "modulus", "--n", "40", "--steps", "8", "--replicas", "100"], true, false),
        (vec!["verify", "dyson-increments", "--n", "30", "--replicas", "500"], true, false),
        (vec!["verify", "melon-dyson", "--replicas", "300"], true, false),
        (vec!["verify", "edge-tail", "--n", "30", "--replicas", "500"], true, false),
        (vec!["verify", "envelope", "--n", "30", "--replicas", "100"], true, false),
        (vec!["verify", "point-locations", "--n", "60", "--k", "4", "--replicas", "100"], true, false),
        (vec!["verify", "counts", "--n", "60", "--replicas", "100"], true, false),
        (vec!["verify", "dominance", "--replicas", "500"], true, false),
        (vec!["verify", "increment-scan", "--steps", "16", "--replicas", "100"], true, false),
        (vec!["verify", "edge-spread", "--n", "60", "--k", "4", "--replicas", "5"], true, false),
        (vec!["verify", "moments", "--n", "60", "--replicas", "300"], true, false),
        (vec!["table", "tw-cdf"], false, true),
        (vec!["table", "kernel"], false, true),
        (vec!["table", "expected-count"], false, true),
    ];
    let mut bad = Vec::new();
    for (args, threads, file) in &cmds {
        match run_deterministic(args, *threads, *file) {
            Ok(r) if matches!(r.code, Some(0 | 1)) && (!r.files.is_empty() || !r.stdout.is_empty()) => {}
            Ok(r) => bad.push(format!("{args:?}: exit {:?} {}", r.code, String::from_utf8_lossy(&r.stderr))),
            Err(e) => bad.push(e),
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("{} commands identical over two runs and --threads 1/8", cmds.len())
        } else {
            bad.join("; ")
        },
    }
}

fn a2() -> Outcome {
    let r = verify(TestId::TwEdge);
    let ks: Vec<f64> = [50, 100, 200].iter().map(|n| stat(&r, &format!("ks[n={n}]"))).collect();
    let below = ks[2] < 0.05;
    let decreasing = ks.windows(2).all(|w| w[1] < w[0]);
    Outcome {
        pass: r.pass && below && decreasing,
        detail: format!(
            "KS n=50/100/200 = {:.4}/{:.4}/{:.4} (<0.05: {below}, decreasing: {decreasing})",
            ks[0], ks[1], ks[2]
        ),
    }
}

fn a3() -> Outcome {
    let r = verify(TestId::Kernel);
    let (k, d) = (stat(&r, "max_kernel_difference"), stat(&r, "max_determinant_difference"));
    Outcome {
        pass: r.pass && k <= 1e-8 && d <= 1e-8,
        detail: format!("max kernel diff {k:.2e}, determinant diff under doubling {d:.2e} over {} pairs", r.replicas),
    }
}

fn a4() -> Outcome {
    let r = verify(TestId::TwoBridge);
    let trials = r.replicas as f64;
    let (v, horizon) = (1.0, 1.0);
    let mut worst = 0.0f64;
    for (i, &(dx, dy)) in TWO_BRIDGE_CONFIGS.iter().enumerate() {
        // reflection of the difference bridge (variance 2v) through zero:
        // P(no crossing) = 1 - exp(-2 dx dy / (2 v T))
        let p = 1.0 - (-2.0 * dx * dy / (2.0 * v * horizon)).exp();
        let se = (p * (1.0 - p) / trials).sqrt();
        worst = worst.max(((stat(&r, &format!("rate[{i}]")) - p) / se).abs());
    }
    Outcome {
        pass: worst <= 3.0 && r.pass,
        detail: format!("max |z| = {worst:.2} over {} configs, {trials} trials each", TWO_BRIDGE_CONFIGS.len()),
    }
}

fn a5() -> Outcome {
    let r = verify(TestId::JamScaling);
    let means: Vec<String> = (0..3).map(|i| format!("{:.3e}", stat(&r, &format!("mean_L[{i}]")))).collect();
    // the literal replica count, for the record
    let small = run_verify(
        TestId::JamScaling,
        &ExperimentConfig { replicas: Some(1000), ..ExperimentConfig::with_seed(SEED) },
    )
    .unwrap();
    let small_events: Vec<String> = (0..3).map(|i| format!("{}", stat(&small, &format!("events[{i}]")))).collect();
    Outcome {
        pass: r.pass,
        detail: format!(
            "slope {:.3} (target 3 +- 0.5) from mean L {} over {} replicas; at 10^3 replicas events {} -> {}",
            stat(&r, "slope"),
            means.join("/"),
            r.replicas,
            small_events.join("/"),
            if small.pass { "pass" } else { "slope undefined or off" }
        ),
    }
}

fn a6() -> Outcome {
    let r = verify(TestId::Greedy);
    let v = stat(&r, "violations");
    Outcome {
        pass: r.pass && v == 0.0 && r.replicas >= 1_000_000,
        detail: format!("{v} violations over {} configurations ({} jammed points)", r.replicas, stat(&r, "total_jammed")),
    }
}

fn a7() -> Outcome {
    let r = verify(TestId::Components);
    let p = stat(&r, "p_hat");
    Outcome {
        pass: r.pass && p <= 0.1,
        detail: format!("p_hat(M >= 28) = {p}, largest component seen {}", stat(&r, "max_max_component")),
    }
}

fn a8() -> Outcome {
    let r = verify(TestId::BridgeRep);
    let frac = stat(&r, "delta0_ordering_violation_fraction");
    Outcome {
        pass: r.pass && frac > 0.01,
        detail: format!(
            "min p {:.4} ({} rejections), split-sample min p {:.4} ({} rejections), delta=0 violation fraction {:.3}",
            stat(&r, "min_p"),
            stat(&r, "rejections"),
            stat(&r, "split_min_p"),
            stat(&r, "split_rejections"),
            frac
        ),
    }
}

fn a9() -> Outcome {
    let r = verify(TestId::Modulus);
    let refine = stat(&r, "refinement_ratio");
    Outcome {
        pass: r.pass,
        detail: format!("smallest passing d = {}, refinement ratio {refine:.3}", stat(&r, "smallest_d")),
    }
}

fn a10() -> Outcome {
    let r = verify(TestId::DysonIncrements);
    let slope = stat(&r, "slope_m32[0]");
    Outcome {
        pass: r.pass && slope < 0.0,
        detail: format!("log-survival slope vs m^(3/2) = {slope:.3} over {} replicas", r.replicas),
    }
}

fn a11() -> Outcome {
    let r = verify(TestId::MelonDyson);
    Outcome {
        pass: r.pass,
        detail: format!("min p {:.4}, {} rejections at corrected level", stat(&r, "min_p"), stat(&r, "rejections")),
    }
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("A1", "CLI determinism", a1),
        ("A2", "Tracy-Widom edge convergence", a2),
        ("A3", "kernel numerics", a3),
        ("A4", "two-bridge rejection oracle", a4),
        ("A5", "jam scaling", a5),
        ("A6", "greedy matching bound", a6),
        ("A7", "component sizes", a7),
        ("A8", "bridge representation equivalence", a8),
        ("A9", "moduli", a9),
        ("A10", "Dyson increment tails", a10),
        ("A11", "melon-Dyson identity", a11),
    ];
    let mut failed = Vec::new();
    for (id, title, f) in criteria {
        let start = Instant::now();
        let out = f();
        report_line(id, title, &out, start.elapsed().as_secs_f64());
        if !out.pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
