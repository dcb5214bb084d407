//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Every comparison is exact ring equality; the only tolerances are the
//! wall-clock budgets below.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use chow_descent::correspondences::{cdmin, compose, power};
use chow_descent::descent::{check_hypotheses, low_codim_component_check, replay, run_descent};
use chow_descent::instance::{ExpectedOutcome, Instance};
use chow_descent::properties::{
    run_linear_suite, run_suite, Exact, Mutant, Mutation, Property, SuiteConfig, DEFAULT_MODULI,
};
use chow_descent::{Correspondence, CycleClass, Error, ProductSpace};

const SEED: u64 = 1;
const SUITE_BUDGET: Duration = Duration::from_secs(30);
const INSTANCE_BUDGET: Duration = Duration::from_secs(5);

struct Line {
    criterion: u32,
    passed: bool,
    text: String,
}

fn suite(properties: &[Property], count: u64) -> (bool, String, Duration) {
    let mut cfg = SuiteConfig::new(SEED, count);
    cfg.properties = properties.to_vec();
    let start = Instant::now();
    let report = run_suite(&cfg, &Exact).expect("suite runs");
    let elapsed = start.elapsed();
    let mut parts = Vec::new();
    for o in &report.outcomes {
        parts.push(format!(
            "{} {}/{}",
            o.property.name(),
            o.samples - o.failures,
            o.samples
        ));
        if let Some(c) = &o.counterexample {
            parts.push(format!("counterexample: {}", c.message));
        }
    }
    let enough = report.outcomes.iter().all(|o| o.samples >= count);
    (report.all_pass() && enough, parts.join(", "), elapsed)
}

fn timed(
    criterion: u32,
    label: &str,
    ok: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
) -> Line {
    let in_time = elapsed <= budget;
    Line {
        criterion,
        passed: ok && in_time,
        text: format!(
            "{label}: {detail} [{:.2}s, budget {}s]",
            elapsed.as_secs_f64(),
            budget.as_secs()
        ),
    }
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("golden")
        .join(name)
}

/// Action of a cycle on `CH(P1; Z/2)` computed by hand: `(a x b)_*(x_k) =
/// deg(a x_k) b`, with `x0 = [P1]`, `x1 = [pt]`, `x1^2 = 0`, `deg(x1) = 1`.
fn p1_action(c: &CycleClass) -> [[u64; 2]; 2] {
    // deg(x_a x_k) is 1 exactly when a = 1 - k
    let mut act = [[0u64; 2]; 2];
    for (k, row) in act.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            *entry = c.coeff(&[1 - k, b]);
        }
    }
    act
}

fn act_then(u: &[[u64; 2]; 2], v: &[[u64; 2]; 2]) -> [[u64; 2]; 2] {
    let mut out = [[0u64; 2]; 2];
    for k in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                out[k][c] = (out[k][c] + u[k][b] * v[b][c]) % 2;
            }
        }
    }
    out
}

/// Every pair of the 16 correspondences on P1 x P1 over Z/2: the engine's
/// composite acts as the composite of actions, and actions are injective.
fn brute_force_oracle(space: &ProductSpace) -> Result<(), String> {
    let all: Vec<Correspondence> = (0..16u64)
        .map(|bits| {
            let coeffs = (0..4).map(|i| (bits >> i) & 1).collect();
            Correspondence::new(CycleClass::from_coeffs(space.clone(), coeffs).unwrap()).unwrap()
        })
        .collect();
    let mut seen = std::collections::BTreeSet::new();
    for u in &all {
        seen.insert(p1_action(u.cycle()));
    }
    if seen.len() != 16 {
        return Err("action map is not injective".into());
    }
    for u in &all {
        for v in &all {
            let w = compose(u, v).map_err(|e| e.to_string())?;
            if p1_action(w.cycle()) != act_then(&p1_action(u.cycle()), &p1_action(v.cycle())) {
                return Err(format!(
                    "compose({}, {}) disagrees with the oracle",
                    u.cycle(),
                    v.cycle()
                ));
            }
        }
    }
    Ok(())
}

fn golden_instance(file: &str) -> Result<String, String> {
    let inst = Instance::load(&golden(file)).map_err(|e| e.to_string())?;
    let d = inst.descent_instance().map_err(|e| e.to_string())?;
    let exp = inst.expected.clone().ok_or("no expected block")?;
    let hyp = check_hypotheses(&d).map_err(|e| e.to_string())?;
    if !hyp.holds() {
        return Err(format!("hypotheses fail: {:?}", hyp.violations));
    }
    match (run_descent(&d), exp.outcome) {
        (Ok(cert), ExpectedOutcome::Certificate) => {
            let failed: Vec<_> = replay(&d, &cert)
                .map_err(|e| e.to_string())?
                .into_iter()
                .filter(|c| !c.holds)
                .map(|c| c.name)
                .collect();
            if !failed.is_empty() {
                return Err(format!("replay failed: {failed:?}"));
            }
            if compose(&cert.f_hat, &cert.g_hat).map_err(|e| e.to_string())? != d.p {
                return Err("g_hat o f_hat != p".into());
            }
            let c = cdmin(&d.p).map_err(|e| e.to_string())?.value;
            for n in 1..=2 * cert.n1 {
                let un = power(&cert.u, n).map_err(|e| e.to_string())?;
                if !low_codim_component_check(&un, &d.p, c).map_err(|e| e.to_string())? {
                    return Err(format!(
                        "low-codimension rows of (g o f3)^{n} differ from p"
                    ));
                }
            }
            let n2 = cert.transposed.as_ref().map(|t| t.n2);
            for (label, want, got) in [
                ("n1", exp.n1, Some(cert.n1)),
                ("n2", exp.n2, n2),
                ("nbar", exp.nbar, Some(cert.nbar)),
            ] {
                if want.is_some() && want != got {
                    return Err(format!("{label}: expected {want:?}, found {got:?}"));
                }
            }
            if file == "rank2_z2.json" {
                brute_force_oracle(d.p.cycle().space())?;
                let (f, g) = (p1_action(cert.f_hat.cycle()), p1_action(cert.g_hat.cycle()));
                if act_then(&f, &g) != p1_action(d.p.cycle()) {
                    return Err("oracle: g_hat o f_hat != p".into());
                }
            }
            Ok(format!(
                "n1={} n2={} nbar={}",
                cert.n1,
                n2.map_or("-".into(), |v| v.to_string()),
                cert.nbar
            ))
        }
        (Err(Error::StepFailure { step, .. }), ExpectedOutcome::StepFailure)
            if Some(step) == exp.step =>
        {
            Ok(format!("StepFailure({step}) as expected"))
        }
        (Ok(_), want) => Err(format!("certificate, expected {want:?}")),
        (Err(e), want) => Err(format!("{e}, expected {want:?}")),
    }
}

fn criterion_golden() -> Line {
    let files = [
        "trivial_p1.json",
        "rank2_z2.json",
        "rank2_z4.json",
        "kunneth_z3.json",
        "adversarial_nilpotent.json",
        "literal_gap.json",
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    let mut slowest = Duration::ZERO;
    for f in files {
        let start = Instant::now();
        let res = golden_instance(f);
        let el = start.elapsed();
        slowest = slowest.max(el);
        ok &= res.is_ok() && el <= INSTANCE_BUDGET;
        match res {
            Ok(s) => parts.push(format!("{f} {s}")),
            Err(e) => parts.push(format!("{f} FAILED {e}")),
        }
    }
    timed(
        4,
        "going-down on the golden corpus",
        ok,
        format!("{}; slowest instance", parts.join("; ")),
        slowest,
        INSTANCE_BUDGET,
    )
}

fn criterion_mutations() -> Line {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for m in Mutation::ALL {
        let cfg = SuiteConfig::new(SEED, 100);
        let report = run_suite(&cfg, &Mutant(m)).expect("suite runs");
        let caught: Vec<&str> = report
            .outcomes
            .iter()
            .filter(|o| o.counterexample.is_some())
            .map(|o| o.property.name())
            .collect();
        ok &= !caught.is_empty();
        parts.push(format!("{} caught by [{}]", m.name(), caught.join(", ")));
    }
    timed(
        6,
        "mutation sensitivity within 100 samples",
        ok,
        parts.join("; "),
        start.elapsed(),
        SUITE_BUDGET * 4,
    )
}

#[test]
fn acceptance() {
    let mut lines = Vec::new();

    let (ok, d, t) = suite(&[Property::Rule1, Property::Rule2, Property::Rule3], 1000);
    lines.push(timed(
        1,
        "composition rules (1)-(3)",
        ok,
        d,
        t,
        SUITE_BUDGET,
    ));

    let (ok, d, t) = suite(&[Property::Projector], 500);
    lines.push(timed(
        2,
        "idempotent powers are projectors",
        ok,
        d,
        t,
        SUITE_BUDGET,
    ));

    let (ok, d, t) = suite(&[Property::DualBasis], 1000);
    lines.push(timed(
        3,
        "dual basis and singular Gram rejection",
        ok,
        d,
        t,
        SUITE_BUDGET,
    ));

    lines.push(criterion_golden());

    let laws = [
        Property::Associativity,
        Property::Transpose,
        Property::Identity,
        Property::MatrixHomomorphism,
    ];
    let (ok, d, t) = suite(&laws, 1000);
    lines.push(timed(5, "algebraic laws", ok, d, t, SUITE_BUDGET * 4));

    lines.push(criterion_mutations());

    let start = Instant::now();
    let lin = run_linear_suite(SEED, 200, &DEFAULT_MODULI).expect("linear suite runs");
    let detail = match &lin.first_failure {
        None => format!(
            "{}/{} systems agree with brute force",
            lin.samples - lin.failures,
            lin.samples
        ),
        Some((s, _, m)) => format!("sample {s}: {m}"),
    };
    lines.push(timed(
        7,
        "exact linear algebra",
        lin.failures == 0 && lin.samples >= 200,
        detail,
        start.elapsed(),
        SUITE_BUDGET,
    ));

    for l in &lines {
        println!(
            "{} criterion {}: {}",
            if l.passed { "PASS" } else { "FAIL" },
            l.criterion,
            l.text
        );
    }
    let failed: Vec<u32> = lines
        .iter()
        .filter(|l| !l.passed)
        .map(|l| l.criterion)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
