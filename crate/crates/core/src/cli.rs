//! Command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for usage
//! and parse errors.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::correspondences::{cdmin, compose, idempotent_power, matrix_form, projector_check};
use crate::descent::{self, check_hypotheses, replay, run_descent};
use crate::error::{Error, Result};
use crate::instance::{ExpectedOutcome, Instance};
use crate::properties::{self, Exact, Mutant, Mutation, Property, SuiteConfig};
use crate::report::{self, Format, Report};
use crate::split_algebra::SplitAlgebra;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "chow-descent",
    version,
    about = "Exact split Chow motive calculus and going-down descent"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, default_value_t = ReportFormat::Text, global = true)]
    pub report: ReportFormat,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Include wall-clock time in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Structured,
}

#[derive(Debug, Args)]
pub struct InstanceArg {
    #[arg(long)]
    pub instance: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the split algebra axioms and print the dual basis.
    CheckAlgebra {
        #[command(flatten)]
        instance: InstanceArg,
        /// Only this algebra (default: all of them).
        #[arg(long)]
        algebra: Option<String>,
    },
    /// Print the dual basis and Gram matrix.
    DualBasis {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long)]
        algebra: Option<String>,
    },
    /// Compose two named correspondences; the result is `second o first`.
    Compose {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long)]
        first: String,
        #[arg(long)]
        second: String,
    },
    /// Least n with e^n idempotent, and that idempotent.
    IdempotentPower {
        #[command(flatten)]
        instance: InstanceArg,
        #[arg(long)]
        cycle: String,
    },
    /// Check hypotheses and run the descent construction.
    Descend {
        #[command(flatten)]
        instance: InstanceArg,
    },
    /// Verify a projector, or replay a descent against the `expected` block.
    Verify {
        #[command(flatten)]
        instance: InstanceArg,
        /// Check only that this cycle is a projector.
        #[arg(long)]
        cycle: Option<String>,
    },
    /// Randomized checks of the correspondence calculus.
    PropertySuite {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        #[arg(long, default_value_t = properties::DEFAULT_MAX_RANK)]
        max_rank: usize,
        /// Comma-separated moduli.
        #[arg(long, value_delimiter = ',')]
        moduli: Option<Vec<u64>>,
        /// Comma-separated property names (default: all).
        #[arg(long, value_delimiter = ',')]
        properties: Option<Vec<Property>>,
        /// Run against a deliberately broken calculus.
        #[arg(long)]
        mutation: Option<Mutation>,
        /// Number of random linear systems checked against brute force.
        #[arg(long, default_value_t = 0)]
        linear: u64,
    },
}

/// Parses `args`, runs the command and writes the report. Returns the exit
/// code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_PASS
            };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let mut report = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if cli.timing {
        report.elapsed_ms = Some(start.elapsed().as_millis());
    }
    let format = match cli.report {
        ReportFormat::Text => Format::Text,
        ReportFormat::Structured => Format::Structured,
    };
    let text = report.render(format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => print!("{text}"),
    }
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Runs a parsed command. `Err` means the input could not be used at all.
pub fn execute(command: &Command) -> Result<Report> {
    match command {
        Command::CheckAlgebra { instance, algebra } => {
            cmd_check_algebra(&instance.instance, algebra.as_deref())
        }
        Command::DualBasis { instance, algebra } => {
            cmd_dual_basis(&instance.instance, algebra.as_deref())
        }
        Command::Compose {
            instance,
            first,
            second,
        } => cmd_compose(&instance.instance, first, second),
        Command::IdempotentPower { instance, cycle } => {
            cmd_idempotent_power(&instance.instance, cycle)
        }
        Command::Descend { instance } => cmd_descend(&instance.instance),
        Command::Verify { instance, cycle } => cmd_verify(&instance.instance, cycle.as_deref()),
        Command::PropertySuite {
            seed,
            count,
            max_rank,
            moduli,
            properties,
            mutation,
            linear,
        } => {
            let mut cfg = SuiteConfig::new(*seed, *count);
            cfg.max_rank = *max_rank;
            if let Some(m) = moduli {
                cfg.moduli = m.clone();
            }
            if let Some(p) = properties {
                cfg.properties = p.clone();
            }
            cmd_property_suite(&cfg, *mutation, *linear)
        }
    }
}

fn start(command: &str, path: &Path) -> Result<(Instance, Report)> {
    let inst = Instance::load(path)?;
    let mut r = Report::new(command);
    r.instance = Some(path.display().to_string());
    r.set("modulus", json!(inst.modulus.get()));
    Ok((inst, r))
}

fn selected<'a>(
    inst: &'a Instance,
    only: Option<&str>,
) -> Result<Vec<(&'a String, &'a SplitAlgebra)>> {
    match only {
        Some(name) => {
            let (k, v) = inst
                .algebras
                .get_key_value(name)
                .ok_or_else(|| Error::UnknownName(name.to_string()))?;
            Ok(vec![(k, &**v)])
        }
        None => Ok(inst.algebras.iter().map(|(k, v)| (k, &**v)).collect()),
    }
}

fn linear_combination(coeffs: &[u64]) -> String {
    let terms: Vec<String> = coeffs
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(i, &c)| {
            if c == 1 {
                format!("x{i}")
            } else {
                format!("{c}*x{i}")
            }
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

/// `x0*=x1, x1*=x0`, or `None` when the pairing is degenerate.
pub fn dual_basis_line(a: &SplitAlgebra) -> Option<String> {
    let d = a.dual_basis().ok()?;
    let parts: Vec<String> = (0..a.rank())
        .map(|j| format!("x{j}*={}", linear_combination(&d.element(j))))
        .collect();
    Some(parts.join(", "))
}

pub fn cmd_check_algebra(path: &Path, only: Option<&str>) -> Result<Report> {
    let (inst, mut r) = start("check-algebra", path)?;
    let mut body = serde_json::Map::new();
    for (name, a) in selected(&inst, only)? {
        let violations = a.validate();
        let summary = if violations.is_empty() {
            format!(
                "valid; dual basis: {}",
                dual_basis_line(a).unwrap_or_default()
            )
        } else {
            format!("{} violation(s)", violations.len())
        };
        r.check(
            format!("{name} satisfies the split algebra axioms"),
            violations.is_empty(),
            violations.first().map(|v| v.to_string()),
        );
        body.insert(
            name.clone(),
            json!({
                "rank": a.rank(),
                "dim": a.dim(),
                "summary": summary,
                "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            }),
        );
    }
    r.set("algebras", serde_json::Value::Object(body));
    Ok(r)
}

pub fn cmd_dual_basis(path: &Path, only: Option<&str>) -> Result<Report> {
    let (inst, mut r) = start("dual-basis", path)?;
    let mut body = serde_json::Map::new();
    for (name, a) in selected(&inst, only)? {
        let gram = a.gram();
        let entry = match a.dual_basis() {
            Ok(d) => {
                r.check(format!("{name} has a perfect pairing"), true, None);
                let psi = gram.mul(&d.coeffs)?;
                let ok = psi == crate::modring::Matrix::identity(a.modulus(), a.rank());
                r.check(format!("{name}: deg(x_i x_j*) = delta_ij"), ok, None);
                json!({
                    "gram": report::matrix_json(&gram),
                    "dual": dual_basis_line(a),
                    "coefficients": report::matrix_json(&d.coeffs),
                })
            }
            Err(e) => {
                r.check(
                    format!("{name} has a perfect pairing"),
                    false,
                    Some(e.to_string()),
                );
                json!({ "gram": report::matrix_json(&gram), "dual": null })
            }
        };
        body.insert(name.clone(), entry);
    }
    r.set("algebras", serde_json::Value::Object(body));
    Ok(r)
}

pub fn cmd_compose(path: &Path, first: &str, second: &str) -> Result<Report> {
    let (inst, mut r) = start("compose", path)?;
    let u = inst.correspondence(first)?;
    let v = inst.correspondence(second)?;
    let w = compose(&u, &v)?;
    r.set("first", json!(first));
    r.set("second", json!(second));
    r.set("result", report::correspondence_json(&w));
    if w.is_endomorphism() && w.targets().len() == 1 {
        r.set("matrix", report::matrix_json(&matrix_form(&w)?));
    }
    r.check(format!("{second} o {first} computed"), true, None);
    Ok(r)
}

pub fn cmd_idempotent_power(path: &Path, name: &str) -> Result<Report> {
    let (inst, mut r) = start("idempotent-power", path)?;
    let e = inst.correspondence(name)?;
    let ip = idempotent_power(&e)?;
    r.set("cycle", json!(name));
    r.set("exponent", json!(ip.exponent));
    r.set("tail", json!(ip.tail));
    r.set("period", json!(ip.period));
    r.set("idempotent", report::correspondence_json(&ip.idempotent));
    r.set("matrix", report::matrix_json(&matrix_form(&ip.idempotent)?));
    if !ip.idempotent.is_zero() {
        r.set("cdmin", report::cdmin_json(&cdmin(&ip.idempotent)?));
    }
    let idem = compose(&ip.idempotent, &ip.idempotent)? == ip.idempotent;
    r.check(format!("{name}^{} is idempotent", ip.exponent), idem, None);
    Ok(r)
}

/// Result of running a descent, shared by `descend` and `verify`.
enum DescentRun {
    Certificate(Box<descent::DescentCertificate>),
    Hypotheses(descent::HypothesisReport),
    StepFailure {
        step: char,
        detail: String,
        hypotheses: descent::HypothesisReport,
    },
    Rationality {
        cycle: String,
        label: String,
        hypotheses: descent::HypothesisReport,
    },
}

fn run(inst: &descent::DescentInstance) -> Result<DescentRun> {
    let hyp = check_hypotheses(inst)?;
    if !hyp.holds() {
        return Ok(DescentRun::Hypotheses(hyp));
    }
    match run_descent(inst) {
        Ok(mut cert) => {
            cert.indecomposability = hyp.indecomposability;
            cert.advisories = hyp.advisories;
            Ok(DescentRun::Certificate(Box::new(cert)))
        }
        Err(Error::StepFailure { step, detail }) => Ok(DescentRun::StepFailure {
            step,
            detail,
            hypotheses: hyp,
        }),
        Err(Error::RationalityFailure { cycle, label }) => Ok(DescentRun::Rationality {
            cycle,
            label,
            hypotheses: hyp,
        }),
        Err(e) => Err(e),
    }
}

fn describe(r: &mut Report, inst: &descent::DescentInstance, run: &DescentRun) -> Result<()> {
    match run {
        DescentRun::Certificate(cert) => {
            r.set("outcome", json!("certificate"));
            r.set("certificate", report::certificate_json(cert));
            for c in &cert.checks {
                r.check(format!("({}) {}", c.step, c.name), true, None);
            }
            for c in replay(inst, cert)? {
                r.check(format!("replay: {}", c.name), c.holds, None);
            }
        }
        DescentRun::Hypotheses(h) => {
            r.set("outcome", json!("hypothesis_violation"));
            r.set("hypotheses", report::hypotheses_json(h));
            for v in &h.violations {
                r.check("hypothesis", false, Some(v.to_string()));
            }
        }
        DescentRun::StepFailure {
            step,
            detail,
            hypotheses,
        } => {
            r.set("outcome", json!("step_failure"));
            r.set("step", json!(step.to_string()));
            r.set("detail", json!(detail));
            r.set("hypotheses", report::hypotheses_json(hypotheses));
            r.check(format!("step ({step})"), false, Some(detail.clone()));
        }
        DescentRun::Rationality {
            cycle,
            label,
            hypotheses,
        } => {
            r.set("outcome", json!("step_failure"));
            r.set("step", json!("g"));
            r.set("detail", json!(format!("{cycle} is not {label}-rational")));
            r.set("hypotheses", report::hypotheses_json(hypotheses));
            r.check(
                "(g) rationality audit",
                false,
                Some(format!("{cycle} is not {label}-rational")),
            );
        }
    }
    Ok(())
}

pub fn cmd_descend(path: &Path) -> Result<Report> {
    let (inst, mut r) = start("descend", path)?;
    let d = inst.descent_instance()?;
    let outcome = run(&d)?;
    describe(&mut r, &d, &outcome)?;
    Ok(r)
}

pub fn cmd_verify(path: &Path, cycle: Option<&str>) -> Result<Report> {
    let (inst, mut r) = start("verify", path)?;
    if let Some(name) = cycle {
        let p = inst.correspondence(name)?;
        let pc = projector_check(&p)?;
        r.set("cycle", json!(name));
        r.set("matrix", report::matrix_json(&matrix_form(&p)?));
        r.check(format!("{name} o {name} = {name}"), pc.engine, None);
        r.check("P^2 = P on the matrix form", pc.matrix, None);
        if pc.engine && !p.is_zero() {
            let c = cdmin(&p)?;
            r.set("cdmin", report::cdmin_json(&c));
            let p2 = compose(&p, &p)?;
            r.check(
                format!("P^2 = P on rows of codimension {}", c.value),
                descent::low_codim_component_check(&p2, &p, c.value)?,
                None,
            );
        }
        return Ok(r);
    }
    let d = inst.descent_instance()?;
    let outcome = run(&d)?;
    let mut scratch = Report::new("verify");
    describe(&mut scratch, &d, &outcome)?;
    r.body.extend(scratch.body);
    let Some(exp) = &inst.expected else {
        r.checks = scratch.checks;
        return Ok(r);
    };
    let (found, step) = match &outcome {
        DescentRun::Certificate(_) => (ExpectedOutcome::Certificate, None),
        DescentRun::Hypotheses(_) => (ExpectedOutcome::HypothesisViolation, None),
        DescentRun::StepFailure { step, .. } => (ExpectedOutcome::StepFailure, Some(*step)),
        DescentRun::Rationality { .. } => (ExpectedOutcome::StepFailure, Some('g')),
    };
    r.check(
        "outcome matches expected",
        found == exp.outcome,
        Some(format!("expected {:?}, found {found:?}", exp.outcome)),
    );
    if let Some(s) = exp.step {
        r.check(
            "failing step matches expected",
            step == Some(s),
            Some(format!("expected ({s})")),
        );
    }
    if let DescentRun::Certificate(cert) = &outcome {
        // a certificate must replay in full
        for c in scratch.checks {
            r.checks.push(c);
        }
        let n2 = cert.transposed.as_ref().map(|t| t.n2);
        let pairs = [
            ("n1", exp.n1, Some(cert.n1)),
            ("n2", exp.n2, n2),
            ("nbar", exp.nbar, Some(cert.nbar)),
        ];
        for (label, want, got) in pairs {
            if let Some(w) = want {
                r.check(
                    format!("{label} = {w}"),
                    got == Some(w),
                    got.map(|g| format!("found {g}")),
                );
            }
        }
    }
    Ok(r)
}

pub fn cmd_property_suite(
    cfg: &SuiteConfig,
    mutation: Option<Mutation>,
    linear: u64,
) -> Result<Report> {
    let mut r = Report::new("property-suite");
    r.seed = Some(cfg.seed);
    let suite = match mutation {
        Some(m) => properties::run_suite(cfg, &Mutant(m))?,
        None => properties::run_suite(cfg, &Exact)?,
    };
    for o in &suite.outcomes {
        let detail = o
            .counterexample
            .as_ref()
            .map(|c| format!("sample {}: {}", c.sample, c.message));
        r.check(
            format!(
                "{} ({} samples, {} failures)",
                o.property.name(),
                o.samples,
                o.failures
            ),
            o.passed(),
            detail,
        );
    }
    r.set("suite", report::suite_json(&suite));
    if linear > 0 {
        let l = properties::run_linear_suite(cfg.seed, linear, &cfg.moduli)?;
        r.check(
            format!(
                "solve and inverse against brute force ({} systems)",
                l.samples
            ),
            l.failures == 0,
            l.first_failure.as_ref().map(|(_, _, m)| m.clone()),
        );
        r.set("linear", report::linear_json(&l));
    }
    Ok(r)
}
