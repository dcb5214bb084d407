//! Command reports, rendered as text or as JSON.
//!
//! A report is a list of named checks plus a JSON body. Keys are sorted and
//! no wall-clock data is included unless asked for, so equal inputs give
//! byte-identical output.

use serde_json::{json, Map, Value};

use crate::correspondences::{CdminReport, Correspondence};
use crate::cycles::CycleClass;
use crate::descent::{DescentCertificate, HypothesisReport, Indecomposability};
use crate::modring::Matrix;
use crate::properties::{Counterexample, LinearOutcome, SuiteReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub instance: Option<String>,
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub body: Map<String, Value>,
    pub elapsed_ms: Option<u128>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.to_string(),
            instance: None,
            seed: None,
            checks: Vec::new(),
            body: Map::new(),
            elapsed_ms: None,
        }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: Option<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.body.insert(key.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Value {
        let checks: Vec<Value> = self
            .checks
            .iter()
            .map(|c| json!({ "name": c.name, "passed": c.passed, "detail": c.detail }))
            .collect();
        let mut root = Map::new();
        root.insert("command".into(), json!(self.command));
        root.insert("instance".into(), json!(self.instance));
        root.insert("seed".into(), json!(self.seed));
        root.insert("checks".into(), Value::Array(checks));
        root.insert(
            "result".into(),
            json!(if self.passed() { "pass" } else { "fail" }),
        );
        root.insert("body".into(), Value::Object(self.body.clone()));
        if let Some(ms) = self.elapsed_ms {
            root.insert("elapsed_ms".into(), json!(ms));
        }
        Value::Object(root)
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Structured => {
                let mut s =
                    serde_json::to_string_pretty(&self.to_json()).expect("plain JSON values");
                s.push('\n');
                s
            }
            Format::Text => self.render_text(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("command: {}\n", self.command));
        if let Some(i) = &self.instance {
            out.push_str(&format!("instance: {i}\n"));
        }
        if let Some(s) = self.seed {
            out.push_str(&format!("seed: {s}\n"));
        }
        for (k, v) in &self.body {
            write_value(&mut out, k, v, 0);
        }
        for c in &self.checks {
            let mark = if c.passed { "PASS" } else { "FAIL" };
            match &c.detail {
                Some(d) => out.push_str(&format!("{mark} {}: {d}\n", c.name)),
                None => out.push_str(&format!("{mark} {}\n", c.name)),
            }
        }
        if let Some(ms) = self.elapsed_ms {
            out.push_str(&format!("elapsed: {ms} ms\n"));
        }
        out.push_str(if self.passed() {
            "result: pass\n"
        } else {
            "result: fail\n"
        });
        out
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(a) if a.iter().all(|x| !x.is_object()) => {
            Some(serde_json::to_string(v).unwrap_or_else(|_| format!("{a:?}")))
        }
        _ => None,
    }
}

fn write_value(out: &mut String, key: &str, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    if let Some(s) = scalar(v) {
        out.push_str(&format!("{pad}{key}: {s}\n"));
        return;
    }
    out.push_str(&format!("{pad}{key}:\n"));
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                write_value(out, k, x, depth + 1);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                write_value(out, &format!("[{i}]"), x, depth + 1);
            }
        }
        _ => {}
    }
}

/// Sparse terms `[i, j, ..., c]` plus the readable form.
pub fn cycle_json(c: &CycleClass) -> Value {
    let terms: Vec<Value> = c
        .terms()
        .into_iter()
        .map(|(idx, v)| {
            let mut t: Vec<u64> = idx.into_iter().map(|i| i as u64).collect();
            t.push(v);
            json!(t)
        })
        .collect();
    json!({ "terms": terms, "text": c.to_string() })
}

pub fn correspondence_json(c: &Correspondence) -> Value {
    cycle_json(c.cycle())
}

pub fn matrix_json(m: &Matrix) -> Value {
    let rows: Vec<Value> = (0..m.rows()).map(|i| json!(m.row(i))).collect();
    Value::Array(rows)
}

pub fn cdmin_json(c: &CdminReport) -> Value {
    json!({ "value": c.value, "support": c.support })
}

pub fn indecomposability_json(i: &Indecomposability) -> Value {
    match i {
        Indecomposability::Verified { monoid_size } => {
            json!({ "status": "verified", "monoid_size": monoid_size })
        }
        Indecomposability::Decomposable { idempotent } => {
            json!({ "status": "decomposable", "idempotent": cycle_json(idempotent) })
        }
        Indecomposability::NotDeclared => json!({ "status": "not checked" }),
        Indecomposability::Inconclusive { explored } => {
            json!({ "status": "inconclusive", "explored": explored })
        }
    }
}

pub fn hypotheses_json(h: &HypothesisReport) -> Value {
    json!({
        "violations": h.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "advisories": h.advisories,
        "indecomposability": indecomposability_json(&h.indecomposability),
    })
}

pub fn certificate_json(c: &DescentCertificate) -> Value {
    let transposed = c.transposed.as_ref().map(|t| {
        json!({
            "f1t": cycle_json(&t.lift),
            "f1t_supplied": t.lift_supplied,
            "f2t": cycle_json(&t.f2),
            "g_tilde": correspondence_json(&t.g_tilde),
            "tf3_o_g_tilde": correspondence_json(&t.u),
            "n2": t.n2,
        })
    });
    json!({
        "trivial": c.trivial,
        "cdmin": c.cdmin.as_ref().map(cdmin_json),
        "supports": c.supports.as_ref().map(|s| json!({ "F": s.f_set, "G": s.g_set, "F1": s.f1 })),
        "f1": cycle_json(&c.f1),
        "f2": cycle_json(&c.f2),
        "f3": correspondence_json(&c.f3),
        "g_o_f3": correspondence_json(&c.u),
        "n1": c.n1,
        "g1": correspondence_json(&c.g1),
        "transposed": transposed,
        "g_hat": correspondence_json(&c.g_hat),
        "nbar": c.nbar,
        "f_hat": correspondence_json(&c.f_hat),
        "verified": c.checks.iter().map(|v| format!("({}) {}", v.step, v.name)).collect::<Vec<_>>(),
        "indecomposability": indecomposability_json(&c.indecomposability),
        "advisories": c.advisories,
    })
}

fn counterexample_json(c: &Counterexample) -> Value {
    let algebra = |a: &crate::split_algebra::SplitAlgebra| {
        let n = a.rank();
        let mut mult = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    let v = a.structure_constant(i, j, k);
                    if v != 0 && i != a.unit() && j != a.unit() {
                        mult.push(json!([i, j, k, v]));
                    }
                }
            }
        }
        json!({
            "dim": a.dim(),
            "phi": a.phis(),
            "unit": a.unit(),
            "degree": a.degrees(),
            "mult": mult,
        })
    };
    json!({
        "sample": c.sample,
        "message": c.message,
        "modulus": c.case.modulus().get(),
        "original_max_rank": c.original_rank,
        "shrunk_max_rank": c.case.max_rank(),
        "coefficients_zeroed": c.zeroed,
        "X": algebra(&c.case.x),
        "Y": algebra(&c.case.y),
        "Z": algebra(&c.case.z),
        "inputs": c.case.inputs,
    })
}

pub fn suite_json(s: &SuiteReport) -> Value {
    let outcomes: Vec<Value> = s
        .outcomes
        .iter()
        .map(|o| {
            json!({
                "property": o.property.name(),
                "samples": o.samples,
                "failures": o.failures,
                "counterexample": o.counterexample.as_ref().map(counterexample_json),
            })
        })
        .collect();
    json!({
        "calculus": s.calculus,
        "count": s.config.count,
        "max_rank": s.config.max_rank,
        "moduli": s.config.moduli,
        "algebras_accepted": s.generation.accepted,
        "tables_rejected": s.generation.rejected,
        "properties": outcomes,
    })
}

pub fn linear_json(l: &LinearOutcome) -> Value {
    json!({
        "samples": l.samples,
        "failures": l.failures,
        "first_failure": l.first_failure.as_ref().map(|(s, c, msg)| json!({
            "sample": s,
            "modulus": c.a.modulus().get(),
            "a": matrix_json(&c.a),
            "b": c.b.column(0),
            "message": msg,
        })),
    })
}
