//! JSON instance files.
//!
//! ```json
//! {
//!   "modulus": 2,
//!   "algebras": {
//!     "X": { "dim": 1, "phi": [1, 0], "unit": 0, "degree": [0, 1], "mult": [] },
//!     "Y": { "kunneth": ["X", "X"] }
//!   },
//!   "cycles": {
//!     "p": { "space": ["X", "X"], "identity": true },
//!     "f": { "space": ["X", "Y"], "terms": [[0, 3, 1], [1, 1, 1]] }
//!   },
//!   "rational": [
//!     { "label": "F", "space": ["X", "X"], "generators": ["p", [[0, 0, 1]]] },
//!     { "label": "E", "space": ["X", "Y"], "full": true }
//!   ],
//!   "descent": { "x": "X", "y": "Y", "p": "p", "f": "f", "g": "g", "f1": "f1" }
//! }
//! ```
//!
//! `mult` lists `[i, j, k, c]` for `x_i x_j = ... + c x_k` over non-unit
//! `i, j`; entries are mirrored and products with the unit are implied.
//! Cycles are sparse `terms` (index tuple followed by the coefficient), a
//! `matrix` `P` standing for `sum P_ij x_i x x_j*`, or `identity`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use crate::correspondences::Correspondence;
use crate::cycles::{CycleClass, ProductSpace};
use crate::descent::DescentInstance;
use crate::error::{Error, Result};
use crate::modring::{Matrix, Modulus};
use crate::rationality::{FieldLabel, RationalFamily, RationalStructure};
use crate::split_algebra::SplitAlgebra;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    modulus: u64,
    algebras: BTreeMap<String, AlgebraSpec>,
    #[serde(default)]
    cycles: BTreeMap<String, CycleSpec>,
    #[serde(default)]
    rational: Vec<RationalSpec>,
    descent: Option<DescentSpec>,
    expected: Option<Expected>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AlgebraSpec {
    dim: Option<usize>,
    phi: Option<Vec<usize>>,
    unit: Option<usize>,
    degree: Option<Vec<i64>>,
    mult: Option<Vec<[i64; 4]>>,
    kunneth: Option<Vec<String>>,
    projective_space: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CycleSpec {
    space: Vec<String>,
    terms: Option<Vec<Vec<i64>>>,
    matrix: Option<Vec<Vec<i64>>>,
    #[serde(default)]
    identity: bool,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GeneratorSpec {
    Named(String),
    Terms(Vec<Vec<i64>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RationalSpec {
    label: FieldLabel,
    space: Vec<String>,
    #[serde(default)]
    generators: Vec<GeneratorSpec>,
    #[serde(default)]
    full: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DescentSpec {
    pub x: String,
    pub y: String,
    pub p: String,
    pub f: String,
    pub g: String,
    pub f1: String,
    pub f1_transposed: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedOutcome {
    Certificate,
    StepFailure,
    HypothesisViolation,
}

/// What a golden instance is known to produce.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub outcome: ExpectedOutcome,
    pub step: Option<char>,
    pub n1: Option<u64>,
    pub n2: Option<u64>,
    pub nbar: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub modulus: Modulus,
    pub algebras: BTreeMap<String, Arc<SplitAlgebra>>,
    pub cycles: BTreeMap<String, CycleClass>,
    /// Factor names of each cycle's space.
    pub spaces: BTreeMap<String, Vec<String>>,
    pub rational: RationalFamily,
    pub descent: Option<DescentSpec>,
    pub expected: Option<Expected>,
}

fn shape(msg: impl Into<String>) -> Error {
    Error::Shape(msg.into())
}

impl Instance {
    pub fn load(path: &Path) -> Result<Instance> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Instance> {
        let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        let modulus = Modulus::new(file.modulus)?;
        let mut algebras = BTreeMap::new();
        for name in file.algebras.keys() {
            resolve_algebra(
                name,
                &file.algebras,
                modulus,
                &mut algebras,
                &mut Vec::new(),
            )?;
        }
        let space_of = |names: &[String]| -> Result<ProductSpace> {
            let factors = names
                .iter()
                .map(|n| {
                    algebras
                        .get(n)
                        .cloned()
                        .ok_or_else(|| Error::UnknownName(n.clone()))
                })
                .collect::<Result<Vec<_>>>()?;
            ProductSpace::new(factors)
        };
        let mut cycles = BTreeMap::new();
        let mut spaces = BTreeMap::new();
        for (name, spec) in &file.cycles {
            let space = space_of(&spec.space)?;
            let c = build_cycle(name, spec, space)?;
            cycles.insert(name.clone(), c);
            spaces.insert(name.clone(), spec.space.clone());
        }
        let mut rational = RationalFamily::new();
        for spec in &file.rational {
            let space = space_of(&spec.space)?;
            if rational.get(spec.label, &space).is_some() {
                return Err(shape(format!(
                    "{}-rational structure on {:?} declared twice",
                    spec.label, spec.space
                )));
            }
            let r = if spec.full {
                if !spec.generators.is_empty() {
                    return Err(shape("a full structure takes no generators"));
                }
                RationalStructure::full(spec.label, space)?
            } else {
                let gens = spec
                    .generators
                    .iter()
                    .map(|g| match g {
                        GeneratorSpec::Named(n) => cycles
                            .get(n)
                            .cloned()
                            .ok_or_else(|| Error::UnknownName(n.clone())),
                        GeneratorSpec::Terms(t) => terms_cycle(space.clone(), t),
                    })
                    .collect::<Result<Vec<_>>>()?;
                RationalStructure::new(spec.label, space, gens)?
            };
            rational.push(r);
        }
        if let Some(d) = &file.descent {
            for n in [&d.x, &d.y] {
                if !algebras.contains_key(n) {
                    return Err(Error::UnknownName(n.clone()));
                }
            }
            for n in [&d.p, &d.f, &d.g, &d.f1]
                .into_iter()
                .chain(d.f1_transposed.as_ref())
            {
                if !cycles.contains_key(n) {
                    return Err(Error::UnknownName(n.clone()));
                }
            }
        }
        Ok(Instance {
            modulus,
            algebras,
            cycles,
            spaces,
            rational,
            descent: file.descent,
            expected: file.expected,
        })
    }

    pub fn algebra(&self, name: &str) -> Result<&Arc<SplitAlgebra>> {
        self.algebras
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn cycle(&self, name: &str) -> Result<&CycleClass> {
        self.cycles
            .get(name)
            .ok_or_else(|| Error::UnknownName(name.to_string()))
    }

    pub fn correspondence(&self, name: &str) -> Result<Correspondence> {
        Correspondence::new(self.cycle(name)?.clone())
    }

    pub fn descent_instance(&self) -> Result<DescentInstance> {
        let d = self
            .descent
            .as_ref()
            .ok_or(Error::MissingBlock("descent"))?;
        Ok(DescentInstance {
            x: self.algebra(&d.x)?.clone(),
            y: self.algebra(&d.y)?.clone(),
            p: self.correspondence(&d.p)?,
            f: self.correspondence(&d.f)?,
            g: self.correspondence(&d.g)?,
            f1: self.cycle(&d.f1)?.clone(),
            f1_transposed: d
                .f1_transposed
                .as_ref()
                .map(|n| self.cycle(n).cloned())
                .transpose()?,
            rational: self.rational.clone(),
        })
    }
}

fn resolve_algebra(
    name: &str,
    specs: &BTreeMap<String, AlgebraSpec>,
    modulus: Modulus,
    done: &mut BTreeMap<String, Arc<SplitAlgebra>>,
    visiting: &mut Vec<String>,
) -> Result<Arc<SplitAlgebra>> {
    if let Some(a) = done.get(name) {
        return Ok(a.clone());
    }
    if visiting.iter().any(|v| v == name) {
        return Err(shape(format!(
            "algebra `{name}` is defined in terms of itself"
        )));
    }
    let spec = specs
        .get(name)
        .ok_or_else(|| Error::UnknownName(name.to_string()))?;
    visiting.push(name.to_string());
    let table_fields = spec.dim.is_some()
        || spec.phi.is_some()
        || spec.unit.is_some()
        || spec.degree.is_some()
        || spec.mult.is_some();
    let forms = usize::from(table_fields)
        + usize::from(spec.kunneth.is_some())
        + usize::from(spec.projective_space.is_some());
    if forms != 1 {
        return Err(shape(format!(
            "algebra `{name}` needs exactly one of a table, `kunneth` or `projective_space`"
        )));
    }
    let a = if let Some(parts) = &spec.kunneth {
        let mut iter = parts.iter();
        let first = iter
            .next()
            .ok_or_else(|| shape(format!("algebra `{name}`: empty Kunneth product")))?;
        let mut acc = (*resolve_algebra(first, specs, modulus, done, visiting)?).clone();
        for p in iter {
            acc = acc.kunneth(&*resolve_algebra(p, specs, modulus, done, visiting)?)?;
        }
        acc
    } else if let Some(d) = spec.projective_space {
        SplitAlgebra::projective_space(modulus, d)
    } else {
        let missing = |f: &str| shape(format!("algebra `{name}` is missing `{f}`"));
        let dim = spec.dim.ok_or_else(|| missing("dim"))?;
        let phi = spec.phi.clone().ok_or_else(|| missing("phi"))?;
        let unit = spec.unit.ok_or_else(|| missing("unit"))?;
        let degree: Vec<u64> = spec
            .degree
            .as_ref()
            .ok_or_else(|| missing("degree"))?
            .iter()
            .map(|&d| modulus.reduce(d as i128))
            .collect();
        let n = phi.len();
        let mut seen: BTreeMap<(usize, usize, usize), u64> = BTreeMap::new();
        let mut products = Vec::new();
        for &[i, j, k, c] in spec.mult.as_deref().unwrap_or(&[]) {
            let idx = [i, j, k];
            if idx.iter().any(|&v| v < 0 || v as usize >= n) {
                return Err(shape(format!(
                    "algebra `{name}`: product index out of range in {idx:?}"
                )));
            }
            let (i, j, k) = (i as usize, j as usize, k as usize);
            if i == unit || j == unit {
                return Err(shape(format!(
                    "algebra `{name}`: products with the unit are implied, got ({i},{j},{k})"
                )));
            }
            let key = (i.min(j), i.max(j), k);
            let v = modulus.reduce(c as i128);
            if let Some(&prev) = seen.get(&key) {
                if prev != v {
                    return Err(shape(format!(
                        "algebra `{name}`: conflicting values for x_{i} x_{j} at x_{k}"
                    )));
                }
                continue;
            }
            seen.insert(key, v);
            products.push((key.0, key.1, k, v as i64));
        }
        SplitAlgebra::from_products(modulus, dim, phi, unit, degree, &products)?
    };
    visiting.pop();
    let a = Arc::new(a);
    done.insert(name.to_string(), a.clone());
    Ok(a)
}

fn terms_cycle(space: ProductSpace, terms: &[Vec<i64>]) -> Result<CycleClass> {
    let k = space.len();
    let mut out = CycleClass::zero(space.clone());
    let m = space.modulus();
    for t in terms {
        if t.len() != k + 1 {
            return Err(shape(format!(
                "term {t:?} needs {k} indices and a coefficient"
            )));
        }
        let mut idx = Vec::with_capacity(k);
        for (pos, &v) in t[..k].iter().enumerate() {
            if v < 0 || v as usize >= space.factor(pos).rank() {
                return Err(shape(format!("term {t:?}: index {v} out of range")));
            }
            idx.push(v as usize);
        }
        let cur = out.coeff(&idx);
        out.set_coeff(&idx, m.add(cur, m.reduce(t[k] as i128)));
    }
    Ok(out)
}

fn build_cycle(name: &str, spec: &CycleSpec, space: ProductSpace) -> Result<CycleClass> {
    let forms = usize::from(spec.terms.is_some())
        + usize::from(spec.matrix.is_some())
        + usize::from(spec.identity);
    if forms != 1 {
        return Err(shape(format!(
            "cycle `{name}` needs exactly one of `terms`, `matrix` or `identity`"
        )));
    }
    if let Some(t) = &spec.terms {
        return terms_cycle(space, t);
    }
    if space.len() != 2 || space.factor(0) != space.factor(1) {
        return Err(shape(format!(
            "cycle `{name}`: `matrix` and `identity` need a space X x X"
        )));
    }
    let x = space.factor(0).clone();
    let corr = match &spec.matrix {
        Some(rows) => Correspondence::from_matrix(&x, &Matrix::from_rows(x.modulus(), rows)?)?,
        None => Correspondence::identity(&x)?,
    };
    Ok(corr.into_cycle())
}

#[cfg(test)]
mod tests {
    use super::*;

    const P1: &str = r#"{
        "modulus": 5,
        "algebras": { "X": { "dim": 1, "phi": [1, 0], "unit": 0, "degree": [0, 1] } },
        "cycles": {
            "d": { "space": ["X", "X"], "identity": true },
            "t": { "space": ["X", "X"], "terms": [[0, 1, 1], [1, 0, 1]] }
        }
    }"#;

    #[test]
    fn identity_matches_terms() {
        let inst = Instance::parse(P1).unwrap();
        assert_eq!(inst.cycle("d").unwrap(), inst.cycle("t").unwrap());
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        assert!(matches!(
            Instance::parse(""),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn parse_error_position() {
        let err = Instance::parse("{\n  \"modulus\": 2,\n  \"algebras\": [}").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn trivial_modulus_rejected() {
        let text = P1.replace("\"modulus\": 5", "\"modulus\": 1");
        assert_eq!(
            Instance::parse(&text).unwrap_err(),
            Error::InvalidModulus(1)
        );
    }

    #[test]
    fn unknown_names() {
        let text = P1.replace(
            "[\"X\", \"X\"], \"identity\"",
            "[\"X\", \"Q\"], \"identity\"",
        );
        assert_eq!(
            Instance::parse(&text).unwrap_err(),
            Error::UnknownName("Q".into())
        );
        assert!(matches!(
            Instance::parse(P1).unwrap().descent_instance(),
            Err(Error::MissingBlock("descent"))
        ));
    }

    #[test]
    fn conflicting_products_rejected() {
        let text = r#"{ "modulus": 3, "algebras": { "X": { "dim": 2, "phi": [2, 1, 0], "unit": 0,
            "degree": [0, 0, 1], "mult": [[1, 1, 2, 1], [1, 1, 2, 2]] } } }"#;
        assert!(matches!(Instance::parse(text), Err(Error::Shape(_))));
    }

    #[test]
    fn kunneth_shorthand() {
        let text = r#"{ "modulus": 3, "algebras": { "X": { "projective_space": 1 }, "Y": { "kunneth": ["X", "X"] } } }"#;
        let inst = Instance::parse(text).unwrap();
        let y = inst.algebra("Y").unwrap();
        assert_eq!((y.rank(), y.dim()), (4, 2));
        assert!(y.is_valid());
    }
}
