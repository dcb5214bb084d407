//! Declared subgroups of rational cycles and exact membership.
//!
//! The engine has no access to fields of definition, so each rational
//! subgroup is given by generators. Membership is a linear system over `Z/m`
//! solved through the Smith form; the closure and inclusion audits check that
//! the declared data is consistent with the operations the descent uses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::correspondences::{self, Correspondence};
use crate::cycles::{self, CycleClass, ProductSpace};
use crate::error::{Error, Result};
use crate::modring::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FieldLabel {
    #[serde(rename = "F")]
    Base,
    #[serde(rename = "E")]
    Extension,
    #[serde(rename = "F(X)")]
    BaseFunctionField,
    #[serde(rename = "E(X)")]
    ExtensionFunctionField,
    #[serde(rename = "split")]
    Split,
}

impl FieldLabel {
    pub const ALL: [FieldLabel; 5] = [
        FieldLabel::Base,
        FieldLabel::Extension,
        FieldLabel::BaseFunctionField,
        FieldLabel::ExtensionFunctionField,
        FieldLabel::Split,
    ];

    /// Pairs `(smaller, larger)` of the inclusion chains
    /// `F < E < split` and `F < F(X) < E(X) < split`.
    pub const INCLUSIONS: [(FieldLabel, FieldLabel); 5] = [
        (FieldLabel::Base, FieldLabel::Extension),
        (FieldLabel::Extension, FieldLabel::Split),
        (FieldLabel::Base, FieldLabel::BaseFunctionField),
        (
            FieldLabel::BaseFunctionField,
            FieldLabel::ExtensionFunctionField,
        ),
        (FieldLabel::ExtensionFunctionField, FieldLabel::Split),
    ];

    /// The label of the image under `eps*` (base change to the function field).
    pub fn at_generic_point(self) -> Option<FieldLabel> {
        match self {
            FieldLabel::Base => Some(FieldLabel::BaseFunctionField),
            FieldLabel::Extension => Some(FieldLabel::ExtensionFunctionField),
            FieldLabel::Split => Some(FieldLabel::Split),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FieldLabel::Base => "F",
            FieldLabel::Extension => "E",
            FieldLabel::BaseFunctionField => "F(X)",
            FieldLabel::ExtensionFunctionField => "E(X)",
            FieldLabel::Split => "split",
        }
    }
}

impl fmt::Display for FieldLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FieldLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone)]
pub struct RationalStructure {
    label: FieldLabel,
    space: ProductSpace,
    generators: Vec<CycleClass>,
}

impl RationalStructure {
    pub fn new(
        label: FieldLabel,
        space: ProductSpace,
        generators: Vec<CycleClass>,
    ) -> Result<Self> {
        if generators.iter().any(|g| g.space() != &space) {
            return Err(Error::SpaceMismatch(format!(
                "{label}-rational generator outside its cycle group"
            )));
        }
        Ok(RationalStructure {
            label,
            space,
            generators,
        })
    }

    /// The whole cycle group.
    pub fn full(label: FieldLabel, space: ProductSpace) -> Result<Self> {
        let generators = (0..space.size())
            .map(|flat| CycleClass::basis(space.clone(), &space.unflatten(flat)))
            .collect::<Result<_>>()?;
        Self::new(label, space, generators)
    }

    pub fn label(&self) -> FieldLabel {
        self.label
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn generators(&self) -> &[CycleClass] {
        &self.generators
    }

    pub fn with_generator(&self, g: CycleClass) -> Result<Self> {
        let mut generators = self.generators.clone();
        generators.push(g);
        Self::new(self.label, self.space.clone(), generators)
    }

    fn generator_matrix(&self) -> Matrix {
        let rows = self.space.size();
        let cols = self.generators.len();
        let mut a = Matrix::zeros(self.space.modulus(), rows, cols);
        for (j, g) in self.generators.iter().enumerate() {
            for (i, &v) in g.coeffs().iter().enumerate() {
                a.set(i, j, v);
            }
        }
        a
    }

    /// Canonical generator weights expressing `c`, if it is a member.
    pub fn coordinates(&self, c: &CycleClass) -> Result<Option<Vec<u64>>> {
        if c.space() != &self.space {
            return Err(Error::SpaceMismatch(format!(
                "cycle tested against the {}-rational structure of another space",
                self.label
            )));
        }
        if self.generators.is_empty() {
            return Ok(c.is_zero().then(Vec::new));
        }
        let b = Matrix::column_vector(self.space.modulus(), c.coeffs());
        Ok(self.generator_matrix().solve(&b)?.map(|x| x.column(0)))
    }

    pub fn contains(&self, c: &CycleClass) -> Result<bool> {
        Ok(self.coordinates(c)?.is_some())
    }

    /// Canonical member `r` of this structure with `eps*(r) = target`.
    pub fn epsilon_preimage(&self, target: &CycleClass) -> Result<Option<CycleClass>> {
        let images = self
            .generators
            .iter()
            .map(cycles::epsilon_pullback)
            .collect::<Result<Vec<_>>>()?;
        if images
            .first()
            .is_some_and(|im| im.space() != target.space())
        {
            return Err(Error::SpaceMismatch(
                "preimage target on the wrong space".into(),
            ));
        }
        let m = self.space.modulus();
        let mut a = Matrix::zeros(m, target.space().size(), images.len());
        for (j, im) in images.iter().enumerate() {
            for (i, &v) in im.coeffs().iter().enumerate() {
                a.set(i, j, v);
            }
        }
        if images.is_empty() {
            return Ok(target
                .is_zero()
                .then(|| CycleClass::zero(self.space.clone())));
        }
        let Some(w) = a.solve(&Matrix::column_vector(m, target.coeffs()))? else {
            return Ok(None);
        };
        let mut out = CycleClass::zero(self.space.clone());
        for (g, &c) in self.generators.iter().zip(&w.column(0)) {
            if c != 0 {
                out = out.add(&g.scale(c))?;
            }
        }
        Ok(Some(out))
    }
}

/// Free-function form of [`RationalStructure::contains`].
pub fn contains(r: &RationalStructure, c: &CycleClass) -> Result<bool> {
    r.contains(c)
}

/// True iff every generator of `r_ex` is already in `r_fx`: the declared
/// structures make restriction from `F(X)` to `E(X)` surjective.
pub fn restriction_epi_check(r_fx: &RationalStructure, r_ex: &RationalStructure) -> Result<bool> {
    if r_fx.space != r_ex.space {
        return Err(Error::SpaceMismatch(
            "restriction check across different cycle groups".into(),
        ));
    }
    for g in &r_ex.generators {
        if !r_fx.contains(g)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All declared rational structures of an instance.
#[derive(Debug, Clone, Default)]
pub struct RationalFamily {
    structures: Vec<RationalStructure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosureOp {
    Compose,
    Transpose,
    Epsilon,
    Diagonal,
}

impl ClosureOp {
    pub const ALL: [ClosureOp; 4] = [
        ClosureOp::Compose,
        ClosureOp::Transpose,
        ClosureOp::Epsilon,
        ClosureOp::Diagonal,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosureViolation {
    pub op: ClosureOp,
    pub label: FieldLabel,
    /// Indices of the structures involved, in declaration order.
    pub structures: Vec<usize>,
    /// Generator indices whose image escapes the target structure.
    pub generators: Vec<usize>,
    pub target: FieldLabel,
}

impl fmt::Display for ClosureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} of {}-rational generators {:?} (structures {:?}) leaves the {}-rational structure",
            self.op, self.label, self.generators, self.structures, self.target
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InclusionViolation {
    pub smaller: FieldLabel,
    pub larger: FieldLabel,
    pub structure: usize,
    pub generator: usize,
}

impl fmt::Display for InclusionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "generator {} of structure {} is {}-rational but not {}-rational",
            self.generator, self.structure, self.smaller, self.larger
        )
    }
}

impl RationalFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, r: RationalStructure) {
        self.structures.push(r);
    }

    pub fn structures(&self) -> &[RationalStructure] {
        &self.structures
    }

    pub fn get(&self, label: FieldLabel, space: &ProductSpace) -> Option<&RationalStructure> {
        self.structures
            .iter()
            .find(|r| r.label == label && &r.space == space)
    }

    fn index_of(&self, label: FieldLabel, space: &ProductSpace) -> Option<usize> {
        self.structures
            .iter()
            .position(|r| r.label == label && &r.space == space)
    }

    /// Checks each declared inclusion `smaller < larger` generator by generator.
    pub fn check_inclusions(&self) -> Result<Vec<InclusionViolation>> {
        let mut out = Vec::new();
        for (s_idx, small) in self.structures.iter().enumerate() {
            for (smaller, larger) in FieldLabel::INCLUSIONS {
                if small.label != smaller {
                    continue;
                }
                let Some(big) = self.get(larger, &small.space) else {
                    continue;
                };
                for (g_idx, g) in small.generators.iter().enumerate() {
                    if !big.contains(g)? {
                        out.push(InclusionViolation {
                            smaller,
                            larger,
                            structure: s_idx,
                            generator: g_idx,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// Audits closure of the declared structures under the selected
    /// operations. Images are only checked against structures that are
    /// declared; an undeclared target is not a violation.
    pub fn check_closure(&self, ops: &[ClosureOp]) -> Result<Vec<ClosureViolation>> {
        let mut out = Vec::new();
        for &op in ops {
            match op {
                ClosureOp::Compose => self.audit_compose(&mut out)?,
                ClosureOp::Transpose => self.audit_transpose(&mut out)?,
                ClosureOp::Epsilon => self.audit_triple(op, &mut out)?,
                ClosureOp::Diagonal => self.audit_triple(op, &mut out)?,
            }
        }
        Ok(out)
    }

    fn audit_compose(&self, out: &mut Vec<ClosureViolation>) -> Result<()> {
        for (i1, r1) in self.structures.iter().enumerate() {
            if r1.space.len() != 2 {
                continue;
            }
            for (i2, r2) in self.structures.iter().enumerate() {
                if r2.label != r1.label
                    || r2.space.len() < 2
                    || r2.space.factor(0) != r1.space.factor(1)
                {
                    continue;
                }
                let mut factors = vec![r1.space.factor(0).clone()];
                factors.extend(r2.space.factors()[1..].iter().cloned());
                let target_space = ProductSpace::new(factors)?;
                let Some(t_idx) = self.index_of(r1.label, &target_space) else {
                    continue;
                };
                let target = &self.structures[t_idx];
                for (a, g1) in r1.generators.iter().enumerate() {
                    let u = Correspondence::new(g1.clone())?;
                    for (b, g2) in r2.generators.iter().enumerate() {
                        let v = Correspondence::new(g2.clone())?;
                        let c = correspondences::compose(&u, &v)?;
                        if !target.contains(c.cycle())? {
                            out.push(ClosureViolation {
                                op: ClosureOp::Compose,
                                label: r1.label,
                                structures: vec![i1, i2, t_idx],
                                generators: vec![a, b],
                                target: r1.label,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn audit_transpose(&self, out: &mut Vec<ClosureViolation>) -> Result<()> {
        for (i, r) in self.structures.iter().enumerate() {
            if r.space.len() != 2 {
                continue;
            }
            let swapped = ProductSpace::pair(r.space.factor(1), r.space.factor(0))?;
            let Some(t_idx) = self.index_of(r.label, &swapped) else {
                continue;
            };
            for (a, g) in r.generators.iter().enumerate() {
                let t = g.permute(&[1, 0])?;
                if !self.structures[t_idx].contains(&t)? {
                    out.push(ClosureViolation {
                        op: ClosureOp::Transpose,
                        label: r.label,
                        structures: vec![i, t_idx],
                        generators: vec![a],
                        target: r.label,
                    });
                }
            }
        }
        Ok(())
    }

    fn audit_triple(&self, op: ClosureOp, out: &mut Vec<ClosureViolation>) -> Result<()> {
        for (i, r) in self.structures.iter().enumerate() {
            let s = &r.space;
            if s.len() != 3 || s.factor(0) != s.factor(2) {
                continue;
            }
            let target_label = match op {
                ClosureOp::Epsilon => match r.label.at_generic_point() {
                    Some(l) => l,
                    None => continue,
                },
                _ => r.label,
            };
            let pair = ProductSpace::pair(s.factor(0), s.factor(1))?;
            let Some(t_idx) = self.index_of(target_label, &pair) else {
                continue;
            };
            for (a, g) in r.generators.iter().enumerate() {
                let image = match op {
                    ClosureOp::Epsilon => cycles::epsilon_pullback(g)?,
                    _ => cycles::diagonal_pullback(g)?,
                };
                if !self.structures[t_idx].contains(&image)? {
                    out.push(ClosureViolation {
                        op,
                        label: r.label,
                        structures: vec![i, t_idx],
                        generators: vec![a],
                        target: target_label,
                    });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::Modulus;
    use crate::split_algebra::SplitAlgebra;
    use std::sync::Arc;

    fn p1(m: u64) -> Arc<SplitAlgebra> {
        Arc::new(SplitAlgebra::projective_space(Modulus::new(m).unwrap(), 1))
    }

    #[test]
    fn contains_examples() {
        let x = p1(4);
        let s = ProductSpace::pair(&x, &x).unwrap();
        let e0 = CycleClass::basis(s.clone(), &[0, 0]).unwrap();
        let r = RationalStructure::new(FieldLabel::Base, s.clone(), vec![e0.scale(2)]).unwrap();
        assert!(contains(&r, &CycleClass::zero(s.clone())).unwrap());
        assert!(contains(&r, &e0.scale(2)).unwrap());
        assert!(!contains(&r, &e0).unwrap());
    }

    #[test]
    fn contains_space_mismatch() {
        let x = p1(4);
        let s = ProductSpace::pair(&x, &x).unwrap();
        let t = ProductSpace::triple(&x, &x, &x).unwrap();
        let r = RationalStructure::new(FieldLabel::Base, s, vec![]).unwrap();
        assert!(matches!(
            r.contains(&CycleClass::zero(t)),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn full_structure_is_closed() {
        let x = p1(3);
        let mut fam = RationalFamily::new();
        fam.push(
            RationalStructure::full(FieldLabel::Split, ProductSpace::pair(&x, &x).unwrap())
                .unwrap(),
        );
        fam.push(
            RationalStructure::full(FieldLabel::Split, ProductSpace::triple(&x, &x, &x).unwrap())
                .unwrap(),
        );
        assert!(fam.check_closure(&ClosureOp::ALL).unwrap().is_empty());
    }

    #[test]
    fn projector_span_closure() {
        let x = p1(2);
        let s = ProductSpace::pair(&x, &x).unwrap();
        let delta = Correspondence::identity(&x).unwrap().into_cycle();
        let full_prod = CycleClass::basis(s.clone(), &[0, 0]).unwrap();
        let mut fam = RationalFamily::new();
        fam.push(
            RationalStructure::new(
                FieldLabel::Base,
                s.clone(),
                vec![delta.clone(), full_prod.clone()],
            )
            .unwrap(),
        );
        assert!(fam.check_closure(&[ClosureOp::Compose]).unwrap().is_empty());

        let pt_pt = CycleClass::basis(s.clone(), &[1, 1]).unwrap();
        let mut not_closed = RationalFamily::new();
        not_closed.push(
            RationalStructure::new(
                FieldLabel::Base,
                s,
                vec![delta.clone(), pt_pt, full_prod.clone()],
            )
            .unwrap(),
        );
        assert!(!not_closed
            .check_closure(&[ClosureOp::Compose])
            .unwrap()
            .is_empty());
    }

    #[test]
    fn dropping_a_generator_names_the_pair() {
        let x = p1(2);
        let s = ProductSpace::pair(&x, &x).unwrap();
        // the full group minus x0 x x1: (x1 x x1) o (x0 x x0) = x0 x x1 escapes
        let gens: Vec<CycleClass> = [[0, 0], [1, 0], [1, 1]]
            .iter()
            .map(|i| CycleClass::basis(s.clone(), i).unwrap())
            .collect();
        let mut fam = RationalFamily::new();
        fam.push(RationalStructure::new(FieldLabel::Base, s, gens).unwrap());
        let v = fam.check_closure(&[ClosureOp::Compose]).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].generators, vec![0, 2]);
    }

    #[test]
    fn restriction_examples() {
        let x = p1(3);
        let s = ProductSpace::pair(&x, &x).unwrap();
        let d = Correspondence::identity(&x).unwrap().into_cycle();
        let r_fx =
            RationalStructure::new(FieldLabel::BaseFunctionField, s.clone(), vec![d.clone()])
                .unwrap();
        let r_ex = RationalStructure::new(
            FieldLabel::ExtensionFunctionField,
            s.clone(),
            vec![d.clone()],
        )
        .unwrap();
        assert!(restriction_epi_check(&r_fx, &r_ex).unwrap());
        let extra = r_ex
            .with_generator(CycleClass::basis(s.clone(), &[1, 1]).unwrap())
            .unwrap();
        assert!(!restriction_epi_check(&r_fx, &extra).unwrap());
        let empty = RationalStructure::new(FieldLabel::ExtensionFunctionField, s, vec![]).unwrap();
        assert!(restriction_epi_check(&r_fx, &empty).unwrap());
    }

    #[test]
    fn inclusion_chain() {
        let x = p1(2);
        let s = ProductSpace::pair(&x, &x).unwrap();
        let d = Correspondence::identity(&x).unwrap().into_cycle();
        let mut fam = RationalFamily::new();
        fam.push(RationalStructure::new(FieldLabel::Base, s.clone(), vec![d.clone()]).unwrap());
        fam.push(RationalStructure::new(FieldLabel::Extension, s.clone(), vec![]).unwrap());
        let v = fam.check_inclusions().unwrap();
        assert_eq!(
            v,
            vec![InclusionViolation {
                smaller: FieldLabel::Base,
                larger: FieldLabel::Extension,
                structure: 0,
                generator: 0
            }]
        );
    }

    #[test]
    fn label_round_trip() {
        for l in FieldLabel::ALL {
            assert_eq!(l.as_str().parse::<FieldLabel>().unwrap(), l);
        }
    }
}
