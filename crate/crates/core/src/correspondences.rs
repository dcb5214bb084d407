//! Correspondences between split motives.
//!
//! A correspondence `A -> T_1 x ... x T_r` is a cycle on `A x T_1 x ... x T_r`.
//! Composition follows the usual convention: [`compose`]`(u, v)` is `v o u`,
//! with `u` applied first. In the `(x_i x x_j*)` matrix form this reads
//! `matrix(v o u) = matrix(u) * matrix(v)`.

use std::collections::HashMap;
use std::sync::Arc;

use crate::cycles::{self, CycleClass, ProductSpace};
use crate::error::{Error, Result};
use crate::modring::Matrix;
use crate::split_algebra::SplitAlgebra;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    cycle: CycleClass,
}

impl Correspondence {
    pub fn new(cycle: CycleClass) -> Result<Self> {
        if cycle.space().len() < 2 {
            return Err(Error::SpaceMismatch(
                "a correspondence needs a source and a target".into(),
            ));
        }
        Ok(Correspondence { cycle })
    }

    /// A correspondence of degree zero: homogeneous of dimension `dim(source)`.
    pub fn degree_zero(cycle: CycleClass) -> Result<Self> {
        let d = cycle.space().factor(0).dim();
        Self::new(cycle.with_total_dim(d)?)
    }

    /// `Delta_X = sum_i x_i x x_i*`.
    pub fn identity(x: &Arc<SplitAlgebra>) -> Result<Self> {
        Self::from_matrix(x, &Matrix::identity(x.modulus(), x.rank()))
    }

    /// `sum_{ij} P_{ij} x_i x x_j*` as a cycle on `X x X`.
    pub fn from_matrix(x: &Arc<SplitAlgebra>, p: &Matrix) -> Result<Self> {
        let n = x.rank();
        if p.rows() != n || p.cols() != n {
            return Err(Error::Shape(format!("expected a {n}x{n} matrix")));
        }
        let dual = x.dual_basis()?;
        // T = P * D^T
        let t = p.mul(&dual.coeffs.transpose())?;
        let space = ProductSpace::pair(x, x)?;
        Self::new(CycleClass::from_coeffs(space, t.data().to_vec())?)
    }

    /// `x_i x x_j*` on `X x X`.
    pub fn basis_endomorphism(x: &Arc<SplitAlgebra>, i: usize, j: usize) -> Result<Self> {
        let mut p = Matrix::zeros(x.modulus(), x.rank(), x.rank());
        p.set(i, j, 1);
        Self::from_matrix(x, &p)
    }

    pub fn cycle(&self) -> &CycleClass {
        &self.cycle
    }

    pub fn into_cycle(self) -> CycleClass {
        self.cycle
    }

    pub fn source(&self) -> &Arc<SplitAlgebra> {
        self.cycle.space().factor(0)
    }

    pub fn targets(&self) -> &[Arc<SplitAlgebra>] {
        &self.cycle.space().factors()[1..]
    }

    pub fn is_zero(&self) -> bool {
        self.cycle.is_zero()
    }

    pub fn is_endomorphism(&self) -> bool {
        self.cycle.space().len() == 2 && {
            let s = self.cycle.space();
            s == &ProductSpace::pair(s.factor(0), s.factor(0)).expect("same modulus")
        }
    }

    pub fn add(&self, other: &Correspondence) -> Result<Correspondence> {
        Ok(Correspondence {
            cycle: self.cycle.add(&other.cycle)?,
        })
    }

    pub fn sub(&self, other: &Correspondence) -> Result<Correspondence> {
        Ok(Correspondence {
            cycle: self.cycle.sub(&other.cycle)?,
        })
    }

    pub fn scale(&self, s: u64) -> Correspondence {
        Correspondence {
            cycle: self.cycle.scale(s),
        }
    }
}

/// `v o u` through pullback, intersection and pushforward on `A x B x T`.
pub fn compose(u: &Correspondence, v: &Correspondence) -> Result<Correspondence> {
    if u.targets().len() != 1 {
        return Err(Error::SpaceMismatch(
            "the first correspondence must have a single target factor".into(),
        ));
    }
    let a = u.source();
    let b = &u.targets()[0];
    let vb = v.source();
    if !(Arc::ptr_eq(b, vb) || b == vb) {
        return Err(Error::SpaceMismatch(
            "target of the first correspondence differs from the source of the second".into(),
        ));
    }
    let mut lifted_u = u.cycle.clone();
    for (t, f) in v.targets().iter().enumerate() {
        lifted_u = cycles::projection_pullback(&lifted_u, 2 + t, f)?;
    }
    let lifted_v = cycles::projection_pullback(&v.cycle, 0, a)?;
    let product = cycles::intersect(&lifted_u, &lifted_v)?;
    Correspondence::new(cycles::projection_pushforward(&product, 1)?)
}

/// `v o u` for `u : X -> X` and `v : X -> Y x X`, the shape used for `f1 o p`.
pub fn compose_mixed(u: &Correspondence, v: &Correspondence) -> Result<Correspondence> {
    let vs = v.cycle.space();
    if !u.is_endomorphism()
        || vs.len() != 3
        || vs.factor(0) != u.source()
        || vs.factor(2) != u.source()
    {
        return Err(Error::SpaceMismatch(
            "compose_mixed expects u : X -> X and v : X -> Y x X".into(),
        ));
    }
    compose(u, v)
}

/// Factor swap `A x B -> B x A`.
pub fn transpose(u: &Correspondence) -> Result<Correspondence> {
    if u.cycle.space().len() != 2 {
        return Err(Error::SpaceMismatch(
            "transpose is defined for correspondences between two varieties".into(),
        ));
    }
    Correspondence::new(u.cycle.permute(&[1, 0])?)
}

fn require_endomorphism(p: &Correspondence) -> Result<&Arc<SplitAlgebra>> {
    if !p.is_endomorphism() {
        return Err(Error::SpaceMismatch(
            "expected an endomorphism X -> X".into(),
        ));
    }
    Ok(p.source())
}

/// Coefficients `p_{ij}` of `p = sum p_{ij} x_i x x_j*`, i.e. `P = T * G`.
pub fn matrix_form(p: &Correspondence) -> Result<Matrix> {
    let x = require_endomorphism(p)?;
    // propagate a degenerate pairing even though G itself is all we need
    x.dual_basis()?;
    let n = x.rank();
    let t = Matrix::from_vec(x.modulus(), n, n, p.cycle.coeffs().to_vec())?;
    t.mul(&x.gram())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdminReport {
    pub value: usize,
    /// Entries `(i, j)` with `p_{ij} != 0` and `codim(x_i) = value`.
    pub support: Vec<(usize, usize)>,
}

/// Least codimension `min { dim X - phi(i) : p_{ij} != 0 }`.
pub fn cdmin(p: &Correspondence) -> Result<CdminReport> {
    let x = require_endomorphism(p)?;
    let pm = matrix_form(p)?;
    let n = x.rank();
    let nonzero: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| pm.get(i, j) != 0)
        .collect();
    let value = nonzero
        .iter()
        .map(|&(i, _)| x.codim(i))
        .min()
        .ok_or(Error::ZeroProjector)?;
    let support = nonzero
        .into_iter()
        .filter(|&(i, _)| x.codim(i) == value)
        .collect();
    Ok(CdminReport { value, support })
}

/// `u^{o n}`; `n = 0` gives `Delta_X`.
pub fn power(u: &Correspondence, n: u64) -> Result<Correspondence> {
    let x = require_endomorphism(u)?;
    let mut acc = Correspondence::identity(x)?;
    let mut base = u.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            acc = compose(&acc, &base)?;
        }
        e >>= 1;
        if e > 0 {
            base = compose(&base, &base)?;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdempotentPower {
    /// Smallest `n >= 1` with `e^n o e^n = e^n`.
    pub exponent: u64,
    pub idempotent: Correspondence,
    /// First power lying on the cycle of `e, e^2, e^3, ...`.
    pub tail: u64,
    pub period: u64,
}

/// The unique idempotent among the powers of `e` in the finite monoid
/// `End(X)`, found by storing powers until one repeats.
pub fn idempotent_power(e: &Correspondence) -> Result<IdempotentPower> {
    require_endomorphism(e)?;
    let mut seen: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut powers = vec![e.clone()];
    seen.insert(e.cycle.coeffs().to_vec(), 1);
    let (tail, period) = loop {
        let next = compose(powers.last().expect("nonempty"), e)?;
        let k = powers.len() as u64 + 1;
        if let Some(&j) = seen.get(next.cycle.coeffs()) {
            break (j, k - j);
        }
        seen.insert(next.cycle.coeffs().to_vec(), k);
        powers.push(next);
    };
    // e^n is idempotent iff n >= tail and period | n
    let exponent = tail.div_ceil(period) * period;
    let idempotent = powers[(exponent - 1) as usize].clone();
    debug_assert_eq!(compose(&idempotent, &idempotent)?, idempotent);
    Ok(IdempotentPower {
        exponent,
        idempotent,
        tail,
        period,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProjectorCheck {
    /// `p o p = p` through the composition engine.
    pub engine: bool,
    /// `P * P = P` on the matrix form.
    pub matrix: bool,
}

impl ProjectorCheck {
    pub fn holds(self) -> bool {
        self.engine && self.matrix
    }

    pub fn agree(self) -> bool {
        self.engine == self.matrix
    }
}

pub fn projector_check(p: &Correspondence) -> Result<ProjectorCheck> {
    require_endomorphism(p)?;
    let engine = compose(p, p)? == *p;
    let pm = matrix_form(p)?;
    let matrix = pm.mul(&pm)? == pm;
    Ok(ProjectorCheck { engine, matrix })
}

/// True iff `p o p = p`, checked both through the engine and on `P`.
pub fn verify_projector(p: &Correspondence) -> Result<bool> {
    Ok(projector_check(p)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modring::Modulus;

    fn zn(m: u64) -> Modulus {
        Modulus::new(m).unwrap()
    }

    fn p1(m: u64) -> Arc<SplitAlgebra> {
        Arc::new(SplitAlgebra::projective_space(zn(m), 1))
    }

    fn scalar_identity(x: &Arc<SplitAlgebra>, s: u64) -> Correspondence {
        Correspondence::identity(x).unwrap().scale(s)
    }

    #[test]
    fn identity_has_identity_matrix() {
        let x = p1(5);
        let d = Correspondence::identity(&x).unwrap();
        assert_eq!(matrix_form(&d).unwrap(), Matrix::identity(zn(5), 2));
        // Delta = x0 x pt + pt x x0
        assert_eq!(d.cycle().terms(), vec![(vec![0, 1], 1), (vec![1, 0], 1)]);
    }

    #[test]
    fn single_term_matrix() {
        let x = p1(5);
        let p = Correspondence::basis_endomorphism(&x, 0, 1).unwrap();
        let pm = matrix_form(&p).unwrap();
        assert_eq!(pm.data(), &[0, 1, 0, 0]);
    }

    #[test]
    fn rule_one_on_p1() {
        let x = p1(7);
        for (i, j, k, s) in [(0, 1, 1, 0), (1, 1, 0, 1), (0, 0, 1, 1)] {
            let left = Correspondence::basis_endomorphism(&x, i, j).unwrap();
            let right = Correspondence::basis_endomorphism(&x, k, s).unwrap();
            let got = compose(&right, &left).unwrap();
            let expected = if i == s {
                Correspondence::basis_endomorphism(&x, k, j).unwrap()
            } else {
                Correspondence::basis_endomorphism(&x, k, j)
                    .unwrap()
                    .scale(0)
            };
            assert_eq!(got, expected, "({i},{j},{k},{s})");
        }
    }

    #[test]
    fn compose_rejects_mismatched_middle() {
        let x = p1(5);
        let y = Arc::new(SplitAlgebra::projective_space(zn(5), 2));
        let u = Correspondence::identity(&x).unwrap();
        let v = Correspondence::identity(&y).unwrap();
        assert!(matches!(compose(&u, &v), Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn transpose_examples() {
        let x = p1(5);
        let y = Arc::new(SplitAlgebra::projective_space(zn(5), 2));
        let s = ProductSpace::pair(&x, &y).unwrap();
        let u = Correspondence::new(CycleClass::basis(s, &[1, 2]).unwrap()).unwrap();
        let t = transpose(&u).unwrap();
        assert_eq!(t.cycle().terms(), vec![(vec![2, 1], 1)]);
        assert_eq!(transpose(&t).unwrap(), u);
    }

    #[test]
    fn cdmin_examples() {
        let x = p1(5);
        assert_eq!(
            cdmin(&Correspondence::identity(&x).unwrap()).unwrap().value,
            0
        );
        let p = Correspondence::basis_endomorphism(&x, 1, 0).unwrap();
        assert_eq!(cdmin(&p).unwrap().value, 1);
        assert_eq!(cdmin(&p.scale(0)), Err(Error::ZeroProjector));
    }

    #[test]
    fn idempotent_power_examples() {
        let x = p1(5);
        let d = Correspondence::identity(&x).unwrap();
        let r = idempotent_power(&d).unwrap();
        assert_eq!((r.exponent, r.idempotent), (1, d));

        let pt4 = Arc::new(SplitAlgebra::point(zn(4)));
        let r = idempotent_power(&scalar_identity(&pt4, 2)).unwrap();
        assert_eq!(r.exponent, 2);
        assert!(r.idempotent.is_zero());

        let pt10 = Arc::new(SplitAlgebra::point(zn(10)));
        let r = idempotent_power(&scalar_identity(&pt10, 3)).unwrap();
        assert_eq!(r.exponent, 4);
        assert_eq!(r.idempotent, Correspondence::identity(&pt10).unwrap());
    }

    #[test]
    fn idempotent_power_matches_direct_scan() {
        // over Z/12 on a point, e = a * Delta; compare with scanning a^n
        let m = zn(12);
        let pt = Arc::new(SplitAlgebra::point(m));
        for a in 0..12u64 {
            let n = (1..=24u64)
                .find(|&n| {
                    let v = m.pow(a, n);
                    m.mul(v, v) == v
                })
                .unwrap();
            let r = idempotent_power(&scalar_identity(&pt, a)).unwrap();
            assert_eq!(r.exponent, n, "a = {a}");
            assert_eq!(r.idempotent, scalar_identity(&pt, m.pow(a, n)));
        }
    }

    #[test]
    fn verify_projector_examples() {
        let x = p1(3);
        assert!(verify_projector(&Correspondence::identity(&x).unwrap()).unwrap());
        assert!(!verify_projector(&scalar_identity(&x, 2)).unwrap());
        let e = Correspondence::basis_endomorphism(&x, 0, 0)
            .unwrap()
            .add(
                &Correspondence::basis_endomorphism(&x, 1, 0)
                    .unwrap()
                    .scale(2),
            )
            .unwrap();
        let r = idempotent_power(&e).unwrap();
        assert!(verify_projector(&r.idempotent).unwrap());
    }

    #[test]
    fn power_examples() {
        let x = p1(9);
        let d = Correspondence::identity(&x).unwrap();
        assert_eq!(power(&d, 5).unwrap(), d);
        let u = Correspondence::basis_endomorphism(&x, 0, 0)
            .unwrap()
            .add(&scalar_identity(&x, 4))
            .unwrap();
        assert_eq!(power(&u, 1).unwrap(), u);
        assert_eq!(power(&u, 0).unwrap(), d);
        let lhs = power(&u, 5).unwrap();
        let rhs = compose(&power(&u, 2).unwrap(), &power(&u, 3).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
