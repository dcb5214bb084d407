//! Cycle classes on products of split varieties.
//!
//! A cycle on `A_1 x ... x A_r` is a dense coefficient tensor in the Kunneth
//! basis `x_{i_1} x ... x x_{i_r}`, flattened row-major (last factor fastest).

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::modring::Modulus;
use crate::split_algebra::SplitAlgebra;

#[derive(Debug, Clone)]
pub struct ProductSpace {
    factors: Vec<Arc<SplitAlgebra>>,
}

fn same_algebra(a: &Arc<SplitAlgebra>, b: &Arc<SplitAlgebra>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl PartialEq for ProductSpace {
    fn eq(&self, other: &Self) -> bool {
        self.factors.len() == other.factors.len()
            && self
                .factors
                .iter()
                .zip(&other.factors)
                .all(|(a, b)| same_algebra(a, b))
    }
}

impl Eq for ProductSpace {}

impl ProductSpace {
    pub fn new(factors: Vec<Arc<SplitAlgebra>>) -> Result<Self> {
        let first = factors
            .first()
            .ok_or_else(|| Error::SpaceMismatch("a product space needs a factor".into()))?;
        let m = first.modulus();
        if let Some(bad) = factors.iter().find(|f| f.modulus() != m) {
            return Err(Error::ModulusMismatch(m.get(), bad.modulus().get()));
        }
        Ok(ProductSpace { factors })
    }

    pub fn pair(a: &Arc<SplitAlgebra>, b: &Arc<SplitAlgebra>) -> Result<Self> {
        Self::new(vec![a.clone(), b.clone()])
    }

    pub fn triple(
        a: &Arc<SplitAlgebra>,
        b: &Arc<SplitAlgebra>,
        c: &Arc<SplitAlgebra>,
    ) -> Result<Self> {
        Self::new(vec![a.clone(), b.clone(), c.clone()])
    }

    pub fn modulus(&self) -> Modulus {
        self.factors[0].modulus()
    }

    pub fn factors(&self) -> &[Arc<SplitAlgebra>] {
        &self.factors
    }

    pub fn factor(&self, i: usize) -> &Arc<SplitAlgebra> {
        &self.factors[i]
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn size(&self) -> usize {
        self.factors.iter().map(|f| f.rank()).product()
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim()).sum()
    }

    pub fn flatten(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.factors.len());
        index
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&i, f)| acc * f.rank() + i)
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut index = vec![0; self.factors.len()];
        for (slot, f) in index.iter_mut().zip(&self.factors).rev() {
            *slot = flat % f.rank();
            flat /= f.rank();
        }
        index
    }

    /// Dimension of the basis cycle at `index`.
    pub fn dimension_of(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.factors)
            .map(|(&i, f)| f.phi(i))
            .sum()
    }

    fn with_inserted(&self, position: usize, factor: Arc<SplitAlgebra>) -> Result<ProductSpace> {
        let mut factors = self.factors.clone();
        factors.insert(position, factor);
        ProductSpace::new(factors)
    }

    fn without(&self, position: usize) -> ProductSpace {
        let mut factors = self.factors.clone();
        factors.remove(position);
        ProductSpace { factors }
    }

    fn concat(&self, other: &ProductSpace) -> Result<ProductSpace> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        ProductSpace::new(factors)
    }
}

/// A cycle class with an optional declared dimension.
#[derive(Debug, Clone)]
pub struct CycleClass {
    space: ProductSpace,
    coeffs: Vec<u64>,
    total_dim: Option<usize>,
}

/// Equality compares the class, not the dimension annotation.
impl PartialEq for CycleClass {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.coeffs == other.coeffs
    }
}

impl Eq for CycleClass {}

impl CycleClass {
    pub fn zero(space: ProductSpace) -> Self {
        let n = space.size();
        CycleClass {
            space,
            coeffs: vec![0; n],
            total_dim: None,
        }
    }

    pub fn from_coeffs(space: ProductSpace, coeffs: Vec<u64>) -> Result<Self> {
        if coeffs.len() != space.size() {
            return Err(Error::Shape(format!(
                "cycle has {} coefficients, space has {}",
                coeffs.len(),
                space.size()
            )));
        }
        let m = space.modulus();
        Ok(CycleClass {
            coeffs: coeffs.into_iter().map(|v| m.reduce_u(v)).collect(),
            space,
            total_dim: None,
        })
    }

    /// Sparse constructor; repeated indices accumulate.
    pub fn from_terms(space: ProductSpace, terms: &[(Vec<usize>, i64)]) -> Result<Self> {
        let m = space.modulus();
        let mut c = Self::zero(space);
        for (index, value) in terms {
            c.check_index(index)?;
            let flat = c.space.flatten(index);
            c.coeffs[flat] = m.add(c.coeffs[flat], m.reduce(*value as i128));
        }
        Ok(c)
    }

    pub fn basis(space: ProductSpace, index: &[usize]) -> Result<Self> {
        Self::from_terms(space, &[(index.to_vec(), 1)])
    }

    /// `a_1 x ... x a_r` for elements `a_t` of the factors.
    pub fn pure(space: ProductSpace, elements: &[&[u64]]) -> Result<Self> {
        if elements.len() != space.len() {
            return Err(Error::Shape("one element per factor expected".into()));
        }
        let mut c = CycleClass::from_coeffs(
            ProductSpace::new(vec![space.factor(0).clone()])?,
            elements[0].to_vec(),
        )?;
        for (t, e) in elements.iter().enumerate().skip(1) {
            let next = CycleClass::from_coeffs(
                ProductSpace::new(vec![space.factor(t).clone()])?,
                e.to_vec(),
            )?;
            c = external_product(&c, &next)?;
        }
        Ok(c)
    }

    fn check_index(&self, index: &[usize]) -> Result<()> {
        if index.len() != self.space.len()
            || index
                .iter()
                .zip(self.space.factors())
                .any(|(&i, f)| i >= f.rank())
        {
            return Err(Error::Shape(format!(
                "index {index:?} does not fit the space"
            )));
        }
        Ok(())
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn modulus(&self) -> Modulus {
        self.space.modulus()
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, index: &[usize]) -> u64 {
        self.coeffs[self.space.flatten(index)]
    }

    pub fn set_coeff(&mut self, index: &[usize], value: u64) {
        let flat = self.space.flatten(index);
        self.coeffs[flat] = self.modulus().reduce_u(value);
    }

    pub fn total_dim(&self) -> Option<usize> {
        self.total_dim
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&v| v == 0)
    }

    /// Nonzero entries as `(multi-index, value)`, in flat order.
    pub fn terms(&self) -> Vec<(Vec<usize>, u64)> {
        self.nonzero()
            .map(|(flat, v)| (self.space.unflatten(flat), v))
            .collect()
    }

    fn nonzero(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| (i, v))
    }

    /// `Some(d)` if every nonzero component has dimension `d`; `None` if the
    /// class is zero or mixed.
    pub fn homogeneous_dim(&self) -> Option<usize> {
        let mut dims = self
            .nonzero()
            .map(|(flat, _)| self.space.dimension_of(&self.space.unflatten(flat)));
        let first = dims.next()?;
        dims.all(|d| d == first).then_some(first)
    }

    pub fn is_homogeneous_of(&self, dim: usize) -> bool {
        self.nonzero()
            .all(|(flat, _)| self.space.dimension_of(&self.space.unflatten(flat)) == dim)
    }

    /// Attaches a dimension annotation after checking it.
    pub fn with_total_dim(mut self, dim: usize) -> Result<Self> {
        if !self.is_homogeneous_of(dim) {
            return Err(Error::NotHomogeneous(dim));
        }
        self.total_dim = Some(dim);
        Ok(self)
    }

    fn with_dim(mut self, dim: Option<usize>) -> Self {
        self.total_dim = dim;
        self
    }

    fn same_space(&self, other: &CycleClass) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(
                "operands live on different product spaces".into(),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &CycleClass) -> Result<CycleClass> {
        self.same_space(other)?;
        let m = self.modulus();
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| m.add(a, b))
            .collect();
        let dim = (self.total_dim == other.total_dim)
            .then_some(self.total_dim)
            .flatten();
        Ok(CycleClass {
            space: self.space.clone(),
            coeffs,
            total_dim: dim,
        })
    }

    pub fn sub(&self, other: &CycleClass) -> Result<CycleClass> {
        self.add(&other.scale(self.modulus().neg(1)))
    }

    pub fn scale(&self, s: u64) -> CycleClass {
        let m = self.modulus();
        CycleClass {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|&a| m.mul(a, s)).collect(),
            total_dim: self.total_dim,
        }
    }

    /// Reorders factors: factor `t` of the result is factor `order[t]` of `self`.
    pub fn permute(&self, order: &[usize]) -> Result<CycleClass> {
        let r = self.space.len();
        let mut seen = vec![false; r];
        if order.len() != r
            || order
                .iter()
                .any(|&t| t >= r || std::mem::replace(&mut seen[t], true))
        {
            return Err(Error::Shape(format!(
                "{order:?} is not a permutation of {r} factors"
            )));
        }
        let space = ProductSpace::new(
            order
                .iter()
                .map(|&t| self.space.factor(t).clone())
                .collect(),
        )?;
        let mut out = CycleClass::zero(space);
        for (flat, v) in self.nonzero() {
            let idx = self.space.unflatten(flat);
            let new_idx: Vec<usize> = order.iter().map(|&t| idx[t]).collect();
            let f = out.space.flatten(&new_idx);
            out.coeffs[f] = v;
        }
        Ok(out.with_dim(self.total_dim))
    }
}

impl fmt::Display for CycleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (idx, v)) in terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            let label: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            if *v == 1 {
                write!(f, "e[{}]", label.join(","))?;
            } else {
                write!(f, "{v}*e[{}]", label.join(","))?;
            }
        }
        Ok(())
    }
}

pub fn external_product(a: &CycleClass, b: &CycleClass) -> Result<CycleClass> {
    if a.modulus() != b.modulus() {
        return Err(Error::ModulusMismatch(a.modulus().get(), b.modulus().get()));
    }
    let m = a.modulus();
    let space = a.space.concat(&b.space)?;
    let nb = b.space.size();
    let mut coeffs = vec![0u64; space.size()];
    for (i, x) in a.nonzero() {
        for (j, y) in b.nonzero() {
            coeffs[i * nb + j] = m.mul(x, y);
        }
    }
    let dim = a.total_dim.zip(b.total_dim).map(|(x, y)| x + y);
    Ok(CycleClass {
        space,
        coeffs,
        total_dim: dim,
    })
}

/// Pullback along the projection forgetting a factor `F` inserted at
/// `position`: `alpha x beta -> alpha x 1_F x beta`.
pub fn projection_pullback(
    c: &CycleClass,
    position: usize,
    factor: &Arc<SplitAlgebra>,
) -> Result<CycleClass> {
    if position > c.space.len() {
        return Err(Error::Shape(format!(
            "cannot insert a factor at {position}"
        )));
    }
    let space = c.space.with_inserted(position, factor.clone())?;
    let mut out = CycleClass::zero(space);
    for (flat, v) in c.nonzero() {
        let mut idx = c.space.unflatten(flat);
        idx.insert(position, factor.unit());
        let f = out.space.flatten(&idx);
        out.coeffs[f] = v;
    }
    Ok(out.with_dim(c.total_dim.map(|d| d + factor.dim())))
}

/// Pushforward along the projection dropping the factor at `position`,
/// contracting that index against the factor's degree functional.
pub fn projection_pushforward(c: &CycleClass, position: usize) -> Result<CycleClass> {
    if position >= c.space.len() || c.space.len() < 2 {
        return Err(Error::Shape(format!(
            "cannot push forward factor {position} of a {}-fold product",
            c.space.len()
        )));
    }
    let m = c.modulus();
    let dropped = c.space.factor(position).clone();
    let space = c.space.without(position);
    let mut out = CycleClass::zero(space);
    for (flat, v) in c.nonzero() {
        let mut idx = c.space.unflatten(flat);
        let i = idx.remove(position);
        let d = dropped.degree(i);
        if d == 0 {
            continue;
        }
        let f = out.space.flatten(&idx);
        out.coeffs[f] = m.add(out.coeffs[f], m.mul(v, d));
    }
    Ok(out.with_dim(c.total_dim))
}

/// Factorwise intersection product on a common product space.
pub fn intersect(a: &CycleClass, b: &CycleClass) -> Result<CycleClass> {
    a.same_space(b)?;
    let m = a.modulus();
    let space = &a.space;
    let mut coeffs = vec![0u64; space.size()];
    let b_terms: Vec<(Vec<usize>, u64)> = b.terms();
    let mut partial: Vec<(usize, u64)> = Vec::new();
    let mut next: Vec<(usize, u64)> = Vec::new();
    for (ia, va) in a.terms() {
        for (ib, vb) in &b_terms {
            partial.clear();
            partial.push((0, m.mul(va, *vb)));
            for (t, f) in space.factors().iter().enumerate() {
                next.clear();
                let prod = f.product_of_basis(ia[t], ib[t]);
                for &(acc, c) in &partial {
                    for (k, &s) in prod.iter().enumerate() {
                        if s != 0 {
                            next.push((acc * f.rank() + k, m.mul(c, s)));
                        }
                    }
                }
                std::mem::swap(&mut partial, &mut next);
                if partial.is_empty() {
                    break;
                }
            }
            for &(flat, c) in &partial {
                coeffs[flat] = m.add(coeffs[flat], c);
            }
        }
    }
    let dim = a
        .total_dim
        .zip(b.total_dim)
        .and_then(|(x, y)| (x + y).checked_sub(space.dim()));
    Ok(CycleClass {
        space: space.clone(),
        coeffs,
        total_dim: dim,
    })
}

fn check_xyx(c: &CycleClass, what: &str) -> Result<()> {
    if c.space.len() != 3 || !same_algebra(c.space.factor(0), c.space.factor(2)) {
        return Err(Error::SpaceMismatch(format!(
            "{what} needs a cycle on X x Y x X"
        )));
    }
    Ok(())
}

/// `eps*`: keeps the components whose third slot is the fundamental class
/// of `X` and drops that slot. Components with `codim(gamma) > 0` vanish.
pub fn epsilon_pullback(c: &CycleClass) -> Result<CycleClass> {
    check_xyx(c, "epsilon pullback")?;
    epsilon_pullback_at(c, c.space.factor(2).unit())
}

/// Coefficient extraction at an arbitrary third-slot index; exposed for the
/// mutation harness.
#[doc(hidden)]
pub fn epsilon_pullback_at(c: &CycleClass, slot: usize) -> Result<CycleClass> {
    let x = c.space.factor(2).clone();
    let space = c.space.without(2);
    let mut out = CycleClass::zero(space);
    for (flat, v) in c.nonzero() {
        let idx = c.space.unflatten(flat);
        if idx[2] == slot {
            let f = out.space.flatten(&idx[..2]);
            out.coeffs[f] = v;
        }
    }
    Ok(out.with_dim(c.total_dim.and_then(|d| d.checked_sub(x.dim()))))
}

/// `Delta*` for `X x Y -> X x Y x X, (x, y) -> (x, y, x)`:
/// `alpha x beta x gamma -> (alpha . gamma) x beta`.
pub fn diagonal_pullback(c: &CycleClass) -> Result<CycleClass> {
    check_xyx(c, "diagonal pullback")?;
    let m = c.modulus();
    let x = c.space.factor(0).clone();
    let space = c.space.without(2);
    let ny = space.factor(1).rank();
    let mut out = CycleClass::zero(space);
    for (flat, v) in c.nonzero() {
        let idx = c.space.unflatten(flat);
        for (k, &s) in x.product_of_basis(idx[0], idx[2]).iter().enumerate() {
            if s != 0 {
                let f = k * ny + idx[1];
                out.coeffs[f] = m.add(out.coeffs[f], m.mul(v, s));
            }
        }
    }
    Ok(out.with_dim(c.total_dim.and_then(|d| d.checked_sub(x.dim()))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(m: u64) -> Arc<SplitAlgebra> {
        Arc::new(SplitAlgebra::projective_space(Modulus::new(m).unwrap(), 1))
    }

    fn pt(m: u64) -> Arc<SplitAlgebra> {
        Arc::new(SplitAlgebra::point(Modulus::new(m).unwrap()))
    }

    fn single(a: &Arc<SplitAlgebra>, v: &[u64]) -> CycleClass {
        CycleClass::from_coeffs(ProductSpace::new(vec![a.clone()]).unwrap(), v.to_vec()).unwrap()
    }

    #[test]
    fn external_products() {
        let x = p1(5);
        let s = ProductSpace::pair(&x, &x).unwrap();
        let c = external_product(&single(&x, &[0, 1]), &single(&x, &[1, 0])).unwrap();
        assert_eq!(c, CycleClass::basis(s.clone(), &[1, 0]).unwrap());

        let z = external_product(&single(&x, &[0, 0]), &single(&x, &[1, 1])).unwrap();
        assert!(z.is_zero());

        let sum = external_product(&single(&x, &[1, 1]), &single(&x, &[0, 1])).unwrap();
        assert_eq!(
            sum,
            CycleClass::from_terms(s, &[(vec![0, 1], 1), (vec![1, 1], 1)]).unwrap()
        );
    }

    #[test]
    fn external_product_modulus_mismatch() {
        let a = single(&p1(5), &[1, 0]);
        let b = single(&p1(7), &[1, 0]);
        assert_eq!(external_product(&a, &b), Err(Error::ModulusMismatch(5, 7)));
    }

    #[test]
    fn pullback_inserts_fundamental_class() {
        let x = p1(3);
        let y = Arc::new(SplitAlgebra::projective_space(Modulus::new(3).unwrap(), 2));
        let xx = ProductSpace::pair(&x, &x).unwrap();
        let c = CycleClass::basis(xx, &[1, 0]).unwrap();
        let pulled = projection_pullback(&c, 1, &y).unwrap();
        let xyx = ProductSpace::triple(&x, &y, &x).unwrap();
        assert_eq!(pulled, CycleClass::basis(xyx, &[1, 0, 0]).unwrap());

        let zero = CycleClass::zero(ProductSpace::pair(&x, &x).unwrap());
        assert!(projection_pullback(&zero, 0, &y).unwrap().is_zero());
    }

    #[test]
    fn pushforward_contracts_with_degree() {
        let x = p1(7);
        let y = p1(7);
        let s = ProductSpace::triple(&x, &y, &x).unwrap();
        // x_k x pt x 1 -> x_k x 1
        let c = CycleClass::basis(s.clone(), &[1, 1, 0]).unwrap();
        let pushed = projection_pushforward(&c, 1).unwrap();
        assert_eq!(
            pushed,
            CycleClass::basis(ProductSpace::pair(&x, &x).unwrap(), &[1, 0]).unwrap()
        );
        // the fundamental class of Y has degree zero
        let d = CycleClass::basis(s.clone(), &[1, 0, 0]).unwrap();
        assert!(projection_pushforward(&d, 1).unwrap().is_zero());
        // linearity
        let both = c.add(&d).unwrap().scale(3);
        assert_eq!(projection_pushforward(&both, 1).unwrap(), pushed.scale(3));
    }

    #[test]
    fn intersections_on_p1_squared() {
        let x = p1(5);
        let s = ProductSpace::pair(&x, &x).unwrap();
        let a = CycleClass::basis(s.clone(), &[0, 1]).unwrap();
        let b = CycleClass::basis(s.clone(), &[1, 0]).unwrap();
        assert_eq!(
            intersect(&a, &b).unwrap(),
            CycleClass::basis(s.clone(), &[1, 1]).unwrap()
        );
        let one = CycleClass::basis(s.clone(), &[0, 0]).unwrap();
        assert_eq!(intersect(&a, &one).unwrap(), a);
        let c = CycleClass::basis(s.clone(), &[1, 1]).unwrap();
        assert!(intersect(&c, &b).unwrap().is_zero());
    }

    #[test]
    fn intersect_space_mismatch() {
        let x = p1(5);
        let a = CycleClass::basis(ProductSpace::pair(&x, &x).unwrap(), &[0, 0]).unwrap();
        let b = CycleClass::basis(ProductSpace::pair(&x, &pt(5)).unwrap(), &[0, 0]).unwrap();
        assert!(matches!(intersect(&a, &b), Err(Error::SpaceMismatch(_))));
    }

    #[test]
    fn epsilon_examples() {
        let x = p1(3);
        let y = p1(3);
        let s = ProductSpace::triple(&x, &y, &x).unwrap();
        let keep = CycleClass::basis(s.clone(), &[1, 1, 0]).unwrap();
        let kill = CycleClass::basis(s.clone(), &[1, 1, 1]).unwrap();
        let expected = CycleClass::basis(ProductSpace::pair(&x, &y).unwrap(), &[1, 1]).unwrap();
        assert_eq!(epsilon_pullback(&keep).unwrap(), expected);
        assert!(epsilon_pullback(&kill).unwrap().is_zero());
        assert_eq!(
            epsilon_pullback(&keep.add(&kill).unwrap()).unwrap(),
            expected
        );
    }

    #[test]
    fn diagonal_examples() {
        let x = p1(3);
        let y = p1(3);
        let s = ProductSpace::triple(&x, &y, &x).unwrap();
        let a = CycleClass::basis(s.clone(), &[1, 0, 0]).unwrap();
        let xy = ProductSpace::pair(&x, &y).unwrap();
        assert_eq!(
            diagonal_pullback(&a).unwrap(),
            CycleClass::basis(xy.clone(), &[1, 0]).unwrap()
        );
        let b = CycleClass::basis(s.clone(), &[1, 0, 1]).unwrap();
        assert!(diagonal_pullback(&b).unwrap().is_zero());
        let c = CycleClass::basis(s.clone(), &[0, 1, 1]).unwrap();
        let combo = a.scale(2).add(&c).unwrap();
        assert_eq!(
            diagonal_pullback(&combo).unwrap(),
            diagonal_pullback(&a)
                .unwrap()
                .scale(2)
                .add(&diagonal_pullback(&c).unwrap())
                .unwrap()
        );
    }

    #[test]
    fn diagonal_requires_matching_outer_factors() {
        let x = p1(3);
        let y = Arc::new(SplitAlgebra::projective_space(Modulus::new(3).unwrap(), 2));
        let s = ProductSpace::triple(&x, &x, &y).unwrap();
        let c = CycleClass::zero(s);
        assert!(matches!(
            diagonal_pullback(&c),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn dimension_annotations_propagate() {
        let x = p1(2);
        let s = ProductSpace::pair(&x, &x).unwrap();
        let delta = CycleClass::from_terms(s, &[(vec![0, 1], 1), (vec![1, 0], 1)])
            .unwrap()
            .with_total_dim(1)
            .unwrap();
        let lifted = projection_pullback(&delta, 2, &x).unwrap();
        assert_eq!(lifted.total_dim(), Some(2));
        assert_eq!(epsilon_pullback(&lifted).unwrap().total_dim(), Some(1));
        assert_eq!(diagonal_pullback(&lifted).unwrap().total_dim(), Some(1));
        assert!(matches!(
            delta.clone().with_total_dim(2),
            Err(Error::NotHomogeneous(2))
        ));
    }
}
