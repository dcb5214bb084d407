//! Chow rings of geometrically split varieties, given by structure constants.
//!
//! Basis elements `x_0, ..., x_n` are homogeneous; `phi[i]` is the dimension
//! of the subvariety behind `x_i`, so its codimension is `dim - phi[i]`.

use std::fmt;

use crate::error::{Error, Result};
use crate::modring::{Matrix, Modulus, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SplitAlgebra {
    modulus: Modulus,
    dim: usize,
    phi: Vec<usize>,
    /// `mult[(i * n + j) * n + k] = c_{ij}^k`.
    mult: Vec<u64>,
    unit: usize,
    degree: Vec<u64>,
}

/// A failed algebra axiom, with the indices that witness it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    PhiOutOfRange {
        index: usize,
        phi: usize,
    },
    UnitNotFundamental {
        unit: usize,
    },
    Commutativity {
        i: usize,
        j: usize,
        k: usize,
    },
    Associativity {
        i: usize,
        j: usize,
        k: usize,
        s: usize,
    },
    Unit {
        j: usize,
        k: usize,
    },
    Grading {
        i: usize,
        j: usize,
        k: usize,
    },
    DegreeSupport {
        index: usize,
    },
    PoincareDuality {
        det: u64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PhiOutOfRange { index, phi } => {
                write!(f, "phi({index}) = {phi} exceeds the variety dimension")
            }
            Violation::UnitNotFundamental { unit } => {
                write!(f, "unit x{unit} is not of full dimension")
            }
            Violation::Commutativity { i, j, k } => {
                write!(f, "commutativity violation at ({i},{j},{k})")
            }
            Violation::Associativity { i, j, k, s } => {
                write!(
                    f,
                    "associativity violation at ({i},{j},{k}) in component {s}"
                )
            }
            Violation::Unit { j, k } => write!(f, "unit violation at ({j},{k})"),
            Violation::Grading { i, j, k } => write!(f, "grading violation at ({i},{j},{k})"),
            Violation::DegreeSupport { index } => {
                write!(
                    f,
                    "degree support violation: deg(x{index}) != 0 but phi != 0"
                )
            }
            Violation::PoincareDuality { det } => {
                write!(
                    f,
                    "Poincare duality violation: Gram determinant {det} is not a unit"
                )
            }
        }
    }
}

/// The dual basis `x_j* = sum_i coeffs[i][j] x_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualBasis {
    pub coeffs: Matrix,
}

impl DualBasis {
    /// Coefficient vector of `x_j*`.
    pub fn element(&self, j: usize) -> Vec<u64> {
        self.coeffs.column(j)
    }
}

impl SplitAlgebra {
    /// Assembles an algebra from dense structure constants. Only shapes are
    /// checked here; the algebra axioms are reported by [`validate`](Self::validate).
    pub fn from_parts(
        modulus: Modulus,
        dim: usize,
        phi: Vec<usize>,
        mult: Vec<u64>,
        unit: usize,
        degree: Vec<u64>,
    ) -> Result<Self> {
        let n = phi.len();
        if n == 0 {
            return Err(Error::Shape(
                "an algebra needs at least one basis element".into(),
            ));
        }
        if mult.len() != n * n * n {
            return Err(Error::Shape(format!(
                "multiplication table has {} entries, expected {}",
                mult.len(),
                n * n * n
            )));
        }
        if degree.len() != n {
            return Err(Error::Shape(format!(
                "degree has {} entries, expected {n}",
                degree.len()
            )));
        }
        if unit >= n {
            return Err(Error::Shape(format!("unit index {unit} out of range")));
        }
        let mult = mult.into_iter().map(|v| modulus.reduce_u(v)).collect();
        let degree = degree.into_iter().map(|v| modulus.reduce_u(v)).collect();
        Ok(SplitAlgebra {
            modulus,
            dim,
            phi,
            mult,
            unit,
            degree,
        })
    }

    /// Builds an algebra from the products of non-unit basis elements; products
    /// with the unit are filled in and every `(i, j)` entry is mirrored to `(j, i)`.
    pub fn from_products(
        modulus: Modulus,
        dim: usize,
        phi: Vec<usize>,
        unit: usize,
        degree: Vec<u64>,
        products: &[(usize, usize, usize, i64)],
    ) -> Result<Self> {
        let n = phi.len();
        let mut mult = vec![0u64; n * n * n];
        for j in 0..n {
            mult[(unit * n + j) * n + j] = 1;
            mult[(j * n + unit) * n + j] = 1;
        }
        for &(i, j, k, c) in products {
            if i >= n || j >= n || k >= n {
                return Err(Error::Shape(format!("product ({i},{j},{k}) out of range")));
            }
            let v = modulus.reduce(c as i128);
            mult[(i * n + j) * n + k] = v;
            mult[(j * n + i) * n + k] = v;
        }
        Self::from_parts(modulus, dim, phi, mult, unit, degree)
    }

    /// `P^dim` truncated: basis `h^0, ..., h^dim` with `deg(h^dim) = 1`.
    pub fn projective_space(modulus: Modulus, dim: usize) -> Self {
        let n = dim + 1;
        let phi = (0..n).map(|i| dim - i).collect();
        let mut products = Vec::new();
        for i in 1..n {
            for j in i..n {
                if i + j < n {
                    products.push((i, j, i + j, 1));
                }
            }
        }
        let mut degree = vec![0; n];
        degree[dim] = 1;
        Self::from_products(modulus, dim, phi, 0, degree, &products).expect("valid shape")
    }

    pub fn point(modulus: Modulus) -> Self {
        Self::projective_space(modulus, 0)
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn rank(&self) -> usize {
        self.phi.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi(&self, i: usize) -> usize {
        self.phi[i]
    }

    pub fn phis(&self) -> &[usize] {
        &self.phi
    }

    /// `dim - phi(i)`, saturating for malformed inputs.
    pub fn codim(&self, i: usize) -> usize {
        self.dim.saturating_sub(self.phi[i])
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn degree(&self, i: usize) -> u64 {
        self.degree[i]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degree
    }

    #[inline]
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> u64 {
        let n = self.rank();
        self.mult[(i * n + j) * n + k]
    }

    /// `x_i * x_j` as a coefficient slice.
    #[inline]
    pub fn product_of_basis(&self, i: usize, j: usize) -> &[u64] {
        let n = self.rank();
        &self.mult[(i * n + j) * n..(i * n + j + 1) * n]
    }

    pub fn basis_element(&self, i: usize) -> Vec<u64> {
        let mut v = vec![0; self.rank()];
        v[i] = 1;
        v
    }

    pub fn one(&self) -> Vec<u64> {
        self.basis_element(self.unit)
    }

    /// Number of basis elements of full dimension; 1 for an irreducible variety.
    pub fn fundamental_rank(&self) -> usize {
        self.phi.iter().filter(|&&p| p == self.dim).count()
    }

    pub fn multiply(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let n = self.rank();
        let m = self.modulus;
        let mut out = vec![0u64; n];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                if bj == 0 {
                    continue;
                }
                let c = m.mul(ai, bj);
                for (k, &s) in self.product_of_basis(i, j).iter().enumerate() {
                    if s != 0 {
                        out[k] = m.add(out[k], m.mul(c, s));
                    }
                }
            }
        }
        out
    }

    pub fn deg(&self, a: &[u64]) -> u64 {
        let m = self.modulus;
        a.iter()
            .zip(&self.degree)
            .fold(0, |acc, (&x, &d)| m.add(acc, m.mul(x, d)))
    }

    /// `Psi(a, b) = deg(a * b)`.
    pub fn pairing(&self, a: &[u64], b: &[u64]) -> Scalar {
        Scalar::new(self.deg(&self.multiply(a, b)) as i128, self.modulus)
    }

    pub fn gram(&self) -> Matrix {
        let n = self.rank();
        let mut g = Matrix::zeros(self.modulus, n, n);
        for i in 0..n {
            for j in 0..n {
                g.set(i, j, self.deg(self.product_of_basis(i, j)));
            }
        }
        g
    }

    /// `D = G^{-1}`, so that `Psi(x_i, x_j*) = (G D)_{ij} = delta_{ij}`.
    pub fn dual_basis(&self) -> Result<DualBasis> {
        let gram = self.gram();
        match gram.inverse() {
            Ok(coeffs) => Ok(DualBasis { coeffs }),
            Err(Error::NotInvertible(det)) => Err(Error::DegeneratePairing(det)),
            Err(e) => Err(e),
        }
    }

    /// The Kunneth product; basis pair `(i, a)` sits at index `i * rank(B) + a`.
    pub fn kunneth(&self, other: &SplitAlgebra) -> Result<SplitAlgebra> {
        if self.modulus != other.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.get(),
                other.modulus.get(),
            ));
        }
        let m = self.modulus;
        let (na, nb) = (self.rank(), other.rank());
        let n = na * nb;
        let phi = (0..n)
            .map(|p| self.phi[p / nb] + other.phi[p % nb])
            .collect();
        let mut mult = vec![0u64; n * n * n];
        for i in 0..na {
            for j in 0..na {
                for k in 0..na {
                    let c1 = self.structure_constant(i, j, k);
                    if c1 == 0 {
                        continue;
                    }
                    for a in 0..nb {
                        for b in 0..nb {
                            for c in 0..nb {
                                let c2 = other.structure_constant(a, b, c);
                                if c2 == 0 {
                                    continue;
                                }
                                let (x, y, z) = (i * nb + a, j * nb + b, k * nb + c);
                                mult[(x * n + y) * n + z] = m.mul(c1, c2);
                            }
                        }
                    }
                }
            }
        }
        let degree = (0..n)
            .map(|p| m.mul(self.degree[p / nb], other.degree[p % nb]))
            .collect();
        SplitAlgebra::from_parts(
            m,
            self.dim + other.dim,
            phi,
            mult,
            self.unit * nb + other.unit,
            degree,
        )
    }

    /// Every axiom violation; empty iff the table is a valid split model.
    pub fn validate(&self) -> Vec<Violation> {
        let n = self.rank();
        let m = self.modulus;
        let mut out = Vec::new();

        for (index, &phi) in self.phi.iter().enumerate() {
            if phi > self.dim {
                out.push(Violation::PhiOutOfRange { index, phi });
            }
        }
        if self.phi[self.unit] != self.dim {
            out.push(Violation::UnitNotFundamental { unit: self.unit });
        }

        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = self.structure_constant(i, j, k);
                    if i < j && c != self.structure_constant(j, i, k) {
                        out.push(Violation::Commutativity { i, j, k });
                    }
                    let legal =
                        (self.phi[i] + self.phi[j]).checked_sub(self.dim) == Some(self.phi[k]);
                    if c != 0 && !legal {
                        out.push(Violation::Grading { i, j, k });
                    }
                }
            }
        }

        for j in 0..n {
            for k in 0..n {
                let expected = u64::from(j == k);
                if self.structure_constant(self.unit, j, k) != expected
                    || self.structure_constant(j, self.unit, k) != expected
                {
                    out.push(Violation::Unit { j, k });
                }
            }
        }

        // (x_i x_j) x_k against x_i (x_j x_k), component by component.
        for i in 0..n {
            for j in 0..n {
                let ij = self.product_of_basis(i, j).to_vec();
                for k in 0..n {
                    let left = self.multiply(&ij, &self.basis_element(k));
                    let jk = self.product_of_basis(j, k).to_vec();
                    let right = self.multiply(&self.basis_element(i), &jk);
                    if let Some(s) = (0..n).find(|&s| left[s] != right[s]) {
                        out.push(Violation::Associativity { i, j, k, s });
                    }
                }
            }
        }

        for (index, &d) in self.degree.iter().enumerate() {
            if d != 0 && self.phi[index] != 0 {
                out.push(Violation::DegreeSupport { index });
            }
        }

        let det = self.gram().det().expect("square Gram matrix");
        if !m.is_unit(det) {
            out.push(Violation::PoincareDuality { det });
        }
        out
    }

    /// Same verdict as `validate().is_empty()`, stopping at the first failure.
    pub fn is_valid(&self) -> bool {
        let n = self.rank();
        let m = self.modulus;
        if self.phi.iter().any(|&p| p > self.dim) || self.phi[self.unit] != self.dim {
            return false;
        }
        if self
            .degree
            .iter()
            .zip(&self.phi)
            .any(|(&d, &p)| d != 0 && p != 0)
        {
            return false;
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = self.structure_constant(i, j, k);
                    if c != self.structure_constant(j, i, k) {
                        return false;
                    }
                    if c != 0
                        && (self.phi[i] + self.phi[j]).checked_sub(self.dim) != Some(self.phi[k])
                    {
                        return false;
                    }
                }
                if i == self.unit
                    && (0..n).any(|k| self.structure_constant(i, j, k) != u64::from(j == k))
                {
                    return false;
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for s in 0..n {
                        let mut left = 0;
                        let mut right = 0;
                        for t in 0..n {
                            left = m.add(
                                left,
                                m.mul(
                                    self.structure_constant(i, j, t),
                                    self.structure_constant(t, k, s),
                                ),
                            );
                            right = m.add(
                                right,
                                m.mul(
                                    self.structure_constant(j, k, t),
                                    self.structure_constant(i, t, s),
                                ),
                            );
                        }
                        if left != right {
                            return false;
                        }
                    }
                }
            }
        }
        self.gram().det().is_ok_and(|d| m.is_unit(d))
    }

    /// Same table with a modified degree functional.
    pub fn with_degree(&self, degree: Vec<u64>) -> Result<SplitAlgebra> {
        Self::from_parts(
            self.modulus,
            self.dim,
            self.phi.clone(),
            self.mult.clone(),
            self.unit,
            degree,
        )
    }

    /// Same data with one structure constant overwritten (no mirroring).
    pub fn with_structure_constant(
        &self,
        i: usize,
        j: usize,
        k: usize,
        value: u64,
    ) -> SplitAlgebra {
        let mut out = self.clone();
        let n = self.rank();
        out.mult[(i * n + j) * n + k] = self.modulus.reduce_u(value);
        out
    }
}

/// Free-function form of [`SplitAlgebra::multiply`].
pub fn multiply(a: &SplitAlgebra, x: &[u64], y: &[u64]) -> Vec<u64> {
    a.multiply(x, y)
}

/// Free-function form of [`SplitAlgebra::pairing`].
pub fn pairing(a: &SplitAlgebra, x: &[u64], y: &[u64]) -> Scalar {
    a.pairing(x, y)
}

pub fn dual_basis(a: &SplitAlgebra) -> Result<DualBasis> {
    a.dual_basis()
}

pub fn kunneth(a: &SplitAlgebra, b: &SplitAlgebra) -> Result<SplitAlgebra> {
    a.kunneth(b)
}

pub fn validate(a: &SplitAlgebra) -> Vec<Violation> {
    a.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zn(m: u64) -> Modulus {
        Modulus::new(m).unwrap()
    }

    fn p1(m: u64) -> SplitAlgebra {
        SplitAlgebra::projective_space(zn(m), 1)
    }

    #[test]
    fn p1_products() {
        let a = p1(5);
        let (x0, x1) = (a.basis_element(0), a.basis_element(1));
        assert_eq!(a.multiply(&x0, &x1), x1);
        assert_eq!(a.multiply(&x1, &x1), vec![0, 0]);
        assert_eq!(a.multiply(&[0, 0], &x1), vec![0, 0]);
    }

    #[test]
    fn p1_pairing() {
        let a = p1(5);
        let (x0, x1) = (a.basis_element(0), a.basis_element(1));
        assert_eq!(a.pairing(&x0, &x1).value(), 1);
        assert_eq!(a.pairing(&x0, &x0).value(), 0);
        assert_eq!(a.pairing(&x0, &[0, 0]).value(), 0);
    }

    #[test]
    fn p1_dual_basis_swaps() {
        let d = p1(5).dual_basis().unwrap();
        assert_eq!(d.element(0), vec![0, 1]);
        assert_eq!(d.element(1), vec![1, 0]);
    }

    #[test]
    fn self_dual_point() {
        let pt = SplitAlgebra::point(zn(6));
        assert_eq!(pt.dual_basis().unwrap().element(0), vec![1]);
    }

    #[test]
    fn degenerate_rank_one() {
        let a = SplitAlgebra::point(zn(4)).with_degree(vec![2]).unwrap();
        assert_eq!(a.dual_basis(), Err(Error::DegeneratePairing(2)));
    }

    #[test]
    fn kunneth_with_point_is_identity() {
        let a = p1(7);
        let k = a.kunneth(&SplitAlgebra::point(zn(7))).unwrap();
        assert_eq!(k, a);
    }

    #[test]
    fn kunneth_p1_p1() {
        let a = p1(5);
        let k = a.kunneth(&a).unwrap();
        assert_eq!(k.rank(), 4);
        assert_eq!(k.dim(), 2);
        assert_eq!(k.phi(3), 0);
        assert!(k.is_valid());
        assert_eq!(k.gram(), a.gram().kron(&a.gram()).unwrap());
    }

    #[test]
    fn kunneth_modulus_mismatch() {
        assert_eq!(p1(5).kunneth(&p1(7)), Err(Error::ModulusMismatch(5, 7)));
    }

    #[test]
    fn validate_examples() {
        assert!(p1(5).validate().is_empty());
        let broken = p1(5).with_structure_constant(1, 1, 1, 1);
        assert_eq!(
            broken.validate(),
            vec![Violation::Grading { i: 1, j: 1, k: 1 }]
        );
        let flat = p1(5).with_degree(vec![0, 0]).unwrap();
        assert_eq!(flat.validate(), vec![Violation::PoincareDuality { det: 0 }]);
    }

    #[test]
    fn validate_detects_non_associative_table() {
        // d = 0, basis {1, a, b}: a*a = b, b*b = a, a*b = 0 breaks (a a) b = a (a b).
        let m = zn(5);
        let a = SplitAlgebra::from_products(
            m,
            0,
            vec![0, 0, 0],
            0,
            vec![1, 1, 1],
            &[(1, 1, 2, 1), (2, 2, 1, 1)],
        )
        .unwrap();
        assert!(a
            .validate()
            .iter()
            .any(|v| matches!(v, Violation::Associativity { .. })));
    }

    #[test]
    fn validate_detects_asymmetry_and_degree_support() {
        let a = p1(3).with_structure_constant(0, 1, 0, 2);
        let v = a.validate();
        assert!(v
            .iter()
            .any(|v| matches!(v, Violation::Commutativity { i: 0, j: 1, k: 0 })));
        assert!(v.iter().any(|v| matches!(v, Violation::Unit { .. })));
        let b = p1(3).with_degree(vec![1, 1]).unwrap();
        assert!(b
            .validate()
            .contains(&Violation::DegreeSupport { index: 0 }));
    }

    #[test]
    fn projective_plane() {
        let p2 = SplitAlgebra::projective_space(zn(4), 2);
        assert!(p2.is_valid());
        let h = p2.basis_element(1);
        assert_eq!(p2.multiply(&h, &h), p2.basis_element(2));
        let d = p2.dual_basis().unwrap();
        assert_eq!(d.element(1), h);
    }
}
