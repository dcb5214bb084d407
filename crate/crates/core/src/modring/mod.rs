//! Exact arithmetic over `Z/m` for composite `m`.
//!
//! Values are stored as canonical residues in `[0, m)`. Products go through
//! `u128`, so any modulus below `2^63` is safe.

mod smith;

pub use smith::{Smith, SolveSpace};

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The modulus `m` of the coefficient ring `Z/m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Modulus(u64);

impl TryFrom<u64> for Modulus {
    type Error = Error;

    fn try_from(m: u64) -> Result<Self> {
        Modulus::new(m)
    }
}

impl From<Modulus> for u64 {
    fn from(m: Modulus) -> u64 {
        m.0
    }
}

impl Modulus {
    pub const MAX: u64 = 1 << 62;

    pub fn new(m: u64) -> Result<Self> {
        if !(2..=Self::MAX).contains(&m) {
            return Err(Error::InvalidModulus(m));
        }
        Ok(Modulus(m))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn reduce(self, v: i128) -> u64 {
        v.rem_euclid(self.0 as i128) as u64
    }

    #[inline]
    pub fn reduce_u(self, v: u64) -> u64 {
        v % self.0
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        ((a as u128 + b as u128) % self.0 as u128) as u64
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            self.0 - (b - a)
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.0 as u128) as u64
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.0;
        base %= self.0;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// `gcd(a, m)`; note `gcd(0, m) = m`.
    pub fn gcd(self, a: u64) -> u64 {
        (a % self.0).gcd(&self.0)
    }

    pub fn is_unit(self, a: u64) -> bool {
        self.gcd(a) == 1
    }

    pub fn inv(self, a: u64) -> Option<u64> {
        let e = ((a % self.0) as i128).extended_gcd(&(self.0 as i128));
        if e.gcd != 1 {
            return None;
        }
        Some(self.reduce(e.x))
    }

    /// Every element of `Z/m`, in increasing order.
    pub fn elements(self) -> impl Iterator<Item = u64> {
        0..self.0
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}", self.0)
    }
}

/// An element of `Z/m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scalar {
    value: u64,
    modulus: Modulus,
}

impl Scalar {
    pub fn new(value: i128, modulus: Modulus) -> Self {
        Scalar {
            value: modulus.reduce(value),
            modulus,
        }
    }

    pub fn zero(modulus: Modulus) -> Self {
        Scalar { value: 0, modulus }
    }

    pub fn one(modulus: Modulus) -> Self {
        Scalar { value: 1, modulus }
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    /// True iff `gcd(value, m) = 1`.
    pub fn is_unit(self) -> bool {
        self.modulus.is_unit(self.value)
    }

    pub fn inv(self) -> Option<Scalar> {
        self.modulus.inv(self.value).map(|value| Scalar {
            value,
            modulus: self.modulus,
        })
    }

    pub fn pow(self, exp: u64) -> Scalar {
        Scalar {
            value: self.modulus.pow(self.value, exp),
            modulus: self.modulus,
        }
    }

    fn check(self, other: Scalar) {
        assert_eq!(
            self.modulus, other.modulus,
            "scalar arithmetic across different moduli"
        );
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.check(rhs);
        Scalar {
            value: self.modulus.add(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self.check(rhs);
        Scalar {
            value: self.modulus.sub(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.check(rhs);
        Scalar {
            value: self.modulus.mul(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar {
            value: self.modulus.neg(self.value),
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Dense row-major matrix over `Z/m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    modulus: Modulus,
    rows: usize,
    cols: usize,
    data: Vec<u64>,
}

impl Matrix {
    pub fn zeros(modulus: Modulus, rows: usize, cols: usize) -> Self {
        Matrix {
            modulus,
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(modulus: Modulus, n: usize) -> Self {
        let mut m = Self::zeros(modulus, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1 % modulus.get();
        }
        m
    }

    /// Builds a matrix from signed integer rows, reducing every entry mod `m`.
    pub fn from_rows<R: AsRef<[i64]>>(modulus: Modulus, rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return Err(Error::Shape("ragged rows".into()));
            }
            data.extend(row.iter().map(|&v| modulus.reduce(v as i128)));
        }
        Ok(Matrix {
            modulus,
            rows: r,
            cols: c,
            data,
        })
    }

    /// Builds a matrix from already-reduced row-major data.
    pub fn from_vec(modulus: Modulus, rows: usize, cols: usize, data: Vec<u64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        let data = data.into_iter().map(|v| modulus.reduce_u(v)).collect();
        Ok(Matrix {
            modulus,
            rows,
            cols,
            data,
        })
    }

    pub fn column_vector(modulus: Modulus, v: &[u64]) -> Self {
        Matrix {
            modulus,
            rows: v.len(),
            cols: 1,
            data: v.iter().map(|&x| modulus.reduce_u(x)).collect(),
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: u64) {
        self.data[i * self.cols + j] = self.modulus.reduce_u(v);
    }

    pub fn entry(&self, i: usize, j: usize) -> Scalar {
        Scalar {
            value: self.get(i, j),
            modulus: self.modulus,
        }
    }

    pub fn data(&self) -> &[u64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.modulus, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j);
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.modulus != rhs.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.get(),
                rhs.modulus.get(),
            ));
        }
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let m = self.modulus;
        let mut out = Matrix::zeros(m, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    let idx = i * rhs.cols + j;
                    out.data[idx] = m.add(out.data[idx], m.mul(a, rhs.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |m, a, b| m.add(a, b))
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |m, a, b| m.sub(a, b))
    }

    fn zip_with(&self, rhs: &Matrix, op: impl Fn(Modulus, u64, u64) -> u64) -> Result<Matrix> {
        if self.modulus != rhs.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.get(),
                rhs.modulus.get(),
            ));
        }
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::Shape(
                "elementwise operation on different shapes".into(),
            ));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| op(self.modulus, a, b))
            .collect();
        Ok(Matrix {
            modulus: self.modulus,
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Kronecker product; row `(i, a)` is `i * rhs.rows + a`.
    pub fn kron(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.modulus != rhs.modulus {
            return Err(Error::ModulusMismatch(
                self.modulus.get(),
                rhs.modulus.get(),
            ));
        }
        let m = self.modulus;
        let mut out = Matrix::zeros(m, self.rows * rhs.rows, self.cols * rhs.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..rhs.rows {
                    for l in 0..rhs.cols {
                        out.set(i * rhs.rows + k, j * rhs.cols + l, m.mul(a, rhs.get(k, l)));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn smith(&self) -> Smith {
        Smith::compute(self)
    }

    /// Determinant mod `m`, read off the Smith form.
    pub fn det(&self) -> Result<u64> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of a non-square matrix".into()));
        }
        Ok(self.smith().det())
    }

    /// Two-sided inverse; exists iff `det` is a unit mod `m`.
    pub fn inverse(&self) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::Shape("inverse of a non-square matrix".into()));
        }
        self.smith().inverse()
    }

    /// Solves `self * x = b` column by column, returning the lexicographically
    /// smallest solution of each column, or `None` if some column is unsolvable.
    pub fn solve(&self, b: &Matrix) -> Result<Option<Matrix>> {
        if self.modulus != b.modulus {
            return Err(Error::ModulusMismatch(self.modulus.get(), b.modulus.get()));
        }
        if b.rows != self.rows {
            return Err(Error::Shape(format!(
                "right-hand side has {} rows, system has {}",
                b.rows, self.rows
            )));
        }
        let smith = self.smith();
        let mut out = Matrix::zeros(self.modulus, self.cols, b.cols);
        for j in 0..b.cols {
            match smith.solve_vector(&b.column(j)) {
                Some(space) => {
                    let x = space.lex_min();
                    for (i, v) in x.into_iter().enumerate() {
                        out.set(i, j, v);
                    }
                }
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    }
}

/// Free-function form of [`Modulus::is_unit`] on a [`Scalar`].
pub fn is_unit(a: Scalar) -> bool {
    a.is_unit()
}

/// Free-function form of [`Matrix::inverse`].
pub fn mat_inverse(a: &Matrix) -> Result<Matrix> {
    a.inverse()
}

/// Free-function form of [`Matrix::solve`].
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
    a.solve(b)
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .data
            .iter()
            .map(|v| v.to_string().len())
            .max()
            .unwrap_or(1);
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:>width$}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zn(m: u64) -> Modulus {
        Modulus::new(m).unwrap()
    }

    #[test]
    fn rejects_trivial_ring() {
        assert_eq!(Modulus::new(1), Err(Error::InvalidModulus(1)));
        assert_eq!(Modulus::new(0), Err(Error::InvalidModulus(0)));
    }

    #[test]
    fn unit_examples() {
        assert!(Scalar::new(3, zn(10)).is_unit());
        assert!(!Scalar::new(2, zn(4)).is_unit());
        assert!(!Scalar::new(0, zn(7)).is_unit());
    }

    #[test]
    fn inverse_examples() {
        let swap = Matrix::from_rows(zn(5), &[[0, 1], [1, 0]]).unwrap();
        assert_eq!(mat_inverse(&swap).unwrap(), swap);

        let id = Matrix::identity(zn(6), 2);
        assert_eq!(mat_inverse(&id).unwrap(), id);

        let two = Matrix::from_rows(zn(4), &[[2]]).unwrap();
        assert_eq!(mat_inverse(&two), Err(Error::NotInvertible(2)));
    }

    #[test]
    fn solve_examples() {
        for m in [2, 3, 4, 6, 12] {
            let a = Matrix::from_rows(zn(m), &[[1]]).unwrap();
            for k in 0..m as i64 {
                let b = Matrix::from_rows(zn(m), &[[k]]).unwrap();
                assert_eq!(solve(&a, &b).unwrap(), Some(b));
            }
        }
        let a = Matrix::from_rows(zn(4), &[[2]]).unwrap();
        let one = Matrix::from_rows(zn(4), &[[1]]).unwrap();
        assert_eq!(solve(&a, &one).unwrap(), None);
        // 2x = 2 mod 4 has solutions {1, 3}; the canonical one is 1.
        let two = Matrix::from_rows(zn(4), &[[2]]).unwrap();
        assert_eq!(solve(&a, &two).unwrap(), Some(one));
    }

    #[test]
    fn solve_rejects_bad_shapes() {
        let a = Matrix::identity(zn(5), 2);
        let b = Matrix::zeros(zn(5), 3, 1);
        assert!(matches!(solve(&a, &b), Err(Error::Shape(_))));
        let c = Matrix::zeros(zn(7), 2, 1);
        assert!(matches!(solve(&a, &c), Err(Error::ModulusMismatch(5, 7))));
    }

    #[test]
    fn kron_of_identities() {
        let a = Matrix::identity(zn(9), 2);
        let b = Matrix::identity(zn(9), 3);
        assert_eq!(a.kron(&b).unwrap(), Matrix::identity(zn(9), 6));
    }
}
