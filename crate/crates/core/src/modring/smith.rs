//! Smith normal form of an integer lift, reduced mod `m` between pivots.
//!
//! The transforms `U`, `V` are products of elementary operations that are
//! unimodular over `Z`, so `U * A * V = D` holds for the lift and therefore
//! mod `m`. Entries are re-reduced after every operation: the working matrix
//! stays a lift of the same residue matrix, which is all solving mod `m`
//! needs, and nothing grows beyond `m^2`.

use num_integer::Integer;

use super::{Matrix, Modulus};
use crate::error::{Error, Result};

/// `U * A * V = diag(d_0, ..., d_{k-1})` (padded with zeros) over `Z/m`.
#[derive(Debug, Clone)]
pub struct Smith {
    modulus: Modulus,
    rows: usize,
    cols: usize,
    /// Left transform `U` (rows x rows).
    pub left: Matrix,
    /// Right transform `V` (cols x cols).
    pub right: Matrix,
    /// Diagonal of `D`, length `min(rows, cols)`.
    pub diag: Vec<u64>,
    /// `det(U) * det(V)`, either `1` or `-1`.
    negated: bool,
}

struct Work {
    m: i128,
    a: Vec<Vec<i128>>,
    u: Vec<Vec<i128>>,
    v: Vec<Vec<i128>>,
    swaps: usize,
}

impl Work {
    fn reduce(&self, x: i128) -> i128 {
        x.rem_euclid(self.m)
    }

    /// Replaces rows `(k, i)` by `[[s, t], [p, q]] * (row_k, row_i)`.
    fn combine_rows(&mut self, k: usize, i: usize, s: i128, t: i128, p: i128, q: i128) {
        let m = self.m;
        for mat in [&mut self.a, &mut self.u] {
            for j in 0..mat[k].len() {
                let (x, y) = (mat[k][j], mat[i][j]);
                mat[k][j] = (s * x + t * y).rem_euclid(m);
                mat[i][j] = (p * x + q * y).rem_euclid(m);
            }
        }
    }

    /// Replaces columns `(k, j)` by `(col_k, col_j) * [[s, p], [t, q]]`.
    fn combine_cols(&mut self, k: usize, j: usize, s: i128, t: i128, p: i128, q: i128) {
        let m = self.m;
        for mat in [&mut self.a, &mut self.v] {
            for row in mat.iter_mut() {
                let (x, y) = (row[k], row[j]);
                row[k] = (s * x + t * y).rem_euclid(m);
                row[j] = (p * x + q * y).rem_euclid(m);
            }
        }
    }

    fn clear_column(&mut self, k: usize) -> bool {
        let mut touched = false;
        for i in k + 1..self.a.len() {
            let y = self.a[i][k];
            if y == 0 {
                continue;
            }
            touched = true;
            let x = self.a[k][k];
            if y % x == 0 {
                let q = y / x;
                self.combine_rows(k, i, 1, 0, -q, 1);
            } else {
                let e = x.extended_gcd(&y);
                self.combine_rows(k, i, e.x, e.y, -y / e.gcd, x / e.gcd);
            }
            debug_assert_eq!(self.reduce(self.a[i][k]), 0);
        }
        touched
    }

    fn clear_row(&mut self, k: usize) -> bool {
        let mut touched = false;
        for j in k + 1..self.a[k].len() {
            let y = self.a[k][j];
            if y == 0 {
                continue;
            }
            touched = true;
            let x = self.a[k][k];
            if y % x == 0 {
                let q = y / x;
                self.combine_cols(k, j, 1, 0, -q, 1);
            } else {
                let e = x.extended_gcd(&y);
                self.combine_cols(k, j, e.x, e.y, -y / e.gcd, x / e.gcd);
            }
        }
        touched
    }
}

fn to_work(rows: usize, cols: usize, data: &[u64]) -> Vec<Vec<i128>> {
    (0..rows)
        .map(|i| (0..cols).map(|j| data[i * cols + j] as i128).collect())
        .collect()
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

fn from_work(modulus: Modulus, w: &[Vec<i128>], cols: usize) -> Matrix {
    let data = w
        .iter()
        .flat_map(|row| row.iter().map(|&x| modulus.reduce(x)))
        .collect();
    Matrix::from_vec(modulus, w.len(), cols, data).expect("consistent shape")
}

impl Smith {
    pub fn compute(a: &Matrix) -> Smith {
        let modulus = a.modulus();
        let (rows, cols) = (a.rows(), a.cols());
        let mut w = Work {
            m: modulus.get() as i128,
            a: to_work(rows, cols, a.data()),
            u: identity(rows),
            v: identity(cols),
            swaps: 0,
        };

        let steps = rows.min(cols);
        for k in 0..steps {
            // Smallest nonzero entry of the trailing block as pivot.
            let pivot = (k..rows)
                .flat_map(|i| (k..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| w.a[i][j] != 0)
                .min_by_key(|&(i, j)| w.a[i][j]);
            let Some((pi, pj)) = pivot else { break };
            if pi != k {
                w.a.swap(k, pi);
                w.u.swap(k, pi);
                w.swaps += 1;
            }
            if pj != k {
                for row in w.a.iter_mut().chain(w.v.iter_mut()) {
                    row.swap(k, pj);
                }
                w.swaps += 1;
            }
            loop {
                let c = w.clear_column(k);
                let r = w.clear_row(k);
                if !c && !r {
                    break;
                }
            }
        }

        let diag = (0..steps).map(|k| modulus.reduce(w.a[k][k])).collect();
        Smith {
            modulus,
            rows,
            cols,
            left: from_work(modulus, &w.u, rows),
            right: from_work(modulus, &w.v, cols),
            diag,
            negated: w.swaps % 2 == 1,
        }
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    /// `det(A)` mod `m` for a square input.
    pub fn det(&self) -> u64 {
        debug_assert_eq!(self.rows, self.cols);
        let m = self.modulus;
        let prod = self.diag.iter().fold(1 % m.get(), |acc, &d| m.mul(acc, d));
        if self.negated {
            m.neg(prod)
        } else {
            prod
        }
    }

    /// `A^{-1} = V * D^{-1} * U`.
    pub fn inverse(&self) -> Result<Matrix> {
        let m = self.modulus;
        let n = self.rows;
        let mut dinv = Matrix::zeros(m, n, n);
        for (i, &d) in self.diag.iter().enumerate() {
            match m.inv(d) {
                Some(x) => dinv.set(i, i, x),
                None => return Err(Error::NotInvertible(self.det())),
            }
        }
        self.right.mul(&dinv)?.mul(&self.left)
    }

    /// The full solution set of `A x = b`, or `None` when it is empty.
    pub fn solve_vector(&self, b: &[u64]) -> Option<SolveSpace> {
        assert_eq!(b.len(), self.rows, "right-hand side length");
        let m = self.modulus;
        let c: Vec<u64> = (0..self.rows)
            .map(|i| (0..self.rows).fold(0, |acc, j| m.add(acc, m.mul(self.left.get(i, j), b[j]))))
            .collect();

        let mut y = vec![0u64; self.cols];
        let mut kernel_coords: Vec<(usize, u64)> = Vec::new();
        for (i, &ci) in c.iter().enumerate() {
            if i < self.diag.len() {
                let d = self.diag[i];
                let g = m.gcd(d);
                if ci % g != 0 {
                    return None;
                }
                let reduced_m = m.get() / g;
                if reduced_m > 1 {
                    let inv = inverse_mod(d / g, reduced_m);
                    y[i] = ((ci / g) as u128 * inv as u128 % reduced_m as u128) as u64;
                    kernel_coords.push((i, reduced_m));
                } else {
                    // d = 0: any y_i works.
                    kernel_coords.push((i, 1));
                }
            } else if ci != 0 {
                return None;
            }
        }
        for i in self.diag.len()..self.cols {
            kernel_coords.push((i, 1));
        }

        let apply_v = |coords: &dyn Fn(usize) -> u64| -> Vec<u64> {
            (0..self.cols)
                .map(|r| {
                    (0..self.cols).fold(0, |acc, j| {
                        m.add(acc, m.mul(self.right.get(r, j), coords(j)))
                    })
                })
                .collect()
        };
        let particular = apply_v(&|j| y[j]);
        let kernel = kernel_coords
            .into_iter()
            .map(|(i, step)| apply_v(&|j| if j == i { step } else { 0 }))
            .filter(|v| v.iter().any(|&x| x != 0))
            .collect();
        Some(SolveSpace {
            modulus: m,
            particular,
            kernel,
        })
    }
}

fn inverse_mod(a: u64, n: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(n as i128));
    debug_assert_eq!(e.gcd, 1);
    e.x.rem_euclid(n as i128) as u64
}

/// An affine solution set `particular + span(kernel)` over `Z/m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveSpace {
    pub modulus: Modulus,
    pub particular: Vec<u64>,
    pub kernel: Vec<Vec<u64>>,
}

impl SolveSpace {
    /// Lexicographically smallest element of the coset.
    ///
    /// Coordinate by coordinate: the reachable values of `x_j` form
    /// `x_j + h Z/m` with `h = gcd(m, kernel_j)`, so the minimum is
    /// `x_j mod h`; after fixing it the kernel shrinks to the generators
    /// vanishing at `j`.
    pub fn lex_min(&self) -> Vec<u64> {
        let m = self.modulus;
        let mut x = self.particular.clone();
        let mut kernel = self.kernel.clone();
        for j in 0..x.len() {
            if kernel.is_empty() {
                break;
            }
            let coeffs: Vec<u64> = kernel.iter().map(|k| k[j]).collect();
            let h = coeffs.iter().fold(m.get(), |acc, &a| acc.gcd(&a));
            let target = x[j] % h;
            let delta = m.sub(target, x[j]);

            let row = Matrix::from_vec(m, 1, coeffs.len(), coeffs).expect("row shape");
            let smith = row.smith();
            let shift = smith
                .solve_vector(&[delta])
                .expect("target lies in the reachable coset");
            for (c, k) in shift.particular.iter().zip(&kernel) {
                for (xi, ki) in x.iter_mut().zip(k) {
                    *xi = m.add(*xi, m.mul(*c, *ki));
                }
            }
            debug_assert_eq!(x[j], target);

            let stabiliser = smith.solve_vector(&[0]).expect("homogeneous system");
            kernel = stabiliser
                .kernel
                .iter()
                .map(|c| {
                    let mut v = vec![0u64; x.len()];
                    for (ci, k) in c.iter().zip(&kernel) {
                        for (vi, ki) in v.iter_mut().zip(k) {
                            *vi = m.add(*vi, m.mul(*ci, *ki));
                        }
                    }
                    v
                })
                .filter(|v| v.iter().any(|&e| e != 0))
                .collect();
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zn(m: u64) -> Modulus {
        Modulus::new(m).unwrap()
    }

    #[test]
    fn transforms_diagonalise() {
        let a = Matrix::from_rows(zn(12), &[[4, 6, 2], [3, 9, 0], [8, 1, 5]]).unwrap();
        let s = a.smith();
        let d = s.left.mul(&a).unwrap().mul(&s.right).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_eq!(d.get(i, i), s.diag[i]);
                } else {
                    assert_eq!(d.get(i, j), 0, "off-diagonal ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn det_matches_cofactor_expansion() {
        let a = Matrix::from_rows(zn(9), &[[2, 7, 1], [0, 3, 5], [4, 4, 8]]).unwrap();
        // 2(24-20) - 7(0-20) + 1(0-12) = 8 + 140 - 12 = 136 = 1 mod 9
        assert_eq!(a.det().unwrap(), 1);
        let swap = Matrix::from_rows(zn(5), &[[0, 1], [1, 0]]).unwrap();
        assert_eq!(swap.det().unwrap(), 4);
    }

    #[test]
    fn underdetermined_lex_min() {
        // x + 2y = 3 mod 6: smallest is (1, 1).
        let a = Matrix::from_rows(zn(6), &[[1, 2]]).unwrap();
        let x = a
            .solve(&Matrix::from_rows(zn(6), &[[3]]).unwrap())
            .unwrap()
            .unwrap();
        assert_eq!(x.column(0), vec![1, 1]);
    }

    #[test]
    fn zero_matrix_solutions() {
        let a = Matrix::zeros(zn(4), 2, 2);
        assert_eq!(
            a.solve(&Matrix::zeros(zn(4), 2, 1))
                .unwrap()
                .unwrap()
                .column(0),
            vec![0, 0]
        );
        assert!(a
            .solve(&Matrix::from_rows(zn(4), &[[1], [0]]).unwrap())
            .unwrap()
            .is_none());
    }
}
