//! Randomized verification of the correspondence calculus.
//!
//! Samples are random valid split algebras with random cycles on their
//! products. Every property compares the engine against an independent
//! oracle built from the multiplication tables, the dual basis or plain
//! matrix algebra. Operations under test go through a [`Calculus`], so the
//! same suite can be pointed at deliberately broken variants.
//!
//! Randomness is ChaCha8 seeded from the user seed, with stream
//! `sample * 64 + slot` so each sample and property is reproducible alone.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::correspondences::{self, Correspondence};
use crate::cycles::{self, CycleClass, ProductSpace};
use crate::error::{Error, Result};
use crate::modring::{Matrix, Modulus};
use crate::split_algebra::SplitAlgebra;

pub const DEFAULT_MODULI: [u64; 7] = [2, 3, 4, 5, 6, 8, 9];
pub const DEFAULT_MAX_RANK: usize = 4;
const MAX_DIM: usize = 3;
const TABLE_ATTEMPTS: u64 = 64;
const ALGEBRA_SLOT: u64 = 63;

/// The operations whose correctness the suite probes.
pub trait Calculus: Send + Sync {
    fn name(&self) -> String;

    /// `v o u`.
    fn compose(&self, u: &Correspondence, v: &Correspondence) -> Result<Correspondence>;

    fn transpose(&self, u: &Correspondence) -> Result<Correspondence> {
        correspondences::transpose(u)
    }

    fn epsilon_pullback(&self, c: &CycleClass) -> Result<CycleClass>;

    fn diagonal_pullback(&self, c: &CycleClass) -> Result<CycleClass>;
}

pub struct Exact;

impl Calculus for Exact {
    fn name(&self) -> String {
        "exact".into()
    }

    fn compose(&self, u: &Correspondence, v: &Correspondence) -> Result<Correspondence> {
        correspondences::compose(u, v)
    }

    fn epsilon_pullback(&self, c: &CycleClass) -> Result<CycleClass> {
        cycles::epsilon_pullback(c)
    }

    fn diagonal_pullback(&self, c: &CycleClass) -> Result<CycleClass> {
        cycles::diagonal_pullback(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// Pushforward contracts with `1` on every point class instead of `deg`.
    DegreeFactor,
    /// `compose(u, v)` returns `u o v`.
    CompositionOrder,
    /// `eps*` reads the slot after the fundamental class.
    EpsilonUnitIndex,
    /// `Delta*` forgets the third factor instead of intersecting with it.
    DiagonalIntersection,
}

impl Mutation {
    pub const ALL: [Mutation; 4] = [
        Mutation::DegreeFactor,
        Mutation::CompositionOrder,
        Mutation::EpsilonUnitIndex,
        Mutation::DiagonalIntersection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutation::DegreeFactor => "degree-factor",
            Mutation::CompositionOrder => "composition-order",
            Mutation::EpsilonUnitIndex => "epsilon-unit-index",
            Mutation::DiagonalIntersection => "diagonal-intersection",
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mutation::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

pub struct Mutant(pub Mutation);

impl Calculus for Mutant {
    fn name(&self) -> String {
        format!("mutant:{}", self.0)
    }

    fn compose(&self, u: &Correspondence, v: &Correspondence) -> Result<Correspondence> {
        match self.0 {
            Mutation::CompositionOrder => correspondences::compose(v, u),
            Mutation::DegreeFactor => compose_with_point_count(u, v),
            _ => correspondences::compose(u, v),
        }
    }

    fn epsilon_pullback(&self, c: &CycleClass) -> Result<CycleClass> {
        match self.0 {
            Mutation::EpsilonUnitIndex => {
                let x = c.space().factor(2);
                cycles::epsilon_pullback_at(c, (x.unit() + 1) % x.rank())
            }
            _ => cycles::epsilon_pullback(c),
        }
    }

    fn diagonal_pullback(&self, c: &CycleClass) -> Result<CycleClass> {
        match self.0 {
            Mutation::DiagonalIntersection => {
                let s = c.space();
                let pair = ProductSpace::pair(s.factor(0), s.factor(1))?;
                let mut out = CycleClass::zero(pair);
                for (idx, v) in c.terms() {
                    let cur = out.coeff(&idx[..2]);
                    out.set_coeff(&idx[..2], c.modulus().add(cur, v));
                }
                Ok(out)
            }
            _ => cycles::diagonal_pullback(c),
        }
    }
}

fn compose_with_point_count(u: &Correspondence, v: &Correspondence) -> Result<Correspondence> {
    let a = u.source();
    let b = &u.targets()[0];
    let mut lifted_u = u.cycle().clone();
    for (t, f) in v.targets().iter().enumerate() {
        lifted_u = cycles::projection_pullback(&lifted_u, 2 + t, f)?;
    }
    let lifted_v = cycles::projection_pullback(v.cycle(), 0, a)?;
    let product = cycles::intersect(&lifted_u, &lifted_v)?;
    let counting: Vec<u64> = (0..b.rank()).map(|i| u64::from(b.phi(i) == 0)).collect();
    let mut factors = product.space().factors().to_vec();
    factors[1] = Arc::new(b.with_degree(counting)?);
    let rehomed = CycleClass::from_coeffs(ProductSpace::new(factors)?, product.coeffs().to_vec())?;
    Correspondence::new(cycles::projection_pushforward(&rehomed, 1)?)
}

/// Symmetric rank profiles `(r_0, ..., r_d)` with `r_d >= 1` and total at
/// most `max_rank`.
pub fn rank_profiles(max_rank: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for d in 0..=MAX_DIM {
        let half = d / 2;
        let mut stack: Vec<Vec<usize>> = vec![vec![]];
        while let Some(prefix) = stack.pop() {
            if prefix.len() == half + 1 {
                let mut full = vec![0; d + 1];
                for (k, &r) in prefix.iter().enumerate() {
                    full[k] = r;
                    full[d - k] = r;
                }
                if full[d] >= 1 && full.iter().sum::<usize>() <= max_rank {
                    out.push(full);
                }
                continue;
            }
            for r in (0..=max_rank).rev() {
                let mut next = prefix.clone();
                next.push(r);
                stack.push(next);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerationStats {
    pub accepted: u64,
    pub rejected: u64,
}

impl GenerationStats {
    fn merge(&mut self, other: GenerationStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
    }
}

/// A random valid split algebra: a rank profile is drawn, structure
/// constants are filled uniformly on grading-legal slots, invalid tables are
/// rejected and the basis is shuffled.
pub fn random_algebra(
    rng: &mut impl Rng,
    modulus: Modulus,
    max_rank: usize,
) -> (SplitAlgebra, GenerationStats) {
    let profiles = rank_profiles(max_rank.max(1));
    let mut stats = GenerationStats::default();
    loop {
        let profile = profiles.choose(rng).expect("at least the point profile");
        for _ in 0..TABLE_ATTEMPTS {
            let a = random_table(rng, modulus, profile);
            if a.is_valid() {
                stats.accepted += 1;
                return (shuffle_basis(rng, &a), stats);
            }
            stats.rejected += 1;
        }
    }
}

fn random_table(rng: &mut impl Rng, modulus: Modulus, profile: &[usize]) -> SplitAlgebra {
    let d = profile.len() - 1;
    let mut phi = Vec::new();
    for k in (0..=d).rev() {
        phi.extend(std::iter::repeat_n(k, profile[k]));
    }
    let n = phi.len();
    let m = modulus.get();
    let mut products = Vec::new();
    for i in 1..n {
        for j in i..n {
            let Some(target) = (phi[i] + phi[j]).checked_sub(d) else {
                continue;
            };
            for (k, &pk) in phi.iter().enumerate() {
                if pk == target {
                    products.push((i, j, k, rng.gen_range(0..m) as i64));
                }
            }
        }
    }
    let degree = phi
        .iter()
        .map(|&p| if p == 0 { rng.gen_range(0..m) } else { 0 })
        .collect();
    SplitAlgebra::from_products(modulus, d, phi, 0, degree, &products)
        .expect("shapes are consistent")
}

fn shuffle_basis(rng: &mut impl Rng, a: &SplitAlgebra) -> SplitAlgebra {
    let n = a.rank();
    // new index of old basis element i
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut phi = vec![0; n];
    let mut degree = vec![0; n];
    let mut mult = vec![0; n * n * n];
    for i in 0..n {
        phi[perm[i]] = a.phi(i);
        degree[perm[i]] = a.degree(i);
        for j in 0..n {
            for k in 0..n {
                mult[(perm[i] * n + perm[j]) * n + perm[k]] = a.structure_constant(i, j, k);
            }
        }
    }
    SplitAlgebra::from_parts(a.modulus(), a.dim(), phi, mult, perm[a.unit()], degree)
        .expect("permuted table")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    /// `(x_i x x_j*) o (x_k x x_s*) = delta_is (x_k x x_j*)`.
    Rule1,
    /// `(x_i x y x 1) o (x_k x x_s*) = delta_is (x_k x y x 1)`.
    Rule2,
    /// `(y' x x_j*) o (x_i x y) = deg(y' y) (x_i x x_j*)`.
    Rule3,
    TensorOracle,
    Associativity,
    Transpose,
    Identity,
    MatrixHomomorphism,
    Epsilon,
    Diagonal,
    Projector,
    DualBasis,
    Kunneth,
    ProjectionFormula,
}

impl Property {
    pub const ALL: [Property; 14] = [
        Property::Rule1,
        Property::Rule2,
        Property::Rule3,
        Property::TensorOracle,
        Property::Associativity,
        Property::Transpose,
        Property::Identity,
        Property::MatrixHomomorphism,
        Property::Epsilon,
        Property::Diagonal,
        Property::Projector,
        Property::DualBasis,
        Property::Kunneth,
        Property::ProjectionFormula,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Rule1 => "rule-1",
            Property::Rule2 => "rule-2",
            Property::Rule3 => "rule-3",
            Property::TensorOracle => "tensor-oracle",
            Property::Associativity => "associativity",
            Property::Transpose => "transpose",
            Property::Identity => "identity",
            Property::MatrixHomomorphism => "matrix-homomorphism",
            Property::Epsilon => "epsilon",
            Property::Diagonal => "diagonal",
            Property::Projector => "projector",
            Property::DualBasis => "dual-basis",
            Property::Kunneth => "kunneth",
            Property::ProjectionFormula => "projection-formula",
        }
    }

    fn slot(self) -> u64 {
        Property::ALL
            .iter()
            .position(|&p| p == self)
            .expect("listed") as u64
    }

    /// Shapes `(rows, cols)` of the random inputs, from the ranks of X, Y, Z.
    fn input_shapes(self, nx: usize, ny: usize, nz: usize) -> Vec<(usize, usize)> {
        match self {
            Property::Rule1 | Property::MatrixHomomorphism => vec![(nx, nx), (nx, nx)],
            Property::Rule2 => vec![(nx, nx), (nx, ny)],
            Property::Rule3 => vec![(nx, ny), (ny, nx)],
            Property::TensorOracle | Property::Transpose => vec![(nx, ny), (ny, nz)],
            Property::Associativity => vec![(nx, ny), (ny, nz), (nz, nx)],
            Property::Identity => vec![(nx, ny)],
            Property::Epsilon => vec![(nx, ny), (nx * ny, nx)],
            Property::Diagonal => vec![(nx * ny, nx)],
            Property::Projector => vec![(nx, nx)],
            Property::DualBasis => vec![(1, 1)],
            Property::Kunneth => vec![],
            Property::ProjectionFormula => vec![(1, nx), (nx, ny)],
        }
    }

    fn sparse(self) -> bool {
        matches!(self, Property::Rule1 | Property::Rule2 | Property::Rule3)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownName(s.to_string()))
    }
}

/// One property instance: three algebras and the raw input coefficients.
#[derive(Debug, Clone)]
pub struct Case {
    pub x: Arc<SplitAlgebra>,
    pub y: Arc<SplitAlgebra>,
    pub z: Arc<SplitAlgebra>,
    pub inputs: Vec<Vec<u64>>,
}

impl Case {
    pub fn modulus(&self) -> Modulus {
        self.x.modulus()
    }

    pub fn max_rank(&self) -> usize {
        self.x.rank().max(self.y.rank()).max(self.z.rank())
    }

    fn matrix(&self, k: usize, rows: usize, cols: usize) -> Result<Matrix> {
        Matrix::from_vec(self.modulus(), rows, cols, self.inputs[k].clone())
    }

    fn cycle(&self, k: usize, space: ProductSpace) -> Result<CycleClass> {
        CycleClass::from_coeffs(space, self.inputs[k].clone())
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, a) in [("X", &self.x), ("Y", &self.y), ("Z", &self.z)] {
            writeln!(
                f,
                "{name}: Z/{} rank {} dim {} phi {:?} unit {} degree {:?}",
                a.modulus(),
                a.rank(),
                a.dim(),
                a.phis(),
                a.unit(),
                a.degrees()
            )?;
        }
        for (k, v) in self.inputs.iter().enumerate() {
            writeln!(f, "input {k}: {v:?}")?;
        }
        Ok(())
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn random_inputs(
    rng: &mut impl Rng,
    property: Property,
    m: Modulus,
    x: &SplitAlgebra,
    y: &SplitAlgebra,
    z: &SplitAlgebra,
) -> Vec<Vec<u64>> {
    let shapes = property.input_shapes(x.rank(), y.rank(), z.rank());
    let mv = m.get();
    let mut out = Vec::new();
    for (rows, cols) in shapes {
        let len = rows * cols;
        let mut v = vec![0u64; len];
        if property == Property::DualBasis {
            // a non-unit scale for the singular Gram check
            let non_units: Vec<u64> = (0..mv).filter(|&a| !m.is_unit(a)).collect();
            v[0] = *non_units.choose(rng).expect("0 is never a unit");
        } else if property.sparse() {
            for _ in 0..rng.gen_range(1..=3) {
                v[rng.gen_range(0..len)] = rng.gen_range(1..mv);
            }
        } else {
            for e in v.iter_mut() {
                if rng.gen_bool(0.5) {
                    *e = rng.gen_range(0..mv);
                }
            }
            if property == Property::Projector {
                // keep only degree-zero entries: phi(k) = phi(s)
                for k in 0..rows {
                    for s in 0..cols {
                        if x.phi(k) != x.phi(s) {
                            v[k * cols + s] = 0;
                        }
                    }
                }
            }
        }
        out.push(v);
    }
    out
}

/// The three algebras of a sample, over a random modulus unless one is fixed.
pub fn generate_algebras(
    rng_seed: u64,
    stream: u64,
    moduli: &[u64],
    fixed: Option<Modulus>,
    max_rank: usize,
) -> Result<([Arc<SplitAlgebra>; 3], GenerationStats)> {
    let mut rng = stream_rng(rng_seed, stream * 64 + ALGEBRA_SLOT);
    let m = match fixed {
        Some(m) => m,
        None => Modulus::new(*moduli.choose(&mut rng).ok_or(Error::InvalidModulus(0))?)?,
    };
    let mut stats = GenerationStats::default();
    let mut algebra = || {
        let (a, s) = random_algebra(&mut rng, m, max_rank);
        stats.merge(s);
        Arc::new(a)
    };
    let algebras = [algebra(), algebra(), algebra()];
    Ok((algebras, stats))
}

/// Random inputs for `property` on given algebras.
pub fn generate_inputs(
    rng_seed: u64,
    stream: u64,
    property: Property,
    algebras: &[Arc<SplitAlgebra>; 3],
) -> Case {
    let [x, y, z] = algebras.clone();
    let mut rng = stream_rng(rng_seed, stream * 64 + property.slot());
    let inputs = random_inputs(&mut rng, property, x.modulus(), &x, &y, &z);
    Case { x, y, z, inputs }
}

/// Generates the case for `property` at `stream`, with a fixed modulus when
/// given (used when shrinking).
pub fn generate_case(
    rng_seed: u64,
    stream: u64,
    property: Property,
    moduli: &[u64],
    fixed: Option<Modulus>,
    max_rank: usize,
) -> Result<(Case, GenerationStats)> {
    let (algebras, stats) = generate_algebras(rng_seed, stream, moduli, fixed, max_rank)?;
    Ok((
        generate_inputs(rng_seed, stream, property, &algebras),
        stats,
    ))
}

fn expect_eq<T: PartialEq + fmt::Display>(
    what: &str,
    engine: &T,
    oracle: &T,
) -> std::result::Result<(), String> {
    if engine == oracle {
        Ok(())
    } else {
        Err(format!(
            "{what}: engine gave {engine}, oracle gave {oracle}"
        ))
    }
}

fn tensor(c: &CycleClass, rows: usize, cols: usize) -> Result<Matrix> {
    Matrix::from_vec(c.modulus(), rows, cols, c.coeffs().to_vec())
}

/// `sum_j c_{bj} y_b x x_j*` from a coefficient matrix `C` on `Y x X`:
/// the tensor is `C * D^T`.
fn with_dual_second(
    y: &Arc<SplitAlgebra>,
    x: &Arc<SplitAlgebra>,
    c: &Matrix,
) -> Result<CycleClass> {
    let dual = x.dual_basis()?;
    let m = x.modulus();
    let mut out = CycleClass::zero(ProductSpace::pair(y, x)?);
    for b in 0..y.rank() {
        for j in 0..x.rank() {
            let coeff = c.get(b, j);
            if coeff == 0 {
                continue;
            }
            let star = dual.element(j);
            for (i, &d) in star.iter().enumerate() {
                let cur = out.coeff(&[b, i]);
                out.set_coeff(&[b, i], m.add(cur, m.mul(coeff, d)));
            }
        }
    }
    Ok(out)
}

/// Runs one property on one case. `Err` inside `Ok` is a property failure;
/// engine errors are failures too, since the oracles only feed well-typed
/// inputs.
pub fn check(
    property: Property,
    case: &Case,
    calc: &dyn Calculus,
) -> std::result::Result<(), String> {
    check_inner(property, case, calc).unwrap_or_else(|e| Err(format!("engine error: {e}")))
}

fn check_inner(
    property: Property,
    case: &Case,
    calc: &dyn Calculus,
) -> Result<std::result::Result<(), String>> {
    let (x, y, z) = (&case.x, &case.y, &case.z);
    let (nx, ny, nz) = (x.rank(), y.rank(), z.rank());
    let m = case.modulus();
    Ok(match property {
        Property::Rule1 => {
            let (a, b) = (case.matrix(0, nx, nx)?, case.matrix(1, nx, nx)?);
            let u = Correspondence::from_matrix(x, &a)?;
            let v = Correspondence::from_matrix(x, &b)?;
            // sum a_ks b_ij delta_is x_k x x_j*
            let mut expected = Matrix::zeros(m, nx, nx);
            for k in 0..nx {
                for s in 0..nx {
                    for j in 0..nx {
                        let t = m.mul(a.get(k, s), b.get(s, j));
                        expected.set(k, j, m.add(expected.get(k, j), t));
                    }
                }
            }
            let oracle = Correspondence::from_matrix(x, &expected)?;
            expect_eq("v o u", calc.compose(&u, &v)?.cycle(), oracle.cycle())
        }
        Property::Rule2 => {
            let (a, b) = (case.matrix(0, nx, nx)?, case.matrix(1, nx, ny)?);
            let u = Correspondence::from_matrix(x, &a)?;
            let xyx = ProductSpace::triple(x, y, x)?;
            let unit = x.unit();
            let mut v = CycleClass::zero(xyx.clone());
            for i in 0..nx {
                for yb in 0..ny {
                    v.set_coeff(&[i, yb, unit], b.get(i, yb));
                }
            }
            let mut expected = CycleClass::zero(xyx);
            for k in 0..nx {
                for yb in 0..ny {
                    let mut acc = 0;
                    for s in 0..nx {
                        acc = m.add(acc, m.mul(a.get(k, s), b.get(s, yb)));
                    }
                    expected.set_coeff(&[k, yb, unit], acc);
                }
            }
            let got = calc.compose(&u, &Correspondence::new(v)?)?;
            expect_eq("(x_i x y x 1) o (x_k x x_s*)", got.cycle(), &expected)
        }
        Property::Rule3 => {
            let (a, c) = (case.matrix(0, nx, ny)?, case.matrix(1, ny, nx)?);
            let u = Correspondence::new(case.cycle(0, ProductSpace::pair(x, y)?)?)?;
            let v = Correspondence::new(with_dual_second(y, x, &c)?)?;
            // sum a_ib c_b'j deg(y_b' y_b) x_i x x_j*
            let mut expected = Matrix::zeros(m, nx, nx);
            for i in 0..nx {
                for b in 0..ny {
                    if a.get(i, b) == 0 {
                        continue;
                    }
                    for b2 in 0..ny {
                        let d = y.deg(&y.multiply(&y.basis_element(b2), &y.basis_element(b)));
                        let w = m.mul(a.get(i, b), d);
                        for j in 0..nx {
                            expected.set(i, j, m.add(expected.get(i, j), m.mul(w, c.get(b2, j))));
                        }
                    }
                }
            }
            let oracle = Correspondence::from_matrix(x, &expected)?;
            expect_eq(
                "(y' x x_j*) o (x_i x y)",
                calc.compose(&u, &v)?.cycle(),
                oracle.cycle(),
            )
        }
        Property::TensorOracle => {
            let u = Correspondence::new(case.cycle(0, ProductSpace::pair(x, y)?)?)?;
            let v = Correspondence::new(case.cycle(1, ProductSpace::pair(y, z)?)?)?;
            let got = tensor(calc.compose(&u, &v)?.cycle(), nx, nz)?;
            let oracle = case
                .matrix(0, nx, ny)?
                .mul(&y.gram())?
                .mul(&case.matrix(1, ny, nz)?)?;
            expect_eq("tensor of v o u", &got, &oracle)
        }
        Property::Associativity => {
            let u = Correspondence::new(case.cycle(0, ProductSpace::pair(x, y)?)?)?;
            let v = Correspondence::new(case.cycle(1, ProductSpace::pair(y, z)?)?)?;
            let w = Correspondence::new(case.cycle(2, ProductSpace::pair(z, x)?)?)?;
            let left = calc.compose(&calc.compose(&u, &v)?, &w)?;
            let right = calc.compose(&u, &calc.compose(&v, &w)?)?;
            expect_eq("(w o v) o u vs w o (v o u)", left.cycle(), right.cycle())
        }
        Property::Transpose => {
            let u = Correspondence::new(case.cycle(0, ProductSpace::pair(x, y)?)?)?;
            let v = Correspondence::new(case.cycle(1, ProductSpace::pair(y, z)?)?)?;
            let left = calc.transpose(&calc.compose(&u, &v)?)?;
            let right = calc.compose(&calc.transpose(&v)?, &calc.transpose(&u)?)?;
            match expect_eq("t(v o u) vs t(u) o t(v)", left.cycle(), right.cycle()) {
                Ok(()) => expect_eq(
                    "tt(u)",
                    calc.transpose(&calc.transpose(&u)?)?.cycle(),
                    u.cycle(),
                ),
                e => e,
            }
        }
        Property::Identity => {
            let u = Correspondence::new(case.cycle(0, ProductSpace::pair(x, y)?)?)?;
            let dx = Correspondence::identity(x)?;
            let dy = Correspondence::identity(y)?;
            match expect_eq("Delta_Y o u", calc.compose(&u, &dy)?.cycle(), u.cycle()) {
                Ok(()) => expect_eq("u o Delta_X", calc.compose(&dx, &u)?.cycle(), u.cycle()),
                e => e,
            }
        }
        Property::MatrixHomomorphism => {
            let u = Correspondence::new(case.cycle(0, ProductSpace::pair(x, x)?)?)?;
            let v = Correspondence::new(case.cycle(1, ProductSpace::pair(x, x)?)?)?;
            let lhs = correspondences::matrix_form(&calc.compose(&u, &v)?)?;
            let rhs = correspondences::matrix_form(&u)?.mul(&correspondences::matrix_form(&v)?)?;
            match expect_eq("matrix(v o u) vs matrix(u) matrix(v)", &lhs, &rhs) {
                Ok(()) => expect_eq(
                    "matrix(Delta)",
                    &correspondences::matrix_form(&Correspondence::identity(x)?)?,
                    &Matrix::identity(m, nx),
                ),
                e => e,
            }
        }
        Property::Epsilon => {
            let c = case.cycle(0, ProductSpace::pair(x, y)?)?;
            let lifted = cycles::projection_pullback(&c, 2, x)?;
            let t = case.cycle(1, ProductSpace::triple(x, y, x)?)?;
            let mut oracle = CycleClass::zero(ProductSpace::pair(x, y)?);
            for a in 0..nx {
                for b in 0..ny {
                    oracle.set_coeff(&[a, b], t.coeff(&[a, b, x.unit()]));
                }
            }
            match expect_eq("eps*(c x 1)", &calc.epsilon_pullback(&lifted)?, &c) {
                Ok(()) => expect_eq("eps*", &calc.epsilon_pullback(&t)?, &oracle),
                e => e,
            }
        }
        Property::Diagonal => {
            let t = case.cycle(0, ProductSpace::triple(x, y, x)?)?;
            let pair = ProductSpace::pair(x, y)?;
            let mut oracle = CycleClass::zero(pair.clone());
            for (idx, v) in t.terms() {
                let prod = x.multiply(&x.basis_element(idx[0]), &x.basis_element(idx[2]));
                let term = CycleClass::pure(pair.clone(), &[&prod, &y.basis_element(idx[1])])?;
                oracle = oracle.add(&term.scale(v))?;
            }
            let got = calc.diagonal_pullback(&t)?;
            let mut res = expect_eq("Delta*", &got, &oracle);
            // codimension of the first slot goes up when codim(gamma) > 0
            'filtration: for (idx, _) in t.terms() {
                if x.codim(idx[2]) == 0 {
                    continue;
                }
                let single = CycleClass::basis(t.space().clone(), &idx)?;
                for (out, _) in calc.diagonal_pullback(&single)?.terms() {
                    if x.codim(out[0]) <= x.codim(idx[0]) {
                        res = res.and(Err(format!(
                            "Delta* of e{idx:?} has first-slot codimension {} <= {}",
                            x.codim(out[0]),
                            x.codim(idx[0])
                        )));
                        break 'filtration;
                    }
                }
            }
            res
        }
        Property::Projector => projector_property(case)?,
        Property::DualBasis => {
            let dual = x.dual_basis()?;
            let mut res = Ok(());
            for i in 0..nx {
                for j in 0..nx {
                    let v = x.pairing(&x.basis_element(i), &dual.element(j)).value();
                    if v != u64::from(i == j) {
                        res = Err(format!("Psi(x_{i}, x_{j}*) = {v}"));
                    }
                }
            }
            // the dual of the dual basis is the original basis
            let d = &dual.coeffs;
            let gram_star = d.transpose().mul(&x.gram())?.mul(d)?;
            let back = d.mul(&gram_star.inverse()?)?;
            if res.is_ok() && back != Matrix::identity(m, nx) {
                res = Err("the dual of the dual basis is not the basis".into());
            }
            let z_scale = case.inputs[0][0];
            let singular =
                x.with_degree(x.degrees().iter().map(|&d| m.mul(d, z_scale)).collect())?;
            if res.is_ok() && !matches!(singular.dual_basis(), Err(Error::DegeneratePairing(_))) {
                res = Err(format!("degree scaled by {z_scale} still has a dual basis"));
            }
            res
        }
        Property::Kunneth => {
            let k = x.kunneth(y)?;
            let mut res = expect_eq("Gram of the product", &k.gram(), &x.gram().kron(&y.gram())?);
            if res.is_ok() {
                res = expect_eq(
                    "dual basis of the product",
                    &k.dual_basis()?.coeffs,
                    &x.dual_basis()?.coeffs.kron(&y.dual_basis()?.coeffs)?,
                );
            }
            // full validation is quintic in the rank; small products only
            if res.is_ok() && k.rank() <= 9 && !k.is_valid() {
                res = Err("product algebra fails validation".into());
            }
            if res.is_ok() && x.kunneth(&SplitAlgebra::point(m))? != **x {
                res = Err("X (x) point differs from X".into());
            }
            res
        }
        Property::ProjectionFormula => {
            let a = CycleClass::from_coeffs(
                ProductSpace::new(vec![x.clone()])?,
                case.inputs[0].clone(),
            )?;
            let b = case.cycle(1, ProductSpace::pair(x, y)?)?;
            let pulled = cycles::projection_pullback(&a, 1, y)?;
            let lhs = cycles::projection_pushforward(&cycles::intersect(&pulled, &b)?, 1)?;
            let pushed = cycles::projection_pushforward(&b, 1)?;
            let rhs = x.multiply(a.coeffs(), pushed.coeffs());
            let rhs = CycleClass::from_coeffs(lhs.space().clone(), rhs)?;
            expect_eq("p_*(p^*a . b) vs a . p_*b", &lhs, &rhs)
        }
    })
}

fn projector_property(case: &Case) -> Result<std::result::Result<(), String>> {
    let x = &case.x;
    let n = x.rank();
    let m = case.modulus();
    let e = Correspondence::from_matrix(x, &case.matrix(0, n, n)?)?;
    let ip = correspondences::idempotent_power(&e)?;
    let p = &ip.idempotent;
    let pm = correspondences::matrix_form(p)?;
    if pm.mul(&pm)? != pm {
        return Ok(Err(format!(
            "P^2 != P for the idempotent power {}",
            ip.exponent
        )));
    }
    let chk = correspondences::projector_check(p)?;
    if !chk.holds() {
        return Ok(Err(format!("projector check disagrees: {chk:?}")));
    }
    if correspondences::power(&e, ip.exponent)? != *p {
        return Ok(Err("e^n differs from the reported idempotent".into()));
    }
    if p.is_zero() {
        return Ok(Ok(()));
    }
    let c = correspondences::cdmin(p)?.value;
    let rows: Vec<usize> = (0..n).filter(|&k| x.codim(k) == c).collect();
    for &k in &rows {
        for j in 0..n {
            let mut acc = 0;
            for &l in &rows {
                acc = m.add(acc, m.mul(pm.get(k, l), pm.get(l, j)));
            }
            if acc != pm.get(k, j) {
                return Ok(Err(format!(
                    "p_({k},{j}) = {} but the sum over rows of codimension {c} gives {acc}",
                    pm.get(k, j)
                )));
            }
        }
    }
    Ok(Ok(()))
}

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub sample: u64,
    pub message: String,
    /// The shrunk case.
    pub case: Case,
    pub original_rank: usize,
    pub zeroed: usize,
}

#[derive(Debug, Clone)]
pub struct PropertyOutcome {
    pub property: Property,
    pub samples: u64,
    pub failures: u64,
    pub counterexample: Option<Counterexample>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub count: u64,
    pub max_rank: usize,
    pub moduli: Vec<u64>,
    pub properties: Vec<Property>,
}

impl SuiteConfig {
    pub fn new(seed: u64, count: u64) -> Self {
        SuiteConfig {
            seed,
            count,
            max_rank: DEFAULT_MAX_RANK,
            moduli: DEFAULT_MODULI.to_vec(),
            properties: Property::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub calculus: String,
    pub outcomes: Vec<PropertyOutcome>,
    pub generation: GenerationStats,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(PropertyOutcome::passed)
    }

    pub fn outcome(&self, p: Property) -> Option<&PropertyOutcome> {
        self.outcomes.iter().find(|o| o.property == p)
    }
}

struct SampleResult {
    failures: Vec<(Property, Case, String)>,
    stats: GenerationStats,
}

fn run_sample(cfg: &SuiteConfig, calc: &dyn Calculus, sample: u64) -> Result<SampleResult> {
    let mut failures = Vec::new();
    if cfg.properties.is_empty() {
        return Ok(SampleResult {
            failures,
            stats: GenerationStats::default(),
        });
    }
    let (algebras, stats) = generate_algebras(cfg.seed, sample, &cfg.moduli, None, cfg.max_rank)?;
    for &p in &cfg.properties {
        let case = generate_inputs(cfg.seed, sample, p, &algebras);
        if let Err(msg) = check(p, &case, calc) {
            failures.push((p, case, msg));
        }
    }
    Ok(SampleResult { failures, stats })
}

/// Zeroes input coefficients one at a time while the failure persists.
fn zero_coefficients(p: Property, calc: &dyn Calculus, case: &mut Case) -> usize {
    let mut zeroed = 0;
    loop {
        let mut changed = false;
        for k in 0..case.inputs.len() {
            for e in 0..case.inputs[k].len() {
                if case.inputs[k][e] == 0 || (p == Property::DualBasis && k == 0) {
                    continue;
                }
                let saved = case.inputs[k][e];
                case.inputs[k][e] = 0;
                if check(p, case, calc).is_err() {
                    zeroed += 1;
                    changed = true;
                } else {
                    case.inputs[k][e] = saved;
                }
            }
        }
        if !changed {
            return zeroed;
        }
    }
}

const SHRINK_ATTEMPTS: u64 = 32;

/// Coefficient zeroing, then a search for a failing case of smaller rank
/// over the same modulus, then zeroing again.
pub fn shrink(
    cfg: &SuiteConfig,
    p: Property,
    calc: &dyn Calculus,
    sample: u64,
    mut case: Case,
) -> Counterexample {
    let original_rank = case.max_rank();
    let mut zeroed = zero_coefficients(p, calc, &mut case);
    let m = case.modulus();
    'ranks: for r in 1..case.max_rank() {
        for attempt in 0..SHRINK_ATTEMPTS {
            let stream = (sample << 16) | ((r as u64) << 8) | attempt;
            let Ok((smaller, _)) = generate_case(
                cfg.seed ^ 0x5348_5249_4e4b,
                stream,
                p,
                &cfg.moduli,
                Some(m),
                r,
            ) else {
                continue;
            };
            if check(p, &smaller, calc).is_err() {
                case = smaller;
                zeroed += zero_coefficients(p, calc, &mut case);
                break 'ranks;
            }
        }
    }
    let message = check(p, &case, calc).err().unwrap_or_default();
    Counterexample {
        sample,
        message,
        case,
        original_rank,
        zeroed,
    }
}

/// Runs `count` samples of every selected property, in parallel, merging by
/// sample index so the report is independent of scheduling.
pub fn run_suite(cfg: &SuiteConfig, calc: &dyn Calculus) -> Result<SuiteReport> {
    let results = (0..cfg.count)
        .into_par_iter()
        .map(|s| run_sample(cfg, calc, s))
        .collect::<Result<Vec<_>>>()?;
    let mut generation = GenerationStats::default();
    let mut outcomes: Vec<PropertyOutcome> = cfg
        .properties
        .iter()
        .map(|&property| PropertyOutcome {
            property,
            samples: cfg.count,
            failures: 0,
            counterexample: None,
        })
        .collect();
    for (sample, r) in results.into_iter().enumerate() {
        generation.merge(r.stats);
        for (p, case, _) in r.failures {
            let o = outcomes
                .iter_mut()
                .find(|o| o.property == p)
                .expect("selected");
            o.failures += 1;
            if o.counterexample.is_none() {
                o.counterexample = Some(shrink(cfg, p, calc, sample as u64, case));
            }
        }
    }
    Ok(SuiteReport {
        config: cfg.clone(),
        calculus: calc.name(),
        outcomes,
        generation,
    })
}

/// A random system `A x = b` over `Z/m` small enough to enumerate.
#[derive(Debug, Clone)]
pub struct LinearCase {
    pub a: Matrix,
    pub b: Matrix,
}

fn bits(m: u64) -> u32 {
    64 - (m - 1).leading_zeros()
}

pub fn random_linear_case(rng: &mut impl Rng, moduli: &[u64]) -> Result<LinearCase> {
    let m = Modulus::new(*moduli.choose(rng).ok_or(Error::InvalidModulus(0))?)?;
    let max_cols = (16 / bits(m.get()) as usize).clamp(1, 4);
    let cols = rng.gen_range(1..=max_cols);
    let rows = if rng.gen_bool(0.5) {
        cols
    } else {
        rng.gen_range(1..=4)
    };
    let mv = m.get();
    let a_data: Vec<u64> = (0..rows * cols).map(|_| rng.gen_range(0..mv)).collect();
    let a = Matrix::from_vec(m, rows, cols, a_data)?;
    let b = if rng.gen_bool(0.5) {
        let x: Vec<u64> = (0..cols).map(|_| rng.gen_range(0..mv)).collect();
        a.mul(&Matrix::column_vector(m, &x))?
    } else {
        Matrix::column_vector(
            m,
            &(0..rows).map(|_| rng.gen_range(0..mv)).collect::<Vec<_>>(),
        )
    };
    Ok(LinearCase { a, b })
}

/// First solution of `A x = b` in lexicographic order, by enumeration.
pub fn brute_force_solve(a: &Matrix, b: &[u64]) -> Option<Vec<u64>> {
    let m = a.modulus();
    let cols = a.cols();
    let total = (m.get() as u128).pow(cols as u32);
    let mut x = vec![0u64; cols];
    for code in 0..total {
        let mut c = code;
        for j in (0..cols).rev() {
            x[j] = (c % m.get() as u128) as u64;
            c /= m.get() as u128;
        }
        let ok = (0..a.rows()).all(|i| {
            let mut acc = 0;
            for (j, &xj) in x.iter().enumerate() {
                acc = m.add(acc, m.mul(a.get(i, j), xj));
            }
            acc == b[i]
        });
        if ok {
            return Some(x);
        }
    }
    None
}

/// Checks `solve` (and `inverse` on square systems) against enumeration.
pub fn check_linear_case(case: &LinearCase) -> std::result::Result<(), String> {
    let (a, b) = (&case.a, &case.b);
    let brute = brute_force_solve(a, &b.column(0));
    let solved = a.solve(b).map_err(|e| e.to_string())?;
    match (&solved, &brute) {
        (Some(x), Some(bx)) => {
            if &a.mul(x).map_err(|e| e.to_string())? != b {
                return Err(format!("solve returned a non-solution for A = {a}"));
            }
            if &x.column(0) != bx {
                return Err(format!(
                    "solve returned {:?}, lexicographically first is {bx:?}",
                    x.column(0)
                ));
            }
        }
        (None, None) => {}
        (Some(_), None) => return Err("solve found a solution enumeration does not".into()),
        (None, Some(bx)) => return Err(format!("solve missed the solution {bx:?}")),
    }
    if a.is_square() {
        let n = a.rows();
        let m = a.modulus();
        let brute_invertible = (0..n).all(|j| {
            let mut e = vec![0; n];
            e[j] = 1;
            brute_force_solve(a, &e).is_some()
        });
        match a.inverse() {
            Ok(inv) => {
                let id = Matrix::identity(m, n);
                if a.mul(&inv).ok() != Some(id.clone()) || inv.mul(a).ok() != Some(id) {
                    return Err("inverse is not two-sided".into());
                }
                if inv.inverse().ok().as_ref() != Some(a) {
                    return Err("inverse is not an involution".into());
                }
                if !brute_invertible {
                    return Err("inverse returned for a singular matrix".into());
                }
            }
            Err(Error::NotInvertible(_)) => {
                if brute_invertible {
                    return Err("NotInvertible for an invertible matrix".into());
                }
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct LinearOutcome {
    pub samples: u64,
    pub failures: u64,
    pub first_failure: Option<(u64, LinearCase, String)>,
}

pub fn run_linear_suite(seed: u64, count: u64, moduli: &[u64]) -> Result<LinearOutcome> {
    let results = (0..count)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream_rng(seed, s * 64 + ALGEBRA_SLOT - 1);
            random_linear_case(&mut rng, moduli).map(|c| {
                let r = check_linear_case(&c);
                (s, c, r)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = LinearOutcome {
        samples: count,
        failures: 0,
        first_failure: None,
    };
    for (s, c, r) in results {
        if let Err(msg) = r {
            out.failures += 1;
            if out.first_failure.is_none() {
                out.first_failure = Some((s, c, msg));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_are_symmetric_and_bounded() {
        let ps = rank_profiles(4);
        assert!(ps.contains(&vec![1]));
        assert!(ps.contains(&vec![1, 1]));
        assert!(ps.contains(&vec![1, 2, 1]));
        assert!(ps.contains(&vec![1, 1, 1, 1]));
        for p in &ps {
            let d = p.len() - 1;
            assert!((0..=d).all(|k| p[k] == p[d - k]));
            assert!(p.iter().sum::<usize>() <= 4);
        }
    }

    #[test]
    fn generated_algebras_are_valid() {
        let mut rng = stream_rng(7, 0);
        for m in DEFAULT_MODULI {
            for _ in 0..20 {
                let (a, _) = random_algebra(&mut rng, Modulus::new(m).unwrap(), 4);
                assert!(a.is_valid(), "{:?}", a.validate());
            }
        }
    }

    #[test]
    fn fast_validity_agrees_with_validate() {
        let mut rng = stream_rng(9, 1);
        let profiles = rank_profiles(4);
        for m in DEFAULT_MODULI {
            for p in &profiles {
                for _ in 0..10 {
                    let a = random_table(&mut rng, Modulus::new(m).unwrap(), p);
                    assert_eq!(a.is_valid(), a.validate().is_empty());
                    let broken = a.with_structure_constant(0, 1 % a.rank(), 0, 1);
                    assert_eq!(broken.is_valid(), broken.validate().is_empty());
                }
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let (a, _) = generate_case(11, 5, Property::Rule3, &DEFAULT_MODULI, None, 4).unwrap();
        let (b, _) = generate_case(11, 5, Property::Rule3, &DEFAULT_MODULI, None, 4).unwrap();
        assert_eq!(a.x, b.x);
        assert_eq!(a.inputs, b.inputs);
    }

    #[test]
    fn exact_engine_passes_a_small_suite() {
        let report = run_suite(&SuiteConfig::new(3, 40), &Exact).unwrap();
        for o in &report.outcomes {
            assert!(
                o.passed(),
                "{}: {:?}",
                o.property,
                o.counterexample.as_ref().map(|c| &c.message)
            );
        }
    }

    #[test]
    fn zero_count_is_an_empty_pass() {
        let report = run_suite(&SuiteConfig::new(1, 0), &Exact).unwrap();
        assert!(report.all_pass());
        assert!(report.outcomes.iter().all(|o| o.samples == 0));
    }

    #[test]
    fn linear_suite_small() {
        let out = run_linear_suite(2, 50, &DEFAULT_MODULI).unwrap();
        assert_eq!(out.failures, 0, "{:?}", out.first_failure);
    }

    #[test]
    fn mutation_names_round_trip() {
        for m in Mutation::ALL {
            assert_eq!(m.name().parse::<Mutation>().unwrap(), m);
        }
    }
}
