//! Dense complex matrices, pure states and unitary representations.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::character::linear_characters;
use crate::error::{Error, Result};
use crate::group::{close_under, FiniteGroup, DEFAULT_SIZE_CAP};
use crate::numeric::TOL;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// `e^{iθ}`.
pub fn cis(theta: f64) -> C64 {
    C64::from_polar(1.0, theta)
}

/// A dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| {
                    let z = self[(r, c)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(ComplexMatrix { rows: r, cols: c, data: rows.concat() })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_fn(2, 2, |r, c| if r != c { ONE } else { ZERO })
    }

    pub fn pauli_y() -> Self {
        let mut m = Self::zeros(2, 2);
        m[(0, 1)] = -I;
        m[(1, 0)] = I;
        m
    }

    pub fn pauli_z() -> Self {
        Self::diag(&[ONE, -ONE])
    }

    /// The permutation matrix with `P e_j = e_{perm[j]}`.
    pub fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = Self::zeros(n, n);
        for (j, &i) in perm.iter().enumerate() {
            m[(i, j)] = ONE;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(C64::conj).collect() }
    }

    pub fn scale(&self, z: C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * z).collect() }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.data[k * other.cols + c];
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let (r2, c2) = other.dims();
        Self::from_fn(self.rows * r2, self.cols * c2, |r, c| self[(r / r2, c / c2)] * other[(r % r2, c % c2)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(C64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dims() != other.dims() {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Elementwise equality within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }

    /// `‖U†U − 1‖_max`, or infinity for non-square input.
    pub fn unitarity_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        (&self.dagger() * self).max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        let residual = self.unitarity_residual();
        if residual <= tol {
            Ok(())
        } else {
            Err(Error::NotUnitary { residual })
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        (0..self.rows).map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    /// If `self = λ·other` within tolerance, returns `λ`.
    ///
    /// Uses the projection `λ = Tr(other† self) / Tr(other† other)` and
    /// checks the Frobenius residual against `tol·dim`.
    pub fn scalar_multiple_of(&self, other: &Self, tol: f64) -> Option<C64> {
        if self.dims() != other.dims() {
            return None;
        }
        let denom = trace_inner(other, other).ok()?.re;
        if denom <= 0.0 {
            return None;
        }
        let lambda = trace_inner(other, self).ok()? / denom;
        let residual = (self - &other.scale(lambda)).frobenius_norm();
        (residual < tol * self.rows.max(1) as f64).then_some(lambda)
    }

    pub fn determinant(&self) -> C64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm())).unwrap();
            if a[(pivot, col)].norm() == 0.0 {
                return ZERO;
            }
            if pivot != col {
                for c in 0..n {
                    a.data.swap(pivot * n + c, col * n + c);
                }
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in col + 1..n {
                let f = a[(r, col)] / p;
                if f != ZERO {
                    for c in col..n {
                        let v = a[(col, c)];
                        a[(r, c)] -= f * v;
                    }
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse with partial pivoting.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.frobenius_norm().max(1e-300);
        for col in 0..n {
            let pivot = (col..n).max_by(|&i, &j| a[(i, col)].norm().total_cmp(&a[(j, col)].norm()))?;
            if a[(pivot, col)].norm() < 1e-13 * scale {
                return None;
            }
            if pivot != col {
                for c in 0..n {
                    a.data.swap(pivot * n + c, col * n + c);
                    inv.data.swap(pivot * n + c, col * n + c);
                }
            }
            let p = a[(col, col)].inv();
            for c in 0..n {
                a[(col, c)] *= p;
                inv[(col, c)] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == ZERO {
                    continue;
                }
                for c in 0..n {
                    let (ac, ic) = (a[(col, c)], inv[(col, c)]);
                    a[(r, c)] -= f * ac;
                    inv[(r, c)] -= f * ic;
                }
            }
        }
        Some(inv)
    }

    /// Unitary factor of the polar decomposition, by the Newton iteration
    /// `X ← (X + X^{-†}) / 2`. Returns `None` for singular input.
    pub fn polar_unitary(&self) -> Option<Self> {
        let mut x = self.clone();
        for _ in 0..100 {
            let next = (&x + &x.inverse()?.dagger()).scale(C64::new(0.5, 0.0));
            let delta = next.max_abs_diff(&x);
            x = next;
            if delta < 1e-15 {
                break;
            }
        }
        x.is_unitary(1e-10).then_some(x)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix dimensions agree")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dims(), rhs.dims());
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dims(), rhs.dims());
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// `Tr(A† B)`.
pub fn trace_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.dims(), b.dims())));
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dims: [usize; 2],
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let part = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..self.rows).map(|r| self.row(r).iter().map(f).collect()).collect()
        };
        MatrixJson { dims: [self.rows, self.cols], re: part(|z| z.re), im: part(|z| z.im) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MatrixJson::deserialize(d)?;
        let [r, c] = raw.dims;
        let shape_ok = |m: &Vec<Vec<f64>>| m.len() == r && m.iter().all(|row| row.len() == c);
        if !shape_ok(&raw.re) || !shape_ok(&raw.im) {
            return Err(D::Error::custom("matrix entries do not match dims"));
        }
        let m = ComplexMatrix::from_fn(r, c, |i, j| C64::new(raw.re[i][j], raw.im[i][j]));
        if m.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(D::Error::custom("non-finite matrix entry"));
        }
        Ok(m)
    }
}

/// A normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    /// Rejects vectors whose norm differs from 1 by more than `TOL`.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > TOL {
            return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
        }
        Ok(PureState { amps })
    }

    /// Normalizes a nonzero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let norm = amps.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::InvalidInput("cannot normalize the zero vector".into()));
        }
        Ok(PureState { amps: amps.into_iter().map(|z| z / norm).collect() })
    }

    pub fn basis(n: usize, k: usize) -> Self {
        let mut amps = vec![ZERO; n];
        amps[k] = ONE;
        PureState { amps }
    }

    /// Haar-random state from Gaussian amplitudes.
    pub fn random(n: usize, rng: &mut impl rand::Rng) -> Self {
        loop {
            let amps: Vec<C64> = (0..n).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect();
            if let Ok(s) = Self::normalized(amps) {
                return s;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        PureState { amps: u.apply(&self.amps) }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |r, c| self.amps[r] * self.amps[c].conj())
    }

    /// Reduced density matrix of the first factor of a bipartite state on
    /// `C^a ⊗ C^b`.
    pub fn reduced_first(&self, a: usize, b: usize) -> Result<ComplexMatrix> {
        if a * b != self.dim() {
            return Err(Error::DimensionMismatch(format!("{a}x{b} vs {}", self.dim())));
        }
        Ok(ComplexMatrix::from_fn(a, a, |i, j| {
            (0..b).map(|k| self.amps[i * b + k] * self.amps[j * b + k].conj()).sum()
        }))
    }
}

pub(crate) fn gaussian(rng: &mut impl rand::Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Haar-random unitary via Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut impl rand::Rng) -> ComplexMatrix {
    let cols: Vec<Vec<C64>> =
        (0..n).map(|_| (0..n).map(|_| C64::new(gaussian(rng), gaussian(rng))).collect()).collect();
    let q = gram_schmidt(&cols, 1e-12);
    ComplexMatrix::from_fn(n, n, |r, c| q[c][r])
}

/// Orthonormalizes vectors, dropping those that are numerically dependent.
pub fn gram_schmidt(vectors: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let c: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let norm = w.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if norm > tol {
            basis.push(w.into_iter().map(|z| z / norm).collect());
        }
    }
    basis
}

/// `(1/√n) Σ |ii⟩`.
pub fn bell_state(n: usize) -> PureState {
    let s = 1.0 / (n as f64).sqrt();
    let mut amps = vec![ZERO; n * n];
    for i in 0..n {
        amps[i * n + i] = C64::new(s, 0.0);
    }
    PureState { amps }
}

/// `(1 ⊗ X)|η⟩`.
pub fn twisted_bell(x: &ComplexMatrix) -> Result<PureState> {
    x.ensure_unitary(TOL)?;
    let n = x.rows();
    Ok(bell_state(n).evolve(&ComplexMatrix::identity(n).tensor(x)))
}

/// A unitary representation, stored as one matrix per group element.
#[derive(Debug, Clone)]
pub struct Representation {
    group: FiniteGroup,
    images: Vec<ComplexMatrix>,
    dim: usize,
}

impl Representation {
    /// Validates unitarity and the homomorphism property exhaustively.
    pub fn new(group: FiniteGroup, images: Vec<ComplexMatrix>) -> Result<Self> {
        if images.len() != group.order() {
            return Err(Error::NotARepresentation(format!(
                "{} images for a group of order {}",
                images.len(),
                group.order()
            )));
        }
        let dim = images[0].rows();
        for (g, m) in images.iter().enumerate() {
            if m.dims() != (dim, dim) {
                return Err(Error::DimensionMismatch(format!("image of {} is not {dim}x{dim}", group.label(g))));
            }
            m.ensure_unitary(TOL)
                .map_err(|e| Error::NotARepresentation(format!("image of {}: {e}", group.label(g))))?;
        }
        if !images[group.identity()].approx_eq(&ComplexMatrix::identity(dim), TOL) {
            return Err(Error::NotARepresentation("identity does not map to 1".into()));
        }
        for g in group.elements() {
            for h in group.elements() {
                let prod = &images[g] * &images[h];
                if !prod.approx_eq(&images[group.mul(g, h)], TOL) {
                    return Err(Error::NotARepresentation(format!(
                        "ρ({})ρ({}) ≠ ρ({})",
                        group.label(g),
                        group.label(h),
                        group.label(group.mul(g, h))
                    )));
                }
            }
        }
        Ok(Representation { group, images, dim })
    }

    /// Extends images of the group's stored generators.
    pub fn from_generators(group: FiniteGroup, gen_images: &[ComplexMatrix]) -> Result<Self> {
        let dim = gen_images
            .first()
            .map(ComplexMatrix::rows)
            .ok_or_else(|| Error::NotARepresentation("no generator images".into()))?;
        let images = group
            .extend_homomorphism(gen_images, ComplexMatrix::identity(dim), |a, b| a * b, |a, b| a.approx_eq(b, TOL))
            .ok_or_else(|| Error::NotARepresentation("generator images violate a relation".into()))?;
        Self::new(group, images)
    }

    pub fn trivial(group: FiniteGroup, dim: usize) -> Self {
        let images = vec![ComplexMatrix::identity(dim); group.order()];
        Representation { group, images, dim }
    }

    /// The natural permutation representation of a permutation group.
    pub fn natural(group: FiniteGroup) -> Result<Self> {
        let perms = group
            .permutations()
            .ok_or_else(|| Error::InvalidInput(format!("{} is not a permutation group", group.name())))?;
        let images = perms.iter().map(|p| ComplexMatrix::permutation(p.images())).collect();
        Self::new(group, images)
    }

    /// A one-dimensional representation from its values.
    pub fn one_dim(group: FiniteGroup, values: &[C64]) -> Result<Self> {
        let images = values.iter().map(|&z| ComplexMatrix::diag(&[z])).collect();
        Self::new(group, images)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn image(&self, g: usize) -> &ComplexMatrix {
        &self.images[g]
    }

    pub fn images(&self) -> &[ComplexMatrix] {
        &self.images
    }

    /// `ρ*`: entrywise complex conjugate.
    pub fn dual(&self) -> Self {
        Representation {
            group: self.group.clone(),
            images: self.images.iter().map(ComplexMatrix::conj).collect(),
            dim: self.dim,
        }
    }

    /// `ρ ⊗ σ` over the same group.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.group.table() != other.group.table() {
            return Err(Error::GroupMismatch(self.group.name().into(), other.group.name().into()));
        }
        Ok(Representation {
            group: self.group.clone(),
            images: self.images.iter().zip(&other.images).map(|(a, b)| a.tensor(b)).collect(),
            dim: self.dim * other.dim,
        })
    }

    /// `g ↦ Tr ρ(g)`.
    pub fn character(&self) -> Vec<C64> {
        self.images.iter().map(ComplexMatrix::trace).collect()
    }

    /// `{"group": …, "images": […]}`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "group": self.group, "images": self.images })
    }

    /// Accepts either explicit images for every element or `generator_images`
    /// for the group's stored generators.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let group: FiniteGroup = serde_json::from_value(
            value.get("group").cloned().ok_or_else(|| Error::InvalidInput("missing `group`".into()))?,
        )?;
        if let Some(images) = value.get("images") {
            let images: Vec<ComplexMatrix> = serde_json::from_value(images.clone())?;
            return Self::new(group, images);
        }
        if let Some(gens) = value.get("generator_images") {
            let gens: Vec<ComplexMatrix> = serde_json::from_value(gens.clone())?;
            return Self::from_generators(group, &gens);
        }
        Err(Error::InvalidInput("expected `images` or `generator_images`".into()))
    }

    /// Same images relabeled over an isomorphic copy of the group.
    pub fn with_group(&self, group: FiniteGroup) -> Result<Self> {
        if group.table() != self.group.table() {
            return Err(Error::GroupMismatch(self.group.name().into(), group.name().into()));
        }
        Ok(Representation { group, images: self.images.clone(), dim: self.dim })
    }
}

/// A finite matrix group generated by unitaries, returned as an abstract
/// group with its defining representation. Element labels are shortest
/// words in `names`.
pub fn matrix_group(name: &str, gens: &[ComplexMatrix], names: &[&str]) -> Result<Representation> {
    let dim = gens.first().map(ComplexMatrix::rows).ok_or_else(|| Error::InvalidInput("no generators".into()))?;
    let (elems, table, gen_idx) =
        close_under(ComplexMatrix::identity(dim), gens, |a, b| a * b, |a, b| a.approx_eq(b, 1e-8), DEFAULT_SIZE_CAP)?;
    let placeholder = (0..elems.len()).map(|i| i.to_string()).collect();
    let group = FiniteGroup::from_table(name, placeholder, table, Some(gen_idx))?;
    let labels = group.word_labels(names);
    let group = group.relabeled(name, labels)?;
    Representation::new(group, elems)
}

/// If `ρB(g) V ρA(g)ᵀ = θ(g) V` for every `g` with `|θ(g)| = 1` and `θ` a
/// homomorphism, returns `θ` as a list of values indexed by element.
pub fn invariance_phase_system(
    rho_a: &Representation,
    rho_b: &Representation,
    v: &ComplexMatrix,
) -> Result<Option<Vec<C64>>> {
    if rho_a.group.table() != rho_b.group.table() {
        return Err(Error::GroupMismatch(rho_a.group.name().into(), rho_b.group.name().into()));
    }
    if v.dims() != (rho_b.dim, rho_a.dim) {
        return Err(Error::DimensionMismatch(format!("V is {:?}, reps are {} and {}", v.dims(), rho_a.dim, rho_b.dim)));
    }
    let g = &rho_a.group;
    let mut theta = Vec::with_capacity(g.order());
    for x in g.elements() {
        let m = &(rho_b.image(x) * v) * &rho_a.image(x).transpose();
        match m.scalar_multiple_of(v, TOL) {
            Some(z) if (z.norm() - 1.0).abs() < TOL => theta.push(z),
            _ => return Ok(None),
        }
    }
    let homomorphic =
        g.elements().all(|x| g.elements().all(|y| (theta[x] * theta[y] - theta[g.mul(x, y)]).norm() < TOL));
    Ok(homomorphic.then_some(theta))
}

/// Searches for a unitary `V` and a one-dimensional character `θ` with
/// `ρB(g) V ρA(g)ᵀ = θ(g) V`.
///
/// For each linear character the fixed space of the twisted averaging
/// operator is computed; an invertible element of it is replaced by its
/// unitary polar factor, which stays inside the fixed space.
pub fn invariant_entangled_state(
    rho_a: &Representation,
    rho_b: &Representation,
) -> Result<Option<(ComplexMatrix, Vec<C64>)>> {
    if rho_a.dim != rho_b.dim {
        return Err(Error::DimensionMismatch(format!("{} vs {}", rho_a.dim, rho_b.dim)));
    }
    if rho_a.group.table() != rho_b.group.table() {
        return Err(Error::GroupMismatch(rho_a.group.name().into(), rho_b.group.name().into()));
    }
    let group = &rho_a.group;
    let n = rho_a.dim;
    let order = group.order() as f64;
    for chi in linear_characters(group) {
        let theta = chi.values();
        let project = |v: &ComplexMatrix| {
            let mut acc = ComplexMatrix::zeros(n, n);
            for g in group.elements() {
                let term = &(rho_b.image(g) * v) * &rho_a.image(g).transpose();
                acc = &acc + &term.scale(theta[g].conj() / order);
            }
            acc
        };
        let images: Vec<Vec<C64>> = (0..n * n)
            .map(|k| {
                let mut e = ComplexMatrix::zeros(n, n);
                e[(k / n, k % n)] = ONE;
                project(&e).data
            })
            .collect();
        let basis = gram_schmidt(&images, 1e-8);
        if basis.is_empty() {
            continue;
        }
        // Deterministic pseudo-random combinations; a generic element of a
        // space containing an invertible matrix is invertible.
        for attempt in 0..8u32 {
            let coeffs: Vec<C64> = (0..basis.len())
                .map(|k| {
                    if attempt == 0 {
                        return ONE;
                    }
                    let t = 1.0 + k as f64 * 0.754_877_666 + attempt as f64 * 0.569_840_290;
                    cis(t * 2.399_963_229)
                })
                .collect();
            let mut data = vec![ZERO; n * n];
            for (c, b) in coeffs.iter().zip(&basis) {
                for (d, x) in data.iter_mut().zip(b) {
                    *d += c * x;
                }
            }
            let candidate = ComplexMatrix { rows: n, cols: n, data };
            if candidate.determinant().norm() < 1e-8 {
                continue;
            }
            let Some(u) = candidate.polar_unitary() else {
                continue;
            };
            if let Some(found) = invariance_phase_system(rho_a, rho_b, &u)? {
                return Ok(Some((u, found)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::preset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn omega() -> C64 {
        cis(2.0 * std::f64::consts::PI / 3.0)
    }

    fn z3_rep() -> Representation {
        let g = preset("Z3").unwrap();
        Representation::from_generators(g, &[ComplexMatrix::diag(&[ONE, omega()])]).unwrap()
    }

    #[test]
    fn pauli_trace_inner() {
        let x = ComplexMatrix::pauli_x();
        let z = ComplexMatrix::pauli_z();
        assert!((trace_inner(&x, &x).unwrap() - 2.0).norm() < 1e-15);
        assert!(trace_inner(&x, &z).unwrap().norm() < 1e-15);
        assert!(trace_inner(&x, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn tensor_and_dagger() {
        let x = ComplexMatrix::pauli_x();
        let y = ComplexMatrix::pauli_y();
        let xy = x.tensor(&y);
        assert_eq!(xy.dims(), (4, 4));
        assert!(xy.dagger().approx_eq(&x.dagger().tensor(&y.dagger()), 1e-15));
        assert!((&x * &y).approx_eq(&ComplexMatrix::pauli_z().scale(I), 1e-15));
    }

    #[test]
    fn bell_states() {
        let eta = bell_state(2);
        let s = 1.0 / 2f64.sqrt();
        assert!((eta.amplitudes()[0].re - s).abs() < 1e-15 && (eta.amplitudes()[3].re - s).abs() < 1e-15);
        let tw = twisted_bell(&ComplexMatrix::pauli_x()).unwrap();
        assert!((tw.amplitudes()[1].re - s).abs() < 1e-15 && (tw.amplitudes()[2].re - s).abs() < 1e-15);
        let rho = tw.reduced_first(2, 2).unwrap();
        assert!(rho.approx_eq(&ComplexMatrix::identity(2).scale(C64::new(0.5, 0.0)), 1e-12));
        assert!(twisted_bell(&ComplexMatrix::diag(&[ONE, C64::new(2.0, 0.0)])).is_err());
    }

    #[test]
    fn dual_rep_conjugates() {
        let rho = z3_rep();
        let dual = rho.dual();
        let a = rho.group().generators()[0];
        assert!(dual.image(a).approx_eq(&ComplexMatrix::diag(&[ONE, omega().conj()]), 1e-12));
        Representation::new(dual.group().clone(), dual.images().to_vec()).unwrap();
        let back = dual.dual();
        for g in rho.group().elements() {
            assert!(back.image(g).approx_eq(rho.image(g), 0.0));
        }
    }

    #[test]
    fn bad_generator_images_are_rejected() {
        let g = preset("Z3").unwrap();
        let bad = ComplexMatrix::diag(&[ONE, I]);
        assert!(Representation::from_generators(g, &[bad]).is_err());
    }

    #[test]
    fn z3_phase_system_with_pauli_x() {
        let rho = z3_rep();
        let theta = invariance_phase_system(&rho, &rho, &ComplexMatrix::pauli_x()).unwrap().unwrap();
        let a = rho.group().generators()[0];
        assert!((theta[a] - omega()).norm() < 1e-12);
        let triv = Representation::trivial(rho.group().clone(), 2);
        let t = invariance_phase_system(&triv, &triv, &ComplexMatrix::identity(2)).unwrap().unwrap();
        assert!(t.iter().all(|z| (z - ONE).norm() < 1e-12));
    }

    #[test]
    fn z2_sign_rep_with_identity() {
        let g = preset("Z2").unwrap();
        let rho = Representation::from_generators(g, &[ComplexMatrix::diag(&[ONE, -ONE])]).unwrap();
        let t = invariance_phase_system(&rho, &rho, &ComplexMatrix::identity(2)).unwrap().unwrap();
        assert!(t.iter().all(|z| (z - ONE).norm() < 1e-12));
    }

    #[test]
    fn invariant_state_search() {
        let rho = z3_rep();
        let (v, theta) = invariant_entangled_state(&rho, &rho).unwrap().unwrap();
        let a = rho.group().generators()[0];
        assert!((theta[a] - omega()).norm() < 1e-9);
        // The fixed space is spanned by the two off-diagonal units.
        assert!(v.approx_eq(&ComplexMatrix::pauli_x(), 1e-9));

        let (v, theta) = invariant_entangled_state(&rho.dual(), &rho).unwrap().unwrap();
        assert!(v.is_unitary(1e-9));
        assert!(theta.iter().all(|z| (z - ONE).norm() < 1e-9));

        let triv = Representation::trivial(rho.group().clone(), 2);
        assert!(invariant_entangled_state(&triv, &rho).unwrap().is_none());
    }

    #[test]
    fn invariant_state_for_s3_natural_rep() {
        let rho = Representation::natural(preset("S3").unwrap()).unwrap();
        let (v, theta) = invariant_entangled_state(&rho.dual(), &rho).unwrap().unwrap();
        assert!(invariance_phase_system(&rho.dual(), &rho, &v).unwrap().is_some());
        assert_eq!(theta.len(), 6);
    }

    #[test]
    fn inverse_and_polar() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unitary(4, &mut rng);
        assert!(u.is_unitary(1e-12));
        let inv = u.inverse().unwrap();
        assert!(inv.approx_eq(&u.dagger(), 1e-12));
        let p = ComplexMatrix::diag(&[C64::new(2.0, 0.0), C64::new(0.5, 0.0), ONE, C64::new(3.0, 0.0)]);
        let polar = (&u * &p).polar_unitary().unwrap();
        assert!(polar.approx_eq(&u, 1e-10));
        assert!(ComplexMatrix::zeros(2, 2).inverse().is_none());
        assert!((ComplexMatrix::pauli_x().determinant() + ONE).norm() < 1e-15);
    }

    #[test]
    fn matrix_json_roundtrip() {
        let m = ComplexMatrix::pauli_y();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"dims\":[2,2]"));
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"dims":[2,2],"re":[[1]],"im":[[0]]}"#).is_err());
    }

    #[test]
    fn binary_tetrahedral_closure() {
        let s = 0.5;
        let a =
            ComplexMatrix::from_rows(&[vec![C64::new(s, -s), C64::new(-s, -s)], vec![C64::new(s, -s), C64::new(s, s)]])
                .unwrap();
        let rep = matrix_group("2T", &[a, ComplexMatrix::pauli_x().scale(I)], &["a", "b"]).unwrap();
        assert_eq!(rep.group().order(), 24);
        assert_eq!(rep.group().label(0), "e");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn trace_inner_is_hermitian_and_positive(seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut random = || {
                    let rows: Vec<Vec<C64>> = (0..3)
                        .map(|_| (0..3).map(|_| C64::new(gaussian(&mut rng), gaussian(&mut rng))).collect())
                        .collect();
                    ComplexMatrix::from_rows(&rows).unwrap()
                };
                let a = random();
                let b = random();
                let ab = trace_inner(&a, &b).unwrap();
                let ba = trace_inner(&b, &a).unwrap();
                prop_assert!((ab - ba.conj()).norm() < 1e-12);
                let aa = trace_inner(&a, &a).unwrap();
                prop_assert!(aa.re > 0.0 && aa.im.abs() < 1e-12);
            }
        }
    }
}
