//! Exact characters of finite groups and the monomial decomposition test.
//!
//! Values live in the cyclotomic ring `Z[ζ_N]` where `N` is the exponent of
//! the group, stored as integer coefficient vectors reduced modulo the
//! cyclotomic polynomial `Φ_N`. Induction from linear characters only needs
//! ring operations, so everything here is exact.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::{closure_of, conjugacy_classes_of_subgroups, gcd, FiniteGroup, Subgroup};
use crate::unitary::{cis, Representation, C64};

// ---------------------------------------------------------------------------
// Cyclotomic integers

struct CyclotomicData {
    degree: usize,
    /// Reduced form of `x^k` for `k` in `0..n`.
    powers: Vec<Vec<i64>>,
    phi: Vec<i64>,
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let lead = *den.last().unwrap();
    let mut q = vec![0i64; num.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd] / lead;
        q[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

fn cyclotomic_poly(n: usize, cache: &mut HashMap<usize, Vec<i64>>) -> Vec<i64> {
    if let Some(p) = cache.get(&n) {
        return p.clone();
    }
    let mut num = vec![0i64; n + 1];
    num[0] = -1;
    num[n] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            let pd = cyclotomic_poly(d, cache);
            num = poly_div_exact(&num, &pd);
        }
    }
    cache.insert(n, num.clone());
    num
}

fn reduce(mut p: Vec<i64>, phi: &[i64]) -> Vec<i64> {
    let d = phi.len() - 1;
    for i in (d..p.len()).rev() {
        let c = p[i];
        if c != 0 {
            for (j, &f) in phi.iter().enumerate() {
                p[i - d + j] -= c * f;
            }
        }
    }
    p.truncate(d);
    p.resize(d, 0);
    p
}

fn data(n: usize) -> Arc<CyclotomicData> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<CyclotomicData>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(d) = guard.get(&n) {
        return d.clone();
    }
    let phi = cyclotomic_poly(n, &mut HashMap::new());
    let degree = phi.len() - 1;
    let powers = (0..n)
        .map(|k| {
            let mut p = vec![0i64; k + 1];
            p[k] = 1;
            reduce(p, &phi)
        })
        .collect();
    let d = Arc::new(CyclotomicData { degree, powers, phi });
    guard.insert(n, d.clone());
    d
}

/// An element of `Z[ζ_n]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Cyclotomic {
    n: usize,
    coeffs: Vec<i64>,
}

impl Cyclotomic {
    pub fn zero(n: usize) -> Self {
        Cyclotomic { n, coeffs: vec![0; data(n).degree] }
    }

    pub fn integer(n: usize, k: i64) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[0] = k;
        z
    }

    /// `ζ_n^k`.
    pub fn root(n: usize, k: i64) -> Self {
        let d = data(n);
        Cyclotomic { n, coeffs: d.powers[k.rem_euclid(n as i64) as usize].clone() }
    }

    pub fn modulus(&self) -> usize {
        self.n
    }

    fn from_power_sum(n: usize, terms: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let d = data(n);
        let mut coeffs = vec![0i64; d.degree];
        for (k, c) in terms {
            if c != 0 {
                for (a, b) in coeffs.iter_mut().zip(&d.powers[k % n]) {
                    *a += c * b;
                }
            }
        }
        Cyclotomic { n, coeffs }
    }

    /// Image under the Galois automorphism `ζ ↦ ζ^k`, `gcd(k, n) = 1`.
    pub fn galois(&self, k: usize) -> Self {
        Self::from_power_sum(self.n, self.coeffs.iter().enumerate().map(|(i, &c)| (i * k, c)))
    }

    /// Complex conjugation `ζ ↦ ζ⁻¹`.
    pub fn conj(&self) -> Self {
        self.galois(self.n - 1)
    }

    pub fn to_complex(&self) -> C64 {
        self.coeffs.iter().enumerate().map(|(i, &c)| cis(2.0 * PI * i as f64 / self.n as f64) * c as f64).sum()
    }

    /// `Some(k)` when the value is the rational integer `k`.
    pub fn as_integer(&self) -> Option<i64> {
        self.coeffs[1..].iter().all(|&c| c == 0).then_some(self.coeffs[0])
    }

    pub fn is_rational(&self) -> bool {
        self.as_integer().is_some()
    }

    /// `√5 = 1 + 2(ζ5 + ζ5⁴)`; requires `5 | n`.
    pub fn sqrt5(n: usize) -> Option<Self> {
        if !n.is_multiple_of(5) {
            return None;
        }
        let k = n / 5;
        Some(Self::from_power_sum(n, [(0, 1), (k, 2), (4 * k, 2)]))
    }

    /// Exact `p + q√5` form when the value lies in `Q(√5)`.
    pub fn to_quadratic(&self) -> Option<QuadraticScalar> {
        if let Some(k) = self.as_integer() {
            return Some(QuadraticScalar::integer(k));
        }
        let s = Self::sqrt5(self.n)?;
        // A Galois element flipping the sign of √5.
        let k = (2..self.n).find(|&k| gcd(k, self.n) == 1 && matches!(k % 5, 2 | 3))?;
        let x1 = self.to_complex();
        let x2 = self.galois(k).to_complex();
        if x1.im.abs() > 1e-9 || x2.im.abs() > 1e-9 {
            return None;
        }
        let a = (x1.re + x2.re).round() as i64;
        let b = ((x1.re - x2.re) / 5f64.sqrt()).round() as i64;
        let twice = self.clone() + self.clone();
        let candidate = Self::integer(self.n, a) + s * Self::integer(self.n, b);
        (twice == candidate).then(|| QuadraticScalar::new(Ratio::new(a, 2), Ratio::new(b, 2)))
    }

    /// Lifts into a larger ring `Z[ζ_m]` with `n | m`.
    pub fn lift(&self, m: usize) -> Result<Self> {
        if !m.is_multiple_of(self.n) {
            return Err(Error::InvalidInput(format!("cannot embed Z[ζ_{}] in Z[ζ_{m}]", self.n)));
        }
        let f = m / self.n;
        Ok(Self::from_power_sum(m, self.coeffs.iter().enumerate().map(|(i, &c)| (i * f, c))))
    }
}

impl Add for Cyclotomic {
    type Output = Cyclotomic;
    fn add(mut self, rhs: Cyclotomic) -> Cyclotomic {
        assert_eq!(self.n, rhs.n, "cyclotomic moduli differ");
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl Sub for Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: Cyclotomic) -> Cyclotomic {
        self + (-rhs)
    }
}

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(mut self) -> Cyclotomic {
        for a in &mut self.coeffs {
            *a = -*a;
        }
        self
    }
}

impl Mul for Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: Cyclotomic) -> Cyclotomic {
        assert_eq!(self.n, rhs.n, "cyclotomic moduli differ");
        let d = data(self.n);
        let mut prod = vec![0i64; 2 * d.degree];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                prod[i + j] += a * b;
            }
        }
        Cyclotomic { n: self.n, coeffs: reduce(prod, &d.phi) }
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(q) = self.to_quadratic() {
            return write!(f, "{q}");
        }
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            match (i, c) {
                (_, 0) => {}
                (0, c) => terms.push(c.to_string()),
                (i, 1) => terms.push(format!("z{}^{i}", self.n)),
                (i, c) => terms.push(format!("{c}*z{}^{i}", self.n)),
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl Serialize for Cyclotomic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

// ---------------------------------------------------------------------------
// Q(√5)

/// `p + q√5` with rational `p`, `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadraticScalar {
    pub p: Ratio<i64>,
    pub q: Ratio<i64>,
}

impl QuadraticScalar {
    pub fn new(p: Ratio<i64>, q: Ratio<i64>) -> Self {
        QuadraticScalar { p, q }
    }

    pub fn integer(k: i64) -> Self {
        Self::new(Ratio::from_integer(k), Ratio::from_integer(0))
    }

    /// `(a + b√5) / d`.
    pub fn from_parts(a: i64, b: i64, d: i64) -> Self {
        Self::new(Ratio::new(a, d), Ratio::new(b, d))
    }

    /// `√5 ↦ −√5`.
    pub fn conj(&self) -> Self {
        Self::new(self.p, -self.q)
    }

    pub fn is_rational(&self) -> bool {
        self.q == Ratio::from_integer(0)
    }

    pub fn to_f64(&self) -> f64 {
        let f = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
        f(self.p) + f(self.q) * 5f64.sqrt()
    }

    /// Embeds into `Z[ζ_n]`; fails unless `5 | n` (for irrational values)
    /// and the value is an algebraic integer.
    pub fn to_cyclotomic(&self, n: usize) -> Result<Cyclotomic> {
        let den = self.p.denom().max(self.q.denom());
        let d = num_integer_lcm(*self.p.denom(), *self.q.denom());
        let a = (self.p * d).to_integer();
        let b = (self.q * d).to_integer();
        let mut value = Cyclotomic::integer(n, a);
        if b != 0 {
            let s = Cyclotomic::sqrt5(n).ok_or_else(|| Error::InvalidInput(format!("√5 is not in Z[ζ_{n}]")))?;
            value = value + s * Cyclotomic::integer(n, b);
        }
        if value.coeffs.iter().any(|c| c % d != 0) {
            return Err(Error::InvalidInput(format!("{self} (denominator {den}) is not an algebraic integer")));
        }
        for c in &mut value.coeffs {
            *c /= d;
        }
        Ok(value)
    }
}

fn num_integer_lcm(a: i64, b: i64) -> i64 {
    let g = gcd(a.unsigned_abs() as usize, b.unsigned_abs() as usize) as i64;
    a / g * b
}

impl Add for QuadraticScalar {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.p + o.p, self.q + o.q)
    }
}

impl Mul for QuadraticScalar {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let five = Ratio::from_integer(5);
        Self::new(self.p * o.p + five * self.q * o.q, self.p * o.q + self.q * o.p)
    }
}

impl fmt::Display for QuadraticScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            return write!(f, "{}", self.p);
        }
        let d = num_integer_lcm(*self.p.denom(), *self.q.denom());
        let a = (self.p * d).to_integer();
        let b = (self.q * d).to_integer();
        let sqrt = match b {
            1 => "√5".to_string(),
            -1 => "-√5".to_string(),
            b => format!("{b}√5"),
        };
        let body = if a == 0 {
            sqrt
        } else if b > 0 {
            format!("{a}+{sqrt}")
        } else {
            format!("{a}{sqrt}")
        };
        if d == 1 {
            write!(f, "{body}")
        } else {
            write!(f, "({body})/{d}")
        }
    }
}

// ---------------------------------------------------------------------------
// Linear characters

/// A homomorphism `H → Z_N ⊂ U(1)` given by exponents `g ↦ ζ_N^{k(g)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LinearCharacter {
    modulus: usize,
    members: Vec<usize>,
    exponents: Vec<usize>,
}

impl LinearCharacter {
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    /// Elements of the domain subgroup, sorted.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn exponents(&self) -> &[usize] {
        &self.exponents
    }

    pub fn is_trivial(&self) -> bool {
        self.exponents.iter().all(|&k| k == 0)
    }

    /// Float values aligned with [`members`](Self::members).
    pub fn values(&self) -> Vec<C64> {
        self.exponents.iter().map(|&k| cis(2.0 * PI * k as f64 / self.modulus as f64)).collect()
    }

    pub fn exact_values(&self) -> Vec<Cyclotomic> {
        self.exponents.iter().map(|&k| Cyclotomic::root(self.modulus, k as i64)).collect()
    }

    pub fn exponent_at(&self, g: usize) -> Option<usize> {
        self.members.binary_search(&g).ok().map(|i| self.exponents[i])
    }
}

/// All homomorphisms from the subgroup `h` to `Z_modulus`.
pub fn linear_characters_of(group: &FiniteGroup, h: &Subgroup, modulus: usize) -> Vec<LinearCharacter> {
    let members = h.members().to_vec();
    let pos = |g: usize| members.binary_search(&g).expect("member");
    // Greedy generating set inside h.
    let mut gens: Vec<usize> = Vec::new();
    let mut span = closure_of(group, &[]);
    let mut by_order: Vec<usize> = members.clone();
    by_order.sort_by_key(|&g| (std::cmp::Reverse(group.element_order(g)), g));
    for g in by_order {
        if span.order() == h.order() {
            break;
        }
        if !span.contains(g) {
            gens.push(g);
            span = closure_of(group, &gens);
        }
    }
    let choices: Vec<Vec<usize>> = gens
        .iter()
        .map(|&s| {
            let o = group.element_order(s);
            (0..modulus).filter(|k| (k * o).is_multiple_of(modulus)).collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut odometer = vec![0usize; gens.len()];
    loop {
        let images: Vec<usize> = odometer.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
        // BFS over the Cayley graph of h.
        let mut exps = vec![usize::MAX; members.len()];
        exps[pos(group.identity())] = 0;
        let mut queue = std::collections::VecDeque::from([group.identity()]);
        let mut ok = true;
        'bfs: while let Some(x) = queue.pop_front() {
            let ex = exps[pos(x)];
            for (&s, &k) in gens.iter().zip(&images) {
                let y = group.mul(x, s);
                let ey = (ex + k) % modulus;
                let slot = &mut exps[pos(y)];
                if *slot == usize::MAX {
                    *slot = ey;
                    queue.push_back(y);
                } else if *slot != ey {
                    ok = false;
                    break 'bfs;
                }
            }
        }
        if ok {
            out.push(LinearCharacter { modulus, members: members.clone(), exponents: exps });
        }
        let mut k = 0;
        loop {
            if k == odometer.len() {
                return out;
            }
            odometer[k] += 1;
            if odometer[k] < choices[k].len() {
                break;
            }
            odometer[k] = 0;
            k += 1;
        }
    }
}

/// Linear characters of the whole group, with values in `Z_e`, `e` the
/// exponent. Their number equals the order of the abelianization.
pub fn linear_characters(group: &FiniteGroup) -> Vec<LinearCharacter> {
    linear_characters_of(group, &Subgroup::whole(group), group.exponent())
}

// ---------------------------------------------------------------------------
// Class functions

/// Conjugacy classes ordered by (element order, representative label), with
/// the lexicographically smallest label as representative.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassStructure {
    pub group_name: String,
    pub group_order: usize,
    pub modulus: usize,
    pub classes: Vec<Vec<usize>>,
    pub representatives: Vec<usize>,
    pub labels: Vec<String>,
    #[serde(skip)]
    class_of: Vec<usize>,
}

impl ClassStructure {
    pub fn new(group: &FiniteGroup) -> Self {
        let mut classes = group.conjugacy_classes();
        let rep = |c: &Vec<usize>| -> usize {
            *c.iter()
                .min_by(|&&a, &&b| {
                    let (la, lb) = (group.label(a), group.label(b));
                    (la.len(), la).cmp(&(lb.len(), lb))
                })
                .unwrap()
        };
        classes.sort_by_key(|c| {
            let r = rep(c);
            (group.element_order(r), group.label(r).len(), group.label(r).to_string())
        });
        let representatives: Vec<usize> = classes.iter().map(rep).collect();
        let mut class_of = vec![0; group.order()];
        for (i, c) in classes.iter().enumerate() {
            for &g in c {
                class_of[g] = i;
            }
        }
        ClassStructure {
            group_name: group.name().to_string(),
            group_order: group.order(),
            modulus: group.exponent(),
            labels: representatives.iter().map(|&g| group.label(g).to_string()).collect(),
            classes,
            representatives,
            class_of,
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn find_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Whether class values are held exactly or only as floats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    Float,
}

/// A function on conjugacy classes.
#[derive(Debug, Clone, Serialize)]
pub struct ClassFunction {
    #[serde(skip)]
    structure: Arc<ClassStructure>,
    exact: Option<Vec<Cyclotomic>>,
    float: Vec<C64>,
}

impl PartialEq for ClassFunction {
    fn eq(&self, other: &Self) -> bool {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => a == b,
            _ => self.float.iter().zip(&other.float).all(|(a, b)| (a - b).norm() < 1e-6),
        }
    }
}

impl ClassFunction {
    pub fn exact(structure: Arc<ClassStructure>, values: Vec<Cyclotomic>) -> Self {
        let float = values.iter().map(Cyclotomic::to_complex).collect();
        ClassFunction { structure, exact: Some(values), float }
    }

    pub fn float(structure: Arc<ClassStructure>, values: Vec<C64>) -> Self {
        ClassFunction { structure, exact: None, float: values }
    }

    /// Builds from values in `Q(√5)`, one per class.
    pub fn from_quadratic(structure: Arc<ClassStructure>, values: &[QuadraticScalar]) -> Result<Self> {
        if values.len() != structure.len() {
            return Err(Error::DimensionMismatch(format!("{} values for {} classes", values.len(), structure.len())));
        }
        let n = structure.modulus;
        let exact = values.iter().map(|v| v.to_cyclotomic(n)).collect::<Result<Vec<_>>>()?;
        Ok(Self::exact(structure, exact))
    }

    pub fn structure(&self) -> &Arc<ClassStructure> {
        &self.structure
    }

    pub fn exactness(&self) -> Exactness {
        if self.exact.is_some() {
            Exactness::Exact
        } else {
            Exactness::Float
        }
    }

    pub fn exact_values(&self) -> Option<&[Cyclotomic]> {
        self.exact.as_deref()
    }

    pub fn float_values(&self) -> &[C64] {
        &self.float
    }

    /// Value at the class containing `g`, as a float.
    pub fn at(&self, g: usize) -> C64 {
        self.float[self.structure.class_of(g)]
    }

    pub fn degree(&self) -> f64 {
        self.float[0].re
    }

    /// Exact value at an element, when exact.
    pub fn exact_at(&self, g: usize) -> Option<&Cyclotomic> {
        self.exact.as_ref().map(|v| &v[self.structure.class_of(g)])
    }

    /// Pointwise `χ · conj(ψ)`.
    pub fn times_conj(&self, other: &Self) -> Self {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => {
                Self::exact(self.structure.clone(), a.iter().zip(b).map(|(x, y)| x.clone() * y.conj()).collect())
            }
            _ => Self::float(
                self.structure.clone(),
                self.float.iter().zip(&other.float).map(|(x, y)| x * y.conj()).collect(),
            ),
        }
    }

    /// `⟨χ, ψ⟩ = (1/|G|) Σ χ(g) conj ψ(g)`, exactly when both are exact.
    pub fn inner(&self, other: &Self) -> InnerProduct {
        let sizes: Vec<i64> = self.structure.classes.iter().map(|c| c.len() as i64).collect();
        let order = self.structure.group_order as i64;
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            let n = self.structure.modulus;
            let mut total = Cyclotomic::zero(n);
            for ((x, y), &s) in a.iter().zip(b).zip(&sizes) {
                total = total + Cyclotomic::integer(n, s) * x.clone() * y.conj();
            }
            if let Some(k) = total.as_integer() {
                return InnerProduct::Rational(Ratio::new(k, order));
            }
            return InnerProduct::Irrational(total.to_complex() / order as f64);
        }
        let total: C64 =
            self.float.iter().zip(&other.float).zip(&sizes).map(|((x, y), &s)| x * y.conj() * s as f64).sum();
        InnerProduct::Float(total / order as f64)
    }
}

/// Result of a class-function inner product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerProduct {
    Rational(Ratio<i64>),
    Irrational(C64),
    Float(C64),
}

impl InnerProduct {
    pub fn as_nonnegative_integer(&self) -> Option<u64> {
        match *self {
            InnerProduct::Rational(r) if r.is_integer() && r >= Ratio::from_integer(0) => Some(r.to_integer() as u64),
            InnerProduct::Float(z) if z.im.abs() < 1e-6 && (z.re - z.re.round()).abs() < 1e-6 && z.re > -0.5 => {
                Some(z.re.round() as u64)
            }
            _ => None,
        }
    }

    pub fn to_complex(&self) -> C64 {
        match *self {
            InnerProduct::Rational(r) => C64::new(*r.numer() as f64 / *r.denom() as f64, 0.0),
            InnerProduct::Irrational(z) | InnerProduct::Float(z) => z,
        }
    }
}

/// Character of a representation on each class.
///
/// Values are recovered exactly from eigenvalue multiplicities: for an
/// element of order `o` the multiplicity of `ζ_o^k` is the discrete Fourier
/// coefficient of `j ↦ χ(g^j)`.
pub fn character_of_rep(rep: &Representation) -> ClassFunction {
    let group = rep.group();
    let structure = Arc::new(ClassStructure::new(group));
    let traces = rep.character();
    let n = structure.modulus;
    let mut exact = Vec::with_capacity(structure.len());
    let mut all_exact = true;
    for &g in &structure.representatives {
        let o = group.element_order(g);
        let mut powers = Vec::with_capacity(o);
        let mut x = group.identity();
        for _ in 0..o {
            powers.push(traces[x]);
            x = group.mul(x, g);
        }
        let mut terms = Vec::new();
        for k in 0..o {
            let m: C64 =
                powers.iter().enumerate().map(|(j, t)| t * cis(-2.0 * PI * (j * k) as f64 / o as f64)).sum::<C64>()
                    / o as f64;
            let r = m.re.round();
            if (m - C64::new(r, 0.0)).norm() > 1e-6 || r < 0.0 {
                all_exact = false;
            }
            terms.push((k * (n / o), r as i64));
        }
        let value = Cyclotomic::from_power_sum(n, terms);
        if (value.to_complex() - traces[g]).norm() > 1e-6 {
            all_exact = false;
        }
        exact.push(value);
    }
    if all_exact {
        ClassFunction::exact(structure, exact)
    } else {
        let float = structure.representatives.iter().map(|&g| traces[g]).collect();
        ClassFunction::float(structure, float)
    }
}

/// Induces a function on the subgroup `h` (values aligned with
/// `h.members()`) up to `k ⊇ h`; returns values aligned with `k.members()`.
///
/// Uses `Ind(g) = Σ_{y} χ̇(y g y⁻¹)` over representatives `y` of the right
/// cosets `Hy` in `K`, so no division is needed.
pub fn induce_values(
    group: &FiniteGroup,
    h: &Subgroup,
    k: &Subgroup,
    values: &[Cyclotomic],
    modulus: usize,
) -> Result<Vec<Cyclotomic>> {
    if !h.is_subset_of(k) {
        return Err(Error::NotASubgroup("inducing subgroup is not contained in the target".into()));
    }
    // Right cosets of h inside k.
    let mut seen = vec![false; group.order()];
    let mut reps = Vec::new();
    for &x in k.members() {
        if seen[x] {
            continue;
        }
        reps.push(x);
        for &m in h.members() {
            seen[group.mul(m, x)] = true;
        }
    }
    Ok(k.members()
        .iter()
        .map(|&g| {
            let mut acc = Cyclotomic::zero(modulus);
            for &y in &reps {
                let c = group.mul(group.mul(y, g), group.inv(y));
                if let Ok(i) = h.members().binary_search(&c) {
                    acc = acc + values[i].clone();
                }
            }
            acc
        })
        .collect())
}

/// Induces a linear character of a subgroup to a class function on `G`.
pub fn induce_character(
    group: &FiniteGroup,
    structure: &Arc<ClassStructure>,
    chi: &LinearCharacter,
) -> Result<ClassFunction> {
    let h = Subgroup::from_members(group, chi.members())?;
    let n = structure.modulus;
    let values: Vec<Cyclotomic> = chi.exact_values().iter().map(|v| v.lift(n)).collect::<Result<_>>()?;
    let whole = Subgroup::whole(group);
    let on_g = induce_values(group, &h, &whole, &values, n)?;
    let per_class = structure.representatives.iter().map(|&r| on_g[r].clone()).collect();
    Ok(ClassFunction::exact(structure.clone(), per_class))
}

/// An induced monomial character with its source.
#[derive(Debug, Clone, Serialize)]
pub struct MonomialCandidate {
    pub subgroup: Subgroup,
    pub subgroup_order: usize,
    pub source_trivial: bool,
    pub character: ClassFunction,
}

/// Characters induced from linear characters of subgroups, one subgroup per
/// conjugacy class, restricted to degree `≤ max_degree` and deduplicated by
/// value vector. Sorted by degree, then by values.
pub fn monomial_candidates(group: &FiniteGroup, max_degree: usize) -> Result<Vec<MonomialCandidate>> {
    let structure = Arc::new(ClassStructure::new(group));
    let n = structure.modulus;
    let mut out: Vec<MonomialCandidate> = Vec::new();
    for class in conjugacy_classes_of_subgroups(group) {
        let h = class.representative;
        if group.order() / h.order() > max_degree {
            continue;
        }
        for chi in linear_characters_of(group, &h, n) {
            let induced = induce_character(group, &structure, &chi)?;
            if out.iter().any(|c| c.character == induced) {
                continue;
            }
            out.push(MonomialCandidate {
                subgroup_order: h.order(),
                subgroup: h.clone(),
                source_trivial: chi.is_trivial(),
                character: induced,
            });
        }
    }
    out.sort_by(|a, b| {
        let key = |c: &MonomialCandidate| -> Vec<(f64, f64)> {
            c.character.float_values().iter().map(|z| (z.re, z.im)).collect()
        };
        let (ka, kb) = (key(a), key(b));
        ka[0].0.total_cmp(&kb[0].0).then_with(|| {
            ka.iter()
                .zip(&kb)
                .map(|(x, y)| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(out)
}

/// Why no decomposition exists.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// The target takes an irrational value on a class where every
    /// candidate is rational.
    Irrational { class: String, value: String },
    /// No multiset of candidate degrees sums to the target degree.
    DegreeAccounting { target_degree: i64, candidate_degrees: Vec<i64> },
    /// Bounded search over all degree-compatible combinations failed.
    Exhausted { combinations_tried: u64 },
}

/// Outcome of [`monomial_decomposition_feasible`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Feasibility {
    /// Multiplicity per candidate index.
    Feasible {
        witness: Vec<(usize, u32)>,
        exact: bool,
    },
    Infeasible {
        certificate: Certificate,
    },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

/// Decides whether `target` is a non-negative integer combination of
/// `candidates`, matching every class value.
pub fn monomial_decomposition_feasible(target: &ClassFunction, candidates: &[ClassFunction]) -> Feasibility {
    let classes = target.structure.len();
    let all_exact = target.exact.is_some() && candidates.iter().all(|c| c.exact.is_some());
    if let Some(t) = &target.exact {
        for k in 0..classes {
            let all_rational = candidates.iter().all(|c| c.exact.as_ref().is_some_and(|v| v[k].is_rational()));
            if !t[k].is_rational() && all_rational {
                return Feasibility::Infeasible {
                    certificate: Certificate::Irrational {
                        class: target.structure.labels[k].clone(),
                        value: t[k].to_string(),
                    },
                };
            }
        }
    }
    let target_degree = target.degree().round() as i64;
    let degrees: Vec<i64> = candidates.iter().map(|c| c.degree().round() as i64).collect();
    // Subset-sum reachability with repetition.
    let mut reachable = vec![false; target_degree.max(0) as usize + 1];
    reachable[0] = true;
    for d in 1..reachable.len() {
        reachable[d] = degrees.iter().any(|&c| c > 0 && c as usize <= d && reachable[d - c as usize]);
    }
    if target_degree < 0 || !reachable[target_degree as usize] {
        return Feasibility::Infeasible {
            certificate: Certificate::DegreeAccounting { target_degree, candidate_degrees: degrees },
        };
    }

    struct Search<'a> {
        target: &'a ClassFunction,
        candidates: &'a [ClassFunction],
        degrees: &'a [i64],
        exact: bool,
        counts: Vec<u32>,
        tried: u64,
    }

    impl Search<'_> {
        fn matches(&self) -> bool {
            let n = self.target.structure.modulus;
            if self.exact {
                let t = self.target.exact.as_ref().unwrap();
                (0..t.len()).all(|k| {
                    let mut acc = Cyclotomic::zero(n);
                    for (c, &m) in self.candidates.iter().zip(&self.counts) {
                        if m > 0 {
                            acc = acc + Cyclotomic::integer(n, m as i64) * c.exact.as_ref().unwrap()[k].clone();
                        }
                    }
                    acc == t[k]
                })
            } else {
                (0..self.target.float.len()).all(|k| {
                    let acc: C64 = self.candidates.iter().zip(&self.counts).map(|(c, &m)| c.float[k] * m as f64).sum();
                    (acc - self.target.float[k]).norm() < 1e-6
                })
            }
        }

        fn dfs(&mut self, i: usize, remaining: i64) -> bool {
            if remaining == 0 {
                self.tried += 1;
                return self.matches();
            }
            if i == self.candidates.len() {
                return false;
            }
            let d = self.degrees[i];
            let max = if d > 0 { remaining / d } else { 0 };
            for m in (0..=max).rev() {
                self.counts[i] = m as u32;
                if self.dfs(i + 1, remaining - m * d) {
                    return true;
                }
            }
            self.counts[i] = 0;
            false
        }
    }

    let mut search =
        Search { target, candidates, degrees: &degrees, exact: all_exact, counts: vec![0; candidates.len()], tried: 0 };
    if search.dfs(0, target_degree) {
        let witness = search.counts.iter().enumerate().filter(|(_, &m)| m > 0).map(|(i, &m)| (i, m)).collect();
        Feasibility::Feasible { witness, exact: all_exact }
    } else {
        Feasibility::Infeasible { certificate: Certificate::Exhausted { combinations_tried: search.tried } }
    }
}

/// Full verdict for a representation: target `χ·conj(χ)` against all
/// monomial candidates of degree at most `dim²`.
#[derive(Debug, Clone, Serialize)]
pub struct MonomialVerdict {
    pub group: String,
    pub target: ClassFunction,
    pub class_labels: Vec<String>,
    pub candidates: Vec<MonomialCandidate>,
    pub result: Feasibility,
}

pub fn monomial_check(group: &FiniteGroup, chi: &ClassFunction) -> Result<MonomialVerdict> {
    let target = chi.times_conj(chi);
    let max_degree = target.degree().round() as usize;
    let candidates = monomial_candidates(group, max_degree)?;
    let chars: Vec<ClassFunction> = candidates.iter().map(|c| c.character.clone()).collect();
    let result = monomial_decomposition_feasible(&target, &chars);
    Ok(MonomialVerdict {
        group: group.name().to_string(),
        class_labels: target.structure.labels.clone(),
        target,
        candidates,
        result,
    })
}

/// The two three-dimensional irreducible characters of `A5`, on classes
/// ordered `()`, `(1,2)(3,4)`, `(1,2,3)`, `(1,2,3,4,5)`, `(1,2,3,5,4)`.
pub fn a5_three_dim_characters(structure: &Arc<ClassStructure>) -> Result<[ClassFunction; 2]> {
    let golden = QuadraticScalar::from_parts(1, 1, 2);
    let values = |x: QuadraticScalar, y: QuadraticScalar| {
        [QuadraticScalar::integer(3), QuadraticScalar::integer(-1), QuadraticScalar::integer(0), x, y]
    };
    let expected = ["()", "(1,2)(3,4)", "(1,2,3)", "(1,2,3,4,5)", "(1,2,3,5,4)"];
    if structure.labels != expected {
        return Err(Error::InvalidInput(format!("class layout {:?} is not the standard A5 layout", structure.labels)));
    }
    Ok([
        ClassFunction::from_quadratic(structure.clone(), &values(golden, golden.conj()))?,
        ClassFunction::from_quadratic(structure.clone(), &values(golden.conj(), golden))?,
    ])
}
