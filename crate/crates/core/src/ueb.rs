//! Unitary error bases, their equivariant structure under a representation,
//! lifts of orthogonal error bases, and the commuting-Hadamard construction
//! for permutation representations.

use std::f64::consts::PI;

use serde_json::json;

use crate::error::{Error, Result};
use crate::group::{orbits, FiniteGroup, GSet, Permutation, Side};
use crate::numeric::TOL;
use crate::oeb::{orbit_sizes, EquivariantOEB, So3Rep};
use crate::rotation::{q_map, su2_lift};
use crate::unitary::{cis, matrix_group, trace_inner, ComplexMatrix, Representation, C64, I, ONE, ZERO};

/// Tolerance on `|Tr(U_j† M)| − n` when matching conjugates to elements.
pub const MATCH_TOL: f64 = 1e-6;

/// `n²` unitaries on `Cⁿ`, orthogonal in the trace inner product.
#[derive(Debug, Clone)]
pub struct Ueb {
    dim: usize,
    elements: Vec<ComplexMatrix>,
    residual: f64,
}

/// Checks count, unitarity and `Tr(U_i† U_j) = n δ_ij`.
pub fn verify_ueb(matrices: Vec<ComplexMatrix>) -> Result<Ueb> {
    let first = matrices.first().ok_or_else(|| Error::NotAUeb("empty family".into()))?;
    let n = first.rows();
    if matrices.len() != n * n {
        return Err(Error::NotAUeb(format!("{} elements in dimension {n}, expected {}", matrices.len(), n * n)));
    }
    let mut residual = 0.0f64;
    for (i, u) in matrices.iter().enumerate() {
        if u.dims() != (n, n) {
            return Err(Error::DimensionMismatch(format!("element {i} is {:?}, expected {n}x{n}", u.dims())));
        }
        let r = u.unitarity_residual();
        if r > TOL {
            return Err(Error::NotAUeb(format!("element {i} is not unitary (residual {r:.3e})")));
        }
        residual = residual.max(r);
    }
    for i in 0..matrices.len() {
        for j in i + 1..matrices.len() {
            let ip = trace_inner(&matrices[i], &matrices[j])?.norm();
            if ip > TOL * n as f64 {
                return Err(Error::NotAUeb(format!("Tr(U_{i}† U_{j}) has modulus {ip:.3e}")));
            }
            residual = residual.max(ip);
        }
    }
    Ok(Ueb { dim: n, elements: matrices, residual })
}

impl Ueb {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i]
    }

    /// Largest unitarity or cross-term residual seen during verification.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// `{1, X, Y, Z}` in that order.
    pub fn pauli() -> Ueb {
        verify_ueb(vec![
            ComplexMatrix::identity(2),
            ComplexMatrix::pauli_x(),
            ComplexMatrix::pauli_y(),
            ComplexMatrix::pauli_z(),
        ])
        .expect("Pauli matrices form a UEB")
    }

    /// Shift-and-clock basis `X^a Z^b`, index `a·n + b`.
    pub fn clock_shift(n: usize) -> Ueb {
        let shift = ComplexMatrix::permutation(&(0..n).map(|i| (i + 1) % n).collect::<Vec<_>>());
        let clock = ComplexMatrix::diag(&(0..n).map(|k| cis(2.0 * PI * k as f64 / n as f64)).collect::<Vec<_>>());
        let mut out = Vec::with_capacity(n * n);
        let mut xa = ComplexMatrix::identity(n);
        for _ in 0..n {
            let mut m = xa.clone();
            for _ in 0..n {
                out.push(m.clone());
                m = &m * &clock;
            }
            xa = &xa * &shift;
        }
        verify_ueb(out).expect("clock and shift matrices form a UEB")
    }

    /// `U_i ↦ λ_i U_i`.
    pub fn regauged(&self, phases: &[C64]) -> Result<Ueb> {
        if phases.len() != self.len() {
            return Err(Error::InvalidInput(format!("{} phases for {} elements", phases.len(), self.len())));
        }
        if let Some(p) = phases.iter().find(|p| (p.norm() - 1.0).abs() > TOL) {
            return Err(Error::InvalidInput(format!("phase {p} is not unimodular")));
        }
        let elements = self.elements.iter().zip(phases).map(|(u, &p)| u.scale(p)).collect();
        verify_ueb(elements)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({ "dim": self.dim, "elements": self.elements })
    }

    /// Reads `elements` and re-verifies.
    pub fn from_json(value: &serde_json::Value) -> Result<Ueb> {
        let raw = value.get("elements").cloned().ok_or_else(|| Error::InvalidInput("missing `elements`".into()))?;
        let elements: Vec<ComplexMatrix> = serde_json::from_value(raw)?;
        verify_ueb(elements)
    }
}

/// A UEB whose elements a representation permutes by conjugation, up to
/// the phases `ξ`.
#[derive(Debug, Clone)]
pub struct EquivariantUeb {
    ueb: Ueb,
    rep: Representation,
    tau: GSet,
    /// `xi[g][i]`
    xi: Vec<Vec<C64>>,
    residual: f64,
}

/// Discovers `τ` and `ξ` from `ξ(i,g) ρ(g)† U_i ρ(g) = U_τ(i,g)` and checks
/// the right-action axioms and the phase cocycle.
pub fn verify_equivariant(ueb: &Ueb, rep: &Representation) -> Result<EquivariantUeb> {
    let n = ueb.dim();
    if rep.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "representation of dimension {} on a UEB of dimension {n}",
            rep.dim()
        )));
    }
    let group = rep.group();
    let nf = n as f64;
    let mut action = Vec::with_capacity(group.order());
    let mut xi = Vec::with_capacity(group.order());
    let mut residual = 0.0f64;
    for g in group.elements() {
        let r = rep.image(g);
        let rd = r.dagger();
        let mut row = Vec::with_capacity(ueb.len());
        let mut phases = Vec::with_capacity(ueb.len());
        for (i, u) in ueb.elements().iter().enumerate() {
            let conj = &(&rd * u) * r;
            let mut hits = Vec::new();
            for (j, v) in ueb.elements().iter().enumerate() {
                let ip = trace_inner(v, &conj)?;
                if (ip.norm() - nf).abs() < MATCH_TOL {
                    hits.push((j, ip));
                }
            }
            let (j, ip) = match hits.as_slice() {
                [single] => *single,
                [] => {
                    return Err(Error::NotEquivariant(format!(
                        "ρ({})† U_{i} ρ({}) is not proportional to any element",
                        group.label(g),
                        group.label(g)
                    )))
                }
                _ => {
                    return Err(Error::NotEquivariant(format!(
                        "ρ({})† U_{i} ρ({}) matches {} elements",
                        group.label(g),
                        group.label(g),
                        hits.len()
                    )))
                }
            };
            let z = C64::new(nf, 0.0) / ip;
            let z = z / z.norm();
            let d = conj.scale(z).max_abs_diff(ueb.element(j));
            if d > TOL {
                return Err(Error::NotEquivariant(format!(
                    "phase equation fails at ({i}, {}) by {d:.3e}",
                    group.label(g)
                )));
            }
            residual = residual.max(d);
            row.push(j);
            phases.push(z);
        }
        action.push(row);
        xi.push(phases);
    }
    let points = (0..ueb.len()).map(|i| i.to_string()).collect();
    let tau = GSet::new(group, points, action, Side::Right)
        .map_err(|e| Error::NotEquivariant(format!("τ is not a right action: {e}")))?;
    // ξ(i, gh) = ξ(i, g) ξ(τ(i, g), h)
    for g in group.elements() {
        for h in group.elements() {
            let gh = group.mul(g, h);
            for i in 0..ueb.len() {
                let lhs = xi[gh][i];
                let rhs = xi[g][i] * xi[h][tau.act(g, i)];
                let d = (lhs - rhs).norm();
                if d > 1e-8 {
                    return Err(Error::NotEquivariant(format!(
                        "phase cocycle fails at ({i}, {}, {}) by {d:.3e}",
                        group.label(g),
                        group.label(h)
                    )));
                }
            }
        }
    }
    Ok(EquivariantUeb { ueb: ueb.clone(), rep: rep.clone(), tau, xi, residual })
}

impl EquivariantUeb {
    pub fn ueb(&self) -> &Ueb {
        &self.ueb
    }

    pub fn rep(&self) -> &Representation {
        &self.rep
    }

    pub fn group(&self) -> &FiniteGroup {
        self.rep.group()
    }

    pub fn dim(&self) -> usize {
        self.ueb.dim()
    }

    /// The right action `τ` on element indices.
    pub fn tau(&self) -> &GSet {
        &self.tau
    }

    /// `τ⁻¹` as a left action: `g · i = τ(i, g⁻¹)`.
    pub fn tau_inverse(&self) -> GSet {
        self.tau.to_left(self.group())
    }

    pub fn xi(&self, i: usize, g: usize) -> C64 {
        self.xi[g][i]
    }

    /// Largest deviation in the phase equation.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Orbit sizes of `τ`, largest first.
    pub fn orbit_type(&self) -> Vec<usize> {
        orbit_sizes(&self.tau)
    }

    pub fn orbits(&self) -> Vec<Vec<usize>> {
        orbits(&self.tau)
    }

    /// `τ(·, g)` as a permutation.
    pub fn tau_permutation(&self, g: usize) -> Permutation {
        Permutation::new(self.tau.permutation(g).to_vec()).expect("τ acts by permutations")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let group = self.group();
        let xi: serde_json::Map<String, serde_json::Value> = group
            .elements()
            .map(|g| {
                let row: Vec<[f64; 2]> = self.xi[g].iter().map(|z| [z.re, z.im]).collect();
                (group.label(g).to_string(), json!(row))
            })
            .collect();
        json!({
            "dim": self.dim(),
            "elements": self.ueb.elements(),
            "group": group.name(),
            "tau": self.tau.to_json_labeled(group),
            "xi": xi,
            "orbit_type": self.orbit_type(),
            "speakable_only": speakable_only_possible(self),
            "residual": self.residual,
        })
    }
}

/// True when every `τ`-orbit is a single point, so the classical message
/// needs no reference frame at all.
pub fn speakable_only_possible(e: &EquivariantUeb) -> bool {
    e.orbit_type().iter().all(|&s| s == 1)
}

/// Lifts each rotation with phase 1 and verifies the result against `rep`.
pub fn lift_oeb(oeb: &EquivariantOEB, rep: &Representation) -> Result<EquivariantUeb> {
    lift_oeb_with_phases(oeb, rep, &[ONE; 4])
}

/// Lifts `e_i` to `phases[i] · su2(e_i)`.
///
/// `rep` may live on the same group as the OEB, in which case the
/// q-images must agree elementwise, or on a covering group, in which case
/// every `q(ρ(g))` must be one of the OEB's symmetry rotations. Either way
/// the discovered `τ` must agree with the OEB's.
pub fn lift_oeb_with_phases(oeb: &EquivariantOEB, rep: &Representation, phases: &[C64]) -> Result<EquivariantUeb> {
    if rep.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "lifts need a qubit representation, got dimension {}",
            rep.dim()
        )));
    }
    if phases.len() != 4 {
        return Err(Error::InvalidInput(format!("{} phases for four elements", phases.len())));
    }
    let so3 = oeb.rep();
    let same_group = rep.group().table() == so3.group().table();
    let mut image_of = Vec::with_capacity(rep.group().order());
    for g in rep.group().elements() {
        let r = q_map(rep.image(g))?;
        let h = if same_group {
            let d = r.ball_distance(so3.image(g));
            if d > TOL {
                return Err(Error::NotARepresentation(format!(
                    "q(ρ({})) differs from the OEB symmetry by {d:.3e}",
                    rep.group().label(g)
                )));
            }
            g
        } else {
            so3.group().elements().find(|&h| r.ball_distance(so3.image(h)) < TOL).ok_or_else(|| {
                Error::NotARepresentation(format!("q(ρ({})) is not a symmetry of the OEB", rep.group().label(g)))
            })?
        };
        image_of.push(h);
    }
    let elements = oeb.elements().iter().zip(phases).map(|(e, &p)| su2_lift(e, p)).collect();
    let ueb = verify_ueb(elements)?;
    let lifted = verify_equivariant(&ueb, rep)?;
    for (g, &h) in image_of.iter().enumerate() {
        if lifted.tau().permutation(g) != oeb.tau().permutation(h) {
            return Err(Error::NotEquivariant(format!(
                "lifted τ at {} disagrees with the OEB action",
                rep.group().label(g)
            )));
        }
    }
    Ok(lifted)
}

/// The SU(2) group generated by phase-1 lifts of the generators of `so3`.
/// For groups with an even-order element this is the binary double cover.
pub fn binary_cover(so3: &So3Rep) -> Result<Representation> {
    let group = so3.group();
    let gens: Vec<ComplexMatrix> = group.generators().iter().map(|&g| su2_lift(so3.image(g), ONE)).collect();
    let names: Vec<String> = group.generators().iter().map(|&g| group.label(g).to_string()).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    matrix_group(&format!("2{}", group.name()), &gens, &names)
}

/// Which sign to give `Im(α* β)` in [`circulant_unitary`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseSign {
    #[default]
    Plus,
    Minus,
}

/// The circulant `circ(a, b, …, b)` with `a = |a|`, solving the unitarity
/// conditions for `b`.
pub fn circulant_unitary(n: usize, abs_a: f64, sign: PhaseSign) -> Result<ComplexMatrix> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("circulant construction needs n ≥ 3, got {n}")));
    }
    let lower = (n as f64 - 2.0) / n as f64;
    if !(abs_a >= lower - 1e-12 && abs_a <= 1.0 + 1e-12) {
        return Err(Error::Infeasible(format!("|a| = {abs_a:.6} lies outside [{lower:.6}, 1] for n = {n}")));
    }
    let abs_a = abs_a.clamp(lower, 1.0);
    let abs_b = ((1.0 - abs_a * abs_a) / (n as f64 - 1.0)).max(0.0).sqrt();
    let b = if abs_b == 0.0 {
        ZERO
    } else {
        let re = ((2.0 - n as f64) / 2.0 * abs_b / abs_a).clamp(-1.0, 1.0);
        let im = (1.0 - re * re).max(0.0).sqrt();
        let im = if sign == PhaseSign::Plus { im } else { -im };
        C64::new(re, im) * abs_b
    };
    let a = C64::new(abs_a, 0.0);
    let m = ComplexMatrix::from_fn(n, n, |r, c| if r == c { a } else { b });
    let res = m.unitarity_residual();
    if res > TOL {
        return Err(Error::Infeasible(format!("circulant residual {res:.3e}")));
    }
    Ok(m)
}

/// A Hadamard matrix commuting with every `n × n` permutation matrix.
pub fn commuting_hadamard(n: usize) -> Result<ComplexMatrix> {
    let h = match n {
        0 | 1 => return Err(Error::InvalidInput(format!("commuting Hadamard needs n ≥ 2, got {n}"))),
        2 => ComplexMatrix::from_rows(&[vec![ONE, I], vec![I, ONE]])?,
        3 | 4 => circulant_unitary(n, 1.0 / (n as f64).sqrt(), PhaseSign::Plus)?.scale(C64::new((n as f64).sqrt(), 0.0)),
        _ => {
            return Err(Error::Refused(format!(
                "no commuting Hadamard exists for n = {n}: a circulant unitary needs |a| ≥ (n−2)/n = {:.4}, but a Hadamard has |a| = 1/√n = {:.4}",
                (n as f64 - 2.0) / n as f64,
                1.0 / (n as f64).sqrt()
            )))
        }
    };
    check_hadamard(&h)?;
    for p in all_permutations(n) {
        let pm = ComplexMatrix::permutation(&p);
        if !(&pm * &h).approx_eq(&(&h * &pm), TOL) {
            return Err(Error::Infeasible(format!("H fails to commute with {p:?}")));
        }
    }
    Ok(h)
}

fn check_hadamard(h: &ComplexMatrix) -> Result<()> {
    let n = h.rows();
    if let Some(z) = h.data().iter().find(|z| (z.norm() - 1.0).abs() > TOL) {
        return Err(Error::InvalidInput(format!("entry {z} is not unimodular")));
    }
    let hh = h * &h.dagger();
    if !hh.approx_eq(&ComplexMatrix::identity(n).scale(C64::new(n as f64, 0.0)), 1e-9 * n as f64) {
        return Err(Error::InvalidInput("H H† ≠ n·1".into()));
    }
    Ok(())
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                go(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn is_permutation_matrix(m: &ComplexMatrix) -> bool {
    let n = m.rows();
    let entry_ok = m.data().iter().all(|z| z.norm() < 1e-12 || (z - ONE).norm() < 1e-12);
    let ones = |r: usize, c: usize| (m[(r, c)] - ONE).norm() < 1e-12;
    entry_ok
        && (0..n).all(|r| (0..n).filter(|&c| ones(r, c)).count() == 1)
        && (0..n).all(|c| (0..n).filter(|&r| ones(r, c)).count() == 1)
}

/// `U_(i,j) = (1/n) H · diag(H, j)† · H† · diag(Hᵀ, i)`, element index
/// `i·n + j`, where `diag(M, i)` is the diagonal matrix built from row `i`.
pub fn hadamard_ueb(rep: &Representation, h: &ComplexMatrix) -> Result<EquivariantUeb> {
    let n = rep.dim();
    if h.dims() != (n, n) {
        return Err(Error::DimensionMismatch(format!("H is {:?}, representation has dimension {n}", h.dims())));
    }
    check_hadamard(h)?;
    for g in rep.group().elements() {
        let p = rep.image(g);
        if !is_permutation_matrix(p) {
            return Err(Error::InvalidInput(format!("ρ({}) is not a permutation matrix", rep.group().label(g))));
        }
        if !(p * h).approx_eq(&(h * p), TOL) {
            return Err(Error::InvalidInput(format!("H does not commute with ρ({})", rep.group().label(g))));
        }
    }
    let ht = h.transpose();
    let hd = h.dagger();
    let scale = C64::new(1.0 / n as f64, 0.0);
    let mut elements = Vec::with_capacity(n * n);
    for i in 0..n {
        let di = ComplexMatrix::diag(ht.row(i));
        for j in 0..n {
            let dj = ComplexMatrix::diag(h.row(j)).dagger();
            elements.push((&(&(h * &dj) * &hd) * &di).scale(scale));
        }
    }
    let ueb = verify_ueb(elements)?;
    verify_equivariant(&ueb, rep)
}
