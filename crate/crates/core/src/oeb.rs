//! Equivariant orthogonal error bases: quadruples of pairwise orthogonal
//! rotations that a finite rotation group permutes by conjugation.
//!
//! Two rotations are orthogonal when `r1⁻¹ r2` is a half-turn, which in
//! quaternion terms means the unit quaternions are orthogonal in `R⁴`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::group::{close_under, orbits, FiniteGroup, GSet, Side, Subgroup, DEFAULT_SIZE_CAP};
use crate::numeric::{bisect, TOL};
use crate::rotation::{ball_points_csv, dot, normalize, orthogonal_partner_on_axis, q_map, Quaternion, Rotation, Vec3};
use crate::unitary::{gaussian, Representation};

/// A homomorphism from a finite group into SO(3), stored elementwise.
#[derive(Debug, Clone)]
pub struct So3Rep {
    group: FiniteGroup,
    images: Vec<Rotation>,
}

impl So3Rep {
    /// Checks the homomorphism property on every pair.
    pub fn new(group: FiniteGroup, images: Vec<Rotation>) -> Result<So3Rep> {
        if images.len() != group.order() {
            return Err(Error::NotARepresentation(format!(
                "{} images for a group of order {}",
                images.len(),
                group.order()
            )));
        }
        for g in group.elements() {
            for h in group.elements() {
                let prod = images[g].then_after(&images[h]);
                let d = prod.ball_distance(&images[group.mul(g, h)]);
                if d > TOL {
                    return Err(Error::NotARepresentation(format!(
                        "q-image fails at ({}, {}), distance {d:.3e}",
                        group.label(g),
                        group.label(h)
                    )));
                }
            }
        }
        Ok(So3Rep { group, images })
    }

    /// The group generated by `gens` inside SO(3), with word labels.
    pub fn from_generators(name: &str, gens: &[Rotation], names: &[&str]) -> Result<So3Rep> {
        let (elems, table, gen_idx) = close_under(
            Rotation::IDENTITY,
            gens,
            |a, b| a.then_after(b),
            |a, b| a.ball_distance(b) < 1e-9,
            DEFAULT_SIZE_CAP,
        )?;
        let placeholder = (0..elems.len()).map(|i| i.to_string()).collect();
        let group = FiniteGroup::from_table(name, placeholder, table, Some(gen_idx))?;
        let labels = group.word_labels(names);
        let group = group.relabeled(name, labels)?;
        So3Rep::new(group, elems)
    }

    /// `q ∘ ρ` for a qubit representation.
    pub fn from_unitary(rep: &Representation) -> Result<So3Rep> {
        if rep.dim() != 2 {
            return Err(Error::DimensionMismatch(format!("q is defined on qubits, got dimension {}", rep.dim())));
        }
        let images = rep.images().iter().map(q_map).collect::<Result<Vec<_>>>()?;
        So3Rep::new(rep.group().clone(), images)
    }

    /// Restriction to a subgroup, relabeled as a group in its own right.
    pub fn restrict(&self, h: &Subgroup, name: &str) -> Result<So3Rep> {
        let members = h.members();
        let local = |g: usize| members.iter().position(|&m| m == g);
        let mut table = Vec::with_capacity(members.len());
        for &a in members {
            let row = members
                .iter()
                .map(|&b| local(self.group.mul(a, b)).ok_or_else(|| Error::NotASubgroup("not closed".into())))
                .collect::<Result<Vec<_>>>()?;
            table.push(row);
        }
        let labels = members.iter().map(|&m| self.group.label(m).to_string()).collect();
        let group = FiniteGroup::from_table(name, labels, table, None)?;
        So3Rep::new(group, members.iter().map(|&m| self.images[m]).collect())
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn images(&self) -> &[Rotation] {
        &self.images
    }

    pub fn image(&self, g: usize) -> &Rotation {
        &self.images[g]
    }
}

fn unit(v: Vec3) -> Vec3 {
    normalize(v)
}

/// Standard embeddings: cyclic axis `ẑ`, flip axis `x̂`, tetrahedral
/// three-fold axes along `(±1,±1,±1)`.
///
/// Accepted tags: `trivial`, `Zn`/`Cn`, `Dn`, `tetrahedral`/`A4`,
/// `octahedral`/`S4`, `icosahedral`/`A5`.
pub fn catalog_rep(tag: &str) -> Result<So3Rep> {
    let body = unit([1.0, 1.0, 1.0]);
    let gold = 0.5 * (1.0 + 5f64.sqrt());
    let lower = tag.to_ascii_lowercase();
    match lower.as_str() {
        "trivial" | "1" => So3Rep::from_generators("trivial", &[Rotation::IDENTITY], &["e"]),
        "tetrahedral" | "a4" | "t" => So3Rep::from_generators(
            "tetrahedral",
            &[Rotation::about_z(PI), Rotation::new(body, 2.0 * PI / 3.0)],
            &["a", "b"],
        ),
        "octahedral" | "s4" | "o" => So3Rep::from_generators(
            "octahedral",
            &[Rotation::about_z(FRAC_PI_2), Rotation::new(body, 2.0 * PI / 3.0)],
            &["a", "b"],
        ),
        "icosahedral" | "a5" | "i" => So3Rep::from_generators(
            "icosahedral",
            &[Rotation::new([0.0, 1.0, gold], 2.0 * PI / 5.0), Rotation::new(body, 2.0 * PI / 3.0)],
            &["a", "b"],
        ),
        _ => {
            let (family, n) = parse_family_tag(&lower).ok_or_else(|| Error::UnknownPreset(tag.to_string()))?;
            let name = format!("{}{n}", family.to_ascii_uppercase());
            let turn = Rotation::about_z(2.0 * PI / n as f64);
            match family {
                'z' | 'c' => So3Rep::from_generators(&name, &[turn], &["a"]),
                'd' if n == 1 => So3Rep::from_generators(&name, &[Rotation::about_x(PI)], &["b"]),
                'd' => So3Rep::from_generators(&name, &[turn, Rotation::about_x(PI)], &["a", "b"]),
                _ => Err(Error::UnknownPreset(tag.to_string())),
            }
        }
    }
}

fn parse_family_tag(tag: &str) -> Option<(char, usize)> {
    let mut chars = tag.chars();
    let family = chars.next()?;
    let n: usize = chars.as_str().parse().ok()?;
    (n >= 1 && matches!(family, 'z' | 'c' | 'd')).then_some((family, n))
}

/// Why a candidate quadruple is not an equivariant OEB.
#[derive(Debug, Clone, PartialEq)]
pub enum OebViolation {
    WrongCount(usize),
    NotOrthogonal { i: usize, j: usize, residual: f64 },
    NotPreserved { element: String, index: usize, distance: f64 },
    NotAnAction(String),
    OrbitType { declared: Vec<usize>, found: Vec<usize> },
}

impl fmt::Display for OebViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OebViolation::WrongCount(n) => write!(f, "expected 4 rotations, got {n}"),
            OebViolation::NotOrthogonal { i, j, residual } => {
                write!(f, "elements {i} and {j} are not orthogonal (angle residual {residual:.3e})")
            }
            OebViolation::NotPreserved { element, index, distance } => {
                write!(f, "conjugation by {element} sends element {index} off the set (distance {distance:.3e})")
            }
            OebViolation::NotAnAction(msg) => write!(f, "induced index map is not an action: {msg}"),
            OebViolation::OrbitType { declared, found } => {
                write!(f, "declared orbit type {declared:?}, found {found:?}")
            }
        }
    }
}

impl std::error::Error for OebViolation {}

impl From<OebViolation> for Error {
    fn from(v: OebViolation) -> Error {
        Error::NotAnOeb(v.to_string())
    }
}

/// Angle residual `|angle(r1⁻¹ r2) − π|`, computed stably as
/// `2·asin(|⟨q1, q2⟩|)`.
pub fn orthogonality_residual(r1: &Rotation, r2: &Rotation) -> f64 {
    let (a, b) = (r1.quaternion(), r2.quaternion());
    let d = a.w * b.w + dot(a.v, b.v);
    2.0 * d.abs().min(1.0).asin()
}

/// A verified equivariant OEB together with its index action.
#[derive(Debug, Clone)]
pub struct EquivariantOEB {
    rep: So3Rep,
    elements: Vec<Rotation>,
    tau: GSet,
    family: String,
    parameters: BTreeMap<String, f64>,
    orthogonality_residual: f64,
    closure_residual: f64,
}

/// Checks pairwise orthogonality and closure under conjugation, and
/// recovers the right action `τ(i, g)`: the index of `R_g⁻¹ e_i R_g`.
pub fn verify_oeb(candidate: &[Rotation], rep: &So3Rep) -> std::result::Result<EquivariantOEB, OebViolation> {
    if candidate.len() != 4 {
        return Err(OebViolation::WrongCount(candidate.len()));
    }
    let mut ortho = 0.0f64;
    for i in 0..4 {
        for j in i + 1..4 {
            let residual = orthogonality_residual(&candidate[i], &candidate[j]);
            if residual > TOL {
                return Err(OebViolation::NotOrthogonal { i, j, residual });
            }
            ortho = ortho.max(residual);
        }
    }
    let group = rep.group();
    let mut closure = 0.0f64;
    let mut action = Vec::with_capacity(group.order());
    for g in group.elements() {
        let inv = rep.image(g).inverse();
        let mut row = Vec::with_capacity(4);
        for (i, e) in candidate.iter().enumerate() {
            let moved = e.conjugated_by(&inv);
            let (j, d) = candidate
                .iter()
                .map(|c| moved.ball_distance(c))
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("four elements");
            if d > TOL {
                return Err(OebViolation::NotPreserved { element: group.label(g).to_string(), index: i, distance: d });
            }
            closure = closure.max(d);
            row.push(j);
        }
        action.push(row);
    }
    let points = (0..4).map(|i| i.to_string()).collect();
    let tau = GSet::new(group, points, action, Side::Right).map_err(|e| OebViolation::NotAnAction(e.to_string()))?;
    Ok(EquivariantOEB {
        rep: rep.clone(),
        elements: candidate.to_vec(),
        tau,
        family: "unlabeled".into(),
        parameters: BTreeMap::new(),
        orthogonality_residual: ortho,
        closure_residual: closure,
    })
}

/// Orbit sizes of a finite action, largest first.
pub fn orbit_sizes(x: &GSet) -> Vec<usize> {
    let mut sizes: Vec<usize> = orbits(x).iter().map(Vec::len).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// The multiset of orbit sizes of `τ`, largest first. `(1,3)` and `(3,1)`
/// denote the same multiset.
pub fn orbit_type(oeb: &EquivariantOEB) -> Vec<usize> {
    orbit_sizes(&oeb.tau)
}

fn parse_orbit_label(label: &str) -> Vec<usize> {
    let inner = label.rsplit('(').next().unwrap_or("").trim_end_matches(')');
    let mut v: Vec<usize> = inner.split(',').filter_map(|s| s.trim().parse().ok()).collect();
    v.sort_unstable_by(|a, b| b.cmp(a));
    v
}

impl EquivariantOEB {
    /// Attaches a family tag such as `Z3-(3,1)`; the orbit type in the tag
    /// must match `τ` as a multiset.
    pub fn with_family(mut self, family: &str, parameters: &[(&str, f64)]) -> std::result::Result<Self, OebViolation> {
        let declared = parse_orbit_label(family);
        let found = orbit_type(&self);
        if declared != found {
            return Err(OebViolation::OrbitType { declared, found });
        }
        self.family = family.to_string();
        self.parameters = parameters.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        Ok(self)
    }

    pub fn rep(&self) -> &So3Rep {
        &self.rep
    }

    pub fn group(&self) -> &FiniteGroup {
        self.rep.group()
    }

    pub fn elements(&self) -> &[Rotation] {
        &self.elements
    }

    pub fn tau(&self) -> &GSet {
        &self.tau
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn parameters(&self) -> &BTreeMap<String, f64> {
        &self.parameters
    }

    pub fn orthogonality_residual(&self) -> f64 {
        self.orthogonality_residual
    }

    pub fn closure_residual(&self) -> f64 {
        self.closure_residual
    }

    /// Re-verifies the same four rotations against another representation.
    pub fn reverify(&self, rep: &So3Rep) -> std::result::Result<EquivariantOEB, OebViolation> {
        verify_oeb(&self.elements, rep)
    }

    /// Same underlying set of rotations, in any order.
    pub fn same_set(&self, other: &EquivariantOEB) -> bool {
        same_rotation_set(&self.elements, &other.elements)
    }

    pub fn ball_csv(&self) -> String {
        ball_points_csv(&self.elements)
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "family": self.family,
            "group": self.group().name(),
            "parameters": self.parameters,
            "elements": self.elements,
            "tau": self.tau.to_json_labeled(self.group()),
            "orbit_type": orbit_type(self),
            "residuals": {
                "orthogonality": self.orthogonality_residual,
                "closure": self.closure_residual,
            },
            "tolerance": TOL,
        })
    }
}

pub fn same_rotation_set(a: &[Rotation], b: &[Rotation]) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| x.ball_distance(y) < TOL))
        && b.iter().all(|y| a.iter().any(|x| x.ball_distance(y) < TOL))
}

/// Number of pairwise distinct rotation sets.
pub fn count_distinct(list: &[EquivariantOEB]) -> usize {
    let mut reps: Vec<&EquivariantOEB> = Vec::new();
    for o in list {
        if !reps.iter().any(|r| r.same_set(o)) {
            reps.push(o);
        }
    }
    reps.len()
}

fn planar(phi: f64) -> Vec3 {
    [phi.cos(), phi.sin(), 0.0]
}

fn finish(elements: &[Rotation], rep: &So3Rep, family: &str, parameters: &[(&str, f64)]) -> Result<EquivariantOEB> {
    Ok(verify_oeb(elements, rep)?.with_family(family, parameters)?)
}

fn z2_1111_points(theta_z: f64, phi: f64) -> Vec<Rotation> {
    let on_axis = Rotation::about_z(theta_z);
    vec![
        on_axis,
        orthogonal_partner_on_axis(&on_axis),
        Rotation::new(planar(phi), PI),
        Rotation::new(planar(phi + FRAC_PI_2), PI),
    ]
}

/// Two rotations about `ẑ` and two half-turns about orthogonal planar axes.
pub fn z2_oeb_1111(theta_z: f64, phi: f64) -> Result<EquivariantOEB> {
    finish(&z2_1111_points(theta_z, phi), &catalog_rep("Z2")?, "Z2-(1,1,1,1)", &[("theta_z", theta_z), ("phi", phi)])
}

/// Cosine-squared of the half angle that makes two rotations at central
/// angle `theta` orthogonal: `cos θ / (cos θ − 1)`.
pub fn half_angle_cos_sq(theta: f64) -> f64 {
    let c = theta.cos();
    (c / (c - 1.0)).clamp(0.0, 1.0)
}

/// Rotation angle of a 2-orbit with central angle `theta`.
pub fn two_orbit_angle(theta: f64) -> f64 {
    2.0 * half_angle_cos_sq(theta).sqrt().acos()
}

/// Central angle in `[π/2, π]` of a 2-orbit whose rotations have angle `r`,
/// by bisection on `c²(r/2)(cos θ − 1) − cos θ`, which increases on that
/// interval.
pub fn central_angle_for(r: f64) -> Result<f64> {
    let c2 = (0.5 * r).cos().powi(2);
    if c2 > 0.5 + 1e-12 {
        return Err(Error::NoSolutionInFamily(format!("rotation angle {r} is below π/2; no orthogonal 2-orbit")));
    }
    let f = |t: f64| c2 * (t.cos() - 1.0) - t.cos();
    endpoint_or_bisect(f, FRAC_PI_2, PI)
        .ok_or_else(|| Error::NoSolutionInFamily(format!("no central angle for r = {r}")))
}

/// Bisection that first accepts an endpoint lying on the root, where
/// rounding can hide the sign change.
fn endpoint_or_bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
    if f(lo).abs() < 1e-14 {
        return Some(lo);
    }
    if f(hi).abs() < 1e-14 {
        return Some(hi);
    }
    bisect(f, lo, hi, 1e-15)
}

/// Signed angle `z` of a rotation about `ẑ` orthogonal to `r(r, n̂)` with
/// `n̂_z = cos_polar`: root of `cos(z/2)c + sin(z/2)s·cos_polar` on `[−π, π]`.
fn axis_height(r: f64, cos_polar: f64) -> Result<f64> {
    let (s, c) = (0.5 * r).sin_cos();
    let f = |z: f64| (0.5 * z).cos() * c + (0.5 * z).sin() * s * cos_polar;
    let z = endpoint_or_bisect(f, -PI, PI)
        .ok_or_else(|| Error::NoSolutionInFamily("no orthogonal point on the axis".into()))?;
    if f(z).abs() > 1e-10 {
        return Err(Error::NoSolutionInFamily(format!("axis height residual {:.3e}", f(z))));
    }
    Ok(z)
}

const EDGE: f64 = 1e-12;

/// A 2-orbit in the plane through `ẑ` orthogonal to `x̂(φ)`, the half-turn
/// about `x̂(φ)`, and a rotation on `ẑ`. `theta` is the central angle of the
/// 2-orbit, in `[π/2, 3π/2]`.
pub fn z2_oeb_211(theta: f64, phi: f64) -> Result<EquivariantOEB> {
    if !(FRAC_PI_2 - EDGE..=1.5 * PI + EDGE).contains(&theta) {
        return Err(Error::NoSolutionInFamily(format!("central angle {theta} lies outside [π/2, 3π/2]")));
    }
    let r = two_orbit_angle(theta);
    let (sh, ch) = (0.5 * theta).sin_cos();
    let y = planar(phi + FRAC_PI_2);
    let axis = |sign: f64| [sign * sh * y[0], sign * sh * y[1], ch];
    let z1 = axis_height(r, ch)?;
    let points = vec![
        Rotation::about_z(z1),
        Rotation::new(planar(phi), PI),
        Rotation::new(axis(1.0), r),
        Rotation::new(axis(-1.0), r),
    ];
    finish(&points, &catalog_rep("Z2")?, "Z2-(2,1,1)", &[("theta", theta), ("phi", phi)])
}

/// Which side of the `xy`-plane the `yz`-plane orbit lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    #[default]
    Below,
    Above,
}

/// Closed form for the partner angle: `r1 = 2·acos(√(1/2 − c²(r2/2)))`.
pub fn z22_partner_angle(r2: f64) -> f64 {
    let c = (0.5 * r2).cos();
    2.0 * (0.5 - c * c).max(0.0).sqrt().acos()
}

/// Two 2-orbits in orthogonal planes through `ẑ`: `O1` (angle `r1`, in the
/// `x̂(φ)ẑ`-plane) and `O2` (angle `r2`, in the `ŷ(φ)ẑ`-plane).
pub fn z2_oeb_22(r2: f64, phi: f64, parity: Parity) -> Result<EquivariantOEB> {
    if !(FRAC_PI_2 - EDGE..=PI + EDGE).contains(&r2) {
        return Err(Error::NoSolutionInFamily(format!("r2 = {r2} lies outside [π/2, π]")));
    }
    let r1 = z22_partner_angle(r2);
    let theta1 = central_angle_for(r1)?;
    let theta2 = 2.0 * PI - central_angle_for(r2)?;
    let flip = if parity == Parity::Below { 1.0 } else { -1.0 };
    let (x, y) = (planar(phi), planar(phi + FRAC_PI_2));
    let axis = |dir: Vec3, t: f64, sign: f64| {
        let (s, c) = (0.5 * t).sin_cos();
        [sign * s * dir[0], sign * s * dir[1], flip * c]
    };
    let points = vec![
        Rotation::new(axis(x, theta1, 1.0), r1),
        Rotation::new(axis(x, theta1, -1.0), r1),
        Rotation::new(axis(y, theta2, 1.0), r2),
        Rotation::new(axis(y, theta2, -1.0), r2),
    ];
    let parity_value = if parity == Parity::Below { 0.0 } else { 1.0 };
    finish(&points, &catalog_rep("Z2")?, "Z2-(2,2)", &[("r2", r2), ("phi", phi), ("r1", r1), ("parity", parity_value)])
}

/// `asin(√(2/3))`, the lower end of the polar-angle domain of the Z3 family.
pub fn z3_polar_min() -> f64 {
    (2.0f64 / 3.0).sqrt().asin()
}

/// Rotation angle of the 3-orbit at polar angle `psi`.
pub fn z3_orbit_angle(psi: f64) -> f64 {
    2.0 * ((2.0f64).sqrt() / (3.0f64.sqrt() * psi.sin())).min(1.0).asin()
}

/// A 3-orbit at polar angle `psi` and azimuths `φ + 2πk/3`, plus one
/// rotation on `ẑ` on the other side of the `xy`-plane.
pub fn z3_oeb_31(psi: f64, phi: f64) -> Result<EquivariantOEB> {
    let lo = z3_polar_min();
    if !(lo - EDGE..=PI - lo + EDGE).contains(&psi) {
        return Err(Error::NoSolutionInFamily(format!("polar angle {psi} lies outside [{lo:.6}, {:.6}]", PI - lo)));
    }
    let r = z3_orbit_angle(psi);
    let z = axis_height(r, psi.cos())?;
    let mut points = vec![Rotation::about_z(z)];
    for k in 0..3 {
        let az = phi + 2.0 * PI * k as f64 / 3.0;
        points.push(Rotation::new([psi.sin() * az.cos(), psi.sin() * az.sin(), psi.cos()], r));
    }
    finish(&points, &catalog_rep("Z3")?, "Z3-(3,1)", &[("psi", psi), ("phi", phi), ("z", z)])
}

/// The Z2 `(1,1,1,1)` point set, under `Z4 = ⟨r(π/2, ẑ)⟩`.
pub fn z4_oeb_211(theta_z: f64, phi: f64) -> Result<EquivariantOEB> {
    finish(&z2_1111_points(theta_z, phi), &catalog_rep("Z4")?, "Z4-(2,1,1)", &[("theta_z", theta_z), ("phi", phi)])
}

fn relabel(base: &EquivariantOEB, rep: &So3Rep, family: &str) -> Result<EquivariantOEB> {
    let params: Vec<(&str, f64)> = base.parameters.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    Ok(base.reverify(rep)?.with_family(family, &params)?)
}

fn sign_vertices(even: bool) -> Vec<Vec3> {
    let mut out = Vec::new();
    for sx in [1.0, -1.0] {
        for sy in [1.0, -1.0] {
            for sz in [1.0, -1.0] {
                if (sx * sy * sz > 0.0) == even {
                    out.push(unit([sx, sy, sz]));
                }
            }
        }
    }
    out
}

/// The `2π/3`-rotations about the vertices of one of the two tetrahedra
/// inscribed in the cube `(±1,±1,±1)`.
pub fn tetrahedron_points(even: bool) -> Vec<Rotation> {
    sign_vertices(even).into_iter().map(|v| Rotation::new(v, 2.0 * PI / 3.0)).collect()
}

/// The complete list of equivariant OEBs for a group with finitely many,
/// following the subgroup case analysis. Each entry is verified, and the
/// list is reduced to distinct sets.
pub fn discrete_catalog(tag: &str) -> Result<Vec<EquivariantOEB>> {
    let rep = catalog_rep(tag)?;
    let name = rep.group().name().to_string();
    let list = match name.as_str() {
        "D2" => {
            let mut v = vec![relabel(&z2_oeb_1111(0.0, 0.0)?, &rep, "D2-(1,1,1,1)")?];
            for base in [
                z2_oeb_1111(FRAC_PI_2, 0.0)?,
                z2_oeb_1111(0.0, FRAC_PI_4)?,
                z2_oeb_211(PI, 0.0)?,
                z2_oeb_211(PI, FRAC_PI_2)?,
                z2_oeb_211(FRAC_PI_2, 0.0)?,
                z2_oeb_211(FRAC_PI_2, FRAC_PI_2)?,
            ] {
                v.push(relabel(&base, &rep, "D2-(2,1,1)")?);
            }
            for base in [
                z2_oeb_1111(FRAC_PI_2, FRAC_PI_4)?,
                z2_oeb_22(PI, 0.0, Parity::Below)?,
                z2_oeb_22(FRAC_PI_2, 0.0, Parity::Below)?,
            ] {
                v.push(relabel(&base, &rep, "D2-(2,2)")?);
            }
            for parity in [Parity::Below, Parity::Above] {
                let base = z2_oeb_22(2.0 * PI / 3.0, FRAC_PI_4, parity)?;
                v.push(relabel(&base, &rep, "D2-(4)")?);
            }
            v
        }
        "D3" => d3_solutions(&rep)?,
        "D4" => {
            let mut v = Vec::new();
            for (theta_z, label) in [(0.0, "D4-(2,1,1)"), (FRAC_PI_2, "D4-(2,2)")] {
                for phi in [0.0, FRAC_PI_4] {
                    v.push(relabel(&z4_oeb_211(theta_z, phi)?, &rep, label)?);
                }
            }
            v
        }
        "tetrahedral" => [true, false]
            .into_iter()
            .map(|even| finish(&tetrahedron_points(even), &rep, "Tetrahedral-(4)", &[]))
            .collect::<Result<_>>()?,
        "octahedral" => vec![finish(&z2_1111_points(0.0, 0.0), &rep, "Octahedral-(1,3)", &[])?],
        _ => return Err(Error::InvalidInput(format!("`{tag}` is not one of D2, D3, D4, tetrahedral, octahedral"))),
    };
    let mut distinct: Vec<EquivariantOEB> = Vec::new();
    for o in list {
        if !distinct.iter().any(|d| d.same_set(&o)) {
            distinct.push(o);
        }
    }
    Ok(distinct)
}

/// D3 solutions restrict to Z3 `(3,1)` solutions whose axis point is fixed
/// by the flip, so it is `0` (polar angle `asin√(2/3)`) or `π` (polar angle
/// `π/2`). Symmetric triangle orientations are multiples of `π/6`; every
/// orientation that survives verification is kept.
fn d3_solutions(rep: &So3Rep) -> Result<Vec<EquivariantOEB>> {
    let mut out = Vec::new();
    for psi in [z3_polar_min(), FRAC_PI_2] {
        for k in 0..12 {
            let base = z3_oeb_31(psi, k as f64 * PI / 6.0)?;
            if let Ok(o) = base.reverify(rep) {
                let params: Vec<(&str, f64)> = base.parameters.iter().map(|(k, v)| (k.as_str(), *v)).collect();
                out.push(o.with_family("D3-(3,1)", &params)?);
            }
        }
    }
    Ok(out)
}

/// Outcome of a seeded random search for equivariant OEBs.
#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub trials: usize,
    pub seed: u64,
    pub passing: usize,
    /// Smallest worst-case closure distance seen over all trials.
    pub best_closure_distance: f64,
}

/// A structured refusal for a group with no equivariant OEB.
#[derive(Debug, Clone, Serialize)]
pub struct Refusal {
    pub group: String,
    pub reason: String,
    pub via_subgroup: Option<String>,
    /// Heuristic sanity check only; the argument is in `reason`.
    pub search: Option<SearchReport>,
}

fn cyclic_reason(n: usize) -> String {
    if n % 2 == 1 {
        format!(
            "only orbit sizes 1 and {n} occur; four 1-orbits would put four mutually \
             orthogonal rotations on the cyclic axis, where at most two fit"
        )
    } else if n == 6 {
        "orbit sizes are 1, 3 and 6; one 1-orbit and one 3-orbit would need three \
         half-turns about planar axes 60 degrees apart, which are not orthogonal"
            .into()
    } else if n == 8 {
        "orbit sizes are 1, 4 and 8; a 4-orbit of half-turns about planar axes 45 degrees \
         apart is not pairwise orthogonal"
            .into()
    } else {
        format!(
            "off-axis orbit sizes are {} or {n}, both above 4, and four 1-orbits cannot \
             share the cyclic axis",
            n / 2
        )
    }
}

/// Refuses `Zn`/`Dn` with `n ≥ 5` and the icosahedral group, optionally
/// backed by `trials` random candidates.
pub fn nonexistence_certificate(tag: &str, trials: usize, seed: u64) -> Result<Refusal> {
    let rep = catalog_rep(tag)?;
    let name = rep.group().name().to_string();
    let (reason, via) = if name == "icosahedral" {
        (format!("restriction to a D5 subgroup, which admits none: {}", cyclic_reason(5)), Some("D5".to_string()))
    } else {
        match parse_family_tag(&name.to_ascii_lowercase()) {
            Some(('z', n)) if n >= 5 => (cyclic_reason(n), None),
            Some(('d', n)) if n >= 5 => (
                format!("restriction to the cyclic subgroup Z{n}, which admits none: {}", cyclic_reason(n)),
                Some(format!("Z{n}")),
            ),
            _ => return Err(Error::InvalidInput(format!("{name} has equivariant OEBs; no refusal applies"))),
        }
    };
    let search = (trials > 0).then(|| random_search(&rep, trials, seed));
    if let Some(s) = &search {
        if s.passing > 0 {
            return Err(Error::InvalidInput(format!(
                "random search found {} passing candidates for {name}",
                s.passing
            )));
        }
    }
    Ok(Refusal { group: name, reason, via_subgroup: via, search })
}

/// A uniformly random orthonormal frame of `R⁴`, read as four rotations.
pub fn random_oeb(rng: &mut impl Rng) -> Vec<Rotation> {
    let mut frame: Vec<[f64; 4]> = Vec::with_capacity(4);
    while frame.len() < 4 {
        let mut v: [f64; 4] = std::array::from_fn(|_| gaussian(rng));
        for u in &frame {
            let d: f64 = (0..4).map(|k| u[k] * v[k]).sum();
            for k in 0..4 {
                v[k] -= d * u[k];
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            frame.push(v.map(|x| x / n));
        }
    }
    frame.into_iter().map(|q| Rotation::from_quaternion(Quaternion { w: q[0], v: [q[1], q[2], q[3]] })).collect()
}

fn random_search(rep: &So3Rep, trials: usize, seed: u64) -> SearchReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens: Vec<Rotation> = rep.group().generators().iter().map(|&g| rep.image(g).inverse()).collect();
    let mut best = f64::INFINITY;
    let mut passing = 0;
    for _ in 0..trials {
        let cand = random_oeb(&mut rng);
        let mut worst = 0.0f64;
        for g in &gens {
            for e in &cand {
                let moved = e.conjugated_by(g);
                let d = cand.iter().map(|c| moved.ball_distance(c)).fold(f64::INFINITY, f64::min);
                worst = worst.max(d);
            }
        }
        best = best.min(worst);
        if worst < TOL && verify_oeb(&cand, rep).is_ok() {
            passing += 1;
        }
    }
    SearchReport { trials, seed, passing, best_closure_distance: best }
}

/// How a row of the classification is populated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionKind {
    AnyUeb,
    TwoParameterFamily,
    Isolated,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Entry {
    pub orbit_type: String,
    pub kind: SolutionKind,
    /// Number of verified constructions (samples or catalog entries).
    pub verified: usize,
    /// Distinct sets, for isolated solutions.
    pub distinct: Option<usize>,
    pub max_orthogonality_residual: f64,
    pub max_closure_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Row {
    pub image_class: String,
    pub entries: Vec<Table1Entry>,
    pub refusals: Vec<Refusal>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Table1Report {
    pub seed: u64,
    pub samples: usize,
    pub search_trials: usize,
    pub tolerance: f64,
    pub rows: Vec<Table1Row>,
}

fn sampled_entry(
    label: &str,
    kind: SolutionKind,
    samples: usize,
    mut make: impl FnMut() -> Result<EquivariantOEB>,
) -> Result<Table1Entry> {
    let (mut ortho, mut clos) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        let o = make()?;
        ortho = ortho.max(o.orthogonality_residual);
        clos = clos.max(o.closure_residual);
    }
    Ok(Table1Entry {
        orbit_type: label.into(),
        kind,
        verified: samples,
        distinct: None,
        max_orthogonality_residual: ortho,
        max_closure_residual: clos,
    })
}

fn catalog_entries(tag: &str) -> Result<Vec<Table1Entry>> {
    let list = discrete_catalog(tag)?;
    let mut labels: Vec<String> = Vec::new();
    for o in &list {
        let label = o.family.split_once('-').map(|(_, t)| t.to_string()).unwrap_or_default();
        if !labels.contains(&label) {
            labels.push(label);
        }
    }
    Ok(labels
        .into_iter()
        .map(|label| {
            let group: Vec<EquivariantOEB> = list.iter().filter(|o| o.family.ends_with(&label)).cloned().collect();
            Table1Entry {
                orbit_type: label,
                kind: SolutionKind::Isolated,
                verified: group.len(),
                distinct: Some(count_distinct(&group)),
                max_orthogonality_residual: group.iter().map(|o| o.orthogonality_residual).fold(0.0, f64::max),
                max_closure_residual: group.iter().map(|o| o.closure_residual).fold(0.0, f64::max),
            }
        })
        .collect())
}

/// Rebuilds the qubit classification: samples every continuous family,
/// enumerates every finite list, and refuses the empty rows.
pub fn table1(samples: usize, search_trials: usize, seed: u64) -> Result<Table1Report> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let angle = |rng: &mut ChaCha8Rng| rng.gen_range(-PI..PI);

    let trivial = catalog_rep("trivial")?;
    rows.push(Table1Row {
        image_class: "Trivial".into(),
        entries: vec![sampled_entry("(1,1,1,1)", SolutionKind::AnyUeb, samples, || {
            finish(&random_oeb(&mut rng), &trivial, "trivial-(1,1,1,1)", &[])
        })?],
        refusals: vec![],
    });

    let mut z2 = Vec::new();
    z2.push(sampled_entry("(1,1,1,1)", SolutionKind::TwoParameterFamily, samples, || {
        z2_oeb_1111(angle(&mut rng), angle(&mut rng))
    })?);
    z2.push(sampled_entry("(2,1,1)", SolutionKind::TwoParameterFamily, samples, || {
        z2_oeb_211(rng.gen_range(FRAC_PI_2..=1.5 * PI), angle(&mut rng))
    })?);
    z2.push(sampled_entry("(2,2)", SolutionKind::TwoParameterFamily, samples, || {
        let parity = if rng.gen_bool(0.5) { Parity::Below } else { Parity::Above };
        z2_oeb_22(rng.gen_range(FRAC_PI_2..=PI), angle(&mut rng), parity)
    })?);
    rows.push(Table1Row { image_class: "Z2".into(), entries: z2, refusals: vec![] });

    let lo = z3_polar_min();
    rows.push(Table1Row {
        image_class: "Z3".into(),
        entries: vec![sampled_entry("(3,1)", SolutionKind::TwoParameterFamily, samples, || {
            z3_oeb_31(rng.gen_range(lo..=PI - lo), angle(&mut rng))
        })?],
        refusals: vec![],
    });
    rows.push(Table1Row {
        image_class: "Z4".into(),
        entries: vec![sampled_entry("(2,1,1)", SolutionKind::TwoParameterFamily, samples, || {
            z4_oeb_211(angle(&mut rng), angle(&mut rng))
        })?],
        refusals: vec![],
    });

    let mut salt = 0u64;
    let mut refuse = |tags: &[&str]| -> Result<Vec<Refusal>> {
        tags.iter()
            .map(|t| {
                salt += 1;
                nonexistence_certificate(t, search_trials, seed.wrapping_add(salt))
            })
            .collect()
    };
    rows.push(Table1Row {
        image_class: "Zn, n>=5".into(),
        entries: vec![],
        refusals: refuse(&["Z5", "Z6", "Z7", "Z8", "Z9"])?,
    });
    for (class, tag) in [("D2", "D2"), ("D3", "D3"), ("D4", "D4")] {
        rows.push(Table1Row { image_class: class.into(), entries: catalog_entries(tag)?, refusals: vec![] });
    }
    rows.push(Table1Row {
        image_class: "Dn, n>=5".into(),
        entries: vec![],
        refusals: refuse(&["D5", "D6", "D7", "D8"])?,
    });
    rows.push(Table1Row {
        image_class: "Tetrahedral (A4)".into(),
        entries: catalog_entries("tetrahedral")?,
        refusals: vec![],
    });
    rows.push(Table1Row {
        image_class: "Octahedral (S4)".into(),
        entries: catalog_entries("octahedral")?,
        refusals: vec![],
    });
    rows.push(Table1Row {
        image_class: "Icosahedral (A5)".into(),
        entries: vec![],
        refusals: refuse(&["icosahedral"])?,
    });
    Ok(Table1Report { seed, samples, search_trials, tolerance: TOL, rows })
}

impl Table1Report {
    pub fn row(&self, class: &str) -> Option<&Table1Row> {
        self.rows.iter().find(|r| r.image_class == class)
    }

    pub fn to_markdown(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        writeln!(
            out,
            "seed {}, {} samples per family, {} search trials, tolerance {:e}\n",
            self.seed, self.samples, self.search_trials, self.tolerance
        )
        .unwrap();
        out.push_str("| image class | orbit type | solutions | verified | max residual |\n");
        out.push_str("|---|---|---|---|---|\n");
        for row in &self.rows {
            for e in &row.entries {
                let desc = match (e.kind, e.distinct) {
                    (SolutionKind::AnyUeb, _) => "any UEB".to_string(),
                    (SolutionKind::TwoParameterFamily, _) => "2-parameter family".to_string(),
                    (SolutionKind::Isolated, Some(n)) => format!("{n} isolated"),
                    (SolutionKind::Isolated, None) => "isolated".to_string(),
                };
                writeln!(
                    out,
                    "| {} | {} | {} | {} | {:.1e} |",
                    row.image_class,
                    e.orbit_type,
                    desc,
                    e.verified,
                    e.max_orthogonality_residual.max(e.max_closure_residual)
                )
                .unwrap();
            }
            for r in &row.refusals {
                writeln!(out, "| {} | none | refused ({}) | - | - |", row.image_class, r.group).unwrap();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests;
