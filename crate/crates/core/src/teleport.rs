//! State-vector simulation of teleportation with a unitary error basis,
//! with and without a reference-frame misalignment between the parties.
//!
//! Everything is described in Alice's frame. Bob's frame is `g` times
//! Alice's, so a correction `V` he applies in his frame acts as
//! `ρ(g)† V ρ(g)`, and a message he reads off the channel is `σ(g, i)`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::channel::{compatible_channel_for, max_pairwise_tv, transmit, Transmission, UnspeakableChannel};
use crate::error::{Error, Result};
use crate::numeric::TOL;
use crate::ueb::{EquivariantUeb, Ueb};
use crate::unitary::{
    bell_state, invariance_phase_system, invariant_entangled_state, ComplexMatrix, PureState, Representation, C64, ZERO,
};

/// Everything both parties agree on before the protocol runs.
#[derive(Debug, Clone)]
pub struct ProtocolSpec {
    rho: Representation,
    alice_half: Representation,
    bob_half: Representation,
    twist: ComplexMatrix,
    resource_phase: Vec<C64>,
    eueb: EquivariantUeb,
    channel: UnspeakableChannel,
}

fn same_up_to_scalars(a: &Representation, b: &Representation) -> bool {
    a.group()
        .elements()
        .all(|g| a.image(g).scalar_multiple_of(b.image(g), TOL).is_some_and(|z| (z.norm() - 1.0).abs() < TOL))
}

impl ProtocolSpec {
    /// Checks that the resource `(1 ⊗ X)|Bell⟩` is invariant up to phase
    /// under `alice_half ⊗ bob_half`, that Bob's half transforms like the
    /// system up to a character, and that the channel reads `τ⁻¹`.
    pub fn new(
        rho: Representation,
        alice_half: Representation,
        bob_half: Representation,
        twist: ComplexMatrix,
        eueb: EquivariantUeb,
        channel: UnspeakableChannel,
    ) -> Result<Self> {
        let spec = Self::new_unchecked(rho, alice_half, bob_half, twist, eueb, channel)?;
        spec.check_channel()?;
        Ok(spec)
    }

    /// Like [`ProtocolSpec::new`] but accepts any channel over the group.
    /// Used to exhibit what goes wrong with an incompatible one.
    pub fn new_unchecked(
        rho: Representation,
        alice_half: Representation,
        bob_half: Representation,
        twist: ComplexMatrix,
        eueb: EquivariantUeb,
        channel: UnspeakableChannel,
    ) -> Result<Self> {
        let n = rho.dim();
        for (what, r) in [("Alice's half", &alice_half), ("Bob's half", &bob_half), ("basis", eueb.rep())] {
            if r.dim() != n {
                return Err(Error::DimensionMismatch(format!("{what} has dimension {}, system has {n}", r.dim())));
            }
            if r.group().table() != rho.group().table() {
                return Err(Error::GroupMismatch(r.group().name().into(), rho.group().name().into()));
            }
        }
        if channel.group().table() != rho.group().table() {
            return Err(Error::GroupMismatch(channel.group().name().into(), rho.group().name().into()));
        }
        if !same_up_to_scalars(eueb.rep(), &rho) {
            return Err(Error::InvalidInput("the basis was verified against a different representation".into()));
        }
        if !same_up_to_scalars(&bob_half, &rho) {
            return Err(Error::InvalidInput("Bob's half must carry ρ up to a one-dimensional factor".into()));
        }
        if channel.len() != eueb.ueb().len() {
            return Err(Error::IncompatibleChannel(format!(
                "channel has {} messages, basis has {} elements",
                channel.len(),
                eueb.ueb().len()
            )));
        }
        let resource_phase = invariance_phase_system(&alice_half, &bob_half, &twist)?.ok_or_else(|| {
            Error::InvalidInput("the shared resource is not invariant under the frame transformations".into())
        })?;
        Ok(ProtocolSpec { rho, alice_half, bob_half, twist, resource_phase, eueb, channel })
    }

    /// Default setup: Alice's half carries `ρ*`, Bob's `ρ`, the resource is
    /// found by search, and the channel is built from the reference-frame
    /// channel.
    pub fn from_eueb(eueb: EquivariantUeb) -> Result<Self> {
        let rho = eueb.rep().clone();
        let alice = rho.dual();
        let (twist, _) = invariant_entangled_state(&alice, &rho)?
            .ok_or_else(|| Error::Refused("no invariant maximally entangled resource".into()))?;
        let channel = compatible_channel_for(rho.group(), eueb.tau(), None)?;
        Self::new(rho.clone(), alice, rho, twist, eueb, channel)
    }

    fn check_channel(&self) -> Result<()> {
        let group = self.rho.group();
        let tau_inv = self.eueb.tau_inverse();
        for g in group.elements() {
            if self.channel.sigma().permutation(g) != tau_inv.permutation(g) {
                return Err(Error::IncompatibleChannel(format!(
                    "channel action at {} is {:?}, but a correct protocol needs τ⁻¹ = {:?}",
                    group.label(g),
                    self.channel.sigma().permutation(g),
                    tau_inv.permutation(g)
                )));
            }
        }
        Ok(())
    }

    pub fn is_compatible(&self) -> bool {
        self.check_channel().is_ok()
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &Representation {
        &self.rho
    }

    pub fn alice_half(&self) -> &Representation {
        &self.alice_half
    }

    pub fn bob_half(&self) -> &Representation {
        &self.bob_half
    }

    pub fn twist(&self) -> &ComplexMatrix {
        &self.twist
    }

    /// `θ` with `(ρ_A ⊗ ρ_B)(g)` acting on the resource as `θ(g)`.
    pub fn resource_phase(&self) -> &[C64] {
        &self.resource_phase
    }

    pub fn eueb(&self) -> &EquivariantUeb {
        &self.eueb
    }

    pub fn channel(&self) -> &UnspeakableChannel {
        &self.channel
    }

    pub fn to_json(&self) -> serde_json::Value {
        let group = self.rho.group();
        json!({
            "rho": self.rho.to_json(),
            "alice_half": self.alice_half.images(),
            "bob_half": self.bob_half.images(),
            "twist": self.twist,
            "basis": self.eueb.to_json(),
            "channel": self.channel.to_json(),
            "group": group.name(),
        })
    }

    /// Reads `rho` (a representation), optional `alice_half`/`bob_half`
    /// image lists over the same group, optional `twist`, and `elements`
    /// (the basis). Missing halves default to `ρ*` and `ρ`, a missing twist
    /// is found by search and the channel is always rebuilt from `τ`.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let rho =
            Representation::from_json(value.get("rho").ok_or_else(|| Error::InvalidInput("missing `rho`".into()))?)?;
        let half = |key: &str, default: Representation| -> Result<Representation> {
            match value.get(key) {
                Some(v) => {
                    let images: Vec<ComplexMatrix> = serde_json::from_value(v.clone())?;
                    Representation::new(rho.group().clone(), images)
                }
                None => Ok(default),
            }
        };
        let alice = half("alice_half", rho.dual())?;
        let bob = half("bob_half", rho.clone())?;
        let basis = value
            .get("basis")
            .or_else(|| value.get("elements").map(|_| value))
            .ok_or_else(|| Error::InvalidInput("missing `basis`".into()))?;
        let ueb = Ueb::from_json(basis)?;
        let eueb = crate::ueb::verify_equivariant(&ueb, &rho)?;
        let twist = match value.get("twist") {
            Some(v) => serde_json::from_value(v.clone())?,
            None => {
                invariant_entangled_state(&alice, &bob)?
                    .ok_or_else(|| Error::Refused("no invariant maximally entangled resource".into()))?
                    .0
            }
        };
        let channel = compatible_channel_for(rho.group(), eueb.tau(), None)?;
        Self::new(rho, alice, bob, twist, eueb, channel)
    }
}

/// `|φ_i⟩ = (1 ⊗ Xᵀ U_iᵀ)|Bell⟩`, checked orthonormal.
pub fn measurement_basis(elements: &[ComplexMatrix], twist: &ComplexMatrix) -> Result<Vec<PureState>> {
    let n = twist.rows();
    let bell = bell_state(n);
    let basis: Vec<PureState> = elements
        .iter()
        .map(|u| {
            if u.dims() != (n, n) {
                return Err(Error::DimensionMismatch(format!("{:?} vs {n}x{n}", u.dims())));
            }
            let m = &twist.transpose() * &u.transpose();
            Ok(bell.evolve(&ComplexMatrix::identity(n).tensor(&m)))
        })
        .collect::<Result<_>>()?;
    let residual = gram_residual(&basis);
    if basis.len() != n * n || residual > TOL {
        return Err(Error::NotAUeb(format!(
            "measurement vectors are not an orthonormal basis (Gram residual {residual:.3e})"
        )));
    }
    Ok(basis)
}

/// `max |⟨φ_i|φ_j⟩ − δ_ij|`.
pub fn gram_residual(basis: &[PureState]) -> f64 {
    let mut r = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            r = r.max((a.inner(b) - C64::new(want, 0.0)).norm());
        }
    }
    r
}

/// How Alice's outcome is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Forced(usize),
    /// Born sampling by inverse CDF from this seed.
    Sampled(u64),
}

#[derive(Debug, Clone, Serialize)]
pub struct Transcript {
    pub input: Vec<[f64; 2]>,
    pub outcome: usize,
    pub probability: f64,
    pub wire: Option<Transmission>,
    pub received: usize,
    pub correction: usize,
    pub output: Vec<[f64; 2]>,
    pub g: Option<String>,
    pub g_receive: Option<String>,
    pub fidelity: f64,
}

impl Transcript {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data serializes")
    }
}

fn amps(s: &PureState) -> Vec<[f64; 2]> {
    s.amplitudes().iter().map(|z| [z.re, z.im]).collect()
}

/// Bob's unnormalized state after Alice sees outcome `i`:
/// `(⟨φ_i| ⊗ 1)(|ψ⟩ ⊗ (1 ⊗ X)|Bell⟩)`.
pub fn bob_branch(psi: &PureState, phi: &PureState, twist: &ComplexMatrix) -> Vec<C64> {
    let n = psi.dim();
    let resource = bell_state(n).evolve(&ComplexMatrix::identity(n).tensor(twist));
    let r = resource.amplitudes();
    let p = phi.amplitudes();
    let mut out = vec![ZERO; n];
    for (b, o) in out.iter_mut().enumerate() {
        for s in 0..n {
            for a in 0..n {
                *o += p[s * n + a].conj() * psi.amplitudes()[s] * r[a * n + b];
            }
        }
    }
    out
}

/// `max |b_i − λ (1/n) U_i† ψ|` over outcomes, with `λ` the best phase.
pub fn post_measurement_residual(psi: &PureState, ueb: &Ueb, twist: &ComplexMatrix) -> Result<f64> {
    let basis = measurement_basis(ueb.elements(), twist)?;
    let n = psi.dim() as f64;
    let mut worst = 0.0f64;
    for (u, phi) in ueb.elements().iter().zip(&basis) {
        let b = bob_branch(psi, phi, twist);
        let want = u.dagger().apply(psi.amplitudes());
        let ip: C64 = want.iter().zip(&b).map(|(w, x)| w.conj() * x).sum();
        let lambda = if ip.norm() > 0.0 { ip / ip.norm() } else { C64::new(1.0, 0.0) };
        for (w, x) in want.iter().zip(&b) {
            worst = worst.max((x - lambda * w / n).norm());
        }
    }
    Ok(worst)
}

fn pick_outcome(probs: &[f64], outcome: Outcome) -> Result<usize> {
    match outcome {
        Outcome::Forced(i) if i < probs.len() => Ok(i),
        Outcome::Forced(i) => Err(Error::InvalidInput(format!("outcome {i} out of range"))),
        Outcome::Sampled(seed) => Ok(sample_index(probs, &mut ChaCha8Rng::seed_from_u64(seed))),
    }
}

fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.gen::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

struct Branches {
    bob: Vec<Vec<C64>>,
    probs: Vec<f64>,
}

fn branches(psi: &PureState, elements: &[ComplexMatrix], twist: &ComplexMatrix) -> Result<Branches> {
    if psi.dim() != twist.rows() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} for a {}-dimensional protocol",
            psi.dim(),
            twist.rows()
        )));
    }
    let basis = measurement_basis(elements, twist)?;
    let bob: Vec<Vec<C64>> = basis.iter().map(|phi| bob_branch(psi, phi, twist)).collect();
    let probs = bob.iter().map(|b| b.iter().map(C64::norm_sqr).sum()).collect();
    Ok(Branches { bob, probs })
}

/// Alice measures, Bob receives `received` and applies `U_received` in his
/// frame, which is `g` times Alice's.
fn finish(
    psi: &PureState,
    elements: &[ComplexMatrix],
    rho: &Representation,
    br: &Branches,
    i: usize,
    received: usize,
    g: usize,
) -> Result<(PureState, f64)> {
    let r = rho.image(g);
    let effective = &(&r.dagger() * &elements[received]) * r;
    let out = PureState::normalized(effective.apply(&br.bob[i]))?;
    let f = psi.fidelity(&out);
    Ok((out, f))
}

/// Textbook teleportation: the outcome travels unaltered.
pub fn conventional_teleport(
    psi: &PureState,
    ueb: &Ueb,
    twist: &ComplexMatrix,
    outcome: Outcome,
) -> Result<Transcript> {
    let br = branches(psi, ueb.elements(), twist)?;
    let i = pick_outcome(&br.probs, outcome)?;
    let n = psi.dim();
    let trivial = Representation::trivial(crate::group::preset("trivial")?, n);
    let (out, fidelity) = finish(psi, ueb.elements(), &trivial, &br, i, i, 0)?;
    Ok(Transcript {
        input: amps(psi),
        outcome: i,
        probability: br.probs[i],
        wire: None,
        received: i,
        correction: i,
        output: amps(&out),
        g: None,
        g_receive: None,
        fidelity,
    })
}

fn run(
    spec: &ProtocolSpec,
    psi: &PureState,
    g_send: usize,
    g_receive: usize,
    outcome: Outcome,
    seed: u64,
) -> Result<Transcript> {
    let group = spec.rho.group();
    if g_send >= group.order() || g_receive >= group.order() {
        return Err(Error::InvalidInput("group element out of range".into()));
    }
    let elements = spec.eueb.ueb().elements();
    let br = branches(psi, elements, &spec.twist)?;
    let i = pick_outcome(&br.probs, outcome)?;
    // the token is read at receipt, and the correction follows at once
    let wire = transmit(&spec.channel, i, g_receive, seed)?;
    let j = wire.received;
    let (out, fidelity) = finish(psi, elements, &spec.rho, &br, i, j, g_receive)?;
    Ok(Transcript {
        input: amps(psi),
        outcome: i,
        probability: br.probs[i],
        wire: Some(wire),
        received: j,
        correction: j,
        output: amps(&out),
        g: Some(group.label(g_send).to_string()),
        g_receive: (g_send != g_receive).then(|| group.label(g_receive).to_string()),
        fidelity,
    })
}

/// Frame-independent teleportation with misalignment `g`. Refuses unless
/// the channel reads `τ⁻¹`.
pub fn rf_teleport(spec: &ProtocolSpec, psi: &PureState, g: usize, outcome: Outcome, seed: u64) -> Result<Transcript> {
    spec.check_channel()?;
    run(spec, psi, g, g, outcome, seed)
}

/// Runs the protocol with whatever channel the protocol carries, compatible
/// or not.
pub fn simulate_unchecked(
    spec: &ProtocolSpec,
    psi: &PureState,
    g: usize,
    outcome: Outcome,
    seed: u64,
) -> Result<Transcript> {
    run(spec, psi, g, g, outcome, seed)
}

/// Bob's frame is `g_at_send` times Alice's when she sends and
/// `g_at_receive` when he reads the token and corrects.
pub fn dynamical_robustness_run(
    spec: &ProtocolSpec,
    psi: &PureState,
    g_at_send: usize,
    g_at_receive: usize,
    outcome: Outcome,
    seed: u64,
) -> Result<Transcript> {
    spec.check_channel()?;
    run(spec, psi, g_at_send, g_at_receive, outcome, seed)
}

/// Re-runs `rf_teleport` as seen by an observer whose frame is `h` times
/// Alice's: every state and operation is transformed into that frame,
/// including the shared resource. Returns the observer's fidelity.
pub fn observer_frame_fidelity(
    spec: &ProtocolSpec,
    psi: &PureState,
    g: usize,
    h: usize,
    outcome: usize,
) -> Result<f64> {
    spec.check_channel()?;
    let n = spec.dim();
    let rh = spec.rho.image(h);
    let pair_h = rh.tensor(spec.alice_half.image(h));
    let resource = bell_state(n).evolve(&ComplexMatrix::identity(n).tensor(&spec.twist));
    let resource_h = resource.evolve(&spec.alice_half.image(h).tensor(spec.bob_half.image(h)));
    let psi_h = psi.evolve(rh);
    let basis = measurement_basis(spec.eueb.ueb().elements(), &spec.twist)?;
    let phi_h = basis[outcome].evolve(&pair_h);
    // project system ⊗ Alice's half onto φ, leaving Bob's half
    let r = resource_h.amplitudes();
    let p = phi_h.amplitudes();
    let mut b = vec![ZERO; n];
    for (k, o) in b.iter_mut().enumerate() {
        for s in 0..n {
            for a in 0..n {
                *o += p[s * n + a].conj() * psi_h.amplitudes()[s] * r[a * n + k];
            }
        }
    }
    let j = transmit(&spec.channel, outcome, g, 0)?.received;
    // Bob's frame relative to the observer is g h⁻¹
    let group = spec.rho.group();
    let rel = spec.rho.image(group.mul(g, group.inv(h)));
    let effective = &(&rel.dagger() * spec.eueb.ueb().element(j)) * rel;
    let out = PureState::normalized(effective.apply(&b))?;
    Ok(psi_h.fidelity(&out))
}

/// Averaged output when Bob's frame is `g` with probability `weights[g]`.
#[derive(Debug, Clone)]
pub struct AveragedOutput {
    pub density: ComplexMatrix,
    pub fidelity: f64,
    pub purity: f64,
}

/// Teleportation through `channel` (or an ordinary speakable channel when
/// `None`) averaged over misalignments and outcomes, as a density matrix.
pub fn averaged_output(
    psi: &PureState,
    ueb: &Ueb,
    twist: &ComplexMatrix,
    rho: &Representation,
    weights: &[f64],
    channel: Option<&UnspeakableChannel>,
) -> Result<AveragedOutput> {
    let group = rho.group();
    if weights.len() != group.order() {
        return Err(Error::InvalidInput(format!("{} weights for a group of order {}", weights.len(), group.order())));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::InvalidInput("weights must be non-negative with positive sum".into()));
    }
    let n = psi.dim();
    let br = branches(psi, ueb.elements(), twist)?;
    let mut density = ComplexMatrix::zeros(n, n);
    for g in group.elements() {
        let w = weights[g] / total;
        if w == 0.0 {
            continue;
        }
        for i in 0..br.probs.len() {
            let j = match channel {
                Some(ch) => transmit(ch, i, g, 0)?.received,
                None => i,
            };
            let (out, _) = finish(psi, ueb.elements(), rho, &br, i, j, g)?;
            density = &density + &out.density().scale(C64::new(w * br.probs[i], 0.0));
        }
    }
    let fidelity = psi.evolve(&density).inner(psi).re;
    let purity = (&density * &density).trace().re;
    Ok(AveragedOutput { density, fidelity, purity })
}

/// Conventional teleportation when Bob's unknown frame is drawn from
/// `weights`.
pub fn misaligned_conventional(
    psi: &PureState,
    ueb: &Ueb,
    twist: &ComplexMatrix,
    rho: &Representation,
    weights: &[f64],
) -> Result<AveragedOutput> {
    averaged_output(psi, ueb, twist, rho, weights, None)
}

/// Wire-token statistics of the full protocol per misalignment.
#[derive(Debug, Clone, Serialize)]
pub struct LeakageReport {
    pub samples: usize,
    pub seed: u64,
    pub per_g: BTreeMap<String, BTreeMap<String, f64>>,
    pub max_tv: f64,
    pub max_tv_first_token: f64,
}

/// Runs the protocol `samples` times per group element on a seeded random
/// input, Alice's outcome drawn from the Born rule (or forced, as a
/// negative control), and compares the distributions of wire tokens.
pub fn no_leakage_experiment(
    spec: &ProtocolSpec,
    samples: usize,
    seed: u64,
    forced: Option<usize>,
) -> Result<LeakageReport> {
    spec.check_channel()?;
    let group = spec.rho.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psi = PureState::random(spec.dim(), &mut rng);
    let br = branches(&psi, spec.eueb.ueb().elements(), &spec.twist)?;
    let mut rows = Vec::with_capacity(group.order());
    let mut heads = Vec::with_capacity(group.order());
    for g in group.elements() {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.channel.mix(seed));
        let mut counts: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut head: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for _ in 0..samples {
            let i = forced.unwrap_or_else(|| sample_index(&br.probs, &mut rng));
            let (wire, _) = spec.channel.send(i, g, &mut rng);
            *head.entry(vec![wire[0]]).or_default() += 1.0;
            *counts.entry(wire).or_default() += 1.0;
        }
        for v in counts.values_mut().chain(head.values_mut()) {
            *v /= samples as f64;
        }
        rows.push(counts);
        heads.push(head);
    }
    let max_tv = max_pairwise_tv(&rows);
    let max_tv_first_token = max_pairwise_tv(&heads);
    let per_g = group
        .elements()
        .map(|g| {
            let row = rows[g]
                .iter()
                .map(|(k, v)| (k.iter().map(usize::to_string).collect::<Vec<_>>().join("."), *v))
                .collect();
            (group.label(g).to_string(), row)
        })
        .collect();
    Ok(LeakageReport { samples, seed, per_g, max_tv, max_tv_first_token })
}
