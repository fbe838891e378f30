//! Unspeakable classical channels: message sets carrying a left action
//! `σ` of the frame transformation group, plus how a message physically
//! travels so that Bob's reading is `σ(g, m)`.

use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::group::{coset_gset, orbits, right_cosets, stabilizer, FiniteGroup, GSet, Side, Subgroup};
use crate::unitary::{PureState, Representation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    RfSystem,
    Quotient,
    Composite,
    DecoheredQuantum,
    Speakable,
}

impl ChannelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelKind::RfSystem => "rf_system",
            ChannelKind::Quotient => "quotient",
            ChannelKind::Composite => "composite",
            ChannelKind::DecoheredQuantum => "decohered_quantum",
            ChannelKind::Speakable => "speakable",
        }
    }
}

#[derive(Debug, Clone)]
struct OrbitPart {
    channel: UnspeakableChannel,
    to_local: BTreeMap<usize, usize>,
    from_local: Vec<usize>,
}

#[derive(Debug, Clone)]
enum Transport {
    /// The token is the message itself.
    Direct,
    /// A uniformly random base message from the coset block is sent.
    Quotient { base: Box<UnspeakableChannel>, blocks: Vec<Vec<usize>>, block_of: Vec<usize>, seed: u64 },
    /// Speakable orbit label, then an orbit-local channel when the orbit
    /// has more than one point.
    Composite { orbit_of: Vec<usize>, labels: Vec<usize>, parts: Vec<Option<OrbitPart>> },
}

#[derive(Debug, Clone)]
pub struct UnspeakableChannel {
    kind: ChannelKind,
    group: FiniteGroup,
    sigma: GSet,
    transport: Transport,
}

/// One use of a channel. `wire` lists the tokens as read in the
/// receiver's frame: the orbit label first for composite channels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transmission {
    pub sent: usize,
    pub wire: Vec<usize>,
    pub g: String,
    pub received: usize,
    pub seed: u64,
}

fn is_transitive(x: &GSet) -> bool {
    orbits(x).len() <= 1
}

fn is_free(group: &FiniteGroup, x: &GSet) -> bool {
    group.elements().all(|g| g == group.identity() || (0..x.len()).all(|p| x.act(g, p) != p))
}

impl UnspeakableChannel {
    /// A channel whose token is the message, read through `sigma`.
    /// `RfSystem` requires a free transitive action, `Quotient` a
    /// transitive one and `Speakable` the trivial one.
    pub fn from_gset(group: &FiniteGroup, sigma: GSet, kind: ChannelKind) -> Result<Self> {
        if sigma.group_order() != group.order() {
            return Err(Error::GroupMismatch(sigma.group_name().into(), group.name().into()));
        }
        if sigma.side() != Side::Left {
            return Err(Error::InvalidChannel("channel actions are left actions".into()));
        }
        let ok = match kind {
            ChannelKind::RfSystem => is_transitive(&sigma) && is_free(group, &sigma),
            ChannelKind::Quotient => is_transitive(&sigma),
            ChannelKind::Speakable => group.elements().all(|g| (0..sigma.len()).all(|p| sigma.act(g, p) == p)),
            ChannelKind::Composite | ChannelKind::DecoheredQuantum => true,
        };
        if !ok {
            return Err(Error::InvalidChannel(format!("action does not fit kind {}", kind.as_str())));
        }
        Ok(UnspeakableChannel { kind, group: group.clone(), sigma, transport: Transport::Direct })
    }

    /// `n` messages nobody's frame can alter.
    pub fn speakable(group: &FiniteGroup, n: usize) -> Self {
        let sigma = GSet::trivial(group, (0..n).map(|i| i.to_string()).collect());
        UnspeakableChannel { kind: ChannelKind::Speakable, group: group.clone(), sigma, transport: Transport::Direct }
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    /// The left action `σ` on messages.
    pub fn sigma(&self) -> &GSet {
        &self.sigma
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Stabilizer of message `m` under `σ`.
    pub fn stabilizer_of(&self, m: usize) -> Result<Subgroup> {
        stabilizer(&self.group, &self.sigma, m)
    }

    pub fn is_transitive(&self) -> bool {
        is_transitive(&self.sigma)
    }

    pub(crate) fn send(&self, m: usize, g: usize, rng: &mut impl Rng) -> (Vec<usize>, usize) {
        match &self.transport {
            Transport::Direct => {
                let r = self.sigma.act(g, m);
                (vec![r], r)
            }
            Transport::Quotient { base, blocks, block_of, .. } => {
                let b = *blocks[m].choose(rng).expect("blocks are nonempty");
                let (wire, rb) = base.send(b, g, rng);
                (wire, block_of[rb])
            }
            Transport::Composite { orbit_of, labels, parts } => {
                let o = orbit_of[m];
                let mut wire = vec![labels[o]];
                match &parts[o] {
                    None => (wire, m),
                    Some(p) => {
                        let (w, r) = p.channel.send(p.to_local[&m], g, rng);
                        wire.extend(w);
                        (wire, p.from_local[r])
                    }
                }
            }
        }
    }

    pub(crate) fn mix(&self, seed: u64) -> u64 {
        match &self.transport {
            Transport::Quotient { seed: s, .. } => seed ^ s.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            _ => seed,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "kind": self.kind,
            "group": self.group.name(),
            "messages": self.sigma.points(),
            "sigma": self.sigma.to_json_labeled(&self.group)["action"],
        });
        match &self.transport {
            Transport::Direct => {}
            Transport::Quotient { base, blocks, seed, .. } => {
                v["base"] = base.to_json();
                v["blocks"] = json!(blocks);
                v["seed"] = json!(seed);
            }
            Transport::Composite { labels, parts, .. } => {
                v["orbit_labels"] = json!(labels);
                v["parts"] =
                    parts.iter().map(|p| p.as_ref().map_or(serde_json::Value::Null, |p| p.channel.to_json())).collect();
            }
        }
        v
    }
}

/// Receiver's reading when the receiver's frame is `g` times the sender's.
pub fn transmit(ch: &UnspeakableChannel, message: usize, g: usize, seed: u64) -> Result<Transmission> {
    if message >= ch.len() {
        return Err(Error::InvalidInput(format!("message {message} out of range 0..{}", ch.len())));
    }
    if g >= ch.group.order() {
        return Err(Error::InvalidInput(format!("group element {g} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ch.mix(seed));
    let (wire, received) = ch.send(message, g, &mut rng);
    Ok(Transmission { sent: message, wire, g: ch.group.label(g).to_string(), received, seed })
}

/// Frame configurations with a free transitive action, plus the agreed map
/// `ε` from frames to reference-system configurations.
#[derive(Debug, Clone)]
pub struct FrameConfigSpace {
    group: FiniteGroup,
    frames: GSet,
    reference: GSet,
    epsilon: Vec<usize>,
}

impl FrameConfigSpace {
    /// Checks that both actions are free and transitive and that
    /// `ε(g·f) = g·ε(f)` everywhere.
    pub fn new(group: &FiniteGroup, frames: GSet, reference: GSet, epsilon: Vec<usize>) -> Result<Self> {
        for (what, x) in [("frame", &frames), ("reference", &reference)] {
            if x.side() != Side::Left || !is_transitive(x) || !is_free(group, x) || x.len() != group.order() {
                return Err(Error::InvalidChannel(format!(
                    "{what} configurations are not a free transitive left G-set"
                )));
            }
        }
        if epsilon.len() != frames.len() || epsilon.iter().any(|&c| c >= reference.len()) {
            return Err(Error::InvalidChannel("ε has the wrong shape".into()));
        }
        for g in group.elements() {
            for f in 0..frames.len() {
                if epsilon[frames.act(g, f)] != reference.act(g, epsilon[f]) {
                    return Err(Error::InvalidChannel(format!("ε fails naturality at ({}, {f})", group.label(g))));
                }
            }
        }
        Ok(FrameConfigSpace { group: group.clone(), frames, reference, epsilon })
    }

    /// Frames and configurations both `G` under left multiplication, `ε = id`.
    pub fn regular(group: &FiniteGroup) -> Self {
        let x = GSet::regular(group);
        let eps = (0..group.order()).collect();
        FrameConfigSpace::new(group, x.clone(), x, eps).expect("regular action is free and transitive")
    }

    pub fn frames(&self) -> &GSet {
        &self.frames
    }

    /// `[x]_f = x · ε(f)`.
    pub fn config(&self, frame: usize, label: usize) -> usize {
        self.reference.act(label, self.epsilon[frame])
    }

    /// `l_f(c)`: the unique `x` with `x · ε(f) = c`.
    pub fn label(&self, frame: usize, config: usize) -> usize {
        self.group
            .elements()
            .find(|&x| self.config(frame, x) == config)
            .expect("free transitive action has a unique label")
    }

    /// Bob's reading of Alice's label `x` when `f_B = g · f_A`.
    pub fn read(&self, alice_frame: usize, g: usize, x: usize) -> usize {
        let bob = self.frames.act(g, alice_frame);
        self.label(bob, self.config(alice_frame, x))
    }
}

/// Shared reference-frame system: messages are group elements and Bob reads
/// `σ(g, x) = x g⁻¹`. The action is derived from labellings and checked
/// against the closed form.
pub fn rf_channel(group: &FiniteGroup) -> Result<UnspeakableChannel> {
    let space = FrameConfigSpace::regular(group);
    let mut action = Vec::with_capacity(group.order());
    for g in group.elements() {
        let row: Vec<usize> = group.elements().map(|x| space.read(group.identity(), g, x)).collect();
        for f in space.frames().points().iter().enumerate().map(|(i, _)| i) {
            for x in group.elements() {
                if space.read(f, g, x) != row[x] {
                    return Err(Error::InvalidChannel("reading depends on the sender's frame".into()));
                }
            }
        }
        for x in group.elements() {
            if row[x] != group.mul(x, group.inv(g)) {
                return Err(Error::InvalidChannel("reading differs from x g⁻¹".into()));
            }
        }
        action.push(row);
    }
    let sigma = GSet::new(group, group.labels().to_vec(), action, Side::Left)?;
    UnspeakableChannel::from_gset(group, sigma, ChannelKind::RfSystem)
}

/// Messages are right cosets `Kx` (ordered by smallest element); Alice sends
/// a random base message from the block over `Kx`, Bob reads a base message
/// and reports its `K`-coset. `h_base` must be the stabilizer of some base
/// message and lie inside `k`.
pub fn quotient_channel(
    base: &UnspeakableChannel,
    h_base: &Subgroup,
    k: &Subgroup,
    seed: u64,
) -> Result<UnspeakableChannel> {
    let group = base.group();
    if !base.is_transitive() {
        return Err(Error::InvalidChannel("base channel is not transitive".into()));
    }
    if !h_base.is_subset_of(k) {
        return Err(Error::InvalidChannel("stabilizer of the base is not contained in K".into()));
    }
    let x0 = (0..base.len())
        .find(|&m| base.stabilizer_of(m).map(|s| s.members() == h_base.members()).unwrap_or(false))
        .ok_or_else(|| Error::InvalidChannel("H is not the stabilizer of any base message".into()))?;
    // φ(y) = σ(y⁻¹, x0) identifies H\G with the base messages
    let phi = |y: usize| base.sigma().act(group.inv(y), x0);
    let cosets = right_cosets(group, k);
    let mut blocks = Vec::with_capacity(cosets.len());
    let mut block_of = vec![usize::MAX; base.len()];
    for (c, coset) in cosets.iter().enumerate() {
        let mut block: Vec<usize> = coset.iter().map(|&y| phi(y)).collect();
        block.sort_unstable();
        block.dedup();
        for &b in &block {
            block_of[b] = c;
        }
        blocks.push(block);
    }
    let sigma = coset_gset(group, k)?;
    for g in group.elements() {
        for b in 0..base.len() {
            if block_of[base.sigma().act(g, b)] != sigma.act(g, block_of[b]) {
                return Err(Error::InvalidChannel("blocks are not permuted compatibly".into()));
            }
        }
    }
    Ok(UnspeakableChannel {
        kind: ChannelKind::Quotient,
        group: group.clone(),
        sigma,
        transport: Transport::Quotient { base: Box::new(base.clone()), blocks, block_of, seed },
    })
}

/// A composite channel realizing `τ⁻¹` for the right action `tau`: the
/// orbit label travels speakably (smallest index in the orbit) and each
/// orbit with more than one point gets a quotient of `base`. Defaults to
/// the reference-frame channel.
pub fn compatible_channel_for(
    group: &FiniteGroup,
    tau: &GSet,
    base: Option<&UnspeakableChannel>,
) -> Result<UnspeakableChannel> {
    if tau.side() != Side::Right {
        return Err(Error::InvalidChannel("τ must be a right action".into()));
    }
    let sigma = tau.to_left(group);
    let owned;
    let base = match base {
        Some(b) => b,
        None => {
            owned = rf_channel(group)?;
            &owned
        }
    };
    if !base.is_transitive() {
        return Err(Error::InvalidChannel("base channel is not transitive".into()));
    }
    let h_base = base.stabilizer_of(0)?;
    let orbs = orbits(&sigma);
    let mut orbit_of = vec![0; sigma.len()];
    let mut labels = Vec::with_capacity(orbs.len());
    let mut parts = Vec::with_capacity(orbs.len());
    for (o, orbit) in orbs.iter().enumerate() {
        for &p in orbit {
            orbit_of[p] = o;
        }
        labels.push(orbit[0]);
        if orbit.len() == 1 {
            parts.push(None);
            continue;
        }
        let (p, s) = orbit
            .iter()
            .map(|&p| (p, stabilizer(group, &sigma, p)))
            .find_map(|(p, s)| s.ok().filter(|s| h_base.is_subset_of(s)).map(|s| (p, s)))
            .ok_or_else(|| {
                Error::IncompatibleChannel(format!(
                    "base stabilizer class is not below the stabilizer class of orbit {orbit:?}"
                ))
            })?;
        let q = quotient_channel(base, &h_base, &s, o as u64)?;
        // coset S·y carries the point σ(y⁻¹, p)
        let cosets = right_cosets(group, &s);
        let mut to_local = BTreeMap::new();
        let mut from_local = vec![0; cosets.len()];
        for (c, coset) in cosets.iter().enumerate() {
            let point = sigma.act(group.inv(coset[0]), p);
            to_local.insert(point, c);
            from_local[c] = point;
        }
        parts.push(Some(OrbitPart { channel: q, to_local, from_local }));
    }
    let kind = if parts.iter().all(Option::is_none) { ChannelKind::Speakable } else { ChannelKind::Composite };
    let ch = UnspeakableChannel {
        kind,
        group: group.clone(),
        sigma: sigma.clone(),
        transport: Transport::Composite { orbit_of, labels, parts },
    };
    for g in group.elements() {
        for i in 0..ch.len() {
            for seed in 0..3 {
                if transmit(&ch, i, g, seed)?.received != sigma.act(g, i) {
                    return Err(Error::InvalidChannel(format!(
                        "composite reading differs from τ⁻¹ at ({i}, {})",
                        group.label(g)
                    )));
                }
            }
        }
    }
    Ok(ch)
}

/// The measured system itself as the token: each frame change permutes the
/// basis rays, and that permutation is `σ`. When `expected` is given the
/// derived action must equal it.
pub fn decohered_quantum_channel(
    basis: &[PureState],
    pair_rep: &Representation,
    expected: Option<&GSet>,
) -> Result<UnspeakableChannel> {
    let group = pair_rep.group();
    let mut action = Vec::with_capacity(group.order());
    for g in group.elements() {
        let m = pair_rep.image(g);
        let mut row = Vec::with_capacity(basis.len());
        for (i, phi) in basis.iter().enumerate() {
            if phi.dim() != pair_rep.dim() {
                return Err(Error::DimensionMismatch(format!("basis state {i} has dimension {}", phi.dim())));
            }
            let moved = phi.evolve(m);
            let hits: Vec<usize> = basis
                .iter()
                .enumerate()
                .filter(|(_, b)| (b.inner(&moved).norm() - 1.0).abs() < 1e-6)
                .map(|(j, _)| j)
                .collect();
            match hits.as_slice() {
                [j] => row.push(*j),
                _ => {
                    return Err(Error::InvalidChannel(format!(
                        "{} does not permute the basis rays (state {i})",
                        group.label(g)
                    )))
                }
            }
        }
        action.push(row);
    }
    let sigma = GSet::new(group, (0..basis.len()).map(|i| i.to_string()).collect(), action, Side::Left)?;
    if let Some(exp) = expected {
        let exp = exp.to_left(group);
        if group.elements().any(|g| exp.permutation(g) != sigma.permutation(g)) {
            return Err(Error::IncompatibleChannel("decohered basis action differs from τ⁻¹".into()));
        }
    }
    UnspeakableChannel::from_gset(group, sigma, ChannelKind::DecoheredQuantum)
}

/// Wire-symbol distributions per misalignment.
#[derive(Debug, Clone, Serialize)]
pub struct LeakageStats {
    pub samples: usize,
    pub seed: u64,
    /// Indexed by group element; keys are wire tuples.
    pub per_g: Vec<BTreeMap<Vec<usize>, f64>>,
    /// Largest pairwise total-variation distance between the `per_g` rows.
    pub max_tv: f64,
    /// The same for the first wire token alone (the orbit label on
    /// composite channels).
    pub max_tv_first_token: f64,
}

pub fn total_variation(a: &BTreeMap<Vec<usize>, f64>, b: &BTreeMap<Vec<usize>, f64>) -> f64 {
    let keys: std::collections::BTreeSet<&Vec<usize>> = a.keys().chain(b.keys()).collect();
    0.5 * keys
        .into_iter()
        .map(|k| (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs())
        .sum::<f64>()
}

/// Max pairwise total variation over a list of distributions.
pub fn max_pairwise_tv(rows: &[BTreeMap<Vec<usize>, f64>]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            m = m.max(total_variation(&rows[i], &rows[j]));
        }
    }
    m
}

/// Samples `samples` messages from `weights` per group element and records
/// the wire tokens.
pub fn leakage_stats(ch: &UnspeakableChannel, weights: &[f64], samples: usize, seed: u64) -> Result<LeakageStats> {
    if weights.len() != ch.len() {
        return Err(Error::InvalidInput(format!("{} weights for {} messages", weights.len(), ch.len())));
    }
    let dist = WeightedIndex::new(weights).map_err(|e| Error::InvalidInput(format!("bad weights: {e}")))?;
    let mut per_g = Vec::with_capacity(ch.group.order());
    let mut first = Vec::with_capacity(ch.group.order());
    for g in ch.group.elements() {
        // same stream for every g, so g-invariant tokens match exactly
        let mut rng = ChaCha8Rng::seed_from_u64(ch.mix(seed));
        let mut counts: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut head: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for _ in 0..samples {
            let m = dist.sample(&mut rng);
            let (wire, _) = ch.send(m, g, &mut rng);
            *head.entry(vec![wire[0]]).or_default() += 1.0;
            *counts.entry(wire).or_default() += 1.0;
        }
        for v in counts.values_mut().chain(head.values_mut()) {
            *v /= samples as f64;
        }
        per_g.push(counts);
        first.push(head);
    }
    let max_tv = max_pairwise_tv(&per_g);
    let max_tv_first_token = max_pairwise_tv(&first);
    Ok(LeakageStats { samples, seed, per_g, max_tv, max_tv_first_token })
}
