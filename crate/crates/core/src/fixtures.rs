//! Named example data: the qubit Z3 teleportation scenario with its
//! tetrahedral basis and arrow channel, and physical reference-frame
//! channels.

use std::f64::consts::PI;

use crate::channel::{rf_channel, ChannelKind, UnspeakableChannel};
use crate::error::{Error, Result};
use crate::group::{preset, FiniteGroup, GSet, Side};
use crate::oeb::{catalog_rep, discrete_catalog};
use crate::rotation::{normalize, Rotation, Vec3};
use crate::teleport::ProtocolSpec;
use crate::ueb::{
    binary_cover, commuting_hadamard, hadamard_ueb, lift_oeb, verify_equivariant, verify_ueb, EquivariantUeb,
};
use crate::unitary::{cis, ComplexMatrix, Representation, C64, ONE};

/// Z3 with elements labeled `e`, `a`, `a^2`.
pub fn z3_group() -> FiniteGroup {
    let g = preset("Z3").expect("Z3 preset");
    let labels = g.word_labels(&["a"]);
    g.relabeled("Z3", labels).expect("relabel")
}

/// `ρ(a) = diag(1, e^{2πi/3})`.
pub fn z3_rep() -> Representation {
    let a = ComplexMatrix::diag(&[ONE, cis(2.0 * PI / 3.0)]);
    Representation::from_generators(z3_group(), &[a]).expect("ρ(a)³ = 1")
}

/// The four qubit unitaries of the Z3 example, in order `U_0 … U_3`.
pub fn z3_ueb_matrices() -> Vec<ComplexMatrix> {
    let s = 1.0 / 3f64.sqrt();
    let r2 = 2f64.sqrt();
    let w = |k: f64| cis(k * PI / 3.0);
    let m = |rows: [[C64; 2]; 2]| {
        ComplexMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).expect("2x2").scale(C64::new(s, 0.0))
    };
    vec![
        ComplexMatrix::diag(&[ONE, w(2.0)]),
        m([[ONE, w(4.0) * r2], [w(4.0) * r2, w(5.0)]]),
        m([[ONE, w(2.0) * r2], [ONE * r2, w(5.0)]]),
        m([[ONE, ONE * r2], [w(2.0) * r2, w(5.0)]]),
    ]
}

pub fn z3_equivariant_ueb() -> EquivariantUeb {
    let ueb = verify_ueb(z3_ueb_matrices()).expect("example basis is a UEB");
    verify_equivariant(&ueb, &z3_rep()).expect("example basis is equivariant")
}

/// Resource twist: `η = (1 ⊗ X)|Bell⟩ = (|01⟩ + |10⟩)/√2`.
pub fn z3_twist() -> ComplexMatrix {
    ComplexMatrix::pauli_x()
}

/// Tetrahedron vertices `v_0 … v_3` for the arrow channel.
pub fn arrow_vectors() -> [Vec3; 4] {
    [
        normalize([1.0, 1.0, 1.0]),
        normalize([1.0, -1.0, -1.0]),
        normalize([-1.0, 1.0, -1.0]),
        normalize([-1.0, -1.0, 1.0]),
    ]
}

/// Right-handed `2π/3` turn about `v_0`: the physical action of `a`.
pub fn arrow_rotation() -> Rotation {
    Rotation::new(arrow_vectors()[0], 2.0 * PI / 3.0)
}

/// Left action of Z3 on arrow labels obtained by rotating the vertices.
pub fn arrow_gset() -> Result<GSet> {
    let group = z3_group();
    let vs = arrow_vectors();
    let a = arrow_rotation();
    let mut action = Vec::with_capacity(3);
    let powers = [Rotation::IDENTITY, a, a.then_after(&a)];
    for g in group.elements() {
        // labels are shortest words, so element `a^k` is the k-th power
        let k = match group.label(g) {
            "e" => 0,
            "a" => 1,
            _ => 2,
        };
        let row = vs
            .iter()
            .map(|&v| {
                let moved = powers[k].apply(v);
                vs.iter()
                    .position(|&w| (0..3).all(|c| (w[c] - moved[c]).abs() < 1e-9))
                    .expect("tetrahedron is preserved")
            })
            .collect();
        action.push(row);
    }
    GSet::new(&group, (0..4).map(|i| format!("v{i}")).collect(), action, Side::Left)
}

/// The arrow channel: one physical arrow, read against the shared
/// tetrahedron. Orbits `{0}` and `{1, 2, 3}`.
pub fn arrow_channel() -> Result<UnspeakableChannel> {
    UnspeakableChannel::from_gset(&z3_group(), arrow_gset()?, ChannelKind::Composite)
}

/// A labelled solid cube passed between parties: the reference-frame
/// channel of the rotation group of the cube.
pub fn cube_channel() -> Result<UnspeakableChannel> {
    rf_channel(catalog_rep("octahedral")?.group())
}

/// Arrival time modulo the period for clocks offset by multiples of `T/n`.
pub fn clock_channel(n: usize) -> Result<UnspeakableChannel> {
    let g = preset(&format!("Z{n}"))?;
    let labels = g.word_labels(&["t"]);
    rf_channel(&g.relabeled(&format!("Z{n}"), labels)?)
}

/// The qubit Z3 protocol: both halves of `(|01⟩ + |10⟩)/√2` carry `ρ`, and
/// the measurement result travels as an arrow.
pub fn z3_protocol() -> Result<ProtocolSpec> {
    let rho = z3_rep();
    ProtocolSpec::new(rho.clone(), rho.clone(), rho, z3_twist(), z3_equivariant_ueb(), arrow_channel()?)
}

/// Lifts catalog entry `index` for `tag` through the binary cover of the
/// rotation group and wraps it in the default protocol.
pub fn catalog_protocol(tag: &str, index: usize) -> Result<ProtocolSpec> {
    let so3 = catalog_rep(tag)?;
    let cover = binary_cover(&so3)?;
    let list = discrete_catalog(tag)?;
    let oeb =
        list.get(index).ok_or_else(|| Error::InvalidInput(format!("{tag} has {} catalog entries", list.len())))?;
    ProtocolSpec::from_eueb(lift_oeb(oeb, &cover)?)
}

/// Binary tetrahedral group (order 24) acting on a qubit, with the even
/// tetrahedron basis.
pub fn binary_tetrahedral_protocol() -> Result<ProtocolSpec> {
    catalog_protocol("tetrahedral", 0)
}

/// Permutation group `preset` acting on `C^n` by its natural
/// representation, with the basis built from the commuting Hadamard.
pub fn hadamard_protocol(preset_name: &str) -> Result<ProtocolSpec> {
    let rho = Representation::natural(preset(preset_name)?)?;
    let h = commuting_hadamard(rho.dim())?;
    ProtocolSpec::from_eueb(hadamard_ueb(&rho, &h)?)
}

/// `A4` permuting four points, sixteen basis elements.
pub fn a4_protocol() -> Result<ProtocolSpec> {
    hadamard_protocol("A4")
}
