//! Equivariant unitary error bases and reference-frame-independent
//! teleportation over finite symmetry groups.

pub mod channel;
pub mod character;
pub mod error;
pub mod fixtures;
pub mod group;
pub mod numeric;
pub mod oeb;
pub mod rotation;
pub mod teleport;
pub mod ueb;
pub mod unitary;

pub use channel::{ChannelKind, UnspeakableChannel};
pub use error::{Error, Result};
pub use group::{FiniteGroup, GSet, Side, Subgroup};
pub use oeb::{EquivariantOEB, So3Rep};
pub use rotation::{BallPoint, Rotation};
pub use teleport::{ProtocolSpec, Transcript};
pub use ueb::{EquivariantUeb, Ueb};
pub use unitary::{ComplexMatrix, PureState, Representation};
