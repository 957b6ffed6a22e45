//! Deformed Green-ansatz oscillators: Gram matrices of multiparticle states,
//! a normal-ordering oracle, spectral scans, coefficient extraction for the
//! interpolating commutation relations and a Jordan–Wigner realization.

pub mod checks;
pub mod error;
pub mod format;
pub mod gram;
pub mod interp;
pub mod jw;
pub mod oracle;
pub mod params;
pub mod perm;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
pub use gram::{build_gram, GramBasis, GramMatrix};
pub use oracle::{Letter, Oracle, Word};
pub use params::{make_preset, DeformationSpec, Family, Order, PresetArgs};
pub use perm::Permutation;
pub use spectral::{spectrum, SpectrumReport};
