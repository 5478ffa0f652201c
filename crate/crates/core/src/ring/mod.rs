pub mod cyclo;
pub mod ffield;
pub mod galois;
pub mod residue;

pub use cyclo::CycloValue;
pub use ffield::{ExtField, Fq};
pub use galois::GaloisRing;
pub use residue::ResidueRing;
