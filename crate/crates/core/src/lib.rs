pub mod cache;
pub mod canonical;
pub mod deck;
pub mod decomposition;
pub mod elemset;
pub mod enumerate;
pub mod error;
pub mod extend;
pub mod poset;
pub mod pseudo_similar;
pub mod recon;
pub mod verify;

pub use canonical::{canonical_cert, CanonicalCert, Morphism};
pub use deck::{Deck, PointProperty};
pub use elemset::ElemSet;
pub use enumerate::{enumerate, Universe, UniverseFilter};
pub use error::{Error, Result};
pub use poset::{Poset, MAX_N};
pub use pseudo_similar::{APartition, PsStructure};
pub use recon::{CardTag, DeckOracle, ReconReport, TaggedCard};
pub use verify::{Finding, Property, RunOptions, Scope};
