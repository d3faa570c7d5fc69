//! Named continued fraction families and the morphic words behind some of them.

pub mod families;
pub mod morphic;

pub use families::{
    density_nu, family_bound, family_growth, family_routes, family_stream, registry, Family, FamilyInfo, FamilySpec,
    FamilyStream, Framing,
};
pub use morphic::{density, word_prefix, MorphicWord};
