//! Clause-level morphology.
//!
//! Word-level inflection tables are expanded into clause-level paradigms by a
//! declarative per-language realization grammar. The resulting tables feed the
//! inflection, reinflection and analysis datasets, the paradigm statistics and
//! the exact-match scorer.

pub mod featkit;
pub mod grammar;
pub mod lexicon;
pub mod eval;
pub mod paradigm;
pub mod sampler;
pub mod stats;
