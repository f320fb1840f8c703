//! Sentence corpora: instance collection, substitution and Hearst filtering.

pub mod conllu;
pub mod hearst;
mod instance;
mod substitute;

pub use instance::{collect_instances, read_instances, write_instances, Instance};
pub use substitute::{generate_substitutions, Substitution};
