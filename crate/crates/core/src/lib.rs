//! Finite incidence geometry toolkit.
//!
//! * [`structure`] and [`axioms`]: incidence structures and plane axioms.
//! * [`extension`]: staged free extension with term-named elements.
//! * [`confinement`]: confined predicates and the confined core.
//! * [`lattice`]: the plane / geometric lattice correspondence.
//! * [`morphism`] and [`group`]: embedding search and automorphism groups.
//! * [`harness`]: transfer-property checks for structure encoders.

pub mod axioms;
pub mod cli;
pub mod confinement;
pub mod dot;
pub mod extension;
pub mod fixtures;
pub mod group;
pub mod harness;
pub mod io;
pub mod lattice;
pub mod morphism;
pub mod sample;
pub mod structure;
pub mod term;

pub use axioms::{validate, Axiom, ValidationReport};
pub use extension::{extend, extend_once, ExtensionMode, ExtensionTrace};
pub use structure::{ElementRef, IncidenceStructure};
pub use term::{ElementKind, Term};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Term(#[from] term::TermError),
    #[error(transparent)]
    Structure(#[from] structure::StructureError),
    #[error(transparent)]
    Format(#[from] io::FormatError),
    #[error(transparent)]
    Extension(#[from] extension::ExtensionError),
    #[error(transparent)]
    Lattice(#[from] lattice::LatticeError),
    #[error(transparent)]
    Search(#[from] morphism::SearchError),
    #[error(transparent)]
    Harness(#[from] harness::HarnessError),
    #[error(transparent)]
    NotAPlane(#[from] axioms::NotAPlane),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
