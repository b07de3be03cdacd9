//! A desk-scale workbench for cohesive powers of computable structures.
//!
//! The library answers one question for five classes of structures
//! (equivalence structures, computable injections, `2:1` functions,
//! `(2,0):1` functions, and partial injections with no cycles other than
//! fixed-point-free finite orbits): *what is the isomorphism type of the
//! cohesive power of the structure, and can we check the answer
//! constructively at small scale?*
//!
//! The modules fit together like this:
//!
//! * [`invariants`] — the vocabulary: extended counts (`n` or `ω`),
//!   characters (which orbit/class sizes occur how often), structure
//!   descriptions, and the report format with per-field provenance.
//! * [`interp`] — a tiny step-budgeted interpreter for partial functions,
//!   used to *name* elements of a power by programs.
//! * [`cohesive`] — a marker construction that enumerates a co-cohesive
//!   set in stages, plus the quotient machinery (agreement checking modulo
//!   the enumerated set, and the race that totalizes a partial program).
//! * [`realize`] — builds concrete finite-stage realizations of structure
//!   descriptions on an initial segment of the naturals, with exact
//!   bookkeeping about what is and is not yet known at each stage.
//! * [`classifier`] — the rule table mapping a structure description to
//!   the invariants of its cohesive power, with citations into a fixed
//!   registry of classification facts.
//! * [`logic`] — first-order sentence templates (with quantifier
//!   complexity tags) evaluated against realizations, reporting
//!   `true` / `false` / `boundary` honestly at finite stages.
//! * [`witness`] — explicit program families that realize the extra
//!   elements the classifier promises (new orbits, chains, spacing
//!   witnesses, graph embeddings), and window-based verification of the
//!   properties those families claim.
//! * [`suite`] — curated end-to-end scenarios and the acceptance runner
//!   that cross-checks classifier, realizer, logic, and witnesses against
//!   one another.

pub mod classifier;
pub mod cohesive;
pub mod interp;
pub mod invariants;
pub mod logic;
pub mod realize;
pub mod suite;
pub mod witness;

pub use invariants::{Character, ExtCount, PowerReport, StructureSpec};
