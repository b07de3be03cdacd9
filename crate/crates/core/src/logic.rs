//! First-order sentence templates and their evaluation on finite-stage
//! realizations.
//!
//! Each template is a parameterized sentence about the limit structure.
//! Evaluation on a finite stage is three-valued: `True` or `False` only
//! when the materialized tables settle the answer (witnesses that can
//! never disappear, or a census that can never change), and `Boundary`
//! whenever the stage leaves room — a component still growing, a stream
//! of components not yet exhausted, or a walk that ran off the
//! materialized frontier. Sentences that proxy "infinite" via a cutoff
//! parameter say so explicitly; picking the cutoff wisely is the
//! caller's job.
//!
//! Every evaluator draws from a probe budget and reports exhaustion as
//! an error rather than guessing.

use crate::realize::{extract, BlockShape, CharCensus, ExtractedInvariants, Realization};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// Quantifier complexity of a template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Complexity {
    Sigma1,
    Pi1,
    Sigma2,
    Pi2,
    Sigma3,
}

/// Parameterized first-order sentence templates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Sentence {
    /// At least `n` classes with exactly `k` elements.
    EqvCharMember { k: u64, n: u64 },
    /// Every class has at most `k` elements.
    NoKPlus1Classes { k: u64 },
    /// Exactly `m` classes with more than `size_cutoff` elements
    /// (cutoff proxies "infinite").
    ExactlyMInfiniteClasses { m: u64, size_cutoff: u64 },
    /// Some class has more than `cutoff` elements (cutoff proxies
    /// "infinite").
    InfiniteClassAlpha { cutoff: u64 },
    /// At least `n` orbits that are cycles of length exactly `k`.
    AtLeastNKCycles { n: u64, k: u64 },
    /// At least `n` one-way infinite orbits.
    AtLeastNOmegaOrbits { n: u64 },
    /// No orbit is a cycle of length exactly `k + 1`.
    NoOrbitSizeKPlus1 { k: u64 },
    /// Some element's first `cutoff` forward iterates are pairwise
    /// distinct (cutoff proxies a forward orbit that never closes).
    ZChainAlpha { cutoff: u64 },
    /// Some element has no preimages and `cutoff` pairwise-distinct
    /// forward iterates (cutoff proxies an unbounded forward path).
    OmegaChainAlpha { cutoff: u64 },
    /// At least `n` cycles of length exactly `k` (cycle-bearing
    /// function structures).
    CycleCharMember { k: u64, n: u64 },
    /// At least `n` elements whose forward path has exactly `k`
    /// distinct elements.
    PathCharMember { k: u64, n: u64 },
    /// At least `n` preimage-free elements whose forward path has
    /// exactly `k` distinct elements.
    EndpathCharMember { k: u64, n: u64 },
    /// At least `n` chain components with exactly `k` elements.
    ChainCharMember { k: u64, n: u64 },
    /// At least `n` right-infinite chain components, each certified by
    /// a forward run of at least `min_run` materialized steps.
    OmegaChainsAtLeastN { n: u64, min_run: u64 },
    /// At least `n` left-infinite chain components, each certified by
    /// a backward run of at least `min_run` materialized steps.
    OmegaStarChainsAtLeastN { n: u64, min_run: u64 },
    /// Every element has an image and exactly two preimages.
    TwoToOneAxioms,
    /// Every element has an image and either two preimages or none.
    TwoZeroToOneAxioms,
    /// The function is injective where defined (no element has two
    /// preimages).
    PartialInjectionAxioms,
    /// Every directed edge has its reverse (symmetric graph).
    GraphSymmetryAxiom,
}

impl Sentence {
    pub fn complexity(&self) -> Complexity {
        match self {
            Sentence::AtLeastNKCycles { .. }
            | Sentence::CycleCharMember { .. }
            | Sentence::PathCharMember { .. } => Complexity::Sigma1,
            Sentence::NoKPlus1Classes { .. }
            | Sentence::NoOrbitSizeKPlus1 { .. }
            | Sentence::PartialInjectionAxioms
            | Sentence::GraphSymmetryAxiom => Complexity::Pi1,
            Sentence::EqvCharMember { .. }
            | Sentence::ExactlyMInfiniteClasses { .. }
            | Sentence::AtLeastNOmegaOrbits { .. }
            | Sentence::ZChainAlpha { .. }
            | Sentence::OmegaChainAlpha { .. }
            | Sentence::EndpathCharMember { .. }
            | Sentence::ChainCharMember { .. }
            | Sentence::OmegaChainsAtLeastN { .. }
            | Sentence::OmegaStarChainsAtLeastN { .. } => Complexity::Sigma2,
            Sentence::TwoToOneAxioms | Sentence::TwoZeroToOneAxioms => Complexity::Pi2,
            Sentence::InfiniteClassAlpha { .. } => Complexity::Sigma3,
        }
    }

    /// The serialized tag, which is also the identifier the rule table
    /// uses for separating sentences.
    pub fn tag(&self) -> &'static str {
        match self {
            Sentence::EqvCharMember { .. } => "eqv_char_member",
            Sentence::NoKPlus1Classes { .. } => "no_k_plus1_classes",
            Sentence::ExactlyMInfiniteClasses { .. } => "exactly_m_infinite_classes",
            Sentence::InfiniteClassAlpha { .. } => "infinite_class_alpha",
            Sentence::AtLeastNKCycles { .. } => "at_least_n_k_cycles",
            Sentence::AtLeastNOmegaOrbits { .. } => "at_least_n_omega_orbits",
            Sentence::NoOrbitSizeKPlus1 { .. } => "no_orbit_size_k_plus1",
            Sentence::ZChainAlpha { .. } => "z_chain_alpha",
            Sentence::OmegaChainAlpha { .. } => "omega_chain_alpha",
            Sentence::CycleCharMember { .. } => "cycle_char_member",
            Sentence::PathCharMember { .. } => "path_char_member",
            Sentence::EndpathCharMember { .. } => "endpath_char_member",
            Sentence::ChainCharMember { .. } => "chain_char_member",
            Sentence::OmegaChainsAtLeastN { .. } => "omega_chains_at_least_n",
            Sentence::OmegaStarChainsAtLeastN { .. } => "omega_star_chains_at_least_n",
            Sentence::TwoToOneAxioms => "two_to_one_axioms",
            Sentence::TwoZeroToOneAxioms => "two_zero_to_one_axioms",
            Sentence::PartialInjectionAxioms => "partial_injection_axioms",
            Sentence::GraphSymmetryAxiom => "graph_symmetry_axiom",
        }
    }
}

/// Stage-honest truth value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalVerdict {
    True,
    False,
    /// The materialized stage neither witnesses nor refutes the
    /// sentence.
    Boundary,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("probe budget of {budget} exhausted")]
    BudgetExhausted { budget: u64 },
    #[error("sentence \"{sentence}\" does not apply to {kind} structures")]
    WrongStructureKind { sentence: String, kind: String },
}

struct Meter {
    budget: u64,
    left: u64,
}

impl Meter {
    fn new(budget: u64) -> Self {
        Meter { budget, left: budget }
    }
    fn spend(&mut self, n: u64) -> Result<(), LogicError> {
        if n > self.left {
            Err(LogicError::BudgetExhausted {
                budget: self.budget,
            })
        } else {
            self.left -= n;
            Ok(())
        }
    }
}

/// Whether the whole realization is settled: every declared component
/// present and none still growing.
fn fully_closed(r: &Realization) -> bool {
    r.all_blocks_materialized() && r.blocks().iter().all(|b| r.block_closed(b))
}

/// Outcome of walking an element's forward orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Walk {
    /// `cutoff` pairwise-distinct iterates seen.
    ReachedCutoff,
    /// The orbit revisited an element after this many distinct ones.
    Closed(u64),
    /// The orbit hit a point with no image after this many distinct
    /// elements.
    Died(u64),
    /// The orbit ran off the materialized frontier.
    Frontier,
}

fn walk_forward(
    r: &Realization,
    x: u64,
    cutoff: u64,
    meter: &mut Meter,
) -> Result<Walk, LogicError> {
    let mut seen = HashSet::new();
    let mut cur = x;
    loop {
        if seen.contains(&cur) {
            return Ok(Walk::Closed(seen.len() as u64));
        }
        seen.insert(cur);
        if seen.len() as u64 >= cutoff {
            return Ok(Walk::ReachedCutoff);
        }
        meter.spend(1)?;
        match r.forward_of(cur) {
            crate::interp::Lookup::Value(y) => cur = y,
            crate::interp::Lookup::Missing => return Ok(Walk::Died(seen.len() as u64)),
            crate::interp::Lookup::Unmaterialized => return Ok(Walk::Frontier),
        }
    }
}

/// Census helper: at-least-n-of-size-k against a census with a
/// completeness flag.
fn census_at_least(c: &CharCensus, k: u64, n: u64) -> EvalVerdict {
    if n == 0 || c.witnessed(k, n) {
        EvalVerdict::True
    } else if c.complete {
        EvalVerdict::False
    } else {
        EvalVerdict::Boundary
    }
}

fn kind_name(r: &Realization) -> String {
    r.spec.kind_name().to_string()
}

fn wrong_kind(s: &Sentence, r: &Realization) -> LogicError {
    LogicError::WrongStructureKind {
        sentence: s.tag().to_string(),
        kind: kind_name(r),
    }
}

/// Evaluate a sentence template on a realization within a probe budget.
pub fn eval_sentence(
    s: &Sentence,
    r: &Realization,
    budget: u64,
) -> Result<EvalVerdict, LogicError> {
    let mut meter = Meter::new(budget);
    let ext = extract(r);
    let is_eqv = matches!(ext, ExtractedInvariants::Equivalence { .. });
    meter.spend(r.blocks().len() as u64)?;
    match s {
        Sentence::EqvCharMember { k, n } => match &ext {
            ExtractedInvariants::Equivalence { character, .. } => {
                Ok(census_at_least(character, *k, *n))
            }
            _ => Err(wrong_kind(s, r)),
        },
        Sentence::NoKPlus1Classes { k } => {
            if !is_eqv {
                return Err(wrong_kind(s, r));
            }
            let mut violated = false;
            let mut open_blocks = false;
            for b in r.blocks() {
                match b.shape {
                    BlockShape::Class { size: Some(sz) } => {
                        if sz > *k {
                            violated = true;
                        }
                    }
                    BlockShape::Class { size: None } => {
                        open_blocks = true;
                        if r.stage > *k {
                            // More than k members of one class are
                            // already materialized; they persist.
                            violated = true;
                        }
                    }
                    _ => {}
                }
            }
            Ok(if violated {
                EvalVerdict::False
            } else if r.all_blocks_materialized() && !open_blocks {
                EvalVerdict::True
            } else {
                EvalVerdict::Boundary
            })
        }
        Sentence::ExactlyMInfiniteClasses { m, size_cutoff } => {
            if !is_eqv {
                return Err(wrong_kind(s, r));
            }
            let mut big = 0u64;
            for b in r.blocks() {
                match b.shape {
                    BlockShape::Class { size: Some(sz) } if sz > *size_cutoff => big += 1,
                    // A growing class exceeds any cutoff in the limit.
                    BlockShape::Class { size: None } => big += 1,
                    _ => {}
                }
            }
            Ok(if big > *m {
                EvalVerdict::False
            } else if !r.all_blocks_materialized() {
                EvalVerdict::Boundary
            } else if big == *m {
                EvalVerdict::True
            } else {
                EvalVerdict::False
            })
        }
        Sentence::InfiniteClassAlpha { cutoff } => {
            if !is_eqv {
                return Err(wrong_kind(s, r));
            }
            let mut big = 0u64;
            for b in r.blocks() {
                match b.shape {
                    BlockShape::Class { size: Some(sz) } if sz > *cutoff => big += 1,
                    BlockShape::Class { size: None } => big += 1,
                    _ => {}
                }
            }
            Ok(if big >= 1 {
                EvalVerdict::True
            } else if r.all_blocks_materialized() {
                EvalVerdict::False
            } else {
                EvalVerdict::Boundary
            })
        }
        Sentence::AtLeastNKCycles { n, k } => match &ext {
            ExtractedInvariants::Injection { character, .. } => {
                Ok(census_at_least(character, *k, *n))
            }
            _ => Err(wrong_kind(s, r)),
        },
        Sentence::AtLeastNOmegaOrbits { n } => match &ext {
            ExtractedInvariants::Injection { omega_orbits, .. } => Ok(if *n == 0 {
                EvalVerdict::True
            } else if omega_orbits.value() >= *n {
                EvalVerdict::True
            } else if omega_orbits.is_exact() {
                EvalVerdict::False
            } else {
                EvalVerdict::Boundary
            }),
            _ => Err(wrong_kind(s, r)),
        },
        Sentence::NoOrbitSizeKPlus1 { k } => match &ext {
            ExtractedInvariants::Injection { character, .. } => {
                Ok(if character.observed(*k + 1) > 0 {
                    EvalVerdict::False
                } else if character.complete {
                    EvalVerdict::True
                } else {
                    EvalVerdict::Boundary
                })
            }
            _ => Err(wrong_kind(s, r)),
        },
        Sentence::ZChainAlpha { cutoff } => {
            if is_eqv {
                return Err(wrong_kind(s, r));
            }
            let mut unknown = false;
            for b in r.blocks() {
                meter.spend(r.block_element_count(b))?;
                for x in r.block_elements(b) {
                    match walk_forward(r, x, *cutoff, &mut meter)? {
                        Walk::ReachedCutoff => return Ok(EvalVerdict::True),
                        Walk::Closed(_) | Walk::Died(_) => {}
                        Walk::Frontier => unknown = true,
                    }
                }
            }
            Ok(if !unknown && fully_closed(r) {
                EvalVerdict::False
            } else {
                EvalVerdict::Boundary
            })
        }
        Sentence::OmegaChainAlpha { cutoff } => {
            if is_eqv {
                return Err(wrong_kind(s, r));
            }
            let mut unknown = false;
            for b in r.blocks() {
                meter.spend(r.block_element_count(b))?;
                for x in r.block_elements(b) {
                    let p = r.preimages_of(x);
                    if !p.elems.is_empty() {
                        continue; // has a preimage, settled non-witness
                    }
                    if !p.complete {
                        unknown = true; // preimages may appear later
                        continue;
                    }
                    match walk_forward(r, x, *cutoff, &mut meter)? {
                        Walk::ReachedCutoff => return Ok(EvalVerdict::True),
                        Walk::Closed(_) | Walk::Died(_) => {}
                        Walk::Frontier => unknown = true,
                    }
                }
            }
            Ok(if !unknown && fully_closed(r) {
                EvalVerdict::False
            } else {
                EvalVerdict::Boundary
            })
        }
        Sentence::CycleCharMember { k, n } => match &ext {
            ExtractedInvariants::TwoToOne {
                cycle_character, ..
            }
            | ExtractedInvariants::TwoZeroToOne {
                cycle_character, ..
            }
            | ExtractedInvariants::PartialInjection {
                cycle_character, ..
            } => Ok(census_at_least(cycle_character, *k, *n)),
            _ => Err(wrong_kind(s, r)),
        },
        Sentence::PathCharMember { k, n } => match &ext {
            ExtractedInvariants::TwoZeroToOne { path_character, .. } => {
                Ok(census_at_least(path_character, *k, *n))
            }
            _ => Err(wrong_kind(s, r)),
        },
        Sentence::EndpathCharMember { k, n } => match &ext {
            ExtractedInvariants::TwoZeroToOne {
                endpath_character, ..
            } => Ok(census_at_least(endpath_character, *k, *n)),
            _ => Err(wrong_kind(s, r)),
        },
        Sentence::ChainCharMember { k, n } => match &ext {
            ExtractedInvariants::PartialInjection {
                chain_character, ..
            } => Ok(census_at_least(chain_character, *k, *n)),
            _ => Err(wrong_kind(s, r)),
        },
        Sentence::OmegaChainsAtLeastN { n, min_run } => match &ext {
            ExtractedInvariants::PartialInjection { omega_chains, .. } => {
                Ok(if *n == 0 {
                    EvalVerdict::True
                } else if omega_chains.value() >= *n && r.stage >= *min_run {
                    EvalVerdict::True
                } else if omega_chains.is_exact() && omega_chains.value() < *n {
                    EvalVerdict::False
                } else {
                    EvalVerdict::Boundary
                })
            }
            _ => Err(wrong_kind(s, r)),
        },
        Sentence::OmegaStarChainsAtLeastN { n, min_run } => match &ext {
            ExtractedInvariants::PartialInjection {
                omega_star_chains, ..
            } => Ok(if *n == 0 {
                EvalVerdict::True
            } else if omega_star_chains.value() >= *n && r.stage >= *min_run {
                EvalVerdict::True
            } else if omega_star_chains.is_exact() && omega_star_chains.value() < *n {
                EvalVerdict::False
            } else {
                EvalVerdict::Boundary
            }),
            _ => Err(wrong_kind(s, r)),
        },
        Sentence::TwoToOneAxioms => {
            if is_eqv {
                return Err(wrong_kind(s, r));
            }
            axioms_scan(r, &mut meter, |deg| deg == 2, true)
        }
        Sentence::TwoZeroToOneAxioms => {
            if is_eqv {
                return Err(wrong_kind(s, r));
            }
            axioms_scan(r, &mut meter, |deg| deg == 2 || deg == 0, true)
        }
        Sentence::PartialInjectionAxioms => {
            if is_eqv {
                return Err(wrong_kind(s, r));
            }
            axioms_scan(r, &mut meter, |deg| deg <= 1, false)
        }
        Sentence::GraphSymmetryAxiom => Err(wrong_kind(s, r)),
    }
}

/// Scan all elements checking settled preimage degrees against a law,
/// plus totality of the function when required.
fn axioms_scan(
    r: &Realization,
    meter: &mut Meter,
    degree_ok: impl Fn(usize) -> bool,
    require_total: bool,
) -> Result<EvalVerdict, LogicError> {
    let mut unknown = false;
    for b in r.blocks() {
        meter.spend(2 * r.block_element_count(b))?;
        for x in r.block_elements(b) {
            let p = r.preimages_of(x);
            if p.complete {
                if !degree_ok(p.elems.len()) {
                    return Ok(EvalVerdict::False);
                }
            } else {
                // A settled violation can already show among the
                // materialized preimages (too many); otherwise open.
                if p.elems.len() > 2 || (p.elems.len() == 2 && !degree_ok(2)) {
                    return Ok(EvalVerdict::False);
                }
                unknown = true;
            }
            if require_total {
                match r.forward_of(x) {
                    crate::interp::Lookup::Value(_) => {}
                    crate::interp::Lookup::Missing => return Ok(EvalVerdict::False),
                    crate::interp::Lookup::Unmaterialized => unknown = true,
                }
            }
        }
    }
    Ok(if !unknown && fully_closed(r) {
        EvalVerdict::True
    } else {
        EvalVerdict::Boundary
    })
}

/// Symmetry check for an explicit directed edge list: every edge must
/// have its reverse. Complete information is assumed (the edge list is
/// the whole graph).
pub fn graph_symmetry_check(edges: &[(u64, u64)]) -> EvalVerdict {
    let set: HashSet<(u64, u64)> = edges.iter().copied().collect();
    for &(a, b) in edges {
        if a != b && !set.contains(&(b, a)) {
            return EvalVerdict::False;
        }
    }
    EvalVerdict::True
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{
        CharEntry, Character, EquivalenceSpec, ExtCount, InjectionSpec, PartialInjectionSpec,
        Progression, StructureSpec, TwoToOneSpec, TwoZeroToOneSpec,
    };
    use crate::realize::realize;

    const BUDGET: u64 = 1_000_000;

    fn fin(n: u64) -> ExtCount {
        ExtCount::Fin(n)
    }

    fn ev(s: &Sentence, r: &Realization) -> EvalVerdict {
        eval_sentence(s, r, BUDGET).unwrap()
    }

    #[test]
    fn class_census_grid_matches_description_membership() {
        let spec = StructureSpec::Equivalence(EquivalenceSpec {
            character: Character::of_sizes(&[(1, fin(2)), (3, fin(1))]),
            infinite_classes: fin(0),
        });
        let r = realize(&spec, 10).unwrap();
        assert!(r.all_blocks_materialized());
        let ch = Character::of_sizes(&[(1, fin(2)), (3, fin(1))]);
        for k in 1..=5u64 {
            for n in 1..=5u64 {
                let want = if ch.member(k, n).unwrap() {
                    EvalVerdict::True
                } else {
                    EvalVerdict::False
                };
                assert_eq!(
                    ev(&Sentence::EqvCharMember { k, n }, &r),
                    want,
                    "k={k} n={n}"
                );
            }
        }
    }

    #[test]
    fn class_size_bound_sentence() {
        let closed = realize(
            &StructureSpec::Equivalence(EquivalenceSpec {
                character: Character::of_sizes(&[(1, fin(2)), (3, fin(1))]),
                infinite_classes: fin(0),
            }),
            8,
        )
        .unwrap();
        assert_eq!(ev(&Sentence::NoKPlus1Classes { k: 3 }, &closed), EvalVerdict::True);
        assert_eq!(ev(&Sentence::NoKPlus1Classes { k: 2 }, &closed), EvalVerdict::False);
        // A growing class violates the bound as soon as enough members
        // materialize, and blocks certainty before that.
        let open = realize(
            &StructureSpec::Equivalence(EquivalenceSpec {
                character: Character::of_sizes(&[(1, fin(1))]),
                infinite_classes: fin(1),
            }),
            6,
        )
        .unwrap();
        assert_eq!(ev(&Sentence::NoKPlus1Classes { k: 4 }, &open), EvalVerdict::False);
        assert_eq!(ev(&Sentence::NoKPlus1Classes { k: 10 }, &open), EvalVerdict::Boundary);
    }

    #[test]
    fn counting_big_classes() {
        let spec = StructureSpec::Equivalence(EquivalenceSpec {
            character: Character::of_sizes(&[(2, fin(3))]),
            infinite_classes: fin(2),
        });
        let r = realize(&spec, 5).unwrap();
        assert!(r.all_blocks_materialized());
        let t = |m| Sentence::ExactlyMInfiniteClasses { m, size_cutoff: 4 };
        assert_eq!(ev(&t(2), &r), EvalVerdict::True);
        assert_eq!(ev(&t(1), &r), EvalVerdict::False);
        assert_eq!(ev(&t(3), &r), EvalVerdict::False);
        assert_eq!(
            ev(&Sentence::InfiniteClassAlpha { cutoff: 4 }, &r),
            EvalVerdict::True
        );
        let none = realize(
            &StructureSpec::Equivalence(EquivalenceSpec {
                character: Character::of_sizes(&[(2, fin(1))]),
                infinite_classes: fin(0),
            }),
            5,
        )
        .unwrap();
        assert_eq!(
            ev(&Sentence::InfiniteClassAlpha { cutoff: 4 }, &none),
            EvalVerdict::False
        );
        // An endless stream of finite classes leaves the question open.
        let endless = realize(
            &StructureSpec::Equivalence(EquivalenceSpec {
                character: Character {
                    entries: vec![CharEntry::Prog {
                        progression: Progression { start: 1, step: 1 },
                        count: fin(1),
                    }],
                },
                infinite_classes: fin(0),
            }),
            6,
        )
        .unwrap();
        assert_eq!(
            ev(&Sentence::InfiniteClassAlpha { cutoff: 50 }, &endless),
            EvalVerdict::Boundary
        );
    }

    #[test]
    fn orbit_census_sentences() {
        let spec = StructureSpec::Injection(InjectionSpec {
            character: Character::of_sizes(&[(2, fin(2)), (4, fin(1))]),
            omega_orbits: fin(1),
            z_orbits: fin(0),
        });
        let r = realize(&spec, 8).unwrap();
        assert_eq!(
            ev(&Sentence::AtLeastNKCycles { n: 2, k: 2 }, &r),
            EvalVerdict::True
        );
        assert_eq!(
            ev(&Sentence::AtLeastNKCycles { n: 3, k: 2 }, &r),
            EvalVerdict::False
        );
        assert_eq!(
            ev(&Sentence::AtLeastNOmegaOrbits { n: 1 }, &r),
            EvalVerdict::True
        );
        assert_eq!(
            ev(&Sentence::AtLeastNOmegaOrbits { n: 2 }, &r),
            EvalVerdict::False
        );
        assert_eq!(
            ev(&Sentence::NoOrbitSizeKPlus1 { k: 3 }, &r),
            EvalVerdict::False
        );
        assert_eq!(
            ev(&Sentence::NoOrbitSizeKPlus1 { k: 4 }, &r),
            EvalVerdict::True
        );
    }

    #[test]
    fn acyclic_witness_sentence() {
        // A two-way orbit provides a witness once long enough.
        let with_z = realize(
            &StructureSpec::Injection(InjectionSpec {
                character: Character::of_sizes(&[(2, fin(1))]),
                omega_orbits: fin(0),
                z_orbits: fin(1),
            }),
            10,
        )
        .unwrap();
        assert_eq!(
            ev(&Sentence::ZChainAlpha { cutoff: 6 }, &with_z),
            EvalVerdict::True
        );
        // All-cycles, fully closed: refuted once the cutoff exceeds
        // every cycle length.
        let cycles = realize(
            &StructureSpec::Injection(InjectionSpec {
                character: Character::of_sizes(&[(2, fin(1)), (3, fin(1))]),
                omega_orbits: fin(0),
                z_orbits: fin(0),
            }),
            8,
        )
        .unwrap();
        assert_eq!(
            ev(&Sentence::ZChainAlpha { cutoff: 6 }, &cycles),
            EvalVerdict::False
        );
        // A growing full tree keeps the question open: deeper nodes
        // than the stage materializes could witness the cutoff.
        let tree = realize(
            &StructureSpec::TwoToOne(TwoToOneSpec {
                cycle_character: Character::of_sizes(&[(1, fin(1))]),
                z_chains: fin(0),
            }),
            6,
        )
        .unwrap();
        assert_eq!(
            ev(&Sentence::ZChainAlpha { cutoff: 20 }, &tree),
            EvalVerdict::Boundary
        );
    }

    fn loop_with_leaf() -> StructureSpec {
        StructureSpec::TwoZeroToOne(TwoZeroToOneSpec {
            cycle_character: Character::of_sizes(&[(1, fin(1))]),
            path_character: Character::of_sizes(&[(1, fin(1)), (2, fin(1))]),
            endpath_character: Character::of_sizes(&[(2, fin(1))]),
            z_chains: fin(0),
            omega_chains: fin(0),
            infinite_length_endpoints: fin(0),
            highly_computable: true,
            has_infinite_tree_branch: false,
        })
    }

    #[test]
    fn preimage_free_long_path_sentence() {
        // Closed loop-with-leaf: the only preimage-free point has a
        // 2-element path; refuted.
        let small = realize(&loop_with_leaf(), 5).unwrap();
        assert_eq!(
            ev(&Sentence::OmegaChainAlpha { cutoff: 4 }, &small),
            EvalVerdict::False
        );
        // A one-way chain head witnesses the sentence once its run
        // exceeds the cutoff.
        let spec = StructureSpec::TwoZeroToOne(TwoZeroToOneSpec {
            cycle_character: Character::of_sizes(&[(1, fin(1))]),
            path_character: Character::of_sizes(&[(1, fin(1)), (2, fin(1))]),
            endpath_character: Character::of_sizes(&[(2, fin(1))]),
            z_chains: fin(0),
            omega_chains: fin(1),
            infinite_length_endpoints: fin(1),
            highly_computable: true,
            has_infinite_tree_branch: true,
        });
        let chain = realize(&spec, 8).unwrap();
        assert_eq!(
            ev(&Sentence::OmegaChainAlpha { cutoff: 5 }, &chain),
            EvalVerdict::True
        );
    }

    fn growing_tails() -> StructureSpec {
        StructureSpec::TwoZeroToOne(TwoZeroToOneSpec {
            cycle_character: Character::of_sizes(&[(1, ExtCount::Omega)]),
            path_character: Character {
                entries: vec![CharEntry::Prog {
                    progression: Progression { start: 1, step: 1 },
                    count: ExtCount::Omega,
                }],
            },
            endpath_character: Character {
                entries: vec![CharEntry::Prog {
                    progression: Progression { start: 3, step: 1 },
                    count: ExtCount::Omega,
                }],
            },
            z_chains: fin(0),
            omega_chains: fin(0),
            infinite_length_endpoints: fin(0),
            highly_computable: true,
            has_infinite_tree_branch: false,
        })
    }

    #[test]
    fn growing_tails_leave_the_long_path_question_open() {
        // Copies keep coming forever, so the census is never complete:
        // every materialized preimage-free point settles short, but the
        // stream keeps the verdict at the boundary.
        let r = realize(&growing_tails(), 4).unwrap();
        assert_eq!(
            ev(&Sentence::OmegaChainAlpha { cutoff: 30 }, &r),
            EvalVerdict::Boundary
        );
    }

    #[test]
    fn path_census_sentences_on_growing_tails() {
        let r = realize(&growing_tails(), 6).unwrap();
        // Depth-18 tails: lengths 1..=19 all present already.
        assert_eq!(
            ev(&Sentence::PathCharMember { k: 1, n: 1 }, &r),
            EvalVerdict::True
        );
        assert_eq!(
            ev(&Sentence::PathCharMember { k: 5, n: 3 }, &r),
            EvalVerdict::True
        );
        assert_eq!(
            ev(&Sentence::EndpathCharMember { k: 3, n: 2 }, &r),
            EvalVerdict::True
        );
        // Length 2 never ends a path here, but the endless stream keeps
        // refutation out of reach.
        assert_eq!(
            ev(&Sentence::EndpathCharMember { k: 2, n: 1 }, &r),
            EvalVerdict::Boundary
        );
        assert_eq!(
            ev(&Sentence::CycleCharMember { k: 1, n: 3 }, &r),
            EvalVerdict::True
        );
    }

    #[test]
    fn chain_census_sentences() {
        let spec = StructureSpec::PartialInjection(PartialInjectionSpec {
            cycle_character: Character::of_sizes(&[(2, fin(1))]),
            chain_character: Character::of_sizes(&[(3, fin(2))]),
            z_chains: fin(0),
            omega_chains: fin(2),
            omega_star_chains: fin(1),
            range_computable: true,
            domain_computable: true,
        });
        let r = realize(&spec, 7).unwrap();
        assert_eq!(
            ev(&Sentence::ChainCharMember { k: 3, n: 2 }, &r),
            EvalVerdict::True
        );
        assert_eq!(
            ev(&Sentence::ChainCharMember { k: 3, n: 3 }, &r),
            EvalVerdict::False
        );
        assert_eq!(
            ev(&Sentence::OmegaChainsAtLeastN { n: 2, min_run: 5 }, &r),
            EvalVerdict::True
        );
        assert_eq!(
            ev(&Sentence::OmegaChainsAtLeastN { n: 3, min_run: 5 }, &r),
            EvalVerdict::False
        );
        // Below the certification run the count stays at the boundary.
        assert_eq!(
            ev(&Sentence::OmegaChainsAtLeastN { n: 2, min_run: 50 }, &r),
            EvalVerdict::Boundary
        );
        assert_eq!(
            ev(&Sentence::OmegaStarChainsAtLeastN { n: 1, min_run: 5 }, &r),
            EvalVerdict::True
        );
    }

    #[test]
    fn function_law_sentences() {
        let two_to_one = realize(
            &StructureSpec::TwoToOne(TwoToOneSpec {
                cycle_character: Character::of_sizes(&[(1, fin(1))]),
                z_chains: fin(0),
            }),
            5,
        )
        .unwrap();
        // Growing trees: consistent so far, not yet settled.
        assert_eq!(ev(&Sentence::TwoToOneAxioms, &two_to_one), EvalVerdict::Boundary);
        // The loop-with-leaf violates the exactly-two law (the leaf has
        // zero preimages) but satisfies the two-or-zero law, settled.
        let tz = realize(&loop_with_leaf(), 5).unwrap();
        assert_eq!(ev(&Sentence::TwoToOneAxioms, &tz), EvalVerdict::False);
        assert_eq!(ev(&Sentence::TwoZeroToOneAxioms, &tz), EvalVerdict::True);
        assert_eq!(ev(&Sentence::PartialInjectionAxioms, &tz), EvalVerdict::False);
        // A closed partial injection obeys its law.
        let pi = realize(
            &StructureSpec::PartialInjection(PartialInjectionSpec {
                cycle_character: Character::of_sizes(&[(2, fin(1))]),
                chain_character: Character::of_sizes(&[(2, fin(1))]),
                z_chains: fin(0),
                omega_chains: fin(0),
                omega_star_chains: fin(0),
                range_computable: true,
                domain_computable: true,
            }),
            5,
        )
        .unwrap();
        assert_eq!(ev(&Sentence::PartialInjectionAxioms, &pi), EvalVerdict::True);
        assert_eq!(ev(&Sentence::TwoToOneAxioms, &pi), EvalVerdict::False);
    }

    #[test]
    fn graph_symmetry() {
        assert_eq!(
            graph_symmetry_check(&[(0, 1), (1, 0), (2, 2)]),
            EvalVerdict::True
        );
        assert_eq!(graph_symmetry_check(&[(0, 1)]), EvalVerdict::False);
        assert_eq!(graph_symmetry_check(&[]), EvalVerdict::True);
    }

    #[test]
    fn wrong_kind_and_budget_errors() {
        let eqv = realize(
            &StructureSpec::Equivalence(EquivalenceSpec {
                character: Character::of_sizes(&[(1, fin(1))]),
                infinite_classes: fin(0),
            }),
            3,
        )
        .unwrap();
        assert!(matches!(
            eval_sentence(&Sentence::ZChainAlpha { cutoff: 3 }, &eqv, BUDGET),
            Err(LogicError::WrongStructureKind { .. })
        ));
        assert!(matches!(
            eval_sentence(&Sentence::GraphSymmetryAxiom, &eqv, BUDGET),
            Err(LogicError::WrongStructureKind { .. })
        ));
        let big = realize(&growing_tails(), 20).unwrap();
        assert!(matches!(
            eval_sentence(&Sentence::ZChainAlpha { cutoff: 50 }, &big, 10),
            Err(LogicError::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn tags_and_complexities_are_frozen() {
        let all = vec![
            (Sentence::EqvCharMember { k: 1, n: 1 }, "eqv_char_member", Complexity::Sigma2),
            (Sentence::NoKPlus1Classes { k: 1 }, "no_k_plus1_classes", Complexity::Pi1),
            (
                Sentence::ExactlyMInfiniteClasses { m: 1, size_cutoff: 9 },
                "exactly_m_infinite_classes",
                Complexity::Sigma2,
            ),
            (
                Sentence::InfiniteClassAlpha { cutoff: 9 },
                "infinite_class_alpha",
                Complexity::Sigma3,
            ),
            (
                Sentence::AtLeastNKCycles { n: 1, k: 1 },
                "at_least_n_k_cycles",
                Complexity::Sigma1,
            ),
            (
                Sentence::AtLeastNOmegaOrbits { n: 1 },
                "at_least_n_omega_orbits",
                Complexity::Sigma2,
            ),
            (
                Sentence::NoOrbitSizeKPlus1 { k: 1 },
                "no_orbit_size_k_plus1",
                Complexity::Pi1,
            ),
            (Sentence::ZChainAlpha { cutoff: 9 }, "z_chain_alpha", Complexity::Sigma2),
            (Sentence::OmegaChainAlpha { cutoff: 9 }, "omega_chain_alpha", Complexity::Sigma2),
            (Sentence::CycleCharMember { k: 1, n: 1 }, "cycle_char_member", Complexity::Sigma1),
            (Sentence::PathCharMember { k: 1, n: 1 }, "path_char_member", Complexity::Sigma1),
            (
                Sentence::EndpathCharMember { k: 1, n: 1 },
                "endpath_char_member",
                Complexity::Sigma2,
            ),
            (Sentence::ChainCharMember { k: 1, n: 1 }, "chain_char_member", Complexity::Sigma2),
            (
                Sentence::OmegaChainsAtLeastN { n: 1, min_run: 9 },
                "omega_chains_at_least_n",
                Complexity::Sigma2,
            ),
            (
                Sentence::OmegaStarChainsAtLeastN { n: 1, min_run: 9 },
                "omega_star_chains_at_least_n",
                Complexity::Sigma2,
            ),
            (Sentence::TwoToOneAxioms, "two_to_one_axioms", Complexity::Pi2),
            (Sentence::TwoZeroToOneAxioms, "two_zero_to_one_axioms", Complexity::Pi2),
            (
                Sentence::PartialInjectionAxioms,
                "partial_injection_axioms",
                Complexity::Pi1,
            ),
            (Sentence::GraphSymmetryAxiom, "graph_symmetry_axiom", Complexity::Pi1),
        ];
        assert_eq!(all.len(), 19);
        for (s, tag, cx) in all {
            assert_eq!(s.tag(), tag);
            assert_eq!(s.complexity(), cx);
            // The serde tag agrees with the method, and the roundtrip
            // is lossless.
            let v = serde_json::to_value(&s).unwrap();
            assert_eq!(v["shape"], tag);
            let back: Sentence = serde_json::from_value(v).unwrap();
            assert_eq!(back, s);
        }
        // The rule table's sentence identifiers match template tags.
        assert_eq!(
            crate::classifier::SENTENCE_INFINITE_CLASS,
            Sentence::InfiniteClassAlpha { cutoff: 0 }.tag()
        );
        assert_eq!(
            crate::classifier::SENTENCE_Z_CHAIN,
            Sentence::ZChainAlpha { cutoff: 0 }.tag()
        );
        assert_eq!(
            crate::classifier::SENTENCE_OMEGA_CHAIN,
            Sentence::OmegaChainAlpha { cutoff: 0 }.tag()
        );
    }
}
