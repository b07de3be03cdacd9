//! The rule table: compute the invariants of a structure's power
//! directly from its description.
//!
//! Each rule fills one field of the power's invariants with either a
//! determined value plus the registry entry justifying it, or an honest
//! "undetermined" carrying the missing hypothesis (typically an
//! effectivity property the description does not grant). The overall
//! verdict compares the determined fields against the input: `Yes` only
//! when every field is determined and matches, `No` as soon as one
//! determined field differs, `Unknown` otherwise. When the power is
//! provably different and a first-order sentence separates the two, the
//! report names the sentence template.

use crate::invariants::{
    Character, Citation, EquivalenceSpec, ExtCount, InjectionSpec, InvariantError,
    PartialInjectionSpec, PowerField, PowerInvariants, PowerReport, StructureSpec, TwoToOneSpec,
    TwoZeroToOneSpec, Verdict, SCHEMA_VERSION,
};

/// Sentence template asserting the existence of an infinite class.
pub const SENTENCE_INFINITE_CLASS: &str = "infinite_class_alpha";
/// Sentence template asserting an element whose forward orbit never
/// closes (an acyclic point / two-way chain witness).
pub const SENTENCE_Z_CHAIN: &str = "z_chain_alpha";
/// Sentence template asserting a preimage-free element with unbounded
/// forward path (a one-way chain head witness).
pub const SENTENCE_OMEGA_CHAIN: &str = "omega_chain_alpha";

/// Compute the power's invariants, verdict, and separating sentence for
/// a structure description.
pub fn classify(spec: &StructureSpec) -> Result<PowerReport, InvariantError> {
    spec.validate()?;
    let (power_invariants, sentence) = match spec {
        StructureSpec::Equivalence(s) => equivalence_rules(s),
        StructureSpec::Injection(s) => injection_rules(s),
        StructureSpec::TwoToOne(s) => two_to_one_rules(s),
        StructureSpec::TwoZeroToOne(s) => two_zero_rules(s),
        StructureSpec::PartialInjection(s) => partial_rules(s),
    };
    let isomorphic_to_original = verdict(spec, &power_invariants);
    let mut citations = field_citations(&power_invariants);
    match spec {
        StructureSpec::Injection(_) => citations.push(Citation::S4Corollary),
        StructureSpec::TwoToOne(_) => citations.push(Citation::S5Corollary),
        _ => {}
    }
    if sentence.is_some() {
        citations.push(match spec {
            StructureSpec::Equivalence(_) => Citation::S3Alpha,
            StructureSpec::Injection(_) => Citation::S4Sigma2,
            StructureSpec::TwoToOne(_) => Citation::S5Alpha,
            StructureSpec::TwoZeroToOne(_) => Citation::S6Alpha,
            StructureSpec::PartialInjection(_) => unreachable!("no sentence rule for this kind"),
        });
    }
    citations.sort_by_key(|c| c.tag());
    citations.dedup();
    Ok(PowerReport {
        schema_version: SCHEMA_VERSION.to_string(),
        input: spec.clone(),
        power_invariants,
        isomorphic_to_original,
        distinguishing_sentence: sentence,
        citations,
    })
}

fn equivalence_rules(s: &EquivalenceSpec) -> (PowerInvariants, Option<String>) {
    let character = PowerField::det(s.character.clone(), Citation::S3PropA);
    let (infinite_classes, sentence) = if s.character.bounded() {
        (
            PowerField::det(s.infinite_classes, Citation::S3BoundedChar),
            None,
        )
    } else {
        let citation = if s.infinite_classes == ExtCount::Omega {
            Citation::S3PropB
        } else {
            Citation::S3UnboundedChar
        };
        let sentence = (s.infinite_classes == ExtCount::Fin(0))
            .then(|| SENTENCE_INFINITE_CLASS.to_string());
        (PowerField::det(ExtCount::Omega, citation), sentence)
    };
    (
        PowerInvariants::Equivalence {
            character,
            infinite_classes,
        },
        sentence,
    )
}

fn injection_rules(s: &InjectionSpec) -> (PowerInvariants, Option<String>) {
    let character = PowerField::det(s.character.clone(), Citation::S4PropA);
    let omega_orbits = PowerField::det(s.omega_orbits, Citation::S4PropB);
    let has_infinite_orbit = !s.omega_orbits.is_zero() || !s.z_orbits.is_zero();
    let unbounded = !s.character.bounded();
    let (z_orbits, sentence) = if unbounded || has_infinite_orbit {
        let citation = match (unbounded, has_infinite_orbit) {
            (true, true) => Citation::S4PropC,
            (false, true) => Citation::S4InfiniteOrbit,
            (true, false) => Citation::S4UnboundedChar,
            (false, false) => unreachable!(),
        };
        let sentence =
            (unbounded && !has_infinite_orbit).then(|| SENTENCE_Z_CHAIN.to_string());
        (PowerField::det(ExtCount::Omega, citation), sentence)
    } else {
        (
            PowerField::det(ExtCount::Fin(0), Citation::S4Corollary),
            None,
        )
    };
    (
        PowerInvariants::Injection {
            character,
            omega_orbits,
            z_orbits,
        },
        sentence,
    )
}

fn two_to_one_rules(s: &TwoToOneSpec) -> (PowerInvariants, Option<String>) {
    let cycle_character = PowerField::det(s.cycle_character.clone(), Citation::S5ThmI);
    let z_chains = PowerField::det(ExtCount::Omega, Citation::S5ThmII);
    let sentence = (s.z_chains == ExtCount::Fin(0)).then(|| SENTENCE_Z_CHAIN.to_string());
    (
        PowerInvariants::TwoToOne {
            cycle_character,
            z_chains,
        },
        sentence,
    )
}

fn two_zero_rules(s: &TwoZeroToOneSpec) -> (PowerInvariants, Option<String>) {
    let chars_bounded = s.cycle_character.bounded()
        && s.path_character.bounded()
        && s.endpath_character.bounded();
    let no_infinite_parts = s.z_chains.is_zero()
        && s.omega_chains.is_zero()
        && s.infinite_length_endpoints.is_zero()
        && chars_bounded
        && !s.has_infinite_tree_branch;
    let cycle_character = PowerField::det(s.cycle_character.clone(), Citation::S6PropChars);
    let path_character = PowerField::det(s.path_character.clone(), Citation::S6PropChars);
    let endpath_character = PowerField::det(s.endpath_character.clone(), Citation::S6PropChars);

    let forces_two_way = !s.path_character.bounded()
        || !s.z_chains.is_zero()
        || !s.omega_chains.is_zero()
        || !s.infinite_length_endpoints.is_zero()
        || s.has_infinite_tree_branch;
    let z_chains = if no_infinite_parts {
        PowerField::det(s.z_chains, Citation::S6ThmI)
    } else if forces_two_way {
        PowerField::det(ExtCount::Omega, Citation::S6ThmII)
    } else {
        PowerField::undet(
            "declared path character is bounded while other declarations imply unbounded \
             paths; no rule applies to this inconsistent combination",
        )
    };

    let endpath_small =
        s.endpath_character.bounded() && s.infinite_length_endpoints.is_finite();
    let omega_chains = if endpath_small {
        PowerField::det(s.omega_chains, Citation::S6OmegaPres)
    } else if s.highly_computable {
        PowerField::det(ExtCount::Omega, Citation::S6OmegaChains)
    } else {
        PowerField::undet("requires uniformly computable preimage sets")
    };

    let infinite_length_endpoints = if no_infinite_parts {
        PowerField::det(s.infinite_length_endpoints, Citation::S6ThmI)
    } else {
        PowerField::undet(
            "endpoint count beyond the isomorphic case is not settled by the rule table",
        )
    };

    let sentence = (s.highly_computable
        && !s.endpath_character.bounded()
        && s.omega_chains == ExtCount::Fin(0)
        && s.infinite_length_endpoints == ExtCount::Fin(0))
    .then(|| SENTENCE_OMEGA_CHAIN.to_string());

    (
        PowerInvariants::TwoZeroToOne {
            cycle_character,
            path_character,
            endpath_character,
            z_chains,
            omega_chains,
            infinite_length_endpoints,
        },
        sentence,
    )
}

fn partial_rules(s: &PartialInjectionSpec) -> (PowerInvariants, Option<String>) {
    let cycle_character = PowerField::det(s.cycle_character.clone(), Citation::S7PartialChar);
    let chain_character = PowerField::det(s.chain_character.clone(), Citation::S7PartialChar);
    let tame = s.cycle_character.bounded()
        && s.chain_character.bounded()
        && s.z_chains.is_zero()
        && s.omega_chains.is_zero()
        && s.omega_star_chains.is_zero();
    let z_chains = if tame {
        PowerField::det(ExtCount::Fin(0), Citation::S7Bounded)
    } else {
        PowerField::det(ExtCount::Omega, Citation::S7Unbounded)
    };
    let omega_chains = if s.chain_character.bounded() {
        PowerField::det(s.omega_chains, Citation::S7OmegaPres)
    } else if s.range_computable {
        PowerField::det(ExtCount::Omega, Citation::S7Omega)
    } else {
        PowerField::undet("requires a computable range")
    };
    let omega_star_chains = if s.chain_character.bounded() {
        PowerField::det(s.omega_star_chains, Citation::S7OmegaPres)
    } else if s.domain_computable {
        PowerField::det(ExtCount::Omega, Citation::S7OmegaStar)
    } else {
        PowerField::undet("requires a computable domain")
    };
    (
        PowerInvariants::PartialInjection {
            cycle_character,
            chain_character,
            z_chains,
            omega_chains,
            omega_star_chains,
        },
        None,
    )
}

/// Compare power fields to input values. `No` as soon as a determined
/// field provably differs; `Yes` only when everything is determined and
/// matches; `Unknown` otherwise.
fn verdict(spec: &StructureSpec, power: &PowerInvariants) -> Verdict {
    let mut mismatch = false;
    let mut undetermined = false;
    let mut chk_char = |field: &PowerField<Character>, input: &Character| match field.value() {
        Some(v) => {
            if !v.equivalent(input) {
                mismatch = true;
            }
        }
        None => undetermined = true,
    };
    let mut m2 = false;
    let mut u2 = false;
    let mut chk_count = |field: &PowerField<ExtCount>, input: ExtCount| match field.value() {
        Some(&v) => {
            if v != input {
                m2 = true;
            }
        }
        None => u2 = true,
    };
    match (spec, power) {
        (
            StructureSpec::Equivalence(s),
            PowerInvariants::Equivalence {
                character,
                infinite_classes,
            },
        ) => {
            chk_char(character, &s.character);
            chk_count(infinite_classes, s.infinite_classes);
        }
        (
            StructureSpec::Injection(s),
            PowerInvariants::Injection {
                character,
                omega_orbits,
                z_orbits,
            },
        ) => {
            chk_char(character, &s.character);
            chk_count(omega_orbits, s.omega_orbits);
            chk_count(z_orbits, s.z_orbits);
        }
        (
            StructureSpec::TwoToOne(s),
            PowerInvariants::TwoToOne {
                cycle_character,
                z_chains,
            },
        ) => {
            chk_char(cycle_character, &s.cycle_character);
            chk_count(z_chains, s.z_chains);
        }
        (
            StructureSpec::TwoZeroToOne(s),
            PowerInvariants::TwoZeroToOne {
                cycle_character,
                path_character,
                endpath_character,
                z_chains,
                omega_chains,
                infinite_length_endpoints,
            },
        ) => {
            chk_char(cycle_character, &s.cycle_character);
            chk_char(path_character, &s.path_character);
            chk_char(endpath_character, &s.endpath_character);
            chk_count(z_chains, s.z_chains);
            chk_count(omega_chains, s.omega_chains);
            chk_count(infinite_length_endpoints, s.infinite_length_endpoints);
        }
        (
            StructureSpec::PartialInjection(s),
            PowerInvariants::PartialInjection {
                cycle_character,
                chain_character,
                z_chains,
                omega_chains,
                omega_star_chains,
            },
        ) => {
            chk_char(cycle_character, &s.cycle_character);
            chk_char(chain_character, &s.chain_character);
            chk_count(z_chains, s.z_chains);
            chk_count(omega_chains, s.omega_chains);
            chk_count(omega_star_chains, s.omega_star_chains);
        }
        _ => unreachable!("power invariants always mirror the input kind"),
    }
    if mismatch || m2 {
        Verdict::No
    } else if undetermined || u2 {
        Verdict::Unknown
    } else {
        Verdict::Yes
    }
}

fn field_citations(power: &PowerInvariants) -> Vec<Citation> {
    let mut out = Vec::new();
    let mut push_char = |f: &PowerField<Character>| {
        if let Some(c) = f.citation() {
            out.push(c);
        }
    };
    match power {
        PowerInvariants::Equivalence {
            character,
            infinite_classes,
        } => {
            push_char(character);
            out.extend(infinite_classes.citation());
        }
        PowerInvariants::Injection {
            character,
            omega_orbits,
            z_orbits,
        } => {
            push_char(character);
            out.extend(omega_orbits.citation());
            out.extend(z_orbits.citation());
        }
        PowerInvariants::TwoToOne {
            cycle_character,
            z_chains,
        } => {
            push_char(cycle_character);
            out.extend(z_chains.citation());
        }
        PowerInvariants::TwoZeroToOne {
            cycle_character,
            path_character,
            endpath_character,
            z_chains,
            omega_chains,
            infinite_length_endpoints,
        } => {
            push_char(cycle_character);
            push_char(path_character);
            push_char(endpath_character);
            out.extend(z_chains.citation());
            out.extend(omega_chains.citation());
            out.extend(infinite_length_endpoints.citation());
        }
        PowerInvariants::PartialInjection {
            cycle_character,
            chain_character,
            z_chains,
            omega_chains,
            omega_star_chains,
        } => {
            push_char(cycle_character);
            push_char(chain_character);
            out.extend(z_chains.citation());
            out.extend(omega_chains.citation());
            out.extend(omega_star_chains.citation());
        }
    }
    out
}
