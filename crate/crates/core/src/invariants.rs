//! Isomorphism invariants: extended counts, characters, structure
//! descriptions, and the classification report format.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// A count of classes, orbits, or chains: an exact natural number or
/// "infinitely many".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExtCount {
    Fin(u64),
    Omega,
}

impl ExtCount {
    pub const ZERO: ExtCount = ExtCount::Fin(0);

    pub fn is_zero(self) -> bool {
        self == ExtCount::Fin(0)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtCount::Fin(_))
    }

    /// Addition: any sum involving `Omega` is `Omega`; finite sums saturate.
    pub fn add(self, other: ExtCount) -> ExtCount {
        match (self, other) {
            (ExtCount::Fin(a), ExtCount::Fin(b)) => ExtCount::Fin(a.saturating_add(b)),
            _ => ExtCount::Omega,
        }
    }

    /// Multiplication by a finite scalar; `0 * Omega = 0`.
    pub fn times(self, k: u64) -> ExtCount {
        if k == 0 {
            return ExtCount::Fin(0);
        }
        match self {
            ExtCount::Fin(a) => ExtCount::Fin(a.saturating_mul(k)),
            ExtCount::Omega => ExtCount::Omega,
        }
    }
}

impl PartialOrd for ExtCount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtCount {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtCount::Fin(a), ExtCount::Fin(b)) => a.cmp(b),
            (ExtCount::Fin(_), ExtCount::Omega) => Ordering::Less,
            (ExtCount::Omega, ExtCount::Fin(_)) => Ordering::Greater,
            (ExtCount::Omega, ExtCount::Omega) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtCount::Fin(n) => write!(f, "{n}"),
            ExtCount::Omega => write!(f, "omega"),
        }
    }
}

impl Serialize for ExtCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtCount::Fin(n) => s.serialize_u64(*n),
            ExtCount::Omega => s.serialize_str("omega"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(ExtCount::Fin(n)),
            Raw::Text(t) if t == "omega" => Ok(ExtCount::Omega),
            Raw::Text(t) => Err(D::Error::custom(format!(
                "expected a count or \"omega\", got \"{t}\""
            ))),
        }
    }
}

/// An arithmetic progression of size keys: `start`, `start + step`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Progression {
    pub start: u64,
    pub step: u64,
}

impl Progression {
    pub fn contains(&self, k: u64) -> bool {
        self.step >= 1 && k >= self.start && (k - self.start) % self.step == 0
    }
}

/// One character entry: either a single size key or a progression of keys,
/// together with how many classes/orbits of each listed size exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CharEntry {
    Single { k: u64, count: ExtCount },
    Prog { progression: Progression, count: ExtCount },
}

impl CharEntry {
    pub fn count(&self) -> ExtCount {
        match self {
            CharEntry::Single { count, .. } | CharEntry::Prog { count, .. } => *count,
        }
    }
}

/// A character: for each finite size `k >= 1`, how many classes/orbits of
/// size `k` the structure has. Stored in generator form as a finite list
/// of entries; a progression entry covers infinitely many keys at once.
///
/// Serialized as a JSON list mixing `{"k": ..., "count": ...}` and
/// `{"progression": {"start": ..., "step": ...}, "count": ...}` objects.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Character {
    pub entries: Vec<CharEntry>,
}

/// Errors for malformed invariants or invalid queries against them.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvariantError {
    #[error("character keys must be at least 1 (got k={0})")]
    ZeroKey(u64),
    #[error("character entries must have nonzero count (size key {0})")]
    ZeroCount(u64),
    #[error("progression step must be at least 1 to enumerate its key set (start={0}, step=0)")]
    ZeroStep(u64),
    #[error("membership queries require k >= 1 and n >= 1 (got k={k}, n={n})")]
    BadMembershipQuery { k: u64, n: u64 },
    #[error("a structure description must have at least one nonzero count")]
    EmptyStructure,
}

impl Character {
    pub fn new(entries: Vec<CharEntry>) -> Result<Self, InvariantError> {
        let c = Character { entries };
        c.validate()?;
        Ok(c)
    }

    /// Convenience constructor from `(size, count)` pairs.
    pub fn of_sizes(pairs: &[(u64, ExtCount)]) -> Self {
        Character {
            entries: pairs
                .iter()
                .map(|&(k, count)| CharEntry::Single { k, count })
                .collect(),
        }
    }

    pub fn empty() -> Self {
        Character::default()
    }

    /// Structural sanity: keys >= 1, counts nonzero, progressions have a
    /// positive step (a zero step cannot enumerate its key set).
    pub fn validate(&self) -> Result<(), InvariantError> {
        for e in &self.entries {
            match e {
                CharEntry::Single { k, count } => {
                    if *k == 0 {
                        return Err(InvariantError::ZeroKey(0));
                    }
                    if count.is_zero() {
                        return Err(InvariantError::ZeroCount(*k));
                    }
                }
                CharEntry::Prog { progression, count } => {
                    if progression.step == 0 {
                        return Err(InvariantError::ZeroStep(progression.start));
                    }
                    if progression.start == 0 {
                        return Err(InvariantError::ZeroKey(0));
                    }
                    if count.is_zero() {
                        return Err(InvariantError::ZeroCount(progression.start));
                    }
                }
            }
        }
        Ok(())
    }

    /// Number of classes/orbits of size exactly `k` (summing all entries
    /// that cover `k`).
    pub fn count_at(&self, k: u64) -> ExtCount {
        let mut total = ExtCount::Fin(0);
        for e in &self.entries {
            match e {
                CharEntry::Single { k: kk, count } if *kk == k => total = total.add(*count),
                CharEntry::Prog { progression, count } if progression.contains(k) => {
                    total = total.add(*count)
                }
                _ => {}
            }
        }
        total
    }

    /// True iff the set of sizes with a nonzero count is finite. In
    /// generator form that holds exactly when no progression entry is
    /// present (progressions have infinite key sets).
    pub fn bounded(&self) -> bool {
        !self
            .entries
            .iter()
            .any(|e| matches!(e, CharEntry::Prog { .. }))
    }

    /// Membership of the pair `(k, n)`: are there at least `n`
    /// classes/orbits of size `k`? Both arguments must be >= 1.
    pub fn member(&self, k: u64, n: u64) -> Result<bool, InvariantError> {
        if k == 0 || n == 0 {
            return Err(InvariantError::BadMembershipQuery { k, n });
        }
        Ok(ExtCount::Fin(n) <= self.count_at(k))
    }

    /// All explicitly listed size keys plus progression starts; a coarse
    /// probe bound for comparisons and realization planning.
    pub fn key_probe_bound(&self) -> u64 {
        let mut bound = 1;
        for e in &self.entries {
            match e {
                CharEntry::Single { k, .. } => bound = bound.max(*k),
                CharEntry::Prog { progression, .. } => {
                    bound = bound.max(progression.start.saturating_add(progression.step))
                }
            }
        }
        bound
    }

    /// True iff at least one entry has nonzero count.
    pub fn is_empty_char(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total number of classes/orbits described (over all sizes).
    pub fn total_count(&self) -> ExtCount {
        let mut total = ExtCount::Fin(0);
        for e in &self.entries {
            match e {
                CharEntry::Single { count, .. } => total = total.add(*count),
                // A progression covers infinitely many keys, each with a
                // nonzero count, so its total is infinite.
                CharEntry::Prog { .. } => total = ExtCount::Omega,
            }
        }
        total
    }

    /// Pointwise comparison on a finite probe window plus tail behavior;
    /// sound for the generator forms this workbench produces (explicit
    /// keys plus step-1 progressions), and a documented desk-scale
    /// heuristic in general: counts are compared for all `k` up to both
    /// probe bounds plus slack, and both sides must agree on boundedness.
    pub fn equivalent(&self, other: &Character) -> bool {
        if self.bounded() != other.bounded() {
            return false;
        }
        let bound = self.key_probe_bound().max(other.key_probe_bound()) + 8;
        (1..=bound).all(|k| self.count_at(k) == other.count_at(k))
    }

    /// Evaluated map `size -> count` over sizes `1..=bound`, dropping
    /// zero counts.
    pub fn evaluate_upto(&self, bound: u64) -> BTreeMap<u64, ExtCount> {
        (1..=bound)
            .filter_map(|k| {
                let c = self.count_at(k);
                if c.is_zero() {
                    None
                } else {
                    Some((k, c))
                }
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Structure descriptions
// ---------------------------------------------------------------------------

/// Description of an equivalence structure: character of its finite
/// classes plus the number of infinite classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceSpec {
    pub character: Character,
    pub infinite_classes: ExtCount,
}

/// Description of a total injective unary function: character of its
/// finite orbits (cycles) plus counts of one-sided and two-sided infinite
/// orbits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionSpec {
    pub character: Character,
    pub omega_orbits: ExtCount,
    pub z_orbits: ExtCount,
}

/// Description of a total function where every point has exactly two
/// preimages: character of its cycle lengths plus the number of two-sided
/// chain components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoToOneSpec {
    pub cycle_character: Character,
    pub z_chains: ExtCount,
}

/// Description of a total function where every point has either exactly
/// two preimages or none. Components are cycles or chains decorated with
/// binary trees; the invariants record the cycle lengths, the multiset of
/// finite forward-path lengths (all points / endpoints separately), chain
/// counts, and how many endpoints have infinite forward path length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoZeroToOneSpec {
    pub cycle_character: Character,
    pub path_character: Character,
    pub endpath_character: Character,
    pub z_chains: ExtCount,
    pub omega_chains: ExtCount,
    pub infinite_length_endpoints: ExtCount,
    /// Whether the presentation makes preimage sets uniformly computable.
    pub highly_computable: bool,
    /// Whether some tree component contains an infinite branch.
    #[serde(default)]
    pub has_infinite_tree_branch: bool,
}

/// Description of an injective partial function whose components are
/// finite cycles, finite chains, or infinite chains of the three kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialInjectionSpec {
    pub cycle_character: Character,
    pub chain_character: Character,
    pub z_chains: ExtCount,
    pub omega_chains: ExtCount,
    pub omega_star_chains: ExtCount,
    /// Whether the presentation has computable range.
    pub range_computable: bool,
    /// Whether the presentation has computable domain.
    pub domain_computable: bool,
}

/// A structure description from one of the five supported classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StructureSpec {
    Equivalence(EquivalenceSpec),
    Injection(InjectionSpec),
    TwoToOne(TwoToOneSpec),
    TwoZeroToOne(TwoZeroToOneSpec),
    PartialInjection(PartialInjectionSpec),
}

impl StructureSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            StructureSpec::Equivalence(_) => "equivalence",
            StructureSpec::Injection(_) => "injection",
            StructureSpec::TwoToOne(_) => "two_to_one",
            StructureSpec::TwoZeroToOne(_) => "two_zero_to_one",
            StructureSpec::PartialInjection(_) => "partial_injection",
        }
    }

    /// Structural validation: characters well formed, and the description
    /// is nonempty (it must describe a structure with at least one
    /// element).
    pub fn validate(&self) -> Result<(), InvariantError> {
        let mut nonempty = false;
        let mut check = |c: &Character| -> Result<(), InvariantError> {
            c.validate()?;
            if !c.is_empty_char() {
                nonempty = true;
            }
            Ok(())
        };
        match self {
            StructureSpec::Equivalence(s) => {
                check(&s.character)?;
                nonempty |= !s.infinite_classes.is_zero();
            }
            StructureSpec::Injection(s) => {
                check(&s.character)?;
                nonempty |= !s.omega_orbits.is_zero() || !s.z_orbits.is_zero();
            }
            StructureSpec::TwoToOne(s) => {
                check(&s.cycle_character)?;
                nonempty |= !s.z_chains.is_zero();
            }
            StructureSpec::TwoZeroToOne(s) => {
                check(&s.cycle_character)?;
                check(&s.path_character)?;
                check(&s.endpath_character)?;
                nonempty |= !s.z_chains.is_zero() || !s.omega_chains.is_zero();
            }
            StructureSpec::PartialInjection(s) => {
                check(&s.cycle_character)?;
                check(&s.chain_character)?;
                nonempty |= !s.z_chains.is_zero()
                    || !s.omega_chains.is_zero()
                    || !s.omega_star_chains.is_zero();
            }
        }
        if nonempty {
            Ok(())
        } else {
            Err(InvariantError::EmptyStructure)
        }
    }
}

// ---------------------------------------------------------------------------
// Citation registry
// ---------------------------------------------------------------------------

macro_rules! citations {
    ($( $variant:ident => ($tag:literal, $summary:literal), )+) => {
        /// A stable identifier into the workbench's registry of
        /// classification facts. Every determined field of a report names
        /// the registry entry that justifies it.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Citation {
            $( $variant, )+
        }

        impl Citation {
            pub const ALL: &'static [Citation] = &[ $( Citation::$variant, )+ ];

            /// The registry tag (used verbatim in JSON reports).
            pub fn tag(self) -> &'static str {
                match self { $( Citation::$variant => $tag, )+ }
            }

            /// One-line statement of the registered fact.
            pub fn summary(self) -> &'static str {
                match self { $( Citation::$variant => $summary, )+ }
            }

            pub fn from_tag(tag: &str) -> Option<Citation> {
                match tag {
                    $( $tag => Some(Citation::$variant), )+
                    _ => None,
                }
            }
        }
    };
}

citations! {
    S3PropA => ("S3.prop-a", "equivalence powers: every finite-class size of the original recurs with at least the original multiplicity"),
    S3PropB => ("S3.prop-b", "equivalence powers: infinitely many infinite classes in the original yield infinitely many in the power"),
    S3PropC => ("S3.prop-c", "equivalence powers: the canonical image of an infinite class is an infinite class"),
    S3BoundedChar => ("S3.bounded-char", "equivalence powers: bounded character passes through unchanged, as does the infinite-class count"),
    S3UnboundedChar => ("S3.unbounded-char", "equivalence powers: unbounded character forces infinitely many infinite classes in the power"),
    S3Alpha => ("S3.alpha", "equivalence powers: with unbounded character and no infinite classes, a sentence asserting an infinite class separates the power from the original"),
    S4PropA => ("S4.prop-a", "injection powers: every finite-orbit size of the original recurs with at least the original multiplicity"),
    S4PropB => ("S4.prop-b", "injection powers: one-way infinite orbits of the original keep their count in the power"),
    S4PropC => ("S4.prop-c", "injection powers: unbounded orbit character or any infinite orbit forces infinitely many two-way orbits in the power"),
    S4UnboundedChar => ("S4.unbounded-char", "injection powers: unbounded orbit character yields new two-way infinite orbits"),
    S4InfiniteOrbit => ("S4.infinite-orbit", "injection powers: an infinite orbit in the original yields infinitely many two-way orbits in the power"),
    S4Corollary => ("S4.corollary", "injection powers: the power is isomorphic to the original iff the character is bounded with no infinite orbits, or the original already has infinitely many two-way orbits"),
    S4Sigma2 => ("S4.sigma2", "injection powers: in the non-isomorphic case a two-quantifier sentence asserting an infinite orbit separates power from original"),
    S5ThmI => ("S5.thm-i", "doubly-covered powers: the cycle character passes through unchanged"),
    S5ThmII => ("S5.thm-ii", "doubly-covered powers: the power always has infinitely many two-way chain components"),
    S5Corollary => ("S5.corollary", "doubly-covered powers: the power is isomorphic to the original iff the original already has infinitely many chain components"),
    S5Alpha => ("S5.alpha", "doubly-covered powers: when the original has no chain components, a sentence asserting an acyclic point separates power from original"),
    S6PropChars => ("S6.prop-chars", "cover-or-miss powers: cycle, path, and endpath characters all pass through with at least original multiplicity"),
    S6ThmI => ("S6.thm-i", "cover-or-miss powers: with all characters bounded and no infinite components, the power is isomorphic to the original"),
    S6ThmII => ("S6.thm-ii", "cover-or-miss powers: unbounded path character or any infinite component forces infinitely many two-way chain components"),
    S6OmegaPres => ("S6.omega-pres", "cover-or-miss powers: bounded endpath character with finitely many infinite-path endpoints preserves the one-way chain count"),
    S6OmegaChains => ("S6.omegachains", "cover-or-miss powers: for uniformly computable preimages, unbounded endpath character or infinitely many infinite-path endpoints forces infinitely many one-way chains"),
    S6Alpha => ("S6.alpha", "cover-or-miss powers: in the one-way-chain case a sentence asserting a point with no preimages and unbounded forward path separates power from original"),
    S7PartialChar => ("S7.partialchar", "partial-injection powers: cycle and chain characters pass through with at least original multiplicity"),
    S7Bounded => ("S7.bounded", "partial-injection powers: with both characters bounded and no infinite chains, the power is isomorphic to the original"),
    S7Unbounded => ("S7.unbounded", "partial-injection powers: unbounded character or any infinite chain forces infinitely many two-way chains"),
    S7OmegaPres => ("S7.omega-pres", "partial-injection powers: bounded chain character preserves the count of right-infinite chains"),
    S7Omega => ("S7.omega", "partial-injection powers: with computable range and unbounded chain character, the power gains infinitely many right-infinite chains"),
    S7OmegaStar => ("S7.omega-star", "partial-injection powers: with computable domain and unbounded chain character, the power gains infinitely many left-infinite chains"),
}

impl Serialize for Citation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.tag())
    }
}

impl<'de> Deserialize<'de> for Citation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let tag = String::deserialize(d)?;
        Citation::from_tag(&tag)
            .ok_or_else(|| D::Error::custom(format!("unknown citation tag \"{tag}\"")))
    }
}

impl fmt::Display for Citation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One invariant of the power: either a determined value with the
/// registry entry that justifies it, or an honest "undetermined" with the
/// reason the rule table does not decide it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PowerField<T> {
    Determined { value: T, citation: Citation },
    Undetermined { reason: String },
}

impl<T> PowerField<T> {
    pub fn det(value: T, citation: Citation) -> Self {
        PowerField::Determined { value, citation }
    }

    pub fn undet(reason: impl Into<String>) -> Self {
        PowerField::Undetermined {
            reason: reason.into(),
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            PowerField::Determined { value, .. } => Some(value),
            PowerField::Undetermined { .. } => None,
        }
    }

    pub fn citation(&self) -> Option<Citation> {
        match self {
            PowerField::Determined { citation, .. } => Some(*citation),
            PowerField::Undetermined { .. } => None,
        }
    }

    pub fn is_determined(&self) -> bool {
        matches!(self, PowerField::Determined { .. })
    }
}

/// The invariants of the cohesive power, mirroring the shape of the input
/// description. Effectivity flags of the input (which concern the
/// presentation, not the isomorphism type) have no counterpart here.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PowerInvariants {
    Equivalence {
        character: PowerField<Character>,
        infinite_classes: PowerField<ExtCount>,
    },
    Injection {
        character: PowerField<Character>,
        omega_orbits: PowerField<ExtCount>,
        z_orbits: PowerField<ExtCount>,
    },
    TwoToOne {
        cycle_character: PowerField<Character>,
        z_chains: PowerField<ExtCount>,
    },
    TwoZeroToOne {
        cycle_character: PowerField<Character>,
        path_character: PowerField<Character>,
        endpath_character: PowerField<Character>,
        z_chains: PowerField<ExtCount>,
        omega_chains: PowerField<ExtCount>,
        infinite_length_endpoints: PowerField<ExtCount>,
    },
    PartialInjection {
        cycle_character: PowerField<Character>,
        chain_character: PowerField<Character>,
        z_chains: PowerField<ExtCount>,
        omega_chains: PowerField<ExtCount>,
        omega_star_chains: PowerField<ExtCount>,
    },
}

/// Three-valued answer to "is the power isomorphic to the original?".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

/// Full classification report for one structure description.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PowerReport {
    pub schema_version: String,
    pub input: StructureSpec,
    pub power_invariants: PowerInvariants,
    pub isomorphic_to_original: Verdict,
    /// Template identifier of a sentence separating power from original
    /// (present only when one is available).
    pub distinguishing_sentence: Option<String>,
    /// Deduplicated registry entries used anywhere in this report.
    pub citations: Vec<Citation>,
}

pub const SCHEMA_VERSION: &str = "1";

impl PowerReport {
    /// If every field of the power is determined, rebuild a structure
    /// description for the power itself, reusing the input's effectivity
    /// flags (the rule table never decides those; this supports testing
    /// the rules for idempotence on their own output).
    pub fn determined_spec(&self) -> Option<StructureSpec> {
        match (&self.power_invariants, &self.input) {
            (
                PowerInvariants::Equivalence {
                    character,
                    infinite_classes,
                },
                StructureSpec::Equivalence(_),
            ) => Some(StructureSpec::Equivalence(EquivalenceSpec {
                character: character.value()?.clone(),
                infinite_classes: *infinite_classes.value()?,
            })),
            (
                PowerInvariants::Injection {
                    character,
                    omega_orbits,
                    z_orbits,
                },
                StructureSpec::Injection(_),
            ) => Some(StructureSpec::Injection(InjectionSpec {
                character: character.value()?.clone(),
                omega_orbits: *omega_orbits.value()?,
                z_orbits: *z_orbits.value()?,
            })),
            (
                PowerInvariants::TwoToOne {
                    cycle_character,
                    z_chains,
                },
                StructureSpec::TwoToOne(_),
            ) => Some(StructureSpec::TwoToOne(TwoToOneSpec {
                cycle_character: cycle_character.value()?.clone(),
                z_chains: *z_chains.value()?,
            })),
            (
                PowerInvariants::TwoZeroToOne {
                    cycle_character,
                    path_character,
                    endpath_character,
                    z_chains,
                    omega_chains,
                    infinite_length_endpoints,
                },
                StructureSpec::TwoZeroToOne(orig),
            ) => Some(StructureSpec::TwoZeroToOne(TwoZeroToOneSpec {
                cycle_character: cycle_character.value()?.clone(),
                path_character: path_character.value()?.clone(),
                endpath_character: endpath_character.value()?.clone(),
                z_chains: *z_chains.value()?,
                omega_chains: *omega_chains.value()?,
                infinite_length_endpoints: *infinite_length_endpoints.value()?,
                highly_computable: orig.highly_computable,
                has_infinite_tree_branch: orig.has_infinite_tree_branch,
            })),
            (
                PowerInvariants::PartialInjection {
                    cycle_character,
                    chain_character,
                    z_chains,
                    omega_chains,
                    omega_star_chains,
                },
                StructureSpec::PartialInjection(orig),
            ) => Some(StructureSpec::PartialInjection(PartialInjectionSpec {
                cycle_character: cycle_character.value()?.clone(),
                chain_character: chain_character.value()?.clone(),
                z_chains: *z_chains.value()?,
                omega_chains: *omega_chains.value()?,
                omega_star_chains: *omega_star_chains.value()?,
                range_computable: orig.range_computable,
                domain_computable: orig.domain_computable,
            })),
            _ => None,
        }
    }

    pub fn fully_determined(&self) -> bool {
        self.determined_spec().is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(n: u64) -> ExtCount {
        ExtCount::Fin(n)
    }

    // -- extended count arithmetic: the full addition table on small
    //    values, frozen from the definition "omega absorbs, finite adds".
    #[test]
    fn ext_count_addition_table() {
        assert_eq!(fin(0).add(fin(0)), fin(0));
        assert_eq!(fin(2).add(fin(3)), fin(5));
        assert_eq!(fin(0).add(ExtCount::Omega), ExtCount::Omega);
        assert_eq!(ExtCount::Omega.add(fin(7)), ExtCount::Omega);
        assert_eq!(ExtCount::Omega.add(ExtCount::Omega), ExtCount::Omega);
    }

    #[test]
    fn ext_count_ordering() {
        assert!(fin(0) < fin(1));
        assert!(fin(1_000_000) < ExtCount::Omega);
        assert_eq!(ExtCount::Omega.cmp(&ExtCount::Omega), Ordering::Equal);
    }

    #[test]
    fn ext_count_scalar_multiples() {
        assert_eq!(fin(3).times(4), fin(12));
        assert_eq!(ExtCount::Omega.times(0), fin(0));
        assert_eq!(ExtCount::Omega.times(2), ExtCount::Omega);
        assert_eq!(fin(5).times(0), fin(0));
    }

    #[test]
    fn ext_count_json_round_trip() {
        let vals = [fin(0), fin(42), ExtCount::Omega];
        for v in vals {
            let s = serde_json::to_string(&v).unwrap();
            let back: ExtCount = serde_json::from_str(&s).unwrap();
            assert_eq!(v, back);
        }
        assert_eq!(serde_json::to_string(&ExtCount::Omega).unwrap(), "\"omega\"");
        assert_eq!(serde_json::to_string(&fin(3)).unwrap(), "3");
        assert!(serde_json::from_str::<ExtCount>("\"aleph\"").is_err());
    }

    // -- character membership, computed two ways: through `member` and
    //    through an independently evaluated count table.
    #[test]
    fn character_membership_against_evaluated_counts() {
        // Two classes of size 1, one class of size 4, and one class of
        // every size 3, 5, 7, ...
        let c = Character::new(vec![
            CharEntry::Single { k: 1, count: fin(2) },
            CharEntry::Single { k: 4, count: fin(1) },
            CharEntry::Prog {
                progression: Progression { start: 3, step: 2 },
                count: fin(1),
            },
        ])
        .unwrap();
        // Independent oracle: evaluate counts by brute force over the
        // definition of the entry list.
        for k in 1..=40u64 {
            let mut expect = 0u64;
            if k == 1 {
                expect += 2;
            }
            if k == 4 {
                expect += 1;
            }
            if k >= 3 && (k - 3) % 2 == 0 {
                expect += 1;
            }
            assert_eq!(c.count_at(k), fin(expect), "count at size {k}");
            for n in 1..=4u64 {
                assert_eq!(c.member(k, n).unwrap(), n <= expect, "member({k},{n})");
            }
        }
        assert!(!c.bounded());
    }

    #[test]
    fn character_membership_rejects_zero_queries() {
        let c = Character::of_sizes(&[(2, fin(1))]);
        assert!(matches!(
            c.member(0, 1),
            Err(InvariantError::BadMembershipQuery { .. })
        ));
        assert!(matches!(
            c.member(2, 0),
            Err(InvariantError::BadMembershipQuery { .. })
        ));
    }

    #[test]
    fn character_boundedness() {
        let bounded = Character::of_sizes(&[(2, fin(3)), (9, ExtCount::Omega)]);
        assert!(bounded.bounded());
        let unbounded = Character::new(vec![CharEntry::Prog {
            progression: Progression { start: 1, step: 1 },
            count: fin(1),
        }])
        .unwrap();
        assert!(!unbounded.bounded());
        assert!(Character::empty().bounded());
    }

    #[test]
    fn character_validation_rules() {
        assert!(Character::new(vec![CharEntry::Single { k: 0, count: fin(1) }]).is_err());
        assert!(Character::new(vec![CharEntry::Single { k: 2, count: fin(0) }]).is_err());
        assert!(Character::new(vec![CharEntry::Prog {
            progression: Progression { start: 2, step: 0 },
            count: fin(1),
        }])
        .is_err());
    }

    #[test]
    fn character_json_round_trip() {
        let c = Character::new(vec![
            CharEntry::Single {
                k: 2,
                count: ExtCount::Omega,
            },
            CharEntry::Prog {
                progression: Progression { start: 1, step: 1 },
                count: fin(1),
            },
        ])
        .unwrap();
        let s = serde_json::to_string(&c).unwrap();
        let back: Character = serde_json::from_str(&s).unwrap();
        assert_eq!(c, back);
        // The wire form is a bare list.
        assert!(s.starts_with('['));
        let parsed: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(parsed[0]["k"], 2);
        assert_eq!(parsed[0]["count"], "omega");
        assert_eq!(parsed[1]["progression"]["start"], 1);
    }

    #[test]
    fn spec_json_round_trip_and_tags() {
        let spec = StructureSpec::Injection(InjectionSpec {
            character: Character::of_sizes(&[(3, ExtCount::Omega)]),
            omega_orbits: fin(0),
            z_orbits: ExtCount::Omega,
        });
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"kind\":\"injection\""));
        let back: StructureSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn spec_validation_requires_nonempty() {
        let empty = StructureSpec::Equivalence(EquivalenceSpec {
            character: Character::empty(),
            infinite_classes: fin(0),
        });
        assert_eq!(empty.validate(), Err(InvariantError::EmptyStructure));
        let ok = StructureSpec::Equivalence(EquivalenceSpec {
            character: Character::empty(),
            infinite_classes: ExtCount::Omega,
        });
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn two_zero_spec_tree_branch_flag_defaults_false() {
        let raw = r#"{
            "kind": "two_zero_to_one",
            "cycle_character": [{"k": 1, "count": 1}],
            "path_character": [{"k": 1, "count": 1}, {"k": 2, "count": 1}],
            "endpath_character": [{"k": 2, "count": 1}],
            "z_chains": 0,
            "omega_chains": 0,
            "infinite_length_endpoints": 0,
            "highly_computable": true
        }"#;
        let spec: StructureSpec = serde_json::from_str(raw).unwrap();
        match &spec {
            StructureSpec::TwoZeroToOne(s) => assert!(!s.has_infinite_tree_branch),
            _ => panic!("wrong kind"),
        }
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn citation_registry_is_consistent() {
        for &c in Citation::ALL {
            assert_eq!(Citation::from_tag(c.tag()), Some(c));
            assert!(!c.summary().is_empty());
            let s = serde_json::to_string(&c).unwrap();
            let back: Citation = serde_json::from_str(&s).unwrap();
            assert_eq!(c, back);
        }
        assert!(Citation::from_tag("S9.unknown").is_none());
    }

    #[test]
    fn power_field_json_shapes() {
        let det: PowerField<ExtCount> = PowerField::det(ExtCount::Omega, Citation::S5ThmII);
        let v = serde_json::to_value(&det).unwrap();
        assert_eq!(v["status"], "determined");
        assert_eq!(v["value"], "omega");
        assert_eq!(v["citation"], "S5.thm-ii");
        let undet: PowerField<ExtCount> = PowerField::undet("outside the rule table");
        let v = serde_json::to_value(&undet).unwrap();
        assert_eq!(v["status"], "undetermined");
        assert_eq!(v["reason"], "outside the rule table");
        let back: PowerField<ExtCount> = serde_json::from_value(v).unwrap();
        assert!(!back.is_determined());
    }

    #[test]
    fn character_equivalence_probe() {
        let a = Character::of_sizes(&[(2, fin(1)), (3, fin(1))]);
        let b = Character::new(vec![CharEntry::Prog {
            progression: Progression { start: 2, step: 1 },
            count: fin(1),
        }])
        .unwrap();
        assert!(!a.equivalent(&b));
        let c = Character::new(vec![
            CharEntry::Single { k: 2, count: fin(1) },
            CharEntry::Single { k: 3, count: fin(1) },
        ])
        .unwrap();
        assert!(a.equivalent(&c));
    }
}
