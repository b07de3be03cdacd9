//! Finite-stage realizations of structure descriptions.
//!
//! A realization places a structure on (a subset of) the naturals in
//! stages. The layout is fixed up front — component number `j` of the
//! layout puts its `i`-th element at `pair(j, i)` — and a stage
//! determines how much of each component is materialized. Raising the
//! stage only ever adds elements; it never moves or removes them.
//!
//! Tables are arithmetic, not stored: membership, the function, its
//! preimages, and class membership are all computed from the element's
//! address, so even realizations with hundreds of thousands of elements
//! cost nothing to hold. Every probe answers with full honesty about
//! the stage: a probe beyond the materialized frontier reports
//! "unmaterialized" rather than guessing, and preimage sets say whether
//! they are known to be complete.
//!
//! Component layout: finite components are enumerated along diagonals
//! (size plus copy number), so every declared component eventually gets
//! a slot; infinite components are enumerated round robin over their
//! kinds. When only finitely many finite components are declared they
//! take the leading slots and infinite components follow; otherwise the
//! two streams interleave (finite on even slots), with the survivor
//! taking over once the other runs out.

use crate::interp::{pair, unpair, Lookup, StructureTables};
use crate::invariants::{
    CharEntry, Character, ExtCount, InvariantError, StructureSpec, TwoZeroToOneSpec,
};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Hard cap on materialized elements per realization; a guard against
/// accidentally exponential requests (tree depth grows with stage).
pub const ELEMENT_CAP: u64 = 8_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RealizeError {
    #[error("invalid structure description: {0}")]
    Invariant(#[from] InvariantError),
    #[error("not realizable in the canonical layout: {0}")]
    UnrealizableCanonical(String),
    #[error("realization would materialize {elements} elements (cap {cap}); lower the stage")]
    TooLarge { elements: u64, cap: u64 },
}

// ---------------------------------------------------------------------------
// Shapes
// ---------------------------------------------------------------------------

/// Tree decoration of a cycle component (functions where points have two
/// or zero preimages).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CycleTrees {
    /// Every cycle node carries a full leafless binary tree, materialized
    /// to the stage's depth (the component keeps growing).
    AllFull,
    /// Every cycle node carries a single extra leaf (closed component).
    AllSingleLeaf,
    /// A single-node loop carrying one spine of the given depth, each
    /// spine node with a leaf partner (closed component).
    Caterpillar { depth: u64 },
}

/// Which slots of a chain component carry a single leaf instead of a
/// full tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeafSlots {
    None,
    /// The first `n` slots in slot order (for one-way chains the head
    /// slot is bare, so these are the `n` slots after the head).
    FirstN(u64),
    All,
}

/// The shape of one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum BlockShape {
    /// Equivalence class; `size` None means it grows with the stage.
    Class { size: Option<u64> },
    /// Plain cycle of an injective function.
    Cycle { size: u64 },
    /// One-way infinite orbit of an injection (head has no preimage).
    OmegaOrbit,
    /// Two-way infinite orbit of an injection.
    ZOrbit,
    /// Finite chain of a partial injection (head outside the range,
    /// tail outside the domain).
    Chain { size: u64 },
    /// Right-infinite chain of a partial injection.
    OmegaChain,
    /// Left-infinite chain of a partial injection.
    OmegaStarChain,
    /// Two-way infinite chain of a partial injection.
    ZChain,
    /// Cycle with tree decorations.
    TreeCycle { size: u64, trees: CycleTrees },
    /// Two-way chain, every slot carrying a tree (full except where a
    /// leaf slot is designated).
    TreeZChain { leaf_slots: LeafSlots },
    /// One-way chain with a bare head, other slots carrying trees.
    TreeOmegaChain { leaf_slots: LeafSlots },
}

/// One materialized component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockInfo {
    /// Slot in the global layout; elements live at `pair(index, local)`.
    pub index: u64,
    pub shape: BlockShape,
    /// Copy number within the component's kind.
    pub copy: u64,
}

// ---------------------------------------------------------------------------
// Local coordinate helpers
// ---------------------------------------------------------------------------

/// Zigzag bijection between slot numbers and two-way positions:
/// 0, -1, 1, -2, 2, ...
pub fn zig(i: u64) -> i64 {
    if i % 2 == 0 {
        (i / 2) as i64
    } else {
        -(((i + 1) / 2) as i64)
    }
}

/// Inverse of `zig`.
pub fn unzig(z: i64) -> u64 {
    if z >= 0 {
        2 * z as u64
    } else {
        2 * ((-z) as u64) - 1
    }
}

/// Depth of heap node `v` (root 0 has depth 0, children of `v` are
/// `2v+1` and `2v+2`).
fn heap_depth(v: u64) -> u32 {
    63 - (v + 1).leading_zeros()
}

/// Caterpillar node ids, contiguous `0 ..= 2d-2` for depth `d`:
/// spine node `r_1` is id 0, deeper spine nodes `r_j` (j >= 2) are odd
/// ids `2j-3`, leaf partners `w_j` (1 <= j <= d-1) are even ids `2j`.
/// The id order makes the canonical (least) preimage of a spine node its
/// deeper spine successor rather than its leaf partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CatNode {
    /// Spine node at depth j (1-based from the loop).
    R(u64),
    /// Leaf partner of the spine node at depth j.
    W(u64),
}

fn cat_id(n: CatNode) -> u64 {
    match n {
        CatNode::R(1) => 0,
        CatNode::R(j) => 2 * j - 3,
        CatNode::W(j) => 2 * j,
    }
}

fn cat_decode(id: u64) -> CatNode {
    if id == 0 {
        CatNode::R(1)
    } else if id % 2 == 1 {
        CatNode::R((id + 3) / 2)
    } else {
        CatNode::W(id / 2)
    }
}

/// Caterpillar depth profile for the canonical host of unbounded
/// endpath characters: copy `q` has depth `isqrt(q) + 18`. Unbounded
/// over copies, but with total size growing like `q^(3/2)` so deep
/// copies stay affordable; the offset keeps every copy deep enough for
/// two-way iteration windows around mid-spine anchors.
pub fn caterpillar_depth(copy: u64) -> u64 {
    isqrt(copy) + 18
}

fn isqrt(v: u64) -> u64 {
    if v < 2 {
        return v;
    }
    let mut x = 1u64 << ((64 - v.leading_zeros()).div_ceil(2));
    loop {
        let y = (x + v / x) / 2;
        if y >= x {
            break;
        }
        x = y;
    }
    x
}

// ---------------------------------------------------------------------------
// Planning
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FiniteKind {
    Class,
    Cycle,
    Chain,
    TreeCycleLeaf,
    TreeCycleFull,
    Caterpillar,
}

#[derive(Debug, Clone)]
struct FiniteGroup {
    kind: FiniteKind,
    character: Character,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InfKind {
    Class,
    OmegaOrbit,
    ZOrbit,
    PartialZChain,
    PartialOmegaChain,
    PartialOmegaStarChain,
    TreeZChain,
    TreeOmegaChain,
}

#[derive(Debug, Clone)]
struct InfType {
    kind: InfKind,
    count: ExtCount,
    /// Leaf designation for copy 0 (chains hosting declared endpoints).
    leaf_copy0: LeafSlots,
}

#[derive(Debug, Clone)]
struct Plan {
    finite_groups: Vec<FiniteGroup>,
    infinite_types: Vec<InfType>,
}

fn plan(spec: &StructureSpec) -> Result<Plan, RealizeError> {
    spec.validate()?;
    let no_leaves = |kind, count| InfType {
        kind,
        count,
        leaf_copy0: LeafSlots::None,
    };
    Ok(match spec {
        StructureSpec::Equivalence(s) => Plan {
            finite_groups: vec![FiniteGroup {
                kind: FiniteKind::Class,
                character: s.character.clone(),
            }],
            infinite_types: vec![no_leaves(InfKind::Class, s.infinite_classes)],
        },
        StructureSpec::Injection(s) => Plan {
            finite_groups: vec![FiniteGroup {
                kind: FiniteKind::Cycle,
                character: s.character.clone(),
            }],
            infinite_types: vec![
                no_leaves(InfKind::OmegaOrbit, s.omega_orbits),
                no_leaves(InfKind::ZOrbit, s.z_orbits),
            ],
        },
        StructureSpec::TwoToOne(s) => Plan {
            finite_groups: vec![FiniteGroup {
                kind: FiniteKind::TreeCycleFull,
                character: s.cycle_character.clone(),
            }],
            infinite_types: vec![no_leaves(InfKind::TreeZChain, s.z_chains)],
        },
        StructureSpec::TwoZeroToOne(s) => plan_two_zero(s)?,
        StructureSpec::PartialInjection(s) => Plan {
            finite_groups: vec![
                FiniteGroup {
                    kind: FiniteKind::Cycle,
                    character: s.cycle_character.clone(),
                },
                FiniteGroup {
                    kind: FiniteKind::Chain,
                    character: s.chain_character.clone(),
                },
            ],
            infinite_types: vec![
                no_leaves(InfKind::PartialZChain, s.z_chains),
                no_leaves(InfKind::PartialOmegaChain, s.omega_chains),
                no_leaves(InfKind::PartialOmegaStarChain, s.omega_star_chains),
            ],
        },
    })
}

/// Compare a declared character against derived per-size counts on a
/// probe window plus a boundedness check (the workbench's desk-scale
/// notion of character equality).
fn chars_match(
    declared: &Character,
    derived_count: impl Fn(u64) -> ExtCount,
    derived_bounded: bool,
    probe: u64,
) -> bool {
    if declared.bounded() != derived_bounded {
        return false;
    }
    let bound = declared.key_probe_bound().max(probe) + 8;
    (1..=bound).all(|k| declared.count_at(k) == derived_count(k))
}

/// Canonical planning for functions with two-or-zero preimages.
///
/// Cycles carry one extra leaf per node (so every cycle point keeps two
/// preimages and the structure contributes exactly its declared cycle,
/// path, and endpath entries). Chains carry full leafless trees except
/// for designated leaf slots realizing declared infinite-path
/// endpoints. Unbounded endpath characters over a bounded cycle
/// character are hosted on an endless family of single-node loops with
/// growing caterpillar tails. The declared path/endpath characters and
/// the infinite-branch flag must match what this layout derives;
/// anything else is rejected rather than silently approximated.
fn plan_two_zero(s: &TwoZeroToOneSpec) -> Result<Plan, RealizeError> {
    let reject = |detail: &str| {
        Err(RealizeError::UnrealizableCanonical(detail.to_string()))
    };
    if !s.endpath_character.bounded() && s.cycle_character.bounded() {
        // Caterpillar host.
        let one_loop = Character::of_sizes(&[(1, ExtCount::Omega)]);
        if !s.cycle_character.equivalent(&one_loop) {
            return reject(
                "an unbounded endpath character over a bounded cycle character is hosted on \
                 endlessly many single-node loops; declare the cycle character as one size-1 \
                 count-omega entry",
            );
        }
        if !s.z_chains.is_zero() || !s.omega_chains.is_zero() {
            return reject("the growing-tail host carries no chain components");
        }
        if !s.infinite_length_endpoints.is_zero() {
            return reject("the growing-tail host has no infinite-path endpoints");
        }
        if s.has_infinite_tree_branch {
            return reject("the growing-tail host has finite tails only; no infinite branch");
        }
        // Derived path character: every length occurs endlessly often.
        let derived_path = |k: u64| {
            if k >= 1 {
                ExtCount::Omega
            } else {
                ExtCount::Fin(0)
            }
        };
        // Derived endpath character: every length from 3 up occurs
        // endlessly often (leaf partners at depth j end paths of length
        // j + 2; terminal spine nodes are absorbed into the same tail).
        let derived_endpath = |k: u64| {
            if k >= 3 {
                ExtCount::Omega
            } else {
                ExtCount::Fin(0)
            }
        };
        if !chars_match(&s.path_character, derived_path, false, 12) {
            return reject(
                "declared path character differs from the growing-tail host's (every length, \
                 endlessly often)",
            );
        }
        if !chars_match(&s.endpath_character, derived_endpath, false, 12) {
            return reject(
                "declared endpath character differs from the growing-tail host's (every length \
                 from 3 up, endlessly often)",
            );
        }
        return Ok(Plan {
            finite_groups: vec![FiniteGroup {
                kind: FiniteKind::Caterpillar,
                character: s.cycle_character.clone(),
            }],
            infinite_types: vec![],
        });
    }

    // Single-leaf cycles. Derived path and endpath counts follow from
    // the cycle character alone; a finite multiplicity on a progression
    // of cycle sizes would give path multiplicities that vary along the
    // progression, which no finite entry list states exactly.
    for e in &s.cycle_character.entries {
        if let CharEntry::Prog { count, .. } = e {
            if count.is_finite() {
                return reject(
                    "a progression of cycle sizes with finite multiplicity derives path \
                     multiplicities that vary by size; list such cycles explicitly or use an \
                     unbounded multiplicity",
                );
            }
        }
    }
    let cyc = &s.cycle_character;
    let derived_path = |k: u64| {
        // Cycle nodes of k-cycles have |forward orbit| = k; the leaf
        // over each node of a (k-1)-cycle has |forward orbit| = k.
        let mut c = cyc.count_at(k).times(k);
        if k >= 2 {
            c = c.add(cyc.count_at(k - 1).times(k - 1));
        }
        c
    };
    let derived_endpath = |k: u64| {
        if k >= 2 {
            cyc.count_at(k - 1).times(k - 1)
        } else {
            ExtCount::Fin(0)
        }
    };
    let probe = cyc.key_probe_bound() + 2;
    if !chars_match(&s.path_character, derived_path, cyc.bounded(), probe) {
        return reject(
            "declared path character differs from the one derived from the cycle character \
             (each size-k cycle contributes k paths of length k and k of length k+1)",
        );
    }
    if !chars_match(&s.endpath_character, derived_endpath, cyc.bounded(), probe) {
        return reject(
            "declared endpath character differs from the one derived from the cycle character \
             (each size-k cycle contributes k path-ending leaves of length k+1)",
        );
    }

    // Distribute declared infinite-path endpoints over chain leaf slots.
    let chains_exist = !s.z_chains.is_zero() || !s.omega_chains.is_zero();
    let heads = s.omega_chains;
    let mut z_leaf0 = LeafSlots::None;
    let mut omega_leaf0 = LeafSlots::None;
    let full_trees_exist;
    match (s.infinite_length_endpoints, heads) {
        (ExtCount::Omega, ExtCount::Omega) => {
            // One-way chain heads alone supply endlessly many endpoints.
            full_trees_exist = chains_exist;
        }
        (ExtCount::Omega, ExtCount::Fin(_)) => {
            if !chains_exist {
                return reject("declared infinite-path endpoints need chain components");
            }
            // All slots of the first chain component become leaves.
            if !s.z_chains.is_zero() {
                z_leaf0 = LeafSlots::All;
            } else {
                omega_leaf0 = LeafSlots::All;
            }
            let total_chains = s.z_chains.add(s.omega_chains);
            full_trees_exist = total_chains > ExtCount::Fin(1);
        }
        (ExtCount::Fin(_), ExtCount::Omega) => {
            return reject(
                "endlessly many one-way chain heads exceed the declared finite number of \
                 infinite-path endpoints",
            );
        }
        (ExtCount::Fin(ep), ExtCount::Fin(h)) => {
            if ep < h {
                return reject(
                    "one-way chain heads already exceed the declared infinite-path endpoints",
                );
            }
            let extra = ep - h;
            if extra > 0 {
                if !chains_exist {
                    return reject("declared infinite-path endpoints need chain components");
                }
                if !s.z_chains.is_zero() {
                    z_leaf0 = LeafSlots::FirstN(extra);
                } else {
                    omega_leaf0 = LeafSlots::FirstN(extra);
                }
            }
            full_trees_exist = chains_exist;
        }
    }
    if s.has_infinite_tree_branch != full_trees_exist {
        return if full_trees_exist {
            reject(
                "chain components carry full trees beyond the designated leaf slots, which \
                 contain infinite branches; declare the infinite-branch flag",
            )
        } else {
            reject("no component carries a full tree, so there is no infinite branch to declare")
        };
    }

    Ok(Plan {
        finite_groups: vec![FiniteGroup {
            kind: FiniteKind::TreeCycleLeaf,
            character: s.cycle_character.clone(),
        }],
        infinite_types: vec![
            InfType {
                kind: InfKind::TreeZChain,
                count: s.z_chains,
                leaf_copy0: z_leaf0,
            },
            InfType {
                kind: InfKind::TreeOmegaChain,
                count: s.omega_chains,
                leaf_copy0: omega_leaf0,
            },
        ],
    })
}

fn finite_shape(kind: FiniteKind, size: u64, copy: u64) -> BlockShape {
    match kind {
        FiniteKind::Class => BlockShape::Class { size: Some(size) },
        FiniteKind::Cycle => BlockShape::Cycle { size },
        FiniteKind::Chain => BlockShape::Chain { size },
        FiniteKind::TreeCycleLeaf => BlockShape::TreeCycle {
            size,
            trees: CycleTrees::AllSingleLeaf,
        },
        FiniteKind::TreeCycleFull => BlockShape::TreeCycle {
            size,
            trees: CycleTrees::AllFull,
        },
        FiniteKind::Caterpillar => BlockShape::TreeCycle {
            size,
            trees: CycleTrees::Caterpillar {
                depth: caterpillar_depth(copy),
            },
        },
    }
}

fn infinite_shape(t: &InfType, copy: u64) -> BlockShape {
    let leaves = if copy == 0 { t.leaf_copy0 } else { LeafSlots::None };
    match t.kind {
        InfKind::Class => BlockShape::Class { size: None },
        InfKind::OmegaOrbit => BlockShape::OmegaOrbit,
        InfKind::ZOrbit => BlockShape::ZOrbit,
        InfKind::PartialZChain => BlockShape::ZChain,
        InfKind::PartialOmegaChain => BlockShape::OmegaChain,
        InfKind::PartialOmegaStarChain => BlockShape::OmegaStarChain,
        InfKind::TreeZChain => BlockShape::TreeZChain { leaf_slots: leaves },
        InfKind::TreeOmegaChain => BlockShape::TreeOmegaChain { leaf_slots: leaves },
    }
}

// ---------------------------------------------------------------------------
// Realization
// ---------------------------------------------------------------------------

/// A materialized stage of a structure description.
#[derive(Debug, Clone)]
pub struct Realization {
    pub spec: StructureSpec,
    pub stage: u64,
    blocks: Vec<BlockInfo>,
    by_index: HashMap<u64, usize>,
    all_blocks_materialized: bool,
}

/// Build the realization of `spec` at `stage`.
pub fn realize(spec: &StructureSpec, stage: u64) -> Result<Realization, RealizeError> {
    let plan = plan(spec)?;

    let mut blocks: Vec<BlockInfo> = Vec::new();
    let mut skipped_any = false;

    // --- finite stream: diagonals d = size + copy, size ascending
    //     within a diagonal, groups in declaration order per size.
    let mut finite_positions = 0u64; // entries seen so far (stream position)
    let mut finite_entries: Vec<(u64, BlockShape)> = Vec::new(); // (stream pos, shape)
    let mut finite_total_known = true;
    for g in &plan.finite_groups {
        if !g.character.bounded() {
            finite_total_known = false;
        }
        for e in &g.character.entries {
            if e.count() == ExtCount::Omega {
                finite_total_known = false;
            }
        }
    }
    let max_diag = 2 * stage;
    for d in 1..=max_diag.max(1) {
        for k in 1..=d {
            let copy_no = d - k;
            for g in &plan.finite_groups {
                if g.character.count_at(k) >= ExtCount::Fin(copy_no + 1) {
                    let qualifies = k <= stage && copy_no <= stage;
                    if qualifies {
                        finite_entries
                            .push((finite_positions, finite_shape(g.kind, k, copy_no)));
                    } else {
                        skipped_any = true;
                    }
                    finite_positions += 1;
                }
            }
        }
    }
    // Entries beyond the scanned diagonals exist iff the stream is
    // infinite or some declared size exceeds it.
    let finite_total: Option<u64> = if finite_total_known {
        let mut total = 0u64;
        let mut beyond = false;
        for g in &plan.finite_groups {
            for e in &g.character.entries {
                if let CharEntry::Single { k, count } = e {
                    if let ExtCount::Fin(c) = count {
                        total += c;
                        if *k > max_diag.max(1) {
                            beyond = true;
                        }
                    }
                }
            }
        }
        if beyond {
            skipped_any = true;
        }
        Some(total)
    } else {
        skipped_any = true; // an endless stream always has more entries
        None
    };

    // --- infinite stream: round robin over kinds, skipping exhausted
    //     ones.
    let mut infinite_entries: Vec<(u64, BlockShape)> = Vec::new();
    let mut infinite_positions = 0u64;
    let infinite_total: Option<u64> = {
        let mut total = Some(0u64);
        for t in &plan.infinite_types {
            match (total, t.count) {
                (Some(acc), ExtCount::Fin(c)) => total = Some(acc + c),
                _ => total = None,
            }
        }
        total
    };
    for round in 0..=stage {
        for t in &plan.infinite_types {
            let available = match t.count {
                ExtCount::Fin(c) => round < c,
                ExtCount::Omega => true,
            };
            if available {
                infinite_entries.push((infinite_positions, infinite_shape(t, round)));
                infinite_positions += 1;
            }
        }
    }
    match infinite_total {
        Some(total) => {
            if infinite_positions < total {
                skipped_any = true; // copies beyond the stage remain
            }
        }
        None => skipped_any = true,
    }

    // --- merge the two streams into global slots.
    let place_finite = |p: u64| -> u64 {
        match (finite_total, infinite_total) {
            (Some(_), _) => p, // finite stream leads
            (None, Some(i)) => {
                if p < i {
                    2 * p
                } else {
                    p + i
                }
            }
            (None, None) => 2 * p,
        }
    };
    let place_infinite = |p: u64| -> u64 {
        match (finite_total, infinite_total) {
            (Some(f), _) => f + p,
            (None, _) => 2 * p + 1,
        }
    };
    let mut copies: HashMap<std::mem::Discriminant<BlockShape>, u64> = HashMap::new();
    for (p, shape) in finite_entries {
        let copy = copies.entry(std::mem::discriminant(&shape)).or_insert(0);
        blocks.push(BlockInfo {
            index: place_finite(p),
            shape,
            copy: *copy,
        });
        *copy += 1;
    }
    for (p, shape) in infinite_entries {
        let copy = copies.entry(std::mem::discriminant(&shape)).or_insert(0);
        blocks.push(BlockInfo {
            index: place_infinite(p),
            shape,
            copy: *copy,
        });
        *copy += 1;
    }
    blocks.sort_by_key(|b| b.index);

    let r = Realization {
        spec: spec.clone(),
        stage,
        by_index: blocks
            .iter()
            .enumerate()
            .map(|(i, b)| (b.index, i))
            .collect(),
        blocks,
        all_blocks_materialized: !skipped_any,
    };
    let n = r.element_count();
    if n > ELEMENT_CAP {
        return Err(RealizeError::TooLarge {
            elements: n,
            cap: ELEMENT_CAP,
        });
    }
    Ok(r)
}

/// Where an element sits inside its component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Site {
    ClassMember { i: u64, size: Option<u64> },
    CyclePoint { c: u64, k: u64 },
    LinePoint { i: u64 },
    /// Node of the tree over cycle slot `c` (heap coordinate `v`).
    CycleTreeNode { c: u64, k: u64, v: u64 },
    CatNode { node: CatNode, depth: u64 },
    /// Chain spine at slot `i`.
    SpineSlot { i: u64 },
    /// Node of the tree over chain slot `i` (heap coordinate `v`).
    ChainTreeNode { i: u64, v: u64 },
}

/// Completeness-annotated preimage listing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Preimages {
    pub elems: Vec<u64>,
    /// True iff no further preimage can appear at a later stage.
    pub complete: bool,
}

impl Realization {
    pub fn blocks(&self) -> &[BlockInfo] {
        &self.blocks
    }

    pub fn all_blocks_materialized(&self) -> bool {
        self.all_blocks_materialized
    }

    fn tree_depth_cap(&self) -> u64 {
        self.stage
    }

    /// Whether this block can still grow at later stages.
    pub fn block_closed(&self, b: &BlockInfo) -> bool {
        match b.shape {
            BlockShape::Class { size } => size.is_some(),
            BlockShape::Cycle { .. } | BlockShape::Chain { .. } => true,
            BlockShape::TreeCycle { trees, .. } => !matches!(trees, CycleTrees::AllFull),
            _ => false,
        }
    }

    fn locate(&self, x: u64) -> Option<(&BlockInfo, Site)> {
        let (j, local) = unpair(x);
        let b = &self.blocks[*self.by_index.get(&j)?];
        let site = self.decode_local(b, local)?;
        Some((b, site))
    }

    fn decode_local(&self, b: &BlockInfo, local: u64) -> Option<Site> {
        let depth_cap = self.tree_depth_cap();
        match b.shape {
            BlockShape::Class { size: Some(k) } => (local < k).then_some(Site::ClassMember {
                i: local,
                size: Some(k),
            }),
            BlockShape::Class { size: None } => {
                (local < self.stage).then_some(Site::ClassMember {
                    i: local,
                    size: None,
                })
            }
            BlockShape::Cycle { size } => {
                (local < size).then_some(Site::CyclePoint { c: local, k: size })
            }
            BlockShape::Chain { size } => (local < size).then_some(Site::LinePoint { i: local }),
            BlockShape::OmegaOrbit | BlockShape::OmegaChain | BlockShape::OmegaStarChain => {
                (local < self.stage).then_some(Site::LinePoint { i: local })
            }
            BlockShape::ZOrbit | BlockShape::ZChain => {
                (zig(local).unsigned_abs() <= self.stage && local <= 2 * self.stage)
                    .then_some(Site::LinePoint { i: local })
            }
            BlockShape::TreeCycle { size: k, trees } => {
                if local < k {
                    return Some(Site::CyclePoint { c: local, k });
                }
                let t = local - k;
                let v = t / k;
                let c = t % k;
                match trees {
                    CycleTrees::AllFull => ((heap_depth(v) as u64) <= depth_cap)
                        .then_some(Site::CycleTreeNode { c, k, v }),
                    CycleTrees::AllSingleLeaf => {
                        (v == 0).then_some(Site::CycleTreeNode { c, k, v })
                    }
                    CycleTrees::Caterpillar { depth } => {
                        (k == 1 && depth >= 1 && v <= 2 * depth - 2).then_some(Site::CatNode {
                            node: cat_decode(v),
                            depth,
                        })
                    }
                }
            }
            BlockShape::TreeZChain { leaf_slots } => {
                let (i, t) = unpair(local);
                if zig(i).unsigned_abs() > self.stage {
                    return None;
                }
                if t == 0 {
                    return Some(Site::SpineSlot { i });
                }
                let v = t - 1;
                let single = slot_is_leaf(leaf_slots, i, false);
                if single {
                    (v == 0).then_some(Site::ChainTreeNode { i, v })
                } else {
                    ((heap_depth(v) as u64) <= depth_cap).then_some(Site::ChainTreeNode { i, v })
                }
            }
            BlockShape::TreeOmegaChain { leaf_slots } => {
                let (i, t) = unpair(local);
                if i >= self.stage {
                    return None;
                }
                if t == 0 {
                    return Some(Site::SpineSlot { i });
                }
                if i == 0 {
                    return None; // the head carries no tree
                }
                let v = t - 1;
                let single = slot_is_leaf(leaf_slots, i, true);
                if single {
                    (v == 0).then_some(Site::ChainTreeNode { i, v })
                } else {
                    ((heap_depth(v) as u64) <= depth_cap).then_some(Site::ChainTreeNode { i, v })
                }
            }
        }
    }

    pub fn contains(&self, x: u64) -> bool {
        self.locate(x).is_some()
    }

    /// The function's value on `x`.
    pub fn forward_of(&self, x: u64) -> Lookup {
        let Some((b, site)) = self.locate(x) else {
            return Lookup::Missing;
        };
        let el = |local: u64| Lookup::Value(pair(b.index, local));
        match (b.shape, site) {
            (_, Site::ClassMember { .. }) => Lookup::Missing,
            (_, Site::CyclePoint { c, k }) => el((c + 1) % k),
            (BlockShape::Chain { size }, Site::LinePoint { i }) => {
                if i + 1 < size {
                    el(i + 1)
                } else {
                    Lookup::Missing // the tail is outside the domain
                }
            }
            (BlockShape::OmegaOrbit | BlockShape::OmegaChain, Site::LinePoint { i }) => {
                if i + 1 < self.stage {
                    el(i + 1)
                } else {
                    Lookup::Unmaterialized
                }
            }
            (BlockShape::OmegaStarChain, Site::LinePoint { i }) => {
                // Rightward-growing coordinates; position 0 is outside
                // the domain, every other position maps one step left.
                if i == 0 {
                    Lookup::Missing
                } else {
                    el(i - 1)
                }
            }
            (BlockShape::ZOrbit | BlockShape::ZChain, Site::LinePoint { i }) => {
                let z = zig(i);
                if (z + 1).unsigned_abs() <= self.stage {
                    el(unzig(z + 1))
                } else {
                    Lookup::Unmaterialized
                }
            }
            (BlockShape::TreeCycle { size: k, .. }, Site::CycleTreeNode { c, v, .. }) => {
                if v == 0 {
                    el(c)
                } else {
                    el(k + ((v - 1) / 2) * k + c)
                }
            }
            (_, Site::CatNode { node, .. }) => match node {
                CatNode::R(1) => el(0),
                CatNode::R(j) => el(1 + cat_id(CatNode::R(j - 1))),
                CatNode::W(j) => el(1 + cat_id(CatNode::R(j))),
            },
            (BlockShape::TreeZChain { .. }, Site::SpineSlot { i }) => {
                let z = zig(i);
                if (z + 1).unsigned_abs() <= self.stage {
                    el(pair(unzig(z + 1), 0))
                } else {
                    Lookup::Unmaterialized
                }
            }
            (BlockShape::TreeOmegaChain { .. }, Site::SpineSlot { i }) => {
                if i + 1 < self.stage {
                    el(pair(i + 1, 0))
                } else {
                    Lookup::Unmaterialized
                }
            }
            (_, Site::ChainTreeNode { i, v }) => {
                if v == 0 {
                    el(pair(i, 0))
                } else {
                    el(pair(i, 1 + (v - 1) / 2))
                }
            }
            _ => Lookup::Missing,
        }
    }

    /// All preimages of `x` materialized so far, with a completeness
    /// flag.
    pub fn preimages_of(&self, x: u64) -> Preimages {
        let Some((b, site)) = self.locate(x) else {
            return Preimages {
                elems: vec![],
                complete: true,
            };
        };
        let el = |local: u64| pair(b.index, local);
        let depth_cap = self.tree_depth_cap();
        match (b.shape, site) {
            (_, Site::ClassMember { .. }) => Preimages {
                elems: vec![],
                complete: true,
            },
            (BlockShape::Cycle { .. }, Site::CyclePoint { c, k }) => Preimages {
                elems: vec![el((c + k - 1) % k)],
                complete: true,
            },
            (BlockShape::TreeCycle { size, trees }, Site::CyclePoint { c, k }) => {
                let mut elems = vec![el((c + k - 1) % k)];
                match trees {
                    CycleTrees::Caterpillar { .. } => elems.push(el(1)),
                    _ => elems.push(el(size + c)),
                }
                elems.sort();
                Preimages {
                    elems,
                    complete: true,
                }
            }
            (BlockShape::Chain { .. }, Site::LinePoint { i }) => {
                if i == 0 {
                    Preimages {
                        elems: vec![],
                        complete: true,
                    }
                } else {
                    Preimages {
                        elems: vec![el(i - 1)],
                        complete: true,
                    }
                }
            }
            (BlockShape::OmegaOrbit | BlockShape::OmegaChain, Site::LinePoint { i }) => {
                if i == 0 {
                    Preimages {
                        elems: vec![],
                        complete: true,
                    }
                } else {
                    Preimages {
                        elems: vec![el(i - 1)],
                        complete: true,
                    }
                }
            }
            (BlockShape::OmegaStarChain, Site::LinePoint { i }) => {
                if i + 1 < self.stage {
                    Preimages {
                        elems: vec![el(i + 1)],
                        complete: true,
                    }
                } else {
                    Preimages {
                        elems: vec![],
                        complete: false,
                    }
                }
            }
            (BlockShape::ZOrbit | BlockShape::ZChain, Site::LinePoint { i }) => {
                let z = zig(i);
                if (z - 1).unsigned_abs() <= self.stage {
                    Preimages {
                        elems: vec![el(unzig(z - 1))],
                        complete: true,
                    }
                } else {
                    Preimages {
                        elems: vec![],
                        complete: false,
                    }
                }
            }
            (BlockShape::TreeCycle { size: k, trees }, Site::CycleTreeNode { c, v, .. }) => {
                match trees {
                    CycleTrees::AllSingleLeaf => Preimages {
                        elems: vec![],
                        complete: true,
                    },
                    _ => {
                        if (heap_depth(v) as u64) < depth_cap {
                            Preimages {
                                elems: vec![
                                    el(k + (2 * v + 1) * k + c),
                                    el(k + (2 * v + 2) * k + c),
                                ],
                                complete: true,
                            }
                        } else {
                            Preimages {
                                elems: vec![],
                                complete: false,
                            }
                        }
                    }
                }
            }
            (_, Site::CatNode { node, depth }) => match node {
                CatNode::R(j) if j < depth => Preimages {
                    elems: vec![el(1 + cat_id(CatNode::R(j + 1))), el(1 + cat_id(CatNode::W(j)))],
                    complete: true,
                },
                _ => Preimages {
                    elems: vec![],
                    complete: true,
                },
            },
            (BlockShape::TreeZChain { .. }, Site::SpineSlot { i }) => {
                let z = zig(i);
                let root = el(pair(i, 1));
                if (z - 1).unsigned_abs() <= self.stage {
                    let mut elems = vec![el(pair(unzig(z - 1), 0)), root];
                    elems.sort();
                    Preimages {
                        elems,
                        complete: true,
                    }
                } else {
                    Preimages {
                        elems: vec![root],
                        complete: false,
                    }
                }
            }
            (BlockShape::TreeOmegaChain { .. }, Site::SpineSlot { i }) => {
                if i == 0 {
                    Preimages {
                        elems: vec![],
                        complete: true,
                    }
                } else {
                    Preimages {
                        elems: vec![el(pair(i - 1, 0)), el(pair(i, 1))],
                        complete: true,
                    }
                }
            }
            (shape, Site::ChainTreeNode { i, v }) => {
                let single = match shape {
                    BlockShape::TreeZChain { leaf_slots } => slot_is_leaf(leaf_slots, i, false),
                    BlockShape::TreeOmegaChain { leaf_slots } => slot_is_leaf(leaf_slots, i, true),
                    _ => false,
                };
                if single {
                    Preimages {
                        elems: vec![],
                        complete: true,
                    }
                } else if (heap_depth(v) as u64) < depth_cap {
                    Preimages {
                        elems: vec![el(pair(i, 1 + (2 * v + 1))), el(pair(i, 1 + (2 * v + 2)))],
                        complete: true,
                    }
                } else {
                    Preimages {
                        elems: vec![],
                        complete: false,
                    }
                }
            }
            _ => Preimages {
                elems: vec![],
                complete: true,
            },
        }
    }

    /// Canonical inverse: the least preimage in the limit structure.
    /// When the least preimage is decidable from the address arithmetic
    /// but not yet materialized, the probe reports unmaterialized.
    pub fn back_of(&self, x: u64) -> Lookup {
        let Some((b, site)) = self.locate(x) else {
            return Lookup::Missing;
        };
        match (b.shape, site) {
            // Injective shapes: the unique preimage is canonical.
            (
                BlockShape::Cycle { .. }
                | BlockShape::Chain { .. }
                | BlockShape::OmegaOrbit
                | BlockShape::OmegaChain
                | BlockShape::OmegaStarChain
                | BlockShape::ZOrbit
                | BlockShape::ZChain,
                _,
            ) => {
                let p = self.preimages_of(x);
                match (p.elems.first(), p.complete) {
                    (Some(&e), _) => Lookup::Value(e),
                    (None, true) => Lookup::Missing,
                    (None, false) => Lookup::Unmaterialized,
                }
            }
            (BlockShape::TreeCycle { size: k, trees }, Site::CyclePoint { c, .. }) => {
                // The cycle predecessor's local is below k, the tree
                // root's is at least k: the predecessor is least.
                let _ = trees;
                Lookup::Value(pair(b.index, (c + k - 1) % k))
            }
            (BlockShape::TreeCycle { size: k, trees }, Site::CycleTreeNode { c, v, .. }) => {
                match trees {
                    CycleTrees::AllSingleLeaf => Lookup::Missing,
                    _ => {
                        if (heap_depth(v) as u64) < self.tree_depth_cap() {
                            Lookup::Value(pair(b.index, k + (2 * v + 1) * k + c))
                        } else {
                            Lookup::Unmaterialized
                        }
                    }
                }
            }
            (_, Site::CatNode { node, depth }) => match node {
                CatNode::R(j) if j < depth => {
                    // Deeper spine id (2j-1) precedes the leaf partner
                    // id (2j): the spine successor is the least
                    // preimage, so backing up descends the spine.
                    Lookup::Value(pair(b.index, 1 + cat_id(CatNode::R(j + 1))))
                }
                _ => Lookup::Missing,
            },
            (BlockShape::TreeZChain { .. }, Site::SpineSlot { i }) => {
                let z = zig(i);
                // Least preimage: the spine predecessor for z >= 0, the
                // slot's tree root for z < 0 (address arithmetic:
                // pair(unzig(z-1), 0) vs pair(unzig(z), 1)).
                if z >= 0 {
                    if (z - 1).unsigned_abs() <= self.stage {
                        Lookup::Value(pair(b.index, pair(unzig(z - 1), 0)))
                    } else {
                        Lookup::Unmaterialized
                    }
                } else {
                    Lookup::Value(pair(b.index, pair(i, 1)))
                }
            }
            (BlockShape::TreeOmegaChain { .. }, Site::SpineSlot { i }) => {
                if i == 0 {
                    Lookup::Missing
                } else {
                    Lookup::Value(pair(b.index, pair(i - 1, 0)))
                }
            }
            (shape, Site::ChainTreeNode { i, v }) => {
                let single = match shape {
                    BlockShape::TreeZChain { leaf_slots } => slot_is_leaf(leaf_slots, i, false),
                    BlockShape::TreeOmegaChain { leaf_slots } => slot_is_leaf(leaf_slots, i, true),
                    _ => false,
                };
                if single {
                    Lookup::Missing
                } else if (heap_depth(v) as u64) < self.tree_depth_cap() {
                    Lookup::Value(pair(b.index, pair(i, 1 + (2 * v + 1))))
                } else {
                    Lookup::Unmaterialized
                }
            }
            _ => Lookup::Missing,
        }
    }

    /// Class identifier (the layout slot) for equivalence realizations.
    pub fn class_of(&self, x: u64) -> Option<u64> {
        let (b, site) = self.locate(x)?;
        match site {
            Site::ClassMember { .. } => Some(b.index),
            _ => None,
        }
    }

    /// The `n`-th element (1-based, ascending) of the class of `rep`.
    pub fn nth_class_element(&self, rep: u64, n: u64) -> Lookup {
        let Some((b, site)) = self.locate(rep) else {
            return Lookup::Missing;
        };
        let Site::ClassMember { size, .. } = site else {
            return Lookup::Missing;
        };
        if n == 0 {
            return Lookup::Missing;
        }
        match size {
            Some(k) => {
                if n <= k {
                    Lookup::Value(pair(b.index, n - 1))
                } else {
                    Lookup::Missing
                }
            }
            None => {
                if n <= self.stage {
                    Lookup::Value(pair(b.index, n - 1))
                } else {
                    Lookup::Unmaterialized
                }
            }
        }
    }

    /// Materialized element count (arithmetic, no enumeration).
    pub fn element_count(&self) -> u64 {
        self.blocks
            .iter()
            .map(|b| self.block_size(b))
            .fold(0u64, |a, b| a.saturating_add(b))
    }

    fn block_size(&self, b: &BlockInfo) -> u64 {
        let tree_nodes = |depth: u64| -> u64 {
            if depth >= 62 {
                u64::MAX
            } else {
                (1u64 << (depth + 1)) - 1
            }
        };
        match b.shape {
            BlockShape::Class { size: Some(k) }
            | BlockShape::Cycle { size: k }
            | BlockShape::Chain { size: k } => k,
            BlockShape::Class { size: None }
            | BlockShape::OmegaOrbit
            | BlockShape::OmegaChain
            | BlockShape::OmegaStarChain => self.stage,
            BlockShape::ZOrbit | BlockShape::ZChain => 2 * self.stage + 1,
            BlockShape::TreeCycle { size: k, trees } => match trees {
                CycleTrees::AllFull => k.saturating_mul(1 + tree_nodes(self.tree_depth_cap())),
                CycleTrees::AllSingleLeaf => 2 * k,
                CycleTrees::Caterpillar { depth } => 2 * depth,
            },
            BlockShape::TreeZChain { leaf_slots } => {
                let slots = 2 * self.stage + 1;
                let mut total = slots; // spine
                for i in 0..slots {
                    total = total.saturating_add(if slot_is_leaf(leaf_slots, i, false) {
                        1
                    } else {
                        tree_nodes(self.tree_depth_cap())
                    });
                }
                total
            }
            BlockShape::TreeOmegaChain { leaf_slots } => {
                let mut total = self.stage; // spine
                for i in 1..self.stage {
                    total = total.saturating_add(if slot_is_leaf(leaf_slots, i, true) {
                        1
                    } else {
                        tree_nodes(self.tree_depth_cap())
                    });
                }
                total
            }
        }
    }

    /// Materialized element count of one block (arithmetic).
    pub fn block_element_count(&self, b: &BlockInfo) -> u64 {
        self.block_size(b)
    }

    /// Enumerate a block's elements in documented block-local order.
    pub fn block_elements(&self, b: &BlockInfo) -> Vec<u64> {
        let mut out = Vec::new();
        let el = |local: u64| pair(b.index, local);
        match b.shape {
            BlockShape::Class { .. }
            | BlockShape::Cycle { .. }
            | BlockShape::Chain { .. }
            | BlockShape::OmegaOrbit
            | BlockShape::OmegaChain
            | BlockShape::OmegaStarChain
            | BlockShape::ZOrbit
            | BlockShape::ZChain => {
                let n = self.block_size(b);
                out.extend((0..n).map(el));
            }
            BlockShape::TreeCycle { size: k, trees } => {
                out.extend((0..k).map(el));
                match trees {
                    CycleTrees::AllFull => {
                        let nodes = (1u64 << (self.tree_depth_cap() + 1)) - 1;
                        for v in 0..nodes {
                            for c in 0..k {
                                out.push(el(k + v * k + c));
                            }
                        }
                    }
                    CycleTrees::AllSingleLeaf => {
                        for c in 0..k {
                            out.push(el(k + c));
                        }
                    }
                    CycleTrees::Caterpillar { depth } => {
                        for id in 0..=(2 * depth - 2) {
                            out.push(el(1 + id));
                        }
                    }
                }
            }
            BlockShape::TreeZChain { leaf_slots } => {
                let slots = 2 * self.stage + 1;
                for i in 0..slots {
                    out.push(el(pair(i, 0)));
                }
                for i in 0..slots {
                    let nodes = if slot_is_leaf(leaf_slots, i, false) {
                        1
                    } else {
                        (1u64 << (self.tree_depth_cap() + 1)) - 1
                    };
                    for v in 0..nodes {
                        out.push(el(pair(i, 1 + v)));
                    }
                }
            }
            BlockShape::TreeOmegaChain { leaf_slots } => {
                for i in 0..self.stage {
                    out.push(el(pair(i, 0)));
                }
                for i in 1..self.stage {
                    let nodes = if slot_is_leaf(leaf_slots, i, true) {
                        1
                    } else {
                        (1u64 << (self.tree_depth_cap() + 1)) - 1
                    };
                    for v in 0..nodes {
                        out.push(el(pair(i, 1 + v)));
                    }
                }
            }
        }
        out
    }

    /// All materialized elements, block by block.
    pub fn elements(&self) -> Vec<u64> {
        self.blocks
            .iter()
            .flat_map(|b| self.block_elements(b))
            .collect()
    }

    /// Forward path length of `x`: the number of distinct elements in
    /// its forward orbit, when that resolves within the materialized
    /// part.
    pub fn path_length_of(&self, x: u64) -> PathLength {
        let mut seen = Vec::new();
        let mut cur = x;
        loop {
            if seen.contains(&cur) {
                return PathLength::Finite(seen.len() as u64);
            }
            seen.push(cur);
            match self.forward_of(cur) {
                Lookup::Value(y) => cur = y,
                Lookup::Missing => return PathLength::NoImage(seen.len() as u64),
                Lookup::Unmaterialized => return PathLength::HitsFrontier,
            }
            if seen.len() > 100_000 {
                return PathLength::HitsFrontier;
            }
        }
    }

    /// Text dump of the materialized tables: one `elem` line per
    /// element, then `f x y` lines (functional structures) or `E x y`
    /// lines (equivalence pairs, x < y).
    pub fn dump_tables(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        for b in &self.blocks {
            for x in self.block_elements(b) {
                writeln!(s, "elem {x}").unwrap();
            }
        }
        match self.spec {
            StructureSpec::Equivalence(_) => {
                for b in &self.blocks {
                    let members = self.block_elements(b);
                    for (i, &x) in members.iter().enumerate() {
                        for &y in &members[i + 1..] {
                            writeln!(s, "E {x} {y}").unwrap();
                        }
                    }
                }
            }
            _ => {
                for b in &self.blocks {
                    for x in self.block_elements(b) {
                        if let Lookup::Value(y) = self.forward_of(x) {
                            writeln!(s, "f {x} {y}").unwrap();
                        }
                    }
                }
            }
        }
        s
    }
}

/// Forward path length result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathLength {
    /// The orbit closes into a cycle after visiting this many distinct
    /// elements.
    Finite(u64),
    /// The orbit walks off the materialized frontier; its length is not
    /// decided at this stage.
    HitsFrontier,
    /// The orbit ends at a point with no image after this many distinct
    /// elements (partial functions only).
    NoImage(u64),
}

fn slot_is_leaf(leaf_slots: LeafSlots, slot: u64, head_is_bare: bool) -> bool {
    match leaf_slots {
        LeafSlots::None => false,
        LeafSlots::All => true,
        LeafSlots::FirstN(n) => {
            if head_is_bare {
                slot >= 1 && slot <= n
            } else {
                slot < n
            }
        }
    }
}

impl StructureTables for Realization {
    fn forward(&self, x: u64) -> Lookup {
        self.forward_of(x)
    }
    fn back(&self, x: u64) -> Lookup {
        self.back_of(x)
    }
    fn nth_of_class(&self, rep: u64, n: u64) -> Lookup {
        self.nth_class_element(rep, n)
    }
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

/// A count read off a finite stage: exact, or a lower bound that later
/// stages may raise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "estimate", rename_all = "snake_case")]
pub enum CountEstimate {
    Exact { value: u64 },
    AtLeast { value: u64 },
}

impl CountEstimate {
    pub fn value(self) -> u64 {
        match self {
            CountEstimate::Exact { value } | CountEstimate::AtLeast { value } => value,
        }
    }
    pub fn is_exact(self) -> bool {
        matches!(self, CountEstimate::Exact { .. })
    }
}

/// Per-size counts read off a realization, with a completeness flag
/// (complete = no size's count can change at later stages).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharCensus {
    pub counts: BTreeMap<u64, u64>,
    pub complete: bool,
}

impl CharCensus {
    pub fn observed(&self, k: u64) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }

    /// Membership of `(k, n)` as witnessed by the census.
    pub fn witnessed(&self, k: u64, n: u64) -> bool {
        n >= 1 && self.observed(k) >= n
    }
}

/// Invariants read off a realization, mirroring the structure kind.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtractedInvariants {
    Equivalence {
        character: CharCensus,
        infinite_classes: CountEstimate,
    },
    Injection {
        character: CharCensus,
        omega_orbits: CountEstimate,
        z_orbits: CountEstimate,
    },
    TwoToOne {
        cycle_character: CharCensus,
        z_chains: CountEstimate,
    },
    TwoZeroToOne {
        cycle_character: CharCensus,
        path_character: CharCensus,
        endpath_character: CharCensus,
        z_chains: CountEstimate,
        omega_chains: CountEstimate,
        infinite_length_endpoints: CountEstimate,
    },
    PartialInjection {
        cycle_character: CharCensus,
        chain_character: CharCensus,
        z_chains: CountEstimate,
        omega_chains: CountEstimate,
        omega_star_chains: CountEstimate,
    },
}

/// Read the isomorphism invariants off a realization's materialized
/// tables, honestly marking what later stages could still change.
pub fn extract(r: &Realization) -> ExtractedInvariants {
    let all = r.all_blocks_materialized();
    let est = |v: u64| {
        if all {
            CountEstimate::Exact { value: v }
        } else {
            CountEstimate::AtLeast { value: v }
        }
    };
    match &r.spec {
        StructureSpec::Equivalence(_) => {
            let mut counts = BTreeMap::new();
            let mut open = 0u64;
            for b in r.blocks() {
                match b.shape {
                    BlockShape::Class { size: Some(k) } => *counts.entry(k).or_insert(0) += 1,
                    BlockShape::Class { size: None } => open += 1,
                    _ => {}
                }
            }
            ExtractedInvariants::Equivalence {
                character: CharCensus {
                    counts,
                    complete: all,
                },
                infinite_classes: est(open),
            }
        }
        StructureSpec::Injection(_) => {
            let mut counts = BTreeMap::new();
            let (mut om, mut zz) = (0u64, 0u64);
            for b in r.blocks() {
                match b.shape {
                    BlockShape::Cycle { size } => *counts.entry(size).or_insert(0) += 1,
                    BlockShape::OmegaOrbit => om += 1,
                    BlockShape::ZOrbit => zz += 1,
                    _ => {}
                }
            }
            ExtractedInvariants::Injection {
                character: CharCensus {
                    counts,
                    complete: all,
                },
                omega_orbits: est(om),
                z_orbits: est(zz),
            }
        }
        StructureSpec::TwoToOne(_) => {
            let mut counts = BTreeMap::new();
            let mut zz = 0u64;
            for b in r.blocks() {
                match b.shape {
                    BlockShape::TreeCycle { size, .. } => *counts.entry(size).or_insert(0) += 1,
                    BlockShape::TreeZChain { .. } => zz += 1,
                    _ => {}
                }
            }
            ExtractedInvariants::TwoToOne {
                cycle_character: CharCensus {
                    counts,
                    complete: all,
                },
                z_chains: est(zz),
            }
        }
        StructureSpec::TwoZeroToOne(_) => {
            let mut cyc = BTreeMap::new();
            let mut path: BTreeMap<u64, u64> = BTreeMap::new();
            let mut endpath: BTreeMap<u64, u64> = BTreeMap::new();
            let (mut zz, mut om, mut endpoints) = (0u64, 0u64, 0u64);
            for b in r.blocks() {
                match b.shape {
                    BlockShape::TreeCycle { size: k, trees } => {
                        *cyc.entry(k).or_insert(0) += 1;
                        match trees {
                            CycleTrees::AllSingleLeaf => {
                                // k cycle nodes with orbit size k, k
                                // leaves with orbit size k + 1 ending
                                // their paths.
                                *path.entry(k).or_insert(0) += k;
                                *path.entry(k + 1).or_insert(0) += k;
                                *endpath.entry(k + 1).or_insert(0) += k;
                            }
                            CycleTrees::Caterpillar { depth } => {
                                *path.entry(1).or_insert(0) += 1;
                                for j in 1..=depth {
                                    *path.entry(j + 1).or_insert(0) += 1; // spine
                                }
                                for j in 1..depth {
                                    *path.entry(j + 2).or_insert(0) += 1; // partners
                                    *endpath.entry(j + 2).or_insert(0) += 1;
                                }
                                *endpath.entry(depth + 1).or_insert(0) += 1; // terminal spine
                            }
                            CycleTrees::AllFull => {
                                // Tree nodes over a full tree all have
                                // unbounded forward-orbit closure only
                                // through the cycle; their orbits are
                                // finite but the census of full-tree
                                // cycles is not used by this structure
                                // kind.
                            }
                        }
                    }
                    BlockShape::TreeZChain { leaf_slots } => {
                        zz += 1;
                        let slots = 2 * r.stage + 1;
                        for i in 0..slots {
                            if slot_is_leaf(leaf_slots, i, false) {
                                endpoints += 1;
                            }
                        }
                    }
                    BlockShape::TreeOmegaChain { leaf_slots } => {
                        om += 1;
                        if r.stage >= 1 {
                            endpoints += 1; // the bare head
                        }
                        for i in 1..r.stage {
                            if slot_is_leaf(leaf_slots, i, true) {
                                endpoints += 1;
                            }
                        }
                    }
                    _ => {}
                }
            }
            // Endpoint counts stay lower bounds whenever some chain can
            // still grow new designated leaf slots.
            let endpoints_exact = all
                && !r.blocks().iter().any(|b| {
                    matches!(
                        b.shape,
                        BlockShape::TreeZChain {
                            leaf_slots: LeafSlots::All
                        } | BlockShape::TreeOmegaChain {
                            leaf_slots: LeafSlots::All
                        }
                    )
                });
            ExtractedInvariants::TwoZeroToOne {
                cycle_character: CharCensus {
                    counts: cyc,
                    complete: all,
                },
                path_character: CharCensus {
                    counts: path,
                    complete: all,
                },
                endpath_character: CharCensus {
                    counts: endpath,
                    complete: all,
                },
                z_chains: est(zz),
                omega_chains: est(om),
                infinite_length_endpoints: if endpoints_exact {
                    CountEstimate::Exact { value: endpoints }
                } else {
                    CountEstimate::AtLeast { value: endpoints }
                },
            }
        }
        StructureSpec::PartialInjection(_) => {
            let mut cyc = BTreeMap::new();
            let mut chains = BTreeMap::new();
            let (mut zz, mut om, mut oms) = (0u64, 0u64, 0u64);
            for b in r.blocks() {
                match b.shape {
                    BlockShape::Cycle { size } => *cyc.entry(size).or_insert(0) += 1,
                    BlockShape::Chain { size } => *chains.entry(size).or_insert(0) += 1,
                    BlockShape::ZChain => zz += 1,
                    BlockShape::OmegaChain => om += 1,
                    BlockShape::OmegaStarChain => oms += 1,
                    _ => {}
                }
            }
            ExtractedInvariants::PartialInjection {
                cycle_character: CharCensus {
                    counts: cyc,
                    complete: all,
                },
                chain_character: CharCensus {
                    counts: chains,
                    complete: all,
                },
                z_chains: est(zz),
                omega_chains: est(om),
                omega_star_chains: est(oms),
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Finite isomorphism checking
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IsoError {
    #[error("isomorphism checking needs fully closed realizations (no growing component)")]
    NotClosed,
}

/// Decide isomorphism of two fully closed realizations by comparing
/// component signatures. For small realizations (up to 12 elements
/// each) the result is cross-checked by exhaustive bijection search in
/// the test suite.
pub fn finite_iso(r1: &Realization, r2: &Realization) -> Result<bool, IsoError> {
    let closed = |r: &Realization| {
        r.all_blocks_materialized() && r.blocks().iter().all(|b| r.block_closed(b))
    };
    if !closed(r1) || !closed(r2) {
        return Err(IsoError::NotClosed);
    }
    let mut s1 = signatures(r1);
    let mut s2 = signatures(r2);
    s1.sort();
    s2.sort();
    Ok(s1 == s2)
}

fn signatures(r: &Realization) -> Vec<(u8, u64, u64)> {
    r.blocks()
        .iter()
        .map(|b| match b.shape {
            BlockShape::Class { size: Some(k) } => (0u8, k, 0),
            BlockShape::Cycle { size } => (1, size, 0),
            BlockShape::Chain { size } => (2, size, 0),
            BlockShape::TreeCycle {
                size,
                trees: CycleTrees::AllSingleLeaf,
            } => (3, size, 0),
            BlockShape::TreeCycle {
                size,
                trees: CycleTrees::Caterpillar { depth },
            } => (4, size, depth),
            _ => unreachable!("open shapes are rejected before signing"),
        })
        .collect()
}

/// Exhaustive isomorphism search on raw tables; exponential, so only
/// for tiny realizations. Used as an oracle for `finite_iso`.
pub fn brute_force_iso(r1: &Realization, r2: &Realization) -> Result<bool, IsoError> {
    let closed = |r: &Realization| {
        r.all_blocks_materialized() && r.blocks().iter().all(|b| r.block_closed(b))
    };
    if !closed(r1) || !closed(r2) {
        return Err(IsoError::NotClosed);
    }
    let e1 = r1.elements();
    let e2 = r2.elements();
    if e1.len() != e2.len() {
        return Ok(false);
    }
    let n = e1.len();
    let mut map: HashMap<u64, u64> = HashMap::new();
    let mut used = vec![false; n];
    fn respects(r1: &Realization, r2: &Realization, map: &HashMap<u64, u64>) -> bool {
        for (&x, &y) in map {
            match (r1.forward_of(x), r2.forward_of(y)) {
                (Lookup::Value(fx), Lookup::Value(fy)) => {
                    if let Some(&mfx) = map.get(&fx) {
                        if mfx != fy {
                            return false;
                        }
                    }
                }
                (Lookup::Value(_), Lookup::Missing) | (Lookup::Missing, Lookup::Value(_)) => {
                    return false
                }
                _ => {}
            }
            // Equivalence structures: classes must match in size via
            // pairwise relation agreement.
            if let (Some(c1), Some(c2)) = (r1.class_of(x), r2.class_of(y)) {
                for (&x2, &y2) in map {
                    if x2 != x {
                        let same1 = r1.class_of(x2) == Some(c1);
                        let same2 = r2.class_of(y2) == Some(c2);
                        if same1 != same2 {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
    fn go(
        r1: &Realization,
        r2: &Realization,
        e1: &[u64],
        e2: &[u64],
        used: &mut Vec<bool>,
        map: &mut HashMap<u64, u64>,
        depth: usize,
    ) -> bool {
        if depth == e1.len() {
            return true;
        }
        let x = e1[depth];
        for (i, &y) in e2.iter().enumerate() {
            if used[i] {
                continue;
            }
            map.insert(x, y);
            used[i] = true;
            if respects(r1, r2, map) && go(r1, r2, e1, e2, used, map, depth + 1) {
                return true;
            }
            used[i] = false;
            map.remove(&x);
        }
        false
    }
    Ok(go(r1, r2, &e1, &e2, &mut used, &mut map, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{
        EquivalenceSpec, InjectionSpec, PartialInjectionSpec, Progression, TwoToOneSpec,
    };

    fn fin(n: u64) -> ExtCount {
        ExtCount::Fin(n)
    }

    fn eqv(character: Character, infinite_classes: ExtCount) -> StructureSpec {
        StructureSpec::Equivalence(EquivalenceSpec {
            character,
            infinite_classes,
        })
    }

    fn all_sizes_once() -> Character {
        Character {
            entries: vec![CharEntry::Prog {
                progression: Progression { start: 1, step: 1 },
                count: fin(1),
            }],
        }
    }

    #[test]
    fn zigzag_is_a_bijection() {
        for i in 0..200u64 {
            assert_eq!(unzig(zig(i)), i);
        }
        assert_eq!(zig(0), 0);
        assert_eq!(zig(1), -1);
        assert_eq!(zig(2), 1);
        assert_eq!(zig(3), -2);
    }

    #[test]
    fn caterpillar_ids_are_contiguous() {
        for d in 1..20u64 {
            let mut ids: Vec<u64> = (1..=d).map(|j| cat_id(CatNode::R(j))).collect();
            ids.extend((1..d).map(|j| cat_id(CatNode::W(j))));
            ids.sort();
            let expect: Vec<u64> = (0..=2 * d - 2).collect();
            assert_eq!(ids, expect, "depth {d}");
            for id in 0..=2 * d - 2 {
                assert_eq!(cat_id(cat_decode(id)), id);
            }
        }
    }

    #[test]
    fn ascending_sizes_layout_block_k_has_size_k_plus_one() {
        let spec = eqv(all_sizes_once(), fin(0));
        let r = realize(&spec, 6).unwrap();
        assert_eq!(r.blocks().len(), 6);
        for (j, b) in r.blocks().iter().enumerate() {
            assert_eq!(b.index, j as u64);
            assert_eq!(b.shape, BlockShape::Class {
                size: Some(j as u64 + 1)
            });
        }
        assert!(!r.all_blocks_materialized());
        // nth element of the class of pair(j, 0).
        assert_eq!(r.nth_class_element(pair(3, 0), 1), Lookup::Value(pair(3, 0)));
        assert_eq!(r.nth_class_element(pair(3, 0), 4), Lookup::Value(pair(3, 3)));
        assert_eq!(r.nth_class_element(pair(3, 0), 5), Lookup::Missing);
        assert_eq!(r.nth_class_element(pair(3, 0), 0), Lookup::Missing);
    }

    #[test]
    fn finite_plus_infinite_classes_layout() {
        let spec = eqv(Character::of_sizes(&[(1, fin(2))]), fin(1));
        let r = realize(&spec, 4).unwrap();
        let shapes: Vec<BlockShape> = r.blocks().iter().map(|b| b.shape).collect();
        assert_eq!(
            shapes,
            vec![
                BlockShape::Class { size: Some(1) },
                BlockShape::Class { size: Some(1) },
                BlockShape::Class { size: None },
            ]
        );
        assert!(r.all_blocks_materialized());
        // The open class has `stage` members so far and more to come.
        assert_eq!(r.nth_class_element(pair(2, 0), 4), Lookup::Value(pair(2, 3)));
        assert_eq!(r.nth_class_element(pair(2, 0), 5), Lookup::Unmaterialized);
        match extract(&r) {
            ExtractedInvariants::Equivalence {
                character,
                infinite_classes,
            } => {
                assert!(character.complete);
                assert_eq!(character.observed(1), 2);
                assert_eq!(infinite_classes, CountEstimate::Exact { value: 1 });
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn injection_orbit_tables() {
        let spec = StructureSpec::Injection(InjectionSpec {
            character: Character::of_sizes(&[(2, fin(1))]),
            omega_orbits: fin(1),
            z_orbits: fin(1),
        });
        let r = realize(&spec, 5).unwrap();
        let shapes: Vec<BlockShape> = r.blocks().iter().map(|b| b.shape).collect();
        assert_eq!(
            shapes,
            vec![
                BlockShape::Cycle { size: 2 },
                BlockShape::OmegaOrbit,
                BlockShape::ZOrbit,
            ]
        );
        // Cycle wraps.
        assert_eq!(r.forward_of(pair(0, 1)), Lookup::Value(pair(0, 0)));
        assert_eq!(r.back_of(pair(0, 0)), Lookup::Value(pair(0, 1)));
        // One-way orbit: head has provably no preimage, tail is open.
        assert_eq!(r.back_of(pair(1, 0)), Lookup::Missing);
        assert!(r.preimages_of(pair(1, 0)).complete);
        assert_eq!(r.forward_of(pair(1, 4)), Lookup::Unmaterialized);
        // Two-way orbit: zigzag adjacency, both ends open.
        assert_eq!(r.forward_of(pair(2, 0)), Lookup::Value(pair(2, 2)));
        assert_eq!(r.forward_of(pair(2, 1)), Lookup::Value(pair(2, 0)));
        let neg_end = pair(2, unzig(-5));
        assert!(!r.preimages_of(neg_end).complete);
        assert_eq!(r.back_of(neg_end), Lookup::Unmaterialized);
    }

    #[test]
    fn doubly_covered_cycle_tables() {
        let spec = StructureSpec::TwoToOne(TwoToOneSpec {
            cycle_character: Character::of_sizes(&[(1, fin(1))]),
            z_chains: fin(0),
        });
        let r = realize(&spec, 4).unwrap();
        assert_eq!(r.blocks().len(), 1);
        // 1 cycle node + full tree with depth cap 4: 2^5 - 1 nodes.
        assert_eq!(r.element_count(), 1 + 31);
        let cyc = pair(0, 0);
        // The loop point's preimages: itself and the tree root.
        let p = r.preimages_of(cyc);
        assert!(p.complete);
        assert_eq!(p.elems.len(), 2);
        assert!(p.elems.contains(&cyc));
        // Every materialized element with complete preimages has
        // exactly two; the deepest layer is honestly incomplete.
        let mut complete = 0;
        let mut incomplete = 0;
        for x in r.elements() {
            let p = r.preimages_of(x);
            if p.complete {
                assert_eq!(p.elems.len(), 2, "element {x}");
                for e in &p.elems {
                    assert_eq!(r.forward_of(*e), Lookup::Value(x));
                }
                complete += 1;
            } else {
                incomplete += 1;
            }
        }
        assert_eq!(incomplete, 16); // the depth-4 tree layer
        assert_eq!(complete, 16);
        // Canonical inverse of the loop is the loop itself (least
        // preimage), and of a tree node its left child.
        assert_eq!(r.back_of(cyc), Lookup::Value(cyc));
    }

    #[test]
    fn minimal_loop_with_leaf() {
        let spec = StructureSpec::TwoZeroToOne(TwoZeroToOneSpec {
            cycle_character: Character::of_sizes(&[(1, fin(1))]),
            path_character: Character::of_sizes(&[(1, fin(1)), (2, fin(1))]),
            endpath_character: Character::of_sizes(&[(2, fin(1))]),
            z_chains: fin(0),
            omega_chains: fin(0),
            infinite_length_endpoints: fin(0),
            highly_computable: true,
            has_infinite_tree_branch: false,
        });
        let r = realize(&spec, 3).unwrap();
        assert_eq!(r.element_count(), 2);
        let cyc = pair(0, 0);
        let leaf = pair(0, 1);
        assert_eq!(r.forward_of(leaf), Lookup::Value(cyc));
        assert_eq!(r.forward_of(cyc), Lookup::Value(cyc));
        let p = r.preimages_of(cyc);
        assert!(p.complete);
        assert_eq!(p.elems, vec![cyc, leaf]);
        let pl = r.preimages_of(leaf);
        assert!(pl.complete);
        assert!(pl.elems.is_empty());
        assert_eq!(r.path_length_of(cyc), PathLength::Finite(1));
        assert_eq!(r.path_length_of(leaf), PathLength::Finite(2));
        match extract(&r) {
            ExtractedInvariants::TwoZeroToOne {
                path_character,
                endpath_character,
                infinite_length_endpoints,
                ..
            } => {
                assert!(path_character.complete);
                assert_eq!(path_character.observed(1), 1);
                assert_eq!(path_character.observed(2), 1);
                assert_eq!(endpath_character.observed(2), 1);
                assert_eq!(infinite_length_endpoints, CountEstimate::Exact { value: 0 });
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn misdeclared_path_character_is_rejected() {
        let spec = StructureSpec::TwoZeroToOne(TwoZeroToOneSpec {
            cycle_character: Character::of_sizes(&[(1, fin(1))]),
            path_character: Character::of_sizes(&[(1, fin(1))]), // missing length 2
            endpath_character: Character::of_sizes(&[(2, fin(1))]),
            z_chains: fin(0),
            omega_chains: fin(0),
            infinite_length_endpoints: fin(0),
            highly_computable: true,
            has_infinite_tree_branch: false,
        });
        assert!(matches!(
            realize(&spec, 3),
            Err(RealizeError::UnrealizableCanonical(_))
        ));
    }

    #[test]
    fn growing_tail_host_layout_and_paths() {
        let spec = StructureSpec::TwoZeroToOne(TwoZeroToOneSpec {
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
        });
        let r = realize(&spec, 3).unwrap();
        assert_eq!(r.blocks().len(), 4); // copies 0..=3
        for (q, b) in r.blocks().iter().enumerate() {
            assert_eq!(
                b.shape,
                BlockShape::TreeCycle {
                    size: 1,
                    trees: CycleTrees::Caterpillar {
                        depth: caterpillar_depth(q as u64)
                    }
                }
            );
        }
        // Walk the spine of copy 0 (depth 18): the element one step
        // above the terminal spine node maps down the spine to the
        // loop.
        let d = caterpillar_depth(0);
        assert_eq!(d, 18);
        let terminal = pair(0, 1 + cat_id(CatNode::R(d)));
        assert_eq!(r.path_length_of(terminal), PathLength::Finite(d + 1));
        // Iterating forward from the terminal spine node d steps lands
        // on the loop.
        let mut cur = terminal;
        for _ in 0..d {
            match r.forward_of(cur) {
                Lookup::Value(y) => cur = y,
                other => panic!("{other:?}"),
            }
        }
        assert_eq!(cur, pair(0, 0));
        // The canonical inverse descends the spine (partner leaves have
        // larger addresses).
        let r9 = pair(0, 1 + cat_id(CatNode::R(9)));
        assert_eq!(r.back_of(r9), Lookup::Value(pair(0, 1 + cat_id(CatNode::R(10)))));
        // Degree law: every element has 2 or 0 preimages, all complete.
        for x in r.block_elements(&r.blocks()[0]) {
            let p = r.preimages_of(x);
            assert!(p.complete);
            assert!(p.elems.len() == 2 || p.elems.is_empty(), "element {x}");
        }
    }

    #[test]
    fn chain_heads_and_declared_endpoints() {
        // One loop-with-leaf plus one one-way chain whose head is the
        // single declared infinite-path endpoint; the chain's other
        // slots carry full trees, hence the infinite-branch flag.
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
        let r = realize(&spec, 4).unwrap();
        // Block 1 is the chain.
        let head = pair(1, pair(0, 0));
        let p = r.preimages_of(head);
        assert!(p.complete);
        assert!(p.elems.is_empty());
        assert_eq!(r.path_length_of(head), PathLength::HitsFrontier);
        // Non-head spine slots have exactly two preimages.
        let s1 = pair(1, pair(1, 0));
        let p1 = r.preimages_of(s1);
        assert!(p1.complete);
        assert_eq!(p1.elems.len(), 2);
        // The flag is mandatory: without it the plan is rejected.
        let mut bad = spec.clone();
        if let StructureSpec::TwoZeroToOne(s) = &mut bad {
            s.has_infinite_tree_branch = false;
        }
        assert!(matches!(
            realize(&bad, 4),
            Err(RealizeError::UnrealizableCanonical(_))
        ));
        match extract(&r) {
            ExtractedInvariants::TwoZeroToOne {
                omega_chains,
                infinite_length_endpoints,
                ..
            } => {
                assert_eq!(omega_chains, CountEstimate::Exact { value: 1 });
                assert_eq!(
                    infinite_length_endpoints,
                    CountEstimate::Exact { value: 1 }
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn partial_injection_chain_tables() {
        let spec = StructureSpec::PartialInjection(PartialInjectionSpec {
            cycle_character: Character::of_sizes(&[(2, fin(1))]),
            chain_character: Character::of_sizes(&[(3, fin(1))]),
            z_chains: fin(0),
            omega_chains: fin(1),
            omega_star_chains: fin(1),
            range_computable: true,
            domain_computable: true,
        });
        let r = realize(&spec, 5).unwrap();
        let shapes: Vec<BlockShape> = r.blocks().iter().map(|b| b.shape).collect();
        assert_eq!(
            shapes,
            vec![
                BlockShape::Cycle { size: 2 },
                BlockShape::Chain { size: 3 },
                BlockShape::OmegaChain,
                BlockShape::OmegaStarChain,
            ]
        );
        // Finite chain: head outside the range, tail outside the domain
        // — both structurally, budget-independent.
        let (h, m, t) = (pair(1, 0), pair(1, 1), pair(1, 2));
        assert_eq!(r.forward_of(h), Lookup::Value(m));
        assert_eq!(r.forward_of(t), Lookup::Missing);
        assert_eq!(r.back_of(h), Lookup::Missing);
        assert_eq!(r.back_of(t), Lookup::Value(m));
        // Left-infinite chain: slot 0 is outside the domain but its
        // preimage chain grows forever.
        let base = pair(3, 0);
        assert_eq!(r.forward_of(base), Lookup::Missing);
        assert_eq!(r.back_of(base), Lookup::Value(pair(3, 1)));
        assert!(!r.preimages_of(pair(3, 4)).complete);
        match extract(&r) {
            ExtractedInvariants::PartialInjection {
                omega_chains,
                omega_star_chains,
                z_chains,
                ..
            } => {
                assert_eq!(omega_chains, CountEstimate::Exact { value: 1 });
                assert_eq!(omega_star_chains, CountEstimate::Exact { value: 1 });
                assert_eq!(z_chains, CountEstimate::Exact { value: 0 });
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn realizations_are_monotone_in_stage() {
        let specs = vec![
            eqv(all_sizes_once(), fin(1)),
            StructureSpec::Injection(InjectionSpec {
                character: Character::of_sizes(&[(2, fin(2)), (3, ExtCount::Omega)]),
                omega_orbits: fin(1),
                z_orbits: ExtCount::Omega,
            }),
            StructureSpec::TwoToOne(TwoToOneSpec {
                cycle_character: Character::of_sizes(&[(2, ExtCount::Omega)]),
                z_chains: ExtCount::Omega,
            }),
            StructureSpec::PartialInjection(PartialInjectionSpec {
                cycle_character: Character::of_sizes(&[(1, ExtCount::Omega)]),
                chain_character: all_sizes_once(),
                z_chains: fin(1),
                omega_chains: fin(2),
                omega_star_chains: ExtCount::Omega,
                range_computable: false,
                domain_computable: false,
            }),
        ];
        for spec in specs {
            for s in 1..6u64 {
                let r1 = realize(&spec, s).unwrap();
                let r2 = realize(&spec, s + 1).unwrap();
                for x in r1.elements() {
                    assert!(r2.contains(x), "element {x} vanished from stage {s}+1");
                    // Settled answers persist.
                    if let Lookup::Value(y) = r1.forward_of(x) {
                        assert_eq!(r2.forward_of(x), Lookup::Value(y));
                    }
                    if let Lookup::Value(y) = r1.back_of(x) {
                        assert_eq!(r2.back_of(x), Lookup::Value(y));
                    }
                }
            }
        }
    }

    #[test]
    fn oversized_tree_requests_are_rejected() {
        let spec = StructureSpec::TwoToOne(TwoToOneSpec {
            cycle_character: Character::of_sizes(&[(1, fin(1))]),
            z_chains: fin(0),
        });
        assert!(matches!(
            realize(&spec, 25),
            Err(RealizeError::TooLarge { .. })
        ));
        assert!(realize(&spec, 18).is_ok());
    }

    #[test]
    fn finite_iso_agrees_with_brute_force() {
        let a = eqv(Character::of_sizes(&[(1, fin(1)), (2, fin(1))]), fin(0));
        let b = eqv(Character::of_sizes(&[(3, fin(1))]), fin(0));
        let c = eqv(Character::of_sizes(&[(2, fin(1)), (1, fin(1))]), fin(0));
        let specs = [a, b, c];
        for s1 in &specs {
            for s2 in &specs {
                let r1 = realize(s1, 5).unwrap();
                let r2 = realize(s2, 5).unwrap();
                let fast = finite_iso(&r1, &r2).unwrap();
                let slow = brute_force_iso(&r1, &r2).unwrap();
                assert_eq!(fast, slow, "{s1:?} vs {s2:?}");
            }
        }
        // Functional structures too.
        let f1 = StructureSpec::PartialInjection(PartialInjectionSpec {
            cycle_character: Character::of_sizes(&[(2, fin(1))]),
            chain_character: Character::of_sizes(&[(2, fin(1))]),
            z_chains: fin(0),
            omega_chains: fin(0),
            omega_star_chains: fin(0),
            range_computable: true,
            domain_computable: true,
        });
        let f2 = StructureSpec::PartialInjection(PartialInjectionSpec {
            cycle_character: Character::of_sizes(&[(2, fin(2))]),
            chain_character: Character::empty(),
            z_chains: fin(0),
            omega_chains: fin(0),
            omega_star_chains: fin(0),
            range_computable: true,
            domain_computable: true,
        });
        let r1 = realize(&f1, 4).unwrap();
        let r2 = realize(&f2, 4).unwrap();
        assert!(!finite_iso(&r1, &r2).unwrap());
        assert!(!brute_force_iso(&r1, &r2).unwrap());
        assert!(finite_iso(&r1, &r1.clone()).unwrap());
        // Open realizations refuse.
        let open = realize(&eqv(Character::empty(), ExtCount::Omega), 3).unwrap();
        assert!(finite_iso(&open, &open).is_err());
    }

    #[test]
    fn dump_contains_elements_and_relations() {
        let spec = eqv(Character::of_sizes(&[(2, fin(1))]), fin(0));
        let r = realize(&spec, 3).unwrap();
        let dump = r.dump_tables();
        assert!(dump.contains(&format!("elem {}\n", pair(0, 0))));
        assert!(dump.contains(&format!("E {} {}\n", pair(0, 0), pair(0, 1))));
        let fspec = StructureSpec::Injection(InjectionSpec {
            character: Character::of_sizes(&[(2, fin(1))]),
            omega_orbits: fin(0),
            z_orbits: fin(0),
        });
        let fr = realize(&fspec, 3).unwrap();
        let fdump = fr.dump_tables();
        assert!(fdump.contains(&format!("f {} {}\n", pair(0, 0), pair(0, 1))));
        assert!(fdump.contains(&format!("f {} {}\n", pair(0, 1), pair(0, 0))));
    }

    #[test]
    fn interleaved_layout_when_both_streams_are_endless() {
        let spec = eqv(all_sizes_once(), ExtCount::Omega);
        let r = realize(&spec, 5).unwrap();
        // Even slots finite classes, odd slots growing classes.
        for b in r.blocks() {
            match b.shape {
                BlockShape::Class { size: Some(_) } => assert_eq!(b.index % 2, 0),
                BlockShape::Class { size: None } => assert_eq!(b.index % 2, 1),
                other => panic!("{other:?}"),
            }
        }
        assert!(!r.all_blocks_materialized());
    }

    #[test]
    fn element_count_matches_enumeration() {
        let specs = vec![
            eqv(all_sizes_once(), fin(2)),
            StructureSpec::TwoToOne(TwoToOneSpec {
                cycle_character: Character::of_sizes(&[(2, fin(1))]),
                z_chains: fin(1),
            }),
        ];
        for spec in specs {
            for stage in 1..6 {
                let r = realize(&spec, stage).unwrap();
                assert_eq!(
                    r.element_count() as usize,
                    r.elements().len(),
                    "{spec:?} at {stage}"
                );
                // All enumerated elements resolve, and addresses
                // outside the enumeration do not.
                for x in r.elements() {
                    assert!(r.contains(x));
                }
            }
        }
    }
}
