//! Stage-by-stage construction of a co-cohesive set by marker e-state
//! maximization, plus the quotient machinery built on top of it:
//! agreement checking of programs modulo the enumerated set, and the
//! race that turns a partial program into a total function.
//!
//! The construction maintains a window of movable markers on the
//! complement of the enumerated set. At each stage one marker (round
//! robin) inspects the markers after it; if a later marker's element has
//! a lexicographically greater membership pattern (with respect to the
//! generator family, most significant generator first, using as many
//! generators as the marker's index allows), the marker jumps to that
//! element, every element it skipped is enumerated, and the markers
//! behind it re-pack onto the least free elements. In the limit the
//! complement of the enumerated set is cohesive for the generator
//! family; at desk scale the run reports verifiable evidence instead of
//! the limit claim.

use crate::interp::{eval, eval_pure, Outcome, PartialFnProgram, StructureTables};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

/// One generator of the enumerable family the construction maximizes
/// against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gen", rename_all = "snake_case")]
pub enum GenSpec {
    /// Even numbers.
    Evens,
    /// Prime numbers.
    Primes,
    /// `x % modulus == residue`.
    Residue { modulus: u64, residue: u64 },
    /// Domain of a program: `x` is enumerated at stage `s` if the
    /// program halts on `x` within budget `s` (and `x < s`).
    Halting { program: PartialFnProgram },
    /// Domain of a small register machine, decoded from `index`
    /// (base-12 digits, least significant first): `0` halt, `1`/`2`
    /// increment r0/r1, `3`/`4` decrement r0/r1 (floored), `5`/`6` jump
    /// to the first instruction if r0/r1 is nonzero, `7`/`8` skip the
    /// next instruction if r0/r1 is zero, `9` swap, `10` add r1 into r0,
    /// `11` no-op. The input is placed in r0; running past the end
    /// halts.
    Machine { index: u64 },
}

/// A finite generator family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CeFamily {
    pub gens: Vec<GenSpec>,
}

impl CeFamily {
    /// The default eight-generator family: a mix of arithmetic sets,
    /// program domains, and machine domains. The machine indices decode
    /// to a slow total machine (index 63: decrement-and-loop, so every
    /// input halts after about `2x` steps) and a machine halting only on
    /// zero (index 67).
    pub fn default_eight() -> Self {
        CeFamily {
            gens: vec![
                GenSpec::Evens,
                GenSpec::Residue {
                    modulus: 3,
                    residue: 0,
                },
                GenSpec::Primes,
                GenSpec::Residue {
                    modulus: 4,
                    residue: 1,
                },
                GenSpec::Halting {
                    program: halts_iff_not_multiple_of_five(),
                },
                GenSpec::Halting {
                    program: slow_identity(),
                },
                GenSpec::Machine { index: 63 },
                GenSpec::Machine { index: 67 },
            ],
        }
    }
}

/// Program halting exactly on inputs that are not multiples of five.
fn halts_iff_not_multiple_of_five() -> PartialFnProgram {
    use crate::interp::Expr::*;
    let modexpr = Sub(
        Box::new(Input),
        Box::new(Mul(
            Box::new(DivFloor(Box::new(Input), Box::new(Const(5)))),
            Box::new(Const(5)),
        )),
    );
    PartialFnProgram::new(IfLess(
        Box::new(Const(0)),
        Box::new(modexpr),
        Box::new(Const(1)),
        Box::new(Undefined),
    ))
}

/// Total program whose running time grows linearly with its input: it
/// searches for the least candidate at least as large as the input.
fn slow_identity() -> PartialFnProgram {
    use crate::interp::Expr::*;
    PartialFnProgram::new(BoundedSearch {
        max: Box::new(Add(Box::new(Input), Box::new(Const(1)))),
        predicate: Box::new(IfLess(
            Box::new(Input),
            Box::new(Add(Box::new(SearchVar), Box::new(Const(1)))),
            Box::new(Const(1)),
            Box::new(Const(0)),
        )),
    })
}

// ---------------------------------------------------------------------------
// Register machines
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MachineOp {
    Halt,
    Inc(usize),
    Dec(usize),
    JumpStartIfNonzero(usize),
    SkipIfZero(usize),
    Swap,
    AddR1IntoR0,
    Nop,
}

fn decode_machine(index: u64) -> Vec<MachineOp> {
    let mut ops = Vec::new();
    let mut rest = index;
    loop {
        let d = rest % 12;
        ops.push(match d {
            0 => MachineOp::Halt,
            1 => MachineOp::Inc(0),
            2 => MachineOp::Inc(1),
            3 => MachineOp::Dec(0),
            4 => MachineOp::Dec(1),
            5 => MachineOp::JumpStartIfNonzero(0),
            6 => MachineOp::JumpStartIfNonzero(1),
            7 => MachineOp::SkipIfZero(0),
            8 => MachineOp::SkipIfZero(1),
            9 => MachineOp::Swap,
            10 => MachineOp::AddR1IntoR0,
            _ => MachineOp::Nop,
        });
        rest /= 12;
        if rest == 0 {
            break;
        }
    }
    ops
}

/// Lazy per-input simulation state for one machine.
struct MachineSim {
    steps: u64,
    pc: usize,
    regs: [u64; 2],
    halted_at: Option<u64>,
    diverges: bool,
    seen: HashSet<(usize, u64, u64)>,
}

impl MachineSim {
    fn fresh(input: u64) -> Self {
        MachineSim {
            steps: 0,
            pc: 0,
            regs: [input, 0],
            halted_at: None,
            diverges: false,
            seen: HashSet::new(),
        }
    }

    /// Advance the simulation to `target` steps (monotone, memoized).
    fn advance(&mut self, ops: &[MachineOp], target: u64) {
        while self.steps < target && self.halted_at.is_none() && !self.diverges {
            if self.pc >= ops.len() {
                self.halted_at = Some(self.steps);
                return;
            }
            let state = (self.pc, self.regs[0], self.regs[1]);
            if !self.seen.insert(state) {
                self.diverges = true;
                return;
            }
            if self.seen.len() > 4096 {
                self.seen.clear();
            }
            self.steps += 1;
            match ops[self.pc] {
                MachineOp::Halt => {
                    self.halted_at = Some(self.steps);
                    return;
                }
                MachineOp::Inc(r) => {
                    self.regs[r] = self.regs[r].saturating_add(1);
                    self.pc += 1;
                }
                MachineOp::Dec(r) => {
                    self.regs[r] = self.regs[r].saturating_sub(1);
                    self.pc += 1;
                }
                MachineOp::JumpStartIfNonzero(r) => {
                    if self.regs[r] != 0 {
                        self.pc = 0;
                    } else {
                        self.pc += 1;
                    }
                }
                MachineOp::SkipIfZero(r) => {
                    if self.regs[r] == 0 {
                        self.pc += 2;
                    } else {
                        self.pc += 1;
                    }
                }
                MachineOp::Swap => {
                    self.regs.swap(0, 1);
                    self.pc += 1;
                }
                MachineOp::AddR1IntoR0 => {
                    self.regs[0] = self.regs[0].saturating_add(self.regs[1]);
                    self.pc += 1;
                }
                MachineOp::Nop => {
                    self.pc += 1;
                }
            }
        }
    }
}

/// Number of steps after which the machine halts on `input`, or `None`
/// if it has not halted within `cap` steps.
pub fn machine_halting_steps(index: u64, input: u64, cap: u64) -> Option<u64> {
    let ops = decode_machine(index);
    let mut sim = MachineSim::fresh(input);
    sim.advance(&ops, cap);
    sim.halted_at
}

// ---------------------------------------------------------------------------
// Engine runtime: enrollment thresholds
// ---------------------------------------------------------------------------

const NEVER: u64 = u64::MAX;

/// Memoized computation of enrollment thresholds: `threshold(g, x)` is
/// the least stage `s` at which generator `g` has enumerated `x`
/// (`NEVER` if that does not happen within this run's stage cap). Every
/// generator set at stage `s` is exactly `{x : threshold(g, x) <= s}`,
/// which makes the per-stage sets finite, monotone, and empty at stage
/// zero.
struct Engines {
    gens: Vec<GenSpec>,
    cap: u64,
    machine_ops: Vec<Option<Vec<MachineOp>>>,
    memo: Vec<HashMap<u64, u64>>,
}

impl Engines {
    fn new(family: &CeFamily, cap: u64) -> Self {
        let machine_ops = family
            .gens
            .iter()
            .map(|g| match g {
                GenSpec::Machine { index } => Some(decode_machine(*index)),
                _ => None,
            })
            .collect();
        Engines {
            gens: family.gens.clone(),
            cap,
            machine_ops,
            memo: vec![HashMap::new(); family.gens.len()],
        }
    }

    fn threshold(&mut self, g: usize, x: u64) -> u64 {
        if let Some(&t) = self.memo[g].get(&x) {
            return t;
        }
        let t = self.compute_threshold(g, x);
        self.memo[g].insert(x, t);
        t
    }

    fn compute_threshold(&mut self, g: usize, x: u64) -> u64 {
        // Every generator additionally requires x < s, so the earliest
        // possible enrollment stage is x + 1.
        let base = x.saturating_add(1);
        match &self.gens[g] {
            GenSpec::Evens => {
                if x % 2 == 0 {
                    base
                } else {
                    NEVER
                }
            }
            GenSpec::Primes => {
                if is_prime(x) {
                    base
                } else {
                    NEVER
                }
            }
            GenSpec::Residue { modulus, residue } => {
                if *modulus > 0 && x % *modulus == *residue {
                    base
                } else {
                    NEVER
                }
            }
            GenSpec::Halting { program } => {
                match least_halting_budget(program, x, self.cap) {
                    Some(b) => base.max(b),
                    None => NEVER,
                }
            }
            GenSpec::Machine { .. } => {
                let ops = self.machine_ops[g].as_ref().expect("machine ops");
                let mut sim = MachineSim::fresh(x);
                sim.advance(ops, self.cap);
                match sim.halted_at {
                    Some(h) => base.max(h),
                    None => NEVER,
                }
            }
        }
    }
}

fn is_prime(x: u64) -> bool {
    if x < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= x {
        if x % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Least budget at which `p` halts on `x`, or `None` within `cap`.
/// Found by doubling then binary search; sound because halting is
/// monotone in the budget.
fn least_halting_budget(p: &PartialFnProgram, x: u64, cap: u64) -> Option<u64> {
    let halts = |b: u64| matches!(eval_pure(p, x, b), Outcome::Halt { .. });
    if !halts(cap) {
        return None;
    }
    let mut lo = 0; // does not halt at lo
    let mut hi = 1.min(cap);
    while !halts(hi) {
        lo = hi;
        hi = (hi * 2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if halts(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

// ---------------------------------------------------------------------------
// The marker run
// ---------------------------------------------------------------------------

/// One observation in a marker's e-state log: the packed membership
/// pattern of the marker's element at `stage`, most significant bit =
/// generator 0, using `bit_width` generators (the marker's own prefix
/// width).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EstateEntry {
    pub stage: u64,
    pub state_bits: u64,
    pub bit_width: u8,
}

/// An active marker move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveEvent {
    pub stage: u64,
    pub marker: usize,
    pub from: u64,
    pub to: u64,
    /// Elements enumerated by this move (the skipped stretch).
    pub dumped: Vec<u64>,
}

/// Completed run of the marker construction.
///
/// `marker_logs[i]` is a list of tenures for marker `i`. Within one
/// tenure the marker tracks a single history: entries are appended when
/// membership bits accrue to its element or when the marker actively
/// jumps to a better element, and consecutive entries never decrease
/// lexicographically. A marker that is passively re-packed (because a
/// marker before it jumped over it) starts a new tenure: it now tracks
/// an unrelated element, so its log starts fresh rather than faking a
/// comparison across different elements.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaximalRun {
    pub family: CeFamily,
    pub stages: u64,
    pub marker_count: usize,
    /// Final marker positions, in marker order (strictly increasing).
    pub markers: Vec<u64>,
    /// Enumerated elements with their entry stages.
    pub enumerated: BTreeMap<u64, u64>,
    pub marker_logs: Vec<Vec<Vec<EstateEntry>>>,
    pub move_counts: Vec<u64>,
    pub displacement_counts: Vec<u64>,
    pub last_move_stage: Vec<u64>,
    pub move_events: Vec<MoveEvent>,
}

pub const DEFAULT_MARKERS: usize = 24;

/// Run the construction with the default marker window.
pub fn run_maximal(family: &CeFamily, stages: u64) -> MaximalRun {
    run_maximal_with(family, stages, DEFAULT_MARKERS)
}

/// Run the construction with an explicit marker window size.
pub fn run_maximal_with(family: &CeFamily, stages: u64, marker_count: usize) -> MaximalRun {
    assert!(marker_count >= 1, "need at least one marker");
    let gen_count = family.gens.len().max(1);
    let mut engines = Engines::new(family, stages.max(1));

    let mut seats: Vec<u64> = (0..marker_count as u64).collect();
    let mut thresholds: Vec<Vec<u64>> = seats
        .iter()
        .map(|&x| (0..family.gens.len()).map(|g| engines.threshold(g, x)).collect())
        .collect();
    let mut enumerated: BTreeMap<u64, u64> = BTreeMap::new();
    let mut logs: Vec<Vec<Vec<EstateEntry>>> = vec![vec![Vec::new()]; marker_count];
    let mut move_counts = vec![0u64; marker_count];
    let mut displacement_counts = vec![0u64; marker_count];
    let mut last_move_stage = vec![0u64; marker_count];
    let mut move_events = Vec::new();

    // Packed prefix state of the element with threshold vector `thr`,
    // as seen with `width` generators at stage `s`.
    let state_at = |thr: &[u64], width: usize, s: u64| -> u64 {
        let mut bits = 0u64;
        for &t in thr.iter().take(width) {
            bits <<= 1;
            if t <= s {
                bits |= 1;
            }
        }
        // Positions beyond the family width contribute zero bits.
        bits << width.saturating_sub(thr.len().min(width)) as u32
    };

    // Record initial observations (stage 0: all sets empty).
    for i in 0..marker_count {
        let w = (i + 1).min(gen_count);
        logs[i][0].push(EstateEntry {
            stage: 0,
            state_bits: 0,
            bit_width: w as u8,
        });
        debug_assert_eq!(state_at(&thresholds[i], w, 0), 0);
    }

    for s in 1..=stages {
        let i = ((s - 1) % marker_count as u64) as usize;
        let width = (i + 1).min(gen_count);
        let my_state = state_at(&thresholds[i], width, s - 1);
        let mut target = None;
        for j in i + 1..marker_count {
            if state_at(&thresholds[j], width, s - 1) > my_state {
                target = Some(j);
                break;
            }
        }
        if let Some(j) = target {
            let new_seat = seats[j];
            let dumped: Vec<u64> = seats[i..j].to_vec();
            for &x in &dumped {
                enumerated.insert(x, s);
            }
            move_events.push(MoveEvent {
                stage: s,
                marker: i,
                from: seats[i],
                to: new_seat,
                dumped,
            });
            seats[i] = new_seat;
            thresholds[i] = thresholds[j].clone();
            move_counts[i] += 1;
            last_move_stage[i] = s;

            // Re-pack the markers after i onto the least free elements
            // above the new seat. Markers whose seat is unchanged keep
            // their tenure; markers moved to a different element start a
            // new one.
            let mut pos = seats[i];
            for k in i + 1..marker_count {
                let mut cand = pos + 1;
                while enumerated.contains_key(&cand) {
                    cand += 1;
                }
                if seats[k] != cand {
                    seats[k] = cand;
                    thresholds[k] = (0..family.gens.len())
                        .map(|g| engines.threshold(g, cand))
                        .collect();
                    displacement_counts[k] += 1;
                    last_move_stage[k] = s;
                    logs[k].push(Vec::new());
                }
                pos = cand;
            }
        }

        // Dense log maintenance: record each marker's state whenever it
        // changes (with respect to the sets as known after stage s).
        for (k, log) in logs.iter_mut().enumerate() {
            let w = (k + 1).min(gen_count);
            let st = state_at(&thresholds[k], w, s);
            let tenure = log.last_mut().expect("tenure");
            let record = match tenure.last() {
                None => true,
                Some(last) => last.state_bits != st,
            };
            if record {
                tenure.push(EstateEntry {
                    stage: s,
                    state_bits: st,
                    bit_width: w as u8,
                });
            }
        }
    }

    MaximalRun {
        family: family.clone(),
        stages,
        marker_count,
        markers: seats,
        enumerated,
        marker_logs: logs,
        move_counts,
        displacement_counts,
        last_move_stage,
        move_events,
    }
}

impl MaximalRun {
    /// The least `count` elements outside the enumerated set.
    pub fn complement_window(&self, count: usize) -> Vec<u64> {
        let mut out = Vec::with_capacity(count);
        let mut x = 0u64;
        while out.len() < count {
            if !self.enumerated.contains_key(&x) {
                out.push(x);
            }
            x += 1;
        }
        out
    }

    /// Verify every tenure of every marker log is lexicographically
    /// nondecreasing; returns the first violation if any.
    pub fn log_monotonicity_violation(&self) -> Option<(usize, usize, u64)> {
        for (i, tenures) in self.marker_logs.iter().enumerate() {
            for (t, tenure) in tenures.iter().enumerate() {
                for w in tenure.windows(2) {
                    if w[1].state_bits < w[0].state_bits {
                        return Some((i, t, w[1].stage));
                    }
                }
            }
        }
        None
    }

    /// Per-generator cohesion evidence at the final stage: among markers
    /// with index greater than the generator's, how many of their
    /// elements are in / out of the generator's set, and whether the
    /// minority fits within the allowed exception budget (the
    /// generator's index).
    ///
    /// The tail of the window is excluded: the final marker is the
    /// re-packing frontier and can never improve, and each marker just
    /// before it only has the progressively poorer tail as its supply of
    /// better elements, so the last few markers form a staircase of
    /// boundary artifacts. One tail slot per generator plus the frontier
    /// itself is excluded; the interior markers are the ones the
    /// construction actually settles.
    pub fn cohesion_evidence(&self) -> Vec<GenEvidence> {
        let mut engines = Engines::new(&self.family, self.stages.max(1));
        let tail_margin = self.family.gens.len() + 1;
        let cutoff = self.marker_count.saturating_sub(tail_margin);
        self.family
            .gens
            .iter()
            .enumerate()
            .map(|(g, _)| {
                let mut inside = 0usize;
                let mut outside = 0usize;
                for (idx, &m) in self.markers.iter().enumerate() {
                    if idx > g && idx < cutoff {
                        if engines.threshold(g, m) <= self.stages {
                            inside += 1;
                        } else {
                            outside += 1;
                        }
                    }
                }
                let exceptions = inside.min(outside);
                GenEvidence {
                    gen_index: g,
                    inside,
                    outside,
                    exceptions,
                    pass: exceptions <= g,
                }
            })
            .collect()
    }
}

/// Evidence that the final markers are almost inside or almost outside
/// one generator's set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenEvidence {
    pub gen_index: usize,
    pub inside: usize,
    pub outside: usize,
    pub exceptions: usize,
    pub pass: bool,
}

// ---------------------------------------------------------------------------
// Agreement modulo the enumerated set
// ---------------------------------------------------------------------------

/// Result of comparing two programs on an initial window of the
/// complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EqCVerdict {
    /// Every input where both halted gave equal values, and nothing is
    /// pending. `checked` lists the inputs with a definite equal pair;
    /// inputs where either side is provably undefined are exempt (an
    /// almost-everywhere domain condition absorbs them).
    AgreeOnWindow { checked: Vec<u64> },
    /// Some input has both sides halting with different values.
    DisagreeAt { witnesses: Vec<(u64, u64, u64)> },
    /// No disagreement, but some inputs are still running at this
    /// budget.
    Inconclusive { pending: Vec<u64> },
}

/// Compare two programs as names for power elements: evaluate both on
/// the first `window` complement elements of `run` with the given
/// budget (and structure binding), and report agreement modulo the
/// enumerated set.
pub fn eqc_check(
    p1: &PartialFnProgram,
    p2: &PartialFnProgram,
    run: &MaximalRun,
    window: usize,
    budget: u64,
    tables: &dyn StructureTables,
) -> EqCVerdict {
    let mut checked = Vec::new();
    let mut pending = Vec::new();
    let mut witnesses = Vec::new();
    for c in run.complement_window(window) {
        let o1 = eval(p1, c, budget, tables);
        let o2 = eval(p2, c, budget, tables);
        match (o1, o2) {
            (Outcome::Halt { value: v1 }, Outcome::Halt { value: v2 }) => {
                if v1 != v2 {
                    witnesses.push((c, v1, v2));
                } else {
                    checked.push(c);
                }
            }
            (Outcome::StillRunning, _) | (_, Outcome::StillRunning) => pending.push(c),
            // A provably undefined side exempts the input.
            _ => {}
        }
    }
    if !witnesses.is_empty() {
        EqCVerdict::DisagreeAt { witnesses }
    } else if !pending.is_empty() {
        EqCVerdict::Inconclusive { pending }
    } else {
        EqCVerdict::AgreeOnWindow { checked }
    }
}

// ---------------------------------------------------------------------------
// Totalization
// ---------------------------------------------------------------------------

/// Interleaving schedule for the totalization race.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetSchedule {
    pub ticks: u64,
    pub budget_per_tick: u64,
    pub stages_per_tick: u64,
}

impl Default for BudgetSchedule {
    fn default() -> Self {
        BudgetSchedule {
            ticks: 64,
            budget_per_tick: 256,
            stages_per_tick: 256,
        }
    }
}

/// Where a totalized value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSource {
    Program,
    Default,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalizedEntry {
    pub input: u64,
    pub value: Option<u64>,
    pub source: ValueSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TotalizeOutcome {
    pub table: Vec<TotalizedEntry>,
    /// Inputs where neither the program halted nor enumeration won
    /// within the schedule.
    pub unresolved: Vec<u64>,
}

/// Race a partial program against the enumeration of `run` to produce a
/// total table on `[0, upto]`: at each tick the program gets a bigger
/// budget and the enumeration is revealed a bit further; whichever
/// settles an input first decides it (the program wins ties). Inputs the
/// program never answers and enumeration never covers are reported
/// unresolved.
pub fn totalize(
    p: &PartialFnProgram,
    run: &MaximalRun,
    upto: u64,
    defaults: &dyn Fn(u64) -> u64,
    schedule: BudgetSchedule,
    tables: &dyn StructureTables,
) -> TotalizeOutcome {
    let mut table = Vec::with_capacity(upto as usize + 1);
    let mut unresolved = Vec::new();
    for input in 0..=upto {
        let entry_stage = run.enumerated.get(&input).copied();
        let mut settled = None;
        for t in 1..=schedule.ticks {
            let budget = t.saturating_mul(schedule.budget_per_tick);
            match eval(p, input, budget, tables) {
                Outcome::Halt { value } => {
                    settled = Some((value, ValueSource::Program));
                    break;
                }
                Outcome::DefinedNowhereHere | Outcome::StillRunning => {}
            }
            if let Some(es) = entry_stage {
                if es <= t.saturating_mul(schedule.stages_per_tick) {
                    settled = Some((defaults(input), ValueSource::Default));
                    break;
                }
            }
        }
        match settled {
            Some((value, source)) => table.push(TotalizedEntry {
                input,
                value: Some(value),
                source,
            }),
            None => {
                unresolved.push(input);
                table.push(TotalizedEntry {
                    input,
                    value: None,
                    source: ValueSource::Unresolved,
                });
            }
        }
    }
    TotalizeOutcome { table, unresolved }
}
