//! A step-budgeted interpreter for partial computable functions over the
//! naturals.
//!
//! Programs are small expression trees. Evaluation always terminates with
//! one of three outcomes:
//!
//! * `Halt(v)` — the program produced `v` within the budget;
//! * `StillRunning` — the budget ran out (or the program consulted a part
//!   of a structure realization that is not yet materialized); a larger
//!   budget or deeper realization may resolve it either way;
//! * `DefinedNowhereHere` — the program provably diverges on this input
//!   (a guard failed), independent of budget.
//!
//! Evaluation is deterministic, and `Halt` / `DefinedNowhereHere`
//! outcomes are stable under budget increase.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Result of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    Halt { value: u64 },
    StillRunning,
    DefinedNowhereHere,
}

impl Outcome {
    pub fn halted(self) -> Option<u64> {
        match self {
            Outcome::Halt { value } => Some(value),
            _ => None,
        }
    }
}

/// Expression nodes. `Input` is the program's argument; `SearchVar` is
/// the candidate variable of the innermost enclosing `BoundedSearch`.
///
/// Three node kinds consult a structure realization when one is bound at
/// evaluation time: `Iterate` (forward function), `IterateBack`
/// (canonical inverse), and `NthOfClass` (n-th element of an equivalence
/// class, 1-based). With no realization bound they denote nowhere-defined
/// maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(u64),
    Input,
    SearchVar,
    /// The everywhere-undefined program point.
    Undefined,
    Pair(Box<Expr>, Box<Expr>),
    ProjLeft(Box<Expr>),
    ProjRight(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    /// Truncated subtraction: `a - b`, or `0` when `b > a`.
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    /// Floor division; division by zero is a failed guard.
    DivFloor(Box<Expr>, Box<Expr>),
    /// `if a < b then t else e`.
    IfLess(Box<Expr>, Box<Expr>, Box<Expr>, Box<Expr>),
    /// Apply the bound structure's function `times` times to `start`.
    Iterate { times: Box<Expr>, start: Box<Expr> },
    /// Apply the bound structure's canonical inverse `times` times.
    IterateBack { times: Box<Expr>, start: Box<Expr> },
    /// The `n`-th element (1-based) of the equivalence class of
    /// `class_rep` in the bound structure.
    NthOfClass { class_rep: Box<Expr>, n: Box<Expr> },
    /// Least candidate `x < max` with `predicate != 0` (the candidate is
    /// visible as `SearchVar` inside the predicate); no hit is a failed
    /// guard.
    BoundedSearch { max: Box<Expr>, predicate: Box<Expr> },
}

/// A program: a single expression in one input variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialFnProgram {
    pub body: Expr,
}

impl PartialFnProgram {
    pub fn new(body: Expr) -> Self {
        PartialFnProgram { body }
    }

    /// The program that is constantly `a` — the canonical name for the
    /// image of a structure element in a power.
    pub fn constant(a: u64) -> Self {
        PartialFnProgram::new(Expr::Const(a))
    }
}

/// Answer of a structure-table probe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lookup {
    /// The probe has a definite value.
    Value(u64),
    /// The probe definitely has no value (structurally absent).
    Missing,
    /// The probed part of the realization is beyond the materialized
    /// stage; a deeper realization may answer either way.
    Unmaterialized,
}

/// The face a structure realization shows to the interpreter.
pub trait StructureTables {
    /// Image of `x` under the structure's function.
    fn forward(&self, x: u64) -> Lookup;
    /// Canonical inverse: the least preimage of `x`.
    fn back(&self, x: u64) -> Lookup;
    /// The `n`-th element (1-based, in increasing order) of the
    /// equivalence class of `rep`; `n = 0` is a failed guard.
    fn nth_of_class(&self, rep: u64, n: u64) -> Lookup;
}

/// The empty binding: all structure probes are failed guards.
pub struct NoTables;

impl StructureTables for NoTables {
    fn forward(&self, _x: u64) -> Lookup {
        Lookup::Missing
    }
    fn back(&self, _x: u64) -> Lookup {
        Lookup::Missing
    }
    fn nth_of_class(&self, _rep: u64, _n: u64) -> Lookup {
        Lookup::Missing
    }
}

enum Stop {
    /// Budget exhausted, or an unmaterialized probe: not settled here.
    Open,
    /// A guard failed: settled as undefined at every budget.
    Undef,
}

struct Evaluator<'a> {
    fuel: u64,
    input: u64,
    tables: &'a dyn StructureTables,
    search_stack: Vec<u64>,
}

impl<'a> Evaluator<'a> {
    fn spend(&mut self) -> Result<(), Stop> {
        if self.fuel == 0 {
            Err(Stop::Open)
        } else {
            self.fuel -= 1;
            Ok(())
        }
    }

    fn probe(&mut self, l: Lookup) -> Result<u64, Stop> {
        match l {
            Lookup::Value(v) => Ok(v),
            Lookup::Missing => Err(Stop::Undef),
            Lookup::Unmaterialized => Err(Stop::Open),
        }
    }

    fn go(&mut self, e: &Expr) -> Result<u64, Stop> {
        self.spend()?;
        match e {
            Expr::Const(n) => Ok(*n),
            Expr::Input => Ok(self.input),
            Expr::SearchVar => match self.search_stack.last() {
                Some(v) => Ok(*v),
                // A search variable outside any search never denotes.
                None => Err(Stop::Undef),
            },
            Expr::Undefined => Err(Stop::Undef),
            Expr::Pair(a, b) => {
                let x = self.go(a)?;
                let y = self.go(b)?;
                pair_checked(x, y).ok_or(Stop::Undef)
            }
            Expr::ProjLeft(a) => Ok(unpair(self.go(a)?).0),
            Expr::ProjRight(a) => Ok(unpair(self.go(a)?).1),
            Expr::Add(a, b) => {
                let x = self.go(a)?;
                let y = self.go(b)?;
                x.checked_add(y).ok_or(Stop::Undef)
            }
            Expr::Sub(a, b) => {
                let x = self.go(a)?;
                let y = self.go(b)?;
                Ok(x.saturating_sub(y))
            }
            Expr::Mul(a, b) => {
                let x = self.go(a)?;
                let y = self.go(b)?;
                x.checked_mul(y).ok_or(Stop::Undef)
            }
            Expr::DivFloor(a, b) => {
                let x = self.go(a)?;
                let y = self.go(b)?;
                if y == 0 {
                    Err(Stop::Undef)
                } else {
                    Ok(x / y)
                }
            }
            Expr::IfLess(a, b, then_e, else_e) => {
                let x = self.go(a)?;
                let y = self.go(b)?;
                if x < y {
                    self.go(then_e)
                } else {
                    self.go(else_e)
                }
            }
            Expr::Iterate { times, start } => {
                let t = self.go(times)?;
                let mut cur = self.go(start)?;
                for _ in 0..t {
                    self.spend()?;
                    let l = self.tables.forward(cur);
                    cur = self.probe(l)?;
                }
                Ok(cur)
            }
            Expr::IterateBack { times, start } => {
                let t = self.go(times)?;
                let mut cur = self.go(start)?;
                for _ in 0..t {
                    self.spend()?;
                    let l = self.tables.back(cur);
                    cur = self.probe(l)?;
                }
                Ok(cur)
            }
            Expr::NthOfClass { class_rep, n } => {
                let rep = self.go(class_rep)?;
                let nn = self.go(n)?;
                self.spend()?;
                let l = self.tables.nth_of_class(rep, nn);
                self.probe(l)
            }
            Expr::BoundedSearch { max, predicate } => {
                let m = self.go(max)?;
                for cand in 0..m {
                    self.search_stack.push(cand);
                    let r = self.go(predicate);
                    self.search_stack.pop();
                    match r {
                        Ok(0) => continue,
                        Ok(_) => return Ok(cand),
                        Err(stop) => return Err(stop),
                    }
                }
                // Exhausted the (possibly empty) candidate range.
                Err(Stop::Undef)
            }
        }
    }
}

/// Evaluate `p` on `input` with the given step budget, consulting
/// `tables` for structure probes.
pub fn eval(p: &PartialFnProgram, input: u64, budget: u64, tables: &dyn StructureTables) -> Outcome {
    let mut ev = Evaluator {
        fuel: budget,
        input,
        tables,
        search_stack: Vec::new(),
    };
    match ev.go(&p.body) {
        Ok(v) => Outcome::Halt { value: v },
        Err(Stop::Open) => Outcome::StillRunning,
        Err(Stop::Undef) => Outcome::DefinedNowhereHere,
    }
}

/// Evaluate a program that makes no structure probes.
pub fn eval_pure(p: &PartialFnProgram, input: u64, budget: u64) -> Outcome {
    eval(p, input, budget, &NoTables)
}

// ---------------------------------------------------------------------------
// Pairing
// ---------------------------------------------------------------------------

/// Diagonal pairing: `pair(k, n) = (k + n)(k + n + 1) / 2 + n`. Checked
/// against `u64` range.
pub fn pair_checked(k: u64, n: u64) -> Option<u64> {
    let s = (k as u128) + (n as u128);
    let v = s * (s + 1) / 2 + (n as u128);
    u64::try_from(v).ok()
}

/// Diagonal pairing for desk-scale arguments (panics on overflow).
pub fn pair(k: u64, n: u64) -> u64 {
    pair_checked(k, n).expect("pairing overflow")
}

/// Integer square root by Newton iteration on u128.
fn isqrt_u128(v: u128) -> u128 {
    if v < 2 {
        return v;
    }
    let mut x = 1u128 << ((128 - v.leading_zeros()).div_ceil(2));
    loop {
        let y = (x + v / x) / 2;
        if y >= x {
            break;
        }
        x = y;
    }
    x
}

/// Inverse of `pair`: `unpair(pair(k, n)) == (k, n)`.
pub fn unpair(m: u64) -> (u64, u64) {
    let m = m as u128;
    let w = (isqrt_u128(8 * m + 1) - 1) / 2;
    let t = w * (w + 1) / 2;
    let n = m - t;
    let k = w - n;
    (k as u64, n as u64)
}

// ---------------------------------------------------------------------------
// Table-driven programs
// ---------------------------------------------------------------------------

/// Build a program computing the finite input/output table `pairs`
/// exactly: listed inputs map to their values, every other input is a
/// failed guard. Uses a balanced comparison tree, so evaluation costs
/// O(log n) budget.
pub fn program_from_table(pairs: &[(u64, u64)]) -> PartialFnProgram {
    let mut sorted: Vec<(u64, u64)> = pairs.to_vec();
    sorted.sort();
    sorted.dedup_by_key(|p| p.0);
    PartialFnProgram::new(table_tree(&sorted))
}

fn table_tree(sorted: &[(u64, u64)]) -> Expr {
    match sorted {
        [] => Expr::Undefined,
        [(x, v)] => Expr::IfLess(
            Box::new(Expr::Input),
            Box::new(Expr::Const(*x)),
            Box::new(Expr::Undefined),
            Box::new(Expr::IfLess(
                Box::new(Expr::Const(*x)),
                Box::new(Expr::Input),
                Box::new(Expr::Undefined),
                Box::new(Expr::Const(*v)),
            )),
        ),
        _ => {
            let mid = sorted.len() / 2;
            Expr::IfLess(
                Box::new(Expr::Input),
                Box::new(Expr::Const(sorted[mid].0)),
                Box::new(table_tree(&sorted[..mid])),
                Box::new(table_tree(&sorted[mid..])),
            )
        }
    }
}

// ---------------------------------------------------------------------------
// JSON encoding
// ---------------------------------------------------------------------------

fn expr_to_value(e: &Expr) -> serde_json::Value {
    fn node(op: &str, args: Vec<serde_json::Value>) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        m.insert("op".into(), serde_json::Value::String(op.into()));
        if !args.is_empty() {
            m.insert("args".into(), serde_json::Value::Array(args));
        }
        serde_json::Value::Object(m)
    }
    let sub = expr_to_value;
    match e {
        Expr::Const(n) => node("const", vec![serde_json::json!(n)]),
        Expr::Input => node("input", vec![]),
        Expr::SearchVar => node("search_var", vec![]),
        Expr::Undefined => node("undefined", vec![]),
        Expr::Pair(a, b) => node("pair", vec![sub(a), sub(b)]),
        Expr::ProjLeft(a) => node("proj_left", vec![sub(a)]),
        Expr::ProjRight(a) => node("proj_right", vec![sub(a)]),
        Expr::Add(a, b) => node("add", vec![sub(a), sub(b)]),
        Expr::Sub(a, b) => node("sub", vec![sub(a), sub(b)]),
        Expr::Mul(a, b) => node("mul", vec![sub(a), sub(b)]),
        Expr::DivFloor(a, b) => node("div_floor", vec![sub(a), sub(b)]),
        Expr::IfLess(a, b, t, f) => node("if_less", vec![sub(a), sub(b), sub(t), sub(f)]),
        Expr::Iterate { times, start } => node("iterate", vec![sub(times), sub(start)]),
        Expr::IterateBack { times, start } => node("iterate_back", vec![sub(times), sub(start)]),
        Expr::NthOfClass { class_rep, n } => node("nth_of_class", vec![sub(class_rep), sub(n)]),
        Expr::BoundedSearch { max, predicate } => {
            node("bounded_search", vec![sub(max), sub(predicate)])
        }
    }
}

fn expr_from_value(v: &serde_json::Value) -> Result<Expr, String> {
    let op = v
        .get("op")
        .and_then(|o| o.as_str())
        .ok_or_else(|| "expression node needs a string \"op\"".to_string())?;
    let args: Vec<serde_json::Value> = match v.get("args") {
        Some(serde_json::Value::Array(a)) => a.clone(),
        Some(_) => return Err(format!("\"args\" of \"{op}\" must be a list")),
        None => vec![],
    };
    let arity = |n: usize| -> Result<(), String> {
        if args.len() == n {
            Ok(())
        } else {
            Err(format!(
                "\"{op}\" takes {n} argument(s), got {}",
                args.len()
            ))
        }
    };
    let sub = |i: usize| expr_from_value(&args[i]).map(Box::new);
    Ok(match op {
        "const" => {
            arity(1)?;
            let n = args[0]
                .as_u64()
                .ok_or_else(|| "\"const\" takes a number".to_string())?;
            Expr::Const(n)
        }
        "input" => {
            arity(0)?;
            Expr::Input
        }
        "search_var" => {
            arity(0)?;
            Expr::SearchVar
        }
        "undefined" => {
            arity(0)?;
            Expr::Undefined
        }
        "pair" => {
            arity(2)?;
            Expr::Pair(sub(0)?, sub(1)?)
        }
        "proj_left" => {
            arity(1)?;
            Expr::ProjLeft(sub(0)?)
        }
        "proj_right" => {
            arity(1)?;
            Expr::ProjRight(sub(0)?)
        }
        "add" => {
            arity(2)?;
            Expr::Add(sub(0)?, sub(1)?)
        }
        "sub" => {
            arity(2)?;
            Expr::Sub(sub(0)?, sub(1)?)
        }
        "mul" => {
            arity(2)?;
            Expr::Mul(sub(0)?, sub(1)?)
        }
        "div_floor" => {
            arity(2)?;
            Expr::DivFloor(sub(0)?, sub(1)?)
        }
        "if_less" => {
            arity(4)?;
            Expr::IfLess(sub(0)?, sub(1)?, sub(2)?, sub(3)?)
        }
        "iterate" => {
            arity(2)?;
            Expr::Iterate {
                times: sub(0)?,
                start: sub(1)?,
            }
        }
        "iterate_back" => {
            arity(2)?;
            Expr::IterateBack {
                times: sub(0)?,
                start: sub(1)?,
            }
        }
        "nth_of_class" => {
            arity(2)?;
            Expr::NthOfClass {
                class_rep: sub(0)?,
                n: sub(1)?,
            }
        }
        "bounded_search" => {
            arity(2)?;
            Expr::BoundedSearch {
                max: sub(0)?,
                predicate: sub(1)?,
            }
        }
        other => return Err(format!("unknown op \"{other}\"")),
    })
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        expr_to_value(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        expr_from_value(&v).map_err(D::Error::custom)
    }
}

impl Serialize for PartialFnProgram {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.body.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PartialFnProgram {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(PartialFnProgram::new(Expr::deserialize(d)?))
    }
}
