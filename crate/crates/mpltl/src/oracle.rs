//! Direct evaluation of formulas on lasso words, independent of the
//! encoders.
//!
//! Subformula values are computed on a finite window of instants; outside
//! the window the word is periodic (loops), unknown (open sides, evaluated
//! pessimistically on the positive normal form) or, before 0 in
//! mono-infinite time, governed by the operator defaults.

use crate::formula::{self, BinOp, Dag, Formula, MetricOp, UnOp};
use crate::trace::LassoTrace;
use crate::TimeModel;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Op {
    True,
    False,
    Atom(Option<usize>),
    Not,
    And,
    Or,
    Next,
    Yesterday,
    WeakYesterday,
    Until,
    Release,
    Since,
    Trigger,
    Metric(MetricOp, i64),
}

fn op_of(f: &Formula, trace: &LassoTrace) -> Op {
    match f {
        Formula::True => Op::True,
        Formula::False => Op::False,
        Formula::Atom(a) => Op::Atom(trace.atom_index(a)),
        Formula::Un(UnOp::Not, _) => Op::Not,
        Formula::Un(UnOp::Next, _) => Op::Next,
        Formula::Un(UnOp::Yesterday, _) => Op::Yesterday,
        Formula::Un(UnOp::WeakYesterday, _) => Op::WeakYesterday,
        Formula::Bin(BinOp::And, ..) => Op::And,
        Formula::Bin(BinOp::Or, ..) => Op::Or,
        Formula::Bin(BinOp::Until, ..) => Op::Until,
        Formula::Bin(BinOp::Release, ..) => Op::Release,
        Formula::Bin(BinOp::Since, ..) => Op::Since,
        Formula::Bin(BinOp::Trigger, ..) => Op::Trigger,
        Formula::Metric(op, t, _) if op.is_core() => Op::Metric(*op, *t as i64),
        _ => panic!("oracle expects core formulas: {f}"),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Exact,
    Some,
    All,
}

fn shape(op: MetricOp) -> Shape {
    use MetricOp::*;
    match op {
        EvEq | PastEvEq | DualPastEvEq => Shape::Exact,
        EvLe | PastEvLe | DualPastAlwLe => Shape::Some,
        AlwLe | PastAlwLe | DualPastEvLe => Shape::All,
        _ => unreachable!(),
    }
}

/// What a past operator sees before instant 0 in mono-infinite time.
fn mono_default(op: Op) -> bool {
    match op {
        Op::WeakYesterday | Op::Trigger => true,
        Op::Metric(m, _) => matches!(
            m,
            MetricOp::DualPastEvEq | MetricOp::DualPastEvLe | MetricOp::DualPastAlwLe
        ),
        _ => false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Edge {
    Periodic(i64),
    Open,
    MonoStart,
}

/// Values of every subformula of a core formula over a window of instants.
pub struct Evaluation {
    dag: Dag,
    ops: Vec<Op>,
    lo: i64,
    hi: i64,
    left: Edge,
    right: Edge,
    vals: Vec<Vec<bool>>,
}

impl Evaluation {
    fn get(&self, c: usize, y: i64, default: bool) -> bool {
        if y > self.hi {
            return match self.right {
                Edge::Periodic(p) => {
                    let back = (y - self.hi + p - 1) / p * p;
                    self.vals[c][(y - back - self.lo) as usize]
                }
                _ => false,
            };
        }
        if y < self.lo {
            return match self.left {
                Edge::Periodic(p) => {
                    let fwd = (self.lo - y + p - 1) / p * p;
                    self.vals[c][(y + fwd - self.lo) as usize]
                }
                Edge::Open => false,
                Edge::MonoStart => default,
            };
        }
        self.vals[c][(y - self.lo) as usize]
    }

    /// Value of the subformula `f` at instant `i`; `None` if `f` is not a
    /// subformula or `i` precedes 0 in mono-infinite time.
    pub fn value_of(&self, f: &Formula, i: i64) -> Option<bool> {
        let n = self.dag.index_of(f)?;
        self.value(n, i)
    }

    fn value(&self, n: usize, i: i64) -> Option<bool> {
        if i < 0 && self.left == Edge::MonoStart {
            return None;
        }
        Some(self.get(n, i, false))
    }

    pub fn root_value(&self, i: i64) -> Option<bool> {
        self.value(self.dag.root, i)
    }

    pub fn formula(&self) -> &Formula {
        &self.dag.nodes[self.dag.root].formula
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Formula> {
        self.dag.nodes.iter().map(|n| &n.formula)
    }

    fn compute(&mut self, trace: &LassoTrace) {
        let w = (self.hi - self.lo + 1) as usize;
        self.vals = Vec::with_capacity(self.ops.len());
        for n in 0..self.ops.len() {
            let op = self.ops[n];
            let kids = self.dag.nodes[n].kids.clone();
            let lo = self.lo;
            let mut v = vec![false; w];
            let idx = |i: i64| (i - lo) as usize;
            match op {
                Op::True => v.fill(true),
                Op::False => {}
                Op::Atom(a) => {
                    if let Some(a) = a {
                        for i in self.lo..=self.hi {
                            v[idx(i)] = trace.holds(a, i).expect("window inside the word");
                        }
                    }
                }
                Op::Not => {
                    for i in self.lo..=self.hi {
                        v[idx(i)] = !self.get(kids[0], i, false);
                    }
                }
                Op::And | Op::Or => {
                    for i in self.lo..=self.hi {
                        let a = self.get(kids[0], i, false);
                        let b = self.get(kids[1], i, false);
                        v[idx(i)] = if op == Op::And { a && b } else { a || b };
                    }
                }
                Op::Next => {
                    for i in self.lo..=self.hi {
                        v[idx(i)] = self.get(kids[0], i + 1, false);
                    }
                }
                Op::Yesterday | Op::WeakYesterday => {
                    let d = mono_default(op);
                    for i in self.lo..=self.hi {
                        v[idx(i)] = self.get(kids[0], i - 1, d);
                    }
                }
                Op::Until | Op::Release => {
                    let until = op == Op::Until;
                    let step = |s: &Self, i: i64, next: bool| {
                        let a = s.get(kids[0], i, false);
                        let b = s.get(kids[1], i, false);
                        if until {
                            b || (a && next)
                        } else {
                            b && (a || next)
                        }
                    };
                    let mut next = match self.right {
                        Edge::Periodic(p) => {
                            let mut x = !until;
                            for _ in 0..2 {
                                let mut cur = x;
                                for i in (self.hi - p + 1..=self.hi).rev() {
                                    cur = step(self, i, cur);
                                }
                                x = cur;
                            }
                            x
                        }
                        _ => false,
                    };
                    for i in (self.lo..=self.hi).rev() {
                        next = step(self, i, next);
                        v[idx(i)] = next;
                    }
                }
                Op::Since | Op::Trigger => {
                    let since = op == Op::Since;
                    let step = |s: &Self, i: i64, prev: bool| {
                        let a = s.get(kids[0], i, false);
                        let b = s.get(kids[1], i, false);
                        if since {
                            b || (a && prev)
                        } else {
                            b && (a || prev)
                        }
                    };
                    let mut prev = match self.left {
                        Edge::Periodic(p) => {
                            let mut x = !since;
                            for _ in 0..2 {
                                let mut cur = x;
                                for i in self.lo..self.lo + p {
                                    cur = step(self, i, cur);
                                }
                                x = cur;
                            }
                            x
                        }
                        Edge::Open => false,
                        Edge::MonoStart => !since,
                    };
                    for i in self.lo..=self.hi {
                        prev = step(self, i, prev);
                        v[idx(i)] = prev;
                    }
                }
                Op::Metric(m, t) => {
                    let s = shape(m);
                    let d = mono_default(op);
                    let dir = if m.is_future() { 1 } else { -1 };
                    for i in self.lo..=self.hi {
                        let at = |j: i64| self.get(kids[0], i + dir * j, d);
                        v[idx(i)] = match s {
                            Shape::Exact => at(t),
                            Shape::Some => (0..=t).any(at),
                            Shape::All => (0..=t).all(at),
                        };
                    }
                }
            }
            self.vals.push(v);
        }
    }

    /// Whether every subformula repeats over the outermost two periods on
    /// each looping side.
    fn stable(&self) -> bool {
        let off = |i: i64| (i - self.lo) as usize;
        for v in &self.vals {
            if let Edge::Periodic(p) = self.right {
                let a = off(self.hi - 2 * p + 1);
                let b = off(self.hi - p + 1);
                if v[a..b] != v[b..] {
                    return false;
                }
            }
            if let Edge::Periodic(p) = self.left {
                let a = off(self.lo);
                let b = off(self.lo + p);
                if v[a..b] != v[b..b + p as usize] {
                    return false;
                }
            }
        }
        true
    }
}

fn temporal_depth(f: &Formula) -> usize {
    let here = usize::from(!matches!(
        f,
        Formula::True
            | Formula::False
            | Formula::Atom(_)
            | Formula::Un(UnOp::Not, _)
            | Formula::Bin(BinOp::And | BinOp::Or, ..)
    ));
    here + f.children().into_iter().map(temporal_depth).max().unwrap_or(0)
}

fn metric_total(dag: &Dag) -> i64 {
    dag.nodes
        .iter()
        .map(|n| match n.formula {
            Formula::Metric(_, t, _) => t as i64,
            _ => 0,
        })
        .sum()
}

/// Whether the trace is closed on every side the time model has, so that
/// evaluation is exact rather than pessimistic.
pub fn is_closed(trace: &LassoTrace) -> bool {
    trace.loop_start.is_some() && (trace.time == TimeModel::Mono || trace.past_loop.is_some())
}

/// Evaluates a core formula. On traces with an open side the formula must be
/// in positive normal form; values there are lower bounds valid for every
/// extension.
pub fn evaluate(f: &Formula, trace: &LassoTrace) -> Evaluation {
    let dag = Dag::build(f);
    let ops: Vec<Op> = dag.nodes.iter().map(|n| op_of(&n.formula, trace)).collect();
    if !is_closed(trace) {
        assert!(f.is_pnf(), "open traces need positive normal form");
    }
    let k = trace.k() as i64;
    let right = match trace.loop_start {
        Some(l) => Edge::Periodic(k - l as i64 + 1),
        None => Edge::Open,
    };
    let left = match (trace.time, trace.past_loop) {
        (TimeModel::Mono, _) => Edge::MonoStart,
        (TimeModel::Bi, Some(l)) => Edge::Periodic(l as i64 + 1),
        (TimeModel::Bi, None) => Edge::Open,
    };
    let depth = temporal_depth(f) as i64 + 2;
    let extra = metric_total(&dag);
    let margin = |e: Edge| match e {
        Edge::Periodic(p) => (depth * p + extra).max(2 * p),
        _ => 0,
    };
    let (mut ml, mut mr) = (margin(left), margin(right));
    let mut ev = Evaluation {
        dag,
        ops,
        lo: 0,
        hi: k,
        left,
        right,
        vals: Vec::new(),
    };
    for _ in 0..12 {
        ev.lo = -ml;
        ev.hi = k + mr;
        ev.compute(trace);
        if ev.stable() {
            return ev;
        }
        ml *= 2;
        mr *= 2;
    }
    panic!("subformula values did not stabilize on the window");
}

/// Truth of `f` at instant `i` of the word induced by `trace`.
pub fn eval_on_lasso(f: &Formula, trace: &LassoTrace, i: i64) -> bool {
    let g = if is_closed(trace) {
        formula::desugar(f)
    } else {
        formula::to_pnf(f)
    };
    evaluate(&g, trace)
        .root_value(i)
        .expect("instant inside the time domain")
}

/// Why a trace fails a formula: the innermost subformula found to be
/// responsible, with the instant and expected value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub subformula: Formula,
    pub instant: i64,
    pub position: Option<usize>,
    pub expected: bool,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} should be {} at instant {}",
            self.subformula, self.expected, self.instant
        )?;
        if let Some(p) = self.position {
            if p as i64 != self.instant {
                write!(f, " (state {p})")?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for Failure {}

/// Passes iff the trace satisfies `f` at instant 0.
pub fn check_trace(f: &Formula, trace: &LassoTrace) -> Result<(), Failure> {
    let g = if is_closed(trace) {
        formula::desugar(f)
    } else {
        formula::to_pnf(f)
    };
    let ev = evaluate(&g, trace);
    if ev.root_value(0) == Some(true) {
        return Ok(());
    }
    let (n, i, expected) = blame(&ev, ev.dag.root, 0, true);
    Err(Failure {
        subformula: ev.dag.nodes[n].formula.clone(),
        instant: i,
        position: trace.pos(i),
        expected,
    })
}

/// Walks down from a node whose value differs from `expected` towards an
/// atom (or the deepest node where no single cause can be singled out).
fn blame(ev: &Evaluation, n: usize, i: i64, expected: bool) -> (usize, i64, bool) {
    let kids = &ev.dag.nodes[n].kids;
    let val = |c: usize, y: i64| ev.value(c, y);
    let within = |y: i64| y >= ev.lo && y <= ev.hi;
    let stop = (n, i, expected);
    // First instant in `range` where child `c` has value `want`.
    let find = |c: usize, range: Box<dyn Iterator<Item = i64>>, want: bool| {
        range
            .take_while(|y| within(*y))
            .find(|&y| val(c, y) == Some(want))
    };
    match ev.ops[n] {
        Op::Not => blame(ev, kids[0], i, !expected),
        Op::And | Op::Or => {
            let is_and = ev.ops[n] == Op::And;
            // The conjunction is false (or disjunction true) because of one child.
            if is_and == expected {
                for &c in kids {
                    if val(c, i) == Some(!expected) {
                        return blame(ev, c, i, expected);
                    }
                }
            }
            stop
        }
        Op::Next if within(i + 1) => blame(ev, kids[0], i + 1, expected),
        Op::Yesterday | Op::WeakYesterday if i - 1 >= ev.lo && val(kids[0], i - 1).is_some() => {
            blame(ev, kids[0], i - 1, expected)
        }
        Op::Until | Op::Since if !expected => {
            let fwd = ev.ops[n] == Op::Until;
            let range: Box<dyn Iterator<Item = i64>> = if fwd {
                Box::new(i..)
            } else {
                Box::new((i64::MIN..=i).rev())
            };
            match find(kids[1], range, true) {
                Some(y) => blame(ev, kids[1], y, false),
                None => stop,
            }
        }
        Op::Release | Op::Trigger if expected => {
            let fwd = ev.ops[n] == Op::Release;
            let range: Box<dyn Iterator<Item = i64>> = if fwd {
                Box::new(i..)
            } else {
                Box::new((i64::MIN..=i).rev())
            };
            match find(kids[1], range, false) {
                Some(y) => blame(ev, kids[1], y, true),
                None => stop,
            }
        }
        Op::Metric(m, t) => {
            let dir = if m.is_future() { 1 } else { -1 };
            let window = move || (0..=t).map(move |j| i + dir * j);
            match shape(m) {
                Shape::Exact if within(i + dir * t) && val(kids[0], i + dir * t).is_some() => {
                    blame(ev, kids[0], i + dir * t, expected)
                }
                Shape::Some if !expected => match find(kids[0], Box::new(window()), true) {
                    Some(y) => blame(ev, kids[0], y, false),
                    None => stop,
                },
                Shape::All if expected => match find(kids[0], Box::new(window()), false) {
                    Some(y) => blame(ev, kids[0], y, true),
                    None => stop,
                },
                _ => stop,
            }
        }
        _ => stop,
    }
}

/// Whether every subformula of `f` (taken as the encoder's normalized
/// formula) has the same value at the two ends of each loop: at `k+1` and
/// the loop start, and in bi-infinite time at `-1` and the past-loop
/// target. Bounded encodings can only represent witnesses with this
/// property.
pub fn seams_consistent(f: &Formula, trace: &LassoTrace) -> bool {
    seams_ok(&evaluate(f, trace), trace)
}

/// Every lasso over `alphabet` with `k+1` states: each loop side either
/// absent or closed at a position repeating the boundary state.
pub fn all_lassos(alphabet: Vec<crate::formula::Atom>, k: usize, time: TimeModel) -> impl Iterator<Item = LassoTrace> {
    let width = alphabet.len();
    let total: u64 = 1u64 << (width * (k + 1));
    (0..total).flat_map(move |code| {
        let states: Vec<Vec<bool>> = (0..=k)
            .map(|i| (0..width).map(|a| code >> (i * width + a) & 1 == 1).collect())
            .collect();
        let rights: Vec<Option<usize>> = std::iter::once(None)
            .chain((1..=k).filter(|&l| states[l - 1] == states[k]).map(Some))
            .collect();
        let lefts: Vec<Option<usize>> = match time {
            TimeModel::Mono => vec![None],
            TimeModel::Bi => std::iter::once(None)
                .chain((0..k).filter(|&l| states[l + 1] == states[0]).map(Some))
                .collect(),
        };
        let mut out = Vec::with_capacity(rights.len() * lefts.len());
        for r in &rights {
            for l in &lefts {
                out.push(LassoTrace {
                    time,
                    alphabet: alphabet.clone(),
                    states: states.clone(),
                    loop_start: *r,
                    past_loop: *l,
                });
            }
        }
        out
    })
}

/// Exhaustive search for a lasso of bound `k` satisfying `f` at 0 (on open
/// sides for every extension). With `seams`, only lassos on which every
/// subformula of the normalized formula agrees across each loop seam count.
pub fn enumerate_witness(f: &Formula, k: usize, time: TimeModel, seams: bool) -> Option<LassoTrace> {
    let g = formula::to_pnf(f);
    let alphabet: Vec<crate::formula::Atom> = g.atoms().into_iter().collect();
    all_lassos(alphabet, k, time).find(|t| {
        let ev = evaluate(&g, t);
        ev.root_value(0) == Some(true) && (!seams || seams_ok(&ev, t))
    })
}

fn seams_ok(ev: &Evaluation, trace: &LassoTrace) -> bool {
    let k = trace.k() as i64;
    (0..ev.dag.len()).all(|n| {
        let fut = trace
            .loop_start
            .is_none_or(|l| ev.value(n, k + 1) == ev.value(n, l as i64));
        let past = match (trace.time, trace.past_loop) {
            (TimeModel::Bi, Some(l)) => ev.value(n, -1) == ev.value(n, l as i64),
            _ => true,
        };
        fut && past
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Atom;

    fn p() -> Formula {
        Formula::atom("p")
    }

    fn trace(bits: &[bool], lf: Option<usize>, lp: Option<usize>, time: TimeModel) -> LassoTrace {
        LassoTrace::new(
            time,
            vec![Atom::new("p")],
            bits.iter().map(|b| vec![*b]).collect(),
            lf,
            lp,
        )
        .unwrap()
    }

    #[test]
    fn always_not_on_all_p() {
        let t = trace(&[true, true, true], Some(1), None, TimeModel::Mono);
        assert!(!eval_on_lasso(&Formula::alw(Formula::not(p())), &t, 0));
    }

    #[test]
    fn eventually_recurs_in_loop() {
        let t = trace(&[false, false, true, false], Some(2), None, TimeModel::Mono);
        assert!(eval_on_lasso(&Formula::ev(p()), &t, 0));
        assert!(eval_on_lasso(&Formula::alw(Formula::ev(p())), &t, 0));
        assert!(!eval_on_lasso(&Formula::ev(Formula::alw(p())), &t, 0));
    }

    #[test]
    fn mono_yesterday_at_zero() {
        for b in [true, false] {
            let t = trace(&[b, b], Some(1), None, TimeModel::Mono);
            assert!(!eval_on_lasso(&Formula::yesterday(p()), &t, 0));
            assert!(eval_on_lasso(&Formula::wyesterday(p()), &t, 0));
        }
    }

    #[test]
    fn bi_past_wraps() {
        // Before 0 the word repeats S_0..S_1: p, ¬p, p, ¬p, ...
        let t = trace(&[true, false, true, true], Some(3), Some(1), TimeModel::Bi);
        assert!(!eval_on_lasso(&Formula::yesterday(p()), &t, 0));
        assert!(eval_on_lasso(&Formula::metric(MetricOp::PastEvEq, 2, p()), &t, 0));
        assert!(!eval_on_lasso(&Formula::palw(p()), &t, 0));
        assert!(eval_on_lasso(&Formula::metric(MetricOp::EvEq, 5, p()), &t, 0));
    }

    #[test]
    fn inclusive_bounded_operators() {
        let t = trace(&[false, false, true, true], Some(3), None, TimeModel::Mono);
        assert!(eval_on_lasso(&Formula::metric(MetricOp::EvLe, 2, p()), &t, 0));
        assert!(!eval_on_lasso(&Formula::metric(MetricOp::EvLe, 1, p()), &t, 0));
        assert!(eval_on_lasso(&Formula::metric(MetricOp::PastEvLe, 1, p()), &t, 3));
        // Mono past windows reaching before 0 are false unless primed.
        let all = trace(&[true, true], Some(1), None, TimeModel::Mono);
        assert!(!eval_on_lasso(&Formula::metric(MetricOp::PastAlwLe, 2, p()), &all, 1));
        assert!(eval_on_lasso(&Formula::metric(MetricOp::PastAlwLe, 2, p()), &all, 2));
        assert!(eval_on_lasso(&Formula::metric(MetricOp::DualPastEvLe, 2, p()), &all, 0));
    }

    #[test]
    fn open_trace_is_pessimistic() {
        let t = trace(&[false, true], None, None, TimeModel::Mono);
        assert!(eval_on_lasso(&Formula::ev(p()), &t, 0));
        assert!(!eval_on_lasso(&Formula::alw(p()), &t, 1));
        assert!(!eval_on_lasso(&Formula::next(Formula::next(Formula::True)), &t, 0));
    }

    #[test]
    fn corrupted_trace_names_atom() {
        let t = trace(&[true, true, true, true], Some(2), Some(0), TimeModel::Bi);
        let f = Formula::alwt(p());
        assert_eq!(check_trace(&f, &t), Ok(()));
        let bad = t.flipped(0, 2);
        let err = check_trace(&f, &bad.clone()).unwrap_err();
        assert_eq!(err.subformula, p());
        assert_eq!(err.position, Some(2));
        assert!(err.expected);
    }

    #[test]
    fn seam_inconsistency_detected() {
        // ¬p ∧ ◦□p ∧ ◇••p at k=2 (the only loop goes back to 2): satisfied,
        // but ••p differs between instant 3 and the loop start.
        let f = Formula::and(
            Formula::not(p()),
            Formula::and(
                Formula::next(Formula::alw(p())),
                Formula::ev(Formula::yesterday(Formula::yesterday(p()))),
            ),
        );
        let t = trace(&[false, true, true], Some(2), None, TimeModel::Mono);
        assert!(eval_on_lasso(&f, &t, 0));
        assert!(!seams_consistent(&formula::to_pnf(&f), &t));
    }
}
