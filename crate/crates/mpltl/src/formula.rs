//! Metric PLTL syntax trees, desugaring, positive normal form and the
//! metric-free expansion.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(name: &str) -> Atom {
        assert!(!name.is_empty(), "atom names must be nonempty");
        Atom(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl serde::Serialize for Atom {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> serde::Deserialize<'de> for Atom {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Atom, D::Error> {
        let s = String::deserialize(d)?;
        if s.is_empty() {
            return Err(serde::de::Error::custom("empty atom name"));
        }
        Ok(Atom::new(&s))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum UnOp {
    Not,
    Next,
    Yesterday,
    WeakYesterday,
    Ev,
    Alw,
    PastEv,
    PastAlw,
    AlwT,
    SomT,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum BinOp {
    And,
    Or,
    Implies,
    Iff,
    Until,
    Release,
    Since,
    Trigger,
}

/// Bounded operators. The first nine are primitive; the rest are sugar.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum MetricOp {
    EvEq,
    EvLe,
    AlwLe,
    PastEvEq,
    PastEvLe,
    PastAlwLe,
    DualPastEvEq,
    DualPastEvLe,
    DualPastAlwLe,
    EvGe,
    EvGt,
    EvLt,
    AlwEq,
    AlwGe,
    AlwLt,
    PastEvGe,
    PastEvGt,
    PastEvLt,
    PastAlwEq,
}

impl UnOp {
    pub const ALL: [UnOp; 10] = [
        UnOp::Not,
        UnOp::Next,
        UnOp::Yesterday,
        UnOp::WeakYesterday,
        UnOp::Ev,
        UnOp::Alw,
        UnOp::PastEv,
        UnOp::PastAlw,
        UnOp::AlwT,
        UnOp::SomT,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            UnOp::Not => "not",
            UnOp::Next => "next",
            UnOp::Yesterday => "yesterday",
            UnOp::WeakYesterday => "wyesterday",
            UnOp::Ev => "ev",
            UnOp::Alw => "alw",
            UnOp::PastEv => "pev",
            UnOp::PastAlw => "palw",
            UnOp::AlwT => "alwt",
            UnOp::SomT => "somt",
        }
    }
}

impl BinOp {
    pub const ALL: [BinOp; 8] = [
        BinOp::And,
        BinOp::Or,
        BinOp::Implies,
        BinOp::Iff,
        BinOp::Until,
        BinOp::Release,
        BinOp::Since,
        BinOp::Trigger,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Implies => "implies",
            BinOp::Iff => "iff",
            BinOp::Until => "until",
            BinOp::Release => "release",
            BinOp::Since => "since",
            BinOp::Trigger => "trigger",
        }
    }
}

impl MetricOp {
    pub const ALL: [MetricOp; 19] = [
        MetricOp::EvEq,
        MetricOp::EvLe,
        MetricOp::AlwLe,
        MetricOp::PastEvEq,
        MetricOp::PastEvLe,
        MetricOp::PastAlwLe,
        MetricOp::DualPastEvEq,
        MetricOp::DualPastEvLe,
        MetricOp::DualPastAlwLe,
        MetricOp::EvGe,
        MetricOp::EvGt,
        MetricOp::EvLt,
        MetricOp::AlwEq,
        MetricOp::AlwGe,
        MetricOp::AlwLt,
        MetricOp::PastEvGe,
        MetricOp::PastEvGt,
        MetricOp::PastEvLt,
        MetricOp::PastAlwEq,
    ];

    pub const CORE: [MetricOp; 9] = [
        MetricOp::EvEq,
        MetricOp::EvLe,
        MetricOp::AlwLe,
        MetricOp::PastEvEq,
        MetricOp::PastEvLe,
        MetricOp::PastAlwLe,
        MetricOp::DualPastEvEq,
        MetricOp::DualPastEvLe,
        MetricOp::DualPastAlwLe,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            MetricOp::EvEq => "ev=",
            MetricOp::EvLe => "ev<=",
            MetricOp::AlwLe => "alw<=",
            MetricOp::PastEvEq => "pev=",
            MetricOp::PastEvLe => "pev<=",
            MetricOp::PastAlwLe => "palw<=",
            MetricOp::DualPastEvEq => "wpev=",
            MetricOp::DualPastEvLe => "wpev<=",
            MetricOp::DualPastAlwLe => "wpalw<=",
            MetricOp::EvGe => "ev>=",
            MetricOp::EvGt => "ev>",
            MetricOp::EvLt => "ev<",
            MetricOp::AlwEq => "alw=",
            MetricOp::AlwGe => "alw>=",
            MetricOp::AlwLt => "alw<",
            MetricOp::PastEvGe => "pev>=",
            MetricOp::PastEvGt => "pev>",
            MetricOp::PastEvLt => "pev<",
            MetricOp::PastAlwEq => "palw=",
        }
    }

    pub fn is_core(self) -> bool {
        MetricOp::CORE.contains(&self)
    }

    pub fn is_future(self) -> bool {
        matches!(
            self,
            MetricOp::EvEq
                | MetricOp::EvLe
                | MetricOp::AlwLe
                | MetricOp::EvGe
                | MetricOp::EvGt
                | MetricOp::EvLt
                | MetricOp::AlwEq
                | MetricOp::AlwGe
                | MetricOp::AlwLt
        )
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Un(UnOp, Arc<Formula>),
    Bin(BinOp, Arc<Formula>, Arc<Formula>),
    Metric(MetricOp, u32, Arc<Formula>),
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(Atom::new(name))
    }

    pub fn un(op: UnOp, a: Formula) -> Formula {
        Formula::Un(op, Arc::new(a))
    }

    pub fn bin(op: BinOp, a: Formula, b: Formula) -> Formula {
        Formula::Bin(op, Arc::new(a), Arc::new(b))
    }

    pub fn metric(op: MetricOp, t: u32, a: Formula) -> Formula {
        Formula::Metric(op, t, Arc::new(a))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::un(UnOp::Not, a)
    }

    pub fn next(a: Formula) -> Formula {
        Formula::un(UnOp::Next, a)
    }

    pub fn yesterday(a: Formula) -> Formula {
        Formula::un(UnOp::Yesterday, a)
    }

    pub fn wyesterday(a: Formula) -> Formula {
        Formula::un(UnOp::WeakYesterday, a)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::And, a, b)
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Or, a, b)
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Implies, a, b)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Iff, a, b)
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Until, a, b)
    }

    pub fn release(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Release, a, b)
    }

    pub fn since(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Since, a, b)
    }

    pub fn trigger(a: Formula, b: Formula) -> Formula {
        Formula::bin(BinOp::Trigger, a, b)
    }

    pub fn ev(a: Formula) -> Formula {
        Formula::un(UnOp::Ev, a)
    }

    pub fn alw(a: Formula) -> Formula {
        Formula::un(UnOp::Alw, a)
    }

    pub fn pev(a: Formula) -> Formula {
        Formula::un(UnOp::PastEv, a)
    }

    pub fn palw(a: Formula) -> Formula {
        Formula::un(UnOp::PastAlw, a)
    }

    pub fn alwt(a: Formula) -> Formula {
        Formula::un(UnOp::AlwT, a)
    }

    pub fn somt(a: Formula) -> Formula {
        Formula::un(UnOp::SomT, a)
    }

    /// Left-nested conjunction; `True` when empty.
    pub fn and_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `False` when empty.
    pub fn or_all<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => vec![],
            Formula::Un(_, a) | Formula::Metric(_, _, a) => vec![a],
            Formula::Bin(_, a, b) => vec![a, b],
        }
    }

    pub fn is_metric_free(&self) -> bool {
        match self {
            Formula::Metric(..) => false,
            _ => self.children().into_iter().all(Formula::is_metric_free),
        }
    }

    /// Only primitive connectives remain (no sugar).
    pub fn is_core(&self) -> bool {
        let here = match self {
            Formula::Un(op, _) => matches!(
                op,
                UnOp::Not | UnOp::Next | UnOp::Yesterday | UnOp::WeakYesterday
            ),
            Formula::Bin(op, _, _) => !matches!(op, BinOp::Implies | BinOp::Iff),
            Formula::Metric(op, t, _) => op.is_core() && *t > 0,
            _ => true,
        };
        here && self.children().into_iter().all(Formula::is_core)
    }

    /// Core form with negation applied to atoms only.
    pub fn is_pnf(&self) -> bool {
        match self {
            Formula::Un(UnOp::Not, a) => matches!(**a, Formula::Atom(_)),
            _ => self.is_core() && self.children().into_iter().all(Formula::is_pnf),
        }
    }

    pub fn has_past(&self) -> bool {
        let here = match self {
            Formula::Un(op, _) => matches!(
                op,
                UnOp::Yesterday | UnOp::WeakYesterday | UnOp::PastEv | UnOp::PastAlw | UnOp::AlwT | UnOp::SomT
            ),
            Formula::Bin(op, _, _) => matches!(op, BinOp::Since | BinOp::Trigger),
            Formula::Metric(op, _, _) => !op.is_future(),
            _ => false,
        };
        here || self.children().into_iter().any(Formula::has_past)
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        if let Formula::Atom(a) = self {
            out.insert(a.clone());
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::size)
            .sum::<usize>()
    }
}

fn write_sexp(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::True => out.write_str("true"),
        Formula::False => out.write_str("false"),
        Formula::Atom(a) => out.write_str(a.name()),
        Formula::Un(op, a) => {
            write!(out, "({} ", op.keyword())?;
            write_sexp(a, out)?;
            out.write_str(")")
        }
        Formula::Bin(op, a, b) => {
            write!(out, "({} ", op.keyword())?;
            write_sexp(a, out)?;
            out.write_str(" ")?;
            write_sexp(b, out)?;
            out.write_str(")")
        }
        Formula::Metric(op, t, a) => {
            write!(out, "({} ", op.keyword())?;
            write_sexp(a, out)?;
            write!(out, " {t})")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sexp(self, f)
    }
}

fn nexts(a: Formula, op: UnOp, n: u32) -> Formula {
    (0..n).fold(a, |acc, _| Formula::un(op, acc))
}

/// Rewrites every sugar node into primitive connectives.
pub fn desugar(f: &Formula) -> Formula {
    use Formula as F;
    match f {
        F::True | F::False | F::Atom(_) => f.clone(),
        F::Un(op, a) => {
            let a = desugar(a);
            match op {
                UnOp::Not | UnOp::Next | UnOp::Yesterday | UnOp::WeakYesterday => F::un(*op, a),
                UnOp::Ev => F::until(F::True, a),
                UnOp::Alw => F::not(F::until(F::True, F::not(a))),
                UnOp::PastEv => F::since(F::True, a),
                UnOp::PastAlw => F::not(F::since(F::True, F::not(a))),
                UnOp::AlwT => F::and(
                    F::not(F::until(F::True, F::not(a.clone()))),
                    F::not(F::since(F::True, F::not(a))),
                ),
                UnOp::SomT => F::not(F::and(
                    F::not(F::until(F::True, a.clone())),
                    F::not(F::since(F::True, a)),
                )),
            }
        }
        F::Bin(op, a, b) => {
            let a = desugar(a);
            let b = desugar(b);
            match op {
                BinOp::Implies => F::or(F::not(a), b),
                BinOp::Iff => F::and(F::or(F::not(a.clone()), b.clone()), F::or(a, F::not(b))),
                _ => F::bin(*op, a, b),
            }
        }
        F::Metric(op, t, a) => desugar_metric(*op, *t, desugar(a)),
    }
}

fn desugar_metric(op: MetricOp, t: u32, a: Formula) -> Formula {
    use Formula as F;
    use MetricOp::*;
    if op.is_core() {
        return if t == 0 { a } else { F::metric(op, t, a) };
    }
    match op {
        EvGe => desugar_metric(EvEq, t, F::until(F::True, a)),
        EvGt => desugar_metric(EvGe, t + 1, a),
        EvLt if t == 0 => F::False,
        EvLt => desugar_metric(EvLe, t - 1, a),
        AlwEq => desugar_metric(EvEq, t, a),
        AlwGe => F::not(desugar_metric(EvGe, t, F::not(a))),
        AlwLt if t == 0 => F::True,
        AlwLt => desugar_metric(AlwLe, t - 1, a),
        PastEvGe => desugar_metric(PastEvEq, t, F::since(F::True, a)),
        PastEvGt => desugar_metric(PastEvGe, t + 1, a),
        PastEvLt if t == 0 => F::False,
        PastEvLt => desugar_metric(PastEvLe, t - 1, a),
        PastAlwEq => desugar_metric(PastEvEq, t, a),
        _ => unreachable!("core operator handled above"),
    }
}

fn dual_metric(op: MetricOp) -> MetricOp {
    use MetricOp::*;
    match op {
        EvEq => EvEq,
        EvLe => AlwLe,
        AlwLe => EvLe,
        PastEvEq => DualPastEvEq,
        DualPastEvEq => PastEvEq,
        PastEvLe => DualPastEvLe,
        DualPastEvLe => PastEvLe,
        PastAlwLe => DualPastAlwLe,
        DualPastAlwLe => PastAlwLe,
        _ => unreachable!("sugar operator in pnf"),
    }
}

/// Positive normal form of the desugared formula.
pub fn to_pnf(f: &Formula) -> Formula {
    pnf(&desugar(f), false)
}

fn pnf(f: &Formula, neg: bool) -> Formula {
    use Formula as F;
    match f {
        F::True => if neg { F::False } else { F::True },
        F::False => if neg { F::True } else { F::False },
        F::Atom(_) => if neg { F::not(f.clone()) } else { f.clone() },
        F::Un(UnOp::Not, a) => pnf(a, !neg),
        F::Un(op, a) => {
            let op = match (op, neg) {
                (UnOp::Yesterday, true) => UnOp::WeakYesterday,
                (UnOp::WeakYesterday, true) => UnOp::Yesterday,
                (op, _) => *op,
            };
            F::un(op, pnf(a, neg))
        }
        F::Bin(op, a, b) => {
            let op = if neg {
                match op {
                    BinOp::And => BinOp::Or,
                    BinOp::Or => BinOp::And,
                    BinOp::Until => BinOp::Release,
                    BinOp::Release => BinOp::Until,
                    BinOp::Since => BinOp::Trigger,
                    BinOp::Trigger => BinOp::Since,
                    BinOp::Implies | BinOp::Iff => unreachable!("desugared"),
                }
            } else {
                *op
            };
            F::bin(op, pnf(a, neg), pnf(b, neg))
        }
        F::Metric(op, t, a) => {
            let op = if neg { dual_metric(*op) } else { *op };
            F::metric(op, *t, pnf(a, neg))
        }
    }
}

/// Replaces every bounded operator by its unrolling over next/yesterday.
pub fn tau_expand(f: &Formula) -> Formula {
    let f = if f.is_core() { f.clone() } else { desugar(f) };
    tau(&f)
}

fn tau(f: &Formula) -> Formula {
    use Formula as F;
    use MetricOp::*;
    match f {
        F::True | F::False | F::Atom(_) => f.clone(),
        F::Un(op, a) => F::un(*op, tau(a)),
        F::Bin(op, a, b) => F::bin(*op, tau(a), tau(b)),
        F::Metric(op, t, a) => {
            let a = tau(a);
            match op {
                EvEq => nexts(a, UnOp::Next, *t),
                PastEvEq => nexts(a, UnOp::Yesterday, *t),
                DualPastEvEq => nexts(a, UnOp::WeakYesterday, *t),
                EvLe => chain(a, *t, UnOp::Next, BinOp::Or),
                AlwLe => chain(a, *t, UnOp::Next, BinOp::And),
                PastEvLe => chain(a, *t, UnOp::Yesterday, BinOp::Or),
                PastAlwLe => chain(a, *t, UnOp::Yesterday, BinOp::And),
                DualPastEvLe => chain(a, *t, UnOp::WeakYesterday, BinOp::And),
                DualPastAlwLe => chain(a, *t, UnOp::WeakYesterday, BinOp::Or),
                _ => unreachable!("sugar removed before expansion"),
            }
        }
    }
}

fn chain(a: Formula, t: u32, step: UnOp, join: BinOp) -> Formula {
    let mut acc = a.clone();
    for _ in 0..t {
        acc = Formula::bin(join, a.clone(), Formula::un(step, acc));
    }
    acc
}

pub fn max_metric_constant(f: &Formula) -> u32 {
    let here = match f {
        Formula::Metric(_, t, _) => *t,
        _ => 0,
    };
    f.children()
        .into_iter()
        .map(max_metric_constant)
        .fold(here, u32::max)
}

#[derive(Clone, Debug)]
pub struct DagNode {
    pub formula: Formula,
    pub kids: Vec<usize>,
}

/// Distinct subformulas, children before parents.
#[derive(Clone, Debug)]
pub struct Dag {
    pub nodes: Vec<DagNode>,
    pub root: usize,
}

#[derive(PartialEq, Eq, Hash)]
enum ShallowKey {
    True,
    False,
    Atom(Atom),
    Un(UnOp, usize),
    Bin(BinOp, usize, usize),
    Metric(MetricOp, u32, usize),
}

impl Dag {
    pub fn build(f: &Formula) -> Dag {
        let mut b = DagBuilder {
            nodes: Vec::new(),
            by_key: HashMap::new(),
            by_ptr: HashMap::new(),
        };
        let root = b.visit(f);
        Dag { nodes: b.nodes, root }
    }

    pub fn index_of(&self, f: &Formula) -> Option<usize> {
        self.nodes.iter().position(|n| &n.formula == f)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

struct DagBuilder {
    nodes: Vec<DagNode>,
    by_key: HashMap<ShallowKey, usize>,
    by_ptr: HashMap<*const Formula, usize>,
}

impl DagBuilder {
    fn visit_arc(&mut self, a: &Arc<Formula>) -> usize {
        let p = Arc::as_ptr(a);
        if let Some(&i) = self.by_ptr.get(&p) {
            return i;
        }
        let i = self.visit(a);
        self.by_ptr.insert(p, i);
        i
    }

    fn visit(&mut self, f: &Formula) -> usize {
        let (key, kids) = match f {
            Formula::True => (ShallowKey::True, vec![]),
            Formula::False => (ShallowKey::False, vec![]),
            Formula::Atom(a) => (ShallowKey::Atom(a.clone()), vec![]),
            Formula::Un(op, a) => {
                let x = self.visit_arc(a);
                (ShallowKey::Un(*op, x), vec![x])
            }
            Formula::Bin(op, a, b) => {
                let x = self.visit_arc(a);
                let y = self.visit_arc(b);
                (ShallowKey::Bin(*op, x, y), vec![x, y])
            }
            Formula::Metric(op, t, a) => {
                let x = self.visit_arc(a);
                (ShallowKey::Metric(*op, *t, x), vec![x])
            }
        };
        if let Some(&i) = self.by_key.get(&key) {
            return i;
        }
        let i = self.nodes.len();
        self.nodes.push(DagNode {
            formula: f.clone(),
            kids,
        });
        self.by_key.insert(key, i);
        i
    }
}

/// Distinct subformulas of `f`, children before parents.
pub fn closure(f: &Formula) -> Vec<Formula> {
    Dag::build(f).nodes.into_iter().map(|n| n.formula).collect()
}
