//! Boolean constraints over encoding variables, prior to clausification.

use serde::{Deserialize, Serialize};
use std::fmt;

/// DIMACS-style literal: positive or negative variable index, never zero.
pub type Lit = i32;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(bool),
    Lit(Lit),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    /// Forces a dedicated auxiliary variable for the inner expression.
    Def(Box<Expr>),
}

impl Expr {
    pub fn lit(l: Lit) -> Expr {
        debug_assert!(l != 0);
        Expr::Lit(l)
    }

    pub fn is_const(&self) -> Option<bool> {
        match self {
            Expr::Const(b) => Some(*b),
            _ => None,
        }
    }

    pub fn not(e: Expr) -> Expr {
        match e {
            Expr::Const(b) => Expr::Const(!b),
            Expr::Lit(l) => Expr::Lit(-l),
            Expr::Not(inner) => *inner,
            other => Expr::Not(Box::new(other)),
        }
    }

    pub fn and(items: Vec<Expr>) -> Expr {
        let mut out = Vec::with_capacity(items.len());
        for e in items {
            match e {
                Expr::Const(true) => {}
                Expr::Const(false) => return Expr::Const(false),
                Expr::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::Const(true),
            1 => out.pop().unwrap(),
            _ => Expr::And(out),
        }
    }

    pub fn or(items: Vec<Expr>) -> Expr {
        let mut out = Vec::with_capacity(items.len());
        for e in items {
            match e {
                Expr::Const(false) => {}
                Expr::Const(true) => return Expr::Const(true),
                Expr::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Expr::Const(false),
            1 => out.pop().unwrap(),
            _ => Expr::Or(out),
        }
    }

    pub fn and2(a: Expr, b: Expr) -> Expr {
        Expr::and(vec![a, b])
    }

    pub fn or2(a: Expr, b: Expr) -> Expr {
        Expr::or(vec![a, b])
    }

    pub fn iff(a: Expr, b: Expr) -> Expr {
        match (a.is_const(), b.is_const()) {
            (Some(x), Some(y)) => Expr::Const(x == y),
            (Some(true), None) => b,
            (Some(false), None) => Expr::not(b),
            (None, Some(true)) => a,
            (None, Some(false)) => Expr::not(a),
            (None, None) => Expr::Iff(Box::new(a), Box::new(b)),
        }
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        match (a.is_const(), b.is_const()) {
            (Some(false), _) | (_, Some(true)) => Expr::Const(true),
            (Some(true), _) => b,
            (None, Some(false)) => Expr::not(a),
            (None, None) => Expr::Implies(Box::new(a), Box::new(b)),
        }
    }

    /// Named intermediate; constants and literals need no definition.
    pub fn def(e: Expr) -> Expr {
        match e {
            Expr::Const(_) | Expr::Lit(_) => e,
            other => Expr::Def(Box::new(other)),
        }
    }

    pub fn eval(&self, assignment: &dyn Fn(u32) -> bool) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Lit(l) => assignment(l.unsigned_abs()) == (*l > 0),
            Expr::Not(e) => !e.eval(assignment),
            Expr::And(es) => es.iter().all(|e| e.eval(assignment)),
            Expr::Or(es) => es.iter().any(|e| e.eval(assignment)),
            Expr::Iff(a, b) => a.eval(assignment) == b.eval(assignment),
            Expr::Implies(a, b) => !a.eval(assignment) || b.eval(assignment),
            Expr::Def(e) => e.eval(assignment),
        }
    }

    pub fn max_var(&self) -> u32 {
        match self {
            Expr::Const(_) => 0,
            Expr::Lit(l) => l.unsigned_abs(),
            Expr::Not(e) | Expr::Def(e) => e.max_var(),
            Expr::And(es) | Expr::Or(es) => es.iter().map(Expr::max_var).max().unwrap_or(0),
            Expr::Iff(a, b) | Expr::Implies(a, b) => a.max_var().max(b.max_var()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, es: &[Expr]| -> fmt::Result {
            write!(f, "({name}")?;
            for e in es {
                write!(f, " {e}")?;
            }
            write!(f, ")")
        };
        match self {
            Expr::Const(b) => write!(f, "{b}"),
            Expr::Lit(l) => write!(f, "{l}"),
            Expr::Not(e) => write!(f, "(not {e})"),
            Expr::And(es) => list(f, "and", es),
            Expr::Or(es) => list(f, "or", es),
            Expr::Iff(a, b) => write!(f, "(iff {a} {b})"),
            Expr::Implies(a, b) => write!(f, "(implies {a} {b})"),
            Expr::Def(e) => write!(f, "(def {e})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Category {
    Prop,
    Temporal,
    Loop,
    Eventuality,
    Last,
    First,
    MetricMfp,
    MetricInbound,
    MetricCrossloop,
    Root,
}

impl Category {
    pub const ALL: [Category; 10] = [
        Category::Prop,
        Category::Temporal,
        Category::Loop,
        Category::Eventuality,
        Category::Last,
        Category::First,
        Category::MetricMfp,
        Category::MetricInbound,
        Category::MetricCrossloop,
        Category::Root,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Prop => "prop",
            Category::Temporal => "temporal",
            Category::Loop => "loop",
            Category::Eventuality => "eventuality",
            Category::Last => "last",
            Category::First => "first",
            Category::MetricMfp => "metric-mfp",
            Category::MetricInbound => "metric-inbound",
            Category::MetricCrossloop => "metric-crossloop",
            Category::Root => "root",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub category: Category,
    pub expr: Expr,
}

#[derive(Clone, Debug, Default)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
    /// Variables referenced by the constraints are numbered 1..=num_vars.
    pub num_vars: u32,
    /// Named variable groups, in allocation order; empty means one pool.
    pub pools: Vec<(String, u32)>,
}

impl ConstraintSet {
    pub fn new(num_vars: u32) -> ConstraintSet {
        ConstraintSet {
            constraints: Vec::new(),
            num_vars,
            pools: Vec::new(),
        }
    }

    pub fn push(&mut self, category: Category, expr: Expr) {
        if expr == Expr::Const(true) {
            return;
        }
        self.constraints.push(Constraint { category, expr });
    }

    pub fn extend(&mut self, category: Category, exprs: impl IntoIterator<Item = Expr>) {
        for e in exprs {
            self.push(category, e);
        }
    }

    pub fn count(&self, category: Category) -> usize {
        self.constraints
            .iter()
            .filter(|c| c.category == category)
            .count()
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    pub fn eval(&self, assignment: &dyn Fn(u32) -> bool) -> bool {
        self.constraints.iter().all(|c| c.expr.eval(assignment))
    }
}
