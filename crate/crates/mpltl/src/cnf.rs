//! Tseitin-style clausification, size statistics and DIMACS I/O.

use crate::constraint::{Category, ConstraintSet, Expr, Lit};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

#[derive(Clone, Debug, Default)]
pub struct Cnf {
    pub num_vars: u32,
    pub clauses: Vec<Vec<Lit>>,
    /// Variables that existed before clausification, grouped by pool.
    pub pools: Vec<(String, u32)>,
    pub clause_counts: BTreeMap<Category, usize>,
    pub aux_counts: BTreeMap<Category, u32>,
    pub names: BTreeMap<u32, String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Size {
    pub vars: u32,
    pub clauses: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    pub categories: BTreeMap<String, Size>,
    pub total: Size,
}

impl Cnf {
    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn aux_vars(&self) -> u32 {
        self.aux_counts.values().sum()
    }

    pub fn stats(&self) -> Stats {
        let mut categories = BTreeMap::new();
        for c in Category::ALL {
            categories.insert(
                c.name().to_string(),
                Size {
                    vars: self.aux_counts.get(&c).copied().unwrap_or(0),
                    clauses: self.clause_counts.get(&c).copied().unwrap_or(0),
                },
            );
        }
        for (pool, n) in &self.pools {
            categories.insert(format!("vars:{pool}"), Size { vars: *n, clauses: 0 });
        }
        Stats {
            categories,
            total: Size {
                vars: self.num_vars,
                clauses: self.clauses.len(),
            },
        }
    }

    pub fn label(&self, v: u32) -> String {
        self.names.get(&v).cloned().unwrap_or_else(|| format!("v{v}"))
    }

    pub fn attach_names(&mut self, name: impl Fn(u32) -> String) {
        let base: u32 = self.pools.iter().map(|(_, n)| n).sum();
        for v in 1..=base {
            self.names.insert(v, name(v));
        }
    }

    pub fn write_dimacs<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut buf = String::with_capacity(self.clauses.len() * 16);
        for (v, name) in &self.names {
            buf.push_str(&format!("c {v} {name}\n"));
        }
        buf.push_str(&format!("p cnf {} {}\n", self.num_vars, self.clauses.len()));
        for c in &self.clauses {
            for l in c {
                buf.push_str(&l.to_string());
                buf.push(' ');
            }
            buf.push_str("0\n");
        }
        out.write_all(buf.as_bytes())
    }

    pub fn to_dimacs(&self) -> String {
        let mut v = Vec::new();
        self.write_dimacs(&mut v).expect("writing to memory");
        String::from_utf8(v).expect("ascii output")
    }

    /// Satisfaction check of a total assignment (index 0 unused).
    pub fn satisfied_by(&self, model: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| model[l.unsigned_abs() as usize] == (l > 0)))
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: variable {var} out of range 1..={max}")]
    OutOfRange { line: usize, var: u32, max: u32 },
}

/// Reads a solver model: lines of signed integers, optionally prefixed by
/// `v`; `c` and `s` lines are skipped. Unmentioned variables are false.
pub fn read_model<R: BufRead>(source: R, num_vars: u32) -> Result<Vec<bool>, DimacsError> {
    let mut model = vec![false; num_vars as usize + 1];
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| DimacsError::Malformed {
            line: lineno,
            message: e.to_string(),
        })?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') || t.starts_with('s') {
            continue;
        }
        let body = t.strip_prefix('v').unwrap_or(t);
        for tok in body.split_whitespace() {
            let l: i64 = tok.parse().map_err(|_| DimacsError::Malformed {
                line: lineno,
                message: format!("not a literal: `{tok}`"),
            })?;
            if l == 0 {
                continue;
            }
            let v = l.unsigned_abs();
            if v > num_vars as u64 {
                return Err(DimacsError::OutOfRange {
                    line: lineno,
                    var: v.min(u32::MAX as u64) as u32,
                    max: num_vars,
                });
            }
            model[v as usize] = l > 0;
        }
    }
    Ok(model)
}

/// Parses a DIMACS CNF file.
pub fn parse_dimacs<R: BufRead>(source: R) -> Result<Cnf, DimacsError> {
    let mut cnf = Cnf::default();
    let mut declared = None;
    let mut current = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| DimacsError::Malformed {
            line: lineno,
            message: e.to_string(),
        })?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('c') {
            continue;
        }
        if let Some(rest) = t.strip_prefix('p') {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            match parts.as_slice() {
                ["cnf", v, c] => {
                    let v: u32 = v.parse().map_err(|_| DimacsError::Malformed {
                        line: lineno,
                        message: "bad variable count".into(),
                    })?;
                    let c: usize = c.parse().map_err(|_| DimacsError::Malformed {
                        line: lineno,
                        message: "bad clause count".into(),
                    })?;
                    declared = Some((v, c));
                    cnf.num_vars = v;
                }
                _ => {
                    return Err(DimacsError::Malformed {
                        line: lineno,
                        message: "bad problem line".into(),
                    })
                }
            }
            continue;
        }
        if declared.is_none() {
            return Err(DimacsError::Malformed {
                line: lineno,
                message: "clause before problem line".into(),
            });
        }
        for tok in t.split_whitespace() {
            let l: i32 = tok.parse().map_err(|_| DimacsError::Malformed {
                line: lineno,
                message: format!("not a literal: `{tok}`"),
            })?;
            if l == 0 {
                cnf.clauses.push(std::mem::take(&mut current));
            } else {
                if l.unsigned_abs() > cnf.num_vars {
                    return Err(DimacsError::OutOfRange {
                        line: lineno,
                        var: l.unsigned_abs(),
                        max: cnf.num_vars,
                    });
                }
                current.push(l);
            }
        }
    }
    if !current.is_empty() {
        cnf.clauses.push(current);
    }
    let (v, _) = declared.ok_or(DimacsError::Malformed {
        line: 1,
        message: "missing problem line".into(),
    })?;
    cnf.pools = vec![("input".into(), v)];
    Ok(cnf)
}

const PRODUCT_LIMIT: usize = 64;

fn sat_mul(a: usize, b: usize) -> usize {
    a.saturating_mul(b).min(1 << 20)
}

fn sat_add(a: usize, b: usize) -> usize {
    a.saturating_add(b).min(1 << 20)
}

/// Upper bound on clauses produced by full expansion; `None` means the
/// expression is trivially true.
fn estimate(e: &Expr, pos: bool) -> usize {
    match e {
        Expr::Const(b) => usize::from(*b != pos),
        Expr::Lit(_) | Expr::Def(_) => 1,
        Expr::Not(x) => estimate(x, !pos),
        Expr::And(xs) if pos => xs.iter().fold(0, |acc, x| sat_add(acc, estimate(x, pos))),
        Expr::Or(xs) if !pos => xs.iter().fold(0, |acc, x| sat_add(acc, estimate(x, pos))),
        Expr::And(xs) | Expr::Or(xs) => xs.iter().fold(1, |acc, x| sat_mul(acc, estimate(x, pos))),
        Expr::Iff(a, b) => {
            if pos {
                sat_add(
                    sat_mul(estimate(a, false), estimate(b, true)),
                    sat_mul(estimate(a, true), estimate(b, false)),
                )
            } else {
                sat_add(
                    sat_mul(estimate(a, true), estimate(b, true)),
                    sat_mul(estimate(a, false), estimate(b, false)),
                )
            }
        }
        Expr::Implies(a, b) => {
            if pos {
                sat_mul(estimate(a, false), estimate(b, true))
            } else {
                sat_add(estimate(a, true), estimate(b, false))
            }
        }
    }
}

struct Clausifier {
    next_var: u32,
    clauses: Vec<Vec<Lit>>,
    memo: HashMap<Expr, Lit>,
    new_aux: u32,
}

impl Clausifier {
    fn emit(&mut self, mut clause: Vec<Lit>) {
        clause.sort_by_key(|l| (l.unsigned_abs(), *l < 0));
        clause.dedup();
        if clause.windows(2).any(|w| w[0] == -w[1]) {
            return;
        }
        self.clauses.push(clause);
    }

    fn fresh(&mut self) -> Lit {
        self.next_var += 1;
        self.new_aux += 1;
        self.next_var as Lit
    }

    /// Literal equivalent to `e` (or its negation when `!pos`).
    fn lit_of(&mut self, e: &Expr, pos: bool) -> Lit {
        match e {
            Expr::Lit(l) => {
                if pos {
                    *l
                } else {
                    -*l
                }
            }
            Expr::Not(x) => self.lit_of(x, !pos),
            Expr::Def(x) => self.lit_of(x, pos),
            _ => {
                let v = match self.memo.get(e) {
                    Some(v) => *v,
                    None => {
                        let v = self.fresh();
                        self.implied(v, e, true);
                        self.implied(-v, e, false);
                        self.memo.insert(e.clone(), v);
                        v
                    }
                };
                if pos {
                    v
                } else {
                    -v
                }
            }
        }
    }

    /// Clauses for `l → e` (or `l → ¬e`). The top operator of `e` is
    /// opened here so that `e` itself is never named again.
    fn implied(&mut self, l: Lit, e: &Expr, pos: bool) {
        match e {
            Expr::Not(x) => self.implied(l, x, !pos),
            Expr::And(xs) if pos => xs.iter().for_each(|x| self.implied(l, x, pos)),
            Expr::Or(xs) if !pos => xs.iter().for_each(|x| self.implied(l, x, pos)),
            Expr::Implies(a, b) if !pos => {
                self.implied(l, a, true);
                self.implied(l, b, false);
            }
            Expr::Iff(a, b) => {
                let pairs = [((**a).clone(), false), ((**b).clone(), pos)];
                let swapped = [((**a).clone(), true), ((**b).clone(), !pos)];
                for items in [pairs, swapped] {
                    let mut v = vec![(Expr::Lit(l), false)];
                    v.extend(items);
                    for c in self.disj(v) {
                        self.emit(c);
                    }
                }
            }
            _ => {
                for c in self.disj(vec![(Expr::Lit(l), false), (e.clone(), pos)]) {
                    self.emit(c);
                }
            }
        }
    }

    /// Clauses of `e` (or of its negation when `!pos`).
    fn cnf(&mut self, e: &Expr, pos: bool) -> Vec<Vec<Lit>> {
        match e {
            Expr::Const(b) => {
                if *b == pos {
                    vec![]
                } else {
                    vec![vec![]]
                }
            }
            Expr::Lit(l) => vec![vec![if pos { *l } else { -*l }]],
            Expr::Def(_) => vec![vec![self.lit_of(e, pos)]],
            Expr::Not(x) => self.cnf(x, !pos),
            Expr::And(xs) if pos => self.conj(xs.iter().map(|x| (x, pos))),
            Expr::Or(xs) if !pos => self.conj(xs.iter().map(|x| (x, pos))),
            Expr::And(xs) | Expr::Or(xs) => {
                let items: Vec<(Expr, bool)> = xs.iter().map(|x| (x.clone(), pos)).collect();
                self.disj(items)
            }
            Expr::Implies(a, b) => {
                if pos {
                    self.disj(vec![((**a).clone(), false), ((**b).clone(), true)])
                } else {
                    self.conj([(&**a, true), (&**b, false)].into_iter())
                }
            }
            Expr::Iff(a, b) => {
                let cost = estimate(e, pos);
                let (a, b) = if cost > PRODUCT_LIMIT {
                    (
                        Expr::Lit(self.lit_of(a, true)),
                        Expr::Lit(self.lit_of(b, true)),
                    )
                } else {
                    ((**a).clone(), (**b).clone())
                };
                let mut out = self.disj(vec![(a.clone(), !pos), (b.clone(), true)]);
                out.extend(self.disj(vec![(a, pos), (b, false)]));
                out
            }
        }
    }

    fn conj<'e>(&mut self, items: impl Iterator<Item = (&'e Expr, bool)>) -> Vec<Vec<Lit>> {
        let mut out = Vec::new();
        for (x, p) in items {
            out.extend(self.cnf(x, p));
        }
        out
    }

    fn disj(&mut self, items: Vec<(Expr, bool)>) -> Vec<Vec<Lit>> {
        let mut flat = Vec::new();
        flatten_or(items, &mut flat);
        if flat.iter().any(|(x, p)| matches!(x, Expr::Const(b) if b == p)) {
            return vec![];
        }
        let mut costs: Vec<(usize, usize)> = flat
            .iter()
            .enumerate()
            .map(|(i, (x, p))| (estimate(x, *p), i))
            .collect();
        costs.sort();
        let mut expand = vec![false; flat.len()];
        // distributing the other literals over the costliest item is linear
        // in its size, so that one is always opened
        let mut product = 1usize;
        if let Some(&(c, i)) = costs.last().filter(|(c, _)| *c > 1) {
            expand[i] = true;
            product = c;
        }
        for &(c, i) in &costs {
            if c <= 1 {
                expand[i] = true;
                continue;
            }
            if expand[i] {
                continue;
            }
            let next = sat_mul(product, c);
            if next <= 8 {
                expand[i] = true;
                product = next;
            }
        }
        let mut acc: Vec<Vec<Lit>> = vec![vec![]];
        for (i, (x, p)) in flat.iter().enumerate() {
            if expand[i] {
                let part = self.cnf(x, *p);
                if part.is_empty() {
                    return vec![];
                }
                if part.len() == 1 {
                    for c in acc.iter_mut() {
                        c.extend_from_slice(&part[0]);
                    }
                } else {
                    let mut next = Vec::with_capacity(acc.len() * part.len());
                    for c in &acc {
                        for d in &part {
                            let mut m = c.clone();
                            m.extend_from_slice(d);
                            next.push(m);
                        }
                    }
                    acc = next;
                }
            } else {
                let l = self.lit_of(x, *p);
                for c in acc.iter_mut() {
                    c.push(l);
                }
            }
        }
        acc
    }
}

fn flatten_or(items: Vec<(Expr, bool)>, out: &mut Vec<(Expr, bool)>) {
    for (x, p) in items {
        match (x, p) {
            (Expr::Or(xs), true) | (Expr::And(xs), false) => {
                flatten_or(xs.into_iter().map(|y| (y, p)).collect(), out)
            }
            (Expr::Not(y), p) => flatten_or(vec![(*y, !p)], out),
            (Expr::Implies(a, b), true) => flatten_or(vec![(*a, false), (*b, true)], out),
            (x, p) => out.push((x, p)),
        }
    }
}

/// Equisatisfiable CNF with memoized auxiliaries, numbered after the
/// constraint set's own variables in emission order.
pub fn clausify(cs: &ConstraintSet) -> Cnf {
    let mut cl = Clausifier {
        next_var: cs.num_vars,
        clauses: Vec::new(),
        memo: HashMap::new(),
        new_aux: 0,
    };
    let mut clause_counts = BTreeMap::new();
    let mut aux_counts = BTreeMap::new();
    for c in &cs.constraints {
        let before = cl.clauses.len();
        cl.new_aux = 0;
        let top = cl.cnf(&c.expr, true);
        for clause in top {
            if clause.is_empty() {
                cl.clauses.push(clause);
            } else {
                cl.emit(clause);
            }
        }
        *clause_counts.entry(c.category).or_insert(0) += cl.clauses.len() - before;
        *aux_counts.entry(c.category).or_insert(0) += cl.new_aux;
    }
    let pools = if cs.pools.is_empty() {
        vec![("input".to_string(), cs.num_vars)]
    } else {
        cs.pools.clone()
    };
    Cnf {
        num_vars: cl.next_var,
        clauses: cl.clauses,
        pools,
        clause_counts,
        aux_counts,
        names: BTreeMap::new(),
    }
}
