//! Prefix S-expression front end for formulas and problem files.

use crate::formula::{Atom, BinOp, Formula, MetricOp, UnOp};
use crate::{EncoderKind, TimeModel};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub token: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.token.is_empty() {
            write!(f, " (at `{}`)", self.token)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Clone, Debug)]
enum Sexp {
    Tok(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Tok(_, p) | Sexp::List(_, p) => *p,
        }
    }

    fn text(&self) -> String {
        match self {
            Sexp::Tok(t, _) => t.clone(),
            Sexp::List(..) => "(".into(),
        }
    }
}

fn err(pos: Pos, message: impl Into<String>, token: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        column: pos.column,
        message: message.into(),
        token: token.into(),
    }
}

fn err_at(s: &Sexp, message: impl Into<String>) -> ParseError {
    err(s.pos(), message, s.text())
}

fn read_all(text: &str) -> Result<Vec<Sexp>, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = vec![(Vec::new(), Pos { line: 1, column: 1 })];
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let here = Pos { line, column };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                column = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                column += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    column += 1;
                }
            }
            '(' => {
                chars.next();
                column += 1;
                stack.push((Vec::new(), here));
            }
            ')' => {
                chars.next();
                column += 1;
                if stack.len() == 1 {
                    return Err(err(here, "unbalanced closing parenthesis", ")"));
                }
                let (items, open) = stack.pop().unwrap();
                stack.last_mut().unwrap().0.push(Sexp::List(items, open));
            }
            _ => {
                let mut tok = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    tok.push(c);
                    chars.next();
                    column += 1;
                }
                stack.last_mut().unwrap().0.push(Sexp::Tok(tok, here));
            }
        }
    }
    if stack.len() > 1 {
        let open = stack.last().unwrap().1;
        return Err(err(open, "unbalanced opening parenthesis", "("));
    }
    Ok(stack.pop().unwrap().0)
}

fn unary_op(name: &str) -> Option<UnOp> {
    UnOp::ALL.into_iter().find(|op| op.keyword() == name)
}

fn binary_op(name: &str) -> Option<BinOp> {
    BinOp::ALL.into_iter().find(|op| op.keyword() == name)
}

fn metric_op(name: &str) -> Option<MetricOp> {
    MetricOp::ALL.into_iter().find(|op| op.keyword() == name)
}

fn is_reserved(name: &str) -> bool {
    unary_op(name).is_some()
        || binary_op(name).is_some()
        || metric_op(name).is_some()
        || matches!(name, "exists" | "forall" | "range")
}

fn valid_atom(name: &str) -> bool {
    let mut cs = name.chars();
    match cs.next() {
        Some(c) if c.is_alphabetic() || c == '_' => {}
        _ => return false,
    }
    cs.all(|c| c.is_alphanumeric() || "_.'[]{}-".contains(c))
}

fn substitute(s: &Sexp, var: &str, value: i64) -> Sexp {
    match s {
        Sexp::Tok(t, p) => {
            if t == var {
                Sexp::Tok(value.to_string(), *p)
            } else {
                let pat = format!("{{{var}}}");
                Sexp::Tok(t.replace(&pat, &value.to_string()), *p)
            }
        }
        Sexp::List(items, p) => Sexp::List(
            items.iter().map(|i| substitute(i, var, value)).collect(),
            *p,
        ),
    }
}

fn eval_int(s: &Sexp) -> Result<i64, ParseError> {
    match s {
        Sexp::Tok(t, _) => t
            .parse::<i64>()
            .map_err(|_| err_at(s, "expected an integer")),
        Sexp::List(items, _) => {
            let head = match items.first() {
                Some(Sexp::Tok(h, _)) => h.as_str(),
                _ => return Err(err_at(s, "expected an integer expression")),
            };
            if items.len() != 3 {
                return Err(err_at(s, "arithmetic takes two operands"));
            }
            let a = eval_int(&items[1])?;
            let b = eval_int(&items[2])?;
            match head {
                "+" => Ok(a + b),
                "-" => Ok(a - b),
                "*" => Ok(a * b),
                _ => Err(err_at(&items[0], "unknown arithmetic operator")),
            }
        }
    }
}

fn eval_range(s: &Sexp) -> Result<Vec<i64>, ParseError> {
    let items = match s {
        Sexp::List(items, _) => items,
        Sexp::Tok(..) => return Err(err_at(s, "expected a list of values")),
    };
    if let Some(Sexp::Tok(h, _)) = items.first() {
        if h == "range" {
            if items.len() != 3 {
                return Err(err_at(s, "range takes two bounds"));
            }
            let lo = eval_int(&items[1])?;
            let hi = eval_int(&items[2])?;
            return Ok((lo..=hi).collect());
        }
    }
    items.iter().map(eval_int).collect()
}

fn bound_of(s: &Sexp) -> Result<u32, ParseError> {
    let v = eval_int(s)?;
    if v < 0 {
        return Err(err_at(s, "negative bound"));
    }
    u32::try_from(v).map_err(|_| err_at(s, "bound too large"))
}

fn formula_of(s: &Sexp) -> Result<Formula, ParseError> {
    match s {
        Sexp::Tok(t, _) => match t.as_str() {
            "true" => Ok(Formula::True),
            "false" => Ok(Formula::False),
            name if is_reserved(name) => Err(err_at(s, "operator used as an atom")),
            name if valid_atom(name) => Ok(Formula::Atom(Atom::new(name))),
            _ => Err(err_at(s, "invalid atom name")),
        },
        Sexp::List(items, _) => {
            let (head, args) = match items.split_first() {
                Some((Sexp::Tok(h, _), rest)) => (h.as_str(), rest),
                Some((h, _)) => return Err(err_at(h, "expected an operator")),
                None => return Err(err_at(s, "empty list")),
            };
            let arity = |n: usize| -> Result<(), ParseError> {
                if args.len() == n {
                    Ok(())
                } else {
                    Err(err_at(
                        &items[0],
                        format!("arity mismatch: `{head}` takes {n} arguments, got {}", args.len()),
                    ))
                }
            };
            if head == "exists" || head == "forall" {
                arity(3)?;
                let var = match &args[0] {
                    Sexp::Tok(v, _) => v.clone(),
                    other => return Err(err_at(other, "expected a variable name")),
                };
                let values = eval_range(&args[1])?;
                let parts = values
                    .into_iter()
                    .map(|v| formula_of(&substitute(&args[2], &var, v)))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(if head == "exists" {
                    Formula::or_all(parts)
                } else {
                    Formula::and_all(parts)
                });
            }
            if head == "and" || head == "or" {
                if args.is_empty() {
                    return Err(err_at(&items[0], format!("arity mismatch: `{head}` needs arguments")));
                }
                let parts = args.iter().map(formula_of).collect::<Result<Vec<_>, _>>()?;
                return Ok(if head == "and" {
                    Formula::and_all(parts)
                } else {
                    Formula::or_all(parts)
                });
            }
            if let Some(op) = unary_op(head) {
                arity(1)?;
                return Ok(Formula::un(op, formula_of(&args[0])?));
            }
            if let Some(op) = binary_op(head) {
                arity(2)?;
                return Ok(Formula::bin(op, formula_of(&args[0])?, formula_of(&args[1])?));
            }
            if let Some(op) = metric_op(head) {
                arity(2)?;
                let t = bound_of(&args[1])?;
                return Ok(Formula::metric(op, t, formula_of(&args[0])?));
            }
            Err(err_at(&items[0], "unknown operator"))
        }
    }
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let items = read_all(text)?;
    match items.as_slice() {
        [one] => formula_of(one),
        [] => Err(err(Pos { line: 1, column: 1 }, "empty input", "")),
        [_, extra, ..] => Err(err_at(extra, "trailing input after formula")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub bound: usize,
    pub time_model: TimeModel,
    pub encoder: EncoderKind,
    pub spec: Vec<Formula>,
    pub property: Option<Formula>,
    pub alphabet: Vec<Atom>,
}

impl Problem {
    pub fn new(bound: usize, time_model: TimeModel, spec: Vec<Formula>, property: Option<Formula>) -> Problem {
        let mut p = Problem {
            bound,
            time_model,
            encoder: EncoderKind::Metric,
            spec,
            property,
            alphabet: Vec::new(),
        };
        p.alphabet = p.collect_alphabet(&[]);
        p
    }

    fn collect_alphabet(&self, declared: &[Atom]) -> Vec<Atom> {
        let mut set: BTreeSet<Atom> = declared.iter().cloned().collect();
        for f in self.spec.iter().chain(self.property.iter()) {
            set.extend(f.atoms());
        }
        set.into_iter().collect()
    }

    /// Conjunction of the spec, conjoined with the negated property if any.
    pub fn checked_formula(&self) -> Formula {
        let spec = Formula::and_all(self.spec.iter().cloned());
        match &self.property {
            Some(p) if self.spec.is_empty() => Formula::not(p.clone()),
            Some(p) => Formula::and(spec, Formula::not(p.clone())),
            None => spec,
        }
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let items = read_all(text)?;
    let mut bound = None;
    let mut time = None;
    let mut encoder = None;
    let mut spec: Option<Vec<Formula>> = None;
    let mut property = None;
    let mut declared: Option<Vec<Atom>> = None;
    let mut seen: Vec<String> = Vec::new();
    for item in &items {
        let (head, args) = match item {
            Sexp::List(xs, _) => match xs.split_first() {
                Some((Sexp::Tok(h, _), rest)) => (h.as_str(), rest),
                _ => return Err(err_at(item, "expected a section")),
            },
            Sexp::Tok(..) => return Err(err_at(item, "expected a section")),
        };
        // `spec` may be split over several sections; the rest appear once.
        if head != "spec" && seen.iter().any(|s| s == head) {
            return Err(err_at(item, format!("duplicate section `{head}`")));
        }
        seen.push(head.to_string());
        let single = || -> Result<&Sexp, ParseError> {
            match args {
                [one] => Ok(one),
                _ => Err(err_at(item, format!("section `{head}` takes one value"))),
            }
        };
        match head {
            "bound" => {
                let v = eval_int(single()?)?;
                if v < 1 {
                    return Err(err_at(single()?, "bound must be at least 1"));
                }
                bound = Some(v as usize);
            }
            "time" => {
                let v = single()?;
                time = Some(match v.text().as_str() {
                    "mono" => TimeModel::Mono,
                    "bi" => TimeModel::Bi,
                    _ => return Err(err_at(v, "expected mono or bi")),
                });
            }
            "encoder" => {
                let v = single()?;
                encoder = Some(match v.text().as_str() {
                    "metric" => EncoderKind::Metric,
                    "nonmetric" => EncoderKind::Nonmetric,
                    _ => return Err(err_at(v, "expected metric or nonmetric")),
                });
            }
            "spec" => {
                let more = args.iter().map(formula_of).collect::<Result<Vec<_>, _>>()?;
                spec.get_or_insert_with(Vec::new).extend(more);
            }
            "property" => property = Some(formula_of(single()?)?),
            "alphabet" => {
                let mut atoms = Vec::new();
                for a in args {
                    match formula_of(a)? {
                        Formula::Atom(at) => atoms.push(at),
                        _ => return Err(err_at(a, "expected an atom")),
                    }
                }
                declared = Some(atoms);
            }
            _ => return Err(err_at(item, format!("unknown section `{head}`"))),
        }
    }
    let bound = bound.ok_or_else(|| {
        let pos = items.first().map(Sexp::pos).unwrap_or(Pos { line: 1, column: 1 });
        err(pos, "missing (bound N) section", "")
    })?;
    let mut p = Problem {
        bound,
        time_model: time.unwrap_or(TimeModel::Bi),
        encoder: encoder.unwrap_or(EncoderKind::Metric),
        spec: spec.unwrap_or_default(),
        property,
        alphabet: Vec::new(),
    };
    p.alphabet = p.collect_alphabet(declared.as_deref().unwrap_or(&[]));
    Ok(p)
}
