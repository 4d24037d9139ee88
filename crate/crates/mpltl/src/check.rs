//! End-to-end bounded check: encode, clausify, solve, decode, audit.

use crate::cnf::{clausify, Cnf, Stats};
use crate::encode::{encode, EncodeOptions, Encoding, Mutation, VarCounts};
use crate::formula::{Atom, Formula};
use crate::oracle::{check_trace, Failure};
use crate::parser::Problem;
use crate::sat::{solve, Backend, Outcome, SolveError};
use crate::trace::{decode_trace, LassoTrace, TraceError};
use crate::{EncoderKind, TimeModel};
use serde::Serialize;
use std::time::{Duration, Instant};

#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub k: usize,
    pub time: TimeModel,
    pub encoder: EncoderKind,
    pub backend: Backend,
    pub timeout: Option<Duration>,
    pub mutation: Option<Mutation>,
}

impl CheckConfig {
    pub fn new(k: usize, time: TimeModel, encoder: EncoderKind) -> CheckConfig {
        CheckConfig {
            k,
            time,
            encoder,
            backend: Backend::Embedded,
            timeout: None,
            mutation: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Sat,
    Unsat,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "SAT",
            Verdict::Unsat => "UNSAT",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub trace: Option<LassoTrace>,
    /// Oracle audit of the trace against the checked formula.
    pub audit: Option<Result<(), Failure>>,
    pub gen_time: Duration,
    pub sat_time: Duration,
    pub vars: u32,
    pub clauses: usize,
    pub var_counts: VarCounts,
    pub stats: Stats,
}

#[derive(Debug, thiserror::Error)]
pub enum CheckError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("decoding the model failed: {0}")]
    Decode(#[from] TraceError),
}

/// Encoding and CNF of `f` at the configured bound, with generation time.
pub fn generate(f: &Formula, extra_atoms: &[Atom], cfg: &CheckConfig) -> (Encoding, Cnf, Duration) {
    let start = Instant::now();
    let mut opts = EncodeOptions::new(cfg.time, cfg.encoder);
    opts.mutation = cfg.mutation;
    let enc = encode(f, extra_atoms, cfg.k, opts);
    let cnf = clausify(&enc.constraints);
    (enc, cnf, start.elapsed())
}

pub fn check(f: &Formula, extra_atoms: &[Atom], cfg: &CheckConfig) -> Result<CheckReport, CheckError> {
    let (enc, cnf, gen_time) = generate(f, extra_atoms, cfg);
    let start = Instant::now();
    let outcome = solve(&cnf, &cfg.backend, cfg.timeout)?;
    let sat_time = start.elapsed();
    let (verdict, trace) = match outcome {
        Outcome::Sat(model) => (Verdict::Sat, Some(decode_trace(&enc.vm, &model)?)),
        Outcome::Unsat => (Verdict::Unsat, None),
    };
    let audit = trace.as_ref().map(|t| check_trace(f, t));
    Ok(CheckReport {
        verdict,
        trace,
        audit,
        gen_time,
        sat_time,
        vars: cnf.num_vars,
        clauses: cnf.num_clauses(),
        var_counts: enc.vm.counts(),
        stats: cnf.stats(),
    })
}

/// Unit clauses fixing the states and loop choices of `trace`.
pub fn pin_trace(enc: &Encoding, cnf: &mut Cnf, trace: &LassoTrace) {
    let vm = &enc.vm;
    let unit = |v: u32, b: bool| vec![if b { v as i32 } else { -(v as i32) }];
    for (a, atom) in vm.alphabet.iter().enumerate() {
        let ti = trace.atom_index(atom);
        for i in 0..=vm.k {
            let b = ti.is_some_and(|x| trace.states[i][x]);
            cnf.clauses.push(unit(vm.state_var(a, i), b));
        }
    }
    for i in 0..=vm.k {
        cnf.clauses.push(unit(vm.loop_var(i), trace.loop_start == Some(i)));
        if let Some(v) = vm.past_loop_var(i) {
            cnf.clauses.push(unit(v, trace.past_loop == Some(i)));
        }
    }
}

/// Whether the encoding of `f` admits exactly the given trace.
pub fn admits(f: &Formula, trace: &LassoTrace, cfg: &CheckConfig) -> Result<bool, CheckError> {
    let (enc, mut cnf, _) = generate(f, &trace.alphabet, cfg);
    pin_trace(&enc, &mut cnf, trace);
    Ok(matches!(solve(&cnf, &cfg.backend, cfg.timeout)?, Outcome::Sat(_)))
}

pub fn check_problem(p: &Problem, backend: &Backend, timeout: Option<Duration>) -> Result<CheckReport, CheckError> {
    let mut cfg = CheckConfig::new(p.bound, p.time_model, p.encoder);
    cfg.backend = backend.clone();
    cfg.timeout = timeout;
    check(&p.checked_formula(), &p.alphabet, &cfg)
}
