//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use mpltl::cases::build_case;
use mpltl::check::{check, generate, CheckConfig, CheckReport, Verdict};
use mpltl::difftest::{difftest, DiffConfig};
use mpltl::encode::{encode, EncodeOptions};
use mpltl::formula::{Formula, MetricOp};
use mpltl::oracle::{check_trace, enumerate_witness};
use mpltl::parser::{parse_formula, Problem};
use mpltl::random::{random_formula, RandomConfig};
use mpltl::sat::{solve, Backend, Outcome};
use mpltl::trace::LassoTrace;
use mpltl::{EncoderKind, TimeModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

const ENCODERS: [EncoderKind; 2] = [EncoderKind::Metric, EncoderKind::Nonmetric];

struct Outcome9 {
    models: usize,
    problems: Vec<String>,
}

/// Every SAT model seen by the suite goes through here: selector counts and
/// loop state equalities are checked on the raw model, not only on the
/// decoded trace.
fn audit_model(f: &Formula, k: usize, time: TimeModel, enc: EncoderKind, seen: &mut Outcome9) {
    let cfg = CheckConfig::new(k, time, enc);
    let (encoding, cnf, _) = generate(f, &[], &cfg);
    let model = match solve(&cnf, &Backend::Embedded, None) {
        Ok(Outcome::Sat(m)) => m,
        _ => return,
    };
    seen.models += 1;
    let vm = &encoding.vm;
    let lf: Vec<usize> = (1..=k).filter(|&i| model[vm.loop_var(i) as usize]).collect();
    let lp: Vec<usize> = (0..=k)
        .filter(|&i| vm.past_loop_var(i).is_some_and(|v| model[v as usize]))
        .collect();
    let state = |i: usize| -> Vec<bool> {
        (0..vm.alphabet.len()).map(|a| model[vm.state_var(a, i) as usize]).collect()
    };
    let mut bad = Vec::new();
    if lf.len() > 1 {
        bad.push(format!("{} loop selectors", lf.len()));
    }
    if lp.len() > 1 {
        bad.push(format!("{} past-loop selectors", lp.len()));
    }
    if let [i] = lf[..] {
        if state(i - 1) != state(k) {
            bad.push(format!("S_{} != S_{k}", i - 1));
        }
    }
    if let [i] = lp[..] {
        if state(i + 1) != state(0) {
            bad.push(format!("S_{} != S_0", i + 1));
        }
    }
    if let Err(e) = mpltl::trace::decode_trace(vm, &model) {
        bad.push(format!("decode: {e}"));
    }
    if !bad.is_empty() {
        seen.problems.push(format!("{f} k={k} {time} {enc}: {}", bad.join(", ")));
    }
}

fn run(f: &Formula, k: usize, time: TimeModel, enc: EncoderKind) -> CheckReport {
    check(f, &[], &CheckConfig::new(k, time, enc)).expect("check runs")
}

fn run_problem(p: &Problem, enc: EncoderKind) -> CheckReport {
    check(&p.checked_formula(), &p.alphabet, &CheckConfig::new(p.bound, p.time_model, enc)).expect("check runs")
}

fn case(name: &str, kv: &[(&str, &str)]) -> Problem {
    let params: BTreeMap<String, String> = kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    build_case(name, &params).expect("bundled case").problem
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn nexts(f: Formula, n: u32) -> Formula {
    (0..n).fold(f, |g, _| Formula::next(g))
}

fn criterion1() -> (bool, String) {
    let start = Instant::now();
    let mut bad = Vec::new();
    let out = Formula::atom("out");
    for d in [5u32, 10, 20] {
        for k in [20usize, 40] {
            let f = Formula::alw(Formula::iff(Formula::atom("in"), Formula::metric(MetricOp::EvEq, d, out.clone())));
            let kk = k as u32;
            let m = encode(&f, &[], k, EncodeOptions::new(TimeModel::Mono, EncoderKind::Metric));
            let dag = &m.vm.dag;
            let fv = [out.clone(), Formula::metric(MetricOp::EvEq, d, out.clone())]
                .iter()
                .map(|g| dag.index_of(g).map_or(0, |n| m.vm.fv_count(n)))
                .sum::<u32>();
            let mf = m.vm.counts().mf;
            if fv != 2 * (kk + 2) || mf != 2 * d {
                bad.push(format!("metric d={d} k={k}: fv {fv} (want {}), mf {mf} (want {})", 2 * (kk + 2), 2 * d));
            }
            let n = encode(&f, &[], k, EncodeOptions::new(TimeModel::Mono, EncoderKind::Nonmetric));
            let chain = (0..=d)
                .map(|j| n.vm.dag.index_of(&nexts(out.clone(), j)).map_or(0, |x| n.vm.fv_count(x)))
                .sum::<u32>();
            if chain != (d + 1) * (kk + 2) {
                bad.push(format!("nonmetric d={d} k={k}: chain {chain} (want {})", (d + 1) * (kk + 2)));
            }
            if n.vm.counts().mf != 0 {
                bad.push(format!("nonmetric d={d} k={k} allocates MF variables"));
            }
        }
    }
    let t = start.elapsed();
    let ok = bad.is_empty() && t < Duration::from_secs(5);
    let detail = if bad.is_empty() {
        format!("6 configurations exact, {} (limit 5s)", secs(t))
    } else {
        bad.join("; ")
    };
    (ok, detail)
}

fn shiftsync_sizes() -> ((bool, String), (bool, String)) {
    let start = Instant::now();
    let p = case("shiftsync", &[("d", "100"), ("k", "400")]);
    let f = p.checked_formula();
    let mut clauses = [0usize; 2];
    let mut gen = [Duration::MAX; 2];
    // best of three generations per encoder
    for _ in 0..3 {
        for (i, enc) in ENCODERS.into_iter().enumerate() {
            let (_, cnf, t) = generate(&f, &p.alphabet, &CheckConfig::new(400, p.time_model, enc));
            clauses[i] = cnf.num_clauses();
            gen[i] = gen[i].min(t);
        }
    }
    let t = start.elapsed();
    let ratio = clauses[0] as f64 / clauses[1] as f64;
    let c2 = (
        ratio <= 0.60 && t < Duration::from_secs(120),
        format!(
            "metric {} / nonmetric {} clauses = {:.3} (limit 0.60), {} (limit 120s)",
            clauses[0],
            clauses[1],
            ratio,
            secs(t)
        ),
    );
    let c3 = (
        gen[0] < gen[1],
        format!(
            "generation metric {:.3}s vs nonmetric {:.3}s (speedup {:+.0}%)",
            gen[0].as_secs_f64(),
            gen[1].as_secs_f64(),
            (gen[1].as_secs_f64() - gen[0].as_secs_f64()) / gen[0].as_secs_f64() * 100.0
        ),
    );
    (c2, c3)
}

fn criterion4() -> (bool, String) {
    let start = Instant::now();
    let report = difftest(&DiffConfig::new(2024, 500)).expect("difftest runs");
    let t = start.elapsed();
    let ok = report.discrepancies.is_empty() && t < Duration::from_secs(300);
    let mut detail = format!(
        "{} runs ({} sat, {} unsat), {} discrepancies, {} (limit 300s)",
        report.runs,
        report.sat,
        report.unsat,
        report.discrepancies.len(),
        secs(t)
    );
    if let Some(d) = report.discrepancies.first() {
        detail.push_str(&format!("; first: {} -> {}", d.problem, d.reproducer));
    }
    (ok, detail)
}

fn criterion5(seen: &mut Outcome9) -> (bool, String) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = RandomConfig {
        metric: false,
        atoms: 2,
        ..RandomConfig::default()
    };
    let (mut kept, mut bad, mut future_only, mut plain_bad) = (0, Vec::new(), 0, 0);
    while kept < 100 {
        let f = random_formula(&mut rng, &cfg);
        // skip formulas with nothing to enumerate
        if f.atoms().is_empty() || f.depth() < 3 {
            continue;
        }
        let k = rng.random_range(1..=6);
        let time = if kept % 2 == 0 { TimeModel::Mono } else { TimeModel::Bi };
        kept += 1;
        let witness = enumerate_witness(&f, k, time, true);
        if let Some(w) = &witness {
            if check_trace(&f, w).is_err() {
                bad.push(format!("enumerated witness fails the oracle: {f}"));
            }
        }
        for enc in ENCODERS {
            let r = run(&f, k, time, enc);
            if (r.verdict == Verdict::Sat) != witness.is_some() {
                bad.push(format!("{f} k={k} {time} {enc}: encoder {} vs enumeration", r.verdict));
            }
            if r.verdict == Verdict::Sat {
                audit_model(&f, k, time, enc, seen);
            }
        }
        if !f.has_past() {
            future_only += 1;
            if enumerate_witness(&f, k, time, false).is_some() != witness.is_some() {
                plain_bad += 1;
            }
        }
    }
    let t = start.elapsed();
    let ok = bad.is_empty() && plain_bad == 0;
    let mut detail = format!(
        "100 formulas x 2 encoders, {} mismatches; future-only subset {future_only}, {plain_bad} differ from plain enumeration; {}",
        bad.len(),
        secs(t)
    );
    if let Some(b) = bad.first() {
        detail.push_str(&format!("; first: {b}"));
    }
    (ok, detail)
}

/// Longest run of consecutive instants where `atom` holds, looking at the
/// infinite word over three unrollings.
fn longest_run(t: &LassoTrace, atom: &str) -> usize {
    let a = t.atom_index(&mpltl::formula::Atom::new(atom)).expect("atom in trace");
    let k = t.k() as i64;
    let (mut best, mut cur) = (0, 0);
    for i in -(k + 1)..=2 * (k + 1) {
        if t.holds(a, i) == Some(true) {
            cur += 1;
            best = best.max(cur);
        } else {
            cur = 0;
        }
    }
    best
}

fn criterion6(seen: &mut Outcome9) -> (bool, String) {
    let start = Instant::now();
    let p1 = case("trl", &[("delta", "10"), ("property", "p1"), ("k", "30")]);
    let r1 = run_problem(&p1, EncoderKind::Metric);
    let run_len = r1.trace.as_ref().map_or(0, |t| longest_run(t, "L"));
    if r1.verdict == Verdict::Sat {
        audit_model(&p1.checked_formula(), 30, p1.time_model, EncoderKind::Metric, seen);
    }
    let p2 = case("trl", &[("delta", "10"), ("property", "p2"), ("k", "30")]);
    let r2 = run_problem(&p2, EncoderKind::Metric);
    let t = start.elapsed();
    let ok = r1.verdict == Verdict::Sat
        && r1.audit == Some(Ok(()))
        && run_len > 10
        && r2.verdict == Verdict::Unsat
        && t < Duration::from_secs(30);
    (
        ok,
        format!(
            "P1 {} (lamp on for {run_len} consecutive instants, oracle {}), P2 {}, {} (limit 30s)",
            r1.verdict,
            if r1.audit == Some(Ok(())) { "ok" } else { "FAILED" },
            r2.verdict,
            secs(t)
        ),
    )
}

fn criterion7(seen: &mut Outcome9) -> (bool, String) {
    let start = Instant::now();
    let safety = case("fischer", &[("processes", "3"), ("delay", "5"), ("property", "safety"), ("k", "30")]);
    let verdicts: Vec<Verdict> = ENCODERS.iter().map(|&e| run_problem(&safety, e).verdict).collect();
    let sat = case("fischer", &[("processes", "3"), ("delay", "5"), ("property", "sat"), ("k", "30")]);
    let r = run_problem(&sat, EncoderKind::Metric);
    if r.verdict == Verdict::Sat {
        audit_model(&sat.checked_formula(), 30, sat.time_model, EncoderKind::Metric, seen);
    }
    let ok = verdicts.iter().all(|v| *v == Verdict::Unsat) && r.verdict == Verdict::Sat && r.audit == Some(Ok(()));
    (
        ok,
        format!(
            "safety metric {} / nonmetric {}; sat variant {} with oracle {}; {}",
            verdicts[0],
            verdicts[1],
            r.verdict,
            if r.audit == Some(Ok(())) { "ok" } else { "FAILED" },
            secs(start.elapsed())
        ),
    )
}

fn criterion8(seen: &mut Outcome9) -> (bool, String) {
    let unsat = parse_formula("(and (ev p) (alw (not p)))").unwrap();
    let shift = parse_formula("(alw (iff in (ev= out 3)))").unwrap();
    let mut bad = Vec::new();
    for time in [TimeModel::Mono, TimeModel::Bi] {
        for enc in ENCODERS {
            for k in [2, 5, 10] {
                if run(&unsat, k, time, enc).verdict != Verdict::Unsat {
                    bad.push(format!("◇p∧□¬p SAT at k={k} {time} {enc}"));
                }
            }
            let r = run(&shift, 10, time, enc);
            if r.verdict != Verdict::Sat || r.audit != Some(Ok(())) {
                bad.push(format!("shift register {} / {:?} at {time} {enc}", r.verdict, r.audit));
            } else {
                audit_model(&shift, 10, time, enc, seen);
            }
        }
    }
    let ok = bad.is_empty();
    let detail = if ok {
        "◇p∧□¬p UNSAT at k=2,5,10; Alw(in↔◇=3 out) SAT at k=10 with verified trace (both encoders, both time models)".into()
    } else {
        bad.join("; ")
    };
    (ok, detail)
}

fn main() {
    let mut seen = Outcome9 {
        models: 0,
        problems: Vec::new(),
    };
    let mut results: Vec<(u32, &str, (bool, String))> = Vec::new();
    let mut report = |n: u32, name: &'static str, r: (bool, String)| {
        println!("[{}] {n}. {name}: {}", if r.0 { "PASS" } else { "FAIL" }, r.1);
        results.push((n, name, r));
    };
    report(1, "variable accounting", criterion1());
    let (c2, c3) = shiftsync_sizes();
    report(2, "size reduction", c2);
    report(3, "generation speed", c3);
    report(4, "differential correctness", criterion4());
    report(5, "enumeration agreement", criterion5(&mut seen));
    report(6, "timer reset lamp", criterion6(&mut seen));
    report(7, "Fischer", criterion7(&mut seen));
    report(8, "sanity pair", criterion8(&mut seen));
    // extra models from random formulas in both time models
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..60 {
        let f = random_formula(&mut rng, &RandomConfig::default());
        let k = rng.random_range(4..=10);
        let time = if i % 2 == 0 { TimeModel::Mono } else { TimeModel::Bi };
        for enc in ENCODERS {
            audit_model(&f, k, time, enc, &mut seen);
        }
    }
    let c9 = (
        seen.problems.is_empty() && seen.models > 0,
        format!(
            "{} SAT models inspected, {} violations{}",
            seen.models,
            seen.problems.len(),
            seen.problems.first().map(|p| format!("; first: {p}")).unwrap_or_default()
        ),
    );
    report(9, "loop-structure invariants", c9);
    let failed = results.iter().filter(|r| !r.2 .0).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
