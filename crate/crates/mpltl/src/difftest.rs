//! Differential testing of the two encoders against each other and the
//! oracle, on seeded random formulas.

use crate::check::{admits, check, CheckConfig, CheckReport, Verdict};
use crate::encode::Mutation;
use crate::formula::{self, Formula};
use crate::oracle::check_trace;
use crate::random::{minimize, random_formula, RandomConfig};
use crate::{EncoderKind, TimeModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

#[derive(Clone, Debug)]
pub struct DiffConfig {
    pub seed: u64,
    pub n: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub times: Vec<TimeModel>,
    pub formulas: RandomConfig,
    pub mutation: Option<Mutation>,
    pub minimize: bool,
}

impl DiffConfig {
    pub fn new(seed: u64, n: usize) -> DiffConfig {
        DiffConfig {
            seed,
            n,
            k_min: 4,
            k_max: 10,
            times: vec![TimeModel::Mono, TimeModel::Bi],
            formulas: RandomConfig::default(),
            mutation: None,
            minimize: true,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Discrepancy {
    pub case: usize,
    pub time: TimeModel,
    pub k: usize,
    pub formula: String,
    pub problem: String,
    pub reproducer: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DiffReport {
    pub seed: u64,
    pub cases: usize,
    pub runs: usize,
    pub sat: usize,
    pub unsat: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl fmt::Display for DiffReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "seed {}: {} formulas, {} runs ({} sat, {} unsat), {} discrepancies",
            self.seed,
            self.cases,
            self.runs,
            self.sat,
            self.unsat,
            self.discrepancies.len()
        )?;
        for d in &self.discrepancies {
            writeln!(
                f,
                "case {} [{} k={}]: {}\n  formula:    {}\n  reproducer: {}",
                d.case, d.time, d.k, d.problem, d.formula, d.reproducer
            )?;
        }
        Ok(())
    }
}

/// Problem found with one formula at one bound, if any.
fn examine(f: &Formula, k: usize, time: TimeModel, mutation: Option<Mutation>) -> (Option<String>, Option<Verdict>) {
    let run = |enc: EncoderKind| -> Result<CheckReport, String> {
        let mut cfg = CheckConfig::new(k, time, enc);
        cfg.mutation = mutation;
        check(f, &[], &cfg).map_err(|e| format!("{enc} encoder: {e}"))
    };
    let (m, n) = match (run(EncoderKind::Metric), run(EncoderKind::Nonmetric)) {
        (Ok(m), Ok(n)) => (m, n),
        (Err(e), _) | (_, Err(e)) => return (Some(e), None),
    };
    if m.verdict != n.verdict {
        return (
            Some(format!("metric {} but nonmetric {}", m.verdict, n.verdict)),
            None,
        );
    }
    let expanded = formula::tau_expand(&formula::to_pnf(f));
    for (name, r) in [("metric", &m), ("nonmetric", &n)] {
        if let Some(t) = &r.trace {
            for g in [f, &expanded] {
                if let Err(e) = check_trace(g, t) {
                    return (Some(format!("{name} trace fails the oracle: {e}")), None);
                }
            }
        }
    }
    // Each encoder must also accept the witness found by the other one.
    for (name, r, other) in [
        ("metric", &m, EncoderKind::Nonmetric),
        ("nonmetric", &n, EncoderKind::Metric),
    ] {
        if let Some(t) = &r.trace {
            let mut cfg = CheckConfig::new(k, time, other);
            cfg.mutation = mutation;
            match admits(f, t, &cfg) {
                Ok(true) => {}
                Ok(false) => return (Some(format!("{other} encoding rejects the {name} trace")), None),
                Err(e) => return (Some(format!("{other} encoder: {e}")), None),
            }
        }
    }
    (None, Some(m.verdict))
}

pub fn difftest(cfg: &DiffConfig) -> Result<DiffReport, String> {
    if cfg.n == 0 {
        return Err("difftest needs at least one case".into());
    }
    if cfg.k_min < 1 || cfg.k_min > cfg.k_max {
        return Err(format!("bad bound range {}..={}", cfg.k_min, cfg.k_max));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let cases: Vec<(usize, Formula, usize)> = (0..cfg.n)
        .map(|i| {
            let f = random_formula(&mut rng, &cfg.formulas);
            let k = rng.random_range(cfg.k_min..=cfg.k_max);
            (i, f, k)
        })
        .collect();
    let results: Vec<(Vec<Discrepancy>, usize, usize)> = cases
        .par_iter()
        .map(|(i, f, k)| {
            let mut found = Vec::new();
            let (mut sat, mut unsat) = (0, 0);
            for &time in &cfg.times {
                match examine(f, *k, time, cfg.mutation) {
                    (None, Some(Verdict::Sat)) => sat += 1,
                    (None, _) => unsat += 1,
                    (Some(problem), _) => {
                        let reproducer = if cfg.minimize {
                            minimize(f, |g| examine(g, *k, time, cfg.mutation).0.is_some())
                        } else {
                            f.clone()
                        };
                        found.push(Discrepancy {
                            case: *i,
                            time,
                            k: *k,
                            formula: f.to_string(),
                            problem,
                            reproducer: reproducer.to_string(),
                        });
                    }
                }
            }
            (found, sat, unsat)
        })
        .collect();
    let mut report = DiffReport {
        seed: cfg.seed,
        cases: cfg.n,
        runs: cfg.n * cfg.times.len(),
        ..DiffReport::default()
    };
    for (d, s, u) in results {
        report.discrepancies.extend(d);
        report.sat += s;
        report.unsat += u;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_cases_rejected() {
        assert!(difftest(&DiffConfig::new(1, 0)).is_err());
    }

    #[test]
    fn small_run_is_clean() {
        let r = difftest(&DiffConfig::new(11, 15)).unwrap();
        assert!(r.discrepancies.is_empty(), "{r}");
        assert_eq!(r.sat + r.unsat, 30);
    }
}
