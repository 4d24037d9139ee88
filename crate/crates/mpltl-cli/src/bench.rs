//! Metric vs nonmetric benchmark rows and their summary.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

pub const CSV_HEADER: [&str; 9] = ["case", "variant", "k", "encoder", "gen_s", "sat_s", "vars", "clauses", "verdict"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub case: String,
    pub variant: String,
    pub k: usize,
    pub encoder: String,
    pub gen_s: f64,
    pub sat_s: f64,
    pub vars: u32,
    pub clauses: usize,
    /// SAT, UNSAT, or ERROR for a failed run.
    pub verdict: String,
}

impl BenchRecord {
    fn ok(&self) -> bool {
        self.verdict == "SAT" || self.verdict == "UNSAT"
    }
}

/// (T_nonmetric − T_metric) / T_metric; `None` when the metric time is zero.
pub fn speedup(nonmetric: f64, metric: f64) -> Option<f64> {
    if metric > 0.0 {
        Some((nonmetric - metric) / metric)
    } else if nonmetric == metric {
        Some(0.0)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PairSummary {
    pub case: String,
    pub k: usize,
    pub gen_speedup: Option<f64>,
    pub sat_speedup: Option<f64>,
    pub total_speedup: Option<f64>,
    /// Fraction of nonmetric clauses saved by the metric encoding.
    pub clause_reduction: f64,
    pub var_reduction: f64,
    pub verdicts_agree: bool,
}

/// One entry per (case, k) with a successful run of both encoders.
pub fn summarize(records: &[BenchRecord]) -> Vec<PairSummary> {
    let mut pairs: BTreeMap<(String, usize), (Option<&BenchRecord>, Option<&BenchRecord>)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.ok()) {
        let slot = pairs.entry((r.case.clone(), r.k)).or_default();
        match r.encoder.as_str() {
            "metric" => slot.0 = Some(r),
            "nonmetric" => slot.1 = Some(r),
            _ => {}
        }
    }
    pairs
        .into_iter()
        .filter_map(|((case, k), pair)| {
            let (m, n) = (pair.0?, pair.1?);
            let reduction = |a: f64, b: f64| if b > 0.0 { 1.0 - a / b } else { 0.0 };
            Some(PairSummary {
                case,
                k,
                gen_speedup: speedup(n.gen_s, m.gen_s),
                sat_speedup: speedup(n.sat_s, m.sat_s),
                total_speedup: speedup(n.gen_s + n.sat_s, m.gen_s + m.sat_s),
                clause_reduction: reduction(m.clauses as f64, n.clauses as f64),
                var_reduction: reduction(m.vars as f64, n.vars as f64),
                verdicts_agree: m.verdict == n.verdict,
            })
        })
        .collect()
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |v| format!("{:+.1}%", v * 100.0))
}

pub fn render_summary(rows: &[PairSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<36} {:>5} {:>10} {:>10} {:>10} {:>9} {:>9}  verdicts",
        "case", "k", "gen", "sat", "total", "clauses", "vars"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<36} {:>5} {:>10} {:>10} {:>10} {:>8.1}% {:>8.1}%  {}",
            r.case,
            r.k,
            pct(r.gen_speedup),
            pct(r.sat_speedup),
            pct(r.total_speedup),
            r.clause_reduction * 100.0,
            r.var_reduction * 100.0,
            if r.verdicts_agree { "agree" } else { "DIFFER" }
        );
    }
    out
}

pub fn write_csv<W: std::io::Write>(out: W, records: &[BenchRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<BenchRecord>, String> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_HEADER) {
        return Err(format!("unexpected header, want `{}`", CSV_HEADER.join(",")));
    }
    r.deserialize().collect::<csv::Result<_>>().map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(case: &str, k: usize, enc: &str, gen_s: f64, sat_s: f64, clauses: usize, verdict: &str) -> BenchRecord {
        BenchRecord {
            case: case.into(),
            variant: "de".into(),
            k,
            encoder: enc.into(),
            gen_s,
            sat_s,
            vars: 10,
            clauses,
            verdict: verdict.into(),
        }
    }

    #[test]
    fn speedup_formula() {
        assert_eq!(speedup(3.0, 1.0), Some(2.0));
        assert_eq!(speedup(1.0, 1.0), Some(0.0));
        assert_eq!(speedup(0.0, 0.0), Some(0.0));
        assert_eq!(speedup(1.0, 0.0), None);
    }

    #[test]
    fn pairs_need_both_encoders() {
        let rows = vec![
            rec("a", 10, "metric", 1.0, 2.0, 60, "UNSAT"),
            rec("a", 10, "nonmetric", 2.0, 2.0, 100, "UNSAT"),
            rec("a", 20, "metric", 1.0, 1.0, 60, "SAT"),
            rec("b", 10, "metric", 1.0, 1.0, 60, "SAT"),
            rec("b", 10, "nonmetric", 1.0, 1.0, 60, "ERROR"),
        ];
        let s = summarize(&rows);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].gen_speedup, Some(1.0));
        assert_eq!(s[0].sat_speedup, Some(0.0));
        assert!((s[0].clause_reduction - 0.4).abs() < 1e-12);
        assert!(s[0].verdicts_agree);
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            rec("trl:delta=10:property=p2", 30, "metric", 0.5, 0.25, 123, "UNSAT"),
            rec("shiftsync:d=3", 10, "nonmetric", 0.125, 0.0, 7, "SAT"),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
        assert_eq!(summarize(&back), summarize(&rows));
        assert!(read_csv("case,k\nx,1\n".as_bytes()).is_err());
    }
}
