//! Seeded random formulas for differential and property testing.

use crate::formula::{BinOp, Formula, MetricOp, UnOp};
use rand::Rng;

#[derive(Clone, Debug)]
pub struct RandomConfig {
    pub max_depth: usize,
    pub max_const: u32,
    pub atoms: usize,
    pub metric: bool,
    pub past: bool,
}

impl Default for RandomConfig {
    fn default() -> Self {
        RandomConfig {
            max_depth: 4,
            max_const: 6,
            atoms: 3,
            metric: true,
            past: true,
        }
    }
}

const ATOM_NAMES: [&str; 6] = ["p", "q", "r", "s", "u", "v"];

fn is_past_un(op: UnOp) -> bool {
    matches!(
        op,
        UnOp::Yesterday | UnOp::WeakYesterday | UnOp::PastEv | UnOp::PastAlw | UnOp::AlwT | UnOp::SomT
    )
}

pub fn random_formula<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomConfig) -> Formula {
    gen(rng, cfg, cfg.max_depth)
}

fn gen<R: Rng + ?Sized>(rng: &mut R, cfg: &RandomConfig, depth: usize) -> Formula {
    let atoms = cfg.atoms.clamp(1, ATOM_NAMES.len());
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..20) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(ATOM_NAMES[rng.random_range(0..atoms)]),
        };
    }
    let metric_weight = if cfg.metric { 3 } else { 0 };
    let pick = rng.random_range(0..(4 + 4 + metric_weight));
    if pick < 4 {
        let ops: Vec<UnOp> = UnOp::ALL
            .into_iter()
            .filter(|op| cfg.past || !is_past_un(*op))
            .collect();
        let op = ops[rng.random_range(0..ops.len())];
        Formula::un(op, gen(rng, cfg, depth - 1))
    } else if pick < 8 {
        let ops: Vec<BinOp> = BinOp::ALL
            .into_iter()
            .filter(|op| cfg.past || !matches!(op, BinOp::Since | BinOp::Trigger))
            .collect();
        let op = ops[rng.random_range(0..ops.len())];
        Formula::bin(op, gen(rng, cfg, depth - 1), gen(rng, cfg, depth - 1))
    } else {
        let ops: Vec<MetricOp> = MetricOp::ALL
            .into_iter()
            .filter(|op| cfg.past || op.is_future())
            .collect();
        let op = ops[rng.random_range(0..ops.len())];
        let t = rng.random_range(0..=cfg.max_const);
        Formula::metric(op, t, gen(rng, cfg, depth - 1))
    }
}

/// Single-step simplifications of `f`: a subformula replaced by a child or a
/// constant, or a metric constant decreased.
pub fn shrink_candidates(f: &Formula) -> Vec<Formula> {
    let mut out: Vec<Formula> = f.children().into_iter().cloned().collect();
    if !matches!(f, Formula::True | Formula::False) {
        out.push(Formula::True);
        out.push(Formula::False);
    }
    match f {
        Formula::Un(op, a) => {
            for s in shrink_candidates(a) {
                out.push(Formula::un(*op, s));
            }
        }
        Formula::Bin(op, a, b) => {
            for s in shrink_candidates(a) {
                out.push(Formula::bin(*op, s, (**b).clone()));
            }
            for s in shrink_candidates(b) {
                out.push(Formula::bin(*op, (**a).clone(), s));
            }
        }
        Formula::Metric(op, t, a) => {
            if *t > 0 {
                out.push(Formula::metric(*op, t - 1, (**a).clone()));
            }
            for s in shrink_candidates(a) {
                out.push(Formula::metric(*op, *t, s));
            }
        }
        _ => {}
    }
    out
}

/// Greedy minimization preserving `keep`.
pub fn minimize(f: &Formula, keep: impl Fn(&Formula) -> bool) -> Formula {
    let mut cur = f.clone();
    'outer: loop {
        for c in shrink_candidates(&cur) {
            if c.size() < cur.size() || (c.size() == cur.size() && c < cur) {
                if keep(&c) {
                    cur = c;
                    continue 'outer;
                }
            }
        }
        return cur;
    }
}
