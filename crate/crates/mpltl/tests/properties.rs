use mpltl::cnf::clausify;
use mpltl::constraint::{Category, ConstraintSet, Expr};
use mpltl::formula::{self, Atom};
use mpltl::oracle::eval_on_lasso;
use mpltl::parser::parse_formula;
use mpltl::random::{random_formula, RandomConfig};
use mpltl::sat::{solve, Backend, Outcome};
use mpltl::trace::LassoTrace;
use mpltl::TimeModel;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn formula_from(seed: u64) -> formula::Formula {
    random_formula(&mut ChaCha8Rng::seed_from_u64(seed), &RandomConfig::default())
}

/// A lasso closed on both sides (in bi time), or `None` when the random
/// choice cannot satisfy both loop equalities.
fn closed_lasso(seed: u64, time: TimeModel) -> Option<LassoTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=6);
    let alphabet: Vec<Atom> = ["p", "q", "r"].iter().map(|a| Atom::new(a)).collect();
    let mut states: Vec<Vec<bool>> = (0..=k).map(|_| (0..3).map(|_| rng.random_bool(0.5)).collect()).collect();
    let lf = rng.random_range(1..=k);
    let lp = (time == TimeModel::Bi).then(|| rng.random_range(0..k));
    states[k] = states[lf - 1].clone();
    if let Some(lp) = lp {
        states[0] = states[lp + 1].clone();
    }
    LassoTrace::new(time, alphabet, states, Some(lf), lp).ok()
}

fn random_expr(rng: &mut ChaCha8Rng, vars: i32, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.3) {
        return match rng.random_range(0..12) {
            0 => Expr::Const(rng.random_bool(0.5)),
            _ => {
                let v = rng.random_range(1..=vars);
                Expr::lit(if rng.random_bool(0.5) { v } else { -v })
            }
        };
    }
    let kid = |rng: &mut ChaCha8Rng| random_expr(rng, vars, depth - 1);
    match rng.random_range(0..6) {
        0 => Expr::not(kid(rng)),
        1 => Expr::and((0..rng.random_range(2..4)).map(|_| kid(rng)).collect()),
        2 => Expr::or((0..rng.random_range(2..4)).map(|_| kid(rng)).collect()),
        3 => Expr::iff(kid(rng), kid(rng)),
        4 => Expr::implies(kid(rng), kid(rng)),
        _ => Expr::def(kid(rng)),
    }
}

fn brute_force_sat(vars: u32, holds: impl Fn(&dyn Fn(u32) -> bool) -> bool) -> bool {
    (0..1u32 << vars).any(|bits| holds(&|v: u32| bits >> (v - 1) & 1 == 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_round_trip(seed in any::<u64>()) {
        let f = formula_from(seed);
        let back = parse_formula(&f.to_string()).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn pnf_and_tau_preserve_meaning(seed in any::<u64>(), bi in any::<bool>()) {
        let time = if bi { TimeModel::Bi } else { TimeModel::Mono };
        let f = formula_from(seed);
        let Some(t) = closed_lasso(seed.rotate_left(17), time) else { return Ok(()) };
        let pnf = formula::to_pnf(&f);
        let tau = formula::tau_expand(&pnf);
        prop_assert!(pnf.is_pnf());
        for i in 0..=t.k() as i64 {
            let want = eval_on_lasso(&f, &t, i);
            prop_assert_eq!(eval_on_lasso(&pnf, &t, i), want, "pnf {} at {}", pnf, i);
            prop_assert_eq!(eval_on_lasso(&tau, &t, i), want, "tau {} at {}", tau, i);
        }
    }

    /// Far from the origin the word repeats with the loop period, and so do
    /// formula values.
    #[test]
    fn oracle_is_eventually_periodic(seed in any::<u64>(), bi in any::<bool>()) {
        let time = if bi { TimeModel::Bi } else { TimeModel::Mono };
        let f = formula_from(seed);
        let Some(t) = closed_lasso(seed ^ 0x5eed, time) else { return Ok(()) };
        let far = 40;
        let period = (t.k() + 1 - t.loop_start.unwrap()) as i64;
        for i in 0..period {
            let a = i + far * period;
            prop_assert_eq!(eval_on_lasso(&f, &t, a), eval_on_lasso(&f, &t, a + period));
        }
        if let Some(lp) = t.past_loop {
            let back = lp as i64 + 1;
            for i in 0..back {
                let a = i - far * back;
                prop_assert_eq!(eval_on_lasso(&f, &t, a), eval_on_lasso(&f, &t, a - back));
            }
        }
    }

    /// Future-only formulas are periodic from the loop start on.
    #[test]
    fn future_formulas_periodic_from_loop(seed in any::<u64>()) {
        let cfg = RandomConfig { past: false, ..RandomConfig::default() };
        let f = random_formula(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
        let Some(t) = closed_lasso(seed ^ 0xfeed, TimeModel::Mono) else { return Ok(()) };
        let lf = t.loop_start.unwrap() as i64;
        let period = t.k() as i64 + 1 - lf;
        for i in lf..=t.k() as i64 {
            prop_assert_eq!(eval_on_lasso(&f, &t, i), eval_on_lasso(&f, &t, i + period));
        }
    }

    #[test]
    fn clausify_is_equisatisfiable(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = rng.random_range(1..=12u32);
        let mut cs = ConstraintSet::new(vars);
        for _ in 0..rng.random_range(1..=4) {
            let e = random_expr(&mut rng, vars as i32, 4);
            cs.push(Category::Prop, e);
        }
        let want = brute_force_sat(vars, |a| cs.constraints.iter().all(|c| c.expr.eval(a)));
        let cnf = clausify(&cs);
        match solve(&cnf, &Backend::Embedded, None).unwrap() {
            Outcome::Sat(model) => {
                prop_assert!(want);
                // the model restricted to the original variables satisfies the set
                prop_assert!(cs.constraints.iter().all(|c| c.expr.eval(&|v| model[v as usize])));
            }
            Outcome::Unsat => prop_assert!(!want),
        }
    }

    #[test]
    fn solver_matches_truth_table(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = rng.random_range(1..=12u32);
        let clauses: Vec<Vec<i32>> = (0..rng.random_range(0..=40))
            .map(|_| {
                (0..rng.random_range(1..=3))
                    .map(|_| {
                        let v = rng.random_range(1..=vars) as i32;
                        if rng.random_bool(0.5) { v } else { -v }
                    })
                    .collect()
            })
            .collect();
        let cnf = mpltl::cnf::Cnf { num_vars: vars, clauses: clauses.clone(), ..Default::default() };
        let want = brute_force_sat(vars, |a| {
            clauses.iter().all(|c| c.iter().any(|&l| a(l.unsigned_abs()) == (l > 0)))
        });
        let got = matches!(solve(&cnf, &Backend::Embedded, None).unwrap(), Outcome::Sat(_));
        prop_assert_eq!(got, want);
    }
}
