//! Native constraints for the bounded operators.

use super::{Encoder, Mutation, NodeKind, VariableMap};
use crate::constraint::{Category, ConstraintSet, Expr};
use crate::formula::MetricOp;

/// Remainder in `[0, b)`.
pub fn modulo(a: i64, b: i64) -> i64 {
    assert!(b >= 1, "modulus must be positive");
    a.rem_euclid(b)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Shape {
    Exact,
    Some,
    All,
}

fn shape(op: MetricOp) -> Shape {
    use MetricOp::*;
    match op {
        EvEq | PastEvEq | DualPastEvEq => Shape::Exact,
        EvLe | PastEvLe | DualPastAlwLe => Shape::Some,
        AlwLe | PastAlwLe | DualPastEvLe => Shape::All,
        _ => unreachable!("sugar operator reached the encoder"),
    }
}

/// Value assumed before instant 0 in mono-infinite time.
fn mono_default(op: MetricOp) -> bool {
    matches!(
        op,
        MetricOp::DualPastEvEq | MetricOp::DualPastEvLe | MetricOp::DualPastAlwLe
    )
}

fn combine(s: Shape, items: Vec<Expr>) -> Expr {
    match s {
        Shape::Some => Expr::or(items),
        _ => Expr::and(items),
    }
}

impl VariableMap {
    /// Child value at `y` looking forward: formula variables inside the
    /// bound, MF beyond it.
    pub fn psi(&self, c: usize, y: i64) -> Expr {
        let k = self.k as i64;
        if y <= k {
            return self.fv(c, y);
        }
        match self.kinds[c] {
            NodeKind::True => self.loop_exists(),
            NodeKind::False => Expr::Const(false),
            _ => self.mf(c, (y - k - 1) as usize),
        }
    }

    /// Child value at `y` looking backward: MP before instant 0 in bi time,
    /// the operator default in mono time.
    pub fn chi(&self, c: usize, y: i64, default: bool) -> Expr {
        if y >= 0 {
            return self.fv(c, y);
        }
        if !self.is_bi() {
            return Expr::Const(default);
        }
        match self.kinds[c] {
            NodeKind::True => self.past_loop_exists(),
            NodeKind::False => Expr::Const(false),
            _ => self.mp(c, (-y - 1) as usize),
        }
    }
}

impl Encoder<'_> {
    fn metric_nodes(&self) -> Vec<(usize, MetricOp, i64, usize)> {
        let vm = self.vm;
        vm.kinds
            .iter()
            .enumerate()
            .filter_map(|(n, kind)| match kind {
                NodeKind::Metric(op, t) => Some((n, *op, *t as i64, vm.kid(n, 0))),
                _ => None,
            })
            .collect()
    }

    /// Loop-value variables. Written as one selector implication per loop
    /// position, which is equivalent to the disjunctive definition because at
    /// most one selector holds.
    pub fn emit_mf_mp(&self, cs: &mut ConstraintSet) {
        let vm = self.vm;
        let k = vm.k as i64;
        for c in 0..vm.kinds.len() {
            if let Some(bank) = vm.mf_bank(c) {
                for j in 0..bank.size {
                    let mf = vm.mf(c, j);
                    let row = match bank.mirror_of {
                        Some(pos) => Expr::iff(mf, Expr::and2(vm.loop_exists(), Expr::not(vm.mf(pos, j)))),
                        None => {
                            let mut parts: Vec<Expr> = (1..=k)
                                .map(|i| {
                                    let y = i + modulo(j as i64, k - i + 1);
                                    Expr::implies(vm.l(i as usize), Expr::iff(mf.clone(), vm.fv(c, y)))
                                })
                                .collect();
                            parts.push(Expr::implies(Expr::not(vm.loop_exists()), Expr::not(mf)));
                            Expr::and(parts)
                        }
                    };
                    cs.push(Category::MetricMfp, row);
                }
            }
            if let Some(bank) = vm.mp_bank(c) {
                for j in 0..bank.size {
                    let mp = vm.mp(c, j);
                    let row = match bank.mirror_of {
                        Some(pos) => Expr::iff(
                            mp,
                            Expr::and2(vm.past_loop_exists(), Expr::not(vm.mp(pos, j))),
                        ),
                        None => {
                            let mut parts: Vec<Expr> = (0..k)
                                .map(|i| {
                                    let y = i - modulo(j as i64, i + 1);
                                    Expr::implies(vm.lp(i as usize), Expr::iff(mp.clone(), vm.fv(c, y)))
                                })
                                .collect();
                            parts.push(Expr::implies(Expr::not(vm.past_loop_exists()), Expr::not(mp)));
                            Expr::and(parts)
                        }
                    };
                    cs.push(Category::MetricMfp, row);
                }
            }
        }
    }

    fn future_row(&self, n: usize, op: MetricOp, t: i64, c: usize, i: i64) -> Expr {
        let vm = self.vm;
        let s = shape(op);
        let rhs = match s {
            Shape::Exact => vm.psi(c, i + t),
            _ => {
                let start = match (op, self.opts.mutation) {
                    (MetricOp::EvLe, Some(Mutation::DropCurrentInstantEvLe)) => 1,
                    _ => 0,
                };
                combine(s, (start..=t).map(|j| vm.psi(c, i + j)).collect())
            }
        };
        self.guard_future(i, Expr::iff(vm.fv(n, i), rhs))
    }

    fn past_row(&self, n: usize, op: MetricOp, t: i64, c: usize, i: i64) -> Expr {
        let vm = self.vm;
        let d = mono_default(op);
        let rhs = match shape(op) {
            Shape::Exact => vm.chi(c, i - t, d),
            s => combine(s, (0..=t).map(|j| vm.chi(c, i - j, d)).collect()),
        };
        self.guard_past(i, Expr::iff(vm.fv(n, i), rhs))
    }

    /// Definitions of bounded operators at every instant of their range.
    /// In mono time the rows reaching before instant 0 are left to
    /// [`Encoder::emit_mono_defaults`].
    pub fn emit_metric_inbound(&self, cs: &mut ConstraintSet) {
        let vm = self.vm;
        let k = vm.k as i64;
        for (n, op, t, c) in self.metric_nodes() {
            if op.is_future() {
                for i in vm.lo()..=k {
                    cs.push(Category::MetricInbound, self.future_row(n, op, t, c, i));
                }
            } else {
                let from = if vm.is_bi() { 0 } else { t.min(k + 2) };
                for i in from..=k + 1 {
                    cs.push(Category::MetricInbound, self.past_row(n, op, t, c, i));
                }
            }
        }
    }

    /// Mono-infinite rows of past bounded operators whose window reaches
    /// before instant 0; out-of-domain instants take the operator default.
    pub fn emit_mono_defaults(&self, cs: &mut ConstraintSet) {
        let vm = self.vm;
        assert!(!vm.is_bi(), "mono-infinite only");
        let k = vm.k as i64;
        for (n, op, t, c) in self.metric_nodes() {
            if op.is_future() {
                continue;
            }
            for i in 0..t.min(k + 2) {
                cs.push(Category::MetricInbound, self.past_row(n, op, t, c, i));
            }
        }
    }

    /// Running disjunction (`some`) or conjunction of `value(0..=j)` as
    /// shared named intermediates; entry `j+1` covers `0..=j`, entry 0 is the
    /// empty prefix.
    fn prefixes(len: usize, some: bool, value: impl Fn(i64) -> Expr) -> Vec<Expr> {
        let mut out = Vec::with_capacity(len + 1);
        let mut acc = Expr::Const(!some);
        out.push(acc.clone());
        for j in 0..len as i64 {
            acc = if some {
                Expr::def(Expr::or2(acc, value(j)))
            } else {
                Expr::def(Expr::and2(acc, value(j)))
            };
            out.push(acc.clone());
        }
        out
    }

    /// Consistency of bounded operators with the loop they do not look
    /// into: future operators across the past loop (bi time) and past
    /// operators across the future loop.
    pub fn emit_metric_crossloop(&self, cs: &mut ConstraintSet) {
        let vm = self.vm;
        let k = vm.k as i64;
        for (_, op, t, c) in self.metric_nodes() {
            let s = shape(op);
            if op.is_future() {
                if !vm.is_bi() {
                    continue;
                }
                let pre = Self::prefixes(t.max(1) as usize - 1, s == Shape::Some, |y| vm.psi(c, y));
                for a in 0..k {
                    let body = match s {
                        Shape::Exact => Expr::and(
                            (1..=t)
                                .map(|m| Expr::iff(vm.psi(c, a + m), vm.fv(c, modulo(m - 1, a + 1))))
                                .collect(),
                        ),
                        _ => Expr::and(
                            (0..t)
                                .map(|j| {
                                    let settled = if s == Shape::Some {
                                        pre[j as usize].clone()
                                    } else {
                                        Expr::not(pre[j as usize].clone())
                                    };
                                    Expr::or2(settled, Expr::iff(vm.psi(c, j), vm.psi(c, a + 1 + j)))
                                })
                                .collect(),
                        ),
                    };
                    cs.push(
                        Category::MetricCrossloop,
                        Expr::implies(vm.lp(a as usize), body),
                    );
                }
            } else {
                let d = mono_default(op);
                let pre = Self::prefixes(t.max(1) as usize - 1, s == Shape::Some, |y| vm.chi(c, k - y, d));
                for b in 1..=k {
                    let body = match s {
                        Shape::Exact => Expr::and(
                            (1..=t)
                                .map(|m| Expr::iff(vm.chi(c, k + 1 - m, d), vm.chi(c, b - m, d)))
                                .collect(),
                        ),
                        _ => Expr::and(
                            (0..t)
                                .map(|j| {
                                    let settled = if s == Shape::Some {
                                        pre[j as usize].clone()
                                    } else {
                                        Expr::not(pre[j as usize].clone())
                                    };
                                    Expr::or2(
                                        settled,
                                        Expr::iff(vm.chi(c, k - j, d), vm.chi(c, b - 1 - j, d)),
                                    )
                                })
                                .collect(),
                        ),
                    };
                    cs.push(
                        Category::MetricCrossloop,
                        Expr::implies(vm.l(b as usize), body),
                    );
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::{EncodeOptions, VariableMap};
    use crate::formula::{self, Dag, Formula};
    use crate::{EncoderKind, TimeModel};

    fn vm_for(f: &Formula, k: usize, time: TimeModel) -> VariableMap {
        let pnf = formula::to_pnf(f);
        let atoms = pnf.atoms().into_iter().collect();
        VariableMap::allocate(Dag::build(&pnf), atoms, k, time)
    }

    #[test]
    fn modulo_is_nonnegative() {
        assert_eq!(modulo(-1, 3), 2);
        assert_eq!(modulo(7, 7), 0);
        assert_eq!(modulo(0, 5), 0);
        for a in -20..20 {
            for b in 1..6 {
                let r = modulo(a, b);
                assert!((0..b).contains(&r));
            }
        }
    }

    #[test]
    fn mf_row_selects_wrapped_instant() {
        let f = Formula::metric(MetricOp::EvEq, 3, Formula::atom("psi"));
        let vm = vm_for(&f, 20, TimeModel::Bi);
        let mut cs = ConstraintSet::new(vm.num_vars());
        Encoder::new(&vm, EncodeOptions::new(TimeModel::Bi, EncoderKind::Metric)).emit_mf_mp(&mut cs);
        let c = vm.kid(vm.root(), 0);
        let want = Expr::implies(vm.l(18), Expr::iff(vm.mf(c, 2), vm.fv(c, 20)));
        match &cs.constraints[2].expr {
            Expr::And(parts) => assert!(parts.contains(&want)),
            other => panic!("unexpected row {other}"),
        }
    }

    #[test]
    fn mp_row_selects_wrapped_instant() {
        let f = Formula::metric(MetricOp::PastEvEq, 3, Formula::atom("psi"));
        let vm = vm_for(&f, 10, TimeModel::Bi);
        let mut cs = ConstraintSet::new(vm.num_vars());
        Encoder::new(&vm, EncodeOptions::new(TimeModel::Bi, EncoderKind::Metric)).emit_mf_mp(&mut cs);
        let c = vm.kid(vm.root(), 0);
        let want = Expr::implies(vm.lp(7), Expr::iff(vm.mp(c, 2), vm.fv(c, 5)));
        match &cs.constraints[2].expr {
            Expr::And(parts) => assert!(parts.contains(&want)),
            other => panic!("unexpected row {other}"),
        }
    }

    #[test]
    fn inbound_rows() {
        let f = Formula::metric(MetricOp::EvEq, 3, Formula::atom("p"));
        let vm = vm_for(&f, 10, TimeModel::Bi);
        let enc = Encoder::new(&vm, EncodeOptions::new(TimeModel::Bi, EncoderKind::Metric));
        let (n, c) = (vm.root(), vm.kid(vm.root(), 0));
        assert_eq!(enc.future_row(n, MetricOp::EvEq, 3, c, 2), Expr::iff(vm.fv(n, 2), vm.fv(c, 5)));
        assert_eq!(enc.future_row(n, MetricOp::EvEq, 3, c, 9), Expr::iff(vm.fv(n, 9), vm.mf(c, 1)));

        let g = Formula::metric(MetricOp::EvLe, 2, Formula::atom("p"));
        let vm = vm_for(&g, 10, TimeModel::Bi);
        let enc = Encoder::new(&vm, EncodeOptions::new(TimeModel::Bi, EncoderKind::Metric));
        let (n, c) = (vm.root(), vm.kid(vm.root(), 0));
        assert_eq!(
            enc.future_row(n, MetricOp::EvLe, 2, c, 0),
            Expr::iff(vm.fv(n, 0), Expr::or(vec![vm.fv(c, 0), vm.fv(c, 1), vm.fv(c, 2)]))
        );
    }

    #[test]
    fn mono_past_rows_use_defaults() {
        let f = Formula::metric(MetricOp::PastEvEq, 3, Formula::atom("p"));
        let vm = vm_for(&f, 10, TimeModel::Mono);
        let enc = Encoder::new(&vm, EncodeOptions::new(TimeModel::Mono, EncoderKind::Metric));
        let (n, c) = (vm.root(), vm.kid(vm.root(), 0));
        assert_eq!(enc.past_row(n, MetricOp::PastEvEq, 3, c, 1), Expr::not(vm.fv(n, 1)));
        assert_eq!(enc.past_row(n, MetricOp::DualPastEvEq, 3, c, 1), vm.fv(n, 1));
        assert_eq!(
            enc.past_row(n, MetricOp::PastAlwLe, 2, c, 5),
            Expr::iff(vm.fv(n, 5), Expr::and(vec![vm.fv(c, 5), vm.fv(c, 4), vm.fv(c, 3)]))
        );
        assert_eq!(
            enc.past_row(n, MetricOp::DualPastAlwLe, 2, c, 5),
            Expr::iff(vm.fv(n, 5), Expr::or(vec![vm.fv(c, 5), vm.fv(c, 4), vm.fv(c, 3)]))
        );
        let mut cs = ConstraintSet::new(vm.num_vars());
        enc.emit_mono_defaults(&mut cs);
        assert_eq!(cs.len(), 3);
    }

    #[test]
    fn mono_crossloop_uses_defaults_before_zero() {
        let f = Formula::metric(MetricOp::PastEvEq, 3, Formula::atom("p"));
        let vm = vm_for(&f, 5, TimeModel::Mono);
        let mut cs = ConstraintSet::new(vm.num_vars());
        Encoder::new(&vm, EncodeOptions::new(TimeModel::Mono, EncoderKind::Metric)).emit_metric_crossloop(&mut cs);
        assert_eq!(cs.len(), 5);
        let c = vm.kid(vm.root(), 0);
        let row = &cs.constraints[0].expr;
        let want = Expr::implies(
            vm.l(1),
            Expr::and(vec![
                Expr::iff(vm.fv(c, 5), vm.fv(c, 0)),
                Expr::not(vm.fv(c, 4)),
                Expr::not(vm.fv(c, 3)),
            ]),
        );
        assert_eq!(row, &want);
    }
}
