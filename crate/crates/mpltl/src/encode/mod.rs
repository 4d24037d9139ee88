//! Variable allocation and the core (nonmetric) constraint system.

mod metric;

use crate::constraint::{Category, ConstraintSet, Expr, Lit};
use crate::formula::{self, Atom, BinOp, Dag, Formula, MetricOp, UnOp};
use crate::{EncoderKind, TimeModel};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    True,
    False,
    Atom(usize),
    NegAtom(usize),
    And,
    Or,
    Next,
    Until,
    Release,
    Yesterday,
    WeakYesterday,
    Since,
    Trigger,
    Metric(MetricOp, u32),
}

impl NodeKind {
    fn of(f: &Formula, alphabet: &[Atom]) -> NodeKind {
        let atom_index = |a: &Atom| alphabet.binary_search(a).expect("atom missing from alphabet");
        match f {
            Formula::True => NodeKind::True,
            Formula::False => NodeKind::False,
            Formula::Atom(a) => NodeKind::Atom(atom_index(a)),
            Formula::Un(UnOp::Not, a) => match &**a {
                Formula::Atom(x) => NodeKind::NegAtom(atom_index(x)),
                _ => panic!("formula is not in positive normal form: {f}"),
            },
            Formula::Un(UnOp::Next, _) => NodeKind::Next,
            Formula::Un(UnOp::Yesterday, _) => NodeKind::Yesterday,
            Formula::Un(UnOp::WeakYesterday, _) => NodeKind::WeakYesterday,
            Formula::Bin(BinOp::And, ..) => NodeKind::And,
            Formula::Bin(BinOp::Or, ..) => NodeKind::Or,
            Formula::Bin(BinOp::Until, ..) => NodeKind::Until,
            Formula::Bin(BinOp::Release, ..) => NodeKind::Release,
            Formula::Bin(BinOp::Since, ..) => NodeKind::Since,
            Formula::Bin(BinOp::Trigger, ..) => NodeKind::Trigger,
            Formula::Metric(op, t, _) if op.is_core() && *t > 0 => NodeKind::Metric(*op, *t),
            _ => panic!("formula is not in core positive normal form: {f}"),
        }
    }

    pub fn is_constant(self) -> bool {
        matches!(self, NodeKind::True | NodeKind::False)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bank {
    pub base: u32,
    pub size: usize,
    /// Bank of the positive atom when this child is its negation.
    pub mirror_of: Option<usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VarCounts {
    pub state: u32,
    pub loops: u32,
    pub formula: u32,
    pub eventuality: u32,
    pub mf: u32,
    pub mp: u32,
}

impl VarCounts {
    pub fn total(&self) -> u32 {
        self.state + self.loops + self.formula + self.eventuality + self.mf + self.mp
    }
}

#[derive(Clone, Copy, Debug)]
struct PastLoop {
    l_base: u32,
    inloop_base: u32,
    exists: u32,
}

/// Allocation of every encoding variable for one closure and bound.
#[derive(Clone, Debug)]
pub struct VariableMap {
    pub k: usize,
    pub time: TimeModel,
    pub alphabet: Vec<Atom>,
    pub dag: Dag,
    pub kinds: Vec<NodeKind>,
    state_base: u32,
    l_base: u32,
    inloop_base: u32,
    loop_exists: u32,
    past: Option<PastLoop>,
    fv: Vec<Option<u32>>,
    ev: Vec<Option<u32>>,
    mf: Vec<Option<Bank>>,
    mp: Vec<Option<Bank>>,
    counts: VarCounts,
    num_vars: u32,
}

impl VariableMap {
    /// `alphabet` must be sorted and contain every atom of the closure.
    pub fn allocate(dag: Dag, alphabet: Vec<Atom>, k: usize, time: TimeModel) -> VariableMap {
        assert!(k >= 1, "bound must be at least 1");
        let kinds: Vec<NodeKind> = dag
            .nodes
            .iter()
            .map(|n| NodeKind::of(&n.formula, &alphabet))
            .collect();
        let n = kinds.len();
        let bi = time == TimeModel::Bi;
        let mut next = 1u32;
        let mut take = |count: usize| {
            let base = next;
            next += count as u32;
            base
        };
        let mut counts = VarCounts::default();
        let width = k + 1;

        let state_base = take(alphabet.len() * width);
        counts.state = (alphabet.len() * width) as u32;

        let l_base = take(width);
        let inloop_base = take(width);
        let loop_exists = take(1);
        counts.loops = 2 * width as u32 + 1;
        let past = if bi {
            let p = PastLoop {
                l_base: take(width),
                inloop_base: take(width),
                exists: take(1),
            };
            counts.loops += 2 * width as u32 + 1;
            Some(p)
        } else {
            None
        };

        let span = if bi { k + 3 } else { k + 2 };
        let fv = kinds
            .iter()
            .map(|kind| {
                if kind.is_constant() {
                    None
                } else {
                    counts.formula += span as u32;
                    Some(take(span))
                }
            })
            .collect();

        let ev = kinds
            .iter()
            .map(|kind| {
                let needs = match kind {
                    NodeKind::Until | NodeKind::Release => true,
                    NodeKind::Since | NodeKind::Trigger => bi,
                    _ => false,
                };
                needs.then(|| {
                    counts.eventuality += (k + 2) as u32;
                    take(k + 2)
                })
            })
            .collect();

        let mut mf_size = vec![0usize; n];
        let mut mp_size = vec![0usize; n];
        for (i, kind) in kinds.iter().enumerate() {
            if let NodeKind::Metric(op, t) = kind {
                let c = dag.nodes[i].kids[0];
                if kinds[c].is_constant() {
                    continue;
                }
                if op.is_future() {
                    mf_size[c] = mf_size[c].max(*t as usize);
                } else if bi {
                    mp_size[c] = mp_size[c].max(*t as usize);
                }
            }
        }
        let mirrors = mirror_pairs(&kinds);
        let mut alloc_banks = |sizes: &mut Vec<usize>, count: &mut u32| -> Vec<Option<Bank>> {
            let mut mirror = vec![None; n];
            for &(pos, neg) in &mirrors {
                if sizes[pos] > 0 && sizes[neg] > 0 {
                    let s = sizes[pos].max(sizes[neg]);
                    sizes[pos] = s;
                    sizes[neg] = s;
                    mirror[neg] = Some(pos);
                }
            }
            (0..n)
                .map(|c| {
                    (sizes[c] > 0).then(|| {
                        *count += sizes[c] as u32;
                        Bank {
                            base: take(sizes[c]),
                            size: sizes[c],
                            mirror_of: mirror[c],
                        }
                    })
                })
                .collect()
        };
        let mf = alloc_banks(&mut mf_size, &mut counts.mf);
        let mp = alloc_banks(&mut mp_size, &mut counts.mp);

        VariableMap {
            k,
            time,
            alphabet,
            dag,
            kinds,
            state_base,
            l_base,
            inloop_base,
            loop_exists,
            past,
            fv,
            ev,
            mf,
            mp,
            counts,
            num_vars: next - 1,
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn counts(&self) -> VarCounts {
        self.counts
    }

    pub fn is_bi(&self) -> bool {
        self.time == TimeModel::Bi
    }

    /// Lowest instant carrying formula variables.
    pub fn lo(&self) -> i64 {
        if self.is_bi() {
            -1
        } else {
            0
        }
    }

    pub fn kid(&self, node: usize, which: usize) -> usize {
        self.dag.nodes[node].kids[which]
    }

    pub fn root(&self) -> usize {
        self.dag.root
    }

    pub fn state_var(&self, atom: usize, i: usize) -> u32 {
        assert!(i <= self.k);
        self.state_base + (atom * (self.k + 1) + i) as u32
    }

    pub fn loop_var(&self, i: usize) -> u32 {
        self.l_base + i as u32
    }

    pub fn inloop_var(&self, i: usize) -> u32 {
        self.inloop_base + i as u32
    }

    pub fn loop_exists_var(&self) -> u32 {
        self.loop_exists
    }

    pub fn past_loop_var(&self, i: usize) -> Option<u32> {
        self.past.map(|p| p.l_base + i as u32)
    }

    pub fn past_inloop_var(&self, i: usize) -> Option<u32> {
        self.past.map(|p| p.inloop_base + i as u32)
    }

    pub fn past_loop_exists_var(&self) -> Option<u32> {
        self.past.map(|p| p.exists)
    }

    /// Formula variable of `node` at instant `i`, if the node is not a constant.
    pub fn fv_var(&self, node: usize, i: i64) -> Option<u32> {
        let lo = self.lo();
        assert!(i >= lo && i <= self.k as i64 + 1, "instant {i} out of range");
        self.fv[node].map(|b| b + (i - lo) as u32)
    }

    pub fn fv_count(&self, node: usize) -> u32 {
        if self.fv[node].is_some() {
            (self.k as i64 + 2 - self.lo()) as u32
        } else {
            0
        }
    }

    pub fn ev_var(&self, node: usize, i: usize) -> Option<u32> {
        assert!(i <= self.k + 1);
        self.ev[node].map(|b| b + i as u32)
    }

    pub fn mf_bank(&self, node: usize) -> Option<Bank> {
        self.mf[node]
    }

    pub fn mp_bank(&self, node: usize) -> Option<Bank> {
        self.mp[node]
    }

    fn lit(v: u32) -> Expr {
        Expr::lit(v as Lit)
    }

    pub fn loop_exists(&self) -> Expr {
        Self::lit(self.loop_exists)
    }

    pub fn past_loop_exists(&self) -> Expr {
        Self::lit(self.past.expect("bi-infinite only").exists)
    }

    pub fn l(&self, i: usize) -> Expr {
        Self::lit(self.loop_var(i))
    }

    pub fn lp(&self, i: usize) -> Expr {
        Self::lit(self.past_loop_var(i).expect("bi-infinite only"))
    }

    pub fn state(&self, atom: usize, i: usize) -> Expr {
        Self::lit(self.state_var(atom, i))
    }

    /// Value of `node` at `i`; constants are true inside the bound and follow
    /// loop existence at the virtual instants.
    pub fn fv(&self, node: usize, i: i64) -> Expr {
        match self.kinds[node] {
            NodeKind::False => Expr::Const(false),
            NodeKind::True => {
                if i > self.k as i64 {
                    self.loop_exists()
                } else if i < 0 {
                    self.past_loop_exists()
                } else {
                    Expr::Const(true)
                }
            }
            _ => Self::lit(self.fv_var(node, i).unwrap()),
        }
    }

    pub fn ev(&self, node: usize, i: usize) -> Expr {
        Self::lit(self.ev_var(node, i).expect("no eventuality variables for node"))
    }

    pub fn mf(&self, node: usize, j: usize) -> Expr {
        let b = self.mf[node].expect("no MF bank");
        assert!(j < b.size, "MF index {j} beyond bank size {}", b.size);
        Self::lit(b.base + j as u32)
    }

    pub fn mp(&self, node: usize, j: usize) -> Expr {
        let b = self.mp[node].expect("no MP bank");
        assert!(j < b.size, "MP index {j} beyond bank size {}", b.size);
        Self::lit(b.base + j as u32)
    }

    pub fn state_eq(&self, a: usize, b: usize) -> Expr {
        Expr::and(
            (0..self.alphabet.len())
                .map(|p| Expr::iff(self.state(p, a), self.state(p, b)))
                .collect(),
        )
    }

    /// Human-readable name of a variable.
    pub fn label(&self, v: u32) -> String {
        let k = self.k as u32;
        let w = k + 1;
        if v >= self.state_base && v < self.state_base + self.alphabet.len() as u32 * w {
            let off = v - self.state_base;
            return format!("{}_{}", self.alphabet[(off / w) as usize], off % w);
        }
        if v >= self.l_base && v < self.l_base + w {
            return format!("l_{}", v - self.l_base);
        }
        if v >= self.inloop_base && v < self.inloop_base + w {
            return format!("InLoop_{}", v - self.inloop_base);
        }
        if v == self.loop_exists {
            return "LoopExists".into();
        }
        if let Some(p) = self.past {
            if v >= p.l_base && v < p.l_base + w {
                return format!("l'_{}", v - p.l_base);
            }
            if v >= p.inloop_base && v < p.inloop_base + w {
                return format!("InLoop'_{}", v - p.inloop_base);
            }
            if v == p.exists {
                return "LoopExists'".into();
            }
        }
        for (n, base) in self.fv.iter().enumerate() {
            if let Some(b) = base {
                let span = self.fv_count(n);
                if v >= *b && v < b + span {
                    let i = (v - b) as i64 + self.lo();
                    return format!("[{}]_{}", self.dag.nodes[n].formula, i);
                }
            }
        }
        for (n, base) in self.ev.iter().enumerate() {
            if let Some(b) = base {
                if v >= *b && v < b + k + 2 {
                    return format!("EV[{}]_{}", self.dag.nodes[n].formula, v - b);
                }
            }
        }
        for (name, banks) in [("MF", &self.mf), ("MP", &self.mp)] {
            for (n, bank) in banks.iter().enumerate() {
                if let Some(b) = bank {
                    if v >= b.base && v < b.base + b.size as u32 {
                        return format!("{name}({},{})", self.dag.nodes[n].formula, v - b.base);
                    }
                }
            }
        }
        format!("v{v}")
    }
}

fn mirror_pairs(kinds: &[NodeKind]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (neg, kind) in kinds.iter().enumerate() {
        if let NodeKind::NegAtom(a) = kind {
            if let Some(pos) = kinds.iter().position(|x| *x == NodeKind::Atom(*a)) {
                out.push((pos, neg));
            }
        }
    }
    out
}

/// Deliberate encoder faults, used to check that differential testing bites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mutation {
    /// Omit the current-instant term of bounded eventually.
    DropCurrentInstantEvLe,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodeOptions {
    pub time: TimeModel,
    pub encoder: EncoderKind,
    pub mutation: Option<Mutation>,
}

impl EncodeOptions {
    pub fn new(time: TimeModel, encoder: EncoderKind) -> EncodeOptions {
        EncodeOptions {
            time,
            encoder,
            mutation: None,
        }
    }
}

/// Result of encoding one formula at one bound.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub formula: Formula,
    pub vm: VariableMap,
    pub constraints: ConstraintSet,
}

/// Normalizes `f` (PNF, plus unrolling for the nonmetric encoder) and encodes it.
pub fn encode(f: &Formula, extra_atoms: &[Atom], k: usize, opts: EncodeOptions) -> Encoding {
    let pnf = formula::to_pnf(f);
    let normalized = match opts.encoder {
        EncoderKind::Metric => pnf,
        EncoderKind::Nonmetric => formula::tau_expand(&pnf),
    };
    let mut alphabet: BTreeSet<Atom> = normalized.atoms();
    alphabet.extend(extra_atoms.iter().cloned());
    let dag = Dag::build(&normalized);
    let vm = VariableMap::allocate(dag, alphabet.into_iter().collect(), k, opts.time);
    let constraints = Encoder::new(&vm, opts).encode_all();
    Encoding {
        formula: normalized,
        vm,
        constraints,
    }
}

/// Emits constraint groups over an allocated variable map.
pub struct Encoder<'a> {
    vm: &'a VariableMap,
    opts: EncodeOptions,
}

impl<'a> Encoder<'a> {
    pub fn new(vm: &'a VariableMap, opts: EncodeOptions) -> Encoder<'a> {
        Encoder { vm, opts }
    }

    fn k(&self) -> i64 {
        self.vm.k as i64
    }

    pub fn encode_all(&self) -> ConstraintSet {
        let mut cs = ConstraintSet::new(self.vm.num_vars());
        let c = self.vm.counts();
        cs.pools = [
            ("state", c.state),
            ("loop", c.loops),
            ("formula", c.formula),
            ("eventuality", c.eventuality),
            ("mf", c.mf),
            ("mp", c.mp),
        ]
        .iter()
        .map(|(n, v)| (n.to_string(), *v))
        .collect();
        self.emit_prop(&mut cs);
        self.emit_temporal(&mut cs);
        self.emit_loop(&mut cs);
        self.emit_eventualities(&mut cs);
        self.emit_boundary(&mut cs);
        self.emit_mf_mp(&mut cs);
        self.emit_metric_inbound(&mut cs);
        if !self.vm.is_bi() {
            self.emit_mono_defaults(&mut cs);
        }
        self.emit_metric_crossloop(&mut cs);
        cs.push(Category::Root, self.vm.fv(self.vm.root(), 0));
        cs
    }

    /// Future rows at instant −1 only matter when a past loop exists.
    fn guard_future(&self, i: i64, e: Expr) -> Expr {
        if i < 0 {
            Expr::implies(self.vm.past_loop_exists(), e)
        } else {
            e
        }
    }

    /// Past rows at instant k+1 only matter when a future loop exists.
    fn guard_past(&self, i: i64, e: Expr) -> Expr {
        if i > self.k() {
            Expr::implies(self.vm.loop_exists(), e)
        } else {
            e
        }
    }

    pub fn emit_prop(&self, cs: &mut ConstraintSet) {
        let vm = self.vm;
        for (n, kind) in vm.kinds.iter().enumerate() {
            for i in 0..=vm.k {
                let ii = i as i64;
                let rhs = match kind {
                    NodeKind::Atom(a) => vm.state(*a, i),
                    NodeKind::NegAtom(a) => Expr::not(vm.state(*a, i)),
                    NodeKind::And => Expr::and2(vm.fv(vm.kid(n, 0), ii), vm.fv(vm.kid(n, 1), ii)),
                    NodeKind::Or => Expr::or2(vm.fv(vm.kid(n, 0), ii), vm.fv(vm.kid(n, 1), ii)),
                    _ => continue,
                };
                cs.push(Category::Prop, Expr::iff(vm.fv(n, ii), rhs));
            }
        }
    }

    pub fn emit_temporal(&self, cs: &mut ConstraintSet) {
        let vm = self.vm;
        let k = self.k();
        let flo = vm.lo();
        let plo = if vm.is_bi() { 0 } else { 1 };
        for (n, kind) in vm.kinds.iter().enumerate() {
            let here = |i: i64| vm.fv(n, i);
            let a = |i: i64| vm.fv(vm.kid(n, 0), i);
            let b = |i: i64| vm.fv(vm.kid(n, 1), i);
            match kind {
                NodeKind::Next => {
                    for i in flo..=k {
                        cs.push(Category::Temporal, self.guard_future(i, Expr::iff(here(i), a(i + 1))));
                    }
                }
                NodeKind::Until | NodeKind::Release => {
                    for i in flo..=k {
                        let rhs = if *kind == NodeKind::Until {
                            Expr::or2(b(i), Expr::and2(a(i), here(i + 1)))
                        } else {
                            Expr::and2(b(i), Expr::or2(a(i), here(i + 1)))
                        };
                        cs.push(Category::Temporal, self.guard_future(i, Expr::iff(here(i), rhs)));
                    }
                }
                NodeKind::Yesterday | NodeKind::WeakYesterday => {
                    for i in plo..=k + 1 {
                        cs.push(Category::Temporal, self.guard_past(i, Expr::iff(here(i), a(i - 1))));
                    }
                }
                NodeKind::Since | NodeKind::Trigger => {
                    for i in plo..=k + 1 {
                        let rhs = if *kind == NodeKind::Since {
                            Expr::or2(b(i), Expr::and2(a(i), here(i - 1)))
                        } else {
                            Expr::and2(b(i), Expr::or2(a(i), here(i - 1)))
                        };
                        cs.push(Category::Temporal, self.guard_past(i, Expr::iff(here(i), rhs)));
                    }
                }
                _ => {}
            }
        }
    }

    pub fn emit_loop(&self, cs: &mut ConstraintSet) {
        let vm = self.vm;
        let k = vm.k;
        let inl = |i: usize| VariableMap::lit(vm.inloop_var(i));
        cs.push(
            Category::Loop,
            Expr::and2(Expr::not(vm.l(0)), Expr::not(inl(0))),
        );
        for i in 1..=k {
            cs.push(Category::Loop, Expr::implies(vm.l(i), vm.state_eq(i - 1, k)));
            cs.push(Category::Loop, Expr::iff(inl(i), Expr::or2(inl(i - 1), vm.l(i))));
            cs.push(Category::Loop, Expr::implies(inl(i - 1), Expr::not(vm.l(i))));
        }
        cs.push(Category::Loop, Expr::iff(vm.loop_exists(), inl(k)));
        if vm.is_bi() {
            let pinl = |i: usize| VariableMap::lit(vm.past_inloop_var(i).unwrap());
            cs.push(
                Category::Loop,
                Expr::and2(Expr::not(vm.lp(k)), Expr::not(pinl(k))),
            );
            for i in 0..k {
                cs.push(Category::Loop, Expr::implies(vm.lp(i), vm.state_eq(i + 1, 0)));
                cs.push(Category::Loop, Expr::iff(pinl(i), Expr::or2(pinl(i + 1), vm.lp(i))));
                cs.push(Category::Loop, Expr::implies(pinl(i + 1), Expr::not(vm.lp(i))));
            }
            cs.push(Category::Loop, Expr::iff(vm.past_loop_exists(), pinl(0)));
        }
    }

    pub fn emit_eventualities(&self, cs: &mut ConstraintSet) {
        let vm = self.vm;
        let k = vm.k;
        let kk = k as i64;
        let inl = |i: usize| VariableMap::lit(vm.inloop_var(i));
        for (n, kind) in vm.kinds.iter().enumerate() {
            let b = |i: usize| vm.fv(vm.kid(n, 1), i as i64);
            let ev = |i: usize| vm.ev(n, i);
            match kind {
                NodeKind::Until => {
                    cs.push(
                        Category::Eventuality,
                        Expr::and2(
                            Expr::not(ev(0)),
                            Expr::implies(vm.loop_exists(), Expr::implies(vm.fv(n, kk), ev(k))),
                        ),
                    );
                    for i in 1..=k {
                        cs.push(
                            Category::Eventuality,
                            Expr::iff(ev(i), Expr::or2(ev(i - 1), Expr::and2(inl(i), b(i)))),
                        );
                    }
                }
                NodeKind::Release => {
                    cs.push(
                        Category::Eventuality,
                        Expr::and2(
                            ev(0),
                            Expr::implies(vm.loop_exists(), Expr::implies(ev(k), vm.fv(n, kk))),
                        ),
                    );
                    for i in 1..=k {
                        cs.push(
                            Category::Eventuality,
                            Expr::iff(ev(i), Expr::and2(ev(i - 1), Expr::or2(Expr::not(inl(i)), b(i)))),
                        );
                    }
                }
                NodeKind::Since | NodeKind::Trigger if vm.is_bi() => {
                    let pinl = |i: usize| VariableMap::lit(vm.past_inloop_var(i).unwrap());
                    if *kind == NodeKind::Since {
                        cs.push(
                            Category::Eventuality,
                            Expr::and2(
                                Expr::not(ev(k)),
                                Expr::implies(vm.past_loop_exists(), Expr::implies(vm.fv(n, 0), ev(0))),
                            ),
                        );
                        for i in 0..k {
                            cs.push(
                                Category::Eventuality,
                                Expr::iff(ev(i), Expr::or2(ev(i + 1), Expr::and2(pinl(i), b(i)))),
                            );
                        }
                    } else {
                        cs.push(
                            Category::Eventuality,
                            Expr::and2(
                                ev(k),
                                Expr::implies(vm.past_loop_exists(), Expr::implies(ev(0), vm.fv(n, 0))),
                            ),
                        );
                        for i in 0..k {
                            cs.push(
                                Category::Eventuality,
                                Expr::iff(
                                    ev(i),
                                    Expr::and2(ev(i + 1), Expr::or2(Expr::not(pinl(i)), b(i))),
                                ),
                            );
                        }
                    }
                }
                _ => {}
            }
        }
    }

    pub fn emit_boundary(&self, cs: &mut ConstraintSet) {
        let vm = self.vm;
        let k = vm.k;
        let kk = k as i64;
        for (n, kind) in vm.kinds.iter().enumerate() {
            if kind.is_constant() {
                continue;
            }
            cs.push(
                Category::Last,
                Expr::implies(Expr::not(vm.loop_exists()), Expr::not(vm.fv(n, kk + 1))),
            );
            for i in 1..=k {
                cs.push(
                    Category::Last,
                    Expr::implies(vm.l(i), Expr::iff(vm.fv(n, kk + 1), vm.fv(n, i as i64))),
                );
            }
            if vm.is_bi() {
                cs.push(
                    Category::First,
                    Expr::implies(Expr::not(vm.past_loop_exists()), Expr::not(vm.fv(n, -1))),
                );
                for i in 0..k {
                    cs.push(
                        Category::First,
                        Expr::implies(vm.lp(i), Expr::iff(vm.fv(n, -1), vm.fv(n, i as i64))),
                    );
                }
            } else {
                let row = match kind {
                    NodeKind::Since | NodeKind::Trigger => {
                        Expr::iff(vm.fv(n, 0), vm.fv(vm.kid(n, 1), 0))
                    }
                    NodeKind::Yesterday => Expr::not(vm.fv(n, 0)),
                    NodeKind::WeakYesterday => vm.fv(n, 0),
                    _ => continue,
                };
                cs.push(Category::First, row);
            }
        }
    }
}
