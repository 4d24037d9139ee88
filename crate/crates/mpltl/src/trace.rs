//! Lasso-shaped witnesses decoded from solver models.

use crate::encode::VariableMap;
use crate::formula::Atom;
use crate::TimeModel;
use serde::{Deserialize, Serialize};
use std::fmt;

/// States `S_0..=S_k`; after `S_k` the word continues at `loop_start`, and
/// (bi-infinite time) before `S_0` it continues backwards from `past_loop`.
/// A missing loop means the witness holds for every extension on that side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LassoTrace {
    pub time: TimeModel,
    pub alphabet: Vec<Atom>,
    pub states: Vec<Vec<bool>>,
    pub loop_start: Option<usize>,
    pub past_loop: Option<usize>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("{count} loop selectors true: {which}")]
    MultipleSelectors { count: usize, which: String },
    #[error("loop at {0} does not repeat the last state")]
    BadLoop(usize),
    #[error("past loop at {0} does not repeat the first state")]
    BadPastLoop(usize),
    #[error("{0}")]
    Malformed(String),
}

impl LassoTrace {
    pub fn new(
        time: TimeModel,
        alphabet: Vec<Atom>,
        states: Vec<Vec<bool>>,
        loop_start: Option<usize>,
        past_loop: Option<usize>,
    ) -> Result<LassoTrace, TraceError> {
        let t = LassoTrace {
            time,
            alphabet,
            states,
            loop_start,
            past_loop,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn k(&self) -> usize {
        self.states.len() - 1
    }

    pub fn validate(&self) -> Result<(), TraceError> {
        if self.states.len() < 2 {
            return Err(TraceError::Malformed("a trace needs at least two states".into()));
        }
        if self.states.iter().any(|s| s.len() != self.alphabet.len()) {
            return Err(TraceError::Malformed("state width differs from alphabet".into()));
        }
        let k = self.k();
        if let Some(l) = self.loop_start {
            if l == 0 || l > k || self.states[l - 1] != self.states[k] {
                return Err(TraceError::BadLoop(l));
            }
        }
        if let Some(l) = self.past_loop {
            if self.time == TimeModel::Mono {
                return Err(TraceError::Malformed("past loop in mono-infinite time".into()));
            }
            if l >= k || self.states[l + 1] != self.states[0] {
                return Err(TraceError::BadPastLoop(l));
            }
        }
        Ok(())
    }

    pub fn atom_index(&self, a: &Atom) -> Option<usize> {
        self.alphabet.iter().position(|x| x == a)
    }

    /// Position in `0..=k` whose state the word carries at instant `i`;
    /// `None` beyond an open side or before 0 in mono-infinite time.
    pub fn pos(&self, i: i64) -> Option<usize> {
        let k = self.k() as i64;
        if (0..=k).contains(&i) {
            return Some(i as usize);
        }
        if i > k {
            let lf = self.loop_start? as i64;
            return Some((lf + (i - lf).rem_euclid(k - lf + 1)) as usize);
        }
        let lp = self.past_loop? as i64;
        Some((lp - (-i - 1).rem_euclid(lp + 1)) as usize)
    }

    pub fn holds(&self, atom: usize, i: i64) -> Option<bool> {
        self.pos(i).map(|p| self.states[p][atom])
    }

    /// Copy with one atom flipped at one position.
    pub fn flipped(&self, atom: usize, i: usize) -> LassoTrace {
        let mut t = self.clone();
        t.states[i][atom] = !t.states[i][atom];
        t
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "time": self.time,
            "k": self.k(),
            "loop_start": self.loop_start,
            "past_loop": self.past_loop,
            "states": self.states.iter().map(|s| {
                self.alphabet.iter().zip(s).filter(|(_, v)| **v).map(|(a, _)| a.name().to_string()).collect::<Vec<_>>()
            }).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for LassoTrace {
    /// One row per atom, one column per instant; `<` marks the past-loop
    /// target and `>` the loop start.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.alphabet.iter().map(|a| a.name().len()).max().unwrap_or(1).max(4);
        write!(f, "{:width$} ", "t")?;
        for i in 0..=self.k() {
            let mark = if Some(i) == self.loop_start {
                '>'
            } else if Some(i) == self.past_loop {
                '<'
            } else {
                ' '
            };
            write!(f, "{mark}{:<3}", i)?;
        }
        writeln!(f)?;
        for (a, atom) in self.alphabet.iter().enumerate() {
            write!(f, "{:width$} ", atom.name())?;
            for s in &self.states {
                write!(f, " {:<3}", if s[a] { "1" } else { "." })?;
            }
            writeln!(f)?;
        }
        let lf = self.loop_start.map_or("none".to_string(), |l| l.to_string());
        write!(f, "loop: {lf}")?;
        if self.time == TimeModel::Bi {
            let lp = self.past_loop.map_or("none".to_string(), |l| l.to_string());
            write!(f, ", past loop: {lp}")?;
        }
        writeln!(f)
    }
}

/// Reads the lasso out of a model (index 0 unused), checking selector
/// uniqueness and the loop state equalities.
pub fn decode_trace(vm: &VariableMap, model: &[bool]) -> Result<LassoTrace, TraceError> {
    let k = vm.k;
    let val = |v: u32| model[v as usize];
    let states = (0..=k)
        .map(|i| (0..vm.alphabet.len()).map(|a| val(vm.state_var(a, i))).collect())
        .collect();
    let future: Vec<usize> = (0..=k).filter(|&i| val(vm.loop_var(i))).collect();
    if future.len() > 1 {
        return Err(TraceError::MultipleSelectors {
            count: future.len(),
            which: format!("l at {future:?}"),
        });
    }
    let loop_start = if val(vm.loop_exists_var()) {
        future.first().copied()
    } else {
        None
    };
    let past_loop = if vm.is_bi() {
        let past: Vec<usize> = (0..=k)
            .filter(|&i| val(vm.past_loop_var(i).unwrap()))
            .collect();
        if past.len() > 1 {
            return Err(TraceError::MultipleSelectors {
                count: past.len(),
                which: format!("l' at {past:?}"),
            });
        }
        if val(vm.past_loop_exists_var().unwrap()) {
            past.first().copied()
        } else {
            None
        }
    } else {
        None
    };
    LassoTrace::new(vm.time, vm.alphabet.clone(), states, loop_start, past_loop)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(states: &[&[bool]], lf: Option<usize>, lp: Option<usize>, time: TimeModel) -> LassoTrace {
        LassoTrace::new(
            time,
            vec![Atom::new("p")],
            states.iter().map(|s| s.to_vec()).collect(),
            lf,
            lp,
        )
        .unwrap()
    }

    #[test]
    fn position_map() {
        // k = 3, loop back to 2: S_1 = S_3.
        let t = trace(&[&[false], &[true], &[false], &[true]], Some(2), None, TimeModel::Mono);
        let got: Vec<_> = (0..8).map(|i| t.pos(i).unwrap()).collect();
        assert_eq!(got, vec![0, 1, 2, 3, 2, 3, 2, 3]);
        assert_eq!(t.pos(-1), None);
        let b = trace(&[&[true], &[false], &[true], &[false]], Some(2), Some(1), TimeModel::Bi);
        let left: Vec<_> = (1..6).map(|i| b.pos(-i).unwrap()).collect();
        assert_eq!(left, vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn invalid_loops_rejected() {
        let r = LassoTrace::new(
            TimeModel::Mono,
            vec![Atom::new("p")],
            vec![vec![true], vec![false]],
            Some(1),
            None,
        );
        assert_eq!(r, Err(TraceError::BadLoop(1)));
    }

    #[test]
    fn display_marks_loops() {
        let t = trace(&[&[true], &[true]], Some(1), Some(0), TimeModel::Bi);
        let s = t.to_string();
        assert!(s.contains(">1"));
        assert!(s.contains("<0"));
        assert!(s.contains("past loop: 0"));
    }
}
