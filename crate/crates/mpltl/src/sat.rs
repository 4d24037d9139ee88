//! Solver backends: an embedded CDCL solver and an external DIMACS process.

use crate::cnf::{read_model, Cnf, DimacsError};
use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Total assignment, indexed by variable (index 0 unused).
    Sat(Vec<bool>),
    Unsat,
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("solver timed out after {0:?}")]
    Timeout(Duration),
    #[error("solver process failed: {0}")]
    Process(String),
    #[error("unexpected solver exit status {0}")]
    ExitStatus(i32),
    #[error("unparsable solver output: {0}")]
    Output(#[from] DimacsError),
    #[error("embedded solver error: {0}")]
    Embedded(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Backend {
    Embedded,
    /// Shell command; `{input}` is replaced by the DIMACS file path.
    External {
        command: String,
        sat_code: i32,
        unsat_code: i32,
    },
}

impl Backend {
    pub fn external(command: &str) -> Backend {
        Backend::External {
            command: command.to_string(),
            sat_code: 10,
            unsat_code: 20,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Backend::Embedded => "embedded".into(),
            Backend::External { command, .. } => format!("external:{command}"),
        }
    }
}

pub fn solve(cnf: &Cnf, backend: &Backend, timeout: Option<Duration>) -> Result<Outcome, SolveError> {
    let out = match backend {
        Backend::Embedded => solve_embedded(cnf, timeout)?,
        Backend::External {
            command,
            sat_code,
            unsat_code,
        } => solve_external(cnf, command, *sat_code, *unsat_code, timeout)?,
    };
    if let Outcome::Sat(model) = &out {
        if !cnf.satisfied_by(model) {
            return Err(SolveError::Process("model does not satisfy the formula".into()));
        }
    }
    Ok(out)
}

fn run_varisat(clauses: &[Vec<i32>], num_vars: u32) -> Result<Outcome, SolveError> {
    use varisat::ExtendFormula;
    let mut solver = varisat::Solver::new();
    let mut buf = Vec::new();
    for c in clauses {
        buf.clear();
        buf.extend(c.iter().map(|&l| varisat::Lit::from_dimacs(l as isize)));
        solver.add_clause(&buf);
    }
    match solver.solve() {
        Ok(true) => {
            let mut model = vec![false; num_vars as usize + 1];
            for l in solver.model().unwrap_or_default() {
                let v = l.var().to_dimacs() as usize;
                if v < model.len() {
                    model[v] = l.is_positive();
                }
            }
            Ok(Outcome::Sat(model))
        }
        Ok(false) => Ok(Outcome::Unsat),
        Err(e) => Err(SolveError::Embedded(e.to_string())),
    }
}

fn solve_embedded(cnf: &Cnf, timeout: Option<Duration>) -> Result<Outcome, SolveError> {
    let Some(limit) = timeout else {
        return run_varisat(&cnf.clauses, cnf.num_vars);
    };
    let (tx, rx) = mpsc::channel();
    let clauses = cnf.clauses.clone();
    let n = cnf.num_vars;
    // The solver has no interrupt hook; on timeout the worker is abandoned.
    thread::spawn(move || {
        let _ = tx.send(run_varisat(&clauses, n));
    });
    match rx.recv_timeout(limit) {
        Ok(r) => r,
        Err(_) => Err(SolveError::Timeout(limit)),
    }
}

fn solve_external(
    cnf: &Cnf,
    command: &str,
    sat_code: i32,
    unsat_code: i32,
    timeout: Option<Duration>,
) -> Result<Outcome, SolveError> {
    let mut file = tempfile::Builder::new().suffix(".cnf").tempfile()?;
    cnf.write_dimacs(std::io::BufWriter::new(file.as_file_mut()))?;
    file.flush()?;
    let path = file.path().to_string_lossy().to_string();
    let cmdline = if command.contains("{input}") {
        command.replace("{input}", &path)
    } else {
        format!("{command} {path}")
    };
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&cmdline)
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SolveError::Process(format!("cannot start `{cmdline}`: {e}")))?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let start = Instant::now();
    let status = loop {
        if let Some(st) = child.try_wait()? {
            break st;
        }
        if let Some(limit) = timeout {
            if start.elapsed() > limit {
                let _ = child.kill();
                let _ = child.wait();
                return Err(SolveError::Timeout(limit));
            }
        }
        thread::sleep(Duration::from_millis(2));
    };
    let output = reader
        .join()
        .map_err(|_| SolveError::Process("output reader panicked".into()))??;
    match status.code() {
        Some(c) if c == sat_code => Ok(Outcome::Sat(read_model(output.as_bytes(), cnf.num_vars)?)),
        Some(c) if c == unsat_code => Ok(Outcome::Unsat),
        Some(c) => Err(SolveError::ExitStatus(c)),
        None => Err(SolveError::Process("solver killed by a signal".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::parse_dimacs;

    fn cnf(text: &str) -> Cnf {
        parse_dimacs(text.as_bytes()).unwrap()
    }

    #[test]
    fn trivial_instances() {
        let sat = solve(&cnf("p cnf 1 1\n1 0\n"), &Backend::Embedded, None).unwrap();
        assert_eq!(sat, Outcome::Sat(vec![false, true]));
        let unsat = solve(&cnf("p cnf 1 2\n1 0\n-1 0\n"), &Backend::Embedded, None).unwrap();
        assert_eq!(unsat, Outcome::Unsat);
        let empty = solve(&cnf("p cnf 2 1\n0\n"), &Backend::Embedded, Some(Duration::from_secs(5))).unwrap();
        assert_eq!(empty, Outcome::Unsat);
    }

    #[test]
    fn external_exit_codes() {
        let sat = Backend::external("printf 'v 1 0\\n'; exit 10; true {input}");
        assert_eq!(
            solve(&cnf("p cnf 1 1\n1 0\n"), &sat, None).unwrap(),
            Outcome::Sat(vec![false, true])
        );
        let unsat = Backend::external("exit 20; {input}");
        assert_eq!(solve(&cnf("p cnf 1 1\n1 0\n"), &unsat, None).unwrap(), Outcome::Unsat);
        let odd = Backend::external("exit 3; {input}");
        assert!(matches!(
            solve(&cnf("p cnf 1 1\n1 0\n"), &odd, None),
            Err(SolveError::ExitStatus(3))
        ));
        let slow = Backend::external("sleep 5; {input}");
        assert!(matches!(
            solve(&cnf("p cnf 1 1\n1 0\n"), &slow, Some(Duration::from_millis(100))),
            Err(SolveError::Timeout(_))
        ));
    }

    #[test]
    fn wrong_external_model_is_rejected() {
        let liar = Backend::external("printf 'v -1 0\\n'; exit 10; {input}");
        assert!(solve(&cnf("p cnf 1 1\n1 0\n"), &liar, None).is_err());
    }
}
