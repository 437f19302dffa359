//! Running external CHC solvers on SMT-LIB files.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;
use wait_timeout::ChildExt;

use super::ChcError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Sat,
    Unsat,
    Unknown,
    Timeout,
    /// Cancelled because another solver answered first.
    Cancelled,
    /// Output without a status token, kept verbatim.
    Error(String),
}

impl Status {
    pub fn is_definitive(&self) -> bool {
        matches!(self, Status::Sat | Status::Unsat)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Status::Sat => "sat",
            Status::Unsat => "unsat",
            Status::Unknown => "unknown",
            Status::Timeout => "timeout",
            Status::Cancelled => "cancelled",
            Status::Error(_) => "error",
        }
    }
}

/// `name=command line`; `{file}` in the command is replaced by the input path, which is
/// appended when absent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolverSpec {
    pub name: String,
    pub cmd: String,
}

impl SolverSpec {
    pub fn parse(s: &str) -> Result<SolverSpec, ChcError> {
        let (name, cmd) = s
            .split_once('=')
            .ok_or_else(|| ChcError::Config(format!("solver `{s}` is not of the form name=command")))?;
        if name.trim().is_empty() || cmd.trim().is_empty() {
            return Err(ChcError::Config(format!("solver `{s}` has an empty name or command")));
        }
        Ok(SolverSpec {
            name: name.trim().to_string(),
            cmd: cmd.trim().to_string(),
        })
    }

    fn argv(&self, file: &Path) -> Vec<String> {
        let f = file.display().to_string();
        let mut argv: Vec<String> = self.cmd.split_whitespace().map(|w| w.replace("{file}", &f)).collect();
        if !self.cmd.contains("{file}") {
            argv.push(f);
        }
        argv
    }
}

/// Default z3 plus z3 with spacer's global guidance, which closes some automaton encodings
/// the default configuration leaves open.
pub fn default_solvers() -> Vec<SolverSpec> {
    vec![
        SolverSpec::parse("z3=z3 {file}").unwrap(),
        SolverSpec::parse("z3-global=z3 fp.spacer.global=true {file}").unwrap(),
    ]
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveOutcome {
    pub solver: String,
    pub status: Status,
    pub wall_ms: u128,
}

/// First `sat`/`unsat`/`unknown` line of the output.
fn parse_status(stdout: &str, stderr: &str) -> Status {
    for line in stdout.lines() {
        match line.trim() {
            "sat" => return Status::Sat,
            "unsat" => return Status::Unsat,
            "unknown" => return Status::Unknown,
            "timeout" => return Status::Timeout,
            _ => {}
        }
    }
    let mut msg = stdout.trim().to_string();
    if !stderr.trim().is_empty() {
        if !msg.is_empty() {
            msg.push('\n');
        }
        msg.push_str(stderr.trim());
    }
    Status::Error(msg)
}

fn drain(mut r: impl Read + Send + 'static) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut s = String::new();
        let _ = r.read_to_string(&mut s);
        s
    })
}

/// Runs one solver with a wall-clock limit; setting `cancel` kills it early.
pub fn solve(file: &Path, spec: &SolverSpec, timeout: Duration, cancel: Option<&AtomicBool>) -> Result<SolveOutcome, ChcError> {
    let argv = spec.argv(file);
    let start = Instant::now();
    let mut child = Command::new(&argv[0])
        .args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| ChcError::Config(format!("cannot run solver `{}` ({}): {e}", spec.name, argv[0])))?;
    let out = drain(child.stdout.take().unwrap());
    let err = drain(child.stderr.take().unwrap());
    let tick = Duration::from_millis(20);
    let status = loop {
        let left = timeout.saturating_sub(start.elapsed());
        if left.is_zero() {
            let _ = child.kill();
            let _ = child.wait();
            break Some(Status::Timeout);
        }
        if cancel.is_some_and(|c| c.load(Ordering::SeqCst)) {
            let _ = child.kill();
            let _ = child.wait();
            break Some(Status::Cancelled);
        }
        if child.wait_timeout(left.min(tick))?.is_some() {
            break None;
        }
    };
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    Ok(SolveOutcome {
        solver: spec.name.clone(),
        status: status.unwrap_or_else(|| parse_status(&stdout, &stderr)),
        wall_ms: start.elapsed().as_millis(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PortfolioResult {
    /// Best status: the first definitive answer, else the first non-error one.
    pub status: Status,
    pub winner: Option<String>,
    pub runs: Vec<SolveOutcome>,
}

/// Runs every solver in parallel; the first `sat`/`unsat` cancels the rest.
pub fn portfolio(file: &Path, specs: &[SolverSpec], timeout: Duration) -> Result<PortfolioResult, ChcError> {
    if specs.is_empty() {
        return Err(ChcError::Config("no solver configured".into()));
    }
    let cancel = Arc::new(AtomicBool::new(false));
    let (tx, rx) = mpsc::channel();
    for (i, s) in specs.iter().enumerate() {
        let (tx, cancel, s, f) = (tx.clone(), cancel.clone(), s.clone(), file.to_path_buf());
        thread::spawn(move || {
            let r = solve(&f, &s, timeout, Some(&cancel));
            if matches!(&r, Ok(o) if o.status.is_definitive()) {
                cancel.store(true, Ordering::SeqCst);
            }
            let _ = tx.send((i, r));
        });
    }
    drop(tx);
    let mut runs: Vec<Option<SolveOutcome>> = vec![None; specs.len()];
    let mut order = Vec::new();
    let mut first_err = None;
    for (i, r) in rx {
        match r {
            Ok(o) => {
                order.push(i);
                runs[i] = Some(o);
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let runs: Vec<SolveOutcome> = runs.into_iter().flatten().collect();
    if runs.is_empty() {
        return Err(first_err.unwrap());
    }
    let by_idx = |i: usize| specs[i].name.clone();
    let winner = order
        .iter()
        .copied()
        .find(|&i| runs.iter().any(|o| o.solver == by_idx(i) && o.status.is_definitive()));
    let status = match winner {
        Some(i) => runs.iter().find(|o| o.solver == by_idx(i)).unwrap().status.clone(),
        None => runs
            .iter()
            .map(|o| o.status.clone())
            .find(|s| matches!(s, Status::Unknown | Status::Timeout))
            .unwrap_or_else(|| runs[0].status.clone()),
    };
    Ok(PortfolioResult {
        status,
        winner: winner.map(by_idx),
        runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn script(dir: &Path, name: &str, body: &str) -> SolverSpec {
        let p = dir.join(name);
        let mut f = std::fs::File::create(&p).unwrap();
        writeln!(f, "#!/bin/sh\n{body}").unwrap();
        drop(f);
        std::fs::set_permissions(&p, std::os::unix::fs::PermissionsExt::from_mode(0o755)).unwrap();
        SolverSpec {
            name: name.into(),
            cmd: format!("{} {{file}}", p.display()),
        }
    }

    #[test]
    fn parses_specs_and_statuses() {
        let s = SolverSpec::parse("z3=z3 fp.engine=spacer {file}").unwrap();
        assert_eq!(s.name, "z3");
        assert_eq!(s.argv(Path::new("a.smt2")), ["z3", "fp.engine=spacer", "a.smt2"]);
        let s = SolverSpec::parse("e=eld -t:5").unwrap();
        assert_eq!(s.argv(Path::new("a.smt2")), ["eld", "-t:5", "a.smt2"]);
        assert!(SolverSpec::parse("nocmd").is_err());
        assert_eq!(parse_status("warning\nunsat\n", ""), Status::Unsat);
        assert_eq!(parse_status("unknown\n", ""), Status::Unknown);
        assert_eq!(parse_status("(error \"x\")", "boom"), Status::Error("(error \"x\")\nboom".into()));
    }

    #[test]
    fn drives_processes() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("in.smt2");
        std::fs::write(&f, "(check-sat)\n").unwrap();
        let sat = script(dir.path(), "fast", "echo sat");
        let slow = script(dir.path(), "slow", "exec sleep 5");
        let unk = script(dir.path(), "unk", "echo unknown");
        let t = Duration::from_secs(3);
        assert_eq!(solve(&f, &sat, t, None).unwrap().status, Status::Sat);
        assert_eq!(solve(&f, &unk, t, None).unwrap().status, Status::Unknown);
        let o = solve(&f, &slow, Duration::from_millis(200), None).unwrap();
        assert_eq!(o.status, Status::Timeout);
        assert!(o.wall_ms < 2000);
        let missing = SolverSpec::parse("none=/nonexistent/solver").unwrap();
        assert!(matches!(solve(&f, &missing, t, None), Err(ChcError::Config(_))));

        let start = Instant::now();
        let r = portfolio(&f, &[slow.clone(), sat.clone()], Duration::from_secs(20)).unwrap();
        assert_eq!(r.status, Status::Sat);
        assert_eq!(r.winner.as_deref(), Some("fast"));
        assert!(start.elapsed() < Duration::from_secs(4));
        assert!(r.runs.iter().any(|o| o.status == Status::Cancelled));
        let r = portfolio(&f, &[unk], t).unwrap();
        assert_eq!((r.status, r.winner), (Status::Unknown, None));
    }
}
