//! Child-process plugin protocol: data file in, three output files
//! (adjmat, time, ntests) out.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use super::{CancelToken, Estimate, LearnerResult, LearnerStatus};
use crate::error::{Error, Result};
use crate::io::read_adjmat;

/// External-algorithm invocation: a command template with `{data}`,
/// `{adjmat}`, `{time}`, `{ntests}` and `{replicate}` placeholders plus
/// one placeholder per declared parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSpec {
    pub command: String,
    /// Extra parameters, substituted by key.
    pub params: BTreeMap<String, String>,
    /// Wall-clock limit in seconds.
    pub timeout: Option<f64>,
}

fn render_command(
    spec: &ExternalSpec,
    data: &Path,
    adjmat: &Path,
    time: &Path,
    ntests: &Path,
    replicate: u64,
) -> Result<String> {
    let mut cmd = spec.command.clone();
    let pairs: Vec<(String, String)> = [
        ("data", data.display().to_string()),
        ("adjmat", adjmat.display().to_string()),
        ("time", time.display().to_string()),
        ("ntests", ntests.display().to_string()),
        ("replicate", replicate.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .chain(spec.params.iter().map(|(k, v)| (k.clone(), v.clone())))
    .collect();
    for (key, value) in &pairs {
        cmd = cmd.replace(&format!("{{{key}}}"), value);
    }
    if let (Some(open), true) = (cmd.find('{'), cmd.contains('}')) {
        let tail: String = cmd[open..].chars().take(30).collect();
        return Err(Error::Learner(format!(
            "unresolved placeholder in command template near {tail:?}"
        )));
    }
    Ok(cmd)
}

/// Run the plugin: substitute the template, execute under `sh -c` in its
/// own process group, enforce the deadline, then parse the three output
/// files. Every failure mode maps to a failed result with a diagnostic.
pub fn run_external(
    spec: &ExternalSpec,
    data_path: &Path,
    workdir: &Path,
    replicate: u64,
) -> LearnerResult {
    let token = CancelToken::from_timeout(spec.timeout);
    let start = Instant::now();
    match run_external_inner(spec, data_path, workdir, replicate, &token) {
        Ok((estimate, reported_time, ntests)) => LearnerResult {
            estimate: Some(estimate),
            wall_time: reported_time,
            ntests,
            status: LearnerStatus::Ok,
        },
        Err(Error::TimedOut) => LearnerResult {
            estimate: None,
            wall_time: start.elapsed().as_secs_f64(),
            ntests: None,
            status: LearnerStatus::TimedOut,
        },
        Err(e) => LearnerResult {
            estimate: None,
            wall_time: start.elapsed().as_secs_f64(),
            ntests: None,
            status: LearnerStatus::Failed(e.to_string()),
        },
    }
}

fn run_external_inner(
    spec: &ExternalSpec,
    data_path: &Path,
    workdir: &Path,
    replicate: u64,
    token: &CancelToken,
) -> Result<(Estimate, f64, Option<u64>)> {
    std::fs::create_dir_all(workdir).map_err(|e| Error::io(workdir, e))?;
    let adjmat_path = workdir.join("adjmat.csv");
    let time_path = workdir.join("time");
    let ntests_path = workdir.join("ntests");
    for stale in [&adjmat_path, &time_path, &ntests_path] {
        let _ = std::fs::remove_file(stale);
    }
    let rendered = render_command(
        spec,
        data_path,
        &adjmat_path,
        &time_path,
        &ntests_path,
        replicate,
    )?;

    let mut command = Command::new("sh");
    command
        .arg("-c")
        .arg(&rendered)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped());
    #[cfg(unix)]
    {
        use std::os::unix::process::CommandExt;
        command.process_group(0);
    }
    let mut child = command
        .spawn()
        .map_err(|e| Error::Learner(format!("spawn failed for {rendered:?}: {e}")))?;

    let status = loop {
        match child.try_wait() {
            Ok(Some(status)) => break status,
            Ok(None) => {
                if token.expired() {
                    kill_child_group(&mut child);
                    let _ = child.wait();
                    return Err(Error::TimedOut);
                }
                std::thread::sleep(Duration::from_millis(10));
            }
            Err(e) => return Err(Error::Learner(format!("wait failed: {e}"))),
        }
    };

    let mut stderr_tail = String::new();
    if let Some(mut err) = child.stderr.take() {
        use std::io::Read;
        let _ = err.read_to_string(&mut stderr_tail);
    }
    if !status.success() {
        let tail: String = stderr_tail.chars().rev().take(400).collect::<Vec<_>>().iter().rev().collect();
        return Err(Error::Learner(format!(
            "plugin exited with {status}: {tail}"
        )));
    }

    let graph = read_adjmat(&adjmat_path)
        .map_err(|e| Error::Learner(format!("bad adjmat output: {e}")))?;
    let time_text = std::fs::read_to_string(&time_path)
        .map_err(|_| Error::Learner(format!("missing time output {}", time_path.display())))?;
    let reported_time: f64 = time_text.trim().parse().map_err(|_| {
        Error::Learner(format!(
            "time output {:?} is not a single real",
            time_text.trim()
        ))
    })?;
    let ntests_text = std::fs::read_to_string(&ntests_path).map_err(|_| {
        Error::Learner(format!("missing ntests output {}", ntests_path.display()))
    })?;
    let ntests = match ntests_text.trim() {
        "None" => None,
        other => Some(other.parse::<u64>().map_err(|_| {
            Error::Learner(format!("ntests output {other:?} is not a count or \"None\""))
        })?),
    };
    Ok((Estimate::Graph(graph), reported_time, ntests))
}

fn kill_child_group(child: &mut std::process::Child) {
    #[cfg(unix)]
    {
        let pid = child.id() as i32;
        unsafe {
            // the child leads its own process group
            libc::killpg(pid, libc::SIGKILL);
        }
    }
    #[cfg(not(unix))]
    {
        let _ = child.kill();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write_data_fixture(dir: &Path) -> std::path::PathBuf {
        let path = dir.join("data.csv");
        std::fs::write(&path, "a,b\n0.1,0.2\n0.3,0.4\n").unwrap();
        path
    }

    fn echo_spec(timeout: Option<f64>) -> ExternalSpec {
        ExternalSpec {
            command: "printf 'a,b\\n0,1\\n0,0\\n' > {adjmat} && echo 0.1 > {time} && echo None > {ntests}"
                .to_string(),
            params: BTreeMap::new(),
            timeout,
        }
    }

    #[test]
    fn fixture_plugin_parses() {
        let dir = tempdir().unwrap();
        let data = write_data_fixture(dir.path());
        let res = run_external(&echo_spec(None), &data, &dir.path().join("out"), 1);
        assert_eq!(res.status, LearnerStatus::Ok);
        assert_eq!(res.wall_time, 0.1);
        assert_eq!(res.ntests, None);
        match res.estimate {
            Some(Estimate::Graph(g)) => {
                assert!(g.has_directed(0, 1));
            }
            other => panic!("unexpected estimate {other:?}"),
        }
    }

    #[test]
    fn malformed_adjmat_reports_failed_with_filename() {
        let dir = tempdir().unwrap();
        let data = write_data_fixture(dir.path());
        let spec = ExternalSpec {
            command:
                "printf 'a,b\\n0,3\\n0,0\\n' > {adjmat} && echo 0.1 > {time} && echo None > {ntests}"
                    .to_string(),
            params: BTreeMap::new(),
            timeout: None,
        };
        let res = run_external(&spec, &data, &dir.path().join("out"), 1);
        match res.status {
            LearnerStatus::Failed(msg) => assert!(msg.contains("adjmat"), "{msg}"),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn nonzero_exit_reports_failed() {
        let dir = tempdir().unwrap();
        let data = write_data_fixture(dir.path());
        let spec = ExternalSpec {
            command: "echo kaputt >&2; exit 3".to_string(),
            params: BTreeMap::new(),
            timeout: None,
        };
        let res = run_external(&spec, &data, &dir.path().join("out"), 1);
        match res.status {
            LearnerStatus::Failed(msg) => assert!(msg.contains("kaputt"), "{msg}"),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn sleeping_plugin_times_out_quickly() {
        let dir = tempdir().unwrap();
        let data = write_data_fixture(dir.path());
        let spec = ExternalSpec {
            command: "sleep 10".to_string(),
            params: BTreeMap::new(),
            timeout: Some(1.0),
        };
        let start = Instant::now();
        let res = run_external(&spec, &data, &dir.path().join("out"), 1);
        assert_eq!(res.status, LearnerStatus::TimedOut);
        assert!(start.elapsed().as_secs_f64() < 2.0);
        assert!(res.estimate.is_none());
    }

    #[test]
    fn parameters_and_replicate_substituted() {
        let dir = tempdir().unwrap();
        let data = write_data_fixture(dir.path());
        let mut params = BTreeMap::new();
        params.insert("alpha".to_string(), "0.05".to_string());
        let spec = ExternalSpec {
            command: "printf 'a,b\\n0,0\\n0,0\\n' > {adjmat} && echo 0.5 > {time} && echo {replicate} > {ntests} && test {alpha} = 0.05".to_string(),
            params,
            timeout: None,
        };
        let res = run_external(&spec, &data, &dir.path().join("out"), 42);
        assert_eq!(res.status, LearnerStatus::Ok);
        assert_eq!(res.ntests, Some(42));
    }

    #[test]
    fn unresolved_placeholder_is_failure() {
        let dir = tempdir().unwrap();
        let data = write_data_fixture(dir.path());
        let spec = ExternalSpec {
            command: "echo {unknown_param}".to_string(),
            params: BTreeMap::new(),
            timeout: None,
        };
        let res = run_external(&spec, &data, &dir.path().join("out"), 1);
        assert!(matches!(res.status, LearnerStatus::Failed(_)));
    }
}
