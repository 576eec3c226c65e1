//! Native structure-learning algorithms, a wall-clock timeout wrapper,
//! and the external-algorithm subprocess protocol.

mod external;
mod greedy;
mod mcmc;
mod moves;
mod pc;

pub use external::{run_external, ExternalSpec};
pub use greedy::{hill_climb, hill_climb_with, tabu, tabu_with, GreedyOutcome};
pub use mcmc::{structure_mcmc, structure_mcmc_with};
pub use pc::{pc, PcOutcome};

use std::time::Instant;

use crate::error::{Error, Result};
use crate::graphs::LabeledGraph;
use crate::io::GraphTrajectory;

/// Cooperative cancellation handle. Native learners poll it at iteration
/// granularity; external learners are killed on expiry.
#[derive(Debug, Clone, Copy)]
pub struct CancelToken {
    deadline: Option<Instant>,
}

impl CancelToken {
    pub fn none() -> Self {
        CancelToken { deadline: None }
    }

    pub fn with_timeout_secs(secs: f64) -> Self {
        CancelToken {
            deadline: Some(Instant::now() + std::time::Duration::from_secs_f64(secs)),
        }
    }

    pub fn from_timeout(timeout: Option<f64>) -> Self {
        match timeout {
            Some(secs) => Self::with_timeout_secs(secs),
            None => Self::none(),
        }
    }

    #[inline]
    pub fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    /// Error when expired; call sites sprinkle this through their loops.
    #[inline]
    pub fn check(&self) -> Result<()> {
        if self.expired() {
            Err(Error::TimedOut)
        } else {
            Ok(())
        }
    }
}

/// Learner output: a single graph or an MCMC trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum Estimate {
    Graph(LabeledGraph),
    Trajectory(GraphTrajectory),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LearnerStatus {
    Ok,
    TimedOut,
    Failed(String),
}

impl LearnerStatus {
    pub fn tag(&self) -> &'static str {
        match self {
            LearnerStatus::Ok => "ok",
            LearnerStatus::TimedOut => "timed_out",
            LearnerStatus::Failed(_) => "failed",
        }
    }
}

/// Envelope around any learner invocation: estimate iff status is ok,
/// wall-clock seconds, and the test count when the algorithm reports one.
#[derive(Debug, Clone)]
pub struct LearnerResult {
    pub estimate: Option<Estimate>,
    pub wall_time: f64,
    pub ntests: Option<u64>,
    pub status: LearnerStatus,
}

/// Run a native learner thunk under an optional wall-clock deadline.
///
/// The thunk receives a [`CancelToken`] it must poll; on expiry it
/// returns [`Error::TimedOut`], mapped here to a timed-out result with no
/// estimate.
pub fn with_timeout<F>(timeout: Option<f64>, thunk: F) -> LearnerResult
where
    F: FnOnce(&CancelToken) -> Result<(Estimate, Option<u64>)>,
{
    let token = CancelToken::from_timeout(timeout);
    let start = Instant::now();
    match thunk(&token) {
        Ok((estimate, ntests)) => LearnerResult {
            estimate: Some(estimate),
            wall_time: start.elapsed().as_secs_f64(),
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn with_timeout_passes_through_ok() {
        let g = LabeledGraph::with_numeric_labels(2);
        let res = with_timeout(None, |_| Ok((Estimate::Graph(g.clone()), Some(3))));
        assert_eq!(res.status, LearnerStatus::Ok);
        assert_eq!(res.ntests, Some(3));
        assert!(matches!(res.estimate, Some(Estimate::Graph(_))));
    }

    #[test]
    fn with_timeout_expires() {
        let res = with_timeout(Some(0.05), |tok| loop {
            tok.check()?;
            std::thread::sleep(std::time::Duration::from_millis(1));
        });
        assert_eq!(res.status, LearnerStatus::TimedOut);
        assert!(res.estimate.is_none());
        assert!(res.wall_time < 1.0);
    }

    #[test]
    fn with_timeout_maps_failure() {
        let res = with_timeout(None, |_| {
            Err(crate::error::Error::Learner("boom".to_string()))
        });
        assert!(matches!(res.status, LearnerStatus::Failed(_)));
    }

    #[test]
    fn no_timeout_token_never_expires() {
        let tok = CancelToken::none();
        assert!(!tok.expired());
        assert!(tok.check().is_ok());
    }
}
