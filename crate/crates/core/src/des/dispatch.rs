use crate::scenario::{Action, ForcedRule, HospitalSpec, Overflow};

use super::StrategyProfile;

/// What a hospital looks like to the dispatcher at request time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HospitalLoad {
    /// Patients counted against the redirect threshold.
    pub admitted: u32,
    /// Patients waiting for a server.
    pub queue_len: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispatchDecision {
    /// Chosen hospital index; `None` when the patient is lost.
    pub hospital: Option<usize>,
    /// Hospitals that turned the patient away, in the order asked.
    pub rejections: Vec<usize>,
    pub forced: bool,
}

/// Walks hospitals in ascending travel time. A hospital takes the patient
/// if it Accepts, or if it Redirects but is below its capacity `N = C + Q`.
/// When all refuse, the overflow policy decides: a forced assignment by
/// `rule`, or loss.
pub fn dispatch(
    by_travel: &[(usize, f64)],
    profile: &StrategyProfile,
    loads: &[HospitalLoad],
    hospitals: &[HospitalSpec],
    rule: ForcedRule,
    overflow: Overflow,
) -> DispatchDecision {
    let mut rejections = Vec::new();
    for &(j, _) in by_travel {
        let takes = match profile.action(j) {
            Action::Accept => true,
            Action::Redirect => match hospitals[j].capacity() {
                Some(n) => loads[j].admitted < n,
                None => true,
            },
        };
        if takes {
            return DispatchDecision {
                hospital: Some(j),
                rejections,
                forced: false,
            };
        }
        rejections.push(j);
    }
    if overflow == Overflow::Lost {
        return DispatchDecision {
            hospital: None,
            rejections,
            forced: false,
        };
    }
    let chosen = match rule {
        ForcedRule::Nearest => by_travel[0].0,
        ForcedRule::MinExpectedTime => {
            let mut best = by_travel[0].0;
            let mut best_cost = f64::INFINITY;
            for &(j, travel) in by_travel {
                let cost = expected_total_time(travel, loads[j], &hospitals[j]);
                if cost < best_cost {
                    best = j;
                    best_cost = cost;
                }
            }
            best
        }
    };
    DispatchDecision {
        hospital: Some(chosen),
        rejections,
        forced: true,
    }
}

/// `travel + queue_len * mean_service / C + mean_service`.
pub(crate) fn expected_total_time(travel: f64, load: HospitalLoad, h: &HospitalSpec) -> f64 {
    let s = h.service.mean_hours();
    travel + f64::from(load.queue_len) * s / f64::from(h.servers) + s
}
