use serde::{Deserialize, Serialize};

use super::space::{Factor, FactorSpace};
use crate::des::{derive_seed, run_simulation, StrategyProfile};
use crate::error::{Error, Result};
use crate::scenario::{Action, Scenario, ServiceModel, TravelModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesOutput {
    /// Served patients over their mean total time, system-wide.
    SystemScore,
    HospitalScore(usize),
    GlobalTime,
}

/// What to do with runs whose queues kept growing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvalidPolicy {
    /// Keep the value measured over the finite horizon.
    #[default]
    Impute,
    /// Return NaN so the whole design block is dropped.
    Drop,
}

/// The simulation viewed as a function of a factor vector.
///
/// Recognised factor names: `lambda`, `mu`, `velocity`, `servers_<j>`
/// (integer), and `action_<j>` (0 = Accept, 1 = Redirect), with `j`
/// counted from 1 in scenario order. Every point runs with the same seed.
#[derive(Debug, Clone)]
pub struct DesModel {
    pub template: Scenario,
    pub space: FactorSpace,
    pub output: DesOutput,
    pub policy: InvalidPolicy,
    pub seed: u64,
}

enum Target {
    Lambda,
    Mu,
    Velocity,
    Servers(usize),
    Action(usize),
}

fn parse_target(name: &str, k: usize) -> Result<Target> {
    let indexed = |prefix: &str| -> Option<Result<usize>> {
        let j = name.strip_prefix(prefix)?;
        Some(match j.parse::<usize>() {
            Ok(j) if (1..=k).contains(&j) => Ok(j - 1),
            _ => Err(Error::validation(
                format!("factors.{name}"),
                format!("hospital index must be in 1..={k}"),
            )),
        })
    };
    match name {
        "lambda" => Ok(Target::Lambda),
        "mu" => Ok(Target::Mu),
        "velocity" => Ok(Target::Velocity),
        _ => {
            if let Some(j) = indexed("servers_") {
                return j.map(Target::Servers);
            }
            if let Some(j) = indexed("action_") {
                return j.map(Target::Action);
            }
            Err(Error::validation(format!("factors.{name}"), "unknown factor"))
        }
    }
}

impl DesModel {
    pub fn new(template: Scenario, space: FactorSpace, output: DesOutput, seed: u64) -> Result<Self> {
        space.validate()?;
        let k = template.hospital_count();
        for f in &space.factors {
            if let Target::Velocity = parse_target(&f.name, k)? {
                if matches!(template.travel, TravelModel::Network { .. }) {
                    return Err(Error::validation("factors.velocity", "network travel has no velocity"));
                }
            }
        }
        if let DesOutput::HospitalScore(j) = output {
            if j >= k {
                return Err(Error::validation("output", format!("hospital index {j} out of range")));
            }
        }
        Ok(Self {
            template,
            space,
            output,
            policy: InvalidPolicy::default(),
            seed,
        })
    }

    /// Arrival rate, service rate, velocity, then servers and action per hospital.
    pub fn default_space(hospitals: usize) -> FactorSpace {
        let mut f = vec![
            Factor::continuous("lambda", 0.5, 4.0),
            Factor::continuous("mu", 0.5, 2.0),
            Factor::continuous("velocity", 20.0, 60.0),
        ];
        f.extend((1..=hospitals).map(|j| Factor::integer(&format!("servers_{j}"), 1, 3)));
        f.extend((1..=hospitals).map(|j| Factor::integer(&format!("action_{j}"), 0, 1)));
        FactorSpace { factors: f }
    }

    pub fn scenario_at(&self, x: &[f64]) -> (Scenario, StrategyProfile) {
        let mut s = self.template.clone();
        let k = s.hospital_count();
        let mut actions: Vec<Action> = s.hospitals.iter().map(|h| h.strategy).collect();
        for (f, &v) in self.space.factors.iter().zip(x) {
            match parse_target(&f.name, k).expect("validated at construction") {
                Target::Lambda => s.arrivals.rate = v,
                Target::Mu => {
                    for h in &mut s.hospitals {
                        h.service = ServiceModel::Exponential { rate: v };
                    }
                }
                Target::Velocity => match &mut s.travel {
                    TravelModel::Line { velocity } | TravelModel::Euclidean { velocity } => *velocity = v,
                    TravelModel::Network { .. } => unreachable!("rejected at construction"),
                },
                Target::Servers(j) => s.hospitals[j].servers = v.round().max(1.0) as u32,
                Target::Action(j) => actions[j] = if v >= 0.5 { Action::Redirect } else { Action::Accept },
            }
        }
        (s, StrategyProfile::new(actions))
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        let (s, profile) = self.scenario_at(x);
        let r = run_simulation(&s, &profile, derive_seed(self.seed, 0, 0));
        if r.overcrowded && self.policy == InvalidPolicy::Drop {
            return f64::NAN;
        }
        let v = match self.output {
            DesOutput::SystemScore => r.system_score(),
            DesOutput::HospitalScore(j) => r.hospitals[j].score,
            DesOutput::GlobalTime => r.global_time(s.options.global_time),
        };
        v.unwrap_or(0.0)
    }
}
