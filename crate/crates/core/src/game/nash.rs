use serde::{Deserialize, Serialize};

use super::PayoffTensor;
use crate::des::StrategyProfile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NashOutcome {
    /// Some profile's system was overcrowded, so no equilibrium is reported.
    Inconsistent,
    /// All weak pure equilibria in profile-index order. May be empty.
    Equilibria(Vec<StrategyProfile>),
}

impl NashOutcome {
    pub fn equilibria(&self) -> &[StrategyProfile] {
        match self {
            NashOutcome::Inconsistent => &[],
            NashOutcome::Equilibria(v) => v,
        }
    }

    pub fn is_inconsistent(&self) -> bool {
        matches!(self, NashOutcome::Inconsistent)
    }
}

/// No player gains strictly by flipping its own action.
pub fn is_weak_nash(tensor: &PayoffTensor, profile: &StrategyProfile) -> Option<bool> {
    let u = tensor.utilities(profile)?;
    for j in 0..tensor.players() {
        let dev = tensor.utilities(&profile.deviate(j))?;
        if u[j] < dev[j] {
            return Some(false);
        }
    }
    Some(true)
}

pub fn find_pure_nash(tensor: &PayoffTensor) -> NashOutcome {
    if !tensor.is_valid() {
        return NashOutcome::Inconsistent;
    }
    let eq = StrategyProfile::all(tensor.players())
        .filter(|p| is_weak_nash(tensor, p) == Some(true))
        .collect();
    NashOutcome::Equilibria(eq)
}
