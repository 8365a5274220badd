use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::Action;

/// One action per hospital, in scenario order.
///
/// Profiles are also addressed by index: bit `j` set means hospital `j`
/// redirects, so index 0 is all-Accept.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StrategyProfile(Vec<Action>);

impl StrategyProfile {
    pub fn new(actions: Vec<Action>) -> Self {
        Self(actions)
    }

    pub fn uniform(k: usize, action: Action) -> Self {
        Self(vec![action; k])
    }

    pub fn from_index(k: usize, index: usize) -> Self {
        Self(
            (0..k)
                .map(|j| {
                    if index >> j & 1 == 1 {
                        Action::Redirect
                    } else {
                        Action::Accept
                    }
                })
                .collect(),
        )
    }

    pub fn index(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .map(|(j, a)| usize::from(*a == Action::Redirect) << j)
            .sum()
    }

    /// All `2^k` profiles in index order.
    pub fn all(k: usize) -> impl Iterator<Item = StrategyProfile> {
        (0..1usize << k).map(move |i| StrategyProfile::from_index(k, i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    pub fn action(&self, j: usize) -> Action {
        self.0[j]
    }

    /// The profile with player `j`'s action flipped.
    pub fn deviate(&self, j: usize) -> Self {
        let mut v = self.0.clone();
        v[j] = v[j].flipped();
        Self(v)
    }

    /// Reorders players: `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&old| self.0[old]).collect())
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            write!(f, "{}", a.letter())?;
        }
        Ok(())
    }
}

impl FromStr for StrategyProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| match c.to_ascii_uppercase() {
                'A' => Ok(Action::Accept),
                'R' => Ok(Action::Redirect),
                other => Err(Error::validation("profile", format!("unknown action `{other}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(StrategyProfile)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for k in 0..5 {
            for (i, p) in StrategyProfile::all(k).enumerate() {
                assert_eq!(p.index(), i);
                assert_eq!(p.len(), k);
            }
        }
        assert_eq!(StrategyProfile::from_index(3, 0).to_string(), "AAA");
        assert_eq!(StrategyProfile::from_index(3, 0b110).to_string(), "ARR");
    }

    #[test]
    fn parse_and_deviate() {
        let p: StrategyProfile = "a, r, A".parse().unwrap();
        assert_eq!(p.to_string(), "ARA");
        assert_eq!(p.deviate(1).to_string(), "AAA");
        assert!("AXR".parse::<StrategyProfile>().is_err());
        assert_eq!(p.permuted(&[2, 1, 0]).to_string(), "ARA");
        assert_eq!(
            "ARR"
                .parse::<StrategyProfile>()
                .unwrap()
                .permuted(&[1, 0, 2])
                .to_string(),
            "RAR"
        );
    }
}
