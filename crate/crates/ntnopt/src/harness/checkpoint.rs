//! Versioned policy checkpoints: the per-hour learner states, the resolved
//! hyperparameters, and the arm grid they index into.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bandit::{Hyperparams, PolicyState};
use crate::config::ArmGridConfig;
use crate::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyCheckpoint {
    pub version: u32,
    /// One learner per hour of day when true; a single sequential learner
    /// otherwise.
    pub per_hour_contexts: bool,
    pub hyper: Hyperparams,
    pub arms: ArmGridConfig,
    /// 24 states in per-hour mode (indexed by hour), 1 otherwise.
    pub states: Vec<PolicyState>,
    /// Hours whose training stream completed; training resumes at the first
    /// incomplete hour.
    pub completed_hours: Vec<bool>,
}

impl PolicyCheckpoint {
    /// Learner state responsible for the given hour.
    pub fn state_for_hour(&self, hour: u8) -> &PolicyState {
        if self.per_hour_contexts {
            &self.states[hour as usize]
        } else {
            &self.states[0]
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text =
            serde_json::to_string(self).map_err(|e| Error::format(path, e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: PolicyCheckpoint =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::format(
                path,
                format!("checkpoint version {} unsupported", ckpt.version),
            ));
        }
        let expected = if ckpt.per_hour_contexts { 24 } else { 1 };
        if ckpt.states.len() != expected || ckpt.completed_hours.len() != 24 {
            return Err(Error::format(path, "checkpoint state shape mismatch"));
        }
        Ok(ckpt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config;

    #[test]
    fn save_load_round_trip() {
        let hyper = Hyperparams::defaults(135, 450);
        let states: Vec<PolicyState> = (0..24)
            .map(|_| PolicyState::new_uniform(135, hyper).unwrap())
            .collect();
        let ckpt = PolicyCheckpoint {
            version: CHECKPOINT_VERSION,
            per_hour_contexts: true,
            hyper,
            arms: config::desk_scale_arm_grid(),
            states,
            completed_hours: vec![false; 24],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.json");
        ckpt.save(&path).unwrap();
        let back = PolicyCheckpoint::load(&path).unwrap();
        assert_eq!(back, ckpt);
        assert_eq!(back.state_for_hour(7).n_arms(), 135);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let hyper = Hyperparams::defaults(4, 10);
        let ckpt = PolicyCheckpoint {
            version: CHECKPOINT_VERSION,
            per_hour_contexts: true,
            hyper,
            arms: config::desk_scale_arm_grid(),
            states: vec![PolicyState::new_uniform(4, hyper).unwrap()], // wrong count
            completed_hours: vec![false; 24],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("policy.json");
        ckpt.save(&path).unwrap();
        assert!(PolicyCheckpoint::load(&path).is_err());
    }
}
