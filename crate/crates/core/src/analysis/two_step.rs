//! Closed-form description of the two-step exodus from `{-1, 1}` on the line.

use crate::configuration::Configuration;
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::process::ChainState;

/// Outcome of the first two arrivals `z1, z2` from the start `{-1, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum TwoStepOutcome {
    /// `-1` leaves first and `1` second, so `τ = 2` and `ᾱ = (-1, 0)`.
    MinusThenPlus,
    Other,
}

/// Predicts the outcome without simulating: `MinusThenPlus` iff
/// `z1 ∈ (0,1)` and `z2 ∈ (2z1-1, (z1+1)/2)`, or
/// `z1 ∈ (1,3)` and `z2 ∈ ((z1+1)/2, 2z1-1)`.
pub fn two_step_region(z1: f64, z2: f64) -> TwoStepOutcome {
    let lo = 2.0 * z1 - 1.0;
    let mid = 0.5 * (z1 + 1.0);
    let hit = (z1 > 0.0 && z1 < 1.0 && z2 > lo && z2 < mid) || (z1 > 1.0 && z1 < 3.0 && z2 > mid && z2 < lo);
    if hit {
        TwoStepOutcome::MinusThenPlus
    } else {
        TwoStepOutcome::Other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TwoStepReplay {
    pub outcome: TwoStepOutcome,
    pub near_tie: bool,
}

/// Replays the arrivals through the chain. `None` when either arrival is not
/// in the Keep set at its step.
pub fn two_step_replay(z1: f64, z2: f64) -> Result<Option<TwoStepReplay>> {
    let start = Configuration::from_points(&[[-1.0], [1.0]])?;
    let mut state = ChainState::new(start, ConvexBody::full_space(1)?)?;
    let first = match state.step_jante_with_point(&[z1]) {
        Ok(r) => r,
        Err(Error::PointNotInKeep) => return Ok(None),
        Err(e) => return Err(e),
    };
    let second = match state.step_jante_with_point(&[z2]) {
        Ok(r) => r,
        Err(Error::PointNotInKeep) => return Ok(None),
        Err(e) => return Err(e),
    };
    let outcome = if first.alpha == -1 && second.alpha == 0 {
        TwoStepOutcome::MinusThenPlus
    } else {
        TwoStepOutcome::Other
    };
    Ok(Some(TwoStepReplay {
        outcome,
        near_tie: first.near_tie || second.near_tie,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        assert_eq!(two_step_region(0.5, 0.6), TwoStepOutcome::MinusThenPlus);
        assert_eq!(two_step_region(2.0, 2.9), TwoStepOutcome::MinusThenPlus);
        assert_eq!(two_step_region(0.5, 0.9), TwoStepOutcome::Other);
        assert_eq!(two_step_replay(0.5, 0.6).unwrap().unwrap().outcome, TwoStepOutcome::MinusThenPlus);
        assert_eq!(two_step_replay(2.0, 2.9).unwrap().unwrap().outcome, TwoStepOutcome::MinusThenPlus);
        assert_eq!(two_step_replay(0.5, 0.9).unwrap().unwrap().outcome, TwoStepOutcome::Other);
    }

    #[test]
    fn illegal_arrivals() {
        assert_eq!(two_step_replay(3.5, 0.0).unwrap(), None);
        // after z1 = 0.5 the configuration is {0.5, 1} and Keep is (-0.25, 1.75)
        assert_eq!(two_step_replay(0.5, 5.0).unwrap(), None);
    }

    #[test]
    fn grid_agreement() {
        let mut legal = 0;
        for i in 0..300 {
            for j in 0..300 {
                let z1 = -3.0 + 6.0 * (i as f64 + 0.37) / 300.0;
                let z2 = -3.0 + 6.0 * (j as f64 + 0.61) / 300.0;
                if let Some(r) = two_step_replay(z1, z2).unwrap() {
                    legal += 1;
                    if !r.near_tie {
                        assert_eq!(r.outcome, two_step_region(z1, z2), "({z1}, {z2})");
                    }
                }
            }
        }
        assert!(legal > 10_000);
    }
}
