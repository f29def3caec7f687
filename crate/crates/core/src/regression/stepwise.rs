use serde::{Deserialize, Serialize};

use super::{ols, FeatureMatrix, RegressionError, RegressionFit, SelectionCriterion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(Self::Forward),
            "backward" => Ok(Self::Backward),
            other => Err(format!("unknown direction `{other}` (expected forward or backward)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Add,
    Remove,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub action: Action,
    pub column: String,
    /// Criterion of the model after this step.
    pub criterion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepwiseTrace {
    pub direction: Direction,
    pub criterion: SelectionCriterion,
    /// Criterion of the starting model.
    pub start: f64,
    pub steps: Vec<Step>,
    pub final_fit: RegressionFit,
}

/// Greedy criterion-driven selection.
///
/// Forward starts from the intercept-only model and adds the best column
/// while that lowers the criterion; backward starts from every column and
/// removes the best one while that lowers it. Equal candidates resolve to
/// the lexicographically smallest column name.
pub fn stepwise(
    m: &FeatureMatrix,
    direction: Direction,
    criterion: SelectionCriterion,
) -> Result<StepwiseTrace, RegressionError> {
    let mut current: Vec<String> = match direction {
        Direction::Forward => Vec::new(),
        Direction::Backward => m.names().to_vec(),
    };
    let mut fit = ols(m, &current)?;
    let start = fit.criterion(criterion);
    let mut steps = Vec::new();

    loop {
        let mut pool: Vec<String> = match direction {
            Direction::Forward => m
                .names()
                .iter()
                .filter(|n| !current.contains(n))
                .cloned()
                .collect(),
            Direction::Backward => current.clone(),
        };
        pool.sort();

        let mut best: Option<(String, RegressionFit)> = None;
        for col in pool {
            let trial: Vec<String> = match direction {
                Direction::Forward => {
                    let mut t = current.clone();
                    t.push(col.clone());
                    t
                }
                Direction::Backward => current.iter().filter(|c| **c != col).cloned().collect(),
            };
            let candidate = ols(m, &trial)?;
            let wins = best
                .as_ref()
                .is_none_or(|(_, b)| candidate.criterion(criterion) < b.criterion(criterion));
            if wins {
                best = Some((col, candidate));
            }
        }

        match best {
            Some((col, candidate)) if candidate.criterion(criterion) < fit.criterion(criterion) => {
                let action = match direction {
                    Direction::Forward => Action::Add,
                    Direction::Backward => Action::Remove,
                };
                steps.push(Step {
                    action,
                    column: col,
                    criterion: candidate.criterion(criterion),
                });
                current = candidate.included.clone();
                fit = candidate;
            }
            _ => break,
        }
    }

    Ok(StepwiseTrace {
        direction,
        criterion,
        start,
        steps,
        final_fit: fit,
    })
}
