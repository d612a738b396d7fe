use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::trial::{Outcome, TrialResult};

/// One bar segment: the share of a controller's trials with a given
/// dimension value that ended in `subcategory`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub controller: String,
    pub dimension: String,
    pub value: String,
    pub subcategory: String,
    pub count: usize,
    pub total: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllerSummary {
    pub controller: String,
    pub trials: usize,
    pub successes: usize,
    pub fingertip_stable: usize,
    pub enveloped: usize,
    pub joint_limited: usize,
    pub diverged: usize,
    pub success_rate: f64,
    /// Fraction of successes that kept the fingertip grasp.
    pub fingertip_share: f64,
    /// Over successful trials with an observable pose, degrees.
    pub mean_pose_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepReport {
    pub results: Vec<TrialResult>,
    pub aggregates: Vec<AggregateRow>,
    pub summaries: Vec<ControllerSummary>,
}

impl SweepReport {
    pub fn from_results(results: Vec<TrialResult>) -> Self {
        let (aggregates, summaries) = aggregate(&results);
        Self {
            results,
            aggregates,
            summaries,
        }
    }

    pub fn summary(&self, controller: &str) -> Option<&ControllerSummary> {
        self.summaries.iter().find(|s| s.controller == controller)
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        self.results.iter().filter(|r| r.outcome == outcome).count()
    }
}

fn rate(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

/// Numbers sort numerically, everything else lexically.
fn value_order(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    }
}

fn sorted_unique(mut v: Vec<String>) -> Vec<String> {
    v.sort_by(|a, b| value_order(a, b));
    v.dedup();
    v
}

const SUBCATEGORIES: [(&str, Option<Outcome>); 4] = [
    ("success", None),
    ("fingertip_stable", Some(Outcome::FingertipStable)),
    ("enveloped", Some(Outcome::Enveloped)),
    ("joint_limited", Some(Outcome::JointLimited)),
];

fn dimension_value(r: &TrialResult, dimension: &str) -> Option<String> {
    match dimension {
        "overall" => Some("all".to_string()),
        "object" => Some(r.spec.object.to_string()),
        "location" => Some(format!("{}", r.spec.location_mm)),
        "initial_pose" => r.spec.initial_distal_deg.map(|d| format!("{d}")),
        "friction" => Some(r.spec.friction.to_string()),
        _ => None,
    }
}

/// Per-controller breakdowns over every dimension. The output depends only
/// on the multiset of results, not their order.
pub fn aggregate(results: &[TrialResult]) -> (Vec<AggregateRow>, Vec<ControllerSummary>) {
    let controllers = sorted_unique(
        results
            .iter()
            .map(|r| r.spec.controller.to_string())
            .collect(),
    );
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for controller in &controllers {
        let mine: Vec<&TrialResult> = results
            .iter()
            .filter(|r| &r.spec.controller.to_string() == controller)
            .collect();
        for dimension in ["overall", "object", "location", "initial_pose", "friction"] {
            let values = sorted_unique(
                mine.iter()
                    .filter_map(|r| dimension_value(r, dimension))
                    .collect(),
            );
            for value in values {
                let cell: Vec<&&TrialResult> = mine
                    .iter()
                    .filter(|r| dimension_value(r, dimension).as_deref() == Some(&value))
                    .collect();
                for (name, outcome) in SUBCATEGORIES {
                    let count = cell
                        .iter()
                        .filter(|r| match outcome {
                            None => r.outcome.is_success(),
                            Some(o) => r.outcome == o,
                        })
                        .count();
                    rows.push(AggregateRow {
                        controller: controller.clone(),
                        dimension: dimension.to_string(),
                        value: value.clone(),
                        subcategory: name.to_string(),
                        count,
                        total: cell.len(),
                        rate: rate(count, cell.len()),
                    });
                }
            }
        }
        let count = |o: Outcome| mine.iter().filter(|r| r.outcome == o).count();
        let successes = mine.iter().filter(|r| r.outcome.is_success()).count();
        let mut poses: Vec<f64> = mine
            .iter()
            .filter(|r| r.outcome.is_success())
            .filter_map(|r| r.pose_change_deg)
            .collect();
        poses.sort_by(f64::total_cmp);
        let mean_pose_change =
            (!poses.is_empty()).then(|| poses.iter().sum::<f64>() / poses.len() as f64);
        summaries.push(ControllerSummary {
            controller: controller.clone(),
            trials: mine.len(),
            successes,
            fingertip_stable: count(Outcome::FingertipStable),
            enveloped: count(Outcome::Enveloped),
            joint_limited: count(Outcome::JointLimited),
            diverged: mine.iter().filter(|r| r.diverged).count(),
            success_rate: rate(successes, mine.len()),
            fingertip_share: rate(count(Outcome::FingertipStable), successes),
            mean_pose_change,
        });
    }
    (rows, summaries)
}
