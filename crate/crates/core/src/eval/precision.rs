use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use super::stats::BoxSummary;
use crate::{Error, Result};

/// Label used for judgments that name no model.
pub const DEFAULT_MODEL: &str = "model";

/// Judges' answers for one intrusion task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    #[serde(deserialize_with = "string_or_number")]
    pub task_id: String,
    pub presented: Vec<String>,
    pub intruder: String,
    /// One selected id per judge.
    pub selections: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
}

fn string_or_number<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Id {
        S(String),
        N(serde_json::Number),
    }
    Ok(match Id::deserialize(d)? {
        Id::S(s) => s,
        Id::N(n) => n.to_string(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgmentSet {
    pub tasks: Vec<Judgment>,
}

impl JudgmentSet {
    /// Every task must present its intruder and carry at least one selection.
    pub fn new(tasks: Vec<Judgment>) -> Result<Self> {
        for t in &tasks {
            if !t.presented.contains(&t.intruder) {
                return Err(Error::InvalidParameter(format!(
                    "task {}: intruder {:?} is not presented",
                    t.task_id, t.intruder
                )));
            }
            if t.selections.is_empty() {
                return Err(Error::InvalidParameter(format!("task {}: no judges", t.task_id)));
            }
        }
        Ok(Self { tasks })
    }

    /// JSON lines, one task per line.
    pub fn read(path: &Path) -> Result<Self> {
        Self::new(super::read_json_lines(path)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskPrecision {
    pub task_id: String,
    pub model: String,
    /// Judgments kept after dropping selections outside the presented ids.
    pub judges: usize,
    pub correct: usize,
    pub precision: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionReport {
    pub tasks: Vec<TaskPrecision>,
    pub dropped_judgments: usize,
    /// Tasks left with no valid judgment; they have no precision.
    pub skipped_tasks: Vec<String>,
    pub warnings: Vec<String>,
    pub summary: BTreeMap<String, BoxSummary>,
}

impl PrecisionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("task_id,model,judges,correct,precision\n");
        for t in &self.tasks {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                super::csv_field(&t.task_id),
                super::csv_field(&t.model),
                t.judges,
                t.correct,
                t.precision
            ));
        }
        out
    }
}

/// Fraction of judges who picked the true intruder, per task, with a box-plot
/// summary per model label.
pub fn model_precision(judgments: &JudgmentSet) -> PrecisionReport {
    let mut tasks = Vec::new();
    let mut warnings = Vec::new();
    let mut skipped_tasks = Vec::new();
    let mut dropped_judgments = 0;
    for t in &judgments.tasks {
        let mut judges = 0;
        let mut correct = 0;
        for (j, s) in t.selections.iter().enumerate() {
            if !t.presented.contains(s) {
                dropped_judgments += 1;
                warnings.push(format!(
                    "task {}: judge {j} selected {s:?}, which was not presented; dropped",
                    t.task_id
                ));
                continue;
            }
            judges += 1;
            correct += (*s == t.intruder) as usize;
        }
        if judges == 0 {
            warnings.push(format!("task {}: no valid judgments; skipped", t.task_id));
            skipped_tasks.push(t.task_id.clone());
            continue;
        }
        tasks.push(TaskPrecision {
            task_id: t.task_id.clone(),
            model: t.model.clone().unwrap_or_else(|| DEFAULT_MODEL.to_owned()),
            judges,
            correct,
            precision: correct as f64 / judges as f64,
        });
    }
    let mut by_model: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for t in &tasks {
        by_model.entry(t.model.clone()).or_default().push(t.precision);
    }
    let summary = by_model
        .into_iter()
        .filter_map(|(m, v)| BoxSummary::new(&v).map(|b| (m, b)))
        .collect();
    PrecisionReport {
        tasks,
        dropped_judgments,
        skipped_tasks,
        warnings,
        summary,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn task(id: &str, correct: usize, wrong: usize) -> Judgment {
        let presented: Vec<String> = (0..8).map(|i| format!("d{i}")).collect();
        let mut selections = vec!["d3".to_string(); correct];
        selections.extend(vec!["d0".to_string(); wrong]);
        Judgment {
            task_id: id.into(),
            presented,
            intruder: "d3".into(),
            selections,
            model: None,
        }
    }

    #[test]
    fn fractions() {
        let set = JudgmentSet::new(vec![task("a", 5, 0), task("b", 0, 4), task("c", 9, 6)]).unwrap();
        let r = model_precision(&set);
        let p: Vec<f64> = r.tasks.iter().map(|t| t.precision).collect();
        assert_eq!(p, vec![1.0, 0.0, 0.6]);
        assert_eq!(r.summary[DEFAULT_MODEL].median, 0.6);
    }

    #[test]
    fn unpresented_selection_is_dropped() {
        let mut t = task("a", 2, 1);
        t.selections.push("elsewhere".into());
        let r = model_precision(&JudgmentSet::new(vec![t]).unwrap());
        assert_eq!(r.dropped_judgments, 1);
        assert_eq!(r.tasks[0].judges, 3);
        assert_eq!(r.warnings.len(), 1);
    }

    #[test]
    fn invalid_sets_are_rejected() {
        let mut t = task("a", 1, 0);
        t.intruder = "zz".into();
        assert!(JudgmentSet::new(vec![t]).is_err());
        assert!(JudgmentSet::new(vec![task("b", 0, 0)]).is_err());
    }

    #[test]
    fn numeric_task_ids_parse() {
        let j: Judgment = serde_json::from_str(
            r#"{"task_id": 7, "presented": ["a","b"], "intruder": "b", "selections": ["b"], "model": "hdtm"}"#,
        )
        .unwrap();
        assert_eq!(j.task_id, "7");
        assert_eq!(j.model.as_deref(), Some("hdtm"));
    }
}
