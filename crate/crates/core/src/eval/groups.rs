use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::confusion::ConfusionMatrix;
use crate::dataset::ObjectGroup;
use crate::error::{Error, Result};

/// Outcome frequencies for one true label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupRow {
    pub label: String,
    pub group: ObjectGroup,
    pub correct: f64,
    /// Wrong label from the same object group.
    pub same_group: f64,
    pub wrong_group: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupAnalysis {
    pub rows: Vec<GroupRow>,
    /// Frequencies over all examples.
    pub correct: f64,
    pub same_group: f64,
    pub wrong_group: f64,
    /// Same-group errors over all errors; `None` without errors, written
    /// as "n/a".
    #[serde(with = "share")]
    pub within_group_error_share: Option<f64>,
}

impl GroupAnalysis {
    /// The within-group share as printed in reports ("n/a" without errors).
    pub fn share_display(&self) -> String {
        match self.within_group_error_share {
            Some(s) => format!("{s}"),
            None => "n/a".into(),
        }
    }
}

mod share {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Value(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(x) => Repr::Value(*x),
            None => Repr::Text("n/a".into()),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Value(x) => Ok(Some(x)),
            Repr::Text(t) if t == "n/a" => Ok(None),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected a number or \"n/a\", got `{t}`"
            ))),
        }
    }
}

/// Splits every row of the confusion matrix into correct, same-group and
/// wrong-group predictions. Rows without examples report zeros.
pub fn group_analysis(
    confusion: &ConfusionMatrix,
    groups: &HashMap<String, ObjectGroup>,
) -> Result<GroupAnalysis> {
    let group_of: Vec<ObjectGroup> = confusion
        .labels
        .iter()
        .map(|l| {
            groups
                .get(l)
                .copied()
                .ok_or_else(|| Error::config(format!("label `{l}` has no object group")))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(group_of.len());
    let (mut correct, mut same, mut wrong) = (0usize, 0usize, 0usize);
    for (t, row) in confusion.counts.iter().enumerate() {
        let mut c = [0usize; 3];
        for (p, &n) in row.iter().enumerate() {
            let k = if p == t {
                0
            } else if group_of[p] == group_of[t] {
                1
            } else {
                2
            };
            c[k] += n;
        }
        correct += c[0];
        same += c[1];
        wrong += c[2];
        let total: usize = c.iter().sum();
        let freq = |k: usize| {
            if total > 0 {
                c[k] as f64 / total as f64
            } else {
                0.0
            }
        };
        rows.push(GroupRow {
            label: confusion.labels[t].clone(),
            group: group_of[t],
            correct: freq(0),
            same_group: freq(1),
            wrong_group: freq(2),
        });
    }
    let total = (correct + same + wrong).max(1) as f64;
    let errors = same + wrong;
    Ok(GroupAnalysis {
        rows,
        correct: correct as f64 / total,
        same_group: same as f64 / total,
        wrong_group: wrong as f64 / total,
        within_group_error_share: (errors > 0).then(|| same as f64 / errors as f64),
    })
}
