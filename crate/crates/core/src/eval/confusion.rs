use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts indexed by (true label, predicted label) in a fixed label order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    /// From label indices into `labels`.
    pub fn from_indices(truth: &[usize], predicted: &[usize], labels: &[String]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::domain(format!(
                "{} true labels but {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let n = labels.len();
        let mut counts = vec![vec![0; n]; n];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= n || p >= n {
                return Err(Error::domain(format!(
                    "label index {} outside the {n} known labels",
                    t.max(p)
                )));
            }
            counts[t][p] += 1;
        }
        Ok(Self {
            labels: labels.to_vec(),
            counts,
        })
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    /// `trace / total`, computed as correct over all like the LOOCV accuracy.
    pub fn accuracy(&self) -> f64 {
        self.trace() as f64 / self.total() as f64
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Fraction of each class predicted correctly; `None` for empty rows.
    pub fn per_class_accuracy(&self) -> Vec<Option<f64>> {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let n: usize = row.iter().sum();
                (n > 0).then(|| row[i] as f64 / n as f64)
            })
            .collect()
    }

    /// CSV with a `true\predicted` corner cell, one row per true label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for l in &self.labels {
            out.push(',');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.labels.iter().zip(&self.counts) {
            out.push_str(l);
            for c in row {
                out.push_str(&format!(",{c}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Confusion matrix from label names; names outside `label_order` are an error.
pub fn confusion<S: AsRef<str>>(
    truth: &[S],
    predicted: &[S],
    label_order: &[String],
) -> Result<ConfusionMatrix> {
    let index = |s: &S| {
        label_order
            .iter()
            .position(|l| l == s.as_ref())
            .ok_or_else(|| Error::domain(format!("unknown label `{}`", s.as_ref())))
    };
    let t = truth.iter().map(index).collect::<Result<Vec<_>>>()?;
    let p = predicted.iter().map(index).collect::<Result<Vec<_>>>()?;
    ConfusionMatrix::from_indices(&t, &p, label_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn perfect_predictions_are_diagonal() {
        let l = labels(&["a", "b", "c"]);
        let t = ["a", "b", "b", "c", "c", "c"];
        let m = confusion(&t, &t, &l).unwrap();
        assert_eq!(m.counts, vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 3]]);
        assert_eq!(m.row_sums(), [1, 2, 3]);
        assert_eq!(m.accuracy(), 1.0);
    }

    #[test]
    fn six_predictions_two_errors() {
        let l = labels(&["a", "b"]);
        let m = confusion(
            &["a", "a", "a", "b", "b", "b"],
            &["a", "b", "a", "b", "a", "b"],
            &l,
        )
        .unwrap();
        assert_eq!(m.trace(), 4);
        assert_eq!(m.accuracy(), 4.0 / 6.0);
        assert_eq!(m.per_class_accuracy(), [Some(2.0 / 3.0), Some(2.0 / 3.0)]);
    }

    #[test]
    fn nine_classes_thirty_each() {
        let l: Vec<String> = (0..9).map(|i| format!("o{i}")).collect();
        let truth: Vec<usize> = (0..270).map(|i| i / 30).collect();
        let pred: Vec<usize> = truth
            .iter()
            .map(|&t| (t + usize::from(t % 4 == 0)) % 9)
            .collect();
        let m = ConfusionMatrix::from_indices(&truth, &pred, &l).unwrap();
        assert!(m.row_sums().iter().all(|&s| s == 30));
        assert_eq!(m.total(), 270);
    }

    #[test]
    fn unknown_labels_and_lengths() {
        let l = labels(&["a", "b"]);
        assert!(confusion(&["a", "z"], &["a", "b"], &l).is_err());
        assert!(confusion(&["a"], &["a", "b"], &l).is_err());
        assert!(ConfusionMatrix::from_indices(&[0], &[2], &l).is_err());
    }

    #[test]
    fn csv_layout() {
        let l = labels(&["a", "b"]);
        let m = confusion(&["a", "b"], &["b", "b"], &l).unwrap();
        assert_eq!(m.to_csv(), "true\\predicted,a,b\na,0,1\nb,0,1\n");
    }
}
