//! Frozen-embedding linear classifier: multinomial logistic regression with
//! full-batch Adam, keeping the checkpoint with the best validation accuracy.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use super::metrics::mean_std;
use super::splits::{Split, SplitSet};
use crate::error::{AmlpError, Result};
use crate::graph::{FeatureMatrix, LabelVector};
use crate::model::AdamState;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    /// Epochs without a validation improvement before stopping.
    pub patience: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            epochs: 500,
            learning_rate: 0.01,
            patience: 100,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeModel {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl ProbeModel {
    fn logits(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.weights) + &self.bias
    }

    pub fn predict_rows(&self, x: &Array2<f64>) -> Vec<usize> {
        self.logits(x)
            .rows()
            .into_iter()
            .map(|r| {
                let mut best = 0;
                for (j, &v) in r.iter().enumerate() {
                    if v > r[best] {
                        best = j;
                    }
                }
                best
            })
            .collect()
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Vec<usize> {
        self.predict_rows(x.as_array())
    }
}

fn gather(x: &FeatureMatrix, idx: &[usize]) -> Array2<f64> {
    x.as_array().select(Axis(0), idx)
}

fn accuracy(model: &ProbeModel, x: &Array2<f64>, y: &[usize]) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let hits = model.predict_rows(x).iter().zip(y).filter(|(a, b)| a == b).count();
    hits as f64 / y.len() as f64
}

/// Fits on `split.train`, selects the epoch with the best validation accuracy
/// (latest on ties) and returns that checkpoint with its validation score.
pub fn fit_probe(
    x: &FeatureMatrix,
    labels: &LabelVector,
    split: &Split,
    cfg: &ProbeConfig,
) -> Result<(ProbeModel, f64)> {
    if labels.len() != x.n_rows() {
        return Err(AmlpError::shape("linear_probe", x.n_rows(), labels.len()));
    }
    let label_of = |idx: &[usize]| -> Result<Vec<usize>> {
        idx.iter()
            .map(|&i| {
                labels
                    .get(i)
                    .ok_or_else(|| AmlpError::invalid(format!("node {i} in split is unlabeled")))
            })
            .collect()
    };
    let y_train = label_of(&split.train)?;
    let y_val = label_of(&split.val)?;
    let y_test = label_of(&split.test)?;
    if y_train.is_empty() {
        return Err(AmlpError::invalid("empty training split"));
    }
    let n_classes = labels.n_classes();
    let mut present = vec![false; n_classes];
    y_train.iter().for_each(|&c| present[c] = true);
    if let Some(&c) = y_val.iter().chain(&y_test).find(|&&c| !present[c]) {
        return Err(AmlpError::invalid(format!("class {c} absent from the training split")));
    }

    let x_train = gather(x, &split.train);
    let x_val = gather(x, &split.val);
    let n = y_train.len() as f64;
    let mut model = ProbeModel {
        weights: Array2::zeros((x.n_cols(), n_classes)),
        bias: Array1::zeros(n_classes),
    };
    let mut opt_w = AdamState::new(model.weights.dim());
    let mut opt_b = AdamState::new((1, n_classes));
    let mut best = (f64::NEG_INFINITY, model.clone());
    let mut since_best = 0;

    for _ in 0..cfg.epochs {
        let mut probs = model.logits(&x_train);
        for mut row in probs.rows_mut() {
            let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            row.mapv_inplace(|v| (v - max).exp());
            let z = row.sum();
            row.mapv_inplace(|v| v / z);
        }
        for (mut row, &c) in probs.rows_mut().into_iter().zip(&y_train) {
            row[c] -= 1.0;
        }
        probs /= n;
        let grad_w = x_train.t().dot(&probs);
        let grad_b = probs.sum_axis(Axis(0)).insert_axis(Axis(0));
        opt_w.update(&mut model.weights, &grad_w, cfg.learning_rate);
        let mut b = model.bias.clone().insert_axis(Axis(0));
        opt_b.update(&mut b, &grad_b, cfg.learning_rate);
        model.bias = b.remove_axis(Axis(0));

        let val_acc = if y_val.is_empty() {
            accuracy(&model, &x_train, &y_train)
        } else {
            accuracy(&model, &x_val, &y_val)
        };
        if val_acc > best.0 {
            since_best = 0;
        } else {
            since_best += 1;
        }
        if val_acc >= best.0 {
            best = (val_acc, model.clone());
        }
        if since_best >= cfg.patience {
            break;
        }
    }
    Ok((best.1, best.0))
}

/// Test accuracy of the best-validation checkpoint.
pub fn linear_probe(x: &FeatureMatrix, labels: &LabelVector, split: &Split) -> Result<f64> {
    linear_probe_with(x, labels, split, &ProbeConfig::default())
}

fn linear_probe_with(x: &FeatureMatrix, labels: &LabelVector, split: &Split, cfg: &ProbeConfig) -> Result<f64> {
    let (model, _) = fit_probe(x, labels, split, cfg)?;
    let y_test: Vec<usize> = split.test.iter().map(|&i| labels.get(i).unwrap()).collect();
    Ok(accuracy(&model, &gather(x, &split.test), &y_test))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub ratios: [f64; 3],
    pub accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Probe accuracy over every split of `splits`.
pub fn evaluate_probe(
    x: &FeatureMatrix,
    labels: &LabelVector,
    splits: &SplitSet,
    cfg: &ProbeConfig,
) -> Result<ProbeRecord> {
    let accuracies = splits
        .splits
        .iter()
        .map(|s| linear_probe_with(x, labels, s, cfg))
        .collect::<Result<Vec<_>>>()?;
    let (mean, std) = mean_std(&accuracies);
    Ok(ProbeRecord {
        ratios: splits.ratios,
        accuracies,
        mean,
        std,
    })
}
