//! Defect prediction: standardized L2 logistic regression trained by
//! deterministic full-batch gradient descent, with classification measures
//! (threshold 0.5, rank-based AUC) and effort-aware measures over
//! churn-density orderings.

use serde::Serialize;

use crate::error::PredictError;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub l2: f64,
    pub max_iters: usize,
    /// Stop when the gradient's infinity norm falls below this.
    pub grad_tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.1,
            l2: 0.01,
            max_iters: 2000,
            grad_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Model {
    /// Probability that `row` is buggy.
    pub fn score(&self, row: &[f64]) -> f64 {
        let z: f64 = self
            .weights
            .iter()
            .zip(row.iter().zip(self.means.iter().zip(self.stds.iter())))
            .map(|(w, (x, (m, s)))| w * (x - m) / s)
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Training objective on standardized rows: mean logistic loss plus
/// (l2/2)·||w||² (the intercept is not penalized). Returns the loss and its
/// gradient in the weights and the intercept.
pub fn loss_and_grad(
    x_std: &[Vec<f64>],
    y: &[bool],
    weights: &[f64],
    bias: f64,
    l2: f64,
) -> (f64, Vec<f64>, f64) {
    let n = x_std.len();
    let dim = weights.len();
    let mut loss = 0.0;
    let mut grad_w = vec![0.0; dim];
    let mut grad_b = 0.0;
    for (row, &label) in x_std.iter().zip(y.iter()) {
        let z: f64 = row.iter().zip(weights.iter()).map(|(x, w)| x * w).sum::<f64>() + bias;
        let t = if label { 1.0 } else { 0.0 };
        loss += softplus(z) - t * z;
        let residual = sigmoid(z) - t;
        for (g, x) in grad_w.iter_mut().zip(row.iter()) {
            *g += residual * x;
        }
        grad_b += residual;
    }
    let nf = n as f64;
    loss /= nf;
    grad_b /= nf;
    for (g, w) in grad_w.iter_mut().zip(weights.iter()) {
        *g = *g / nf + l2 * w;
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad_w, grad_b)
}

/// Standardizes a row with the model's training statistics.
pub fn standardize_rows(x: &[Vec<f64>], means: &[f64], stds: &[f64]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|row| {
            row.iter()
                .zip(means.iter().zip(stds.iter()))
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect()
}

/// Column means and population standard deviations; zero deviations become 1
/// so constant columns standardize to zero (and keep zero weight).
pub fn feature_statistics(x: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = x.len() as f64;
    let dim = x.first().map(Vec::len).unwrap_or(0);
    let mut means = vec![0.0; dim];
    for row in x {
        for (m, v) in means.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    for m in &mut means {
        *m /= n;
    }
    let mut vars = vec![0.0; dim];
    for row in x {
        for ((v, m), var) in row.iter().zip(means.iter()).zip(vars.iter_mut()) {
            *var += (v - m) * (v - m);
        }
    }
    let stds = vars
        .iter()
        .map(|v| {
            let s = (v / n).sqrt();
            if s == 0.0 {
                1.0
            } else {
                s
            }
        })
        .collect();
    (means, stds)
}

/// Trains on raw feature rows. Fully deterministic: fixed zero
/// initialization, full-batch updates, no randomness.
pub fn train(x: &[Vec<f64>], y: &[bool], cfg: &TrainConfig) -> Result<Model, PredictError> {
    if x.is_empty() {
        return Err(PredictError::ShapeMismatch("no training rows".into()));
    }
    if x.len() != y.len() {
        return Err(PredictError::ShapeMismatch(format!(
            "{} feature rows but {} labels",
            x.len(),
            y.len()
        )));
    }
    let dim = x[0].len();
    for (row_idx, row) in x.iter().enumerate() {
        if row.len() != dim {
            return Err(PredictError::ShapeMismatch(format!(
                "row {row_idx} has {} columns, expected {dim}",
                row.len()
            )));
        }
        for (col, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(PredictError::NonFiniteFeature { row: row_idx, col });
            }
        }
    }
    let positives = y.iter().filter(|&&l| l).count();
    if positives == 0 || positives == y.len() {
        return Err(PredictError::SingleClassTraining);
    }

    let (means, stds) = feature_statistics(x);
    let x_std = standardize_rows(x, &means, &stds);
    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    for _ in 0..cfg.max_iters {
        let (_, grad_w, grad_b) = loss_and_grad(&x_std, y, &weights, bias, cfg.l2);
        let inf_norm = grad_w
            .iter()
            .map(|g| g.abs())
            .fold(grad_b.abs(), f64::max);
        if inf_norm < cfg.grad_tol {
            break;
        }
        for (w, g) in weights.iter_mut().zip(grad_w.iter()) {
            *w -= cfg.learning_rate * g;
        }
        bias -= cfg.learning_rate * grad_b;
    }
    Ok(Model {
        weights,
        bias,
        means,
        stds,
    })
}

pub fn predict(model: &Model, x: &[Vec<f64>]) -> Vec<f64> {
    x.iter().map(|row| model.score(row)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
}

/// Threshold classification plus rank-based AUC (average ranks for ties).
/// Precision is 0 when nothing is predicted positive; F1 is 0 when
/// precision + recall is 0; AUC is 0.5 when a class is absent.
pub fn classification_metrics(scores: &[f64], labels: &[bool], threshold: f64) -> ClassificationReport {
    let (mut tp, mut fp, mut r#fn) = (0u64, 0u64, 0u64);
    for (&s, &l) in scores.iter().zip(labels.iter()) {
        let predicted = s >= threshold;
        match (predicted, l) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => r#fn += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    };
    let recall = if tp + r#fn == 0 {
        0.0
    } else {
        tp as f64 / (tp + r#fn) as f64
    };
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassificationReport {
        precision,
        recall,
        f1,
        auc: rank_auc(scores, labels),
    }
}

fn rank_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return 0.5;
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("scores are finite"));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && scores[idx[j + 1]] == scores[idx[i]] {
            j += 1;
        }
        // 1-based ranks, ties get the average of their rank run.
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    let pos_rank_sum: f64 = ranks
        .iter()
        .zip(labels.iter())
        .filter(|(_, &l)| l)
        .map(|(r, _)| r)
        .sum();
    (pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0) / (n_pos as f64 * n_neg as f64)
}

/// What counts as one unit of found defect mass in effort curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EffortUnit {
    /// Each buggy commit counts 1.
    Commit,
    /// Each buggy commit counts its churn in lines.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffortReport {
    pub recall_at_20_effort: f64,
    pub effort_at_20_recall: f64,
    pub p_opt: f64,
}

fn defect_value(label: bool, churn: u64, unit: EffortUnit) -> f64 {
    match (label, unit) {
        (false, _) => 0.0,
        (true, EffortUnit::Commit) => 1.0,
        (true, EffortUnit::Line) => churn as f64,
    }
}

/// Indices ordered by `density` descending; equal densities keep original
/// order (stable).
fn density_order(density: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..density.len()).collect();
    idx.sort_by(|&a, &b| {
        density[b]
            .partial_cmp(&density[a])
            .expect("densities are finite")
    });
    idx
}

/// Area under the cumulative-defect (Alberg) curve for one inspection order:
/// x is the cumulative churn fraction, y the cumulative defect-value
/// fraction, trapezoidal from (0, 0).
fn alberg_area(order: &[usize], values: &[f64], churn: &[u64], total_churn: f64, total_value: f64) -> f64 {
    let mut area = 0.0;
    let mut x_prev = 0.0;
    let mut y_prev = 0.0;
    let mut cum_churn = 0u64;
    let mut cum_value = 0.0;
    for &i in order {
        cum_churn += churn[i];
        cum_value += values[i];
        let x = cum_churn as f64 / total_churn;
        let y = if total_value == 0.0 { 0.0 } else { cum_value / total_value };
        area += (x - x_prev) * (y + y_prev) / 2.0;
        x_prev = x;
        y_prev = y;
    }
    area
}

/// Effort-aware evaluation. Commits are ranked by predicted density
/// (score over churn + 1). Reported:
///
/// * recall at 20% effort: defect fraction found when cumulative churn first
///   reaches 20% of the total;
/// * effort at 20% recall: churn fraction spent when 20% of the defect mass
///   (ceiling of the buggy-commit count for the commit unit) is found;
/// * P_opt: `1 - (area(optimal) - area(model)) / (area(optimal) - area(worst))`
///   where optimal/worst rank by true density descending/ascending.
pub fn effort_metrics(
    scores: &[f64],
    labels: &[bool],
    churn: &[u64],
    unit: EffortUnit,
) -> Result<EffortReport, PredictError> {
    if scores.len() != labels.len() || scores.len() != churn.len() {
        return Err(PredictError::ShapeMismatch(format!(
            "{} scores, {} labels, {} churn entries",
            scores.len(),
            labels.len(),
            churn.len()
        )));
    }
    let total_churn: u64 = churn.iter().sum();
    if total_churn == 0 {
        return Err(PredictError::ZeroTotalChurn);
    }
    let total_churn_f = total_churn as f64;
    let values: Vec<f64> = labels
        .iter()
        .zip(churn.iter())
        .map(|(&l, &c)| defect_value(l, c, unit))
        .collect();
    let total_value: f64 = values.iter().sum();

    let predicted_density: Vec<f64> = scores
        .iter()
        .zip(churn.iter())
        .map(|(s, &c)| s / (c + 1) as f64)
        .collect();
    let true_density: Vec<f64> = values
        .iter()
        .zip(churn.iter())
        .map(|(v, &c)| v / (c + 1) as f64)
        .collect();

    let model_order = density_order(&predicted_density);
    let optimal_order = density_order(&true_density);
    let worst_order = {
        let mut idx: Vec<usize> = (0..true_density.len()).collect();
        idx.sort_by(|&a, &b| {
            true_density[a]
                .partial_cmp(&true_density[b])
                .expect("densities are finite")
        });
        idx
    };

    // Recall at 20% effort.
    let recall_at_20_effort = if total_value == 0.0 {
        0.0
    } else {
        let budget = 0.2 * total_churn_f;
        let mut cum_churn = 0u64;
        let mut cum_value = 0.0;
        for &i in &model_order {
            cum_churn += churn[i];
            cum_value += values[i];
            if cum_churn as f64 >= budget {
                break;
            }
        }
        cum_value / total_value
    };

    // Effort at 20% recall.
    let effort_at_20_recall = if total_value == 0.0 {
        0.0
    } else {
        let target = match unit {
            EffortUnit::Commit => (0.2 * total_value).ceil(),
            EffortUnit::Line => 0.2 * total_value,
        };
        let mut cum_churn = 0u64;
        let mut cum_value = 0.0;
        let mut spent = 1.0;
        for &i in &model_order {
            cum_churn += churn[i];
            cum_value += values[i];
            if cum_value >= target {
                spent = cum_churn as f64 / total_churn_f;
                break;
            }
        }
        spent
    };

    let area_m = alberg_area(&model_order, &values, churn, total_churn_f, total_value);
    let area_o = alberg_area(&optimal_order, &values, churn, total_churn_f, total_value);
    let area_w = alberg_area(&worst_order, &values, churn, total_churn_f, total_value);
    let denom = area_o - area_w;
    let p_opt = if denom == 0.0 {
        // Every ordering is equally good; the model cannot be suboptimal.
        1.0
    } else {
        1.0 - (area_o - area_m) / denom
    };

    Ok(EffortReport {
        recall_at_20_effort,
        effort_at_20_recall,
        p_opt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // Frozen evaluation fixture: six commits with known measures.
    const SCORES: [f64; 6] = [0.9, 0.8, 0.6, 0.4, 0.3, 0.1];
    const LABELS: [bool; 6] = [true, false, true, false, true, false];
    const CHURN: [u64; 6] = [10, 40, 20, 10, 5, 15];

    #[test]
    fn classification_measures_match_hand_computation() {
        let rep = classification_metrics(&SCORES, &LABELS, 0.5);
        assert!((rep.precision - 2.0 / 3.0).abs() < 1e-12);
        assert!((rep.recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((rep.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((rep.auc - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn effort_measures_match_hand_computation() {
        let rep = effort_metrics(&SCORES, &LABELS, &CHURN, EffortUnit::Commit).unwrap();
        // Density order: c1, c5, c4, c3, c2, c6; 20% of 100 churn reached at
        // c4 with 2 of 3 buggy commits found.
        assert!((rep.recall_at_20_effort - 2.0 / 3.0).abs() < 1e-12);
        // ceil(0.2 * 3) = 1 buggy commit, found at c1 after 10 churn.
        assert!((rep.effort_at_20_recall - 0.10).abs() < 1e-12);
        // Areas: model 0.825, optimal 0.875, worst 0.125.
        assert!((rep.p_opt - 14.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_and_worst_orderings_bound_p_opt() {
        // Scores proportional to true density: the model IS the optimal
        // ordering, so P_opt is exactly 1.
        let labels = [true, false, true];
        let churn = [4u64, 4, 9];
        let scores = [0.9, 0.1, 0.5]; // densities 0.18, 0.02, 0.05
        let rep = effort_metrics(&scores, &labels, &churn, EffortUnit::Commit).unwrap();
        assert_eq!(rep.p_opt, 1.0);
        // Scores anti-proportional to true density produce the worst
        // ordering (c2, c3, c1): P_opt exactly 0.
        let scores_rev = [0.05, 0.5, 0.2]; // densities 0.01, 0.1, 0.02
        let rep = effort_metrics(&scores_rev, &labels, &churn, EffortUnit::Commit).unwrap();
        assert!(rep.p_opt.abs() < 1e-12, "{}", rep.p_opt);
    }

    #[test]
    fn zero_total_churn_is_rejected() {
        let err = effort_metrics(&[0.5], &[true], &[0], EffortUnit::Commit).unwrap_err();
        assert!(matches!(err, PredictError::ZeroTotalChurn));
    }

    #[test]
    fn tied_scores_average_to_half_auc() {
        let scores = [0.5, 0.5, 0.5, 0.5];
        let labels = [true, false, true, false];
        let rep = classification_metrics(&scores, &labels, 0.5);
        assert_eq!(rep.auc, 0.5);
    }

    #[test]
    fn training_separates_separable_data() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![if i < 20 { i as f64 } else { 100.0 + i as f64 }])
            .collect();
        let y: Vec<bool> = (0..40).map(|i| i >= 20).collect();
        let model = train(&x, &y, &TrainConfig::default()).unwrap();
        assert!(model.weights[0] > 0.0);
        assert!(model.score(&[0.0]) < 0.5);
        assert!(model.score(&[150.0]) > 0.5);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            train(&x, &[true, true], &TrainConfig::default()),
            Err(PredictError::SingleClassTraining)
        ));
        assert!(matches!(
            train(&x, &[true], &TrainConfig::default()),
            Err(PredictError::ShapeMismatch(_))
        ));
        let bad = vec![vec![1.0], vec![f64::NAN]];
        assert!(matches!(
            train(&bad, &[true, false], &TrainConfig::default()),
            Err(PredictError::NonFiniteFeature { row: 1, col: 0 })
        ));
        assert!(matches!(
            train(&[], &[], &TrainConfig::default()),
            Err(PredictError::ShapeMismatch(_))
        ));
    }

    #[test]
    fn constant_features_get_zero_weight() {
        let x = vec![vec![5.0, 1.0], vec![5.0, 2.0], vec![5.0, 3.0], vec![5.0, 4.0]];
        let y = vec![false, false, true, true];
        let model = train(&x, &y, &TrainConfig::default()).unwrap();
        assert_eq!(model.weights[0], 0.0);
        assert_eq!(model.stds[0], 1.0);
    }

    #[test]
    fn intercept_only_training_recovers_the_base_rate() {
        // All-zero features: only the intercept can move. With base rate
        // 1/4, sigmoid(bias) must converge to 0.25.
        let x = vec![vec![0.0]; 8];
        let y = vec![true, false, false, false, true, false, false, false];
        let cfg = TrainConfig {
            learning_rate: 0.5,
            l2: 0.01,
            max_iters: 20000,
            grad_tol: 1e-12,
        };
        let model = train(&x, &y, &cfg).unwrap();
        assert!((sigmoid(model.bias) - 0.25).abs() < 1e-6, "{}", model.bias);
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let x_std = vec![
            vec![0.3, -1.2],
            vec![-0.7, 0.4],
            vec![1.1, 0.9],
            vec![-0.2, -0.5],
        ];
        let y = vec![true, false, true, false];
        let w = vec![0.35, -0.8];
        let b = 0.15;
        let l2 = 0.01;
        let (_, grad_w, grad_b) = loss_and_grad(&x_std, &y, &w, b, l2);
        let h = 1e-5;
        for j in 0..w.len() {
            let mut wp = w.clone();
            wp[j] += h;
            let mut wm = w.clone();
            wm[j] -= h;
            let (lp, _, _) = loss_and_grad(&x_std, &y, &wp, b, l2);
            let (lm, _, _) = loss_and_grad(&x_std, &y, &wm, b, l2);
            let fd = (lp - lm) / (2.0 * h);
            let rel = (grad_w[j] - fd).abs() / grad_w[j].abs().max(1e-12);
            assert!(rel < 1e-6, "weight {j}: analytic {} vs fd {fd}", grad_w[j]);
        }
        let (lp, _, _) = loss_and_grad(&x_std, &y, &w, b + h, l2);
        let (lm, _, _) = loss_and_grad(&x_std, &y, &w, b - h, l2);
        let fd = (lp - lm) / (2.0 * h);
        assert!((grad_b - fd).abs() / grad_b.abs().max(1e-12) < 1e-6);
    }

    /// Brute-force AUC: pairwise comparison with half credit for ties.
    fn pairwise_auc(scores: &[f64], labels: &[bool]) -> f64 {
        let mut wins = 0.0;
        let mut pairs = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            if !li {
                continue;
            }
            for (j, &lj) in labels.iter().enumerate() {
                if lj {
                    continue;
                }
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
        wins / pairs
    }

    proptest! {
        /// Rank-based AUC equals the pairwise definition.
        #[test]
        fn rank_auc_matches_pairwise_counting(
            scores in proptest::collection::vec(0..=10u8, 2..40),
            seed in 0u64..1000,
        ) {
            let scores: Vec<f64> = scores.iter().map(|&s| s as f64 / 10.0).collect();
            // Derive labels from the seed so both classes can appear.
            let labels: Vec<bool> = (0..scores.len())
                .map(|i| (seed >> (i % 60)) & 1 == 1)
                .collect();
            let n_pos = labels.iter().filter(|&&l| l).count();
            prop_assume!(n_pos > 0 && n_pos < labels.len());
            let fast = rank_auc(&scores, &labels);
            let slow = pairwise_auc(&scores, &labels);
            prop_assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow}");
        }

        /// All effort measures stay within [0, 1].
        #[test]
        fn effort_measures_are_bounded(
            entries in proptest::collection::vec((0..=100u8, any::<bool>(), 1..=50u64), 1..20),
        ) {
            let scores: Vec<f64> = entries.iter().map(|(s, _, _)| *s as f64 / 100.0).collect();
            let labels: Vec<bool> = entries.iter().map(|(_, l, _)| *l).collect();
            let churn: Vec<u64> = entries.iter().map(|(_, _, c)| *c).collect();
            let rep = effort_metrics(&scores, &labels, &churn, EffortUnit::Commit).unwrap();
            for v in [rep.recall_at_20_effort, rep.effort_at_20_recall, rep.p_opt] {
                prop_assert!((-1e-9..=1.0 + 1e-9).contains(&v), "{v}");
            }
            let rep_line = effort_metrics(&scores, &labels, &churn, EffortUnit::Line).unwrap();
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&rep_line.p_opt));
        }
    }
}
