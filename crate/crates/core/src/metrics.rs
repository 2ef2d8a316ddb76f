//! Ranking-based evaluation: average precision, AUC-ROC, and precision at a
//! recall floor. All three depend only on the score ranking; tied scores are
//! grouped at a single threshold.

use crate::error::{Error, Result};

fn validate(scores: &[f64], labels: &[u8]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() || scores.is_empty() {
        return Err(Error::ShapeMismatch(format!(
            "{} scores, {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("scores".into()));
    }
    let positives = labels.iter().filter(|&&l| l == 1).count();
    Ok((positives, labels.len() - positives))
}

/// (true positives, false positives) accumulated per descending-score
/// threshold, with ties grouped.
fn threshold_groups(scores: &[f64], labels: &[u8]) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap().then(a.cmp(&b)));
    let mut groups = Vec::new();
    let mut i = 0;
    while i < order.len() {
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] == 1 {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        groups.push((tp, fp));
        i = j;
    }
    groups
}

/// Non-interpolated step-sum average precision:
/// AP = Σ (R_n − R_{n−1}) · P_n over descending thresholds.
pub fn average_precision(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (positives, _) = validate(scores, labels)?;
    if positives == 0 {
        return Err(Error::InvalidDataset("no positive labels".into()));
    }
    let mut cum_tp = 0usize;
    let mut cum_fp = 0usize;
    let mut prev_recall = 0.0;
    let mut ap = 0.0;
    for (tp, fp) in threshold_groups(scores, labels) {
        cum_tp += tp;
        cum_fp += fp;
        let recall = cum_tp as f64 / positives as f64;
        let precision = cum_tp as f64 / (cum_tp + cum_fp) as f64;
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    Ok(ap)
}

/// Probability that a random positive outranks a random negative, with ties
/// counted one half (Mann–Whitney form, computed via average ranks).
pub fn auc_roc(scores: &[f64], labels: &[u8]) -> Result<f64> {
    let (positives, negatives) = validate(scores, labels)?;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidDataset(
            "AUC needs both classes present".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap().then(a.cmp(&b)));

    // Average ranks within tie groups (1-based ranks, ascending score).
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = ((i + 1) + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] == 1 {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let p = positives as f64;
    let n = negatives as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Maximum precision over all descending-score thresholds whose recall is at
/// least `recall_floor`. The all-inclusive threshold has recall 1, so some
/// threshold always qualifies.
pub fn precision_at_recall(scores: &[f64], labels: &[u8], recall_floor: f64) -> Result<f64> {
    let (positives, _) = validate(scores, labels)?;
    if positives == 0 {
        return Err(Error::InvalidDataset("no positive labels".into()));
    }
    if !(recall_floor > 0.0 && recall_floor <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "recall floor {recall_floor} must lie in (0, 1]"
        )));
    }
    let mut cum_tp = 0usize;
    let mut cum_fp = 0usize;
    let mut best = 0.0f64;
    for (tp, fp) in threshold_groups(scores, labels) {
        cum_tp += tp;
        cum_fp += fp;
        let recall = cum_tp as f64 / positives as f64;
        if recall >= recall_floor {
            let precision = cum_tp as f64 / (cum_tp + cum_fp) as f64;
            best = best.max(precision);
        }
    }
    Ok(best)
}
