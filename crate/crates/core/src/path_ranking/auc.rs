//! Area under the ROC curve, Mann–Whitney form.

use crate::error::{Error, Result};

/// Probability that a random positive outscores a random negative, ties
/// counting one half. Errors unless both labels are present.
pub fn compute_auc(scores: &[(f64, bool)]) -> Result<f64> {
    let n_pos = scores.iter().filter(|s| s.1).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::invalid("AUC needs at least one positive and one negative score"));
    }
    if scores.iter().any(|s| s.0.is_nan()) {
        return Err(Error::invalid("AUC input contains NaN"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0));

    // Sum of 1-based ranks of positives, tied blocks sharing the average rank.
    // Ranks are doubled so everything stays integral until the final division.
    let mut rank_sum2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]].0 == scores[order[i]].0 {
            j += 1;
        }
        let avg2 = (i + 1 + j + 1) as u128;
        let pos_in_block = order[i..=j].iter().filter(|&&k| scores[k].1).count() as u128;
        rank_sum2 += avg2 * pos_in_block;
        i = j + 1;
    }
    let (p, n) = (n_pos as u128, n_neg as u128);
    let u2 = rank_sum2 - p * (p + 1);
    Ok(u2 as f64 / (2 * p * n) as f64)
}
