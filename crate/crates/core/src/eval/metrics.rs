//! ACC, ASD and per-person Kendall tau distance.

use crate::error::{Error, Result};

fn nonempty(pairs: &[(u8, u8)]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::invalid("metric over an empty set of (prediction, gold) pairs"));
    }
    Ok(())
}

/// Fraction of pairs with `|pred - gold| <= threshold`.
pub fn metric_acc(pairs: &[(u8, u8)], threshold: u8) -> Result<f64> {
    nonempty(pairs)?;
    let hits = pairs.iter().filter(|(p, g)| p.abs_diff(*g) <= threshold).count();
    Ok(hits as f64 / pairs.len() as f64)
}

/// Mean `|pred - gold|`.
pub fn metric_asd(pairs: &[(u8, u8)]) -> Result<f64> {
    nonempty(pairs)?;
    let total: u64 = pairs.iter().map(|(p, g)| p.abs_diff(*g) as u64).sum();
    Ok(total as f64 / pairs.len() as f64)
}

/// Normalised tau distance of one group: discordant pairs plus half the
/// pairs tied in prediction only, over the pairs not tied in gold. `None`
/// when every pair is tied in gold.
pub fn tau_distance(group: &[(u8, u8)]) -> Option<f64> {
    let mut twice_bad = 0u64;
    let mut ordered = 0u64;
    for (i, a) in group.iter().enumerate() {
        for b in &group[i + 1..] {
            if a.1 == b.1 {
                continue;
            }
            ordered += 1;
            let gold = a.1 > b.1;
            if a.0 == b.0 {
                twice_bad += 1;
            } else if (a.0 > b.0) != gold {
                twice_bad += 2;
            }
        }
    }
    (ordered > 0).then(|| twice_bad as f64 / (2 * ordered) as f64)
}

/// Unweighted mean of `tau_distance` over groups with at least `min_group`
/// members and at least one gold-ordered pair, with the number of groups used.
pub fn metric_tau(groups: &[Vec<(u8, u8)>], min_group: usize) -> Result<(f64, usize)> {
    let distances: Vec<f64> = groups
        .iter()
        .filter(|g| g.len() >= min_group.max(2))
        .filter_map(|g| tau_distance(g))
        .collect();
    if distances.is_empty() {
        return Err(Error::invalid("no group is large enough and gold-ordered for TAU"));
    }
    Ok((distances.iter().sum::<f64>() / distances.len() as f64, distances.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn acc_examples() {
        assert_eq!(metric_acc(&[(3, 3), (0, 0)], 2).unwrap(), 1.0);
        assert_eq!(metric_acc(&[(5, 7), (0, 7)], 2).unwrap(), 0.5);
        assert_eq!(metric_acc(&[(0, 3)], 2).unwrap(), 0.0);
        assert!(metric_acc(&[], 2).is_err());
    }

    #[test]
    fn asd_examples() {
        assert_eq!(metric_asd(&[(4, 4)]).unwrap(), 0.0);
        assert_eq!(metric_asd(&[(7, 0)]).unwrap(), 7.0);
        assert_eq!(metric_asd(&[(5, 7), (1, 0)]).unwrap(), 1.5);
        assert!(metric_asd(&[]).is_err());
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau_distance(&[(7, 7), (4, 5), (0, 3)]), Some(0.0));
        assert_eq!(tau_distance(&[(0, 7), (4, 5), (7, 3)]), Some(1.0));
        let d = tau_distance(&[(4, 7), (4, 5), (2, 3)]).unwrap();
        assert!((d - 0.5 / 3.0).abs() < 1e-15);
        assert_eq!(tau_distance(&[(1, 4), (6, 4)]), None);
    }

    #[test]
    fn tau_groups() {
        let groups = vec![vec![(7, 7), (0, 0)], vec![(0, 7), (7, 0)], vec![(3, 3)], vec![(1, 2), (5, 2)]];
        assert_eq!(metric_tau(&groups, 2).unwrap(), (0.5, 2));
        assert!(metric_tau(&[vec![(3, 3)]], 2).is_err());
    }

    proptest! {
        #[test]
        fn acc_asd_permutation_invariant(mut pairs in prop::collection::vec((0u8..=7, 0u8..=7), 1..30), k in 0usize..30) {
            let (a, s) = (metric_acc(&pairs, 2).unwrap(), metric_asd(&pairs).unwrap());
            let k = k % pairs.len();
            pairs.rotate_left(k);
            pairs.reverse();
            prop_assert_eq!(metric_acc(&pairs, 2).unwrap(), a);
            prop_assert_eq!(metric_asd(&pairs).unwrap(), s);
        }

        #[test]
        fn tau_in_unit_interval(group in prop::collection::vec((0u8..=7, 0u8..=7), 2..12)) {
            if let Some(d) = tau_distance(&group) {
                prop_assert!((0.0..=1.0).contains(&d));
            }
        }
    }
}
