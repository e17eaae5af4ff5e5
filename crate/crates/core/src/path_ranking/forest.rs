//! CART trees (gini, bootstrap) bagged into a random forest, with a small
//! hyperparameter grid chosen on a stratified validation split.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::auc::compute_auc;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxFeatures {
    Sqrt,
    Log2,
}

impl MaxFeatures {
    /// Features examined per split for `n_features` columns, at least one.
    pub fn count(self, n_features: usize) -> usize {
        if n_features <= 1 {
            return n_features.max(1);
        }
        let f = n_features as f64;
        let k = match self {
            MaxFeatures::Sqrt => f.sqrt().ceil(),
            MaxFeatures::Log2 => f.log2().ceil(),
        };
        (k as usize).clamp(1, n_features)
    }
}

impl std::str::FromStr for MaxFeatures {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt" => Ok(MaxFeatures::Sqrt),
            "log2" => Ok(MaxFeatures::Log2),
            other => Err(Error::Config(format!(
                "unknown max_features rule `{other}` (expected sqrt or log2)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub min_samples_split: usize,
    pub max_features: MaxFeatures,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "lowercase")]
pub enum Node {
    /// Rows with `value <= threshold` go left.
    Split {
        feature: u32,
        threshold: f64,
        left: u32,
        right: u32,
    },
    /// Fraction of positive training rows that reached this leaf.
    Leaf { positive: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

impl DecisionTree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match self.nodes[at] {
                Node::Leaf { positive } => return positive,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let v = row.get(feature as usize).copied().unwrap_or(0.0);
                    at = if v <= threshold { left } else { right } as usize;
                }
            }
        }
    }

    pub fn leaves(&self) -> impl Iterator<Item = f64> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            Node::Leaf { positive } => Some(*positive),
            _ => None,
        })
    }
}

struct Best {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

fn best_split(x: &[Vec<f64>], y: &[bool], rows: &[usize], order: &[usize], max_features: usize) -> Option<Best> {
    let n = rows.len();
    let mut best: Option<Best> = None;
    let mut visited = 0;
    let mut column: Vec<(f64, bool)> = Vec::with_capacity(n);
    for &f in order {
        if visited >= max_features {
            break;
        }
        column.clear();
        column.extend(rows.iter().map(|&r| (x[r][f], y[r])));
        column.sort_by(|a, b| a.0.total_cmp(&b.0));
        if column[0].0 == column[n - 1].0 {
            continue;
        }
        visited += 1;
        let total_pos = column.iter().filter(|c| c.1).count() as f64;
        let mut left_pos = 0.0;
        for i in 0..n - 1 {
            if column[i].1 {
                left_pos += 1.0;
            }
            if column[i].0 == column[i + 1].0 {
                continue;
            }
            let nl = (i + 1) as f64;
            let nr = (n - i - 1) as f64;
            let right_pos = total_pos - left_pos;
            // Weighted gini of both children, up to the constant factor 2/n.
            let impurity = left_pos * (nl - left_pos) / nl + right_pos * (nr - right_pos) / nr;
            if best.as_ref().is_none_or(|b| impurity < b.impurity) {
                let (lo, hi) = (column[i].0, column[i + 1].0);
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid < hi { mid } else { lo };
                best = Some(Best {
                    feature: f,
                    threshold,
                    impurity,
                });
            }
        }
    }
    best
}

/// Grows one unpruned tree on `rows` (which may repeat, as in a bootstrap
/// sample).
pub fn fit_tree(x: &[Vec<f64>], y: &[bool], rows: Vec<usize>, params: TreeParams, rng: &mut seed::Rng) -> DecisionTree {
    let n_features = x.first().map_or(0, Vec::len);
    let k = params.max_features.count(n_features);
    let mut nodes = Vec::new();
    let mut features: Vec<usize> = (0..n_features).collect();
    // (node slot, rows) work list; slots are reserved before children are grown.
    nodes.push(Node::Leaf { positive: 0.0 });
    let mut stack = vec![(0usize, rows)];
    while let Some((slot, rows)) = stack.pop() {
        let n = rows.len();
        let pos = rows.iter().filter(|&&r| y[r]).count();
        let fraction = if n == 0 { 0.0 } else { pos as f64 / n as f64 };
        if n < params.min_samples_split.max(2) || pos == 0 || pos == n || n_features == 0 {
            nodes[slot] = Node::Leaf { positive: fraction };
            continue;
        }
        features.shuffle(rng);
        let Some(split) = best_split(x, y, &rows, &features, k) else {
            nodes[slot] = Node::Leaf { positive: fraction };
            continue;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| x[r][split.feature] <= split.threshold);
        let left = nodes.len();
        nodes.push(Node::Leaf { positive: 0.0 });
        let right = nodes.len();
        nodes.push(Node::Leaf { positive: 0.0 });
        nodes[slot] = Node::Split {
            feature: split.feature as u32,
            threshold: split.threshold,
            left: left as u32,
            right: right as u32,
        };
        stack.push((right, right_rows));
        stack.push((left, left_rows));
    }
    DecisionTree { nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub params: TreeParams,
    pub n_features: usize,
    pub trees: Vec<DecisionTree>,
}

fn check_labels(y: &[bool]) -> Result<()> {
    if !y.iter().any(|&l| l) || !y.iter().any(|&l| !l) {
        return Err(Error::invalid("forest training needs at least one example of each label"));
    }
    Ok(())
}

/// Bags `n_trees` trees, each on its own bootstrap sample and seed stream.
pub fn fit_forest(x: &[Vec<f64>], y: &[bool], params: TreeParams, n_trees: usize, seed: u64) -> Result<RandomForest> {
    check_labels(y)?;
    if x.len() != y.len() {
        return Err(Error::invalid("feature rows and labels differ in length"));
    }
    if n_trees == 0 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    let n = x.len();
    let trees = (0..n_trees as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(seed::derive_index(seed, t));
            let sample: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
            fit_tree(x, y, sample, params, &mut rng)
        })
        .collect();
    Ok(RandomForest {
        params,
        n_features: x.first().map_or(0, Vec::len),
        trees,
    })
}

impl RandomForest {
    /// Mean of the per-tree leaf positive fractions.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(row)).sum();
        sum / self.trees.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperGrid {
    pub min_samples_split: Vec<usize>,
    pub max_features: Vec<MaxFeatures>,
}

impl Default for HyperGrid {
    fn default() -> Self {
        HyperGrid {
            min_samples_split: vec![2, 5, 10],
            max_features: vec![MaxFeatures::Sqrt, MaxFeatures::Log2],
        }
    }
}

impl HyperGrid {
    /// Cells in evaluation order: min_samples_split outer, max_features inner.
    pub fn cells(&self) -> Vec<TreeParams> {
        self.min_samples_split
            .iter()
            .flat_map(|&m| {
                self.max_features.iter().map(move |&f| TreeParams {
                    min_samples_split: m,
                    max_features: f,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub params: TreeParams,
    /// None when the validation split lacked one of the labels.
    pub validation_auc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestSelection {
    pub forest: RandomForest,
    pub cells: Vec<GridCell>,
    pub chosen: usize,
}

impl ForestSelection {
    pub fn validation_auc(&self) -> Option<f64> {
        self.cells[self.chosen].validation_auc
    }
}

/// Stratified split: about `fraction` of each label goes to validation.
pub fn stratified_split(y: &[bool], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seed::rng(seed);
    let mut train = Vec::new();
    let mut valid = Vec::new();
    for label in [true, false] {
        let mut idx: Vec<usize> = (0..y.len()).filter(|&i| y[i] == label).collect();
        idx.shuffle(&mut rng);
        let n_valid = ((idx.len() as f64) * fraction).round() as usize;
        let n_valid = n_valid.min(idx.len().saturating_sub(1));
        valid.extend_from_slice(&idx[..n_valid]);
        train.extend_from_slice(&idx[n_valid..]);
    }
    train.sort_unstable();
    valid.sort_unstable();
    (train, valid)
}

/// Evaluates each grid cell on a seeded stratified split, keeps the cell with
/// the best validation AUC (first cell on ties), then refits that cell on
/// all rows.
pub fn train_forest(
    x: &[Vec<f64>],
    y: &[bool],
    grid: &HyperGrid,
    n_trees: usize,
    validation_fraction: f64,
    seed: u64,
) -> Result<ForestSelection> {
    check_labels(y)?;
    let params = grid.cells();
    if params.is_empty() {
        return Err(Error::Config("hyperparameter grid is empty".into()));
    }
    let (train, valid) = stratified_split(y, validation_fraction, seed::derive(seed, "split"));
    let pick = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<bool>) {
        (idx.iter().map(|&i| x[i].clone()).collect(), idx.iter().map(|&i| y[i]).collect())
    };
    let (xt, yt) = pick(&train);
    let (xv, yv) = pick(&valid);
    let evaluable = yv.iter().any(|&l| l) && yv.iter().any(|&l| !l);
    if !evaluable {
        log::warn!("validation split lacks one label; using the first grid cell");
    }

    let mut cells = Vec::with_capacity(params.len());
    for (i, &p) in params.iter().enumerate() {
        let validation_auc = if evaluable {
            let forest = fit_forest(&xt, &yt, p, n_trees, seed::derive(seed, &format!("cell{i}")))?;
            let scored: Vec<(f64, bool)> = xv.iter().zip(&yv).map(|(r, &l)| (forest.predict(r), l)).collect();
            Some(compute_auc(&scored)?)
        } else {
            None
        };
        log::debug!("grid cell {i} {p:?}: validation AUC {validation_auc:?}");
        cells.push(GridCell { params: p, validation_auc });
    }
    let mut chosen = 0;
    for (i, c) in cells.iter().enumerate() {
        if let (Some(a), Some(b)) = (c.validation_auc, cells[chosen].validation_auc) {
            if a > b {
                chosen = i;
            }
        }
    }
    let forest = fit_forest(x, y, params[chosen], n_trees, seed::derive(seed, "final"))?;
    Ok(ForestSelection { forest, cells, chosen })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn separable(n: usize) -> (Vec<Vec<f64>>, Vec<bool>) {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let pos = i % 2 == 0;
            x.push(vec![if pos { 1.0 + (i % 3) as f64 } else { 0.0 }, (i % 5) as f64]);
            y.push(pos);
        }
        (x, y)
    }

    #[test]
    fn feature_counts() {
        assert_eq!(MaxFeatures::Sqrt.count(10), 4);
        assert_eq!(MaxFeatures::Log2.count(10), 4);
        assert_eq!(MaxFeatures::Sqrt.count(16), 4);
        assert_eq!(MaxFeatures::Log2.count(16), 4);
        assert_eq!(MaxFeatures::Log2.count(1), 1);
        assert_eq!(MaxFeatures::Sqrt.count(2), 2);
    }

    #[test]
    fn grid_order_is_documented() {
        let cells = HyperGrid::default().cells();
        assert_eq!(cells.len(), 6);
        assert_eq!(
            cells[0],
            TreeParams {
                min_samples_split: 2,
                max_features: MaxFeatures::Sqrt
            }
        );
        assert_eq!(
            cells[1],
            TreeParams {
                min_samples_split: 2,
                max_features: MaxFeatures::Log2
            }
        );
        assert_eq!(
            cells[5],
            TreeParams {
                min_samples_split: 10,
                max_features: MaxFeatures::Log2
            }
        );
    }

    #[test]
    fn separable_feature_gives_perfect_auc() {
        let (x, y) = separable(60);
        let sel = train_forest(&x, &y, &HyperGrid::default(), 30, 0.3, 5).unwrap();
        assert_eq!(sel.validation_auc(), Some(1.0));
        assert_eq!(sel.forest.trees.len(), 30);
    }

    #[test]
    fn constant_features_give_chance_auc() {
        let x = vec![vec![1.0, 0.0]; 80];
        let y: Vec<bool> = (0..80).map(|i| i % 2 == 0).collect();
        let sel = train_forest(&x, &y, &HyperGrid::default(), 20, 0.3, 9).unwrap();
        let auc = sel.validation_auc().unwrap();
        assert!((auc - 0.5).abs() <= 0.1, "auc {auc}");
    }

    #[test]
    fn single_label_is_error() {
        let x = vec![vec![1.0]; 4];
        assert!(train_forest(&x, &[true; 4], &HyperGrid::default(), 5, 0.3, 1).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let (x, y) = separable(40);
        let a = train_forest(&x, &y, &HyperGrid::default(), 10, 0.3, 3).unwrap();
        let b = train_forest(&x, &y, &HyperGrid::default(), 10, 0.3, 3).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn split_is_stratified_and_disjoint() {
        let y: Vec<bool> = (0..100).map(|i| i < 40).collect();
        let (t, v) = stratified_split(&y, 0.3, 1);
        assert_eq!(t.len() + v.len(), 100);
        assert_eq!(v.iter().filter(|&&i| y[i]).count(), 12);
        assert_eq!(v.iter().filter(|&&i| !y[i]).count(), 18);
        assert!(t.iter().all(|i| !v.contains(i)));
    }

    proptest! {
        #[test]
        fn probability_is_mean_of_leaves(
            raw in prop::collection::vec((0u8..4, 0u8..4, any::<bool>()), 4..40),
            probe in (0u8..5, 0u8..5),
        ) {
            let x: Vec<Vec<f64>> = raw.iter().map(|&(a, b, _)| vec![a as f64, b as f64]).collect();
            let y: Vec<bool> = raw.iter().map(|r| r.2).collect();
            prop_assume!(y.iter().any(|&l| l) && y.iter().any(|&l| !l));
            let params = TreeParams { min_samples_split: 2, max_features: MaxFeatures::Sqrt };
            let forest = fit_forest(&x, &y, params, 7, 11).unwrap();
            let row = [probe.0 as f64, probe.1 as f64];
            let p = forest.predict(&row);
            let mean = forest.trees.iter().map(|t| t.predict(&row)).sum::<f64>() / 7.0;
            prop_assert!((0.0..=1.0).contains(&p));
            prop_assert_eq!(p, mean);
            for t in &forest.trees {
                for leaf in t.leaves() {
                    prop_assert!((0.0..=1.0).contains(&leaf));
                }
            }
        }
    }
}
