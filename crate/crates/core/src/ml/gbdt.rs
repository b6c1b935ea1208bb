//! Gradient-boosted regression trees, squared error, exact greedy splits.
//!
//! Deliberately from scratch and deterministic: presorted features, level
//! order growth, midpoint thresholds, ties broken toward the lowest feature
//! index then the lowest threshold, and a seeded subsample draw per round.
//! The same data, params, and seed always produce bit-identical models.

use std::fs;
use std::path::Path;

use rand::seq::index::sample as sample_indices;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::{stage_rng, STAGE_SUBSAMPLE};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct GbdtParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    /// Fraction of rows drawn (without replacement) per round.
    pub subsample: f64,
    pub min_samples_leaf: usize,
    pub seed: u64,
}

impl Default for GbdtParams {
    fn default() -> Self {
        GbdtParams {
            n_trees: 900,
            learning_rate: 0.01,
            max_depth: 4,
            subsample: 0.8,
            min_samples_leaf: 5,
            seed: 0,
        }
    }
}

/// One regression tree in flat arrays. `feature[i] < 0` marks node `i` as a
/// leaf holding `value[i]`; internal nodes route `x[feature] <= threshold`
/// left.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Tree<T> {
    pub feature: Vec<i32>,
    pub threshold: Vec<T>,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub value: Vec<T>,
}

impl<T: Scalar> Tree<T> {
    fn eval(&self, row: &[T]) -> T {
        let mut n = 0usize;
        loop {
            let f = self.feature[n];
            if f < 0 {
                return self.value[n];
            }
            n = if row[f as usize] <= self.threshold[n] {
                self.left[n] as usize
            } else {
                self.right[n] as usize
            };
        }
    }

    /// Same walk over column-major storage, for the training loop.
    fn eval_col(&self, columns: &[Vec<T>], row: usize) -> T {
        let mut n = 0usize;
        loop {
            let f = self.feature[n];
            if f < 0 {
                return self.value[n];
            }
            n = if columns[f as usize][row] <= self.threshold[n] {
                self.left[n] as usize
            } else {
                self.right[n] as usize
            };
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GbdtModel<T> {
    version: u32,
    pub schema: Vec<String>,
    pub params: GbdtParams,
    /// Constant prediction before any tree: the target mean.
    pub base: T,
    pub trees: Vec<Tree<T>>,
}

const MODEL_VERSION: u32 = 1;

/// Sentinel for rows outside the current round's subsample.
const DEAD: u32 = u32::MAX;

impl<T: Scalar> GbdtModel<T> {
    /// Fits boosted trees on column-major features. Returns the model and
    /// the full-set training RMSE after each round.
    pub fn fit(
        columns: &[Vec<T>],
        y: &[T],
        schema: &[String],
        params: &GbdtParams,
    ) -> Result<(GbdtModel<T>, Vec<T>)> {
        let n = y.len();
        if n == 0 || columns.is_empty() {
            return Err(Error::EmptyDataset("no rows or features to fit".into()));
        }
        if columns.len() != schema.len() || columns.iter().any(|c| c.len() != n) {
            return Err(Error::SchemaMismatch {
                model: format!("{} features", schema.len()),
                rows: format!(
                    "{} columns, longest {} rows for {} targets",
                    columns.len(),
                    columns.iter().map(Vec::len).max().unwrap_or(0),
                    n
                ),
            });
        }
        if !(0.0 < params.subsample && params.subsample <= 1.0) || params.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("subsample in (0,1], learning_rate > 0".into()));
        }

        // Row order per feature, sorted by value then row index; computed once.
        let sorted: Vec<Vec<u32>> = columns
            .iter()
            .map(|col| {
                let mut idx: Vec<u32> = (0..n as u32).collect();
                idx.sort_by(|&a, &b| {
                    col[a as usize]
                        .partial_cmp(&col[b as usize])
                        .expect("finite features")
                        .then(a.cmp(&b))
                });
                idx
            })
            .collect();

        let base = y.iter().copied().sum::<T>() / T::c(n as f64);
        let mut pred = vec![base; n];
        let mut model = GbdtModel {
            version: MODEL_VERSION,
            schema: schema.to_vec(),
            params: *params,
            base,
            trees: Vec::with_capacity(params.n_trees),
        };
        let mut rmse = Vec::with_capacity(params.n_trees);
        let lr = T::c(params.learning_rate);
        let k = ((params.subsample * n as f64).round() as usize).clamp(1, n);

        let mut residual = vec![T::zero(); n];
        for round in 0..params.n_trees {
            for i in 0..n {
                residual[i] = y[i] - pred[i];
            }
            let mut in_tree = vec![false; n];
            if k == n {
                in_tree.fill(true);
            } else {
                let mut rng = stage_rng(params.seed, STAGE_SUBSAMPLE, round as u64);
                for i in sample_indices(&mut rng, n, k) {
                    in_tree[i] = true;
                }
            }
            let tree = grow_tree(columns, &sorted, &residual, &in_tree, params);
            for i in 0..n {
                pred[i] += lr * tree.eval_col(columns, i);
            }
            model.trees.push(tree);
            let mse = (0..n).map(|i| (y[i] - pred[i]) * (y[i] - pred[i])).sum::<T>() / T::c(n as f64);
            rmse.push(mse.sqrt());
        }
        Ok((model, rmse))
    }

    pub fn predict_row(&self, row: &[T]) -> T {
        debug_assert_eq!(row.len(), self.schema.len());
        let lr = T::c(self.params.learning_rate);
        self.base + self.trees.iter().map(|t| lr * t.eval(row)).sum::<T>()
    }

    /// Predicts a whole dataset; the row schema must match the model's.
    pub fn predict(&self, schema: &[String], rows: &[Vec<T>]) -> Result<Vec<T>> {
        if schema != self.schema.as_slice() {
            return Err(Error::SchemaMismatch {
                model: self.schema.join(","),
                rows: schema.join(","),
            });
        }
        Ok(rows.iter().map(|r| self.predict_row(r)).collect())
    }
}

impl<T: Scalar + Serialize + DeserializeOwned> GbdtModel<T> {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self).expect("model serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<GbdtModel<T>> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: GbdtModel<T> =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, "model json", e.to_string()))?;
        if model.version != MODEL_VERSION {
            return Err(Error::ModelVersion(format!(
                "model v{}, supported v{MODEL_VERSION}",
                model.version
            )));
        }
        Ok(model)
    }
}

struct BestSplit<T> {
    gain: T,
    feature: usize,
    threshold: T,
}

/// Grows one tree level by level with exact greedy splits on the subsample.
fn grow_tree<T: Scalar>(
    columns: &[Vec<T>],
    sorted: &[Vec<u32>],
    residual: &[T],
    in_tree: &[bool],
    params: &GbdtParams,
) -> Tree<T> {
    let n = residual.len();
    let mut tree = Tree {
        feature: vec![-1],
        threshold: vec![T::zero()],
        left: vec![0],
        right: vec![0],
        value: vec![T::zero()],
    };
    // Root stats over sampled rows.
    let mut assignment: Vec<u32> = (0..n).map(|i| if in_tree[i] { 0 } else { DEAD }).collect();
    let mut node_sum = vec![T::zero()];
    let mut node_cnt = vec![0usize];
    for i in 0..n {
        if in_tree[i] {
            node_sum[0] += residual[i];
            node_cnt[0] += 1;
        }
    }

    let mut level: Vec<usize> = vec![0];
    for _depth in 0..params.max_depth {
        if level.is_empty() {
            break;
        }
        // node id -> slot in the per-level scratch tables.
        let mut slot_by_node = vec![u32::MAX; tree.feature.len()];
        for (s, &id) in level.iter().enumerate() {
            slot_by_node[id] = s as u32;
        }
        let mut best: Vec<Option<BestSplit<T>>> = level.iter().map(|_| None).collect();

        for f in 0..columns.len() {
            let col = &columns[f];
            let mut run_sum = vec![T::zero(); level.len()];
            let mut run_cnt = vec![0usize; level.len()];
            let mut prev_val: Vec<Option<T>> = vec![None; level.len()];
            for &row in &sorted[f] {
                let row = row as usize;
                let node = assignment[row];
                if node == DEAD || slot_by_node[node as usize] == u32::MAX {
                    continue;
                }
                let slot = slot_by_node[node as usize] as usize;
                let v = col[row];
                if let Some(pv) = prev_val[slot] {
                    if v > pv
                        && run_cnt[slot] >= params.min_samples_leaf
                        && node_cnt[node as usize] - run_cnt[slot] >= params.min_samples_leaf
                    {
                        let sl = run_sum[slot];
                        let nl = T::c(run_cnt[slot] as f64);
                        let sr = node_sum[node as usize] - sl;
                        let nr = T::c((node_cnt[node as usize] - run_cnt[slot]) as f64);
                        let st = node_sum[node as usize];
                        let nt = T::c(node_cnt[node as usize] as f64);
                        let gain = sl * sl / nl + sr * sr / nr - st * st / nt;
                        // Strict improvement; feature loop order plus the
                        // ascending value scan settle ties beforehand.
                        if gain > T::c(1e-12) && best[slot].as_ref().is_none_or(|b| gain > b.gain) {
                            best[slot] = Some(BestSplit {
                                gain,
                                feature: f,
                                threshold: (pv + v) / T::c(2.0),
                            });
                        }
                    }
                }
                run_sum[slot] += residual[row];
                run_cnt[slot] += 1;
                prev_val[slot] = Some(v);
            }
        }

        // Materialize the chosen splits and push rows down.
        let mut next_level = Vec::new();
        for (slot, &node) in level.iter().enumerate() {
            let Some(b) = &best[slot] else { continue };
            let l = tree.feature.len();
            let r = l + 1;
            tree.feature[node] = b.feature as i32;
            tree.threshold[node] = b.threshold;
            tree.left[node] = l as u32;
            tree.right[node] = r as u32;
            for _ in 0..2 {
                tree.feature.push(-1);
                tree.threshold.push(T::zero());
                tree.left.push(0);
                tree.right.push(0);
                tree.value.push(T::zero());
                node_sum.push(T::zero());
                node_cnt.push(0);
            }
            next_level.push(l);
            next_level.push(r);
        }
        if next_level.is_empty() {
            break;
        }
        for row in 0..n {
            let node = assignment[row];
            if node == DEAD {
                continue;
            }
            let node = node as usize;
            if tree.feature[node] < 0 {
                continue;
            }
            let child = if columns[tree.feature[node] as usize][row] <= tree.threshold[node] {
                tree.left[node]
            } else {
                tree.right[node]
            };
            assignment[row] = child;
            node_sum[child as usize] += residual[row];
            node_cnt[child as usize] += 1;
        }
        level = next_level;
    }

    for node in 0..tree.feature.len() {
        if tree.feature[node] < 0 && node_cnt[node] > 0 {
            tree.value[node] = node_sum[node] / T::c(node_cnt[node] as f64);
        }
    }
    tree
}
