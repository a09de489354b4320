//! External clustering criteria: accuracy under the best label matching,
//! normalized mutual information and pairwise F-measure.
//!
//! All three are invariant under relabeling of either argument.

use std::collections::HashMap;

use crate::error::{MhcError, Result};

/// Counts of samples per (true class, predicted cluster).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    counts: Vec<Vec<usize>>,
    n: usize,
}

impl ContingencyTable {
    pub fn new(truth: &[usize], pred: &[usize]) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(MhcError::LengthMismatch(truth.len(), pred.len()));
        }
        if truth.is_empty() {
            return Err(MhcError::EmptyLabels);
        }
        let rows = dense_ids(truth);
        let cols = dense_ids(pred);
        let r = rows.iter().max().map_or(0, |m| m + 1);
        let c = cols.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0; c]; r];
        for (&i, &j) in rows.iter().zip(&cols) {
            counts[i][j] += 1;
        }
        Ok(ContingencyTable { counts, n: truth.len() })
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn row_sums(&self) -> Vec<usize> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.counts.first().map_or(0, Vec::len)];
        for row in &self.counts {
            for (s, &x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums
    }
}

fn dense_ids(labels: &[usize]) -> Vec<usize> {
    let mut ids = HashMap::new();
    labels
        .iter()
        .map(|&l| {
            let next = ids.len();
            *ids.entry(l).or_insert(next)
        })
        .collect()
}

/// Fraction of samples matched under the best one-to-one mapping of
/// predicted clusters onto true classes.
pub fn accuracy(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(truth, pred)?;
    let size = table.counts.len().max(table.col_sums().len());
    // cost[p][t] = -count(t, p), zero-padded to square.
    let mut cost = vec![vec![0.0; size]; size];
    for (t, row) in table.counts.iter().enumerate() {
        for (p, &count) in row.iter().enumerate() {
            cost[p][t] = -(count as f64);
        }
    }
    let perm = optimal_assignment(&cost)?;
    let matched: f64 = perm.iter().enumerate().map(|(p, &t)| -cost[p][t]).sum();
    Ok(matched / table.n as f64)
}

fn entropy(sums: &[usize], n: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information over the geometric mean of the two entropies.
///
/// When either labeling has a single cluster the ratio is undefined: two
/// single-cluster labelings score 1, anything else scores 0.
pub fn nmi(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(truth, pred)?;
    let n = table.n as f64;
    let rows = table.row_sums();
    let cols = table.col_sums();
    let (ht, hp) = (entropy(&rows, n), entropy(&cols, n));
    if rows.len() == 1 || cols.len() == 1 {
        return Ok(if rows.len() == 1 && cols.len() == 1 { 1.0 } else { 0.0 });
    }
    let mut mi = 0.0;
    for (i, row) in table.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    Ok((mi / (ht * hp).sqrt()).clamp(0.0, 1.0))
}

fn pairs(c: usize) -> f64 {
    let c = c as f64;
    c * (c - 1.0) / 2.0
}

/// Harmonic mean of pair-level precision and recall, where a pair is
/// positive when both samples share a cluster. Precision is 1 when no pair
/// is predicted together, recall is 1 when no pair is truly together.
pub fn f_measure(truth: &[usize], pred: &[usize]) -> Result<f64> {
    let table = ContingencyTable::new(truth, pred)?;
    let both: f64 = table.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let same_true: f64 = table.row_sums().into_iter().map(pairs).sum();
    let same_pred: f64 = table.col_sums().into_iter().map(pairs).sum();
    let precision = if same_pred == 0.0 { 1.0 } else { both / same_pred };
    let recall = if same_true == 0.0 { 1.0 } else { both / same_true };
    if precision + recall == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * precision * recall / (precision + recall))
}

/// ACC, NMI and F-measure together.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Report {
    pub acc: f64,
    pub nmi: f64,
    pub f_measure: f64,
}

pub fn evaluate(truth: &[usize], pred: &[usize]) -> Result<Report> {
    Ok(Report {
        acc: accuracy(truth, pred)?,
        nmi: nmi(truth, pred)?,
        f_measure: f_measure(truth, pred)?,
    })
}

/// Minimum-cost perfect matching on a square cost matrix (Kuhn–Munkres with
/// potentials, `O(k³)`). Returns `perm` with row `i` assigned to column
/// `perm[i]`.
pub fn optimal_assignment(cost: &[Vec<f64>]) -> Result<Vec<usize>> {
    let k = cost.len();
    if cost.iter().any(|r| r.len() != k || r.iter().any(|x| !x.is_finite())) {
        return Err(MhcError::InvalidCost);
    }
    // 1-based arrays; index 0 is the virtual root column.
    let mut u = vec![0.0; k + 1];
    let mut v = vec![0.0; k + 1];
    let mut owner = vec![0usize; k + 1];
    let mut way = vec![0usize; k + 1];
    for row in 1..=k {
        owner[0] = row;
        let mut col0 = 0;
        let mut minv = vec![f64::INFINITY; k + 1];
        let mut used = vec![false; k + 1];
        loop {
            used[col0] = true;
            let r = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for col in 1..=k {
                if used[col] {
                    continue;
                }
                let reduced = cost[r - 1][col - 1] - u[r] - v[col];
                if reduced < minv[col] {
                    minv[col] = reduced;
                    way[col] = col0;
                }
                if minv[col] < delta {
                    delta = minv[col];
                    col1 = col;
                }
            }
            for col in 0..=k {
                if used[col] {
                    u[owner[col]] += delta;
                    v[col] -= delta;
                } else {
                    minv[col] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; k];
    for col in 1..=k {
        perm[owner[col] - 1] = col - 1;
    }
    Ok(perm)
}
