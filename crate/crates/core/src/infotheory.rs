//! Plug-in entropies in nats over contingency tables.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::discretize::{fuse_codes, CodedColumn};
use crate::tables::ContingencyTable;
use crate::{Error, Result};

#[inline]
fn xlogx(n: u64) -> f64 {
    if n <= 1 {
        0.0
    } else {
        let x = n as f64;
        x * libm::log(x)
    }
}

/// Shannon entropy of a count vector.
pub fn entropy(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::ZeroCounts);
    }
    let s: f64 = counts.iter().map(|&c| xlogx(c)).sum();
    Ok(((xlogx(total) - s) / total as f64).max(0.0))
}

/// H[col | row]: the row-weighted average of row entropies.
pub fn cond_entropy(t: &ContingencyTable) -> f64 {
    let rows: f64 = t.row_sums().iter().map(|&c| xlogx(c)).sum();
    let cells: f64 = t.counts().iter().map(|&c| xlogx(c)).sum();
    ((rows - cells) / t.total() as f64).max(0.0)
}

/// Joint entropy of the row and column variables.
pub fn joint_entropy(t: &ContingencyTable) -> f64 {
    let cells: f64 = t.counts().iter().map(|&c| xlogx(c)).sum();
    ((xlogx(t.total()) - cells) / t.total() as f64).max(0.0)
}

/// Mutual information between rows and columns; equals H[col] - H[col | row].
/// Summed cell by cell, so an exact product table gives exactly zero.
pub fn ce_drop(t: &ContingencyTable) -> f64 {
    let n = t.total() as f64;
    let (rs, cs) = (t.row_sums(), t.col_sums());
    let mut s = 0.0;
    for (r, &nr) in rs.iter().enumerate() {
        for (c, &nc) in cs.iter().enumerate() {
            let k = t.get(r, c);
            if k > 0 {
                let k = k as f64;
                s += k * libm::log(k * n / (nr as f64 * nc as f64));
            }
        }
    }
    (s / n).max(0.0)
}

/// H[y | x] for two coded columns.
pub fn cond_entropy_of(y: &CodedColumn, x: &CodedColumn) -> Result<f64> {
    Ok(cond_entropy(&ContingencyTable::build(x, y)?))
}

/// H[y | x] straight from codes, with the number of occupied x categories
/// and of nonzero cells. `x` codes may be sparse in `0..nx`.
pub(crate) fn ce_codes(x: &[u32], nx: usize, y: &[u32], ny: usize) -> (f64, usize, usize) {
    let mut cells = vec![0u32; nx * ny];
    let mut rows = vec![0u32; nx];
    for (&a, &b) in x.iter().zip(y) {
        cells[a as usize * ny + b as usize] += 1;
        rows[a as usize] += 1;
    }
    let r: f64 = rows.iter().map(|&c| xlogx(c as u64)).sum();
    let c: f64 = cells.iter().map(|&c| xlogx(c as u64)).sum();
    let occupied = rows.iter().filter(|&&c| c > 0).count();
    let nonzero = cells.iter().filter(|&&c| c > 0).count();
    (((r - c) / x.len() as f64).max(0.0), occupied, nonzero)
}

/// Member codes fused by mixed radix without compaction when the key space
/// is small, otherwise compacted. Returns the codes and their range.
pub(crate) fn fused_keys(members: &[&CodedColumn], n_rows: usize, limit: usize) -> (Vec<u32>, usize) {
    let product = members.iter().try_fold(1usize, |acc, c| acc.checked_mul(c.n_cats()));
    match product {
        Some(p) if p <= limit => {
            let mut keys = vec![0u32; n_rows];
            for m in members {
                let k = m.n_cats() as u32;
                for (key, &c) in keys.iter_mut().zip(m.codes()) {
                    *key = *key * k + c;
                }
            }
            (keys, p.max(1))
        }
        _ => {
            let parts: Vec<(&[u32], usize)> = members.iter().map(|c| (c.codes(), c.n_cats())).collect();
            fuse_codes(&parts, n_rows)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfoDecomposition {
    pub ce_drop_joint: f64,
    pub ce_drop_a: f64,
    pub ce_drop_b: f64,
    pub mi_ab: f64,
    pub cmi_ab_given_y: f64,
    /// `cmi_ab_given_y - mi_ab`; the joint drop minus the two single drops.
    pub interaction: f64,
}

/// Split I[Y; A,B] into the two single drops and the interaction term.
pub fn decompose_pair(y: &CodedColumn, a: &CodedColumn, b: &CodedColumn) -> Result<InfoDecomposition> {
    let n = y.len();
    for c in [a, b] {
        if c.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: c.len(),
            });
        }
    }
    let raw = |x: &CodedColumn, z: &CodedColumn| -> Result<f64> {
        let t = ContingencyTable::build(x, z)?;
        Ok(entropy(t.col_sums())? - cond_entropy(&t))
    };
    let ab = crate::discretize::fuse(&[a, b])?;
    let ce_drop_joint = raw(&ab, y)?;
    let ce_drop_a = raw(a, y)?;
    let ce_drop_b = raw(b, y)?;
    let mi_ab = raw(a, b)?;
    // I[A;B|Y] = H[A|Y] + H[B|Y] - H[A,B|Y]
    let ha_y = cond_entropy_of(a, y)?;
    let hb_y = cond_entropy_of(b, y)?;
    let hab_y = cond_entropy_of(&ab, y)?;
    let cmi_ab_given_y = ha_y + hb_y - hab_y;
    Ok(InfoDecomposition {
        ce_drop_joint,
        ce_drop_a,
        ce_drop_b,
        mi_ab,
        cmi_ab_given_y,
        interaction: cmi_ab_given_y - mi_ab,
    })
}

/// Symmetrized normalized conditional entropies with a clustering order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MceMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Leaf order of an average-linkage dendrogram over `values`.
    pub order: Vec<usize>,
}

impl MceMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        Some(self.values[i][j])
    }

    pub fn ordered_names(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.names[i].as_str()).collect()
    }
}

/// ½(H[X|Y]/H[X] + H[Y|X]/H[Y]), zero when either marginal entropy is zero.
pub fn mce(x: &CodedColumn, y: &CodedColumn) -> Result<f64> {
    let t = ContingencyTable::build(x, y)?;
    let hx = entropy(t.row_sums())?;
    let hy = entropy(t.col_sums())?;
    if hx <= 0.0 || hy <= 0.0 {
        return Ok(0.0);
    }
    let hxy = joint_entropy(&t);
    Ok(0.5 * ((hxy - hy) / hx + (hxy - hx) / hy))
}

pub fn mce_matrix(features: &[&CodedColumn]) -> Result<MceMatrix> {
    let k = features.len();
    if k < 2 {
        return Err(Error::InvalidConfig(alloc::format!(
            "MCE matrix needs at least 2 features, got {k}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    let vals = crate::par::map_indexed(pairs.len(), |p| {
        let (i, j) = pairs[p];
        mce(features[i], features[j])
    });
    let mut values = vec![vec![0.0; k]; k];
    for (&(i, j), v) in pairs.iter().zip(vals) {
        let v = v?;
        values[i][j] = v;
        values[j][i] = v;
    }
    let order = average_linkage_order(&values);
    Ok(MceMatrix {
        names: features.iter().map(|f| f.name.clone()).collect(),
        values,
        order,
    })
}

/// Leaf order of average-linkage agglomerative clustering. At each step the
/// closest pair merges (ties: smallest first indices), the cluster holding
/// the smaller original index going left.
pub fn average_linkage_order(d: &[Vec<f64>]) -> Vec<usize> {
    let k = d.len();
    let mut clusters: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
    while clusters.len() > 1 {
        let mut best = (f64::INFINITY, 0, 1);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut s = 0.0;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        s += d[i][j];
                    }
                }
                let avg = s / (clusters[a].len() * clusters[b].len()) as f64;
                if avg < best.0 {
                    best = (avg, a, b);
                }
            }
        }
        let (_, a, b) = best;
        let right = clusters.remove(b);
        let left = &mut clusters[a];
        if right.iter().min() < left.iter().min() {
            let mut merged = right;
            merged.append(left);
            *left = merged;
        } else {
            left.extend(right);
        }
        // keep clusters sorted by smallest member so ties resolve by index
        clusters.sort_by_key(|c| *c.iter().min().unwrap());
    }
    clusters.pop().unwrap_or_default()
}
