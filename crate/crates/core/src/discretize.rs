//! Binning of continuous features and fusion of coded features into one
//! categorical variable over occupied hypercubes.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureValues};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinScheme {
    EqualFrequency,
    EqualWidth,
}

impl core::str::FromStr for BinScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal_frequency" | "equal-frequency" | "quantile" => Ok(BinScheme::EqualFrequency),
            "equal_width" | "equal-width" | "width" => Ok(BinScheme::EqualWidth),
            _ => Err(Error::InvalidConfig(format!("unknown binning scheme `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Raw,
    /// `edges` has one more entry than there are categories; category `j`
    /// covers `(edges[j], edges[j + 1]]`, the first one closed on the left.
    Binned {
        scheme: BinScheme,
        edges: Vec<f64>,
    },
    Fused {
        members: Vec<String>,
    },
}

/// Dense category codes for one (possibly fused) variable. Every code in
/// `0..n_cats()` occurs at least once.
#[derive(Debug, Clone, PartialEq)]
pub struct CodedColumn {
    pub name: String,
    codes: Vec<u32>,
    labels: Vec<String>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinRow {
    pub bin: usize,
    pub lower_edge: f64,
    pub upper_edge: f64,
    pub count: u64,
}

impl CodedColumn {
    /// Build from arbitrary codes; unused codes are compacted away and the
    /// surviving labels kept in code order.
    pub fn from_codes(name: impl Into<String>, codes: &[u32], labels: &[String]) -> Self {
        let width = labels
            .len()
            .max(codes.iter().map(|&c| c as usize + 1).max().unwrap_or(0));
        let mut used = vec![false; width];
        for &c in codes {
            used[c as usize] = true;
        }
        let mut remap = vec![u32::MAX; width];
        let mut new_labels = Vec::new();
        for (old, _) in used.iter().enumerate().filter(|(_, u)| **u) {
            remap[old] = new_labels.len() as u32;
            new_labels.push(labels.get(old).cloned().unwrap_or_else(|| old.to_string()));
        }
        CodedColumn {
            name: name.into(),
            codes: codes.iter().map(|&c| remap[c as usize]).collect(),
            labels: new_labels,
            provenance: Provenance::Raw,
        }
    }

    /// Code a categorical label column. Labels sort numerically when they
    /// all parse as numbers, lexicographically otherwise.
    pub fn categorical<S: AsRef<str>>(name: impl Into<String>, values: &[S]) -> Self {
        let mut distinct: Vec<&str> = values.iter().map(|v| v.as_ref()).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let numeric: Option<Vec<f64>> = distinct.iter().map(|s| s.trim().parse::<f64>().ok()).collect();
        if let Some(nums) = numeric {
            let mut idx: Vec<usize> = (0..distinct.len()).collect();
            idx.sort_by(|&a, &b| nums[a].total_cmp(&nums[b]).then(distinct[a].cmp(distinct[b])));
            distinct = idx.into_iter().map(|i| distinct[i]).collect();
        }
        let lookup: BTreeMap<&str, u32> = distinct.iter().enumerate().map(|(i, s)| (*s, i as u32)).collect();
        let codes = values.iter().map(|v| lookup[v.as_ref()]).collect();
        CodedColumn {
            name: name.into(),
            codes,
            labels: distinct.into_iter().map(String::from).collect(),
            provenance: Provenance::Raw,
        }
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, code: u32) -> &str {
        &self.labels[code as usize]
    }

    pub fn n_cats(&self) -> usize {
        self.labels.len()
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.n_cats()];
        for &x in &self.codes {
            c[x as usize] += 1;
        }
        c
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Same category universe, new codes (e.g. a resample or permutation).
    pub(crate) fn with_codes(&self, name: String, codes: Vec<u32>) -> Self {
        CodedColumn {
            name,
            codes,
            labels: self.labels.clone(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn take(&self, rows: &[u32]) -> CodedColumn {
        let codes: Vec<u32> = rows.iter().map(|&i| self.codes[i as usize]).collect();
        let mut c = CodedColumn::from_codes(self.name.clone(), &codes, &self.labels);
        c.provenance = self.provenance.clone();
        c
    }

    /// Per-bin edges and counts for binned columns.
    pub fn bin_rows(&self) -> Option<Vec<BinRow>> {
        let Provenance::Binned { edges, .. } = &self.provenance else {
            return None;
        };
        let counts = self.counts();
        Some(
            counts
                .iter()
                .enumerate()
                .map(|(bin, &count)| BinRow {
                    bin: bin + 1,
                    lower_edge: edges[bin],
                    upper_edge: edges[bin + 1],
                    count,
                })
                .collect(),
        )
    }

    /// True when both columns induce the same partition of rows.
    pub fn same_partition(&self, other: &CodedColumn) -> bool {
        if self.len() != other.len() || self.n_cats() != other.n_cats() {
            return false;
        }
        let mut fwd = vec![u32::MAX; self.n_cats()];
        for (&a, &b) in self.codes.iter().zip(&other.codes) {
            let slot = &mut fwd[a as usize];
            if *slot == u32::MAX {
                *slot = b;
            } else if *slot != b {
                return false;
            }
        }
        let mut seen = vec![false; other.n_cats()];
        fwd.iter().all(|&b| !core::mem::replace(&mut seen[b as usize], true))
    }
}

pub(crate) fn format_value(x: f64) -> String {
    format!("{x}")
}

/// Histogram-bin a continuous feature.
pub fn bin_feature(name: &str, values: &[f64], n_bins: usize, scheme: BinScheme) -> Result<CodedColumn> {
    if n_bins < 2 {
        return Err(Error::InvalidConfig(format!("n_bins must be at least 2, got {n_bins}")));
    }
    if values.is_empty() {
        return Err(Error::ZeroRows);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(name.into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut distinct = 1usize;
    for w in sorted.windows(2) {
        if w[1] > w[0] {
            distinct += 1;
        }
    }
    if distinct == 1 {
        return Err(Error::ConstantFeature(name.into()));
    }
    if distinct < n_bins {
        return Err(Error::TooFewDistinct {
            name: name.into(),
            distinct,
            bins: n_bins,
        });
    }
    let n = sorted.len();
    let (min, max) = (sorted[0], sorted[n - 1]);
    // Interior upper edges; a value equal to an edge belongs to the lower bin.
    let inner: Vec<f64> = match scheme {
        BinScheme::EqualFrequency => (1..n_bins).map(|k| sorted[k * n / n_bins - 1]).collect(),
        BinScheme::EqualWidth => {
            let w = (max - min) / n_bins as f64;
            (1..n_bins).map(|k| min + w * k as f64).collect()
        }
    };
    let raw: Vec<u32> = values.iter().map(|v| inner.partition_point(|e| e < v) as u32).collect();
    let mut col = CodedColumn::from_codes(name, &raw, &[]);
    // Bin boundaries of the occupied bins, then 1-based labels.
    let mut occupied = vec![false; n_bins];
    for &r in &raw {
        occupied[r as usize] = true;
    }
    let mut edges = vec![min];
    for (b, _) in occupied.iter().enumerate().filter(|(_, o)| **o) {
        edges.push(if b + 1 == n_bins { max } else { inner[b] });
    }
    col.labels = (1..=col.n_cats()).map(|i| i.to_string()).collect();
    col.provenance = Provenance::Binned { scheme, edges };
    Ok(col)
}

/// Map mixed-radix keys (all `< bound`) to dense codes, in key order.
pub(crate) fn compact_keys(keys: &[u64], bound: u64) -> (Vec<u32>, Vec<u64>) {
    if bound <= 1 << 22 {
        let mut slot = vec![u32::MAX; bound as usize];
        for &k in keys {
            slot[k as usize] = 0;
        }
        let mut distinct = Vec::new();
        for (k, s) in slot.iter_mut().enumerate() {
            if *s == 0 {
                *s = distinct.len() as u32;
                distinct.push(k as u64);
            }
        }
        (keys.iter().map(|&k| slot[k as usize]).collect(), distinct)
    } else {
        let mut distinct = keys.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let codes = keys.iter().map(|k| distinct.binary_search(k).unwrap() as u32).collect();
        (codes, distinct)
    }
}

/// Dense codes of the fused variable over occupied tuples of `parts`
/// (each `(codes, n_cats)`), ordered lexicographically by member codes.
pub(crate) fn fuse_codes(parts: &[(&[u32], usize)], n_rows: usize) -> (Vec<u32>, usize) {
    let Some((first, rest)) = parts.split_first() else {
        return (vec![0; n_rows], 1);
    };
    let mut acc: Vec<u32> = first.0.to_vec();
    let mut n_acc = first.1;
    for &(codes, n) in rest {
        let bound = n_acc as u64 * n as u64;
        let keys: Vec<u64> = acc
            .iter()
            .zip(codes)
            .map(|(&a, &b)| a as u64 * n as u64 + b as u64)
            .collect();
        let (c, distinct) = compact_keys(&keys, bound);
        acc = c;
        n_acc = distinct.len();
    }
    if parts.len() == 1 {
        // a single member may still carry unused codes when called on raw slices
        let bound = n_acc as u64;
        let keys: Vec<u64> = acc.iter().map(|&a| a as u64).collect();
        let (c, distinct) = compact_keys(&keys, bound);
        return (c, distinct.len());
    }
    (acc, n_acc)
}

/// Fuse coded columns into one categorical variable, one category per
/// occupied tuple of member codes. Fusing a single column is the identity.
pub fn fuse(columns: &[&CodedColumn]) -> Result<CodedColumn> {
    let first = columns.first().ok_or(Error::Empty("fuse needs at least one column"))?;
    if columns.len() == 1 {
        return Ok((*first).clone());
    }
    let n = first.len();
    for c in columns {
        if c.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: c.len(),
            });
        }
    }
    let parts: Vec<(&[u32], usize)> = columns.iter().map(|c| (c.codes(), c.n_cats())).collect();
    let (codes, n_cats) = fuse_codes(&parts, n);
    // Recover member tuples for labels from one representative row each.
    let mut rep = vec![usize::MAX; n_cats];
    for (i, &c) in codes.iter().enumerate() {
        if rep[c as usize] == usize::MAX {
            rep[c as usize] = i;
        }
    }
    let labels = rep
        .iter()
        .map(|&i| {
            columns
                .iter()
                .map(|c| c.label(c.codes[i]))
                .collect::<Vec<_>>()
                .join("-")
        })
        .collect();
    let members: Vec<String> = columns.iter().map(|c| c.name.clone()).collect();
    Ok(CodedColumn {
        name: members.join("_"),
        codes,
        labels,
        provenance: Provenance::Fused { members },
    })
}

/// Binning settings for turning a dataset into coded features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinningConfig {
    pub scheme: BinScheme,
    pub covariate_bins: usize,
    pub response_bins: usize,
    /// Per-feature bin count overrides.
    pub per_feature: BTreeMap<String, usize>,
}

impl Default for BinningConfig {
    fn default() -> Self {
        BinningConfig {
            scheme: BinScheme::EqualFrequency,
            covariate_bins: 12,
            response_bins: 12,
            per_feature: BTreeMap::new(),
        }
    }
}

/// Coded response plus coded covariates over the same rows.
#[derive(Debug, Clone)]
pub struct CodedFrame {
    pub response: CodedColumn,
    pub covariates: Vec<CodedColumn>,
    /// Rows excluded because of missing values.
    pub dropped_rows: usize,
}

impl CodedFrame {
    pub fn new(response: CodedColumn, covariates: Vec<CodedColumn>) -> Result<Self> {
        let n = response.len();
        if n == 0 {
            return Err(Error::ZeroRows);
        }
        for c in &covariates {
            if c.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
        }
        Ok(CodedFrame {
            response,
            covariates,
            dropped_rows: 0,
        })
    }

    /// Code `response` (several names are fused) and `covariates` from a
    /// dataset. Rows missing any of them are excluded and counted.
    pub fn from_dataset(ds: &Dataset, response: &[&str], covariates: &[&str], cfg: &BinningConfig) -> Result<Self> {
        if response.is_empty() {
            return Err(Error::Empty("no response feature"));
        }
        let mut names: Vec<&str> = response.to_vec();
        names.extend(covariates.iter().copied().filter(|c| !response.contains(c)));
        let (view, dropped) = ds.analysis_view(&names)?;
        let code = |name: &str, default_bins: usize| -> Result<CodedColumn> {
            let f = view.feature(name)?;
            match &f.values {
                FeatureValues::Continuous(v) => {
                    let bins = cfg.per_feature.get(name).copied().unwrap_or(default_bins);
                    bin_feature(name, v, bins, cfg.scheme)
                }
                FeatureValues::Categorical(v) => {
                    let labels: Vec<&str> = v.iter().map(|x| x.as_deref().unwrap_or("")).collect();
                    Ok(CodedColumn::categorical(name, &labels))
                }
            }
        };
        let resp_cols = response
            .iter()
            .map(|r| code(r, cfg.response_bins))
            .collect::<Result<Vec<_>>>()?;
        let resp_refs: Vec<&CodedColumn> = resp_cols.iter().collect();
        let resp = fuse(&resp_refs)?;
        let covs = covariates
            .iter()
            .filter(|c| !response.contains(c))
            .map(|c| code(c, cfg.covariate_bins))
            .collect::<Result<Vec<_>>>()?;
        let mut frame = CodedFrame::new(resp, covs)?;
        frame.dropped_rows = dropped;
        Ok(frame)
    }

    pub fn n_rows(&self) -> usize {
        self.response.len()
    }

    pub fn covariate_index(&self, name: &str) -> Result<usize> {
        self.covariates
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::UnknownFeature(name.into()))
    }

    pub fn covariate_names(&self) -> Vec<String> {
        self.covariates.iter().map(|c| c.name.clone()).collect()
    }

    /// Same covariates, different response (e.g. a shadowed one).
    pub fn with_response(&self, response: CodedColumn) -> Result<Self> {
        let mut f = CodedFrame::new(response, self.covariates.clone())?;
        f.dropped_rows = self.dropped_rows;
        Ok(f)
    }
}
