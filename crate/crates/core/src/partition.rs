//! De-association: split the rows by the categories of a conditioning set
//! and evaluate CE tables inside each locality.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::Serialize;

use crate::discretize::{CodedColumn, CodedFrame};
use crate::infotheory::cond_entropy_of;
use crate::mfs::{enumerate_ce, CeTable, EnumConfig};
use crate::{Error, Result};

/// Rows grouped by the occupied categories of a fused conditioning set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Partition {
    pub conditioning: Vec<String>,
    pub labels: Vec<String>,
    pub cells: Vec<Vec<u32>>,
}

impl Partition {
    pub fn from_column(col: &CodedColumn, conditioning: Vec<String>) -> Self {
        let mut cells = vec_of_vecs(col.n_cats());
        for (i, &c) in col.codes().iter().enumerate() {
            cells[c as usize].push(i as u32);
        }
        Partition {
            conditioning,
            labels: col.labels().to_vec(),
            cells,
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.cells.iter().map(Vec::len).collect()
    }

    pub fn n_rows(&self) -> usize {
        self.cells.iter().map(Vec::len).sum()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

fn vec_of_vecs(n: usize) -> Vec<Vec<u32>> {
    (0..n).map(|_| Vec::new()).collect()
}

/// Partition of the frame's rows by the fused covariates `a`.
pub fn partition_by(frame: &CodedFrame, a: &[&str]) -> Result<Partition> {
    if a.is_empty() {
        return Err(Error::Empty("conditioning set"));
    }
    let fused = crate::mfs::fused_set(frame, a)?;
    Ok(Partition::from_column(
        &fused,
        a.iter().map(|s| String::from(*s)).collect(),
    ))
}

/// One locality's CE tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityTables {
    pub label: String,
    pub n: usize,
    pub tables: Vec<CeTable>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedEntry {
    pub set: Vec<String>,
    /// Σ_a (n_a / N) CE_a over every locality.
    pub weighted_ce: f64,
    /// Same sum over reported localities only, weights renormalized.
    pub partial_ce: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalCeTable {
    pub conditioning: Vec<String>,
    pub response: String,
    pub min_cell: usize,
    pub n_rows: usize,
    pub localities: Vec<LocalityTables>,
    /// Labels and sizes of localities under `min_cell`.
    pub skipped: Vec<(String, usize)>,
    /// Weighted CE per feature-set for each k, ascending.
    pub weighted: BTreeMap<usize, Vec<WeightedEntry>>,
}

impl ConditionalCeTable {
    pub fn weighted_entry(&self, names: &[&str]) -> Option<&WeightedEntry> {
        let k = names.len();
        self.weighted
            .get(&k)?
            .iter()
            .find(|e| names.iter().all(|n| e.set.iter().any(|s| s == n)))
    }

    pub fn locality(&self, label: &str) -> Option<&LocalityTables> {
        self.localities.iter().find(|l| l.label == label)
    }
}

/// De-associate every covariate outside `a` from `a` and tabulate CEs up
/// to `k_max` within each locality with at least `min_cell` rows.
pub fn deassoc_ce(
    frame: &CodedFrame,
    a: &[&str],
    k_max: usize,
    min_cell: usize,
    cfg: &EnumConfig,
) -> Result<ConditionalCeTable> {
    let part = partition_by(frame, a)?;
    let outside: Vec<usize> = (0..frame.covariates.len())
        .filter(|&i| !a.contains(&frame.covariates[i].name.as_str()))
        .collect();
    if outside.is_empty() {
        return Err(Error::Empty("no covariates outside the conditioning set"));
    }
    if part.cells.iter().all(|c| c.len() < min_cell) {
        return Err(Error::AllLocalitiesTooSmall { min_cell });
    }
    let k_max = k_max.min(outside.len());
    let subframes: Vec<CodedFrame> = part
        .cells
        .iter()
        .map(|rows| {
            let y = frame.response.take(rows);
            let covs = outside.iter().map(|&i| frame.covariates[i].take(rows)).collect();
            CodedFrame::new(y, covs)
        })
        .collect::<Result<_>>()?;
    let local_idx: Vec<usize> = (0..outside.len()).collect();
    let reported: Vec<usize> = (0..part.len()).filter(|&c| part.cells[c].len() >= min_cell).collect();
    let tables = crate::par::map_indexed(reported.len(), |r| {
        let f = &subframes[reported[r]];
        (1..=k_max)
            .map(|k| enumerate_ce(f, &local_idx, k, cfg))
            .collect::<Result<Vec<_>>>()
    });
    let mut localities = Vec::with_capacity(reported.len());
    for (r, t) in reported.iter().zip(tables) {
        localities.push(LocalityTables {
            label: part.labels[*r].clone(),
            n: part.cells[*r].len(),
            tables: t?,
        });
    }
    let skipped = (0..part.len())
        .filter(|&c| part.cells[c].len() < min_cell)
        .map(|c| (part.labels[c].clone(), part.cells[c].len()))
        .collect();

    let n = frame.n_rows() as f64;
    let n_reported: usize = reported.iter().map(|&c| part.cells[c].len()).sum();
    let mut weighted = BTreeMap::new();
    for k in 1..=k_max {
        // every set seen in any reported locality, evaluated in every locality
        let mut sets: Vec<Vec<String>> = localities
            .iter()
            .flat_map(|l| l.tables[k - 1].entries.iter().map(|e| e.set.names.clone()))
            .collect();
        sets.sort();
        sets.dedup();
        let rows = crate::par::map_indexed(sets.len(), |s| -> Result<WeightedEntry> {
            let names: Vec<&str> = sets[s].iter().map(String::as_str).collect();
            let mut total = 0.0;
            let mut partial = 0.0;
            for (c, f) in subframes.iter().enumerate() {
                let col = if names.len() == 1 {
                    f.covariates[f.covariate_index(names[0])?].clone()
                } else {
                    crate::mfs::fused_set(f, &names)?
                };
                let ce = cond_entropy_of(&f.response, &col)?;
                let size = part.cells[c].len() as f64;
                total += size / n * ce;
                if part.cells[c].len() >= min_cell {
                    partial += size / n_reported as f64 * ce;
                }
            }
            Ok(WeightedEntry {
                set: sets[s].clone(),
                weighted_ce: total,
                partial_ce: partial,
            })
        });
        let mut rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
        rows.sort_by(|x, y| x.weighted_ce.total_cmp(&y.weighted_ce).then_with(|| x.set.cmp(&y.set)));
        weighted.insert(k, rows);
    }
    Ok(ConditionalCeTable {
        conditioning: part.conditioning,
        response: frame.response.name.clone(),
        min_cell,
        n_rows: frame.n_rows(),
        localities,
        skipped,
        weighted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::fuse;
    use alloc::vec;

    #[test]
    fn weighted_ce_equals_joint_ce() {
        let n = 3000;
        let a: Vec<u32> = (0..n).map(|i| (i * 7 % 3) as u32).collect();
        let b: Vec<u32> = (0..n).map(|i| (i * 13 % 5) as u32).collect();
        let y: Vec<u32> = (0..n).map(|i| ((i * 7 % 3 + i * 13 % 5 + i % 2) % 4) as u32).collect();
        let frame = CodedFrame::new(
            CodedColumn::from_codes("Y", &y, &[]),
            vec![
                CodedColumn::from_codes("A", &a, &[]),
                CodedColumn::from_codes("B", &b, &[]),
            ],
        )
        .unwrap();
        let t = deassoc_ce(&frame, &["A"], 1, 10, &EnumConfig::default()).unwrap();
        let ab = fuse(&[&frame.covariates[0], &frame.covariates[1]]).unwrap();
        let joint = cond_entropy_of(&frame.response, &ab).unwrap();
        let w = t.weighted_entry(&["B"]).unwrap();
        assert!((w.weighted_ce - joint).abs() < 1e-10);
        assert_eq!(t.skipped.len(), 0);
        assert!((w.partial_ce - w.weighted_ce).abs() < 1e-12);
        assert!(matches!(
            deassoc_ce(&frame, &["A"], 1, 5000, &EnumConfig::default()),
            Err(Error::AllLocalitiesTooSmall { .. })
        ));
    }

    #[test]
    fn partition_is_exhaustive() {
        let frame = CodedFrame::new(
            CodedColumn::from_codes("Y", &[0, 1, 0, 1], &[]),
            vec![CodedColumn::categorical("A", &["x", "y", "x", "z"])],
        )
        .unwrap();
        let p = partition_by(&frame, &["A"]).unwrap();
        assert_eq!(p.sizes(), vec![2, 1, 1]);
        assert_eq!(p.n_rows(), 4);
        assert_eq!(p.labels, vec!["x", "y", "z"]);
    }
}
