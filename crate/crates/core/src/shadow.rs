//! Shadowing: resample one variable row by row from its conditional
//! proportions given another.

use alloc::format;
use alloc::vec::Vec;

use serde::Serialize;

use crate::discretize::{fuse, CodedColumn, CodedFrame};
use crate::mfs::{enumerate_ce, CeTable, EnumConfig};
use crate::rng::{below, derive, tag};
use crate::tables::ContingencyTable;
use crate::{Error, Result};

const CHUNK: usize = 1 << 14;

/// B shadowed by A. Row `i` takes a category drawn from the observed counts
/// of B within the A-category of row `i`; the draw uses a word derived from
/// `(seed, i)` alone. The result keeps B's category universe and is named
/// `<B>__shadow__<A>`.
pub fn shadow(a: &CodedColumn, b: &CodedColumn, seed: u64) -> Result<CodedColumn> {
    let t = ContingencyTable::build(a, b)?;
    let nc = t.n_cols();
    // cumulative counts per A-row
    let cum: Vec<u64> = t
        .rows()
        .flat_map(|row| {
            row.iter().scan(0u64, |acc, &v| {
                *acc += v;
                Some(*acc)
            })
        })
        .collect();
    let n = a.len();
    let codes = a.codes();
    let rows = t.row_sums();
    let chunks = n.div_ceil(CHUNK);
    let parts = crate::par::map_indexed(chunks, |k| {
        let lo = k * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi)
            .map(|i| {
                let r = codes[i] as usize;
                let u = below(derive(seed, &[tag::SHADOW, i as u64]), rows[r]);
                let c = &cum[r * nc..(r + 1) * nc];
                c.partition_point(|&x| x <= u) as u32
            })
            .collect::<Vec<u32>>()
    });
    Ok(b.with_codes(format!("{}__shadow__{}", b.name, a.name), parts.concat()))
}

#[derive(Debug, Clone, Serialize)]
pub struct ShadowAnalysis {
    pub shadowed_by: Vec<alloc::string::String>,
    pub response: alloc::string::String,
    pub seed: u64,
    pub tables: Vec<CeTable>,
    #[serde(skip)]
    pub shadowed: CodedColumn,
}

/// Replace the response by its shadow under the fused set `a` and rerun the
/// CE enumeration for `k = 1..=k_max` over all covariates.
pub fn shadow_analysis(
    frame: &CodedFrame,
    a: &[&str],
    k_max: usize,
    cfg: &EnumConfig,
    seed: u64,
) -> Result<ShadowAnalysis> {
    if a.is_empty() {
        return Err(Error::Empty("shadowing set"));
    }
    let members = a
        .iter()
        .map(|name| frame.covariate_index(name).map(|i| &frame.covariates[i]))
        .collect::<Result<Vec<_>>>()?;
    let fused = fuse(&members)?;
    let shadowed = shadow(&fused, &frame.response, seed)?;
    let sframe = frame.with_response(shadowed.clone())?;
    let all: Vec<usize> = (0..frame.covariates.len()).collect();
    let tables = (1..=k_max.min(all.len()))
        .map(|k| enumerate_ce(&sframe, &all, k, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(ShadowAnalysis {
        shadowed_by: a.iter().map(|s| (*s).into()).collect(),
        response: shadowed.name.clone(),
        seed,
        tables,
        shadowed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_table_reproduces_b() {
        let a = CodedColumn::from_codes("a", &[0, 1, 2, 1, 0, 2, 2], &[]);
        let s = shadow(&a, &a, 5).unwrap();
        assert_eq!(s.codes(), a.codes());
        assert_eq!(s.name, "a__shadow__a");
    }

    #[test]
    fn seed_determines_output() {
        let a = CodedColumn::from_codes("a", &(0..5000).map(|i| (i % 3) as u32).collect::<Vec<_>>(), &[]);
        let b = CodedColumn::from_codes("b", &(0..5000).map(|i| (i * 7 % 5) as u32).collect::<Vec<_>>(), &[]);
        assert_eq!(shadow(&a, &b, 1).unwrap(), shadow(&a, &b, 1).unwrap());
        assert_ne!(shadow(&a, &b, 1).unwrap(), shadow(&a, &b, 2).unwrap());
    }

    #[test]
    fn never_emits_unseen_pairs() {
        let a = CodedColumn::from_codes("a", &[0, 0, 0, 1, 1, 1], &[]);
        let b = CodedColumn::from_codes("b", &[0, 1, 0, 2, 2, 3], &[]);
        for seed in 0..20 {
            let s = shadow(&a, &b, seed).unwrap();
            for (x, y) in a.codes().iter().zip(s.codes()) {
                assert!(if *x == 0 { *y < 2 } else { *y >= 2 });
            }
        }
    }
}
