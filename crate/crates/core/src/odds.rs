//! Binary-response reporting: odds across localities, best binary triplet
//! per locality and majority-rule accuracy.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::Serialize;

use crate::discretize::{fuse, CodedColumn};
use crate::infotheory::{ce_codes, entropy, fused_keys};
use crate::tables::{ContingencyTable, OddsRow};
use crate::{Error, Result};

fn require_binary(c: &CodedColumn) -> Result<()> {
    if c.n_cats() != 2 {
        return Err(Error::NotBinary {
            name: c.name.clone(),
            categories: c.n_cats(),
        });
    }
    Ok(())
}

fn fused_or_constant(cols: &[&CodedColumn], n: usize, name: &str) -> Result<CodedColumn> {
    if cols.is_empty() {
        let mut c = CodedColumn::from_codes(name, &vec![0; n], &[String::from("all")]);
        c.name = name.into();
        Ok(c)
    } else {
        fuse(cols)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityOdds {
    pub locality: String,
    pub expansion: String,
    pub row: OddsRow,
}

/// One odds row per occupied (locality, expansion category) pair, in
/// locality then expansion order. An empty `expand` gives one row per
/// locality.
pub fn locality_odds(
    response: &CodedColumn,
    locality: &[&CodedColumn],
    expand: &[&CodedColumn],
) -> Result<Vec<LocalityOdds>> {
    require_binary(response)?;
    let n = response.len();
    let loc = fused_or_constant(locality, n, "locality")?;
    let exp = fused_or_constant(expand, n, "expansion")?;
    let both = fuse(&[&loc, &exp])?;
    let t = ContingencyTable::build(&both, response)?;
    // representative row per fused category to recover its parts
    let mut rep = vec![usize::MAX; both.n_cats()];
    for (i, &c) in both.codes().iter().enumerate() {
        if rep[c as usize] == usize::MAX {
            rep[c as usize] = i;
        }
    }
    Ok(t.rows()
        .zip(rep)
        .map(|(r, i)| LocalityOdds {
            locality: loc.label(loc.codes()[i]).into(),
            expansion: exp.label(exp.codes()[i]).into(),
            row: OddsRow::new(both.label(both.codes()[i]).into(), r[0], r[1]),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TripletChoice {
    pub locality: String,
    pub n: usize,
    /// `None` when the locality is smaller than `min_n` (reported as NA).
    pub triplet: Option<Vec<String>>,
    pub ce_drop: Option<f64>,
}

/// Exhaustive search, inside each locality, for the three binary
/// candidates whose fused variable gives the largest CE-drop. Ties go to
/// the lexicographically first index triple.
pub fn best_triplet_per_locality(
    response: &CodedColumn,
    localities: &[&CodedColumn],
    candidates: &[&CodedColumn],
    min_n: usize,
) -> Result<Vec<TripletChoice>> {
    require_binary(response)?;
    for c in candidates {
        require_binary(c)?;
    }
    if candidates.len() < 3 {
        return Err(Error::InvalidConfig(alloc::format!(
            "need at least 3 candidates, got {}",
            candidates.len()
        )));
    }
    let n = response.len();
    let loc = fused_or_constant(localities, n, "locality")?;
    let mut cells: Vec<Vec<u32>> = (0..loc.n_cats()).map(|_| Vec::new()).collect();
    for (i, &c) in loc.codes().iter().enumerate() {
        cells[c as usize].push(i as u32);
    }
    let k = candidates.len();
    let triples: Vec<[usize; 3]> = (0..k)
        .flat_map(|a| (a + 1..k).flat_map(move |b| (b + 1..k).map(move |c| [a, b, c])))
        .collect();
    let out = crate::par::map_indexed(cells.len(), |l| -> Result<TripletChoice> {
        let rows = &cells[l];
        let label = String::from(loc.labels()[l].as_str());
        if rows.len() < min_n {
            return Ok(TripletChoice {
                locality: label,
                n: rows.len(),
                triplet: None,
                ce_drop: None,
            });
        }
        let y = response.take(rows);
        let hy = entropy(&y.counts())?;
        let subs: Vec<CodedColumn> = candidates.iter().map(|c| c.take(rows)).collect();
        let mut best: Option<(f64, [usize; 3])> = None;
        for t in &triples {
            let members: Vec<&CodedColumn> = t.iter().map(|&i| &subs[i]).collect();
            let (keys, nk) = fused_keys(&members, rows.len(), usize::MAX);
            let drop = hy - ce_codes(&keys, nk, y.codes(), y.n_cats()).0;
            if best.is_none_or(|(d, _)| drop > d) {
                best = Some((drop, *t));
            }
        }
        let (d, t) = best.expect("at least one triple");
        Ok(TripletChoice {
            locality: label,
            n: rows.len(),
            triplet: Some(t.iter().map(|&i| candidates[i].name.clone()).collect()),
            ce_drop: Some(d),
        })
    });
    out.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalityRule {
    pub locality: String,
    pub n: u64,
    /// Predicted response label.
    pub majority: String,
    pub odds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorityEval {
    pub rules: Vec<LocalityRule>,
    pub accuracy: f64,
    pub blind_label: String,
    pub blind_accuracy: f64,
}

/// Per-row majority class of a locality-vs-binary-response table, with the
/// training accuracies of that rule and of the global majority ("blind")
/// rule. Ties predict the first column.
pub fn majority_rule_table(t: &ContingencyTable) -> Result<MajorityEval> {
    let odds = t.odds_table()?;
    let total = t.total() as f64;
    let mut correct = 0u64;
    let rules = odds
        .iter()
        .map(|r| {
            let pick = usize::from(r.count_col1 > r.count_col0);
            correct += r.count_col0.max(r.count_col1);
            LocalityRule {
                locality: r.label.clone(),
                n: r.n(),
                majority: t.col_labels[pick].clone(),
                odds: r.odds,
            }
        })
        .collect();
    let cs = t.col_sums();
    let blind = usize::from(cs[1] > cs[0]);
    Ok(MajorityEval {
        rules,
        accuracy: correct as f64 / total,
        blind_label: t.col_labels[blind].clone(),
        blind_accuracy: cs[blind] as f64 / total,
    })
}

pub fn majority_rule_eval(response: &CodedColumn, locality: &[&CodedColumn]) -> Result<MajorityEval> {
    require_binary(response)?;
    let loc = fused_or_constant(locality, response.len(), "locality")?;
    majority_rule_table(&ContingencyTable::build(&loc, response)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bin(name: &str, bits: &[u32]) -> CodedColumn {
        CodedColumn::from_codes(name, bits, &[String::from("0"), String::from("1")])
    }

    #[test]
    fn odds_with_and_without_expansion() {
        let y = bin("y", &[0, 1, 0, 0, 1, 1]);
        let l = bin("l", &[0, 0, 0, 1, 1, 1]);
        let e = bin("e", &[0, 1, 1, 0, 0, 1]);
        let rows = locality_odds(&y, &[&l], &[]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].row.count_col0, 2);
        assert_eq!(rows[1].row.odds, 2.0);
        let rows = locality_odds(&y, &[&l], &[&e]).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[1].locality.as_str(), rows[1].expansion.as_str()), ("0", "1"));
    }

    #[test]
    fn majority_flips_on_high_odds() {
        let t = ContingencyTable::from_counts(&[vec![90, 10], vec![20, 30]]).unwrap();
        let m = majority_rule_table(&t).unwrap();
        assert_eq!(m.rules[1].majority, "1");
        assert!(m.accuracy >= m.blind_accuracy);
        assert!((m.accuracy - 120.0 / 150.0).abs() < 1e-12);
    }

    #[test]
    fn triplet_search_with_na() {
        let n = 64u32;
        let bits = |s: u32| (0..n).map(|i| (i >> s) & 1).collect::<Vec<_>>();
        let y: Vec<u32> = (0..n).map(|i| (i & 1) ^ ((i >> 1) & 1)).collect();
        let y = bin("y", &y);
        let c: Vec<CodedColumn> = (0..4).map(|s| bin(&alloc::format!("c{s}"), &bits(s))).collect();
        let refs: Vec<&CodedColumn> = c.iter().collect();
        let out = best_triplet_per_locality(&y, &[], &refs, 10).unwrap();
        let trip = out[0].triplet.as_ref().unwrap();
        assert!(trip.contains(&"c0".into()) && trip.contains(&"c1".into()));
        let na = best_triplet_per_locality(&y, &[], &refs, 100).unwrap();
        assert!(na[0].triplet.is_none());
    }
}
