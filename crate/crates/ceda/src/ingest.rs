//! CSV ingestion and export of datasets.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use ceda_core::{Dataset, Feature, FeatureKind, FeatureValues};

use crate::error::{CliError, Result};

/// Cell values read as missing.
pub const MISSING: &[&str] = &["", "NA", "NaN", "nan", "null"];

#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    /// Forced kinds by column name; other columns are inferred.
    pub kinds: BTreeMap<String, FeatureKind>,
    /// Drop every row with a missing value up front instead of per analysis.
    pub drop_missing: bool,
}

/// Read a kind-override file (`column = continuous | categorical`).
pub fn read_kinds(path: &Path) -> Result<BTreeMap<String, FeatureKind>> {
    crate::keyvalue::read(path)?
        .into_iter()
        .map(|(k, v)| {
            let kind = match v.as_str() {
                "continuous" => FeatureKind::Continuous,
                "categorical" => FeatureKind::Categorical,
                _ => {
                    return Err(CliError::Config(format!(
                        "{}: kind of `{k}` must be continuous or categorical, got `{v}`",
                        path.display()
                    )))
                }
            };
            Ok((k, kind))
        })
        .collect()
}

fn is_missing(s: &str) -> bool {
    MISSING.contains(&s.trim())
}

pub fn ingest_csv(path: &Path, responses: &[&str], opts: &IngestOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    ingest_reader(file, responses, opts)
}

pub fn ingest_reader<R: std::io::Read>(reader: R, responses: &[&str], opts: &IngestOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(String::from).collect();
    if header.is_empty() {
        return Err(CliError::Input("missing header row".into()));
    }
    for r in responses {
        if !header.iter().any(|h| h == r) {
            return Err(ceda_core::Error::UnknownFeature((*r).into()).into());
        }
    }
    for k in opts.kinds.keys() {
        if !header.iter().any(|h| h == k) {
            return Err(CliError::Config(format!("kind override for unknown column `{k}`")));
        }
    }
    let mut raw: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for rec in rdr.records() {
        let rec = rec?;
        for (col, v) in raw.iter_mut().zip(rec.iter()) {
            col.push(v.to_string());
        }
    }
    if raw[0].is_empty() {
        return Err(ceda_core::Error::ZeroRows.into());
    }
    let n = raw[0].len();
    let keep: Vec<usize> = if opts.drop_missing {
        (0..n).filter(|&i| raw.iter().all(|c| !is_missing(&c[i]))).collect()
    } else {
        (0..n).collect()
    };
    let mut cols = Vec::with_capacity(header.len());
    for (name, values) in header.iter().zip(raw) {
        let present: Vec<&str> = keep
            .iter()
            .map(|&i| values[i].as_str())
            .filter(|s| !is_missing(s))
            .collect();
        if present.is_empty() {
            return Err(CliError::Input(format!("column `{name}` has no parseable values")));
        }
        let numeric = present.iter().all(|s| s.parse::<f64>().is_ok_and(f64::is_finite));
        let kind = opts.kinds.get(name).copied().unwrap_or(if numeric {
            FeatureKind::Continuous
        } else {
            FeatureKind::Categorical
        });
        let vals = match kind {
            FeatureKind::Continuous => {
                let parsed = keep
                    .iter()
                    .map(|&i| {
                        let s = values[i].as_str();
                        if is_missing(s) {
                            Ok(f64::NAN)
                        } else {
                            s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                                CliError::Input(format!("column `{name}`: `{s}` is not a finite number"))
                            })
                        }
                    })
                    .collect::<Result<Vec<f64>>>()?;
                FeatureValues::Continuous(parsed)
            }
            FeatureKind::Categorical => FeatureValues::Categorical(
                keep.iter()
                    .map(|&i| (!is_missing(&values[i])).then(|| values[i].clone()))
                    .collect(),
            ),
        };
        cols.push(Feature {
            name: name.clone(),
            values: vals,
            is_response: responses.contains(&name.as_str()),
        });
    }
    Ok(Dataset::new(cols)?)
}

/// Write a dataset as CSV. Continuous values keep full precision.
pub fn write_csv<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ds.names())?;
    for i in 0..ds.n_rows() {
        let row: Vec<String> = ds
            .columns()
            .iter()
            .map(|c| match &c.values {
                FeatureValues::Continuous(v) if v[i].is_nan() => String::new(),
                FeatureValues::Continuous(v) => format!("{}", v[i]),
                FeatureValues::Categorical(v) => v[i].clone().unwrap_or_default(),
            })
            .collect();
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| CliError::io("<output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infers_kinds_and_counts_missing() {
        let csv = "y,a,b\n1,x,0.5\n0,,1.5\n1,z,NA\n";
        let ds = ingest_reader(csv.as_bytes(), &["y"], &IngestOptions::default()).unwrap();
        assert_eq!(ds.n_rows(), 3);
        assert_eq!(ds.feature("a").unwrap().kind(), FeatureKind::Categorical);
        assert_eq!(ds.feature("b").unwrap().kind(), FeatureKind::Continuous);
        assert!(ds.feature("y").unwrap().is_response);
        let dropped = ingest_reader(
            csv.as_bytes(),
            &["y"],
            &IngestOptions {
                drop_missing: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(dropped.n_rows(), 1);
    }

    #[test]
    fn overrides_and_errors() {
        let csv = "g,v\n1,2\n5,3\n";
        let mut kinds = BTreeMap::new();
        kinds.insert("g".to_string(), FeatureKind::Categorical);
        let ds = ingest_reader(
            csv.as_bytes(),
            &[],
            &IngestOptions {
                kinds,
                drop_missing: false,
            },
        )
        .unwrap();
        assert_eq!(ds.feature("g").unwrap().kind(), FeatureKind::Categorical);
        let err = ingest_reader("a,b\n".as_bytes(), &[], &IngestOptions::default()).unwrap_err();
        assert_eq!(err.to_string(), "zero rows");
        assert!(ingest_reader(csv.as_bytes(), &["Y"], &IngestOptions::default()).is_err());
        assert!(ingest_reader("a,b\n,1\n".as_bytes(), &[], &IngestOptions::default()).is_err());
    }
}
