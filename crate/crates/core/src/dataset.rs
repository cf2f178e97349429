//! Row-aligned, immutable column store.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

/// Column payload. Missing entries are `NaN` for continuous columns and
/// `None` for categorical ones.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValues {
    Continuous(Vec<f64>),
    Categorical(Vec<Option<String>>),
}

impl FeatureValues {
    pub fn len(&self) -> usize {
        match self {
            FeatureValues::Continuous(v) => v.len(),
            FeatureValues::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            FeatureValues::Continuous(v) => v[row].is_nan(),
            FeatureValues::Categorical(v) => v[row].is_none(),
        }
    }

    fn take(&self, rows: &[usize]) -> FeatureValues {
        match self {
            FeatureValues::Continuous(v) => FeatureValues::Continuous(rows.iter().map(|&i| v[i]).collect()),
            FeatureValues::Categorical(v) => FeatureValues::Categorical(rows.iter().map(|&i| v[i].clone()).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feature {
    pub name: String,
    pub values: FeatureValues,
    pub is_response: bool,
}

impl Feature {
    pub fn continuous(name: impl Into<String>, values: Vec<f64>) -> Self {
        Feature {
            name: name.into(),
            values: FeatureValues::Continuous(values),
            is_response: false,
        }
    }

    pub fn categorical<S: ToString>(name: impl Into<String>, values: impl IntoIterator<Item = S>) -> Self {
        let values = values.into_iter().map(|v| Some(v.to_string())).collect();
        Feature {
            name: name.into(),
            values: FeatureValues::Categorical(values),
            is_response: false,
        }
    }

    pub fn response(mut self) -> Self {
        self.is_response = true;
        self
    }

    pub fn kind(&self) -> FeatureKind {
        match self.values {
            FeatureValues::Continuous(_) => FeatureKind::Continuous,
            FeatureValues::Categorical(_) => FeatureKind::Categorical,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_rows: usize,
    columns: Vec<Feature>,
    name_index: BTreeMap<String, usize>,
}

impl Dataset {
    pub fn new(columns: Vec<Feature>) -> Result<Self> {
        let n_rows = columns
            .first()
            .map(|c| c.values.len())
            .ok_or(Error::Empty("dataset has no columns"))?;
        let mut name_index = BTreeMap::new();
        for (i, c) in columns.iter().enumerate() {
            if c.values.len() != n_rows {
                return Err(Error::LengthMismatch {
                    expected: n_rows,
                    found: c.values.len(),
                });
            }
            if let FeatureValues::Continuous(v) = &c.values {
                if v.iter().any(|x| x.is_infinite()) {
                    return Err(Error::NonFinite(c.name.clone()));
                }
            }
            if name_index.insert(c.name.clone(), i).is_some() {
                return Err(Error::DuplicateFeature(c.name.clone()));
            }
        }
        Ok(Dataset {
            n_rows,
            columns,
            name_index,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Feature] {
        &self.columns
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.columns.iter().map(|c| c.name.as_str())
    }

    pub fn feature(&self, name: &str) -> Result<&Feature> {
        self.name_index
            .get(name)
            .map(|&i| &self.columns[i])
            .ok_or_else(|| Error::UnknownFeature(name.into()))
    }

    pub fn responses(&self) -> impl Iterator<Item = &Feature> {
        self.columns.iter().filter(|c| c.is_response)
    }

    /// Mark the named columns as responses (and every other column as not).
    pub fn with_responses(mut self, names: &[&str]) -> Result<Self> {
        for n in names {
            self.feature(n)?;
        }
        for c in &mut self.columns {
            c.is_response = names.contains(&c.name.as_str());
        }
        Ok(self)
    }

    /// Rows with no missing value in any of `names`.
    pub fn complete_rows(&self, names: &[&str]) -> Result<Vec<usize>> {
        let cols = names.iter().map(|n| self.feature(n)).collect::<Result<Vec<_>>>()?;
        Ok((0..self.n_rows)
            .filter(|&i| cols.iter().all(|c| !c.values.is_missing(i)))
            .collect())
    }

    /// The sub-dataset an analysis over `names` works on: only those columns,
    /// only complete rows. Returns the view and the number of rows excluded.
    pub fn analysis_view(&self, names: &[&str]) -> Result<(Dataset, usize)> {
        let rows = self.complete_rows(names)?;
        if rows.is_empty() {
            return Err(Error::ZeroRows);
        }
        let dropped = self.n_rows - rows.len();
        let columns = names
            .iter()
            .map(|n| {
                let f = self.feature(n)?;
                Ok(Feature {
                    name: f.name.clone(),
                    values: f.values.take(&rows),
                    is_response: f.is_response,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((Dataset::new(columns)?, dropped))
    }

    /// Replace a categorical column's labels through `map`; labels absent
    /// from the map are kept. Used for config-driven category merging.
    pub fn recode(mut self, name: &str, map: &BTreeMap<String, String>) -> Result<Self> {
        let idx = *self
            .name_index
            .get(name)
            .ok_or_else(|| Error::UnknownFeature(name.into()))?;
        match &mut self.columns[idx].values {
            FeatureValues::Categorical(v) => {
                for x in v.iter_mut().flatten() {
                    if let Some(to) = map.get(x) {
                        *x = to.clone();
                    }
                }
            }
            FeatureValues::Continuous(v) => {
                let labels = v
                    .iter()
                    .map(|x| {
                        if x.is_nan() {
                            return None;
                        }
                        let s = crate::discretize::format_value(*x);
                        Some(map.get(&s).cloned().unwrap_or(s))
                    })
                    .collect();
                self.columns[idx].values = FeatureValues::Categorical(labels);
            }
        }
        Ok(self)
    }
}
