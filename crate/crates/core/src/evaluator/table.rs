use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use super::{EvalError, FitnessEvaluator};
use crate::space::{Configuration, ConfigurationSpace};

/// Replays measured configuration/performance pairs.
///
/// CSV layout: a header with the option names in space order followed by a
/// final `fitness` column; value cells are domain tokens.
#[derive(Debug, Clone)]
pub struct TableEvaluator {
    space: ConfigurationSpace,
    table: HashMap<String, f64>,
    negated: bool,
}

impl TableEvaluator {
    pub fn from_map(space: ConfigurationSpace, table: HashMap<String, f64>) -> Result<Self, EvalError> {
        for (key, &value) in &table {
            space.parse_key(key)?;
            if !value.is_finite() {
                return Err(EvalError::NonFinite {
                    key: key.clone(),
                    value,
                });
            }
        }
        Ok(Self {
            space,
            table,
            negated: false,
        })
    }

    /// Loads a measurement table. With `maximize`, every value is negated so that
    /// the rest of the pipeline can keep minimizing.
    pub fn from_csv<R: Read>(space: ConfigurationSpace, reader: R, maximize: bool) -> Result<Self, EvalError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr
            .headers()
            .map_err(|e| EvalError::Table(e.to_string()))?
            .clone();
        let mut expected: Vec<&str> = space.options().iter().map(|o| o.name()).collect();
        expected.push("fitness");
        let got: Vec<&str> = headers.iter().map(str::trim).collect();
        if got != expected {
            return Err(EvalError::Table(format!(
                "header must be `{}`, found `{}`",
                expected.join(","),
                got.join(",")
            )));
        }
        let n = space.dimension();
        let mut table = HashMap::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| EvalError::Table(e.to_string()))?;
            let line = row + 2;
            let mut values = Vec::with_capacity(n);
            for i in 0..n {
                let idx = space
                    .value_index(i, record[i].trim())
                    .map_err(|e| EvalError::Table(format!("line {line}: {e}")))?;
                values.push(idx);
            }
            let raw = record[n].trim();
            let fitness: f64 = raw
                .parse()
                .map_err(|_| EvalError::Table(format!("line {line}: invalid fitness `{raw}`")))?;
            let key = space.canonical_key(&Configuration::new(values))?;
            if !fitness.is_finite() {
                return Err(EvalError::NonFinite { key, value: fitness });
            }
            let fitness = if maximize { -fitness } else { fitness };
            if table.insert(key.clone(), fitness).is_some() {
                return Err(EvalError::Table(format!("line {line}: duplicate row for `{key}`")));
            }
        }
        Ok(Self {
            space,
            table,
            negated: maximize,
        })
    }

    pub fn load(space: ConfigurationSpace, path: &Path, maximize: bool) -> Result<Self, EvalError> {
        let file = std::fs::File::open(path).map_err(|e| EvalError::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv(space, file, maximize)
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// True if the source values were negated at load time.
    pub fn negated(&self) -> bool {
        self.negated
    }

    pub fn space(&self) -> &ConfigurationSpace {
        &self.space
    }
}

impl FitnessEvaluator for TableEvaluator {
    fn evaluate(&self, x: &Configuration) -> Result<f64, EvalError> {
        let key = self.space.canonical_key(x)?;
        match self.table.get(&key) {
            Some(&f) => Ok(f),
            None => Err(EvalError::MissingMeasurement { key }),
        }
    }
}
