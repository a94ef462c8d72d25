use std::fmt;
use std::sync::Arc;

use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{family, EnvError, FamilySpec, HorizontalLaw, StratifiedEnvironment, StratumLaw};

/// Rule for levels outside a tabulated window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extension {
    Periodic,
    Constant,
    Reject,
}

/// One tabulated stratum, written `[p, q, r, [[k…], mass], …]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TableRow {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub mu: Vec<(Vec<i64>, f64)>,
}

impl Serialize for TableRow {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3 + self.mu.len()))?;
        seq.serialize_element(&self.p)?;
        seq.serialize_element(&self.q)?;
        seq.serialize_element(&self.r)?;
        for entry in &self.mu {
            seq.serialize_element(entry)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for TableRow {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct RowVisitor;

        impl<'de> Visitor<'de> for RowVisitor {
            type Value = TableRow;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an array [p, q, r, [[k...], mass], ...]")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<TableRow, A::Error> {
                let mut probs = [0.0; 3];
                for (i, slot) in probs.iter_mut().enumerate() {
                    *slot = seq
                        .next_element()?
                        .ok_or_else(|| de::Error::invalid_length(i, &self))?;
                }
                let mut mu = Vec::new();
                while let Some(entry) = seq.next_element::<(Vec<i64>, f64)>()? {
                    mu.push(entry);
                }
                Ok(TableRow {
                    p: probs[0],
                    q: probs[1],
                    r: probs[2],
                    mu,
                })
            }
        }

        deserializer.deserialize_seq(RowVisitor)
    }
}

/// Strata listed level by level on `window`, with an extension rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableSpec {
    pub window: [i64; 2],
    pub rows: Vec<TableRow>,
    pub extension: Extension,
}

impl TableSpec {
    pub fn build(&self, dim: usize, delta: f64) -> Result<StratifiedEnvironment, EnvError> {
        let [lo, hi] = self.window;
        if hi < lo {
            return Err(EnvError::EmptyRange);
        }
        let expected = (hi - lo + 1) as usize;
        if self.rows.len() != expected {
            return Err(EnvError::Config(format!(
                "window [{lo}, {hi}] needs {expected} rows, found {}",
                self.rows.len()
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mu = Arc::new(HorizontalLaw::new(dim, &row.mu)?);
                StratumLaw::new(row.p, row.q, row.r, mu)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut env = StratifiedEnvironment::tabulated(dim, delta, lo, rows, self.extension)?;
        env.family = Some(FamilySpec::Tabulated(self.clone()));
        Ok(env)
    }
}

/// Top-level environment document:
/// `{"d": int, "family": {...} | "table": {...}, "delta": float}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<TableSpec>,
    pub delta: f64,
}

impl EnvironmentConfig {
    pub fn from_json(text: &str) -> Result<Self, EnvError> {
        serde_json::from_str(text).map_err(|e| EnvError::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<StratifiedEnvironment, EnvError> {
        match (&self.family, &self.table) {
            (Some(spec), None) => family(self.d, self.delta, spec),
            (None, Some(table)) => table.build(self.d, self.delta),
            _ => Err(EnvError::Config(
                "exactly one of \"family\" or \"table\" is required".into(),
            )),
        }
    }

    /// Levels checked by default when validating this configuration.
    pub fn validation_window(&self) -> (i64, i64) {
        match (&self.table, &self.family) {
            (Some(t), _) | (None, Some(FamilySpec::Tabulated(t))) => (t.window[0], t.window[1]),
            _ => super::family::FAMILY_CHECK_RANGE,
        }
    }
}
