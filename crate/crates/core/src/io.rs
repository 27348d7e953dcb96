//! File formats for entropy and hyperlink tables.
//!
//! ```json
//! {"format": "ehl-table/1", "kind": "entropy", "n": 3, "unit": "nats",
//!  "meta": {"tool": "ehl 0.1.0", "seed": 7, "config": {...}},
//!  "values": [0.0, ...]}
//! ```
//!
//! `values[m]` belongs to the block whose mask is `m` (bit 0 = site 1).
//! Values are stored in the file's unit and converted back to nats on read.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ehl::HyperlinkTable;
use crate::error::{Error, Result};
use crate::lattice::LatticeTable;

pub const TABLE_FORMAT: &str = "ehl-table/1";
pub const TOOL: &str = concat!("ehl ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    /// Converts a value in nats to this unit.
    pub fn from_nats(self, x: f64) -> f64 {
        match self {
            Unit::Nats => x,
            Unit::Bits => x / LN_2,
        }
    }

    pub fn to_nats(self, x: f64) -> f64 {
        match self {
            Unit::Nats => x,
            Unit::Bits => x * LN_2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableKind {
    Entropy,
    Ehl,
}

impl FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "entropy" => Ok(TableKind::Entropy),
            "ehl" => Ok(TableKind::Ehl),
            other => Err(Error::input(format!("unknown table kind '{other}'"))),
        }
    }
}

/// Provenance embedded in every output file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub config: serde_json::Value,
}

impl Meta {
    pub fn new(seed: Option<u64>, config: serde_json::Value) -> Self {
        Self {
            tool: TOOL.to_string(),
            seed,
            config,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableFile {
    pub format: String,
    pub kind: TableKind,
    pub n: usize,
    pub unit: Unit,
    pub meta: Meta,
    pub values: Vec<f64>,
}

impl TableFile {
    pub fn new(kind: TableKind, table: &LatticeTable<f64>, unit: Unit, meta: Meta) -> Self {
        Self {
            format: TABLE_FORMAT.to_string(),
            kind,
            n: table.n_sites(),
            unit,
            meta,
            values: table.values().iter().map(|&x| unit.from_nats(x)).collect(),
        }
    }

    pub fn entropy(table: &LatticeTable<f64>, unit: Unit, meta: Meta) -> Self {
        Self::new(TableKind::Entropy, table, unit, meta)
    }

    pub fn ehl(table: &HyperlinkTable<f64>, unit: Unit, meta: Meta) -> Self {
        Self::new(TableKind::Ehl, table.table(), unit, meta)
    }

    /// Values converted back to nats.
    pub fn to_table(&self) -> Result<LatticeTable<f64>> {
        if self.format != TABLE_FORMAT {
            return Err(Error::input(format!(
                "unsupported table format '{}', expected '{TABLE_FORMAT}'",
                self.format
            )));
        }
        if self.values.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("table holds non-finite values"));
        }
        let values = self.values.iter().map(|&x| self.unit.to_nats(x)).collect();
        LatticeTable::from_values(self.n, values)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Reads an entropy table, or an EHL table and transforms it back.
pub fn read_entropies(text: &str) -> Result<LatticeTable<f64>> {
    let file = TableFile::from_json(text)?;
    let table = file.to_table()?;
    Ok(match file.kind {
        TableKind::Entropy => table,
        TableKind::Ehl => HyperlinkTable::from_table(table)?.entropies(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bits_round_trip() {
        let t = LatticeTable::from_values(1, vec![0.0, LN_2]).unwrap();
        let f = TableFile::entropy(&t, Unit::Bits, Meta::new(Some(3), serde_json::json!({})));
        assert_eq!(f.values, vec![0.0, 1.0]);
        let back = TableFile::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back.meta.seed, Some(3));
        assert_eq!(back.to_table().unwrap().values(), t.values());
    }

    #[test]
    fn rejects_bad_files() {
        let t = LatticeTable::from_values(1, vec![0.0, 1.0]).unwrap();
        let mut f = TableFile::entropy(&t, Unit::Nats, Meta::new(None, serde_json::Value::Null));
        f.format = "other".into();
        assert!(f.to_table().is_err());
        f.format = TABLE_FORMAT.into();
        f.values.push(0.0);
        assert!(f.to_table().is_err());
        assert!(TableFile::from_json("{").is_err());
        assert!("xyz".parse::<TableKind>().is_err());
    }

    #[test]
    fn ehl_file_reads_back_as_entropies() {
        let s = LatticeTable::from_values(2, vec![0.0, LN_2, LN_2, 0.0]).unwrap();
        let j = crate::ehl::ehl_table(&s);
        let f = TableFile::ehl(&j, Unit::Nats, Meta::new(None, serde_json::Value::Null));
        assert_eq!(f.kind, TableKind::Ehl);
        let back = read_entropies(&f.to_json().unwrap()).unwrap();
        assert!(back.values().iter().zip(s.values()).all(|(a, b)| (a - b).abs() < 1e-15));
    }
}
