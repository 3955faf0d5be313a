//! Provenance-annotated constant reports.
//!
//! A [`ConstantReport`] is an ordered list of named constants. Every entry
//! records the display it implements (`equation_label`), the names of the
//! entries or inputs it was computed from (`provenance`), and an optional
//! error note (e.g. a documented expansion error). Provenance must point
//! backwards, which makes the dependency graph acyclic by construction.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::lognum::TowerScalar;
use crate::{Error, Result};

/// One named constant with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub name: String,
    pub equation_label: String,
    pub value: TowerScalar,
    pub provenance: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_note: Option<String>,
}

/// Ordered, provenance-checked collection of constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    /// Raw inputs (configured values, not derived ones).
    pub inputs: BTreeMap<String, serde_json::Value>,
    pub entries: Vec<ReportEntry>,
}

impl ConstantReport {
    pub fn new() -> Self {
        ConstantReport { inputs: BTreeMap::new(), entries: Vec::new() }
    }

    /// Records a raw input value.
    pub fn input(&mut self, name: &str, value: impl Serialize) -> Result<()> {
        self.inputs.insert(name.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Appends an entry; every provenance name must refer to an earlier entry
    /// or a recorded input.
    pub fn push(
        &mut self,
        name: &str,
        equation_label: &str,
        value: TowerScalar,
        provenance: &[&str],
        error_note: Option<String>,
    ) -> Result<()> {
        for p in provenance {
            let known = self.inputs.contains_key(*p)
                || self.entries.iter().any(|e| e.name == *p);
            if !known {
                return Err(Error::Config(format!(
                    "entry '{name}' depends on unknown name '{p}' (provenance must be acyclic)"
                )));
            }
        }
        if self.entries.iter().any(|e| e.name == name) {
            return Err(Error::Config(format!("duplicate report entry '{name}'")));
        }
        self.entries.push(ReportEntry {
            name: name.to_string(),
            equation_label: equation_label.to_string(),
            value,
            provenance: provenance.iter().map(|s| s.to_string()).collect(),
            error_note,
        });
        Ok(())
    }

    /// Convenience for plain `f64` values.
    pub fn push_f64(
        &mut self,
        name: &str,
        equation_label: &str,
        value: f64,
        provenance: &[&str],
        error_note: Option<String>,
    ) -> Result<()> {
        self.push(name, equation_label, TowerScalar::from_f64(value)?, provenance, error_note)
    }

    pub fn get(&self, name: &str) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Serializes to pretty JSON.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat CSV: `name,level,log_magnitude` where `log_magnitude` is
    /// `ln |x|` when it fits an `f64` and the stored magnitude otherwise.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "name,level,log_magnitude")?;
        for e in &self.entries {
            let lm = e.value.ln_abs_f64().unwrap_or(e.value.mag());
            writeln!(w, "{},{},{}", e.name, e.value.level(), lm)?;
        }
        Ok(())
    }
}

impl Default for ConstantReport {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provenance_must_exist() {
        let mut r = ConstantReport::new();
        r.input("d", 3u32).unwrap();
        r.push_f64("sigma", "series", 1.0, &["d"], None).unwrap();
        r.push_f64("c1", "iteration constant", 2.0, &["d", "sigma"], None).unwrap();
        assert!(r.push_f64("bad", "x", 1.0, &["missing"], None).is_err());
        assert!(r.push_f64("c1", "dup", 1.0, &[], None).is_err());
    }

    #[test]
    fn json_round_trip_and_csv() {
        let mut r = ConstantReport::new();
        r.input("d", 2u32).unwrap();
        r.push("big", "x", TowerScalar::from_ln(1e20).unwrap(), &["d"], None).unwrap();
        let s = r.to_json().unwrap();
        let back: ConstantReport = serde_json::from_str(&s).unwrap();
        assert_eq!(r, back);
        let mut csv = Vec::new();
        r.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.contains("big,2,"));
    }
}
