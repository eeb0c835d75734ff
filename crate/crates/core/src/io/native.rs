//! JSON instance documents.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{FacetError, Result};
use crate::lp::StandardFormLP;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NativeInstanceDocument {
    pub schema_version: u32,
    pub m: usize,
    pub n: usize,
    /// Row-major, `m * n` entries.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub objective_offset: f64,
    /// Generator sidecar, kept as an opaque JSON value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plant: Option<Value>,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl NativeInstanceDocument {
    pub fn from_lp(lp: &StandardFormLP, plant: Option<Value>) -> Self {
        let (m, n) = (lp.m(), lp.n());
        let mut a = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                a.push(lp.a[(i, j)]);
            }
        }
        Self {
            schema_version: SCHEMA_VERSION,
            m,
            n,
            a,
            b: lp.b.iter().copied().collect(),
            c: lp.c.iter().copied().collect(),
            names: lp.names.clone(),
            objective_offset: lp.objective_offset,
            plant,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(FacetError::SchemaVersionUnknown(self.schema_version));
        }
        let corrupt = |msg: String| Err(FacetError::CorruptDocument(msg));
        if self.m.checked_mul(self.n) != Some(self.a.len()) {
            return corrupt(format!(
                "a has {} entries, expected m*n = {}*{}",
                self.a.len(),
                self.m,
                self.n
            ));
        }
        if self.b.len() != self.m {
            return corrupt(format!("b has {} entries, expected {}", self.b.len(), self.m));
        }
        if self.c.len() != self.n {
            return corrupt(format!("c has {} entries, expected {}", self.c.len(), self.n));
        }
        if let Some(names) = &self.names {
            if names.len() != self.n {
                return corrupt(format!("{} names for {} columns", names.len(), self.n));
            }
        }
        Ok(())
    }

    pub fn to_lp(&self) -> Result<StandardFormLP> {
        self.check()?;
        let a = DMatrix::from_row_slice(self.m, self.n, &self.a);
        let mut lp = StandardFormLP::new(
            a,
            DVector::from_column_slice(&self.b),
            DVector::from_column_slice(&self.c),
        )?;
        if let Some(names) = &self.names {
            lp = lp.with_names(names.clone())?;
        }
        lp.objective_offset = self.objective_offset;
        Ok(lp)
    }
}

pub fn parse_document(text: &str) -> Result<NativeInstanceDocument> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| FacetError::CorruptDocument(e.to_string()))?;
    let version = value
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| FacetError::CorruptDocument("missing schema_version".into()))?;
    let version = u32::try_from(version).unwrap_or(u32::MAX);
    if version != SCHEMA_VERSION {
        return Err(FacetError::SchemaVersionUnknown(version));
    }
    let doc: NativeInstanceDocument =
        serde_json::from_value(value).map_err(|e| FacetError::CorruptDocument(e.to_string()))?;
    doc.check()?;
    Ok(doc)
}

pub fn read_native(text: &str) -> Result<StandardFormLP> {
    parse_document(text)?.to_lp()
}

/// Pretty-printed JSON with a trailing newline.
pub fn write_native(doc: &NativeInstanceDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("document serializes");
    s.push('\n');
    s
}
