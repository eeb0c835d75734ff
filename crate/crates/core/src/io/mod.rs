//! Instance files: the JSON native format and a minimal MPS reader.

pub mod mps;
pub mod native;

use std::path::Path;

use serde_json::Value;

use crate::error::Result;
use crate::generators::PlantedInstance;
use crate::lp::StandardFormLP;

pub use mps::parse_mps;
pub use native::{parse_document, read_native, write_native, NativeInstanceDocument, SCHEMA_VERSION};

#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub lp: StandardFormLP,
    pub plant: Option<Value>,
}

/// Native documents start with `{`; anything else is read as MPS.
pub fn parse_instance(text: &str) -> Result<LoadedInstance> {
    if text.trim_start().starts_with('{') {
        let doc = parse_document(text)?;
        Ok(LoadedInstance {
            lp: doc.to_lp()?,
            plant: doc.plant,
        })
    } else {
        Ok(LoadedInstance {
            lp: parse_mps(text)?,
            plant: None,
        })
    }
}

pub fn read_instance(path: &Path) -> Result<LoadedInstance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn planted_document(inst: &PlantedInstance) -> NativeInstanceDocument {
    let plant = serde_json::to_value(&inst.plant).expect("plant metadata serializes");
    NativeInstanceDocument::from_lp(&inst.lp, Some(plant))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{generate, GeneratorKind, GeneratorSpec, PlantMetadata};

    #[test]
    fn detects_format() {
        let lp = crate::golden::no_slater();
        let json = write_native(&NativeInstanceDocument::from_lp(&lp, None));
        assert_eq!(parse_instance(&json).unwrap().lp.a, lp.a);
        let mps = "ROWS\n N obj\n E r\nCOLUMNS\n x r 1\nRHS\n r 2\nENDATA\n";
        assert_eq!(parse_instance(mps).unwrap().lp.b[0], 2.0);
    }

    #[test]
    fn generated_sidecar_round_trips() {
        let inst = generate(&GeneratorSpec::new(GeneratorKind::PrimalNoSlater, 3, 7, 3, 11)).unwrap();
        let text = write_native(&planted_document(&inst));
        let loaded = parse_instance(&text).unwrap();
        assert_eq!(loaded.lp.a, inst.lp.a);
        let plant: PlantMetadata = serde_json::from_value(loaded.plant.unwrap()).unwrap();
        assert_eq!(plant.column_permutation, inst.plant.column_permutation);
        assert_eq!(
            plant.planted_primal_certificate.unwrap().support,
            inst.plant.planted_primal_certificate.as_ref().unwrap().support
        );
    }
}
