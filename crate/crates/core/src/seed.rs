//! Seed vocabulary shipped with the crate: upper-ontology stubs, the
//! individual patterns, their alignment and the capability taxonomy.

use crate::error::KbError;
use crate::kb::KnowledgeBase;
use crate::turtle;

macro_rules! model_file {
    ($path:literal) => {
        (
            $path,
            include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/", $path)),
        )
    };
}

/// `(relative path, contents)` of every seed file, in load order.
pub const SEED_FILES: &[(&str, &str)] = &[
    model_file!("seed/upper-stubs.ttl"),
    model_file!("seed/vdi2206.ttl"),
    model_file!("seed/structure.ttl"),
    model_file!("seed/vdi3682.ttl"),
    model_file!("seed/ieee1872-2.ttl"),
    model_file!("seed/iec61360.ttl"),
    model_file!("seed/isa88.ttl"),
    model_file!("seed/skill.ttl"),
    model_file!("seed/alignment.ttl"),
    model_file!("aur-cap.ttl"),
];

/// Property type descriptions used by the default fleet and missions.
pub const PROPERTY_FILE: (&str, &str) = model_file!("properties.ttl");

/// Loads every seed file into one knowledge base with all model prefixes bound.
pub fn seed_kb() -> Result<KnowledgeBase, KbError> {
    let mut kb = KnowledgeBase::with_model_prefixes();
    for (_, text) in SEED_FILES {
        turtle::load_into(&mut kb, text)?;
    }
    Ok(kb)
}

/// Seed plus the shipped property type descriptions.
pub fn seed_with_properties() -> Result<KnowledgeBase, KbError> {
    let mut kb = seed_kb()?;
    turtle::load_into(&mut kb, PROPERTY_FILE.1)?;
    Ok(kb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_seed_file_parses() {
        for (path, text) in SEED_FILES {
            turtle::parse_turtle(text).unwrap_or_else(|e| panic!("{path}: {e}"));
        }
        seed_with_properties().unwrap();
    }
}
