use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DocType;
use crate::error::{Error, Result};

const DEFAULT_RULES: &str = include_str!("../../config/doctype_mapping.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingRule {
    pub keyword: String,
    pub doctype: DocType,
}

/// Ordered keyword rules; the first keyword found as a case-insensitive
/// substring of the title wins, otherwise [`DocType::OtherPolicy`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MappingRuleset {
    rules: Vec<MappingRule>,
}

impl Default for MappingRuleset {
    fn default() -> Self {
        MappingRuleset::from_json(DEFAULT_RULES).expect("bundled mapping ruleset is valid")
    }
}

impl MappingRuleset {
    pub fn new(rules: Vec<MappingRule>) -> Result<Self> {
        for r in &rules {
            if r.keyword.is_empty() {
                return Err(Error::Config("mapping keyword must not be empty".into()));
            }
            if r.keyword != r.keyword.to_lowercase() {
                return Err(Error::Config(format!(
                    "mapping keyword `{}` must be lowercase",
                    r.keyword
                )));
            }
        }
        Ok(MappingRuleset { rules })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rules: Vec<MappingRule> = serde_json::from_str(text)?;
        MappingRuleset::new(rules)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        MappingRuleset::from_json(&text)
    }

    pub fn rules(&self) -> &[MappingRule] {
        &self.rules
    }

    pub fn map(&self, doc_type_raw: &str) -> DocType {
        let title = doc_type_raw.to_lowercase();
        self.rules
            .iter()
            .find(|r| title.contains(&r.keyword))
            .map_or(DocType::OtherPolicy, |r| r.doctype)
    }
}
