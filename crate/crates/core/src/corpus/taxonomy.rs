use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::{CaseId, NUM_CASES};
use crate::error::{Error, Result};

/// Case descriptions indexed by case id.
///
/// The bundled default carries placeholder descriptions (`"Case 17"`) with
/// id 245 named `"abstain"`; load the real case list with
/// [`CaseTaxonomy::load`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseTaxonomy {
    descriptions: Vec<String>,
    by_text: HashMap<String, CaseId>,
}

impl Default for CaseTaxonomy {
    fn default() -> Self {
        let descriptions = (0..NUM_CASES)
            .map(|i| {
                if i == CaseId::ABSTAIN.index() {
                    "abstain".to_string()
                } else {
                    format!("Case {i}")
                }
            })
            .collect();
        CaseTaxonomy::new(descriptions).expect("default taxonomy is valid")
    }
}

impl CaseTaxonomy {
    pub fn new(descriptions: Vec<String>) -> Result<Self> {
        if descriptions.len() != NUM_CASES {
            return Err(Error::Config(format!(
                "taxonomy must have {NUM_CASES} entries, found {}",
                descriptions.len()
            )));
        }
        let mut by_text = HashMap::with_capacity(descriptions.len());
        for (i, d) in descriptions.iter().enumerate() {
            if by_text.insert(d.clone(), CaseId::new(i)?).is_some() {
                return Err(Error::Config(format!("duplicate case description `{d}`")));
            }
        }
        Ok(CaseTaxonomy {
            descriptions,
            by_text,
        })
    }

    /// Parses `{"0": "...", "1": "...", ...}`; ids must be contiguous from 0.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, String> = serde_json::from_str(text)?;
        let mut entries: Vec<(usize, String)> = raw
            .into_iter()
            .map(|(k, v)| {
                k.trim()
                    .parse::<usize>()
                    .map(|id| (id, v))
                    .map_err(|_| Error::Config(format!("taxonomy key `{k}` is not an integer")))
            })
            .collect::<Result<_>>()?;
        entries.sort_by_key(|(id, _)| *id);
        for (expected, (id, _)) in entries.iter().enumerate() {
            if *id != expected {
                return Err(Error::Config(format!(
                    "taxonomy ids must be contiguous from 0; missing id {expected}"
                )));
            }
        }
        CaseTaxonomy::new(entries.into_iter().map(|(_, d)| d).collect())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        CaseTaxonomy::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<usize, &String> = self.descriptions.iter().enumerate().collect();
        serde_json::to_string_pretty(&map).expect("string map serializes")
    }

    pub fn len(&self) -> usize {
        self.descriptions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptions.is_empty()
    }

    pub fn description(&self, id: CaseId) -> &str {
        &self.descriptions[id.index()]
    }

    pub fn lookup(&self, description: &str) -> Option<CaseId> {
        self.by_text.get(description).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (CaseId, &str)> {
        self.descriptions
            .iter()
            .enumerate()
            .map(|(i, d)| (CaseId(i as u16), d.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_has_abstain_last() {
        let t = CaseTaxonomy::default();
        assert_eq!(t.len(), 246);
        assert_eq!(t.description(CaseId::ABSTAIN), "abstain");
        assert_eq!(t.lookup("abstain"), Some(CaseId::ABSTAIN));
    }

    #[test]
    fn lookups_are_inverse() {
        let t = CaseTaxonomy::default();
        for (id, d) in t.iter() {
            assert_eq!(t.lookup(d), Some(id));
            assert_eq!(t.description(id), d);
        }
    }

    #[test]
    fn json_round_trip() {
        let t = CaseTaxonomy::default();
        assert_eq!(CaseTaxonomy::from_json(&t.to_json()).unwrap(), t);
    }

    #[test]
    fn rejects_gaps_and_duplicates() {
        let mut map: BTreeMap<usize, String> = (0..246).map(|i| (i, format!("c{i}"))).collect();
        map.remove(&10);
        map.insert(246, "c246".into());
        assert!(CaseTaxonomy::from_json(&serde_json::to_string(&map).unwrap()).is_err());

        let mut dup: Vec<String> = (0..246).map(|i| format!("c{i}")).collect();
        dup[3] = "c4".into();
        assert!(CaseTaxonomy::new(dup).is_err());
    }
}
