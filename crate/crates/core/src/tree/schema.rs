use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FeatureKind {
    Numeric { lower: f64, upper: f64 },
    Categorical { domain: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
}

impl FeatureSpec {
    pub fn numeric(name: impl Into<String>, lower: f64, upper: f64) -> Self {
        FeatureSpec { name: name.into(), kind: FeatureKind::Numeric { lower, upper } }
    }

    pub fn categorical<S: Into<String>>(name: impl Into<String>, domain: impl IntoIterator<Item = S>) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Categorical { domain: domain.into_iter().map(Into::into).collect() },
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, FeatureKind::Numeric { .. })
    }

    /// Index of `value` in a categorical domain.
    pub fn category_index(&self, value: &str) -> Option<u32> {
        match &self.kind {
            FeatureKind::Categorical { domain } => domain.iter().position(|c| c == value).map(|i| i as u32),
            FeatureKind::Numeric { .. } => None,
        }
    }
}

/// Public description of the feature space and label domain.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    label: String,
    classes: Vec<String>,
    features: Vec<FeatureSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemaDoc {
    label: String,
    classes: Vec<String>,
    features: IndexMap<String, FeatureKind>,
}

impl FeatureSchema {
    pub fn new(label: impl Into<String>, classes: Vec<String>, features: Vec<FeatureSpec>) -> Result<Self> {
        let schema = FeatureSchema { label: label.into(), classes, features };
        schema.validate()?;
        Ok(schema)
    }

    fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Schema("schema has no features".into()));
        }
        if self.classes.is_empty() {
            return Err(Error::Schema("label column has no classes".into()));
        }
        if has_duplicates(&self.classes) {
            return Err(Error::Schema("duplicate class names".into()));
        }
        let names: Vec<String> = self.features.iter().map(|f| f.name.clone()).collect();
        if has_duplicates(&names) {
            return Err(Error::Schema("duplicate feature names".into()));
        }
        if names.contains(&self.label) {
            return Err(Error::Schema(format!("label column {:?} is also a feature", self.label)));
        }
        for f in &self.features {
            match &f.kind {
                FeatureKind::Numeric { lower, upper } => {
                    if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                        return Err(Error::Schema(format!("feature {:?}: need finite lower < upper", f.name)));
                    }
                }
                FeatureKind::Categorical { domain } => {
                    if domain.is_empty() {
                        return Err(Error::Schema(format!("feature {:?}: empty domain", f.name)));
                    }
                    if has_duplicates(domain) {
                        return Err(Error::Schema(format!("feature {:?}: duplicate categories", f.name)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SchemaDoc = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        let features = doc.features.into_iter().map(|(name, kind)| FeatureSpec { name, kind }).collect();
        Self::new(doc.label, doc.classes, features)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    fn doc(&self) -> SchemaDoc {
        SchemaDoc {
            label: self.label.clone(),
            classes: self.classes.clone(),
            features: self.features.iter().map(|f| (f.name.clone(), f.kind.clone())).collect(),
        }
    }

    /// Single-line JSON form.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.doc()).expect("schema serialises")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.doc()).expect("schema serialises")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_pretty() + "\n")?;
        Ok(())
    }

    /// Hex SHA-256 of the single-line JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_index(&self, name: &str) -> Option<u32> {
        self.classes.iter().position(|c| c == name).map(|i| i as u32)
    }

    pub fn features(&self) -> &[FeatureSpec] {
        &self.features
    }

    pub fn num_features(&self) -> usize {
        self.features.len()
    }

    pub fn feature(&self, i: usize) -> &FeatureSpec {
        &self.features[i]
    }
}

fn has_duplicates(items: &[String]) -> bool {
    let mut sorted: Vec<&String> = items.iter().collect();
    sorted.sort();
    sorted.windows(2).any(|w| w[0] == w[1])
}
