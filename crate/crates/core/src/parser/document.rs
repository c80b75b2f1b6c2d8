use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::model::{SloRequirement, SloValue};

/// A directed data-transfer edge between two components.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DataFlow {
    pub from: String,
    pub to: String,
}

impl DataFlow {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        DataFlow { from: from.into(), to: to.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub slos: Vec<SloRequirement>,
    /// Free-form settings; `type` is always present after a successful parse.
    pub config: BTreeMap<String, Value>,
}

impl ComponentSpec {
    pub fn new(kind: &str, slos: Vec<SloRequirement>) -> Self {
        let mut config = BTreeMap::new();
        config.insert("type".to_string(), Value::String(kind.to_string()));
        ComponentSpec { slos, config }
    }

    /// The `config.type` value, which drives candidate filtering.
    pub fn kind(&self) -> &str {
        self.config.get("type").and_then(Value::as_str).unwrap_or("")
    }

    pub fn requirement(&self, slo: &str) -> Option<&SloRequirement> {
        self.slos.iter().find(|r| r.slo == slo)
    }
}

/// Parsed `.slo` model: per-component requirements, application-level
/// requirements and data-flow edges.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SloDocument {
    pub components: BTreeMap<String, ComponentSpec>,
    pub application_slos: Vec<SloRequirement>,
    pub data_flow: Vec<DataFlow>,
}

fn requirement_json(r: &SloRequirement) -> Value {
    let value = match r.value {
        SloValue::Scalar { value } => json!(value),
        SloValue::Interval { lower, upper } => json!([lower, upper]),
        SloValue::Categorical { label } => json!(label.as_str()),
    };
    json!({
        "name": r.slo,
        "value": value,
        "operator": r.operator.token(),
        "unit": r.unit.symbol,
    })
}

impl SloDocument {
    /// Canonical `.slo` JSON for this document. Values are written as JSON
    /// numbers, intervals as two-element arrays.
    pub fn to_json(&self) -> Value {
        let mut root = Map::new();
        for (id, comp) in &self.components {
            let config: Map<String, Value> = comp.config.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
            root.insert(
                id.clone(),
                json!({
                    "SLOs": comp.slos.iter().map(requirement_json).collect::<Vec<_>>(),
                    "config": config,
                }),
            );
        }
        if !self.application_slos.is_empty() {
            root.insert(
                "application".into(),
                json!({ "SLOs": self.application_slos.iter().map(requirement_json).collect::<Vec<_>>() }),
            );
        }
        if !self.data_flow.is_empty() {
            root.insert(
                "data_flow".into(),
                Value::Array(self.data_flow.iter().map(|f| json!({ "from": f.from, "to": f.to })).collect()),
            );
        }
        Value::Object(root)
    }

    pub fn to_slo_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("document JSON is always serializable")
    }

    pub fn component_ids(&self) -> impl Iterator<Item = &str> {
        self.components.keys().map(String::as_str)
    }
}
