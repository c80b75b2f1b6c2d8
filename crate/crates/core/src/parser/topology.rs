use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::json::{path_index, path_key};
use super::{strip_line_comments, DataFlow, Diagnostic, SloDocument, Stage, ValidationReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyComponent {
    pub id: String,
    #[serde(rename = "type", default)]
    pub kind: String,
}

/// Minimal application topology: components with their service kind and the
/// directed edges between them.
///
/// File format: `{ "components": [{"id", "type"}], "edges": [{"from", "to"}] }`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyModel {
    pub components: Vec<TopologyComponent>,
    #[serde(default)]
    pub edges: Vec<DataFlow>,
}

impl TopologyModel {
    /// The topology implied by a document's own components and data flow.
    pub fn derive_from(doc: &SloDocument) -> Self {
        TopologyModel {
            components: doc
                .components
                .iter()
                .map(|(id, c)| TopologyComponent { id: id.clone(), kind: c.kind().to_string() })
                .collect(),
            edges: doc.data_flow.clone(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology is always serializable")
    }
}

pub fn parse_topology(text: &str) -> Result<TopologyModel, ValidationReport> {
    let topo: TopologyModel = serde_json::from_str(&strip_line_comments(text)).map_err(|e| {
        ValidationReport::from_errors(vec![Diagnostic::new(
            Stage::Syntax,
            "topology",
            format!("invalid topology at line {} column {}: {e}", e.line(), e.column()),
        )])
    })?;
    let mut errors = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, c) in topo.components.iter().enumerate() {
        let p = path_index("topology.components", i);
        if c.id.is_empty() {
            errors.push(Diagnostic::new(Stage::Syntax, path_key(&p, "id"), "component id must be non-empty"));
        } else if !ids.insert(c.id.as_str()) {
            errors.push(Diagnostic::new(Stage::Syntax, path_key(&p, "id"), format!("duplicate component id \"{}\"", c.id)));
        }
    }
    for (i, e) in topo.edges.iter().enumerate() {
        for (key, end) in [("from", &e.from), ("to", &e.to)] {
            if !ids.contains(end.as_str()) {
                errors.push(Diagnostic::new(
                    Stage::Consistency,
                    path_key(&path_index("topology.edges", i), key),
                    format!("edge endpoint \"{end}\" is not a topology component"),
                ));
            }
        }
    }
    if errors.is_empty() {
        Ok(topo)
    } else {
        Err(ValidationReport::from_errors(errors))
    }
}
