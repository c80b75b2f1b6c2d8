//! `.slo` document parsing and the three validation stages: syntax, unit and
//! consistency.
//!
//! The format is JSON with `//` line comments allowed. Top-level keys are
//! component ids plus the reserved keys `application` and `data_flow`:
//!
//! ```text
//! {
//!   "database_comp": {
//!     "SLOs": [ { "name": "Monthly_uptime_percentage", "value": "0.9999",
//!                 "operator": ">=", "unit": "" } ],
//!     "config": { "type": "database" }
//!   },
//!   "application": { "SLOs": [ ... ] },
//!   "data_flow": [ { "from": "solver_comp", "to": "database_comp" } ]
//! }
//! ```
//!
//! Values may be JSON numbers or numeric strings. Intervals (operator `in`)
//! are written as `[lower, upper]`, either as an array or as a string.
//! Categorical values are `"low"`, `"medium"` or `"high"`.
//!
//! Errors are collected exhaustively; every diagnostic carries a JSON path.

mod document;
pub(crate) mod json;
mod report;
mod topology;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::model::{Category, Operator, SloRegistry, SloRequirement, SloValue};

pub use document::{ComponentSpec, DataFlow, SloDocument};
pub use json::strip_line_comments;
pub use report::{Diagnostic, Stage, ValidationReport};
pub use topology::{parse_topology, TopologyComponent, TopologyModel};

use json::{path_index, path_key, Node};

pub const APPLICATION_KEY: &str = "application";
pub const DATA_FLOW_KEY: &str = "data_flow";
const SLOS_KEY: &str = "SLOs";
const CONFIG_KEY: &str = "config";
const SLO_KEYS: [&str; 4] = ["name", "value", "operator", "unit"];

/// JSON paths of requirements and edges as they appeared in the source text.
///
/// A leniently parsed document drops malformed entries, so positions in the
/// typed document can differ from positions in the file.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    component_slos: HashMap<(String, usize), String>,
    application_slos: Vec<String>,
    data_flow: Vec<String>,
}

impl SourceMap {
    /// Paths assuming the document was written out exactly as stored.
    pub fn identity(doc: &SloDocument) -> Self {
        let mut map = SourceMap::default();
        for (id, comp) in &doc.components {
            let base = path_key(&path_key("$", id), SLOS_KEY);
            for i in 0..comp.slos.len() {
                map.component_slos.insert((id.clone(), i), path_index(&base, i));
            }
        }
        let app = path_key(&path_key("$", APPLICATION_KEY), SLOS_KEY);
        map.application_slos = (0..doc.application_slos.len()).map(|i| path_index(&app, i)).collect();
        let flows = path_key("$", DATA_FLOW_KEY);
        map.data_flow = (0..doc.data_flow.len()).map(|i| path_index(&flows, i)).collect();
        map
    }

    pub fn component_slo(&self, component: &str, index: usize) -> String {
        self.component_slos
            .get(&(component.to_string(), index))
            .cloned()
            .unwrap_or_else(|| path_index(&path_key(&path_key("$", component), SLOS_KEY), index))
    }

    pub fn application_slo(&self, index: usize) -> String {
        self.application_slos
            .get(index)
            .cloned()
            .unwrap_or_else(|| path_index(&path_key(&path_key("$", APPLICATION_KEY), SLOS_KEY), index))
    }

    pub fn data_flow(&self, index: usize) -> String {
        self.data_flow
            .get(index)
            .cloned()
            .unwrap_or_else(|| path_index(&path_key("$", DATA_FLOW_KEY), index))
    }
}

/// Result of a lenient parse: whatever could be recovered plus diagnostics.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    /// `None` only when the text is not a JSON object at all.
    pub document: Option<SloDocument>,
    pub source_map: SourceMap,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses a `.slo` text into a typed document.
///
/// Fails when any syntax error, unknown unit symbol or dangling data-flow
/// endpoint is found. Unit-kind mismatches are left to [`validate_units`].
pub fn parse_slo(text: &str, registry: &SloRegistry) -> Result<SloDocument, ValidationReport> {
    let outcome = parse_lenient(text, registry);
    match outcome.document {
        Some(doc) if outcome.diagnostics.is_empty() => Ok(doc),
        _ => Err(ValidationReport::from_errors(outcome.diagnostics)),
    }
}

/// Parses as much of the text as possible, collecting every problem.
pub fn parse_lenient(text: &str, registry: &SloRegistry) -> ParseOutcome {
    let stripped = strip_line_comments(text);
    let root: Node = match serde_json::from_str(&stripped) {
        Ok(node) => node,
        Err(e) => {
            return ParseOutcome {
                document: None,
                source_map: SourceMap::default(),
                diagnostics: vec![Diagnostic::new(
                    Stage::Syntax,
                    "$",
                    format!("malformed JSON at line {} column {}: {}", e.line(), e.column(), e),
                )],
            };
        }
    };
    let mut p = Parser { registry, diags: Vec::new(), map: SourceMap::default() };
    let document = p.document(&root);
    ParseOutcome { document, source_map: p.map, diagnostics: p.diags }
}

struct Parser<'r> {
    registry: &'r SloRegistry,
    diags: Vec<Diagnostic>,
    map: SourceMap,
}

impl Parser<'_> {
    fn syntax(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic::new(Stage::Syntax, location, message));
    }

    fn document(&mut self, root: &Node) -> Option<SloDocument> {
        let Node::Object(pairs) = root else {
            self.syntax("$", format!("document must be a JSON object, found {}", root.type_name()));
            return None;
        };
        let mut doc = SloDocument::default();
        let mut seen = BTreeSet::new();
        let mut flows_node = None;
        let mut saw_component = false;
        for (key, value) in pairs {
            let path = path_key("$", key);
            if !seen.insert(key.as_str()) {
                self.syntax(&path, format!("duplicate key \"{key}\""));
                continue;
            }
            match key.as_str() {
                APPLICATION_KEY => {
                    let app_path = path.clone();
                    self.expect_keys(value, &app_path, &[SLOS_KEY]);
                    if let Node::Object(fields) = value {
                        if let Some((_, slos)) = fields.iter().find(|(k, _)| k == SLOS_KEY) {
                            let base = path_key(&app_path, SLOS_KEY);
                            for (req, src) in self.requirements(slos, &base) {
                                doc.application_slos.push(req);
                                self.map.application_slos.push(src);
                            }
                        }
                    }
                }
                DATA_FLOW_KEY => flows_node = Some((value, path)),
                "" => self.syntax(&path, "component id must be a non-empty string"),
                id => {
                    saw_component = true;
                    if let Some(comp) = self.component(id, value, &path) {
                        doc.components.insert(id.to_string(), comp);
                    }
                }
            }
        }
        if !saw_component {
            self.syntax("$", "no components declared");
        }
        if let Some((node, path)) = flows_node {
            self.data_flow(node, &path, &mut doc);
        }
        Some(doc)
    }

    /// Reports unknown and duplicate keys of an object node.
    fn expect_keys(&mut self, node: &Node, path: &str, allowed: &[&str]) -> bool {
        let Node::Object(fields) = node else {
            self.syntax(path, format!("expected an object, found {}", node.type_name()));
            return false;
        };
        let mut seen = BTreeSet::new();
        for (k, _) in fields {
            if !allowed.contains(&k.as_str()) {
                self.syntax(
                    path_key(path, k),
                    format!("unknown element key \"{k}\" (expected one of: {})", allowed.join(", ")),
                );
            } else if !seen.insert(k.as_str()) {
                self.syntax(path_key(path, k), format!("duplicate element key \"{k}\""));
            }
        }
        true
    }

    fn component(&mut self, id: &str, node: &Node, path: &str) -> Option<ComponentSpec> {
        if !self.expect_keys(node, path, &[SLOS_KEY, CONFIG_KEY]) {
            return None;
        }
        let Node::Object(fields) = node else { unreachable!() };
        let mut spec = ComponentSpec { slos: Vec::new(), config: BTreeMap::new() };
        if let Some((_, slos)) = fields.iter().find(|(k, _)| k == SLOS_KEY) {
            let base = path_key(path, SLOS_KEY);
            for (req, src) in self.requirements(slos, &base) {
                let pos = spec.slos.len();
                self.map.component_slos.insert((id.to_string(), pos), src);
                spec.slos.push(req);
            }
        }
        let config_path = path_key(path, CONFIG_KEY);
        match fields.iter().find(|(k, _)| k == CONFIG_KEY) {
            Some((_, Node::Object(cfg))) => {
                for (k, v) in cfg {
                    spec.config.insert(k.clone(), v.to_value());
                }
                match cfg.iter().find(|(k, _)| k == "type").map(|(_, v)| v) {
                    Some(Node::String(t)) if !t.trim().is_empty() => {}
                    Some(Node::String(_)) => self.syntax(path_key(&config_path, "type"), "component type must be non-empty"),
                    Some(other) => self.syntax(
                        path_key(&config_path, "type"),
                        format!("component type must be a string, found {}", other.type_name()),
                    ),
                    None => self.syntax(&config_path, "missing required key \"type\""),
                }
            }
            Some((_, other)) => {
                self.syntax(&config_path, format!("config must be an object, found {}", other.type_name()))
            }
            None => self.syntax(path, "missing required element \"config\" with a \"type\""),
        }
        Some(spec)
    }

    fn requirements(&mut self, node: &Node, path: &str) -> Vec<(SloRequirement, String)> {
        let Node::Array(items) = node else {
            self.syntax(path, format!("SLOs must be an array, found {}", node.type_name()));
            return Vec::new();
        };
        items
            .iter()
            .enumerate()
            .filter_map(|(i, item)| {
                let p = path_index(path, i);
                self.requirement(item, &p).map(|r| (r, p))
            })
            .collect()
    }

    fn requirement(&mut self, node: &Node, path: &str) -> Option<SloRequirement> {
        if !self.expect_keys(node, path, &SLO_KEYS) {
            return None;
        }
        let Node::Object(fields) = node else { unreachable!() };
        let get = |key: &str| fields.iter().find(|(k, _)| k == key).map(|(_, v)| v);
        let mut ok = true;
        for key in SLO_KEYS {
            if get(key).is_none() {
                self.syntax(path, format!("missing element key \"{key}\""));
                ok = false;
            }
        }
        if !ok {
            return None;
        }

        let name_path = path_key(path, "name");
        let name = match get("name") {
            Some(Node::String(name)) if self.registry.lookup(name).is_some() => Some(name.clone()),
            Some(Node::String(name)) => {
                self.syntax(name_path, format!("unknown SLO name \"{name}\""));
                None
            }
            Some(other) => {
                self.syntax(name_path, format!("SLO name must be a string, found {}", other.type_name()));
                None
            }
            None => None,
        };

        let op_path = path_key(path, "operator");
        let operator = match get("operator") {
            Some(Node::String(tok)) => match tok.trim().parse::<Operator>() {
                Ok(op) => Some(op),
                Err(()) => {
                    self.syntax(op_path, format!("invalid operator \"{tok}\" (expected <, <=, >, >=, = or in)"));
                    None
                }
            },
            Some(other) => {
                self.syntax(op_path, format!("operator must be a string, found {}", other.type_name()));
                None
            }
            None => None,
        };

        let unit_path = path_key(path, "unit");
        let unit = match get("unit") {
            Some(Node::String(sym)) => match self.registry.units().lookup(sym.trim()) {
                Some(u) => Some(u.clone()),
                None => {
                    self.diags.push(Diagnostic::new(Stage::Unit, unit_path, format!("unknown unit \"{sym}\"")));
                    None
                }
            },
            Some(other) => {
                self.syntax(unit_path, format!("unit must be a string, found {}", other.type_name()));
                None
            }
            None => None,
        };

        let value_path = path_key(path, "value");
        let value = match (get("value"), operator) {
            (Some(v), Some(op)) => self.value(v, op, &value_path),
            _ => None,
        };

        Some(SloRequirement { slo: name?, operator: operator?, value: value?, unit: unit? })
    }

    fn value(&mut self, node: &Node, op: Operator, path: &str) -> Option<SloValue> {
        if op == Operator::In {
            return match interval_of(node) {
                Ok((lower, upper)) if lower <= upper => Some(SloValue::Interval { lower, upper }),
                Ok((lower, upper)) => {
                    self.syntax(path, format!("interval lower bound {lower} exceeds upper bound {upper}"));
                    None
                }
                Err(msg) => {
                    self.syntax(path, format!("operator \"in\" requires an interval [lower, upper]: {msg}"));
                    None
                }
            };
        }
        match node {
            Node::Array(_) => {
                self.syntax(path, format!("interval values require operator \"in\", not \"{op}\""));
                None
            }
            Node::String(s) if s.trim().starts_with('[') => {
                self.syntax(path, format!("interval values require operator \"in\", not \"{op}\""));
                None
            }
            Node::String(s) => {
                if let Ok(label) = s.trim().parse::<Category>() {
                    return Some(SloValue::Categorical { label });
                }
                match number_of(node) {
                    Some(v) => Some(SloValue::scalar(v)),
                    None => {
                        self.syntax(path, format!("value \"{s}\" is neither a finite number nor low/medium/high"));
                        None
                    }
                }
            }
            Node::Number(_) => match number_of(node) {
                Some(v) => Some(SloValue::scalar(v)),
                None => {
                    self.syntax(path, "value is not a finite number");
                    None
                }
            },
            other => {
                self.syntax(path, format!("value must be a number or string, found {}", other.type_name()));
                None
            }
        }
    }

    fn data_flow(&mut self, node: &Node, path: &str, doc: &mut SloDocument) {
        let Node::Array(items) = node else {
            self.syntax(path, format!("data_flow must be an array, found {}", node.type_name()));
            return;
        };
        for (i, item) in items.iter().enumerate() {
            let p = path_index(path, i);
            if !self.expect_keys(item, &p, &["from", "to"]) {
                continue;
            }
            let Node::Object(fields) = item else { unreachable!() };
            let mut ends = Vec::with_capacity(2);
            for key in ["from", "to"] {
                let kp = path_key(&p, key);
                match fields.iter().find(|(k, _)| k == key).map(|(_, v)| v) {
                    Some(Node::String(id)) if doc.components.contains_key(id) => ends.push(id.clone()),
                    Some(Node::String(id)) => self.diags.push(Diagnostic::new(
                        Stage::Consistency,
                        kp,
                        format!("data_flow endpoint \"{id}\" is not a declared component"),
                    )),
                    Some(other) => {
                        self.syntax(kp, format!("data_flow endpoint must be a string, found {}", other.type_name()))
                    }
                    None => self.syntax(&p, format!("missing element key \"{key}\"")),
                }
            }
            if let [from, to] = &ends[..] {
                doc.data_flow.push(DataFlow::new(from.clone(), to.clone()));
                self.map.data_flow.push(p);
            }
        }
    }
}

fn number_of(node: &Node) -> Option<f64> {
    let v = match node {
        Node::Number(n) => *n,
        Node::String(s) => s.trim().parse::<f64>().ok()?,
        _ => return None,
    };
    v.is_finite().then_some(v)
}

fn interval_of(node: &Node) -> Result<(f64, f64), String> {
    match node {
        Node::Array(items) if items.len() == 2 => {
            let lo = number_of(&items[0]).ok_or("lower bound is not a finite number")?;
            let hi = number_of(&items[1]).ok_or("upper bound is not a finite number")?;
            Ok((lo, hi))
        }
        Node::Array(items) => Err(format!("expected 2 bounds, found {}", items.len())),
        Node::String(s) => {
            let inner = s
                .trim()
                .strip_prefix('[')
                .and_then(|rest| rest.strip_suffix(']'))
                .ok_or("expected \"[lower, upper]\"")?;
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 2 {
                return Err(format!("expected 2 bounds, found {}", parts.len()));
            }
            let parse = |s: &str| s.trim().parse::<f64>().ok().filter(|v| v.is_finite());
            let lo = parse(parts[0]).ok_or("lower bound is not a finite number")?;
            let hi = parse(parts[1]).ok_or("upper bound is not a finite number")?;
            Ok((lo, hi))
        }
        other => Err(format!("found {}", other.type_name())),
    }
}

/// Checks every requirement's unit against the kind its SLO admits.
pub fn validate_units(doc: &SloDocument, registry: &SloRegistry) -> ValidationReport {
    validate_units_at(doc, registry, &SourceMap::identity(doc))
}

pub fn validate_units_at(doc: &SloDocument, registry: &SloRegistry, map: &SourceMap) -> ValidationReport {
    let mut report = ValidationReport::new();
    let mut check = |req: &SloRequirement, path: String| {
        let Some(def) = registry.lookup(&req.slo) else {
            report.error(Diagnostic::new(Stage::Syntax, path_key(&path, "name"), format!("unknown SLO name \"{}\"", req.slo)));
            return;
        };
        if req.unit.kind != def.unit_kind {
            report.error(Diagnostic::new(
                Stage::Unit,
                path_key(&path, "unit"),
                format!(
                    "unit \"{}\" ({}) cannot be used with {} (expects a {} unit)",
                    req.unit.symbol, req.unit.kind, req.slo, def.unit_kind
                ),
            ));
        }
    };
    for (id, comp) in &doc.components {
        for (i, req) in comp.slos.iter().enumerate() {
            check(req, map.component_slo(id, i));
        }
    }
    for (i, req) in doc.application_slos.iter().enumerate() {
        check(req, map.application_slo(i));
    }
    report
}

/// Checks that the document's components and edges exist in the topology.
pub fn validate_consistency(doc: &SloDocument, topo: &TopologyModel) -> ValidationReport {
    validate_consistency_at(doc, topo, &SourceMap::identity(doc))
}

pub fn validate_consistency_at(doc: &SloDocument, topo: &TopologyModel, map: &SourceMap) -> ValidationReport {
    let mut report = ValidationReport::new();
    let kinds: HashMap<&str, &str> = topo.components.iter().map(|c| (c.id.as_str(), c.kind.as_str())).collect();
    for (id, comp) in &doc.components {
        let path = path_key("$", id);
        match kinds.get(id.as_str()) {
            None => report.error(Diagnostic::new(Stage::Consistency, path, format!("{id} not in topology"))),
            Some(kind) if !kind.is_empty() && !comp.kind().is_empty() && *kind != comp.kind() => {
                report.error(Diagnostic::new(
                    Stage::Consistency,
                    path_key(&path_key(&path, CONFIG_KEY), "type"),
                    format!("{id} has type \"{}\" but the topology declares \"{kind}\"", comp.kind()),
                ))
            }
            Some(_) => {}
        }
    }
    let edges: BTreeSet<(&str, &str)> = topo.edges.iter().map(|e| (e.from.as_str(), e.to.as_str())).collect();
    for (i, flow) in doc.data_flow.iter().enumerate() {
        if !edges.contains(&(flow.from.as_str(), flow.to.as_str())) {
            report.error(Diagnostic::new(
                Stage::Consistency,
                map.data_flow(i),
                format!("data flow {} -> {} is not an edge of the topology", flow.from, flow.to),
            ));
        }
    }
    for (i, c) in topo.components.iter().enumerate() {
        let has_slos = doc.components.get(&c.id).is_some_and(|comp| !comp.slos.is_empty());
        if !has_slos {
            report.warning(Diagnostic::new(
                Stage::Consistency,
                format!("topology.components[{i}]"),
                format!("{} has no SLOs; it will be deployed without constraints", c.id),
            ));
        }
    }
    report
}

/// Runs all three stages over raw text and returns the recovered document
/// together with the combined report. Without an explicit topology the one
/// implied by the document itself is used.
pub fn validate_text(
    text: &str,
    topology: Option<&TopologyModel>,
    registry: &SloRegistry,
) -> (Option<SloDocument>, ValidationReport) {
    let outcome = parse_lenient(text, registry);
    let mut report = ValidationReport::from_errors(outcome.diagnostics);
    if let Some(doc) = &outcome.document {
        report.merge(validate_units_at(doc, registry, &outcome.source_map));
        let derived;
        let topo = match topology {
            Some(t) => t,
            None => {
                derived = TopologyModel::derive_from(doc);
                &derived
            }
        };
        report.merge(validate_consistency_at(doc, topo, &outcome.source_map));
    }
    let doc = outcome.document.filter(|_| report.is_valid);
    (doc, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LISTING: &str = include_str!("../../../../fixtures/listing1.slo");

    fn reg() -> SloRegistry {
        SloRegistry::standard()
    }

    #[test]
    fn listing_parses() {
        let doc = parse_slo(LISTING, &reg()).unwrap();
        assert_eq!(doc.components.len(), 2);
        assert_eq!(doc.components["database_comp"].slos.len(), 2);
        assert!(doc.components["solver_comp"].slos.is_empty());
        assert_eq!(doc.application_slos.len(), 1);
        let app = &doc.application_slos[0];
        assert_eq!(app.slo, "Monthly_bandwidth_cost");
        assert_eq!(app.operator, Operator::Lt);
        assert_eq!(app.value, SloValue::scalar(20.0));
        assert_eq!(app.unit.symbol, "$");
        assert_eq!(doc.data_flow, vec![DataFlow::new("solver_comp", "database_comp")]);
        assert_eq!(doc.components["database_comp"].kind(), "database");
    }

    #[test]
    fn empty_document() {
        let report = parse_slo("{}", &reg()).unwrap_err();
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].stage, Stage::Syntax);
        assert_eq!(report.errors[0].message, "no components declared");
    }

    #[test]
    fn bad_operator_location() {
        let text = LISTING.replacen("\">=\"", "\"=>\"", 1);
        let report = parse_slo(&text, &reg()).unwrap_err();
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].stage, Stage::Syntax);
        assert_eq!(report.errors[0].location, "$.database_comp.SLOs[0].operator");
    }

    #[test]
    fn malformed_json() {
        let report = parse_slo("{ \"a\": ", &reg()).unwrap_err();
        assert_eq!(report.errors[0].location, "$");
        assert!(report.errors[0].message.contains("malformed JSON"));
        assert!(parse_slo("[1,2]", &reg()).is_err());
        assert!(parse_slo("", &reg()).is_err());
    }

    #[test]
    fn unknown_keys_and_names() {
        let text = r#"{
            "c": {
                "SLOs": [ { "name": "No_Such_SLO", "value": 1, "operator": ">=", "unit": "", "weight": 2 } ],
                "config": { "type": "compute" },
                "extra": true
            }
        }"#;
        let report = parse_slo(text, &reg()).unwrap_err();
        let locs: Vec<&str> = report.errors.iter().map(|e| e.location.as_str()).collect();
        assert!(locs.contains(&"$.c.extra"), "{locs:?}");
        assert!(locs.contains(&"$.c.SLOs[0].weight"), "{locs:?}");
        assert!(locs.contains(&"$.c.SLOs[0].name"), "{locs:?}");
        assert!(report.errors.iter().all(|e| e.stage == Stage::Syntax));
    }

    #[test]
    fn non_numeric_value() {
        let text = r#"{ "c": { "SLOs": [ { "name": "Memory_Size", "value": "lots", "operator": ">=", "unit": "GB" } ],
                       "config": { "type": "compute" } } }"#;
        let report = parse_slo(text, &reg()).unwrap_err();
        assert_eq!(report.errors[0].location, "$.c.SLOs[0].value");
        assert_eq!(report.errors[0].stage, Stage::Syntax);
    }

    #[test]
    fn value_forms() {
        let text = r#"{ "c": { "SLOs": [
              { "name": "Memory_Size", "value": 4, "operator": ">=", "unit": "GB" },
              { "name": "Memory_Size", "value": "HIGH", "operator": ">=", "unit": "GB" },
              { "name": "Response_Time", "value": [5, 10], "operator": "in", "unit": "ms" },
              { "name": "Response_Time", "value": "[5ms, 10ms]", "operator": "in", "unit": "ms" },
              { "name": "Response_Time", "value": "[5, 10]", "operator": "in", "unit": "ms" }
            ], "config": { "type": "compute" } } }"#;
        let report = parse_slo(text, &reg()).unwrap_err();
        assert_eq!(report.errors.len(), 1, "{report}");
        assert_eq!(report.errors[0].location, "$.c.SLOs[3].value");

        let ok = text.replace("\"[5ms, 10ms]\"", "\"[5.5, 6]\"");
        let doc = parse_slo(&ok, &reg()).unwrap();
        let slos = &doc.components["c"].slos;
        assert_eq!(slos[0].value, SloValue::scalar(4.0));
        assert_eq!(slos[1].value, SloValue::Categorical { label: Category::High });
        assert_eq!(slos[2].value, SloValue::Interval { lower: 5.0, upper: 10.0 });
        assert_eq!(slos[3].value, SloValue::Interval { lower: 5.5, upper: 6.0 });
    }

    #[test]
    fn operator_value_mismatch() {
        let text = r#"{ "c": { "SLOs": [
              { "name": "Response_Time", "value": 5, "operator": "in", "unit": "ms" },
              { "name": "Response_Time", "value": [1, 2], "operator": "<=", "unit": "ms" },
              { "name": "Response_Time", "value": [3, 2], "operator": "in", "unit": "ms" }
            ], "config": { "type": "compute" } } }"#;
        let report = parse_slo(text, &reg()).unwrap_err();
        assert_eq!(report.errors.len(), 3, "{report}");
    }

    #[test]
    fn missing_config_type() {
        let report = parse_slo(r#"{ "c": { "SLOs": [] } }"#, &reg()).unwrap_err();
        assert_eq!(report.errors[0].location, "$.c");
        let report = parse_slo(r#"{ "c": { "config": { "type": "" } } }"#, &reg()).unwrap_err();
        assert_eq!(report.errors[0].location, "$.c.config.type");
    }

    #[test]
    fn duplicate_component() {
        let text = r#"{ "c": { "config": { "type": "x" } }, "c": { "config": { "type": "y" } } }"#;
        let report = parse_slo(text, &reg()).unwrap_err();
        assert_eq!(report.errors[0].location, "$.c");
        assert!(report.errors[0].message.contains("duplicate"));
    }

    #[test]
    fn dangling_flow_endpoint() {
        let text = r#"{ "a": { "config": { "type": "x" } },
                       "data_flow": [ { "from": "a", "to": "ghost" } ] }"#;
        let report = parse_slo(text, &reg()).unwrap_err();
        assert_eq!(report.errors[0].stage, Stage::Consistency);
        assert_eq!(report.errors[0].location, "$.data_flow[0].to");
    }

    #[test]
    fn unit_stage() {
        let days = LISTING.replacen("\"GB\"", "\"days\"", 1);
        let doc = parse_slo(&days, &reg()).unwrap();
        let report = validate_units(&doc, &reg());
        assert!(!report.is_valid);
        assert_eq!(report.errors[0].stage, Stage::Unit);
        assert_eq!(report.errors[0].location, "$.database_comp.SLOs[1].unit");

        let doc = parse_slo(LISTING, &reg()).unwrap();
        assert!(validate_units(&doc, &reg()).is_valid);

        let cost_in_gb = LISTING.replacen("\"$\"", "\"GB\"", 1);
        let doc = parse_slo(&cost_in_gb, &reg()).unwrap();
        let report = validate_units(&doc, &reg());
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].location, "$.application.SLOs[0].unit");
    }

    #[test]
    fn unknown_unit_symbol_is_unit_stage() {
        let text = LISTING.replacen("\"GB\"", "\"parsecs\"", 1);
        let report = parse_slo(&text, &reg()).unwrap_err();
        assert_eq!(report.errors[0].stage, Stage::Unit);
        assert_eq!(report.errors[0].location, "$.database_comp.SLOs[1].unit");
    }

    fn topo(components: &[(&str, &str)], edges: &[(&str, &str)]) -> TopologyModel {
        TopologyModel {
            components: components.iter().map(|(id, k)| TopologyComponent { id: id.to_string(), kind: k.to_string() }).collect(),
            edges: edges.iter().map(|(a, b)| DataFlow::new(*a, *b)).collect(),
        }
    }

    #[test]
    fn consistency_matches() {
        let doc = parse_slo(LISTING, &reg()).unwrap();
        let t = topo(&[("database_comp", "database"), ("solver_comp", "compute")], &[("solver_comp", "database_comp")]);
        let report = validate_consistency(&doc, &t);
        assert!(report.is_valid, "{report}");
        // solver_comp declares no SLOs
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn consistency_name_mismatch() {
        let text = r#"{ "database_comp": { "config": { "type": "database" } } }"#;
        let doc = parse_slo(text, &reg()).unwrap();
        let report = validate_consistency(&doc, &topo(&[("db", "database")], &[]));
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].message, "database_comp not in topology");
        assert_eq!(report.errors[0].location, "$.database_comp");
    }

    #[test]
    fn consistency_edge_direction() {
        let text = r#"{ "a": { "config": { "type": "x" } }, "b": { "config": { "type": "x" } },
                       "data_flow": [ { "from": "a", "to": "b" } ] }"#;
        let doc = parse_slo(text, &reg()).unwrap();
        let t = topo(&[("a", "x"), ("b", "x")], &[("b", "a")]);
        // oracle: set membership of (from, to) over topology edges
        let expected_missing: Vec<usize> = doc
            .data_flow
            .iter()
            .enumerate()
            .filter(|(_, f)| !t.edges.iter().any(|e| e.from == f.from && e.to == f.to))
            .map(|(i, _)| i)
            .collect();
        let report = validate_consistency(&doc, &t);
        assert_eq!(expected_missing, vec![0]);
        assert_eq!(report.errors.len(), 1);
        assert_eq!(report.errors[0].location, "$.data_flow[0]");
    }

    #[test]
    fn all_stages_reported_together() {
        let text = r#"{
            "a": { "SLOs": [
                { "name": "Monthly_uptime_percentage", "value": "0.99", "operator": "=>", "unit": "" },
                { "name": "Monthly_egress_bandwidth", "value": "2000", "operator": "<=", "unit": "days" }
            ], "config": { "type": "compute" } },
            "b": { "SLOs": [], "config": { "type": "database" } },
            "data_flow": [ { "from": "a", "to": "b" } ]
        }"#;
        let t = topo(&[("a", "compute")], &[]);
        let (doc, report) = validate_text(text, Some(&t), &reg());
        assert!(doc.is_none());
        let stages: BTreeSet<Stage> = report.errors.iter().map(|e| e.stage).collect();
        assert_eq!(stages.len(), 3, "{report}");
        let unit = report.errors_in(Stage::Unit).next().unwrap();
        assert_eq!(unit.location, "$.a.SLOs[1].unit");
    }

    #[test]
    fn round_trip() {
        let doc = parse_slo(LISTING, &reg()).unwrap();
        let again = parse_slo(&doc.to_slo_string(), &reg()).unwrap();
        assert_eq!(doc, again);
    }
}
