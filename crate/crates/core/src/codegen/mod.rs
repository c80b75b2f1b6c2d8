//! Terraform HCL generation from a selection plan, plus a dry-run deployer
//! that re-checks the emitted code instead of calling cloud APIs.
//!
//! Output shape:
//!
//! ```hcl
//! terraform {
//!   required_providers {
//!     aws = {
//!       source  = "hashicorp/aws"
//!       version = "~> 5.0"
//!     }
//!   }
//! }
//!
//! provider "aws" {
//!   region = "us-east-1"
//! }
//!
//! # database -> AWS/dynamodb/us-east-1
//! resource "aws_dynamodb_table" "database" {
//!   name   = "app-database"
//!   region = "us-east-1"
//! }
//! ```
//!
//! Provider blocks appear once per distinct provider, in provider order;
//! resource blocks once per component, in component-id order. Default
//! attributes come from the per-provider template files.

mod check;
mod templates;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parser::SloDocument;
use crate::selector::SelectionPlan;

pub use check::{parse_structure, Position, SyntaxError, TopBlock};
pub use templates::{parse_template, ProviderTemplate, ResourceTemplate, TemplateSet};

#[derive(Debug, Error)]
pub enum CodegenError {
    #[error("no HCL template for provider \"{provider}\"")]
    UnknownProvider { provider: String },
    #[error("template for {provider} has no resource for type \"{kind}\" (service {service_id})")]
    UnknownResourceKind { provider: String, kind: String, service_id: String },
    #[error("plan assigns no components")]
    EmptyPlan,
    #[error("plan is infeasible (components: {})", .components.join(", "))]
    InfeasiblePlan { components: Vec<String> },
    #[error("component {component} is in the document but not in the plan")]
    MissingAssignment { component: String },
    #[error("template {path}: {message}")]
    Template { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub provider: String,
    pub service_id: String,
    pub region: String,
    /// Terraform address, `<type>.<name>`.
    pub resource: String,
    /// Local provider name the resource binds to.
    pub terraform_provider: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeploymentArtifact {
    pub application: String,
    pub hcl_text: String,
    pub manifest: BTreeMap<String, ManifestEntry>,
    pub generated_at: DateTime<Utc>,
}

#[derive(Serialize, Deserialize)]
struct ManifestFile {
    application: String,
    generated_at: String,
    components: BTreeMap<String, ManifestEntry>,
}

impl DeploymentArtifact {
    pub fn manifest_json(&self) -> String {
        let m = ManifestFile {
            application: self.application.clone(),
            generated_at: self.generated_at.to_rfc3339_opts(SecondsFormat::Secs, true),
            components: self.manifest.clone(),
        };
        serde_json::to_string_pretty(&m).expect("manifest is serializable")
    }

    /// Writes `<root>/<application>/main.tf` and `manifest.json`; returns the
    /// application directory.
    pub fn write_to(&self, root: impl AsRef<Path>) -> Result<PathBuf, CodegenError> {
        let dir = root.as_ref().join(&self.application);
        let io = |p: &Path| {
            let path = p.display().to_string();
            move |source| CodegenError::Io { path, source }
        };
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        let tf = dir.join("main.tf");
        fs::write(&tf, &self.hcl_text).map_err(io(&tf))?;
        let mf = dir.join("manifest.json");
        fs::write(&mf, self.manifest_json() + "\n").map_err(io(&mf))?;
        Ok(dir)
    }
}

/// Lower-cases and maps anything outside `[a-z0-9_]` to `_`; prefixes names
/// that would not start with a letter or underscore.
pub fn sanitize_name(raw: &str) -> String {
    let mut s: String = raw
        .chars()
        .map(|c| {
            let c = c.to_ascii_lowercase();
            if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if !s.starts_with(|c: char| c.is_ascii_lowercase() || c == '_') {
        s.insert_str(0, "c_");
    }
    s
}

fn hcl_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            // keep template sequences literal
            '$' | '%' if chars.peek() == Some(&'{') => {
                out.push(c);
                out.push(c);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

struct Substitutions<'a> {
    app: &'a str,
    component: &'a str,
    service_id: &'a str,
    region: &'a str,
}

impl Substitutions<'_> {
    fn apply(&self, s: &str) -> String {
        s.replace("{{app}}", self.app)
            .replace("{{component}}", self.component)
            .replace("{{service_id}}", self.service_id)
            .replace("{{region}}", self.region)
    }
}

fn hcl_value(v: &toml::Value, subs: &Substitutions) -> String {
    match v {
        toml::Value::String(s) => hcl_string(&subs.apply(s)),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) if f.is_finite() => format!("{f:?}"),
        toml::Value::Float(f) => hcl_string(&f.to_string()),
        toml::Value::Boolean(b) => b.to_string(),
        toml::Value::Datetime(d) => hcl_string(&d.to_string()),
        toml::Value::Array(items) => {
            format!("[{}]", items.iter().map(|i| hcl_value(i, subs)).collect::<Vec<_>>().join(", "))
        }
        toml::Value::Table(t) => format!(
            "{{ {} }}",
            t.iter().map(|(k, v)| format!("{} = {}", hcl_key(k), hcl_value(v, subs))).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn hcl_key(k: &str) -> String {
    let plain = k.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
        && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
    if plain {
        k.to_string()
    } else {
        hcl_string(k)
    }
}

fn write_attributes(out: &mut String, attrs: &[(String, String)], indent: &str) {
    let width = attrs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in attrs {
        let _ = writeln!(out, "{indent}{k:<width$} = {v}");
    }
}

/// Renders a feasible plan as Terraform HCL.
///
/// `hcl_text` depends only on the plan, the document and the templates; the
/// timestamp lives in the manifest.
pub fn generate_hcl(
    plan: &SelectionPlan,
    doc: &SloDocument,
    templates: &TemplateSet,
    application: &str,
) -> Result<DeploymentArtifact, CodegenError> {
    let combo = &plan.combination;
    if !plan.infeasible_components.is_empty() {
        return Err(CodegenError::InfeasiblePlan { components: plan.infeasible_components.clone() });
    }
    if combo.assignment.is_empty() {
        return Err(CodegenError::EmptyPlan);
    }
    if !combo.feasible {
        let bad = combo.service_utilities.iter().filter(|(_, s)| !s.feasible).map(|(c, _)| c.clone()).collect();
        return Err(CodegenError::InfeasiblePlan { components: bad });
    }
    if let Some(c) = doc.components.keys().find(|c| !combo.assignment.contains_key(*c)) {
        return Err(CodegenError::MissingAssignment { component: c.clone() });
    }
    let app = sanitize_name(application);

    // Resolve templates first so errors surface before any output.
    let mut used: BTreeMap<&str, &ProviderTemplate> = BTreeMap::new();
    let mut resolved = Vec::with_capacity(combo.assignment.len());
    for (component, o) in &combo.assignment {
        let pt = templates.get(&o.provider).ok_or_else(|| CodegenError::UnknownProvider { provider: o.provider.clone() })?;
        let kind = doc.components.get(component).map(|c| c.kind()).unwrap_or(o.serves_type.as_str());
        let rt = pt.resource_for(kind, &o.service_id).ok_or_else(|| CodegenError::UnknownResourceKind {
            provider: o.provider.clone(),
            kind: kind.to_string(),
            service_id: o.service_id.clone(),
        })?;
        used.insert(pt.terraform_name.as_str(), pt);
        resolved.push((component, o, pt, rt));
    }

    let mut out = String::new();
    let _ = writeln!(out, "# Deployment for application \"{}\".", app);
    out.push_str("# Generated from a selection plan; edit the template files to change defaults.\n\n");
    out.push_str("terraform {\n  required_providers {\n");
    for (name, pt) in &used {
        let _ = writeln!(out, "    {name} = {{");
        write_attributes(
            &mut out,
            &[("source".into(), hcl_string(&pt.source)), ("version".into(), hcl_string(&pt.version))],
            "      ",
        );
        out.push_str("    }\n");
    }
    out.push_str("  }\n}\n");

    let provider_subs = Substitutions { app: &app, component: "", service_id: "", region: "" };
    for (name, pt) in &used {
        let _ = writeln!(out, "\nprovider {} {{", hcl_string(name));
        let attrs: Vec<(String, String)> =
            pt.provider_settings.iter().map(|(k, v)| (hcl_key(k), hcl_value(v, &provider_subs))).collect();
        write_attributes(&mut out, &attrs, "  ");
        out.push_str("}\n");
    }

    let mut taken = BTreeSet::new();
    let mut manifest = BTreeMap::new();
    for (component, o, pt, rt) in resolved {
        let base = sanitize_name(component);
        let mut name = base.clone();
        let mut n = 2;
        while !taken.insert((rt.resource_type.clone(), name.clone())) {
            name = format!("{base}_{n}");
            n += 1;
        }
        let comp = sanitize_name(component);
        let subs = Substitutions { app: &app, component: &comp, service_id: &o.service_id, region: &o.region };
        let mut attrs: Vec<(String, String)> =
            rt.defaults.iter().map(|(k, v)| (hcl_key(k), hcl_value(v, &subs))).collect();
        if let Some(attr) = pt.region_attribute_for(rt) {
            let region = format!("{}{}{}", rt.region_prefix, o.region, rt.region_suffix);
            attrs.retain(|(k, _)| k.as_str() != attr);
            attrs.push((hcl_key(attr), hcl_string(&region)));
        }
        let _ = writeln!(out, "\n# {component} -> {}", o.key());
        let _ = writeln!(out, "resource {} {} {{", hcl_string(&rt.resource_type), hcl_string(&name));
        write_attributes(&mut out, &attrs, "  ");
        out.push_str("}\n");
        manifest.insert(
            component.clone(),
            ManifestEntry {
                provider: o.provider.clone(),
                service_id: o.service_id.clone(),
                region: o.region.clone(),
                resource: format!("{}.{}", rt.resource_type, name),
                terraform_provider: pt.terraform_name.clone(),
            },
        );
    }

    Ok(DeploymentArtifact { application: app, hcl_text: out, manifest, generated_at: Utc::now() })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DefectKind {
    Syntax,
    Correspondence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Defect {
    pub kind: DefectKind,
    /// Position in `hcl_text`, when the defect has one.
    pub at: Option<Position>,
    pub message: String,
}

impl std::fmt::Display for Defect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.at {
            Some(p) => write!(f, "main.tf:{p}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeployReport {
    pub resource_blocks: usize,
    pub provider_blocks: usize,
    pub defects: Vec<Defect>,
}

impl DeployReport {
    pub fn is_clean(&self) -> bool {
        self.defects.is_empty()
    }
}

/// Validates an artifact as a deployer would before applying it: the HCL
/// must be structurally well formed and the manifest and resource blocks
/// must correspond one-to-one. Nothing is contacted.
pub fn dry_run_deploy(artifact: &DeploymentArtifact) -> DeployReport {
    let blocks = match parse_structure(&artifact.hcl_text) {
        Ok(b) => b,
        Err(errs) => {
            return DeployReport {
                resource_blocks: 0,
                provider_blocks: 0,
                defects: errs
                    .into_iter()
                    .map(|e| Defect { kind: DefectKind::Syntax, at: Some(e.at), message: e.message })
                    .collect(),
            }
        }
    };
    let mut defects = Vec::new();
    let mut resources: BTreeMap<String, Vec<&TopBlock>> = BTreeMap::new();
    let mut providers: BTreeMap<String, Vec<&TopBlock>> = BTreeMap::new();
    for b in &blocks {
        match (b.kind.as_str(), b.labels.as_slice()) {
            ("resource", [t, n]) => resources.entry(format!("{t}.{n}")).or_default().push(b),
            ("resource", _) => defects.push(Defect {
                kind: DefectKind::Syntax,
                at: Some(b.at.clone()),
                message: format!("resource block needs a type and a name label, found {}", b.labels.len()),
            }),
            ("provider", [p]) => providers.entry(p.clone()).or_default().push(b),
            ("provider", _) => defects.push(Defect {
                kind: DefectKind::Syntax,
                at: Some(b.at.clone()),
                message: "provider block needs exactly one label".into(),
            }),
            _ => {}
        }
    }
    for (addr, bs) in &resources {
        for dup in bs.iter().skip(1) {
            defects.push(Defect {
                kind: DefectKind::Correspondence,
                at: Some(dup.at.clone()),
                message: format!("resource {addr} is declared more than once"),
            });
        }
        if !artifact.manifest.values().any(|m| &m.resource == addr) {
            defects.push(Defect {
                kind: DefectKind::Correspondence,
                at: Some(bs[0].at.clone()),
                message: format!("resource {addr} has no manifest entry"),
            });
        }
    }
    for (p, bs) in &providers {
        for dup in bs.iter().skip(1) {
            defects.push(Defect {
                kind: DefectKind::Correspondence,
                at: Some(dup.at.clone()),
                message: format!("provider {p} is configured more than once"),
            });
        }
    }
    let mut seen = BTreeMap::new();
    for (component, m) in &artifact.manifest {
        if !resources.contains_key(&m.resource) {
            defects.push(Defect {
                kind: DefectKind::Correspondence,
                at: None,
                message: format!("manifest component {component} maps to {}, which is not in main.tf", m.resource),
            });
        }
        if let Some(other) = seen.insert(&m.resource, component) {
            defects.push(Defect {
                kind: DefectKind::Correspondence,
                at: None,
                message: format!("components {other} and {component} share resource {}", m.resource),
            });
        }
        if !providers.contains_key(&m.terraform_provider) {
            defects.push(Defect {
                kind: DefectKind::Correspondence,
                at: None,
                message: format!("component {component} needs provider {}, which is not configured", m.terraform_provider),
            });
        }
    }
    DeployReport { resource_blocks: resources.values().map(Vec::len).sum(), provider_blocks: providers.values().map(Vec::len).sum(), defects }
}
