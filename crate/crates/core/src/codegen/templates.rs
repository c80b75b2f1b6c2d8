use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::CodegenError;

const EMBEDDED: &[(&str, &str)] = &[
    ("aws.toml", include_str!("../../templates/hcl/aws.toml")),
    ("azure.toml", include_str!("../../templates/hcl/azure.toml")),
    ("google.toml", include_str!("../../templates/hcl/google.toml")),
    ("rackspace.toml", include_str!("../../templates/hcl/rackspace.toml")),
];

/// Settings for one kind of resource (or one specific service).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceTemplate {
    pub resource_type: String,
    /// Overrides the provider-wide region attribute name.
    #[serde(default)]
    pub region_attribute: Option<String>,
    #[serde(default)]
    pub region_prefix: String,
    #[serde(default)]
    pub region_suffix: String,
    #[serde(default)]
    pub defaults: BTreeMap<String, toml::Value>,
}

/// Everything needed to emit code for one cloud provider.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderTemplate {
    /// Provider name as it appears in catalogs.
    pub provider: String,
    /// Local name used in `provider "<name>"` blocks.
    pub terraform_name: String,
    pub source: String,
    pub version: String,
    #[serde(default)]
    pub region_attribute: Option<String>,
    #[serde(default)]
    pub provider_settings: BTreeMap<String, toml::Value>,
    /// Keyed by the catalog's `serves_type`.
    #[serde(default)]
    pub kinds: BTreeMap<String, ResourceTemplate>,
    /// Keyed by service id; takes precedence over `kinds`.
    #[serde(default)]
    pub services: BTreeMap<String, ResourceTemplate>,
}

impl ProviderTemplate {
    pub fn resource_for(&self, kind: &str, service_id: &str) -> Option<&ResourceTemplate> {
        self.services.get(service_id).or_else(|| self.kinds.get(kind))
    }

    pub fn region_attribute_for<'a>(&'a self, res: &'a ResourceTemplate) -> Option<&'a str> {
        res.region_attribute.as_deref().or(self.region_attribute.as_deref())
    }
}

/// Provider templates keyed by lower-cased provider name.
#[derive(Debug, Clone, Default)]
pub struct TemplateSet {
    providers: BTreeMap<String, ProviderTemplate>,
}

impl TemplateSet {
    /// The templates shipped with the crate.
    pub fn embedded() -> Self {
        let mut set = TemplateSet::default();
        for (name, text) in EMBEDDED {
            set.insert(parse_template(text, name).expect("embedded templates are valid"));
        }
        set
    }

    /// Embedded templates overlaid with every `*.toml` file in `dir`.
    /// A file for an already-known provider replaces it wholesale.
    pub fn with_overrides(dir: impl AsRef<Path>) -> Result<Self, CodegenError> {
        let mut set = Self::embedded();
        let dir = dir.as_ref();
        let entries = fs::read_dir(dir).map_err(|source| CodegenError::Io { path: dir.display().to_string(), source })?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect();
        paths.sort();
        for p in paths {
            let text = fs::read_to_string(&p).map_err(|source| CodegenError::Io { path: p.display().to_string(), source })?;
            set.insert(parse_template(&text, &p.display().to_string())?);
        }
        Ok(set)
    }

    pub fn insert(&mut self, t: ProviderTemplate) {
        self.providers.insert(t.provider.to_lowercase(), t);
    }

    pub fn get(&self, provider: &str) -> Option<&ProviderTemplate> {
        self.providers.get(&provider.to_lowercase())
    }

    pub fn providers(&self) -> impl Iterator<Item = &ProviderTemplate> {
        self.providers.values()
    }
}

pub fn parse_template(text: &str, origin: &str) -> Result<ProviderTemplate, CodegenError> {
    toml::from_str(text).map_err(|e| CodegenError::Template { path: origin.to_string(), message: e.to_string() })
}
