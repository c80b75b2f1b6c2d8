//! File-backed repository of service offerings and their SLA-guaranteed
//! SLO values.
//!
//! Catalog file format:
//!
//! ```text
//! {
//!   "version": "2020-06",
//!   "offerings": [
//!     { "provider": "Azure", "service_id": "cosmos-db", "region": "eastus",
//!       "serves_type": "database", "egress_price_per_gb": 0.087,
//!       "slos": { "Monthly_uptime_percentage": { "value": 99.99, "unit": "%" } } }
//!   ],
//!   "monitoring": []
//! }
//! ```
//!
//! Offered values are normalized to the base unit of their kind on load. An
//! SLO missing from an offering means the provider gives no SLA for it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Direction, Operator, SloRegistry, SloRequirement, SloValue};
use crate::parser::{strip_line_comments, ComponentSpec};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("cannot read catalog {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid catalog JSON at line {line} column {column}: {message}")]
    Json { line: usize, column: usize, message: String },
    #[error("catalog has no offerings")]
    Empty,
    #[error("duplicate offering {0}")]
    DuplicateOffering(OfferingKey),
    #[error("offering {offering}: unknown SLO \"{slo}\"")]
    UnknownSlo { offering: OfferingKey, slo: String },
    #[error("offering {offering}: unknown unit \"{unit}\" for {slo}")]
    UnknownUnit { offering: OfferingKey, slo: String, unit: String },
    #[error("offering {offering}: unit \"{unit}\" cannot be used with {slo}")]
    UnitKindMismatch { offering: OfferingKey, slo: String, unit: String },
    #[error("offering {offering}: {field} must be a finite number")]
    InvalidNumber { offering: OfferingKey, field: String },
    #[error("offering {offering}: {field} must be non-empty")]
    MissingField { offering: OfferingKey, field: &'static str },
    #[error("no candidate offers {slo}; cannot resolve category \"{label}\"")]
    UnresolvableCategory { slo: String, label: String },
}

/// Identity of an offering; also the deterministic ordering key.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OfferingKey {
    pub provider: String,
    pub service_id: String,
    pub region: String,
}

impl OfferingKey {
    pub fn new(provider: impl Into<String>, service_id: impl Into<String>, region: impl Into<String>) -> Self {
        OfferingKey { provider: provider.into(), service_id: service_id.into(), region: region.into() }
    }
}

impl fmt::Display for OfferingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.provider, self.service_id, self.region)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfferedValue {
    pub value: f64,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceOffering {
    pub provider: String,
    pub service_id: String,
    pub region: String,
    pub serves_type: String,
    pub egress_price_per_gb: f64,
    /// Offered values, in the base unit of each SLO's kind.
    #[serde(rename = "slos")]
    pub offered_slos: BTreeMap<String, OfferedValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl ServiceOffering {
    pub fn key(&self) -> OfferingKey {
        OfferingKey { provider: self.provider.clone(), service_id: self.service_id.clone(), region: self.region.clone() }
    }

    /// Offered value of an SLO in base units, if the SLA covers it.
    pub fn offered(&self, slo: &str) -> Option<f64> {
        self.offered_slos.get(slo).map(|v| v.value)
    }

    fn key_ref(&self) -> (&str, &str, &str) {
        (&self.provider, &self.service_id, &self.region)
    }
}

#[derive(Debug, Deserialize)]
struct RawOffered {
    value: serde_json::Value,
    unit: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOffering {
    provider: String,
    service_id: String,
    region: String,
    serves_type: String,
    egress_price_per_gb: serde_json::Value,
    #[serde(default)]
    slos: BTreeMap<String, RawOffered>,
    #[serde(default)]
    source: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    #[serde(default)]
    version: String,
    #[serde(default)]
    provenance: Option<String>,
    offerings: Vec<RawOffering>,
    #[serde(default)]
    monitoring: Vec<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct CatalogFile<'a> {
    version: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<&'a str>,
    offerings: &'a [ServiceOffering],
    monitoring: &'a [serde_json::Value],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    /// Sorted by `(provider, service_id, region)`.
    offerings: Vec<ServiceOffering>,
    by_type: BTreeMap<String, Vec<usize>>,
    pub source_path: String,
    pub version: String,
    pub provenance: Option<String>,
    /// Reserved for runtime monitoring data; kept verbatim and unused.
    pub monitoring: Vec<serde_json::Value>,
}

fn json_number(v: &serde_json::Value) -> Option<f64> {
    let n = match v {
        serde_json::Value::Number(n) => n.as_f64()?,
        serde_json::Value::String(s) => s.trim().parse().ok()?,
        _ => return None,
    };
    n.is_finite().then_some(n)
}

impl Catalog {
    /// Builds a catalog from offerings whose values are already in base
    /// units. Enforces non-emptiness and key uniqueness.
    pub fn from_offerings(
        mut offerings: Vec<ServiceOffering>,
        source_path: impl Into<String>,
        version: impl Into<String>,
    ) -> Result<Self, CatalogError> {
        if offerings.is_empty() {
            return Err(CatalogError::Empty);
        }
        offerings.sort_by(|a, b| a.key_ref().cmp(&b.key_ref()));
        for pair in offerings.windows(2) {
            if pair[0].key_ref() == pair[1].key_ref() {
                return Err(CatalogError::DuplicateOffering(pair[1].key()));
            }
        }
        let mut by_type: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, o) in offerings.iter().enumerate() {
            by_type.entry(o.serves_type.clone()).or_default().push(i);
        }
        Ok(Catalog {
            offerings,
            by_type,
            source_path: source_path.into(),
            version: version.into(),
            provenance: None,
            monitoring: Vec::new(),
        })
    }

    pub fn parse(text: &str, source_path: &str, registry: &SloRegistry) -> Result<Self, CatalogError> {
        let raw: RawCatalog = serde_json::from_str(&strip_line_comments(text))
            .map_err(|e| CatalogError::Json { line: e.line(), column: e.column(), message: e.to_string() })?;
        let mut offerings = Vec::with_capacity(raw.offerings.len());
        for o in raw.offerings {
            let key = OfferingKey { provider: o.provider.clone(), service_id: o.service_id.clone(), region: o.region.clone() };
            for (field, value) in [("provider", &o.provider), ("service_id", &o.service_id), ("serves_type", &o.serves_type)] {
                if value.trim().is_empty() {
                    return Err(CatalogError::MissingField { offering: key, field });
                }
            }
            let price = json_number(&o.egress_price_per_gb)
                .filter(|p| *p >= 0.0)
                .ok_or_else(|| CatalogError::InvalidNumber { offering: key.clone(), field: "egress_price_per_gb".into() })?;
            let mut offered = BTreeMap::new();
            for (slo, raw_value) in o.slos {
                let Some(def) = registry.lookup(&slo) else {
                    return Err(CatalogError::UnknownSlo { offering: key, slo });
                };
                let Some(unit) = registry.units().lookup(raw_value.unit.trim()) else {
                    return Err(CatalogError::UnknownUnit { offering: key, slo, unit: raw_value.unit });
                };
                if unit.kind != def.unit_kind {
                    return Err(CatalogError::UnitKindMismatch { offering: key, slo, unit: raw_value.unit });
                }
                let value = json_number(&raw_value.value)
                    .ok_or_else(|| CatalogError::InvalidNumber { offering: key.clone(), field: slo.clone() })?;
                let base = registry.units().base_of(def.unit_kind);
                offered.insert(slo, OfferedValue { value: unit.to_base(value), unit: base.symbol.clone() });
            }
            offerings.push(ServiceOffering {
                provider: o.provider,
                service_id: o.service_id,
                region: o.region,
                serves_type: o.serves_type,
                egress_price_per_gb: price,
                offered_slos: offered,
                source: o.source,
            });
        }
        let mut catalog = Catalog::from_offerings(offerings, source_path, raw.version)?;
        catalog.provenance = raw.provenance;
        catalog.monitoring = raw.monitoring;
        Ok(catalog)
    }

    pub fn offerings(&self) -> &[ServiceOffering] {
        &self.offerings
    }

    pub fn get(&self, key: &OfferingKey) -> Option<&ServiceOffering> {
        self.offerings
            .binary_search_by(|o| o.key_ref().cmp(&(key.provider.as_str(), key.service_id.as_str(), key.region.as_str())))
            .ok()
            .map(|i| &self.offerings[i])
    }

    pub fn len(&self) -> usize {
        self.offerings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offerings.is_empty()
    }

    /// Offerings serving `kind`, in key order.
    pub fn of_type(&self, kind: &str) -> Vec<&ServiceOffering> {
        self.by_type
            .get(kind)
            .map(|idx| idx.iter().map(|&i| &self.offerings[i]).collect())
            .unwrap_or_default()
    }

    pub fn types(&self) -> impl Iterator<Item = &str> {
        self.by_type.keys().map(String::as_str)
    }

    /// Catalog JSON in normalized (base-unit) form. Loading it again yields
    /// an equal catalog.
    pub fn to_json_string(&self) -> String {
        let file = CatalogFile {
            version: &self.version,
            provenance: self.provenance.as_deref(),
            offerings: &self.offerings,
            monitoring: &self.monitoring,
        };
        serde_json::to_string_pretty(&file).expect("catalog is always serializable")
    }
}

pub fn load_catalog(path: impl AsRef<Path>, registry: &SloRegistry) -> Result<Catalog, CatalogError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| CatalogError::Io { path: path.display().to_string(), source })?;
    Catalog::parse(&text, &path.display().to_string(), registry)
}

/// Offerings that functionally serve a component, in key order.
pub fn candidates_for<'c>(catalog: &'c Catalog, component: &ComponentSpec) -> Vec<&'c ServiceOffering> {
    catalog.of_type(component.kind())
}

/// Linear-interpolation quantile (the "type 7" estimator) of sorted values.
pub(crate) fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Turns a `low`/`medium`/`high` requirement into a scalar one using the
/// 25th/50th/75th percentile of the values offered by the candidate pool.
///
/// Higher-is-better SLOs resolve to `>=`, lower-is-better ones to `<=`.
/// Non-categorical requirements are returned unchanged.
pub fn resolve_categorical(
    req: &SloRequirement,
    candidates: &[&ServiceOffering],
    registry: &SloRegistry,
) -> Result<SloRequirement, CatalogError> {
    let SloValue::Categorical { label } = req.value else {
        return Ok(req.clone());
    };
    let mut offered: Vec<f64> = candidates.iter().filter_map(|o| o.offered(&req.slo)).collect();
    if offered.is_empty() {
        return Err(CatalogError::UnresolvableCategory { slo: req.slo.clone(), label: label.as_str().into() });
    }
    offered.sort_by(f64::total_cmp);
    let base_threshold = quantile_sorted(&offered, label.quantile());
    let direction = registry.lookup(&req.slo).map(|d| d.direction).unwrap_or(Direction::HigherIsBetter);
    let operator = match direction {
        Direction::HigherIsBetter => Operator::Geq,
        Direction::LowerIsBetter => Operator::Leq,
    };
    Ok(SloRequirement {
        slo: req.slo.clone(),
        operator,
        value: SloValue::scalar(req.unit.from_base(base_threshold)),
        unit: req.unit.clone(),
    })
}

/// Distinct offerings across several candidate pools, in key order.
pub(crate) fn union_of<'c>(pools: &[Vec<&'c ServiceOffering>]) -> Vec<&'c ServiceOffering> {
    let mut seen = BTreeSet::new();
    let mut out: Vec<&ServiceOffering> =
        pools.iter().flatten().copied().filter(|o| seen.insert(o.key_ref())).collect();
    out.sort_by(|a, b| a.key_ref().cmp(&b.key_ref()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Category;
    use proptest::prelude::*;

    const PAPER_CATALOG: &str = include_str!("../../../fixtures/catalog.json");

    fn reg() -> SloRegistry {
        SloRegistry::standard()
    }

    fn offering(provider: &str, service: &str, region: &str, kind: &str, slos: &[(&str, f64)]) -> ServiceOffering {
        ServiceOffering {
            provider: provider.into(),
            service_id: service.into(),
            region: region.into(),
            serves_type: kind.into(),
            egress_price_per_gb: 0.05,
            offered_slos: slos.iter().map(|(n, v)| (n.to_string(), OfferedValue { value: *v, unit: String::new() })).collect(),
            source: None,
        }
    }

    #[test]
    fn bundled_catalog_loads() {
        let c = Catalog::parse(PAPER_CATALOG, "catalog.json", &reg()).unwrap();
        assert!(c.len() >= 8);
        let providers: BTreeSet<&str> = c.offerings().iter().map(|o| o.provider.as_str()).collect();
        assert_eq!(providers, BTreeSet::from(["AWS", "Azure", "Google", "RackSpace"]));
        assert!(c.monitoring.is_empty());
    }

    #[test]
    fn values_are_normalized() {
        let text = r#"{ "version": "t", "offerings": [
            { "provider": "P", "service_id": "s", "region": "r", "serves_type": "compute",
              "egress_price_per_gb": "0.05",
              "slos": { "Monthly_uptime_percentage": { "value": 99.9, "unit": "%" },
                        "Monthly_egress_bandwidth": { "value": 2, "unit": "TB" } } } ] }"#;
        let c = Catalog::parse(text, "t", &reg()).unwrap();
        let o = &c.offerings()[0];
        assert!((o.offered("Monthly_uptime_percentage").unwrap() - 0.999).abs() < 1e-12);
        assert_eq!(o.offered("Monthly_egress_bandwidth"), Some(2000.0));
        assert_eq!(o.offered_slos["Monthly_egress_bandwidth"].unit, "GB");
        assert_eq!(o.egress_price_per_gb, 0.05);
    }

    #[test]
    fn empty_catalog() {
        let err = Catalog::parse(r#"{ "version": "x", "offerings": [] }"#, "t", &reg()).unwrap_err();
        assert!(matches!(err, CatalogError::Empty));
    }

    #[test]
    fn duplicate_triple() {
        let text = r#"{ "offerings": [
            { "provider": "P", "service_id": "s", "region": "r", "serves_type": "a", "egress_price_per_gb": 0.1 },
            { "provider": "P", "service_id": "s", "region": "r", "serves_type": "b", "egress_price_per_gb": 0.2 } ] }"#;
        let err = Catalog::parse(text, "t", &reg()).unwrap_err();
        assert!(matches!(err, CatalogError::DuplicateOffering(k) if k.to_string() == "P/s/r"));
    }

    #[test]
    fn unknown_slo_names_the_entry() {
        let text = r#"{ "offerings": [
            { "provider": "P", "service_id": "s", "region": "r", "serves_type": "a", "egress_price_per_gb": 0.1,
              "slos": { "Warp_factor": { "value": 9, "unit": "" } } } ] }"#;
        let err = Catalog::parse(text, "t", &reg()).unwrap_err();
        assert_eq!(err.to_string(), "offering P/s/r: unknown SLO \"Warp_factor\"");
    }

    #[test]
    fn wrong_unit_kind() {
        let text = r#"{ "offerings": [
            { "provider": "P", "service_id": "s", "region": "r", "serves_type": "a", "egress_price_per_gb": 0.1,
              "slos": { "Monthly_egress_bandwidth": { "value": 9, "unit": "days" } } } ] }"#;
        assert!(matches!(Catalog::parse(text, "t", &reg()), Err(CatalogError::UnitKindMismatch { .. })));
    }

    #[test]
    fn candidates_are_filtered_and_ordered() {
        let c = Catalog::parse(PAPER_CATALOG, "t", &reg()).unwrap();
        let db = candidates_for(&c, &ComponentSpec::new("database", vec![]));
        assert!(!db.is_empty());
        assert!(db.iter().all(|o| o.serves_type == "database"));
        assert!(db.iter().any(|o| o.service_id.contains("cosmos")));
        assert!(db.iter().any(|o| o.service_id.contains("dynamodb")));
        assert!(candidates_for(&c, &ComponentSpec::new("no_such_type", vec![])).is_empty());

        // oracle: filter + sort the raw fixture by hand
        let raw: serde_json::Value = serde_json::from_str(PAPER_CATALOG).unwrap();
        let mut expected: Vec<(String, String, String)> = raw["offerings"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|o| o["serves_type"] == "compute")
            .map(|o| {
                let s = |k: &str| o[k].as_str().unwrap().to_string();
                (s("provider"), s("service_id"), s("region"))
            })
            .collect();
        expected.sort();
        let got: Vec<(String, String, String)> = candidates_for(&c, &ComponentSpec::new("compute", vec![]))
            .iter()
            .map(|o| (o.provider.clone(), o.service_id.clone(), o.region.clone()))
            .collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn reserialize_is_idempotent() {
        let c = Catalog::parse(PAPER_CATALOG, "t", &reg()).unwrap();
        let once = c.to_json_string();
        let c2 = Catalog::parse(&once, "t", &reg()).unwrap();
        assert_eq!(c2.offerings(), c.offerings());
        assert_eq!(c2.to_json_string(), once);
    }

    fn memory_pool() -> Vec<ServiceOffering> {
        [2.0, 4.0, 8.0, 16.0]
            .iter()
            .enumerate()
            .map(|(i, m)| offering("P", &format!("vm{i}"), "r", "compute", &[("Memory_Size", *m)]))
            .collect()
    }

    fn memory_req(label: Category) -> SloRequirement {
        SloRequirement::new(&reg(), "Memory_Size", Operator::Geq, SloValue::Categorical { label }, "GB").unwrap()
    }

    /// Independent percentile: rank-based linear interpolation computed
    /// from first principles over an unsorted list.
    fn percentile_oracle(values: &[f64], p: f64) -> f64 {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let rank = p * (v.len() as f64 - 1.0);
        let below = rank.floor();
        let frac = rank - below;
        let i = below as usize;
        if i + 1 >= v.len() {
            return v[v.len() - 1];
        }
        v[i] * (1.0 - frac) + v[i + 1] * frac
    }

    #[test]
    fn categorical_resolution() {
        let pool = memory_pool();
        let refs: Vec<&ServiceOffering> = pool.iter().collect();
        let values = [16.0, 2.0, 8.0, 4.0];
        let high = resolve_categorical(&memory_req(Category::High), &refs, &reg()).unwrap();
        assert_eq!(high.operator, Operator::Geq);
        assert_eq!(percentile_oracle(&values, 0.75), 10.0);
        assert_eq!(high.value, SloValue::scalar(10.0));
        let low = resolve_categorical(&memory_req(Category::Low), &refs, &reg()).unwrap();
        assert_eq!(percentile_oracle(&values, 0.25), 3.5);
        assert_eq!(low.value, SloValue::scalar(3.5));
        let medium = resolve_categorical(&memory_req(Category::Medium), &refs, &reg()).unwrap();
        assert_eq!(medium.value, SloValue::scalar(percentile_oracle(&values, 0.5)));
    }

    #[test]
    fn single_candidate_collapses() {
        let one = [offering("P", "vm", "r", "compute", &[("Memory_Size", 6.0)])];
        let refs: Vec<&ServiceOffering> = one.iter().collect();
        for label in [Category::Low, Category::Medium, Category::High] {
            let r = resolve_categorical(&memory_req(label), &refs, &reg()).unwrap();
            assert_eq!(r.value, SloValue::scalar(6.0));
        }
    }

    #[test]
    fn unresolvable_category() {
        let pool = [offering("P", "vm", "r", "compute", &[])];
        let refs: Vec<&ServiceOffering> = pool.iter().collect();
        let err = resolve_categorical(&memory_req(Category::Low), &refs, &reg()).unwrap_err();
        assert!(matches!(err, CatalogError::UnresolvableCategory { .. }));
    }

    #[test]
    fn lower_is_better_resolves_to_leq() {
        let pool = [offering("P", "vm", "r", "compute", &[("Response_Time", 0.2)])];
        let refs: Vec<&ServiceOffering> = pool.iter().collect();
        let req = SloRequirement::new(&reg(), "Response_Time", Operator::Leq, SloValue::Categorical { label: Category::Low }, "ms")
            .unwrap();
        let r = resolve_categorical(&req, &refs, &reg()).unwrap();
        assert_eq!(r.operator, Operator::Leq);
        assert!(matches!(r.value, SloValue::Scalar { value } if (value - 200.0).abs() < 1e-9));
    }

    proptest! {
        #[test]
        fn resolution_is_monotone(values in proptest::collection::vec(0.0f64..1e4, 1..20)) {
            let pool: Vec<ServiceOffering> = values
                .iter()
                .enumerate()
                .map(|(i, v)| offering("P", &format!("s{i:03}"), "r", "compute", &[("Memory_Size", *v)]))
                .collect();
            let refs: Vec<&ServiceOffering> = pool.iter().collect();
            let t = |label| match resolve_categorical(&memory_req(label), &refs, &reg()).unwrap().value {
                SloValue::Scalar { value } => value,
                _ => unreachable!(),
            };
            prop_assert!(t(Category::Low) <= t(Category::Medium));
            prop_assert!(t(Category::Medium) <= t(Category::High));
        }

        #[test]
        fn candidates_is_a_pure_filter(kinds in proptest::collection::vec(0usize..3, 1..30)) {
            let names = ["compute", "database", "storage"];
            let offerings: Vec<ServiceOffering> = kinds
                .iter()
                .enumerate()
                .map(|(i, k)| offering("P", &format!("s{i:03}"), "r", names[*k], &[]))
                .collect();
            let c = Catalog::from_offerings(offerings.clone(), "t", "v").unwrap();
            for name in names {
                let got = candidates_for(&c, &ComponentSpec::new(name, vec![]));
                prop_assert!(got.iter().all(|o| o.serves_type == name));
                prop_assert_eq!(got.len(), offerings.iter().filter(|o| o.serves_type == name).count());
                prop_assert!(got.windows(2).all(|w| w[0].key() < w[1].key()));
            }
        }
    }
}
