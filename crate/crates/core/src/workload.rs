//! Deterministic synthetic applications for the scaling experiments.
//!
//! A workload is an SLO document, its topology and a catalog. Components
//! cycle through the `compute`, `database` and `storage` types; every type
//! gets `n_candidates_per_component` offerings, one of which (the anchor)
//! satisfies every requirement of every component of that type, so
//! selection never fails for lack of a feasible offering.
//!
//! Synthetic SLOs are named `Synthetic_000`, `Synthetic_001`, ...; even ones
//! are higher-is-better (MIN-aggregated, `>=`), odd ones lower-is-better
//! (MAX-aggregated, `<=`). They are measured in `count`.
//!
//! Connectivity:
//! - `low`: a directed ring, so each component talks to one or two others;
//! - `mid`: four clusters, each a clique, whose first members (the hubs)
//!   form a ring;
//! - `high`: each unordered pair is connected with probability 3/4, topped up
//!   until the average degree is at least n/2.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalog::{Catalog, OfferedValue, ServiceOffering};
use crate::model::{Aggregation, Direction, Operator, SloDefinition, SloRegistry, SloRequirement, SloValue, UnitKind};
use crate::parser::{ComponentSpec, DataFlow, SloDocument, TopologyModel};

/// Upper bound on `n_slos_per_component`; [`synthetic_registry`] knows this many.
pub const MAX_SYNTHETIC_SLOS: usize = 1000;
pub const COMPONENT_TYPES: [&str; 3] = ["compute", "database", "storage"];
const PROVIDERS: [(&str, &[&str]); 4] = [
    ("AWS", &["us-east-1", "eu-west-1"]),
    ("Azure", &["eastus", "westeurope"]),
    ("Google", &["us-central1", "europe-west1"]),
    ("RackSpace", &["dfw", "lon"]),
];

// Component requirements are drawn from [REQ_LO, REQ_HI]; anchors sit well
// outside on the good side, application thresholds in between.
const REQ_LO: f64 = 40.0;
const REQ_HI: f64 = 60.0;
const ANCHOR_HIGH: f64 = 80.0;
const ANCHOR_LOW: f64 = 20.0;
const APP_MIN_THRESHOLD: f64 = 65.0;
const APP_MAX_THRESHOLD: f64 = 35.0;

pub fn synthetic_slo_name(i: usize) -> String {
    format!("Synthetic_{i:03}")
}

fn synthetic_direction(i: usize) -> Direction {
    if i % 2 == 0 {
        Direction::HigherIsBetter
    } else {
        Direction::LowerIsBetter
    }
}

/// Registers the synthetic SLO names in `registry` (idempotent).
pub fn register_synthetic_slos(registry: &mut SloRegistry) {
    for i in 0..MAX_SYNTHETIC_SLOS {
        let name = synthetic_slo_name(i);
        if registry.lookup(&name).is_some() {
            continue;
        }
        let (direction, aggregation) = match synthetic_direction(i) {
            Direction::HigherIsBetter => (Direction::HigherIsBetter, Aggregation::Min),
            Direction::LowerIsBetter => (Direction::LowerIsBetter, Aggregation::Max),
        };
        registry
            .register(SloDefinition::new(name, UnitKind::Dimensionless, direction, aggregation))
            .expect("checked above");
    }
}

/// The standard registry plus all synthetic SLOs.
pub fn synthetic_registry() -> SloRegistry {
    let mut r = SloRegistry::standard();
    register_synthetic_slos(&mut r);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Connectivity {
    Low,
    Mid,
    High,
}

impl Connectivity {
    pub const ALL: [Connectivity; 3] = [Connectivity::Low, Connectivity::Mid, Connectivity::High];

    pub fn as_str(self) -> &'static str {
        match self {
            Connectivity::Low => "low",
            Connectivity::Mid => "mid",
            Connectivity::High => "high",
        }
    }
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Connectivity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Connectivity::Low),
            "mid" | "medium" => Ok(Connectivity::Mid),
            "high" => Ok(Connectivity::High),
            _ => Err(format!("unknown connectivity \"{s}\" (expected low, mid or high)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticWorkload {
    pub n_components: usize,
    pub n_slos_per_component: usize,
    pub connectivity: Connectivity,
    pub n_candidates_per_component: usize,
    pub seed: u64,
    /// Adds application-level SLOs on the first two synthetic SLOs.
    #[serde(default)]
    pub with_app_slos: bool,
}

impl SyntheticWorkload {
    pub fn new(n_components: usize, n_slos: usize, connectivity: Connectivity, n_candidates: usize, seed: u64) -> Self {
        SyntheticWorkload {
            n_components,
            n_slos_per_component: n_slos,
            connectivity,
            n_candidates_per_component: n_candidates,
            seed,
            with_app_slos: false,
        }
    }

    pub fn with_app_slos(mut self, on: bool) -> Self {
        self.with_app_slos = on;
        self
    }
}

#[derive(Debug, Clone)]
pub struct Workload {
    pub spec: SyntheticWorkload,
    pub document: SloDocument,
    pub topology: TopologyModel,
    pub catalog: Catalog,
}

impl Workload {
    pub fn slo_text(&self) -> String {
        self.document.to_slo_string()
    }

    /// Writes `workload.slo`, `topology.json` and `catalog.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("workload.slo"), self.slo_text())?;
        fs::write(dir.join("topology.json"), self.topology.to_json_string())?;
        fs::write(dir.join("catalog.json"), self.catalog.to_json_string())?;
        Ok(())
    }
}

fn component_id(i: usize, n: usize) -> String {
    let width = n.saturating_sub(1).to_string().len();
    format!("c{i:0width$}")
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Directed edges (as index pairs) for `n` components.
pub fn edges(n: usize, connectivity: Connectivity, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    match connectivity {
        Connectivity::Low => {
            if n == 2 {
                out.push((0, 1));
            } else {
                out.extend((0..n).map(|i| (i, (i + 1) % n)));
            }
        }
        Connectivity::Mid => {
            let size = n.div_ceil(4).max(3);
            let hubs: Vec<usize> = (0..n).step_by(size).collect();
            for &h in &hubs {
                let members: Vec<usize> = (h..(h + size).min(n)).collect();
                for (a, &i) in members.iter().enumerate() {
                    for &j in &members[a + 1..] {
                        out.push((i, j));
                    }
                }
            }
            if hubs.len() == 2 {
                out.push((hubs[0], hubs[1]));
            } else if hubs.len() > 2 {
                out.extend((0..hubs.len()).map(|k| (hubs[k], hubs[(k + 1) % hubs.len()])));
            }
        }
        Connectivity::High => {
            let mut absent = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    let pair = if rng.gen_bool(0.5) { (i, j) } else { (j, i) };
                    if rng.gen_bool(0.75) {
                        out.push(pair);
                    } else {
                        absent.push(pair);
                    }
                }
            }
            // average degree 2E/n >= n/2
            let need = (n * n).div_ceil(4);
            if out.len() < need {
                absent.shuffle(rng);
                out.extend(absent.into_iter().take(need - out.len()));
                out.sort_unstable();
            }
        }
    }
    out
}

/// Builds a workload. Identical specs give identical output.
///
/// # Panics
/// If any count is zero or `n_slos_per_component` exceeds
/// [`MAX_SYNTHETIC_SLOS`].
pub fn generate_workload(spec: &SyntheticWorkload) -> Workload {
    assert!(spec.n_components >= 1 && spec.n_slos_per_component >= 1 && spec.n_candidates_per_component >= 1);
    assert!(spec.n_slos_per_component <= MAX_SYNTHETIC_SLOS);
    let registry = synthetic_registry();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_slos = spec.n_slos_per_component;
    let names: Vec<String> = (0..n_slos).map(synthetic_slo_name).collect();

    let req = |slo: &str, op: Operator, v: f64| {
        SloRequirement::new(&registry, slo, op, SloValue::scalar(v), "count").expect("synthetic SLOs are registered")
    };
    let op_for = |i: usize| match synthetic_direction(i) {
        Direction::HigherIsBetter => Operator::Geq,
        Direction::LowerIsBetter => Operator::Leq,
    };

    let mut document = SloDocument::default();
    let ids: Vec<String> = (0..spec.n_components).map(|i| component_id(i, spec.n_components)).collect();
    for (c, id) in ids.iter().enumerate() {
        let kind = COMPONENT_TYPES[c % COMPONENT_TYPES.len()];
        let slos = names.iter().enumerate().map(|(i, n)| req(n, op_for(i), round2(rng.gen_range(REQ_LO..=REQ_HI)))).collect();
        document.components.insert(id.clone(), ComponentSpec::new(kind, slos));
    }
    if spec.with_app_slos {
        document.application_slos.push(req(&names[0], Operator::Geq, APP_MIN_THRESHOLD));
        if n_slos >= 2 {
            document.application_slos.push(req(&names[1], Operator::Leq, APP_MAX_THRESHOLD));
        }
    }
    document.data_flow = edges(spec.n_components, spec.connectivity, &mut rng)
        .into_iter()
        .map(|(a, b)| DataFlow::new(ids[a].clone(), ids[b].clone()))
        .collect();

    let used_types = spec.n_components.min(COMPONENT_TYPES.len());
    let mut offerings = Vec::with_capacity(used_types * spec.n_candidates_per_component);
    for kind in &COMPONENT_TYPES[..used_types] {
        let anchor = rng.gen_range(0..spec.n_candidates_per_component);
        for j in 0..spec.n_candidates_per_component {
            let (provider, regions) = PROVIDERS[rng.gen_range(0..PROVIDERS.len())];
            let region = regions[rng.gen_range(0..regions.len())];
            let offered_slos = (0..n_slos)
                .map(|i| {
                    let v = match (j == anchor, synthetic_direction(i)) {
                        (true, Direction::HigherIsBetter) => ANCHOR_HIGH + round2(rng.gen_range(0.0..10.0)),
                        (true, Direction::LowerIsBetter) => ANCHOR_LOW - round2(rng.gen_range(0.0..10.0)),
                        (false, Direction::HigherIsBetter) => round2(rng.gen_range(30.0..90.0)),
                        (false, Direction::LowerIsBetter) => round2(rng.gen_range(10.0..70.0)),
                    };
                    (names[i].clone(), OfferedValue { value: v, unit: String::from("count") })
                })
                .collect();
            offerings.push(ServiceOffering {
                provider: provider.to_string(),
                service_id: format!("syn-{kind}-{j:04}"),
                region: region.to_string(),
                serves_type: kind.to_string(),
                egress_price_per_gb: round2(rng.gen_range(0.05..0.15)),
                offered_slos,
                source: None,
            });
        }
    }
    let catalog = Catalog::from_offerings(offerings, "synthetic", format!("synthetic-seed-{}", spec.seed))
        .expect("synthetic keys are unique");
    let topology = TopologyModel::derive_from(&document);
    Workload { spec: spec.clone(), document, topology, catalog }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::validate_text;
    use crate::selector::{select, SelectOptions, SelectionProblem};
    use std::collections::BTreeMap;

    fn degrees(n: usize, e: &[(usize, usize)]) -> Vec<usize> {
        let mut nbrs = vec![std::collections::BTreeSet::new(); n];
        for &(a, b) in e {
            nbrs[a].insert(b);
            nbrs[b].insert(a);
        }
        nbrs.iter().map(|s| s.len()).collect()
    }

    #[test]
    fn small_ring() {
        let w = generate_workload(&SyntheticWorkload::new(3, 2, Connectivity::Low, 2, 1));
        assert_eq!(w.document.data_flow.len(), 3);
        let idx: BTreeMap<&str, usize> = w.document.component_ids().enumerate().map(|(i, c)| (c, i)).collect();
        let e: Vec<_> = w.document.data_flow.iter().map(|f| (idx[f.from.as_str()], idx[f.to.as_str()])).collect();
        assert!(degrees(3, &e).iter().all(|&d| (1..=2).contains(&d)));
    }

    #[test]
    fn connectivity_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 5, 10, 37, 100] {
            let low = edges(n, Connectivity::Low, &mut rng);
            assert!(degrees(n, &low).iter().all(|&d| (1..=2).contains(&d)), "low n={n}");
            let high = edges(n, Connectivity::High, &mut rng);
            assert!(4 * high.len() >= n * n, "high n={n}: {} edges", high.len());
            let mid = edges(n, Connectivity::Mid, &mut rng);
            assert!(low.len() <= mid.len() && mid.len() <= high.len().max(mid.len()), "n={n}");
            // mid stays connected
            let d = degrees(n, &mid);
            assert!(d.iter().all(|&x| x >= 1), "mid n={n}");
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = SyntheticWorkload::new(20, 5, Connectivity::High, 4, 42);
        let a = generate_workload(&spec);
        let b = generate_workload(&spec);
        assert_eq!(a.slo_text(), b.slo_text());
        assert_eq!(a.catalog.to_json_string(), b.catalog.to_json_string());
        assert_eq!(a.topology, b.topology);
        let c = generate_workload(&SyntheticWorkload { seed: 43, ..spec });
        assert_ne!(a.slo_text(), c.slo_text());
    }

    #[test]
    fn rendered_workload_validates_and_is_selectable() {
        let reg = synthetic_registry();
        for conn in Connectivity::ALL {
            let w = generate_workload(&SyntheticWorkload::new(7, 6, conn, 5, 7).with_app_slos(true));
            let (doc, report) = validate_text(&w.slo_text(), Some(&w.topology), &reg);
            assert!(report.is_valid, "{report}");
            assert_eq!(doc.unwrap(), w.document);
            let cat = Catalog::parse(&w.catalog.to_json_string(), "c", &reg).unwrap();
            assert_eq!(cat.offerings(), w.catalog.offerings());
            let p = SelectionProblem::new(&w.document, &w.catalog, &reg, SelectOptions::default()).unwrap();
            assert!(select(&p).unwrap().combination.feasible);
        }
    }
}
