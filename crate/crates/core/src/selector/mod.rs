//! Utility-based service selection.
//!
//! Each offered SLO value gets a utility of `1 - e^(-margin)` when it meets
//! the requirement and `-1` otherwise; an offering's utility is the sum over
//! the component's SLOs. Application-level SLOs are scored the same way on
//! the aggregate of the chosen offerings (SUM, MIN or MAX per the registry,
//! bandwidth cost computed along data-flow edges). A combination's total is
//! the sum of its service utilities plus its application-level utilities,
//! and the selector returns the feasible combination with the highest total.
//!
//! Ties are broken by the lexicographic `(provider, service_id, region)`
//! sequence of the assignment in component-id order, so catalog file order
//! never affects the outcome.

mod utility;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{candidates_for, resolve_categorical, union_of, Catalog, CatalogError, OfferingKey, ServiceOffering};
use crate::model::{SloRegistry, SloRequirement, SloValue, Threshold, MONTHLY_BANDWIDTH_COST, MONTHLY_EGRESS_BANDWIDTH};
use crate::parser::{DataFlow, SloDocument};

pub use utility::{margin, service_utility, slo_utility, MarginScale, Required, ServiceUtility, SloUtility};
use utility::{service_utility_for, utility_of};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error("no feasible selection: {}", describe_infeasible(.components, .application_slos))]
    InfeasibleSelection { components: Vec<String>, application_slos: Vec<String> },
    #[error("{combinations} combinations exceed the enumeration budget of {budget}; narrow the catalog or raise --budget")]
    BudgetExceeded { combinations: u128, budget: u64 },
    #[error("requirement on {slo} is still categorical; resolve it against a candidate pool first")]
    UnresolvedCategory { slo: String },
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("document declares no components")]
    NoComponents,
    #[error("assignment for {component}: {reason}")]
    InvalidAssignment { component: String, reason: String },
}

fn describe_infeasible(components: &[String], app: &[String]) -> String {
    let mut parts = Vec::new();
    if !components.is_empty() {
        parts.push(format!("no feasible offering for component(s) {}", components.join(", ")));
    }
    if !app.is_empty() {
        parts.push(format!("every combination violates application SLO(s) {}", app.join(", ")));
    }
    parts.join("; ")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectOptions {
    /// Maximum number of combinations the selector may enumerate.
    pub budget: u64,
    pub margin_scale: MarginScale,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions { budget: DEFAULT_BUDGET, margin_scale: MarginScale::Raw }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppSloUtility {
    pub slo_name: String,
    /// `None` when some chosen offering lacks the SLO.
    pub aggregated_value: Option<f64>,
    pub required: Required,
    pub margin: Option<f64>,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinationUtility {
    pub assignment: BTreeMap<String, ServiceOffering>,
    pub service_utilities: BTreeMap<String, ServiceUtility>,
    pub per_app_slo: Vec<AppSloUtility>,
    pub total: f64,
    pub bandwidth_cost: f64,
    pub feasible: bool,
}

impl CombinationUtility {
    pub fn assignment_keys(&self) -> BTreeMap<String, OfferingKey> {
        self.assignment.iter().map(|(c, o)| (c.clone(), o.key())).collect()
    }
}

mod duration_ms {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64() * 1e3)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let ms = f64::deserialize(d)?;
        Ok(Duration::from_secs_f64(ms.max(0.0) / 1e3))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPlan {
    pub combination: CombinationUtility,
    /// Combinations scored (or offerings, when components are chosen
    /// independently because there are no application-level SLOs).
    pub alternatives_considered: u64,
    /// Offerings scored against component requirements before pruning.
    pub candidates_evaluated: u64,
    /// Size of each component's feasible set after pruning.
    pub feasible_set_sizes: BTreeMap<String, usize>,
    #[serde(rename = "elapsed_ms", with = "duration_ms")]
    pub elapsed: Duration,
    pub infeasible_components: Vec<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Sum of `egress volume × source egress price` over data-flow edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BandwidthCost {
    pub total: f64,
    pub warnings: Vec<String>,
}

/// Egress volume of a component in GB, from its `Monthly_egress_bandwidth`
/// requirement (upper bound for intervals).
fn egress_volume_gb(reqs: &[SloRequirement]) -> Option<f64> {
    reqs.iter().find(|r| r.slo == MONTHLY_EGRESS_BANDWIDTH).and_then(|r| match r.threshold()? {
        Threshold::Scalar(v) => Some(v),
        Threshold::Interval(_, hi) => Some(hi),
    })
}

/// Expected data-transfer cost of an assignment.
pub fn bandwidth_cost(doc: &SloDocument, assignment: &BTreeMap<String, ServiceOffering>) -> BandwidthCost {
    let mut total = 0.0;
    let mut warnings = Vec::new();
    for flow in &doc.data_flow {
        let volume = doc.components.get(&flow.from).and_then(|c| egress_volume_gb(&c.slos));
        let Some(volume) = volume else {
            warnings.push(format!(
                "{} -> {}: {} declares no scalar {MONTHLY_EGRESS_BANDWIDTH}; edge costs nothing",
                flow.from, flow.to, flow.from
            ));
            continue;
        };
        match assignment.get(&flow.from) {
            Some(o) => total += volume * o.egress_price_per_gb,
            None => warnings.push(format!("{} -> {}: {} has no assigned offering", flow.from, flow.to, flow.from)),
        }
    }
    BandwidthCost { total, warnings }
}

/// One component after categorical resolution, with its candidate pool.
#[derive(Debug, Clone)]
struct PreparedComponent<'c> {
    id: String,
    reqs: Vec<SloRequirement>,
    candidates: Vec<&'c ServiceOffering>,
    egress_gb: Option<f64>,
}

#[derive(Debug, Clone)]
struct AppRequirement {
    req: SloRequirement,
    aggregation: crate::model::Aggregation,
    is_bandwidth_cost: bool,
}

/// A document bound to a catalog: categorical requirements resolved,
/// candidate pools fixed. Shared by [`select`], the unpruned search and
/// assignment scoring so all of them see identical requirements.
#[derive(Debug, Clone)]
pub struct SelectionProblem<'c> {
    components: Vec<PreparedComponent<'c>>,
    app: Vec<AppRequirement>,
    edges: Vec<(usize, usize)>,
    catalog: &'c Catalog,
    pub options: SelectOptions,
    pub warnings: Vec<String>,
}

impl<'c> SelectionProblem<'c> {
    pub fn new(
        doc: &SloDocument,
        catalog: &'c Catalog,
        registry: &SloRegistry,
        options: SelectOptions,
    ) -> Result<Self, SelectError> {
        if doc.components.is_empty() {
            return Err(SelectError::NoComponents);
        }
        let mut components = Vec::with_capacity(doc.components.len());
        let mut index = BTreeMap::new();
        for (id, spec) in &doc.components {
            let candidates = candidates_for(catalog, spec);
            let reqs = spec
                .slos
                .iter()
                .map(|r| if r.is_categorical() { resolve_categorical(r, &candidates, registry) } else { Ok(r.clone()) })
                .collect::<Result<Vec<_>, _>>()?;
            index.insert(id.as_str(), components.len());
            let egress_gb = egress_volume_gb(&reqs);
            components.push(PreparedComponent { id: id.clone(), reqs, candidates, egress_gb });
        }
        let pool = union_of(&components.iter().map(|c| c.candidates.clone()).collect::<Vec<_>>());
        let mut app = Vec::with_capacity(doc.application_slos.len());
        for r in &doc.application_slos {
            let req = if r.is_categorical() { resolve_categorical(r, &pool, registry)? } else { r.clone() };
            let aggregation =
                registry.lookup(&r.slo).map(|d| d.aggregation).unwrap_or(crate::model::Aggregation::Sum);
            app.push(AppRequirement { is_bandwidth_cost: r.slo == MONTHLY_BANDWIDTH_COST, req, aggregation });
        }
        let mut warnings = Vec::new();
        let mut edges = Vec::with_capacity(doc.data_flow.len());
        for DataFlow { from, to } in &doc.data_flow {
            match (index.get(from.as_str()), index.get(to.as_str())) {
                (Some(&f), Some(&t)) => {
                    if components[f].egress_gb.is_none() {
                        warnings.push(format!(
                            "{from} -> {to}: {from} declares no scalar {MONTHLY_EGRESS_BANDWIDTH}; edge costs nothing"
                        ));
                    }
                    edges.push((f, t));
                }
                _ => warnings.push(format!("{from} -> {to}: endpoint is not a declared component; edge ignored")),
            }
        }
        Ok(SelectionProblem { components, app, edges, catalog, options, warnings })
    }

    pub fn component_ids(&self) -> impl Iterator<Item = &str> {
        self.components.iter().map(|c| c.id.as_str())
    }

    /// Candidate pool sizes per component, before pruning.
    pub fn candidate_counts(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.candidates.len()).collect()
    }

    pub fn has_application_slos(&self) -> bool {
        !self.app.is_empty()
    }

    fn score_services(&self) -> Result<Vec<Vec<Scored<'c>>>, SelectError> {
        self.components
            .iter()
            .map(|c| {
                c.candidates
                    .iter()
                    .map(|o| {
                        Ok(Scored { offering: *o, utility: service_utility_for(o, &c.reqs, self.options.margin_scale)? })
                    })
                    .collect()
            })
            .collect()
    }

    fn bandwidth_cost_of(&self, choice: &[&ServiceOffering]) -> f64 {
        let mut total = 0.0;
        for &(from, _) in &self.edges {
            if let Some(v) = self.components[from].egress_gb {
                total += v * choice[from].egress_price_per_gb;
            }
        }
        total
    }

    fn app_utilities(&self, choice: &[&ServiceOffering]) -> Vec<AppSloUtility> {
        self.app
            .iter()
            .map(|a| {
                let aggregated = if a.is_bandwidth_cost {
                    Some(self.bandwidth_cost_of(choice))
                } else {
                    choice
                        .iter()
                        .map(|o| o.offered(&a.req.slo))
                        .collect::<Option<Vec<f64>>>()
                        .and_then(|vals| a.aggregation.apply(vals))
                };
                let required = a.req.threshold().expect("application requirements are resolved").into();
                match aggregated {
                    Some(v) => {
                        let (m, u) = utility_of(v, &a.req, self.options.margin_scale);
                        AppSloUtility { slo_name: a.req.slo.clone(), aggregated_value: Some(v), required, margin: Some(m), utility: u }
                    }
                    None => AppSloUtility { slo_name: a.req.slo.clone(), aggregated_value: None, required, margin: None, utility: -1.0 },
                }
            })
            .collect()
    }

    /// Total of an assignment given its per-component service totals.
    /// Summation order: components by id, then application SLOs in
    /// document order.
    fn total_of(&self, choice: &[&ServiceOffering], service_totals: impl Iterator<Item = f64>) -> (f64, bool) {
        let mut total = service_totals.fold(0.0, |acc, t| acc + t);
        let mut feasible = true;
        for a in self.app_utilities(choice) {
            total += a.utility;
            feasible &= a.utility >= 0.0;
        }
        (total, feasible)
    }

    fn materialize(&self, picks: &[&Scored<'c>]) -> CombinationUtility {
        let choice: Vec<&ServiceOffering> = picks.iter().map(|s| s.offering).collect();
        let per_app_slo = self.app_utilities(&choice);
        let service_total = picks.iter().fold(0.0, |acc, s| acc + s.utility.total);
        let total = per_app_slo.iter().fold(service_total, |acc, a| acc + a.utility);
        let feasible = picks.iter().all(|s| s.utility.feasible) && per_app_slo.iter().all(|a| a.utility >= 0.0);
        CombinationUtility {
            assignment: self.components.iter().zip(&choice).map(|(c, o)| (c.id.clone(), (*o).clone())).collect(),
            service_utilities: self.components.iter().zip(picks).map(|(c, s)| (c.id.clone(), s.utility.clone())).collect(),
            per_app_slo,
            total,
            bandwidth_cost: self.bandwidth_cost_of(&choice),
            feasible,
        }
    }

    /// Scores an arbitrary assignment (e.g. a manual pick). Offerings that do
    /// not serve the component's type make the combination infeasible.
    pub fn evaluate(&self, assignment: &BTreeMap<String, OfferingKey>) -> Result<CombinationUtility, SelectError> {
        let mut scored = Vec::with_capacity(self.components.len());
        let mut type_ok = true;
        for c in &self.components {
            let key = assignment.get(&c.id).ok_or_else(|| SelectError::InvalidAssignment {
                component: c.id.clone(),
                reason: "no offering assigned".into(),
            })?;
            let offering = self.catalog.get(key).ok_or_else(|| SelectError::InvalidAssignment {
                component: c.id.clone(),
                reason: format!("{key} is not in the catalog"),
            })?;
            type_ok &= c.candidates.iter().any(|o| o.key() == *key);
            scored.push(Scored { offering, utility: service_utility_for(offering, &c.reqs, self.options.margin_scale)? });
        }
        let refs: Vec<&Scored> = scored.iter().collect();
        let mut combo = self.materialize(&refs);
        combo.feasible &= type_ok;
        Ok(combo)
    }
}

#[derive(Debug, Clone)]
struct Scored<'c> {
    offering: &'c ServiceOffering,
    utility: ServiceUtility,
}

fn product(sizes: impl IntoIterator<Item = usize>) -> u128 {
    sizes.into_iter().fold(1u128, |acc, n| acc.saturating_mul(n as u128))
}

/// Compares two candidate assignments: higher total wins, then the
/// lexicographically smaller key sequence.
fn better(total: f64, keys: &[&ServiceOffering], best_total: f64, best_keys: &[&ServiceOffering]) -> bool {
    match total.total_cmp(&best_total) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => keys
            .iter()
            .map(|o| (&o.provider, &o.service_id, &o.region))
            .lt(best_keys.iter().map(|o| (&o.provider, &o.service_id, &o.region))),
    }
}

/// Odometer over a mixed-radix index vector; returns false after the last.
fn advance(idx: &mut [usize], sizes: &[usize]) -> bool {
    for pos in (0..idx.len()).rev() {
        idx[pos] += 1;
        if idx[pos] < sizes[pos] {
            return true;
        }
        idx[pos] = 0;
    }
    false
}

struct Search<'a, 'c> {
    problem: &'a SelectionProblem<'c>,
    sets: Vec<Vec<&'a Scored<'c>>>,
}

impl<'c> Search<'_, 'c> {
    /// Exhaustive argmax over the cross product of `sets`, skipping
    /// infeasible combinations. Returns the winner and the number of
    /// combinations scored.
    fn run(&self) -> (Option<Vec<usize>>, u64) {
        let sizes: Vec<usize> = self.sets.iter().map(Vec::len).collect();
        if sizes.iter().any(|&n| n == 0) {
            return (None, 0);
        }
        let mut idx = vec![0usize; sizes.len()];
        let mut best: Option<(f64, Vec<usize>)> = None;
        let mut count = 0u64;
        let mut choice: Vec<&ServiceOffering> = Vec::with_capacity(sizes.len());
        loop {
            count += 1;
            choice.clear();
            choice.extend(idx.iter().zip(&self.sets).map(|(&i, s)| s[i].offering));
            let services_ok = idx.iter().zip(&self.sets).all(|(&i, s)| s[i].utility.feasible);
            if services_ok {
                let totals = idx.iter().zip(&self.sets).map(|(&i, s)| s[i].utility.total);
                let (total, feasible) = self.problem.total_of(&choice, totals);
                if feasible {
                    let replace = match &best {
                        None => true,
                        Some((bt, bi)) => {
                            let best_choice: Vec<&ServiceOffering> =
                                bi.iter().zip(&self.sets).map(|(&i, s)| s[i].offering).collect();
                            better(total, &choice, *bt, &best_choice)
                        }
                    };
                    if replace {
                        best = Some((total, idx.clone()));
                    }
                }
            }
            if !advance(&mut idx, &sizes) {
                break;
            }
        }
        (best.map(|(_, i)| i), count)
    }
}

fn finish<'c>(
    problem: &SelectionProblem<'c>,
    picks: Vec<&Scored<'c>>,
    alternatives: u64,
    candidates: u64,
    feasible_sizes: BTreeMap<String, usize>,
    started: Instant,
) -> SelectionPlan {
    let combination = problem.materialize(&picks);
    SelectionPlan {
        combination,
        alternatives_considered: alternatives,
        candidates_evaluated: candidates,
        feasible_set_sizes: feasible_sizes,
        elapsed: started.elapsed(),
        infeasible_components: Vec::new(),
        warnings: problem.warnings.clone(),
    }
}

fn violated_app_slos(problem: &SelectionProblem, sets: &[Vec<&Scored>]) -> Vec<String> {
    // Report the application SLOs the best-effort (first) combination breaks.
    let choice: Vec<&ServiceOffering> = sets.iter().map(|s| s[0].offering).collect();
    problem.app_utilities(&choice).into_iter().filter(|a| a.utility < 0.0).map(|a| a.slo_name).collect()
}

/// Selects the utility-maximizing feasible assignment.
///
/// Offerings violating any component requirement are pruned first; with no
/// application-level SLOs each component is then chosen independently,
/// otherwise the cross product of the pruned sets is enumerated.
pub fn select(problem: &SelectionProblem) -> Result<SelectionPlan, SelectError> {
    let started = Instant::now();
    let scored = problem.score_services()?;
    let candidates = scored.iter().map(|s| s.len() as u64).sum();
    let sets: Vec<Vec<&Scored>> = scored.iter().map(|s| s.iter().filter(|x| x.utility.feasible).collect()).collect();
    let feasible_sizes: BTreeMap<String, usize> =
        problem.components.iter().zip(&sets).map(|(c, s)| (c.id.clone(), s.len())).collect();
    let infeasible: Vec<String> =
        problem.components.iter().zip(&sets).filter(|(_, s)| s.is_empty()).map(|(c, _)| c.id.clone()).collect();
    if !infeasible.is_empty() {
        return Err(SelectError::InfeasibleSelection { components: infeasible, application_slos: Vec::new() });
    }

    if !problem.has_application_slos() {
        let picks: Vec<&Scored> = sets
            .iter()
            .map(|set| {
                let mut best = set[0];
                for s in &set[1..] {
                    if better(s.utility.total, &[s.offering], best.utility.total, &[best.offering]) {
                        best = s;
                    }
                }
                best
            })
            .collect();
        return Ok(finish(problem, picks, candidates, candidates, feasible_sizes, started));
    }

    let combinations = product(sets.iter().map(Vec::len));
    if combinations > problem.options.budget as u128 {
        return Err(SelectError::BudgetExceeded { combinations, budget: problem.options.budget });
    }
    let search = Search { problem, sets };
    match search.run() {
        (Some(idx), count) => {
            let picks = idx.iter().zip(&search.sets).map(|(&i, s)| s[i]).collect();
            Ok(finish(problem, picks, count, candidates, feasible_sizes, started))
        }
        (None, _) => Err(SelectError::InfeasibleSelection {
            components: Vec::new(),
            application_slos: violated_app_slos(problem, &search.sets),
        }),
    }
}

/// Full cross-product enumeration without pruning. Same result as
/// [`select`]; kept to measure what pruning saves.
pub fn select_unpruned(problem: &SelectionProblem) -> Result<SelectionPlan, SelectError> {
    let started = Instant::now();
    let scored = problem.score_services()?;
    let candidates = scored.iter().map(|s| s.len() as u64).sum();
    let sets: Vec<Vec<&Scored>> = scored.iter().map(|s| s.iter().collect()).collect();
    let combinations = product(sets.iter().map(Vec::len));
    if combinations > problem.options.budget as u128 {
        return Err(SelectError::BudgetExceeded { combinations, budget: problem.options.budget });
    }
    let feasible_sizes =
        problem.components.iter().zip(&sets).map(|(c, s)| (c.id.clone(), s.iter().filter(|x| x.utility.feasible).count())).collect();
    let search = Search { problem, sets };
    match search.run() {
        (Some(idx), count) => {
            let picks = idx.iter().zip(&search.sets).map(|(&i, s)| s[i]).collect();
            Ok(finish(problem, picks, count, candidates, feasible_sizes, started))
        }
        (None, _) => {
            let infeasible: Vec<String> = problem
                .components
                .iter()
                .zip(&search.sets)
                .filter(|(_, s)| !s.iter().any(|x| x.utility.feasible))
                .map(|(c, _)| c.id.clone())
                .collect();
            Err(SelectError::InfeasibleSelection { components: infeasible, application_slos: Vec::new() })
        }
    }
}

/// Lowest and highest totals over all feasible combinations.
pub fn feasible_total_range(problem: &SelectionProblem) -> Result<Option<(f64, f64)>, SelectError> {
    let scored = problem.score_services()?;
    let sets: Vec<Vec<&Scored>> = scored.iter().map(|s| s.iter().filter(|x| x.utility.feasible).collect()).collect();
    let sizes: Vec<usize> = sets.iter().map(Vec::len).collect();
    if sizes.iter().any(|&n| n == 0) {
        return Ok(None);
    }
    let combinations = product(sizes.iter().copied());
    if combinations > problem.options.budget as u128 {
        return Err(SelectError::BudgetExceeded { combinations, budget: problem.options.budget });
    }
    let mut idx = vec![0usize; sizes.len()];
    let mut range: Option<(f64, f64)> = None;
    loop {
        let choice: Vec<&ServiceOffering> = idx.iter().zip(&sets).map(|(&i, s)| s[i].offering).collect();
        let (total, feasible) = problem.total_of(&choice, idx.iter().zip(&sets).map(|(&i, s)| s[i].utility.total));
        if feasible {
            range = Some(match range {
                None => (total, total),
                Some((lo, hi)) => (lo.min(total), hi.max(total)),
            });
        }
        if !advance(&mut idx, &sizes) {
            break;
        }
    }
    Ok(range)
}

/// Closeness of a selection to the optimum, in `[0, 1]`.
///
/// Infeasible selections score 0. Otherwise the distance to the optimum is
/// normalized by the spread between the optimum and `floor`, the lowest
/// feasible total.
pub fn accuracy(selected: &CombinationUtility, optimal: &CombinationUtility, floor: f64) -> f64 {
    if !selected.feasible {
        return 0.0;
    }
    if selected.total >= optimal.total {
        return 1.0;
    }
    let spread = optimal.total - floor;
    if spread <= 0.0 {
        return 0.0;
    }
    (1.0 - (optimal.total - selected.total) / spread).clamp(0.0, 1.0)
}

/// Convenience: selects the optimum and scores `assignment` against it.
pub fn accuracy_of(problem: &SelectionProblem, assignment: &BTreeMap<String, OfferingKey>) -> Result<f64, SelectError> {
    let selected = problem.evaluate(assignment)?;
    if !selected.feasible {
        return Ok(0.0);
    }
    let optimal = select(problem)?.combination;
    let (floor, _) = feasible_total_range(problem)?.expect("a feasible selection exists");
    Ok(accuracy(&selected, &optimal, floor))
}

/// Requirement values of a document expressed in base units, used by
/// diagnostics.
pub fn requirement_summary(req: &SloRequirement) -> String {
    match req.value {
        SloValue::Categorical { label } => format!("{} {} {}", req.slo, req.operator, label.as_str()),
        _ => match req.threshold() {
            Some(Threshold::Scalar(v)) => format!("{} {} {v}", req.slo, req.operator),
            Some(Threshold::Interval(lo, hi)) => format!("{} in [{lo}, {hi}]", req.slo),
            None => req.slo.clone(),
        },
    }
}

#[cfg(test)]
mod tests;
