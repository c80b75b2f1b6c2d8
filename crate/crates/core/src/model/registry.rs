use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ModelError, UnitKind, UnitTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

/// How per-component values of an SLO combine into an application value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Aggregation {
    Sum,
    Min,
    Max,
}

impl Aggregation {
    pub fn apply(self, values: impl IntoIterator<Item = f64>) -> Option<f64> {
        let mut iter = values.into_iter();
        let first = iter.next()?;
        Some(iter.fold(first, |acc, v| match self {
            Aggregation::Sum => acc + v,
            Aggregation::Min => acc.min(v),
            Aggregation::Max => acc.max(v),
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloDefinition {
    pub name: String,
    pub unit_kind: UnitKind,
    pub direction: Direction,
    pub aggregation: Aggregation,
}

impl SloDefinition {
    pub fn new(name: impl Into<String>, unit_kind: UnitKind, direction: Direction, aggregation: Aggregation) -> Self {
        SloDefinition { name: name.into(), unit_kind, direction, aggregation }
    }
}

/// Known SLO names with their unit kind, preferred direction and
/// aggregation, together with the unit table used to resolve symbols.
///
/// Adding an SLO is a single [`SloRegistry::register`] call; nothing else in
/// the pipeline is keyed on specific names except bandwidth-cost handling.
#[derive(Debug, Clone)]
pub struct SloRegistry {
    slos: BTreeMap<String, SloDefinition>,
    units: UnitTable,
}

pub const MONTHLY_UPTIME: &str = "Monthly_uptime_percentage";
pub const MONTHLY_EGRESS_BANDWIDTH: &str = "Monthly_egress_bandwidth";
pub const MONTHLY_BANDWIDTH_COST: &str = "Monthly_bandwidth_cost";

impl SloRegistry {
    pub fn empty(units: UnitTable) -> Self {
        SloRegistry { slos: BTreeMap::new(), units }
    }

    pub fn standard() -> Self {
        use Aggregation::*;
        use Direction::*;
        use UnitKind::*;
        let mut reg = SloRegistry::empty(UnitTable::standard());
        let defaults = [
            (MONTHLY_UPTIME, Percentage, HigherIsBetter, Min),
            ("Monthly_consistency_percentage", Percentage, HigherIsBetter, Min),
            ("Monthly_latency_attainment_percentage", Percentage, HigherIsBetter, Min),
            ("Monthly_throughput_percentage", Percentage, HigherIsBetter, Min),
            (MONTHLY_EGRESS_BANDWIDTH, DataSize, LowerIsBetter, Sum),
            (MONTHLY_BANDWIDTH_COST, Currency, LowerIsBetter, Sum),
            ("Response_Time", Time, LowerIsBetter, Max),
            ("Migration_Time", Time, LowerIsBetter, Max),
            ("Memory_Size", DataSize, HigherIsBetter, Min),
        ];
        for (name, kind, direction, aggregation) in defaults {
            reg.register(SloDefinition::new(name, kind, direction, aggregation))
                .expect("default SLO names are unique");
        }
        reg
    }

    pub fn register(&mut self, def: SloDefinition) -> Result<(), ModelError> {
        if self.slos.contains_key(&def.name) {
            return Err(ModelError::DuplicateSloName(def.name));
        }
        self.slos.insert(def.name.clone(), def);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<&SloDefinition> {
        self.slos.get(name)
    }

    pub fn units(&self) -> &UnitTable {
        &self.units
    }

    pub fn units_mut(&mut self) -> &mut UnitTable {
        &mut self.units
    }

    pub fn len(&self) -> usize {
        self.slos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slos.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &SloDefinition> {
        self.slos.values()
    }
}

impl Default for SloRegistry {
    fn default() -> Self {
        SloRegistry::standard()
    }
}
