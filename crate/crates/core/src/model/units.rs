use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Physical kind of a unit. Units convert only within one kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnitKind {
    Time,
    DataSize,
    Currency,
    Percentage,
    Dimensionless,
}

impl UnitKind {
    /// Symbol of the unit every value of this kind is normalized to.
    pub fn base_symbol(self) -> &'static str {
        match self {
            UnitKind::Time => "s",
            UnitKind::DataSize => "GB",
            UnitKind::Currency => "$",
            UnitKind::Percentage => "",
            UnitKind::Dimensionless => "count",
        }
    }
}

impl fmt::Display for UnitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            UnitKind::Time => "time",
            UnitKind::DataSize => "data_size",
            UnitKind::Currency => "currency",
            UnitKind::Percentage => "percentage",
            UnitKind::Dimensionless => "dimensionless",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub symbol: String,
    pub kind: UnitKind,
    /// Multiplier taking a value in this unit to the kind's base unit.
    pub factor_to_base: f64,
}

impl Unit {
    pub fn new(symbol: impl Into<String>, kind: UnitKind, factor_to_base: f64) -> Result<Self, ModelError> {
        let symbol = symbol.into();
        if !(factor_to_base.is_finite() && factor_to_base > 0.0) {
            return Err(ModelError::InvalidUnitFactor { symbol, factor: factor_to_base });
        }
        Ok(Unit { symbol, kind, factor_to_base })
    }

    pub fn to_base(&self, x: f64) -> f64 {
        x * self.factor_to_base
    }

    pub fn from_base(&self, x: f64) -> f64 {
        x / self.factor_to_base
    }

    pub fn is_convertible_to(&self, other: &Unit) -> bool {
        self.kind == other.kind
    }
}

/// Converts `x` expressed in `from` into `to`.
pub fn convert_unit(x: f64, from: &Unit, to: &Unit) -> Result<f64, ModelError> {
    if from.kind != to.kind {
        return Err(ModelError::IncompatibleUnits {
            from: from.symbol.clone(),
            from_kind: from.kind,
            to: to.symbol.clone(),
            to_kind: to.kind,
        });
    }
    if from.factor_to_base == to.factor_to_base {
        return Ok(x);
    }
    Ok(x * from.factor_to_base / to.factor_to_base)
}

/// Symbol table of known units.
///
/// Data sizes use the decimal convention (1 TB = 1000 GB). The empty symbol
/// denotes a fraction in `[0, 1]` and lives in the percentage kind next to
/// `%`, so `"0.9999"` with unit `""` equals `"99.99"` with unit `"%"`.
#[derive(Debug, Clone)]
pub struct UnitTable {
    units: BTreeMap<String, Unit>,
}

impl UnitTable {
    pub fn empty() -> Self {
        UnitTable { units: BTreeMap::new() }
    }

    pub fn standard() -> Self {
        use UnitKind::*;
        let entries: &[(&str, UnitKind, f64)] = &[
            ("ms", Time, 1e-3),
            ("s", Time, 1.0),
            ("seconds", Time, 1.0),
            ("min", Time, 60.0),
            ("minutes", Time, 60.0),
            ("h", Time, 3600.0),
            ("hours", Time, 3600.0),
            ("days", Time, 86_400.0),
            ("KB", DataSize, 1e-6),
            ("MB", DataSize, 1e-3),
            ("GB", DataSize, 1.0),
            ("TB", DataSize, 1e3),
            ("PB", DataSize, 1e6),
            ("$", Currency, 1.0),
            ("USD", Currency, 1.0),
            ("", Percentage, 1.0),
            ("ratio", Percentage, 1.0),
            ("%", Percentage, 0.01),
            ("count", Dimensionless, 1.0),
        ];
        let mut table = UnitTable::empty();
        for &(symbol, kind, factor) in entries {
            table
                .register(Unit { symbol: symbol.to_string(), kind, factor_to_base: factor })
                .expect("standard unit table has unique symbols");
        }
        table
    }

    pub fn register(&mut self, unit: Unit) -> Result<(), ModelError> {
        if !(unit.factor_to_base.is_finite() && unit.factor_to_base > 0.0) {
            return Err(ModelError::InvalidUnitFactor { symbol: unit.symbol, factor: unit.factor_to_base });
        }
        if self.units.contains_key(&unit.symbol) {
            return Err(ModelError::DuplicateUnit(unit.symbol));
        }
        self.units.insert(unit.symbol.clone(), unit);
        Ok(())
    }

    pub fn lookup(&self, symbol: &str) -> Option<&Unit> {
        self.units.get(symbol)
    }

    pub fn base_of(&self, kind: UnitKind) -> &Unit {
        self.units
            .get(kind.base_symbol())
            .expect("every unit kind has its base unit registered")
    }

    pub fn iter(&self) -> impl Iterator<Item = &Unit> {
        self.units.values()
    }
}

impl Default for UnitTable {
    fn default() -> Self {
        UnitTable::standard()
    }
}
