//! SLO vocabulary: values, operators, units and the registry of known SLO
//! names, plus the satisfaction check between an offered value and a
//! requirement.

mod registry;
mod units;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use registry::{
    Aggregation, Direction, SloDefinition, SloRegistry, MONTHLY_BANDWIDTH_COST, MONTHLY_EGRESS_BANDWIDTH, MONTHLY_UPTIME,
};
pub use units::{convert_unit, Unit, UnitKind, UnitTable};

/// Relative tolerance used by the `=` operator.
pub const EQ_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("cannot convert {from:?} ({from_kind}) to {to:?} ({to_kind})")]
    IncompatibleUnits { from: String, from_kind: UnitKind, to: String, to_kind: UnitKind },
    #[error("unit {symbol:?} has invalid conversion factor {factor}")]
    InvalidUnitFactor { symbol: String, factor: f64 },
    #[error("unit {0:?} is already registered")]
    DuplicateUnit(String),
    #[error("SLO {0:?} is already registered")]
    DuplicateSloName(String),
    #[error("unknown unit {0:?}")]
    UnknownUnit(String),
    #[error("unknown SLO {0:?}")]
    UnknownSlo(String),
    #[error("unit {unit:?} ({unit_kind}) cannot be used with {slo} (expects {expected})")]
    UnitKindMismatch { slo: String, unit: String, unit_kind: UnitKind, expected: UnitKind },
    #[error("operator {operator} cannot be used with a {value_kind} value")]
    OperatorValueMismatch { operator: Operator, value_kind: &'static str },
    #[error("interval lower bound {lower} exceeds upper bound {upper}")]
    InvertedInterval { lower: f64, upper: f64 },
    #[error("value {0} is not finite")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Low,
    Medium,
    High,
}

impl Category {
    /// Quantile of the candidate pool this label resolves to.
    pub fn quantile(self) -> f64 {
        match self {
            Category::Low => 0.25,
            Category::Medium => 0.5,
            Category::High => 0.75,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Low => "low",
            Category::Medium => "medium",
            Category::High => "high",
        }
    }
}

impl FromStr for Category {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.to_ascii_lowercase().as_str() {
            "low" => Ok(Category::Low),
            "medium" => Ok(Category::Medium),
            "high" => Ok(Category::High),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SloValue {
    Scalar { value: f64 },
    Interval { lower: f64, upper: f64 },
    Categorical { label: Category },
}

impl SloValue {
    pub fn scalar(value: f64) -> Self {
        SloValue::Scalar { value }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            SloValue::Scalar { .. } => "scalar",
            SloValue::Interval { .. } => "interval",
            SloValue::Categorical { .. } => "categorical",
        }
    }

    pub fn check(&self) -> Result<(), ModelError> {
        match *self {
            SloValue::Scalar { value } if !value.is_finite() => Err(ModelError::NonFinite(value)),
            SloValue::Interval { lower, upper } => {
                for v in [lower, upper] {
                    if !v.is_finite() {
                        return Err(ModelError::NonFinite(v));
                    }
                }
                if lower > upper {
                    return Err(ModelError::InvertedInterval { lower, upper });
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Leq,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Geq,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = "in")]
    In,
}

impl Operator {
    pub const ALL: [Operator; 6] = [Operator::Lt, Operator::Leq, Operator::Gt, Operator::Geq, Operator::Eq, Operator::In];

    pub fn token(self) -> &'static str {
        match self {
            Operator::Lt => "<",
            Operator::Leq => "<=",
            Operator::Gt => ">",
            Operator::Geq => ">=",
            Operator::Eq => "=",
            Operator::In => "in",
        }
    }

    pub fn accepts(self, value: &SloValue) -> bool {
        match self {
            Operator::In => matches!(value, SloValue::Interval { .. }),
            _ => !matches!(value, SloValue::Interval { .. }),
        }
    }
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Operator {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "<" => Ok(Operator::Lt),
            "<=" | "≤" => Ok(Operator::Leq),
            ">" => Ok(Operator::Gt),
            ">=" | "≥" => Ok(Operator::Geq),
            "=" | "==" => Ok(Operator::Eq),
            "in" | "IN" => Ok(Operator::In),
            _ => Err(()),
        }
    }
}

/// Requirement threshold expressed in the base unit of the SLO's kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Scalar(f64),
    Interval(f64, f64),
}

/// One required objective as written in a `.slo` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloRequirement {
    pub slo: String,
    pub operator: Operator,
    pub value: SloValue,
    pub unit: Unit,
}

impl SloRequirement {
    /// Builds a requirement and checks it against the registry.
    pub fn new(
        registry: &SloRegistry,
        slo: &str,
        operator: Operator,
        value: SloValue,
        unit_symbol: &str,
    ) -> Result<Self, ModelError> {
        let unit = registry
            .units()
            .lookup(unit_symbol)
            .cloned()
            .ok_or_else(|| ModelError::UnknownUnit(unit_symbol.to_string()))?;
        let req = SloRequirement { slo: slo.to_string(), operator, value, unit };
        req.check(registry)?;
        Ok(req)
    }

    pub fn check(&self, registry: &SloRegistry) -> Result<(), ModelError> {
        let def = registry.lookup(&self.slo).ok_or_else(|| ModelError::UnknownSlo(self.slo.clone()))?;
        if self.unit.kind != def.unit_kind {
            return Err(ModelError::UnitKindMismatch {
                slo: self.slo.clone(),
                unit: self.unit.symbol.clone(),
                unit_kind: self.unit.kind,
                expected: def.unit_kind,
            });
        }
        if !self.operator.accepts(&self.value) {
            return Err(ModelError::OperatorValueMismatch { operator: self.operator, value_kind: self.value.kind_name() });
        }
        self.value.check()
    }

    /// Threshold in base units; `None` while the value is still categorical.
    pub fn threshold(&self) -> Option<Threshold> {
        match self.value {
            SloValue::Scalar { value } => Some(Threshold::Scalar(self.unit.to_base(value))),
            SloValue::Interval { lower, upper } => {
                Some(Threshold::Interval(self.unit.to_base(lower), self.unit.to_base(upper)))
            }
            SloValue::Categorical { .. } => None,
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.value, SloValue::Categorical { .. })
    }
}

pub(crate) fn eq_within_tolerance(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= EQ_TOLERANCE * a.abs().max(b.abs())
}

/// Whether an offered value (already in the requirement's base unit)
/// satisfies the requirement. Unresolved categorical requirements are never
/// satisfied.
pub fn satisfies(offered: f64, req: &SloRequirement) -> bool {
    let Some(threshold) = req.threshold() else {
        return false;
    };
    if offered.is_nan() {
        return false;
    }
    match (req.operator, threshold) {
        (Operator::Geq, Threshold::Scalar(r)) => offered >= r,
        (Operator::Gt, Threshold::Scalar(r)) => offered > r,
        (Operator::Leq, Threshold::Scalar(r)) => offered <= r,
        (Operator::Lt, Threshold::Scalar(r)) => offered < r,
        (Operator::Eq, Threshold::Scalar(r)) => eq_within_tolerance(offered, r),
        (Operator::In, Threshold::Interval(lo, hi)) => lo <= offered && offered <= hi,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn req(slo: &str, op: Operator, value: SloValue, unit: &str) -> SloRequirement {
        SloRequirement::new(&SloRegistry::standard(), slo, op, value, unit).unwrap()
    }

    #[test]
    fn geq_examples() {
        let r = req("Monthly_uptime_percentage", Operator::Geq, SloValue::scalar(0.99), "");
        assert!(satisfies(0.9999, &r));
        assert!(satisfies(0.99, &r));
        assert!(!satisfies(0.98, &r));
    }

    #[test]
    fn interval_membership() {
        let r = req("Response_Time", Operator::In, SloValue::Interval { lower: 5.0, upper: 10.0 }, "s");
        assert!(satisfies(7.0, &r));
        assert!(!satisfies(4.9, &r));
        assert!(satisfies(5.0, &r));
        assert!(satisfies(10.0, &r));
    }

    #[test]
    fn interval_in_milliseconds_is_compared_in_seconds() {
        let r = req("Response_Time", Operator::In, SloValue::Interval { lower: 5.0, upper: 10.0 }, "ms");
        assert!(satisfies(0.007, &r));
        assert!(!satisfies(7.0, &r));
    }

    #[test]
    fn strict_and_equal_operators() {
        let lt = req("Monthly_bandwidth_cost", Operator::Lt, SloValue::scalar(20.0), "$");
        assert!(satisfies(19.99, &lt));
        assert!(!satisfies(20.0, &lt));
        let gt = req("Memory_Size", Operator::Gt, SloValue::scalar(4.0), "GB");
        assert!(!satisfies(4.0, &gt));
        assert!(satisfies(4.5, &gt));
        let eq = req("Memory_Size", Operator::Eq, SloValue::scalar(8.0), "GB");
        assert!(satisfies(8.0 * (1.0 + 1e-12), &eq));
        assert!(!satisfies(8.001, &eq));
    }

    #[test]
    fn categorical_is_not_evaluable() {
        let r = req("Memory_Size", Operator::Geq, SloValue::Categorical { label: Category::High }, "GB");
        assert!(r.threshold().is_none());
        assert!(!satisfies(1e9, &r));
    }

    #[test]
    fn operator_value_compatibility() {
        let reg = SloRegistry::standard();
        let bad = SloRequirement::new(&reg, "Response_Time", Operator::In, SloValue::scalar(3.0), "ms");
        assert!(matches!(bad, Err(ModelError::OperatorValueMismatch { .. })));
        let bad = SloRequirement::new(&reg, "Response_Time", Operator::Leq, SloValue::Interval { lower: 1.0, upper: 2.0 }, "ms");
        assert!(matches!(bad, Err(ModelError::OperatorValueMismatch { .. })));
        let inverted = SloRequirement::new(&reg, "Response_Time", Operator::In, SloValue::Interval { lower: 3.0, upper: 2.0 }, "ms");
        assert!(matches!(inverted, Err(ModelError::InvertedInterval { .. })));
        let wrong_unit = SloRequirement::new(&reg, "Monthly_egress_bandwidth", Operator::Leq, SloValue::scalar(1.0), "days");
        assert!(matches!(wrong_unit, Err(ModelError::UnitKindMismatch { .. })));
    }

    #[test]
    fn operator_tokens_round_trip() {
        for op in Operator::ALL {
            assert_eq!(op.token().parse::<Operator>(), Ok(op));
        }
        assert!("=>".parse::<Operator>().is_err());
    }

    proptest! {
        #[test]
        fn geq_is_monotone(r in -1e6f64..1e6, a in -1e6f64..1e6, d in 0f64..1e6) {
            let q = SloRequirement {
                slo: "Monthly_uptime_percentage".into(),
                operator: Operator::Geq,
                value: SloValue::scalar(r),
                unit: UnitTable::standard().lookup("").unwrap().clone(),
            };
            if satisfies(a, &q) {
                prop_assert!(satisfies(a + d, &q));
            }
        }

        #[test]
        fn every_valid_requirement_is_evaluable(
            idx in 0usize..9,
            op in 0usize..5,
            v in -1e6f64..1e6,
            offered in -1e6f64..1e6,
        ) {
            let reg = SloRegistry::standard();
            let def = reg.iter().nth(idx).unwrap().clone();
            let unit = reg.units().base_of(def.unit_kind).symbol.clone();
            let r = SloRequirement::new(&reg, &def.name, Operator::ALL[op], SloValue::scalar(v), &unit).unwrap();
            prop_assert!(r.threshold().is_some());
            let _ = satisfies(offered, &r);
        }
    }
}
