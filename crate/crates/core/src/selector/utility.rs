use serde::{Deserialize, Serialize};

use crate::catalog::{OfferingKey, ServiceOffering};
use crate::model::{eq_within_tolerance, satisfies, Operator, SloRequirement, Threshold};
use crate::parser::ComponentSpec;

use super::SelectError;

/// How raw margins are scaled before entering the exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginScale {
    /// Margins in the SLO's base unit, as published.
    #[default]
    Raw,
    /// Margins divided by the magnitude of the required value.
    Relative,
}

/// Required value in base units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Required {
    Scalar(f64),
    Interval([f64; 2]),
}

impl From<Threshold> for Required {
    fn from(t: Threshold) -> Self {
        match t {
            Threshold::Scalar(v) => Required::Scalar(v),
            Threshold::Interval(lo, hi) => Required::Interval([lo, hi]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SloUtility {
    pub slo_name: String,
    /// `None` when the offering has no SLA for this SLO.
    pub offered: Option<f64>,
    pub required: Required,
    pub margin: Option<f64>,
    pub utility: f64,
}

/// Signed slack of `offered` against a resolved requirement, oriented by the
/// operator: positive means better than required.
///
/// `>=`/`>` use offered − required, `<=`/`<` use required − offered. `=` and
/// `in` have zero slack when satisfied and the negative distance otherwise.
pub fn margin(offered: f64, req: &SloRequirement) -> Option<f64> {
    let t = req.threshold()?;
    Some(match (req.operator, t) {
        (Operator::Geq | Operator::Gt, Threshold::Scalar(r)) => offered - r,
        (Operator::Leq | Operator::Lt, Threshold::Scalar(r)) => r - offered,
        (Operator::Eq, Threshold::Scalar(r)) => {
            if eq_within_tolerance(offered, r) {
                0.0
            } else {
                -(offered - r).abs()
            }
        }
        (Operator::In, Threshold::Interval(lo, hi)) => {
            if offered < lo {
                offered - lo
            } else if offered > hi {
                hi - offered
            } else {
                0.0
            }
        }
        _ => return None,
    })
}

fn scaled(margin: f64, req: &SloRequirement, scale: MarginScale) -> f64 {
    match (scale, req.threshold()) {
        (MarginScale::Relative, Some(Threshold::Scalar(r))) if r != 0.0 => margin / r.abs(),
        _ => margin,
    }
}

/// `1 - e^(-margin)` for a satisfied requirement, `-1` otherwise.
pub(crate) fn utility_of(offered: f64, req: &SloRequirement, scale: MarginScale) -> (f64, f64) {
    let m = margin(offered, req).unwrap_or(f64::NEG_INFINITY);
    if satisfies(offered, req) && m >= 0.0 {
        (m, 1.0 - (-scaled(m, req, scale)).exp())
    } else {
        (m, -1.0)
    }
}

fn threshold_of(req: &SloRequirement) -> Result<Threshold, SelectError> {
    req.threshold().ok_or_else(|| SelectError::UnresolvedCategory { slo: req.slo.clone() })
}

/// Utility of one offered value against one requirement.
pub fn slo_utility(offered: f64, req: &SloRequirement) -> Result<SloUtility, SelectError> {
    slo_utility_scaled(Some(offered), req, MarginScale::Raw)
}

pub(crate) fn slo_utility_scaled(
    offered: Option<f64>,
    req: &SloRequirement,
    scale: MarginScale,
) -> Result<SloUtility, SelectError> {
    let required = threshold_of(req)?.into();
    Ok(match offered {
        Some(o) => {
            let (m, u) = utility_of(o, req, scale);
            SloUtility { slo_name: req.slo.clone(), offered: Some(o), required, margin: Some(m), utility: u }
        }
        None => SloUtility { slo_name: req.slo.clone(), offered: None, required, margin: None, utility: -1.0 },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceUtility {
    pub offering: OfferingKey,
    pub slo_utilities: Vec<SloUtility>,
    /// Sum of the per-SLO utilities.
    pub total: f64,
    pub feasible: bool,
}

/// Scores an offering against a component's requirements, in document order.
/// Requirements must already be resolved to scalars or intervals.
pub fn service_utility(offering: &ServiceOffering, component: &ComponentSpec) -> Result<ServiceUtility, SelectError> {
    service_utility_for(offering, &component.slos, MarginScale::Raw)
}

pub(crate) fn service_utility_for(
    offering: &ServiceOffering,
    reqs: &[SloRequirement],
    scale: MarginScale,
) -> Result<ServiceUtility, SelectError> {
    let slo_utilities = reqs
        .iter()
        .map(|r| slo_utility_scaled(offering.offered(&r.slo), r, scale))
        .collect::<Result<Vec<_>, _>>()?;
    let total = slo_utilities.iter().fold(0.0, |acc, u| acc + u.utility);
    let feasible = slo_utilities.iter().all(|u| u.utility >= 0.0);
    Ok(ServiceUtility { offering: offering.key(), slo_utilities, total, feasible })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::OfferedValue;
    use crate::model::{SloRegistry, SloValue};
    use proptest::prelude::*;

    fn geq(v: f64) -> SloRequirement {
        SloRequirement::new(&SloRegistry::standard(), "Monthly_uptime_percentage", Operator::Geq, SloValue::scalar(v), "").unwrap()
    }

    #[test]
    fn exact_satisfaction_scores_zero() {
        assert_eq!(slo_utility(0.99, &geq(0.99)).unwrap().utility, 0.0);
    }

    #[test]
    fn violation_scores_minus_one() {
        assert_eq!(slo_utility(0.98, &geq(0.99)).unwrap().utility, -1.0);
    }

    #[test]
    fn positive_margin() {
        let u = slo_utility(0.9999, &geq(0.99)).unwrap();
        let expected = 1.0 - (-0.0099f64).exp();
        assert!((u.utility - expected).abs() < 1e-12);
        assert!((u.utility - 0.009851).abs() < 5e-7);
    }

    #[test]
    fn lower_is_better_margin() {
        let reg = SloRegistry::standard();
        let cost = SloRequirement::new(&reg, "Monthly_bandwidth_cost", Operator::Leq, SloValue::scalar(175.0), "$").unwrap();
        let u = slo_utility(170.0, &cost).unwrap();
        assert_eq!(u.margin, Some(5.0));
        assert_eq!(u.utility, 1.0 - (-5.0f64).exp());
        assert_eq!(slo_utility(176.0, &cost).unwrap().utility, -1.0);
    }

    #[test]
    fn strict_operator_at_boundary() {
        let reg = SloRegistry::standard();
        let lt = SloRequirement::new(&reg, "Monthly_bandwidth_cost", Operator::Lt, SloValue::scalar(20.0), "$").unwrap();
        assert_eq!(slo_utility(20.0, &lt).unwrap().utility, -1.0);
        assert!(slo_utility(19.0, &lt).unwrap().utility > 0.0);
    }

    #[test]
    fn interval_margin_is_zero_inside() {
        let reg = SloRegistry::standard();
        let r = SloRequirement::new(&reg, "Response_Time", Operator::In, SloValue::Interval { lower: 5.0, upper: 10.0 }, "s").unwrap();
        assert_eq!(slo_utility(7.0, &r).unwrap().utility, 0.0);
        assert_eq!(slo_utility(11.0, &r).unwrap().margin, Some(-1.0));
        assert_eq!(slo_utility(11.0, &r).unwrap().utility, -1.0);
    }

    #[test]
    fn categorical_is_a_precondition_violation() {
        let reg = SloRegistry::standard();
        let r = SloRequirement::new(&reg, "Memory_Size", Operator::Geq, SloValue::Categorical { label: crate::model::Category::Low }, "GB")
            .unwrap();
        assert!(matches!(slo_utility(1.0, &r), Err(SelectError::UnresolvedCategory { .. })));
    }

    #[test]
    fn relative_scale() {
        let cost = SloRequirement::new(&SloRegistry::standard(), "Monthly_bandwidth_cost", Operator::Leq, SloValue::scalar(200.0), "$")
            .unwrap();
        let o = Some(100.0);
        let raw = slo_utility_scaled(o, &cost, MarginScale::Raw).unwrap().utility;
        let rel = slo_utility_scaled(o, &cost, MarginScale::Relative).unwrap().utility;
        assert_eq!(raw, 1.0 - (-100.0f64).exp());
        assert_eq!(rel, 1.0 - (-0.5f64).exp());
    }

    fn offering(slos: &[(&str, f64)]) -> ServiceOffering {
        ServiceOffering {
            provider: "P".into(),
            service_id: "s".into(),
            region: "r".into(),
            serves_type: "database".into(),
            egress_price_per_gb: 0.1,
            offered_slos: slos.iter().map(|(n, v)| (n.to_string(), OfferedValue { value: *v, unit: String::new() })).collect(),
            source: None,
        }
    }

    fn listing_component() -> ComponentSpec {
        let reg = SloRegistry::standard();
        ComponentSpec::new(
            "database",
            vec![
                SloRequirement::new(&reg, "Monthly_uptime_percentage", Operator::Geq, SloValue::scalar(0.9999), "").unwrap(),
                SloRequirement::new(&reg, "Monthly_egress_bandwidth", Operator::Leq, SloValue::scalar(2000.0), "GB").unwrap(),
            ],
        )
    }

    #[test]
    fn exact_offering_totals_zero() {
        let o = offering(&[("Monthly_uptime_percentage", 0.9999), ("Monthly_egress_bandwidth", 2000.0)]);
        let s = service_utility(&o, &listing_component()).unwrap();
        assert_eq!(s.total, 0.0);
        assert!(s.feasible);
    }

    #[test]
    fn one_margin_only() {
        // oracle: sum of two independent evaluations of 1 - e^(r - o)
        let m = 0.00005;
        let o = offering(&[("Monthly_uptime_percentage", 0.9999 + m), ("Monthly_egress_bandwidth", 2000.0)]);
        let s = service_utility(&o, &listing_component()).unwrap();
        let expected = (1.0 - (0.9999f64 - (0.9999 + m)).exp()) + (1.0 - (2000.0f64 - 2000.0).exp());
        assert!((s.total - expected).abs() < 1e-15);
    }

    #[test]
    fn missing_slo_is_infeasible() {
        let reg = SloRegistry::standard();
        let case1 = ComponentSpec::new(
            "database",
            [
                ("Monthly_uptime_percentage", 0.99),
                ("Monthly_consistency_percentage", 0.9999),
                ("Monthly_latency_attainment_percentage", 0.9999),
                ("Monthly_throughput_percentage", 0.9999),
            ]
            .iter()
            .map(|(n, v)| SloRequirement::new(&reg, n, Operator::Geq, SloValue::scalar(*v), "").unwrap())
            .collect(),
        );
        let o = offering(&[
            ("Monthly_uptime_percentage", 0.9999),
            ("Monthly_latency_attainment_percentage", 0.9999),
            ("Monthly_throughput_percentage", 0.9999),
        ]);
        let s = service_utility(&o, &case1).unwrap();
        assert!(s.total < 0.0);
        assert!(!s.feasible);
        assert_eq!(s.slo_utilities[1].offered, None);
    }

    proptest! {
        #[test]
        fn utility_is_bounded_and_increasing(a in 0f64..50.0, b in 0f64..50.0) {
            let r = 1.0;
            let ua = slo_utility(r + a, &geq(r)).unwrap().utility;
            let ub = slo_utility(r + b, &geq(r)).unwrap().utility;
            prop_assert!((0.0..=1.0).contains(&ua));
            if a < b {
                prop_assert!(ua <= ub);
            }
        }

        #[test]
        fn margin_sign_matches_satisfaction(o in -10f64..10.0, r in -10f64..10.0, op in 0usize..5) {
            let reg = SloRegistry::standard();
            let req = SloRequirement::new(&reg, "Memory_Size", Operator::ALL[op], SloValue::scalar(r), "GB").unwrap();
            let u = slo_utility(o, &req).unwrap();
            prop_assert_eq!(u.utility >= 0.0, satisfies(o, &req));
            if u.utility >= 0.0 {
                prop_assert!(u.margin.unwrap() >= 0.0);
            }
            let sat_with_nonneg = satisfies(o, &req) && u.margin.unwrap() >= 0.0;
            prop_assert_eq!(sat_with_nonneg, satisfies(o, &req));
        }
    }
}
