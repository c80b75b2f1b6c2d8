use super::*;
use crate::catalog::OfferedValue;
use crate::model::{Operator, SloRegistry, SloValue};
use crate::parser::{parse_slo, ComponentSpec};

const CATALOG: &str = include_str!("../../../../fixtures/catalog.json");
const CASE1: &str = include_str!("../../../../fixtures/case1.slo");
const CASE2: &str = include_str!("../../../../fixtures/case2.slo");
const CASE3: &str = include_str!("../../../../fixtures/case3.slo");

fn setup(doc: &str) -> (SloDocument, Catalog, SloRegistry) {
    let reg = SloRegistry::standard();
    let doc = parse_slo(doc, &reg).unwrap();
    let cat = Catalog::parse(CATALOG, "catalog.json", &reg).unwrap();
    (doc, cat, reg)
}

fn pick(plan: &SelectionPlan, component: &str) -> String {
    plan.combination.assignment[component].key().to_string()
}

#[test]
fn case1_single_database() {
    let (doc, cat, reg) = setup(CASE1);
    let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions::default()).unwrap();
    let plan = select(&p).unwrap();
    assert_eq!(pick(&plan, "database"), "Azure/cosmos-db/eastus");
    assert!(plan.combination.feasible);
}

#[test]
fn case2_tie_breaks_on_provider() {
    let (doc, cat, reg) = setup(CASE2);
    let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions::default()).unwrap();
    let plan = select(&p).unwrap();
    assert_eq!(pick(&plan, "database"), "AWS/dynamodb-global-tables/us-east-1");
    assert_eq!(pick(&plan, "solver"), "RackSpace/cloud-servers/dfw");
}

#[test]
fn case3_cost_constraint_changes_solver() {
    let (doc, cat, reg) = setup(CASE3);
    let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions::default()).unwrap();
    let plan = select(&p).unwrap();
    assert_eq!(pick(&plan, "database"), "AWS/dynamodb-global-tables/us-east-1");
    assert_eq!(pick(&plan, "solver"), "Google/compute-engine/us-central1");
    // 2 TB at $0.085/GB
    assert!((plan.combination.bandwidth_cost - 170.0).abs() < 1e-9);
    let cost = plan.combination.per_app_slo.iter().find(|a| a.slo_name == MONTHLY_BANDWIDTH_COST).unwrap();
    assert!((cost.margin.unwrap() - 5.0).abs() < 1e-9);
    assert!(plan.combination.feasible);
}

#[test]
fn unpruned_search_agrees() {
    for text in [CASE1, CASE2, CASE3] {
        let (doc, cat, reg) = setup(text);
        let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions::default()).unwrap();
        let a = select(&p).unwrap();
        let b = select_unpruned(&p).unwrap();
        assert_eq!(a.combination.assignment_keys(), b.combination.assignment_keys());
        assert_eq!(a.combination.total, b.combination.total);
        assert!(b.alternatives_considered >= a.alternatives_considered);
    }
}

#[test]
fn bandwidth_cost_matches_hand_computation() {
    let (doc, cat, _) = setup(CASE3);
    let ec2 = cat.get(&OfferingKey::new("AWS", "ec2", "us-east-1")).unwrap().clone();
    let db = cat.get(&OfferingKey::new("AWS", "dynamodb", "us-east-1")).unwrap().clone();
    let a = BTreeMap::from([("solver".to_string(), ec2), ("database".to_string(), db)]);
    let c = bandwidth_cost(&doc, &a);
    assert!((c.total - 2000.0 * 0.09).abs() < 1e-9);
    assert!(c.warnings.is_empty());
}

#[test]
fn application_slo_infeasible_is_reported() {
    let (mut doc, cat, reg) = setup(CASE3);
    doc.application_slos[1] = SloRequirement::new(&reg, MONTHLY_BANDWIDTH_COST, Operator::Leq, SloValue::scalar(10.0), "$").unwrap();
    let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions::default()).unwrap();
    match select(&p) {
        Err(SelectError::InfeasibleSelection { components, application_slos }) => {
            assert!(components.is_empty());
            assert_eq!(application_slos, vec![MONTHLY_BANDWIDTH_COST.to_string()]);
        }
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn component_infeasible_names_component() {
    let (mut doc, cat, reg) = setup(CASE1);
    let req = SloRequirement::new(&reg, "Monthly_uptime_percentage", Operator::Geq, SloValue::scalar(1.5), "").unwrap();
    doc.components.get_mut("database").unwrap().slos = vec![req];
    let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions::default()).unwrap();
    match select(&p) {
        Err(SelectError::InfeasibleSelection { components, .. }) => assert_eq!(components, vec!["database".to_string()]),
        other => panic!("expected infeasible, got {other:?}"),
    }
}

#[test]
fn budget_is_enforced() {
    let (doc, cat, reg) = setup(CASE3);
    let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions { budget: 3, ..Default::default() }).unwrap();
    assert!(matches!(select(&p), Err(SelectError::BudgetExceeded { budget: 3, .. })));
}

fn offering(provider: &str, id: &str, kind: &str, uptime: f64, price: f64) -> ServiceOffering {
    ServiceOffering {
        provider: provider.into(),
        service_id: id.into(),
        region: "r".into(),
        serves_type: kind.into(),
        egress_price_per_gb: price,
        offered_slos: BTreeMap::from([
            ("Monthly_uptime_percentage".to_string(), OfferedValue { value: uptime, unit: String::new() }),
            ("Response_Time".to_string(), OfferedValue { value: uptime * 0.01, unit: "s".into() }),
        ]),
        source: None,
    }
}

#[test]
fn application_aggregates_follow_registry() {
    let reg = SloRegistry::standard();
    let cat = Catalog::from_offerings(
        vec![offering("A", "x", "compute", 0.999, 0.1), offering("B", "y", "database", 0.9999, 0.2)],
        "test",
        "v1",
    )
    .unwrap();
    let up = |v: f64| SloRequirement::new(&reg, "Monthly_uptime_percentage", Operator::Geq, SloValue::scalar(v), "").unwrap();
    let mut doc = SloDocument::default();
    doc.components.insert("a".into(), ComponentSpec::new("compute", vec![up(0.9)]));
    doc.components.insert("b".into(), ComponentSpec::new("database", vec![up(0.9)]));
    doc.application_slos = vec![
        up(0.99),
        SloRequirement::new(&reg, "Response_Time", Operator::Leq, SloValue::scalar(100.0), "ms").unwrap(),
    ];
    let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions::default()).unwrap();
    let plan = select(&p).unwrap();
    let apps = &plan.combination.per_app_slo;
    // uptime: MIN of offered values
    assert_eq!(apps[0].aggregated_value, Some(0.999));
    // response time: MAX, in seconds
    assert!((apps[1].aggregated_value.unwrap() - 0.009999).abs() < 1e-12);
}

#[test]
fn selection_ignores_catalog_order() {
    let reg = SloRegistry::standard();
    let mut offs = vec![
        offering("B", "y", "compute", 0.999, 0.1),
        offering("A", "x", "compute", 0.999, 0.1),
        offering("C", "z", "compute", 0.99, 0.1),
    ];
    let up = SloRequirement::new(&reg, "Monthly_uptime_percentage", Operator::Geq, SloValue::scalar(0.9), "").unwrap();
    let mut doc = SloDocument::default();
    doc.components.insert("a".into(), ComponentSpec::new("compute", vec![up]));
    let mut seen = Vec::new();
    for _ in 0..3 {
        offs.rotate_left(1);
        let cat = Catalog::from_offerings(offs.clone(), "test", "v1").unwrap();
        let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions::default()).unwrap();
        seen.push(select(&p).unwrap().combination.assignment["a"].key().to_string());
    }
    assert!(seen.iter().all(|s| s == "A/x/r"), "{seen:?}");
}

#[test]
fn accuracy_bounds() {
    let (doc, cat, reg) = setup(CASE3);
    let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions::default()).unwrap();
    let best = select(&p).unwrap();
    assert_eq!(accuracy_of(&p, &best.combination.assignment_keys()).unwrap(), 1.0);

    let (lo, hi) = feasible_total_range(&p).unwrap().unwrap();
    assert_eq!(hi, best.combination.total);
    assert!(lo < hi);

    // A feasible but costlier solver lands strictly between 0 and 1.
    let mut alt = best.combination.assignment_keys();
    alt.insert("solver".into(), OfferingKey::new("Azure", "virtual-machines", "eastus"));
    let a = accuracy_of(&p, &alt).unwrap();
    assert!(a > 0.0 && a < 1.0, "{a}");

    // RackSpace breaks the cost SLO: infeasible scores 0.
    alt.insert("solver".into(), OfferingKey::new("RackSpace", "cloud-servers", "dfw"));
    assert_eq!(accuracy_of(&p, &alt).unwrap(), 0.0);
}

#[test]
fn plan_round_trips_through_json() {
    let (doc, cat, reg) = setup(CASE3);
    let p = SelectionProblem::new(&doc, &cat, &reg, SelectOptions::default()).unwrap();
    let plan = select(&p).unwrap();
    let text = serde_json::to_string(&plan).unwrap();
    assert!(text.contains("\"elapsed_ms\""));
    let back: SelectionPlan = serde_json::from_str(&text).unwrap();
    assert_eq!(back.combination, plan.combination);
}
