//! SLO-driven cloud service selection.
//!
//! The pipeline: parse and validate an `.slo` document ([`parser`]), load a
//! catalog of provider offerings ([`catalog`]), pick the utility-maximizing
//! feasible assignment of offerings to components ([`selector`]), and emit
//! Terraform HCL for it ([`codegen`]). [`workload`] and [`bench`] generate
//! synthetic applications and time each phase.

pub mod bench;
pub mod catalog;
pub mod codegen;
pub mod model;
pub mod parser;
pub mod selector;
pub mod workload;

pub use catalog::{load_catalog, Catalog, CatalogError, OfferingKey, ServiceOffering};
pub use codegen::{dry_run_deploy, generate_hcl, CodegenError, DeployReport, DeploymentArtifact, TemplateSet};
pub use model::{Operator, SloRegistry, SloRequirement, SloValue};
pub use parser::{parse_slo, validate_text, SloDocument, TopologyModel, ValidationReport};
pub use selector::{select, select_unpruned, SelectError, SelectOptions, SelectionPlan, SelectionProblem};
pub use workload::{generate_workload, Connectivity, SyntheticWorkload};
