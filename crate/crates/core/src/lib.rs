//! Equilibrium solver for a two-period "coopetition" market.
//!
//! An incumbent sells a model-based service alone in period 1, choosing a
//! price that trades early sales against the residual market it leaves for
//! period 2. An entrant then arrives; the two companies decide whether to
//! train a shared model together (which lifts both service qualities) and
//! compete on price for the buyers who have not purchased yet. Buyers sit on
//! the unit interval between the two companies and weigh quality, price, and
//! their distance to the seller.
//!
//! The crate solves the whole game backward: Nash prices by best-response
//! iteration ([`price_game`]), the collaborate-or-not decision anticipating
//! those prices ([`collab`]), and the incumbent's period-1 price by a
//! three-region concave decomposition ([`period1`]). Every solver answer can
//! be cross-checked against brute-force grid enumeration ([`oracle`]), and
//! [`scenario`]/[`sweep`] handle configuration files, accuracy fixtures, and
//! batch reproduction reports.

pub mod collab;
pub mod dist;
mod error;
pub mod market;
pub mod oracle;
pub mod period1;
pub mod price_game;
mod quad;
pub mod scenario;
pub mod sweep;

pub use collab::{
    choose_collaboration, collaboration_equilibrium, CollaborationOutcome, EquilibriumCache,
    ProfileEquilibrium,
};
pub use dist::{DistributionKind, HazardReport, PreferenceDistribution};
pub use error::{Error, Result};
pub use market::{
    CollaborationProfile, Company, DemandSegments, MarketParams, PriceProfile, ProfitBreakdown,
    PurchaseDecision, QualityProfile, Segment,
};
pub use oracle::{GridEquilibrium, GridNashPoint, GridPeriod1Optimum, OracleVerdict};
pub use period1::{Period1Solution, RegionLabel, RegionOptimum, RegionSpec};
pub use price_game::{BestResponse, PriceEquilibrium, SolverSettings, UnimodalityReport};
pub use scenario::{
    load_accuracy_fixtures, load_scenario, load_sweep_base, save_scenario, scenario_from_fixture,
    AccuracyFixture, ReferenceExpectations, Scenario, ScenarioMetadata, SweepBase,
};
pub use sweep::{
    load_expected_collaboration, run_sweep, solve_scenario, write_collaboration_csv, write_json,
    write_pricing_csv, EquilibriumReport, ExpectedCollaboration, ReferenceComparison, SolveReport,
    SweepCell, SweepReport,
};
