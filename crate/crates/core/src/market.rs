//! The demand model: buyer payoffs, the period-1 purchase threshold, the
//! period-2 served segments with residual-market exclusion, and the three
//! profit functionals.
//!
//! A buyer at location `x` gets `w_q*q - w_phi*x - w_p*p` from the incumbent
//! and `w_q*q - w_phi*(1-x) - w_p*p` from the entrant, or zero from not
//! buying. Everyone buys at most once: period-1 buyers (locations up to the
//! threshold) leave the market, and period 2 is fought over the residual
//! `(threshold, 1]`.

use serde::{Deserialize, Serialize};

use crate::dist::PreferenceDistribution;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Company {
    Incumbent,
    Entrant,
}

impl Company {
    pub fn other(self) -> Company {
        match self {
            Company::Incumbent => Company::Entrant,
            Company::Entrant => Company::Incumbent,
        }
    }
}

impl std::fmt::Display for Company {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Company::Incumbent => write!(f, "incumbent"),
            Company::Entrant => write!(f, "entrant"),
        }
    }
}

/// Utility weights and marginal service costs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Utility per unit of service quality.
    pub quality_weight: f64,
    /// Disutility per unit of price.
    pub price_weight: f64,
    /// Disutility per unit of preference misalignment (distance).
    #[serde(default = "one")]
    pub misalignment_weight: f64,
    /// Incumbent marginal cost per sale.
    pub incumbent_cost: f64,
    /// Entrant marginal cost per sale.
    pub entrant_cost: f64,
}

fn one() -> f64 {
    1.0
}

impl MarketParams {
    /// Unit weights, zero costs.
    pub fn unit() -> Self {
        MarketParams {
            quality_weight: 1.0,
            price_weight: 1.0,
            misalignment_weight: 1.0,
            incumbent_cost: 0.0,
            entrant_cost: 0.0,
        }
    }

    pub fn cost(&self, company: Company) -> f64 {
        match company {
            Company::Incumbent => self.incumbent_cost,
            Company::Entrant => self.entrant_cost,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("params.quality_weight", self.quality_weight),
            ("params.price_weight", self.price_weight),
            ("params.misalignment_weight", self.misalignment_weight),
        ];
        for (field, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(field, "must be positive"));
            }
        }
        let nonneg = [
            ("params.incumbent_cost", self.incumbent_cost),
            ("params.entrant_cost", self.entrant_cost),
        ];
        for (field, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(field, "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Service qualities per period and collaboration outcome, on fraction scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityProfile {
    /// Incumbent quality in period 1.
    pub period1_incumbent: f64,
    /// `(incumbent, entrant)` period-2 qualities without collaboration.
    pub local: (f64, f64),
    /// `(incumbent, entrant)` period-2 qualities under the shared model.
    pub federated: (f64, f64),
}

impl QualityProfile {
    /// Period-2 quality pair for the effective collaboration outcome. Mixed
    /// declines fall back to local models, so only the effective flag
    /// matters.
    pub fn period2(&self, collaborate: bool) -> (f64, f64) {
        if collaborate {
            self.federated
        } else {
            self.local
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("qualities.period1_incumbent", self.period1_incumbent),
            ("qualities.local[incumbent]", self.local.0),
            ("qualities.local[entrant]", self.local.1),
            ("qualities.federated[incumbent]", self.federated.0),
            ("qualities.federated[entrant]", self.federated.1),
        ];
        for (field, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(field, "must be non-negative"));
            }
        }
        Ok(())
    }
}

/// Per-company collaboration flags. Collaboration is effective only when
/// both agree; a unilateral decline leaves both on local models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollaborationProfile {
    pub incumbent: bool,
    pub entrant: bool,
}

impl CollaborationProfile {
    pub const BOTH: CollaborationProfile = CollaborationProfile {
        incumbent: true,
        entrant: true,
    };
    pub const NEITHER: CollaborationProfile = CollaborationProfile {
        incumbent: false,
        entrant: false,
    };

    pub fn effective(&self) -> bool {
        self.incumbent && self.entrant
    }
}

/// The three prices of a full strategy: period-1 incumbent price and the two
/// period-2 prices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceProfile {
    pub period1: f64,
    pub incumbent2: f64,
    pub entrant2: f64,
}

/// What a buyer at a given location does in a given period.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PurchaseDecision {
    Abstain,
    Incumbent,
    Entrant,
}

/// A sub-interval of `[0, 1]`; empty when `hi <= lo`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
}

impl Segment {
    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

/// Served segments in period 2 plus the period-1 threshold that defines the
/// residual market.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DemandSegments {
    /// Period-1 purchase threshold: locations up to here bought in period 1.
    pub threshold: f64,
    pub incumbent: Segment,
    pub entrant: Segment,
    pub incumbent_mass: f64,
    pub entrant_mass: f64,
}

/// Per-period profits. The incumbent's total is the sum of its two periods.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfitBreakdown {
    pub period1_incumbent: f64,
    pub period2_incumbent: f64,
    pub period2_entrant: f64,
}

impl ProfitBreakdown {
    pub fn incumbent_total(&self) -> f64 {
        self.period1_incumbent + self.period2_incumbent
    }
}

/// A buyer's payoff from `decision`, given the chosen seller's quality and
/// price. Zero when abstaining.
pub fn user_payoff(
    params: &MarketParams,
    quality: f64,
    location: f64,
    decision: PurchaseDecision,
    price: f64,
) -> f64 {
    match decision {
        PurchaseDecision::Abstain => 0.0,
        PurchaseDecision::Incumbent => {
            params.quality_weight * quality
                - params.misalignment_weight * location
                - params.price_weight * price
        }
        PurchaseDecision::Entrant => {
            params.quality_weight * quality
                - params.misalignment_weight * (1.0 - location)
                - params.price_weight * price
        }
    }
}

/// Period-1 purchase threshold: buyers at locations up to the returned value
/// (weakly) prefer buying from the incumbent over abstaining.
pub fn period1_threshold(params: &MarketParams, quality1: f64, price1: f64) -> f64 {
    let raw = (params.quality_weight * quality1 - params.price_weight * price1)
        / params.misalignment_weight;
    raw.clamp(0.0, 1.0)
}

/// Quality/price attractiveness of a seller, normalized by the misalignment
/// weight so it lives on the location scale.
fn net_value(params: &MarketParams, quality: f64, price: f64) -> f64 {
    (params.quality_weight * quality - params.price_weight * price) / params.misalignment_weight
}

/// Location where a period-2 buyer is indifferent between the two sellers.
pub fn indifference_point(params: &MarketParams, quality2: (f64, f64), price2: (f64, f64)) -> f64 {
    let net_i = net_value(params, quality2.0, price2.0);
    let net_e = net_value(params, quality2.1, price2.1);
    0.5 * (1.0 + net_i - net_e)
}

/// Period-2 served segments given the period-1 threshold.
///
/// The incumbent serves `[0, min(net_i, indifference)]` and the entrant
/// `[max(1-net_e, indifference), 1]`, each clamped to `[0, 1]` and then
/// intersected with the residual market above `threshold`. The same clamped
/// expressions cover the case where the entrant is the more attractive
/// seller, so no role-swapped branch is needed; ties go to the incumbent and
/// an indifferent buyer buys.
pub fn period2_segments(
    params: &MarketParams,
    quality2: (f64, f64),
    price2: (f64, f64),
    threshold: f64,
    dist: &PreferenceDistribution,
) -> DemandSegments {
    let net_i = net_value(params, quality2.0, price2.0);
    let net_e = net_value(params, quality2.1, price2.1);
    let indiff = 0.5 * (1.0 + net_i - net_e);

    let upper_i = net_i.min(indiff).clamp(0.0, 1.0);
    let lower_e = (1.0 - net_e).max(indiff).clamp(0.0, 1.0);

    let incumbent = Segment {
        lo: threshold.min(upper_i),
        hi: upper_i,
    };
    let entrant = Segment {
        lo: lower_e.max(threshold),
        hi: 1.0,
    };

    DemandSegments {
        threshold,
        incumbent,
        entrant,
        incumbent_mass: dist.mass(threshold.max(incumbent.lo), incumbent.hi),
        entrant_mass: dist.mass(entrant.lo, entrant.hi),
    }
}

/// Period-2 profits `(incumbent, entrant)` at the given prices and residual
/// market. This is the hot path shared by the solvers and the grid oracle.
pub fn period2_profits(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    quality2: (f64, f64),
    price2: (f64, f64),
    threshold: f64,
) -> (f64, f64) {
    let segments = period2_segments(params, quality2, price2, threshold, dist);
    (
        (price2.0 - params.incumbent_cost) * segments.incumbent_mass,
        (price2.1 - params.entrant_cost) * segments.entrant_mass,
    )
}

/// Full profit breakdown for a strategy state. Period-2 qualities come from
/// the federated pair when collaboration is effective, otherwise the local
/// pair.
pub fn profits(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    qualities: &QualityProfile,
    collaboration: &CollaborationProfile,
    prices: &PriceProfile,
) -> ProfitBreakdown {
    let threshold = period1_threshold(params, qualities.period1_incumbent, prices.period1);
    let period1_incumbent = (prices.period1 - params.incumbent_cost) * dist.mass(0.0, threshold);
    let quality2 = qualities.period2(collaboration.effective());
    let (period2_incumbent, period2_entrant) = period2_profits(
        params,
        dist,
        quality2,
        (prices.incumbent2, prices.entrant2),
        threshold,
    );
    ProfitBreakdown {
        period1_incumbent,
        period2_incumbent,
        period2_entrant,
    }
}
