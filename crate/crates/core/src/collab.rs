//! Period-2 collaboration game: whether both companies adopt the shared
//! model, each anticipating the price equilibrium its choice induces.
//!
//! Only the two symmetric profiles need pricing. A unilateral decline stops
//! the joint training, so the mixed profiles induce exactly the standalone
//! outcome and are recorded as aliases of it.

use serde::{Deserialize, Serialize};

use crate::dist::PreferenceDistribution;
use crate::error::{Error, Result};
use crate::market::{CollaborationProfile, MarketParams, QualityProfile};
use crate::price_game::{price_equilibrium, PriceEquilibrium, SolverSettings};

/// Collaborate iff both companies earn at least as much under the shared
/// model as under local models. Ties collaborate.
pub fn choose_collaboration(federated_profits: (f64, f64), standalone_profits: (f64, f64)) -> bool {
    federated_profits.0 >= standalone_profits.0 && federated_profits.1 >= standalone_profits.1
}

/// Price equilibrium induced by one collaboration profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProfileEquilibrium {
    pub profile: CollaborationProfile,
    pub quality2: (f64, f64),
    pub equilibrium: PriceEquilibrium,
}

/// Resolved collaboration game: both profiles priced, the stable profile
/// chosen, and which side of the comparison bound the decision.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollaborationOutcome {
    pub chosen: CollaborationProfile,
    pub federated: ProfileEquilibrium,
    pub standalone: ProfileEquilibrium,
    pub incumbent_prefers_federated: bool,
    pub entrant_prefers_federated: bool,
}

impl CollaborationOutcome {
    pub fn collaborate(&self) -> bool {
        self.chosen.effective()
    }

    /// Equilibrium induced by an arbitrary profile. The mixed profiles alias
    /// the standalone outcome: joint training ceases when either side
    /// declines.
    pub fn profile_equilibrium(&self, profile: CollaborationProfile) -> &ProfileEquilibrium {
        if profile.effective() {
            &self.federated
        } else {
            &self.standalone
        }
    }

    pub fn chosen_equilibrium(&self) -> &ProfileEquilibrium {
        self.profile_equilibrium(self.chosen)
    }
}

/// Warm-start prices per profile, carried across nearby evaluations of the
/// same scenario (the period-1 ascent re-solves both profiles at every
/// candidate price).
#[derive(Clone, Copy, Debug, Default)]
pub struct EquilibriumCache {
    pub federated: Option<(f64, f64)>,
    pub standalone: Option<(f64, f64)>,
}

fn tag_profile(err: Error, profile: &'static str) -> Error {
    match err {
        Error::NonConvergence {
            iterations,
            residual,
            trajectory,
            ..
        } => Error::NonConvergence {
            profile,
            iterations,
            residual,
            trajectory,
        },
        other => other,
    }
}

/// Solves the collaboration game at a fixed period-1 threshold: prices both
/// profiles, then keeps the shared model iff neither company loses by it.
pub fn collaboration_equilibrium(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    qualities: &QualityProfile,
    threshold: f64,
    settings: &SolverSettings,
    cache: &mut EquilibriumCache,
) -> Result<CollaborationOutcome> {
    let federated_eq = price_equilibrium(
        params,
        dist,
        qualities.federated,
        threshold,
        settings,
        cache.federated,
    )
    .map_err(|e| tag_profile(e, "federated"))?;
    cache.federated = Some((federated_eq.incumbent_price, federated_eq.entrant_price));

    let standalone_eq = if qualities.local == qualities.federated {
        federated_eq.clone()
    } else {
        let eq = price_equilibrium(
            params,
            dist,
            qualities.local,
            threshold,
            settings,
            cache.standalone,
        )
        .map_err(|e| tag_profile(e, "standalone"))?;
        cache.standalone = Some((eq.incumbent_price, eq.entrant_price));
        eq
    };

    let incumbent_prefers_federated =
        federated_eq.incumbent_profit >= standalone_eq.incumbent_profit;
    let entrant_prefers_federated = federated_eq.entrant_profit >= standalone_eq.entrant_profit;
    let chosen = if incumbent_prefers_federated && entrant_prefers_federated {
        CollaborationProfile::BOTH
    } else {
        CollaborationProfile::NEITHER
    };

    Ok(CollaborationOutcome {
        chosen,
        federated: ProfileEquilibrium {
            profile: CollaborationProfile::BOTH,
            quality2: qualities.federated,
            equilibrium: federated_eq,
        },
        standalone: ProfileEquilibrium {
            profile: CollaborationProfile::NEITHER,
            quality2: qualities.local,
            equilibrium: standalone_eq,
        },
        incumbent_prefers_federated,
        entrant_prefers_federated,
    })
}
