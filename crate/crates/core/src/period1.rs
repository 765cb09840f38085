//! The incumbent's period-1 pricing.
//!
//! Total profit is not concave in the period-1 price, but it is single-peaked
//! on each of three intervals split by where the purchase threshold
//! saturates: prices low enough that everyone buys, the interior range, and
//! prices past the zero-demand corner (where profit no longer depends on the
//! price at all). Each interval is optimized by projected gradient ascent on
//! a finite-difference gradient, and the regional optima are compared for the
//! global answer. The gradient has no closed form because every evaluation
//! re-solves the period-2 collaboration and price equilibria at the induced
//! threshold.

use serde::{Deserialize, Serialize};

use crate::collab::{collaboration_equilibrium, CollaborationOutcome, EquilibriumCache};
use crate::dist::PreferenceDistribution;
use crate::error::{Error, Result};
use crate::market::{self, MarketParams, QualityProfile};
use crate::price_game::SolverSettings;

/// Central-difference step for the ascent gradient.
const FD_STEP: f64 = 1e-4;
/// Ascent stops once an accepted move is shorter than this.
const REGION_TOLERANCE: f64 = 1e-6;
/// Step-size floor; reaching it means no improving move at resolution.
const STEP_FLOOR: f64 = 1e-7;
/// Initial step as a fraction of the region width.
const INITIAL_STEP_FRACTION: f64 = 0.05;
const MAX_ASCENT_ITERATIONS: usize = 200;
/// Coarse scan that seeds the ascent inside a region.
const PRESCAN_POINTS: usize = 33;
/// Finite stand-in width for the unbounded zero-demand region.
const NO_SALES_SURROGATE_WIDTH: f64 = 1.0;

/// The three intervals of the period-1 price axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionLabel {
    /// Threshold saturated at 1: every buyer purchases in period 1.
    FullMarket,
    /// Interior threshold: the price trades period-1 volume against the
    /// period-2 residual market.
    PartialMarket,
    /// Past the corner: nobody buys in period 1 and profit is constant in
    /// the price.
    NoPeriod1Sales,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionLabel::FullMarket => write!(f, "full-market"),
            RegionLabel::PartialMarket => write!(f, "partial-market"),
            RegionLabel::NoPeriod1Sales => write!(f, "no-period1-sales"),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RegionSpec {
    pub label: RegionLabel,
    pub lo: f64,
    /// For the unbounded region this is a finite surrogate; the objective is
    /// constant there and only `lo` is evaluated.
    pub hi: f64,
    pub empty: bool,
}

impl RegionSpec {
    pub fn width(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

/// Splits the period-1 price axis at the points where the purchase threshold
/// saturates: full coverage up to `(w_q*q1 - w_phi)/w_p` (empty when that is
/// not positive), the interior up to `w_q*q1/w_p`, and the zero-demand tail
/// beyond.
pub fn region_bounds(params: &MarketParams, quality1: f64) -> [RegionSpec; 3] {
    let full_hi =
        (params.quality_weight * quality1 - params.misalignment_weight) / params.price_weight;
    let corner = params.quality_weight * quality1 / params.price_weight;
    [
        RegionSpec {
            label: RegionLabel::FullMarket,
            lo: 0.0,
            hi: full_hi.max(0.0),
            empty: full_hi <= 0.0,
        },
        RegionSpec {
            label: RegionLabel::PartialMarket,
            lo: full_hi.max(0.0),
            hi: corner,
            empty: false,
        },
        RegionSpec {
            label: RegionLabel::NoPeriod1Sales,
            lo: corner,
            hi: corner + NO_SALES_SURROGATE_WIDTH,
            empty: false,
        },
    ]
}

/// Two-period incumbent profit at one period-1 price, with the equilibria it
/// induces.
#[derive(Clone, Debug)]
pub struct ProfitEvaluation {
    pub total: f64,
    pub period1: f64,
    pub threshold: f64,
    pub collaboration: CollaborationOutcome,
}

/// Evaluates the incumbent's total profit at `price1`, re-solving the
/// period-2 collaboration and price equilibria at the induced threshold.
/// `cache` warm-starts those solves from the previous evaluation.
pub fn total_profit(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    qualities: &QualityProfile,
    price1: f64,
    settings: &SolverSettings,
    cache: &mut EquilibriumCache,
) -> Result<ProfitEvaluation> {
    let threshold = market::period1_threshold(params, qualities.period1_incumbent, price1);
    let collaboration =
        collaboration_equilibrium(params, dist, qualities, threshold, settings, cache)?;
    let period1 = (price1 - params.incumbent_cost) * dist.mass(0.0, threshold);
    let total = period1
        + collaboration
            .chosen_equilibrium()
            .equilibrium
            .incumbent_profit;
    Ok(ProfitEvaluation {
        total,
        period1,
        threshold,
        collaboration,
    })
}

/// One region's optimum and the ascent that found it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegionOptimum {
    pub region: RegionSpec,
    pub price: f64,
    pub total_profit: f64,
    pub iterations: usize,
    /// False only when the iteration cap was hit; the best iterate is still
    /// returned.
    pub converged: bool,
    /// Accepted `(price, profit)` iterates, for diagnostics.
    pub trajectory: Vec<(f64, f64)>,
}

/// Projected gradient ascent inside one region: coarse pre-scan for the
/// start, central finite-difference gradient, fixed step halved on
/// non-improvement, projection onto the interval. The zero-demand region is
/// evaluated once at its left endpoint, where the objective is constant.
pub fn optimize_region(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    qualities: &QualityProfile,
    region: &RegionSpec,
    settings: &SolverSettings,
) -> Result<RegionOptimum> {
    if region.empty {
        return Err(Error::validation(
            "region",
            format!("{} region is empty", region.label),
        ));
    }
    let mut cache = EquilibriumCache::default();
    let width = region.width();

    if region.label == RegionLabel::NoPeriod1Sales || width <= REGION_TOLERANCE {
        let eval = total_profit(params, dist, qualities, region.lo, settings, &mut cache)?;
        return Ok(RegionOptimum {
            region: *region,
            price: region.lo,
            total_profit: eval.total,
            iterations: 0,
            converged: true,
            trajectory: vec![(region.lo, eval.total)],
        });
    }

    let evaluate = |p: f64, cache: &mut EquilibriumCache| -> Result<f64> {
        Ok(total_profit(params, dist, qualities, p, settings, cache)?.total)
    };

    let mut price = region.lo;
    let mut value = f64::NEG_INFINITY;
    for k in 0..PRESCAN_POINTS {
        let p = region.lo + width * k as f64 / (PRESCAN_POINTS - 1) as f64;
        let v = evaluate(p, &mut cache)?;
        if v > value {
            value = v;
            price = p;
        }
    }

    let mut trajectory = vec![(price, value)];
    let mut step = INITIAL_STEP_FRACTION * width;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ASCENT_ITERATIONS {
        iterations += 1;
        let up = (price + FD_STEP).min(region.hi);
        let down = (price - FD_STEP).max(region.lo);
        let gap = up - down;
        if gap <= 0.0 {
            converged = true;
            break;
        }
        let gradient = (evaluate(up, &mut cache)? - evaluate(down, &mut cache)?) / gap;
        let candidate = (price + step * gradient).clamp(region.lo, region.hi);
        let candidate_value = evaluate(candidate, &mut cache)?;
        if candidate_value > value + 1e-15 {
            let moved = (candidate - price).abs();
            price = candidate;
            value = candidate_value;
            trajectory.push((price, value));
            if moved < REGION_TOLERANCE {
                converged = true;
                break;
            }
        } else {
            step *= 0.5;
            if step < STEP_FLOOR {
                converged = true;
                break;
            }
        }
    }

    Ok(RegionOptimum {
        region: *region,
        price,
        total_profit: value,
        iterations,
        converged,
        trajectory,
    })
}

/// The global period-1 solution: regional optima compared, equilibria
/// recomputed cleanly at the winner.
#[derive(Clone, Debug)]
pub struct Period1Solution {
    pub price: f64,
    pub total_profit: f64,
    pub period1_profit: f64,
    pub threshold: f64,
    pub regions: Vec<RegionOptimum>,
    pub collaboration: CollaborationOutcome,
}

/// Optimizes each non-empty region and returns the best. Fails only if every
/// region evaluation fails.
pub fn optimize(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    qualities: &QualityProfile,
    settings: &SolverSettings,
) -> Result<Period1Solution> {
    let mut optima = Vec::new();
    let mut last_error = None;
    for region in region_bounds(params, qualities.period1_incumbent) {
        if region.empty {
            continue;
        }
        match optimize_region(params, dist, qualities, &region, settings) {
            Ok(opt) => optima.push(opt),
            Err(e) => last_error = Some(e),
        }
    }
    let Some(best) = optima.iter().reduce(|a, b| {
        if b.total_profit > a.total_profit {
            b
        } else {
            a
        }
    }) else {
        return Err(last_error
            .unwrap_or_else(|| Error::validation("regions", "no region could be evaluated")));
    };

    let best_price = best.price;
    let eval = total_profit(
        params,
        dist,
        qualities,
        best_price,
        settings,
        &mut EquilibriumCache::default(),
    )?;
    Ok(Period1Solution {
        price: best_price,
        total_profit: eval.total,
        period1_profit: eval.period1,
        threshold: eval.threshold,
        regions: optima,
        collaboration: eval.collaboration,
    })
}
