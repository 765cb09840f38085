//! Independent brute-force verification: grid-based equilibrium and optimum
//! computation used as ground truth for the iterative solvers.
//!
//! Everything here evaluates profits through [`crate::market`] only. The
//! line-search and gradient-ascent machinery in `price_game` and `period1`
//! is never called, so agreement between the two routes is a genuine
//! cross-check. The one shared piece of game logic is the collaboration
//! decision rule, a two-line comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collab::choose_collaboration;
use crate::dist::PreferenceDistribution;
use crate::error::{Error, Result};
use crate::market::{self, Company, MarketParams, QualityProfile};

/// Grid ties and "improvement over zero" checks use this epsilon.
const NE_EPS: f64 = 1e-12;

/// At most this many Nash grid points are materialized; the rest are counted.
const NASH_POINT_CAP: usize = 128;

/// Iteration cap for the discrete best-response fixed point.
const GRID_BR_MAX_ITERS: usize = 256;

/// Outcome of a no-profitable-deviation scan.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub passed: bool,
    /// Largest profit improvement any unilateral grid deviation achieved.
    pub worst_deviation: f64,
    pub worst_company: Option<Company>,
    /// The deviating price achieving the worst improvement.
    pub worst_price: Option<f64>,
    pub grid_n: usize,
    pub tolerance: f64,
}

/// One company's period-2 profit at the given own price.
fn own_profit(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    quality2: (f64, f64),
    own: Company,
    own_price: f64,
    other_price: f64,
    threshold: f64,
) -> f64 {
    let prices = match own {
        Company::Incumbent => (own_price, other_price),
        Company::Entrant => (other_price, own_price),
    };
    let (incumbent, entrant) = market::period2_profits(params, dist, quality2, prices, threshold);
    match own {
        Company::Incumbent => incumbent,
        Company::Entrant => entrant,
    }
}

fn price_grid(params: &MarketParams, quality2: f64, company: Company, n: usize) -> Vec<f64> {
    let lo = params.cost(company);
    let hi = params.quality_weight * quality2 / params.price_weight;
    if hi <= lo {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

/// Checks that no unilateral grid deviation from `candidate` improves either
/// company's profit by more than `tol`.
pub fn verify_no_deviation(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    quality2: (f64, f64),
    threshold: f64,
    candidate: (f64, f64),
    grid_n: usize,
    tol: f64,
) -> OracleVerdict {
    let mut worst = 0.0_f64;
    let mut worst_company = None;
    let mut worst_price = None;
    for company in [Company::Incumbent, Company::Entrant] {
        let (own_quality, own_price, other_price) = match company {
            Company::Incumbent => (quality2.0, candidate.0, candidate.1),
            Company::Entrant => (quality2.1, candidate.1, candidate.0),
        };
        let base = own_profit(
            params,
            dist,
            quality2,
            company,
            own_price,
            other_price,
            threshold,
        );
        for &p in &price_grid(params, own_quality, company, grid_n) {
            let improvement =
                own_profit(params, dist, quality2, company, p, other_price, threshold) - base;
            if improvement > worst {
                worst = improvement;
                worst_company = Some(company);
                worst_price = Some(p);
            }
        }
    }
    OracleVerdict {
        passed: worst <= tol,
        worst_deviation: worst,
        worst_company,
        worst_price,
        grid_n,
        tolerance: tol,
    }
}

/// A price pair on the grid from which neither company has an improving grid
/// deviation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridNashPoint {
    pub incumbent_price: f64,
    pub entrant_price: f64,
    pub incumbent_profit: f64,
    pub entrant_profit: f64,
}

/// Exhaustive-enumeration equilibrium set of the period-2 price game.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridEquilibrium {
    pub grid_n: usize,
    /// Up to [`NASH_POINT_CAP`] equilibrium points in row-major grid order.
    pub nash_points: Vec<GridNashPoint>,
    pub nash_count: usize,
    /// Equilibrium with the largest combined profit (first in grid order on
    /// ties); `None` when the set is empty.
    pub representative: Option<GridNashPoint>,
    /// The whole grid earns (essentially) zero profit, so every point is
    /// trivially stable.
    pub degenerate: bool,
}

/// Enumerates all grid price pairs and returns those where neither company
/// has an improving grid deviation (within `1e-12`). An empty set is a
/// legitimate verdict. Profits are evaluated through the market module only.
pub fn grid_price_equilibrium(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    quality2: (f64, f64),
    threshold: f64,
    grid_n: usize,
) -> Result<GridEquilibrium> {
    if grid_n < 100 {
        return Err(Error::validation("grid_n", "must be at least 100"));
    }
    let grid_i = price_grid(params, quality2.0, Company::Incumbent, grid_n);
    let grid_e = price_grid(params, quality2.1, Company::Entrant, grid_n);

    // Best incumbent profit per entrant column, and best entrant profit per
    // incumbent row. A pair is a Nash point iff it attains both.
    let col_max_incumbent: Vec<f64> = grid_e
        .par_iter()
        .map(|&pe| {
            grid_i
                .iter()
                .map(|&pi| {
                    own_profit(
                        params,
                        dist,
                        quality2,
                        Company::Incumbent,
                        pi,
                        pe,
                        threshold,
                    )
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let row_max_entrant: Vec<f64> = grid_i
        .par_iter()
        .map(|&pi| {
            grid_e
                .iter()
                .map(|&pe| own_profit(params, dist, quality2, Company::Entrant, pe, pi, threshold))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();

    let rows: Vec<Vec<GridNashPoint>> = grid_i
        .par_iter()
        .enumerate()
        .map(|(i, &pi)| {
            let mut row = Vec::new();
            for (j, &pe) in grid_e.iter().enumerate() {
                let (wi, we) = market::period2_profits(params, dist, quality2, (pi, pe), threshold);
                if wi >= col_max_incumbent[j] - NE_EPS && we >= row_max_entrant[i] - NE_EPS {
                    row.push(GridNashPoint {
                        incumbent_price: pi,
                        entrant_price: pe,
                        incumbent_profit: wi,
                        entrant_profit: we,
                    });
                }
            }
            row
        })
        .collect();

    let mut nash_points = Vec::new();
    let mut nash_count = 0;
    let mut representative: Option<GridNashPoint> = None;
    for point in rows.into_iter().flatten() {
        nash_count += 1;
        if nash_points.len() < NASH_POINT_CAP {
            nash_points.push(point);
        }
        let better = representative.is_none_or(|best| {
            point.incumbent_profit + point.entrant_profit
                > best.incumbent_profit + best.entrant_profit + NE_EPS
        });
        if better {
            representative = Some(point);
        }
    }

    let best_possible = col_max_incumbent
        .iter()
        .chain(row_max_entrant.iter())
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    Ok(GridEquilibrium {
        grid_n,
        nash_points,
        nash_count,
        representative,
        degenerate: best_possible <= NE_EPS,
    })
}

/// Discrete best-response fixed point on the price grids. Used by
/// [`grid_period1_optimum`] so its inner equilibria stay independent of the
/// golden-section solver.
#[derive(Clone, Copy, Debug)]
struct GridFixedPoint {
    incumbent_price: f64,
    entrant_price: f64,
    incumbent_profit: f64,
    entrant_profit: f64,
    state: (usize, usize),
}

fn grid_argmax(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    quality2: (f64, f64),
    own: Company,
    grid: &[f64],
    other_price: f64,
    threshold: f64,
) -> usize {
    let mut best = (f64::NEG_INFINITY, 0);
    for (k, &p) in grid.iter().enumerate() {
        let v = own_profit(params, dist, quality2, own, p, other_price, threshold);
        if v > best.0 {
            best = (v, k);
        }
    }
    best.1
}

fn grid_fixed_point(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    quality2: (f64, f64),
    threshold: f64,
    n: usize,
    warm: Option<(usize, usize)>,
) -> GridFixedPoint {
    let grid_i = price_grid(params, quality2.0, Company::Incumbent, n);
    let grid_e = price_grid(params, quality2.1, Company::Entrant, n);
    let clamp = |(i, e): (usize, usize)| (i.min(grid_i.len() - 1), e.min(grid_e.len() - 1));
    let mut state = clamp(warm.unwrap_or((grid_i.len() / 2, grid_e.len() / 2)));
    let mut previous: Option<(usize, usize)> = None;
    for _ in 0..GRID_BR_MAX_ITERS {
        let i = grid_argmax(
            params,
            dist,
            quality2,
            Company::Incumbent,
            &grid_i,
            grid_e[state.1],
            threshold,
        );
        let e = grid_argmax(
            params,
            dist,
            quality2,
            Company::Entrant,
            &grid_e,
            grid_i[i],
            threshold,
        );
        let next = (i, e);
        if next == state {
            break;
        }
        if previous == Some(next) {
            // Two-cycle between adjacent cells; settle on the lower pair.
            state = state.min(next);
            break;
        }
        previous = Some(state);
        state = next;
    }
    let prices = (grid_i[state.0], grid_e[state.1]);
    let (wi, we) = market::period2_profits(params, dist, quality2, prices, threshold);
    GridFixedPoint {
        incumbent_price: prices.0,
        entrant_price: prices.1,
        incumbent_profit: wi,
        entrant_profit: we,
        state,
    }
}

/// Best period-1 price on an exhaustive grid.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GridPeriod1Optimum {
    pub price: f64,
    pub total_profit: f64,
    pub threshold: f64,
    pub collaborate: bool,
    pub incumbent_price2: f64,
    pub entrant_price2: f64,
    pub grid_n: usize,
}

/// Exhaustively evaluates the incumbent's two-period profit over a period-1
/// price grid spanning `[0, w_q*q1/w_p + margin]`, resolving the period-2
/// collaboration and price equilibria at every induced threshold with the
/// grid-based fixed point above. Ties break toward the smaller price.
pub fn grid_period1_optimum(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    qualities: &QualityProfile,
    grid_n: usize,
) -> Result<GridPeriod1Optimum> {
    if grid_n < 100 {
        return Err(Error::validation("grid_n", "must be at least 100"));
    }
    let corner = params.quality_weight * qualities.period1_incumbent / params.price_weight;
    let hi = corner + (0.25 * corner).max(0.05);
    let inner_n = (grid_n / 3).clamp(200, 800);
    let same_qualities = qualities.federated == qualities.local;

    struct CellEval {
        collaborate: bool,
        prices2: (f64, f64),
        period2_incumbent: f64,
    }

    let mut warm_fl: Option<(usize, usize)> = None;
    let mut warm_local: Option<(usize, usize)> = None;
    let mut cached: Option<(f64, CellEval)> = None;
    let mut best: Option<GridPeriod1Optimum> = None;

    for k in 0..grid_n {
        let p1 = hi * k as f64 / (grid_n - 1) as f64;
        let threshold = market::period1_threshold(params, qualities.period1_incumbent, p1);
        let reuse = matches!(&cached, Some((t, _)) if *t == threshold);
        if !reuse {
            let fl = grid_fixed_point(
                params,
                dist,
                qualities.federated,
                threshold,
                inner_n,
                warm_fl,
            );
            warm_fl = Some(fl.state);
            let local = if same_qualities {
                fl
            } else {
                let fp = grid_fixed_point(
                    params,
                    dist,
                    qualities.local,
                    threshold,
                    inner_n,
                    warm_local,
                );
                warm_local = Some(fp.state);
                fp
            };
            let collaborate = choose_collaboration(
                (fl.incumbent_profit, fl.entrant_profit),
                (local.incumbent_profit, local.entrant_profit),
            );
            let chosen = if collaborate { fl } else { local };
            cached = Some((
                threshold,
                CellEval {
                    collaborate,
                    prices2: (chosen.incumbent_price, chosen.entrant_price),
                    period2_incumbent: chosen.incumbent_profit,
                },
            ));
        }
        let (_, eval) = cached.as_ref().map(|(t, e)| (*t, e)).unwrap();
        let period1 = (p1 - params.incumbent_cost) * dist.mass(0.0, threshold);
        let total = period1 + eval.period2_incumbent;
        if best.as_ref().is_none_or(|b| total > b.total_profit) {
            best = Some(GridPeriod1Optimum {
                price: p1,
                total_profit: total,
                threshold,
                collaborate: eval.collaborate,
                incumbent_price2: eval.prices2.0,
                entrant_price2: eval.prices2.1,
                grid_n,
            });
        }
    }

    Ok(best.unwrap())
}
