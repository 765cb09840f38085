//! Acceptance suite: one test per criterion, each printing a single
//! `ACCEPTANCE <n> ...: PASS/FAIL` line (run with `-- --nocapture` to see the
//! lines for passing tests).
//!
//! Three criteria assert reproduction of the bundled reference tables. Where
//! the oracle-verified equilibria contradict those references, the tests
//! print the structured discrepancy evidence and fail: a reproduction
//! mismatch here is a reportable finding, never silently absorbed.

use std::time::Instant;

use coopetition_core::*;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixtures_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load_fixture_rows() -> Vec<AccuracyFixture> {
    load_accuracy_fixtures(fixtures_dir().join("accuracy_tables.csv")).unwrap()
}

fn base() -> SweepBase {
    load_sweep_base(fixtures_dir().join("base_uniform.scenario")).unwrap()
}

fn expected_rows() -> Vec<ExpectedCollaboration> {
    load_expected_collaboration(fixtures_dir().join("expected_collaboration.csv")).unwrap()
}

fn counterexample() -> Scenario {
    load_scenario(fixtures_dir().join("counterexample.scenario")).unwrap()
}

/// Criterion 1: heterogeneity sweep (both image benchmarks, five mixing
/// levels each) collaborates in every cell.
#[test]
fn acceptance_1_beta_sweep_collaboration_table() {
    let start = Instant::now();
    let fixtures: Vec<_> = load_fixture_rows()
        .into_iter()
        .filter(|f| f.sweep_key.starts_with("beta="))
        .collect();
    assert_eq!(fixtures.len(), 10);
    let report = run_sweep(&fixtures, &base(), None, 1, false).unwrap();

    let mut wrong = Vec::new();
    for row in &report.collaboration {
        if row.collaborate != Some(true) {
            wrong.push(format!(
                "{}/{}: {:?}",
                row.dataset, row.sweep_key, row.collaborate
            ));
        }
    }
    let elapsed = start.elapsed();
    assert!(
        wrong.is_empty(),
        "ACCEPTANCE 1 (beta-sweep collaboration table): FAIL — cells not collaborating: {wrong:?}"
    );
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "ACCEPTANCE 1: runtime {elapsed:?} exceeded the 60 s budget"
    );
    println!(
        "ACCEPTANCE 1 (beta-sweep collaboration table): PASS — 10/10 cells collaborate ({elapsed:.2?})"
    );
}

/// Criterion 2: data-quantity sweep reproduces the expected collaboration
/// pattern (image benchmarks collaborate, the dermatology benchmark does
/// not). A mismatch must surface as a structured discrepancy report carrying
/// the independently computed grid-oracle profit tables.
#[test]
fn acceptance_2_data_quantity_sweep_collaboration_table() {
    let fixtures: Vec<_> = load_fixture_rows()
        .into_iter()
        .filter(|f| f.sweep_key.starts_with("de="))
        .collect();
    assert_eq!(fixtures.len(), 12);
    let expected = expected_rows();
    let report = run_sweep(&fixtures, &base(), Some(&expected), 1, false).unwrap();

    // The eight image-benchmark cells must collaborate outright.
    for row in &report.collaboration {
        if row.dataset != "ham10000" {
            assert_eq!(
                row.collaborate,
                Some(true),
                "ACCEPTANCE 2: {}/{} did not collaborate",
                row.dataset,
                row.sweep_key
            );
        }
    }

    if report.discrepancy_count == 0 {
        println!(
            "ACCEPTANCE 2 (data-quantity sweep collaboration table): PASS — 12/12 cells match"
        );
        return;
    }

    // Falsification path: every mismatched cell must carry a well-formed
    // discrepancy block whose oracle profits corroborate the solver.
    let mut lines = Vec::new();
    for cell in &report.cells {
        let Some(d) = &cell.discrepancy else { continue };
        assert!(
            d.oracle_federated.incumbent_profit.is_finite()
                && d.oracle_standalone.incumbent_profit.is_finite(),
            "discrepancy block missing oracle profit tables"
        );
        assert!(
            (d.oracle_federated.incumbent_profit - d.federated_profits.0).abs() < 1e-3
                && (d.oracle_federated.entrant_profit - d.federated_profits.1).abs() < 1e-3,
            "solver and grid oracle disagree inside the discrepancy block"
        );
        lines.push(format!(
            "  {}/{}: expected collaborate={}, computed {}; shared-model profits \
             ({:.4}, {:.4}) vs local ({:.4}, {:.4}); grid-oracle NE profits \
             ({:.4}, {:.4}) vs ({:.4}, {:.4})",
            d.dataset,
            d.sweep_key,
            d.expected_collaborate,
            d.computed_collaborate,
            d.federated_profits.0,
            d.federated_profits.1,
            d.standalone_profits.0,
            d.standalone_profits.1,
            d.oracle_federated.incumbent_profit,
            d.oracle_federated.entrant_profit,
            d.oracle_standalone.incumbent_profit,
            d.oracle_standalone.entrant_profit,
        ));
    }
    panic!(
        "ACCEPTANCE 2 (data-quantity sweep collaboration table): FAIL — {} cell(s) \
         contradict the expected table; the verified equilibria imply collaboration \
         because the shared model raises both period-2 profits at the realized \
         threshold. Structured discrepancy report:\n{}",
        report.discrepancy_count,
        lines.join("\n")
    );
}

/// Criterion 3: the bundled counterexample scenario solves with
/// oracle-verified equilibria for both profiles at the pinned period-1
/// price, and the report prints a side-by-side comparison with the reference
/// profits, flagging match or documented mismatch at 1e-3.
#[test]
fn acceptance_3_counterexample_scenario_comparison() {
    let start = Instant::now();
    let scenario = counterexample();
    let report = solve_scenario(&scenario, false).unwrap();
    let cmp = report.reference.as_ref().expect("reference block");

    assert_eq!(cmp.period1_price, 0.72);
    assert!(
        cmp.federated_verified && cmp.standalone_verified,
        "ACCEPTANCE 3: FAIL — deviation verdict rejected a profile equilibrium"
    );
    assert!(
        cmp.federated_matches.is_some() && cmp.standalone_matches.is_some(),
        "ACCEPTANCE 3: FAIL — comparison flags missing"
    );

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "ACCEPTANCE 3: runtime {elapsed:?} exceeded the 5 s budget"
    );
    println!(
        "ACCEPTANCE 3 (counterexample scenario comparison): PASS — verified equilibria; \
         shared-model profits ({:.6}, {:.6}) vs reference {:?} [{}], local ({:.6}, {:.6}) \
         vs reference {:?} [{}] ({elapsed:.2?})",
        cmp.computed_federated.0,
        cmp.computed_federated.1,
        cmp.expected_federated,
        flag(cmp.federated_matches),
        cmp.computed_standalone.0,
        cmp.computed_standalone.1,
        cmp.expected_standalone,
        flag(cmp.standalone_matches),
    );
}

fn flag(m: Option<bool>) -> &'static str {
    match m {
        Some(true) => "match",
        Some(false) => "documented mismatch",
        None => "-",
    }
}

/// Criterion 4: equilibrium own price is non-decreasing in own quality and
/// non-increasing in competitor quality over a 9-point grid.
#[test]
fn acceptance_4_equilibrium_price_monotone_in_quality() {
    let start = Instant::now();
    let params = MarketParams::unit();
    let dist = PreferenceDistribution::uniform();
    let settings = SolverSettings::default();
    let grid: Vec<f64> = (0..9).map(|k| 0.5 + 0.05 * k as f64).collect();

    let mut prev = f64::NEG_INFINITY;
    for &q in &grid {
        let eq = price_equilibrium_at(&params, &dist, (q, 0.7), 0.0, &settings);
        assert!(
            eq.incumbent_price >= prev - 1e-6,
            "ACCEPTANCE 4: FAIL — own price fell from {prev} to {} at own quality {q}",
            eq.incumbent_price
        );
        prev = eq.incumbent_price;
    }

    let mut prev = f64::INFINITY;
    for &q in &grid {
        let eq = price_equilibrium_at(&params, &dist, (0.7, q), 0.0, &settings);
        assert!(
            eq.incumbent_price <= prev + 1e-6,
            "ACCEPTANCE 4: FAIL — own price rose from {prev} to {} at competitor quality {q}",
            eq.incumbent_price
        );
        prev = eq.incumbent_price;
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "ACCEPTANCE 4: over budget: {elapsed:?}"
    );
    println!(
        "ACCEPTANCE 4 (equilibrium price monotone in quality): PASS — 9-point own and \
         competitor grids ({elapsed:.2?})"
    );
}

fn price_equilibrium_at(
    params: &MarketParams,
    dist: &PreferenceDistribution,
    quality2: (f64, f64),
    threshold: f64,
    settings: &SolverSettings,
) -> PriceEquilibrium {
    coopetition_core::price_game::price_equilibrium(
        params, dist, quality2, threshold, settings, None,
    )
    .unwrap()
}

/// Criterion 5: on the counterexample scenario, all 22 fixture cells, and 20
/// seeded random scenarios, the regional-ascent optimum matches the
/// exhaustive period-1 grid within 1e-3.
#[test]
fn acceptance_5_period1_global_optimality_vs_grid() {
    let start = Instant::now();
    let params = MarketParams::unit();
    let dist = PreferenceDistribution::uniform();
    let settings = SolverSettings::default();

    let mut cases: Vec<(String, MarketParams, QualityProfile)> = Vec::new();
    let ce = counterexample();
    cases.push(("counterexample".into(), ce.params, ce.qualities));
    for fixture in load_fixture_rows() {
        let scenario = scenario_from_fixture(&fixture, &params, &dist, &settings);
        cases.push((
            scenario.metadata.label.clone(),
            scenario.params,
            scenario.qualities,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for k in 0..20 {
        let mut q = || rng.random_range(0.3..=0.95);
        let qualities = QualityProfile {
            period1_incumbent: q(),
            local: (q(), q()),
            federated: (q(), q()),
        };
        let mut randomized = params;
        randomized.incumbent_cost = rng.random_range(0.0..=0.1);
        randomized.entrant_cost = rng.random_range(0.0..=0.1);
        cases.push((format!("random-{k}"), randomized, qualities));
    }
    assert_eq!(cases.len(), 43);

    let mut worst: (f64, String) = (0.0, String::new());
    for (label, case_params, qualities) in &cases {
        let solution = period1::optimize(case_params, &dist, qualities, &settings)
            .unwrap_or_else(|e| panic!("ACCEPTANCE 5: solver failed on {label}: {e}"));
        let grid = oracle::grid_period1_optimum(case_params, &dist, qualities, 2000)
            .unwrap_or_else(|e| panic!("ACCEPTANCE 5: oracle failed on {label}: {e}"));
        // The ascent can out-resolve the finite grid, but only by a
        // resolution-sized margin, so the absolute gap is the right check.
        let gap = (solution.total_profit - grid.total_profit).abs();
        assert!(
            gap <= 1e-3,
            "ACCEPTANCE 5: FAIL — {label}: ascent {:.6} vs grid {:.6}",
            solution.total_profit,
            grid.total_profit
        );
        if gap > worst.0 {
            worst = (gap, label.clone());
        }
    }

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "ACCEPTANCE 5: runtime {elapsed:?} exceeded the 5 min budget"
    );
    println!(
        "ACCEPTANCE 5 (period-1 global optimality vs grid): PASS — 43 scenarios, worst \
         |gap| {:.2e} at {} ({elapsed:.2?})",
        worst.0, worst.1
    );
}

/// Criterion 6: 50 own-price profit slices per stock distribution are
/// single-peaked, all three stock distributions pass the hazard regularity
/// check, and the crafted mixture fails it with a located violation.
#[test]
fn acceptance_6_unimodal_slices_and_hazard_regularity() {
    let start = Instant::now();
    let params = MarketParams::unit();
    let stock: Vec<(&str, PreferenceDistribution)> = vec![
        ("uniform", PreferenceDistribution::uniform()),
        (
            "truncated-gaussian",
            PreferenceDistribution::truncated_gaussian(0.5, 0.2).unwrap(),
        ),
        (
            "truncated-gamma",
            PreferenceDistribution::truncated_gamma(2.0, 0.3).unwrap(),
        ),
    ];

    for (name, dist) in &stock {
        let hazard = dist.hazard_monotone_check(512).unwrap();
        assert!(
            hazard.monotone,
            "ACCEPTANCE 6: FAIL — {name} hazard decreased at {:?}",
            hazard.first_violation
        );

        let mut rng = ChaCha8Rng::seed_from_u64(0x51DE);
        for slice in 0..50 {
            let own = if slice % 2 == 0 {
                Company::Incumbent
            } else {
                Company::Entrant
            };
            let quality2 = (rng.random_range(0.3..=0.95), rng.random_range(0.3..=0.95));
            let other_quality = match own {
                Company::Incumbent => quality2.1,
                Company::Entrant => quality2.0,
            };
            let other_price = rng.random_range(0.0..=other_quality);
            let threshold = rng.random_range(0.0..=0.6);
            let report = coopetition_core::price_game::unimodality_scan(
                &params,
                dist,
                quality2,
                own,
                other_price,
                threshold,
                512,
            )
            .unwrap();
            assert_eq!(
                report.violations, 0,
                "ACCEPTANCE 6: FAIL — {name} slice {slice} ({own} at rival price \
                 {other_price:.4}, threshold {threshold:.4}) not single-peaked; first \
                 violation at {:?}",
                report.first_violation
            );
        }
    }

    let mixture = PreferenceDistribution::valley_mixture();
    let hazard = mixture.hazard_monotone_check(512).unwrap();
    assert!(
        !hazard.monotone && hazard.first_violation.is_some(),
        "ACCEPTANCE 6: FAIL — crafted mixture unexpectedly passed the regularity check"
    );

    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE 6 (unimodal slices and hazard regularity): PASS — 150 slices \
         single-peaked; mixture violation located at {:.4} ({elapsed:.2?})",
        hazard.first_violation.unwrap()
    );
}

/// Criterion 7: corner behavior of the period-1 optimum — zero period-1
/// demand on the most heterogeneous image-benchmark cell, positive period-1
/// harvesting on a dermatology cell.
#[test]
fn acceptance_7_period1_corner_behavior() {
    let params = MarketParams::unit();
    let dist = PreferenceDistribution::uniform();
    let settings = SolverSettings::default();
    let rows = load_fixture_rows();

    let harvest_row = rows
        .iter()
        .find(|f| f.dataset == "ham10000" && f.sweep_key == "de=2k")
        .unwrap();
    let harvest = scenario_from_fixture(harvest_row, &params, &dist, &settings);
    let harvest_solution =
        period1::optimize(&harvest.params, &dist, &harvest.qualities, &settings).unwrap();
    assert!(
        harvest_solution.threshold > 0.0,
        "ACCEPTANCE 7: FAIL — expected period-1 harvesting on {}, got threshold 0",
        harvest.metadata.label
    );

    let corner_row = rows
        .iter()
        .find(|f| f.dataset == "cifar10" && f.sweep_key == "beta=0.1")
        .unwrap();
    let corner = scenario_from_fixture(corner_row, &params, &dist, &settings);
    let corner_solution =
        period1::optimize(&corner.params, &dist, &corner.qualities, &settings).unwrap();

    if corner_solution.threshold.abs() <= 1e-9 {
        println!(
            "ACCEPTANCE 7 (period-1 corner behavior): PASS — zero period-1 demand on \
             {}, harvesting (threshold {:.4}) on {}",
            corner.metadata.label, harvest_solution.threshold, harvest.metadata.label
        );
        return;
    }

    // Falsification evidence: compare the corner against the found optimum
    // through both solution routes.
    let corner_value = period1::total_profit(
        &corner.params,
        &dist,
        &corner.qualities,
        corner.qualities.period1_incumbent, // price at the zero-demand corner
        &settings,
        &mut EquilibriumCache::default(),
    )
    .unwrap();
    let grid =
        oracle::grid_period1_optimum(&corner.params, &dist, &corner.qualities, 2000).unwrap();
    panic!(
        "ACCEPTANCE 7 (period-1 corner behavior): FAIL — {} optimum has threshold \
         {:.6} (price {:.6}, profit {:.6}), not the zero-demand corner (corner profit \
         {:.6}); the exhaustive grid independently confirms an interior optimum at \
         price {:.6} with profit {:.6} and threshold {:.6}. Early harvesting plus the \
         shared-model residual profit strictly dominates the corner here.",
        corner.metadata.label,
        corner_solution.threshold,
        corner_solution.price,
        corner_solution.total_profit,
        corner_value.total,
        grid.price,
        grid.total_profit,
        grid.threshold,
    );
}

/// Criterion 8: in every collaborating cell with uniform preferences and
/// equal costs, the two period-2 prices coincide within 1e-6.
#[test]
fn acceptance_8_symmetric_pricing_in_collaborating_cells() {
    let fixtures = load_fixture_rows();
    let report = run_sweep(&fixtures, &base(), None, 1, false).unwrap();

    let mut asymmetric = Vec::new();
    for cell in &report.cells {
        let r = cell.report.as_ref().expect("cell solved");
        if !r.collaborate {
            continue;
        }
        let gap = (r.incumbent_price2 - r.entrant_price2).abs();
        if gap >= 1e-6 {
            asymmetric.push(format!(
                "  {}/{}: |p2 gap| {:.6} (threshold {:.6})",
                cell.dataset, cell.sweep_key, gap, r.threshold
            ));
        }
    }

    if asymmetric.is_empty() {
        println!(
            "ACCEPTANCE 8 (symmetric pricing in collaborating cells): PASS — {} cells",
            report.cells.len()
        );
        return;
    }
    panic!(
        "ACCEPTANCE 8 (symmetric pricing in collaborating cells): FAIL — {} of {} \
         collaborating cells price asymmetrically. Symmetric pricing requires a \
         symmetric residual market; every verified optimum here harvests in period 1 \
         (threshold > 0), which skews the residual toward the entrant and splits the \
         prices to ((q - threshold)/2, q/2):\n{}",
        asymmetric.len(),
        report.cells.len(),
        asymmetric.join("\n")
    );
}

/// Criterion 9: repeated runs are byte-identical (serial and parallel), and
/// nested grid refinement moves the reported optimum by less than one coarse
/// cell without losing profit.
#[test]
fn acceptance_9_oracle_determinism_and_refinement() {
    let start = Instant::now();
    let fixtures: Vec<_> = load_fixture_rows()
        .into_iter()
        .filter(|f| f.dataset == "ham10000")
        .collect();
    let b = base();

    let serial_1 = serde_json::to_vec(&run_sweep(&fixtures, &b, None, 1, false).unwrap()).unwrap();
    let serial_2 = serde_json::to_vec(&run_sweep(&fixtures, &b, None, 1, false).unwrap()).unwrap();
    let parallel = serde_json::to_vec(&run_sweep(&fixtures, &b, None, 4, false).unwrap()).unwrap();
    assert_eq!(
        serial_1, serial_2,
        "ACCEPTANCE 9: FAIL — repeated runs differ"
    );
    assert_eq!(
        serial_1, parallel,
        "ACCEPTANCE 9: FAIL — parallel run not byte-identical to serial"
    );

    let ce = counterexample();
    let dist = PreferenceDistribution::uniform();
    let coarse = oracle::grid_period1_optimum(&ce.params, &dist, &ce.qualities, 2000).unwrap();
    // 2n-1 points nest the coarse grid inside the fine one.
    let fine = oracle::grid_period1_optimum(&ce.params, &dist, &ce.qualities, 3999).unwrap();
    let corner = ce.params.quality_weight * ce.qualities.period1_incumbent / ce.params.price_weight;
    let span = corner + (0.25 * corner).max(0.05);
    let coarse_cell = span / 1999.0;
    assert!(
        fine.total_profit >= coarse.total_profit - 1e-9,
        "ACCEPTANCE 9: FAIL — refinement lost profit: {} -> {}",
        coarse.total_profit,
        fine.total_profit
    );
    assert!(
        (fine.price - coarse.price).abs() < coarse_cell,
        "ACCEPTANCE 9: FAIL — refinement moved the optimum by more than one cell"
    );

    let elapsed = start.elapsed();
    println!(
        "ACCEPTANCE 9 (oracle determinism and refinement): PASS — byte-identical runs; \
         refinement moved the optimum {:.2e} (< cell {:.2e}) ({elapsed:.2?})",
        (fine.price - coarse.price).abs(),
        coarse_cell
    );
}
