//! Scenario files, accuracy fixtures, and the conversions between them.
//!
//! A scenario file is TOML with `[params]`, `[distribution]`, `[qualities]`,
//! and optional `[settings]`, `[metadata]`, and `[reference]` sections.
//! Fixture files are CSV tables of measured model accuracies (percent scale,
//! stored verbatim); conversion to fraction-scale qualities happens only in
//! [`scenario_from_fixture`], so the files stay auditable against their
//! source.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::PreferenceDistribution;
use crate::error::{Error, Result};
use crate::market::{MarketParams, QualityProfile};
use crate::price_game::SolverSettings;

/// Inert labels carried through to reports; never read by the solvers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioMetadata {
    pub label: String,
    pub dataset: String,
    pub sweep_key: String,
    /// Training-set sizes behind the accuracy numbers, kept for provenance.
    pub incumbent_data_quantity: Option<u64>,
    pub entrant_data_quantity: Option<u64>,
}

/// Published values a solve run should be compared against. Purely
/// reporting: the comparison block flags match or mismatch, it never bends
/// the solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceExpectations {
    /// Evaluate the comparison at this period-1 price instead of the
    /// optimized one.
    pub period1_price: Option<f64>,
    /// Expected `(incumbent, entrant)` period-2 profits under the shared
    /// model.
    pub federated_profits: Option<(f64, f64)>,
    /// Expected profits under local models.
    pub standalone_profits: Option<(f64, f64)>,
    pub collaborate: Option<bool>,
    /// Absolute tolerance for the profit comparisons.
    pub tolerance: f64,
}

impl Default for ReferenceExpectations {
    fn default() -> Self {
        ReferenceExpectations {
            period1_price: None,
            federated_profits: None,
            standalone_profits: None,
            collaborate: None,
            tolerance: 1e-3,
        }
    }
}

/// A fully specified market instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: MarketParams,
    pub distribution: PreferenceDistribution,
    pub qualities: QualityProfile,
    #[serde(default)]
    pub settings: SolverSettings,
    #[serde(default)]
    pub metadata: ScenarioMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceExpectations>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.distribution.validate()?;
        self.qualities.validate()?;
        self.settings.validate()?;
        Ok(())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Parse {
            path: "<scenario>".into(),
            detail: e.to_string(),
        })
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Loads and fully validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let scenario: Scenario = toml::from_str(&read(path)?).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn save_scenario(scenario: &Scenario, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, scenario.to_toml()?).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Shared pieces of a sweep: everything but the qualities, which come from
/// the fixture rows. A full scenario file parses as a base (its qualities
/// section is ignored).
#[derive(Clone, Debug, Deserialize)]
pub struct SweepBase {
    pub params: MarketParams,
    pub distribution: PreferenceDistribution,
    #[serde(default)]
    pub settings: SolverSettings,
    #[serde(default)]
    pub metadata: ScenarioMetadata,
}

pub fn load_sweep_base(path: impl AsRef<Path>) -> Result<SweepBase> {
    let path = path.as_ref();
    let base: SweepBase = toml::from_str(&read(path)?).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    base.params.validate()?;
    base.distribution.validate()?;
    base.settings.validate()?;
    Ok(base)
}

/// One row of a measured-accuracy table: local and jointly trained model
/// accuracies for a dataset and sweep setting, in percent as printed. The
/// dispersion columns are carried for provenance and never used by the
/// solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracyFixture {
    pub dataset: String,
    pub sweep_key: String,
    pub i_local: f64,
    pub e_local: f64,
    pub fedavg: f64,
    #[serde(default)]
    pub i_local_disp: f64,
    #[serde(default)]
    pub e_local_disp: f64,
    #[serde(default)]
    pub fedavg_disp: f64,
}

impl AccuracyFixture {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("i_local", self.i_local),
            ("e_local", self.e_local),
            ("fedavg", self.fedavg),
        ] {
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::validation(
                    format!("fixture {}/{} column {name}", self.dataset, self.sweep_key),
                    format!("accuracy {v} outside [0, 100]"),
                ));
            }
        }
        Ok(())
    }
}

/// Loads a fixture table from CSV with a `dataset,sweep_key,i_local,e_local,
/// fedavg,i_local_disp,e_local_disp,fedavg_disp` header.
pub fn load_accuracy_fixtures(path: impl AsRef<Path>) -> Result<Vec<AccuracyFixture>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
    let mut fixtures = Vec::new();
    for row in reader.deserialize() {
        let fixture: AccuracyFixture = row.map_err(|e| Error::Parse {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        fixture.validate()?;
        fixtures.push(fixture);
    }
    Ok(fixtures)
}

/// Builds a scenario from a fixture row: accuracies divided by 100 become
/// fraction-scale qualities, with the jointly trained accuracy applying to
/// both companies (one shared model). The incumbent's period-1 quality is
/// its own local model.
pub fn scenario_from_fixture(
    fixture: &AccuracyFixture,
    params: &MarketParams,
    distribution: &PreferenceDistribution,
    settings: &SolverSettings,
) -> Scenario {
    let qualities = QualityProfile {
        period1_incumbent: fixture.i_local / 100.0,
        local: (fixture.i_local / 100.0, fixture.e_local / 100.0),
        federated: (fixture.fedavg / 100.0, fixture.fedavg / 100.0),
    };
    Scenario {
        params: *params,
        distribution: distribution.clone(),
        qualities,
        settings: *settings,
        metadata: ScenarioMetadata {
            label: format!("{}/{}", fixture.dataset, fixture.sweep_key),
            dataset: fixture.dataset.clone(),
            sweep_key: fixture.sweep_key.clone(),
            incumbent_data_quantity: None,
            entrant_data_quantity: None,
        },
        reference: None,
    }
}
