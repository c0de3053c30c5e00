//! Run configuration: one TOML file with a section per command. Command-line
//! flags override file values, and the effective values are written into
//! every summary.

use std::path::Path;

use serde::{Deserialize, Serialize};
use surfgl::gl2d::FieldMode;

use crate::Failure;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub solve_1d: Solve1dConfig,
    pub theta0: GridConfig,
    pub solve_2d: Solve2dConfig,
    pub sweep: SweepSection,
    pub check: CheckConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub n: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { t_max: 15.0, n: 30001 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Solve1dConfig {
    pub b: f64,
    pub t_max: f64,
    pub n: usize,
}

impl Default for Solve1dConfig {
    fn default() -> Self {
        let g = GridConfig::default();
        Self {
            b: 1.5,
            t_max: g.t_max,
            n: g.n,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Init {
    #[default]
    Trial,
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Solve2dConfig {
    pub domain: String,
    pub b: f64,
    pub epsilon: f64,
    pub resolution: usize,
    pub c0: f64,
    pub c1: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub field_mode: FieldMode,
    pub init: Init,
    pub seed: u64,
}

impl Default for Solve2dConfig {
    fn default() -> Self {
        Self {
            domain: "square".into(),
            b: 1.5,
            epsilon: 0.1,
            resolution: 256,
            c0: 1.5,
            c1: 1.5,
            tol: 1e-6,
            max_iter: 20_000,
            field_mode: FieldMode::Frozen,
            init: Init::Trial,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub domain: String,
    pub b: f64,
    pub epsilons: Vec<f64>,
    pub resolution: usize,
    pub c0: f64,
    pub c1: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub field_mode: FieldMode,
    pub potential_hs: f64,
    pub potential_nt: usize,
    pub coarse_levels: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        let s = surfgl::analysis::SweepConfig::default();
        Self {
            domain: "square".into(),
            b: 1.5,
            epsilons: vec![0.12, 0.08, 0.055],
            resolution: s.resolution,
            c0: s.c0,
            c1: s.c1,
            tol: s.tol,
            max_iter: s.max_iter,
            field_mode: s.field_mode,
            potential_hs: s.potential_hs,
            potential_nt: s.potential_nt,
            coarse_levels: s.coarse_levels,
        }
    }
}

impl SweepSection {
    pub fn sweep_config(&self, jobs: usize) -> surfgl::analysis::SweepConfig {
        surfgl::analysis::SweepConfig {
            resolution: self.resolution,
            c0: self.c0,
            c1: self.c1,
            tol: self.tol,
            max_iter: self.max_iter,
            field_mode: self.field_mode,
            jobs,
            potential_hs: self.potential_hs,
            potential_nt: self.potential_nt,
            coarse_levels: self.coarse_levels,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckConfig {
    pub resolution: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { resolution: 512 }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::input(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}
