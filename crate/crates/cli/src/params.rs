use std::path::PathBuf;

use clap::Args;
use lpr_core::analytic::Figure;
use lpr_core::simnet::ScenarioConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum FigureSelector {
    One(Figure),
    All,
}

impl FigureSelector {
    pub fn figures(self) -> Vec<Figure> {
        match self {
            FigureSelector::One(f) => vec![f],
            FigureSelector::All => Figure::ALL.to_vec(),
        }
    }
}

impl From<FigureSelector> for String {
    fn from(s: FigureSelector) -> String {
        match s {
            FigureSelector::One(f) => f.file_name().trim_end_matches(".csv").to_string(),
            FigureSelector::All => "all".to_string(),
        }
    }
}

impl TryFrom<String> for FigureSelector {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        parse_selector(&s)
    }
}

pub fn parse_selector(s: &str) -> Result<FigureSelector, String> {
    if s == "all" {
        return Ok(FigureSelector::All);
    }
    s.parse::<Figure>()
        .map(FigureSelector::One)
        .map_err(|_| format!("unknown figure `{s}`; expected fig2, fig3, fig4, fig5, fig7 or all"))
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct CurvesArgs {
    /// fig2, fig3, fig4, fig5, fig7 or all.
    #[arg(long, default_value = "all", value_parser = parse_selector)]
    pub fig: FigureSelector,
    /// Location counts for the Pareto fronts of fig7.
    #[arg(long, value_delimiter = ',', default_value = "12")]
    pub k: Vec<u32>,
    /// Zipf constant of the zeroth-order model.
    #[arg(long, default_value_t = 0.48)]
    pub c: f64,
    #[arg(long, default_value_t = 0.148)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.077)]
    pub c2: f64,
    #[arg(long, default_value_t = 0.657)]
    pub c3: f64,
    /// Largest k for the CDF and PMF curves.
    #[arg(long, default_value_t = 50)]
    pub max_k: u32,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenTraceArgs {
    #[arg(long, default_value_t = 100)]
    pub users: u32,
    #[arg(long, default_value_t = 4)]
    pub weeks: u32,
    /// Home cells per user.
    #[arg(long, default_value_t = 40)]
    pub locations: u32,
    /// Share of unpredictable slots.
    #[arg(long, default_value_t = 0.07)]
    pub floor: f64,
    /// Cells per grid side.
    #[arg(long, default_value_t = 20)]
    pub grid: u32,
    /// Cell edge in meters.
    #[arg(long, default_value_t = 100.0)]
    pub cell_size: f64,
    #[arg(long, default_value_t = 60)]
    pub slot_minutes: u32,
    #[arg(long, default_value_t = 0.148)]
    pub c1: f64,
    #[arg(long, default_value_t = 0.077)]
    pub c2: f64,
    #[arg(long, default_value_t = 0.657)]
    pub c3: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Check the generated regularity against the model.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct BuildProfileArgs {
    /// Trace CSV with node_id,slot_index,cell_x,cell_y rows.
    #[arg(long)]
    pub trace: PathBuf,
    /// Context depth: 0, 1 or 3.
    #[arg(long, default_value_t = 1)]
    pub order: u8,
    #[arg(long, default_value_t = 60)]
    pub slot_minutes: u32,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct SimulateArgs {
    /// Scenario TOML file.
    pub scenario: PathBuf,
    /// Override `traffic.trials`.
    #[arg(long)]
    pub trials: Option<u32>,
    /// Override `seeds.traffic`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CompareGhlsArgs {
    /// Scenario TOML file; built-in defaults when absent.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Smallest update-to-first-packet ratio.
    #[arg(long, default_value_t = 0.5)]
    pub min: f64,
    #[arg(long, default_value_t = 4.0)]
    pub max: f64,
    #[arg(long, default_value_t = 15)]
    pub steps: usize,
    /// First packets simulated per ratio.
    #[arg(long, default_value_t = 10_000)]
    pub packets: u32,
    /// Override `strategy.k`.
    #[arg(long)]
    pub k: Option<u32>,
    /// Override `strategy.grouping` (serial, parallel, knee or sizes like 1+2+4).
    #[arg(long)]
    pub grouping: Option<String>,
    /// Override `topology.nodes`.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Override `topology.avg_degree`.
    #[arg(long)]
    pub avg_degree: Option<f64>,
    /// Override `traffic.floor`.
    #[arg(long)]
    pub floor: Option<f64>,
    /// Override `seeds.traffic`.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Fully resolved parameters of one run, as stored in its manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Resolved {
    Curves(CurvesArgs),
    GenTrace(GenTraceArgs),
    BuildProfile(BuildProfileArgs),
    Simulate {
        scenario: ScenarioConfig,
    },
    CompareGhls {
        scenario: ScenarioConfig,
        ratios: Vec<f64>,
        packets: u32,
    },
}

impl Resolved {
    pub fn command_name(&self) -> &'static str {
        match self {
            Resolved::Curves(_) => "curves",
            Resolved::GenTrace(_) => "gen-trace",
            Resolved::BuildProfile(_) => "build-profile",
            Resolved::Simulate { .. } => "simulate",
            Resolved::CompareGhls { .. } => "compare-ghls",
        }
    }

    pub fn seeds(&self) -> Vec<(String, u64)> {
        let scenario_seeds = |s: &ScenarioConfig| {
            vec![
                ("topology".to_string(), s.seeds.topology),
                ("mobility".to_string(), s.seeds.mobility),
                ("traffic".to_string(), s.seeds.traffic),
            ]
        };
        match self {
            Resolved::GenTrace(a) => vec![("mobility".into(), a.seed)],
            Resolved::Simulate { scenario } | Resolved::CompareGhls { scenario, .. } => {
                scenario_seeds(scenario)
            }
            Resolved::Curves(_) | Resolved::BuildProfile(_) => Vec::new(),
        }
    }
}
