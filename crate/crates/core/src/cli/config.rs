use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::padic::ExtKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum ExtArg {
    #[serde(rename = "unram")]
    #[value(name = "unram")]
    Unram,
    #[serde(rename = "ram-p")]
    #[value(name = "ram-p")]
    RamP,
    #[serde(rename = "ram-ps")]
    #[value(name = "ram-ps")]
    RamPs,
}

impl ExtArg {
    pub fn kind(self) -> ExtKind {
        match self {
            ExtArg::Unram => ExtKind::Unramified,
            ExtArg::RamP => ExtKind::RamifiedP,
            ExtArg::RamPs => ExtKind::RamifiedPS,
        }
    }
}

/// A matrix entry over E: an integer, or [c0, c1] for c0 + alpha c1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntrySpec {
    Int(i64),
    Pair([i64; 2]),
}

impl EntrySpec {
    pub fn parts(self) -> (i64, i64) {
        match self {
            EntrySpec::Int(a) => (a, 0),
            EntrySpec::Pair([a, b]) => (a, b),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaArg {
    Id,
    Sigma,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyParams {
    pub matrix: [[EntrySpec; 2]; 2],
    pub gamma: GammaArg,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            matrix: [
                [EntrySpec::Int(0), EntrySpec::Int(1)],
                [EntrySpec::Int(2), EntrySpec::Int(0)],
            ],
            gamma: GammaArg::Id,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedGroupParams {
    /// parameter draws per certificate case
    pub draws: usize,
    /// group elements tested per draw
    pub elements: usize,
}

impl Default for FixedGroupParams {
    fn default() -> Self {
        FixedGroupParams {
            draws: 10,
            elements: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitParams {
    /// random ends labelled for the diagonal and SL(2,Q_p) invariants
    pub samples: usize,
    /// ends fed to the union-find closure for H_theta_a
    pub theta_ends: usize,
    /// closure rounds
    pub rounds: usize,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            samples: 1000,
            theta_ends: 400,
            rounds: 30,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolarParams {
    /// random g per pair
    pub samples: usize,
    /// word length of the random g
    pub depth: usize,
}

impl Default for PolarParams {
    fn default() -> Self {
        PolarParams {
            samples: 500,
            depth: 5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LimitFamily {
    /// the rotated copy of SL(2,Q_p) inside SL(2,E)
    Rotated,
    /// the fixed-point groups H_theta_a inside SL(2,Q_p)
    Htheta,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsPadicParams {
    pub family: LimitFamily,
    pub n_min: i64,
    pub n_max: i64,
    /// b values of the targets; None picks {0, p, 2p} (unramified) or {0, 1, 2} (ramified)
    pub b_values: Option<Vec<i64>>,
    /// first and second coordinates of C; all pairs are used
    pub c1_values: Vec<i64>,
    pub c2_values: Vec<i64>,
    /// z values for the H_theta family
    pub z_values: Vec<i64>,
    /// candidates drawn by the condition-2 sweep
    pub sweep_samples: usize,
    /// accepted slope window
    pub slope_range: [f64; 2],
}

impl Default for LimitsPadicParams {
    fn default() -> Self {
        LimitsPadicParams {
            family: LimitFamily::Rotated,
            n_min: 1,
            n_max: 10,
            b_values: None,
            c1_values: vec![1, 2, 3],
            c2_values: vec![1, -1, 2],
            z_values: vec![1, 3],
            sweep_samples: 100,
            slope_range: [1.8, 2.2],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsRealParams {
    pub n_min: i64,
    pub n_max: i64,
    /// targets: the two with b = +-1 plus points spread over the rest of the circle
    pub targets: usize,
    pub slope_range: [f64; 2],
}

impl Default for LimitsRealParams {
    fn default() -> Self {
        LimitsRealParams {
            n_min: 5,
            n_max: 15,
            targets: 10,
            slope_range: [-2.2, -1.8],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeLevel {
    #[serde(rename = "Qp")]
    Qp,
    E,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TreeDotParams {
    pub radius: i64,
    pub level: TreeLevel,
}

impl Default for TreeDotParams {
    fn default() -> Self {
        TreeDotParams {
            radius: 2,
            level: TreeLevel::E,
        }
    }
}

/// Everything an experiment reads. Missing fields take their defaults, unknown fields are
/// rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub p: u32,
    pub ext: ExtArg,
    pub precision: u32,
    pub seed: u64,
    pub classify: ClassifyParams,
    pub fixed_group: FixedGroupParams,
    pub orbits: OrbitParams,
    pub polar: PolarParams,
    pub limits_padic: LimitsPadicParams,
    pub limits_real: LimitsRealParams,
    pub tree_dot: TreeDotParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            p: 5,
            ext: ExtArg::Unram,
            precision: 40,
            seed: 1,
            classify: ClassifyParams::default(),
            fixed_group: FixedGroupParams::default(),
            orbits: OrbitParams::default(),
            polar: PolarParams::default(),
            limits_padic: LimitsPadicParams::default(),
            limits_real: LimitsRealParams::default(),
            tree_dot: TreeDotParams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<ExperimentConfig, String> {
        serde_json::from_str(text).map_err(|e| format!("config does not decode: {e}"))
    }

    /// Checks what serde cannot: ranges and the prime.
    pub fn validate(&self) -> Result<(), String> {
        crate::padic::PrimeContext::get(self.p, self.precision).map_err(|e| e.to_string())?;
        if self.precision > 400 {
            return Err(format!(
                "precision {} above the ceiling of 400",
                self.precision
            ));
        }
        let lp = &self.limits_padic;
        if lp.n_min < 1 || lp.n_max < lp.n_min {
            return Err(format!(
                "limits_padic n range {}..{} is empty or starts below 1",
                lp.n_min, lp.n_max
            ));
        }
        let lr = &self.limits_real;
        if lr.n_min < 1 || lr.n_max < lr.n_min || lr.n_max > 15 {
            return Err(format!(
                "limits_real n range {}..{} must lie in 1..15",
                lr.n_min, lr.n_max
            ));
        }
        if self.tree_dot.radius < 0 || self.tree_dot.radius > 6 {
            return Err(format!(
                "tree_dot radius {} outside 0..6",
                self.tree_dot.radius
            ));
        }
        Ok(())
    }
}
