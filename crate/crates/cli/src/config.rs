//! Run configuration: a TOML document with `[fluid]`, `[grid]`, `[sweep]`,
//! `[synth]`, `[evolve]` and `[output]` tables. Every table and key is optional.

use std::fmt;
use std::path::PathBuf;

use rti_core::equilibrium::{solve_interface_densities, FluidConfig};
use rti_core::law::PressureLaw;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FluidSection {
    pub upper_stiffness: f64,
    pub upper_gamma: f64,
    pub lower_stiffness: f64,
    pub lower_gamma: f64,
    pub gravity: f64,
    pub omega: f64,
    /// Depth `m` of the lower layer.
    pub depth: f64,
    /// Height `l` of the upper layer.
    pub height: f64,
    pub interface_pressure: f64,
}

impl Default for FluidSection {
    fn default() -> Self {
        Self {
            upper_stiffness: 1.0,
            upper_gamma: 1.0,
            lower_stiffness: 2.0,
            lower_gamma: 1.0,
            gravity: 1.0,
            omega: 1.0,
            depth: 1.0,
            height: 1.0,
            interface_pressure: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    /// Elements on each side of the interface.
    pub n_elements: usize,
    /// Resolutions used by refinement studies.
    pub refinements: Vec<usize>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n_elements: 128,
            refinements: vec![64, 128, 256],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub xi_min: f64,
    pub xi_max: f64,
    pub steps: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            xi_min: 1.0,
            xi_max: 60.0,
            steps: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub r3: f64,
    pub r4: f64,
    pub k: usize,
    pub t: Vec<f64>,
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            r3: 10.0,
            r4: 12.0,
            k: 2,
            t: vec![0.0, 0.5, 1.0, 2.0],
            n_r: 64,
            n_theta: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Mode,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveSection {
    pub xi1: f64,
    pub xi2: f64,
    pub dt: f64,
    /// Final time; two e-foldings of the expected growth when absent.
    pub t_final: Option<f64>,
    pub init: InitKind,
    pub seed: u64,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            xi1: 10.0,
            xi2: 0.0,
            dt: 1e-3,
            t_final: None,
            init: InitKind::Mode,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub directory: PathBuf,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub fluid: FluidSection,
    pub grid: GridSection,
    pub sweep: SweepSection,
    pub synth: SynthSection,
    pub evolve: EvolveSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse { line: usize, column: usize, message: String },
    Validation(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse { line, column, message } => {
                write!(f, "parse error at line {line}, column {column}: {message}")
            }
            ConfigError::Validation(list) => write!(f, "invalid configuration: {}", list.join("; ")),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses and validates, reporting every violation at once.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| line_col(text, s.start))
            .unwrap_or((1, 1));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let problems = cfg.violations();
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Validation(problems))
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

impl RunConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the normalized document without the output directory.
    pub fn hash(&self) -> String {
        let mut semantic = self.clone();
        semantic.output.directory = PathBuf::new();
        let digest = Sha256::digest(semantic.to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn fluid_config(&self) -> Result<FluidConfig, Vec<String>> {
        let f = &self.fluid;
        let mut problems = Vec::new();
        let upper = PressureLaw::from_exponent(f.upper_stiffness, f.upper_gamma)
            .map_err(|e| problems.push(format!("upper law: {e}")))
            .ok();
        let lower = PressureLaw::from_exponent(f.lower_stiffness, f.lower_gamma)
            .map_err(|e| problems.push(format!("lower law: {e}")))
            .ok();
        match (upper, lower) {
            (Some(upper), Some(lower)) => {
                let cfg = FluidConfig {
                    upper,
                    lower,
                    gravity: f.gravity,
                    omega: f.omega,
                    depth: f.depth,
                    height: f.height,
                    interface_pressure: f.interface_pressure,
                };
                problems.extend(cfg.violations());
                if problems.is_empty() {
                    if let Err(e) = solve_interface_densities(&cfg) {
                        problems.push(e.to_string());
                    }
                }
                if problems.is_empty() {
                    Ok(cfg)
                } else {
                    Err(problems)
                }
            }
            _ => Err(problems),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = self.fluid_config().err().unwrap_or_default();
        if self.grid.n_elements < 4 {
            out.push("n_elements must be at least 4".into());
        }
        if self.grid.refinements.iter().any(|&n| n < 4) {
            out.push("refinements must be at least 4".into());
        }
        let s = &self.sweep;
        if !(s.xi_min > 0.0 && s.xi_max >= s.xi_min && s.xi_max.is_finite()) {
            out.push("sweep needs 0 < xi_min <= xi_max".into());
        }
        if s.steps == 0 {
            out.push("sweep steps must be positive".into());
        }
        let y = &self.synth;
        if !(y.r3 > 0.0 && y.r4 > y.r3 && y.r4.is_finite()) {
            out.push("synth needs 0 < r3 < r4".into());
        }
        if y.t.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            out.push("synth times must be nonnegative".into());
        }
        if y.n_r == 0 {
            out.push("n_r must be positive".into());
        }
        if y.n_theta == 0 || !y.n_theta.is_multiple_of(2) {
            out.push("n_theta must be positive and even".into());
        }
        let e = &self.evolve;
        if !(e.dt.is_finite() && e.dt > 0.0) {
            out.push("dt must be positive".into());
        }
        if e.t_final.is_some_and(|t| !(t.is_finite() && t > 0.0)) {
            out.push("t_final must be positive".into());
        }
        if !(e.xi1.is_finite() && e.xi2.is_finite()) {
            out.push("xi must be finite".into());
        }
        out
    }
}
