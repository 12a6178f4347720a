//! Scenario configuration (TOML) and run manifests.

use std::path::Path;

use serde::{Deserialize, Serialize};
use snl_core::{Exponent, MixedExponent, TensorGrid};

use crate::error::{Error, Result};

/// An exponent written either as an integer or as text (`"7/2"`, `"inf"`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentValue {
    Integer(i64),
    Text(String),
}

impl ExponentValue {
    pub fn resolve(&self, field: &str) -> Result<Exponent> {
        match self {
            ExponentValue::Integer(n) => Exponent::integer(*n),
            ExponentValue::Text(s) => s.parse(),
        }
        .map_err(|e| Error::field(field, e.to_string()))
    }
}

fn exponent_list(values: &[ExponentValue], field: &str) -> Result<Vec<Exponent>> {
    values.iter().enumerate().map(|(i, v)| v.resolve(&format!("{field}[{i}]"))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub extents: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentSpec {
    pub p: Vec<ExponentValue>,
    pub q: ExponentValue,
    #[serde(default = "default_threshold")]
    pub threshold: u32,
}

fn default_threshold() -> u32 {
    1
}

impl ExponentSpec {
    pub fn resolve(&self, field: &str) -> Result<MixedExponent> {
        let p = exponent_list(&self.p, &format!("{field}.p"))?;
        let q = self.q.resolve(&format!("{field}.q"))?;
        MixedExponent::new(p, q).map_err(|e| Error::field(field, e.to_string()))
    }
}

/// One view for `snl check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub name: String,
    pub p: Vec<ExponentValue>,
    pub q: ExponentValue,
    #[serde(default = "default_thresholds")]
    pub thresholds: Vec<u32>,
}

fn default_thresholds() -> Vec<u32> {
    vec![1]
}

/// Coefficient expressions; see [`crate::expr`]. Matrices are row-major.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficients {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<String>>,
    /// `a` directly; otherwise `a = sigma sigma^T`, otherwise the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diffusion: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    /// Integrand of the Krylov functional.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrand: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSpec {
    pub horizon: f64,
    pub steps: usize,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self { horizon: 1.0, steps: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { tol: 1e-9, max_iterations: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdeSpec {
    /// Size of the random band-limited source family.
    pub family: usize,
    /// Largest wavenumber per axis in the family.
    pub max_mode: i32,
    /// Fourier modes per family member.
    pub modes: usize,
    /// Seed of the family.
    pub family_seed: u64,
    /// Grid refinement factors for `regularity`.
    pub refinements: Vec<usize>,
    pub horizons: Vec<f64>,
    /// Bessel smoothness indices for `decay`.
    pub alphas: Vec<f64>,
    pub sup: bool,
    pub grad_sup: bool,
    /// Run the built-in manufactured-solution study in `solve`.
    pub manufactured: bool,
    pub spatial_counts: Vec<usize>,
    pub temporal_count: usize,
    pub temporal_steps: Vec<usize>,
    /// Write `.gfd` dumps of solution fields.
    pub dump: bool,
}

impl Default for PdeSpec {
    fn default() -> Self {
        Self {
            family: 20,
            max_mode: 3,
            modes: 4,
            family_seed: 0,
            refinements: vec![1, 2],
            horizons: snl_core::parabolic::DECAY_HORIZONS.to_vec(),
            alphas: vec![0.0],
            sup: false,
            grad_sup: false,
            manufactured: false,
            spatial_counts: vec![16, 32, 64],
            temporal_count: 64,
            temporal_steps: vec![16, 32, 64],
            dump: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZvonkinSpec {
    pub eta: f64,
    pub steps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mollify: Option<u32>,
    /// Shrink the horizon until certified instead of building at `time.horizon`.
    pub shrink: bool,
    /// Write the `.gfd` bundle (u, phi, grad phi, psi).
    pub export: bool,
}

impl Default for ZvonkinSpec {
    fn default() -> Self {
        Self { eta: 0.5, steps: 64, mollify: None, shrink: true, export: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { start: u64, count: u64 },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Range { start, count } => (*start..start + count).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SdeSpec {
    pub x0: Vec<f64>,
    /// Base seed of Monte-Carlo commands; path `i` uses key `(seed, i)`.
    pub seed: u64,
    /// Seeds of `couple` and `simulate`.
    pub seeds: SeedSpec,
    pub paths: usize,
    pub level: u32,
    pub levels: Vec<u32>,
    pub cap: f64,
    /// Cap sweep for `girsanov` and `khasminskii`; empty means `[cap]`.
    pub caps: Vec<f64>,
    pub r_max: f64,
    pub kappa: f64,
    /// `euler` or `zvonkin` (for `simulate`).
    pub method: String,
}

impl Default for SdeSpec {
    fn default() -> Self {
        Self {
            x0: Vec::new(),
            seed: 0,
            seeds: SeedSpec::Range { start: 0, count: 4 },
            paths: 10_000,
            level: 10,
            levels: vec![8, 14],
            cap: 1e3,
            caps: Vec::new(),
            r_max: 1e2,
            kappa: 1.0,
            method: "euler".into(),
        }
    }
}

impl SdeSpec {
    pub fn caps(&self) -> Vec<f64> {
        if self.caps.is_empty() { vec![self.cap] } else { self.caps.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckSpec>,
    #[serde(default)]
    pub coefficients: Coefficients,
    #[serde(default)]
    pub time: TimeSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub pde: PdeSpec,
    #[serde(default)]
    pub zvonkin: ZvonkinSpec,
    #[serde(default)]
    pub sde: SdeSpec,
}

/// Run metadata written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestInfo {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub created_unix: u64,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub manifest: ManifestInfo,
    pub config: ExperimentConfig,
}

impl Manifest {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }
}

impl ExperimentConfig {
    /// Parse a scenario file, or the `config` table of a manifest.
    pub fn parse(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let cfg: Self = if table.contains_key("manifest") {
            Manifest::parse(text)?.config
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.context(path.display().to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Spatial dimension: from the grid, else from `sde.x0`.
    pub fn dim(&self) -> Result<usize> {
        if let Some(g) = &self.grid {
            return Ok(g.extents.len());
        }
        if !self.sde.x0.is_empty() {
            return Ok(self.sde.x0.len());
        }
        Err(Error::field("grid", "either [grid] or sde.x0 is required to fix the dimension"))
    }

    pub fn tensor_grid(&self) -> Result<TensorGrid> {
        let g = self.grid.as_ref().ok_or_else(|| Error::field("grid", "missing [grid] table"))?;
        TensorGrid::new(&g.extents, &g.counts).map_err(|e| Error::field("grid", e.to_string()))
    }

    pub fn exponent(&self) -> Result<MixedExponent> {
        self.exponents.as_ref().ok_or_else(|| Error::field("exponents", "missing [exponents] table"))?.resolve("exponents")
    }

    pub fn x0(&self) -> Result<Vec<f64>> {
        let d = self.dim()?;
        if self.sde.x0.len() != d {
            return Err(Error::field("sde.x0", format!("expected {d} entries, got {}", self.sde.x0.len())));
        }
        Ok(self.sde.x0.clone())
    }

    fn validate(&self) -> Result<()> {
        if self.scenario.trim().is_empty() {
            return Err(Error::field("scenario", "must not be empty"));
        }
        if let Some(e) = &self.exponents {
            e.resolve("exponents")?;
        }
        for (i, c) in self.checks.iter().enumerate() {
            let field = format!("checks[{i}]");
            exponent_list(&c.p, &format!("{field}.p"))?;
            c.q.resolve(&format!("{field}.q"))?;
        }
        if self.grid.is_some() {
            self.tensor_grid()?;
        }
        if !(self.time.horizon > 0.0 && self.time.horizon.is_finite()) {
            return Err(Error::field("time.horizon", "must be positive and finite"));
        }
        if self.time.steps == 0 {
            return Err(Error::field("time.steps", "must be at least 1"));
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iterations == 0 {
            return Err(Error::field("solver", "tol must be positive and max_iterations at least 1"));
        }
        if self.sde.levels.len() != 2 || self.sde.levels[0] >= self.sde.levels[1] {
            return Err(Error::field("sde.levels", "expected [lo, hi] with lo < hi"));
        }
        if !(self.sde.cap > 0.0) || self.sde.caps.iter().any(|c| !(*c > 0.0)) {
            return Err(Error::field("sde.cap", "caps must be positive"));
        }
        if !matches!(self.sde.method.as_str(), "euler" | "zvonkin") {
            return Err(Error::field("sde.method", format!("unknown method '{}'; expected euler or zvonkin", self.sde.method)));
        }
        // expressions are validated against the dimension when one is fixed
        if let Ok(d) = self.dim() {
            crate::coefficients::Resolved::new(self, d)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
scenario = "demo"

[grid]
extents = [4.0]
counts = [64]

[exponents]
p = ["7/2"]
q = "inf"

[coefficients]
drift = ["abs(x - 2)^(-0.25) * box(x - 2, 1)"]

[sde]
x0 = [2.5]
seeds = { start = 0, count = 200 }
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(cfg.time.steps, 64);
        assert_eq!(cfg.sde.seeds.seeds().len(), 200);
        assert_eq!(cfg.exponent().unwrap().check_subcritical(1).unwrap().pass, true);
    }

    #[test]
    fn manifest_round_trip() {
        let cfg = ExperimentConfig::parse(SAMPLE).unwrap();
        let m = Manifest {
            manifest: ManifestInfo {
                tool: "snl".into(),
                version: "0".into(),
                command: "couple".into(),
                created_unix: 1,
                outputs: vec!["couple.csv".into()],
            },
            config: cfg.clone(),
        };
        let text = m.to_toml().unwrap();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
        assert_eq!(ExperimentConfig::parse(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn unknown_fields_and_tokens_are_rejected() {
        let err = ExperimentConfig::parse("scenario = \"x\"\nbogus = 1\n").unwrap_err().to_string();
        assert!(err.contains("bogus") && err.contains("line 2"), "{err}");
        let bad = SAMPLE.replace("box(x - 2, 1)", "foo(x)");
        let err = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("coefficients.drift[0]") && err.contains("foo"), "{err}");
        let bad = SAMPLE.replace("\"7/2\"", "\"1\"");
        assert!(ExperimentConfig::parse(&bad).unwrap_err().to_string().contains("exponents.p[0]"));
    }
}
