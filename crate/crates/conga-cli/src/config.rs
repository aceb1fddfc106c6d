//! Run configuration.
//!
//! A configuration is a flat TOML table. Values are layered, later layers
//! winning: built-in defaults, the defaults of the selected case, the
//! `--config` file, then `--override key=value` pairs. See the README for the
//! list of keys.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::registry::find_case;
use crate::CliError;

/// Values shared by every case unless the case or the user says otherwise.
const GLOBAL_DEFAULTS: &str = r#"
degree = 3
cells = 8
alpha = 1.0
alpha1 = 1.0
omega = 1.0
bc = "homogeneous"
cfl = 0.8
source_modes = ["dual_tilde_pi1"]
solution = "sine"
sigma = 0.02
resolution = 21
n_eigen = 8
sweep_cells = [4, 8, 16]
dump_matrices = false
"#;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcName {
    Homogeneous,
    Inhomogeneous,
}

impl From<BcName> for conga::derham::BoundaryCondition {
    fn from(b: BcName) -> Self {
        match b {
            BcName::Homogeneous => Self::Homogeneous,
            BcName::Inhomogeneous => Self::Inhomogeneous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceModeName {
    PrimalPi1,
    L2Proj,
    DualTildePi1,
}

impl SourceModeName {
    pub fn label(self) -> &'static str {
        match self {
            Self::PrimalPi1 => "primal_pi1",
            Self::L2Proj => "l2_proj",
            Self::DualTildePi1 => "dual_tilde_pi1",
        }
    }
}

impl From<SourceModeName> for conga::solvers::SourceMode {
    fn from(m: SourceModeName) -> Self {
        match m {
            SourceModeName::PrimalPi1 => Self::PrimalPi1,
            SourceModeName::L2Proj => Self::L2Proj,
            SourceModeName::DualTildePi1 => Self::DualTildePi1,
        }
    }
}

/// Manufactured solution of `poisson_hom_manufactured`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionName {
    /// `sin πx sin πy`, vanishing on the unit square boundary.
    Sine,
    /// `x(1−x) y(1−y)`, a spline on any affine split of the unit square.
    Polynomial,
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: String,
    /// Built-in domain name; ignored when `domain_file` is set.
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_file: Option<PathBuf>,
    pub degree: usize,
    pub cells: usize,
    /// Gauss points per cell and direction for mass and moment integrals;
    /// `degree + 1` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<usize>,
    /// Jump stabilization, also `α⁰` in magnetostatics.
    pub alpha: f64,
    /// `α¹` in magnetostatics.
    pub alpha1: f64,
    pub omega: f64,
    pub bc: BcName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_time: Option<f64>,
    /// Takes precedence over `final_time`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    pub cfl: f64,
    pub source_modes: Vec<SourceModeName>,
    pub solution: SolutionName,
    /// Width of the pulse or of the dipole current.
    pub sigma: f64,
    /// Samples per patch and direction in field grids.
    pub resolution: usize,
    pub n_eigen: usize,
    pub sweep_cells: Vec<usize>,
    pub dump_matrices: bool,
    /// Excluded from the hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Hex SHA-256 of the canonical JSON form without the output location,
    /// plus the domain file contents when one is used.
    pub fn hash(&self) -> Result<String, CliError> {
        let mut c = self.clone();
        c.output = None;
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(&c).expect("config serializes"));
        if let Some(path) = &self.domain_file {
            let text = std::fs::read(path).map_err(|source| CliError::Read { path: path.clone(), source })?;
            h.update(&text);
        }
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(1..=8).contains(&self.degree) {
            return bad(format!("degree must lie in 1..=8, got {}", self.degree));
        }
        if self.cells == 0 {
            return bad("cells must be positive".into());
        }
        if matches!(self.quadrature, Some(0)) {
            return bad("quadrature must be positive".into());
        }
        if self.alpha == 0.0 || !self.alpha.is_finite() || self.alpha1 == 0.0 || !self.alpha1.is_finite() {
            return bad("alpha and alpha1 must be finite and nonzero".into());
        }
        if !self.omega.is_finite() {
            return bad("omega must be finite".into());
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad(format!("cfl must lie in (0, 1), got {}", self.cfl));
        }
        if let Some(t) = self.final_time {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("final_time must be positive, got {t}"));
            }
        }
        if self.sigma.is_nan() || self.sigma <= 0.0 {
            return bad("sigma must be positive".into());
        }
        if self.resolution < 2 {
            return bad("resolution must be at least 2".into());
        }
        if self.source_modes.is_empty() {
            return bad("source_modes must not be empty".into());
        }
        if self.sweep_cells.is_empty() || self.sweep_cells.windows(2).any(|w| w[1] <= w[0]) || self.sweep_cells[0] == 0 {
            return bad("sweep_cells must be a strictly increasing list of positive integers".into());
        }
        Ok(())
    }
}

/// Parses `key=value`; the value is read as a TOML value and falls back to
/// a bare string.
pub fn parse_override(s: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override '{s}' is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("override '{s}' has an empty key")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key.to_string(), value))
}

fn parse_table(text: &str, origin: &str) -> Result<Table, CliError> {
    text.parse::<Table>().map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

/// Builds the layered configuration. `file` is the optional `--config`
/// path; a relative `domain_file` inside it is taken relative to the file.
pub fn load_config(file: Option<&Path>, overrides: &[String]) -> Result<RunConfig, CliError> {
    let mut user = Table::new();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
        user = parse_table(&text, &path.display().to_string())?;
        if let Some(Value::String(df)) = user.get("domain_file") {
            let df = Path::new(df);
            if df.is_relative() {
                let base = path.parent().unwrap_or(Path::new(""));
                let joined = base.join(df).to_string_lossy().into_owned();
                user.insert("domain_file".into(), Value::String(joined));
            }
        }
    }
    for o in overrides {
        let (k, v) = parse_override(o)?;
        user.insert(k, v);
    }
    let case = match user.get("case") {
        Some(Value::String(c)) => c.clone(),
        Some(_) => return Err(CliError::Config("case must be a string".into())),
        None => return Err(CliError::Config("no case given; set `case` in the config or pass --override case=NAME".into())),
    };
    let info = find_case(&case)?;
    let mut merged = parse_table(GLOBAL_DEFAULTS, "built-in defaults")?;
    merged.extend(parse_table(info.defaults, "case defaults")?);
    merged.extend(user);
    let cfg: RunConfig = Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(e.message().to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(overrides: &[&str]) -> Result<RunConfig, CliError> {
        let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        load_config(None, &o)
    }

    #[test]
    fn overrides_parse_as_toml_values() {
        assert_eq!(parse_override("cells=16").unwrap(), ("cells".into(), Value::Integer(16)));
        assert_eq!(parse_override("alpha = 2.5").unwrap().1, Value::Float(2.5));
        assert_eq!(parse_override("domain=annulus").unwrap().1, Value::String("annulus".into()));
        assert!(parse_override("nokey").is_err());
        assert!(parse_override("=3").is_err());
    }

    #[test]
    fn layers_apply_in_order() {
        let c = cfg(&["case=poisson_inhom_sincos"]).unwrap();
        assert_eq!(c.domain, "two_patch_square");
        assert_eq!(c.degree, 3);
        let c = cfg(&["case=poisson_inhom_sincos", "degree=2", "domain=square_2x2"]).unwrap();
        assert_eq!((c.degree, c.domain.as_str()), (2, "square_2x2"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(cfg(&[]), Err(CliError::Config(_))));
        assert!(matches!(cfg(&["case=nope"]), Err(CliError::Config(_))));
        assert!(matches!(cfg(&["case=poisson_inhom_sincos", "typo_key=1"]), Err(CliError::Config(_))));
        assert!(matches!(cfg(&["case=poisson_inhom_sincos", "cfl=1.5"]), Err(CliError::Config(_))));
        assert!(matches!(cfg(&["case=poisson_inhom_sincos", "sweep_cells=[8, 4]"]), Err(CliError::Config(_))));
        assert!(matches!(cfg(&["case=poisson_inhom_sincos", "bc=\"sideways\""]), Err(CliError::Config(_))));
    }

    #[test]
    fn hash_ignores_output_only() {
        let a = cfg(&["case=poisson_inhom_sincos"]).unwrap();
        let mut b = a.clone();
        b.output = Some("elsewhere".into());
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        b.cells = 16;
        assert_ne!(a.hash().unwrap(), b.hash().unwrap());
        assert_eq!(a.hash().unwrap().len(), 64);
    }
}
