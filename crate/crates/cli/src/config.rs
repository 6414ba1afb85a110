//! Scenario configuration: one TOML document per scenario.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use prolong_core::algebra::{DivisionRing, GroundField};
use prolong_core::bundle::ExtensionOptions;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

impl From<prolong_core::Error> for ConfigError {
    fn from(e: prolong_core::Error) -> Self {
        ConfigError::Invalid(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// subalgebra bundles: Shepard, unitalize, average, rectify
    Algebra,
    /// Hilbert subbundles given by frames: Shepard, average, polar repair
    Hilbert,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub mode: Mode,
    /// report `W = Z` with its own exit status
    #[serde(default)]
    pub strict: bool,
    pub base: BaseSpec,
    pub algebra: Option<AlgebraSpec>,
    pub hilbert: Option<HilbertSpec>,
    pub germ: GermSpec,
    #[serde(default)]
    pub action: ActionSpec,
    #[serde(default)]
    pub options: ExtensionOptions,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub nx: usize,
    pub ny: usize,
    /// `[x_min, x_max, y_min, y_max]`
    #[serde(rename = "box")]
    pub rect: [f64; 4],
    pub z: ZSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

/// Predicate selecting the closed subset `Z` of grid vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ZSpec {
    All,
    /// `| |p − center| − radius | ≤ half_width`
    Annulus {
        center: [f64; 2],
        radius: f64,
        half_width: f64,
    },
    /// `|p − center| ≤ radius`
    Disc {
        center: [f64; 2],
        radius: f64,
    },
    /// vertices on the listed sides of the box
    Sides {
        sides: Vec<Side>,
    },
}

/// One matrix-algebra block `M_n(D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockSpec {
    pub n: usize,
    pub ring: DivisionRing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    pub field: GroundField,
    pub model: Vec<BlockSpec>,
    pub ambient: Vec<BlockSpec>,
    #[serde(default)]
    pub star_mode: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HilbertSpec {
    pub rank: usize,
    pub ambient_dim: usize,
}

/// Named germ generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GermSpec {
    /// Model `ℂ²` (or `ℝ²`) into `M_{2m}`: `p₁ ↦ I_m ⊗ P(θ)`, `p₂ ↦ I_m ⊗ (I − P(θ))`,
    /// with `P(θ)` the projection onto `(cos θ, sin θ)` and `θ` the polar
    /// angle about `center`.
    RotatedProjection {
        #[serde(default)]
        center: [f64; 2],
    },
    /// Model `ℂ²` into `M_{2m}`: `p₁ ↦ I_m ⊕ 0` left of `split_x` and
    /// `p₁ ↦ 0 ⊕ I_m` right of it.
    SplitProjection {
        #[serde(default)]
        split_x: f64,
    },
    /// Rank-1 frames `(−sin θ, cos θ)` in the plane: the tangent line of the
    /// circle through the vertex about `center`.
    TangentLine {
        #[serde(default)]
        center: [f64; 2],
    },
    /// The same map at every vertex: a block-diagonal embedding
    /// `a ↦ ⊕ a_b ⊗ I_{m_b}` given by `layout = [[n_b, m_b], …]` (identity when
    /// omitted and model = ambient), or the first `rank` standard basis
    /// vectors in Hilbert mode.
    Constant { layout: Option<Vec<[usize; 2]>> },
    /// Model = ambient = `M_n`; conjugation by `I + ε (x S + y Sᵀ)` with `S`
    /// the upper shift.
    PerturbedIdentity { epsilon: f64 },
    /// Maps read from a JSON table `[{"vertex": v, "map": {...}}, …]`; the
    /// path is relative to the config file.
    Table { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionKind {
    #[default]
    Trivial,
    /// `ℤ/4` rotating a square grid by quarter turns
    QuarterTurn,
    /// `ℤ/2` reflecting the grid in its vertical center line
    ReflectionX,
}

/// Group action on base and fibers. Generators are real matrices: in algebra
/// mode they conjugate the matrix realizations of model and ambient, in
/// Hilbert mode they act on `ℂ^rank` and `ℂ^N` directly. Omitted generators
/// act trivially.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    #[serde(default)]
    pub kind: ActionKind,
    pub source_generator: Option<Vec<Vec<f64>>>,
    pub target_generator: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// report directory; `reports/<name>` when omitted
    pub dir: Option<PathBuf>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_toml_str(&text)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.dir.clone().unwrap_or_else(|| Path::new("reports").join(&self.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        name = "tiny"
        mode = "hilbert"
        [base]
        nx = 3
        ny = 3
        box = [-1.0, 1.0, -1.0, 1.0]
        z = { kind = "all" }
        [hilbert]
        rank = 1
        ambient_dim = 2
        [germ]
        kind = "constant"
    "#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ScenarioConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(c.mode, Mode::Hilbert);
        assert!(!c.strict);
        assert_eq!(c.action.kind, ActionKind::Trivial);
        assert_eq!(c.options, ExtensionOptions::default());
        assert_eq!(c.output_dir(), Path::new("reports/tiny"));
        assert_eq!(c.germ, GermSpec::Constant { layout: None });
    }

    #[test]
    fn parse_errors_carry_a_location() {
        let err = ScenarioConfig::from_toml_str("name = \"x\"\nmode = 3\n").unwrap_err();
        let text = err.to_string();
        assert!(text.contains("line 2"), "{text}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let bad = MINIMAL.replace("rank = 1", "rank = 1\nrnak = 2");
        assert!(matches!(ScenarioConfig::from_toml_str(&bad), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn options_override() {
        let text = format!("{MINIMAL}\n[options]\nmax_iter = 5\nshepard_k = 2\n");
        let c = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(c.options.max_iter, 5);
        assert_eq!(c.options.shepard_k, 2);
        assert_eq!(c.options.rectify_tol, 1e-12);
    }
}
