//! Scenario preparation (all validation happens here, before any
//! computation) and execution.

use std::path::Path;
use std::sync::Arc;

use prolong_core::algebra::{product_of_matrix_algebras, semisimplicity_check, Algebra, SEMISIMPLICITY_TOL};
use prolong_core::bundle::{
    extend_algebra_subbundle, extend_frame_bundle, grid_quarter_turn, grid_reflection_x, make_grid_base, AlgebraGerm,
    BaseComplex, ExtensionResult, FrameGerm, GridBox,
};
use prolong_core::embedding::inner_automorphism;
use prolong_core::equivariance::{make_cyclic_action, GroupAction};
use prolong_core::linalg::{real, Matrix};

use crate::config::{ActionKind, BlockSpec, ConfigError, Mode, ScenarioConfig, Side, ZSpec};
use crate::germs::{algebra_germ_maps, frame_germ_maps};
use crate::report::{write_reports, Summary};

/// Process exit statuses of `run`.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const INVARIANT_FAILURE: i32 = 1;
    pub const CONFIG_ERROR: i32 = 2;
    pub const DEGENERATE_STRICT: i32 = 3;
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub base: BaseComplex,
    pub action: GroupAction,
    pub germ: Germ,
}

#[derive(Debug, Clone)]
pub enum Germ {
    Algebra(AlgebraGerm),
    Frames(FrameGerm),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn z_predicate(spec: &ZSpec, rect: GridBox) -> impl Fn(f64, f64) -> bool + '_ {
    move |x, y| match spec {
        ZSpec::All => true,
        ZSpec::Annulus { center, radius, half_width } => {
            ((x - center[0]).hypot(y - center[1]) - radius).abs() <= *half_width
        }
        ZSpec::Disc { center, radius } => (x - center[0]).hypot(y - center[1]) <= *radius,
        ZSpec::Sides { sides } => sides.iter().any(|s| match s {
            Side::Left => x == rect.x_min,
            Side::Right => x == rect.x_max,
            Side::Bottom => y == rect.y_min,
            Side::Top => y == rect.y_max,
        }),
    }
}

fn build_algebra(field: prolong_core::algebra::GroundField, blocks: &[BlockSpec]) -> Result<Arc<Algebra>, ConfigError> {
    if blocks.is_empty() {
        return Err(invalid("an algebra needs at least one block"));
    }
    let blocks: Vec<_> = blocks.iter().map(|b| (b.n, b.ring)).collect();
    Ok(Arc::new(product_of_matrix_algebras(field, &blocks)?))
}

fn generator(rows: &Option<Vec<Vec<f64>>>, size: usize, what: &str) -> Result<Matrix, ConfigError> {
    match rows {
        None => Ok(Matrix::identity(size, size)),
        Some(rows) => {
            if rows.len() != size || rows.iter().any(|r| r.len() != size) {
                return Err(invalid(format!("{what} generator must be {size}×{size}")));
            }
            Ok(Matrix::from_fn(size, size, |i, j| real(rows[i][j])))
        }
    }
}

fn realization_size(alg: &Algebra) -> usize {
    alg.realization().map_or(alg.dim(), |r| r[0].nrows())
}

/// Parses nothing and writes nothing: turns a parsed config into a validated
/// scenario, or reports the first violated requirement.
pub fn prepare(config: &ScenarioConfig, config_dir: &Path) -> Result<Scenario, ConfigError> {
    let b = &config.base;
    let rect = GridBox { x_min: b.rect[0], x_max: b.rect[1], y_min: b.rect[2], y_max: b.rect[3] };
    let base = make_grid_base(b.nx, b.ny, rect, z_predicate(&b.z, rect))?;
    config.options.validate()?;

    let order = match config.action.kind {
        ActionKind::Trivial => 1,
        ActionKind::QuarterTurn => 4,
        ActionKind::ReflectionX => 2,
    };
    let perm = match config.action.kind {
        ActionKind::Trivial => (0..base.vertex_count()).collect(),
        ActionKind::QuarterTurn => grid_quarter_turn(b.nx, b.ny)?,
        ActionKind::ReflectionX => grid_reflection_x(b.nx, b.ny),
    };

    let (germ, action) = match config.mode {
        Mode::Algebra => {
            let spec = config.algebra.as_ref().ok_or_else(|| invalid("algebra mode needs an [algebra] table"))?;
            if config.hilbert.is_some() {
                return Err(invalid("algebra mode does not take a [hilbert] table"));
            }
            let model = build_algebra(spec.field, &spec.model)?;
            let ambient = build_algebra(spec.field, &spec.ambient)?;
            let report = semisimplicity_check(&model, SEMISIMPLICITY_TOL);
            if !report.semisimple {
                return Err(invalid(format!("model fiber is not semisimple (ratio {:e})", report.ratio)));
            }
            let alpha_g = generator(&config.action.source_generator, realization_size(&model), "source")?;
            let beta_g = generator(&config.action.target_generator, realization_size(&ambient), "target")?;
            let alpha = inner_automorphism(&model, &alpha_g)?;
            let beta = inner_automorphism(&ambient, &beta_g)?;
            let action = make_cyclic_action(order, &perm, &alpha, &beta, Some((&model, &ambient)))?;
            let maps = algebra_germ_maps(&config.germ, &base, &model, &ambient, config_dir)?;
            let germ = AlgebraGerm { model, ambient, maps, star_mode: spec.star_mode };
            germ.validate(&base)?;
            (Germ::Algebra(germ), action)
        }
        Mode::Hilbert => {
            let spec = config.hilbert.ok_or_else(|| invalid("hilbert mode needs a [hilbert] table"))?;
            if config.algebra.is_some() {
                return Err(invalid("hilbert mode does not take an [algebra] table"));
            }
            let alpha = generator(&config.action.source_generator, spec.rank, "source")?;
            let beta = generator(&config.action.target_generator, spec.ambient_dim, "target")?;
            let action = make_cyclic_action(order, &perm, &alpha, &beta, None)?;
            let frames = frame_germ_maps(&config.germ, &base, spec.rank, spec.ambient_dim, config_dir)?;
            let germ = FrameGerm { rank: spec.rank, ambient_dim: spec.ambient_dim, frames };
            germ.validate(&base)?;
            (Germ::Frames(germ), action)
        }
    };
    base.check_action(&action)?;
    Ok(Scenario { config: config.clone(), base, action, germ })
}

/// Loads and validates a config file; relative germ tables resolve against
/// the file's directory.
pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let config = ScenarioConfig::load(path)?;
    prepare(&config, path.parent().unwrap_or(Path::new(".")))
}

/// Runs the configured pipeline.
pub fn execute(scenario: &Scenario) -> prolong_core::Result<ExtensionResult> {
    let opts = &scenario.config.options;
    match &scenario.germ {
        Germ::Algebra(g) => extend_algebra_subbundle(&scenario.base, g, &scenario.action, opts),
        Germ::Frames(g) => extend_frame_bundle(&scenario.base, g, &scenario.action, opts),
    }
}

/// Exit status of a finished run: failed invariants first, then a
/// degenerate `W = Z` (distinguished only in strict mode).
pub fn exit_status(result: &ExtensionResult, strict: bool) -> i32 {
    if !result.all_checks_passed() {
        exit::INVARIANT_FAILURE
    } else if result.is_degenerate() {
        if strict {
            exit::DEGENERATE_STRICT
        } else {
            exit::INVARIANT_FAILURE
        }
    } else {
        exit::SUCCESS
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: Summary,
    pub result: ExtensionResult,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("pipeline failed: {0}")]
    Pipeline(#[from] prolong_core::Error),
    #[error("cannot write reports to {path}: {message}")]
    Write { path: std::path::PathBuf, message: String },
}

/// Runs a validated scenario and writes `diagnostics.csv`, `edges.csv` and
/// `summary.json` into `out_dir`.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunOutcome, RunError> {
    let result = execute(scenario)?;
    let exit_code = exit_status(&result, scenario.config.strict);
    let summary = Summary::new(&scenario.config, &result, exit_code);
    write_reports(out_dir, &result, &summary)
        .map_err(|e| RunError::Write { path: out_dir.to_path_buf(), message: e.to_string() })?;
    Ok(RunOutcome { exit_code, summary, result })
}
