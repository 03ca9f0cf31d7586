//! Run configuration: a flat `key = value` format under bracketed section
//! headers. Sections and assignments may share a line or spread over many;
//! `#` starts a comment. Unknown sections, unknown keys, malformed tokens
//! and out-of-range values are rejected with the offending line number.
//!
//! ```text
//! [surface] kind=ellipsoid r1=1 r2=1.4142
//! [task]    name=orbit-maslov
//! ```

use std::f64::consts::PI;
use std::fmt;

use reeb_lab_core::dynamics::DEFAULT_ORBIT_SAMPLES;
use reeb_lab_core::filling::{DEFAULT_GRID_R, DEFAULT_GRID_THETA, DEFAULT_TRANSVERSE_TOL};
use reeb_lab_core::knot::{DEFAULT_LINK_QUAD, DEFAULT_PUSHOFF};

/// A configuration problem: what went wrong and, when it is tied to a
/// specific assignment, on which line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConfigError { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        ConfigError { line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Sphere,
    Ellipsoid,
    PerturbedEllipsoid,
}

impl SurfaceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SurfaceKind::Sphere => "sphere",
            SurfaceKind::Ellipsoid => "ellipsoid",
            SurfaceKind::PerturbedEllipsoid => "perturbed-ellipsoid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    SurfacePinching,
    OrbitFind,
    OrbitMaslov,
    KnotSl,
    KnotCurvature,
    FillLinear,
    FillEmbedded,
    VerifyThm1,
    VerifyThm2,
    MaslovAxioms,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::SurfacePinching => "surface-pinching",
            Task::OrbitFind => "orbit-find",
            Task::OrbitMaslov => "orbit-maslov",
            Task::KnotSl => "knot-sl",
            Task::KnotCurvature => "knot-curvature",
            Task::FillLinear => "fill-linear",
            Task::FillEmbedded => "fill-embedded",
            Task::VerifyThm1 => "verify-thm1",
            Task::VerifyThm2 => "verify-thm2",
            Task::MaslovAxioms => "maslov-axioms",
        }
    }

    fn from_name(name: &str) -> Option<Task> {
        Some(match name {
            "surface-pinching" => Task::SurfacePinching,
            "orbit-find" => Task::OrbitFind,
            "orbit-maslov" => Task::OrbitMaslov,
            "knot-sl" => Task::KnotSl,
            "knot-curvature" => Task::KnotCurvature,
            "fill-linear" => Task::FillLinear,
            "fill-embedded" => Task::FillEmbedded,
            "verify-thm1" => Task::VerifyThm1,
            "verify-thm2" => Task::VerifyThm2,
            "maslov-axioms" => Task::MaslovAxioms,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnotKind {
    /// Great-circle Hopf fiber on the round sphere.
    Hopf,
    /// The (p, q) torus orbit on its resonant ellipsoid.
    Torus,
    /// Closed Reeb orbit found on the configured surface.
    Orbit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillMode {
    Linear,
    Embedded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FillDirection {
    /// Scan for a two-arc height direction.
    Auto,
    Fixed([f64; 4]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceConfig {
    pub kind: SurfaceKind,
    pub r1: f64,
    pub r2: f64,
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitConfig {
    /// Initial guess, radially projected onto the surface by the finder.
    pub x0: [f64; 4],
    /// Period guess; when unset, π·r1² for builtin quadrics and π otherwise.
    pub t0: Option<f64>,
    pub tol: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnotConfig {
    pub kind: KnotKind,
    pub p: u64,
    pub q: u64,
    pub r1: f64,
    /// Directions scanned when minimizing crookedness.
    pub scan_dirs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaslovConfig {
    pub n_dirs: usize,
    pub tol: f64,
    /// Paths exercised by the reversal axiom check.
    pub n_paths: usize,
    /// Symmetric matrices exercised by the signature axiom check.
    pub n_matrices: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkingConfig {
    pub epsilon: f64,
    pub n_quad: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FillingConfig {
    pub mode: FillMode,
    pub n_r: usize,
    pub n_theta: usize,
    pub split: (f64, f64),
    pub direction: FillDirection,
    /// Directions scanned when `direction = auto`.
    pub n_dirs: usize,
    pub transverse_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinchingConfig {
    pub n_samples: usize,
}

/// File names for the dense dumps, relative to the dump directory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputConfig {
    pub orbit_csv: Option<String>,
    pub knot_csv: Option<String>,
    pub disc_csv: Option<String>,
    pub pinching_csv: Option<String>,
    pub intersections_json: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub surface: SurfaceConfig,
    pub task: Task,
    pub orbit: OrbitConfig,
    pub knot: KnotConfig,
    pub maslov: MaslovConfig,
    pub linking: LinkingConfig,
    pub filling: FillingConfig,
    pub pinching: PinchingConfig,
    pub output: OutputConfig,
}

/// The defaults with the task still unset; `parse_config` fills it in.
struct Builder {
    cfg: RunConfig,
    task: Option<Task>,
}

impl Builder {
    fn new() -> Builder {
        Builder {
            cfg: RunConfig {
                surface: SurfaceConfig {
                    kind: SurfaceKind::Sphere,
                    r1: 1.0,
                    r2: 1.0,
                    eps: None,
                },
                task: Task::OrbitFind, // placeholder until the task is parsed
                orbit: OrbitConfig {
                    x0: [1.0, 0.0, 0.0, 0.0],
                    t0: None,
                    tol: 1e-10,
                    n_samples: DEFAULT_ORBIT_SAMPLES,
                },
                knot: KnotConfig {
                    kind: KnotKind::Orbit,
                    p: 2,
                    q: 3,
                    r1: 1.0,
                    scan_dirs: 64,
                },
                maslov: MaslovConfig {
                    n_dirs: 64,
                    tol: 1e-5,
                    n_paths: 20,
                    n_matrices: 50,
                },
                linking: LinkingConfig {
                    epsilon: DEFAULT_PUSHOFF,
                    n_quad: DEFAULT_LINK_QUAD,
                },
                filling: FillingConfig {
                    mode: FillMode::Linear,
                    n_r: DEFAULT_GRID_R,
                    n_theta: DEFAULT_GRID_THETA,
                    split: (0.0, PI),
                    direction: FillDirection::Auto,
                    n_dirs: 64,
                    transverse_tol: DEFAULT_TRANSVERSE_TOL,
                },
                pinching: PinchingConfig { n_samples: 2048 },
                output: OutputConfig::default(),
            },
            task: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Surface,
    Task,
    Orbit,
    Knot,
    Maslov,
    Linking,
    Filling,
    Pinching,
    Output,
}

impl Section {
    fn from_name(name: &str, line: usize) -> Result<Section, ConfigError> {
        Ok(match name {
            "surface" => Section::Surface,
            "task" => Section::Task,
            "orbit" => Section::Orbit,
            "knot" => Section::Knot,
            "maslov" => Section::Maslov,
            "linking" => Section::Linking,
            "filling" => Section::Filling,
            "pinching" => Section::Pinching,
            "output" => Section::Output,
            other => {
                return Err(ConfigError::at(line, format!("unknown section [{other}]")));
            }
        })
    }

    fn name(&self) -> &'static str {
        match self {
            Section::Surface => "surface",
            Section::Task => "task",
            Section::Orbit => "orbit",
            Section::Knot => "knot",
            Section::Maslov => "maslov",
            Section::Linking => "linking",
            Section::Filling => "filling",
            Section::Pinching => "pinching",
            Section::Output => "output",
        }
    }
}

fn parse_f64(sec: Section, key: &str, value: &str, line: usize) -> Result<f64, ConfigError> {
    let x: f64 = value.parse().map_err(|_| {
        ConfigError::at(line, format!("{}.{key}: expected a number, got '{value}'", sec.name()))
    })?;
    if !x.is_finite() {
        return Err(ConfigError::at(
            line,
            format!("{}.{key}: value must be finite, got '{value}'", sec.name()),
        ));
    }
    Ok(x)
}

fn parse_positive(sec: Section, key: &str, value: &str, line: usize) -> Result<f64, ConfigError> {
    let x = parse_f64(sec, key, value, line)?;
    if x <= 0.0 {
        return Err(ConfigError::at(
            line,
            format!("{}.{key}: value must be positive, got {value}", sec.name()),
        ));
    }
    Ok(x)
}

fn parse_count(
    sec: Section,
    key: &str,
    value: &str,
    min: usize,
    line: usize,
) -> Result<usize, ConfigError> {
    let n: usize = value.parse().map_err(|_| {
        ConfigError::at(line, format!("{}.{key}: expected an integer, got '{value}'", sec.name()))
    })?;
    if n < min {
        return Err(ConfigError::at(
            line,
            format!("{}.{key}: value must be at least {min}, got {n}", sec.name()),
        ));
    }
    Ok(n)
}

fn parse_vec4(sec: Section, key: &str, value: &str, line: usize) -> Result<[f64; 4], ConfigError> {
    let parts: Vec<&str> = value.split(',').collect();
    if parts.len() != 4 {
        return Err(ConfigError::at(
            line,
            format!(
                "{}.{key}: expected four comma-separated numbers, got '{value}'",
                sec.name()
            ),
        ));
    }
    let mut out = [0.0; 4];
    for (slot, part) in out.iter_mut().zip(parts) {
        *slot = parse_f64(sec, key, part, line)?;
    }
    Ok(out)
}

fn assign(b: &mut Builder, sec: Section, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
    let unknown = || ConfigError::at(line, format!("unknown key {}.{key}", sec.name()));
    match sec {
        Section::Surface => match key {
            "kind" => {
                b.cfg.surface.kind = match value {
                    "sphere" => SurfaceKind::Sphere,
                    "ellipsoid" => SurfaceKind::Ellipsoid,
                    "perturbed-ellipsoid" => SurfaceKind::PerturbedEllipsoid,
                    other => {
                        return Err(ConfigError::at(
                            line,
                            format!(
                                "surface.kind: expected sphere | ellipsoid | perturbed-ellipsoid, got '{other}'"
                            ),
                        ));
                    }
                }
            }
            "r1" => b.cfg.surface.r1 = parse_positive(sec, key, value, line)?,
            "r2" => b.cfg.surface.r2 = parse_positive(sec, key, value, line)?,
            "eps" => b.cfg.surface.eps = Some(parse_f64(sec, key, value, line)?),
            _ => return Err(unknown()),
        },
        Section::Task => match key {
            "name" => {
                b.task = Some(Task::from_name(value).ok_or_else(|| {
                    ConfigError::at(line, format!("task.name: unknown task '{value}'"))
                })?);
            }
            _ => return Err(unknown()),
        },
        Section::Orbit => match key {
            "x0" => b.cfg.orbit.x0 = parse_vec4(sec, key, value, line)?,
            "t0" => b.cfg.orbit.t0 = Some(parse_positive(sec, key, value, line)?),
            "tol" => b.cfg.orbit.tol = parse_positive(sec, key, value, line)?,
            "n_samples" => b.cfg.orbit.n_samples = parse_count(sec, key, value, 16, line)?,
            _ => return Err(unknown()),
        },
        Section::Knot => match key {
            "kind" => {
                b.cfg.knot.kind = match value {
                    "hopf" => KnotKind::Hopf,
                    "torus" => KnotKind::Torus,
                    "orbit" => KnotKind::Orbit,
                    other => {
                        return Err(ConfigError::at(
                            line,
                            format!("knot.kind: expected hopf | torus | orbit, got '{other}'"),
                        ));
                    }
                }
            }
            "p" => b.cfg.knot.p = parse_count(sec, key, value, 1, line)? as u64,
            "q" => b.cfg.knot.q = parse_count(sec, key, value, 1, line)? as u64,
            "r1" => b.cfg.knot.r1 = parse_positive(sec, key, value, line)?,
            "scan_dirs" => b.cfg.knot.scan_dirs = parse_count(sec, key, value, 1, line)?,
            _ => return Err(unknown()),
        },
        Section::Maslov => match key {
            "n_dirs" => b.cfg.maslov.n_dirs = parse_count(sec, key, value, 1, line)?,
            "tol" => b.cfg.maslov.tol = parse_positive(sec, key, value, line)?,
            "n_paths" => b.cfg.maslov.n_paths = parse_count(sec, key, value, 1, line)?,
            "n_matrices" => b.cfg.maslov.n_matrices = parse_count(sec, key, value, 1, line)?,
            _ => return Err(unknown()),
        },
        Section::Linking => match key {
            "epsilon" => b.cfg.linking.epsilon = parse_positive(sec, key, value, line)?,
            "n_quad" => b.cfg.linking.n_quad = parse_count(sec, key, value, 16, line)?,
            _ => return Err(unknown()),
        },
        Section::Filling => match key {
            "mode" => {
                b.cfg.filling.mode = match value {
                    "linear" => FillMode::Linear,
                    "embedded" => FillMode::Embedded,
                    other => {
                        return Err(ConfigError::at(
                            line,
                            format!("filling.mode: expected linear | embedded, got '{other}'"),
                        ));
                    }
                }
            }
            "n_r" => b.cfg.filling.n_r = parse_count(sec, key, value, 4, line)?,
            "n_theta" => {
                let n = parse_count(sec, key, value, 8, line)?;
                if n % 2 != 0 {
                    return Err(ConfigError::at(
                        line,
                        format!("filling.n_theta: value must be even, got {n}"),
                    ));
                }
                b.cfg.filling.n_theta = n;
            }
            "split_a" => b.cfg.filling.split.0 = parse_f64(sec, key, value, line)?,
            "split_b" => b.cfg.filling.split.1 = parse_f64(sec, key, value, line)?,
            "direction" => {
                b.cfg.filling.direction = if value == "auto" {
                    FillDirection::Auto
                } else {
                    let v = parse_vec4(sec, key, value, line)?;
                    if v.iter().map(|x| x * x).sum::<f64>() <= 0.0 {
                        return Err(ConfigError::at(
                            line,
                            "filling.direction: vector must be nonzero".to_string(),
                        ));
                    }
                    FillDirection::Fixed(v)
                }
            }
            "n_dirs" => b.cfg.filling.n_dirs = parse_count(sec, key, value, 1, line)?,
            "transverse_tol" => {
                b.cfg.filling.transverse_tol = parse_positive(sec, key, value, line)?
            }
            _ => return Err(unknown()),
        },
        Section::Pinching => match key {
            "n_samples" => b.cfg.pinching.n_samples = parse_count(sec, key, value, 10, line)?,
            _ => return Err(unknown()),
        },
        Section::Output => {
            let slot = match key {
                "orbit_csv" => &mut b.cfg.output.orbit_csv,
                "knot_csv" => &mut b.cfg.output.knot_csv,
                "disc_csv" => &mut b.cfg.output.disc_csv,
                "pinching_csv" => &mut b.cfg.output.pinching_csv,
                "intersections_json" => &mut b.cfg.output.intersections_json,
                _ => return Err(unknown()),
            };
            *slot = Some(value.to_string());
        }
    }
    Ok(())
}

/// Collapse optional spaces around `=` so that `key = value`, `key= value`
/// and `key =value` all tokenize as a single `key=value`.
fn normalize_eq(line: &str) -> String {
    let mut s = line.to_string();
    while s.contains(" =") {
        s = s.replace(" =", "=");
    }
    while s.contains("= ") {
        s = s.replace("= ", "=");
    }
    s
}

/// Parse and validate a configuration. Defaults fill every key except
/// `task.name`, which is required.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut b = Builder::new();
    let mut section: Option<Section> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        for token in normalize_eq(content).split_whitespace() {
            if let Some(inner) = token.strip_prefix('[') {
                let name = inner.strip_suffix(']').ok_or_else(|| {
                    ConfigError::at(line, format!("malformed section header '{token}'"))
                })?;
                section = Some(Section::from_name(name, line)?);
            } else if let Some((key, value)) = token.split_once('=') {
                if key.is_empty() || value.is_empty() {
                    return Err(ConfigError::at(
                        line,
                        format!("malformed assignment '{token}'"),
                    ));
                }
                let sec = section.ok_or_else(|| {
                    ConfigError::at(line, format!("'{key}' assigned before any [section] header"))
                })?;
                assign(&mut b, sec, key, value, line)?;
            } else {
                return Err(ConfigError::at(
                    line,
                    format!("expected [section] or key=value, found '{token}'"),
                ));
            }
        }
    }

    let task = b.task.ok_or_else(|| ConfigError::global("task.name required"))?;
    if b.cfg.surface.kind == SurfaceKind::PerturbedEllipsoid && b.cfg.surface.eps.is_none() {
        return Err(ConfigError::global(
            "surface.eps required for kind=perturbed-ellipsoid",
        ));
    }
    let mut cfg = b.cfg;
    cfg.task = task;
    Ok(cfg)
}
