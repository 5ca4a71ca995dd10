//! TOML run configuration. Relative paths are resolved against the directory
//! holding the config file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ihnc::inversion::{ForwardKind, Scheme, SchemeConfig};
use ihnc::io::read_table;
use ihnc::md::MdParams;
use ihnc::oz::HncSolver;
use ihnc::thermo::{tabulate_truncated_shifted_lj, LjParams};
use ihnc::{make_grid, RadialGrid, StatePoint, TableKind, Tabulated};
use serde::Deserialize;

pub const CONFIG_VERSION: u32 = 1;

/// Configuration problem; reported with its own exit code.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default = "default_output")]
    pub output: PathBuf,
    pub state: StateSection,
    pub grid: GridSection,
    pub potential: Option<PotentialSpec>,
    pub target: Option<TargetSection>,
    pub inversion: Option<InversionSection>,
    #[serde(default)]
    pub hnc: HncSection,
    #[serde(default)]
    pub md: MdSection,
    #[serde(skip)]
    base: PathBuf,
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSection {
    pub density: f64,
    pub temperature: f64,
    pub particles: Option<usize>,
    #[serde(default = "one")]
    pub boltzmann: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dr: f64,
    /// Number of RDF points; for MD runs it defaults to the largest value the box allows.
    pub m: Option<usize>,
    pub n: usize,
}

/// Either a table file or a built-in model.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub file: Option<PathBuf>,
    pub model: Option<String>,
    #[serde(default = "one")]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub sigma: f64,
    pub cutoff: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSection {
    /// RDF table to invert.
    pub rdf: Option<PathBuf>,
    /// Known potential, used for the error metric and for synthetic targets.
    pub reference: Option<PotentialSpec>,
    /// Generate the target with the forward model from the reference potential.
    #[serde(default)]
    pub synthesize: bool,
    pub seed: Option<u64>,
    pub production_steps: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InversionSection {
    pub scheme: String,
    #[serde(default = "default_forward")]
    pub forward: String,
    pub max_iterations: Option<usize>,
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub weight_exponent: f64,
    pub pressure_target: Option<f64>,
}

fn default_forward() -> String {
    "hnc".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HncSection {
    pub mix: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for HncSection {
    fn default() -> Self {
        let s = HncSolver::default();
        Self { mix: s.mix, tolerance: s.tol, max_iterations: s.max_iter }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MdSection {
    pub dt: f64,
    pub equilibration_steps: usize,
    pub production_steps: usize,
    pub sample_stride: usize,
    /// Thermostat time constant; omit or set to `inf` for the default / NVE.
    pub tau_t: f64,
    pub seed: u64,
    pub blocks: usize,
    pub continuation_equilibration: usize,
}

impl Default for MdSection {
    fn default() -> Self {
        let p = MdParams::default();
        Self {
            dt: p.dt,
            equilibration_steps: p.equilibration_steps,
            production_steps: p.production_steps,
            sample_stride: p.sample_stride,
            tau_t: p.tau_t,
            seed: p.seed,
            blocks: p.blocks,
            continuation_equilibration: 5000,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        if cfg.version != CONFIG_VERSION {
            bail!(config_error(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        cfg.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.check_files()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn check_files(&self) -> Result<()> {
        let mut files: Vec<&PathBuf> = Vec::new();
        if let Some(f) = self.potential.as_ref().and_then(|p| p.file.as_ref()) {
            files.push(f);
        }
        if let Some(t) = &self.target {
            files.extend(t.rdf.iter());
            if let Some(f) = t.reference.as_ref().and_then(|p| p.file.as_ref()) {
                files.push(f);
            }
        }
        for f in files {
            let path = self.resolve(f);
            if !path.is_file() {
                bail!(config_error(format!("file {} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output)
    }

    pub fn state(&self) -> Result<StatePoint> {
        let s = &self.state;
        let mut state = StatePoint::with_boltzmann(s.density, s.temperature, s.boltzmann)
            .map_err(|e| config_error(e.to_string()))?;
        if let Some(n) = s.particles {
            state = state.with_particles(n);
        }
        Ok(state)
    }

    pub fn md_state(&self) -> Result<StatePoint> {
        match self.state.particles {
            Some(n) if n >= 2 => self.state(),
            _ => bail!(config_error("MD needs state.particles >= 2")),
        }
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        let g = &self.grid;
        let m = match g.m {
            Some(m) => m,
            None => {
                let state = self.md_state().map_err(|_| {
                    config_error("grid.m may only be omitted when state.particles is set")
                })?;
                let half = 0.5 * (state.particles as f64 / state.density).cbrt();
                (half / g.dr * (1.0 + 1e-12)).floor() as usize
            }
        };
        make_grid(g.dr, m, g.n).map_err(|e| config_error(e.to_string()))
    }

    pub fn hnc_solver(&self) -> Result<HncSolver> {
        let h = &self.hnc;
        HncSolver::new(h.mix, h.tolerance, h.max_iterations).map_err(|e| config_error(e.to_string()))
    }

    pub fn md_params(&self, seed_override: Option<u64>) -> Result<MdParams> {
        let m = &self.md;
        let p = MdParams {
            dt: m.dt,
            equilibration_steps: m.equilibration_steps,
            production_steps: m.production_steps,
            sample_stride: m.sample_stride,
            tau_t: m.tau_t,
            seed: seed_override.unwrap_or(m.seed),
            blocks: m.blocks,
        };
        p.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(p)
    }

    pub fn potential(&self, grid: RadialGrid) -> Result<Tabulated> {
        match &self.potential {
            Some(spec) => self.build_potential(spec, grid),
            None => bail!(config_error("missing [potential] section")),
        }
    }

    pub fn build_potential(&self, spec: &PotentialSpec, grid: RadialGrid) -> Result<Tabulated> {
        match (&spec.file, spec.model.as_deref()) {
            (Some(file), None) => {
                let path = self.resolve(file);
                let table = read_table(&path, TableKind::Potential)
                    .with_context(|| format!("reading {}", path.display()))?;
                table.with_grid(grid).map_err(|_| {
                    config_error(format!(
                        "{} is not on the configured grid (dr = {})",
                        path.display(),
                        grid.dr()
                    ))
                })
            }
            (None, Some("zero")) => Ok(Tabulated::potential(grid, vec![0.0; grid.n()])?),
            (None, Some("lj-ts")) => {
                let cutoff = spec.cutoff.unwrap_or_else(|| grid.cutoff());
                let p = LjParams::new(spec.epsilon, spec.sigma, cutoff)
                    .map_err(|e| config_error(e.to_string()))?;
                Ok(tabulate_truncated_shifted_lj(grid, &p))
            }
            (None, Some(other)) => {
                bail!(config_error(format!("unknown potential model {other:?} (use zero or lj-ts)")))
            }
            _ => bail!(config_error("a potential needs exactly one of `file` or `model`")),
        }
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let Some(inv) = &self.inversion else {
            bail!(config_error("missing [inversion] section"));
        };
        let scheme: Scheme = inv.scheme.parse().map_err(|e: ihnc::Error| config_error(e.to_string()))?;
        let forward: ForwardKind =
            inv.forward.parse().map_err(|e: ihnc::Error| config_error(e.to_string()))?;
        let mut cfg = SchemeConfig::new(scheme, forward).with_weight_exponent(inv.weight_exponent);
        if let Some(k) = inv.max_iterations {
            cfg = cfg.with_max_iterations(k);
        }
        if let Some(t) = inv.tolerance {
            cfg = cfg.with_tolerance(t);
        }
        if let Some(p) = inv.pressure_target {
            cfg = cfg.with_pressure_target(p);
        }
        cfg.validate().map_err(|e| config_error(e.to_string()))?;
        Ok(cfg)
    }
}
