//! Run configuration, read from TOML.
//!
//! ```toml
//! [problem]
//! l = 1.0
//! grid_n = 2000
//! potential = "2 + cos(1, 3)"   # or potential_file = "q.csv" (x,re,im)
//!
//! [numerics]
//! modes = 300
//! horizon = 1.0
//! cfl = 0.5
//! frames = 100
//! seed = 7
//!
//! [gauge]                       # omit for the default gauge
//! e = [1.0, 0.0, 0.0, 1.0]      # (re c0, im c0, re cl, im cl) in the (phi0, phil) basis
//! e1 = [1.0, 0.0, 0.0, 0.0]
//! e2 = [0.0, 0.0, 1.0, 0.0]
//!
//! [controls]
//! f0 = "bump(0.15, 0.1, 1)"
//! fl = ""
//! dead_time = 0.005
//!
//! [output]
//! dir = "out"
//! format = "csv"
//! ```
//!
//! Every key has a default, so an empty file is a valid configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boundary_control::WaveMethod;
use crate::control::ControlSignal;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::model_operator::RecoveryPath;
use crate::potential::Potential;
use crate::wave_model::{GaugeSpec, KernelVector};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub numerics: NumericsConfig,
    pub gauge: GaugeConfig,
    pub controls: ControlsConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub l: f64,
    pub grid_n: usize,
    pub potential: String,
    /// Sampled potential, `x,re,im` on the configured grid. Overrides `potential`.
    pub potential_file: Option<PathBuf>,
    /// Model coefficients for `recover`, in the layout written by `model`.
    pub coefficients_file: Option<PathBuf>,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            l: 1.0,
            grid_n: 2000,
            potential: "0".into(),
            potential_file: None,
            coefficients_file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericsConfig {
    pub modes: usize,
    pub horizon: f64,
    pub cfl: f64,
    pub frames: usize,
    pub seed: u64,
    pub wave_method: WaveMethod,
    pub recovery_path: RecoveryPath,
    pub span_samples: usize,
    pub span_nodes: usize,
    /// Snapshot time of the span estimate, as a fraction of `l`.
    pub span_time: f64,
    pub eigenfunctions: usize,
    /// Test hook: relative perturbation injected into `T`.
    pub fault_perturb_t: Option<f64>,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            modes: 300,
            horizon: 1.0,
            cfl: 0.5,
            frames: 100,
            seed: 7,
            wave_method: WaveMethod::default(),
            recovery_path: RecoveryPath::default(),
            span_samples: 96,
            span_nodes: 24,
            span_time: 0.6,
            eigenfunctions: 10,
            fault_perturb_t: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaugeConfig {
    pub e: Option<[f64; 4]>,
    pub e1: Option<[f64; 4]>,
    pub e2: Option<[f64; 4]>,
}

impl GaugeConfig {
    pub fn spec(&self) -> Result<GaugeSpec> {
        match (self.e, self.e1, self.e2) {
            (None, None, None) => Ok(GaugeSpec::default()),
            (Some(e), Some(e1), Some(e2)) => Ok(GaugeSpec {
                e: KernelVector::from_quadruple(e),
                e1: KernelVector::from_quadruple(e1),
                e2: KernelVector::from_quadruple(e2),
            }),
            _ => Err(Error::Config("an explicit gauge needs all of e, e1 and e2".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlsConfig {
    pub f0: String,
    pub fl: String,
    /// Dead time as a fraction of `l`.
    pub dead_time: f64,
}

impl Default for ControlsConfig {
    fn default() -> Self {
        Self { f0: "bump(0.15, 0.1, 1)".into(), fl: String::new(), dead_time: 0.005 }
    }
}

/// Acceptance tolerances. Defaults are the acceptance targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub spectrum_rel: f64,
    pub dalembert: f64,
    pub fdtd_l2: f64,
    pub support: f64,
    pub span_ratio: f64,
    pub gram: f64,
    pub inverse_identity: f64,
    pub parseval: f64,
    pub intertwine: f64,
    pub intertwine_kernel: f64,
    /// In units of `h`.
    pub eikonal: f64,
    pub recovery: f64,
    pub recovery_observer: f64,
    pub form_limit: f64,
    pub graph: f64,
    pub collision: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spectrum_rel: 1e-7,
            dalembert: 2e-3,
            fdtd_l2: 1e-3,
            support: 1e-6,
            span_ratio: 1e-6,
            gram: 1e-12,
            inverse_identity: 1e-10,
            parseval: 1e-6,
            intertwine: 1e-6,
            intertwine_kernel: 1e-8,
            eikonal: 1.0,
            recovery: 1e-6,
            recovery_observer: 1e-3,
            form_limit: 1e-4,
            graph: 2e-3,
            collision: 1e-6,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 16] {
        [
            ("spectrum_rel", self.spectrum_rel),
            ("dalembert", self.dalembert),
            ("fdtd_l2", self.fdtd_l2),
            ("support", self.support),
            ("span_ratio", self.span_ratio),
            ("gram", self.gram),
            ("inverse_identity", self.inverse_identity),
            ("parseval", self.parseval),
            ("intertwine", self.intertwine),
            ("intertwine_kernel", self.intertwine_kernel),
            ("eikonal", self.eikonal),
            ("recovery", self.recovery),
            ("recovery_observer", self.recovery_observer),
            ("form_limit", self.form_limit),
            ("graph", self.graph),
            ("collision", self.collision),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: OutputFormat::Csv }
    }
}

impl RunConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it are resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&src)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.problem.potential_file, &mut cfg.problem.coefficients_file]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is serialisable")
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        let n = &self.numerics;
        let positive = [
            ("problem.l", p.l),
            ("numerics.horizon", n.horizon),
            ("numerics.cfl", n.cfl),
            ("numerics.span_time", n.span_time),
            ("controls.dead_time", self.controls.dead_time),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let counts = [
            ("problem.grid_n", p.grid_n),
            ("numerics.modes", n.modes),
            ("numerics.frames", n.frames),
            ("numerics.span_samples", n.span_samples),
            ("numerics.span_nodes", n.span_nodes),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if !p.grid_n.is_multiple_of(2) {
            return Err(Error::Config(format!("problem.grid_n must be even, got {}", p.grid_n)));
        }
        for (name, v) in self.tolerances.entries() {
            if !(v >= 100.0 * f64::EPSILON && v.is_finite()) {
                return Err(Error::Config(format!(
                    "tolerances.{name} = {v:e} is below 100 machine epsilons"
                )));
            }
        }
        self.gauge.spec()?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.problem.l, self.problem.grid_n)
    }

    pub fn potential(&self) -> Result<Potential> {
        let grid = self.grid()?;
        match &self.problem.potential_file {
            Some(path) => {
                let file = std::fs::File::open(path)
                    .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
                let samples = GridFunction::read_csv(file)?;
                if samples.grid() != grid {
                    return Err(Error::Config(format!(
                        "{} is not sampled on the configured grid (l = {}, n = {})",
                        path.display(),
                        grid.l(),
                        grid.n()
                    )));
                }
                Potential::from_samples(samples)
            }
            None => Potential::parse(grid, &self.problem.potential),
        }
    }

    pub fn control(&self) -> Result<ControlSignal> {
        let c = &self.controls;
        ControlSignal::parse(&c.f0, &c.fl, c.dead_time * self.problem.l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_the_default() {
        assert_eq!(RunConfig::from_toml("").unwrap(), RunConfig::default());
    }

    #[test]
    fn round_trip_through_toml() {
        let mut cfg = RunConfig::default();
        cfg.problem.potential = "2 + cos(1, 3)".into();
        cfg.gauge.e = Some([1.0, 0.0, -1.0, 0.0]);
        cfg.gauge.e1 = Some([1.0, 0.0, -1.0, 0.0]);
        cfg.gauge.e2 = Some([1.0, 0.0, 0.0, 0.0]);
        cfg.output.format = OutputFormat::Json;
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_toml("[problem]\nl = -1.0").is_err());
        assert!(RunConfig::from_toml("[problem]\ngrid_n = 101").is_err());
        assert!(RunConfig::from_toml("[tolerances]\nparseval = 1e-20").is_err());
        assert!(RunConfig::from_toml("[gauge]\ne = [1.0, 0.0, 0.0, 0.0]").is_err());
        assert!(RunConfig::from_toml("[problem]\nunknown = 1").is_err());
        let err = RunConfig::from_toml("[numerics]\nmodes = 0").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn sections_parse() {
        let cfg = RunConfig::from_toml(
            "[problem]\nl = 3.141592653589793\npotential = \"1 + cos(0.5, 2)\"\n\
             [numerics]\nmodes = 10\nwave_method = \"direct\"\nrecovery_path = \"observer\"\n\
             [controls]\nf0 = \"bump(0.1, 0.05, 1)\"\nfl = \"0.5*bump(0.3, 0.1, 1)\"\n\
             [output]\nformat = \"json\"",
        )
        .unwrap();
        assert_eq!(cfg.numerics.modes, 10);
        assert_eq!(cfg.numerics.wave_method, WaveMethod::Direct);
        assert_eq!(cfg.numerics.recovery_path, RecoveryPath::Observer);
        assert_eq!(cfg.output.format, OutputFormat::Json);
        assert!(cfg.potential().unwrap().max() > 1.4);
        assert!(!cfg.control().unwrap().fl.is_zero());
    }
}
