//! Run configuration: one JSON file drives every subcommand, CLI flags
//! override individual fields.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use implicit_sindy::differentiation::DiffConfig;
use implicit_sindy::dynamics::{
    default_params, default_t_grid, make_benchmark, sample_ics, Benchmark, IntegratorConfig,
    OdeModel,
};
use implicit_sindy::pipeline::{
    benchmark_state_configs, benchmark_trajectory_count, StateIdentifyConfig,
};

/// Environment variable naming the default output root directory.
pub const OUTPUT_ROOT_ENV: &str = "SINDY_OUTPUT_ROOT";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Benchmark system name (`michaelis_menten`, `regulatory`, `glycolysis`),
    /// or null when `model_file` names an arbitrary model.
    pub benchmark: Option<String>,
    /// JSON file with an `OdeModel` used as the ground truth instead of a
    /// named benchmark.
    pub model_file: Option<PathBuf>,
    /// Parameter overrides applied on top of the benchmark defaults.
    pub params: BTreeMap<String, f64>,
    /// Explicit initial conditions; when absent, `n_ics` are sampled from the
    /// benchmark's documented ranges using `seed`.
    pub ics: Option<Vec<Vec<f64>>>,
    pub n_ics: Option<usize>,
    pub seed: u64,
    /// Time grid: `n_samples` uniform points on [0, t_end]. Defaults come
    /// from the benchmark.
    pub t_end: Option<f64>,
    pub n_samples: Option<usize>,
    pub integrator: IntegratorConfig,
    pub differentiation: DiffConfig,
    /// Per-state identification configs; defaults to the benchmark's tuned
    /// set.
    pub states: Option<Vec<StateIdentifyConfig>>,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            benchmark: None,
            model_file: None,
            params: BTreeMap::new(),
            ics: None,
            n_ics: None,
            seed: 7,
            t_end: None,
            n_samples: None,
            integrator: IntegratorConfig::default(),
            differentiation: DiffConfig::default(),
            states: None,
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("cannot parse config file {}", path.display()))
    }

    /// Defaults with every benchmark-derived field filled in, suitable for
    /// `--print-defaults`.
    pub fn defaults_for(benchmark: Option<Benchmark>) -> RunConfig {
        let mut cfg = RunConfig::default();
        if let Some(b) = benchmark {
            cfg.benchmark = Some(b.name().to_string());
            cfg.params = default_params(b);
            cfg.n_ics = Some(benchmark_trajectory_count(b));
            let grid = default_t_grid(b);
            cfg.t_end = grid.last().copied();
            cfg.n_samples = Some(grid.len());
            cfg.states = Some(benchmark_state_configs(b));
        }
        cfg
    }

    pub fn benchmark(&self) -> Result<Option<Benchmark>> {
        match &self.benchmark {
            Some(name) => Ok(Some(name.parse::<Benchmark>()?)),
            None => Ok(None),
        }
    }

    /// Ground-truth model: a named benchmark (with parameter overrides) or an
    /// explicit model file.
    pub fn truth_model(&self) -> Result<OdeModel> {
        if let Some(b) = self.benchmark()? {
            let mut params = default_params(b);
            params.extend(self.params.iter().map(|(k, v)| (k.clone(), *v)));
            return Ok(make_benchmark(b, &params)?);
        }
        if let Some(path) = &self.model_file {
            let model: OdeModel = implicit_sindy::io::read_json(path)
                .with_context(|| format!("cannot read model file {}", path.display()))?;
            return Ok(model);
        }
        bail!("config names neither a benchmark nor a model_file");
    }

    pub fn resolve_ics(&self) -> Result<Vec<Vec<f64>>> {
        if let Some(ics) = &self.ics {
            if ics.is_empty() {
                bail!("explicit ic list is empty");
            }
            return Ok(ics.clone());
        }
        let b = self
            .benchmark()?
            .context("sampling initial conditions requires a benchmark (or an explicit ic list)")?;
        let count = self.n_ics.unwrap_or_else(|| benchmark_trajectory_count(b));
        Ok(sample_ics(b, count, self.seed))
    }

    pub fn resolve_t_grid(&self) -> Result<Vec<f64>> {
        let default = self.benchmark()?.map(default_t_grid);
        let t_end = self
            .t_end
            .or_else(|| default.as_ref().and_then(|g| g.last().copied()))
            .context("t_end is required when no benchmark is named")?;
        let n = self
            .n_samples
            .or_else(|| default.as_ref().map(|g| g.len()))
            .context("n_samples is required when no benchmark is named")?;
        if n < 2 || t_end <= 0.0 {
            bail!("time grid needs n_samples >= 2 and t_end > 0");
        }
        Ok((0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect())
    }

    pub fn resolve_states(&self) -> Result<Vec<StateIdentifyConfig>> {
        if let Some(states) = &self.states {
            for s in states {
                if !s.lambda_grid.windows(2).all(|w| w[1] > w[0]) {
                    bail!("lambda grid must be strictly ascending");
                }
            }
            return Ok(states.clone());
        }
        let b = self
            .benchmark()?
            .context("per-state identification configs required when no benchmark is named")?;
        Ok(benchmark_state_configs(b))
    }

    /// Output directory priority: CLI flag, config field, then
    /// `$SINDY_OUTPUT_ROOT/<benchmark>` (root defaults to `runs`).
    pub fn resolve_output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Some(p) = &self.output_dir {
            return p.clone();
        }
        let root = std::env::var_os(OUTPUT_ROOT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("runs"));
        root.join(self.benchmark.as_deref().unwrap_or("model"))
    }
}
