use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use colsync::export;
use colsync::model::{collectivity_a, exchange_f};
use colsync::sweep::{run_coherence_map, run_sweep, run_three_atom_scenario, EnsembleSpec};
use colsync::simulate;
use serde::Serialize;

use crate::config::{Mode, RunConfig};

pub const TOOL: &str = "colsync";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output` from the config.
    pub out: Option<PathBuf>,
    /// Overrides the ensemble seed.
    pub seed: Option<u64>,
}

/// What a run produced: text for stdout and the files written.
#[derive(Debug, Clone, Default)]
pub struct Report {
    pub summary: String,
    pub out_dir: Option<PathBuf>,
    pub files: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'a str,
    version: &'a str,
    mode: String,
    seed: u64,
    outputs: &'a [String],
    config: &'a RunConfig,
}

struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    fn new() -> Self {
        Self { files: Vec::new() }
    }

    fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    fn write(self, dir: &Path, cfg: &RunConfig, seed: u64) -> Result<Vec<String>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut names: Vec<String> = self.files.iter().map(|(n, _)| n.clone()).collect();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        }
        let manifest = Manifest {
            tool: TOOL,
            version: VERSION,
            mode: cfg.mode.to_string(),
            seed,
            outputs: &names,
            config: cfg,
        };
        let path = dir.join("manifest.toml");
        fs::write(&path, toml::to_string(&manifest)?).with_context(|| format!("writing {}", path.display()))?;
        names.push("manifest.toml".into());
        Ok(names)
    }
}

/// Runs a parsed config and writes its artifacts.
pub fn execute(cfg: &RunConfig, opts: &RunOptions) -> Result<Report> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        if let Some(e) = &mut cfg.ensemble {
            e.seed = seed;
        }
    }
    let seed = cfg.ensemble.map_or(opts.seed.unwrap_or(0), |e| e.seed);
    let out_dir = opts
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from));

    let mut outputs = Outputs::new();
    let mut summary = String::new();
    match cfg.mode {
        Mode::Simulate => {
            let model = cfg.model_spec()?;
            let analysis = cfg.analysis_config()?;
            let sim = simulate(&model, &analysis)?;
            summary.push_str(&export::verdict_summary(&sim));
            outputs.add("trajectory.csv", export::trajectory_csv(&sim.trajectory)?);
            outputs.add("pearson.csv", export::pearson_csv(&sim.windowed));
            outputs.add("trajectory.gp", export::trajectory_plot("trajectory.csv", model.n_atoms()));
            outputs.add("pearson.gp", export::pearson_plot("pearson.csv", sim.windowed.len()));
            outputs.add("verdicts.txt", summary.clone());
        }
        Mode::ThreeAtom => {
            let model = cfg.three_atom_model()?;
            let analysis = cfg.analysis_config()?;
            let out = run_three_atom_scenario(&model, &analysis)?;
            summary.push_str(&export::verdict_summary(&out.simulation));
            let _ = writeln!(
                summary,
                "not all pairs anti-synchronized: {}",
                if out.constraint_respected { "yes" } else { "VIOLATED" }
            );
            outputs.add("trajectory.csv", export::trajectory_csv(&out.simulation.trajectory)?);
            outputs.add("pearson.csv", export::pearson_csv(&out.simulation.windowed));
            outputs.add("trajectory.gp", export::trajectory_plot("trajectory.csv", 3));
            outputs.add("pearson.gp", export::pearson_plot("pearson.csv", 3));
            outputs.add("verdicts.txt", summary.clone());
        }
        Mode::Sweep => {
            let spec = cfg.sweep_spec()?;
            let res = run_sweep(&spec)?;
            let (n1, n2) = res.shape();
            let _ = writeln!(summary, "sweep {n1}x{n2}: {} missing cells", res.failures());
            outputs.add("sweep.csv", export::sweep_csv(&res));
            outputs.add("sweep.gp", export::sweep_plot("sweep.csv", &res, "final Pearson C"));
        }
        Mode::CoherenceMap => {
            let spec = cfg.sweep_spec()?;
            let ensemble = cfg.ensemble.unwrap_or_else(EnsembleSpec::default);
            let res = run_coherence_map(&spec, &ensemble)?;
            let (n1, n2) = res.shape();
            let _ = writeln!(
                summary,
                "coherence map {n1}x{n2}, {} samples (seed {}): {} missing cells",
                ensemble.samples,
                ensemble.seed,
                res.failures()
            );
            outputs.add("coherence.csv", export::sweep_csv(&res));
            if let Some(se) = export::std_error_csv(&res) {
                outputs.add("coherence_std_error.csv", se);
            }
            outputs.add("coherence.gp", export::sweep_plot("coherence.csv", &res, "mean l1 coherence"));
        }
        Mode::Coefficients => {
            let c = cfg.coefficients.as_ref().context("missing [coefficients] section")?;
            let (xi, alpha) = (c.xi.0, c.alpha.0);
            let a = collectivity_a(xi, alpha);
            let _ = writeln!(summary, "xi={xi:.6} alpha={alpha:.6}");
            let _ = writeln!(summary, "a={a:.6}");
            match exchange_f(xi, alpha, c.gamma0) {
                Ok(f) => {
                    let _ = writeln!(summary, "f/gamma0={:.6}", f / c.gamma0);
                }
                Err(e) => {
                    let _ = writeln!(summary, "f/gamma0=undefined ({e})");
                }
            }
            outputs.add("coefficients.txt", summary.clone());
        }
    }

    let files = match &out_dir {
        Some(dir) => outputs.write(dir, &cfg, seed)?,
        None if cfg.mode == Mode::Coefficients => Vec::new(),
        None => anyhow::bail!("no output directory: pass --out or set `output` in the config"),
    };
    Ok(Report {
        summary,
        out_dir,
        files,
    })
}
