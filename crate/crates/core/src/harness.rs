//! Batch experiments: parameter sweeps, replicate fan-out, averaging and
//! on-disk results.
//!
//! An [`Experiment`] is a base configuration plus a sweep, a map from
//! parameter name to the values it takes. The run set is the cartesian
//! product of the sweep values, keys in sorted order and values in the order
//! given. Each sweep point runs `replicates` independent replicates with
//! indices `0..replicates` in parallel, then averages them in index order so
//! the output does not depend on scheduling.
//!
//! Layout under `output_dir`:
//!
//! ```text
//! <name>/manifest.json
//! <name>/<point>/mean.csv
//! <name>/<point>/rep_<k>.csv      (only with keep_replicates)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abm::{self, Exploration, ShockSchedule, SimConfig, Topology, DEFAULT_RATES};
use crate::dynamics::{self, DynamicsParams};
use crate::error::{Error, Result};
use crate::game::ReducedGame;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_REPLICATES: usize = 100;
const MANIFEST_VERSION: u32 = 1;

/// Deterministic well-mixed run: one trajectory per sweep point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub game: ReducedGame,
    pub x0: f64,
    pub params: DynamicsParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum BaseConfig {
    Ode(OdeConfig),
    Abm(SimConfig),
}

impl BaseConfig {
    fn sweepable(&self) -> &'static [&'static str] {
        match self {
            BaseConfig::Ode(_) => &["a", "b", "c", "mu", "x0", "dt", "t_max"],
            BaseConfig::Abm(_) => &["a", "b", "c", "s", "mu", "inject"],
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BaseConfig::Ode(o) => {
                o.params.validate()?;
                dynamics::PopulationState::new(o.x0).map(|_| ())
            }
            BaseConfig::Abm(s) => s.validate(),
        }
    }

    /// Returns a copy with `name` set to `value`.
    fn with(&self, name: &str, value: f64) -> Result<BaseConfig> {
        let mut out = self.clone();
        let game = match &mut out {
            BaseConfig::Ode(o) => &mut o.game,
            BaseConfig::Abm(s) => &mut s.game,
        };
        match name {
            "a" => *game = ReducedGame::new(value, game.b(), game.c())?,
            "b" => *game = ReducedGame::new(game.a(), value, game.c())?,
            "c" => *game = game.with_c(value)?,
            _ => match &mut out {
                BaseConfig::Ode(o) => match name {
                    "mu" => o.params.mu = value,
                    "x0" => o.x0 = value,
                    "dt" => o.params.dt = value,
                    "t_max" => o.params.t_max = value,
                    _ => return Err(Error::config(name, "not a sweepable ODE parameter")),
                },
                BaseConfig::Abm(s) => match name {
                    "s" => s.fermi_s = value,
                    "mu" => match &mut s.exploration {
                        Exploration::Fixed { mu } => *mu = value,
                        Exploration::Evolving { .. } => {
                            return Err(Error::config("mu", "cannot sweep mu with evolving exploration"))
                        }
                    },
                    "inject" => s.inject = Some(value),
                    _ => return Err(Error::config(name, "not a sweepable ABM parameter")),
                },
            },
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub base: BaseConfig,
    #[serde(default)]
    pub sweep: BTreeMap<String, Vec<f64>>,
    pub output_dir: PathBuf,
    /// Also write each replicate's series.
    #[serde(default)]
    pub keep_replicates: bool,
}

/// One element of the sweep's cartesian product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub assignments: Vec<(String, f64)>,
}

impl SweepPoint {
    /// Directory name, e.g. `b=1.15_c=0.3`; `base` when nothing is swept.
    pub fn label(&self) -> String {
        if self.assignments.is_empty() {
            return "base".into();
        }
        self.assignments
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("_")
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.assignments.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Iteration(Vec<usize>),
    Time(Vec<f64>),
}

impl Axis {
    pub fn len(&self) -> usize {
        match self {
            Axis::Iteration(v) => v.len(),
            Axis::Time(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn name(&self) -> &'static str {
        match self {
            Axis::Iteration(_) => "iteration",
            Axis::Time(_) => "t",
        }
    }

    fn cell(&self, k: usize) -> String {
        match self {
            Axis::Iteration(v) => v[k].to_string(),
            Axis::Time(v) => v[k].to_string(),
        }
    }
}

/// Replicate-mean series for one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateSeries {
    pub axis: Axis,
    pub columns: Vec<String>,
    /// `rows[k][j]` is the mean of column `j` at axis position `k`.
    pub rows: Vec<Vec<f64>>,
    pub replicates: usize,
}

impl AggregateSeries {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_table(&self.axis, &self.columns, &self.rows, out)
    }
}

fn write_table<W: Write>(axis: &Axis, columns: &[String], rows: &[Vec<f64>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![axis.name().to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    let mut line = Vec::with_capacity(header.len());
    for (k, row) in rows.iter().enumerate() {
        line.clear();
        line.push(axis.cell(k));
        line.extend(row.iter().map(f64::to_string));
        w.write_record(&line)?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub point: SweepPoint,
    pub series: AggregateSeries,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    experiment: Experiment,
    points: Vec<String>,
}

impl Experiment {
    pub fn new(name: impl Into<String>, base: BaseConfig) -> Self {
        Experiment {
            name: name.into(),
            base,
            sweep: BTreeMap::new(),
            output_dir: PathBuf::from("results"),
            keep_replicates: false,
        }
    }

    pub fn sweeping(mut self, name: &str, values: &[f64]) -> Self {
        self.sweep.insert(name.to_string(), values.to_vec());
        self
    }

    pub fn with_output_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.output_dir = dir.into();
        self
    }

    /// Sets the replicate count of an ABM experiment; no effect on ODE ones.
    pub fn with_replicates(mut self, replicates: usize) -> Self {
        if let BaseConfig::Abm(s) = &mut self.base {
            s.replicates = replicates;
        }
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        if let BaseConfig::Abm(s) = &mut self.base {
            s.base_seed = seed;
        }
        self
    }

    /// Directory holding this experiment's manifest and point directories.
    pub fn dir(&self) -> PathBuf {
        self.output_dir.join(&self.name)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.dir().join("manifest.json")
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let mut points = vec![SweepPoint {
            assignments: Vec::new(),
        }];
        for (name, values) in &self.sweep {
            points = points
                .into_iter()
                .flat_map(|p| {
                    values.iter().map(move |&v| {
                        let mut a = p.assignments.clone();
                        a.push((name.clone(), v));
                        SweepPoint { assignments: a }
                    })
                })
                .collect();
        }
        points
    }

    /// Expands and validates every sweep point without running anything.
    pub fn configs(&self) -> Result<Vec<(SweepPoint, BaseConfig)>> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return Err(Error::config("name", format!("{:?} is not a usable directory name", self.name)));
        }
        let allowed = self.base.sweepable();
        for (name, values) in &self.sweep {
            if !allowed.contains(&name.as_str()) {
                return Err(Error::config(
                    name.clone(),
                    format!("not a sweepable parameter (expected one of {allowed:?})"),
                ));
            }
            if values.is_empty() {
                return Err(Error::config(name.clone(), "sweep has no values"));
            }
        }
        self.base.validate()?;
        self.points()
            .into_iter()
            .map(|p| {
                let mut cfg = self.base.clone();
                for (name, v) in &p.assignments {
                    cfg = cfg.with(name, *v)?;
                }
                cfg.validate()?;
                Ok((p, cfg))
            })
            .collect()
    }

    pub fn from_manifest(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        if m.version != MANIFEST_VERSION {
            return Err(Error::config(
                "version",
                format!("manifest version {} is not supported", m.version),
            ));
        }
        Ok(m.experiment)
    }
}

/// Runs every sweep point, writes results and the manifest, and returns the
/// aggregates in sweep order. Configuration errors surface before any run.
pub fn run_experiment(e: &Experiment) -> Result<Vec<PointResult>> {
    let configs = e.configs()?;
    let dir = e.dir();
    for (p, _) in &configs {
        let d = dir.join(p.label());
        fs::create_dir_all(&d).map_err(|err| Error::io(&d, err))?;
    }

    let mut results = Vec::with_capacity(configs.len());
    for (point, cfg) in configs {
        let point_dir = dir.join(point.label());
        let series = match &cfg {
            BaseConfig::Ode(o) => run_ode_point(o)?,
            BaseConfig::Abm(s) => run_abm_point(s, e.keep_replicates.then_some(&point_dir))?,
        };
        write_file(&point_dir.join("mean.csv"), |w| series.write_csv(w))?;
        results.push(PointResult { point, series });
    }

    let manifest = Manifest {
        version: MANIFEST_VERSION,
        experiment: e.clone(),
        points: results.iter().map(|r| r.point.label()).collect(),
    };
    write_file(&e.manifest_path(), |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        w.write_all(b"\n").map_err(|err| Error::io("manifest.json", err))
    })?;
    Ok(results)
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> Result<()>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn run_ode_point(o: &OdeConfig) -> Result<AggregateSeries> {
    let tr = dynamics::integrate(&o.game, o.x0, &o.params)?;
    let rows = tr
        .states
        .iter()
        .zip(&tr.rates)
        .map(|(s, &r)| vec![s.x_a(), s.x_b(), r])
        .collect();
    Ok(AggregateSeries {
        axis: Axis::Time(tr.times),
        columns: vec!["x_A".into(), "x_B".into(), "rate".into()],
        rows,
        replicates: 1,
    })
}

/// Replicate outputs flattened row-major: `iterations × columns`.
fn flatten(records: &[abm::IterationRecord]) -> Vec<f64> {
    let mut out = Vec::new();
    for r in records {
        out.push(r.prop_a);
        out.push(r.prop_b);
        if let Some(s) = &r.rate_shares {
            out.extend_from_slice(s);
        }
    }
    out
}

/// Runs replicates `0..cfg.replicates` and averages them in index order.
pub fn run_replicates(cfg: &SimConfig) -> Result<AggregateSeries> {
    run_abm_point(cfg, None)
}

/// Like [`run_replicates`], also writing `rep_<k>.csv` files into `dir`.
pub fn run_replicates_keeping(cfg: &SimConfig, dir: &Path) -> Result<AggregateSeries> {
    run_abm_point(cfg, Some(dir))
}

fn run_abm_point(cfg: &SimConfig, keep: Option<&Path>) -> Result<AggregateSeries> {
    cfg.validate()?;
    let columns: Vec<String> = cfg.csv_header().into_iter().skip(1).collect();
    let width = columns.len();
    let runs: Vec<Vec<f64>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|k| abm::run_replicate(cfg, k).map(|r| flatten(&r)))
        .collect::<Result<_>>()?;

    let axis = Axis::Iteration((0..cfg.iterations).collect());
    if let Some(dir) = keep {
        for (k, run) in runs.iter().enumerate() {
            let rows: Vec<Vec<f64>> = run.chunks(width).map(<[f64]>::to_vec).collect();
            write_file(&dir.join(format!("rep_{k}.csv")), |w| {
                write_table(&axis, &columns, &rows, w)
            })?;
        }
    }

    let n = runs.len() as f64;
    let mut sums = vec![0.0; cfg.iterations * width];
    for run in &runs {
        for (s, v) in sums.iter_mut().zip(run) {
            *s += v;
        }
    }
    let rows = sums.chunks(width).map(|row| row.iter().map(|s| s / n).collect()).collect();
    Ok(AggregateSeries {
        axis,
        columns,
        rows,
        replicates: cfg.replicates,
    })
}

fn ode_base(a: f64, b: f64, c: f64, params: DynamicsParams) -> BaseConfig {
    BaseConfig::Ode(OdeConfig {
        game: ReducedGame::new(a, b, c).expect("preset payoffs are valid"),
        x0: 0.95,
        params,
    })
}

fn torus_base(c: f64, iterations: usize) -> SimConfig {
    let mut s = SimConfig::new(
        ReducedGame::new(1.0, 1.15, c).expect("preset payoffs are valid"),
        Topology::torus(50, 50),
        iterations,
    );
    s.replicates = DEFAULT_REPLICATES;
    s.base_seed = DEFAULT_SEED;
    s
}

/// The five standard experiments `fig3` to `fig7`, writing
/// under `results/` with 100 replicates and seed 42.
pub fn figure_presets() -> Vec<Experiment> {
    let replicator = DynamicsParams::replicator(dynamics::DEFAULT_DT, dynamics::DEFAULT_T_MAX);
    let mutator = DynamicsParams::mutator(0.0, dynamics::DEFAULT_DT, dynamics::DEFAULT_T_MAX);

    // Tight vs loose society for three payoff gaps; c = 0.3 is above the
    // threshold only for b = 1.15.
    let fig3 = Experiment::new("fig3", ode_base(1.0, 1.15, 0.05, replicator))
        .sweeping("b", &[1.15, 1.5, 2.0])
        .sweeping("c", &[0.05, 0.3]);

    let fig4 = Experiment::new("fig4", {
        let mut s = torus_base(1.0, 6000);
        s.shocks = ShockSchedule::At(vec![2500]);
        BaseConfig::Abm(s)
    })
    .sweeping("c", &[1.0, 0.75, 0.5]);

    let fig5 = Experiment::new("fig5", ode_base(1.0, 1.15, 0.01, replicator))
        .sweeping("c", &[0.01, 0.1]);

    let fig6 = Experiment::new("fig6", ode_base(0.4, 0.6, 0.05, mutator))
        .sweeping("c", &[0.05, 0.3])
        .sweeping("mu", &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);

    let fig7 = Experiment::new("fig7", {
        let mut s = torus_base(1.0, 2000);
        s.shocks = ShockSchedule::Every(75);
        s.exploration = Exploration::Evolving {
            rates: DEFAULT_RATES.to_vec(),
        };
        BaseConfig::Abm(s)
    })
    .sweeping("c", &[1.0, 0.8, 0.5]);

    vec![fig3, fig4, fig5, fig6, fig7]
}

pub fn preset(name: &str) -> Option<Experiment> {
    figure_presets().into_iter().find(|e| e.name == name)
}
