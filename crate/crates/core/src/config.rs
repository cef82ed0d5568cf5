//! Flat `key=value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Unknown keys and
//! repeated keys are errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dynamics::{Frame, DEFAULT_CFL};
use crate::error::{Error, Result};
use crate::experiments::Theorem1Config;
use crate::field::Grid;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LLG_OUT_DIR";

pub const KNOWN_KEYS: &[&str] = &[
    "grid.n",
    "grid.half_width",
    "sim.dt_cfl",
    "sim.t_end",
    "sim.delta",
    "sim.frame",
    "sim.output_interval",
    "ctrl.sigma1",
    "ctrl.sigma2",
    "ctrl.delta1",
    "ctrl.delta2",
    "ctrl.theta1",
    "ctrl.epsilon",
    "ctrl.epsilon0",
    "ctrl.delta0",
    "ctrl.perturbation",
    "ctrl.T",
    "ctrl.post_horizon",
    "ctrl.decay_skip",
    "ctrl.decay_floor",
    "seed",
    "out_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub half_width: f64,
    pub dt_cfl: f64,
    pub t_end: f64,
    pub delta: f64,
    pub frame: Frame,
    pub output_interval: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub theta1: f64,
    pub epsilon: f64,
    pub epsilon0: f64,
    pub delta0: f64,
    pub perturbation: f64,
    pub switch_time: Option<f64>,
    pub post_horizon: f64,
    pub decay_skip: f64,
    pub decay_floor: f64,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = Theorem1Config::default();
        RunConfig {
            n: t.grid.len(),
            half_width: t.grid.half_width(),
            dt_cfl: DEFAULT_CFL,
            t_end: 50.0,
            delta: 0.0,
            frame: Frame::Lab,
            output_interval: t.output_interval,
            sigma1: t.sigma1,
            sigma2: t.sigma2,
            delta1: t.delta1,
            delta2: t.delta2,
            theta1: t.theta1,
            epsilon: t.epsilon,
            epsilon0: t.epsilon0,
            delta0: t.delta0,
            perturbation: t.perturbation,
            switch_time: t.t_hint,
            post_horizon: t.post_horizon,
            decay_skip: t.decay_skip,
            decay_floor: t.decay_floor,
            seed: t.seed,
            out_dir: None,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("line {line}: cannot parse `{value}` for `{key}`")))
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {line}: expected key=value, got `{body}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Config(format!("line {line}: unknown key `{key}`")));
            }
            if seen.contains(&key) {
                return Err(Error::Config(format!("line {line}: duplicate key `{key}`")));
            }
            seen.push(key);
            match key {
                "grid.n" => cfg.n = parse(key, value, line)?,
                "grid.half_width" => cfg.half_width = parse(key, value, line)?,
                "sim.dt_cfl" => cfg.dt_cfl = parse(key, value, line)?,
                "sim.t_end" => cfg.t_end = parse(key, value, line)?,
                "sim.delta" => cfg.delta = parse(key, value, line)?,
                "sim.frame" => cfg.frame = parse(key, value, line)?,
                "sim.output_interval" => cfg.output_interval = parse(key, value, line)?,
                "ctrl.sigma1" => cfg.sigma1 = parse(key, value, line)?,
                "ctrl.sigma2" => cfg.sigma2 = parse(key, value, line)?,
                "ctrl.delta1" => cfg.delta1 = parse(key, value, line)?,
                "ctrl.delta2" => cfg.delta2 = parse(key, value, line)?,
                "ctrl.theta1" => cfg.theta1 = parse(key, value, line)?,
                "ctrl.epsilon" => cfg.epsilon = parse(key, value, line)?,
                "ctrl.epsilon0" => cfg.epsilon0 = parse(key, value, line)?,
                "ctrl.delta0" => cfg.delta0 = parse(key, value, line)?,
                "ctrl.perturbation" => cfg.perturbation = parse(key, value, line)?,
                "ctrl.T" => cfg.switch_time = Some(parse(key, value, line)?),
                "ctrl.post_horizon" => cfg.post_horizon = parse(key, value, line)?,
                "ctrl.decay_skip" => cfg.decay_skip = parse(key, value, line)?,
                "ctrl.decay_floor" => cfg.decay_floor = parse(key, value, line)?,
                "seed" => cfg.seed = parse(key, value, line)?,
                "out_dir" => cfg.out_dir = Some(PathBuf::from(value)),
                _ => unreachable!("key list and match arms agree"),
            }
        }
        cfg.grid()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config `{}`: {e}", path.display())))?;
        RunConfig::parse_str(&text)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.half_width, self.n)
    }

    pub fn theorem1(&self) -> Result<Theorem1Config> {
        Ok(Theorem1Config {
            grid: self.grid()?,
            cfl: self.dt_cfl,
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            delta1: self.delta1,
            delta2: self.delta2,
            theta1: self.theta1,
            epsilon: self.epsilon,
            epsilon0: self.epsilon0,
            delta0: self.delta0,
            perturbation: self.perturbation,
            seed: self.seed,
            t_hint: self.switch_time,
            post_horizon: self.post_horizon,
            output_interval: self.output_interval,
            decay_skip: self.decay_skip,
            decay_floor: self.decay_floor,
        })
    }

    /// Output directory: `flag`, then the config entry, then the environment
    /// variable, then `out`.
    pub fn resolve_out_dir(&self, flag: Option<&Path>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.out_dir.clone())
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"))
    }
}
