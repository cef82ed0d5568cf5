use crate::error::{Error, Result};

/// Piecewise-constant control t -> delta(t), right-continuous.
///
/// `levels[i]` holds on `[breakpoints[i - 1], breakpoints[i])`; the first
/// level also covers every time before the first breakpoint and the last
/// level every time after the final one.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl ControlSchedule {
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<ControlSchedule> {
        if levels.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidSchedule(format!(
                "{} breakpoints need {} levels, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                levels.len()
            )));
        }
        if breakpoints.iter().chain(&levels).any(|v| !v.is_finite()) {
            return Err(Error::InvalidSchedule("non-finite value".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSchedule(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(ControlSchedule {
            breakpoints,
            levels,
        })
    }

    pub fn constant(level: f64) -> ControlSchedule {
        ControlSchedule {
            breakpoints: Vec::new(),
            levels: vec![level],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b <= t);
        self.levels[k]
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn max_abs_level(&self) -> f64 {
        self.levels.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}
