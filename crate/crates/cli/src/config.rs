//! Project configuration: one TOML file describing the plant, the fast
//! controller, rates, schedule, sweep grid, and output directory.
//! Coefficient lists are written descending (highest power first), matching
//! the usual display convention.

use serde::Deserialize;

use interlace_core::{InputStrategy, OutputStrategy, Polynomial, RationalTF, StateSpace};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectConfig {
    /// Fast sampling period T in seconds.
    pub period: f64,
    /// Metaperiod ratio N.
    pub n: usize,
    /// Slow-pole magnitude threshold.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_out_dir")]
    pub out_dir: String,
    pub plant: PlantConfig,
    pub controller: ControllerConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
}

fn default_threshold() -> f64 {
    0.85
}

fn default_out_dir() -> String {
    "out".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantConfig {
    /// "continuous-tf" (zero-order-hold discretized at T) or "discrete-tf".
    pub kind: String,
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    /// "tf" (descending coefficients) or "zpk" (zeros/poles as [re, im]
    /// pairs plus a gain), discrete at T.
    pub kind: String,
    #[serde(default)]
    pub num: Vec<f64>,
    #[serde(default)]
    pub den: Vec<f64>,
    #[serde(default)]
    pub zeros: Vec<[f64; 2]>,
    #[serde(default)]
    pub poles: Vec<[f64; 2]>,
    #[serde(default)]
    pub gain: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    /// Execution order: `order[phase]` is the slow-block index fired at that
    /// phase. Defaults to descending dc-gain magnitude.
    #[serde(default)]
    pub order: Option<Vec<usize>>,
    /// "i1" (fast input) or "i2" (slow input).
    #[serde(default = "default_input")]
    pub input: String,
    /// "o1" (fast output change) or "o2" (slow output change).
    #[serde(default = "default_output")]
    pub output: String,
}

fn default_input() -> String {
    "i1".into()
}

fn default_output() -> String {
    "o1".into()
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            order: None,
            input: default_input(),
            output: default_output(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub omega_min: f64,
    /// Defaults to just below the fast Nyquist rate pi / T.
    #[serde(default)]
    pub omega_max: Option<f64>,
    pub points: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            omega_min: 1.0e-3,
            omega_max: None,
            points: 400,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    /// Run length in seconds.
    pub duration: f64,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        SimulateConfig { duration: 60.0 }
    }
}

fn check_coeffs(field: &str, coeffs: &[f64]) -> Result<(), CliError> {
    if coeffs.is_empty() {
        return Err(CliError::Config(format!("{field}: empty coefficient list")));
    }
    if coeffs.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Config(format!("{field}: non-finite coefficient")));
    }
    Ok(())
}

impl ProjectConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: ProjectConfig =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{e}")))?;
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.period <= 0.0 || self.period.is_nan() {
            return Err(CliError::Config(format!(
                "period: must be positive, got {}",
                self.period
            )));
        }
        if self.n < 1 {
            return Err(CliError::Config("n: must be at least 1".into()));
        }
        if self.threshold <= 0.0 || self.threshold >= 1.0 {
            return Err(CliError::Config(format!(
                "threshold: must lie in (0, 1), got {}",
                self.threshold
            )));
        }
        match self.plant.kind.as_str() {
            "continuous-tf" | "discrete-tf" => {}
            other => {
                return Err(CliError::Config(format!(
                    "plant.kind: unknown kind {other:?} (expected \"continuous-tf\" or \"discrete-tf\")"
                )))
            }
        }
        check_coeffs("plant.num", &self.plant.num)?;
        check_coeffs("plant.den", &self.plant.den)?;
        match self.controller.kind.as_str() {
            "tf" => {
                check_coeffs("controller.num", &self.controller.num)?;
                check_coeffs("controller.den", &self.controller.den)?;
            }
            "zpk" => {
                if self.controller.poles.is_empty() {
                    return Err(CliError::Config("controller.poles: empty".into()));
                }
                if self.controller.gain.is_none() {
                    return Err(CliError::Config("controller.gain: missing".into()));
                }
            }
            other => {
                return Err(CliError::Config(format!(
                    "controller.kind: unknown kind {other:?} (expected \"tf\" or \"zpk\")"
                )))
            }
        }
        parse_input(&self.schedule.input)?;
        parse_output(&self.schedule.output)?;
        if self.sweep.points < 1 {
            return Err(CliError::Config("sweep.points: must be at least 1".into()));
        }
        if self.simulate.duration < 0.0 {
            return Err(CliError::Config("simulate.duration: must be >= 0".into()));
        }
        Ok(())
    }

    pub fn plant_state_space(&self) -> Result<StateSpace, CliError> {
        let period = match self.plant.kind.as_str() {
            "continuous-tf" => 0.0,
            _ => self.period,
        };
        let tf = RationalTF::from_descending(&self.plant.num, &self.plant.den, period)
            .map_err(|e| CliError::Config(format!("plant: {e}")))?;
        let ss = tf
            .to_state_space()
            .map_err(|e| CliError::Config(format!("plant: {e}")))?;
        if period == 0.0 {
            ss.c2d_zoh(self.period).map_err(CliError::numeric)
        } else {
            Ok(ss)
        }
    }

    pub fn controller_tf(&self) -> Result<RationalTF, CliError> {
        match self.controller.kind.as_str() {
            "tf" => {
                RationalTF::from_descending(&self.controller.num, &self.controller.den, self.period)
                    .map_err(|e| CliError::Config(format!("controller: {e}")))
            }
            _ => {
                let to_roots = |pairs: &[[f64; 2]]| -> Vec<num_complex::Complex64> {
                    pairs
                        .iter()
                        .map(|p| num_complex::Complex64::new(p[0], p[1]))
                        .collect()
                };
                let gain = self.controller.gain.unwrap_or(1.0);
                let num = Polynomial::from_roots(&to_roots(&self.controller.zeros), gain);
                let den = Polynomial::from_roots(&to_roots(&self.controller.poles), 1.0);
                RationalTF::new(num, den, self.period)
                    .map_err(|e| CliError::Config(format!("controller: {e}")))
            }
        }
    }

    pub fn omega_max(&self) -> f64 {
        self.sweep
            .omega_max
            .unwrap_or(std::f64::consts::PI / self.period * 0.999)
    }
}

pub fn parse_input(s: &str) -> Result<InputStrategy, CliError> {
    match s {
        "i1" => Ok(InputStrategy::Fast),
        "i2" => Ok(InputStrategy::Slow),
        other => Err(CliError::Config(format!(
            "schedule.input: unknown strategy {other:?} (expected \"i1\" or \"i2\")"
        ))),
    }
}

pub fn parse_output(s: &str) -> Result<OutputStrategy, CliError> {
    match s {
        "o1" => Ok(OutputStrategy::Fast),
        "o2" => Ok(OutputStrategy::Slow),
        other => Err(CliError::Config(format!(
            "schedule.output: unknown strategy {other:?} (expected \"o1\" or \"o2\")"
        ))),
    }
}

/// Parses a combined strategy code like "i1o2".
pub fn parse_strategy(s: &str) -> Result<(InputStrategy, OutputStrategy), CliError> {
    if s.len() == 4 {
        let (i, o) = s.split_at(2);
        if let (Ok(i), Ok(o)) = (parse_input(i), parse_output(o)) {
            return Ok((i, o));
        }
    }
    Err(CliError::Config(format!(
        "strategy: expected one of i1o1, i1o2, i2o1, i2o2, got {s:?}"
    )))
}
