//! Flat `key = value` run configuration.
//!
//! Unknown keys are rejected with their line number; omitted keys fall back
//! to the shipped defaults (the reference parameter set with the drive at
//! the blue Hartmann-Hahn point). `serialize` emits a canonical form whose
//! re-parse reproduces the config exactly.

use hhdr_core::params::{DriveParams, SpinParams, SystemParams, UnitsMode};
use hhdr_core::sweep::Axis;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub units_mode: UnitsMode,
    pub omega_a0: f64,
    pub omega_b0: f64,
    pub gamma_a1: f64,
    pub gamma_a2: f64,
    pub gamma_b1: f64,
    pub gamma_b2: f64,
    pub p_az_s: f64,
    pub p_bz_s: f64,
    pub g: f64,
    pub omega_b1: f64,
    pub delta_b: f64,
    /// Longitudinal channel in single-point damping analysis.
    pub include_d0: bool,
    /// Longitudinal channel in map sweeps (off reproduces the standard map).
    pub sweep_include_d0: bool,
    pub delta_min: f64,
    pub delta_max: f64,
    pub delta_count: usize,
    pub omega_b1_min: f64,
    pub omega_b1_max: f64,
    pub omega_b1_count: usize,
    pub contour_level: f64,
    pub t_end: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub record_stride: usize,
    pub seed_amplitude: f64,
    pub tail_fraction: f64,
    pub seo_delta_count: usize,
    pub seo_omega_b1_count: usize,
    pub lme_dims: Vec<usize>,
    pub lme_instances: usize,
    pub lme_seed: u64,
    pub lme_omega0: f64,
    pub lme_gamma_e: f64,
    pub b_field: f64,
    pub temperature: f64,
    /// Polarization override for the undriven spin in the feasibility
    /// preset (optically pumped); `None` takes the thermal value.
    pub p_az_override: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            units_mode: UnitsMode::Normalized,
            omega_a0: 1.0,
            omega_b0: 0.0,
            gamma_a1: 1e-2,
            gamma_a2: 1e-4,
            gamma_b1: 3.7e-3,
            gamma_b2: 3.7e-2,
            p_az_s: -5e-4,
            p_bz_s: -1.0,
            g: 1.0,
            omega_b1: 0.35,
            delta_b: (1.0_f64 - 4.0 * 0.35 * 0.35).sqrt(),
            include_d0: true,
            sweep_include_d0: false,
            delta_min: -2.0,
            delta_max: 2.0,
            delta_count: 61,
            omega_b1_min: 0.0125,
            omega_b1_max: 1.0,
            omega_b1_count: 81,
            contour_level: -1.0,
            t_end: 4e5,
            rel_tol: 1e-6,
            abs_tol: 1e-12,
            max_steps: 20_000_000,
            record_stride: 4,
            seed_amplitude: 1e-6,
            tail_fraction: 0.2,
            seo_delta_count: 25,
            seo_omega_b1_count: 25,
            lme_dims: vec![2, 3, 4],
            lme_instances: 500,
            lme_seed: 20260810,
            lme_omega0: 1.0,
            lme_gamma_e: 0.1,
            b_field: 0.102,
            temperature: 0.014,
            p_az_override: Some(-1.0),
        }
    }
}

#[derive(Debug)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(n) => write!(f, "config line {n}: {}", self.message),
            None => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn parse_num<T: std::str::FromStr>(value: &str, key: &str, line: usize) -> Result<T, ConfigError> {
    value.trim().parse::<T>().map_err(|_| ConfigError {
        line: Some(line),
        message: format!("malformed value {value:?} for key {key}"),
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    line: Some(line_no),
                    message: format!("expected 'key = value', got {line:?}"),
                });
            };
            let key = key.trim();
            let value = value.trim();
            cfg.apply(key, value, line_no)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        match key {
            "units_mode" => {
                self.units_mode = match value {
                    "normalized" => UnitsMode::Normalized,
                    "absolute" => UnitsMode::AbsoluteRadPerSec,
                    other => {
                        return Err(ConfigError {
                            line: Some(line),
                            message: format!(
                                "units_mode must be 'normalized' or 'absolute', got {other:?}"
                            ),
                        })
                    }
                }
            }
            "omega_a0" => self.omega_a0 = parse_num(value, key, line)?,
            "omega_b0" => self.omega_b0 = parse_num(value, key, line)?,
            "gamma_a1" => self.gamma_a1 = parse_num(value, key, line)?,
            "gamma_a2" => self.gamma_a2 = parse_num(value, key, line)?,
            "gamma_b1" => self.gamma_b1 = parse_num(value, key, line)?,
            "gamma_b2" => self.gamma_b2 = parse_num(value, key, line)?,
            "p_az_s" => self.p_az_s = parse_num(value, key, line)?,
            "p_bz_s" => self.p_bz_s = parse_num(value, key, line)?,
            "g" => self.g = parse_num(value, key, line)?,
            "omega_b1" => self.omega_b1 = parse_num(value, key, line)?,
            "delta_b" => self.delta_b = parse_num(value, key, line)?,
            "include_d0" => self.include_d0 = parse_bool(value, key, line)?,
            "sweep_include_d0" => self.sweep_include_d0 = parse_bool(value, key, line)?,
            "delta_min" => self.delta_min = parse_num(value, key, line)?,
            "delta_max" => self.delta_max = parse_num(value, key, line)?,
            "delta_count" => self.delta_count = parse_num(value, key, line)?,
            "omega_b1_min" => self.omega_b1_min = parse_num(value, key, line)?,
            "omega_b1_max" => self.omega_b1_max = parse_num(value, key, line)?,
            "omega_b1_count" => self.omega_b1_count = parse_num(value, key, line)?,
            "contour_level" => self.contour_level = parse_num(value, key, line)?,
            "t_end" => self.t_end = parse_num(value, key, line)?,
            "rel_tol" => self.rel_tol = parse_num(value, key, line)?,
            "abs_tol" => self.abs_tol = parse_num(value, key, line)?,
            "max_steps" => self.max_steps = parse_num(value, key, line)?,
            "record_stride" => self.record_stride = parse_num(value, key, line)?,
            "seed_amplitude" => self.seed_amplitude = parse_num(value, key, line)?,
            "tail_fraction" => self.tail_fraction = parse_num(value, key, line)?,
            "seo_delta_count" => self.seo_delta_count = parse_num(value, key, line)?,
            "seo_omega_b1_count" => self.seo_omega_b1_count = parse_num(value, key, line)?,
            "lme_dims" => {
                let mut dims = Vec::new();
                for part in value.split(',') {
                    dims.push(parse_num(part, key, line)?);
                }
                self.lme_dims = dims;
            }
            "lme_instances" => self.lme_instances = parse_num(value, key, line)?,
            "lme_seed" => self.lme_seed = parse_num(value, key, line)?,
            "lme_omega0" => self.lme_omega0 = parse_num(value, key, line)?,
            "lme_gamma_e" => self.lme_gamma_e = parse_num(value, key, line)?,
            "b_field" => self.b_field = parse_num(value, key, line)?,
            "temperature" => self.temperature = parse_num(value, key, line)?,
            "p_az_override" => {
                self.p_az_override = if value == "thermal" {
                    None
                } else {
                    Some(parse_num(value, key, line)?)
                }
            }
            unknown => {
                return Err(ConfigError {
                    line: Some(line),
                    message: format!("unknown key {unknown:?}"),
                })
            }
        }
        Ok(())
    }

    /// Physical validation, delegated to the library constructors.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.system_params().map(|_| ())?;
        for (name, v) in [
            ("tail_fraction", self.tail_fraction),
            ("seed_amplitude", self.seed_amplitude),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError {
                    line: None,
                    message: format!("{name} must be positive"),
                });
            }
        }
        if self.tail_fraction > 1.0 {
            return Err(ConfigError {
                line: None,
                message: "tail_fraction must not exceed 1".into(),
            });
        }
        Ok(())
    }

    pub fn system_params(&self) -> Result<SystemParams, ConfigError> {
        SystemParams::new(
            SpinParams {
                omega0: self.omega_a0,
                gamma1: self.gamma_a1,
                gamma2: self.gamma_a2,
                pz_eq: self.p_az_s,
            },
            SpinParams {
                omega0: self.omega_b0,
                gamma1: self.gamma_b1,
                gamma2: self.gamma_b2,
                pz_eq: self.p_bz_s,
            },
            DriveParams {
                omega_b1: self.omega_b1,
                delta_b: self.delta_b,
            },
            self.g,
            self.units_mode,
        )
        .map_err(|e| ConfigError {
            line: None,
            message: e.to_string(),
        })
    }

    pub fn sweep_axes(&self) -> Result<(Axis, Axis), ConfigError> {
        let to_err = |e: hhdr_core::Error| ConfigError {
            line: None,
            message: e.to_string(),
        };
        Ok((
            Axis::new(self.delta_min, self.delta_max, self.delta_count).map_err(to_err)?,
            Axis::new(self.omega_b1_min, self.omega_b1_max, self.omega_b1_count)
                .map_err(to_err)?,
        ))
    }

    pub fn seo_axes(&self) -> Result<(Axis, Axis), ConfigError> {
        let to_err = |e: hhdr_core::Error| ConfigError {
            line: None,
            message: e.to_string(),
        };
        Ok((
            Axis::new(self.delta_min, self.delta_max, self.seo_delta_count).map_err(to_err)?,
            Axis::new(self.omega_b1_min, self.omega_b1_max, self.seo_omega_b1_count)
                .map_err(to_err)?,
        ))
    }

    /// Canonical serialization; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mode = match self.units_mode {
            UnitsMode::Normalized => "normalized",
            UnitsMode::AbsoluteRadPerSec => "absolute",
        };
        let dims = self
            .lme_dims
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let override_str = match self.p_az_override {
            Some(v) => format!("{v:e}"),
            None => "thermal".to_string(),
        };
        use std::fmt::Write;
        let _ = writeln!(s, "units_mode = {mode}");
        let _ = writeln!(s, "omega_a0 = {:e}", self.omega_a0);
        let _ = writeln!(s, "omega_b0 = {:e}", self.omega_b0);
        let _ = writeln!(s, "gamma_a1 = {:e}", self.gamma_a1);
        let _ = writeln!(s, "gamma_a2 = {:e}", self.gamma_a2);
        let _ = writeln!(s, "gamma_b1 = {:e}", self.gamma_b1);
        let _ = writeln!(s, "gamma_b2 = {:e}", self.gamma_b2);
        let _ = writeln!(s, "p_az_s = {:e}", self.p_az_s);
        let _ = writeln!(s, "p_bz_s = {:e}", self.p_bz_s);
        let _ = writeln!(s, "g = {:e}", self.g);
        let _ = writeln!(s, "omega_b1 = {:e}", self.omega_b1);
        let _ = writeln!(s, "delta_b = {:e}", self.delta_b);
        let _ = writeln!(s, "include_d0 = {}", self.include_d0);
        let _ = writeln!(s, "sweep_include_d0 = {}", self.sweep_include_d0);
        let _ = writeln!(s, "delta_min = {:e}", self.delta_min);
        let _ = writeln!(s, "delta_max = {:e}", self.delta_max);
        let _ = writeln!(s, "delta_count = {}", self.delta_count);
        let _ = writeln!(s, "omega_b1_min = {:e}", self.omega_b1_min);
        let _ = writeln!(s, "omega_b1_max = {:e}", self.omega_b1_max);
        let _ = writeln!(s, "omega_b1_count = {}", self.omega_b1_count);
        let _ = writeln!(s, "contour_level = {:e}", self.contour_level);
        let _ = writeln!(s, "t_end = {:e}", self.t_end);
        let _ = writeln!(s, "rel_tol = {:e}", self.rel_tol);
        let _ = writeln!(s, "abs_tol = {:e}", self.abs_tol);
        let _ = writeln!(s, "max_steps = {}", self.max_steps);
        let _ = writeln!(s, "record_stride = {}", self.record_stride);
        let _ = writeln!(s, "seed_amplitude = {:e}", self.seed_amplitude);
        let _ = writeln!(s, "tail_fraction = {:e}", self.tail_fraction);
        let _ = writeln!(s, "seo_delta_count = {}", self.seo_delta_count);
        let _ = writeln!(s, "seo_omega_b1_count = {}", self.seo_omega_b1_count);
        let _ = writeln!(s, "lme_dims = {dims}");
        let _ = writeln!(s, "lme_instances = {}", self.lme_instances);
        let _ = writeln!(s, "lme_seed = {}", self.lme_seed);
        let _ = writeln!(s, "lme_omega0 = {:e}", self.lme_omega0);
        let _ = writeln!(s, "lme_gamma_e = {:e}", self.lme_gamma_e);
        let _ = writeln!(s, "b_field = {:e}", self.b_field);
        let _ = writeln!(s, "temperature = {:e}", self.temperature);
        let _ = writeln!(s, "p_az_override = {override_str}");
        s
    }
}

fn parse_bool(value: &str, key: &str, line: usize) -> Result<bool, ConfigError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(ConfigError {
            line: Some(line),
            message: format!("key {key} expects true/false, got {other:?}"),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.g, 1.0);
        assert_eq!(cfg.gamma_b1, 3.7e-3);
        assert_eq!(cfg.p_bz_s, -1.0);
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = RunConfig::parse("# a comment\n\n g = 0.5 # trailing\n").unwrap();
        assert_eq!(cfg.g, 0.5);
    }

    #[test]
    fn unknown_key_is_rejected_with_line_number() {
        let err = RunConfig::parse("\n\nnot_a_key = 1\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.message.contains("not_a_key"));
    }

    #[test]
    fn malformed_number_is_rejected() {
        let err = RunConfig::parse("gamma_a2 = banana").unwrap_err();
        assert_eq!(err.line, Some(1));
        assert!(err.message.contains("gamma_a2"));
    }

    #[test]
    fn physical_validation_names_the_failure() {
        let err = RunConfig::parse("gamma_a2 = -1").unwrap_err();
        assert!(err.message.contains("gamma2"), "{}", err.message);
    }

    #[test]
    fn serialize_parse_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.g = 0.321;
        cfg.lme_dims = vec![2, 4];
        cfg.p_az_override = None;
        cfg.units_mode = UnitsMode::Normalized;
        let text = cfg.serialize();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn default_system_params_match_reference() {
        let cfg = RunConfig::default();
        let p = cfg.system_params().unwrap();
        assert_eq!(p, hhdr_core::params::reference_params());
    }
}
