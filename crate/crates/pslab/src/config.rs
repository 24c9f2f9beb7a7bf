//! Run configuration: constant overrides and the defaults every subcommand
//! shares. Plain `key=value` lines, `#` comments; dump → parse → dump is
//! byte-identical.

use thiserror::Error;

use crate::units::Constants;
use crate::walk::Policy;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{key} must be positive, got {value}")]
    NonPositive { key: &'static str, value: f64 },
    #[error("margins must satisfy 0 <= lo < hi, got {lo} and {hi}")]
    BadMargins { lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    // constant overrides
    pub hbar: f64,
    pub c: f64,
    pub grav: f64,
    pub m_e: f64,
    pub m_p: f64,
    pub e: f64,
    pub alpha: f64,
    pub ev_erg: f64,
    // shared defaults
    pub b_kg: f64,
    pub lambda_s_per_us: f64,
    pub chamber_side_cm: f64,
    pub g_cm_s2: f64,
    /// cell side used for the lattice and chamber sections, at the quoted
    /// precision of the chain output
    pub walk_delta_cm: f64,
    pub walk_policy: Policy,
    pub walk_retries: u32,
    pub region_cell_cap: usize,
    pub margin_lo: f64,
    pub margin_hi: f64,
    pub n_bar: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Config {
        let c = Constants::default();
        Config {
            hbar: c.hbar,
            c: c.c,
            grav: c.grav,
            m_e: c.m_e,
            m_p: c.m_p,
            e: c.e,
            alpha: c.alpha,
            ev_erg: c.ev_erg,
            b_kg: 2.85,
            lambda_s_per_us: crate::ps::DEFAULT_LAMBDA_S_PER_US,
            chamber_side_cm: 1.5,
            g_cm_s2: crate::field::STANDARD_GRAVITY,
            walk_delta_cm: 5.5e-2,
            walk_policy: Policy::Uniform,
            walk_retries: 0,
            region_cell_cap: crate::walk::DEFAULT_CELL_CAP,
            margin_lo: 0.1,
            margin_hi: 0.3,
            n_bar: crate::vsm::DEFAULT_N_BAR,
            seed: 42,
        }
    }
}

impl Config {
    pub fn constants(&self) -> Constants {
        Constants {
            hbar: self.hbar,
            c: self.c,
            grav: self.grav,
            m_e: self.m_e,
            m_p: self.m_p,
            e: self.e,
            alpha: self.alpha,
            ev_erg: self.ev_erg,
        }
    }

    /// Canonical dump: every key, fixed order, shortest round-trip floats.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        out.push_str("# pslab configuration\n");
        for (k, v) in self.float_fields() {
            out.push_str(&format!("{k}={v}\n"));
        }
        out.push_str(&format!("walk_policy={}\n", self.walk_policy.name()));
        out.push_str(&format!("walk_retries={}\n", self.walk_retries));
        out.push_str(&format!("region_cell_cap={}\n", self.region_cell_cap));
        out.push_str(&format!("seed={}\n", self.seed));
        out
    }

    fn float_fields(&self) -> [(&'static str, f64); 16] {
        [
            ("hbar", self.hbar),
            ("c", self.c),
            ("G", self.grav),
            ("m_e", self.m_e),
            ("m_p", self.m_p),
            ("e", self.e),
            ("alpha", self.alpha),
            ("ev_erg", self.ev_erg),
            ("b_kg", self.b_kg),
            ("lambda_s_per_us", self.lambda_s_per_us),
            ("chamber_side_cm", self.chamber_side_cm),
            ("g_cm_s2", self.g_cm_s2),
            ("walk_delta_cm", self.walk_delta_cm),
            ("margin_lo", self.margin_lo),
            ("margin_hi", self.margin_hi),
            ("n_bar", self.n_bar),
        ]
    }

    /// Parse overrides on top of the defaults.
    pub fn parse(text: &str) -> Result<Config, ConfigError> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Parse {
                line: i + 1,
                reason: "expected key=value".to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let fval = || -> Result<f64, ConfigError> {
                value.parse().map_err(|e| ConfigError::Parse {
                    line: i + 1,
                    reason: format!("{key}: {e}"),
                })
            };
            match key {
                "hbar" => cfg.hbar = fval()?,
                "c" => cfg.c = fval()?,
                "G" => cfg.grav = fval()?,
                "m_e" => cfg.m_e = fval()?,
                "m_p" => cfg.m_p = fval()?,
                "e" => cfg.e = fval()?,
                "alpha" => cfg.alpha = fval()?,
                "ev_erg" => cfg.ev_erg = fval()?,
                "b_kg" => cfg.b_kg = fval()?,
                "lambda_s_per_us" => cfg.lambda_s_per_us = fval()?,
                "chamber_side_cm" => cfg.chamber_side_cm = fval()?,
                "g_cm_s2" => cfg.g_cm_s2 = fval()?,
                "walk_delta_cm" => cfg.walk_delta_cm = fval()?,
                "margin_lo" => cfg.margin_lo = fval()?,
                "margin_hi" => cfg.margin_hi = fval()?,
                "n_bar" => cfg.n_bar = fval()?,
                "walk_policy" => {
                    cfg.walk_policy = Policy::parse(value).ok_or(ConfigError::Parse {
                        line: i + 1,
                        reason: format!("unknown policy {value}"),
                    })?
                }
                "walk_retries" => {
                    cfg.walk_retries = value.parse().map_err(|e| ConfigError::Parse {
                        line: i + 1,
                        reason: format!("walk_retries: {e}"),
                    })?
                }
                "region_cell_cap" => {
                    cfg.region_cell_cap = value.parse().map_err(|e| ConfigError::Parse {
                        line: i + 1,
                        reason: format!("region_cell_cap: {e}"),
                    })?
                }
                "seed" => {
                    cfg.seed = value.parse().map_err(|e| ConfigError::Parse {
                        line: i + 1,
                        reason: format!("seed: {e}"),
                    })?
                }
                other => {
                    return Err(ConfigError::Parse {
                        line: i + 1,
                        reason: format!("unknown key {other}"),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (key, value) in [
            ("hbar", self.hbar),
            ("c", self.c),
            ("G", self.grav),
            ("m_e", self.m_e),
            ("m_p", self.m_p),
            ("e", self.e),
            ("alpha", self.alpha),
            ("ev_erg", self.ev_erg),
            ("lambda_s_per_us", self.lambda_s_per_us),
            ("chamber_side_cm", self.chamber_side_cm),
            ("g_cm_s2", self.g_cm_s2),
            ("walk_delta_cm", self.walk_delta_cm),
            ("n_bar", self.n_bar),
        ] {
            if value.is_nan() || value <= 0.0 {
                return Err(ConfigError::NonPositive { key, value });
            }
        }
        if self.b_kg < 0.0 {
            return Err(ConfigError::NonPositive {
                key: "b_kg",
                value: self.b_kg,
            });
        }
        if !(self.margin_lo >= 0.0 && self.margin_lo < self.margin_hi) {
            return Err(ConfigError::BadMargins {
                lo: self.margin_lo,
                hi: self.margin_hi,
            });
        }
        Ok(())
    }
}
