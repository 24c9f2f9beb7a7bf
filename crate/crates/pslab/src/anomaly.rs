//! Decay-rate measurement dataset and the discrepancy statistics built on it:
//! combined errors, relative deviations, σ-distances and the inferred
//! pre-correction theory rate.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnomalyError {
    #[error("sigma distance undefined: both combined errors are zero")]
    ZeroError,
    #[error("inferred theory rates disagree: spread {spread} exceeds {limit} 1/us")]
    InconsistentDataset { spread: f64, limit: f64 },
    #[error("dataset record missing: {0}")]
    MissingRecord(&'static str),
    #[error("record has no numeric value: {0}")]
    ValueLess(String),
    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// One decay-rate datum, in µs⁻¹, with split statistical/systematic errors.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMeasurement {
    pub label: String,
    /// None for records the literature cites without a number.
    pub value: Option<f64>,
    pub stat_err: f64,
    pub sys_err: f64,
    pub source: String,
}

impl RateMeasurement {
    pub fn new(label: &str, value: f64, stat_err: f64, sys_err: f64, source: &str) -> Self {
        RateMeasurement {
            label: label.to_string(),
            value: Some(value),
            stat_err,
            sys_err,
            source: source.to_string(),
        }
    }

    /// Quadrature combination of the statistical and systematic errors.
    pub fn combined_error(&self) -> f64 {
        self.stat_err.hypot(self.sys_err)
    }

    pub fn value(&self) -> Result<f64, AnomalyError> {
        self.value
            .ok_or_else(|| AnomalyError::ValueLess(self.label.clone()))
    }

    fn to_line(&self) -> String {
        let value = match self.value {
            Some(v) => format!("{v}"),
            None => "-".to_string(),
        };
        format!(
            "{} {} {} {} {}",
            self.label, value, self.stat_err, self.sys_err, self.source
        )
    }

    fn from_line(line: &str, lineno: usize) -> Result<RateMeasurement, AnomalyError> {
        let mut it = line.splitn(5, char::is_whitespace);
        let mut field = |name: &str| {
            it.next()
                .filter(|s| !s.is_empty())
                .ok_or_else(|| AnomalyError::Parse {
                    line: lineno,
                    reason: format!("missing field {name}"),
                })
        };
        let label = field("label")?.to_string();
        let value_raw = field("value")?;
        let value = if value_raw == "-" {
            None
        } else {
            Some(value_raw.parse().map_err(|e| AnomalyError::Parse {
                line: lineno,
                reason: format!("value: {e}"),
            })?)
        };
        let stat_err = field("stat_err")?
            .parse()
            .map_err(|e| AnomalyError::Parse {
                line: lineno,
                reason: format!("stat_err: {e}"),
            })?;
        let sys_err = field("sys_err")?.parse().map_err(|e| AnomalyError::Parse {
            line: lineno,
            reason: format!("sys_err: {e}"),
        })?;
        let source = field("source")?.to_string();
        Ok(RateMeasurement {
            label,
            value,
            stat_err,
            sys_err,
            source,
        })
    }
}

/// Relative deviation (a − b)/b of two measured values.
pub fn relative_deviation(a: &RateMeasurement, b: &RateMeasurement) -> Result<f64, AnomalyError> {
    let (va, vb) = (a.value()?, b.value()?);
    Ok((va - vb) / vb)
}

/// |a − b| over the quadrature of the combined errors.
pub fn sigma_discrepancy(a: &RateMeasurement, b: &RateMeasurement) -> Result<f64, AnomalyError> {
    let denom = a.combined_error().hypot(b.combined_error());
    if denom == 0.0 {
        return Err(AnomalyError::ZeroError);
    }
    Ok((a.value()? - b.value()?).abs() / denom)
}

/// Non-perturbative excess fractions the gas and vacuum rates carry over the
/// uncorrected theory rate.
pub const GAS_EXCESS: f64 = 0.0019;
pub const VACUUM_EXCESS: f64 = 0.0014;

/// Consistency limit on the two inversions of the theory rate, µs⁻¹.
pub const THEORY_SPREAD_LIMIT: f64 = 5e-4;

#[derive(Clone, Copy, Debug)]
pub struct InferredTheory {
    /// mean of the two inversions, µs⁻¹
    pub rate: f64,
    /// |gas inversion − vacuum inversion|, µs⁻¹
    pub spread: f64,
}

impl InferredTheory {
    /// The theory rate as a zero-error measurement, for σ-distance closure.
    pub fn as_measurement(&self) -> RateMeasurement {
        RateMeasurement::new("theory", self.rate, 0.0, 0.0, "inferred")
    }
}

/// The measurement dataset plus the isotope-anomaly record.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub records: Vec<RateMeasurement>,
}

pub const GAS_LABEL: &str = "gas_1989";
pub const VACUUM_LABEL: &str = "vacuum_1990";
pub const MODERN_LABEL: &str = "vacuum_2003";
pub const TOKYO_LABEL: &str = "tokyo_1995";

impl Dataset {
    /// The built-in records: the two anomaly-era rates, the 2003 value with
    /// split errors, and the Tokyo entry cited without a number.
    pub fn builtin() -> Dataset {
        Dataset {
            records: vec![
                RateMeasurement::new(GAS_LABEL, 7.0514, 0.0014, 0.0, "buffer-gas"),
                RateMeasurement::new(VACUUM_LABEL, 7.0482, 0.0016, 0.0, "vacuum"),
                RateMeasurement::new(MODERN_LABEL, 7.0404, 0.0010, 0.0008, "vacuum-film"),
                RateMeasurement {
                    label: TOKYO_LABEL.to_string(),
                    value: None,
                    stat_err: 0.0,
                    sys_err: 0.0,
                    source: "powder".to_string(),
                },
            ],
        }
    }

    pub fn get(&self, label: &str) -> Option<&RateMeasurement> {
        self.records.iter().find(|r| r.label == label)
    }

    pub fn gas(&self) -> Result<&RateMeasurement, AnomalyError> {
        self.get(GAS_LABEL)
            .ok_or(AnomalyError::MissingRecord(GAS_LABEL))
    }

    pub fn vacuum(&self) -> Result<&RateMeasurement, AnomalyError> {
        self.get(VACUUM_LABEL)
            .ok_or(AnomalyError::MissingRecord(VACUUM_LABEL))
    }

    pub fn modern(&self) -> Result<&RateMeasurement, AnomalyError> {
        self.get(MODERN_LABEL)
            .ok_or(AnomalyError::MissingRecord(MODERN_LABEL))
    }

    /// Invert the two quoted excess percentages for the unprinted theory
    /// rate: λ_th = λ_gas/(1+0.0019) and λ_th = λ_vac/(1+0.0014).
    pub fn infer_theory_rate(&self) -> Result<InferredTheory, AnomalyError> {
        let from_gas = self.gas()?.value()? / (1.0 + GAS_EXCESS);
        let from_vacuum = self.vacuum()?.value()? / (1.0 + VACUUM_EXCESS);
        let spread = (from_gas - from_vacuum).abs();
        if spread >= THEORY_SPREAD_LIMIT {
            return Err(AnomalyError::InconsistentDataset {
                spread,
                limit: THEORY_SPREAD_LIMIT,
            });
        }
        Ok(InferredTheory {
            rate: 0.5 * (from_gas + from_vacuum),
            spread,
        })
    }

    /// Line-delimited export: `label value stat_err sys_err source`.
    /// Value-less records carry `-` in the value field.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&r.to_line());
            out.push('\n');
        }
        out
    }

    pub fn from_lines(text: &str) -> Result<Dataset, AnomalyError> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            records.push(RateMeasurement::from_line(line, i + 1)?);
        }
        Ok(Dataset { records })
    }
}

/// The gaseous-neon isotope anomaly, recorded as data only: intensity growth
/// factor against the isotope abundance change, with the standard estimate
/// for comparison. No predictive operation exists for it.
#[derive(Clone, Copy, Debug)]
pub struct IsotopeAnomalyRecord {
    pub intensity_factor: f64,
    pub intensity_factor_err: f64,
    /// natural ²²Ne abundance
    pub abundance_hi: f64,
    /// depleted abundance
    pub abundance_lo: f64,
    /// conventional isotope-shift expectation
    pub standard_estimate: f64,
}

impl IsotopeAnomalyRecord {
    pub fn builtin() -> IsotopeAnomalyRecord {
        IsotopeAnomalyRecord {
            intensity_factor: 1.85,
            intensity_factor_err: 0.1,
            abundance_hi: 0.0886,
            abundance_lo: 0.0491,
            standard_estimate: 1e-6,
        }
    }
}
