//! Deterministic spectrum synthesis: inverse-CDF event times per component,
//! Gaussian resolution smearing, binning, flat Poisson background.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use super::model::RateModel;
use super::SpectrumError;

/// Mixture of decay components with instrument effects.
#[derive(Clone, Debug)]
pub struct SpectrumModel {
    /// (intensity fraction, component); fractions sum to ≤ 1, the remainder
    /// is the share that never reaches the detector window
    pub components: Vec<(f64, RateModel)>,
    /// Gaussian timing resolution σ, ns; 0 disables smearing
    pub resolution_sigma_ns: f64,
    /// flat background mean per bin, counts
    pub background_per_bin: f64,
    pub t0_ns: f64,
    pub t1_ns: f64,
    pub bin_width_ns: f64,
}

impl SpectrumModel {
    pub fn single(model: RateModel, t0_ns: f64, t1_ns: f64, bin_width_ns: f64) -> SpectrumModel {
        SpectrumModel {
            components: vec![(1.0, model)],
            resolution_sigma_ns: 0.0,
            background_per_bin: 0.0,
            t0_ns,
            t1_ns,
            bin_width_ns,
        }
    }

    pub fn n_bins(&self) -> usize {
        ((self.t1_ns - self.t0_ns) / self.bin_width_ns).round() as usize
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if self.components.is_empty() && self.background_per_bin == 0.0 {
            return Err(SpectrumError::DegenerateModel);
        }
        let mut total = 0.0;
        for (intensity, m) in &self.components {
            if *intensity < 0.0 {
                return Err(SpectrumError::InvalidModel("negative intensity".into()));
            }
            total += intensity;
            m.validate()?;
        }
        if total > 1.0 + 1e-12 {
            return Err(SpectrumError::InvalidModel(format!(
                "intensities sum to {total} > 1"
            )));
        }
        if self.t0_ns >= self.t1_ns || self.bin_width_ns <= 0.0 || self.n_bins() == 0 {
            return Err(SpectrumError::InvalidModel("bad time window".into()));
        }
        if self.resolution_sigma_ns < 0.0 || self.background_per_bin < 0.0 {
            return Err(SpectrumError::InvalidModel(
                "negative resolution or background".into(),
            ));
        }
        Ok(())
    }
}

/// A binned spectrum; the seed that generated it travels with the data.
#[derive(Clone, Debug, PartialEq)]
pub struct LifetimeSpectrum {
    pub t0_ns: f64,
    pub bin_width_ns: f64,
    pub counts: Vec<u64>,
    pub total_events: u64,
    pub seed: u64,
}

impl LifetimeSpectrum {
    pub fn n_bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let lo = self.t0_ns + i as f64 * self.bin_width_ns;
        (lo, lo + self.bin_width_ns)
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Header `# bins t0_ns dt_ns seed`, then one count per line.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "# {} {} {} {}\n",
            self.counts.len(),
            self.t0_ns,
            self.bin_width_ns,
            self.seed
        );
        for c in &self.counts {
            out.push_str(&format!("{c}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<LifetimeSpectrum, SpectrumError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or(SpectrumError::Parse {
            line: 1,
            reason: "empty file".into(),
        })?;
        let header = header.strip_prefix('#').ok_or(SpectrumError::Parse {
            line: 1,
            reason: "missing # header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(SpectrumError::Parse {
                line: 1,
                reason: format!("header needs 4 fields, got {}", fields.len()),
            });
        }
        let parse_err = |line: usize, e: String| SpectrumError::Parse { line, reason: e };
        let bins: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(1, format!("{e}")))?;
        let t0_ns: f64 = fields[1]
            .parse()
            .map_err(|e| parse_err(1, format!("{e}")))?;
        let bin_width_ns: f64 = fields[2]
            .parse()
            .map_err(|e| parse_err(1, format!("{e}")))?;
        let seed: u64 = fields[3]
            .parse()
            .map_err(|e| parse_err(1, format!("{e}")))?;
        let mut counts = Vec::with_capacity(bins);
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            counts.push(line.parse().map_err(|e| parse_err(i + 1, format!("{e}")))?);
        }
        if counts.len() != bins {
            return Err(SpectrumError::Parse {
                line: counts.len() + 1,
                reason: format!("expected {bins} counts, got {}", counts.len()),
            });
        }
        let total = counts.iter().sum();
        Ok(LifetimeSpectrum {
            t0_ns,
            bin_width_ns,
            counts,
            total_events: total,
            seed,
        })
    }
}

/// Draw `n_events` from the mixture, smear, bin, and add background.
/// Fully determined by (model, n_events, seed).
pub fn synthesize(
    model: &SpectrumModel,
    n_events: u64,
    seed: u64,
) -> Result<LifetimeSpectrum, SpectrumError> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_bins = model.n_bins();
    let mut counts = vec![0u64; n_bins];

    for _ in 0..n_events {
        let pick: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = None;
        for (intensity, m) in &model.components {
            acc += intensity;
            if pick < acc {
                chosen = Some(m);
                break;
            }
        }
        // The unassigned share of the mixture produces no detected event.
        let Some(m) = chosen else { continue };
        let u: f64 = rng.random();
        let survival_target = 1.0 - u; // in (0, 1]
        let mut t = m.invert_survival(survival_target);
        if model.resolution_sigma_ns > 0.0 {
            let z: f64 = StandardNormal.sample(&mut rng);
            t += model.resolution_sigma_ns * z;
        }
        let idx = ((t - model.t0_ns) / model.bin_width_ns).floor();
        if idx >= 0.0 && (idx as usize) < n_bins {
            counts[idx as usize] += 1;
        }
    }

    if model.background_per_bin > 0.0 {
        let poisson = Poisson::new(model.background_per_bin)
            .map_err(|e| SpectrumError::InvalidModel(format!("background: {e}")))?;
        for c in counts.iter_mut() {
            *c += poisson.sample(&mut rng) as u64;
        }
    }

    Ok(LifetimeSpectrum {
        t0_ns: model.t0_ns,
        bin_width_ns: model.bin_width_ns,
        counts,
        total_events: n_events,
        seed,
    })
}
