//! Bias and detectability studies built on the synthesizer and fitter.

use rayon::prelude::*;

use super::fit::{fit_binned, FitTemplate};
use super::model::RateModel;
use super::synth::{synthesize, SpectrumModel};
use super::SpectrumError;

/// Expected (noise-free) bin contents of a spectrum model, including the
/// flat background. With smearing enabled this path supports constant-rate
/// components only; the time-dependent models are synthesized unsmeared.
pub fn expected_counts(model: &SpectrumModel, n_events: f64) -> Result<Vec<f64>, SpectrumError> {
    model.validate()?;
    let n_bins = model.n_bins();
    let mut out = vec![model.background_per_bin; n_bins];
    if model.resolution_sigma_ns > 0.0 {
        for (_, m) in &model.components {
            if !m.is_constant() {
                return Err(SpectrumError::InvalidModel(
                    "smeared expected counts need constant-rate components".into(),
                ));
            }
        }
    }
    for (intensity, m) in &model.components {
        if model.resolution_sigma_ns > 0.0 {
            // Closed-form smeared bin mass via a one-component template pass.
            let probs = smeared_probs(model, m.asymptotic_rate());
            for (b, p) in probs.iter().enumerate() {
                out[b] += n_events * intensity * p;
            }
        } else {
            for (b, slot) in out.iter_mut().enumerate() {
                let lo = model.t0_ns + b as f64 * model.bin_width_ns;
                let hi = lo + model.bin_width_ns;
                *slot += n_events * intensity * (m.survival(lo) - m.survival(hi));
            }
        }
    }
    Ok(out)
}

fn smeared_probs(model: &SpectrumModel, rate_per_us: f64) -> Vec<f64> {
    let sigma_us = model.resolution_sigma_ns / 1e3;
    (0..model.n_bins())
        .map(|b| {
            let lo = (model.t0_ns + b as f64 * model.bin_width_ns) / 1e3;
            let hi = (model.t0_ns + (b + 1) as f64 * model.bin_width_ns) / 1e3;
            super::fit::bin_prob(lo, hi, rate_per_us, sigma_us)
        })
        .collect()
}

/// Outcome of the thermalization-bias study: how far a constant-rate fit to
/// a time-dependent truth lands from the fully relaxed rate.
#[derive(Clone, Copy, Debug)]
pub struct BiasStudy {
    /// bias of the noise-free fit, ppm of the relaxed rate
    pub bias_ppm: f64,
    /// fitted constant rate, µs⁻¹
    pub lambda_fit: f64,
    /// relaxed reference rate κ∞λ_T + p∞, µs⁻¹
    pub lambda_reference: f64,
    /// Monte Carlo mean bias, ppm
    pub mc_mean_ppm: f64,
    /// standard error of the MC mean, ppm
    pub mc_stderr_ppm: f64,
    pub mc_runs: usize,
}

/// Fit a constant-rate template to spectra drawn from `truth` on the given
/// window. The headline number comes from noise-free expected counts; the
/// Monte Carlo ensemble supplies the error bar.
pub fn thermalization_bias_study(
    truth: &RateModel,
    window_ns: (f64, f64),
    bin_width_ns: f64,
    n_events: u64,
    mc_runs: usize,
    seed: u64,
) -> Result<BiasStudy, SpectrumError> {
    truth.validate()?;
    let model = SpectrumModel::single(*truth, window_ns.0, window_ns.1, bin_width_ns);
    let reference = truth.asymptotic_rate();
    let expected = expected_counts(&model, n_events as f64)?;
    let total: f64 = expected.iter().sum();
    let template = |counts_total: f64| FitTemplate::single(counts_total * 1.5, reference);

    let fit = fit_binned(&expected, window_ns.0, bin_width_ns, &template(total))?;
    let lambda_fit = fit.get("rate_0").expect("rate param").value;
    let bias_ppm = (lambda_fit - reference) / reference * 1e6;

    let ppms: Vec<f64> = (0..mc_runs)
        .into_par_iter()
        .map(|i| {
            let spec = synthesize(&model, n_events, seed.wrapping_add(i as u64))?;
            let fit = fit_binned(
                &spec.counts.iter().map(|&c| c as f64).collect::<Vec<_>>(),
                window_ns.0,
                bin_width_ns,
                &template(spec.total_counts() as f64),
            )?;
            Ok((fit.get("rate_0").unwrap().value - reference) / reference * 1e6)
        })
        .collect::<Result<Vec<f64>, SpectrumError>>()?;
    let (mc_mean, mc_stderr) = if ppms.is_empty() {
        (0.0, 0.0)
    } else {
        let mean = ppms.iter().sum::<f64>() / ppms.len() as f64;
        let var = ppms.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>()
            / (ppms.len().max(2) - 1) as f64;
        (mean, (var / ppms.len() as f64).sqrt())
    };
    Ok(BiasStudy {
        bias_ppm,
        lambda_fit,
        lambda_reference: reference,
        mc_mean_ppm: mc_mean,
        mc_stderr_ppm: mc_stderr,
        mc_runs,
    })
}

/// Significance of distinguishing λ_T(1 + contribution) from λ_T at the
/// statistical precision the fit curvature grants `n_events`.
#[derive(Clone, Copy, Debug)]
pub struct Detectability {
    pub significance_sigma: f64,
    /// σ_stat(λ̂)/λ̂ at this event count
    pub rel_stat_err: f64,
    pub n_events: u64,
}

pub fn extra_mode_detectability(
    contribution: f64,
    n_events: u64,
    lambda_t: f64,
    window_ns: (f64, f64),
    bin_width_ns: f64,
) -> Result<Detectability, SpectrumError> {
    if !(0.0..=0.01).contains(&contribution) {
        return Err(SpectrumError::InvalidContribution(contribution));
    }
    let model = SpectrumModel::single(
        RateModel::constant(lambda_t),
        window_ns.0,
        window_ns.1,
        bin_width_ns,
    );
    let expected = expected_counts(&model, n_events as f64)?;
    let template = FitTemplate::single(n_events as f64, lambda_t);
    let fit = fit_binned(&expected, window_ns.0, bin_width_ns, &template)?;
    let rate = fit.get("rate_0").expect("rate param");
    let rel = rate.error / rate.value;
    Ok(Detectability {
        significance_sigma: contribution / rel,
        rel_stat_err: rel,
        n_events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn expected_counts_match_survival() {
        let m = RateModel::constant(7.0404);
        let model = SpectrumModel::single(m, 0.0, 1420.0, 2.0);
        let mu = expected_counts(&model, 1e6).unwrap();
        let lambda = 7.0404e-3;
        let exact = 1e6 * ((-lambda * 10.0f64).exp() - (-lambda * 12.0f64).exp());
        assert!(rel(mu[5], exact) < 1e-12);
    }

    #[test]
    fn zero_bias_for_time_independent_truth() {
        let truth = RateModel::with_pickoff(7.0404, 0.01, 0.0, 100.0);
        let study = thermalization_bias_study(&truth, (30.0, 550.0), 2.0, 200_000, 8, 71).unwrap();
        assert!(
            study.bias_ppm.abs() < 0.1,
            "noise-free bias = {} ppm",
            study.bias_ppm
        );
        // The MC mean straddles zero within a few standard errors.
        assert!(
            study.mc_mean_ppm.abs() < 4.0 * study.mc_stderr_ppm,
            "MC bias {} ± {}",
            study.mc_mean_ppm,
            study.mc_stderr_ppm
        );
    }

    #[test]
    fn decaying_pickoff_biases_upward() {
        let truth = RateModel::with_pickoff(7.0404, 0.01, 1.0, 100.0);
        let study = thermalization_bias_study(&truth, (30.0, 550.0), 2.0, 200_000, 6, 13).unwrap();
        assert!(study.bias_ppm > 100.0, "bias = {} ppm", study.bias_ppm);
        assert!(study.bias_ppm < 1000.0, "bias = {} ppm", study.bias_ppm);
    }

    #[test]
    fn bias_monotone_in_delta() {
        let mut prev = 0.0;
        for delta in [0.25, 0.5, 1.0, 2.0] {
            let truth = RateModel::with_pickoff(7.0404, 0.01, delta, 100.0);
            let study =
                thermalization_bias_study(&truth, (30.0, 550.0), 2.0, 100_000, 0, 1).unwrap();
            assert!(
                study.bias_ppm > prev,
                "delta {delta}: {} ppm not above {prev}",
                study.bias_ppm
            );
            prev = study.bias_ppm;
        }
    }

    #[test]
    fn detectability_zero_contribution() {
        let d = extra_mode_detectability(0.0, 1_000_000, 7.0404, (0.0, 1420.0), 2.0).unwrap();
        assert_eq!(d.significance_sigma, 0.0);
        assert!(d.rel_stat_err > 0.0);
    }

    #[test]
    fn detectability_scales_with_sqrt_events() {
        let base = extra_mode_detectability(1.9e-3, 1_000_000, 7.0404, (0.0, 1420.0), 2.0).unwrap();
        let quad = extra_mode_detectability(1.9e-3, 4_000_000, 7.0404, (0.0, 1420.0), 2.0).unwrap();
        assert!(
            rel(quad.significance_sigma, 2.0 * base.significance_sigma) < 1e-3,
            "{} vs 2×{}",
            quad.significance_sigma,
            base.significance_sigma
        );
    }

    #[test]
    fn detectability_rejects_out_of_range() {
        assert!(matches!(
            extra_mode_detectability(0.02, 1000, 7.0, (0.0, 100.0), 2.0),
            Err(SpectrumError::InvalidContribution(_))
        ));
    }
}
