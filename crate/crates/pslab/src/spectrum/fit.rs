//! Binned Poisson maximum-likelihood fitting of exponential mixtures,
//! optionally under Gaussian timing resolution.
//!
//! The objective is the Poisson deviance D = 2Σ[µ − k + k·ln(k/µ)],
//! minimized by Levenberg–Marquardt steps on the Fisher (scoring)
//! curvature with analytic gradients, box bounds, and a Nelder–Mead
//! fallback when damping stalls. Parameter errors come from the inverse
//! curvature at the optimum.

// Index loops keep the matrix algebra readable here.
#![allow(clippy::needless_range_loop)]

use statrs::function::erf::erfc;

use super::model::NS_PER_US;
use super::synth::LifetimeSpectrum;
use super::SpectrumError;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Relative deviance-change threshold for convergence.
const TOL_DEVIANCE: f64 = 1e-9;
/// Scaled-gradient threshold for convergence.
const TOL_GRADIENT: f64 = 1e-6;
const MAX_ITER: usize = 200;

/// One template parameter: pinned, or free within bounds.
#[derive(Clone, Copy, Debug)]
pub enum Param {
    Fixed(f64),
    Free { init: f64, lo: f64, hi: f64 },
}

impl Param {
    pub fn free(init: f64) -> Param {
        Param::Free {
            init,
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }
}

/// Exponential component with an amplitude in counts (over the full time
/// axis) and a rate in µs⁻¹. Intensity fractions are amplitude ratios.
#[derive(Clone, Copy, Debug)]
pub struct FitComponent {
    pub amplitude: Param,
    pub rate_per_us: Param,
}

/// Fit template: components, flat background per bin, fixed resolution.
#[derive(Clone, Debug)]
pub struct FitTemplate {
    pub components: Vec<FitComponent>,
    pub background_per_bin: Param,
    pub resolution_sigma_ns: f64,
}

impl FitTemplate {
    /// Single free exponential, no background.
    pub fn single(amplitude_init: f64, rate_init_per_us: f64) -> FitTemplate {
        FitTemplate {
            components: vec![FitComponent {
                amplitude: Param::free(amplitude_init),
                rate_per_us: Param::Free {
                    init: rate_init_per_us,
                    lo: 1e-4,
                    hi: 1e6,
                },
            }],
            background_per_bin: Param::Fixed(0.0),
            resolution_sigma_ns: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FittedParam {
    pub name: String,
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub params: Vec<FittedParam>,
    pub covariance: Vec<Vec<f64>>,
    pub deviance: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<&FittedParam> {
        self.params.iter().find(|p| p.name == name)
    }

    /// key=value export; floats print in shortest round-trip form, so
    /// dump → parse → dump is bit-exact.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("converged={}\n", self.converged));
        out.push_str(&format!("iterations={}\n", self.iterations));
        out.push_str(&format!("deviance={}\n", self.deviance));
        out.push_str(&format!("n_params={}\n", self.params.len()));
        for (i, p) in self.params.iter().enumerate() {
            out.push_str(&format!("param_{i}_name={}\n", p.name));
            out.push_str(&format!("param_{i}_value={}\n", p.value));
            out.push_str(&format!("param_{i}_error={}\n", p.error));
        }
        for (i, row) in self.covariance.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out.push_str(&format!("cov_{i}_{j}={v}\n"));
            }
        }
        out
    }

    pub fn from_kv(text: &str) -> Result<FitResult, SpectrumError> {
        let mut map = std::collections::BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(SpectrumError::Parse {
                line: i + 1,
                reason: "missing '='".into(),
            })?;
            map.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| {
            map.get(k).cloned().ok_or(SpectrumError::Parse {
                line: 0,
                reason: format!("missing key {k}"),
            })
        };
        let bad = |k: &str, e: String| SpectrumError::Parse {
            line: 0,
            reason: format!("{k}: {e}"),
        };
        let converged = get("converged")?
            .parse()
            .map_err(|e: std::str::ParseBoolError| bad("converged", e.to_string()))?;
        let iterations = get("iterations")?
            .parse()
            .map_err(|e: std::num::ParseIntError| bad("iterations", e.to_string()))?;
        let deviance = get("deviance")?
            .parse()
            .map_err(|e: std::num::ParseFloatError| bad("deviance", e.to_string()))?;
        let n: usize = get("n_params")?
            .parse()
            .map_err(|e: std::num::ParseIntError| bad("n_params", e.to_string()))?;
        let mut params = Vec::with_capacity(n);
        for i in 0..n {
            params.push(FittedParam {
                name: get(&format!("param_{i}_name"))?,
                value: get(&format!("param_{i}_value"))?
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| bad("value", e.to_string()))?,
                error: get(&format!("param_{i}_error"))?
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| bad("error", e.to_string()))?,
            });
        }
        let mut covariance = vec![vec![0.0; n]; n];
        for (i, row) in covariance.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = get(&format!("cov_{i}_{j}"))?
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| bad("cov", e.to_string()))?;
            }
        }
        Ok(FitResult {
            params,
            covariance,
            deviance,
            converged,
            iterations,
        })
    }
}

/// Scaled complementary error function e^{x²}·erfc(x) for x ≥ 0.
fn erfcx(x: f64) -> f64 {
    if x < 25.0 {
        (x * x).exp() * erfc(x)
    } else {
        // Asymptotic series; erfc underflows past here.
        let x2 = x * x;
        (1.0 - 0.5 / x2 + 0.75 / (x2 * x2)) / (x * std::f64::consts::PI.sqrt())
    }
}

/// E(t) = e^{σ²λ²/2 − λt}·Φ(t/σ − σλ), the exponential-bleed term of the
/// Gaussian-smeared decay CDF, evaluated without overflow.
fn emg_tail(t: f64, lambda: f64, sigma: f64) -> f64 {
    let a = t / sigma;
    let w = sigma * lambda - a;
    // h == (w² − a²)/2 algebraically, but that form cancels catastrophically
    // for t ≫ σ; this one stays accurate to the ulp.
    let h = 0.5 * (sigma * lambda) * (sigma * lambda) - lambda * t;
    let z = w / SQRT_2;
    if z >= 25.0 {
        (-0.5 * a * a).exp() * 0.5 * erfcx(z)
    } else if h < -700.0 {
        0.0
    } else {
        h.exp() * 0.5 * erfc(z)
    }
}

/// Probability that a smeared exponential event lands in [lo, hi] (µs).
pub(crate) fn bin_prob(lo: f64, hi: f64, lambda: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        let s = |t: f64| (-lambda * t.max(0.0)).exp();
        return s(lo) - s(hi);
    }
    let phi_part = 0.5 * (erfc(lo / (sigma * SQRT_2)) - erfc(hi / (sigma * SQRT_2)));
    let tail_part = emg_tail(lo, lambda, sigma) - emg_tail(hi, lambda, sigma);
    (phi_part + tail_part).max(0.0)
}

/// ∂/∂λ of the smeared CDF at t.
fn dcdf_dlambda(t: f64, lambda: f64, sigma: f64) -> f64 {
    if sigma == 0.0 {
        let tc = t.max(0.0);
        return tc * (-lambda * tc).exp();
    }
    let a = t / sigma;
    let gauss = (-0.5 * a * a).exp() * INV_SQRT_2PI;
    -((sigma * sigma * lambda - t) * emg_tail(t, lambda, sigma) - sigma * gauss)
}

fn dbin_prob_dlambda(lo: f64, hi: f64, lambda: f64, sigma: f64) -> f64 {
    dcdf_dlambda(hi, lambda, sigma) - dcdf_dlambda(lo, lambda, sigma)
}

/// Which model slot a free parameter drives.
#[derive(Clone, Copy, Debug)]
enum Slot {
    Amplitude(usize),
    Rate(usize),
    Background,
}

struct Problem {
    lo_us: Vec<f64>,
    hi_us: Vec<f64>,
    counts: Vec<f64>,
    sigma_us: f64,
    n_components: usize,
    // resolved per-slot: either a fixed value or an index into θ
    amp: Vec<Result<usize, f64>>,
    rate: Vec<Result<usize, f64>>,
    bg: Result<usize, f64>,
    free_slots: Vec<Slot>,
    names: Vec<String>,
    lo_bound: Vec<f64>,
    hi_bound: Vec<f64>,
    theta0: Vec<f64>,
}

impl Problem {
    fn build(
        counts: &[f64],
        t0_ns: f64,
        bin_width_ns: f64,
        template: &FitTemplate,
    ) -> Result<Problem, SpectrumError> {
        if template.components.is_empty() {
            return Err(SpectrumError::InvalidModel("no components".into()));
        }
        let n_bins = counts.len();
        let mut lo_us = Vec::with_capacity(n_bins);
        let mut hi_us = Vec::with_capacity(n_bins);
        for i in 0..n_bins {
            lo_us.push((t0_ns + i as f64 * bin_width_ns) / NS_PER_US);
            hi_us.push((t0_ns + (i + 1) as f64 * bin_width_ns) / NS_PER_US);
        }
        let mut free_slots = Vec::new();
        let mut names = Vec::new();
        let mut lo_bound = Vec::new();
        let mut hi_bound = Vec::new();
        let mut theta0 = Vec::new();
        let mut amp = Vec::new();
        let mut rate = Vec::new();
        let mut register = |p: &Param, slot: Slot, name: String| match *p {
            Param::Fixed(v) => Err(v),
            Param::Free { init, lo, hi } => {
                free_slots.push(slot);
                names.push(name);
                lo_bound.push(lo);
                hi_bound.push(hi);
                theta0.push(init.clamp(lo, hi));
                Ok(free_slots.len() - 1)
            }
        };
        for (i, comp) in template.components.iter().enumerate() {
            amp.push(register(
                &comp.amplitude,
                Slot::Amplitude(i),
                format!("amplitude_{i}"),
            ));
            rate.push(register(
                &comp.rate_per_us,
                Slot::Rate(i),
                format!("rate_{i}"),
            ));
        }
        let bg = register(
            &template.background_per_bin,
            Slot::Background,
            "background".to_string(),
        );
        if free_slots.is_empty() {
            return Err(SpectrumError::NoFreeParameters);
        }
        Ok(Problem {
            lo_us,
            hi_us,
            counts: counts.to_vec(),
            sigma_us: template.resolution_sigma_ns / NS_PER_US,
            n_components: template.components.len(),
            amp,
            rate,
            bg,
            free_slots,
            names,
            lo_bound,
            hi_bound,
            theta0,
        })
    }

    fn value_of(&self, slot: Result<usize, f64>, theta: &[f64]) -> f64 {
        match slot {
            Ok(idx) => theta[idx],
            Err(v) => v,
        }
    }

    /// Deviance, gradient and Fisher curvature in one pass.
    fn eval(&self, theta: &[f64]) -> (f64, Vec<f64>, Vec<Vec<f64>>) {
        let np = theta.len();
        let nb = self.lo_us.len();
        // Per-component bin probabilities and their rate derivatives.
        let mut probs = vec![vec![0.0; nb]; self.n_components];
        let mut dprobs = vec![vec![0.0; nb]; self.n_components];
        for ci in 0..self.n_components {
            let lambda = self.value_of(self.rate[ci], theta);
            for b in 0..nb {
                probs[ci][b] = bin_prob(self.lo_us[b], self.hi_us[b], lambda, self.sigma_us);
                dprobs[ci][b] =
                    dbin_prob_dlambda(self.lo_us[b], self.hi_us[b], lambda, self.sigma_us);
            }
        }
        let bg = self.value_of(self.bg, theta);
        let mut deviance = 0.0;
        let mut grad = vec![0.0; np];
        let mut hess = vec![vec![0.0; np]; np];
        let mut dmu = vec![0.0; np];
        for b in 0..nb {
            let mut mu = bg;
            for ci in 0..self.n_components {
                mu += self.value_of(self.amp[ci], theta) * probs[ci][b];
            }
            let mu_safe = mu.max(1e-300);
            let k = self.counts[b];
            deviance += 2.0 * (mu - k + if k > 0.0 { k * (k / mu_safe).ln() } else { 0.0 });
            for (j, slot) in self.free_slots.iter().enumerate() {
                dmu[j] = match *slot {
                    Slot::Amplitude(ci) => probs[ci][b],
                    Slot::Rate(ci) => self.value_of(self.amp[ci], theta) * dprobs[ci][b],
                    Slot::Background => 1.0,
                };
            }
            let mu_curv = mu.max(1e-12);
            let resid = 1.0 - k / mu_safe;
            for j in 0..np {
                grad[j] += 2.0 * resid * dmu[j];
                for l in j..np {
                    hess[j][l] += 2.0 * dmu[j] * dmu[l] / mu_curv;
                }
            }
        }
        for j in 0..np {
            for l in 0..j {
                hess[j][l] = hess[l][j];
            }
        }
        (deviance, grad, hess)
    }

    fn deviance_only(&self, theta: &[f64]) -> f64 {
        self.eval(theta).0
    }
}

/// Solve A·x = b by Gaussian elimination with partial pivoting.
fn solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut s = rhs[row];
        for k in (row + 1)..n {
            s -= m[row][k] * x[k];
        }
        x[row] = s / m[row][row];
        if !x[row].is_finite() {
            return None;
        }
    }
    Some(x)
}

/// Invert a symmetric matrix by solving against unit vectors.
fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let col = solve(a, &e)?;
        for i in 0..n {
            out[i][j] = col[i];
        }
    }
    Some(out)
}

fn clamp_vec(theta: &mut [f64], lo: &[f64], hi: &[f64]) {
    for i in 0..theta.len() {
        theta[i] = theta[i].clamp(lo[i], hi[i]);
    }
}

/// Nelder–Mead on the (bound-clamped) deviance; returns the best vertex.
fn nelder_mead(problem: &Problem, start: &[f64], max_eval: usize) -> (Vec<f64>, f64) {
    let n = start.len();
    let f = |theta: &[f64]| {
        let mut t = theta.to_vec();
        clamp_vec(&mut t, &problem.lo_bound, &problem.hi_bound);
        problem.deviance_only(&t)
    };
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..n {
        let mut v = start.to_vec();
        let step = if v[i].abs() > 1e-8 {
            0.05 * v[i].abs()
        } else {
            0.1
        };
        v[i] += step;
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    let mut evals = values.len();
    while evals < max_eval {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        if (values[worst] - values[best]).abs() <= 1e-12 * (1.0 + values[best].abs()) {
            break;
        }
        let mut centroid = vec![0.0; n];
        for &i in order.iter().take(n) {
            for k in 0..n {
                centroid[k] += simplex[i][k] / n as f64;
            }
        }
        let mix = |a: f64| -> Vec<f64> {
            (0..n)
                .map(|k| centroid[k] + a * (simplex[worst][k] - centroid[k]))
                .collect()
        };
        let reflected = mix(-1.0);
        let fr = f(&reflected);
        evals += 1;
        if fr < values[best] {
            let expanded = mix(-2.0);
            let fe = f(&expanded);
            evals += 1;
            if fe < fr {
                simplex[worst] = expanded;
                values[worst] = fe;
            } else {
                simplex[worst] = reflected;
                values[worst] = fr;
            }
        } else if fr < values[second_worst] {
            simplex[worst] = reflected;
            values[worst] = fr;
        } else {
            let contracted = mix(0.5);
            let fc = f(&contracted);
            evals += 1;
            if fc < values[worst] {
                simplex[worst] = contracted;
                values[worst] = fc;
            } else {
                for &i in order.iter().skip(1) {
                    for k in 0..n {
                        simplex[i][k] = simplex[best][k] + 0.5 * (simplex[i][k] - simplex[best][k]);
                    }
                    values[i] = f(&simplex[i]);
                    evals += 1;
                }
            }
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap())
        .unwrap();
    let mut t = simplex[best].clone();
    clamp_vec(&mut t, &problem.lo_bound, &problem.hi_bound);
    (t, values[best])
}

fn scaled_gradient_norm(grad: &[f64], theta: &[f64], deviance: f64) -> f64 {
    grad.iter()
        .zip(theta)
        .map(|(g, t)| (g * t.abs().max(1.0) / deviance.abs().max(1.0)).abs())
        .fold(0.0, f64::max)
}

/// Fit a template to float-valued binned counts (noise-free expected counts
/// are legal data, which is what the bias study feeds in).
pub fn fit_binned(
    counts: &[f64],
    t0_ns: f64,
    bin_width_ns: f64,
    template: &FitTemplate,
) -> Result<FitResult, SpectrumError> {
    let problem = Problem::build(counts, t0_ns, bin_width_ns, template)?;
    let mut theta = problem.theta0.clone();
    clamp_vec(&mut theta, &problem.lo_bound, &problem.hi_bound);
    let np = theta.len();

    let (mut deviance, mut grad, mut hess) = problem.eval(&theta);
    let mut damping = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut fell_back = false;

    while iterations < MAX_ITER {
        iterations += 1;
        if scaled_gradient_norm(&grad, &theta, deviance) < TOL_GRADIENT {
            converged = true;
            break;
        }
        let mut stepped = false;
        while damping < 1e13 {
            let mut damped = hess.clone();
            for j in 0..np {
                damped[j][j] += damping * hess[j][j].max(1e-12);
            }
            let rhs: Vec<f64> = grad.iter().map(|g| -g).collect();
            if let Some(delta) = solve(&damped, &rhs) {
                let predicted = -0.5 * grad.iter().zip(&delta).map(|(g, d)| g * d).sum::<f64>();
                let mut candidate: Vec<f64> =
                    theta.iter().zip(&delta).map(|(t, d)| t + d).collect();
                clamp_vec(&mut candidate, &problem.lo_bound, &problem.hi_bound);
                let (d_new, g_new, h_new) = problem.eval(&candidate);
                // Once the predicted gain drops under the deviance's own
                // floating-point resolution, D comparisons are pure noise;
                // trust the scoring step so the gradient can keep shrinking.
                let below_noise = predicted.abs() <= 1e-9 * deviance.abs().max(1.0);
                if d_new <= deviance || below_noise {
                    let rel_change = (deviance - d_new).abs() / deviance.abs().max(1.0);
                    theta = candidate;
                    grad = g_new;
                    hess = h_new;
                    damping = (damping / 3.0).max(1e-12);
                    stepped = true;
                    let small_grad = scaled_gradient_norm(&grad, &theta, d_new) < TOL_GRADIENT;
                    let small_change = rel_change < TOL_DEVIANCE;
                    deviance = d_new;
                    if small_change && small_grad {
                        converged = true;
                    }
                    break;
                }
            }
            damping *= 5.0;
        }
        if converged {
            break;
        }
        if !stepped {
            if fell_back {
                converged = scaled_gradient_norm(&grad, &theta, deviance) < TOL_GRADIENT;
                break;
            }
            fell_back = true;
            let (t_nm, d_nm) = nelder_mead(&problem, &theta, 400 * np.max(2));
            if d_nm < deviance {
                theta = t_nm;
                let e = problem.eval(&theta);
                deviance = e.0;
                grad = e.1;
                hess = e.2;
                damping = 1e-3;
            } else {
                converged = scaled_gradient_norm(&grad, &theta, deviance) < TOL_GRADIENT;
                break;
            }
        }
    }

    let (_, _, hess_final) = problem.eval(&theta);
    // cov = (∇²D/2)⁻¹; the scoring Hessian already carries the factor 2.
    let half: Vec<Vec<f64>> = hess_final
        .iter()
        .map(|row| row.iter().map(|v| v / 2.0).collect())
        .collect();
    let covariance = invert(&half).ok_or(SpectrumError::SingularCurvature)?;
    let params = (0..np)
        .map(|j| FittedParam {
            name: problem.names[j].clone(),
            value: theta[j],
            error: covariance[j][j].max(0.0).sqrt(),
        })
        .collect();
    Ok(FitResult {
        params,
        covariance,
        deviance,
        converged,
        iterations,
    })
}

/// Fit a synthesized spectrum.
pub fn fit_spectrum(
    spectrum: &LifetimeSpectrum,
    template: &FitTemplate,
) -> Result<FitResult, SpectrumError> {
    let counts: Vec<f64> = spectrum.counts.iter().map(|&c| c as f64).collect();
    fit_binned(&counts, spectrum.t0_ns, spectrum.bin_width_ns, template)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::model::RateModel;
    use crate::spectrum::synth::{synthesize, SpectrumModel};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn expected_single(lambda: f64, n: f64, t0: f64, t1: f64, w: f64) -> Vec<f64> {
        let bins = ((t1 - t0) / w).round() as usize;
        (0..bins)
            .map(|i| {
                let lo = (t0 + i as f64 * w) / 1e3;
                let hi = (t0 + (i + 1) as f64 * w) / 1e3;
                n * ((-lambda * lo).exp() - (-lambda * hi).exp())
            })
            .collect()
    }

    #[test]
    fn bin_prob_reduces_to_exponential() {
        let p0 = bin_prob(0.1, 0.102, 7.0404, 0.0);
        let exact = (-7.0404f64 * 0.1).exp() - (-7.0404f64 * 0.102).exp();
        assert!(rel(p0, exact) < 1e-14);
    }

    #[test]
    fn smeared_probs_integrate_to_one() {
        for (lambda, sigma) in [(7.0404, 0.0015), (7990.9, 0.0015), (0.5, 0.01)] {
            let mut total = bin_prob(-0.5, 0.0, lambda, sigma);
            let w = 1e-3;
            let top = (40.0 / lambda).max(12.0 * sigma);
            let mut t = 0.0;
            while t < top {
                total += bin_prob(t, t + w, lambda, sigma);
                t += w;
            }
            assert!(rel(total, 1.0) < 1e-6, "lambda {lambda}: total {total}");
        }
    }

    #[test]
    fn smeared_prob_matches_quadrature() {
        // Convolution oracle: integrate λe^{−λu}·N(t−u; σ) over the bin.
        let lambda = 7.0404;
        let sigma = 0.0015;
        for (lo, hi) in [(0.0, 0.002), (0.001, 0.003), (0.1, 0.102), (0.4, 0.402)] {
            let mut quad = 0.0;
            let nu = 40_000;
            let du = (hi - lo + 16.0 * sigma) / nu as f64;
            for i in 0..nu {
                let u = 0.0f64.max(lo - 8.0 * sigma) + (i as f64 + 0.5) * du;
                if u < 0.0 {
                    continue;
                }
                let dens = lambda * (-lambda * u).exp();
                let z_hi = (hi - u) / sigma;
                let z_lo = (lo - u) / sigma;
                let gauss_mass = 0.5 * (erfc(-z_hi / SQRT_2) - erfc(-z_lo / SQRT_2));
                quad += dens * gauss_mass * du;
            }
            let p = bin_prob(lo, hi, lambda, sigma);
            assert!(rel(p, quad) < 1e-4, "bin ({lo},{hi}): {p} vs {quad}");
        }
    }

    #[test]
    fn rate_derivative_matches_finite_difference() {
        let sigma = 0.0015;
        for lambda in [0.5, 7.0404, 200.0] {
            for (lo, hi) in [(0.0, 0.002), (0.05, 0.052), (0.3, 0.302)] {
                let d_analytic = dbin_prob_dlambda(lo, hi, lambda, sigma);
                let h = lambda * 1e-6;
                let d_numeric = (bin_prob(lo, hi, lambda + h, sigma)
                    - bin_prob(lo, hi, lambda - h, sigma))
                    / (2.0 * h);
                if d_numeric.abs() > 1e-300 {
                    assert!(
                        rel(d_analytic, d_numeric) < 1e-4,
                        "lambda {lambda} bin ({lo},{hi}): {d_analytic} vs {d_numeric}"
                    );
                }
            }
        }
    }

    #[test]
    fn deviance_gradient_matches_finite_difference() {
        let counts = expected_single(7.0404, 1e5, 0.0, 1420.0, 2.0);
        let template = FitTemplate {
            components: vec![FitComponent {
                amplitude: Param::free(9.0e4),
                rate_per_us: Param::Free {
                    init: 6.5,
                    lo: 0.1,
                    hi: 100.0,
                },
            }],
            background_per_bin: Param::Free {
                init: 0.5,
                lo: 0.0,
                hi: 1e6,
            },
            resolution_sigma_ns: 1.5,
        };
        let problem = Problem::build(&counts, 0.0, 2.0, &template).unwrap();
        for theta in [
            vec![9.0e4, 6.5, 0.5],
            vec![1.2e5, 7.0404, 0.0],
            vec![5.0e4, 3.3, 2.7],
            vec![1.0e6, 11.0, 0.9],
        ] {
            let (_, grad, _) = problem.eval(&theta);
            for j in 0..theta.len() {
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                let h = theta[j].abs().max(1e-3) * 1e-6;
                tp[j] += h;
                tm[j] -= h;
                let fd = (problem.deviance_only(&tp) - problem.deviance_only(&tm)) / (2.0 * h);
                assert!(
                    rel(grad[j], fd) < 1e-4,
                    "theta {theta:?} param {j}: analytic {} vs fd {fd}",
                    grad[j]
                );
            }
        }
    }

    #[test]
    fn noiseless_self_fit_recovers_rate() {
        let lambda = 7.0404;
        let counts = expected_single(lambda, 1e6, 0.0, 1420.0, 2.0);
        let template = FitTemplate::single(8e5, 8.0);
        let fit = fit_binned(&counts, 0.0, 2.0, &template).unwrap();
        assert!(fit.converged, "iterations {}", fit.iterations);
        let rate = fit.get("rate_0").unwrap();
        assert!(rel(rate.value, lambda) < 1e-6, "rate = {}", rate.value);
        let amp = fit.get("amplitude_0").unwrap();
        assert!(rel(amp.value, 1e6) < 1e-6);
        assert!(fit.deviance < 1e-8);
    }

    #[test]
    fn statistical_fit_within_errors() {
        let lambda = 7.0404;
        let model = SpectrumModel::single(RateModel::constant(lambda), 0.0, 1420.0, 2.0);
        let spec = synthesize(&model, 1_000_000, 4242).unwrap();
        let template = FitTemplate::single(spec.total_counts() as f64, 7.5);
        let fit = fit_spectrum(&spec, &template).unwrap();
        assert!(fit.converged);
        let rate = fit.get("rate_0").unwrap();
        assert!(rate.error > 0.0);
        assert!(
            (rate.value - lambda).abs() < 3.0 * rate.error,
            "rate {} ± {} vs {lambda}",
            rate.value,
            rate.error
        );
        // Error scale is the textbook λ/√n up to window truncation.
        assert!(
            rel(rate.error, lambda / 1e3) < 0.2,
            "error = {}",
            rate.error
        );
    }

    #[test]
    fn two_component_fit_recovers_both_rates() {
        let l_slow = 7.04;
        let l_fast = 7990.9;
        let model = SpectrumModel {
            components: vec![
                (0.75, RateModel::constant(l_slow)),
                (0.25, RateModel::constant(l_fast)),
            ],
            resolution_sigma_ns: 1.5,
            background_per_bin: 0.0,
            t0_ns: 0.0,
            t1_ns: 1420.0,
            bin_width_ns: 1.0,
        };
        let spec = synthesize(&model, 1_000_000, 99).unwrap();
        let template = FitTemplate {
            components: vec![
                FitComponent {
                    amplitude: Param::free(7e5),
                    rate_per_us: Param::Free {
                        init: 6.0,
                        lo: 0.5,
                        hi: 100.0,
                    },
                },
                FitComponent {
                    amplitude: Param::free(2e5),
                    rate_per_us: Param::Free {
                        init: 6000.0,
                        lo: 500.0,
                        hi: 5e4,
                    },
                },
            ],
            background_per_bin: Param::Fixed(0.0),
            resolution_sigma_ns: 1.5,
        };
        let fit = fit_spectrum(&spec, &template).unwrap();
        assert!(fit.converged);
        let slow = fit.get("rate_0").unwrap();
        let fast = fit.get("rate_1").unwrap();
        assert!(
            (slow.value - l_slow).abs() < 3.0 * slow.error,
            "slow {} ± {}",
            slow.value,
            slow.error
        );
        assert!(
            (fast.value - l_fast).abs() < 3.0 * fast.error,
            "fast {} ± {}",
            fast.value,
            fast.error
        );
        // Recovered intensity split.
        let a0 = fit.get("amplitude_0").unwrap().value;
        let a1 = fit.get("amplitude_1").unwrap().value;
        let frac = a0 / (a0 + a1);
        assert!((frac - 0.75).abs() < 0.01, "fraction = {frac}");
    }

    #[test]
    fn free_background_recovered() {
        let lambda = 7.0404;
        let bg = 12.0;
        let model = SpectrumModel {
            background_per_bin: bg,
            ..SpectrumModel::single(RateModel::constant(lambda), 0.0, 1420.0, 2.0)
        };
        let spec = synthesize(&model, 500_000, 314).unwrap();
        let template = FitTemplate {
            components: vec![FitComponent {
                amplitude: Param::free(5e5),
                rate_per_us: Param::Free { init: 7.5, lo: 0.1, hi: 100.0 },
            }],
            background_per_bin: Param::Free { init: 1.0, lo: 0.0, hi: 1e6 },
            resolution_sigma_ns: 0.0,
        };
        let fit = fit_spectrum(&spec, &template).unwrap();
        assert!(fit.converged);
        let rate = fit.get("rate_0").unwrap();
        let fitted_bg = fit.get("background").unwrap();
        assert!(
            (rate.value - lambda).abs() < 3.0 * rate.error,
            "rate {} ± {}",
            rate.value,
            rate.error
        );
        assert!(
            (fitted_bg.value - bg).abs() < 3.0 * fitted_bg.error,
            "background {} ± {}",
            fitted_bg.value,
            fitted_bg.error
        );
    }

    #[test]
    fn no_free_parameters_rejected() {
        let template = FitTemplate {
            components: vec![FitComponent {
                amplitude: Param::Fixed(1.0),
                rate_per_us: Param::Fixed(7.0),
            }],
            background_per_bin: Param::Fixed(0.0),
            resolution_sigma_ns: 0.0,
        };
        let counts = vec![1.0; 10];
        assert!(matches!(
            fit_binned(&counts, 0.0, 2.0, &template),
            Err(SpectrumError::NoFreeParameters)
        ));
    }

    #[test]
    fn nelder_mead_descends() {
        let counts = expected_single(7.0404, 1e5, 0.0, 1420.0, 2.0);
        let template = FitTemplate::single(1e5, 7.0404);
        let problem = Problem::build(&counts, 0.0, 2.0, &template).unwrap();
        let start = vec![5e4, 3.0];
        let d0 = problem.deviance_only(&start);
        let (best, d_best) = nelder_mead(&problem, &start, 2000);
        assert!(d_best < d0 * 0.01, "NM stalled: {d_best} vs {d0}");
        assert!(rel(best[1], 7.0404) < 0.05);
    }

    #[test]
    fn kv_round_trip_bit_exact() {
        let counts = expected_single(7.0404, 1e5, 0.0, 1420.0, 2.0);
        let template = FitTemplate::single(9e4, 7.5);
        let fit = fit_binned(&counts, 0.0, 2.0, &template).unwrap();
        let text = fit.to_kv();
        let back = FitResult::from_kv(&text).unwrap();
        assert_eq!(back.to_kv(), text);
        assert_eq!(back.converged, fit.converged);
        assert_eq!(back.params, fit.params);
    }

    #[test]
    fn solver_handles_known_system() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[1.0, 2.0]).unwrap();
        assert!(rel(x[0], 1.0 / 11.0) < 1e-12);
        assert!(rel(x[1], 7.0 / 11.0) < 1e-12);
        let singular = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(solve(&singular, &[1.0, 1.0]).is_none());
        let inv = invert(&a).unwrap();
        assert!(rel(inv[0][0], 3.0 / 11.0) < 1e-12);
        assert!(rel(inv[1][1], 4.0 / 11.0) < 1e-12);
    }
}
