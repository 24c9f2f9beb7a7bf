//! Observable decay-rate model and its survival function.

use super::SpectrumError;

pub const NS_PER_US: f64 = 1e3;

/// Time-dependent observable annihilation rate
/// λ_obs(t) = κ(t)·λ_T + λ_pickoff(t), with single-exponential relaxations
/// κ(t) = κ∞ + (κ₀−κ∞)e^{−t/τ_κ} (the contact-density ratio, which may sit
/// on either side of 1) and λ_pickoff(t) = p∞·(1 + δ·e^{−t/τ_th}).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateModel {
    /// vacuum self-annihilation rate λ_T, µs⁻¹
    pub lambda_t: f64,
    /// contact-density ratio at t = 0
    pub kappa0: f64,
    /// contact-density ratio after relaxation
    pub kappa_inf: f64,
    /// contact-density relaxation time, ns
    pub tau_kappa_ns: f64,
    /// asymptotic pickoff rate p∞, µs⁻¹
    pub pickoff_inf: f64,
    /// initial fractional pickoff excess δ
    pub pickoff_delta: f64,
    /// pickoff (thermalization) relaxation time, ns
    pub tau_th_ns: f64,
}

impl RateModel {
    /// Pure exponential decay at a constant rate.
    pub fn constant(lambda_per_us: f64) -> RateModel {
        RateModel {
            lambda_t: lambda_per_us,
            kappa0: 1.0,
            kappa_inf: 1.0,
            tau_kappa_ns: 1.0,
            pickoff_inf: 0.0,
            pickoff_delta: 0.0,
            tau_th_ns: 1.0,
        }
    }

    /// Constant κ ≡ 1 with a relaxing pickoff term.
    pub fn with_pickoff(lambda_per_us: f64, p_inf: f64, delta: f64, tau_th_ns: f64) -> RateModel {
        RateModel {
            pickoff_inf: p_inf,
            pickoff_delta: delta,
            tau_th_ns,
            ..RateModel::constant(lambda_per_us)
        }
    }

    pub fn validate(&self) -> Result<(), SpectrumError> {
        if self.lambda_t.is_nan() || self.lambda_t <= 0.0 {
            return Err(SpectrumError::InvalidModel(format!(
                "lambda_t must be > 0, got {}",
                self.lambda_t
            )));
        }
        if self.kappa0.is_nan()
            || self.kappa_inf.is_nan()
            || self.kappa0 <= 0.0
            || self.kappa_inf <= 0.0
        {
            return Err(SpectrumError::InvalidModel(
                "contact density must stay positive".into(),
            ));
        }
        if self.pickoff_inf < 0.0 || self.pickoff_inf * (1.0 + self.pickoff_delta) < 0.0 {
            return Err(SpectrumError::InvalidModel(
                "pickoff rate must be non-negative".into(),
            ));
        }
        if self.tau_kappa_ns <= 0.0 || self.tau_th_ns <= 0.0 {
            return Err(SpectrumError::InvalidModel(
                "relaxation times must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn kappa(&self, t_ns: f64) -> f64 {
        self.kappa_inf + (self.kappa0 - self.kappa_inf) * (-t_ns / self.tau_kappa_ns).exp()
    }

    pub fn pickoff(&self, t_ns: f64) -> f64 {
        self.pickoff_inf * (1.0 + self.pickoff_delta * (-t_ns / self.tau_th_ns).exp())
    }

    /// λ_obs(t), µs⁻¹.
    pub fn lambda_obs(&self, t_ns: f64) -> f64 {
        self.kappa(t_ns) * self.lambda_t + self.pickoff(t_ns)
    }

    /// Fully relaxed rate κ∞·λ_T + p∞, µs⁻¹.
    pub fn asymptotic_rate(&self) -> f64 {
        self.kappa_inf * self.lambda_t + self.pickoff_inf
    }

    /// ∫₀ᵗ λ_obs(u) du, closed form.
    pub fn cumulative_hazard(&self, t_ns: f64) -> f64 {
        let t = t_ns.max(0.0);
        let mut h = self.asymptotic_rate() * t;
        let dk = self.kappa0 - self.kappa_inf;
        if dk != 0.0 {
            h += dk * self.lambda_t * self.tau_kappa_ns * (-(-t / self.tau_kappa_ns).exp_m1());
        }
        if self.pickoff_inf != 0.0 && self.pickoff_delta != 0.0 {
            h += self.pickoff_inf
                * self.pickoff_delta
                * self.tau_th_ns
                * (-(-t / self.tau_th_ns).exp_m1());
        }
        h / NS_PER_US
    }

    /// Survival probability exp(−∫₀ᵗ λ_obs).
    pub fn survival(&self, t_ns: f64) -> f64 {
        (-self.cumulative_hazard(t_ns)).exp()
    }

    /// Whether the rate carries no time dependence.
    pub fn is_constant(&self) -> bool {
        (self.kappa0 == self.kappa_inf) && (self.pickoff_delta == 0.0 || self.pickoff_inf == 0.0)
    }

    /// Solve survival(t) = s for t, s ∈ (0, 1]. Newton on the monotone
    /// cumulative hazard with a bisection guard.
    pub fn invert_survival(&self, s: f64) -> f64 {
        assert!(s > 0.0 && s <= 1.0, "survival target out of (0,1]");
        let target = -s.ln();
        if target == 0.0 {
            return 0.0;
        }
        if self.is_constant() {
            return target / self.asymptotic_rate() * NS_PER_US;
        }
        // Bracket: the hazard grows at least like the smaller of the initial
        // and asymptotic rates once transients die out.
        let mut hi = target / self.asymptotic_rate() * NS_PER_US;
        let mut lo = 0.0;
        while self.cumulative_hazard(hi) < target {
            lo = hi;
            hi *= 2.0;
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..100 {
            let f = self.cumulative_hazard(t) - target;
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let slope = self.lambda_obs(t) / NS_PER_US;
            let mut next = t - f / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 1e-12 * t.abs().max(1.0) {
                return next;
            }
            t = next;
        }
        t
    }
}
