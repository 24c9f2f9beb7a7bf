//! Vacuum-like-structure chain: fundamental length Δ, cell count N⁽³⁾, the
//! matched quantum number N, structure radius R_µ and time constant τ_µ, the
//! fundamental mass M_µ against the Planck mass, the residual Goldstone mass,
//! nucleus geometry and the Stoney mass.

use std::f64::consts::PI;

use thiserror::Error;

use crate::units::{Constants, Quantity};

#[derive(Debug, Error, PartialEq)]
pub enum VsmError {
    #[error("principal quantum number must be >= 1, got {0}")]
    NonPositiveN(f64),
}

/// The full derived chain, every field a pure function of the constants.
#[derive(Clone, Copy, Debug)]
pub struct VsmParameters {
    /// fundamental length Δ (cm)
    pub delta: Quantity,
    /// cell count N⁽³⁾
    pub n_cells: f64,
    /// principal quantum number N = (N⁽³⁾)^{1/3}, kept continuous
    pub n_quantum: f64,
    /// structure radius R_µ (cm)
    pub r_mu: Quantity,
    /// time constant τ_µ = R_µ/c (s)
    pub tau_mu: Quantity,
    /// fundamental mass M_µ = N⁽³⁾(m_p + m_e) (g)
    pub m_mu: Quantity,
    /// Planck mass √(ħc/G) (g)
    pub m_planck: Quantity,
    /// residual Goldstone mass ħc/(2R_µ) as an energy (erg)
    pub m_goldstone: Quantity,
    /// nucleus cell count n̄ (an input of the model, not derived)
    pub n_bar: f64,
    /// nucleus radius r_n̄ (cm)
    pub r_n_bar: Quantity,
}

/// Default nucleus cell count; stated by the model without derivation.
pub const DEFAULT_N_BAR: f64 = 52_780.0;

impl VsmParameters {
    pub fn derive(c: &Constants) -> VsmParameters {
        Self::derive_with_n_bar(c, DEFAULT_N_BAR)
    }

    pub fn derive_with_n_bar(c: &Constants, n_bar: f64) -> VsmParameters {
        let delta = fundamental_length(c);
        let n_cells = cells_count(c);
        let n_quantum = n_cells.cbrt();
        let (r_mu, tau_mu) = structure_radius(c);
        let (m_mu, m_planck, _) = fundamental_mass(c);
        let (r_n_bar, _) = nucleus_params(c, n_bar);
        VsmParameters {
            delta,
            n_cells,
            n_quantum,
            r_mu,
            tau_mu,
            m_mu,
            m_planck,
            m_goldstone: goldstone_mass(c),
            n_bar,
            r_n_bar,
        }
    }
}

/// Fundamental length Δ = (4/α⁴)·(ħ/m_e c) ≈ 5.5·10⁻² cm.
pub fn fundamental_length(c: &Constants) -> Quantity {
    let compton = c.hbar() / (c.m_e() * c.c());
    compton * (4.0 / c.alpha.powi(4))
}

/// Space-like structure cell count N⁽³⁾ = 2^{9/2}/(3π²α⁹) ≈ 1.302·10¹⁹.
pub fn cells_count(c: &Constants) -> f64 {
    2f64.powf(4.5) / (3.0 * PI * PI * c.alpha.powi(9))
}

/// Binding energy of the N-th positronium state W_N = e⁴m_e/(4ħ²N²).
pub fn binding_energy_n(c: &Constants, n: f64) -> Result<Quantity, VsmError> {
    if n < 1.0 {
        return Err(VsmError::NonPositiveN(n));
    }
    Ok(c.e().powi(4) * c.m_e() / (c.hbar().powi(2) * (4.0 * n * n)))
}

/// Fermi level of the completely degenerate gas at cell spacing Δ:
/// ε_F = (3π²)^{2/3}·ħ²/(2 m_e Δ²), plus the N at which ε_F = W_N.
pub fn fermi_consistency(c: &Constants, delta: Quantity) -> (Quantity, f64) {
    let eps_f =
        c.hbar().powi(2) / (c.m_e() * delta.powi(2)) * ((3.0 * PI * PI).powf(2.0 / 3.0) / 2.0);
    // ε_F = W_N solved for N.
    let w1 = binding_energy_n(c, 1.0).expect("N=1 is valid");
    let n = (w1 / eps_f)
        .as_dimensionless()
        .expect("energy ratio is dimensionless")
        .sqrt();
    (eps_f, n)
}

/// Bohr radius of the N-th state, R_µ = 2ħ²N²/(e² m_e), and τ_µ = R_µ/c.
pub fn structure_radius(c: &Constants) -> (Quantity, Quantity) {
    let n = cells_count(c).cbrt();
    let r = c.hbar().powi(2) * (2.0 * n * n) / (c.e().powi(2) * c.m_e());
    let tau = r / c.c();
    (r, tau)
}

/// Fundamental mass M_µ = N⁽³⁾·(m_p + m_e) with one electron/proton pair per
/// cell, the Planck mass √(ħc/G), and |M_µ/M_Pl − 1|.
pub fn fundamental_mass(c: &Constants) -> (Quantity, Quantity, f64) {
    let m_mu = (c.m_p().add(c.m_e()).expect("masses")) * cells_count(c);
    let m_pl = (c.hbar() * c.c() / c.grav()).sqrt();
    let dev = (m_mu.magnitude() / m_pl.magnitude() - 1.0).abs();
    (m_mu, m_pl, dev)
}

/// Residual mass of the broken zero-mode, m_µc² = ħc/(2R_µ) ≈ 2·10⁻¹⁰ eV.
pub fn goldstone_mass(c: &Constants) -> Quantity {
    let (r_mu, _) = structure_radius(c);
    c.hbar() * c.c() / (r_mu * 2.0)
}

/// Nucleus radius for n̄ cubic cells of side Δ packed into a sphere:
/// r_n̄ = Δ·(3n̄/4π)^{1/3}. Returns (radius, diameter).
pub fn nucleus_params(c: &Constants, n_bar: f64) -> (Quantity, Quantity) {
    let delta = fundamental_length(c);
    let r = delta * (3.0 * n_bar / (4.0 * PI)).cbrt();
    (r, r * 2.0)
}

/// Inverse of the sphere packing: cell count for a given nucleus radius.
pub fn cells_for_radius(r_n_bar: Quantity, delta: Quantity) -> f64 {
    let ratio = (r_n_bar / delta)
        .as_dimensionless()
        .expect("length ratio is dimensionless");
    4.0 * PI / 3.0 * ratio.powi(3)
}

/// Stoney mass m_S = e/√G, from equating the Coulomb and Newton potentials.
pub fn stoney_mass(c: &Constants) -> Quantity {
    c.e() / c.grav().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ps;
    use crate::units::{CM, GRAM, LENGTH, MASS, TIME};

    fn c() -> Constants {
        Constants::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn fundamental_length_value() {
        let d = fundamental_length(&c()).in_unit(&CM).unwrap();
        assert!(rel(d, 5.5e-2) < 0.02, "delta = {d} cm");
        assert!(rel(d, 5.447e-2) < 1e-3);
        assert_eq!(fundamental_length(&c()).dim(), LENGTH);
    }

    #[test]
    fn fundamental_length_alpha_scaling() {
        let base = fundamental_length(&c()).magnitude();
        let mut doubled = c();
        doubled.alpha *= 2.0;
        assert!(rel(fundamental_length(&doubled).magnitude(), base / 16.0) < 1e-12);
    }

    #[test]
    fn fundamental_length_via_superfine_shift() {
        // Alternate route: Δ = c·Δt_v with Δt_v = ħ/(superfine shift).
        let cc = c();
        let dt_v = cc.hbar() / ps::superfine_shift(&cc);
        let alt = cc.c() * dt_v;
        assert_eq!(alt.dim(), LENGTH);
        assert!(rel(alt.magnitude(), fundamental_length(&cc).magnitude()) < 5e-3);
    }

    #[test]
    fn cells_count_value() {
        let n3 = cells_count(&c());
        assert!(rel(n3, 1.302e19) < 0.005, "N3 = {n3}");
        assert!(rel(n3, 1.3023e19) < 1e-3);
    }

    #[test]
    fn cells_count_alpha_scaling() {
        let base = cells_count(&c());
        let mut doubled = c();
        doubled.alpha *= 2.0;
        assert!(rel(cells_count(&doubled), base / 512.0) < 1e-12);
    }

    #[test]
    fn binding_energy_series() {
        let cc = c();
        let w1 = cc.to_ev(binding_energy_n(&cc, 1.0).unwrap()).unwrap();
        assert!(rel(w1, 6.8) < 0.003, "W1 = {w1} eV");
        let w2 = cc.to_ev(binding_energy_n(&cc, 2.0).unwrap()).unwrap();
        assert!(rel(w2, w1 / 4.0) < 1e-14);
        // At the matched N the binding energy has effectively vanished.
        let wn = cc
            .to_ev(binding_energy_n(&cc, cells_count(&cc).cbrt()).unwrap())
            .unwrap();
        assert!(rel(wn, 1.2e-12) < 0.03, "W_N = {wn} eV");
        assert!(binding_energy_n(&cc, 0.5).is_err());
    }

    #[test]
    fn fermi_consistency_closes_the_chain() {
        let cc = c();
        let delta = fundamental_length(&cc);
        let (eps_f, n) = fermi_consistency(&cc, delta);
        assert!(rel(n, 2.352e6) < 0.005, "N = {n}");
        // Two independent derivations of N agree.
        assert!(rel(n, cells_count(&cc).cbrt()) < 0.005);
        // The defining equation holds at the matched N.
        let wn = binding_energy_n(&cc, n).unwrap();
        assert!(rel(eps_f.magnitude(), wn.magnitude()) < 1e-10);
        // 1/Δ² scaling.
        let (eps_2, _) = fermi_consistency(&cc, delta * 2.0);
        assert!(rel(eps_2.magnitude(), eps_f.magnitude() / 4.0) < 1e-12);
    }

    #[test]
    fn structure_radius_and_time() {
        let (r, tau) = structure_radius(&c());
        let r_cm = r.in_unit(&CM).unwrap();
        // Direct evaluation lands at 5.86·10⁴ cm; the printed 5.57·10⁴ is a
        // documented internal gap, so only the band is asserted here.
        assert!(r_cm > 5.5e4 && r_cm < 5.9e4, "R_mu = {r_cm} cm");
        assert!(rel(r_cm, 5.86e4) < 2e-3);
        let tau_s = tau.magnitude();
        assert!(rel(tau_s, 2e-6) < 0.05, "tau = {tau_s} s");
        assert!(rel(tau_s, 1.95e-6) < 3e-3);
        assert_eq!(tau.dim(), TIME);
        assert_eq!((r / c().c()).magnitude(), tau.magnitude());
    }

    #[test]
    fn structure_radius_n_squared_scaling() {
        let cc = c();
        let n = cells_count(&cc).cbrt();
        let r = cc.hbar().powi(2) * (2.0 * n * n) / (cc.e().powi(2) * cc.m_e());
        let r_half =
            cc.hbar().powi(2) * (2.0 * (n / 2.0) * (n / 2.0)) / (cc.e().powi(2) * cc.m_e());
        assert!(rel(r_half.magnitude(), r.magnitude() / 4.0) < 1e-14);
    }

    #[test]
    fn fundamental_mass_vs_planck() {
        let (m_mu, m_pl, dev) = fundamental_mass(&c());
        let m_mu_g = m_mu.in_unit(&GRAM).unwrap();
        let m_pl_g = m_pl.in_unit(&GRAM).unwrap();
        assert!(rel(m_mu_g, 2.179e-5) < 0.003, "M_mu = {m_mu_g} g");
        assert!(rel(m_pl_g, 2.177e-5) < 0.003, "M_Pl = {m_pl_g} g");
        assert!(dev <= 3e-3, "ratio dev = {dev}");
        assert_eq!(m_mu.dim(), MASS);
        assert_eq!(m_pl.dim(), MASS);
    }

    #[test]
    fn mass_ratio_stable_under_me_perturbation() {
        // M_µ/M_Pl shifts only through the m_e share of (m_p + m_e), which is
        // ~5·10⁻⁴ of the perturbation — well under 10⁻² of it.
        let (_, _, dev0) = fundamental_mass(&c());
        for eps in [-0.01, 0.01] {
            let mut p = c();
            p.m_e *= 1.0 + eps;
            let (_, _, dev) = fundamental_mass(&p);
            assert!(
                (dev - dev0).abs() <= 1e-2 * eps.abs(),
                "dev moved {} under eps {eps}",
                dev - dev0
            );
        }
    }

    #[test]
    fn goldstone_mass_value() {
        let cc = c();
        let m = cc.to_ev(goldstone_mass(&cc)).unwrap();
        assert!(m > 1e-10 && m < 3e-10, "m_mu = {m} eV");
        assert!(rel(m, 1.7e-10) < 0.01);
    }

    #[test]
    fn goldstone_mass_inverse_in_radius() {
        let cc = c();
        let m = goldstone_mass(&cc);
        let (r_mu, _) = structure_radius(&cc);
        let half = cc.hbar() * cc.c() / (r_mu * 4.0);
        assert!(rel(half.magnitude(), m.magnitude() / 2.0) < 1e-14);
        // erg→eV conversion path equals direct eV computation.
        let via_erg = m.magnitude() / cc.ev_erg;
        assert_eq!(via_erg, cc.to_ev(m).unwrap());
    }

    #[test]
    fn nucleus_diameter() {
        let (_, d) = nucleus_params(&c(), DEFAULT_N_BAR);
        let d_cm = d.in_unit(&CM).unwrap();
        assert!(rel(d_cm, 2.6) < 0.05, "2r = {d_cm} cm");
        assert!(rel(d_cm, 2.54) < 3e-3);
    }

    #[test]
    fn nucleus_single_cell() {
        let (r, _) = nucleus_params(&c(), 1.0);
        let delta = fundamental_length(&c());
        let ratio = (r / delta).as_dimensionless().unwrap();
        assert!(rel(ratio, (3.0 / (4.0 * PI)).cbrt()) < 1e-14);
        assert!(rel(ratio, 0.62) < 0.01);
    }

    #[test]
    fn nucleus_inversion() {
        // With the quoted Δ = 5.5·10⁻² cm, a 1.3 cm nucleus holds ≈ 5.5·10⁴ cells.
        let n = cells_for_radius(CM.quantity(1.3), CM.quantity(5.5e-2));
        assert!(rel(n, 5.53e4) < 0.01, "n = {n}");
        // Round trip through the forward formula.
        let cc = c();
        let (r, _) = nucleus_params(&cc, DEFAULT_N_BAR);
        let back = cells_for_radius(r, fundamental_length(&cc));
        assert!(rel(back, DEFAULT_N_BAR) < 1e-12);
    }

    #[test]
    fn stoney_mass_value() {
        let m = stoney_mass(&c()).in_unit(&GRAM).unwrap();
        assert!(m > 1e-6 && m < 3e-6, "m_S = {m} g");
        assert!(rel(m, 1.86e-6) < 0.01);
    }

    #[test]
    fn stoney_defining_identity() {
        // e²/r == G·m_S²/r at r = 1 cm.
        let cc = c();
        let r = CM.quantity(1.0);
        let coulomb = cc.e().powi(2) / r;
        let newton = cc.grav() * stoney_mass(&cc).powi(2) / r;
        assert_eq!(coulomb.dim(), newton.dim());
        assert!(rel(coulomb.magnitude(), newton.magnitude()) < 1e-12);
    }

    #[test]
    fn stoney_gravity_scaling() {
        let base = stoney_mass(&c()).magnitude();
        let mut quad = c();
        quad.grav *= 4.0;
        assert!(rel(stoney_mass(&quad).magnitude(), base / 2.0) < 1e-14);
    }

    #[test]
    fn derived_chain_invariants() {
        let p = VsmParameters::derive(&c());
        assert!(rel(p.n_quantum.powi(3), p.n_cells) < 1e-10);
        assert_eq!((p.r_mu / c().c()).magnitude(), p.tau_mu.magnitude());
        assert!(p.delta.magnitude() > 0.0);
        assert!(p.m_goldstone.magnitude() > 0.0);
        assert_eq!(p.n_bar, DEFAULT_N_BAR);
    }
}
