//! Positronium ground-state energetics and magnetic (Zeeman) mixing of the
//! m=0 ortho sub-state with the singlet.

use thiserror::Error;

use crate::units::{Constants, Quantity, KILOGAUSS, PER_MICROSECOND};
use crate::vsm;

/// Standard p-Ps self-annihilation rate, µs⁻¹. Used but never printed by the
/// anomaly literature; kept as an overridable external default.
pub const DEFAULT_LAMBDA_S_PER_US: f64 = 7990.9;

#[derive(Debug, Error, PartialEq)]
pub enum PsError {
    #[error("magnetic field must be non-negative, got {0} kG")]
    NegativeField(f64),
    #[error("decay rates must be positive")]
    NonPositiveRate,
}

/// Ground-state level quantities: binding energy W, hyperfine splitting ΔW
/// and the virtual single-photon (superfine) shift of the triplet.
#[derive(Clone, Copy, Debug)]
pub struct PsLevels {
    pub binding: Quantity,
    pub hyperfine: Quantity,
    pub superfine: Quantity,
}

impl PsLevels {
    pub fn from_constants(c: &Constants) -> PsLevels {
        PsLevels {
            binding: binding_energy(c),
            hyperfine: hyperfine_splitting(c),
            superfine: superfine_shift(c),
        }
    }
}

/// Ps ground-state binding energy W = e⁴m_e/(4ħ²) ≈ 6.8 eV.
///
/// The reduced mass m_e/2 is folded into the factor 4.
pub fn binding_energy(c: &Constants) -> Quantity {
    vsm::binding_energy_n(c, 1.0).expect("N=1 is valid")
}

/// Hyperfine splitting ΔW = W·α²·(4/3 + 1) ≈ 8.4·10⁻⁴ eV:
/// spin-spin (4/3) plus virtual one-photon annihilation (1).
pub fn hyperfine_splitting(c: &Constants) -> Quantity {
    binding_energy(c) * (c.alpha * c.alpha) * (4.0 / 3.0 + 1.0)
}

/// Superfine level shift of the triplet: the virtual single-photon
/// annihilation share (3/7)·ΔW = W·α² ≈ 3.6·10⁻⁴ eV.
pub fn superfine_shift(c: &Constants) -> Quantity {
    hyperfine_splitting(c) * (3.0 / 7.0)
}

/// Zeeman mixing parameter x = 2eħB/(m_e c ΔW); reproduces the closed
/// coefficient 2.75·10⁻² per kG.
pub fn zeeman_x(c: &Constants, b_kg: f64) -> Result<f64, PsError> {
    if b_kg < 0.0 {
        return Err(PsError::NegativeField(b_kg));
    }
    let b = KILOGAUSS.quantity(b_kg);
    let x = 2.0 * c.e() * c.hbar() * b / (c.m_e() * c.c() * hyperfine_splitting(c));
    Ok(x.as_dimensionless()
        .expect("x is dimensionless by construction"))
}

/// Mixing amplitude y = x/(1 + √(1+x²)) ∈ [0, 1).
pub fn mixing_amplitude(x: f64) -> f64 {
    x / (1.0 + (1.0 + x * x).sqrt())
}

/// Sub-level shift ³E(m=0) − ³E(m=±1) = (ΔW/2)·(√(1+x²) − 1).
pub fn sublevel_shift(c: &Constants, b_kg: f64) -> Result<Quantity, PsError> {
    let x = zeeman_x(c, b_kg)?;
    Ok(hyperfine_splitting(c) * 0.5 * ((1.0 + x * x).sqrt() - 1.0))
}

/// Field mixing state at field B.
#[derive(Clone, Copy, Debug)]
pub struct FieldMixing {
    pub b_kg: f64,
    pub x: f64,
    pub y: f64,
    pub shift: Quantity,
}

impl FieldMixing {
    pub fn at_field(c: &Constants, b_kg: f64) -> Result<FieldMixing, PsError> {
        let x = zeeman_x(c, b_kg)?;
        Ok(FieldMixing {
            b_kg,
            x,
            y: mixing_amplitude(x),
            shift: sublevel_shift(c, b_kg)?,
        })
    }
}

/// Fraction of the perturbed m=0 triplet decaying via the opened 2γ channel:
/// f₂γ = y²λ_S / (λ_T + y²λ_S). The complement is the surviving 3γ share.
pub fn two_gamma_fraction_m0(
    c: &Constants,
    b_kg: f64,
    lambda_t: Quantity,
    lambda_s: Quantity,
) -> Result<f64, PsError> {
    let lt = lambda_t
        .in_unit(&PER_MICROSECOND)
        .map_err(|_| PsError::NonPositiveRate)?;
    let ls = lambda_s
        .in_unit(&PER_MICROSECOND)
        .map_err(|_| PsError::NonPositiveRate)?;
    if lt <= 0.0 || ls <= 0.0 {
        return Err(PsError::NonPositiveRate);
    }
    let y = mixing_amplitude(zeeman_x(c, b_kg)?);
    let quench = y * y * ls;
    Ok(quench / (lt + quench))
}
