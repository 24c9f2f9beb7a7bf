//! Dimension-checked quantities in Gaussian CGS.
//!
//! Everything downstream computes in (cm, g, s); eV, kG, V/cm and µs⁻¹ are
//! conversions at the boundary. Dimension exponents are exact rationals so
//! that half-integer charge dimensions (esu = cm^{3/2} g^{1/2} s⁻¹) never
//! accumulate floating drift.

use thiserror::Error;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const SQRT_3: f64 = 1.732_050_807_568_877_3;

#[derive(Debug, Error, PartialEq)]
pub enum UnitsError {
    #[error("dimension mismatch: {left} vs {right} in {context}")]
    DimensionMismatch {
        left: Dimension,
        right: Dimension,
        context: &'static str,
    },
}

const fn const_gcd(mut a: i32, mut b: i32) -> i32 {
    if a < 0 {
        a = -a;
    }
    if b < 0 {
        b = -b;
    }
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    if a == 0 {
        1
    } else {
        a
    }
}

/// Exact rational exponent, always kept reduced with a positive denominator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Rat {
    num: i32,
    den: i32,
}

impl Rat {
    pub const ZERO: Rat = Rat { num: 0, den: 1 };
    pub const ONE: Rat = Rat { num: 1, den: 1 };

    pub const fn new(num: i32, den: i32) -> Rat {
        assert!(den != 0, "rational exponent with zero denominator");
        let sign = if den < 0 { -1 } else { 1 };
        let g = const_gcd(num, den);
        Rat {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub const fn int(n: i32) -> Rat {
        Rat { num: n, den: 1 }
    }

    pub fn scale(self, k: i32) -> Rat {
        Rat::new(self.num * k, self.den)
    }

    /// Exact division of the exponent, used for roots.
    pub fn div_int(self, k: i32) -> Rat {
        Rat::new(self.num, self.den * k)
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::ops::Add for Rat {
    type Output = Rat;
    fn add(self, other: Rat) -> Rat {
        Rat::new(
            self.num * other.den + other.num * self.den,
            self.den * other.den,
        )
    }
}

impl std::ops::Sub for Rat {
    type Output = Rat;
    fn sub(self, other: Rat) -> Rat {
        Rat::new(
            self.num * other.den - other.num * self.den,
            self.den * other.den,
        )
    }
}

impl std::ops::Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat {
            num: -self.num,
            den: self.den,
        }
    }
}

impl std::fmt::Display for Rat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// Dimension as exact rational exponents over the CGS base (cm, g, s).
///
/// Electric charge is the derived dimension cm^{3/2} g^{1/2} s⁻¹, which is
/// why the exponents are rationals rather than integers.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Dimension {
    pub length: Rat,
    pub mass: Rat,
    pub time: Rat,
}

pub const DIMENSIONLESS: Dimension = Dimension::new_const(Rat::ZERO, Rat::ZERO, Rat::ZERO);
pub const LENGTH: Dimension = Dimension::ints(1, 0, 0);
pub const MASS: Dimension = Dimension::ints(0, 1, 0);
pub const TIME: Dimension = Dimension::ints(0, 0, 1);
pub const VELOCITY: Dimension = Dimension::ints(1, 0, -1);
pub const ACCELERATION: Dimension = Dimension::ints(1, 0, -2);
pub const ENERGY: Dimension = Dimension::ints(2, 1, -2);
pub const ACTION: Dimension = Dimension::ints(2, 1, -1);
pub const FORCE: Dimension = Dimension::ints(1, 1, -2);
pub const RATE: Dimension = Dimension::ints(0, 0, -1);
pub const GRAVITATIONAL: Dimension = Dimension::ints(3, -1, -2);
/// esu: cm^{3/2} g^{1/2} s⁻¹
pub const CHARGE: Dimension = Dimension::new_const(Rat::new(3, 2), Rat::new(1, 2), Rat::int(-1));
/// statvolt/cm and gauss share this dimension: cm^{-1/2} g^{1/2} s⁻¹
pub const FIELD: Dimension = Dimension::new_const(Rat::new(-1, 2), Rat::new(1, 2), Rat::int(-1));

impl Dimension {
    pub const fn new_const(length: Rat, mass: Rat, time: Rat) -> Dimension {
        Dimension { length, mass, time }
    }

    pub const fn ints(length: i32, mass: i32, time: i32) -> Dimension {
        Dimension {
            length: Rat::int(length),
            mass: Rat::int(mass),
            time: Rat::int(time),
        }
    }

    pub fn powi(self, k: i32) -> Dimension {
        Dimension {
            length: self.length.scale(k),
            mass: self.mass.scale(k),
            time: self.time.scale(k),
        }
    }

    pub fn root(self, k: i32) -> Dimension {
        Dimension {
            length: self.length.div_int(k),
            mass: self.mass.div_int(k),
            time: self.time.div_int(k),
        }
    }

    pub fn is_dimensionless(self) -> bool {
        self.length.is_zero() && self.mass.is_zero() && self.time.is_zero()
    }
}

impl std::ops::Mul for Dimension {
    type Output = Dimension;
    fn mul(self, other: Dimension) -> Dimension {
        Dimension {
            length: self.length + other.length,
            mass: self.mass + other.mass,
            time: self.time + other.time,
        }
    }
}

impl std::ops::Div for Dimension {
    type Output = Dimension;
    fn div(self, other: Dimension) -> Dimension {
        Dimension {
            length: self.length - other.length,
            mass: self.mass - other.mass,
            time: self.time - other.time,
        }
    }
}

impl std::fmt::Display for Dimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_dimensionless() {
            return write!(f, "1");
        }
        let mut parts = Vec::new();
        for (sym, e) in [("cm", self.length), ("g", self.mass), ("s", self.time)] {
            if !e.is_zero() {
                if e == Rat::ONE {
                    parts.push(sym.to_string());
                } else {
                    parts.push(format!("{}^{}", sym, e));
                }
            }
        }
        write!(f, "{}", parts.join("·"))
    }
}

/// A magnitude with an exact dimension. Multiplication and division are
/// always defined; addition, subtraction and comparison only for equal
/// dimensions (a mismatch signals a physics-formula coding bug).
#[derive(Clone, Copy, Debug)]
pub struct Quantity {
    mag: f64,
    dim: Dimension,
}

impl Quantity {
    pub fn new(mag: f64, dim: Dimension) -> Quantity {
        Quantity { mag, dim }
    }

    pub fn dimensionless(x: f64) -> Quantity {
        Quantity {
            mag: x,
            dim: DIMENSIONLESS,
        }
    }

    pub fn magnitude(self) -> f64 {
        self.mag
    }

    pub fn dim(self) -> Dimension {
        self.dim
    }

    /// Addition needs equal dimensions and must surface a mismatch as an
    /// error, which `std::ops::Add` cannot, hence a named method.
    #[allow(clippy::should_implement_trait)]
    pub fn add(self, other: Quantity) -> Result<Quantity, UnitsError> {
        if self.dim != other.dim {
            return Err(UnitsError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
                context: "add",
            });
        }
        Ok(Quantity {
            mag: self.mag + other.mag,
            dim: self.dim,
        })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(self, other: Quantity) -> Result<Quantity, UnitsError> {
        if self.dim != other.dim {
            return Err(UnitsError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
                context: "sub",
            });
        }
        Ok(Quantity {
            mag: self.mag - other.mag,
            dim: self.dim,
        })
    }

    pub fn powi(self, k: i32) -> Quantity {
        Quantity {
            mag: self.mag.powi(k),
            dim: self.dim.powi(k),
        }
    }

    pub fn sqrt(self) -> Quantity {
        Quantity {
            mag: self.mag.sqrt(),
            dim: self.dim.root(2),
        }
    }

    pub fn cbrt(self) -> Quantity {
        Quantity {
            mag: self.mag.cbrt(),
            dim: self.dim.root(3),
        }
    }

    pub fn recip(self) -> Quantity {
        Quantity {
            mag: 1.0 / self.mag,
            dim: self.dim.powi(-1),
        }
    }

    pub fn abs(self) -> Quantity {
        Quantity {
            mag: self.mag.abs(),
            dim: self.dim,
        }
    }

    pub fn is_dimensionless(self) -> bool {
        self.dim.is_dimensionless()
    }

    /// Magnitude of a dimensionless quantity; errors otherwise.
    pub fn as_dimensionless(self) -> Result<f64, UnitsError> {
        if !self.is_dimensionless() {
            return Err(UnitsError::DimensionMismatch {
                left: self.dim,
                right: DIMENSIONLESS,
                context: "as_dimensionless",
            });
        }
        Ok(self.mag)
    }

    /// Express this quantity in `unit`, erroring on a dimension mismatch.
    pub fn in_unit(self, unit: &Unit) -> Result<f64, UnitsError> {
        if self.dim != unit.dim {
            return Err(UnitsError::DimensionMismatch {
                left: self.dim,
                right: unit.dim,
                context: "convert",
            });
        }
        Ok(self.mag / unit.factor)
    }
}

impl PartialEq for Quantity {
    fn eq(&self, other: &Quantity) -> bool {
        self.dim == other.dim && self.mag == other.mag
    }
}

impl PartialOrd for Quantity {
    /// None when the dimensions differ: such quantities are incomparable.
    fn partial_cmp(&self, other: &Quantity) -> Option<std::cmp::Ordering> {
        if self.dim != other.dim {
            return None;
        }
        self.mag.partial_cmp(&other.mag)
    }
}

impl std::ops::Mul for Quantity {
    type Output = Quantity;
    fn mul(self, rhs: Quantity) -> Quantity {
        Quantity {
            mag: self.mag * rhs.mag,
            dim: self.dim * rhs.dim,
        }
    }
}

impl std::ops::Div for Quantity {
    type Output = Quantity;
    fn div(self, rhs: Quantity) -> Quantity {
        Quantity {
            mag: self.mag / rhs.mag,
            dim: self.dim / rhs.dim,
        }
    }
}

impl std::ops::Mul<f64> for Quantity {
    type Output = Quantity;
    fn mul(self, rhs: f64) -> Quantity {
        Quantity {
            mag: self.mag * rhs,
            dim: self.dim,
        }
    }
}

impl std::ops::Mul<Quantity> for f64 {
    type Output = Quantity;
    fn mul(self, rhs: Quantity) -> Quantity {
        Quantity {
            mag: self * rhs.mag,
            dim: rhs.dim,
        }
    }
}

impl std::ops::Div<f64> for Quantity {
    type Output = Quantity;
    fn div(self, rhs: f64) -> Quantity {
        Quantity {
            mag: self.mag / rhs,
            dim: self.dim,
        }
    }
}

impl std::ops::Neg for Quantity {
    type Output = Quantity;
    fn neg(self) -> Quantity {
        Quantity {
            mag: -self.mag,
            dim: self.dim,
        }
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.dim.is_dimensionless() {
            write!(f, "{}", self.mag)
        } else {
            write!(f, "{} {}", self.mag, self.dim)
        }
    }
}

/// Named unit: a scale factor into base CGS plus the dimension it carries.
#[derive(Clone, Copy, Debug)]
pub struct Unit {
    pub symbol: &'static str,
    pub factor: f64,
    pub dim: Dimension,
}

impl Unit {
    /// Quantity of `x` of this unit.
    pub fn quantity(&self, x: f64) -> Quantity {
        Quantity::new(x * self.factor, self.dim)
    }
}

pub const CM: Unit = Unit {
    symbol: "cm",
    factor: 1.0,
    dim: LENGTH,
};
pub const GRAM: Unit = Unit {
    symbol: "g",
    factor: 1.0,
    dim: MASS,
};
pub const SECOND: Unit = Unit {
    symbol: "s",
    factor: 1.0,
    dim: TIME,
};
pub const NANOSECOND: Unit = Unit {
    symbol: "ns",
    factor: 1e-9,
    dim: TIME,
};
pub const MICROSECOND: Unit = Unit {
    symbol: "us",
    factor: 1e-6,
    dim: TIME,
};
pub const ERG: Unit = Unit {
    symbol: "erg",
    factor: 1.0,
    dim: ENERGY,
};
/// Default eV; chains that honor constant overrides go through `Constants::ev_unit`.
pub const EV: Unit = Unit {
    symbol: "eV",
    factor: 1.602_176_634e-12,
    dim: ENERGY,
};
pub const ESU: Unit = Unit {
    symbol: "esu",
    factor: 1.0,
    dim: CHARGE,
};
pub const GAUSS: Unit = Unit {
    symbol: "G",
    factor: 1.0,
    dim: FIELD,
};
pub const KILOGAUSS: Unit = Unit {
    symbol: "kG",
    factor: 1e3,
    dim: FIELD,
};
pub const STATVOLT_PER_CM: Unit = Unit {
    symbol: "statvolt/cm",
    factor: 1.0,
    dim: FIELD,
};
/// 1 statvolt = 299.792458 V by the conventional exact mapping.
pub const VOLT_PER_CM: Unit = Unit {
    symbol: "V/cm",
    factor: 1.0 / 299.792_458,
    dim: FIELD,
};
pub const PER_SECOND: Unit = Unit {
    symbol: "1/s",
    factor: 1.0,
    dim: RATE,
};
pub const PER_MICROSECOND: Unit = Unit {
    symbol: "1/us",
    factor: 1e6,
    dim: RATE,
};
pub const CM_PER_S: Unit = Unit {
    symbol: "cm/s",
    factor: 1.0,
    dim: VELOCITY,
};
pub const CM_PER_S2: Unit = Unit {
    symbol: "cm/s^2",
    factor: 1.0,
    dim: ACCELERATION,
};

/// Fundamental constants in Gaussian CGS, CODATA defaults.
///
/// Overridable through the config file only; immutable once built.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    /// reduced Planck constant (erg·s)
    pub hbar: f64,
    /// speed of light (cm/s)
    pub c: f64,
    /// gravitational constant (cm³ g⁻¹ s⁻²)
    pub grav: f64,
    /// electron mass (g)
    pub m_e: f64,
    /// proton mass (g)
    pub m_p: f64,
    /// elementary charge (esu)
    pub e: f64,
    /// fine-structure constant
    pub alpha: f64,
    /// eV → erg
    pub ev_erg: f64,
}

impl Default for Constants {
    fn default() -> Constants {
        Constants {
            hbar: 1.054_572e-27,
            c: 2.997_924_58e10,
            grav: 6.674e-8,
            m_e: 9.109_38e-28,
            m_p: 1.672_622e-24,
            e: 4.803_21e-10,
            alpha: 7.297_352_5e-3,
            ev_erg: 1.602_176_634e-12,
        }
    }
}

impl Constants {
    pub fn hbar(&self) -> Quantity {
        Quantity::new(self.hbar, ACTION)
    }

    pub fn c(&self) -> Quantity {
        Quantity::new(self.c, VELOCITY)
    }

    pub fn grav(&self) -> Quantity {
        Quantity::new(self.grav, GRAVITATIONAL)
    }

    pub fn m_e(&self) -> Quantity {
        Quantity::new(self.m_e, MASS)
    }

    pub fn m_p(&self) -> Quantity {
        Quantity::new(self.m_p, MASS)
    }

    pub fn e(&self) -> Quantity {
        Quantity::new(self.e, CHARGE)
    }

    /// eV as a unit under the (possibly overridden) eV→erg factor.
    pub fn ev_unit(&self) -> Unit {
        Unit {
            symbol: "eV",
            factor: self.ev_erg,
            dim: ENERGY,
        }
    }

    pub fn ev(&self, x: f64) -> Quantity {
        Quantity::new(x * self.ev_erg, ENERGY)
    }

    pub fn to_ev(&self, q: Quantity) -> Result<f64, UnitsError> {
        q.in_unit(&self.ev_unit())
    }
}
