//! Forward-mode dual numbers over the six phase-space coordinates.
//!
//! Formulas in this crate are written once against [`Scalar`] and evaluated
//! either on plain `f64` or on [`Dual`], which carries the exact gradient
//! with respect to `(x, y, z, px, py, pz)` alongside the value.
//!
//! Division and square roots are only available through the checked
//! operations on [`Scalar`]; both fail when the value part is zero.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Number of independent phase-space coordinates.
pub const DIM: usize = 6;

/// Arithmetic shared by `f64` and [`Dual`].
pub trait Scalar:
    Copy
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
    + AddAssign
{
    fn constant(value: f64) -> Self;

    fn value(&self) -> f64;

    /// `1 / self`; fails when the value part is exactly zero.
    fn checked_recip(self) -> Result<Self>;

    /// Square root; fails when the value part is zero or negative.
    fn checked_sqrt(self) -> Result<Self>;

    fn checked_div(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs.checked_recip()?)
    }

    fn square(self) -> Self {
        self * self
    }

    fn zero() -> Self {
        Self::constant(0.0)
    }
}

impl Scalar for f64 {
    fn constant(value: f64) -> Self {
        value
    }

    fn value(&self) -> f64 {
        *self
    }

    fn checked_recip(self) -> Result<Self> {
        if self == 0.0 {
            return Err(Error::Singular("division by zero"));
        }
        Ok(1.0 / self)
    }

    fn checked_sqrt(self) -> Result<Self> {
        if self <= 0.0 {
            return Err(Error::Singular("square root of non-positive value"));
        }
        Ok(self.sqrt())
    }
}

/// A value together with its partial derivatives with respect to
/// `x, y, z, px, py, pz` (in that order).
#[derive(Clone, Copy, PartialEq)]
pub struct Dual {
    pub value: f64,
    pub partials: [f64; DIM],
}

impl Dual {
    pub const fn constant(value: f64) -> Self {
        Self {
            value,
            partials: [0.0; DIM],
        }
    }

    /// The independent variable `i` evaluated at `value` (partials = e_i).
    pub fn variable(value: f64, index: usize) -> Self {
        let mut partials = [0.0; DIM];
        partials[index] = 1.0;
        Self { value, partials }
    }

    fn map_partials(self, factor: f64) -> [f64; DIM] {
        let mut out = self.partials;
        for d in &mut out {
            *d *= factor;
        }
        out
    }
}

impl fmt::Debug for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dual({} ; {:?})", self.value, self.partials)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        let mut partials = self.partials;
        for (d, r) in partials.iter_mut().zip(rhs.partials) {
            *d += r;
        }
        Dual {
            value: self.value + rhs.value,
            partials,
        }
    }
}

impl AddAssign for Dual {
    fn add_assign(&mut self, rhs: Dual) {
        *self = *self + rhs;
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        let mut partials = self.partials;
        for (d, r) in partials.iter_mut().zip(rhs.partials) {
            *d -= r;
        }
        Dual {
            value: self.value - rhs.value,
            partials,
        }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        let mut partials = [0.0; DIM];
        for (i, d) in partials.iter_mut().enumerate() {
            *d = self.partials[i] * rhs.value + self.value * rhs.partials[i];
        }
        Dual {
            value: self.value * rhs.value,
            partials,
        }
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual {
            value: -self.value,
            partials: self.map_partials(-1.0),
        }
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, rhs: f64) -> Dual {
        Dual {
            value: self.value + rhs,
            partials: self.partials,
        }
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(self, rhs: f64) -> Dual {
        Dual {
            value: self.value - rhs,
            partials: self.partials,
        }
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        Dual {
            value: self.value * rhs,
            partials: self.map_partials(rhs),
        }
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, rhs: f64) -> Dual {
        Dual {
            value: self.value / rhs,
            partials: self.map_partials(1.0 / rhs),
        }
    }
}

impl Scalar for Dual {
    fn constant(value: f64) -> Self {
        Dual::constant(value)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn checked_recip(self) -> Result<Self> {
        if self.value == 0.0 {
            return Err(Error::Singular("division by zero"));
        }
        let inv = 1.0 / self.value;
        Ok(Dual {
            value: inv,
            partials: self.map_partials(-inv * inv),
        })
    }

    fn checked_sqrt(self) -> Result<Self> {
        if self.value <= 0.0 {
            return Err(Error::Singular("square root of non-positive value"));
        }
        let root = self.value.sqrt();
        Ok(Dual {
            value: root,
            partials: self.map_partials(0.5 / root),
        })
    }
}
