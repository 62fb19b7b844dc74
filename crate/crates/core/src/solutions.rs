//! Manufactured exact solutions on the unit square.
//!
//! The body force is `f = -ν Δu + ∇p`; boundary data is the trace of `u`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Point2, Vector2};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolutionKind {
    /// Polynomial velocity and pressure, ν = 1.
    Example1,
    /// Exponential-trigonometric velocity, quartic pressure, ν = 5.
    Example2,
    /// `u = (y, x)`, `p = 0`, ν = 1; lies in the discrete space.
    PatchLinear,
}

impl SolutionKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Example1 => "example1",
            Self::Example2 => "example2",
            Self::PatchLinear => "patch_linear",
        }
    }

    pub fn default_viscosity(self) -> f64 {
        match self {
            Self::Example2 => 5.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolutionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "example1" | "1" => Ok(Self::Example1),
            "example2" | "2" => Ok(Self::Example2),
            "patch_linear" | "patch" => Ok(Self::PatchLinear),
            other => Err(Error::UnknownSolution(other.to_string())),
        }
    }
}

/// Exact Stokes pair `(u, p)` with its viscosity and body force.
///
/// Changing the viscosity by a factor `s` (see [`ManufacturedSolution::with_viscosity`])
/// keeps `u`, multiplies `p` and `f` by `s`, so the pair stays an exact solution.
#[derive(Debug, Clone, Copy)]
pub struct ManufacturedSolution<T: Real> {
    kind: SolutionKind,
    base_nu: T,
    scale: T,
}

pub fn make_solution<T: Real>(name: &str) -> Result<ManufacturedSolution<T>> {
    Ok(ManufacturedSolution::new(name.parse()?))
}

impl<T: Real> ManufacturedSolution<T> {
    pub fn new(kind: SolutionKind) -> Self {
        Self { kind, base_nu: T::lit(kind.default_viscosity()), scale: T::one() }
    }

    pub fn with_viscosity(self, nu: T) -> Self {
        Self { scale: nu / self.base_nu, ..self }
    }

    pub fn kind(&self) -> SolutionKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn nu(&self) -> T {
        self.base_nu * self.scale
    }

    pub fn u(&self, x: &Point2<T>) -> Vector2<T> {
        let (x, y) = (x.x, x.y);
        let c = T::lit;
        match self.kind {
            SolutionKind::Example1 => Vector2::new(
                x + x * x - c(2.0) * x * y + x * x * x - c(3.0) * x * y * y + x * x * y,
                -y - c(2.0) * x * y + y * y - c(3.0) * x * x * y + y * y * y - x * y * y,
            ),
            SolutionKind::Example2 => {
                let (e, s, co) = trig_parts(x, y);
                Vector2::new(e * s, e * (s - c(5.0) * co))
            }
            SolutionKind::PatchLinear => Vector2::new(y, x),
        }
    }

    /// Row `i` holds the gradient of component `i`.
    pub fn grad_u(&self, x: &Point2<T>) -> Matrix2<T> {
        let (x, y) = (x.x, x.y);
        let c = T::lit;
        match self.kind {
            SolutionKind::Example1 => Matrix2::new(
                T::one() + c(2.0) * x - c(2.0) * y + c(3.0) * x * x - c(3.0) * y * y + c(2.0) * x * y,
                -c(2.0) * x - c(6.0) * x * y + x * x,
                -c(2.0) * y - c(6.0) * x * y - y * y,
                -T::one() - c(2.0) * x + c(2.0) * y - c(3.0) * x * x + c(3.0) * y * y - c(2.0) * x * y,
            ),
            SolutionKind::Example2 => {
                let (e, s, co) = trig_parts(x, y);
                Matrix2::new(
                    e * (c(5.0) * co - s),
                    e * s,
                    e * (c(24.0) * s + c(10.0) * co),
                    e * (s - c(5.0) * co),
                )
            }
            SolutionKind::PatchLinear => Matrix2::new(T::zero(), T::one(), T::one(), T::zero()),
        }
    }

    pub fn laplacian_u(&self, x: &Point2<T>) -> Vector2<T> {
        let (x, y) = (x.x, x.y);
        let c = T::lit;
        match self.kind {
            SolutionKind::Example1 => Vector2::new(c(2.0) + c(2.0) * y, c(2.0) - c(2.0) * x),
            SolutionKind::Example2 => {
                let (e, s, co) = trig_parts(x, y);
                Vector2::new(e * (-c(23.0) * s - c(10.0) * co), e * (-c(73.0) * s + c(105.0) * co))
            }
            SolutionKind::PatchLinear => Vector2::zeros(),
        }
    }

    pub fn p(&self, x: &Point2<T>) -> T {
        let (x, y) = (x.x, x.y);
        let c = T::lit;
        let base = match self.kind {
            SolutionKind::Example1 => x * y + x + y + x * x * x * y * y - c(4.0 / 3.0),
            SolutionKind::Example2 => x * y * (T::one() - x) * (T::one() - y) - c(1.0 / 36.0),
            SolutionKind::PatchLinear => T::zero(),
        };
        self.scale * base
    }

    pub fn grad_p(&self, x: &Point2<T>) -> Vector2<T> {
        let (x, y) = (x.x, x.y);
        let c = T::lit;
        let base = match self.kind {
            SolutionKind::Example1 => {
                Vector2::new(y + T::one() + c(3.0) * x * x * y * y, x + T::one() + c(2.0) * x * x * x * y)
            }
            SolutionKind::Example2 => Vector2::new(
                y * (T::one() - y) * (T::one() - c(2.0) * x),
                x * (T::one() - x) * (T::one() - c(2.0) * y),
            ),
            SolutionKind::PatchLinear => Vector2::zeros(),
        };
        base * self.scale
    }

    pub fn f(&self, x: &Point2<T>) -> Vector2<T> {
        -self.laplacian_u(x) * self.nu() + self.grad_p(x)
    }

    pub fn div_u(&self, x: &Point2<T>) -> T {
        self.grad_u(x).trace()
    }
}

fn trig_parts<T: Real>(x: T, y: T) -> (T, T, T) {
    let five_x = T::lit(5.0) * x;
    ((y - x).exp(), five_x.sin(), five_x.cos())
}
