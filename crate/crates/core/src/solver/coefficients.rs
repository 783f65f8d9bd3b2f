use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Globally Lipschitz scalar nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScalarFn {
    /// `a0 + a1·u`
    Affine { a0: f64, a1: f64 },
    /// `amplitude·sin(frequency·u)`
    Sine { amplitude: f64, frequency: f64 },
    /// `clamp(slope·u, -cap, cap)`
    ClippedLinear { slope: f64, cap: f64 },
}

impl Default for ScalarFn {
    fn default() -> Self {
        ScalarFn::zero()
    }
}

impl ScalarFn {
    pub const fn zero() -> Self {
        ScalarFn::Affine { a0: 0.0, a1: 0.0 }
    }

    pub const fn constant(c: f64) -> Self {
        ScalarFn::Affine { a0: c, a1: 0.0 }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            ScalarFn::Affine { a0, a1 } => a0 + a1 * u,
            ScalarFn::Sine { amplitude, frequency } => amplitude * (frequency * u).sin(),
            ScalarFn::ClippedLinear { slope, cap } => (slope * u).clamp(-cap, cap),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            ScalarFn::Affine { a1, .. } => a1.abs(),
            ScalarFn::Sine { amplitude, frequency } => (amplitude * frequency).abs(),
            ScalarFn::ClippedLinear { slope, .. } => slope.abs(),
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, ScalarFn::Affine { .. })
    }

    /// True when the function vanishes identically.
    pub fn is_zero(&self) -> bool {
        match *self {
            ScalarFn::Affine { a0, a1 } => a0 == 0.0 && a1 == 0.0,
            ScalarFn::Sine { amplitude, frequency } => amplitude == 0.0 || frequency == 0.0,
            ScalarFn::ClippedLinear { slope, cap } => slope == 0.0 || cap == 0.0,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            ScalarFn::Affine { a0, a1 } => a0.is_finite() && a1.is_finite(),
            ScalarFn::Sine { amplitude, frequency } => amplitude.is_finite() && frequency.is_finite(),
            ScalarFn::ClippedLinear { slope, cap } => slope.is_finite() && cap.is_finite() && cap >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("coefficient {name} has non-finite or negative parameters: {self:?}")))
        }
    }
}

/// Coefficients of `∂²u = Δu + A(u)Ṁ + B(u)Ẇ + D(u)h + b(u)`.
///
/// `A` is always driven by the Brownian noise, `B` by the noise or by its
/// smoothing, and `D` by the control.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CoefficientSet {
    pub a: ScalarFn,
    pub b: ScalarFn,
    pub d: ScalarFn,
    pub drift: ScalarFn,
    pub requires_affine_b: bool,
}

impl CoefficientSet {
    pub fn zero() -> Self {
        CoefficientSet::default()
    }

    pub fn validate(&self) -> Result<()> {
        self.a.validate("A")?;
        self.b.validate("B")?;
        self.d.validate("D")?;
        self.drift.validate("b")?;
        if self.requires_affine_b && !self.b.is_affine() {
            return Err(Error::Admissibility {
                hypothesis: "B affine",
                detail: format!("B must be affine for this study, got {:?}", self.b),
            });
        }
        Ok(())
    }

    /// Largest Lipschitz constant among the four coefficients.
    pub fn lipschitz(&self) -> f64 {
        [self.a, self.b, self.d, self.drift].iter().map(ScalarFn::lipschitz).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.d.is_zero() && self.drift.is_zero()
    }
}
