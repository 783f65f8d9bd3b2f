use crate::error::{Error, Result};

/// Scalar kernels for the first and second differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    /// `|z|^{-β}`
    Riesz { beta: f64 },
    /// `exp(-|z|²/2σ²)`, smooth test kernel.
    Gaussian { sigma: f64 },
}

impl Kernel {
    pub fn eval(&self, z: [f64; 3]) -> Result<f64> {
        let r2 = z[0] * z[0] + z[1] * z[1] + z[2] * z[2];
        match *self {
            Kernel::Riesz { beta } => {
                if r2 == 0.0 {
                    Err(Error::domain("Riesz kernel evaluated at its singularity"))
                } else {
                    Ok(r2.powf(-0.5 * beta))
                }
            }
            Kernel::Gaussian { sigma } => Ok((-0.5 * r2 / (sigma * sigma)).exp()),
        }
    }
}

/// `Df(u,x) = f(u+x) - f(u)` and `D²f(u,x) = f(u-x) - 2f(u) + f(u+x)`.
pub fn difference_ops(f: Kernel, u: [f64; 3], x: [f64; 3]) -> Result<(f64, f64)> {
    let plus = [u[0] + x[0], u[1] + x[1], u[2] + x[2]];
    let minus = [u[0] - x[0], u[1] - x[1], u[2] - x[2]];
    let fu = f.eval(u)?;
    let fp = f.eval(plus)?;
    let fm = f.eval(minus)?;
    Ok((fp - fu, fm - 2.0 * fu + fp))
}
