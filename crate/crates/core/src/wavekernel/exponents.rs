use serde::{Deserialize, Serialize};

/// Exponent bookkeeping for the uniform Sobolev moment bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub beta: f64,
    pub p: f64,
    pub gamma: f64,
    /// `min((4-β)/2, 3 - 2γ - 6/p - β)`
    pub eta: f64,
    /// `η - 1 - 2η/p`
    pub eta1: f64,
    /// `p > 2(4-β)/(2-β)`
    pub p_condition: bool,
    /// `γ < (2-β)/2 - 3/p`
    pub gamma_condition: bool,
    pub hypotheses_hold: bool,
    /// `η₁ > 0`
    pub conclusion_holds: bool,
}

impl ExponentReport {
    /// Hypotheses hold but the conclusion does not.
    pub fn discrepancy(&self) -> bool {
        self.hypotheses_hold && !self.conclusion_holds
    }
}

pub fn check_exponents(beta: f64, p: f64, gamma: f64) -> ExponentReport {
    let eta = ((4.0 - beta) / 2.0).min(3.0 - 2.0 * gamma - 6.0 / p - beta);
    let eta1 = eta - 1.0 - 2.0 * eta / p;
    let p_condition = p > 2.0 * (4.0 - beta) / (2.0 - beta);
    let gamma_condition = gamma < (2.0 - beta) / 2.0 - 3.0 / p;
    ExponentReport {
        beta,
        p,
        gamma,
        eta,
        eta1,
        p_condition,
        gamma_condition,
        hypotheses_hold: p_condition && gamma_condition,
        conclusion_holds: eta1 > 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admissible_case() {
        let r = check_exponents(1.0, 20.0, 0.05);
        assert!((r.eta - 1.5).abs() < 1e-12 && (r.eta1 - 0.35).abs() < 1e-12);
        assert!(r.hypotheses_hold && r.conclusion_holds && !r.discrepancy());
    }

    #[test]
    fn flagged_case() {
        let r = check_exponents(1.0, 10.0, 0.1);
        assert!((r.eta - 1.2).abs() < 1e-12 && (r.eta1 + 0.04).abs() < 1e-12);
        assert!(r.hypotheses_hold && !r.conclusion_holds && r.discrepancy());
    }

    #[test]
    fn boundary_p() {
        let r = check_exponents(1.0, 6.0, 0.1);
        assert!(!r.p_condition && !r.hypotheses_hold);
    }
}
