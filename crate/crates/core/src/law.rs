//! Barotropic pressure laws `p(rho) = K rho^gamma`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    Affine,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PressureLaw {
    kind: LawKind,
    stiffness: f64,
    gamma: f64,
}

impl PressureLaw {
    pub fn affine(stiffness: f64) -> Result<Self> {
        Self::new(LawKind::Affine, stiffness, 1.0)
    }

    pub fn power(stiffness: f64, gamma: f64) -> Result<Self> {
        Self::new(LawKind::Power, stiffness, gamma)
    }

    pub fn new(kind: LawKind, stiffness: f64, gamma: f64) -> Result<Self> {
        if !(stiffness.is_finite() && stiffness > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stiffness must be positive, got {stiffness}"
            )));
        }
        if !(gamma.is_finite() && gamma >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "exponent must be at least 1, got {gamma}"
            )));
        }
        if kind == LawKind::Affine && gamma != 1.0 {
            return Err(Error::InvalidParameter(
                "an affine law has exponent 1".into(),
            ));
        }
        Ok(Self {
            kind,
            stiffness,
            gamma,
        })
    }

    /// Affine when the exponent is exactly one, power otherwise.
    pub fn from_exponent(stiffness: f64, gamma: f64) -> Result<Self> {
        if gamma == 1.0 {
            Self::affine(stiffness)
        } else {
            Self::power(stiffness, gamma)
        }
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    fn is_linear(&self) -> bool {
        self.gamma == 1.0
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        if self.is_linear() {
            self.stiffness * rho
        } else {
            self.stiffness * rho.powf(self.gamma)
        }
    }

    /// `p'(rho)`, the squared sound speed.
    pub fn dp(&self, rho: f64) -> f64 {
        if self.is_linear() {
            self.stiffness
        } else {
            self.stiffness * self.gamma * rho.powf(self.gamma - 1.0)
        }
    }

    pub fn d2p(&self, rho: f64) -> f64 {
        if self.is_linear() {
            0.0
        } else {
            self.stiffness * self.gamma * (self.gamma - 1.0) * rho.powf(self.gamma - 2.0)
        }
    }

    /// Density at which the law reaches `pressure`.
    pub fn density_at(&self, pressure: f64) -> f64 {
        if self.is_linear() {
            pressure / self.stiffness
        } else {
            (pressure / self.stiffness).powf(1.0 / self.gamma)
        }
    }

    /// `h(z) = int_1^z p'(r)/r dr`.
    pub fn enthalpy(&self, z: f64) -> f64 {
        if self.is_linear() {
            self.stiffness * z.ln()
        } else {
            let e = self.gamma - 1.0;
            self.stiffness * self.gamma / e * (z.powf(e) - 1.0)
        }
    }

    pub fn enthalpy_d1(&self, z: f64) -> f64 {
        self.dp(z) / z
    }

    pub fn enthalpy_d2(&self, z: f64) -> f64 {
        (self.d2p(z) * z - self.dp(z)) / (z * z)
    }

    /// Right-hand side of the hydrostatic balance `rho' = -g rho / p'(rho)`.
    pub fn hydrostatic_slope(&self, rho: f64, gravity: f64) -> f64 {
        -gravity * rho / self.dp(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(PressureLaw::affine(0.0).is_err());
        assert!(PressureLaw::power(1.0, 0.5).is_err());
        assert!(PressureLaw::new(LawKind::Affine, 1.0, 2.0).is_err());
    }

    #[test]
    fn inverse_and_derivatives() {
        let law = PressureLaw::power(3.0, 1.4).unwrap();
        let rho = 1.7;
        let p = law.pressure(rho);
        assert!((law.density_at(p) - rho).abs() < 1e-14);
        let h = 1e-5;
        let fd = (law.pressure(rho + h) - law.pressure(rho - h)) / (2.0 * h);
        assert!((fd - law.dp(rho)).abs() < 1e-8);
        let fd2 = (law.enthalpy(rho + h) - law.enthalpy(rho - h)) / (2.0 * h);
        assert!((fd2 - law.enthalpy_d1(rho)).abs() < 1e-8);
        let fd3 = (law.enthalpy_d1(rho + h) - law.enthalpy_d1(rho - h)) / (2.0 * h);
        assert!((fd3 - law.enthalpy_d2(rho)).abs() < 1e-8);
        assert_eq!(law.enthalpy(1.0), 0.0);
    }

    #[test]
    fn affine_enthalpy_is_logarithmic() {
        let law = PressureLaw::affine(2.0).unwrap();
        assert!((law.enthalpy(std::f64::consts::E) - 2.0).abs() < 1e-15);
        assert_eq!(law.d2p(3.0), 0.0);
    }
}
