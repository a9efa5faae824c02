use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance under which a strict geometric inequality is reported as marginal.
pub const MARGINAL_RTOL: f64 = 1e-12;

/// The weight `phi(t, x) = |x - x0|^2 - beta t^2` with its Carleman parameter `s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarlemanWeight {
    x0: f64,
    beta: f64,
    s: f64,
    length: f64,
    d0sq: f64,
    l0sq: f64,
}

impl CarlemanWeight {
    pub fn new(x0: f64, beta: f64, s: f64, length: f64) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidParameter(format!("domain length must be positive, got {length}")));
        }
        if (0.0..=length).contains(&x0) {
            return Err(Error::ObservationPointInside { x0, length });
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidParameter(format!("beta must lie in (0, 1), got {beta}")));
        }
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!("s must be a finite nonnegative number, got {s}")));
        }
        let near = if x0 < 0.0 { -x0 } else { x0 - length };
        let far = (x0).abs().max((length - x0).abs());
        Ok(Self { x0, beta, s, length, d0sq: near * near, l0sq: far * far })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `inf_{[0,L]} |x - x0|^2`.
    pub fn d0sq(&self) -> f64 {
        self.d0sq
    }

    /// `sup_{[0,L]} |x - x0|^2`.
    pub fn l0sq(&self) -> f64 {
        self.l0sq
    }

    /// Same geometry with another Carleman parameter.
    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..*self }
    }

    pub fn phi(&self, t: f64, x: f64) -> f64 {
        let dx = x - self.x0;
        dx * dx - self.beta * t * t
    }

    /// `e^{s (phi(t,x) - phi_ref)}`; callers pick `phi_ref` so the exponent stays bounded.
    pub fn exp_shifted(&self, t: f64, x: f64, phi_ref: f64) -> f64 {
        (self.s * (self.phi(t, x) - phi_ref)).exp()
    }

    /// Membership in the region where `beta t > |x - x0|` (strict).
    pub fn in_region_o(&self, t: f64, x: f64) -> bool {
        self.beta * t > (x - self.x0).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaCondition {
    Pass,
    Fail,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    Strict,
    Marginal,
    Fail,
}

impl Strictness {
    fn classify(lhs: f64, rhs: f64) -> Self {
        let scale = lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
        if (lhs - rhs).abs() <= MARGINAL_RTOL * scale {
            Strictness::Marginal
        } else if lhs > rhs {
            Strictness::Strict
        } else {
            Strictness::Fail
        }
    }
}

/// Outcome of the observability conditions for `Gamma_0 = {x = L}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub cond_gamma: GammaCondition,
    pub cond_t: Strictness,
    pub cond_beta_t: Strictness,
    pub sup_distance: f64,
}

impl GeometryReport {
    /// Human-readable warnings for every condition that is not strictly satisfied.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.cond_gamma == GammaCondition::Fail {
            out.push("x0 > L: the flux on {x = L} alone does not satisfy the multiplier condition".to_owned());
        }
        match self.cond_t {
            Strictness::Strict => {}
            Strictness::Marginal => out.push(format!("T equals sup|x - x0| = {} (marginal)", self.sup_distance)),
            Strictness::Fail => out.push(format!("T < sup|x - x0| = {}", self.sup_distance)),
        }
        match self.cond_beta_t {
            Strictness::Strict => {}
            Strictness::Marginal => out.push(format!("beta T equals sup|x - x0| = {} (marginal)", self.sup_distance)),
            Strictness::Fail => out.push(format!("beta T < sup|x - x0| = {}", self.sup_distance)),
        }
        out
    }

    pub fn all_strict(&self) -> bool {
        self.cond_gamma == GammaCondition::Pass
            && self.cond_t == Strictness::Strict
            && self.cond_beta_t == Strictness::Strict
    }
}

/// Classifies the geometric conditions. Only an observation point inside the domain is an error.
pub fn check_geometry(length: f64, final_time: f64, x0: f64, beta: f64) -> Result<GeometryReport> {
    if !(length > 0.0 && final_time > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need L > 0 and T > 0, got L = {length}, T = {final_time}"
        )));
    }
    if (0.0..=length).contains(&x0) {
        return Err(Error::ObservationPointInside { x0, length });
    }
    let sup_distance = x0.abs().max((length - x0).abs());
    Ok(GeometryReport {
        cond_gamma: if x0 < 0.0 { GammaCondition::Pass } else { GammaCondition::Fail },
        cond_t: Strictness::classify(final_time, sup_distance),
        cond_beta_t: Strictness::classify(beta * final_time, sup_distance),
        sup_distance,
    })
}
