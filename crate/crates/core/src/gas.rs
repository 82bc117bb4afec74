//! Polytropic gas law and pointwise state classification.
//!
//! The gas is described by the polytropic exponent `gamma`, the sound speed
//! `c0` at the reference density `rho0`, and the additive Bernoulli constant.
//! In the similarity frame the squared sound speed is a pointwise function of
//! chi and the pseudo-velocity grad(chi); the local character of the flow
//! equation is set by the pseudo-Mach number `L = |grad chi| / c`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default half-width of the classification band around the sonic state L = 1.
pub const DEFAULT_TOL_L: f64 = 1e-6;

/// Local type of the flow equation at a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TypeTag {
    /// L < 1 - tol_L (pseudo-subsonic).
    Elliptic,
    /// |L - 1| <= tol_L (pseudo-sonic).
    Parabolic,
    /// L > 1 + tol_L (pseudo-supersonic).
    Hyperbolic,
}

/// Pressure, Bernoulli enthalpy and squared sound speed at a density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosState {
    pub p: f64,
    pub pi: f64,
    pub c2: f64,
}

/// Polytropic gas parameters.
///
/// Pressure law `p(rho) = (c0^2 rho0 / gamma) (rho/rho0)^gamma` for
/// `gamma != 0`, with `c^2(rho) = c0^2 (rho/rho0)^(gamma-1)`. The enthalpy-like
/// potential pi has the logarithmic branch at `gamma = 1` (isothermal flow,
/// constant sound speed). `bernoulli_a` is the additive constant of the
/// Bernoulli relation; the natural normalization is zero and all constructors
/// default to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasModel {
    pub gamma: f64,
    pub c0: f64,
    pub rho0: f64,
    #[serde(default)]
    pub bernoulli_a: f64,
}

impl GasModel {
    pub fn new(gamma: f64, c0: f64, rho0: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidGas(format!("gamma must be finite, got {gamma}")));
        }
        if !(c0.is_finite() && c0 > 0.0) {
            return Err(Error::InvalidGas(format!("c0 must be positive, got {c0}")));
        }
        if !(rho0.is_finite() && rho0 > 0.0) {
            return Err(Error::InvalidGas(format!("rho0 must be positive, got {rho0}")));
        }
        Ok(GasModel {
            gamma,
            c0,
            rho0,
            bernoulli_a: 0.0,
        })
    }

    #[must_use]
    pub fn with_bernoulli(mut self, a: f64) -> Self {
        self.bernoulli_a = a;
        self
    }

    /// Isothermal gases have constant sound speed c0.
    pub fn is_isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    /// Gamma below zero is formula-valid but physically unusual; reports flag it.
    pub fn nonstandard_gamma(&self) -> bool {
        self.gamma < 0.0
    }

    /// Pressure, pi and c^2 at density `rho`.
    pub fn eval_eos(&self, rho: f64) -> Result<EosState> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::state(format!("nonpositive density rho = {rho}")));
        }
        if self.gamma == 0.0 {
            return Err(Error::InvalidGas(
                "pressure law is undefined for gamma = 0".into(),
            ));
        }
        let c0sq = self.c0 * self.c0;
        let u = rho / self.rho0;
        let p = c0sq * self.rho0 / self.gamma * u.powf(self.gamma);
        let pi = self.pi(rho);
        let c2 = c0sq * u.powf(self.gamma - 1.0);
        Ok(EosState { p, pi, c2 })
    }

    /// The potential pi with pi'(rho) = c^2(rho)/rho; logarithmic at gamma = 1.
    fn pi(&self, rho: f64) -> f64 {
        let c0sq = self.c0 * self.c0;
        let u = rho / self.rho0;
        if self.gamma == 1.0 {
            c0sq * u.ln()
        } else {
            c0sq / (self.gamma - 1.0) * u.powf(self.gamma - 1.0)
        }
    }

    /// Inverse of pi. The range of pi is w > 0 for gamma > 1, all of R for
    /// gamma = 1, and w < 0 for gamma < 1; outside it the state is vacuum.
    pub fn pi_inverse(&self, w: f64) -> Result<f64> {
        if !w.is_finite() {
            return Err(Error::state(format!("pi value must be finite, got {w}")));
        }
        let c0sq = self.c0 * self.c0;
        if self.gamma == 1.0 {
            return Ok(self.rho0 * (w / c0sq).exp());
        }
        // (rho/rho0)^(gamma-1) = w (gamma-1) / c0^2 must be positive.
        let t = w * (self.gamma - 1.0) / c0sq;
        if t <= 0.0 {
            return Err(Error::state(format!(
                "pi value {w} outside the range of pi for gamma = {} (vacuum)",
                self.gamma
            )));
        }
        Ok(self.rho0 * t.powf(1.0 / (self.gamma - 1.0)))
    }

    /// Squared sound speed of the Bernoulli relation, without the positivity
    /// check. Solver internals clamp this; everything else should go through
    /// [`GasModel::sound_speed_sq`].
    pub fn sound_speed_sq_raw(&self, chi: f64, grad_chi: &[f64]) -> f64 {
        if self.gamma == 1.0 {
            self.c0 * self.c0
        } else {
            let q2 = grad_chi.iter().map(|g| g * g).sum::<f64>();
            (self.gamma - 1.0) * (self.bernoulli_a - chi - 0.5 * q2)
        }
    }

    /// Squared sound speed at a state (chi, grad chi). Errors when the state
    /// is vacuum or worse (c^2 <= 0), which violates the rho > 0 hypothesis.
    pub fn sound_speed_sq(&self, chi: f64, grad_chi: &[f64]) -> Result<f64> {
        let c2 = self.sound_speed_sq_raw(chi, grad_chi);
        if !(c2.is_finite() && c2 > 0.0) {
            return Err(Error::state(format!(
                "nonpositive squared sound speed c^2 = {c2} at chi = {chi}"
            )));
        }
        Ok(c2)
    }

    /// The gas that makes a velocity-scaled field `s^2 chi(xi/s)` a solution
    /// again: c0 -> s c0 (only relevant for gamma = 1) and A -> s^2 A.
    #[must_use]
    pub fn velocity_scaled(&self, s: f64) -> GasModel {
        GasModel {
            gamma: self.gamma,
            c0: s * self.c0,
            rho0: self.rho0,
            bernoulli_a: s * s * self.bernoulli_a,
        }
    }
}

/// Pseudo-Mach number and type tag of a state.
pub fn pseudo_mach_classify(grad_chi: &[f64], c2: f64, tol_l: f64) -> Result<(f64, TypeTag)> {
    if !(c2.is_finite() && c2 > 0.0) {
        return Err(Error::state(format!(
            "cannot classify with nonpositive c^2 = {c2}"
        )));
    }
    let q = grad_chi.iter().map(|g| g * g).sum::<f64>().sqrt();
    let l = q / c2.sqrt();
    let tag = if l < 1.0 - tol_l {
        TypeTag::Elliptic
    } else if l > 1.0 + tol_l {
        TypeTag::Hyperbolic
    } else {
        TypeTag::Parabolic
    };
    Ok((l, tag))
}
