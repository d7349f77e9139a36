//! Closed-form sender utilities for two-state, two-receiver examples.
//!
//! Beliefs enter through their low-state coordinate: with two states the
//! flattened profile is `[x1, 1-x1, x2, 1-x2]`.

use std::fmt;
use std::sync::Arc;

use crate::belief::Utility;

const LOW: usize = 0;

#[inline]
fn low(profile: &[f64], receiver: usize) -> f64 {
    profile[2 * receiver]
}

/// `|x1 - x2|^β` in every state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Polarization {
    pub beta: f64,
}

impl Utility for Polarization {
    fn value(&self, _state: usize, profile: &[f64]) -> f64 {
        (low(profile, 0) - low(profile, 1)).abs().powf(self.beta)
    }

    fn describe(&self) -> String {
        format!("polarization(beta={})", self.beta)
    }
}

/// The retailer's problem stated through its 1-polarization equivalent, `|x1 - x2|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retailer;

impl Utility for Retailer {
    fn value(&self, _state: usize, profile: &[f64]) -> f64 {
        (low(profile, 0) - low(profile, 1)).abs()
    }

    fn describe(&self) -> String {
        "retailer".into()
    }
}

/// Literal retailer profit `(x1 - x2)·1[x1 ≥ x2]`; half of [`Retailer`] at the optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetailerProfit;

impl Utility for RetailerProfit {
    fn value(&self, _state: usize, profile: &[f64]) -> f64 {
        (low(profile, 0) - low(profile, 1)).max(0.0)
    }

    fn describe(&self) -> String {
        "retailer_profit".into()
    }
}

/// `1 - min(x1, x2)` in the low state, zero otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Morale;

impl Utility for Morale {
    fn value(&self, state: usize, profile: &[f64]) -> f64 {
        if state == LOW {
            1.0 - low(profile, 0).min(low(profile, 1))
        } else {
            0.0
        }
    }

    fn describe(&self) -> String {
        "morale".into()
    }
}

/// Cournot duopoly with belief-dependent liability. Firm outputs solve
/// `(2b + c_i) q_i + b q_j = a - d_i - γ_i x_i`; the low-state utility is the
/// negated pollution cost `-(1 - exp(-s·q1))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Duopoly {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub cost_scale: f64,
}

impl Default for Duopoly {
    fn default() -> Self {
        Duopoly {
            a: 21.0,
            b: 2.0,
            c1: 0.0,
            c2: 0.0,
            d1: 9.0,
            d2: 3.0,
            gamma1: 3.0,
            gamma2: 12.0,
            cost_scale: 2.0,
        }
    }
}

impl Duopoly {
    pub fn outputs(&self, x1: f64, x2: f64) -> (f64, f64) {
        let (a11, a12) = (2.0 * self.b + self.c1, self.b);
        let (a21, a22) = (self.b, 2.0 * self.b + self.c2);
        let r1 = self.a - self.d1 - self.gamma1 * x1;
        let r2 = self.a - self.d2 - self.gamma2 * x2;
        let det = a11 * a22 - a12 * a21;
        ((r1 * a22 - a12 * r2) / det, (a11 * r2 - a21 * r1) / det)
    }
}

impl Utility for Duopoly {
    fn value(&self, state: usize, profile: &[f64]) -> f64 {
        if state != LOW {
            return 0.0;
        }
        let (q1, _) = self.outputs(low(profile, 0), low(profile, 1));
        -(1.0 - (-self.cost_scale * q1).exp())
    }

    fn describe(&self) -> String {
        format!("duopoly({self:?})")
    }
}

/// `|x1 - x2|·|x1 - 1/2|·|x2 - 1/2|` in every state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discord;

impl Utility for Discord {
    fn value(&self, _state: usize, profile: &[f64]) -> f64 {
        let (x1, x2) = (low(profile, 0), low(profile, 1));
        (x1 - x2).abs() * (x1 - 0.5).abs() * (x2 - 0.5).abs()
    }

    fn describe(&self) -> String {
        "discord".into()
    }
}

/// Public-option pricing: `G^ω(z1, z2) = α(z1 + z2) - c^ω(z1 + z2)` with
/// participation `z_i = 1 - x_i`, `c^h(q) = √q` and `c^ℓ(q) = √q / 3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublicOption {
    pub alpha: f64,
}

impl PublicOption {
    pub fn aggregate(&self, state: usize, z: &[f64]) -> f64 {
        let q: f64 = z.iter().sum();
        let cost = if state == LOW { q.sqrt() / 3.0 } else { q.sqrt() };
        self.alpha * q - cost
    }

    pub fn action(x: f64) -> f64 {
        1.0 - x
    }

    /// `v̄(x) = 2α(1 - x) - (1 - 2x/3)·√(2 - 2x)`.
    pub fn reduced(&self, x: f64) -> f64 {
        2.0 * self.alpha * (1.0 - x) - (1.0 - 2.0 * x / 3.0) * (2.0 - 2.0 * x).sqrt()
    }
}

impl Utility for PublicOption {
    fn value(&self, state: usize, profile: &[f64]) -> f64 {
        let z = [Self::action(low(profile, 0)), Self::action(low(profile, 1))];
        self.aggregate(state, &z)
    }

    fn describe(&self) -> String {
        format!("public_option(alpha={})", self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Utility for Constant {
    fn value(&self, _state: usize, _profile: &[f64]) -> f64 {
        self.0
    }

    fn describe(&self) -> String {
        format!("constant({})", self.0)
    }
}

/// Named builtin with its parameters, as accepted by problem files.
#[derive(Clone, PartialEq)]
pub enum Builtin {
    Polarization(Polarization),
    Retailer,
    RetailerProfit,
    Morale,
    Duopoly(Duopoly),
    Discord,
    PublicOption(PublicOption),
    Constant(f64),
}

impl fmt::Debug for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.utility().describe())
    }
}

impl Builtin {
    pub fn utility(&self) -> Arc<dyn Utility> {
        match self {
            Builtin::Polarization(u) => Arc::new(*u),
            Builtin::Retailer => Arc::new(Retailer),
            Builtin::RetailerProfit => Arc::new(RetailerProfit),
            Builtin::Morale => Arc::new(Morale),
            Builtin::Duopoly(u) => Arc::new(*u),
            Builtin::Discord => Arc::new(Discord),
            Builtin::PublicOption(u) => Arc::new(*u),
            Builtin::Constant(c) => Arc::new(Constant(*c)),
        }
    }

    /// Nonzero in a single state only.
    pub fn one_state(&self) -> Option<usize> {
        match self {
            Builtin::Morale | Builtin::Duopoly(_) => Some(LOW),
            _ => None,
        }
    }
}
