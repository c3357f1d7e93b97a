//! Exponential-polynomial counterfactual potentials.
//!
//! A potential scores a model output `y` relative to the query output
//! `center`: with `z = (y - center) / width`, the one-sided forms are
//! `[z]_+^2 exp(-[z]_+^2)` and `[z]_-^2 exp(-[z]_-^2)`, and the symmetric form
//! is their sum. Every potential vanishes at the query output and peaks at
//! `e^-1` when `|z| = 1`.
//!
//! Superlevel sets `{y : rho(y) >= level}` are bounded by the two real roots of
//! `z^2 exp(-z^2) = level`, `r_k = sqrt(-W_k(-level))` for `k in {0, -1}`.

mod lambert;

pub use lambert::{lambert_w, Branch, INV_E};

use serde::{Deserialize, Serialize};

use crate::error::{CfxError, Result};

/// Levels below this are treated as the zero superlevel set.
pub const ZERO_LEVEL: f64 = 1e-300;

/// Beyond this `z^2` the exponential underflows and the potential is zero.
const Z2_CUTOFF: f64 = 1500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    /// Rewards outputs above the query output only.
    AepPlus,
    /// Rewards outputs below the query output only.
    AepMinus,
    /// Rewards moves in either direction.
    Sep,
}

impl PotentialKind {
    pub fn has_upper(self) -> bool {
        matches!(self, PotentialKind::AepPlus | PotentialKind::Sep)
    }

    pub fn has_lower(self) -> bool {
        matches!(self, PotentialKind::AepMinus | PotentialKind::Sep)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// Model output at the query, `f(q)`.
    pub center: f64,
    pub width: f64,
}

impl PotentialSpec {
    pub fn new(kind: PotentialKind, center: f64, width: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(CfxError::InvalidParameter(format!(
                "potential width must be positive and finite, got {width}"
            )));
        }
        if !center.is_finite() {
            return Err(CfxError::InvalidParameter(format!(
                "potential center must be finite, got {center}"
            )));
        }
        Ok(Self {
            kind,
            center,
            width,
        })
    }

    pub fn sep(center: f64, width: f64) -> Result<Self> {
        Self::new(PotentialKind::Sep, center, width)
    }

    pub fn aep_plus(center: f64, width: f64) -> Result<Self> {
        Self::new(PotentialKind::AepPlus, center, width)
    }

    pub fn aep_minus(center: f64, width: f64) -> Result<Self> {
        Self::new(PotentialKind::AepMinus, center, width)
    }

    /// Same center and width, different kind.
    pub fn with_kind(self, kind: PotentialKind) -> Self {
        Self { kind, ..self }
    }

    pub fn z(&self, y: f64) -> f64 {
        (y - self.center) / self.width
    }

    fn active(&self, z: f64) -> bool {
        (z > 0.0 && self.kind.has_upper()) || (z < 0.0 && self.kind.has_lower())
    }

    /// `rho(y)`.
    pub fn value(&self, y: f64) -> f64 {
        let z = self.z(y);
        if !self.active(z) {
            return 0.0;
        }
        let z2 = z * z;
        if z2 > Z2_CUTOFF {
            return 0.0;
        }
        z2 * (-z2).exp()
    }

    /// `d rho / d y`.
    pub fn derivative(&self, y: f64) -> f64 {
        let z = self.z(y);
        if !self.active(z) {
            return 0.0;
        }
        let z2 = z * z;
        if z2 > Z2_CUTOFF {
            return 0.0;
        }
        2.0 * z * (1.0 - z2) * (-z2).exp() / self.width
    }

    /// Outputs at which the potential attains its maximum `e^-1`.
    pub fn maximizers(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2);
        if self.kind.has_lower() {
            out.push(self.center - self.width);
        }
        if self.kind.has_upper() {
            out.push(self.center + self.width);
        }
        out
    }
}

/// `rho(y)` for the given potential.
pub fn ep_value(spec: &PotentialSpec, y: f64) -> f64 {
    spec.value(y)
}

/// Roots `(r_0, r_{-1})` of `r^2 exp(-r^2) = level` with `0 <= r_0 <= 1 <= r_{-1}`.
///
/// Accepts `level` in `[0, e^-1]`; levels under [`ZERO_LEVEL`] give `(0, inf)`.
pub fn level_radii(level: f64) -> Result<(f64, f64)> {
    if level.is_nan() || !(0.0..=INV_E * (1.0 + 1e-14)).contains(&level) {
        return Err(CfxError::Domain {
            what: "superlevel",
            value: level,
        });
    }
    if level < ZERO_LEVEL {
        return Ok((0.0, f64::INFINITY));
    }
    let c = -level.min(INV_E);
    let inner = (-lambert_w(Branch::K0, c)?).max(0.0).sqrt().min(1.0);
    let outer = (-lambert_w(Branch::KM1, c)?).sqrt().max(1.0);
    Ok((inner, outer))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperlevelSet {
    /// Disjoint closed intervals in output units, sorted ascending.
    pub intervals: Vec<(f64, f64)>,
    pub level: f64,
}

impl SuperlevelSet {
    pub fn contains(&self, y: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= y && y <= hi)
    }
}

/// The superlevel set `{y : rho(y) >= level}` for `level` in `(0, e^-1]`.
pub fn superlevel_roots(spec: &PotentialSpec, level: f64) -> Result<SuperlevelSet> {
    if !(level > 0.0) {
        return Err(CfxError::Domain {
            what: "superlevel",
            value: level,
        });
    }
    let (inner, outer) = level_radii(level)?;
    let (c, w) = (spec.center, spec.width);
    let mut intervals = Vec::with_capacity(2);
    if spec.kind.has_lower() {
        intervals.push((c - w * outer, c - w * inner));
    }
    if spec.kind.has_upper() {
        intervals.push((c + w * inner, c + w * outer));
    }
    Ok(SuperlevelSet { intervals, level })
}

/// Membership of `y` in the `eps`-optimal target set for best potential `rho_star`.
pub fn target_membership(spec: &PotentialSpec, rho_star: f64, eps: f64, y: f64) -> bool {
    spec.value(y) >= (1.0 - eps) * rho_star
}
