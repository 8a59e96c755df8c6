//! Penalty families and their exact one-dimensional minimizers.
//!
//! Penalties are on the per-observation scale: the objective is
//! `(1/(2n)) ||y - X b||^2 + sum_j P(|b_j|)`.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Lasso,
    Enet,
    AdaLasso,
    Scad,
    Mcp,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Lasso => "lasso",
            Family::Enet => "enet",
            Family::AdaLasso => "adalasso",
            Family::Scad => "scad",
            Family::Mcp => "mcp",
        }
    }

    pub fn is_nonconvex(self) -> bool {
        matches!(self, Family::Scad | Family::Mcp)
    }

    /// Conventional gamma for the nonconvex families.
    pub fn default_gamma(self) -> Option<f64> {
        match self {
            Family::Scad => Some(3.7),
            Family::Mcp => Some(3.0),
            _ => None,
        }
    }
}

/// A penalty with its tuning values.
///
/// `lambda1` is the level that regularization paths sweep. For the elastic
/// net, `tie_lambda2` makes the ridge level track `lambda1` along a path.
/// Adaptive-lasso weights may be `+inf`, which pins that coefficient at zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PenaltySpec {
    pub family: Family,
    pub lambda1: f64,
    pub lambda2: f64,
    pub tie_lambda2: bool,
    pub gamma: f64,
    pub weights: Option<Vec<f64>>,
}

impl PenaltySpec {
    fn base(family: Family, lambda1: f64) -> Self {
        PenaltySpec {
            family,
            lambda1,
            lambda2: 0.0,
            tie_lambda2: false,
            gamma: family.default_gamma().unwrap_or(0.0),
            weights: None,
        }
    }

    pub fn lasso(lambda: f64) -> Self {
        Self::base(Family::Lasso, lambda)
    }

    pub fn enet(lambda1: f64, lambda2: f64) -> Self {
        PenaltySpec { lambda2, ..Self::base(Family::Enet, lambda1) }
    }

    /// Elastic net with `lambda2 = lambda1` at every point of a path.
    pub fn enet_tied(lambda: f64) -> Self {
        PenaltySpec { lambda2: lambda, tie_lambda2: true, ..Self::base(Family::Enet, lambda) }
    }

    pub fn adaptive(lambda: f64, weights: Vec<f64>) -> Self {
        PenaltySpec { weights: Some(weights), ..Self::base(Family::AdaLasso, lambda) }
    }

    pub fn scad(lambda: f64, gamma: f64) -> Self {
        PenaltySpec { gamma, ..Self::base(Family::Scad, lambda) }
    }

    pub fn mcp(lambda: f64, gamma: f64) -> Self {
        PenaltySpec { gamma, ..Self::base(Family::Mcp, lambda) }
    }

    /// The same penalty at another level of `lambda1`.
    pub fn at_lambda(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.lambda1 = lambda;
        if self.tie_lambda2 {
            out.lambda2 = lambda;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda1 must be >= 0, got {}", self.lambda1)));
        }
        match self.family {
            Family::Scad if !(self.gamma > 2.0) => {
                Err(Error::InvalidGamma { family: "scad", gamma: self.gamma })
            }
            Family::Mcp if !(self.gamma > 1.0) => {
                Err(Error::InvalidGamma { family: "mcp", gamma: self.gamma })
            }
            Family::Enet if !(self.lambda2 >= 0.0) => Err(Error::InvalidParameter(format!(
                "lambda2 must be >= 0, got {}",
                self.lambda2
            ))),
            Family::AdaLasso => match &self.weights {
                Some(w) if w.iter().all(|v| *v > 0.0) => Ok(()),
                _ => Err(Error::InvalidParameter("adaptive weights must be positive".into())),
            },
            _ => Ok(()),
        }
    }

    /// Weight of coordinate `j` (1 unless adaptive).
    pub fn weight(&self, j: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[j])
    }

    pub(crate) fn coord(&self, j: usize) -> CoordPenalty {
        match self.family {
            Family::Lasso => CoordPenalty::L1 { t: self.lambda1 },
            Family::AdaLasso => CoordPenalty::L1 { t: self.lambda1 * self.weight(j) },
            Family::Enet => CoordPenalty::L1L2 { t: self.lambda1, l2: self.lambda2 },
            Family::Scad => CoordPenalty::Scad { lambda: self.lambda1, gamma: self.gamma },
            Family::Mcp => CoordPenalty::Mcp { lambda: self.lambda1, gamma: self.gamma },
        }
    }

    /// Total penalty `sum_j P(|b_j|)`.
    pub fn total(&self, beta: &[f64]) -> f64 {
        beta.iter().enumerate().map(|(j, b)| self.coord(j).value(b.abs())).sum()
    }
}

/// Penalty acting on a single coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum CoordPenalty {
    L1 { t: f64 },
    L1L2 { t: f64, l2: f64 },
    Scad { lambda: f64, gamma: f64 },
    Mcp { lambda: f64, gamma: f64 },
}

impl CoordPenalty {
    /// `P(t)` for `t >= 0`.
    pub(crate) fn value(self, t: f64) -> f64 {
        match self {
            CoordPenalty::L1 { t: lam } => {
                if t == 0.0 {
                    0.0
                } else {
                    lam * t
                }
            }
            CoordPenalty::L1L2 { t: lam, l2 } => lam * t + 0.5 * l2 * t * t,
            CoordPenalty::Scad { lambda, gamma } => scad_value(t, lambda, gamma),
            CoordPenalty::Mcp { lambda, gamma } => mcp_value(t, lambda, gamma),
        }
    }

    /// Minimizer of `(d/2) b^2 - z b + P(|b|)`, i.e. of `(d/2)(b - z/d)^2 + P(|b|)`.
    pub(crate) fn minimize(self, z: f64, d: f64) -> f64 {
        match self {
            CoordPenalty::L1 { t } => soft_threshold(z, t) / d,
            CoordPenalty::L1L2 { t, l2 } => soft_threshold(z, t) / (d + l2),
            _ => {
                let b = self.minimize_magnitude(z.abs(), d);
                if z < 0.0 {
                    -b
                } else {
                    b
                }
            }
        }
    }

    /// Nonnegative minimizer of `f(b) = (d/2) b^2 - a b + P(b)` for `a >= 0`.
    ///
    /// Each piece of the penalty is quadratic, so the minimum is either the
    /// clamped stationary point of a convex piece or a breakpoint. All
    /// candidates are scored and the best kept; ties go to the smaller value.
    fn minimize_magnitude(self, a: f64, d: f64) -> f64 {
        let f = |b: f64| 0.5 * d * b * b - a * b + self.value(b);
        let mut best = 0.0;
        let mut best_f = 0.0;
        let mut consider = |b: f64| {
            if b.is_finite() && b > 0.0 {
                let fb = f(b);
                if fb < best_f || (fb == best_f && b < best) {
                    best = b;
                    best_f = fb;
                }
            }
        };
        match self {
            CoordPenalty::Scad { lambda, gamma } => {
                let (lo, hi) = (lambda, gamma * lambda);
                consider(((a - lambda) / d).clamp(0.0, lo));
                let curv = d - 1.0 / (gamma - 1.0);
                if curv > 0.0 {
                    consider(((a - hi / (gamma - 1.0)) / curv).clamp(lo, hi));
                }
                consider(lo);
                consider(hi);
                consider((a / d).max(hi));
            }
            CoordPenalty::Mcp { lambda, gamma } => {
                let hi = gamma * lambda;
                let curv = d - 1.0 / gamma;
                if curv > 0.0 {
                    consider(((a - lambda) / curv).clamp(0.0, hi));
                }
                consider(hi);
                consider((a / d).max(hi));
            }
            CoordPenalty::L1 { t } => consider(((a - t) / d).max(0.0)),
            CoordPenalty::L1L2 { t, l2 } => consider(((a - t) / (d + l2)).max(0.0)),
        }
        best
    }
}

/// `sign(z) max(|z| - t, 0)`.
#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// SCAD penalty value at `t >= 0`.
pub fn scad_value(t: f64, lambda: f64, gamma: f64) -> f64 {
    if t <= lambda {
        lambda * t
    } else if t <= gamma * lambda {
        (2.0 * gamma * lambda * t - t * t - lambda * lambda) / (2.0 * (gamma - 1.0))
    } else {
        0.5 * lambda * lambda * (gamma + 1.0)
    }
}

/// SCAD derivative `lambda { I(t <= lambda) + (gamma lambda - t)_+ / ((gamma - 1) lambda) I(t > lambda) }`.
pub fn scad_derivative(t: f64, lambda: f64, gamma: f64) -> f64 {
    if t <= lambda {
        lambda
    } else {
        (gamma * lambda - t).max(0.0) / (gamma - 1.0)
    }
}

/// MCP penalty value at `t >= 0`.
pub fn mcp_value(t: f64, lambda: f64, gamma: f64) -> f64 {
    if t <= gamma * lambda {
        lambda * t - t * t / (2.0 * gamma)
    } else {
        0.5 * gamma * lambda * lambda
    }
}

/// MCP derivative `(lambda - t/gamma)_+`.
pub fn mcp_derivative(t: f64, lambda: f64, gamma: f64) -> f64 {
    (lambda - t / gamma).max(0.0)
}

/// Global minimizer of `(d/2)(b - z/d)^2 + P(|b|)` for the given penalty.
pub fn univariate_penalized_min(z: f64, d: f64, spec: &PenaltySpec) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::InvalidParameter(format!("curvature d must be positive, got {d}")));
    }
    if spec.family == Family::AdaLasso {
        // single-coordinate use: only the first weight matters
        if !spec.weights.as_ref().is_some_and(|w| !w.is_empty() && w[0] > 0.0) {
            return Err(Error::InvalidParameter("adaptive weights must be positive".into()));
        }
    }
    spec.validate()?;
    Ok(spec.coord(0).minimize(z, d))
}
