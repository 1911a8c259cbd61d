use crate::error::{Error, Result};
use crate::geometry::unit_ball_volume;
use crate::math::{exp, ln, powf, powi, sqrt};

/// Closed-form constants for dimension `d`, `M` points and uniform-geometry
/// constant `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TheoryConstants {
    pub d: usize,
    pub m: usize,
    pub c: f64,
    /// `1 - 4^{1-d}/M`, the per-step contraction of `E F`.
    pub gamma: f64,
    /// `4^{-d}/(4M)`; the drift of `log F` is at most minus this.
    pub drift_bound: f64,
    /// `4^{-d}`, lower bound on the probability of a definite drop of `F`.
    pub prob_bound: f64,
    /// `1/(4M)`, the relative size of that drop.
    pub drop_factor: f64,
    /// `(c/2M)^{1/d} / (2M)`
    pub big_c: f64,
    /// `max(1/C, (1/d) log(M^{d+2} 4^{d+1} / (c d)))`
    pub rho1: f64,
    /// `M e^{-ρ1} / (2(M-1))`
    pub rho2: f64,
    /// `1/(4M)`
    pub gamma1: f64,
    /// `(M-1)^d / (2^{d+1} (M+1)^d)`
    pub gamma2: f64,
    /// `2 d^{3/2} V(d-1) ((M+1)/(M-1))^{d-1} / (c V(d))`, read off the
    /// boundary-drift estimate.
    pub c1: f64,
    /// `n0(1/2)`
    pub n0_half: u64,
}

/// Explicit trio `(α, γ, n1)` and the probability `ε` of the boundary-escape
/// estimate, for given `δ` and `Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EscapeConstants {
    pub alpha: f64,
    pub gamma: f64,
    pub n1: u64,
    /// `(α M sqrt(M-1) / (M+1))^{d n1}`; underflows for most inputs.
    pub eps: f64,
    pub log_eps: f64,
}

pub fn compute_constants(d: usize, m: usize, c: f64) -> Result<TheoryConstants> {
    if d == 0 {
        return Err(Error::InvalidParameter("d must be at least 1"));
    }
    if m < 2 {
        return Err(Error::TooFewPoints(m));
    }
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::InvalidParameter("c must lie in (0, 1]"));
    }
    let (df, mf) = (d as f64, m as f64);
    let di = d as i32;
    let gamma = 1.0 - powi(4.0, 1 - di) / mf;
    let big_c = powf(c / (2.0 * mf), 1.0 / df) / (2.0 * mf);
    let rho1 = f64::max(
        1.0 / big_c,
        (ln(mf) * (df + 2.0) + ln(4.0) * (df + 1.0) - ln(c * df)) / df,
    );
    let ratio = (mf + 1.0) / (mf - 1.0);
    let consts = TheoryConstants {
        d,
        m,
        c,
        gamma,
        drift_bound: powi(4.0, -di) / (4.0 * mf),
        prob_bound: powi(4.0, -di),
        drop_factor: 1.0 / (4.0 * mf),
        big_c,
        rho1,
        rho2: mf * exp(-rho1) / (2.0 * (mf - 1.0)),
        gamma1: 1.0 / (4.0 * mf),
        gamma2: powi(mf - 1.0, di) / (powi(2.0, di + 1) * powi(mf + 1.0, di)),
        c1: 2.0 * powf(df, 1.5) * unit_ball_volume(d - 1) * powi(ratio, di - 1) / (c * unit_ball_volume(d)),
        n0_half: 0,
    };
    Ok(TheoryConstants {
        n0_half: consts.n0(0.5)?,
        ..consts
    })
}

impl TheoryConstants {
    /// `n0(ε) = ⌈2 log_γ(ε (1 - sqrt γ))⌉`
    pub fn n0(&self, eps: f64) -> Result<u64> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter("epsilon must lie in (0, 1)"));
        }
        let v = 2.0 * ln(eps * (1.0 - sqrt(self.gamma))) / ln(self.gamma);
        Ok(libm::ceil(v) as u64)
    }

    /// `(2/(M sqrt(M-1))) (n0(ε) + 1/(1 - γ^{1/4}))`
    pub fn tightness_radius_coeff(&self, eps: f64) -> Result<f64> {
        let mf = self.m as f64;
        let n0 = self.n0(eps)? as f64;
        Ok(2.0 / (mf * sqrt(mf - 1.0)) * (n0 + 1.0 / (1.0 - powf(self.gamma, 0.25))))
    }

    /// `δ = 1/(8 c1 M² 4^d)`, the threshold above which `g` drifts down.
    pub fn g_delta(&self) -> f64 {
        let mf = self.m as f64;
        1.0 / (8.0 * self.c1 * mf * mf * powi(4.0, self.d as i32))
    }

    pub fn escape_constants(&self, delta: f64, big_delta: f64) -> Result<EscapeConstants> {
        if !(delta > 0.0 && big_delta > 0.0 && delta.is_finite() && big_delta.is_finite()) {
            return Err(Error::InvalidParameter("delta and Delta must be positive"));
        }
        let mf = self.m as f64;
        let alpha = f64::min((mf - 1.0) / (2.0 * mf * (mf + 1.0)), delta / (48.0 * (mf + 1.0)));
        let gamma = sqrt(1.0 - 1.0 / (12.0 * (mf + 1.0)));
        let n1 = libm::ceil(ln(delta / (2.0 * big_delta)) / ln(gamma)).max(0.0) as u64;
        let log_eps = (self.d as f64) * (n1 as f64) * ln(alpha * mf * sqrt(mf - 1.0) / (mf + 1.0));
        Ok(EscapeConstants {
            alpha,
            gamma,
            n1,
            eps: exp(log_eps),
            log_eps,
        })
    }
}
