//! Component failure laws.
//!
//! A component starts `ok` when brought on-line and eventually becomes `broken`,
//! after which it stays broken. The law governing when it breaks is a
//! [`HazardModel`]; everything in this module is derived from its cumulative
//! hazard `H(t)`, so that
//!
//! - `P(failed in [0, t]) = 1 - e^{-H(t)}`
//! - `P(failed in (t_ok, t] | ok at t_ok) = 1 - e^{-(H(t) - H(t_ok))}`
//!
//! Times are hours measured from the epoch of the physical unit (its
//! commissioning or its last replacement).

use serde::{Deserialize, Serialize};

use crate::error::{DiagnosisError, Result};
use crate::scalar::Scalar;

/// Converts a mean time between failures into a constant failure rate.
pub fn rate_from_mtbf<T: Scalar>(mtbf: T) -> Result<T> {
    if !(mtbf.is_finite() && mtbf > T::zero()) {
        return Err(DiagnosisError::invalid(
            "mtbf",
            format!("must be finite and > 0, got {mtbf}"),
        ));
    }
    Ok(mtbf.recip())
}

/// Failure-rate law of one component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum HazardModel<T = f64> {
    /// Memoryless law with hazard `c(t) = rate` (failures per hour).
    ConstantRate { rate: T },
    /// `H(t) = (t / scale)^shape`; `shape < 1` models wear-in, `shape > 1` wear-out.
    Weibull { shape: T, scale: T },
}

fn check_positive<T: Scalar>(name: &'static str, value: T) -> Result<()> {
    if value.is_finite() && value > T::zero() {
        Ok(())
    } else {
        Err(DiagnosisError::invalid(
            name,
            format!("must be finite and > 0, got {value}"),
        ))
    }
}

fn check_time<T: Scalar>(name: &'static str, t: T) -> Result<()> {
    if t.is_finite() && t >= T::zero() {
        Ok(())
    } else {
        Err(DiagnosisError::invalid(
            name,
            format!("must be finite and >= 0, got {t}"),
        ))
    }
}

impl<T: Scalar> HazardModel<T> {
    pub fn constant_rate(rate: T) -> Result<Self> {
        check_positive("rate", rate)?;
        Ok(HazardModel::ConstantRate { rate })
    }

    pub fn from_mtbf(mtbf: T) -> Result<Self> {
        Ok(HazardModel::ConstantRate {
            rate: rate_from_mtbf(mtbf)?,
        })
    }

    pub fn weibull(shape: T, scale: T) -> Result<Self> {
        check_positive("shape", shape)?;
        check_positive("scale", scale)?;
        Ok(HazardModel::Weibull { shape, scale })
    }

    /// Re-checks the parameter invariants (variants are public and may be
    /// built directly).
    pub fn validate(&self) -> Result<()> {
        match *self {
            HazardModel::ConstantRate { rate } => check_positive("rate", rate),
            HazardModel::Weibull { shape, scale } => {
                check_positive("shape", shape)?;
                check_positive("scale", scale)
            }
        }
    }

    /// Mean lifetime of a new unit.
    pub fn mtbf(&self) -> T {
        match *self {
            HazardModel::ConstantRate { rate } => rate.recip(),
            HazardModel::Weibull { shape, scale } => {
                let g = libm::tgamma(1.0 + shape.recip().as_f64());
                scale * T::from_f64(g)
            }
        }
    }

    /// Whether `f(t, t_ok)` depends only on `t - t_ok`.
    pub fn is_memoryless(&self) -> bool {
        match *self {
            HazardModel::ConstantRate { .. } => true,
            HazardModel::Weibull { shape, .. } => shape == T::one(),
        }
    }

    /// `H(t)`, the integral of the hazard over `[0, t]`.
    pub fn cumulative_hazard(&self, t: T) -> Result<T> {
        check_time("t", t)?;
        Ok(self.cumulative_hazard_unchecked(t))
    }

    fn cumulative_hazard_unchecked(&self, t: T) -> T {
        match *self {
            HazardModel::ConstantRate { rate } => rate * t,
            HazardModel::Weibull { shape, scale } => (t / scale).powf(shape),
        }
    }

    /// `H(t) - H(t_ok)` with the constant-rate case evaluated on the interval
    /// length directly.
    fn interval_hazard(&self, t_ok: T, t: T) -> T {
        match *self {
            HazardModel::ConstantRate { rate } => rate * (t - t_ok),
            HazardModel::Weibull { .. } => {
                let h = self.cumulative_hazard_unchecked(t) - self.cumulative_hazard_unchecked(t_ok);
                h.max(T::zero())
            }
        }
    }

    /// Probability that a unit known `ok` at `t_ok` has failed by `t`.
    pub fn conditional_failure_probability(&self, t_ok: T, t: T) -> Result<T> {
        check_time("t_ok", t_ok)?;
        check_time("t", t)?;
        if t < t_ok {
            return Err(DiagnosisError::invalid(
                "t",
                format!("must not precede t_ok ({t} < {t_ok})"),
            ));
        }
        Ok(T::one_minus_exp_neg(self.interval_hazard(t_ok, t)))
    }

    /// Mode persistence of one component over `[t1, t2]`.
    pub fn transition_matrix(&self, t1: T, t2: T) -> Result<TransitionMatrix<T>> {
        let p_fail = self.conditional_failure_probability(t1, t2)?;
        let survive = (-self.interval_hazard(t1, t2)).exp();
        Ok(TransitionMatrix {
            p_ok_ok: survive,
            p_ok_broken: p_fail,
            p_broken_ok: T::zero(),
            p_broken_broken: T::one(),
        })
    }
}

/// Free-function form of [`HazardModel::cumulative_hazard`].
pub fn cumulative_hazard<T: Scalar>(model: &HazardModel<T>, t: T) -> Result<T> {
    model.cumulative_hazard(t)
}

/// Free-function form of [`HazardModel::conditional_failure_probability`].
pub fn conditional_failure_probability<T: Scalar>(model: &HazardModel<T>, t_ok: T, t: T) -> Result<T> {
    model.conditional_failure_probability(t_ok, t)
}

/// Free-function form of [`HazardModel::transition_matrix`].
pub fn transition_matrix<T: Scalar>(model: &HazardModel<T>, t1: T, t2: T) -> Result<TransitionMatrix<T>> {
    model.transition_matrix(t1, t2)
}

/// `P(mode at t2 | mode at t1)` for one component. Broken is absorbing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix<T = f64> {
    pub p_ok_ok: T,
    pub p_ok_broken: T,
    pub p_broken_ok: T,
    pub p_broken_broken: T,
}

impl<T: Scalar> TransitionMatrix<T> {
    pub fn identity() -> Self {
        TransitionMatrix {
            p_ok_ok: T::one(),
            p_ok_broken: T::zero(),
            p_broken_ok: T::zero(),
            p_broken_broken: T::one(),
        }
    }

    /// Transition over `[a, c]` from transitions over `[a, b]` (`self`) and `[b, c]`.
    pub fn then(&self, next: &Self) -> Self {
        TransitionMatrix {
            p_ok_ok: self.p_ok_ok * next.p_ok_ok + self.p_ok_broken * next.p_broken_ok,
            p_ok_broken: self.p_ok_ok * next.p_ok_broken + self.p_ok_broken * next.p_broken_broken,
            p_broken_ok: self.p_broken_ok * next.p_ok_ok + self.p_broken_broken * next.p_broken_ok,
            p_broken_broken: self.p_broken_ok * next.p_ok_broken + self.p_broken_broken * next.p_broken_broken,
        }
    }

    /// Row-major `[from][to]` with index 0 = ok, 1 = broken.
    pub fn as_array(&self) -> [[T; 2]; 2] {
        [
            [self.p_ok_ok, self.p_ok_broken],
            [self.p_broken_ok, self.p_broken_broken],
        ]
    }
}
