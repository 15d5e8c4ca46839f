//! Closed-form description of the metric-functional compactification of
//! `Z^d` with the standard generators, and lifts of its boundary points
//! through a quotient map onto a max-combination metric.
//!
//! Every functional of the compactification is
//! `h_alpha(z) = sum_j h_{alpha_j}(z_j)` with coordinates `alpha_j` in
//! `Z u {-oo, +oo}`, where `h_a(z) = |a - z| - |a|` for finite `a`, `-z`
//! at `+oo` and `z` at `-oo`. The lattice acts by coordinate translation
//! (infinities absorb). This module is the exact oracle the scan and orbit
//! machinery is checked against.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{lift_zd_values, Provenance, RestrictedFunctional};
use crate::groups::{MarkedGroup, QuotientMap};
use crate::metrics::{banach_combine, BallStore, MetricSpec};

/// One coordinate: an integer or one of the two infinities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ZdCoord {
    MinusInf,
    Finite(i64),
    PlusInf,
}

impl Serialize for ZdCoord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ZdCoord::Finite(a) => s.serialize_i64(*a),
            ZdCoord::PlusInf => s.serialize_str("+inf"),
            ZdCoord::MinusInf => s.serialize_str("-inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ZdCoord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match &v {
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(ZdCoord::Finite)
                .ok_or_else(|| serde::de::Error::custom("coordinate out of i64 range")),
            serde_json::Value::String(s) if s == "+inf" || s == "inf" => Ok(ZdCoord::PlusInf),
            serde_json::Value::String(s) if s == "-inf" => Ok(ZdCoord::MinusInf),
            _ => Err(serde::de::Error::custom("coordinate must be an integer, \"+inf\" or \"-inf\"")),
        }
    }
}

/// A functional `h_alpha` of the compactification of `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZdFunctional(pub Vec<ZdCoord>);

/// Position of a functional relative to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZdClass {
    /// All coordinates finite: `h_alpha = b_alpha`, an interior point.
    Interior,
    /// Some coordinate infinite: a boundary point.
    Boundary,
    /// All coordinates infinite: a boundary point fixed by the action.
    BoundaryFixed,
}

impl ZdFunctional {
    pub fn all_plus_inf(dim: usize) -> ZdFunctional {
        ZdFunctional(vec![ZdCoord::PlusInf; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn token(&self) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|c| match c {
                ZdCoord::Finite(a) => a.to_string(),
                ZdCoord::PlusInf => "+inf".into(),
                ZdCoord::MinusInf => "-inf".into(),
            })
            .collect();
        format!("[{}]", parts.join(","))
    }
}

impl fmt::Display for ZdFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token())
    }
}

/// `h_alpha(z)`, exactly.
pub fn eval(alpha: &ZdFunctional, z: &[i64]) -> Result<i64> {
    if alpha.dim() != z.len() {
        return Err(Error::DimensionMismatch { expected: alpha.dim(), got: z.len() });
    }
    let mut sum = 0i64;
    for (c, &zj) in alpha.0.iter().zip(z) {
        sum += match c {
            ZdCoord::Finite(a) => (a - zj).abs() - a.abs(),
            ZdCoord::PlusInf => -zj,
            ZdCoord::MinusInf => zj,
        };
    }
    Ok(sum)
}

/// The action `z.h_alpha = h_{alpha + z}`, with infinities absorbing.
pub fn zd_act(z: &[i64], alpha: &ZdFunctional) -> Result<ZdFunctional> {
    if alpha.dim() != z.len() {
        return Err(Error::DimensionMismatch { expected: alpha.dim(), got: z.len() });
    }
    Ok(ZdFunctional(
        alpha
            .0
            .iter()
            .zip(z)
            .map(|(c, &zj)| match c {
                ZdCoord::Finite(a) => ZdCoord::Finite(a + zj),
                inf => *inf,
            })
            .collect(),
    ))
}

pub fn classify(alpha: &ZdFunctional) -> ZdClass {
    let infinite = alpha
        .0
        .iter()
        .filter(|c| !matches!(c, ZdCoord::Finite(_)))
        .count();
    if infinite == 0 {
        ZdClass::Interior
    } else if infinite == alpha.dim() {
        ZdClass::BoundaryFixed
    } else {
        ZdClass::Boundary
    }
}

/// Restriction of `h_alpha` to the standard-metric ball of radius `r`,
/// with closed-form provenance.
pub fn restrict(
    store: &BallStore,
    group: &Arc<MarkedGroup>,
    alpha: &ZdFunctional,
    r: u64,
) -> Result<RestrictedFunctional> {
    let dim = group
        .lattice_dim()
        .filter(|_| group.has_standard_marking())
        .ok_or_else(|| {
            Error::HypothesisViolation(
                "closed-form functionals live on Z^d with the standard marking".into(),
            )
        })?;
    if dim != alpha.dim() {
        return Err(Error::DimensionMismatch { expected: dim, got: alpha.dim() });
    }
    let metric = MetricSpec::word(group.clone());
    let ball = store.ball(&metric, r)?;
    let mut values = Vec::with_capacity(ball.len());
    for (z, _) in ball.iter() {
        values.push(eval(alpha, z.as_abelian()?)?);
    }
    RestrictedFunctional::from_values(&metric, ball, values, Provenance::ZdClosed(alpha.clone()))
}

/// Lift `f = m * h_alpha o pi` of a boundary functional through the
/// quotient, restricted to the ball of the max-combination metric
/// `D = max(d_G, m * d_H o pi)`. Returns the metric and the functional.
pub fn lift_functional(
    store: &BallStore,
    quotient: &Arc<QuotientMap>,
    alpha: &ZdFunctional,
    m: u64,
    r: u64,
) -> Result<(Arc<MetricSpec>, RestrictedFunctional)> {
    let target = quotient.target();
    let dim = target
        .lattice_dim()
        .filter(|_| target.has_standard_marking())
        .ok_or_else(|| {
            Error::HypothesisViolation(
                "the closed-form lift needs a standard-marked Z^d target".into(),
            )
        })?;
    if dim != alpha.dim() {
        return Err(Error::DimensionMismatch { expected: dim, got: alpha.dim() });
    }
    if classify(alpha) == ZdClass::Interior {
        return Err(Error::HypothesisViolation(
            "only boundary functionals lift to the boundary".into(),
        ));
    }
    let d_g = MetricSpec::word(quotient.source().clone());
    let d_h = MetricSpec::word(target.clone());
    let metric = banach_combine(store, d_g, quotient.clone(), d_h, m)?;
    let f = lift_zd_values(store, &metric, alpha, r)?;
    Ok((metric, f))
}
