//! Jumping numbers, vanishing staircases and multiplier-ideal membership
//! for the model singular weights.
//!
//! Everything that decides a boundary (jump locations, floors, strict
//! inequalities) runs in exact rational arithmetic. [`MembershipOracle`]
//! is an independent numerical check that integrates `|z^β|² e^{-mψ}` over
//! shells approaching the singular locus and reads off the decay rate.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomial::MultiIndex;
use crate::quadrature::{Cut, QuadratureRule, RadialCloud, Region, SingularHint};
use crate::weights::{LevelFunction, ModelFamily, SingularWeight};

pub type Q = Rational64;

/// Parses `"3/2"`, `"-1"` or `"0.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Q> {
    let t = text.trim();
    let bad = || Error::Config(format!("not a rational number: {text:?}"));
    if let Some((num, den)) = t.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|_| bad())?;
        let d: i64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        let neg = int.starts_with('-');
        let i: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let den = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().map_err(|_| bad())?;
        let mag = Q::new(i.abs() * den + f, den);
        return Ok(if neg { -mag } else { mag });
    }
    t.parse::<i64>().map(Q::from_integer).map_err(|_| bad())
}

/// `max(⌊x⌋, 0)`.
pub fn floor_plus(x: Q) -> i64 {
    let f = x.numer().div_floor(x.denom());
    f.max(0)
}

pub fn to_f64(q: Q) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `(numerator, denominator)` pair for reports.
pub fn rational_pair(q: Q) -> (i64, i64) {
    (*q.numer(), *q.denom())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DivisorTag {
    /// Strict transform of the hyperplane `{z_i = 0}`.
    Coordinate(usize),
    /// Exceptional divisor of the blow-up of the origin.
    Exceptional,
}

/// One prime divisor of a log resolution: `a` is the vanishing order of the
/// pulled-back ideal, `b` the vanishing order of the Jacobian.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Divisor {
    pub a: u32,
    pub b: u32,
    pub tag: DivisorTag,
}

impl Divisor {
    /// Vanishing order of the pullback of `z^β` along this divisor.
    pub fn order_of(&self, beta: &MultiIndex) -> u32 {
        match self.tag {
            DivisorTag::Coordinate(i) => beta.get(i),
            DivisorTag::Exceptional => beta.degree(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolutionData {
    pub c: Q,
    pub divisors: Vec<Divisor>,
}

impl ResolutionData {
    pub fn new(c: Q, divisors: Vec<Divisor>) -> Result<Self> {
        if c <= Q::zero() {
            return Err(Error::Config("log coefficient c must be positive".into()));
        }
        if divisors.is_empty() {
            return Err(Error::Config("resolution needs at least one divisor".into()));
        }
        if divisors.iter().any(|d| d.a == 0) {
            return Err(Error::Config("divisor multiplicities a_k must be at least 1".into()));
        }
        Ok(ResolutionData { c, divisors })
    }

    /// `ψ = c log|z^a|²`: the identity is already a log resolution.
    pub fn principal(c: Q, a: &MultiIndex) -> Result<Self> {
        let divisors =
            a.0.iter()
                .enumerate()
                .filter(|(_, &ai)| ai > 0)
                .map(|(i, &ai)| Divisor {
                    a: ai,
                    b: 0,
                    tag: DivisorTag::Coordinate(i),
                })
                .collect();
        Self::new(c, divisors)
    }

    /// `ψ = c log Σ|z_i|^{2d}` on `ℂⁿ`: one blow-up of the origin.
    pub fn maximal_ideal_power(c: Q, n: usize, d: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config("maximal-ideal family needs dimension at least 2".into()));
        }
        Self::new(
            c,
            vec![Divisor {
                a: d,
                b: n as u32 - 1,
                tag: DivisorTag::Exceptional,
            }],
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub m: Q,
    /// Indices into `ResolutionData::divisors` realizing this jump.
    pub divisors: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JumpSpectrum {
    pub jumps: Vec<Jump>,
}

impl JumpSpectrum {
    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    /// `m_p` for `p ≥ 1`.
    pub fn jump(&self, p: usize) -> Option<&Jump> {
        if p == 0 {
            None
        } else {
            self.jumps.get(p - 1)
        }
    }

    /// `m_{p-1}`, with `m_0 = 0`.
    pub fn previous(&self, p: usize) -> Q {
        if p <= 1 {
            Q::zero()
        } else {
            self.jumps[p - 2].m
        }
    }

    pub fn contains(&self, m: Q) -> bool {
        self.jumps.iter().any(|j| j.m == m)
    }

    pub fn values(&self) -> Vec<Q> {
        self.jumps.iter().map(|j| j.m).collect()
    }
}

/// All `m = (b_k + M)/(c a_k) ≤ m_max` with `M ≥ 1`, merged over divisors.
pub fn jumping_numbers(res: &ResolutionData, m_max: Q) -> JumpSpectrum {
    let mut merged: BTreeMap<Q, Vec<usize>> = BTreeMap::new();
    if m_max <= Q::zero() {
        return JumpSpectrum::default();
    }
    for (k, d) in res.divisors.iter().enumerate() {
        let denom = res.c * Q::from_integer(d.a as i64);
        let mut big_m = 1i64;
        loop {
            let m = Q::from_integer(d.b as i64 + big_m) / denom;
            if m > m_max {
                break;
            }
            merged.entry(m).or_default().push(k);
            big_m += 1;
        }
    }
    JumpSpectrum {
        jumps: merged.into_iter().map(|(m, divisors)| Jump { m, divisors }).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Staircase {
    pub m: Q,
    /// `s_k(m) = ⌊m c a_k − b_k⌋₊` per divisor.
    pub orders: Vec<u32>,
}

pub fn staircase_orders(res: &ResolutionData, m: Q) -> Staircase {
    let orders = res
        .divisors
        .iter()
        .map(|d| floor_plus(m * res.c * Q::from_integer(d.a as i64) - Q::from_integer(d.b as i64)) as u32)
        .collect();
    Staircase { m, orders }
}

/// `m c a_k − b_k`, the exact (unfloored) staircase height.
pub fn staircase_height(res: &ResolutionData, k: usize, m: Q) -> Q {
    let d = &res.divisors[k];
    m * res.c * Q::from_integer(d.a as i64) - Q::from_integer(d.b as i64)
}

/// Membership read off the staircase: `ord_k(z^β) ≥ s_k(m)` for every divisor.
pub fn member_by_staircase(res: &ResolutionData, beta: &MultiIndex, m: Q) -> bool {
    let st = staircase_orders(res, m);
    res.divisors.iter().zip(&st.orders).all(|(d, &s)| d.order_of(beta) >= s)
}

/// Whether `z^β ∈ 𝓘(mψ)` for a model singular weight.
pub fn ideal_membership(beta: &MultiIndex, m: Q, psi: &SingularWeight) -> Result<bool> {
    if beta.dim() != psi.dimension() {
        return Err(Error::Config(format!(
            "exponent {beta} has the wrong dimension for a weight on C^{}",
            psi.dimension()
        )));
    }
    let c = psi.c();
    match psi.family() {
        ModelFamily::PrincipalMonomial => {
            let a = &psi.generators()[0];
            Ok((0..beta.dim())
                .all(|k| Q::from_integer(beta.get(k) as i64 + 1) > m * c * Q::from_integer(a.get(k) as i64)))
        }
        ModelFamily::MaximalIdealPower => {
            let d = psi.generators()[0].degree() as i64;
            let n = beta.dim() as i64;
            Ok(Q::from_integer(beta.degree() as i64) > m * c * Q::from_integer(d) - Q::from_integer(n))
        }
    }
}

/// Distance from the nearest integrability threshold,
/// `min_k |m c a_k − b_k − ord_k(β) − 1|`.
pub fn threshold_distance(beta: &MultiIndex, m: Q, res: &ResolutionData) -> Q {
    res.divisors
        .iter()
        .enumerate()
        .map(|(k, d)| (staircase_height(res, k, m) - Q::from_integer(d.order_of(beta) as i64 + 1)).abs())
        .min()
        .unwrap_or_else(Q::zero)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OracleVerdict {
    Integrable,
    Divergent,
    Indeterminate,
}

impl OracleVerdict {
    pub fn as_member(self) -> Option<bool> {
        match self {
            OracleVerdict::Integrable => Some(true),
            OracleVerdict::Divergent => Some(false),
            OracleVerdict::Indeterminate => None,
        }
    }
}

/// Fitted shell asymptotics `log I_j ≈ C + k log j − κ j`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellDecay {
    pub kappa: f64,
    pub log_power: f64,
}

/// Brute-force integrability test on shells `{−j−1 < ψ < −j}`.
///
/// Shell clouds depend only on ψ, so one oracle serves a whole sweep over
/// `(β, m)`.
pub struct MembershipOracle {
    psi: SingularWeight,
    base_depth: f64,
    shells: Vec<RadialCloud>,
}

const ORACLE_DEPTH: f64 = 8.0;
const RATE_ZERO: f64 = 1e-7;
const RATE_BAND: f64 = 1e-5;

impl MembershipOracle {
    pub fn new(psi: &SingularWeight, rule: &QuadratureRule) -> Result<Self> {
        let hint = SingularHint::for_level_function(psi);
        let shells = [1.0, 2.0, 4.0]
            .iter()
            .map(|&mult| {
                let depth = mult * ORACLE_DEPTH;
                let region = Region::Annulus {
                    level_fn: LevelFunction::Psi(psi.clone()),
                    t: -depth - 1.0,
                };
                RadialCloud::build(psi.domain(), &region, &[] as &[Cut], &hint, rule)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MembershipOracle {
            psi: psi.clone(),
            base_depth: ORACLE_DEPTH,
            shells,
        })
    }

    fn log_shell_integral(&self, shell: &RadialCloud, beta: &MultiIndex, m: f64) -> f64 {
        let log_f = |s: &[f64]| -> f64 {
            let mut v = 0.0;
            for (i, &b) in beta.0.iter().enumerate() {
                v += b as f64 * s[i].ln();
            }
            if m != 0.0 {
                v -= m * self.psi.eval_toric(s);
            }
            v
        };
        shell.log_integrate(log_f)
    }

    pub fn decay(&self, beta: &MultiIndex, m: Q) -> ShellDecay {
        let mf = to_f64(m);
        let l: Vec<f64> = self
            .shells
            .iter()
            .map(|sh| self.log_shell_integral(sh, beta, mf))
            .collect();
        let j = self.base_depth;
        let d1 = l[1] - l[0];
        let d2 = l[2] - l[1];
        let kappa = (d1 - d2) / j;
        let log_power = (d1 + kappa * j) / std::f64::consts::LN_2;
        ShellDecay { kappa, log_power }
    }

    pub fn verdict(&self, beta: &MultiIndex, m: Q) -> OracleVerdict {
        if m == Q::zero() {
            return OracleVerdict::Integrable;
        }
        let ShellDecay { kappa, log_power } = self.decay(beta, m);
        if !kappa.is_finite() || !log_power.is_finite() {
            return OracleVerdict::Indeterminate;
        }
        if kappa > RATE_BAND {
            OracleVerdict::Integrable
        } else if kappa < -RATE_BAND {
            OracleVerdict::Divergent
        } else if kappa.abs() > RATE_ZERO {
            OracleVerdict::Indeterminate
        } else if log_power > -0.75 {
            // Σ j^k diverges for k ≥ −1.
            OracleVerdict::Divergent
        } else if log_power < -1.25 {
            OracleVerdict::Integrable
        } else {
            OracleVerdict::Indeterminate
        }
    }
}

/// One-shot oracle query; sweeps should reuse a [`MembershipOracle`].
pub fn membership_oracle(
    beta: &MultiIndex,
    m: Q,
    psi: &SingularWeight,
    rule: &QuadratureRule,
) -> Result<OracleVerdict> {
    Ok(MembershipOracle::new(psi, rule)?.verdict(beta, m))
}
