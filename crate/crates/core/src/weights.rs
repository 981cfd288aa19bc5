//! Weight functions on polydiscs: base weights, Green-type data, the
//! deformation families and model singular weights.
//!
//! Points are complex vectors; toric quantities are evaluated from the
//! squared moduli `s_i = |z_i|²`.

use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomial::MultiIndex;
use crate::multiplier::{to_f64, ResolutionData, Q};

/// Relative slack when deciding whether a point lies in the closed polydisc.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub dimension: usize,
    pub radii: Vec<f64>,
}

impl DomainSpec {
    pub fn new(dimension: usize, radii: Vec<f64>) -> Result<Self> {
        let d = DomainSpec { dimension, radii };
        d.validate()?;
        Ok(d)
    }

    pub fn unit(n: usize) -> Self {
        DomainSpec {
            dimension: n,
            radii: vec![1.0; n],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 {
            return Err(Error::Config("domain dimension must be at least 1".into()));
        }
        if self.radii.len() != self.dimension {
            return Err(Error::Config(format!(
                "domain has dimension {} but {} radii",
                self.dimension,
                self.radii.len()
            )));
        }
        if self.radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::Config("polyradii must be positive and finite".into()));
        }
        Ok(())
    }

    /// `r_i²`, the range of the squared-modulus variable on axis `i`.
    pub fn radius_sq(&self, i: usize) -> f64 {
        self.radii[i] * self.radii[i]
    }

    pub fn contains(&self, z: &[Complex64]) -> bool {
        z.len() == self.dimension
            && z.iter()
                .zip(&self.radii)
                .all(|(zi, r)| zi.norm() <= r * (1.0 + DOMAIN_SLACK))
    }

    pub fn check_point(&self, z: &[Complex64]) -> Result<()> {
        if self.contains(z) {
            Ok(())
        } else {
            Err(Error::Domain(format!("point {z:?} lies outside the closed polydisc")))
        }
    }

    /// The polydisc spanned by the listed coordinates.
    pub fn restrict(&self, keep: &[usize]) -> DomainSpec {
        DomainSpec {
            dimension: keep.len(),
            radii: keep.iter().map(|&i| self.radii[i]).collect(),
        }
    }
}

/// `coeff · Π (Re z_i)^{x_i} (Im z_i)^{y_i} |z_i|^{2 s_i}`; empty exponent
/// lists mean all zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coeff: f64,
    #[serde(default)]
    pub x: Vec<u32>,
    #[serde(default)]
    pub y: Vec<u32>,
    #[serde(default)]
    pub s: Vec<u32>,
}

impl Term {
    fn exp(v: &[u32], i: usize) -> u32 {
        v.get(i).copied().unwrap_or(0)
    }

    pub fn is_toric(&self) -> bool {
        self.x.iter().chain(&self.y).all(|&e| e == 0)
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        let mut v = self.coeff;
        for (i, zi) in z.iter().enumerate() {
            let (ex, ey, es) = (Self::exp(&self.x, i), Self::exp(&self.y, i), Self::exp(&self.s, i));
            if ex > 0 {
                v *= zi.re.powi(ex as i32);
            }
            if ey > 0 {
                v *= zi.im.powi(ey as i32);
            }
            if es > 0 {
                v *= zi.norm_sqr().powi(es as i32);
            }
        }
        v
    }

    pub fn eval_toric(&self, s: &[f64]) -> f64 {
        let mut v = self.coeff;
        for (i, si) in s.iter().enumerate() {
            let es = Self::exp(&self.s, i);
            if es > 0 {
                v *= si.powi(es as i32);
            }
        }
        v
    }
}

/// Real polynomial in `Re z_i`, `Im z_i` and `|z_i|²`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RealPoly {
    pub terms: Vec<Term>,
}

impl RealPoly {
    pub fn zero() -> Self {
        RealPoly::default()
    }

    pub fn constant(c: f64) -> Self {
        RealPoly {
            terms: vec![Term {
                coeff: c,
                x: vec![],
                y: vec![],
                s: vec![],
            }],
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for t in &self.terms {
            if !t.coeff.is_finite() {
                return Err(Error::Config("polynomial coefficient is not finite".into()));
            }
            for v in [&t.x, &t.y, &t.s] {
                if !v.is_empty() && v.len() != n {
                    return Err(Error::Config(format!(
                        "polynomial exponent list has length {} in dimension {n}",
                        v.len()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_toric(&self) -> bool {
        self.terms.iter().all(Term::is_toric)
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        self.terms.iter().map(|t| t.eval(z)).sum()
    }

    pub fn eval_toric(&self, s: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval_toric(s)).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BaseWeight {
    Zero {},
    /// Polynomial `Σ_k c_k (Σ_i |z_i|²)^k`.
    Radial {
        coefficients: Vec<f64>,
    },
    /// Polynomial in the squared moduli only.
    Toric {
        terms: RealPoly,
    },
    /// Polynomial in `Re z_i`, `Im z_i`, `|z_i|²`.
    Pointwise {
        terms: RealPoly,
    },
}

impl BaseWeight {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            BaseWeight::Zero {} => Ok(()),
            BaseWeight::Radial { coefficients } => {
                if coefficients.iter().all(|c| c.is_finite()) {
                    Ok(())
                } else {
                    Err(Error::Config("radial profile coefficient is not finite".into()))
                }
            }
            BaseWeight::Toric { terms } => {
                terms.validate(n)?;
                if terms.is_toric() {
                    Ok(())
                } else {
                    Err(Error::Config(
                        "toric weight may only use |z_i|² exponents; use kind \"pointwise\"".into(),
                    ))
                }
            }
            BaseWeight::Pointwise { terms } => terms.validate(n),
        }
    }

    pub fn is_toric(&self) -> bool {
        match self {
            BaseWeight::Zero {} | BaseWeight::Radial { .. } | BaseWeight::Toric { .. } => true,
            BaseWeight::Pointwise { terms } => terms.is_toric(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            BaseWeight::Zero {} => true,
            BaseWeight::Radial { coefficients } => coefficients.iter().all(|&c| c == 0.0),
            BaseWeight::Toric { terms } | BaseWeight::Pointwise { terms } => terms.terms.iter().all(|t| t.coeff == 0.0),
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        match self {
            BaseWeight::Pointwise { terms } => terms.eval(z),
            _ => {
                let s: Vec<f64> = z.iter().map(|v| v.norm_sqr()).collect();
                self.eval_toric(&s)
            }
        }
    }

    /// Evaluation from squared moduli; meaningful only when `is_toric`.
    pub fn eval_toric(&self, s: &[f64]) -> f64 {
        match self {
            BaseWeight::Zero {} => 0.0,
            BaseWeight::Radial { coefficients } => {
                let r: f64 = s.iter().sum();
                coefficients.iter().rev().fold(0.0, |acc, c| acc * r + c)
            }
            BaseWeight::Toric { terms } | BaseWeight::Pointwise { terms } => terms.eval_toric(s),
        }
    }
}

/// Green-type function `G = log Σ_{i∈T} |z_i|² + shift` with poles along
/// `V = {z_i = 0 : i ∈ T}`, and comparison bounds `A`, `B`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GreenData {
    pub transverse: Vec<usize>,
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub a: RealPoly,
    #[serde(default)]
    pub b: RealPoly,
}

impl GreenData {
    /// `G = log|z|²`-type data for `V = {0}`.
    pub fn point(n: usize) -> Self {
        GreenData {
            transverse: (0..n).collect(),
            shift: 0.0,
            a: RealPoly::zero(),
            b: RealPoly::zero(),
        }
    }

    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        let n = domain.dimension;
        if self.transverse.is_empty() {
            return Err(Error::Config(
                "Green data needs at least one transverse coordinate".into(),
            ));
        }
        let mut seen = vec![false; n];
        for &i in &self.transverse {
            if i >= n || seen[i] {
                return Err(Error::Config(format!("invalid transverse coordinate {i}")));
            }
            seen[i] = true;
        }
        if !self.shift.is_finite() {
            return Err(Error::Config("Green shift must be finite".into()));
        }
        self.a.validate(n)?;
        self.b.validate(n)?;
        let sup: f64 = self.transverse.iter().map(|&i| domain.radius_sq(i)).sum::<f64>().ln() + self.shift;
        if sup > 1e-12 {
            return Err(Error::Config(format!(
                "Green function must be negative on the domain (sup is {sup})"
            )));
        }
        Ok(())
    }

    /// Codimension `k` of `V`.
    pub fn codim(&self) -> usize {
        self.transverse.len()
    }

    /// Coordinates along `V`.
    pub fn tangential(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.transverse.contains(i)).collect()
    }

    pub fn dist_sq(&self, z: &[Complex64]) -> f64 {
        self.transverse.iter().map(|&i| z[i].norm_sqr()).sum()
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        self.dist_sq(z).ln() + self.shift
    }

    pub fn eval_toric(&self, s: &[f64]) -> f64 {
        self.transverse.iter().map(|&i| s[i]).sum::<f64>().ln() + self.shift
    }

    /// Whether `z^β` vanishes on `V`.
    pub fn vanishes_on_v(&self, beta: &MultiIndex) -> bool {
        self.transverse.iter().any(|&i| beta.get(i) > 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelFamily {
    PrincipalMonomial,
    MaximalIdealPower,
}

/// `ψ = c log Σ_j |z^{a_j}|² + u` with constant `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularWeight {
    c: Q,
    generators: Vec<MultiIndex>,
    u: f64,
    family: ModelFamily,
    resolution: ResolutionData,
    domain: DomainSpec,
}

impl SingularWeight {
    /// Builds ψ and fixes `u` so that `sup ψ = 0` on the closed polydisc.
    pub fn new(c: Q, generators: Vec<MultiIndex>, family: ModelFamily, domain: &DomainSpec) -> Result<Self> {
        domain.validate()?;
        if generators.is_empty() {
            return Err(Error::Config("singular weight needs at least one generator".into()));
        }
        let n = domain.dimension;
        if generators.iter().any(|g| g.dim() != n) {
            return Err(Error::Config("generator exponent has the wrong dimension".into()));
        }
        let resolution = match family {
            ModelFamily::PrincipalMonomial => {
                if generators.len() != 1 || generators[0].degree() == 0 {
                    return Err(Error::Config(
                        "principal-monomial family needs exactly one nonconstant generator".into(),
                    ));
                }
                ResolutionData::principal(c, &generators[0])?
            }
            ModelFamily::MaximalIdealPower => {
                let d = generators[0].degree();
                let expected: Vec<MultiIndex> = (0..n)
                    .map(|i| {
                        let mut e = vec![0; n];
                        e[i] = d;
                        MultiIndex(e)
                    })
                    .collect();
                if d == 0 || generators != expected {
                    return Err(Error::Config(
                        "maximal-ideal-power family needs generators z_1^d, ..., z_n^d".into(),
                    ));
                }
                ResolutionData::maximal_ideal_power(c, n, d)?
            }
        };
        let mut psi = SingularWeight {
            c,
            generators,
            u: 0.0,
            family,
            resolution,
            domain: domain.clone(),
        };
        let corner: Vec<f64> = (0..n).map(|i| domain.radius_sq(i)).collect();
        psi.u = -psi.eval_toric(&corner);
        Ok(psi)
    }

    pub fn principal(c: Q, a: MultiIndex, domain: &DomainSpec) -> Result<Self> {
        Self::new(c, vec![a], ModelFamily::PrincipalMonomial, domain)
    }

    pub fn maximal_ideal_power(c: Q, d: u32, domain: &DomainSpec) -> Result<Self> {
        let n = domain.dimension;
        let gens = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = d;
                MultiIndex(e)
            })
            .collect();
        Self::new(c, gens, ModelFamily::MaximalIdealPower, domain)
    }

    pub fn c(&self) -> Q {
        self.c
    }

    pub fn c_f64(&self) -> f64 {
        to_f64(self.c)
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn generators(&self) -> &[MultiIndex] {
        &self.generators
    }

    pub fn family(&self) -> ModelFamily {
        self.family
    }

    pub fn resolution(&self) -> &ResolutionData {
        &self.resolution
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn dimension(&self) -> usize {
        self.domain.dimension
    }

    /// `log Σ_j Π s_i^{a_ji}` computed stably; `-∞` on the zero locus.
    pub fn log_generator_sum(&self, s: &[f64]) -> f64 {
        let logs: Vec<f64> = self
            .generators
            .iter()
            .map(|a| {
                a.0.iter()
                    .zip(s)
                    .map(|(&e, &si)| if e == 0 { 0.0 } else { e as f64 * si.ln() })
                    .sum::<f64>()
            })
            .collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return top;
        }
        top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln()
    }

    pub fn eval_toric(&self, s: &[f64]) -> f64 {
        let l = self.log_generator_sum(s);
        if l == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.c_f64() * l + self.u
        }
    }

    pub fn eval(&self, z: &[Complex64]) -> f64 {
        let s: Vec<f64> = z.iter().map(|v| v.norm_sqr()).collect();
        self.eval_toric(&s)
    }
}

/// `ψ` at a point; `-∞` on the generator zero locus.
pub fn eval_singular_weight(psi: &SingularWeight, z: &[Complex64]) -> Result<f64> {
    psi.domain().check_point(z)?;
    Ok(psi.eval(z))
}

/// A toric function used as a deformation pole or as a region boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelFunction {
    Green(GreenData),
    Psi(SingularWeight),
}

impl LevelFunction {
    pub fn eval_toric(&self, s: &[f64]) -> f64 {
        match self {
            LevelFunction::Green(g) => g.eval_toric(s),
            LevelFunction::Psi(p) => p.eval_toric(s),
        }
    }
}

/// `slope · max(pole − shift, 0)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Deformation {
    pub pole: LevelFunction,
    pub shift: f64,
    pub slope: f64,
}

impl Deformation {
    pub fn eval_toric(&self, s: &[f64]) -> f64 {
        if self.slope == 0.0 {
            return 0.0;
        }
        let excess = self.pole.eval_toric(s) - self.shift;
        if excess > 0.0 {
            self.slope * excess
        } else {
            0.0
        }
    }
}

/// `m · ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierTerm {
    pub m: Q,
    pub psi: SingularWeight,
}

impl MultiplierTerm {
    pub fn eval_toric(&self, s: &[f64]) -> f64 {
        if self.m == Q::from_integer(0) {
            0.0
        } else {
            to_f64(self.m) * self.psi.eval_toric(s)
        }
    }
}

/// `base + slope·max(pole − shift, 0) + m·ψ`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSpec {
    pub base: BaseWeight,
    pub deformation: Option<Deformation>,
    pub multiplier: Option<MultiplierTerm>,
}

impl WeightSpec {
    pub fn plain(base: BaseWeight) -> Self {
        WeightSpec {
            base,
            deformation: None,
            multiplier: None,
        }
    }

    pub fn zero() -> Self {
        Self::plain(BaseWeight::Zero {})
    }

    pub fn with_deformation(mut self, pole: LevelFunction, shift: f64, slope: f64) -> Self {
        self.deformation = Some(Deformation { pole, shift, slope });
        self
    }

    pub fn with_multiplier(mut self, m: Q, psi: SingularWeight) -> Self {
        self.multiplier = Some(MultiplierTerm { m, psi });
        self
    }

    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        self.base.validate(domain.dimension)?;
        if let Some(d) = &self.deformation {
            if !(d.slope >= 0.0 && d.slope.is_finite()) {
                return Err(Error::Config(
                    "deformation slope must be a finite nonnegative number".into(),
                ));
            }
            if !(d.shift <= 0.0) {
                return Err(Error::Config("deformation shift must be a real number ≤ 0".into()));
            }
            if let LevelFunction::Green(g) = &d.pole {
                g.validate(domain)?;
            }
        }
        if let Some(mt) = &self.multiplier {
            if mt.m < Q::from_integer(0) {
                return Err(Error::Config("multiplier coefficient must be nonnegative".into()));
            }
        }
        Ok(())
    }

    pub fn is_toric(&self) -> bool {
        self.base.is_toric()
    }

    /// The part of the weight that depends on moduli only (everything but a
    /// non-toric base).
    pub fn toric_extra(&self, s: &[f64]) -> f64 {
        let mut v = 0.0;
        if let Some(d) = &self.deformation {
            v += d.eval_toric(s);
        }
        if let Some(mt) = &self.multiplier {
            v += mt.eval_toric(s);
        }
        v
    }

    /// Full weight from squared moduli; requires a toric base.
    pub fn eval_toric(&self, s: &[f64]) -> f64 {
        self.base.eval_toric(s) + self.toric_extra(s)
    }

    pub fn eval_unchecked(&self, z: &[Complex64]) -> f64 {
        let s: Vec<f64> = z.iter().map(|v| v.norm_sqr()).collect();
        self.base.eval(z) + self.toric_extra(&s)
    }

    /// Level functions whose level sets are kinks of the weight.
    pub fn kinks(&self) -> Vec<(LevelFunction, f64)> {
        match &self.deformation {
            Some(d) if d.slope > 0.0 => vec![(d.pole.clone(), d.shift)],
            _ => vec![],
        }
    }

    pub fn multiplier_m(&self) -> Q {
        self.multiplier
            .as_ref()
            .map(|m| m.m)
            .unwrap_or_else(|| Q::from_integer(0))
    }
}

/// Full weight at a point of the closed polydisc.
pub fn eval_weight(spec: &WeightSpec, domain: &DomainSpec, z: &[Complex64]) -> Result<f64> {
    domain.check_point(z)?;
    Ok(spec.eval_unchecked(z))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PshReport {
    pub holds: bool,
    /// Points where the sampled Levi form fell below `-tolerance`.
    pub witnesses: Vec<Vec<Complex64>>,
    pub min_levi: f64,
}

/// Sampled Levi-form test by central differences, step `1e-4·radius`.
pub fn check_psh(base: &BaseWeight, domain: &DomainSpec, sample_count: usize, tolerance: f64, seed: u64) -> PshReport {
    let n = domain.dimension;
    let rmin = domain.radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let h = 1e-4 * rmin;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut witnesses = Vec::new();
    let mut min_levi = f64::INFINITY;
    for _ in 0..sample_count {
        let z: Vec<Complex64> = (0..n)
            .map(|i| {
                Complex64::from_polar(
                    0.9 * domain.radii[i] * rng.random::<f64>().sqrt(),
                    std::f64::consts::TAU * rng.random::<f64>(),
                )
            })
            .collect();
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
        v.iter_mut().for_each(|c| *c /= norm);
        let at = |dir: Complex64, step: f64| -> f64 {
            let p: Vec<Complex64> = z.iter().zip(&v).map(|(zi, vi)| zi + dir * vi * step).collect();
            base.eval(&p)
        };
        let f0 = base.eval(&z);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let dxx = (at(one, h) - 2.0 * f0 + at(one, -h)) / (h * h);
        let dyy = (at(i, h) - 2.0 * f0 + at(i, -h)) / (h * h);
        let levi = 0.25 * (dxx + dyy);
        min_levi = min_levi.min(levi);
        if levi < -tolerance {
            witnesses.push(z);
        }
    }
    PshReport {
        holds: witnesses.is_empty(),
        witnesses,
        min_levi,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SandwichReport {
    pub holds: bool,
    /// Smallest slack over both inequalities; negative means violated.
    pub worst_slack: f64,
}

/// Checks `log d² + A ≥ G ≥ log d² − B` on a polar grid avoiding `V`.
pub fn check_green_sandwich(
    gd: &GreenData,
    domain: &DomainSpec,
    radial: usize,
    angular: usize,
    tolerance: f64,
) -> SandwichReport {
    let n = domain.dimension;
    let mut worst = f64::INFINITY;
    let total = (radial * angular).pow(n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let z: Vec<Complex64> = (0..n)
            .map(|i| {
                let k = rem % (radial * angular);
                rem /= radial * angular;
                let (kr, ka) = (k / angular, k % angular);
                let r = domain.radii[i] * (kr as f64 + 0.5) / radial as f64;
                Complex64::from_polar(r, std::f64::consts::TAU * ka as f64 / angular as f64)
            })
            .collect();
        let d2 = gd.dist_sq(&z);
        if d2 <= 0.0 {
            continue;
        }
        let g = gd.eval(&z);
        let upper = d2.ln() + gd.a.eval(&z) - g;
        let lower = g - (d2.ln() - gd.b.eval(&z));
        worst = worst.min(upper).min(lower);
    }
    SandwichReport {
        holds: worst >= -tolerance,
        worst_slack: worst,
    }
}
