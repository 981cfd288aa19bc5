//! Extension functionals: the subvariety functional
//! `⟨ξ_g, h⟩ = σ_k ∫_V h ḡ e^{−φ+kB}` and the annulus functional attached to a
//! jumping number, with its closed-form limit and boundedness sweep.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::ln_gamma;

use crate::bergman::{build_space, dual_norm_sq, FunctionalVector, TruncatedSpace};
use crate::error::{Error, Result};
use crate::monomial::{HoloPoly, MultiIndex};
use crate::multiplier::{ideal_membership, staircase_height, staircase_orders, to_f64, JumpSpectrum, Q};
use crate::quadrature::{cross_pairing, integrate_on_cloud, QuadratureRule, RadialCloud, Region, SingularHint};
use crate::weights::{BaseWeight, DomainSpec, GreenData, LevelFunction, ModelFamily, SingularWeight, WeightSpec};

/// `σ_k = π^k / k!`, the volume of the unit ball in `ℂ^k`.
pub fn sigma_k(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * PI / i as f64)
}

fn czero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// `⟨ξ_g, h⟩ = σ_k ∫_{V∩Ω} h ḡ e^{−φ+kB} dλ_V` for a coordinate subspace `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubvarietyFunctional {
    pub green: GreenData,
    pub g: HoloPoly,
    pub base: BaseWeight,
}

impl SubvarietyFunctional {
    pub fn new(green: GreenData, g: HoloPoly, base: BaseWeight) -> Result<Self> {
        if g.terms.iter().any(|(a, _)| green.vanishes_on_v(a)) {
            return Err(Error::Config(
                "g must be a function on V: it may not involve the transverse coordinates".into(),
            ));
        }
        Ok(SubvarietyFunctional { green, g, base })
    }

    pub fn codim(&self) -> usize {
        self.green.codim()
    }

    fn density(&self, z: &[Complex64]) -> f64 {
        let k = self.codim() as f64;
        (-self.base.eval(z) + k * self.green.b.eval(z)).exp()
    }

    /// `⟨ξ_g, h⟩`.
    pub fn apply(&self, h: &HoloPoly, domain: &DomainSpec, rule: &QuadratureRule) -> Result<Complex64> {
        let n = domain.dimension;
        let sigma = sigma_k(self.codim());
        let tangential = self.green.tangential(n);
        if tangential.is_empty() {
            let origin = vec![czero(); n];
            return Ok(h.eval(&origin) * self.g.eval(&origin).conj() * (sigma * self.density(&origin)));
        }
        let sub = domain.restrict(&tangential);
        let cloud = RadialCloud::build(&sub, &Region::Full, &[], &SingularHint::none(sub.dimension), rule)?;
        let lift = |w: &[Complex64]| -> Vec<Complex64> {
            let mut z = vec![czero(); n];
            for (&i, wi) in tangential.iter().zip(w) {
                z[i] = *wi;
            }
            z
        };
        let integrand = |w: &[Complex64]| {
            let z = lift(w);
            h.eval(&z) * self.g.eval(&z).conj() * self.density(&z)
        };
        let re = integrate_on_cloud(&|w| integrand(w).re, &cloud, rule.angular())?;
        let im = integrate_on_cloud(&|w| integrand(w).im, &cloud, rule.angular())?;
        Ok(Complex64::new(re, im) * sigma)
    }

    pub fn vector(&self, space: &TruncatedSpace, rule: &QuadratureRule) -> Result<FunctionalVector> {
        let values = space
            .basis()
            .iter()
            .map(|a| self.apply(&HoloPoly::monomial(a.clone()), space.domain(), rule))
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionalVector::new(values))
    }
}

/// Free-function form of [`SubvarietyFunctional::apply`].
pub fn xi_subvariety(
    xi: &SubvarietyFunctional,
    h: &HoloPoly,
    domain: &DomainSpec,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    xi.apply(h, domain, rule)
}

/// The functional `h ↦ lim_{t→−∞} ∫_{t<ψ<t+1} h ḡ̃ e^{−φ−m_p ψ} dλ` attached to
/// the jump `m_p` realized along divisor `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusFunctional {
    psi: SingularWeight,
    base: BaseWeight,
    jump_index: usize,
    m_p: Q,
    m_prev: Q,
    divisor: usize,
    order: u32,
    g: HoloPoly,
    g_tilde: HoloPoly,
}

impl AnnulusFunctional {
    /// `g` lives on the divisor slice: for a coordinate divisor it may not
    /// involve that coordinate; for the exceptional divisor it is a function
    /// of `z_2, …, z_n` (chart `z_1 = w_1`, `z_i = w_1 w'_i`).
    pub fn new(
        psi: &SingularWeight,
        base: BaseWeight,
        spectrum: &JumpSpectrum,
        jump_index: usize,
        divisor: usize,
        g: HoloPoly,
    ) -> Result<Self> {
        let jump = spectrum
            .jump(jump_index)
            .ok_or_else(|| Error::Config(format!("jump index {jump_index} is outside the computed spectrum")))?;
        if !jump.divisors.contains(&divisor) {
            return Err(Error::Config(format!(
                "jump m_{jump_index} = {} is not realized along divisor {divisor}",
                jump.m
            )));
        }
        let res = psi.resolution();
        let height = staircase_height(res, divisor, jump.m);
        let order = staircase_orders(res, jump.m).orders[divisor];
        if Q::from_integer(order as i64) != height || Q::from_integer(order as i64 - 1) - height != Q::from_integer(-1)
        {
            return Err(Error::Config("weight exponent identity fails at this jump".into()));
        }
        if order == 0 {
            return Err(Error::Config("vanishing order at a jump must be positive".into()));
        }
        let n = psi.dimension();
        let mut terms = Vec::new();
        for (j, coeff) in &g.terms {
            if j.dim() != n {
                return Err(Error::Config("g exponent has the wrong dimension".into()));
            }
            let mut e = j.0.clone();
            match psi.family() {
                ModelFamily::PrincipalMonomial => {
                    let axis = match res.divisors[divisor].tag {
                        crate::multiplier::DivisorTag::Coordinate(i) => i,
                        crate::multiplier::DivisorTag::Exceptional => {
                            unreachable!("principal family has coordinate divisors")
                        }
                    };
                    if e[axis] != 0 {
                        return Err(Error::Config("g may not involve the divisor coordinate".into()));
                    }
                    e[axis] = order - 1;
                }
                ModelFamily::MaximalIdealPower => {
                    if e[0] != 0 {
                        return Err(Error::Config(
                            "g is a function of the chart variables z_2, …, z_n".into(),
                        ));
                    }
                    let jdeg = j.degree();
                    if jdeg > order - 1 {
                        return Err(Error::Config(format!(
                            "g has degree {jdeg} but the vanishing order allows at most {}",
                            order - 1
                        )));
                    }
                    e[0] = order - 1 - jdeg;
                }
            }
            terms.push((MultiIndex(e), *coeff));
        }
        Ok(AnnulusFunctional {
            psi: psi.clone(),
            base,
            jump_index,
            m_p: jump.m,
            m_prev: spectrum.previous(jump_index),
            divisor,
            order,
            g,
            g_tilde: HoloPoly { terms },
        })
    }

    pub fn m_p(&self) -> Q {
        self.m_p
    }

    pub fn m_prev(&self) -> Q {
        self.m_prev
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn jump_index(&self) -> usize {
        self.jump_index
    }

    pub fn g(&self) -> &HoloPoly {
        &self.g
    }

    /// `g̃` in ambient coordinates.
    pub fn g_tilde(&self) -> &HoloPoly {
        &self.g_tilde
    }

    pub fn psi(&self) -> &SingularWeight {
        &self.psi
    }

    fn check_h(&self, h: &HoloPoly) -> Result<()> {
        for (a, _) in &h.terms {
            if !ideal_membership(a, self.m_prev, &self.psi)? {
                return Err(Error::Config(format!("h has the monomial {a} outside 𝓘(m_(p-1) ψ)")));
            }
        }
        Ok(())
    }

    /// The annulus integral at a finite level `t`.
    pub fn value(&self, h: &HoloPoly, t: f64, rule: &QuadratureRule) -> Result<Complex64> {
        if !(t + 1.0 < 0.0) {
            return Err(Error::Range { level: t });
        }
        self.check_h(h)?;
        let domain = self.psi.domain();
        let weight = WeightSpec::plain(self.base.clone()).with_multiplier(self.m_p, self.psi.clone());
        let region = Region::Annulus {
            level_fn: LevelFunction::Psi(self.psi.clone()),
            t,
        };
        let cloud = RadialCloud::for_weight(domain, &weight, &region, rule)?;
        let rows: Vec<MultiIndex> = self.g_tilde.terms.iter().map(|(a, _)| a.clone()).collect();
        let cols: Vec<MultiIndex> = h.terms.iter().map(|(a, _)| a.clone()).collect();
        let p = cross_pairing(&rows, &cols, &weight, &cloud, rule)?;
        let mut acc = czero();
        for (r, (_, gc)) in self.g_tilde.terms.iter().enumerate() {
            for (c, (_, hc)) in h.terms.iter().enumerate() {
                acc += hc * gc.conj() * p[r * cols.len() + c];
            }
        }
        Ok(acc)
    }

    /// Closed-form `lim_{t→−∞}` of [`value`](Self::value).
    pub fn limit(&self, h: &HoloPoly) -> Result<Complex64> {
        self.check_h(h)?;
        let mut acc = czero();
        for (alpha, hc) in &h.terms {
            for (gamma, gc) in &self.g_tilde.terms {
                if alpha == gamma {
                    acc += hc * gc.conj() * self.limit_diagonal(alpha)?;
                }
            }
        }
        Ok(acc)
    }

    /// Limit for `h = g̃ = z^α` (all off-diagonal limits vanish).
    fn limit_diagonal(&self, alpha: &MultiIndex) -> Result<f64> {
        let n = self.psi.dimension();
        let c = self.psi.c_f64();
        let mp = to_f64(self.m_p);
        let prefactor = (-mp * self.psi.u()).exp();
        let origin = vec![czero(); n];
        match self.psi.family() {
            ModelFamily::PrincipalMonomial => {
                let res = self.psi.resolution();
                let ak = res.divisors[self.divisor].a as f64;
                let axis = match res.divisors[self.divisor].tag {
                    crate::multiplier::DivisorTag::Coordinate(i) => i,
                    crate::multiplier::DivisorTag::Exceptional => unreachable!(),
                };
                let a = &self.psi.generators()[0];
                let mut value = PI * prefactor / (c * ak);
                let others: Vec<usize> = (0..n).filter(|&i| i != axis).collect();
                if others.is_empty() {
                    return Ok(value * (-self.base.eval(&origin)).exp());
                }
                if !self.base.is_toric() {
                    return Err(Error::UnsupportedModel(
                        "closed-form limit along a coordinate divisor needs a toric base weight".into(),
                    ));
                }
                let sub = self.psi.domain().restrict(&others);
                let mut hint = SingularHint::none(others.len());
                let mut exps = Vec::new();
                for (slot, &i) in others.iter().enumerate() {
                    let e = Q::from_integer(alpha.get(i) as i64)
                        - self.m_p * self.psi.c() * Q::from_integer(a.get(i) as i64);
                    if e <= Q::from_integer(-1) {
                        return Err(Error::Divergent(format!(
                            "slice integral of |w'|^(2({e})) diverges; the jump is shared with another divisor"
                        )));
                    }
                    hint.k_axes[slot] = e.denom().unsigned_abs() as u32;
                    exps.push(to_f64(e));
                }
                let rule = QuadratureRule::new(64, 1)?;
                let cloud = RadialCloud::build(&sub, &Region::Full, &[], &hint, &rule)?;
                let slice = cloud.integrate(|s| {
                    let mut full = vec![0.0; n];
                    let mut v = 0.0;
                    for ((&i, &si), e) in others.iter().zip(s).zip(&exps) {
                        full[i] = si;
                        v += e * si.ln();
                    }
                    (v - self.base.eval_toric(&full)).exp()
                })?;
                value *= PI.powi(others.len() as i32) * slice;
                Ok(value)
            }
            ModelFamily::MaximalIdealPower => {
                if alpha.degree() + 1 != self.order {
                    return Ok(0.0);
                }
                let d = self.psi.generators()[0].degree() as f64;
                let big_n = mp * c;
                let mut log_val = 0.0;
                let mut used = 0.0;
                for i in 1..n {
                    let x = (alpha.get(i) as f64 + 1.0) / d;
                    log_val += ln_gamma(x) - d.ln();
                    used += x;
                }
                if !(big_n - used > 0.0) {
                    return Err(Error::Divergent(
                        "chart integral of the exceptional slice diverges".into(),
                    ));
                }
                log_val += ln_gamma(big_n - used) - ln_gamma(big_n);
                Ok(PI * prefactor / (c * d) * (-self.base.eval(&origin)).exp() * PI.powi(n as i32 - 1) * log_val.exp())
            }
        }
    }

    /// Limit functional on a space's basis; non-integrable monomials are not
    /// part of the space, so every basis monomial is admissible.
    pub fn limit_vector(&self, space: &TruncatedSpace) -> Result<FunctionalVector> {
        let values = space
            .basis()
            .iter()
            .map(|a| self.limit(&HoloPoly::monomial(a.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionalVector::new(values))
    }

    pub fn value_vector(&self, space: &TruncatedSpace, t: f64, rule: &QuadratureRule) -> Result<FunctionalVector> {
        let values = space
            .basis()
            .iter()
            .map(|a| self.value(&HoloPoly::monomial(a.clone()), t, rule))
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionalVector::new(values))
    }
}

pub fn xi_annulus_value(xi: &AnnulusFunctional, h: &HoloPoly, t: f64, rule: &QuadratureRule) -> Result<Complex64> {
    xi.value(h, t, rule)
}

pub fn xi_limit_closed_form(xi: &AnnulusFunctional, h: &HoloPoly) -> Result<Complex64> {
    xi.limit(h)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub s: f64,
    pub dual_norm_sq: f64,
    /// `e^{(m_p − m_{p−1}) s} ‖ξ_g‖²`.
    pub scaled: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundednessSweep {
    pub rows: Vec<SweepRow>,
    pub max_scaled: f64,
    /// Every value is at most the first (largest `s`) value times `1 + tol`.
    pub bounded: bool,
    /// Nondecreasing in `s`, i.e. nonincreasing along the descending grid.
    pub nondecreasing: bool,
    pub worst_increase: f64,
}

/// `e^{(m_p − m_{p−1}) s} ‖ξ_g‖²` in `A²(Ω, φ + q max(ψ − s, 0) + m_{p−1} ψ)`
/// along a descending `s` grid.
pub fn xi_boundedness_sweep(
    xi: &AnnulusFunctional,
    s_grid: &[f64],
    q: f64,
    degree: u32,
    rule: &QuadratureRule,
    tolerance: f64,
) -> Result<BoundednessSweep> {
    let gap = to_f64(xi.m_p - xi.m_prev);
    if !(q > gap) && q != 0.0 {
        return Err(Error::Config(format!("q = {q} must exceed m_p − m_(p-1) = {gap}")));
    }
    if s_grid.windows(2).any(|w| !(w[1] < w[0])) || s_grid.iter().any(|s| !(*s <= 0.0)) {
        return Err(Error::Config("s grid must be strictly descending and ≤ 0".into()));
    }
    let domain = xi.psi.domain();
    let mut rows = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let mut weight = WeightSpec::plain(xi.base.clone()).with_deformation(LevelFunction::Psi(xi.psi.clone()), s, q);
        if xi.m_prev > Q::from_integer(0) {
            weight = weight.with_multiplier(xi.m_prev, xi.psi.clone());
        }
        let space = build_space(domain, &weight, degree, rule)?;
        let v = xi.limit_vector(&space)?;
        let d = dual_norm_sq(&space, &v);
        rows.push(SweepRow {
            s,
            dual_norm_sq: d,
            scaled: (gap * s).exp() * d,
        });
    }
    let first = rows.first().map(|r| r.scaled).unwrap_or(0.0);
    let max_scaled = rows.iter().map(|r| r.scaled).fold(f64::NEG_INFINITY, f64::max);
    let bounded = rows.iter().all(|r| r.scaled <= first * (1.0 + tolerance));
    let worst_increase = rows
        .windows(2)
        .map(|w| w[1].scaled - w[0].scaled)
        .fold(f64::NEG_INFINITY, f64::max);
    let nondecreasing = rows
        .windows(2)
        .all(|w| w[1].scaled <= w[0].scaled + tolerance * w[0].scaled.abs().max(f64::MIN_POSITIVE));
    Ok(BoundednessSweep {
        rows,
        max_scaled,
        bounded,
        nondecreasing,
        worst_increase,
    })
}
