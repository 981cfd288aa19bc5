//! Deterministic quadrature on polydiscs and on toric sublevel/annulus regions.
//!
//! Radial integration runs in the squared moduli `s_i = |z_i|²`, where
//! `dλ = Π ½ ds_i dθ_i`. A [`RadialCloud`] is a list of nodes `s` with weights
//! for `∫ F(s) Π ds_i` over the region; angular integrals are either exact
//! (toric integrands contribute `(2π)ⁿ`) or done by the trapezoid rule.
//!
//! Breakpoints are placed at region boundaries and at weight kinks. Every
//! level function in use (Green functions and model ψ) is nondecreasing in
//! each `s_i`, so roots along a radial line are found by bisection.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::monomial::MultiIndex;
use crate::multiplier::Q;
use crate::weights::{DomainSpec, LevelFunction, ModelFamily, SingularWeight, WeightSpec};

/// Pieces `[a, b]` with `b/a` above this ratio are split geometrically.
const SPLIT_RATIO: f64 = 4.0;
const ROOT_REL_TOL: f64 = 1e-13;
const SCAN_UNIFORM: usize = 65;
const SCAN_LOG: usize = 129;
const CHUNK: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    radial: usize,
    angular: usize,
    /// Gauss–Legendre nodes and weights on `[0, 1]`.
    unit: Vec<(f64, f64)>,
}

impl QuadratureRule {
    pub fn new(radial: usize, angular: usize) -> Result<Self> {
        let r = NonZeroUsize::new(radial)
            .ok_or_else(|| Error::Config("radial quadrature order must be positive".into()))?;
        if angular == 0 {
            return Err(Error::Config("angular quadrature order must be positive".into()));
        }
        let unit = GaussLegendre::new(r)
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
            .collect();
        Ok(QuadratureRule { radial, angular, unit })
    }

    /// `R = 120, T = 64` on the disc; `R = 60, T = 32` in higher dimension.
    pub fn default_for(n: usize) -> Self {
        if n == 1 {
            Self::new(120, 64).expect("static order")
        } else {
            Self::new(60, 32).expect("static order")
        }
    }

    pub fn radial(&self) -> usize {
        self.radial
    }

    pub fn angular(&self) -> usize {
        self.angular
    }

    fn push_mapped(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let h = b - a;
        out.extend(self.unit.iter().map(|&(x, w)| (a + h * x, h * w)));
    }

    /// Nodes for `∫_a^b`, with geometric splitting away from 0 and the
    /// substitution `s = b·y^k` on pieces starting at 0.
    fn segment(&self, a: f64, b: f64, k: u32, out: &mut Vec<(f64, f64)>) {
        if !(b > a) {
            return;
        }
        if a > 0.0 && b / a > SPLIT_RATIO {
            let pieces = ((b / a).ln() / SPLIT_RATIO.ln()).ceil() as usize;
            let q = (b / a).powf(1.0 / pieces as f64);
            let mut lo = a;
            for i in 0..pieces {
                let hi = if i + 1 == pieces { b } else { lo * q };
                self.push_mapped(lo, hi, out);
                lo = hi;
            }
        } else if a == 0.0 && k > 1 {
            let kf = k as f64;
            out.extend(
                self.unit
                    .iter()
                    .map(|&(y, w)| (b * y.powi(k as i32), b * kf * y.powi(k as i32 - 1) * w)),
            );
        } else {
            self.push_mapped(a, b, out);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Full,
    /// `{f < t}`.
    Sublevel {
        level_fn: LevelFunction,
        t: f64,
    },
    /// `{t < f < t + 1}`.
    Annulus {
        level_fn: LevelFunction,
        t: f64,
    },
}

impl Region {
    pub fn contains(&self, s: &[f64]) -> bool {
        match self {
            Region::Full => true,
            Region::Sublevel { level_fn, t } => level_fn.eval_toric(s) < *t,
            Region::Annulus { level_fn, t } => {
                let v = level_fn.eval_toric(s);
                *t < v && v < *t + 1.0
            }
        }
    }

    fn cuts(&self) -> Vec<Cut> {
        match self {
            Region::Full => vec![],
            Region::Sublevel { level_fn, t } => vec![Cut::new(level_fn.clone(), *t)],
            Region::Annulus { level_fn, t } => {
                vec![Cut::new(level_fn.clone(), *t), Cut::new(level_fn.clone(), *t + 1.0)]
            }
        }
    }

    fn psi(&self) -> Option<&SingularWeight> {
        match self {
            Region::Sublevel {
                level_fn: LevelFunction::Psi(p),
                ..
            }
            | Region::Annulus {
                level_fn: LevelFunction::Psi(p),
                ..
            } => Some(p),
            _ => None,
        }
    }
}

/// A level set `{f = level}` where integrands lose smoothness.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub level_fn: LevelFunction,
    pub level: f64,
}

impl Cut {
    pub fn new(level_fn: LevelFunction, level: f64) -> Self {
        Cut { level_fn, level }
    }
}

/// Where integrands may be singular and which power substitution makes the
/// singular factor polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularHint {
    /// Singular at the origin only (blow-up family): use a corner patch.
    pub corner: bool,
    pub k_axes: Vec<u32>,
    pub k_corner: u32,
}

impl SingularHint {
    pub fn none(n: usize) -> Self {
        SingularHint {
            corner: false,
            k_axes: vec![1; n],
            k_corner: 1,
        }
    }

    /// Geometry hint for integrals over regions cut out by ψ.
    pub fn for_level_function(psi: &SingularWeight) -> Self {
        let mut h = Self::none(psi.dimension());
        h.corner = psi.family() == ModelFamily::MaximalIdealPower && psi.dimension() >= 2;
        h
    }

    /// Hint for integrands `|z^α|² e^{-w}` with `w` containing `m ψ`.
    pub fn for_weight(w: &WeightSpec, n: usize) -> Self {
        let mut h = Self::none(n);
        if let Some(mt) = &w.multiplier {
            h.absorb(&mt.psi, mt.m);
        }
        if let Some(d) = &w.deformation {
            if let LevelFunction::Psi(p) = &d.pole {
                h.absorb(p, Q::from_integer(0));
            }
        }
        h
    }

    pub fn absorb(&mut self, psi: &SingularWeight, m: Q) {
        let c = psi.c();
        match psi.family() {
            ModelFamily::PrincipalMonomial => {
                for (i, &a) in psi.generators()[0].0.iter().enumerate() {
                    let den = (m * c * Q::from_integer(a as i64)).denom().unsigned_abs() as u32;
                    self.k_axes[i] = self.k_axes[i].lcm(&den);
                }
            }
            ModelFamily::MaximalIdealPower => {
                self.corner |= psi.dimension() >= 2;
                let d = psi.generators()[0].degree() as i64;
                let den = (m * c * Q::from_integer(d)).denom().unsigned_abs() as u32;
                self.k_corner = self.k_corner.lcm(&den);
            }
        }
    }

    pub fn with_region(mut self, region: &Region) -> Self {
        if let Some(p) = region.psi() {
            self.absorb(p, Q::from_integer(0));
        }
        self
    }
}

/// Finds a sign change of `g` on `[lo, hi]` to relative precision.
fn bisect(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let neg_lo = g(lo) < 0.0;
    for _ in 0..600 {
        if hi - lo <= ROOT_REL_TOL * hi.abs() {
            break;
        }
        let mid = if lo > 0.0 && hi > 2.0 * lo {
            (lo * hi).sqrt()
        } else if lo == 0.0 && hi > 1e-290 {
            hi * 1e-8
        } else {
            0.5 * (lo + hi)
        };
        if (g(mid) < 0.0) == neg_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Root of a nondecreasing `g` strictly inside `(lo, hi)`, if any.
fn monotone_root(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> Option<f64> {
    let (gl, gh) = (g(lo), g(hi));
    if gl < 0.0 && gh > 0.0 {
        let r = bisect(g, lo, hi);
        (r > lo && r < hi).then_some(r)
    } else {
        None
    }
}

/// All sign changes of `g` on `[a, b]`, located by a mixed uniform and
/// logarithmic scan followed by bisection.
fn scan_roots(g: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..SCAN_UNIFORM)
        .map(|i| a + (b - a) * i as f64 / (SCAN_UNIFORM - 1) as f64)
        .collect();
    if a == 0.0 {
        xs.extend((0..SCAN_LOG).map(|i| b * (-700.0 * (1.0 - i as f64 / (SCAN_LOG - 1) as f64)).exp()));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let vals: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
    let mut roots = Vec::new();
    for i in 1..xs.len() {
        let (v0, v1) = (vals[i - 1], vals[i]);
        if v0.is_nan() || v1.is_nan() {
            continue;
        }
        if (v0 < 0.0 && v1 > 0.0) || (v0 > 0.0 && v1 < 0.0) {
            roots.push(bisect(g, xs[i - 1], xs[i]));
        }
    }
    roots
}

fn sorted_breaks(mut pts: Vec<f64>, a: f64, b: f64) -> Vec<f64> {
    pts.retain(|&p| p > a && p < b);
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * y.abs().max(1e-300));
    pts
}

type InnerRange<'a> = Box<dyn Fn(f64) -> (f64, f64) + 'a>;
type PatchMap<'a> = Box<dyn Fn(f64, f64) -> ([f64; 2], f64) + 'a>;

struct Patch<'a> {
    outer: (f64, f64),
    outer_breaks: Vec<f64>,
    outer_k: u32,
    inner_k: u32,
    inner_range: InnerRange<'a>,
    map: PatchMap<'a>,
}

/// Squared-moduli nodes and weights for `∫_region F(s) Π ds_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialCloud {
    n: usize,
    s: Vec<f64>,
    w: Vec<f64>,
}

impl RadialCloud {
    pub fn build(
        domain: &DomainSpec,
        region: &Region,
        cuts: &[Cut],
        hint: &SingularHint,
        rule: &QuadratureRule,
    ) -> Result<Self> {
        domain.validate()?;
        let n = domain.dimension;
        let mut all_cuts: Vec<Cut> = cuts.to_vec();
        all_cuts.extend(region.cuts());
        let mut cloud = RadialCloud {
            n,
            s: Vec::new(),
            w: Vec::new(),
        };
        match n {
            1 => cloud.build_line(domain, region, &all_cuts, hint, rule),
            2 if hint.corner => {
                let (r1, r2) = (domain.radius_sq(0), domain.radius_sq(1));
                let rm = r1.min(r2);
                let triangle = Patch {
                    outer: (0.0, 1.0),
                    outer_breaks: vec![],
                    outer_k: 1,
                    inner_k: hint.k_corner,
                    inner_range: Box::new(move |_| (0.0, rm)),
                    map: Box::new(|x, rho| ([x * rho, (1.0 - x) * rho], rho)),
                };
                cloud.build_patch(&triangle, region, &all_cuts, rule);
                let remainder = Patch {
                    outer: (0.0, r1),
                    outer_breaks: vec![rm],
                    outer_k: hint.k_axes[0],
                    inner_k: hint.k_axes[1],
                    inner_range: Box::new(move |s1| ((rm - s1).max(0.0), r2)),
                    map: Box::new(|s1, s2| ([s1, s2], 1.0)),
                };
                cloud.build_patch(&remainder, region, &all_cuts, rule);
            }
            2 => {
                let (r1, r2) = (domain.radius_sq(0), domain.radius_sq(1));
                let tensor = Patch {
                    outer: (0.0, r1),
                    outer_breaks: vec![],
                    outer_k: hint.k_axes[0],
                    inner_k: hint.k_axes[1],
                    inner_range: Box::new(move |_| (0.0, r2)),
                    map: Box::new(|s1, s2| ([s1, s2], 1.0)),
                };
                cloud.build_patch(&tensor, region, &all_cuts, rule);
            }
            _ => {
                if !all_cuts.is_empty() || hint.corner {
                    return Err(Error::UnsupportedModel(format!(
                        "region and weight-kink quadrature is implemented for dimension ≤ 2, got {n}"
                    )));
                }
                cloud.build_box(domain, hint, rule);
            }
        }
        Ok(cloud)
    }

    /// Cloud for integrands `|z^α|² e^{-w}` over a region.
    pub fn for_weight(
        domain: &DomainSpec,
        weight: &WeightSpec,
        region: &Region,
        rule: &QuadratureRule,
    ) -> Result<Self> {
        let cuts: Vec<Cut> = weight.kinks().into_iter().map(|(f, l)| Cut::new(f, l)).collect();
        let hint = SingularHint::for_weight(weight, domain.dimension).with_region(region);
        Self::build(domain, region, &cuts, &hint, rule)
    }

    fn push(&mut self, s: &[f64], w: f64) {
        self.s.extend_from_slice(s);
        self.w.push(w);
    }

    fn build_line(
        &mut self,
        domain: &DomainSpec,
        region: &Region,
        cuts: &[Cut],
        hint: &SingularHint,
        rule: &QuadratureRule,
    ) {
        let r = domain.radius_sq(0);
        let mut pts = Vec::new();
        for cut in cuts {
            let g = |x: f64| cut.level_fn.eval_toric(&[x]) - cut.level;
            pts.extend(monotone_root(&g, 0.0, r));
        }
        let pts = sorted_breaks(pts, 0.0, r);
        let mut nodes = Vec::new();
        for win in pts.windows(2) {
            let (a, b) = (win[0], win[1]);
            if !region.contains(&[0.5 * (a + b)]) {
                continue;
            }
            nodes.clear();
            rule.segment(a, b, if a == 0.0 { hint.k_axes[0] } else { 1 }, &mut nodes);
            for &(x, w) in &nodes {
                self.push(&[x], w);
            }
        }
    }

    fn build_box(&mut self, domain: &DomainSpec, hint: &SingularHint, rule: &QuadratureRule) {
        let axes: Vec<Vec<(f64, f64)>> = (0..domain.dimension)
            .map(|i| {
                let mut v = Vec::new();
                rule.segment(0.0, domain.radius_sq(i), hint.k_axes[i], &mut v);
                v
            })
            .collect();
        let total: usize = axes.iter().map(Vec::len).product();
        let mut s = vec![0.0; domain.dimension];
        for idx in 0..total {
            let mut rem = idx;
            let mut w = 1.0;
            for (i, ax) in axes.iter().enumerate() {
                let (x, wx) = ax[rem % ax.len()];
                rem /= ax.len();
                s[i] = x;
                w *= wx;
            }
            self.push(&s, w);
        }
    }

    fn build_patch(&mut self, patch: &Patch<'_>, region: &Region, cuts: &[Cut], rule: &QuadratureRule) {
        let (a, b) = patch.outer;
        let mut breaks = patch.outer_breaks.clone();
        for cut in cuts {
            let f = |u: f64, v: f64| cut.level_fn.eval_toric(&(patch.map)(u, v).0) - cut.level;
            let lo_edge = |u: f64| f(u, (patch.inner_range)(u).0);
            let hi_edge = |u: f64| f(u, (patch.inner_range)(u).1);
            breaks.extend(scan_roots(&lo_edge, a, b));
            breaks.extend(scan_roots(&hi_edge, a, b));
        }
        let breaks = sorted_breaks(breaks, a, b);
        let mut outer_nodes = Vec::new();
        let mut inner_nodes = Vec::new();
        for win in breaks.windows(2) {
            outer_nodes.clear();
            let k = if win[0] == 0.0 { patch.outer_k } else { 1 };
            rule.segment(win[0], win[1], k, &mut outer_nodes);
            for &(u, wu) in &outer_nodes {
                let (lo, hi) = (patch.inner_range)(u);
                if !(hi > lo) {
                    continue;
                }
                let mut inner_breaks = Vec::new();
                for cut in cuts {
                    let g = |v: f64| cut.level_fn.eval_toric(&(patch.map)(u, v).0) - cut.level;
                    inner_breaks.extend(monotone_root(&g, lo, hi));
                }
                let inner_breaks = sorted_breaks(inner_breaks, lo, hi);
                for iw in inner_breaks.windows(2) {
                    let (v0, v1) = (iw[0], iw[1]);
                    if !region.contains(&(patch.map)(u, 0.5 * (v0 + v1)).0) {
                        continue;
                    }
                    inner_nodes.clear();
                    let k = if v0 == 0.0 { patch.inner_k } else { 1 };
                    rule.segment(v0, v1, k, &mut inner_nodes);
                    for &(v, wv) in &inner_nodes {
                        let (s, jac) = (patch.map)(u, v);
                        self.push(&s, wu * wv * jac);
                    }
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn node(&self, i: usize) -> (&[f64], f64) {
        (&self.s[i * self.n..(i + 1) * self.n], self.w[i])
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.s.chunks(self.n).zip(self.w.iter().copied())
    }

    /// `Σ w F(s)`, i.e. `∫_region F Π ds_i`.
    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for (s, w) in self.nodes() {
            let v = f(s);
            if !v.is_finite() {
                return Err(Error::SingularIntegrand { node: s.to_vec() });
            }
            acc += w * v;
        }
        Ok(acc)
    }

    /// `log Σ w e^{log_f(s)}`, for integrands outside floating-point range.
    pub fn log_integrate(&self, log_f: impl Fn(&[f64]) -> f64) -> f64 {
        let terms: Vec<f64> = self.nodes().map(|(s, w)| w.ln() + log_f(s)).collect();
        log_sum_exp(&terms)
    }
}

pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return top;
    }
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// `∫_region F(|z_1|²,…,|z_n|²) dλ = πⁿ ∫ F(s) ds`.
pub fn integrate_toric(f: impl Fn(&[f64]) -> f64, cloud: &RadialCloud) -> Result<f64> {
    Ok(PI.powi(cloud.dim() as i32) * cloud.integrate(f)?)
}

/// `∫_region f dλ` for a general integrand, trapezoid in each angle.
pub fn integrate(
    f: &dyn Fn(&[Complex64]) -> f64,
    domain: &DomainSpec,
    region: &Region,
    rule: &QuadratureRule,
) -> Result<f64> {
    let cloud = RadialCloud::build(
        domain,
        region,
        &[],
        &SingularHint::none(domain.dimension).with_region(region),
        rule,
    )?;
    integrate_on_cloud(f, &cloud, rule.angular())
}

pub fn integrate_on_cloud(f: &dyn Fn(&[Complex64]) -> f64, cloud: &RadialCloud, angular: usize) -> Result<f64> {
    let n = cloud.dim();
    let angles = angular.pow(n as u32);
    let dtheta = std::f64::consts::TAU / angular as f64;
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    let mut acc = 0.0;
    for (s, w) in cloud.nodes() {
        let mut inner = 0.0;
        for idx in 0..angles {
            let mut rem = idx;
            for i in 0..n {
                z[i] = Complex64::from_polar(s[i].sqrt(), dtheta * (rem % angular) as f64);
                rem /= angular;
            }
            let v = f(&z);
            if !v.is_finite() {
                return Err(Error::SingularIntegrand { node: s.to_vec() });
            }
            inner += v;
        }
        acc += w * inner;
    }
    Ok(acc * (0.5 * dtheta).powi(n as i32))
}

/// `P_ab = ∫_region z^{cols_b} conj(z^{rows_a}) e^{-w} dλ`, row-major.
pub fn cross_pairing(
    rows: &[MultiIndex],
    cols: &[MultiIndex],
    weight: &WeightSpec,
    cloud: &RadialCloud,
    rule: &QuadratureRule,
) -> Result<Vec<Complex64>> {
    let n = cloud.dim();
    if rows.iter().chain(cols).any(|a| a.dim() != n) {
        return Err(Error::Config("monomial exponent has the wrong dimension".into()));
    }
    let (nr, nc) = (rows.len(), cols.len());
    let scale = PI.powi(n as i32);
    let total = cloud.len();
    let chunks: Vec<(usize, usize)> = (0..total).step_by(CHUNK).map(|a| (a, (a + CHUNK).min(total))).collect();
    let toric = weight.is_toric();
    let fourier = if toric {
        None
    } else {
        Some(FourierTable::new(rows, cols, rule.angular(), n)?)
    };

    let partials: Vec<Result<Vec<Complex64>>> = chunks
        .par_iter()
        .map(|&(lo, hi)| {
            let mut acc = vec![Complex64::new(0.0, 0.0); nr * nc];
            let mut ln_s = vec![0.0; n];
            let mut coeffs = Vec::new();
            for i in lo..hi {
                let (s, w) = cloud.node(i);
                for (l, &si) in ln_s.iter_mut().zip(s) {
                    *l = si.ln();
                }
                let (w_t, shift) = match &fourier {
                    None => (weight.eval_toric(s), 0.0),
                    Some(tab) => {
                        let shift = tab.coefficients(s, &weight.base, &mut coeffs);
                        (weight.toric_extra(s), shift)
                    }
                };
                for a in 0..nr {
                    for b in 0..nc {
                        let entry = match &fourier {
                            None => {
                                if rows[a] != cols[b] {
                                    continue;
                                }
                                let e: f64 = rows[a].0.iter().zip(&ln_s).map(|(&k, l)| k as f64 * l).sum();
                                Complex64::new((e - w_t).exp(), 0.0)
                            }
                            Some(tab) => {
                                let e: f64 = rows[a]
                                    .0
                                    .iter()
                                    .zip(&cols[b].0)
                                    .zip(&ln_s)
                                    .map(|((&x, &y), l)| 0.5 * (x + y) as f64 * l)
                                    .sum();
                                coeffs[tab.index(&rows[a], &cols[b])] * (e - w_t - shift).exp()
                            }
                        };
                        if !(entry.re.is_finite() && entry.im.is_finite()) {
                            return Err(Error::SingularIntegrand { node: s.to_vec() });
                        }
                        acc[a * nc + b] += entry * w;
                    }
                }
            }
            Ok(acc)
        })
        .collect();

    let mut out = vec![Complex64::new(0.0, 0.0); nr * nc];
    for p in partials {
        for (o, v) in out.iter_mut().zip(p?) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(out)
}

/// Angular Fourier moments `ĉ_k(s) = mean_θ e^{i k·θ} e^{-base(s, θ)}`.
struct FourierTable {
    n: usize,
    angular: usize,
    kmax: i64,
    /// `twiddle[(k + kmax) * T + j] = e^{i k θ_j}`.
    twiddle: Vec<Complex64>,
}

impl FourierTable {
    fn new(rows: &[MultiIndex], cols: &[MultiIndex], angular: usize, n: usize) -> Result<Self> {
        if n > 2 {
            return Err(Error::UnsupportedModel(format!(
                "non-toric weights are supported in dimension ≤ 2, got {n}"
            )));
        }
        let kmax = rows
            .iter()
            .chain(cols)
            .flat_map(|a| a.0.iter().copied())
            .max()
            .unwrap_or(0) as i64;
        if angular as i64 <= 2 * kmax {
            return Err(Error::Config(format!(
                "angular order {angular} must exceed twice the largest exponent {kmax}"
            )));
        }
        let dtheta = std::f64::consts::TAU / angular as f64;
        let mut twiddle = Vec::with_capacity((2 * kmax as usize + 1) * angular);
        for k in -kmax..=kmax {
            for j in 0..angular {
                twiddle.push(Complex64::from_polar(1.0, k as f64 * dtheta * j as f64));
            }
        }
        Ok(FourierTable {
            n,
            angular,
            kmax,
            twiddle,
        })
    }

    fn width(&self) -> usize {
        2 * self.kmax as usize + 1
    }

    fn index(&self, row: &MultiIndex, col: &MultiIndex) -> usize {
        let mut idx = 0usize;
        for i in 0..self.n {
            let k = col.0[i] as i64 - row.0[i] as i64 + self.kmax;
            idx = idx * self.width() + k as usize;
        }
        idx
    }

    /// Fills `out` with the moments of `e^{-(base - shift)}` and returns `shift`.
    fn coefficients(&self, s: &[f64], base: &crate::weights::BaseWeight, out: &mut Vec<Complex64>) -> f64 {
        let t = self.angular;
        let dtheta = std::f64::consts::TAU / t as f64;
        let r: Vec<f64> = s.iter().map(|x| x.sqrt()).collect();
        let width = self.width();
        let tw = |k: usize, j: usize| self.twiddle[k * t + j];
        out.clear();
        if self.n == 1 {
            let vals: Vec<f64> = (0..t)
                .map(|j| base.eval(&[Complex64::from_polar(r[0], dtheta * j as f64)]))
                .collect();
            let shift = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let e: Vec<f64> = vals.iter().map(|v| (-(v - shift)).exp()).collect();
            for k in 0..width {
                let c: Complex64 = (0..t).map(|j| tw(k, j) * e[j]).sum();
                out.push(c / t as f64);
            }
            shift
        } else {
            let mut vals = vec![0.0; t * t];
            for j1 in 0..t {
                for j2 in 0..t {
                    let z = [
                        Complex64::from_polar(r[0], dtheta * j1 as f64),
                        Complex64::from_polar(r[1], dtheta * j2 as f64),
                    ];
                    vals[j1 * t + j2] = base.eval(&z);
                }
            }
            let shift = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let e: Vec<f64> = vals.iter().map(|v| (-(v - shift)).exp()).collect();
            let mut partial = vec![Complex64::new(0.0, 0.0); t * width];
            for j1 in 0..t {
                for k2 in 0..width {
                    partial[j1 * width + k2] = (0..t).map(|j2| tw(k2, j2) * e[j1 * t + j2]).sum();
                }
            }
            for k1 in 0..width {
                for k2 in 0..width {
                    let c: Complex64 = (0..t).map(|j1| tw(k1, j1) * partial[j1 * width + k2]).sum();
                    out.push(c / (t * t) as f64);
                }
            }
            shift
        }
    }
}

/// `∫_region z^α conj(z^β) e^{-w} dλ`.
pub fn monomial_pairing(
    alpha: &MultiIndex,
    beta: &MultiIndex,
    weight: &WeightSpec,
    domain: &DomainSpec,
    region: &Region,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    if weight.is_toric() && alpha != beta {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let cloud = RadialCloud::for_weight(domain, weight, region, rule)?;
    Ok(cross_pairing(
        std::slice::from_ref(beta),
        std::slice::from_ref(alpha),
        weight,
        &cloud,
        rule,
    )?[0])
}

/// Gram matrix `G_ab = ⟨e_b, e_a⟩ = ∫ z^{α_b} conj(z^{α_a}) e^{-w} dλ`.
pub fn pairing_matrix(
    basis: &[MultiIndex],
    weight: &WeightSpec,
    cloud: &RadialCloud,
    rule: &QuadratureRule,
) -> Result<HermitianMatrix> {
    let data = cross_pairing(basis, basis, weight, cloud, rule)?;
    Ok(HermitianMatrix::from_rows(basis.len(), data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monomial::graded_basis;
    use crate::weights::{BaseWeight, GreenData, RealPoly, Term};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn log_disc() -> (DomainSpec, LevelFunction) {
        let d = DomainSpec::unit(1);
        (d, LevelFunction::Green(GreenData::point(1)))
    }

    #[test]
    fn region_area_examples() {
        let (disc, g) = log_disc();
        let rule = QuadratureRule::new(40, 8).unwrap();
        let one = |_: &[f64]| 1.0;
        let sub = RadialCloud::build(
            &disc,
            &Region::Sublevel {
                level_fn: g.clone(),
                t: -1.0,
            },
            &[],
            &SingularHint::none(1),
            &rule,
        )
        .unwrap();
        assert!(rel(integrate_toric(one, &sub).unwrap(), PI * (-1f64).exp()) < 1e-13);
        let ann = RadialCloud::build(
            &disc,
            &Region::Annulus {
                level_fn: g.clone(),
                t: -3.0,
            },
            &[],
            &SingularHint::none(1),
            &rule,
        )
        .unwrap();
        let expect = PI * (-3f64).exp() * (std::f64::consts::E - 1.0);
        assert!(rel(integrate_toric(one, &ann).unwrap(), expect) < 1e-13);
        let all = RadialCloud::build(
            &disc,
            &Region::Sublevel { level_fn: g, t: 0.5 },
            &[],
            &SingularHint::none(1),
            &rule,
        )
        .unwrap();
        assert!(rel(integrate_toric(one, &all).unwrap(), PI) < 1e-14);
    }

    #[test]
    fn pairing_examples() {
        let disc = DomainSpec::unit(1);
        let rule = QuadratureRule::default_for(1);
        let w = WeightSpec::zero();
        let p = monomial_pairing(
            &MultiIndex(vec![0]),
            &MultiIndex(vec![0]),
            &w,
            &disc,
            &Region::Full,
            &rule,
        )
        .unwrap();
        assert!(rel(p.re, PI) < 1e-14);
        let p = monomial_pairing(
            &MultiIndex(vec![3]),
            &MultiIndex(vec![3]),
            &w,
            &disc,
            &Region::Full,
            &rule,
        )
        .unwrap();
        assert!(rel(p.re, PI / 4.0) < 1e-14);
        let bidisc = DomainSpec::unit(2);
        let w = WeightSpec::plain(BaseWeight::Radial {
            coefficients: vec![0.0, 1.0],
        });
        let p = monomial_pairing(
            &MultiIndex(vec![1, 0]),
            &MultiIndex(vec![0, 1]),
            &w,
            &bidisc,
            &Region::Full,
            &QuadratureRule::new(8, 4).unwrap(),
        )
        .unwrap();
        assert_eq!(p, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn bidisc_exactness() {
        let bidisc = DomainSpec::unit(2);
        let rule = QuadratureRule::new(20, 8).unwrap();
        let cloud = RadialCloud::for_weight(&bidisc, &WeightSpec::zero(), &Region::Full, &rule).unwrap();
        for a in graded_basis(2, 12) {
            let v = integrate_toric(|s| a.eval_sq_modulus(s), &cloud).unwrap();
            let expect = PI * PI / ((a.get(0) + 1) * (a.get(1) + 1)) as f64;
            assert!(rel(v, expect) < 1e-12, "{a}");
        }
    }

    #[test]
    fn additivity_on_bidisc_regions() {
        let bidisc = DomainSpec::unit(2);
        let rule = QuadratureRule::new(30, 8).unwrap();
        let psis = [
            SingularWeight::principal(Q::from_integer(1), MultiIndex(vec![1, 2]), &bidisc).unwrap(),
            SingularWeight::maximal_ideal_power(Q::from_integer(1), 1, &bidisc).unwrap(),
        ];
        let f = |s: &[f64]| s[0] * s[1] * s[1] + 0.5;
        for psi in &psis {
            let lf = LevelFunction::Psi(psi.clone());
            let hint = SingularHint::for_level_function(psi);
            let at =
                |r: Region| integrate_toric(f, &RadialCloud::build(&bidisc, &r, &[], &hint, &rule).unwrap()).unwrap();
            let t = -3.0;
            let lhs = at(Region::Sublevel {
                level_fn: lf.clone(),
                t,
            }) + at(Region::Annulus {
                level_fn: lf.clone(),
                t,
            });
            let rhs = at(Region::Sublevel {
                level_fn: lf.clone(),
                t: t + 1.0,
            });
            assert!(rel(lhs, rhs) < 1e-9, "{lhs} {rhs}");
        }
    }

    #[test]
    fn blowup_sublevel_volume() {
        // {log(s1+s2) + u < t} on the unit bidisc is the simplex s1+s2 < e^{t-u}.
        let bidisc = DomainSpec::unit(2);
        let psi = SingularWeight::maximal_ideal_power(Q::from_integer(1), 1, &bidisc).unwrap();
        let rule = QuadratureRule::new(30, 8).unwrap();
        let t = -1.0;
        let region = Region::Sublevel {
            level_fn: LevelFunction::Psi(psi.clone()),
            t,
        };
        let cloud = RadialCloud::build(&bidisc, &region, &[], &SingularHint::for_level_function(&psi), &rule).unwrap();
        let r = (t - psi.u()).exp();
        let v = integrate_toric(|_| 1.0, &cloud).unwrap();
        assert!(rel(v, PI * PI * r * r / 2.0) < 1e-12);
    }

    #[test]
    fn singular_power_is_integrated_exactly() {
        let disc = DomainSpec::unit(1);
        let psi = SingularWeight::principal(Q::from_integer(1), MultiIndex(vec![1]), &disc).unwrap();
        let w = WeightSpec::zero().with_multiplier(Q::new(1, 2), psi);
        let rule = QuadratureRule::new(20, 4).unwrap();
        let p = monomial_pairing(
            &MultiIndex(vec![0]),
            &MultiIndex(vec![0]),
            &w,
            &disc,
            &Region::Full,
            &rule,
        )
        .unwrap();
        assert!(rel(p.re, 2.0 * PI) < 1e-13);
    }

    #[test]
    fn kinked_weight_matches_closed_form() {
        let (disc, g) = log_disc();
        let rule = QuadratureRule::default_for(1);
        for &(t, p) in &[(-2.0, 64.0), (-8.0, 2.0), (-1.0, 8.0)] {
            let w = WeightSpec::zero().with_deformation(g.clone(), t, p);
            let v = monomial_pairing(
                &MultiIndex(vec![0]),
                &MultiIndex(vec![0]),
                &w,
                &disc,
                &Region::Full,
                &rule,
            )
            .unwrap();
            let et = f64::exp(t);
            let expect = PI * (et + (et - f64::exp(p * t)) / (p - 1.0));
            assert!(rel(v.re, expect) < 1e-12, "t {t} p {p}");
        }
    }

    #[test]
    fn non_toric_pairing_against_reference() {
        let disc = DomainSpec::unit(1);
        // w = Re z
        let w = WeightSpec::plain(BaseWeight::Pointwise {
            terms: RealPoly {
                terms: vec![Term {
                    coeff: 1.0,
                    x: vec![1],
                    y: vec![],
                    s: vec![],
                }],
            },
        });
        let basis = graded_basis(1, 1);
        let coarse = QuadratureRule::new(40, 16).unwrap();
        let fine = QuadratureRule::new(80, 32).unwrap();
        let g1 = pairing_matrix(
            &basis,
            &w,
            &RadialCloud::for_weight(&disc, &w, &Region::Full, &coarse).unwrap(),
            &coarse,
        )
        .unwrap();
        let g2 = pairing_matrix(
            &basis,
            &w,
            &RadialCloud::for_weight(&disc, &w, &Region::Full, &fine).unwrap(),
            &fine,
        )
        .unwrap();
        assert!(g1.get(0, 1).norm() > 0.1);
        for i in 0..2 {
            for j in 0..2 {
                assert!((g1.get(i, j) - g2.get(i, j)).norm() < 1e-13);
            }
        }
        // ⟨1, z⟩ = ∫ conj(z) e^{-Re z}: real and negative.
        assert!(g1.get(1, 0).re < 0.0 && g1.get(1, 0).im.abs() < 1e-15);
        // Pointwise path agrees with a direct trapezoid integral.
        let direct = integrate(&|z: &[Complex64]| (-z[0].re).exp(), &disc, &Region::Full, &fine).unwrap();
        assert!(rel(g1.get(0, 0).re, direct) < 1e-12);
    }

    #[test]
    fn too_few_angles_rejected() {
        let disc = DomainSpec::unit(1);
        let w = WeightSpec::plain(BaseWeight::Pointwise {
            terms: RealPoly {
                terms: vec![Term {
                    coeff: 1.0,
                    x: vec![1],
                    y: vec![],
                    s: vec![],
                }],
            },
        });
        let rule = QuadratureRule::new(10, 8).unwrap();
        let cloud = RadialCloud::for_weight(&disc, &w, &Region::Full, &rule).unwrap();
        assert!(matches!(
            pairing_matrix(&graded_basis(1, 4), &w, &cloud, &rule),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn three_dimensional_box_only() {
        let d = DomainSpec::unit(3);
        let rule = QuadratureRule::new(4, 4).unwrap();
        let cloud = RadialCloud::for_weight(&d, &WeightSpec::zero(), &Region::Full, &rule).unwrap();
        assert!(rel(integrate_toric(|_| 1.0, &cloud).unwrap(), PI.powi(3)) < 1e-14);
        let g = LevelFunction::Green(GreenData::point(3));
        let r = Region::Sublevel { level_fn: g, t: -1.0 };
        assert!(matches!(
            RadialCloud::for_weight(&d, &WeightSpec::zero(), &r, &rule),
            Err(Error::UnsupportedModel(_))
        ));
    }
}
