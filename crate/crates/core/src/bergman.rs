//! Truncated weighted Bergman spaces on polydiscs.
//!
//! A [`TruncatedSpace`] is spanned by the monomials `z^α`, `|α| ≤ D`, that
//! are square integrable for the weight. Coefficient vectors `c` represent
//! `F = Σ c_j e_j`, and with `G_ab = ⟨e_b, e_a⟩` the norm is `‖F‖² = c^* G c`.
//! A linear functional is stored as `v_j = ξ(e_j)`, so `ξ(F) = Σ c_j v_j`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, HermitianMatrix};
use crate::monomial::{graded_basis, HoloPoly, MultiIndex};
use crate::multiplier::{ideal_membership, Q};
use crate::quadrature::{pairing_matrix, QuadratureRule, RadialCloud, Region};
use crate::weights::{DomainSpec, GreenData, SingularWeight, WeightSpec};

/// Entrywise Hermitian tolerance for assembled Gram matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Relative tolerance for a functional to count as annihilating the ideal.
pub const ANNIHILATION_TOL: f64 = 1e-10;
const DEPENDENCE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct TruncatedSpace {
    domain: DomainSpec,
    weight: WeightSpec,
    degree: u32,
    basis: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    excluded: Vec<MultiIndex>,
    gram: HermitianMatrix,
    chol: Cholesky,
}

/// Assembles the Gram matrix of the integrable monomials of degree `≤ D`
/// and factors it.
pub fn build_space(
    domain: &DomainSpec,
    weight: &WeightSpec,
    degree: u32,
    rule: &QuadratureRule,
) -> Result<TruncatedSpace> {
    domain.validate()?;
    weight.validate(domain)?;
    let mut basis = Vec::new();
    let mut excluded = Vec::new();
    for alpha in graded_basis(domain.dimension, degree) {
        let integrable = match &weight.multiplier {
            Some(mt) if mt.m > Q::from_integer(0) => ideal_membership(&alpha, mt.m, &mt.psi)?,
            _ => true,
        };
        if integrable {
            basis.push(alpha);
        } else {
            excluded.push(alpha);
        }
    }
    if basis.is_empty() {
        return Err(Error::Config(
            "no monomial of the requested degree is square integrable".into(),
        ));
    }
    let cloud = RadialCloud::for_weight(domain, weight, &Region::Full, rule)?;
    let gram = pairing_matrix(&basis, weight, &cloud, rule)?;
    let chol = Cholesky::factor(&gram)?;
    let index = basis.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    Ok(TruncatedSpace {
        domain: domain.clone(),
        weight: weight.clone(),
        degree,
        basis,
        index,
        excluded,
        gram,
        chol,
    })
}

impl TruncatedSpace {
    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn weight(&self) -> &WeightSpec {
        &self.weight
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[MultiIndex] {
        &self.basis
    }

    /// Monomials of degree `≤ D` left out because they are not integrable.
    pub fn excluded(&self) -> &[MultiIndex] {
        &self.excluded
    }

    pub fn gram(&self) -> &HermitianMatrix {
        &self.gram
    }

    pub fn cholesky(&self) -> &Cholesky {
        &self.chol
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.index.get(alpha).copied()
    }

    /// Coefficient vector of a polynomial in this basis.
    pub fn coefficients(&self, f: &HoloPoly) -> Result<Vec<Complex64>> {
        let mut c = vec![Complex64::new(0.0, 0.0); self.dim()];
        for (alpha, coeff) in &f.terms {
            if *coeff == Complex64::new(0.0, 0.0) {
                continue;
            }
            let i = self.index_of(alpha).ok_or_else(|| Error::Degree {
                exponent: alpha.0.clone(),
            })?;
            c[i] += coeff;
        }
        Ok(c)
    }

    pub fn to_poly(&self, c: &[Complex64]) -> HoloPoly {
        HoloPoly {
            terms: self
                .basis
                .iter()
                .zip(c)
                .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
                .map(|(a, v)| (a.clone(), *v))
                .collect(),
        }
    }

    pub fn norm_sq(&self, c: &[Complex64]) -> f64 {
        self.gram.quadratic_form(c)
    }

    /// `⟨x, y⟩ = y^* G x`.
    pub fn inner(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        self.gram.sesquilinear(y, x)
    }

    /// `‖e_j‖`.
    pub fn monomial_norm(&self, j: usize) -> f64 {
        self.gram.get(j, j).re.sqrt()
    }
}

/// Membership flags of basis monomials in an ideal.
#[derive(Clone, Debug, PartialEq)]
pub struct IdealSubspace {
    members: Vec<bool>,
}

impl IdealSubspace {
    pub fn from_flags(members: Vec<bool>) -> Self {
        IdealSubspace { members }
    }

    /// Monomials vanishing on `V`.
    pub fn from_subvariety(space: &TruncatedSpace, green: &GreenData) -> Self {
        Self::from_flags(space.basis().iter().map(|a| green.vanishes_on_v(a)).collect())
    }

    /// Monomials in `𝓘(mψ)`.
    pub fn from_multiplier(space: &TruncatedSpace, m: Q, psi: &SingularWeight) -> Result<Self> {
        Ok(Self::from_flags(
            space
                .basis()
                .iter()
                .map(|a| ideal_membership(a, m, psi))
                .collect::<Result<_>>()?,
        ))
    }

    pub fn is_member(&self, j: usize) -> bool {
        self.members[j]
    }

    pub fn flags(&self) -> &[bool] {
        &self.members
    }

    pub fn member_indices(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&j| self.members[j]).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionResult {
    pub coefficients: Vec<Complex64>,
    pub norm_sq: f64,
    /// `max_β |⟨F₀, e_β⟩| / (‖F₀‖ ‖e_β‖)` over ideal members.
    pub orthogonality_defect: f64,
}

/// `F₀ = F° − P F°`, with `P` the orthogonal projection onto the ideal.
pub fn minimal_extension(
    space: &TruncatedSpace,
    ideal: &IdealSubspace,
    representative: &HoloPoly,
) -> Result<ExtensionResult> {
    if ideal.len() != space.dim() {
        return Err(Error::Config("ideal flags do not match the space dimension".into()));
    }
    let c = space.coefficients(representative)?;
    let members = ideal.member_indices();
    let mut f0 = c.clone();
    let in_ideal = c
        .iter()
        .enumerate()
        .all(|(j, v)| *v == Complex64::new(0.0, 0.0) || ideal.is_member(j));
    if in_ideal {
        f0.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    } else if !members.is_empty() {
        let gc = space.gram().mul_vec(&c);
        let rhs: Vec<Complex64> = members.iter().map(|&j| gc[j]).collect();
        let sub = space.gram().submatrix(&members);
        let y = Cholesky::factor(&sub)?.solve(&rhs);
        for (&j, yj) in members.iter().zip(&y) {
            f0[j] -= yj;
        }
    }
    let norm_sq = space.norm_sq(&f0).max(0.0);
    let gf = space.gram().mul_vec(&f0);
    let norm = norm_sq.sqrt();
    let orthogonality_defect = if norm == 0.0 {
        0.0
    } else {
        members
            .iter()
            .map(|&j| gf[j].norm() / (norm * space.monomial_norm(j)))
            .fold(0.0, f64::max)
    };
    Ok(ExtensionResult {
        coefficients: f0,
        norm_sq,
        orthogonality_defect,
    })
}

/// Values `v_j = ξ(e_j)` of a linear functional on the basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalVector {
    pub values: Vec<Complex64>,
}

impl FunctionalVector {
    pub fn new(values: Vec<Complex64>) -> Self {
        FunctionalVector { values }
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); dim])
    }

    pub fn from_fn(space: &TruncatedSpace, f: impl Fn(&MultiIndex) -> Complex64) -> Self {
        Self::new(space.basis().iter().map(f).collect())
    }

    /// Evaluation at a point.
    pub fn evaluation(space: &TruncatedSpace, z: &[Complex64]) -> Self {
        Self::from_fn(space, |a| a.eval(z))
    }

    /// The coefficient of `z^α`.
    pub fn coefficient(space: &TruncatedSpace, alpha: &MultiIndex) -> Result<Self> {
        let j = space.index_of(alpha).ok_or_else(|| Error::Degree {
            exponent: alpha.0.clone(),
        })?;
        let mut v = Self::zero(space.dim());
        v.values[j] = Complex64::new(1.0, 0.0);
        Ok(v)
    }

    pub fn apply(&self, c: &[Complex64]) -> Complex64 {
        self.values.iter().zip(c).map(|(v, x)| v * x).sum()
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        Self::new(self.values.iter().map(|v| v * lambda).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect())
    }

    /// Riesz representer `R` with `ξ(h) = ⟨h, R⟩`, i.e. `R = G^{-1} conj(v)`.
    pub fn representer(&self, space: &TruncatedSpace) -> Vec<Complex64> {
        let rhs: Vec<Complex64> = self.values.iter().map(|v| v.conj()).collect();
        space.cholesky().solve(&rhs)
    }
}

/// `‖ξ‖² = v^T G^{-1} conj(v)`.
pub fn dual_norm_sq(space: &TruncatedSpace, v: &FunctionalVector) -> f64 {
    let r = v.representer(space);
    v.values.iter().zip(&r).map(|(a, b)| (a * b).re).sum::<f64>().max(0.0)
}

pub fn dual_norm(space: &TruncatedSpace, v: &FunctionalVector) -> f64 {
    dual_norm_sq(space, v).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityResult {
    /// `max_i |ξ_i(F°)| / ‖ξ_i‖` over accepted family members.
    pub value: f64,
    /// Index into the input family attaining `value`.
    pub attaining_index: usize,
    /// Supremum over the span of the accepted family.
    pub span_sup: f64,
    /// Dimension of that span.
    pub span_rank: usize,
    pub rejected: Vec<usize>,
}

/// Quotient norm of `F°` modulo the ideal as a supremum over annihilating
/// functionals.
pub fn quotient_norm_via_duality(
    space: &TruncatedSpace,
    ideal: &IdealSubspace,
    representative: &HoloPoly,
    family: &[FunctionalVector],
) -> Result<DualityResult> {
    let c = space.coefficients(representative)?;
    let members = ideal.member_indices();
    let mut rejected = Vec::new();
    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut reps: Vec<Vec<Complex64>> = Vec::new();
    for (i, xi) in family.iter().enumerate() {
        if xi.values.len() != space.dim() {
            return Err(Error::Config(
                "functional vector does not match the space dimension".into(),
            ));
        }
        let norm = dual_norm(space, xi);
        let annihilates = members
            .iter()
            .all(|&j| xi.values[j].norm() <= ANNIHILATION_TOL * norm * space.monomial_norm(j));
        if norm == 0.0 || !annihilates {
            rejected.push(i);
            continue;
        }
        let ratio = xi.apply(&c).norm() / norm;
        if ratio > best.0 {
            best = (ratio, i);
        }
        reps.push(xi.representer(space));
    }
    if reps.is_empty() {
        return Err(Error::Config(
            "no functional in the family annihilates the ideal".into(),
        ));
    }

    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for r in reps {
        let original = space.norm_sq(&r).sqrt();
        let mut q = r;
        for _ in 0..2 {
            for e in &basis {
                let proj = space.inner(&q, e);
                for (qi, ei) in q.iter_mut().zip(e) {
                    *qi -= proj * ei;
                }
            }
        }
        let nq = space.norm_sq(&q).sqrt();
        if nq > DEPENDENCE_TOL * original {
            basis.push(q.into_iter().map(|x| x / nq).collect());
        }
    }
    let span_sup = basis.iter().map(|e| space.inner(&c, e).norm_sqr()).sum::<f64>().sqrt();
    Ok(DualityResult {
        value: best.0,
        attaining_index: best.1,
        span_sup,
        span_rank: basis.len(),
        rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{BaseWeight, RealPoly, Term};
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn one(n: usize) -> HoloPoly {
        HoloPoly::constant(n, Complex64::new(1.0, 0.0))
    }

    #[test]
    fn build_space_examples() {
        let disc = DomainSpec::unit(1);
        let rule = QuadratureRule::default_for(1);
        let sp = build_space(&disc, &WeightSpec::zero(), 1, &rule).unwrap();
        assert!(rel(sp.gram().get(0, 0).re, PI) < 1e-14);
        assert!(rel(sp.gram().get(1, 1).re, PI / 2.0) < 1e-14);
        assert!(sp.gram().is_diagonal());

        let toric = WeightSpec::plain(BaseWeight::Radial {
            coefficients: vec![0.3, 1.0, -0.2],
        });
        let sp = build_space(&disc, &toric, 5, &rule).unwrap();
        assert!(sp.gram().is_diagonal());

        let re_z = WeightSpec::plain(BaseWeight::Pointwise {
            terms: RealPoly {
                terms: vec![Term {
                    coeff: 1.0,
                    x: vec![1],
                    y: vec![],
                    s: vec![],
                }],
            },
        });
        let sp = build_space(&disc, &re_z, 1, &rule).unwrap();
        let reference = build_space(&disc, &re_z, 1, &QuadratureRule::new(240, 128).unwrap()).unwrap();
        assert!(sp.gram().get(0, 1).norm() > 0.1);
        assert!((sp.gram().get(0, 1) - reference.gram().get(0, 1)).norm() < 1e-13);
        assert!(sp.gram().hermitian_defect() <= HERMITIAN_TOL);
    }

    #[test]
    fn minimal_extension_examples() {
        let disc = DomainSpec::unit(1);
        let rule = QuadratureRule::default_for(1);
        let green = GreenData::point(1);
        let sp = build_space(&disc, &WeightSpec::zero(), 16, &rule).unwrap();
        let ideal = IdealSubspace::from_subvariety(&sp, &green);
        let r = minimal_extension(&sp, &ideal, &one(1)).unwrap();
        assert!(rel(r.norm_sq, PI) < 1e-14);
        assert_eq!(r.coefficients[0], Complex64::new(1.0, 0.0));

        let radial = WeightSpec::plain(BaseWeight::Radial {
            coefficients: vec![0.0, 1.0],
        });
        let sp = build_space(&disc, &radial, 16, &rule).unwrap();
        let r = minimal_extension(&sp, &ideal, &one(1)).unwrap();
        assert!(rel(r.norm_sq, PI * (1.0 - (-1f64).exp())) < 1e-13);

        let z = HoloPoly::monomial(MultiIndex(vec![3]));
        let r = minimal_extension(&sp, &ideal, &z).unwrap();
        assert_eq!(r.norm_sq, 0.0);

        let far = HoloPoly::monomial(MultiIndex(vec![17]));
        assert!(matches!(
            minimal_extension(&sp, &ideal, &far),
            Err(Error::Degree { .. })
        ));
    }

    #[test]
    fn non_toric_projection_is_orthogonal() {
        let disc = DomainSpec::unit(1);
        // |z - 1/2|² = s - Re z + 1/4
        let w = WeightSpec::plain(BaseWeight::Pointwise {
            terms: RealPoly {
                terms: vec![
                    Term {
                        coeff: 1.0,
                        x: vec![],
                        y: vec![],
                        s: vec![1],
                    },
                    Term {
                        coeff: -1.0,
                        x: vec![1],
                        y: vec![],
                        s: vec![],
                    },
                    Term {
                        coeff: 0.25,
                        x: vec![],
                        y: vec![],
                        s: vec![],
                    },
                ],
            },
        });
        let sp = build_space(&disc, &w, 12, &QuadratureRule::default_for(1)).unwrap();
        let ideal = IdealSubspace::from_subvariety(&sp, &GreenData::point(1));
        let r = minimal_extension(&sp, &ideal, &one(1)).unwrap();
        assert!(r.orthogonality_defect < 1e-8);
        assert!(r.norm_sq < PI * (-0.25f64).exp());
    }

    #[test]
    fn dual_norm_examples() {
        let disc = DomainSpec::unit(1);
        let sp = build_space(&disc, &WeightSpec::zero(), 9, &QuadratureRule::default_for(1)).unwrap();
        let ev = FunctionalVector::evaluation(&sp, &[Complex64::new(0.0, 0.0)]);
        assert!(rel(dual_norm(&sp, &ev), 1.0 / PI.sqrt()) < 1e-14);
        assert_eq!(dual_norm(&sp, &FunctionalVector::zero(sp.dim())), 0.0);
        let v = FunctionalVector::new((0..sp.dim()).map(|j| Complex64::new(j as f64, 1.0)).collect());
        let diag: f64 = (0..sp.dim())
            .map(|j| v.values[j].norm_sqr() / sp.gram().get(j, j).re)
            .sum();
        assert!(rel(dual_norm_sq(&sp, &v), diag) < 1e-13);
    }

    #[test]
    fn duality_examples() {
        let disc = DomainSpec::unit(1);
        let sp = build_space(&disc, &WeightSpec::zero(), 8, &QuadratureRule::default_for(1)).unwrap();
        let ideal = IdealSubspace::from_subvariety(&sp, &GreenData::point(1));
        let ev = FunctionalVector::evaluation(&sp, &[Complex64::new(0.0, 0.0)]);
        let r = quotient_norm_via_duality(&sp, &ideal, &one(1), std::slice::from_ref(&ev)).unwrap();
        assert!(rel(r.value, PI.sqrt()) < 1e-14);
        assert!(rel(r.span_sup, PI.sqrt()) < 1e-14);
        let r7 = quotient_norm_via_duality(&sp, &ideal, &one(1), &[ev.scale(Complex64::new(7.0, 0.0))]).unwrap();
        assert!(rel(r7.value, r.value) < 1e-14);

        // Annihilates the ideal and kills F° = 1 as well: not a member of the
        // admissible family, so it is rejected.
        let kills = FunctionalVector::zero(sp.dim());
        assert!(quotient_norm_via_duality(&sp, &ideal, &one(1), &[kills]).is_err());

        // Evaluation at a nonzero point does not annihilate the ideal.
        let off = FunctionalVector::evaluation(&sp, &[Complex64::new(0.5, 0.0)]);
        let r = quotient_norm_via_duality(&sp, &ideal, &one(1), &[ev, off]).unwrap();
        assert_eq!(r.rejected, vec![1]);
    }

    #[test]
    fn multiplier_weight_filters_basis() {
        let disc = DomainSpec::unit(1);
        let psi = SingularWeight::principal(Q::from_integer(1), MultiIndex(vec![1]), &disc).unwrap();
        let w = WeightSpec::zero().with_multiplier(Q::from_integer(2), psi);
        let sp = build_space(&disc, &w, 6, &QuadratureRule::default_for(1)).unwrap();
        assert_eq!(sp.excluded(), &[MultiIndex(vec![0]), MultiIndex(vec![1])]);
        // ∫ s^{α-2} ds = 1/(α-1)
        for (j, a) in sp.basis().iter().enumerate() {
            assert!(rel(sp.gram().get(j, j).re, PI / (a.get(0) as f64 - 1.0)) < 1e-12);
        }
    }
}
