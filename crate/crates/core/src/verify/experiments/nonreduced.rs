use num_complex::Complex64;

use crate::bergman::{build_space, minimal_extension, IdealSubspace};
use crate::error::{Error, Result};
use crate::functionals::{xi_boundedness_sweep, AnnulusFunctional};
use crate::monomial::{graded_basis, HoloPoly, MultiIndex};
use crate::multiplier::{ideal_membership, jumping_numbers, to_f64, DivisorTag, JumpSpectrum, Q};
use crate::quadrature::{pairing_matrix, QuadratureRule, RadialCloud, Region};
use crate::verify::config::{require_ascending, require_descending, resolve_poly, ExperimentConfig};
use crate::verify::extrapolate::extrapolate_exponential;
use crate::verify::report::{CheckKind, ConvergenceTable, Series, SeriesRow, VerificationReport};
use crate::weights::{DomainSpec, LevelFunction, ModelFamily, SingularWeight, WeightSpec};

use super::common::{check_inputs, fmt_list};
use super::monotone_t::fmt_p;
use super::Experiment;

/// Quotient norms modulo `𝓘(m_p ψ)` at a jump, their sublevel bounds,
/// the annulus functional and the boundedness sweep.
pub struct Nonreduced;

const DEFAULT_ANNULUS_T: [f64; 5] = [-6.0, -8.0, -10.0, -12.0, -14.0];
const DEFAULT_DECAY_T: f64 = -12.0;
const ERROR_FLOOR: f64 = 1e-12;

fn spectrum_through(psi: &SingularWeight, p: usize, m_max: Option<Q>) -> Result<JumpSpectrum> {
    if let Some(m) = m_max {
        let s = jumping_numbers(psi.resolution(), m);
        return if s.len() >= p {
            Ok(s)
        } else {
            Err(Error::Config(format!("m_max = {m} yields fewer than {p} jumps")))
        };
    }
    let mut m = Q::from_integer(2);
    while m <= Q::from_integer(4096) {
        let s = jumping_numbers(psi.resolution(), m);
        if s.len() >= p {
            return Ok(s);
        }
        m *= 2;
    }
    Err(Error::Config(format!("jump index {p} is beyond the supported range")))
}

fn with_multiplier(w: WeightSpec, m: Q, psi: &SingularWeight) -> WeightSpec {
    if m > Q::from_integer(0) {
        w.with_multiplier(m, psi.clone())
    } else {
        w
    }
}

fn sublevel_norm(
    domain: &DomainSpec,
    weight: &WeightSpec,
    psi: &SingularWeight,
    f: &HoloPoly,
    s: f64,
    rule: &QuadratureRule,
) -> Result<f64> {
    let region = Region::Sublevel {
        level_fn: LevelFunction::Psi(psi.clone()),
        t: s,
    };
    let cloud = RadialCloud::for_weight(domain, weight, &region, rule)?;
    let basis: Vec<MultiIndex> = f.terms.iter().map(|(a, _)| a.clone()).collect();
    let coeffs: Vec<Complex64> = f.terms.iter().map(|(_, c)| *c).collect();
    Ok(pairing_matrix(&basis, weight, &cloud, rule)?.quadratic_form(&coeffs))
}

/// `h · z_axis`, landing in the next ideal.
fn push_into_next_ideal(h: &HoloPoly, axis: usize) -> HoloPoly {
    HoloPoly {
        terms: h
            .terms
            .iter()
            .map(|(a, c)| {
                let mut e = a.0.clone();
                e[axis] += 1;
                (MultiIndex(e), *c)
            })
            .collect(),
    }
}

impl Experiment for Nonreduced {
    fn name(&self) -> &'static str {
        "nonreduced"
    }

    fn summary(&self) -> &'static str {
        "quotient norms modulo multiplier ideals at a jumping number"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<VerificationReport> {
        let domain = cfg.domain()?;
        let n = domain.dimension;
        let psi = cfg.psi(&domain)?;
        let p = cfg.jump.unwrap_or(1);
        if p == 0 {
            return Err(Error::Config("jump index starts at 1".into()));
        }
        let m_max = cfg.m_max.as_ref().map(|m| m.resolve()).transpose()?;
        let spectrum = spectrum_through(&psi, p, m_max)?;
        let jump = spectrum.jump(p).expect("spectrum covers p").clone();
        let m_p = jump.m;
        let m_prev = spectrum.previous(p);
        let gap = to_f64(m_p - m_prev);
        let degree = cfg.degree();
        let rule = cfg.rule()?;
        let tol = cfg.tolerances.clone();
        let s_grid = cfg.grid("s")?;
        require_descending("s", &s_grid)?;
        if s_grid.iter().any(|s| !(*s <= 0.0)) {
            return Err(Error::Config("grids.s must be ≤ 0".into()));
        }

        let f = match &cfg.f {
            Some(t) => resolve_poly(t, n)?,
            None => {
                let mut found = None;
                for b in graded_basis(n, degree) {
                    if ideal_membership(&b, m_prev, &psi)? && !ideal_membership(&b, m_p, &psi)? {
                        found = Some(b);
                        break;
                    }
                }
                HoloPoly::monomial(found.ok_or_else(|| {
                    Error::Config("no monomial of the truncated basis represents a nonzero class".into())
                })?)
            }
        };
        for (a, _) in &f.terms {
            if !ideal_membership(a, m_prev, &psi)? {
                return Err(Error::Config(format!(
                    "representative monomial {a} is outside 𝓘(m_(p-1) ψ)"
                )));
            }
        }

        let mut report = VerificationReport::new(self.name());
        check_inputs(&mut report, cfg, &domain, None);
        report.metric("jump_index", p);
        report.metric("m_p", m_p.to_string());
        report.metric("m_prev", m_prev.to_string());
        report.metric(
            "representative",
            format!(
                "{:?}",
                f.terms
                    .iter()
                    .map(|(a, c)| (a.to_string(), [c.re, c.im]))
                    .collect::<Vec<_>>()
            ),
        );

        // Quotient norm in A²(Ω, φ + m_{p−1}ψ) modulo 𝓘(m_p ψ).
        let lhs_weight = with_multiplier(WeightSpec::plain(cfg.weight.clone()), m_prev, &psi);
        let quotient = |deg: u32, rep: &HoloPoly| -> Result<(f64, f64)> {
            let space = build_space(&domain, &lhs_weight, deg, &rule)?;
            let ideal = IdealSubspace::from_multiplier(&space, m_p, &psi)?;
            let ext = minimal_extension(&space, &ideal, rep)?;
            Ok((ext.norm_sq, ext.orthogonality_defect))
        };
        let (lhs, defect) = quotient(degree, &f)?;
        report.metric("lhs", lhs);
        report.check_sequence(
            "minimizer_orthogonality",
            CheckKind::Equality,
            "F₀ is orthogonal to 𝓘(m_p ψ)",
            defect,
            1e-8,
            format!("largest normalized pairing {defect:e}"),
        );
        let mut by_degree = Vec::new();
        if degree >= 2 && f.max_degree() <= degree - 2 {
            by_degree.push(((degree - 2) as f64, quotient(degree - 2, &f)?.0));
        }
        by_degree.push((degree as f64, lhs));
        report
            .convergence
            .push(ConvergenceTable::new("lhs_vs_degree", "degree", &by_degree));

        let shift_member = graded_basis(n, degree)
            .into_iter()
            .find(|b| ideal_membership(b, m_p, &psi).unwrap_or(false));
        if let Some(b) = shift_member {
            let shifted = f.add(&HoloPoly {
                terms: vec![(b, Complex64::new(0.37, 0.21))],
            });
            let (lhs2, _) = quotient(degree, &shifted)?;
            report.check_close(
                "class_invariance",
                "the quotient norm depends only on the class of F°",
                lhs2,
                lhs,
                1e-9,
            );
        }

        // Sublevel bounds e^{−Δs} ∫_{Ω_s} |F°|² e^{−φ − m_{p−1}ψ}.
        let mut bounds = Vec::with_capacity(s_grid.len());
        for &s in &s_grid {
            bounds.push((
                s,
                (-gap * s).exp() * sublevel_norm(&domain, &lhs_weight, &psi, &f, s, &rule)?,
            ));
        }
        let mut series = Series::new("sublevel_bound", "s");
        for &(s, b) in &bounds {
            series.push(
                SeriesRow::new(s, lhs)
                    .bound(b)
                    .scaled(lhs / b)
                    .verdict(lhs <= b * (1.0 + tol.inequality)),
            );
        }
        report.series.push(series);
        let min_bound = bounds.iter().map(|b| b.1).fold(f64::INFINITY, f64::min);
        report.check_le(
            "finite_s_bounds",
            "quotient norm ≤ e^{−(m_p − m_(p-1)) s} ∫_{Ω_s} |F°|² e^{−φ − m_(p-1) ψ} for every s",
            lhs,
            min_bound,
            tol.inequality,
        );
        if bounds.len() >= 4 {
            let ex = extrapolate_exponential(&bounds)?;
            report.metric("limsup_estimate", ex.limit);
            report.metric("limsup_error_bar", ex.error_bar);
            report.metric("limsup_rate", ex.rate);
            report.metric("limsup_indeterminate", ex.indeterminate);
            if let Some(r) = &ex.reason {
                report.metric("limsup_note", r);
            }
            if !ex.indeterminate {
                report.check_le(
                    "limsup_bound",
                    "quotient norm ≤ extrapolated limsup of the sublevel bounds",
                    lhs,
                    ex.limit + ex.error_bar,
                    tol.inequality,
                );
            }
        } else {
            report.metric("limsup_indeterminate", true);
            report.metric("limsup_note", "fewer than 4 grid points");
        }

        // Quotient norms under φ + q max(ψ − s*, 0) + m_{p−1}ψ.
        if let Some(q_grid) = cfg.grids.q.clone() {
            require_ascending("q", &q_grid)?;
            if q_grid.iter().any(|q| !(*q >= 0.0 && q.is_finite())) {
                return Err(Error::Config("grids.q must be nonnegative".into()));
            }
            let s_star = cfg.q_at_s.unwrap_or(s_grid[0]);
            if !(s_star <= 0.0) {
                return Err(Error::Config("q_at_s must be ≤ 0".into()));
            }
            let floor = sublevel_norm(&domain, &lhs_weight, &psi, &f, s_star, &rule)?;
            let scale = (-gap * s_star).exp();
            let mut rows = Vec::new();
            for &q in &q_grid {
                let w = with_multiplier(
                    WeightSpec::plain(cfg.weight.clone()).with_deformation(LevelFunction::Psi(psi.clone()), s_star, q),
                    m_prev,
                    &psi,
                );
                let space = build_space(&domain, &w, degree, &rule)?;
                let ideal = IdealSubspace::from_multiplier(&space, m_p, &psi)?;
                let ext = minimal_extension(&space, &ideal, &f)?;
                let plain = space.norm_sq(&space.coefficients(&f)?);
                rows.push((q, ext.norm_sq, plain));
            }
            let logs: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
            let rise = logs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            let mut series = Series::new("q_chain", "q");
            for &(q, nq, _) in &rows {
                series.push(
                    SeriesRow::new(q, nq)
                        .bound(lhs)
                        .scaled(scale * nq)
                        .verdict(lhs <= scale * nq * (1.0 + tol.inequality)),
                );
            }
            report.series.push(series);
            let norms: Vec<f64> = rows.iter().map(|r| r.1).collect();
            report.check_sequence(
                "q_chain_monotone",
                CheckKind::Monotone,
                "deformed quotient norms are nonincreasing in q",
                rise,
                tol.monotone,
                format!("norms {}", fmt_list(&norms)),
            );
            let min_scaled = rows.iter().map(|r| scale * r.1).fold(f64::INFINITY, f64::min);
            report.check_le(
                "q_chain_bound",
                "quotient norm ≤ e^{−(m_p − m_(p-1)) s} × deformed quotient norm",
                lhs,
                min_scaled,
                tol.inequality,
            );
            let min_plain = rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
            report.check_le(
                "q_chain_floor",
                "∫_{Ω_s} |F°|² e^{−φ − m_(p-1) ψ} ≤ ‖F°‖² in the deformed weight",
                floor,
                min_plain,
                tol.inequality,
            );
            report.metric("q_at_s", s_star);
            let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.2)).collect();
            report.convergence.push(ConvergenceTable::new("norm_vs_q", "q", &pts));
        }

        self.annulus_and_sweep(
            cfg,
            &mut report,
            &psi,
            &spectrum,
            p,
            &jump.divisors,
            &s_grid,
            gap,
            degree,
            &rule,
        )?;
        Ok(report)
    }
}

impl Nonreduced {
    #[allow(clippy::too_many_arguments)]
    fn annulus_and_sweep(
        &self,
        cfg: &ExperimentConfig,
        report: &mut VerificationReport,
        psi: &SingularWeight,
        spectrum: &JumpSpectrum,
        p: usize,
        divisors: &[usize],
        s_grid: &[f64],
        gap: f64,
        degree: u32,
        rule: &QuadratureRule,
    ) -> Result<()> {
        let n = psi.dimension();
        let tol = &cfg.tolerances;
        let divisor = divisors[0];
        let one = HoloPoly::constant(n, Complex64::new(1.0, 0.0));
        let xi = AnnulusFunctional::new(psi, cfg.weight.clone(), spectrum, p, divisor, one)?;
        let h = xi.g_tilde().clone();
        let limit = match xi.limit(&h) {
            Ok(v) => v,
            Err(e @ (Error::Divergent(_) | Error::UnsupportedModel(_))) => {
                report.metric("annulus_status", e.to_string());
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        report.metric("annulus_status", "closed form available");
        report.metric("annulus_limit", [limit.re, limit.im]);

        let t_grid = cfg.grids.t.clone().unwrap_or_else(|| DEFAULT_ANNULUS_T.to_vec());
        require_descending("t", &t_grid)?;
        let mut errs = Vec::with_capacity(t_grid.len());
        let mut series = Series::new("annulus", "t");
        for &t in &t_grid {
            let v = xi.value(&h, t, rule)?;
            let err = (v - limit).norm();
            errs.push(err);
            series.push(
                SeriesRow::new(t, v.re)
                    .bound(limit.re)
                    .scaled(err)
                    .verdict(err <= tol.annulus),
            );
        }
        report.series.push(series);
        let floor = ERROR_FLOOR * limit.norm().max(1.0);
        let worst_growth = errs
            .windows(2)
            .map(|w| if w[1] <= floor { 0.0 } else { w[1] - w[0] })
            .fold(0.0, f64::max);
        report.check_abs(
            "annulus_agreement",
            "annulus values approach the closed-form limit",
            errs[errs.len() - 1],
            0.0,
            tol.annulus,
        );
        report.check_sequence(
            "annulus_error_decreasing",
            CheckKind::Monotone,
            "|value − limit| is nonincreasing as t → −∞",
            worst_growth,
            0.0,
            format!("errors {}", fmt_list(&errs)),
        );
        let axis = match (psi.family(), &psi.resolution().divisors[divisor].tag) {
            (ModelFamily::PrincipalMonomial, DivisorTag::Coordinate(i)) => *i,
            _ => 0,
        };
        let h_in = push_into_next_ideal(&h, axis);
        let decay_t = cfg.decay_t.unwrap_or(DEFAULT_DECAY_T);
        let v_in = xi.value(&h_in, decay_t, rule)?;
        report.check_abs(
            "annulus_next_ideal_decay",
            &format!("annulus value on 𝓘(m_p ψ) is negligible at t = {decay_t}"),
            v_in.norm(),
            0.0,
            tol.decay,
        );

        let q = cfg.sweep_q.unwrap_or(4.0 * gap);
        let sweep = xi_boundedness_sweep(&xi, s_grid, q, degree, rule, tol.monotone)?;
        let first = sweep.rows[0].scaled;
        let mut series = Series::new(format!("boundedness_q{}", fmt_p(q)), "s");
        for (i, r) in sweep.rows.iter().enumerate() {
            let ok = r.scaled <= first * (1.0 + tol.monotone)
                && (i == 0 || r.scaled <= sweep.rows[i - 1].scaled * (1.0 + tol.monotone));
            series.push(
                SeriesRow::new(r.s, r.dual_norm_sq)
                    .bound(first)
                    .scaled(r.scaled)
                    .verdict(ok),
            );
        }
        report.series.push(series);
        let scaled: Vec<f64> = sweep.rows.iter().map(|r| r.scaled).collect();
        report.check_exact(
            "sweep_bounded",
            "e^{(m_p − m_(p-1)) s} ‖ξ_g‖² stays bounded as s → −∞",
            sweep.bounded,
            format!("max {:e}, values {}", sweep.max_scaled, fmt_list(&scaled)),
        );
        report.check_exact(
            "sweep_nondecreasing",
            "e^{(m_p − m_(p-1)) s} ‖ξ_g‖² is nondecreasing in s",
            sweep.nondecreasing,
            format!("largest increase toward −∞ {:e}", sweep.worst_increase),
        );
        report.metric("sweep_q", q);
        Ok(())
    }
}
