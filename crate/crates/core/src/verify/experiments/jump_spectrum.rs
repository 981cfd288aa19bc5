use serde_json::json;

use crate::error::{Error, Result};
use crate::monomial::{graded_basis, MultiIndex};
use crate::multiplier::{
    ideal_membership, jumping_numbers, member_by_staircase, rational_pair, staircase_height, staircase_orders,
    threshold_distance, to_f64, DivisorTag, MembershipOracle, OracleVerdict, ResolutionData, Q,
};
use crate::quadrature::QuadratureRule;
use crate::verify::config::ExperimentConfig;
use crate::verify::report::{Series, SeriesRow, VerificationReport};

use super::Experiment;

/// Jumping numbers, vanishing staircases and a brute-force membership oracle.
pub struct JumpSpectrumExperiment;

/// A monomial in `𝓘(m_{p−1}ψ)` but not in `𝓘(m_p ψ)`: the staircase at
/// `m_p` lowered by one step along the realizing divisor.
fn drop_witness(res: &ResolutionData, n: usize, m: Q, divisor: usize) -> MultiIndex {
    let orders = staircase_orders(res, m).orders;
    match res.divisors[divisor].tag {
        DivisorTag::Coordinate(axis) => {
            let mut e = vec![0u32; n];
            for (k, d) in res.divisors.iter().enumerate() {
                if let DivisorTag::Coordinate(i) = d.tag {
                    e[i] = orders[k];
                }
            }
            e[axis] = orders[divisor].saturating_sub(1);
            MultiIndex(e)
        }
        DivisorTag::Exceptional => {
            let mut e = vec![0u32; n];
            e[0] = orders[divisor].saturating_sub(1);
            MultiIndex(e)
        }
    }
}

/// Instances closer than this to a threshold are not decidable numerically.
const MARGIN: f64 = 1e-3;

impl Experiment for JumpSpectrumExperiment {
    fn name(&self) -> &'static str {
        "jump-spectrum"
    }

    fn summary(&self) -> &'static str {
        "jumping numbers and staircases against a shell-integral oracle"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<VerificationReport> {
        let domain = cfg.domain()?;
        let n = domain.dimension;
        let psi = cfg.psi(&domain)?;
        let res = psi.resolution().clone();
        let m_max = match &cfg.m_max {
            Some(m) => m.resolve()?,
            None => Q::from_integer(4),
        };
        if m_max <= Q::from_integer(0) {
            return Err(Error::Config("m_max must be positive".into()));
        }
        let spectrum = jumping_numbers(&res, m_max);
        let mut report = VerificationReport::new(self.name());

        // Staircase identity s_k(m_p) − 1 = (m_p c a_k − b_k) − 1.
        let mut identity_ok = true;
        let mut staircases = Vec::new();
        let mut series = Series::new("spectrum", "p");
        for (i, jump) in spectrum.jumps.iter().enumerate() {
            let st = staircase_orders(&res, jump.m);
            let mut ok = !jump.divisors.is_empty();
            for &k in &jump.divisors {
                let h = staircase_height(&res, k, jump.m);
                ok &= h == Q::from_integer(st.orders[k] as i64) && h >= Q::from_integer(1);
            }
            identity_ok &= ok;
            let prev = spectrum.previous(i + 1);
            series.push(
                SeriesRow::new((i + 1) as f64, to_f64(jump.m))
                    .bound(to_f64(prev))
                    .verdict(ok),
            );
            staircases.push(json!({
                "m": rational_pair(jump.m),
                "divisors": jump.divisors,
                "orders": st.orders,
                "previous_orders": staircase_orders(&res, prev).orders,
            }));
        }
        report.series.push(series);
        report.check_exact(
            "staircase_identity",
            "at each jump the realizing divisors satisfy m c a_k − b_k = s_k(m) ≥ 1",
            identity_ok,
            format!("{} jumps up to m = {m_max}", spectrum.len()),
        );

        let basis = graded_basis(n, cfg.oracle.max_degree);
        let mut const_ok = true;
        let mut drop_ok = true;
        let mut witnesses = Vec::new();
        let mut prev = Q::from_integer(0);
        for jump in &spectrum.jumps {
            let mid = (prev + jump.m) / Q::from_integer(2);
            for b in &basis {
                let at_prev = ideal_membership(b, prev, &psi)?;
                const_ok &= at_prev == ideal_membership(b, mid, &psi)?;
                const_ok &= at_prev == member_by_staircase(&res, b, prev);
                const_ok &= !ideal_membership(b, jump.m, &psi)? || at_prev;
            }
            let w = drop_witness(&res, n, jump.m, jump.divisors[0]);
            let dropped = ideal_membership(&w, prev, &psi)? && !ideal_membership(&w, jump.m, &psi)?;
            drop_ok &= dropped;
            witnesses.push(w.to_string());
            prev = jump.m;
        }
        report.check_exact(
            "ideal_constant_between_jumps",
            "𝓘(mψ) is constant on [m_(p-1), m_p) and agrees with the staircase",
            const_ok,
            format!("monomials up to degree {}", cfg.oracle.max_degree),
        );
        report.check_exact(
            "ideal_drops_at_jumps",
            "𝓘(mψ) strictly shrinks at every jump",
            drop_ok,
            format!("witnesses {witnesses:?}"),
        );

        // Brute-force integrability versus the exact rule.
        let rule = QuadratureRule::new(cfg.oracle.radial, 1)?;
        let oracle = MembershipOracle::new(&psi, &rule)?;
        let den = cfg.oracle.denominator;
        let steps = (m_max * Q::from_integer(den)).floor().to_integer();
        let (mut agree, mut disagree, mut undecided, mut skipped) = (0usize, 0usize, 0usize, 0usize);
        let mut mismatches = Vec::new();
        for j in 0..=steps {
            let m = Q::new(j, den);
            for b in &basis {
                if to_f64(threshold_distance(b, m, &res)).abs() < MARGIN {
                    skipped += 1;
                    continue;
                }
                let exact = ideal_membership(b, m, &psi)?;
                match oracle.verdict(b, m) {
                    OracleVerdict::Indeterminate => undecided += 1,
                    v if v.as_member() == Some(exact) => agree += 1,
                    _ => {
                        disagree += 1;
                        if mismatches.len() < 16 {
                            mismatches.push(format!("β = {b}, m = {m}"));
                        }
                    }
                }
            }
        }
        let decided = agree + disagree;
        report.check_exact(
            "oracle_agreement",
            "shell-integral oracle agrees with the exact rule on every decidable instance",
            disagree == 0 && decided > 0,
            format!("{agree}/{decided} agree, {undecided} indeterminate, {skipped} on thresholds; {mismatches:?}"),
        );
        report.metric("oracle_agree", agree);
        report.metric("oracle_disagree", disagree);
        report.metric("oracle_indeterminate", undecided);
        report.metric("oracle_threshold_skipped", skipped);
        report.metric("jump_count", spectrum.len());
        report.spectra = Some(json!({
            "c": rational_pair(res.c),
            "divisors": res.divisors,
            "m_max": rational_pair(m_max),
            "jumps": staircases,
        }));
        Ok(report)
    }
}
