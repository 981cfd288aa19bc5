use crate::error::{Error, Result};
use crate::functionals::SubvarietyFunctional;
use crate::quadrature::QuadratureRule;
use crate::verify::config::ExperimentConfig;
use crate::verify::report::{ConvergenceTable, Series, SeriesRow, VerificationReport};
use crate::weights::WeightSpec;

use super::common::{check_inputs, extension_norm};
use super::Experiment;

/// Minimal extension norm against `σ_k ∫_V |f|² e^{−φ + k B}`.
pub struct OtOptimal;

impl Experiment for OtOptimal {
    fn name(&self) -> &'static str {
        "ot-optimal"
    }

    fn summary(&self) -> &'static str {
        "minimal extension norm versus the sharp bound along V"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<VerificationReport> {
        let domain = cfg.domain()?;
        let green = cfg.green()?;
        let f = cfg.f_or_one(domain.dimension)?;
        let degree = cfg.degree();
        if degree < 2 {
            return Err(Error::Config("ot-optimal needs degree ≥ 2".into()));
        }
        let rule = cfg.rule()?;
        let tol = &cfg.tolerances;
        let mut report = VerificationReport::new(self.name());
        check_inputs(&mut report, cfg, &domain, Some(&green));

        let xi = SubvarietyFunctional::new(green.clone(), f.clone(), cfg.weight.clone())?;
        let rhs = xi.apply(&f, &domain, &rule)?.re;
        let weight = WeightSpec::plain(cfg.weight.clone());

        let mut by_degree = Vec::new();
        let mut series = Series::new("extension", "degree");
        let mut defect = 0.0f64;
        for d in [degree - 2, degree] {
            let (lhs, def, _) = extension_norm(&domain, &weight, &green, &f, d, &rule)?;
            defect = defect.max(def);
            series.push(
                SeriesRow::new(d as f64, lhs)
                    .bound(rhs)
                    .scaled(lhs / rhs)
                    .verdict(lhs <= rhs * (1.0 + tol.inequality)),
            );
            by_degree.push((d as f64, lhs));
        }
        let lhs = by_degree[1].1;
        let coarse_rule = QuadratureRule::new((rule.radial() / 2).max(1), rule.angular())?;
        let (lhs_coarse, _, _) = extension_norm(&domain, &weight, &green, &f, degree, &coarse_rule)?;

        report.check_le(
            "extension_bound",
            "‖F₀‖² ≤ σ_k ∫_V |f|² e^{−φ + kB}",
            lhs,
            rhs,
            tol.inequality,
        );
        report.check_close(
            "degree_convergence",
            "minimal norm is stable under D − 2 → D",
            by_degree[0].1,
            lhs,
            tol.inequality,
        );
        report.check_sequence(
            "minimizer_orthogonality",
            crate::verify::report::CheckKind::Equality,
            "F₀ is orthogonal to the ideal of V",
            defect,
            1e-8,
            format!("largest normalized pairing {defect:e}"),
        );
        report.metric("lhs", lhs);
        report.metric("rhs", rhs);
        report.metric("ratio", lhs / rhs);
        report.metric("sharp", (lhs / rhs - 1.0).abs() <= tol.equality);
        report.metric("codimension", green.codim());
        report.series.push(series);
        report
            .convergence
            .push(ConvergenceTable::new("lhs_vs_degree", "degree", &by_degree));
        report.convergence.push(ConvergenceTable::new(
            "lhs_vs_quadrature",
            "radial order",
            &[(coarse_rule.radial() as f64, lhs_coarse), (rule.radial() as f64, lhs)],
        ));
        Ok(report)
    }
}
