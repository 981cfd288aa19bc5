use crate::bergman::dual_norm_sq;
use crate::error::Result;
use crate::functionals::SubvarietyFunctional;
use crate::verify::config::{require_descending, ExperimentConfig};
use crate::verify::report::{CheckKind, ConvergenceTable, Series, SeriesRow, VerificationReport};
use crate::weights::WeightSpec;

use super::common::{check_inputs, extension_norm, fmt_list, green_weight};
use super::Experiment;

/// Monotonicity in `t` of `e^{−kt}‖F_{t,p}‖²` and of `e^{kt}‖ξ_g‖²`.
pub struct MonotoneT;

impl Experiment for MonotoneT {
    fn name(&self) -> &'static str {
        "monotone-t"
    }

    fn summary(&self) -> &'static str {
        "monotonicity of the deformed extension chain and its dual"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<VerificationReport> {
        let domain = cfg.domain()?;
        let green = cfg.green()?;
        let f = cfg.f_or_one(domain.dimension)?;
        let degree = cfg.degree();
        let rule = cfg.rule()?;
        let tol = &cfg.tolerances;
        let t_grid = cfg.grid("t")?;
        require_descending("t", &t_grid)?;
        let p_grid = cfg.grid("p")?;
        let k = green.codim() as f64;
        let mut report = VerificationReport::new(self.name());
        check_inputs(&mut report, cfg, &domain, Some(&green));

        let (endpoint, _, _) = extension_norm(
            &domain,
            &WeightSpec::plain(cfg.weight.clone()),
            &green,
            &f,
            degree,
            &rule,
        )?;
        let xi = SubvarietyFunctional::new(green.clone(), f.clone(), cfg.weight.clone())?;
        report.metric("endpoint_norm", endpoint);

        for &p in &p_grid {
            let label = fmt_p(p);
            let mut chain = Vec::with_capacity(t_grid.len());
            let mut dual = Vec::with_capacity(t_grid.len());
            for &t in &t_grid {
                let w = green_weight(&cfg.weight, &green, t, p);
                let (norm, _, space) = extension_norm(&domain, &w, &green, &f, degree, &rule)?;
                let v = xi.vector(&space, &rule)?;
                let d = dual_norm_sq(&space, &v);
                chain.push((t, norm, (-k * t).exp() * norm));
                dual.push((t, d, (k * t).exp() * d));
            }
            // Along the descending grid the chain grows and the dual shrinks.
            let chain_logs: Vec<f64> = chain.iter().map(|r| r.2.ln()).collect();
            let dual_logs: Vec<f64> = dual.iter().map(|r| r.2.ln()).collect();
            let chain_drop = chain_logs.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
            let dual_rise = dual_logs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
            let min_chain = chain.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);

            let mut s = Series::new(format!("chain_p{label}"), "t");
            for (i, r) in chain.iter().enumerate() {
                let ok = i == 0 || chain_logs[i - 1] <= chain_logs[i] + tol.monotone;
                s.push(SeriesRow::new(r.0, r.1).bound(endpoint).scaled(r.2).verdict(ok));
            }
            report.series.push(s);
            let mut s = Series::new(format!("dual_p{label}"), "t");
            for (i, r) in dual.iter().enumerate() {
                let ok = i == 0 || dual_logs[i] <= dual_logs[i - 1] + tol.monotone;
                s.push(SeriesRow::new(r.0, r.1).scaled(r.2).verdict(ok));
            }
            report.series.push(s);

            let scaled: Vec<f64> = chain.iter().map(|r| r.2).collect();
            report.check_sequence(
                &format!("chain_monotone_p{label}"),
                CheckKind::Monotone,
                "e^{−kt}‖F_{t,p}‖² is nonincreasing in t",
                chain_drop,
                tol.monotone,
                format!("scaled chain {}", fmt_list(&scaled)),
            );
            report.check_le(
                &format!("endpoint_bound_p{label}"),
                "‖F₀‖² in A²(Ω,φ) ≤ e^{−kt}‖F_{t,p}‖² for every t",
                endpoint,
                min_chain,
                tol.inequality,
            );
            let scaled: Vec<f64> = dual.iter().map(|r| r.2).collect();
            report.check_sequence(
                &format!("dual_monotone_p{label}"),
                CheckKind::Monotone,
                "kt + log‖ξ_g‖² is nondecreasing in t",
                dual_rise,
                tol.monotone,
                format!("scaled dual norms {}", fmt_list(&scaled)),
            );
            let pts: Vec<(f64, f64)> = chain.iter().map(|r| (r.0, r.2)).collect();
            report
                .convergence
                .push(ConvergenceTable::new(format!("chain_vs_t_p{label}"), "t", &pts));
        }
        Ok(report)
    }
}

pub(super) fn fmt_p(p: f64) -> String {
    format!("{p}").replace('.', "_").replace('-', "m")
}
