use crate::bergman::build_space;
use crate::error::{Error, Result};
use crate::quadrature::{pairing_matrix, RadialCloud, Region};
use crate::verify::config::{require_ascending, ExperimentConfig};
use crate::verify::extrapolate::extrapolate_inverse_power;
use crate::verify::report::{rel_err, CheckKind, ConvergenceTable, Series, SeriesRow, VerificationReport};
use crate::weights::{LevelFunction, WeightSpec};

use super::common::{check_inputs, fmt_list, green_weight};
use super::Experiment;

/// `‖F°‖²_{t,p}` decreasing in `p` towards `∫_{Ω_t} |F°|² e^{−φ}`.
pub struct PLimit;

impl Experiment for PLimit {
    fn name(&self) -> &'static str {
        "p-limit"
    }

    fn summary(&self) -> &'static str {
        "convergence of the deformed norm to the sublevel norm as p grows"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<VerificationReport> {
        let domain = cfg.domain()?;
        let green = cfg.green()?;
        let f = cfg.f_or_one(domain.dimension)?;
        let t = cfg
            .t
            .ok_or_else(|| Error::Config("p-limit needs a fixed level \"t\"".into()))?;
        if !(t <= 0.0) {
            return Err(Error::Config("t must be ≤ 0".into()));
        }
        let p_grid = cfg.grid("p")?;
        require_ascending("p", &p_grid)?;
        if p_grid.iter().any(|p| *p < 0.0) {
            return Err(Error::Config("grids.p must be nonnegative".into()));
        }
        let degree = cfg.degree().max(f.max_degree());
        let rule = cfg.rule()?;
        let tol = &cfg.tolerances;
        let mut report = VerificationReport::new(self.name());
        check_inputs(&mut report, cfg, &domain, Some(&green));

        let plain = WeightSpec::plain(cfg.weight.clone());
        let region = Region::Sublevel {
            level_fn: LevelFunction::Green(green.clone()),
            t,
        };
        let cloud = RadialCloud::for_weight(&domain, &plain, &region, &rule)?;
        let basis: Vec<_> = f.terms.iter().map(|(a, _)| a.clone()).collect();
        let gram = pairing_matrix(&basis, &plain, &cloud, &rule)?;
        let coeffs: Vec<_> = f.terms.iter().map(|(_, c)| *c).collect();
        let target = gram.quadratic_form(&coeffs);

        let mut values = Vec::with_capacity(p_grid.len());
        for &p in &p_grid {
            let w = green_weight(&cfg.weight, &green, t, p);
            let space = build_space(&domain, &w, degree, &rule)?;
            let c = space.coefficients(&f)?;
            values.push((p, space.norm_sq(&c)));
        }
        let logs: Vec<f64> = values.iter().map(|v| v.1.ln()).collect();
        let rise = logs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        let mut s = Series::new("p_limit", "p");
        for (i, &(p, v)) in values.iter().enumerate() {
            let ok = (i == 0 || logs[i] <= logs[i - 1] + tol.monotone) && v >= target * (1.0 - tol.inequality);
            s.push(SeriesRow::new(p, v).bound(target).scaled(v / target).verdict(ok));
        }
        report.series.push(s);

        let norms: Vec<f64> = values.iter().map(|v| v.1).collect();
        report.check_sequence(
            "monotone_in_p",
            CheckKind::Monotone,
            "‖F°‖²_{t,p} is nonincreasing in p",
            rise,
            tol.monotone,
            format!("norms {}", fmt_list(&norms)),
        );
        let min_norm = norms.iter().cloned().fold(f64::INFINITY, f64::min);
        report.check_le(
            "dominates_sublevel_norm",
            "∫_{Ω_t} |F°|² e^{−φ} ≤ ‖F°‖²_{t,p}",
            target,
            min_norm,
            tol.inequality,
        );
        let last = values[values.len() - 1];
        report.check_close(
            "limit_equals_sublevel_norm",
            &format!("‖F°‖²_(t,p) at p = {} equals ∫_(Ω_t) |F°|² e^(−φ)", last.0),
            last.1,
            target,
            tol.equality,
        );
        report.metric("sublevel_norm", target);
        report.metric("relative_gap_at_largest_p", rel_err(last.1, target));
        let positive: Vec<(f64, f64)> = values.iter().cloned().filter(|v| v.0 > 0.0).collect();
        if let Ok(l) = extrapolate_inverse_power(&positive) {
            report.metric("inverse_power_limit", l);
            report.metric("inverse_power_relative_error", rel_err(l, target));
        }
        report
            .convergence
            .push(ConvergenceTable::new("norm_vs_p", "p", &values));
        Ok(report)
    }
}
