use num_complex::Complex64;

use crate::bergman::{build_space, dual_norm, FunctionalVector, TruncatedSpace};
use crate::error::{Error, Result};
use crate::monomial::MultiIndex;
use crate::verify::config::{require_descending, ExperimentConfig, FunctionalConfig};
use crate::verify::report::{CheckKind, Series, SeriesRow, VerificationReport};

use super::common::{check_inputs, fmt_list, green_weight};
use super::Experiment;

/// Convexity in `t` of `log‖ξ‖` in `A²(Ω, φ_{t,p})`.
pub struct Convexity;

fn functional(space: &TruncatedSpace, f: &FunctionalConfig) -> Result<FunctionalVector> {
    let n = space.domain().dimension;
    match f {
        FunctionalConfig::Evaluation { point } => {
            let z: Vec<Complex64> = match point {
                None => vec![Complex64::new(0.0, 0.0); n],
                Some(p) => p.iter().map(|[a, b]| Complex64::new(*a, *b)).collect(),
            };
            if z.len() != n {
                return Err(Error::Config("evaluation point has the wrong dimension".into()));
            }
            space.domain().check_point(&z)?;
            Ok(FunctionalVector::evaluation(space, &z))
        }
        FunctionalConfig::Coefficient { exponent } => {
            if exponent.len() != n {
                return Err(Error::Config("coefficient exponent has the wrong dimension".into()));
            }
            FunctionalVector::coefficient(space, &MultiIndex(exponent.clone()))
        }
    }
}

impl Experiment for Convexity {
    fn name(&self) -> &'static str {
        "convexity"
    }

    fn summary(&self) -> &'static str {
        "convexity in t of log dual norms of fixed functionals"
    }

    fn run(&self, cfg: &ExperimentConfig) -> Result<VerificationReport> {
        let domain = cfg.domain()?;
        let n = domain.dimension;
        let green = cfg.green()?;
        let p = cfg
            .p
            .ok_or_else(|| Error::Config("convexity needs a fixed slope \"p\"".into()))?;
        let t_grid = cfg.grid("t")?;
        require_descending("t", &t_grid)?;
        if t_grid.len() < 3 {
            return Err(Error::Config("convexity needs at least 3 grid points".into()));
        }
        let h = t_grid[0] - t_grid[1];
        if t_grid
            .windows(2)
            .any(|w| ((w[0] - w[1]) - h).abs() > 1e-9 * h.abs().max(1.0))
        {
            return Err(Error::Config("grids.t must be uniformly spaced".into()));
        }
        let functionals = cfg.functionals.clone().unwrap_or_else(|| {
            vec![
                FunctionalConfig::Evaluation { point: None },
                FunctionalConfig::Coefficient {
                    exponent: MultiIndex::unit(n, 0).0,
                },
            ]
        });
        let degree = cfg.degree();
        let rule = cfg.rule()?;
        let tol = &cfg.tolerances;
        let mut report = VerificationReport::new(self.name());
        check_inputs(&mut report, cfg, &domain, Some(&green));

        let mut logs = vec![Vec::with_capacity(t_grid.len()); functionals.len()];
        for &t in &t_grid {
            let space = build_space(&domain, &green_weight(&cfg.weight, &green, t, p), degree, &rule)?;
            for (fi, fc) in functionals.iter().enumerate() {
                let v = functional(&space, fc)?;
                let norm = dual_norm(&space, &v);
                if !(norm > 0.0) {
                    return Err(Error::Config(format!(
                        "functional {} vanishes on the space",
                        fc.label()
                    )));
                }
                logs[fi].push(norm.ln());
            }
        }
        for (fc, l) in functionals.iter().zip(&logs) {
            let label = fc.label();
            let second: Vec<f64> = (1..l.len() - 1).map(|i| l[i - 1] - 2.0 * l[i] + l[i + 1]).collect();
            let worst = second.iter().map(|d| -d).fold(0.0, f64::max);
            let mut s = Series::new(format!("convexity_{label}"), "t");
            for (i, (&t, &v)) in t_grid.iter().zip(l).enumerate() {
                let mut row = SeriesRow::new(t, v);
                if i > 0 && i + 1 < l.len() {
                    row = row.scaled(second[i - 1]).verdict(second[i - 1] >= -tol.monotone);
                }
                s.push(row);
            }
            report.series.push(s);
            report.check_sequence(
                &format!("convex_{label}"),
                CheckKind::Convexity,
                "second differences of log‖ξ‖ in t are nonnegative",
                worst,
                tol.monotone,
                format!("second differences {}", fmt_list(&second)),
            );
        }
        report.metric("p", p);
        report.metric("step", h);
        Ok(report)
    }
}
