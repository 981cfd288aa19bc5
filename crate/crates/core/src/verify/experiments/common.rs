use crate::bergman::{build_space, minimal_extension, IdealSubspace, TruncatedSpace};
use crate::error::Result;
use crate::monomial::HoloPoly;
use crate::quadrature::QuadratureRule;
use crate::verify::config::ExperimentConfig;
use crate::verify::report::VerificationReport;
use crate::weights::{check_green_sandwich, check_psh, BaseWeight, DomainSpec, GreenData, LevelFunction, WeightSpec};

pub const PSH_SAMPLES: usize = 256;
pub const PSH_SEED: u64 = 0x5eed;

/// `φ + p max(G − t, 0)`.
pub fn green_weight(base: &BaseWeight, green: &GreenData, t: f64, p: f64) -> WeightSpec {
    let w = WeightSpec::plain(base.clone());
    if p == 0.0 {
        w
    } else {
        w.with_deformation(LevelFunction::Green(green.clone()), t, p)
    }
}

/// Minimal extension norm of `f` modulo the ideal of `V`.
pub fn extension_norm(
    domain: &DomainSpec,
    weight: &WeightSpec,
    green: &GreenData,
    f: &HoloPoly,
    degree: u32,
    rule: &QuadratureRule,
) -> Result<(f64, f64, TruncatedSpace)> {
    let space = build_space(domain, weight, degree, rule)?;
    let ideal = IdealSubspace::from_subvariety(&space, green);
    let ext = minimal_extension(&space, &ideal, f)?;
    Ok((ext.norm_sq, ext.orthogonality_defect, space))
}

pub fn check_inputs(
    report: &mut VerificationReport,
    cfg: &ExperimentConfig,
    domain: &DomainSpec,
    green: Option<&GreenData>,
) {
    let psh = check_psh(&cfg.weight, domain, PSH_SAMPLES, 1e-6, PSH_SEED);
    report.check_exact(
        "base_weight_psh",
        "sampled Levi form of the base weight is nonnegative",
        psh.holds,
        format!("minimum sampled Levi form {:e}", psh.min_levi),
    );
    if let Some(g) = green {
        let (radial, angular) = if domain.dimension == 1 { (48, 32) } else { (16, 12) };
        let sw = check_green_sandwich(g, domain, radial, angular, 1e-9);
        report.check_exact(
            "green_sandwich",
            "log d² + A ≥ G ≥ log d² − B on a sample grid",
            sw.holds,
            format!("worst slack {:e}", sw.worst_slack),
        );
    }
}

pub fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", parts.join(", "))
}
