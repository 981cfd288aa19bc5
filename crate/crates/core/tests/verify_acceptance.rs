//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;

use otlab_core::bergman::{build_space, minimal_extension, quotient_norm_via_duality, IdealSubspace};
use otlab_core::functionals::{xi_boundedness_sweep, AnnulusFunctional, SubvarietyFunctional};
use otlab_core::monomial::{HoloPoly, MultiIndex};
use otlab_core::multiplier::{jumping_numbers, staircase_orders, to_f64, Q};
use otlab_core::quadrature::QuadratureRule;
use otlab_core::verify::{ExperimentConfig, Registry, VerificationReport};
use otlab_core::weights::{BaseWeight, DomainSpec, GreenData, SingularWeight, WeightSpec};
use otlab_core::{Complex64, Result};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn run(name: &str, json: &str) -> Result<VerificationReport> {
    Registry::builtin().run(name, &ExperimentConfig::from_json(json)?)
}

fn metric(r: &VerificationReport, key: &str) -> f64 {
    r.metrics[key].as_f64().unwrap_or(f64::NAN)
}

fn passed(r: &VerificationReport, name: &str) -> bool {
    r.check(name).is_some_and(|c| c.passed)
}

fn one(n: usize) -> HoloPoly {
    HoloPoly::constant(n, Complex64::new(1.0, 0.0))
}

fn z_pow(k: u32) -> HoloPoly {
    HoloPoly::monomial(MultiIndex(vec![k]))
}

const DISC_ZERO: &str = r#"{"domain": {"dimension": 1}, "green": {"transverse": [0]},
    "degree": 16, "quadrature": {"radial": 120}}"#;

fn c1_sharpness() -> Result<Outcome> {
    let r = run("ot-optimal", DISC_ZERO)?;
    let (lhs, rhs) = (metric(&r, "lhs"), metric(&r, "rhs"));
    let ok = rel(lhs, PI) < 1e-8 && rel(rhs, PI) < 1e-8 && (metric(&r, "ratio") - 1.0).abs() < 1e-8 && r.passed;
    outcome(
        ok,
        format!("LHS {lhs:.15}, RHS {rhs:.15}, ratio {:.15}", metric(&r, "ratio")),
    )
}

fn c2_non_toric() -> Result<Outcome> {
    let cfg = |d: u32| {
        format!(
            r#"{{"domain": {{"dimension": 1}}, "green": {{"transverse": [0]}}, "degree": {d},
            "weight": {{"kind": "pointwise", "terms": [{{"coeff": 1, "s": [1]}}, {{"coeff": -1, "x": [1]}}, {{"coeff": 0.25}}]}}}}"#
        )
    };
    let r16 = run("ot-optimal", &cfg(16))?;
    let r14 = run("ot-optimal", &cfg(14))?;
    let (l16, l14, rhs) = (metric(&r16, "lhs"), metric(&r14, "lhs"), metric(&r16, "rhs"));
    let bound = PI * (-0.25f64).exp();
    let ok = passed(&r16, "extension_bound") && lhs_le(l16, bound) && rel(rhs, bound) < 1e-8 && rel(l14, l16) < 1e-7;
    outcome(
        ok,
        format!(
            "LHS(16) {l16:.12} ≤ πe^(-1/4) {bound:.12}; |LHS(14) − LHS(16)|/LHS {:.2e}",
            rel(l14, l16)
        ),
    )
}

fn lhs_le(a: f64, b: f64) -> bool {
    a <= b * (1.0 + 1e-7)
}

fn c3a_monotone_chain() -> Result<Outcome> {
    let r = run(
        "monotone-t",
        r#"{"domain": {"dimension": 1}, "green": {"transverse": [0]},
            "grids": {"t": [0, -1, -2, -3, -4, -5, -6, -7, -8], "p": [2, 8]}}"#,
    )?;
    let names = [
        "chain_monotone_p2",
        "chain_monotone_p8",
        "endpoint_bound_p2",
        "endpoint_bound_p8",
    ];
    let ok = names.iter().all(|n| passed(&r, n));
    let worst = names[..2]
        .iter()
        .map(|n| r.check(n).map_or(f64::NAN, |c| c.lhs))
        .fold(0.0, f64::max);
    outcome(
        ok,
        format!("largest log increase of the chain {worst:.2e}; endpoint below every chain value"),
    )
}

fn c3b_p_limit() -> Result<Outcome> {
    let t = -2.0f64;
    let r = run(
        "p-limit",
        r#"{"domain": {"dimension": 1}, "green": {"transverse": [0]}, "t": -2,
            "grids": {"p": [1, 2, 4, 8, 16, 32, 64]}}"#,
    )?;
    let target = PI * t.exp();
    let last = r
        .series_named("p_limit")
        .and_then(|s| s.rows.last())
        .map_or(f64::NAN, |row| row.value);
    let gap = rel(last, target);
    let ok = passed(&r, "monotone_in_p") && rel(metric(&r, "sublevel_norm"), target) < 1e-10 && gap <= 1e-6;
    outcome(
        ok,
        format!(
            "‖1‖² at p=64 is {last:.10}, target πe^t = {target:.10}, relative gap {gap:.3e}, analytic gap (1 − e^((p−1)t))/(p−1) = {:.3e}; inverse-power extrapolation error {:.3e}",
            -(63.0 * t).exp_m1() / 63.0,
            metric(&r, "inverse_power_relative_error")
        ),
    )
}

fn c4_convexity() -> Result<Outcome> {
    let r = run(
        "convexity",
        r#"{"domain": {"dimension": 1}, "green": {"transverse": [0]}, "p": 4,
            "grids": {"t": [0, -0.5, -1, -1.5, -2, -2.5, -3, -3.5, -4]},
            "functionals": [{"kind": "evaluation"}, {"kind": "coefficient", "exponent": [1]}]}"#,
    )?;
    let ok = passed(&r, "convex_evaluation_origin") && passed(&r, "convex_coefficient_1");
    let worst = ["convex_evaluation_origin", "convex_coefficient_1"]
        .iter()
        .map(|n| r.check(n).map_or(f64::NAN, |c| c.lhs))
        .fold(0.0, f64::max);
    outcome(ok, format!("most negative second difference {:.2e}", -worst))
}

const SPECTRUM_CASES: [(&str, &str); 3] = [
    (
        "log|z|²",
        r#"{"family": "principal-monomial", "c": 1, "exponent": [1]}"#,
    ),
    (
        "log|z1⁴z2²|²",
        r#"{"family": "principal-monomial", "c": 1, "exponent": [4, 2]}"#,
    ),
    (
        "log(|z1|²+|z2|²)",
        r#"{"family": "maximal-ideal-power", "c": 1, "power": 1}"#,
    ),
];

fn expected_spectrum(case: usize) -> Vec<Q> {
    let mut v: Vec<Q> = match case {
        0 => (1..=4).map(Q::from_integer).collect(),
        1 => (1..=16)
            .map(|m| Q::new(m, 4))
            .chain((1..=8).map(|m| Q::new(m, 2)))
            .collect(),
        _ => (2..=4).map(Q::from_integer).collect(),
    };
    v.sort();
    v.dedup();
    v
}

fn c5_spectra_vs_oracle() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, (label, psi)) in SPECTRUM_CASES.iter().enumerate() {
        let n = if i == 0 { 1 } else { 2 };
        let r = run(
            "jump-spectrum",
            &format!(
                r#"{{"domain": {{"dimension": {n}}}, "psi": {psi}, "m_max": "4", "oracle": {{"max_degree": 6}}}}"#
            ),
        )?;
        let domain = DomainSpec::unit(n);
        let cfg = ExperimentConfig::from_json(&format!(r#"{{"domain": {{"dimension": {n}}}, "psi": {psi}}}"#))?;
        let spec = jumping_numbers(cfg.psi(&domain)?.resolution(), Q::from_integer(4));
        let matches = spec.values() == expected_spectrum(i);
        let agree = passed(&r, "oracle_agreement");
        ok &= matches && agree;
        parts.push(format!(
            "{label}: spectrum {}, oracle {}/{} agree",
            if matches { "exact" } else { "MISMATCH" },
            r.metrics["oracle_agree"],
            r.metrics["oracle_agree"].as_u64().unwrap_or(0) + r.metrics["oracle_disagree"].as_u64().unwrap_or(0)
        ));
    }
    outcome(ok, parts.join("; "))
}

fn c6_staircase() -> Result<Outcome> {
    let mut ok = true;
    let mut count = 0;
    for (i, (_, psi)) in SPECTRUM_CASES.iter().enumerate() {
        let n = if i == 0 { 1 } else { 2 };
        let cfg = ExperimentConfig::from_json(&format!(r#"{{"domain": {{"dimension": {n}}}, "psi": {psi}}}"#))?;
        let res = cfg.psi(&DomainSpec::unit(n))?.resolution().clone();
        let spec = jumping_numbers(&res, Q::from_integer(4));
        for (p, jump) in spec.jumps.iter().enumerate() {
            let now = staircase_orders(&res, jump.m).orders;
            let before = staircase_orders(&res, spec.previous(p + 1)).orders;
            for &k in &jump.divisors {
                ok &= now[k] == before[k] + 1;
                count += 1;
            }
        }
    }
    outcome(ok, format!("{count} (jump, divisor) pairs checked in exact arithmetic"))
}

fn disc_annulus(c: i64, m: usize, base: BaseWeight) -> Result<AnnulusFunctional> {
    let disc = DomainSpec::unit(1);
    let psi = SingularWeight::principal(Q::from_integer(c), MultiIndex(vec![1]), &disc)?;
    let spec = jumping_numbers(psi.resolution(), Q::from_integer(4));
    AnnulusFunctional::new(&psi, base, &spec, m, 0, one(1))
}

fn c7_annulus_limit() -> Result<Outcome> {
    let rule = QuadratureRule::default_for(1);
    let mut ok = true;
    let mut worst = 0.0f64;
    let mut worst_decay = 0.0f64;
    for c in [1i64, 2] {
        for m in 1..=3u32 {
            let xi = disc_annulus(c, m as usize, BaseWeight::Zero {})?;
            let h = z_pow(m - 1);
            let limit = xi.limit(&h)?;
            ok &= (limit.re - PI / c as f64).abs() < 1e-12 && limit.im == 0.0;
            let mut prev = f64::INFINITY;
            for t in [-6.0, -8.0, -10.0] {
                let err = (xi.value(&h, t, &rule)? - limit).norm();
                ok &= err < 1e-4 && (err <= prev || err <= 1e-12);
                prev = err;
                worst = worst.max(err);
            }
            let decay = xi.value(&z_pow(m), -12.0, &rule)?.norm();
            ok &= decay < 1e-6;
            worst_decay = worst_decay.max(decay);
        }
    }
    // With φ = |z|² the error is visible and must shrink strictly.
    let gaussian = BaseWeight::Radial {
        coefficients: vec![0.0, 1.0],
    };
    let xi = disc_annulus(1, 1, gaussian)?;
    let limit = xi.limit(&one(1))?;
    let errs: Vec<f64> = [-6.0, -8.0, -10.0]
        .iter()
        .map(|&t| xi.value(&one(1), t, &rule).map(|v| (v - limit).norm()))
        .collect::<Result<_>>()?;
    let strict = errs.windows(2).all(|w| w[1] < w[0]);
    ok &= strict;
    outcome(
        ok,
        format!(
            "φ≡0: max |value − π/c| {worst:.2e}, max |value| on 𝓘(m_pψ) at t=−12 {worst_decay:.2e}; φ=|z|² errors {:.2e} > {:.2e} > {:.2e}",
            errs[0], errs[1], errs[2]
        ),
    )
}

fn c8_sweep() -> Result<Outcome> {
    let rule = QuadratureRule::default_for(1);
    let grid: Vec<f64> = (1..=8).map(|i| -(i as f64)).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for (c, m, base) in [
        (1, 1, BaseWeight::Zero {}),
        (1, 2, BaseWeight::Zero {}),
        (2, 1, BaseWeight::Zero {}),
        (
            1,
            1,
            BaseWeight::Radial {
                coefficients: vec![0.0, 1.0],
            },
        ),
    ] {
        let xi = disc_annulus(c, m, base)?;
        let q = 4.0 * to_f64(xi.m_p() - xi.m_prev());
        let sweep = xi_boundedness_sweep(&xi, &grid, q, 16, &rule, 1e-6)?;
        ok &= sweep.bounded && sweep.nondecreasing;
        parts.push(format!("c={c} p={m}: max {:.6}", sweep.max_scaled));
    }
    outcome(ok, parts.join("; "))
}

fn nonreduced(weight: &str, m: u32) -> Result<VerificationReport> {
    run(
        "nonreduced",
        &format!(
            r#"{{"domain": {{"dimension": 1}}, "weight": {weight},
            "psi": {{"family": "principal-monomial", "c": 1, "exponent": [1]}},
            "jump": {m}, "f": [{{"exponent": [{}]}}],
            "grids": {{"s": [-1, -2, -3, -4, -5, -6, -7, -8]}}}}"#,
            m - 1
        ),
    )
}

fn c9_nonreduced_sharpness() -> Result<Outcome> {
    let mut ok = true;
    let mut worst_bound = 0.0f64;
    for m in 1..=3 {
        let r = nonreduced(r#"{"kind": "zero"}"#, m)?;
        ok &= rel(metric(&r, "lhs"), PI) < 1e-8 && r.passed;
        for row in &r.series_named("sublevel_bound").expect("series").rows {
            let b = row.bound.unwrap_or(f64::NAN);
            worst_bound = worst_bound.max(rel(b, PI));
        }
    }
    ok &= worst_bound < 1e-8;
    let strict_target = PI * (1.0 - (-1.0f64).exp());
    let mut worst_lhs = 0.0f64;
    let mut worst_limsup = 0.0f64;
    for m in 1..=3 {
        let r = nonreduced(r#"{"kind": "radial", "coefficients": [0, 1]}"#, m)?;
        let lhs = metric(&r, "lhs");
        let limsup = metric(&r, "limsup_estimate");
        worst_lhs = worst_lhs.max(rel(lhs, strict_target));
        worst_limsup = worst_limsup.max(rel(limsup, PI));
        ok &= r.passed && passed(&r, "limsup_bound") && lhs < limsup;
    }
    ok &= worst_lhs < 1e-7 && worst_limsup < 1e-4;
    outcome(
        ok,
        format!(
            "φ≡0: LHS = π and bounds within {worst_bound:.1e}; φ=|z|²: LHS error {worst_lhs:.1e}, limsup error {worst_limsup:.1e}"
        ),
    )
}

fn c10_duality() -> Result<Outcome> {
    let rule1 = QuadratureRule::default_for(1);
    let rule2 = QuadratureRule::default_for(2);
    let gaussian = BaseWeight::Radial {
        coefficients: vec![0.0, 1.0],
    };
    let degree = 10;
    let mut ok = true;
    let mut parts = Vec::new();

    let mut ot_case = |n: usize, f: HoloPoly, rule: &QuadratureRule, label: &str| -> Result<()> {
        let domain = DomainSpec::unit(n);
        let green = GreenData {
            transverse: vec![0],
            ..GreenData::point(n)
        };
        let space = build_space(&domain, &WeightSpec::plain(gaussian.clone()), degree, rule)?;
        let ideal = IdealSubspace::from_subvariety(&space, &green);
        let proj = minimal_extension(&space, &ideal, &f)?.norm_sq.sqrt();
        let mut family = Vec::new();
        for k in 0..=degree {
            let g = if n == 1 {
                if k > 0 {
                    break;
                }
                one(1)
            } else {
                HoloPoly::monomial(MultiIndex(vec![0, k]))
            };
            let xi = SubvarietyFunctional::new(green.clone(), g, gaussian.clone())?;
            family.push(xi.vector(&space, rule)?);
        }
        let d = quotient_norm_via_duality(&space, &ideal, &f, &family)?;
        let e = rel(d.span_sup, proj);
        ok &= e < 1e-8;
        parts.push(format!("{label}: rel. difference {e:.1e} (rank {})", d.span_rank));
        Ok(())
    };
    let f1 = one(1).add(&z_pow(1));
    ot_case(1, f1, &rule1, "disc")?;
    let f2 = one(2)
        .add(&HoloPoly::monomial(MultiIndex(vec![0, 1])))
        .add(&HoloPoly::monomial(MultiIndex(vec![1, 1])));
    ot_case(2, f2, &rule2, "bidisc")?;

    // Multiplier setting on the disc: 𝓘(2ψ) inside A²(φ + ψ).
    let disc = DomainSpec::unit(1);
    let psi = SingularWeight::principal(Q::from_integer(1), MultiIndex(vec![1]), &disc)?;
    let space = build_space(
        &disc,
        &WeightSpec::plain(gaussian.clone()).with_multiplier(Q::from_integer(1), psi.clone()),
        degree,
        &rule1,
    )?;
    let ideal = IdealSubspace::from_multiplier(&space, Q::from_integer(2), &psi)?;
    let f = z_pow(1).add(&z_pow(2));
    let proj = minimal_extension(&space, &ideal, &f)?.norm_sq.sqrt();
    let xi = disc_annulus(1, 2, gaussian)?;
    let d = quotient_norm_via_duality(&space, &ideal, &f, &[xi.limit_vector(&space)?])?;
    let e = rel(d.span_sup, proj);
    ok &= e < 1e-8;
    parts.push(format!("disc multiplier: rel. difference {e:.1e}"));
    outcome(ok, parts.join("; "))
}

type Criterion = (&'static str, &'static str, fn() -> Result<Outcome>);

const CRITERIA: [Criterion; 11] = [
    ("1", "sharpness of the extension bound on the disc", c1_sharpness),
    ("2", "extension bound with a non-toric weight", c2_non_toric),
    ("3a", "monotone chain in t", c3a_monotone_chain),
    ("3b", "p-limit reaches the sublevel norm at p = 64", c3b_p_limit),
    ("4", "convexity of log dual norms in t", c4_convexity),
    (
        "5",
        "jumping numbers agree with the integrability oracle",
        c5_spectra_vs_oracle,
    ),
    ("6", "staircase identity at every jump", c6_staircase),
    ("7", "annulus functional limit", c7_annulus_limit),
    ("8", "boundedness sweep", c8_sweep),
    ("9", "quotient norm sharpness at a jump", c9_nonreduced_sharpness),
    ("10", "duality equals projection", c10_duality),
];

fn main() -> ExitCode {
    let mut failures = Vec::new();
    for (id, title, f) in CRITERIA {
        let (ok, detail) = match f() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "{} criterion {id}: {title} | {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        if !ok {
            failures.push(id);
        }
    }
    println!(
        "acceptance: {}/{} criteria passed{}",
        CRITERIA.len() - failures.len(),
        CRITERIA.len(),
        if failures.is_empty() {
            String::new()
        } else {
            format!("; failed: {}", failures.join(", "))
        }
    );
    if failures.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
