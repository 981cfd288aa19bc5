//! Strict JSON experiment configuration.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::monomial::{HoloPoly, MultiIndex};
use crate::multiplier::{parse_rational, Q};
use crate::quadrature::QuadratureRule;
use crate::weights::{BaseWeight, DomainSpec, GreenData, SingularWeight};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<Vec<f64>>,
}

impl DomainConfig {
    pub fn resolve(&self) -> Result<DomainSpec> {
        let radii = self.radii.clone().unwrap_or_else(|| vec![1.0; self.dimension]);
        DomainSpec::new(self.dimension, radii)
    }
}

/// A rational given as `"3/2"`, `"0.25"` or a JSON integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalValue {
    Integer(i64),
    Text(String),
}

impl RationalValue {
    pub fn resolve(&self) -> Result<Q> {
        match self {
            RationalValue::Integer(i) => Ok(Q::from_integer(*i)),
            RationalValue::Text(t) => parse_rational(t),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PsiConfig {
    /// `ψ = c log|z^a|²`.
    PrincipalMonomial { c: RationalValue, exponent: Vec<u32> },
    /// `ψ = c log Σ|z_i|^{2d}`.
    MaximalIdealPower { c: RationalValue, power: u32 },
}

impl PsiConfig {
    pub fn resolve(&self, domain: &DomainSpec) -> Result<SingularWeight> {
        match self {
            PsiConfig::PrincipalMonomial { c, exponent } => {
                SingularWeight::principal(c.resolve()?, MultiIndex(exponent.clone()), domain)
            }
            PsiConfig::MaximalIdealPower { c, power } => {
                SingularWeight::maximal_ideal_power(c.resolve()?, *power, domain)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub exponent: Vec<u32>,
    #[serde(default = "one")]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

fn one() -> f64 {
    1.0
}

pub fn resolve_poly(terms: &[PolyTerm], n: usize) -> Result<HoloPoly> {
    let mut p = HoloPoly::default();
    for t in terms {
        if t.exponent.len() != n {
            return Err(Error::Config(format!(
                "polynomial exponent {:?} does not have dimension {n}",
                t.exponent
            )));
        }
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(Error::Config("polynomial coefficient is not finite".into()));
        }
        p = p.add(&HoloPoly {
            terms: vec![(MultiIndex(t.exponent.clone()), Complex64::new(t.re, t.im))],
        });
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionalConfig {
    /// Point evaluation; `point` holds `[re, im]` pairs, default the origin.
    Evaluation {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        point: Option<Vec<[f64; 2]>>,
    },
    /// The coefficient of `z^exponent`.
    Coefficient { exponent: Vec<u32> },
}

impl FunctionalConfig {
    pub fn label(&self) -> String {
        match self {
            FunctionalConfig::Evaluation { point: None } => "evaluation_origin".into(),
            FunctionalConfig::Evaluation { point: Some(p) } => {
                let parts: Vec<String> = p.iter().map(|[a, b]| format!("{a}_{b}")).collect();
                format!("evaluation_{}", parts.join("_"))
            }
            FunctionalConfig::Coefficient { exponent } => {
                let parts: Vec<String> = exponent.iter().map(|e| e.to_string()).collect();
                format!("coefficient_{}", parts.join("_"))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radial: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angular: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative slack for inequalities.
    pub inequality: f64,
    /// Absolute slack on log quantities for monotonicity and convexity.
    pub monotone: f64,
    /// Relative tolerance for equalities.
    pub equality: f64,
    /// Absolute tolerance between annulus values and their limit.
    pub annulus: f64,
    /// Absolute bound for annulus values on the next ideal.
    pub decay: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            inequality: 1e-7,
            monotone: 1e-6,
            equality: 1e-6,
            annulus: 1e-4,
            decay: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.inequality, self.monotone, self.equality, self.annulus, self.decay];
        if all.iter().all(|t| t.is_finite() && *t > 0.0) {
            Ok(())
        } else {
            Err(Error::Config("tolerances must be positive and finite".into()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleConfig {
    /// Largest `|β|` tested.
    pub max_degree: u32,
    /// `m` runs over multiples of `1/denominator`.
    pub denominator: i64,
    pub radial: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_degree: 6,
            denominator: 8,
            radial: 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Must match the subcommand when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub domain: DomainConfig,
    #[serde(default = "zero_weight")]
    pub weight: BaseWeight,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub green: Option<GreenData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<PsiConfig>,
    /// Data on `V`, or the class representative `F°`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<PolyTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functionals: Option<Vec<FunctionalConfig>>,
    #[serde(default)]
    pub grids: GridConfig,
    /// Fixed level for `p-limit`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Fixed slope for `convexity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Jump index `p ≥ 1` for `nonreduced`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<RationalValue>,
    /// Level `s` at which the `q` chain is evaluated; defaults to the first `s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q_at_s: Option<f64>,
    /// Slope of the boundedness sweep; defaults to `4 (m_p − m_{p−1})`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_q: Option<f64>,
    /// Level where annulus values on the next ideal must have decayed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay_t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub oracle: OracleConfig,
    /// Output directory, overridden by `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn zero_weight() -> BaseWeight {
    BaseWeight::Zero {}
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn minimal(dimension: usize) -> Self {
        ExperimentConfig {
            experiment: None,
            description: None,
            domain: DomainConfig { dimension, radii: None },
            weight: BaseWeight::Zero {},
            green: None,
            psi: None,
            f: None,
            functionals: None,
            grids: GridConfig::default(),
            t: None,
            p: None,
            jump: None,
            m_max: None,
            q_at_s: None,
            sweep_q: None,
            decay_t: None,
            degree: None,
            quadrature: QuadratureConfig::default(),
            tolerances: Tolerances::default(),
            oracle: OracleConfig::default(),
            output: None,
        }
    }

    pub fn domain(&self) -> Result<DomainSpec> {
        self.domain.resolve()
    }

    /// Default `D = 16` on the disc and `D = 8` otherwise.
    pub fn degree(&self) -> u32 {
        self.degree.unwrap_or(if self.domain.dimension == 1 { 16 } else { 8 })
    }

    pub fn rule(&self) -> Result<QuadratureRule> {
        let d = QuadratureRule::default_for(self.domain.dimension);
        QuadratureRule::new(
            self.quadrature.radial.unwrap_or(d.radial()),
            self.quadrature.angular.unwrap_or(d.angular()),
        )
    }

    pub fn green(&self) -> Result<GreenData> {
        self.green
            .clone()
            .ok_or_else(|| Error::Config("this experiment needs a \"green\" section".into()))
    }

    pub fn psi(&self, domain: &DomainSpec) -> Result<SingularWeight> {
        self.psi
            .as_ref()
            .ok_or_else(|| Error::Config("this experiment needs a \"psi\" section".into()))?
            .resolve(domain)
    }

    /// `f`, defaulting to the constant 1.
    pub fn f_or_one(&self, n: usize) -> Result<HoloPoly> {
        match &self.f {
            Some(t) => resolve_poly(t, n),
            None => Ok(HoloPoly::constant(n, Complex64::new(1.0, 0.0))),
        }
    }

    pub fn grid(&self, name: &str) -> Result<Vec<f64>> {
        let g = match name {
            "t" => &self.grids.t,
            "p" => &self.grids.p,
            "s" => &self.grids.s,
            "q" => &self.grids.q,
            _ => unreachable!("unknown grid name"),
        };
        let g = g
            .clone()
            .ok_or_else(|| Error::Config(format!("this experiment needs grids.{name}")))?;
        if g.is_empty() || g.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(format!(
                "grids.{name} must be a nonempty list of finite numbers"
            )));
        }
        Ok(g)
    }

    /// Common validation run before any experiment.
    pub fn validate(&self) -> Result<()> {
        let d = self.domain()?;
        self.weight.validate(d.dimension)?;
        self.tolerances.validate()?;
        if let Some(g) = &self.green {
            g.validate(&d)?;
        }
        if self.oracle.denominator <= 0 || self.oracle.radial == 0 {
            return Err(Error::Config(
                "oracle denominator and radial order must be positive".into(),
            ));
        }
        Ok(())
    }
}

pub fn require_descending(name: &str, g: &[f64]) -> Result<()> {
    if g.windows(2).all(|w| w[1] < w[0]) {
        Ok(())
    } else {
        Err(Error::Config(format!("grids.{name} must be strictly descending")))
    }
}

pub fn require_ascending(name: &str, g: &[f64]) -> Result<()> {
    if g.windows(2).all(|w| w[1] > w[0]) {
        Ok(())
    } else {
        Err(Error::Config(format!("grids.{name} must be strictly increasing")))
    }
}
