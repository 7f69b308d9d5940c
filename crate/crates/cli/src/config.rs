//! Declarative run configuration, read from a single JSON document.

use serde::Deserialize;

use frobtr::frobenius_rank2::{build_family, Rank2Family, Rank2Params};
use frobtr::spectral_curve::{primary_differential, BranchedCover, CoverOptions, PrimaryKind, RationalFn};
use frobtr::{Backend, Error, Result, Scalar};

/// Hard caps on the (g, n) budget.
pub const MAX_G: usize = 3;
pub const MAX_N: usize = 5;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub cover: Option<CoverSpec>,
    pub phi: Option<PhiSpec>,
    /// "exact" or "bigfloat:<digits>"; the command-line flag wins.
    pub backend: Option<String>,
    #[serde(default)]
    pub orders: Orders,
    /// Requested (g, n) pairs.
    pub cases: Option<Vec<[usize; 2]>>,
    pub format: Option<Format>,
    /// Criterion numbers run by `verify`; all of them when absent.
    pub suite: Option<Vec<u32>>,
    pub classify: Option<ClassifySpec>,
    pub frobenius: Option<FrobSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Orders {
    #[serde(default = "d_chart")]
    pub chart: usize,
    #[serde(default = "d_bergman")]
    pub bergman: usize,
    #[serde(default = "d_z")]
    pub z: usize,
    /// Local-recursion depth.
    #[serde(default = "d_depth")]
    pub depth: usize,
    /// Puiseux coefficients compared per slot.
    #[serde(default = "d_count")]
    pub count: usize,
}

fn d_chart() -> usize {
    30
}
fn d_bergman() -> usize {
    6
}
fn d_z() -> usize {
    6
}
fn d_depth() -> usize {
    4
}
fn d_count() -> usize {
    4
}

impl Default for Orders {
    fn default() -> Self {
        Orders { chart: d_chart(), bergman: d_bergman(), z: d_z(), depth: d_depth(), count: d_count() }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoverSpec {
    /// x = t^2/2.
    Airy,
    Case1 { s1: Num, s2: Num },
    Case2 { s1: Num, s2: Num },
    /// x = num(t)/den(t), coefficients from degree 0 up.
    Raw { num: Vec<Num>, den: Option<Vec<Num>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhiSpec {
    /// Poles are numbered from 1.
    TypeI { pole: usize, a: u32 },
    TypeII { pole: usize },
    TypeIII { pole: usize },
    /// phi = (num/den) dt.
    Raw { num: Vec<Num>, den: Option<Vec<Num>> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    pub case: u8,
    pub n_min: i64,
    pub n_max: i64,
    #[serde(default = "d_probe")]
    pub probe: usize,
}

fn d_probe() -> usize {
    20
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrobSpec {
    A2 { t1: Num, t2: Num },
    P1 { t1: Num, q: Num },
}

/// A number: integer, decimal or "p/q", alone or as a [re, im] pair.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Real(Part),
    Complex([Part; 2]),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Part {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Part {
    /// Exact rational value as (numerator, denominator).
    fn rational(&self) -> Result<(i64, i64)> {
        match self {
            Part::Int(n) => Ok((*n, 1)),
            Part::Float(x) => parse_rational(&format!("{x}")),
            Part::Text(s) => parse_rational(s.trim()),
        }
    }
}

fn parse_rational(s: &str) -> Result<(i64, i64)> {
    let bad = || Error::Config(format!("cannot read '{s}' as a rational number"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(Error::Config(format!("zero denominator in '{s}'")));
        }
        return Ok((p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let p: i64 = digits.parse().map_err(|_| bad())?;
    let q = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    Ok((if neg { -p } else { p }, q))
}

impl Num {
    pub fn scalar(&self, be: &Backend) -> Result<Scalar> {
        let (re, im) = match self {
            Num::Real(p) => (p.rational()?, (0, 1)),
            Num::Complex([a, b]) => (a.rational()?, b.rational()?),
        };
        Ok(be.lift(&Scalar::gauss(re.0, re.1, im.0, im.1)))
    }
}

/// Parse a backend name: "exact" or "bigfloat:<digits>".
pub fn parse_backend(s: &str) -> Result<Backend> {
    match s.trim() {
        "exact" => Ok(Backend::Exact),
        other => {
            let digits = other
                .strip_prefix("bigfloat:")
                .and_then(|d| d.parse::<u32>().ok())
                .ok_or_else(|| Error::Config(format!("backend '{other}' is neither 'exact' nor 'bigfloat:<digits>'")))?;
            Backend::float(digits)
        }
    }
}

impl RunConfig {
    /// Reads and validates a config document. serde reports line, column and field.
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for &[g, n] in self.cases.as_deref().unwrap_or(&[]) {
            if g > MAX_G || n > MAX_N {
                return Err(Error::Budget(format!("(g,n) = ({g},{n}) exceeds the caps g <= {MAX_G}, n <= {MAX_N}")));
            }
            if n == 0 || 2 * g + n < 3 {
                return Err(Error::Config(format!("cases: ({g},{n}) is not a stable pair with n >= 1")));
            }
        }
        if let Some(s) = &self.suite {
            if let Some(bad) = s.iter().find(|c| !(1..=11).contains(*c)) {
                return Err(Error::Config(format!("suite: no criterion {bad}, expected 1..=11")));
            }
        }
        Ok(())
    }

    /// The flag beats the config; rank-2 families default to 60 digits.
    pub fn backend(&self, flag: Option<&str>) -> Result<Backend> {
        if let Some(s) = flag.or(self.backend.as_deref()) {
            return parse_backend(s);
        }
        match self.cover {
            Some(CoverSpec::Case1 { .. }) | Some(CoverSpec::Case2 { .. }) => Backend::float(60),
            _ => Ok(Backend::Exact),
        }
    }

    pub fn cases(&self, default: &[(usize, usize)]) -> Vec<(usize, usize)> {
        match &self.cases {
            Some(c) => c.iter().map(|&[g, n]| (g, n)).collect(),
            None => default.to_vec(),
        }
    }
}

fn poly(c: &[Num], be: &Backend) -> Result<Vec<Scalar>> {
    c.iter().map(|x| x.scalar(be)).collect()
}

fn rational_fn(num: &[Num], den: Option<&[Num]>, be: &Backend) -> Result<RationalFn> {
    let den = match den {
        Some(d) => poly(d, be)?,
        None => vec![be.one()],
    };
    if den.iter().all(Scalar::is_zero) {
        return Err(Error::Config("zero denominator".into()));
    }
    Ok(RationalFn::new(poly(num, be)?, den))
}

/// The cover together with the rank-2 family it came from, if any.
pub struct BuiltCover {
    pub cover: BranchedCover,
    pub family: Option<Rank2Family>,
}

pub fn build_cover(spec: &CoverSpec, be: &Backend, chart: usize) -> Result<BuiltCover> {
    let opts = CoverOptions { chart_order: chart, labels: None };
    match spec {
        CoverSpec::Airy => {
            let x = RationalFn::poly(vec![Scalar::zero(), Scalar::zero(), Scalar::rat(1, 2)]);
            Ok(BuiltCover { cover: BranchedCover::new(x, be, &opts)?, family: None })
        }
        CoverSpec::Case1 { s1, s2 } | CoverSpec::Case2 { s1, s2 } => {
            let case = if matches!(spec, CoverSpec::Case1 { .. }) { 1 } else { 2 };
            if be.is_exact() {
                return Err(Error::NotRepresentable(format!(
                    "case {case} Morse charts carry sqrt 2; use --backend bigfloat:<digits>"
                )));
            }
            let params = Rank2Params::S { s1: s1.scalar(be)?, s2: s2.scalar(be)? };
            let fam = build_family(case, &params, be, chart)?;
            Ok(BuiltCover { cover: fam.cover.clone(), family: Some(fam) })
        }
        CoverSpec::Raw { num, den } => {
            let x = rational_fn(num, den.as_deref(), be)?;
            Ok(BuiltCover { cover: BranchedCover::new(x, be, &opts)?, family: None })
        }
    }
}

/// phi from the config; -dt when absent.
pub fn build_phi(spec: Option<&PhiSpec>, cover: &BranchedCover) -> Result<RationalFn> {
    let be = &cover.backend;
    let pole = |p: usize| -> Result<usize> {
        p.checked_sub(1).ok_or_else(|| Error::Config("phi: poles are numbered from 1".into()))
    };
    match spec {
        None => Ok(RationalFn::poly(vec![be.int(-1)])),
        Some(PhiSpec::TypeI { pole: p, a }) => primary_differential(cover, PrimaryKind::TypeI { pole: pole(*p)?, a: *a }),
        Some(PhiSpec::TypeII { pole: p }) => primary_differential(cover, PrimaryKind::TypeII { pole: pole(*p)? }),
        Some(PhiSpec::TypeIII { pole: p }) => primary_differential(cover, PrimaryKind::TypeIII { pole: pole(*p)? }),
        Some(PhiSpec::Raw { num, den }) => rational_fn(num, den.as_deref(), be),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_and_diagnostics() {
        assert_eq!(parse_rational("-0.25").unwrap(), (-25, 100));
        assert_eq!(parse_rational("5/3").unwrap(), (5, 3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        let e = RunConfig::from_json("{\n  \"cover\": {\"family\": \"airy\"},\n  \"colour\": 1\n}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 3") && msg.contains("colour"), "{msg}");
        let e = RunConfig::from_json(r#"{"cases": [[4, 1]]}"#).unwrap_err();
        assert!(matches!(e, Error::Budget(_)));
    }

    #[test]
    fn numbers_lift_to_the_backend() {
        let n: Num = serde_json::from_str(r#"["1/2", -0.5]"#).unwrap();
        assert_eq!(n.scalar(&Backend::Exact).unwrap(), Scalar::gauss(1, 2, -1, 2));
        let cfg = RunConfig::from_json(r#"{"cover": {"family": "case1", "s1": 1, "s2": 0}}"#).unwrap();
        assert_eq!(cfg.backend(None).unwrap(), Backend::Float { digits: 60 });
        assert_eq!(cfg.backend(Some("exact")).unwrap(), Backend::Exact);
        assert!(parse_backend("bigfloat:x").is_err());
    }
}
