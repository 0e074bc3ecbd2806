use std::fmt;
use std::path::Path;
use std::str::FromStr;

use deltaprime::bc::InteractionKind;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::CliError;

/// A real number given as a decimal or a ratio such as `2/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl FromStr for Real {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let v = match s.split_once('/') {
            Some((n, d)) => {
                let n: f64 = n
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad numerator in {s:?}"))?;
                let d: f64 = d
                    .trim()
                    .parse()
                    .map_err(|_| format!("bad denominator in {s:?}"))?;
                if d == 0.0 {
                    return Err(format!("zero denominator in {s:?}"));
                }
                n / d
            }
            None => s.parse().map_err(|_| format!("not a number: {s:?}"))?,
        };
        if !v.is_finite() {
            return Err(format!("not finite: {s:?}"));
        }
        Ok(Real(v))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number or a ratio string like \"2/3\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Real, E> {
                if v.is_finite() {
                    Ok(Real(v))
                } else {
                    Err(E::custom("number must be finite"))
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Real, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum KindName {
    Delta,
    DeltaPrime,
    DeltaPrimePotential,
    DeltaMagnetic,
    Transparent,
    Split,
}

/// One interaction with its parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KindSpec {
    /// Position; required for located interactions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<KindName>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_plus: Option<Real>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_minus: Option<Real>,
}

fn need(v: Option<Real>, name: &str, kind: &str) -> Result<f64, CliError> {
    v.map(|r| r.0)
        .ok_or_else(|| CliError::Usage(format!("{kind} needs {name}")))
}

impl KindSpec {
    pub fn to_kind(&self) -> Result<InteractionKind, CliError> {
        let kind = self
            .kind
            .ok_or_else(|| CliError::Usage("missing interaction kind".into()))?;
        Ok(match kind {
            KindName::Delta => InteractionKind::Delta {
                alpha: need(self.alpha, "alpha", "delta")?,
            },
            KindName::DeltaPrime => InteractionKind::DeltaPrime {
                beta: need(self.beta, "beta", "delta-prime")?,
            },
            KindName::DeltaPrimePotential => InteractionKind::DeltaPrimePotential {
                gamma: need(self.gamma, "gamma", "delta-prime-potential")?,
            },
            KindName::DeltaMagnetic => InteractionKind::DeltaMagnetic {
                mu: need(self.mu, "mu", "delta-magnetic")?,
            },
            KindName::Transparent => InteractionKind::Transparent {
                lambda0: need(self.lambda0, "lambda0", "transparent")?,
            },
            KindName::Split => InteractionKind::Split {
                alpha_plus: need(self.alpha_plus, "alpha_plus", "split")?,
                alpha_minus: need(self.alpha_minus, "alpha_minus", "split")?,
            },
        })
    }
}

/// A located interaction, `[[points]]` in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSpec(pub KindSpec);

impl PointSpec {
    pub fn located(&self) -> Result<(f64, InteractionKind), CliError> {
        let x = self
            .0
            .x
            .ok_or_else(|| CliError::Usage("point without x".into()))?;
        Ok((x.0, self.0.to_kind()?))
    }
}

impl FromStr for PointSpec {
    type Err = String;

    /// `KIND,X[,P1[,P2]]`, e.g. `delta-prime,1,-1` or `split,0,0.3,-0.2`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() < 2 {
            return Err(format!("expected KIND,X[,PARAMS] in {s:?}"));
        }
        let kind = <KindName as clap::ValueEnum>::from_str(parts[0], true)?;
        let x: Real = parts[1].parse()?;
        let params: Vec<Real> = parts[2..]
            .iter()
            .map(|p| p.parse())
            .collect::<Result<_, _>>()?;
        let want = match kind {
            KindName::Split => 2,
            _ => 1,
        };
        if params.len() != want {
            return Err(format!("{:?} takes {want} parameter(s) in {s:?}", parts[0]));
        }
        let mut spec = KindSpec {
            x: Some(x),
            kind: Some(kind),
            ..KindSpec::default()
        };
        match kind {
            KindName::Delta => spec.alpha = Some(params[0]),
            KindName::DeltaPrime => spec.beta = Some(params[0]),
            KindName::DeltaPrimePotential => spec.gamma = Some(params[0]),
            KindName::DeltaMagnetic => spec.mu = Some(params[0]),
            KindName::Transparent => spec.lambda0 = Some(params[0]),
            KindName::Split => {
                spec.alpha_plus = Some(params[0]);
                spec.alpha_minus = Some(params[1]);
            }
        }
        Ok(PointSpec(spec))
    }
}

/// `X,W` pair for an atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub x: Real,
    pub w: Real,
}

impl FromStr for AtomSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (x, w) = s
            .split_once(',')
            .ok_or_else(|| format!("expected X,W in {s:?}"))?;
        Ok(AtomSpec {
            x: x.parse()?,
            w: w.parse()?,
        })
    }
}

/// Reads a TOML config, or the default when no path is given.
pub fn load<T: for<'de> Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
}

/// Overwrites `slot` when the flag was given.
pub fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

pub fn set_opt<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

pub fn set_vec<T>(slot: &mut Vec<T>, flag: Vec<T>) {
    if !flag.is_empty() {
        *slot = flag;
    }
}
