use std::path::PathBuf;

use deltaprime::bc::C64;
use deltaprime::transfer::{
    family_3d, family_4d, family_4d_printed, family_5d, geometric_eps, limit_diagnose,
    Classification, Family5dPreset,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{load, set, set_opt, Real};
use crate::output::{emit, num, OutputArgs, Run, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Family {
    /// Two δ atoms approximating a δ′-potential.
    #[serde(rename = "3d")]
    #[value(name = "3d")]
    ThreeD,
    /// Three δ atoms with zero total strength.
    #[serde(rename = "4d")]
    #[value(name = "4d")]
    FourD,
    /// Three δ atoms with the coefficients as printed.
    #[serde(rename = "4d-printed")]
    #[value(name = "4d-printed")]
    FourDPrinted,
    /// Four δ atoms.
    #[serde(rename = "5d")]
    #[value(name = "5d")]
    FiveD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    FreeLimit,
    DirichletLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub family: Option<Family>,
    pub gamma: Option<Real>,
    /// Sign choice of α₂ for the three-atom family.
    pub sign: i8,
    pub preset: Option<Preset>,
    /// Spectral parameter at which Λ_ε is evaluated.
    pub lambda: Real,
    pub eps0: Real,
    pub ratio: Real,
    pub count: usize,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            family: None,
            gamma: None,
            sign: 1,
            preset: None,
            lambda: Real(1.0),
            eps0: Real(1e-2),
            ratio: Real(0.1),
            count: 4,
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<Real>,
    #[arg(long, allow_hyphen_values = true)]
    pub sign: Option<i8>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<Real>,
    #[arg(long)]
    pub eps0: Option<Real>,
    #[arg(long)]
    pub ratio: Option<Real>,
    #[arg(long)]
    pub count: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn resolve(a: &Args) -> Result<Config, CliError> {
    let mut c: Config = load(a.config.as_deref())?;
    set_opt(&mut c.family, a.family);
    set_opt(&mut c.gamma, a.gamma);
    set(&mut c.sign, a.sign);
    set_opt(&mut c.preset, a.preset);
    set(&mut c.lambda, a.lambda);
    set(&mut c.eps0, a.eps0);
    set(&mut c.ratio, a.ratio);
    set(&mut c.count, a.count);
    let family = c
        .family
        .ok_or_else(|| CliError::Usage("missing --family".into()))?;
    if !(c.eps0.0 > 0.0 && c.ratio.0 > 0.0 && c.ratio.0 < 1.0) {
        return Err(CliError::Usage("need eps0 > 0 and 0 < ratio < 1".into()));
    }
    if c.count < 3 {
        return Err(CliError::Usage("need at least 3 eps values".into()));
    }
    if c.sign != 1 && c.sign != -1 {
        return Err(CliError::Usage("sign must be 1 or -1".into()));
    }
    match family {
        Family::FiveD if c.preset.is_none() => {
            return Err(CliError::Usage("family 5d needs --preset".into()))
        }
        Family::ThreeD | Family::FourD | Family::FourDPrinted if c.gamma.is_none() => {
            return Err(CliError::Usage("this family needs --gamma".into()))
        }
        _ => {}
    }
    Ok(c)
}

pub fn run(a: Args) -> Result<(), CliError> {
    let cfg = resolve(&a)?;
    let eps = geometric_eps(cfg.eps0.0, cfg.ratio.0, cfg.count);
    let gamma = cfg.gamma.map(|g| g.0).unwrap_or(0.0);
    let sign = cfg.sign;
    let preset = match cfg.preset {
        Some(Preset::DirichletLimit) => Family5dPreset::DirichletLimit,
        _ => Family5dPreset::FreeLimit,
    };
    let lam = C64::new(cfg.lambda.0, 0.0);
    let report = match cfg.family.expect("resolved") {
        Family::ThreeD => limit_diagnose(|e| family_3d(gamma, e), lam, &eps)?,
        Family::FourD => limit_diagnose(|e| family_4d(gamma, sign, e), lam, &eps)?,
        Family::FourDPrinted => limit_diagnose(|e| family_4d_printed(gamma, sign, e), lam, &eps)?,
        Family::FiveD => limit_diagnose(|e| family_5d(preset, e), lam, &eps)?,
    };
    let mut table = Table::new(&[
        "eps",
        "lambda11",
        "lambda12",
        "lambda21",
        "lambda22",
        "rate",
        "classification",
    ]);
    for ((e, m), r) in report.eps.iter().zip(&report.matrices).zip(&report.rates) {
        table.push(vec![
            num(*e),
            num(m[(0, 0)].re),
            num(m[(0, 1)].re),
            num(m[(1, 0)].re),
            num(m[(1, 1)].re),
            num(*r),
            String::new(),
        ]);
    }
    let (label, limit) = match &report.classification {
        Classification::Limit(t) => {
            let m = t.matrix();
            let dist = [(0, 0, 1.0), (0, 1, 0.0), (1, 0, 0.0), (1, 1, 1.0)]
                .iter()
                .map(|&(i, j, v)| (m[(i, j)] - v).norm())
                .fold(0.0, f64::max);
            let label = if dist < 1e-6 { "Limit I" } else { "Limit" };
            (
                label,
                Some([m[(0, 0)].re, m[(0, 1)].re, m[(1, 0)].re, m[(1, 1)].re]),
            )
        }
        Classification::DirichletDecoupling => ("DirichletDecoupling", None),
        Classification::Divergent => ("Divergent", None),
    };
    let cells = match limit {
        Some(l) => l.iter().map(|v| num(*v)).collect(),
        None => vec![String::new(); 4],
    };
    let mut last = vec!["limit".to_string()];
    last.extend(cells);
    last.push(String::new());
    last.push(label.to_string());
    table.push(last);
    let results = json!({
        "classification": label,
        "limit": limit,
        "observed_order": report.observed_order,
    });
    let notes = vec![format!("classification: {label}")];
    emit(
        Run {
            command: "approx",
            config: &cfg,
            table,
            notes,
            results,
        },
        &a.out,
    )
}
