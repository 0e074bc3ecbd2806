use std::path::PathBuf;

use deltaprime::spectral::{
    characteristic_root, default_kappa_max, delta_prime_pair, find_bound_states, nonlocal_example,
    nonlocal_example_verbatim, CharacteristicEq, PointSystem, DEFAULT_GRID,
};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{load, set, set_opt, set_vec, PointSpec, Real};
use crate::output::{emit, num, OutputArgs, Run, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Builtin {
    /// Two-point nonlocal coupling, self-adjoint reading.
    NonlocalExample,
    /// The same coupling with the x₁ term read literally (not self-adjoint).
    NonlocalExampleVerbatim,
    /// δ′ of intensity β at ±1.
    DeltaPrimePair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub builtin: Option<Builtin>,
    /// Intensity for `delta-prime-pair`.
    pub beta: Real,
    pub kappa_max: Option<Real>,
    pub grid: usize,
    pub points: Vec<PointSpec>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            builtin: None,
            beta: Real(-1.0),
            kappa_max: None,
            grid: DEFAULT_GRID,
            points: Vec::new(),
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub builtin: Option<Builtin>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<Real>,
    #[arg(long)]
    pub kappa_max: Option<Real>,
    #[arg(long)]
    pub grid: Option<usize>,
    /// `KIND,X,PARAM[,PARAM]`, repeatable; e.g. `delta-prime,1,-1`.
    #[arg(long = "point", allow_hyphen_values = true)]
    pub points: Vec<PointSpec>,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn resolve(a: &Args) -> Result<Config, CliError> {
    let mut c: Config = load(a.config.as_deref())?;
    set_opt(&mut c.builtin, a.builtin);
    set(&mut c.beta, a.beta);
    set_opt(&mut c.kappa_max, a.kappa_max);
    set(&mut c.grid, a.grid);
    set_vec(&mut c.points, a.points.clone());
    if c.builtin.is_some() && !c.points.is_empty() {
        return Err(CliError::Usage(
            "give either a builtin or explicit points".into(),
        ));
    }
    if c.grid < 16 {
        return Err(CliError::Usage("grid must be at least 16".into()));
    }
    if let Some(k) = c.kappa_max {
        if !(k.0 > 0.0) {
            return Err(CliError::Usage("kappa_max must be positive".into()));
        }
    }
    Ok(c)
}

pub fn system(c: &Config) -> Result<Option<PointSystem>, CliError> {
    Ok(match c.builtin {
        Some(Builtin::NonlocalExample) => Some(nonlocal_example()),
        Some(Builtin::NonlocalExampleVerbatim) => Some(nonlocal_example_verbatim()),
        Some(Builtin::DeltaPrimePair) => Some(delta_prime_pair(c.beta.0)?),
        None if c.points.is_empty() => None,
        None => {
            let items = c
                .points
                .iter()
                .map(|p| p.located())
                .collect::<Result<Vec<_>, _>>()?;
            Some(PointSystem::from_kinds(&items)?)
        }
    })
}

pub fn run(a: Args) -> Result<(), CliError> {
    let cfg = resolve(&a)?;
    let mut table = Table::new(&[
        "index",
        "kappa",
        "energy",
        "parity",
        "residual",
        "near_threshold",
    ]);
    let mut notes = Vec::new();
    let mut results = json!({ "count": 0, "states": [] });
    if let Some(sys) = system(&cfg)? {
        let kappa_max = cfg
            .kappa_max
            .map(|k| k.0)
            .unwrap_or_else(|| default_kappa_max(&sys));
        notes.push(format!("kappa_max: {kappa_max:?}"));
        notes.push(format!(
            "self_adjoint_defect: {:e}",
            sys.self_adjoint_defect()
        ));
        let spec = find_bound_states(&sys, kappa_max, cfg.grid)?;
        let mut states = Vec::new();
        for (i, s) in spec.states.iter().enumerate() {
            table.push(vec![
                i.to_string(),
                num(s.kappa),
                num(s.energy),
                s.parity.to_string(),
                num(s.residual),
                s.near_threshold.to_string(),
            ]);
            states.push(json!({
                "kappa": s.kappa, "energy": s.energy, "parity": s.parity.to_string(),
                "residual": s.residual, "near_threshold": s.near_threshold,
            }));
        }
        for w in &spec.warnings {
            notes.push(format!("warning: {w}"));
        }
        let count = spec.states.iter().filter(|s| !s.near_threshold).count();
        notes.push(format!("count: {count}"));
        let reference = match cfg.builtin {
            Some(Builtin::NonlocalExample) | Some(Builtin::DeltaPrimePair) => {
                Some(characteristic_root(CharacteristicEq::TanhEq))
            }
            _ => None,
        };
        if let Some(r) = reference {
            notes.push(format!("tanh_root: {r:?}"));
        }
        results = json!({
            "count": count, "states": states, "warnings": spec.warnings,
            "kappa_max": kappa_max, "tanh_root": reference,
        });
    } else {
        notes.push("count: 0".into());
    }
    emit(
        Run {
            command: "spectrum",
            config: &cfg,
            table,
            notes,
            results,
        },
        &a.out,
    )
}
