use std::path::PathBuf;

use deltaprime::measure::cantor_blocks;
use deltaprime::spectral::PointSystem;
use deltaprime::varcert::{certify_count_measure, certify_count_points, MeasureParams};
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::measure::{MeasureArgs, MeasureSpec};
use crate::config::{load, set, set_opt, set_vec, PointSpec, Real};
use crate::output::{emit, num, OutputArgs, Run, Table};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Group atoms by the construction intervals of this level; default one subset per attractive atom.
    pub block_level: Option<u32>,
    /// Margin with β ≤ −ε on every subset; default the largest admissible per subset.
    pub eps: Option<Real>,
    pub r_min: Real,
    /// δ′ points; when present the point certificate is used.
    pub points: Vec<PointSpec>,
    pub measure: MeasureSpec,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            block_level: None,
            eps: None,
            r_min: Real(1.0),
            points: Vec::new(),
            measure: MeasureSpec::default(),
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `delta-prime,X,BETA`, repeatable.
    #[arg(long = "point", allow_hyphen_values = true)]
    pub points: Vec<PointSpec>,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long)]
    pub block_level: Option<u32>,
    #[arg(long)]
    pub eps: Option<Real>,
    #[arg(long)]
    pub r_min: Option<Real>,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn resolve(a: &Args) -> Result<Config, CliError> {
    let mut c: Config = load(a.config.as_deref())?;
    set_vec(&mut c.points, a.points.clone());
    c.measure.merge(&a.measure);
    set_opt(&mut c.block_level, a.block_level);
    set_opt(&mut c.eps, a.eps);
    set(&mut c.r_min, a.r_min);
    if c.points.is_empty() {
        c.measure.validate()?;
    } else if c.measure != MeasureSpec::default() {
        return Err(CliError::Usage("give either points or a measure".into()));
    }
    if !(c.r_min.0 > 0.0) {
        return Err(CliError::Usage("r_min must be positive".into()));
    }
    Ok(c)
}

fn run_points(cfg: &Config) -> Result<(Table, Vec<String>, serde_json::Value), CliError> {
    let items = cfg
        .points
        .iter()
        .map(|p| p.located())
        .collect::<Result<Vec<_>, _>>()?;
    let sys = PointSystem::from_kinds(&items)?;
    let cert = certify_count_points(&sys)?;
    let mut table = Table::new(&[
        "index",
        "x",
        "beta",
        "eps",
        "r",
        "l",
        "form",
        "gram_diagonal",
    ]);
    for (i, t) in cert.functions.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            num(t.x0),
            num(t.beta),
            num(t.eps),
            num(t.r),
            num(t.l),
            num(cert.form_values[i]),
            num(cert.gram[(i, i)]),
        ]);
    }
    let notes = vec![
        format!("certified: {}", cert.count),
        format!("secular_count: {}", cert.secular_count),
        format!("max_offdiagonal: {:e}", cert.max_offdiagonal()),
    ];
    let results = json!({
        "certified": cert.count,
        "secular_count": cert.secular_count,
        "max_offdiagonal": cert.max_offdiagonal(),
        "forms": cert.form_values,
    });
    Ok((table, notes, results))
}

fn run_measure(cfg: &Config) -> Result<(Table, Vec<String>, serde_json::Value), CliError> {
    let (mu, beta) = cfg.measure.build()?;
    let b = beta.values(&mu)?;
    let subsets: Vec<Vec<usize>> = match cfg.block_level {
        Some(level) => {
            let (lo, hi) = match cfg.measure.cantor_depth {
                Some(_) => (cfg.measure.c0.0, cfg.measure.c1.0),
                None => mu.support(),
            };
            cantor_blocks(level, lo, hi)
                .iter()
                .map(|&(l, h)| mu.restrict(l, h))
                .filter(|s| !s.is_empty())
                .collect()
        }
        None => (0..mu.len())
            .filter(|&i| b[i] < 0.0)
            .map(|i| vec![i])
            .collect(),
    };
    let params = MeasureParams {
        eps: cfg.eps.map(|e| e.0),
        r_min: cfg.r_min.0,
        delta0: None,
    };
    let mut table = Table::new(&[
        "index", "atoms", "eps", "mass", "delta", "r", "plateau", "form", "target",
    ]);
    if subsets.is_empty() {
        return Ok((
            table,
            vec!["certified: 0".into()],
            json!({ "certified": 0 }),
        ));
    }
    let cert = certify_count_measure(&mu, &beta, &subsets, &params)?;
    for (i, s) in cert.subsets.iter().enumerate() {
        let atoms: Vec<String> = s.function.gamma_k.iter().map(|k| k.to_string()).collect();
        table.push(vec![
            i.to_string(),
            atoms.join(" "),
            num(s.eps),
            num(s.mass),
            num(s.function.delta),
            num(s.function.r),
            num(s.function.c_k),
            num(s.form),
            num(s.target),
        ]);
    }
    let offdiag = (0..cert.gram.nrows())
        .flat_map(|i| (0..cert.gram.ncols()).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| cert.gram[(i, j)].abs())
        .fold(0.0, f64::max);
    let notes = vec![
        format!("certified: {}", cert.count),
        format!("max_offdiagonal: {offdiag:e}"),
    ];
    let results = json!({
        "certified": cert.count,
        "forms": cert.subsets.iter().map(|s| s.form).collect::<Vec<_>>(),
        "targets": cert.subsets.iter().map(|s| s.target).collect::<Vec<_>>(),
        "max_offdiagonal": offdiag,
    });
    Ok((table, notes, results))
}

pub fn run(a: Args) -> Result<(), CliError> {
    let cfg = resolve(&a)?;
    let (table, notes, results) = if cfg.points.is_empty() {
        run_measure(&cfg)?
    } else {
        run_points(&cfg)?
    };
    emit(
        Run {
            command: "certify",
            config: &cfg,
            table,
            notes,
            results,
        },
        &a.out,
    )
}
