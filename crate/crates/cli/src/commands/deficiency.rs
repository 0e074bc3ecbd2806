use std::path::PathBuf;

use deltaprime::deficiency::{
    e_functional, free_pair_check, gram_rank, point_family, ElementKind, RANK_TOL,
};
use deltaprime::measure::AtomicMeasure;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::complex_cells;
use crate::config::{load, set, set_vec, Real};
use crate::output::{emit, num, OutputArgs, Run, Table};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub points: Vec<Real>,
    /// Indices of points whose g′ member is left out.
    pub drop_prime: Vec<usize>,
    pub z_re: Real,
    pub z_im: Real,
    pub tol: Real,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            points: Vec::new(),
            drop_prime: Vec::new(),
            z_re: Real(-1.0),
            z_im: Real(0.0),
            tol: Real(RANK_TOL),
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Point positions, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub points: Vec<Real>,
    #[arg(long, value_delimiter = ',')]
    pub drop_prime: Vec<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_re: Option<Real>,
    #[arg(long, allow_hyphen_values = true)]
    pub z_im: Option<Real>,
    #[arg(long)]
    pub tol: Option<Real>,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn resolve(a: &Args) -> Result<Config, CliError> {
    let mut c: Config = load(a.config.as_deref())?;
    set_vec(&mut c.points, a.points.clone());
    set_vec(&mut c.drop_prime, a.drop_prime.clone());
    set(&mut c.z_re, a.z_re);
    set(&mut c.z_im, a.z_im);
    set(&mut c.tol, a.tol);
    if c.points.is_empty() {
        return Err(CliError::Usage("need at least one point".into()));
    }
    if let Some(&i) = c.drop_prime.iter().find(|&&i| i >= c.points.len()) {
        return Err(CliError::Usage(format!(
            "drop_prime index {i} out of range"
        )));
    }
    if !(c.tol.0 > 0.0 && c.tol.0 < 1.0) {
        return Err(CliError::Usage("tol must lie in (0, 1)".into()));
    }
    Ok(c)
}

pub fn run(a: Args) -> Result<(), CliError> {
    let cfg = resolve(&a)?;
    let z = Complex64::new(cfg.z_re.0, cfg.z_im.0);
    let xs: Vec<f64> = cfg.points.iter().map(|r| r.0).collect();
    let flags: Vec<bool> = (0..xs.len())
        .map(|i| !cfg.drop_prime.contains(&i))
        .collect();
    let family = point_family(&xs, &flags, z)?;
    let rank = gram_rank(&family, cfg.tol.0)?;
    let mut table = Table::new(&["index", "kind", "x", "e_re", "e_im", "singular_value"]);
    for (i, e) in family.iter().enumerate() {
        let kind = match e.kind {
            ElementKind::GConv => "g",
            ElementKind::GPrimeConv => "g_prime",
        };
        let [re, im] = complex_cells(e_functional(e));
        table.push(vec![
            i.to_string(),
            kind.into(),
            num(e.measure.atoms()[0].0),
            re,
            im,
            num(rank.singular_values[i]),
        ]);
    }
    let mut sorted = xs.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.dedup();
    let pair = free_pair_check(&AtomicMeasure::new(
        sorted.iter().map(|&x| (x, 1.0)).collect(),
    )?)?;
    let notes = vec![
        format!("rank: {}", rank.rank),
        format!("full_rank: {}", 2 * xs.len()),
        format!("ill_conditioned: {}", rank.ill_conditioned),
        format!("minus_one_over_z: {:?} {:?}", (-1.0 / z).re, (-1.0 / z).im),
        format!("free_pair_max_jump: {:e}", pair.max_jump()),
    ];
    let results = json!({
        "rank": rank.rank,
        "full_rank": 2 * xs.len(),
        "singular_values": rank.singular_values,
        "ill_conditioned": rank.ill_conditioned,
        "free_pair_max_jump": pair.max_jump(),
    });
    emit(
        Run {
            command: "deficiency",
            config: &cfg,
            table,
            notes,
            results,
        },
        &a.out,
    )
}
