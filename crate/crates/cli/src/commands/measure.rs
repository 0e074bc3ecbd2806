use std::path::PathBuf;

use deltaprime::measure::{
    atomic_to_point_system, cantor_measure, negative_spectrum, AtomicMeasure, BetaFunction,
    GreenKernel,
};
use deltaprime::spectral::{default_kappa_max, find_bound_states, DEFAULT_GRID};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{load, set, set_opt, set_vec, AtomSpec, Real};
use crate::output::{emit, num, OutputArgs, Run, Table};
use crate::CliError;

/// Shared description of an atomic measure and its intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureSpec {
    pub cantor_depth: Option<u32>,
    pub c0: Real,
    pub c1: Real,
    /// Constant β.
    pub beta: Option<Real>,
    /// β per atom.
    pub betas: Vec<Real>,
    pub atoms: Vec<AtomSpec>,
}

impl Default for MeasureSpec {
    fn default() -> Self {
        Self {
            cantor_depth: None,
            c0: Real(0.0),
            c1: Real(1.0),
            beta: None,
            betas: Vec::new(),
            atoms: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct MeasureArgs {
    /// Midpoint atoms of the level-d Cantor construction on [c0, c1].
    #[arg(long)]
    pub cantor_depth: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub c0: Option<Real>,
    #[arg(long, allow_hyphen_values = true)]
    pub c1: Option<Real>,
    /// `X,W`, repeatable.
    #[arg(long = "atom", allow_hyphen_values = true)]
    pub atoms: Vec<AtomSpec>,
    /// Constant β.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<Real>,
    /// β per atom, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub betas: Vec<Real>,
}

impl MeasureSpec {
    pub fn merge(&mut self, a: &MeasureArgs) {
        set_opt(&mut self.cantor_depth, a.cantor_depth);
        set(&mut self.c0, a.c0);
        set(&mut self.c1, a.c1);
        set_vec(&mut self.atoms, a.atoms.clone());
        set_opt(&mut self.beta, a.beta);
        set_vec(&mut self.betas, a.betas.clone());
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (self.cantor_depth.is_some(), self.atoms.is_empty()) {
            (true, false) => {
                return Err(CliError::Usage(
                    "give either --cantor-depth or atoms".into(),
                ))
            }
            (false, true) => {
                return Err(CliError::Usage(
                    "no measure: give --cantor-depth or --atom".into(),
                ))
            }
            _ => {}
        }
        if self.beta.is_some() == !self.betas.is_empty() {
            return Err(CliError::Usage(
                "give exactly one of --beta and --betas".into(),
            ));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<(AtomicMeasure, BetaFunction), CliError> {
        let mu = match self.cantor_depth {
            Some(d) => cantor_measure(d, self.c0.0, self.c1.0)?,
            None => AtomicMeasure::new(self.atoms.iter().map(|a| (a.x.0, a.w.0)).collect())?,
        };
        let beta = match self.beta {
            Some(b) => BetaFunction::Constant(b.0),
            None => BetaFunction::PerAtom(self.betas.iter().map(|b| b.0).collect()),
        };
        beta.values(&mu)?;
        Ok((mu, beta))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    /// Distance from the support to each box wall; default 8/κ_min + 1 from the point-system oracle.
    pub margin: Option<Real>,
    /// Approximate grid sizes of the refinement sequence.
    pub refine: Vec<usize>,
    pub measure: MeasureSpec,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            margin: None,
            refine: vec![2048, 4096, 8192],
            measure: MeasureSpec::default(),
        }
    }
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long)]
    pub margin: Option<Real>,
    #[arg(long, value_delimiter = ',')]
    pub refine: Vec<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn resolve(a: &Args) -> Result<Config, CliError> {
    let mut c: Config = load(a.config.as_deref())?;
    c.measure.merge(&a.measure);
    set_opt(&mut c.margin, a.margin);
    set_vec(&mut c.refine, a.refine.clone());
    c.measure.validate()?;
    if c.refine.is_empty() {
        return Err(CliError::Usage(
            "refine must list at least one grid size".into(),
        ));
    }
    if let Some(m) = c.margin {
        if !(m.0 > 0.0) {
            return Err(CliError::Usage("margin must be positive".into()));
        }
    }
    Ok(c)
}

pub fn run(a: Args) -> Result<(), CliError> {
    let mut cfg = resolve(&a)?;
    let (mu, beta) = cfg.measure.build()?;
    let sys = atomic_to_point_system(&mu, &beta)?;
    let line = find_bound_states(&sys, default_kappa_max(&sys), DEFAULT_GRID)?;
    let mut line_energies: Vec<f64> = line
        .states
        .iter()
        .filter(|s| !s.near_threshold)
        .map(|s| s.energy)
        .collect();
    line_energies.sort_by(|a, b| a.total_cmp(b));
    let kappa_min = line
        .states
        .iter()
        .filter(|s| !s.near_threshold)
        .map(|s| s.kappa)
        .fold(f64::INFINITY, f64::min);
    if cfg.margin.is_none() {
        let m = if kappa_min.is_finite() {
            8.0 / kappa_min + 1.0
        } else {
            1.0 + mu.diameter()
        };
        cfg.margin = Some(Real(m));
    }
    let margin = cfg.margin.expect("set above").0;
    let kernel = GreenKernel::with_margin(mu, &beta, margin)?;
    let spec = negative_spectrum(&kernel, &cfg.refine)?;
    let mut table = Table::new(&[
        "index",
        "eigenvalue",
        "error_estimate",
        "observed_order",
        "point_system_energy",
    ]);
    for (i, e) in spec.eigenvalues.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            num(*e),
            num(spec.errors[i]),
            spec.observed_orders[i].map(num).unwrap_or_default(),
            line_energies.get(i).map(|v| num(*v)).unwrap_or_default(),
        ]);
    }
    let notes = vec![
        format!("box: [{:?}, {:?}]", kernel.a, kernel.b),
        format!("grid_sizes: {:?}", spec.sizes),
        format!("counts: {:?}", spec.counts),
        format!("point_system_count: {}", line_energies.len()),
    ];
    let results = json!({
        "box": [kernel.a, kernel.b],
        "sizes": spec.sizes,
        "counts": spec.counts,
        "eigenvalues": spec.eigenvalues,
        "errors": spec.errors,
        "point_system_energies": line_energies,
    });
    emit(
        Run {
            command: "measure",
            config: &cfg,
            table,
            notes,
            results,
        },
        &a.out,
    )
}
