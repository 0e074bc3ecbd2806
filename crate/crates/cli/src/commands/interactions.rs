use std::path::PathBuf;

use deltaprime::bc::{
    b_of, b_to_unitary, gamma_compose, gamma_to_characteristic, lambda_of, theta_of_gamma,
    LagrangianPlane, Mat2,
};
use deltaprime::Error;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::complex_cells;
use crate::config::{load, set_opt, set_vec, KindName, KindSpec, Real};
use crate::output::{emit, num, OutputArgs, Run, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Op {
    /// Transmission matrix Λ.
    Lambda,
    /// Hermitian B-form entries.
    B,
    /// Unitary U of the (Γ₁, Γ₂) pairing.
    Unitary,
    /// Unitary Û of the (Γ̂₁, Γ̂₂) pairing.
    UHat,
    /// Fold δ′-potential intensities with the composition law.
    Compose,
    /// Additive characteristic (ξ, s) of each γ.
    Characteristic,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub op: Option<Op>,
    /// Intensities for `compose` and `characteristic`.
    #[serde(default)]
    pub gammas: Vec<Real>,
    #[serde(default)]
    pub interaction: KindSpec,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(value_enum)]
    pub op: Option<Op>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub kind: Option<KindName>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<Real>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<Real>,
    /// Repeat for `compose`; the first value is the δ′-potential intensity otherwise.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Vec<Real>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<Real>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda0: Option<Real>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_plus: Option<Real>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_minus: Option<Real>,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn resolve(a: &Args) -> Result<Config, CliError> {
    let mut c: Config = load(a.config.as_deref())?;
    set_opt(&mut c.op, a.op);
    let s = &mut c.interaction;
    set_opt(&mut s.kind, a.kind);
    set_opt(&mut s.alpha, a.alpha);
    set_opt(&mut s.beta, a.beta);
    set_opt(&mut s.gamma, a.gamma.first().copied());
    set_opt(&mut s.mu, a.mu);
    set_opt(&mut s.lambda0, a.lambda0);
    set_opt(&mut s.alpha_plus, a.alpha_plus);
    set_opt(&mut s.alpha_minus, a.alpha_minus);
    set_vec(&mut c.gammas, a.gamma.clone());
    if c.op.is_none() {
        return Err(CliError::Usage(
            "missing operation (lambda, b, unitary, u-hat, compose, characteristic)".into(),
        ));
    }
    Ok(c)
}

fn matrix_rows(t: &mut Table, name: &str, m: &Mat2) {
    for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let [re, im] = complex_cells(m[(i, j)]);
        t.push(vec![format!("{name}{}{}", i + 1, j + 1), re, im]);
    }
}

pub fn run(a: Args) -> Result<(), CliError> {
    let cfg = resolve(&a)?;
    let mut table = Table::new(&["quantity", "re", "im"]);
    let op = cfg.op.expect("resolved");
    let mut results = json!({});
    match op {
        Op::Lambda => {
            let t = lambda_of(&cfg.interaction.to_kind()?)?;
            matrix_rows(&mut table, "lambda", t.matrix());
            table.push(vec!["phase".into(), num(t.phase()), num(0.0)]);
            results = json!({ "phase": t.phase(), "invariant_defect": t.invariant_defect() });
        }
        Op::B => {
            let kind = cfg.interaction.to_kind()?;
            let b = b_of(&kind).ok_or_else(|| {
                CliError::Domain(Error::SplitNotSupported(format!(
                    "{kind:?} has no single-parameter B form"
                )))
            })?;
            for (name, v) in [
                ("alpha", b.alpha),
                ("beta", b.beta),
                ("gamma", b.gamma),
                ("mu", b.mu),
            ] {
                table.push(vec![name.into(), num(v), num(0.0)]);
            }
            results = serde_json::to_value(b).unwrap_or_default();
        }
        Op::Unitary | Op::UHat => {
            let kind = cfg.interaction.to_kind()?;
            let plane = LagrangianPlane::from_kind(&kind)?;
            let u = if op == Op::Unitary {
                plane.to_u()?
            } else {
                plane.to_u_hat()?
            };
            let name = if op == Op::Unitary { "u" } else { "u_hat" };
            matrix_rows(&mut table, name, &u);
            if let (Op::UHat, Some(b)) = (op, b_of(&kind)) {
                let direct = b_to_unitary(&b);
                results = json!({ "b_route_defect": (direct - u).norm() });
            }
        }
        Op::Compose => {
            if cfg.gammas.is_empty() {
                return Err(CliError::Usage("compose needs at least one --gamma".into()));
            }
            let mut g = cfg.gammas[0].0;
            table.push(vec!["gamma_1".into(), num(g), num(0.0)]);
            for (k, r) in cfg.gammas.iter().enumerate().skip(1) {
                g = gamma_compose(g, r.0)?;
                table.push(vec![format!("composed_{}", k + 1), num(g), num(0.0)]);
            }
            table.push(vec!["gamma".into(), num(g), num(0.0)]);
            results = json!({ "gamma": g, "theta": theta_of_gamma(g).ok() });
        }
        Op::Characteristic => {
            if cfg.gammas.is_empty() {
                return Err(CliError::Usage("characteristic needs --gamma".into()));
            }
            let mut list = Vec::new();
            for (k, r) in cfg.gammas.iter().enumerate() {
                let ch = gamma_to_characteristic(r.0)?;
                table.push(vec![format!("xi_{}", k + 1), num(ch.xi), num(0.0)]);
                table.push(vec![format!("s_{}", k + 1), num(ch.s as f64), num(0.0)]);
                list.push(ch);
            }
            results = serde_json::to_value(list).unwrap_or_default();
        }
    }
    let notes = vec![format!(
        "operation: {}",
        serde_json::to_value(op)
            .unwrap_or_default()
            .as_str()
            .unwrap_or("")
    )];
    emit(
        Run {
            command: "interactions",
            config: &cfg,
            table,
            notes,
            results,
        },
        &a.out,
    )
}
