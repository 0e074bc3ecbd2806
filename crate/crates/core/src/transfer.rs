//! Transfer matrices for δ-combs and piecewise-constant potentials, the
//! shrinking-comb families and a classifier for their ε → 0 behaviour.
//!
//! All matrices act on `col(ψ, ψ′)` and propagate from left to right.

use nalgebra::Matrix2;

use crate::bc::{theta_of_gamma, Mat2, TransmissionMatrix, C64};
use crate::error::{Error, Result};

/// Below this |λε| the trigonometric entries switch to their Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// A finite sum of δ-potentials.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaComb {
    atoms: Vec<(f64, f64)>,
}

impl DeltaComb {
    /// `atoms` are `(position, strength)` pairs with strictly increasing positions.
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.iter().any(|(x, a)| !x.is_finite() || !a.is_finite()) {
            return Err(Error::InvalidInput("comb atoms must be finite".into()));
        }
        if atoms.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidInput(
                "comb positions must be strictly increasing".into(),
            ));
        }
        Ok(Self { atoms })
    }

    pub fn empty() -> Self {
        Self { atoms: Vec::new() }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Leftmost and rightmost positions, `None` for an empty comb.
    pub fn span(&self) -> Option<(f64, f64)> {
        Some((self.atoms.first()?.0, self.atoms.last()?.0))
    }

    /// `(m0, m1)` such that the comb acts on smooth test functions as
    /// `m0·δ + m1·δ′` to first order: `m0 = Σa_j`, `m1 = −Σa_j x_j`.
    pub fn moments(&self) -> (f64, f64) {
        let m0 = self.atoms.iter().map(|(_, a)| a).sum();
        let m1 = -self.atoms.iter().map(|(x, a)| a * x).sum::<f64>();
        (m0, m1)
    }
}

/// Piecewise-constant potential, zero outside `[breakpoints[0], breakpoints[last]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePotential {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewisePotential {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.len() != values.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len().saturating_sub(1),
                values.len()
            )));
        }
        if breakpoints.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("potential data must be finite".into()));
        }
        if breakpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            breakpoints,
            values,
        })
    }

    /// Each atom replaced by a box of width `w` centred on it with height `a/w`.
    pub fn mollify(comb: &DeltaComb, w: f64) -> Result<Self> {
        let mut bp = Vec::new();
        let mut vals = Vec::new();
        for &(x, a) in comb.atoms() {
            let (l, r) = (x - w / 2.0, x + w / 2.0);
            if let Some(&last) = bp.last() {
                if l < last {
                    return Err(Error::InvalidInput("mollifier boxes overlap".into()));
                }
                if l > last {
                    vals.push(0.0);
                    bp.push(l);
                }
            } else {
                bp.push(l);
            }
            vals.push(a / w);
            bp.push(r);
        }
        Self::new(bp, vals)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Free propagator `[[cos λε, sin λε/λ], [−λ sin λε, cos λε]]`.
pub fn free_propagator(eps: f64, lam: C64) -> Result<Mat2> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "propagation length must be >= 0 (got {eps})"
        )));
    }
    Ok(propagator(eps, lam))
}

// Solution matrix of ψ″ = −k²ψ over a length `len`; even in k, so the
// branch of k is irrelevant.
fn propagator(len: f64, k: C64) -> Mat2 {
    let z = k * len;
    let (cos, sinc) = if z.norm() < SERIES_CUTOFF {
        let z2 = z * z;
        let cos = c(1.0) - z2 / 2.0 + z2 * z2 / 24.0 - z2 * z2 * z2 / 720.0;
        let sinc = c(1.0) - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0;
        (cos, sinc)
    } else {
        (z.cos(), z.sin() / z)
    };
    // sin(kL)/k = L·sinc, k sin(kL) = k²L·sinc
    Matrix2::new(cos, sinc * len, -k * k * sinc * len, cos)
}

fn delta_jump(a: f64) -> Mat2 {
    Matrix2::new(c(1.0), c(0.0), c(a), c(1.0))
}

/// Transfer matrix from just left of the first atom to just right of the last.
pub fn comb_transfer(comb: &DeltaComb, lam: C64) -> Mat2 {
    let mut m = Mat2::identity();
    let mut prev: Option<f64> = None;
    for &(x, a) in comb.atoms() {
        if let Some(p) = prev {
            m = propagator(x - p, lam) * m;
        }
        m = delta_jump(a) * m;
        prev = Some(x);
    }
    m
}

/// Transfer matrix across `[b_0, b_m]` with local wavenumber `√(λ² − v)` on each piece.
pub fn pc_transfer(pot: &PiecewisePotential, lam: C64) -> Mat2 {
    let mut m = Mat2::identity();
    for (w, &v) in pot.breakpoints.windows(2).zip(&pot.values) {
        let k = (lam * lam - v).sqrt();
        m = propagator(w[1] - w[0], k) * m;
    }
    m
}

/// Two atoms at 0 and ε with strengths γ(1−γ/2)⁻¹/ε and −γ(1+γ/2)⁻¹/ε.
pub fn family_3d(gamma: f64, eps: f64) -> Result<DeltaComb> {
    check_eps(eps)?;
    if (gamma.abs() - 2.0).abs() < crate::bc::POLE_TOL {
        return Err(Error::GammaPole(gamma));
    }
    let a1 = gamma / (1.0 - gamma / 2.0);
    let a2 = -gamma / (1.0 + gamma / 2.0);
    DeltaComb::new(vec![(0.0, a1 / eps), (eps, a2 / eps)])
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "eps must be positive (got {eps})"
        )));
    }
    Ok(())
}

fn check_sign(sign: i8) -> Result<f64> {
    match sign {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => Err(Error::InvalidInput(format!(
            "sign must be +1 or -1 (got {sign})"
        ))),
    }
}

/// Coefficients `(α₁, α₂, α₃)` of the three-atom family.
///
/// `α₂ = ±2γ(γ²−4)^{−1/2}`, `α₃ = −γ/2 − α₂(1−γ/2)/2` and
/// `α₁ = γ/2 − α₂(1+γ/2)/2`. This α₁ makes `Σα = 0`; without it the
/// total strength `Σα/ε` blows up and the comb degenerates to a Dirichlet
/// decoupling instead of a δ′-potential (see [`family_4d_printed_coefficients`]).
pub fn family_4d_coefficients(gamma: f64, sign: i8) -> Result<[f64; 3]> {
    let s = check_sign(sign)?;
    if gamma * gamma <= 4.0 {
        return Err(Error::ComplexCoefficient(gamma));
    }
    let a2 = s * 2.0 * gamma / (gamma * gamma - 4.0).sqrt();
    let a1 = gamma / 2.0 - a2 * (1.0 + gamma / 2.0) / 2.0;
    let a3 = -gamma / 2.0 - a2 * (1.0 - gamma / 2.0) / 2.0;
    Ok([a1, a2, a3])
}

/// The coefficients with `α₁ = γ/2 + α₂(1+γ/2)/2`, the sign pattern that does not
/// sum to zero. Kept for diagnostics only.
pub fn family_4d_printed_coefficients(gamma: f64, sign: i8) -> Result<[f64; 3]> {
    let [_, a2, a3] = family_4d_coefficients(gamma, sign)?;
    Ok([gamma / 2.0 + a2 * (1.0 + gamma / 2.0) / 2.0, a2, a3])
}

/// δ′ coefficient of the distributional limit, `κ = α₁ − α₃ = γ(1 − α₂/2)`.
pub fn family_4d_kappa(gamma: f64, sign: i8) -> Result<f64> {
    let [a1, _, a3] = family_4d_coefficients(gamma, sign)?;
    Ok(a1 - a3)
}

fn three_atoms(alpha: [f64; 3], eps: f64) -> Result<DeltaComb> {
    check_eps(eps)?;
    DeltaComb::new(vec![
        (-eps, alpha[0] / eps),
        (0.0, alpha[1] / eps),
        (eps, alpha[2] / eps),
    ])
}

/// Three atoms at −ε, 0, ε; requires |γ| > 2.
pub fn family_4d(gamma: f64, sign: i8, eps: f64) -> Result<DeltaComb> {
    three_atoms(family_4d_coefficients(gamma, sign)?, eps)
}

pub fn family_4d_printed(gamma: f64, sign: i8, eps: f64) -> Result<DeltaComb> {
    three_atoms(family_4d_printed_coefficients(gamma, sign)?, eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family5dPreset {
    /// α = (−1, 6, −3, −2): the potentials tend to 6δ′ but Λ_ε → I.
    FreeLimit,
    /// α = (3, −3, −3, 3): Λ_ε decouples into Dirichlet conditions.
    DirichletLimit,
}

impl Family5dPreset {
    pub fn coefficients(self) -> [f64; 4] {
        match self {
            Self::FreeLimit => [-1.0, 6.0, -3.0, -2.0],
            Self::DirichletLimit => [3.0, -3.0, -3.0, 3.0],
        }
    }
}

/// Four atoms at 0, ε, 2ε, 3ε with strengths α_j/ε.
pub fn family_5d(preset: Family5dPreset, eps: f64) -> Result<DeltaComb> {
    check_eps(eps)?;
    let atoms = preset
        .coefficients()
        .iter()
        .enumerate()
        .map(|(j, a)| (j as f64 * eps, a / eps))
        .collect();
    DeltaComb::new(atoms)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Limit(TransmissionMatrix),
    DirichletDecoupling,
    Divergent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub classification: Classification,
    pub eps: Vec<f64>,
    pub matrices: Vec<Mat2>,
    /// For a limit: max-entry distance of each Λ_ε from the extrapolated limit.
    /// Otherwise: max-entry distance between consecutive Λ_ε (first entry 0).
    pub rates: Vec<f64>,
    /// Observed order p in `|Λ_ε − Λ| ~ ε^p`, from the last three terms.
    pub observed_order: Option<f64>,
}

fn max_entry(m: &Mat2) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Evaluates `family(ε)` along `eps_seq` and classifies the behaviour of `Λ_ε`.
///
/// * `Limit`: consecutive differences shrink geometrically and the final
///   difference is small against the matrix size; the limit is Richardson
///   extrapolated with the observed order.
/// * `DirichletDecoupling`: `|Λ₂₁| → ∞` while `Λ₁₁/Λ₂₁` and `Λ₂₂/Λ₂₁` → 0.
/// * `Divergent`: the entries grow without the Dirichlet pattern.
pub fn limit_diagnose<F>(family: F, lam: C64, eps_seq: &[f64]) -> Result<ConvergenceReport>
where
    F: Fn(f64) -> Result<DeltaComb>,
{
    if eps_seq.len() < 3 {
        return Err(Error::InvalidInput(
            "limit diagnosis needs at least three eps values".into(),
        ));
    }
    if eps_seq.windows(2).any(|w| !(w[1] < w[0])) || !(eps_seq[eps_seq.len() - 1] > 0.0) {
        return Err(Error::InvalidInput(
            "eps sequence must be positive and strictly decreasing".into(),
        ));
    }
    let matrices = eps_seq
        .iter()
        .map(|&e| Ok(comb_transfer(&family(e)?, lam)))
        .collect::<Result<Vec<_>>>()?;
    let n = matrices.len();
    let diffs: Vec<f64> = std::iter::once(0.0)
        .chain(matrices.windows(2).map(|w| max_entry(&(w[1] - w[0]))))
        .collect();
    let sizes: Vec<f64> = matrices.iter().map(max_entry).collect();

    let order = |i: usize| -> Option<f64> {
        // order from diffs[i-1], diffs[i] over eps ratios
        let (d0, d1) = (diffs[i - 1], diffs[i]);
        if d0 <= 0.0 || d1 <= 0.0 {
            return None;
        }
        let r = (eps_seq[i - 1] / eps_seq[i - 2]).ln();
        let r1 = (eps_seq[i] / eps_seq[i - 1]).ln();
        Some((d1 / d0).ln() / (0.5 * (r + r1)))
    };
    let observed_order = order(n - 1);

    let last = &matrices[n - 1];
    let scale = 1.0 + sizes[n - 1];
    let tiny = 1e-13 * scale;
    let shrinking = (2..n).all(|i| diffs[i] <= diffs[i - 1] || diffs[i] < tiny);
    if shrinking && diffs[n - 1] < 0.1 * scale {
        let limit = match observed_order {
            Some(p) if p > 0.0 => {
                let (e0, e1) = (eps_seq[n - 2].powf(p), eps_seq[n - 1].powf(p));
                last - (matrices[n - 2] - last) * c(e1 / (e0 - e1))
            }
            _ => *last,
        };
        let rates = matrices.iter().map(|m| max_entry(&(m - limit))).collect();
        let limit = TransmissionMatrix::with_tolerance(limit, 1e-6).map_err(|_| {
            Error::AmbiguousClassification(
                "extrapolated limit violates the transmission-matrix invariant".into(),
            )
        })?;
        return Ok(ConvergenceReport {
            classification: Classification::Limit(limit),
            eps: eps_seq.to_vec(),
            matrices,
            rates,
            observed_order,
        });
    }

    let l21: Vec<f64> = matrices.iter().map(|m| m[(1, 0)].norm()).collect();
    let growing = l21.windows(2).all(|w| w[1] > w[0]) && l21[n - 1] > 10.0 * l21[0].max(1.0);
    let ratio = |m: &Mat2| (m[(0, 0)].norm().max(m[(1, 1)].norm())) / m[(1, 0)].norm();
    let ratios: Vec<f64> = matrices.iter().map(ratio).collect();
    let ratios_vanish = ratios.windows(2).all(|w| w[1] <= w[0]) && ratios[n - 1] < 0.1;
    let classification = if growing && ratios_vanish {
        Classification::DirichletDecoupling
    } else if sizes.windows(2).all(|w| w[1] > w[0]) && sizes[n - 1] > 10.0 * sizes[0] {
        Classification::Divergent
    } else {
        return Err(Error::AmbiguousClassification(format!(
            "no stable pattern over {n} eps values (last step {:e}, size {:e})",
            diffs[n - 1],
            sizes[n - 1]
        )));
    };
    Ok(ConvergenceReport {
        classification,
        eps: eps_seq.to_vec(),
        matrices,
        rates: diffs,
        observed_order,
    })
}

/// `eps0 · ratio^k` for k = 0..count.
pub fn geometric_eps(eps0: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| eps0 * ratio.powi(k as i32)).collect()
}

/// The δ′-potential limit expected of the two- and three-atom families.
pub fn expected_theta_limit(gamma: f64) -> Result<Mat2> {
    let t = theta_of_gamma(gamma)?;
    Ok(Matrix2::new(c(t), c(0.0), c(0.0), c(1.0 / t)))
}
