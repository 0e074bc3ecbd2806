//! One-point boundary conditions.
//!
//! A point interaction at `x0` is a Lagrangian plane in the four-dimensional
//! space of one-sided traces `(ψ(x0+0), ψ(x0-0), ψ'(x0+0), ψ'(x0-0))`. This
//! module covers the canonical interactions (δ, δ′, δ′-potential,
//! δ-magnetic, transparent, split), their transmission matrices `Λ`, the
//! Hermitian `B` form, the two unitary parametrizations `U` and `Û`, and the
//! composition laws for approaching interactions.

use nalgebra::{Matrix2, Matrix4x2, Vector2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

/// Tolerance below which `D`, `2 - γ` and `1 + γ₋γ₊/4` are treated as poles.
pub const POLE_TOL: f64 = 1e-12;

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// One-sided values and derivatives of a function at a single point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTraces {
    pub v_plus: C64,
    pub v_minus: C64,
    pub d_plus: C64,
    pub d_minus: C64,
}

impl BoundaryTraces {
    pub fn new(v_plus: C64, v_minus: C64, d_plus: C64, d_minus: C64) -> Self {
        Self {
            v_plus,
            v_minus,
            d_plus,
            d_minus,
        }
    }

    pub fn real(v_plus: f64, v_minus: f64, d_plus: f64, d_minus: f64) -> Self {
        Self::new(c(v_plus), c(v_minus), c(d_plus), c(d_minus))
    }

    /// ψ_s: the jump of the value.
    pub fn value_jump(&self) -> C64 {
        self.v_plus - self.v_minus
    }

    /// ψ′_s: the jump of the derivative.
    pub fn derivative_jump(&self) -> C64 {
        self.d_plus - self.d_minus
    }

    /// ψ_r: the mean of the one-sided values.
    pub fn value_mean(&self) -> C64 {
        (self.v_plus + self.v_minus) * 0.5
    }

    /// ψ′_r: the mean of the one-sided derivatives.
    pub fn derivative_mean(&self) -> C64 {
        (self.d_plus + self.d_minus) * 0.5
    }

    /// The trace vector Γψ in the order (v₊, v₋, d₊, d₋).
    pub fn to_vector(&self) -> Vector4<C64> {
        Vector4::new(self.v_plus, self.v_minus, self.d_plus, self.d_minus)
    }

    pub fn from_vector(v: &Vector4<C64>) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    /// Rebuilds the one-sided traces from jumps and means.
    pub fn from_jumps_and_means(
        value_jump: C64,
        derivative_jump: C64,
        value_mean: C64,
        derivative_mean: C64,
    ) -> Self {
        Self::new(
            value_mean + value_jump * 0.5,
            value_mean - value_jump * 0.5,
            derivative_mean + derivative_jump * 0.5,
            derivative_mean - derivative_jump * 0.5,
        )
    }

    /// (Γ₁ψ, Γ₂ψ) with Γ₁ψ = (ψ′(x0+0), −ψ′(x0−0)) and Γ₂ψ = (ψ(x0+0), ψ(x0−0)).
    pub fn gamma_pair(&self) -> (Vector2<C64>, Vector2<C64>) {
        (
            Vector2::new(self.d_plus, -self.d_minus),
            Vector2::new(self.v_plus, self.v_minus),
        )
    }

    /// (Γ̂₁ψ, Γ̂₂ψ) with Γ̂₁ψ = (ψ′_s, ψ_s) and Γ̂₂ψ = (ψ_r, −ψ′_r).
    pub fn hat_gamma_pair(&self) -> (Vector2<C64>, Vector2<C64>) {
        (
            Vector2::new(self.derivative_jump(), self.value_jump()),
            Vector2::new(self.value_mean(), -self.derivative_mean()),
        )
    }
}

/// The boundary form ω(Γp, Γq) of the Lagrange identity.
pub fn boundary_form(p: &BoundaryTraces, q: &BoundaryTraces) -> C64 {
    p.d_plus * q.v_plus.conj() - p.v_plus * q.d_plus.conj() - p.d_minus * q.v_minus.conj()
        + p.v_minus * q.d_minus.conj()
}

fn boundary_form_vec(p: &Vector4<C64>, q: &Vector4<C64>) -> C64 {
    boundary_form(
        &BoundaryTraces::from_vector(p),
        &BoundaryTraces::from_vector(q),
    )
}

/// A transmission matrix `Λ` linking `(ψ, ψ′)` across a point:
/// `col(ψ(x0+0), ψ′(x0+0)) = Λ col(ψ(x0−0), ψ′(x0−0))`.
///
/// Valid matrices have the form `e^{iη} R` with `R` real and `det R = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionMatrix(Mat2);

impl TransmissionMatrix {
    /// Accepts a matrix if it is `e^{iη}R` with real unimodular `R` to within `1e-10`.
    pub fn new(m: Mat2) -> Result<Self> {
        Self::with_tolerance(m, 1e-10)
    }

    /// As [`TransmissionMatrix::new`] with a caller-chosen tolerance, for
    /// matrices that carry discretization error (extrapolated limits).
    pub fn with_tolerance(m: Mat2, tol: f64) -> Result<Self> {
        let t = Self(m);
        let defect = t.invariant_defect();
        if defect > tol {
            return Err(Error::InvalidInput(format!(
                "matrix is not of the form e^(i eta) R with det R = 1 (defect {defect:e})"
            )));
        }
        Ok(t)
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(Mat2::new(c(m[0][0]), c(m[0][1]), c(m[1][0]), c(m[1][1])))
    }

    pub fn identity() -> Self {
        Self(Mat2::identity())
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    /// η = arg(det Λ)/2, normalized to (−π/2, π/2].
    pub fn phase(&self) -> f64 {
        self.0.determinant().arg() / 2.0
    }

    /// The real unimodular factor `R = e^{−iη}Λ`, dropping the (numerically zero) imaginary parts.
    pub fn real_factor(&self) -> [[f64; 2]; 2] {
        let r = self.0 * C64::from_polar(1.0, -self.phase());
        [[r[(0, 0)].re, r[(0, 1)].re], [r[(1, 0)].re, r[(1, 1)].re]]
    }

    /// Combined deviation from `|det Λ| = 1` and from reality of `e^{−iη}Λ`.
    pub fn invariant_defect(&self) -> f64 {
        let det = self.0.determinant();
        let r = self.0 * C64::from_polar(1.0, -det.arg() / 2.0);
        let scale = self.0.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let imag = r.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale;
        (det.norm() - 1.0).abs().max(imag)
    }

    /// Applies Λ to the left-hand traces `(ψ(x0−0), ψ′(x0−0))`.
    pub fn apply(&self, value: C64, derivative: C64) -> (C64, C64) {
        let out = self.0 * Vector2::new(value, derivative);
        (out[0], out[1])
    }
}

/// `Λ = Λ⁺Λ⁻` for an interaction built from a left part `Λ⁻` followed by a right part `Λ⁺`.
pub fn compose(left: &TransmissionMatrix, right: &TransmissionMatrix) -> TransmissionMatrix {
    TransmissionMatrix(left.0 * right.0)
}

/// The four intensities of the Hermitian form
/// `(ψ′_s, ψ_s) = B (ψ_r, −ψ′_r)` with `B = [[α, γ−iμ], [γ+iμ, −β]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SelfAdjointB {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
}

impl SelfAdjointB {
    pub fn new(alpha: f64, beta: f64, gamma: f64, mu: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            mu,
        }
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(
            c(self.alpha),
            C64::new(self.gamma, -self.mu),
            C64::new(self.gamma, self.mu),
            c(-self.beta),
        )
    }
}

/// Transmission matrix of the B-form conditions.
///
/// With `D = (1 − iμ/2)² − αβ/4 − γ²/4` and `θ± = (1 ± γ/2)² + αβ/4 + μ²/4`
/// the result is `Λ = D⁻¹ [[θ₊, β], [α, θ₋]]`.
pub fn b_to_lambda(b: &SelfAdjointB) -> Result<TransmissionMatrix> {
    let SelfAdjointB {
        alpha,
        beta,
        gamma,
        mu,
    } = *b;
    let d = (c(1.0) - I * (mu / 2.0)).powi(2) - c(alpha * beta / 4.0 + gamma * gamma / 4.0);
    if d.norm() < POLE_TOL {
        return Err(Error::SingularD(d.norm()));
    }
    let common = alpha * beta / 4.0 + mu * mu / 4.0;
    let theta_plus = (1.0 + gamma / 2.0).powi(2) + common;
    let theta_minus = (1.0 - gamma / 2.0).powi(2) + common;
    let m = Mat2::new(c(theta_plus), c(beta), c(alpha), c(theta_minus)) / d;
    Ok(TransmissionMatrix(m))
}

/// The Cayley transform `Û = (B − i)⁻¹(B + i)`.
pub fn b_to_unitary(b: &SelfAdjointB) -> Mat2 {
    let bm = b.matrix();
    let id = Mat2::identity();
    let minus = bm - id * I;
    let plus = bm + id * I;
    // B Hermitian, so B − i has no kernel.
    minus
        .try_inverse()
        .expect("B - i is invertible for Hermitian B")
        * plus
}

/// The canonical point interactions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InteractionKind {
    Delta {
        alpha: f64,
    },
    DeltaPrime {
        beta: f64,
    },
    DeltaPrimePotential {
        gamma: f64,
    },
    DeltaMagnetic {
        mu: f64,
    },
    Transparent {
        lambda0: f64,
    },
    /// Separated conditions, angles in (−π/2, π/2].
    Split {
        alpha_plus: f64,
        alpha_minus: f64,
    },
    GeneralLambda(TransmissionMatrix),
    GeneralB(SelfAdjointB),
}

/// θ = (2+γ)/(2−γ).
pub fn theta_of_gamma(gamma: f64) -> Result<f64> {
    if (2.0 - gamma).abs() < POLE_TOL {
        return Err(Error::GammaPole(gamma));
    }
    Ok((2.0 + gamma) / (2.0 - gamma))
}

/// μ ↦ η = 2 arctan(μ/2), in (−π, π).
pub fn mu_to_eta(mu: f64) -> f64 {
    2.0 * (mu / 2.0).atan()
}

/// η ↦ μ = 2 tan(η/2); η is first reduced to (−π, π].
pub fn eta_to_mu(eta: f64) -> f64 {
    2.0 * (normalize_angle(eta) / 2.0).tan()
}

/// Reduces an angle to (−π, π].
pub fn normalize_angle(eta: f64) -> f64 {
    let mut e = eta.rem_euclid(2.0 * PI);
    if e > PI {
        e -= 2.0 * PI;
    }
    e
}

/// The transmission matrix of a non-split interaction.
pub fn lambda_of(kind: &InteractionKind) -> Result<TransmissionMatrix> {
    let m = match *kind {
        InteractionKind::Delta { alpha } => Mat2::new(c(1.0), c(0.0), c(alpha), c(1.0)),
        InteractionKind::DeltaPrime { beta } => Mat2::new(c(1.0), c(beta), c(0.0), c(1.0)),
        InteractionKind::DeltaPrimePotential { gamma } => {
            let theta = theta_of_gamma(gamma)?;
            Mat2::new(c(theta), c(0.0), c(0.0), c(1.0 / theta))
        }
        InteractionKind::DeltaMagnetic { mu } => {
            Mat2::identity() * C64::from_polar(1.0, mu_to_eta(mu))
        }
        InteractionKind::Transparent { lambda0 } => {
            if lambda0 == 0.0 || !lambda0.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "transparent interaction needs a finite nonzero lambda0 (got {lambda0})"
                )));
            }
            Mat2::new(c(0.0), c(-1.0 / lambda0), c(lambda0), c(0.0)) * I
        }
        InteractionKind::Split { .. } => return Err(Error::SplitHasNoLambda),
        InteractionKind::GeneralLambda(t) => return Ok(t),
        InteractionKind::GeneralB(b) => return b_to_lambda(&b),
    };
    Ok(TransmissionMatrix(m))
}

/// The single-parameter B matrix of a canonical kind, when one exists.
pub fn b_of(kind: &InteractionKind) -> Option<SelfAdjointB> {
    match *kind {
        InteractionKind::Delta { alpha } => Some(SelfAdjointB::new(alpha, 0.0, 0.0, 0.0)),
        InteractionKind::DeltaPrime { beta } => Some(SelfAdjointB::new(0.0, beta, 0.0, 0.0)),
        InteractionKind::DeltaPrimePotential { gamma } => {
            Some(SelfAdjointB::new(0.0, 0.0, gamma, 0.0))
        }
        InteractionKind::DeltaMagnetic { mu } => Some(SelfAdjointB::new(0.0, 0.0, 0.0, mu)),
        InteractionKind::GeneralB(b) => Some(b),
        _ => None,
    }
}

/// Composition of δ′-potential intensities `γ = (γ₋ + γ₊)/(1 + γ₋γ₊/4)`.
pub fn gamma_compose(gm: f64, gp: f64) -> Result<f64> {
    let denom = 1.0 + gm * gp / 4.0;
    if denom.abs() < POLE_TOL {
        return Err(Error::DegenerateComposition(denom));
    }
    Ok((gm + gp) / denom)
}

/// Additive characteristic `(ξ, s)` of a δ′-potential: `(2+γ)/(2−γ) = s·e^ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdditiveCharacteristic {
    pub xi: f64,
    pub s: i8,
}

impl AdditiveCharacteristic {
    /// `(ξ, s) ⊕ (ξ′, s′) = (ξ + ξ′, s·s′)`.
    pub fn combine(self, other: Self) -> Self {
        Self {
            xi: self.xi + other.xi,
            s: self.s * other.s,
        }
    }

    /// Inverts θ = s·e^ξ back to γ = 2(θ − 1)/(θ + 1).
    pub fn to_gamma(self) -> Result<f64> {
        let theta = f64::from(self.s) * self.xi.exp();
        let denom = theta + 1.0;
        if denom.abs() < POLE_TOL {
            // θ = −1 is the γ = ∞ point of the family.
            return Err(Error::CharacteristicPole(f64::INFINITY));
        }
        Ok(2.0 * (theta - 1.0) / denom)
    }
}

pub fn gamma_to_characteristic(gamma: f64) -> Result<AdditiveCharacteristic> {
    if (gamma.abs() - 2.0).abs() < POLE_TOL {
        return Err(Error::CharacteristicPole(gamma));
    }
    let theta = (2.0 + gamma) / (2.0 - gamma);
    Ok(AdditiveCharacteristic {
        xi: theta.abs().ln(),
        s: if gamma.abs() < 2.0 { 1 } else { -1 },
    })
}

/// A two-dimensional subspace of the trace space, stored by a basis in the
/// coordinates (v₊, v₋, d₊, d₋).
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianPlane {
    basis: Matrix4x2<C64>,
}

impl LagrangianPlane {
    pub fn from_basis(basis: Matrix4x2<C64>) -> Self {
        Self { basis }
    }

    pub fn basis(&self) -> &Matrix4x2<C64> {
        &self.basis
    }

    pub fn basis_traces(&self) -> [BoundaryTraces; 2] {
        let col = |j: usize| {
            BoundaryTraces::new(
                self.basis[(0, j)],
                self.basis[(1, j)],
                self.basis[(2, j)],
                self.basis[(3, j)],
            )
        };
        [col(0), col(1)]
    }

    /// Traces reachable from the left-hand data through Λ.
    pub fn from_transmission(t: &TransmissionMatrix) -> Self {
        let m = t.matrix();
        let basis = Matrix4x2::new(
            m[(0, 0)],
            m[(0, 1)],
            c(1.0),
            c(0.0),
            m[(1, 0)],
            m[(1, 1)],
            c(0.0),
            c(1.0),
        );
        Self { basis }
    }

    /// The plane `Γ̂₁ψ = BΓ̂₂ψ`.
    pub fn from_b(b: &SelfAdjointB) -> Self {
        let bm = b.matrix();
        Self::from_hat_coordinates(&bm, &Mat2::identity())
    }

    /// Split conditions `ψ(x0±0) cos α± − ψ′(x0±0) sin α± = 0`.
    pub fn from_split(alpha_plus: f64, alpha_minus: f64) -> Self {
        let basis = Matrix4x2::new(
            c(alpha_plus.sin()),
            c(0.0),
            c(0.0),
            c(alpha_minus.sin()),
            c(alpha_plus.cos()),
            c(0.0),
            c(0.0),
            c(alpha_minus.cos()),
        );
        Self { basis }
    }

    pub fn from_kind(kind: &InteractionKind) -> Result<Self> {
        match *kind {
            InteractionKind::Split {
                alpha_plus,
                alpha_minus,
            } => Ok(Self::from_split(alpha_plus, alpha_minus)),
            _ => Ok(Self::from_transmission(&lambda_of(kind)?)),
        }
    }

    /// The plane of `Γ₁ψ + iΓ₂ψ = U(Γ₁ψ − iΓ₂ψ)`.
    pub fn from_u(u: &Mat2) -> Self {
        let id = Mat2::identity();
        let g1 = id + u;
        let g2 = (id - u) * I;
        let mut basis = Matrix4x2::zeros();
        for j in 0..2 {
            basis[(0, j)] = g2[(0, j)];
            basis[(1, j)] = g2[(1, j)];
            basis[(2, j)] = g1[(0, j)];
            basis[(3, j)] = -g1[(1, j)];
        }
        Self { basis }
    }

    /// The plane of `Γ̂₁ψ + iΓ̂₂ψ = Û(Γ̂₁ψ − iΓ̂₂ψ)`.
    pub fn from_u_hat(u_hat: &Mat2) -> Self {
        let id = Mat2::identity();
        Self::from_hat_coordinates(&(id + u_hat), &((id - u_hat) * I))
    }

    /// Plane whose basis has Γ̂₁ columns `x` and Γ̂₂ columns `y`.
    fn from_hat_coordinates(x: &Mat2, y: &Mat2) -> Self {
        let mut basis = Matrix4x2::zeros();
        for j in 0..2 {
            let t =
                BoundaryTraces::from_jumps_and_means(x[(1, j)], x[(0, j)], y[(0, j)], -y[(1, j)]);
            basis[(0, j)] = t.v_plus;
            basis[(1, j)] = t.v_minus;
            basis[(2, j)] = t.d_plus;
            basis[(3, j)] = t.d_minus;
        }
        Self { basis }
    }

    /// The unitary U of the (Γ₁, Γ₂) parametrization.
    pub fn to_u(&self) -> Result<Mat2> {
        let [a, b] = self.basis_traces();
        let (x0, y0) = a.gamma_pair();
        let (x1, y1) = b.gamma_pair();
        cayley_of_pair(
            &Mat2::from_columns(&[x0, x1]),
            &Mat2::from_columns(&[y0, y1]),
        )
    }

    /// The unitary Û of the (Γ̂₁, Γ̂₂) parametrization.
    pub fn to_u_hat(&self) -> Result<Mat2> {
        let [a, b] = self.basis_traces();
        let (x0, y0) = a.hat_gamma_pair();
        let (x1, y1) = b.hat_gamma_pair();
        cayley_of_pair(
            &Mat2::from_columns(&[x0, x1]),
            &Mat2::from_columns(&[y0, y1]),
        )
    }

    /// Largest normalized |ω| over pairs of basis vectors.
    pub fn form_defect(&self) -> f64 {
        let cols: Vec<Vector4<C64>> = (0..2).map(|j| self.basis.column(j).into_owned()).collect();
        let mut worst = 0.0f64;
        for p in &cols {
            for q in &cols {
                let w = boundary_form_vec(p, q).norm() / (p.norm() * q.norm());
                worst = worst.max(w);
            }
        }
        worst
    }

    /// True when the basis has rank 2 and ω vanishes on the plane.
    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        is_self_adjoint_plane(&self.basis, tol)
    }

    /// Normalized distance of a trace vector from the plane, measured through
    /// ω against the basis (a Lagrangian plane is its own ω-complement).
    pub fn residual(&self, t: &BoundaryTraces) -> f64 {
        let v = t.to_vector();
        let vn = v.norm().max(f64::MIN_POSITIVE);
        (0..2)
            .map(|j| {
                let b = self.basis.column(j).into_owned();
                boundary_form_vec(&v, &b).norm() / (vn * b.norm())
            })
            .fold(0.0, f64::max)
    }

    /// A point of the plane from the coefficients of its basis.
    pub fn sample(&self, a: C64, b: C64) -> BoundaryTraces {
        let v = self.basis * Vector2::new(a, b);
        BoundaryTraces::from_vector(&v.into_owned())
    }
}

fn cayley_of_pair(x: &Mat2, y: &Mat2) -> Result<Mat2> {
    let plus = x + y * I;
    let minus = x - y * I;
    let svd = minus.svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax == 0.0 || smin / smax < 1e-12 {
        return Err(Error::PlaneNotGraph(if smax == 0.0 {
            0.0
        } else {
            smin / smax
        }));
    }
    let inv = minus.try_inverse().ok_or(Error::PlaneNotGraph(0.0))?;
    Ok(plus * inv)
}

/// Checks that the span of `basis` is two-dimensional and that the boundary
/// form vanishes on it (normalized |ω| below `tol`).
pub fn is_self_adjoint_plane(basis: &Matrix4x2<C64>, tol: f64) -> bool {
    let sv = basis.svd(false, false).singular_values;
    if sv.max() == 0.0 || sv.min() / sv.max() < 1e-10 {
        return false;
    }
    LagrangianPlane::from_basis(*basis).form_defect() < tol
}

/// Maps the unitary U of the (Γ₁, Γ₂) coordinates to the unitary Û of the
/// (Γ̂₁, Γ̂₂) coordinates describing the same plane.
pub fn u_hat_from_u(u: &Mat2) -> Result<Mat2> {
    LagrangianPlane::from_u(u).to_u_hat()
}

/// Inverse of [`u_hat_from_u`].
pub fn u_from_u_hat(u_hat: &Mat2) -> Result<Mat2> {
    LagrangianPlane::from_u_hat(u_hat).to_u()
}

/// `‖UU* − I‖` (max entry).
pub fn unitarity_defect(u: &Mat2) -> f64 {
    (u * u.adjoint() - Mat2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() < tol)
    }

    fn real2(m: [[f64; 2]; 2]) -> Mat2 {
        Mat2::new(c(m[0][0]), c(m[0][1]), c(m[1][0]), c(m[1][1]))
    }

    // Solves the B-form conditions for (ψ(x0+0), ψ′(x0+0)) directly; used
    // as an oracle for the closed-form D, θ± expression.
    fn lambda_by_solving(b: &SelfAdjointB) -> Mat2 {
        let bm = b.matrix();
        let mut out = Mat2::zeros();
        for (j, (vm, dm)) in [(c(1.0), c(0.0)), (c(0.0), c(1.0))].into_iter().enumerate() {
            // unknowns (a, d) = (v+, d+); equations B(v_r, −d_r) − (d_s, v_s) = 0
            let mut lhs = Mat2::zeros();
            let mut rhs = Vector2::zeros();
            for row in 0..2 {
                let (b0, b1) = (bm[(row, 0)], bm[(row, 1)]);
                lhs[(row, 0)] = b0 * 0.5;
                lhs[(row, 1)] = -b1 * 0.5;
                rhs[row] = -(b0 * vm * 0.5 - b1 * dm * 0.5);
            }
            // subtract (d_s, v_s) = (d − dm, a − vm)
            lhs[(0, 1)] -= c(1.0);
            rhs[0] -= dm;
            lhs[(1, 0)] -= c(1.0);
            rhs[1] -= vm;
            let sol = lhs.try_inverse().unwrap() * rhs;
            out[(0, j)] = sol[0];
            out[(1, j)] = sol[1];
        }
        out
    }

    #[test]
    fn boundary_form_examples() {
        let real = BoundaryTraces::real(0.3, -1.2, 2.0, 0.7);
        assert_eq!(boundary_form(&real, &real), c(0.0));
        let exp = BoundaryTraces::real(1.0, 1.0, 1.0, 1.0);
        assert_eq!(boundary_form(&exp, &exp), c(0.0));
        let p = BoundaryTraces::real(1.0, 0.0, 0.0, 0.0);
        let q = BoundaryTraces::real(0.0, 0.0, 1.0, 0.0);
        assert_eq!(boundary_form(&p, &q), c(-1.0));
    }

    #[test]
    fn boundary_form_is_antihermitian() {
        let p = BoundaryTraces::new(
            C64::new(1.0, 2.0),
            C64::new(-0.5, 0.1),
            C64::new(0.3, -1.0),
            C64::new(2.0, 0.0),
        );
        let q = BoundaryTraces::new(
            C64::new(0.2, 0.0),
            C64::new(1.5, -2.0),
            C64::new(-1.0, 1.0),
            C64::new(0.0, 0.4),
        );
        let lhs = boundary_form(&p, &q);
        let rhs = -boundary_form(&q, &p).conj();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn jump_and_mean_relations() {
        let t = BoundaryTraces::real(3.0, 1.0, -2.0, 4.0);
        assert_eq!(t.value_jump(), c(2.0));
        assert_eq!(t.derivative_jump(), c(-6.0));
        assert_eq!(t.value_mean(), c(2.0));
        assert_eq!(t.derivative_mean(), c(1.0));
        let back = BoundaryTraces::from_jumps_and_means(
            t.value_jump(),
            t.derivative_jump(),
            t.value_mean(),
            t.derivative_mean(),
        );
        assert_eq!(back, t);
    }

    #[test]
    fn canonical_lambdas() {
        let d = lambda_of(&InteractionKind::Delta { alpha: 5.0 }).unwrap();
        assert!(close(
            d.matrix(),
            &real2([[1.0, 0.0], [5.0, 1.0]]),
            0.0 + 1e-15
        ));
        let p = lambda_of(&InteractionKind::DeltaPrimePotential { gamma: 2.0 / 3.0 }).unwrap();
        assert!(close(p.matrix(), &real2([[2.0, 0.0], [0.0, 0.5]]), 1e-15));
        let t = lambda_of(&InteractionKind::Transparent { lambda0: 1.0 }).unwrap();
        assert!(close(
            t.matrix(),
            &(real2([[0.0, -1.0], [1.0, 0.0]]) * I),
            1e-15
        ));
    }

    #[test]
    fn transparent_passes_plane_wave() {
        for lambda0 in [1.0, 0.5, -2.5] {
            let t = lambda_of(&InteractionKind::Transparent { lambda0 }).unwrap();
            // e^{iλ0 x} at x0 = 0.7
            let x0 = 0.7;
            let v = C64::from_polar(1.0, lambda0 * x0);
            let d = v * I * lambda0;
            let (vp, dp) = t.apply(v, d);
            assert!((vp - v).norm() < 1e-14);
            assert!((dp - d).norm() < 1e-14);
        }
    }

    #[test]
    fn poles_and_split_are_errors() {
        assert_eq!(
            lambda_of(&InteractionKind::DeltaPrimePotential { gamma: 2.0 }),
            Err(Error::GammaPole(2.0))
        );
        assert_eq!(
            lambda_of(&InteractionKind::Split {
                alpha_plus: 0.1,
                alpha_minus: 0.2
            }),
            Err(Error::SplitHasNoLambda)
        );
        assert!(lambda_of(&InteractionKind::Transparent { lambda0: 0.0 }).is_err());
        // α β = 4 with γ = μ = 0 gives D = 0
        assert!(matches!(
            b_to_lambda(&SelfAdjointB::new(2.0, 2.0, 0.0, 0.0)),
            Err(Error::SingularD(_))
        ));
    }

    #[test]
    fn b_to_lambda_examples() {
        let id = b_to_lambda(&SelfAdjointB::default()).unwrap();
        assert!(close(id.matrix(), &Mat2::identity(), 1e-15));
        let bp = b_to_lambda(&SelfAdjointB::new(0.0, -1.7, 0.0, 0.0)).unwrap();
        assert!(close(bp.matrix(), &real2([[1.0, -1.7], [0.0, 1.0]]), 1e-15));
        let g = b_to_lambda(&SelfAdjointB::new(0.0, 0.0, 2.0 / 3.0, 0.0)).unwrap();
        assert!(close(g.matrix(), &real2([[2.0, 0.0], [0.0, 0.5]]), 1e-14));
    }

    #[test]
    fn b_to_lambda_matches_direct_solve() {
        let cases = [
            SelfAdjointB::new(1.0, 0.5, -0.3, 0.7),
            SelfAdjointB::new(-2.0, 3.0, 1.5, -4.0),
            SelfAdjointB::new(0.0, 0.0, 0.0, 2.0),
            SelfAdjointB::new(7.0, -0.2, 0.0, 0.0),
        ];
        for b in cases {
            let formula = b_to_lambda(&b).unwrap();
            let solved = lambda_by_solving(&b);
            assert!(close(formula.matrix(), &solved, 1e-12), "{b:?}");
            assert!(formula.invariant_defect() < 1e-12);
        }
    }

    #[test]
    fn single_parameter_b_matches_lambda_of() {
        for k in -20..=20 {
            let p = f64::from(k) * 0.5;
            let mut kinds = vec![
                InteractionKind::Delta { alpha: p },
                InteractionKind::DeltaPrime { beta: p },
                InteractionKind::DeltaMagnetic { mu: p },
            ];
            if (p.abs() - 2.0).abs() > 1e-9 {
                kinds.push(InteractionKind::DeltaPrimePotential { gamma: p });
            }
            for kind in kinds {
                let direct = lambda_of(&kind).unwrap();
                let via_b = b_to_lambda(&b_of(&kind).unwrap()).unwrap();
                let err = (direct.matrix() - via_b.matrix())
                    .iter()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12, "{kind:?}: {err:e}");
            }
        }
    }

    #[test]
    fn gamma_pole_in_b_form_is_the_theta_pole() {
        // γ = 2 with α = β = μ = 0 gives D = 0.
        assert!(b_to_lambda(&SelfAdjointB::new(0.0, 0.0, 2.0, 0.0)).is_err());
    }

    #[test]
    fn cayley_examples() {
        let u0 = b_to_unitary(&SelfAdjointB::default());
        assert!(close(&u0, &(-Mat2::identity()), 1e-15));
        let u1 = b_to_unitary(&SelfAdjointB::new(1.0, 1.0, 0.0, 0.0));
        // B = diag(1, −1)
        assert!(close(&u1, &Mat2::new(I, c(0.0), c(0.0), -I), 1e-15));
    }

    #[test]
    fn cayley_of_hermitian_is_unitary() {
        let cases = [
            SelfAdjointB::new(1.0, 0.5, -0.3, 0.7),
            SelfAdjointB::new(-20.0, 3.0, 11.5, -4.0),
            SelfAdjointB::new(1e3, 1e-3, 0.0, 1.0),
        ];
        for b in cases {
            assert!(unitarity_defect(&b_to_unitary(&b)) < 1e-12);
        }
    }

    #[test]
    fn composition_laws() {
        let d = |a| lambda_of(&InteractionKind::Delta { alpha: a }).unwrap();
        let p = |b| lambda_of(&InteractionKind::DeltaPrime { beta: b }).unwrap();
        let g = |x| lambda_of(&InteractionKind::DeltaPrimePotential { gamma: x }).unwrap();
        assert!(close(
            compose(&d(1.5), &d(-0.25)).matrix(),
            d(1.25).matrix(),
            1e-15
        ));
        assert!(close(
            compose(&p(2.0), &p(-3.0)).matrix(),
            p(-1.0).matrix(),
            1e-15
        ));
        for (gm, gp) in [(0.5, 0.3), (1.0, -1.5), (3.0, 5.0), (-6.0, 0.4)] {
            let total = gamma_compose(gm, gp).unwrap();
            assert!(close(
                compose(&g(gp), &g(gm)).matrix(),
                g(total).matrix(),
                1e-12
            ));
        }
    }

    #[test]
    fn gamma_compose_examples() {
        assert_eq!(gamma_compose(0.7, 0.0).unwrap(), 0.7);
        assert_abs_diff_eq!(
            gamma_compose(2.0 / 3.0, 2.0 / 3.0).unwrap(),
            1.2,
            epsilon = 1e-15
        );
        assert_eq!(gamma_compose(1.5, -1.5).unwrap(), 0.0);
        assert!(matches!(
            gamma_compose(2.0, -2.0),
            Err(Error::DegenerateComposition(_))
        ));
        assert!(matches!(
            gamma_compose(4.0, -1.0),
            Err(Error::DegenerateComposition(_))
        ));
        let t = theta_of_gamma(1.2).unwrap();
        assert_abs_diff_eq!(
            t,
            theta_of_gamma(2.0 / 3.0).unwrap().powi(2),
            epsilon = 1e-14
        );
    }

    #[test]
    fn characteristic_examples() {
        assert_eq!(
            gamma_to_characteristic(0.0).unwrap(),
            AdditiveCharacteristic { xi: 0.0, s: 1 }
        );
        let a = gamma_to_characteristic(2.0 / 3.0).unwrap();
        assert_abs_diff_eq!(a.xi, 2f64.ln(), epsilon = 1e-15);
        assert_eq!(a.s, 1);
        let b = gamma_to_characteristic(6.0).unwrap();
        assert_abs_diff_eq!(b.xi, 2f64.ln(), epsilon = 1e-15);
        assert_eq!(b.s, -1);
        assert!(gamma_to_characteristic(-2.0).is_err());
        assert!(gamma_to_characteristic(2.0).is_err());
    }

    #[test]
    fn characteristic_sign_flips_at_two() {
        assert_eq!(gamma_to_characteristic(1.999999).unwrap().s, 1);
        assert_eq!(gamma_to_characteristic(2.000001).unwrap().s, -1);
        assert_eq!(gamma_to_characteristic(-1.999999).unwrap().s, 1);
        assert_eq!(gamma_to_characteristic(-2.000001).unwrap().s, -1);
    }

    #[test]
    fn characteristic_addition_matches_gamma_compose() {
        for (gm, gp) in [(0.5, 0.3), (1.0, -1.5), (3.0, 5.0), (-6.0, 0.4), (2.5, 0.1)] {
            let sum = gamma_to_characteristic(gm)
                .unwrap()
                .combine(gamma_to_characteristic(gp).unwrap());
            let direct = gamma_compose(gm, gp).unwrap();
            assert_abs_diff_eq!(
                sum.to_gamma().unwrap(),
                direct,
                epsilon = 1e-12 * (1.0 + direct.abs())
            );
        }
    }

    #[test]
    fn mu_eta_relations() {
        assert_eq!(mu_to_eta(0.0), 0.0);
        assert_abs_diff_eq!(mu_to_eta(2.0), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(eta_to_mu(mu_to_eta(3.7)), 3.7, epsilon = 1e-13);
        let eta = PI / 3.0;
        let m = lambda_of(&InteractionKind::DeltaMagnetic { mu: eta_to_mu(eta) }).unwrap();
        let both = compose(&m, &m);
        let expected = Mat2::identity() * C64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!(close(both.matrix(), &expected, 1e-14));
    }

    #[test]
    fn magnetic_lambda_is_pure_phase() {
        for mu in [-5.0, -0.3, 0.0, 1.0, 8.0] {
            let m = lambda_of(&InteractionKind::DeltaMagnetic { mu }).unwrap();
            let scaled = m.matrix() * C64::from_polar(1.0, -mu_to_eta(mu));
            assert!(close(&scaled, &Mat2::identity(), 1e-15));
        }
    }

    #[test]
    fn transmission_invariant_rejects_bad_matrices() {
        assert!(TransmissionMatrix::from_real([[2.0, 0.0], [0.0, 2.0]]).is_err());
        let bad = Mat2::new(c(1.0), I, c(0.0), c(1.0));
        assert!(TransmissionMatrix::new(bad).is_err());
        assert!(TransmissionMatrix::from_real([[2.0, 1.0], [1.0, 1.0]]).is_ok());
    }

    #[test]
    fn canonical_planes_are_lagrangian() {
        let kinds = [
            InteractionKind::Delta { alpha: -3.0 },
            InteractionKind::DeltaPrime { beta: 0.4 },
            InteractionKind::DeltaPrimePotential { gamma: 5.0 },
            InteractionKind::DeltaMagnetic { mu: 1.3 },
            InteractionKind::Transparent { lambda0: 2.0 },
            InteractionKind::Split {
                alpha_plus: 0.3,
                alpha_minus: -1.2,
            },
            InteractionKind::GeneralB(SelfAdjointB::new(1.0, -2.0, 0.5, 0.25)),
        ];
        for kind in kinds {
            let plane = LagrangianPlane::from_kind(&kind).unwrap();
            assert!(plane.is_self_adjoint(1e-12), "{kind:?}");
        }
        // a non-Lagrangian plane: v+ = v−, d+ = 2 d−
        let bad = LagrangianPlane::from_basis(Matrix4x2::new(
            c(1.0),
            c(0.0),
            c(1.0),
            c(0.0),
            c(0.0),
            c(2.0),
            c(0.0),
            c(1.0),
        ));
        assert!(!bad.is_self_adjoint(1e-6));
    }

    #[test]
    fn delta_prime_unitary_round_trip() {
        for beta in [-2.0, -0.5, 0.3, 4.0] {
            let b = SelfAdjointB::new(0.0, beta, 0.0, 0.0);
            let u_hat = b_to_unitary(&b);
            let u = u_from_u_hat(&u_hat).unwrap();
            assert!(unitarity_defect(&u) < 1e-12);
            let back = u_hat_from_u(&u).unwrap();
            assert!(close(&back, &u_hat, 1e-10));
            // sample traces of the U-plane satisfy the δ′ conditions
            let plane = LagrangianPlane::from_u(&u);
            for (a, bb) in [(c(1.0), c(0.0)), (c(0.3), C64::new(-1.0, 2.0))] {
                let t = plane.sample(a, bb);
                assert!(t.derivative_jump().norm() < 1e-12);
                assert!((t.value_jump() - t.derivative_mean() * beta).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn diagonal_u_gives_split_conditions() {
        let (ap, am) = (0.4, -1.1);
        let u = Mat2::new(
            C64::from_polar(1.0, 2.0 * ap),
            c(0.0),
            c(0.0),
            C64::from_polar(1.0, -2.0 * am),
        );
        let plane = LagrangianPlane::from_u(&u);
        for (a, b) in [
            (c(1.0), c(0.0)),
            (c(0.0), c(1.0)),
            (C64::new(0.5, 1.0), c(-2.0)),
        ] {
            let t = plane.sample(a, b);
            assert!((t.v_plus * ap.cos() - t.d_plus * ap.sin()).norm() < 1e-12);
            assert!((t.v_minus * am.cos() - t.d_minus * am.sin()).norm() < 1e-12);
        }
        let u_hat = u_hat_from_u(&u).unwrap();
        assert!(unitarity_defect(&u_hat) < 1e-12);
        assert!(close(&u_from_u_hat(&u_hat).unwrap(), &u, 1e-10));
    }

    #[test]
    fn u_and_u_hat_of_b_plane_agree_with_cayley() {
        let b = SelfAdjointB::new(0.7, -1.3, 0.2, 0.9);
        let plane = LagrangianPlane::from_b(&b);
        assert!(close(&plane.to_u_hat().unwrap(), &b_to_unitary(&b), 1e-12));
        let u = plane.to_u().unwrap();
        assert!(unitarity_defect(&u) < 1e-12);
        assert!(close(&u_hat_from_u(&u).unwrap(), &b_to_unitary(&b), 1e-10));
    }

    #[test]
    fn residual_detects_membership() {
        let plane =
            LagrangianPlane::from_kind(&InteractionKind::DeltaPrime { beta: -1.0 }).unwrap();
        // constant function: traces (1,1,0,0)
        assert!(plane.residual(&BoundaryTraces::real(1.0, 1.0, 0.0, 0.0)) < 1e-15);
        assert!(plane.residual(&BoundaryTraces::real(1.0, 0.0, 0.0, 0.0)) > 0.1);
    }
}
