//! Test functions for the δ′ quadratic form and certified lower bounds on the
//! number of negative eigenvalues.

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;

use crate::bc::BoundaryTraces;
use crate::error::{Error, Result};
use crate::measure::{AtomicMeasure, BetaFunction};
use crate::spectral::{count_negative, Conditions, PointSystem};

/// Gauss-Legendre nodes per polynomial piece; exact up to degree 11.
const QUAD_NODES: usize = 6;
const MAX_HALVINGS: usize = 60;

fn quad() -> GaussLegendre {
    GaussLegendre::new(QUAD_NODES).expect("valid quadrature degree")
}

/// Parabolic ramp from 0 at `x0 − ε` through a jump β at `x0` to a plateau
/// `β + ε`, closed by two parabolas on `[x0 + l, x0 + l + 2r]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub x0: f64,
    pub eps: f64,
    pub beta: f64,
    pub l: f64,
    pub r: f64,
}

impl TestFunction {
    pub fn new(x0: f64, eps: f64, beta: f64, l: f64, r: f64) -> Result<Self> {
        if !(eps > 0.0 && r > 0.0 && l >= eps)
            || !(x0.is_finite() && beta.is_finite() && l.is_finite())
        {
            return Err(Error::InvalidInput(format!(
                "test function needs eps > 0, r > 0, l >= eps (eps={eps}, l={l}, r={r})"
            )));
        }
        Ok(Self {
            x0,
            eps,
            beta,
            l,
            r,
        })
    }

    pub fn plateau(&self) -> f64 {
        self.beta + self.eps
    }

    pub fn support(&self) -> (f64, f64) {
        (self.x0 - self.eps, self.x0 + self.l + 2.0 * self.r)
    }

    /// Pieces on which the function is a single polynomial.
    pub fn breakpoints(&self) -> [f64; 6] {
        let (x0, e, l, r) = (self.x0, self.eps, self.l, self.r);
        [x0 - e, x0, x0 + e, x0 + l, x0 + l + r, x0 + l + 2.0 * r]
    }

    /// Intervals where the derivative can be nonzero.
    pub fn derivative_support(&self) -> [(f64, f64); 2] {
        let b = self.breakpoints();
        [(b[0], b[2]), (b[3], b[5])]
    }

    /// Right-continuous derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        let y = x - self.x0;
        let (e, l, r, c) = (self.eps, self.l, self.r, self.plateau());
        if y < -e {
            0.0
        } else if y < 0.0 {
            (y + e) / e
        } else if y < e {
            (e - y) / e
        } else if y < l {
            0.0
        } else if y < l + r {
            -c * (y - l) / (r * r)
        } else if y < l + 2.0 * r {
            c * (y - l - 2.0 * r) / (r * r)
        } else {
            0.0
        }
    }

    pub fn traces(&self) -> BoundaryTraces {
        let e = self.eps;
        BoundaryTraces::real(self.beta + 0.5 * e, 0.5 * e, 1.0, 1.0)
    }
}

/// Right-continuous values.
pub fn test_eval(t: &TestFunction, x: f64) -> f64 {
    let y = x - t.x0;
    let (e, l, r, c) = (t.eps, t.l, t.r, t.plateau());
    if y <= -e {
        0.0
    } else if y < 0.0 {
        (y + e).powi(2) / (2.0 * e)
    } else if y < e {
        c - (y - e).powi(2) / (2.0 * e)
    } else if y < l {
        c
    } else if y < l + r {
        c * (1.0 - (y - l).powi(2) / (2.0 * r * r))
    } else if y < l + 2.0 * r {
        c * (y - l - 2.0 * r).powi(2) / (2.0 * r * r)
    } else {
        0.0
    }
}

/// β + 2ε/3 + 2(β+ε)²/(3r).
pub fn quadratic_form_point(t: &TestFunction) -> f64 {
    t.beta + 2.0 * t.eps / 3.0 + 2.0 * t.plateau().powi(2) / (3.0 * t.r)
}

/// ∫|t′|² + β|t′(x0+0)|², integrated piece by piece.
pub fn quadratic_form_point_numeric(t: &TestFunction) -> f64 {
    let q = quad();
    let b = t.breakpoints();
    let kinetic: f64 = b
        .windows(2)
        .map(|w| q.integrate(w[0], w[1], |x| t.derivative(x).powi(2)))
        .sum();
    kinetic + t.beta * t.derivative(t.x0).powi(2)
}

/// (ε, r) with ε = min(eps0, −3β/8) and form value β/2.
pub fn calibrate(beta: f64, eps0: f64) -> Result<(f64, f64)> {
    if !(beta < 0.0) {
        return Err(Error::InvalidInput(format!(
            "calibration needs beta < 0 (got {beta})"
        )));
    }
    if !(eps0 > 0.0) {
        return Err(Error::InfeasibleEps(eps0));
    }
    let eps = eps0.min(-3.0 * beta / 8.0);
    let denom = -3.0 * beta - 4.0 * eps;
    let r = 4.0 * (beta + eps).powi(2) / denom;
    if !(denom > 0.0 && r > 0.0 && r.is_finite()) {
        return Err(Error::InfeasibleEps(eps));
    }
    Ok((eps, r))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointParams {
    pub eps: f64,
    pub r: f64,
    /// Offset of the tail start from the point.
    pub l: f64,
}

/// Calibrated parameters with tails beyond the diameter and pairwise disjoint,
/// for points listed left to right.
pub fn choose_params(betas: &[f64], eps0: f64, diameter: f64) -> Result<Vec<PointParams>> {
    if !(diameter >= 0.0) {
        return Err(Error::InvalidInput(format!("negative diameter {diameter}")));
    }
    let mut out = Vec::with_capacity(betas.len());
    let mut l = diameter + 2.0 * eps0;
    for &beta in betas {
        let (eps, r) = calibrate(beta, eps0)?;
        out.push(PointParams { eps, r, l });
        // the next point sits at most `diameter` further right
        l += 2.0 * r + diameter + eps0;
    }
    Ok(out)
}

fn intervals_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 < b.1 && b.0 < a.1
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCertificate {
    pub count: usize,
    pub functions: Vec<TestFunction>,
    pub form_values: Vec<f64>,
    /// [(A t_j, t_k)], evaluated numerically.
    pub gram: DMatrix<f64>,
    pub secular_count: usize,
}

impl PointCertificate {
    pub fn max_offdiagonal(&self) -> f64 {
        let n = self.gram.nrows();
        let mut m = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.gram[(i, j)].abs());
                }
            }
        }
        m
    }

    /// The certified bound does not exceed the secular count.
    pub fn consistent(&self) -> bool {
        self.secular_count >= self.count
    }
}

/// δ′ intensities of a per-point system.
pub fn delta_prime_intensities(sys: &PointSystem) -> Result<Vec<f64>> {
    let Conditions::PerPoint(ms) = sys.conditions() else {
        return Err(Error::InvalidInput(
            "certificate needs per-point conditions".into(),
        ));
    };
    ms.iter()
        .zip(sys.points())
        .map(|(m, x)| {
            let f = m.real_factor();
            if (f[0][0] - 1.0).abs() > 1e-10
                || (f[1][1] - 1.0).abs() > 1e-10
                || f[1][0].abs() > 1e-10
            {
                Err(Error::InvalidInput(format!(
                    "point {x} is not a delta-prime interaction"
                )))
            } else {
                Ok(f[0][1])
            }
        })
        .collect()
}

/// (A t_j, t_k) for δ′ points at `points` with intensities `betas`.
pub fn point_gram(fs: &[TestFunction], points: &[f64], betas: &[f64]) -> DMatrix<f64> {
    let q = quad();
    let n = fs.len();
    DMatrix::from_fn(n, n, |i, j| {
        let mut bp: Vec<f64> = fs[i]
            .breakpoints()
            .into_iter()
            .chain(fs[j].breakpoints())
            .collect();
        bp.sort_by(|a, b| a.total_cmp(b));
        bp.dedup();
        let kinetic: f64 = bp
            .windows(2)
            .map(|w| q.integrate(w[0], w[1], |x| fs[i].derivative(x) * fs[j].derivative(x)))
            .sum();
        let point: f64 = points
            .iter()
            .zip(betas)
            .map(|(&x, &b)| b * fs[i].derivative(x) * fs[j].derivative(x))
            .sum();
        kinetic + point
    })
}

/// Lower bound on the number of negative eigenvalues of a δ′ system, with its certificate.
pub fn certify_count_points(sys: &PointSystem) -> Result<PointCertificate> {
    let betas = delta_prime_intensities(sys)?;
    let points = sys.points().to_vec();
    let min_gap = points
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    let eps0 = if min_gap.is_finite() {
        0.25 * min_gap
    } else {
        0.25
    };
    let diameter = if points.is_empty() {
        0.0
    } else {
        points[points.len() - 1] - points[0]
    };
    let negative: Vec<usize> = (0..betas.len()).filter(|&k| betas[k] < 0.0).collect();
    let params = choose_params(
        &negative.iter().map(|&k| betas[k]).collect::<Vec<_>>(),
        eps0,
        diameter,
    )?;
    let functions = negative
        .iter()
        .zip(&params)
        .map(|(&k, p)| TestFunction::new(points[k], p.eps, betas[k], p.l, p.r))
        .collect::<Result<Vec<_>>>()?;
    for (i, a) in functions.iter().enumerate() {
        for b in &functions[i + 1..] {
            for sa in a.derivative_support() {
                for sb in b.derivative_support() {
                    if intervals_overlap(sa, sb) {
                        return Err(Error::SupportOverlap(format!(
                            "test functions at {} and {} interact",
                            a.x0, b.x0
                        )));
                    }
                }
            }
        }
    }
    let gram = point_gram(&functions, &points, &betas);
    let form_values = functions.iter().map(quadratic_form_point).collect();
    let secular_count = count_negative(sys, None)?;
    Ok(PointCertificate {
        count: functions.len(),
        functions,
        form_values,
        gram,
        secular_count,
    })
}

/// A function constant on `[x_k − radius, x_k + radius]` around every point.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatCutoff {
    pub points: Vec<f64>,
    pub values: Vec<f64>,
    pub radius: f64,
}

impl FlatCutoff {
    pub fn new(points: Vec<f64>, values: Vec<f64>, radius: f64) -> Result<Self> {
        if points.len() != values.len() || !(radius > 0.0) {
            return Err(Error::InvalidInput(
                "one value per point and a positive radius".into(),
            ));
        }
        if points.windows(2).any(|w| w[1] - w[0] <= 2.0 * radius) {
            return Err(Error::InvalidInput(
                "flat neighborhoods must be disjoint".into(),
            ));
        }
        Ok(Self {
            points,
            values,
            radius,
        })
    }

    /// Cubic (C¹) interpolation between the flat pieces, zero outside.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.points.len();
        let rho = self.radius;
        let mut knots = Vec::with_capacity(2 * n + 2);
        knots.push((self.points[0] - 2.0 * rho, 0.0));
        for (p, v) in self.points.iter().zip(&self.values) {
            knots.push((p - rho, *v));
            knots.push((p + rho, *v));
        }
        knots.push((self.points[n - 1] + 2.0 * rho, 0.0));
        if x <= knots[0].0 || x >= knots[knots.len() - 1].0 {
            return (0.0, 0.0);
        }
        let i = knots
            .windows(2)
            .position(|w| x < w[1].0)
            .unwrap_or(knots.len() - 2);
        let ((x0, v0), (x1, v1)) = (knots[i], knots[i + 1]);
        let h = x1 - x0;
        let s = (x - x0) / h;
        let step = s * s * (3.0 - 2.0 * s);
        (v0 + (v1 - v0) * step, (v1 - v0) * 6.0 * s * (1.0 - s) / h)
    }

    pub fn traces(&self) -> Vec<BoundaryTraces> {
        self.points
            .iter()
            .map(|&p| {
                let (v, d) = self.eval(p);
                BoundaryTraces::real(v, v, d, d)
            })
            .collect()
    }
}

/// Quintic smoothstep: 0 at 0, 1 at 1, flat at both ends.
fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
}

/// Smoothed indicator of an atom set: 1 within δ/2, 0 beyond δ.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothIndicator {
    pub centers: Vec<f64>,
    pub delta: f64,
}

impl SmoothIndicator {
    pub fn eval(&self, x: f64) -> f64 {
        let d = self
            .centers
            .iter()
            .map(|c| (x - c).abs())
            .fold(f64::INFINITY, f64::min);
        if d <= 0.5 * self.delta {
            1.0
        } else {
            smoothstep((self.delta - d) / (0.5 * self.delta))
        }
    }

    /// Breakpoints between which the profile is one polynomial.
    fn breakpoints(&self) -> Vec<f64> {
        let d = self.delta;
        let mut bp: Vec<f64> = self
            .centers
            .iter()
            .flat_map(|c| [c - d, c - 0.5 * d, c + 0.5 * d, c + d])
            .chain(self.centers.windows(2).map(|w| 0.5 * (w[0] + w[1])))
            .collect();
        bp.sort_by(|a, b| a.total_cmp(b));
        bp.dedup();
        bp
    }

    /// ∫ χ^power over the line.
    pub fn integral(&self, power: i32) -> f64 {
        let q = quad();
        self.breakpoints()
            .windows(2)
            .map(|w| q.integrate(w[0], w[1], |x| self.eval(x).powi(power)))
            .sum()
    }

    /// Lebesgue measure of the open δ-neighborhood.
    pub fn neighborhood_measure(&self) -> f64 {
        let d = self.delta;
        let mut total = 0.0;
        let mut end = f64::NEG_INFINITY;
        for c in &self.centers {
            let (lo, hi) = (c - d, c + d);
            total += hi - lo.max(end).min(hi);
            end = end.max(hi);
        }
        total
    }

    pub fn extent(&self) -> (f64, f64) {
        (
            self.centers[0] - self.delta,
            self.centers[self.centers.len() - 1] + self.delta,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureTestFunction {
    /// Atom indices of Γ_k.
    pub gamma_k: Vec<usize>,
    pub delta: f64,
    pub chi: SmoothIndicator,
    /// Absolute start of the tail.
    pub l: f64,
    pub r: f64,
    pub c_k: f64,
}

impl MeasureTestFunction {
    pub fn derivative_support(&self) -> [(f64, f64); 2] {
        [self.chi.extent(), (self.l, self.l + 2.0 * self.r)]
    }
}

fn subset_positions(gk: &[usize], mu: &AtomicMeasure) -> Result<Vec<f64>> {
    if gk.is_empty() || gk.iter().any(|&i| i >= mu.len()) || gk.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "subset must list increasing atom indices".into(),
        ));
    }
    Ok(gk.iter().map(|&i| mu.atoms()[i].0).collect())
}

/// Σ_j β_j w_j χ(x_j)^power over all atoms.
fn atomic_sum(chi: &SmoothIndicator, mu: &AtomicMeasure, beta: &[f64], power: i32) -> f64 {
    mu.atoms()
        .iter()
        .zip(beta)
        .map(|(&(x, w), b)| b * w * chi.eval(x).powi(power))
        .sum()
}

/// Derivative χ up to `l`, jumps β w χ at atoms, plateau c_k, parabolic tail on `[l, l + 2r]`.
pub fn measure_test_build(
    gk: &[usize],
    mu: &AtomicMeasure,
    beta: &BetaFunction,
    delta: f64,
    l: f64,
    r: f64,
) -> Result<MeasureTestFunction> {
    if !(delta > 0.0 && r > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need delta > 0 and r > 0 (delta={delta}, r={r})"
        )));
    }
    let centers = subset_positions(gk, mu)?;
    let b = beta.values(mu)?;
    let chi = SmoothIndicator { centers, delta };
    if chi.extent().1 > l {
        return Err(Error::NeighborhoodOverlap(format!(
            "neighborhood reaches {} beyond the tail start {l}",
            chi.extent().1
        )));
    }
    let c_k = chi.integral(1) + atomic_sum(&chi, mu, &b, 1);
    Ok(MeasureTestFunction {
        gamma_k: gk.to_vec(),
        delta,
        chi,
        l,
        r,
        c_k,
    })
}

/// ∫χ² + 2c²/(3r) + Σβ w χ².
pub fn quadratic_form_measure(
    t: &MeasureTestFunction,
    mu: &AtomicMeasure,
    beta: &BetaFunction,
) -> Result<f64> {
    let b = beta.values(mu)?;
    Ok(t.chi.integral(2) + 2.0 * t.c_k * t.c_k / (3.0 * t.r) + atomic_sum(&t.chi, mu, &b, 2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureParams {
    /// Definition 5 margin; defaults to min(−β) over each subset.
    pub eps: Option<f64>,
    pub r_min: f64,
    /// Starting neighborhood radius before halving; defaults to the support diameter.
    pub delta0: Option<f64>,
}

impl Default for MeasureParams {
    fn default() -> Self {
        Self {
            eps: None,
            r_min: 1.0,
            delta0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetCertificate {
    pub function: MeasureTestFunction,
    pub eps: f64,
    pub mass: f64,
    pub form: f64,
    /// −εμ(Γ_k)/8
    pub target: f64,
    pub halvings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureCertificate {
    pub count: usize,
    pub subsets: Vec<SubsetCertificate>,
    pub gram: DMatrix<f64>,
}

/// Pairwise form values, from the three-term split of the form.
fn measure_gram(ts: &[MeasureTestFunction], mu: &AtomicMeasure, b: &[f64]) -> DMatrix<f64> {
    let q = quad();
    let n = ts.len();
    DMatrix::from_fn(n, n, |i, j| {
        let (ti, tj) = (&ts[i], &ts[j]);
        let mut bp: Vec<f64> = ti
            .chi
            .breakpoints()
            .into_iter()
            .chain(tj.chi.breakpoints())
            .collect();
        bp.sort_by(|a, b| a.total_cmp(b));
        bp.dedup();
        let chi: f64 = bp
            .windows(2)
            .map(|w| q.integrate(w[0], w[1], |x| ti.chi.eval(x) * tj.chi.eval(x)))
            .sum();
        let atoms: f64 = mu
            .atoms()
            .iter()
            .zip(b)
            .map(|(&(x, w), bk)| bk * w * ti.chi.eval(x) * tj.chi.eval(x))
            .sum();
        let tails = if i == j {
            2.0 * ti.c_k * ti.c_k / (3.0 * ti.r)
        } else if intervals_overlap(ti.derivative_support()[1], tj.derivative_support()[1]) {
            f64::NAN
        } else {
            0.0
        };
        chi + atoms + tails
    })
}

/// Lower bound on the number of negative eigenvalues from disjoint subsets of atoms.
pub fn certify_count_measure(
    mu: &AtomicMeasure,
    beta: &BetaFunction,
    subsets: &[Vec<usize>],
    params: &MeasureParams,
) -> Result<MeasureCertificate> {
    let b = beta.values(mu)?;
    if !(params.r_min > 0.0) {
        return Err(Error::InvalidInput("r_min must be positive".into()));
    }
    let positions: Vec<Vec<f64>> = subsets
        .iter()
        .map(|g| subset_positions(g, mu))
        .collect::<Result<_>>()?;
    for (i, a) in subsets.iter().enumerate() {
        for bset in &subsets[i + 1..] {
            if a.iter().any(|k| bset.contains(k)) {
                return Err(Error::InvalidInput("subsets must be disjoint".into()));
            }
        }
    }
    let mut epss = Vec::with_capacity(subsets.len());
    let mut masses = Vec::with_capacity(subsets.len());
    for (k, g) in subsets.iter().enumerate() {
        let worst = g.iter().map(|&i| b[i]).fold(f64::NEG_INFINITY, f64::max);
        let eps = params.eps.unwrap_or(-worst);
        if !(eps > 0.0) || worst > -eps {
            return Err(Error::DefinitionFiveViolated(k));
        }
        epss.push(eps);
        masses.push(g.iter().map(|&i| mu.atoms()[i].1).sum::<f64>());
    }

    // shrink δ until (8*), (9*) hold for every subset and the neighborhoods are disjoint
    let mut delta = params.delta0.unwrap_or(mu.diameter().max(1.0));
    let mut halvings = 0;
    loop {
        let chis: Vec<SmoothIndicator> = positions
            .iter()
            .map(|c| SmoothIndicator {
                centers: c.clone(),
                delta,
            })
            .collect();
        let ok_local = chis.iter().zip(subsets).enumerate().all(|(k, (chi, g))| {
            let inside: f64 = g.iter().map(|&i| b[i] * mu.atoms()[i].1).sum();
            let smeared = atomic_sum(chi, mu, &b, 1);
            let bound = epss[k] * masses[k];
            (smeared - inside).abs() < 0.5 * bound && chi.neighborhood_measure() <= 0.25 * bound
        });
        // neighborhoods of different subsets must not meet
        let disjoint = positions.iter().enumerate().all(|(k, c)| {
            positions[k + 1..].iter().all(|o| {
                c.iter()
                    .all(|x| o.iter().all(|y| (x - y).abs() >= 2.0 * delta))
            })
        });
        if ok_local && disjoint {
            break;
        }
        halvings += 1;
        if halvings > MAX_HALVINGS {
            return Err(if disjoint {
                Error::InfeasibleEps(epss.iter().cloned().fold(f64::INFINITY, f64::min))
            } else {
                Error::NeighborhoodOverlap(format!(
                    "no separating radius after {MAX_HALVINGS} halvings"
                ))
            });
        }
        delta *= 0.5;
    }

    let (_, hi) = mu.support();
    let mut l = hi + delta + 1.0;
    let mut functions = Vec::with_capacity(subsets.len());
    for (k, g) in subsets.iter().enumerate() {
        let probe = measure_test_build(g, mu, beta, delta, l, params.r_min)?;
        let r = params
            .r_min
            .max(16.0 * probe.c_k * probe.c_k / (epss[k] * masses[k]));
        let t = MeasureTestFunction { r, ..probe };
        l += 2.0 * r + 1.0;
        functions.push(t);
    }
    let gram = measure_gram(&functions, mu, &b);
    let mut certs = Vec::with_capacity(functions.len());
    for (k, t) in functions.into_iter().enumerate() {
        let form = quadratic_form_measure(&t, mu, beta)?;
        certs.push(SubsetCertificate {
            function: t,
            eps: epss[k],
            mass: masses[k],
            form,
            target: -epss[k] * masses[k] / 8.0,
            halvings,
        });
    }
    let count = certs.iter().filter(|c| c.form < 0.0).count();
    Ok(MeasureCertificate {
        count,
        subsets: certs,
        gram,
    })
}
