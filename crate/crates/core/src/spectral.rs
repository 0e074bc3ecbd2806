//! Bound states of finitely many point interactions on the line.
//!
//! On each of the `N + 1` intervals cut out by `x₁ < … < x_N` a bound state
//! with energy `−κ²` is a combination of `e^{±κx}`; the decaying tails leave
//! `2N` amplitudes. The `2N` boundary relations applied to the traces give a
//! square matching matrix whose determinant is the secular function.

use nalgebra::{DMatrix, DVector};

use crate::bc::{
    boundary_form, BoundaryTraces, InteractionKind, LagrangianPlane, TransmissionMatrix, C64,
};
use crate::error::{Error, Result};

pub const DEFAULT_GRID: usize = 2048;
/// Roots below this κ are reported with `near_threshold` set.
pub const THRESHOLD_KAPPA: f64 = 1e-6;
const BISECT_TOL: f64 = 1e-13;
const ACCEPT_RESIDUAL: f64 = 1e-6;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Conditions {
    /// One transmission matrix per point.
    PerPoint(Vec<TransmissionMatrix>),
    /// `A·v = 0` with `A` of size `2N × 4N`; `v` stacks `(ψ(x_k+0), ψ(x_k−0), ψ′(x_k+0), ψ′(x_k−0))`.
    Global(DMatrix<C64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointSystem {
    points: Vec<f64>,
    conditions: Conditions,
}

fn check_points(points: &[f64]) -> Result<()> {
    if points.is_empty() {
        return Err(Error::InvalidInput(
            "a point system needs at least one point".into(),
        ));
    }
    if points.iter().any(|x| !x.is_finite()) || points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput(
            "points must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

impl PointSystem {
    pub fn per_point(points: Vec<f64>, lambdas: Vec<TransmissionMatrix>) -> Result<Self> {
        check_points(&points)?;
        if lambdas.len() != points.len() {
            return Err(Error::InvalidInput(format!(
                "{} points but {} transmission matrices",
                points.len(),
                lambdas.len()
            )));
        }
        Ok(Self {
            points,
            conditions: Conditions::PerPoint(lambdas),
        })
    }

    pub fn global(points: Vec<f64>, a: DMatrix<C64>) -> Result<Self> {
        check_points(&points)?;
        let n = points.len();
        if a.nrows() != 2 * n || a.ncols() != 4 * n {
            return Err(Error::InvalidInput(format!(
                "global relation for {n} points must be {}x{}, got {}x{}",
                2 * n,
                4 * n,
                a.nrows(),
                a.ncols()
            )));
        }
        let sv = a.clone().svd(false, false).singular_values;
        if sv.max() == 0.0 || sv.min() / sv.max() < 1e-10 {
            return Err(Error::InvalidInput(
                "global relation is not of full row rank".into(),
            ));
        }
        Ok(Self {
            points,
            conditions: Conditions::Global(a),
        })
    }

    /// Local conditions from canonical kinds; split conditions are rejected.
    pub fn from_kinds(items: &[(f64, InteractionKind)]) -> Result<Self> {
        let mut points = Vec::with_capacity(items.len());
        let mut lambdas = Vec::with_capacity(items.len());
        for (x, kind) in items {
            if let InteractionKind::Split { .. } = kind {
                return Err(Error::SplitNotSupported(format!(
                    "split conditions at x = {x}"
                )));
            }
            points.push(*x);
            lambdas.push(crate::bc::lambda_of(kind)?);
        }
        Self::per_point(points, lambdas)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn conditions(&self) -> &Conditions {
        &self.conditions
    }

    /// The same conditions at `x_k + shift`.
    pub fn translate(&self, shift: f64) -> Self {
        Self {
            points: self.points.iter().map(|x| x + shift).collect(),
            conditions: self.conditions.clone(),
        }
    }

    /// The boundary relation as a `2N × 4N` matrix.
    pub fn boundary_matrix(&self) -> DMatrix<C64> {
        match &self.conditions {
            Conditions::Global(a) => a.clone(),
            Conditions::PerPoint(lambdas) => {
                let m: Vec<_> = lambdas.iter().map(|l| *l.matrix()).collect();
                per_point_rows(&m)
            }
        }
    }

    // Boundary matrix after removing the phases e^{iη_k}; each piece of the
    // function right of x_k is rotated by the accumulated phase, which leaves
    // κ unchanged and makes the relation real for local conditions.
    fn gauged(&self) -> (DMatrix<C64>, Vec<f64>) {
        match &self.conditions {
            Conditions::Global(a) => (a.clone(), vec![0.0; self.len()]),
            Conditions::PerPoint(lambdas) => {
                let mut phases = Vec::with_capacity(lambdas.len());
                let mut acc = 0.0;
                let mut reals = Vec::with_capacity(lambdas.len());
                for l in lambdas {
                    let eta = l.phase();
                    acc += eta;
                    phases.push(acc);
                    reals.push(l.matrix() * C64::from_polar(1.0, -eta));
                }
                (per_point_rows(&reals), phases)
            }
        }
    }

    /// `‖A v‖ / (‖A‖·‖v‖)` for the stacked trace vector.
    pub fn residual(&self, traces: &[BoundaryTraces]) -> f64 {
        let a = self.boundary_matrix();
        let v = stack_traces(traces);
        let vn = v.norm();
        if vn == 0.0 {
            return 0.0;
        }
        (a.clone() * v).norm() / (a.norm() * vn)
    }

    /// Checks that the solution space of `A·v = 0` is Lagrangian for the
    /// summed boundary form.
    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.self_adjoint_defect() < tol
    }

    pub fn self_adjoint_defect(&self) -> f64 {
        let basis = null_space(&self.boundary_matrix());
        let n = self.len();
        let mut worst = 0.0f64;
        for p in &basis {
            for q in &basis {
                let mut w = c(0.0);
                for k in 0..n {
                    w += boundary_form(&traces_at(p, k), &traces_at(q, k));
                }
                worst = worst.max(w.norm() / (p.norm() * q.norm()));
            }
        }
        worst
    }

    /// For per-point systems, the local planes; `None` in global mode.
    pub fn local_planes(&self) -> Option<Vec<LagrangianPlane>> {
        match &self.conditions {
            Conditions::PerPoint(l) => {
                Some(l.iter().map(LagrangianPlane::from_transmission).collect())
            }
            Conditions::Global(_) => None,
        }
    }
}

fn per_point_rows(lambdas: &[nalgebra::Matrix2<C64>]) -> DMatrix<C64> {
    let n = lambdas.len();
    let mut a = DMatrix::zeros(2 * n, 4 * n);
    for (k, l) in lambdas.iter().enumerate() {
        let (r, col) = (2 * k, 4 * k);
        // ψ(+) − Λ₁₁ψ(−) − Λ₁₂ψ′(−)
        a[(r, col)] = c(1.0);
        a[(r, col + 1)] = -l[(0, 0)];
        a[(r, col + 3)] = -l[(0, 1)];
        // ψ′(+) − Λ₂₁ψ(−) − Λ₂₂ψ′(−)
        a[(r + 1, col + 2)] = c(1.0);
        a[(r + 1, col + 1)] = -l[(1, 0)];
        a[(r + 1, col + 3)] = -l[(1, 1)];
    }
    a
}

fn stack_traces(traces: &[BoundaryTraces]) -> DVector<C64> {
    let mut v = DVector::zeros(4 * traces.len());
    for (k, t) in traces.iter().enumerate() {
        v.rows_mut(4 * k, 4).copy_from(&t.to_vector());
    }
    v
}

fn traces_at(v: &DVector<C64>, k: usize) -> BoundaryTraces {
    BoundaryTraces::new(v[4 * k], v[4 * k + 1], v[4 * k + 2], v[4 * k + 3])
}

// Orthonormal basis of ker A from the eigenvectors of A*A.
fn null_space(a: &DMatrix<C64>) -> Vec<DVector<C64>> {
    let gram = a.adjoint() * a;
    let eig = gram.symmetric_eigen();
    let scale = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(0.0, f64::max)
        .max(1e-300);
    (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] < 1e-12 * scale)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

/// The trace map: amplitudes `(c_L, a_1, b_1, …, a_{N−1}, b_{N−1}, c_R)` to traces.
fn trace_map(points: &[f64], kappa: f64) -> DMatrix<f64> {
    let n = points.len();
    let mut t = DMatrix::zeros(4 * n, 2 * n);
    let right = 2 * n - 1;
    // left tail c_L e^{κ(x − x₁)}
    t[(1, 0)] = 1.0;
    t[(3, 0)] = kappa;
    for i in 0..n - 1 {
        // interval i: a e^{κ(x − x_{i+1})} + b e^{−κ(x − x_i)}
        let e = (-kappa * (points[i + 1] - points[i])).exp();
        let (ca, cb) = (1 + 2 * i, 2 + 2 * i);
        let (lo, hi) = (4 * i, 4 * (i + 1));
        t[(lo, ca)] = e;
        t[(lo, cb)] = 1.0;
        t[(lo + 2, ca)] = kappa * e;
        t[(lo + 2, cb)] = -kappa;
        t[(hi + 1, ca)] = 1.0;
        t[(hi + 1, cb)] = e;
        t[(hi + 3, ca)] = kappa;
        t[(hi + 3, cb)] = -kappa * e;
    }
    // right tail c_R e^{−κ(x − x_N)}
    let last = 4 * (n - 1);
    t[(last, right)] = 1.0;
    t[(last + 2, right)] = -kappa;
    t
}

/// The secular function at one κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularValue {
    /// `det S(κ)` when the gauged relation is real, `|det S(κ)|²` otherwise.
    pub value: f64,
    pub real: bool,
}

struct Secular {
    points: Vec<f64>,
    real: Option<DMatrix<f64>>,
    complex: DMatrix<C64>,
}

impl Secular {
    fn new(sys: &PointSystem) -> Self {
        let (a, _) = sys.gauged();
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let is_real = a.iter().all(|z| z.im.abs() <= 1e-14 * scale);
        let real = is_real.then(|| a.map(|z| z.re));
        Self {
            points: sys.points.clone(),
            real,
            complex: a,
        }
    }

    fn matrix(&self, kappa: f64) -> DMatrix<C64> {
        let t = trace_map(&self.points, kappa).map(c);
        &self.complex * t
    }

    fn value(&self, kappa: f64) -> SecularValue {
        match &self.real {
            Some(a) => SecularValue {
                value: (a * trace_map(&self.points, kappa)).determinant(),
                real: true,
            },
            None => SecularValue {
                value: self.matrix(kappa).determinant().norm_sqr(),
                real: false,
            },
        }
    }

    // Scale-free distance from singularity, used for non-real systems.
    fn smallest_singular(&self, kappa: f64) -> f64 {
        let sv = self.matrix(kappa).svd(false, false).singular_values;
        sv.min() / sv.max().max(1e-300)
    }
}

pub fn secular_value(sys: &PointSystem, kappa: f64) -> Result<SecularValue> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "kappa must be positive (got {kappa})"
        )));
    }
    Ok(Secular::new(sys).value(kappa))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        })
    }
}

/// A normalized bound state. Amplitudes refer to the anchored exponentials:
/// `left·e^{κ(x−x₁)}`, `a_i e^{κ(x−x_{i+1})} + b_i e^{−κ(x−x_i)}` and `right·e^{−κ(x−x_N)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundState {
    pub kappa: f64,
    pub energy: f64,
    pub points: Vec<f64>,
    pub left: C64,
    pub intervals: Vec<(C64, C64)>,
    pub right: C64,
    pub parity: Parity,
    pub residual: f64,
    pub near_threshold: bool,
}

impl BoundState {
    fn piece(&self, x: f64) -> (C64, C64) {
        let k = self.kappa;
        let n = self.points.len();
        if x < self.points[0] {
            let e = self.left * (k * (x - self.points[0])).exp();
            return (e, e * k);
        }
        if x >= self.points[n - 1] {
            let e = self.right * (-k * (x - self.points[n - 1])).exp();
            return (e, -e * k);
        }
        let i = self.points.partition_point(|p| *p <= x) - 1;
        let (a, b) = self.intervals[i];
        let ea = a * (k * (x - self.points[i + 1])).exp();
        let eb = b * (-k * (x - self.points[i])).exp();
        (ea + eb, (ea - eb) * k)
    }

    /// ψ(x), right-continuous at the points.
    pub fn value(&self, x: f64) -> C64 {
        self.piece(x).0
    }

    pub fn derivative(&self, x: f64) -> C64 {
        self.piece(x).1
    }

    pub fn traces(&self) -> Vec<BoundaryTraces> {
        let n = self.points.len();
        let k = self.kappa;
        (0..n)
            .map(|j| {
                let (vm, dm) = if j == 0 {
                    (self.left, self.left * k)
                } else {
                    let (a, b) = self.intervals[j - 1];
                    let e = (-k * (self.points[j] - self.points[j - 1])).exp();
                    (a + b * e, (a - b * e) * k)
                };
                let (vp, dp) = if j == n - 1 {
                    (self.right, -self.right * k)
                } else {
                    let (a, b) = self.intervals[j];
                    let e = (-k * (self.points[j + 1] - self.points[j])).exp();
                    (a * e + b, (a * e - b) * k)
                };
                BoundaryTraces::new(vp, vm, dp, dm)
            })
            .collect()
    }

    /// ‖ψ‖² in closed form.
    pub fn norm_sqr(&self) -> f64 {
        let k = self.kappa;
        let mut s = (self.left.norm_sqr() + self.right.norm_sqr()) / (2.0 * k);
        for (i, (a, b)) in self.intervals.iter().enumerate() {
            let g = self.points[i + 1] - self.points[i];
            let e = (-k * g).exp();
            s += (a.norm_sqr() + b.norm_sqr()) * (1.0 - e * e) / (2.0 * k);
            s += 2.0 * (a * b.conj()).re * g * e;
        }
        s
    }
}

/// Extracts the bound state at a root κ.
pub fn eigenfunction(sys: &PointSystem, kappa: f64) -> Result<BoundState> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "kappa must be positive (got {kappa})"
        )));
    }
    let sec = Secular::new(sys);
    build_state(sys, &sec, kappa)
}

fn build_state(sys: &PointSystem, sec: &Secular, kappa: f64) -> Result<BoundState> {
    let s = sec.matrix(kappa);
    let svd = s.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V");
    let imin = svd.singular_values.imin();
    let coeffs: DVector<C64> = v_t.row(imin).adjoint();
    let n = sys.len();
    let (_, phases) = sys.gauged();
    let rot = |k: usize| C64::from_polar(1.0, phases[k]);
    let intervals = (0..n - 1)
        .map(|i| (coeffs[1 + 2 * i] * rot(i), coeffs[2 + 2 * i] * rot(i)))
        .collect();
    let mut state = BoundState {
        kappa,
        energy: -kappa * kappa,
        points: sys.points.clone(),
        left: coeffs[0],
        intervals,
        right: coeffs[2 * n - 1] * rot(n - 1),
        parity: Parity::None,
        residual: 0.0,
        near_threshold: kappa < THRESHOLD_KAPPA,
    };
    normalize(&mut state);
    state.residual = sys.residual(&state.traces());
    if state.residual > ACCEPT_RESIDUAL {
        return Err(Error::NotAnEigenvalue(kappa, state.residual));
    }
    state.parity = detect_parity(&state);
    Ok(state)
}

// L² normalization with the largest amplitude made real and positive.
fn normalize(s: &mut BoundState) {
    let mut amps: Vec<C64> = vec![s.left, s.right];
    for (a, b) in &s.intervals {
        amps.push(*a);
        amps.push(*b);
    }
    let big = amps
        .iter()
        .cloned()
        .fold(c(0.0), |m, z| if z.norm() > m.norm() { z } else { m });
    let phase = if big.norm() > 0.0 {
        big.conj() / big.norm()
    } else {
        c(1.0)
    };
    let scale = phase / s.norm_sqr().sqrt();
    s.left *= scale;
    s.right *= scale;
    for (a, b) in &mut s.intervals {
        *a *= scale;
        *b *= scale;
    }
}

/// Parity about the midpoint of the outermost points, tested on a sample grid.
pub fn detect_parity(s: &BoundState) -> Parity {
    let n = s.points.len();
    let mid = 0.5 * (s.points[0] + s.points[n - 1]);
    let reach = 0.5 * (s.points[n - 1] - s.points[0]) + 4.0 / s.kappa;
    let samples = 97;
    let (mut even, mut odd, mut size) = (0.0f64, 0.0f64, 0.0f64);
    for j in 0..samples {
        // offsets avoid the points themselves
        let t = reach * (j as f64 + 0.371) / samples as f64;
        let (p, m) = (s.value(mid + t), s.value(mid - t));
        even = even.max((p - m).norm());
        odd = odd.max((p + m).norm());
        size = size.max(p.norm()).max(m.norm());
    }
    if size == 0.0 {
        return Parity::None;
    }
    if even / size < 1e-8 {
        Parity::Even
    } else if odd / size < 1e-8 {
        Parity::Odd
    } else {
        Parity::None
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted by decreasing κ.
    pub states: Vec<BoundState>,
    /// Non-fatal diagnostics (possible aliasing, rejected candidates).
    pub warnings: Vec<String>,
}

impl Spectrum {
    pub fn kappas(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.kappa).collect()
    }

    pub fn grid_too_coarse(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| w.starts_with("grid too coarse"))
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, mut flo: f64) -> f64 {
    while hi - lo > BISECT_TOL * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if b - a <= BISECT_TOL * b.max(1.0) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn kappa_grid(kappa_max: f64, grid: usize) -> Vec<f64> {
    let h = kappa_max / grid as f64;
    // a short logarithmic run below the first uniform node resolves shallow states
    let lo = kappa_max * 1e-9;
    let nlog = 32;
    let mut ks: Vec<f64> = (0..nlog)
        .map(|j| lo * (h / lo).powf(j as f64 / nlog as f64))
        .collect();
    ks.extend((1..=grid).map(|j| h * j as f64));
    ks
}

/// All bound states with κ in (0, kappa_max].
pub fn find_bound_states(sys: &PointSystem, kappa_max: f64, grid: usize) -> Result<Spectrum> {
    if !(kappa_max > 0.0 && kappa_max.is_finite()) || grid < 2 {
        return Err(Error::InvalidInput(format!(
            "need kappa_max > 0 and grid >= 2 (got {kappa_max}, {grid})"
        )));
    }
    let sec = Secular::new(sys);
    let ks = kappa_grid(kappa_max, grid);
    let mut roots = Vec::new();
    let mut warnings = Vec::new();
    if sec.real.is_some() {
        let f = |k: f64| sec.value(k).value;
        let fs: Vec<f64> = ks.iter().map(|&k| f(k)).collect();
        for j in 0..ks.len() {
            if fs[j] == 0.0 {
                roots.push(ks[j]);
                continue;
            }
            if j + 1 < ks.len() && fs[j + 1] != 0.0 && (fs[j] > 0.0) != (fs[j + 1] > 0.0) {
                roots.push(bisect(f, ks[j], ks[j + 1], fs[j]));
            }
            // a dip towards zero without a sign change may hide a root pair
            if j > 0 && j + 1 < ks.len() {
                let (a, b, cc) = (fs[j - 1], fs[j], fs[j + 1]);
                let same = (a > 0.0) == (b > 0.0) && (b > 0.0) == (cc > 0.0);
                if same && b.abs() < a.abs() && b.abs() < cc.abs() {
                    let s = b.signum();
                    let (km, fm) = golden_min(|k| s * f(k), ks[j - 1], ks[j + 1]);
                    let edge = a.abs().max(cc.abs());
                    if fm < 0.0 {
                        roots.push(bisect(f, ks[j - 1], km, a));
                        roots.push(bisect(f, km, ks[j + 1], fm * s));
                    } else if fm <= 1e-10 * edge {
                        warnings.push(format!(
                            "grid too coarse: secular function nearly vanishes at kappa = {km:.12} without a sign change"
                        ));
                        roots.push(km);
                    }
                }
            }
        }
    } else {
        let g = |k: f64| sec.smallest_singular(k);
        let gs: Vec<f64> = ks.iter().map(|&k| g(k)).collect();
        for j in 1..ks.len() - 1 {
            if gs[j] <= gs[j - 1] && gs[j] < gs[j + 1] {
                let (km, gm) = golden_min(g, ks[j - 1], ks[j + 1]);
                if gm < 1e-9 {
                    roots.push(km);
                }
            }
        }
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-10 * b.max(1.0));
    let mut states = Vec::new();
    for k in roots {
        match build_state(sys, &sec, k) {
            Ok(s) => states.push(s),
            Err(e) => warnings.push(format!("rejected candidate: {e}")),
        }
    }
    Ok(Spectrum { states, warnings })
}

/// A search bound covering every bound state of a local system with margin 4.
pub fn default_kappa_max(sys: &PointSystem) -> f64 {
    let mut bound: f64 = 1.0;
    if let Conditions::PerPoint(lambdas) = &sys.conditions {
        let mut alpha_sum = 0.0;
        for l in lambdas {
            let r = l.real_factor();
            let unit_diag = (r[0][0] - 1.0).abs() < 1e-12 && (r[1][1] - 1.0).abs() < 1e-12;
            if unit_diag && r[1][0] == 0.0 && r[0][1] != 0.0 {
                bound = bound.max(2.0 / r[0][1].abs());
            } else if unit_diag && r[0][1] == 0.0 {
                alpha_sum += r[1][0].abs();
            } else {
                bound = bound.max(10.0);
            }
        }
        bound = bound.max(alpha_sum / 2.0);
    } else {
        bound = 10.0;
    }
    4.0 * bound
}

/// Number of bound states; fails if the scan reports possible aliasing.
pub fn count_negative(sys: &PointSystem, kappa_max: Option<f64>) -> Result<usize> {
    let km = kappa_max.unwrap_or_else(|| default_kappa_max(sys));
    let spec = find_bound_states(sys, km, DEFAULT_GRID)?;
    if let Some(w) = spec
        .warnings
        .iter()
        .find(|w| w.starts_with("grid too coarse"))
    {
        return Err(Error::GridTooCoarse(w.clone()));
    }
    Ok(spec.states.iter().filter(|s| !s.near_threshold).count())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharacteristicEq {
    /// λ = 1 + tanh λ
    TanhEq,
    /// λ = 1 + coth λ
    CothEq,
}

/// The root in [1.5, 3] of the chosen characteristic equation.
pub fn characteristic_root(kind: CharacteristicEq) -> f64 {
    let f = |l: f64| match kind {
        CharacteristicEq::TanhEq => l - 1.0 - l.tanh(),
        CharacteristicEq::CothEq => l - 1.0 - 1.0 / l.tanh(),
    };
    let (mut lo, mut hi) = (1.5, 3.0);
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// δ′ interactions of intensity β at x = ±1.
pub fn delta_prime_pair(beta: f64) -> Result<PointSystem> {
    PointSystem::from_kinds(&[
        (-1.0, InteractionKind::DeltaPrime { beta }),
        (1.0, InteractionKind::DeltaPrime { beta }),
    ])
}

fn nonlocal_rows(second_jump_is_value: bool) -> DMatrix<C64> {
    // columns: point j at 4j: v+, v−, d+, d−
    let mut a = DMatrix::zeros(4, 8);
    for j in 0..2 {
        let col = 4 * j;
        a[(j, col + 2)] = c(1.0);
        a[(j, col + 3)] = c(-1.0);
        let r = 2 + j;
        a[(r, col + 2)] += c(1.0);
        a[(r, col + 3)] += c(1.0);
        if second_jump_is_value {
            a[(r, 0)] += c(1.0);
            a[(r, 1)] += c(-1.0);
        } else {
            a[(r, 2)] += c(1.0);
            a[(r, 3)] += c(-1.0);
        }
        a[(r, 4)] += c(1.0);
        a[(r, 5)] += c(-1.0);
    }
    a
}

/// The two-point nonlocal interaction at x = ±1:
/// `ψ′(x_j+0) − ψ′(x_j−0) = 0` and
/// `ψ′(x_j+0) + ψ′(x_j−0) + ψ(x₁+0) − ψ(x₁−0) + ψ(x₂+0) − ψ(x₂−0) = 0`, j = 1, 2.
///
/// This is the self-adjoint reading: the coupling term at x₁ is the value jump,
/// matching the x₂ term. See [`nonlocal_example_verbatim`].
pub fn nonlocal_example() -> PointSystem {
    PointSystem::global(vec![-1.0, 1.0], nonlocal_rows(true)).expect("full rank")
}

/// The same system with a derivative jump `ψ′(x₁+0) − ψ′(x₁−0)` as the x₁
/// coupling term. Its solution space is not Lagrangian; kept for comparison.
pub fn nonlocal_example_verbatim() -> PointSystem {
    PointSystem::global(vec![-1.0, 1.0], nonlocal_rows(false)).expect("full rank")
}
