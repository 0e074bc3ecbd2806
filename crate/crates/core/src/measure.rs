//! The δ′-operator on a measured set, for atomic measures.
//!
//! On a box `(a, b)` with `ψ(a) = 0`, `ψ′(b) = 0` the inverse operator has the
//! kernel `G(x, s) = F(min(x, s))` with `F(t) = t − a + Σ_{x_k < t} β_k w_k`.
//! For sorted nodes the Nyström matrix `H^{1/2} K H^{1/2}` factors as
//! `H^{1/2} L D Lᵀ H^{1/2}` with `L` the lower unit-triangular matrix of ones
//! and `D` the increments of `F`, so its inverse is tridiagonal. Eigenvalues
//! of the operator are computed from that tridiagonal matrix by Sturm
//! bisection; the dense matrix is available for cross-checks.

use nalgebra::DMatrix;

use crate::bc::{BoundaryTraces, InteractionKind};
use crate::error::{Error, Result};
use crate::spectral::PointSystem;

/// Atoms closer than this (relative to the box size) to an evaluation point count as hits.
const ATOM_TOL: f64 = 1e-14;
pub const MAX_CANTOR_DEPTH: u32 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicMeasure {
    atoms: Vec<(f64, f64)>,
}

impl AtomicMeasure {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidInput(
                "a measure needs at least one atom".into(),
            ));
        }
        if atoms
            .iter()
            .any(|(x, w)| !x.is_finite() || !(w.is_finite() && *w > 0.0))
        {
            return Err(Error::InvalidInput(
                "atoms need finite positions and positive weights".into(),
            ));
        }
        if atoms.windows(2).any(|p| p[1].0 <= p[0].0) {
            return Err(Error::InvalidInput(
                "atom positions must be strictly increasing".into(),
            ));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn positions(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.atoms[0].0, self.atoms[self.atoms.len() - 1].0)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.support();
        hi - lo
    }

    pub fn atom_index(&self, x: f64) -> Option<usize> {
        let scale = 1.0 + x.abs();
        self.atoms
            .iter()
            .position(|a| (a.0 - x).abs() <= ATOM_TOL * scale)
    }

    /// The atoms with positions in `[lo, hi]`.
    pub fn restrict(&self, lo: f64, hi: f64) -> Vec<usize> {
        (0..self.atoms.len())
            .filter(|&i| self.atoms[i].0 >= lo && self.atoms[i].0 <= hi)
            .collect()
    }
}

/// Midpoints of the level-`depth` middle-thirds intervals of `[c0, c1]`, each of weight `2^{−depth}`.
pub fn cantor_measure(depth: u32, c0: f64, c1: f64) -> Result<AtomicMeasure> {
    if depth > MAX_CANTOR_DEPTH {
        return Err(Error::DepthTooLarge(depth));
    }
    if !(c1 > c0) {
        return Err(Error::InvalidInput(format!("empty interval [{c0}, {c1}]")));
    }
    let mut intervals = vec![(c0, c1)];
    for _ in 0..depth {
        intervals = intervals
            .into_iter()
            .flat_map(|(l, r)| {
                let t = (r - l) / 3.0;
                [(l, l + t), (r - t, r)]
            })
            .collect();
    }
    let w = 0.5f64.powi(depth as i32);
    AtomicMeasure::new(
        intervals
            .into_iter()
            .map(|(l, r)| (0.5 * (l + r), w))
            .collect(),
    )
}

/// The level-`level` construction intervals of `[c0, c1]`, used to group Cantor atoms.
pub fn cantor_blocks(level: u32, c0: f64, c1: f64) -> Vec<(f64, f64)> {
    let mut intervals = vec![(c0, c1)];
    for _ in 0..level {
        intervals = intervals
            .into_iter()
            .flat_map(|(l, r)| {
                let t = (r - l) / 3.0;
                [(l, l + t), (r - t, r)]
            })
            .collect();
    }
    intervals
}

#[derive(Debug, Clone, PartialEq)]
pub enum BetaFunction {
    Constant(f64),
    PerAtom(Vec<f64>),
}

impl BetaFunction {
    pub fn values(&self, mu: &AtomicMeasure) -> Result<Vec<f64>> {
        match self {
            BetaFunction::Constant(b) => {
                if !b.is_finite() {
                    return Err(Error::InvalidInput("beta must be finite".into()));
                }
                Ok(vec![*b; mu.len()])
            }
            BetaFunction::PerAtom(v) => {
                if v.len() != mu.len() {
                    return Err(Error::InvalidInput(format!(
                        "{} beta values for {} atoms",
                        v.len(),
                        mu.len()
                    )));
                }
                if v.iter().any(|b| !b.is_finite()) {
                    return Err(Error::InvalidInput("beta must be finite".into()));
                }
                Ok(v.clone())
            }
        }
    }

    /// Σ|β(x_k)| w_k.
    pub fn l1_norm(&self, mu: &AtomicMeasure) -> Result<f64> {
        Ok(self
            .values(mu)?
            .iter()
            .zip(mu.atoms())
            .map(|(b, a)| b.abs() * a.1)
            .sum())
    }
}

/// μ-boundary data at one atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuBoundaryData {
    pub x: f64,
    /// dψ/dμ = ψ_s / w
    pub f: f64,
    /// dψ′/dμ = ψ′_s / w
    pub g: f64,
    pub value_mean: f64,
    pub derivative_mean: f64,
}

/// Atomic μ-derivatives from one-sided traces at the listed points.
///
/// Points that are not atoms must carry no jump.
pub fn mu_derivative(
    traces: &[(f64, BoundaryTraces)],
    mu: &AtomicMeasure,
) -> Result<Vec<MuBoundaryData>> {
    let mut out = Vec::new();
    for (x, t) in traces {
        let (vs, ds) = (t.value_jump().re, t.derivative_jump().re);
        let scale = 1.0 + t.to_vector().norm();
        match mu.atom_index(*x) {
            Some(i) => {
                let w = mu.atoms()[i].1;
                out.push(MuBoundaryData {
                    x: *x,
                    f: vs / w,
                    g: ds / w,
                    value_mean: t.value_mean().re,
                    derivative_mean: t.derivative_mean().re,
                });
            }
            None => {
                if vs.abs() > 1e-12 * scale || ds.abs() > 1e-12 * scale {
                    return Err(Error::JumpOffSupport(*x));
                }
            }
        }
    }
    Ok(out)
}

/// δ′ interactions of intensity β(x_k)·w_k at the atoms.
pub fn atomic_to_point_system(mu: &AtomicMeasure, beta: &BetaFunction) -> Result<PointSystem> {
    let b = beta.values(mu)?;
    let items: Vec<_> = mu
        .atoms()
        .iter()
        .zip(&b)
        .map(|(&(x, w), &bk)| (x, InteractionKind::DeltaPrime { beta: bk * w }))
        .collect();
    PointSystem::from_kinds(&items)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenKernel {
    pub a: f64,
    pub b: f64,
    mu: AtomicMeasure,
    /// β(x_k)·w_k per atom.
    jumps: Vec<f64>,
}

impl GreenKernel {
    pub fn new(a: f64, b: f64, mu: AtomicMeasure, beta: &BetaFunction) -> Result<Self> {
        let (lo, hi) = mu.support();
        if !(a < lo && hi < b) {
            return Err(Error::InvalidInput(format!(
                "support [{lo}, {hi}] must lie inside the open box ({a}, {b})"
            )));
        }
        let jumps = beta
            .values(&mu)?
            .iter()
            .zip(mu.atoms())
            .map(|(bk, at)| bk * at.1)
            .collect();
        Ok(Self { a, b, mu, jumps })
    }

    /// Box `(x_min − margin, x_max + margin)`.
    pub fn with_margin(mu: AtomicMeasure, beta: &BetaFunction, margin: f64) -> Result<Self> {
        let (lo, hi) = mu.support();
        Self::new(lo - margin, hi + margin, mu, beta)
    }

    pub fn measure(&self) -> &AtomicMeasure {
        &self.mu
    }

    /// F(t) = t − a + Σ_{x_k < t} β_k w_k.
    fn primitive(&self, t: f64) -> f64 {
        let below: f64 = self
            .mu
            .atoms()
            .iter()
            .zip(&self.jumps)
            .filter(|(at, _)| at.0 < t)
            .map(|(_, j)| j)
            .sum();
        t - self.a + below
    }

    pub fn value(&self, x: f64, s: f64) -> Result<f64> {
        for p in [x, s] {
            if self.mu.atom_index(p).is_some() {
                return Err(Error::EvaluationOnAtom(p));
            }
        }
        Ok(self.primitive(x.min(s)))
    }

    /// Segment endpoints: a, every atom, b.
    fn breakpoints(&self) -> Vec<f64> {
        let mut bp = vec![self.a];
        bp.extend(self.mu.positions());
        bp.push(self.b);
        bp
    }

    /// Cells per segment for about `n` cells in total, at least two per segment.
    pub fn segment_counts(&self, n: usize) -> Vec<usize> {
        let bp = self.breakpoints();
        let len = self.b - self.a;
        bp.windows(2)
            .map(|w| ((n as f64 * (w[1] - w[0]) / len).round() as usize).max(2))
            .collect()
    }
}

pub fn green_kernel_value(k: &GreenKernel, x: f64, s: f64) -> Result<f64> {
    k.value(x, s)
}

/// Nyström discretization stored through its tridiagonal inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedOperator {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Increments of F between consecutive nodes (first entry F(x₁)).
    pub increments: Vec<f64>,
    kernel_values: Vec<f64>,
}

/// Piecewise-uniform midpoint grid aligned with the atoms; about `n` nodes.
pub fn discretize(k: &GreenKernel, n: usize) -> Result<DiscretizedOperator> {
    if n < 8 {
        return Err(Error::InvalidInput(format!(
            "need at least 8 grid points (got {n})"
        )));
    }
    discretize_with_counts(k, &k.segment_counts(n))
}

pub fn discretize_with_counts(k: &GreenKernel, counts: &[usize]) -> Result<DiscretizedOperator> {
    let bp = k.breakpoints();
    if counts.len() + 1 != bp.len() || counts.contains(&0) {
        return Err(Error::InvalidInput(
            "one positive cell count per segment required".into(),
        ));
    }
    let total: usize = counts.iter().sum();
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    for (w, &cnt) in bp.windows(2).zip(counts) {
        let h = (w[1] - w[0]) / cnt as f64;
        for j in 0..cnt {
            nodes.push(w[0] + (j as f64 + 0.5) * h);
            weights.push(h);
        }
    }
    // F at the nodes, accumulating atom jumps as they are passed
    let mut kernel_values = Vec::with_capacity(total);
    let mut atom = 0;
    let atoms = k.mu.atoms();
    let mut acc = 0.0;
    for &x in &nodes {
        while atom < atoms.len() && atoms[atom].0 < x {
            acc += k.jumps[atom];
            atom += 1;
        }
        kernel_values.push(x - k.a + acc);
    }
    let mut increments = Vec::with_capacity(total);
    increments.push(kernel_values[0]);
    for w in kernel_values.windows(2) {
        increments.push(w[1] - w[0]);
    }
    if increments.contains(&0.0) {
        return Err(Error::InvalidInput(
            "kernel matrix is singular on this grid".into(),
        ));
    }
    Ok(DiscretizedOperator {
        nodes,
        weights,
        increments,
        kernel_values,
    })
}

impl DiscretizedOperator {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `M_ij = √(h_i h_j) G(x_i, x_j)`.
    pub fn dense_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |i, j| {
            (self.weights[i] * self.weights[j]).sqrt() * self.kernel_values[i.min(j)]
        })
    }

    /// Diagonal and off-diagonal of `M⁻¹`.
    pub fn tridiagonal(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.len();
        let d = &self.increments;
        let h = &self.weights;
        let diag = (0..n)
            .map(|m| {
                let next = if m + 1 < n { 1.0 / d[m + 1] } else { 0.0 };
                (1.0 / d[m] + next) / h[m]
            })
            .collect();
        let off = (0..n.saturating_sub(1))
            .map(|m| -1.0 / ((h[m] * h[m + 1]).sqrt() * d[m + 1]))
            .collect();
        (diag, off)
    }

    /// Number of negative eigenvalues; by Sylvester inertia, the number of negative increments.
    pub fn negative_count(&self) -> usize {
        self.increments.iter().filter(|d| **d < 0.0).count()
    }

    /// Negative eigenvalues of the box operator, ascending.
    pub fn negative_eigenvalues(&self) -> Vec<f64> {
        let (diag, off) = self.tridiagonal();
        let count = self.negative_count();
        let lower = diag
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let l = if i > 0 { off[i - 1].abs() } else { 0.0 };
                let r = if i < off.len() { off[i].abs() } else { 0.0 };
                d - l - r
            })
            .fold(0.0f64, f64::min);
        (0..count)
            .map(|k| kth_eigenvalue(&diag, &off, k, lower * 1.01 - 1.0, 0.0))
            .collect()
    }
}

// Number of eigenvalues of the symmetric tridiagonal matrix below x.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
        q = diag[i] - x - if i > 0 { e2 / q } else { 0.0 };
        if q == 0.0 {
            q = f64::MIN_POSITIVE * (1.0 + e2);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn kth_eigenvalue(diag: &[f64], off: &[f64], k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * lo.abs().max(hi.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeSpectrum {
    pub sizes: Vec<usize>,
    pub counts: Vec<usize>,
    /// Raw negative eigenvalues per grid, ascending.
    pub levels: Vec<Vec<f64>>,
    /// Extrapolated eigenvalues (most negative first) on the finest grid's count.
    pub eigenvalues: Vec<f64>,
    /// Estimated discretization error of each extrapolated value.
    pub errors: Vec<f64>,
    pub observed_orders: Vec<Option<f64>>,
}

/// Negative eigenvalues over a refinement sequence, Richardson-extrapolated.
///
/// Each level multiplies the per-segment cell counts of the first level by
/// `refine[j] / refine[0]`, so the grids are nested when the ratios are integers.
pub fn negative_spectrum(k: &GreenKernel, refine: &[usize]) -> Result<NegativeSpectrum> {
    if refine.is_empty() || refine.windows(2).any(|w| w[1] <= w[0]) || refine[0] < 8 {
        return Err(Error::InvalidInput(
            "refinement sizes must be increasing and >= 8".into(),
        ));
    }
    let base = k.segment_counts(refine[0]);
    let solved: Vec<Result<(usize, Vec<f64>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = refine
            .iter()
            .map(|&n| {
                let factor = n as f64 / refine[0] as f64;
                let counts: Vec<usize> = base
                    .iter()
                    .map(|&c| ((c as f64 * factor).round() as usize).max(1))
                    .collect();
                scope.spawn(move || {
                    let op = discretize_with_counts(k, &counts)?;
                    Ok((op.len(), op.negative_eigenvalues()))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("eigenvalue worker panicked"))
            .collect()
    });
    let solved = solved.into_iter().collect::<Result<Vec<_>>>()?;
    let (sizes, levels): (Vec<usize>, Vec<Vec<f64>>) = solved.into_iter().unzip();
    let counts: Vec<usize> = levels.iter().map(|l| l.len()).collect();
    let last = levels.len() - 1;
    let mut eigenvalues = Vec::new();
    let mut errors = Vec::new();
    let mut observed_orders = Vec::new();
    for (idx, &fine) in levels[last].iter().enumerate() {
        // the same eigenvalue on coarser grids, aligned from the most negative end
        let hist: Vec<f64> = levels.iter().filter_map(|l| l.get(idx).copied()).collect();
        let m = hist.len();
        if m < 2 || levels[..last].iter().any(|l| l.len() <= idx) {
            eigenvalues.push(fine);
            errors.push(f64::NAN);
            observed_orders.push(None);
            continue;
        }
        let r = sizes[last] as f64 / sizes[last - 1] as f64;
        let d2 = hist[m - 1] - hist[m - 2];
        let mut order = None;
        let mut p = 2.0;
        if m >= 3 {
            let d1 = hist[m - 2] - hist[m - 3];
            let r1 = sizes[last - 1] as f64 / sizes[last - 2] as f64;
            let floor = 1e-12 * fine.abs();
            if d1.abs() > floor && d2.abs() > floor && d1 * d2 > 0.0 {
                let est = (d1 / d2).ln() / r.ln();
                order = Some(est);
                if (0.5..=6.0).contains(&est) {
                    p = est;
                }
            }
            let predicted = d1.abs() / r1.powf(2.0);
            if d2.abs() > 10.0 * predicted && d2.abs() > 1e-9 * fine.abs() {
                return Err(Error::UnconvergedEigenvalue(format!(
                    "eigenvalue {idx}: last change {d2:e} exceeds 10x the predicted {predicted:e}"
                )));
            }
        }
        let corr = d2 / (r.powf(p) - 1.0);
        eigenvalues.push(fine + corr);
        errors.push(corr.abs());
        observed_orders.push(order);
    }
    Ok(NegativeSpectrum {
        sizes,
        counts,
        levels,
        eigenvalues,
        errors,
        observed_orders,
    })
}
