//! Elements of ker(L_max − z) built from the free resolvent kernel and atomic
//! measures, with rank diagnostics for families of them.

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measure::AtomicMeasure;

type C64 = Complex64;

pub const RANK_TOL: f64 = 1e-8;

/// √z on the branch with positive imaginary part.
pub fn resolvent_root(z: C64) -> Result<C64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite z = {z}")));
    }
    let mut k = z.sqrt();
    if k.im < 0.0 {
        k = -k;
    }
    if k.im <= 1e-14 * (1.0 + k.norm()) {
        return Err(Error::BranchCut(z));
    }
    Ok(k)
}

/// (i/2√z) e^{i√z|x|}.
pub fn g_z(x: f64, z: C64) -> Result<C64> {
    let k = resolvent_root(z)?;
    Ok(C64::i() / (2.0 * k) * (C64::i() * k * x.abs()).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum ElementKind {
    /// g_z ∗ μ
    GConv,
    /// (g_z ∗ μ)′
    GPrimeConv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeficiencyElement {
    pub kind: ElementKind,
    pub measure: AtomicMeasure,
    pub z: C64,
    k: C64,
}

impl DeficiencyElement {
    pub fn new(kind: ElementKind, measure: AtomicMeasure, z: C64) -> Result<Self> {
        let k = resolvent_root(z)?;
        Ok(Self {
            kind,
            measure,
            z,
            k,
        })
    }

    /// Unit atom at `x`.
    pub fn at_point(kind: ElementKind, x: f64, z: C64) -> Result<Self> {
        Self::new(kind, AtomicMeasure::new(vec![(x, 1.0)])?, z)
    }

    pub fn root(&self) -> C64 {
        self.k
    }

    // (coefficient, sign power) of w·c·sign(x−a)^p·e^{ik|x−a|}
    fn shape(&self) -> (C64, u8) {
        match self.kind {
            ElementKind::GConv => (C64::i() / (2.0 * self.k), 0),
            ElementKind::GPrimeConv => (C64::new(-0.5, 0.0), 1),
        }
    }

    /// Value and derivative, with `side` deciding the sign at an atom.
    pub fn one_sided(&self, x: f64, side: Side) -> (C64, C64) {
        let ik = C64::i() * self.k;
        let mut v = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for &(a, w) in self.measure.atoms() {
            let y = x - a;
            let s = if y > 0.0 {
                1.0
            } else if y < 0.0 {
                -1.0
            } else if side == Side::Right {
                1.0
            } else {
                -1.0
            };
            let e = (ik * y.abs()).exp();
            match self.kind {
                ElementKind::GConv => {
                    v += w * C64::i() / (2.0 * self.k) * e;
                    d += w * -0.5 * s * e;
                }
                ElementKind::GPrimeConv => {
                    v += w * -0.5 * s * e;
                    d += w * -0.5 * ik * e;
                }
            }
        }
        (v, d)
    }
}

pub fn element_eval(e: &DeficiencyElement, x: f64) -> Result<C64> {
    if e.kind == ElementKind::GPrimeConv && e.measure.atom_index(x).is_some() {
        return Err(Error::EvaluationOnAtom(x));
    }
    Ok(e.one_sided(x, Side::Right).0)
}

/// ∫ f over the line: −μ(ℝ)/z for g_z ∗ μ, zero for derivatives.
pub fn e_functional(e: &DeficiencyElement) -> C64 {
    match e.kind {
        ElementKind::GConv => -e.measure.total_mass() / e.z,
        ElementKind::GPrimeConv => C64::new(0.0, 0.0),
    }
}

/// The same integral by quadrature over `[x_min − radius, x_max + radius]`.
pub fn e_functional_numeric(e: &DeficiencyElement, radius: f64, nodes: usize) -> Result<C64> {
    let q = GaussLegendre::new(nodes.max(2)).map_err(|err| Error::InvalidInput(err.to_string()))?;
    let (lo, hi) = e.measure.support();
    let mut bp = vec![lo - radius];
    bp.extend(e.measure.positions());
    bp.push(hi + radius);
    let mut total = C64::new(0.0, 0.0);
    for w in bp.windows(2) {
        // split long pieces so the decay is resolved
        let pieces = ((w[1] - w[0]) * e.k.im).ceil().max(1.0) as usize;
        let h = (w[1] - w[0]) / pieces as f64;
        for p in 0..pieces {
            let (a, b) = (w[0] + p as f64 * h, w[0] + (p + 1) as f64 * h);
            let mid = 0.5 * (a + b);
            let side = |x: f64| if x < mid { Side::Right } else { Side::Left };
            let re = q.integrate(a, b, |x| e.one_sided(x, side(x)).0.re);
            let im = q.integrate(a, b, |x| e.one_sided(x, side(x)).0.im);
            total += C64::new(re, im);
        }
    }
    Ok(total)
}

// ∫ e^{αx + c} over [l, u]; infinite ends contribute nothing (Re α points into decay)
fn exp_integral(alpha: C64, c: C64, l: f64, u: f64) -> C64 {
    if alpha.norm() < 1e-300 {
        return c.exp() * (u - l);
    }
    let at = |x: f64| {
        if x.is_infinite() {
            C64::new(0.0, 0.0)
        } else {
            (alpha * x + c).exp()
        }
    };
    (at(u) - at(l)) / alpha
}

// ∫ sign(x−a)^p e^{ik|x−a|} · conj(sign(x−b)^q e^{ik|x−b|}) dx
fn shifted_product(k: C64, a: f64, p: u8, b: f64, q: u8) -> C64 {
    let (m, big) = (a.min(b), a.max(b));
    let ik = C64::i() * k;
    let mut total = C64::new(0.0, 0.0);
    for (l, u) in [(f64::NEG_INFINITY, m), (m, big), (big, f64::INFINITY)] {
        if !(u > l) {
            continue;
        }
        let mid = if l.is_infinite() {
            u - 1.0
        } else if u.is_infinite() {
            l + 1.0
        } else {
            0.5 * (l + u)
        };
        let sa = if mid > a { 1.0 } else { -1.0 };
        let sb = if mid > b { 1.0 } else { -1.0 };
        let alpha = ik * sa + (ik * sb).conj();
        let c = -ik * sa * a - (ik * sb).conj() * b;
        let sign = if p == 1 { sa } else { 1.0 } * if q == 1 { sb } else { 1.0 };
        total += sign * exp_integral(alpha, c, l, u);
    }
    total
}

/// ⟨f, h⟩ = ∫ f h̄ in closed form.
pub fn inner_product(f: &DeficiencyElement, h: &DeficiencyElement) -> Result<C64> {
    if f.z != h.z {
        return Err(Error::InvalidInput("elements must share z".into()));
    }
    let (cf, pf) = f.shape();
    let (ch, ph) = h.shape();
    let mut total = C64::new(0.0, 0.0);
    for &(a, wa) in f.measure.atoms() {
        for &(b, wb) in h.measure.atoms() {
            total += wa * wb * shifted_product(f.k, a, pf, b, ph);
        }
    }
    Ok(cf * ch.conj() * total)
}

pub fn gram_matrix(elements: &[DeficiencyElement]) -> Result<DMatrix<C64>> {
    if elements.is_empty() {
        return Err(Error::InvalidInput("empty family".into()));
    }
    let n = elements.len();
    let mut g = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        for j in i..n {
            let v = inner_product(&elements[i], &elements[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankReport {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub tol: f64,
    /// Some singular value lies within a factor 10 of the cutoff.
    pub ill_conditioned: bool,
}

/// Numerical rank of the Gram matrix: singular values above `tol·σ_max`.
pub fn gram_rank(elements: &[DeficiencyElement], tol: f64) -> Result<RankReport> {
    let g = gram_matrix(elements)?;
    let mut sv: Vec<f64> = g.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let cutoff = tol * sv[0];
    let rank = sv.iter().filter(|s| **s > cutoff).count();
    let ill_conditioned = sv.iter().any(|s| *s > 0.1 * cutoff && *s < 10.0 * cutoff);
    Ok(RankReport {
        rank,
        singular_values: sv,
        tol,
        ill_conditioned,
    })
}

/// g_z and g_z′ at each point, optionally without the derivative at some points.
pub fn point_family(points: &[f64], with_prime: &[bool], z: C64) -> Result<Vec<DeficiencyElement>> {
    if points.len() != with_prime.len() {
        return Err(Error::InvalidInput("one flag per point".into()));
    }
    let mut out = Vec::new();
    for (&x, &p) in points.iter().zip(with_prime) {
        out.push(DeficiencyElement::at_point(ElementKind::GConv, x, z)?);
        if p {
            out.push(DeficiencyElement::at_point(ElementKind::GPrimeConv, x, z)?);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomJumps {
    pub x: f64,
    pub value_jump: f64,
    pub derivative_jump: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreePairReport {
    /// g_{−i}∗μ − g_i∗μ
    pub conv: Vec<AtomJumps>,
    /// (g_{−i}∗μ)′ − (g_i∗μ)′
    pub prime: Vec<AtomJumps>,
}

impl FreePairReport {
    pub fn max_jump(&self) -> f64 {
        self.conv
            .iter()
            .chain(&self.prime)
            .map(|j| j.value_jump.max(j.derivative_jump))
            .fold(0.0, f64::max)
    }
}

/// Jumps at the atoms of the differences of the ±i elements.
pub fn free_pair_check(mu: &AtomicMeasure) -> Result<FreePairReport> {
    let jumps = |kind| -> Result<Vec<AtomJumps>> {
        let minus = DeficiencyElement::new(kind, mu.clone(), C64::new(0.0, -1.0))?;
        let plus = DeficiencyElement::new(kind, mu.clone(), C64::new(0.0, 1.0))?;
        Ok(mu
            .positions()
            .into_iter()
            .map(|x| {
                let (vr, dr) = minus.one_sided(x, Side::Right);
                let (vl, dl) = minus.one_sided(x, Side::Left);
                let (ur, er) = plus.one_sided(x, Side::Right);
                let (ul, el) = plus.one_sided(x, Side::Left);
                AtomJumps {
                    x,
                    value_jump: ((vr - ur) - (vl - ul)).norm(),
                    derivative_jump: ((dr - er) - (dl - el)).norm(),
                }
            })
            .collect())
    };
    Ok(FreePairReport {
        conv: jumps(ElementKind::GConv)?,
        prime: jumps(ElementKind::GPrimeConv)?,
    })
}
