//! Random elements and dimensions of the constraint spaces.
//!
//! Each space is parametrized by a symmetry-adapted embedding `E` with
//! orthonormal columns (bivector pairs for `R(h)`, antisymmetric pairs for
//! `P(h)`, `V* ⊗ R(h)` for `R^∇(h)`), the remaining linear constraints are
//! assembled as a dense matrix on the parameters, and its null space is found
//! by column-pivoted QR. Projection of a random coefficient array `x` is `E N Nᵀ Eᵀ x`.
//! Constraints in lowered coordinates do not depend on the signature, so
//! samplers are cached per (space, real dimension).

use crate::error::{Error, Result};
use crate::metric::MetricContext;
use crate::tensors::{CovDerivTensor, CurvatureTensor, PrimTensor};
use crate::coeffs::Coeffs;
use crate::tol;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    RSo,
    RU,
    RNablaSo,
    RNablaU,
    PSo,
    PU,
}

impl Space {
    pub const ALL: [Space; 6] = [Space::RSo, Space::RU, Space::RNablaSo, Space::RNablaU, Space::PSo, Space::PU];

    pub fn name(self) -> &'static str {
        match self {
            Space::RSo => "R_SO",
            Space::RU => "R_U",
            Space::RNablaSo => "RNABLA_SO",
            Space::RNablaU => "RNABLA_U",
            Space::PSo => "P_SO",
            Space::PU => "P_U",
        }
    }

    pub fn is_kahler(self) -> bool {
        matches!(self, Space::RU | Space::RNablaU | Space::PU)
    }

    /// Selects the `so` or `u` variant of a space family (`R`, `RNABLA`, `P`).
    pub fn from_family(family: &str, kahler: bool) -> Option<Space> {
        Some(match (family.to_ascii_uppercase().as_str(), kahler) {
            ("R", false) => Space::RSo,
            ("R", true) => Space::RU,
            ("RNABLA", false) => Space::RNablaSo,
            ("RNABLA", true) => Space::RNablaU,
            ("P", false) => Space::PSo,
            ("P", true) => Space::PU,
            _ => return None,
        })
    }

    fn check(self, ctx: &MetricContext) -> Result<()> {
        match (self.is_kahler(), ctx.is_kahler()) {
            (true, false) => Err(Error::NotKahler),
            (false, true) => Err(Error::KahlerUnsupported),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Space {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Space::ALL
            .into_iter()
            .find(|sp| sp.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Input(format!("unknown space {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    Curvature(CurvatureTensor),
    CovDeriv(CovDerivTensor),
    Prim(PrimTensor),
}

impl Element {
    pub fn into_curvature(self) -> Option<CurvatureTensor> {
        match self {
            Element::Curvature(r) => Some(r),
            _ => None,
        }
    }

    pub fn into_cov_deriv(self) -> Option<CovDerivTensor> {
        match self {
            Element::CovDeriv(s) => Some(s),
            _ => None,
        }
    }

    pub fn into_prim(self) -> Option<PrimTensor> {
        match self {
            Element::Prim(p) => Some(p),
            _ => None,
        }
    }
}

/// Seeded random element, normalized to unit max-abs coefficient.
pub fn random_element(space: Space, ctx: &MetricContext, seed: u64) -> Result<Element> {
    space.check(ctx)?;
    let sampler = sampler(space, ctx.dim());
    if sampler.dim() == 0 {
        return Err(Error::EmptySpace(space.name().to_string()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<f64> = (0..sampler.embed.full_len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y = sampler.null.project(&sampler.embed.gather(&x));
    let mut full = sampler.embed.embed(&y);
    let m = full.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return Err(Error::EmptySpace(space.name().to_string()));
    }
    full.iter_mut().for_each(|v| *v /= m);
    let n = ctx.dim();
    Ok(match space {
        Space::RSo | Space::RU => Element::Curvature(CurvatureTensor::new(ctx, Coeffs::from_vec(n, full).expect("sized"))?),
        Space::RNablaSo | Space::RNablaU => {
            Element::CovDeriv(CovDerivTensor::new(ctx, Coeffs::from_vec(n, full).expect("sized"))?)
        }
        Space::PSo | Space::PU => Element::Prim(PrimTensor::new(ctx, Coeffs::from_vec(n, full).expect("sized"))?),
    })
}

/// Rank of the null space of the constraint operator.
pub fn space_dimension(space: Space, ctx: &MetricContext) -> Result<usize> {
    space.check(ctx)?;
    Ok(sampler(space, ctx.dim()).dim())
}

/// Dimension of `ker(tr_{1,5}) ∩ R^∇(h)`, from a separate constraint operator
/// stacking the second Bianchi identity with the trace map.
pub fn trace_1_5_kernel_dimension(ctx: &MetricContext) -> Result<usize> {
    let space = if ctx.is_kahler() { Space::RNablaU } else { Space::RNablaSo };
    let n = ctx.dim();
    let embed = directional(space, n);
    let a = assemble(&embed, |full, out| {
        second_bianchi_rows(n, full, out);
        trace15_rows(n, ctx.eps(), full, out);
    });
    Ok(embed.nparams() - rank(&a))
}

struct Sampler {
    embed: Embedding,
    null: Null,
}

impl Sampler {
    fn dim(&self) -> usize {
        self.null.dim(self.embed.nparams())
    }
}

type Cell = Arc<OnceLock<Arc<Sampler>>>;

fn sampler(space: Space, n: usize) -> Arc<Sampler> {
    static CACHE: OnceLock<Mutex<HashMap<(Space, usize), Cell>>> = OnceLock::new();
    let cell = {
        let mut map = CACHE.get_or_init(Default::default).lock().unwrap_or_else(|e| e.into_inner());
        map.entry((space, n)).or_default().clone()
    };
    cell.get_or_init(|| Arc::new(build(space, n))).clone()
}

fn build(space: Space, n: usize) -> Sampler {
    match space {
        Space::RSo | Space::RU => {
            let embed = Embedding::pairs(n);
            let kahler = space == Space::RU;
            let a = assemble(&embed, |full, out| {
                bianchi1_rows(n, full, out);
                if kahler {
                    j_rows4(n, full, out);
                }
            });
            Sampler { null: Null::basis(&a), embed }
        }
        Space::PSo | Space::PU => {
            let embed = Embedding::prim(n);
            let kahler = space == Space::PU;
            let a = assemble(&embed, |full, out| {
                cyclic_rows(n, full, out);
                if kahler {
                    j_rows3(n, full, out);
                }
            });
            Sampler { null: Null::basis(&a), embed }
        }
        Space::RNablaSo | Space::RNablaU => {
            let embed = directional(space, n);
            let a = assemble(&embed, |full, out| second_bianchi_rows(n, full, out));
            Sampler { null: Null::complement(&a), embed }
        }
    }
}

fn directional(space: Space, n: usize) -> Embedding {
    let base_space = if space.is_kahler() { Space::RU } else { Space::RSo };
    let base = sampler(base_space, n);
    Embedding::Directional { n, base: Arc::new(base.full_basis()) }
}

impl Sampler {
    /// Orthonormal basis of the space in full coefficient coordinates.
    fn full_basis(&self) -> DMatrix<f64> {
        let Null::Basis(nb) = &self.null else { unreachable!("explicit basis") };
        let mut out = DMatrix::zeros(self.embed.full_len(), nb.ncols());
        for k in 0..nb.ncols() {
            let col = self.embed.embed(&nb.column(k).into_owned());
            out.set_column(k, &DVector::from_vec(col));
        }
        out
    }
}

enum Embedding {
    /// Columns indexed by ordered pairs of bivector indices; each is the
    /// normalized tensor with the antisymmetries and pair symmetry built in.
    Pairs { n: usize, params: Vec<Vec<(usize, f64)>> },
    /// Columns indexed by `(a, b<c)`, antisymmetric in the last two slots.
    Prim { n: usize, params: Vec<Vec<(usize, f64)>> },
    /// `e_m ⊗ Q_k` for an orthonormal basis `Q` of the curvature space.
    Directional { n: usize, base: Arc<DMatrix<f64>> },
}

fn off(n: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

impl Embedding {
    fn pairs(n: usize) -> Self {
        let bivs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let mut params = Vec::new();
        for i in 0..bivs.len() {
            for j in i..bivs.len() {
                let ((a, b), (c, d)) = (bivs[i], bivs[j]);
                let mut entries = Vec::new();
                let mut put = |p: (usize, usize), q: (usize, usize)| {
                    entries.push((off(n, &[p.0, p.1, q.0, q.1]), 1.0));
                    entries.push((off(n, &[p.1, p.0, q.0, q.1]), -1.0));
                    entries.push((off(n, &[p.0, p.1, q.1, q.0]), -1.0));
                    entries.push((off(n, &[p.1, p.0, q.1, q.0]), 1.0));
                };
                put((a, b), (c, d));
                if i != j {
                    put((c, d), (a, b));
                }
                let s = 1.0 / (entries.len() as f64).sqrt();
                entries.iter_mut().for_each(|e| e.1 *= s);
                params.push(entries);
            }
        }
        Embedding::Pairs { n, params }
    }

    fn prim(n: usize) -> Self {
        let mut params = Vec::new();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for a in 0..n {
            for b in 0..n {
                for c in b + 1..n {
                    params.push(vec![(off(n, &[a, b, c]), s), (off(n, &[a, c, b]), -s)]);
                }
            }
        }
        Embedding::Prim { n, params }
    }

    fn full_len(&self) -> usize {
        match self {
            Embedding::Pairs { n, .. } => n.pow(4),
            Embedding::Prim { n, .. } => n.pow(3),
            Embedding::Directional { n, .. } => n.pow(5),
        }
    }

    fn nparams(&self) -> usize {
        match self {
            Embedding::Pairs { params, .. } | Embedding::Prim { params, .. } => params.len(),
            Embedding::Directional { n, base } => n * base.ncols(),
        }
    }

    fn embed(&self, y: &DVector<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.full_len()];
        match self {
            Embedding::Pairs { params, .. } | Embedding::Prim { params, .. } => {
                for (p, entries) in params.iter().enumerate() {
                    for &(o, w) in entries {
                        out[o] += w * y[p];
                    }
                }
            }
            Embedding::Directional { n, base } => {
                let k = base.ncols();
                let len = n.pow(4);
                for m in 0..*n {
                    let coef = y.rows(m * k, k);
                    let block = &**base * coef;
                    out[m * len..(m + 1) * len].copy_from_slice(block.as_slice());
                }
            }
        }
        out
    }

    fn gather(&self, x: &[f64]) -> DVector<f64> {
        match self {
            Embedding::Pairs { params, .. } | Embedding::Prim { params, .. } => {
                DVector::from_iterator(params.len(), params.iter().map(|e| e.iter().map(|&(o, w)| w * x[o]).sum()))
            }
            Embedding::Directional { n, base } => {
                let len = n.pow(4);
                let mut out = Vec::with_capacity(self.nparams());
                for m in 0..*n {
                    let block = DVector::from_column_slice(&x[m * len..(m + 1) * len]);
                    out.extend((base.transpose() * block).iter());
                }
                DVector::from_vec(out)
            }
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        let mut y = DVector::zeros(self.nparams());
        y[j] = 1.0;
        self.embed(&y)
    }
}

fn assemble(embed: &Embedding, rows: impl Fn(&[f64], &mut Vec<f64>)) -> DMatrix<f64> {
    let np = embed.nparams();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(np);
    for j in 0..np {
        let mut out = Vec::new();
        rows(&embed.column(j), &mut out);
        cols.push(out);
    }
    let nrows = cols.first().map_or(0, |c| c.len());
    DMatrix::from_fn(nrows, np, |r, c| cols[c][r])
}

fn bianchi1_rows(n: usize, r: &[f64], out: &mut Vec<f64>) {
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for d in 0..n {
                    out.push(r[off(n, &[a, b, c, d])] + r[off(n, &[b, c, a, d])] + r[off(n, &[c, a, b, d])]);
                }
            }
        }
    }
}

/// `J e_i = σ e_{π(i)}` for the canonical complex structure.
fn j_image(n: usize, i: usize) -> (usize, f64) {
    let h = n / 2;
    if i < h {
        (i + h, 1.0)
    } else {
        (i - h, -1.0)
    }
}

fn j_rows4(n: usize, r: &[f64], out: &mut Vec<f64>) {
    for a in 0..n {
        for b in a + 1..n {
            let ((ja, sa), (jb, sb)) = (j_image(n, a), j_image(n, b));
            for c in 0..n {
                for d in c + 1..n {
                    out.push(sa * sb * r[off(n, &[ja, jb, c, d])] - r[off(n, &[a, b, c, d])]);
                }
            }
        }
    }
}

fn cyclic_rows(n: usize, p: &[f64], out: &mut Vec<f64>) {
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                out.push(p[off(n, &[a, b, c])] + p[off(n, &[b, c, a])] + p[off(n, &[c, a, b])]);
            }
        }
    }
}

fn j_rows3(n: usize, p: &[f64], out: &mut Vec<f64>) {
    for a in 0..n {
        for b in 0..n {
            for c in b + 1..n {
                let ((jb, sb), (jc, sc)) = (j_image(n, b), j_image(n, c));
                out.push(sb * sc * p[off(n, &[a, jb, jc])] - p[off(n, &[a, b, c])]);
            }
        }
    }
}

fn second_bianchi_rows(n: usize, s: &[f64], out: &mut Vec<f64>) {
    for m in 0..n {
        for a in m + 1..n {
            for b in a + 1..n {
                for c in 0..n {
                    for d in c + 1..n {
                        out.push(
                            s[off(n, &[m, a, b, c, d])] + s[off(n, &[a, b, m, c, d])] + s[off(n, &[b, m, a, c, d])],
                        );
                    }
                }
            }
        }
    }
}

fn trace15_rows(n: usize, eps: &[f64], s: &[f64], out: &mut Vec<f64>) {
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                out.push((0..n).map(|i| eps[i] * s[off(n, &[i, a, i, b, c])]).sum());
            }
        }
    }
}

enum Null {
    /// Orthonormal basis of the null space, `params × dim`.
    Basis(DMatrix<f64>),
    /// Orthonormal basis of the row space, `params × rank`.
    Complement(DMatrix<f64>),
}

impl Null {
    fn basis(a: &DMatrix<f64>) -> Self {
        let np = a.ncols();
        if np == 0 {
            return Null::Basis(DMatrix::zeros(0, 0));
        }
        let mut padded = DMatrix::zeros(np, a.nrows().max(np));
        padded.view_mut((0, 0), (np, a.nrows())).copy_from(&a.transpose());
        let (q, r) = row_space(padded);
        Null::Basis(q.columns(r, np - r).into_owned())
    }

    fn complement(a: &DMatrix<f64>) -> Self {
        let np = a.ncols();
        if a.nrows() == 0 || np == 0 {
            return Null::Complement(DMatrix::zeros(np, 0));
        }
        let (q, r) = row_space(a.transpose());
        Null::Complement(q.columns(0, r).into_owned())
    }

    fn dim(&self, nparams: usize) -> usize {
        match self {
            Null::Basis(b) => b.ncols(),
            Null::Complement(r) => nparams - r.ncols(),
        }
    }

    fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        match self {
            Null::Basis(b) => b * (b.transpose() * y),
            Null::Complement(r) => y - r * (r.transpose() * y),
        }
    }
}

/// Column-pivoted QR of `aᵀ`: the first `rank` columns of `Q` span the row
/// space of `a`. Rank counts pivots above [`tol::RANK_CUTOFF`] times the largest.
fn row_space(at: DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let qr = at.col_piv_qr();
    let q = qr.q();
    let r = qr.unpack_r();
    let diag: Vec<f64> = (0..r.nrows().min(r.ncols())).map(|i| r[(i, i)].abs()).collect();
    let top = diag.iter().fold(0.0f64, |m, v| m.max(*v));
    let rank = if top == 0.0 { 0 } else { diag.iter().filter(|v| **v > tol::RANK_CUTOFF * top).count() };
    (q, rank)
}

fn rank(a: &DMatrix<f64>) -> usize {
    if a.nrows() == 0 || a.ncols() == 0 {
        return 0;
    }
    row_space(a.transpose()).1
}
