//! Polynomial and semi-invariants of a matrix group acting on homogeneous
//! polynomials in `x1, x2, x3`.
//!
//! `SymAction::matrix` is the symmetric power `T(M)`, a homomorphism with
//! `T(M) = M` in degree one. A polynomial with coefficient vector `c` maps
//! to `P ∘ M`, whose coefficient vector is `T(M)ᵀ c`; invariants are the
//! common fixed vectors of the `T(g)ᵀ`.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::linalg::{self, cr, CMat3};

pub type Exponent = [u32; 3];

/// Degree-`d` exponents in graded lexicographic order, `x1 > x2 > x3`.
pub fn monomial_basis(d: u32) -> Vec<Exponent> {
    let mut out = Vec::with_capacity(dimension(d));
    for i in (0..=d).rev() {
        for j in (0..=d - i).rev() {
            out.push([i, j, d - i - j]);
        }
    }
    out
}

pub fn dimension(d: u32) -> usize {
    ((d + 1) * (d + 2) / 2) as usize
}

pub fn monomial_name(e: &Exponent) -> String {
    let parts: Vec<String> = e
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymAction {
    pub degree: u32,
    pub basis: Vec<Exponent>,
    #[serde(serialize_with = "ser_dmatrix")]
    pub matrix: DMatrix<Complex64>,
}

fn ser_dmatrix<S: serde::Serializer>(m: &DMatrix<Complex64>, s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<Complex64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
    serde::Serialize::serialize(&rows, s)
}

/// Matrix of `P ↦ P ∘ M` on coefficient vectors: column `α` holds the
/// expansion of `(Mx)^α`.
fn substitution(m: &CMat3, d: u32) -> DMatrix<Complex64> {
    let basis = monomial_basis(d);
    let index: HashMap<Exponent, usize> = basis.iter().enumerate().map(|(k, e)| (*e, k)).collect();
    let mut s = DMatrix::zeros(basis.len(), basis.len());
    for (col, e) in basis.iter().enumerate() {
        let mut poly: BTreeMap<Exponent, Complex64> = BTreeMap::from([([0, 0, 0], cr(1.0))]);
        for (i, &k) in e.iter().enumerate() {
            for _ in 0..k {
                let mut next = BTreeMap::new();
                for (mono, cf) in &poly {
                    for j in 0..3 {
                        let mut mm = *mono;
                        mm[j] += 1;
                        *next.entry(mm).or_insert(cr(0.0)) += cf * m[(i, j)];
                    }
                }
                poly = next;
            }
        }
        for (mono, cf) in poly {
            s[(index[&mono], col)] += cf;
        }
    }
    s
}

pub fn sym_power_action(m: &CMat3, d: u32) -> SymAction {
    assert!(d >= 1, "degree must be at least 1");
    SymAction { degree: d, basis: monomial_basis(d), matrix: substitution(m, d).transpose() }
}

/// A homogeneous polynomial given by its coefficients in the monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub degree: u32,
    pub coefficients: DVector<Complex64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolynomialJson {
    pub degree: u32,
    pub coefficients: Vec<Complex64>,
    pub monomials: Vec<String>,
}

impl Polynomial {
    /// Scaled so the largest coefficient is one.
    pub fn normalized(&self) -> Polynomial {
        let k = self.coefficients.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or(cr(1.0));
        let k = if k.norm() == 0.0 { cr(1.0) } else { k };
        Polynomial { degree: self.degree, coefficients: self.coefficients.map(|z| z / k) }
    }

    /// Terms with coefficients above `1e-10` of the largest one.
    pub fn to_json(&self) -> PolynomialJson {
        let p = self.normalized();
        let basis = monomial_basis(self.degree);
        let (coefficients, monomials) = p
            .coefficients
            .iter()
            .zip(&basis)
            .filter(|(z, _)| z.norm() > 1e-10)
            .map(|(z, e)| (*z, monomial_name(e)))
            .unzip();
        PolynomialJson { degree: self.degree, coefficients, monomials }
    }

    pub fn pretty(&self) -> String {
        let j = self.to_json();
        j.coefficients
            .iter()
            .zip(&j.monomials)
            .map(|(z, m)| if (z - 1.0).norm() < 1e-12 { m.clone() } else { format!("({:.6}{:+.6}i)*{m}", z.re, z.im) })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantBasis {
    pub degree: u32,
    pub vectors: Vec<Polynomial>,
    /// Smallest singular values of the stacked system in the working basis.
    pub smallest_singular_values: Vec<f64>,
    pub threshold: f64,
    pub conditioned: bool,
}

impl InvariantBasis {
    pub fn to_json(&self) -> Vec<PolynomialJson> {
        self.vectors.iter().map(Polynomial::to_json).collect()
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Orthogonal projector onto the span.
    pub fn projector(&self) -> DMatrix<Complex64> {
        let n = dimension(self.degree);
        if self.vectors.is_empty() {
            return DMatrix::zeros(n, n);
        }
        let cols: Vec<DVector<Complex64>> = self.vectors.iter().map(|p| p.coefficients.clone()).collect();
        let q = orthonormalize(&cols, 1e-12);
        let mut p = DMatrix::zeros(n, n);
        for v in q {
            p += &v * v.adjoint();
        }
        p
    }
}

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_DEGREE: u32 = 6;
const CONDITIONER_MAX_COND: f64 = 1e8;
/// Multiplier of the singular-value shift between two continuation runs
/// that still counts as noise.
const SHIFT_FACTOR: f64 = 10.0;

fn orthonormalize(cols: &[DVector<Complex64>], rel: f64) -> Vec<DVector<Complex64>> {
    if cols.is_empty() {
        return vec![];
    }
    let m = DMatrix::from_columns(cols);
    let svd = m.svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rel * smax)
        .map(|(k, _)| u.column(k).into_owned())
        .collect()
}

/// Eigenvector matrix with unit columns of the first generator that is
/// diagonalizable with a well-conditioned eigenbasis.
fn conditioner(generators: &[CMat3]) -> Option<CMat3> {
    for g in generators {
        let ev = linalg::eigenvalues(g);
        let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let distinct = (0..3).all(|i| (i + 1..3).all(|j| (ev[i] - ev[j]).norm() > 1e-6 * scale));
        if !distinct {
            continue;
        }
        let v = CMat3::from_columns(&ev.map(|s| linalg::eigenvector(g, s)));
        if linalg::cond3(&v) < CONDITIONER_MAX_COND {
            return Some(v);
        }
    }
    None
}

struct Working {
    /// Substitution matrices `P ↦ P ∘ g` in the working basis.
    subs: Vec<DMatrix<Complex64>>,
    /// Map from working coefficients back to the original monomial basis.
    back: DMatrix<Complex64>,
    conditioned: bool,
}

fn working(generators: &[CMat3], d: u32, v: Option<CMat3>) -> Working {
    match v {
        Some(v) => {
            let vinv = v.try_inverse().expect("conditioner is invertible");
            Working {
                subs: generators.iter().map(|g| substitution(&(vinv * g * v), d)).collect(),
                back: substitution(&vinv, d),
                conditioned: true,
            }
        }
        None => Working {
            subs: generators.iter().map(|g| substitution(g, d)).collect(),
            back: DMatrix::identity(dimension(d), dimension(d)),
            conditioned: false,
        },
    }
}

/// Rows of `(P ∘ g − P)` below this fraction of the matching row of
/// `P ∘ g` are cancellation noise and impose no constraint.
const ROW_NOISE: f64 = 1e-6;

/// The stacked system with each row scaled to unit norm. Row scaling leaves
/// the kernel alone but removes the dynamic range of the symmetric powers,
/// which otherwise pushes the small singular values below `ε · σ_max`.
fn stacked(subs: &[DMatrix<Complex64>]) -> DMatrix<Complex64> {
    let n = subs.first().map_or(0, |s| s.nrows());
    let mut k = DMatrix::zeros(n * subs.len(), n);
    for (b, s) in subs.iter().enumerate() {
        for i in 0..n {
            let mut row = s.row(i).into_owned();
            let scale = row.norm().max(1.0);
            row[i] -= 1.0;
            let norm = row.norm();
            if norm > ROW_NOISE * scale {
                k.row_mut(b * n + i).copy_from(&(row / cr(norm)));
            }
        }
    }
    k
}

/// Common degree-`d` invariants of `generators`.
///
/// Singular values of the stacked system `(P ∘ g − P)` are taken in the
/// eigenbasis of a well-conditioned generator, and count as zero below
/// `tol`. When `reference` holds the same generators from a less accurate
/// computation, the threshold for each singular value grows by ten times its
/// shift between the two.
pub fn polynomial_invariants(generators: &[CMat3], d: u32, tol: f64, reference: Option<&[CMat3]>) -> InvariantBasis {
    assert!(d >= 1, "degree must be at least 1");
    let n = dimension(d);
    if generators.is_empty() {
        let vectors = (0..n)
            .map(|k| Polynomial { degree: d, coefficients: DVector::from_fn(n, |i, _| cr((i == k) as u8 as f64)) })
            .collect();
        return InvariantBasis {
            degree: d,
            vectors,
            smallest_singular_values: vec![],
            threshold: tol,
            conditioned: false,
        };
    }
    let v = conditioner(generators);
    let w = working(generators, d, v);
    let rs = linalg::right_singular(&stacked(&w.subs));
    let shifts: Vec<f64> = match reference {
        Some(r) if r.len() == generators.len() => {
            let wr = working(r, d, v);
            let sr = linalg::right_singular(&stacked(&wr.subs)).values;
            rs.values.iter().zip(&sr).map(|(a, b)| (a - b).abs()).collect()
        }
        _ => vec![0.0; n],
    };
    let kernel: Vec<DVector<Complex64>> = rs
        .values
        .iter()
        .zip(&shifts)
        .zip(&rs.vectors)
        .filter(|((s, shift), _)| **s <= tol + SHIFT_FACTOR * **shift)
        .map(|(_, v)| &w.back * v)
        .collect();
    let vectors =
        orthonormalize(&kernel, 1e-12).into_iter().map(|c| Polynomial { degree: d, coefficients: c }).collect();
    let mut smallest = rs.values.clone();
    smallest.reverse();
    smallest.truncate(4);
    InvariantBasis {
        degree: d,
        vectors,
        smallest_singular_values: smallest,
        threshold: tol,
        conditioned: w.conditioned,
    }
}

/// Invariant searches over degrees `1..=max_degree`.
pub fn invariants_up_to(
    generators: &[CMat3],
    max_degree: u32,
    tol: f64,
    reference: Option<&[CMat3]>,
) -> Vec<InvariantBasis> {
    use rayon::prelude::*;
    (1..=max_degree).into_par_iter().map(|d| polynomial_invariants(generators, d, tol, reference)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiInvariant {
    pub polynomial: Polynomial,
    /// `P ∘ g = μ_g P` for each generator.
    pub multipliers: Vec<Complex64>,
}

impl SemiInvariant {
    pub fn is_invariant(&self, tol: f64) -> bool {
        self.multipliers.iter().all(|m| (m - 1.0).norm() <= tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemiInvariantSearch {
    pub degree: u32,
    pub semi_invariants: Vec<SemiInvariant>,
    /// Index pairs with equal multiplier tuples; their quotient is a
    /// degree-zero rational invariant.
    pub rational_candidates: Vec<(usize, usize)>,
}

fn same_tuple(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).norm() <= tol * x.norm().max(y.norm()).max(1.0))
}

const MULTIPLIER_TOL: f64 = 1e-6;
const JORDAN_CLUSTER_TOL: f64 = 1e-3;

/// Greedy grouping of values within `radius` of a group's first member.
fn clusters(values: &[Complex64], radius: f64) -> Vec<Vec<Complex64>> {
    let mut out: Vec<Vec<Complex64>> = Vec::new();
    for &z in values {
        match out.iter_mut().find(|c| (c[0] - z).norm() <= radius) {
            Some(c) => c.push(z),
            None => out.push(vec![z]),
        }
    }
    out
}

/// Common eigenvectors of the substitution actions of `generators`.
pub fn semi_invariant_pairs(generators: &[CMat3], d: u32, tol: f64) -> SemiInvariantSearch {
    assert!(d >= 1, "degree must be at least 1");
    let n = dimension(d);
    let mut found: Vec<SemiInvariant> = Vec::new();
    if !generators.is_empty() {
        let w = working(generators, d, conditioner(generators));
        let first = &w.subs[0];
        let ev = first.clone().eigenvalues().map(|v| v.iter().copied().collect::<Vec<_>>()).unwrap_or_else(|| {
            first.clone().schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
        });
        let scale = ev.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let kernel_at = |mu: Complex64| linalg::null_space(&(first - DMatrix::identity(n, n) * mu), tol * scale);
        let mut accepted: Vec<DVector<Complex64>> = Vec::new();
        // a k×k Jordan block splits its eigenvalue by about ε^{1/k}; the
        // cluster mean stays accurate, so try it before the tight clusters
        let mut spaces = Vec::new();
        for loose in clusters(&ev, JORDAN_CLUSTER_TOL * scale) {
            let mean = loose.iter().sum::<Complex64>() / loose.len() as f64;
            let q = kernel_at(mean);
            if !q.is_empty() {
                spaces.push((mean, q));
                continue;
            }
            for tight in clusters(&loose, MULTIPLIER_TOL * scale) {
                let mu = tight.iter().sum::<Complex64>() / tight.len() as f64;
                spaces.push((mu, kernel_at(mu)));
            }
        }
        for (mu, q) in spaces {
            if q.is_empty() {
                continue;
            }
            let qm = DMatrix::from_columns(&q);
            // candidate multiplier tuples from the projected actions of the others
            let mut tuples: Vec<Vec<Complex64>> = vec![vec![mu]];
            for s in &w.subs[1..] {
                let proj = qm.adjoint() * s * &qm;
                let nu: Vec<Complex64> =
                    proj.clone().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_else(|| {
                        proj.schur().eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
                    });
                tuples = tuples.iter().flat_map(|t| nu.iter().map(move |x| [t.clone(), vec![*x]].concat())).collect();
            }
            for t in tuples {
                let mut rows = DMatrix::zeros(n * (w.subs.len() - 1), q.len());
                for (k, s) in w.subs[1..].iter().enumerate() {
                    let block = (s - DMatrix::identity(n, n) * t[k + 1]) * &qm;
                    rows.view_mut((k * n, 0), (n, q.len())).copy_from(&block);
                }
                let ys = if w.subs.len() == 1 {
                    (0..q.len()).map(|k| DVector::from_fn(q.len(), |i, _| cr((i == k) as u8 as f64))).collect()
                } else {
                    linalg::null_space(&rows, tol * scale)
                };
                for y in ys {
                    let v = &qm * y;
                    // skip directions already found
                    let mut r = v.clone();
                    for a in &accepted {
                        r -= a * a.dotc(&v);
                    }
                    if r.norm() < 1e-6 * v.norm() {
                        continue;
                    }
                    accepted.push(&r / cr(r.norm()));
                    let multipliers = w.subs.iter().map(|s| v.dotc(&(s * &v)) / v.dotc(&v)).collect();
                    let c = &w.back * &v;
                    let c = &c / cr(c.norm());
                    found.push(SemiInvariant { polynomial: Polynomial { degree: d, coefficients: c }, multipliers });
                }
            }
        }
    }
    let mut rational_candidates = Vec::new();
    for i in 0..found.len() {
        for j in i + 1..found.len() {
            if same_tuple(&found[i].multipliers, &found[j].multipliers, MULTIPLIER_TOL) {
                rational_candidates.push((i, j));
            }
        }
    }
    SemiInvariantSearch { degree: d, semi_invariants: found, rational_candidates }
}

/// Products `∏ f_k^{e_k}` of degree-one semi-invariants, total degree at
/// most `max_degree`, whose multipliers multiply to one for every generator.
pub fn invariant_products(linear: &[SemiInvariant], max_degree: u32, tol: f64) -> Vec<Vec<u32>> {
    let k = linear.len();
    let mut out = Vec::new();
    let mut exps = vec![0u32; k];
    fn rec(i: usize, left: u32, exps: &mut Vec<u32>, linear: &[SemiInvariant], tol: f64, out: &mut Vec<Vec<u32>>) {
        if i == exps.len() {
            let total: u32 = exps.iter().sum();
            if total == 0 {
                return;
            }
            let ngen = linear[0].multipliers.len();
            let ok = (0..ngen).all(|g| {
                let prod: Complex64 = linear.iter().zip(exps.iter()).map(|(s, &e)| s.multipliers[g].powu(e)).product();
                (prod - 1.0).norm() <= tol
            });
            if ok {
                out.push(exps.clone());
            }
            return;
        }
        for e in 0..=left {
            exps[i] = e;
            rec(i + 1, left - e, exps, linear, tol, out);
        }
        exps[i] = 0;
    }
    if k > 0 {
        rec(0, max_degree, &mut exps, linear, tol, &mut out);
    }
    out
}

/// Coefficients of a product of linear forms.
pub fn product_polynomial(linear: &[SemiInvariant], exps: &[u32]) -> Polynomial {
    let mut poly: BTreeMap<Exponent, Complex64> = BTreeMap::from([([0, 0, 0], cr(1.0))]);
    let mut degree = 0;
    for (s, &e) in linear.iter().zip(exps) {
        assert_eq!(s.polynomial.degree, 1);
        let c = &s.polynomial.coefficients;
        for _ in 0..e {
            let mut next = BTreeMap::new();
            for (mono, cf) in &poly {
                for j in 0..3 {
                    let mut mm = *mono;
                    mm[j] += 1;
                    *next.entry(mm).or_insert(cr(0.0)) += cf * c[j];
                }
            }
            poly = next;
            degree += 1;
        }
    }
    let basis = monomial_basis(degree.max(1));
    let coefficients = DVector::from_fn(basis.len(), |i, _| poly.get(&basis[i]).copied().unwrap_or(cr(0.0)));
    Polynomial { degree, coefficients }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    pub(crate) fn fixture(u: f64, n: f64, k: f64) -> CMat3 {
        CMat3::new(cr(u), cr(n), cr(k), cr(0.0), cr(u), cr(0.0), cr(0.0), cr(0.0), cr(1.0 / (u * u)))
    }

    fn random_matrix(seed: u64) -> CMat3 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        CMat3::from_fn(|_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn basis_order_and_names() {
        assert_eq!(monomial_basis(2), vec![[2, 0, 0], [1, 1, 0], [1, 0, 1], [0, 2, 0], [0, 1, 1], [0, 0, 2]]);
        for d in 1..8 {
            assert_eq!(monomial_basis(d).len(), dimension(d));
        }
        assert_eq!(monomial_name(&[2, 0, 1]), "x1^2*x3");
        assert_eq!(monomial_name(&[0, 1, 0]), "x2");
    }

    #[test]
    fn degree_one_is_the_matrix() {
        let m = random_matrix(1);
        let s = sym_power_action(&m, 1);
        assert!((s.matrix - linalg::to_dmatrix(&m)).norm() < 1e-15);
        let id = sym_power_action(&CMat3::identity(), 3).matrix;
        assert!((id - DMatrix::identity(10, 10)).norm() < 1e-15);
    }

    #[test]
    fn diagonal_scales_monomials() {
        let (a, b, cc) = (c(2.0, 0.5), cr(-0.7), c(0.0, 1.3));
        let m = CMat3::from_diagonal(&nalgebra::Vector3::new(a, b, cc));
        let s = sym_power_action(&m, 3);
        for (k, e) in s.basis.iter().enumerate() {
            let expected = a.powu(e[0]) * b.powu(e[1]) * cc.powu(e[2]);
            assert!((s.matrix[(k, k)] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn multiplicative() {
        let (m1, m2) = (random_matrix(2), random_matrix(3));
        for d in 1..=4 {
            let lhs = sym_power_action(&(m1 * m2), d).matrix;
            let rhs = sym_power_action(&m1, d).matrix * sym_power_action(&m2, d).matrix;
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn identity_group_fixes_everything() {
        let b = polynomial_invariants(&[CMat3::identity()], 2, DEFAULT_TOL, None);
        assert_eq!(b.dim(), 6);
        assert_eq!(polynomial_invariants(&[], 2, DEFAULT_TOL, None).dim(), 6);
    }

    #[test]
    fn fixture_invariant_is_x2_squared_x3() {
        let g = [fixture(2.0, 1.0, 0.0), fixture(2.0, 1.0, 3.0)];
        for d in [1, 2, 4, 5] {
            let b = polynomial_invariants(&g, d, DEFAULT_TOL, None);
            assert_eq!(b.dim(), 0, "degree {d}");
        }
        let b = polynomial_invariants(&g, 3, DEFAULT_TOL, None);
        assert_eq!(b.dim(), 1);
        let j = b.vectors[0].to_json();
        assert_eq!(j.monomials, vec!["x2^2*x3"]);
        assert!((j.coefficients[0] - 1.0).norm() < 1e-12);
        let b6 = polynomial_invariants(&g, 6, DEFAULT_TOL, None);
        assert_eq!(b6.dim(), 1);
        assert_eq!(b6.vectors[0].to_json().monomials, vec!["x2^4*x3^2"]);
    }

    #[test]
    fn fixture_semi_invariants() {
        let g = [fixture(2.0, 1.0, 0.0), fixture(2.0, 1.0, 3.0)];
        let s = semi_invariant_pairs(&g, 1, DEFAULT_TOL);
        assert_eq!(s.semi_invariants.len(), 2);
        let find = |name: &str| {
            s.semi_invariants.iter().find(|x| x.polynomial.to_json().monomials == vec![name.to_string()]).unwrap()
        };
        let x2 = find("x2");
        let x3 = find("x3");
        for m in &x2.multipliers {
            assert!((m - 2.0).norm() < 1e-10);
        }
        for m in &x3.multipliers {
            assert!((m - 0.25).norm() < 1e-10);
        }
        let linear = vec![x2.clone(), x3.clone()];
        let prods = invariant_products(&linear, 3, 1e-9);
        assert_eq!(prods, vec![vec![2, 1]]);
        let p = product_polynomial(&linear, &prods[0]);
        assert_eq!(p.to_json().monomials, vec!["x2^2*x3"]);
        let s3 = semi_invariant_pairs(&g, 3, DEFAULT_TOL);
        assert!(s3
            .semi_invariants
            .iter()
            .any(|x| x.is_invariant(1e-9) && x.polynomial.to_json().monomials == vec!["x2^2*x3"]));
    }

    #[test]
    fn diagonal_semi_invariants_are_monomials() {
        let s = [c(1.5, 0.2), c(-0.3, 0.9), c(0.4, -1.1)];
        let g = CMat3::from_diagonal(&nalgebra::Vector3::from(s));
        let d = 2;
        let r = semi_invariant_pairs(&[g], d, DEFAULT_TOL);
        assert_eq!(r.semi_invariants.len(), dimension(d));
        for si in &r.semi_invariants {
            let j = si.polynomial.to_json();
            assert_eq!(j.monomials.len(), 1);
            let e = monomial_basis(d).into_iter().find(|e| monomial_name(e) == j.monomials[0]).unwrap();
            let expected = s[0].powu(e[0]) * s[1].powu(e[1]) * s[2].powu(e[2]);
            assert!((si.multipliers[0] - expected).norm() < 1e-12);
        }
        assert!(r.rational_candidates.is_empty());
    }

    #[test]
    fn rational_candidates_pair_equal_tuples() {
        // x1 and x2 share the multiplier 2, so x1/x2 is a rational invariant
        let g = CMat3::from_diagonal(&nalgebra::Vector3::new(cr(2.0), cr(2.0), cr(0.25)));
        let r = semi_invariant_pairs(&[g], 1, DEFAULT_TOL);
        assert_eq!(r.semi_invariants.len(), 3);
        assert_eq!(r.rational_candidates.len(), 1);
    }

    #[test]
    fn pretty_form() {
        let p = Polynomial {
            degree: 2,
            coefficients: DVector::from_vec(vec![cr(0.0), cr(2.0), cr(0.0), cr(0.0), cr(0.0), cr(1.0)]),
        };
        assert_eq!(p.pretty(), "x1*x2 + (0.500000+0.000000i)*x3^2");
    }
}
