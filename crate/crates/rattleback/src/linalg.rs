//! Small dense complex linear algebra used throughout the crate.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3, SVD};
use num_complex::Complex64;

pub type CMat3 = Matrix3<Complex64>;
pub type CVec3 = Vector3<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Coefficients `(a2, a1, a0)` of `det(x Id − M) = x³ + a2 x² + a1 x + a0`.
pub fn char_poly(m: &CMat3) -> [Complex64; 3] {
    let tr = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    [-tr, minors, -m.determinant()]
}

fn eval_cubic(a: [Complex64; 3], x: Complex64) -> (Complex64, Complex64) {
    let p = ((x + a[0]) * x + a[1]) * x + a[2];
    let dp = (3.0 * x + 2.0 * a[0]) * x + a[1];
    (p, dp)
}

/// Roots of the monic cubic `x³ + a2 x² + a1 x + a0`, Cardano followed by
/// three Newton steps per root.
pub fn cubic_roots(a2: Complex64, a1: Complex64, a0: Complex64) -> [Complex64; 3] {
    let shift = a2 / 3.0;
    let p = a1 - a2 * a2 / 3.0;
    let q = 2.0 * a2 * a2 * a2 / 27.0 - a2 * a1 / 3.0 + a0;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let (w1, w2) = (-q / 2.0 + disc, -q / 2.0 - disc);
    let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
    let omega = c(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = if w.norm() == 0.0 {
        [-shift; 3]
    } else {
        let u = w.powf(1.0 / 3.0);
        let mut out = [Complex64::default(); 3];
        let mut rot = cr(1.0);
        for r in out.iter_mut() {
            let uk = u * rot;
            *r = uk - p / (3.0 * uk) - shift;
            rot *= omega;
        }
        out
    };
    let coeffs = [a2, a1, a0];
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let (v, dv) = eval_cubic(coeffs, *r);
            if dv.norm() == 0.0 || v.norm() == 0.0 {
                break;
            }
            let next = *r - v / dv;
            if eval_cubic(coeffs, next).0.norm() <= v.norm() {
                *r = next;
            }
        }
    }
    roots
}

pub fn eigenvalues(m: &CMat3) -> [Complex64; 3] {
    match m.eigenvalues() {
        Some(v) => [v[0], v[1], v[2]],
        None => {
            let a = char_poly(m);
            cubic_roots(a[0], a[1], a[2])
        }
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Optimal matching of two equal-size multisets. Returns `perm` with
/// `a[i] ↔ b[perm[i]]` minimizing the largest distance, and that distance.
pub fn match_multisets(a: &[Complex64], b: &[Complex64]) -> (Vec<usize>, f64) {
    assert_eq!(a.len(), b.len());
    permutations(a.len())
        .into_iter()
        .map(|p| {
            let d = a.iter().zip(&p).map(|(x, &j)| (x - b[j]).norm()).fold(0.0, f64::max);
            (p, d)
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .unwrap()
}

pub fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    SVD::new(m.clone(), false, false).singular_values.iter().copied().collect()
}

pub fn spectral_norm3(m: &CMat3) -> f64 {
    SVD::new(*m, false, false).singular_values[0]
}

pub fn cond3(m: &CMat3) -> f64 {
    let s = SVD::new(*m, false, false).singular_values;
    if s[2] == 0.0 {
        f64::INFINITY
    } else {
        s[0] / s[2]
    }
}

/// Right singular vectors of `a`, with singular values in descending order.
/// Wide matrices are padded with zero rows, so `values.len() == a.ncols()`.
pub struct RightSingular {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<Complex64>>,
}

pub fn right_singular(a: &DMatrix<Complex64>) -> RightSingular {
    let (m, n) = a.shape();
    let a = if m < n { a.clone().resize_vertically(n, Complex64::default()) } else { a.clone() };
    let svd = SVD::new(a, false, true);
    let vt = svd.v_t.expect("v requested");
    RightSingular {
        values: svd.singular_values.iter().copied().collect(),
        vectors: (0..n).map(|k| vt.row(k).adjoint()).collect(),
    }
}

/// Orthonormal basis of `{x : ‖A x‖ ≤ threshold ‖x‖}` in the SVD sense.
pub fn null_space(a: &DMatrix<Complex64>, threshold: f64) -> Vec<DVector<Complex64>> {
    let rs = right_singular(a);
    rs.values.iter().zip(rs.vectors).filter(|(s, _)| **s <= threshold).map(|(_, v)| v).collect()
}

/// Unit vector minimizing `‖(M − s Id) v‖`.
pub fn eigenvector(m: &CMat3, s: Complex64) -> CVec3 {
    let shifted = m - CMat3::identity() * s;
    let d = DMatrix::from_fn(3, 3, |i, j| shifted[(i, j)]);
    let v = right_singular(&d).vectors.pop().unwrap();
    CVec3::new(v[0], v[1], v[2])
}

pub fn to_dmatrix(m: &CMat3) -> DMatrix<Complex64> {
    DMatrix::from_fn(3, 3, |i, j| m[(i, j)])
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Double-double accumulator.
#[derive(Clone, Copy, Default)]
struct Dd(f64, f64);

impl Dd {
    fn add(self, x: f64) -> Dd {
        let (s, e) = two_sum(self.0, x);
        let (hi, lo) = two_sum(s, e + self.1);
        Dd(hi, lo)
    }

    /// Adds `a·b·c`, the product carried to roughly double-double accuracy.
    fn add_triple(self, a: f64, b: f64, c: f64) -> Dd {
        let (p, pe) = two_prod(a, b);
        let (q, qe) = two_prod(p, c);
        self.add(q).add(qe).add(pe * c)
    }
}

/// Determinant of the stored entries, accurate to a few ulps of the result.
///
/// Monodromy matrices have entries up to 1e5 with det = 1, so every
/// floating-point formula (cofactor or LU) cancels away most digits. The
/// expansion is summed with error-free transformations instead.
pub fn det(m: &CMat3) -> Complex64 {
    const PERMS: [([usize; 3], f64); 6] =
        [([0, 1, 2], 1.0), ([1, 2, 0], 1.0), ([2, 0, 1], 1.0), ([0, 2, 1], -1.0), ([2, 1, 0], -1.0), ([1, 0, 2], -1.0)];
    let (mut re, mut im) = (Dd::default(), Dd::default());
    for (p, sign) in PERMS {
        let [a, b, c] = [m[(0, p[0])], m[(1, p[1])], m[(2, p[2])]];
        // (a.re + i a.im)(b.re + i b.im)(c.re + i c.im), expanded
        re = re
            .add_triple(sign * a.re, b.re, c.re)
            .add_triple(-sign * a.re, b.im, c.im)
            .add_triple(-sign * a.im, b.re, c.im)
            .add_triple(-sign * a.im, b.im, c.re);
        im = im
            .add_triple(sign * a.re, b.re, c.im)
            .add_triple(sign * a.re, b.im, c.re)
            .add_triple(sign * a.im, b.re, c.re)
            .add_triple(-sign * a.im, b.im, c.im);
    }
    Complex64::new(re.0 + re.1, im.0 + im.1)
}

pub fn max_abs(m: &CMat3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Row-major nested arrays of `[re, im]` pairs.
pub fn rows(m: &CMat3) -> [[Complex64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

pub fn from_rows(r: &[[Complex64; 3]; 3]) -> CMat3 {
    CMat3::from_fn(|i, j| r[i][j])
}

pub fn ser_mat3<S: serde::Serializer>(m: &CMat3, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&rows(m), s)
}
