//! Numerical monodromy of the Fuchsian system and its classification.
//!
//! Loops start and end at a basepoint `e` and are counterclockwise. The
//! transfer matrix of a path maps the fundamental matrix at its start to the
//! one at its end, so `transfer(γ1 then γ2) = transfer(γ2) · transfer(γ1)`.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::invariants;
use crate::linalg::{self, cr, CMat3};
use crate::model::{Params, RigidBodyParams};
use crate::ode::{self, Tolerances};
use crate::variational::{self, condition_check, ConditionVerdict, FuchsianData, CONDITION_MARGIN};

/// Paths must keep at least this fraction of `|α|` away from the poles.
pub const MIN_CLEARANCE_FRACTION: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 1e-13;
/// Ratio between the working tolerance and the reference run used for the
/// error estimate.
pub const REFERENCE_FACTOR: f64 = 10.0;
/// Threshold for the group invariants (unimodularity, trivial loop at 0,
/// product relation) before a numerical-quality error is raised.
pub const QUALITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Segment {
    Line { from: Complex64, to: Complex64 },
    Arc { center: Complex64, radius: f64, start_angle: f64, sweep: f64 },
}

impl Segment {
    /// Point and derivative for the parameter `s ∈ [0, 1]`.
    pub fn eval(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Segment::Line { from, to } => (from + (to - from) * s, to - from),
            Segment::Arc { center, radius, start_angle, sweep } => {
                let z = Complex64::from_polar(radius, start_angle + sweep * s);
                (center + z, Complex64::i() * sweep * z)
            }
        }
    }

    pub fn start(&self) -> Complex64 {
        self.eval(0.0).0
    }

    pub fn end(&self) -> Complex64 {
        self.eval(1.0).0
    }

    pub fn distance_to(&self, z: Complex64) -> f64 {
        match *self {
            Segment::Line { from, to } => {
                let d = to - from;
                let t =
                    if d.norm_sqr() == 0.0 { 0.0 } else { (((z - from) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0) };
                (from + d * t - z).norm()
            }
            Segment::Arc { .. } => {
                (0..=512).map(|k| (self.eval(k as f64 / 512.0).0 - z).norm()).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Singularity {
    Plus,
    Minus,
    Zero,
}

impl Singularity {
    pub fn location(self, fd: &FuchsianData) -> Complex64 {
        match self {
            Singularity::Plus => fd.orbit.alpha,
            Singularity::Minus => -fd.orbit.alpha,
            Singularity::Zero => cr(0.0),
        }
    }
}

const ALL: [Singularity; 3] = [Singularity::Plus, Singularity::Minus, Singularity::Zero];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationPath {
    pub segments: Vec<Segment>,
    pub closed: bool,
    pub singularities_enclosed: Vec<Singularity>,
}

impl ContinuationPath {
    pub fn open(segments: Vec<Segment>) -> Self {
        ContinuationPath { segments, closed: false, singularities_enclosed: vec![] }
    }

    /// Out along a straight spoke, once around `center`, and back.
    pub fn loop_around(basepoint: Complex64, center: Complex64, radius: f64, enclosed: Vec<Singularity>) -> Self {
        let dir = (basepoint - center) / (basepoint - center).norm();
        let q = center + dir * radius;
        ContinuationPath {
            segments: vec![
                Segment::Line { from: basepoint, to: q },
                Segment::Arc { center, radius, start_angle: dir.arg(), sweep: TAU },
                Segment::Line { from: q, to: basepoint },
            ],
            closed: true,
            singularities_enclosed: enclosed,
        }
    }

    /// Circle about the origin through the basepoint, enclosing every pole.
    pub fn around_all(basepoint: Complex64) -> Self {
        ContinuationPath {
            segments: vec![Segment::Arc {
                center: cr(0.0),
                radius: basepoint.norm(),
                start_angle: basepoint.arg(),
                sweep: TAU,
            }],
            closed: true,
            singularities_enclosed: ALL.to_vec(),
        }
    }

    pub fn then(&self, other: &ContinuationPath) -> ContinuationPath {
        let mut segments = self.segments.clone();
        segments.extend_from_slice(&other.segments);
        let closed = segments.first().map(|s| s.start()) == segments.last().map(|s| s.end());
        ContinuationPath { segments, closed, singularities_enclosed: vec![] }
    }

    pub fn waypoints(&self) -> Vec<Complex64> {
        let mut w: Vec<Complex64> = self.segments.iter().map(Segment::start).collect();
        if let Some(last) = self.segments.last() {
            w.push(last.end());
        }
        w
    }

    pub fn clearance(&self, fd: &FuchsianData) -> f64 {
        self.segments
            .iter()
            .flat_map(|seg| ALL.iter().map(move |s| seg.distance_to(s.location(fd))))
            .fold(f64::INFINITY, f64::min)
    }
}

fn pack(m: &CMat3, out: &mut [f64]) {
    for i in 0..3 {
        for j in 0..3 {
            let z = m[(i, j)];
            out[2 * (3 * i + j)] = z.re;
            out[2 * (3 * i + j) + 1] = z.im;
        }
    }
}

fn unpack(y: &[f64]) -> CMat3 {
    CMat3::from_fn(|i, j| Complex64::new(y[2 * (3 * i + j)], y[2 * (3 * i + j) + 1]))
}

fn continuation_tolerances(tol: f64) -> Tolerances {
    Tolerances { rel_tol: tol, abs_tol: tol, max_step: 1.0 / 16.0, max_steps: 2_000_000, ..Tolerances::default() }
}

/// Transfer matrix of `dΣ/dp = T(p) Σ` along `path`, with `Σ(start) = Id`.
pub fn continue_solution(fd: &FuchsianData, path: &ContinuationPath, tol: f64) -> Result<CMat3> {
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(Error::InvalidParameter(format!("continuation tolerance {tol} outside (0, 1e-2)")));
    }
    let min_clearance = MIN_CLEARANCE_FRACTION * fd.orbit.alpha.norm();
    let clearance = path.clearance(fd);
    if clearance < min_clearance {
        return Err(Error::Domain(format!(
            "path passes within {clearance:.3e} of a pole (minimum {min_clearance:.3e})"
        )));
    }
    let tols = continuation_tolerances(tol);
    let mut y = vec![0.0; 18];
    pack(&CMat3::identity(), &mut y);
    for seg in &path.segments {
        let mut f = |s: f64, y: &[f64], dy: &mut [f64]| {
            let (p, dp) = seg.eval(s);
            pack(&(fd.rhs_unchecked(p) * dp * unpack(y)), dy);
            Ok(())
        };
        y = ode::integrate(&mut f, 0.0, &y, 1.0, &tols, |_| true)?.y;
    }
    Ok(unpack(&y))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromyGroup {
    #[serde(rename = "M_plus", serialize_with = "linalg::ser_mat3")]
    pub m_plus: CMat3,
    #[serde(rename = "M_minus", serialize_with = "linalg::ser_mat3")]
    pub m_minus: CMat3,
    #[serde(rename = "M_zero", serialize_with = "linalg::ser_mat3")]
    pub m_zero: CMat3,
    #[serde(rename = "M_inf", serialize_with = "linalg::ser_mat3")]
    pub m_inf: CMat3,
    pub basepoint: Complex64,
    pub radius: f64,
    pub tol: f64,
    /// Largest entry change between the working run and a run at
    /// `REFERENCE_FACTOR · tol`.
    pub error_estimate: f64,
    /// Determinants of `M_plus`, `M_minus`, `M_zero`.
    pub dets: [Complex64; 3],
    /// Loops in the order they are traversed along the circle through the
    /// basepoint; `M_inf · M_last ⋯ M_first = Id`.
    pub product_order: [Singularity; 3],
    /// `‖M_inf⁻¹ − M_last ⋯ M_first‖` relative to the product of the
    /// generator norms.
    pub product_residual: f64,
    /// `M_plus`, `M_minus` from the reference run.
    #[serde(skip)]
    pub reference: [CMat3; 2],
}

impl MonodromyGroup {
    pub fn get(&self, s: Singularity) -> &CMat3 {
        match s {
            Singularity::Plus => &self.m_plus,
            Singularity::Minus => &self.m_minus,
            Singularity::Zero => &self.m_zero,
        }
    }

    /// `M_last ⋯ M_first` over the finite poles.
    pub fn finite_product(&self) -> CMat3 {
        let [a, b, c] = self.product_order;
        self.get(c) * self.get(b) * self.get(a)
    }

    pub fn generators(&self) -> [CMat3; 2] {
        [self.m_plus, self.m_minus]
    }
}

pub fn default_basepoint(fd: &FuchsianData) -> Complex64 {
    Complex64::new(0.0, 2.0 * fd.orbit.alpha.norm())
}

pub fn default_radius(fd: &FuchsianData) -> f64 {
    0.5 * fd.orbit.alpha.norm()
}

/// Order in which a counterclockwise circle from `basepoint` passes the
/// spokes to the poles.
fn traversal_order(fd: &FuchsianData, basepoint: Complex64) -> [Singularity; 3] {
    let mut order = ALL;
    // rotate so the basepoint is on the positive imaginary axis; every spoke then points into the lower half-plane
    let key = |s: &Singularity| ((s.location(fd) - basepoint) * Complex64::i() * basepoint.conj()).arg();
    order.sort_by(|a, b| key(a).total_cmp(&key(b)));
    order
}

fn loops(fd: &FuchsianData, basepoint: Complex64, radius: f64) -> Vec<ContinuationPath> {
    let mut paths: Vec<ContinuationPath> =
        ALL.iter().map(|&s| ContinuationPath::loop_around(basepoint, s.location(fd), radius, vec![s])).collect();
    paths.push(ContinuationPath::around_all(basepoint));
    paths
}

pub fn monodromy_group(fd: &FuchsianData, basepoint: Complex64, radius: f64, tol: f64) -> Result<MonodromyGroup> {
    let a = fd.orbit.alpha.norm();
    if !(radius > MIN_CLEARANCE_FRACTION * a && radius <= 0.5 * a) {
        return Err(Error::InvalidParameter(format!(
            "loop radius {radius} must lie in ({}, {}]",
            MIN_CLEARANCE_FRACTION * a,
            0.5 * a
        )));
    }
    let paths = loops(fd, basepoint, radius);
    let jobs: Vec<(usize, f64)> = (0..paths.len()).flat_map(|k| [(k, tol), (k, tol * REFERENCE_FACTOR)]).collect();
    let out: Vec<CMat3> = jobs.par_iter().map(|&(k, t)| continue_solution(fd, &paths[k], t)).collect::<Result<_>>()?;
    let (work, reference): (Vec<_>, Vec<_>) = out.chunks(2).map(|c| (c[0], c[1])).unzip();
    let error_estimate = work.iter().zip(&reference).map(|(w, r)| linalg::max_abs(&(w - r))).fold(0.0, f64::max);

    let big = work[3];
    let m_inf = big.try_inverse().ok_or_else(|| Error::NumericalQuality("loop around all poles is singular".into()))?;
    let mut group = MonodromyGroup {
        m_plus: work[0],
        m_minus: work[1],
        m_zero: work[2],
        m_inf,
        basepoint,
        radius,
        tol,
        error_estimate,
        dets: [linalg::det(&work[0]), linalg::det(&work[1]), linalg::det(&work[2])],
        product_order: traversal_order(fd, basepoint),
        product_residual: 0.0,
        reference: [reference[0], reference[1]],
    };
    let prod = group.finite_product();
    let scale = [work[0], work[1], work[2]].iter().map(linalg::max_abs).product::<f64>();
    group.product_residual = linalg::max_abs(&(big - prod)) / scale;

    let mut problems = Vec::new();
    for (name, d) in ["M_plus", "M_minus"].iter().zip(&group.dets) {
        if (d - 1.0).norm() > QUALITY_TOL {
            problems.push(format!("|det {name} - 1| = {:.3e}", (d - 1.0).norm()));
        }
    }
    let zero_dev = linalg::max_abs(&(group.m_zero - CMat3::identity()));
    if zero_dev > QUALITY_TOL {
        problems.push(format!("loop around 0 deviates from Id by {zero_dev:.3e}"));
    }
    if group.product_residual > QUALITY_TOL {
        problems.push(format!("product relation residual {:.3e}", group.product_residual));
    }
    if !problems.is_empty() {
        return Err(Error::NumericalQuality(problems.join("; ")));
    }
    Ok(group)
}

/// Group with the default basepoint and radius.
pub fn monodromy_default(fd: &FuchsianData, tol: f64) -> Result<MonodromyGroup> {
    monodromy_group(fd, default_basepoint(fd), default_radius(fd), tol)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ConjugacyWitness {
    Found {
        #[serde(serialize_with = "linalg::ser_mat3")]
        c: CMat3,
        residual: f64,
        cond: f64,
        solution_dim: usize,
    },
    NotFound {
        reason: String,
        solution_dim: usize,
    },
}

/// Singular values of the joint system below this fraction of the largest
/// count as zero.
pub const WITNESS_TOL: f64 = 1e-7;
const WITNESS_PROBES: usize = 32;
const WITNESS_MAX_COND: f64 = 1e10;

fn witness_residual(c: &CMat3, p: &CMat3, q: &CMat3) -> f64 {
    let scale = linalg::spectral_norm3(c) * linalg::spectral_norm3(p).max(linalg::spectral_norm3(q));
    let r1 = (c * p - q * c).norm();
    let r2 = (c * q - p * c).norm();
    r1.max(r2) / scale
}

pub const DEFAULT_SEED: u64 = 0x5eed;

/// A single `C` with `C P = Q C` and `C Q = P C`, normalized to unit
/// spectral norm. The residual is relative to `‖P‖`.
pub fn conjugacy_witness(p: &CMat3, q: &CMat3) -> ConjugacyWitness {
    conjugacy_witness_seeded(p, q, DEFAULT_SEED)
}

/// As `conjugacy_witness`, with the seed of the random invertibility probes.
pub fn conjugacy_witness_seeded(p: &CMat3, q: &CMat3, seed: u64) -> ConjugacyWitness {
    let id = DMatrix::<Complex64>::identity(3, 3);
    let (pd, qd) = (linalg::to_dmatrix(p), linalg::to_dmatrix(q));
    let top = pd.transpose().kronecker(&id) - id.kronecker(&qd);
    let bottom = qd.transpose().kronecker(&id) - id.kronecker(&pd);
    let mut k = DMatrix::<Complex64>::zeros(18, 9);
    k.view_mut((0, 0), (9, 9)).copy_from(&top);
    k.view_mut((9, 0), (9, 9)).copy_from(&bottom);

    let rs = linalg::right_singular(&k);
    let smax = rs.values[0].max(f64::MIN_POSITIVE);
    let basis: Vec<CMat3> = rs
        .values
        .iter()
        .zip(&rs.vectors)
        .filter(|(s, _)| **s <= WITNESS_TOL * smax)
        .map(|(_, v)| CMat3::from_fn(|i, j| v[3 * j + i]))
        .collect();
    let dim = basis.len();
    if dim == 0 {
        return ConjugacyWitness::NotFound {
            reason: "joint system has only the trivial solution".into(),
            solution_dim: 0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = basis.clone();
    for _ in 0..WITNESS_PROBES {
        let mut comb = CMat3::zeros();
        for b in &basis {
            comb += b * Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        candidates.push(comb);
    }
    let best = candidates
        .into_iter()
        .map(|c| {
            let c = c / cr(linalg::spectral_norm3(&c));
            (linalg::cond3(&c), c)
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    let (cond, c) = best;
    if !(cond < WITNESS_MAX_COND) {
        return ConjugacyWitness::NotFound {
            reason: format!("no invertible solution found (best condition number {cond:.3e})"),
            solution_dim: dim,
        };
    }
    ConjugacyWitness::Found { residual: witness_residual(&c, p, q), c, cond, solution_dim: dim }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Hyperbolicity {
    #[serde(rename = "condition-1")]
    Condition1,
    #[serde(rename = "condition-2")]
    Condition2,
    Neither,
}

pub const HYPERBOLICITY_MARGIN: f64 = 1e-9;

/// Classification of a common spectrum by the moduli of its elements.
pub fn hyperbolicity_classify(spectrum: &[Complex64; 3], margin: f64) -> Hyperbolicity {
    let mods = spectrum.map(|s| s.norm());
    if mods.iter().any(|m| (m - 1.0).abs() <= margin) {
        return Hyperbolicity::Neither;
    }
    let inside: Vec<f64> = mods.iter().copied().filter(|&m| m < 1.0).collect();
    let outside: Vec<f64> = mods.iter().copied().filter(|&m| m > 1.0).collect();
    let distinct = |pair: &[f64]| (pair[0] - pair[1]).abs() > margin * pair[0].max(pair[1]);
    match (inside.len(), outside.len()) {
        (1, 2) if distinct(&outside) => Hyperbolicity::Condition1,
        (2, 1) if distinct(&inside) => Hyperbolicity::Condition2,
        _ => Hyperbolicity::Neither,
    }
}

/// `e^{2πiλ}` for each exponent.
pub fn exponentials(lambda: &[Complex64; 3]) -> [Complex64; 3] {
    lambda.map(|l| (Complex64::i() * TAU * l).exp())
}

pub fn hyperbolicity_from_lambda(lambda: &[Complex64; 3]) -> Hyperbolicity {
    hyperbolicity_classify(&exponentials(lambda), HYPERBOLICITY_MARGIN)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCluster {
    pub eigenvalue: Complex64,
    pub algebraic: usize,
    pub geometric: usize,
    pub defective: bool,
    /// A singular value of `M − sId` sits too close to the rank threshold
    /// to decide.
    pub indeterminate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JordanStructure {
    pub clusters: Vec<EigenCluster>,
    pub defective: bool,
    pub indeterminate: bool,
}

pub const CLUSTER_TOL: f64 = 1e-6;
pub const RANK_TOL: f64 = 1e-8;
/// Half-width, as a factor, of the band around the rank threshold that
/// yields an indeterminate flag.
const BORDERLINE: f64 = 100.0;

pub fn jordan_structure(m: &CMat3, cluster_tol: f64, rank_tol: f64) -> JordanStructure {
    let ev = linalg::eigenvalues(m);
    let scale = ev.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let mut assigned = [false; 3];
    let mut clusters = Vec::new();
    for i in 0..3 {
        if assigned[i] {
            continue;
        }
        let members: Vec<usize> =
            (i..3).filter(|&j| !assigned[j] && (ev[j] - ev[i]).norm() < cluster_tol * scale).collect();
        for &j in &members {
            assigned[j] = true;
        }
        let algebraic = members.len();
        let mean = members.iter().map(|&j| ev[j]).sum::<Complex64>() / algebraic as f64;
        let (geometric, indeterminate) = if algebraic == 1 {
            (1, false)
        } else {
            let shifted = linalg::to_dmatrix(&(m - CMat3::identity() * mean));
            let sv = linalg::singular_values(&shifted);
            let thr = rank_tol * linalg::spectral_norm3(m);
            let rank = sv.iter().filter(|&&s| s > thr).count();
            let borderline = sv.iter().any(|&s| s > thr / BORDERLINE && s < thr * BORDERLINE);
            ((3 - rank).max(1), borderline)
        };
        clusters.push(EigenCluster {
            eigenvalue: mean,
            algebraic,
            geometric,
            defective: geometric < algebraic,
            indeterminate,
        });
    }
    JordanStructure {
        defective: clusters.iter().any(|c| c.defective && !c.indeterminate),
        indeterminate: clusters.iter().any(|c| c.indeterminate),
        clusters,
    }
}

pub fn jordan_default(m: &CMat3) -> JordanStructure {
    jordan_structure(m, CLUSTER_TOL, RANK_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Continuation tolerance.
    pub tol: f64,
    pub basepoint: Option<Complex64>,
    pub radius: Option<f64>,
    pub invariant_tol: f64,
    pub max_degree: u32,
    /// Seed for the conjugacy-witness probes.
    pub seed: u64,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics {
            tol: DEFAULT_TOL,
            basepoint: None,
            radius: None,
            invariant_tol: invariants::DEFAULT_TOL,
            max_degree: invariants::DEFAULT_MAX_DEGREE,
            seed: DEFAULT_SEED,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return Err(Error::InvalidParameter(format!("tol = {} must lie in (0, 1e-2)", self.tol)));
        }
        if !(self.invariant_tol > 0.0 && self.invariant_tol < 1.0) {
            return Err(Error::InvalidParameter(format!("invariant_tol = {} must lie in (0, 1)", self.invariant_tol)));
        }
        if self.max_degree == 0 || self.max_degree > 12 {
            return Err(Error::InvalidParameter(format!("max_degree = {} must lie in 1..=12", self.max_degree)));
        }
        if let Some(r) = self.radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidParameter("radius must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn group(&self, fd: &FuchsianData) -> Result<MonodromyGroup> {
        let e = self.basepoint.unwrap_or_else(|| default_basepoint(fd));
        let r = self.radius.unwrap_or_else(|| default_radius(fd));
        monodromy_group(fd, e, r, self.tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    /// Exponents non-real with pairwise distinct imaginary parts.
    pub exponents: ConditionVerdict,
    /// Parameters in the nondegenerate mechanical range.
    pub nondegenerate: bool,
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    AnalyticNonintegrable,
    MeromorphicNonintegrable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JordanReport {
    #[serde(rename = "M_plus")]
    pub m_plus: JordanStructure,
    #[serde(rename = "M_minus")]
    pub m_minus: JordanStructure,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeSummary {
    pub degree: u32,
    pub invariants: Vec<invariants::PolynomialJson>,
    pub smallest_singular_value: Option<f64>,
    pub semi_invariants: usize,
    pub rational_candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    pub params: serde_json::Value,
    pub h: Complex64,
    pub lambda: [Complex64; 3],
    pub condition: ConditionReport,
    pub hyperbolicity: Hyperbolicity,
    pub jordan: JordanReport,
    pub conjugacy: ConjugacyWitness,
    pub invariants: Vec<DegreeSummary>,
    pub monodromy: MonodromyGroup,
    pub verdict: Verdict,
    pub diagnostics: Vec<String>,
}

/// Semi-invariant search stops here; the candidate tuples grow quickly.
const SEMI_INVARIANT_MAX_DEGREE: u32 = 4;

fn report_from(
    fd: FuchsianData,
    params_echo: serde_json::Value,
    h: Complex64,
    violations: Vec<String>,
    warnings: Vec<String>,
    numerics: &Numerics,
) -> Result<IntegrabilityReport> {
    numerics.validate()?;
    let exponents = condition_check(&fd.lambda, CONDITION_MARGIN);
    let group = numerics.group(&fd).map_err(|e| e.at_stage("monodromy"))?;
    let spectrum = linalg::eigenvalues(&group.m_plus);
    let hyperbolicity = hyperbolicity_classify(&spectrum, HYPERBOLICITY_MARGIN);
    let jordan = JordanReport { m_plus: jordan_default(&group.m_plus), m_minus: jordan_default(&group.m_minus) };
    let conjugacy = conjugacy_witness_seeded(&group.m_plus, &group.m_minus, numerics.seed);

    let gens = group.generators();
    let bases =
        invariants::invariants_up_to(&gens, numerics.max_degree, numerics.invariant_tol, Some(&group.reference));
    let summaries = bases
        .iter()
        .map(|b| {
            let (semi, pairs) = if b.degree <= SEMI_INVARIANT_MAX_DEGREE {
                let s = invariants::semi_invariant_pairs(&gens, b.degree, numerics.invariant_tol);
                (s.semi_invariants.len(), s.rational_candidates.len())
            } else {
                (0, 0)
            };
            DegreeSummary {
                degree: b.degree,
                invariants: b.to_json(),
                smallest_singular_value: b.smallest_singular_values.first().copied(),
                semi_invariants: semi,
                rational_candidates: pairs,
            }
        })
        .collect::<Vec<_>>();

    let nondegenerate = violations.is_empty();
    let mut diagnostics = Vec::new();
    if !nondegenerate {
        diagnostics.push("parameters outside the nondegenerate range".into());
    }
    if let ConditionVerdict::Fails(why) = &exponents {
        diagnostics.push(format!("exponent condition fails: {why}"));
    }
    if jordan.m_plus.indeterminate || jordan.m_minus.indeterminate {
        diagnostics.push("Jordan structure of M_plus or M_minus is indeterminate".into());
    }
    if let ConjugacyWitness::NotFound { reason, .. } = &conjugacy {
        diagnostics.push(format!("no conjugacy witness: {reason}"));
    }
    let found: Vec<u32> = summaries.iter().filter(|s| !s.invariants.is_empty()).map(|s| s.degree).collect();
    if !found.is_empty() {
        diagnostics.push(format!("polynomial invariants found in degrees {found:?}"));
    }
    if hyperbolicity == Hyperbolicity::Neither && exponents.is_satisfied() {
        diagnostics.push("spectrum of M_plus is not in either hyperbolic class".into());
    }

    let defective = jordan.m_plus.defective || jordan.m_minus.defective;
    let verdict = if nondegenerate && defective {
        Verdict::MeromorphicNonintegrable
    } else if nondegenerate && exponents.is_satisfied() {
        Verdict::AnalyticNonintegrable
    } else {
        Verdict::Inconclusive
    };
    Ok(IntegrabilityReport {
        params: params_echo,
        h,
        lambda: fd.lambda,
        condition: ConditionReport { exponents, nondegenerate, violations, warnings },
        hyperbolicity,
        jordan,
        conjugacy,
        invariants: summaries,
        monodromy: group,
        verdict,
        diagnostics,
    })
}

/// Full pipeline from parameters to verdict. The verdict never claims
/// integrability.
pub fn integrability_report(params: &Params, h: Complex64, numerics: &Numerics) -> Result<IntegrabilityReport> {
    let fd = variational::residues(params, h).map_err(|e| e.at_stage("residues"))?;
    let echo = serde_json::to_value(params).expect("params serialize");
    report_from(fd, echo, h, params.condition_violations(), params.warnings(), numerics)
}

/// Same pipeline for the heavy rigid body. Its parameters are never in the
/// nondegenerate range, so the verdict is at most inconclusive.
pub fn integrability_report_rigid(
    rb: &RigidBodyParams,
    h: Complex64,
    numerics: &Numerics,
) -> Result<IntegrabilityReport> {
    let fd = variational::residues_rigid(rb, h).map_err(|e| e.at_stage("residues"))?;
    let echo = serde_json::to_value(rb).expect("params serialize");
    let mut r = report_from(fd, echo, h, vec!["rigid body: no rolling constraint".into()], vec![], numerics)?;
    r.diagnostics.push("characteristic polynomial always has a real root: lambda = -1".into());
    Ok(r)
}
