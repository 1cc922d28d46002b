//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rattleback::invariants;
use rattleback::linalg::{self, c, cr, CMat3, CVec3, I};
use rattleback::model::{Params, RigidBodyParams, State};
use rattleback::monodromy::{self, ConjugacyWitness, ContinuationPath, Numerics, Singularity, Verdict, DEFAULT_TOL};
use rattleback::simulate::{self, IntegratorConfig};
use rattleback::variational::{self, FuchsianData};

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn criterion(id: u32, name: &str, budget: Duration, body: impl FnOnce(&mut Outcome)) -> bool {
    let mut out = Outcome::new();
    let t0 = Instant::now();
    body(&mut out);
    let elapsed = t0.elapsed();
    out.check(
        elapsed < budget,
        format!("runtime {:.2} s exceeds {:.0} s", elapsed.as_secs_f64(), budget.as_secs_f64()),
    );
    let pass = out.failures.is_empty();
    println!("{} {id}. {name} ({:.3} s)", if pass { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    for n in &out.notes {
        println!("       {n}");
    }
    for f in &out.failures {
        println!("       failed: {f}");
    }
    pass
}

fn published() -> [Complex64; 3] {
    [c(-0.365, -0.858), c(-0.435, 0.963), c(-0.200, -0.106)]
}

/// Largest per-component deviation after optimal matching.
fn componentwise(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    let (perm, _) = linalg::match_multisets(a, b);
    perm.iter().enumerate().map(|(i, &j)| (a[i].re - b[j].re).abs().max((a[i].im - b[j].im).abs())).fold(0.0, f64::max)
}

fn c1(out: &mut Outcome) {
    let params = common::worked_example();
    let report = monodromy::integrability_report(&params, cr(1.0), &Numerics::default());
    let report = match report {
        Ok(r) => r,
        Err(e) => return out.check(false, format!("pipeline error: {e}")),
    };
    let dev = componentwise(&report.lambda, &published());
    out.note(format!("max component deviation from published exponents: {dev:.2e}"));
    out.check(dev < 2e-3, format!("exponent deviation {dev:.2e} >= 2e-3"));
    out.check(report.verdict == Verdict::AnalyticNonintegrable, format!("verdict {:?}", report.verdict));
}

fn c2(out: &mut Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut spec_b, mut tr_a, mut a_inf, mut nine, mut im, mut comm) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut nine_plus = 0.0f64;
    let mut im_corrected = 0.0f64;
    let mut n = 0;
    while n < 100 {
        let params = common::mechanical_draw(&mut rng);
        let h = c(rng.gen_range(0.2..3.0), rng.gen_range(-1.0..1.0));
        let Ok(fd) = variational::residues(&params, h) else { continue };
        n += 1;
        let sb = linalg::eigenvalues(&fd.b);
        spec_b = spec_b.max(linalg::match_multisets(&sb, &[cr(0.0), cr(-1.0), cr(-1.0)]).1);
        tr_a = tr_a.max((fd.a.trace() + 1.0).norm());
        a_inf = a_inf.max(linalg::max_abs(&(fd.a_inf - (-fd.a * cr(2.0) - fd.b))));
        let v = 12.0 * (fd.theta0 - fd.theta1) + fd.chi0 + 3.0 * fd.chi1;
        nine = nine.max((v + 9.0).norm());
        nine_plus = nine_plus.max((v - 9.0).norm());
        let s = params.inertia;
        let [r1, r2, r3] = fd.orbit.rho;
        let printed = 2.0 * s.s12 * r1 * r2 / (r3 * (r1 - r2) * (s.s11 + s.s22 - s.s33));
        let got = (1.0 / (fd.theta0 - fd.theta1)).im;
        let scale = printed.norm().max(1e-12);
        im = im.max((got - printed).norm() / scale);
        im_corrected = im_corrected.max((got + printed).norm() / scale);
        let k = fd.a * fd.b - fd.b * fd.a;
        comm = comm.max((k[(2, 0)] - 1.0 / fd.orbit.beta).norm());
    }
    out.note(format!("Spectr(B) {spec_b:.1e}, tr A {tr_a:.1e}, A_inf {a_inf:.1e}, [A,B]31 {comm:.1e}"));
    out.note(format!("12(th0-th1)+chi0+3chi1: |v+9| up to {nine:.2e}, |v-9| up to {nine_plus:.1e}"));
    out.note(format!("Im 1/(th0-th1): relative error vs closed form {im:.2e}, vs its negative {im_corrected:.1e}"));
    out.check(spec_b < 1e-10, format!("Spectr(B) deviation {spec_b:.2e}"));
    out.check(tr_a < 1e-10, format!("tr A + 1 = {tr_a:.2e}"));
    out.check(a_inf == 0.0, format!("A_inf differs from -2A-B by {a_inf:.2e}"));
    out.check(nine < 1e-9, format!("12(th0-th1)+chi0+3chi1 = -9 off by {nine:.2e}"));
    out.check(im < 1e-9, format!("Im 1/(th0-th1) closed form off by {im:.2e} (relative)"));
    out.check(comm < 1e-10, format!("[A,B]31 - 1/beta = {comm:.2e}"));
}

fn field(x: &[Complex64; 6], s_ref: Complex64, params: &Params) -> [Complex64; 6] {
    let w = CVec3::new(x[0], x[1], x[2]);
    let g = CVec3::new(x[3], x[4], x[5]);
    let (wd, gd) = variational::complex_rhs(&w, &g, s_ref, params).unwrap();
    [wd[0], wd[1], wd[2], gd[0], gd[1], gd[2]]
}

/// Finite-difference Jacobian block on (ω1, ω2, γ3), carried to the
/// Fuchsian gauge and time.
fn fd_fuchsian(params: &Params, fd: &FuchsianData, p: Complex64) -> CMat3 {
    const NORMAL: [usize; 3] = [0, 1, 5];
    let st = fd.orbit.point(p).unwrap();
    let x = [st.omega[0], st.omega[1], st.omega[2], st.gamma[0], st.gamma[1], st.gamma[2]];
    let h = 1e-6;
    let mut block = CMat3::zeros();
    for (b, &k) in NORMAL.iter().enumerate() {
        let (mut xp, mut xm) = (x, x);
        xp[k] += h;
        xm[k] -= h;
        let (fp, fm) = (field(&xp, st.s, params), field(&xm, st.s, params));
        for (a, &i) in NORMAL.iter().enumerate() {
            block[(a, b)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    let mp = block / fd.orbit.time_change(p);
    let d = [p, p, p * p - fd.orbit.alpha2];
    let dp = [cr(1.0), cr(1.0), 2.0 * p];
    CMat3::from_fn(|i, j| mp[(i, j)] * d[j] / d[i] - if i == j { dp[i] / d[i] } else { cr(0.0) })
}

fn c3(out: &mut Outcome) {
    let params = common::worked_example();
    let fd = variational::residues(&params, cr(1.0)).unwrap();
    let a = fd.orbit.alpha.norm();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut n = 0;
    while n < 20 {
        let p = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)) * a;
        if [fd.orbit.alpha, -fd.orbit.alpha, cr(0.0)].iter().any(|z| (p - z).norm() < 0.1 * a) {
            continue;
        }
        n += 1;
        let t = fd.rhs(p).unwrap();
        worst = worst.max((t - fd_fuchsian(&params, &fd, p)).norm() / t.norm());
    }
    out.note(format!("largest relative error over 20 points: {worst:.2e}"));
    out.check(worst < 1e-5, format!("relative error {worst:.2e}"));
}

/// `ε·Σ|M_ij·adj(M)_ji|`: how far det can move when the entries of `M` are
/// merely rounded to doubles.
fn det_floor(m: &CMat3) -> f64 {
    let adj = m.try_inverse().map(|i| i * linalg::det(m)).unwrap_or_else(CMat3::zeros);
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += m[(i, j)].norm() * adj[(j, i)].norm();
        }
    }
    s * f64::EPSILON
}

fn c4(out: &mut Outcome) {
    let (mut det, mut zero, mut spec, mut witness, mut halving) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut failures = 0;
    for (params, fd) in common::condition_draws(4, 10) {
        let e = monodromy::default_basepoint(&fd);
        let r = monodromy::default_radius(&fd);
        let (g1, g2) = match (
            monodromy::monodromy_group(&fd, e, r, DEFAULT_TOL),
            monodromy::monodromy_group(&fd, e, r / 2.0, DEFAULT_TOL),
        ) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(err), _) | (_, Err(err)) => {
                failures += 1;
                out.note(format!("draw {params:?}: {err}"));
                for s in [Singularity::Plus, Singularity::Minus] {
                    let path = ContinuationPath::loop_around(e, s.location(&fd), r, vec![s]);
                    if let Ok(m) = monodromy::continue_solution(&fd, &path, DEFAULT_TOL) {
                        out.note(format!(
                            "  {s:?}: |M| = {:.1e}, representation floor {:.1e}",
                            linalg::max_abs(&m),
                            det_floor(&m)
                        ));
                    }
                }
                continue;
            }
        };
        for (m, d) in g1.generators().iter().zip(&g1.dets) {
            let dev = (d - 1.0).norm();
            det = det.max(dev);
            if dev >= 1e-8 {
                out.note(format!(
                    "|det - 1| = {dev:.1e} with |M| = {:.1e}, representation floor {:.1e}",
                    linalg::max_abs(m),
                    det_floor(m)
                ));
            }
        }
        zero = zero.max(linalg::max_abs(&(g1.m_zero - CMat3::identity())));
        let ex = monodromy::exponentials(&fd.lambda);
        let scale = ex.iter().map(|s| s.norm()).fold(1.0, f64::max);
        for m in g1.generators() {
            spec = spec.max(linalg::match_multisets(&linalg::eigenvalues(&m), &ex).1 / scale);
        }
        match monodromy::conjugacy_witness(&g1.m_plus, &g1.m_minus) {
            ConjugacyWitness::Found { residual, .. } => witness = witness.max(residual),
            ConjugacyWitness::NotFound { reason, .. } => out.check(false, format!("no conjugacy witness: {reason}")),
        }
        let bound = (g1.error_estimate + g2.error_estimate).max(f64::EPSILON);
        for (a, b) in g1.generators().iter().zip(g2.generators()) {
            halving = halving.max(linalg::max_abs(&(a - b)) / bound);
        }
    }
    out.note(format!("|det M - 1| {det:.1e}, |M0 - Id| {zero:.1e}, spectrum {spec:.1e}, witness {witness:.1e}"));
    out.note(format!("radius halving: largest change / combined error estimate = {halving:.2}"));
    out.check(failures == 0, format!("{failures} draws failed"));
    out.check(det < 1e-8, format!("|det M - 1| = {det:.2e}"));
    out.check(zero < 1e-8, format!("|M0 - Id| = {zero:.2e}"));
    out.check(spec < 1e-6, format!("spectrum mismatch {spec:.2e}"));
    out.check(witness < 1e-6, format!("witness residual {witness:.2e}"));
    out.check(halving <= 1.0, "radius halving exceeds the error estimates");
}

fn fixture(u: f64, n: f64, k: f64) -> CMat3 {
    CMat3::new(cr(u), cr(n), cr(k), cr(0.0), cr(u), cr(0.0), cr(0.0), cr(0.0), cr(1.0 / (u * u)))
}

fn c5(out: &mut Outcome) {
    let g = [fixture(2.0, 1.0, 0.0), fixture(2.0, 1.0, 3.0)];
    for d in 1..=2 {
        let b = invariants::polynomial_invariants(&g, d, invariants::DEFAULT_TOL, None);
        out.check(b.dim() == 0, format!("fixture has {} invariants at degree {d}", b.dim()));
    }
    let b = invariants::polynomial_invariants(&g, 3, invariants::DEFAULT_TOL, None);
    let found: Vec<String> = b.vectors.iter().map(|p| p.pretty()).collect();
    out.note(format!("fixture degree 3: {found:?}"));
    out.check(found == ["x2^2*x3"], format!("fixture degree 3 gives {found:?}"));

    let fd = variational::residues(&common::worked_example(), cr(1.0)).unwrap();
    let g = match monodromy::monodromy_default(&fd, DEFAULT_TOL) {
        Ok(g) => g,
        Err(e) => return out.check(false, format!("monodromy: {e}")),
    };
    let bases = invariants::invariants_up_to(&g.generators(), 6, invariants::DEFAULT_TOL, Some(&g.reference));
    let dims: Vec<usize> = bases.iter().map(|b| b.dim()).collect();
    let smallest: Vec<String> = bases
        .iter()
        .map(|b| format!("{:.1e}", b.smallest_singular_values.iter().copied().fold(f64::INFINITY, f64::min)))
        .collect();
    out.note(format!("worked-example group, degrees 1..6: dims {dims:?}, smallest singular values {smallest:?}"));
    out.check(dims.iter().all(|&d| d == 0), format!("worked-example group has invariants {dims:?}"));
}

fn c6(out: &mut Outcome) {
    let (s11, s22, s33, r, mg) = (0.9, 1.4, 1.7, [0.3, -0.6, 0.0], 2.2);
    let rb = RigidBodyParams::new(s11, s22, s33, r, mg).unwrap();
    let fd = variational::residues_rigid(&rb, c(0.7, 0.1)).unwrap();
    let beta = fd.orbit.beta;
    #[rustfmt::skip]
    let a = CMat3::new(
        cr(0.0), I * (s33 - s22) / s11, cr(0.0),
        I * (s11 - s33) / s22, cr(0.0), cr(0.0),
        -1.0 / beta, -I / beta, cr(-1.0),
    );
    #[rustfmt::skip]
    let b = CMat3::new(
        cr(-1.0), cr(0.0), -2.0 * I * mg * r[1] / s11,
        cr(0.0), cr(-1.0), 2.0 * I * mg * r[0] / s22,
        cr(0.0), cr(0.0), cr(0.0),
    );
    let (da, db) = (linalg::max_abs(&(fd.a - a)), linalg::max_abs(&(fd.b - b)));
    out.check(da < 1e-12 && db < 1e-12, format!("printed A, B off by {da:.1e}, {db:.1e}"));
    let spec = linalg::match_multisets(&linalg::eigenvalues(&fd.a), &variational::rigid_spectrum(&rb.inertia())).1;
    out.check(spec < 1e-12, format!("Spectr(A) vs closed form {spec:.1e}"));

    // Kovalevskaya: Σ11 = Σ22, Σ33 = 2Σ11
    let kov = RigidBodyParams::new(1.0, 1.0, 2.0, [0.8, -0.3, 0.0], 1.7).unwrap();
    let fk = variational::residues_rigid(&kov, cr(1.0)).unwrap();
    let ea = linalg::eigenvalues(&fk.a);
    let ei = linalg::eigenvalues(&fk.a_inf);
    out.note(format!("Kovalevskaya Spectr(A) = {:?}", ea.map(|z| format!("{:.6}", z.re))));
    out.note(format!("Kovalevskaya Spectr(A_inf) = {:?}", ei.map(|z| format!("{:.6}", z.re))));
    let dev = linalg::match_multisets(&ea, &[cr(-1.0), cr(1.0), cr(1.0)]).1;
    out.check(dev < 1e-10, format!("Spectr(A) is not {{-1, 1, 1}} (deviation {dev:.2})"));
    let dev = linalg::match_multisets(&ei, &[cr(-2.0), cr(3.0), cr(3.0)]).1;
    out.check(dev < 1e-6, format!("Spectr(A_inf) is not {{-2, 3, 3}} (deviation {dev:.1e})"));
    let j = monodromy::jordan_default(&fk.a_inf);
    out.check(j.defective && !j.indeterminate, "no Jordan block detected at infinity");

    let g = [0.3f64, -0.2, 0.0];
    let state = State::new([0.4, -1.1, 2.0], [g[0], g[1], (1.0 - g[0] * g[0] - g[1] * g[1]).sqrt()]).unwrap();
    match simulate::rigid_body_drift(&state, &kov, 50.0, &IntegratorConfig::default()) {
        Ok(d) => {
            out.note(format!("L drift {:.1e}", d.l_drift));
            out.check(d.l_drift < 1e-9, format!("L drift {:.2e}", d.l_drift));
        }
        Err(e) => out.check(false, format!("integration: {e}")),
    }
}

fn c7(out: &mut Outcome) {
    let flat = Params::from_principal(0.5, 0.6, 0.8, 0.3, [2.0, 1.0, 0.5], 1.0, 1.0).unwrap();
    let unit = |g: [f64; 3]| {
        let n = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
        g.map(|x| x / n)
    };
    let cases = [
        (flat.clone(), State::new([0.1, -0.2, 1.5], unit([0.05, 0.03, 1.0])).unwrap()),
        (flat.clone(), State::new([0.0, 0.4, -0.8], unit([-0.2, 0.1, 0.97])).unwrap()),
        (common::worked_example(), State::new([0.05, 0.0, 4.0], unit([0.02, -0.01, 1.0])).unwrap()),
    ];
    let cfg = IntegratorConfig::default();
    let mut worst = (0.0f64, 0.0f64);
    for (p, x) in &cases {
        match simulate::integrate(x, p, 50.0, &cfg) {
            Ok(tr) => worst = (worst.0.max(tr.h_drift), worst.1.max(tr.l_drift)),
            Err(e) => out.check(false, format!("integration: {e}")),
        }
    }
    out.note(format!("largest drift: H {:.1e}, G {:.1e}", worst.0, worst.1));
    out.check(worst.0 < 1e-8 && worst.1 < 1e-8, "H or G drift >= 1e-8");

    let x = State::new([0.0, 0.0, 0.7], [0.3f64.sin(), 0.3f64.cos(), 0.0]).unwrap();
    let res = simulate::manifold_residual(&flat, &x, 50.0, &cfg).unwrap_or(f64::INFINITY);
    out.note(format!("invariant-manifold residual {res:.1e}"));
    out.check(res <= 1e-9, format!("manifold residual {res:.2e}"));

    let probe = |w0: f64| simulate::spin_reversal_probe(&flat, w0, 0.02, 150.0, &cfg).map(|p| p.events.len());
    match (probe(0.3), probe(-0.3)) {
        (Ok(pos), Ok(neg)) => {
            out.note(format!("spin reversals: w0 > 0: {pos}, w0 < 0: {neg}"));
            out.check((pos == 0) != (neg == 0), "reversal not confined to one spin sign");
        }
        _ => out.check(false, "spin probe failed"),
    }
}

fn main() {
    let s = Duration::from_secs;
    let results = [
        criterion(1, "worked-example eigenvalues and verdict", s(1), c1),
        criterion(2, "structural identities over 100 random draws", s(5), c2),
        criterion(3, "variational oracle at 20 random points", s(60), c3),
        criterion(4, "monodromy suite over 10 random draws", s(30), c4),
        criterion(5, "invariant fixtures", s(10), c5),
        criterion(6, "rigid-body limit", s(60), c6),
        criterion(7, "conservation and dynamics", s(60), c7),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
