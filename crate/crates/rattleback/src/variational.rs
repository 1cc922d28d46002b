//! The complex orbit on the invariant manifold and the Fuchsian form of its
//! normal variational equations.
//!
//! Along the orbit `ω = (0, 0, p)`, `γ = ((p²−α²)/β, i(p²−α²)/β, 0)` the
//! contact point is constant, and after the time change
//! `dp = i(p²−α²)/2 dt` and the gauge `x = diag(p, p, p²−α²) y` the
//! variations `(ω1, ω2, γ3)` satisfy
//!
//! ```text
//! dy/dp = ( A/(p−α) + A/(p+α) + B/p ) y
//! ```
//!
//! with constant residue matrices `A`, `B` and `A∞ = −2A − B` at infinity.

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, cr, CMat3, CVec3, I};
use crate::model::{self, Inertia, Params, RigidBodyParams};

/// Reparametrized semi-axes: `b_i² = ρ_i σ` with `σ = ρ1 − ρ2 = √(b1² − b2²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rho {
    pub rho: [Complex64; 3],
    pub sigma: Complex64,
}

/// Principal branch of `√(b1² − b2²)`; imaginary when `b1 < b2`.
pub fn rho_from_b(b: &[f64; 3]) -> Result<Rho> {
    if b[0] == b[1] {
        return Err(Error::DegenerateEllipsoid);
    }
    let sigma = cr(b[0] * b[0] - b[1] * b[1]).sqrt();
    let rho = [cr(b[0] * b[0]) / sigma, cr(b[1] * b[1]) / sigma, cr(b[2] * b[2]) / sigma];
    Ok(Rho { rho, sigma })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitData {
    pub h: Complex64,
    pub alpha: Complex64,
    pub alpha2: Complex64,
    pub beta: Complex64,
    pub rho: [Complex64; 3],
    pub sigma: Complex64,
    pub r_const: [Complex64; 3],
    /// `m(b1² + b2²) + Σ33`, the effective moment about the vertical.
    pub k_eff: Complex64,
    pub m: f64,
    pub mg: f64,
}

fn check_h(h: Complex64) -> Result<()> {
    if h.norm() == 0.0 || !h.re.is_finite() || !h.im.is_finite() {
        return Err(Error::InvalidParameter("h must be non-zero and finite".into()));
    }
    Ok(())
}

fn orbit_from_rho(rho: Rho, k_eff: Complex64, m: f64, mg: f64, h: Complex64) -> OrbitData {
    let alpha2 = 2.0 * h / k_eff;
    let beta = -2.0 * mg * rho.sigma / k_eff;
    OrbitData {
        h,
        alpha: alpha2.sqrt(),
        alpha2,
        beta,
        rho: rho.rho,
        sigma: rho.sigma,
        r_const: [-rho.rho[0], -I * rho.rho[1], cr(0.0)],
        k_eff,
        m,
        mg,
    }
}

pub fn orbit(params: &Params, h: Complex64) -> Result<OrbitData> {
    check_h(h)?;
    let rho = rho_from_b(&params.b)?;
    let b = params.b;
    let k_eff = cr(params.m * (b[0] * b[0] + b[1] * b[1]) + params.inertia.s33);
    Ok(orbit_from_rho(rho, k_eff, params.m, params.m * params.g, h))
}

/// Orbit data of the heavy rigid body with `r = (r1, r2, 0)`, the `m → 0`
/// limit with the contact point replaced by the centre of mass.
pub fn orbit_rigid(rb: &RigidBodyParams, h: Complex64) -> Result<OrbitData> {
    check_h(h)?;
    if rb.r[2] != 0.0 {
        return Err(Error::InvalidParameter("the invariant manifold requires r3 = 0".into()));
    }
    let rho1 = cr(-rb.r[0]);
    let rho2 = I * rb.r[1];
    let sigma = rho1 - rho2;
    if sigma.norm() == 0.0 {
        return Err(Error::InvalidParameter("r1 + i r2 must be non-zero".into()));
    }
    let rho = Rho { rho: [rho1, rho2, cr(0.0)], sigma };
    Ok(orbit_from_rho(rho, cr(rb.i3), 0.0, rb.mg, h))
}

/// Complex phase point with the branch of `s` used on the orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexState {
    pub omega: CVec3,
    pub gamma: CVec3,
    pub s: Complex64,
}

impl OrbitData {
    fn check_regular(&self, p: Complex64) -> Result<()> {
        let scale = self.alpha.norm().max(1.0);
        if (p - self.alpha).norm() < 1e-14 * scale || (p + self.alpha).norm() < 1e-14 * scale {
            return Err(Error::Domain(format!("p = {p} is a singular point of the orbit")));
        }
        Ok(())
    }

    pub fn point(&self, p: Complex64) -> Result<ComplexState> {
        self.check_regular(p)?;
        let g1 = (p * p - self.alpha2) / self.beta;
        Ok(ComplexState {
            omega: CVec3::new(cr(0.0), cr(0.0), p),
            gamma: CVec3::new(g1, I * g1, cr(0.0)),
            s: self.sigma * g1,
        })
    }

    /// `dp/dt` along the orbit.
    pub fn time_change(&self, p: Complex64) -> Complex64 {
        0.5 * I * (p * p - self.alpha2)
    }
}

pub fn gamma_orbit(p: Complex64, h: Complex64, params: &Params) -> Result<ComplexState> {
    orbit(params, h)?.point(p)
}

/// Complexified vector field with the branch of `s` nearest `s_ref`.
pub fn complex_rhs(omega: &CVec3, gamma: &CVec3, s_ref: Complex64, params: &Params) -> Result<(CVec3, CVec3)> {
    let s = model::contact_s_branch(gamma, &params.b, s_ref);
    model::vector_field(omega, gamma, s, params)
}

/// Coefficients of the variational matrix along the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub a: [Complex64; 3],
    pub c: [Complex64; 4],
    pub theta_d: Complex64,
}

fn coefficients(inertia: &Inertia, orbit: &OrbitData) -> Result<Coefficients> {
    let Inertia { s11, s12, s22, s33 } = *inertia;
    let (s11, s12, s22, s33) = (cr(s11), cr(s12), cr(s22), cr(s33));
    let [r1, r2, r3] = orbit.rho;
    let m = cr(orbit.m);
    let mg = cr(orbit.mg);
    let beta = orbit.beta;
    let sigma = orbit.sigma;

    // horizontal block of U on the orbit
    let u11 = s11 - m * r2 * r2;
    let u12 = s12 - I * m * r1 * r2;
    let u22 = s22 + m * r1 * r1;
    let k = s33 + m * (r1 * r1 - r2 * r2);
    let dn = u11 * u22 - u12 * u12;
    if dn.norm() <= 1e-14 * (u11.norm() * u22.norm() + u12.norm_sqr()).max(f64::MIN_POSITIVE) {
        return Err(Error::Resonant);
    }

    let a1 = u12 * (u11 + u22 - k) / dn;
    let a2 = (u12 * u12 + u22 * (u22 - k)) / dn;
    let a3 = -(u12 * u12 + u11 * (u11 - k)) / dn;

    let mb3 = m * beta * r3;
    let c2 = -mb3 * (s12 * r1 + I * s22 * r2) / dn;
    let c4 = mb3 * (s11 * r1 + I * s12 * r2) / dn;
    let c1 = (mg * (s12 * (r3 - r1) + I * s22 * (r3 - r2)) + 0.5 * mb3 * (s12 * r2 + I * r1 * (s22 - s33))
        - mb3 * (s12 * r1 + I * s22 * r2))
        / dn;
    let c3 = (mg * (s11 * (r1 - r3) + I * s12 * (r2 - r3) - m * sigma * r2 * r3)
        - 0.5 * mb3 * (s11 * r2 + I * s12 * r1 + m * r2 * (r1 * r1 - r2 * r2))
        + mb3 * (s11 * r1 + I * s12 * r2))
        / dn;
    Ok(Coefficients { a: [a1, a2, a3], c: [c1, c2, c3, c4], theta_d: dn })
}

/// `θ1` and `θ0` in closed form.
fn theta_closed_form(inertia: &Inertia, orbit: &OrbitData, theta_d: Complex64) -> (Complex64, Complex64) {
    let Inertia { s11, s12, s22, s33 } = *inertia;
    let [r1, r2, r3] = orbit.rho;
    let m = cr(orbit.m);
    let kk = cr(s11 + s22 - s33);
    // Ψ = [[s11 − kk, s12], [s12, s22 − kk]], v = (−ρ1, −iρ2)
    let (p11, p12, p22) = (cr(s11) - kk, cr(s12), cr(s22) - kk);
    let (v1, v2) = (-r1, -I * r2);
    let delta = p11 * p22 - p12 * p12 + m * (p11 * v1 * v1 + 2.0 * p12 * v1 * v2 + p22 * v2 * v2);
    let t1 = -delta + m * r3 * (s11 * r1 - s22 * r2 + I * s12 * (r1 + r2));
    let t0 = t1 - m * r3 * orbit.sigma * kk;
    (t1 / theta_d, t0 / theta_d)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FuchsianData {
    pub orbit: OrbitData,
    pub coefficients: Coefficients,
    #[serde(serialize_with = "linalg::ser_mat3")]
    pub a: CMat3,
    #[serde(serialize_with = "linalg::ser_mat3")]
    pub b: CMat3,
    #[serde(serialize_with = "linalg::ser_mat3")]
    pub a_inf: CMat3,
    pub theta0: Complex64,
    pub theta1: Complex64,
    pub chi0: Complex64,
    pub chi1: Complex64,
    pub lambda: [Complex64; 3],
}

fn assemble(inertia: &Inertia, orbit: OrbitData) -> Result<FuchsianData> {
    let co = coefficients(inertia, &orbit)?;
    let [a1, a2, a3] = co.a;
    let [c1, c2, c3, c4] = co.c;
    let beta = orbit.beta;
    let a = CMat3::new(-I * a1, -I * a2, -I * c2, -I * a3, I * a1, -I * c4, -1.0 / beta, -I / beta, cr(-1.0));
    let b = CMat3::new(
        cr(-1.0),
        cr(0.0),
        -2.0 * I * (c1 - c2),
        cr(0.0),
        cr(-1.0),
        -2.0 * I * (c3 - c4),
        cr(0.0),
        cr(0.0),
        cr(0.0),
    );
    let a_inf = -a * cr(2.0) - b;
    let (theta1, theta0) = theta_closed_form(inertia, &orbit, co.theta_d);
    let inf = linalg::char_poly(&a_inf);
    let lambda = linalg::cubic_roots(cr(1.0), theta1, theta0);
    Ok(FuchsianData { orbit, coefficients: co, a, b, a_inf, theta0, theta1, chi0: inf[2], chi1: inf[1], lambda })
}

/// Residue matrices and characteristic data at energy `h`.
pub fn residues(params: &Params, h: Complex64) -> Result<FuchsianData> {
    assemble(&params.inertia, orbit(params, h)?)
}

pub fn residues_rigid(rb: &RigidBodyParams, h: Complex64) -> Result<FuchsianData> {
    rb.validate()?;
    assemble(&rb.inertia(), orbit_rigid(rb, h)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicData {
    pub theta0: Complex64,
    pub theta1: Complex64,
    pub chi0: Complex64,
    pub chi1: Complex64,
    pub lambda: [Complex64; 3],
}

pub fn characteristic_data(fd: &FuchsianData) -> CharacteristicData {
    CharacteristicData { theta0: fd.theta0, theta1: fd.theta1, chi0: fd.chi0, chi1: fd.chi1, lambda: fd.lambda }
}

pub const CONDITION_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", content = "reason", rename_all = "kebab-case")]
pub enum ConditionVerdict {
    Satisfied,
    Fails(String),
}

impl ConditionVerdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, ConditionVerdict::Satisfied)
    }
}

/// All exponents non-real with pairwise distinct imaginary parts.
pub fn condition_check(lambda: &[Complex64; 3], margin: f64) -> ConditionVerdict {
    for (k, l) in lambda.iter().enumerate() {
        if l.im.abs() <= margin {
            return ConditionVerdict::Fails(format!("lambda{} = {} is real", k + 1, l));
        }
    }
    for i in 0..3 {
        for j in i + 1..3 {
            if (lambda[i].im - lambda[j].im).abs() <= margin {
                return ConditionVerdict::Fails(format!(
                    "lambda{} and lambda{} have equal imaginary parts",
                    i + 1,
                    j + 1
                ));
            }
        }
    }
    ConditionVerdict::Satisfied
}

impl FuchsianData {
    fn check_pole(&self, p: Complex64) -> Result<()> {
        let scale = self.orbit.alpha.norm().max(1.0) * 1e-14;
        let alpha = self.orbit.alpha;
        if (p - alpha).norm() < scale || (p + alpha).norm() < scale || p.norm() < scale {
            return Err(Error::Domain(format!("p = {p} is a pole of the Fuchsian system")));
        }
        Ok(())
    }

    /// Coefficient matrix of the Fuchsian system.
    pub fn rhs(&self, p: Complex64) -> Result<CMat3> {
        self.check_pole(p)?;
        Ok(self.rhs_unchecked(p))
    }

    #[inline]
    pub(crate) fn rhs_unchecked(&self, p: Complex64) -> CMat3 {
        let alpha = self.orbit.alpha;
        let w = 1.0 / (p - alpha) + 1.0 / (p + alpha);
        self.a * w + self.b / p
    }

    /// Jacobian block over `(ω1, ω2, γ3)` in the original time along the orbit.
    pub fn variational_matrix(&self, p: Complex64) -> Result<CMat3> {
        self.check_pole(p)?;
        let o = &self.orbit;
        let [a1, a2, a3] = self.coefficients.a;
        let [c1, c2, c3, c4] = self.coefficients.c;
        let q = p * p - o.alpha2;
        let frac = o.alpha2 / q;
        Ok(CMat3::new(
            a1 * p,
            a2 * p,
            c1 + c2 * frac,
            a3 * p,
            -a1 * p,
            c3 + c4 * frac,
            -I * q / o.beta,
            q / o.beta,
            cr(0.0),
        ))
    }

    /// `D⁻¹ (M_p D − D′)` with `D = diag(p, p, p²−α²)` and `M_p` the block
    /// in the time `p`.
    pub fn gauge_transformed(&self, p: Complex64) -> Result<CMat3> {
        let mt = self.variational_matrix(p)?;
        let q = p * p - self.orbit.alpha2;
        let mp = mt / self.orbit.time_change(p);
        let d = Vector3::new(p, p, q);
        let dprime = Vector3::new(cr(1.0), cr(1.0), 2.0 * p);
        Ok(CMat3::from_fn(|i, j| {
            let mut v = mp[(i, j)] * d[j] / d[i];
            if i == j {
                v -= dprime[i] / d[i];
            }
            v
        }))
    }
}

pub fn fuchsian_rhs(fd: &FuchsianData, p: Complex64) -> Result<CMat3> {
    fd.rhs(p)
}

/// Spectrum of the rigid-body residue `A` in closed form.
pub fn rigid_spectrum(inertia: &Inertia) -> [Complex64; 3] {
    let Inertia { s11, s22, s33, .. } = *inertia;
    let r = cr((s11 - s33) * (s22 - s33) / (s11 * s22)).sqrt();
    [cr(-1.0), -r, r]
}

/// Convenience for building a complex number from a pair.
pub fn complex_pair(v: [f64; 2]) -> Complex64 {
    c(v[0], v[1])
}
