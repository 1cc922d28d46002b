//! Rattleback geometry, equations of motion and first integrals.
//!
//! The body is an ellipsoid with semi-axes `b` rolling without slipping on a
//! horizontal plane. The phase point is the angular velocity `omega` and the
//! upward unit normal `gamma`, both in body coordinates. The centre of mass
//! sits at the geometric centre, and the inertia tensor is rotated by an angle
//! about the third axis relative to the geometric axes.

use nalgebra::{ComplexField, Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalars the vector field can be evaluated over: `f64` for the mechanical
/// problem and `Complex64` for the complexified one.
pub trait Scalar: ComplexField<RealField = f64> + Copy {}
impl<T: ComplexField<RealField = f64> + Copy> Scalar for T {}

/// Inertia tensor `Θ = [[s11, s12, 0], [s12, s22, 0], [0, 0, s33]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Inertia {
    pub s11: f64,
    pub s12: f64,
    pub s22: f64,
    pub s33: f64,
}

/// Principal moments and the angle between principal and geometric axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Principal {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub delta: f64,
}

impl Inertia {
    pub fn matrix<T: Scalar>(&self) -> Matrix3<T> {
        let c = |x: f64| T::from_real(x);
        Matrix3::new(
            c(self.s11),
            c(self.s12),
            T::zero(),
            c(self.s12),
            c(self.s22),
            T::zero(),
            T::zero(),
            T::zero(),
            c(self.s33),
        )
    }
}

/// Rotates `diag(I1, I2)` by `delta` about the third axis.
pub fn sigma_from_principal(i1: f64, i2: f64, i3: f64, delta: f64) -> Result<Inertia> {
    for (name, v) in [("I1", i1), ("I2", i2), ("I3", i3)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    if !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be finite, got {delta}")));
    }
    let (s, c) = delta.sin_cos();
    Ok(Inertia { s11: i1 * c * c + i2 * s * s, s12: (i1 - i2) * c * s, s22: i1 * s * s + i2 * c * c, s33: i3 })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub inertia: Inertia,
    pub b: [f64; 3],
    pub m: f64,
    pub g: f64,
    /// Set when the inertia was built from principal moments.
    pub principal: Option<Principal>,
}

impl Params {
    pub fn new(inertia: Inertia, b: [f64; 3], m: f64, g: f64) -> Result<Self> {
        let p = Params { inertia, b, m, g, principal: None };
        p.validate()?;
        Ok(p)
    }

    pub fn from_principal(i1: f64, i2: f64, i3: f64, delta: f64, b: [f64; 3], m: f64, g: f64) -> Result<Self> {
        let inertia = sigma_from_principal(i1, i2, i3, delta)?;
        let mut p = Params::new(inertia, b, m, g)?;
        p.principal = Some(Principal { i1, i2, i3, delta });
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        let Inertia { s11, s12, s22, s33 } = self.inertia;
        let all = [s11, s12, s22, s33, self.b[0], self.b[1], self.b[2], self.m, self.g];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite value".into()));
        }
        if s11 <= 0.0 || s22 <= 0.0 || s33 <= 0.0 {
            return Err(Error::InvalidParameter("diagonal inertia entries must be positive".into()));
        }
        if self.b.iter().any(|&b| b <= 0.0) {
            return Err(Error::InvalidParameter("semi-axes must be positive".into()));
        }
        if self.m < 0.0 || self.g < 0.0 {
            return Err(Error::InvalidParameter("mass and gravity must be non-negative".into()));
        }
        Ok(())
    }

    /// Violations of the nondegeneracy conditions under which the
    /// non-integrability argument applies. Empty means all hold.
    pub fn condition_violations(&self) -> Vec<String> {
        let Inertia { s11, s12, s22, s33 } = self.inertia;
        let mut out = Vec::new();
        if s12 == 0.0 {
            out.push("Sigma12 = 0: inertia axes aligned with the ellipsoid axes".to_string());
        }
        if s33 >= s11 + s22 {
            out.push("Sigma33 >= Sigma11 + Sigma22".to_string());
        }
        if s11 * s22 - s12 * s12 <= 0.0 {
            out.push("horizontal inertia block is not positive definite".to_string());
        }
        if self.b[0] == self.b[1] {
            out.push("b1 = b2".to_string());
        }
        if self.m <= 0.0 {
            out.push("m must be positive".to_string());
        }
        if self.g <= 0.0 {
            out.push("g must be positive".to_string());
        }
        out
    }

    /// Non-fatal remarks about sign conventions.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.b[0] < self.b[1] {
            out.push("b1 < b2: sigma = i*sqrt(b2^2 - b1^2) is used".to_string());
        }
        if self.inertia.s12 < 0.0 {
            out.push("Sigma12 < 0: mirror image of a body with Sigma12 > 0".to_string());
        }
        if self.inertia.s12 == 0.0 {
            out.push("Sigma12 = 0: symmetric configuration".to_string());
        }
        out
    }

    /// Strict mechanical conditions: positive inertia entries, b1 > b2 > 0.
    pub fn is_mechanical(&self) -> bool {
        let Inertia { s11, s12, s22, s33 } = self.inertia;
        s12 > 0.0 && s33 < s11 + s22 && self.b[0] > self.b[1] && self.b[1] > 0.0 && self.m > 0.0 && self.g > 0.0
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsJson {
    #[serde(rename = "I1", default, skip_serializing_if = "Option::is_none")]
    i1: Option<f64>,
    #[serde(rename = "I2", default, skip_serializing_if = "Option::is_none")]
    i2: Option<f64>,
    #[serde(rename = "I3", default, skip_serializing_if = "Option::is_none")]
    i3: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(rename = "Sigma", default, skip_serializing_if = "Option::is_none")]
    sigma: Option<[[f64; 2]; 2]>,
    #[serde(rename = "Sigma33", default, skip_serializing_if = "Option::is_none")]
    sigma33: Option<f64>,
    b: [f64; 3],
    m: f64,
    g: f64,
}

impl TryFrom<ParamsJson> for Params {
    type Error = Error;

    fn try_from(j: ParamsJson) -> Result<Self> {
        let principal = [j.i1, j.i2, j.i3, j.delta];
        let has_principal = principal.iter().any(Option::is_some);
        let has_sigma = j.sigma.is_some() || j.sigma33.is_some();
        match (has_principal, has_sigma) {
            (true, false) => {
                let [Some(i1), Some(i2), Some(i3)] = [j.i1, j.i2, j.i3] else {
                    return Err(Error::InvalidParameter("I1, I2 and I3 are all required".into()));
                };
                Params::from_principal(i1, i2, i3, j.delta.unwrap_or(0.0), j.b, j.m, j.g)
            }
            (false, true) => {
                let (Some(s), Some(s33)) = (j.sigma, j.sigma33) else {
                    return Err(Error::InvalidParameter("Sigma and Sigma33 are both required".into()));
                };
                if s[0][1] != s[1][0] {
                    return Err(Error::InvalidParameter("Sigma must be symmetric".into()));
                }
                let inertia = Inertia { s11: s[0][0], s12: s[0][1], s22: s[1][1], s33 };
                Params::new(inertia, j.b, j.m, j.g)
            }
            (true, true) => Err(Error::InvalidParameter("give either principal moments or Sigma, not both".into())),
            (false, false) => Err(Error::InvalidParameter("missing inertia".into())),
        }
    }
}

impl From<&Params> for ParamsJson {
    fn from(p: &Params) -> Self {
        let base = ParamsJson {
            i1: None,
            i2: None,
            i3: None,
            delta: None,
            sigma: None,
            sigma33: None,
            b: p.b,
            m: p.m,
            g: p.g,
        };
        match p.principal {
            Some(pr) => ParamsJson { i1: Some(pr.i1), i2: Some(pr.i2), i3: Some(pr.i3), delta: Some(pr.delta), ..base },
            None => {
                let i = p.inertia;
                ParamsJson { sigma: Some([[i.s11, i.s12], [i.s12, i.s22]]), sigma33: Some(i.s33), ..base }
            }
        }
    }
}

impl Serialize for Params {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Params {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ParamsJson::deserialize(d)?;
        Params::try_from(raw).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub omega: Vector3<f64>,
    pub gamma: Vector3<f64>,
}

impl State {
    pub fn new(omega: [f64; 3], gamma: [f64; 3]) -> Result<Self> {
        let gamma = Vector3::from(gamma);
        if gamma.norm_squared() == 0.0 {
            return Err(Error::InvalidParameter("gamma must be non-zero".into()));
        }
        Ok(State { omega: Vector3::from(omega), gamma })
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.omega[0], self.omega[1], self.omega[2], self.gamma[0], self.gamma[1], self.gamma[2]]
    }

    pub fn from_slice(y: &[f64]) -> Self {
        State { omega: Vector3::new(y[0], y[1], y[2]), gamma: Vector3::new(y[3], y[4], y[5]) }
    }
}

/// Derivative of a [`State`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRate {
    pub omega_dot: Vector3<f64>,
    pub gamma_dot: Vector3<f64>,
}

fn b_squared<T: Scalar>(b: &[f64; 3]) -> Vector3<T> {
    Vector3::new(T::from_real(b[0] * b[0]), T::from_real(b[1] * b[1]), T::from_real(b[2] * b[2]))
}

/// `s² = Σ b_i² γ_i²`.
pub fn contact_s_squared<T: Scalar>(gamma: &Vector3<T>, b: &[f64; 3]) -> T {
    let b2 = b_squared::<T>(b);
    b2[0] * gamma[0] * gamma[0] + b2[1] * gamma[1] * gamma[1] + b2[2] * gamma[2] * gamma[2]
}

/// Square root of `s²` on the branch closest to `reference`.
pub fn contact_s_branch(gamma: &Vector3<Complex64>, b: &[f64; 3], reference: Complex64) -> Complex64 {
    let s = contact_s_squared(gamma, b).sqrt();
    if (s - reference).norm() <= (-s - reference).norm() {
        s
    } else {
        -s
    }
}

fn real_s(gamma: &Vector3<f64>, b: &[f64; 3]) -> Result<f64> {
    let s2 = contact_s_squared(gamma, b);
    if s2 <= 0.0 {
        return Err(Error::SingularContact([gamma[0], gamma[1], gamma[2]]));
    }
    Ok(s2.sqrt())
}

fn check_s<T: Scalar>(s: T, gamma: &Vector3<T>) -> Result<()> {
    if s.modulus() == 0.0 {
        let g = gamma.map(|x| x.modulus());
        return Err(Error::SingularContact([g[0], g[1], g[2]]));
    }
    Ok(())
}

/// Contact point `r_i = -b_i² γ_i / s` for a given branch of `s`.
pub fn contact_point_with<T: Scalar>(gamma: &Vector3<T>, b: &[f64; 3], s: T) -> Result<Vector3<T>> {
    check_s(s, gamma)?;
    let b2 = b_squared::<T>(b);
    Ok(Vector3::new(-b2[0] * gamma[0] / s, -b2[1] * gamma[1] / s, -b2[2] * gamma[2] / s))
}

/// Contact point for a real normal, positive branch of `s`.
pub fn contact_point(gamma: &Vector3<f64>, b: &[f64; 3]) -> Result<Vector3<f64>> {
    contact_point_with(gamma, b, real_s(gamma, b)?)
}

/// `∂R/∂γ` for a given branch of `s`.
pub fn contact_jacobian_with<T: Scalar>(gamma: &Vector3<T>, b: &[f64; 3], s: T) -> Result<Matrix3<T>> {
    check_s(s, gamma)?;
    let b2 = b_squared::<T>(b);
    let w = Vector3::new(b2[0] * gamma[0], b2[1] * gamma[1], b2[2] * gamma[2]);
    let s3 = s * s * s;
    Ok(Matrix3::from_fn(|i, j| {
        let diag = if i == j { -b2[i] / s } else { T::zero() };
        diag + w[i] * w[j] / s3
    }))
}

pub fn contact_jacobian(gamma: &Vector3<f64>, b: &[f64; 3]) -> Result<Matrix3<f64>> {
    contact_jacobian_with(gamma, b, real_s(gamma, b)?)
}

/// `U = Θ + m(⟨r,r⟩ Id − r rᵀ)`.
pub fn mass_operator<T: Scalar>(r: &Vector3<T>, inertia: &Inertia, m: f64) -> Matrix3<T> {
    let m = T::from_real(m);
    inertia.matrix::<T>() + (Matrix3::identity() * r.dot(r) - r * r.transpose()) * m
}

fn solve_mass<T: Scalar>(u: Matrix3<T>, rhs: &Vector3<T>) -> Result<Vector3<T>> {
    let det = u.determinant().modulus();
    let scale = u.norm();
    let threshold = 1e-12 * scale * scale * scale;
    if !(det >= threshold) {
        return Err(Error::DegenerateMass { det, threshold });
    }
    u.lu().solve(rhs).ok_or(Error::DegenerateMass { det, threshold })
}

/// Nonholonomic vector field for an explicit branch of `s`.
pub fn vector_field<T: Scalar>(
    omega: &Vector3<T>,
    gamma: &Vector3<T>,
    s: T,
    params: &Params,
) -> Result<(Vector3<T>, Vector3<T>)> {
    let r = contact_point_with(gamma, &params.b, s)?;
    let jac = contact_jacobian_with(gamma, &params.b, s)?;
    let theta = params.inertia.matrix::<T>();
    let m = T::from_real(params.m);
    let mg = T::from_real(params.m * params.g);

    let gamma_dot = gamma.cross(omega);
    let r_dot = jac * gamma_dot;
    let torque = -omega.cross(&(theta * omega)) - r.cross(&omega.cross(&omega.cross(&r))) * m + r.cross(gamma) * mg
        - r.cross(&omega.cross(&r_dot)) * m;
    let omega_dot = solve_mass(mass_operator(&r, &params.inertia, params.m), &torque)?;
    Ok((omega_dot, gamma_dot))
}

pub fn rhs(state: &State, params: &Params) -> Result<StateRate> {
    let s = real_s(&state.gamma, &params.b)?;
    let (omega_dot, gamma_dot) = vector_field(&state.omega, &state.gamma, s, params)?;
    Ok(StateRate { omega_dot, gamma_dot })
}

/// Energy for an explicit branch of `s`.
pub fn energy_with<T: Scalar>(omega: &Vector3<T>, gamma: &Vector3<T>, s: T, params: &Params) -> Result<T> {
    let r = contact_point_with(gamma, &params.b, s)?;
    let theta = params.inertia.matrix::<T>();
    let half = T::from_real(0.5);
    let wr = omega.cross(&r);
    Ok(half * T::from_real(params.m) * wr.dot(&wr) + half * omega.dot(&(theta * omega))
        - T::from_real(params.m * params.g) * r.dot(gamma))
}

pub fn energy(state: &State, params: &Params) -> Result<f64> {
    energy_with(&state.omega, &state.gamma, real_s(&state.gamma, &params.b)?, params)
}

pub fn geometric(state: &State) -> f64 {
    state.gamma.norm_squared()
}

/// Heavy rigid body with a fixed point, diagonal inertia.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidBodyParams {
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
    #[serde(rename = "I3")]
    pub i3: f64,
    /// Centre of mass relative to the fixed point.
    pub r: [f64; 3],
    pub mg: f64,
}

impl RigidBodyParams {
    pub fn new(i1: f64, i2: f64, i3: f64, r: [f64; 3], mg: f64) -> Result<Self> {
        let rb = RigidBodyParams { i1, i2, i3, r, mg };
        rb.validate()?;
        Ok(rb)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.i1, self.i2, self.i3].iter().any(|&v| !(v.is_finite() && v > 0.0)) {
            return Err(Error::InvalidParameter("principal moments must be positive".into()));
        }
        if self.r.iter().chain([self.mg].iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite value".into()));
        }
        Ok(())
    }

    pub fn inertia(&self) -> Inertia {
        Inertia { s11: self.i1, s12: 0.0, s22: self.i2, s33: self.i3 }
    }
}

/// Euler–Poisson equations.
pub fn rigid_body_rhs(state: &State, rb: &RigidBodyParams) -> StateRate {
    let theta = Vector3::new(rb.i1, rb.i2, rb.i3);
    let r = Vector3::from(rb.r);
    let (w, g) = (&state.omega, &state.gamma);
    let torque = -w.cross(&theta.component_mul(w)) + r.cross(g) * rb.mg;
    StateRate { omega_dot: torque.component_div(&theta), gamma_dot: g.cross(w) }
}

pub fn rigid_body_energy(state: &State, rb: &RigidBodyParams) -> f64 {
    let theta = Vector3::new(rb.i1, rb.i2, rb.i3);
    0.5 * state.omega.dot(&theta.component_mul(&state.omega)) - rb.mg * Vector3::from(rb.r).dot(&state.gamma)
}

/// `L = I1 γ1 ω1 + I2 γ2 ω2 + I3 γ3 ω3`.
pub fn rigid_body_integral(state: &State, rb: &RigidBodyParams) -> f64 {
    let (w, g) = (&state.omega, &state.gamma);
    rb.i1 * g[0] * w[0] + rb.i2 * g[1] * w[1] + rb.i3 * g[2] * w[2]
}
