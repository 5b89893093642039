//! First-order Lagrangian systems on the velocity space.
//!
//! All total time derivatives `d_t = ∂_t + qt^j ∂_j + qtt^j ∂^t_j` are
//! taken by seeding the jet coordinates with dual numbers; momenta and
//! their derivatives come from one nested (second-order) sweep.

use crate::dual::{seed1, seed2, seed_subset, Dual, Dual1, Dual2};
use crate::error::{check_len, Error, Result};
use crate::field::{Frame, Params, ScalarField};
use crate::geometry::{
    frame_difference, jet_prolong, Jet2Point, JetPoint, ReferenceFrame, TimeComponent,
    VectorFieldQ,
};
use crate::linalg;
use crate::scalar::Scalar;

/// Relative threshold on `|det π_ji|` below which the velocity Hessian is
/// treated as singular; scaled by `max(1, ‖π_ji‖∞)^n`.
pub const DEFAULT_REGULARITY_THRESHOLD: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct LagrangianSystem {
    n: usize,
    l: ScalarField,
    force: Option<Vec<ScalarField>>,
    regularity_threshold: f64,
}

/// Partial derivatives of `ℒ` at one jet point.
struct Partials {
    /// `∂_i ℒ`
    dq: Vec<f64>,
    /// `∂_t π_i`
    dt_pi: Vec<f64>,
    /// `∂_j π_i`, indexed `[i][j]`
    dq_pi: Vec<Vec<f64>>,
    /// `π_ij = ∂^t_j π_i`, indexed `[i][j]`
    hess: Vec<Vec<f64>>,
}

impl LagrangianSystem {
    /// `l` is re-targeted to the jet frame `(t, q, qt)`.
    pub fn new(n: usize, l: ScalarField) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("at least one degree of freedom".into()));
        }
        if l.as_expr().is_none() {
            return Err(Error::Config("a Lagrangian must be given as an expression".into()));
        }
        let frame = Frame::jet(n);
        let l = if l.frame() == &frame { l } else { l.with_frame(frame)? };
        Ok(LagrangianSystem {
            n,
            l,
            force: None,
            regularity_threshold: DEFAULT_REGULARITY_THRESHOLD,
        })
    }

    pub fn parse(n: usize, text: &str, params: &Params) -> Result<Self> {
        LagrangianSystem::new(n, ScalarField::parse(text, Frame::jet(n), params)?)
    }

    /// External force `f_i(t, q, qt)` entering the Lagrange equation.
    pub fn with_force(mut self, force: Vec<ScalarField>) -> Result<Self> {
        check_len(self.n, force.len())?;
        let frame = Frame::jet(self.n);
        let force = force
            .into_iter()
            .map(|f| if f.frame() == &frame { Ok(f) } else { f.with_frame(frame.clone()) })
            .collect::<Result<Vec<_>>>()?;
        self.force = Some(force);
        Ok(self)
    }

    pub fn with_regularity_threshold(mut self, threshold: f64) -> Self {
        self.regularity_threshold = threshold;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub(crate) fn regularity_threshold(&self) -> f64 {
        self.regularity_threshold
    }

    pub fn lagrangian(&self) -> &ScalarField {
        &self.l
    }

    pub fn force(&self) -> Option<&[ScalarField]> {
        self.force.as_deref()
    }

    pub fn params(&self) -> &Params {
        self.l.params()
    }

    /// `ℒ` at jet coordinates over any scalar.
    pub(crate) fn eval_l<S: Scalar>(&self, jet: &[S]) -> Result<S> {
        self.l.eval_expr(jet)
    }

    /// Momenta `π_i` and their velocity Jacobian `π_ij` at generic jet
    /// coordinates, from one nested sweep over the velocity slots.
    pub(crate) fn momenta_and_hessian<S: Scalar>(
        &self,
        jet: &[S],
    ) -> Result<(Vec<S>, Vec<Vec<S>>)> {
        let n = self.n;
        let slots: Vec<usize> = (1 + n..1 + 2 * n).collect();
        let inner: Vec<Dual<S>> = seed_subset(jet, &slots);
        let outer: Vec<Dual<Dual<S>>> = seed_subset(&inner, &slots);
        let y = self.eval_l(&outer)?;
        let pi = (0..n).map(|i| y.d(i).re).collect();
        let hess = (0..n)
            .map(|i| {
                let row = y.d(i);
                (0..n).map(|j| row.d(j)).collect()
            })
            .collect();
        Ok((pi, hess))
    }

    fn partials(&self, jet: &[f64]) -> Result<Partials> {
        let n = self.n;
        let y: Dual2 = self.eval_l(&seed2(jet))?;
        let v = |i: usize| 1 + n + i;
        Ok(Partials {
            dq: (0..n).map(|i| y.re.d(1 + i)).collect(),
            dt_pi: (0..n).map(|i| y.d(v(i)).d(0)).collect(),
            dq_pi: (0..n)
                .map(|i| (0..n).map(|j| y.d(v(i)).d(1 + j)).collect())
                .collect(),
            hess: (0..n)
                .map(|i| (0..n).map(|j| y.d(v(i)).d(v(j))).collect())
                .collect(),
        })
    }

    fn force_at(&self, jet: &[f64]) -> Result<Vec<f64>> {
        match &self.force {
            Some(fs) => fs.iter().map(|f| f.eval_f64(jet)).collect(),
            None => Ok(vec![0.0; self.n]),
        }
    }

    fn check_point(&self, n: usize) -> Result<()> {
        check_len(self.n, n)
    }
}

fn jet_coords(at: &Jet2Point) -> Vec<f64> {
    let mut v = vec![at.t];
    v.extend_from_slice(&at.q);
    v.extend_from_slice(&at.qt);
    v
}

/// `d_t` of a jet function whose first derivatives are carried by `y`.
fn total_derivative(y: &Dual1, at: &Jet2Point) -> f64 {
    let n = at.dim();
    let mut s = y.d(0);
    for j in 0..n {
        s += at.qt[j] * y.d(1 + j) + at.qtt[j] * y.d(1 + n + j);
    }
    s
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `π_i = ∂ℒ/∂qt^i`.
pub fn momenta(sys: &LagrangianSystem, at: &JetPoint) -> Result<Vec<f64>> {
    sys.check_point(at.dim())?;
    let y: Dual1 = sys.eval_l(&seed1(&at.coords()))?;
    Ok((0..sys.n).map(|i| y.d(1 + sys.n + i)).collect())
}

/// Lagrange operator `ε_i = ∂_iℒ − d_tπ_i + f_i`.
pub fn el_residual(sys: &LagrangianSystem, at: &Jet2Point) -> Result<Vec<f64>> {
    sys.check_point(at.dim())?;
    let jet = jet_coords(at);
    let d = sys.partials(&jet)?;
    let f = sys.force_at(&jet)?;
    Ok((0..sys.n)
        .map(|i| {
            let dt_pi = d.dt_pi[i] + dot(&at.qt, &d.dq_pi[i]) + dot(&at.qtt, &d.hess[i]);
            d.dq[i] - dt_pi + f[i]
        })
        .collect())
}

/// `det π_ij`.
pub fn regularity(sys: &LagrangianSystem, at: &JetPoint) -> Result<f64> {
    sys.check_point(at.dim())?;
    let (_, hess) = sys.momenta_and_hessian(&at.coords())?;
    Ok(linalg::det(&hess))
}

pub(crate) fn singular_hessian(hess: &[Vec<f64>], threshold: f64) -> Option<f64> {
    let d = linalg::det(hess);
    let scale = linalg::norm_inf(hess).max(1.0).powi(hess.len() as i32);
    (d.abs() < threshold * scale).then_some(d)
}

/// Accelerations solving the (forced) Lagrange equation at `at`.
pub fn lagrange_dynamics(sys: &LagrangianSystem, at: &JetPoint) -> Result<Vec<f64>> {
    sys.check_point(at.dim())?;
    let jet = at.coords();
    let d = sys.partials(&jet)?;
    if let Some(det) = singular_hessian(&d.hess, sys.regularity_threshold) {
        return Err(Error::SingularHessian { det });
    }
    let f = sys.force_at(&jet)?;
    let rhs: Vec<f64> = (0..sys.n)
        .map(|i| d.dq[i] - d.dt_pi[i] - dot(&at.qt, &d.dq_pi[i]) + f[i])
        .collect();
    linalg::solve(&d.hess, &rhs).ok_or(Error::SingularHessian { det: 0.0 })
}

/// `[υᵗ∂_t + υⁱ∂_i + d_tυⁱ ∂ᵗ_i] ℒ`.
pub fn lie_derivative_l(sys: &LagrangianSystem, v: &VectorFieldQ, at: &Jet2Point) -> Result<f64> {
    sys.check_point(at.dim())?;
    check_len(sys.n, v.dim())?;
    let n = sys.n;
    let pr = jet_prolong(v, at)?;
    let y: Dual1 = sys.eval_l(&seed1(&jet_coords(at)))?;
    let mut s = pr.ut * y.d(0);
    for i in 0..n {
        s += pr.u[i] * y.d(1 + i) + pr.dtu[i] * y.d(1 + n + i);
    }
    Ok(s)
}

/// `W = π_i(υⁱ − υᵗ qtⁱ) + υᵗ ℒ` as a first-order dual over the jet frame.
fn current_core(sys: &LagrangianSystem, v: &VectorFieldQ, jet: &[f64]) -> Result<Dual1> {
    let n = sys.n;
    let y: Dual2 = sys.eval_l(&seed2(jet))?;
    let x = seed1(jet);
    let u = v.eval_at(&x[..=n])?;
    let ut = v.ut().as_f64();
    let mut w = y.re.scale(ut);
    for i in 0..n {
        let rel = u[i].clone() - x[1 + n + i].scale(ut);
        w = w + y.d(1 + n + i) * rel;
    }
    Ok(w)
}

fn sigma_on_jet(sys: &LagrangianSystem, sigma: Option<&ScalarField>) -> Result<Option<ScalarField>> {
    let frame = Frame::jet(sys.n);
    sigma
        .map(|s| if s.frame() == &frame { Ok(s.clone()) } else { s.with_frame(frame) })
        .transpose()
}

/// `L_{J¹υ}ℒ − [(υⁱ − qtⁱυᵗ)ε_i + d_t(π_i(υⁱ − υᵗqtⁱ) + υᵗℒ)]`, which
/// vanishes identically. The force is excluded from `ε_i` here.
pub fn variational_identity_residual(
    sys: &LagrangianSystem,
    v: &VectorFieldQ,
    at: &Jet2Point,
) -> Result<f64> {
    sys.check_point(at.dim())?;
    check_len(sys.n, v.dim())?;
    let n = sys.n;
    let lhs = lie_derivative_l(sys, v, at)?;
    let jet = jet_coords(at);
    let d = sys.partials(&jet)?;
    let mut config = vec![at.t];
    config.extend_from_slice(&at.q);
    let u = v.eval_at(&config)?;
    let ut = v.ut().as_f64();
    let mut rhs = 0.0;
    for i in 0..n {
        let eps = d.dq[i] - d.dt_pi[i] - dot(&at.qt, &d.dq_pi[i]) - dot(&at.qtt, &d.hess[i]);
        rhs += (u[i] - at.qt[i] * ut) * eps;
    }
    rhs += total_derivative(&current_core(sys, v, &jet)?, at);
    Ok(lhs - rhs)
}

/// `L_{J¹υ}ℒ − d_tσ`; `σ = None` means an exact symmetry. `σ` lives on
/// `(t, q, qt)`.
pub fn symmetry_residual(
    sys: &LagrangianSystem,
    v: &VectorFieldQ,
    sigma: Option<&ScalarField>,
    at: &Jet2Point,
) -> Result<f64> {
    let lie = lie_derivative_l(sys, v, at)?;
    let dt_sigma = match sigma_on_jet(sys, sigma)? {
        Some(s) => {
            let y: Dual1 = s.eval(&seed1(&jet_coords(at)))?;
            total_derivative(&y, at)
        }
        None => 0.0,
    };
    Ok(lie - dt_sigma)
}

/// `d_t f` at a second-order jet point, for a field on `(t, q)` or `(t, q, qt)`.
pub fn total_time_derivative(f: &ScalarField, at: &Jet2Point) -> Result<f64> {
    let n = at.dim();
    let f = f.with_frame(Frame::jet(n))?;
    let y = f.eval_expr(&seed1(&jet_coords(at)))?;
    Ok(total_derivative(&y, at))
}

/// `J_υ = −(π_i(υⁱ − υᵗqtⁱ) + υᵗℒ − σ)`.
pub fn symmetry_current(
    sys: &LagrangianSystem,
    v: &VectorFieldQ,
    sigma: Option<&ScalarField>,
    at: &JetPoint,
) -> Result<f64> {
    sys.check_point(at.dim())?;
    check_len(sys.n, v.dim())?;
    let jet = at.coords();
    let w = current_core(sys, v, &jet)?.re;
    let s = match sigma_on_jet(sys, sigma)? {
        Some(s) => s.eval_f64(&jet)?,
        None => 0.0,
    };
    Ok(-(w - s))
}

/// `J_υ = −π_i υⁱ` for a vertical field.
pub fn noether_current(sys: &LagrangianSystem, v: &VectorFieldQ, at: &JetPoint) -> Result<f64> {
    if v.ut() != TimeComponent::Zero {
        return Err(Error::InvalidArgument(
            "Noether currents are defined for vertical fields (ut = 0)".into(),
        ));
    }
    symmetry_current(sys, v, None, at)
}

/// `E_Γ = π_i(qtⁱ − Γⁱ) − ℒ`.
pub fn energy_function(sys: &LagrangianSystem, g: &ReferenceFrame, at: &JetPoint) -> Result<f64> {
    sys.check_point(at.dim())?;
    check_len(sys.n, g.dim())?;
    let y: Dual1 = sys.eval_l(&seed1(&at.coords()))?;
    let rel = crate::geometry::relative_velocity(g, at)?;
    let n = sys.n;
    Ok((0..n).map(|i| y.d(1 + n + i) * rel[i]).sum::<f64>() - y.re)
}

/// `E_Γ − E_Γ' − J_{Γ−Γ'}`, identically zero.
pub fn frame_shift(
    sys: &LagrangianSystem,
    g1: &ReferenceFrame,
    g2: &ReferenceFrame,
    at: &JetPoint,
) -> Result<f64> {
    let e1 = energy_function(sys, g1, at)?;
    let e2 = energy_function(sys, g2, at)?;
    let j = noether_current(sys, &frame_difference(g1, g2)?, at)?;
    Ok(e1 - e2 - j)
}

/// Balance `d_tJ_υ + (υⁱ − qtⁱυᵗ) f_i` of a symmetry current along the
/// forced dynamics. Zero when `υ` is a symmetry of `ℒ` with `σ`; a nonzero
/// value reports how the force breaks conservation.
pub fn forced_current_balance(
    sys: &LagrangianSystem,
    v: &VectorFieldQ,
    sigma: Option<&ScalarField>,
    at: &JetPoint,
) -> Result<f64> {
    sys.check_point(at.dim())?;
    check_len(sys.n, v.dim())?;
    let n = sys.n;
    let qtt = lagrange_dynamics(sys, at)?;
    let at2 = at.with_acceleration(qtt)?;
    let jet = at.coords();
    let mut j = -current_core(sys, v, &jet)?;
    if let Some(s) = sigma_on_jet(sys, sigma)? {
        j = j + s.eval(&seed1(&jet))?;
    }
    let dt_j = total_derivative(&j, &at2);
    let f = sys.force_at(&jet)?;
    let mut config = vec![at.t];
    config.extend_from_slice(&at.q);
    let u = v.eval_at(&config)?;
    let ut = v.ut().as_f64();
    let work: f64 = (0..n).map(|i| (u[i] - at.qt[i] * ut) * f[i]).sum();
    Ok(dt_j + work)
}
