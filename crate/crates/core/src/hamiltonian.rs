//! Non-autonomous Hamiltonian systems on the phase space `(t, q, p)`.
//!
//! Bracket convention: `{f, g}_V = ∂^i f ∂_i g − ∂^i g ∂_i f` with
//! `∂^i = ∂/∂p_i`, so `{q1, p1}_V = −1`. The Hamiltonian vector field is
//! `ϑ_f = ∂^i f ∂_i − ∂_i f ∂^i`, hence `ϑ_f g = {f, g}_V` and
//! `[ϑ_f, ϑ_g] = ϑ_{{f,g}}`.

use std::borrow::Cow;
use std::sync::Arc;

use crate::dual::{seed1, seed_subset, Dual, Dual1};
use crate::error::{check_len, Error, Result};
use crate::expr::{BinOp, Expr};
use crate::field::{Frame, Params, ScalarField};
use crate::geometry::{
    ExtendedPhasePoint, JetPoint, PhasePoint, PhaseVector, ReferenceFrame, VectorFieldV,
};
use crate::lagrangian::{singular_hessian, LagrangianSystem};
use crate::linalg;
use crate::scalar::Scalar;

pub const LEGENDRE_MAX_ITERATIONS: usize = 50;
pub const LEGENDRE_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    n: usize,
    h: ScalarField,
}

impl HamiltonianSystem {
    /// `h` is re-targeted to the phase frame `(t, q, p)`.
    pub fn new(n: usize, h: ScalarField) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("at least one degree of freedom".into()));
        }
        let frame = Frame::phase(n);
        let h = if h.frame() == &frame { h } else { h.with_frame(frame)? };
        Ok(HamiltonianSystem { n, h })
    }

    pub fn parse(n: usize, text: &str, params: &Params) -> Result<Self> {
        HamiltonianSystem::new(n, ScalarField::parse(text, Frame::phase(n), params)?)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn hamiltonian(&self) -> &ScalarField {
        &self.h
    }

    /// `(∂^i ℋ, −∂_i ℋ)` stacked at phase coordinates.
    pub(crate) fn rhs(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let g = grad_at(&self.h, x)?.1;
        let mut out = Vec::with_capacity(2 * n);
        out.extend((0..n).map(|i| g[1 + n + i]));
        out.extend((0..n).map(|i| -g[1 + i]));
        Ok(out)
    }
}

fn on_phase(f: &ScalarField, n: usize) -> Result<Cow<'_, ScalarField>> {
    let frame = Frame::phase(n);
    if f.frame() == &frame {
        Ok(Cow::Borrowed(f))
    } else {
        Ok(Cow::Owned(f.with_frame(frame)?))
    }
}

/// Value and full gradient over any scalar.
fn grad_at<S: Scalar>(f: &ScalarField, x: &[S]) -> Result<(S, Vec<S>)> {
    let all: Vec<usize> = (0..x.len()).collect();
    let y: Dual<S> = f.eval(&seed_subset(x, &all))?;
    let g = (0..x.len()).map(|k| y.d(k)).collect();
    Ok((y.re, g))
}

/// `{f, g}_V` at phase coordinates over any scalar.
fn bracket_at<S: Scalar>(f: &ScalarField, g: &ScalarField, x: &[S], n: usize) -> Result<S> {
    let (_, gf) = grad_at(f, x)?;
    let (_, gg) = grad_at(g, x)?;
    Ok((0..n).fold(S::zero(), |acc, i| {
        acc + gf[1 + n + i].clone() * gg[1 + i].clone() - gg[1 + n + i].clone() * gf[1 + i].clone()
    }))
}

/// `(ϑ^i_f, ϑ_{f,i}) = (∂^i f, −∂_i f)` over any scalar.
fn vf_at<S: Scalar>(f: &ScalarField, x: &[S], n: usize) -> Result<(Vec<S>, Vec<S>)> {
    let (_, g) = grad_at(f, x)?;
    let up = (0..n).map(|i| g[1 + n + i].clone()).collect();
    let down = (0..n).map(|i| -g[1 + i].clone()).collect();
    Ok((up, down))
}

/// Hamilton equation `qdot = ∂^iℋ`, `pdot = −∂_iℋ`.
pub fn hamilton_rhs(sys: &HamiltonianSystem, at: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(sys.n, at.dim())?;
    let mut v = sys.rhs(&at.coords())?;
    let pdot = v.split_off(sys.n);
    Ok((v, pdot))
}

/// `{f, g}_V`. Fields on `(t, q)` are pulled back to the phase frame.
pub fn poisson_bracket_v(f: &ScalarField, g: &ScalarField, at: &PhasePoint) -> Result<f64> {
    let n = at.dim();
    let (f, g) = (on_phase(f, n)?, on_phase(g, n)?);
    bracket_at(&f, &g, &at.coords(), n)
}

/// Values of `ϑ_f`; the temporal component is zero.
pub fn hamiltonian_vf(f: &ScalarField, at: &PhasePoint) -> Result<PhaseVector> {
    let n = at.dim();
    let f = on_phase(f, n)?;
    let (up, down) = vf_at(&f, &at.coords(), n)?;
    Ok(PhaseVector { ut: 0.0, up, down })
}

/// `∂_tΦ + {ℋ, Φ}_V`.
pub fn iom_residual(sys: &HamiltonianSystem, phi: &ScalarField, at: &PhasePoint) -> Result<f64> {
    check_len(sys.n, at.dim())?;
    let phi = on_phase(phi, sys.n)?;
    let x = at.coords();
    let dt = grad_at(&phi, &x)?.1[0];
    Ok(dt + bracket_at(&sys.h, &phi, &x, sys.n)?)
}

/// `J = −p_iυⁱ + υᵗℋ + σ` from field values.
pub fn ham_symmetry_current_values(
    sys: &HamiltonianSystem,
    v: &PhaseVector,
    sigma: f64,
    at: &PhasePoint,
) -> Result<f64> {
    check_len(sys.n, at.dim())?;
    check_len(sys.n, v.up.len())?;
    let h = if v.ut != 0.0 { sys.h.eval_f64(&at.coords())? } else { 0.0 };
    let pv: f64 = at.p.iter().zip(&v.up).map(|(p, u)| p * u).sum();
    Ok(-pv + v.ut * h + sigma)
}

/// Hamiltonian symmetry current of `v` with `σ` on the phase frame.
pub fn ham_symmetry_current(
    sys: &HamiltonianSystem,
    v: &VectorFieldV,
    sigma: Option<&ScalarField>,
    at: &PhasePoint,
) -> Result<f64> {
    let vals = v.values(at)?;
    let s = match sigma {
        Some(s) => on_phase(s, sys.n)?.eval_f64(&at.coords())?,
        None => 0.0,
    };
    ham_symmetry_current_values(sys, &vals, s, at)
}

/// Values of the Hamiltonian connection `γ_H = ∂_t + ∂^iℋ∂_i − ∂_iℋ∂^i`
/// together with the `σ = p_i∂^iℋ − ℋ` for which it is a symmetry of the
/// characteristic Lagrangian `p_i qtⁱ − ℋ`.
pub fn hamiltonian_connection(sys: &HamiltonianSystem, at: &PhasePoint) -> Result<(PhaseVector, f64)> {
    let (qdot, pdot) = hamilton_rhs(sys, at)?;
    let h = sys.h.eval_f64(&at.coords())?;
    let sigma = at.p.iter().zip(&qdot).map(|(p, v)| p * v).sum::<f64>() - h;
    Ok((
        PhaseVector {
            ut: 1.0,
            up: qdot,
            down: pdot,
        },
        sigma,
    ))
}

/// `∂^iυ_i + ∂_iυⁱ`, which vanishes for every Hamiltonian symmetry.
pub fn symmetry_necessary_residual(v: &VectorFieldV, at: &PhasePoint) -> Result<f64> {
    let n = v.dim();
    check_len(n, at.dim())?;
    let (up, down) = v.eval_at::<Dual1>(&seed1(&at.coords()))?;
    Ok((0..n).map(|i| up[i].d(1 + i) + down[i].d(1 + n + i)).sum())
}

/// Field, `σ` and current produced from an integral of motion.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseNoether {
    /// Values of `−ϑ_Φ`.
    pub field: PhaseVector,
    pub sigma: f64,
    pub current: f64,
}

/// `υ = −ϑ_Φ`, `σ = Φ − p_i∂^iΦ` and the resulting current, which equals `Φ`.
pub fn inverse_noether(
    sys: &HamiltonianSystem,
    phi: &ScalarField,
    at: &PhasePoint,
) -> Result<InverseNoether> {
    check_len(sys.n, at.dim())?;
    let n = sys.n;
    let phi = on_phase(phi, n)?;
    let (value, g) = grad_at(&phi, &at.coords())?;
    let field = PhaseVector {
        ut: 0.0,
        up: (0..n).map(|i| -g[1 + n + i]).collect(),
        down: (0..n).map(|i| g[1 + i]).collect(),
    };
    let sigma = value - (0..n).map(|i| at.p[i] * g[1 + n + i]).sum::<f64>();
    let current = ham_symmetry_current_values(sys, &field, sigma, at)?;
    Ok(InverseNoether {
        field,
        sigma,
        current,
    })
}

/// `ℰ_Γ = ℋ − p_iΓⁱ`.
pub fn hamiltonian_function_relative(
    sys: &HamiltonianSystem,
    g: &ReferenceFrame,
    at: &PhasePoint,
) -> Result<f64> {
    check_len(sys.n, at.dim())?;
    check_len(sys.n, g.dim())?;
    let mut config = vec![at.t];
    config.extend_from_slice(&at.q);
    let gamma = g.eval_at(&config)?;
    let h = sys.h.eval_f64(&at.coords())?;
    Ok(h - at.p.iter().zip(&gamma).map(|(p, g)| p * g).sum::<f64>())
}

/// `ℋ* = p0 + ℋ`.
pub fn homogeneous_hamiltonian(sys: &HamiltonianSystem, at: &ExtendedPhasePoint) -> Result<f64> {
    check_len(sys.n, at.point.dim())?;
    Ok(at.p0 + sys.h.eval_f64(&at.point.coords())?)
}

/// `ℋ*` as a field on `(t, q, p0, p)`; needs an expression Hamiltonian.
pub fn homogeneous_hamiltonian_field(sys: &HamiltonianSystem) -> Result<ScalarField> {
    let h = sys.h.as_expr().ok_or_else(|| {
        Error::Config("the homogeneous Hamiltonian field needs an expression Hamiltonian".into())
    })?;
    ScalarField::from_expr(
        Expr::binary(BinOp::Add, Expr::var("p0"), h.clone()),
        Frame::extended(sys.n),
        sys.h.params(),
    )
}

/// Pull-back of a phase-space (or configuration) field to `(t, q, p0, p)`.
pub fn pull_back_extended(f: &ScalarField, n: usize) -> Result<ScalarField> {
    f.with_frame(Frame::extended(n))
}

/// `{f, g}_T = ∂^0f∂_tg − ∂^0g∂_tf + ∂^if∂_ig − ∂^ig∂_if`.
pub fn poisson_bracket_t(f: &ScalarField, g: &ScalarField, at: &ExtendedPhasePoint) -> Result<f64> {
    let n = at.point.dim();
    let frame = Frame::extended(n);
    let f = if f.frame() == &frame { Cow::Borrowed(f) } else { Cow::Owned(f.with_frame(frame.clone())?) };
    let g = if g.frame() == &frame { Cow::Borrowed(g) } else { Cow::Owned(g.with_frame(frame)?) };
    let x = at.coords();
    let (_, gf) = grad_at(&f, &x)?;
    let (_, gg) = grad_at(&g, &x)?;
    let p0 = 1 + n;
    let mut s = gf[p0] * gg[0] - gg[p0] * gf[0];
    for i in 0..n {
        s += gf[2 + n + i] * gg[1 + i] - gg[2 + n + i] * gf[1 + i];
    }
    Ok(s)
}

/// `{f,{g,h}} + {g,{h,f}} + {h,{f,g}}` by nested differentiation.
pub fn jacobi_residual(
    f: &ScalarField,
    g: &ScalarField,
    h: &ScalarField,
    at: &PhasePoint,
) -> Result<f64> {
    let n = at.dim();
    let (f, g, h) = (on_phase(f, n)?, on_phase(g, n)?, on_phase(h, n)?);
    let x = at.coords();
    let xd = seed1(&x);
    let term = |a: &ScalarField, b: &ScalarField, c: &ScalarField| -> Result<f64> {
        let inner: Dual1 = bracket_at(b, c, &xd, n)?;
        let (_, ga) = grad_at(a, &x)?;
        Ok((0..n)
            .map(|i| ga[1 + n + i] * inner.d(1 + i) - inner.d(1 + n + i) * ga[1 + i])
            .sum())
    };
    Ok(term(&f, &g, &h)? + term(&g, &h, &f)? + term(&h, &f, &g)?)
}

/// `‖[ϑ_f, ϑ_g] − ϑ_{{f,g}}‖∞`, the commutator taken from Jacobians of the
/// field components over `(q, p)`.
pub fn flow_commutator_residual(f: &ScalarField, g: &ScalarField, at: &PhasePoint) -> Result<f64> {
    let n = at.dim();
    let (f, g) = (on_phase(f, n)?, on_phase(g, n)?);
    let x = at.coords();
    let xd = seed1(&x);
    let stack = |(up, down): (Vec<Dual1>, Vec<Dual1>)| -> Vec<Dual1> {
        up.into_iter().chain(down).collect()
    };
    let vf = stack(vf_at(&f, &xd, n)?);
    let vg = stack(vf_at(&g, &xd, n)?);
    let fg: Dual1 = bracket_at(&f, &g, &xd, n)?;
    // components of ϑ_{{f,g}} in (q, p) order
    let target: Vec<f64> = (0..n)
        .map(|i| fg.d(1 + n + i))
        .chain((0..n).map(|i| -fg.d(1 + i)))
        .collect();
    let mut worst: f64 = 0.0;
    for a in 0..2 * n {
        let mut c = 0.0;
        for b in 0..2 * n {
            // coordinate b of (q, p) sits at frame index 1 + b
            c += vf[b].re * vg[a].d(1 + b) - vg[b].re * vf[a].d(1 + b);
        }
        worst = worst.max((c - target[a]).abs());
    }
    Ok(worst)
}

/// Result of the Newton inversion of the Legendre map.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreSolution {
    pub point: JetPoint,
    pub iterations: usize,
    pub residual: f64,
}

fn momentum_residual(pi: &[f64], p: &[f64]) -> f64 {
    pi.iter().zip(p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn newton_velocities(
    lsys: &LagrangianSystem,
    t: f64,
    q: &[f64],
    p: &[f64],
    guess: &[f64],
) -> Result<LegendreSolution> {
    let jet = |qt: &[f64]| {
        let mut v = vec![t];
        v.extend_from_slice(q);
        v.extend_from_slice(qt);
        v
    };
    let tol = LEGENDRE_TOLERANCE * p.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut qt = guess.to_vec();
    let (mut pi, mut hess) = lsys.momenta_and_hessian(&jet(&qt))?;
    let mut res = momentum_residual(&pi, p);
    let mut iterations = 0;
    while res > tol {
        if iterations == LEGENDRE_MAX_ITERATIONS {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        }
        if let Some(det) = singular_hessian(&hess, lsys.regularity_threshold()) {
            return Err(Error::SingularHessian { det });
        }
        let rhs: Vec<f64> = pi.iter().zip(p).map(|(a, b)| a - b).collect();
        let step = linalg::solve(&hess, &rhs).ok_or(Error::SingularHessian { det: 0.0 })?;
        iterations += 1;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = qt.iter().zip(&step).map(|(v, d)| v - lambda * d).collect();
            let (tpi, thess) = lsys.momenta_and_hessian(&jet(&trial))?;
            let tres = momentum_residual(&tpi, p);
            if tres < res || lambda < 1e-3 {
                qt = trial;
                pi = tpi;
                hess = thess;
                res = tres;
                break;
            }
            lambda *= 0.5;
        }
    }
    Ok(LegendreSolution {
        point: JetPoint::new(t, q.to_vec(), qt)?,
        iterations,
        residual: res,
    })
}

/// Solves `π(t, q, qt) = p` for `qt` by damped Newton iteration.
pub fn legendre_inverse_with_stats(
    lsys: &LagrangianSystem,
    at: &PhasePoint,
    guess: Option<&[f64]>,
) -> Result<LegendreSolution> {
    check_len(lsys.dim(), at.dim())?;
    let guess = guess.unwrap_or(&at.p);
    check_len(lsys.dim(), guess.len())?;
    newton_velocities(lsys, at.t, &at.q, &at.p, guess)
}

/// Velocity-space point whose momenta are `at.p`; the guess defaults to `p`.
pub fn legendre_inverse(
    lsys: &LagrangianSystem,
    at: &PhasePoint,
    guess: Option<&[f64]>,
) -> Result<JetPoint> {
    Ok(legendre_inverse_with_stats(lsys, at, guess)?.point)
}

/// `ℋ = p·qt* − ℒ(t, q, qt*)`, evaluated through the Legendre inversion.
pub fn associated_hamiltonian(lsys: &LagrangianSystem) -> HamiltonianSystem {
    let n = lsys.dim();
    HamiltonianSystem {
        n,
        h: ScalarField::legendre(Frame::phase(n), Arc::new(lsys.clone())),
    }
}

/// Newton steps taken over the generic scalar once the real solution is
/// known. Each step doubles the order of derivatives carried correctly, so
/// three steps cover up to seventh derivatives.
const DERIVATIVE_REFINEMENT_STEPS: usize = 3;

pub(crate) fn associated_eval<S: Scalar>(lsys: &LagrangianSystem, x: &[S]) -> Result<S> {
    let n = lsys.dim();
    check_len(1 + 2 * n, x.len())?;
    let xv: Vec<f64> = x.iter().map(|v| v.value()).collect();
    let sol = newton_velocities(lsys, xv[0], &xv[1..=n], &xv[1 + n..], &xv[1 + n..])?;
    let p = &x[1 + n..];
    let mut jet: Vec<S> = x[..=n].to_vec();
    jet.extend(sol.point.qt.iter().map(|&v| S::from_f64(v)));
    for _ in 0..DERIVATIVE_REFINEMENT_STEPS {
        let (pi, hess) = lsys.momenta_and_hessian(&jet)?;
        let rhs: Vec<S> = pi.into_iter().zip(p).map(|(a, b)| a - b.clone()).collect();
        let step = linalg::solve(&hess, &rhs).ok_or(Error::SingularHessian { det: 0.0 })?;
        for (i, d) in step.into_iter().enumerate() {
            jet[1 + n + i] = jet[1 + n + i].clone() - d;
        }
    }
    let l = lsys.eval_l(&jet)?;
    let pq = (0..n).fold(S::zero(), |acc, i| acc + p[i].clone() * jet[1 + n + i].clone());
    Ok(pq - l)
}
