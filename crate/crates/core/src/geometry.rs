//! Points of the velocity and phase spaces, vector fields on the
//! configuration bundle and the phase space, and reference frames.

use serde::{Deserialize, Serialize};

use crate::dual::{seed1, seed_subset, Dual, Dual1};
use crate::error::{check_len, Error, Result};
use crate::field::{Frame, ScalarField};
use crate::scalar::Scalar;

/// `(t, q, qt)` on the velocity space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetPoint {
    pub t: f64,
    pub q: Vec<f64>,
    pub qt: Vec<f64>,
}

impl JetPoint {
    pub fn new(t: f64, q: Vec<f64>, qt: Vec<f64>) -> Result<Self> {
        check_len(q.len(), qt.len())?;
        if q.is_empty() {
            return Err(Error::InvalidArgument("at least one degree of freedom".into()));
        }
        Ok(JetPoint { t, q, qt })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Coordinates in [`Frame::jet`] order.
    pub fn coords(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + 2 * self.dim());
        v.push(self.t);
        v.extend_from_slice(&self.q);
        v.extend_from_slice(&self.qt);
        v
    }

    pub fn from_coords(n: usize, x: &[f64]) -> Result<Self> {
        check_len(1 + 2 * n, x.len())?;
        JetPoint::new(x[0], x[1..=n].to_vec(), x[n + 1..].to_vec())
    }

    pub fn with_acceleration(&self, qtt: Vec<f64>) -> Result<Jet2Point> {
        Jet2Point::new(self.t, self.q.clone(), self.qt.clone(), qtt)
    }
}

/// `(t, q, qt, qtt)` on the second jet space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet2Point {
    pub t: f64,
    pub q: Vec<f64>,
    pub qt: Vec<f64>,
    pub qtt: Vec<f64>,
}

impl Jet2Point {
    pub fn new(t: f64, q: Vec<f64>, qt: Vec<f64>, qtt: Vec<f64>) -> Result<Self> {
        check_len(q.len(), qt.len())?;
        check_len(q.len(), qtt.len())?;
        if q.is_empty() {
            return Err(Error::InvalidArgument("at least one degree of freedom".into()));
        }
        Ok(Jet2Point { t, q, qt, qtt })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn jet(&self) -> JetPoint {
        JetPoint {
            t: self.t,
            q: self.q.clone(),
            qt: self.qt.clone(),
        }
    }
}

/// `(t, q, p)` on the phase space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhasePoint {
    pub fn new(t: f64, q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        check_len(q.len(), p.len())?;
        if q.is_empty() {
            return Err(Error::InvalidArgument("at least one degree of freedom".into()));
        }
        Ok(PhasePoint { t, q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Coordinates in [`Frame::phase`] order.
    pub fn coords(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(1 + 2 * self.dim());
        v.push(self.t);
        v.extend_from_slice(&self.q);
        v.extend_from_slice(&self.p);
        v
    }

    pub fn from_coords(n: usize, x: &[f64]) -> Result<Self> {
        check_len(1 + 2 * n, x.len())?;
        PhasePoint::new(x[0], x[1..=n].to_vec(), x[n + 1..].to_vec())
    }
}

/// `(t, q, p0, p)` on the homogeneous phase space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendedPhasePoint {
    pub point: PhasePoint,
    pub p0: f64,
}

impl ExtendedPhasePoint {
    /// Coordinates in [`Frame::extended`] order.
    pub fn coords(&self) -> Vec<f64> {
        let n = self.point.dim();
        let mut v = Vec::with_capacity(2 + 2 * n);
        v.push(self.point.t);
        v.extend_from_slice(&self.point.q);
        v.push(self.p0);
        v.extend_from_slice(&self.point.p);
        v
    }
}

/// Temporal component of a vector field, restricted to exactly 0 or 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeComponent {
    Zero,
    One,
}

impl TimeComponent {
    pub fn from_flag(flag: u8) -> Result<Self> {
        match flag {
            0 => Ok(TimeComponent::Zero),
            1 => Ok(TimeComponent::One),
            other => Err(Error::Config(format!(
                "temporal component must be 0 or 1, got {other}"
            ))),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            TimeComponent::Zero => 0.0,
            TimeComponent::One => 1.0,
        }
    }

    pub fn is_vertical(self) -> bool {
        self == TimeComponent::Zero
    }
}

fn coerce(fields: Vec<ScalarField>, frame: &Frame) -> Result<Vec<ScalarField>> {
    fields
        .into_iter()
        .map(|f| {
            if f.frame() == frame {
                Ok(f)
            } else {
                f.with_frame(frame.clone())
            }
        })
        .collect()
}

/// `ut ∂_t + u^i(t, q) ∂_i` on the configuration bundle.
#[derive(Clone, Debug)]
pub struct VectorFieldQ {
    ut: TimeComponent,
    ui: Vec<ScalarField>,
}

impl VectorFieldQ {
    /// Components are re-targeted to the `(t, q)` frame; momenta or
    /// velocities in them are rejected.
    pub fn new(ut: TimeComponent, ui: Vec<ScalarField>) -> Result<Self> {
        if ui.is_empty() {
            return Err(Error::Config("vector field needs at least one component".into()));
        }
        let frame = Frame::config(ui.len());
        Ok(VectorFieldQ {
            ut,
            ui: coerce(ui, &frame)?,
        })
    }

    pub fn parse(ut: TimeComponent, components: &[&str]) -> Result<Self> {
        let frame = Frame::config(components.len());
        let ui = components
            .iter()
            .map(|c| ScalarField::expr(c, &frame))
            .collect::<Result<Vec<_>>>()?;
        VectorFieldQ::new(ut, ui)
    }

    pub fn zero(n: usize) -> Self {
        let frame = Frame::config(n);
        let ui = (0..n).map(|_| ScalarField::expr("0", &frame).unwrap()).collect();
        VectorFieldQ {
            ut: TimeComponent::Zero,
            ui,
        }
    }

    pub fn ut(&self) -> TimeComponent {
        self.ut
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.ui
    }

    pub fn dim(&self) -> usize {
        self.ui.len()
    }

    /// Components at a `(t, q)` prefix of any frame's coordinates.
    pub(crate) fn eval_at<S: Scalar>(&self, config: &[S]) -> Result<Vec<S>> {
        self.ui.iter().map(|f| f.eval(config)).collect()
    }

    /// Phase-space field with the same horizontal part and lowered
    /// components `-p_j ∂_i u^j`.
    pub fn canonical_lift_field(&self) -> Result<VectorFieldV> {
        let frame = Frame::phase(self.dim());
        Ok(VectorFieldV {
            ut: self.ut,
            up: coerce(self.ui.clone(), &frame)?,
            down: Lowered::CanonicalLift,
        })
    }
}

/// Values of `(υ^t, υ^i, d_t υ^i)` of the first jet prolongation.
#[derive(Clone, Debug, PartialEq)]
pub struct Prolongation {
    pub ut: f64,
    pub u: Vec<f64>,
    pub dtu: Vec<f64>,
}

/// First jet prolongation of `v` evaluated at `at`.
pub fn jet_prolong(v: &VectorFieldQ, at: &Jet2Point) -> Result<Prolongation> {
    check_len(v.dim(), at.dim())?;
    let mut config = vec![at.t];
    config.extend_from_slice(&at.q);
    let vals: Vec<Dual1> = v.eval_at(&seed1(&config))?;
    let n = at.dim();
    let u = vals.iter().map(|d| d.re).collect();
    let dtu = vals
        .iter()
        .map(|d| d.d(0) + (0..n).map(|j| at.qt[j] * d.d(1 + j)).sum::<f64>())
        .collect();
    Ok(Prolongation {
        ut: v.ut.as_f64(),
        u,
        dtu,
    })
}

/// Lowered (momentum) components of a phase-space vector field.
#[derive(Clone, Debug)]
pub enum Lowered {
    Explicit(Vec<ScalarField>),
    /// `υ_i = -p_j ∂_i υ^j`, for fields whose `υ^i` do not depend on momenta.
    CanonicalLift,
}

/// `ut ∂_t + υ^i ∂_i + υ_i ∂^i` on the phase space.
#[derive(Clone, Debug)]
pub struct VectorFieldV {
    ut: TimeComponent,
    up: Vec<ScalarField>,
    down: Lowered,
}

/// Values of a phase-space vector field at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector {
    pub ut: f64,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
}

impl VectorFieldV {
    pub fn new(ut: TimeComponent, up: Vec<ScalarField>, down: Vec<ScalarField>) -> Result<Self> {
        check_len(up.len(), down.len())?;
        if up.is_empty() {
            return Err(Error::Config("vector field needs at least one component".into()));
        }
        let frame = Frame::phase(up.len());
        Ok(VectorFieldV {
            ut,
            up: coerce(up, &frame)?,
            down: Lowered::Explicit(coerce(down, &frame)?),
        })
    }

    pub fn parse(ut: TimeComponent, up: &[&str], down: &[&str]) -> Result<Self> {
        let frame = Frame::phase(up.len());
        let mk = |list: &[&str]| {
            list.iter()
                .map(|c| ScalarField::expr(c, &frame))
                .collect::<Result<Vec<_>>>()
        };
        VectorFieldV::new(ut, mk(up)?, mk(down)?)
    }

    pub fn ut(&self) -> TimeComponent {
        self.ut
    }

    pub fn dim(&self) -> usize {
        self.up.len()
    }

    /// Upper and lowered components at phase coordinates `x`.
    pub fn eval_at<S: Scalar>(&self, x: &[S]) -> Result<(Vec<S>, Vec<S>)> {
        let n = self.dim();
        check_len(1 + 2 * n, x.len())?;
        let up = self.up.iter().map(|f| f.eval(x)).collect::<Result<Vec<S>>>()?;
        let down = match &self.down {
            Lowered::Explicit(fs) => fs.iter().map(|f| f.eval(x)).collect::<Result<Vec<S>>>()?,
            Lowered::CanonicalLift => {
                let q_slots: Vec<usize> = (1..=n).collect();
                let lifted: Vec<Dual<S>> = seed_subset(x, &q_slots);
                let grads = self
                    .up
                    .iter()
                    .map(|f| f.eval(&lifted))
                    .collect::<Result<Vec<Dual<S>>>>()?;
                (0..n)
                    .map(|i| {
                        let s = (0..n).fold(S::zero(), |acc, j| {
                            acc + x[1 + n + j].clone() * grads[j].d(i)
                        });
                        -s
                    })
                    .collect()
            }
        };
        Ok((up, down))
    }

    pub fn values(&self, at: &PhasePoint) -> Result<PhaseVector> {
        let (up, down) = self.eval_at(&at.coords())?;
        Ok(PhaseVector {
            ut: self.ut.as_f64(),
            up,
            down,
        })
    }
}

/// Lift of `v` to the phase space evaluated at `at`.
pub fn canonical_lift(v: &VectorFieldQ, at: &PhasePoint) -> Result<PhaseVector> {
    check_len(v.dim(), at.dim())?;
    v.canonical_lift_field()?.values(at)
}

/// Connection `∂_t + Γ^i ∂_i` on the configuration bundle.
#[derive(Clone, Debug)]
pub struct ReferenceFrame {
    gi: Vec<ScalarField>,
}

impl ReferenceFrame {
    pub fn new(gi: Vec<ScalarField>) -> Result<Self> {
        if gi.is_empty() {
            return Err(Error::Config("reference frame needs at least one component".into()));
        }
        let frame = Frame::config(gi.len());
        Ok(ReferenceFrame {
            gi: coerce(gi, &frame)?,
        })
    }

    pub fn parse(components: &[&str]) -> Result<Self> {
        let frame = Frame::config(components.len());
        ReferenceFrame::new(
            components
                .iter()
                .map(|c| ScalarField::expr(c, &frame))
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// The rest frame `Γ = 0`.
    pub fn rest(n: usize) -> Self {
        ReferenceFrame::parse(&vec!["0"; n]).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.gi.len()
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.gi
    }

    pub(crate) fn eval_at<S: Scalar>(&self, config: &[S]) -> Result<Vec<S>> {
        self.gi.iter().map(|f| f.eval(config)).collect()
    }

    /// The frame seen as the non-vertical field `∂_t + Γ^i ∂_i`.
    pub fn as_vector_field(&self) -> VectorFieldQ {
        VectorFieldQ {
            ut: TimeComponent::One,
            ui: self.gi.clone(),
        }
    }
}

/// Vertical field `Γ1 − Γ2` on the `(t, q)` frame.
pub fn frame_difference(g1: &ReferenceFrame, g2: &ReferenceFrame) -> Result<VectorFieldQ> {
    check_len(g1.dim(), g2.dim())?;
    let frame = Frame::config(g1.dim());
    let ui = g1
        .gi
        .iter()
        .zip(&g2.gi)
        .map(|(a, b)| match (a.as_expr(), b.as_expr()) {
            (Some(x), Some(y)) => {
                let mut params = a.params().clone();
                params.extend(b.params().iter().map(|(k, v)| (k.clone(), *v)));
                ScalarField::from_expr(
                    crate::expr::Expr::binary(crate::expr::BinOp::Sub, x.clone(), y.clone()),
                    frame.clone(),
                    &params,
                )
            }
            _ => Err(Error::Config("frame components must be expressions".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    VectorFieldQ::new(TimeComponent::Zero, ui)
}

/// `qt − Γ(t, q)`.
pub fn relative_velocity(g: &ReferenceFrame, at: &JetPoint) -> Result<Vec<f64>> {
    check_len(g.dim(), at.dim())?;
    let mut config = vec![at.t];
    config.extend_from_slice(&at.q);
    let gamma = g.eval_at(&config)?;
    Ok(at.qt.iter().zip(gamma).map(|(v, g)| v - g).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Params;

    #[test]
    fn prolong_rotation() {
        let v = VectorFieldQ::parse(TimeComponent::Zero, &["-q2", "q1"]).unwrap();
        let at = Jet2Point::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let pr = jet_prolong(&v, &at).unwrap();
        assert_eq!(pr.u, vec![0.0, 1.0]);
        assert_eq!(pr.dtu, vec![-1.0, 0.0]);
        assert_eq!(pr.ut, 0.0);
    }

    #[test]
    fn prolong_time_shift_and_linear() {
        let v = VectorFieldQ::parse(TimeComponent::One, &["0", "0"]).unwrap();
        let at = Jet2Point::new(0.3, vec![1.0, 2.0], vec![3.0, 4.0], vec![0.0, 0.0]).unwrap();
        let pr = jet_prolong(&v, &at).unwrap();
        assert_eq!(pr.dtu, vec![0.0, 0.0]);
        assert_eq!(pr.ut, 1.0);

        let v = VectorFieldQ::parse(TimeComponent::Zero, &["q1"]).unwrap();
        let at = Jet2Point::new(0.0, vec![1.0], vec![5.0], vec![0.0]).unwrap();
        assert_eq!(jet_prolong(&v, &at).unwrap().dtu, vec![5.0]);
    }

    #[test]
    fn lift_rotation() {
        let v = VectorFieldQ::parse(TimeComponent::Zero, &["-q2", "q1"]).unwrap();
        let at = PhasePoint::new(0.0, vec![0.4, -0.7], vec![1.5, 2.5]).unwrap();
        let lift = canonical_lift(&v, &at).unwrap();
        assert_eq!(lift.up, vec![0.7, 0.4]);
        assert_eq!(lift.down, vec![-2.5, 1.5]);
    }

    #[test]
    fn lift_translation_and_linear() {
        let v = VectorFieldQ::parse(TimeComponent::Zero, &["1", "0"]).unwrap();
        let at = PhasePoint::new(0.0, vec![0.4, -0.7], vec![1.5, 2.5]).unwrap();
        assert_eq!(canonical_lift(&v, &at).unwrap().down, vec![0.0, 0.0]);
        let v = VectorFieldQ::parse(TimeComponent::Zero, &["q1"]).unwrap();
        let at = PhasePoint::new(0.0, vec![2.0], vec![3.0]).unwrap();
        assert_eq!(canonical_lift(&v, &at).unwrap().down, vec![-3.0]);
    }

    #[test]
    fn ut_restricted() {
        assert!(TimeComponent::from_flag(2).is_err());
        assert_eq!(TimeComponent::from_flag(1).unwrap().as_f64(), 1.0);
    }

    #[test]
    fn vector_field_rejects_momenta() {
        let frame = Frame::phase(1);
        let f = ScalarField::expr("p1", &frame).unwrap();
        assert!(VectorFieldQ::new(TimeComponent::Zero, vec![f]).is_err());
    }

    #[test]
    fn relative_velocities() {
        let rest = ReferenceFrame::rest(2);
        let at = JetPoint::new(0.0, vec![1.0, 2.0], vec![0.5, -0.5]).unwrap();
        assert_eq!(relative_velocity(&rest, &at).unwrap(), vec![0.5, -0.5]);
        let comoving = ReferenceFrame::parse(&["0.5", "-0.5"]).unwrap();
        assert_eq!(relative_velocity(&comoving, &at).unwrap(), vec![0.0, 0.0]);

        let mut params = Params::new();
        params.insert("k".into(), 1.0);
        params.insert("m0".into(), 1.0);
        let havas = ReferenceFrame::new(vec![ScalarField::parse(
            "-(k/(2*m0))*q1",
            Frame::config(1),
            &params,
        )
        .unwrap()])
        .unwrap();
        let at = JetPoint::new(0.0, vec![2.0], vec![0.0]).unwrap();
        assert_eq!(relative_velocity(&havas, &at).unwrap(), vec![1.0]);
    }

    #[test]
    fn frame_difference_components() {
        let a = ReferenceFrame::parse(&["q1", "1"]).unwrap();
        let b = ReferenceFrame::parse(&["0", "q2"]).unwrap();
        let d = frame_difference(&a, &b).unwrap();
        let at = PhasePoint::new(0.0, vec![2.0, 3.0], vec![0.0, 0.0]).unwrap();
        let vals = canonical_lift(&d, &at).unwrap();
        assert_eq!(vals.up, vec![2.0, -2.0]);
    }
}
