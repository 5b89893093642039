//! Adaptive Dormand–Prince 5(4) integration of Hamilton and Lagrange
//! flows with dense output, plus drift reports for monitored quantities.
//!
//! The scheme is explicit and not symplectic: conserved quantities drift
//! at the level of the requested tolerance, which is what the drift
//! reports measure.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::field::{Frame, ScalarField};
use crate::geometry::{JetPoint, PhasePoint};
use crate::hamiltonian::HamiltonianSystem;
use crate::lagrangian::{lagrange_dynamics, LagrangianSystem};
use crate::par;

pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_MAX_STEPS: usize = 5_000_000;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryKind {
    Hamiltonian,
    Lagrangian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Number of uniformly spaced output samples, endpoints included.
    pub samples: usize,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl IntegratorOptions {
    pub fn new(rtol: f64, atol: f64) -> Self {
        IntegratorOptions {
            rtol,
            atol,
            samples: DEFAULT_SAMPLES,
            max_steps: DEFAULT_MAX_STEPS,
            initial_step: None,
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerances must be positive (rtol = {}, atol = {})",
                self.rtol, self.atol
            )));
        }
        if self.samples < 2 {
            return Err(Error::InvalidArgument("at least two samples are required".into()));
        }
        Ok(())
    }
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions::new(1e-10, 1e-12)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
}

/// Samples are strictly monotone in the direction of integration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub dof: usize,
    pub samples: Vec<Sample>,
    pub accepted: usize,
    pub rejected: usize,
    pub tolerances: Tolerances,
}

impl Trajectory {
    /// Frame of `[t, state..]`: phase frame or jet frame.
    pub fn frame(&self) -> Frame {
        match self.kind {
            TrajectoryKind::Hamiltonian => Frame::phase(self.dof),
            TrajectoryKind::Lagrangian => Frame::jet(self.dof),
        }
    }

    pub fn coords(&self, i: usize) -> Vec<f64> {
        let s = &self.samples[i];
        let mut v = Vec::with_capacity(1 + s.state.len());
        v.push(s.t);
        v.extend_from_slice(&s.state);
        v
    }

    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least two samples")
    }

    pub fn phase_point(&self, i: usize) -> Option<PhasePoint> {
        (self.kind == TrajectoryKind::Hamiltonian)
            .then(|| PhasePoint::from_coords(self.dof, &self.coords(i)).ok())
            .flatten()
    }

    pub fn jet_point(&self, i: usize) -> Option<JetPoint> {
        (self.kind == TrajectoryKind::Lagrangian)
            .then(|| JetPoint::from_coords(self.dof, &self.coords(i)).ok())
            .flatten()
    }

    /// CSV with a header row of frame names; 17 significant digits.
    /// As [`Trajectory::write_csv`] with one extra column per monitor;
    /// failed evaluations are written as `NaN`.
    pub fn write_csv_with<W: Write>(&self, monitors: &[&dyn Observable], mut w: W) -> std::io::Result<()> {
        let mut header: Vec<String> = self.frame().names().to_vec();
        header.extend(monitors.iter().map(|m| m.name().to_string()));
        writeln!(w, "{}", header.join(","))?;
        for i in 0..self.samples.len() {
            let x = self.coords(i);
            let mut row: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
            row.extend(
                monitors
                    .iter()
                    .map(|m| format!("{:.16e}", m.value(&x).unwrap_or(f64::NAN))),
            );
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.frame().names().join(","))?;
        for i in 0..self.samples.len() {
            let row: Vec<String> = self.coords(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

struct Run {
    samples: Vec<Sample>,
    accepted: usize,
    rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 7] = [
    &[],
    &[1.0 / 5.0],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order solution minus embedded fourth-order solution.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Coefficients of the fourth-order continuous extension.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn rms_scaled(v: &[f64], y0: &[f64], y1: &[f64], o: &IntegratorOptions) -> f64 {
    let s: f64 = v
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let sc = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
            (e / sc).powi(2)
        })
        .sum();
    (s / v.len() as f64).sqrt()
}

fn finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

fn initial_step<F>(f: &mut F, t0: f64, y0: &[f64], f0: &[f64], span: f64, o: &IntegratorOptions) -> f64
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    let dir = span.signum();
    let d0 = rms_scaled(y0, y0, y0, o);
    let d1 = rms_scaled(f0, y0, y0, o);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span.abs());
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, k)| y + dir * h0 * k).collect();
    let h1 = match f(t0 + dir * h0, &y1) {
        Ok(f1) if finite(&f1) => {
            let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
            let d2 = rms_scaled(&diff, y0, y0, o) / h0;
            let m = d1.max(d2);
            if m <= 1e-15 {
                (h0 * 1e-3).max(1e-6)
            } else {
                (0.01 / m).powf(0.2)
            }
        }
        _ => h0 * 1e-3,
    };
    (100.0 * h0).min(h1).min(span.abs())
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction) and
/// returns uniformly spaced dense samples.
fn dopri5<F>(mut f: F, t0: f64, y0: Vec<f64>, t_end: f64, o: &IntegratorOptions) -> Result<Run>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    o.validate()?;
    let span = t_end - t0;
    if !(span.is_finite()) || span == 0.0 {
        return Err(Error::InvalidArgument("integration span must be finite and nonzero".into()));
    }
    if !finite(&y0) || !t0.is_finite() {
        return Err(Error::InvalidArgument("initial state must be finite".into()));
    }
    let dir = span.signum();
    let dim = y0.len();
    let n_samples = o.samples;
    let grid = |k: usize| {
        if k + 1 == n_samples {
            t_end
        } else {
            t0 + span * (k as f64) / ((n_samples - 1) as f64)
        }
    };

    let mut samples = Vec::with_capacity(n_samples);
    samples.push(Sample { t: t0, state: y0.clone() });
    let mut next = 1;

    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    if !finite(&k1) {
        return Err(Error::InvalidArgument("vector field is not finite at the initial point".into()));
    }
    let mut h = match o.initial_step {
        Some(h) => h.abs().min(span.abs()),
        None => initial_step(&mut f, t, &y, &k1, span, o),
    };
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let mut last_rejected = false;
    let mut k = vec![vec![0.0; dim]; 7];

    while dir * (t_end - t) > 0.0 {
        if accepted + rejected >= o.max_steps {
            return Err(Error::StepLimit {
                steps: accepted + rejected,
                t,
            });
        }
        let remaining = (t_end - t).abs();
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h });
        }
        let hs = dir * h;

        // stages
        k[0].clone_from(&k1);
        let mut stage_failure: Option<Error> = None;
        let mut ytmp = vec![0.0; dim];
        for s in 1..7 {
            for i in 0..dim {
                let acc: f64 = A[s].iter().enumerate().map(|(j, a)| a * k[j][i]).sum();
                ytmp[i] = y[i] + hs * acc;
            }
            let ts = if s >= 5 { t + hs } else { t + C[s] * hs };
            match f(ts, &ytmp) {
                Ok(v) if finite(&v) => k[s] = v,
                Ok(_) => {
                    stage_failure = Some(Error::StepUnderflow { t, h });
                    break;
                }
                Err(e) => {
                    stage_failure = Some(e);
                    break;
                }
            }
        }
        if let Some(err) = stage_failure {
            rejected += 1;
            last_rejected = true;
            h *= MIN_FACTOR;
            if h < 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(match err {
                    Error::Eval(_) | Error::StepUnderflow { .. } => Error::StepUnderflow { t, h },
                    other => other,
                });
            }
            continue;
        }
        // ytmp now holds the fifth-order solution at t + h
        let y1 = ytmp;
        let errv: Vec<f64> = (0..dim)
            .map(|i| hs * (0..7).map(|s| E[s] * k[s][i]).sum::<f64>())
            .collect();
        let err = rms_scaled(&errv, &y, &y1, o);
        if !err.is_finite() {
            rejected += 1;
            last_rejected = true;
            h *= MIN_FACTOR;
            continue;
        }
        if err <= 1.0 {
            accepted += 1;
            let t1 = if last { t_end } else { t + hs };
            // dense output on (t, t1]
            if next < n_samples && dir * (grid(next) - t1) <= 0.0 {
                let ydiff: Vec<f64> = (0..dim).map(|i| y1[i] - y[i]).collect();
                let bspl: Vec<f64> = (0..dim).map(|i| hs * k[0][i] - ydiff[i]).collect();
                let r4: Vec<f64> = (0..dim).map(|i| ydiff[i] - hs * k[6][i] - bspl[i]).collect();
                let r5: Vec<f64> = (0..dim)
                    .map(|i| hs * (0..7).map(|s| D[s] * k[s][i]).sum::<f64>())
                    .collect();
                while next < n_samples && dir * (grid(next) - t1) <= 0.0 {
                    let tg = grid(next);
                    let state = if next + 1 == n_samples && last {
                        y1.clone()
                    } else {
                        let th = (tg - t) / hs;
                        let th1 = 1.0 - th;
                        (0..dim)
                            .map(|i| {
                                y[i] + th * (ydiff[i] + th1 * (bspl[i] + th * (r4[i] + th1 * r5[i])))
                            })
                            .collect()
                    };
                    samples.push(Sample { t: tg, state });
                    next += 1;
                }
            }
            t = t1;
            y = y1;
            k1 = k[6].clone();
            let mut fac = if err == 0.0 { MAX_FACTOR } else { SAFETY * err.powf(-0.2) };
            fac = fac.clamp(MIN_FACTOR, MAX_FACTOR);
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h *= fac;
        } else {
            rejected += 1;
            last_rejected = true;
            h *= (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
        }
    }
    Ok(Run {
        samples,
        accepted,
        rejected,
    })
}

/// Integrates the Hamilton equation; the state is `(q, p)`.
pub fn integrate_hamiltonian(
    sys: &HamiltonianSystem,
    from: &PhasePoint,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let n = sys.dim();
    check_len(n, from.dim())?;
    let mut y0 = from.q.clone();
    y0.extend_from_slice(&from.p);
    let mut x = vec![0.0; 1 + 2 * n];
    let run = dopri5(
        |t, y| {
            x[0] = t;
            x[1..].copy_from_slice(y);
            sys.rhs(&x)
        },
        from.t,
        y0,
        t_end,
        opts,
    )?;
    Ok(Trajectory {
        kind: TrajectoryKind::Hamiltonian,
        dof: n,
        samples: run.samples,
        accepted: run.accepted,
        rejected: run.rejected,
        tolerances: Tolerances {
            rtol: opts.rtol,
            atol: opts.atol,
        },
    })
}

/// Integrates the Lagrange equation; the state is `(q, qt)`.
pub fn integrate_lagrangian(
    sys: &LagrangianSystem,
    from: &JetPoint,
    t_end: f64,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let n = sys.dim();
    check_len(n, from.dim())?;
    let mut y0 = from.q.clone();
    y0.extend_from_slice(&from.qt);
    let run = dopri5(
        |t, y| {
            let at = JetPoint {
                t,
                q: y[..n].to_vec(),
                qt: y[n..].to_vec(),
            };
            let qtt = lagrange_dynamics(sys, &at)?;
            let mut out = at.qt;
            out.extend(qtt);
            Ok(out)
        },
        from.t,
        y0,
        t_end,
        opts,
    )?;
    Ok(Trajectory {
        kind: TrajectoryKind::Lagrangian,
        dof: n,
        samples: run.samples,
        accepted: run.accepted,
        rejected: run.rejected,
        tolerances: Tolerances {
            rtol: opts.rtol,
            atol: opts.atol,
        },
    })
}

/// Independent Hamiltonian integrations, run through [`par::map`].
pub fn integrate_hamiltonian_batch(
    sys: &HamiltonianSystem,
    starts: &[PhasePoint],
    t_end: f64,
    opts: &IntegratorOptions,
) -> Vec<Result<Trajectory>> {
    par::map(starts, |s| integrate_hamiltonian(sys, s, t_end, opts))
}

/// A scalar quantity evaluated on trajectory coordinates `[t, state..]`.
pub trait Observable: Sync {
    fn name(&self) -> &str;
    fn value(&self, coords: &[f64]) -> Result<f64>;
}

/// A scalar field monitored under a display name.
#[derive(Clone, Debug)]
pub struct NamedField {
    pub name: String,
    pub field: ScalarField,
}

impl NamedField {
    pub fn new(name: impl Into<String>, field: ScalarField) -> Self {
        NamedField {
            name: name.into(),
            field,
        }
    }
}

impl Observable for NamedField {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, coords: &[f64]) -> Result<f64> {
        self.field.eval_f64(coords)
    }
}

/// Observable backed by a closure.
pub struct FnObservable<F> {
    pub name: String,
    pub f: F,
}

impl<F: Fn(&[f64]) -> Result<f64> + Sync> Observable for FnObservable<F> {
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, coords: &[f64]) -> Result<f64> {
        (self.f)(coords)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantityDrift {
    pub name: String,
    pub initial: f64,
    /// `max |value − initial|` over samples.
    pub max_abs_drift: f64,
    /// `max_abs_drift / |initial|`, absent when the initial value is zero.
    pub relative_drift: Option<f64>,
    /// Samples at which evaluation failed.
    pub failed_samples: usize,
    pub tolerance: f64,
    /// Absolute drift within tolerance and no failed samples.
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub kind: TrajectoryKind,
    pub samples: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub quantities: Vec<QuantityDrift>,
}

impl ConservationReport {
    pub fn pass(&self) -> bool {
        self.quantities.iter().all(|q| q.pass)
    }

    pub fn get(&self, name: &str) -> Option<&QuantityDrift> {
        self.quantities.iter().find(|q| q.name == name)
    }
}

/// Drift of each observable relative to its value at the first sample.
pub fn drift_report(traj: &Trajectory, monitors: &[&dyn Observable], tol: f64) -> ConservationReport {
    let coords: Vec<Vec<f64>> = (0..traj.samples.len()).map(|i| traj.coords(i)).collect();
    let quantities = monitors
        .iter()
        .map(|m| {
            let values = par::map(&coords, |c| m.value(c));
            let initial = match &values[0] {
                Ok(v) => *v,
                Err(_) => f64::NAN,
            };
            let mut failed = 0;
            let mut max_abs: f64 = 0.0;
            for v in &values {
                match v {
                    Ok(v) if v.is_finite() && initial.is_finite() => {
                        max_abs = max_abs.max((v - initial).abs())
                    }
                    _ => failed += 1,
                }
            }
            QuantityDrift {
                name: m.name().to_string(),
                initial,
                max_abs_drift: max_abs,
                relative_drift: (initial != 0.0 && initial.is_finite())
                    .then(|| max_abs / initial.abs()),
                failed_samples: failed,
                tolerance: tol,
                pass: failed == 0 && max_abs <= tol,
            }
        })
        .collect();
    ConservationReport {
        kind: traj.kind,
        samples: traj.samples.len(),
        t_start: traj.samples[0].t,
        t_end: traj.last().t,
        quantities,
    }
}

/// [`drift_report`] for scalar fields, pulled back to the trajectory frame.
pub fn drift_report_fields(
    traj: &Trajectory,
    monitors: &[(String, ScalarField)],
    tol: f64,
) -> Result<ConservationReport> {
    let frame = traj.frame();
    let named = monitors
        .iter()
        .map(|(name, f)| {
            let f = if f.frame() == &frame { f.clone() } else { f.with_frame(frame.clone())? };
            Ok(NamedField::new(name.clone(), f))
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&dyn Observable> = named.iter().map(|m| m as &dyn Observable).collect();
    Ok(drift_report(traj, &refs, tol))
}
