//! The Kepler problem as a globally described integrable system.
//!
//! Integrals: energy `H = ½p² − 1/r`, angular momentum `M12 = q1p2 − q2p1`
//! and the Runge–Lenz vector `A = q p² − p (p·q) − q/r`. On the bound
//! region `U₋` (H < 0, M12 ≠ 0) the rescaled vector `L = A/√(−2H)` closes
//! with `M12` into so(3); on the unbound region `U₊` (H > 0, M12 ≠ 0) the
//! rescaled `K = A/√(2H)` closes into so(2,1). Both regions carry explicit
//! action-angle charts `(I, x1, angle, cyclic)`.
//!
//! Charts are planar; the Lagrangian checks run in two and three dimensions.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::dual::{seed1, Dual1};
use crate::error::{Error, Result};
use crate::field::{Frame, ScalarField};
use crate::geometry::{Jet2Point, PhasePoint, TimeComponent, VectorFieldQ, VectorFieldV};
use crate::hamiltonian::{poisson_bracket_v, HamiltonianSystem};
use crate::lagrangian::{
    lagrange_dynamics, noether_current, symmetry_residual, total_time_derivative,
    LagrangianSystem,
};
use crate::scalar::Scalar;

/// Default tolerance on `|H|` and `|M12|` for the excluded set.
pub const DEFAULT_REGION_EPS: f64 = 1e-10;

/// Below this eccentricity the bound chart switches to its circular limit.
/// The closed-form anomaly loses about `1e-16/e` digits near circles while
/// the limit formula is off by `O(e)`; the two errors balance here.
pub const DEGENERATE_ECCENTRICITY: f64 = 1e-8;

/// Tolerance of the eccentric-anomaly Newton oracle.
pub const ANOMALY_TOLERANCE: f64 = 1e-13;

fn radius_text(n: usize) -> String {
    let sq: Vec<String> = (1..=n).map(|i| format!("q{i}^2")).collect();
    format!("sqrt({})", sq.join(" + "))
}

fn square_sum(prefix: &str, n: usize) -> String {
    let sq: Vec<String> = (1..=n).map(|i| format!("{prefix}{i}^2")).collect();
    sq.join(" + ")
}

/// `ℒ = ½Σqtⁱ² + 1/r` and `ℋ = ½p² − 1/r` in dimension 2 or 3.
pub fn kepler_system(dim: usize) -> Result<(LagrangianSystem, HamiltonianSystem)> {
    if !(2..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!(
            "Kepler systems exist in dimension 2 or 3, not {dim}"
        )));
    }
    let r = radius_text(dim);
    let l = ScalarField::expr(
        &format!("0.5*({}) + 1/{r}", square_sum("qt", dim)),
        &Frame::jet(dim),
    )?;
    let h = ScalarField::expr(
        &format!("0.5*({}) - 1/{r}", square_sum("p", dim)),
        &Frame::phase(dim),
    )?;
    Ok((LagrangianSystem::new(dim, l)?, HamiltonianSystem::new(dim, h)?))
}

/// Phase-space expressions of the planar integrals.
pub mod exprs {
    pub const R: &str = "sqrt(q1^2 + q2^2)";
    pub const H: &str = "0.5*(p1^2 + p2^2) - 1/sqrt(q1^2 + q2^2)";
    pub const M12: &str = "q1*p2 - q2*p1";
    pub const A1: &str = "q1*(p1^2 + p2^2) - p1*(p1*q1 + p2*q2) - q1/sqrt(q1^2 + q2^2)";
    pub const A2: &str = "q2*(p1^2 + p2^2) - p2*(p1*q1 + p2*q2) - q2/sqrt(q1^2 + q2^2)";
}

/// The planar integrals as fields on `(t, q1, q2, p1, p2)`.
pub struct KeplerFields {
    pub h: ScalarField,
    pub m12: ScalarField,
    pub a1: ScalarField,
    pub a2: ScalarField,
    pub l1: ScalarField,
    pub l2: ScalarField,
    pub k1: ScalarField,
    pub k2: ScalarField,
}

pub fn fields() -> &'static KeplerFields {
    static FIELDS: OnceLock<KeplerFields> = OnceLock::new();
    FIELDS.get_or_init(|| {
        let frame = Frame::phase(2);
        let f = |s: &str| ScalarField::expr(s, &frame).expect("built-in Kepler expression");
        let (h, a1, a2) = (exprs::H, exprs::A1, exprs::A2);
        KeplerFields {
            h: f(h),
            m12: f(exprs::M12),
            a1: f(a1),
            a2: f(a2),
            l1: f(&format!("({a1})/sqrt(-2*({h}))")),
            l2: f(&format!("({a2})/sqrt(-2*({h}))")),
            k1: f(&format!("({a1})/sqrt(2*({h}))")),
            k2: f(&format!("({a2})/sqrt(2*({h}))")),
        }
    })
}

/// `(L1, L2)` on `U₋`, `(K1, K2)` on `U₊`.
pub fn scaled_integral_fields(region: Region) -> Result<[ScalarField; 2]> {
    let f = fields();
    match region {
        Region::Minus => Ok([f.l1.clone(), f.l2.clone()]),
        Region::Plus => Ok([f.k1.clone(), f.k2.clone()]),
        Region::Excluded => Err(Error::InvalidArgument(
            "the excluded set carries no scaled integrals".into(),
        )),
    }
}

/// `(x1, x2, x3) = (−L1, −L2, −M12)` or `(−K1, −K2, −M12)` as fields.
pub fn momentum_map_fields(region: Region) -> Result<[ScalarField; 3]> {
    let [s1, s2] = scaled_integral_fields(region)?;
    let frame = Frame::phase(2);
    let neg = |f: &ScalarField| -> Result<ScalarField> {
        let e = f.as_expr().expect("expression field");
        ScalarField::expr(&format!("-({e})"), &frame)
    };
    Ok([neg(&s1)?, neg(&s2)?, neg(&fields().m12)?])
}

/// Component texts `(υⁱ, υ_i)` of `−ϑ_{Aᵃ}` for `a ∈ {1, 2}`.
pub fn runge_lenz_components(a: usize) -> (Vec<String>, Vec<String>) {
    let r = exprs::R;
    let mut up = Vec::new();
    let mut down = Vec::new();
    for c in 1..=2 {
        let delta = if c == a { 1.0 } else { 0.0 };
        up.push(format!("{delta}*(p1*q1 + p2*q2) + q{c}*p{a} - 2*q{a}*p{c}"));
        down.push(format!(
            "{delta}*(p1^2 + p2^2) - p{a}*p{c} - ({delta}/{r} - q{a}*q{c}/{r}^3)"
        ));
    }
    (up, down)
}

/// `−ϑ_{Aᵃ}`, the phase-space field generating the Runge–Lenz component `a`.
pub fn runge_lenz_field(a: usize) -> Result<VectorFieldV> {
    if !(1..=2).contains(&a) {
        return Err(Error::InvalidArgument(format!("Runge–Lenz index {a} not in 1..=2")));
    }
    let (up, down) = runge_lenz_components(a);
    let up: Vec<&str> = up.iter().map(String::as_str).collect();
    let down: Vec<&str> = down.iter().map(String::as_str).collect();
    VectorFieldV::parse(TimeComponent::Zero, &up, &down)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Minus,
    Plus,
    Excluded,
}

impl Region {
    pub fn classify_values(h: f64, m12: f64, eps: f64) -> Region {
        if m12.abs() <= eps || h.abs() <= eps {
            Region::Excluded
        } else if h < 0.0 {
            Region::Minus
        } else {
            Region::Plus
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Region::Minus => "minus",
            Region::Plus => "plus",
            Region::Excluded => "excluded",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeplerInvariants {
    pub h: f64,
    pub m12: f64,
    pub a1: f64,
    pub a2: f64,
    pub asq: f64,
    pub msq: f64,
    /// Semi-axis `∓1/(2H)`; absent on the parabolic set `H = 0`.
    pub a: Option<f64>,
    pub e: f64,
}

fn planar(at: &PhasePoint) -> Result<()> {
    if at.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            found: at.dim(),
        });
    }
    Ok(())
}

/// `[H, M12, A1, A2]` at phase coordinates `(t, q1, q2, p1, p2)`.
fn integrals<S: Scalar>(x: &[S]) -> Result<[S; 4]> {
    let (q1, q2, p1, p2) = (&x[1], &x[2], &x[3], &x[4]);
    let rsq = q1.clone() * q1.clone() + q2.clone() * q2.clone();
    if rsq.value() == 0.0 {
        return Err(Error::ChartDomain("collision point r = 0".into()));
    }
    let r = rsq.sqrt();
    let psq = p1.clone() * p1.clone() + p2.clone() * p2.clone();
    let pq = p1.clone() * q1.clone() + p2.clone() * q2.clone();
    let h = psq.scale(0.5) - S::one() / r.clone();
    let m = q1.clone() * p2.clone() - q2.clone() * p1.clone();
    let a1 = q1.clone() * psq.clone() - p1.clone() * pq.clone() - q1.clone() / r.clone();
    let a2 = q2.clone() * psq - p2.clone() * pq - q2.clone() / r;
    Ok([h, m, a1, a2])
}

pub fn invariants(at: &PhasePoint) -> Result<KeplerInvariants> {
    planar(at)?;
    let [h, m12, a1, a2] = integrals(&at.coords())?;
    let asq = a1 * a1 + a2 * a2;
    let a = if h < 0.0 {
        Some(-1.0 / (2.0 * h))
    } else if h > 0.0 {
        Some(1.0 / (2.0 * h))
    } else {
        None
    };
    Ok(KeplerInvariants {
        h,
        m12,
        a1,
        a2,
        asq,
        msq: m12 * m12,
        a,
        e: asq.sqrt(),
    })
}

pub fn classify(at: &PhasePoint, eps: f64) -> Result<Region> {
    let inv = invariants(at)?;
    Ok(Region::classify_values(inv.h, inv.m12, eps))
}

fn region_of(inv: &KeplerInvariants) -> Result<Region> {
    match Region::classify_values(inv.h, inv.m12, DEFAULT_REGION_EPS) {
        Region::Excluded => Err(Error::ExcludedRegion {
            h: inv.h,
            m12: inv.m12,
        }),
        r => Ok(r),
    }
}

/// `(L1, L2)` on `U₋` or `(K1, K2)` on `U₊`, tagged with the region.
pub fn scaled_integrals(at: &PhasePoint) -> Result<(Region, [f64; 2])> {
    let inv = invariants(at)?;
    let region = region_of(&inv)?;
    let s = (2.0 * inv.h).abs().sqrt();
    Ok((region, [inv.a1 / s, inv.a2 / s]))
}

pub fn momentum_map(at: &PhasePoint) -> Result<(Region, [f64; 3])> {
    let m12 = invariants(at)?.m12;
    let (region, [s1, s2]) = scaled_integrals(at)?;
    Ok((region, [-s1, -s2, -m12]))
}

/// Action `I` from the momentum map: `−½/|x|²` on `U₋`, `½/(x1² + x2² − x3²)`
/// on `U₊`. Unlike [`action_angle`] this needs no angle chart.
pub fn action(at: &PhasePoint) -> Result<(Region, f64)> {
    let (region, [x1, x2, x3]) = momentum_map(at)?;
    let i = match region {
        Region::Minus => -0.5 / (x1 * x1 + x2 * x2 + x3 * x3),
        _ => 0.5 / (x1 * x1 + x2 * x2 - x3 * x3),
    };
    Ok((region, i))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureResiduals {
    pub region: Region,
    /// `(relation, lhs − rhs)` pairs.
    pub entries: Vec<(String, f64)>,
    pub max_abs: f64,
}

/// Basis `M_ab` (a < b) of the three-dimensional algebra from the two-dimensional
/// generators: `M12`, `M_i3 = −S_i` with `S = L` or `K`.
fn basis(region: Region) -> Result<[[Option<ScalarField>; 3]; 3]> {
    let [x1, x2, x3] = momentum_map_fields(region)?;
    let _ = x3;
    let mut m: [[Option<ScalarField>; 3]; 3] = Default::default();
    m[0][1] = Some(fields().m12.clone());
    m[0][2] = Some(x1);
    m[1][2] = Some(x2);
    Ok(m)
}

/// Evaluates `M_ab` with `M_ba = −M_ab`.
fn basis_value(m: &[[Option<ScalarField>; 3]; 3], a: usize, b: usize, x: &[f64]) -> Result<f64> {
    use std::cmp::Ordering::*;
    match a.cmp(&b) {
        Equal => Ok(0.0),
        Less => m[a][b].as_ref().expect("upper triangle").eval_f64(x),
        Greater => Ok(-m[b][a].as_ref().expect("upper triangle").eval_f64(x)?),
    }
}

/// Pairwise brackets of the integrals minus the closed-form right-hand sides.
///
/// Covers the raw relations among `(M12, A1, A2)`, the rescaled relations
/// among `(M12, L)` or `(M12, K)`, the tensor form
/// `{M_ab, M_cd} = −(η_ac M_bd − η_ad M_bc − η_bc M_ad + η_bd M_ac)` with
/// `η = diag(1,1,1)` or `diag(1,1,−1)`, and the momentum-map relations.
pub fn structure_residuals(at: &PhasePoint) -> Result<StructureResiduals> {
    let inv = invariants(at)?;
    let region = region_of(&inv)?;
    let x = at.coords();
    let f = fields();
    let br = |a: &ScalarField, b: &ScalarField| poisson_bracket_v(a, b, at);
    let mut entries = Vec::new();

    let (m, a1, a2) = (inv.m12, inv.a1, inv.a2);
    entries.push(("{M12,A1} = -A2".to_string(), br(&f.m12, &f.a1)? + a2));
    entries.push(("{M12,A2} = A1".to_string(), br(&f.m12, &f.a2)? - a1));
    entries.push((
        "{A1,A2} = 2 H M12".to_string(),
        br(&f.a1, &f.a2)? - 2.0 * inv.h * m,
    ));

    let [s1f, s2f] = scaled_integral_fields(region)?;
    let (s1, s2) = (s1f.eval_f64(&x)?, s2f.eval_f64(&x)?);
    let (sym, sign) = match region {
        Region::Minus => ("L", -1.0),
        _ => ("K", 1.0),
    };
    entries.push((format!("{{M12,{sym}1}} = -{sym}2"), br(&f.m12, &s1f)? + s2));
    entries.push((format!("{{M12,{sym}2}} = {sym}1"), br(&f.m12, &s2f)? - s1));
    let rhs = if sign < 0.0 { "-M12" } else { "M12" };
    entries.push((
        format!("{{{sym}1,{sym}2}} = {rhs}"),
        br(&s1f, &s2f)? - sign * m,
    ));

    let mb = basis(region)?;
    let eta = match region {
        Region::Minus => [1.0, 1.0, 1.0],
        _ => [1.0, 1.0, -1.0],
    };
    let d = |i: usize, j: usize| if i == j { eta[i] } else { 0.0 };
    let pairs = [(0, 1), (0, 2), (1, 2)];
    for (i, &(a, b)) in pairs.iter().enumerate() {
        for &(c, dd) in &pairs[i + 1..] {
            let lhs = br(
                mb[a][b].as_ref().expect("basis"),
                mb[c][dd].as_ref().expect("basis"),
            )?;
            let rhs = -(d(a, c) * basis_value(&mb, b, dd, &x)?
                - d(a, dd) * basis_value(&mb, b, c, &x)?
                - d(b, c) * basis_value(&mb, a, dd, &x)?
                + d(b, dd) * basis_value(&mb, a, c, &x)?);
            entries.push((
                format!("{{M{}{},M{}{}}}", a + 1, b + 1, c + 1, dd + 1),
                lhs - rhs,
            ));
        }
    }

    let xs = momentum_map_fields(region)?;
    let xv = [-s1, -s2, -m];
    let name = if region == Region::Minus { "F" } else { "S" };
    // {x1,x2} = ±x3, {x2,x3} = x1, {x3,x1} = x2
    let third = if region == Region::Minus { 1.0 } else { -1.0 };
    for (i, j, k, s) in [(0, 1, 2, third), (1, 2, 0, 1.0), (2, 0, 1, 1.0)] {
        entries.push((
            format!(
                "{{{name}{},{name}{}}} = {}{name}{}",
                i + 1,
                j + 1,
                if s < 0.0 { "-" } else { "" },
                k + 1
            ),
            br(&xs[i], &xs[j])? - s * xv[k],
        ));
    }

    let max_abs = entries.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
    Ok(StructureResiduals {
        region,
        entries,
        max_abs,
    })
}

/// `M² + L² + 1/(2H)` on `U₋`, `K² − M² − 1/(2H)` on `U₊`.
pub fn casimir_residual(at: &PhasePoint) -> Result<f64> {
    let inv = invariants(at)?;
    let (region, [s1, s2]) = scaled_integrals(at)?;
    let ssq = s1 * s1 + s2 * s2;
    Ok(match region {
        Region::Minus => inv.msq + ssq + 1.0 / (2.0 * inv.h),
        _ => ssq - inv.msq - 1.0 / (2.0 * inv.h),
    })
}

/// Action-angle coordinates of a planar phase point.
///
/// On `U₋`: `I = −½|x|⁻²`, `γ = atan2(x2, x3)`; on `U₊`: `I = ½(x1² + x2² − x3²)⁻¹`,
/// `λ = artanh(x3/x2)`. `periapsis_time` is `a^{3/2}(E − e sin E)`
/// (resp. `a^{3/2}(F − e sinh F)`), the time-like anomaly measured from
/// periapsis. `cyclic` adds the integral `a^{3/2}·atan2(x1 x3, √a x2)`
/// (resp. `a^{3/2}·artanh(x1 x3/(√a x2))`), which makes
/// `(I, cyclic, x1, angle)` canonical: `{I, cyclic} = {x1, angle} = orientation`.
/// On `U₋` the orientation is `+1` and `cyclic` is reduced to `(−P/2, P/2]`
/// with period `P = 2π a^{3/2}`; on `U₊` it is `−1`, so `cyclic` decreases
/// at unit rate along the flow.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ActionAngleState {
    pub region: Region,
    pub action: f64,
    pub x1: f64,
    pub angle: f64,
    pub cyclic: f64,
    pub periapsis_time: f64,
    /// Eccentric anomaly `E` or hyperbolic anomaly `F`.
    pub anomaly: f64,
    pub eccentricity: f64,
    pub semi_axis: f64,
    pub period: Option<f64>,
    pub orientation: f64,
}

struct Chart<S> {
    action: S,
    x1: S,
    angle: S,
    cyclic: S,
    periapsis_time: S,
    anomaly: S,
    e: S,
    a: S,
}

fn chart<S: Scalar>(x: &[S], region: Region) -> Result<Chart<S>> {
    let [h, m, a1, a2] = integrals(x)?;
    let (q1, q2, p1, p2) = (&x[1], &x[2], &x[3], &x[4]);
    let pq = p1.clone() * q1.clone() + p2.clone() * q2.clone();
    let r = (q1.clone() * q1.clone() + q2.clone() * q2.clone()).sqrt();
    match region {
        Region::Minus => {
            let s = (-h.scale(2.0)).sqrt();
            let (x1, x2, x3) = (-(a1 / s.clone()), -(a2 / s), -m.clone());
            if x2.value() == 0.0 && x3.value() == 0.0 {
                return Err(Error::ChartDomain("x2² + x3² > 0 violated".into()));
            }
            let c = x1.clone() * x1.clone() + x2.clone() * x2.clone() + x3.clone() * x3.clone();
            let action = -(S::one() / c.clone()).scale(0.5);
            let mut angle = x2.atan2(&x3);
            if angle.value() == -PI {
                // x2 = −0 lands on the excluded end of (−π, π]
                angle = angle + S::from_f64(2.0 * PI);
            }
            let a = c;
            let sa = a.sqrt();
            let a32 = a.clone() * sa.clone();
            let esq = S::one() + action.scale(2.0) * m.clone() * m.clone();
            let e_val = esq.value().max(0.0).sqrt();
            if e_val < DEGENERATE_ECCENTRICITY {
                let sgn = m.value().signum();
                let theta = q2.atan2(q1);
                let anomaly = theta.scale(sgn);
                let periapsis_time = a32.clone() * anomaly.clone();
                let cyclic = a32.clone() * (theta + S::from_f64(PI / 2.0)).scale(sgn);
                return Ok(Chart {
                    action,
                    x1,
                    angle,
                    cyclic,
                    periapsis_time,
                    anomaly,
                    e: S::from_f64(e_val),
                    a,
                });
            }
            let e = esq.sqrt();
            let anomaly = (pq / sa.clone()).atan2(&(S::one() - r / a.clone()));
            let periapsis_time = a32.clone() * (anomaly.clone() - e.clone() * anomaly.sin());
            let shift = (x1.clone() * x3).atan2(&(sa * x2));
            let cyclic = periapsis_time.clone() + a32 * shift;
            Ok(Chart {
                action,
                x1,
                angle,
                cyclic,
                periapsis_time,
                anomaly,
                e,
                a,
            })
        }
        Region::Plus => {
            let s = h.scale(2.0).sqrt();
            let (x1, x2, x3) = (-(a1 / s.clone()), -(a2 / s), -m.clone());
            if !(x2.value() > x3.value().abs()) {
                return Err(Error::ChartDomain(format!(
                    "x2 > |x3| violated (x2 = {}, x3 = {})",
                    x2.value(),
                    x3.value()
                )));
            }
            let c = x1.clone() * x1.clone() + x2.clone() * x2.clone() - x3.clone() * x3.clone();
            let action = (S::one() / c.clone()).scale(0.5);
            let angle = (x3.clone() / x2.clone()).atanh();
            let a = c;
            let sa = a.sqrt();
            let a32 = a.clone() * sa.clone();
            let e = (S::one() + action.scale(2.0) * m.clone() * m).sqrt();
            let anomaly = (pq / (e.clone() * sa.clone())).asinh();
            let periapsis_time = a32.clone() * (anomaly.clone() - e.clone() * anomaly.sinh());
            let shift = (x1.clone() * x3 / (sa * x2)).atanh();
            let cyclic = periapsis_time.clone() + a32 * shift;
            Ok(Chart {
                action,
                x1,
                angle,
                cyclic,
                periapsis_time,
                anomaly,
                e,
                a,
            })
        }
        Region::Excluded => unreachable!("excluded points are rejected before charting"),
    }
}

/// Representative of `v` modulo `period` in `(−period/2, period/2]`.
pub fn reduce_periodic(v: f64, period: f64) -> f64 {
    v - period * ((v - period / 2.0) / period).ceil()
}

pub fn action_angle(at: &PhasePoint) -> Result<ActionAngleState> {
    let inv = invariants(at)?;
    let region = region_of(&inv)?;
    let c = chart(&at.coords(), region)?;
    let a = c.a;
    let (period, orientation, cyclic) = match region {
        Region::Minus => {
            let p = 2.0 * PI * a * a.sqrt();
            (Some(p), 1.0, reduce_periodic(c.cyclic, p))
        }
        _ => (None, -1.0, c.cyclic),
    };
    Ok(ActionAngleState {
        region,
        action: c.action,
        x1: c.x1,
        angle: c.angle,
        cyclic,
        periapsis_time: c.periapsis_time,
        anomaly: c.anomaly,
        eccentricity: c.e,
        semi_axis: a,
        period,
        orientation,
    })
}

/// Brackets `{c_k, c_l}_V` of the chart functions `(I, x1, angle, cyclic)`,
/// i.e. the canonical bivector pushed forward through the chart.
pub fn pushforward_bivector(at: &PhasePoint) -> Result<(Region, [[f64; 4]; 4])> {
    let inv = invariants(at)?;
    let region = region_of(&inv)?;
    let x: Vec<Dual1> = seed1(&at.coords());
    let c = chart(&x, region)?;
    let outs = [c.action, c.x1, c.angle, c.cyclic];
    let mut w = [[0.0; 4]; 4];
    for k in 0..4 {
        for l in 0..4 {
            let (f, g) = (&outs[k], &outs[l]);
            w[k][l] = (0..2)
                .map(|i| f.d(3 + i) * g.d(1 + i) - g.d(3 + i) * f.d(1 + i))
                .sum();
        }
    }
    Ok((region, w))
}

/// Largest deviation of the pushed-forward bivector from
/// `o·(∂_I∧∂_cyclic + ∂_x1∧∂_angle)`, `o` the region's orientation.
pub fn bivector_residual(at: &PhasePoint) -> Result<f64> {
    let (region, w) = pushforward_bivector(at)?;
    let o = if region == Region::Minus { 1.0 } else { -1.0 };
    let mut target = [[0.0; 4]; 4];
    target[0][3] = o;
    target[3][0] = -o;
    target[1][2] = o;
    target[2][1] = -o;
    let mut worst: f64 = 0.0;
    for k in 0..4 {
        for l in 0..4 {
            worst = worst.max((w[k][l] - target[k][l]).abs());
        }
    }
    Ok(worst)
}

/// Chart coordinates along a sampled trajectory, with `cyclic` unwrapped
/// across period boundaries and `angle` kept continuous.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartSeries {
    pub region: Region,
    pub orientation: f64,
    pub period: Option<f64>,
    pub t: Vec<f64>,
    pub cyclic: Vec<f64>,
    pub action: Vec<f64>,
    pub x1: Vec<f64>,
    pub angle: Vec<f64>,
}

/// Constancy of `(I, x1, angle)` and the rate of `cyclic` along a series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartDrift {
    pub region: Region,
    pub orientation: f64,
    pub action_drift: f64,
    pub x1_drift: f64,
    pub angle_drift: f64,
    /// `(cyclic_end − cyclic_start)/(t_end − t_start)`.
    pub mean_rate: f64,
    /// Largest `|Δcyclic/Δt − orientation|` between consecutive samples.
    pub max_rate_deviation: f64,
}

pub fn chart_series(points: &[PhasePoint]) -> Result<ChartSeries> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".into()))?;
    let s0 = action_angle(first)?;
    let mut out = ChartSeries {
        region: s0.region,
        orientation: s0.orientation,
        period: s0.period,
        t: Vec::with_capacity(points.len()),
        cyclic: Vec::with_capacity(points.len()),
        action: Vec::with_capacity(points.len()),
        x1: Vec::with_capacity(points.len()),
        angle: Vec::with_capacity(points.len()),
    };
    for p in points {
        let s = action_angle(p)?;
        if s.region != out.region {
            return Err(Error::ChartDomain(format!(
                "trajectory left region {} at t = {}",
                out.region.name(),
                p.t
            )));
        }
        let (cyclic, angle) = match (out.cyclic.last(), out.angle.last()) {
            (Some(&c), Some(&a)) => {
                let dc = match out.period {
                    Some(period) => reduce_periodic(s.cyclic - c, period),
                    None => s.cyclic - c,
                };
                (c + dc, a + reduce_periodic(s.angle - a, 2.0 * PI))
            }
            _ => (s.cyclic, s.angle),
        };
        out.t.push(p.t);
        out.cyclic.push(cyclic);
        out.action.push(s.action);
        out.x1.push(s.x1);
        out.angle.push(angle);
    }
    Ok(out)
}

impl ChartSeries {
    pub fn drift(&self) -> ChartDrift {
        let spread = |v: &[f64]| v.iter().map(|x| (x - v[0]).abs()).fold(0.0, f64::max);
        let n = self.t.len();
        let mut max_dev: f64 = 0.0;
        for i in 1..n {
            let dt = self.t[i] - self.t[i - 1];
            if dt != 0.0 {
                let rate = (self.cyclic[i] - self.cyclic[i - 1]) / dt;
                max_dev = max_dev.max((rate - self.orientation).abs());
            }
        }
        let span = self.t[n - 1] - self.t[0];
        ChartDrift {
            region: self.region,
            orientation: self.orientation,
            action_drift: spread(&self.action),
            x1_drift: spread(&self.x1),
            angle_drift: spread(&self.angle),
            mean_rate: if span != 0.0 {
                (self.cyclic[n - 1] - self.cyclic[0]) / span
            } else {
                f64::NAN
            },
            max_rate_deviation: max_dev,
        }
    }

    /// Columns `t, α|τ, I, x1, γ|λ`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let (c, a) = match self.region {
            Region::Minus => ("alpha", "gamma"),
            _ => ("tau", "lambda"),
        };
        writeln!(w, "t,{c},I,x1,{a}")?;
        for i in 0..self.t.len() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                self.t[i], self.cyclic[i], self.action[i], self.x1[i], self.angle[i]
            )?;
        }
        Ok(())
    }
}

fn safeguarded_newton(g: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (v, dv) = g(x);
        if v.abs() <= ANOMALY_TOLERANCE {
            return Ok(x);
        }
        if v > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let step = x - v / dv;
        x = if dv != 0.0 && step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= ANOMALY_TOLERANCE {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence {
        iterations: 200,
        residual: g(x).0.abs(),
    })
}

/// Eccentric anomaly from `r = a(1 − e cos E)` by bracketed Newton, with
/// the branch `E ≥ 0` when `outgoing` (`p·q ≥ 0`).
pub fn eccentric_anomaly_newton(a: f64, e: f64, r: f64, outgoing: bool) -> Result<f64> {
    let target = r.clamp(a * (1.0 - e), a * (1.0 + e));
    let g = |v: f64| (a * (1.0 - e * v.cos()) - target, a * e * v.sin());
    let v = safeguarded_newton(g, 0.0, PI)?;
    Ok(if outgoing { v } else { -v })
}

/// Hyperbolic anomaly from `r = a(e cosh F − 1)`.
pub fn hyperbolic_anomaly_newton(a: f64, e: f64, r: f64, outgoing: bool) -> Result<f64> {
    let target = r.max(a * (e - 1.0));
    let hi = ((target / a + 1.0) / e).acosh() + 1.0;
    let g = |v: f64| (a * (e * v.cosh() - 1.0) - target, a * e * v.sinh());
    let v = safeguarded_newton(g, 0.0, hi)?;
    Ok(if outgoing { v } else { -v })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LagrangianKeplerReport {
    pub dim: usize,
    pub symmetry_residuals: Vec<(String, f64)>,
    /// `(label, Noether current, q^a qt^b − q^b qt^a)`.
    pub currents: Vec<(String, f64, f64)>,
    pub runge_lenz_rates: Vec<(String, f64)>,
}

impl LagrangianKeplerReport {
    pub fn max_symmetry_residual(&self) -> f64 {
        self.symmetry_residuals.iter().map(|r| r.1.abs()).fold(0.0, f64::max)
    }

    pub fn max_current_mismatch(&self) -> f64 {
        self.currents.iter().map(|c| (c.1 - c.2).abs()).fold(0.0, f64::max)
    }

    pub fn max_runge_lenz_rate(&self) -> f64 {
        self.runge_lenz_rates.iter().map(|r| r.1.abs()).fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.max_symmetry_residual()
            .max(self.max_current_mismatch())
            .max(self.max_runge_lenz_rate())
    }
}

/// `v^a_b = q^b ∂_a − q^a ∂_b`, whose Noether current is `q^a π_b − q^b π_a`.
pub fn rotation_generator(dim: usize, a: usize, b: usize) -> Result<VectorFieldQ> {
    if a == b || a == 0 || b == 0 || a > dim || b > dim {
        return Err(Error::InvalidArgument(format!(
            "rotation generator ({a},{b}) invalid in dimension {dim}"
        )));
    }
    let comps: Vec<String> = (1..=dim)
        .map(|i| {
            if i == a {
                format!("q{b}")
            } else if i == b {
                format!("-q{a}")
            } else {
                "0".to_string()
            }
        })
        .collect();
    let comps: Vec<&str> = comps.iter().map(String::as_str).collect();
    VectorFieldQ::parse(TimeComponent::Zero, &comps)
}

/// Runge–Lenz component `Aᵃ` as a function on the velocity space.
pub fn runge_lenz_jet(dim: usize, a: usize) -> Result<ScalarField> {
    let r = radius_text(dim);
    let qtsq = square_sum("qt", dim);
    let dot: Vec<String> = (1..=dim).map(|i| format!("q{i}*qt{i}")).collect();
    ScalarField::expr(
        &format!(
            "q{a}*({qtsq}) - qt{a}*({}) - q{a}/{r}",
            dot.join(" + ")
        ),
        &Frame::jet(dim),
    )
}

/// Rotation symmetries, their currents and the on-shell rate of `Aᵃ`.
/// The acceleration stored in `at` is replaced by the Lagrange dynamics.
pub fn lagrangian_kepler_checks(at: &Jet2Point) -> Result<LagrangianKeplerReport> {
    let dim = at.dim();
    let (sys, _) = kepler_system(dim)?;
    if at.q.iter().all(|v| *v == 0.0) {
        return Err(Error::ChartDomain("collision point r = 0".into()));
    }
    let jet = at.jet();
    let mut symmetry_residuals = Vec::new();
    let mut currents = Vec::new();
    for a in 1..=dim {
        for b in a + 1..=dim {
            let v = rotation_generator(dim, a, b)?;
            symmetry_residuals.push((format!("v{a}{b}"), symmetry_residual(&sys, &v, None, at)?));
            let j = noether_current(&sys, &v, &jet)?;
            let m = at.q[a - 1] * at.qt[b - 1] - at.q[b - 1] * at.qt[a - 1];
            currents.push((format!("M{a}{b}"), j, m));
        }
    }
    let qtt = lagrange_dynamics(&sys, &jet)?;
    let on_shell = jet.with_acceleration(qtt)?;
    let mut runge_lenz_rates = Vec::new();
    for a in 1..=dim {
        let f = runge_lenz_jet(dim, a)?;
        runge_lenz_rates.push((format!("dA{a}/dt"), total_time_derivative(&f, &on_shell)?));
    }
    Ok(LagrangianKeplerReport {
        dim,
        symmetry_residuals,
        currents,
        runge_lenz_rates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::JetPoint;
    use crate::hamiltonian::{iom_residual, symmetry_necessary_residual};

    fn pp(q: [f64; 2], p: [f64; 2]) -> PhasePoint {
        PhasePoint::new(0.0, q.to_vec(), p.to_vec()).unwrap()
    }

    fn circular() -> PhasePoint {
        pp([1.0, 0.0], [0.0, 1.0])
    }
    fn hyperbolic() -> PhasePoint {
        pp([1.0, 0.0], [0.0, 2.0])
    }
    fn elliptic() -> PhasePoint {
        pp([1.0, 0.0], [0.0, 0.8])
    }

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn system_values() {
        let (l2, h2) = kepler_system(2).unwrap();
        close(h2.hamiltonian().eval_f64(&[0.0, 1.0, 0.0, 0.0, 1.0]).unwrap(), -0.5, 0.0);
        close(h2.hamiltonian().eval_f64(&[0.0, 1.0, 0.0, 0.0, 2.0]).unwrap(), 1.0, 0.0);
        let (l3, _) = kepler_system(3).unwrap();
        let jet = [0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        close(l3.lagrangian().eval_f64(&jet).unwrap(), 1.5, 1e-15);
        assert_eq!(l2.dim(), 2);
        assert!(kepler_system(4).is_err());
    }

    #[test]
    fn invariants_examples() {
        let c = invariants(&circular()).unwrap();
        assert_eq!((c.h, c.m12, c.a1, c.a2, c.e, c.a), (-0.5, 1.0, 0.0, 0.0, 0.0, Some(1.0)));
        let h = invariants(&hyperbolic()).unwrap();
        assert_eq!((h.h, h.m12, h.a1, h.a2), (1.0, 2.0, 3.0, 0.0));
        close(h.asq, 2.0 * h.msq * h.h + 1.0, 1e-12);
        let e = invariants(&elliptic()).unwrap();
        close(e.h, -0.68, 1e-15);
        close(e.a1, -0.36, 1e-15);
        close(e.e, 0.36, 1e-15);
        close(e.asq, 2.0 * e.msq * e.h + 1.0, 1e-12);
        assert!(matches!(
            invariants(&pp([0.0, 0.0], [1.0, 0.0])),
            Err(Error::ChartDomain(_))
        ));
    }

    #[test]
    fn classification() {
        let eps = DEFAULT_REGION_EPS;
        assert_eq!(classify(&circular(), eps).unwrap(), Region::Minus);
        assert_eq!(classify(&hyperbolic(), eps).unwrap(), Region::Plus);
        assert_eq!(classify(&pp([1.0, 0.0], [1.0, 0.0]), eps).unwrap(), Region::Excluded);
        assert_eq!(
            classify(&pp([1.0, 0.0], [0.0, 2f64.sqrt()]), eps).unwrap(),
            Region::Excluded
        );
    }

    #[test]
    fn scaled_and_momentum_map() {
        assert_eq!(scaled_integrals(&circular()).unwrap().1, [0.0, 0.0]);
        let (r, k) = scaled_integrals(&hyperbolic()).unwrap();
        assert_eq!(r, Region::Plus);
        close(k[0], 3.0 / 2f64.sqrt(), 1e-15);
        let (_, l) = scaled_integrals(&elliptic()).unwrap();
        close(l[0], -0.36 / 1.36f64.sqrt(), 1e-15);
        assert_eq!(momentum_map(&circular()).unwrap().1, [-0.0, -0.0, -1.0]);
        let (_, x) = momentum_map(&hyperbolic()).unwrap();
        close(x[0], -3.0 / 2f64.sqrt(), 1e-15);
        close(x[2], -2.0, 0.0);
        let (_, x) = momentum_map(&elliptic()).unwrap();
        close(x[0], 0.36 / 1.36f64.sqrt(), 1e-15);
        close(x[2], -0.8, 1e-15);
        assert!(matches!(
            momentum_map(&pp([1.0, 0.0], [1.0, 0.0])),
            Err(Error::ExcludedRegion { .. })
        ));
    }

    #[test]
    fn field_forms_match_values() {
        let at = pp([0.4, -1.1], [0.7, 0.3]);
        let x = at.coords();
        let (r, [x1, x2, x3]) = momentum_map(&at).unwrap();
        let fs = momentum_map_fields(r).unwrap();
        close(fs[0].eval_f64(&x).unwrap(), x1, 1e-14);
        close(fs[1].eval_f64(&x).unwrap(), x2, 1e-14);
        close(fs[2].eval_f64(&x).unwrap(), x3, 1e-14);
    }

    #[test]
    fn structure_at_sample_points() {
        let c = structure_residuals(&circular()).unwrap();
        assert!(c.max_abs <= 1e-12, "{:?}", c.entries);
        for at in [
            elliptic(),
            pp([0.4, -1.1], [0.7, 0.3]),
            hyperbolic(),
            pp([-0.3, -1.2], [1.5, 0.4]),
        ] {
            let s = structure_residuals(&at).unwrap();
            assert!(s.max_abs <= 1e-9, "{:?}", s.entries);
            assert_eq!(s.entries.len(), 12);
        }
    }

    #[test]
    fn momentum_map_is_conserved() {
        let (_, h) = kepler_system(2).unwrap();
        for at in [pp([0.4, -1.1], [0.7, 0.3]), pp([-0.3, -1.2], [1.5, 0.4])] {
            let r = classify(&at, DEFAULT_REGION_EPS).unwrap();
            for f in momentum_map_fields(r).unwrap() {
                assert!(iom_residual(&h, &f, &at).unwrap().abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn casimir_examples() {
        close(casimir_residual(&circular()).unwrap(), 0.0, 1e-15);
        close(casimir_residual(&hyperbolic()).unwrap(), 0.0, 1e-12);
        close(casimir_residual(&elliptic()).unwrap(), 0.0, 1e-12);
    }

    #[test]
    fn chart_circular_point() {
        let s = action_angle(&circular()).unwrap();
        close(s.action, -0.5, 0.0);
        close(s.angle, PI, 0.0);
        close(s.periapsis_time, 0.0, 0.0);
        close(s.cyclic, PI / 2.0, 1e-15);
        assert_eq!(s.period, Some(2.0 * PI));
    }

    #[test]
    fn chart_elliptic_point_is_apoapsis() {
        let s = action_angle(&elliptic()).unwrap();
        close(s.action, -0.68, 1e-15);
        assert_eq!(s.region, Region::Minus);
        close(s.anomaly, PI, 1e-15);
        let a: f64 = 1.0 / 1.36;
        close(s.periapsis_time, PI * a.powf(1.5), 1e-14);
        let oracle = eccentric_anomaly_newton(a, 0.36, 1.0, true).unwrap();
        close(oracle, PI, 1e-6);
    }

    #[test]
    fn chart_errors() {
        assert!(matches!(
            action_angle(&pp([1.0, 0.0], [1.0, 0.0])),
            Err(Error::ExcludedRegion { .. })
        ));
        match action_angle(&hyperbolic()) {
            Err(Error::ChartDomain(msg)) => assert!(msg.contains("x2 > |x3|")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn plus_chart() {
        let at = pp([0.0, -1.0], [2.0, 0.0]);
        let s = action_angle(&at).unwrap();
        assert_eq!(s.region, Region::Plus);
        close(s.action, invariants(&at).unwrap().h, 1e-12);
        assert_eq!(s.orientation, -1.0);
        assert!(s.period.is_none());
    }

    #[test]
    fn action_outside_the_lambda_chart() {
        for at in [elliptic(), pp([0.0, -1.0], [2.0, 0.0])] {
            close(action(&at).unwrap().1, action_angle(&at).unwrap().action, 1e-14);
        }
        // U+ point with x2 < |x3|: no lambda chart, but I = H still holds
        let at = pp([1.0, 0.0], [0.3, 1.6]);
        let inv = invariants(&at).unwrap();
        assert!(action_angle(&at).is_err());
        let (region, i) = action(&at).unwrap();
        assert_eq!(region, Region::Plus);
        close(i, inv.h, 1e-14);
    }

    #[test]
    fn anomalies_agree_with_newton() {
        let at = pp([0.4, -1.1], [0.7, 0.3]);
        let s = action_angle(&at).unwrap();
        let x = at.coords();
        let r = (x[1] * x[1] + x[2] * x[2]).sqrt();
        let pq = x[1] * x[3] + x[2] * x[4];
        let e = eccentric_anomaly_newton(s.semi_axis, s.eccentricity, r, pq >= 0.0).unwrap();
        close(e, s.anomaly, 1e-6);
        let at = pp([-0.3, -1.2], [1.5, 0.4]);
        let s = action_angle(&at).unwrap();
        let x = at.coords();
        let r = (x[1] * x[1] + x[2] * x[2]).sqrt();
        let pq = x[1] * x[3] + x[2] * x[4];
        let f = hyperbolic_anomaly_newton(s.semi_axis, s.eccentricity, r, pq >= 0.0).unwrap();
        close(f, s.anomaly, 1e-6);
    }

    #[test]
    fn chart_is_darboux() {
        for at in [
            elliptic(),
            pp([0.4, -1.1], [0.7, 0.3]),
            pp([-0.3, -1.2], [1.5, 0.4]),
            pp([0.0, -1.0], [2.0, 0.0]),
        ] {
            let r = bivector_residual(&at).unwrap();
            assert!(r <= 1e-9, "{r}");
            let (_, w) = pushforward_bivector(&at).unwrap();
            assert!(w[0][1].abs() <= 1e-9);
        }
    }

    #[test]
    fn reduction_range() {
        close(reduce_periodic(PI, 2.0 * PI), PI, 0.0);
        close(reduce_periodic(-PI, 2.0 * PI), PI, 0.0);
        close(reduce_periodic(7.0, 2.0 * PI), 7.0 - 2.0 * PI, 1e-15);
    }

    #[test]
    fn runge_lenz_generators() {
        let at = pp([0.4, -1.1], [0.7, 0.3]);
        let f = fields();
        for (a, af) in [(1, &f.a1), (2, &f.a2)] {
            let v = runge_lenz_field(a).unwrap();
            let vals = v.values(&at).unwrap();
            let th = crate::hamiltonian::hamiltonian_vf(af, &at).unwrap();
            for i in 0..2 {
                close(vals.up[i], -th.up[i], 1e-12);
                close(vals.down[i], -th.down[i], 1e-12);
            }
            assert!(symmetry_necessary_residual(&v, &at).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn chart_along_elliptic_orbit() {
        use crate::integrate::{integrate_hamiltonian, IntegratorOptions};
        let (_, h) = kepler_system(2).unwrap();
        let start = elliptic();
        let a: f64 = 1.0 / 1.36;
        let period = 2.0 * PI * a.powf(1.5);
        let opts = IntegratorOptions::new(1e-11, 1e-13).with_samples(400);
        let traj = integrate_hamiltonian(&h, &start, 3.0 * period, &opts).unwrap();
        let pts: Vec<PhasePoint> = (0..traj.samples.len()).map(|i| traj.phase_point(i).unwrap()).collect();
        let d = chart_series(&pts).unwrap().drift();
        assert!(d.action_drift <= 1e-8 && d.x1_drift <= 1e-8 && d.angle_drift <= 1e-8, "{d:?}");
        assert!((d.mean_rate - 1.0).abs() <= 1e-8, "{d:?}");
        assert!(d.max_rate_deviation <= 1e-6, "{d:?}");
    }

    #[test]
    fn lagrangian_checks() {
        let circ = JetPoint::new(0.0, vec![1.0, 0.0], vec![0.0, 1.0])
            .unwrap()
            .with_acceleration(vec![-1.0, 0.0])
            .unwrap();
        let rep = lagrangian_kepler_checks(&circ).unwrap();
        close(rep.currents[0].1, 1.0, 1e-15);
        assert!(rep.max_residual() <= 1e-12);
        let p3 = Jet2Point::new(
            0.2,
            vec![0.3, -0.9, 0.5],
            vec![0.4, 0.2, -0.7],
            vec![0.0, 0.0, 0.0],
        )
        .unwrap();
        let rep = lagrangian_kepler_checks(&p3).unwrap();
        assert_eq!(rep.currents.len(), 3);
        assert!(rep.max_symmetry_residual() <= 1e-12);
        assert!(rep.max_current_mismatch() <= 1e-12);
        assert!(rep.max_runge_lenz_rate() <= 1e-9);
    }
}
