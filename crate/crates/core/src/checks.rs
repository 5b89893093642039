//! Randomized identity checks over a system.
//!
//! Each check draws `samples` points per case from a seeded [`Sampler`],
//! evaluates the residual of one identity at every point (in parallel when
//! the `parallel` feature is on) and reports the largest absolute value.
//! Points are drawn sequentially and reduced in draw order, so reports are
//! identical for a given seed regardless of thread count.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::diff::{fd_gradient_oracle, grad, relative_gap, DEFAULT_FD_STEP};
use crate::error::{Error, Result};
use crate::field::{Frame, ScalarField};
use crate::geometry::{Jet2Point, PhasePoint, ReferenceFrame, TimeComponent, VectorFieldQ, VectorFieldV};
use crate::hamiltonian::{inverse_noether, iom_residual, symmetry_necessary_residual};
use crate::kepler::{self, Region};
use crate::lagrangian::{frame_shift, symmetry_residual, variational_identity_residual};
use crate::par;
use crate::sampling::{Sampler, SamplingBox};
use crate::systems::System;

/// Kepler samples keep `|H|` and `|M12|` above this, away from the excluded set.
pub const REGION_MARGIN: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckId {
    Gradients,
    VariationalIdentity,
    Symmetry,
    Iom,
    InverseNoether,
    BracketsSo3,
    BracketsSo21,
    Casimir,
    Bivector,
    KeplerLagrangian,
    FrameShift,
    NecessaryCondition,
}

impl CheckId {
    pub const ALL: [CheckId; 12] = [
        CheckId::Gradients,
        CheckId::VariationalIdentity,
        CheckId::Symmetry,
        CheckId::Iom,
        CheckId::InverseNoether,
        CheckId::BracketsSo3,
        CheckId::BracketsSo21,
        CheckId::Casimir,
        CheckId::Bivector,
        CheckId::KeplerLagrangian,
        CheckId::FrameShift,
        CheckId::NecessaryCondition,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Gradients => "gradients",
            CheckId::VariationalIdentity => "variational-identity",
            CheckId::Symmetry => "symmetry",
            CheckId::Iom => "iom",
            CheckId::InverseNoether => "inverse-noether",
            CheckId::BracketsSo3 => "brackets-so3",
            CheckId::BracketsSo21 => "brackets-so21",
            CheckId::Casimir => "casimir",
            CheckId::Bivector => "bivector",
            CheckId::KeplerLagrangian => "kepler-lagrangian",
            CheckId::FrameShift => "frame-shift",
            CheckId::NecessaryCondition => "necessary-condition",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            CheckId::Gradients | CheckId::Bivector => 1e-6,
            CheckId::BracketsSo3 | CheckId::BracketsSo21 | CheckId::KeplerLagrangian => 1e-9,
            CheckId::InverseNoether | CheckId::Casimir | CheckId::FrameShift => 1e-12,
            CheckId::VariationalIdentity
            | CheckId::Symmetry
            | CheckId::Iom
            | CheckId::NecessaryCondition => 1e-10,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CheckId::Gradients => "AD gradients of all built-in fields against central differences",
            CheckId::VariationalIdentity => "first variational formula for symmetries, frames and a probe field",
            CheckId::Symmetry => "L_{J1 v} L - d_t sigma for the symmetry candidates",
            CheckId::Iom => "d_t Phi + {H, Phi} for the integrals",
            CheckId::InverseNoether => "current of -theta_Phi equals Phi",
            CheckId::BracketsSo3 => "Kepler bracket relations on the bound region",
            CheckId::BracketsSo21 => "Kepler bracket relations on the unbound region",
            CheckId::Casimir => "Kepler Casimir, |A|^2 = 2 M^2 H + 1 and I = H",
            CheckId::Bivector => "action-angle charts are canonical",
            CheckId::KeplerLagrangian => "Kepler rotations, orbital momenta and on-shell dA/dt",
            CheckId::FrameShift => "E_G1 - E_G2 = J_{G1 - G2}",
            CheckId::NecessaryCondition => "divergence condition for Hamiltonian symmetries",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<&str> = CheckId::ALL.iter().map(|c| c.name()).collect();
            Error::InvalidArgument(format!("unknown check `{s}` (known: {})", names.join(", ")))
        })
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub samples: usize,
    pub tol: Option<f64>,
    pub seed: u64,
    /// Restrict symmetry-based checks to one named candidate.
    pub symmetry: Option<String>,
    /// Restrict integral-based checks to one named integral or expression.
    pub integral: Option<String>,
    /// Overrides the system's sampling box.
    pub sampling: Option<SamplingBox>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            samples: 100,
            tol: None,
            seed: 0,
            symmetry: None,
            integral: None,
            sampling: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstPoint {
    pub case: String,
    pub coords: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub system: String,
    pub seed: u64,
    pub samples: usize,
    pub tol: f64,
    pub max_abs_residual: f64,
    pub worst_point: Option<WorstPoint>,
    pub pass: bool,
}

impl CheckReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

enum Probe {
    Gradient(ScalarField),
    Variational(VectorFieldQ),
    Symmetry(VectorFieldQ, Option<ScalarField>),
    Iom(ScalarField),
    InverseNoether(ScalarField),
    Structure,
    Casimir,
    AsqIdentity,
    ActionEnergy,
    Bivector,
    KeplerLagrangian,
    FrameShift(ReferenceFrame, ReferenceFrame),
    Necessary(VectorFieldV),
}

#[derive(Clone, Copy)]
enum PointKind {
    Coords(usize),
    Jet2,
    Phase,
    Region(Region),
    Chart(Region),
}

struct Case {
    label: String,
    probe: Probe,
    kind: PointKind,
}

enum Point {
    Coords(Vec<f64>),
    Jet2(Jet2Point),
    Phase(PhasePoint),
}

impl Point {
    fn coords(&self) -> Vec<f64> {
        match self {
            Point::Coords(x) => x.clone(),
            Point::Jet2(j) => {
                let mut v = j.jet().coords();
                v.extend_from_slice(&j.qtt);
                v
            }
            Point::Phase(p) => p.coords(),
        }
    }
}

fn kepler_interior(at: &PhasePoint, want: Region) -> bool {
    match kepler::invariants(at) {
        Ok(inv) => {
            Region::classify_values(inv.h, inv.m12, REGION_MARGIN) == want
        }
        Err(_) => false,
    }
}

/// Interior of the action-angle chart: away from the excluded set, from
/// circular orbits and, on `U₊`, from the edge `x2 = |x3|` of the λ chart.
fn chart_interior(at: &PhasePoint, want: Region) -> bool {
    if !kepler_interior(at, want) {
        return false;
    }
    let Ok(inv) = kepler::invariants(at) else {
        return false;
    };
    if inv.e < REGION_MARGIN {
        return false;
    }
    if want == Region::Plus {
        let Ok((_, x)) = kepler::momentum_map(at) else {
            return false;
        };
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if x[1] - x[2].abs() <= REGION_MARGIN * norm {
            return false;
        }
    }
    true
}

fn probe_field(n: usize) -> VectorFieldQ {
    let comps: Vec<String> = (1..=n)
        .map(|i| format!("t*q{i} + sin(q{})", if i == n { 1 } else { i + 1 }))
        .collect();
    let comps: Vec<&str> = comps.iter().map(String::as_str).collect();
    VectorFieldQ::parse(TimeComponent::One, &comps).expect("probe field")
}

fn uniform_frame(n: usize) -> ReferenceFrame {
    let mut comps = vec!["0"; n];
    comps[0] = "1";
    ReferenceFrame::parse(&comps).expect("uniform frame")
}

fn selected_integrals(sys: &System, opts: &CheckOptions) -> Result<Vec<(String, ScalarField)>> {
    match &opts.integral {
        Some(name) => Ok(vec![sys.integral_or_expr(name)?]),
        None => Ok(sys.integrals.clone()),
    }
}

fn require_kepler(sys: &System, id: CheckId, planar: bool) -> Result<()> {
    let ok = if planar { sys.is_planar_kepler() } else { sys.is_kepler() };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "check `{id}` applies to {} only, not `{}`",
            if planar { "kepler2d" } else { "the Kepler built-ins" },
            sys.name
        )))
    }
}

fn cases(sys: &System, id: CheckId, opts: &CheckOptions) -> Result<Vec<Case>> {
    let n = sys.dim;
    let mut out = Vec::new();
    let lagrangian_symmetries = || -> Result<Vec<(String, VectorFieldQ, Option<ScalarField>)>> {
        let chosen: Vec<_> = match &opts.symmetry {
            Some(name) => vec![sys.symmetry(name)?],
            None => sys.symmetries.iter().collect(),
        };
        let mut v = Vec::new();
        for s in chosen {
            match s.configuration() {
                Some(f) => v.push((s.name.clone(), f.clone(), s.sigma.clone())),
                None if opts.symmetry.is_some() => {
                    return Err(Error::InvalidArgument(format!(
                        "symmetry `{}` is a phase-space field and does not act on the Lagrangian",
                        s.name
                    )))
                }
                None => {}
            }
        }
        Ok(v)
    };
    match id {
        CheckId::Gradients => {
            for (label, f) in sys.scalar_fields() {
                let len = f.frame().len();
                out.push(Case {
                    label,
                    probe: Probe::Gradient(f),
                    kind: PointKind::Coords(len),
                });
            }
        }
        CheckId::VariationalIdentity => {
            sys.require_lagrangian()?;
            for (name, v, _) in lagrangian_symmetries()? {
                out.push(Case {
                    label: format!("symmetry:{name}"),
                    probe: Probe::Variational(v),
                    kind: PointKind::Jet2,
                });
            }
            if opts.symmetry.is_none() {
                for (name, g) in &sys.frames {
                    out.push(Case {
                        label: format!("frame:{name}"),
                        probe: Probe::Variational(g.as_vector_field()),
                        kind: PointKind::Jet2,
                    });
                }
                out.push(Case {
                    label: "probe".into(),
                    probe: Probe::Variational(probe_field(n)),
                    kind: PointKind::Jet2,
                });
            }
        }
        CheckId::Symmetry => {
            sys.require_lagrangian()?;
            for (name, v, sigma) in lagrangian_symmetries()? {
                out.push(Case {
                    label: name,
                    probe: Probe::Symmetry(v, sigma),
                    kind: PointKind::Jet2,
                });
            }
        }
        CheckId::Iom | CheckId::InverseNoether => {
            for (name, f) in selected_integrals(sys, opts)? {
                let probe = if id == CheckId::Iom {
                    Probe::Iom(f)
                } else {
                    Probe::InverseNoether(f)
                };
                out.push(Case {
                    label: name,
                    probe,
                    kind: PointKind::Phase,
                });
            }
        }
        CheckId::BracketsSo3 | CheckId::BracketsSo21 => {
            require_kepler(sys, id, true)?;
            let region = if id == CheckId::BracketsSo3 { Region::Minus } else { Region::Plus };
            out.push(Case {
                label: region.name().into(),
                probe: Probe::Structure,
                kind: PointKind::Region(region),
            });
        }
        CheckId::Casimir => {
            require_kepler(sys, id, true)?;
            for region in [Region::Minus, Region::Plus] {
                let kinds = [
                    ("casimir", Probe::Casimir),
                    ("asq-identity", Probe::AsqIdentity),
                    ("action-energy", Probe::ActionEnergy),
                ];
                for (label, probe) in kinds {
                    out.push(Case {
                        label: format!("{label}:{}", region.name()),
                        probe,
                        kind: PointKind::Region(region),
                    });
                }
            }
        }
        CheckId::Bivector => {
            require_kepler(sys, id, true)?;
            for region in [Region::Minus, Region::Plus] {
                out.push(Case {
                    label: region.name().into(),
                    probe: Probe::Bivector,
                    kind: PointKind::Chart(region),
                });
            }
        }
        CheckId::KeplerLagrangian => {
            require_kepler(sys, id, false)?;
            out.push(Case {
                label: format!("kepler{}d", n),
                probe: Probe::KeplerLagrangian,
                kind: PointKind::Jet2,
            });
        }
        CheckId::FrameShift => {
            sys.require_lagrangian()?;
            let mut frames = sys.frames.clone();
            frames.push(("uniform".into(), uniform_frame(n)));
            for (a, ga) in &frames {
                for (b, gb) in &frames {
                    out.push(Case {
                        label: format!("{a}-{b}"),
                        probe: Probe::FrameShift(ga.clone(), gb.clone()),
                        kind: PointKind::Jet2,
                    });
                }
            }
        }
        CheckId::NecessaryCondition => {
            let chosen: Vec<_> = match &opts.symmetry {
                Some(name) => vec![sys.symmetry(name)?],
                None => sys.symmetries.iter().collect(),
            };
            for s in chosen {
                out.push(Case {
                    label: s.name.clone(),
                    probe: Probe::Necessary(s.phase()?),
                    kind: PointKind::Phase,
                });
            }
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "system `{}` offers nothing for check `{id}`",
            sys.name
        )));
    }
    Ok(out)
}

fn draw(s: &mut Sampler, n: usize, kind: PointKind) -> Result<Point> {
    Ok(match kind {
        PointKind::Coords(len) => Point::Coords(s.coords(n, len)),
        PointKind::Jet2 => Point::Jet2(s.jet2(n)),
        PointKind::Phase => Point::Phase(s.phase(n)),
        PointKind::Region(r) => Point::Phase(s.phase_where(n, |p| kepler_interior(p, r))?),
        PointKind::Chart(r) => Point::Phase(s.phase_where(n, |p| chart_interior(p, r))?),
    })
}

fn evaluate(sys: &System, probe: &Probe, point: &Point) -> Result<f64> {
    let phase = || match point {
        Point::Phase(p) => p,
        _ => unreachable!("phase probe on non-phase point"),
    };
    let jet2 = || match point {
        Point::Jet2(j) => j,
        _ => unreachable!("jet probe on non-jet point"),
    };
    let lag = || sys.require_lagrangian();
    match probe {
        Probe::Gradient(f) => {
            let x = point.coords();
            let ad = grad(f, &x)?;
            let fd = fd_gradient_oracle(f, &x, DEFAULT_FD_STEP)?;
            Ok(relative_gap(&ad, &fd))
        }
        Probe::Variational(v) => variational_identity_residual(lag()?, v, jet2()),
        Probe::Symmetry(v, sigma) => symmetry_residual(lag()?, v, sigma.as_ref(), jet2()),
        Probe::Iom(f) => iom_residual(&sys.hamiltonian, f, phase()),
        Probe::InverseNoether(f) => {
            let at = phase();
            let value = f.with_frame(Frame::phase(sys.dim))?.eval_f64(&at.coords())?;
            Ok(inverse_noether(&sys.hamiltonian, f, at)?.current - value)
        }
        Probe::Structure => Ok(kepler::structure_residuals(phase())?.max_abs),
        Probe::Casimir => kepler::casimir_residual(phase()),
        Probe::AsqIdentity => {
            let inv = kepler::invariants(phase())?;
            Ok(inv.asq - (2.0 * inv.msq * inv.h + 1.0))
        }
        Probe::ActionEnergy => {
            let at = phase();
            Ok(kepler::action(at)?.1 - kepler::invariants(at)?.h)
        }
        Probe::Bivector => kepler::bivector_residual(phase()),
        Probe::KeplerLagrangian => Ok(kepler::lagrangian_kepler_checks(jet2())?.max_residual()),
        Probe::FrameShift(a, b) => frame_shift(lag()?, a, b, &jet2().jet()),
        Probe::Necessary(v) => symmetry_necessary_residual(v, phase()),
    }
}

pub fn run_check(sys: &System, id: CheckId, opts: &CheckOptions) -> Result<CheckReport> {
    let tol = opts.tol.unwrap_or(id.default_tolerance());
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be non-negative, got {tol}")));
    }
    let bounds = opts.sampling.clone().unwrap_or_else(|| sys.sampling.clone());
    bounds.validate()?;
    let cases = cases(sys, id, opts)?;
    let mut sampler = Sampler::new(opts.seed, bounds);
    let mut items = Vec::with_capacity(opts.samples * cases.len());
    for _ in 0..opts.samples {
        for (c, case) in cases.iter().enumerate() {
            items.push((c, draw(&mut sampler, sys.dim, case.kind)?));
        }
    }
    let results = par::map(&items, |(c, p)| evaluate(sys, &cases[*c].probe, p));
    let mut max_abs = 0.0;
    let mut worst = None;
    for ((c, p), r) in items.iter().zip(results) {
        let r = r?;
        if !r.is_finite() {
            return Err(Error::NonFinite(format!(
                "residual of `{}` at {:?}",
                cases[*c].label,
                p.coords()
            )));
        }
        if worst.is_none() || r.abs() > max_abs {
            max_abs = r.abs();
            worst = Some(WorstPoint {
                case: cases[*c].label.clone(),
                coords: p.coords(),
            });
        }
    }
    Ok(CheckReport {
        check: id.name().into(),
        system: sys.name.clone(),
        seed: opts.seed,
        samples: opts.samples,
        tol,
        max_abs_residual: max_abs,
        worst_point: worst,
        pass: max_abs <= tol,
    })
}
