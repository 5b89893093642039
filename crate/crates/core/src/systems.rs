//! Built-in mechanical systems and JSON system definitions.
//!
//! A definition names a Lagrangian and/or Hamiltonian together with
//! reference frames, symmetry candidates and integrals of motion. The
//! built-ins are themselves definitions, so user files and built-ins go
//! through the same validation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Frame, Params, ScalarField};
use crate::geometry::{
    JetPoint, PhasePoint, ReferenceFrame, TimeComponent, VectorFieldQ, VectorFieldV,
};
use crate::hamiltonian::{
    associated_hamiltonian, ham_symmetry_current, hamiltonian_function_relative,
    HamiltonianSystem,
};
use crate::integrate::{FnObservable, NamedField, Observable, TrajectoryKind};
use crate::kepler;
use crate::lagrangian::{energy_function, momenta, symmetry_current, LagrangianSystem};
use crate::sampling::SamplingBox;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Kepler2d,
    Kepler3d,
    Oscillator,
    FreeParticle,
    Havas,
    QuadraticFrame,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Kepler2d,
        Builtin::Kepler3d,
        Builtin::Oscillator,
        Builtin::FreeParticle,
        Builtin::Havas,
        Builtin::QuadraticFrame,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Builtin::Kepler2d => "kepler2d",
            Builtin::Kepler3d => "kepler3d",
            Builtin::Oscillator => "oscillator",
            Builtin::FreeParticle => "free_particle",
            Builtin::Havas => "havas",
            Builtin::QuadraticFrame => "quadratic_frame",
        }
    }

    pub fn from_id(id: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.id() == id)
    }

    pub fn description(self) -> &'static str {
        match self {
            Builtin::Kepler2d => "planar Kepler problem, L = qt^2/2 + 1/r",
            Builtin::Kepler3d => "spatial Kepler problem",
            Builtin::Oscillator => "unit harmonic oscillator",
            Builtin::FreeParticle => "free particle in the plane",
            Builtin::Havas => "friction m0 qtt = -k qt via L = m0 exp(k t/m0) qt^2/2",
            Builtin::QuadraticFrame => "quadratic Lagrangian in a rotating frame",
        }
    }

    pub fn definition(self) -> SystemDefinition {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        let vertical = |up: &[&str]| SymmetryDefinition {
            ut: 0,
            up: s(up),
            down: None,
            sigma: None,
        };
        let horizontal = |up: &[&str]| SymmetryDefinition {
            ut: 1,
            up: s(up),
            down: None,
            sigma: None,
        };
        let mut d = SystemDefinition {
            name: self.id().to_string(),
            dim: None,
            kind: "lagrangian".into(),
            lagrangian: None,
            hamiltonian: None,
            params: BTreeMap::new(),
            frames: BTreeMap::new(),
            symmetries: BTreeMap::new(),
            integrals: BTreeMap::new(),
            sampling: None,
        };
        match self {
            Builtin::Kepler2d => {
                d.dim = Some(2);
                d.lagrangian = Some("0.5*(qt1^2 + qt2^2) + 1/sqrt(q1^2 + q2^2)".into());
                d.hamiltonian = Some(kepler::exprs::H.into());
                d.symmetries.insert("rotation".into(), vertical(&["-q2", "q1"]));
                d.symmetries.insert("time".into(), horizontal(&["0", "0"]));
                d.symmetries.insert("runge_lenz1".into(), runge_lenz_definition(1));
                d.symmetries.insert("runge_lenz2".into(), runge_lenz_definition(2));
                d.integrals.insert("H".into(), kepler::exprs::H.into());
                d.integrals.insert("M12".into(), kepler::exprs::M12.into());
                d.integrals.insert("A1".into(), kepler::exprs::A1.into());
                d.integrals.insert("A2".into(), kepler::exprs::A2.into());
            }
            Builtin::Kepler3d => {
                let r = "sqrt(q1^2 + q2^2 + q3^2)";
                d.dim = Some(3);
                d.lagrangian = Some(format!("0.5*(qt1^2 + qt2^2 + qt3^2) + 1/{r}"));
                d.hamiltonian = Some(format!("0.5*(p1^2 + p2^2 + p3^2) - 1/{r}"));
                for (a, b) in [(1, 2), (1, 3), (2, 3)] {
                    let mut up = vec!["0".to_string(); 3];
                    up[a - 1] = format!("q{b}");
                    up[b - 1] = format!("-q{a}");
                    d.symmetries.insert(
                        format!("rotation{a}{b}"),
                        SymmetryDefinition {
                            ut: 0,
                            up,
                            down: None,
                            sigma: None,
                        },
                    );
                    d.integrals
                        .insert(format!("M{a}{b}"), format!("q{a}*p{b} - q{b}*p{a}"));
                }
                d.symmetries.insert("time".into(), horizontal(&["0", "0", "0"]));
                d.integrals.insert("H".into(), d.hamiltonian.clone().unwrap());
                for a in 1..=3 {
                    d.integrals.insert(
                        format!("A{a}"),
                        format!(
                            "q{a}*(p1^2 + p2^2 + p3^2) - p{a}*(p1*q1 + p2*q2 + p3*q3) - q{a}/{r}"
                        ),
                    );
                }
            }
            Builtin::Oscillator => {
                d.dim = Some(1);
                d.lagrangian = Some("0.5*qt1^2 - 0.5*q1^2".into());
                d.hamiltonian = Some("0.5*p1^2 + 0.5*q1^2".into());
                d.symmetries.insert("time".into(), horizontal(&["0"]));
                d.integrals.insert("H".into(), "0.5*p1^2 + 0.5*q1^2".into());
            }
            Builtin::FreeParticle => {
                d.dim = Some(2);
                d.lagrangian = Some("0.5*(qt1^2 + qt2^2)".into());
                d.hamiltonian = Some("0.5*(p1^2 + p2^2)".into());
                d.symmetries.insert("translation1".into(), vertical(&["1", "0"]));
                d.symmetries.insert("translation2".into(), vertical(&["0", "1"]));
                d.symmetries.insert("rotation".into(), vertical(&["-q2", "q1"]));
                d.symmetries.insert("time".into(), horizontal(&["0", "0"]));
                d.symmetries.insert(
                    "boost1".into(),
                    SymmetryDefinition {
                        ut: 0,
                        up: s(&["t", "0"]),
                        down: None,
                        sigma: Some("q1".into()),
                    },
                );
                d.integrals.insert("H".into(), "0.5*(p1^2 + p2^2)".into());
                d.integrals.insert("p1".into(), "p1".into());
                d.integrals.insert("p2".into(), "p2".into());
                d.integrals.insert("M12".into(), kepler::exprs::M12.into());
                d.integrals.insert("G1".into(), "q1 - t*p1".into());
            }
            Builtin::Havas => {
                d.dim = Some(1);
                d.params.insert("k".into(), 1.0);
                d.params.insert("m0".into(), 1.0);
                d.lagrangian = Some("0.5*m0*exp(k*t/m0)*qt1^2".into());
                d.hamiltonian = Some("0.5*exp(-k*t/m0)*p1^2/m0".into());
                let gamma = "-(k/(2*m0))*q1";
                d.frames.insert("frame".into(), s(&[gamma]));
                d.symmetries.insert("frame".into(), horizontal(&[gamma]));
                d.integrals.insert(
                    "E_frame".into(),
                    "0.5*exp(-k*t/m0)*p1^2/m0 + (k/(2*m0))*q1*p1".into(),
                );
            }
            Builtin::QuadraticFrame => {
                d.dim = Some(2);
                d.params.insert("m".into(), 1.5);
                d.params.insert("omega".into(), 0.7);
                d.lagrangian =
                    Some("0.5*m*((qt1 + omega*q2)^2 + (qt2 - omega*q1)^2)".into());
                let h = "(p1^2 + p2^2)/(2*m) - omega*q2*p1 + omega*q1*p2";
                d.hamiltonian = Some(h.into());
                let gamma = ["-omega*q2", "omega*q1"];
                d.frames.insert("rotating".into(), s(&gamma));
                d.symmetries.insert("frame".into(), horizontal(&gamma));
                d.symmetries.insert("rotation".into(), vertical(&["-q2", "q1"]));
                d.integrals.insert("H".into(), h.into());
                d.integrals.insert("E_frame".into(), "(p1^2 + p2^2)/(2*m)".into());
                d.integrals.insert("M12".into(), kepler::exprs::M12.into());
            }
        }
        d
    }
}

fn runge_lenz_definition(a: usize) -> SymmetryDefinition {
    let (up, down) = kepler::runge_lenz_components(a);
    SymmetryDefinition {
        ut: 0,
        up,
        down: Some(down),
        sigma: None,
    }
}

/// On-disk form of a system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDefinition {
    pub name: String,
    /// Required unless `kind` names a built-in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// `lagrangian`, `hamiltonian` or `builtin:<id>`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Frame name to `Γⁱ` expressions over `(t, q)`.
    #[serde(default)]
    pub frames: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub symmetries: BTreeMap<String, SymmetryDefinition>,
    /// Integral name to a phase-space expression.
    #[serde(default)]
    pub integrals: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingBox>,
}

/// A symmetry candidate. `up` lives on `(t, q)`; when `down` is given the
/// candidate is a phase-space field with components `up` and `down` over
/// `(t, q, p)` and does not act on the Lagrangian side. `sigma` lives on
/// `(t, q, qt)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryDefinition {
    #[serde(default)]
    pub ut: u8,
    pub up: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub down: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
}

impl SystemDefinition {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("system definition: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("definitions serialize")
    }
}

#[derive(Clone, Debug)]
pub enum SymmetryField {
    /// A field on the configuration bundle, acting on both pictures via
    /// its canonical lift.
    Configuration(VectorFieldQ),
    Phase(VectorFieldV),
}

#[derive(Clone, Debug)]
pub struct Symmetry {
    pub name: String,
    pub field: SymmetryField,
    pub sigma: Option<ScalarField>,
}

impl Symmetry {
    pub fn configuration(&self) -> Option<&VectorFieldQ> {
        match &self.field {
            SymmetryField::Configuration(v) => Some(v),
            SymmetryField::Phase(_) => None,
        }
    }

    pub fn phase(&self) -> Result<VectorFieldV> {
        match &self.field {
            SymmetryField::Configuration(v) => v.canonical_lift_field(),
            SymmetryField::Phase(v) => Ok(v.clone()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct System {
    pub name: String,
    pub dim: usize,
    pub builtin: Option<Builtin>,
    pub params: Params,
    pub lagrangian: Option<LagrangianSystem>,
    pub hamiltonian: HamiltonianSystem,
    pub frames: Vec<(String, ReferenceFrame)>,
    pub symmetries: Vec<Symmetry>,
    pub integrals: Vec<(String, ScalarField)>,
    pub sampling: SamplingBox,
}

fn parse_all(texts: &[String], frame: &Frame, params: &Params) -> Result<Vec<ScalarField>> {
    texts
        .iter()
        .map(|t| ScalarField::parse(t, frame.clone(), params))
        .collect()
}

fn check_components(what: &str, n: usize, found: usize) -> Result<()> {
    if n == found {
        Ok(())
    } else {
        Err(Error::Config(format!("{what} has {found} components, expected {n}")))
    }
}

impl System {
    pub fn builtin(b: Builtin) -> System {
        let mut s = System::from_definition(&b.definition()).expect("built-in definitions are valid");
        s.builtin = Some(b);
        s
    }

    pub fn builtin_by_id(id: &str) -> Result<System> {
        Builtin::from_id(id).map(System::builtin).ok_or_else(|| {
            let ids: Vec<&str> = Builtin::ALL.iter().map(|b| b.id()).collect();
            Error::Config(format!("unknown built-in `{id}` (known: {})", ids.join(", ")))
        })
    }

    pub fn from_definition(def: &SystemDefinition) -> Result<System> {
        if let Some(id) = def.kind.strip_prefix("builtin:") {
            let b = Builtin::from_id(id)
                .ok_or_else(|| Error::Config(format!("unknown built-in `{id}`")))?;
            if def.lagrangian.is_some() || def.hamiltonian.is_some() {
                return Err(Error::Config(
                    "built-in systems take no lagrangian/hamiltonian text".into(),
                ));
            }
            let mut base = b.definition();
            if let Some(d) = def.dim {
                if Some(d) != base.dim {
                    return Err(Error::Config(format!(
                        "built-in `{id}` has dimension {}, not {d}",
                        base.dim.unwrap_or(0)
                    )));
                }
            }
            base.name = def.name.clone();
            base.params.extend(def.params.clone());
            base.frames.extend(def.frames.clone());
            base.symmetries.extend(def.symmetries.clone());
            base.integrals.extend(def.integrals.clone());
            if def.sampling.is_some() {
                base.sampling = def.sampling.clone();
            }
            let mut s = System::from_definition(&base)?;
            s.builtin = Some(b);
            return Ok(s);
        }
        let n = def
            .dim
            .ok_or_else(|| Error::Config("`dim` is required".into()))?;
        if n == 0 {
            return Err(Error::Config("`dim` must be positive".into()));
        }
        let params = def.params.clone();
        let coords = Frame::extended(n);
        for name in params.keys() {
            if !crate::expr::is_identifier(name) {
                return Err(Error::Config(format!("parameter name `{name}` is not an identifier")));
            }
            if coords.index_of(name).is_some() || Frame::jet(n).index_of(name).is_some() {
                return Err(Error::Config(format!("parameter `{name}` shadows a coordinate")));
            }
        }
        let (lagrangian, hamiltonian) = match def.kind.as_str() {
            "lagrangian" => {
                let text = def
                    .lagrangian
                    .as_deref()
                    .ok_or_else(|| Error::Config("kind `lagrangian` needs a `lagrangian`".into()))?;
                let l = LagrangianSystem::parse(n, text, &params)?;
                let h = match &def.hamiltonian {
                    Some(h) => HamiltonianSystem::new(
                        n,
                        ScalarField::parse(h, Frame::phase(n), &params)?,
                    )?,
                    None => associated_hamiltonian(&l),
                };
                (Some(l), h)
            }
            "hamiltonian" => {
                if def.lagrangian.is_some() {
                    return Err(Error::Config(
                        "kind `hamiltonian` takes no `lagrangian`".into(),
                    ));
                }
                let text = def.hamiltonian.as_deref().ok_or_else(|| {
                    Error::Config("kind `hamiltonian` needs a `hamiltonian`".into())
                })?;
                let h = ScalarField::parse(text, Frame::phase(n), &params)?;
                (None, HamiltonianSystem::new(n, h)?)
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown kind `{other}` (expected lagrangian, hamiltonian or builtin:<id>)"
                )))
            }
        };

        let mut frames = Vec::new();
        if !def.frames.contains_key("rest") {
            frames.push(("rest".to_string(), ReferenceFrame::rest(n)));
        }
        for (name, comps) in &def.frames {
            check_components(&format!("frame `{name}`"), n, comps.len())?;
            frames.push((
                name.clone(),
                ReferenceFrame::new(parse_all(comps, &Frame::config(n), &params)?)?,
            ));
        }

        let mut symmetries = Vec::new();
        for (name, sd) in &def.symmetries {
            check_components(&format!("symmetry `{name}`"), n, sd.up.len())?;
            let ut = TimeComponent::from_flag(sd.ut)?;
            let field = match &sd.down {
                None => SymmetryField::Configuration(VectorFieldQ::new(
                    ut,
                    parse_all(&sd.up, &Frame::config(n), &params)?,
                )?),
                Some(down) => {
                    check_components(&format!("symmetry `{name}` (down)"), n, down.len())?;
                    SymmetryField::Phase(VectorFieldV::new(
                        ut,
                        parse_all(&sd.up, &Frame::phase(n), &params)?,
                        parse_all(down, &Frame::phase(n), &params)?,
                    )?)
                }
            };
            let sigma = sd
                .sigma
                .as_deref()
                .map(|s| ScalarField::parse(s, Frame::jet(n), &params))
                .transpose()?;
            symmetries.push(Symmetry {
                name: name.clone(),
                field,
                sigma,
            });
        }

        let integrals = def
            .integrals
            .iter()
            .map(|(name, text)| {
                Ok((name.clone(), ScalarField::parse(text, Frame::phase(n), &params)?))
            })
            .collect::<Result<Vec<_>>>()?;

        let sampling = def.sampling.clone().unwrap_or_default();
        sampling.validate()?;

        Ok(System {
            name: def.name.clone(),
            dim: n,
            builtin: None,
            params,
            lagrangian,
            hamiltonian,
            frames,
            symmetries,
            integrals,
            sampling,
        })
    }

    pub fn from_json(text: &str) -> Result<System> {
        System::from_definition(&SystemDefinition::from_json(text)?)
    }

    pub fn kind(&self) -> &'static str {
        if self.lagrangian.is_some() {
            "lagrangian"
        } else {
            "hamiltonian"
        }
    }

    pub fn require_lagrangian(&self) -> Result<&LagrangianSystem> {
        self.lagrangian.as_ref().ok_or_else(|| {
            Error::InvalidArgument(format!("system `{}` has no Lagrangian", self.name))
        })
    }

    pub fn frame(&self, name: &str) -> Result<&ReferenceFrame> {
        self.frames
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, f)| f)
            .ok_or_else(|| self.unknown("frame", name, self.frames.iter().map(|f| &f.0)))
    }

    pub fn symmetry(&self, name: &str) -> Result<&Symmetry> {
        self.symmetries
            .iter()
            .find(|s| s.name == name)
            .ok_or_else(|| self.unknown("symmetry", name, self.symmetries.iter().map(|s| &s.name)))
    }

    pub fn integral(&self, name: &str) -> Option<&ScalarField> {
        self.integrals.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    /// A named integral, or else an expression over `(t, q, p)`.
    pub fn integral_or_expr(&self, text: &str) -> Result<(String, ScalarField)> {
        match self.integral(text) {
            Some(f) => Ok((text.to_string(), f.clone())),
            None => Ok((
                text.to_string(),
                ScalarField::parse(text, Frame::phase(self.dim), &self.params)?,
            )),
        }
    }

    fn unknown<'a>(&self, what: &str, name: &str, known: impl Iterator<Item = &'a String>) -> Error {
        let known: Vec<&str> = known.map(String::as_str).collect();
        Error::InvalidArgument(format!(
            "system `{}` has no {what} `{name}` (known: {})",
            self.name,
            known.join(", ")
        ))
    }

    /// Resolves a monitor for a trajectory of the given kind:
    /// `E:<frame>` is the energy relative to a frame, `J:<symmetry>` a
    /// symmetry current, otherwise a named integral or an expression over the
    /// trajectory's frame. On Lagrangian trajectories named integrals are
    /// evaluated at the Legendre image `(t, q, π)`.
    pub fn monitor(&self, name: &str, kind: TrajectoryKind) -> Result<Box<dyn Observable + '_>> {
        let n = self.dim;
        let label = name.to_string();
        if let Some(frame) = name.strip_prefix("E:") {
            let g = self.frame(frame)?.clone();
            return Ok(match kind {
                TrajectoryKind::Hamiltonian => Box::new(FnObservable {
                    name: label,
                    f: move |x: &[f64]| {
                        hamiltonian_function_relative(&self.hamiltonian, &g, &PhasePoint::from_coords(n, x)?)
                    },
                }),
                TrajectoryKind::Lagrangian => {
                    let l = self.require_lagrangian()?;
                    Box::new(FnObservable {
                        name: label,
                        f: move |x: &[f64]| energy_function(l, &g, &JetPoint::from_coords(n, x)?),
                    })
                }
            });
        }
        if let Some(sym) = name.strip_prefix("J:") {
            let s = self.symmetry(sym)?;
            return Ok(match kind {
                TrajectoryKind::Lagrangian => {
                    let l = self.require_lagrangian()?;
                    let v = s.configuration().cloned().ok_or_else(|| {
                        Error::InvalidArgument(format!(
                            "symmetry `{sym}` is a phase-space field; monitor it on a Hamiltonian trajectory"
                        ))
                    })?;
                    let sigma = s.sigma.clone();
                    Box::new(FnObservable {
                        name: label,
                        f: move |x: &[f64]| {
                            symmetry_current(l, &v, sigma.as_ref(), &JetPoint::from_coords(n, x)?)
                        },
                    })
                }
                TrajectoryKind::Hamiltonian => {
                    if s.sigma.is_some() {
                        return Err(Error::InvalidArgument(format!(
                            "symmetry `{sym}` carries a velocity-space sigma; monitor it on a Lagrangian trajectory"
                        )));
                    }
                    let v = s.phase()?;
                    Box::new(FnObservable {
                        name: label,
                        f: move |x: &[f64]| {
                            ham_symmetry_current(&self.hamiltonian, &v, None, &PhasePoint::from_coords(n, x)?)
                        },
                    })
                }
            });
        }
        match kind {
            TrajectoryKind::Hamiltonian => {
                let (label, f) = self.integral_or_expr(name)?;
                Ok(Box::new(NamedField::new(label, f)))
            }
            TrajectoryKind::Lagrangian => {
                let l = self.require_lagrangian()?;
                match self.integral(name) {
                    Some(f) => {
                        let f = f.clone();
                        Ok(Box::new(FnObservable {
                            name: label,
                            f: move |x: &[f64]| {
                                let jet = JetPoint::from_coords(n, x)?;
                                let mut y = vec![jet.t];
                                y.extend_from_slice(&jet.q);
                                y.extend(momenta(l, &jet)?);
                                f.eval_f64(&y)
                            },
                        }))
                    }
                    None => Ok(Box::new(NamedField::new(
                        label,
                        ScalarField::parse(name, Frame::jet(n), &self.params)?,
                    ))),
                }
            }
        }
    }

    pub fn is_planar_kepler(&self) -> bool {
        self.builtin == Some(Builtin::Kepler2d)
    }

    pub fn is_kepler(&self) -> bool {
        matches!(self.builtin, Some(Builtin::Kepler2d | Builtin::Kepler3d))
    }

    /// The built-in fields of the system: ℒ, ℋ, integrals and `σ`s.
    pub fn scalar_fields(&self) -> Vec<(String, ScalarField)> {
        let mut out = Vec::new();
        if let Some(l) = &self.lagrangian {
            out.push(("L".to_string(), l.lagrangian().clone()));
        }
        out.push(("H".to_string(), self.hamiltonian.hamiltonian().clone()));
        out.extend(self.integrals.iter().map(|(n, f)| (format!("integral:{n}"), f.clone())));
        for s in &self.symmetries {
            if let Some(sig) = &s.sigma {
                out.push((format!("sigma:{}", s.name), sig.clone()));
            }
        }
        out
    }

    pub fn summary(&self) -> SystemSummary {
        SystemSummary {
            name: self.name.clone(),
            dim: self.dim,
            kind: match self.builtin {
                Some(b) => format!("builtin:{}", b.id()),
                None => self.kind().to_string(),
            },
            frames: self.frames.iter().map(|f| f.0.clone()).collect(),
            symmetries: self.symmetries.iter().map(|s| s.name.clone()).collect(),
            integrals: self.integrals.iter().map(|i| i.0.clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemSummary {
    pub name: String,
    pub dim: usize,
    pub kind: String,
    pub frames: Vec<String>,
    pub symmetries: Vec<String>,
    pub integrals: Vec<String>,
}
