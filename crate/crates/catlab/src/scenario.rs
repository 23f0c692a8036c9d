//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "cat"
//!
//! [space]
//! labels = ["alive", "dead"]          # or factors = [["undecayed", "decayed"], ["alive", "dead"]]
//!
//! [states]
//! alive = [1, 0]
//! psi_cat_plus = [1, 1]               # normalized on load
//! tilted = { alive = "0.6", dead = "0.8i" }
//!
//! [mixtures]
//! rho_cat = [{ weight = 0.5, state = "alive" }, { weight = 0.5, state = "dead" }]
//!
//! [measurements]
//! P_L = { basis = true }
//! "P_cat+" = { states = ["psi_cat_plus"], labels = ["S"] }
//!
//! [unitaries]
//! flip = [[0, 1], [1, 0]]
//!
//! [lab]
//! allowed = ["P_L"]
//!
//! [[forbidden]]
//! from = "dead"
//! to = "alive"
//!
//! [protocols.resurrect3]
//! initial = "dead"
//! assume = ["P_cat+"]
//! steps = [{ repeat = 3, block = [{ measure = "P_cat+" }, { measure = "P_L" }, { stop_if = "alive" }] }]
//! ```
//!
//! Complex entries are numbers or strings of the form `"a"`, `"bi"`, `"a+bi"`.

use std::fmt::Write as _;
use std::ops::Range;
use std::path::Path;

use catlab_core::linalg::{CMatrix, C64};
use catlab_core::protocols::{ProtocolSpec, Scenario, ScenarioProtocol, Step};
use catlab_core::qstate::{DensityMatrix, HilbertSpace, Operator, Space, State, StateVector};
use catlab_core::{Laboratory, ProjectiveMeasurement};
use catlab_core::lab::LabOperation;
use toml::de::{DeTable, DeValue};
use toml::Spanned;

use crate::error::{CliError, CliResult, Location};

type Value<'i> = Spanned<DeValue<'i>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKind {
    Space,
    State,
    Mixture,
    Measurement,
    Unitary,
    Lab,
    Forbidden,
    Protocol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub kind: DeclKind,
    pub name: String,
    pub at: Location,
}

/// A loaded scenario plus where each of its declarations sits in the source.
#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    pub declarations: Vec<Declaration>,
}

impl ScenarioFile {
    pub fn location_of(&self, kind: DeclKind, name: &str) -> Option<Location> {
        self.declarations.iter().find(|d| d.kind == kind && d.name == name).map(|d| d.at)
    }
}

/// Reads and parses a scenario file, returning it with the raw bytes for hashing.
pub fn load_scenario(path: &Path) -> CliResult<(ScenarioFile, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    let origin = path.display().to_string();
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Parse {
        origin: origin.clone(),
        at: Location::of_offset("", 0),
        message: format!("file is not UTF-8 ({e})"),
    })?;
    let default_name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    let file = parse_scenario_named(text, &origin, default_name)?;
    Ok((file, bytes))
}

pub fn parse_scenario(text: &str, origin: &str) -> CliResult<ScenarioFile> {
    parse_scenario_named(text, origin, "scenario")
}

fn parse_scenario_named(text: &str, origin: &str, default_name: &str) -> CliResult<ScenarioFile> {
    let doc = DeTable::parse(text).map_err(|e| CliError::Parse {
        origin: origin.into(),
        at: Location::of_offset(text, e.span().map_or(0, |s| s.start)),
        message: e.message().trim().to_string(),
    })?;
    let mut p = Parser { text, origin, decls: Vec::new() };
    let scenario = p.document(doc.get_ref(), default_name)?;
    Ok(ScenarioFile { scenario, declarations: p.decls })
}

const SECTIONS: [&str; 9] =
    ["name", "space", "states", "mixtures", "measurements", "unitaries", "lab", "forbidden", "protocols"];

struct Parser<'t> {
    text: &'t str,
    origin: &'t str,
    decls: Vec<Declaration>,
}

fn field<'a, 'i>(table: &'a DeTable<'i>, key: &str) -> Option<&'a Value<'i>> {
    table.iter().find(|(k, _)| k.get_ref().as_ref() == key).map(|(_, v)| v)
}

fn entries<'a, 'i>(table: &'a DeTable<'i>) -> impl Iterator<Item = (&'a str, Range<usize>, &'a Value<'i>)> {
    table.iter().map(|(k, v)| (k.get_ref().as_ref(), k.span(), v))
}

impl<'t> Parser<'t> {
    fn at(&self, span: &Range<usize>) -> Location {
        Location::of_offset(self.text, span.start)
    }

    fn syntax(&self, span: &Range<usize>, message: impl Into<String>) -> CliError {
        CliError::Parse { origin: self.origin.into(), at: self.at(span), message: message.into() }
    }

    fn invalid(&self, span: &Range<usize>, source: catlab_core::Error) -> CliError {
        CliError::Validation { origin: self.origin.into(), at: self.at(span), source }
    }

    fn declare(&mut self, kind: DeclKind, name: &str, span: &Range<usize>) {
        let at = self.at(span);
        self.decls.push(Declaration { kind, name: name.into(), at });
    }

    fn table<'a, 'i>(&self, v: &'a Value<'i>, what: &str) -> CliResult<&'a DeTable<'i>> {
        v.get_ref().as_table().ok_or_else(|| self.syntax(&v.span(), format!("{what} must be a table")))
    }

    fn array<'a, 'i>(&self, v: &'a Value<'i>, what: &str) -> CliResult<&'a [Value<'i>]> {
        v.get_ref().as_array().map(|a| &a[..]).ok_or_else(|| self.syntax(&v.span(), format!("{what} must be an array")))
    }

    fn string<'a>(&self, v: &'a Value<'_>, what: &str) -> CliResult<&'a str> {
        v.get_ref().as_str().ok_or_else(|| self.syntax(&v.span(), format!("{what} must be a string")))
    }

    fn strings(&self, v: &Value<'_>, what: &str) -> CliResult<Vec<String>> {
        self.array(v, what)?.iter().map(|x| self.string(x, what).map(str::to_owned)).collect()
    }

    fn real(&self, v: &Value<'_>, what: &str) -> CliResult<f64> {
        let x = match v.get_ref() {
            DeValue::Integer(i) => i64::from_str_radix(i.as_str(), i.radix()).ok().map(|n| n as f64),
            DeValue::Float(f) => f.as_str().parse::<f64>().ok(),
            DeValue::String(s) => parse_complex(s).filter(|z| z.im == 0.0).map(|z| z.re),
            _ => None,
        };
        x.filter(|x| x.is_finite())
            .ok_or_else(|| self.syntax(&v.span(), format!("{what} must be a finite real number")))
    }

    fn complex(&self, v: &Value<'_>) -> CliResult<C64> {
        match v.get_ref() {
            DeValue::String(s) => parse_complex(s)
                .ok_or_else(|| self.syntax(&v.span(), format!("`{s}` is not a complex literal like \"0.5-0.5i\""))),
            _ => self.real(v, "amplitude").map(|x| C64::new(x, 0.0)),
        }
    }

    fn matrix(&self, v: &Value<'_>, space: &Space) -> CliResult<CMatrix> {
        let rows = self.array(v, "matrix")?;
        let mut data = Vec::with_capacity(rows.len() * rows.len());
        for row in rows {
            let row = self.array(row, "matrix row")?;
            if row.len() != rows.len() {
                return Err(self.syntax(&v.span(), "matrix must be square"));
            }
            for x in row {
                data.push(self.complex(x)?);
            }
        }
        if rows.len() != space.dim() {
            let err = catlab_core::Error::DimensionMismatch { expected: space.dim(), found: rows.len() };
            return Err(self.invalid(&v.span(), err));
        }
        Ok(CMatrix::from_row_major(rows.len(), data).expect("square by construction"))
    }

    fn document(&mut self, doc: &DeTable<'_>, default_name: &str) -> CliResult<Scenario> {
        for (key, span, _) in entries(doc) {
            if !SECTIONS.contains(&key) {
                return Err(self.syntax(&span, format!("unknown section `{key}`")));
            }
        }
        let name = match field(doc, "name") {
            Some(v) => self.string(v, "name")?.to_owned(),
            None => default_name.to_owned(),
        };
        let space_v = field(doc, "space").ok_or_else(|| self.syntax(&(0..0), "missing [space] section"))?;
        let space = self.space(space_v)?;

        let mut states: Vec<(String, State)> = Vec::new();
        if let Some(v) = field(doc, "states") {
            for (n, span, body) in entries(self.table(v, "[states]")?) {
                self.declare(DeclKind::State, n, &span);
                let psi = self.state(body, &space)?;
                states.push((n.to_owned(), State::Pure(psi)));
            }
        }
        if let Some(v) = field(doc, "mixtures") {
            for (n, span, body) in entries(self.table(v, "[mixtures]")?) {
                if states.iter().any(|(m, _)| m == n) {
                    return Err(self.invalid(&span, catlab_core::Error::DuplicateName(n.into())));
                }
                self.declare(DeclKind::Mixture, n, &span);
                let rho = self.mixture(body, &space, &states)?;
                states.push((n.to_owned(), State::Mixed(rho)));
            }
        }

        let mut measurements = Vec::new();
        if let Some(v) = field(doc, "measurements") {
            for (n, span, body) in entries(self.table(v, "[measurements]")?) {
                self.declare(DeclKind::Measurement, n, &span);
                let m = self.measurement(body, &space, &states)?;
                measurements.push((n.to_owned(), m));
            }
        }
        let mut unitaries = Vec::new();
        if let Some(v) = field(doc, "unitaries") {
            for (n, span, body) in entries(self.table(v, "[unitaries]")?) {
                if measurements.iter().any(|(m, _)| m == n) {
                    return Err(self.invalid(&span, catlab_core::Error::DuplicateName(n.into())));
                }
                self.declare(DeclKind::Unitary, n, &span);
                let u = Operator::unitary(&space, self.matrix(body, &space)?).map_err(|e| self.invalid(&body.span(), e))?;
                unitaries.push((n.to_owned(), u));
            }
        }

        let mut lab = Laboratory::new(&space);
        match field(doc, "lab") {
            Some(v) => {
                self.declare(DeclKind::Lab, "lab", &v.span());
                let t = self.table(v, "[lab]")?;
                for (key, span, _) in entries(t) {
                    if key != "allowed" {
                        return Err(self.syntax(&span, format!("unknown [lab] key `{key}`")));
                    }
                }
                if let Some(allowed) = field(t, "allowed") {
                    for item in self.array(allowed, "allowed")? {
                        let n = self.string(item, "allowed operation")?;
                        let added = if let Some((_, m)) = measurements.iter().find(|(m, _)| m == n) {
                            lab.add_measurement(n, m.clone())
                        } else if let Some((_, u)) = unitaries.iter().find(|(u, _)| u == n) {
                            lab.add_unitary(n, u.clone())
                        } else {
                            Err(catlab_core::Error::UnknownName(n.into()))
                        };
                        added.map_err(|e| self.invalid(&item.span(), e))?;
                    }
                }
            }
            None => {
                for (n, m) in &measurements {
                    lab.add_measurement(n.clone(), m.clone())?;
                }
                for (n, u) in &unitaries {
                    lab.add_unitary(n.clone(), u.clone())?;
                }
            }
        }

        if let Some(v) = field(doc, "forbidden") {
            for item in self.array(v, "[[forbidden]]")? {
                let t = self.table(item, "forbidden transition")?;
                let end = |key: &str| -> CliResult<StateVector> {
                    let v = field(t, key).ok_or_else(|| self.syntax(&item.span(), format!("forbidden transition needs `{key}`")))?;
                    let n = self.string(v, key)?;
                    self.pure_named(&states, n, &v.span())
                };
                let (from, to) = (end("from")?, end("to")?);
                let label = format!("{} -> {}", self.string(field(t, "from").unwrap(), "from")?, self.string(field(t, "to").unwrap(), "to")?);
                self.declare(DeclKind::Forbidden, &label, &item.span());
                lab.forbid(from, to).map_err(|e| self.invalid(&item.span(), e))?;
            }
        }

        let mut sc = Scenario { name, space, states, measurements, unitaries, lab, protocols: Vec::new() };
        if let Some(v) = field(doc, "protocols") {
            for (n, span, body) in entries(self.table(v, "[protocols]")?) {
                self.declare(DeclKind::Protocol, n, &span);
                let proto = self.protocol(body, &sc)?;
                sc.protocols.push((n.to_owned(), proto));
            }
        }
        Ok(sc)
    }

    fn space(&mut self, v: &Value<'_>) -> CliResult<Space> {
        self.declare(DeclKind::Space, "space", &v.span());
        let t = self.table(v, "[space]")?;
        let built = match (field(t, "labels"), field(t, "factors")) {
            (Some(l), None) => HilbertSpace::new(self.strings(l, "labels")?),
            (None, Some(f)) => {
                let factors = self
                    .array(f, "factors")?
                    .iter()
                    .map(|x| self.strings(x, "factor labels"))
                    .collect::<CliResult<Vec<_>>>()?;
                HilbertSpace::product(factors)
            }
            _ => return Err(self.syntax(&v.span(), "[space] needs exactly one of `labels` or `factors`")),
        };
        built.map_err(|e| self.invalid(&v.span(), e))
    }

    fn state(&self, v: &Value<'_>, space: &Space) -> CliResult<StateVector> {
        let amps = match v.get_ref() {
            DeValue::Array(a) => a.iter().map(|x| self.complex(x)).collect::<CliResult<Vec<_>>>()?,
            DeValue::Table(t) => {
                let mut amps = vec![C64::new(0.0, 0.0); space.dim()];
                for (label, span, x) in entries(t) {
                    let i = space
                        .index_of(label)
                        .ok_or_else(|| self.invalid(&span, catlab_core::Error::UnknownName(label.into())))?;
                    amps[i] = self.complex(x)?;
                }
                amps
            }
            _ => return Err(self.syntax(&v.span(), "a state is an amplitude array or a {label = amplitude} table")),
        };
        StateVector::new(space, amps).map_err(|e| self.invalid(&v.span(), e))
    }

    fn pure_named(&self, states: &[(String, State)], name: &str, span: &Range<usize>) -> CliResult<StateVector> {
        match states.iter().find(|(n, _)| n == name) {
            Some((_, State::Pure(p))) => Ok(p.clone()),
            Some(_) => Err(self.invalid(span, catlab_core::Error::InvalidArgument(format!("`{name}` is a mixture, a pure state is required")))),
            None => Err(self.invalid(span, catlab_core::Error::UnknownName(name.into()))),
        }
    }

    fn mixture(&self, v: &Value<'_>, space: &Space, states: &[(String, State)]) -> CliResult<DensityMatrix> {
        match v.get_ref() {
            DeValue::Array(parts) => {
                let mut weighted = Vec::with_capacity(parts.len());
                for part in parts.iter() {
                    let t = self.table(part, "mixture component")?;
                    let w = field(t, "weight").ok_or_else(|| self.syntax(&part.span(), "mixture component needs `weight`"))?;
                    let s = field(t, "state").ok_or_else(|| self.syntax(&part.span(), "mixture component needs `state`"))?;
                    let psi = self.pure_named(states, self.string(s, "state")?, &s.span())?;
                    weighted.push((self.real(w, "weight")?, psi));
                }
                DensityMatrix::mixture(&weighted).map_err(|e| self.invalid(&v.span(), e))
            }
            DeValue::Table(t) => {
                let m = field(t, "matrix").ok_or_else(|| self.syntax(&v.span(), "mixture table needs `matrix`"))?;
                DensityMatrix::from_matrix(space, self.matrix(m, space)?).map_err(|e| self.invalid(&v.span(), e))
            }
            _ => Err(self.syntax(&v.span(), "a mixture is a list of {weight, state} or {matrix = ...}")),
        }
    }

    fn measurement(&self, v: &Value<'_>, space: &Space, states: &[(String, State)]) -> CliResult<ProjectiveMeasurement> {
        let t = self.table(v, "measurement")?;
        let span = v.span();
        if let Some(b) = field(t, "basis") {
            if b.get_ref().as_bool() != Some(true) {
                return Err(self.syntax(&b.span(), "`basis` must be true"));
            }
            return Ok(ProjectiveMeasurement::basis(space));
        }
        if let Some(s) = field(t, "states") {
            let names = self.strings(s, "states")?;
            let labels = match field(t, "labels") {
                Some(l) => self.strings(l, "labels")?,
                None => names.clone(),
            };
            let vecs = names
                .iter()
                .map(|n| self.pure_named(states, n, &s.span()))
                .collect::<CliResult<Vec<_>>>()?;
            let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
            return ProjectiveMeasurement::from_states(&vecs, &labels).map_err(|e| self.invalid(&span, e));
        }
        if let Some(p) = field(t, "projectors") {
            let mut outcomes = Vec::new();
            for item in self.array(p, "projectors")? {
                let o = self.table(item, "projector")?;
                let label = field(o, "label").ok_or_else(|| self.syntax(&item.span(), "projector needs `label`"))?;
                let mat = field(o, "matrix").ok_or_else(|| self.syntax(&item.span(), "projector needs `matrix`"))?;
                let op = Operator::projector(space, self.matrix(mat, space)?).map_err(|e| self.invalid(&mat.span(), e))?;
                outcomes.push((self.string(label, "label")?.to_owned(), op));
            }
            return ProjectiveMeasurement::new(space, outcomes).map_err(|e| self.invalid(&span, e));
        }
        Err(self.syntax(&span, "measurement needs one of `basis`, `states` or `projectors`"))
    }

    fn protocol(&self, v: &Value<'_>, sc: &Scenario) -> CliResult<ScenarioProtocol> {
        let t = self.table(v, "protocol")?;
        let steps = match field(t, "steps") {
            Some(s) => self.steps(s)?,
            None => Vec::new(),
        };
        let assume = match field(t, "assume") {
            Some(a) => self.strings(a, "assume")?,
            None => Vec::new(),
        };
        let initial = match field(t, "initial") {
            Some(i) => {
                let n = self.string(i, "initial")?;
                sc.state(n).map_err(|e| self.invalid(&i.span(), e))?;
                Some(n.to_owned())
            }
            None => None,
        };
        let proto = ScenarioProtocol { spec: ProtocolSpec::new(steps), assume, initial };
        let lab = sc.lab_for(&proto).map_err(|e| self.invalid(&v.span(), e))?;
        // resolve names and the unrolled length now rather than at run time
        proto.spec.check(&lab).map_err(|e| self.invalid(&v.span(), e))?;
        Ok(proto)
    }

    fn steps(&self, v: &Value<'_>) -> CliResult<Vec<Step>> {
        self.array(v, "steps")?.iter().map(|s| self.step(s)).collect()
    }

    fn step(&self, v: &Value<'_>) -> CliResult<Step> {
        let t = self.table(v, "step")?;
        let keys: Vec<&str> = entries(t).map(|(k, _, _)| k).collect();
        let one = |key: &str| -> CliResult<String> { Ok(self.string(field(t, key).unwrap(), key)?.to_owned()) };
        match keys.as_slice() {
            ["measure"] => Ok(Step::Measure(one("measure")?)),
            ["unitary"] => Ok(Step::Unitary(one("unitary")?)),
            ["stop_if"] => Ok(Step::StopIf(one("stop_if")?)),
            ["repeat", "block"] | ["block", "repeat"] => {
                let n = field(t, "repeat").unwrap();
                let count = match n.get_ref().as_integer().and_then(|i| u32::from_str_radix(i.as_str(), i.radix()).ok()) {
                    Some(c) => c as usize,
                    None => return Err(self.syntax(&n.span(), "repeat count must be a non-negative integer")),
                };
                Ok(Step::Repeat { count, block: self.steps(field(t, "block").unwrap())? })
            }
            _ => Err(self.syntax(&v.span(), "a step is {measure}, {unitary}, {stop_if} or {repeat, block}")),
        }
    }
}

/// Parses `"a"`, `"bi"`, `"a+bi"`, `"a-bi"`; whitespace is ignored.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let finite = |x: f64| x.is_finite().then_some(x);
    let Some(body) = s.strip_suffix('i') else {
        return finite(s.parse().ok()?).map(|re| C64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (finite(body[..k].parse().ok()?)?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => finite(x.parse().ok()?)?,
    };
    Some(C64::new(re, im))
}

/// Inverse of [`parse_complex`], exact for every finite pair.
pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{}{:?}i", z.re, sign, z.im.abs())
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if c.is_control() => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn value(z: C64) -> String {
    if z.im == 0.0 && !z.im.is_sign_negative() {
        format!("{:?}", z.re)
    } else {
        quote(&format_complex(z))
    }
}

fn list<T>(items: impl IntoIterator<Item = T>, f: impl Fn(T) -> String) -> String {
    let parts: Vec<String> = items.into_iter().map(f).collect();
    format!("[{}]", parts.join(", "))
}

fn matrix_literal(m: &CMatrix) -> String {
    list(0..m.dim(), |i| list(m.row(i).iter().copied(), value))
}

fn step_literal(step: &Step) -> String {
    match step {
        Step::Measure(n) => format!("{{ measure = {} }}", quote(n)),
        Step::Unitary(n) => format!("{{ unitary = {} }}", quote(n)),
        Step::StopIf(l) => format!("{{ stop_if = {} }}", quote(l)),
        Step::Repeat { count, block } => format!("{{ repeat = {count}, block = {} }}", list(block, step_literal)),
    }
}

/// Writes `sc` back as a scenario file.
///
/// States are written by amplitude, mixtures and measurements by explicit
/// matrices, so reloading reproduces every number bit for bit.
pub fn to_toml(sc: &Scenario) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "name = {}\n", quote(&sc.name));
    out.push_str("[space]\n");
    if sc.space.is_product() {
        let factors = list(sc.space.factors(), |f| list(f, |l| quote(l.as_str())));
        let _ = writeln!(out, "factors = {factors}");
    } else {
        let _ = writeln!(out, "labels = {}", list(sc.space.labels(), |l| quote(l.as_str())));
    }

    // forbidden endpoints need names; synthesize any the scenario lacks.
    // Matching is exact, not up to phase, so the reloaded lab is identical.
    let mut extra: Vec<(String, StateVector)> = Vec::new();
    let name_for = |psi: &StateVector, extra: &mut Vec<(String, StateVector)>| -> String {
        let declared = sc.states.iter().find(|(_, s)| s.as_pure() == Some(psi));
        if let Some((n, _)) = declared {
            return n.clone();
        }
        if let Some((n, _)) = extra.iter().find(|(_, s)| s == psi) {
            return n.clone();
        }
        let taken = |n: &str| sc.states.iter().any(|(m, _)| m == n) || extra.iter().any(|(m, _)| m == n);
        let n = (extra.len()..).map(|i| format!("_endpoint{i}")).find(|n| !taken(n)).expect("unbounded");
        extra.push((n.clone(), psi.clone()));
        n
    };
    let forbidden: Vec<(String, String)> = sc
        .lab
        .forbidden()
        .iter()
        .map(|t| (name_for(&t.from, &mut extra), name_for(&t.to, &mut extra)))
        .collect();

    let pure: Vec<(&str, &StateVector)> = sc
        .states
        .iter()
        .filter_map(|(n, s)| s.as_pure().map(|p| (n.as_str(), p)))
        .chain(extra.iter().map(|(n, s)| (n.as_str(), s)))
        .collect();
    if !pure.is_empty() {
        out.push_str("\n[states]\n");
        for (n, psi) in pure {
            let _ = writeln!(out, "{} = {}", quote(n), list(psi.amplitudes().iter().copied(), value));
        }
    }
    let mixed: Vec<(&str, &DensityMatrix)> = sc
        .states
        .iter()
        .filter_map(|(n, s)| match s {
            State::Mixed(m) => Some((n.as_str(), m)),
            State::Pure(_) => None,
        })
        .collect();
    if !mixed.is_empty() {
        out.push_str("\n[mixtures]\n");
        for (n, rho) in mixed {
            let _ = writeln!(out, "{} = {{ matrix = {} }}", quote(n), matrix_literal(rho.matrix()));
        }
    }
    if !sc.measurements.is_empty() {
        out.push_str("\n[measurements]\n");
        for (n, m) in &sc.measurements {
            let projectors = list(m.outcomes(), |o| {
                format!("{{ label = {}, matrix = {} }}", quote(&o.label), matrix_literal(o.projector.matrix()))
            });
            let _ = writeln!(out, "{} = {{ projectors = {projectors} }}", quote(n));
        }
    }
    if !sc.unitaries.is_empty() {
        out.push_str("\n[unitaries]\n");
        for (n, u) in &sc.unitaries {
            let _ = writeln!(out, "{} = {}", quote(n), matrix_literal(u.matrix()));
        }
    }
    let allowed = list(sc.lab.operations(), |op: &LabOperation| quote(op.name()));
    let _ = writeln!(out, "\n[lab]\nallowed = {allowed}");
    for (from, to) in forbidden {
        let _ = writeln!(out, "\n[[forbidden]]\nfrom = {}\nto = {}", quote(&from), quote(&to));
    }
    for (n, p) in &sc.protocols {
        let _ = writeln!(out, "\n[protocols.{}]", quote(n));
        if let Some(i) = &p.initial {
            let _ = writeln!(out, "initial = {}", quote(i));
        }
        if !p.assume.is_empty() {
            let _ = writeln!(out, "assume = {}", list(&p.assume, |a| quote(a)));
        }
        let _ = writeln!(out, "steps = {}", list(&p.spec.steps, step_literal));
    }
    out
}

/// Checks two scenarios declare the same objects, numbers agreeing within
/// `tol` entrywise (states compared up to global phase).
pub fn equivalent(a: &Scenario, b: &Scenario, tol: f64) -> Result<(), String> {
    if a.space != b.space {
        return Err("spaces differ".into());
    }
    let same_vec = |x: &StateVector, y: &StateVector| {
        let (x, y) = (x.canonical(), y.canonical());
        x.amplitudes().iter().zip(y.amplitudes()).all(|(p, q)| (p - q).norm() <= tol)
    };
    let mut names_a: Vec<&str> = a.states.iter().map(|(n, _)| n.as_str()).collect();
    let mut names_b: Vec<&str> = b.states.iter().map(|(n, _)| n.as_str()).collect();
    names_a.sort_unstable();
    names_b.sort_unstable();
    if names_a != names_b {
        return Err(format!("state names differ: {names_a:?} vs {names_b:?}"));
    }
    for (n, s) in &a.states {
        let ok = match (s, b.state(n).expect("same names")) {
            (State::Pure(x), State::Pure(y)) => same_vec(x, y),
            (State::Mixed(x), State::Mixed(y)) => x.matrix().max_abs_diff(y.matrix()) <= tol,
            _ => false,
        };
        if !ok {
            return Err(format!("state `{n}` differs"));
        }
    }
    let same_measurement = |x: &ProjectiveMeasurement, y: &ProjectiveMeasurement| {
        x.len() == y.len()
            && x.outcomes().iter().zip(y.outcomes()).all(|(p, q)| {
                p.label == q.label && p.projector.matrix().max_abs_diff(q.projector.matrix()) <= tol
            })
    };
    if a.measurements.len() != b.measurements.len() {
        return Err("measurement counts differ".into());
    }
    for (n, m) in &a.measurements {
        match b.measurement(n) {
            Ok(other) if same_measurement(m, other) => {}
            _ => return Err(format!("measurement `{n}` differs")),
        }
    }
    if a.unitaries.len() != b.unitaries.len() {
        return Err("unitary counts differ".into());
    }
    for (n, u) in &a.unitaries {
        match b.unitary(n) {
            Ok(other) if u.matrix().max_abs_diff(other.matrix()) <= tol => {}
            _ => return Err(format!("unitary `{n}` differs")),
        }
    }
    let ops_a: Vec<&str> = a.lab.operations().iter().map(LabOperation::name).collect();
    let ops_b: Vec<&str> = b.lab.operations().iter().map(LabOperation::name).collect();
    if ops_a != ops_b {
        return Err(format!("lab operations differ: {ops_a:?} vs {ops_b:?}"));
    }
    let fa = a.lab.forbidden();
    let fb = b.lab.forbidden();
    if fa.len() != fb.len() || fa.iter().zip(fb).any(|(x, y)| !same_vec(&x.from, &y.from) || !same_vec(&x.to, &y.to)) {
        return Err("forbidden transitions differ".into());
    }
    let mut pa = a.protocols.clone();
    let mut pb = b.protocols.clone();
    pa.sort_by(|x, y| x.0.cmp(&y.0));
    pb.sort_by(|x, y| x.0.cmp(&y.0));
    if pa != pb {
        return Err("protocols differ".into());
    }
    Ok(())
}
