//! Manifest schema (TOML) and construction of the named objects it describes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use dkt_core::bundles::BundleWithConnection;
use dkt_core::charforms::UnitaryAutomorphism;
use dkt_core::diffk::{DKClassEven, DKClassOdd};
use dkt_core::graded::{Factor, GradedForm, Grid, Mask, Numerics, StructuredManifold};
use dkt_core::C64;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Schema tag accepted by this build.
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    #[serde(default)]
    pub numerics: NumericsSpec,
    #[serde(default)]
    pub manifolds: BTreeMap<String, ManifoldSpec>,
    #[serde(default)]
    pub bundles: BTreeMap<String, BundleSpec>,
    #[serde(default)]
    pub classes: BTreeMap<String, ClassSpec>,
    #[serde(default)]
    pub requests: Vec<RequestSpec>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NumericsSpec {
    #[serde(default = "default_circle")]
    pub circle_points: usize,
    #[serde(default = "default_theta")]
    pub sphere_theta: usize,
    #[serde(default = "default_phi")]
    pub sphere_phi: usize,
    #[serde(default = "default_interval")]
    pub interval_order: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_circle() -> usize {
    Numerics::default().circle_points
}
fn default_theta() -> usize {
    Numerics::default().sphere_theta
}
fn default_phi() -> usize {
    Numerics::default().sphere_phi
}
fn default_interval() -> usize {
    Numerics::default().interval_order
}
fn default_tolerance() -> f64 {
    1e-6
}

impl Default for NumericsSpec {
    fn default() -> Self {
        Self {
            circle_points: default_circle(),
            sphere_theta: default_theta(),
            sphere_phi: default_phi(),
            interval_order: default_interval(),
            tolerance: default_tolerance(),
            threads: None,
        }
    }
}

impl NumericsSpec {
    pub fn numerics(&self) -> Numerics {
        Numerics {
            circle_points: self.circle_points,
            sphere_theta: self.sphere_theta,
            sphere_phi: self.sphere_phi,
            interval_order: self.interval_order,
        }
    }

    /// Every size halved (at least 4, 4 and 8 points), for the second convergence level.
    pub fn coarse(&self) -> NumericsSpec {
        NumericsSpec {
            circle_points: (self.circle_points / 2).max(4),
            sphere_theta: (self.sphere_theta / 2).max(4),
            sphere_phi: (self.sphere_phi / 2).max(8),
            interval_order: (self.interval_order / 2).max(4),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.numerics().validate().map_err(|e| CliError::Validation(format!("numerics: {e}")))?;
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(CliError::Validation(format!("numerics.tolerance out of range: {}", self.tolerance)));
        }
        if let Some(t) = self.threads {
            if !(1..=256).contains(&t) {
                return Err(CliError::Validation(format!("numerics.threads out of range: {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BundleSpec {
    Trivial { manifold: String, rank: usize },
    FlatLine { manifold: String, theta: Vec<f64> },
    Monopole { manifold: String, degree: i64 },
    Poincare { manifold: String, flux: i64 },
    Opposite { of: String },
    DirectSum { of: Vec<String> },
    Tensor { of: Vec<String> },
    Pullback { of: String, manifold: String, factor_map: Vec<usize> },
}

/// One term `amplitude cos(sum_k freq_k a_k + phase)` of a form component `u^{u_degree/2} dx_coords`.
///
/// The angle `a_k` is `2 pi x_k / L` on a circle coordinate and the raw coordinate otherwise.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FormTerm {
    pub u_degree: i32,
    #[serde(default)]
    pub coords: Vec<usize>,
    pub amplitude: f64,
    #[serde(default)]
    pub freq: Vec<i64>,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AutSpec {
    Identity,
    Phase { windings: Vec<i64> },
    Diagonal { windings: Vec<Vec<i64>> },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    #[serde(default = "one")]
    pub coeff: i64,
    pub bundle: String,
    /// Required for odd classes.
    #[serde(default)]
    pub aut: Option<AutSpec>,
    #[serde(default)]
    pub phi: Vec<FormTerm>,
}

fn one() -> i64 {
    1
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub manifold: String,
    pub degree: i32,
    #[serde(default = "even")]
    pub parity: Parity,
    #[serde(default)]
    pub generators: Vec<GeneratorSpec>,
    /// Extra `j(alpha)` summand.
    #[serde(default)]
    pub j: Vec<FormTerm>,
}

fn even() -> Parity {
    Parity::Even
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RequestSpec {
    pub op: String,
    pub out: String,
    #[serde(default)]
    pub args: toml::Table,
}

/// Operations with their named arguments.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Operation {
    /// `int_M c_1` or `int_M ch` of a bundle.
    ChernIntegral {
        bundle: String,
        #[serde(default)]
        character: bool,
    },
    /// Holonomy of a bundle along a circle coordinate through a point; reports its determinant.
    Holonomy { bundle: String, coord: usize, point: Vec<f64> },
    /// Rank and `omega`-periods of a class.
    Observable { class: String },
    /// `eta-bar` of a class on an odd flat torus.
    ReducedEta {
        class: String,
        #[serde(default)]
        spin: Vec<f64>,
    },
    /// `eta-bar` of the flat circle, closed form against the zeta continuation.
    CircleEta {
        theta: f64,
        #[serde(default = "unit_length")]
        length: f64,
    },
    /// Index of the Dirac operator of a closed even fiber twisted by a class.
    FiberIndex {
        class: String,
        #[serde(default)]
        complex_spheres: bool,
    },
    /// Analytic against Kunneth pushforward for `u 1 . e1 + u x . e2` on `fiber x base`.
    IndexTheorem {
        fiber: String,
        e1: String,
        e2: String,
        #[serde(default)]
        phi: Vec<FormTerm>,
    },
    /// `D . ind . S^2` of a degree-0 class on an odd flat torus.
    OddFiberIndex {
        class: String,
        #[serde(default = "unit_length")]
        a: f64,
    },
    /// `D . S` against the identity for an odd class.
    SuspensionRoundTrip { class: String },
}

fn unit_length() -> f64 {
    1.0
}

impl Operation {
    pub fn parse(req: &RequestSpec) -> Result<Self, CliError> {
        let mut t = req.args.clone();
        if t.contains_key("op") {
            return Err(CliError::Parse(format!("request '{}': 'op' is not an argument", req.out)));
        }
        t.insert("op".into(), toml::Value::String(req.op.clone()));
        toml::Value::Table(t).try_into().map_err(|e| CliError::Parse(format!("request '{}': {e}", req.out)))
    }
}

#[derive(Clone, Debug)]
pub enum ClassValue {
    Even(DKClassEven),
    Odd(DKClassOdd),
}

/// Objects of a manifest built at one numerics level.
#[derive(Clone, Debug)]
pub struct Registry {
    pub numerics: Numerics,
    pub manifolds: BTreeMap<String, Arc<Grid>>,
    pub bundles: BTreeMap<String, BundleWithConnection>,
    pub classes: BTreeMap<String, ClassValue>,
}

fn validation<E: std::fmt::Display>(key: &str) -> impl Fn(E) -> CliError + '_ {
    move |e| CliError::Validation(format!("{key}: {e}"))
}

/// The form `sum_terms` on a grid.
pub fn build_form(grid: &Arc<Grid>, terms: &[FormTerm], total_degree: i32, key: &str) -> Result<GradedForm, CliError> {
    let m = grid.manifold();
    let n = m.dim();
    let factors = m.coordinate_factors();
    let lengths: Vec<Option<f64>> = factors
        .iter()
        .map(|&f| match m.factor(f) {
            Factor::Circle { length } => Some(length),
            _ => None,
        })
        .collect();
    let mut out = GradedForm::zero(grid, total_degree);
    for (i, t) in terms.iter().enumerate() {
        let here = format!("{key}[{i}]");
        if t.coords.iter().any(|&c| c >= n) || t.freq.len() > n {
            return Err(CliError::Validation(format!("{here}: coordinate index out of range")));
        }
        let mut mask: Mask = 0;
        for &c in &t.coords {
            if mask & (1 << c) != 0 {
                return Err(CliError::Validation(format!("{here}: repeated coordinate {c}")));
            }
            mask |= 1 << c;
        }
        if t.u_degree + t.coords.len() as i32 != total_degree {
            return Err(CliError::Validation(format!(
                "{here}: u_degree {} with {} coordinates does not give total degree {total_degree}",
                t.u_degree,
                t.coords.len()
            )));
        }
        let (amp, phase, freq, lens) = (t.amplitude, t.phase, t.freq.clone(), lengths.clone());
        let f = GradedForm::from_fn(grid, t.u_degree, mask, move |_, x| {
            let arg: f64 = freq
                .iter()
                .enumerate()
                .map(|(k, &q)| q as f64 * lens[k].map_or(x[k], |l| 2.0 * PI * x[k] / l))
                .sum::<f64>()
                + phase;
            C64::new(amp * arg.cos(), 0.0)
        })
        .map_err(validation(&here))?;
        out = out.add(&f).map_err(validation(&here))?;
    }
    Ok(out)
}

fn reference<'a, T>(map: &'a BTreeMap<String, T>, name: &str, key: &str, what: &str) -> Result<&'a T, CliError> {
    map.get(name).ok_or_else(|| CliError::Validation(format!("{key}: unknown {what} '{name}'")))
}

impl Registry {
    /// Resolves every reference and constructs all objects; errors name the offending key.
    pub fn build(m: &Manifest, numerics: Numerics) -> Result<Self, CliError> {
        if m.version != MANIFEST_VERSION {
            return Err(CliError::Validation(format!(
                "version: expected {MANIFEST_VERSION}, found {}",
                m.version
            )));
        }
        let mut manifolds = BTreeMap::new();
        for (name, spec) in &m.manifolds {
            let key = format!("manifolds.{name}");
            let sm = StructuredManifold::new(spec.factors.clone()).map_err(validation(&key))?;
            manifolds.insert(name.clone(), Grid::new(&sm, numerics).map_err(validation(&key))?);
        }
        let mut reg = Registry { numerics, manifolds, bundles: BTreeMap::new(), classes: BTreeMap::new() };
        let mut pending: Vec<&String> = m.bundles.keys().collect();
        // bundles may reference each other in any order
        while !pending.is_empty() {
            let before = pending.len();
            let mut left = Vec::new();
            for name in pending {
                let key = format!("bundles.{name}");
                let deps = bundle_deps(&m.bundles[name]);
                for d in &deps {
                    if !m.bundles.contains_key(*d) {
                        return Err(CliError::Validation(format!("{key}: unknown bundle '{d}'")));
                    }
                }
                if deps.iter().all(|d| reg.bundles.contains_key(*d)) {
                    let b = reg.bundle(&m.bundles[name], &key)?;
                    reg.bundles.insert(name.clone(), b);
                } else {
                    left.push(name);
                }
            }
            if left.len() == before {
                return Err(CliError::Validation(format!("bundles.{}: cyclic bundle references", left[0])));
            }
            pending = left;
        }
        for (name, spec) in &m.classes {
            let key = format!("classes.{name}");
            let c = reg.class(spec, &key)?;
            reg.classes.insert(name.clone(), c);
        }
        Ok(reg)
    }

    fn bundle(&self, spec: &BundleSpec, key: &str) -> Result<BundleWithConnection, CliError> {
        let grid = |name: &str| reference(&self.manifolds, name, key, "manifold");
        let b = |name: &str| reference(&self.bundles, name, key, "bundle");
        let v = validation(key);
        match spec {
            BundleSpec::Trivial { manifold, rank } => BundleWithConnection::trivial(grid(manifold)?, *rank).map_err(v),
            BundleSpec::FlatLine { manifold, theta } => {
                BundleWithConnection::flat_line(grid(manifold)?, theta).map_err(v)
            }
            BundleSpec::Monopole { manifold, degree } => {
                BundleWithConnection::monopole(grid(manifold)?, *degree).map_err(v)
            }
            BundleSpec::Poincare { manifold, flux } => BundleWithConnection::poincare(grid(manifold)?, *flux).map_err(v),
            BundleSpec::Opposite { of } => b(of)?.opposite().map_err(v),
            BundleSpec::DirectSum { of } | BundleSpec::Tensor { of } => {
                let (first, rest) =
                    of.split_first().ok_or_else(|| CliError::Validation(format!("{key}: empty operand list")))?;
                let mut acc = b(first)?.clone();
                for o in rest {
                    acc = if matches!(spec, BundleSpec::Tensor { .. }) {
                        acc.tensor(b(o)?)
                    } else {
                        acc.direct_sum(b(o)?)
                    }
                    .map_err(validation(key))?;
                }
                Ok(acc)
            }
            BundleSpec::Pullback { of, manifold, factor_map } => {
                b(of)?.pullback(grid(manifold)?, factor_map).map_err(v)
            }
        }
    }

    fn class(&self, spec: &ClassSpec, key: &str) -> Result<ClassValue, CliError> {
        let grid = reference(&self.manifolds, &spec.manifold, key, "manifold")?;
        let v = validation(key);
        match spec.parity {
            Parity::Even => {
                let mut x = DKClassEven::zero(grid, spec.degree).map_err(&v)?;
                for (i, g) in spec.generators.iter().enumerate() {
                    let here = format!("{key}.generators[{i}]");
                    if g.aut.is_some() {
                        return Err(CliError::Validation(format!("{here}: even generators take no automorphism")));
                    }
                    let b = reference(&self.bundles, &g.bundle, &here, "bundle")?;
                    same_grid(b.grid(), grid, &here)?;
                    let phi = build_form(grid, &g.phi, spec.degree - 1, &format!("{here}.phi"))?;
                    x.push(g.coeff, b.clone(), phi).map_err(validation(&here))?;
                }
                if !spec.j.is_empty() {
                    let alpha = build_form(grid, &spec.j, spec.degree - 1, &format!("{key}.j"))?;
                    x = x.add(&DKClassEven::j(&alpha).map_err(&v)?).map_err(&v)?;
                }
                Ok(ClassValue::Even(x))
            }
            Parity::Odd => {
                let mut x = DKClassOdd::zero(grid, spec.degree).map_err(&v)?;
                for (i, g) in spec.generators.iter().enumerate() {
                    let here = format!("{key}.generators[{i}]");
                    let b = reference(&self.bundles, &g.bundle, &here, "bundle")?;
                    same_grid(b.grid(), grid, &here)?;
                    let hv = validation(&here);
                    let aut = match &g.aut {
                        None => return Err(CliError::Validation(format!("{here}: odd generators need 'aut'"))),
                        Some(AutSpec::Identity) => UnitaryAutomorphism::identity(b),
                        Some(AutSpec::Phase { windings }) => UnitaryAutomorphism::phase(b, windings),
                        Some(AutSpec::Diagonal { windings }) => UnitaryAutomorphism::diagonal(b, windings),
                    }
                    .map_err(&hv)?;
                    let phi = build_form(grid, &g.phi, spec.degree - 1, &format!("{here}.phi"))?;
                    let gen = DKClassOdd::generator(aut, phi, spec.degree).map_err(&hv)?.scale(g.coeff);
                    x = x.add(&gen).map_err(&hv)?;
                }
                if !spec.j.is_empty() {
                    let alpha = build_form(grid, &spec.j, spec.degree - 1, &format!("{key}.j"))?;
                    x = x.add(&DKClassOdd::j(&alpha).map_err(&v)?).map_err(&v)?;
                }
                Ok(ClassValue::Odd(x))
            }
        }
    }
}

fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>, key: &str) -> Result<(), CliError> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{key}: bundle lives on another manifold")))
    }
}

fn bundle_deps(spec: &BundleSpec) -> Vec<&str> {
    match spec {
        BundleSpec::Opposite { of } | BundleSpec::Pullback { of, .. } => vec![of.as_str()],
        BundleSpec::DirectSum { of } | BundleSpec::Tensor { of } => of.iter().map(String::as_str).collect(),
        _ => Vec::new(),
    }
}

/// Checks that every request parses and references existing objects of the right kind.
pub fn check_requests(m: &Manifest, reg: &Registry) -> Result<Vec<Operation>, CliError> {
    let mut ops = Vec::new();
    let mut outs = std::collections::BTreeSet::new();
    for (i, r) in m.requests.iter().enumerate() {
        let key = format!("requests[{i}] ({})", r.out);
        if !outs.insert(r.out.clone()) {
            return Err(CliError::Validation(format!("{key}: duplicate output key")));
        }
        let op = Operation::parse(r)?;
        let class = |name: &str| reference(&reg.classes, name, &key, "class").map(|_| ());
        match &op {
            Operation::ChernIntegral { bundle, .. } | Operation::Holonomy { bundle, .. } => {
                reference(&reg.bundles, bundle, &key, "bundle")?;
            }
            Operation::Observable { class: c }
            | Operation::ReducedEta { class: c, .. }
            | Operation::FiberIndex { class: c, .. }
            | Operation::OddFiberIndex { class: c, .. }
            | Operation::SuspensionRoundTrip { class: c } => class(c)?,
            Operation::IndexTheorem { fiber, e1, e2, .. } => {
                reference(&reg.manifolds, fiber, &key, "manifold")?;
                class(e1)?;
                class(e2)?;
            }
            Operation::CircleEta { .. } => {}
        }
        ops.push(op);
    }
    Ok(ops)
}
