//! Execution of manifest requests at two grid levels.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use dkt_core::bundles::BundleWithConnection;
use dkt_core::charforms::{c1_form, chern_form};
use dkt_core::diffk::{circle_cycles, DKClassEven, DKClassOdd, ReferenceCycle};
use dkt_core::graded::{circle_distance, frac, EtaValue, Grid};
use dkt_core::index::{verify_index_theorem, FiberGeometry, KunnethBasis, KunnethClass};
use dkt_core::linalg::det;
use dkt_core::spectral::{circle_eta_zeta, eta_class, reduced_eta, SpectralModel};
use serde_json::Value;

use crate::manifest::{build_form, check_requests, ClassValue, Manifest, NumericsSpec, Operation, Registry};
use crate::report::{self, richardson, Convergence, Quantity, Report, RequestReport};
use crate::CliError;

/// Overrides from the command line.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    /// Points per circle factor; sphere azimuthal points become half of it.
    pub grid: Option<usize>,
    /// Polar nodes per sphere cap (two panels of half as many).
    pub quad: Option<usize>,
    pub tol: Option<f64>,
    pub threads: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, mut n: NumericsSpec) -> NumericsSpec {
        if let Some(g) = self.grid {
            n.circle_points = g;
            n.sphere_phi = (g / 2).max(2);
        }
        if let Some(q) = self.quad {
            n.sphere_theta = (q / 2).max(2);
        }
        if let Some(t) = self.tol {
            n.tolerance = t;
        }
        if self.threads.is_some() {
            n.threads = self.threads;
        }
        n
    }
}

pub fn parse_manifest(text: &str) -> Result<Manifest, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

/// Result of one operation at one grid level.
struct Outcome {
    values: BTreeMap<String, Quantity>,
    /// The scalar followed across grid levels, with its residual and whether it lives in `R/Z`.
    primary: Option<(String, f64, f64, bool)>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { values: BTreeMap::new(), primary: None, notes: Vec::new() }
    }

    fn put(&mut self, name: &str, value: Value, residual: f64, checked: bool) {
        self.values.insert(name.into(), Quantity { value, residual, checked });
    }
}

fn even<'a>(reg: &'a Registry, name: &str) -> Result<&'a DKClassEven, CliError> {
    match &reg.classes[name] {
        ClassValue::Even(x) => Ok(x),
        ClassValue::Odd(_) => Err(CliError::Validation(format!("class '{name}' must be even"))),
    }
}

fn odd<'a>(reg: &'a Registry, name: &str) -> Result<&'a DKClassOdd, CliError> {
    match &reg.classes[name] {
        ClassValue::Odd(x) => Ok(x),
        ClassValue::Even(_) => Err(CliError::Validation(format!("class '{name}' must be odd"))),
    }
}

fn lattice_distance(l: &dkt_core::graded::LaurentScalar, key: i32) -> f64 {
    l.terms()
        .map(|(k, c)| if k == key { (c.re - c.re.round()).abs().max(c.im.abs()) } else { c.norm() })
        .fold(0.0, f64::max)
}

fn chern_integral(b: &BundleWithConnection, character: bool) -> Result<Outcome, CliError> {
    let n = b.manifold().dim() as i32;
    let mut o = Outcome::new();
    if character {
        if !b.manifold().is_closed() {
            return Err(CliError::Numerical(dkt_core::DktError::NotClosed("character integral".into())));
        }
        let v = chern_form(b, 0)?.integrate()?;
        let r = lattice_distance(&v, -n);
        o.primary = Some(("top".into(), v.real_coeff(-n), r, false));
        o.put("integral", report::laurent(&v), r, true);
    } else {
        let v = c1_form(b)?.integrate()?;
        let r = if n == 2 { lattice_distance(&v, -2) } else { v.max_abs() };
        o.primary = Some(("c1".into(), v.real_coeff(-2), r, false));
        o.put("integral", report::laurent(&v), r, b.manifold().is_closed());
    }
    Ok(o)
}

fn holonomy(b: &BundleWithConnection, coord: usize, point: &[f64]) -> Result<Outcome, CliError> {
    let m = b.manifold();
    if point.len() != m.dim() {
        return Err(CliError::Validation(format!("point has {} coordinates, manifold has {}", point.len(), m.dim())));
    }
    let h = b.holonomy(coord, 0, point)?;
    let d = det(&h);
    let defect = (d.norm() - 1.0).abs();
    let mut o = Outcome::new();
    o.primary = Some(("arg_over_2pi".into(), frac(d.arg() / std::f64::consts::TAU), defect, true));
    o.put("det", report::complex(d), defect, true);
    o.put("arg_over_2pi", report::num(frac(d.arg() / std::f64::consts::TAU)), defect, false);
    Ok(o)
}

fn index_theorem(
    reg: &Registry,
    fiber: &str,
    e1: &DKClassEven,
    e2: &DKClassEven,
    phi: &[crate::manifest::FormTerm],
) -> Result<Outcome, CliError> {
    let fz = FiberGeometry::new(&reg.manifolds[fiber], false)?;
    let basis = KunnethBasis::standard(fz.clone())?;
    let phi = if phi.is_empty() {
        None
    } else {
        let m = reg.manifolds[fiber].manifold().product(e1.manifold())?;
        let total = Grid::new(&m, reg.numerics)?;
        let degree = basis.one().degree() + e1.degree();
        Some(build_form(&total, phi, degree - 1, "phi")?)
    };
    let k = KunnethClass::new(basis, e1.clone(), e2.clone(), phi)?;
    let rep = verify_index_theorem(k.family(), Some(&k));
    let mut o = Outcome::new();
    o.notes = rep.notes.clone();
    if let Some(a) = &rep.analytic {
        o.put("analytic", report::observable(&a.class.observable()?), rep.observable.unwrap_or(f64::INFINITY), false);
        let idx: Vec<Value> = a.fiber_indices.iter().map(|(k, _)| Value::from(*k)).collect();
        let worst = a.fiber_indices.iter().map(|(_, r)| *r).fold(0.0, f64::max);
        o.put("fiber_indices", Value::Array(idx), worst, false);
    }
    for (name, r) in [
        ("omega_analytic", rep.omega_analytic),
        ("omega_topological", rep.omega_topological),
        ("observable_distance", rep.observable),
        ("det_holonomy_distance", rep.det_holonomy),
    ] {
        if let Some(r) = r {
            o.put(name, report::num(r), r, false);
        }
    }
    if let Some(e) = &rep.eta {
        let r = rep.eta_residual.unwrap_or(f64::INFINITY);
        o.put("eta_base", report::eta(&e.base_analytic), r, false);
        o.put("eta_total_space", report::eta(&e.total), r, false);
        o.primary = Some(("eta_base".into(), e.base_analytic.value, r, true));
    }
    o.put("max_residual", report::num(rep.max_residual), rep.max_residual, true);
    Ok(o)
}

fn execute(op: &Operation, reg: &Registry) -> Result<Outcome, CliError> {
    match op {
        Operation::ChernIntegral { bundle, character } => chern_integral(&reg.bundles[bundle], *character),
        Operation::Holonomy { bundle, coord, point } => holonomy(&reg.bundles[bundle], *coord, point),
        Operation::Observable { class } => {
            let obs = match &reg.classes[class] {
                ClassValue::Even(x) => x.observable()?,
                ClassValue::Odd(x) => x.observable()?,
            };
            let r = obs.lattice_defect();
            let mut o = Outcome::new();
            o.put("observable", report::observable(&obs), r, true);
            Ok(o)
        }
        Operation::ReducedEta { class, spin } => {
            let x = even(reg, class)?;
            let e = eta_class(x, spin)?;
            let mut o = Outcome::new();
            if x.degree() != 0 {
                o.notes.push(format!(
                    "degree {} class: value reduced mod 1 after the u-power shift; mixed-degree sums are not checked",
                    x.degree()
                ));
            }
            // the residual is the grid-level difference, filled in once the coarse level ran
            o.primary = Some(("eta".into(), e.value, f64::NAN, true));
            o.put("eta", report::eta(&e), f64::NAN, true);
            Ok(o)
        }
        Operation::CircleEta { theta, length } => {
            let e = reduced_eta(&SpectralModel::circle(*length, *theta)?)?;
            let t = frac(*theta);
            let z = (circle_eta_zeta(t, *length, 0.0)? + if t == 0.0 { 1.0 } else { 0.0 }) / 2.0;
            let r = circle_distance(e.value, z);
            let mut o = Outcome::new();
            o.primary = Some(("eta".into(), e.value, r, true));
            o.put("eta", report::eta(&e), r, true);
            o.put("zeta_oracle", report::num(frac(z)), r, false);
            Ok(o)
        }
        Operation::FiberIndex { class, complex_spheres } => {
            let x = even(reg, class)?;
            let f = FiberGeometry::new(x.grid(), *complex_spheres)?;
            let (k, r) = f.index(x)?;
            let mut o = Outcome::new();
            o.primary = Some(("raw_index".into(), f.raw_index(x)?, r, false));
            o.put("index", Value::from(k), r, true);
            Ok(o)
        }
        Operation::IndexTheorem { fiber, e1, e2, phi } => index_theorem(reg, fiber, even(reg, e1)?, even(reg, e2)?, phi),
        Operation::OddFiberIndex { class, a } => {
            let x = even(reg, class)?;
            let r = dkt_core::index::even_class_odd_fiber_index(x, *a, &[])?;
            let direct = eta_class(x, &[])?;
            let res = direct.distance(&EtaValue::new(direct.u_power, r.value.value));
            let mut o = Outcome::new();
            o.primary = Some(("odd_index".into(), r.value.value, res, true));
            o.put("odd_index", report::eta(&r.value), res, true);
            o.put("eta_direct", report::eta(&direct), res, false);
            o.put("torus_index", Value::from(r.torus_index), 0.0, false);
            Ok(o)
        }
        Operation::SuspensionRoundTrip { class } => {
            let x = odd(reg, class)?;
            let back = x.suspend()?.desuspend()?;
            let obs = x.observable()?.distance(&back.observable()?);
            let dc = x.det_circle()?.distance(&back.det_circle()?)?;
            let mut o = Outcome::new();
            o.put("observable_distance", report::num(obs), obs, true);
            o.put("det_circle_distance", report::num(dc), dc, true);
            let winding: Vec<Value> = circle_cycles(x.manifold())
                .iter()
                .map(|c: &ReferenceCycle| x.det_circle().and_then(|d| d.winding(c)).map(report::num))
                .collect::<Result<_, _>>()?;
            o.put("det_windings", Value::Array(winding), 0.0, false);
            Ok(o)
        }
    }
}

/// Parses, validates and executes a manifest; `Err` only for parse and validation failures.
pub fn run_manifest(text: &str, overrides: &Overrides) -> Result<Report, CliError> {
    let manifest = parse_manifest(text)?;
    let spec = overrides.apply(manifest.numerics);
    spec.validate()?;
    let threads = spec.threads.unwrap_or_else(default_threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))?;
    pool.install(|| run_in_pool(&manifest, &spec))
}

/// Thread count from `DKT_THREADS`, else the available parallelism.
pub fn default_threads() -> usize {
    std::env::var("DKT_THREADS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&t: &usize| t >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn run_in_pool(manifest: &Manifest, spec: &NumericsSpec) -> Result<Report, CliError> {
    let start = Instant::now();
    let coarse_spec = spec.coarse();
    let fine = Registry::build(manifest, spec.numerics())?;
    let ops = check_requests(manifest, &fine)?;
    // the coarse level is diagnostic; failing to build it only drops the convergence rows
    let coarse = Registry::build(manifest, coarse_spec.numerics()).ok();
    let mut requests = Vec::new();
    let mut codes = Vec::new();
    for (req, op) in manifest.requests.iter().zip(&ops) {
        let t0 = Instant::now();
        let inputs = serde_json::to_value(op).unwrap_or(Value::Null);
        let mut rr = RequestReport {
            out: req.out.clone(),
            op: req.op.clone(),
            inputs,
            values: BTreeMap::new(),
            notes: Vec::new(),
            convergence: Vec::new(),
            error: None,
            breach: false,
            wall_time_s: 0.0,
        };
        match execute(op, &fine) {
            Ok(mut o) => {
                if let (Some((name, f, fr, periodic)), Some(c)) = (o.primary.clone(), &coarse) {
                    match execute(op, c) {
                        Ok(oc) => {
                            if let Some((_, cv, cr, _)) = oc.primary {
                                let cv = if periodic { f - circle_signed(f - cv) } else { cv };
                                let level_gap = (f - cv).abs();
                                let fr = if fr.is_nan() { level_gap } else { fr };
                                let cr = if cr.is_nan() { level_gap } else { cr };
                                if let Some(q) = o.values.get_mut(&name).filter(|q| q.residual.is_nan()) {
                                    q.residual = level_gap;
                                }
                                let rich = richardson(f, cv);
                                rr.convergence.push(Convergence {
                                    name,
                                    fine: f,
                                    coarse: cv,
                                    fine_residual: fr,
                                    coarse_residual: cr,
                                    richardson: if periodic { frac(rich) } else { rich },
                                });
                            }
                        }
                        Err(e) => rr.notes.push(format!("coarse level failed: {e}")),
                    }
                }
                rr.breach = o.values.values().any(|q| q.checked && !(q.residual <= spec.tolerance));
                rr.values = o.values;
                rr.notes.extend(o.notes);
                if rr.breach {
                    codes.push(5);
                }
            }
            Err(e) => {
                codes.push(e.exit_code());
                rr.error = Some(e.to_string());
            }
        }
        rr.wall_time_s = t0.elapsed().as_secs_f64();
        requests.push(rr);
    }
    // validation, then numerical failures, then tolerance breaches
    let exit_code = [3, 4, 5].into_iter().find(|c| codes.contains(c)).unwrap_or(0);
    Ok(Report {
        fine: spec.numerics(),
        coarse: coarse_spec.numerics(),
        tolerance: spec.tolerance,
        requests,
        exit_code,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Representative of `x` mod 1 in `[-1/2, 1/2)`.
fn circle_signed(x: f64) -> f64 {
    frac(x + 0.5) - 0.5
}

/// `run` subcommand: returns the exit code; the report goes to `out` when given.
pub fn run_file(path: &Path, out: Option<&Path>, overrides: &Overrides) -> (i32, String) {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return (2, format!("{}: {e}", path.display())),
    };
    match run_manifest(&text, overrides) {
        Ok(rep) => {
            let body = rep.render(true);
            if let Some(o) = out {
                if let Err(e) = report::write_atomic(o, &body) {
                    return (4, e.to_string());
                }
            }
            (rep.exit_code, body)
        }
        Err(e) => (e.exit_code(), e.to_string()),
    }
}
