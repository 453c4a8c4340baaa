//! Built-in self-test battery.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use dkt_core::bundles::{BundleWithConnection, ConnectionPath, TrigTerm};
use dkt_core::charforms::{c1_form, chern_form, cs_two, UnitaryAutomorphism};
use dkt_core::diffk::{homotopy_compare, DKClassEven, DKClassOdd};
use dkt_core::graded::{circle_distance, frac, GradedForm, Grid, Numerics, StructuredManifold};
use dkt_core::index::{
    even_class_odd_fiber_index, verify_index_theorem, FiberGeometry, IndexReport, KunnethBasis, KunnethClass,
};
use dkt_core::linalg::{c, CMat};
use dkt_core::spectral::{circle_eta_zeta, eta_class, landau_kernel_dim, reduced_eta, SpectralModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

const SEED: u64 = 0x5eed_2718;

/// Grid sizes derived from the circle resolution `grid` and the sphere cap order `quad`.
#[derive(Clone, Copy, Debug)]
pub struct BatteryConfig {
    pub grid: usize,
    pub quad: usize,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self { grid: 128, quad: 64 }
    }
}

impl BatteryConfig {
    fn circle(&self) -> Numerics {
        Numerics::uniform(self.grid, 8, 8)
    }

    fn sphere(&self) -> Numerics {
        Numerics::uniform(8, (self.quad / 2).max(4), (self.grid / 2).max(8))
    }

    fn torus2(&self) -> Numerics {
        Numerics::uniform((self.grid / 4).max(8), 8, 8)
    }

    /// Product grids with a sphere factor or a 2-torus fiber.
    fn product(&self) -> Numerics {
        Numerics::uniform((self.grid / 8).max(8), (self.quad / 5).max(6), (self.grid / 5).max(12))
    }

    /// Five-dimensional totals over a 3-torus.
    fn large(&self) -> Numerics {
        Numerics::uniform((self.grid / 20).max(6), (self.quad / 8).max(6), (self.grid / 8).max(12))
    }
}

/// One named residual of a criterion.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    /// Filled with the criterion tolerance unless set explicitly.
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.residual < self.tolerance
    }
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub key: &'static str,
    pub title: &'static str,
    pub tolerance: f64,
    pub checks: Vec<Check>,
    pub error: Option<String>,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn worst(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(Check::passed)
    }

    /// Bit-level fingerprint of the outcome, excluding timing.
    pub fn fingerprint(&self) -> Vec<(String, u64)> {
        let mut v: Vec<(String, u64)> = self.checks.iter().map(|c| (c.name.clone(), c.residual.to_bits())).collect();
        v.push(("error".into(), self.error.is_some() as u64));
        v
    }
}

type Body = fn(&BatteryConfig, &mut Vec<Check>) -> Result<(), CliError>;

pub struct Criterion {
    pub id: usize,
    pub key: &'static str,
    pub title: &'static str,
    pub tolerance: f64,
    body: Body,
}

/// Criteria 1 to 9; the determinism criterion is assembled by [`run_battery`].
pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, key: "flux-integrality", title: "monopole flux n for n in -3..3", tolerance: 1e-8, body: flux },
        Criterion {
            id: 2,
            key: "cs-transgression",
            title: "dCS = omega_0 - omega_1 on 10 random pairs; circle transgression",
            tolerance: 1e-6,
            body: transgression,
        },
        Criterion {
            id: 3,
            key: "homotopy-formula",
            title: "E_1 - E_0 - j(int omega) on 5 connection paths",
            tolerance: 1e-6,
            body: homotopy,
        },
        Criterion {
            id: 4,
            key: "eta-closed-form",
            title: "circle eta-bar = 1/2 - theta against the zeta continuation, 97 points",
            tolerance: 1e-8,
            body: eta_closed_form,
        },
        Criterion {
            id: 5,
            key: "eta-class-invariance",
            title: "eta-bar unchanged by 10 random relation rewrites",
            tolerance: 1e-7,
            body: eta_invariance,
        },
        Criterion {
            id: 6,
            key: "product-pushforward",
            title: "analytic vs Kunneth pushforward for Z in {S2, T2}, B in {S1, T3}",
            tolerance: 1e-6,
            body: product_pushforward,
        },
        Criterion {
            id: 7,
            key: "index-theorem",
            title: "12 product families: observables and eta-bar on base and total space",
            tolerance: 1e-6,
            body: index_theorem,
        },
        Criterion {
            id: 8,
            key: "odd-index-eta",
            title: "D ind S^2 over a point reproduces eta-bar on 9 circle classes",
            tolerance: 1e-6,
            body: odd_index_eta,
        },
        Criterion {
            id: 9,
            key: "suspension-roundtrip",
            title: "D S = id on 6 odd classes; Poincare flux and torus index",
            tolerance: 1e-6,
            body: suspension,
        },
    ]
}

pub const DETERMINISM_KEY: &str = "determinism";

fn run_one(c: &Criterion, cfg: &BatteryConfig) -> CriterionResult {
    let t0 = Instant::now();
    let mut checks = Vec::new();
    let error = (c.body)(cfg, &mut checks).err().map(|e| e.to_string());
    for ch in &mut checks {
        if ch.tolerance.is_nan() {
            ch.tolerance = c.tolerance;
        }
    }
    CriterionResult {
        id: c.id,
        key: c.key,
        title: c.title,
        tolerance: c.tolerance,
        checks,
        error,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(format!("thread pool: {e}")))
}

/// Criteria matching `filter` (substring of the key), run on `threads` worker threads.
pub fn run_criteria(cfg: &BatteryConfig, filter: Option<&str>, threads: usize) -> Result<Vec<CriterionResult>, CliError> {
    let selected: Vec<Criterion> = criteria().into_iter().filter(|c| filter.map_or(true, |f| c.key.contains(f))).collect();
    let p = pool(threads)?;
    Ok(p.install(|| selected.iter().map(|c| run_one(c, cfg)).collect()))
}

/// The filtered battery; when the determinism criterion is selected the other criteria are
/// repeated on `other_threads` threads and compared bit for bit.
pub fn run_battery(
    cfg: &BatteryConfig,
    filter: Option<&str>,
    threads: usize,
    other_threads: usize,
) -> Result<Vec<CriterionResult>, CliError> {
    // a filter naming only the determinism check compares the whole battery
    let inner = filter.filter(|f| criteria().iter().any(|c| c.key.contains(f)));
    let mut results = run_criteria(cfg, inner, threads)?;
    if filter.map_or(true, |f| DETERMINISM_KEY.contains(f)) {
        let t0 = Instant::now();
        let again = run_criteria(cfg, inner, other_threads)?;
        results.push(determinism(&results, &again, threads, other_threads, t0.elapsed().as_secs_f64()));
    }
    Ok(results)
}

/// Criterion 10 from two runs of the same criteria.
pub fn determinism(a: &[CriterionResult], b: &[CriterionResult], ta: usize, tb: usize, seconds: f64) -> CriterionResult {
    let mut checks = Vec::new();
    for (x, y) in a.iter().zip(b) {
        let same = x.key == y.key && x.fingerprint() == y.fingerprint();
        checks.push(Check {
            name: format!("{} at {ta} vs {tb} threads", x.key),
            residual: if same { 0.0 } else { 1.0 },
            tolerance: 0.5,
        });
    }
    let error = if a.len() != b.len() { Some("runs selected different criteria".into()) } else { None };
    let error = error.or_else(|| checks.is_empty().then(|| "no criteria to compare".to_string()));
    CriterionResult {
        id: 10,
        key: DETERMINISM_KEY,
        title: "bit-identical results at two thread counts",
        tolerance: 0.5,
        checks,
        error,
        seconds,
    }
}

/// Pass/fail table, one line per criterion.
pub fn render_table(results: &[CriterionResult]) -> String {
    let mut s = String::new();
    for r in results {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        s.push_str(&format!(
            "criterion {:>2} {status} {:<22} worst {:.3e} (tol {:.0e}), {} checks, {:.1}s  {}\n",
            r.id,
            r.key,
            r.worst(),
            r.tolerance,
            r.checks.len(),
            r.seconds,
            r.title
        ));
        if let Some(e) = &r.error {
            s.push_str(&format!("             error: {e}\n"));
        }
        if !r.passed() {
            for ch in r.checks.iter().filter(|c| !c.passed()) {
                s.push_str(&format!("             {}: {:.3e} (tol {:.0e})\n", ch.name, ch.residual, ch.tolerance));
            }
        }
    }
    s
}

// ---------------------------------------------------------------- helpers

fn grid(m: &StructuredManifold, n: Numerics) -> Result<Arc<Grid>, CliError> {
    Ok(Grid::new(m, n)?)
}

fn push(checks: &mut Vec<Check>, name: impl Into<String>, residual: f64) {
    checks.push(Check { name: name.into(), residual, tolerance: f64::NAN });
}

fn push_tol(checks: &mut Vec<Check>, name: impl Into<String>, residual: f64, tolerance: f64) {
    checks.push(Check { name: name.into(), residual, tolerance });
}

fn herm(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMat {
    let mut h = CMat::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = c(scale * rng.gen_range(-1.0..1.0), 0.0);
        for j in i + 1..n {
            let z = c(scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0));
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    h
}

fn random_trig(rng: &mut ChaCha8Rng, dim: usize, rank: usize, terms: usize, scale: f64) -> Vec<TrigTerm> {
    (0..terms)
        .map(|_| TrigTerm {
            coord: rng.gen_range(0..dim),
            freq: (0..dim).map(|_| rng.gen_range(-1..=1)).collect(),
            phase: rng.gen_range(0.0..2.0 * PI),
            h: herm(rng, rank, scale),
        })
        .collect()
}

fn random_ambient(rng: &mut ChaCha8Rng, scale: f64) -> Vec<Vec<CMat>> {
    (0..3).map(|_| (0..3).map(|_| herm(rng, 1, scale)).collect()).collect()
}

fn eta_bar(theta: f64) -> Result<f64, CliError> {
    Ok(reduced_eta(&SpectralModel::circle(1.0, theta)?)?.value)
}

/// `u^-1 (a + b cos(2 pi x + p)) dx` along circle coordinate `k`.
fn one_form(g: &Arc<Grid>, k: usize, a: f64, b: f64, p: f64) -> Result<GradedForm, CliError> {
    let l = match g.manifold().factor(g.manifold().coordinate_factors()[k]) {
        dkt_core::graded::Factor::Circle { length } => length,
        _ => 1.0,
    };
    Ok(GradedForm::from_fn(g, -2, 1 << k, move |_, x| c(a + b * (2.0 * PI * x[k] / l + p).cos(), 0.0))?)
}

// ---------------------------------------------------------------- criteria

fn flux(cfg: &BatteryConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let s = grid(&StructuredManifold::sphere(1.0), cfg.sphere())?;
    for n in -3..=3 {
        let v = c1_form(&BundleWithConnection::monopole(&s, n)?)?.integrate()?;
        let r = (v.real_coeff(-2) - n as f64).abs().max(v.coeff(-2).im.abs());
        push(checks, format!("monopole({n})"), r);
    }
    Ok(())
}

fn transgression(cfg: &BatteryConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 2);
    let t2 = grid(&StructuredManifold::torus(&[1.0, 1.0]), cfg.torus2())?;
    let s2 = grid(&StructuredManifold::sphere(1.0), cfg.sphere())?;
    let base = BundleWithConnection::trivial(&t2, 2)?;
    for i in 0..5 {
        let e0 = base.perturb_trig(random_trig(&mut rng, 2, 2, 3, 0.5))?;
        let e1 = base.perturb_trig(random_trig(&mut rng, 2, 2, 3, 0.5))?;
        let cs = cs_two(&ConnectionPath::new(e0.clone(), e1.clone())?, 0)?;
        let diff = chern_form(&e0, 0)?.sub(&chern_form(&e1, 0)?)?;
        push(checks, format!("torus pair {i}"), cs.d().sub(&diff)?.max_norm());
    }
    for i in 0..5 {
        let n = rng.gen_range(-2..=2);
        let m = BundleWithConnection::monopole(&s2, n)?;
        let e0 = m.perturb_ambient(0, random_ambient(&mut rng, 0.4))?;
        let e1 = m.perturb_ambient(0, random_ambient(&mut rng, 0.4))?;
        let cs = cs_two(&ConnectionPath::new(e0.clone(), e1.clone())?, 0)?;
        let diff = chern_form(&e0, 0)?.sub(&chern_form(&e1, 0)?)?;
        push(checks, format!("sphere pair {i} (degree {n})"), cs.d().sub(&diff)?.max_norm());
    }
    // abelian transgression on the circle; with this orientation the integral is theta_1 - theta_0
    let s1 = grid(&StructuredManifold::circle(1.0), cfg.circle())?;
    for (t0, t1) in [(0.15, 0.6), (0.9, 0.2), (0.0, 0.35)] {
        let a = BundleWithConnection::flat_line(&s1, &[t0])?;
        let b = BundleWithConnection::flat_line(&s1, &[t1])?;
        let v = cs_two(&ConnectionPath::new(a, b)?, 0)?.integrate()?.real_coeff(-2);
        push_tol(checks, format!("circle {t0} -> {t1}"), (v - (t1 - t0)).abs(), 1e-7);
    }
    Ok(())
}

fn homotopy(cfg: &BatteryConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 3);
    let s1 = grid(&StructuredManifold::circle(1.0), Numerics { interval_order: 24, ..cfg.torus2() })?;
    let t2 = grid(&StructuredManifold::torus(&[1.0, 1.0]), Numerics { interval_order: 16, ..cfg.product() })?;
    let s2 = grid(&StructuredManifold::sphere(1.0), Numerics { interval_order: 12, ..cfg.product() })?;
    let l0 = BundleWithConnection::flat_line(&s1, &[0.1])?;
    let l1 = BundleWithConnection::flat_line(&s1, &[0.45])?;
    let trivial2 = BundleWithConnection::trivial(&t2, 2)?;
    let line = BundleWithConnection::flat_line(&t2, &[0.3, 0.7])?;
    let m = BundleWithConnection::monopole(&s2, 1)?;
    let paths = vec![
        ("flat circle line", l0.clone(), l1),
        ("perturbed circle line", l0.clone(), l0.perturb_trig(random_trig(&mut rng, 1, 1, 2, 0.5))?),
        ("torus line", line.clone(), line.perturb_trig(random_trig(&mut rng, 2, 1, 2, 0.4))?),
        (
            "torus rank 2",
            trivial2.perturb_trig(random_trig(&mut rng, 2, 2, 2, 0.3))?,
            trivial2.perturb_trig(random_trig(&mut rng, 2, 2, 2, 0.3))?,
        ),
        ("sphere monopole", m.clone(), m.perturb_ambient(0, random_ambient(&mut rng, 0.3))?),
    ];
    for (name, a, b) in paths {
        let fam = DKClassEven::from_bundle(ConnectionPath::new(a, b)?.cylinder()?, 0)?;
        let h = homotopy_compare(&fam)?;
        push(checks, name, h.observable_residual);
    }
    Ok(())
}

fn eta_closed_form(_: &BatteryConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let (mut closed, mut zeta, mut sym) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..97 {
        let t = k as f64 / 97.0;
        let e = eta_bar(t)?;
        closed = closed.max(circle_distance(e, 0.5 - t));
        let z = (circle_eta_zeta(t, 1.0, 0.0)? + if t == 0.0 { 1.0 } else { 0.0 }) / 2.0;
        zeta = zeta.max(circle_distance(e, z));
        sym = sym.max(circle_distance(e + eta_bar(frac(1.0 - t))?, 0.0));
    }
    push(checks, "closed form", closed);
    push(checks, "zeta oracle", zeta);
    push(checks, "reflection", sym);
    Ok(())
}

fn eta_invariance(cfg: &BatteryConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let g = grid(&StructuredManifold::circle(1.0), Numerics::uniform((cfg.grid / 4).max(8), 8, 8))?;
    for i in 0..10 {
        let (a, b) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let la = BundleWithConnection::flat_line(&g, &[a])?;
        let lb = BundleWithConnection::flat_line(&g, &[b])?;
        let (e1, e3) = if i % 3 == 2 {
            (BundleWithConnection::trivial(&g, 0)?, lb.clone())
        } else {
            (la.perturb_trig(random_trig(&mut rng, 1, 1, 1, 0.3))?, lb.clone())
        };
        let e2 = la.direct_sum(&lb)?.perturb_trig(random_trig(&mut rng, 1, 2, 2, 0.3))?;
        let e2 = if i % 3 == 2 { lb.perturb_trig(random_trig(&mut rng, 1, 1, 1, 0.3))? } else { e2 };
        let phi2 = one_form(&g, 0, rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), 0.0)?;
        let phi1 = one_form(&g, 0, rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), 1.0)?;
        let other = DKClassEven::from_bundle(BundleWithConnection::flat_line(&g, &[rng.gen_range(0.0..1.0)])?, 0)?;
        let x = DKClassEven::generator(e2, phi2, 0)?.add(&other.scale(rng.gen_range(-2..=2)))?;
        let y = x.rewrite_split(0, &e1, &e3, &phi1)?;
        let (ex, ey) = (eta_class(&x, &[])?, eta_class(&y, &[])?);
        push(checks, format!("rewrite {i}"), ex.distance(&ey));
    }
    Ok(())
}

/// Observable residuals of a report, requiring each to be present.
fn observable_checks(rep: &IndexReport, name: &str, checks: &mut Vec<Check>) {
    let fields = [
        ("omega analytic", rep.omega_analytic),
        ("omega topological", rep.omega_topological),
        ("observables", rep.observable),
        ("det holonomy", rep.det_holonomy),
    ];
    for (what, v) in fields {
        push(checks, format!("{name}: {what}"), v.unwrap_or(f64::INFINITY));
    }
    push(checks, format!("{name}: rank"), rep.rank_difference.map_or(f64::INFINITY, |d| d.abs() as f64));
    for n in &rep.notes {
        if !n.contains("circle base") {
            push(checks, format!("{name}: {n}"), f64::INFINITY);
        }
    }
}

fn fiber(z: &str, n: Numerics) -> Result<FiberGeometry, CliError> {
    let m = match z {
        "S2" => StructuredManifold::sphere(1.0),
        _ => StructuredManifold::torus(&[1.0, 1.0]),
    };
    Ok(FiberGeometry::new(&grid(&m, n)?, false)?)
}

fn product_pushforward(cfg: &BatteryConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    for z in ["S2", "T2"] {
        for b in ["S1", "T3"] {
            let n = if b == "T3" { cfg.large() } else { cfg.product() };
            let fz = fiber(z, n)?;
            let basis = KunnethBasis::standard(fz)?;
            let (base_m, dim) =
                if b == "S1" { (StructuredManifold::circle(1.0), 1) } else { (StructuredManifold::torus(&[1.0; 3]), 3) };
            let bg = grid(&base_m, n)?;
            let twist: Vec<f64> = [0.3, 0.65, 0.1][..dim].to_vec();
            let flat = BundleWithConnection::flat_line(&bg, &twist)?;
            let e2 = DKClassEven::generator(flat, one_form(&bg, dim - 1, 0.2, 0.1, 0.0)?, 0)?;
            let e1 = if dim == 3 {
                let t2 = grid(&StructuredManifold::torus(&[1.0, 1.0]), n)?;
                DKClassEven::from_bundle(BundleWithConnection::poincare(&t2, 1)?.pullback(&bg, &[0, 1])?, 0)?
            } else {
                DKClassEven::from_bundle(BundleWithConnection::flat_line(&bg, &[0.8])?, 0)?
            };
            let total_m = basis.fiber().grid().manifold().product(&base_m)?;
            let tg = grid(&total_m, n)?;
            let nz = basis.fiber().grid().manifold().dim();
            let phi = one_form(&tg, nz, 0.15, 0.25, 0.4)?.shift_u(1);
            let k = KunnethClass::new(basis, e1, e2, Some(phi))?;
            let rep = verify_index_theorem(k.family(), Some(&k));
            let name = format!("{z} x {b}");
            observable_checks(&rep, &name, checks);
            let eta_form = rep.analytic.as_ref().map_or(f64::INFINITY, |a| a.eta_form_used.max_norm());
            push(checks, format!("{name}: eta form"), eta_form);
        }
    }
    Ok(())
}

/// The 12 families of criterion 7, all over the unit circle.
fn index_families(cfg: &BatteryConfig) -> Result<Vec<(String, KunnethClass)>, CliError> {
    let n = cfg.product();
    let b = grid(&StructuredManifold::circle(1.0), n)?;
    let flat = |t: f64| -> Result<DKClassEven, CliError> {
        Ok(DKClassEven::from_bundle(BundleWithConnection::flat_line(&b, &[t])?, 0)?)
    };
    let zero = DKClassEven::zero(&b, 0)?;
    let mut out = Vec::new();
    for z in ["S2", "T2"] {
        let basis = KunnethBasis::standard(fiber(z, n)?)?;
        let tm = basis.fiber().grid().manifold().product(b.manifold())?;
        let tg = grid(&tm, n)?;
        let nz = basis.fiber().grid().manifold().dim();
        let phi = one_form(&tg, nz, 0.1, 0.3, 0.2)?.shift_u(1);
        let jb = DKClassEven::j(&one_form(&b, 0, 0.37, 0.2, 0.0)?)?;
        let cases: Vec<(&str, DKClassEven, DKClassEven, Option<GradedForm>)> = vec![
            ("x.L(0.3)", zero.clone(), flat(0.3)?, None),
            ("x.L(0)", zero.clone(), flat(0.0)?, None),
            ("x.(L(0.85) + j)", zero.clone(), flat(0.85)?.add(&jb)?, None),
            ("1.L(0.4) + x.L(0.6)", flat(0.4)?, flat(0.6)?, None),
            ("x.(2 L(0.2) - L(0.7)) + phi", zero.clone(), flat(0.2)?.scale(2).sub(&flat(0.7)?)?, Some(phi.clone())),
            ("1.j + j(phi)", jb.clone(), zero.clone(), Some(phi)),
        ];
        for (name, e1, e2, phi) in cases {
            out.push((format!("{z}: {name}"), KunnethClass::new(basis.clone(), e1, e2, phi)?));
        }
    }
    Ok(out)
}

fn index_theorem(cfg: &BatteryConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    for (name, k) in index_families(cfg)? {
        let rep = verify_index_theorem(k.family(), Some(&k));
        observable_checks(&rep, &name, checks);
        push(checks, format!("{name}: eta base vs total"), rep.eta_residual.unwrap_or(f64::INFINITY));
    }
    Ok(())
}

fn odd_index_eta(cfg: &BatteryConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let g = grid(&StructuredManifold::circle(1.0), Numerics::uniform((cfg.grid / 4).max(8), 8, 8))?;
    let phis: Vec<(&str, GradedForm)> = vec![
        ("0", GradedForm::zero(&g, -1)),
        ("0.3 dx", one_form(&g, 0, 0.3, 0.0, 0.0)?),
        ("(0.2 + 0.1 cos) dx", one_form(&g, 0, 0.2, 0.1, 0.5)?),
    ];
    for theta in [0.15, 0.5, 0.8] {
        for (pn, phi) in &phis {
            let x = DKClassEven::generator(BundleWithConnection::flat_line(&g, &[theta])?, phi.clone(), 0)?;
            let direct = eta_class(&x, &[])?;
            let a1 = even_class_odd_fiber_index(&x, 1.0, &[])?.value;
            let a2 = even_class_odd_fiber_index(&x, 2.0, &[])?.value;
            push(checks, format!("theta {theta}, phi {pn}"), a1.distance(&direct));
            push(checks, format!("theta {theta}, phi {pn}: a = 1 vs 2"), a1.distance(&a2));
        }
    }
    Ok(())
}

fn suspension(cfg: &BatteryConfig, checks: &mut Vec<Check>) -> Result<(), CliError> {
    let s1 = grid(&StructuredManifold::circle(1.0), Numerics::uniform((cfg.grid / 8).max(8), 8, 8))?;
    let t2 = grid(&StructuredManifold::torus(&[1.0, 1.0]), Numerics::uniform((cfg.grid / 12).max(8), 8, 8))?;
    let h1 = |x: f64| CMat::from_element(1, 1, c(x, 0.0));
    let t = BundleWithConnection::trivial(&s1, 1)?;
    let pt = t.perturb_trig(vec![TrigTerm { coord: 0, freq: vec![1], phase: 0.2, h: h1(0.3) }])?;
    let two = BundleWithConnection::trivial(&s1, 2)?;
    let phi = GradedForm::from_fn(&s1, -2, 0, |_, x| c(0.1 + 0.2 * (2.0 * PI * x[0]).cos(), 0.0))?;
    let l = BundleWithConnection::flat_line(&t2, &[0.2, 0.7])?.perturb_trig(vec![TrigTerm {
        coord: 0,
        freq: vec![0, 1],
        phase: 0.3,
        h: h1(0.4),
    }])?;
    let pz = BundleWithConnection::poincare(&t2, 1)?.direct_sum(&BundleWithConnection::trivial(&t2, 1)?)?;
    let rot = CMat::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
    let tt = BundleWithConnection::trivial(&t2, 2)?;
    let tphi = GradedForm::from_fn(&t2, -2, 0, |_, x| c(0.2 * (2.0 * PI * (x[0] - x[1])).cos() + 0.05, 0.0))?;
    let classes = vec![
        ("circle phase 1", DKClassOdd::from_aut(UnitaryAutomorphism::phase(&t, &[1])?, -1)?),
        ("circle phase -2 with phi", DKClassOdd::generator(UnitaryAutomorphism::phase(&pt, &[-2])?, phi, -1)?),
        ("circle diagonal (1, 3)", DKClassOdd::from_aut(UnitaryAutomorphism::diagonal(&two, &[vec![1], vec![3]])?, -1)?),
        ("torus phase (1, -1)", DKClassOdd::generator(UnitaryAutomorphism::phase(&l, &[1, -1])?, tphi, -1)?),
        (
            "torus diagonal on P + 1",
            DKClassOdd::from_aut(UnitaryAutomorphism::diagonal(&pz, &[vec![0, 1], vec![2, 0]])?, -1)?,
        ),
        ("torus phase times rotation", DKClassOdd::from_aut(UnitaryAutomorphism::phase_times(&tt, &[1, 0], &rot)?, -1)?),
    ];
    for (name, x) in classes {
        let back = x.suspend()?.desuspend()?;
        push(checks, format!("{name}: observables"), x.observable()?.distance(&back.observable()?));
        push(checks, format!("{name}: det circle"), x.det_circle()?.distance(&back.det_circle()?)?);
    }
    let tp = grid(&StructuredManifold::torus(&[1.0, 1.0]), cfg.torus2())?;
    let p = BundleWithConnection::poincare(&tp, 1)?;
    let flux = c1_form(&p)?.integrate()?.real_coeff(-2);
    push_tol(checks, "Poincare flux", (flux - 1.0).abs(), 1e-9);
    let (kp, km) = landau_kernel_dim(1, 64)?;
    push(checks, "diagonalized torus index", (kp as f64 - km as f64 - 1.0).abs());
    let fz = FiberGeometry::new(&tp, true)?;
    let (k, _) = fz.index(&DKClassEven::from_bundle(p, 2)?)?;
    push(checks, "Todd integral of the Poincare line", (k - 1).abs() as f64);
    Ok(())
}
