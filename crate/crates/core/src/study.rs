//! Convergence studies and verification suites on the graph-metric benchmark.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{AnalyticMetric, FlatMetric, GraphMetric};
use crate::curvature::{
    assemble_gauss_functional, assemble_neumann_functional, assembly_exactness,
    distributional_inc, distributional_rotrot, error_representation_check, gauss_bonnet_total,
    lift_curvature,
};
use crate::error::{Error, Result};
use crate::fe::{LagrangeField, LagrangeSpace, ReggeField, ReggeSpace};
use crate::mesh::Mesh;
use crate::norms::{self, curvature_error, eoc, l2_error, HMinusOneNorm, NORM_EXACTNESS};

/// Quadrature exactness used by the Gauss-Bonnet audit.
pub const AUDIT_EXACTNESS: usize = 20;

/// Quadrature exactness for the adjointness check; both pairings have
/// rational integrands, so they agree only up to quadrature error.
pub fn adjoint_exactness(k: usize) -> usize {
    8 * k + 16
}

/// Parameters of one convergence study.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyConfig {
    pub metric_degree: usize,
    /// Lifting degree minus metric degree, one of -1, 0, 1, 2.
    pub lift_offset: i32,
    /// Inclusive range of refinement levels.
    pub levels: (u32, u32),
    pub seed: u64,
    pub perturb: bool,
    /// Overrides the assembly exactness `2 max(k, r) + 6`.
    pub assembly_exactness: Option<usize>,
    /// Overrides the error-norm exactness 20.
    pub norm_exactness: Option<usize>,
    /// Also compute the broken `H1` error of `K_h`.
    pub h1: bool,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            metric_degree: 1,
            lift_offset: 0,
            levels: (0, 4),
            seed: 0,
            perturb: true,
            assembly_exactness: None,
            norm_exactness: None,
            h1: false,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        let k = self.metric_degree as i64;
        let d = self.lift_offset as i64;
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(-1..=2).contains(&d) {
            return bad(format!("lift offset {d} is not one of -1, 0, 1, 2"));
        }
        if k == 0 && d == 0 {
            return bad("metric degree 0 needs a lift offset of at least 1 (lifting degree k >= 1)".into());
        }
        if k + d < 1 {
            return bad(format!("lifting degree k + d = {} must be at least 1", k + d));
        }
        if d == -1 && k < 2 {
            return bad(format!("lift offset -1 requires metric degree >= 2, got {k}"));
        }
        if self.levels.0 > self.levels.1 {
            return bad(format!("empty level range {}:{}", self.levels.0, self.levels.1));
        }
        if self.levels.1 > 10 {
            return bad(format!("level {} is beyond the supported range 0..=10", self.levels.1));
        }
        Ok(())
    }

    pub fn lift_degree(&self) -> usize {
        (self.metric_degree as i64 + self.lift_offset as i64) as usize
    }

    pub fn assembly_exactness(&self) -> usize {
        self.assembly_exactness
            .unwrap_or_else(|| assembly_exactness(self.metric_degree, self.lift_degree()))
    }

    pub fn norm_exactness(&self) -> usize {
        self.norm_exactness.unwrap_or(NORM_EXACTNESS)
    }

    pub fn mesh(&self, level: u32) -> Result<Arc<Mesh>> {
        study_mesh(level, self.perturb, self.seed)
    }
}

/// Structured mesh of the unit square, optionally with perturbed interior vertices.
pub fn study_mesh(level: u32, perturb: bool, seed: u64) -> Result<Arc<Mesh>> {
    let mesh = Mesh::structured_square(level);
    Ok(Arc::new(if perturb { mesh.perturb_interior(seed)? } else { mesh }))
}

/// Mesh size of refinement level `level`. Perturbed meshes keep the
/// nominal size so that consecutive sizes differ by exactly a factor 2.
pub fn nominal_h(level: u32) -> f64 {
    Mesh::structured_square(level).max_diameter()
}

/// Errors of one refinement level.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub level: u32,
    /// Largest element diameter of the structured mesh before perturbation,
    /// `sqrt(2) 2^-level`.
    pub h: f64,
    pub ndof_metric: usize,
    pub ndof_lift: usize,
    pub err_l2_k: f64,
    pub err_l2_kw: f64,
    pub err_hm1_k: f64,
    pub err_hm1_kw: f64,
    pub err_h1_k: Option<f64>,
}

/// Runs one level of a study.
pub fn run_level(config: &StudyConfig, level: u32) -> Result<ErrorRecord> {
    let metric = GraphMetric;
    let mesh = config.mesh(level)?;
    let k = config.metric_degree;
    let r = config.lift_degree();
    let qn = config.norm_exactness();
    let regge = ReggeSpace::new(mesh.clone(), k)?;
    let g = regge.interpolate(&metric);
    let space = LagrangeSpace::new(mesh.clone(), r);
    let lifted = lift_curvature(&g, k, &space, &metric, config.assembly_exactness())?;
    let field = &lifted.field;
    let dual = HMinusOneNorm::new(mesh.clone(), r + 2, qn)?;
    let err_hm1_k = dual.norm(&curvature_error(&mesh, field, &g, &metric, false))?;
    let err_hm1_kw = dual.norm(&curvature_error(&mesh, field, &g, &metric, true))?;
    let err_h1_k = config.h1.then(|| {
        norms::h1_elementwise_error(
            &mesh,
            field,
            |p| metric.gauss_curvature(p),
            |p| metric.gauss_curvature_gradient(p),
            qn,
        )
    });
    Ok(ErrorRecord {
        level,
        h: nominal_h(level),
        ndof_metric: regge.dim(),
        ndof_lift: space.dim(),
        err_l2_k: l2_error(&mesh, field, &g, &metric, false, qn)?,
        err_l2_kw: l2_error(&mesh, field, &g, &metric, true, qn)?,
        err_hm1_k,
        err_hm1_kw,
        err_h1_k,
    })
}

/// Runs all levels of a study in order.
pub fn run_convergence(config: &StudyConfig) -> Result<Vec<ErrorRecord>> {
    config.validate()?;
    (config.levels.0..=config.levels.1)
        .map(|level| {
            run_level(config, level).map_err(|e| Error::AtLevel {
                level,
                source: Box::new(e),
            })
        })
        .collect()
}

pub const CSV_HEADER: &str = "level,h,ndof_metric,ndof_lift,err_L2_K,err_L2_Kw,err_Hm1_K,err_Hm1_Kw";

/// Error columns in CSV order.
pub const ERROR_COLUMNS: [&str; 4] = ["err_L2_K", "err_L2_Kw", "err_Hm1_K", "err_Hm1_Kw"];

impl ErrorRecord {
    pub fn errors(&self) -> [f64; 4] {
        [self.err_l2_k, self.err_l2_kw, self.err_hm1_k, self.err_hm1_kw]
    }
}

/// Empirical orders for each error column, in `ERROR_COLUMNS` order.
pub fn eoc_table(records: &[ErrorRecord]) -> [Vec<f64>; 4] {
    let hs: Vec<f64> = records.iter().map(|r| r.h).collect();
    std::array::from_fn(|c| {
        let e: Vec<f64> = records.iter().map(|r| r.errors()[c]).collect();
        eoc(&e, &hs)
    })
}

/// Writes the CSV table followed by `# eoc_<column>:` lines.
pub fn write_csv<W: Write>(records: &[ErrorRecord], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        let [a, b, c, d] = r.errors();
        writeln!(
            out,
            "{},{:.16e},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.level, r.h, r.ndof_metric, r.ndof_lift, a, b, c, d
        )?;
    }
    for (name, rates) in ERROR_COLUMNS.iter().zip(eoc_table(records)) {
        let joined: Vec<String> = rates.iter().map(|x| format!("{x:.6}")).collect();
        writeln!(out, "# eoc_{name}: {}", joined.join(" "))?;
    }
    Ok(())
}

pub fn csv_string(records: &[ErrorRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("csv output is ascii")
}

pub fn emit_csv(records: &[ErrorRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidConfig("no records to write".into()));
    }
    std::fs::write(path, csv_string(records))?;
    Ok(())
}

/// Outcome of one verification check.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {:.3e} (tol {:.0e})", self.name, self.residual, self.tolerance)
    }
}

/// A random metric near the interpolated benchmark, a random Regge field and
/// a random Lagrange function of degree `k + 1`.
pub struct RandomInstance<'a> {
    pub g: ReggeField<'a>,
    pub sigma: ReggeField<'a>,
    pub u: LagrangeField<'a>,
}

pub fn random_instance<'a>(
    regge: &'a ReggeSpace,
    lagrange: &'a LagrangeSpace,
    rng: &mut ChaCha8Rng,
) -> RandomInstance<'a> {
    // a random quadratic symmetric field added to the benchmark metric keeps
    // the interpolant positive definite; a small per-dof jitter breaks
    // the interpolation structure
    let c: Vec<[f64; 6]> = (0..3)
        .map(|_| std::array::from_fn(|_| rng.random_range(-0.1..0.1)))
        .collect();
    let poly = |c: &[f64; 6], p: [f64; 2]| {
        c[0] + c[1] * p[0] + c[2] * p[1] + c[3] * p[0] * p[0] + c[4] * p[0] * p[1] + c[5] * p[1] * p[1]
    };
    let base = regge.interpolate_with(
        |p| {
            let g = GraphMetric.jet(p).g;
            let (a, b, d) = (poly(&c[0], p), poly(&c[1], p), poly(&c[2], p));
            [[g[0][0] + a, g[0][1] + b], [g[1][0] + b, g[1][1] + d]]
        },
        2 * regge.degree() + 6,
    );
    let h = regge.mesh().max_diameter();
    let eps = 1e-4 * h * h;
    let g = base
        .values()
        .iter()
        .map(|v| v + eps * rng.random_range(-1.0..1.0))
        .collect();
    let sigma = (0..regge.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let u = (0..lagrange.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    RandomInstance {
        g: ReggeField::new(regge, g),
        sigma: ReggeField::new(regge, sigma),
        u: LagrangeField::new(lagrange, u),
    }
}

/// Relative gap between the distributional `inc` and `rotrot` pairings.
pub fn adjointness_gap(instance: &RandomInstance<'_>, exactness: usize) -> Result<f64> {
    let mesh = instance.g.space().mesh();
    let a = distributional_inc(mesh, &instance.g, &instance.sigma, &instance.u, exactness)?;
    let b = distributional_rotrot(mesh, &instance.g, &instance.u, &instance.sigma, exactness)?;
    Ok((a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE))
}

/// Random Lagrange function vanishing on the whole boundary.
pub fn random_interior_function<'a>(space: &'a LagrangeSpace, rng: &mut ChaCha8Rng) -> LagrangeField<'a> {
    let values = space
        .boundary_mask()
        .iter()
        .map(|&b| if b { 0.0 } else { rng.random_range(-1.0..1.0) })
        .collect();
    LagrangeField::new(space, values)
}

/// Relative mismatch of the integral error representation.
pub fn representation_mismatch<G: crate::fe::TensorField + ?Sized>(
    g_h: &G,
    u: &LagrangeField<'_>,
    t_points: usize,
    exactness: usize,
) -> Result<f64> {
    let (lhs, rhs) = error_representation_check(&GraphMetric, g_h, u, t_points, exactness)?;
    Ok((lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE))
}

/// Flat-metric residual: largest free-dof entry of the lifting right-hand
/// side, and the L2 and H-1 norms of the lifted curvature and its density.
pub fn flat_residual(mesh: &Arc<Mesh>, k: usize, r: usize) -> Result<f64> {
    let regge = ReggeSpace::new(mesh.clone(), k)?;
    let g = regge.interpolate(&FlatMetric);
    let space = LagrangeSpace::new(mesh.clone(), r);
    let q = assembly_exactness(k, r);
    let f = &assemble_gauss_functional(&g, &space, q)? - &assemble_neumann_functional(&FlatMetric, &space, q);
    let mut worst = f
        .values()
        .iter()
        .zip(space.dirichlet_mask())
        .filter(|(_, &d)| !d)
        .fold(0.0f64, |m, (v, _)| m.max(v.abs()));
    let lifted = lift_curvature(&g, k, &space, &FlatMetric, q)?;
    let dual = HMinusOneNorm::new(mesh.clone(), r + 2, NORM_EXACTNESS)?;
    for densitize in [false, true] {
        worst = worst.max(l2_error(mesh, &lifted.field, &g, &FlatMetric, densitize, NORM_EXACTNESS)?);
        let e = curvature_error(mesh, &lifted.field, &g, &FlatMetric, densitize);
        worst = worst.max(dual.norm(&e)?);
    }
    Ok(worst)
}

/// Verification suite at one level and metric degree.
pub fn run_verify(level: u32, k: usize, seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = study_mesh(level, true, seed)?;
    let mut checks = Vec::new();

    let ka = k.max(1);
    let regge_a = ReggeSpace::new(mesh.clone(), ka)?;
    let lag_a = LagrangeSpace::new(mesh.clone(), ka + 1);
    let mut gap = 0.0f64;
    for _ in 0..5 {
        let inst = random_instance(&regge_a, &lag_a, &mut rng);
        gap = gap.max(adjointness_gap(&inst, adjoint_exactness(ka))?);
    }
    checks.push(Check::new(format!("adjointness (k={ka})"), gap, 1e-10));

    let regge = ReggeSpace::new(mesh.clone(), k)?;
    let g = regge.interpolate(&GraphMetric);
    let lag = LagrangeSpace::new(mesh.clone(), k + 1);
    let mut mismatch = 0.0f64;
    for _ in 0..3 {
        let u = random_interior_function(&lag, &mut rng);
        mismatch = mismatch.max(representation_mismatch(&g, &u, 20, 2 * k + 14)?);
    }
    checks.push(Check::new("integral error representation", mismatch, 1e-8));

    let total = gauss_bonnet_total(&g, &mesh, AUDIT_EXACTNESS.max(2 * k + 6))?;
    checks.push(Check::new("Gauss-Bonnet total", (total - 2.0 * PI).abs(), 1e-9));

    checks.push(Check::new("flat metric", flat_residual(&mesh, k, k.max(1))?, 1e-10));

    let moments = regge.moment_residual(&g, |p| GraphMetric.jet(p).g, 2 * k + 6);
    checks.push(Check::new("interpolant moments", moments, 1e-11));
    Ok(checks)
}
