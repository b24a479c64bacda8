use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use sparsecone::edm::{build_edm, embed_points, generate_instance};
use sparsecone::regularity::{strong_reg_affine_ks, strong_reg_edm, strong_reg_span_ss, RegularityCertificate};
use sparsecone::solvers::{solve as run_solver, AffineSet, MatrixAffineSet, SolveOutcome};
use sparsecone::sparsity::{normal_cone_ks_contains, proj_as, proj_ks, proj_nonneg, prox_normal_cone_ks_contains};
use sparsecone::spectral::{normal_cone_rs_contains, normal_cone_ss_contains, prox_normal_cone_ss_contains};
use sparsecone::{
    CertifyConfig, EdmInstance, MatrixSet, PartialEdm, SolveStatus, SparseVecPoint, SpectralSet, Subspace, SymMatrix,
    VectorSet, Verdict, Witness,
};

use crate::files::{
    read_json, write_json, write_trace, AffineKsInstance, BenchRow, CertificateRef, ConeOutput, Point, Problem,
    ProjectOutput, SolveOutput, SpanSsInstance,
};
use crate::{
    BenchArgs, CertifyArgs, CertifyMode, ConeCheckArgs, ConeSet, EdmCompleteArgs, EdmGenerateArgs, Failure,
    ProjectArgs, SetKind, SolveArgs, SolverArgs, SparseGenerateArgs, StartArgs, EXIT_NOT_CONVERGED, EXIT_NOT_REGULAR,
    EXIT_OK, EXIT_UNDECIDED,
};

fn vector(p: Point, what: &str) -> Result<Vec<f64>, Failure> {
    match p {
        Point::Vector(v) => Ok(v),
        Point::Matrix(_) => Err(Failure::usage(format!("{what} must be a vector"))),
    }
}

fn matrix(p: Point, what: &str) -> Result<SymMatrix, Failure> {
    match p {
        Point::Matrix(m) => Ok(m),
        Point::Vector(_) => Err(Failure::usage(format!("{what} must be a matrix (array of rows)"))),
    }
}

fn enum_name<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

pub fn project(a: &ProjectArgs) -> Result<u8, Failure> {
    let input: Point = read_json(&a.input)?;
    let needs_s = !matches!(a.set, SetKind::Nonneg | SetKind::Psd);
    let s = match (needs_s, a.s) {
        (true, None) => return Err(Failure::usage(format!("--s is required for set {}", a.set.label()))),
        (true, Some(s)) => Some(s),
        (false, _) => None,
    };
    let out = match a.set {
        SetKind::Ks | SetKind::As => {
            let x = vector(input, "input")?;
            let s = s.unwrap_or_default();
            let p = if a.set == SetKind::Ks { proj_ks(&x, s)? } else { proj_as(&x, s)? };
            ProjectOutput {
                set: a.set.label().into(),
                s: Some(s),
                canonical: Point::Vector(p.canonical),
                members: (!p.truncated).then_some(p.members),
                member_count: Some(p.member_count),
                truncated: p.truncated,
                boundary_tie: false,
                distance: p.distance,
            }
        }
        SetKind::Nonneg => {
            let x = vector(input, "input")?;
            let p = proj_nonneg(&x);
            let distance = sparsecone::linalg::dist(&x, &p);
            ProjectOutput {
                set: a.set.label().into(),
                s: None,
                canonical: Point::Vector(p.clone()),
                members: Some(vec![p]),
                member_count: Some(1),
                truncated: false,
                boundary_tie: false,
                distance,
            }
        }
        SetKind::Ss | SetKind::Rs | SetKind::Psd => {
            let x = matrix(input, "input")?;
            let set = match a.set {
                SetKind::Ss => SpectralSet::LowRankPsd(s.unwrap_or_default()),
                SetKind::Rs => SpectralSet::LowRank(s.unwrap_or_default()),
                _ => SpectralSet::Psd,
            };
            let p = set.project(&x)?;
            ProjectOutput {
                set: a.set.label().into(),
                s,
                distance: x.lincomb(1.0, &p.matrix, -1.0).frobenius_norm(),
                canonical: Point::Matrix(p.matrix),
                members: None,
                member_count: (!p.boundary_tie).then_some(1),
                truncated: false,
                boundary_tie: p.boundary_tie,
            }
        }
    };
    write_json(&a.output, &out)?;
    match out.member_count {
        Some(n) => println!(
            "projection onto {}: {n} member{}, distance {:.6e}{}",
            out.set,
            if n == 1 { "" } else { "s" },
            out.distance,
            if out.truncated { " (members truncated)" } else { "" }
        ),
        None => println!("projection onto {}: not unique (eigenvalue tie), distance {:.6e}", out.set, out.distance),
    }
    Ok(EXIT_OK)
}

pub fn cone_check(a: &ConeCheckArgs) -> Result<u8, Failure> {
    let point: Point = read_json(&a.point)?;
    let normal: Point = read_json(&a.normal)?;
    let out = match a.set {
        ConeSet::Ks => {
            let xbar = SparseVecPoint::new(vector(point, "point")?);
            let y = vector(normal, "normal")?;
            let r = normal_cone_ks_contains(&xbar, &y, a.s)?;
            ConeOutput {
                set: "ks".into(),
                s: a.s,
                limiting: r.is_member,
                proximal: Some(prox_normal_cone_ks_contains(&xbar, &y, a.s)?),
                branch: Some(enum_name(&r.branch)),
                detail: r.violated_condition,
            }
        }
        ConeSet::Ss => {
            let xbar = matrix(point, "point")?;
            let y = matrix(normal, "normal")?;
            let r = normal_cone_ss_contains(&xbar, &y, a.s)?;
            ConeOutput {
                set: "ss".into(),
                s: a.s,
                limiting: r.is_member,
                proximal: Some(prox_normal_cone_ss_contains(&xbar, &y, a.s)?),
                branch: Some(enum_name(&r.branch)),
                detail: Some(format!(
                    "‖X̄Y‖_F = {:e}, eigenvalues of Y in [{:e}, {:e}], rank Y = {}",
                    r.product_residual, r.y_lambda_min, r.y_lambda_max, r.y_rank
                )),
            }
        }
        ConeSet::Rs => {
            let xbar = matrix(point, "point")?;
            let y = matrix(normal, "normal")?;
            ConeOutput {
                set: "rs".into(),
                s: a.s,
                limiting: normal_cone_rs_contains(&xbar, &y, a.s)?,
                proximal: None,
                branch: None,
                detail: None,
            }
        }
    };
    write_json(&a.output, &out)?;
    println!(
        "y {} the normal cone{}",
        if out.limiting { "is in" } else { "is not in" },
        out.branch.as_deref().map(|b| format!(" (branch {b})")).unwrap_or_default()
    );
    Ok(EXIT_OK)
}

fn certify_config(a: &CertifyArgs) -> Result<CertifyConfig, Failure> {
    let Some(seed) = a.seed else {
        return Err(Failure::usage("--seed is required for this mode"));
    };
    Ok(CertifyConfig { enumeration_max_dim: a.max_enum_dim, starts: a.starts, steps: a.steps, seed })
}

fn witness_unverified() -> Failure {
    Failure::internal("witness failed independent re-verification; certificate not written")
}

/// Re-check a witness against the definition before it is written.
fn verify_witness(
    cert: &RegularityCertificate,
    check: impl FnOnce(&Witness) -> Result<bool, Failure>,
) -> Result<(), Failure> {
    match (&cert.verdict, &cert.witness) {
        (Verdict::NotRegular, Some(w)) if check(w)? => Ok(()),
        (Verdict::NotRegular, _) => Err(witness_unverified()),
        (_, None) => Ok(()),
        (_, Some(_)) => Err(Failure::internal("witness attached to a certificate that is not 'not regular'")),
    }
}

pub fn certify(a: &CertifyArgs) -> Result<u8, Failure> {
    let cert = match a.mode {
        CertifyMode::AffineKs => {
            let cfg = certify_config(a)?;
            let inst: AffineKsInstance = read_json(&a.instance)?;
            let xbar = SparseVecPoint::new(inst.xbar);
            let cert = strong_reg_affine_ks(&inst.a, &xbar, inst.s, &cfg)?;
            verify_witness(&cert, |w| {
                let Witness::Vector(y) = w else { return Ok(false) };
                let in_range = Subspace::row_space(&inst.a)?.distance(y) <= 1e-8 * sparsecone::linalg::norm2(y);
                let neg: Vec<f64> = y.iter().map(|v| -v).collect();
                Ok(in_range && normal_cone_ks_contains(&xbar, &neg, inst.s)?.is_member)
            })?;
            cert
        }
        CertifyMode::SpanSs => {
            let cfg = certify_config(a)?;
            let inst: SpanSsInstance = read_json(&a.instance)?;
            let cert = strong_reg_span_ss(&inst.a, &inst.xbar, inst.s, &cfg)?;
            verify_witness(&cert, |w| {
                let Witness::Matrix(y) = w else { return Ok(false) };
                let m = inst.xbar.dim();
                let flat: Vec<Vec<f64>> = inst.a.iter().map(|a| a.to_dense().as_slice().to_vec()).collect();
                let span = Subspace::span(m * m, &flat)?;
                let yf = y.to_dense().as_slice().to_vec();
                let in_span = span.distance(&yf) <= 1e-8 * y.frobenius_norm();
                Ok(in_span && normal_cone_ss_contains(&inst.xbar, &y.scale(-1.0), inst.s)?.is_member)
            })?;
            cert
        }
        CertifyMode::Edm => {
            let inst: EdmInstance = read_json(&a.instance)?;
            let part = inst.partial()?;
            let xbar = match &a.solution {
                Some(path) => matrix(read_json(path)?, "solution")?,
                None => inst
                    .ground_truth_edm()?
                    .ok_or_else(|| Failure::usage("instance has no ground truth; pass --solution"))?,
            };
            let cert = strong_reg_edm(&part, &xbar)?;
            verify_witness(&cert, |w| {
                let Witness::Matrix(y) = w else { return Ok(false) };
                Ok(part.normal_cone_c1_contains(&xbar, y)? && part.normal_cone_c2_contains(&xbar, &y.scale(-1.0))?)
            })?;
            cert
        }
    };
    write_json(&a.output, &cert)?;
    println!("{}: {} ({})", enum_name(&cert.verdict), cert.details, enum_name(&cert.method));
    Ok(match cert.verdict {
        Verdict::Regular => EXIT_OK,
        Verdict::NotRegular => EXIT_NOT_REGULAR,
        Verdict::Undecided => EXIT_UNDECIDED,
    })
}

fn noise_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

fn perturb_vector(x: &[f64], size: f64, seed: u64) -> Vec<f64> {
    let mut rng = noise_rng(seed);
    let e: Vec<f64> = x.iter().map(|_| rng.sample(StandardNormal)).collect();
    let n = sparsecone::linalg::norm2(&e);
    x.iter().zip(&e).map(|(a, b)| a + size * b / n).collect()
}

/// `x` plus symmetric noise of Frobenius norm `size`; the diagonal is left
/// alone.
fn perturb_matrix(x: &SymMatrix, size: f64, seed: u64) -> SymMatrix {
    let mut rng = noise_rng(seed);
    let e = SymMatrix::from_upper_fn(x.dim(), |i, j| if i == j { 0.0 } else { rng.sample(StandardNormal) });
    let n = e.frobenius_norm();
    if n == 0.0 {
        return x.clone();
    }
    x.lincomb(1.0, &e, size / n)
}

enum Start {
    Default,
    Given(Point),
    Perturbed { size: f64, seed: u64 },
}

fn start(a: &StartArgs) -> Result<Start, Failure> {
    if let Some(path) = &a.x0 {
        return Ok(Start::Given(read_json(path)?));
    }
    match (a.perturb, a.seed) {
        (Some(size), Some(seed)) if size.is_finite() && size >= 0.0 => Ok(Start::Perturbed { size, seed }),
        (Some(size), Some(_)) => Err(Failure::usage(format!("--perturb must be nonnegative, got {size}"))),
        _ => Ok(Start::Default),
    }
}

fn no_truth() -> Failure {
    Failure::usage("--perturb needs an instance with a known solution")
}

fn vector_start(st: Start, m: usize, truth: Option<&Vec<f64>>) -> Result<Vec<f64>, Failure> {
    match st {
        Start::Default => Ok(vec![0.0; m]),
        Start::Given(p) => {
            let x = vector(p, "x0")?;
            if x.len() != m {
                return Err(Failure::usage(format!("x0 has length {}, problem has dimension {m}", x.len())));
            }
            Ok(x)
        }
        Start::Perturbed { size, seed } => Ok(perturb_vector(truth.ok_or_else(no_truth)?, size, seed)),
    }
}

fn matrix_start(st: Start, m: usize, truth: Option<&SymMatrix>) -> Result<SymMatrix, Failure> {
    match st {
        Start::Default => Ok(SymMatrix::zeros(m)),
        Start::Given(p) => {
            let x = matrix(p, "x0")?;
            if x.dim() != m {
                return Err(Failure::usage(format!("x0 is {0}×{0}, problem has dimension {m}", x.dim())));
            }
            Ok(x)
        }
        Start::Perturbed { size, seed } => Ok(perturb_matrix(truth.ok_or_else(no_truth)?, size, seed)),
    }
}

fn finish<P>(
    out: SolveOutcome<P>,
    build: impl FnOnce(SolveOutcome<P>) -> Result<SolveOutput, Failure>,
) -> Result<(SolveOutput, sparsecone::SolveTrace), Failure> {
    let trace = out.trace.clone();
    Ok((build(out)?, trace))
}

struct EdmRun {
    output: SolveOutput,
    trace: sparsecone::SolveTrace,
    completed: SymMatrix,
}

/// Default EDM start: known distances, unknown ones set to the mean known
/// distance.
fn edm_default_start(part: &PartialEdm) -> SymMatrix {
    let known = part.known();
    let mean = if known.is_empty() {
        1.0
    } else {
        known.iter().map(|&(i, j)| part.d().get(i, j)).sum::<f64>() / known.len() as f64
    };
    SymMatrix::from_upper_fn(part.n_points(), |i, j| {
        if i == j {
            0.0
        } else if part.is_known(i, j) {
            part.d().get(i, j)
        } else {
            mean
        }
    })
}

fn edm_run(inst: &EdmInstance, solver: &SolverArgs, st: Start) -> Result<EdmRun, Failure> {
    let part = Arc::new(inst.partial()?);
    let n = part.n_points();
    let x0 = match st {
        Start::Default => edm_default_start(&part),
        other => matrix_start(other, n, inst.ground_truth_edm()?.as_ref())?,
    };
    let out = run_solver(
        solver.method.into(),
        &MatrixSet::EdmC1(part.clone()),
        &MatrixSet::EdmC2(part.clone()),
        &x0,
        &solver.config(),
    )?;
    let points = embed_points(&out.partner, part.s())?;
    let completed = build_edm(&points)?;
    let constraint_residual =
        part.known().iter().map(|&(i, j)| (completed.get(i, j) - part.d().get(i, j)).abs()).fold(0.0, f64::max);
    let output = SolveOutput {
        summary: out.trace.summary(),
        solution: Point::Matrix(completed.clone()),
        shadow: Point::Matrix(out.shadow),
        constraint_residual,
        points: Some(points),
        certificate: None,
    };
    Ok(EdmRun { output, trace: out.trace, completed })
}

fn report_solve(
    output: &SolveOutput,
    trace: &sparsecone::SolveTrace,
    a_out: &std::path::Path,
    a_trace: Option<&std::path::Path>,
) -> Result<u8, Failure> {
    write_json(a_out, output)?;
    if let Some(path) = a_trace {
        write_trace(path, trace)?;
    }
    let s = &output.summary;
    let rate = s.rate.map(|r| format!(", rate {:.4} (r² {:.3})", r.rho, r.r2)).unwrap_or_default();
    println!(
        "{} after {} iterations: residual {:.3e}, constraint residual {:.3e}{rate}",
        enum_name(&s.status),
        s.iterations,
        s.final_residual,
        output.constraint_residual
    );
    Ok(if s.status == SolveStatus::Converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn solve(a: &SolveArgs) -> Result<u8, Failure> {
    let problem: Problem = read_json(&a.instance)?;
    let cfg = a.solver.config();
    cfg.validate()?;
    let st = start(&a.start)?;
    let method = a.solver.method.into();
    let (output, trace) = match &problem {
        Problem::SparseLinear { a: mat, b, s, x_true } => {
            let affine = AffineSet::new(mat.clone(), b.clone())?;
            let x0 = vector_start(st, mat.cols(), x_true.as_ref())?;
            let c1 = VectorSet::Affine(affine.clone());
            let out = run_solver(method, &c1, &VectorSet::Ks { s: *s }, &x0, &cfg)?;
            finish(out, |o| {
                Ok(SolveOutput {
                    summary: o.trace.summary(),
                    constraint_residual: affine.residual(&o.partner)?,
                    solution: Point::Vector(o.partner),
                    shadow: Point::Vector(o.shadow),
                    points: None,
                    certificate: None,
                })
            })?
        }
        Problem::LowRankPsd { a: mats, b, s, x_true } => {
            let affine = MatrixAffineSet::new(mats.clone(), b.clone())?;
            let x0 = matrix_start(st, mats[0].dim(), x_true.as_ref())?;
            let c1 = MatrixSet::Affine(affine.clone());
            let out = run_solver(method, &c1, &MatrixSet::Ss(*s), &x0, &cfg)?;
            finish(out, |o| {
                let r = mats.iter().zip(b).map(|(m, bj)| (m.inner(&o.partner) - bj).powi(2)).sum::<f64>().sqrt();
                Ok(SolveOutput {
                    summary: o.trace.summary(),
                    constraint_residual: r,
                    solution: Point::Matrix(o.partner),
                    shadow: Point::Matrix(o.shadow),
                    points: None,
                    certificate: None,
                })
            })?
        }
        Problem::Edm(inst) => {
            let run = edm_run(inst, &a.solver, st)?;
            (run.output, run.trace)
        }
    };
    report_solve(&output, &trace, &a.output, a.trace.as_deref())
}

pub fn edm_complete(a: &EdmCompleteArgs) -> Result<u8, Failure> {
    let inst: EdmInstance = read_json(&a.instance)?;
    a.solver.config().validate()?;
    let mut run = edm_run(&inst, &a.solver, start(&a.start)?)?;
    let part = inst.partial()?;
    let (at, xbar) = match inst.ground_truth_edm()? {
        Some(t) => ("ground-truth", t),
        None => ("completion", run.completed.clone()),
    };
    let (certificate, error) = match strong_reg_edm(&part, &xbar) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    if let Some(c) = &certificate {
        println!("regularity at {at}: {}", enum_name(&c.verdict));
    }
    run.output.certificate = Some(CertificateRef { at: at.into(), certificate, error });
    report_solve(&run.output, &run.trace, &a.output, a.trace.as_deref())
}

pub fn sparse_generate(a: &SparseGenerateArgs) -> Result<u8, Failure> {
    let p = sparsecone::solvers::planted_sparse(a.m, a.s, a.seed)?;
    let rows = p.a.rows();
    write_json(&a.output, &Problem::SparseLinear { a: p.a, b: p.b, s: p.s, x_true: Some(p.x_true) })?;
    println!("planted system: {rows} equations in {} unknowns, s = {}", a.m, a.s);
    Ok(EXIT_OK)
}

pub fn edm_generate(a: &EdmGenerateArgs) -> Result<u8, Failure> {
    let inst = generate_instance(a.points, a.s, a.fraction, a.seed)?;
    write_json(&a.output, &inst)?;
    let total = a.points * (a.points - 1) / 2;
    println!("EDM instance: {} points in R^{}, {} of {total} distances known", a.points, a.s, inst.d.len());
    Ok(EXIT_OK)
}

fn bench_one(a: &BenchArgs, n: usize, seed: u64) -> Result<BenchRow, Failure> {
    let inst = generate_instance(n, a.s, a.fraction, seed)?;
    let part = inst.partial()?;
    let truth = inst.ground_truth_edm()?.ok_or_else(|| Failure::internal("generated instance has no ground truth"))?;
    let verdict = strong_reg_edm(&part, &truth).ok().map(|c| c.verdict);
    let part = Arc::new(part);
    let x0 = perturb_matrix(&truth, a.perturb, seed);
    let out = run_solver(
        a.solver.method.into(),
        &MatrixSet::EdmC1(part.clone()),
        &MatrixSet::EdmC2(part),
        &x0,
        &a.solver.config(),
    )?;
    let s = out.trace.summary();
    Ok(BenchRow {
        n_points: n,
        seed,
        verdict,
        status: s.status,
        iterations: s.iterations,
        final_residual: s.final_residual,
        rho: s.rate.map(|r| r.rho),
        r2: s.rate.map(|r| r.r2),
        elapsed_ms: s.elapsed_ms,
    })
}

pub fn bench(a: &BenchArgs) -> Result<u8, Failure> {
    if a.parallel == 0 {
        return Err(Failure::usage("--parallel must be at least 1"));
    }
    if !(a.perturb.is_finite() && a.perturb >= 0.0) {
        return Err(Failure::usage(format!("--perturb must be nonnegative, got {}", a.perturb)));
    }
    a.solver.config().validate()?;
    let jobs: Vec<(usize, u64)> =
        a.points.iter().flat_map(|&n| (0..a.instances as u64).map(move |k| (n, a.seed.wrapping_add(k)))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.parallel)
        .build()
        .map_err(|e| Failure::internal(format!("thread pool: {e}")))?;
    let rows: Vec<BenchRow> =
        pool.install(|| jobs.par_iter().map(|&(n, seed)| bench_one(a, n, seed)).collect::<Result<_, _>>())?;
    write_json(&a.output, &rows)?;
    let mut by_size: BTreeMap<usize, Vec<&BenchRow>> = BTreeMap::new();
    for r in &rows {
        by_size.entry(r.n_points).or_default().push(r);
    }
    for (n, rs) in by_size {
        let regular = rs.iter().filter(|r| r.verdict == Some(Verdict::Regular)).count();
        let converged = rs.iter().filter(|r| r.status == SolveStatus::Converged).count();
        println!("n = {n}: {} instances, {regular} regular, {converged} converged", rs.len());
    }
    Ok(EXIT_OK)
}
