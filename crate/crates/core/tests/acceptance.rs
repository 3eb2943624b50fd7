//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cisolve::diagnostics::{
    energy_shape, is_nonincreasing, oracle_compare, run_study, uniqueness_separation, RunReport,
    StudyReport,
};
use cisolve::integrate::{cfl_dt, run_simulation, TimeControls};
use cisolve::io::{decode_field_dump, diagnostics_csv, encode_field_dump, parse_diagnostics_csv};
use cisolve::model::symbol::{analyze_symbol, asymmetry, eigenvalues_closed_form, numeric_eigenvalues, SymbolMatrices};
use cisolve::model::{PressureLaw, State};
use cisolve::schemes::{SchemeConfig, SchemeKind};
use cisolve::spectral::{
    divergence, gradient, gradient_part, leray_project, mollify, mollify_vector, Grid,
    MollifierKind, ScalarField, VectorField,
};

const N: usize = 64;
const T: f64 = 0.5;
const EPS_SWEEP: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
const REFERENCE_EPS: f64 = 1e-3;
const BENCHMARK_LAW: PressureLaw = PressureLaw::Kinetic { f_bar: 1.0, c: 1.0 };

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// Taylor-Green velocity with density `1 + 0.1 sin x sin y`.
fn benchmark(g: &Grid) -> State {
    State::new(
        ScalarField::from_fn(g, |x, y| 0.1 * x.sin() * y.sin()),
        VectorField::from_fn(g, |x, y| [x.sin() * y.cos(), -x.cos() * y.sin()]),
        1.0,
        None,
    )
    .unwrap()
}

fn random_field(g: &Grid, rng: &mut ChaCha8Rng) -> ScalarField {
    let values = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::new(g, values).unwrap()
}

fn random_vector(g: &Grid, rng: &mut ChaCha8Rng) -> VectorField {
    VectorField::new([random_field(g, rng), random_field(g, rng)]).unwrap()
}

fn criterion_1() -> Outcome {
    let g = Grid::periodic(N).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 5];
    for k in 0..200 {
        let v = random_vector(&g, &mut rng);
        let p = leray_project(&v);
        worst[0] = worst[0].max((&leray_project(&p) - &p).norm());
        worst[1] = worst[1].max(divergence(&p).norm());
        worst[2] = worst[2].max(p.dot(&gradient_part(&v)).abs());
        let eps = rng.gen_range(0.01..0.5);
        let kind = if k % 2 == 0 {
            MollifierKind::GaussianMultiplier
        } else {
            MollifierKind::SharpCutoff { ratio: 1.0 }
        };
        let jp = mollify_vector(&p, eps, kind).unwrap();
        let pj = leray_project(&mollify_vector(&v, eps, kind).unwrap());
        worst[3] = worst[3].max((&jp - &pj).norm());
        let f = v.component(0);
        let jd = mollify_vector(&gradient(f), eps, kind).unwrap();
        let dj = gradient(&mollify(f, eps, kind).unwrap());
        worst[4] = worst[4].max((&jd - &dj).norm());
    }
    let max = worst.iter().copied().fold(0.0, f64::max);
    outcome(
        max <= 1e-10,
        format!(
            "200 fields: idempotence {:.1e}, div {:.1e}, orthogonality {:.1e}, J/P commute {:.1e}, J/grad commute {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut eig, mut sym, mut flagged, mut negatives) = (0.0f64, 0.0f64, 0usize, 0usize);
    for _ in 0..1000 {
        let rho = rng.gen_range(0.1..5.0);
        let v = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let f = rng.gen_range(0.1..5.0);
        let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let r = rng.gen_range(0.1..5.0);
        let xi = [r * theta.cos(), r * theta.sin()];
        let m = SymbolMatrices::at(rho, &v, f, &xi).unwrap();
        let closed = eigenvalues_closed_form(rho, &v, f, &xi).unwrap();
        let numeric = numeric_eigenvalues(&m.symbol);
        for (a, b) in closed.iter().zip(&numeric) {
            eig = eig.max((a - b.re).abs().max(b.im.abs()));
        }
        let a0 = m.symmetrizer.matrix();
        for aj in &m.full {
            sym = sym.max(asymmetry(&(&a0 * aj)));
        }
        // same point with the pressure coefficient flipped
        let bad = analyze_symbol(rho, &v, -f, &xi).unwrap();
        negatives += 1;
        if !bad.hyperbolic && bad.max_imag > 1e-10 && bad.closed_form.is_none() {
            flagged += 1;
        }
    }
    outcome(
        eig <= 1e-10 && sym <= 1e-12 && flagged == negatives,
        format!(
            "1000 points: eigenvalue gap {eig:.1e}, A0 A_j asymmetry {sym:.1e}, f rho < 0 flagged {flagged}/{negatives}"
        ),
    )
}

fn oracle_distances(initial: &State, law: &PressureLaw) -> Result<(f64, [f64; 3]), String> {
    let c = TimeControls::new(T);
    let (a, o) = rayon::join(
        || run_simulation(initial, &SchemeConfig::new(SchemeKind::MollifiedProjected, 1e-6), law, &c),
        || run_simulation(initial, &SchemeConfig::new(SchemeKind::ReductionOracle, 1.0), law, &c),
    );
    let (a, o) = (a.map_err(|e| e.to_string())?, o.map_err(|e| e.to_string())?);
    if a.failure.is_some() || o.failure.is_some() || a.dt != o.dt {
        return Err("runs stopped early or used different steps".into());
    }
    let d = oracle_compare(&a, &o, law).map_err(|e| e.to_string())?;
    Ok((a.dt, [d.v_distance, d.rho_distance, d.pressure_distance]))
}

fn criterion_3() -> Outcome {
    let g = Grid::periodic(N).unwrap();
    let law = PressureLaw::Biofilm { gamma: 0.5 };
    // The benchmark density is a function of the Taylor-Green stream
    // function, so both paths keep it steady; the second initial density
    // is transported and exercises the dynamics.
    let mut moving = benchmark(&g);
    moving.rho_tilde = ScalarField::from_fn(&g, |x, y| 0.1 * x.sin() + 0.05 * (x + 2.0 * y).cos());
    let mut detail = Vec::new();
    let mut pass = true;
    for (name, s) in [("benchmark", benchmark(&g)), ("transported density", moving)] {
        match oracle_distances(&s, &law) {
            Ok((dt, d)) => {
                pass &= d.iter().all(|x| *x <= 1e-6);
                detail.push(format!(
                    "{name}: dt {dt:.4e} (matched), relative distances v {:.1e}, rho {:.1e}, P vs Q - phi {:.1e}",
                    d[0], d[1], d[2]
                ));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{name}: {e}"));
            }
        }
    }
    outcome(pass, detail.join("; "))
}

fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min
}

fn criterion_4(study: &StudyReport) -> Outcome {
    let constants: Vec<f64> = study.rows.iter().filter_map(|r| r.penalty_constant).collect();
    let norms: Vec<f64> = study.rows.iter().map(|r| r.run.max_penalty_norm()).collect();
    let decreasing = norms.windows(2).all(|w| w[1] < w[0]);
    let ok = constants.len() == EPS_SWEEP.len()
        && study.rows.iter().all(|r| r.run.succeeded())
        && spread(&constants) <= 2.0
        && decreasing;
    outcome(
        ok,
        format!(
            "max ||(I-P)v||/eps = {:?}, spread {:.3}x, max ||(I-P)v|| = {:?} (strictly decreasing: {decreasing})",
            constants.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>(),
            spread(&constants),
            norms.iter().map(|c| format!("{c:.3e}")).collect::<Vec<_>>(),
        ),
    )
}

fn criterion_5(study: &StudyReport) -> Outcome {
    let constants: Vec<f64> = study.rows.iter().filter_map(|r| r.divergence_constant).collect();
    let ok = constants.len() == EPS_SWEEP.len()
        && study.rows.iter().all(|r| r.run.succeeded())
        && spread(&constants) <= 2.0;
    outcome(
        ok,
        format!(
            "max ||div v||/eps = {:?}, spread {:.3}x",
            constants.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>(),
            spread(&constants)
        ),
    )
}

fn criterion_6(b: &StudyReport, c: &StudyReport) -> Outcome {
    let (db, dc) = (b.distances(), c.distances());
    let ok = is_nonincreasing(&db, 0.0)
        && is_nonincreasing(&dc, 0.0)
        && b.common_time == T
        && c.common_time == T;
    let fmt = |d: &[f64]| d.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ");
    outcome(
        ok,
        format!(
            "L2 distance to Scheme A (eps {REFERENCE_EPS}) at T = {T}: B [{}] rate {:.2}; C [{}] rate {:.2}",
            fmt(&db),
            b.rate.unwrap_or(f64::NAN),
            fmt(&dc),
            c.rate.unwrap_or(f64::NAN)
        ),
    )
}

fn criterion_7() -> Outcome {
    let g = Grid::periodic(N).unwrap();
    let sep = uniqueness_separation(
        &benchmark(&g),
        &SchemeConfig::new(SchemeKind::MollifiedProjected, REFERENCE_EPS),
        &BENCHMARK_LAW,
        &TimeControls::new(T),
        1e-6,
    )
    .unwrap();
    let line = sep.line.unwrap();
    let defect = sep.linearity_defect();
    outcome(
        defect <= 0.1 && sep.bounded,
        format!(
            "ln W(T)/W(0) = {:.3e}, slope {:.4e}, RMS residual / (slope T) = {defect:.3}, early exponent {:.3e}, Gronwall bound held: {}",
            sep.log_growth.last().unwrap(),
            line.slope,
            sep.early_rate,
            sep.bounded
        ),
    )
}

fn criterion_8(runs: &[&RunReport]) -> Outcome {
    let mut ok = true;
    let (mut worst_curv, mut ls_min, mut ls_max, mut env_min) = (f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY);
    let mut min_rho = f64::INFINITY;
    let mut counted = 0;
    for r in runs.iter().filter(|r| r.succeeded()) {
        counted += 1;
        let fit = energy_shape(r).unwrap();
        let bounded = r
            .times
            .iter()
            .zip(&r.hs_norm)
            .all(|(t, h)| *h <= r.hs_norm[0] * (fit.envelope_rate * t).exp() * (1.0 + 1e-12));
        let lin = (fit.quadratic_slope * fit.horizon).abs().max(0.1);
        worst_curv = worst_curv.max(fit.curvature * fit.horizon * fit.horizon / lin);
        ls_min = ls_min.min(fit.rate);
        ls_max = ls_max.max(fit.rate);
        env_min = env_min.min(fit.envelope_rate);
        min_rho = min_rho.min(r.min_density());
        ok &= fit.envelope_rate >= 0.0 && bounded && !fit.super_exponential(0.1, 0.1) && r.min_density() > 0.0;
    }
    ok &= counted == runs.len();
    outcome(
        ok,
        format!(
            "{counted}/{} runs succeeded; Gronwall exponent >= {env_min:.3e}, least-squares exponents in [{ls_min:.3e}, {ls_max:.3e}], worst curvature ratio {worst_curv:.3} (limit 0.1), min rho {min_rho:.4}",
            runs.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let g = Grid::periodic(N).unwrap();
    let s = benchmark(&g);
    let scheme = SchemeConfig::new(SchemeKind::MollifiedProjected, 0.05);
    let c = TimeControls::new(T);
    let dt0 = cfl_dt(&s, &BENCHMARK_LAW, &c).unwrap();
    let dt = T / (T / dt0).ceil();
    let finals: Vec<State> = [1.0, 0.5, 0.25]
        .iter()
        .map(|f| {
            run_simulation(&s, &scheme, &BENCHMARK_LAW, &c.clone().with_dt(dt * f))
                .unwrap()
                .final_state
        })
        .collect();
    let e1 = finals[0].l2_distance(&finals[1]);
    let e2 = finals[1].l2_distance(&finals[2]);
    let order = (e1 / e2).log2();
    outcome(
        order >= 3.5,
        format!("dt {dt:.4e}: |u(dt) - u(dt/2)| = {e1:.3e}, |u(dt/2) - u(dt/4)| = {e2:.3e}, observed order {order:.3}"),
    )
}

fn criterion_10() -> Outcome {
    let g = Grid::periodic(N).unwrap();
    let s = benchmark(&g);
    let c = TimeControls::new(0.1);
    let mut same = true;
    for kind in [
        SchemeKind::MollifiedProjected,
        SchemeKind::ContinuousProjection,
        SchemeKind::ArtificialCompressibility,
    ] {
        let scheme = SchemeConfig::new(kind, 0.05);
        let a = run_simulation(&s, &scheme, &BENCHMARK_LAW, &c).unwrap();
        let b = run_simulation(&s, &scheme, &BENCHMARK_LAW, &c).unwrap();
        same &= diagnostics_csv(&a) == diagnostics_csv(&b)
            && encode_field_dump(&a.final_state, a.final_time)
                == encode_field_dump(&b.final_state, b.final_time);
    }
    let r = run_simulation(&s, &SchemeConfig::new(SchemeKind::ArtificialCompressibility, 0.05), &BENCHMARK_LAW, &c).unwrap();
    let bytes = encode_field_dump(&r.final_state, r.final_time);
    let back = decode_field_dump(&bytes, std::f64::consts::TAU).unwrap();
    let dump_exact = back.state == r.final_state
        && back.time.to_bits() == r.final_time.to_bits()
        && encode_field_dump(&back.state, back.time) == bytes;
    let csv_exact = parse_diagnostics_csv(&diagnostics_csv(&r)).unwrap() == r.snapshots().collect::<Vec<_>>();
    outcome(
        same && dump_exact && csv_exact,
        format!("repeated runs bit-identical: {same}; field dump round trip exact: {dump_exact}; CSV read-back exact: {csv_exact}"),
    )
}

fn main() {
    let _ = env_logger::builder().is_test(true).try_init();
    let mut results: Vec<(usize, &str, Outcome, f64)> = Vec::new();
    let mut timed = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        results.push((id, name, o, t0.elapsed().as_secs_f64()));
    };
    timed(1, "projector algebra", &criterion_1);
    timed(2, "symbol suite", &criterion_2);
    timed(3, "reduction oracle", &criterion_3);

    let t0 = Instant::now();
    let g = Grid::periodic(N).unwrap();
    let s = benchmark(&g);
    let c = TimeControls::new(T);
    let reference = SchemeConfig::new(SchemeKind::MollifiedProjected, REFERENCE_EPS);
    let (b, cc) = rayon::join(
        || run_study(&s, &SchemeConfig::new(SchemeKind::ContinuousProjection, 0.1), &reference, &BENCHMARK_LAW, &c, &EPS_SWEEP),
        || run_study(&s, &SchemeConfig::new(SchemeKind::ArtificialCompressibility, 0.1), &reference, &BENCHMARK_LAW, &c, &EPS_SWEEP),
    );
    let (b, cc) = (b.unwrap(), cc.unwrap());
    let sweep_time = t0.elapsed().as_secs_f64();
    results.push((4, "penalty bound", criterion_4(&b), sweep_time));
    results.push((5, "Scheme C divergence scaling", criterion_5(&cc), sweep_time));
    results.push((6, "cross-scheme convergence", criterion_6(&b, &cc), sweep_time));

    let mut timed = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        results.push((id, name, o, t0.elapsed().as_secs_f64()));
    };
    timed(7, "uniqueness separation", &criterion_7);
    let mut runs: Vec<&RunReport> = b.rows.iter().chain(&cc.rows).map(|r| &r.run).collect();
    runs.push(&b.reference);
    results.push((8, "energy shape", criterion_8(&runs), 0.0));
    let mut timed = |id: usize, name: &'static str, f: &dyn Fn() -> Outcome| {
        let t0 = Instant::now();
        let o = f();
        results.push((id, name, o, t0.elapsed().as_secs_f64()));
    };
    timed(9, "temporal self-convergence", &criterion_9);
    timed(10, "determinism and round trips", &criterion_10);

    let mut failed = 0;
    for (id, name, o, secs) in &results {
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} criterion {id:>2} ({name}): {} [{secs:.1} s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
