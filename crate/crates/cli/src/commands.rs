use std::f64::consts::PI;

use cohlim::charts::{basic_symbol, convert, Chart, ChartPoint};
use cohlim::coherent::{
    casimir_value, coherent_vector, delta_exponent, diagonal_symbol_closed, identity_resolution_check,
    overlap_closed, symbol, CoherentSpec, QuadratureParams, TAIL_TOLERANCE,
};
use cohlim::dynamics::{
    classical_evolve, classical_from_tau, free_particle_analytic, quantum_evolve, quantum_from_tau,
    uniform_grid, ClassicalState, QuantumOptions, Trajectory,
};
use cohlim::limits::{
    canonical_of, classical_hamiltonian, commutator_correspondence, factorization_defect,
    hamiltonian_limit_check, overlap_decay_study, study_rep, symbol_injectivity_check, Operand,
    SweepReport, STUDY_ORDERING,
};
use cohlim::nbody::{
    build_invariants, build_mode_operators, casimir_identity_check, l_spectrum_check, MultiOscRep,
};
use cohlim::rep::{build_generator, hamiltonian_matrix_with, Generator, RepParams};
use cohlim::{correspondence_compare, HamiltonianPolynomial};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::args::{
    CasimirArgs, EvolveArgs, FreeParticleArgs, LimitArgs, Mode, NList, OverlapArgs, ResolutionArgs,
    Study, SymbolsArgs, TransformArgs,
};
use crate::output::{json_text, Cell, Sink, Table};
use crate::CliError;

/// Matrix-route symbols against closed forms.
pub const SYMBOL_TOL: f64 = 1e-8;
/// Closed-form overlap against the truncated inner product.
pub const OVERLAP_TOL: f64 = 1e-8;
/// Largest deviation of the quadrature from δ_{nn'}.
pub const RESOLUTION_TOL: f64 = 1e-8;
/// Integrated free-particle orbit against the closed form.
pub const FREE_PARTICLE_TOL: f64 = 1e-8;
/// Samples of the sizing orbit used to pick quantum cutoffs.
const SIZING_SAMPLES: usize = 256;

/// 0 when every check passed, 1 otherwise.
pub type Status = u8;

fn status(pass: bool) -> Status {
    if pass {
        0
    } else {
        1
    }
}

fn complex((re, im): (f64, f64)) -> Complex64 {
    Complex64::new(re, im)
}

pub fn transform(sink: &Sink, a: &TransformArgs) -> Result<Status, CliError> {
    let p = ChartPoint::new(a.chart, [a.coords.0, a.coords.1])?;
    let targets: Vec<Chart> = match &a.to {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<Chart>())
            .collect::<Result<_, _>>()?,
        None => Chart::ALL
            .into_iter()
            .filter(|c| a.k.is_some() || !c.needs_k())
            .collect(),
    };
    let mut table = Table::new(vec!["chart", "x", "y"]);
    for target in targets {
        let [x, y] = convert(&p, target, a.k)?.coords();
        table.push(vec![target.to_string().into(), x.into(), y.into()]);
    }
    sink.table("transform", &table)?;
    Ok(0)
}

pub fn symbols(sink: &Sink, a: &SymbolsArgs) -> Result<Status, CliError> {
    let tau = complex(a.tau);
    let rep = match a.cutoff {
        Some(c) => RepParams::new(a.n, a.k, c)?,
        None => study_rep(a.n, a.k, tau, 1)?,
    };
    let spec = CoherentSpec::new(rep, tau)?;
    let (v, w) = canonical_of(tau, a.k)?;
    let mut table = Table::new(vec!["symbol", "matrix", "closed", "classical"]);
    let mut pass = true;
    for g in [
        Generator::K0,
        Generator::K1,
        Generator::K2,
        Generator::A,
        Generator::B,
        Generator::C,
        Generator::Casimir,
    ] {
        let matrix = symbol(&build_generator(&rep, g), &spec)?.re;
        let closed = match g {
            Generator::Casimir => casimir_value(&rep),
            _ => diagonal_symbol_closed(g, tau, a.k)?,
        };
        let classical = basic_symbol(g, a.k)?.evaluate(v, w)?;
        pass &= (matrix - closed).abs() <= SYMBOL_TOL * closed.abs().max(1.0);
        table.push(vec![g.to_string().into(), matrix.into(), closed.into(), classical.into()]);
    }
    sink.table("symbols", &table)?;
    Ok(status(pass))
}

pub fn overlap(sink: &Sink, a: &OverlapArgs) -> Result<Status, CliError> {
    let (t1, t2) = (complex(a.tau), complex(a.tau2));
    let j = a.n as f64 * a.k;
    let closed = overlap_closed(t1, t2, j)?;
    let s1 = CoherentSpec::with_auto_cutoff(a.n, a.k, t1, TAIL_TOLERANCE)?;
    let s2 = CoherentSpec::with_auto_cutoff(a.n, a.k, t2, TAIL_TOLERANCE)?;
    let rep = s1.rep().with_cutoff(s1.rep().cutoff().max(s2.rep().cutoff()));
    let brute = coherent_vector(&CoherentSpec::new(rep, t1)?)?
        .inner(&coherent_vector(&CoherentSpec::new(rep, t2)?)?)?;
    let delta = delta_exponent(t1, t2, a.k)?;
    let decay = (-(a.n as f64) * delta).exp();
    let mut table = Table::new(vec!["quantity", "re", "im", "abs"]);
    for (name, z) in [
        ("overlap_closed", closed),
        ("overlap_truncated", brute),
        ("delta", delta),
        ("exp_minus_n_delta", decay),
    ] {
        table.push(vec![name.into(), z.re.into(), z.im.into(), z.norm().into()]);
    }
    sink.table("overlap", &table)?;
    Ok(status((brute - closed).norm() <= OVERLAP_TOL))
}

pub fn resolution_check(sink: &Sink, a: &ResolutionArgs) -> Result<Status, CliError> {
    let rep = match a.j {
        Some(j) => RepParams::new(1, j, a.max_n)?,
        None => RepParams::new(a.n, a.k, a.max_n)?,
    };
    let deviation = identity_resolution_check(&rep, a.max_n, QuadratureParams { order: a.order })?;
    let pass = deviation <= RESOLUTION_TOL;
    let mut table = Table::new(vec!["J", "max_n", "order", "deviation", "threshold", "pass"]);
    table.push(vec![
        rep.j().into(),
        a.max_n.into(),
        a.order.into(),
        deviation.into(),
        RESOLUTION_TOL.into(),
        pass.into(),
    ]);
    sink.table("resolution-check", &table)?;
    Ok(status(pass))
}

/// Limit-check parameters after study defaults are applied.
#[derive(Debug, Clone)]
struct StudyParams {
    tau: Complex64,
    tau2: Complex64,
    k: f64,
    ns: Vec<u32>,
    x: Operand,
    y: Operand,
    h: HamiltonianPolynomial,
    grid: usize,
    tmax: f64,
    steps: usize,
}

fn nlist(s: &str) -> Vec<u32> {
    s.parse::<NList>().expect("valid default N list").0
}

fn study_params(study: Study, a: &LimitArgs) -> Result<StudyParams, CliError> {
    let default_tau = match study {
        Study::OverlapDecay => (0.0, 0.0),
        Study::Correspondence => (0.3, 0.0),
        _ => (0.5, 0.0),
    };
    let default_ns = match study {
        Study::OverlapDecay => nlist("1..256:x2"),
        Study::Injectivity => vec![4],
        Study::Correspondence => nlist("4..128:x2"),
        _ => nlist("2..256:x2"),
    };
    let (default_x, default_y) = match study {
        Study::Bracket => (Generator::A, Generator::B),
        _ => (Generator::K0, Generator::K0),
    };
    let default_h = match study {
        Study::Correspondence => "C + 0.5*A^2",
        _ => "A^2",
    };
    Ok(StudyParams {
        tau: complex(a.tau.unwrap_or(default_tau)),
        tau2: complex(a.tau2.unwrap_or((0.5, 0.0))),
        k: a.k.unwrap_or(1.0),
        ns: a.n.clone().map(|l| l.0).unwrap_or(default_ns),
        x: a.x.clone().unwrap_or(default_x.into()),
        y: a.y.clone().unwrap_or(default_y.into()),
        h: match &a.h {
            Some(h) => h.clone(),
            None => default_h.parse()?,
        },
        grid: a.grid.unwrap_or(5),
        tmax: a.tmax.unwrap_or(1.0),
        steps: a.steps.unwrap_or(10),
    })
}

/// Radii 0.15, 0.30, ... times `m` staggered angles.
pub fn injectivity_grid(m: usize) -> Vec<Complex64> {
    let mut grid = Vec::with_capacity(m * m);
    for i in 0..m {
        let r = 0.75 * (i + 1) as f64 / m as f64;
        for j in 0..m {
            let theta = 2.0 * PI * j as f64 / m as f64 + 0.3 * i as f64;
            grid.push(Complex64::from_polar(r, theta));
        }
    }
    grid
}

fn sweep_outputs(name: &str, report: &SweepReport) -> (Table, Value) {
    let mut table = Table::new(vec!["N", "value", "reference", "abs_error"]);
    for r in &report.rows {
        table.push(vec![r.n.into(), r.value.into(), r.reference.into(), r.abs_error().into()]);
    }
    let fit = report.fit.as_ref();
    let summary = json!({
        "study": name,
        "label": report.study,
        "slope": fit.map(|f| f.slope),
        "intercept": fit.map(|f| f.intercept),
        "residual": fit.map(|f| f.residual),
        "fit_points": fit.map(|f| f.points),
        "max_abs_error": report.max_abs_error(),
        "pass": report.pass,
        "detail": report.detail,
    });
    (table, summary)
}

fn run_study(study: Study, p: &StudyParams) -> Result<(Table, Value), CliError> {
    let name = study.name();
    let report = match study {
        Study::OverlapDecay => overlap_decay_study(p.tau, p.tau2, p.k, &p.ns)?,
        Study::Factorization => factorization_defect(&p.x, &p.y, p.tau, p.k, &p.ns)?,
        Study::Bracket => commutator_correspondence(&p.x, &p.y, p.tau, p.k, &p.ns)?,
        Study::Hamiltonian => hamiltonian_limit_check(&p.h, p.tau, p.k, &p.ns)?,
        Study::Correspondence => {
            correspondence_compare(&p.h, p.tau, p.k, &p.ns, &uniform_grid(p.tmax, p.steps)?)?
        }
        Study::Injectivity => {
            let grid = injectivity_grid(p.grid);
            let r_max = grid.iter().map(|t| t.norm()).fold(0.0, f64::max);
            let n = p.ns.first().copied().unwrap_or(4);
            let rep = study_rep(n, p.k, Complex64::new(r_max, 0.0), 1)?;
            let report = symbol_injectivity_check(&grid, &rep)?;
            let mut table = Table::new(vec!["index", "singular_value"]);
            for (i, s) in report.singular_values.iter().enumerate() {
                table.push(vec![i.into(), (*s).into()]);
            }
            let summary = json!({
                "study": name,
                "label": format!("injectivity N={n}, {} points", grid.len()),
                "slope": null,
                "intercept": null,
                "residual": null,
                "rank": report.rank,
                "duplicates": report.duplicates,
                "pass": report.pass,
            });
            return Ok((table, summary));
        }
    };
    Ok(sweep_outputs(name, &report))
}

/// Runs each study with its own resolved flags. A study that errors is
/// reported and skipped; results of the others are still written.
pub fn limit_check(sink: &Sink, jobs: &[(Study, LimitArgs)]) -> Result<Status, CliError> {
    let mut summaries = Vec::new();
    let mut failed = false;
    let mut first_error: Option<CliError> = None;
    for (study, args) in jobs {
        let outcome = study_params(*study, args).and_then(|p| run_study(*study, &p));
        match outcome {
            Ok((table, summary)) => {
                failed |= summary["pass"] != Value::Bool(true);
                sink.file(&format!("{}.csv", study.name()), &table.to_csv())?;
                sink.file(&format!("{}.json", study.name()), &json_text(&summary))?;
                summaries.push(summary);
            }
            Err(e) => {
                eprintln!("error: {}: {}", study.name(), e.message);
                if first_error.as_ref().is_none_or(|f| e.code > f.code) {
                    first_error = Some(e);
                }
            }
        }
    }
    if sink.json {
        print!("{}", json_text(&Value::Array(summaries)));
    } else {
        let mut t = Table::new(vec!["study", "pass", "slope", "intercept", "residual", "max_abs_error"]);
        for s in &summaries {
            let num = |key: &str| s[key].as_f64().map(Cell::Num).unwrap_or(Cell::Empty);
            t.push(vec![
                s["study"].as_str().unwrap_or_default().into(),
                (s["pass"] == Value::Bool(true)).into(),
                num("slope"),
                num("intercept"),
                num("residual"),
                num("max_abs_error"),
            ]);
        }
        print!("{}", t.to_csv());
    }
    match first_error {
        Some(mut e) => {
            e.message = "one or more studies could not run".into();
            Err(e)
        }
        None => Ok(status(!failed)),
    }
}

fn quantum_run(a: &EvolveArgs, tau0: Complex64) -> Result<Trajectory, CliError> {
    let opts = QuantumOptions::default();
    Ok(match a.cutoff {
        Some(cutoff) => {
            let rep = RepParams::new(a.n, a.k, cutoff)?;
            let hm = hamiltonian_matrix_with(&rep, &a.h, STUDY_ORDERING)?;
            let psi = coherent_vector(&CoherentSpec::new(rep, tau0)?)?;
            quantum_evolve(&hm, &psi, &uniform_grid(a.tmax, a.steps)?, &opts)?
        }
        None => {
            let sizing = classical_from_tau(&a.h, tau0, a.k, &uniform_grid(a.tmax, SIZING_SAMPLES)?)?;
            quantum_from_tau(&a.h, tau0, a.k, a.n, &uniform_grid(a.tmax, a.steps)?, &sizing, &opts)?
        }
    })
}

pub fn evolve(sink: &Sink, a: &EvolveArgs) -> Result<Status, CliError> {
    let grid = uniform_grid(a.tmax, a.steps)?;
    let (tau0, (v0, w0)) = match (a.tau0, a.start) {
        (_, Some((v, w))) => {
            let p = convert(&ChartPoint::canonical(v, w)?, Chart::Tau, Some(a.k))?.coords();
            (Complex64::new(p[0], p[1]), (v, w))
        }
        (tau0, None) => {
            let tau0 = complex(tau0.unwrap_or((0.0, 0.0)));
            (tau0, canonical_of(tau0, a.k)?)
        }
    };
    let classical = match a.mode {
        Mode::Quantum => None,
        _ => Some(classical_evolve(
            &classical_hamiltonian(&a.h, a.k),
            ClassicalState::new(0.0, v0, w0)?,
            a.k,
            &grid,
            a.tol,
        )?),
    };
    let quantum = match a.mode {
        Mode::Classical => None,
        _ => Some(quantum_run(a, tau0)?),
    };
    let table = match (&quantum, &classical) {
        (Some(q), None) | (None, Some(q)) => {
            let last = if quantum.is_some() { "norm" } else { "energy" };
            let mut t = Table::new(vec!["t", "A", "B", "C", last]);
            for s in &q.samples {
                t.push(vec![s.t.into(), s.a.into(), s.b.into(), s.c.into(), s.diagnostic.into()]);
            }
            t
        }
        (Some(q), Some(c)) => {
            let mut t = Table::new(vec![
                "t", "A", "B", "C", "norm", "A_cl", "B_cl", "C_cl", "energy", "deviation",
            ]);
            for (s, r) in q.samples.iter().zip(&c.samples) {
                let dev = (s.a - r.a).abs().max((s.b - r.b).abs()).max((s.c - r.c).abs());
                t.push(vec![
                    s.t.into(),
                    s.a.into(),
                    s.b.into(),
                    s.c.into(),
                    s.diagnostic.into(),
                    r.a.into(),
                    r.b.into(),
                    r.c.into(),
                    r.diagnostic.into(),
                    dev.into(),
                ]);
            }
            t
        }
        (None, None) => unreachable!("at least one mode runs"),
    };
    sink.table("evolve", &table)?;
    Ok(0)
}

pub fn freeparticle(sink: &Sink, a: &FreeParticleArgs) -> Result<Status, CliError> {
    let start = ClassicalState::new(0.0, a.start.0, a.start.1)?;
    let grid = uniform_grid(a.tmax, a.steps)?;
    let h_cl = classical_hamiltonian(&HamiltonianPolynomial::invariant(cohlim::Invariant::C), a.k);
    let integrated = classical_evolve(&h_cl, start, a.k, &grid, a.tol)?;
    let mut table = Table::new(vec!["t", "v", "w", "p", "r", "energy", "deviation"]);
    let mut worst = 0.0f64;
    for (&t, num) in grid.iter().zip(&integrated.states) {
        let exact = free_particle_analytic(start, a.k, t)?;
        let (p, r) = exact.radial();
        let energy = exact.v * exact.v * exact.w + a.k * a.k / exact.w;
        let dev = (num.v - exact.v).abs().max((num.w - exact.w).abs());
        worst = worst.max(dev);
        table.push(vec![
            t.into(),
            exact.v.into(),
            exact.w.into(),
            p.into(),
            r.into(),
            energy.into(),
            dev.into(),
        ]);
    }
    sink.table("freeparticle", &table)?;
    Ok(status(worst <= FREE_PARTICLE_TOL))
}

pub fn casimir_check(sink: &Sink, a: &CasimirArgs) -> Result<Status, CliError> {
    let rep = match a.ceiling {
        Some(c) => MultiOscRep::with_ceiling(a.n, a.d, c)?,
        None => MultiOscRep::new(a.n, a.d)?,
    };
    let modes = build_mode_operators(&rep);
    let inv = build_invariants(&rep, &modes);
    let cas = casimir_identity_check(&rep, &inv);
    let spec = l_spectrum_check(&rep, &inv);
    let pass = cas.pass && spec.pass;
    let levels: Vec<Value> = spec
        .levels
        .iter()
        .map(|lv| {
            json!({
                "level": lv.level,
                "matched": lv.matched.iter().map(|(l, ev, mult)| json!({
                    "l": l, "eigenvalue": ev, "multiplicity": mult,
                })).collect::<Vec<_>>(),
                "unmatched": lv.unmatched,
            })
        })
        .collect();
    let sectors: Vec<Value> = spec
        .sectors
        .iter()
        .map(|s| {
            json!({
                "level": s.level, "l": s.l, "k": s.k, "multiplicity": s.multiplicity,
                "l_sq_error": s.l_sq_error, "k_error": s.k_error,
            })
        })
        .collect();
    let report = json!({
        "n_particles": rep.n_particles(),
        "per_mode_cutoff": rep.per_mode_cutoff(),
        "dimension": rep.dim(),
        "safe_max_excitation": rep.safe_max_excitation(),
        "casimir": {
            "residual": cas.residual,
            "threshold": cas.threshold,
            "pass": cas.pass,
        },
        "l_spectrum": {
            "pass": spec.pass,
            "fractional_l": spec.fractional_l,
            "levels": levels,
            "sectors": sectors,
        },
        "pass": pass,
    });
    let text = json_text(&report);
    print!("{text}");
    sink.file("casimir-check.json", &text)?;
    Ok(status(pass))
}
