//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Reference values are computed here from closed forms, not taken
//! from the library under test.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use cohlim::charts::{metric_coefficient, metric_from_potential, Chart, ChartPoint, PhaseObservable};
use cohlim::coherent::{
    coherent_vector, identity_resolution_check, overlap_closed, symbol, CoherentSpec, QuadratureParams,
    TAIL_TOLERANCE,
};
use cohlim::dynamics::{
    classical_evolve, classical_from_tau, correspondence_compare, quantum_from_tau, uniform_grid, ClassicalState,
    QuantumOptions,
};
use cohlim::limits::{
    classical_hamiltonian, commutator_correspondence, factorization_defect,
    overlap_decay_study, study_rep, Operand, CORRESPONDENCE_SLOPE_BAND, SLOPE_BAND,
};
use cohlim::nbody::{build_invariants, build_mode_operators, casimir_identity_check, restrict, MultiOscRep};
use cohlim::rep::{build_generator, Generator, RepParams};
use cohlim::{convert, Error, HamiltonianPolynomial};
use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_611;

const C1_CASES: usize = 200;
const C1_TOL: f64 = 1e-8;
const C2_REL_TOL: f64 = 1e-10;
const C2_N_MAX: u32 = 256;
const C3_TOL: f64 = 1e-8;
const C3_MAX_N: usize = 10;
const C3_ORDER: usize = 64;
const C4_TOL: f64 = 1e-8;
const C5_ZERO_TOL: f64 = 1e-15;
const C5_ORACLE_REL_TOL: f64 = 1e-8;
const C6_TOL: f64 = 1e-10;
const C7_TOL: f64 = 1e-12;
const C8_TOL: f64 = 1e-8;
const C8_INTEGRATOR_TOL: f64 = 1e-10;
const C9_DECREASE_SLACK: f64 = 0.0;
const C10_TOL: f64 = 1e-10;
const C10_TOL_N3: f64 = 1e-9;
const C10_SPECTRUM_TOL: f64 = 1e-8;
const C11_FD_STEP: f64 = 1e-4;
const C11_FD_REL_TOL: f64 = 1e-6;
const C11_PULLBACK_REL_TOL: f64 = 1e-8;

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

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// ⟨τ|τ'⟩ by direct summation of Σ_n Γ(2J+n)/(n! Γ(2J)) (τ*τ')^n.
fn overlap_series(t1: Complex64, t2: Complex64, j: f64) -> Complex64 {
    let z = t1.conj() * t2;
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut n = 0.0;
    while term.norm() > 1e-20 * sum.norm() || n < 10.0 {
        term *= z * (2.0 * j + n) / (n + 1.0);
        sum += term;
        n += 1.0;
    }
    sum * ((1.0 - t1.norm_sqr()) * (1.0 - t2.norm_sqr())).powf(j)
}

/// Re Δ with ⟨τ|τ'⟩ = exp(-N Δ).
fn re_delta(t1: Complex64, t2: Complex64, k: f64) -> f64 {
    let cross = (Complex64::new(1.0, 0.0) - t2 * t1.conj()).norm().ln();
    -k * ((1.0 - t1.norm_sqr()).ln() + (1.0 - t2.norm_sqr()).ln() - 2.0 * cross)
}

/// (v, w) from z = (i + τ)/(i - τ) = ϱ - i v and w = k/ϱ.
fn canonical(tau: Complex64, k: f64) -> (f64, f64) {
    let i = Complex64::new(0.0, 1.0);
    let z = (i + tau) / (i - tau);
    (-z.im, k / z.re)
}

fn abc(v: f64, w: f64, k: f64) -> [f64; 3] {
    [w, 2.0 * v * w, v * v * w + k * k / w]
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_lib = 0.0f64;
    let mut worst_series = 0.0f64;
    for _ in 0..C1_CASES {
        let mut disk = || Complex64::from_polar(rng.random_range(0.0..=0.8), rng.random_range(0.0..2.0 * PI));
        let (t1, t2) = (disk(), disk());
        let j: f64 = rng.random_range(0.75..=50.0);
        let closed = overlap_closed(t1, t2, j).unwrap();
        let s1 = CoherentSpec::with_auto_cutoff(1, j, t1, TAIL_TOLERANCE).unwrap();
        let s2 = CoherentSpec::with_auto_cutoff(1, j, t2, TAIL_TOLERANCE).unwrap();
        let rep = s1.rep().with_cutoff(s1.rep().cutoff().max(s2.rep().cutoff()));
        let truncated = coherent_vector(&CoherentSpec::new(rep, t1).unwrap())
            .unwrap()
            .inner(&coherent_vector(&CoherentSpec::new(rep, t2).unwrap()).unwrap())
            .unwrap();
        worst_lib = worst_lib.max((truncated - closed).norm());
        worst_series = worst_series.max((overlap_series(t1, t2, j) - closed).norm());
    }
    outcome(
        worst_lib <= C1_TOL && worst_series <= C1_TOL,
        format!(
            "{C1_CASES} seeded cases: max |truncated - closed| {worst_lib:.2e}, max |series - closed| {worst_series:.2e} (tol {C1_TOL:.0e})"
        ),
    )
}

fn criterion_2() -> Outcome {
    let pairs = [
        (c(0.0, 0.0), c(0.5, 0.0), 1.0),
        (c(0.3, 0.2), c(-0.4, 0.1), 1.0),
        (c(0.0, 0.7), c(0.6, 0.0), 0.75),
        (c(0.8, 0.0), c(0.79, 0.05), 2.0),
    ];
    let mut worst = 0.0f64;
    let mut worst_brute = 0.0f64;
    let mut studies_pass = true;
    for (t1, t2, k) in pairs {
        let rd = re_delta(t1, t2, k);
        for n in 1..=C2_N_MAX {
            let value = overlap_closed(t1, t2, n as f64 * k).unwrap().norm();
            let reference = (-(n as f64) * rd).exp();
            worst = worst.max((value - reference).abs() / reference);
        }
        for n in [1u32, 2, 4, 8] {
            let s1 = CoherentSpec::with_auto_cutoff(n, k, t1, 1e-16).unwrap();
            let s2 = CoherentSpec::with_auto_cutoff(n, k, t2, 1e-16).unwrap();
            let rep = s1.rep().with_cutoff(s1.rep().cutoff().max(s2.rep().cutoff()));
            let brute = coherent_vector(&CoherentSpec::new(rep, t1).unwrap())
                .unwrap()
                .inner(&coherent_vector(&CoherentSpec::new(rep, t2).unwrap()).unwrap())
                .unwrap()
                .norm();
            let reference = (-(n as f64) * rd).exp();
            worst_brute = worst_brute.max((brute - reference).abs() / reference);
        }
        let ns: Vec<u32> = (1..=C2_N_MAX).collect();
        studies_pass &= overlap_decay_study(t1, t2, k, &ns).unwrap().pass;
    }
    outcome(
        worst <= C2_REL_TOL && worst_brute <= C2_REL_TOL && studies_pass,
        format!(
            "N = 1..{C2_N_MAX}, 4 pairs: max rel error closed {worst:.2e}, truncated basis (N <= 8) {worst_brute:.2e}, study fits pass {studies_pass} (tol {C2_REL_TOL:.0e})"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for j in [1.0, 3.0, 10.0] {
        let rep = RepParams::new(1, j, C3_MAX_N).unwrap();
        let dev = identity_resolution_check(&rep, C3_MAX_N, QuadratureParams { order: C3_ORDER }).unwrap();
        pass &= dev <= C3_TOL;
        parts.push(format!("J={j}: {dev:.2e}"));
    }
    let rejected = matches!(
        identity_resolution_check(&RepParams::new(1, 0.4, C3_MAX_N).unwrap(), C3_MAX_N, QuadratureParams::default()),
        Err(Error::NotNormalizable(_))
    );
    pass &= rejected;
    outcome(
        pass,
        format!(
            "max |quadrature - delta| for n,n' <= {C3_MAX_N}, order {C3_ORDER}: {} (tol {C3_TOL:.0e}); J=0.4 rejected {rejected}",
            parts.join(", ")
        ),
    )
}

fn criterion_4() -> Outcome {
    let k = 1.0;
    let mut worst = 0.0f64;
    let mut points = 0;
    for n in [1u32, 3] {
        for i in 0..10 {
            for a in 0..10 {
                let tau = Complex64::from_polar(0.09 * i as f64, 2.0 * PI * a as f64 / 10.0 + 0.05 * i as f64);
                let x = tau.norm_sqr();
                let closed = [
                    k * (1.0 + x) / (1.0 - x),
                    2.0 * k * tau.re / (1.0 - x),
                    -2.0 * k * tau.im / (1.0 - x),
                ];
                let rep = study_rep(n, k, tau, 1).unwrap();
                let spec = CoherentSpec::new(rep, tau).unwrap();
                for (g, want) in [Generator::K0, Generator::K1, Generator::K2].into_iter().zip(closed) {
                    let got = symbol(&build_generator(&rep, g), &spec).unwrap();
                    worst = worst.max((got - want).norm());
                }
                points += 1;
            }
        }
    }
    let tau = c(0.5, 0.0);
    let rep = study_rep(1, k, tau, 1).unwrap();
    let spec = CoherentSpec::new(rep, tau).unwrap();
    let (v, w) = canonical(tau, k);
    let vw = abc(v, w, k);
    let want = [5.0 / 3.0, 8.0 / 3.0, 5.0 / 3.0];
    let mut cross = 0.0f64;
    for ((g, via_vw), want) in [Generator::A, Generator::B, Generator::C].into_iter().zip(vw).zip(want) {
        let via_matrix = symbol(&build_generator(&rep, g), &spec).unwrap().re;
        cross = cross.max((via_matrix - want).abs()).max((via_vw - want).abs());
    }
    let lib_vw = convert(&ChartPoint::tau(tau).unwrap(), Chart::Canonical, Some(k)).unwrap().coords();
    cross = cross.max((lib_vw[0] - v).abs()).max((lib_vw[1] - w).abs());
    outcome(
        worst <= C4_TOL && cross <= C4_TOL,
        format!(
            "{points} grid points (N=1,3): max |matrix - closed| {worst:.2e}; (A,B,C)(0.5) = (5/3, 8/3, 5/3) by both routes within {cross:.2e} (tol {C4_TOL:.0e})"
        ),
    )
}

fn criterion_5() -> Outcome {
    let k = 1.0;
    let ns: Vec<u32> = (1..=8).map(|p| 1 << p).collect();
    let k0 = Operand::Generator(Generator::K0);
    let report = factorization_defect(&k0, &k0, c(0.5, 0.0), k, &ns).unwrap();
    let slope = report.fit.map(|f| f.slope).unwrap_or(f64::NAN);
    let in_band = slope >= SLOPE_BAND.0 && slope <= SLOPE_BAND.1;
    // negative-binomial occupation: Var(K0) = 2 k x / (N (1-x)²)
    let x = 0.25;
    let oracle_err = report
        .rows
        .iter()
        .map(|r| {
            let want = 2.0 * k * x / (r.n as f64 * (1.0 - x) * (1.0 - x));
            (r.value - want).abs() / want
        })
        .fold(0.0, f64::max);
    let zero = factorization_defect(&k0, &k0, c(0.0, 0.0), k, &ns).unwrap();
    let zero_max = zero.rows.iter().map(|r| r.value).fold(0.0, f64::max);
    outcome(
        in_band && oracle_err <= C5_ORACLE_REL_TOL && zero_max <= C5_ZERO_TOL,
        format!(
            "(K0,K0) at tau=0.5, N=2..256: slope {slope:.6} (band [{}, {}]), max rel deviation from 2kx/(N(1-x)^2) {oracle_err:.2e}; tau=0 max defect {zero_max:.1e} (tol {C5_ZERO_TOL:.0e})",
            SLOPE_BAND.0, SLOPE_BAND.1
        ),
    )
}

fn criterion_6() -> Outcome {
    let k = 1.0;
    let ns = [1u32, 2, 4, 8, 16, 32, 64];
    let taus = [c(0.0, 0.0), c(0.5, 0.0), c(0.0, 0.4), c(-0.3, 0.6)];
    let gens = [Generator::A, Generator::B, Generator::C];
    let mut worst = 0.0f64;
    for tau in taus {
        let (v, w) = canonical(tau, k);
        let [a, b, cc] = abc(v, w, k);
        // {A,B} = -2A, {A,C} = -B, {B,C} = -2C
        let bracket = |x: usize, y: usize| -> f64 {
            let table = [[0.0, -2.0 * a, -b], [2.0 * a, 0.0, -2.0 * cc], [b, 2.0 * cc, 0.0]];
            table[x][y]
        };
        for x in 0..3 {
            for y in 0..3 {
                let r = commutator_correspondence(&gens[x].into(), &gens[y].into(), tau, k, &ns).unwrap();
                for row in &r.rows {
                    worst = worst.max((row.value - bracket(x, y)).abs());
                }
            }
        }
    }
    let a2: Operand = "A^2".parse().unwrap();
    let composite =
        commutator_correspondence(&a2, &Generator::C.into(), c(0.5, 0.0), k, &[2, 4, 8, 16, 32, 64, 128]).unwrap();
    let slope = composite.fit.map(|f| f.slope).unwrap_or(f64::NAN);
    let in_band = slope >= SLOPE_BAND.0 && slope <= SLOPE_BAND.1;
    outcome(
        worst <= C6_TOL && in_band,
        format!(
            "9 ordered pairs of (A,B,C), 4 tau points, N=1..64: max |symbol(iN[X,Y]) - {{x,y}}| {worst:.2e} (tol {C6_TOL:.0e}); (A^2, C) slope {slope:.4} (band [{}, {}])",
            SLOPE_BAND.0, SLOPE_BAND.1
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut exact = true;
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    for k in [0.25, 0.75, 1.0, 2.5] {
        let h_cl = classical_hamiltonian(&"C".parse().unwrap(), k);
        let want = PhaseObservable::from_terms([((2, 1), 1.0), ((0, -1), k * k)]);
        exact &= h_cl == want;
        let l_sq = 4.0 * k * k;
        for _ in 0..50 {
            let p: f64 = rng.random_range(-3.0..3.0);
            let r: f64 = rng.random_range(0.2..4.0);
            let radial = p * p / 2.0 + l_sq / (2.0 * r * r);
            let got = h_cl.evaluate(p / r, r * r / 2.0).unwrap();
            worst = worst.max((got - radial).abs() / radial);
        }
    }
    outcome(
        exact && worst <= C7_TOL,
        format!(
            "h = C gives v^2 w + k^2/w coefficient-exactly: {exact}; max rel |h_cl(p/r, r^2/2) - (p^2/2 + 4k^2/(2r^2))| {worst:.2e} (tol {C7_TOL:.0e})"
        ),
    )
}

fn criterion_8() -> Outcome {
    let h: HamiltonianPolynomial = "C".parse().unwrap();
    let mut worst_cl = 0.0f64;
    let grid = uniform_grid(5.0, 50).unwrap();
    for (v0, w0, k) in [(0.0, 1.0, 1.0), (0.7, 0.4, 0.5), (-1.2, 2.0, 1.5), (0.3, 3.0, 0.25)] {
        let hval = v0 * v0 * w0 + k * k / w0;
        let tr = classical_evolve(
            &classical_hamiltonian(&h, k),
            ClassicalState::new(0.0, v0, w0).unwrap(),
            k,
            &grid,
            C8_INTEGRATOR_TOL,
        )
        .unwrap();
        for s in &tr.states {
            let t = s.t;
            let w = w0 + 2.0 * v0 * w0 * t + hval * t * t;
            let v = (2.0 * v0 * w0 + 2.0 * hval * t) / (2.0 * w);
            worst_cl = worst_cl.max((s.w - w).abs()).max((s.v - v).abs());
        }
    }

    let qgrid = uniform_grid(2.0, 20).unwrap();
    let sizing = classical_from_tau(&h, c(0.0, 0.0), 1.0, &uniform_grid(2.0, 256).unwrap()).unwrap();
    let mut worst_q = 0.0f64;
    let mut worst_norm = 0.0f64;
    let ns = [1u32, 2, 4, 8, 16, 32];
    for n in ns {
        let tr = quantum_from_tau(&h, c(0.0, 0.0), 1.0, n, &qgrid, &sizing, &QuantumOptions::default()).unwrap();
        for s in &tr.samples {
            worst_q = worst_q.max((s.a - (1.0 + s.t * s.t)).abs());
            worst_norm = worst_norm.max((s.diagnostic - 1.0).abs());
        }
    }

    let out = Command::new(env!("CARGO_BIN_EXE_cohlim"))
        .args(["evolve", "--mode", "both", "--h", "C", "--tau0", "0,0", "--k", "1", "--N", "8", "--tmax", "2"])
        .output()
        .expect("cli runs");
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = header.iter().position(|h| *h == "deviation");
    let worst_cli = match col {
        Some(col) => lines
            .map(|l| l.split(',').nth(col).unwrap().parse::<f64>().unwrap())
            .fold(0.0, f64::max),
        None => f64::INFINITY,
    };
    outcome(
        out.status.success() && worst_cl <= C8_TOL && worst_q <= C8_TOL && worst_cli <= C8_TOL,
        format!(
            "classical vs w0 + 2v0w0t + ht^2 on [0,5]: {worst_cl:.2e}; quantum <A>(t) vs 1+t^2, N=1..32: {worst_q:.2e} (norm drift {worst_norm:.1e}); CLI deviation column max {worst_cli:.2e} (tol {C8_TOL:.0e})"
        ),
    )
}

fn criterion_9() -> Outcome {
    let h: HamiltonianPolynomial = "C + 0.5*A^2".parse().unwrap();
    let ns = [4u32, 8, 16, 32, 64, 128];
    let r = correspondence_compare(&h, c(0.3, 0.0), 1.0, &ns, &uniform_grid(1.0, 10).unwrap()).unwrap();
    let slope = r.fit.map(|f| f.slope).unwrap_or(f64::NAN);
    let in_band = slope >= CORRESPONDENCE_SLOPE_BAND.0 && slope <= CORRESPONDENCE_SLOPE_BAND.1;
    let decreasing = r.rows.windows(2).all(|p| p[1].value < p[0].value * (1.0 - C9_DECREASE_SLACK));
    let values: Vec<String> = r.rows.iter().map(|row| format!("{:.2e}", row.value)).collect();
    outcome(
        in_band && decreasing,
        format!(
            "h = C + A^2/2, tau0 = 0.3, t <= 1, N = 4..128: deviations [{}], monotone {decreasing}, slope {slope:.4} (band [{}, {}])",
            values.join(", "),
            CORRESPONDENCE_SLOPE_BAND.0,
            CORRESPONDENCE_SLOPE_BAND.1
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, d, tol) in [(1u32, 30usize, C10_TOL), (2, 12, C10_TOL), (3, 8, C10_TOL_N3)] {
        let rep = MultiOscRep::new(n, d).unwrap();
        let modes = build_mode_operators(&rep);
        let inv = build_invariants(&rep, &modes);
        let residual = casimir_identity_check(&rep, &inv).residual;
        let nf = n as f64;
        // L² on each safe level against l(l + 1 - 2/N), l = l_std/N, l_std = level, level-2, ...
        let mut spectrum_err = 0.0f64;
        let mut eigen_count = 0;
        for level in 0..=rep.safe_max_excitation() {
            let idx = rep.level_indices(level);
            let m = restrict(&inv.lsq, &idx, &idx);
            let herm = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
            for ev in SymmetricEigen::new(herm).eigenvalues.iter() {
                let best = (0..=level)
                    .rev()
                    .step_by(2)
                    .map(|ls| {
                        let l = ls as f64 / nf;
                        (ev - l * (l + 1.0 - 2.0 / nf)).abs()
                    })
                    .fold(f64::INFINITY, f64::min);
                spectrum_err = spectrum_err.max(best);
                eigen_count += 1;
            }
        }
        // lowest-weight vectors of each level: K0 = k with k = (l + 1/2)/2
        let mut k_err = 0.0f64;
        let mut sectors = BTreeMap::new();
        for level in 0..=rep.safe_max_excitation().min(4) {
            let idx = rep.level_indices(level);
            let k_expected = (level as f64 / nf + 0.5) / 2.0;
            let k0 = restrict(&inv.k0, &idx, &idx);
            for i in 0..idx.len() {
                k_err = k_err.max((k0[(i, i)].re - k_expected).abs());
            }
            let lsq_expected = {
                let l = level as f64 / nf;
                l * (l + 1.0 - 2.0 / nf)
            };
            let kernel_exists = if level < 2 {
                true
            } else {
                let lower = rep.level_indices(level - 2);
                let km = restrict(&inv.k_minus, &lower, &idx);
                km.nrows() < km.ncols() || km.singular_values().iter().any(|s| *s < 1e-10)
            };
            if kernel_exists {
                sectors.insert(level, (k_expected, lsq_expected));
            }
        }
        let ok = residual <= tol && spectrum_err <= C10_SPECTRUM_TOL && k_err <= C10_SPECTRUM_TOL;
        pass &= ok;
        let ks: Vec<String> = sectors.values().map(|(k, _)| format!("{k:.4}")).collect();
        parts.push(format!(
            "(N={n},d={d}) residual {residual:.1e} (tol {tol:.0e}), {eigen_count} L^2 eigenvalues within {spectrum_err:.1e}, k sectors {{{}}}",
            ks.join(", ")
        ));
    }
    outcome(
        pass,
        format!("{}; l runs over l_std/N (tol {C10_SPECTRUM_TOL:.0e})", parts.join("; ")),
    )
}

fn criterion_11() -> Outcome {
    let f = |tau: Complex64, k: f64| -2.0 * k * (1.0 - tau.norm_sqr()).ln();
    let mut worst_fd = 0.0f64;
    let mut worst_lib_fd = 0.0f64;
    let mut worst_pull = 0.0f64;
    let i = Complex64::new(0.0, 1.0);
    for k in [0.5, 1.0, 3.0] {
        for r in [0.0, 0.2, 0.45, 0.6, 0.8] {
            for a in 0..6 {
                let tau = Complex64::from_polar(r, a as f64 * PI / 3.0 + 0.2);
                let want = 2.0 * k / (1.0 - tau.norm_sqr()).powi(2);
                let h = C11_FD_STEP;
                // ∂τ∂τ* = Laplacian / 4
                let lap = (f(tau + h, k) + f(tau - h, k) + f(tau + i * h, k) + f(tau - i * h, k) - 4.0 * f(tau, k))
                    / (h * h);
                worst_fd = worst_fd.max((lap / 4.0 - want).abs() / want);
                worst_lib_fd = worst_lib_fd.max((metric_from_potential(tau, k, h) - want).abs() / want);

                let z = (i + tau) / (i - tau);
                let dz = 2.0 * i / ((i - tau) * (i - tau));
                let g_half = k / (2.0 * z.re * z.re);
                let pulled = g_half * dz.norm_sqr();
                let hp = ChartPoint::new(Chart::HalfPlane, [z.re, -z.im]).unwrap();
                let lib_half = metric_coefficient(&hp, k).unwrap() * dz.norm_sqr();
                let lib_tau = metric_coefficient(&ChartPoint::tau(tau).unwrap(), k).unwrap();
                worst_pull = worst_pull
                    .max((pulled - want).abs() / want)
                    .max((lib_half - want).abs() / want)
                    .max((lib_tau - want).abs() / want);
            }
        }
    }
    outcome(
        worst_fd <= C11_FD_REL_TOL && worst_lib_fd <= C11_FD_REL_TOL && worst_pull <= C11_PULLBACK_REL_TOL,
        format!(
            "d2F/dtau dtau* by finite differences (h={C11_FD_STEP:.0e}): {worst_fd:.2e}, library {worst_lib_fd:.2e} (tol {C11_FD_REL_TOL:.0e}); half-plane pullback {worst_pull:.2e} (tol {C11_PULLBACK_REL_TOL:.0e})"
        ),
    )
}

const SUITE_CONFIG: &str = "\
[transform]
coords = 0.3,-0.2
k = 1.5

[symbols]
tau = 0.2,0.6
k = 0.8
N = 3

[overlap]
tau = 0.1,0.2
tau2 = -0.5,0.3
N = 7

[resolution-check]
J = 3

[limit-check]
study = all

[evolve]
mode = both
h = C + 0.5*A^2
tau0 = 0.3,0
N = 16
tmax = 1
steps = 10

[freeparticle]
start = 0.4,0.9
k = 1.2

[casimir-check]
N = 2
d = 12
";

fn run_suite(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let cfg = dir.join("suite.ini");
    fs::write(&cfg, SUITE_CONFIG).unwrap();
    let mut captured = Vec::new();
    for sub in [
        "transform",
        "symbols",
        "overlap",
        "resolution-check",
        "limit-check",
        "evolve",
        "freeparticle",
        "casimir-check",
    ] {
        let out_dir = dir.join("out");
        let out = Command::new(env!("CARGO_BIN_EXE_cohlim"))
            .arg("--config")
            .arg(&cfg)
            .arg("--out")
            .arg(&out_dir)
            .arg(sub)
            .output()
            .expect("cli runs");
        captured.push((format!("{sub}: status"), format!("{:?}", out.status.code()).into_bytes()));
        captured.push((format!("{sub}: stdout"), out.stdout));
        captured.push((format!("{sub}: stderr"), out.stderr));
    }
    let mut files: Vec<_> = fs::read_dir(dir.join("out"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    for f in files {
        captured.push((
            f.file_name().unwrap().to_string_lossy().into_owned(),
            fs::read(&f).unwrap(),
        ));
    }
    captured
}

fn criterion_12() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_suite(a.path());
    let second = run_suite(b.path());
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| x != y)
        .map(|(x, _)| x.0.as_str())
        .collect();
    let same_len = first.len() == second.len();
    let bytes: usize = first.iter().map(|(_, b)| b.len()).sum();
    let all_ok = first
        .iter()
        .filter(|(name, _)| name.ends_with(": status"))
        .all(|(_, s)| s == b"Some(0)");
    outcome(
        same_len && differing.is_empty() && all_ok,
        format!(
            "8 subcommands run twice from one config: {} artifacts, {bytes} bytes, differing [{}], all exit 0: {all_ok}",
            first.len(),
            differing.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("closed-form overlap vs brute force", criterion_1),
        ("overlap-decay identity", criterion_2),
        ("resolution of identity", criterion_3),
        ("symbol closed forms", criterion_4),
        ("factorization defect", criterion_5),
        ("bracket correspondence", criterion_6),
        ("classical Hamiltonian extraction", criterion_7),
        ("free-particle dynamics", criterion_8),
        ("anharmonic correspondence", criterion_9),
        ("brute-force Casimir identity", criterion_10),
        ("metric checks", criterion_11),
        ("determinism", criterion_12),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !result.pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.1}s]",
            if result.pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 12 criteria pass", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
