//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs under `cargo test` as a plain binary. Failing criteria are reported
//! but only turn into a non-zero exit when `PURIFY_ACCEPTANCE_STRICT=1`.

use std::process::{Command as Process, ExitCode};
use std::time::{Duration, Instant};

use purify::dynamics::{evolve, uniform_grid, Evolution, Route};
use purify::model::reference::{compare_with_table, two_qubit_rate_equations};
use purify::model::{apply_generator, build_h_eff, dicke_transform, make_initial_state, DensityMatrix, InitialStateSpec, SystemSpec};
use purify::multiqubit::{antisymmetric_reference, asymptotic_purity, multiqubit_spectrum, subradiant_degeneracy};
use purify::numkernel::{eig_general, ComplexMatrix, OdeTolerances, C64};
use purify::observables::{
    argmax_time, crossing_time_formula, detect_crossing, fidelity, first_time, heating_time, observable_series,
    settling_time, Curve, Observable,
};
use purify::spectral::{
    cardano_symmetric_eigs, closed_form_overlap, critical_drive, ep_drive, find_degeneracies, mode_overlaps,
    regauge_to_symmetric_component, symmetric_cubic, DegeneracyKind, ModeSpectrum, ANTISYMMETRIC_MODE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA_E: f64 = 6.0;
const SEED: u64 = 20_251_015;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

type Outcome = Result<Verdict, String>;

/// Criterion number, title, runtime budget in seconds, check.
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn diag(p: f64, n: usize) -> DensityMatrix {
    make_initial_state(&InitialStateSpec::DiagonalProduct { p }, n).unwrap()
}

fn run(route: Route, spec: &SystemSpec, p: f64, grid: &[f64]) -> Result<Evolution, String> {
    evolve(route, spec, &diag(p, spec.n_qubits), grid, OdeTolerances::default()).map_err(|e| e.to_string())
}

fn hs_distance(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.matrix() - b.matrix()).frobenius_norm()
}

fn ep_steady_state() -> DensityMatrix {
    let s = 1.0 / 2f64.sqrt();
    DensityMatrix::pure(&[C64::new(s, 0.0), C64::new(0.0, -s)]).unwrap()
}

fn ac1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut worst, mut used, mut skipped) = (0.0f64, 0, 0);
    while used < 200 {
        let spec = SystemSpec::driven(2, rng.gen_range(0.0..4.0), rng.gen_range(0.0..1.0), GAMMA_E).map_err(|e| e.to_string())?;
        if symmetric_cubic(&spec).2.norm() <= 1e-6 * GAMMA_E.powi(6) {
            skipped += 1;
            continue;
        }
        let roots = cardano_symmetric_eigs(&spec).map_err(|e| e.to_string())?;
        let block = dicke_transform(&build_h_eff(&spec).unwrap()).unwrap().block(0, 0, 3, 3);
        let numeric = eig_general(&block, 1e-12).map_err(|e| e.to_string())?;
        for z in &roots {
            let best = numeric.eigenvalues.iter().map(|w| (w - z).norm()).fold(f64::INFINITY, f64::min);
            worst = worst.max(best);
        }
        used += 1;
    }
    let tol = 1e-9 * GAMMA_E;
    Ok(verdict(
        worst <= tol,
        format!("max |Δλ| = {worst:.2e} over {used} samples ({skipped} near-degenerate skipped), tol {tol:.1e}"),
    ))
}

fn ac2() -> Outcome {
    let w = ep_drive(0.0, GAMMA_E).map_err(|e| e.to_string())?;
    let ms = ModeSpectrum::compute(&SystemSpec::driven(2, 1.5, 0.0, GAMMA_E).unwrap()).map_err(|e| e.to_string())?;
    let target = C64::new(0.0, -1.5);
    let spread = ms.eigenvalues().iter().map(|z| (z - target).norm()).fold(0.0, f64::max);
    let centroid = ms.eigenvalues().iter().sum::<C64>() / 4.0;
    Ok(verdict(
        w == 1.5 && spread <= 1e-6 && ms.is_defective(),
        format!(
            "ep_drive = {w}; max |λ + 1.5i| = {spread:.3e} (tol 1e-6), eigenvalue centroid {:+.6}{:+.6}i, defect flag {}",
            centroid.re,
            centroid.im,
            ms.is_defective()
        ),
    ))
}

fn ac3() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for eta in [0.1, 0.5, 0.9] {
        let template = SystemSpec::driven(2, 0.0, eta, GAMMA_E).unwrap();
        let reports = find_degeneracies(&template, (0.0, 4.0), 400).map_err(|e| e.to_string())?;
        let target = critical_drive(eta, GAMMA_E);
        let hit = reports
            .iter()
            .filter(|r| r.kind == DegeneracyKind::DiabolicCrossing)
            .min_by(|a, b| (a.omega_value - target).abs().total_cmp(&(b.omega_value - target).abs()));
        match hit {
            Some(r) => {
                let err = (r.omega_value - target).abs();
                pass &= err <= 1e-6 * GAMMA_E && r.eigenvector_overlap < 0.5;
                lines.push(format!("η={eta}: |ΔΩ| = {err:.1e}, overlap {:.2e}", r.eigenvector_overlap));
            }
            None => {
                pass = false;
                lines.push(format!("η={eta}: no diabolic crossing"));
            }
        }
    }
    Ok(verdict(pass, lines.join("; ")))
}

fn ac4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let grid = uniform_grid(100.0 / GAMMA_E, 201).unwrap();
    let (mut worst, mut used) = (0.0f64, 0);
    while used < 20 {
        let spec = SystemSpec::driven(2, rng.gen_range(0.0..4.0), rng.gen_range(0.0..1.0), GAMMA_E).unwrap();
        let p = rng.gen_range(0.0..=1.0);
        if ModeSpectrum::compute(&spec).map_err(|e| e.to_string())?.is_defective() {
            continue;
        }
        let a = run(Route::Modes, &spec, p, &grid)?;
        let b = run(Route::NoJumpOde, &spec, p, &grid)?;
        let d = a
            .trajectory
            .states
            .iter()
            .zip(&b.trajectory.states)
            .map(|(x, y)| hs_distance(x, y))
            .fold(0.0, f64::max);
        worst = worst.max(d);
        used += 1;
    }
    Ok(verdict(worst <= 1e-6, format!("max HS distance {worst:.2e} over {used} pairs, tol 1e-6")))
}

fn ac5() -> Outcome {
    let spec = SystemSpec::driven(1, 1.5, 0.0, GAMMA_E).unwrap();
    let target = ep_steady_state();
    let mut worst = 1.0f64;
    for p in [0.1, 0.5, 0.9] {
        let ev = run(Route::NoJumpOde, &spec, p, &[0.0, 50.0])?;
        let rho = ev.trajectory.last_state().ok_or("empty trajectory")?;
        worst = worst.min(fidelity(rho, &target).map_err(|e| e.to_string())?);
    }
    Ok(verdict(
        worst >= 1.0 - 1e-6,
        format!("min fidelity at t = 50 µs: 1 − {:.2e} (tol 1e-6)", 1.0 - worst),
    ))
}

fn ac6() -> Outcome {
    let spec = SystemSpec::driven(1, 1.5, 0.0, GAMMA_E).unwrap();
    let reference = ep_steady_state();
    let short = uniform_grid(10.0 / GAMMA_E, 1001).unwrap();
    let (far, near) = (run(Route::NoJumpOde, &spec, 0.9, &short)?, run(Route::NoJumpOde, &spec, 0.5, &short)?);
    let events = detect_crossing(
        &Curve {
            label: "p=0.9",
            evolution: &far,
        },
        &Curve {
            label: "p=0.5",
            evolution: &near,
        },
        Observable::HsDistanceSq,
        Some(&reference),
    )
    .map_err(|e| e.to_string())?;
    let long = uniform_grid(60.0, 60001).unwrap();
    let settle = |p: f64| -> Result<(f64, Option<f64>), String> {
        let ev = run(Route::NoJumpOde, &spec, p, &long)?;
        let d = observable_series(&ev.trajectory, Observable::HsDistanceSq, Some(&reference)).map_err(|e| e.to_string())?;
        Ok((d[0], settling_time(&long, &d, |v| v < 1e-3)))
    };
    let ((d9, t9), (d5, t5)) = (settle(0.9)?, settle(0.5)?);
    let ((_, t_far), (_, t_near)) = if d9 > d5 { ((d9, t9), (d5, t5)) } else { ((d5, t5), (d9, t9)) };
    let earlier = matches!((t_far, t_near), (Some(a), Some(b)) if a < b);
    Ok(verdict(
        events.len() == 1 && earlier,
        format!(
            "{} crossing(s) on (0, 10/γ_e] at {:?} µs; D²(0) = {d9:.2} vs {d5:.2}; D² < 1e-3 from {t9:?} (p=0.9) vs {t5:?} (p=0.5) µs",
            events.len(),
            events.iter().map(|e| e.t_cross).collect::<Vec<_>>()
        ),
    ))
}

fn ac7() -> Outcome {
    let spec = SystemSpec::driven(2, 3.0, 0.1, GAMMA_E).unwrap();
    let grid = uniform_grid(60.0, 6001).unwrap();
    let (mixed, pure) = (run(Route::Modes, &spec, 0.5, &grid)?, run(Route::Modes, &spec, 0.99, &grid)?);
    let events = detect_crossing(
        &Curve {
            label: "p=0.5",
            evolution: &mixed,
        },
        &Curve {
            label: "p=0.99",
            evolution: &pure,
        },
        Observable::LinearEntropy,
        None,
    )
    .map_err(|e| e.to_string())?;
    let times = |ev: &Evolution| -> Result<(Option<f64>, Option<f64>), String> {
        let s = observable_series(&ev.trajectory, Observable::LinearEntropy, None).map_err(|e| e.to_string())?;
        let c = observable_series(&ev.trajectory, Observable::Concurrence, None).map_err(|e| e.to_string())?;
        Ok((settling_time(&grid, &s, |v| v < 0.01), settling_time(&grid, &c, |v| v > 0.99)))
    };
    let ((s5, c5), (s99, c99)) = (times(&mixed)?, times(&pure)?);
    let before = |a: Option<f64>, b: Option<f64>| matches!((a, b), (Some(a), Some(b)) if a < b);
    Ok(verdict(
        !events.is_empty() && before(s5, s99) && before(c5, c99),
        format!(
            "{} S_L crossing(s); S_L < 0.01 from {s5:?} vs {s99:?} µs; concurrence > 0.99 from {c5:?} vs {c99:?} µs",
            events.len()
        ),
    ))
}

fn ac8() -> Outcome {
    let spec = SystemSpec::driven(2, 3.0, 0.1, GAMMA_E).unwrap();
    let ms = ModeSpectrum::compute(&spec).map_err(|e| e.to_string())?;
    let grid = uniform_grid(60.0, 6001).unwrap();
    let half = run(Route::Modes, &spec, 0.5, &grid)?;
    let t0 = 5.0 / GAMMA_E;
    let late: Vec<usize> = (0..grid.len()).filter(|&k| grid[k] >= t0).collect();
    let mut pass = true;
    let mut lines = Vec::new();
    for p in [0.6, 0.7, 0.8] {
        let ev = run(Route::Modes, &spec, p, &grid)?;
        let s = observable_series(&ev.trajectory, Observable::LinearEntropy, None).map_err(|e| e.to_string())?;
        let tl: Vec<f64> = late.iter().map(|&k| grid[k]).collect();
        let sl: Vec<f64> = late.iter().map(|&k| s[k]).collect();
        let t_peak = argmax_time(&tl, &sl).ok_or("empty series")?;
        let t_h = heating_time(&ms, p).map_err(|e| e.to_string())?;
        let t_x = crossing_time_formula(&ms, p, 0.5).map_err(|e| e.to_string())?;
        let crossings: Vec<f64> = detect_crossing(
            &Curve {
                label: "p",
                evolution: &ev,
            },
            &Curve {
                label: "p=0.5",
                evolution: &half,
            },
            Observable::LinearEntropy,
            None,
        )
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|e| e.t_cross)
        .filter(|t| *t >= t0)
        .collect();
        let rel_peak = (t_peak - t_h).abs() / t_h.abs();
        let rel_cross = crossings
            .iter()
            .map(|t| (t - t_x).abs() / t_x)
            .fold(f64::INFINITY, f64::min);
        pass &= rel_peak <= 0.05 && rel_cross <= 0.05;
        lines.push(format!(
            "p={p}: argmax {t_peak:.3} vs t_h {t_h:.3} ({:.0}%), {} crossing(s), nearest to t_× {t_x:.3} off by {:.0}%",
            100.0 * rel_peak,
            crossings.len(),
            100.0 * rel_cross
        ));
    }
    Ok(verdict(pass, lines.join("; ")))
}

fn ac9() -> Outcome {
    let grid = uniform_grid(500.0, 50001).unwrap();
    let first = |eta: f64| -> Result<Option<f64>, String> {
        let spec = SystemSpec::driven(2, 3.0, eta, GAMMA_E).unwrap();
        let ev = run(Route::Modes, &spec, 0.5, &grid)?;
        let c = observable_series(&ev.trajectory, Observable::Concurrence, None).map_err(|e| e.to_string())?;
        Ok(first_time(&grid, &c, |v| v > 0.99))
    };
    let (fast, slow) = (first(1.0)?, first(0.01)?);
    Ok(verdict(
        matches!(fast, Some(t) if t <= 3.5) && slow.is_none_or(|t| t >= 50.0),
        format!("concurrence > 0.99 first at {fast:?} µs (η=1, ≤ 3.5) and {slow:?} µs (η=0.01, ≥ 50)"),
    ))
}

fn ac10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 10);
    let (mut worst, mut worst44, mut used) = (0.0f64, 0.0f64, 0);
    while used < 50 {
        let (p, omega, eta) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..4.0), rng.gen_range(0.0..1.0));
        let spec = SystemSpec::driven(2, omega, eta, GAMMA_E).unwrap();
        let ms = ModeSpectrum::compute(&spec).map_err(|e| e.to_string())?;
        if ms.is_defective() {
            continue;
        }
        let ov = mode_overlaps(&ms, &diag(p, 2)).map_err(|e| e.to_string())?;
        let g = regauge_to_symmetric_component(&ms, &ov);
        let l = ms.eigenvalues();
        for m in (0..4).filter(|k| *k != ANTISYMMETRIC_MODE) {
            for n in (0..4).filter(|k| *k != ANTISYMMETRIC_MODE) {
                worst = worst.max((g[(m, n)] - closed_form_overlap(p, omega, GAMMA_E, l[m], l[n])).norm());
            }
        }
        let a = ANTISYMMETRIC_MODE;
        worst44 = worst44.max((ov.c[(a, a)] - C64::new(p * (1.0 - p), 0.0)).norm());
        used += 1;
    }
    let spec = SystemSpec::driven(2, 2.0, 0.3, GAMMA_E).unwrap();
    let ms = ModeSpectrum::compute(&spec).map_err(|e| e.to_string())?;
    let ov = mode_overlaps(&ms, &diag(0.5, 2)).map_err(|e| e.to_string())?;
    let quarter = ov.c.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25));
    Ok(verdict(
        worst <= 1e-10 && worst44 <= 1e-12 && quarter <= 1e-10,
        format!("max closed-form error {worst:.2e}, max |c_44 − p(1−p)| {worst44:.1e}, p=0.5 vs δ/4 {quarter:.1e}"),
    ))
}

fn ac11() -> Outcome {
    let spec = SystemSpec::driven(4, 1.0, 0.5, GAMMA_E).unwrap();
    let mq = multiqubit_spectrum(&spec).map_err(|e| e.to_string())?;
    let reference = antisymmetric_reference(&spec);
    let invariant = mq.invariant_eigenvalue();
    let template = SystemSpec::driven(4, 0.0, 0.5, GAMMA_E).unwrap();
    let deg = subradiant_degeneracy(&template, (0.1, 4.0), 40).map_err(|e| e.to_string())?;
    let omega = 3.0;
    let pi = asymptotic_purity(&template.with_omega(omega), &diag(0.5, 4)).map_err(|e| e.to_string())?;
    let above = matches!(deg, Some(w) if w < omega);
    Ok(verdict(
        mq.antisym_multiplicity >= 2 && above && (pi - 0.5).abs() <= 1e-3,
        format!(
            "{} eigenvalue(s) within 1e-8 of {:+.2}i (drive-invariant pair sits at {}); degeneracy at Ω = {}; asymptotic purity {pi:.6} at Ω = {omega}",
            mq.antisym_multiplicity,
            reference.im,
            invariant.map_or("none".into(), |z| format!("{:+.6}i", z.im)),
            deg.map_or("none".into(), |w| format!("{w:.4}")),
        ),
    ))
}

fn ac12() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 12);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let spec = SystemSpec::driven(2, rng.gen_range(0.0..4.0), rng.gen_range(0.0..1.0), GAMMA_E)
            .unwrap()
            .with_j(rng.gen_range(-2.0..2.0));
        let b = ComplexMatrix::from_fn(4, 4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let rho = &b * &b.adjoint();
        let rho = rho.scale_real(1.0 / rho.trace().re);
        let direct = two_qubit_rate_equations(&spec, &rho).map_err(|e| e.to_string())?;
        let built = apply_generator(&spec, &rho, true).map_err(|e| e.to_string())?;
        worst = worst.max(direct.max_abs_diff(&built));
    }
    let single = SystemSpec {
        n_qubits: 1,
        omega: 1.2,
        delta: 0.5,
        gamma_f: 0.4,
        ..SystemSpec::default()
    };
    let report = compare_with_table(&single, 1e-12).map_err(|e| e.to_string())?;
    let documented = report.is_exact() || report.matches_with_drive_reversed;
    let table = if report.is_exact() {
        "single-qubit table matches entrywise".to_string()
    } else {
        format!(
            "single-qubit table: {} entries differ, all explained by a drive-sign convention: {}",
            report.mismatches.len(),
            report.matches_with_drive_reversed
        )
    };
    Ok(verdict(
        worst <= 1e-12 && documented,
        format!("two-qubit max entry difference {worst:.1e} on 20 states; {table}"),
    ))
}

fn ac13() -> Outcome {
    let dir = std::env::temp_dir().join(format!("purify-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let once = |name: &str| -> Result<Vec<u8>, String> {
        let path = dir.join(name);
        let status = Process::new(env!("CARGO_BIN_EXE_purify"))
            .args(["reproduce", "Fig4a", "--out"])
            .arg(&path)
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("reproduce exited with {status}"));
        }
        std::fs::read(&path).map_err(|e| e.to_string())
    };
    let (a, b) = (once("a.csv")?, once("b.csv")?);
    let _ = std::fs::remove_dir_all(&dir);
    Ok(verdict(a == b && !a.is_empty(), format!("two runs, {} bytes each, identical: {}", a.len(), a == b)))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 13] = [
        (1, "spectral oracle equivalence", 5, ac1),
        (2, "EP reproduction", 1, ac2),
        (3, "subradiant degeneracy", 10, ac3),
        (4, "route equivalence", 30, ac4),
        (5, "single-qubit EP steady state", 1, ac5),
        (6, "single-qubit Mpemba ordering", 2, ac6),
        (7, "two-qubit informational Mpemba effect", 5, ac7),
        (8, "timescale formulas", 10, ac8),
        (9, "relaxation speed against eta", 10, ac9),
        (10, "overlap closed form", 5, ac10),
        (11, "four-qubit structure", 30, ac11),
        (12, "generator cross-checks", 5, ac12),
        (13, "determinism", 10, ac13),
    ];
    let mut failed = Vec::new();
    for (n, title, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(budget);
        let (pass, detail) = match outcome {
            Ok(v) => (v.pass && in_time, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let timing = format!("{:.2} s of {budget} s", elapsed.as_secs_f64());
        println!(
            "[{}] AC-{n} {title}: {detail} ({timing}{})",
            if pass { "PASS" } else { "FAIL" },
            if in_time { "" } else { ", over budget" }
        );
        if !pass {
            failed.push(n);
        }
    }
    println!("acceptance: {} of 13 criteria pass; failing: {failed:?}", 13 - failed.len());
    let strict = std::env::var("PURIFY_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && !failed.is_empty() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
