//! Frozen configurations that regenerate the data behind each published panel.

use crate::config::{AxisConfig, AxisName, InitialStateConfig, SpectrumConfig, SweepConfig, TimeConfig};
use crate::run::Command;

const GAMMA_E: f64 = 6.0;
const FIG4_P: [f64; 4] = [0.5, 0.7, 0.9, 0.99];
const SINGLE_QUBIT_P: [f64; 7] = [0.0, 0.025, 0.1, 0.3, 0.5, 0.8, 1.0];
const MULTIQUBIT_P: [f64; 4] = [0.5, 0.2, 0.1, 0.01];
const ETA_LADDER: [f64; 4] = [0.01, 0.1, 0.5, 1.0];

#[derive(Debug, Clone)]
pub struct FigurePreset {
    pub id: &'static str,
    pub summary: &'static str,
    pub command: Command,
    pub config: SweepConfig,
}

fn system(n_qubits: usize, omega: f64, eta: f64) -> SweepConfig {
    let mut cfg = SweepConfig::default();
    cfg.system.n_qubits = n_qubits;
    cfg.system.omega = omega;
    cfg.system.eta = eta;
    cfg.system.gamma_e = GAMMA_E;
    cfg
}

fn curves(mut cfg: SweepConfig, ps: &[f64], observables: &[&str], route: &str, t_max: f64, points: usize) -> SweepConfig {
    cfg.axes = vec![AxisConfig::list(AxisName::P, ps)];
    cfg.observables = observables.iter().map(|s| s.to_string()).collect();
    cfg.route = route.into();
    cfg.time = TimeConfig { t_max, points };
    cfg
}

fn spectrum(mut cfg: SweepConfig) -> SweepConfig {
    cfg.spectrum = Some(SpectrumConfig {
        omega_min: 0.0,
        omega_max: 4.0,
        points: 401,
        degeneracies: true,
    });
    cfg
}

fn purity_map(mut cfg: SweepConfig, extra: Option<AxisConfig>, t_max: f64, omega_points: usize, t_points: usize) -> SweepConfig {
    cfg.initial_state = InitialStateConfig::MaximallyMixed;
    cfg.axes = extra.into_iter().collect();
    cfg.axes.push(AxisConfig::range(AxisName::Omega, 0.0, 4.0, omega_points));
    cfg.axes.push(AxisConfig::range(AxisName::Time, 0.0, t_max, t_points));
    cfg.observables = vec!["purity".into()];
    cfg.route = "ode".into();
    cfg
}

fn mode_weights(p: f64) -> SweepConfig {
    let mut cfg = system(2, 3.0, 0.1);
    cfg.initial_state = InitialStateConfig::DiagonalProduct { p };
    cfg.observables = vec!["linear_entropy".into()];
    cfg.mode_weights = true;
    cfg.time = TimeConfig {
        t_max: 10.0,
        points: 1001,
    };
    cfg
}

fn preset(id: &'static str, summary: &'static str, command: Command, config: SweepConfig) -> FigurePreset {
    FigurePreset {
        id,
        summary,
        command,
        config,
    }
}

pub fn presets() -> Vec<FigurePreset> {
    use Command::*;
    let ep = || system(1, GAMMA_E / 4.0, 0.0);
    let p_unit = crate::config::linspace(0.0, 1.0, 11);
    let mut out = vec![
        preset(
            "Fig2a",
            "single qubit at the EP: HS distance to the steady state",
            Evolve,
            curves(ep(), &p_unit, &["hs_distance_sq"], "ode", 10.0, 1001),
        ),
        preset(
            "Fig2b",
            "single qubit at the EP: linear entropy",
            Evolve,
            curves(ep(), &p_unit, &["linear_entropy"], "ode", 10.0, 1001),
        ),
        preset(
            "Fig2c",
            "single qubit at the EP: l1 coherence and inversion",
            Evolve,
            curves(ep(), &p_unit, &["l1_coherence", "bloch_z"], "ode", 10.0, 1001),
        ),
    ];
    for (ids, eta) in [(("Fig3a", "Fig3d"), 0.0), (("Fig3b", "Fig3e"), 0.5), (("Fig3c", "Fig3f"), 0.9)] {
        out.push(preset(
            ids.0,
            "two qubits from the maximally mixed state: purity over drive and time",
            Sweep,
            purity_map(system(2, 0.0, eta), None, 5.0, 81, 101),
        ));
        out.push(preset(ids.1, "two-qubit spectrum against the drive", Spectrum, spectrum(system(2, 0.0, eta))));
    }
    out.extend([
        preset(
            "Fig4a",
            "two qubits: linear entropy for the four initial populations",
            Evolve,
            curves(system(2, 3.0, 0.1), &FIG4_P, &["linear_entropy"], "modes", 30.0, 3001),
        ),
        preset(
            "Fig4b",
            "two qubits: concurrence for the four initial populations",
            Evolve,
            curves(system(2, 3.0, 0.1), &FIG4_P, &["concurrence"], "modes", 30.0, 3001),
        ),
        preset("Fig4c", "mode weights from p = 0.5", Evolve, mode_weights(0.5)),
        preset("Fig4d", "mode weights from p = 0.9", Evolve, mode_weights(0.9)),
        preset("Fig4e", "mode weights from p = 0.99", Evolve, mode_weights(0.99)),
        preset(
            "SM-coherence-a",
            "undriven single qubit: entropy and coherence",
            Evolve,
            curves(system(1, 0.0, 0.0), &SINGLE_QUBIT_P, &["linear_entropy", "l1_coherence"], "ode", 10.0, 1001),
        ),
        preset(
            "SM-coherence-b",
            "single qubit at the EP: entropy and coherence",
            Evolve,
            curves(ep(), &SINGLE_QUBIT_P, &["linear_entropy", "l1_coherence"], "ode", 10.0, 1001),
        ),
        preset("SM-coherence-c", "late-time window of SM-coherence-b", Evolve, {
            let mut cfg = curves(ep(), &SINGLE_QUBIT_P, &["linear_entropy", "l1_coherence"], "ode", 10.0, 1001);
            cfg.axes.push(AxisConfig::range(AxisName::Time, 8.0, 10.0, 201));
            cfg
        }),
    ]);
    for (id, eta) in [
        ("SM-spectrum-a", 0.0),
        ("SM-spectrum-b", 0.01),
        ("SM-spectrum-c", 0.1),
        ("SM-spectrum-d", 0.5),
        ("SM-spectrum-e", 1.0),
    ] {
        out.push(preset(id, "two-qubit spectrum, collective ladder", Spectrum, spectrum(system(2, 0.0, eta))));
    }
    for (id, omega) in [
        ("SM-entropy-a", 1.5),
        ("SM-entropy-b", 2.1),
        ("SM-entropy-c", 2.5),
        ("SM-entropy-d", 3.0),
    ] {
        out.push(preset(
            id,
            "two-qubit linear entropy at weak collective decay",
            Evolve,
            curves(system(2, omega, 0.01), &FIG4_P, &["linear_entropy"], "ode", 300.0, 3001),
        ));
    }
    for (id, eta) in ["SM-entropy-e", "SM-entropy-f", "SM-entropy-g", "SM-entropy-h"].into_iter().zip(ETA_LADDER) {
        out.push(preset(
            id,
            "two-qubit linear entropy above the degeneracy",
            Evolve,
            curves(system(2, 3.0, eta), &FIG4_P, &["linear_entropy"], "ode", 300.0, 3001),
        ));
    }
    for (id, j) in [
        ("SM-exchange-a", 0.0),
        ("SM-exchange-b", 0.5),
        ("SM-exchange-c", 3.0),
        ("SM-exchange-d", 3.5),
    ] {
        let mut cfg = curves(system(2, 3.0, 0.1), &FIG4_P, &["linear_entropy"], "ode", 30.0, 3001);
        cfg.system.j_coupling = j;
        out.push(preset(id, "two-qubit linear entropy with exchange coupling", Evolve, cfg));
    }
    for (id, (j, delta, eta)) in [
        ("SM-spectrum-jd-a", (0.0, 0.0, 0.1)),
        ("SM-spectrum-jd-b", (0.5, 0.0, 0.0)),
        ("SM-spectrum-jd-c", (1.0, 0.0, 0.1)),
        ("SM-spectrum-jd-d", (4.0, 0.0, 0.1)),
        ("SM-spectrum-jd-e", (10.0, 0.0, 0.1)),
    ] {
        let mut cfg = spectrum(system(2, 0.0, eta));
        cfg.system.j_coupling = j;
        cfg.system.delta = delta;
        out.push(preset(id, "two-qubit spectrum with exchange and detuning", Spectrum, cfg));
    }
    for (id, omega) in [
        ("SM-concurrence-a", 1.5),
        ("SM-concurrence-b", 2.1),
        ("SM-concurrence-c", 3.0),
    ] {
        out.push(preset(
            id,
            "two-qubit concurrence below, near and above the degeneracy",
            Evolve,
            curves(system(2, omega, 0.1), &[0.5, 0.7, 0.9, 0.99, 1.0], &["concurrence"], "modes", 30.0, 3001),
        ));
    }
    out.push(preset(
        "SM-x-state",
        "two-qubit concurrence with its X-state parts",
        Evolve,
        curves(
            system(2, 3.0, 0.1),
            &[0.5, 0.99, 1.0],
            &["concurrence", "x_state_c1", "x_state_c2"],
            "modes",
            30.0,
            3001,
        ),
    ));
    for (id, n) in [
        ("SM-multiqubit-a", 3),
        ("SM-multiqubit-b", 4),
        ("SM-multiqubit-c", 5),
        ("SM-multiqubit-d", 6),
    ] {
        out.push(preset(
            id,
            "normalized linear entropy for larger registers",
            Evolve,
            curves(system(n, 1.0, 0.8), &MULTIQUBIT_P, &["normalized_linear_entropy"], "ode", 20.0, 401),
        ));
    }
    out.push(preset(
        "SM-four-qubit-purity",
        "four qubits from the maximally mixed state: purity over drive, time and eta",
        Sweep,
        purity_map(
            system(4, 0.0, 0.0),
            Some(AxisConfig::list(AxisName::Eta, &[0.0, 0.1, 0.5, 1.0])),
            5.0,
            41,
            51,
        ),
    ));
    for (id, eta) in [
        "SM-four-qubit-entropy-a",
        "SM-four-qubit-entropy-b",
        "SM-four-qubit-entropy-c",
        "SM-four-qubit-entropy-d",
    ]
    .into_iter()
    .zip(ETA_LADDER)
    {
        out.push(preset(
            id,
            "four-qubit normalized linear entropy at fixed drive",
            Evolve,
            curves(system(4, 3.0, eta), &FIG4_P, &["normalized_linear_entropy"], "ode", 20.0, 401),
        ));
    }
    out
}

/// Case-insensitive lookup.
pub fn find_preset(id: &str) -> Option<FigurePreset> {
    presets().into_iter().find(|p| p.id.eq_ignore_ascii_case(id))
}
