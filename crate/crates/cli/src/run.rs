//! Runners behind each subcommand. Grid points are evaluated in parallel and
//! merged in axis order, so output never depends on scheduling.

use std::io::Write;

use purify::dynamics::{asymptotic_state, evolve, uniform_grid, Route};
use purify::model::{make_initial_state, DensityMatrix, InitialStateSpec, SystemSpec};
use purify::multiqubit::multiqubit_spectrum;
use purify::numkernel::OdeTolerances;
use purify::observables::{
    crossing_time_formula, detect_crossing, heating_time, Curve, Observable, SignChange,
};
use purify::spectral::{find_degeneracies, mode_overlaps, ModeSpectrum, Sector};
use purify::Error as CoreError;
use rayon::prelude::*;

use crate::config::{linspace, AxisName, InitialStateConfig, ReferenceKind, SpectrumConfig, SweepConfig};
use crate::error::CliError;
use crate::output::{fmt_f64, fmt_opt, write_header, write_row};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Evolve,
    Sweep,
    Crossings,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Evolve => "evolve",
            Command::Sweep => "sweep",
            Command::Crossings => "crossings",
        }
    }
}

/// Validates `cfg` and writes the CSV for `command` to `out`.
pub fn execute(command: Command, cfg: &SweepConfig, out: &mut dyn Write) -> Result<(), CliError> {
    cfg.validate()?;
    match command {
        Command::Spectrum => {
            let range = cfg
                .spectrum
                .as_ref()
                .ok_or_else(|| CliError::Config("spectrum needs a [spectrum] table".into()))?;
            run_spectrum(cfg, range, out)
        }
        Command::Evolve => run_evolve(cfg, out),
        Command::Sweep => run_sweep(cfg, out),
        Command::Crossings => {
            let pairs = cfg
                .crossings
                .as_ref()
                .ok_or_else(|| CliError::Config("crossings needs a [crossings] table".into()))?
                .pairs
                .clone();
            run_crossing_scan(cfg, &pairs, out)
        }
    }
}

/// One point of the parameter grid: a value for each non-time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPoint(pub Vec<(AxisName, f64)>);

impl GridPoint {
    fn apply(&self, cfg: &SweepConfig) -> (SystemSpec, InitialStateConfig) {
        let mut spec = cfg.spec();
        let mut init = cfg.initial_state.clone();
        for &(name, v) in &self.0 {
            match name {
                AxisName::Omega => spec.omega = v,
                AxisName::Eta => spec.eta = v,
                AxisName::JCoupling => spec.j_coupling = v,
                AxisName::P => init = init.with_p(v).expect("checked by validate"),
                AxisName::Time => {}
            }
        }
        (spec, init)
    }

    fn fields(&self) -> impl Iterator<Item = String> + '_ {
        self.0.iter().map(|(_, v)| fmt_f64(*v))
    }
}

/// Cartesian product of the parameter axes; the last axis varies fastest.
pub fn parameter_grid(cfg: &SweepConfig) -> Result<Vec<GridPoint>, CliError> {
    let mut points = vec![GridPoint(Vec::new())];
    for axis in cfg.parameter_axes() {
        let values = axis.resolve()?;
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut coords = p.0.clone();
                    coords.push((axis.name, v));
                    GridPoint(coords)
                })
            })
            .collect();
    }
    Ok(points)
}

pub fn time_grid(cfg: &SweepConfig) -> Result<Vec<f64>, CliError> {
    match cfg.axis(AxisName::Time) {
        Some(axis) => Ok(axis.resolve()?),
        None => Ok(uniform_grid(cfg.time.t_max, cfg.time.points)?),
    }
}

fn axis_header(cfg: &SweepConfig) -> Vec<String> {
    cfg.parameter_axes().map(|a| a.name.as_str().to_string()).collect()
}

/// Observables along one trajectory.
#[derive(Debug, Clone)]
pub struct PointSeries {
    pub t: Vec<f64>,
    /// `values[k][j]`: observable `j` at time `t[k]`.
    pub values: Vec<Vec<f64>>,
    /// Row-major `|c_mn(t)| / Σ|c_mn(t)|` at each time.
    pub weights: Option<Vec<Vec<f64>>>,
}

fn reference_state(
    kind: ReferenceKind,
    spec: &SystemSpec,
    rho0: &DensityMatrix,
) -> Result<DensityMatrix, CliError> {
    Ok(match kind {
        ReferenceKind::Asymptotic => asymptotic_state(&ModeSpectrum::compute(spec)?, rho0)?,
        ReferenceKind::MaximallyMixed => make_initial_state(&InitialStateSpec::MaximallyMixed, spec.n_qubits)?,
    })
}

pub struct RunSettings {
    pub route: Route,
    pub tol: OdeTolerances,
    pub observables: Vec<Observable>,
    pub reference: ReferenceKind,
    pub mode_weights: bool,
}

impl RunSettings {
    pub fn from_config(cfg: &SweepConfig) -> Result<Self, CliError> {
        Ok(Self {
            route: cfg.route()?,
            tol: cfg.tolerances(),
            observables: cfg.parsed_observables()?,
            reference: cfg.reference,
            mode_weights: cfg.mode_weights,
        })
    }
}

pub fn compute_point(
    settings: &RunSettings,
    spec: &SystemSpec,
    init: &InitialStateConfig,
    grid: &[f64],
) -> Result<PointSeries, CliError> {
    let rho0 = make_initial_state(&init.to_spec(), spec.n_qubits)?;
    let reference = if settings.observables.iter().any(|o| o.needs_reference()) {
        Some(reference_state(settings.reference, spec, &rho0)?)
    } else {
        None
    };
    let traj = evolve(settings.route, spec, &rho0, grid, settings.tol)?.trajectory;
    let values = traj
        .states
        .iter()
        .map(|rho| {
            settings
                .observables
                .iter()
                .map(|o| o.evaluate(rho, reference.as_ref()))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let weights = if settings.mode_weights {
        let overlaps = mode_overlaps(&ModeSpectrum::compute(spec)?, &rho0)?;
        Some(
            traj.t_grid
                .iter()
                .map(|&t| overlaps.weights_at(t).by_total.concat())
                .collect(),
        )
    } else {
        None
    };
    Ok(PointSeries {
        t: traj.t_grid,
        values,
        weights,
    })
}

fn compute_grid(cfg: &SweepConfig) -> Result<Vec<(GridPoint, PointSeries)>, CliError> {
    let settings = RunSettings::from_config(cfg)?;
    let grid = time_grid(cfg)?;
    let points = parameter_grid(cfg)?;
    points
        .into_par_iter()
        .map(|point| {
            let (spec, init) = point.apply(cfg);
            let series = compute_point(&settings, &spec, &init, &grid)?;
            Ok((point, series))
        })
        .collect()
}

/// Wide table: axis values, `t`, one column per observable, then optional mode weights.
pub fn run_evolve(cfg: &SweepConfig, out: &mut dyn Write) -> Result<(), CliError> {
    cfg.validate()?;
    let results = compute_grid(cfg)?;
    write_header(out, Command::Evolve.as_str(), cfg)?;
    let mut header = axis_header(cfg);
    header.push("t".into());
    header.extend(cfg.observables.iter().cloned());
    if cfg.mode_weights {
        let d = cfg.spec().dim();
        header.extend((1..=d).flat_map(|m| (1..=d).map(move |n| format!("w_{m}_{n}"))));
    }
    write_row(out, &header)?;
    for (point, series) in &results {
        for (k, t) in series.t.iter().enumerate() {
            let mut row: Vec<String> = point.fields().collect();
            row.push(fmt_f64(*t));
            row.extend(series.values[k].iter().map(|v| fmt_f64(*v)));
            if let Some(w) = &series.weights {
                row.extend(w[k].iter().map(|v| fmt_f64(*v)));
            }
            write_row(out, &row)?;
        }
    }
    Ok(())
}

/// Long table: axis values, `t`, observable name, value.
pub fn run_sweep(cfg: &SweepConfig, out: &mut dyn Write) -> Result<(), CliError> {
    cfg.validate()?;
    let results = compute_grid(cfg)?;
    write_header(out, Command::Sweep.as_str(), cfg)?;
    let mut header = axis_header(cfg);
    header.extend(["t", "observable", "value"].map(String::from));
    write_row(out, &header)?;
    for (point, series) in &results {
        for (k, t) in series.t.iter().enumerate() {
            for (j, name) in cfg.observables.iter().enumerate() {
                let mut row: Vec<String> = point.fields().collect();
                row.push(fmt_f64(*t));
                row.push(name.clone());
                row.push(fmt_f64(series.values[k][j]));
                write_row(out, &row)?;
            }
        }
    }
    Ok(())
}

fn sector_labels(spec: &SystemSpec) -> Result<(Vec<num_complex::Complex64>, Vec<Sector>), CliError> {
    if spec.n_qubits >= 3 {
        let mq = multiqubit_spectrum(spec)?;
        return Ok((mq.ms.eig.eigenvalues, mq.ms.sector_labels));
    }
    let ms = ModeSpectrum::compute(spec)?;
    Ok((ms.eig.eigenvalues, ms.sector_labels))
}

/// Eigenvalues per drive value, then the degeneracy table for two qubits.
pub fn run_spectrum(cfg: &SweepConfig, range: &SpectrumConfig, out: &mut dyn Write) -> Result<(), CliError> {
    cfg.validate()?;
    let spec = cfg.spec();
    let d = spec.dim();
    let omegas = linspace(range.omega_min, range.omega_max, range.points);
    let rows: Vec<_> = omegas
        .par_iter()
        .map(|&w| sector_labels(&spec.with_omega(w)).map(|r| (w, r)))
        .collect::<Result<_, _>>()?;

    write_header(out, Command::Spectrum.as_str(), cfg)?;
    let mut header = vec!["omega".to_string()];
    for m in 1..=d {
        header.extend([format!("re_{m}"), format!("im_{m}"), format!("sector_{m}")]);
    }
    write_row(out, &header)?;
    for (w, (eigs, labels)) in &rows {
        let mut row = vec![fmt_f64(*w)];
        for (z, s) in eigs.iter().zip(labels) {
            row.extend([fmt_f64(z.re), fmt_f64(z.im), s.as_str().to_string()]);
        }
        write_row(out, &row)?;
    }

    if range.degeneracies && spec.n_qubits == 2 && range.points >= 2 && range.omega_max > range.omega_min {
        let reports = find_degeneracies(&spec, (range.omega_min, range.omega_max), range.points)?;
        writeln!(out)?;
        writeln!(out, "# degeneracies")?;
        write_row(
            out,
            &[
                "omega",
                "kind",
                "modes",
                "re",
                "im",
                "gap_before",
                "gap_after",
                "eigenvector_overlap",
            ],
        )?;
        for r in &reports {
            let modes = r.modes_involved.iter().map(|m| (m + 1).to_string()).collect::<Vec<_>>().join("+");
            write_row(
                out,
                &[
                    fmt_f64(r.omega_value),
                    r.kind.as_str().to_string(),
                    modes,
                    fmt_f64(r.eigenvalue.re),
                    fmt_f64(r.eigenvalue.im),
                    fmt_f64(r.gap_before),
                    fmt_f64(r.gap_after),
                    fmt_f64(r.eigenvector_overlap),
                ],
            )?;
        }
    }
    Ok(())
}

/// `Ok(None)` where a closed form does not apply to this configuration.
fn where_applicable(r: purify::Result<f64>) -> Result<Option<f64>, CliError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(
            CoreError::NotApplicable(_)
            | CoreError::ZeroOverlap(_)
            | CoreError::DomainError(_)
            | CoreError::SectorUnresolved(_)
            | CoreError::DefectiveMatrix { .. },
        ) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// One numeric crossing with the closed-form estimates beside it.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingRow {
    pub point: GridPoint,
    pub p1: f64,
    pub p2: f64,
    pub t_cross: f64,
    pub sign_change: SignChange,
    pub t_cross_formula: Option<f64>,
    pub t_heat: (Option<f64>, Option<f64>),
}

impl CrossingRow {
    pub fn relative_deviation(&self) -> Option<f64> {
        self.t_cross_formula.map(|f| (self.t_cross - f).abs() / f.abs())
    }
}

fn scan_pair(
    cfg: &SweepConfig,
    settings: &RunSettings,
    obs: Observable,
    point: &GridPoint,
    [p1, p2]: [f64; 2],
    grid: &[f64],
) -> Result<Vec<CrossingRow>, CliError> {
    let (spec, init) = point.apply(cfg);
    let run = |p: f64| -> Result<_, CliError> {
        let state = init.with_p(p).expect("checked by validate");
        let rho0 = make_initial_state(&state.to_spec(), spec.n_qubits)?;
        Ok((evolve(settings.route, &spec, &rho0, grid, settings.tol)?, rho0))
    };
    let (a, rho_a) = run(p1)?;
    let (b, _) = run(p2)?;
    let reference = if obs.needs_reference() {
        Some(reference_state(settings.reference, &spec, &rho_a)?)
    } else {
        None
    };
    let (la, lb) = (format!("p={p1}"), format!("p={p2}"));
    let events = detect_crossing(
        &Curve {
            label: &la,
            evolution: &a,
        },
        &Curve {
            label: &lb,
            evolution: &b,
        },
        obs,
        reference.as_ref(),
    )?;
    if events.is_empty() {
        return Ok(Vec::new());
    }
    let diagonal = matches!(init, InitialStateConfig::DiagonalProduct { .. });
    let (formula, heat) = if spec.n_qubits == 2 && diagonal {
        let ms = ModeSpectrum::compute(&spec)?;
        (
            where_applicable(crossing_time_formula(&ms, p1, p2))?,
            (where_applicable(heating_time(&ms, p1))?, where_applicable(heating_time(&ms, p2))?),
        )
    } else {
        (None, (None, None))
    };
    Ok(events
        .into_iter()
        .map(|e| CrossingRow {
            point: point.clone(),
            p1,
            p2,
            t_cross: e.t_cross,
            sign_change: e.sign_change,
            t_cross_formula: formula,
            t_heat: heat,
        })
        .collect())
}

/// Every crossing of the observable between the two members of each pair.
pub fn crossing_rows(cfg: &SweepConfig, pairs: &[[f64; 2]]) -> Result<Vec<CrossingRow>, CliError> {
    cfg.validate()?;
    if cfg.axis(AxisName::P).is_some() {
        return Err(CliError::Config("crossing scans take p from the pairs, not from an axis".into()));
    }
    let settings = RunSettings::from_config(cfg)?;
    let obs: Observable = cfg
        .crossings
        .as_ref()
        .map_or("linear_entropy", |c| c.observable.as_str())
        .parse()
        .map_err(|e: CoreError| CliError::Config(e.to_string()))?;
    let grid = time_grid(cfg)?;
    let tasks: Vec<(GridPoint, [f64; 2])> = parameter_grid(cfg)?
        .into_iter()
        .flat_map(|pt| pairs.iter().map(move |pair| (pt.clone(), *pair)))
        .collect();
    let nested: Vec<Vec<CrossingRow>> = tasks
        .par_iter()
        .map(|(pt, pair)| scan_pair(cfg, &settings, obs, pt, *pair, &grid))
        .collect::<Result<_, _>>()?;
    Ok(nested.into_iter().flatten().collect())
}

pub fn run_crossing_scan(cfg: &SweepConfig, pairs: &[[f64; 2]], out: &mut dyn Write) -> Result<(), CliError> {
    let rows = crossing_rows(cfg, pairs)?;
    write_header(out, Command::Crossings.as_str(), cfg)?;
    let mut header = axis_header(cfg);
    header.extend(
        [
            "p1",
            "p2",
            "t_cross",
            "direction",
            "t_cross_formula",
            "t_heat_p1",
            "t_heat_p2",
            "relative_deviation",
        ]
        .map(String::from),
    );
    write_row(out, &header)?;
    for r in &rows {
        let mut row: Vec<String> = r.point.fields().collect();
        row.extend([
            fmt_f64(r.p1),
            fmt_f64(r.p2),
            fmt_f64(r.t_cross),
            match r.sign_change {
                SignChange::Rising => "rising".to_string(),
                SignChange::Falling => "falling".to_string(),
            },
            fmt_opt(r.t_cross_formula),
            fmt_opt(r.t_heat.0),
            fmt_opt(r.t_heat.1),
            fmt_opt(r.relative_deviation()),
        ]);
        write_row(out, &row)?;
    }
    Ok(())
}
