//! Parameter grids over the pipeline, and the figure presets.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Parameterization, SystemParams};
use crate::pipeline::{self, PointOutcome, Status};

/// A sweepable parameter. `G`, `kappa`, `Delta`, `g` and `E` set both
/// cavities at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    J,
    Theta,
    G,
    G1,
    G2,
    Gain,
    Loss,
    NTh,
    Kappa,
    Kappa1,
    Kappa2,
    GammaM,
    Delta,
    Delta1,
    Delta2,
    SinglePhoton,
    E,
    E1,
    E2,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::J => "J",
            Param::Theta => "theta",
            Param::G => "G",
            Param::G1 => "G1",
            Param::G2 => "G2",
            Param::Gain => "g_s",
            Param::Loss => "f_s",
            Param::NTh => "n_th",
            Param::Kappa => "kappa",
            Param::Kappa1 => "kappa1",
            Param::Kappa2 => "kappa2",
            Param::GammaM => "gamma_m",
            Param::Delta => "Delta",
            Param::Delta1 => "Delta1",
            Param::Delta2 => "Delta2",
            Param::SinglePhoton => "g",
            Param::E => "E",
            Param::E1 => "E1",
            Param::E2 => "E2",
        }
    }

    fn needs_direct_g(self) -> bool {
        matches!(self, Param::G | Param::G1 | Param::G2)
    }

    fn needs_drive(self) -> bool {
        matches!(self, Param::E | Param::E1 | Param::E2)
    }

    pub fn apply(self, p: &mut SystemParams, value: f64) -> Result<()> {
        match self {
            Param::J => p.hopping = value,
            Param::Theta => p.theta = value,
            Param::Gain => p.gain0 = value,
            Param::Loss => p.loss0 = value,
            Param::NTh => p.n_th = value,
            Param::Kappa => p.kappa = [value; 2],
            Param::Kappa1 => p.kappa[0] = value,
            Param::Kappa2 => p.kappa[1] = value,
            Param::GammaM => p.gamma_m = value,
            Param::Delta => p.delta = [value; 2],
            Param::Delta1 => p.delta[0] = value,
            Param::Delta2 => p.delta[1] = value,
            Param::SinglePhoton => p.g = [value; 2],
            Param::G | Param::G1 | Param::G2 => {
                let Parameterization::DirectG { coupling } = &mut p.mode else {
                    return Err(Error::InvalidSpec(format!("{} requires DirectG mode", self.name())));
                };
                match self {
                    Param::G => *coupling = [value; 2],
                    Param::G1 => coupling[0] = value,
                    _ => coupling[1] = value,
                }
            }
            Param::E | Param::E1 | Param::E2 => {
                let Parameterization::Drive { amplitude } = &mut p.mode else {
                    return Err(Error::InvalidSpec(format!("{} requires Drive mode", self.name())));
                };
                match self {
                    Param::E => *amplitude = [value; 2],
                    Param::E1 => amplitude[0] = value,
                    _ => amplitude[1] = value,
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "J" => Param::J,
            "theta" => Param::Theta,
            "G" => Param::G,
            "G1" => Param::G1,
            "G2" => Param::G2,
            "g_s" | "gs" | "g0" => Param::Gain,
            "f_s" | "fs" | "f0" => Param::Loss,
            "n_th" | "nth" => Param::NTh,
            "kappa" => Param::Kappa,
            "kappa1" => Param::Kappa1,
            "kappa2" => Param::Kappa2,
            "gamma_m" => Param::GammaM,
            "Delta" => Param::Delta,
            "Delta1" | "Delta_c1" => Param::Delta1,
            "Delta2" | "Delta_c2" => Param::Delta2,
            "g" => Param::SinglePhoton,
            "E" => Param::E,
            "E1" => Param::E1,
            "E2" => Param::E2,
            other => return Err(Error::InvalidSpec(format!("unknown sweep parameter '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub param: Param,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub scale: AxisScale,
}

impl Axis {
    pub fn linear(param: Param, min: f64, max: f64, count: usize) -> Self {
        Self {
            param,
            min,
            max,
            count,
            scale: AxisScale::Linear,
        }
    }

    pub fn log(param: Param, min: f64, max: f64, count: usize) -> Self {
        Self {
            param,
            min,
            max,
            count,
            scale: AxisScale::Log,
        }
    }

    /// Grid values; both endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    return self.max;
                }
                let t = i as f64 / last;
                match self.scale {
                    AxisScale::Linear => self.min + (self.max - self.min) * t,
                    AxisScale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * t).exp(),
                }
            })
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidSpec(format!("axis {} needs count >= 2", self.param)));
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidSpec(format!("axis {} bounds must be finite", self.param)));
        }
        if self.scale == AxisScale::Log && (self.min <= 0.0 || self.max <= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "logarithmic axis {} needs positive bounds",
                self.param
            )));
        }
        Ok(())
    }
}

/// Quantities a sweep can record per cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Output {
    RMin,
    EN,
    C1,
    C2,
    Ct,
    Stable,
    Abscissa,
    Physical,
}

impl Output {
    pub fn name(self) -> &'static str {
        match self {
            Output::RMin => "R_min",
            Output::EN => "E_N",
            Output::C1 => "C1",
            Output::C2 => "C2",
            Output::Ct => "C_t",
            Output::Stable => "stable",
            Output::Abscissa => "abscissa",
            Output::Physical => "physical",
        }
    }

    /// CSV column names contributed by this output.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Output::RMin => &["R_min", "R_min_raw"],
            Output::EN => &["EN_a1_a2", "EN_a1_b", "EN_a2_b", "EN_a1_a2b", "EN_a2_a1b", "EN_b_a1a2"],
            Output::C1 => &["C_a1", "C_a2", "C_b"],
            Output::C2 => &["C_a1a2", "C_a1b", "C_a2b"],
            Output::Ct => &["C_t"],
            Output::Stable => &["stable"],
            Output::Abscissa => &["abscissa"],
            Output::Physical => &["physical"],
        }
    }

    fn needs_measures(self) -> bool {
        !matches!(self, Output::Stable | Output::Abscissa)
    }

    fn extract(self, outcome: &PointOutcome) -> Vec<Option<f64>> {
        let flag = |b: bool| Some(if b { 1.0 } else { 0.0 });
        let measures = outcome.measures.as_ref();
        let coherence = measures.and_then(|m| m.coherence.as_ref().ok());
        match self {
            Output::Stable => vec![outcome.system.as_ref().map(|s| s.is_robustly_stable()).and_then(flag)],
            Output::Abscissa => vec![outcome.abscissa()],
            Output::Physical => vec![outcome.state.as_ref().and_then(|s| flag(s.physical))],
            Output::RMin => vec![
                measures.map(|m| m.residual.clamped()),
                measures.map(|m| m.residual.r_min),
            ],
            Output::EN => match measures {
                Some(m) => m.negativity.as_array().map(Some).to_vec(),
                None => vec![None; 6],
            },
            Output::C1 => match coherence {
                Some(c) => c.one.map(Some).to_vec(),
                None => vec![None; 3],
            },
            Output::C2 => match coherence {
                Some(c) => c.two.map(Some).to_vec(),
                None => vec![None; 3],
            },
            Output::Ct => vec![coherence.map(|c| c.total)],
        }
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "R_min" | "rmin" => Output::RMin,
            "E_N" | "EN" => Output::EN,
            "C1" => Output::C1,
            "C2" => Output::C2,
            "C_t" | "Ct" => Output::Ct,
            "stable" => Output::Stable,
            "abscissa" => Output::Abscissa,
            "physical" => Output::Physical,
            other => return Err(Error::InvalidSpec(format!("unknown output '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub name: String,
    pub base: SystemParams,
    /// One or two axes; the first varies slowest.
    pub axes: Vec<Axis>,
    pub outputs: Vec<Output>,
    /// Quantity drawn in the heatmap (defaults to the first output column).
    pub plot: Option<&'static str>,
    /// Free-form provenance notes.
    pub notes: Vec<String>,
}

impl SweepSpec {
    pub fn new(name: impl Into<String>, base: SystemParams, axes: Vec<Axis>, outputs: Vec<Output>) -> Self {
        Self {
            name: name.into(),
            base,
            axes,
            outputs,
            plot: None,
            notes: Vec::new(),
        }
    }

    pub fn with_plot(mut self, column: &'static str) -> Self {
        self.plot = Some(column);
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.len() > 2 {
            return Err(Error::InvalidSpec("a sweep needs one or two axes".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::InvalidSpec("no outputs requested".into()));
        }
        for axis in &self.axes {
            axis.validate()?;
            let direct = matches!(self.base.mode, Parameterization::DirectG { .. });
            if axis.param.needs_direct_g() && !direct {
                return Err(Error::InvalidSpec(format!("axis {} requires DirectG mode", axis.param)));
            }
            if axis.param.needs_drive() && direct {
                return Err(Error::InvalidSpec(format!("axis {} requires Drive mode", axis.param)));
            }
        }
        if self.axes.len() == 2 && self.axes[0].param == self.axes[1].param {
            return Err(Error::InvalidSpec("both axes sweep the same parameter".into()));
        }
        if let Some(plot) = self.plot {
            if !self.columns().contains(&plot) {
                return Err(Error::InvalidSpec(format!("plot column '{plot}' is not an output")));
            }
        }
        self.base.validate()
    }

    pub fn columns(&self) -> Vec<&'static str> {
        self.outputs.iter().flat_map(|o| o.columns().iter().copied()).collect()
    }

    pub fn plot_column(&self) -> &'static str {
        self.plot.unwrap_or_else(|| self.columns()[0])
    }

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    fn needs_measures(&self) -> bool {
        self.outputs.iter().any(|o| o.needs_measures())
    }

    /// Parameters and grid coordinates of cell `index` (row-major, first axis slowest).
    pub fn cell_params(&self, index: usize, grids: &[Vec<f64>]) -> Result<(SystemParams, Vec<f64>)> {
        let mut params = self.base;
        let mut coords = Vec::with_capacity(self.axes.len());
        let mut rem = index;
        let mut stride: usize = self.cell_count();
        for (axis, grid) in self.axes.iter().zip(grids) {
            stride /= axis.count;
            let k = rem / stride;
            rem %= stride;
            axis.param.apply(&mut params, grid[k])?;
            coords.push(grid[k]);
        }
        Ok((params, coords))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub coords: Vec<f64>,
    /// Aligned with [`SweepResult::columns`]; `None` where unavailable.
    pub values: Vec<Option<f64>>,
    pub status: Status,
}

impl Cell {
    pub fn value(&self, columns: &[&str], column: &str) -> Option<f64> {
        columns.iter().position(|c| *c == column).and_then(|k| self.values[k])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub columns: Vec<&'static str>,
    pub cells: Vec<Cell>,
    pub provenance: Vec<(String, String)>,
}

impl SweepResult {
    pub fn value(&self, index: usize, column: &str) -> Option<f64> {
        self.cells[index].value(&self.columns, column)
    }

    /// Column values in grid order.
    pub fn series(&self, column: &str) -> Vec<Option<f64>> {
        (0..self.cells.len()).map(|i| self.value(i, column)).collect()
    }

    /// Cell with the largest value of `column`, if any.
    pub fn argmax(&self, column: &str) -> Option<(usize, f64)> {
        self.series(column)
            .into_iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (i, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    pub fn count_status(&self, pred: impl Fn(&Status) -> bool) -> usize {
        self.cells.iter().filter(|c| pred(&c.status)).count()
    }
}

fn provenance(spec: &SweepSpec) -> Vec<(String, String)> {
    let mut out = vec![
        ("tool".to_string(), format!("optomech {}", env!("CARGO_PKG_VERSION"))),
        ("sweep".to_string(), spec.name.clone()),
    ];
    for (k, axis) in spec.axes.iter().enumerate() {
        out.push((
            format!("axis{}", k + 1),
            format!(
                "{} {} {} {} {}",
                axis.param,
                axis.min,
                axis.max,
                axis.count,
                match axis.scale {
                    AxisScale::Linear => "linear",
                    AxisScale::Log => "log",
                }
            ),
        ));
    }
    out.extend(spec.base.describe());
    for note in &spec.notes {
        out.push(("note".to_string(), note.clone()));
    }
    out
}

fn record(spec: &SweepSpec, outcome: &PointOutcome, coords: Vec<f64>) -> Cell {
    let mut values: Vec<Option<f64>> = spec.outputs.iter().flat_map(|o| o.extract(outcome)).collect();
    if outcome.status == Status::Unstable {
        // Unstable cells carry only stability diagnostics.
        for (v, col) in values.iter_mut().zip(spec.columns()) {
            if col != "stable" && col != "abscissa" {
                *v = None;
            }
        }
    }
    Cell {
        coords,
        values,
        status: outcome.status,
    }
}

/// Evaluates every grid cell on a pool of `jobs` workers (0 = all cores).
/// The result is in grid order and independent of scheduling.
pub fn run_sweep(spec: &SweepSpec, jobs: usize) -> Result<SweepResult> {
    spec.validate()?;
    let grids: Vec<Vec<f64>> = spec.axes.iter().map(Axis::values).collect();
    let with_measures = spec.needs_measures();
    // Parameter application errors surface here, before any work is spawned.
    let points: Vec<(SystemParams, Vec<f64>)> = (0..spec.cell_count())
        .map(|i| spec.cell_params(i, &grids))
        .collect::<Result<_>>()?;

    let eval = |(params, coords): &(SystemParams, Vec<f64>)| {
        let outcome = pipeline::evaluate(params, with_measures);
        record(spec, &outcome, coords.clone())
    };
    let cells: Vec<Cell> = if jobs == 1 {
        points.iter().map(eval).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidSpec(format!("cannot start worker pool: {e}")))?;
        pool.install(|| points.par_iter().map(eval).collect())
    };
    Ok(SweepResult {
        spec: spec.clone(),
        columns: spec.columns(),
        cells,
        provenance: provenance(spec),
    })
}

/// The figures reproduced as presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl Figure {
    pub const ALL: [Figure; 8] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
        Figure::Fig8,
        Figure::Fig9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig8 => "fig8",
            Figure::Fig9 => "fig9",
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown figure '{s}' (expected fig2..fig9)")))
    }
}

pub const MAP_POINTS: usize = 101;
pub const CUT_POINTS: usize = 201;

/// Shared preset parameters: kappa = 0.2, gamma_m = 1e-5, Delta = 1
/// (effective), g = 1e-4, theta = pi, n_th = 100, saturation off.
pub fn figure_base() -> SystemParams {
    SystemParams::default()
}

fn with(base: SystemParams, f: impl FnOnce(&mut SystemParams)) -> SystemParams {
    let mut p = base;
    f(&mut p);
    p
}

fn fmt_tag(v: f64) -> String {
    format!("{v}")
}

/// Sweeps reproducing one figure. The first entry is the main
/// map (or curve); the rest are its line cuts and companion panels.
pub fn figure_preset(fig: Figure) -> Vec<SweepSpec> {
    let base = figure_base();
    let sat_axis = |p| Axis::linear(p, 0.0, 0.5, MAP_POINTS);
    let nth_map = Axis::log(Param::NTh, 1e2, 1e5, MAP_POINTS);
    let nth_cut = Axis::log(Param::NTh, 1e2, 1e5, CUT_POINTS);
    let effective_note = "Delta_j is the effective detuning (radiation-pressure shift absorbed)";
    match fig {
        Figure::Fig2 => vec![SweepSpec::new(
            "fig2",
            with(base, |p| {
                p.gain0 = 0.0;
                p.loss0 = 0.0;
            }),
            vec![
                Axis::linear(Param::J, 0.0, 0.5, MAP_POINTS),
                Axis::linear(Param::G, 0.0, 0.5, MAP_POINTS),
            ],
            vec![Output::Stable, Output::Abscissa],
        )
        .with_plot("stable")
        .with_note("theta = pi (same working phase as the other presets)")
        .with_note(effective_note)],
        Figure::Fig3 => vec![
            SweepSpec::new(
                "fig3",
                base,
                vec![
                    Axis::linear(Param::J, 0.0, 0.5, MAP_POINTS),
                    Axis::linear(Param::Theta, 0.0, TAU, MAP_POINTS),
                ],
                vec![Output::RMin, Output::Ct, Output::Physical],
            )
            .with_note(effective_note),
            SweepSpec::new(
                "fig3_cut_J0.2",
                with(base, |p| p.hopping = 0.2),
                vec![Axis::linear(Param::Theta, 0.0, TAU, CUT_POINTS)],
                vec![Output::RMin, Output::Ct, Output::Physical],
            )
            .with_note(effective_note),
        ],
        Figure::Fig4 => vec![SweepSpec::new(
            "fig4",
            with(base, |p| p.theta = PI),
            vec![
                Axis::linear(Param::J, 0.0, 0.5, MAP_POINTS),
                Axis::linear(Param::G, 0.0, 0.5, MAP_POINTS),
            ],
            vec![Output::RMin, Output::Ct, Output::Physical],
        )
        .with_note(effective_note)],
        Figure::Fig5 => vec![SweepSpec::new(
            "fig5",
            with(base, |p| p.hopping = 0.2),
            vec![Axis::linear(Param::G, 0.0, 0.5, CUT_POINTS)],
            vec![Output::C1, Output::C2, Output::Ct, Output::Physical],
        )
        .with_plot("C_t")
        .with_note(effective_note)],
        Figure::Fig6 | Figure::Fig7 => {
            let (tag, output, plot, cuts): (&str, Output, &'static str, &[(f64, f64)]) = if fig == Figure::Fig6 {
                (
                    "fig6",
                    Output::RMin,
                    "R_min",
                    &[(0.0, 0.0), (0.2, 0.0), (0.2, 0.1), (0.2, 0.16), (0.0, 0.05)],
                )
            } else {
                ("fig7", Output::Ct, "C_t", &[(0.0, 0.0), (0.2, 0.0), (0.2, 0.1), (0.0, 0.1)])
            };
            let sat_base = with(base, |p| {
                p.set_coupling([0.2, 0.2]);
                p.theta = PI;
            });
            let g_note = "G_j ~ 0.2 interpreted as exactly 0.2";
            let mut specs: Vec<SweepSpec> = [(0.0, "a"), (0.2, "b")]
                .into_iter()
                .map(|(j, panel)| {
                    SweepSpec::new(
                        format!("{tag}{panel}_J{}", fmt_tag(j)),
                        with(sat_base, |p| p.hopping = j),
                        vec![sat_axis(Param::Gain), sat_axis(Param::Loss)],
                        vec![output, Output::Physical],
                    )
                    .with_plot(plot)
                    .with_note(g_note)
                    .with_note(effective_note)
                })
                .collect();
            for &(j, fs) in cuts {
                specs.push(
                    SweepSpec::new(
                        format!("{tag}_cut_J{}_fs{}", fmt_tag(j), fmt_tag(fs)),
                        with(sat_base, |p| {
                            p.hopping = j;
                            p.loss0 = fs;
                        }),
                        vec![Axis::linear(Param::Gain, 0.0, 0.5, CUT_POINTS)],
                        vec![output, Output::Physical],
                    )
                    .with_plot(plot)
                    .with_note(g_note)
                    .with_note(effective_note),
                );
            }
            specs
        }
        Figure::Fig8 => {
            let b = with(base, |p| {
                p.set_coupling([0.2, 0.2]);
                p.theta = PI;
                p.hopping = 0.2;
                p.loss0 = 0.16;
            });
            let mut specs = vec![SweepSpec::new(
                "fig8",
                b,
                vec![nth_map, Axis::linear(Param::Gain, 0.0, 0.3, MAP_POINTS)],
                vec![Output::RMin, Output::Physical],
            )
            .with_note("G = 0.2 (the optimum setting of the saturation maps)")
            .with_note(effective_note)];
            for (j, fs) in [(0.2, 0.0), (0.2, 0.1), (0.2, 0.2), (0.2, 0.3), (0.0, 0.0)] {
                specs.push(
                    SweepSpec::new(
                        format!("fig8_cut_J{}_fs{}", fmt_tag(j), fmt_tag(fs)),
                        with(b, |p| {
                            p.hopping = j;
                            p.gain0 = 0.0;
                            p.loss0 = fs;
                        }),
                        vec![nth_cut],
                        vec![Output::RMin, Output::Physical],
                    )
                    .with_note("G = 0.2 (the optimum setting of the saturation maps)")
                    .with_note(effective_note),
                );
            }
            specs
        }
        Figure::Fig9 => {
            let b = with(base, |p| {
                p.set_coupling([0.2, 0.2]);
                p.theta = PI;
                p.hopping = 0.2;
                p.gain0 = 0.01;
            });
            let mut specs = vec![SweepSpec::new(
                "fig9",
                b,
                vec![nth_map, Axis::linear(Param::Loss, 0.0, 0.3, MAP_POINTS)],
                vec![Output::Ct, Output::Physical],
            )
            .with_note("G = 0.2 (the optimum setting of the saturation maps)")
            .with_note(effective_note)];
            for fs in [0.01, 0.05, 0.1] {
                specs.push(
                    SweepSpec::new(
                        format!("fig9_cut_fs{}", fmt_tag(fs)),
                        with(b, |p| p.loss0 = fs),
                        vec![nth_cut],
                        vec![Output::Ct, Output::Physical],
                    )
                    .with_note("G = 0.2 (the optimum setting of the saturation maps)")
                    .with_note(effective_note),
                );
            }
            specs
        }
    }
}
