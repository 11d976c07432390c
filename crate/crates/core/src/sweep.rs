//! Configuration, parameter sweeps and CSV output.
//!
//! Everything is evaluated in recoil units (ω_R = 1); a config with a
//! different ω_R is rescaled on load and the CSV reports frequencies in units
//! of ω_R.

use std::io::Write;
use std::path::PathBuf;

use serde::Deserialize;

use crate::diffusion::{default_coarse_grain, diffusion_rates};
use crate::error::{Error, Result};
use crate::fluctuations::{eigenfrequencies, ground_state_populations, quadratic_coefficients};
use crate::meanfield::{critical_coupling, solve_displacements};
use crate::oracle::{extrapolate, solve_ground_state, EDResult, NmaxRule};
use crate::params::{reduce_parameters, PhysicalInputs, ReducedParams};

/// How a batch of independent jobs is scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Rayon work stealing. Falls back to sequential when the `parallel`
    /// feature is off.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `items`, returning results in input order for either
/// execution mode.
pub fn map_ordered<T, R, F>(items: &[T], exec: Execution, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridScale {
    Absolute,
    YOverYcrit,
}

/// `points` values `min + (max − min)·i/(points − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 2.0,
            points: 401,
            scale: GridScale::YOverYcrit,
        }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<()> {
        if self.points < 2 {
            return Err(Error::Config(format!("y_grid.points must be ≥ 2, got {}", self.points)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Error::Config(format!(
                "y_grid needs finite min < max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.min < 0.0 {
            return Err(Error::Config(format!("y_grid.min must be ≥ 0, got {}", self.min)));
        }
        Ok(())
    }

    fn values(&self) -> Vec<f64> {
        let span = self.max - self.min;
        let last = (self.points - 1) as f64;
        (0..self.points).map(|i| self.min + span * i as f64 / last).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSpec {
    pub atom_numbers: Vec<usize>,
    pub n_max_rule: NmaxRule,
}

/// A validated sweep, in recoil units.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// ω_R = 1; `y` is ignored, the grid supplies it.
    pub params: ReducedParams,
    pub grid: GridSpec,
    /// Coarse-graining window in units of 1/ω_R. `None` selects
    /// [`default_coarse_grain`].
    pub coarse_grain_dt: Option<f64>,
    pub oracle: Option<OracleSpec>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawRule {
    Named(String),
    Fixed(usize),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    #[serde(rename = "N")]
    atom_numbers: Vec<usize>,
    n_max_rule: Option<RawRule>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "omega_R")]
    omega_r: Option<f64>,
    #[serde(rename = "delta_C")]
    delta_c: Option<f64>,
    u: Option<f64>,
    physical: Option<PhysicalInputs>,
    y_grid: Option<GridSpec>,
    kappa: Option<f64>,
    coarse_grain_dt: Option<f64>,
    oracle: Option<RawOracle>,
    output: Option<PathBuf>,
}

/// Parses and validates a JSON config.
///
/// Either the reduced frequencies (`omega_R`, `delta_C`, `u`) or a `physical`
/// block may be given, not both. With a `physical` block its photon loss
/// supplies κ unless `kappa` is set, and its pump strength is not used: the
/// grid sets y.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;

    let base = match (&raw.physical, raw.delta_c) {
        (Some(_), _) if raw.delta_c.is_some() || raw.omega_r.is_some() || raw.u.is_some() => {
            return Err(Error::Config(
                "give either omega_R/delta_C/u or a physical block, not both".into(),
            ))
        }
        (Some(p), _) => {
            let r = reduce_parameters(p)?;
            ReducedParams {
                kappa: raw.kappa.unwrap_or(r.kappa),
                ..r
            }
        }
        (None, Some(delta_c)) => ReducedParams {
            omega_r: raw.omega_r.unwrap_or(1.0),
            delta_c,
            u: raw.u.unwrap_or(0.0),
            y: 0.0,
            kappa: raw.kappa.unwrap_or(1.0),
            atom_number: None,
        },
        (None, None) => return Err(Error::Config("delta_C is required".into())),
    };
    let base = base.with_y(0.0);
    base.validate()?;
    let omega_r = base.omega_r;
    let params = base.in_recoil_units();

    let mut grid = raw.y_grid.unwrap_or_default();
    grid.validate()?;
    if grid.scale == GridScale::Absolute {
        grid.min /= omega_r;
        grid.max /= omega_r;
    }

    let coarse_grain_dt = match raw.coarse_grain_dt {
        Some(dt) if !(dt > 0.0 && dt.is_finite()) => {
            return Err(Error::Config(format!("coarse_grain_dt must be positive, got {dt}")))
        }
        other => other.map(|dt| dt * omega_r),
    };

    let oracle = raw
        .oracle
        .map(|o| {
            let n_max_rule = match o.n_max_rule {
                None => NmaxRule::Default,
                Some(RawRule::Named(s)) if s == "default" => NmaxRule::Default,
                Some(RawRule::Named(s)) => {
                    return Err(Error::Config(format!("unknown n_max_rule {s:?}")))
                }
                Some(RawRule::Fixed(0)) => return Err(Error::Config("n_max_rule must be ≥ 1".into())),
                Some(RawRule::Fixed(n)) => NmaxRule::Fixed(n),
            };
            if o.atom_numbers.contains(&0) {
                return Err(Error::Config("oracle atom numbers must be ≥ 1".into()));
            }
            Ok(OracleSpec {
                atom_numbers: o.atom_numbers,
                n_max_rule,
            })
        })
        .transpose()?;

    Ok(SweepConfig {
        params,
        grid,
        coarse_grain_dt,
        oracle,
        output: raw.output,
    })
}

impl SweepConfig {
    /// δ_C = −100, u = −0.1, κ = 1, y/y_crit ∈ [0, 2] with 401 points.
    pub fn figure_preset() -> Self {
        Self {
            params: ReducedParams::figure_defaults(0.0),
            grid: GridSpec::default(),
            coarse_grain_dt: None,
            oracle: None,
            output: None,
        }
    }

    pub fn with_kappa(mut self, kappa: f64) -> Result<Self> {
        self.params = self.params.with_kappa(kappa);
        self.params.validate()?;
        Ok(self)
    }

    pub fn with_coarse_grain(mut self, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Usage(format!("δt must be positive, got {dt}")));
        }
        self.coarse_grain_dt = Some(dt);
        Ok(self)
    }

    pub fn y_crit(&self) -> Result<f64> {
        critical_coupling(&self.params)
    }

    /// Absolute y values of the grid.
    pub fn y_values(&self) -> Result<Vec<f64>> {
        let factor = match self.grid.scale {
            GridScale::Absolute => 1.0,
            GridScale::YOverYcrit => self.y_crit()?,
        };
        Ok(self.grid.values().into_iter().map(|v| v * factor).collect())
    }

    pub fn delta_t(&self) -> f64 {
        self.coarse_grain_dt.unwrap_or_else(|| default_coarse_grain(&self.params))
    }
}

pub const SWEEP_COLUMNS: [&str; 18] = [
    "y",
    "y_over_ycrit",
    "alpha0",
    "beta0",
    "alpha0_sq",
    "beta0_sq",
    "M0",
    "Mx",
    "My",
    "Mc",
    "omega_plus",
    "omega_minus",
    "n_photon_incoh",
    "n_atom_incoh",
    "rate_modes",
    "rate_populations",
    "rate_adiabatic",
    "flags",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowFlag {
    /// ω₋ below the critical cutoff: populations and the mode rate diverge.
    Critical,
    /// Complex normal-mode frequencies.
    Unstable,
    /// ω₊ and ω₋ coincide, so the mode basis is ill-conditioned.
    Degenerate,
}

impl RowFlag {
    pub fn name(&self) -> &'static str {
        match self {
            RowFlag::Critical => "critical",
            RowFlag::Unstable => "unstable",
            RowFlag::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub y: f64,
    pub y_over_ycrit: f64,
    pub alpha0: f64,
    pub beta0: f64,
    pub m0: f64,
    pub mx: f64,
    pub my: f64,
    pub mc: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub n_photon_incoh: f64,
    pub n_atom_incoh: f64,
    pub rate_modes: f64,
    pub rate_populations: f64,
    pub rate_adiabatic: f64,
    pub flags: Vec<RowFlag>,
}

impl SweepRow {
    fn fields(&self) -> [f64; 17] {
        [
            self.y,
            self.y_over_ycrit,
            self.alpha0,
            self.beta0,
            self.alpha0 * self.alpha0,
            self.beta0 * self.beta0,
            self.m0,
            self.mx,
            self.my,
            self.mc,
            self.omega_plus,
            self.omega_minus,
            self.n_photon_incoh,
            self.n_atom_incoh,
            self.rate_modes,
            self.rate_populations,
            self.rate_adiabatic,
        ]
    }
}

/// One grid point. Critical, unstable and degenerate points produce a flagged
/// row with NaN in the affected columns; other failures are errors.
pub fn evaluate_point(r: &ReducedParams, delta_t: f64) -> Result<SweepRow> {
    let y_crit = critical_coupling(r)?;
    let s = solve_displacements(r)?;
    let q = quadratic_coefficients(r, &s)?;
    let spec = eigenfrequencies(&q);
    let mut row = SweepRow {
        y: r.y,
        y_over_ycrit: r.y / y_crit,
        alpha0: s.alpha0,
        beta0: s.beta0,
        m0: q.m0,
        mx: q.mx,
        my: q.my,
        mc: q.mc,
        omega_plus: spec.omega_plus,
        omega_minus: spec.omega_minus,
        n_photon_incoh: f64::NAN,
        n_atom_incoh: f64::NAN,
        rate_modes: f64::NAN,
        rate_populations: f64::NAN,
        rate_adiabatic: crate::diffusion::rate_adiabatic(&q, r),
        flags: Vec::new(),
    };
    if !spec.stable {
        row.flags.push(RowFlag::Unstable);
        return Ok(row);
    }
    if spec.is_critical() {
        row.flags.push(RowFlag::Critical);
    }
    match ground_state_populations(&q) {
        Ok(p) => {
            row.n_photon_incoh = p.n_photon;
            row.n_atom_incoh = p.n_atom;
        }
        Err(Error::Divergent { .. }) => {}
        Err(Error::Degenerate(_)) => row.flags.push(RowFlag::Degenerate),
        Err(e) => return Err(e),
    }
    match diffusion_rates(r, &q, delta_t) {
        Ok(d) => {
            row.rate_modes = d.rate_modes;
            row.rate_populations = d.rate_populations;
        }
        Err(Error::Degenerate(_)) => {
            if !row.flags.contains(&RowFlag::Degenerate) {
                row.flags.push(RowFlag::Degenerate);
            }
        }
        Err(e) => return Err(e),
    }
    Ok(row)
}

pub fn run_sweep(cfg: &SweepConfig, exec: Execution) -> Result<Vec<SweepRow>> {
    let dt = cfg.delta_t();
    let ys = cfg.y_values()?;
    map_ordered(&ys, exec, |&y| evaluate_point(&cfg.params.with_y(y), dt))
        .into_iter()
        .collect()
}

/// 17 significant digits in scientific notation; NaN as `nan`.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn csv_error(e: csv::Error) -> Error {
    Error::Resource(format!("writing CSV: {e}"))
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(SWEEP_COLUMNS).map_err(csv_error)?;
    for row in rows {
        let mut record: Vec<String> = row.fields().iter().map(|&v| format_value(v)).collect();
        record.push(row.flags.iter().map(RowFlag::name).collect::<Vec<_>>().join(";"));
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Resource(format!("writing CSV: {e}")))
}

/// Mean-field and ED observables at one (N, y).
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    /// `None` for the 1/N → 0 extrapolation row.
    pub atom_number: Option<usize>,
    pub mean_field: SweepRow,
    /// Absent on the extrapolation row.
    pub ed: Option<EDResult>,
    pub ed_beta2: f64,
    pub ed_n_photon_per_n: f64,
    pub ed_energy_per_n: f64,
}

impl OracleRow {
    /// ED excitation compared against ω₋: the gap below threshold, the gap
    /// above the tunnelling doublet above it.
    pub fn ed_excitation(&self) -> f64 {
        match &self.ed {
            None => f64::NAN,
            Some(ed) if self.mean_field.beta0 > 0.0 => ed.second_gap,
            Some(ed) => ed.gap,
        }
    }
}

pub const ORACLE_COLUMNS: [&str; 23] = [
    "N",
    "y",
    "y_over_ycrit",
    "beta0_sq",
    "alpha0_sq",
    "omega_minus",
    "n_photon_incoh",
    "n_atom_incoh",
    "ed_n_max",
    "ed_dimension",
    "ed_converged",
    "ed_energy_per_N",
    "ed_gap",
    "ed_second_gap",
    "ed_excitation",
    "ed_beta2",
    "ed_n_photon_per_N",
    "ed_n_photon_incoh",
    "ed_parity_expectation",
    "diff_beta2",
    "diff_n_photon_per_N",
    "diff_excitation",
    "flags",
];

/// ED at every (N, y) of the grid plus a 1/N → 0 extrapolation per y.
pub fn run_oracle_compare(cfg: &SweepConfig, exec: Execution) -> Result<Vec<OracleRow>> {
    let spec = cfg
        .oracle
        .as_ref()
        .ok_or_else(|| Error::Usage("config has no oracle block".into()))?;
    if spec.atom_numbers.is_empty() {
        return Err(Error::Usage("oracle.N is empty".into()));
    }
    let dt = cfg.delta_t();
    let ys = cfg.y_values()?;
    let jobs: Vec<(f64, usize)> = ys
        .iter()
        .flat_map(|&y| spec.atom_numbers.iter().map(move |&n| (y, n)))
        .collect();
    let solved = map_ordered(&jobs, exec, |&(y, n)| {
        let r = cfg.params.with_y(y);
        Ok::<_, Error>((evaluate_point(&r, dt)?, solve_ground_state(&r, n, spec.n_max_rule)?))
    });

    let mut rows = Vec::with_capacity(jobs.len() + ys.len());
    let mut solved = solved.into_iter();
    for _ in &ys {
        let mut group = Vec::with_capacity(spec.atom_numbers.len());
        let mut mean_field = None;
        for _ in &spec.atom_numbers {
            let (mf, ed) = solved.next().ok_or_else(|| Error::Internal("missing oracle job".into()))??;
            rows.push(OracleRow {
                atom_number: Some(ed.atom_number),
                mean_field: mf.clone(),
                ed: Some(ed),
                ed_beta2: ed.order_param_beta2,
                ed_n_photon_per_n: ed.n_photon_per_n,
                ed_energy_per_n: ed.ground_energy / ed.atom_number as f64,
            });
            group.push(ed);
            mean_field = Some(mf);
        }
        if let (Some(ex), Some(mf)) = (extrapolate(&group), mean_field) {
            rows.push(OracleRow {
                atom_number: None,
                mean_field: mf,
                ed: None,
                ed_beta2: ex.order_param_beta2,
                ed_n_photon_per_n: ex.n_photon_per_n,
                ed_energy_per_n: ex.energy_per_n,
            });
        }
    }
    Ok(rows)
}

pub fn write_oracle_csv<W: Write>(rows: &[OracleRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(ORACLE_COLUMNS).map_err(csv_error)?;
    for row in rows {
        let mf = &row.mean_field;
        let (a2, b2) = (mf.alpha0 * mf.alpha0, mf.beta0 * mf.beta0);
        let mut record = vec![row.atom_number.map_or("inf".to_string(), |n| n.to_string())];
        record.extend([mf.y, mf.y_over_ycrit, b2, a2, mf.omega_minus, mf.n_photon_incoh, mf.n_atom_incoh].map(format_value));
        let mut flags: Vec<&str> = mf.flags.iter().map(RowFlag::name).collect();
        match &row.ed {
            Some(ed) => {
                record.push(ed.n_max.to_string());
                record.push(ed.dimension.to_string());
                record.push(ed.converged.to_string());
                if !ed.converged {
                    flags.push("unconverged");
                }
            }
            None => {
                record.extend(["nan", "nan", "nan"].map(String::from));
                flags.push("extrapolated");
            }
        }
        let n = row.atom_number.map_or(f64::NAN, |n| n as f64);
        let ed = row.ed.as_ref();
        let excitation = row.ed_excitation();
        record.extend(
            [
                row.ed_energy_per_n,
                ed.map_or(f64::NAN, |e| e.gap),
                ed.map_or(f64::NAN, |e| e.second_gap),
                excitation,
                row.ed_beta2,
                row.ed_n_photon_per_n,
                row.ed_n_photon_per_n * n - n * a2,
                ed.map_or(f64::NAN, |e| e.parity_expectation),
                (row.ed_beta2 - b2).abs(),
                (row.ed_n_photon_per_n - a2).abs(),
                (excitation - mf.omega_minus).abs(),
            ]
            .map(format_value),
        );
        record.push(flags.join(";"));
        w.write_record(&record).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::Resource(format!("writing CSV: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv_text(rows: &[SweepRow]) -> String {
        let mut buf = Vec::new();
        write_sweep_csv(rows, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(r#"{"delta_C":-100,"u":-0.1}"#).unwrap();
        assert_eq!(cfg.params, ReducedParams::figure_defaults(0.0));
        assert_eq!(cfg.grid, GridSpec::default());
        assert_eq!(cfg.coarse_grain_dt, None);
        assert!(cfg.oracle.is_none());
        assert_eq!(cfg.delta_t(), 0.1);
    }

    #[test]
    fn rejected_configs() {
        for text in [
            r#"{"delta_C":1}"#,
            r#"{"delta_C":-100,"u":-0.1,"y_grid":{"min":0,"max":2,"points":1,"scale":"y_over_ycrit"}}"#,
            r#"{"delta_C":-100,"u":-0.1,"y_grid":{"min":2,"max":2,"points":5,"scale":"absolute"}}"#,
            r#"{"delta_C":-100,"colour":3}"#,
            r#"{"u":-0.1}"#,
            r#"{"delta_C":-100,"coarse_grain_dt":0}"#,
            r#"{"delta_C":-100,"oracle":{"N":[10],"n_max_rule":"huge"}}"#,
            r#"{"delta_C":-100,"kappa":-1}"#,
            r#"{"delta_C":-100"#,
        ] {
            let err = parse_config(text).unwrap_err();
            assert!(err.is_input_error(), "{text}: {err}");
        }
    }

    #[test]
    fn recoil_units_on_load() {
        let cfg = parse_config(
            r#"{"omega_R":2,"delta_C":-200,"u":-0.2,"kappa":2,"coarse_grain_dt":0.05,
                "y_grid":{"min":0,"max":40,"points":3,"scale":"absolute"}}"#,
        )
        .unwrap();
        assert_eq!(cfg.params, ReducedParams::figure_defaults(0.0));
        assert_eq!(cfg.y_values().unwrap(), vec![0.0, 10.0, 20.0]);
        assert_eq!(cfg.delta_t(), 0.1);
    }

    #[test]
    fn physical_block() {
        let cfg = parse_config(
            r#"{"physical":{"atom_pump_detuning":-1e4,"cavity_pump_detuning":-100.2,
                "single_photon_rabi":2.0,"pump_rabi":1.0,"atom_number":1000,
                "recoil_frequency":1.0,"photon_loss":3.0}}"#,
        )
        .unwrap();
        assert_eq!(cfg.params.kappa, 3.0);
        assert_eq!(cfg.params.y, 0.0);
        assert!(parse_config(r#"{"delta_C":-100,"physical":{}}"#).is_err());
    }

    #[test]
    fn oracle_block() {
        let cfg = parse_config(r#"{"delta_C":-100,"oracle":{"N":[10,20],"n_max_rule":60}}"#).unwrap();
        let spec = cfg.oracle.unwrap();
        assert_eq!(spec.atom_numbers, vec![10, 20]);
        assert_eq!(spec.n_max_rule, NmaxRule::Fixed(60));
        let cfg = parse_config(r#"{"delta_C":-100,"oracle":{"N":[],"n_max_rule":"default"}}"#).unwrap();
        assert!(matches!(run_oracle_compare(&cfg, Execution::Sequential), Err(Error::Usage(_))));
    }

    #[test]
    fn two_point_grid() {
        let cfg = parse_config(
            r#"{"delta_C":-100,"u":-0.1,"y_grid":{"min":0,"max":2,"points":2,"scale":"y_over_ycrit"}}"#,
        )
        .unwrap();
        let text = csv_text(&run_sweep(&cfg, Execution::Sequential).unwrap());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], SWEEP_COLUMNS.join(","));
        assert!(lines[1].starts_with("0.0000000000000000e0,0.0000000000000000e0,"));
        assert!(lines[2].starts_with("2.0000000000000000e1,2.0000000000000000e0,"));
        assert!(text.ends_with('\n') && !text.contains('\r'));
    }

    #[test]
    fn critical_row_flagged() {
        let rows = run_sweep(&SweepConfig::figure_preset(), Execution::Sequential).unwrap();
        let crit = &rows[200];
        assert_eq!(crit.y_over_ycrit, 1.0);
        assert_eq!(crit.flags, vec![RowFlag::Critical]);
        assert!(crit.n_photon_incoh.is_nan() && crit.rate_modes.is_nan());
        assert!(crit.rate_populations.is_finite());
        assert!(rows.iter().enumerate().all(|(i, r)| i == 200 || r.flags.is_empty()));
        let line = csv_text(std::slice::from_ref(crit)).lines().nth(1).unwrap().to_string();
        assert!(line.ends_with(",critical"));
        assert_eq!(line.split(',').filter(|f| *f == "nan").count(), 3);
    }

    #[test]
    fn execution_modes_agree() {
        let cfg = SweepConfig::figure_preset();
        let a = run_sweep(&cfg, Execution::Sequential).unwrap();
        let b = run_sweep(&cfg, Execution::Parallel).unwrap();
        assert_eq!(csv_text(&a), csv_text(&b));
    }

    #[test]
    fn value_formatting() {
        assert_eq!(format_value(f64::NAN), "nan");
        assert_eq!(format_value(0.1), "1.0000000000000001e-1");
        assert_eq!(format_value(-250.0), "-2.5000000000000000e2");
        let v = 0.375_164_147_512_150_1_f64;
        assert_eq!(format_value(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn decoupled_oracle_row() {
        let cfg = parse_config(
            r#"{"delta_C":-100,"u":-0.1,"y_grid":{"min":0,"max":0.5,"points":2,"scale":"y_over_ycrit"},
                "oracle":{"N":[6,12]}}"#,
        )
        .unwrap();
        let rows = run_oracle_compare(&cfg, Execution::default()).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows[2].atom_number.is_none());
        let first = &rows[0];
        assert!((first.ed_excitation() - first.mean_field.omega_minus).abs() < 1e-8);
        let mut buf = Vec::new();
        write_oracle_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        for line in text.lines() {
            assert_eq!(line.split(',').count(), ORACLE_COLUMNS.len());
        }
    }
}
