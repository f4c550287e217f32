//! Reduction of measurement data to model parameters.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinkAssembly, Stage};
use crate::loads::{stage_lambda, HotSide, STEFAN_BOLTZMANN};
use crate::materials::{nist_copper, ConductivityModel, Domain};
use crate::numerics::golden_section;
use crate::profile::StageProfile;
use crate::solver::{solve_with_self_radiation, SolverSettings};

/// Default sensor noise floor for temperature differences, K.
pub const NOISE_FLOOR: f64 = 1e-3;
/// Largest `dT / T` for which the midpoint reduction is trusted.
pub const MIDPOINT_VALIDITY: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub name: String,
    pub unit: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    /// Sum of squared errors.
    pub residual: f64,
    pub dof: usize,
    /// Per-point residuals, measured minus model.
    pub diagnostics: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .find(|p| p.name == name)
            .map(|p| p.value)
    }
}

fn param(name: &str, unit: &str, value: f64) -> FitParameter {
    FitParameter {
        name: name.into(),
        unit: unit.into(),
        value,
    }
}

fn fit_err(msg: impl Into<String>) -> Error {
    Error::Fit(msg.into())
}

fn sse(points: &[(f64, f64)], a: f64, b: f64) -> f64 {
    points
        .iter()
        .map(|&(x, y)| (y - a * x.powf(b)).powi(2))
        .sum()
}

/// Fits `y = a x^b` by log-log least squares followed by Gauss-Newton
/// refinement on the linear-space residuals.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(fit_err(format!(
            "a power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points
        .iter()
        .find(|&&(x, y)| !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite())
    {
        return Err(fit_err(format!(
            "power-law data must be positive, got ({x}, {y})"
        )));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) * n {
        return Err(fit_err("degenerate data: all x values are equal"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let mut b = sxy / sxx;
    let mut a = (my - b * mx).exp();

    let mut current = sse(points, a, b);
    for _ in 0..50 {
        // normal equations of the 2x2 Gauss-Newton step
        let (mut j11, mut j12, mut j22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, y) in points {
            let p = x.powf(b);
            let da = p;
            let db = a * p * x.ln();
            let r = y - a * p;
            j11 += da * da;
            j12 += da * db;
            j22 += db * db;
            g1 += da * r;
            g2 += db * r;
        }
        let det = j11 * j22 - j12 * j12;
        if !(det.abs() > 0.0) {
            break;
        }
        let mut step_a = (j22 * g1 - j12 * g2) / det;
        let mut step_b = (j11 * g2 - j12 * g1) / det;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = sse(points, a + step_a, b + step_b);
            if a + step_a > 0.0 && trial <= current {
                a += step_a;
                b += step_b;
                current = trial;
                accepted = true;
                break;
            }
            step_a *= 0.5;
            step_b *= 0.5;
        }
        if !accepted
            || (step_a.abs() <= 1e-15 * a.abs() && step_b.abs() <= 1e-15 * b.abs().max(1.0))
        {
            break;
        }
    }
    Ok(FitResult {
        parameters: vec![param("a", "", a), param("b", "", b)],
        residual: current,
        dof: points.len() - 2,
        diagnostics: points.iter().map(|&(x, y)| y - a * x.powf(b)).collect(),
        warnings: Vec::new(),
    })
}

/// One heater setting with the sensor readings along the shield.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaterRow {
    /// Applied heater power, W.
    pub q: f64,
    /// Sensor temperatures in the order of [`HeaterSweep::positions`], K.
    pub temperatures: Vec<f64>,
}

/// Heater sweep on a shield or dipstick strip of known cross-section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeaterSweep {
    /// Conducting cross-section, m^2.
    pub area: f64,
    /// Sensor positions, m.
    pub positions: Vec<f64>,
    /// Background load flowing through the sensor span, W.
    pub background: f64,
    pub rows: Vec<HeaterRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConductivityPoints {
    /// `(T, rho)` pairs in K and W/(K m).
    pub points: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

/// Reduces a heater sweep to conductivity samples at the midpoint
/// temperature of every adjacent sensor pair.
pub fn shield_conductivity_points(
    sweep: &HeaterSweep,
    noise_floor: f64,
) -> Result<ConductivityPoints> {
    if !(sweep.area > 0.0) {
        return Err(fit_err("cross-section area must be positive"));
    }
    if sweep.positions.len() < 2 {
        return Err(fit_err("at least two sensors are required"));
    }
    let mut points = Vec::new();
    let mut warnings = Vec::new();
    for (r, row) in sweep.rows.iter().enumerate() {
        if row.temperatures.len() != sweep.positions.len() {
            return Err(fit_err(format!(
                "row {r} has {} temperatures for {} sensors",
                row.temperatures.len(),
                sweep.positions.len()
            )));
        }
        for (i, (tp, xp)) in row
            .temperatures
            .windows(2)
            .zip(sweep.positions.windows(2))
            .enumerate()
        {
            let dt = (tp[1] - tp[0]).abs();
            let dx = (xp[1] - xp[0]).abs();
            if !(dt >= noise_floor) || dt == 0.0 {
                return Err(fit_err(format!(
                    "row {r}, sensors {i}-{}: temperature difference {dt} K is below the {noise_floor} K noise floor",
                    i + 1
                )));
            }
            let t_mean = 0.5 * (tp[0] + tp[1]);
            if dt / t_mean > MIDPOINT_VALIDITY {
                warnings.push(format!(
                    "row {r}, sensors {i}-{}: dT/T = {:.3} exceeds {MIDPOINT_VALIDITY}",
                    i + 1,
                    dt / t_mean
                ));
            }
            points.push((t_mean, dx * (row.q + sweep.background) / (sweep.area * dt)));
        }
    }
    Ok(ConductivityPoints { points, warnings })
}

/// Fits the copper RRR to conductivity samples.
pub fn fit_rrr(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(fit_err(format!(
            "an RRR fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let domain = Domain::default();
    if let Some(&(t, _)) = points.iter().find(|&&(t, _)| !domain.contains(t)) {
        return Err(Error::domain(format!(
            "{t} K is outside the copper model range [{}, {}] K",
            domain.t_min, domain.t_max
        )));
    }
    let cost = |rrr: f64| -> f64 {
        points
            .iter()
            .map(|&(t, rho)| (nist_copper::conductivity(rrr, t) - rho).powi(2))
            .sum()
    };
    let (lo, hi, n) = (1.0f64.ln(), 5000.0f64.ln(), 400);
    let grid: Vec<f64> = (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .collect();
    let best = grid
        .iter()
        .enumerate()
        .min_by(|a, b| cost(a.1.exp()).total_cmp(&cost(b.1.exp())))
        .map(|(k, _)| k)
        .expect("non-empty grid");
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(n)];
    let rrr = golden_section(|l| cost(l.exp()), a, b, 1e-10).exp();
    let mut warnings = Vec::new();
    if best == 0 || best == n {
        warnings.push(format!(
            "RRR {rrr:.1} lies at the edge of the scanned range"
        ));
    }
    Ok(FitResult {
        parameters: vec![param("rrr", "", rrr)],
        residual: cost(rrr),
        dof: points.len() - 1,
        diagnostics: points
            .iter()
            .map(|&(t, rho)| rho - nist_copper::conductivity(rrr, t))
            .collect(),
        warnings,
    })
}

fn loglog_interp(table: &[(f64, f64)], x: f64) -> f64 {
    let k = table.partition_point(|p| p.0 < x).clamp(1, table.len() - 1);
    let (a, b) = (table[k - 1], table[k]);
    if a.0 == x {
        return a.1;
    }
    let s = (x.ln() - a.0.ln()) / (b.0.ln() - a.0.ln());
    (a.1.ln() + s * (b.1.ln() - a.1.ln())).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BraidDecomposition {
    /// `(T, R_bulk)` interpolated onto the temperatures of the total data.
    pub bulk: Vec<(f64, f64)>,
    /// `(T, R_total - R_bulk)` on the same grid.
    pub contact: Vec<(f64, f64)>,
    /// Power-law fit `R_contact = a T^b` of the positive contact points.
    pub fit: FitResult,
}

/// Splits braid resistance into bulk and contact parts. `noise` is the
/// relative tolerance below which a contact resistance counts as zero and
/// `t_max` optionally limits the temperatures used.
pub fn braid_decomposition(
    total: &[(f64, f64)],
    bulk: &[(f64, f64)],
    noise: f64,
    t_max: Option<f64>,
) -> Result<BraidDecomposition> {
    let positive = |d: &[(f64, f64)]| d.iter().all(|&(t, r)| t > 0.0 && r > 0.0);
    if !positive(total) || !positive(bulk) {
        return Err(fit_err("resistance data must be positive"));
    }
    if bulk.len() < 2 || bulk.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(fit_err(
            "bulk data needs at least two points with increasing temperature",
        ));
    }
    let (b_lo, b_hi) = (bulk[0].0, bulk[bulk.len() - 1].0);
    let limit = t_max.unwrap_or(f64::INFINITY);
    let grid: Vec<(f64, f64)> = total
        .iter()
        .copied()
        .filter(|&(t, _)| t >= b_lo && t <= b_hi && t <= limit)
        .collect();
    if grid.is_empty() {
        return Err(fit_err("total and bulk data do not overlap in temperature"));
    }
    let bulk_grid: Vec<(f64, f64)> = grid
        .iter()
        .map(|&(t, _)| (t, loglog_interp(bulk, t)))
        .collect();
    let contact: Vec<(f64, f64)> = grid
        .iter()
        .zip(&bulk_grid)
        .map(|(&(t, rt), &(_, rb))| (t, rt - rb))
        .collect();
    if let Some((&(t, rc), &(_, rt))) = contact
        .iter()
        .zip(&grid)
        .find(|(&(_, rc), &(_, rt))| rc < -noise * rt)
    {
        return Err(fit_err(format!(
            "contact resistance {rc} K/W at {t} K is negative beyond the noise tolerance (total {rt} K/W)"
        )));
    }
    let usable: Vec<(f64, f64)> = contact
        .iter()
        .zip(&grid)
        .filter(|(&(_, rc), &(_, rt))| rc > noise * rt)
        .map(|(&c, _)| c)
        .collect();
    if usable.len() < 3 {
        return Err(fit_err(
            "degenerate decomposition: contact resistance indistinguishable from zero",
        ));
    }
    let fit = fit_power_law(&usable)?;
    Ok(BraidDecomposition {
        bulk: bulk_grid,
        contact,
        fit,
    })
}

/// Conductivity of a post material from a fit `P = a T^b` of a post of
/// length `length` and cross-section `area`.
pub fn post_conductivity_from_fit(
    a: f64,
    b: f64,
    length: f64,
    area: f64,
) -> Result<ConductivityModel> {
    if !(a > 0.0 && b > 0.0 && length > 0.0 && area > 0.0) {
        return Err(Error::domain(format!(
            "post fit needs positive a, b, length and area, got {a}, {b}, {length}, {area}"
        )));
    }
    ConductivityModel::power_law(0.0, a * b * length / area, b - 1.0, Domain::default())
}

/// Mean radiative flux on the 50K shield, W/m^2.
pub fn effective_flux(assembly: &LinkAssembly, profile: &StageProfile) -> Result<f64> {
    let lambda = stage_lambda(assembly, Stage::FiftyK)?;
    let t_vc4 = assembly.vacuum_can.temperature.powi(4);
    let segments = assembly.shield_segments();
    let mut total = 0.0;
    let mut length = 0.0;
    for (x0, x1) in segments {
        let n = ((x1 - x0) / 0.005).ceil().max(1.0) as usize;
        let h = (x1 - x0) / n as f64;
        total += (0..n)
            .map(|k| {
                let x = x0 + (k as f64 + 0.5) * h;
                STEFAN_BOLTZMANN * lambda * (t_vc4 - profile.temperature(x).powi(4)) * h
            })
            .sum::<f64>();
        length += x1 - x0;
    }
    if !(length > 0.0) {
        return Err(fit_err("assembly has no shield modules"));
    }
    Ok(total / length)
}

/// Solves the 50K stage of `assembly` with attenuation `lambda`.
pub fn solve_fifty_k(
    assembly: &LinkAssembly,
    lambda: f64,
    settings: &SolverSettings,
) -> Result<StageProfile> {
    let mut a = assembly.clone();
    a.stages[Stage::FiftyK].attenuation_override = Some(lambda);
    let hot = HotSide::Uniform(a.vacuum_can.temperature);
    Ok(solve_with_self_radiation(&a, Stage::FiftyK, hot, settings)?.0)
}

fn temperature_error(profile: &StageProfile, measured: &[(f64, f64)]) -> (f64, Vec<f64>) {
    let diag: Vec<f64> = measured
        .iter()
        .map(|&(x, t)| t - profile.temperature(x))
        .collect();
    (diag.iter().map(|d| d * d).sum(), diag)
}

/// Fits the 50K attenuation to measured `(x, T)` samples by solving the
/// stage for every candidate in `grid` and refining the best candidate with
/// a parabola through its neighbours.
pub fn fit_mli_lambda(
    measured: &[(f64, f64)],
    assembly: &LinkAssembly,
    grid: &[f64],
    settings: &SolverSettings,
) -> Result<FitResult> {
    if measured.is_empty() {
        return Err(fit_err("no measured temperatures"));
    }
    if grid.len() < 3 || grid.windows(2).any(|w| !(w[1] > w[0])) || !(grid[0] >= 0.0) {
        return Err(fit_err(
            "the attenuation grid needs at least 3 increasing non-negative values",
        ));
    }
    let costs: Vec<f64> = grid
        .par_iter()
        .map(|&l| Ok(temperature_error(&solve_fifty_k(assembly, l, settings)?, measured).0))
        .collect::<Result<Vec<f64>>>()?;
    let k = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .expect("non-empty grid");
    if k == 0 || k == grid.len() - 1 {
        return Err(fit_err(format!(
            "best attenuation {} lies on the grid boundary; widen the grid",
            grid[k]
        )));
    }
    let (x0, x1, x2) = (grid[k - 1], grid[k], grid[k + 1]);
    let (f0, f1, f2) = (costs[k - 1], costs[k], costs[k + 1]);
    let num = (x1 - x0).powi(2) * (f1 - f2) - (x1 - x2).powi(2) * (f1 - f0);
    let den = (x1 - x0) * (f1 - f2) - (x1 - x2) * (f1 - f0);
    let vertex = if den.abs() > 0.0 {
        x1 - 0.5 * num / den
    } else {
        x1
    };
    let mut lambda = if vertex > x0 && vertex < x2 {
        vertex
    } else {
        x1
    };
    let mut profile = solve_fifty_k(assembly, lambda, settings)?;
    let (mut residual, mut diagnostics) = temperature_error(&profile, measured);
    if residual > f1 {
        lambda = x1;
        profile = solve_fifty_k(assembly, lambda, settings)?;
        (residual, diagnostics) = temperature_error(&profile, measured);
    }
    let mut fitted = assembly.clone();
    fitted.stages[Stage::FiftyK].attenuation_override = Some(lambda);
    let flux = effective_flux(&fitted, &profile)?;
    Ok(FitResult {
        parameters: vec![param("lambda", "", lambda), param("phi_eff", "W/m^2", flux)],
        residual,
        dof: measured.len().saturating_sub(1),
        diagnostics,
        warnings: Vec::new(),
    })
}

/// What a measurement file contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementKind {
    /// `Q_W` plus `T_<sensor>_K` columns along a shield.
    HeaterSweep,
    /// `Q_W` plus `T_<pair>_K` columns of sensor-pair means along a strip.
    Dipstick,
    /// `T_K`, `R_K_per_W`.
    ResistancePoints,
    /// `T_K`, `rho_W_per_K_m`.
    ConductivityPoints,
}

/// Sidecar metadata of a measurement CSV, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesMetadata {
    pub kind: MeasurementKind,
    #[serde(default)]
    pub provenance: String,
    /// Cross-section, m^2.
    #[serde(default)]
    pub area: Option<f64>,
    /// Sensor positions in column order, m.
    #[serde(default)]
    pub positions: Option<Vec<f64>>,
    /// Background load through the sensor span, W.
    #[serde(default)]
    pub background: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSeries {
    pub meta: SeriesMetadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn read_table(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let columns: Vec<String> = r
        .headers()
        .map_err(|e| Error::Io(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let rows = r
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
            rec.iter()
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|_| Error::Io(format!("row {}: `{v}` is not a number", i + 1)))
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((columns, rows))
}

/// Reads the first two columns of a CSV as `(x, y)` points.
pub fn read_points(text: &str) -> Result<Vec<(f64, f64)>> {
    let (columns, rows) = read_table(text)?;
    if columns.len() < 2 {
        return Err(Error::Io("expected at least two columns".into()));
    }
    Ok(rows.iter().map(|r| (r[0], r[1])).collect())
}

fn is_temperature_column(c: &str) -> bool {
    c.starts_with("T_") && c.ends_with("_K") && c.len() > 4
}

impl MeasurementSeries {
    /// Parses and validates a measurement CSV against its metadata.
    pub fn from_csv(text: &str, meta: SeriesMetadata) -> Result<Self> {
        let (columns, rows) = read_table(text)?;
        let s = MeasurementSeries {
            meta,
            columns,
            rows,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let k = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| fit_err(format!("missing column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[k]).collect())
    }

    fn temperature_columns(&self) -> Vec<usize> {
        (0..self.columns.len())
            .filter(|&k| is_temperature_column(&self.columns[k]))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        let temps: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.as_str() == "T_K" || is_temperature_column(c))
            .map(|(k, _)| k)
            .collect();
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(&k) = temps.iter().find(|&&k| !(row[k] > 0.0)) {
                return Err(fit_err(format!(
                    "row {}: temperature {} must be positive",
                    i + 1,
                    row[k]
                )));
            }
        }
        match self.meta.kind {
            MeasurementKind::HeaterSweep | MeasurementKind::Dipstick => {
                let q = self.column("Q_W")?;
                if q.iter().any(|&v| !(v >= 0.0)) {
                    return Err(fit_err("heater powers must be non-negative"));
                }
                if q.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(fit_err("heater powers must be strictly increasing"));
                }
                let sensors = self.temperature_columns().len();
                match &self.meta.positions {
                    Some(p) if p.len() == sensors && sensors >= 2 => {}
                    Some(p) => {
                        return Err(fit_err(format!(
                            "{} sensor positions for {sensors} temperature columns",
                            p.len()
                        )))
                    }
                    None => return Err(fit_err("metadata needs sensor positions")),
                }
                if !matches!(self.meta.area, Some(a) if a > 0.0) {
                    return Err(fit_err("metadata needs a positive cross-section area"));
                }
            }
            MeasurementKind::ResistancePoints => {
                self.column("T_K")?;
                self.column("R_K_per_W")?;
            }
            MeasurementKind::ConductivityPoints => {
                self.column("T_K")?;
                self.column("rho_W_per_K_m")?;
            }
        }
        Ok(())
    }

    /// Heater rows of a sweep or dipstick series.
    pub fn heater_sweep(&self) -> Result<HeaterSweep> {
        let q = self.column("Q_W")?;
        let cols = self.temperature_columns();
        Ok(HeaterSweep {
            area: self.meta.area.unwrap_or(0.0),
            positions: self.meta.positions.clone().unwrap_or_default(),
            background: self.meta.background.unwrap_or(0.0),
            rows: self
                .rows
                .iter()
                .zip(q)
                .map(|(r, q)| HeaterRow {
                    q,
                    temperatures: cols.iter().map(|&k| r[k]).collect(),
                })
                .collect(),
        })
    }

    /// `(T, value)` pairs of a point series.
    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        let y = match self.meta.kind {
            MeasurementKind::ResistancePoints => "R_K_per_W",
            MeasurementKind::ConductivityPoints => "rho_W_per_K_m",
            _ => {
                return Err(fit_err(
                    "heater data has no point representation; reduce it first",
                ))
            }
        };
        Ok(self
            .column("T_K")?
            .into_iter()
            .zip(self.column(y)?)
            .collect())
    }

    /// Conductivity samples, reducing heater data when needed.
    pub fn conductivity_points(&self, noise_floor: f64) -> Result<ConductivityPoints> {
        match self.meta.kind {
            MeasurementKind::ConductivityPoints => Ok(ConductivityPoints {
                points: self.points()?,
                warnings: Vec::new(),
            }),
            MeasurementKind::HeaterSweep | MeasurementKind::Dipstick => {
                shield_conductivity_points(&self.heater_sweep()?, noise_floor)
            }
            MeasurementKind::ResistancePoints => {
                Err(fit_err("resistance data has no conductivity"))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = (1..=10)
            .map(|k| (k as f64 * 0.3, 2.0 * (k as f64 * 0.3).powf(3.3)))
            .collect();
        let f = fit_power_law(&pts).unwrap();
        assert!((f.value("a").unwrap() - 2.0).abs() < 1e-9);
        assert!((f.value("b").unwrap() - 3.3).abs() < 1e-9);
    }

    #[test]
    fn equal_x_is_degenerate() {
        assert!(fit_power_law(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
        assert!(fit_power_law(&[(1.0, 1.0), (2.0, 2.0)]).is_err());
    }

    #[test]
    fn zero_difference_hits_noise_floor() {
        let sweep = HeaterSweep {
            area: 1e-4,
            positions: vec![0.0, 1.0],
            background: 0.0,
            rows: vec![HeaterRow {
                q: 0.1,
                temperatures: vec![4.0, 4.0],
            }],
        };
        assert!(matches!(
            shield_conductivity_points(&sweep, NOISE_FLOOR),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn rrr_needs_three_points() {
        let p = [
            (4.0, nist_copper::conductivity(210.0, 4.0)),
            (10.0, nist_copper::conductivity(210.0, 10.0)),
        ];
        assert!(fit_rrr(&p).is_err());
    }

    #[test]
    fn post_exponent_drops_by_one() {
        match post_conductivity_from_fit(1e-6, 3.3, 0.01, 1e-5).unwrap() {
            ConductivityModel::PowerLawPiecewise { segments } => {
                assert!((segments[0].c - 2.3).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn heater_csv_is_validated() {
        let meta = SeriesMetadata {
            kind: MeasurementKind::HeaterSweep,
            provenance: String::new(),
            area: Some(1e-4),
            positions: Some(vec![0.0, 0.5]),
            background: None,
        };
        let ok = "Q_W,T_1_K,T_2_K\n0.0,4.0,4.1\n0.1,4.0,4.3\n";
        assert_eq!(
            MeasurementSeries::from_csv(ok, meta.clone())
                .unwrap()
                .heater_sweep()
                .unwrap()
                .rows
                .len(),
            2
        );
        let unsorted = "Q_W,T_1_K,T_2_K\n0.1,4.0,4.1\n0.0,4.0,4.3\n";
        assert!(MeasurementSeries::from_csv(unsorted, meta.clone()).is_err());
        let cold = "Q_W,T_1_K,T_2_K\n0.0,-4.0,4.1\n";
        assert!(MeasurementSeries::from_csv(cold, meta).is_err());
    }
}
