//! Radiative and post heat loads impinging on each stage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinkAssembly, Stage, POSITION_TOL};
use crate::materials::ConductivityModel;
use crate::profile::StageProfile;

/// Stefan-Boltzmann constant in W/(m^2 K^4).
pub const STEFAN_BOLTZMANN: f64 = 5.670_374_419e-8;

/// Radiative exchange factor `(1/eps_inner + F/eps_outer)^-1` between nested
/// shields with view factor `F = C_inner / C_outer`.
pub fn attenuation_lambda(eps_inner: f64, eps_outer: f64, view_factor: f64) -> Result<f64> {
    for (name, v) in [
        ("inner emissivity", eps_inner),
        ("outer emissivity", eps_outer),
    ] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(Error::domain(format!("{name} must lie in (0, 1], got {v}")));
        }
    }
    if !(view_factor > 0.0 && view_factor <= 1.0) {
        return Err(Error::domain(format!(
            "view factor must lie in (0, 1], got {view_factor}"
        )));
    }
    Ok(1.0 / (1.0 / eps_inner + view_factor / eps_outer))
}

/// Radiative heat flux in W/m^2 received from an enclosing surface at `t_hot`.
///
/// With `include_self` the re-emission of the receiving surface at `t_self`
/// is subtracted.
pub fn radiative_flux(t_hot: f64, lambda: f64, include_self: bool, t_self: f64) -> Result<f64> {
    if !(t_hot >= 0.0) {
        return Err(Error::domain(format!(
            "hot temperature must be non-negative, got {t_hot} K"
        )));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::domain(format!(
            "attenuation must lie in [0, 1], got {lambda}"
        )));
    }
    if include_self {
        if !(t_self >= 0.0 && t_self < t_hot) {
            return Err(Error::domain(format!(
                "receiving surface at {t_self} K is not colder than the source at {t_hot} K"
            )));
        }
        Ok(STEFAN_BOLTZMANN * lambda * (t_hot.powi(4) - t_self.powi(4)))
    } else {
        Ok(STEFAN_BOLTZMANN * lambda * t_hot.powi(4))
    }
}

/// Temperature dependence of the heat load through one support post.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum PostLoadForm {
    Constant {
        power: f64,
    },
    /// `p0 (T_hot / t0_hot)^exponent`.
    PowerLaw {
        p0: f64,
        exponent: f64,
        t0_hot: f64,
    },
}

/// Heat load of a single post carrying stage `n` from stage `n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostLoadCurve {
    pub form: PostLoadForm,
    /// The stage's effective attenuation already accounts for this load, so
    /// it is not applied as a point load.
    #[serde(default)]
    pub covered_by_mli: bool,
}

impl PostLoadCurve {
    pub fn constant(power: f64) -> Self {
        PostLoadCurve {
            form: PostLoadForm::Constant { power },
            covered_by_mli: false,
        }
    }

    pub fn power_law(p0: f64, exponent: f64, t0_hot: f64) -> Self {
        PostLoadCurve {
            form: PostLoadForm::PowerLaw {
                p0,
                exponent,
                t0_hot,
            },
            covered_by_mli: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.form {
            PostLoadForm::Constant { power } if !(power >= 0.0 && power.is_finite()) => Err(
                Error::domain(format!("post load must be non-negative, got {power} W")),
            ),
            PostLoadForm::PowerLaw {
                p0,
                exponent,
                t0_hot,
            } if !(p0 >= 0.0 && exponent > 0.0 && t0_hot > 0.0) => Err(Error::domain(
                "post power law needs p0 >= 0, exponent > 0, T0_hot > 0",
            )),
            _ => Ok(()),
        }
    }

    /// Load through one post in W when the enclosing stage is at `t_hot`.
    pub fn load(&self, t_hot: f64) -> Result<f64> {
        if !(t_hot > 0.0) {
            return Err(Error::domain(format!(
                "post hot end must be above 0 K, got {t_hot} K"
            )));
        }
        Ok(match self.form {
            PostLoadForm::Constant { power } => power,
            PostLoadForm::PowerLaw {
                p0,
                exponent,
                t0_hot,
            } => p0 * (t_hot / t0_hot).powf(exponent),
        })
    }
}

/// Post load from the conduction integral of an arbitrary post material.
pub fn post_load_from_material(
    model: &ConductivityModel,
    area: f64,
    length: f64,
    t_cold: f64,
    t_hot: f64,
) -> Result<f64> {
    if !(area > 0.0 && length > 0.0) {
        return Err(Error::domain("post area and length must be positive"));
    }
    Ok(area / length * model.integral(t_cold, t_hot)?)
}

/// One axial cell with a linearly varying radiative line density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadCell {
    pub x0: f64,
    pub x1: f64,
    /// Line density in W/m at `x0` and `x1`.
    pub w0: f64,
    pub w1: f64,
}

impl LoadCell {
    pub fn total(&self) -> f64 {
        0.5 * (self.w0 + self.w1) * (self.x1 - self.x0)
    }

    /// Line density at `x` inside the cell.
    pub fn density(&self, x: f64) -> f64 {
        let h = self.x1 - self.x0;
        if h <= 0.0 {
            return self.w0;
        }
        self.w0 + (self.w1 - self.w0) * (x - self.x0) / h
    }

    /// Integral of the density from `x0` to `x`.
    pub fn partial(&self, x: f64) -> f64 {
        let s = x - self.x0;
        let h = self.x1 - self.x0;
        if h <= 0.0 {
            return 0.0;
        }
        self.w0 * s + 0.5 * (self.w1 - self.w0) * s * s / h
    }
}

/// Distributed and discrete heat loads on one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct LineLoadField {
    pub stage: Stage,
    /// Contiguous cells covering the shield segments, sorted by position.
    pub cells: Vec<LoadCell>,
    /// Point loads `(x, P)` from posts and heaters, sorted by position.
    pub deltas: Vec<(f64, f64)>,
    /// Radiative part of the cumulative load at each cell start, plus the end.
    prefix: Vec<f64>,
}

impl LineLoadField {
    /// Cells containing a point load in their interior are split there, so
    /// every point load sits on a cell edge.
    pub fn new(stage: Stage, cells: Vec<LoadCell>, mut deltas: Vec<(f64, f64)>) -> Self {
        deltas.sort_by(|a, b| a.0.total_cmp(&b.0));
        let cells: Vec<LoadCell> = cells
            .into_iter()
            .flat_map(|c| {
                let mut edges = vec![c.x0];
                edges.extend(
                    deltas
                        .iter()
                        .map(|d| d.0)
                        .filter(|&x| x > c.x0 + POSITION_TOL && x < c.x1 - POSITION_TOL),
                );
                edges.dedup();
                edges.push(c.x1);
                edges
                    .windows(2)
                    .map(|e| LoadCell {
                        x0: e[0],
                        x1: e[1],
                        w0: c.density(e[0]),
                        w1: c.density(e[1]),
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut prefix = Vec::with_capacity(cells.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for c in &cells {
            acc += c.total();
            prefix.push(acc);
        }
        LineLoadField {
            stage,
            cells,
            deltas,
            prefix,
        }
    }

    pub fn radiative_total(&self) -> f64 {
        *self.prefix.last().unwrap_or(&0.0)
    }

    pub fn delta_total(&self) -> f64 {
        self.deltas.iter().map(|d| d.1).sum()
    }

    pub fn total(&self) -> f64 {
        self.radiative_total() + self.delta_total()
    }

    /// Radiative line density at `x` (zero outside shield cells).
    pub fn density(&self, x: f64) -> f64 {
        match self.cell_index(x) {
            Some(i) => self.cells[i].density(x),
            None => 0.0,
        }
    }

    fn cell_index(&self, x: f64) -> Option<usize> {
        let i = self.cells.partition_point(|c| c.x1 < x);
        (i < self.cells.len() && self.cells[i].x0 <= x).then_some(i)
    }

    /// Radiative load on `[0, x]`.
    pub fn radiative_upto(&self, x: f64) -> f64 {
        let i = self.cells.partition_point(|c| c.x1 <= x);
        let mut w = self.prefix[i];
        if i < self.cells.len() && self.cells[i].x0 < x {
            w += self.cells[i].partial(x);
        }
        w
    }

    /// Cumulative load on `[0, x)`: point loads exactly at `x` are excluded.
    pub fn cumulative(&self, x: f64) -> f64 {
        let n = self.deltas.partition_point(|d| d.0 < x);
        self.radiative_upto(x) + self.deltas[..n].iter().map(|d| d.1).sum::<f64>()
    }

    /// Cumulative load on `[0, x]`: point loads exactly at `x` are included.
    pub fn cumulative_inclusive(&self, x: f64) -> f64 {
        let n = self.deltas.partition_point(|d| d.0 <= x);
        self.radiative_upto(x) + self.deltas[..n].iter().map(|d| d.1).sum::<f64>()
    }

    /// Inverse of the cumulative load on `[a, b]`: the position `d` where the
    /// load `w` is reached and the part of a point load at `d` that `w`
    /// includes. Point loads make the cumulative load jump; a `w` inside such
    /// a jump lands exactly on the point load.
    pub fn locate(&self, w: f64, a: f64, b: f64) -> (f64, f64) {
        let mut lo = a;
        for &(p, power) in self.deltas.iter().filter(|d| d.0 > a && d.0 < b) {
            let before = self.cumulative(p);
            if w <= before {
                break;
            }
            if w <= before + power {
                return (p, w - before);
            }
            lo = p;
        }
        let hi = self
            .deltas
            .iter()
            .map(|d| d.0)
            .find(|&p| p > lo && p < b)
            .unwrap_or(b);
        // the radiative part is continuous and non-decreasing between point loads
        let base = self.cumulative_inclusive(lo) - self.radiative_upto(lo);
        let target = w - base;
        let (mut x0, mut x1) = (lo, hi);
        if self.radiative_upto(x1) <= target {
            return (x1, 0.0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (x0 + x1);
            if mid <= x0 || mid >= x1 {
                break;
            }
            if self.radiative_upto(mid) < target {
                x0 = mid;
            } else {
                x1 = mid;
            }
        }
        (x1, 0.0)
    }

    /// Total load on the closed interval `[a, b]`.
    pub fn load_between(&self, a: f64, b: f64) -> f64 {
        self.cumulative_inclusive(b) - self.cumulative(a)
    }
}

/// Temperature of the enclosing surface as seen by a stage.
#[derive(Debug, Clone, Copy)]
pub enum HotSide<'a> {
    Uniform(f64),
    Profile(&'a StageProfile),
}

impl HotSide<'_> {
    /// Hot temperature just right (`right = true`) or left of `x`.
    pub fn at(&self, x: f64, right: bool) -> f64 {
        match self {
            HotSide::Uniform(t) => *t,
            HotSide::Profile(p) => p.temperature_side(x, right),
        }
    }
}

/// Maximum cell width used to discretize the radiative density.
pub const MAX_CELL: f64 = 0.05;

/// Effective attenuation between a stage and its enclosure.
pub fn stage_lambda(assembly: &LinkAssembly, stage: Stage) -> Result<f64> {
    let spec = &assembly.stages[stage];
    if let Some(l) = spec.attenuation_override {
        return Ok(l);
    }
    let (eps_out, c_out) = match stage.hotter() {
        Some(h) => (
            assembly.stages[h].emissivity,
            assembly.stages[h].circumference,
        ),
        None => (
            assembly.vacuum_can.emissivity,
            assembly.vacuum_can.circumference,
        ),
    };
    attenuation_lambda(spec.emissivity, eps_out, spec.circumference / c_out)
}

/// Builds the load field of `stage` given the enclosing temperature.
///
/// `self_temps` holds the stage's own temperature at both ends of every cell
/// of [`LinkAssembly::cell_edges`]; it is used only when the stage radiates
/// back (`include_self`).
pub fn build_line_load(
    assembly: &LinkAssembly,
    stage: Stage,
    hot: HotSide<'_>,
    self_temps: Option<&[(f64, f64)]>,
) -> Result<LineLoadField> {
    let spec = &assembly.stages[stage];
    let lambda = stage_lambda(assembly, stage)?;
    let edges = assembly.cell_edges(MAX_CELL);
    let self_temps = match self_temps {
        Some(s) if spec.include_self => {
            if s.len() != edges.len() {
                return Err(Error::domain(
                    "self temperatures do not match the load cells",
                ));
            }
            Some(s)
        }
        _ => None,
    };
    let density = |x: f64, right: bool, t_self: Option<f64>| -> Result<f64> {
        let t_hot = hot.at(x, right);
        let flux = if lambda == 0.0 {
            0.0
        } else {
            radiative_flux(t_hot, lambda, t_self.is_some(), t_self.unwrap_or(0.0))?
        };
        Ok((flux + spec.extra_flux) * spec.circumference)
    };

    let mut cells = Vec::with_capacity(edges.len());
    for (i, &(a, b)) in edges.iter().enumerate() {
        let (sa, sb) = match self_temps {
            Some(s) => (Some(s[i].0), Some(s[i].1)),
            None => (None, None),
        };
        cells.push(LoadCell {
            x0: a,
            x1: b,
            w0: density(a, true, sa)?,
            w1: density(b, false, sb)?,
        });
    }

    let mut deltas = Vec::new();
    let posts = if spec.post_load.covered_by_mli {
        Vec::new()
    } else {
        assembly.post_sets()
    };
    for (x, count) in posts {
        let p = spec.post_load.load(hot.at(x, true))?;
        deltas.push((x, p * count as f64));
    }
    for h in assembly.heaters.iter().filter(|h| h.stage == stage) {
        deltas.push((h.position, h.power));
    }
    Ok(LineLoadField::new(stage, cells, deltas))
}
