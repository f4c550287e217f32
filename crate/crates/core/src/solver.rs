//! Cascaded steady-state solver.
//!
//! Each stage is solved from its heat sinks outwards: the load between a sink
//! and the neighbouring flow divide sets the plate temperature through the
//! cooling curve, the shield temperature follows from the sink resistance,
//! and the conduction equation `A rho(T) dT/dx = Q(x)` is integrated towards
//! the divide with discrete jumps at every lumped resistance. Divides are
//! located by bisection so that both sides meet at the same temperature.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LinkAssembly, PerStage, Sink, Stage, POSITION_TOL};
use crate::loads::{build_line_load, HotSide, LineLoadField, MAX_CELL};
use crate::materials::{ConductivityModel, ResistanceCurve};
use crate::numerics::{bracketed_root, rk45, OdeTolerance};
use crate::profile::{PointKind, ProfilePoint, SinkRecord, StageProfile};

/// Numerical controls of the solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub ode_rel_tol: f64,
    /// Absolute ODE tolerance in K for stages at or above 1 K; colder stages
    /// scale it by their reference temperature.
    pub ode_abs_tol: f64,
    /// Relative tolerance of the implicit contact-jump equation.
    pub jump_rel_tol: f64,
    /// Width of the final flow-divide bracket, m.
    pub divide_tol: f64,
    pub picard_relaxation: f64,
    /// Picard tolerance for the 50K stage, K.
    pub picard_tol: f64,
    /// Picard tolerance for colder stages that radiate back, K.
    pub picard_tol_cold: f64,
    pub max_picard_iters: usize,
    pub max_divide_sweeps: usize,
    pub max_ode_steps: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            ode_rel_tol: 1e-6,
            ode_abs_tol: 1e-6,
            jump_rel_tol: 1e-9,
            divide_tol: 1e-4,
            picard_relaxation: 0.5,
            picard_tol: 0.01,
            picard_tol_cold: 1e-4,
            max_picard_iters: 100,
            max_divide_sweeps: 60,
            max_ode_steps: 10_000,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("ode_rel_tol", self.ode_rel_tol),
            ("ode_abs_tol", self.ode_abs_tol),
            ("jump_rel_tol", self.jump_rel_tol),
            ("divide_tol", self.divide_tol),
            ("picard_tol", self.picard_tol),
            ("picard_tol_cold", self.picard_tol_cold),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(
                    format!("solver.{name}"),
                    format!("must be positive, got {v}"),
                ));
            }
        }
        if !(self.picard_relaxation > 0.0 && self.picard_relaxation <= 1.0) {
            return Err(Error::validation(
                "solver.picard_relaxation",
                format!("must lie in (0, 1], got {}", self.picard_relaxation),
            ));
        }
        for (name, v) in [
            ("max_picard_iters", self.max_picard_iters),
            ("max_divide_sweeps", self.max_divide_sweeps),
            ("max_ode_steps", self.max_ode_steps),
        ] {
            if v == 0 {
                return Err(Error::validation(
                    format!("solver.{name}"),
                    "must be at least 1",
                ));
            }
        }
        Ok(())
    }

    /// Sets one field from a `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::validation(format!("solver.{key}"), format!("cannot parse `{value}`"));
        let float = || value.trim().parse::<f64>().map_err(|_| bad());
        let int = || value.trim().parse::<usize>().map_err(|_| bad());
        match key {
            "ode_rel_tol" => self.ode_rel_tol = float()?,
            "ode_abs_tol" => self.ode_abs_tol = float()?,
            "jump_rel_tol" => self.jump_rel_tol = float()?,
            "divide_tol" => self.divide_tol = float()?,
            "picard_relaxation" => self.picard_relaxation = float()?,
            "picard_tol" => self.picard_tol = float()?,
            "picard_tol_cold" => self.picard_tol_cold = float()?,
            "max_picard_iters" => self.max_picard_iters = int()?,
            "max_divide_sweeps" => self.max_divide_sweeps = int()?,
            "max_ode_steps" => self.max_ode_steps = int()?,
            _ => {
                return Err(Error::validation(
                    format!("solver.{key}"),
                    "unknown solver setting",
                ))
            }
        }
        self.validate()
    }

    fn ode(&self, stage_t0: f64) -> OdeTolerance {
        OdeTolerance {
            rel: self.ode_rel_tol,
            abs: self.ode_abs_tol * stage_t0.min(1.0),
            max_steps: self.max_ode_steps,
        }
    }
}

/// Solves `T+ - T- = R((T+ + T-)/2) Q` for the temperature on the far side
/// of a lumped resistance carrying `q` watts.
pub fn contact_jump(r: &ResistanceCurve, q: f64, t_minus: f64, rel_tol: f64) -> Result<f64> {
    if !(q >= 0.0) {
        return Err(Error::domain(format!(
            "heat flow through an interface must be non-negative, got {q} W"
        )));
    }
    if q == 0.0 {
        return Ok(t_minus);
    }
    let dom = r.domain();
    let g = |tp: f64| -> Result<f64> { Ok(tp - t_minus - r.resistance(0.5 * (tp + t_minus))? * q) };
    // smallest far-side temperature whose midpoint is inside the domain
    let lo = t_minus.max(2.0 * dom.t_min - t_minus);
    let g_lo = g(lo)?;
    if g_lo >= 0.0 {
        if lo == t_minus {
            return Ok(t_minus);
        }
        return Err(Error::domain(format!(
            "jump from {t_minus} K leaves the resistance domain below {} K",
            dom.t_min
        )));
    }
    let hi_limit = 2.0 * dom.t_max - t_minus;
    let mut step = (-g_lo).max(lo * 1e-6);
    let (mut hi, mut g_hi);
    loop {
        hi = (lo + step).min(hi_limit);
        g_hi = g(hi)?;
        if g_hi >= 0.0 {
            break;
        }
        if hi >= hi_limit {
            return Err(Error::domain(format!(
                "jump of {q} W from {t_minus} K exceeds the resistance domain up to {} K",
                dom.t_max
            )));
        }
        step *= 2.0;
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    bracketed_root(
        g,
        lo,
        hi,
        g_lo,
        g_hi,
        |x| rel_tol * x.abs().max(1e-300),
        500,
    )
}

/// Heat sink as used during a stage solve.
struct SinkInfo<'a> {
    sink: Sink<'a>,
    /// Index of the segment on the low-x and high-x side.
    left: Option<usize>,
    right: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Bound {
    Sink(usize),
    Closed(f64),
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    left: Bound,
    right: Bound,
    x0: f64,
    x1: f64,
    divide: f64,
    /// Cumulative load at the divide, including any split point load.
    anchor: f64,
}

struct StageContext<'a> {
    stage: Stage,
    field: LineLoadField,
    model: &'a ConductivityModel,
    area: f64,
    pass: Vec<(f64, &'a ResistanceCurve)>,
    /// Cumulative load just right of each cell start.
    wc0: Vec<f64>,
    ode: OdeTolerance,
    jump_tol: f64,
}

/// Outcome of integrating from a sink towards a divide.
enum Reach {
    Temperature(f64),
    /// Plate or shield left its admissible range: the divide must move towards this sink.
    TooHot,
}

impl<'a> StageContext<'a> {
    fn new(
        assembly: &'a LinkAssembly,
        stage: Stage,
        field: LineLoadField,
        settings: &SolverSettings,
    ) -> Self {
        let spec = &assembly.stages[stage];
        let wc0 = field
            .cells
            .iter()
            .map(|c| field.cumulative_inclusive(c.x0))
            .collect();
        StageContext {
            stage,
            model: &spec.material,
            area: spec.area,
            pass: assembly
                .pass_interfaces(stage)
                .into_iter()
                .map(|i| (i.position, i.resistance))
                .collect(),
            wc0,
            field,
            ode: settings.ode(spec.t0),
            jump_tol: settings.jump_rel_tol,
        }
    }

    /// Heat flowing towards the sink at `x`, for a walk anchored at `w_anchor`.
    fn flow(&self, cell: usize, x: f64, w_anchor: f64, rightwards: bool) -> f64 {
        let wc = self.wc0[cell] + self.field.cells[cell].partial(x);
        let q = if rightwards {
            w_anchor - wc
        } else {
            wc - w_anchor
        };
        q.max(0.0)
    }

    /// Integrates from `from` (just off a sink, at `t_start`) to `to`.
    /// Recorded points exclude both end points.
    fn walk(
        &self,
        from: f64,
        to: f64,
        t_start: f64,
        w_anchor: f64,
        mut record: Option<&mut Vec<ProfilePoint>>,
    ) -> Result<f64> {
        let rightwards = to >= from;
        let sign = if rightwards { -1.0 } else { 1.0 };
        let cells = &self.field.cells;
        let (lo, hi) = if rightwards { (from, to) } else { (to, from) };
        let first = cells.partition_point(|c| c.x1 <= lo + POSITION_TOL);
        let last = cells.partition_point(|c| c.x0 < hi - POSITION_TOL);
        let order: Box<dyn Iterator<Item = usize>> = if rightwards {
            Box::new(first..last)
        } else {
            Box::new((first..last).rev())
        };
        let mut t = t_start;
        for i in order {
            let c = &cells[i];
            let (a, b) = if rightwards {
                (c.x0.max(from), c.x1.min(to))
            } else {
                (c.x1.min(from), c.x0.max(to))
            };
            if (b - a).abs() > 0.0 {
                let qa = self.flow(i, a, w_anchor, rightwards);
                let qb = self.flow(i, b, w_anchor, rightwards);
                if qa > 0.0 || qb > 0.0 {
                    let dir = if rightwards { 1.0 } else { -1.0 };
                    let rhs = |x: f64, temp: f64| -> Result<f64> {
                        let q = self.flow(i, x, w_anchor, rightwards);
                        if q == 0.0 {
                            return Ok(0.0);
                        }
                        Ok(dir * q / (self.area * self.model.conductivity(temp)?))
                    };
                    t = rk45(rhs, a, b, t, self.ode)?.0;
                }
            }
            let reached_end = (b - to).abs() <= POSITION_TOL;
            if reached_end {
                break;
            }
            let q_here = self.flow(i, b, w_anchor, rightwards);
            let jumps: Vec<&ResistanceCurve> = self
                .pass
                .iter()
                .filter(|(p, _)| (p - b).abs() <= POSITION_TOL)
                .map(|(_, r)| *r)
                .collect();
            if jumps.is_empty() {
                if let Some(rec) = record.as_deref_mut() {
                    rec.push(ProfilePoint {
                        x: b,
                        t,
                        q: sign * q_here,
                        kind: PointKind::Interior,
                    });
                }
            } else {
                let before = t;
                for r in jumps {
                    t = contact_jump(r, q_here, t, self.jump_tol)?;
                }
                if let Some(rec) = record.as_deref_mut() {
                    let (k1, k2) = if rightwards {
                        (PointKind::JumpMinus, PointKind::JumpPlus)
                    } else {
                        (PointKind::JumpPlus, PointKind::JumpMinus)
                    };
                    rec.push(ProfilePoint {
                        x: b,
                        t: before,
                        q: sign * q_here,
                        kind: k1,
                    });
                    rec.push(ProfilePoint {
                        x: b,
                        t,
                        q: sign * q_here,
                        kind: k2,
                    });
                }
            }
        }
        Ok(t)
    }

    fn infeasible(&self, msg: String) -> Error {
        Error::Infeasible {
            stage: self.stage.index(),
            message: msg,
        }
    }

    /// Plate temperature, shield temperature at the sink, and temperature at
    /// the end of the walk.
    fn side(
        &self,
        sink: &Sink<'_>,
        other: f64,
        share: f64,
        to: f64,
        w_anchor: f64,
        record: Option<&mut Vec<ProfilePoint>>,
    ) -> Result<(f64, f64, f64)> {
        let total = other + share;
        let tp = sink.cooling.invert(total).map_err(|e| {
            self.infeasible(format!(
                "sink at {} m cannot absorb {total} W: {e}",
                sink.position
            ))
        })?;
        let ts = contact_jump(sink.resistance, share, tp, self.jump_tol)?;
        let end = self.walk(sink.position, to, ts, w_anchor, record)?;
        Ok((tp, ts, end))
    }

    fn reach(
        &self,
        sink: &Sink<'_>,
        other: f64,
        share: f64,
        to: f64,
        w_anchor: f64,
    ) -> Result<Reach> {
        match self.side(sink, other, share, to, w_anchor, None) {
            Ok((_, _, t)) => Ok(Reach::Temperature(t)),
            Err(Error::Infeasible { .. }) | Err(Error::Domain(_)) => Ok(Reach::TooHot),
            Err(e) => Err(e),
        }
    }
}

/// Convergence data of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: Stage,
    pub picard_iterations: usize,
    pub picard_residual: f64,
    pub divide_sweeps: usize,
    pub energy_residual: f64,
}

/// Solves one stage given the enclosing temperature.
///
/// `self_temps` gives the stage's own temperature at the load-cell edges when
/// the stage radiates back to its enclosure.
pub fn solve_stage(
    assembly: &LinkAssembly,
    stage: Stage,
    hot: HotSide<'_>,
    self_temps: Option<&[(f64, f64)]>,
    settings: &SolverSettings,
) -> Result<(StageProfile, usize)> {
    let field =
        build_line_load(assembly, stage, hot, self_temps).map_err(|e| e.in_stage(stage.index()))?;
    solve_stage_with_field(assembly, stage, field, settings).map_err(|e| e.in_stage(stage.index()))
}

/// Solves one stage for an explicit load field.
pub fn solve_stage_with_field(
    assembly: &LinkAssembly,
    stage: Stage,
    field: LineLoadField,
    settings: &SolverSettings,
) -> Result<(StageProfile, usize)> {
    settings.validate()?;
    let ctx = StageContext::new(assembly, stage, field, settings);
    let raw = assembly.sinks(stage);
    if raw.is_empty() {
        return Err(ctx.infeasible("stage has no heat sink".into()));
    }
    let (x_start, x_end) = (assembly.start(), assembly.end());

    let mut segments: Vec<Segment> = Vec::new();
    if raw[0].position > x_start + POSITION_TOL {
        segments.push(Segment {
            left: Bound::Closed(x_start),
            right: Bound::Sink(0),
            x0: x_start,
            x1: raw[0].position,
            divide: x_start,
            anchor: 0.0,
        });
    }
    for k in 0..raw.len().saturating_sub(1) {
        let (a, b) = (raw[k].position, raw[k + 1].position);
        if b - a > POSITION_TOL {
            segments.push(Segment {
                left: Bound::Sink(k),
                right: Bound::Sink(k + 1),
                x0: a,
                x1: b,
                divide: 0.5 * (a + b),
                anchor: 0.0,
            });
        }
    }
    let last = raw.len() - 1;
    if raw[last].position < x_end - POSITION_TOL {
        segments.push(Segment {
            left: Bound::Sink(last),
            right: Bound::Closed(x_end),
            x0: raw[last].position,
            x1: x_end,
            divide: x_end,
            anchor: 0.0,
        });
    }
    let mut sinks: Vec<SinkInfo<'_>> = raw
        .into_iter()
        .map(|sink| SinkInfo {
            sink,
            left: None,
            right: None,
        })
        .collect();
    for (j, s) in segments.iter().enumerate() {
        if let Bound::Sink(k) = s.left {
            sinks[k].right = Some(j);
        }
        if let Bound::Sink(k) = s.right {
            sinks[k].left = Some(j);
        }
    }

    let f = &ctx.field;
    for s in segments.iter_mut() {
        s.anchor = f.cumulative(s.divide);
    }
    // anchors: cumulative load at the divide seen from the left and right walks
    let anchor = |s: &Segment| -> (f64, f64) {
        match (s.left, s.right) {
            (Bound::Closed(_), _) => (0.0, f.cumulative(s.x0)),
            (_, Bound::Closed(_)) => (f.cumulative_inclusive(s.x1), 0.0),
            _ => (s.anchor, s.anchor),
        }
    };
    // load sent to the (left, right) bounding sinks
    let shares = |s: &Segment| -> (f64, f64) {
        match (s.left, s.right) {
            (Bound::Closed(_), _) => (0.0, f.cumulative(s.x1)),
            (_, Bound::Closed(_)) => (f.cumulative_inclusive(s.x1) - f.cumulative(s.x0), 0.0),
            _ => (s.anchor - f.cumulative(s.x0), f.cumulative(s.x1) - s.anchor),
        }
    };
    let other_load = |segments: &[Segment], k: usize, exclude: usize| -> f64 {
        let info = &sinks[k];
        let mut total = info.sink.plate_load;
        if let Some(j) = info.left.filter(|&j| j != exclude) {
            total += shares(&segments[j]).1;
        }
        if let Some(j) = info.right.filter(|&j| j != exclude) {
            total += shares(&segments[j]).0;
        }
        total
    };

    let interior: Vec<usize> = segments
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!((s.left, s.right), (Bound::Sink(_), Bound::Sink(_))))
        .map(|(j, _)| j)
        .collect();
    let coupled = sinks.iter().any(|s| s.left.is_some() && s.right.is_some());
    let mut sweeps = 0;
    if !interior.is_empty() {
        loop {
            sweeps += 1;
            let mut max_change: f64 = 0.0;
            for &j in &interior {
                let (ka, kb) = match (segments[j].left, segments[j].right) {
                    (Bound::Sink(a), Bound::Sink(b)) => (a, b),
                    _ => unreachable!(),
                };
                let other_a = other_load(&segments, ka, j);
                let other_b = other_load(&segments, kb, j);
                let (x0, x1) = (segments[j].x0, segments[j].x1);
                let (sa, sb) = (&sinks[ka].sink, &sinks[kb].sink);
                let mismatch = |wd: f64| -> Result<Option<f64>> {
                    let d = f.locate(wd, x0, x1).0;
                    let left = ctx.reach(sa, other_a, wd - f.cumulative(x0), d, wd)?;
                    let right = ctx.reach(sb, other_b, f.cumulative(x1) - wd, d, wd)?;
                    Ok(match (left, right) {
                        (Reach::Temperature(l), Reach::Temperature(r)) => Some(l - r),
                        (Reach::TooHot, Reach::Temperature(_)) => Some(f64::INFINITY),
                        (Reach::Temperature(_), Reach::TooHot) => Some(f64::NEG_INFINITY),
                        (Reach::TooHot, Reach::TooHot) => None,
                    })
                };
                let (w0, w1) = (f.cumulative(x0), f.cumulative(x1));
                let at = |w: f64| f.locate(w, x0, x1).0;
                let anchor = locate_divide(&mismatch, &at, w0, w1, settings.divide_tol).map_err(
                    |e| match e {
                        Error::Infeasible { .. } => ctx.infeasible(format!(
                            "neither sink of the segment [{x0}, {x1}] m can absorb its load"
                        )),
                        other => other,
                    },
                )?;
                let divide = at(anchor);
                max_change = max_change.max((divide - segments[j].divide).abs());
                segments[j].divide = divide;
                segments[j].anchor = anchor;
            }
            if !coupled || (sweeps > 1 && max_change <= 2.0 * settings.divide_tol) {
                break;
            }
            if sweeps >= settings.max_divide_sweeps {
                return Err(Error::NonConvergence(format!(
                    "flow divides still moving by {max_change} m after {sweeps} sweeps"
                )));
            }
        }
    }

    // final pass: record the profile
    let mut points: Vec<ProfilePoint> = Vec::new();
    let mut records = Vec::with_capacity(sinks.len());
    let mut divides = Vec::new();
    let mut divide_temps: Vec<(f64, f64, f64)> = Vec::new();
    for info in &sinks {
        let mut from_left = 0.0;
        let mut from_right = 0.0;
        if let Some(j) = info.left {
            from_left = shares(&segments[j]).1;
        }
        if let Some(j) = info.right {
            from_right = shares(&segments[j]).0;
        }
        let total = info.sink.plate_load + from_left + from_right;
        let tp = info.sink.cooling.invert(total).map_err(|e| {
            ctx.infeasible(format!(
                "sink at {} m cannot absorb {total} W: {e}",
                info.sink.position
            ))
        })?;
        records.push(SinkRecord {
            position: info.sink.position,
            module: info.sink.module,
            q_extracted: total,
            q_from_left: from_left,
            q_from_right: from_right,
            t_plate: tp,
        });
        let x = info.sink.position;
        if let Some(j) = info.left {
            let s = &segments[j];
            let (_, wr) = anchor(s);
            let mut rec = Vec::new();
            let (_, ts, end) = ctx.side(
                &info.sink,
                total - from_left,
                from_left,
                s.divide,
                wr,
                Some(&mut rec),
            )?;
            rec.reverse();
            points.extend(rec);
            points.push(ProfilePoint {
                x,
                t: ts,
                q: from_left,
                kind: PointKind::JumpMinus,
            });
            divide_temps.push((s.divide, end, j as f64));
        }
        points.push(ProfilePoint {
            x,
            t: tp,
            q: 0.0,
            kind: PointKind::Sink,
        });
        if let Some(j) = info.right {
            let s = &segments[j];
            let (wl, _) = anchor(s);
            let mut rec = Vec::new();
            let (_, ts, end) = ctx.side(
                &info.sink,
                total - from_right,
                from_right,
                s.divide,
                wl,
                Some(&mut rec),
            )?;
            points.push(ProfilePoint {
                x,
                t: ts,
                q: -from_right,
                kind: PointKind::JumpPlus,
            });
            points.extend(rec);
            divide_temps.push((s.divide, end, j as f64));
        }
    }
    // one point per divide, at the mean of the temperatures reached from each side
    divide_temps.sort_by(|a, b| a.2.total_cmp(&b.2));
    for group in divide_temps.chunk_by(|a, b| a.2 == b.2) {
        let d = group[0].0;
        let t = group.iter().map(|g| g.1).sum::<f64>() / group.len() as f64;
        divides.push(d);
        points.push(ProfilePoint {
            x: d,
            t,
            q: 0.0,
            kind: PointKind::Interior,
        });
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x).then(kind_rank(a, b)));
    divides.sort_by(f64::total_cmp);

    let profile = StageProfile {
        stage,
        points,
        sinks: records,
        divides,
        total_load: ctx.field.total(),
    };
    Ok((profile, sweeps))
}

/// Orders coincident points from the low-x to the high-x side.
fn kind_rank(a: &ProfilePoint, b: &ProfilePoint) -> std::cmp::Ordering {
    let rank = |p: &ProfilePoint| match p.kind {
        PointKind::JumpMinus => 0,
        PointKind::Interior => 1,
        PointKind::Sink => 1,
        PointKind::JumpPlus => 2,
    };
    rank(a).cmp(&rank(b))
}

/// Bisection on the temperature mismatch between the two sides of a
/// segment, parameterized by the cumulative load at the divide so that point
/// loads can be split between the sinks. Stops once the divide position is
/// known to `tol` and the load bracket no longer shrinks meaningfully.
fn locate_divide(
    mismatch: &dyn Fn(f64) -> Result<Option<f64>>,
    position: &dyn Fn(f64) -> f64,
    w0: f64,
    w1: f64,
    tol: f64,
) -> Result<f64> {
    let infeasible = || Error::Infeasible {
        stage: 0,
        message: String::new(),
    };
    if mismatch(w0)?.ok_or_else(infeasible)? >= 0.0 {
        return Ok(w0);
    }
    if mismatch(w1)?.ok_or_else(infeasible)? <= 0.0 {
        return Ok(w1);
    }
    let (mut lo, mut hi) = (w0, w1);
    let w_tol = 1e-10 * (w1 - w0).abs().max(f64::MIN_POSITIVE);
    for _ in 0..200 {
        if hi - lo <= w_tol || (position(hi) - position(lo) <= tol && hi - lo <= 1e-6 * (w1 - w0)) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match mismatch(mid)? {
            Some(v) if v < 0.0 => lo = mid,
            Some(v) if v > 0.0 => hi = mid,
            Some(_) => return Ok(mid),
            None => return Err(infeasible()),
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All four stage profiles with convergence data.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub profiles: PerStage<StageProfile>,
    pub reports: PerStage<StageReport>,
}

impl Solution {
    pub fn profile(&self, stage: Stage) -> &StageProfile {
        &self.profiles[stage]
    }
}

/// Solves all stages from 50K down to base.
pub fn solve_assembly(assembly: &LinkAssembly, settings: &SolverSettings) -> Result<Solution> {
    settings.validate()?;
    let mut profiles: Vec<StageProfile> = Vec::with_capacity(4);
    let mut reports: Vec<StageReport> = Vec::with_capacity(4);
    for stage in Stage::ALL.into_iter().rev() {
        let hot = match profiles.last() {
            Some(p) => HotSide::Profile(p),
            None => HotSide::Uniform(assembly.vacuum_can.temperature),
        };
        let (profile, report) = solve_with_self_radiation(assembly, stage, hot, settings)?;
        profiles.push(profile);
        reports.push(report);
    }
    profiles.reverse();
    reports.reverse();
    let to_array = |v: Vec<StageProfile>| -> [StageProfile; 4] {
        v.try_into().unwrap_or_else(|_| unreachable!("four stages"))
    };
    Ok(Solution {
        profiles: PerStage(to_array(profiles)),
        reports: PerStage([reports[0], reports[1], reports[2], reports[3]]),
    })
}

/// Solves a stage, iterating on its own temperature when it radiates back.
pub fn solve_with_self_radiation(
    assembly: &LinkAssembly,
    stage: Stage,
    hot: HotSide<'_>,
    settings: &SolverSettings,
) -> Result<(StageProfile, StageReport)> {
    let spec = &assembly.stages[stage];
    let finish = |profile: StageProfile, iterations: usize, residual: f64, sweeps: usize| {
        let report = StageReport {
            stage,
            picard_iterations: iterations,
            picard_residual: residual,
            divide_sweeps: sweeps,
            energy_residual: profile.energy_residual(),
        };
        (profile, report)
    };
    if !spec.include_self {
        let (p, sweeps) = solve_stage(assembly, stage, hot, None, settings)?;
        return Ok(finish(p, 0, 0.0, sweeps));
    }
    let tol = if stage == Stage::FiftyK {
        settings.picard_tol
    } else {
        settings.picard_tol_cold
    };
    let edges = assembly.cell_edges(MAX_CELL);
    let start = spec.t0;
    let mut guess: Vec<(f64, f64)> = edges.iter().map(|_| (start, start)).collect();
    let mut residual = f64::INFINITY;
    for it in 1..=settings.max_picard_iters {
        let (p, sweeps) = solve_stage(assembly, stage, hot, Some(&guess), settings)?;
        let next: Vec<(f64, f64)> = edges
            .iter()
            .map(|&(a, b)| (p.temperature_side(a, true), p.temperature_side(b, false)))
            .collect();
        residual = guess
            .iter()
            .zip(&next)
            .map(|(g, n)| (g.0 - n.0).abs().max((g.1 - n.1).abs()))
            .fold(0.0, f64::max);
        if residual < tol {
            return Ok(finish(p, it, residual, sweeps));
        }
        let w = settings.picard_relaxation;
        for (g, n) in guess.iter_mut().zip(&next) {
            g.0 += w * (n.0 - g.0);
            g.1 += w * (n.1 - g.1);
        }
    }
    Err(Error::NonConvergence(format!(
        "stage {}: self-radiation iteration residual {residual} K after {} iterations",
        stage.index(),
        settings.max_picard_iters
    )))
}
