//! Link assembly data model: stages, modules, interfaces and sinks.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::loads::PostLoadCurve;
use crate::materials::{ConductivityModel, CoolingCurve, ResistanceCurve};

/// Positions closer than this are treated as coincident.
pub const POSITION_TOL: f64 = 1e-9;

/// One of the four cooled temperature stages, coldest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "base")]
    Base,
    #[serde(rename = "still")]
    Still,
    #[serde(rename = "4k")]
    FourK,
    #[serde(rename = "50k")]
    FiftyK,
}

impl Stage {
    pub const ALL: [Stage; 4] = [Stage::Base, Stage::Still, Stage::FourK, Stage::FiftyK];

    /// Stage number, 1 for base through 4 for the 50K stage.
    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(n: usize) -> Option<Stage> {
        Stage::ALL.get(n.checked_sub(1)?).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Stage::Base => "base",
            Stage::Still => "still",
            Stage::FourK => "4k",
            Stage::FiftyK => "50k",
        }
    }

    pub fn from_name(s: &str) -> Option<Stage> {
        Stage::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
    }

    /// The enclosing stage, `None` for the 50K stage (enclosed by the vacuum can).
    pub fn hotter(self) -> Option<Stage> {
        Stage::from_index(self.index() + 1)
    }

    /// Whether cooling units extract heat on this stage.
    pub fn cooled_by_units(self) -> bool {
        matches!(self, Stage::FourK | Stage::FiftyK)
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One value per stage, indexed by [`Stage`].
#[derive(Debug, Clone, PartialEq)]
pub struct PerStage<T>(pub [T; 4]);

impl<T> PerStage<T> {
    pub fn from_fn(mut f: impl FnMut(Stage) -> T) -> Self {
        PerStage(Stage::ALL.map(&mut f))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Stage, &T)> {
        Stage::ALL.into_iter().zip(self.0.iter())
    }

    pub fn try_map<U>(&self, mut f: impl FnMut(Stage, &T) -> Result<U>) -> Result<PerStage<U>> {
        let [a, b, c, d] = &self.0;
        Ok(PerStage([
            f(Stage::Base, a)?,
            f(Stage::Still, b)?,
            f(Stage::FourK, c)?,
            f(Stage::FiftyK, d)?,
        ]))
    }
}

impl<T> Index<Stage> for PerStage<T> {
    type Output = T;
    fn index(&self, s: Stage) -> &T {
        &self.0[s as usize]
    }
}

impl<T> IndexMut<Stage> for PerStage<T> {
    fn index_mut(&mut self, s: Stage) -> &mut T {
        &mut self.0[s as usize]
    }
}

/// Radiation shield of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StageSpec {
    pub stage: Stage,
    /// Reference temperature used by the normalized Table curves, K.
    pub t0: f64,
    /// Shield cross-section, m^2.
    pub area: f64,
    /// Shield circumference, m.
    pub circumference: f64,
    pub emissivity: f64,
    pub material: ConductivityModel,
    /// Replaces the computed attenuation when set.
    pub attenuation_override: Option<f64>,
    /// Additive radiative flux for leak studies, W/m^2.
    pub extra_flux: f64,
    /// Subtract the stage's own emission from the incident radiation.
    pub include_self: bool,
    /// Load of a single support post from the enclosing stage.
    pub post_load: PostLoadCurve,
}

impl StageSpec {
    fn validate(&self, path: &str) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::validation(format!("{path}.{field}"), msg));
        if !(self.t0 > 0.0) {
            return bad("t0", format!("must be positive, got {}", self.t0));
        }
        if !(self.area > 0.0) {
            return bad("area", format!("must be positive, got {}", self.area));
        }
        if !(self.circumference > 0.0) {
            return bad(
                "circumference",
                format!("must be positive, got {}", self.circumference),
            );
        }
        if !(self.emissivity > 0.0 && self.emissivity <= 1.0) {
            return bad(
                "emissivity",
                format!("must lie in (0, 1], got {}", self.emissivity),
            );
        }
        if let Some(l) = self.attenuation_override {
            if !(0.0..=0.5).contains(&l) {
                return bad("attenuation", format!("must lie in [0, 0.5], got {l}"));
            }
        }
        if !(self.extra_flux >= 0.0 && self.extra_flux.is_finite()) {
            return bad(
                "extra_flux",
                format!("must be non-negative, got {}", self.extra_flux),
            );
        }
        self.material
            .validate()
            .map_err(|e| Error::validation(format!("{path}.material"), e.to_string()))?;
        self.post_load
            .validate()
            .map_err(|e| Error::validation(format!("{path}.post_load"), e.to_string()))?;
        Ok(())
    }
}

/// The room-temperature vacuum can enclosing the 50K stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumCan {
    pub temperature: f64,
    pub circumference: f64,
    pub emissivity: f64,
}

/// A dilution-refrigerator node: a heat sink on every stage.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    pub cooling: PerStage<CoolingCurve>,
    pub internal_resistance: PerStage<ResistanceCurve>,
    /// Parasitic load on each plate independent of the link, W.
    pub plate_load: PerStage<f64>,
}

/// Intermediate cooling unit: a sink on the 4K and 50K stages, a pass-through
/// resistance on the still and base stages.
#[derive(Debug, Clone, PartialEq)]
pub struct CoolingUnitSpec {
    pub cooling_4k: CoolingCurve,
    pub cooling_50k: CoolingCurve,
    pub pass_resistance: PerStage<ResistanceCurve>,
}

impl CoolingUnitSpec {
    pub fn cooling(&self, stage: Stage) -> Option<&CoolingCurve> {
        match stage {
            Stage::FourK => Some(&self.cooling_4k),
            Stage::FiftyK => Some(&self.cooling_50k),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModuleKind {
    Node(NodeSpec),
    Adapter {
        length: f64,
    },
    Link {
        length: f64,
        /// Offsets of the post sets from the module's left edge, m.
        post_positions: Vec<f64>,
        posts_per_set: u32,
    },
    Braid {
        resistance: PerStage<ResistanceCurve>,
    },
    CoolingUnit(CoolingUnitSpec),
}

impl ModuleKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModuleKind::Node(_) => "node",
            ModuleKind::Adapter { .. } => "adapter",
            ModuleKind::Link { .. } => "link",
            ModuleKind::Braid { .. } => "braid",
            ModuleKind::CoolingUnit(_) => "cooling_unit",
        }
    }

    pub fn length(&self) -> f64 {
        match self {
            ModuleKind::Adapter { length } | ModuleKind::Link { length, .. } => *length,
            _ => 0.0,
        }
    }

    /// Adapters and links carry a distributed shield.
    pub fn is_shield(&self) -> bool {
        matches!(self, ModuleKind::Adapter { .. } | ModuleKind::Link { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleSpec {
    pub kind: ModuleKind,
    /// Left edge along the link axis, m.
    pub position: f64,
}

impl ModuleSpec {
    pub fn end(&self) -> f64 {
        self.position + self.kind.length()
    }
}

/// A heater attached to a stage, used by characterization runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Heater {
    pub stage: Stage,
    pub position: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterfaceKind {
    NodeInternal,
    Braid,
    CoolingUnitPass,
    CoolingUnitSink,
}

/// A lumped thermal resistance at a point of a stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Interface<'a> {
    pub position: f64,
    pub resistance: &'a ResistanceCurve,
    pub kind: InterfaceKind,
    pub module: usize,
}

/// A heat sink on one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Sink<'a> {
    pub position: f64,
    pub module: usize,
    pub cooling: &'a CoolingCurve,
    /// Resistance between the sink plate and the shield.
    pub resistance: &'a ResistanceCurve,
    pub plate_load: f64,
}

/// Count of each module kind.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleCounts {
    pub nodes: usize,
    pub adapters: usize,
    pub braids: usize,
    pub links: usize,
    pub cooling_units: usize,
}

/// A validated link assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkAssembly {
    pub stages: PerStage<StageSpec>,
    pub modules: Vec<ModuleSpec>,
    pub vacuum_can: VacuumCan,
    pub heaters: Vec<Heater>,
}

impl LinkAssembly {
    /// Builds and validates an assembly.
    pub fn new(
        stages: PerStage<StageSpec>,
        modules: Vec<ModuleSpec>,
        vacuum_can: VacuumCan,
        heaters: Vec<Heater>,
    ) -> Result<Self> {
        let a = LinkAssembly {
            stages,
            modules,
            vacuum_can,
            heaters,
        };
        a.validate()?;
        Ok(a)
    }

    /// Lays modules end to end starting at zero.
    pub fn stacked(
        stages: PerStage<StageSpec>,
        kinds: Vec<ModuleKind>,
        vacuum_can: VacuumCan,
        heaters: Vec<Heater>,
    ) -> Result<Self> {
        let mut x = 0.0;
        let modules = kinds
            .into_iter()
            .map(|kind| {
                let m = ModuleSpec { position: x, kind };
                x = m.end();
                m
            })
            .collect();
        Self::new(stages, modules, vacuum_can, heaters)
    }

    pub fn validate(&self) -> Result<()> {
        for (s, spec) in self.stages.iter() {
            let path = format!("stages.{}", s.name());
            if spec.stage != s {
                return Err(Error::validation(
                    path,
                    "stage label does not match its slot",
                ));
            }
            spec.validate(&path)?;
        }
        for pair in Stage::ALL.windows(2) {
            let (lo, hi) = (&self.stages[pair[0]], &self.stages[pair[1]]);
            if !(hi.circumference > lo.circumference) {
                return Err(Error::validation(
                    format!("stages.{}.circumference", pair[1].name()),
                    "circumference must increase from base to 50K",
                ));
            }
            if !(hi.area > lo.area) {
                return Err(Error::validation(
                    format!("stages.{}.area", pair[1].name()),
                    "cross-section must increase from base to 50K",
                ));
            }
        }
        let vc = &self.vacuum_can;
        if !(vc.temperature > 0.0) {
            return Err(Error::validation(
                "vacuum_can.temperature",
                "must be positive",
            ));
        }
        if !(vc.emissivity > 0.0 && vc.emissivity <= 1.0) {
            return Err(Error::validation(
                "vacuum_can.emissivity",
                format!("must lie in (0, 1], got {}", vc.emissivity),
            ));
        }
        if !(vc.circumference > self.stages[Stage::FiftyK].circumference) {
            return Err(Error::validation(
                "vacuum_can.circumference",
                "must exceed the 50K shield circumference",
            ));
        }
        self.validate_modules()?;
        self.validate_heaters()
    }

    fn validate_modules(&self) -> Result<()> {
        let ms = &self.modules;
        if ms.is_empty() {
            return Err(Error::validation("modules", "assembly has no modules"));
        }
        for (i, m) in ms.iter().enumerate() {
            let path = format!("modules[{i}]");
            if !m.position.is_finite() {
                return Err(Error::validation(
                    format!("{path}.position"),
                    "not a finite number",
                ));
            }
            match &m.kind {
                ModuleKind::Adapter { length } if !(*length > 0.0) => {
                    return Err(Error::validation(
                        format!("{path}.length"),
                        "must be positive",
                    ));
                }
                ModuleKind::Link {
                    length,
                    post_positions,
                    ..
                } => {
                    if !(*length > 0.0) {
                        return Err(Error::validation(
                            format!("{path}.length"),
                            "must be positive",
                        ));
                    }
                    for (j, p) in post_positions.iter().enumerate() {
                        if !(*p > 0.0 && *p < *length) {
                            return Err(Error::validation(
                                format!("{path}.post_positions[{j}]"),
                                format!(
                                    "post offset {p} m lies outside the module (0, {length}) m"
                                ),
                            ));
                        }
                    }
                    if post_positions.windows(2).any(|w| w[1] <= w[0]) {
                        return Err(Error::validation(
                            format!("{path}.post_positions"),
                            "post offsets must be strictly increasing",
                        ));
                    }
                }
                ModuleKind::Node(n) => {
                    for (s, c) in n.cooling.iter() {
                        c.validate().map_err(|e| {
                            Error::validation(format!("{path}.cooling.{s}"), e.to_string())
                        })?;
                    }
                    for (s, r) in n.internal_resistance.iter() {
                        r.validate().map_err(|e| {
                            Error::validation(
                                format!("{path}.internal_resistance.{s}"),
                                e.to_string(),
                            )
                        })?;
                    }
                    for (s, p) in n.plate_load.iter() {
                        if !(*p >= 0.0 && p.is_finite()) {
                            return Err(Error::validation(
                                format!("{path}.plate_load.{s}"),
                                "must be non-negative",
                            ));
                        }
                    }
                }
                ModuleKind::Braid { resistance } => {
                    for (s, r) in resistance.iter() {
                        r.validate().map_err(|e| {
                            Error::validation(format!("{path}.resistance.{s}"), e.to_string())
                        })?;
                    }
                }
                ModuleKind::CoolingUnit(cu) => {
                    for (name, c) in [("4k", &cu.cooling_4k), ("50k", &cu.cooling_50k)] {
                        c.validate().map_err(|e| {
                            Error::validation(format!("{path}.cooling.{name}"), e.to_string())
                        })?;
                    }
                    for (s, r) in cu.pass_resistance.iter() {
                        r.validate().map_err(|e| {
                            Error::validation(format!("{path}.pass_resistance.{s}"), e.to_string())
                        })?;
                    }
                }
                _ => {}
            }
        }

        for (i, w) in ms.windows(2).enumerate() {
            let (a, b) = (&w[0], &w[1]);
            let gap = b.position - a.end();
            if gap < -POSITION_TOL {
                return Err(Error::validation(
                    format!("modules[{}].position", i + 1),
                    format!(
                        "module {} ({}) overlaps module {} ({}) by {} m",
                        i + 1,
                        b.kind.name(),
                        i,
                        a.kind.name(),
                        -gap
                    ),
                ));
            }
            if gap > POSITION_TOL {
                return Err(Error::validation(
                    format!("modules[{}].position", i + 1),
                    format!("gap of {gap} m between module {i} and module {}", i + 1),
                ));
            }
            let (sa, sb) = (a.kind.is_shield(), b.kind.is_shield());
            let a_braid = matches!(a.kind, ModuleKind::Braid { .. });
            let b_braid = matches!(b.kind, ModuleKind::Braid { .. });
            if sa && sb {
                return Err(Error::validation(
                    format!("modules[{}]", i + 1),
                    format!(
                        "{} at module {i} and {} at module {} are not bridged by a braid",
                        a.kind.name(),
                        b.kind.name(),
                        i + 1
                    ),
                ));
            }
            if (a_braid && !sb) || (b_braid && !sa) {
                let j = if a_braid { i } else { i + 1 };
                return Err(Error::validation(
                    format!("modules[{j}]"),
                    "a braid must sit between two adapter or link modules",
                ));
            }
        }
        for (j, m) in [(0, &ms[0]), (ms.len() - 1, &ms[ms.len() - 1])] {
            if matches!(m.kind, ModuleKind::Braid { .. }) {
                return Err(Error::validation(
                    format!("modules[{j}]"),
                    "an assembly cannot end in a braid",
                ));
            }
        }
        if !ms.iter().any(|m| matches!(m.kind, ModuleKind::Node(_))) {
            return Err(Error::validation(
                "modules",
                "assembly needs at least one node",
            ));
        }
        Ok(())
    }

    fn validate_heaters(&self) -> Result<()> {
        let (x0, x1) = (self.start(), self.end());
        for (i, h) in self.heaters.iter().enumerate() {
            let path = format!("heaters[{i}]");
            if !(h.power >= 0.0 && h.power.is_finite()) {
                return Err(Error::validation(
                    format!("{path}.power"),
                    "must be non-negative",
                ));
            }
            if !(h.position >= x0 - POSITION_TOL && h.position <= x1 + POSITION_TOL) {
                return Err(Error::validation(
                    format!("{path}.position"),
                    "heater lies outside the assembly",
                ));
            }
            if self
                .sinks(h.stage)
                .iter()
                .any(|s| (s.position - h.position).abs() <= POSITION_TOL)
            {
                return Err(Error::validation(
                    format!("{path}.position"),
                    "heater cannot sit on a sink plate",
                ));
            }
        }
        Ok(())
    }

    pub fn start(&self) -> f64 {
        self.modules[0].position
    }

    pub fn end(&self) -> f64 {
        self.modules[self.modules.len() - 1].end()
    }

    /// Span from the first to the last module edge, m.
    pub fn total_length(&self) -> f64 {
        self.end() - self.start()
    }

    pub fn counts(&self) -> ModuleCounts {
        let mut c = ModuleCounts::default();
        for m in &self.modules {
            match m.kind {
                ModuleKind::Node(_) => c.nodes += 1,
                ModuleKind::Adapter { .. } => c.adapters += 1,
                ModuleKind::Link { .. } => c.links += 1,
                ModuleKind::Braid { .. } => c.braids += 1,
                ModuleKind::CoolingUnit(_) => c.cooling_units += 1,
            }
        }
        c
    }

    /// All lumped resistances of `stage`, sorted by position.
    pub fn interfaces(&self, stage: Stage) -> Vec<Interface<'_>> {
        let mut out: Vec<Interface<'_>> = self
            .modules
            .iter()
            .enumerate()
            .filter_map(|(i, m)| {
                let (resistance, kind) = match &m.kind {
                    ModuleKind::Node(n) => {
                        (&n.internal_resistance[stage], InterfaceKind::NodeInternal)
                    }
                    ModuleKind::Braid { resistance } => (&resistance[stage], InterfaceKind::Braid),
                    ModuleKind::CoolingUnit(cu) => (
                        &cu.pass_resistance[stage],
                        if stage.cooled_by_units() {
                            InterfaceKind::CoolingUnitSink
                        } else {
                            InterfaceKind::CoolingUnitPass
                        },
                    ),
                    _ => return None,
                };
                Some(Interface {
                    position: m.position,
                    resistance,
                    kind,
                    module: i,
                })
            })
            .collect();
        out.sort_by(|a, b| a.position.total_cmp(&b.position));
        out
    }

    /// Heat sinks of `stage`, sorted by position.
    pub fn sinks(&self, stage: Stage) -> Vec<Sink<'_>> {
        self.modules
            .iter()
            .enumerate()
            .filter_map(|(i, m)| match &m.kind {
                ModuleKind::Node(n) => Some(Sink {
                    position: m.position,
                    module: i,
                    cooling: &n.cooling[stage],
                    resistance: &n.internal_resistance[stage],
                    plate_load: n.plate_load[stage],
                }),
                ModuleKind::CoolingUnit(cu) => cu.cooling(stage).map(|c| Sink {
                    position: m.position,
                    module: i,
                    cooling: c,
                    resistance: &cu.pass_resistance[stage],
                    plate_load: 0.0,
                }),
                _ => None,
            })
            .collect()
    }

    /// Pass-through interfaces of `stage` (everything that is not a sink).
    pub fn pass_interfaces(&self, stage: Stage) -> Vec<Interface<'_>> {
        self.interfaces(stage)
            .into_iter()
            .filter(|i| {
                matches!(
                    i.kind,
                    InterfaceKind::Braid | InterfaceKind::CoolingUnitPass
                )
            })
            .collect()
    }

    /// Shield extents `(x0, x1)` of adapters and links.
    pub fn shield_segments(&self) -> Vec<(f64, f64)> {
        self.modules
            .iter()
            .filter(|m| m.kind.is_shield())
            .map(|m| (m.position, m.end()))
            .collect()
    }

    /// Post sets as `(x, posts)`, sorted by position.
    pub fn post_sets(&self) -> Vec<(f64, u32)> {
        self.modules
            .iter()
            .filter_map(|m| match &m.kind {
                ModuleKind::Link {
                    post_positions,
                    posts_per_set,
                    ..
                } if *posts_per_set > 0 => Some(
                    post_positions
                        .iter()
                        .map(move |p| (m.position + p, *posts_per_set)),
                ),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Cell boundaries over the shield segments, at most `max_cell` wide and
    /// split at every post and heater.
    pub fn cell_edges(&self, max_cell: f64) -> Vec<(f64, f64)> {
        let mut breaks: Vec<f64> = self.post_sets().iter().map(|p| p.0).collect();
        breaks.extend(self.heaters.iter().map(|h| h.position));
        breaks.sort_by(f64::total_cmp);
        let mut out = Vec::new();
        for (a, b) in self.shield_segments() {
            let mut knots = vec![a];
            knots.extend(
                breaks
                    .iter()
                    .copied()
                    .filter(|&x| x > a + POSITION_TOL && x < b - POSITION_TOL),
            );
            knots.push(b);
            for w in knots.windows(2) {
                let n = ((w[1] - w[0]) / max_cell).ceil().max(1.0) as usize;
                let h = (w[1] - w[0]) / n as f64;
                for k in 0..n {
                    let x0 = w[0] + h * k as f64;
                    let x1 = if k + 1 == n {
                        w[1]
                    } else {
                        w[0] + h * (k + 1) as f64
                    };
                    out.push((x0, x1));
                }
            }
        }
        out
    }
}

/// Where to place intermediate cooling units in a standard assembly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CuPlacement {
    None,
    /// One unit every `spacing` metres while at least one minimum bay remains.
    Spacing(f64),
    /// A single unit at the middle of the link.
    Central,
}

/// Smallest sink-to-sink span: two adapters plus one full link module.
pub fn minimum_bay() -> f64 {
    2.0 * defaults::ADAPTER_LENGTH + defaults::LINK_LENGTH
}

/// Builds a link of `length` metres from Table defaults.
pub fn standard_assembly(length: f64, cu: CuPlacement) -> Result<LinkAssembly> {
    let min = minimum_bay();
    if !(length >= min - POSITION_TOL) {
        return Err(Error::validation(
            "length",
            format!("a standard link needs at least {min} m, got {length} m"),
        ));
    }
    let mut sinks = vec![0.0];
    match cu {
        CuPlacement::None => {}
        CuPlacement::Central => {
            if length / 2.0 < min - POSITION_TOL {
                return Err(Error::validation(
                    "cu_spacing",
                    format!("a central cooling unit needs at least {} m", 2.0 * min),
                ));
            }
            sinks.push(length / 2.0);
        }
        CuPlacement::Spacing(s) => {
            if !(s >= min - POSITION_TOL) {
                return Err(Error::validation(
                    "cu_spacing",
                    format!("cooling unit spacing must be at least {min} m, got {s} m"),
                ));
            }
            let mut k = 1.0;
            while length - k * s >= min - POSITION_TOL {
                sinks.push(k * s);
                k += 1.0;
            }
        }
    }
    sinks.push(length);

    let mut kinds = vec![ModuleKind::Node(defaults::node())];
    for (b, w) in sinks.windows(2).enumerate() {
        if b > 0 {
            kinds.push(ModuleKind::CoolingUnit(defaults::cooling_unit()));
        }
        let bay = w[1] - w[0];
        let fill = bay - 2.0 * defaults::ADAPTER_LENGTH;
        let full = (fill / defaults::LINK_LENGTH - 1e-9).ceil().max(1.0) as usize;
        kinds.push(ModuleKind::Adapter {
            length: defaults::ADAPTER_LENGTH,
        });
        for k in 0..full {
            let len = if k + 1 == full {
                fill - defaults::LINK_LENGTH * (full - 1) as f64
            } else {
                defaults::LINK_LENGTH
            };
            kinds.push(ModuleKind::Braid {
                resistance: defaults::braid_resistance(),
            });
            kinds.push(defaults::link(len));
        }
        kinds.push(ModuleKind::Braid {
            resistance: defaults::braid_resistance(),
        });
        kinds.push(ModuleKind::Adapter {
            length: defaults::ADAPTER_LENGTH,
        });
    }
    kinds.push(ModuleKind::Node(defaults::node()));
    LinkAssembly::stacked(
        defaults::stages(),
        kinds,
        defaults::vacuum_can(),
        Vec::new(),
    )
}

/// Characterization prototype: one node, an adapter and a single link
/// module whose far end is capped.
pub fn prototype_assembly() -> Result<LinkAssembly> {
    let kinds = vec![
        ModuleKind::Node(defaults::node()),
        ModuleKind::Adapter {
            length: defaults::ADAPTER_LENGTH,
        },
        ModuleKind::Braid {
            resistance: defaults::braid_resistance(),
        },
        defaults::link(defaults::LINK_LENGTH),
    ];
    LinkAssembly::stacked(
        defaults::stages(),
        kinds,
        defaults::vacuum_can(),
        Vec::new(),
    )
}
