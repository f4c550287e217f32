//! Operational criteria, length sweeps and maximum-length search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{standard_assembly, CuPlacement, LinkAssembly, ModuleKind, PerStage, Stage};
use crate::profile::StageProfile;
use crate::solver::{solve_assembly, SolverSettings};

/// Highest node 4K plate temperature that still condenses helium, K.
pub const CONDENSATION_LIMIT: f64 = 5.2;
/// Still plate limit, K.
pub const STILL_LIMIT: f64 = 1.2;
/// Base stage limit, K.
pub const BASE_LIMIT: f64 = 0.05;
/// Resolution of the maximum-length search, m.
pub const LENGTH_RESOLUTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Node 4K plates at or below [`CONDENSATION_LIMIT`].
    Condensation,
    /// Node still plates below [`STILL_LIMIT`].
    StillPlate,
    /// Whole base stage below [`BASE_LIMIT`].
    BaseStage,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [
        Criterion::Condensation,
        Criterion::StillPlate,
        Criterion::BaseStage,
    ];

    /// Roman numeral label.
    pub fn label(self) -> &'static str {
        match self {
            Criterion::Condensation => "i",
            Criterion::StillPlate => "ii",
            Criterion::BaseStage => "iii",
        }
    }

    pub fn threshold(self) -> f64 {
        match self {
            Criterion::Condensation => CONDENSATION_LIMIT,
            Criterion::StillPlate => STILL_LIMIT,
            Criterion::BaseStage => BASE_LIMIT,
        }
    }

    fn passes(self, observed: f64) -> bool {
        match self {
            Criterion::Condensation => observed <= self.threshold(),
            _ => observed < self.threshold(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub criterion: Criterion,
    pub name: String,
    pub threshold: f64,
    pub observed_extreme: f64,
    pub location: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriteriaReport {
    pub results: Vec<CriterionResult>,
}

impl CriteriaReport {
    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    pub fn get(&self, c: Criterion) -> &CriterionResult {
        self.results
            .iter()
            .find(|r| r.criterion == c)
            .expect("every criterion is evaluated")
    }

    /// First failing criterion in label order.
    pub fn first_failure(&self) -> Option<Criterion> {
        self.results.iter().find(|r| !r.pass).map(|r| r.criterion)
    }
}

fn node_plate_max(assembly: &LinkAssembly, profile: &StageProfile) -> (f64, f64) {
    profile
        .sinks
        .iter()
        .filter(|s| {
            matches!(
                assembly.modules.get(s.module).map(|m| &m.kind),
                Some(ModuleKind::Node(_))
            )
        })
        .fold((f64::NAN, f64::NAN), |acc, s| {
            if acc.0.is_nan() || s.t_plate > acc.0 {
                (s.t_plate, s.position)
            } else {
                acc
            }
        })
}

/// Evaluates the three operating criteria on a full solve.
pub fn check_criteria(
    assembly: &LinkAssembly,
    profiles: &PerStage<StageProfile>,
) -> CriteriaReport {
    let results = Criterion::ALL
        .into_iter()
        .map(|c| {
            let (observed, location) = match c {
                Criterion::Condensation => node_plate_max(assembly, &profiles[Stage::FourK]),
                Criterion::StillPlate => node_plate_max(assembly, &profiles[Stage::Still]),
                Criterion::BaseStage => profiles[Stage::Base].max(),
            };
            CriterionResult {
                criterion: c,
                name: match c {
                    Criterion::Condensation => "node 4K plate",
                    Criterion::StillPlate => "node still plate",
                    Criterion::BaseStage => "base stage",
                }
                .to_string(),
                threshold: c.threshold(),
                observed_extreme: observed,
                location,
                pass: c.passes(observed),
            }
        })
        .collect();
    CriteriaReport { results }
}

/// Lowest and highest temperature of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageExtremes {
    pub stage: Stage,
    pub t_c: f64,
    pub t_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub extremes: Vec<StageExtremes>,
    pub criteria: CriteriaReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub length: f64,
    /// Solved extremes, or the solver error message.
    pub outcome: std::result::Result<SweepEntry, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSweepResult {
    pub rows: Vec<SweepRow>,
    /// Shortest length at which some criterion fails, with that criterion.
    pub first_violation: Option<(f64, Criterion)>,
}

impl LengthSweepResult {
    /// Shortest length at which `c` fails.
    pub fn first_violation_of(&self, c: Criterion) -> Option<f64> {
        self.rows.iter().find_map(|r| match &r.outcome {
            Ok(e) if !e.criteria.get(c).pass => Some(r.length),
            _ => None,
        })
    }
}

/// Solves a standard assembly of `length` and summarizes it.
pub fn evaluate_length(
    length: f64,
    cu: CuPlacement,
    settings: &SolverSettings,
) -> Result<SweepEntry> {
    let assembly = standard_assembly(length, cu)?;
    let solution = solve_assembly(&assembly, settings)?;
    let extremes = Stage::ALL
        .into_iter()
        .map(|s| {
            let p = &solution.profiles[s];
            StageExtremes {
                stage: s,
                t_c: p.min().0,
                t_h: p.max().0,
            }
        })
        .collect();
    Ok(SweepEntry {
        extremes,
        criteria: check_criteria(&assembly, &solution.profiles),
    })
}

/// Solves standard assemblies at each length. Lengths are solved in
/// parallel on the current rayon pool and reported in increasing order.
pub fn sweep_lengths(
    lengths: &[f64],
    cu: CuPlacement,
    settings: &SolverSettings,
) -> Result<LengthSweepResult> {
    if lengths.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::validation(
            "lengths",
            "lengths must be strictly increasing",
        ));
    }
    let rows: Vec<SweepRow> = lengths
        .par_iter()
        .map(|&length| SweepRow {
            length,
            outcome: evaluate_length(length, cu, settings).map_err(|e| e.to_string()),
        })
        .collect();
    let first_violation = rows.iter().find_map(|r| match &r.outcome {
        Ok(e) => e.criteria.first_failure().map(|c| (r.length, c)),
        Err(_) => None,
    });
    Ok(LengthSweepResult {
        rows,
        first_violation,
    })
}

fn passes_at(length: f64, cu: CuPlacement, settings: &SolverSettings) -> Result<bool> {
    match evaluate_length(length, cu, settings) {
        Ok(e) => Ok(e.criteria.all_pass()),
        // a sink that cannot absorb its load is as much a failure as a hot plate
        Err(Error::Infeasible { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Largest length on the [`LENGTH_RESOLUTION`] grid inside `bracket` that
/// passes every criterion, found by bisection.
pub fn max_feasible_length(
    cu: CuPlacement,
    bracket: (f64, f64),
    settings: &SolverSettings,
) -> Result<f64> {
    let mut lo = (bracket.0 / LENGTH_RESOLUTION).ceil() as i64;
    let mut hi = (bracket.1 / LENGTH_RESOLUTION).floor() as i64;
    let at = |k: i64| k as f64 * LENGTH_RESOLUTION;
    if hi <= lo {
        return Err(Error::validation(
            "bracket",
            format!("empty bracket {:?}", bracket),
        ));
    }
    if !passes_at(at(lo), cu, settings)? {
        return Err(Error::validation(
            "bracket",
            format!("criteria already fail at the lower end {} m", at(lo)),
        ));
    }
    if passes_at(at(hi), cu, settings)? {
        return Err(Error::validation(
            "bracket",
            format!("criteria still pass at the upper end {} m", at(hi)),
        ));
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes_at(at(mid), cu, settings)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at(lo))
}

/// Insertion loss of a line of `length` metres at `alpha` dB/km.
pub fn channel_loss(length: f64, alpha: f64) -> Result<f64> {
    if !(length >= 0.0 && alpha >= 0.0) || !length.is_finite() || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "length and attenuation must be non-negative, got {length} m and {alpha} dB/km"
        )));
    }
    Ok(length * 1e-3 * alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{PointKind, ProfilePoint, SinkRecord};

    fn profile(stage: Stage, t: f64, sink_t: f64) -> StageProfile {
        let mut p = StageProfile::flat(stage, 0.0, 5.0, t);
        p.sinks = vec![SinkRecord {
            position: 0.0,
            module: 0,
            q_extracted: 0.0,
            q_from_left: 0.0,
            q_from_right: 0.0,
            t_plate: sink_t,
        }];
        p
    }

    fn fixture(base_peak: f64, plate_4k: f64) -> (LinkAssembly, PerStage<StageProfile>) {
        let a = standard_assembly(5.0, CuPlacement::None).unwrap();
        let mut ps = PerStage::from_fn(|s| profile(s, 0.01, 0.01));
        ps[Stage::FourK] = profile(Stage::FourK, 4.0, plate_4k);
        ps[Stage::Still] = profile(Stage::Still, 1.0, 1.0);
        ps[Stage::Base].points.push(ProfilePoint {
            x: 2.0,
            t: base_peak,
            q: 0.0,
            kind: PointKind::Interior,
        });
        ps[Stage::Base].points.sort_by(|a, b| a.x.total_cmp(&b.x));
        (a, ps)
    }

    #[test]
    fn base_violation_reports_location() {
        let (a, ps) = fixture(0.06, 4.0);
        let r = check_criteria(&a, &ps);
        let base = r.get(Criterion::BaseStage);
        assert!(!base.pass);
        assert_eq!(base.location, 2.0);
        assert_eq!(r.first_failure(), Some(Criterion::BaseStage));
    }

    #[test]
    fn condensation_limit_is_inclusive() {
        let (a, ps) = fixture(0.02, 5.2);
        let r = check_criteria(&a, &ps);
        assert!(r.get(Criterion::Condensation).pass);
        let (a, ps) = fixture(0.02, 5.2 + 1e-9);
        assert!(!check_criteria(&a, &ps).get(Criterion::Condensation).pass);
    }

    #[test]
    fn loss_scales_linearly() {
        assert!((channel_loss(30.0, 1.0).unwrap() - 0.03).abs() < 1e-15);
        assert_eq!(channel_loss(0.0, 1.0).unwrap(), 0.0);
        assert!((channel_loss(120.0, 1.0).unwrap() - 0.12).abs() < 1e-15);
        assert!(channel_loss(-1.0, 1.0).is_err());
    }

    #[test]
    fn sweep_rejects_unsorted_lengths() {
        assert!(
            sweep_lengths(&[10.0, 5.0], CuPlacement::None, &SolverSettings::default()).is_err()
        );
    }
}
