//! Piecewise temperature and heat-flow profiles of a solved stage.

use serde::{Deserialize, Serialize};

use crate::geometry::Stage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Interior,
    /// Value on the low-x side of an interface.
    JumpMinus,
    /// Value on the high-x side of an interface.
    JumpPlus,
    /// Sink plate temperature.
    Sink,
}

impl PointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PointKind::Interior => "interior",
            PointKind::JumpMinus => "jump_minus",
            PointKind::JumpPlus => "jump_plus",
            PointKind::Sink => "sink",
        }
    }
}

/// One sample of a stage profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub x: f64,
    pub t: f64,
    /// Heat flow in W, positive towards larger `x`.
    pub q: f64,
    pub kind: PointKind,
}

/// Heat extracted at one sink.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinkRecord {
    pub position: f64,
    pub module: usize,
    /// Total heat absorbed by the plate, including its parasitic load, W.
    pub q_extracted: f64,
    /// Heat arriving through the shield from the low-x and high-x sides, W.
    pub q_from_left: f64,
    pub q_from_right: f64,
    pub t_plate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageProfile {
    pub stage: Stage,
    /// Samples ordered by position; points sharing a position are ordered
    /// from the low-x side to the high-x side.
    pub points: Vec<ProfilePoint>,
    pub sinks: Vec<SinkRecord>,
    /// Positions where the heat flow vanishes.
    pub divides: Vec<f64>,
    /// Total load received by the stage, W.
    pub total_load: f64,
}

impl StageProfile {
    /// Uniform profile used for boundary stages and tests.
    pub fn flat(stage: Stage, x0: f64, x1: f64, t: f64) -> Self {
        StageProfile {
            stage,
            points: vec![
                ProfilePoint {
                    x: x0,
                    t,
                    q: 0.0,
                    kind: PointKind::Interior,
                },
                ProfilePoint {
                    x: x1,
                    t,
                    q: 0.0,
                    kind: PointKind::Interior,
                },
            ],
            sinks: Vec::new(),
            divides: Vec::new(),
            total_load: 0.0,
        }
    }

    /// Temperature just right (`right = true`) or left of `x`, interpolating
    /// linearly between samples and clamping outside the sampled range.
    pub fn temperature_side(&self, x: f64, right: bool) -> f64 {
        let p = &self.points;
        if p.is_empty() {
            return f64::NAN;
        }
        let lo = p.partition_point(|q| q.x < x);
        let hi = p.partition_point(|q| q.x <= x);
        if hi > lo {
            // samples exist exactly at x; pick the requested side but skip the
            // sink plate, which is not part of the shield
            let run = &p[lo..hi];
            let shield: Vec<&ProfilePoint> =
                run.iter().filter(|q| q.kind != PointKind::Sink).collect();
            let pick = if shield.is_empty() {
                run[0]
            } else if right {
                *shield[shield.len() - 1]
            } else {
                *shield[0]
            };
            return pick.t;
        }
        if lo == 0 {
            return p[0].t;
        }
        if lo == p.len() {
            return p[p.len() - 1].t;
        }
        let (a, b) = (&p[lo - 1], &p[lo]);
        let s = (x - a.x) / (b.x - a.x);
        a.t + s * (b.t - a.t)
    }

    pub fn temperature(&self, x: f64) -> f64 {
        0.5 * (self.temperature_side(x, false) + self.temperature_side(x, true))
    }

    /// Highest temperature and its position.
    pub fn max(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::NEG_INFINITY, f64::NAN), |acc, p| {
                if p.t > acc.0 {
                    (p.t, p.x)
                } else {
                    acc
                }
            })
    }

    /// Lowest temperature and its position.
    pub fn min(&self) -> (f64, f64) {
        self.points
            .iter()
            .fold((f64::INFINITY, f64::NAN), |acc, p| {
                if p.t < acc.0 {
                    (p.t, p.x)
                } else {
                    acc
                }
            })
    }

    pub fn extracted_total(&self) -> f64 {
        self.sinks
            .iter()
            .map(|s| s.q_from_left + s.q_from_right)
            .sum()
    }

    /// Relative mismatch between absorbed and received heat.
    pub fn energy_residual(&self) -> f64 {
        let scale = self.total_load.abs().max(f64::MIN_POSITIVE);
        (self.extracted_total() - self.total_load).abs() / scale
    }

    /// Mirror image about the midpoint of `[x0, x1]`.
    pub fn mirrored(&self, x0: f64, x1: f64) -> Self {
        let flip = |x: f64| x0 + x1 - x;
        let mut points: Vec<ProfilePoint> = self
            .points
            .iter()
            .rev()
            .map(|p| ProfilePoint {
                x: flip(p.x),
                t: p.t,
                q: -p.q,
                kind: match p.kind {
                    PointKind::JumpMinus => PointKind::JumpPlus,
                    PointKind::JumpPlus => PointKind::JumpMinus,
                    k => k,
                },
            })
            .collect();
        points.sort_by(|a, b| a.x.total_cmp(&b.x));
        let mut sinks: Vec<SinkRecord> = self
            .sinks
            .iter()
            .rev()
            .map(|s| SinkRecord {
                position: flip(s.position),
                q_from_left: s.q_from_right,
                q_from_right: s.q_from_left,
                ..*s
            })
            .collect();
        sinks.sort_by(|a, b| a.position.total_cmp(&b.position));
        let mut divides: Vec<f64> = self.divides.iter().map(|&d| flip(d)).collect();
        divides.sort_by(f64::total_cmp);
        StageProfile {
            stage: self.stage,
            points,
            sinks,
            divides,
            total_load: self.total_load,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, t: f64, kind: PointKind) -> ProfilePoint {
        ProfilePoint { x, t, q: 0.0, kind }
    }

    #[test]
    fn sides_at_a_jump() {
        let p = StageProfile {
            stage: Stage::Base,
            points: vec![
                pt(0.0, 1.0, PointKind::Sink),
                pt(0.0, 2.0, PointKind::JumpPlus),
                pt(1.0, 3.0, PointKind::JumpMinus),
                pt(1.0, 4.0, PointKind::JumpPlus),
                pt(2.0, 6.0, PointKind::Interior),
            ],
            sinks: vec![],
            divides: vec![],
            total_load: 0.0,
        };
        assert_eq!(p.temperature_side(1.0, false), 3.0);
        assert_eq!(p.temperature_side(1.0, true), 4.0);
        assert_eq!(p.temperature_side(0.0, true), 2.0);
        assert_eq!(p.temperature_side(0.5, true), 2.5);
        assert_eq!(p.temperature_side(1.5, true), 5.0);
        assert_eq!(p.temperature_side(9.0, true), 6.0);
        assert_eq!(p.max(), (6.0, 2.0));
        assert_eq!(p.min(), (1.0, 0.0));
    }
}
