//! Characterized parameter set of the reference link hardware.
//!
//! Curves written in normalized form use `T~ = T / T0` with the stage's own
//! reference temperature; post loads normalize by the enclosing stage's.
//! Tabulated circumferences are the mean octagon diameters, so the stored
//! perimeter is `pi` times the listed value.

use std::f64::consts::PI;

use crate::geometry::{
    CoolingUnitSpec, ModuleKind, NodeSpec, PerStage, Stage, StageSpec, VacuumCan,
};
use crate::loads::PostLoadCurve;
use crate::materials::{ConductivityModel, CoolingCurve, ResistanceCurve};

pub const ADAPTER_LENGTH: f64 = 1.25;
pub const LINK_LENGTH: f64 = 2.5;
pub const POSTS_PER_SET: u32 = 3;
/// Post sets sit at these fractions of a link module's length.
pub const POST_FRACTIONS: [f64; 2] = [0.25, 0.75];

pub const VACUUM_CAN_TEMPERATURE: f64 = 293.0;
pub const EMISSIVITY_COPPER: f64 = 0.025;
pub const EMISSIVITY_ALUMINIUM: f64 = 0.05;

/// Attenuation of the MLI-wrapped 50K shield towards the vacuum can.
pub const MLI_ATTENUATION: f64 = 0.004;
/// Attenuation of a bare 50K shield.
pub const BARE_ATTENUATION: f64 = 0.02;
/// Mixing-chamber parasitic load of a stand-alone node, W.
pub const BASE_PLATE_LOAD: f64 = 4e-6;

/// Reference temperature of each stage, K.
pub fn reference_temperature(stage: Stage) -> f64 {
    match stage {
        Stage::Base => 0.01,
        Stage::Still => 1.0,
        Stage::FourK => 4.0,
        Stage::FiftyK => 50.0,
    }
}

fn diameter(stage: Stage) -> f64 {
    match stage {
        Stage::Base => 0.055,
        Stage::Still => 0.110,
        Stage::FourK => 0.155,
        Stage::FiftyK => 0.205,
    }
}

/// Shield cross-section, m^2.
pub fn area(stage: Stage) -> f64 {
    match stage {
        Stage::Base => 200e-6,
        Stage::Still => 370e-6,
        Stage::FourK => 1000e-6,
        Stage::FiftyK => 2000e-6,
    }
}

pub fn shield_rrr(stage: Stage) -> f64 {
    match stage {
        Stage::Base => 150.0,
        Stage::Still => 200.0,
        Stage::FourK => 230.0,
        Stage::FiftyK => 210.0,
    }
}

pub fn circumference(stage: Stage) -> f64 {
    PI * diameter(stage)
}

pub fn post_load(stage: Stage) -> PostLoadCurve {
    match stage {
        Stage::Base => PostLoadCurve::power_law(10e-9, 3.3, 1.0),
        Stage::Still => PostLoadCurve::power_law(34e-6, 2.2, 4.0),
        Stage::FourK => PostLoadCurve::power_law(10e-3, 1.7, 50.0),
        Stage::FiftyK => PostLoadCurve {
            covered_by_mli: true,
            ..PostLoadCurve::constant(0.26)
        },
    }
}

pub fn stage(stage: Stage) -> StageSpec {
    StageSpec {
        stage,
        t0: reference_temperature(stage),
        area: area(stage),
        circumference: circumference(stage),
        emissivity: EMISSIVITY_COPPER,
        material: ConductivityModel::nist_copper(shield_rrr(stage)).expect("valid RRR"),
        attenuation_override: match stage {
            Stage::Base | Stage::Still => Some(0.0),
            Stage::FourK => None,
            Stage::FiftyK => Some(MLI_ATTENUATION),
        },
        extra_flux: 0.0,
        include_self: stage == Stage::FiftyK,
        post_load: post_load(stage),
    }
}

pub fn stages() -> PerStage<StageSpec> {
    PerStage::from_fn(stage)
}

pub fn vacuum_can() -> VacuumCan {
    VacuumCan {
        temperature: VACUUM_CAN_TEMPERATURE,
        circumference: PI * 0.265,
        emissivity: EMISSIVITY_ALUMINIUM,
    }
}

pub fn node_cooling(stage: Stage) -> CoolingCurve {
    let (prefactor, offset, exponent) = match stage {
        Stage::Base => (4e-6, 0.0, 2.0),
        Stage::Still => (80e-3, 0.5, 2.0),
        Stage::FourK => (2.5, 0.75, 1.2),
        Stage::FiftyK => (36.0, 0.75, 0.7),
    };
    CoolingCurve::new(reference_temperature(stage), prefactor, offset, exponent)
        .expect("valid curve")
}

/// Copper-shaped resistance normalized at the 50K reference temperature.
fn copper_shaped(r0: f64, rrr: f64) -> ResistanceCurve {
    let model = ConductivityModel::nist_copper(rrr).expect("valid RRR");
    ResistanceCurve::conductivity_shaped(r0, reference_temperature(Stage::FiftyK), model)
        .expect("valid resistance")
}

fn power(stage: Stage, r0: f64, exponent: f64) -> ResistanceCurve {
    ResistanceCurve::power_law(r0, reference_temperature(stage), exponent)
        .expect("valid resistance")
}

pub fn node_resistance(stage: Stage) -> ResistanceCurve {
    match stage {
        Stage::Base => power(stage, 5e3, -2.0),
        Stage::Still => power(stage, 60.0, -2.0),
        Stage::FourK => power(stage, 2.4, -2.0),
        Stage::FiftyK => copper_shaped(0.5, 75.0),
    }
}

pub fn cooling_unit_resistance(stage: Stage) -> ResistanceCurve {
    match stage {
        Stage::Base => power(stage, 1e3, -1.0),
        Stage::Still => power(stage, 2.0, -1.0),
        Stage::FourK => power(stage, 0.5, -1.0),
        Stage::FiftyK => copper_shaped(0.2, 75.0),
    }
}

pub fn braid_resistance_at(stage: Stage) -> ResistanceCurve {
    match stage {
        Stage::Base => power(stage, 40e3, -2.0),
        Stage::Still => power(stage, 10.0, -1.7),
        Stage::FourK => power(stage, 0.5, -2.6),
        Stage::FiftyK => copper_shaped(0.15, 320.0),
    }
}

pub fn braid_resistance() -> PerStage<ResistanceCurve> {
    PerStage::from_fn(braid_resistance_at)
}

/// Parasitic load on a node plate from the refrigerator itself, W. Only the
/// base curve has no offset, so only the base plate needs one to sit at its
/// usual operating point.
pub fn node_plate_load(stage: Stage) -> f64 {
    match stage {
        Stage::Base => BASE_PLATE_LOAD,
        _ => 0.0,
    }
}

pub fn node() -> NodeSpec {
    NodeSpec {
        cooling: PerStage::from_fn(node_cooling),
        internal_resistance: PerStage::from_fn(node_resistance),
        plate_load: PerStage::from_fn(node_plate_load),
    }
}

pub fn cooling_unit() -> CoolingUnitSpec {
    CoolingUnitSpec {
        cooling_4k: node_cooling(Stage::FourK),
        cooling_50k: node_cooling(Stage::FiftyK),
        pass_resistance: PerStage::from_fn(cooling_unit_resistance),
    }
}

pub fn link(length: f64) -> ModuleKind {
    ModuleKind::Link {
        length,
        post_positions: POST_FRACTIONS.iter().map(|f| f * length).collect(),
        posts_per_set: POSTS_PER_SET,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_cooling_powers() {
        let p: Vec<f64> = Stage::ALL
            .iter()
            .map(|&s| node_cooling(s).power(reference_temperature(s)).unwrap())
            .collect();
        assert!((p[0] - 4e-6).abs() < 1e-18);
        assert!((p[1] - 20e-3).abs() < 1e-15);
        assert!((p[2] - 2.5 * 0.25f64.powf(1.2)).abs() < 1e-12);
        assert!((p[3] - 36.0 * 0.25f64.powf(0.7)).abs() < 1e-12);
    }

    #[test]
    fn stage_geometry_is_nested() {
        for w in Stage::ALL.windows(2) {
            assert!(circumference(w[1]) > circumference(w[0]));
            assert!(area(w[1]) > area(w[0]));
        }
        assert!(vacuum_can().circumference > circumference(Stage::FiftyK));
    }
}
