//! Declarative assembly documents (JSON).
//!
//! Every physical value is written as `"<number> <unit>"` or
//! `{"value": <number>, "unit": "<unit>"}`. Omitted fields take the reference
//! hardware defaults. Serialization writes every field in SI units so that
//! parsing a serialized document reproduces the assembly exactly.

use serde::{Deserialize, Serialize};

use crate::defaults;
use crate::error::{Error, Result};
use crate::geometry::{
    CoolingUnitSpec, Heater, LinkAssembly, ModuleKind, ModuleSpec, NodeSpec, PerStage, Stage,
    StageSpec, VacuumCan,
};
use crate::loads::{PostLoadCurve, PostLoadForm};
use crate::materials::{ConductivityModel, CoolingCurve, Domain, PowerLawSegment, ResistanceCurve};
use crate::solver::SolverSettings;
use crate::units::{Dimension, Qty};

pub const SCHEMA_VERSION: u32 = 1;

/// A parsed document: the assembly plus solver controls.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub assembly: LinkAssembly,
    pub solver: SolverSettings,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vacuum_can: Option<VacuumCanDoc>,
    #[serde(default)]
    stages: PerStageDoc<StageDoc>,
    modules: Vec<ModuleDoc>,
    #[serde(default)]
    solver: SolverSettings,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    heaters: Vec<HeaterDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PerStageDoc<T> {
    #[serde(skip_serializing_if = "Option::is_none")]
    base: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    still: Option<T>,
    #[serde(rename = "4k", skip_serializing_if = "Option::is_none")]
    four_k: Option<T>,
    #[serde(rename = "50k", skip_serializing_if = "Option::is_none")]
    fifty_k: Option<T>,
}

impl<T> Default for PerStageDoc<T> {
    fn default() -> Self {
        PerStageDoc {
            base: None,
            still: None,
            four_k: None,
            fifty_k: None,
        }
    }
}

impl<T> PerStageDoc<T> {
    fn get(&self, s: Stage) -> Option<&T> {
        match s {
            Stage::Base => self.base.as_ref(),
            Stage::Still => self.still.as_ref(),
            Stage::FourK => self.four_k.as_ref(),
            Stage::FiftyK => self.fifty_k.as_ref(),
        }
    }

    fn full(mut f: impl FnMut(Stage) -> T) -> Self {
        PerStageDoc {
            base: Some(f(Stage::Base)),
            still: Some(f(Stage::Still)),
            four_k: Some(f(Stage::FourK)),
            fifty_k: Some(f(Stage::FiftyK)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VacuumCanDoc {
    #[serde(default)]
    temperature: Option<Qty>,
    #[serde(default)]
    circumference: Option<Qty>,
    #[serde(default)]
    emissivity: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum AttenuationDoc {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t0: Option<Qty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    area: Option<Qty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    circumference: Option<Qty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    emissivity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    material: Option<ConductivityDoc>,
    /// A number, or `"auto"` to derive it from emissivities and geometry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attenuation: Option<AttenuationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    extra_flux: Option<Qty>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    include_self: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    post_load: Option<PostLoadDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ConductivityDoc {
    NistRrrCopper {
        rrr: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_min: Option<Qty>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_max: Option<Qty>,
    },
    PowerLawPiecewise {
        segments: Vec<SegmentDoc>,
    },
    /// Pairs of temperature in K and conductivity in W/(K m).
    Tabulated {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentDoc {
    t_lo: Qty,
    t_hi: Qty,
    a: f64,
    b: f64,
    c: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoolingDoc {
    t0: Qty,
    prefactor: Qty,
    #[serde(default)]
    offset: f64,
    exponent: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    t_max: Option<Qty>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ResistanceDoc {
    PowerLaw {
        r0: Qty,
        t0: Qty,
        exponent: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_min: Option<Qty>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        t_max: Option<Qty>,
    },
    ConductivityShaped {
        r0: Qty,
        t_ref: Qty,
        material: ConductivityDoc,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
enum PostLoadDoc {
    Constant {
        power: Qty,
        #[serde(default)]
        covered_by_mli: bool,
    },
    PowerLaw {
        p0: Qty,
        exponent: f64,
        t0_hot: Qty,
        #[serde(default)]
        covered_by_mli: bool,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CuCoolingDoc {
    #[serde(default, rename = "4k", skip_serializing_if = "Option::is_none")]
    four_k: Option<CoolingDoc>,
    #[serde(default, rename = "50k", skip_serializing_if = "Option::is_none")]
    fifty_k: Option<CoolingDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
enum ModuleDoc {
    Node {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<Qty>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cooling: Option<PerStageDoc<CoolingDoc>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        internal_resistance: Option<PerStageDoc<ResistanceDoc>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        plate_load: Option<PerStageDoc<Qty>>,
    },
    Adapter {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<Qty>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<Qty>,
    },
    Link {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<Qty>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        length: Option<Qty>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        post_positions: Option<Vec<Qty>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        posts_per_set: Option<u32>,
    },
    Braid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<Qty>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resistance: Option<PerStageDoc<ResistanceDoc>>,
    },
    CoolingUnit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        position: Option<Qty>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cooling: Option<CuCoolingDoc>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pass_resistance: Option<PerStageDoc<ResistanceDoc>>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaterDoc {
    stage: Stage,
    position: Qty,
    power: Qty,
}

fn si(q: &Qty, dim: Dimension, path: &str) -> Result<f64> {
    q.to_si(dim, path)
}

fn opt_si(q: &Option<Qty>, dim: Dimension, path: &str, default: f64) -> Result<f64> {
    match q {
        Some(q) => si(q, dim, path),
        None => Ok(default),
    }
}

fn invalid(path: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Domain(m) => Error::validation(path, m),
        other => other,
    }
}

fn conductivity_from(doc: &ConductivityDoc, path: &str) -> Result<ConductivityModel> {
    let m = match doc {
        ConductivityDoc::NistRrrCopper { rrr, t_min, t_max } => {
            let d = Domain {
                t_min: opt_si(
                    t_min,
                    Dimension::Temperature,
                    &format!("{path}.t_min"),
                    Domain::default().t_min,
                )?,
                t_max: opt_si(
                    t_max,
                    Dimension::Temperature,
                    &format!("{path}.t_max"),
                    Domain::default().t_max,
                )?,
            };
            ConductivityModel::NistRrrCopper {
                rrr: *rrr,
                domain: d,
            }
        }
        ConductivityDoc::PowerLawPiecewise { segments } => {
            let segs = segments
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let p = format!("{path}.segments[{i}]");
                    Ok(PowerLawSegment {
                        t_lo: si(&s.t_lo, Dimension::Temperature, &format!("{p}.t_lo"))?,
                        t_hi: si(&s.t_hi, Dimension::Temperature, &format!("{p}.t_hi"))?,
                        a: s.a,
                        b: s.b,
                        c: s.c,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ConductivityModel::PowerLawPiecewise { segments: segs }
        }
        ConductivityDoc::Tabulated { points } => ConductivityModel::Tabulated {
            points: points.iter().map(|p| (p[0], p[1])).collect(),
        },
    };
    m.validate().map_err(invalid(path))?;
    Ok(m)
}

fn conductivity_to(m: &ConductivityModel) -> ConductivityDoc {
    let t = |v| Qty::si(v, Dimension::Temperature);
    match m {
        ConductivityModel::NistRrrCopper { rrr, domain } => ConductivityDoc::NistRrrCopper {
            rrr: *rrr,
            t_min: Some(t(domain.t_min)),
            t_max: Some(t(domain.t_max)),
        },
        ConductivityModel::PowerLawPiecewise { segments } => ConductivityDoc::PowerLawPiecewise {
            segments: segments
                .iter()
                .map(|s| SegmentDoc {
                    t_lo: t(s.t_lo),
                    t_hi: t(s.t_hi),
                    a: s.a,
                    b: s.b,
                    c: s.c,
                })
                .collect(),
        },
        ConductivityModel::Tabulated { points } => ConductivityDoc::Tabulated {
            points: points.iter().map(|&(a, b)| [a, b]).collect(),
        },
    }
}

fn cooling_from(doc: &CoolingDoc, path: &str) -> Result<CoolingCurve> {
    let c = CoolingCurve {
        t0: si(&doc.t0, Dimension::Temperature, &format!("{path}.t0"))?,
        prefactor: si(
            &doc.prefactor,
            Dimension::Power,
            &format!("{path}.prefactor"),
        )?,
        offset: doc.offset,
        exponent: doc.exponent,
        t_max: opt_si(
            &doc.t_max,
            Dimension::Temperature,
            &format!("{path}.t_max"),
            crate::materials::DEFAULT_T_MAX,
        )?,
    };
    c.validate().map_err(invalid(path))?;
    Ok(c)
}

fn cooling_to(c: &CoolingCurve) -> CoolingDoc {
    CoolingDoc {
        t0: Qty::si(c.t0, Dimension::Temperature),
        prefactor: Qty::si(c.prefactor, Dimension::Power),
        offset: c.offset,
        exponent: c.exponent,
        t_max: Some(Qty::si(c.t_max, Dimension::Temperature)),
    }
}

fn resistance_from(doc: &ResistanceDoc, path: &str) -> Result<ResistanceCurve> {
    let r = match doc {
        ResistanceDoc::PowerLaw {
            r0,
            t0,
            exponent,
            t_min,
            t_max,
        } => ResistanceCurve::PowerLaw {
            r0: si(r0, Dimension::Resistance, &format!("{path}.r0"))?,
            t0: si(t0, Dimension::Temperature, &format!("{path}.t0"))?,
            exponent: *exponent,
            domain: Domain {
                t_min: opt_si(
                    t_min,
                    Dimension::Temperature,
                    &format!("{path}.t_min"),
                    Domain::default().t_min,
                )?,
                t_max: opt_si(
                    t_max,
                    Dimension::Temperature,
                    &format!("{path}.t_max"),
                    Domain::default().t_max,
                )?,
            },
        },
        ResistanceDoc::ConductivityShaped {
            r0,
            t_ref,
            material,
        } => ResistanceCurve::ConductivityShaped {
            r0: si(r0, Dimension::Resistance, &format!("{path}.r0"))?,
            t_ref: si(t_ref, Dimension::Temperature, &format!("{path}.t_ref"))?,
            model: conductivity_from(material, &format!("{path}.material"))?,
        },
    };
    r.validate().map_err(invalid(path))?;
    Ok(r)
}

fn resistance_to(r: &ResistanceCurve) -> ResistanceDoc {
    let t = |v| Qty::si(v, Dimension::Temperature);
    match r {
        ResistanceCurve::PowerLaw {
            r0,
            t0,
            exponent,
            domain,
        } => ResistanceDoc::PowerLaw {
            r0: Qty::si(*r0, Dimension::Resistance),
            t0: t(*t0),
            exponent: *exponent,
            t_min: Some(t(domain.t_min)),
            t_max: Some(t(domain.t_max)),
        },
        ResistanceCurve::ConductivityShaped { r0, t_ref, model } => {
            ResistanceDoc::ConductivityShaped {
                r0: Qty::si(*r0, Dimension::Resistance),
                t_ref: t(*t_ref),
                material: conductivity_to(model),
            }
        }
    }
}

fn post_from(doc: &PostLoadDoc, path: &str) -> Result<PostLoadCurve> {
    let p = match doc {
        PostLoadDoc::Constant {
            power,
            covered_by_mli,
        } => PostLoadCurve {
            form: PostLoadForm::Constant {
                power: si(power, Dimension::Power, &format!("{path}.power"))?,
            },
            covered_by_mli: *covered_by_mli,
        },
        PostLoadDoc::PowerLaw {
            p0,
            exponent,
            t0_hot,
            covered_by_mli,
        } => PostLoadCurve {
            form: PostLoadForm::PowerLaw {
                p0: si(p0, Dimension::Power, &format!("{path}.p0"))?,
                exponent: *exponent,
                t0_hot: si(t0_hot, Dimension::Temperature, &format!("{path}.t0_hot"))?,
            },
            covered_by_mli: *covered_by_mli,
        },
    };
    p.validate().map_err(invalid(path))?;
    Ok(p)
}

fn post_to(p: &PostLoadCurve) -> PostLoadDoc {
    match p.form {
        PostLoadForm::Constant { power } => PostLoadDoc::Constant {
            power: Qty::si(power, Dimension::Power),
            covered_by_mli: p.covered_by_mli,
        },
        PostLoadForm::PowerLaw {
            p0,
            exponent,
            t0_hot,
        } => PostLoadDoc::PowerLaw {
            p0: Qty::si(p0, Dimension::Power),
            exponent,
            t0_hot: Qty::si(t0_hot, Dimension::Temperature),
            covered_by_mli: p.covered_by_mli,
        },
    }
}

fn per_stage_from<D, T>(
    doc: &Option<PerStageDoc<D>>,
    path: &str,
    conv: impl Fn(&D, &str) -> Result<T>,
    default: impl Fn(Stage) -> T,
) -> Result<PerStage<T>> {
    PerStage::from_fn(|s| s).try_map(|s, _| match doc.as_ref().and_then(|d| d.get(s)) {
        Some(d) => conv(d, &format!("{path}.{}", s.name())),
        None => Ok(default(s)),
    })
}

fn stage_from(stage: Stage, doc: Option<&StageDoc>) -> Result<StageSpec> {
    let mut spec = defaults::stage(stage);
    let Some(doc) = doc else { return Ok(spec) };
    let path = format!("stages.{}", stage.name());
    let p = |f: &str| format!("{path}.{f}");
    if let Some(q) = &doc.t0 {
        spec.t0 = si(q, Dimension::Temperature, &p("t0"))?;
    }
    if let Some(q) = &doc.area {
        spec.area = si(q, Dimension::Area, &p("area"))?;
    }
    if let Some(q) = &doc.circumference {
        spec.circumference = si(q, Dimension::Length, &p("circumference"))?;
    }
    if let Some(e) = doc.emissivity {
        spec.emissivity = e;
    }
    if let Some(m) = &doc.material {
        spec.material = conductivity_from(m, &p("material"))?;
    }
    match &doc.attenuation {
        Some(AttenuationDoc::Value(v)) => spec.attenuation_override = Some(*v),
        Some(AttenuationDoc::Keyword(k)) if k == "auto" => spec.attenuation_override = None,
        Some(AttenuationDoc::Keyword(k)) => {
            return Err(Error::schema(
                p("attenuation"),
                format!("expected a number or \"auto\", got `{k}`"),
            ))
        }
        None => {}
    }
    if let Some(q) = &doc.extra_flux {
        spec.extra_flux = si(q, Dimension::Flux, &p("extra_flux"))?;
    }
    if let Some(b) = doc.include_self {
        spec.include_self = b;
    }
    if let Some(pl) = &doc.post_load {
        spec.post_load = post_from(pl, &p("post_load"))?;
    }
    Ok(spec)
}

fn stage_to(s: &StageSpec) -> StageDoc {
    StageDoc {
        t0: Some(Qty::si(s.t0, Dimension::Temperature)),
        area: Some(Qty::si(s.area, Dimension::Area)),
        circumference: Some(Qty::si(s.circumference, Dimension::Length)),
        emissivity: Some(s.emissivity),
        material: Some(conductivity_to(&s.material)),
        attenuation: Some(match s.attenuation_override {
            Some(v) => AttenuationDoc::Value(v),
            None => AttenuationDoc::Keyword("auto".into()),
        }),
        extra_flux: Some(Qty::si(s.extra_flux, Dimension::Flux)),
        include_self: Some(s.include_self),
        post_load: Some(post_to(&s.post_load)),
    }
}

fn module_from(doc: &ModuleDoc, i: usize, cursor: f64) -> Result<ModuleSpec> {
    let path = format!("modules[{i}]");
    let p = |f: &str| format!("{path}.{f}");
    let position = |q: &Option<Qty>| opt_si(q, Dimension::Length, &p("position"), cursor);
    let (kind, pos) = match doc {
        ModuleDoc::Node {
            position: pq,
            cooling,
            internal_resistance,
            plate_load,
        } => {
            let node = NodeSpec {
                cooling: per_stage_from(
                    cooling,
                    &p("cooling"),
                    cooling_from,
                    defaults::node_cooling,
                )?,
                internal_resistance: per_stage_from(
                    internal_resistance,
                    &p("internal_resistance"),
                    resistance_from,
                    defaults::node_resistance,
                )?,
                plate_load: per_stage_from(
                    plate_load,
                    &p("plate_load"),
                    |q, pp| si(q, Dimension::Power, pp),
                    defaults::node_plate_load,
                )?,
            };
            (ModuleKind::Node(node), position(pq)?)
        }
        ModuleDoc::Adapter {
            position: pq,
            length,
        } => (
            ModuleKind::Adapter {
                length: opt_si(
                    length,
                    Dimension::Length,
                    &p("length"),
                    defaults::ADAPTER_LENGTH,
                )?,
            },
            position(pq)?,
        ),
        ModuleDoc::Link {
            position: pq,
            length,
            post_positions,
            posts_per_set,
        } => {
            let len = opt_si(
                length,
                Dimension::Length,
                &p("length"),
                defaults::LINK_LENGTH,
            )?;
            let posts = match post_positions {
                Some(v) => v
                    .iter()
                    .enumerate()
                    .map(|(j, q)| si(q, Dimension::Length, &format!("{path}.post_positions[{j}]")))
                    .collect::<Result<Vec<_>>>()?,
                None => defaults::POST_FRACTIONS.iter().map(|f| f * len).collect(),
            };
            (
                ModuleKind::Link {
                    length: len,
                    post_positions: posts,
                    posts_per_set: posts_per_set.unwrap_or(defaults::POSTS_PER_SET),
                },
                position(pq)?,
            )
        }
        ModuleDoc::Braid {
            position: pq,
            resistance,
        } => (
            ModuleKind::Braid {
                resistance: per_stage_from(
                    resistance,
                    &p("resistance"),
                    resistance_from,
                    defaults::braid_resistance_at,
                )?,
            },
            position(pq)?,
        ),
        ModuleDoc::CoolingUnit {
            position: pq,
            cooling,
            pass_resistance,
        } => {
            let c4 = cooling.as_ref().and_then(|c| c.four_k.as_ref());
            let c50 = cooling.as_ref().and_then(|c| c.fifty_k.as_ref());
            let cu = CoolingUnitSpec {
                cooling_4k: match c4 {
                    Some(d) => cooling_from(d, &p("cooling.4k"))?,
                    None => defaults::node_cooling(Stage::FourK),
                },
                cooling_50k: match c50 {
                    Some(d) => cooling_from(d, &p("cooling.50k"))?,
                    None => defaults::node_cooling(Stage::FiftyK),
                },
                pass_resistance: per_stage_from(
                    pass_resistance,
                    &p("pass_resistance"),
                    resistance_from,
                    defaults::cooling_unit_resistance,
                )?,
            };
            (ModuleKind::CoolingUnit(cu), position(pq)?)
        }
    };
    Ok(ModuleSpec {
        kind,
        position: pos,
    })
}

fn module_to(m: &ModuleSpec) -> ModuleDoc {
    let position = Some(Qty::si(m.position, Dimension::Length));
    let len = |v| Some(Qty::si(v, Dimension::Length));
    match &m.kind {
        ModuleKind::Node(n) => ModuleDoc::Node {
            position,
            cooling: Some(PerStageDoc::full(|s| cooling_to(&n.cooling[s]))),
            internal_resistance: Some(PerStageDoc::full(|s| {
                resistance_to(&n.internal_resistance[s])
            })),
            plate_load: Some(PerStageDoc::full(|s| {
                Qty::si(n.plate_load[s], Dimension::Power)
            })),
        },
        ModuleKind::Adapter { length } => ModuleDoc::Adapter {
            position,
            length: len(*length),
        },
        ModuleKind::Link {
            length,
            post_positions,
            posts_per_set,
        } => ModuleDoc::Link {
            position,
            length: len(*length),
            post_positions: Some(
                post_positions
                    .iter()
                    .map(|&p| Qty::si(p, Dimension::Length))
                    .collect(),
            ),
            posts_per_set: Some(*posts_per_set),
        },
        ModuleKind::Braid { resistance } => ModuleDoc::Braid {
            position,
            resistance: Some(PerStageDoc::full(|s| resistance_to(&resistance[s]))),
        },
        ModuleKind::CoolingUnit(cu) => ModuleDoc::CoolingUnit {
            position,
            cooling: Some(CuCoolingDoc {
                four_k: Some(cooling_to(&cu.cooling_4k)),
                fifty_k: Some(cooling_to(&cu.cooling_50k)),
            }),
            pass_resistance: Some(PerStageDoc::full(|s| resistance_to(&cu.pass_resistance[s]))),
        },
    }
}

/// Parses and validates a JSON assembly document.
pub fn parse_config(text: &str) -> Result<Config> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: Document = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::schema(
            if path == "." { String::new() } else { path },
            e.into_inner().to_string(),
        )
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::schema(
            "schema_version",
            format!(
                "unsupported version {}, expected {SCHEMA_VERSION}",
                doc.schema_version
            ),
        ));
    }
    let stages = PerStage::from_fn(|s| s).try_map(|s, _| stage_from(s, doc.stages.get(s)))?;
    let defaults_can = defaults::vacuum_can();
    let vacuum_can = match &doc.vacuum_can {
        None => defaults_can,
        Some(v) => VacuumCan {
            temperature: opt_si(
                &v.temperature,
                Dimension::Temperature,
                "vacuum_can.temperature",
                defaults_can.temperature,
            )?,
            circumference: opt_si(
                &v.circumference,
                Dimension::Length,
                "vacuum_can.circumference",
                defaults_can.circumference,
            )?,
            emissivity: v.emissivity.unwrap_or(defaults_can.emissivity),
        },
    };
    let mut modules = Vec::with_capacity(doc.modules.len());
    let mut cursor = 0.0;
    for (i, m) in doc.modules.iter().enumerate() {
        let spec = module_from(m, i, cursor)?;
        cursor = spec.end();
        modules.push(spec);
    }
    let heaters = doc
        .heaters
        .iter()
        .enumerate()
        .map(|(i, h)| {
            Ok(Heater {
                stage: h.stage,
                position: si(
                    &h.position,
                    Dimension::Length,
                    &format!("heaters[{i}].position"),
                )?,
                power: si(&h.power, Dimension::Power, &format!("heaters[{i}].power"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    doc.solver.validate()?;
    let assembly = LinkAssembly::new(stages, modules, vacuum_can, heaters)?;
    Ok(Config {
        assembly,
        solver: doc.solver,
    })
}

/// Parses a document and returns only the assembly.
pub fn parse_assembly(text: &str) -> Result<LinkAssembly> {
    Ok(parse_config(text)?.assembly)
}

/// Writes a fully explicit SI document.
pub fn serialize_config(assembly: &LinkAssembly, solver: &SolverSettings) -> String {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        vacuum_can: Some(VacuumCanDoc {
            temperature: Some(Qty::si(
                assembly.vacuum_can.temperature,
                Dimension::Temperature,
            )),
            circumference: Some(Qty::si(
                assembly.vacuum_can.circumference,
                Dimension::Length,
            )),
            emissivity: Some(assembly.vacuum_can.emissivity),
        }),
        stages: PerStageDoc::full(|s| stage_to(&assembly.stages[s])),
        modules: assembly.modules.iter().map(module_to).collect(),
        solver: *solver,
        heaters: assembly
            .heaters
            .iter()
            .map(|h| HeaterDoc {
                stage: h.stage,
                position: Qty::si(h.position, Dimension::Length),
                power: Qty::si(h.power, Dimension::Power),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("documents always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{standard_assembly, CuPlacement};

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "modules": [
            {"kind": "node"},
            {"kind": "adapter"},
            {"kind": "braid"},
            {"kind": "link"},
            {"kind": "braid"},
            {"kind": "adapter"},
            {"kind": "node"}
        ]
    }"#;

    #[test]
    fn minimal_document_builds_five_metres() {
        let a = parse_assembly(MINIMAL).unwrap();
        assert!((a.total_length() - 5.0).abs() < 1e-12);
        assert_eq!(a, standard_assembly(5.0, CuPlacement::None).unwrap());
    }

    #[test]
    fn round_trip_is_identity() {
        let a = standard_assembly(30.0, CuPlacement::Central).unwrap();
        let s = SolverSettings::default();
        let text = serialize_config(&a, &s);
        let back = parse_config(&text).unwrap();
        assert_eq!(back.assembly, a);
        assert_eq!(back.solver, s);
        assert_eq!(serialize_config(&back.assembly, &back.solver), text);
    }

    #[test]
    fn unknown_key_is_a_schema_error() {
        let text = MINIMAL.replace(
            "\"kind\": \"adapter\"}",
            "\"kind\": \"adapter\", \"colour\": 3}",
        );
        match parse_config(&text) {
            Err(Error::Schema { path, .. }) => assert!(path.starts_with("modules[1]"), "{path}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_emissivity_names_the_field() {
        let text = MINIMAL.replace(
            "\"schema_version\": 1,",
            "\"schema_version\": 1, \"stages\": {\"4k\": {\"emissivity\": -0.1}},",
        );
        match parse_config(&text) {
            Err(Error::Validation { path, .. }) => assert_eq!(path, "stages.4k.emissivity"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn explicit_units_are_converted() {
        let text = MINIMAL.replace(
            "{\"kind\": \"link\"}",
            "{\"kind\": \"link\", \"length\": {\"value\": 2500, \"unit\": \"mm\"}}",
        );
        let a = parse_assembly(&text).unwrap();
        assert!((a.total_length() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn overlapping_positions_are_rejected() {
        let text = MINIMAL.replace(
            "{\"kind\": \"link\"}",
            "{\"kind\": \"link\", \"position\": \"1.0 m\"}",
        );
        match parse_config(&text) {
            Err(Error::Validation { message, .. }) => {
                assert!(message.contains("overlaps"), "{message}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wrong_version_is_rejected() {
        let text = MINIMAL.replace("\"schema_version\": 1", "\"schema_version\": 7");
        assert!(matches!(parse_config(&text), Err(Error::Schema { .. })));
    }
}
