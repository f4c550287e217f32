//! Physical quantities as they appear in configuration documents.
//!
//! A quantity is written either as a `"<number> <unit>"` string or as an
//! object `{"value": <number>, "unit": "<unit>"}`. Everything is converted to
//! SI on ingestion; serialization always writes the SI unit so a
//! parse/serialize round trip is exact.

use std::fmt;

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Physical dimension of a configuration value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Area,
    Temperature,
    Power,
    Resistance,
    Conductivity,
    Flux,
    LineDensity,
    Dimensionless,
}

impl Dimension {
    /// Canonical SI unit string used when writing documents.
    pub fn si_unit(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Area => "m^2",
            Dimension::Temperature => "K",
            Dimension::Power => "W",
            Dimension::Resistance => "K/W",
            Dimension::Conductivity => "W/(K m)",
            Dimension::Flux => "W/m^2",
            Dimension::LineDensity => "W/m",
            Dimension::Dimensionless => "",
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Length => "length",
            Dimension::Area => "area",
            Dimension::Temperature => "temperature",
            Dimension::Power => "power",
            Dimension::Resistance => "thermal resistance",
            Dimension::Conductivity => "thermal conductivity",
            Dimension::Flux => "heat flux",
            Dimension::LineDensity => "line heat load",
            Dimension::Dimensionless => "dimensionless",
        };
        f.write_str(name)
    }
}

/// Looks up a unit symbol, returning its dimension and the factor to SI.
pub fn lookup_unit(unit: &str) -> Option<(Dimension, f64)> {
    let u: String = unit
        .trim()
        .replace('µ', "u")
        .replace('·', " ")
        .replace('²', "^2")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ");
    use Dimension::*;
    let hit = match u.as_str() {
        "" | "1" => (Dimensionless, 1.0),
        "m" => (Length, 1.0),
        "mm" => (Length, 1e-3),
        "cm" => (Length, 1e-2),
        "km" => (Length, 1e3),
        "m^2" | "m2" => (Area, 1.0),
        "cm^2" | "cm2" => (Area, 1e-4),
        "mm^2" | "mm2" => (Area, 1e-6),
        "K" => (Temperature, 1.0),
        "mK" => (Temperature, 1e-3),
        "uK" => (Temperature, 1e-6),
        "kW" => (Power, 1e3),
        "W" => (Power, 1.0),
        "mW" => (Power, 1e-3),
        "uW" => (Power, 1e-6),
        "nW" => (Power, 1e-9),
        "pW" => (Power, 1e-12),
        "K/W" => (Resistance, 1.0),
        "mK/W" => (Resistance, 1e-3),
        "K/mW" | "mK/uW" => (Resistance, 1e3),
        "K/uW" => (Resistance, 1e6),
        "W/(K m)" | "W/(m K)" | "W/K/m" | "W/m/K" | "W/(Km)" | "W/(mK)" => (Conductivity, 1.0),
        "mW/(K m)" | "mW/(m K)" => (Conductivity, 1e-3),
        "W/m^2" | "W/m2" => (Flux, 1.0),
        "mW/m^2" | "mW/m2" => (Flux, 1e-3),
        "uW/m^2" | "uW/m2" => (Flux, 1e-6),
        "W/m" => (LineDensity, 1.0),
        "mW/m" => (LineDensity, 1e-3),
        "uW/m" => (LineDensity, 1e-6),
        "nW/m" => (LineDensity, 1e-9),
        _ => return None,
    };
    Some(hit)
}

/// A quantity exactly as written in a document, before unit conversion.
#[derive(Debug, Clone, PartialEq)]
pub struct Qty {
    pub value: f64,
    pub unit: String,
}

impl Qty {
    /// Writes an SI value with its canonical unit.
    pub fn si(value: f64, dim: Dimension) -> Self {
        Qty {
            value,
            unit: dim.si_unit().to_string(),
        }
    }

    /// Converts to SI, checking that the unit has the expected dimension.
    pub fn to_si(&self, dim: Dimension, path: &str) -> Result<f64> {
        let (found, factor) = lookup_unit(&self.unit)
            .ok_or_else(|| Error::schema(path, format!("unknown unit `{}`", self.unit)))?;
        if found != dim {
            return Err(Error::schema(
                path,
                format!("expected a {dim} but unit `{}` is a {found}", self.unit),
            ));
        }
        if !self.value.is_finite() {
            return Err(Error::schema(path, "value is not a finite number"));
        }
        Ok(self.value * factor)
    }
}

fn parse_shorthand(s: &str) -> std::result::Result<Qty, String> {
    let s = s.trim();
    let split = s
        .char_indices()
        .find(|&(_, c)| c.is_whitespace())
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let value: f64 = num
        .parse()
        .map_err(|_| format!("cannot read `{s}` as \"<number> <unit>\""))?;
    Ok(Qty {
        value,
        unit: unit.trim().to_string(),
    })
}

impl Serialize for Qty {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if self.unit.is_empty() {
            ser.serialize_f64(self.value)
        } else {
            ser.serialize_str(&format!("{} {}", self.value, self.unit))
        }
    }
}

impl<'de> Deserialize<'de> for Qty {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        struct QtyVisitor;

        impl<'de> Visitor<'de> for QtyVisitor {
            type Value = Qty;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str(
                    "a quantity: \"<number> <unit>\", {\"value\", \"unit\"}, or a plain number",
                )
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Qty, E> {
                Ok(Qty {
                    value: v,
                    unit: String::new(),
                })
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Qty, E> {
                self.visit_f64(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Qty, E> {
                self.visit_f64(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Qty, E> {
                parse_shorthand(v).map_err(E::custom)
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<Qty, A::Error> {
                let mut value = None;
                let mut unit = None;
                while let Some(key) = map.next_key::<String>()? {
                    match key.as_str() {
                        "value" => value = Some(map.next_value::<f64>()?),
                        "unit" => unit = Some(map.next_value::<String>()?),
                        other => return Err(de::Error::unknown_field(other, &["value", "unit"])),
                    }
                }
                Ok(Qty {
                    value: value.ok_or_else(|| de::Error::missing_field("value"))?,
                    unit: unit.unwrap_or_default(),
                })
            }
        }

        de.deserialize_any(QtyVisitor)
    }
}
