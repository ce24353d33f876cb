//! Unit conversion constants and the quantity strings of the scenario format.
//!
//! Physical quantities in scenario files are written as `"<number> <unit>"`,
//! e.g. `"55.2 km"` or `"-0.00224 1/bar"`. Internally everything is SI, with
//! the exceptions documented on the individual fields (powers in MW at the
//! scenario level, per-unit inside the power-flow equations).

use std::fmt;

use crate::error::{Error, Result};

/// Pascal per bar.
pub const BAR: f64 = 1.0e5;
/// Seconds per hour.
pub const HOUR: f64 = 3600.0;

/// Physical dimension of a quantity string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Area,
    Pressure,
    InversePressure,
    VolumetricFlow,
    Density,
    Temperature,
    Time,
    Viscosity,
    ActivePower,
    ReactivePower,
    ApparentPower,
    Angle,
    SpecificEnergy,
    ConversionFactor,
}

impl Dimension {
    fn describe(self) -> &'static str {
        match self {
            Dimension::Length => "a length (m, km, mm)",
            Dimension::Area => "an area (m2)",
            Dimension::Pressure => "a pressure (bar, Pa)",
            Dimension::InversePressure => "an inverse pressure (1/bar, 1/Pa)",
            Dimension::VolumetricFlow => "a volumetric flow (m3/s, 1000m3/h)",
            Dimension::Density => "a density (kg/m3)",
            Dimension::Temperature => "a temperature (K)",
            Dimension::Time => "a time (s, min, h)",
            Dimension::Viscosity => "a dynamic viscosity (kg/(m*s), Pa*s)",
            Dimension::ActivePower => "an active power (MW)",
            Dimension::ReactivePower => "a reactive power (MVAr)",
            Dimension::ApparentPower => "an apparent power (MVA)",
            Dimension::Angle => "an angle (deg, rad)",
            Dimension::SpecificEnergy => "a specific energy (MJ/kg)",
            Dimension::ConversionFactor => "a conversion factor (m3/MJ)",
        }
    }

    /// Canonical unit used when writing scenarios; values are stored in it.
    pub fn canonical_unit(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Area => "m2",
            Dimension::Pressure => "bar",
            Dimension::InversePressure => "1/bar",
            Dimension::VolumetricFlow => "m3/s",
            Dimension::Density => "kg/m3",
            Dimension::Temperature => "K",
            Dimension::Time => "s",
            Dimension::Viscosity => "kg/(m*s)",
            Dimension::ActivePower => "MW",
            Dimension::ReactivePower => "MVAr",
            Dimension::ApparentPower => "MVA",
            Dimension::Angle => "deg",
            Dimension::SpecificEnergy => "MJ/kg",
            Dimension::ConversionFactor => "m3/MJ",
        }
    }

    /// Factor converting `unit` into the canonical unit, if `unit` is valid
    /// for this dimension.
    fn factor(self, unit: &str) -> Option<f64> {
        let f = match (self, unit) {
            (Dimension::Length, "m") => 1.0,
            (Dimension::Length, "km") => 1.0e3,
            (Dimension::Length, "mm") => 1.0e-3,
            (Dimension::Area, "m2") => 1.0,
            (Dimension::Pressure, "bar") => 1.0,
            (Dimension::Pressure, "Pa") => 1.0 / BAR,
            (Dimension::InversePressure, "1/bar") => 1.0,
            (Dimension::InversePressure, "1/Pa") => BAR,
            (Dimension::VolumetricFlow, "m3/s") => 1.0,
            (Dimension::VolumetricFlow, "1000m3/h") => 1000.0 / HOUR,
            (Dimension::Density, "kg/m3") => 1.0,
            (Dimension::Temperature, "K") => 1.0,
            (Dimension::Time, "s") => 1.0,
            (Dimension::Time, "min") => 60.0,
            (Dimension::Time, "h") => HOUR,
            (Dimension::Viscosity, "kg/(m*s)") | (Dimension::Viscosity, "Pa*s") => 1.0,
            (Dimension::ActivePower, "MW") => 1.0,
            (Dimension::ReactivePower, "MVAr") => 1.0,
            (Dimension::ApparentPower, "MVA") => 1.0,
            (Dimension::Angle, "deg") => 1.0,
            (Dimension::Angle, "rad") => 180.0 / std::f64::consts::PI,
            (Dimension::SpecificEnergy, "MJ/kg") => 1.0,
            (Dimension::ConversionFactor, "m3/MJ") => 1.0,
            _ => return None,
        };
        Some(f)
    }
}

/// Parses `"<number> <unit>"` into the canonical unit of `dim`.
pub fn parse_quantity(text: &str, dim: Dimension, path: &str) -> Result<f64> {
    let text = text.trim();
    let (number, unit) = match text.split_once(char::is_whitespace) {
        Some((n, u)) => (n, u.trim()),
        None => {
            return Err(Error::UnitMismatch {
                path: path.to_string(),
                expected: dim.describe(),
                found: text.to_string(),
            })
        }
    };
    let value: f64 = number
        .parse()
        .map_err(|_| Error::schema(path, format!("`{number}` is not a number")))?;
    if !value.is_finite() {
        return Err(Error::schema(path, "value must be finite"));
    }
    let factor = dim.factor(unit).ok_or_else(|| Error::UnitMismatch {
        path: path.to_string(),
        expected: dim.describe(),
        found: unit.to_string(),
    })?;
    Ok(value * factor)
}

/// Formats a canonical-unit value so that [`parse_quantity`] reads it back
/// bit-exactly.
pub fn format_quantity(value: f64, dim: Dimension) -> String {
    format!("{} {}", Fmt(value), dim.canonical_unit())
}

struct Fmt(f64);

impl fmt::Display for Fmt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{:?}` is the shortest representation that round-trips.
        write!(f, "{:?}", self.0)
    }
}
