//! Unit suffixes accepted in config files. Every suffix belongs to exactly one
//! dimension; values are stored in that dimension's canonical unit.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Length,
    Angle,
    Frequency,
    Time,
    Power,
    CountRate,
    /// Count rate per optical power (linear background slope).
    RatePerPower,
    Stress,
    ElectricField,
    MagneticField,
    Wavenumber,
    /// Raman deformation potential.
    WavenumberPerStress,
    Gyromagnetic,
    /// Frequency shift per applied electric field.
    StarkCoefficient,
    Dimensionless,
}

impl Dimension {
    /// Unit in which values of this dimension are stored.
    pub fn canonical(self) -> &'static str {
        match self {
            Dimension::Length => "m",
            Dimension::Angle => "deg",
            Dimension::Frequency => "Hz",
            Dimension::Time => "s",
            Dimension::Power => "W",
            Dimension::CountRate => "cps",
            Dimension::RatePerPower => "cps/W",
            Dimension::Stress => "GPa",
            Dimension::ElectricField => "V/cm",
            Dimension::MagneticField => "T",
            Dimension::Wavenumber => "cm^-1",
            Dimension::WavenumberPerStress => "cm^-1/GPa",
            Dimension::Gyromagnetic => "Hz/T",
            Dimension::StarkCoefficient => "Hz/(V/cm)",
            Dimension::Dimensionless => "",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Angle => "angle",
            Dimension::Frequency => "frequency",
            Dimension::Time => "time",
            Dimension::Power => "power",
            Dimension::CountRate => "count rate",
            Dimension::RatePerPower => "count rate per power",
            Dimension::Stress => "stress",
            Dimension::ElectricField => "electric field",
            Dimension::MagneticField => "magnetic field",
            Dimension::Wavenumber => "wavenumber",
            Dimension::WavenumberPerStress => "wavenumber per stress",
            Dimension::Gyromagnetic => "gyromagnetic ratio",
            Dimension::StarkCoefficient => "Stark coefficient",
            Dimension::Dimensionless => "dimensionless number",
        }
    }
}

use Dimension::*;

/// Suffix, dimension, factor to the canonical unit.
const UNITS: &[(&str, Dimension, f64)] = &[
    ("nm", Length, 1e-9),
    ("um", Length, 1e-6),
    ("µm", Length, 1e-6),
    ("mm", Length, 1e-3),
    ("m", Length, 1.0),
    ("deg", Angle, 1.0),
    ("rad", Angle, 180.0 / std::f64::consts::PI),
    ("Hz", Frequency, 1.0),
    ("kHz", Frequency, 1e3),
    ("MHz", Frequency, 1e6),
    ("GHz", Frequency, 1e9),
    ("ps", Time, 1e-12),
    ("ns", Time, 1e-9),
    ("us", Time, 1e-6),
    ("µs", Time, 1e-6),
    ("ms", Time, 1e-3),
    ("s", Time, 1.0),
    ("uW", Power, 1e-6),
    ("µW", Power, 1e-6),
    ("mW", Power, 1e-3),
    ("W", Power, 1.0),
    ("cps", CountRate, 1.0),
    ("kcps", CountRate, 1e3),
    ("Mcps", CountRate, 1e6),
    ("cps/W", RatePerPower, 1.0),
    ("cps/mW", RatePerPower, 1e3),
    ("kcps/mW", RatePerPower, 1e6),
    ("Pa", Stress, 1e-9),
    ("MPa", Stress, 1e-3),
    ("GPa", Stress, 1.0),
    ("V/m", ElectricField, 1e-2),
    ("V/cm", ElectricField, 1.0),
    ("kV/cm", ElectricField, 1e3),
    ("T", MagneticField, 1.0),
    ("mT", MagneticField, 1e-3),
    ("G", MagneticField, 1e-4),
    ("cm^-1", Wavenumber, 1.0),
    ("cm^-1/GPa", WavenumberPerStress, 1.0),
    ("Hz/T", Gyromagnetic, 1.0),
    ("MHz/T", Gyromagnetic, 1e6),
    ("GHz/T", Gyromagnetic, 1e9),
    ("MHz/mT", Gyromagnetic, 1e9),
    ("Hz/(V/cm)", StarkCoefficient, 1.0),
    ("kHz/(kV/cm)", StarkCoefficient, 1.0),
];

/// Dimension and canonical factor of a suffix (case-sensitive: `mHz` is not
/// `MHz`).
pub fn lookup(suffix: &str) -> Option<(Dimension, f64)> {
    UNITS.iter().find(|u| u.0 == suffix).map(|u| (u.1, u.2))
}

/// Suffixes of one dimension, for error messages.
pub fn suffixes(dimension: Dimension) -> Vec<&'static str> {
    UNITS.iter().filter(|u| u.1 == dimension).map(|u| u.0).collect()
}

/// Split `"490nm"` or `"490 nm"` into the number and the (possibly empty)
/// suffix.
pub fn split_number(text: &str) -> Option<(f64, &str)> {
    let t = text.trim();
    let b = t.as_bytes();
    let mut k = 0;
    if k < b.len() && (b[k] == b'+' || b[k] == b'-') {
        k += 1;
    }
    let digits_from = k;
    while k < b.len() && (b[k].is_ascii_digit() || b[k] == b'.') {
        k += 1;
    }
    if k == digits_from {
        return None;
    }
    // Exponent only if followed by digits, so a unit may start with `e`.
    if k < b.len() && (b[k] == b'e' || b[k] == b'E') {
        let mut e = k + 1;
        if e < b.len() && (b[e] == b'+' || b[e] == b'-') {
            e += 1;
        }
        if e < b.len() && b[e].is_ascii_digit() {
            while e < b.len() && b[e].is_ascii_digit() {
                e += 1;
            }
            k = e;
        }
    }
    let value: f64 = t[..k].parse().ok()?;
    value.is_finite().then(|| (value, t[k..].trim()))
}

/// Shortest text that parses back to exactly `value`.
pub fn format_number(value: f64) -> String {
    let a = value.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{value}")
    } else {
        format!("{value:e}")
    }
}
