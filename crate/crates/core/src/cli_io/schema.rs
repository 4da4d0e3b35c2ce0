//! Keys each command accepts, with kinds, admissible ranges and defaults.

use serde::{Deserialize, Serialize};

use super::units::Dimension::{self, *};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ModeSolve,
    ModeSweep,
    DipoleMap,
    TaperSweep,
    EtaWfi,
    SpinOdmr,
    StrainShift,
    RamanFit,
    RamanMap,
    G2,
    FitSaturation,
    FitOdmr,
    FitRabi,
    FitEcho,
    SimulateEmitter,
}

impl Command {
    pub const ALL: [Command; 15] = [
        Command::ModeSolve,
        Command::ModeSweep,
        Command::DipoleMap,
        Command::TaperSweep,
        Command::EtaWfi,
        Command::SpinOdmr,
        Command::StrainShift,
        Command::RamanFit,
        Command::RamanMap,
        Command::G2,
        Command::FitSaturation,
        Command::FitOdmr,
        Command::FitRabi,
        Command::FitEcho,
        Command::SimulateEmitter,
    ];

    const NAMES: [&'static str; 15] = [
        "mode-solve",
        "mode-sweep",
        "dipole-map",
        "taper-sweep",
        "eta-wfi",
        "spin-odmr",
        "strain-shift",
        "raman-fit",
        "raman-map",
        "g2",
        "fit-saturation",
        "fit-odmr",
        "fit-rabi",
        "fit-echo",
        "simulate-emitter",
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::NAMES.iter().position(|n| *n == name).map(|k| Self::ALL[k])
    }

    /// Sections this command reads, in document order.
    pub fn sections(self) -> &'static [Section] {
        use Command::*;
        match self {
            ModeSolve => &[GEOMETRY, GRID, FIELDS],
            ModeSweep => &[MODE_SWEEP, GEOMETRY_SWEPT, GRID, DIPOLE],
            DipoleMap => &[GEOMETRY, GRID, DIPOLE],
            TaperSweep => &[TAPER, TAPER_SWEEP, EME],
            EtaWfi => &[INTERFACE],
            SpinOdmr => &[SPIN_CONSTANTS, TENSOR, FIELD],
            StrainShift => &[SPIN_CONSTANTS, UNIAXIAL, STARK],
            RamanFit => &[SPECTRUM_INPUT, PEAKS, RAMAN_CONSTANTS],
            RamanMap => &[MAP_INPUT, MAP_PEAKS, RAMAN_CONSTANTS],
            G2 => &[TAG_INPUT, CORRELATION, GATE],
            FitSaturation => &[DATA_INPUT, SATURATION_FIT, SATURATION_SYNTHETIC],
            FitOdmr => &[DATA_INPUT, ODMR_SYNTHETIC],
            FitRabi => &[DATA_INPUT, RABI_SYNTHETIC],
            FitEcho => &[DATA_INPUT, ECHO_FIT, ECHO_SYNTHETIC],
            SimulateEmitter => &[EMITTER, TAG_EXPORT],
        }
    }
}

/// Admissible interval; infinite ends are unbounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Range {
    pub const ANY: Range = Range::new(f64::NEG_INFINITY, f64::INFINITY, false, false);
    pub const POSITIVE: Range = Range::new(0.0, f64::INFINITY, true, false);
    pub const NON_NEGATIVE: Range = Range::new(0.0, f64::INFINITY, false, false);
    /// `(0, 1]`
    pub const FRACTION: Range = Range::new(0.0, 1.0, true, false);
    /// `[0, 1]`
    pub const PROBABILITY: Range = Range::new(0.0, 1.0, false, false);
    /// `[0, 1)`
    pub const BELOW_ONE: Range = Range::new(0.0, 1.0, false, true);
    /// `(0, 1)`
    pub const OPEN_UNIT: Range = Range::new(0.0, 1.0, true, true);

    pub const fn new(lo: f64, hi: f64, lo_open: bool, hi_open: bool) -> Self {
        Self { lo, hi, lo_open, hi_open }
    }

    pub fn contains(&self, v: f64) -> bool {
        let above = if self.lo_open { v > self.lo } else { v >= self.lo };
        let below = if self.hi_open { v < self.hi } else { v <= self.hi };
        above && below
    }

    /// Human-readable bound in the canonical unit, e.g. `> 0 m`.
    pub fn describe(&self, unit: &str) -> String {
        let u = if unit.is_empty() { String::new() } else { format!(" {unit}") };
        let lo = if self.lo_open { ">" } else { ">=" };
        let hi = if self.hi_open { "<" } else { "<=" };
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => format!("{lo} {}{u} and {hi} {}{u}", self.lo, self.hi),
            (true, false) => format!("{lo} {}{u}", self.lo),
            (false, true) => format!("{hi} {}{u}", self.hi),
            (false, false) => "finite".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kind {
    Quantity(Dimension),
    /// Comma list or `a..b step s`; `len` fixes the element count.
    List {
        dimension: Dimension,
        len: Option<usize>,
    },
    Integer {
        min: u64,
        max: u64,
    },
    Bool,
    Word(&'static [&'static str]),
    WordList(&'static [&'static str]),
    Path,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fallback {
    Required,
    /// Optional with no value.
    Absent,
    /// Parsed with the config grammar like user text.
    Text(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeySpec {
    pub key: &'static str,
    pub kind: Kind,
    pub range: Range,
    pub default: Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub name: &'static str,
    pub keys: &'static [KeySpec],
}

impl Section {
    pub fn spec(&self, key: &str) -> Option<&'static KeySpec> {
        self.keys.iter().find(|k| k.key == key)
    }
}

const fn q(key: &'static str, dimension: Dimension, range: Range, default: Fallback) -> KeySpec {
    KeySpec { key, kind: Kind::Quantity(dimension), range, default }
}

const fn list(key: &'static str, dimension: Dimension, range: Range, default: Fallback) -> KeySpec {
    KeySpec { key, kind: Kind::List { dimension, len: None }, range, default }
}

const fn pair(key: &'static str, dimension: Dimension, default: Fallback) -> KeySpec {
    KeySpec { key, kind: Kind::List { dimension, len: Some(2) }, range: Range::POSITIVE, default }
}

const fn int(key: &'static str, min: u64, max: u64, default: Fallback) -> KeySpec {
    KeySpec { key, kind: Kind::Integer { min, max }, range: Range::ANY, default }
}

const fn flag(key: &'static str, default: &'static str) -> KeySpec {
    KeySpec { key, kind: Kind::Bool, range: Range::ANY, default: Fallback::Text(default) }
}

const fn word(key: &'static str, options: &'static [&'static str], default: Fallback) -> KeySpec {
    KeySpec { key, kind: Kind::Word(options), range: Range::ANY, default }
}

const fn path(key: &'static str, default: Fallback) -> KeySpec {
    KeySpec { key, kind: Kind::Path, range: Range::ANY, default }
}

use Fallback::{Absent, Required, Text as D};

/// Keys before the first section header.
pub const TOP: Section = Section {
    name: "",
    keys: &[
        word("command", &Command::NAMES, Required),
        int("seed", 0, u64::MAX, D("0")),
        int("workers", 1, 4096, Absent),
        path("output", D("\"sicwfi-out\"")),
    ],
};

pub const POLARIZATIONS: &[&str] = &["scalar", "quasi-te", "quasi-tm"];

const GEOMETRY_KEYS: &[KeySpec] = &[
    q("width", Length, Range::POSITIVE, D("490 nm")),
    q("apex_half_angle", Angle, Range::new(0.0, 90.0, true, true), D("36 deg")),
    q("wavelength", Length, Range::POSITIVE, D("960 nm")),
    q("cladding_index", Dimensionless, Range::new(1.0, f64::INFINITY, false, false), D("1")),
];

pub const GEOMETRY: Section = Section { name: "geometry", keys: GEOMETRY_KEYS };

/// Geometry whose width and wavelength come from the sweep.
pub const GEOMETRY_SWEPT: Section = Section {
    name: "geometry",
    keys: &[
        q("apex_half_angle", Angle, Range::new(0.0, 90.0, true, true), D("36 deg")),
        q("cladding_index", Dimensionless, Range::new(1.0, f64::INFINITY, false, false), D("1")),
    ],
};

pub const GRID: Section = Section {
    name: "grid",
    keys: &[
        q("spacing", Length, Range::POSITIVE, D("10 nm")),
        q("margin", Length, Range::POSITIVE, Absent),
        int("subsamples", 1, 64, D("8")),
        int("max_modes", 1, 64, D("6")),
        q("degeneracy_tol", Dimensionless, Range::POSITIVE, D("1e-4")),
        word("polarization", POLARIZATIONS, D("quasi-tm")),
        q("decay_floor", Dimensionless, Range::OPEN_UNIT, D("0.05")),
    ],
};

pub const FIELDS: Section = Section { name: "export", keys: &[flag("fields", "true")] };

pub const MODE_SWEEP: Section = Section {
    name: "sweep",
    keys: &[
        list("width", Length, Range::POSITIVE, D("400..700 step 20 nm")),
        list("wavelength", Length, Range::POSITIVE, D("960 nm")),
        flag("coupling", "true"),
    ],
};

pub const DIPOLE: Section = Section {
    name: "dipole",
    keys: &[
        q("x", Dimensionless, Range::ANY, D("0")),
        q("y", Dimensionless, Range::ANY, D("1")),
        q("z", Dimensionless, Range::ANY, D("0")),
    ],
};

pub const TAPER: Section = Section {
    name: "taper",
    keys: &[
        q("waveguide_angle", Angle, Range::new(0.0, 180.0, true, true), D("2 deg")),
        q("fiber_angle", Angle, Range::new(0.0, 180.0, true, true), D("1.95 deg")),
        q("fiber_index", Dimensionless, Range::new(1.0, f64::INFINITY, true, false), D("1.45")),
        q("tip_radius", Length, Range::NON_NEGATIVE, D("0 nm")),
        q("gap", Length, Range::NON_NEGATIVE, D("0 nm")),
        q("wavelength", Length, Range::POSITIVE, D("960 nm")),
        q("width", Length, Range::POSITIVE, D("490 nm")),
        q("apex_half_angle", Angle, Range::new(0.0, 90.0, true, true), D("36 deg")),
    ],
};

pub const DIRECTIONS: &[&str] = &["waveguide-to-fiber", "fiber-to-waveguide", "both"];

pub const TAPER_SWEEP: Section = Section {
    name: "sweep",
    keys: &[
        list("overlap_length", Length, Range::POSITIVE, D("5..40 step 5 um")),
        word("direction", DIRECTIONS, D("waveguide-to-fiber")),
        q("plateau_level", Dimensionless, Range::FRACTION, D("0.8")),
        q("rate_threshold", Dimensionless, Range::POSITIVE, D("0.1")),
    ],
};

pub const EME: Section = Section {
    name: "eme",
    keys: &[
        q("spacing", Length, Range::POSITIVE, D("20 nm")),
        q("margin", Length, Range::POSITIVE, Absent),
        int("subsamples", 1, 64, D("4")),
        int("modes", 1, 64, D("4")),
        int("segments", 1, 100_000, Absent),
        word("polarization", POLARIZATIONS, D("quasi-tm")),
    ],
};

pub const INTERFACE: Section = Section {
    name: "interface",
    keys: &[
        q("transmission", Dimensionless, Range::FRACTION, Required),
        q("coupler", Dimensionless, Range::FRACTION, Required),
        q("waveguide", Dimensionless, Range::FRACTION, Required),
    ],
};

pub const SPIN_CONSTANTS: Section = Section {
    name: "constants",
    keys: &[
        q("d", Frequency, Range::POSITIVE, D("35 MHz")),
        q("xi_para", Frequency, Range::ANY, D("2.8 GHz")),
        q("xi_perp", Frequency, Range::ANY, D("-1.9 GHz")),
        q("gamma_e", Gyromagnetic, Range::ANY, D("28 GHz/T")),
        q("stark", StarkCoefficient, Range::ANY, D("13 Hz/(V/cm)")),
    ],
};

pub const TENSOR: Section = Section {
    name: "strain",
    keys: &[
        q("u_xx", Dimensionless, Range::ANY, D("0")),
        q("u_yy", Dimensionless, Range::ANY, D("0")),
        q("u_zz", Dimensionless, Range::ANY, D("0")),
        q("u_xy", Dimensionless, Range::ANY, D("0")),
        q("u_xz", Dimensionless, Range::ANY, D("0")),
        q("u_yz", Dimensionless, Range::ANY, D("0")),
        path("profile", Absent),
        list("positions", Length, Range::ANY, Absent),
    ],
};

pub const FIELD: Section = Section {
    name: "field",
    keys: &[
        q("b_x", MagneticField, Range::ANY, D("0 T")),
        q("b_y", MagneticField, Range::ANY, D("0 T")),
        q("b_z", MagneticField, Range::ANY, D("0 T")),
    ],
};

pub const UNIAXIAL: Section = Section {
    name: "strain",
    keys: &[q("eps_para", Dimensionless, Range::ANY, D("0")), q("eps_perp", Dimensionless, Range::ANY, D("0"))],
};

pub const STARK: Section =
    Section { name: "stark", keys: &[q("field", ElectricField, Range::NON_NEGATIVE, D("0 V/cm"))] };

pub const PEAK_LABELS: &[&str] = &["E1", "E2", "A1"];

pub const SPECTRUM_INPUT: Section =
    Section { name: "input", keys: &[path("spectrum", Required), path("reference", Absent)] };

const E1_WINDOW: KeySpec = pair("e1_window", Wavenumber, D("788, 806 cm^-1"));
const E2_WINDOW: KeySpec = pair("e2_window", Wavenumber, D("766, 786 cm^-1"));
const A1_WINDOW: KeySpec = pair("a1_window", Wavenumber, D("944, 984 cm^-1"));

pub const PEAKS: Section = Section {
    name: "peaks",
    keys: &[
        KeySpec { key: "labels", kind: Kind::WordList(PEAK_LABELS), range: Range::ANY, default: D("E1, E2, A1") },
        E1_WINDOW,
        E2_WINDOW,
        A1_WINDOW,
    ],
};

pub const MAP_INPUT: Section =
    Section { name: "input", keys: &[path("spectra", Required), path("reference", Required)] };

pub const MAP_PEAKS: Section =
    Section { name: "peaks", keys: &[E1_WINDOW, E2_WINDOW, A1_WINDOW, flag("two_peak", "false")] };

const POTENTIAL: Range = Range::ANY;

pub const RAMAN_CONSTANTS: Section = Section {
    name: "constants",
    keys: &[
        q("a_e1", WavenumberPerStress, POTENTIAL, D("-2.06 cm^-1/GPa")),
        q("b_e1", WavenumberPerStress, POTENTIAL, D("-0.43 cm^-1/GPa")),
        q("a_e2", WavenumberPerStress, POTENTIAL, D("-1.55 cm^-1/GPa")),
        q("b_e2", WavenumberPerStress, POTENTIAL, D("-0.74 cm^-1/GPa")),
        q("a_a1", WavenumberPerStress, POTENTIAL, D("-1.124 cm^-1/GPa")),
        q("b_a1", WavenumberPerStress, POTENTIAL, D("-0.651 cm^-1/GPa")),
        q("c11", Stress, Range::POSITIVE, D("501 GPa")),
        q("c12", Stress, Range::POSITIVE, D("111 GPa")),
        q("c13", Stress, Range::POSITIVE, D("52 GPa")),
        q("c33", Stress, Range::POSITIVE, D("553 GPa")),
    ],
};

pub const TAG_INPUT: Section =
    Section { name: "input", keys: &[path("tags", Required), word("format", &["auto", "binary", "csv"], D("auto"))] };

pub const NORMALIZATIONS: &[&str] = &["raw", "poisson", "long-delay"];

pub const CORRELATION: Section = Section {
    name: "correlation",
    keys: &[
        int("channel_a", 0, 255, D("0")),
        int("channel_b", 0, 255, D("1")),
        q("window", Time, Range::POSITIVE, D("500 ns")),
        q("binwidth", Time, Range::POSITIVE, D("1 ns")),
        word("normalization", NORMALIZATIONS, D("poisson")),
        q("long_delay", Time, Range::POSITIVE, D("300 ns")),
        q("rep_rate", Frequency, Range::POSITIVE, Absent),
        q("half_window", Time, Range::POSITIVE, Absent),
        int("exclude_nearest", 0, 1000, D("2")),
    ],
};

pub const GATE: Section = Section {
    name: "gate",
    keys: &[
        q("period", Time, Range::POSITIVE, Absent),
        q("offset", Time, Range::NON_NEGATIVE, D("0 ps")),
        q("from", Time, Range::NON_NEGATIVE, Absent),
        q("to", Time, Range::NON_NEGATIVE, Absent),
    ],
};

pub const DATA_INPUT: Section = Section { name: "input", keys: &[path("data", Absent)] };

pub const SATURATION_MODELS: &[&str] = &["auto", "hyperbolic", "exponential"];

pub const SATURATION_FIT: Section = Section {
    name: "fit",
    keys: &[
        q("rep_rate", Frequency, Range::POSITIVE, Absent),
        word("model", SATURATION_MODELS, D("auto")),
        flag("linear_background", "true"),
        word("snr", &["ratio", "shot-noise"], D("ratio")),
    ],
};

pub const SATURATION_SYNTHETIC: Section = Section {
    name: "synthetic",
    keys: &[
        word("model", SATURATION_MODELS, D("auto")),
        q("i_s", CountRate, Range::POSITIVE, D("181 kcps")),
        q("p_s", Power, Range::POSITIVE, D("1.25 mW")),
        q("background", RatePerPower, Range::NON_NEGATIVE, D("16 kcps/mW")),
        q("integration", Time, Range::POSITIVE, D("30 s")),
        list("powers", Power, Range::NON_NEGATIVE, D("0.2..4 step 0.2 mW")),
    ],
};

pub const ODMR_SYNTHETIC: Section = Section {
    name: "synthetic",
    keys: &[
        q("center", Frequency, Range::POSITIVE, D("71.6 MHz")),
        q("fwhm", Frequency, Range::POSITIVE, D("13 MHz")),
        q("contrast", Dimensionless, Range::ANY, D("0.05")),
        q("offset", Dimensionless, Range::ANY, D("1")),
        q("noise", Dimensionless, Range::NON_NEGATIVE, D("0.00025")),
        list("frequencies", Frequency, Range::NON_NEGATIVE, D("31.6..111.6 step 0.5 MHz")),
    ],
};

pub const RABI_SYNTHETIC: Section = Section {
    name: "synthetic",
    keys: &[
        q("f_rabi", Frequency, Range::POSITIVE, D("6.65 MHz")),
        q("tau", Time, Range::POSITIVE, D("234 ns")),
        q("amplitude", Dimensionless, Range::ANY, D("0.1")),
        q("phase", Angle, Range::ANY, D("0 deg")),
        q("offset", Dimensionless, Range::ANY, D("1")),
        q("noise", Dimensionless, Range::NON_NEGATIVE, D("0.003")),
        list("times", Time, Range::NON_NEGATIVE, D("0..1196 step 4 ns")),
    ],
};

pub const ECHO_FIT: Section = Section { name: "fit", keys: &[flag("stretched", "false")] };

pub const ECHO_SYNTHETIC: Section = Section {
    name: "synthetic",
    keys: &[
        q("t2", Time, Range::POSITIVE, D("42.5 us")),
        q("stretch", Dimensionless, Range::POSITIVE, D("1")),
        q("amplitude", Dimensionless, Range::ANY, D("0.1")),
        q("offset", Dimensionless, Range::ANY, D("0.5")),
        q("noise", Dimensionless, Range::NON_NEGATIVE, D("0.001")),
        list("delays", Time, Range::NON_NEGATIVE, D("0..150 step 1.25 us")),
    ],
};

pub const EMITTER: Section = Section {
    name: "emitter",
    keys: &[
        word("excitation", &["pulsed", "continuous"], D("pulsed")),
        q("rep_rate", Frequency, Range::POSITIVE, D("10 MHz")),
        q("probability", Dimensionless, Range::FRACTION, D("0.5")),
        q("pump_rate", Frequency, Range::POSITIVE, D("50 MHz")),
        q("lifetime", Time, Range::POSITIVE, D("9 ns")),
        q("shelving_probability", Dimensionless, Range::BELOW_ONE, D("0.005")),
        q("metastable_lifetime", Time, Range::POSITIVE, D("100 ns")),
        q("detection_efficiency", Dimensionless, Range::PROBABILITY, D("0.05")),
        q("background_rate", CountRate, Range::NON_NEGATIVE, D("0 cps")),
        q("g2_target", Dimensionless, Range::BELOW_ONE, Absent),
        q("surface_rate", CountRate, Range::NON_NEGATIVE, Absent),
        q("surface_lifetime", Time, Range::POSITIVE, D("1 ns")),
        q("jitter", Time, Range::NON_NEGATIVE, D("100 ps")),
        q("duration", Time, Range::POSITIVE, D("1 s")),
    ],
};

pub const TAG_EXPORT: Section =
    Section { name: "export", keys: &[word("format", &["binary", "csv", "both"], D("binary"))] };
