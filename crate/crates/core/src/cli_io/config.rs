//! Plain-text run configuration.
//!
//! ```text
//! # comment
//! command = taper-sweep
//! seed = 7
//!
//! [taper]
//! tip_radius = 250 nm
//!
//! [sweep]
//! overlap_length = 5..40 step 5 um      # inclusive range
//! direction = both                      # bare word
//! ```
//!
//! Keys before the first `[section]` are run-level. Physical quantities need a
//! unit suffix (`490nm` and `490 nm` both parse); dimensionless values take
//! none. Lists are `a, b, c unit`, where items without a unit inherit the last
//! one. Paths and strings may be quoted.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::schema::{self, Command, Fallback, KeySpec, Kind, Section};
use super::units::{self, format_number, split_number, Dimension};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    List(Vec<f64>),
    Integer(u64),
    Bool(bool),
    Text(String),
    Words(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Default,
    User,
    CommandLine,
}

/// One resolved key; numbers are in the dimension's canonical unit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Setting {
    pub value: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub unit: Option<&'static str>,
    pub provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigErrorKind {
    Syntax(String),
    UnknownCommand(String),
    UnknownSection { section: String, command: &'static str },
    UnknownKey { command: &'static str },
    DuplicateKey { first_line: usize },
    DuplicateSection { first_line: usize },
    MissingKey,
    MissingUnit { expected: Dimension },
    UnknownUnit(String),
    UnexpectedUnit(String),
    WrongDimension { unit: String, found: Dimension, expected: Dimension },
    OutOfRange { text: String, bound: String },
    InvalidValue(String),
}

/// Config rejection, with the offending line when there is one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub kind: ConfigErrorKind,
}

impl ConfigError {
    fn new(line: Option<usize>, key: Option<&str>, kind: ConfigErrorKind) -> Self {
        Self { line, key: key.map(str::to_string), kind }
    }

    pub fn code(&self) -> &'static str {
        use ConfigErrorKind::*;
        match self.kind {
            Syntax(_) => "config.syntax",
            UnknownCommand(_) => "config.unknown_command",
            UnknownSection { .. } => "config.unknown_section",
            UnknownKey { .. } => "config.unknown_key",
            DuplicateKey { .. } => "config.duplicate_key",
            DuplicateSection { .. } => "config.duplicate_section",
            MissingKey => "config.missing_key",
            MissingUnit { .. } => "config.missing_unit",
            UnknownUnit(_) => "config.unknown_unit",
            UnexpectedUnit(_) => "config.unexpected_unit",
            WrongDimension { .. } => "config.wrong_dimension",
            OutOfRange { .. } => "config.out_of_range",
            InvalidValue(_) => "config.invalid_value",
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConfigErrorKind::*;
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        let key = self.key.as_deref().unwrap_or("?");
        match &self.kind {
            Syntax(msg) => write!(f, "{msg}"),
            UnknownCommand(name) => {
                let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
                write!(f, "unknown command {name:?} (one of {})", names.join(", "))
            }
            UnknownSection { section, command } => write!(f, "section [{section}] is not used by {command}"),
            UnknownKey { command } => write!(f, "unknown key `{key}` for {command}"),
            DuplicateKey { first_line } => write!(f, "duplicate key `{key}` (first set on line {first_line})"),
            DuplicateSection { first_line } => {
                write!(f, "section [{key}] repeated (first opened on line {first_line})")
            }
            MissingKey => write!(f, "missing required key `{key}`"),
            MissingUnit { expected } => {
                write!(f, "`{key}` needs a {} unit ({})", expected.name(), units::suffixes(*expected).join(", "))
            }
            UnknownUnit(u) => write!(f, "`{key}`: unknown unit {u:?}"),
            UnexpectedUnit(u) => write!(f, "`{key}` is dimensionless but has unit {u:?}"),
            WrongDimension { unit, found, expected } => {
                write!(f, "`{key}`: {unit} is a {} unit but a {} is expected", found.name(), expected.name())
            }
            OutOfRange { text, bound } => write!(f, "`{key}` = {text} is out of range (must be {bound})"),
            InvalidValue(msg) => write!(f, "`{key}`: {msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Validated configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    command: Command,
    settings: BTreeMap<String, Setting>,
    /// Directory that relative input paths are resolved against.
    base_dir: PathBuf,
}

struct Raw<'a> {
    section: &'a str,
    key: &'a str,
    text: &'a str,
    line: usize,
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (k, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..k],
            _ => {}
        }
    }
    line
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn tokenize(text: &str) -> Result<Vec<Raw<'_>>, ConfigError> {
    let mut out = Vec::new();
    let mut section = "";
    let mut sections: HashMap<&str, usize> = HashMap::new();
    let mut keys: HashMap<(&str, &str), usize> = HashMap::new();
    for (k, raw_line) in text.lines().enumerate() {
        let line = k + 1;
        let t = strip_comment(raw_line).trim();
        if t.is_empty() {
            continue;
        }
        if let Some(rest) = t.strip_prefix('[') {
            let name = rest.strip_suffix(']').map(str::trim).filter(|n| is_identifier(n)).ok_or_else(|| {
                ConfigError::new(Some(line), None, ConfigErrorKind::Syntax(format!("malformed section header {t:?}")))
            })?;
            if let Some(&first_line) = sections.get(name) {
                return Err(ConfigError::new(Some(line), Some(name), ConfigErrorKind::DuplicateSection { first_line }));
            }
            sections.insert(name, line);
            section = name;
            continue;
        }
        let Some((key, value)) = t.split_once('=') else {
            return Err(ConfigError::new(
                Some(line),
                None,
                ConfigErrorKind::Syntax(format!("expected `key = value`, got {t:?}")),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        if !is_identifier(key) {
            return Err(ConfigError::new(Some(line), None, ConfigErrorKind::Syntax(format!("invalid key {key:?}"))));
        }
        let full = qualified(section, key);
        if value.is_empty() {
            return Err(ConfigError::new(
                Some(line),
                Some(&full),
                ConfigErrorKind::Syntax(format!("`{full}` has no value")),
            ));
        }
        if let Some(&first_line) = keys.get(&(section, key)) {
            return Err(ConfigError::new(Some(line), Some(&full), ConfigErrorKind::DuplicateKey { first_line }));
        }
        keys.insert((section, key), line);
        out.push(Raw { section, key, text: value, line });
    }
    Ok(out)
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn unquote(text: &str) -> Result<&str, ConfigErrorKind> {
    match text.strip_prefix('"') {
        Some(rest) => rest
            .strip_suffix('"')
            .filter(|s| !s.contains('"'))
            .ok_or_else(|| ConfigErrorKind::Syntax(format!("unterminated string {text}"))),
        None if text.contains(char::is_whitespace) => {
            Err(ConfigErrorKind::Syntax(format!("quote values containing spaces: {text}")))
        }
        None => Ok(text),
    }
}

/// Number and canonical factor of one token; `fallback` supplies the unit of
/// list items written without one.
fn quantity(token: &str, dimension: Dimension, fallback: Option<&str>) -> Result<f64, ConfigErrorKind> {
    let (value, suffix) = split_number(token)
        .ok_or_else(|| ConfigErrorKind::Syntax(format!("expected a number, got {:?}", token.trim())))?;
    let suffix = if suffix.is_empty() { fallback.unwrap_or("") } else { suffix };
    if dimension == Dimension::Dimensionless {
        return if suffix.is_empty() { Ok(value) } else { Err(ConfigErrorKind::UnexpectedUnit(suffix.into())) };
    }
    if suffix.is_empty() {
        return Err(ConfigErrorKind::MissingUnit { expected: dimension });
    }
    match units::lookup(suffix) {
        None => Err(ConfigErrorKind::UnknownUnit(suffix.into())),
        Some((found, _)) if found != dimension => {
            Err(ConfigErrorKind::WrongDimension { unit: suffix.into(), found, expected: dimension })
        }
        Some((_, factor)) => Ok(value * factor),
    }
}

const MAX_LIST: usize = 1_000_000;

fn quantity_list(text: &str, dimension: Dimension) -> Result<Vec<f64>, ConfigErrorKind> {
    if let Some((span, step)) = text.split_once("step") {
        let (from, to) = span
            .split_once("..")
            .ok_or_else(|| ConfigErrorKind::Syntax(format!("expected `a..b step s unit`, got {text:?}")))?;
        let unit = split_number(step).map(|(_, u)| u).filter(|u| !u.is_empty());
        let (a, b, s) =
            (quantity(from, dimension, unit)?, quantity(to, dimension, unit)?, quantity(step, dimension, unit)?);
        if !(s > 0.0) || b < a {
            return Err(ConfigErrorKind::InvalidValue(format!("range {text:?} needs a positive step and b >= a")));
        }
        let n = ((b - a) / s * (1.0 + 1e-12) + 1e-9).floor() as usize + 1;
        if n > MAX_LIST {
            return Err(ConfigErrorKind::InvalidValue(format!("range {text:?} has more than {MAX_LIST} points")));
        }
        // Generate in the written unit so that decimal steps stay clean.
        let written: Vec<(f64, &str)> = [from, to, step]
            .iter()
            .filter_map(|t| split_number(t))
            .map(|(v, u)| (v, if u.is_empty() { unit.unwrap_or("") } else { u }))
            .collect();
        let shared = written.iter().all(|w| w.1 == written[2].1);
        let (a0, s0, factor) = match units::lookup(written[2].1) {
            Some((_, f)) if shared => (written[0].0, written[2].0, f),
            None if shared => (written[0].0, written[2].0, 1.0),
            _ => (a, s, 1.0),
        };
        return Ok((0..n).map(|k| (a0 + k as f64 * s0) * factor).collect());
    }
    let items: Vec<&str> = text.split(',').map(str::trim).collect();
    if items.iter().any(|i| i.is_empty()) {
        return Err(ConfigErrorKind::Syntax(format!("empty list item in {text:?}")));
    }
    let last = split_number(items[items.len() - 1]).map(|(_, u)| u).filter(|u| !u.is_empty());
    items.iter().map(|i| quantity(i, dimension, last)).collect()
}

fn parse_value(spec: &KeySpec, text: &str) -> Result<(Value, Option<&'static str>), ConfigErrorKind> {
    let unit = |d: Dimension| (d != Dimension::Dimensionless).then(|| d.canonical());
    let check = |v: f64| {
        if spec.range.contains(v) {
            Ok(())
        } else {
            Err(ConfigErrorKind::OutOfRange {
                text: text.to_string(),
                bound: match spec.kind {
                    Kind::Quantity(d) | Kind::List { dimension: d, .. } => spec.range.describe(d.canonical()),
                    _ => spec.range.describe(""),
                },
            })
        }
    };
    let word = |w: &str, options: &[&str]| -> Result<String, ConfigErrorKind> {
        let w = unquote(w.trim())?;
        if options.contains(&w) {
            Ok(w.to_string())
        } else {
            Err(ConfigErrorKind::InvalidValue(format!("{w:?} is not one of {}", options.join(", "))))
        }
    };
    Ok(match spec.kind {
        Kind::Quantity(d) => {
            let v = quantity(text, d, None)?;
            check(v)?;
            (Value::Number(v), unit(d))
        }
        Kind::List { dimension, len } => {
            let v = quantity_list(text, dimension)?;
            if let Some(n) = len {
                if v.len() != n {
                    return Err(ConfigErrorKind::InvalidValue(format!("expected {n} values, got {}", v.len())));
                }
            }
            v.iter().try_for_each(|&x| check(x))?;
            (Value::List(v), unit(dimension))
        }
        Kind::Integer { min, max } => {
            let v: u64 = text.parse().map_err(|_| match split_number(text) {
                Some((_, u)) if !u.is_empty() => ConfigErrorKind::UnexpectedUnit(u.into()),
                _ => ConfigErrorKind::Syntax(format!("expected a non-negative integer, got {text:?}")),
            })?;
            if v < min || v > max {
                return Err(ConfigErrorKind::OutOfRange {
                    text: text.to_string(),
                    bound: format!(">= {min} and <= {max}"),
                });
            }
            (Value::Integer(v), None)
        }
        Kind::Bool => match text {
            "true" => (Value::Bool(true), None),
            "false" => (Value::Bool(false), None),
            _ => return Err(ConfigErrorKind::InvalidValue(format!("expected true or false, got {text:?}"))),
        },
        Kind::Word(options) => (Value::Text(word(text, options)?), None),
        Kind::WordList(options) => {
            let words = text.split(',').map(|w| word(w, options)).collect::<Result<Vec<_>, _>>()?;
            (Value::Words(words), None)
        }
        Kind::Path => (Value::Text(unquote(text)?.to_string()), None),
    })
}

/// Parse and validate a config document, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw = tokenize(text)?;
    let command_entry = raw
        .iter()
        .find(|r| r.section.is_empty() && r.key == "command")
        .ok_or_else(|| ConfigError::new(None, Some("command"), ConfigErrorKind::MissingKey))?;
    let command = Command::from_name(unquote(command_entry.text).unwrap_or(command_entry.text)).ok_or_else(|| {
        ConfigError::new(
            Some(command_entry.line),
            Some("command"),
            ConfigErrorKind::UnknownCommand(command_entry.text.into()),
        )
    })?;

    let sections: Vec<Section> = std::iter::once(schema::TOP).chain(command.sections().iter().copied()).collect();
    let mut settings = BTreeMap::new();
    for r in &raw {
        let full = qualified(r.section, r.key);
        let section = sections.iter().find(|s| s.name == r.section).ok_or_else(|| {
            ConfigError::new(
                Some(r.line),
                Some(&full),
                ConfigErrorKind::UnknownSection { section: r.section.into(), command: command.name() },
            )
        })?;
        let spec = section.spec(r.key).ok_or_else(|| {
            ConfigError::new(Some(r.line), Some(&full), ConfigErrorKind::UnknownKey { command: command.name() })
        })?;
        let (value, unit) =
            parse_value(spec, r.text).map_err(|kind| ConfigError::new(Some(r.line), Some(&full), kind))?;
        settings.insert(full, Setting { value, unit, provenance: Provenance::User, line: Some(r.line) });
    }
    for section in &sections {
        for spec in section.keys {
            let full = qualified(section.name, spec.key);
            if settings.contains_key(&full) {
                continue;
            }
            match spec.default {
                Fallback::Required => return Err(ConfigError::new(None, Some(&full), ConfigErrorKind::MissingKey)),
                Fallback::Absent => {}
                Fallback::Text(text) => {
                    let (value, unit) =
                        parse_value(spec, text).unwrap_or_else(|e| panic!("default of {full} does not parse: {e:?}"));
                    settings.insert(full, Setting { value, unit, provenance: Provenance::Default, line: None });
                }
            }
        }
    }
    Ok(RunConfig { command, settings, base_dir: PathBuf::from(".") })
}

impl RunConfig {
    pub fn command(&self) -> Command {
        self.command
    }

    pub fn settings(&self) -> &BTreeMap<String, Setting> {
        &self.settings
    }

    pub fn get(&self, key: &str) -> Option<&Setting> {
        self.settings.get(key)
    }

    pub fn is_user_set(&self, key: &str) -> bool {
        self.get(key).is_some_and(|s| s.provenance != Provenance::Default)
    }

    /// Line a key was set on, for errors raised after parsing.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.get(key).and_then(|s| s.line)
    }

    pub fn opt_number(&self, key: &str) -> Option<f64> {
        match self.get(key)?.value {
            Value::Number(v) => Some(v),
            ref other => panic!("`{key}` is not a number: {other:?}"),
        }
    }

    pub fn number(&self, key: &str) -> f64 {
        self.opt_number(key).unwrap_or_else(|| panic!("`{key}` has no value"))
    }

    pub fn opt_list(&self, key: &str) -> Option<&[f64]> {
        match &self.get(key)?.value {
            Value::List(v) => Some(v),
            other => panic!("`{key}` is not a list: {other:?}"),
        }
    }

    pub fn list(&self, key: &str) -> &[f64] {
        self.opt_list(key).unwrap_or_else(|| panic!("`{key}` has no value"))
    }

    pub fn opt_integer(&self, key: &str) -> Option<u64> {
        match self.get(key)?.value {
            Value::Integer(v) => Some(v),
            ref other => panic!("`{key}` is not an integer: {other:?}"),
        }
    }

    pub fn integer(&self, key: &str) -> u64 {
        self.opt_integer(key).unwrap_or_else(|| panic!("`{key}` has no value"))
    }

    pub fn flag(&self, key: &str) -> bool {
        match self.get(key).map(|s| &s.value) {
            Some(Value::Bool(b)) => *b,
            other => panic!("`{key}` is not a flag: {other:?}"),
        }
    }

    pub fn opt_text(&self, key: &str) -> Option<&str> {
        match &self.get(key)?.value {
            Value::Text(t) => Some(t),
            other => panic!("`{key}` is not text: {other:?}"),
        }
    }

    pub fn text(&self, key: &str) -> &str {
        self.opt_text(key).unwrap_or_else(|| panic!("`{key}` has no value"))
    }

    pub fn words(&self, key: &str) -> &[String] {
        match self.get(key).map(|s| &s.value) {
            Some(Value::Words(w)) => w,
            other => panic!("`{key}` is not a word list: {other:?}"),
        }
    }

    pub fn seed(&self) -> u64 {
        self.integer("seed")
    }

    pub fn workers(&self) -> Option<usize> {
        self.opt_integer("workers").map(|w| w as usize)
    }

    /// Output directory. A path written in the config is relative to the
    /// config's directory; defaults and overrides are relative to the
    /// working directory.
    pub fn output(&self) -> PathBuf {
        let p = PathBuf::from(self.text("output"));
        match self.get("output").map(|s| s.provenance) {
            Some(Provenance::User) => self.base_dir.join(p),
            _ => p,
        }
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = dir.into();
        self
    }

    /// Input path of `key`, resolved against the base directory.
    pub fn input_path(&self, key: &str) -> Option<PathBuf> {
        self.opt_text(key).map(|p| self.base_dir.join(p))
    }

    fn set(&mut self, key: &str, value: Value) {
        self.settings
            .insert(key.into(), Setting { value, unit: None, provenance: Provenance::CommandLine, line: None });
    }

    pub fn override_seed(&mut self, seed: u64) {
        self.set("seed", Value::Integer(seed));
    }

    pub fn override_workers(&mut self, workers: usize) {
        self.set("workers", Value::Integer(workers as u64));
    }

    pub fn override_output(&mut self, output: &Path) {
        self.set("output", Value::Text(output.to_string_lossy().into_owned()));
    }

    /// Every resolved value in canonical units, paths made absolute where
    /// possible. Parsing the text gives back the same values.
    pub fn to_text(&self) -> String {
        let sections: Vec<Section> =
            std::iter::once(schema::TOP).chain(self.command.sections().iter().copied()).collect();
        let mut out = String::new();
        for section in &sections {
            if !section.name.is_empty() {
                out.push_str(&format!("\n[{}]\n", section.name));
            }
            for spec in section.keys {
                let full = qualified(section.name, spec.key);
                let Some(setting) = self.get(&full) else { continue };
                let with_unit = |s: String| match setting.unit {
                    Some(u) => format!("{s} {u}"),
                    None => s,
                };
                let text = match &setting.value {
                    Value::Number(v) => with_unit(format_number(*v)),
                    Value::List(v) => with_unit(v.iter().map(|x| format_number(*x)).collect::<Vec<_>>().join(", ")),
                    Value::Integer(v) => v.to_string(),
                    Value::Bool(b) => b.to_string(),
                    Value::Words(w) => w.join(", "),
                    Value::Text(t) if spec.kind == Kind::Path => {
                        let p = if full == "output" { self.output() } else { self.base_dir.join(t) };
                        format!("\"{}\"", std::path::absolute(&p).unwrap_or(p).display())
                    }
                    Value::Text(t) => t.clone(),
                };
                out.push_str(&format!("{} = {text}\n", spec.key));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(text: &str) -> ConfigError {
        parse_config(text).unwrap_err()
    }

    #[test]
    fn minimal_mode_solve() {
        let c = parse_config("command = mode-solve\n[geometry]\nwidth = 490nm\nwavelength = 960 nm\n").unwrap();
        assert_eq!(c.command(), Command::ModeSolve);
        assert!((c.number("geometry.width") - 490e-9).abs() < 1e-20);
        assert_eq!(c.get("geometry.width").unwrap().provenance, Provenance::User);
        assert_eq!(c.get("grid.spacing").unwrap().provenance, Provenance::Default);
        assert!((c.number("grid.spacing") - 10e-9).abs() < 1e-20);
        assert_eq!(c.number("geometry.apex_half_angle"), 36.0);
        assert_eq!(c.text("grid.polarization"), "quasi-tm");
        assert_eq!(c.seed(), 0);
        assert_eq!(c.opt_number("grid.margin"), None);
    }

    #[test]
    fn negative_width_names_the_key() {
        let e = err("command = mode-solve\n[geometry]\nwidth = -10 nm\n");
        assert_eq!(e.line, Some(3));
        assert_eq!(e.key.as_deref(), Some("geometry.width"));
        assert_eq!(e.code(), "config.out_of_range");
        assert!(e.to_string().contains("geometry.width"), "{e}");
    }

    #[test]
    fn duplicates_rejected() {
        let e = err("command = mode-solve\n[geometry]\nwidth = 490 nm\nwidth = 500 nm\n");
        assert_eq!((e.line, e.code()), (Some(4), "config.duplicate_key"));
        let e = err("command = mode-solve\n[grid]\n[geometry]\n[grid]\n");
        assert_eq!((e.line, e.code()), (Some(4), "config.duplicate_section"));
    }

    #[test]
    fn unit_errors() {
        let base = "command = mode-solve\n[geometry]\n";
        assert_eq!(err(&format!("{base}width = 490\n")).code(), "config.missing_unit");
        assert_eq!(err(&format!("{base}width = 490 MHz\n")).code(), "config.wrong_dimension");
        assert_eq!(err(&format!("{base}width = 490 furlong\n")).code(), "config.unknown_unit");
        assert_eq!(err(&format!("{base}cladding_index = 1 nm\n")).code(), "config.unexpected_unit");
        assert_eq!(err(&format!("{base}colour = red\n")).code(), "config.unknown_key");
        assert_eq!(err("command = mode-solve\n[taper]\nwidth = 1 um\n").code(), "config.unknown_section");
        assert_eq!(err("command = teleport\n").code(), "config.unknown_command");
        assert_eq!(err("seed = 1\n").code(), "config.missing_key");
        assert_eq!(
            err("command = eta-wfi\n[interface]\ncoupler = 0.9\nwaveguide = 0.98\n").code(),
            "config.missing_key"
        );
        assert_eq!(err("command = mode-solve\nwidth 490 nm\n").code(), "config.syntax");
    }

    #[test]
    fn lists_and_ranges() {
        let c = parse_config("command = taper-sweep\n[sweep]\noverlap_length = 5..40 step 5 um\n").unwrap();
        let l = c.list("sweep.overlap_length");
        assert_eq!(l.len(), 8);
        assert!((l[7] - 40e-6).abs() < 1e-18);
        let c = parse_config("command = mode-sweep\n[sweep]\nwidth = 0.4 um, 450, 500 nm\n").unwrap();
        let w = c.list("sweep.width");
        assert!((w[0] - 400e-9).abs() < 1e-20 && (w[2] - 500e-9).abs() < 1e-20);
        let c = parse_config("command = fit-saturation\n").unwrap();
        assert_eq!(c.list("synthetic.powers").len(), 20);
        assert_eq!(
            err("command = taper-sweep\n[sweep]\noverlap_length = 40..5 step 5 um\n").code(),
            "config.invalid_value"
        );
        assert_eq!(
            err("command = raman-fit\n[input]\nspectrum = \"a.csv\"\n[peaks]\ne1_window = 1 cm^-1\n").code(),
            "config.invalid_value"
        );
    }

    #[test]
    fn comments_quotes_and_words() {
        let c = parse_config(
            "command = raman-fit # trailing\n[input]\nspectrum = \"my data #1.csv\"\n[peaks]\nlabels = E1, A1\n",
        )
        .unwrap();
        assert_eq!(c.text("input.spectrum"), "my data #1.csv");
        assert_eq!(c.words("peaks.labels"), ["E1", "A1"]);
        assert_eq!(err("command = raman-fit\n[input]\nspectrum = my data.csv\n").code(), "config.syntax");
    }

    #[test]
    fn every_default_parses() {
        for c in Command::ALL {
            let mut text = format!("command = {}\n", c.name());
            match c {
                Command::EtaWfi => text.push_str("[interface]\ntransmission = 0.77\ncoupler = 0.9\nwaveguide = 0.98\n"),
                Command::RamanFit => text.push_str("[input]\nspectrum = \"s.csv\"\n"),
                Command::RamanMap => text.push_str("[input]\nspectra = \"s.csv\"\nreference = \"r.csv\"\n"),
                Command::G2 => text.push_str("[input]\ntags = \"t.bin\"\n"),
                _ => {}
            }
            parse_config(&text).unwrap_or_else(|e| panic!("{}: {e}", c.name()));
        }
    }

    #[test]
    fn canonical_text_round_trips() {
        let c = parse_config(
            "command = taper-sweep\nseed = 3\n[taper]\ntip_radius = 250 nm\nwaveguide_angle = 0.0349 rad\n[sweep]\noverlap_length = 4, 8.5 um\n",
        )
        .unwrap();
        let again = parse_config(&c.to_text()).unwrap();
        for (k, s) in c.settings().iter().filter(|(k, _)| *k != "output") {
            assert_eq!(again.get(k).unwrap().value, s.value, "{k}");
        }
        // The output directory comes back resolved, so it survives a move.
        assert_eq!(again.output(), std::path::absolute(c.output()).unwrap());
    }
}
