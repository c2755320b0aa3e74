//! Run configuration: a TOML file whose physical keys carry their unit in the
//! key name. Every violation is collected before reporting.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use ionturn::constants::{khz, mhz, ATOMIC_MASS_UNIT, CA40_MASS_AMU, ELEMENTARY_CHARGE};
use ionturn::model::TrapParams;
use ionturn::protocols::{Direction, ProfileKind, SurrogateParams, SwapMode};
use nalgebra::Vector3;
use toml::{Table, Value};

const SECTIONS: &[&str] = &[
    "trap",
    "frequencies",
    "swap",
    "sweep",
    "design",
    "zigzag",
    "barrier",
    "lossbound",
    "threepoint",
];

/// Every problem found in a configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl std::fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for e in &self.0 {
            writeln!(f, "  {e}")?;
        }
        Ok(())
    }
}

/// Reads one section, recording the values actually used (defaults
/// included) and every problem.
struct Section<'a> {
    name: &'static str,
    raw: Option<&'a Table>,
    seen: BTreeSet<&'static str>,
    resolved: Table,
    errors: &'a mut Vec<String>,
}

impl<'a> Section<'a> {
    fn new(root: &'a Table, name: &'static str, errors: &'a mut Vec<String>) -> Self {
        let raw = match root.get(name) {
            Some(Value::Table(t)) => Some(t),
            Some(_) => {
                errors.push(format!("`{name}` must be a table"));
                None
            }
            None => None,
        };
        Self {
            name,
            raw,
            seen: BTreeSet::new(),
            resolved: Table::new(),
            errors,
        }
    }

    fn path(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn fetch(&mut self, key: &'static str, default: Option<Value>) -> Option<Value> {
        self.seen.insert(key);
        match self.raw.and_then(|t| t.get(key)).cloned().or(default) {
            Some(v) => {
                self.resolved.insert(key.into(), v.clone());
                Some(v)
            }
            None => {
                let p = self.path(key);
                self.errors.push(format!("missing key `{p}`"));
                None
            }
        }
    }

    fn optional(&mut self, key: &'static str) -> Option<Value> {
        self.seen.insert(key);
        let v = self.raw.and_then(|t| t.get(key)).cloned();
        if let Some(v) = &v {
            self.resolved.insert(key.into(), v.clone());
        }
        v
    }

    fn invalid(&mut self, key: &str, what: &str, got: &Value) {
        let p = self.path(key);
        self.errors.push(format!("`{p}`: expected {what}, got {got}"));
    }

    fn as_float(&mut self, key: &str, v: Value, positive: bool) -> f64 {
        let x = match v {
            Value::Float(x) => x,
            Value::Integer(i) => i as f64,
            ref other => {
                self.invalid(key, "a number", other);
                return f64::NAN;
            }
        };
        if !x.is_finite() || (positive && x <= 0.0) {
            let what = if positive {
                "a positive number"
            } else {
                "a finite number"
            };
            self.invalid(key, what, &v);
            return f64::NAN;
        }
        x
    }

    /// Required (or defaulted) positive float.
    fn positive(&mut self, key: &'static str, default: Option<f64>) -> f64 {
        match self.fetch(key, default.map(Value::Float)) {
            Some(v) => self.as_float(key, v, true),
            None => f64::NAN,
        }
    }

    fn optional_positive(&mut self, key: &'static str) -> Option<f64> {
        self.optional(key).map(|v| self.as_float(key, v, true))
    }

    fn fraction(&mut self, key: &'static str, default: Option<f64>) -> f64 {
        let x = self.positive(key, default);
        if x >= 1.0 {
            self.invalid(key, "a number in (0, 1)", &Value::Float(x));
            return f64::NAN;
        }
        x
    }

    fn count(&mut self, key: &'static str, default: Option<i64>, min: i64) -> usize {
        match self.fetch(key, default.map(Value::Integer)) {
            Some(Value::Integer(i)) if i >= min => i as usize,
            Some(v) => {
                self.invalid(key, &format!("an integer >= {min}"), &v);
                0
            }
            None => 0,
        }
    }

    fn choice<T: Copy>(&mut self, key: &'static str, default: Option<&str>, options: &[(&str, T)]) -> Option<T> {
        let v = self.fetch(key, default.map(|s| Value::String(s.into())))?;
        self.parse_choice(key, &v, options)
    }

    fn parse_choice<T: Copy>(&mut self, key: &str, v: &Value, options: &[(&str, T)]) -> Option<T> {
        let names: Vec<String> = options.iter().map(|(n, _)| format!("\"{n}\"")).collect();
        if let Value::String(s) = v {
            if let Some((_, t)) = options.iter().find(|(n, _)| n == s) {
                return Some(*t);
            }
        }
        self.invalid(key, &format!("one of {}", names.join(", ")), v);
        None
    }

    fn choices<T: Copy>(&mut self, key: &'static str, default: &[&str], options: &[(&str, T)]) -> Vec<T> {
        let default = Value::Array(default.iter().map(|s| Value::String((*s).into())).collect());
        let Some(v) = self.fetch(key, Some(default)) else {
            return Vec::new();
        };
        match &v {
            Value::Array(items) if !items.is_empty() => items
                .iter()
                .filter_map(|item| self.parse_choice(key, item, options))
                .collect(),
            _ => {
                self.invalid(key, "a non-empty array", &v);
                Vec::new()
            }
        }
    }

    fn finish(self) -> Table {
        if let Some(raw) = self.raw {
            for key in raw.keys() {
                if !self.seen.contains(key.as_str()) {
                    self.errors.push(format!("unknown key `{}.{key}`", self.name));
                }
            }
        }
        self.resolved
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyTriple {
    /// Angular secular frequencies, rad/s.
    pub omega: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapConfig {
    pub n_ions: usize,
    pub profile: ProfileKind,
    pub t_swap: f64,
    pub mode: SwapMode,
    pub direction: Direction,
    pub dt: Option<f64>,
    pub trajectory_every: usize,
    pub settle_periods: f64,
    pub window_periods: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n_ions: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub profiles: Vec<ProfileKind>,
    pub modes: Vec<SwapMode>,
    pub direction: Direction,
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignConfig {
    pub aspect_min: f64,
    pub aspect_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZigzagConfig {
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierConfig {
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub experiment: ionturn::analysis::LossExperiment,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThreePointConfig {
    pub n_ions: usize,
    pub dt: f64,
    pub surrogate: SurrogateParams,
    pub options: ionturn::protocols::ThreePointOptions,
    /// Explicit waypoint positions; `None` selects `path`.
    pub waypoints: Option<Vec<Vector3<f64>>>,
    pub direct: bool,
    pub reruns: usize,
    pub jitter: f64,
    pub seed: u64,
}

/// A parsed configuration with every value in SI units, plus the resolved
/// table (defaults filled in) that reproduces it.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub trap: Option<TrapParams>,
    pub frequencies: Option<FrequencyTriple>,
    pub swap: Option<SwapConfig>,
    pub sweep: Option<SweepConfig>,
    pub design: Option<DesignConfig>,
    pub zigzag: Option<ZigzagConfig>,
    pub barrier: Option<BarrierConfig>,
    pub lossbound: Option<LossConfig>,
    pub threepoint: Option<ThreePointConfig>,
    pub resolved: Table,
}

impl RunConfig {
    pub fn parse(text: &str, command: &str) -> Result<Self, ConfigErrors> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigErrors(vec![format!("cannot parse TOML: {}", e.message())]))?;
        Self::from_table(&root, command)
    }

    /// Validates every section present in `root`; the section named by
    /// `command` and the sections it depends on are read even when absent,
    /// so their missing keys are reported.
    pub fn from_table(root: &Table, command: &str) -> Result<Self, ConfigErrors> {
        let mut errors = Vec::new();
        for key in root.keys() {
            if !SECTIONS.contains(&key.as_str()) {
                errors.push(format!("unknown section `{key}`"));
            }
        }
        let needs = |name: &str| -> bool {
            root.contains_key(name)
                || name == command
                || match name {
                    "trap" => matches!(command, "swap" | "sweep" | "threepoint" | "barrier"),
                    "frequencies" => matches!(command, "swap" | "sweep" | "barrier"),
                    _ => false,
                }
        };
        let mut resolved = Table::new();
        let mut out = RunConfig {
            trap: None,
            frequencies: None,
            swap: None,
            sweep: None,
            design: None,
            zigzag: None,
            barrier: None,
            lossbound: None,
            threepoint: None,
            resolved: Table::new(),
        };

        if needs("frequencies") {
            let mut s = Section::new(root, "frequencies", &mut errors);
            let omega = [
                2.0 * PI * khz_to_hz(s.positive("omega_x_khz", None)),
                2.0 * PI * khz_to_hz(s.positive("omega_y_khz", None)),
                2.0 * PI * khz_to_hz(s.positive("omega_z_khz", None)),
            ];
            resolved.insert("frequencies".into(), Value::Table(s.finish()));
            out.frequencies = Some(FrequencyTriple { omega });
        }
        if needs("trap") {
            let mut s = Section::new(root, "trap", &mut errors);
            let rf_amplitude = s.positive("rf_amplitude_v", Some(300.0));
            let rf_frequency = mhz(s.positive("rf_frequency_mhz", None));
            let mass = s.positive("ion_mass_amu", Some(CA40_MASS_AMU)) * ATOMIC_MASS_UNIT;
            let charge = s.positive("ion_charge_e", Some(1.0)) * ELEMENTARY_CHARGE;
            // The longitudinal (x) secular frequency sets the motional quantum
            // unless given explicitly.
            let default_axial = out.frequencies.map(|f| f.omega[0] / (2.0 * PI) / 1e3);
            let axial = khz(s.positive("axial_reference_khz", default_axial));
            resolved.insert("trap".into(), Value::Table(s.finish()));
            out.trap = Some(TrapParams {
                rf_amplitude,
                rf_frequency,
                ion_mass: mass,
                ion_charge: charge,
                reference_axial_frequency: axial,
            });
        }
        let profiles = [
            ("constant", ProfileKind::ConstantVelocity),
            ("sine", ProfileKind::SineVelocity),
        ];
        let modes = [
            ("pseudopotential", SwapMode::Pseudopotential),
            ("full-rf", SwapMode::FullRf),
        ];
        let directions = [
            ("clockwise", Direction::Clockwise),
            ("anticlockwise", Direction::Anticlockwise),
        ];
        if needs("swap") {
            let mut s = Section::new(root, "swap", &mut errors);
            let n_ions = s.count("n_ions", Some(2), 2);
            let profile = s.choice("profile", None, &profiles);
            let t_swap = s.positive("t_swap_us", None) * 1e-6;
            let mode = s.choice("mode", Some("pseudopotential"), &modes);
            let direction = s.choice("direction", Some("anticlockwise"), &directions);
            let dt = s.optional_positive("dt_ns").map(|v| v * 1e-9);
            let trajectory_every = s.count("trajectory_every", Some(100), 1);
            let settle_periods = s.positive("settle_periods", Some(5.0));
            let window_periods = s.positive("window_periods", Some(2.0));
            resolved.insert("swap".into(), Value::Table(s.finish()));
            if let (Some(profile), Some(mode), Some(direction)) = (profile, mode, direction) {
                out.swap = Some(SwapConfig {
                    n_ions,
                    profile,
                    t_swap,
                    mode,
                    direction,
                    dt,
                    trajectory_every,
                    settle_periods,
                    window_periods,
                });
            }
        }
        if needs("sweep") {
            let mut s = Section::new(root, "sweep", &mut errors);
            let n_ions = s.count("n_ions", Some(2), 2);
            let t_min = s.positive("t_min_us", None) * 1e-6;
            let t_max = s.positive("t_max_us", None) * 1e-6;
            let points = s.count("points", None, 1);
            let profiles = s.choices("profiles", &["constant", "sine"], &profiles);
            let modes = s.choices("modes", &["pseudopotential", "full-rf"], &modes);
            let direction = s.choice("direction", Some("anticlockwise"), &directions);
            let dt = s.optional_positive("dt_ns").map(|v| v * 1e-9);
            if t_max < t_min {
                s.errors
                    .push("`sweep.t_max_us` must not be below `sweep.t_min_us`".into());
            }
            resolved.insert("sweep".into(), Value::Table(s.finish()));
            if let Some(direction) = direction {
                out.sweep = Some(SweepConfig {
                    n_ions,
                    t_min,
                    t_max,
                    points,
                    profiles,
                    modes,
                    direction,
                    dt,
                });
            }
        }
        if needs("design") {
            let mut s = Section::new(root, "design", &mut errors);
            let aspect_min = s.positive("aspect_min", Some(0.2));
            let aspect_max = s.positive("aspect_max", Some(5.0));
            let points = s.count("points", Some(49), 2);
            if aspect_max <= aspect_min {
                s.errors
                    .push("`design.aspect_max` must exceed `design.aspect_min`".into());
            }
            resolved.insert("design".into(), Value::Table(s.finish()));
            out.design = Some(DesignConfig {
                aspect_min,
                aspect_max,
                points,
            });
        }
        if needs("zigzag") {
            let mut s = Section::new(root, "zigzag", &mut errors);
            let n_min = s.count("n_min", Some(2), 2);
            let n_max = s.count("n_max", Some(10), 2);
            if n_max < n_min || n_max > 20 {
                s.errors
                    .push("`zigzag.n_max` must lie between `zigzag.n_min` and 20".into());
            }
            resolved.insert("zigzag".into(), Value::Table(s.finish()));
            out.zigzag = Some(ZigzagConfig { n_min, n_max });
        }
        if needs("barrier") {
            let mut s = Section::new(root, "barrier", &mut errors);
            let offset = s.positive("offset_um", None) * 1e-6;
            resolved.insert("barrier".into(), Value::Table(s.finish()));
            out.barrier = Some(BarrierConfig { offset });
        }
        if needs("lossbound") {
            let mut s = Section::new(root, "lossbound", &mut errors);
            let exchanges = s.count("exchanges_per_sequence", None, 1) as u64;
            let sequences = s.count("sequences_observed", None, 1) as u64;
            let depth = ionturn::constants::mev_to_joules(s.positive("trap_depth_mev", None));
            let confidence = s.fraction("confidence", None);
            let unit = s.choice(
                "trial_unit",
                Some("per-exchange"),
                &[
                    ("per-exchange", ionturn::analysis::TrialUnit::PerExchange),
                    ("per-sequence", ionturn::analysis::TrialUnit::PerSequence),
                ],
            );
            resolved.insert("lossbound".into(), Value::Table(s.finish()));
            if let Some(trial_unit) = unit {
                out.lossbound = Some(LossConfig {
                    experiment: ionturn::analysis::LossExperiment {
                        exchanges_per_sequence: exchanges,
                        sequences_observed: sequences,
                        trap_depth: depth,
                        confidence,
                        trial_unit,
                    },
                });
            }
        }
        if needs("threepoint") {
            let mut s = Section::new(root, "threepoint", &mut errors);
            let n_ions = s.count("n_ions", Some(2), 2);
            let dt = s.positive("dt_ns", Some(5.0)) * 1e-9;
            let d = SurrogateParams::default();
            let surrogate = SurrogateParams {
                rf_secular_frequency: khz(s.positive("surrogate_rf_khz", Some(500.0))),
                quadrupole_fraction: s.positive("quadrupole_fraction", Some(d.quadrupole_fraction)),
                ring_distance: s.positive("ring_distance_um", Some(d.ring_distance * 1e6)) * 1e-6,
                ring_radius: s.positive("ring_radius_um", Some(d.ring_radius * 1e6)) * 1e-6,
                isotropy_point: s.positive("isotropy_point_um", Some(d.isotropy_point * 1e6)) * 1e-6,
                waypoint_offset: s.positive("waypoint_offset_um", Some(d.waypoint_offset * 1e6)) * 1e-6,
                far_point: s.positive("far_point_um", Some(d.far_point * 1e6)) * 1e-6,
            };
            let o = ionturn::protocols::ThreePointOptions::default();
            let options = ionturn::protocols::ThreePointOptions {
                segment_time: s.positive("segment_time_us", Some(o.segment_time * 1e6)) * 1e-6,
                settle_periods: s.positive("settle_periods", Some(o.settle_periods)),
                window_periods: s.positive("window_periods", Some(o.window_periods)),
                samples_per_segment: s.count("samples_per_segment", Some(o.samples_per_segment as i64), 2),
                escape_radius: s.positive("escape_radius_um", Some(o.escape_radius * 1e6)) * 1e-6,
            };
            let path = s.optional("path");
            let waypoints = s.optional("waypoints_um");
            let mut direct = false;
            let mut explicit = None;
            match (path, waypoints) {
                (Some(_), Some(_)) => s
                    .errors
                    .push("`threepoint.path` and `threepoint.waypoints_um` are mutually exclusive".into()),
                (Some(p), None) => {
                    direct = s.parse_choice("path", &p, &[("five-point", false), ("direct", true)]) == Some(true);
                }
                (None, Some(w)) => explicit = parse_waypoints(&mut s, &w),
                (None, None) => {
                    s.resolved.insert("path".into(), Value::String("five-point".into()));
                }
            }
            let reruns = s.count("reruns", Some(10), 1);
            let jitter = s.positive("jitter", Some(0.01));
            let seed = s.count("seed", Some(7), 0) as u64;
            resolved.insert("threepoint".into(), Value::Table(s.finish()));
            out.threepoint = Some(ThreePointConfig {
                n_ions,
                dt,
                surrogate,
                options,
                waypoints: explicit,
                direct,
                reruns,
                jitter,
                seed,
            });
        }
        if errors.is_empty() {
            out.resolved = resolved;
            Ok(out)
        } else {
            Err(ConfigErrors(errors))
        }
    }
}

fn khz_to_hz(v: f64) -> f64 {
    v * 1e3
}

fn parse_waypoints(s: &mut Section<'_>, v: &Value) -> Option<Vec<Vector3<f64>>> {
    let pairs = match v {
        Value::Array(items) if items.len() >= 5 => items,
        other => {
            s.invalid("waypoints_um", "an array of at least five [x, y] pairs", other);
            return None;
        }
    };
    let mut out = Vec::with_capacity(pairs.len());
    for (i, p) in pairs.iter().enumerate() {
        let xy: Option<Vec<f64>> = match p {
            Value::Array(c) if c.len() == 2 => c
                .iter()
                .map(|x| match x {
                    Value::Float(f) if f.is_finite() => Some(*f),
                    Value::Integer(n) => Some(*n as f64),
                    _ => None,
                })
                .collect(),
            _ => None,
        };
        match xy {
            Some(xy) => out.push(Vector3::new(xy[0] * 1e-6, xy[1] * 1e-6, 0.0)),
            None => s.invalid(&format!("waypoints_um[{i}]"), "an [x, y] pair of numbers", p),
        }
    }
    (out.len() == pairs.len()).then_some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn units_are_converted() {
        let c = RunConfig::parse(
            "[trap]\nrf_frequency_mhz = 10.125\n[frequencies]\nomega_x_khz = 120\nomega_y_khz = 230\nomega_z_khz = 790\n[barrier]\noffset_um = 12\n",
            "barrier",
        )
        .unwrap();
        let trap = c.trap.unwrap();
        assert!((trap.rf_frequency - 2.0 * PI * 10.125e6).abs() < 1e-6);
        assert!((trap.reference_axial_frequency - 2.0 * PI * 120e3).abs() < 1e-9);
        assert!((c.frequencies.unwrap().omega[2] - 2.0 * PI * 790e3).abs() < 1e-9);
        assert_eq!(c.barrier.unwrap().offset, 12e-6);
        assert_eq!(c.resolved["trap"]["ion_charge_e"].as_float(), Some(1.0));
    }

    #[test]
    fn all_violations_listed() {
        let err = RunConfig::parse(
            "[trap]\nrf_frequency_mhz = -1\ncolour = 3\n[frequencies]\nomega_x_khz = \"fast\"\n[extra]\n",
            "barrier",
        )
        .unwrap_err();
        let text = err.to_string();
        for needle in [
            "unknown section `extra`",
            "`trap.rf_frequency_mhz`: expected a positive number",
            "unknown key `trap.colour`",
            "`frequencies.omega_x_khz`: expected a number",
            "missing key `frequencies.omega_y_khz`",
            "missing key `frequencies.omega_z_khz`",
            "missing key `barrier.offset_um`",
        ] {
            assert!(text.contains(needle), "{needle} not in {text}");
        }
    }

    #[test]
    fn resolved_table_reparses_identically() {
        let c = RunConfig::parse("[sweep]\nt_min_us = 10\nt_max_us = 100\npoints = 3\n[trap]\nrf_frequency_mhz = 10.125\n[frequencies]\nomega_x_khz = 120\nomega_y_khz = 230\nomega_z_khz = 790\n", "sweep").unwrap();
        let text = toml::to_string(&c.resolved).unwrap();
        let again = RunConfig::parse(&text, "sweep").unwrap();
        assert_eq!(again.resolved, c.resolved);
        assert_eq!(again.sweep, c.sweep);
        assert_eq!(again.trap, c.trap);
    }

    #[test]
    fn waypoints_and_path_exclusive() {
        let err = RunConfig::parse(
            "[trap]\nrf_frequency_mhz = 10.125\naxial_reference_khz = 120\n[threepoint]\npath = \"direct\"\nwaypoints_um = [[0,0],[1,1],[2,0],[1,-1],[0,0]]\n",
            "threepoint",
        )
        .unwrap_err();
        assert!(err.to_string().contains("mutually exclusive"));
    }
}
