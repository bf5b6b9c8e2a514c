//! Experiment configuration in sectioned `key = value` form.
//!
//! ```text
//! [system]
//! qubits = 2
//! frame = tetrahedron        # tetrahedron | cardinal6 | path to a frame file
//!
//! [state]
//! initial = singlet          # zero | ghz | singlet | raw
//! matrix = rho.mat           # for initial = raw
//! epsilon = eta              # number | eta | from_alpha
//! alpha = 2e-5
//!
//! [circuit]
//! path = bell.circ
//!
//! [measure]
//! specs = all                # or a list such as "zz, xx, z0"
//!
//! [engine]
//! engines = all              # oracle | quasi | lrhv | all
//! molecules = 1000000
//! seed = 1
//!
//! [schedule]
//! mode = discrete            # discrete | quasicontinuous
//! gamma = 4
//! dt = 0.05
//! pulse_duration = 1
//!
//! [bell]
//! chsh = true
//! pair = 0 1
//! resolution = 16
//! domain = xz                # xz | sphere
//! leggett_garg = true
//! lg_qubit = 0
//! lg_axis = z
//! lg_times = 0 1 2
//!
//! [output]
//! csv = out.csv
//! json = out.json
//! ```
//!
//! Relative paths resolve against the configuration file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ini::Ini;
use serde::{Deserialize, Serialize};

use crate::bell::{ScanDomain, MIN_SCAN_RESOLUTION};
use crate::error::{Error, Result};
use crate::lrhv::{UpdateMode, DEFAULT_MOLECULES};
use crate::measurement::{Axis, MeasurementSpec};
use crate::nmr::ROOM_TEMPERATURE_ALPHA;
use crate::oracle::MAX_ORACLE_QUBITS;

/// Largest qubit count for the quasidistribution and hidden-variable engines.
pub const MAX_QUASI_QUBITS: usize = 12;
/// Largest qubit count for which `specs = all` is accepted.
pub const MAX_ALL_SPECS_QUBITS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameChoice {
    Tetrahedron,
    Cardinal6,
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `|0…0⟩`.
    Zero,
    /// `(|0…0⟩ + |1…1⟩)/√2`.
    Ghz,
    /// Singlets on qubit pairs `(0,1), (2,3), …`; an odd last qubit is `|0⟩`.
    SingletPairs,
    /// Density matrix read from a matrix file.
    Raw(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonSource {
    Value(f64),
    /// `η(N)`, the largest value guaranteed unentangleable.
    Eta,
    /// `αN/2^N` from the configured polarization.
    FromAlpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EngineSelection {
    Oracle,
    Quasi,
    Lrhv,
    All,
}

impl EngineSelection {
    pub fn oracle(self) -> bool {
        matches!(self, EngineSelection::Oracle | EngineSelection::All)
    }

    pub fn quasi(self) -> bool {
        matches!(self, EngineSelection::Quasi | EngineSelection::All)
    }

    pub fn lrhv(self) -> bool {
        matches!(self, EngineSelection::Lrhv | EngineSelection::All)
    }
}

impl FromStr for EngineSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oracle" => Ok(EngineSelection::Oracle),
            "quasi" => Ok(EngineSelection::Quasi),
            "lrhv" => Ok(EngineSelection::Lrhv),
            "all" => Ok(EngineSelection::All),
            other => Err(Error::Config(format!("unknown engine {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub mode: UpdateMode,
    pub gamma: f64,
    pub dt: f64,
    pub pulse_duration: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            mode: UpdateMode::Discrete,
            gamma: 1.0,
            dt: 1.0,
            pulse_duration: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeggettGargConfig {
    pub qubit: usize,
    pub axis: Axis,
    pub times: (usize, usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellConfig {
    pub chsh: bool,
    pub pair: (usize, usize),
    pub resolution: usize,
    pub domain: ScanDomain,
    pub leggett_garg: Option<LeggettGargConfig>,
}

impl Default for BellConfig {
    fn default() -> Self {
        BellConfig {
            chsh: false,
            pair: (0, 1),
            resolution: 16,
            domain: ScanDomain::XzPlane,
            leggett_garg: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub num_qubits: usize,
    pub frame: FrameChoice,
    pub initial: InitialState,
    pub epsilon: EpsilonSource,
    pub alpha: f64,
    pub circuit: Option<PathBuf>,
    /// `None` means every spec over `{x, y, z, 0}^N`.
    pub specs: Option<Vec<MeasurementSpec>>,
    pub engines: EngineSelection,
    pub molecules: usize,
    pub seed: u64,
    pub schedule: ScheduleConfig,
    pub bell: BellConfig,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for everything but the qubit count.
    pub fn new(num_qubits: usize) -> Self {
        ExperimentConfig {
            num_qubits,
            frame: FrameChoice::Tetrahedron,
            initial: InitialState::Zero,
            epsilon: EpsilonSource::Eta,
            alpha: ROOM_TEMPERATURE_ALPHA,
            circuit: None,
            specs: None,
            engines: EngineSelection::All,
            molecules: DEFAULT_MOLECULES,
            seed: 0,
            schedule: ScheduleConfig::default(),
            bell: BellConfig::default(),
            csv: None,
            json: None,
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_ini_str(&text, base)
    }

    /// Parses configuration text, resolving relative paths against `base`.
    pub fn from_ini_str(text: &str, base: &Path) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut table = Table::from_ini(&ini)?;
        let resolve = |p: &str| base.join(p);

        let mut cfg = ExperimentConfig::new(table.required("system", "qubits")?);
        if let Some(f) = table.take("system", "frame") {
            cfg.frame = match f.as_str() {
                "tetrahedron" => FrameChoice::Tetrahedron,
                "cardinal6" => FrameChoice::Cardinal6,
                path => FrameChoice::File(resolve(path)),
            };
        }

        let matrix = table.take("state", "matrix");
        if let Some(s) = table.take("state", "initial") {
            cfg.initial = match s.as_str() {
                "zero" => InitialState::Zero,
                "ghz" => InitialState::Ghz,
                "singlet" | "singlet_pairs" => InitialState::SingletPairs,
                "raw" => InitialState::Raw(resolve(matrix.as_deref().ok_or_else(|| {
                    Error::Config("initial = raw needs [state] matrix = PATH".into())
                })?)),
                other => return Err(Error::Config(format!("unknown initial state {other:?}"))),
            };
        }
        if let Some(e) = table.take("state", "epsilon") {
            cfg.epsilon = match e.as_str() {
                "eta" => EpsilonSource::Eta,
                "from_alpha" => EpsilonSource::FromAlpha,
                v => EpsilonSource::Value(parse_value("state", "epsilon", v)?),
            };
        }
        if let Some(a) = table.parsed("state", "alpha")? {
            cfg.alpha = a;
        }

        cfg.circuit = table.take("circuit", "path").map(|p| resolve(&p));

        if let Some(s) = table.take("measure", "specs") {
            cfg.specs = if s == "all" {
                None
            } else {
                Some(
                    s.split(|c: char| c == ',' || c.is_whitespace())
                        .filter(|t| !t.is_empty())
                        .map(str::parse)
                        .collect::<Result<Vec<_>>>()?,
                )
            };
        }

        if let Some(e) = table.parsed("engine", "engines")? {
            cfg.engines = e;
        }
        if let Some(m) = table.parsed("engine", "molecules")? {
            cfg.molecules = m;
        }
        if let Some(s) = table.parsed("engine", "seed")? {
            cfg.seed = s;
        }

        if let Some(m) = table.take("schedule", "mode") {
            cfg.schedule.mode = match m.as_str() {
                "discrete" => UpdateMode::Discrete,
                "quasicontinuous" => UpdateMode::Quasicontinuous,
                other => return Err(Error::Config(format!("unknown schedule mode {other:?}"))),
            };
        }
        if let Some(g) = table.parsed("schedule", "gamma")? {
            cfg.schedule.gamma = g;
        }
        if let Some(d) = table.parsed("schedule", "dt")? {
            cfg.schedule.dt = d;
        }
        if let Some(p) = table.parsed("schedule", "pulse_duration")? {
            cfg.schedule.pulse_duration = p;
        }

        if let Some(c) = table.parsed("bell", "chsh")? {
            cfg.bell.chsh = c;
        }
        if let Some(p) = table.take("bell", "pair") {
            let q = parse_list::<usize>("bell", "pair", &p)?;
            match q[..] {
                [r, s] => cfg.bell.pair = (r, s),
                _ => return Err(Error::Config("[bell] pair needs two qubit indices".into())),
            }
        }
        if let Some(r) = table.parsed("bell", "resolution")? {
            cfg.bell.resolution = r;
        }
        if let Some(d) = table.take("bell", "domain") {
            cfg.bell.domain = match d.as_str() {
                "xz" => ScanDomain::XzPlane,
                "sphere" => ScanDomain::Sphere,
                other => return Err(Error::Config(format!("unknown scan domain {other:?}"))),
            };
        }
        let lg_qubit = table.parsed::<usize>("bell", "lg_qubit")?;
        let lg_axis = table.take("bell", "lg_axis");
        let lg_times = table.take("bell", "lg_times");
        if table.parsed::<bool>("bell", "leggett_garg")?.unwrap_or(false) {
            let axis = match lg_axis {
                Some(a) => match a.parse::<MeasurementSpec>()?.axes[..] {
                    [axis] if !axis.is_zero() => axis,
                    _ => return Err(Error::Config(format!("bad [bell] lg_axis {a:?}"))),
                },
                None => Axis::Z,
            };
            let times = match lg_times {
                Some(t) => match parse_list::<usize>("bell", "lg_times", &t)?[..] {
                    [a, b, c] => (a, b, c),
                    _ => return Err(Error::Config("[bell] lg_times needs three indices".into())),
                },
                None => (0, 1, 2),
            };
            cfg.bell.leggett_garg = Some(LeggettGargConfig {
                qubit: lg_qubit.unwrap_or(0),
                axis,
                times,
            });
        }

        cfg.csv = table.take("output", "csv").map(|p| resolve(&p));
        cfg.json = table.take("output", "json").map(|p| resolve(&p));

        table.finish()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Enforces qubit caps and parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_qubits;
        let fail = |msg: String| Err(Error::Config(msg));
        if n == 0 {
            return fail("need at least one qubit".into());
        }
        if (self.engines.quasi() || self.engines.lrhv()) && n > MAX_QUASI_QUBITS {
            return fail(format!(
                "{n} qubits exceeds the {MAX_QUASI_QUBITS}-qubit cap of the quasidistribution engines"
            ));
        }
        if self.engines == EngineSelection::Oracle && n > MAX_ORACLE_QUBITS {
            return fail(format!(
                "{n} qubits exceeds the {MAX_ORACLE_QUBITS}-qubit cap of the oracle engine"
            ));
        }
        if matches!(self.initial, InitialState::Raw(_)) && n > MAX_ORACLE_QUBITS {
            return fail(format!(
                "raw initial states are limited to {MAX_ORACLE_QUBITS} qubits"
            ));
        }
        if let EpsilonSource::Value(e) = self.epsilon {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::BadEpsilon(e));
            }
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return fail(format!("polarization {} outside (0, 1)", self.alpha));
        }
        match &self.specs {
            None if n > MAX_ALL_SPECS_QUBITS => {
                return fail(format!(
                    "specs = all is limited to {MAX_ALL_SPECS_QUBITS} qubits; list specs explicitly"
                ))
            }
            Some(specs) => {
                for s in specs {
                    s.check_len(n)?;
                }
            }
            None => {}
        }
        if self.molecules == 0 {
            return fail("molecules must be positive".into());
        }
        let s = &self.schedule;
        if !(s.pulse_duration > 0.0) {
            return fail("pulse_duration must be positive".into());
        }
        if s.mode == UpdateMode::Quasicontinuous {
            let p = s.gamma * s.dt;
            if !(p > 0.0 && p <= 1.0) {
                return fail(format!("gamma*dt = {p} outside (0, 1]"));
            }
            let steps = s.pulse_duration / s.dt;
            if (steps - steps.round()).abs() > 1e-9 || steps.round() < 1.0 {
                return fail("pulse_duration must be a positive multiple of dt".into());
            }
        }
        let b = &self.bell;
        if b.chsh {
            let (r, q) = b.pair;
            if r == q || r >= n || q >= n {
                return fail(format!("bad CHSH qubit pair ({r}, {q}) for {n} qubits"));
            }
            if b.resolution < MIN_SCAN_RESOLUTION {
                return fail(format!("scan resolution below {MIN_SCAN_RESOLUTION}"));
            }
        }
        if let Some(lg) = &b.leggett_garg {
            if lg.qubit >= n {
                return fail(format!("Leggett-Garg qubit {} out of range", lg.qubit));
            }
            if !self.engines.lrhv() {
                return fail("Leggett-Garg needs the lrhv engine".into());
            }
        }
        Ok(())
    }

    pub fn spec_list(&self) -> Vec<MeasurementSpec> {
        self.specs
            .clone()
            .unwrap_or_else(|| MeasurementSpec::pauli_grid(self.num_qubits))
    }
}

fn parse_value<T: FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value {value:?} for [{section}] {key}")))
}

fn parse_list<T: FromStr>(section: &str, key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| parse_value(section, key, t))
        .collect()
}

/// Key/value pairs that have not been consumed yet; leftovers are errors.
struct Table {
    entries: BTreeMap<(String, String), String>,
}

impl Table {
    fn from_ini(ini: &Ini) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (section, props) in ini.iter() {
            for (key, value) in props.iter() {
                let section = section.ok_or_else(|| {
                    Error::Config(format!("key {key:?} outside any section"))
                })?;
                let value = value.split('#').next().unwrap_or("").trim().to_owned();
                entries.insert((section.to_ascii_lowercase(), key.to_ascii_lowercase()), value);
            }
        }
        Ok(Table { entries })
    }

    fn take(&mut self, section: &str, key: &str) -> Option<String> {
        self.entries.remove(&(section.to_owned(), key.to_owned()))
    }

    fn parsed<T: FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>> {
        self.take(section, key)
            .map(|v| parse_value(section, key, &v))
            .transpose()
    }

    fn required<T: FromStr>(&mut self, section: &str, key: &str) -> Result<T> {
        self.parsed(section, key)?
            .ok_or_else(|| Error::Config(format!("missing [{section}] {key}")))
    }

    fn finish(self) -> Result<()> {
        match self.entries.keys().next() {
            Some((s, k)) => Err(Error::Config(format!("unknown key [{s}] {k}"))),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ExperimentConfig> {
        ExperimentConfig::from_ini_str(text, Path::new("/cfg"))
    }

    #[test]
    fn full_config() {
        let cfg = parse(
            "[system]\nqubits = 2\nframe = cardinal6\n\
             [state]\ninitial = singlet\nepsilon = 0.1 # explicit\n\
             [circuit]\npath = bell.circ\n\
             [measure]\nspecs = zz, x0\n\
             [engine]\nengines = lrhv\nmolecules = 5000\nseed = 7\n\
             [schedule]\nmode = quasicontinuous\ngamma = 4\ndt = 0.25\npulse_duration = 1\n\
             [bell]\nchsh = true\npair = 1 0\nleggett_garg = true\nlg_axis = x\nlg_times = 0 2 4\n\
             [output]\ncsv = out/r.csv\n",
        )
        .unwrap();
        assert_eq!(cfg.frame, FrameChoice::Cardinal6);
        assert_eq!(cfg.initial, InitialState::SingletPairs);
        assert_eq!(cfg.epsilon, EpsilonSource::Value(0.1));
        assert_eq!(cfg.circuit, Some(PathBuf::from("/cfg/bell.circ")));
        assert_eq!(cfg.spec_list().len(), 2);
        assert_eq!(cfg.engines, EngineSelection::Lrhv);
        assert_eq!((cfg.molecules, cfg.seed), (5000, 7));
        assert_eq!(cfg.schedule.mode, UpdateMode::Quasicontinuous);
        assert_eq!(cfg.bell.pair, (1, 0));
        let lg = cfg.bell.leggett_garg.unwrap();
        assert_eq!((lg.axis, lg.times), (Axis::X, (0, 2, 4)));
        assert_eq!(cfg.csv, Some(PathBuf::from("/cfg/out/r.csv")));
    }

    #[test]
    fn defaults() {
        let cfg = parse("[system]\nqubits = 3\n").unwrap();
        assert_eq!(cfg.epsilon, EpsilonSource::Eta);
        assert_eq!(cfg.engines, EngineSelection::All);
        assert_eq!(cfg.spec_list().len(), 64);
        assert_eq!(cfg.molecules, DEFAULT_MOLECULES);
    }

    #[test]
    fn caps_and_typos() {
        assert!(parse("[system]\nqubits = 13\n[measure]\nspecs = zzzzzzzzzzzzz\n").is_err());
        assert!(parse("[system]\nqubits = 12\n[measure]\nspecs = zzzzzzzzzzzz\n").is_ok());
        assert!(parse("[system]\nqubits = 11\n[engine]\nengines = oracle\n[measure]\nspecs = zzzzzzzzzzz\n").is_err());
        assert!(parse("[system]\nqubits = 8\n").is_err());
        assert!(parse("[system]\nqubits = 2\nqbits = 3\n").is_err());
        assert!(parse("[system]\nqubits = two\n").is_err());
        assert!(parse("[system]\nqubits = 2\n[state]\nepsilon = 1.5\n").is_err());
        assert!(parse("[system]\nqubits = 2\n[measure]\nspecs = zzz\n").is_err());
        assert!(parse(
            "[system]\nqubits = 2\n[schedule]\nmode = quasicontinuous\ngamma = 30\ndt = 0.1\n"
        )
        .is_err());
    }
}
