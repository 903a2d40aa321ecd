//! Run configuration: a TOML document with a `pipeline` tag, optional
//! `seed`/`format`/`output`, and one section per pipeline. Unknown keys are
//! rejected everywhere. `key=value` overrides land in the active section
//! unless they name a top-level key or start with a section name; other
//! dotted keys nest inside the active section.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use solerlab::evolve::{Alpha, Splitting, Window};
use solerlab::radial::RadialPotential;
use solerlab::{BigRational, Complex64};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Titchmarsh,
    Bootstrap,
    Certificate,
    DiracEigen,
    BuildSoliton,
    Residual,
    Evolve,
    Spectrum,
}

impl Pipeline {
    pub fn section(self) -> &'static str {
        match self {
            Pipeline::Titchmarsh => "titchmarsh",
            Pipeline::Bootstrap => "bootstrap",
            Pipeline::Certificate => "certificate",
            Pipeline::DiracEigen => "dirac-eigen",
            Pipeline::BuildSoliton => "build-soliton",
            Pipeline::Residual => "residual",
            Pipeline::Evolve => "evolve",
            Pipeline::Spectrum => "spectrum",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub pipeline: Pipeline,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub titchmarsh: TitchmarshParams,
    #[serde(default)]
    pub bootstrap: Option<BootstrapParams>,
    #[serde(default)]
    pub certificate: Option<CertificateParams>,
    #[serde(default, rename = "dirac-eigen")]
    pub dirac_eigen: DiracEigenParams,
    #[serde(default, rename = "build-soliton")]
    pub build_soliton: WaveParams,
    #[serde(default)]
    pub residual: ResidualParams,
    #[serde(default)]
    pub evolve: EvolveParams,
    #[serde(default)]
    pub spectrum: SpectrumParams,
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TitchmarshParams {
    pub pairs: usize,
    pub laws_cases: usize,
    pub refine_n_x: usize,
    pub refine_n_omega: usize,
    pub refine_levels: usize,
    pub min_ratio: f64,
    /// Optional distribution descriptors checked in addition to the suites.
    pub f: Option<PathBuf>,
    pub g: Option<PathBuf>,
}

impl Default for TitchmarshParams {
    fn default() -> Self {
        Self {
            pairs: 100,
            laws_cases: 1000,
            refine_n_x: 41,
            refine_n_omega: 81,
            refine_levels: 3,
            min_ratio: 1.5,
            f: None,
            g: None,
        }
    }
}

/// An exact rational given as `"p/q"`, `"p"` or an integer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalValue {
    Int(i64),
    Text(String),
}

impl RationalValue {
    pub fn parse(&self) -> Result<BigRational, CliError> {
        let text = match self {
            RationalValue::Int(i) => i.to_string(),
            RationalValue::Text(s) => s.trim().to_string(),
        };
        text.parse::<BigRational>().map_err(|_| CliError::Config(format!("kappa: {text:?} is not a rational p/q")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapParams {
    pub n: u32,
    pub kappa: RationalValue,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_max_iter() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateParams {
    /// Ascending coefficients of `A`.
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    /// Ascending coefficients of `B`; `[1]` for the pure-root family.
    #[serde(rename = "B", default = "one")]
    pub b: Vec<f64>,
    #[serde(rename = "N")]
    pub root_order: u32,
    #[serde(default = "plus")]
    pub sign: i32,
    /// Dimension used to classify `κ`.
    #[serde(default = "three")]
    pub n: u32,
    pub tau_max: Option<f64>,
    pub samples: Option<usize>,
    #[serde(default = "cert_tol")]
    pub tolerance: f64,
}

fn one() -> Vec<f64> {
    vec![1.0]
}
fn plus() -> i32 {
    1
}
fn three() -> u32 {
    3
}
fn cert_tol() -> f64 {
    1e-10
}

/// Potential for the Dirac problem: the tuned Gaussian scaled to `(m, ω)`,
/// or an explicit potential used as `V` directly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialChoice {
    Named(String),
    Explicit(RadialPotential),
}

impl Default for PotentialChoice {
    fn default() -> Self {
        PotentialChoice::Named("tuned".into())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelSpec {
    pub nodes: usize,
    pub guess: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiracEigenParams {
    pub mass: f64,
    pub omega: f64,
    pub potential: PotentialChoice,
    pub r_max: Option<f64>,
    pub n_r: Option<usize>,
    /// Defaults to the ground level near `ω` and the first excited level
    /// near `(m+ω)/2`.
    pub levels: Option<Vec<LevelSpec>>,
    pub matrix_check: bool,
    pub matrix_tolerance: f64,
}

impl Default for DiracEigenParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega: 0.95,
            potential: PotentialChoice::default(),
            r_max: None,
            n_r: None,
            levels: None,
            matrix_check: true,
            matrix_tolerance: 1e-6,
        }
    }
}

/// A complex amplitude written as a real number or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    pub fn value(self) -> Complex64 {
        match self {
            Amplitude::Real(x) => Complex64::new(x, 0.0),
            Amplitude::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveParams {
    pub mass: f64,
    pub omega: f64,
    /// `(a₀, a₁, b₀, b₁)`.
    pub amplitudes: [Amplitude; 4],
    pub r_max: Option<f64>,
    pub n_r: Option<usize>,
}

impl Default for WaveParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega: 0.95,
            amplitudes: [Amplitude::Real(1.0), Amplitude::Real(0.1), Amplitude::Real(0.2), Amplitude::Real(0.1)],
            r_max: None,
            n_r: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResidualParams {
    /// Existing bundle; when absent the wave is built from `wave`.
    pub wave_bundle: Option<PathBuf>,
    pub wave: WaveParams,
    pub times: Vec<f64>,
    pub n_theta: usize,
    pub n_phi: usize,
    /// Rebuild at half `Δr` and report the ratio (built waves only).
    pub refine: bool,
    pub ratio_range: [f64; 2],
}

impl Default for ResidualParams {
    fn default() -> Self {
        Self {
            wave_bundle: None,
            wave: WaveParams::default(),
            times: vec![0.0, 0.37, 1.1],
            n_theta: 8,
            n_phi: 16,
            refine: true,
            ratio_range: [3.0, 5.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelTag {
    #[default]
    Nls,
    Nlkg,
}

/// Initial data on the periodic box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// `Σ amplitude_j·sech(x − center_j)`.
    Sech { amplitudes: Vec<f64>, centers: Vec<f64> },
    /// `amplitude·e^{ikx}`; `k` is snapped to the nearest box wavenumber.
    PlaneWave { amplitude: f64, k: f64 },
    /// `amplitude·exp(−(x−center)²/width²)`.
    Gaussian { amplitude: f64, width: f64, center: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvolveParams {
    pub model: ModelTag,
    pub l: f64,
    pub n_x: usize,
    pub dt: Option<f64>,
    pub t_final: f64,
    pub stride: usize,
    pub splitting: Splitting,
    pub alpha: Option<Alpha>,
    pub mass: f64,
    pub initial: Option<InitialData>,
    /// Relative drift bound for mass (NLS) or energy (NLKG).
    pub drift_tolerance: Option<f64>,
    /// When set, asserts `max modulus variance ≤` this value.
    pub max_variance: Option<f64>,
}

impl Default for EvolveParams {
    fn default() -> Self {
        Self {
            model: ModelTag::Nls,
            l: 40.0,
            n_x: 1024,
            dt: None,
            t_final: 20.0,
            stride: 10,
            splitting: Splitting::Yoshida4,
            alpha: None,
            mass: 1.0,
            initial: None,
            drift_tolerance: None,
            max_variance: None,
        }
    }
}

/// NLS soliton step: 15080 steps per `6π`, so stored snapshots tile
/// the spectral window exactly.
pub const SOLITON_DT: f64 = 6.0 * std::f64::consts::PI / 15080.0;

impl EvolveParams {
    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(match self.model {
            ModelTag::Nls => SOLITON_DT,
            ModelTag::Nlkg => 0.005,
        })
    }

    pub fn alpha(&self) -> Alpha {
        self.alpha.clone().unwrap_or(match self.model {
            ModelTag::Nls => Alpha::Power { coef: -1.0, exponent: 1.0 },
            ModelTag::Nlkg => Alpha::Power { coef: 1.0, exponent: 1.0 },
        })
    }

    pub fn initial(&self) -> InitialData {
        self.initial.clone().unwrap_or(match self.model {
            ModelTag::Nls => InitialData::Sech { amplitudes: vec![2f64.sqrt()], centers: vec![0.0] },
            ModelTag::Nlkg => InitialData::Gaussian { amplitude: 0.3, width: 2.0, center: 0.0 },
        })
    }

    pub fn drift_tolerance(&self) -> f64 {
        self.drift_tolerance.unwrap_or(match self.model {
            ModelTag::Nls => 1e-10,
            ModelTag::Nlkg => 1e-6,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumParams {
    /// Binary trajectory file; when absent the `evolve` section is run.
    pub trajectory: Option<PathBuf>,
    pub probes: Vec<f64>,
    /// Trailing snapshots used; all when absent.
    pub span: Option<usize>,
    pub window: Window,
    pub threshold_rel: f64,
    pub expect_single_bin: bool,
    /// Expected peak frequencies per probe, each within one bin.
    pub expect_peaks: Option<Vec<f64>>,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self {
            trajectory: None,
            probes: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            span: Some(1508),
            window: Window::Hann,
            threshold_rel: 1e-6,
            expect_single_bin: false,
            expect_peaks: None,
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

const TOP_LEVEL: [&str; 4] = ["pipeline", "output", "seed", "format"];
const SECTIONS: [&str; 8] =
    ["titchmarsh", "bootstrap", "certificate", "dirac-eigen", "build-soliton", "residual", "evolve", "spectrum"];

/// Loads `file` (if any), then applies the pipeline tag and `key=value`
/// overrides, and deserializes with unknown keys rejected.
pub fn assemble(
    file: Option<&Path>,
    pipeline: Option<Pipeline>,
    overrides: &[String],
) -> Result<toml::Table, CliError> {
    let mut table = match file {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            toml::from_str::<toml::Table>(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    if let Some(p) = pipeline {
        let tag = toml::Value::String(p.section().into());
        if let Some(existing) = table.get("pipeline") {
            if existing != &tag {
                return Err(CliError::Config(format!("config pipeline {existing} conflicts with command {}", p.section())));
            }
        }
        table.insert("pipeline".into(), tag);
    }
    let active = table.get("pipeline").and_then(|v| v.as_str()).map(str::to_string);
    for ov in overrides {
        let (key, raw) = ov
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override {ov:?} is not key=value")))?;
        let key = key.trim();
        let value = parse_value(raw.trim());
        let mut path: Vec<&str> = key.split('.').map(str::trim).collect();
        if path.len() == 1 && TOP_LEVEL.contains(&key) {
            table.insert(key.to_string(), value);
            continue;
        }
        if !SECTIONS.contains(&path[0]) {
            let s = active.as_deref().ok_or_else(|| CliError::Config(format!("override {key:?} needs a pipeline")))?;
            path.insert(0, s);
        }
        let (name, parents) = path.split_last().expect("nonempty path");
        let mut t = &mut table;
        for s in parents {
            let entry = t.entry(s.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
            t = entry.as_table_mut().ok_or_else(|| CliError::Config(format!("{s} is not a table")))?;
        }
        t.insert(name.to_string(), value);
    }
    Ok(table)
}

pub fn parse(table: toml::Table) -> Result<RunConfig, CliError> {
    let cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {x}")))
    }
}

fn gap(name: &str, m: f64, omega: f64) -> Result<(), CliError> {
    positive(&format!("{name}.mass"), m)?;
    if omega > 0.0 && omega < m {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name}.omega must lie in (0, mass), got {omega}")))
    }
}

fn grid_opts(name: &str, r_max: Option<f64>, n_r: Option<usize>) -> Result<(), CliError> {
    if let Some(r) = r_max {
        positive(&format!("{name}.r_max"), r)?;
    }
    if let Some(n) = n_r {
        if n < 4 {
            return Err(CliError::Config(format!("{name}.n_r must be at least 4")));
        }
    }
    Ok(())
}

fn wave(name: &str, w: &WaveParams) -> Result<(), CliError> {
    gap(name, w.mass, w.omega)?;
    grid_opts(name, w.r_max, w.n_r)?;
    if w.amplitudes.iter().any(|a| !a.value().re.is_finite() || !a.value().im.is_finite()) {
        return Err(CliError::Config(format!("{name}.amplitudes must be finite")));
    }
    Ok(())
}

impl RunConfig {
    /// Module preconditions checked before any artifact is written.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.pipeline {
            Pipeline::Titchmarsh => {
                let t = &self.titchmarsh;
                if t.refine_n_x < 2 || t.refine_n_omega < 2 || t.refine_levels < 2 {
                    return Err(CliError::Config("titchmarsh refinement needs n_x, n_omega >= 2 and >= 2 levels".into()));
                }
                if t.f.is_some() != t.g.is_some() {
                    return Err(CliError::Config("titchmarsh.f and titchmarsh.g go together".into()));
                }
            }
            Pipeline::Bootstrap => {
                let b = self.bootstrap.as_ref().ok_or_else(|| CliError::Config("missing [bootstrap] n and kappa".into()))?;
                if b.n < 1 {
                    return Err(CliError::Config("bootstrap.n must be >= 1".into()));
                }
                let k = b.kappa.parse()?;
                if k <= BigRational::from_integer(0.into()) {
                    return Err(CliError::Config("bootstrap.kappa must be positive".into()));
                }
                if b.max_iter == 0 {
                    return Err(CliError::Config("bootstrap.max_iter must be >= 1".into()));
                }
            }
            Pipeline::Certificate => {
                let c = self.certificate.as_ref().ok_or_else(|| CliError::Config("missing [certificate] A and N".into()))?;
                if c.root_order == 0 {
                    return Err(CliError::Config("certificate.N must be >= 1".into()));
                }
                if c.sign != 1 && c.sign != -1 {
                    return Err(CliError::Config("certificate.sign must be 1 or -1".into()));
                }
                if c.n == 0 {
                    return Err(CliError::Config("certificate.n must be >= 1".into()));
                }
                if let Some(t) = c.tau_max {
                    positive("certificate.tau_max", t)?;
                }
                positive("certificate.tolerance", c.tolerance)?;
            }
            Pipeline::DiracEigen => {
                let d = &self.dirac_eigen;
                gap("dirac-eigen", d.mass, d.omega)?;
                grid_opts("dirac-eigen", d.r_max, d.n_r)?;
                if let PotentialChoice::Named(n) = &d.potential {
                    if n != "tuned" {
                        return Err(CliError::Config(format!("dirac-eigen.potential: unknown name {n:?}")));
                    }
                }
                for l in d.levels.iter().flatten() {
                    if !(l.guess > 0.0 && l.guess < d.mass) {
                        return Err(CliError::Config(format!("level guess {} outside (0, mass)", l.guess)));
                    }
                }
            }
            Pipeline::BuildSoliton => wave("build-soliton", &self.build_soliton)?,
            Pipeline::Residual => {
                let r = &self.residual;
                wave("residual.wave", &r.wave)?;
                if r.times.is_empty() || r.n_theta == 0 || r.n_phi == 0 {
                    return Err(CliError::Config("residual needs times and a nonempty sphere rule".into()));
                }
            }
            Pipeline::Evolve => self.evolve.validate()?,
            Pipeline::Spectrum => {
                let s = &self.spectrum;
                if s.trajectory.is_none() {
                    self.evolve.validate()?;
                }
                if s.probes.is_empty() {
                    return Err(CliError::Config("spectrum.probes is empty".into()));
                }
                if !(s.threshold_rel >= 0.0) {
                    return Err(CliError::Config("spectrum.threshold_rel must be >= 0".into()));
                }
            }
        }
        Ok(())
    }
}

impl EvolveParams {
    fn validate(&self) -> Result<(), CliError> {
        positive("evolve.l", self.l)?;
        if self.n_x < 4 || self.n_x % 2 != 0 {
            return Err(CliError::Config("evolve.n_x must be even and >= 4".into()));
        }
        positive("evolve.dt", self.dt())?;
        if !(self.t_final >= 0.0) {
            return Err(CliError::Config("evolve.t_final must be >= 0".into()));
        }
        if self.stride == 0 {
            return Err(CliError::Config("evolve.stride must be >= 1".into()));
        }
        if self.model == ModelTag::Nlkg {
            positive("evolve.mass", self.mass)?;
            let dx = 2.0 * self.l / self.n_x as f64;
            if self.dt() > 0.5 * dx {
                return Err(CliError::Config(format!("evolve.dt exceeds the stability guard 0.5·dx = {}", 0.5 * dx)));
            }
        }
        self.alpha().validate().map_err(|e| CliError::Config(e.to_string()))?;
        if let InitialData::Sech { amplitudes, centers } = self.initial() {
            if amplitudes.len() != centers.len() || amplitudes.is_empty() {
                return Err(CliError::Config("evolve.initial: amplitudes and centers must match".into()));
            }
        }
        Ok(())
    }
}
