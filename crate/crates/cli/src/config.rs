//! Run configuration: embedded presets, TOML files and flag overrides merged into one
//! validated [`RunConfig`].

use std::path::{Path, PathBuf};

use cylinder_core::apps::{ElasticityParams, FkppParams};
use cylinder_core::conjugate::{Fault, Scalar};
use cylinder_core::spectrum::{BaseOperator, Boundary, Coefficient, Grid};
use cylinder_core::waterwave::{Preset, WaterwaveParams};
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::CliError;

/// Presets shipped inside the binary, keyed by name.
pub const PRESETS: [(&str, &str); 10] = [
    ("homogeneous", include_str!("../presets/homogeneous.toml")),
    ("irrotational", include_str!("../presets/irrotational.toml")),
    ("generic-smooth", include_str!("../presets/generic-smooth.toml")),
    ("generic-critical", include_str!("../presets/generic-critical.toml")),
    ("elasticity-front", include_str!("../presets/elasticity-front.toml")),
    ("elasticity-pulse", include_str!("../presets/elasticity-pulse.toml")),
    ("fkpp", include_str!("../presets/fkpp.toml")),
    ("spectrum-dirichlet", include_str!("../presets/spectrum-dirichlet.toml")),
    ("spectrum-robin", include_str!("../presets/spectrum-robin.toml")),
    ("verify", include_str!("../presets/verify.toml")),
];

/// Artifact kinds written to the output directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Application {
    Spectrum,
    Elasticity,
    Fkpp,
    Waterwave,
    Conjugate,
    Verify,
}

impl Application {
    pub fn name(self) -> &'static str {
        match self {
            Application::Spectrum => "spectrum",
            Application::Elasticity => "elasticity",
            Application::Fkpp => "fkpp",
            Application::Waterwave => "waterwave",
            Application::Conjugate => "conjugate",
            Application::Verify => "verify",
        }
    }

    fn default_eps(self) -> Vec<Scalar> {
        let list: &[(i64, i64)] = match self {
            Application::Elasticity | Application::Fkpp => &[(1, 20)],
            Application::Waterwave => &[(1, 100)],
            Application::Conjugate | Application::Verify => &[(-1, 100), (-1, 1000), (1, 1000), (1, 100)],
            Application::Spectrum => &[],
        };
        list.iter().map(|&(p, q)| Scalar::ratio(p, q)).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub application: Option<Application>,
    pub eps: Option<Vec<Scalar>>,
    pub grid: Option<usize>,
    pub format: Option<Vec<Format>>,
    /// Samples per orbit or profile in CSV output.
    pub samples: Option<usize>,
    /// Half-width of the scaled window.
    pub window: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Boundary condition as written in TOML: `"dirichlet"`, `"neumann"` or `{ robin = β }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySpec {
    Dirichlet,
    Neumann,
    Robin(f64),
}

impl From<BoundarySpec> for Boundary {
    fn from(b: BoundarySpec) -> Self {
        match b {
            BoundarySpec::Dirichlet => Boundary::Dirichlet,
            BoundarySpec::Neumann => Boundary::Neumann,
            BoundarySpec::Robin(beta) => Boundary::Robin(beta),
        }
    }
}

/// A coefficient given as a constant or as polynomial coefficients in `y`, lowest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Constant(f64),
    Polynomial(Vec<f64>),
}

impl From<&CoefficientSpec> for Coefficient {
    fn from(c: &CoefficientSpec) -> Self {
        match c {
            CoefficientSpec::Constant(v) => Coefficient::Constant(*v),
            CoefficientSpec::Polynomial(p) => Coefficient::Polynomial(p.clone()),
        }
    }
}

fn zero_coefficient() -> CoefficientSpec {
    CoefficientSpec::Constant(0.0)
}

fn two() -> usize {
    2
}

/// Transversal operator `(a w')' + b w' + c w` on `(y_lo, y_hi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub y_lo: f64,
    pub y_hi: f64,
    pub a: CoefficientSpec,
    #[serde(default = "zero_coefficient")]
    pub b: CoefficientSpec,
    #[serde(default = "zero_coefficient")]
    pub c: CoefficientSpec,
    pub lo: BoundarySpec,
    pub hi: BoundarySpec,
    pub eval_point: Option<f64>,
    /// Number of leading eigenpairs to report.
    #[serde(default = "two")]
    pub count: usize,
}

impl SpectrumSection {
    pub fn operator(&self, n: usize) -> Result<BaseOperator, CliError> {
        let grid = Grid { y_lo: self.y_lo, y_hi: self.y_hi, n };
        let op = BaseOperator::new(grid, (&self.a).into(), (&self.b).into(), (&self.c).into(), self.lo.into(), self.hi.into())
            .map_err(|e| CliError::Config(e.to_string()))?;
        match self.eval_point {
            Some(y) => op.with_eval_point(y).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(op),
        }
    }
}

/// Water-wave parameters: a preset, explicit values, or a preset with overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaterwaveSection {
    pub preset: Option<Preset>,
    pub rho: Option<Scalar>,
    pub omega: Option<Scalar>,
    pub h0: Option<Scalar>,
    pub c0: Option<Scalar>,
    /// Streamline seeds on the downstream column.
    pub streamlines: Option<usize>,
    /// Scaled abscissa of the seed column.
    pub seed_x: Option<f64>,
}

impl WaterwaveSection {
    /// Resolves the parameter set; explicit values override the preset.
    pub fn params(&self) -> Result<WaterwaveParams, CliError> {
        let base = self.preset.map(|p| p.params());
        let pick = |own: &Option<Scalar>, from: Option<&Scalar>, name: &str| {
            own.clone().or_else(|| from.cloned()).ok_or_else(|| CliError::Config(format!("waterwave.{name} is required without a preset")))
        };
        let rho = pick(&self.rho, base.as_ref().map(|b| &b.rho), "rho")?;
        let omega = pick(&self.omega, base.as_ref().map(|b| &b.omega), "omega")?;
        let h0 = self.h0.clone().or_else(|| base.as_ref().map(|b| b.h0.clone())).unwrap_or_else(|| Scalar::ratio(2, 3));
        let c0 = match (&self.c0, &base) {
            (Some(c), _) => Some(c.clone()),
            // A preset's speed only applies when its base point is untouched.
            (None, Some(b)) if self.rho.is_none() && self.omega.is_none() && self.h0.is_none() => b.c0.clone(),
            _ => None,
        };
        Ok(WaterwaveParams { rho, omega, h0, c0 })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub fault: Option<Fault>,
    pub seed: Option<u64>,
    pub draws: Option<usize>,
}

/// Fully merged configuration of one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    pub spectrum: Option<SpectrumSection>,
    pub elasticity: Option<ElasticityParams>,
    pub fkpp: Option<FkppParams>,
    pub waterwave: Option<WaterwaveSection>,
    pub verify: Option<VerifySection>,
}

impl RunConfig {
    pub fn eps(&self, app: Application) -> Vec<Scalar> {
        self.run.eps.clone().unwrap_or_else(|| app.default_eps())
    }

    pub fn grid(&self) -> usize {
        self.run.grid.unwrap_or(512)
    }

    pub fn samples(&self) -> usize {
        self.run.samples.unwrap_or(2001)
    }

    pub fn window(&self) -> f64 {
        self.run.window.unwrap_or(cylinder_core::orbit::WINDOW)
    }

    pub fn formats(&self) -> Vec<Format> {
        let mut f = self.run.format.clone().unwrap_or_else(|| vec![Format::Csv, Format::Json, Format::Svg]);
        f.sort();
        f.dedup();
        f
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats().contains(&f)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.run.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Copy used for hashing: the output location does not change results.
    pub fn hashed(&self) -> RunConfig {
        let mut c = self.clone();
        c.run.out = None;
        c
    }

    fn validate(&self, app: Application) -> Result<(), CliError> {
        if let Some(declared) = self.run.application {
            if declared != app {
                return Err(CliError::Config(format!("config declares application {:?} but the command is {}", declared.name(), app.name())));
            }
        }
        if self.grid() < 16 {
            return Err(CliError::Config(format!("grid {} is below 16", self.grid())));
        }
        if self.samples() < 2 {
            return Err(CliError::Config("samples must be at least 2".into()));
        }
        if !(self.window() > 0.0 && self.window().is_finite()) {
            return Err(CliError::Config(format!("window must be positive, got {}", self.window())));
        }
        let needs = |present: bool, section: &str| {
            if present {
                Ok(())
            } else {
                Err(CliError::Config(format!("missing [{section}] section (use --preset or --config)")))
            }
        };
        match app {
            Application::Spectrum => needs(self.spectrum.is_some(), "spectrum"),
            Application::Elasticity => needs(self.elasticity.is_some(), "elasticity"),
            Application::Fkpp => needs(self.fkpp.is_some(), "fkpp"),
            Application::Waterwave | Application::Conjugate => needs(self.waterwave.is_some(), "waterwave"),
            Application::Verify => Ok(()),
        }
    }
}

/// Looks up an embedded preset.
pub fn preset_source(name: &str) -> Result<&'static str, CliError> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, s)| *s).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
        CliError::Config(format!("unknown preset {name:?}; available: {}", names.join(", ")))
    })
}

fn parse_table(source: &str, origin: &str) -> Result<Table, CliError> {
    source.parse::<Table>().map_err(|e| CliError::Config(format!("{origin}: {e}")))
}

/// Recursively overlays `top` onto `base`.
fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Layers preset, config file and flag overrides, then validates the result.
pub fn load(app: Application, preset: Option<&str>, file: Option<&Path>, overrides: Table) -> Result<RunConfig, CliError> {
    let mut table = Table::new();
    if let Some(name) = preset {
        merge(&mut table, parse_table(preset_source(name)?, &format!("preset {name}"))?);
    }
    if let Some(path) = file {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        merge(&mut table, parse_table(&text, &path.display().to_string())?);
    }
    merge(&mut table, overrides);
    let cfg: RunConfig = Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    cfg.validate(app)?;
    Ok(cfg)
}

/// Splits a comma-separated list of reals or `p/q` rationals.
pub fn parse_eps_list(s: &str) -> Result<Vec<Scalar>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<Scalar>().map_err(|e| CliError::Config(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_parses() {
        for (name, src) in PRESETS {
            let t = parse_table(src, name).unwrap();
            let cfg: Result<RunConfig, _> = Value::Table(t).try_into();
            assert!(cfg.is_ok(), "{name}: {cfg:?}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let t = parse_table("[fkpp]\nbeta = 1.0\nlambda1 = 3.0\nspeed = 2.0\n", "inline").unwrap();
        assert!(matches!(load(Application::Fkpp, None, None, t), Err(CliError::Config(_))));
        let t = parse_table("[runs]\ngrid = 64\n", "inline").unwrap();
        assert!(matches!(load(Application::Verify, None, None, t), Err(CliError::Config(_))));
    }

    #[test]
    fn later_layers_override_earlier_ones() {
        let mut over = Table::new();
        over.insert("fkpp".into(), Value::Table(parse_table("beta = 2.0", "flag").unwrap()));
        let cfg = load(Application::Fkpp, Some("fkpp"), None, over).unwrap();
        let p = cfg.fkpp.unwrap();
        assert_eq!((p.beta, p.lambda1), (2.0, 3.0));
    }

    #[test]
    fn preset_speed_is_dropped_when_the_base_point_moves() {
        let s = WaterwaveSection { preset: Some(Preset::GenericSmooth), rho: Some(Scalar::ratio(1, 2)), ..Default::default() };
        assert_eq!(s.params().unwrap().c0, None);
        let s = WaterwaveSection { preset: Some(Preset::GenericSmooth), ..Default::default() };
        assert_eq!(s.params().unwrap().c0, Some(Scalar::ratio(1, 2)));
    }

    #[test]
    fn eps_lists_accept_rationals() {
        let v = parse_eps_list("-1/100, 0.001,1e-2").unwrap();
        assert_eq!(v, vec![Scalar::ratio(-1, 100), Scalar::ratio(1, 1000), Scalar::ratio(1, 100)]);
        assert!(parse_eps_list("").unwrap().is_empty());
        assert!(parse_eps_list("abc").is_err());
    }

    #[test]
    fn mismatched_application_is_rejected() {
        assert!(load(Application::Elasticity, Some("fkpp"), None, Table::new()).is_err());
    }
}
