//! Run configuration files.
//!
//! ```toml
//! [run]
//! experiment = "wegner"
//! model = "covering.toml"     # relative to this file
//! seed = 7                    # default 1
//! workers = 4                 # default: available cores
//! output_dir = "out/wegner"   # default: runs/<experiment>-seed<seed>
//!
//! [params]                    # fields of the experiment's parameter set
//! e0 = 30.0
//! eps_list = [0.4, 0.2, 0.1]
//! l_list = [8.0, 16.0, 32.0]
//!
//! [output]
//! json = true
//! csv = true
//! summary = true
//! ```

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use wegner_core::experiments::{
    IdsParams, IseParams, LocalisationParams, SpectralMinParams, StubbornExpParams, StubbornParams,
    UncertaintyParams, WegnerParams,
};

pub const DEFAULT_SEED: u64 = 1;
pub const OUTPUT_DIR_ENV: &str = "WEGNER_LAB_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Wegner,
    Ids,
    Stubborn,
    StubbornExponential,
    Uncertainty,
    Ise,
    SpectralMinimum,
    Localisation,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Wegner => "wegner",
            Experiment::Ids => "ids",
            Experiment::Stubborn => "stubborn",
            Experiment::StubbornExponential => "stubborn_exponential",
            Experiment::Uncertainty => "uncertainty",
            Experiment::Ise => "ise",
            Experiment::SpectralMinimum => "spectral_minimum",
            Experiment::Localisation => "localisation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Wegner(WegnerParams),
    Ids(IdsParams),
    Stubborn(StubbornParams),
    StubbornExponential(StubbornExpParams),
    Uncertainty(UncertaintyParams),
    Ise(IseParams),
    SpectralMinimum(SpectralMinParams),
    Localisation(LocalisationParams),
}

impl Params {
    fn parse(experiment: Experiment, table: toml::Table) -> Result<Self, toml::de::Error> {
        Ok(match experiment {
            Experiment::Wegner => Params::Wegner(table.try_into()?),
            Experiment::Ids => Params::Ids(table.try_into()?),
            Experiment::Stubborn => Params::Stubborn(table.try_into()?),
            Experiment::StubbornExponential => Params::StubbornExponential(table.try_into()?),
            Experiment::Uncertainty => Params::Uncertainty(table.try_into()?),
            Experiment::Ise => Params::Ise(table.try_into()?),
            Experiment::SpectralMinimum => Params::SpectralMinimum(table.try_into()?),
            Experiment::Localisation => Params::Localisation(table.try_into()?),
        })
    }

    fn to_table(&self) -> Result<toml::Table> {
        let t = match self {
            Params::Wegner(p) => toml::Table::try_from(p),
            Params::Ids(p) => toml::Table::try_from(p),
            Params::Stubborn(p) => toml::Table::try_from(p),
            Params::StubbornExponential(p) => toml::Table::try_from(p),
            Params::Uncertainty(p) => toml::Table::try_from(p),
            Params::Ise(p) => toml::Table::try_from(p),
            Params::SpectralMinimum(p) => toml::Table::try_from(p),
            Params::Localisation(p) => toml::Table::try_from(p),
        };
        Ok(t?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputFlags {
    #[serde(default = "yes")]
    pub json: bool,
    #[serde(default = "yes")]
    pub csv: bool,
    #[serde(default = "yes")]
    pub summary: bool,
}

fn yes() -> bool {
    true
}

impl Default for OutputFlags {
    fn default() -> Self {
        OutputFlags { json: true, csv: true, summary: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    experiment: Experiment,
    model: Option<PathBuf>,
    seed: Option<u64>,
    workers: Option<usize>,
    output_dir: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    run: RunSection,
    #[serde(default)]
    params: toml::Table,
    #[serde(default)]
    output: OutputFlags,
}

#[derive(Serialize)]
struct ResolvedFile {
    run: RunSection,
    params: toml::Table,
    output: OutputFlags,
}

/// A fully resolved run: every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub model: Option<PathBuf>,
    pub seed: u64,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub params: Params,
    pub output: OutputFlags,
}

/// Parses a configuration. Relative model paths resolve against `base`.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).context("invalid configuration")?;
    let run = raw.run;
    let experiment = run.experiment;
    let params = Params::parse(experiment, raw.params)
        .with_context(|| format!("invalid [params] for experiment `{}`", experiment.name()))?;
    let seed = run.seed.unwrap_or(DEFAULT_SEED);
    let workers = match run.workers {
        Some(0) => bail!("`workers` must be at least 1"),
        Some(w) => w,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let model = run.model.map(|m| if m.is_relative() { base.join(m) } else { m });
    if model.is_none() {
        bail!("missing key `model` in [run]: experiment `{}` needs a model file", experiment.name());
    }
    let output_dir = run
        .output_dir
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}-seed{seed}", experiment.name())));
    Ok(RunConfig { experiment, model, seed, workers, output_dir, params, output: raw.output })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config(&text, base).with_context(|| format!("in {}", path.display()))
}

impl RunConfig {
    /// The resolved configuration as TOML; parsing it back gives the same run.
    pub fn to_toml(&self) -> Result<String> {
        let run = RunSection {
            experiment: self.experiment,
            model: self.model.clone(),
            seed: Some(self.seed),
            workers: Some(self.workers),
            output_dir: Some(self.output_dir.clone()),
        };
        let doc = ResolvedFile { run, params: self.params.to_table()?, output: self.output };
        Ok(toml::to_string(&doc)?)
    }

    /// Applies the output-directory environment override.
    pub fn with_env_override(mut self) -> Self {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[run]
experiment = "wegner"
model = "m.toml"

[params]
e0 = 30.0
eps_list = [0.1, 0.05, 0.025]
l_list = [8.0]
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL, Path::new("/cfg")).unwrap();
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert!(cfg.workers >= 1);
        assert_eq!(cfg.model.as_deref(), Some(Path::new("/cfg/m.toml")));
        assert_eq!(cfg.output_dir, PathBuf::from("runs/wegner-seed1"));
        assert_eq!(cfg.output, OutputFlags::default());
        let Params::Wegner(p) = &cfg.params else { panic!("wrong params") };
        assert_eq!(p.replicas, 200);
        assert_eq!(p.mesh, 16);
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = MINIMAL.replace("l_list = [8.0]", "l_list = [8.0]\nreplcas = 10");
        let err = format!("{:#}", parse_config(&text, Path::new(".")).unwrap_err());
        assert!(err.contains("replcas"), "{err}");
        let text = MINIMAL.replace("[run]", "[run]\nsed = 3");
        let err = format!("{:#}", parse_config(&text, Path::new(".")).unwrap_err());
        assert!(err.contains("sed"), "{err}");
    }

    #[test]
    fn syntax_errors_cite_the_line() {
        let text = MINIMAL.replace("e0 = 30.0", "e0 = = 30.0");
        let err = format!("{:#}", parse_config(&text, Path::new(".")).unwrap_err());
        assert!(err.contains("line 7"), "{err}");
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = parse_config(MINIMAL, Path::new("/cfg")).unwrap();
        let text = cfg.to_toml().unwrap();
        assert!(text.contains("eps_list = [0.1, 0.05, 0.025]"), "{text}");
        let again = parse_config(&text, Path::new("/elsewhere")).unwrap();
        assert_eq!(again, cfg);
    }
}
