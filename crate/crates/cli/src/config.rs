//! TOML run configuration.
//!
//! Every section rejects unknown keys. Defaults are filled in at parse time,
//! so serializing a parsed config yields the complete set of parameters used.

use std::fmt;
use std::f64::consts::PI;

use anyhow::{anyhow, bail, Context, Result};
use colsync::analysis::{AnalysisConfig, Method};
use colsync::model::{AtomSpec, BasisConvention, BathSpec, CouplingSource, Geometry, ModelSpec, SelfEnergy, DEFAULT_G};
use colsync::sweep::{EnsembleSpec, ParamPath, Reducer, SweepAxis, SweepSpec, ThirdAtomState, ThreeAtomLayout};
use colsync::sync::{SyncThresholds, WindowConfig};
use colsync::Pauli;
use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Simulate,
    Sweep,
    CoherenceMap,
    ThreeAtom,
    Coefficients,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Sweep => "sweep",
            Mode::CoherenceMap => "coherence-map",
            Mode::ThreeAtom => "three-atom",
            Mode::Coefficients => "coefficients",
        })
    }
}

/// A real number given either as a literal or as a multiple of π:
/// `"pi"`, `"-pi/3"`, `"3*pi/4"`, `"0.25"`. Serialized as the plain value.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Angle(pub f64);

impl Angle {
    pub fn parse(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || anyhow!("cannot read `{text}` as a number or multiple of pi");
        if let Ok(v) = s.parse::<f64>() {
            return Ok(Angle(v));
        }
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1.0, rest),
            None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
        };
        let (num, den) = match body.split_once('/') {
            Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
            None => (body, 1.0),
        };
        let coef = match num {
            "pi" | "π" => 1.0,
            _ => {
                let c = num
                    .strip_suffix("*pi")
                    .or_else(|| num.strip_suffix("pi"))
                    .or_else(|| num.strip_suffix("*π"))
                    .or_else(|| num.strip_suffix('π'))
                    .ok_or_else(bad)?;
                c.parse::<f64>().map_err(|_| bad())?
            }
        };
        if den == 0.0 {
            return Err(bad());
        }
        Ok(Angle(sign * coef * PI / den))
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Angle(v)),
            Raw::Int(v) => Ok(Angle(v as f64)),
            Raw::Text(t) => Angle::parse(&t).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    pub omega: f64,
    #[serde(default)]
    pub theta: Angle,
    #[serde(default)]
    pub phi: Angle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingsConfig {
    pub a: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub positions: Vec<[f64; 3]>,
    pub dipole: [f64; 3],
    #[serde(default = "one")]
    pub k0: f64,
    /// `false` keeps the geometric collectivities but drops the exchange term.
    #[serde(default = "yes")]
    pub exchange: bool,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_g() -> f64 {
    DEFAULT_G
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub atoms: Vec<AtomConfig>,
    #[serde(default)]
    pub nbar: f64,
    #[serde(default = "default_g")]
    pub g: f64,
    #[serde(default)]
    pub self_energy: SelfEnergy,
    #[serde(default)]
    pub basis: BasisConvention,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub couplings: Option<CouplingsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryConfig>,
}

fn matrix(rows: &[Vec<f64>], n: usize, name: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        bail!("couplings.{name} must be a {n}x{n} matrix");
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl ModelConfig {
    pub fn build(&self) -> Result<ModelSpec> {
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(k, a)| {
                AtomSpec::from_state_angles(a.omega, a.theta.0, a.phi.0)
                    .with_context(|| format!("model.atoms[{}]", k + 1))
            })
            .collect::<Result<Vec<_>>>()?;
        let n = atoms.len();
        let bath = BathSpec::new(self.nbar)?;
        let model = match (&self.couplings, &self.geometry) {
            (Some(c), None) => {
                let a = matrix(&c.a, n, "a")?;
                let f = match &c.f {
                    Some(f) => matrix(f, n, "f")?,
                    None => DMatrix::zeros(n, n),
                };
                ModelSpec::new(atoms, bath, CouplingSource::Matrices { a, f }, self.g)?
            }
            (None, Some(geo)) => {
                let geometry = Geometry::new(geo.positions.clone(), geo.dipole, geo.k0)?;
                let m = ModelSpec::new(atoms, bath, CouplingSource::Geometry(geometry), self.g)?;
                if geo.exchange {
                    m
                } else {
                    m.without_exchange()
                }
            }
            (Some(_), Some(_)) => bail!("model has both [model.couplings] and [model.geometry]; give one"),
            (None, None) => bail!("model needs either [model.couplings] or [model.geometry]"),
        };
        Ok(model.with_self_energy(self.self_energy).with_basis(self.basis))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub window: f64,
    pub overlap: f64,
    pub sample_step: f64,
    pub final_time: f64,
    /// Filled in per mode when absent: spectral for grids, adaptive otherwise.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    pub tol: f64,
    pub axis: Pauli,
    /// 1-based atom pairs; all pairs when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<[usize; 2]>>,
    pub sync_threshold: f64,
    pub settle_threshold: f64,
    pub settle_fraction: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let a = AnalysisConfig::default();
        Self {
            window: a.window.window,
            overlap: a.window.overlap,
            sample_step: a.sample_step,
            final_time: a.final_time,
            method: None,
            tol: a.tol,
            axis: a.axis,
            pairs: None,
            sync_threshold: a.thresholds.sync,
            settle_threshold: a.thresholds.settle,
            settle_fraction: a.thresholds.settle_fraction,
        }
    }
}

impl AnalysisSection {
    pub fn build(&self) -> Result<AnalysisConfig> {
        let pairs = match &self.pairs {
            None => None,
            Some(ps) => Some(
                ps.iter()
                    .map(|&[i, j]| {
                        if i == 0 || j == 0 {
                            bail!("analysis.pairs uses 1-based atom indices");
                        }
                        Ok((i - 1, j - 1))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let cfg = AnalysisConfig {
            window: WindowConfig {
                window: self.window,
                overlap: self.overlap,
            },
            thresholds: SyncThresholds {
                sync: self.sync_threshold,
                settle: self.settle_threshold,
                settle_fraction: self.settle_fraction,
            },
            sample_step: self.sample_step,
            final_time: self.final_time,
            method: self.method.unwrap_or_default(),
            tol: self.tol,
            axis: self.axis,
            pairs,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Either an explicit value list or `count` points from `start` to `end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub path: ParamPath,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
}

impl AxisConfig {
    pub fn build(&self) -> Result<SweepAxis> {
        let axis = match (&self.values, self.start, self.end, self.count) {
            (Some(v), None, None, None) => SweepAxis::new(self.path, v.clone())?,
            (None, Some(s), Some(e), Some(n)) => SweepAxis::linspace(self.path, s, e, n)?,
            _ => bail!(
                "axis {} needs either `values` or all of `start`, `end`, `count`",
                self.path
            ),
        };
        Ok(axis)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub axis1: AxisConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis2: Option<AxisConfig>,
    /// 1-based pair whose final Pearson coefficient is mapped.
    #[serde(default = "first_pair")]
    pub pair: [usize; 2],
}

fn first_pair() -> [usize; 2] {
    [1, 2]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreeAtomSection {
    /// Used when no `[model]` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<ThreeAtomLayout>,
    #[serde(default = "default_third")]
    pub third: ThirdAtomState,
}

fn default_third() -> ThirdAtomState {
    ThirdAtomState::Psi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsSection {
    pub xi: Angle,
    pub alpha: Angle,
    #[serde(default = "one")]
    pub gamma0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub three_atom: Option<ThreeAtomSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoefficientsSection>,
}

/// Parses and validates a config, materializing mode-dependent defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow!("invalid config: {e}"))?;
    cfg.materialize();
    cfg.validate()?;
    Ok(cfg)
}

pub fn to_toml(cfg: &RunConfig) -> Result<String> {
    Ok(toml::to_string(cfg)?)
}

impl RunConfig {
    fn materialize(&mut self) {
        if self.analysis.method.is_none() {
            self.analysis.method = Some(match self.mode {
                Mode::Sweep | Mode::CoherenceMap => Method::Spectral,
                _ => Method::Adaptive,
            });
        }
        if self.mode == Mode::CoherenceMap && self.ensemble.is_none() {
            self.ensemble = Some(EnsembleSpec::default());
        }
        if self.mode == Mode::ThreeAtom && self.three_atom.is_none() {
            self.three_atom = Some(ThreeAtomSection {
                layout: None,
                third: default_third(),
            });
        }
        if let Some(t) = &mut self.three_atom {
            if self.model.is_none() && t.layout.is_none() {
                t.layout = Some(ThreeAtomLayout::FullyCollective);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let need = |present: bool, section: &str| -> Result<()> {
            if present {
                Ok(())
            } else {
                bail!("mode `{}` needs a [{section}] section", self.mode)
            }
        };
        match self.mode {
            Mode::Simulate => need(self.model.is_some(), "model")?,
            Mode::Sweep => {
                need(self.model.is_some(), "model")?;
                need(self.sweep.is_some(), "sweep")?;
            }
            Mode::CoherenceMap => {
                need(self.model.is_some(), "model")?;
                need(self.sweep.is_some(), "sweep")?;
            }
            Mode::ThreeAtom => {
                if let (Some(_), Some(ThreeAtomSection { layout: Some(_), .. })) = (&self.model, &self.three_atom) {
                    bail!("three-atom mode takes either [model] or three_atom.layout, not both");
                }
            }
            Mode::Coefficients => need(self.coefficients.is_some(), "coefficients")?,
        }
        if self.mode != Mode::Coefficients {
            self.analysis.build()?;
        }
        match self.mode {
            Mode::Simulate => {
                self.model_spec()?;
            }
            Mode::Sweep | Mode::CoherenceMap => {
                self.sweep_spec()?.validate()?;
            }
            Mode::ThreeAtom => {
                self.three_atom_model()?;
            }
            Mode::Coefficients => {}
        }
        Ok(())
    }

    pub fn model_spec(&self) -> Result<ModelSpec> {
        self.model
            .as_ref()
            .ok_or_else(|| anyhow!("missing [model] section"))?
            .build()
            .context("invalid [model]")
    }

    pub fn analysis_config(&self) -> Result<AnalysisConfig> {
        self.analysis.build().context("invalid [analysis]")
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let sweep = self.sweep.as_ref().ok_or_else(|| anyhow!("missing [sweep] section"))?;
        let [i, j] = sweep.pair;
        if i == 0 || j == 0 {
            bail!("sweep.pair uses 1-based atom indices");
        }
        let reducer = match self.mode {
            Mode::CoherenceMap => Reducer::MeanL1Coherence,
            _ => Reducer::FinalPearson { pair: (i - 1, j - 1) },
        };
        Ok(SweepSpec {
            base: self.model_spec()?,
            axis1: sweep.axis1.build()?,
            axis2: sweep.axis2.as_ref().map(AxisConfig::build).transpose()?,
            analysis: self.analysis_config()?,
            reducer,
        })
    }

    pub fn three_atom_model(&self) -> Result<ModelSpec> {
        let section = self.three_atom.as_ref().ok_or_else(|| anyhow!("missing [three_atom] section"))?;
        let model = match (section.layout, &self.model) {
            (Some(layout), _) => layout.model(section.third)?,
            (None, Some(_)) => self.model_spec()?,
            (None, None) => bail!("three-atom mode needs [model] or three_atom.layout"),
        };
        if model.n_atoms() != 3 {
            bail!("three-atom mode needs exactly 3 atoms, got {}", model.n_atoms());
        }
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_expressions() {
        let cases = [
            ("pi", PI),
            ("-pi/3", -PI / 3.0),
            ("pi / 8", PI / 8.0),
            ("3*pi/4", 0.75 * PI),
            ("2pi", 2.0 * PI),
            ("0.25", 0.25),
            ("-1e-3", -1e-3),
        ];
        for (text, want) in cases {
            assert!((Angle::parse(text).unwrap().0 - want).abs() < 1e-15, "{text}");
        }
        for bad in ["pie", "pi/0", "x*pi", ""] {
            assert!(Angle::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn mode_names_match_subcommands() {
        for (m, s) in [
            (Mode::Simulate, "simulate"),
            (Mode::CoherenceMap, "coherence-map"),
            (Mode::ThreeAtom, "three-atom"),
        ] {
            assert_eq!(m.to_string(), s);
        }
    }
}
