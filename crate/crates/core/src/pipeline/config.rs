//! Closure configuration: a TOML document with `[chart]`, `[weights]`,
//! `[solver]` and `[output]` sections.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::frames::{self, ARChart, NormalFormData, PointClass, Window};
use crate::symexpr::{parse, parse_rational, Expr, Rational};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureConfig {
    pub chart: ChartConfig,
    #[serde(default)]
    pub weights: WeightsConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    /// 1 (interval with defining function `s`) or 2 (planar frame `Dx, f Dy`).
    pub dim: u8,
    /// Frame function; two-dimensional charts only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    /// Defining function; required in one dimension, defaults to `f` in two.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,
    /// Perturbation in `Delta - h/s^2`; two-dimensional charts, default 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<String>,
    /// Potential `V` in `Dx^2 - V/s^2`; one-dimensional charts, default 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    /// `[x0, x1]` or `[x0, x1, y0, y1]`, exact rationals.
    pub window: Vec<String>,
    /// Builds `f` from a normal form instead: `riemannian`, `grushin` or
    /// `tangency`, with `phi`, `psi`, `big_psi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_form: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_psi: Option<String>,
    /// Parameter bindings substituted into every chart expression.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    /// Conjugation weight; default 3/2 in one dimension and 1 in two.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_resolution")]
    pub scan_resolution: usize,
    /// Grushin points sampled along the singular set.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Allowed shortfall of the empirical semibound against the certified one.
    #[serde(default = "default_semibound_tol")]
    pub semibound_tol: f64,
    /// Bound on `|p(i xi*)|` for a vanishing witness.
    #[serde(default = "default_witness_tol")]
    pub witness_tol: f64,
    /// Epsilons for the sandwich mode.
    #[serde(default = "default_epsilons")]
    pub epsilons: Vec<String>,
}

fn default_resolution() -> usize {
    32
}
fn default_samples() -> usize {
    33
}
fn default_semibound_tol() -> f64 {
    1e-4
}
fn default_witness_tol() -> f64 {
    1e-10
}
fn default_epsilons() -> Vec<String> {
    ["1/10", "1/2", "1"].map(String::from).to_vec()
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scan_resolution: default_resolution(),
            samples: default_samples(),
            semibound_tol: default_semibound_tol(),
            witness_tol: default_witness_tol(),
            epsilons: default_epsilons(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for CSV sidecars.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_dir: Option<String>,
    /// `xi` range and sample count of the symbol CSVs.
    #[serde(default = "default_symbol_range")]
    pub symbol_range: [f64; 2],
    #[serde(default = "default_symbol_points")]
    pub symbol_points: usize,
    /// Adds a wall-clock timestamp to the provenance block.
    #[serde(default)]
    pub timestamp: bool,
}

fn default_symbol_range() -> [f64; 2] {
    [-5.0, 5.0]
}
fn default_symbol_points() -> usize {
    201
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            csv_dir: None,
            symbol_range: default_symbol_range(),
            symbol_points: default_symbol_points(),
            timestamp: false,
        }
    }
}

fn expr(field: &str, text: &str) -> Result<Expr, PipelineError> {
    parse(text).map_err(|e| PipelineError::Config(format!("{field}: {e}")))
}

fn rational(field: &str, text: &str) -> Result<Rational, PipelineError> {
    parse_rational(text).map_err(|e| PipelineError::Config(format!("{field}: {e}")))
}

impl ClosureConfig {
    pub fn from_toml(text: &str) -> Result<ClosureConfig, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn gamma(&self) -> Result<Expr, PipelineError> {
        match &self.weights.gamma {
            Some(g) => Ok(Expr::constant(rational("weights.gamma", g)?)),
            None if self.chart.dim == 1 => Ok(Expr::rational(3, 2)),
            None => Ok(Expr::one()),
        }
    }

    pub fn epsilons(&self) -> Result<Vec<Rational>, PipelineError> {
        self.solver
            .epsilons
            .iter()
            .map(|e| rational("solver.epsilons", e))
            .collect()
    }

    fn window(&self) -> Result<Window, PipelineError> {
        let w: Vec<Rational> = self
            .chart
            .window
            .iter()
            .map(|t| rational("chart.window", t))
            .collect::<Result<_, _>>()?;
        match (self.chart.dim, w.len()) {
            (1, 2) => Ok(Window::interval(w[0].clone(), w[1].clone())),
            (2, 4) => Ok(Window::new(w[0].clone(), w[1].clone(), w[2].clone(), w[3].clone())),
            (d, n) => Err(PipelineError::Config(format!(
                "chart.window has {n} entries; a {d}-dimensional chart needs {}",
                2 * d
            ))),
        }
    }

    /// Builds the chart with parameters bound.
    pub fn build_chart(&self) -> Result<ARChart, PipelineError> {
        let c = &self.chart;
        let window = self.window()?;
        let opt = |field: &str, v: &Option<String>| v.as_deref().map(|t| expr(field, t)).transpose();
        let chart = match c.dim {
            1 => {
                let s = opt("chart.s", &c.s)?
                    .ok_or_else(|| PipelineError::Config("chart.s is required in one dimension".into()))?;
                let v = opt("chart.potential", &c.potential)?.unwrap_or_default();
                ARChart::interval(s, v, window)?
            }
            2 => {
                let f = match (&c.normal_form, &c.f) {
                    (Some(kind), None) => {
                        let kind = match kind.as_str() {
                            "riemannian" => PointClass::Riemannian,
                            "grushin" => PointClass::Grushin,
                            "tangency" => PointClass::Tangency,
                            other => return Err(PipelineError::Config(format!("unknown normal form {other}"))),
                        };
                        let data = NormalFormData {
                            phi: opt("chart.phi", &c.phi)?,
                            psi: opt("chart.psi", &c.psi)?,
                            big_psi: opt("chart.big_psi", &c.big_psi)?,
                        };
                        frames::normal_form(&kind, &data, window.clone())?.f
                    }
                    (None, Some(f)) => expr("chart.f", f)?,
                    (Some(_), Some(_)) => {
                        return Err(PipelineError::Config("give either chart.f or chart.normal_form".into()))
                    }
                    (None, None) => return Err(PipelineError::Config("chart.f is required in two dimensions".into())),
                };
                let mut chart = ARChart::planar(f, window)?;
                if let Some(s) = opt("chart.s", &c.s)? {
                    chart = chart.with_s(s);
                }
                if let Some(h) = opt("chart.h", &c.h)? {
                    chart = chart.with_h(h);
                }
                chart
            }
            d => return Err(PipelineError::Config(format!("chart.dim must be 1 or 2, got {d}"))),
        };
        let values: BTreeMap<String, Expr> = c
            .params
            .iter()
            .map(|(k, v)| Ok((k.clone(), expr(&format!("chart.params.{k}"), v)?)))
            .collect::<Result<_, PipelineError>>()?;
        let chart = frames::bind_parameters(&chart, &values)?;
        chart.validate(&[])?;
        Ok(chart)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ONE_DIM: &str = r#"
[chart]
dim = 1
s = "x*(1 - x)"
potential = "3/4 + alpha"
window = ["0", "1"]
params = { alpha = "1" }
"#;

    #[test]
    fn round_trip_and_defaults() {
        let cfg = ClosureConfig::from_toml(ONE_DIM).unwrap();
        assert_eq!(cfg.solver.samples, 33);
        assert_eq!(cfg.gamma().unwrap(), Expr::rational(3, 2));
        let again = ClosureConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(again, cfg);
        let chart = cfg.build_chart().unwrap();
        assert_eq!(chart.potential.to_string(), "7/4");
    }

    #[test]
    fn config_errors() {
        assert!(ClosureConfig::from_toml("[chart]\ndim = 3\nwindow = []")
            .unwrap()
            .build_chart()
            .is_err());
        assert!(ClosureConfig::from_toml("[chart]\ndim = 1\nwindow = [\"0\", \"1\"]\nbogus = 1").is_err());
        let unbound = ONE_DIM.replace("params = { alpha = \"1\" }", "");
        assert!(ClosureConfig::from_toml(&unbound).unwrap().build_chart().is_err());
        let nf = "[chart]\ndim = 2\nnormal_form = \"grushin\"\nphi = \"y\"\nwindow = [\"-1\", \"1\", \"-1\", \"1\"]";
        let c = ClosureConfig::from_toml(nf).unwrap().build_chart().unwrap();
        assert_eq!(c.f.to_string(), "x*exp(y)");
    }
}
