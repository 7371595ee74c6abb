use serde::{Deserialize, Serialize};

use super::DEFAULT_ED_CAP;
use crate::models::{ModelSpec, PARAM_NAMES};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    /// Gaussian for quadratic models, ED otherwise.
    #[default]
    Auto,
    Gaussian,
    Ed,
}

impl Engine {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "auto" => Ok(Self::Auto),
            "gaussian" => Ok(Self::Gaussian),
            "ed" => Ok(Self::Ed),
            other => Err(Error::Config(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    SteadyScan,
    QuenchEnergy,
    FloquetScan,
    TransportScan,
    PhaseDiagram2d,
    CriterionScan,
}

/// One swept model parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: String,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn new(param: &str, values: Vec<f64>) -> Self {
        Self { param: param.to_string(), values }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub kind: ProtocolKind,
    /// Base couplings; swept parameters and `L` are overwritten per point.
    pub model: ModelSpec,
    pub sizes: Vec<usize>,
    pub sweeps: Vec<Sweep>,
    /// Filling of the register (of the left half for transport, of spin-up
    /// sites for the spinful model).
    pub nu: f64,
    /// Filling of the right half (transport only).
    pub nu_r: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub engine: Engine,
    /// Measurement time; defaults to `2L`. Floquet runs use `round(time / 2)` periods.
    pub time: Option<f64>,
    pub threshold: f64,
    pub growth_ratio: f64,
    pub energy_tol: Option<f64>,
    pub max_pairs: usize,
    /// Quench grid resolution over `[0, 2L]`.
    pub time_steps: usize,
    pub dim_cap: usize,
}

impl Protocol {
    /// Defaults: half filling, 200 samples for quadratic models and 50 for ED.
    pub fn new(kind: ProtocolKind, model: ModelSpec) -> Self {
        let n_samples = if model.is_quadratic() { 200 } else { 50 };
        Self {
            kind,
            sizes: vec![model.l],
            model,
            sweeps: Vec::new(),
            nu: 0.5,
            nu_r: 0.25,
            n_samples,
            seed: 0,
            engine: Engine::Auto,
            time: None,
            threshold: 0.01,
            growth_ratio: 1.3,
            energy_tol: None,
            max_pairs: 1000,
            time_steps: 200,
            dim_cap: DEFAULT_ED_CAP,
        }
    }

    pub fn with_sweep(mut self, param: &str, values: Vec<f64>) -> Self {
        self.sweeps.push(Sweep::new(param, values));
        self
    }

    pub fn with_sizes(mut self, sizes: Vec<usize>) -> Self {
        self.sizes = sizes;
        self
    }

    pub fn with_samples(mut self, n: usize, seed: u64) -> Self {
        self.n_samples = n;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Config("no system sizes given".into()));
        }
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be at least 1".into()));
        }
        for s in &self.sweeps {
            if !PARAM_NAMES.contains(&s.param.as_str()) {
                return Err(Error::Config(format!("unknown swept parameter `{}`", s.param)));
            }
            if s.values.is_empty() || s.values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config(format!("empty or non-finite grid for `{}`", s.param)));
            }
        }
        if self.time.is_some_and(|t| !t.is_finite() || t < 0.0) {
            return Err(Error::Config("time must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn param_names(&self) -> Vec<String> {
        self.sweeps.iter().map(|s| s.param.clone()).collect()
    }

    /// Every (model, swept values) point: sizes outermost, then the sweeps
    /// in order with the first sweep varying slowest.
    pub fn points(&self) -> Result<Vec<(ModelSpec, Vec<f64>)>> {
        let mut out = Vec::new();
        for &l in &self.sizes {
            let mut combos: Vec<Vec<f64>> = vec![Vec::new()];
            for s in &self.sweeps {
                combos = combos.into_iter().flat_map(|c| s.values.iter().map(move |&v| [c.clone(), vec![v]].concat())).collect();
            }
            for values in combos {
                let mut spec = self.model.clone();
                spec.l = l;
                for (s, &v) in self.sweeps.iter().zip(&values) {
                    spec.set_param(&s.param, v)?;
                }
                out.push((spec, values));
            }
        }
        Ok(out)
    }
}

/// Grid from `start:stop:step` (endpoint kept when within half a step),
/// a comma-separated list, or a single number.
pub fn parse_range(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number `{s}` in `{text}`")));
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.as_slice() {
        [single] => single.split(',').map(num).collect::<Result<Vec<_>>>()?,
        [a, b, c] => {
            let (start, stop, step) = (num(a)?, num(b)?, num(c)?);
            if step == 0.0 || !step.is_finite() || (stop - start) * step < 0.0 {
                return Err(Error::Config(format!("range `{text}` has an unusable step")));
            }
            let n = ((stop - start) / step + 0.5).floor() as usize;
            // trim representation noise such as 0.30000000000000004
            (0..=n).map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12).collect()
        }
        _ => return Err(Error::Config(format!("range `{text}` is not start:stop:step"))),
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("non-finite value in `{text}`")));
    }
    Ok(values)
}
