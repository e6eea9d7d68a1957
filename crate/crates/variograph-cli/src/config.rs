//! Experiment configuration with an exact plain-text round trip.
//!
//! A configuration serializes to `key=value` lines; floating-point values
//! are printed with 17 significant digits, so parsing the emitted text
//! reconstructs the configuration bit for bit. Parsing starts from the
//! defaults and overrides whatever keys are present, which makes the same
//! code path serve both config files and flag overrides.

use anyhow::{anyhow, bail, Context, Result};

use variograph::field::{ModelKind, SamplingScheme, VariogramModel};
use variograph::graph::Connectivity;
use variograph::io::format_value;
use variograph::window::VertexWindow;

/// Every knob of an experiment run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Number of sensors.
    pub vertices: usize,
    /// How positions are drawn over the unit square.
    pub scheme: SamplingScheme,
    /// Which sensor pairs become graph edges.
    pub connectivity: Connectivity,
    /// Gaussian kernel width for the edge weights.
    pub kernel_width: f64,
    /// Ground-truth semivariogram model driving the simulation.
    pub model: VariogramModel,
    /// Ensemble size per graph.
    pub realizations: usize,
    /// Number of independently sampled graphs.
    pub graphs: usize,
    /// Number of equal-width distance bins.
    pub bins: usize,
    /// Vertex window for localized estimation.
    pub window: VertexWindow,
    /// Master seed; graphs and realizations derive their own streams.
    pub seed: u64,
    /// Worker threads (0 = library default). Results do not depend on it.
    pub threads: usize,
    /// Bins with fewer pairs are excluded from summary error metrics.
    pub min_pairs: usize,
    /// Emit spectral densities in decibels.
    pub decibels: bool,
    /// Replace the field model by unit white noise in spectral runs.
    pub iid: bool,
}

impl Default for ExperimentConfig {
    /// The reference protocol: 500 uniformly placed sensors on a full
    /// graph with kernel width 0.05, an exponential model with sill 1 and
    /// range 0.2, 1000 realizations, and 20 distance bins.
    fn default() -> Self {
        ExperimentConfig {
            vertices: 500,
            scheme: SamplingScheme::Uniform,
            connectivity: Connectivity::Full,
            kernel_width: 0.05,
            model: VariogramModel::exponential(1.0, 0.2).expect("valid default model"),
            realizations: 1000,
            graphs: 1,
            bins: 20,
            window: VertexWindow::ones(),
            seed: 0,
            threads: 0,
            min_pairs: 30,
            decibels: false,
            iid: false,
        }
    }
}

impl ExperimentConfig {
    /// `key=value` text that [`parse`](Self::parse) inverts exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut push = |key: &str, value: String| {
            out.push_str(key);
            out.push('=');
            out.push_str(&value);
            out.push('\n');
        };
        push("vertices", self.vertices.to_string());
        push("scheme", scheme_to_string(self.scheme));
        push("connectivity", connectivity_to_string(self.connectivity));
        push("kernel_width", format_value(self.kernel_width));
        push("model", model_to_string(&self.model));
        push("realizations", self.realizations.to_string());
        push("graphs", self.graphs.to_string());
        push("bins", self.bins.to_string());
        push("window", window_to_string(&self.window));
        push("seed", self.seed.to_string());
        push("threads", self.threads.to_string());
        push("min_pairs", self.min_pairs.to_string());
        push("decibels", self.decibels.to_string());
        push("iid", self.iid.to_string());
        out
    }

    /// Parses `key=value` lines over the defaults.
    ///
    /// Blank lines and `#` comments are skipped; unknown keys and
    /// malformed values are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value, got {line:?}", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let context = || format!("line {}: key {key:?}", lineno + 1);
            match key {
                "vertices" => cfg.vertices = value.parse().with_context(context)?,
                "scheme" => cfg.scheme = parse_scheme(value)?,
                "connectivity" => cfg.connectivity = parse_connectivity(value)?,
                "kernel_width" => cfg.kernel_width = value.parse().with_context(context)?,
                "model" => cfg.model = parse_model(value)?,
                "realizations" => cfg.realizations = value.parse().with_context(context)?,
                "graphs" => cfg.graphs = value.parse().with_context(context)?,
                "bins" => cfg.bins = value.parse().with_context(context)?,
                "window" => cfg.window = parse_window(value)?,
                "seed" => cfg.seed = value.parse().with_context(context)?,
                "threads" => cfg.threads = value.parse().with_context(context)?,
                "min_pairs" => cfg.min_pairs = value.parse().with_context(context)?,
                "decibels" => cfg.decibels = value.parse().with_context(context)?,
                "iid" => cfg.iid = value.parse().with_context(context)?,
                _ => bail!("line {}: unknown key {key:?}", lineno + 1),
            }
        }
        Ok(cfg)
    }
}

/// Optional per-field overrides (command-line flags) applied on top of a
/// configuration. String-valued fields reuse the config-file syntax.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub vertices: Option<usize>,
    pub scheme: Option<String>,
    pub connectivity: Option<String>,
    pub kernel_width: Option<f64>,
    pub model: Option<String>,
    pub realizations: Option<usize>,
    pub graphs: Option<usize>,
    pub bins: Option<usize>,
    pub window: Option<String>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub min_pairs: Option<usize>,
    /// Flags can only switch these on; a config file can set either way.
    pub decibels: bool,
    pub iid: bool,
}

impl ExperimentConfig {
    /// Applies explicit overrides on top of this configuration.
    pub fn with_overrides(mut self, overrides: &ConfigOverrides) -> Result<Self> {
        if let Some(v) = overrides.vertices {
            self.vertices = v;
        }
        if let Some(s) = &overrides.scheme {
            self.scheme = parse_scheme(s)?;
        }
        if let Some(c) = &overrides.connectivity {
            self.connectivity = parse_connectivity(c)?;
        }
        if let Some(w) = overrides.kernel_width {
            self.kernel_width = w;
        }
        if let Some(m) = &overrides.model {
            self.model = parse_model(m)?;
        }
        if let Some(r) = overrides.realizations {
            self.realizations = r;
        }
        if let Some(g) = overrides.graphs {
            self.graphs = g;
        }
        if let Some(b) = overrides.bins {
            self.bins = b;
        }
        if let Some(w) = &overrides.window {
            self.window = parse_window(w)?;
        }
        if let Some(s) = overrides.seed {
            self.seed = s;
        }
        if let Some(t) = overrides.threads {
            self.threads = t;
        }
        if let Some(p) = overrides.min_pairs {
            self.min_pairs = p;
        }
        if overrides.decibels {
            self.decibels = true;
        }
        if overrides.iid {
            self.iid = true;
        }
        Ok(self)
    }
}

pub fn parse_scheme(s: &str) -> Result<SamplingScheme> {
    match s {
        "uniform" => Ok(SamplingScheme::Uniform),
        "nonuniform" => Ok(SamplingScheme::Nonuniform),
        _ => bail!("unknown sampling scheme {s:?} (expected uniform or nonuniform)"),
    }
}

pub fn scheme_to_string(scheme: SamplingScheme) -> String {
    match scheme {
        SamplingScheme::Uniform => "uniform",
        SamplingScheme::Nonuniform => "nonuniform",
    }
    .to_string()
}

/// `full` or `knn:<k>`.
pub fn parse_connectivity(s: &str) -> Result<Connectivity> {
    if s == "full" {
        return Ok(Connectivity::Full);
    }
    if let Some(k) = s.strip_prefix("knn:") {
        let k: usize = k
            .parse()
            .with_context(|| format!("neighbour count in {s:?}"))?;
        return Ok(Connectivity::Knn(k));
    }
    bail!("unknown connectivity {s:?} (expected full or knn:<k>)")
}

pub fn connectivity_to_string(connectivity: Connectivity) -> String {
    match connectivity {
        Connectivity::Full => "full".to_string(),
        Connectivity::Knn(k) => format!("knn:{k}"),
    }
}

/// `exp:<sill>:<range>[:<nugget>]`, `linear:<sill>:<range>[:<nugget>]` or
/// `nugget:<sill>`.
pub fn parse_model(s: &str) -> Result<VariogramModel> {
    let parts: Vec<&str> = s.split(':').collect();
    let float = |token: &str| -> Result<f64> {
        token
            .parse::<f64>()
            .with_context(|| format!("number {token:?} in model {s:?}"))
    };
    let model = match parts.as_slice() {
        ["exp", sill, range] => VariogramModel::exponential(float(sill)?, float(range)?),
        ["exp", sill, range, nugget] => {
            let nugget = float(nugget)?;
            VariogramModel::exponential(float(sill)?, float(range)?)
                .and_then(|m| m.with_nugget(nugget))
        }
        ["linear", sill, range] => VariogramModel::linear(float(sill)?, float(range)?),
        ["linear", sill, range, nugget] => {
            let nugget = float(nugget)?;
            VariogramModel::linear(float(sill)?, float(range)?)
                .and_then(|m| m.with_nugget(nugget))
        }
        ["nugget", sill] => VariogramModel::nugget_only(float(sill)?),
        _ => bail!(
            "unknown model {s:?} (expected exp:<sill>:<range>[:<nugget>], \
             linear:<sill>:<range>[:<nugget>] or nugget:<sill>)"
        ),
    };
    model.map_err(|e| anyhow!("model {s:?}: {e}"))
}

pub fn model_to_string(model: &VariogramModel) -> String {
    let mut s = match model.kind() {
        ModelKind::Exponential => format!(
            "exp:{}:{}",
            format_value(model.sill()),
            format_value(model.range())
        ),
        ModelKind::Linear => format!(
            "linear:{}:{}",
            format_value(model.sill()),
            format_value(model.range())
        ),
        ModelKind::Nugget => format!("nugget:{}", format_value(model.sill())),
    };
    if model.nugget() > 0.0 && !matches!(model.kind(), ModelKind::Nugget) {
        s.push(':');
        s.push_str(&format_value(model.nugget()));
    }
    s
}

/// `ones`, `ball:<radius>` or `gauss:<rho>`.
pub fn parse_window(s: &str) -> Result<VertexWindow> {
    if s == "ones" {
        return Ok(VertexWindow::ones());
    }
    if let Some(radius) = s.strip_prefix("ball:") {
        let radius: f64 = radius
            .parse()
            .with_context(|| format!("radius in window {s:?}"))?;
        return VertexWindow::ball(radius).map_err(|e| anyhow!("window {s:?}: {e}"));
    }
    if let Some(rho) = s.strip_prefix("gauss:") {
        let rho: f64 = rho
            .parse()
            .with_context(|| format!("scale in window {s:?}"))?;
        return VertexWindow::gaussian(rho).map_err(|e| anyhow!("window {s:?}: {e}"));
    }
    bail!("unknown window {s:?} (expected ones, ball:<radius> or gauss:<rho>)")
}

pub fn window_to_string(window: &VertexWindow) -> String {
    match *window {
        VertexWindow::Ones => "ones".to_string(),
        VertexWindow::BallIndicator { radius } => format!("ball:{}", format_value(radius)),
        VertexWindow::GaussianDecay { rho } => format!("gauss:{}", format_value(rho)),
    }
}
