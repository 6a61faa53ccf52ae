//! Experiment configuration: a flat `key = value` file whose entries can be
//! overridden one by one from the command line.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::approx::CoeffFunction;
use crate::basis::Basis;
use crate::error::{Error, Result};
use crate::harness::io::read_layers;
use crate::mzfamily::{Generator, Layer, DEFAULT_FLOOR};

/// Where the layers of an experiment come from.
#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorSpec {
    Uniform,
    Jittered,
    Random,
    File(PathBuf),
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Ok(match s.to_ascii_lowercase().as_str() {
            "uniform" => GeneratorSpec::Uniform,
            "jittered" | "jitter" => GeneratorSpec::Jittered,
            "random" => GeneratorSpec::Random,
            "" => return Err(Error::Config("empty generator".into())),
            _ => GeneratorSpec::File(PathBuf::from(s.strip_prefix("file:").unwrap_or(s))),
        })
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Uniform => f.write_str("uniform"),
            GeneratorSpec::Jittered => f.write_str("jittered"),
            GeneratorSpec::Random => f.write_str("random"),
            GeneratorSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Test function from the closed-form catalogue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FunctionSpec {
    Sobolev { sigma: f64, eps: f64 },
    PowerLaw { exponent: f64 },
    Analytic { a: f64 },
    Hat,
}

impl FunctionSpec {
    pub fn build(&self, basis: Basis, lambda_max: usize) -> Result<CoeffFunction> {
        match *self {
            FunctionSpec::Sobolev { sigma, eps } => {
                CoeffFunction::sobolev(basis, sigma, eps, lambda_max)
            }
            FunctionSpec::PowerLaw { exponent } => {
                CoeffFunction::power_law(basis, exponent, lambda_max)
            }
            FunctionSpec::Analytic { a } => CoeffFunction::analytic(basis, a, lambda_max),
            FunctionSpec::Hat => Ok(CoeffFunction::hat(basis, lambda_max)),
        }
    }

    /// Whether errors are expected to decay geometrically.
    pub fn is_analytic(&self) -> bool {
        matches!(self, FunctionSpec::Analytic { .. })
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    /// `sobolev:σ[:ε]`, `power:p`, `analytic:a`, `hat`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Config(format!("function `{s}` is missing a parameter")))?
                .parse()
                .map_err(|e| Error::Config(format!("function `{s}`: {e}")))
        };
        let spec = match (parts[0].to_ascii_lowercase().as_str(), parts.len()) {
            ("sobolev", 2) => FunctionSpec::Sobolev {
                sigma: num(1)?,
                eps: 0.05,
            },
            ("sobolev", 3) => FunctionSpec::Sobolev {
                sigma: num(1)?,
                eps: num(2)?,
            },
            ("power", 2) => FunctionSpec::PowerLaw { exponent: num(1)? },
            ("analytic", 2) => FunctionSpec::Analytic { a: num(1)? },
            ("analytic", 1) => FunctionSpec::Analytic { a: 1.25 },
            ("hat", 1) => FunctionSpec::Hat,
            _ => return Err(Error::Config(format!("unknown test function `{s}`"))),
        };
        Ok(spec)
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Sobolev { sigma, eps } => write!(f, "sobolev:{sigma}:{eps}"),
            FunctionSpec::PowerLaw { exponent } => write!(f, "power:{exponent}"),
            FunctionSpec::Analytic { a } => write!(f, "analytic:{a}"),
            FunctionSpec::Hat => f.write_str("hat"),
        }
    }
}

/// Parses a degree schedule: `dyadic:lo..hi`, `lo..hi[:step]` or a
/// comma-separated list. The result must be non-empty and strictly increasing.
pub fn parse_degrees(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    let bad = |msg: &str| Error::Config(format!("degree schedule `{s}`: {msg}"));
    let int = |t: &str| t.trim().parse::<usize>().map_err(|e| bad(&e.to_string()));
    let degrees: Vec<usize> = if let Some(range) = s.strip_prefix("dyadic:") {
        let (lo, hi) = range.split_once("..").ok_or_else(|| bad("expected lo..hi"))?;
        let (lo, hi) = (int(lo)?, int(hi)?);
        if lo == 0 {
            return Err(bad("dyadic schedules start at 1 or above"));
        }
        std::iter::successors(Some(lo), |&n| n.checked_mul(2))
            .take_while(|&n| n <= hi)
            .collect()
    } else if let Some((lo, rest)) = s.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (int(hi)?, int(step)?),
            None => (int(rest)?, 1),
        };
        if step == 0 {
            return Err(bad("step must be positive"));
        }
        (int(lo)?..=hi).step_by(step).collect()
    } else {
        s.split(',').map(int).collect::<Result<_>>()?
    };
    if degrees.is_empty() {
        return Err(bad("no degrees"));
    }
    if degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad("degrees must be strictly increasing"));
    }
    Ok(degrees)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub basis: Basis,
    pub generator: GeneratorSpec,
    pub oversampling: f64,
    pub jitter: f64,
    pub seed: u64,
    /// `None` means all layers of a node file, or the default schedule.
    pub degrees: Option<Vec<usize>>,
    pub function: FunctionSpec,
    pub sigma: f64,
    /// Lower frame bound below which a layer counts as uncertified.
    pub floor: f64,
    /// Absolute slack allowed in every bound comparison.
    pub tolerance: f64,
    /// Errors at or below this value are left out of rate fits.
    pub rate_floor: f64,
    /// Truncation level of the test function; defaults to `max(16 n_max, 2048)`.
    pub lambda_max: Option<usize>,
    pub grid: usize,
    pub output: Option<PathBuf>,
    pub strict: bool,
}

pub const DEFAULT_DEGREES: &str = "dyadic:8..128";

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            basis: Basis::fourier(),
            generator: GeneratorSpec::Jittered,
            oversampling: 2.0,
            jitter: 0.25,
            seed: 7,
            degrees: None,
            function: FunctionSpec::Sobolev {
                sigma: 1.2,
                eps: 0.05,
            },
            sigma: 1.2,
            floor: DEFAULT_FLOOR,
            tolerance: 1e-10,
            rate_floor: 1e-13,
            lambda_max: None,
            grid: crate::basis::DEFAULT_GRID,
            output: None,
            strict: false,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| Error::Config(format!("{key} = {value}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key} = {value}: expected a boolean"))),
    }
}

impl ExperimentConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().replace('-', "_");
        match key.as_str() {
            "basis" => {
                self.basis = value
                    .trim()
                    .parse()
                    .map_err(|e: Error| Error::Config(e.to_string()))?
            }
            "generator" => self.generator = value.parse()?,
            "oversampling" => self.oversampling = parse_value(&key, value)?,
            "jitter" => self.jitter = parse_value(&key, value)?,
            "seed" => self.seed = parse_value(&key, value)?,
            "degrees" => self.degrees = Some(parse_degrees(value)?),
            "function" => self.function = value.parse()?,
            "sigma" => self.sigma = parse_value(&key, value)?,
            "floor" => self.floor = parse_value(&key, value)?,
            "tolerance" => self.tolerance = parse_value(&key, value)?,
            "rate_floor" => self.rate_floor = parse_value(&key, value)?,
            "lambda_max" => self.lambda_max = Some(parse_value(&key, value)?),
            "grid" => self.grid = parse_value(&key, value)?,
            "output" => self.output = Some(PathBuf::from(value.trim())),
            "strict" => self.strict = parse_bool(&key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Reads `key = value` lines; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected key = value, found `{line}`"),
            })?;
            config.set(key, value).map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.oversampling >= 1.0 && self.oversampling.is_finite()) {
            return fail(format!("oversampling must be at least 1, got {}", self.oversampling));
        }
        if !(0.0..0.5).contains(&self.jitter) {
            return fail(format!("jitter must lie in [0, 1/2), got {}", self.jitter));
        }
        if !(self.sigma > 0.0) {
            return fail(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.floor >= 0.0 && self.tolerance >= 0.0 && self.rate_floor >= 0.0) {
            return fail("floor, tolerance and rate_floor must be non-negative".into());
        }
        if self.grid < 2 {
            return fail(format!("grid must have at least 2 points, got {}", self.grid));
        }
        if let Some(d) = &self.degrees {
            if d.is_empty() || d.windows(2).any(|w| w[0] >= w[1]) {
                return fail("degrees must be non-empty and strictly increasing".into());
            }
        }
        Ok(())
    }

    fn generator(&self) -> Option<Generator> {
        match self.generator {
            GeneratorSpec::Uniform => Some(Generator::Uniform),
            GeneratorSpec::Jittered => Some(Generator::Jittered {
                jitter: self.jitter,
                seed: self.seed,
            }),
            GeneratorSpec::Random => Some(Generator::Random { seed: self.seed }),
            GeneratorSpec::File(_) => None,
        }
    }

    /// Layers of the experiment in increasing order of `n`.
    pub fn layers(&self) -> Result<Vec<Layer>> {
        self.validate()?;
        match (&self.generator, self.generator()) {
            (GeneratorSpec::File(path), _) => {
                let file = std::fs::File::open(path)?;
                let mut layers = read_layers(std::io::BufReader::new(file))?;
                if let Some(degrees) = &self.degrees {
                    for n in degrees {
                        if !layers.iter().any(|l| l.n() == *n) {
                            return Err(Error::Config(format!(
                                "node file {} has no layer n = {n}",
                                path.display()
                            )));
                        }
                    }
                    layers.retain(|l| degrees.contains(&l.n()));
                }
                layers.sort_by_key(Layer::n);
                Ok(layers)
            }
            (_, Some(generator)) => self
                .degree_list()?
                .iter()
                .map(|&n| generator.layer(&self.basis, n, self.oversampling))
                .collect(),
            (_, None) => unreachable!("non-file generators always map to a Generator"),
        }
    }

    /// Configured degrees or the default dyadic schedule.
    pub fn degree_list(&self) -> Result<Vec<usize>> {
        match &self.degrees {
            Some(d) => Ok(d.clone()),
            None => parse_degrees(DEFAULT_DEGREES),
        }
    }

    /// Truncation level used for the test function given the largest degree.
    pub fn truncation(&self, n_max: usize) -> usize {
        self.lambda_max.unwrap_or_else(|| (16 * n_max).max(2048))
    }
}
