use gaugephase::operators::{gen_gaussian, gen_hadamard, GroundTruth, Instance, InstanceMeta};

use crate::error::{HarnessError, Result};
use crate::image::ImageGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Gaussian,
    Hadamard,
}

impl std::str::FromStr for EnsembleKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "hadamard" => Ok(Self::Hadamard),
            other => Err(HarnessError::Config(format!("unknown ensemble '{other}'"))),
        }
    }
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Hadamard => "hadamard",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SignalSource {
    /// Fresh standard normal signal per seed.
    Gaussian {
        n: usize,
    },
    Image(ImageGrid),
}

/// A family of noise-free instances indexed by seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub ensemble: EnsembleKind,
    pub m: usize,
    pub signal: SignalSource,
}

impl ProblemSpec {
    pub fn n(&self) -> usize {
        match &self.signal {
            SignalSource::Gaussian { n } => *n,
            SignalSource::Image(g) => g.height() * g.width(),
        }
    }

    pub fn with_m(&self, m: usize) -> Self {
        Self { m, ..self.clone() }
    }

    pub fn build(&self, seed: u64) -> Result<Instance> {
        let gaussian = gen_gaussian(self.m, self.n(), seed)?;
        let (ensemble, x, dims) = match (&self.signal, self.ensemble) {
            (SignalSource::Gaussian { .. }, EnsembleKind::Gaussian) => return Ok(gaussian),
            (SignalSource::Gaussian { .. }, EnsembleKind::Hadamard) => (
                gen_hadamard(self.m, self.n(), seed)?,
                gaussian.x.expect("gaussian instances carry x"),
                None,
            ),
            (SignalSource::Image(g), kind) => {
                let ensemble = match kind {
                    EnsembleKind::Gaussian => gaussian.ensemble,
                    EnsembleKind::Hadamard => gen_hadamard(self.m, self.n(), seed)?,
                };
                (
                    ensemble,
                    GroundTruth::new(g.to_signal())?,
                    Some((g.height(), g.width())),
                )
            }
        };
        let meta = InstanceMeta {
            generator: self.ensemble.name().into(),
            seed: Some(seed),
            image_dims: dims,
        };
        Ok(Instance::from_signal(ensemble, x, meta)?)
    }
}
