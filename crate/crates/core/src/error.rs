use thiserror::Error;

/// Why a cavity cannot support a Gaussian eigenmode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnstableKind {
    /// g1*g2* lies outside (0, 1) and the cavity is not confocal.
    OutsideStableRegion,
    /// The inner radicand g2*/(g1*(1 - g1*g2*)) is not positive.
    NegativeRadicand,
    /// g1* = g2* = 0: stable, but the M1 spot size formula is 0/0.
    ConfocalIndeterminate,
}

impl std::fmt::Display for UnstableKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            UnstableKind::OutsideStableRegion => "g1*g2* outside the stable region",
            UnstableKind::NegativeRadicand => "negative radicand in the M1 spot size",
            UnstableKind::ConfocalIndeterminate => "confocal cavity, M1 spot size indeterminate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unstable cavity: {kind} (g1*g2* = {product})")]
    UnstableCavity { kind: UnstableKind, product: f64 },

    #[error("degenerate q propagation at z = {z} m")]
    DegeneratePropagation { z: f64 },

    #[error("SHG fixed point did not converge after {iterations} iterations (last delta {last_delta:e})")]
    FixedPointDivergence { iterations: usize, last_delta: f64 },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Config and argument problems are the caller's fault; everything else is numeric.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidArgument(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
