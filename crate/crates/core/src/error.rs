use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("slot {slot} outside 1..={num_slots}")]
    SlotOutOfRange { slot: usize, num_slots: usize },

    #[error("cardinality out of range: {len} not in [{g_min}, {g_max}]")]
    CardinalityOutOfRange {
        len: usize,
        g_min: usize,
        g_max: usize,
    },

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("alpha {0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("no frames")]
    NoFrames,

    #[error("sweep cell (p={p}, p_hat={p_hat}, scheduler={scheduler}, seed={seed}): {source}")]
    Cell {
        p: f64,
        p_hat: f64,
        scheduler: &'static str,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
