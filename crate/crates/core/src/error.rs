use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pcap format error: {0}")]
    PcapFormat(String),

    #[error("truncated pcap record at byte offset {offset}: {detail}")]
    PcapTruncated { offset: usize, detail: String },

    #[error("csv line {line}: {detail}")]
    Csv { line: usize, detail: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series too short: need at least {needed} values, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("skewness undefined: series has zero variance")]
    UndefinedSkewness,

    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid packet: {0}")]
    InvalidPacket(String),

    #[error("unknown host {0} in path topology")]
    UnknownHost(std::net::Ipv4Addr),

    #[error("invalid model parameter: {0}")]
    InvalidModel(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
