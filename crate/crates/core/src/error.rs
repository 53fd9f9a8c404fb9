use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // geometry and cue errors
    #[error("box has non-positive size (w={w}, h={h})")]
    InvalidBox { w: f64, h: f64 },
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("pixel set is empty")]
    EmptyPixelSet,
    #[error("pixel set spans zero extent along one axis")]
    DegeneratePixelSet,
    #[error("feature blend has vanishing norm")]
    DegenerateFeature,
    #[error("embedding is not unit norm (norm = {norm})")]
    InvalidEmbedding { norm: f64 },
    #[error("flow grid has {actual} cells, expected {expected}")]
    FlowShape { expected: usize, actual: usize },
    #[error("mask runs sum to {actual}, expected {expected}")]
    RunSum { expected: u64, actual: u64 },
    #[error("mask run list has a zero-length run at position {index}")]
    NonCanonicalRuns { index: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    // file formats
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: box width and height must be positive")]
    NonPositiveSize { line: usize },
    #[error("line {line}: duplicate detection id {det_id} in frame {frame}")]
    DuplicateDetId { line: usize, frame: u32, det_id: i64 },
    #[error("line {line}: mask runs sum to {actual}, expected {expected}")]
    RunSumMismatch {
        line: usize,
        expected: u64,
        actual: u64,
    },
    #[error("line {line}: mask size {height}x{width} differs from image size {expected_height}x{expected_width}")]
    SizeMismatch {
        line: usize,
        height: u32,
        width: u32,
        expected_height: u32,
        expected_width: u32,
    },
    #[error("bad .flo magic {0}")]
    BadMagic(f32),
    #[error("truncated .flo file: {actual} bytes, expected {expected}")]
    TruncatedFile { expected: usize, actual: usize },
    #[error("line {line}: expected {expected} embedding values, found {actual}")]
    DimMismatch {
        line: usize,
        expected: usize,
        actual: usize,
    },
    #[error("line {line}: embedding norm {norm} is not within 1e-3 of 1")]
    NotUnitNorm { line: usize, norm: f64 },
    #[error("line {line}: unknown config key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`")]
    BadValue {
        line: usize,
        key: String,
        value: String,
    },

    // tracking
    #[error("frame {got} presented after frame {prev}")]
    OutOfOrderFrame { prev: u32, got: u32 },
    #[error("frame {frame}: pixel cues enabled but no flow field supplied")]
    MissingFlowWhenPixelCuesEnabled { frame: u32 },

    // scene generation
    #[error("scene is infeasible: {0}")]
    SpecInfeasible(String),
    #[error("unknown scenario `{name}` (valid: {valid})")]
    UnknownScenario { name: String, valid: String },

    // evaluation
    #[error("ground truth is empty")]
    EmptyGroundTruth,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attaches a file path to a format error.
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ (Error::Io { .. } | Error::File { .. }) => e,
            e => Error::File {
                path: path.into(),
                source: Box::new(e),
            },
        }
    }

    /// True for failures of the filesystem rather than of content.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::File { source, .. } => source.is_io(),
            _ => false,
        }
    }
}
