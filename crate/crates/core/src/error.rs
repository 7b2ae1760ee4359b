use thiserror::Error;

/// A single violated parameter constraint. Map and branch indices are 1-based,
/// matching how systems are written down by hand.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("TooFewMaps: {count} map(s) given, at least 2 required")]
    TooFewMaps { count: usize },
    #[error("NonIncreasingBreakpoints: map {map}, breakpoint {index} ({value}) is not greater than its predecessor")]
    NonIncreasingBreakpoints { map: usize, index: usize, value: f64 },
    #[error("SlopeOutOfRange: map {map}, branch {branch}, slope {value} not in (-1,1)\\{{0}}")]
    SlopeOutOfRange { map: usize, branch: usize, value: f64 },
    #[error("EqualAdjacentSlopes: map {map}, branches {branch} and {next} share slope {value}", next = .branch + 1)]
    EqualAdjacentSlopes { map: usize, branch: usize, value: f64 },
    #[error("SlopeCountMismatch: map {map} has {breakpoints} breakpoint(s) but {slopes} slope(s)")]
    SlopeCountMismatch { map: usize, breakpoints: usize, slopes: usize },
    #[error("NonFinite: map {map} has a non-finite parameter")]
    NonFinite { map: usize },
}

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid system: {}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("config: {0}")]
    Config(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("budget exceeded: {requested} terms requested, cap is {cap}")]
    BudgetExceeded { requested: u128, cap: u64 },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("bracket failure: pressure at s_hi = {s_hi} is {value} (expected < 0)")]
    BracketFailure { s_hi: f64, value: f64 },
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("empty ratio list")]
    EmptyList,
    #[error("type mismatch: {left} maps vs {right} maps")]
    TypeMismatch { left: usize, right: usize },
    #[error("infeasible perturbation after {attempts} resamples")]
    InfeasiblePerturbation { attempts: usize },
    #[error("cylinder formula mismatch at word {word:?}: relative error {rel_err:e}")]
    FormulaMismatch { word: Vec<usize>, rel_err: f64 },
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
