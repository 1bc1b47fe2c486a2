use thiserror::Error;

/// Unified error type for every operation in the crate.
///
/// Message prefixes are stable and intended for programmatic matching;
/// fields carry the offending values for diagnostics.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("not Hermitian: deviation {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("decomposition failed")]
    DecompositionFailed,

    #[error("endpoint hits spectrum: {endpoint} within {tol:.3e} of an eigenvalue")]
    EndpointHitsSpectrum { endpoint: f64, tol: f64 },

    #[error("E0 not in spectrum: {e0} is farther than {tol:.3e} from every eigenvalue")]
    E0NotInSpectrum { e0: f64, tol: f64 },

    #[error("resolvent pole: z is within {dist:.3e} of the spectrum")]
    ResolventPole { dist: f64 },

    #[error("invalid potential sample at node {index}")]
    InvalidPotentialSample { index: usize },

    #[error("negative radius: grid starts at {x_min}")]
    NegativeRadius { x_min: f64 },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: &'static str },

    #[error("degenerate eigenvalue: RS simple-case only (cluster size {cluster_size} at index {index})")]
    DegenerateEigenvalue { index: usize, cluster_size: usize },

    #[error("kappa must be positive (got {kappa})")]
    KappaMustBePositive { kappa: f64 },

    #[error("trial vector not normalized: |phi| = {norm}")]
    TrialNotNormalized { norm: f64 },

    #[error("Temple-Kato hypothesis fails: eps2 = {eps2:.6e} >= (eta-alpha)(zeta-eta) = {window:.6e}")]
    TempleKatoHypothesisFails { eps2: f64, window: f64 },

    #[error("window excludes Rayleigh quotient: eta = {eta} outside ({alpha}, {zeta})")]
    WindowExcludesRayleigh { eta: f64, alpha: f64, zeta: f64 },

    #[error("eigenvector bound requires eps < delta (eps = {eps}, delta = {delta})")]
    EigenvectorBoundUndefined { eps: f64, delta: f64 },

    #[error("not a projection pair: {reason}")]
    NotAProjectionPair { reason: &'static str },

    #[error("projections not norm-close: |P-Q| = {norm}")]
    ProjectionsNotNormClose { norm: f64 },

    #[error("B is singular: smallest |eigenvalue| = {min_abs:.3e}")]
    BSingular { min_abs: f64 },

    #[error("numerical degradation: trace {trace} is {dist:.3e} from the nearest integer")]
    NumericalDegradation { trace: f64, dist: f64 },

    #[error("no symmetry: corner dimensions differ ({dim_pq} vs {dim_cpq})")]
    CornerDimensionsDiffer { dim_pq: usize, dim_cpq: usize },

    #[error("trivial projection excluded")]
    TrivialProjectionExcluded,

    #[error("band collision: gap {gap:.3e} below floor {floor:.3e} at s = {s}")]
    BandCollision { s: f64, gap: f64, floor: f64 },

    #[error("integrator failure: unitarity drift {drift:.3e}")]
    IntegratorFailure { drift: f64 },

    #[error("path not closed: |H(1)-H(0)| = {deviation:.3e}")]
    PathNotClosed { deviation: f64 },

    #[error("holonomy is a matrix: use kato_transport (band rank {rank})")]
    HolonomyIsAMatrix { rank: usize },

    #[error("Pade block degeneracy: pivot {pivot:.3e} below threshold in the [{n},{m}] system")]
    PadeBlockDegeneracy { n: usize, m: usize, pivot: f64 },

    #[error("Borel continuation obstructed: pole at w = {pole:.6e} on the positive axis")]
    BorelContinuationObstructed { pole: f64 },

    #[error("truncation contaminates order {order}: basis size {basis} below required {required}")]
    TruncationContaminatesOrder { order: usize, basis: usize, required: usize },

    #[error("series too short: need {needed} coefficients, have {have}")]
    SeriesTooShort { needed: usize, have: usize },

    #[error("node in trial eigenfunction at index {index}")]
    NodeInTrialEigenfunction { index: usize },

    #[error("ground-state isolation failed: {reason}")]
    GroundStateIsolationFailed { reason: &'static str },

    #[error("invalid masses: mass ratio {ratio} must be positive")]
    InvalidMasses { ratio: f64 },

    #[error("eigenvalue absorbed: no secular root in ({lo}, {hi}) at beta = {beta}")]
    EigenvalueAbsorbed { beta: f64, lo: f64, hi: f64 },

    #[error("Rellich constant nonpositive regime: nu = {nu} < 5")]
    RellichNonpositiveRegime { nu: u32 },

    #[error("spectral truncation: widen momentum window (need k_min <= 1e-3 <= 1e3 <= k_max, got [{k_min:.3e}, {k_max:.3e}])")]
    SpectralTruncation { k_min: f64, k_max: f64 },

    #[error("invalid argument: {reason}")]
    InvalidArgument { reason: &'static str },
}

pub type Result<T> = std::result::Result<T, Error>;
