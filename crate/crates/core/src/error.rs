use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
///
/// Every variant is a math-domain failure: the inputs were well-formed but
/// the requested object does not exist (a pole, a degenerate composition,
/// an unconverged refinement) or a consistency check failed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("split boundary conditions have no transmission matrix")]
    SplitHasNoLambda,
    #[error("delta-prime potential intensity hits the pole gamma = 2 (got {0})")]
    GammaPole(f64),
    #[error("B-matrix is singular for the transmission form: |D| = {0:e}")]
    SingularD(f64),
    #[error("gamma composition leaves the delta-prime potential family: 1 + gm*gp/4 = {0:e}")]
    DegenerateComposition(f64),
    #[error("additive characteristic undefined at |gamma| = 2 (got {0})")]
    CharacteristicPole(f64),
    #[error("transformed plane has no unitary parametrization (condition {0:e})")]
    PlaneNotGraph(f64),
    #[error("coefficient is complex: the (4d) family needs |gamma| > 2 (got {0})")]
    ComplexCoefficient(f64),
    #[error("could not classify the epsilon-sequence: {0}")]
    AmbiguousClassification(String),
    #[error("split conditions are not supported on the line: {0}")]
    SplitNotSupported(String),
    #[error("kappa = {0} is not an eigenvalue (residual {1:e})")]
    NotAnEigenvalue(f64, f64),
    #[error("kappa grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("test function supports overlap: {0}")]
    SupportOverlap(String),
    #[error("cannot satisfy the calibration with eps <= {0}")]
    InfeasibleEps(f64),
    #[error("delta-neighbourhoods overlap: {0}")]
    NeighborhoodOverlap(String),
    #[error("subset {0} does not carry strictly negative beta")]
    DefinitionFiveViolated(usize),
    #[error("Cantor depth {0} exceeds the maximum of 20")]
    DepthTooLarge(u32),
    #[error("function jumps at x = {0}, which is not an atom of the measure")]
    JumpOffSupport(f64),
    #[error("evaluation point {0} coincides with an atom")]
    EvaluationOnAtom(f64),
    #[error("eigenvalue refinement did not converge: {0}")]
    UnconvergedEigenvalue(String),
    #[error("z = {0} lies on the branch cut [0, inf)")]
    BranchCut(num_complex::Complex64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
