//! Exact invariants, local and glued models, and numerical recovery for
//! focus-focus fibers with several pinch points.

pub mod dual;
pub mod gluedmodel;
pub mod localmodel;
pub mod moduli;
pub mod poly;
pub mod powerseries;
pub mod recovery;

pub use gluedmodel::{ChartPoint, GlueError, GluedSystem, GroupoidWord};
pub use localmodel::{BaseCovector, BaseDiffeo, Direction, LocalError, LocalPoint};
pub use moduli::{GroupElement, InvariantTupleFull, InvariantTupleMinimal, ModuliError, Violation};
pub use poly::FloatPoly;
pub use powerseries::{ActionSeries, PiRational, SeriesError, TransitionSeries, TruncatedSeries};
pub use recovery::{FitReport, PeriodSample, RecoveryError, RoundtripReport, SamplingGrid};
