pub mod certify;
pub mod cover;
pub mod diagram;
pub mod dilog;
pub mod gluing;
pub mod interval;
pub mod snf;
pub mod tangle;
pub mod triangulate;

pub use certify::{certify_pipeline, Certificate, PipelineOptions, Verdict};
pub use cover::AxisPresentation;
pub use diagram::{ComponentRole, DiagramError, FramedLink, LinkDiagram, Slope};
pub use gluing::{GluingSystem, ShapeAssignment};
pub use interval::{CInterval, Interval};
pub use tangle::Tangle;
pub use triangulate::IdealTriangulation;
