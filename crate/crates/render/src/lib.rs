//! Notation-faithful SVG rendering and lossy DOT export of mpEAd diagrams.

mod dot;
pub mod geom;
pub mod layout;
mod svg;

use thiserror::Error;

pub use dot::render_dot;
pub use layout::{layout, Layout, LayoutAlgorithm, LayoutConfig, INSET_POSITION};
pub use svg::{alternating_dasharray, line_style, marker_class, marker_id, render_svg, svg_document};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("force layout did not converge within {iterations} iterations")]
    LayoutFailure { iterations: usize },
}
