use crate::phase_space::WignerGrid;
use serde::{Deserialize, Serialize};

/// Slack on the Wigner bound before a grid is flagged.
const BOUND_SLACK: f64 = 1e-6;

/// Non-classicality summary of a Wigner grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegativityMetrics {
    pub min_value: f64,
    pub min_location: [f64; 2],
    pub negative_volume: f64,
    /// One for pure states.
    pub purity: f64,
    /// False when some cell exceeds `|W| <= 1 / (2 pi)`; a warning only, as
    /// coarse grids can overshoot.
    pub within_bound: bool,
}

pub fn negativity_metrics(w: &WignerGrid) -> NegativityMetrics {
    let m = w.min();
    NegativityMetrics {
        min_value: m.value,
        min_location: [m.x, m.p],
        negative_volume: w.negative_volume(),
        purity: w.purity(),
        within_bound: w.within_bound(BOUND_SLACK),
    }
}
