//! Reference data shipped with the crate.

use serde::Deserialize;

use crate::error::Result;
use crate::lattice::SiteGraph;
use crate::series::RationalSeries;

const PRINTED: &str = include_str!("../fixtures/printed_series.json");
const ED_PATCH: &str = include_str!("../fixtures/ed_patch.json");

/// Published order-8 series. `energy_large` keeps the printed h⁰ term.
#[derive(Debug, Clone)]
pub struct PrintedSeries {
    pub energy_small: RationalSeries,
    pub gap_small: RationalSeries,
    pub energy_large: RationalSeries,
}

pub fn printed_series() -> Result<PrintedSeries> {
    parse_printed_series(PRINTED)
}

/// Reads a file laid out like the shipped fixture.
pub fn parse_printed_series(text: &str) -> Result<PrintedSeries> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    Ok(PrintedSeries {
        energy_small: RationalSeries::from_json(&v["energy_small"])?,
        gap_small: RationalSeries::from_json(&v["gap_small"])?,
        energy_large: RationalSeries::from_json(&v["energy_large"])?,
    })
}

#[derive(Debug, Clone, Deserialize)]
pub struct EdPatch {
    pub graph: SiteGraph,
    pub j: f64,
    pub lambda: f64,
    pub ground_energy: f64,
}

/// Dense ground energy of the mapped model on the 2×2 periodic patch.
pub fn ed_patch() -> Result<EdPatch> {
    Ok(serde_json::from_str(ED_PATCH)?)
}
