//! Numerical workbench for anisotropic isoperimetry.
//!
//! The crate builds Wulff shapes from sampled surface tensions, measures
//! anisotropic perimeters and asymmetries of planar sets, decomposes open
//! sets into Whitney cubes, estimates John constants on the resulting cube
//! graphs, bounds boundary traces through cube chains, and runs a penalized
//! selection-type minimization whose outputs feed back into the same
//! measurements.  Everything is deterministic: fixed seeds give
//! byte-identical reports.

pub mod anisotropy;
pub mod error;
pub mod fixtures;
pub mod geom;
pub mod geomset;
pub mod hull;
pub mod io;
pub mod isoperimetry;
pub mod johnmetric;
pub mod selection;
pub mod svg;
pub mod tracelab;
pub mod verify;
pub mod whitney;

pub use anisotropy::{normalize_shape, wulff_from_tension, TensionSample, TensionSpec, WulffShape};
pub use error::{Error, Result};
pub use geom::{v2, Vec2};
pub use geomset::{BoundaryMesh, GeomSet, PolygonSystem, VoxelGrid};
pub use isoperimetry::{
    anisotropic_perimeter, asymmetry, isoperimetric_deficit, qwi_ratio, wulff_margin, Asymmetry,
    QwiReport,
};
pub use johnmetric::{
    estimate_john, john_curve_near_wulff, local_john_check, JohnCurve, JohnEstimate,
    JohnWitness, LocalJohnReport,
};
pub use selection::{
    dilate_scan, minimality_spot_check, penalized_energy, qwi_pipeline, sandwich_check,
    solve_selection, EnergyBreakdown, MinimalityReport, QwiFamilyEntry, QwiFamilyReport,
    SelectionChecks, SelectionEnergies, SelectionProblem, SelectionResult, SolverConfig,
};
pub use tracelab::{
    chain_sum_bound, chain_to_boundary, cube_averages_from_grid, trace_constant, trace_eval,
    AnalyticField, ChainReport, ChainSet, FieldTrace, ScalarField, TraceEval, TraceReport,
};
pub use io::{
    decode_set, decode_shape, encode_set, encode_shape, JohnFile, SelectFile, SetFile, ShapeFile,
    WhitneyFile,
};
pub use verify::{run_suite, CriterionReport};
pub use whitney::{decompose, WhitneyCube, WhitneyDecomposition};

/// Cap the worker pool behind the family sweeps.  Takes effect once,
/// before the first parallel call; the return value reports whether the
/// cap landed.
pub fn set_thread_cap(threads: usize) -> bool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .is_ok()
}
