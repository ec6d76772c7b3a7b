//! Workloads shared by the criterion benches.

use std::sync::Arc;

use sheafdg::derived::ClosedSubspace;
use sheafdg::fixtures::{IntersectionFixture, INTERSECTIONS, RESOLUTION_TARGETS};
use sheafdg::DgRing;

/// Resolution targets by fixture name.
pub fn targets() -> Vec<(&'static str, Arc<DgRing>)> {
    RESOLUTION_TARGETS
        .iter()
        .map(|f| (f.name, f.problem().ring("B").expect("targets define B").clone()))
        .collect()
}

/// Intersection problems ready to run: ambient ring and the two closed subspaces.
pub fn intersections() -> Vec<(&'static str, Arc<DgRing>, ClosedSubspace, ClosedSubspace)> {
    INTERSECTIONS
        .iter()
        .map(|IntersectionFixture { fixture, ideals, .. }| {
            let o = fixture.problem().ring("O").expect("fixtures define O").clone();
            let y1 = ClosedSubspace::from_exprs(&o, &ideals.0.iter().map(|s| s.to_string()).collect::<Vec<_>>())
                .expect("ideal parses");
            let y2 = ClosedSubspace::from_exprs(&o, &ideals.1.iter().map(|s| s.to_string()).collect::<Vec<_>>())
                .expect("ideal parses");
            (fixture.name, o, y1, y2)
        })
        .collect()
}
