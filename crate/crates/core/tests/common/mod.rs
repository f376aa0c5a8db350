//! Shared measure corpus for the integration tests.
#![allow(dead_code)]

use rieszlab::generators::{
    default_sparse_ratios, gen_four_corners, gen_lipschitz_graph, gen_plane, gen_segment, gen_sparse_cantor,
    mixed_test_measure, GraphSpec, MixedSpec,
};
use rieszlab::DiscreteMeasure;

pub struct Named {
    pub name: &'static str,
    pub measure: DiscreteMeasure,
}

/// Small members of every generator family (N ≤ 512).
pub fn small_corpus() -> Vec<Named> {
    let ratios = default_sparse_ratios();
    vec![
        Named { name: "segment-256", measure: gen_segment(256, 2).unwrap() },
        Named { name: "segment-512", measure: gen_segment(512, 2).unwrap() },
        Named {
            name: "graph-L1-257",
            measure: gen_lipschitz_graph(&GraphSpec::new(1, 1.0, 1.0, 1.0 / 256.0, 11)).unwrap(),
        },
        Named { name: "plane-2d-289", measure: gen_plane(2, 3, 1.0, 1.0 / 16.0).unwrap() },
        Named { name: "four-corners-3", measure: gen_four_corners(3).unwrap() },
        Named { name: "four-corners-4", measure: gen_four_corners(4).unwrap() },
        Named { name: "sparse-cantor-4", measure: gen_sparse_cantor(&ratios[..4]).unwrap().measure },
    ]
}

/// The small corpus plus larger members.
pub fn full_corpus() -> Vec<Named> {
    let mut c = small_corpus();
    c.push(Named { name: "segment-2048", measure: gen_segment(2048, 2).unwrap() });
    c.push(Named { name: "four-corners-5", measure: gen_four_corners(5).unwrap() });
    c.push(Named {
        name: "sparse-cantor-6",
        measure: gen_sparse_cantor(&default_sparse_ratios()).unwrap().measure,
    });
    c.push(Named { name: "mixed", measure: mixed_test_measure(&MixedSpec::default()).unwrap() });
    c
}
