//! Convergence along the scaled family `j = N/4`, `k = N/2`, where the torus is
//! fixed as `N` grows; the fixed-`j` family collapses onto the equator instead.

use monopole_core::harness::{convergence_sweep, IndexRule, SweepPattern, DEFAULT_GRID};

#[test]
fn scaled_family_converges() {
    let pattern = SweepPattern {
        j: IndexRule::Scaled { num: 1, den: 4 },
        k: IndexRule::Scaled { num: 1, den: 2 },
    };
    let table = convergence_sweep(pattern, &[8, 16, 32, 64], DEFAULT_GRID);
    let reports: Vec<_> = table.reports().collect();
    for r in &reports {
        println!(
            "N={} defect {:.3e} norm {:.6} residual {:.3e} gap {:?}",
            r.n, r.overlap_defect, r.norm_wkb, r.rel_residual_wkb, r.uniform_gap
        );
    }
    assert_eq!(reports.len(), 4);
    for w in table.ratios.iter() {
        assert!(w.overlap_defect <= 0.7, "{w:?}");
        assert!(w.norm_error <= 0.7, "{w:?}");
        assert!(w.rel_residual <= 0.7, "{w:?}");
    }
}
