use tension_core::catalog;
use tension_core::derived::{corner_quantities, wyner_common_information};
use tension_core::oracle::{brute_force_support, GridSpec};
use tension_core::structure::intercepts_exact;
use tension_core::tension_opt::{
    octant_directions, scalarized_min, slice_at, slice_z, trace_region,
};
use tension_core::{DirectionWeights, OptimizerConfig, TensionPoint};

fn fast() -> OptimizerConfig {
    OptimizerConfig {
        restarts: 8,
        ..OptimizerConfig::default()
    }
}

#[test]
fn optimizer_never_loses_to_the_grid() {
    let j = catalog::z_source(0.25).unwrap().joint;
    let g = GridSpec::new(3, 6);
    for d in octant_directions(6) {
        let opt = scalarized_min(&j, &d, &fast()).unwrap();
        let grid = brute_force_support(&j, &d, &g).unwrap();
        assert!(
            opt.value <= grid.value + 1e-9,
            "{:?}: {} vs {}",
            d.weights(),
            opt.value,
            grid.value
        );
        assert!((opt.point.dot(d.weights()) - opt.value).abs() < 1e-12);
    }
}

#[test]
fn slice_endpoints_are_the_intercepts() {
    let j = catalog::z_source(0.25).unwrap().joint;
    let i = intercepts_exact(&j);
    let pts = slice_z(&j, 3, &fast()).unwrap();
    let (first, last) = (&pts[0], &pts[2]);
    assert!(
        first
            .point()
            .max_abs_diff(TensionPoint::new(i.tx, 0.0, 0.0))
            < 1e-3,
        "{first:?}"
    );
    assert!(
        last.point().max_abs_diff(TensionPoint::new(0.0, i.ty, 0.0)) < 1e-3,
        "{last:?}"
    );
}

#[test]
fn slice_moves_toward_the_axes_as_p_shrinks() {
    let mut last = f64::INFINITY;
    for p in [0.3, 0.2, 0.1] {
        let s = slice_at(&catalog::z_source(p).unwrap().joint, 0.5, &fast()).unwrap();
        assert!(s.feasible);
        assert!(s.r1 + s.r2 < last);
        last = s.r1 + s.r2;
    }
}

#[test]
fn wyner_of_bit_ot() {
    let w = wyner_common_information(
        &catalog::bit_ot().unwrap().joint,
        &OptimizerConfig::default(),
    )
    .unwrap();
    assert!((w.value - 2.0).abs() <= 0.03, "{w:?}");
    assert!(w.value >= w.mutual_information - 1e-6);
    assert!((w.direct - (w.value - w.residual)).abs() < 1e-6);
}

#[test]
fn wyner_of_resolvable_pair_is_common_entropy() {
    let e = catalog::uniform_common(4, 2, 1).unwrap();
    let w = wyner_common_information(&e.joint, &fast()).unwrap();
    assert!((w.value - 2.0).abs() < 1e-9);
}

#[test]
fn corner_quantities_of_string_ot() {
    for l in 1..=2 {
        let c = corner_quantities(&catalog::string_ot_pair(l).unwrap().joint);
        let want = 3.0 * l as f64 + 1.0;
        assert!(
            (c.gyx - want).abs() < 1e-9
                && (c.gxy - want).abs() < 1e-9
                && (c.max - want).abs() < 1e-9
        );
    }
}

#[test]
fn traced_bit_ot_respects_its_certificates() {
    let e = catalog::bit_ot().unwrap();
    let mut region = trace_region(&e.joint, &octant_directions(6), &fast()).unwrap();
    region.certified = e.seed_region().unwrap().certified;
    assert!(region.inconsistencies(1e-6).is_empty());
    assert!(!region.contains_origin(1e-6));
    let half = DirectionWeights::new(1.0, 1.0, 0.0).unwrap();
    assert!(region.support_upper(&half).unwrap() >= 0.0);
}

#[test]
fn trace_of_resolvable_pair_contains_origin() {
    let e = catalog::connected_example(0.0).unwrap();
    let region = trace_region(&e.joint, &octant_directions(4), &fast()).unwrap();
    assert!(region.contains_origin(1e-12));
    assert!(region.support_upper.iter().all(|s| s.value == 0.0));
}

#[test]
fn same_seed_same_region() {
    let j = catalog::z_source(0.3).unwrap().joint;
    let cfg = fast().with_seed(7);
    let a = trace_region(&j, &octant_directions(5), &cfg)
        .unwrap()
        .to_json_string();
    let b = trace_region(&j, &octant_directions(5), &cfg)
        .unwrap()
        .to_json_string();
    assert_eq!(a, b);
}
