use sedonet_wasm_demo::*;

#[test]
fn curves_are_laid_out_mode_by_mode() {
    let c = chebyshev_curves_impl(4, 5).unwrap();
    assert_eq!(c.len(), 20);
    // T_0 = 1, T_1(ξ) = ξ, T_3(±1) = ±1
    assert!(c[..5].iter().all(|&v| v == 1.0));
    assert_eq!(&c[5..10], &[-1.0, -0.5, 0.0, 0.5, 1.0]);
    assert_eq!((c[15], c[19]), (-1.0, 1.0));
}

#[test]
fn gauss_sampling_conditions_better_than_uniform() {
    let g = gram_impl(12, 48, "gauss").unwrap();
    let u = gram_impl(12, 48, "uniform").unwrap();
    assert_eq!(g.dim(), 12);
    assert_eq!(g.matrix().len(), 144);
    assert!(g.condition_number() <= u.condition_number());
    assert!(gram_impl(12, 48, "random").is_err());
}

#[test]
fn superset_reports_both_errors() {
    let r = superset_impl(8, 16, 200, 1e-3, 0).unwrap();
    assert!(r[0] <= 1e-10);
    assert!(r[1] > r[0]);
    assert!(superset_impl(8, 16, 0, 1e-3, 0).is_err());
}
