use atlas_core::embedding::estimate_dim;
use atlas_core::learn::learn_atlas_with_diagnostics;
use atlas_core::netspace::StateSpace;
use atlas_core::rng;
use atlas_core::systems::image::{approx_invert, embed, image_distance, ImageSpace};
use atlas_core::systems::sde::{euler_maruyama, three_well_grid, three_well_space, SdeSystem};
use atlas_core::systems::string::{f_norm, string_distance};
use atlas_core::systems::{Lorenz96Multiscale, StringSpace};
use atlas_core::AtlasParams;

#[test]
fn string_landmark_spectra_are_three_dimensional() {
    let space = StringSpace::sampled(2000, 250, 1);
    let params = AtlasParams {
        delta: 0.3,
        d: 3,
        m: 40,
        p: 2,
        t0: 250.0,
        dt: 50.0,
    };
    let (model, diag) = learn_atlas_with_diagnostics(&space, &params, 2).unwrap();
    let threes = diag
        .spectra
        .iter()
        .filter(|s| estimate_dim(s, 0.3) == 3)
        .count();
    let n = model.n_charts();
    println!("d = 3 on {threes} of {n} charts");
    assert!(threes as f64 >= 0.99 * n as f64);
}

#[test]
fn string_states_keep_constraints() {
    let space = StringSpace::sampled(20, 10, 4);
    for f in space.initial_points() {
        assert_eq!(f.len(), 100);
        assert_eq!((f[0], f[99]), (0.0, 0.0));
        let n = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((n - f_norm()).abs() < 1e-12);
    }
    let f = &space.initial_points()[0];
    let g = space
        .simulate(f, 3, 5.0, &mut rng::stream(1, "s", 0))
        .unwrap();
    assert_eq!(g.len(), 3);
    assert!(g.iter().all(|h| string_distance(h, f) > 0.0));
}

#[test]
fn image_wrapper_follows_base() {
    let base = three_well_space(false, 0.2);
    let n_base = base.initial_points().len();
    let space = ImageSpace::new(base);
    assert_eq!(space.initial_points().len(), n_base);
    let x = embed(&[0.1, -0.2]);
    assert_eq!(image_distance(&x, &x), 0.0);
    let out = space
        .simulate(&x, 4, 0.01, &mut rng::stream(3, "i", 0))
        .unwrap();
    for img in &out {
        let p = approx_invert(img).unwrap();
        assert!(((p[0] - 0.1).powi(2) + (p[1] + 0.2).powi(2)).sqrt() < 0.6);
    }
    assert_eq!(space.micro_dt(), Some(0.005));
}

#[test]
fn three_well_grid_spacing() {
    let g = three_well_grid(0.04);
    assert!(g.len() > 1000);
    assert!(g.iter().all(|p| atlas_core::systems::sde::u2(p) < 10.0));
}

#[test]
fn brownian_endpoint_variance() {
    let sys = SdeSystem::new(1, 0.01, |_, o| o[0] = 0.0);
    let mut r = rng::stream(6, "bm", 0);
    let xs: Vec<f64> = (0..10_000)
        .map(|_| euler_maruyama(&sys, &[0.0], 1.0, &mut r).unwrap()[0])
        .collect();
    let m = xs.iter().sum::<f64>() / 1e4;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 9999.0;
    assert!((v - 1.0).abs() <= 3.0 * (2.0f64 / 9999.0).sqrt(), "{v}");
}

#[test]
fn lorenz_outputs_are_82_dimensional() {
    let l = Lorenz96Multiscale::new(0.01)
        .with_sampled_initial(2, 1.0, 5)
        .unwrap();
    assert_eq!(l.initial_points().len(), 2);
    let out = l
        .simulate(&l.initial_points()[0], 2, 1.0, &mut rng::stream(1, "l", 0))
        .unwrap();
    assert!(out
        .iter()
        .all(|v| v.len() == 82 && v.iter().all(|x| x.is_finite())));
    assert!(out[0][2..].iter().all(|y| y.abs() < 1e-2));
}
