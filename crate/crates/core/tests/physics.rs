use blockage::diffraction::{field_grid, BodyState, QuadratureSpec};
use blockage::geometry::{default_scene, Pose};
use blockage::imaging::attenuation_map;

fn p1_map() -> blockage::imaging::AttenuationMap {
    let scene = default_scene().with_window(1, 60, 90).unwrap();
    let quad = QuadratureSpec::for_wavelength(scene.wavelength());
    let free = field_grid(&scene, BodyState::FreeSpace, &quad).unwrap();
    let body = field_grid(&scene, BodyState::Body(Pose::new(2.0, 0.0, 0.0)), &quad).unwrap();
    attenuation_map(&body, &free, 0).unwrap()
}

#[test]
fn p1_shadow_is_mirror_symmetric_and_dominant() {
    let m = p1_map();
    let mut worst: f64 = 0.0;
    for r in 0..m.rows {
        for c in 0..m.cols {
            worst = worst.max((m.get(r, c) - m.get(r, m.cols - 1 - c)).abs());
        }
    }
    assert!(worst < 1e-6, "left/right asymmetry {worst} dB");

    // shadow band (|y| < half body width) versus the outer columns
    let mid = m.rows / 2;
    let inner: f64 = (25..65).map(|c| m.get(mid, c)).sum::<f64>() / 40.0;
    let outer: f64 = [0, 1, 2, 87, 88, 89]
        .iter()
        .map(|&c| m.get(mid, c))
        .sum::<f64>()
        / 6.0;
    assert!(inner > outer + 3.0, "inner {inner} outer {outer}");
}
