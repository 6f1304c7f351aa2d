use blockage::dataset::{read_dataset, read_header_only, write_dataset, StateRecord};
use blockage::diffraction::{field_grid, BodyState, FieldGrid, QuadratureSpec};
use blockage::geometry::{default_scene, Pose};
use blockage::pipeline::{ensemble_header, parse_positions};
use blockage::Error;
use num_complex::Complex64;

#[test]
fn small_grid_round_trip_is_bit_identical() {
    let scene = default_scene().with_window(1, 2, 2).unwrap();
    let mut header = ensemble_header(&scene, &[]).unwrap();
    header.states.push(StateRecord {
        state_id: 1,
        nominal_index: 2,
        nominal: Pose::new(2.0, 0.25, 0.0),
        offset: Pose::new(0.03, -0.03, 135.0),
    });
    let free = field_grid(
        &scene,
        BodyState::FreeSpace,
        &QuadratureSpec::for_wavelength(scene.wavelength()),
    )
    .unwrap();
    let odd = FieldGrid::new(
        (1, 2, 2),
        vec![
            Complex64::new(-0.0, 1e-310),
            Complex64::new(f64::MAX, -f64::MIN_POSITIVE),
            Complex64::new(1.0 / 3.0, std::f64::consts::PI),
            Complex64::new(-7.25, 0.0),
        ],
        "odd".into(),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.blk");
    write_dataset(&path, &header, &[free.clone(), odd.clone()]).unwrap();
    let back = read_dataset(&path).unwrap();
    assert_eq!(back.header, header);
    for (got, want) in back.samples.iter().zip([&free.samples, &odd.samples]) {
        let bits = |v: &[Complex64]| {
            v.iter()
                .flat_map(|z| [z.re.to_bits(), z.im.to_bits()])
                .collect::<Vec<_>>()
        };
        assert_eq!(bits(got), bits(want));
    }
    assert_eq!(read_header_only(&path).unwrap().frequency_hz, 2.4868e9);

    let again = dir.path().join("y.blk");
    write_dataset(
        &again,
        &back.header,
        &[back.grid(0).unwrap(), back.grid(1).unwrap()],
    )
    .unwrap();
    assert_eq!(
        std::fs::read(&path).unwrap(),
        std::fs::read(&again).unwrap()
    );
}

#[test]
fn mismatched_dims_are_rejected() {
    let scene = default_scene().with_window(1, 2, 2).unwrap();
    let header = ensemble_header(&scene, &[]).unwrap();
    let wrong = FieldGrid::new((1, 3, 1), vec![Complex64::new(1.0, 0.0); 3], "w".into()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let r = write_dataset(&dir.path().join("z.blk"), &header, &[wrong]);
    assert!(matches!(r, Err(Error::DimsMismatch(_))));
}

#[test]
fn default_scenario_file_size() {
    let scene = default_scene();
    let header = ensemble_header(&scene, &parse_positions("p1").unwrap()).unwrap();
    assert_eq!(header.states.len(), 37);
    assert_eq!(header.samples_per_state(), 810_000);
    assert_eq!(
        header.file_bytes(),
        header.header_bytes() + 37 * 810_000 * 16
    );
    assert_eq!(header.header_bytes(), 98 + 37 * 56);
}

#[test]
fn corrupted_files() {
    let scene = default_scene().with_window(1, 1, 3).unwrap();
    let header = ensemble_header(&scene, &[]).unwrap();
    let free = field_grid(
        &scene,
        BodyState::FreeSpace,
        &QuadratureSpec::for_wavelength(scene.wavelength()),
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.blk");
    write_dataset(&path, &header, &[free]).unwrap();
    let good = std::fs::read(&path).unwrap();

    let mut bad = good.clone();
    bad[..4].copy_from_slice(b"NOPE");
    std::fs::write(&path, &bad).unwrap();
    assert!(matches!(read_dataset(&path), Err(Error::BadMagic(_))));

    std::fs::write(&path, &good[..good.len() - 5]).unwrap();
    match read_dataset(&path) {
        Err(Error::Truncated { offset }) => assert_eq!(offset, good.len() as u64 - 5),
        other => panic!("{other:?}"),
    }
}
