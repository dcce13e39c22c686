use gaugephase::operators::{
    gen_gaussian, gen_hadamard, read_instance, write_instance, Instance, InstanceMeta, Observations,
};

#[test]
fn instance_round_trips_bit_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let mut inst = gen_gaussian(17, 5, 8).unwrap();
    inst.meta.image_dims = Some((1, 5));
    write_instance(dir.path(), &inst).unwrap();
    assert_eq!(read_instance(dir.path()).unwrap(), inst);
}

#[test]
fn instance_without_signal_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let ensemble = gen_hadamard(20, 6, 2).unwrap();
    let b = Observations::new(ensemble.row_norms_sq()).unwrap();
    let meta = InstanceMeta {
        generator: "hadamard".into(),
        seed: Some(2),
        image_dims: None,
    };
    let inst = Instance::new(ensemble, b, None, meta).unwrap();
    write_instance(dir.path(), &inst).unwrap();
    let back = read_instance(dir.path()).unwrap();
    assert!(back.x.is_none());
    assert_eq!(back, inst);
}

#[test]
fn missing_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(read_instance(&dir.path().join("absent")).is_err());
}
