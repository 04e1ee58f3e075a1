use combilp::energy::energy_of;
use combilp::io::{parse_native, parse_uai_lg, write_native, write_uai_lg, Format};
use combilp::model::GraphicalModel;
use combilp::synth::{random_labeling, random_model, EnsembleParams};
use combilp::{Error, ModelF32};
use proptest::prelude::*;
use rand::SeedableRng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn native_round_trip(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m: GraphicalModel<f64> = random_model(&mut rng, &EnsembleParams::default());
        let text = write_native(&m);
        let back: GraphicalModel<f64> = parse_native(&text).unwrap();
        prop_assert_eq!(back.to_spec(), m.to_spec());
        prop_assert_eq!(write_native(&back), text);
    }

    #[test]
    fn formats_agree_on_energies(seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m: GraphicalModel<f64> = random_model(&mut rng, &EnsembleParams::default());
        let uai: GraphicalModel<f64> = parse_uai_lg(&write_uai_lg(&m)).unwrap();
        for _ in 0..20 {
            let x = random_labeling(&mut rng, &m);
            prop_assert_eq!(energy_of(&m, m.costs(), &x), energy_of(&uai, uai.costs(), &x));
        }
    }
}

#[test]
fn single_precision_models_round_trip() {
    let text = "MAPMODEL 1\n2 1\n2 3\n0.1 0.2\n0 inf 0.3\n0 1\n1 2 3\n4 5 6.5\n";
    let m: ModelF32 = parse_native(text).unwrap();
    assert_eq!(m.costs().unary(0), &[0.1f32, 0.2]);
    assert_eq!(write_native(&m), text);
    let back: ModelF32 = Format::UaiLg.parse(&Format::UaiLg.write(&m)).unwrap();
    assert_eq!(back.to_spec(), m.to_spec());
}

#[test]
fn format_names() {
    assert_eq!("uai-lg".parse::<Format>().unwrap(), Format::UaiLg);
    assert_eq!(Format::Native.to_string(), "native");
    assert!(matches!("hdf5".parse::<Format>(), Err(Error::Config(_))));
}

#[test]
fn dimension_errors_name_the_edge() {
    let doc = "MAPMODEL 1\n2 2\n2 2\n0 1\n0 1\n0 1\n0 0\n0 0\n0 1\n0 0\n0 0\n";
    match parse_native::<f64>(doc) {
        Err(Error::InvalidModel(v)) => assert!(v.iter().any(|x| x.to_string().contains("edge #1"))),
        other => panic!("unexpected {other:?}"),
    }
}
