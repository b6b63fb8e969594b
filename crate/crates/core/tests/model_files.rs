use proptest::prelude::*;

use pointlab::model::{
    load_measure, measure_from_json, measure_to_json, preset_radial_tree, save_measure, DisorderMeasure, SupportAtom,
    VertexCondition,
};
use pointlab::Mat2;

fn sl2(t: f64, b: f64, q: f64) -> Mat2 {
    Mat2::rotation(t) * Mat2::dilation(b) * Mat2::shear(q)
}

proptest! {
    #[test]
    fn json_round_trip_is_lossless(
        ells in prop::collection::vec(0.01f64..10.0, 1..5),
        params in prop::collection::vec((0.0f64..6.3, 0.1f64..10.0, -50.0f64..50.0), 5),
        kinds in prop::collection::vec(0u8..3, 5),
    ) {
        let atoms: Vec<_> = ells
            .iter()
            .enumerate()
            .map(|(i, &ell)| {
                let (t, b, q) = params[i];
                let condition = match kinds[i] {
                    0 => VertexCondition::Trivial { theta: t },
                    1 => VertexCondition::connecting(sl2(t, b, q)),
                    _ => VertexCondition::Separating { x: t.cos(), y: t.sin(), w: q, z: b },
                };
                SupportAtom::new(ell, condition, 1.0 / ells.len() as f64)
            })
            .collect();
        let Ok(m) = DisorderMeasure::merged("random", atoms) else { return Ok(()) };
        let back = measure_from_json(&measure_to_json(&m).unwrap()).unwrap();
        prop_assert_eq!(&back, &m);
    }
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.json");
    let m = preset_radial_tree(&[((0.1, 2), 1.0 / 3.0), ((-0.7, 3), 2.0 / 3.0)], std::f64::consts::E).unwrap();
    save_measure(&m, &path).unwrap();
    assert_eq!(load_measure(&path).unwrap(), m);
}

#[test]
fn schema_errors_are_reported() {
    let bad_params = r#"{"name":"x","atoms":[{"ell":1,"kind":"connecting","params":[0,1,0],"weight":1}]}"#;
    assert!(measure_from_json(bad_params).is_err());
    let bad_weight = r#"{"name":"x","atoms":[{"ell":1,"kind":"trivial","params":[0],"weight":0.5}]}"#;
    assert!(measure_from_json(bad_weight).is_err());
    let bad_kind = r#"{"name":"x","atoms":[{"ell":1,"kind":"robin","params":[0],"weight":1}]}"#;
    assert!(measure_from_json(bad_kind).is_err());
}
