use proptest::prelude::*;
use zerorate::decoder::{DecodeMethod, DecodingOutcome};
use zerorate::halving::HalvingStepRecord;
use zerorate_cli::{emit_json, format_float, parse_json, ExponentReport};

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e300f64..1e300, 0.0f64..1.0, Just(0.0), Just(f64::MIN_POSITIVE)]
}

proptest! {
    #[test]
    fn exponent_reports_round_trip(
        value in finite(),
        argmax in prop::collection::vec(finite(), 1..5),
        gap in finite(),
        witness in prop::option::of(prop::collection::vec(0usize..100, 1..4)),
    ) {
        let r = ExponentReport { value_nats: value, argmax, gap, witness_subset: witness };
        let back: ExponentReport = parse_json(&emit_json(&r).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn decoding_outcomes_round_trip(p in prop::collection::vec(0.0f64..1.0, 1..6), pair in any::<bool>()) {
        let o = DecodingOutcome {
            average: p.iter().sum::<f64>() / p.len() as f64,
            maximal: p.iter().copied().fold(0.0, f64::max),
            outside_support_mass: vec![0.0; p.len()],
            outside_support_error: p.iter().map(|x| x / 3.0).collect(),
            per_message_error: p,
            method: if pair { DecodeMethod::Pair } else { DecodeMethod::Types },
        };
        let back: DecodingOutcome = parse_json(&emit_json(&o).unwrap()).unwrap();
        prop_assert_eq!(back, o);
    }

    #[test]
    fn halving_records_round_trip(step in 0usize..10, var in 0.0f64..1.0, d in prop::option::of(0.0f64..1.0)) {
        let r = HalvingStepRecord {
            step,
            variables: 1 << step,
            variance: var,
            variance_difference: d,
            d_min: d,
            d_min_pair: d.map(|_| (0, 1)),
            cross_average: d,
            skew_residual: Some(0.0),
            distance_residual: None,
        };
        let back: HalvingStepRecord = parse_json(&emit_json(&r).unwrap()).unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn csv_floats_keep_twelve_digits(v in -1e6f64..1e6) {
        let s = format_float(v);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 1e-11 * v.abs().max(1e-300));
    }
}

#[test]
fn float_format_examples() {
    assert_eq!(format_float(0.0), "0");
    assert_eq!(format_float(0.25541), "0.25541");
    assert_eq!(format_float(1.0 / 3.0), "0.333333333333");
    assert_eq!(format_float(1e-9), "1.00000000000e-9");
    assert_eq!(format_float(123456.0), "123456");
}
