//! Property tests for the serialization round trips.

use std::io::Cursor;

use proptest::prelude::*;

use soft2hard::heat::{read_spectrum, write_spectrum, SineSpectrum};
use soft2hard::sweep::{emit_records, parse_records_csv, EmitFormat, SolverTag, SweepRecord};

proptest! {
    #[test]
    fn spectrum_text_round_trip(
        coeffs in prop::collection::vec(-1e6f64..1e6, 1..40),
        horizon in 0.01f64..100.0,
    ) {
        let spectrum = SineSpectrum::new(coeffs).unwrap();
        let mut buf = Vec::new();
        write_spectrum(&mut buf, horizon, &spectrum).unwrap();
        let (t, back) = read_spectrum(&mut Cursor::new(buf)).unwrap();
        // shortest round-trip float formatting makes this exact
        prop_assert_eq!(t, horizon);
        prop_assert_eq!(back, spectrum);
    }

    #[test]
    fn records_csv_round_trip(
        rows in prop::collection::vec(
            (1e-6f64..1e8, 1e-12f64..1e3, 1e-12f64..1e3, prop::option::of(1e-12f64..1e3)),
            1..20,
        ),
    ) {
        let records: Vec<SweepRecord> = rows
            .iter()
            .map(|&(alpha, terminal_err, control_err, state_err)| SweepRecord {
                alpha,
                terminal_err,
                control_err,
                state_err,
                solver_tag: SolverTag::HeatModal,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        emit_records(&path, EmitFormat::Csv, &records, &[], &serde_json::Value::Null).unwrap();
        let back = parse_records_csv(std::fs::File::open(&path).unwrap()).unwrap();
        prop_assert_eq!(back, records);
    }
}
