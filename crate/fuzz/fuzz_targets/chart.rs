#![no_main]

use libfuzzer_sys::fuzz_target;
use qc_cartan::chart::{chart_to_file, parse_chart};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(chart) = parse_chart(text) {
        // certifying must not panic on anything the parser lets through
        let _ = chart.certify();
        let again = serde_json::to_string(&chart_to_file(&chart)).unwrap();
        let back = parse_chart(&again).expect("rewritten chart rejected");
        assert_eq!(back.eta, chart.eta);
    }
});
