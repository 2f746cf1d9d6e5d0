#![no_main]

use libfuzzer_sys::fuzz_target;
use qc_cartan::cochain::{read_components, write_components};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // accepted files must survive a write/read round trip
    if let Ok((comps, c)) = read_components(text) {
        let again = write_components(&comps, c.signature);
        let (back, _) = read_components(&again).expect("rewritten file rejected");
        assert_eq!(write_components(&back, c.signature), again);
    }
});
