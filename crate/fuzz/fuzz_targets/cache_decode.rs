#![no_main]

use cookiezeta_cli::cache::{decode, encode};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(table) = decode(data, None) else { return };
    // anything accepted is in canonical form
    let key: [u8; 32] = data[12..44].try_into().unwrap();
    assert_eq!(encode(&table, &key), data);
});
