#![no_main]

use cookiezeta_cli::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(config) = RunConfig::parse(data) else { return };
    // the hash is a function of the parsed config, not of the input bytes
    let again = RunConfig::parse(&serde_json::to_vec(&config).unwrap()).unwrap();
    assert_eq!(config.hash(), again.hash());
    if let Ok(map) = config.build_map() {
        let _ = config.build_potential(&map);
    }
    let _ = config.zeta_config();
});
