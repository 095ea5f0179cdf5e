//! Replays the fuzz corpus seeds and single-byte corruptions of them through
//! the same checks as the fuzz targets.

use std::path::PathBuf;

use cookiezeta_cli::cache::{decode, encode};
use cookiezeta_cli::RunConfig;

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            let bytes = std::fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

fn config_parse(data: &[u8]) -> bool {
    let Ok(config) = RunConfig::parse(data) else {
        return false;
    };
    let again = RunConfig::parse(&serde_json::to_vec(&config).unwrap()).unwrap();
    assert_eq!(config.hash(), again.hash());
    if let Ok(map) = config.build_map() {
        let _ = config.build_potential(&map);
    }
    let _ = config.zeta_config();
    true
}

fn cache_decode(data: &[u8]) -> bool {
    let Ok(table) = decode(data, None) else {
        return false;
    };
    let key: [u8; 32] = data[12..44].try_into().unwrap();
    assert_eq!(encode(&table, &key), data);
    true
}

#[test]
fn config_seeds() {
    for (path, bytes) in seeds("config_parse") {
        assert!(config_parse(&bytes), "{}", path.display());
        for i in 0..bytes.len() {
            let mut m = bytes.clone();
            m[i] = m[i].wrapping_add(1);
            config_parse(&m);
            config_parse(&bytes[..i]);
        }
    }
}

#[test]
fn cache_seeds() {
    for (path, bytes) in seeds("cache_decode") {
        assert!(cache_decode(&bytes), "{}", path.display());
        for i in 0..bytes.len() {
            let mut m = bytes.clone();
            m[i] ^= 0x55;
            assert!(!cache_decode(&m));
            assert!(!cache_decode(&bytes[..i]));
        }
    }
}
