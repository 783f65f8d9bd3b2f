use std::path::Path;

use rieszwave::experiments::StudyConfig;

#[test]
fn shipped_configs_load_and_build_a_simulation() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = StudyConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            let kind = cfg.study.unwrap_or(rieszwave::experiments::StudyKind::Rate);
            cfg.clone().for_study(kind).unwrap();
            cfg.sim_config().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 3);
}
