use std::path::Path;

use tneda_bench::ExperimentConfig;

#[test]
fn shipped_configs_load_and_resolve() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let (cfg, base) = ExperimentConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let solver = cfg.solver_config().unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let inst = cfg.instance(&base).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(cfg.seeds.expand().unwrap().len() > 1);
        assert!(solver.eda.call_budget > solver.eda.initial_population);
        assert!(inst.problem.dim() > 0);
        n += 1;
    }
    assert_eq!(n, 5);
}
