#![no_main]
use libfuzzer_sys::fuzz_target;
use tristeer::sweep::SweepSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = SweepSpec::from_json(text) else { return };
    // keep allocations bounded
    if spec.grid_points > 4096 || spec.fock_ranges.iter().any(|&k| k > 64) {
        return;
    }
    let grid = spec.grid().expect("validated spec has a grid");
    assert!(!grid.is_empty());
    assert!(grid.windows(2).all(|w| w[0] < w[1]));
    assert!(grid[0] > -1.0 && grid[grid.len() - 1] <= 1.0);
    let _ = spec.focks();
    let json = serde_json::to_string(&spec).unwrap();
    let again = SweepSpec::from_json(&json).expect("serialized spec reparses");
    assert_eq!(again.grid().unwrap(), grid);
});
