pub const C17: &str = include_str!("../../../benchmarks/c17_renumbered.bench");
