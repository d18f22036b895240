//! Fixtures shared by the benchmarks in `benches/`.

/// The bundled Old Faithful eruption durations.
pub fn faithful() -> Vec<f64> {
    include_str!("../../cli/data/faithful_eruptions.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.parse().expect("bundled data is numeric"))
        .collect()
}
