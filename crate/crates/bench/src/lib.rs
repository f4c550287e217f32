//! Shared fixtures for the solver benchmarks.

use cryolink::{prototype_assembly, standard_assembly, CuPlacement, LinkAssembly};

/// Named assemblies spanning the sizes the solver is used on.
pub fn assemblies() -> Vec<(&'static str, LinkAssembly)> {
    let standard = |len, cu| standard_assembly(len, cu).expect("standard lengths build");
    vec![
        ("prototype", prototype_assembly().expect("prototype builds")),
        ("5m", standard(5.0, CuPlacement::None)),
        ("10m", standard(10.0, CuPlacement::None)),
        ("30m_central", standard(30.0, CuPlacement::Central)),
        ("60m_spaced", standard(60.0, CuPlacement::Spacing(15.0))),
    ]
}

/// Log-spaced temperatures over the copper model range.
pub fn temperature_grid(n: usize) -> Vec<f64> {
    let (lo, hi) = (4e-3f64, 300.0f64);
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_build() {
        assert_eq!(assemblies().len(), 5);
        let g = temperature_grid(10);
        assert!((g[0] - 4e-3).abs() < 1e-15 && (g[9] - 300.0).abs() < 1e-9);
    }
}
