//! Shared fixtures for the kernel benchmarks.

use topoguard::rng::SplitMix64;
use topoguard::synth::{generate, PhantomKind, PhantomSpec};
use topoguard::{BinaryMask, ConstraintSpec, Dims, LabelVolume, Spacing};

/// Piecewise-constant labels on `side³`, one random class per `block³` tile.
pub fn blocky_labels(side: usize, block: usize, seed: u64) -> LabelVolume {
    let dims = Dims::cube(side).expect("positive side");
    let tiles = side.div_ceil(block);
    let mut rng = SplitMix64::new(seed);
    let classes: Vec<u8> = (0..tiles * tiles * tiles).map(|_| rng.below(8) as u8).collect();
    let data = (0..dims.len())
        .map(|i| {
            let [z, y, x] = dims.coords(i);
            classes[((z / block) * tiles + y / block) * tiles + x / block]
        })
        .collect();
    LabelVolume::new(dims, Spacing::isotropic(), 8, data).expect("valid labels")
}

/// Sparse random mask on `side³`.
pub fn sparse_mask(side: usize, density: f64, seed: u64) -> BinaryMask {
    let dims = Dims::cube(side).expect("positive side");
    let mut rng = SplitMix64::new(seed);
    BinaryMask::from_fn(dims, |_, _, _| rng.next_f64() < density)
}

pub fn punched_shell(side: usize) -> LabelVolume {
    let mut spec = PhantomSpec::new(PhantomKind::PunchedShell, Dims::cube(side).expect("positive side"));
    spec.inner_radius = side as f64 * 0.2;
    spec.outer_radius = side as f64 * 0.35;
    generate(&spec).expect("phantom fits")
}

/// Six WHS constraints.
pub fn six_constraints() -> ConstraintSpec {
    ConstraintSpec::parse(
        "contain LV Myo\ncontain RV Myo\nexclude RA AO\nexclude LA AO\nexclude LV RA\nexclude PA LA\n",
    )
    .expect("valid spec")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_have_requested_shape() {
        assert_eq!(blocky_labels(20, 8, 1).dims(), Dims::cube(20).unwrap());
        assert!(sparse_mask(16, 0.01, 2).count() > 0);
        assert!(!topoguard::validate(&punched_shell(48), &ConstraintSpec::whs()).unwrap().is_valid());
        assert_eq!(six_constraints().constraints().len(), 6);
    }
}
