//! Named period points and seeded random ones.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::theta::PeriodPoint;

pub const PRESET_G3: &str = "paper-g3";
pub const PRESET_G4: &str = "paper-g4";
pub const PRESET_NAMES: [&str; 2] = [PRESET_G3, PRESET_G4];

/// Seed used when a command needs random points and none was given.
pub const DEFAULT_SEED: u64 = 7;

/// `k = 1 + sqrt(1/3) i`, shared by both presets.
pub fn preset_k() -> Complex64 {
    Complex64::new(1.0, 0.5773502691896258)
}

/// The integer part `X` of a preset.
pub fn preset_x(name: &str) -> Result<DMatrix<i64>> {
    match name {
        PRESET_G3 => Ok(DMatrix::from_row_slice(3, 3, &[0, 0, 1, 0, 0, 2, 1, 2, 0])),
        PRESET_G4 => Ok(DMatrix::from_row_slice(4, 4, &[0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 3, 1, 2, 3, 0])),
        other => Err(Error::Config(format!("unknown preset {other:?}; known presets: {}", PRESET_NAMES.join(", ")))),
    }
}

/// `Z = X + k Id` for a named preset.
pub fn preset(name: &str) -> Result<PeriodPoint> {
    PeriodPoint::from_split(preset_x(name)?, preset_k())
}

/// [`PeriodPoint::random`] driven by a ChaCha8 stream seeded with `seed`.
pub fn seeded_point(g: usize, seed: u64) -> PeriodPoint {
    PeriodPoint::random(g, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::EvalPath;

    #[test]
    fn presets_use_the_fast_path() {
        for (name, g) in [(PRESET_G3, 3), (PRESET_G4, 4)] {
            let z = preset(name).unwrap();
            assert_eq!(z.g(), g);
            assert_eq!(z.eval_path(), EvalPath::Fast);
            assert!((z.lambda_min() - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        }
        assert!(preset("paper-g5").is_err());
    }

    #[test]
    fn seeded_points_are_reproducible() {
        assert_eq!(seeded_point(3, 11).z(), seeded_point(3, 11).z());
        assert_ne!(seeded_point(3, 11).z(), seeded_point(3, 12).z());
    }
}
