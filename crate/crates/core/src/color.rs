use glam::Vec4;
use serde::{Deserialize, Serialize};

/// 8-bit RGBA color, the precision at which surface colors are captured and stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Rgba8(pub [u8; 4]);

impl Rgba8 {
    pub const MID_GRAY: Rgba8 = Rgba8([128, 128, 128, 255]);

    /// Quantizes a color with components in `[0, 1]` (values outside are clamped).
    pub fn from_unit(c: Vec4) -> Self {
        let q = |v: f32| (v.clamp(0.0, 1.0) * 255.0).round() as u8;
        Rgba8([q(c.x), q(c.y), q(c.z), q(c.w)])
    }

    pub fn to_unit(self) -> Vec4 {
        let [r, g, b, a] = self.0;
        Vec4::new(r as f32, g as f32, b as f32, a as f32) / 255.0
    }
}

/// Rec. 601 luma of a linear RGB triple.
pub fn luma(r: f64, g: f64, b: f64) -> f64 {
    0.299 * r + 0.587 * g + 0.114 * b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantization_round_trips_every_level() {
        for v in 0..=255u8 {
            let c = Rgba8([v, v, v, v]);
            assert_eq!(Rgba8::from_unit(c.to_unit()), c);
        }
    }
}
