//! Bi-material combinations behind the `figures` sweeps.

use crate::material::BiMaterial;

/// `b/a` used for the intersonic curves of every preset.
pub const FIGURE_B_OVER_A: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigurePreset {
    /// Figure numbers of the wavenumber and phase-velocity plots.
    pub k_figure: u32,
    pub c_figure: u32,
    pub speed_ratio: f64,
    pub mu_ratio: f64,
}

impl FigurePreset {
    pub fn bimaterial(&self) -> BiMaterial {
        BiMaterial::from_ratios(self.mu_ratio, self.speed_ratio).expect("preset ratios are positive")
    }
}

pub const FIGURE_PRESETS: [FigurePreset; 4] = [
    FigurePreset { k_figure: 1, c_figure: 2, speed_ratio: 1.2, mu_ratio: 1.0 },
    FigurePreset { k_figure: 3, c_figure: 4, speed_ratio: 5.0, mu_ratio: 1.0 },
    FigurePreset { k_figure: 5, c_figure: 6, speed_ratio: 5.0, mu_ratio: 10.0 },
    FigurePreset { k_figure: 7, c_figure: 8, speed_ratio: 5.0, mu_ratio: 0.1 },
];
