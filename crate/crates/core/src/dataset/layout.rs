//! Electrode geometry of one finger sensor.
//!
//! Coordinates are millimetres in the finger frame: `x` across the finger,
//! `y` along it, growing from the fingertip towards the palm. Fingertip
//! taxels are indexed row-major from the distal row; proximal taxels follow
//! in order of increasing distance from the fingertip.

use serde::Serialize;

use super::frame::TAXELS_PER_FINGER;

pub const FINGERTIP_TAXELS: usize = 9;
pub const PROXIMAL_TAXELS: usize = 5;
pub const FINGERTIP_ROWS: usize = 3;
pub const FINGERTIP_COLS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TaxelKind {
    Fingertip,
    Proximal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Taxel {
    pub index: usize,
    pub kind: TaxelKind,
    pub center_mm: (f64, f64),
    /// Width (across) and height (along the finger).
    pub size_mm: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TaxelLayout {
    pub taxels: Vec<Taxel>,
    /// Electrodes present on the board but not wired to a channel.
    pub unused_electrodes: usize,
}

impl Default for TaxelLayout {
    fn default() -> Self {
        const PITCH: f64 = 4.5;
        const SQUARE: f64 = 3.0;
        const BAR: (f64, f64) = (13.0, 3.0);

        let mut taxels = Vec::with_capacity(TAXELS_PER_FINGER);
        for row in 0..FINGERTIP_ROWS {
            for col in 0..FINGERTIP_COLS {
                taxels.push(Taxel {
                    index: taxels.len(),
                    kind: TaxelKind::Fingertip,
                    center_mm: ((col as f64 - 1.0) * PITCH, row as f64 * PITCH),
                    size_mm: (SQUARE, SQUARE),
                });
            }
        }
        let first_bar = (FINGERTIP_ROWS - 1) as f64 * PITCH + PITCH;
        for k in 0..PROXIMAL_TAXELS {
            taxels.push(Taxel {
                index: taxels.len(),
                kind: TaxelKind::Proximal,
                center_mm: (0.0, first_bar + k as f64 * PITCH),
                size_mm: BAR,
            });
        }
        Self {
            taxels,
            unused_electrodes: 1,
        }
    }
}

impl TaxelLayout {
    pub fn active_taxels(&self) -> usize {
        self.taxels.len()
    }

    pub fn fingertip(&self) -> impl Iterator<Item = &Taxel> {
        self.taxels
            .iter()
            .filter(|t| t.kind == TaxelKind::Fingertip)
    }

    pub fn proximal(&self) -> impl Iterator<Item = &Taxel> {
        self.taxels.iter().filter(|t| t.kind == TaxelKind::Proximal)
    }

    /// Smallest centre-to-centre distance between fingertip taxels.
    pub fn min_fingertip_pitch(&self) -> f64 {
        let tips: Vec<_> = self.fingertip().collect();
        let mut best = f64::INFINITY;
        for (i, a) in tips.iter().enumerate() {
            for b in &tips[i + 1..] {
                let d = (a.center_mm.0 - b.center_mm.0).hypot(a.center_mm.1 - b.center_mm.1);
                best = best.min(d);
            }
        }
        best
    }
}
