//! Numeric check of the two max-min programs behind the approximation
//! factors. Floating point; the maximiser lies on the curve f₁ = f₂.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// f₁ = 1−x−y, f₂ = x − (x−y)²/(4(1−y)) over 0 ≤ y ≤ x ≤ 1−y, with
    /// x = α_cross and y = α_up.
    Basic,
    /// f₁ = 1−x, f₂ = x − x²(1−2y+2y²)/(2−xy) over [0,1]×[0,½], with
    /// x = α_cross and y = φ.
    Refined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CalculusResult {
    pub kind: BoundKind,
    pub x: f64,
    pub y: f64,
    pub f1: f64,
    pub f2: f64,
    /// 1 + min(f₁, f₂) at the maximiser.
    pub value: f64,
    /// Side length of the last grid cell searched.
    pub resolution: f64,
}

fn parts(kind: BoundKind, x: f64, y: f64) -> Option<(f64, f64)> {
    match kind {
        BoundKind::Basic => {
            if y < 0.0 || x < y || x + y > 1.0 || y >= 1.0 {
                return None;
            }
            Some((1.0 - x - y, x - (x - y) * (x - y) / (4.0 * (1.0 - y))))
        }
        BoundKind::Refined => {
            if !(0.0..=1.0).contains(&x) || !(0.0..=0.5).contains(&y) {
                return None;
            }
            Some((1.0 - x, x - x * x * (1.0 - 2.0 * y + 2.0 * y * y) / (2.0 - x * y)))
        }
    }
}

fn objective(kind: BoundKind, x: f64, y: f64) -> f64 {
    parts(kind, x, y).map_or(f64::NEG_INFINITY, |(a, b)| a.min(b))
}

/// Grid search at `grid_step`, then repeated zooming around the best point
/// until the cell is below 1e-13.
pub fn bound_calculus(kind: BoundKind, grid_step: f64) -> CalculusResult {
    assert!(grid_step > 0.0 && grid_step <= 1e-3, "grid step must be in (0, 1/1000]");
    let (x_hi, y_hi) = match kind {
        BoundKind::Basic => (1.0, 0.5),
        BoundKind::Refined => (1.0, 0.5),
    };
    let nx = (x_hi / grid_step).ceil() as usize;
    let ny = (y_hi / grid_step).ceil() as usize;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=nx {
        let x = (i as f64 * grid_step).min(x_hi);
        for j in 0..=ny {
            let y = (j as f64 * grid_step).min(y_hi);
            let v = objective(kind, x, y);
            if v > best.0 {
                best = (v, x, y);
            }
        }
    }
    let mut h = grid_step;
    const SPAN: i32 = 20;
    while h > 1e-13 {
        let (_, cx, cy) = best;
        let step = h / SPAN as f64;
        for i in -SPAN..=SPAN {
            for j in -SPAN..=SPAN {
                let (x, y) = (cx + i as f64 * step, cy + j as f64 * step);
                let v = objective(kind, x, y);
                if v > best.0 {
                    best = (v, x, y);
                }
            }
        }
        h = step * 2.0;
    }
    let (_, x, y) = best;
    let (f1, f2) = parts(kind, x, y).expect("maximiser is in the domain");
    CalculusResult { kind, x, y, f1, f2, value: 1.0 + f1.min(f2), resolution: h }
}
