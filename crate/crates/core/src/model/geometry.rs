//! Periodic square-box geometry.

use super::Vec2;

/// Wraps a coordinate into `[0, box_edge)`.
#[inline]
pub fn wrap_coordinate(x: f64, box_edge: f64) -> f64 {
    let r = x.rem_euclid(box_edge);
    // rem_euclid can round up to box_edge for tiny negative inputs
    if r >= box_edge {
        0.0
    } else {
        r
    }
}

#[inline]
pub fn wrap_position(p: Vec2, box_edge: f64) -> Vec2 {
    Vec2::new(wrap_coordinate(p.x, box_edge), wrap_coordinate(p.y, box_edge))
}

/// Reduces one displacement component from `(-L, L)` into `[-L/2, L/2)`.
#[inline]
fn min_image_component(d: f64, box_edge: f64) -> f64 {
    let half = 0.5 * box_edge;
    if d >= half {
        d - box_edge
    } else if d < -half {
        d + box_edge
    } else {
        d
    }
}

/// Minimum-image displacement `a - b` on the torus of edge `box_edge`.
///
/// Both points must already be wrapped into `[0, box_edge)`. Each component of
/// the result lies in `[-L/2, L/2)`; an exact half-box separation maps to `-L/2`.
#[inline]
pub fn min_image_disp(a: Vec2, b: Vec2, box_edge: f64) -> Vec2 {
    debug_assert!(
        (0.0..box_edge).contains(&a.x)
            && (0.0..box_edge).contains(&a.y)
            && (0.0..box_edge).contains(&b.x)
            && (0.0..box_edge).contains(&b.y),
        "min_image_disp called with unwrapped coordinates {a:?} {b:?}"
    );
    Vec2::new(min_image_component(a.x - b.x, box_edge), min_image_component(a.y - b.y, box_edge))
}
