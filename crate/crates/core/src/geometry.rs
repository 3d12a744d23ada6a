//! Planar geometry for the lane map. Units move in the ground plane; height
//! only appears on the wire.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Point { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    pub fn distance_sq(self, other: Point) -> f64 {
        let dx = other.x - self.x;
        let dy = other.y - self.y;
        dx * dx + dy * dy
    }

    /// Move up to `step` units toward `target`, landing exactly on it when
    /// it is closer than `step`.
    pub fn step_toward(self, target: Point, step: f64) -> Point {
        let d = self.distance(target);
        if d <= step || d == 0.0 {
            return target;
        }
        let k = step / d;
        Point::new(self.x + (target.x - self.x) * k, self.y + (target.y - self.y) * k)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn new(vertices: Vec<Point>) -> Self {
        ConvexPolygon { vertices }
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Inclusive containment with a small tolerance for points clamped onto
    /// an edge.
    pub fn contains(&self, p: Point) -> bool {
        self.edges().all(|(a, b)| {
            let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
            cross >= -1e-6 * a.distance(b)
        })
    }

    pub fn closest_point(&self, p: Point) -> Point {
        if self.contains(p) {
            return p;
        }
        let mut best = self.vertices[0];
        let mut best_d = f64::INFINITY;
        for (a, b) in self.edges() {
            let q = closest_on_segment(a, b, p);
            let d = q.distance_sq(p);
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }
}

fn closest_on_segment(a: Point, b: Point, p: Point) -> Point {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let len_sq = abx * abx + aby * aby;
    if len_sq == 0.0 {
        return a;
    }
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / len_sq).clamp(0.0, 1.0);
    Point::new(a.x + abx * t, a.y + aby * t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexPolygon {
        ConvexPolygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 10.0),
            Point::new(0.0, 10.0),
        ])
    }

    #[test]
    fn step_toward_stops_on_target() {
        let p = Point::new(0.0, 0.0).step_toward(Point::new(3.0, 4.0), 10.0);
        assert_eq!(p, Point::new(3.0, 4.0));
        let p = Point::new(0.0, 0.0).step_toward(Point::new(30.0, 40.0), 10.0);
        assert!((p.x - 6.0).abs() < 1e-12 && (p.y - 8.0).abs() < 1e-12);
    }

    #[test]
    fn polygon_containment_and_clamp() {
        let sq = square();
        assert!(sq.contains(Point::new(5.0, 5.0)));
        assert!(sq.contains(Point::new(10.0, 5.0)));
        assert!(!sq.contains(Point::new(11.0, 5.0)));
        assert_eq!(sq.closest_point(Point::new(15.0, 5.0)), Point::new(10.0, 5.0));
        assert_eq!(sq.closest_point(Point::new(-3.0, -3.0)), Point::new(0.0, 0.0));
        assert!(sq.contains(sq.closest_point(Point::new(4.0, 99.0))));
    }
}
