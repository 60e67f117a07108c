use nalgebra::Vector2;

pub type Point = Vector2<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn closest_point(&self, p: &Point) -> Point {
        let d = self.b - self.a;
        let len2 = d.norm_squared();
        if len2 == 0.0 {
            return self.a;
        }
        let t = ((p - self.a).dot(&d) / len2).clamp(0.0, 1.0);
        self.a + d * t
    }

    /// The segment with its `b` end pulled back towards `a` by `eps`.
    pub fn shortened_end(&self, eps: f64) -> Segment {
        let d = self.b - self.a;
        let len = d.norm();
        if len <= eps {
            return Segment::new(self.a, self.a);
        }
        Segment::new(self.a, self.b - d * (eps / len))
    }
}

fn cross(o: &Point, a: &Point, b: &Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn orientation(o: &Point, a: &Point, b: &Point) -> i8 {
    let c = cross(o, a, b);
    let scale = (a - o).norm() * (b - o).norm();
    if c.abs() <= 1e-12 * scale.max(1e-300) {
        0
    } else if c > 0.0 {
        1
    } else {
        -1
    }
}

fn on_segment(p: &Point, s: &Segment) -> bool {
    p.x >= s.a.x.min(s.b.x) - 1e-12
        && p.x <= s.a.x.max(s.b.x) + 1e-12
        && p.y >= s.a.y.min(s.b.y) - 1e-12
        && p.y <= s.a.y.max(s.b.y) + 1e-12
}

/// Closed-segment intersection test, including touching endpoints and
/// collinear overlap.
pub fn segment_intersects(e1: &Segment, e2: &Segment) -> bool {
    let o1 = orientation(&e1.a, &e1.b, &e2.a);
    let o2 = orientation(&e1.a, &e1.b, &e2.b);
    let o3 = orientation(&e2.a, &e2.b, &e1.a);
    let o4 = orientation(&e2.a, &e2.b, &e1.b);
    if o1 != o2 && o3 != o4 && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0 {
        return true;
    }
    (o1 == 0 && on_segment(&e2.a, e1))
        || (o2 == 0 && on_segment(&e2.b, e1))
        || (o3 == 0 && on_segment(&e1.a, e2))
        || (o4 == 0 && on_segment(&e1.b, e2))
        || (o1 != o2 && o3 != o4)
}

pub fn point_segment_distance(p: &Point, e: &Segment) -> f64 {
    (p - e.closest_point(p)).norm()
}

/// Minimum distance between two closed segments.
pub fn segment_segment_distance(e1: &Segment, e2: &Segment) -> f64 {
    if segment_intersects(e1, e2) {
        return 0.0;
    }
    point_segment_distance(&e1.a, e2)
        .min(point_segment_distance(&e1.b, e2))
        .min(point_segment_distance(&e2.a, e1))
        .min(point_segment_distance(&e2.b, e1))
}
