use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn len(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Unit vector, or +x for the zero vector.
    pub fn unit(self) -> Point {
        let l = self.len();
        if l < 1e-9 {
            Point::new(1.0, 0.0)
        } else {
            Point::new(self.x / l, self.y / l)
        }
    }

    /// Perpendicular, rotated a quarter turn counter-clockwise.
    pub fn normal(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

/// Axis-aligned rectangle; `x`, `y` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl Rect {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn centered(c: Point, w: f64, h: f64) -> Self {
        Rect::new(c.x - w / 2.0, c.y - h / 2.0, w, h)
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    /// Interiors intersect; touching edges do not count.
    pub fn overlaps(&self, o: &Rect) -> bool {
        self.x < o.right() && o.x < self.right() && self.y < o.bottom() && o.y < self.bottom()
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x && p.x <= self.right() && p.y >= self.y && p.y <= self.bottom()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outline {
    Rect(Rect),
    Circle { c: Point, r: f64 },
}

impl Outline {
    pub fn center(&self) -> Point {
        match *self {
            Outline::Rect(r) => r.center(),
            Outline::Circle { c, .. } => c,
        }
    }

    pub fn bounds(&self) -> Rect {
        match *self {
            Outline::Rect(r) => r,
            Outline::Circle { c, r } => Rect::centered(c, 2.0 * r, 2.0 * r),
        }
    }

    /// Where the ray from `from` (assumed inside) along `dir` leaves the
    /// outline. Falls back to `from` if it is already outside.
    pub fn exit(&self, from: Point, dir: Point) -> Point {
        let d = dir.unit();
        match *self {
            Outline::Rect(r) => {
                let tx = if d.x > 1e-9 {
                    (r.right() - from.x) / d.x
                } else if d.x < -1e-9 {
                    (r.x - from.x) / d.x
                } else {
                    f64::INFINITY
                };
                let ty = if d.y > 1e-9 {
                    (r.bottom() - from.y) / d.y
                } else if d.y < -1e-9 {
                    (r.y - from.y) / d.y
                } else {
                    f64::INFINITY
                };
                from + d * tx.min(ty).max(0.0)
            }
            Outline::Circle { c, r } => {
                // |from + t d - c| = r, larger root
                let o = from - c;
                let b = o.x * d.x + o.y * d.y;
                let disc = b * b - (o.x * o.x + o.y * o.y - r * r);
                if disc < 0.0 {
                    return from;
                }
                from + d * (-b + disc.sqrt()).max(0.0)
            }
        }
    }
}
