//! Planar geometry for cell construction under positional uncertainty.
//!
//! Everything here is exact-or-one-sided: half-plane clips are exact, while
//! the curved boundary of a distance-difference (focal) region is replaced by
//! a chord polyline sampled on the hyperbola branch. Chords of a convex region
//! lie inside it, so [`clip_focal_inner`] under-approximates the region it
//! keeps and [`subtract_focal_outer`] under-approximates the region it
//! removes. Callers rely on those directions and never on the exact curve.
//!
//! Closed-set convention: membership tests treat points within [`GEOM_EPS`]
//! of a boundary as inside.

use crate::error::{Error, Result};

/// Boundary tolerance, in meters, for all closed-set membership tests.
pub const GEOM_EPS: f64 = 1e-9;

/// A point (or free vector) in the plane, in meters.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the cross product, positive when `other` is
    /// counterclockwise of `self`.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Self) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise perpendicular.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Unit vector in the same direction, or `None` for (near-)zero vectors.
    pub fn unit(self) -> Option<Self> {
        let n = self.norm();
        if n < 1e-300 {
            None
        } else {
            Some(self.scale(1.0 / n))
        }
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

/// Closed half-plane `{q : q·normal <= offset}` with a unit normal.
#[derive(Clone, Copy, Debug)]
pub struct HalfPlane {
    pub normal: Point2,
    pub offset: f64,
}

impl HalfPlane {
    /// Builds the half-plane from any nonzero normal, normalizing it.
    pub fn new(normal: Point2, offset: f64) -> Option<Self> {
        if !normal.is_finite() || !offset.is_finite() {
            return None;
        }
        let n = normal.norm();
        if n < 1e-300 {
            return None;
        }
        Some(Self { normal: normal.scale(1.0 / n), offset: offset / n })
    }

    /// Perpendicular bisector half-plane containing `keep`:
    /// `{q : ‖q − keep‖ <= ‖q − other‖}`.
    pub fn bisector_keeping(keep: Point2, other: Point2) -> Option<Self> {
        let normal = (other - keep).unit()?;
        let mid = keep.midpoint(other);
        Some(Self { normal, offset: normal.dot(mid) })
    }

    /// Signed distance of `q` to the boundary; <= 0 inside.
    pub fn excess(&self, q: Point2) -> f64 {
        q.dot(self.normal) - self.offset
    }

    pub fn contains(&self, q: Point2) -> bool {
        self.excess(q) <= GEOM_EPS
    }
}

/// Circle (or closed disk) with nonnegative radius.
#[derive(Clone, Copy, Debug)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, q: Point2, tol: f64) -> bool {
        self.center.dist(q) <= self.radius + tol
    }
}

/// Simple polygon as a CCW vertex list. The empty polygon (no vertices) is a
/// valid value and represents the empty set.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimplePolygon {
    vertices: Vec<Point2>,
}

impl SimplePolygon {
    pub fn empty() -> Self {
        Self { vertices: Vec::new() }
    }

    /// Builds a polygon from vertices that must already be CCW with positive
    /// area. Consecutive duplicates are dropped.
    pub fn new(vertices: Vec<Point2>) -> Result<Self> {
        let vertices = dedupe_ring(vertices);
        if vertices.len() < 3 {
            return Err(Error::DegenerateSet("polygon needs >= 3 vertices"));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateSet("non-finite vertex"));
        }
        let poly = Self { vertices };
        if poly.area() <= 0.0 {
            return Err(Error::DegenerateSet("polygon must be CCW with positive area"));
        }
        Ok(poly)
    }

    /// Internal constructor for clip results: dedupes and collapses slivers
    /// below area 1e-18 to the empty polygon.
    fn from_clip(vertices: Vec<Point2>) -> Self {
        let vertices = dedupe_ring(vertices);
        if vertices.len() < 3 {
            return Self::empty();
        }
        let poly = Self { vertices };
        if poly.area() < 1e-18 {
            Self::empty()
        } else {
            poly
        }
    }

    /// Axis-aligned rectangle `[x0,x1] × [y0,y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Self::new(vec![
            Point2::new(x0, y0),
            Point2::new(x1, y0),
            Point2::new(x1, y1),
            Point2::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace area; positive for CCW rings.
    pub fn area(&self) -> f64 {
        let v = &self.vertices;
        if v.len() < 3 {
            return 0.0;
        }
        let mut s = 0.0;
        for i in 0..v.len() {
            let j = (i + 1) % v.len();
            s += v[i].cross(v[j]);
        }
        s / 2.0
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d = 0.0f64;
        for i in 0..v.len() {
            for j in (i + 1)..v.len() {
                d = d.max(v[i].dist(v[j]));
            }
        }
        d
    }

    pub fn bbox(&self) -> Option<(Point2, Point2)> {
        if self.vertices.is_empty() {
            return None;
        }
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        Some((lo, hi))
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_polygon(p, self)
    }
}

fn dedupe_ring(mut vs: Vec<Point2>) -> Vec<Point2> {
    vs.retain(|v| v.is_finite());
    let mut out: Vec<Point2> = Vec::with_capacity(vs.len());
    for v in vs {
        if out.last().map_or(true, |l| l.dist(v) > 1e-12) {
            out.push(v);
        }
    }
    while out.len() >= 2 && out[0].dist(*out.last().unwrap()) <= 1e-12 {
        out.pop();
    }
    out
}

/// Clips a convex polygon against a half-plane (single-plane
/// Sutherland–Hodgman). The empty polygon is a valid result.
pub fn clip_halfplane(poly: &SimplePolygon, h: &HalfPlane) -> SimplePolygon {
    let src = poly.vertices();
    if src.is_empty() {
        return SimplePolygon::empty();
    }
    let mut out: Vec<Point2> = Vec::with_capacity(src.len() + 2);
    for i in 0..src.len() {
        let a = src[i];
        let b = src[(i + 1) % src.len()];
        let ea = h.excess(a);
        let eb = h.excess(b);
        let a_in = ea <= GEOM_EPS;
        let b_in = eb <= GEOM_EPS;
        if a_in {
            out.push(a);
        }
        if a_in != b_in {
            // ea != eb here, so the interpolation is well defined.
            let t = ea / (ea - eb);
            out.push(a + (b - a).scale(t));
        }
    }
    SimplePolygon::from_clip(out)
}

/// Smallest circle containing all input points. Deterministic (no shuffling);
/// the inputs here are short vertex lists, so the worst case is affordable.
pub fn min_enclosing_circle(points: &[Point2]) -> Result<Circle> {
    if points.is_empty() {
        return Err(Error::DegenerateSet("min_enclosing_circle of no points"));
    }
    let scale = points
        .iter()
        .map(|p| p.x.abs().max(p.y.abs()))
        .fold(1.0f64, f64::max);
    let tol = 1e-12 * scale.max(1.0);
    let contains = |c: &Circle, p: Point2| c.center.dist(p) <= c.radius + tol;

    let mut c = Circle { center: points[0], radius: 0.0 };
    for i in 1..points.len() {
        if contains(&c, points[i]) {
            continue;
        }
        c = Circle { center: points[i], radius: 0.0 };
        for j in 0..i {
            if contains(&c, points[j]) {
                continue;
            }
            c = circle_from_diameter(points[i], points[j]);
            for k in 0..j {
                if contains(&c, points[k]) {
                    continue;
                }
                c = circle_from_three(points[i], points[j], points[k]);
            }
        }
    }
    Ok(c)
}

fn circle_from_diameter(a: Point2, b: Point2) -> Circle {
    let center = a.midpoint(b);
    Circle { center, radius: center.dist(a).max(center.dist(b)) }
}

/// Circumcircle of three points; falls back to the widest diameter circle for
/// (near-)collinear triples.
fn circle_from_three(a: Point2, b: Point2, c: Point2) -> Circle {
    let d = 2.0 * ((b - a).cross(c - a));
    let ab = a.dist(b);
    let bc = b.dist(c);
    let ca = c.dist(a);
    let span = ab.max(bc).max(ca);
    if d.abs() <= 1e-12 * span * span {
        return if ab >= bc && ab >= ca {
            circle_from_diameter(a, b)
        } else if bc >= ca {
            circle_from_diameter(b, c)
        } else {
            circle_from_diameter(c, a)
        };
    }
    let a2 = a.dot(a);
    let b2 = b.dot(b);
    let c2 = c.dot(c);
    let ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
    let uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
    let center = Point2::new(ux, uy);
    let radius = center.dist(a).max(center.dist(b)).max(center.dist(c));
    Circle { center, radius }
}

/// One branch of the hyperbola `{q : ‖q − f_far‖ − ‖q − f_near‖ = delta}` in
/// focal coordinates: `at(t) = center + u·a·cosh(t) + v·b·sinh(t)`, with `u`
/// pointing from the midpoint toward `f_near`.
struct Branch {
    center: Point2,
    u: Point2,
    v: Point2,
    a: f64,
    b: f64,
}

impl Branch {
    fn build(f_near: Point2, f_far: Point2, delta: f64) -> Result<Self> {
        let d = f_near.dist(f_far);
        if !(delta >= 0.0) {
            return Err(Error::DegenerateSet("negative focal delta"));
        }
        if delta >= d {
            return Err(Error::UncertaintySwallowsBisector { delta, focal_distance: d });
        }
        let center = f_near.midpoint(f_far);
        let u = (f_near - f_far).unit().ok_or(Error::DegenerateConfiguration)?;
        let a = delta / 2.0;
        let c = d / 2.0;
        Ok(Self { center, u, v: u.perp(), a, b: (c * c - a * a).max(0.0).sqrt() })
    }

    fn at(&self, t: f64) -> Point2 {
        self.center + self.u.scale(self.a * t.cosh()) + self.v.scale(self.b * t.sinh())
    }

    /// Parameter bound such that `at(±t_max)` lies strictly outside every
    /// point of `window` and past both foci. Distance from the center grows
    /// monotonically in |t|: r(t)² = a² + (a² + b²)·sinh²(t).
    fn t_span(&self, window: &SimplePolygon, f_near: Point2, f_far: Point2) -> f64 {
        let mut reach = f_near.dist(self.center).max(f_far.dist(self.center));
        for w in window.vertices() {
            reach = reach.max(w.dist(self.center));
        }
        let reach = 2.0 * reach + 2.0 * self.a + 1.0;
        let c2 = (self.a * self.a + self.b * self.b).max(1e-300);
        let sinh_max = ((reach * reach - self.a * self.a).max(reach * reach / 2.0) / c2).sqrt();
        sinh_max.asinh() + 0.25
    }

    fn sample_params(t_max: f64, k: usize) -> Vec<f64> {
        let k = k.max(2);
        (0..k)
            .map(|i| -t_max + 2.0 * t_max * (i as f64) / ((k - 1) as f64))
            .collect()
    }
}

/// Samples `k` points on the hyperbola branch nearer `f_near`, symmetric
/// about the focal axis and spanning past every vertex of `window` and both
/// foci. For `delta = 0` the branch degenerates to the perpendicular
/// bisector.
pub fn hyperbola_branch(
    f_near: Point2,
    f_far: Point2,
    delta: f64,
    window: &SimplePolygon,
    k: usize,
) -> Result<Vec<Point2>> {
    let br = Branch::build(f_near, f_far, delta)?;
    let t_max = br.t_span(window, f_near, f_far);
    Ok(Branch::sample_params(t_max, k)
        .into_iter()
        .map(|t| br.at(t))
        .collect())
}

/// Half-planes whose intersection is the chord polygon inscribed in the focal
/// region around `f_near`. Each chord's kept side is the one *away from* the
/// arc it subtends; the arc midpoint anchors the orientation, which stays
/// robust even for chords straddling the focal axis.
fn focal_chord_halfplanes(br: &Branch, ts: &[f64]) -> Vec<HalfPlane> {
    let mut out = Vec::with_capacity(ts.len().saturating_sub(1));
    for w in ts.windows(2) {
        let p = br.at(w[0]);
        let q = br.at(w[1]);
        let arc_mid = br.at((w[0] + w[1]) / 2.0);
        let Some(dir) = (q - p).unit() else { continue };
        let mut normal = dir.perp();
        let mut offset = normal.dot(p);
        // The bulge of the arc is outside the kept side.
        if normal.dot(arc_mid) < offset {
            normal = normal.scale(-1.0);
            offset = -offset;
        }
        out.push(HalfPlane { normal, offset });
    }
    out
}

/// Deltas at or below this threshold are clipped with the exact bisector; the
/// resulting one-sided error is below the crate-wide boundary tolerance.
const FLAT_DELTA: f64 = 1e-9;

/// Inner-conservative clip of `poly` to the focal region
/// `{q : ‖q − f_far‖ − ‖q − f_near‖ >= delta}` (the convex region around
/// `f_near`): successive half-plane clips against the chords of the sampled
/// branch. The result is a subset of the true intersection and converges to
/// it as `k` grows. `delta = 0` reduces exactly to the bisector clip.
pub fn clip_focal_inner(
    poly: &SimplePolygon,
    f_near: Point2,
    f_far: Point2,
    delta: f64,
    k: usize,
) -> Result<SimplePolygon> {
    if poly.is_empty() {
        return Ok(SimplePolygon::empty());
    }
    if f_near.dist(f_far) < 1e-12 {
        return Err(Error::DegenerateConfiguration);
    }
    if delta <= FLAT_DELTA {
        if delta >= f_near.dist(f_far) {
            return Err(Error::UncertaintySwallowsBisector {
                delta,
                focal_distance: f_near.dist(f_far),
            });
        }
        let h = HalfPlane::bisector_keeping(f_near, f_far)
            .ok_or(Error::DegenerateConfiguration)?;
        return Ok(clip_halfplane(poly, &h));
    }
    let br = Branch::build(f_near, f_far, delta)?;
    let t_max = br.t_span(poly, f_near, f_far);
    let ts = Branch::sample_params(t_max, k);
    let mut out = poly.clone();
    for h in focal_chord_halfplanes(&br, &ts) {
        out = clip_halfplane(&out, &h);
        if out.is_empty() {
            break;
        }
    }
    Ok(out)
}

/// Result of [`subtract_focal_outer`]: the (outer-conservative) polygon plus
/// a flag marking the no-cut fallback taken when the chord polyline crosses
/// the polygon boundary more than twice.
#[derive(Clone, Debug)]
pub struct FocalSubtraction {
    pub poly: SimplePolygon,
    pub fallback: bool,
}

/// Outer-conservative subtraction: removes (an inner approximation of) the
/// convex focal region around `f_remove` from `poly`, leaving a superset of
/// `poly ∩ {q : ‖q − f_keep‖ − ‖q − f_remove‖ <= delta}`.
///
/// `delta >= ‖f_keep − f_remove‖` makes the constraint vacuous (no cut).
/// `delta = 0` reduces exactly to the bisector clip keeping `f_keep`'s side.
/// If the chord polyline does not cross the polygon boundary exactly twice,
/// the cut is skipped and `fallback` is raised; the unchanged polygon is
/// still a valid outer approximation.
pub fn subtract_focal_outer(
    poly: &SimplePolygon,
    f_keep: Point2,
    f_remove: Point2,
    delta: f64,
    k: usize,
) -> Result<FocalSubtraction> {
    let no_cut = |fallback: bool| FocalSubtraction { poly: poly.clone(), fallback };
    if poly.is_empty() {
        return Ok(FocalSubtraction { poly: SimplePolygon::empty(), fallback: false });
    }
    let d = f_keep.dist(f_remove);
    if d < 1e-12 {
        return Err(Error::DegenerateConfiguration);
    }
    if delta >= d {
        // Triangle inequality: ‖q−f_keep‖ − ‖q−f_remove‖ <= d <= delta always.
        return Ok(no_cut(false));
    }
    if delta <= FLAT_DELTA {
        let h = HalfPlane::bisector_keeping(f_keep, f_remove)
            .ok_or(Error::DegenerateConfiguration)?;
        return Ok(FocalSubtraction { poly: clip_halfplane(poly, &h), fallback: false });
    }

    // Boundary of the removed region, sampled around f_remove.
    let br = Branch::build(f_remove, f_keep, delta)?;
    let t_max = br.t_span(poly, f_remove, f_keep);
    let ts = Branch::sample_params(t_max, k);
    let chain: Vec<Point2> = ts.iter().map(|&t| br.at(t)).collect();

    // Crossings of the chain with the polygon boundary, ordered along the
    // chain; each records the polygon edge it lies on.
    let verts = poly.vertices();
    let mut crossings: Vec<(usize, f64, usize, Point2)> = Vec::new();
    for (seg_idx, w) in chain.windows(2).enumerate() {
        for e in 0..verts.len() {
            let (a, b) = (verts[e], verts[(e + 1) % verts.len()]);
            if let Some((t, _u, point)) = segment_intersection(w[0], w[1], a, b) {
                crossings.push((seg_idx, t, e, point));
            }
        }
    }
    crossings.sort_by(|p, q| p.0.cmp(&q.0).then(p.1.total_cmp(&q.1)));
    crossings.dedup_by(|p, q| p.3.dist(q.3) <= 1e-9);

    if crossings.is_empty() {
        // No boundary contact: poly lies wholly on one side of the chord
        // region. Test a vertex against the chord half-planes themselves.
        let chords = focal_chord_halfplanes(&br, &ts);
        let inside_removed = verts.iter().all(|&q| chords.iter().all(|h| h.contains(q)));
        if inside_removed {
            return Ok(FocalSubtraction { poly: SimplePolygon::empty(), fallback: false });
        }
        return Ok(no_cut(false));
    }
    if crossings.len() != 2 {
        return Ok(no_cut(true));
    }

    let (entry, exit) = (&crossings[0], &crossings[1]);
    let mut chain_inside: Vec<Point2> = vec![entry.3];
    for (i, &p) in chain.iter().enumerate() {
        if i > entry.0 && i <= exit.0 {
            chain_inside.push(p);
        }
    }
    chain_inside.push(exit.3);

    // The chain splits poly in two pieces; keep the one containing f_keep.
    for flip in [false, true] {
        let piece = splice_piece(
            verts,
            &chain_inside,
            (entry.2, entry.3),
            (exit.2, exit.3),
            flip,
        );
        if piece.len() >= 3 {
            let cand = SimplePolygon::from_clip(orient_ccw(piece));
            if !cand.is_empty()
                && cand.area() <= poly.area() + 1e-6
                && point_in_polygon(f_keep, &cand)
            {
                return Ok(FocalSubtraction { poly: cand, fallback: false });
            }
        }
    }
    Ok(no_cut(true))
}

/// One side of the split: the cutting chain from entry to exit followed by
/// the polygon boundary walked CCW from the exit edge back to the entry edge.
/// `flip` reverses the chain to produce the other side.
fn splice_piece(
    verts: &[Point2],
    chain: &[Point2],
    entry: (usize, Point2),
    exit: (usize, Point2),
    flip: bool,
) -> Vec<Point2> {
    let n = verts.len();
    let (chain_f, (e_from, from), (e_to, to)) = if flip {
        (chain.iter().rev().copied().collect::<Vec<_>>(), exit, entry)
    } else {
        (chain.to_vec(), entry, exit)
    };
    let mut piece = chain_f;
    if e_from == e_to {
        // Both crossings on one edge: if `to` precedes `from` along it, the
        // boundary walk is empty; otherwise it wraps the whole ring.
        let anchor = verts[e_to];
        if (to - anchor).norm() <= (from - anchor).norm() {
            return piece;
        }
    }
    let mut e = (e_to + 1) % n;
    loop {
        piece.push(verts[e]);
        if e == e_from {
            break;
        }
        e = (e + 1) % n;
        if piece.len() > n + chain.len() + 4 {
            break; // degenerate input; caller validates the piece anyway
        }
    }
    piece
}

fn orient_ccw(mut vs: Vec<Point2>) -> Vec<Point2> {
    let mut s = 0.0;
    for i in 0..vs.len() {
        let j = (i + 1) % vs.len();
        s += vs[i].cross(vs[j]);
    }
    if s < 0.0 {
        vs.reverse();
    }
    vs
}

/// Proper intersection of segments `p0p1` and `q0q1`; returns parameters
/// along each segment plus the point. Near-parallel overlaps return `None`.
pub fn segment_intersection(
    p0: Point2,
    p1: Point2,
    q0: Point2,
    q1: Point2,
) -> Option<(f64, f64, Point2)> {
    let r = p1 - p0;
    let s = q1 - q0;
    let denom = r.cross(s);
    let scale = r.norm() * s.norm();
    if denom.abs() <= 1e-14 * scale.max(1e-30) {
        return None;
    }
    let qp = q0 - p0;
    let t = qp.cross(s) / denom;
    let u = qp.cross(r) / denom;
    let tol = 1e-12;
    if (-tol..=1.0 + tol).contains(&t) && (-tol..=1.0 + tol).contains(&u) {
        let tc = t.clamp(0.0, 1.0);
        Some((tc, u.clamp(0.0, 1.0), p0 + r.scale(tc)))
    } else {
        None
    }
}

fn dist_point_segment(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= 1e-300 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab.scale(t))
}

/// Closest point of the lens `B̄(c1,b) ∩ B̄(c2,b)` to `p`. The candidates are
/// `p` itself, the two radial projections (each valid only inside the other
/// disk), and the two circle–circle corners.
pub fn project_onto_lens(p: Point2, c1: Point2, c2: Point2, b: f64) -> Result<Point2> {
    if b < 0.0 {
        return Err(Error::InconsistentCentroidBound);
    }
    let d = c1.dist(c2);
    if d > 2.0 * b + GEOM_EPS {
        return Err(Error::InconsistentCentroidBound);
    }
    let in1 = c1.dist(p) <= b + GEOM_EPS;
    let in2 = c2.dist(p) <= b + GEOM_EPS;
    if in1 && in2 {
        return Ok(p);
    }
    if b <= GEOM_EPS {
        return Ok(c1); // singleton lens (c1 ≈ c2)
    }

    let mut best: Option<Point2> = None;
    let mut consider = |q: Point2| {
        if best.map_or(true, |b0| p.dist(q) < p.dist(b0)) {
            best = Some(q);
        }
    };
    // Radial projections onto each circle, kept only inside the other disk.
    // `p` at a disk center has no radial direction; the corners cover it.
    for (c, other) in [(c1, c2), (c2, c1)] {
        if let Some(dir) = (p - c).unit() {
            let q = c + dir.scale(b);
            if other.dist(q) <= b + GEOM_EPS {
                consider(q);
            }
        }
    }
    // Circle–circle corners (equal radii).
    if d > 1e-15 {
        let mid = c1.midpoint(c2);
        let h = (b * b - (d / 2.0) * (d / 2.0)).max(0.0).sqrt();
        let axis = (c2 - c1).unit().expect("d > 0").perp();
        consider(mid + axis.scale(h));
        consider(mid + axis.scale(-h));
    }
    best.ok_or(Error::InconsistentCentroidBound)
}

/// Max distance from `p` to the polygon, attained at a vertex.
pub fn farthest_vertex_distance(poly: &SimplePolygon, p: Point2) -> Result<f64> {
    if poly.is_empty() {
        return Err(Error::DegenerateSet("farthest vertex of empty polygon"));
    }
    Ok(poly.vertices().iter().map(|v| v.dist(p)).fold(0.0, f64::max))
}

/// Closed-polygon membership with boundary tolerance [`GEOM_EPS`]; works for
/// any simple polygon (dual-guaranteed cells may be non-convex).
pub fn point_in_polygon(p: Point2, poly: &SimplePolygon) -> bool {
    let v = poly.vertices();
    if v.len() < 3 {
        return false;
    }
    for i in 0..v.len() {
        if dist_point_segment(p, v[i], v[(i + 1) % v.len()]) <= GEOM_EPS {
            return true;
        }
    }
    // Even-odd crossing count with the half-open rule.
    let mut inside = false;
    let mut j = v.len() - 1;
    for i in 0..v.len() {
        if (v[i].y > p.y) != (v[j].y > p.y) {
            let x_cross = v[j].x + (v[i].x - v[j].x) * (p.y - v[j].y) / (v[i].y - v[j].y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Convex hull (Andrew monotone chain), CCW. Returns fewer than 3 points
/// unchanged.
pub fn convex_hull(points: &[Point2]) -> Vec<Point2> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup_by(|a, b| a.dist(*b) <= 1e-12);
    if pts.len() < 3 {
        return pts;
    }
    let turn_right = |chain: &[Point2], p: Point2| {
        let a = chain[chain.len() - 2];
        let b = chain[chain.len() - 1];
        (b - a).cross(p - a) <= 0.0
    };
    let mut lower: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in &pts {
        while lower.len() >= 2 && turn_right(&lower, p) {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2> = Vec::with_capacity(pts.len());
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && turn_right(&upper, p) {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Alternating (Dykstra) projection onto the intersection of the two lens
/// disks and a convex polygon. Used as a guard when the plain lens projection
/// lands outside the domain; the intersection is nonempty whenever the lens
/// bound is sound, since the true centroid lies in all three sets.
pub fn project_onto_lens_in_polygon(
    p: Point2,
    c1: Point2,
    c2: Point2,
    b: f64,
    poly: &SimplePolygon,
) -> Result<Point2> {
    let proj_disk = |q: Point2, c: Point2| -> Point2 {
        if c.dist(q) <= b {
            q
        } else {
            match (q - c).unit() {
                Some(dir) => c + dir.scale(b),
                None => c,
            }
        }
    };
    let proj_poly = |q: Point2| -> Point2 {
        if point_in_polygon(q, poly) {
            return q;
        }
        let v = poly.vertices();
        let mut best = v[0];
        let mut best_d = f64::INFINITY;
        for i in 0..v.len() {
            let (a, bb) = (v[i], v[(i + 1) % v.len()]);
            let ab = bb - a;
            let len2 = ab.dot(ab).max(1e-300);
            let t = ((q - a).dot(ab) / len2).clamp(0.0, 1.0);
            let cand = a + ab.scale(t);
            let dq = q.dist(cand);
            if dq < best_d {
                best_d = dq;
                best = cand;
            }
        }
        best
    };

    let mut x = p;
    let mut inc = [Point2::default(); 3];
    for _ in 0..200 {
        let prev = x;
        for i in 0..3 {
            let y = x + inc[i];
            let px = match i {
                0 => proj_disk(y, c1),
                1 => proj_disk(y, c2),
                _ => proj_poly(y),
            };
            inc[i] = y - px;
            x = px;
        }
        if x.dist(prev) < 1e-12 {
            break;
        }
    }
    if c1.dist(x) <= b + 1e-6 && c2.dist(x) <= b + 1e-6 {
        Ok(x)
    } else {
        Err(Error::InconsistentCentroidBound)
    }
}
