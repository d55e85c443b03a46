//! Domains, boundary parametrizations and point-set generators.
//!
//! Every domain carries an arc-proportional boundary parametrization
//! `gamma: [0, 1) -> boundary` and an open-set membership predicate. Point
//! sets remember what they are (interior, boundary, fictitious charge
//! locations, or nodes on the reference segment) and are validated on
//! construction.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance below which two points are considered identical, and a point is
/// considered to lie on the boundary.
pub const POINT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::invalid(format!("non-finite point ({x}, {y})")));
        }
        Ok(Point2 { x, y })
    }

    pub(crate) const fn xy(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum DomainKind {
    UnitDisk,
    Rectangle { ax: f64, ay: f64, bx: f64, by: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    kind: DomainKind,
}

impl Domain {
    pub fn unit_disk() -> Self {
        Domain {
            kind: DomainKind::UnitDisk,
        }
    }

    pub fn rectangle(ax: f64, ay: f64, bx: f64, by: f64) -> Result<Self> {
        if ![ax, ay, bx, by].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("rectangle bounds must be finite"));
        }
        if !(ax < bx && ay < by) {
            return Err(Error::invalid(format!(
                "rectangle requires ax < bx and ay < by, got ({ax}, {ay}, {bx}, {by})"
            )));
        }
        Ok(Domain {
            kind: DomainKind::Rectangle { ax, ay, bx, by },
        })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Arc-proportional boundary parametrization. `t` is taken modulo 1.
    ///
    /// The disk starts at (1, 0) and runs counterclockwise. Rectangles start
    /// at the lower-left corner `(ax, ay)` and run counterclockwise.
    pub fn gamma(&self, t: f64) -> Point2 {
        let t = t.rem_euclid(1.0);
        match self.kind {
            DomainKind::UnitDisk => {
                let theta = 2.0 * PI * t;
                Point2::xy(theta.cos(), theta.sin())
            }
            DomainKind::Rectangle { ax, ay, bx, by } => {
                let (w, h) = (bx - ax, by - ay);
                let s = t * 2.0 * (w + h);
                if s < w {
                    Point2::xy(ax + s, ay)
                } else if s < w + h {
                    Point2::xy(bx, ay + (s - w))
                } else if s < 2.0 * w + h {
                    Point2::xy(bx - (s - w - h), by)
                } else {
                    Point2::xy(ax, by - (s - 2.0 * w - h))
                }
            }
        }
    }

    /// Open-set membership.
    pub fn contains(&self, p: &Point2) -> bool {
        match self.kind {
            DomainKind::UnitDisk => p.norm() < 1.0,
            DomainKind::Rectangle { ax, ay, bx, by } => {
                p.x > ax && p.x < bx && p.y > ay && p.y < by
            }
        }
    }

    /// Unsigned distance from `p` to the boundary curve.
    pub fn boundary_distance(&self, p: &Point2) -> f64 {
        match self.kind {
            DomainKind::UnitDisk => (p.norm() - 1.0).abs(),
            DomainKind::Rectangle { ax, ay, bx, by } => {
                let cx = p.x.clamp(ax, bx);
                let cy = p.y.clamp(ay, by);
                let inside = p.x >= ax && p.x <= bx && p.y >= ay && p.y <= by;
                if inside {
                    (p.x - ax).min(bx - p.x).min(p.y - ay).min(by - p.y)
                } else {
                    (p.x - cx).hypot(p.y - cy)
                }
            }
        }
    }

    /// True when `p` is in the closed domain.
    pub fn closure_contains(&self, p: &Point2) -> bool {
        self.contains(p) || self.boundary_distance(p) <= POINT_TOL
    }

    pub fn centroid(&self) -> Point2 {
        match self.kind {
            DomainKind::UnitDisk => Point2::xy(0.0, 0.0),
            DomainKind::Rectangle { ax, ay, bx, by } => {
                Point2::xy(0.5 * (ax + bx), 0.5 * (ay + by))
            }
        }
    }

    /// Largest distance from the centroid to the boundary. For both supported
    /// shapes this is the circumradius about the centroid.
    pub fn circumradius(&self) -> f64 {
        match self.kind {
            DomainKind::UnitDisk => 1.0,
            DomainKind::Rectangle { ax, ay, bx, by } => 0.5 * (bx - ax).hypot(by - ay),
        }
    }

    /// Axis-aligned bounding box `(ax, ay, bx, by)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        match self.kind {
            DomainKind::UnitDisk => (-1.0, -1.0, 1.0, 1.0),
            DomainKind::Rectangle { ax, ay, bx, by } => (ax, ay, bx, by),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self.kind {
            DomainKind::UnitDisk => 2.0 * PI,
            DomainKind::Rectangle { ax, ay, bx, by } => 2.0 * ((bx - ax) + (by - ay)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointTag {
    Interior,
    Boundary,
    Fictitious,
    /// Nodes on the reference segment `[-1, 1] x {0}` used by the 1D
    /// polynomial laboratory.
    Segment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeFamily {
    Equidistant,
    ChebyshevMapped,
    Grid,
    Circle,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorInfo {
    pub family: NodeFamily,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<Point2>,
    tag: PointTag,
    generator: GeneratorInfo,
}

impl PointSet {
    /// Builds a point set after checking finiteness and pairwise distinctness.
    /// Tag semantics are not checked; use [`PointSet::on_domain`] for that.
    pub fn new(points: Vec<Point2>, tag: PointTag, family: NodeFamily) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::invalid(format!("non-finite point ({}, {})", p.x, p.y)));
        }
        if let Some((i, j)) = first_duplicate(&points) {
            return Err(Error::invalid(format!(
                "duplicate points at indices {i} and {j}: ({}, {})",
                points[i].x, points[i].y
            )));
        }
        let count = points.len();
        Ok(PointSet {
            points,
            tag,
            generator: GeneratorInfo { family, count },
        })
    }

    /// Builds a point set and checks every point against its tag.
    pub fn on_domain(
        domain: &Domain,
        points: Vec<Point2>,
        tag: PointTag,
        family: NodeFamily,
    ) -> Result<Self> {
        let set = PointSet::new(points, tag, family)?;
        for p in &set.points {
            let ok = match tag {
                PointTag::Interior => {
                    domain.contains(p) && domain.boundary_distance(p) > POINT_TOL
                }
                PointTag::Boundary => domain.boundary_distance(p) <= POINT_TOL,
                PointTag::Fictitious => !domain.closure_contains(p),
                PointTag::Segment => on_segment(p),
            };
            if !ok {
                return Err(Error::invalid(format!(
                    "point ({}, {}) violates the {tag:?} tag",
                    p.x, p.y
                )));
            }
        }
        Ok(set)
    }

    /// Nodes on the reference segment, embedded as `(x, 0)`.
    pub fn segment(values: &[f64], family: NodeFamily) -> Result<Self> {
        let points: Vec<Point2> = values.iter().map(|&x| Point2::xy(x, 0.0)).collect();
        let set = PointSet::new(points, PointTag::Segment, family)?;
        if let Some(p) = set.points.iter().find(|p| !on_segment(p)) {
            return Err(Error::invalid(format!("node {} outside [-1, 1]", p.x)));
        }
        Ok(set)
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tag(&self) -> PointTag {
        self.tag
    }

    pub fn generator(&self) -> GeneratorInfo {
        self.generator
    }

    /// First coordinates, for segment node sets.
    pub fn abscissae(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.x).collect()
    }

    /// `self` followed by the points of `other` that are not already present.
    /// The tag of `self` is kept.
    pub fn union(&self, other: &PointSet) -> PointSet {
        let mut points = self.points.clone();
        let mut index = SortedIndex::new(&self.points);
        for p in &other.points {
            if !index.contains_near(&points, p) {
                index.insert(&points, points.len(), p);
                points.push(*p);
            }
        }
        let count = points.len();
        PointSet {
            points,
            tag: self.tag,
            generator: GeneratorInfo {
                family: self.generator.family,
                count,
            },
        }
    }

    /// Position of every point of `other` inside `self`, if all are present.
    pub fn indices_of(&self, other: &PointSet) -> Option<Vec<usize>> {
        let index = SortedIndex::new(&self.points);
        other
            .points
            .iter()
            .map(|p| index.find_near(&self.points, p))
            .collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Result<PointSet> {
        let points = indices
            .iter()
            .map(|&i| {
                self.points
                    .get(i)
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("index {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        PointSet::new(points, self.tag, self.generator.family)
    }
}

fn on_segment(p: &Point2) -> bool {
    p.y == 0.0 && p.x >= -1.0 - POINT_TOL && p.x <= 1.0 + POINT_TOL
}

/// Indices sorted by x-coordinate for near-duplicate lookups.
struct SortedIndex {
    order: Vec<usize>,
}

impl SortedIndex {
    fn new(points: &[Point2]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].x.total_cmp(&points[b].x));
        SortedIndex { order }
    }

    fn find_near(&self, points: &[Point2], p: &Point2) -> Option<usize> {
        let start = self
            .order
            .partition_point(|&i| points[i].x < p.x - POINT_TOL);
        self.order[start..]
            .iter()
            .take_while(|&&i| points[i].x <= p.x + POINT_TOL)
            .copied()
            .find(|&i| points[i].dist(p) <= POINT_TOL)
    }

    fn contains_near(&self, points: &[Point2], p: &Point2) -> bool {
        self.find_near(points, p).is_some()
    }

    fn insert(&mut self, points: &[Point2], idx: usize, p: &Point2) {
        let pos = self.order.partition_point(|&i| points[i].x < p.x);
        self.order.insert(pos, idx);
    }
}

fn first_duplicate(points: &[Point2]) -> Option<(usize, usize)> {
    let index = SortedIndex::new(points);
    for (k, &i) in index.order.iter().enumerate() {
        for &j in &index.order[k + 1..] {
            if points[j].x - points[i].x > POINT_TOL {
                break;
            }
            if points[i].dist(&points[j]) <= POINT_TOL {
                return Some((i.min(j), i.max(j)));
            }
        }
    }
    None
}

/// `n` equidistant nodes on `[-1, 1]`, endpoints included; `{0}` for `n = 1`.
pub fn equidistant_nodes(n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(Error::invalid("equidistant_nodes requires n >= 1")),
        1 => Ok(vec![0.0]),
        _ => {
            let last = (n - 1) as f64;
            Ok((0..n)
                .map(|k| {
                    if k == 0 {
                        -1.0
                    } else if k == n - 1 {
                        1.0
                    } else {
                        -1.0 + 2.0 * k as f64 / last
                    }
                })
                .collect())
        }
    }
}

/// Chebyshev-Gauss roots `cos((2k+1) pi / 2n)`, sorted ascending.
pub fn chebyshev_nodes(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("chebyshev_nodes requires n >= 1"));
    }
    let nf = n as f64;
    // Index from the far end so the output is ascending; the sine form keeps
    // the middle node exactly zero for odd n.
    Ok((0..n)
        .map(|k| (PI * (2.0 * k as f64 + 1.0 - nf) / (2.0 * nf)).sin())
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, schemars::JsonSchema)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFamily {
    Equidistant,
    ChebyshevMapped,
}

pub fn boundary_points(domain: &Domain, n: usize, family: BoundaryFamily) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::invalid("boundary_points requires n >= 1"));
    }
    let params: Vec<f64> = match family {
        BoundaryFamily::Equidistant => (0..n).map(|k| k as f64 / n as f64).collect(),
        BoundaryFamily::ChebyshevMapped => chebyshev_nodes(n)?
            .into_iter()
            .map(|x| 0.5 * (x + 1.0))
            .collect(),
    };
    let points = params.into_iter().map(|t| domain.gamma(t)).collect();
    let node_family = match family {
        BoundaryFamily::Equidistant => NodeFamily::Equidistant,
        BoundaryFamily::ChebyshevMapped => NodeFamily::ChebyshevMapped,
    };
    PointSet::on_domain(domain, points, PointTag::Boundary, node_family)
}

/// Cell-centred `g x g` grid over the bounding box, restricted to the open
/// domain; `g` is the smallest size giving at least `target` points.
pub fn interior_points(domain: &Domain, target: usize) -> Result<PointSet> {
    if target == 0 {
        return Err(Error::invalid("interior_points requires target >= 1"));
    }
    let (ax, ay, bx, by) = domain.bounding_box();
    let mut g = (target as f64).sqrt().ceil() as usize;
    // The open domain occupies a fixed fraction of the box; anything needing
    // far more cells than this is degenerate.
    let max_g = 16 * g + 64;
    while g <= max_g {
        let (hx, hy) = ((bx - ax) / g as f64, (by - ay) / g as f64);
        let mut pts = Vec::with_capacity(g * g);
        for j in 0..g {
            for i in 0..g {
                let p = Point2::xy(ax + (i as f64 + 0.5) * hx, ay + (j as f64 + 0.5) * hy);
                if domain.contains(&p) && domain.boundary_distance(&p) > POINT_TOL {
                    pts.push(p);
                }
            }
        }
        if pts.len() >= target {
            return PointSet::on_domain(domain, pts, PointTag::Interior, NodeFamily::Grid);
        }
        g += 1;
    }
    Err(Error::GenerationFailure(format!(
        "could not place {target} interior points"
    )))
}

/// Equidistant charge locations on a circle about the centroid with radius
/// `factor` times the circumradius.
pub fn fictitious_boundary(domain: &Domain, factor: f64, n: usize) -> Result<PointSet> {
    if !(factor > 1.0) || !factor.is_finite() {
        return Err(Error::invalid(format!(
            "fictitious boundary factor must exceed 1, got {factor}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("fictitious_boundary requires n >= 1"));
    }
    let c = domain.centroid();
    let radius = factor * domain.circumradius();
    let points = (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64;
            Point2::xy(c.x + radius * theta.cos(), c.y + radius * theta.sin())
        })
        .collect();
    PointSet::on_domain(domain, points, PointTag::Fictitious, NodeFamily::Circle)
}

/// Discrete fill distance: the largest distance from a reference point to
/// its nearest point of `points`.
pub fn fill_distance(points: &PointSet, reference: &PointSet) -> Result<f64> {
    if points.is_empty() || reference.is_empty() {
        return Err(Error::invalid("fill_distance requires nonempty point sets"));
    }
    Ok(reference
        .points()
        .iter()
        .map(|r| {
            points
                .points()
                .iter()
                .map(|p| p.dist(r))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equidistant_examples() {
        assert_eq!(equidistant_nodes(3).unwrap(), vec![-1.0, 0.0, 1.0]);
        assert_eq!(equidistant_nodes(1).unwrap(), vec![0.0]);
        let five = equidistant_nodes(5).unwrap();
        for w in five.windows(2) {
            assert_eq!(w[1] - w[0], 0.5);
        }
        assert!(equidistant_nodes(0).is_err());
        let n = equidistant_nodes(17).unwrap();
        assert_eq!((n[0], n[16]), (-1.0, 1.0));
    }

    #[test]
    fn chebyshev_examples() {
        assert_eq!(chebyshev_nodes(1).unwrap(), vec![0.0]);
        let two = chebyshev_nodes(2).unwrap();
        assert!((two[0] + 0.7071067811865476).abs() < 1e-15);
        assert!((two[1] - 0.7071067811865476).abs() < 1e-15);
        let four: f64 = chebyshev_nodes(4).unwrap().iter().sum();
        assert!(four.abs() < 1e-14);
        assert!(chebyshev_nodes(0).is_err());
        for n in 1..40 {
            let nodes = chebyshev_nodes(n).unwrap();
            assert!(nodes.windows(2).all(|w| w[0] < w[1]));
            assert!(nodes.iter().all(|x| x.abs() < 1.0));
            for (k, x) in nodes.iter().enumerate() {
                // descending cos form, reversed
                let expect = (PI * (2 * (n - 1 - k) + 1) as f64 / (2 * n) as f64).cos();
                assert!((x - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn boundary_point_examples() {
        let disk = Domain::unit_disk();
        let pts = boundary_points(&disk, 4, BoundaryFamily::Equidistant).unwrap();
        let expect = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (p, e) in pts.points().iter().zip(expect) {
            assert!((p.x - e.0).abs() < 1e-15 && (p.y - e.1).abs() < 1e-15);
        }
        let sq = Domain::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let corners = boundary_points(&sq, 4, BoundaryFamily::Equidistant).unwrap();
        let expect = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        for (p, e) in corners.points().iter().zip(expect) {
            assert_eq!((p.x, p.y), e);
        }
        for family in [BoundaryFamily::Equidistant, BoundaryFamily::ChebyshevMapped] {
            let pts = boundary_points(&disk, 16, family).unwrap();
            assert!(pts.points().iter().all(|p| (p.norm() - 1.0).abs() < 1e-14));
            assert_eq!(pts.tag(), PointTag::Boundary);
        }
        assert!(boundary_points(&disk, 0, BoundaryFamily::Equidistant).is_err());
    }

    #[test]
    fn interior_examples() {
        let sq = Domain::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let pts = interior_points(&sq, 4).unwrap();
        assert!(pts.len() >= 4);
        assert!(pts.points().iter().all(|p| sq.contains(p)));

        let disk = Domain::unit_disk();
        let one = interior_points(&disk, 1).unwrap();
        assert_eq!(one.points(), &[Point2::xy(0.0, 0.0)]);

        for d in [disk, sq] {
            let pts = interior_points(&d, 300).unwrap();
            assert!(pts.len() >= 300);
            assert!(pts.points().iter().all(|p| d.boundary_distance(p) > 1e-12));
        }
    }

    #[test]
    fn fictitious_examples() {
        let disk = Domain::unit_disk();
        let pts = fictitious_boundary(&disk, 2.0, 4).unwrap();
        let expect = [(2.0, 0.0), (0.0, 2.0), (-2.0, 0.0), (0.0, -2.0)];
        for (p, e) in pts.points().iter().zip(expect) {
            assert!((p.x - e.0).abs() < 1e-14 && (p.y - e.1).abs() < 1e-14);
        }
        let pts = fictitious_boundary(&disk, 1.5, 13).unwrap();
        assert!(pts.points().iter().all(|p| (p.norm() - 1.5).abs() < 1e-14));
        let sq = Domain::rectangle(-1.0, -1.0, 1.0, 1.0).unwrap();
        let pts = fictitious_boundary(&sq, 2.0, 8).unwrap();
        let r = 2.0 * 2f64.sqrt();
        assert!(pts.points().iter().all(|p| (p.norm() - r).abs() < 1e-14));
        assert!(pts.points().iter().all(|p| !sq.closure_contains(p)));
        assert!(fictitious_boundary(&disk, 1.0, 4).is_err());
        assert!(fictitious_boundary(&disk, 0.5, 4).is_err());
    }

    #[test]
    fn fill_distance_examples() {
        let pts = PointSet::segment(&[-1.0, 0.0, 1.0], NodeFamily::Custom).unwrap();
        let reference =
            PointSet::segment(&equidistant_nodes(2001).unwrap(), NodeFamily::Equidistant).unwrap();
        assert!((fill_distance(&pts, &reference).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(fill_distance(&reference, &reference).unwrap(), 0.0);

        // halving the spacing of a uniform grid halves the fill distance
        let square = Domain::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        let ticks = equidistant_nodes(201).unwrap();
        let closed: Vec<Point2> = ticks
            .iter()
            .flat_map(|&a| ticks.iter().map(move |&b| Point2::xy(0.5 * (a + 1.0), 0.5 * (b + 1.0))))
            .collect();
        let fine = PointSet::new(closed, PointTag::Interior, NodeFamily::Grid).unwrap();
        let coarse = interior_points(&square, 100).unwrap();
        let finer = interior_points(&square, 400).unwrap();
        let h1 = fill_distance(&coarse, &fine).unwrap();
        let h2 = fill_distance(&finer, &fine).unwrap();
        let ratio = h1 / h2;
        assert!((ratio - 2.0).abs() < 0.05 * 2.0, "ratio {ratio}");

        let empty = PointSet::new(vec![], PointTag::Segment, NodeFamily::Custom).unwrap();
        assert!(fill_distance(&empty, &reference).is_err());
    }

    #[test]
    fn rejects_duplicates_and_bad_tags() {
        let dup = vec![Point2::xy(0.1, 0.2), Point2::xy(0.3, 0.0), Point2::xy(0.1, 0.2)];
        assert!(PointSet::new(dup, PointTag::Interior, NodeFamily::Custom).is_err());
        let disk = Domain::unit_disk();
        let outside = vec![Point2::xy(2.0, 0.0)];
        assert!(PointSet::on_domain(&disk, outside, PointTag::Interior, NodeFamily::Custom).is_err());
        assert!(Domain::rectangle(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Point2::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn rectangle_gamma_is_closed_and_on_boundary() {
        let r = Domain::rectangle(-0.5, 0.0, 1.5, 1.0).unwrap();
        for k in 0..1000 {
            let p = r.gamma(k as f64 / 1000.0);
            assert!(r.boundary_distance(&p) < 1e-12);
        }
        let end = r.gamma(1.0 - 1e-12);
        assert!(end.dist(&r.gamma(0.0)) < 1e-9);
    }
}
