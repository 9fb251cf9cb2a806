//! 3D T-mesh control grid over exact rational knot coordinates.
//!
//! The grid stores axis-aligned leaf cells tiling the knot box plus the
//! control points (anchor, three 5-knot windows, weight, payload). Knot
//! windows are inferred by ray tracing across cell faces; the boundary
//! restriction layer replicates end knots to multiplicity 4 and adds
//! bd-control-points; cell subdivision runs a fixpoint that splits every
//! blending function whose re-traced window has become stale, preserving the
//! weighted blending sum exactly.

use crate::bspline::{split_basis_rat, RatKnots5};
use crate::rat::{midpoint, ri, to_f64, Rat};
use num_traits::Zero;
use std::collections::{BTreeMap, HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("knot list along axis {0} must have >= 2 strictly ascending entries")]
    NonAscending(usize),
    #[error("boundary layer already present")]
    AlreadyLayered,
    #[error("operation requires the boundary layer")]
    NotLayered,
    #[error("invalid cell id {0}")]
    BadCell(usize),
    #[error("anchor is not a grid vertex")]
    BadAnchor,
    #[error("invalid domain face")]
    BadFace,
    #[error("boundary requirement violated: point {0} has weight {1} != 1")]
    BoundaryRequirement(usize, String),
    #[error("mixed payload dimensions in grouped control points")]
    PayloadDim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum PointKind {
    Interior,
    BdControlPoint,
    CentralPoint,
    Auxiliary,
}

/// One of the six faces of the knot box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainFace {
    pub axis: usize,
    pub max_side: bool,
}

impl DomainFace {
    pub fn all() -> [DomainFace; 6] {
        let mut f = [DomainFace { axis: 0, max_side: false }; 6];
        for ax in 0..3 {
            f[2 * ax] = DomainFace { axis: ax, max_side: false };
            f[2 * ax + 1] = DomainFace { axis: ax, max_side: true };
        }
        f
    }
}

pub type Anchor = [Rat; 3];

#[derive(Debug, Clone)]
pub struct ControlPoint {
    pub anchor: Anchor,
    pub windows: [RatKnots5; 3],
    pub windows_f64: [[f64; 5]; 3],
    pub weight: Rat,
    pub payload: Vec<f64>,
    pub kind: PointKind,
}

impl ControlPoint {
    pub fn new(windows: [RatKnots5; 3], weight: Rat, payload: Vec<f64>, kind: PointKind) -> Self {
        let anchor = [windows[0][2].clone(), windows[1][2].clone(), windows[2][2].clone()];
        let windows_f64 = windows_f64_of(&windows);
        ControlPoint { anchor, windows, windows_f64, weight, payload, kind }
    }

    /// Open support box (per-axis first/last window knots).
    pub fn support(&self) -> [(f64, f64); 3] {
        core::array::from_fn(|a| (self.windows_f64[a][0], self.windows_f64[a][4]))
    }
}

pub fn windows_f64_of(w: &[RatKnots5; 3]) -> [[f64; 5]; 3] {
    core::array::from_fn(|a| core::array::from_fn(|i| to_f64(&w[a][i])))
}

#[derive(Debug, Clone)]
pub struct Cell {
    pub min: [Rat; 3],
    pub max: [Rat; 3],
}

impl Cell {
    pub fn contains_closed(&self, p: &[Rat; 3]) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }
}

/// One blending-function split performed during local refinement.
#[derive(Debug, Clone)]
pub struct RefinementEvent {
    pub piece: usize,
    pub axis: usize,
    pub knot: Rat,
    pub c1: Rat,
    pub c2: Rat,
    pub children: [Option<usize>; 2],
}

/// Ordered split log; replaying it on the pre-refinement blending set
/// reproduces the post-refinement set exactly.
#[derive(Debug, Clone, Default)]
pub struct RefinementLog {
    pub events: Vec<RefinementEvent>,
    pub seed_pieces: usize,
}

#[derive(Debug, Clone)]
pub struct ControlGrid {
    pub grid_coords: [Vec<Rat>; 3],
    pub cells: Vec<Cell>,
    pub layered: bool,
    pub points: Vec<ControlPoint>,
}

impl ControlGrid {
    /// Tensor-product grid over three ascending knot lists; one weight-1
    /// control point per grid vertex, open-boundary knot windows.
    pub fn build_regular(s: [Vec<Rat>; 3]) -> Result<ControlGrid, GridError> {
        for (ax, list) in s.iter().enumerate() {
            if list.len() < 2 || list.windows(2).any(|w| w[0] >= w[1]) {
                return Err(GridError::NonAscending(ax));
            }
        }
        let mut cells = Vec::new();
        for i in 0..s[0].len() - 1 {
            for j in 0..s[1].len() - 1 {
                for k in 0..s[2].len() - 1 {
                    cells.push(Cell {
                        min: [s[0][i].clone(), s[1][j].clone(), s[2][k].clone()],
                        max: [s[0][i + 1].clone(), s[1][j + 1].clone(), s[2][k + 1].clone()],
                    });
                }
            }
        }
        let mut grid = ControlGrid { grid_coords: s, cells, layered: false, points: Vec::new() };
        let coords = grid.grid_coords.clone();
        for u in &coords[0] {
            for v in &coords[1] {
                for w in &coords[2] {
                    let anchor = [u.clone(), v.clone(), w.clone()];
                    let windows: [RatKnots5; 3] =
                        core::array::from_fn(|a| grid.simple_window(&anchor, a));
                    grid.points.push(ControlPoint::new(
                        windows,
                        ri(1),
                        Vec::new(),
                        PointKind::Interior,
                    ));
                }
            }
        }
        Ok(grid)
    }

    pub fn domain_min(&self, axis: usize) -> &Rat {
        self.grid_coords[axis].first().unwrap()
    }

    pub fn domain_max(&self, axis: usize) -> &Rat {
        self.grid_coords[axis].last().unwrap()
    }

    pub fn domain_box(&self) -> ([Rat; 3], [Rat; 3]) {
        (
            core::array::from_fn(|a| self.domain_min(a).clone()),
            core::array::from_fn(|a| self.domain_max(a).clone()),
        )
    }

    /// Sorted unique crossing planes strictly beyond `from` along `axis`,
    /// for the ray through the other two coordinates of `at`. A ray running
    /// along shared cell edges sees the union of the incident cells' planes.
    fn crossings(&self, at: &Anchor, axis: usize, from: &Rat, ascending: bool) -> Vec<Rat> {
        let (o1, o2) = other_axes(axis);
        let mut planes: Vec<Rat> = Vec::new();
        for c in &self.cells {
            if c.min[o1] <= at[o1] && at[o1] <= c.max[o1] && c.min[o2] <= at[o2] && at[o2] <= c.max[o2]
            {
                for p in [&c.min[axis], &c.max[axis]] {
                    let beyond = if ascending { p > from } else { p < from };
                    if beyond && !planes.contains(p) {
                        planes.push(p.clone());
                    }
                }
            }
        }
        planes.sort();
        if !ascending {
            planes.reverse();
        }
        planes
    }

    /// Two knots beyond the anchor on `side`, extended by the end policy:
    /// replicated end knots when layered, ghost extension otherwise.
    fn side_knots(&self, at: &Anchor, axis: usize, ascending: bool, need: usize) -> Vec<Rat> {
        let mut out = self.crossings(at, axis, &at[axis], ascending);
        out.truncate(need);
        while out.len() < need {
            if self.layered {
                let end =
                    if ascending { self.domain_max(axis) } else { self.domain_min(axis) };
                out.push(end.clone());
            } else {
                let base = &self.grid_coords[axis];
                let n = base.len();
                let (end, step) = if ascending {
                    (self.domain_max(axis).clone(), &base[n - 1] - &base[n - 2])
                } else {
                    (self.domain_min(axis).clone(), &base[0] - &base[1])
                };
                let last = out.last().cloned().unwrap_or_else(|| at[axis].clone());
                let k = if (ascending && last < end) || (!ascending && last > end) {
                    end
                } else {
                    last + step
                };
                out.push(k);
            }
        }
        out
    }

    /// Natural ray-traced 5-knot window for a simple point anchored at `at`.
    pub fn simple_window(&self, at: &Anchor, axis: usize) -> RatKnots5 {
        let right = self.side_knots(at, axis, true, 2);
        let left = self.side_knots(at, axis, false, 2);
        [left[1].clone(), left[0].clone(), at[axis].clone(), right[0].clone(), right[1].clone()]
    }

    /// Ray-traced knot vector at a grid vertex (the very first cell-face
    /// intersections on each side, with boundary replication beyond the box).
    pub fn trace_knots(&self, anchor: &Anchor, axis: usize) -> Result<RatKnots5, GridError> {
        if !self.is_vertex(anchor) {
            return Err(GridError::BadAnchor);
        }
        Ok(self.simple_window(anchor, axis))
    }

    pub fn is_vertex(&self, p: &Anchor) -> bool {
        self.cells.iter().any(|c| {
            (0..3).all(|a| p[a] == c.min[a] || p[a] == c.max[a])
                && c.contains_closed(p)
        })
    }

    /// Re-trace one window in place, keeping anchor-valued replicas pinned.
    /// Replicas encode boundary multiplicity and merge-wall structure; only
    /// the remaining outer slots follow the current cell structure.
    fn retrace_window(&self, at: &Anchor, axis: usize, w: &RatKnots5) -> RatKnots5 {
        let c = &w[2];
        let lrep = if w[1] == *c { if w[0] == *c { 2 } else { 1 } } else { 0 };
        let rrep = if w[3] == *c { if w[4] == *c { 2 } else { 1 } } else { 0 };
        let left = self.side_knots(at, axis, false, 2 - lrep);
        let right = self.side_knots(at, axis, true, 2 - rrep);
        let mut out: RatKnots5 = core::array::from_fn(|_| c.clone());
        // Replicas stay pinned next to the center; crossings fill the
        // remaining slots from the center outward.
        for (i, v) in left.iter().enumerate() {
            out[1 - lrep - i] = v.clone();
        }
        for (i, v) in right.iter().enumerate() {
            out[3 + rrep + i] = v.clone();
        }
        out
    }

    fn retrace_windows(&self, windows: &[RatKnots5; 3]) -> [RatKnots5; 3] {
        let at: Anchor = core::array::from_fn(|a| windows[a][2].clone());
        core::array::from_fn(|a| self.retrace_window(&at, a, &windows[a]))
    }

    /// End-knot replication to multiplicity 4 plus one bd-control-point per
    /// boundary direction; corner/edge/face vertices end up with 8/4/2
    /// co-anchored points.
    pub fn add_boundary_layer(&mut self) -> Result<(), GridError> {
        if self.layered {
            return Err(GridError::AlreadyLayered);
        }
        self.layered = true;
        // Existing windows near the ends pick up the replicated knots.
        let retraced: Vec<[RatKnots5; 3]> =
            self.points.iter().map(|p| self.retrace_windows(&p.windows)).collect();
        for (p, w) in self.points.iter_mut().zip(retraced) {
            p.windows = w;
            p.windows_f64 = windows_f64_of(&p.windows);
        }
        // Shifted bd windows for every boundary vertex.
        let mut added = Vec::new();
        for p in &self.points {
            let mut bd_axes = Vec::new();
            for a in 0..3 {
                if p.anchor[a] == *self.domain_min(a) || p.anchor[a] == *self.domain_max(a) {
                    bd_axes.push(a);
                }
            }
            if bd_axes.is_empty() {
                continue;
            }
            let n = bd_axes.len();
            for mask in 1..(1u8 << n) {
                let mut windows = p.windows.clone();
                for (bit, &a) in bd_axes.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        windows[a] = self.bd_window(&p.anchor, a);
                    }
                }
                added.push(ControlPoint::new(
                    windows,
                    ri(1),
                    p.payload.clone(),
                    PointKind::BdControlPoint,
                ));
            }
        }
        self.points.extend(added);
        Ok(())
    }

    /// The extra bd-control-point window at a boundary anchor: the 5-window
    /// shifted one replica outward (Fig-4.6 bottom pattern).
    fn bd_window(&self, at: &Anchor, axis: usize) -> RatKnots5 {
        let e = at[axis].clone();
        if at[axis] == *self.domain_min(axis) {
            let right = self.side_knots(at, axis, true, 1);
            [e.clone(), e.clone(), e.clone(), e, right[0].clone()]
        } else {
            let left = self.side_knots(at, axis, false, 1);
            [left[0].clone(), e.clone(), e.clone(), e.clone(), e]
        }
    }

    pub fn boundary_cells(&self, face: DomainFace) -> Vec<usize> {
        let plane = if face.max_side {
            self.domain_max(face.axis).clone()
        } else {
            self.domain_min(face.axis).clone()
        };
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                if face.max_side { c.max[face.axis] == plane } else { c.min[face.axis] == plane }
            })
            .map(|(i, _)| i)
            .collect()
    }

    /// Points whose blending function includes bd-knots of `face`
    /// (the normal-axis window carries the end value with multiplicity >= 2).
    pub fn to_be_merged(&self, face: DomainFace) -> Result<Vec<usize>, GridError> {
        if !self.layered {
            return Err(GridError::NotLayered);
        }
        let end = if face.max_side {
            self.domain_max(face.axis).clone()
        } else {
            self.domain_min(face.axis).clone()
        };
        Ok(self
            .points
            .iter()
            .enumerate()
            .filter(|(_, p)| p.windows[face.axis].iter().filter(|k| **k == end).count() >= 2)
            .map(|(i, _)| i)
            .collect())
    }

    /// Cells with at least one vertex carrying a To-be-merged control point.
    pub fn modification_zone(&self, face: DomainFace) -> Result<Vec<usize>, GridError> {
        if face.axis >= 3 {
            return Err(GridError::BadFace);
        }
        let tbm = self.to_be_merged(face)?;
        let anchors: Vec<&Anchor> = tbm.iter().map(|&i| &self.points[i].anchor).collect();
        Ok(self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| {
                anchors.iter().any(|a| {
                    (0..3).all(|ax| a[ax] == c.min[ax] || a[ax] == c.max[ax])
                        && c.contains_closed(a)
                })
            })
            .map(|(i, _)| i)
            .collect())
    }

    /// Octasection of the listed cells followed by the local-refinement
    /// fixpoint: every weighted blending pair whose re-traced knot vector
    /// differs is split (N = c1 N1 + c2 N2) until no window changes, then
    /// pieces with identical windows are collected into single points.
    pub fn subdivide_cells(&mut self, cell_ids: &[usize]) -> Result<RefinementLog, GridError> {
        for &id in cell_ids {
            if id >= self.cells.len() {
                return Err(GridError::BadCell(id));
            }
        }
        if cell_ids.is_empty() {
            return Ok(RefinementLog { events: Vec::new(), seed_pieces: self.points.len() });
        }
        let mut marked = vec![false; self.cells.len()];
        for &id in cell_ids {
            marked[id] = true;
        }
        let mut kept: Vec<Cell> = Vec::new();
        let mut split: Vec<Cell> = Vec::new();
        for (i, c) in self.cells.drain(..).enumerate() {
            if marked[i] {
                split.push(c);
            } else {
                kept.push(c);
            }
        }
        for c in split {
            let mid: [Rat; 3] = core::array::from_fn(|a| midpoint(&c.min[a], &c.max[a]));
            for dx in 0..2 {
                for dy in 0..2 {
                    for dz in 0..2 {
                        let d = [dx, dy, dz];
                        kept.push(Cell {
                            min: core::array::from_fn(|a| {
                                if d[a] == 0 { c.min[a].clone() } else { mid[a].clone() }
                            }),
                            max: core::array::from_fn(|a| {
                                if d[a] == 0 { mid[a].clone() } else { c.max[a].clone() }
                            }),
                        });
                    }
                }
            }
        }
        self.cells = kept;
        self.run_refinement_fixpoint()
    }

    /// Splits blending pairs until every piece's windows match its re-trace,
    /// then groups co-window pieces, summing weights.
    pub(crate) fn run_refinement_fixpoint(&mut self) -> Result<RefinementLog, GridError> {
        #[derive(Clone)]
        struct Piece {
            windows: [RatKnots5; 3],
            weight: Rat,
            payload: Vec<f64>,
            kind: PointKind,
        }
        let mut log = RefinementLog { events: Vec::new(), seed_pieces: self.points.len() };
        let mut arena: Vec<Option<Piece>> = self
            .points
            .drain(..)
            .map(|p| {
                Some(Piece { windows: p.windows, weight: p.weight, payload: p.payload, kind: p.kind })
            })
            .collect();
        let mut queue: VecDeque<usize> = (0..arena.len()).collect();
        let mut done: Vec<usize> = Vec::new();
        while let Some(id) = queue.pop_front() {
            let piece = arena[id].clone().expect("piece alive");
            let target = self.retrace_windows(&piece.windows);
            let mut split_at: Option<(usize, Rat)> = None;
            'axes: for a in 0..3 {
                if piece.windows[a] == target[a] {
                    continue;
                }
                // First knot of the re-trace missing from the current window
                // (multiset difference, smallest first). Only knots strictly
                // inside the current span refine the blending function; the
                // ray may legitimately see a coarser window than a piece
                // already narrowed by earlier splits.
                let mut have: Vec<&Rat> = piece.windows[a].iter().collect();
                for k in target[a].iter() {
                    if let Some(pos) = have.iter().position(|h| *h == k) {
                        have.remove(pos);
                    } else if piece.windows[a][0] < *k && *k < piece.windows[a][4] {
                        split_at = Some((a, k.clone()));
                        break 'axes;
                    }
                }
            }
            let Some((axis, k)) = split_at else {
                done.push(id);
                continue;
            };
            let s = split_basis_rat(&piece.windows[axis], &k)
                .expect("re-traced knot lies inside the window span");
            arena[id] = None;
            let mut children = [None, None];
            for (slot, (c, w)) in
                [(s.c1.clone(), s.knots1.clone()), (s.c2.clone(), s.knots2.clone())].into_iter().enumerate()
            {
                if c.is_zero() || w[0] == w[4] {
                    continue;
                }
                let mut windows = piece.windows.clone();
                windows[axis] = w;
                let child = Piece {
                    windows,
                    weight: &piece.weight * &c,
                    payload: piece.payload.clone(),
                    kind: piece.kind,
                };
                let cid = arena.len();
                arena.push(Some(child));
                queue.push_back(cid);
                children[slot] = Some(cid);
            }
            log.events.push(RefinementEvent { piece: id, axis, knot: k, c1: s.c1, c2: s.c2, children });
        }
        // Collect pieces sharing identical windows into one control point.
        let mut groups: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for &id in &done {
            let p = arena[id].as_ref().unwrap();
            groups.entry(window_key(&p.windows)).or_default().push(id);
        }
        for ids in groups.values() {
            let mut weight = Rat::zero();
            let mut payload: Vec<f64> = Vec::new();
            let mut dim: Option<usize> = None;
            let mut kind = PointKind::Interior;
            for &id in ids {
                let p = arena[id].as_ref().unwrap();
                match dim {
                    None => {
                        dim = Some(p.payload.len());
                        payload = vec![0.0; p.payload.len()];
                    }
                    Some(d) if d != p.payload.len() => return Err(GridError::PayloadDim),
                    _ => {}
                }
                let wf = to_f64(&p.weight);
                for (acc, x) in payload.iter_mut().zip(&p.payload) {
                    *acc += wf * x;
                }
                weight += &p.weight;
                if p.kind == PointKind::BdControlPoint || kind == PointKind::Interior {
                    if p.kind != PointKind::Interior {
                        kind = p.kind;
                    }
                }
            }
            let wf = to_f64(&weight);
            if wf != 0.0 {
                for x in payload.iter_mut() {
                    *x /= wf;
                }
            }
            let windows = arena[ids[0]].as_ref().unwrap().windows.clone();
            self.points.push(ControlPoint::new(windows, weight, payload, kind));
        }
        Ok(log)
    }

    /// Proposition 2/3 machinery: interior-only refinement leaves the grid
    /// unchanged; refinement touching the modification zone subdivides every
    /// boundary cell of the face in lockstep. Afterwards every To-be-merged
    /// weight is audited to be exactly 1.
    pub fn enforce_boundary_requirement(
        &mut self,
        face: DomainFace,
        new_cells: &[usize],
    ) -> Result<bool, GridError> {
        let zone = self.modification_zone(face)?;
        let touched = new_cells.iter().any(|c| zone.contains(c));
        if touched {
            for _ in 0..8 {
                self.equalize_boundary_depth(face)?;
                if self.to_be_merged_weights_ok(face)? {
                    break;
                }
                let bc = self.boundary_cells(face);
                self.subdivide_cells(&bc)?;
            }
        }
        for idx in self.to_be_merged(face)? {
            if self.points[idx].weight != ri(1) {
                return Err(GridError::BoundaryRequirement(
                    idx,
                    crate::rat::format_rat(&self.points[idx].weight),
                ));
            }
        }
        Ok(touched)
    }

    fn to_be_merged_weights_ok(&self, face: DomainFace) -> Result<bool, GridError> {
        Ok(self
            .to_be_merged(face)?
            .iter()
            .all(|&i| self.points[i].weight == ri(1)))
    }

    /// Brings every boundary cell of the face to the same depth along the
    /// face normal (the lockstep part of the Prop-3 subdivision).
    fn equalize_boundary_depth(&mut self, face: DomainFace) -> Result<(), GridError> {
        loop {
            let bc = self.boundary_cells(face);
            let span = |i: &usize| &self.cells[*i].max[face.axis] - &self.cells[*i].min[face.axis];
            let dmin = bc.iter().map(span).min().ok_or(GridError::BadFace)?;
            let coarse: Vec<usize> = bc.into_iter().filter(|i| span(i) > dmin).collect();
            if coarse.is_empty() {
                return Ok(());
            }
            self.subdivide_cells(&coarse)?;
        }
    }

    /// Exhaustive tiling audit: cells cover the knot box with no overlap.
    pub fn cells_tile_domain(&self) -> bool {
        let (lo, hi) = self.domain_box();
        let mut vol = Rat::zero();
        for c in &self.cells {
            let mut v = ri(1);
            for a in 0..3 {
                if c.min[a] >= c.max[a] {
                    return false;
                }
                v *= &c.max[a] - &c.min[a];
            }
            vol += v;
        }
        let mut total = ri(1);
        for a in 0..3 {
            total *= &hi[a] - &lo[a];
        }
        if vol != total {
            return false;
        }
        for (i, a) in self.cells.iter().enumerate() {
            for b in self.cells.iter().skip(i + 1) {
                let overlap = (0..3).all(|ax| a.min[ax] < b.max[ax] && b.min[ax] < a.max[ax]);
                if overlap {
                    return false;
                }
            }
        }
        true
    }
}

fn other_axes(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

pub fn window_key(w: &[RatKnots5; 3]) -> String {
    let mut s = String::new();
    for axis in w {
        for k in axis {
            s.push_str(&crate::rat::format_rat(k));
            s.push(',');
        }
        s.push(';');
    }
    s
}

/// Replays a refinement log against a pre-refinement point set and returns
/// the grouped (windows -> weight) blending set it produces.
pub fn replay_log(points: &[ControlPoint], log: &RefinementLog) -> HashMap<String, Rat> {
    #[derive(Clone)]
    struct P {
        windows: [RatKnots5; 3],
        weight: Rat,
    }
    assert_eq!(points.len(), log.seed_pieces);
    let mut arena: Vec<Option<P>> = points
        .iter()
        .map(|p| Some(P { windows: p.windows.clone(), weight: p.weight.clone() }))
        .collect();
    for ev in &log.events {
        let p = arena[ev.piece].clone().expect("piece alive in replay");
        arena[ev.piece] = None;
        let s = split_basis_rat(&p.windows[ev.axis], &ev.knot).expect("replayed split valid");
        for (slot, (c, w)) in [(s.c1, s.knots1), (s.c2, s.knots2)].into_iter().enumerate() {
            if let Some(cid) = ev.children[slot] {
                let mut windows = p.windows.clone();
                windows[ev.axis] = w;
                let child = P { windows, weight: &p.weight * &c };
                assert_eq!(cid, arena.len(), "log child ids are allocation order");
                arena.push(Some(child));
            }
        }
    }
    let mut out: HashMap<String, Rat> = HashMap::new();
    for p in arena.into_iter().flatten() {
        *out.entry(window_key(&p.windows)).or_insert_with(Rat::zero) += p.weight;
    }
    out.retain(|_, w| !w.is_zero());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspline::{eval_basis, KnotVector5};
    use crate::rat::rat;

    fn ints(v: &[i64]) -> Vec<Rat> {
        v.iter().map(|&x| ri(x)).collect()
    }

    fn unit_grid(n: i64) -> ControlGrid {
        let s: Vec<Rat> = (0..=n).map(ri).collect();
        ControlGrid::build_regular([s.clone(), s.clone(), s]).unwrap()
    }

    fn blend_sum(grid: &ControlGrid, u: f64, v: f64, w: f64) -> f64 {
        grid.points
            .iter()
            .map(|p| {
                to_f64(&p.weight)
                    * eval_basis(&KnotVector5(p.windows_f64[0]), u).unwrap()
                    * eval_basis(&KnotVector5(p.windows_f64[1]), v).unwrap()
                    * eval_basis(&KnotVector5(p.windows_f64[2]), w).unwrap()
            })
            .sum()
    }

    #[test]
    fn regular_grid_counts() {
        let g = unit_grid(1);
        assert_eq!(g.cells.len(), 1);
        assert_eq!(g.points.len(), 8);
        let g = unit_grid(2);
        assert_eq!(g.cells.len(), 8);
        assert_eq!(g.points.len(), 27);
        let g = ControlGrid::build_regular([ints(&[0, 1]), ints(&[0, 1, 2]), ints(&[0, 1])])
            .unwrap();
        assert_eq!(g.cells.len(), 2);
        assert_eq!(g.points.len(), 12);
    }

    #[test]
    fn non_ascending_rejected() {
        assert!(ControlGrid::build_regular([ints(&[0, 0]), ints(&[0, 1]), ints(&[0, 1])]).is_err());
        assert!(ControlGrid::build_regular([ints(&[1]), ints(&[0, 1]), ints(&[0, 1])]).is_err());
    }

    #[test]
    fn trace_on_regular_grid_matches_consecutive_knots() {
        let g = unit_grid(4);
        let w = g.trace_knots(&[ri(2), ri(2), ri(2)], 0).unwrap();
        assert_eq!(w, [ri(0), ri(1), ri(2), ri(3), ri(4)]);
        // Open boundary: ghost extension beyond the ends.
        let w = g.trace_knots(&[ri(4), ri(2), ri(2)], 0).unwrap();
        assert_eq!(w, [ri(2), ri(3), ri(4), ri(5), ri(6)]);
        assert!(g.trace_knots(&[rat(1, 2), ri(2), ri(2)], 0).is_err());
    }

    #[test]
    fn boundary_layer_counts_and_windows() {
        let mut g = unit_grid(2);
        let interior_before = g.points.len();
        g.add_boundary_layer().unwrap();
        // 27 vertices: 8 corners (+7 each), 12 edge (+3), 6 face (+1), 1 interior (+0).
        assert_eq!(g.points.len(), interior_before + 8 * 7 + 12 * 3 + 6);
        assert!(g.add_boundary_layer().is_err());
        // 1D pattern: the end anchor carries [0,1,2,2,2] and the bd point [1,2,2,2,2].
        let w = g.trace_knots(&[ri(2), ri(1), ri(1)], 0).unwrap();
        assert_eq!(w, [ri(0), ri(1), ri(2), ri(2), ri(2)]);
        let corner: Vec<_> = g
            .points
            .iter()
            .filter(|p| p.anchor == [ri(0), ri(0), ri(0)])
            .collect();
        assert_eq!(corner.len(), 8);
    }

    #[test]
    fn layered_grid_has_partition_of_unity() {
        let mut g = unit_grid(3);
        g.add_boundary_layer().unwrap();
        for (u, v, w) in [(0.0, 0.0, 0.0), (0.5, 1.7, 2.3), (3.0, 3.0, 3.0), (1.0, 2.0, 0.25)] {
            let s = blend_sum(&g, u, v, w);
            assert!((s - 1.0).abs() < 1e-12, "sum at ({u},{v},{w}) = {s}");
        }
    }

    #[test]
    fn boundary_parameters_see_only_bd_points() {
        let mut g = unit_grid(2);
        g.add_boundary_layer().unwrap();
        for p in &g.points {
            let b = eval_basis(&KnotVector5(p.windows_f64[0]), 0.0).unwrap()
                * eval_basis(&KnotVector5(p.windows_f64[1]), 1.0).unwrap()
                * eval_basis(&KnotVector5(p.windows_f64[2]), 1.3).unwrap();
            if b.abs() > 1e-14 {
                assert_eq!(p.kind, PointKind::BdControlPoint);
            }
        }
    }

    #[test]
    fn subdivide_all_cells_of_unit_grid_keeps_weights_one() {
        let mut g = unit_grid(1);
        g.add_boundary_layer().unwrap();
        let ids: Vec<usize> = (0..g.cells.len()).collect();
        g.subdivide_cells(&ids).unwrap();
        assert_eq!(g.cells.len(), 8);
        assert!(g.cells_tile_domain());
        for p in &g.points {
            assert_eq!(p.weight, ri(1), "anchor {:?}", p.anchor);
        }
        for (u, v, w) in [(0.1, 0.9, 0.5), (0.5, 0.5, 0.5), (1.0, 0.0, 0.7)] {
            assert!((blend_sum(&g, u, v, w) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn corner_cell_subdivision_preserves_blend_sum() {
        let mut g = unit_grid(2);
        g.add_boundary_layer().unwrap();
        let corner = g
            .cells
            .iter()
            .position(|c| c.min == [ri(0), ri(0), ri(0)])
            .unwrap();
        let before: Vec<f64> = sample_params()
            .iter()
            .map(|&(u, v, w)| blend_sum(&g, u, v, w))
            .collect();
        let log = g.subdivide_cells(&[corner]).unwrap();
        assert!(!log.events.is_empty());
        assert!(g.cells_tile_domain());
        let after: Vec<f64> = sample_params()
            .iter()
            .map(|&(u, v, w)| blend_sum(&g, u, v, w))
            .collect();
        for (b, a) in before.iter().zip(&after) {
            assert!((b - a).abs() < 1e-12);
        }
        // T-junction vertices appeared; the traced knot vector of a point
        // beside the subdivided cell picks up the inserted mid-knot.
        let w = g
            .trace_knots(&[rat(1, 2), rat(1, 2), rat(1, 2)], 0)
            .unwrap();
        assert_eq!(w[3], ri(1));
    }

    #[test]
    fn empty_subdivision_is_noop() {
        let mut g = unit_grid(2);
        g.add_boundary_layer().unwrap();
        let n = g.points.len();
        let log = g.subdivide_cells(&[]).unwrap();
        assert!(log.events.is_empty());
        assert_eq!(g.points.len(), n);
    }

    #[test]
    fn refinement_log_replays_exactly() {
        let mut g = unit_grid(2);
        g.add_boundary_layer().unwrap();
        let seed = g.points.clone();
        let log = g.subdivide_cells(&[0]).unwrap();
        let replayed = replay_log(&seed, &log);
        let mut actual: HashMap<String, Rat> = HashMap::new();
        for p in &g.points {
            *actual.entry(window_key(&p.windows)).or_insert_with(Rat::zero) += p.weight.clone();
        }
        assert_eq!(replayed, actual);
    }

    #[test]
    fn modification_zone_is_two_layers_on_fresh_grid() {
        let mut g = unit_grid(4);
        g.add_boundary_layer().unwrap();
        let face = DomainFace { axis: 0, max_side: true };
        let zone = g.modification_zone(face).unwrap();
        // Cells with min u >= 2 are within two layers of u=4 on a 4-cell axis.
        for id in &zone {
            assert!(g.cells[*id].min[0] >= ri(2));
        }
        assert_eq!(zone.len(), 2 * 16);
        // A 1-cell grid is entirely in the zone.
        let mut g1 = unit_grid(1);
        g1.add_boundary_layer().unwrap();
        assert_eq!(g1.modification_zone(face).unwrap().len(), 1);
    }

    #[test]
    fn enforce_boundary_requirement_props() {
        let face = DomainFace { axis: 0, max_side: true };
        // Interior-only refinement: unchanged (Prop 2).
        let mut g = unit_grid(4);
        g.add_boundary_layer().unwrap();
        let interior = g
            .cells
            .iter()
            .position(|c| c.min == [ri(1), ri(1), ri(1)])
            .unwrap();
        g.subdivide_cells(&[interior]).unwrap();
        let cells_before = g.cells.len();
        let changed = g.enforce_boundary_requirement(face, &[interior]).unwrap();
        assert!(!changed);
        assert_eq!(g.cells.len(), cells_before);
        // Refinement in the zone: all boundary cells split, weights exactly 1 (Props 1+3).
        let mut g = unit_grid(4);
        g.add_boundary_layer().unwrap();
        let zone_cell = g
            .cells
            .iter()
            .position(|c| c.max[0] == ri(4) && c.min[1] == ri(1) && c.min[2] == ri(1))
            .unwrap();
        g.subdivide_cells(&[zone_cell]).unwrap();
        let new_ids: Vec<usize> = (0..g.cells.len())
            .filter(|&i| g.cells[i].max[0] == ri(4) || g.cells[i].min[0] >= ri(3))
            .filter(|&i| &g.cells[i].max[0] - &g.cells[i].min[0] == rat(1, 2))
            .collect();
        let changed = g.enforce_boundary_requirement(face, &new_ids).unwrap();
        assert!(changed);
        // Idempotent on repeat with no new cells.
        let changed = g.enforce_boundary_requirement(face, &[]).unwrap();
        assert!(!changed);
    }

    fn sample_params() -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let mut x = 0.137f64;
        for _ in 0..40 {
            // Cheap deterministic low-discrepancy-ish samples in [0,2]^3.
            let a = x;
            x = (x * 733.0 + 0.217).fract();
            let b = x;
            x = (x * 733.0 + 0.217).fract();
            let c = x;
            x = (x * 733.0 + 0.217).fract();
            out.push((2.0 * a, 2.0 * b, 2.0 * c));
        }
        out
    }
}
