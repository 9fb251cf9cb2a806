//! Merging of component splines: interface harmonization, two-cube merging,
//! and the typed merges that confine central points with designed bd-knots.
//!
//! The weight tables for the typed merges are derived, not assumed: a local
//! standard grid (all weights 1, auxiliary points completing the cube) has
//! the pattern's bd-knots inserted, the knot-insertion fixpoint recomputes
//! every blending weight exactly, and the accumulated per-slot rationals are
//! the table. `lookup_weights` carries the same numbers as constants for the
//! uniform-interval fast path.

use crate::bspline::{split_basis_rat, RatKnots5};
use crate::control_grid::{window_key, ControlPoint, PointKind};
use crate::rat::{format_rat, ri, Rat};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MergeError {
    #[error("unsupported merge pattern")]
    UnsupportedPattern,
    #[error("knot intervals must be positive")]
    BadIntervals,
    #[error("refinement fixpoint exceeded its iteration bound")]
    FixpointDiverged,
    #[error("weight lookup requires uniform knot intervals")]
    NonUniformIntervals,
    #[error("interface grids differ; run harmonize_interface first")]
    UnharmonizedInterface,
    #[error("boundary requirement violated before merging: {0}")]
    BoundaryRequirement(String),
    #[error("interface spec invalid: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Grid(#[from] crate::control_grid::GridError),
    #[error(transparent)]
    Eval(#[from] crate::spline_eval::EvalError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MergePattern {
    TwoCube,
    Type1,
    Type2,
    Type3,
    Type4,
}

/// One designed bd-knot wall: multiplicity-3 knots on the plane
/// `axis = plane_idx` (in knot-plane lattice indices, 0 = the central
/// plane), over a closed rectangle of the other two axes given in lattice
/// indices (sentinels `RANGE_INF` for unbounded sides).
#[derive(Debug, Clone)]
pub struct WallSpec {
    pub axis: usize,
    pub plane_idx: i32,
    /// Ranges of the other two axes in ascending axis order.
    pub ranges: [(i32, i32); 2],
}

pub const RANGE_INF: i32 = 1000;

/// Axis-aligned box of the void region, in lattice indices.
#[derive(Debug, Clone)]
pub struct VoidBox(pub [(i32, i32); 3]);

/// Geometry template for one merging pattern, in the pattern's local frame:
/// the void region around the central point, and the designed bd-knot walls.
/// The layout block maps local window classes onto the printed 27-slot
/// index table.
#[derive(Debug, Clone)]
pub struct PatternSpec {
    pub void_boxes: Vec<VoidBox>,
    pub walls: Vec<WallSpec>,
    /// Layout axes: which local axis runs along columns / slabs / rows.
    pub layout_axes: [usize; 3],
    /// Per layout direction, window class at positions 1..3 (0=L,1=C,2=R).
    pub layout_orders: [[u8; 3]; 3],
    /// True for line patterns (one axis regular; companion row emitted).
    pub line_pattern: bool,
    /// Rays of one-sided windows are cast from the support side when set.
    pub side_aware: bool,
    /// 0-based printed indices that the table leaves dashed.
    pub dashes: Vec<usize>,
}

/// Window class of an origin-anchored piece along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WinClass {
    L,
    C,
    R,
    Plain,
}

pub fn classify_window(w: &RatKnots5) -> WinClass {
    let c = &w[2];
    let l = w[1] == *c;
    let r = w[3] == *c;
    match (l, r) {
        (true, true) => WinClass::C,
        (false, true) if w[4] == *c => WinClass::L,
        (true, false) if w[0] == *c => WinClass::R,
        _ => WinClass::Plain,
    }
}

/// 3x3x3 grid of exact weights in the printed index layout (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    pub slots: [Option<Rat>; 27],
    /// Parenthesized companion entries (Type-1's second distribution).
    pub companion: [Option<Rat>; 27],
}

impl WeightTable {
    pub fn empty() -> Self {
        WeightTable {
            slots: core::array::from_fn(|_| None),
            companion: core::array::from_fn(|_| None),
        }
    }

    /// Renders the table in the printed three-row layout.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for row in 1..=3usize {
            let mut line = Vec::new();
            for slab in 1..=3usize {
                for col in 1..=3usize {
                    let idx = layout_index(col, slab, row);
                    let cell = match (&self.slots[idx], &self.companion[idx]) {
                        (Some(v), _) => format_rat(v),
                        (None, Some(v)) => format!("({})", format_rat(v)),
                        (None, None) => "-".to_string(),
                    };
                    line.push(cell);
                }
                if slab < 3 {
                    line.push("|".to_string());
                }
            }
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// 0-based index of a layout position (col, slab, row), all 1-based,
/// matching the printed table: row 1 is the top line.
pub fn layout_index(col: usize, slab: usize, row: usize) -> usize {
    9 * (slab - 1) + 3 * (3 - row) + (col - 1)
}

/// Per-axis knot intervals around the central plane: [d_-2, d_-1, d_+1, d_+2].
#[derive(Debug, Clone)]
pub struct LocalIntervals(pub [[Rat; 4]; 3]);

impl LocalIntervals {
    pub fn uniform() -> Self {
        LocalIntervals(core::array::from_fn(|_| core::array::from_fn(|_| ri(1))))
    }

    pub fn is_uniform(&self) -> bool {
        self.0
            .iter()
            .flat_map(|a| a.iter())
            .all(|d| *d == self.0[0][0])
    }
}

fn sign_compatible(anchor_sign: i8, span_sign: i8) -> bool {
    anchor_sign == 0 || anchor_sign == span_sign
}

/// A blending piece of the local neighborhood refinement, with provenance of
/// the initial standard-grid anchor it came from.
#[derive(Debug, Clone)]
pub struct MergePiece {
    pub windows: [RatKnots5; 3],
    pub weight: Rat,
    pub origins: Vec<([i8; 3], Rat)>,
}

/// The fully refined local neighborhood around a central point.
#[derive(Debug)]
pub struct RefinedNeighborhood {
    pub pieces: Vec<MergePiece>,
    pub planes: [Vec<Rat>; 3],
}

impl RefinedNeighborhood {
    /// Weight of each origin-anchored slot, keyed by window class triple.
    pub fn slot_weights(&self) -> BTreeMap<String, (([WinClass; 3]), Rat)> {
        let mut out = BTreeMap::new();
        for p in &self.pieces {
            if (0..3).all(|a| p.windows[a][2].is_zero()) {
                let cls: [WinClass; 3] = core::array::from_fn(|a| classify_window(&p.windows[a]));
                let key = format!("{:?}", cls);
                out.entry(key)
                    .and_modify(|e: &mut ([WinClass; 3], Rat)| e.1 += &p.weight)
                    .or_insert((cls, p.weight.clone()));
            }
        }
        out
    }
}

/// Builds the local standard grid for a pattern (anchors -2..2 per axis, all
/// weights 1, auxiliary points included), inserts the designed bd-knots, and
/// runs the refinement fixpoint exactly.
pub fn refine_local_neighborhood(
    spec: &PatternSpec,
    intervals: &LocalIntervals,
) -> Result<RefinedNeighborhood, MergeError> {
    if intervals
        .0
        .iter()
        .flat_map(|a| a.iter())
        .any(|d| !d.is_positive())
    {
        return Err(MergeError::BadIntervals);
    }
    // Plane coordinates -4..4 per axis; outer spacings repeat.
    let planes: [Vec<Rat>; 3] = core::array::from_fn(|a| {
        let d = &intervals.0[a];
        let mut p = Vec::with_capacity(9);
        p.push(-(&d[1] + &d[0]) - &d[0] - &d[0]);
        p.push(-(&d[1] + &d[0]) - &d[0]);
        p.push(-(&d[1] + &d[0]));
        p.push(-d[1].clone());
        p.push(Rat::zero());
        p.push(d[2].clone());
        p.push(&d[2] + &d[3]);
        p.push(&d[2] + &d[3] + &d[3]);
        p.push(&d[2] + &d[3] + &d[3] + &d[3]);
        p
    });
    let window_at = |a: usize, i: usize| -> RatKnots5 {
        core::array::from_fn(|k| planes[a][i - 2 + k].clone())
    };
    let mut arena: Vec<Option<MergePiece>> = Vec::new();
    for i in 2..7 {
        for j in 2..7 {
            for k in 2..7 {
                let origin = [(i as i8) - 4, (j as i8) - 4, (k as i8) - 4];
                arena.push(Some(MergePiece {
                    windows: [window_at(0, i), window_at(1, j), window_at(2, k)],
                    weight: ri(1),
                    origins: vec![(origin, ri(1))],
                }));
            }
        }
    }
    let lattice_value = |axis: usize, idx: i32| -> Option<&Rat> {
        if idx <= -RANGE_INF {
            return None;
        }
        if idx >= RANGE_INF {
            return None;
        }
        planes[axis].get((idx + 4) as usize)
    };
    // Knot line along `axis` for a piece whose ray passes at the given
    // coordinates: base planes, plus each visible wall's plane raised to
    // multiplicity 3. The ray is cast from the piece's support side: a
    // one-sided window shifts its ray infinitesimally toward its support
    // (side -1/+1), so range bounds become half-open on that side.
    let line_for = |axis: usize, anchors: &[Rat; 3], sides: &[i8; 3]| -> Vec<Rat> {
        let (o1, o2) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let mut line = planes[axis].clone();
        let mut wall_planes: Vec<Rat> = Vec::new();
        for wall in &spec.walls {
            if wall.axis != axis {
                continue;
            }
            let in_range = |o: usize, r: (i32, i32)| -> bool {
                let v = &anchors[o];
                let s = sides[o];
                let lo_ok = r.0 <= -RANGE_INF
                    || lattice_value(o, r.0)
                        .map(|b| if s < 0 { *b < *v } else { *b <= *v })
                        .unwrap_or(false);
                let hi_ok = r.1 >= RANGE_INF
                    || lattice_value(o, r.1)
                        .map(|b| if s > 0 { *v < *b } else { *v <= *b })
                        .unwrap_or(false);
                lo_ok && hi_ok
            };
            if in_range(o1, wall.ranges[0]) && in_range(o2, wall.ranges[1]) {
                if let Some(p) = lattice_value(axis, wall.plane_idx) {
                    if !wall_planes.contains(p) {
                        wall_planes.push(p.clone());
                    }
                }
            }
        }
        if !wall_planes.is_empty() {
            for p in wall_planes {
                line.push(p.clone());
                line.push(p);
            }
            line.sort();
        }
        line
    };
    let side_of = |w: &RatKnots5| -> i8 {
        if !spec.side_aware {
            return 0;
        }
        if w[0] == w[2] {
            1
        } else if w[4] == w[2] {
            -1
        } else {
            0
        }
    };
    // A window is conformal when the knot line implied by its ray contains
    // no knots strictly inside its span that the window is missing
    // (multiset completion; wall knots count with multiplicity 3).
    let missing_knot = |windows: &[RatKnots5; 3]| -> Option<(usize, Rat)> {
        let anchors: [Rat; 3] = core::array::from_fn(|a| windows[a][2].clone());
        let sides: [i8; 3] = core::array::from_fn(|a| side_of(&windows[a]));
        for a in 0..3 {
            let w = &windows[a];
            let mut need: Vec<Rat> = line_for(a, &anchors, &sides)
                .into_iter()
                .filter(|k| w[0] < *k && *k < w[4])
                .collect();
            for e in w.iter() {
                if w[0] < *e && *e < w[4] {
                    if let Some(pos) = need.iter().position(|k| k == e) {
                        need.remove(pos);
                    }
                }
            }
            if let Some(k) = need.first() {
                return Some((a, k.clone()));
            }
        }
        None
    };
    let mut queue: VecDeque<usize> = (0..arena.len()).collect();
    let mut done = Vec::new();
    let mut steps = 0usize;
    while let Some(id) = queue.pop_front() {
        steps += 1;
        if steps > 2_000_000 {
            return Err(MergeError::FixpointDiverged);
        }
        let piece = arena[id].clone().expect("piece alive");
        let Some((axis, k)) = missing_knot(&piece.windows) else {
            done.push(id);
            continue;
        };
        let s = split_basis_rat(&piece.windows[axis], &k).expect("split knot within span");
        arena[id] = None;
        for (c, w) in [(s.c1, s.knots1), (s.c2, s.knots2)] {
            if c.is_zero() || w[0] == w[4] {
                continue;
            }
            let mut windows = piece.windows.clone();
            windows[axis] = w;
            let origins = piece
                .origins
                .iter()
                .map(|(o, wt)| (*o, wt * &c))
                .collect();
            let cid = arena.len();
            arena.push(Some(MergePiece { windows, weight: &piece.weight * &c, origins }));
            queue.push_back(cid);
        }
    }
    // Group pieces with identical windows.
    let mut groups: BTreeMap<String, MergePiece> = BTreeMap::new();
    for id in done {
        let p = arena[id].take().unwrap();
        groups
            .entry(window_key(&p.windows))
            .and_modify(|g| {
                g.weight += &p.weight;
                for (o, wt) in &p.origins {
                    if let Some(e) = g.origins.iter_mut().find(|(go, _)| go == o) {
                        e.1 += wt;
                    } else {
                        g.origins.push((*o, wt.clone()));
                    }
                }
            })
            .or_insert(p);
    }
    Ok(RefinedNeighborhood { pieces: groups.into_values().collect(), planes })
}

/// True when an open box in lattice coordinates lies entirely inside the
/// void region (checked on the unit lattice cells the box overlaps).
pub fn lattice_box_in_void(spec: &PatternSpec, lo: [i32; 3], hi: [i32; 3]) -> bool {
    let clamp = |x: i32| x.clamp(-4, 4);
    for cu in clamp(lo[0])..clamp(hi[0]) {
        for cv in clamp(lo[1])..clamp(hi[1]) {
            for cw in clamp(lo[2])..clamp(hi[2]) {
                let cell = [cu, cv, cw];
                let covered = spec.void_boxes.iter().any(|b| {
                    (0..3).all(|a| b.0[a].0 <= cell[a] && cell[a] + 1 <= b.0[a].1)
                });
                if !covered {
                    return false;
                }
            }
        }
    }
    true
}

/// Support box of a piece in lattice coordinates (planes are the lattice).
pub fn piece_lattice_support(
    planes: &[Vec<Rat>; 3],
    windows: &[RatKnots5; 3],
) -> Option<([i32; 3], [i32; 3])> {
    let find = |axis: usize, v: &Rat| -> Option<i32> {
        planes[axis].iter().position(|p| p == v).map(|i| i as i32 - 4)
    };
    let mut lo = [0i32; 3];
    let mut hi = [0i32; 3];
    for a in 0..3 {
        lo[a] = find(a, &windows[a][0])?;
        hi[a] = find(a, &windows[a][4])?;
    }
    Some((lo, hi))
}

/// Maps a window-class triple to its printed layout index under the spec's
/// orientation; None when a class does not appear in the layout direction.
pub fn layout_slot_index(spec: &PatternSpec, cls: &[WinClass; 3]) -> Option<usize> {
    let mut pos = [0usize; 3]; // (col, slab, row)
    for dir in 0..3 {
        let axis = spec.layout_axes[dir];
        let want = cls[axis];
        let order = spec.layout_orders[dir];
        let want_code = match want {
            WinClass::L => 0u8,
            WinClass::C | WinClass::Plain => 1,
            WinClass::R => 2,
        };
        let p = order.iter().position(|&o| o == want_code)?;
        pos[dir] = p + 1;
    }
    Some(layout_index(pos[0], pos[1], pos[2]))
}

/// Derives the merge weight table by exact local refinement.
pub fn compute_merge_weights(
    pattern: MergePattern,
    intervals: &LocalIntervals,
) -> Result<WeightTable, MergeError> {
    let spec = pattern_spec(pattern)?;
    let refined = refine_local_neighborhood(&spec, intervals)?;
    let mut out = WeightTable::empty();
    for (_, (cls, weight)) in refined.slot_weights() {
        if let Some(idx) = layout_slot_index(&spec, &cls) {
            if spec.dashes.contains(&idx) {
                continue;
            }
            if out.slots[idx].is_some() {
                return Err(MergeError::BadSpec(format!(
                    "layout collision at printed slot {}",
                    idx + 1
                )));
            }
            out.slots[idx] = Some(weight.clone());
            if spec.line_pattern {
                // The dot variant re-uses the same distribution one layout
                // row down (the second boundary window along the line axis).
                let row = 3 - (idx % 9) / 3;
                let (slab, col) = (idx / 9 + 1, idx % 3 + 1);
                if row == 2 {
                    let cidx = layout_index(col, slab, 3);
                    if !spec.dashes.contains(&cidx) {
                        out.companion[cidx] = Some(weight);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// The printed look-up tables as exact constants (uniform intervals only).
pub fn lookup_weights(pattern: MergePattern) -> Result<WeightTable, MergeError> {
    let rows: [[&str; 9]; 3] = match pattern {
        MergePattern::Type1 => [
            ["-", "-", "-", "-", "-", "-", "-", "-", "-"],
            ["1", "1", "-", "17/18", "35/36", "1", "8/9", "17/18", "1"],
            ["(1)", "(1)", "-", "(17/18)", "(35/36)", "(1)", "(8/9)", "(17/18)", "(1)"],
        ],
        MergePattern::Type2 => [
            ["20/27", "53/54", "1", "53/54", "107/108", "1", "1", "1", "-"],
            ["53/54", "107/108", "1", "107/108", "209/216", "17/18", "1", "1", "-"],
            ["1", "1", "1", "1", "17/18", "8/9", "-", "-", "-"],
        ],
        MergePattern::Type3 => [
            ["20/27", "22/27", "8/9", "22/27", "95/108", "17/18", "8/9", "17/18", "1"],
            ["22/27", "95/108", "17/18", "95/108", "25/27", "35/36", "17/18", "35/36", "1"],
            ["8/9", "17/18", "1", "17/18", "35/36", "1", "1", "1", "-"],
        ],
        MergePattern::Type4 => [
            ["26/27", "53/54", "1", "53/54", "107/108", "1", "1", "1", "-"],
            ["53/54", "107/108", "1", "107/108", "215/216", "1", "1", "1", "-"],
            ["1", "1", "-", "1", "1", "1", "-", "-", "-"],
        ],
        MergePattern::TwoCube => return Err(MergeError::UnsupportedPattern),
    };
    let mut out = WeightTable::empty();
    for (r, row) in rows.iter().enumerate() {
        for (c9, cell) in row.iter().enumerate() {
            let (slab, col) = (c9 / 3 + 1, c9 % 3 + 1);
            let idx = layout_index(col, slab, r + 1);
            if *cell == "-" {
                continue;
            }
            if let Some(stripped) = cell.strip_prefix('(') {
                let v = crate::rat::parse_rat(stripped.trim_end_matches(')')).unwrap();
                out.companion[idx] = Some(v);
            } else {
                out.slots[idx] = Some(crate::rat::parse_rat(cell).unwrap());
            }
        }
    }
    Ok(out)
}

const INF: i32 = RANGE_INF;

/// Slots the printed table leaves dashed: neither value nor companion.
fn dashes_from_printed(pattern: MergePattern) -> Vec<usize> {
    let t = lookup_weights(pattern).expect("printed table");
    (0..27)
        .filter(|&i| t.slots[i].is_none() && t.companion[i].is_none())
        .collect()
}

/// Pattern geometry; the void region and designed walls reproduce the
/// printed tables exactly (pinned by the oracle-equality acceptance test).
pub fn pattern_spec(pattern: MergePattern) -> Result<PatternSpec, MergeError> {
    match pattern {
        // Three cuboids around a concave edge (the edge runs along w); the
        // quadrant u>0, v<0 is void.
        MergePattern::Type1 => Ok(PatternSpec {
            void_boxes: vec![VoidBox([(0, INF), (-INF, 0), (-INF, INF)])],
            walls: vec![
                WallSpec { axis: 0, plane_idx: 0, ranges: [(-INF, 0), (-INF, INF)] },
                WallSpec { axis: 1, plane_idx: 0, ranges: [(0, INF), (-INF, INF)] },
            ],
            layout_axes: [0, 1, 2],
            layout_orders: [[0, 1, 2], [0, 1, 2], [0, 1, 2]],
            line_pattern: true,
            side_aware: false,
            dashes: dashes_from_printed(MergePattern::Type1),
        }),
        // Corner of a one-cell-wide branch standing on a half-space: the
        // branch occupies the lattice cell u,v in (-1,0), w > 0.
        MergePattern::Type2 => Ok(PatternSpec {
            void_boxes: vec![
                VoidBox([(0, INF), (-INF, INF), (0, INF)]),
                VoidBox([(-INF, -1), (-INF, INF), (0, INF)]),
                VoidBox([(-1, 0), (0, INF), (0, INF)]),
                VoidBox([(-1, 0), (-INF, -1), (0, INF)]),
            ],
            walls: vec![
                WallSpec { axis: 0, plane_idx: 0, ranges: [(-1, 0), (0, INF)] },
                WallSpec { axis: 0, plane_idx: -1, ranges: [(-1, 0), (0, INF)] },
                WallSpec { axis: 1, plane_idx: 0, ranges: [(-1, 0), (0, INF)] },
                WallSpec { axis: 1, plane_idx: -1, ranges: [(-1, 0), (0, INF)] },
                WallSpec { axis: 2, plane_idx: 0, ranges: [(0, INF), (-INF, INF)] },
                WallSpec { axis: 2, plane_idx: 0, ranges: [(-INF, -1), (-INF, INF)] },
                WallSpec { axis: 2, plane_idx: 0, ranges: [(-1, 0), (0, INF)] },
                WallSpec { axis: 2, plane_idx: 0, ranges: [(-1, 0), (-INF, -1)] },
            ],
            layout_axes: [0, 1, 2],
            layout_orders: [[0, 1, 2], [0, 1, 2], [0, 1, 2]],
            line_pattern: false,
            side_aware: false,
            dashes: dashes_from_printed(MergePattern::Type2),
        }),
        // One void octant: three concave edges meeting at the corner.
        MergePattern::Type3 => Ok(PatternSpec {
            void_boxes: vec![VoidBox([(0, INF), (0, INF), (0, INF)])],
            walls: vec![
                WallSpec { axis: 0, plane_idx: 0, ranges: [(0, INF), (0, INF)] },
                WallSpec { axis: 1, plane_idx: 0, ranges: [(0, INF), (0, INF)] },
                WallSpec { axis: 2, plane_idx: 0, ranges: [(0, INF), (0, INF)] },
            ],
            layout_axes: [0, 1, 2],
            layout_orders: [[0, 1, 2], [0, 1, 2], [0, 1, 2]],
            line_pattern: false,
            side_aware: false,
            dashes: dashes_from_printed(MergePattern::Type3),
        }),
        // Deeply concave corner: the void is one octant plus its three
        // face-neighbors (a corner stack); each designed wall covers its
        // whole plane except the fully solid quadrant.
        MergePattern::Type4 => Ok(PatternSpec {
            void_boxes: vec![
                VoidBox([(0, INF), (0, INF), (-INF, INF)]),
                VoidBox([(0, INF), (-INF, INF), (0, INF)]),
                VoidBox([(-INF, INF), (0, INF), (0, INF)]),
            ],
            walls: vec![
                WallSpec { axis: 0, plane_idx: 0, ranges: [(0, INF), (-INF, INF)] },
                WallSpec { axis: 0, plane_idx: 0, ranges: [(-INF, INF), (0, INF)] },
                WallSpec { axis: 1, plane_idx: 0, ranges: [(0, INF), (-INF, INF)] },
                WallSpec { axis: 1, plane_idx: 0, ranges: [(-INF, INF), (0, INF)] },
                WallSpec { axis: 2, plane_idx: 0, ranges: [(0, INF), (-INF, INF)] },
                WallSpec { axis: 2, plane_idx: 0, ranges: [(-INF, INF), (0, INF)] },
            ],
            layout_axes: [0, 1, 2],
            layout_orders: [[0, 1, 2], [0, 1, 2], [0, 1, 2]],
            line_pattern: false,
            side_aware: false,
            dashes: dashes_from_printed(MergePattern::Type4),
        }),
        MergePattern::TwoCube => Err(MergeError::UnsupportedPattern),
    }
}





#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn type1_oracle_matches_lookup() {
        let computed = compute_merge_weights(MergePattern::Type1, &LocalIntervals::uniform()).unwrap();
        let printed = lookup_weights(MergePattern::Type1).unwrap();
        for idx in 0..27 {
            if printed.slots[idx].is_some() || computed.slots[idx].is_some() {
                assert_eq!(
                    computed.slots[idx], printed.slots[idx],
                    "main slot {} differs",
                    idx + 1
                );
            }
            assert_eq!(computed.companion[idx], printed.companion[idx], "companion {}", idx + 1);
        }
    }

    #[test]
    fn type1_known_slots() {
        let t = lookup_weights(MergePattern::Type1).unwrap();
        // Printed row 2 positions: slot 22 -> 8/9, slot 14 -> 35/36, slot 13 -> 17/18.
        assert_eq!(t.slots[21], Some(rat(8, 9)));
        assert_eq!(t.slots[13], Some(rat(35, 36)));
        assert_eq!(t.slots[12], Some(rat(17, 18)));
        let t2 = lookup_weights(MergePattern::Type2).unwrap();
        assert_eq!(t2.slots[13], Some(rat(209, 216)));
        let t4 = lookup_weights(MergePattern::Type4).unwrap();
        assert_eq!(t4.slots[13], Some(rat(215, 216)));
    }
}
