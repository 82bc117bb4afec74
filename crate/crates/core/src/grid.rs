//! Structured rectangular grids in the similarity plane.
//!
//! Nodes are stored row-major with the second axis fastest: node (i1, i2)
//! lives at `i1 * dims[1] + i2` and at position `origin + (i1 h1, i2 h2)`.
//! Grid edges may carry the slip condition; such wall edges are straight and
//! axis-aligned by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One of the four grid edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WallEdge {
    Left,
    Right,
    Bottom,
    Top,
}

impl WallEdge {
    pub const ALL: [WallEdge; 4] = [
        WallEdge::Left,
        WallEdge::Right,
        WallEdge::Bottom,
        WallEdge::Top,
    ];

    /// Axis normal to the edge: 0 for left/right, 1 for bottom/top.
    pub fn normal_axis(self) -> usize {
        match self {
            WallEdge::Left | WallEdge::Right => 0,
            WallEdge::Bottom | WallEdge::Top => 1,
        }
    }

    /// Whether the edge sits at index 0 of its normal axis.
    pub fn is_low_side(self) -> bool {
        matches!(self, WallEdge::Left | WallEdge::Bottom)
    }

    pub fn name(self) -> &'static str {
        match self {
            WallEdge::Left => "left",
            WallEdge::Right => "right",
            WallEdge::Bottom => "bottom",
            WallEdge::Top => "top",
        }
    }
}

impl std::str::FromStr for WallEdge {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(WallEdge::Left),
            "right" => Ok(WallEdge::Right),
            "bottom" => Ok(WallEdge::Bottom),
            "top" => Ok(WallEdge::Top),
            other => Err(Error::InvalidArgument(format!(
                "unknown wall edge {other:?} (expected left|right|bottom|top)"
            ))),
        }
    }
}

/// Subset of the four edges carrying the slip condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<WallEdge>", into = "Vec<WallEdge>")]
pub struct WallSet {
    bits: u8,
}

impl WallSet {
    pub fn empty() -> Self {
        WallSet { bits: 0 }
    }

    pub fn single(edge: WallEdge) -> Self {
        WallSet::empty().with(edge)
    }

    pub fn all() -> Self {
        WallSet { bits: 0b1111 }
    }

    #[must_use]
    pub fn with(mut self, edge: WallEdge) -> Self {
        self.bits |= 1 << edge as u8;
        self
    }

    #[must_use]
    pub fn without(mut self, edge: WallEdge) -> Self {
        self.bits &= !(1 << edge as u8);
        self
    }

    pub fn contains(&self, edge: WallEdge) -> bool {
        self.bits & (1 << edge as u8) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = WallEdge> + '_ {
        WallEdge::ALL.into_iter().filter(|e| self.contains(*e))
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }
}

impl From<Vec<WallEdge>> for WallSet {
    fn from(edges: Vec<WallEdge>) -> Self {
        edges.into_iter().fold(WallSet::empty(), WallSet::with)
    }
}

impl From<WallSet> for Vec<WallEdge> {
    fn from(set: WallSet) -> Self {
        set.iter().collect()
    }
}

/// Role of a node in a boundary-value problem on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    Interior,
    /// On a wall edge only: an unknown closed by ghost reflection.
    Wall,
    /// On at least one non-wall edge: carries Dirichlet data.
    Dirichlet,
}

/// Uniform rectangular grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub dims: [usize; 2],
    #[serde(default)]
    pub walls: WallSet,
}

impl GridSpec {
    pub fn new(origin: [f64; 2], spacing: [f64; 2], dims: [usize; 2]) -> Result<Self> {
        for a in 0..2 {
            if !(spacing[a].is_finite() && spacing[a] > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "grid spacing must be positive, got {} on axis {a}",
                    spacing[a]
                )));
            }
            if !origin[a].is_finite() {
                return Err(Error::InvalidArgument("grid origin must be finite".into()));
            }
            if dims[a] < 3 {
                return Err(Error::InvalidArgument(format!(
                    "grids need at least 3 nodes per axis, got {} on axis {a}",
                    dims[a]
                )));
            }
        }
        Ok(GridSpec {
            origin,
            spacing,
            dims,
            walls: WallSet::empty(),
        })
    }

    /// Grid covering `[lo, hi]` with `dims` nodes per axis.
    pub fn from_extent(lo: [f64; 2], hi: [f64; 2], dims: [usize; 2]) -> Result<Self> {
        for a in 0..2 {
            if !(hi[a] > lo[a]) {
                return Err(Error::InvalidArgument(format!(
                    "empty extent on axis {a}: [{}, {}]",
                    lo[a], hi[a]
                )));
            }
            if dims[a] < 3 {
                return Err(Error::InvalidArgument(format!(
                    "grids need at least 3 nodes per axis, got {} on axis {a}",
                    dims[a]
                )));
            }
        }
        let spacing = [
            (hi[0] - lo[0]) / (dims[0] - 1) as f64,
            (hi[1] - lo[1]) / (dims[1] - 1) as f64,
        ];
        GridSpec::new(lo, spacing, dims)
    }

    #[must_use]
    pub fn with_walls(mut self, walls: WallSet) -> Self {
        self.walls = walls;
        self
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i1: usize, i2: usize) -> usize {
        debug_assert!(i1 < self.dims[0] && i2 < self.dims[1]);
        i1 * self.dims[1] + i2
    }

    #[inline]
    pub fn xi(&self, i1: usize, i2: usize) -> [f64; 2] {
        [
            self.origin[0] + i1 as f64 * self.spacing[0],
            self.origin[1] + i2 as f64 * self.spacing[1],
        ]
    }

    /// Largest node coordinate per axis.
    pub fn upper(&self) -> [f64; 2] {
        [
            self.origin[0] + (self.dims[0] - 1) as f64 * self.spacing[0],
            self.origin[1] + (self.dims[1] - 1) as f64 * self.spacing[1],
        ]
    }

    pub fn centroid(&self) -> [f64; 2] {
        let hi = self.upper();
        [
            0.5 * (self.origin[0] + hi[0]),
            0.5 * (self.origin[1] + hi[1]),
        ]
    }

    pub fn is_interior(&self, i1: usize, i2: usize) -> bool {
        i1 > 0 && i1 + 1 < self.dims[0] && i2 > 0 && i2 + 1 < self.dims[1]
    }

    pub fn on_edge(&self, edge: WallEdge, i1: usize, i2: usize) -> bool {
        match edge {
            WallEdge::Left => i1 == 0,
            WallEdge::Right => i1 + 1 == self.dims[0],
            WallEdge::Bottom => i2 == 0,
            WallEdge::Top => i2 + 1 == self.dims[1],
        }
    }

    /// Interior nodes are unknowns; boundary nodes are wall unknowns only if
    /// every edge through them is a wall, and Dirichlet otherwise.
    pub fn node_role(&self, i1: usize, i2: usize) -> NodeRole {
        let mut on_wall = false;
        for edge in WallEdge::ALL {
            if self.on_edge(edge, i1, i2) {
                if self.walls.contains(edge) {
                    on_wall = true;
                } else {
                    return NodeRole::Dirichlet;
                }
            }
        }
        if on_wall {
            NodeRole::Wall
        } else {
            NodeRole::Interior
        }
    }

    /// Coordinate of the wall plane (the edge's position on its normal axis).
    pub fn wall_plane(&self, edge: WallEdge) -> f64 {
        let a = edge.normal_axis();
        if edge.is_low_side() {
            self.origin[a]
        } else {
            self.origin[a] + (self.dims[a] - 1) as f64 * self.spacing[a]
        }
    }

    /// Same node layout and placement; wall markings may differ.
    pub fn same_layout(&self, other: &GridSpec) -> bool {
        self.dims == other.dims && self.spacing == other.spacing && self.origin == other.origin
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing[0].max(self.spacing[1])
    }
}
