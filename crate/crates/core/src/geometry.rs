//! Hexagonal cell lattice, reuse-3 pilot coloring and user drops.
//!
//! Cells are addressed by axial coordinates `(q, r)`; a site sits at
//! `isd · (q + r/2, (√3/2) r)`, so every first-tier neighbour is exactly one
//! inter-site distance away. Each cell is the regular hexagon with inradius
//! `isd / 2` around its site.

use std::fmt::Write as _;

use rand::Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CellSite {
    pub cell_id: usize,
    pub axial_q: i32,
    pub axial_r: i32,
    pub position: Point2,
    pub pilot_group: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Uplink => "uplink",
            Direction::Downlink => "downlink",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UserPosition {
    pub cell_of_drop: usize,
    pub serving_cell: usize,
    pub position: Point2,
    pub direction: Direction,
    pub user_index: usize,
}

fn hex_distance(q: i32, r: i32) -> i32 {
    q.abs().max(r.abs()).max((q + r).abs())
}

/// `1 + 3·tiers·(tiers + 1)` sites centred on the origin, cell 0 first and
/// then ring by ring, counter-clockwise from the positive x axis.
pub fn hex_lattice(tiers: usize, inter_site_distance: f64) -> Vec<CellSite> {
    let t = tiers as i32;
    let mut coords: Vec<(i32, i32)> = Vec::new();
    for q in -t..=t {
        for r in -t..=t {
            if hex_distance(q, r) <= t {
                coords.push((q, r));
            }
        }
    }
    let to_xy = |q: i32, r: i32| {
        Point2::new(
            inter_site_distance * (q as f64 + r as f64 / 2.0),
            inter_site_distance * (3f64.sqrt() / 2.0) * r as f64,
        )
    };
    let angle = |q: i32, r: i32| {
        let p = to_xy(q, r);
        let a = p.y.atan2(p.x);
        // [0, 2π) with a small tolerance so the +x axis sorts first
        if a < -1e-12 {
            a + std::f64::consts::TAU
        } else {
            a.max(0.0)
        }
    };
    coords.sort_by(|a, b| {
        hex_distance(a.0, a.1)
            .cmp(&hex_distance(b.0, b.1))
            .then(angle(a.0, a.1).total_cmp(&angle(b.0, b.1)))
    });
    coords
        .into_iter()
        .enumerate()
        .map(|(cell_id, (q, r))| CellSite {
            cell_id,
            axial_q: q,
            axial_r: r,
            position: to_xy(q, r),
            pilot_group: 0,
        })
        .collect()
}

/// Reuse-3 coloring `(q − r) mod 3`. Returns the colored cells and the
/// contamination set: every other cell sharing cell 0's pilot group.
pub fn pilot_reuse_coloring(mut cells: Vec<CellSite>) -> (Vec<CellSite>, Vec<usize>) {
    for c in &mut cells {
        c.pilot_group = (c.axial_q - c.axial_r).rem_euclid(3) as u8;
    }
    let reference = cells.first().map(|c| c.pilot_group);
    let contamination = cells
        .iter()
        .filter(|c| c.cell_id != 0 && Some(c.pilot_group) == reference)
        .map(|c| c.cell_id)
        .collect();
    (cells, contamination)
}

/// Colored lattice plus its contamination set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lattice {
    pub cells: Vec<CellSite>,
    pub contamination_set: Vec<usize>,
    pub inter_site_distance: f64,
}

impl Lattice {
    pub fn new(tiers: usize, inter_site_distance: f64) -> Self {
        let (cells, contamination_set) = pilot_reuse_coloring(hex_lattice(tiers, inter_site_distance));
        Self {
            cells,
            contamination_set,
            inter_site_distance,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Circumradius of each hexagonal cell.
    pub fn cell_radius(&self) -> f64 {
        self.inter_site_distance / 3f64.sqrt()
    }

    /// Uniform point in the hexagon of `cell`.
    pub fn sample_in_cell<R: Rng + ?Sized>(&self, cell: usize, rng: &mut R) -> Point2 {
        let centre = self.cells[cell].position;
        let (dx, dy) = sample_unit_hexagon(rng);
        let radius = self.cell_radius();
        Point2::new(centre.x + radius * dx, centre.y + radius * dy)
    }

    pub fn min_bs_distance(&self, p: Point2) -> f64 {
        self.cells
            .iter()
            .map(|c| c.position.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// `count` users uniform in `cell`, redrawn while closer than
    /// `min_distance` to any BS. `serving_cell` is provisionally the drop
    /// cell; association happens when gains are drawn.
    pub fn drop_users<R: Rng + ?Sized>(
        &self,
        cell: usize,
        count: usize,
        direction: Direction,
        min_distance: f64,
        rng: &mut R,
    ) -> Vec<UserPosition> {
        (0..count)
            .map(|user_index| UserPosition {
                cell_of_drop: cell,
                serving_cell: cell,
                position: self.sample_user_position(cell, min_distance, rng),
                direction,
                user_index,
            })
            .collect()
    }

    pub fn sample_user_position<R: Rng + ?Sized>(
        &self,
        cell: usize,
        min_distance: f64,
        rng: &mut R,
    ) -> Point2 {
        loop {
            let p = self.sample_in_cell(cell, rng);
            if self.min_bs_distance(p) >= min_distance {
                return p;
            }
        }
    }
}

/// Index of the sector triangle `(0, v_i, v_{i+1})` and the point, for a
/// unit-circumradius pointy-top hexagon (vertices at 30° + 60°·i).
pub fn sample_unit_hexagon_sector<R: Rng + ?Sized>(rng: &mut R) -> (usize, f64, f64) {
    let sector = rng.random_range(0..6usize);
    let mut u: f64 = rng.random();
    let mut v: f64 = rng.random();
    if u + v > 1.0 {
        u = 1.0 - u;
        v = 1.0 - v;
    }
    let (a0, a1) = hexagon_vertex_angles(sector);
    let x = u * a0.cos() + v * a1.cos();
    let y = u * a0.sin() + v * a1.sin();
    (sector, x, y)
}

fn sample_unit_hexagon<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64) {
    let (_, x, y) = sample_unit_hexagon_sector(rng);
    (x, y)
}

/// Angles of the two outer vertices of sector `i`.
pub fn hexagon_vertex_angles(sector: usize) -> (f64, f64) {
    let step = std::f64::consts::FRAC_PI_3;
    let a0 = std::f64::consts::FRAC_PI_6 + step * sector as f64;
    (a0, a0 + step)
}

/// CSV of user positions: `cell_id,user_index,direction,x_m,y_m,serving_cell`.
pub fn positions_csv<'a>(users: impl IntoIterator<Item = &'a UserPosition>) -> String {
    let mut out = String::from("cell_id,user_index,direction,x_m,y_m,serving_cell\n");
    for u in users {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            u.cell_of_drop,
            u.user_index,
            u.direction.as_str(),
            u.position.x,
            u.position.y,
            u.serving_cell
        );
    }
    out
}
