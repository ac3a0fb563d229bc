//! Cell list over the periodic box, rebuilt from scratch on every force evaluation.

use super::{SimConfig, SystemState, Vec2};

/// Particle indices bucketed by square cell of edge at least the cutoff.
///
/// Buckets are stored compactly: the indices of cell `c` are
/// `particles[starts[c]..starts[c + 1]]`, in ascending order.
#[derive(Clone, Debug, Default)]
pub struct CellList {
    cells_per_side: usize,
    cell_edge: f64,
    starts: Vec<usize>,
    particles: Vec<u32>,
    /// Distinct neighbouring cells (including the cell itself) for every cell.
    neighbours: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
    /// For every cell, the ascending union of the buckets of its neighbour cells.
    hood_starts: Vec<usize>,
    hood_particles: Vec<u32>,
    marks: Vec<u64>,
}

impl CellList {
    pub fn build(state: &SystemState, config: &SimConfig) -> CellList {
        let mut list = CellList::default();
        list.rebuild(&state.positions, config.box_edge(), config.r_cutoff());
        list
    }

    pub fn with_geometry(positions: &[Vec2], box_edge: f64, r_cutoff: f64) -> CellList {
        let mut list = CellList::default();
        list.rebuild(positions, box_edge, r_cutoff);
        list
    }

    /// Re-buckets `positions`, reusing allocations when the geometry is unchanged.
    pub fn rebuild(&mut self, positions: &[Vec2], box_edge: f64, r_cutoff: f64) {
        let m = ((box_edge / r_cutoff).floor() as usize).clamp(1, max_cells_per_side(positions.len()));
        if m != self.cells_per_side || self.neighbours.is_empty() {
            self.cells_per_side = m;
            self.neighbours = neighbour_table(m);
        }
        self.cell_edge = box_edge / m as f64;

        let n_cells = m * m;
        self.cell_of.clear();
        self.cell_of.extend(positions.iter().map(|p| {
            let cx = ((p.x / self.cell_edge) as usize).min(m - 1);
            let cy = ((p.y / self.cell_edge) as usize).min(m - 1);
            cy * m + cx
        }));

        self.starts.clear();
        self.starts.resize(n_cells + 1, 0);
        for &c in &self.cell_of {
            self.starts[c + 1] += 1;
        }
        for c in 0..n_cells {
            self.starts[c + 1] += self.starts[c];
        }
        self.particles.clear();
        self.particles.resize(positions.len(), 0);
        let mut fill = self.starts[..n_cells].to_vec();
        for (i, &c) in self.cell_of.iter().enumerate() {
            self.particles[fill[c]] = i as u32;
            fill[c] += 1;
        }
        self.build_neighbourhoods();
    }

    fn build_neighbourhoods(&mut self) {
        let n_words = self.cell_of.len().div_ceil(64);
        self.marks.clear();
        self.marks.resize(n_words, 0);
        self.hood_starts.clear();
        self.hood_particles.clear();
        self.hood_starts.push(0);
        for c in 0..self.n_cells() {
            let (mut lo, mut hi) = (usize::MAX, 0);
            for &nc in &self.neighbours[c] {
                for &j in &self.particles[self.starts[nc]..self.starts[nc + 1]] {
                    let w = (j >> 6) as usize;
                    self.marks[w] |= 1u64 << (j & 63);
                    lo = lo.min(w);
                    hi = hi.max(w);
                }
            }
            if lo != usize::MAX {
                for w in lo..=hi {
                    let mut bits = self.marks[w];
                    self.marks[w] = 0;
                    while bits != 0 {
                        self.hood_particles.push((w as u32) << 6 | bits.trailing_zeros());
                        bits &= bits - 1;
                    }
                }
            }
            self.hood_starts.push(self.hood_particles.len());
        }
    }

    /// Ascending indices of every particle in the cells adjacent to (or equal to) `cell`.
    #[inline]
    pub fn neighbourhood(&self, cell: usize) -> &[u32] {
        &self.hood_particles[self.hood_starts[cell]..self.hood_starts[cell + 1]]
    }

    /// Ascending indices greater than `i` in the neighbourhood of particle `i`.
    #[inline]
    pub fn candidates_above(&self, i: usize) -> &[u32] {
        let hood = self.neighbourhood(self.cell_of[i]);
        let from = hood.partition_point(|&j| j <= i as u32);
        &hood[from..]
    }

    #[inline]
    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    #[inline]
    pub fn cell_edge(&self) -> f64 {
        self.cell_edge
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.cells_per_side * self.cells_per_side
    }

    #[inline]
    pub fn bucket(&self, cell: usize) -> &[u32] {
        &self.particles[self.starts[cell]..self.starts[cell + 1]]
    }

    #[inline]
    pub fn cell_of(&self, particle: usize) -> usize {
        self.cell_of[particle]
    }

    #[inline]
    pub fn neighbour_cells(&self, cell: usize) -> &[usize] {
        &self.neighbours[cell]
    }
}

/// Very dilute systems (huge boxes) would otherwise allocate far more cells
/// than particles; coarser cells still have edge >= cutoff.
fn max_cells_per_side(n_particles: usize) -> usize {
    ((16 * n_particles.max(1)) as f64).sqrt().ceil().max(3.0) as usize
}

fn neighbour_table(m: usize) -> Vec<Vec<usize>> {
    (0..m * m)
        .map(|c| {
            let (cx, cy) = (c % m, c / m);
            let mut cells: Vec<usize> = Vec::with_capacity(9);
            for dy in [m - 1, 0, 1] {
                for dx in [m - 1, 0, 1] {
                    let nc = ((cy + dy) % m) * m + (cx + dx) % m;
                    if !cells.contains(&nc) {
                        cells.push(nc);
                    }
                }
            }
            cells
        })
        .collect()
}
