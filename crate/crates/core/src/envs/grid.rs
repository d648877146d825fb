//! 4-neighbor BFS over the cell grid.

use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: i64,
    pub y: i64,
}

/// Dense distance field indexed by cell; u32::MAX marks unreachable.
pub struct DistanceField {
    nx: i64,
    ny: i64,
    dist: Vec<u32>,
}

impl DistanceField {
    pub fn get(&self, c: Cell) -> Option<u32> {
        if c.x < 0 || c.y < 0 || c.x >= self.nx || c.y >= self.ny {
            return None;
        }
        let d = self.dist[(c.x * self.ny + c.y) as usize];
        (d != u32::MAX).then_some(d)
    }
}

/// BFS from `from` against a precomputed free mask laid out as x * ny + y.
pub fn bfs(from: Cell, nx: i64, ny: i64, free: &[bool]) -> DistanceField {
    let mut dist = vec![u32::MAX; (nx * ny) as usize];
    let idx = |c: Cell| (c.x * ny + c.y) as usize;
    let mut queue = VecDeque::new();
    dist[idx(from)] = 0;
    queue.push_back(from);
    while let Some(c) = queue.pop_front() {
        let d = dist[idx(c)];
        for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            let n = Cell { x: c.x + dx, y: c.y + dy };
            if n.x < 0 || n.y < 0 || n.x >= nx || n.y >= ny {
                continue;
            }
            let ni = idx(n);
            if dist[ni] != u32::MAX || !free[ni] {
                continue;
            }
            dist[ni] = d + 1;
            queue.push_back(n);
        }
    }
    DistanceField { nx, ny, dist }
}
