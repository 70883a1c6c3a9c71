use std::collections::VecDeque;

use super::skeleton::Skeleton;
use crate::error::{FiberError, Result};
use crate::geometry::RasterMask;

const NEIGHBOURS: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// 8-connected components as pixel lists, in raster order of their first pixel.
pub fn connected_components(mask: &RasterMask) -> Vec<Vec<(u32, u32)>> {
    let mut seen = vec![false; mask.bits().len()];
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for (x, y) in mask.iter_set() {
        if seen[mask.index(x, y)] {
            continue;
        }
        seen[mask.index(x, y)] = true;
        queue.push_back((x, y));
        let mut comp = Vec::new();
        while let Some((cx, cy)) = queue.pop_front() {
            comp.push((cx, cy));
            for (dx, dy) in NEIGHBOURS {
                let (nx, ny) = (i64::from(cx) + dx, i64::from(cy) + dy);
                if mask.get_signed(nx, ny) {
                    let i = mask.index(nx as u32, ny as u32);
                    if !seen[i] {
                        seen[i] = true;
                        queue.push_back((nx as u32, ny as u32));
                    }
                }
            }
        }
        comp.sort_unstable_by_key(|&(x, y)| (y, x));
        components.push(comp);
    }
    components
}

/// Longest path through the largest skeleton component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonPath {
    /// Ordered pixels; consecutive entries are 8-adjacent.
    pub pixels: Vec<(u32, u32)>,
    pub component_count: usize,
    /// Degree-1 pixels of the component the path was taken from.
    pub endpoint_count: usize,
    /// The component had no end points and was opened up as a cycle.
    pub is_loop: bool,
}

struct Graph {
    pixels: Vec<(u32, u32)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    fn new(mask: &RasterMask, pixels: Vec<(u32, u32)>) -> Self {
        let mut lookup = vec![usize::MAX; mask.bits().len()];
        for (i, &(x, y)) in pixels.iter().enumerate() {
            lookup[mask.index(x, y)] = i;
        }
        let adjacency = pixels
            .iter()
            .map(|&(x, y)| {
                NEIGHBOURS
                    .iter()
                    .filter_map(|(dx, dy)| {
                        let (nx, ny) = (i64::from(x) + dx, i64::from(y) + dy);
                        mask.get_signed(nx, ny)
                            .then(|| lookup[mask.index(nx as u32, ny as u32)])
                    })
                    .filter(|&j| j != usize::MAX)
                    .collect()
            })
            .collect();
        Self { pixels, adjacency }
    }

    /// BFS hop distances and parents from `source`, avoiding `banned` nodes.
    fn bfs(&self, source: usize, banned: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let n = self.pixels.len();
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut queue = VecDeque::from([source]);
        dist[source] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX && !banned.contains(&v) {
                    dist[v] = dist[u] + 1;
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        (dist, parent)
    }

    /// Longest shortest path over all source/target pairs drawn from `nodes`.
    fn widest_pair(&self, nodes: &[usize], banned: &[usize]) -> Vec<(u32, u32)> {
        let mut best: Option<(usize, Vec<usize>, usize)> = None;
        for &source in nodes {
            let (dist, parent) = self.bfs(source, banned);
            for &target in nodes {
                if dist[target] != usize::MAX && best.as_ref().is_none_or(|b| dist[target] > b.0) {
                    best = Some((dist[target], parent.clone(), target));
                }
            }
        }
        let (_, parent, target) = best.expect("at least one node");
        self.trace(&parent, target)
    }

    fn trace(&self, parent: &[usize], target: usize) -> Vec<(u32, u32)> {
        let mut path = vec![self.pixels[target]];
        let mut cur = target;
        while parent[cur] != usize::MAX {
            cur = parent[cur];
            path.push(self.pixels[cur]);
        }
        path.reverse();
        path
    }
}

/// Longest end-point-to-end-point path (by BFS hop count) in the largest
/// 8-connected component of the skeleton. Off-path pixels are dropped.
///
/// With a single end point the path runs to the farthest pixel from it.
/// Components without end points are treated as loops: the cycle is cut at its
/// first pixel and the longest path through the remainder is returned.
pub fn longest_path(skeleton: &Skeleton) -> Result<SkeletonPath> {
    let mask = &skeleton.mask;
    let components = connected_components(mask);
    let component_count = components.len();
    let largest = components
        .into_iter()
        .enumerate()
        .max_by_key(|(i, c)| (c.len(), std::cmp::Reverse(*i)))
        .map(|(_, c)| c)
        .ok_or_else(|| FiberError::invalid("skeleton is empty"))?;
    let graph = Graph::new(mask, largest);
    let endpoints: Vec<usize> = (0..graph.pixels.len())
        .filter(|&i| graph.adjacency[i].len() == 1)
        .collect();
    let endpoint_count = endpoints.len();

    let (pixels, is_loop) = match endpoints.len() {
        0 if graph.pixels.len() == 1 => (graph.pixels.clone(), false),
        0 => {
            // Cutting only one pixel can leave a diagonal shortcut that
            // closes the cycle again, so all but one neighbour go with it.
            let mut banned = vec![0];
            banned.extend(graph.adjacency[0].iter().skip(1));
            let rest: Vec<usize> = (1..graph.pixels.len())
                .filter(|i| !banned.contains(i))
                .collect();
            (graph.widest_pair(&rest, &banned), true)
        }
        1 => {
            let (dist, parent) = graph.bfs(endpoints[0], &[]);
            let far = (0..dist.len())
                .filter(|&i| dist[i] != usize::MAX)
                .max_by_key(|&i| (dist[i], std::cmp::Reverse(i)))
                .unwrap();
            (graph.trace(&parent, far), false)
        }
        _ => (graph.widest_pair(&endpoints, &[]), false),
    };
    Ok(SkeletonPath {
        pixels,
        component_count,
        endpoint_count,
        is_loop,
    })
}
