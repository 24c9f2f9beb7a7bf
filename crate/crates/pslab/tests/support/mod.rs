//! Test-side oracles, independent of the walk module's search code: exact
//! Hamiltonian-path length bounds by bitmask dynamic programming, and full
//! path enumeration for the smallest regions.

use std::collections::HashMap;

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;
pub const SQRT_3: f64 = 1.732_050_807_568_877_3;

/// Build 26-neighbor adjacency with step lengths from a raw cell list.
pub fn adjacency(cells: &[[i32; 3]]) -> Vec<Vec<(usize, f64)>> {
    let index: HashMap<[i32; 3], usize> = cells.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    cells
        .iter()
        .map(|&[x, y, z]| {
            let mut nbrs = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if dx == 0 && dy == 0 && dz == 0 {
                            continue;
                        }
                        if let Some(&j) = index.get(&[x + dx, y + dy, z + dz]) {
                            let nz = [dx, dy, dz].iter().filter(|d| **d != 0).count();
                            let w = match nz {
                                1 => 1.0,
                                2 => SQRT_2,
                                _ => SQRT_3,
                            };
                            nbrs.push((j, w));
                        }
                    }
                }
            }
            nbrs
        })
        .collect()
}

/// Exact [min, max] total length over all Hamiltonian paths, by Held-Karp
/// style DP over (visited-set, last-cell). Feasible to ~20 cells; returns
/// None beyond that or when no Hamiltonian path exists.
pub fn exact_length_bounds(cells: &[[i32; 3]]) -> Option<(f64, f64)> {
    let n = cells.len();
    if n == 0 || n > 20 {
        return None;
    }
    if n == 1 {
        return Some((0.0, 0.0));
    }
    let adj = adjacency(cells);
    let size = (1usize << n) * n;
    let mut dp_min = vec![f32::INFINITY; size];
    let mut dp_max = vec![f32::NEG_INFINITY; size];
    for i in 0..n {
        dp_min[(1 << i) * n + i] = 0.0;
        dp_max[(1 << i) * n + i] = 0.0;
    }
    let full = (1usize << n) - 1;
    for mask in 1..=full {
        let base = mask * n;
        for last in 0..n {
            if mask & (1 << last) == 0 {
                continue;
            }
            let vmin = dp_min[base + last];
            let vmax = dp_max[base + last];
            if vmin.is_infinite() && vmax.is_infinite() {
                continue;
            }
            for &(nb, w) in &adj[last] {
                if mask & (1 << nb) != 0 {
                    continue;
                }
                let nbase = (mask | (1 << nb)) * n + nb;
                let w = w as f32;
                if vmin + w < dp_min[nbase] {
                    dp_min[nbase] = vmin + w;
                }
                if vmax + w > dp_max[nbase] {
                    dp_max[nbase] = vmax + w;
                }
            }
        }
    }
    let lo = (0..n)
        .map(|last| dp_min[full * n + last])
        .fold(f32::INFINITY, f32::min);
    let hi = (0..n)
        .map(|last| dp_max[full * n + last])
        .fold(f32::NEG_INFINITY, f32::max);
    if lo.is_infinite() {
        return None;
    }
    Some((lo as f64, hi as f64))
}

/// Every Hamiltonian-path length by exhaustive backtracking; only sane for
/// single-digit cell counts.
pub fn enumerate_path_lengths(cells: &[[i32; 3]]) -> Vec<f64> {
    let n = cells.len();
    let adj = adjacency(cells);
    let mut lengths = Vec::new();
    if n == 1 {
        return vec![0.0];
    }
    let mut visited = vec![false; n];
    fn dfs(
        at: usize,
        depth: usize,
        len: f64,
        n: usize,
        adj: &[Vec<(usize, f64)>],
        visited: &mut [bool],
        out: &mut Vec<f64>,
    ) {
        if depth == n {
            out.push(len);
            return;
        }
        for &(nb, w) in &adj[at] {
            if !visited[nb] {
                visited[nb] = true;
                dfs(nb, depth + 1, len + w, n, adj, visited, out);
                visited[nb] = false;
            }
        }
    }
    for start in 0..n {
        visited[start] = true;
        dfs(start, 1, 0.0, n, &adj, &mut visited, &mut lengths);
        visited[start] = false;
    }
    lengths
}

#[allow(dead_code)] // each test binary compiles its own copy
pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
