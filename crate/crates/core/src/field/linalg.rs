//! Linear systems over a prime field F_p.

/// Solution set of A x = b: `particular + span(kernel)`.
#[derive(Clone, Debug)]
pub struct AffineSolution {
    pub particular: Vec<u32>,
    pub kernel: Vec<Vec<u32>>,
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Solves `rows · x = rhs` over F_p. Returns `None` if inconsistent.
pub fn solve_affine(
    p: u32,
    rows: &[Vec<u32>],
    rhs: &[u32],
    ncols: usize,
) -> Option<AffineSolution> {
    assert_eq!(rows.len(), rhs.len());
    let pp = p as u64;
    let mut m: Vec<Vec<u32>> = rows
        .iter()
        .zip(rhs)
        .map(|(r, &b)| {
            assert_eq!(r.len(), ncols);
            let mut v = r.clone();
            v.push(b % p);
            v
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(pr) = (row..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(row, pr);
        let inv = inv_mod(m[row][col], p) as u64;
        for x in m[row].iter_mut() {
            *x = (*x as u64 * inv % pp) as u32;
        }
        let pivot_row = m[row].clone();
        for (i, r) in m.iter_mut().enumerate() {
            if i == row || r[col] == 0 {
                continue;
            }
            let c = r[col] as u64;
            for (x, &y) in r.iter_mut().zip(&pivot_row) {
                *x = ((*x as u64 + pp * pp - c * y as u64) % pp) as u32;
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    if m[row..].iter().any(|r| r[ncols] != 0) {
        return None;
    }
    let mut particular = vec![0u32; ncols];
    for (i, &c) in pivots.iter().enumerate() {
        particular[c] = m[i][ncols];
    }
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    let kernel = free
        .iter()
        .map(|&fc| {
            let mut v = vec![0u32; ncols];
            v[fc] = 1;
            for (i, &c) in pivots.iter().enumerate() {
                v[c] = (p - m[i][fc]) % p;
            }
            v
        })
        .collect();
    Some(AffineSolution { particular, kernel })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn apply(p: u32, rows: &[Vec<u32>], x: &[u32]) -> Vec<u32> {
        rows.iter()
            .map(|r| {
                (r.iter()
                    .zip(x)
                    .map(|(&a, &b)| a as u64 * b as u64)
                    .sum::<u64>()
                    % p as u64) as u32
            })
            .collect()
    }

    #[test]
    fn consistent_system() {
        let rows = vec![vec![1, 2, 0], vec![0, 1, 1]];
        let rhs = vec![1, 2];
        let s = solve_affine(3, &rows, &rhs, 3).unwrap();
        assert_eq!(apply(3, &rows, &s.particular), rhs);
        assert_eq!(s.kernel.len(), 1);
        for k in &s.kernel {
            assert_eq!(apply(3, &rows, k), vec![0, 0]);
        }
    }

    #[test]
    fn inconsistent_system() {
        let rows = vec![vec![1, 1], vec![2, 2]];
        assert!(solve_affine(3, &rows, &[1, 1], 2).is_none());
    }
}
