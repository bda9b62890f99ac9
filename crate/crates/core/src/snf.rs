//! Smith normal form over the integers, for small restriction matrices.

/// Abelian group descriptor: free rank plus nontrivial torsion orders.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GroupDescriptor {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl GroupDescriptor {
    pub fn trivial() -> Self {
        GroupDescriptor {
            free_rank: 0,
            torsion: Vec::new(),
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl std::fmt::Display for GroupDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for _ in 0..self.free_rank {
            parts.push("Z".to_string());
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Dense row-major integer matrix.
#[derive(Debug, Clone)]
pub struct IntMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<i64>,
}

impl IntMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = IntMat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged integer matrix");
            for (j, &v) in row.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn add_row_multiple(&mut self, target: usize, source: usize, factor: i64) {
        for j in 0..self.cols {
            let v = self[(source, j)];
            self[(target, j)] += factor * v;
        }
    }

    fn add_col_multiple(&mut self, target: usize, source: usize, factor: i64) {
        for i in 0..self.rows {
            let v = self[(i, source)];
            self[(i, target)] += factor * v;
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMat {
    type Output = i64;
    fn index(&self, (i, j): (usize, usize)) -> &i64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut i64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Diagonal of the Smith normal form (d_1 | d_2 | …, nonnegative).
pub fn smith_diagonal(m: &IntMat) -> Vec<i64> {
    let mut a = m.clone();
    let n = a.rows.min(a.cols);
    let mut diag = Vec::with_capacity(n);
    let mut t = 0;
    while t < n {
        // find a pivot of minimal absolute value in the remaining block
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..a.rows {
            for j in t..a.cols {
                if a[(i, j)] != 0
                    && pivot.map_or(true, |(pi, pj)| a[(i, j)].abs() < a[(pi, pj)].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break;
        };
        a.swap_rows(t, pi);
        a.swap_cols(t, pj);
        // clear the pivot row and column; restart if a remainder appears
        let mut again = true;
        while again {
            again = false;
            for i in (t + 1)..a.rows {
                let q = a[(i, t)].div_euclid(a[(t, t)]);
                if q != 0 {
                    a.add_row_multiple(i, t, -q);
                }
                if a[(i, t)] != 0 {
                    a.swap_rows(t, i);
                    again = true;
                }
            }
            for j in (t + 1)..a.cols {
                let q = a[(t, j)].div_euclid(a[(t, t)]);
                if q != 0 {
                    a.add_col_multiple(j, t, -q);
                }
                if a[(t, j)] != 0 {
                    a.swap_cols(t, j);
                    again = true;
                }
            }
        }
        // enforce the divisibility chain: fold non-divisible entries back in
        let d = a[(t, t)].abs();
        let mut fixed = false;
        'outer: for i in (t + 1)..a.rows {
            for j in (t + 1)..a.cols {
                if a[(i, j)] % d != 0 {
                    a.add_row_multiple(t, i, 1);
                    fixed = true;
                    break 'outer;
                }
            }
        }
        if fixed {
            continue; // redo this pivot with the folded row
        }
        diag.push(d);
        t += 1;
    }
    diag
}

/// Cokernel `Z^rows / im(M)` of the column span, as a group descriptor.
pub fn cokernel(m: &IntMat) -> GroupDescriptor {
    let diag = smith_diagonal(m);
    let rank = diag.len();
    let torsion = diag
        .into_iter()
        .filter(|d| *d > 1)
        .map(|d| d as u64)
        .collect();
    GroupDescriptor {
        free_rank: m.rows - rank,
        torsion,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snf_of_diagonal() {
        let m = IntMat::from_rows(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(smith_diagonal(&m), vec![1, 6]);
    }

    #[test]
    fn cokernel_of_two() {
        let m = IntMat::from_rows(&[vec![2]]);
        let g = cokernel(&m);
        assert_eq!(g.free_rank, 0);
        assert_eq!(g.torsion, vec![2]);
    }

    #[test]
    fn cokernel_of_diagonal_embedding() {
        // Z → Z², 1 ↦ (1,1): cokernel is infinite cyclic
        let m = IntMat::from_rows(&[vec![1], vec![1]]);
        let g = cokernel(&m);
        assert_eq!(g.free_rank, 1);
        assert!(g.torsion.is_empty());
    }

    #[test]
    fn cokernel_of_surjection_is_trivial() {
        let m = IntMat::from_rows(&[vec![1, 1]]);
        assert!(cokernel(&m).is_trivial());
    }

    #[test]
    fn snf_divisibility_chain() {
        let m = IntMat::from_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let d = smith_diagonal(&m);
        assert_eq!(d.len(), 3);
        for w in d.windows(2) {
            assert_eq!(w[1] % w[0], 0, "divisibility chain {d:?}");
        }
        // determinant up to sign equals the product of the invariant factors
        assert_eq!(d.iter().product::<i64>(), 624);
    }
}
