//! Finitely generated abelian groups given by generators and relations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::matrix::{smith_normal_form, IntMatrix};

/// Echelon basis of a sublattice of Z^k, grown one vector at a time.
///
/// Rows are kept with distinct pivot columns and positive pivots; entries
/// to the right of a pivot in other rows are not reduced.
#[derive(Clone, Debug, Default)]
pub struct LatticeBasis {
    dim: usize,
    rows: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl LatticeBasis {
    pub fn new(dim: usize) -> Self {
        LatticeBasis {
            dim,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    /// Adds `v` to the lattice; returns true if the lattice grew.
    pub fn insert(&mut self, v: &[i64]) -> bool {
        let v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        self.insert_big(v)
    }

    pub fn insert_big(&mut self, mut v: Vec<BigInt>) -> bool {
        assert_eq!(v.len(), self.dim, "vector length mismatch");
        let mut grew = false;
        loop {
            let Some(lead) = v.iter().position(|x| !x.is_zero()) else {
                return grew;
            };
            match self.pivots.iter().position(|&p| p == lead) {
                None => {
                    if v[lead].is_negative() {
                        v.iter_mut().for_each(|x| *x = -&*x);
                    }
                    let at = self.pivots.partition_point(|&p| p < lead);
                    self.pivots.insert(at, lead);
                    self.rows.insert(at, v);
                    self.reduce_above();
                    return true;
                }
                Some(idx) => {
                    let row = &self.rows[idx];
                    let a = &row[lead];
                    let b = &v[lead];
                    if b.is_multiple_of(a) {
                        let q = b / a;
                        for (x, r) in v.iter_mut().zip(row) {
                            *x -= &q * r;
                        }
                        continue;
                    }
                    // replace the pivot row by the gcd combination
                    let eg = a.extended_gcd(b);
                    let (g, s, t) = (eg.gcd, eg.x, eg.y);
                    let (a_g, b_g) = (a / &g, b / &g);
                    let new_row: Vec<BigInt> =
                        row.iter().zip(&v).map(|(r, x)| &s * r + &t * x).collect();
                    let rem: Vec<BigInt> = row
                        .iter()
                        .zip(&v)
                        .map(|(r, x)| &a_g * x - &b_g * r)
                        .collect();
                    self.rows[idx] = new_row;
                    if self.rows[idx][lead].is_negative() {
                        self.rows[idx].iter_mut().for_each(|x| *x = -&*x);
                    }
                    grew = true;
                    self.reduce_above();
                    v = rem;
                }
            }
        }
    }
}

impl LatticeBasis {
    /// Reduces every entry sitting in another row's pivot column modulo that
    /// pivot, keeping coefficients bounded (Hermite form on pivot columns).
    fn reduce_above(&mut self) {
        for i in 0..self.rows.len() {
            let (upper, lower) = self.rows.split_at_mut(i + 1);
            let row = &mut upper[i];
            for (pivot_row, &pc) in lower.iter().zip(&self.pivots[i + 1..]) {
                let q = row[pc].div_floor(&pivot_row[pc]);
                if q.is_zero() {
                    continue;
                }
                for (x, r) in row.iter_mut().zip(pivot_row.iter()) {
                    *x -= &q * r;
                }
            }
        }
    }

    /// Canonical representative of v + L: each pivot coordinate is brought
    /// into [0, pivot). Unique per coset when the lattice has full rank.
    pub fn reduce_vector(&self, v: &[i64]) -> Vec<BigInt> {
        let mut v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            let q = v[pc].div_floor(&row[pc]);
            if q.is_zero() {
                continue;
            }
            for (x, y) in v.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
        v
    }

    /// [Z^k : L] for a full-rank lattice, None otherwise.
    pub fn index(&self) -> Option<BigInt> {
        (self.rank() == self.dim).then(|| {
            self.rows
                .iter()
                .zip(&self.pivots)
                .map(|(r, &pc)| r[pc].clone())
                .product()
        })
    }

    /// Whether `v` lies in the lattice.
    pub fn contains(&self, v: &[i64]) -> bool {
        let mut v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        for (row, &pc) in self.rows.iter().zip(&self.pivots) {
            if v[..pc].iter().any(|x| !x.is_zero()) {
                return false;
            }
            let (q, r) = v[pc].div_rem(&row[pc]);
            if !r.is_zero() {
                return false;
            }
            for (x, y) in v.iter_mut().zip(row) {
                *x -= &q * y;
            }
        }
        v.iter().all(|x| x.is_zero())
    }
}

/// Presentation Z^k / L in Smith coordinates.
///
/// Canonical coordinates: one per non-unit invariant factor, finite ones
/// first (d_1 | d_2 | ...), then free ones (factor 0).
#[derive(Clone, Debug)]
pub struct AbelianGroupPresentation {
    generator_count: usize,
    factors: Vec<BigInt>,
    /// One row per canonical coordinate: the projection functional.
    projection: Vec<Vec<BigInt>>,
    /// Column j: a vector in Z^k mapping to canonical generator j.
    lifts: Vec<Vec<BigInt>>,
}

impl AbelianGroupPresentation {
    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    /// Invariant factors d_1 | d_2 | ... followed by zeros for free factors.
    pub fn invariant_factors(&self) -> &[BigInt] {
        &self.factors
    }

    pub fn free_rank(&self) -> usize {
        self.factors.iter().filter(|d| d.is_zero()).count()
    }

    pub fn torsion_order(&self) -> BigInt {
        self.factors.iter().filter(|d| !d.is_zero()).product()
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank() == 0
    }

    pub fn projection_rows(&self) -> &[Vec<BigInt>] {
        &self.projection
    }

    /// Lift of canonical generator `j` to Z^k.
    pub fn lift_generator(&self, j: usize) -> &[BigInt] {
        &self.lifts[j]
    }

    /// Canonical coordinates of the class of `v`.
    pub fn project(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.generator_count, "vector length mismatch");
        self.projection
            .iter()
            .zip(&self.factors)
            .map(|(row, d)| {
                let s: BigInt = row
                    .iter()
                    .zip(v)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .map(|(a, b)| a * b)
                    .sum();
                if d.is_zero() {
                    s
                } else {
                    s.mod_floor(d)
                }
            })
            .collect()
    }

    pub fn project_i64(&self, v: &[i64]) -> Vec<BigInt> {
        let v: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        self.project(&v)
    }

    /// Reduces canonical coordinates into their standard range.
    pub fn reduce(&self, coords: &mut [BigInt]) {
        for (c, d) in coords.iter_mut().zip(&self.factors) {
            if !d.is_zero() {
                *c = c.mod_floor(d);
            }
        }
    }

    /// A vector in Z^k whose class has the given canonical coordinates.
    pub fn lift(&self, coords: &[BigInt]) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); self.generator_count];
        for (c, col) in coords.iter().zip(&self.lifts) {
            if c.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(col) {
                *o += c * x;
            }
        }
        out
    }
}

/// Z^k modulo the lattice spanned by `relations`.
pub fn cokernel(generator_count: usize, relations: &[Vec<i64>]) -> AbelianGroupPresentation {
    let mut basis = LatticeBasis::new(generator_count);
    for r in relations {
        basis.insert(r);
    }
    cokernel_of_basis(&basis)
}

pub fn cokernel_of_basis(basis: &LatticeBasis) -> AbelianGroupPresentation {
    let k = basis.dim();
    // columns are relation vectors
    let m = IntMatrix::from_columns(k, basis.rows());
    let snf = smith_normal_form(&m);
    let diag = snf.diagonal();
    let mut finite = Vec::new();
    let mut free = Vec::new();
    for i in 0..k {
        let d = diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        if d.is_one() {
            continue;
        }
        if d.is_zero() {
            free.push(i);
        } else {
            finite.push((i, d));
        }
    }
    let mut factors = Vec::new();
    let mut projection = Vec::new();
    let mut lifts = Vec::new();
    let column = |j: usize| -> Vec<BigInt> { (0..k).map(|i| snf.u_inv[(i, j)].clone()).collect() };
    for (i, d) in finite {
        factors.push(d.clone());
        projection.push(snf.u.row(i).iter().map(|x| x.mod_floor(&d)).collect());
        lifts.push(column(i));
    }
    for i in free {
        factors.push(BigInt::zero());
        projection.push(snf.u.row(i).to_vec());
        lifts.push(column(i));
    }
    AbelianGroupPresentation {
        generator_count: k,
        factors,
        projection,
        lifts,
    }
}

/// A homomorphism G -> Z/n, given by the images of the canonical generators.
pub type HomImages = Vec<u64>;

/// All homomorphisms from `g` to Z/n.
///
/// A free factor admits n images, a finite factor d admits gcd(d, n).
pub fn enumerate_homs(g: &AbelianGroupPresentation, n: u64) -> Vec<HomImages> {
    assert!(n >= 1, "target order must be positive");
    let choices: Vec<Vec<u64>> = g
        .invariant_factors()
        .iter()
        .map(|d| {
            let d = d.to_u64().unwrap_or(0);
            if d == 0 {
                (0..n).collect()
            } else {
                let gcd = d.gcd(&n);
                let step = n / gcd;
                (0..gcd).map(|i| i * step).collect()
            }
        })
        .collect();
    let mut out = vec![Vec::new()];
    for opts in &choices {
        let mut next = Vec::with_capacity(out.len() * opts.len());
        for prefix in &out {
            for &c in opts {
                let mut h = prefix.clone();
                h.push(c);
                next.push(h);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factors(g: &AbelianGroupPresentation) -> Vec<i64> {
        g.invariant_factors()
            .iter()
            .map(|d| d.to_i64().unwrap())
            .collect()
    }

    #[test]
    fn cyclic_three() {
        let g = cokernel(1, &[vec![3]]);
        assert_eq!(factors(&g), vec![3]);
    }

    #[test]
    fn free_rank_two() {
        let g = cokernel(2, &[]);
        assert_eq!(factors(&g), vec![0, 0]);
        assert_eq!(g.free_rank(), 2);
    }

    #[test]
    fn two_by_three_is_six() {
        let g = cokernel(2, &[vec![2, 0], vec![0, 3]]);
        assert_eq!(factors(&g), vec![6]);
        // projection kills relations and is onto
        assert!(g.project_i64(&[2, 0]).iter().all(|x| x.is_zero()));
        assert!(g.project_i64(&[0, 3]).iter().all(|x| x.is_zero()));
        let e0 = g.project_i64(&[1, 0]);
        let e1 = g.project_i64(&[0, 1]);
        // orders 2 and 3 in Z/6
        assert_eq!(e0[0].clone() * 2 % 6, BigInt::zero());
        assert_eq!(e1[0].clone() * 3 % 6, BigInt::zero());
    }

    #[test]
    fn lifts_project_back() {
        let g = cokernel(3, &[vec![2, 4, 0], vec![0, 6, 3], vec![1, 1, 1]]);
        for j in 0..g.invariant_factors().len() {
            let p = g.project(g.lift_generator(j));
            for (i, c) in p.iter().enumerate() {
                assert_eq!(c.is_one(), i == j);
                assert!(i == j || c.is_zero());
            }
        }
    }

    #[test]
    fn hom_counts() {
        let z = cokernel(1, &[]);
        assert_eq!(enumerate_homs(&z, 3).len(), 3);
        let z_z3 = cokernel(2, &[vec![0, 3]]);
        assert_eq!(enumerate_homs(&z_z3, 3).len(), 9);
        let z2 = cokernel(1, &[vec![2]]);
        assert_eq!(enumerate_homs(&z2, 3), vec![vec![0]]);
    }

    #[test]
    fn echelon_handles_gcd_steps() {
        let mut b = LatticeBasis::new(2);
        b.insert(&[4, 1]);
        b.insert(&[6, 0]);
        let g = cokernel_of_basis(&b);
        // det [[4,1],[6,0]] = -6
        assert_eq!(g.torsion_order(), BigInt::from(6));
    }
}
