//! Dense symmetric solves for the small Hankel systems that define a witness.
//!
//! The moment matrices are at most a few dozen rows but span twenty or more
//! decades. Systems are diagonally equilibrated, factored with a
//! Bunch–Kaufman `P A Pᵀ = L D Lᵀ` decomposition (1×1 and 2×2 pivots, so
//! indefinite matrices are handled), and polished with iterative refinement
//! whose residuals are accumulated in doubled precision.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::numeric::dot2;

/// Bunch–Kaufman pivot threshold `(1 + √17) / 8`.
const BK_ALPHA: f64 = 0.640_388_203_202_208;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub zero: usize,
}

impl Inertia {
    pub fn is_positive_definite(&self) -> bool {
        self.negative == 0 && self.zero == 0
    }
}

#[derive(Debug, Clone, Copy)]
enum Pivot {
    One(f64),
    Two([f64; 3]),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactorError {
    /// An exactly zero pivot column was met at the given step.
    Singular { step: usize },
    NonFinite,
}

/// Bunch–Kaufman factorization of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    /// Unit lower factor, stored below the diagonal.
    l: DMatrix<f64>,
    pivots: Vec<(usize, Pivot)>,
    perm: Vec<usize>,
}

impl LdlFactor {
    pub fn new(matrix: &DMatrix<f64>) -> Result<Self, FactorError> {
        assert!(matrix.is_square(), "matrix must be square");
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(FactorError::NonFinite);
        }
        let n = matrix.nrows();
        let mut a = matrix.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut pivots = Vec::new();
        let mut k = 0;
        while k < n {
            let akk = a[(k, k)].abs();
            let (r, lambda) = ((k + 1)..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });

            if akk.max(lambda) == 0.0 {
                return Err(FactorError::Singular { step: k });
            }

            let mut two_by_two = false;
            if akk < BK_ALPHA * lambda {
                let sigma = (k..n)
                    .filter(|&j| j != r)
                    .map(|j| a[(r, j)].abs())
                    .fold(0.0, f64::max);
                if akk * sigma >= BK_ALPHA * lambda * lambda {
                    // 1x1 pivot at k, no interchange
                } else if a[(r, r)].abs() >= BK_ALPHA * sigma {
                    swap_symmetric(&mut a, &mut perm, k, r);
                } else {
                    swap_symmetric(&mut a, &mut perm, k + 1, r);
                    two_by_two = true;
                }
            }

            if !two_by_two {
                let d = a[(k, k)];
                for i in (k + 1)..n {
                    for j in (k + 1)..=i {
                        let upd = a[(i, k)] * a[(j, k)] / d;
                        a[(i, j)] -= upd;
                        a[(j, i)] = a[(i, j)];
                    }
                }
                for i in (k + 1)..n {
                    a[(i, k)] /= d;
                }
                pivots.push((k, Pivot::One(d)));
                k += 1;
            } else {
                let (d11, d21, d22) = (a[(k, k)], a[(k + 1, k)], a[(k + 1, k + 1)]);
                let det = d11 * d22 - d21 * d21;
                if det == 0.0 {
                    return Err(FactorError::Singular { step: k });
                }
                let (e11, e21, e22) = (d22 / det, -d21 / det, d11 / det);
                let mut lrows = Vec::with_capacity(n.saturating_sub(k + 2));
                for i in (k + 2)..n {
                    let (c1, c2) = (a[(i, k)], a[(i, k + 1)]);
                    lrows.push((i, c1 * e11 + c2 * e21, c1 * e21 + c2 * e22));
                }
                for &(i, li1, li2) in &lrows {
                    for j in (k + 2)..=i {
                        let upd = li1 * a[(j, k)] + li2 * a[(j, k + 1)];
                        a[(i, j)] -= upd;
                        a[(j, i)] = a[(i, j)];
                    }
                }
                for &(i, li1, li2) in &lrows {
                    a[(i, k)] = li1;
                    a[(i, k + 1)] = li2;
                }
                a[(k + 1, k)] = 0.0;
                pivots.push((k, Pivot::Two([d11, d21, d22])));
                k += 2;
            }
        }
        Ok(Self { n, l: a, pivots, perm })
    }

    pub fn inertia(&self) -> Inertia {
        let mut inertia = Inertia::default();
        for (_, p) in &self.pivots {
            match *p {
                Pivot::One(d) => {
                    if d > 0.0 {
                        inertia.positive += 1
                    } else if d < 0.0 {
                        inertia.negative += 1
                    } else {
                        inertia.zero += 1
                    }
                }
                Pivot::Two([d11, d21, d22]) => {
                    let det = d11 * d22 - d21 * d21;
                    if det < 0.0 {
                        inertia.positive += 1;
                        inertia.negative += 1;
                    } else if d11 + d22 > 0.0 {
                        inertia.positive += 2;
                    } else {
                        inertia.negative += 2;
                    }
                }
            }
        }
        inertia
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // L y = P b
        for j in 0..n {
            let yj = y[j];
            for i in (j + 1)..n {
                if !self.is_block_partner(i, j) {
                    y[i] -= self.l[(i, j)] * yj;
                }
            }
        }
        // D z = y
        for &(k, p) in &self.pivots {
            match p {
                Pivot::One(d) => y[k] /= d,
                Pivot::Two([d11, d21, d22]) => {
                    let det = d11 * d22 - d21 * d21;
                    let (y1, y2) = (y[k], y[k + 1]);
                    y[k] = (d22 * y1 - d21 * y2) / det;
                    y[k + 1] = (d11 * y2 - d21 * y1) / det;
                }
            }
        }
        // Lᵀ w = z
        for j in (0..n).rev() {
            let mut acc = y[j];
            for i in (j + 1)..n {
                if !self.is_block_partner(i, j) {
                    acc -= self.l[(i, j)] * y[i];
                }
            }
            y[j] = acc;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    fn is_block_partner(&self, i: usize, j: usize) -> bool {
        i == j + 1
            && self
                .pivots
                .iter()
                .any(|&(k, p)| k == j && matches!(p, Pivot::Two(_)))
    }
}

fn swap_symmetric(a: &mut DMatrix<f64>, perm: &mut [usize], i: usize, j: usize) {
    if i == j {
        return;
    }
    a.swap_rows(i, j);
    a.swap_columns(i, j);
    perm.swap(i, j);
}

/// `‖A x − b‖₂ / ‖b‖₂` with doubled-precision row accumulation.
pub fn relative_residual(a: &DMatrix<f64>, x: &[f64], b: &[f64]) -> f64 {
    let r = residual(a, x, b);
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    let bn = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if bn == 0.0 {
        rn
    } else {
        rn / bn
    }
}

/// `b − A x` evaluated with Dot2.
fn residual(a: &DMatrix<f64>, x: &[f64], b: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut lhs = Vec::with_capacity(n + 1);
    let mut rhs = Vec::with_capacity(n + 1);
    (0..a.nrows())
        .map(|i| {
            lhs.clear();
            rhs.clear();
            lhs.extend((0..n).map(|j| -a[(i, j)]));
            rhs.extend_from_slice(x);
            lhs.push(1.0);
            rhs.push(b[i]);
            dot2(&lhs, &rhs)
        })
        .collect()
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

/// Spectral condition number `max|λ| / min|λ|`.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let ev = symmetric_eigenvalues(a);
    let max = ev.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = ev.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Symmetric Jacobi scaling `D A D` with `D = diag(1/√|a_ii|)`.
pub fn equilibrate(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let d: Vec<f64> = (0..a.nrows())
        .map(|i| {
            let v = a[(i, i)].abs();
            if v > 0.0 && v.is_finite() {
                1.0 / v.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let scaled = DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * d[i] * d[j]);
    (scaled, d)
}

#[derive(Debug, Clone, Copy)]
pub struct RefinementOptions {
    pub max_steps: usize,
}

impl Default for RefinementOptions {
    fn default() -> Self {
        Self { max_steps: 10 }
    }
}

#[derive(Debug, Clone)]
pub struct SymmetricSolution {
    pub x: Vec<f64>,
    /// Condition number of the equilibrated matrix that was factored.
    pub condition_number: f64,
    /// Relative residual on the system as given.
    pub residual: f64,
    pub refinement_steps: usize,
    pub inertia: Inertia,
}

/// Solves the symmetric system `A x = b` with equilibration and refinement.
pub fn solve_symmetric(
    a: &DMatrix<f64>,
    b: &[f64],
    opts: RefinementOptions,
) -> Result<SymmetricSolution, FactorError> {
    let (scaled, d) = equilibrate(a);
    let condition_number = condition_number(&scaled);
    let factor = LdlFactor::new(&scaled)?;
    let rhs: Vec<f64> = b.iter().zip(&d).map(|(v, s)| v * s).collect();

    let mut y = factor.solve(&rhs);
    let mut best_res = relative_residual(&scaled, &y, &rhs);
    let mut steps = 0;
    while steps < opts.max_steps && best_res > 0.0 {
        let r = residual(&scaled, &y, &rhs);
        let dy = factor.solve(&r);
        let candidate: Vec<f64> = y.iter().zip(&dy).map(|(u, v)| u + v).collect();
        let res = relative_residual(&scaled, &candidate, &rhs);
        steps += 1;
        if !(res < best_res) {
            break;
        }
        y = candidate;
        best_res = res;
    }

    let x: Vec<f64> = y.iter().zip(&d).map(|(v, s)| v * s).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(FactorError::NonFinite);
    }
    let residual = relative_residual(a, &x, b);
    Ok(SymmetricSolution {
        x,
        condition_number,
        residual,
        refinement_steps: steps,
        inertia: factor.inertia(),
    })
}
