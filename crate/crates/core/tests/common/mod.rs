//! Independent reference computations shared by the integration tests:
//! exact rational Hankel solves, direct quadrature of closed-form
//! densities, and a Kolmogorov–Smirnov helper.
#![allow(dead_code)]

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

fn factorial(k: usize) -> BigRational {
    (1..=k as i64).fold(BigRational::one(), |acc, i| acc * rat(i, 1))
}

fn binomial(n: usize, k: usize) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, i| acc * rat((n - i) as i64, (i + 1) as i64))
}

/// `k!(1 + 2ηk)` with `η = p/q`.
pub fn fock_moments(p: i64, q: i64, k_max: usize) -> Vec<BigRational> {
    let eta = rat(p, q);
    (0..=k_max).map(|k| factorial(k) * (BigRational::one() + rat(2 * k as i64, 1) * &eta)).collect()
}

/// `k!(2n̄ + 1)^k` with `n̄ = p/q`.
pub fn thermal_moments(p: i64, q: i64, k_max: usize) -> Vec<BigRational> {
    let v = rat(2 * p + q, q);
    (0..=k_max).map(|k| factorial(k) * num_traits::pow(v.clone(), k)).collect()
}

/// `Σ_j C(k,j) k!/j! (2|α|²)^j` with `|α|² = p/q`.
pub fn coherent_moments(p: i64, q: i64, k_max: usize) -> Vec<BigRational> {
    let a = rat(2 * p, q);
    (0..=k_max)
        .map(|k| {
            (0..=k).fold(BigRational::zero(), |acc, j| {
                acc + binomial(k, j) * factorial(k) / factorial(j) * num_traits::pow(a.clone(), j)
            })
        })
        .collect()
}

pub fn to_f64(v: &[BigRational]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap()).collect()
}

/// Exact solution of `Σ_l mu[j+l] C_l = −mu[j]`, `j, l = 1..=N/2`, and the
/// minimum `1 + Σ_j C_j mu[j]`, by fraction-exact Gauss–Jordan elimination.
pub fn exact_min_f(mu: &[BigRational], order: usize) -> (Vec<BigRational>, BigRational) {
    let m = order / 2;
    let mut a: Vec<Vec<BigRational>> = (1..=m)
        .map(|j| {
            let mut row: Vec<BigRational> = (1..=m).map(|l| mu[j + l].clone()).collect();
            row.push(-mu[j].clone());
            row
        })
        .collect();
    for col in 0..m {
        let pivot = (col..m).find(|&r| !a[r][col].is_zero()).expect("nonsingular system");
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..m {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..=m {
                    let delta = &f * &a[col][c];
                    a[r][c] = &a[r][c] - delta;
                }
            }
        }
    }
    let c: Vec<BigRational> = a.iter().map(|row| row[m].clone()).collect();
    let min = c.iter().enumerate().fold(BigRational::one(), |acc, (j, cj)| acc + cj * &mu[j + 1]);
    (c, min)
}

/// `∫_a^b f` by composite double-exponential quadrature on `panels` pieces.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| quadrature::double_exponential::integrate(&f, a + i as f64 * h, a + (i + 1) as f64 * h, 1e-14).integral)
        .sum()
}

/// `∫ 2πr W(r) r^{2k} dr` over `[0, 30]`.
pub fn wigner_moment(state: &nonclassical::StateSpec, k: usize) -> f64 {
    integrate(
        |r| 2.0 * std::f64::consts::PI * r * nonclassical::states::wigner_radial(state, r) * r.powi(2 * k as i32),
        0.0,
        30.0,
        120,
    )
}

/// `∫ x^{2k} p(x) dx` as `2∫_0^{16}` (the marginals are even).
pub fn marginal_moment(state: &nonclassical::StateSpec, k: usize) -> f64 {
    2.0 * integrate(|x| x.powi(2 * k as i32) * nonclassical::states::marginal_pdf(state, x), 0.0, 16.0, 64)
}

/// Tabulated CDF of `marginal_pdf` on a uniform grid, by cumulative
/// quadrature; evaluated with linear interpolation.
pub struct TabulatedCdf {
    lo: f64,
    h: f64,
    values: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(state: &nonclassical::StateSpec, lo: f64, hi: f64, cells: usize) -> Self {
        let h = (hi - lo) / cells as f64;
        let mut values = Vec::with_capacity(cells + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for i in 0..cells {
            let a = lo + i as f64 * h;
            acc += quadrature::double_exponential::integrate(
                |x| nonclassical::states::marginal_pdf(state, x),
                a,
                a + h,
                1e-13,
            )
            .integral;
            values.push(acc);
        }
        Self { lo, h, values }
    }

    pub fn total(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let pos = (x - self.lo) / self.h;
        if pos <= 0.0 {
            return 0.0;
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return self.total();
        }
        let t = pos - i as f64;
        self.values[i] + t * (self.values[i + 1] - self.values[i])
    }
}

/// Two-sided Kolmogorov–Smirnov statistic `D_n`.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic Kolmogorov critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
