//! Conditional-independence tests: Fisher-z partial correlation for
//! continuous data and the G² likelihood-ratio test for categorical data.

use crate::error::{Error, Result};
use crate::linalg::{invert_spd, SymMatrix};
use crate::modelgen::{DataMatrix, DataValues};
use crate::special::{chi2_sf, normal_two_sided_p};

/// Outcome of one conditional-independence test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiTestResult {
    pub statistic: f64,
    pub p_value: f64,
    /// p_value > alpha
    pub independent: bool,
    /// Degrees of freedom (G²) or condition-set size (Fisher-z).
    pub df: usize,
    /// Set when the test could not be computed regularly (singular
    /// correlation submatrix); such results report dependence with p = 0.
    pub degenerate: bool,
}

/// Test selector used by learners and configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CiTestKind {
    FisherZ,
    G2,
}

/// Reusable state for Fisher-z tests on one dataset: the correlation
/// matrix is computed once.
pub struct FisherZContext {
    corr: SymMatrix,
    n: usize,
}

impl FisherZContext {
    pub fn new(data: &DataMatrix) -> Result<Self> {
        let values = match &data.values {
            DataValues::Continuous(v) => v,
            DataValues::Categorical { .. } => {
                return Err(Error::CiTest(
                    "fisher-z requires continuous data".to_string(),
                ))
            }
        };
        let p = data.p();
        let n = data.n;
        if n < 2 {
            return Err(Error::CiTest("fisher-z: need n >= 2".to_string()));
        }
        let mut mean = vec![0.0; p];
        for row in 0..n {
            for col in 0..p {
                mean[col] += values[row * p + col];
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let mut cov = SymMatrix::zeros(p);
        for a in 0..p {
            for b in a..p {
                let mut s = 0.0;
                for row in 0..n {
                    s += (values[row * p + a] - mean[a]) * (values[row * p + b] - mean[b]);
                }
                cov.set(a, b, s);
                cov.set(b, a, s);
            }
        }
        let mut corr = SymMatrix::zeros(p);
        for a in 0..p {
            for b in 0..p {
                let denom = (cov.get(a, a) * cov.get(b, b)).sqrt();
                corr.set(a, b, if denom > 0.0 { cov.get(a, b) / denom } else { f64::NAN });
            }
        }
        Ok(FisherZContext { corr, n })
    }

    /// Partial correlation of (i, j) given `cond` via inversion of the
    /// correlation submatrix.
    pub fn partial_correlation(&self, i: usize, j: usize, cond: &[usize]) -> Option<f64> {
        let mut idx = Vec::with_capacity(cond.len() + 2);
        idx.push(i);
        idx.push(j);
        idx.extend_from_slice(cond);
        let sub = self.corr.submatrix(&idx);
        let omega = invert_spd(&sub)?;
        let denom = (omega.get(0, 0) * omega.get(1, 1)).sqrt();
        if denom <= 0.0 || !denom.is_finite() {
            return None;
        }
        Some(-omega.get(0, 1) / denom)
    }

    pub fn test(&self, i: usize, j: usize, cond: &[usize], alpha: f64) -> Result<CiTestResult> {
        if i == j || cond.contains(&i) || cond.contains(&j) {
            return Err(Error::CiTest(format!(
                "fisher-z: overlapping arguments i={i}, j={j}, cond={cond:?}"
            )));
        }
        let s = cond.len();
        if self.n <= s + 3 {
            return Err(Error::CiTest(format!(
                "fisher-z: need n > |S|+3, got n={} with |S|={s}",
                self.n
            )));
        }
        let r = match self.partial_correlation(i, j, cond) {
            Some(r) if r.is_finite() => r,
            _ => {
                // singular submatrix: report as dependent
                return Ok(CiTestResult {
                    statistic: f64::INFINITY,
                    p_value: 0.0,
                    independent: false,
                    df: s,
                    degenerate: true,
                });
            }
        };
        let r = r.clamp(-1.0, 1.0);
        let z = ((self.n - s) as f64 - 3.0).sqrt() * 0.5 * ((1.0 + r) / (1.0 - r)).ln();
        let p_value = normal_two_sided_p(z);
        Ok(CiTestResult {
            statistic: z,
            p_value,
            independent: p_value > alpha,
            df: s,
            degenerate: false,
        })
    }
}

/// One-shot Fisher-z test.
pub fn fisher_z_test(
    data: &DataMatrix,
    i: usize,
    j: usize,
    cond: &[usize],
    alpha: f64,
) -> Result<CiTestResult> {
    FisherZContext::new(data)?.test(i, j, cond, alpha)
}

/// Reusable state for G² tests on one categorical dataset.
pub struct G2Context {
    codes: Vec<u32>,
    cards: Vec<usize>,
    n: usize,
    p: usize,
}

impl G2Context {
    pub fn new(data: &DataMatrix) -> Result<Self> {
        let (codes, cards) = match &data.values {
            DataValues::Categorical { codes, cards } => (codes.clone(), cards.clone()),
            DataValues::Continuous(_) => {
                return Err(Error::CiTest("g2 requires categorical data".to_string()))
            }
        };
        Ok(G2Context {
            codes,
            cards,
            n: data.n,
            p: data.p(),
        })
    }

    pub fn test(&self, i: usize, j: usize, cond: &[usize], alpha: f64) -> Result<CiTestResult> {
        if i == j || cond.contains(&i) || cond.contains(&j) {
            return Err(Error::CiTest(format!(
                "g2: overlapping arguments i={i}, j={j}, cond={cond:?}"
            )));
        }
        let ri = self.cards[i];
        let rj = self.cards[j];
        let strata: usize = cond.iter().map(|&k| self.cards[k]).product();
        let df = (ri - 1) * (rj - 1) * strata;
        if df == 0 {
            return Err(Error::CiTest(format!(
                "g2: zero degrees of freedom for pair ({i},{j})"
            )));
        }
        // contingency counts per (stratum, value_i, value_j)
        let mut counts = vec![0u64; strata * ri * rj];
        for row in 0..self.n {
            let mut cfg = 0usize;
            for &k in cond {
                cfg = cfg * self.cards[k] + self.codes[row * self.p + k] as usize;
            }
            let vi = self.codes[row * self.p + i] as usize;
            let vj = self.codes[row * self.p + j] as usize;
            counts[(cfg * ri + vi) * rj + vj] += 1;
        }
        let mut g2 = 0.0;
        for s in 0..strata {
            let cell = |a: usize, b: usize| counts[(s * ri + a) * rj + b];
            let total: u64 = (0..ri).map(|a| (0..rj).map(|b| cell(a, b)).sum::<u64>()).sum();
            if total == 0 {
                continue;
            }
            let row_marg: Vec<u64> = (0..ri)
                .map(|a| (0..rj).map(|b| cell(a, b)).sum())
                .collect();
            let col_marg: Vec<u64> = (0..rj)
                .map(|b| (0..ri).map(|a| cell(a, b)).sum())
                .collect();
            for a in 0..ri {
                for b in 0..rj {
                    let o = cell(a, b);
                    if o == 0 {
                        continue; // 0·ln0 = 0
                    }
                    let e = row_marg[a] as f64 * col_marg[b] as f64 / total as f64;
                    g2 += 2.0 * o as f64 * ((o as f64) / e).ln();
                }
            }
        }
        let p_value = chi2_sf(g2, df as f64);
        Ok(CiTestResult {
            statistic: g2,
            p_value,
            independent: p_value > alpha,
            df,
            degenerate: false,
        })
    }
}

/// One-shot G² test.
pub fn g2_test(
    data: &DataMatrix,
    i: usize,
    j: usize,
    cond: &[usize],
    alpha: f64,
) -> Result<CiTestResult> {
    G2Context::new(data)?.test(i, j, cond, alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;
    use rand_distr::{Distribution, Normal};

    fn cont(labels: usize, n: usize, values: Vec<f64>) -> DataMatrix {
        DataMatrix::continuous((1..=labels).map(|i| i.to_string()).collect(), n, values).unwrap()
    }

    #[test]
    fn fisher_z_zero_correlation() {
        // orthogonal columns by construction
        let values = vec![
            1.0, 1.0, //
            1.0, -1.0, //
            -1.0, 1.0, //
            -1.0, -1.0, //
            2.0, 0.0, //
            -2.0, 0.0,
        ];
        let data = cont(2, 6, values);
        let res = fisher_z_test(&data, 0, 1, &[], 0.05).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert_eq!(res.p_value, 1.0);
        assert!(res.independent);
        assert!(!res.degenerate);
    }

    #[test]
    fn fisher_z_perfect_correlation() {
        let n = 20;
        let mut values = Vec::new();
        for k in 0..n {
            let x = k as f64 * 0.37 - 3.0;
            values.push(x);
            values.push(x);
        }
        let data = cont(2, n, values);
        let res = fisher_z_test(&data, 0, 1, &[], 0.05).unwrap();
        assert!(res.p_value < 1e-10);
        assert!(!res.independent);
    }

    #[test]
    fn fisher_z_rejection_rate_under_null() {
        // x -> z -> y chain: x ⊥ y | z; rejection rate ≈ alpha
        let alpha = 0.05;
        let reps = 2000;
        let n = 5000;
        let mut rejections = 0;
        let normal = Normal::new(0.0, 1.0).unwrap();
        for rep in 0..reps {
            let mut rng = ChaCha12Rng::seed_from_u64(1000 + rep);
            let mut values = Vec::with_capacity(n * 3);
            for _ in 0..n {
                let x: f64 = normal.sample(&mut rng);
                let z = 0.8 * x + normal.sample(&mut rng);
                let y = 0.7 * z + normal.sample(&mut rng);
                values.extend_from_slice(&[x, z, y]);
            }
            let data = cont(3, n, values);
            let res = fisher_z_test(&data, 0, 2, &[1], alpha).unwrap();
            if !res.independent {
                rejections += 1;
            }
        }
        let rate = rejections as f64 / reps as f64;
        assert!((rate - alpha).abs() < 0.02, "rejection rate {rate}");
    }

    #[test]
    fn fisher_z_singular_is_degenerate() {
        // duplicated conditioning column makes the submatrix singular
        let n = 30;
        let mut values = Vec::new();
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..n {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            let c: f64 = rng.random();
            values.extend_from_slice(&[a, b, c, c]);
        }
        let data = cont(4, n, values);
        let res = fisher_z_test(&data, 0, 1, &[2, 3], 0.05).unwrap();
        assert!(res.degenerate);
        assert_eq!(res.p_value, 0.0);
        assert!(!res.independent);
    }

    #[test]
    fn fisher_z_sample_size_guard() {
        // n = 4 with |S| = 1 violates n > |S| + 3
        let data = cont(3, 4, vec![0.0; 12]);
        assert!(fisher_z_test(&data, 0, 1, &[2], 0.05).is_err());
    }

    fn cat(labels: usize, n: usize, codes: Vec<u32>, cards: Vec<usize>) -> DataMatrix {
        DataMatrix::categorical(
            (1..=labels).map(|i| i.to_string()).collect(),
            n,
            codes,
            cards,
        )
        .unwrap()
    }

    #[test]
    fn g2_perfect_independence() {
        // 2x2 table [[25,25],[25,25]]
        let mut codes = Vec::new();
        for a in 0..2u32 {
            for b in 0..2u32 {
                for _ in 0..25 {
                    codes.extend_from_slice(&[a, b]);
                }
            }
        }
        let data = cat(2, 100, codes, vec![2, 2]);
        let res = g2_test(&data, 0, 1, &[], 0.05).unwrap();
        assert_eq!(res.statistic, 0.0);
        assert_eq!(res.p_value, 1.0);
        assert_eq!(res.df, 1);
    }

    #[test]
    fn g2_df_formula() {
        // binary pair given one 3-level conditioner -> df = 3
        let codes = vec![0u32; 30]; // 10 rows x 3 cols of zeros
        let data = cat(3, 10, codes, vec![2, 2, 3]);
        let res = g2_test(&data, 0, 1, &[2], 0.05).unwrap();
        assert_eq!(res.df, 3);
    }

    #[test]
    fn g2_deterministic_relation() {
        // y = x balanced over n = 100: G² = 2n ln 2
        let mut codes = Vec::new();
        for k in 0..100u32 {
            let v = k % 2;
            codes.extend_from_slice(&[v, v]);
        }
        let data = cat(2, 100, codes, vec![2, 2]);
        let res = g2_test(&data, 0, 1, &[], 0.05).unwrap();
        assert!((res.statistic - 200.0 * 2f64.ln()).abs() < 1e-9);
        assert!(res.p_value < 1e-10);
    }

    #[test]
    fn g2_zero_df_rejected() {
        let codes = vec![0u32; 20];
        let data = cat(2, 10, codes, vec![1, 2]);
        assert!(g2_test(&data, 0, 1, &[], 0.05).is_err());
    }

    #[test]
    fn tests_symmetric_in_pair() {
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        let n = 200;
        let mut cvals = Vec::new();
        let mut codes = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.random();
            let b: f64 = rng.random();
            cvals.extend_from_slice(&[a, b]);
            codes.extend_from_slice(&[(a > 0.5) as u32, (b > 0.3) as u32]);
        }
        let dc = cont(2, n, cvals);
        let f1 = fisher_z_test(&dc, 0, 1, &[], 0.05).unwrap();
        let f2 = fisher_z_test(&dc, 1, 0, &[], 0.05).unwrap();
        assert!((f1.p_value - f2.p_value).abs() < 1e-12);
        let dd = cat(2, n, codes, vec![2, 2]);
        let g1 = g2_test(&dd, 0, 1, &[], 0.05).unwrap();
        let g2r = g2_test(&dd, 1, 0, &[], 0.05).unwrap();
        assert!((g1.p_value - g2r.p_value).abs() < 1e-12);
        assert!(g1.p_value >= 0.0 && g1.p_value <= 1.0);
    }
}
