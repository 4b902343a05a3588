//! Brute-force posterior over exchangeability matrices in exact rational arithmetic.
//!
//! Shapes and prior probabilities are rationals, so every beta-function ratio
//! B(a + s, b + f) / B(a, b) = (a)_s (b)_f / (a + b)_(s+f) is a ratio of rising
//! factorials and the whole posterior is exact. Shares no code with the library.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn rising(x: &BigRational, n: u64) -> BigRational {
    let mut out = BigRational::one();
    let mut term = x.clone();
    for _ in 0..n {
        out *= &term;
        term += BigRational::one();
    }
    out
}

/// B(a + s, b + f) / B(a, b).
pub fn beta_ratio(a: &BigRational, b: &BigRational, s: u64, f: u64) -> BigRational {
    rising(a, s) * rising(b, f) / rising(&(a + b), s + f)
}

#[derive(Clone, Debug)]
pub struct OracleCase {
    pub responses: Vec<u64>,
    pub sizes: Vec<u64>,
    pub shape1: Vec<BigRational>,
    pub shape2: Vec<BigRational>,
    /// Prior link probability of each pair (i, j), i < j, row-major.
    pub cell_prior: Vec<BigRational>,
}

impl OracleCase {
    pub fn baskets(&self) -> usize {
        self.responses.len()
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let j = self.baskets();
        (0..j).flat_map(|r| ((r + 1)..j).map(move |c| (r, c))).collect()
    }

    /// Unnormalized posterior weight of the matrix whose linked pairs are the set bits of `mask`.
    fn weight(&self, mask: u64) -> BigRational {
        let j = self.baskets();
        let pairs = self.pairs();
        let mut linked = vec![vec![false; j]; j];
        let mut w = BigRational::one();
        for (bit, &(r, c)) in pairs.iter().enumerate() {
            let on = mask >> bit & 1 == 1;
            linked[r][c] = on;
            linked[c][r] = on;
            let p = &self.cell_prior[bit];
            w *= if on { p.clone() } else { BigRational::one() - p };
        }
        for row in 0..j {
            let mut s = 0;
            let mut f = 0;
            for k in 0..j {
                if k == row || linked[row][k] {
                    s += self.responses[k];
                    f += self.sizes[k] - self.responses[k];
                } else {
                    w *= beta_ratio(&self.shape1[k], &self.shape2[k], self.responses[k], self.sizes[k] - self.responses[k]);
                }
            }
            w *= beta_ratio(&self.shape1[row], &self.shape2[row], s, f);
        }
        w
    }

    /// Exact posterior exchangeability probabilities.
    pub fn pep(&self) -> Vec<Vec<f64>> {
        let j = self.baskets();
        let pairs = self.pairs();
        let mut total = BigRational::zero();
        let mut linked_mass = vec![BigRational::zero(); pairs.len()];
        for mask in 0..(1u64 << pairs.len()) {
            let w = self.weight(mask);
            for (bit, mass) in linked_mass.iter_mut().enumerate() {
                if mask >> bit & 1 == 1 {
                    *mass += &w;
                }
            }
            total += w;
        }
        let mut out = vec![vec![1.0; j]; j];
        for (bit, &(r, c)) in pairs.iter().enumerate() {
            let p = (&linked_mass[bit] / &total).to_f64().unwrap();
            out[r][c] = p;
            out[c][r] = p;
        }
        out
    }

    pub fn shape1_f64(&self) -> Vec<f64> {
        self.shape1.iter().map(|x| x.to_f64().unwrap()).collect()
    }

    pub fn shape2_f64(&self) -> Vec<f64> {
        self.shape2.iter().map(|x| x.to_f64().unwrap()).collect()
    }

    pub fn prior_matrix(&self) -> Vec<Vec<f64>> {
        let j = self.baskets();
        let mut m = vec![vec![1.0; j]; j];
        for (bit, &(r, c)) in self.pairs().iter().enumerate() {
            let p = self.cell_prior[bit].to_f64().unwrap();
            m[r][c] = p;
            m[c][r] = p;
        }
        m
    }
}

/// Small deterministic generator so the cases do not depend on the library's RNG.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

/// Random case with 2 or 3 baskets, up to 20 patients each, half-integer shapes
/// and prior link probabilities from {1/4, 1/2, 3/4}.
pub fn random_case(rng: &mut SplitMix) -> OracleCase {
    let j = 2 + rng.below(2) as usize;
    let sizes: Vec<u64> = (0..j).map(|_| 1 + rng.below(20)).collect();
    let responses = sizes.iter().map(|&n| rng.below(n + 1)).collect();
    let half = |rng: &mut SplitMix| rat(1 + rng.below(4) as i64, 2);
    let shape1 = (0..j).map(|_| half(rng)).collect();
    let shape2 = (0..j).map(|_| half(rng)).collect();
    let cell_prior = (0..j * (j - 1) / 2).map(|_| rat(1 + rng.below(3) as i64, 4)).collect();
    OracleCase { responses, sizes, shape1, shape2, cell_prior }
}
