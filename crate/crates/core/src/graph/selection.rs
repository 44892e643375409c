use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;

use super::{validate_epsilon, DegreeSequence};
use crate::sympoly::log_add_exp;
use crate::Result;

/// The contact-selection law of a degree sequence: a source of target degree
/// `q` draws `min(q, N)` distinct partners from the `N` users with target
/// degree below `q`, with `P(C) ∝ Π_{v∈C} k_v^-ε`.
#[derive(Debug, Clone)]
pub struct SelectionLaw {
    degrees: DegreeSequence,
    epsilon: f64,
    /// Users grouped by target degree, ascending.
    classes: Vec<(u32, Vec<u32>)>,
    ln_factorial: Vec<f64>,
}

impl SelectionLaw {
    pub fn new(degrees: DegreeSequence, epsilon: f64) -> Result<Self> {
        validate_epsilon(epsilon)?;
        let mut grouped: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (i, &k) in degrees.as_slice().iter().enumerate() {
            grouped.entry(k).or_default().push(i as u32);
        }
        let n = degrees.len();
        let mut ln_factorial = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        ln_factorial.push(0.0);
        for k in 1..=n {
            acc += (k as f64).ln();
            ln_factorial.push(acc);
        }
        Ok(Self {
            degrees,
            epsilon,
            classes: grouped.into_iter().collect(),
            ln_factorial,
        })
    }

    pub fn degrees(&self) -> &DegreeSequence {
        &self.degrees
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn classes(&self) -> &[(u32, Vec<u32>)] {
        &self.classes
    }

    /// `ln k^-ε`.
    pub fn log_weight(&self, degree: u32) -> f64 {
        -self.epsilon * f64::from(degree).ln()
    }

    /// Number of classes with degree strictly below `q`.
    fn pool_classes(&self, q: u32) -> usize {
        self.classes.partition_point(|(k, _)| *k < q)
    }

    /// Users with target degree strictly below `q`, grouped by class.
    pub fn pool(&self, q: u32) -> Vec<u32> {
        self.classes[..self.pool_classes(q)]
            .iter()
            .flat_map(|(_, m)| m.iter().copied())
            .collect()
    }

    pub fn pool_size(&self, q: u32) -> usize {
        self.classes[..self.pool_classes(q)]
            .iter()
            .map(|(_, m)| m.len())
            .sum()
    }

    /// Size of the contact set a source of degree `q` selects.
    pub fn set_size(&self, q: u32) -> usize {
        (q as usize).min(self.pool_size(q))
    }

    fn ln_choose(&self, m: usize, j: usize) -> f64 {
        self.ln_factorial[m] - self.ln_factorial[j] - self.ln_factorial[m - j]
    }

    /// Prepares exact sampling of contact sets for sources of degree `q`.
    pub fn sampler(&self, q: u32) -> ContactSampler<'_> {
        let c = self.pool_classes(q);
        let classes = &self.classes[..c];
        let size = self.set_size(q);
        // suffix[i][j] = ln of the order-j symmetric polynomial over the users
        // in classes i.., grouped: Π_c (1 + w_c t)^{m_c}.
        let width = size + 1;
        let mut suffix = vec![f64::NEG_INFINITY; (c + 1) * width];
        suffix[c * width] = 0.0;
        for i in (0..c).rev() {
            let (k, members) = &classes[i];
            let m = members.len();
            let lw = self.log_weight(*k);
            for j in 0..=size {
                let mut acc = f64::NEG_INFINITY;
                for t in 0..=m.min(j) {
                    let rest = suffix[(i + 1) * width + j - t];
                    if rest != f64::NEG_INFINITY {
                        acc = log_add_exp(acc, self.ln_choose(m, t) + t as f64 * lw + rest);
                    }
                }
                suffix[i * width + j] = acc;
            }
        }
        ContactSampler {
            law: self,
            classes,
            size,
            suffix,
        }
    }

    /// Draws one contact set for a source of degree `q`.
    pub fn sample_contacts<R: Rng + ?Sized>(&self, q: u32, rng: &mut R) -> Vec<u32> {
        self.sampler(q).sample(rng)
    }
}

/// Exact conditional-Poisson sampler for one source degree.
///
/// Class counts `n_c` are drawn sequentially with
/// `P(n_c = t | r left) ∝ C(m_c, t) w_c^t σ_{r-t}(classes after c)`, then
/// members are chosen uniformly within each class.
#[derive(Debug, Clone)]
pub struct ContactSampler<'a> {
    law: &'a SelectionLaw,
    classes: &'a [(u32, Vec<u32>)],
    size: usize,
    suffix: Vec<f64>,
}

impl ContactSampler<'_> {
    pub fn set_size(&self) -> usize {
        self.size
    }

    /// A sorted contact set of [`Self::set_size`] users.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u32> {
        let width = self.size + 1;
        let mut left = self.size;
        let mut out = Vec::with_capacity(self.size);
        for (i, (k, members)) in self.classes.iter().enumerate() {
            if left == 0 {
                break;
            }
            let m = members.len();
            let lw = self.law.log_weight(*k);
            let total = self.suffix[i * width + left];
            let u: f64 = rng.random();
            let mut cum = 0.0;
            let hi = m.min(left);
            let mut take = hi;
            for t in 0..=hi {
                let rest = self.suffix[(i + 1) * width + left - t];
                if rest == f64::NEG_INFINITY {
                    continue;
                }
                cum += (self.law.ln_choose(m, t) + t as f64 * lw + rest - total).exp();
                if u < cum {
                    take = t;
                    break;
                }
            }
            // Rounding can leave `cum` a hair below 1; the last feasible count
            // absorbs the remainder.
            if u >= cum {
                take = (0..=hi)
                    .rev()
                    .find(|&t| self.suffix[(i + 1) * width + left - t] != f64::NEG_INFINITY)
                    .unwrap_or(0);
            }
            if take == m {
                out.extend_from_slice(members);
            } else if take > 0 {
                out.extend(index::sample(rng, m, take).iter().map(|j| members[j]));
            }
            left -= take;
        }
        debug_assert_eq!(left, 0);
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SimRng;
    use crate::sympoly::{inclusion_probabilities, WeightVector};
    use rand::SeedableRng;

    fn law(d: &[u32], eps: f64) -> SelectionLaw {
        SelectionLaw::new(DegreeSequence::new(d.to_vec()).unwrap(), eps).unwrap()
    }

    #[test]
    fn pools_are_strictly_lower() {
        let l = law(&[3, 1, 2, 2, 1, 4], 2.5);
        assert_eq!(l.pool(1), Vec::<u32>::new());
        assert_eq!(l.pool(2), vec![1, 4]);
        assert_eq!(l.pool(3), vec![1, 4, 2, 3]);
        assert_eq!(l.set_size(4), 4);
        assert_eq!(l.set_size(2), 2);
    }

    #[test]
    fn whole_pool_when_pool_is_small() {
        let l = law(&[5, 1, 2, 1, 1, 1], 2.5);
        let mut rng = SimRng::seed_from_u64(3);
        assert_eq!(l.sample_contacts(5, &mut rng), vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn inclusion_frequencies_match_exact_marginals() {
        // Pool for q = 3: four degree-1 and three degree-2 users.
        let degrees = [3, 1, 1, 2, 2, 2, 1, 1, 3];
        let l = law(&degrees, 2.7);
        let pool = l.pool(3);
        let q = WeightVector::from_degrees(pool.iter().map(|&v| degrees[v as usize]), 2.7).unwrap();
        let exact = inclusion_probabilities(&q, 3).unwrap();
        let sampler = l.sampler(3);
        let mut rng = SimRng::seed_from_u64(11);
        let trials = 200_000;
        let mut hits = vec![0usize; degrees.len()];
        for _ in 0..trials {
            for v in sampler.sample(&mut rng) {
                hits[v as usize] += 1;
            }
        }
        for (idx, &v) in pool.iter().enumerate() {
            let freq = hits[v as usize] as f64 / trials as f64;
            let p = exact[idx];
            let se = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((freq - p).abs() < 5.0 * se, "v={v} freq={freq} p={p}");
        }
    }
}
