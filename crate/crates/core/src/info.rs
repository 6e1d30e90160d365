//! Entropy primitives, in bits, with `0 log 0 = 0`.

/// Slack allowed when clamping probabilities produced by arithmetic.
pub const PROB_SLACK: f64 = 1e-15;

/// Kahan-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = KahanSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Clamp a probability computed by arithmetic back into `[0, 1]`.
///
/// Values further than [`PROB_SLACK`] outside the interval are left alone so
/// that genuine errors stay visible to callers that check ranges.
#[inline]
pub fn clamp_prob(p: f64) -> f64 {
    if (-PROB_SLACK..0.0).contains(&p) {
        0.0
    } else if p > 1.0 && p <= 1.0 + PROB_SLACK {
        1.0
    } else {
        p
    }
}

/// `-p log2 p`, zero at `p = 0`.
#[inline]
pub fn neg_plogp(p: f64) -> f64 {
    let p = clamp_prob(p);
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Shannon entropy of a (not necessarily normalized) mass vector.
pub fn entropy(masses: &[f64]) -> f64 {
    masses.iter().map(|&p| neg_plogp(p)).collect::<KahanSum>().value()
}

/// Binary entropy function `h_b(p)`.
#[inline]
pub fn binary_entropy(p: f64) -> f64 {
    neg_plogp(p) + neg_plogp(1.0 - p)
}

/// Mutual information `I(X;Y)` of an input law through a channel matrix
/// `channel[x][y] = P(y|x)`.
pub fn mutual_information(input: &[f64], channel: &[Vec<f64>]) -> f64 {
    let n_out = channel.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n_out];
    let mut cond = KahanSum::new();
    for (px, row) in input.iter().zip(channel) {
        if *px <= 0.0 {
            continue;
        }
        for (o, w) in out.iter_mut().zip(row) {
            *o += px * w;
        }
        cond.add(px * entropy(row));
    }
    (entropy(&out) - cond.value()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.11) - binary_entropy(0.89)).abs() < 1e-15);
    }

    #[test]
    fn clamp_only_touches_slack() {
        assert_eq!(clamp_prob(-1e-16), 0.0);
        assert_eq!(clamp_prob(1.0 + 1e-16), 1.0);
        assert_eq!(clamp_prob(-0.1), -0.1);
    }

    #[test]
    fn kahan_beats_naive_sum() {
        let vals = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 10_000));
        let k: KahanSum = vals.collect();
        assert!((k.value() - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn bsc_mutual_information() {
        let p = 0.1;
        let ch = vec![vec![1.0 - p, p], vec![p, 1.0 - p]];
        let mi = mutual_information(&[0.5, 0.5], &ch);
        assert!((mi - (1.0 - binary_entropy(p))).abs() < 1e-14);
    }
}
