//! Log-space dynamic programs over a linear chain with three labels.

pub const L: usize = 3;

pub type Emissions = [f64; L];
pub type Transitions = [[f64; L]; L];

#[inline]
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Score of one label path.
pub fn path_score(em: &[Emissions], trans: &Transitions, path: &[usize]) -> f64 {
    let mut s = 0.0;
    for (t, &y) in path.iter().enumerate() {
        s += em[t][y];
        if t > 0 {
            s += trans[path[t - 1]][y];
        }
    }
    s
}

/// Forward scores `alpha[t][y]` and the log partition function.
pub fn forward(em: &[Emissions], trans: &Transitions) -> (Vec<Emissions>, f64) {
    let n = em.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    let mut alpha = vec![[0.0; L]; n];
    alpha[0] = em[0];
    for t in 1..n {
        for y in 0..L {
            let terms = [
                alpha[t - 1][0] + trans[0][y],
                alpha[t - 1][1] + trans[1][y],
                alpha[t - 1][2] + trans[2][y],
            ];
            alpha[t][y] = em[t][y] + log_sum_exp(&terms);
        }
    }
    let log_z = log_sum_exp(&alpha[n - 1]);
    (alpha, log_z)
}

/// Backward scores: `beta[t][y]` sums over the suffix after position `t`.
pub fn backward(em: &[Emissions], trans: &Transitions) -> Vec<Emissions> {
    let n = em.len();
    let mut beta = vec![[0.0; L]; n];
    for t in (0..n.saturating_sub(1)).rev() {
        for y in 0..L {
            let terms = [
                trans[y][0] + em[t + 1][0] + beta[t + 1][0],
                trans[y][1] + em[t + 1][1] + beta[t + 1][1],
                trans[y][2] + em[t + 1][2] + beta[t + 1][2],
            ];
            beta[t][y] = log_sum_exp(&terms);
        }
    }
    beta
}

/// Highest-scoring path. Ties resolve to the lower label at every decision.
pub fn viterbi(em: &[Emissions], trans: &Transitions) -> Vec<usize> {
    let n = em.len();
    if n == 0 {
        return Vec::new();
    }
    let mut delta = vec![[0.0; L]; n];
    let mut back = vec![[0usize; L]; n];
    delta[0] = em[0];
    for t in 1..n {
        for y in 0..L {
            let mut best = 0;
            let mut best_score = delta[t - 1][0] + trans[0][y];
            for p in 1..L {
                let s = delta[t - 1][p] + trans[p][y];
                if s > best_score {
                    best = p;
                    best_score = s;
                }
            }
            delta[t][y] = best_score + em[t][y];
            back[t][y] = best;
        }
    }
    let mut last = 0;
    for y in 1..L {
        if delta[n - 1][y] > delta[n - 1][last] {
            last = y;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = back[t][path[t]];
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse() {
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn uniform_chain() {
        let em = vec![[0.0; L]; 5];
        let trans = [[0.0; L]; L];
        let (_, log_z) = forward(&em, &trans);
        assert!((log_z - 5.0 * 3f64.ln()).abs() < 1e-12);
        assert_eq!(viterbi(&em, &trans), vec![0; 5]);
        let beta = backward(&em, &trans);
        assert!(
            (log_sum_exp(&[em[0][0] + beta[0][0], em[0][1] + beta[0][1], em[0][2] + beta[0][2]]) - log_z).abs() < 1e-12
        );
    }

    #[test]
    fn long_chains_stay_finite() {
        let em: Vec<Emissions> = (0..20_000).map(|i| [(i % 7) as f64 * 3.0, -2.5, 4.0]).collect();
        let trans = [[1.0, -3.0, 2.0], [0.5, 0.5, 0.5], [-4.0, 3.0, 0.0]];
        let (_, log_z) = forward(&em, &trans);
        assert!(log_z.is_finite());
        assert_eq!(viterbi(&em, &trans).len(), 20_000);
    }
}
