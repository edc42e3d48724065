//! Hand-specified stand-in distributions for the trolley and teamwork
//! scenarios. They exist to exercise the pipeline, not to mimic any survey.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DataError, Dataset, TEAMWORK, TROLLEY};

const CHARACTERS: [&str; 6] = ["1", "5", "100", "Pet", "BF", "Fa"];

/// Stand-in trolley distribution.
///
/// Contexts are uniform over the 30 ordered pairs of distinct characters on
/// tracks A and B. The choice probability of each action is proportional to
/// its expected utility under `weights`, a linear utility over the outcome
/// variables `L_1, L_5, L_100, L_Pet, L_BF, L_Fa, L_Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrolleyParams {
    pub weights: [f64; 7],
    /// Chance that flipping the switch diverts the trolley.
    pub flip_success: f64,
    /// Chance that pushing the person on track B stops the trolley.
    pub push_success: f64,
}

impl Default for TrolleyParams {
    fn default() -> Self {
        TrolleyParams { weights: [0.15, 0.45, 0.9, 0.05, 0.5, 0.8, 0.6], flip_success: 0.6, push_success: 0.8 }
    }
}

impl TrolleyParams {
    /// Every world of positive probability with its probability, in a fixed
    /// order (context pair, then action, then outcome).
    pub fn joint(&self) -> Result<Vec<(Vec<bool>, f64)>, DataError> {
        for p in [self.flip_success, self.push_success] {
            if !(0.0..=1.0).contains(&p) {
                return Err(DataError::Parameter(format!("success probability {p} is not a probability")));
            }
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(DataError::Parameter("utility weights must be finite and nonnegative".into()));
        }
        let sc = TROLLEY.scenario();
        let v = |name: &str| sc.var(name).expect("trolley variable").index();
        let lives: Vec<usize> = CHARACTERS.iter().map(|c| v(&format!("L_{c}"))).collect();
        let you = v("L_Y");
        let mut out = Vec::new();
        let pairs = CHARACTERS.len() * (CHARACTERS.len() - 1);
        for (i, a) in CHARACTERS.iter().enumerate() {
            for (j, b) in CHARACTERS.iter().enumerate() {
                if i == j {
                    continue;
                }
                // (action, [(a lives, b lives, you live, probability)])
                let branches = [
                    ("I", vec![(false, true, true, 1.0)]),
                    ("F", vec![(true, false, true, self.flip_success), (false, true, true, 1.0 - self.flip_success)]),
                    ("P", vec![(true, false, true, self.push_success), (false, true, true, 1.0 - self.push_success)]),
                    ("S", vec![(true, true, false, 1.0)]),
                ];
                let utility = |(la, lb, ly): (bool, bool, bool)| {
                    self.weights[i] * la as u8 as f64 + self.weights[j] * lb as u8 as f64 + self.weights[6] * ly as u8 as f64
                };
                let eu: Vec<f64> = branches
                    .iter()
                    .map(|(_, os)| os.iter().map(|&(la, lb, ly, p)| p * utility((la, lb, ly))).sum())
                    .collect();
                let total: f64 = eu.iter().sum();
                for ((d, os), e) in branches.iter().zip(&eu) {
                    let p_d = if total > 0.0 { e / total } else { 0.25 };
                    for &(la, lb, ly, p_o) in os {
                        let p = p_d * p_o / pairs as f64;
                        if p <= 0.0 {
                            continue;
                        }
                        let mut w = vec![false; sc.num_vars()];
                        w[v(&format!("A_{a}"))] = true;
                        w[v(&format!("B_{b}"))] = true;
                        w[v(d)] = true;
                        w[lives[i]] = la;
                        w[lives[j]] = lb;
                        w[you] = ly;
                        out.push((w, p));
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Samples `n` rows from [`TrolleyParams::joint`].
pub fn generate_trolley(n: usize, seed: u64, params: &TrolleyParams) -> Result<Dataset, DataError> {
    let joint = params.joint()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n).map(|_| sample(&joint, &mut rng).clone()).collect();
    Dataset::new(&TROLLEY.scenario(), rows, None)
}

fn sample<'a>(joint: &'a [(Vec<bool>, f64)], rng: &mut ChaCha8Rng) -> &'a Vec<bool> {
    let mut r = rng.gen::<f64>() * joint.iter().map(|e| e.1).sum::<f64>();
    for (w, p) in joint {
        if r < *p {
            return w;
        }
        r -= p;
    }
    &joint.last().expect("nonempty joint").0
}

/// Samples `n` teamwork rows with a happiness utility column.
///
/// Task levels are uniform; each allocation strategy is used independently;
/// timeliness and quality scores (1 to 5) drift with the strategies used and
/// the task level.
pub fn generate_teamwork(n: usize, seed: u64) -> Result<Dataset, DataError> {
    let sc = TEAMWORK.scenario();
    let v = |name: &str| sc.var(name).expect("teamwork variable").index();
    let strategies = ["Other", "Load", "Uniform", "Skill", "Random"].map(v);
    let usage = [0.2, 0.5, 0.4, 0.6, 0.2];
    let timeliness_effect = [0.0, 0.8, 0.3, 0.4, -0.6];
    let quality_effect = [0.0, 0.2, 0.1, 0.9, -0.5];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut utilities = Vec::with_capacity(n);
    for _ in 0..n {
        let mut w = vec![false; sc.num_vars()];
        let level = rng.gen_range(1..=6);
        w[v(&format!("Level{level}"))] = true;
        let mut t_mean = 3.0 - 0.3 * (level as f64 - 3.5);
        let mut q_mean = 3.0 - 0.2 * (level as f64 - 3.5);
        for k in 0..strategies.len() {
            if rng.gen_bool(usage[k]) {
                w[strategies[k]] = true;
                t_mean += timeliness_effect[k];
                q_mean += quality_effect[k];
            }
        }
        let t = score(&mut rng, t_mean);
        let q = score(&mut rng, q_mean);
        w[v(&format!("T{t}"))] = true;
        w[v(&format!("Q{q}"))] = true;
        let noise: f64 = rng.gen_range(-0.5..0.5);
        rows.push(w);
        utilities.push(0.5 * (t + q) as f64 + noise);
    }
    Dataset::new(&sc, rows, Some(utilities))
}

/// A score in 1..=5 drawn with weights exp(-(k - mean)^2 / 2).
fn score(rng: &mut ChaCha8Rng, mean: f64) -> usize {
    let weights: Vec<f64> = (1..=5).map(|k| (-(k as f64 - mean).powi(2) / 2.0).exp()).collect();
    let mut r = rng.gen::<f64>() * weights.iter().sum::<f64>();
    for (k, w) in weights.iter().enumerate() {
        if r < *w {
            return k + 1;
        }
        r -= w;
    }
    5
}
