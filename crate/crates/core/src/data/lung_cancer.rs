//! Synthetic lung-cancer staging data.
//!
//! Patients either have mediastinal metastases or not. The recommended
//! strategy is to always scan, to follow a positive (or missing) scan with a
//! mediastinoscopy and to skip it after a negative scan. Each decision point
//! follows the strategy with probability `adherence`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DataError, Dataset, LUNG_CANCER};

/// Medical parameters of the staging process. None of these are fixtures;
/// they only need to be plausible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LungCancerParams {
    pub prevalence: f64,
    pub ct_sensitivity: f64,
    pub ct_specificity: f64,
    pub m_sensitivity: f64,
    pub m_specificity: f64,
    pub m_mortality: f64,
    pub thoracotomy_mortality: f64,
    pub radiotherapy_mortality: f64,
    /// Life expectancy (years) after a thoracotomy without metastases.
    pub le_cured: f64,
    /// Life expectancy after a thoracotomy with metastases.
    pub le_futile_surgery: f64,
    /// Life expectancy after radiotherapy with metastases.
    pub le_radiotherapy_mm: f64,
    /// Life expectancy after radiotherapy without metastases.
    pub le_radiotherapy_clear: f64,
}

impl Default for LungCancerParams {
    fn default() -> Self {
        LungCancerParams {
            prevalence: 0.3,
            ct_sensitivity: 0.85,
            ct_specificity: 0.80,
            m_sensitivity: 0.90,
            m_specificity: 0.99,
            m_mortality: 0.01,
            thoracotomy_mortality: 0.04,
            radiotherapy_mortality: 0.01,
            le_cured: 4.45,
            le_futile_surgery: 1.8,
            le_radiotherapy_mm: 1.8,
            le_radiotherapy_clear: 2.64,
        }
    }
}

impl LungCancerParams {
    fn validate(&self) -> Result<(), DataError> {
        let probs = [
            ("prevalence", self.prevalence),
            ("ct_sensitivity", self.ct_sensitivity),
            ("ct_specificity", self.ct_specificity),
            ("m_sensitivity", self.m_sensitivity),
            ("m_specificity", self.m_specificity),
            ("m_mortality", self.m_mortality),
            ("thoracotomy_mortality", self.thoracotomy_mortality),
            ("radiotherapy_mortality", self.radiotherapy_mortality),
        ];
        for (name, p) in probs {
            if !(0.0..=1.0).contains(&p) {
                return Err(DataError::Parameter(format!("{name} = {p} is not a probability")));
            }
        }
        let les = [self.le_cured, self.le_futile_surgery, self.le_radiotherapy_mm, self.le_radiotherapy_clear];
        if les.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(DataError::Parameter("life expectancies must be finite and nonnegative".into()));
        }
        Ok(())
    }
}

/// Samples `n` patients. Rows carry a life-expectancy utility column.
pub fn generate_lung_cancer(n: usize, seed: u64, adherence: f64, params: &LungCancerParams) -> Result<Dataset, DataError> {
    if !(adherence > 0.0 && adherence <= 1.0) {
        return Err(DataError::Parameter(format!("adherence {adherence} is outside (0, 1]")));
    }
    params.validate()?;
    let sc = LUNG_CANCER.scenario();
    let idx = |name: &str| sc.var(name).expect("lung cancer variable").index();
    let [mm, ct_pos, ct_neg, ct_na, m_pos, m_neg, m_na, ct, m, t, s_dp, s_t] =
        ["MM", "CT_pos", "CT_neg", "CT_na", "M_pos", "M_neg", "M_na", "CT", "M", "T", "S_DP", "S_T"].map(idx);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    let mut utilities = Vec::with_capacity(n);
    for _ in 0..n {
        let mut w = vec![false; sc.num_vars()];
        let has_mm = rng.gen_bool(params.prevalence);
        w[mm] = has_mm;

        let do_ct = follow(&mut rng, true, adherence);
        w[ct] = do_ct;
        let mut scan_positive = None;
        if do_ct {
            let p_pos = if has_mm { params.ct_sensitivity } else { 1.0 - params.ct_specificity };
            let pos = rng.gen_bool(p_pos);
            scan_positive = Some(pos);
            w[if pos { ct_pos } else { ct_neg }] = true;
        } else {
            w[ct_na] = true;
        }

        let do_m = follow(&mut rng, scan_positive != Some(false), adherence);
        w[m] = do_m;
        let mut biopsy_positive = None;
        let mut survived_diagnosis = true;
        if do_m {
            let p_pos = if has_mm { params.m_sensitivity } else { 1.0 - params.m_specificity };
            let pos = rng.gen_bool(p_pos);
            biopsy_positive = Some(pos);
            w[if pos { m_pos } else { m_neg }] = true;
            survived_diagnosis = !rng.gen_bool(params.m_mortality);
        } else {
            w[m_na] = true;
        }
        w[s_dp] = survived_diagnosis;

        // the most recent test result decides treatment; with none, operate
        let operate = match (biopsy_positive, scan_positive) {
            (Some(pos), _) => !pos,
            (None, Some(pos)) => !pos,
            (None, None) => follow(&mut rng, true, adherence),
        };
        w[t] = operate;

        let survived_treatment = survived_diagnosis
            && !rng.gen_bool(if operate { params.thoracotomy_mortality } else { params.radiotherapy_mortality });
        w[s_t] = survived_treatment;

        let le = match (survived_treatment, operate, has_mm) {
            (false, _, _) => 0.0,
            (true, true, false) => params.le_cured,
            (true, true, true) => params.le_futile_surgery,
            (true, false, true) => params.le_radiotherapy_mm,
            (true, false, false) => params.le_radiotherapy_clear,
        };
        rows.push(w);
        utilities.push(le);
    }
    Dataset::new(&sc, rows, Some(utilities))
}

fn follow(rng: &mut ChaCha8Rng, recommended: bool, adherence: f64) -> bool {
    if adherence >= 1.0 || rng.gen_bool(adherence) {
        recommended
    } else {
        !recommended
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{compile_scenario, VtreeStrategy};

    fn col(d: &Dataset, name: &str) -> usize {
        d.names().iter().position(|n| n == name).unwrap()
    }

    #[test]
    fn rows_are_models() {
        let d = generate_lung_cancer(2000, 7, 0.9, &LungCancerParams::default()).unwrap();
        let c = compile_scenario(&LUNG_CANCER.scenario(), VtreeStrategy::Balanced).unwrap();
        assert!(d.rows().iter().all(|r| c.is_model(r)));
    }

    #[test]
    fn full_adherence_follows_the_strategy() {
        let d = generate_lung_cancer(1000, 3, 1.0, &LungCancerParams::default()).unwrap();
        let (ct, ct_pos, m) = (col(&d, "CT"), col(&d, "CT_pos"), col(&d, "M"));
        for r in d.rows() {
            assert!(r[ct]);
            assert_eq!(r[m], r[ct_pos]);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let p = LungCancerParams::default();
        let a = generate_lung_cancer(500, 11, 0.9, &p).unwrap();
        assert_eq!(a, generate_lung_cancer(500, 11, 0.9, &p).unwrap());
        assert_ne!(a, generate_lung_cancer(500, 12, 0.9, &p).unwrap());
    }

    #[test]
    fn decision_frequencies_converge() {
        let p = LungCancerParams::default();
        let d = generate_lung_cancer(100_000, 5, 0.9, &p).unwrap();
        let n = d.len() as f64;
        let (ct, ct_pos, ct_neg, m) = (col(&d, "CT"), col(&d, "CT_pos"), col(&d, "CT_neg"), col(&d, "M"));
        let freq = |f: &dyn Fn(&Vec<bool>) -> bool| d.rows().iter().filter(|r| f(r)).count() as f64;
        assert!((freq(&|r| r[ct]) / n - 0.9).abs() < 0.02);
        let after_pos = freq(&|r| r[ct_pos] && r[m]) / freq(&|r| r[ct_pos]);
        let after_neg = freq(&|r| r[ct_neg] && r[m]) / freq(&|r| r[ct_neg]);
        let without_scan = freq(&|r| !r[ct] && r[m]) / freq(&|r| !r[ct]);
        assert!((after_pos - 0.9).abs() < 0.02);
        assert!((after_neg - 0.1).abs() < 0.02);
        assert!((without_scan - 0.9).abs() < 0.02);
        let mm = freq(&|r| r[0]) / n;
        assert!((mm - p.prevalence).abs() < 0.02);
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = LungCancerParams::default();
        assert!(generate_lung_cancer(1, 0, 0.0, &p).is_err());
        assert!(generate_lung_cancer(1, 0, 1.5, &p).is_err());
        let bad = LungCancerParams { ct_sensitivity: 1.2, ..p };
        assert!(generate_lung_cancer(1, 0, 0.9, &bad).is_err());
    }
}
