use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionProbability {
    pub action: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionCost {
    pub action: String,
    pub cost: f64,
}

/// The comparison of the queried action with one alternative.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pairwise {
    pub alternative: String,
    pub delta: f64,
    /// c(alternative) − c(action)
    pub cost_difference: f64,
    pub db: f64,
}

/// Everything computed for a blame query.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlameReport {
    pub action: String,
    pub event: String,
    pub n: f64,
    pub n_floor: f64,
    pub n_margin: f64,
    /// Pr(event | do(·)) for the action first, then each alternative.
    pub probabilities: Vec<ActionProbability>,
    /// Costs of every action of the group with positive support.
    pub costs: Vec<ActionCost>,
    pub pairwise: Vec<Pairwise>,
    pub overall_db: f64,
    pub overall_alternative: Option<String>,
    /// `do(action): context` for every weighted context the action never occurs in.
    pub skipped: Vec<String>,
    pub worlds_visited: usize,
    pub max_worlds_per_sweep: usize,
    pub sentences: Vec<String>,
}

impl BlameReport {
    pub(crate) fn render_sentences(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .pairwise
            .iter()
            .map(|p| {
                format!(
                    "Agent is blameworthy to degree {:.3} for {}, relative to alternative {}.",
                    p.db, self.event, p.alternative
                )
            })
            .collect();
        if let Some(alt) = &self.overall_alternative {
            out.push(format!(
                "Overall, agent is blameworthy to degree {:.3} for {} by doing {} (maximized by alternative {}).",
                self.overall_db, self.event, self.action, alt
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
