use crate::logic::{parse_formula, Action, Formula, PartialAssignment, Scenario};

use super::{BlameError, ContextDistribution};

/// A blame question: action, event, alternatives, N and contexts.
///
/// Text form, one `key = value` per line:
///
/// ```text
/// action = F
/// alternatives = I S
/// event = !(L_5)
/// N = 0.9
/// contexts = given A_5 B_1
/// ```
///
/// `alternatives` defaults to the rest of the action's group and `N` to
/// 1.1 times the cost floor. `contexts` is `model`, `given <evidence>` or
/// `table`, the latter followed by `context <weight> <true names>` lines.
#[derive(Debug, Clone, PartialEq)]
pub struct BlameQuery {
    pub action: Action,
    pub alternatives: Option<Vec<Action>>,
    pub event: Formula,
    pub n: Option<f64>,
    pub contexts: ContextDistribution,
}

impl BlameQuery {
    pub fn new(action: Action, event: Formula) -> Self {
        BlameQuery { action, alternatives: None, event, n: None, contexts: ContextDistribution::Model }
    }

    pub fn parse(text: &str, scenario: &Scenario) -> Result<BlameQuery, BlameError> {
        let mut action = None;
        let mut alternatives = None;
        let mut event = None;
        let mut n = None;
        let mut contexts = ContextDistribution::Model;
        let mut table = String::new();
        let mut tabular = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| BlameError::Parse { line, message };
            let raw = raw.trim();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            if let Some(rest) = raw.strip_prefix("context ") {
                table.push_str(rest);
                table.push('\n');
                continue;
            }
            let (key, value) = raw.split_once('=').ok_or_else(|| err(format!("expected `key = value`, found `{raw}`")))?;
            let value = value.trim();
            let wrap = |e: crate::logic::LogicError| err(e.to_string());
            match key.trim() {
                "action" => action = Some(scenario.parse_action(value).map_err(wrap)?),
                "alternatives" => {
                    alternatives = Some(
                        value.split_whitespace().map(|t| scenario.parse_action(t)).collect::<Result<Vec<_>, _>>().map_err(wrap)?,
                    )
                }
                "event" => event = Some(parse_formula(value, scenario).map_err(wrap)?),
                "N" => n = Some(value.parse::<f64>().map_err(|_| err(format!("bad N `{value}`")))?),
                "contexts" => {
                    if value == "model" {
                        contexts = ContextDistribution::Model;
                    } else if value == "table" {
                        tabular = true;
                    } else if let Some(ev) = value.strip_prefix("given") {
                        contexts = ContextDistribution::Conditioned(PartialAssignment::parse(ev, scenario).map_err(wrap)?);
                    } else {
                        return Err(err(format!("unknown context distribution `{value}`")));
                    }
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if tabular {
            contexts = ContextDistribution::parse_table(&table, scenario)?;
        } else if !table.is_empty() {
            return Err(BlameError::Parse { line: 0, message: "`context` lines need `contexts = table`".into() });
        }
        let missing = |what: &str| BlameError::Parse { line: 0, message: format!("missing `{what}`") };
        Ok(BlameQuery {
            action: action.ok_or_else(|| missing("action"))?,
            alternatives,
            event: event.ok_or_else(|| missing("event"))?,
            n,
            contexts,
        })
    }
}
