use std::collections::HashMap;
use std::fmt::Write as _;

use super::{parse_formula, parser::is_name_byte, Formula, LogicError, VarId};

/// Which cell of the variable partition a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Context,
    Decision,
    Outcome,
}

impl Role {
    fn keyword(self) -> &'static str {
        match self {
            Role::Context => "context",
            Role::Decision => "decision",
            Role::Outcome => "outcome",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub role: Role,
    pub label: Option<String>,
}

/// A set of indicators with exactly-one semantics (a one-hot encoded variable).
#[derive(Debug, Clone, PartialEq)]
pub struct OneHotGroup {
    pub name: String,
    pub members: Vec<VarId>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionKind {
    /// Actions are the indicators of a one-hot decision group.
    OneHot(Vec<VarId>),
    /// A single boolean decision; its two actions are `v` and `¬v`.
    Binary(VarId),
}

/// The range of one action variable of the agent.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGroup {
    pub name: String,
    pub kind: ActionKind,
}

impl ActionGroup {
    pub fn vars(&self) -> Vec<VarId> {
        match &self.kind {
            ActionKind::OneHot(vs) => vs.clone(),
            ActionKind::Binary(v) => vec![*v],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Choice {
    Indicator(VarId),
    Value(bool),
}

/// One value of an action group: `do(a)` fixes every variable of the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Action {
    pub group: usize,
    pub choice: Choice,
}

/// Variable space of a decision scenario plus its constraint theory.
///
/// Immutable once built.
#[derive(Debug, Clone)]
pub struct Scenario {
    name: String,
    vars: Vec<Variable>,
    index: HashMap<String, VarId>,
    groups: Vec<OneHotGroup>,
    group_of: Vec<Option<usize>>,
    actions: Vec<ActionGroup>,
    constraints: Vec<Formula>,
}

impl Scenario {
    pub fn builder() -> ScenarioBuilder {
        ScenarioBuilder::default()
    }

    /// Parses a scenario description.
    ///
    /// ```text
    /// scenario trolley
    /// context A_1 A_5
    /// decision I F
    /// outcome L_1 L_5
    /// onehot Track_A A_1 A_5
    /// onehot Choice I F
    /// action Choice
    /// label L_5 "the five people live"
    /// constraint >(&(A_5,I),!(L_5))
    /// ```
    pub fn parse(text: &str) -> Result<Scenario, LogicError> {
        let mut b = ScenarioBuilder::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim();
            let words: Vec<&str> = rest.split_whitespace().collect();
            let err = |message: String| LogicError::Scenario { line: line_no, message };
            match key {
                "scenario" => b.name = rest.to_string(),
                "context" => b.declare(Role::Context, &words, line_no),
                "decision" => b.declare(Role::Decision, &words, line_no),
                "outcome" => b.declare(Role::Outcome, &words, line_no),
                "onehot" => {
                    let (name, members) =
                        words.split_first().ok_or_else(|| err("onehot needs a group name".into()))?;
                    b.groups.push((name.to_string(), members.iter().map(|s| s.to_string()).collect(), line_no));
                }
                "action" => {
                    if words.len() != 1 {
                        return Err(err("action takes exactly one group or decision name".into()));
                    }
                    b.actions.push((words[0].to_string(), line_no));
                }
                "label" => {
                    let (var, text) =
                        rest.split_once(char::is_whitespace).ok_or_else(|| err("label needs a variable and text".into()))?;
                    let text = text.trim().trim_matches('"').to_string();
                    b.labels.push((var.to_string(), text, line_no));
                }
                "constraint" => b.constraints.push((rest.to_string(), line_no)),
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        b.build()
    }

    /// Serializes back into the description format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.name.is_empty() {
            let _ = writeln!(out, "scenario {}", self.name);
        }
        for role in [Role::Context, Role::Decision, Role::Outcome] {
            let names: Vec<&str> =
                self.vars.iter().filter(|v| v.role == role).map(|v| v.name.as_str()).collect();
            if !names.is_empty() {
                let _ = writeln!(out, "{} {}", role.keyword(), names.join(" "));
            }
        }
        for g in &self.groups {
            let members: Vec<&str> = g.members.iter().map(|v| self.name(*v)).collect();
            let _ = writeln!(out, "onehot {} {}", g.name, members.join(" "));
        }
        for a in &self.actions {
            let _ = writeln!(out, "action {}", a.name);
        }
        for v in &self.vars {
            if let Some(label) = &v.label {
                let _ = writeln!(out, "label {} \"{}\"", v.name, label);
            }
        }
        for c in &self.constraints {
            let _ = writeln!(out, "constraint {}", c.prefix(self));
        }
        out
    }

    pub fn name_of_scenario(&self) -> &str {
        &self.name
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.vars[v.index()].name
    }

    /// Human-readable description, falling back to the variable name.
    pub fn label(&self, v: VarId) -> &str {
        self.vars[v.index()].label.as_deref().unwrap_or(&self.vars[v.index()].name)
    }

    pub fn role(&self, v: VarId) -> Role {
        self.vars[v.index()].role
    }

    pub fn vars_with_role(&self, role: Role) -> Vec<VarId> {
        (0..self.vars.len()).map(VarId::from).filter(|v| self.role(*v) == role).collect()
    }

    pub fn contexts(&self) -> Vec<VarId> {
        self.vars_with_role(Role::Context)
    }

    pub fn decisions(&self) -> Vec<VarId> {
        self.vars_with_role(Role::Decision)
    }

    pub fn outcomes(&self) -> Vec<VarId> {
        self.vars_with_role(Role::Outcome)
    }

    /// Outcome variables for utilities and costs. Scenarios without outcome
    /// variables treat their decisions as outcomes.
    pub fn utility_outcomes(&self) -> Vec<VarId> {
        let o = self.outcomes();
        if o.is_empty() {
            self.decisions()
        } else {
            o
        }
    }

    pub fn groups(&self) -> &[OneHotGroup] {
        &self.groups
    }

    pub fn group_of(&self, v: VarId) -> Option<&OneHotGroup> {
        self.group_of[v.index()].map(|g| &self.groups[g])
    }

    pub fn action_groups(&self) -> &[ActionGroup] {
        &self.actions
    }

    /// User-declared constraints, in file order.
    pub fn constraints(&self) -> &[Formula] {
        &self.constraints
    }

    /// Declared constraints followed by the exactly-one constraint of every
    /// one-hot group.
    pub fn theory(&self) -> Vec<Formula> {
        let mut out = self.constraints.clone();
        for g in &self.groups {
            out.push(exactly_one(&g.members));
        }
        out
    }

    /// All values of an action group, in declaration order (`v` before `¬v`
    /// for binary groups).
    pub fn actions(&self, group: usize) -> Vec<Action> {
        match &self.actions[group].kind {
            ActionKind::OneHot(vs) => vs.iter().map(|v| Action { group, choice: Choice::Indicator(*v) }).collect(),
            ActionKind::Binary(_) => [true, false].map(|b| Action { group, choice: Choice::Value(b) }).to_vec(),
        }
    }

    /// Resolves `F`, `M` or `!M` into an action.
    pub fn parse_action(&self, text: &str) -> Result<Action, LogicError> {
        let text = text.trim();
        let (negated, name) = match text.strip_prefix('!').or_else(|| text.strip_prefix('¬')) {
            Some(rest) => (true, rest.trim().trim_start_matches('(').trim_end_matches(')').trim()),
            None => (false, text),
        };
        let v = self.var(name).ok_or_else(|| LogicError::UnknownAction(text.to_string()))?;
        for (gi, g) in self.actions.iter().enumerate() {
            match &g.kind {
                ActionKind::Binary(b) if *b == v => return Ok(Action { group: gi, choice: Choice::Value(!negated) }),
                ActionKind::OneHot(vs) if !negated && vs.contains(&v) => {
                    return Ok(Action { group: gi, choice: Choice::Indicator(v) })
                }
                _ => {}
            }
        }
        Err(LogicError::UnknownAction(text.to_string()))
    }

    /// Variable settings imposed by `do(action)`.
    pub fn action_fixes(&self, action: &Action) -> Vec<(VarId, bool)> {
        match (&self.actions[action.group].kind, action.choice) {
            (ActionKind::OneHot(vs), Choice::Indicator(on)) => vs.iter().map(|v| (*v, *v == on)).collect(),
            (ActionKind::Binary(v), Choice::Value(b)) => vec![(*v, b)],
            _ => panic!("action does not belong to its group"),
        }
    }

    pub fn action_name(&self, action: &Action) -> String {
        match action.choice {
            Choice::Indicator(v) => self.name(v).to_string(),
            Choice::Value(true) => self.name(self.actions[action.group].vars()[0]).to_string(),
            Choice::Value(false) => format!("¬{}", self.name(self.actions[action.group].vars()[0])),
        }
    }

    /// Spelling accepted by [`Scenario::parse_action`].
    pub fn action_token(&self, action: &Action) -> String {
        match action.choice {
            Choice::Value(false) => format!("!{}", self.name(self.actions[action.group].vars()[0])),
            _ => self.action_name(action),
        }
    }
}

fn exactly_one(members: &[VarId]) -> Formula {
    let mut parts = vec![Formula::Or(members.iter().map(|v| Formula::Atom(*v)).collect())];
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            parts.push(Formula::not(Formula::And(vec![Formula::Atom(*a), Formula::Atom(*b)])));
        }
    }
    Formula::And(parts)
}

/// Incremental construction of a [`Scenario`]; validation happens in `build`.
#[derive(Debug, Default, Clone)]
pub struct ScenarioBuilder {
    name: String,
    decls: Vec<(String, Role, usize)>,
    groups: Vec<(String, Vec<String>, usize)>,
    actions: Vec<(String, usize)>,
    labels: Vec<(String, String, usize)>,
    constraints: Vec<(String, usize)>,
}

impl ScenarioBuilder {
    fn declare(&mut self, role: Role, names: &[&str], line: usize) {
        self.decls.extend(names.iter().map(|n| (n.to_string(), role, line)));
    }

    pub fn name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn contexts<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.decls.extend(names.into_iter().map(|n| (n.into(), Role::Context, 0)));
        self
    }

    pub fn decisions<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.decls.extend(names.into_iter().map(|n| (n.into(), Role::Decision, 0)));
        self
    }

    pub fn outcomes<I: IntoIterator<Item = S>, S: Into<String>>(mut self, names: I) -> Self {
        self.decls.extend(names.into_iter().map(|n| (n.into(), Role::Outcome, 0)));
        self
    }

    pub fn one_hot<I: IntoIterator<Item = S>, S: Into<String>>(mut self, name: &str, members: I) -> Self {
        self.groups.push((name.to_string(), members.into_iter().map(Into::into).collect(), 0));
        self
    }

    pub fn action(mut self, name: &str) -> Self {
        self.actions.push((name.to_string(), 0));
        self
    }

    pub fn label(mut self, var: &str, text: &str) -> Self {
        self.labels.push((var.to_string(), text.to_string(), 0));
        self
    }

    pub fn constraint(mut self, text: &str) -> Self {
        self.constraints.push((text.to_string(), 0));
        self
    }

    pub fn build(self) -> Result<Scenario, LogicError> {
        let err = |line: usize, message: String| LogicError::Scenario { line, message };
        let mut vars = Vec::new();
        let mut index = HashMap::new();
        for (name, role, line) in &self.decls {
            if name.is_empty() || !name.bytes().all(is_name_byte) {
                return Err(err(*line, format!("invalid variable name `{name}`")));
            }
            if index.insert(name.clone(), VarId::from(vars.len())).is_some() {
                return Err(err(*line, format!("variable `{name}` declared twice")));
            }
            vars.push(Variable { name: name.clone(), role: *role, label: None });
        }
        if vars.is_empty() {
            return Err(err(0, "scenario declares no variables".into()));
        }
        for (var, text, line) in &self.labels {
            let v = index.get(var).ok_or_else(|| err(*line, format!("label for unknown variable `{var}`")))?;
            vars[v.index()].label = Some(text.clone());
        }

        let mut groups = Vec::new();
        let mut group_of = vec![None; vars.len()];
        let mut group_index = HashMap::new();
        for (name, members, line) in &self.groups {
            if members.is_empty() {
                return Err(err(*line, format!("one-hot group `{name}` is empty")));
            }
            let mut ids = Vec::new();
            for m in members {
                let v = *index.get(m).ok_or_else(|| err(*line, format!("unknown variable `{m}` in group `{name}`")))?;
                if group_of[v.index()].is_some() {
                    return Err(err(*line, format!("variable `{m}` is in two one-hot groups")));
                }
                if vars[v.index()].role != vars[ids.first().unwrap_or(&v).index()].role {
                    return Err(err(*line, format!("one-hot group `{name}` spans partition cells")));
                }
                group_of[v.index()] = Some(groups.len());
                ids.push(v);
            }
            if group_index.insert(name.clone(), groups.len()).is_some() || index.contains_key(name) {
                return Err(err(*line, format!("group name `{name}` is already in use")));
            }
            groups.push(OneHotGroup { name: name.clone(), members: ids });
        }

        let mut actions: Vec<ActionGroup> = Vec::new();
        for (name, line) in &self.actions {
            if actions.iter().any(|a| &a.name == name) {
                return Err(err(*line, format!("action `{name}` declared twice")));
            }
            let kind = if let Some(&g) = group_index.get(name) {
                let members = groups[g].members.clone();
                if vars[members[0].index()].role != Role::Decision {
                    return Err(err(*line, format!("action group `{name}` is not in the decision cell")));
                }
                if members.len() < 2 {
                    return Err(err(*line, format!("action group `{name}` needs at least two indicators")));
                }
                ActionKind::OneHot(members)
            } else if let Some(&v) = index.get(name) {
                if vars[v.index()].role != Role::Decision {
                    return Err(err(*line, format!("action `{name}` is not a decision variable")));
                }
                if group_of[v.index()].is_some() {
                    return Err(err(*line, format!("decision `{name}` belongs to a one-hot group; declare the group")));
                }
                ActionKind::Binary(v)
            } else {
                return Err(err(*line, format!("unknown action group `{name}`")));
            };
            actions.push(ActionGroup { name: name.clone(), kind });
        }

        let mut sc = Scenario { name: self.name, vars, index, groups, group_of, actions, constraints: Vec::new() };
        let mut constraints = Vec::new();
        for (text, line) in &self.constraints {
            let f = parse_formula(text, &sc).map_err(|e| err(*line, format!("constraint `{text}`: {e}")))?;
            constraints.push(f);
        }
        sc.constraints = constraints;
        Ok(sc)
    }
}
