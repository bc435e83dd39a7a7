//! Text syntax for models, processes, formulas and action labels.
//!
//! ```text
//! model     := "agents" idlist ";" initblock+ formulablock*
//! initblock := "init" id "{" (id "=" process ";")+ "}"
//! formulablock := "formula" id "=" formula ";"
//! process   := "0" | id | process "|" process | sum | "(" process ")"
//! sum       := prefix ("+" prefix)*
//! prefix    := cap "." process
//! cap       := "recv(" formula ")" | "send(" formula ")" | "enter" | "accept"
//!            | "exit" | "expel" | "merge+" | "merge-"
//! formula   := id "<+" id | "~" formula | formula "&" formula | "K[" id "]" formula
//!            | "DK[" idlist "]" formula | "[" action "]" formula
//!            | formula "or" formula | formula "=>" formula | formula "<=>" formula
//!            | "<" action ">" formula | "true" | "false" | id "<" id | "(" formula ")"
//! action    := "(" cap "@" id "," cap "@" id ["," id] ")"
//! ```
//!
//! Prefix binds tightest, then `+`, then `|`. Among formula connectives the
//! unary operators bind tightest, then `&`, `or`, `=>` (right associative)
//! and `<=>`. `#` starts a line comment.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::state::{validate_state, State, StateError};
use crate::syntax::{
    desugar, desugar_action, normalize, ActionLabel, AgentId, BadChoiceOperand, CapKind, Capability, DesugarError,
    Formula, Process, RawProcess, Surface, SurfaceAction, SurfaceCap,
};

/// Line and column, both 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{pos}: syntax error: expected {}, found {found}", .expected.join(" or "))]
    Syntax { pos: Pos, expected: Vec<String>, found: String },
    #[error("{pos}: undeclared agent `{name}`")]
    UndeclaredAgent { pos: Pos, name: String },
    #[error("{pos}: `{name}` is a reserved word")]
    Reserved { pos: Pos, name: String },
    #[error("{pos}: agent `{name}` declared twice")]
    DuplicateAgent { pos: Pos, name: String },
    #[error("{pos}: agent `{agent}` assigned twice in state `{state}`")]
    DuplicateAssignment { pos: Pos, state: String, agent: String },
    #[error("{pos}: name `{name}` defined twice")]
    DuplicateName { pos: Pos, name: String },
    #[error("{pos}: state `{state}` is invalid: {error}")]
    StateInvalidity { pos: Pos, state: String, error: StateError },
    #[error("{pos}: {error}")]
    Desugar { pos: Pos, error: DesugarError },
    #[error("{pos}: {error}")]
    Choice { pos: Pos, error: BadChoiceOperand },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. }
            | ParseError::UndeclaredAgent { pos, .. }
            | ParseError::Reserved { pos, .. }
            | ParseError::DuplicateAgent { pos, .. }
            | ParseError::DuplicateAssignment { pos, .. }
            | ParseError::DuplicateName { pos, .. }
            | ParseError::StateInvalidity { pos, .. }
            | ParseError::Desugar { pos, .. }
            | ParseError::Choice { pos, .. } => *pos,
        }
    }
}

const RESERVED: &[&str] = &[
    "agents", "init", "formula", "true", "false", "or", "recv", "send", "enter", "accept", "exit", "expel", "merge",
    "K", "DK",
];

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Zero,
    MergePlus,
    MergeMinus,
    Pipe,
    Plus,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Eq,
    At,
    Tilde,
    Amp,
    SubPlus,
    Lt,
    Gt,
    Implies,
    Iff,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "`{s}`"),
            Tok::Zero => "`0`",
            Tok::MergePlus => "`merge+`",
            Tok::MergeMinus => "`merge-`",
            Tok::Pipe => "`|`",
            Tok::Plus => "`+`",
            Tok::Dot => "`.`",
            Tok::LParen => "`(`",
            Tok::RParen => "`)`",
            Tok::LBracket => "`[`",
            Tok::RBracket => "`]`",
            Tok::LBrace => "`{`",
            Tok::RBrace => "`}`",
            Tok::Comma => "`,`",
            Tok::Semi => "`;`",
            Tok::Eq => "`=`",
            Tok::At => "`@`",
            Tok::Tilde => "`~`",
            Tok::Amp => "`&`",
            Tok::SubPlus => "`<+`",
            Tok::Lt => "`<`",
            Tok::Gt => "`>`",
            Tok::Implies => "`=>`",
            Tok::Iff => "`<=>`",
            Tok::Eof => "end of input",
        };
        f.write_str(s)
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
            continue;
        }
        let peek = |k: usize| chars.get(i + k).copied();
        let (tok, len) = if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                j += 1;
            }
            let word: String = chars[i..j].iter().collect();
            match (word.as_str(), chars.get(j)) {
                ("merge", Some('+')) => (Tok::MergePlus, j - i + 1),
                ("merge", Some('-')) => (Tok::MergeMinus, j - i + 1),
                _ => (Tok::Ident(word), j - i),
            }
        } else {
            match (c, peek(1), peek(2)) {
                ('0', next, _) if !next.is_some_and(|n| n.is_alphanumeric()) => (Tok::Zero, 1),
                ('<', Some('='), Some('>')) => (Tok::Iff, 3),
                ('<', Some('+'), _) => (Tok::SubPlus, 2),
                ('<', _, _) => (Tok::Lt, 1),
                ('=', Some('>'), _) => (Tok::Implies, 2),
                ('=', _, _) => (Tok::Eq, 1),
                ('>', _, _) => (Tok::Gt, 1),
                ('|', _, _) => (Tok::Pipe, 1),
                ('+', _, _) => (Tok::Plus, 1),
                ('.', _, _) => (Tok::Dot, 1),
                ('(', _, _) => (Tok::LParen, 1),
                (')', _, _) => (Tok::RParen, 1),
                ('[', _, _) => (Tok::LBracket, 1),
                (']', _, _) => (Tok::RBracket, 1),
                ('{', _, _) => (Tok::LBrace, 1),
                ('}', _, _) => (Tok::RBrace, 1),
                (',', _, _) => (Tok::Comma, 1),
                (';', _, _) => (Tok::Semi, 1),
                ('@', _, _) => (Tok::At, 1),
                ('~', _, _) => (Tok::Tilde, 1),
                ('&', _, _) => (Tok::Amp, 1),
                _ => {
                    return Err(ParseError::Syntax {
                        pos,
                        expected: vec!["a token".into()],
                        found: format!("`{c}`"),
                    })
                }
            }
        };
        for _ in 0..len {
            bump!();
        }
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

/// A parsed model: agent declarations, named initial states and optional
/// named formulas.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelFile {
    pub agents: Vec<AgentId>,
    pub initial_states: Vec<(String, State)>,
    pub formulas: Vec<(String, Formula)>,
}

impl ModelFile {
    pub fn agent_set(&self) -> BTreeSet<AgentId> {
        self.agents.iter().cloned().collect()
    }

    pub fn initial_state(&self, name: &str) -> Option<&State> {
        self.initial_states.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn formula(&self, name: &str) -> Option<&Formula> {
        self.formulas.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.agents.iter().map(AgentId::to_string).collect();
        writeln!(f, "agents {};", names.join(", "))?;
        for (name, s) in &self.initial_states {
            write!(f, "init {name} {{")?;
            for a in &self.agents {
                write!(f, " {a} = {};", s.get(a))?;
            }
            writeln!(f, " }}")?;
        }
        for (name, phi) in &self.formulas {
            writeln!(f, "formula {name} = {phi};")?;
        }
        Ok(())
    }
}

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    agents: Option<&'a BTreeSet<AgentId>>,
}

impl<'a> Parser<'a> {
    fn new(text: &str, agents: Option<&'a BTreeSet<AgentId>>) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
            agents,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn expect(&mut self, tok: Tok) -> Result<Pos, ParseError> {
        if *self.peek() == tok {
            Ok(self.next().1)
        } else {
            self.error(&[&tok.to_string()])
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_keyword(kw) {
            self.next();
            Ok(())
        } else {
            self.error(&[&format!("`{kw}`")])
        }
    }

    /// A non-reserved identifier.
    fn name(&mut self) -> Result<(String, Pos), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if RESERVED.contains(&s.as_str()) => Err(ParseError::Reserved { pos: self.pos(), name: s }),
            Tok::Ident(s) => {
                let pos = self.next().1;
                Ok((s, pos))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn agent(&mut self) -> Result<AgentId, ParseError> {
        let (name, pos) = self.name()?;
        let id = AgentId::new(&name);
        match self.agents {
            Some(set) if !set.contains(&id) => Err(ParseError::UndeclaredAgent { pos, name }),
            _ => Ok(id),
        }
    }

    fn agent_list(&mut self) -> Result<Vec<AgentId>, ParseError> {
        let mut out = vec![self.agent()?];
        while *self.peek() == Tok::Comma {
            self.next();
            out.push(self.agent()?);
        }
        Ok(out)
    }

    fn end(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.error(&["end of input"])
        }
    }

    fn agent_set(&self) -> &BTreeSet<AgentId> {
        self.agents.expect("agent set is known once declarations are parsed")
    }

    // formulas

    fn formula(&mut self) -> Result<Surface, ParseError> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.next();
            let rhs = self.implication()?;
            lhs = Surface::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Surface, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.next();
            let rhs = self.implication()?;
            return Ok(Surface::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Surface, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.is_keyword("or") {
            self.next();
            let rhs = self.conjunction()?;
            lhs = Surface::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Surface, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.next();
            let rhs = self.unary()?;
            lhs = Surface::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Surface, ParseError> {
        match self.peek().clone() {
            Tok::Tilde => {
                self.next();
                Ok(Surface::Not(Box::new(self.unary()?)))
            }
            Tok::Ident(k) if k == "K" && *self.peek_at(1) == Tok::LBracket => {
                self.next();
                self.next();
                let a = self.agent()?;
                self.expect(Tok::RBracket)?;
                Ok(Surface::Knows(a, Box::new(self.unary()?)))
            }
            Tok::Ident(k) if k == "DK" && *self.peek_at(1) == Tok::LBracket => {
                self.next();
                self.next();
                let group = self.agent_list()?;
                self.expect(Tok::RBracket)?;
                Ok(Surface::DistKnows(group, Box::new(self.unary()?)))
            }
            Tok::LBracket => {
                self.next();
                let alpha = self.action()?;
                self.expect(Tok::RBracket)?;
                Ok(Surface::Box(alpha, Box::new(self.unary()?)))
            }
            Tok::Lt => {
                self.next();
                let alpha = self.action()?;
                self.expect(Tok::Gt)?;
                Ok(Surface::Diamond(alpha, Box::new(self.unary()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Surface, ParseError> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "true" => {
                self.next();
                Ok(Surface::True)
            }
            Tok::Ident(k) if k == "false" => {
                self.next();
                Ok(Surface::False)
            }
            Tok::LParen => {
                self.next();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(_) => {
                let a = self.agent()?;
                match self.peek() {
                    Tok::SubPlus => {
                        self.next();
                        Ok(Surface::SubagentPlus(a, self.agent()?))
                    }
                    Tok::Lt => {
                        self.next();
                        Ok(Surface::Subagent(a, self.agent()?))
                    }
                    _ => self.error(&["`<+`", "`<`"]),
                }
            }
            _ => self.error(&["formula"]),
        }
    }

    fn surface_cap(&mut self) -> Result<SurfaceCap, ParseError> {
        let cap = match self.peek().clone() {
            Tok::MergePlus => SurfaceCap::Plain(CapKind::MergePlus),
            Tok::MergeMinus => SurfaceCap::Plain(CapKind::MergeMinus),
            Tok::Ident(k) => match k.as_str() {
                "enter" => SurfaceCap::Plain(CapKind::Enter),
                "accept" => SurfaceCap::Plain(CapKind::Accept),
                "exit" => SurfaceCap::Plain(CapKind::Exit),
                "expel" => SurfaceCap::Plain(CapKind::Expel),
                "recv" | "send" => {
                    self.next();
                    self.expect(Tok::LParen)?;
                    let f = Box::new(self.formula()?);
                    self.expect(Tok::RParen)?;
                    return Ok(if k == "recv" { SurfaceCap::Recv(f) } else { SurfaceCap::Send(f) });
                }
                _ => return self.error(&["capability"]),
            },
            _ => return self.error(&["capability"]),
        };
        self.next();
        Ok(cap)
    }

    fn capability(&mut self) -> Result<Capability, ParseError> {
        let pos = self.pos();
        let cap = self.surface_cap()?;
        crate::syntax::desugar_cap(&cap, self.agent_set()).map_err(|error| ParseError::Desugar { pos, error })
    }

    fn action(&mut self) -> Result<SurfaceAction, ParseError> {
        self.expect(Tok::LParen)?;
        let cap_a = self.surface_cap()?;
        self.expect(Tok::At)?;
        let executor_a = self.agent()?;
        self.expect(Tok::Comma)?;
        let cap_c = self.surface_cap()?;
        self.expect(Tok::At)?;
        let executor_c = self.agent()?;
        let mediator = if *self.peek() == Tok::Comma {
            self.next();
            Some(self.agent()?)
        } else {
            None
        };
        self.expect(Tok::RParen)?;
        Ok(SurfaceAction {
            cap_a,
            executor_a,
            cap_c,
            executor_c,
            mediator,
        })
    }

    fn core_formula(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        let f = self.formula()?;
        desugar(&f, self.agent_set()).map_err(|error| ParseError::Desugar { pos, error })
    }

    // processes

    fn process(&mut self) -> Result<RawProcess, ParseError> {
        let mut lhs = self.choice()?;
        while *self.peek() == Tok::Pipe {
            self.next();
            let rhs = self.choice()?;
            lhs = RawProcess::par(lhs, rhs);
        }
        Ok(lhs)
    }

    fn choice(&mut self) -> Result<RawProcess, ParseError> {
        let first = self.process_atom()?;
        if *self.peek() != Tok::Plus {
            return Ok(first);
        }
        let mut ops = vec![first];
        while *self.peek() == Tok::Plus {
            self.next();
            ops.push(self.process_atom()?);
        }
        Ok(RawProcess::Choice(ops))
    }

    fn process_atom(&mut self) -> Result<RawProcess, ParseError> {
        match self.peek().clone() {
            Tok::Zero => {
                self.next();
                Ok(RawProcess::Zero)
            }
            Tok::LParen => {
                self.next();
                let p = self.process()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::MergePlus | Tok::MergeMinus => self.prefixed(),
            Tok::Ident(k) if matches!(k.as_str(), "recv" | "send" | "enter" | "accept" | "exit" | "expel") => {
                self.prefixed()
            }
            Tok::Ident(_) => Ok(RawProcess::Agent(self.agent()?)),
            _ => self.error(&["process"]),
        }
    }

    fn prefixed(&mut self) -> Result<RawProcess, ParseError> {
        let cap = self.capability()?;
        self.expect(Tok::Dot)?;
        Ok(RawProcess::prefix(cap, self.process_atom()?))
    }

    fn canonical_process(&mut self) -> Result<Process, ParseError> {
        let pos = self.pos();
        let raw = self.process()?;
        normalize(&raw).map_err(|error| ParseError::Choice { pos, error })
    }

    // models

    fn model(&mut self) -> Result<ModelFile, ParseError> {
        self.keyword("agents")?;
        let mut agents = Vec::new();
        let mut declared = BTreeSet::new();
        loop {
            let (name, pos) = self.name()?;
            let id = AgentId::new(&name);
            if !declared.insert(id.clone()) {
                return Err(ParseError::DuplicateAgent { pos, name });
            }
            agents.push(id);
            if *self.peek() != Tok::Comma {
                break;
            }
            self.next();
        }
        self.expect(Tok::Semi)?;
        Ok(ModelFile {
            agents,
            initial_states: vec![],
            formulas: vec![],
        })
        .and_then(|m| self.model_body(m, declared))
    }

    fn model_body(&mut self, mut model: ModelFile, declared: BTreeSet<AgentId>) -> Result<ModelFile, ParseError> {
        let mut sub = Parser {
            toks: std::mem::take(&mut self.toks),
            at: self.at,
            agents: Some(&declared),
        };
        let mut names = BTreeSet::new();
        while sub.is_keyword("init") {
            sub.next();
            let (name, name_pos) = sub.name()?;
            if !names.insert(name.clone()) {
                return Err(ParseError::DuplicateName { pos: name_pos, name });
            }
            sub.expect(Tok::LBrace)?;
            let mut assignment = BTreeMap::new();
            loop {
                let pos = sub.pos();
                let a = sub.agent()?;
                sub.expect(Tok::Eq)?;
                let p = sub.canonical_process()?;
                sub.expect(Tok::Semi)?;
                if assignment.insert(a.clone(), p).is_some() {
                    return Err(ParseError::DuplicateAssignment {
                        pos,
                        state: name,
                        agent: a.to_string(),
                    });
                }
                if *sub.peek() == Tok::RBrace {
                    break;
                }
            }
            sub.expect(Tok::RBrace)?;
            let state = validate_state(&declared, assignment).map_err(|error| ParseError::StateInvalidity {
                pos: name_pos,
                state: name.clone(),
                error,
            })?;
            model.initial_states.push((name, state));
        }
        if model.initial_states.is_empty() {
            return sub.error(&["`init`"]);
        }
        let mut fnames = BTreeSet::new();
        while sub.is_keyword("formula") {
            sub.next();
            let (name, pos) = sub.name()?;
            if !fnames.insert(name.clone()) {
                return Err(ParseError::DuplicateName { pos, name });
            }
            sub.expect(Tok::Eq)?;
            let f = sub.core_formula()?;
            sub.expect(Tok::Semi)?;
            model.formulas.push((name, f));
        }
        sub.end()?;
        Ok(model)
    }
}

/// Parses and validates a model file.
pub fn parse_model(text: &str) -> Result<ModelFile, ParseError> {
    Parser::new(text, None)?.model()
}

/// Parses a formula over `agents` and desugars it into the core grammar.
pub fn parse_formula(text: &str, agents: &BTreeSet<AgentId>) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, Some(agents))?;
    let f = p.core_formula()?;
    p.end()?;
    Ok(f)
}

/// Parses a formula without desugaring it.
pub fn parse_surface_formula(text: &str, agents: &BTreeSet<AgentId>) -> Result<Surface, ParseError> {
    let mut p = Parser::new(text, Some(agents))?;
    let f = p.formula()?;
    p.end()?;
    Ok(f)
}

pub fn parse_process(text: &str, agents: &BTreeSet<AgentId>) -> Result<Process, ParseError> {
    let mut p = Parser::new(text, Some(agents))?;
    let proc = p.canonical_process()?;
    p.end()?;
    Ok(proc)
}

/// Parses an action label such as `(enter@A, accept@C, E)`.
pub fn parse_action(text: &str, agents: &BTreeSet<AgentId>) -> Result<ActionLabel, ParseError> {
    let mut p = Parser::new(text, Some(agents))?;
    let pos = p.pos();
    let alpha = p.action()?;
    p.end()?;
    desugar_action(&alpha, agents).map_err(|error| ParseError::Desugar { pos, error })
}

/// Canonical text for any serializable value.
pub fn serialize<T: fmt::Display>(x: &T) -> String {
    x.to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{one_step, top};

    pub const VIRUS: &str = "agents A, C, E;\ninit s0 { E = A | C; C = accept.0; A = enter.0; }\n";

    fn ids(names: &[&str]) -> BTreeSet<AgentId> {
        names.iter().map(|n| AgentId::new(n)).collect()
    }

    #[test]
    fn virus_model() {
        let m = parse_model(VIRUS).unwrap();
        assert_eq!(m.agent_set(), ids(&["A", "C", "E"]));
        assert_eq!(m.initial_states.len(), 1);
        let s0 = m.initial_state("s0").unwrap();
        assert_eq!(s0.get(&"E".into()).to_string(), "A | C");
        assert_eq!(parse_model(&serialize(&m)).unwrap(), m);
    }

    #[test]
    fn singleton_model() {
        let m = parse_model("agents A; init s0 { A = 0; }").unwrap();
        assert!(m.initial_states[0].1.get(&"A".into()).is_zero());
    }

    #[test]
    fn cyclic_state_is_rejected() {
        let err = parse_model("agents A,B; init s0 { A = B; B = A; }").unwrap_err();
        assert!(
            matches!(&err, ParseError::StateInvalidity { error: StateError::SelfOccurrence { .. }, .. }),
            "{err}"
        );
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_model("agents A;\ninit s0 { A = B; }").unwrap_err();
        assert_eq!(err, ParseError::UndeclaredAgent { pos: Pos { line: 2, col: 15 }, name: "B".into() });
        let err = parse_model("agents A;\ninit s0 { A = enter; }").unwrap_err();
        assert!(matches!(err, ParseError::Syntax { pos: Pos { line: 2, col: 20 }, .. }), "{err}");
        let err = parse_model("agents A;\ninit s0 { A = 0; A = 0; }").unwrap_err();
        assert!(matches!(err, ParseError::DuplicateAssignment { .. }));
        let err = parse_model("agents A, enter; init s0 { A = 0; }").unwrap_err();
        assert!(matches!(err, ParseError::Reserved { .. }));
        let err = parse_model("agents A, B; init s0 { A = 0; }").unwrap_err();
        assert!(matches!(err, ParseError::StateInvalidity { error: StateError::PartialAssignment(_), .. }));
        assert!(parse_model("agents A;").is_err());
    }

    #[test]
    fn knowledge_formula() {
        let ace = ids(&["A", "C", "E"]);
        let f = parse_formula("K[C](A <+ C)", &ace).unwrap();
        assert_eq!(f, Formula::knows("C", Formula::sub_plus("A", "C")));
        assert_eq!(parse_formula("true", &ace).unwrap(), top(&ace).unwrap());
    }

    #[test]
    fn box_formula_with_one_step() {
        let ace = ids(&["A", "C", "E"]);
        let f = parse_formula("[ (enter@A, accept@C, E) ] A < C", &ace).unwrap();
        let alpha = ActionLabel::enter("A", "C", "E").unwrap();
        assert_eq!(f, Formula::boxed(alpha, one_step(&"A".into(), &"C".into(), &ace)));
    }

    #[test]
    fn precedence() {
        let ace = ids(&["A", "C", "E"]);
        let p = |s| parse_formula(s, &ace).unwrap();
        assert_eq!(p("~A <+ C & C <+ E"), p("(~(A <+ C)) & (C <+ E)"));
        assert_eq!(p("A <+ C or C <+ E & E <+ A"), p("A <+ C or (C <+ E & E <+ A)"));
        assert_eq!(p("A <+ C => C <+ E => E <+ A"), p("A <+ C => (C <+ E => E <+ A)"));
        assert_eq!(p("K[A] A <+ C & C <+ E"), p("(K[A] A <+ C) & C <+ E"));
    }

    #[test]
    fn process_precedence() {
        let ace = ids(&["A", "C", "E"]);
        let p = parse_process("enter.A | C + 0", &ace);
        assert!(matches!(p, Err(ParseError::Choice { .. })));
        let p = parse_process("enter.0 + exit.0 | A", &ace).unwrap();
        assert_eq!(p.to_string(), "A | enter.0 + exit.0");
        let q = parse_process("A | (exit.0 + enter.0)", &ace).unwrap();
        assert_eq!(p, q);
        let nested = parse_process("accept.(A | exit.0)", &ace).unwrap();
        assert_eq!(nested.to_string(), "accept.(A | exit.0)");
        assert_eq!(parse_process(&nested.to_string(), &ace).unwrap(), nested);
    }

    #[test]
    fn sum_order_is_canonical() {
        let ace = ids(&["A", "C", "E"]);
        let x = parse_process("enter.0 + accept.0", &ace).unwrap();
        let y = parse_process("accept.0 + enter.0", &ace).unwrap();
        assert_eq!(serialize(&x), serialize(&y));
        assert_eq!(serialize(&Process::zero()), "0");
    }

    #[test]
    fn actions() {
        let ace = ids(&["A", "C", "E"]);
        let alpha = parse_action("(merge+@A, merge-@C, E)", &ace).unwrap();
        assert_eq!(alpha, ActionLabel::merge("A", "C", "E").unwrap());
        let beta = parse_action("(recv(A <+ C)@A, send(A <+ C)@C)", &ace).unwrap();
        assert_eq!(beta.to_string(), "(recv(A <+ C)@A, send(A <+ C)@C)");
        assert!(parse_action("(enter@A, accept@C)", &ace).is_err());
        assert!(parse_action("(enter@A, expel@C, E)", &ace).is_err());
        assert!(parse_action("(recv(A <+ C)@A, send(C <+ A)@C)", &ace).is_err());
    }

    #[test]
    fn named_formulas_round_trip() {
        let text = format!("{VIRUS}formula kown = A <+ C => K[C] A <+ C;\nformula d = <(enter@A, accept@C, E)> true;\n");
        let m = parse_model(&text).unwrap();
        assert_eq!(m.formulas.len(), 2);
        assert_eq!(parse_model(&serialize(&m)).unwrap(), m);
    }

    #[test]
    fn comments_are_ignored() {
        let m = parse_model("# virus\nagents A; # one agent\ninit s0 { A = 0; }").unwrap();
        assert_eq!(m.agents.len(), 1);
    }
}
