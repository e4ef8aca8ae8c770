//! Independence atoms: variables, canonical atom values, the textual
//! grammar and the line-oriented atom file format.
//!
//! ```text
//! atom    := varlist SEP varlist
//! SEP     := "_|_" | "_|_{" varlist "}"
//! varlist := "()" | var ("," var)*
//! var     := [A-Za-z_][A-Za-z0-9_]*
//! ```
//!
//! Atoms are stored with every side as a sorted, duplicate-free set, so two
//! atoms that differ only by the order or repetition of variables are equal
//! values.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SEP: &str = "_|_";

/// A first-order variable name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Variable(String);

impl Variable {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if is_valid_name(&name) {
            Ok(Variable(name))
        } else {
            Err(Error::InvalidVariable { name, pos: 0 })
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for Variable {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Variable::new(s)
    }
}

impl From<Variable> for String {
    fn from(v: Variable) -> String {
        v.0
    }
}

impl FromStr for Variable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Variable::new(s)
    }
}

pub type VarSet = BTreeSet<Variable>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomKind {
    Marginal,
    Conditional,
}

/// `left ⊥ right` or `left ⊥_condition right`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Atom {
    left: VarSet,
    right: VarSet,
    condition: VarSet,
    kind: AtomKind,
}

impl Atom {
    pub fn marginal<L, R>(left: L, right: R) -> Self
    where
        L: IntoIterator<Item = Variable>,
        R: IntoIterator<Item = Variable>,
    {
        Atom {
            left: left.into_iter().collect(),
            right: right.into_iter().collect(),
            condition: VarSet::new(),
            kind: AtomKind::Marginal,
        }
    }

    pub fn conditional<L, R, C>(left: L, right: R, condition: C) -> Self
    where
        L: IntoIterator<Item = Variable>,
        R: IntoIterator<Item = Variable>,
        C: IntoIterator<Item = Variable>,
    {
        Atom {
            left: left.into_iter().collect(),
            right: right.into_iter().collect(),
            condition: condition.into_iter().collect(),
            kind: AtomKind::Conditional,
        }
    }

    pub fn left(&self) -> &VarSet {
        &self.left
    }

    pub fn right(&self) -> &VarSet {
        &self.right
    }

    pub fn condition(&self) -> &VarSet {
        &self.condition
    }

    pub fn kind(&self) -> AtomKind {
        self.kind
    }

    pub fn is_marginal(&self) -> bool {
        self.kind == AtomKind::Marginal
    }

    /// Every variable occurring in the atom.
    pub fn vars(&self) -> VarSet {
        self.left
            .iter()
            .chain(&self.right)
            .chain(&self.condition)
            .cloned()
            .collect()
    }

    /// The same atom with left and right exchanged.
    pub fn swapped(&self) -> Atom {
        Atom {
            left: self.right.clone(),
            right: self.left.clone(),
            condition: self.condition.clone(),
            kind: self.kind,
        }
    }

    /// Views a marginal atom as a conditional one with empty condition.
    pub fn lifted(&self) -> Atom {
        Atom {
            kind: AtomKind::Conditional,
            ..self.clone()
        }
    }
}

/// Builds the canonical atom from variable sequences. An empty condition
/// yields a marginal atom.
pub fn canonicalize(left: &[Variable], right: &[Variable], condition: &[Variable]) -> Atom {
    if condition.is_empty() {
        Atom::marginal(left.iter().cloned(), right.iter().cloned())
    } else {
        Atom::conditional(
            left.iter().cloned(),
            right.iter().cloned(),
            condition.iter().cloned(),
        )
    }
}

fn write_varlist(f: &mut fmt::Formatter<'_>, vars: &VarSet) -> fmt::Result {
    if vars.is_empty() {
        return f.write_str("()");
    }
    for (i, v) in vars.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        f.write_str(v.name())?;
    }
    Ok(())
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_varlist(f, &self.left)?;
        match self.kind {
            AtomKind::Marginal => f.write_str(" _|_ ")?,
            AtomKind::Conditional => {
                f.write_str(" _|_{")?;
                write_varlist(f, &self.condition)?;
                f.write_str("} ")?;
            }
        }
        write_varlist(f, &self.right)
    }
}

pub fn format_atom(a: &Atom) -> String {
    a.to_string()
}

impl FromStr for Atom {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_atom(s)
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.rest().chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Syntax {
            pos: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn var(&mut self) -> Result<Variable> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.rest().chars().next() {
            if self.pos > start && self.rest().starts_with(SEP) {
                break;
            }
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        let name = &self.text[start..self.pos];
        if name.is_empty() {
            return Err(self.error("expected a variable"));
        }
        Variable::new(name).map_err(|_| Error::InvalidVariable {
            name: name.to_string(),
            pos: start + 1,
        })
    }

    fn varlist(&mut self) -> Result<Vec<Variable>> {
        if self.eat("()") {
            return Ok(Vec::new());
        }
        let mut vars = vec![self.var()?];
        while self.eat(",") {
            vars.push(self.var()?);
        }
        Ok(vars)
    }
}

/// Parses one atom in the ASCII grammar; the result is canonical.
pub fn parse_atom(text: &str) -> Result<Atom> {
    let mut cur = Cursor { text, pos: 0 };
    cur.skip_ws();
    // a left side that starts with the separator is the empty list written
    // without "()"; the grammar forbids that
    if cur.rest().starts_with(SEP) {
        return Err(cur.error("expected a variable list before `_|_`"));
    }
    let left = cur.varlist()?;
    if !cur.eat(SEP) {
        return Err(cur.error("expected `_|_`"));
    }
    let condition = if cur.rest().starts_with('{') {
        cur.pos += 1;
        let c = cur.varlist()?;
        if !cur.eat("}") {
            return Err(cur.error("expected `}`"));
        }
        Some(c)
    } else {
        None
    };
    let right = cur.varlist()?;
    cur.skip_ws();
    if !cur.rest().is_empty() {
        return Err(cur.error("unexpected trailing input"));
    }
    Ok(match condition {
        None => Atom::marginal(left, right),
        Some(c) => Atom::conditional(left, right, c),
    })
}

/// Σ together with the variable universe it is interpreted over.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomSet {
    atoms: BTreeSet<Atom>,
    universe: VarSet,
}

impl AtomSet {
    pub fn new<I: IntoIterator<Item = Atom>>(atoms: I) -> Self {
        Self::with_universe(atoms, VarSet::new())
    }

    /// `extra` is added to the universe on top of the variables of `atoms`.
    pub fn with_universe<I, V>(atoms: I, extra: V) -> Self
    where
        I: IntoIterator<Item = Atom>,
        V: IntoIterator<Item = Variable>,
    {
        let atoms: BTreeSet<Atom> = atoms.into_iter().collect();
        let mut universe: VarSet = extra.into_iter().collect();
        for a in &atoms {
            universe.extend(a.vars());
        }
        AtomSet { atoms, universe }
    }

    pub fn atoms(&self) -> &BTreeSet<Atom> {
        &self.atoms
    }

    pub fn universe(&self) -> &VarSet {
        &self.universe
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn contains(&self, a: &Atom) -> bool {
        self.atoms.contains(a)
    }

    pub fn insert(&mut self, a: Atom) {
        self.universe.extend(a.vars());
        self.atoms.insert(a);
    }

    pub fn extend_universe<I: IntoIterator<Item = Variable>>(&mut self, vars: I) {
        self.universe.extend(vars);
    }

    /// Variables occurring in at least one atom.
    pub fn occurring_vars(&self) -> VarSet {
        self.atoms.iter().flat_map(|a| a.vars()).collect()
    }

    pub fn all_marginal(&self) -> bool {
        self.atoms.iter().all(Atom::is_marginal)
    }
}

impl FromIterator<Atom> for AtomSet {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        AtomSet::new(iter)
    }
}

/// Parses an atom file: one atom per line, `#` comments, blank lines
/// ignored, optional leading `vars: a,b,c` declaration.
pub fn parse_atom_file(text: &str) -> Result<AtomSet> {
    let mut set = AtomSet::default();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_content {
            seen_content = true;
            if let Some(decl) = line.strip_prefix("vars:") {
                let vars = parse_var_decl(decl).map_err(|e| e.at_line(i + 1))?;
                set.extend_universe(vars);
                continue;
            }
        }
        let atom = parse_atom(line).map_err(|e| e.at_line(i + 1))?;
        set.insert(atom);
    }
    Ok(set)
}

fn parse_var_decl(decl: &str) -> Result<Vec<Variable>> {
    let decl = decl.trim();
    if decl.is_empty() || decl == "()" {
        return Ok(Vec::new());
    }
    decl.split(',')
        .map(|name| {
            let name = name.trim();
            Variable::new(name)
        })
        .collect()
}

/// Parses a `;`-separated inline list of atoms. Empty entries are skipped.
pub fn parse_atom_list(text: &str) -> Result<Vec<Atom>> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_atom)
        .collect()
}

/// Convenience constructor used throughout tests: `vars(["x", "y"])`.
pub fn vars<'a, I: IntoIterator<Item = &'a str>>(names: I) -> Vec<Variable> {
    names
        .into_iter()
        .map(|n| Variable::new(n).expect("valid variable name"))
        .collect()
}
