//! Team semantics for marginal and conditional atoms, and a canonical
//! small-model search for refuting teams.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::atoms::{Atom, AtomSet, VarSet, Variable};
use crate::calculus::{sample_instance, RuleFamily, SoundnessReport, Violation};
use crate::error::{Error, Result};

/// A finite set of assignments over a common domain. Columns follow the
/// canonical variable order and rows are kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Team {
    dom: Vec<Variable>,
    rows: Vec<Vec<i64>>,
}

impl Team {
    /// Builds a team from columns in any order; rows are reordered to match
    /// the sorted domain and deduplicated.
    pub fn new(dom: Vec<Variable>, rows: Vec<Vec<i64>>) -> Result<Team> {
        let mut order: Vec<usize> = (0..dom.len()).collect();
        order.sort_by(|&a, &b| dom[a].cmp(&dom[b]));
        if let Some(w) = order.windows(2).find(|w| dom[w[0]] == dom[w[1]]) {
            return Err(Error::Team(format!("duplicate column `{}`", dom[w[0]])));
        }
        let mut out = BTreeSet::new();
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dom.len() {
                return Err(Error::Team(format!(
                    "row {} has {} values, expected {}",
                    i + 1,
                    row.len(),
                    dom.len()
                )));
            }
            out.insert(order.iter().map(|&c| row[c]).collect::<Vec<_>>());
        }
        Ok(Team {
            dom: order.iter().map(|&c| dom[c].clone()).collect(),
            rows: out.into_iter().collect(),
        })
    }

    pub fn dom(&self) -> &[Variable] {
        &self.dom
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values used anywhere in the team.
    pub fn values(&self) -> BTreeSet<i64> {
        self.rows.iter().flatten().copied().collect()
    }

    pub fn get(&self, row: usize, var: &Variable) -> Option<i64> {
        let c = self.column(var)?;
        self.rows.get(row).map(|r| r[c])
    }

    fn column(&self, var: &Variable) -> Option<usize> {
        self.dom.binary_search(var).ok()
    }

    fn columns(&self, set: &VarSet) -> Result<Vec<usize>> {
        set.iter()
            .map(|v| {
                self.column(v)
                    .ok_or_else(|| Error::UnboundVariable(v.to_string()))
            })
            .collect()
    }

    /// Whether `var` takes a single value on the team.
    pub fn is_constant(&self, var: &Variable) -> Result<bool> {
        let c = self
            .column(var)
            .ok_or_else(|| Error::UnboundVariable(var.to_string()))?;
        Ok(self.rows.windows(2).all(|w| w[0][c] == w[1][c]))
    }

    /// Reads a CSV team: header of variable names, one integer row per
    /// assignment.
    pub fn from_csv(text: &str) -> Result<Team> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| Error::Team(e.to_string()))?
            .clone();
        let dom = header
            .iter()
            .map(Variable::new)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| e.at_line(1))?;
        let mut rows = Vec::new();
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Team(e.to_string()).at_line(line))?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<i64>()
                        .map_err(|_| Error::Team(format!("`{f}` is not an integer")))
                })
                .collect::<Result<Vec<_>>>()
                .map_err(|e| e.at_line(line))?;
            rows.push(row);
        }
        Team::new(dom, rows)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.dom.iter().map(Variable::name))
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(i64::to_string))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

impl fmt::Display for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

fn project(row: &[i64], cols: &[usize]) -> Vec<i64> {
    cols.iter().map(|&c| row[c]).collect()
}

fn agrees(a: &[i64], b: &[i64], cols: &[usize]) -> bool {
    cols.iter().all(|&c| a[c] == b[c])
}

fn require_marginal(a: &Atom) -> Result<()> {
    if a.is_marginal() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("`{a}` is not a marginal atom")))
    }
}

/// The literal definition: for all rows s, s' some row agrees with s on the
/// left side and with s' on the right side.
pub fn satisfies_marginal_forall_exists(team: &Team, a: &Atom) -> Result<bool> {
    require_marginal(a)?;
    let l = team.columns(a.left())?;
    let r = team.columns(a.right())?;
    let rows = &team.rows;
    Ok(rows.iter().all(|s| {
        rows.iter()
            .all(|t| rows.iter().any(|w| agrees(w, s, &l) && agrees(w, t, &r)))
    }))
}

/// Projection test for disjoint sides: the projection on left ∪ right is
/// the product of the two side projections.
pub fn satisfies_marginal_product(team: &Team, a: &Atom) -> Result<bool> {
    require_marginal(a)?;
    if !a.left().is_disjoint(a.right()) {
        return Err(Error::Invalid(format!(
            "projection test needs disjoint sides, got `{a}`"
        )));
    }
    let l = team.columns(a.left())?;
    let r = team.columns(a.right())?;
    let px: BTreeSet<Vec<i64>> = team.rows.iter().map(|s| project(s, &l)).collect();
    let py: BTreeSet<Vec<i64>> = team.rows.iter().map(|s| project(s, &r)).collect();
    let joint: BTreeSet<(Vec<i64>, Vec<i64>)> = team
        .rows
        .iter()
        .map(|s| (project(s, &l), project(s, &r)))
        .collect();
    let product: BTreeSet<(Vec<i64>, Vec<i64>)> = px
        .iter()
        .flat_map(|x| py.iter().map(move |y| (x.clone(), y.clone())))
        .collect();
    Ok(joint == product)
}

/// Marginal satisfaction: the projection test when the sides are disjoint,
/// the literal definition otherwise.
pub fn satisfies_marginal(team: &Team, a: &Atom) -> Result<bool> {
    require_marginal(a)?;
    if a.left().is_disjoint(a.right()) {
        satisfies_marginal_product(team, a)
    } else {
        satisfies_marginal_forall_exists(team, a)
    }
}

/// Conditional satisfaction: inside each block of rows agreeing on the
/// condition, every left value meets every right value. Marginal atoms are
/// read with an empty condition.
pub fn satisfies_conditional(team: &Team, a: &Atom) -> Result<bool> {
    let l = team.columns(a.left())?;
    let r = team.columns(a.right())?;
    let z = team.columns(a.condition())?;
    let mut keyed: Vec<(Vec<i64>, Vec<i64>, Vec<i64>)> = team
        .rows
        .iter()
        .map(|s| (project(s, &z), project(s, &l), project(s, &r)))
        .collect();
    keyed.sort();
    keyed.dedup();
    Ok(keyed.chunk_by(|a, b| a.0 == b.0).all(|block| {
        let xs: HashSet<&Vec<i64>> = block.iter().map(|t| &t.1).collect();
        let ys: HashSet<&Vec<i64>> = block.iter().map(|t| &t.2).collect();
        block.len() == xs.len() * ys.len()
    }))
}

pub fn satisfies(team: &Team, a: &Atom) -> Result<bool> {
    if a.is_marginal() {
        satisfies_marginal(team, a)
    } else {
        satisfies_conditional(team, a)
    }
}

pub fn satisfies_set(team: &Team, sigma: &AtomSet) -> Result<bool> {
    for a in sigma.iter() {
        if !satisfies(team, a)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Limits of the countermodel search. `max_teams` caps the number of
/// candidate teams examined; `None` means the bounded space is searched
/// exhaustively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub max_values: usize,
    pub max_rows: usize,
    pub max_teams: Option<u64>,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            max_values: 4,
            max_rows: 16,
            max_teams: None,
        }
    }
}

impl SearchBounds {
    pub fn new(max_values: usize, max_rows: usize) -> Self {
        SearchBounds {
            max_values,
            max_rows,
            max_teams: None,
        }
    }
}

/// Largest value count the search will try.
pub const MAX_SEARCH_VALUES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Team),
    /// Every team within the bounds was examined.
    Exhausted,
    BudgetExceeded,
}

impl SearchOutcome {
    pub fn team(self) -> Option<Team> {
        match self {
            SearchOutcome::Found(t) => Some(t),
            _ => None,
        }
    }
}

/// An atom compiled against a column order.
struct Compiled {
    l: Vec<usize>,
    r: Vec<usize>,
    z: Vec<usize>,
}

impl Compiled {
    fn new(a: &Atom, dom: &[Variable]) -> Compiled {
        let cols = |s: &VarSet| -> Vec<usize> {
            s.iter()
                .map(|v| dom.binary_search(v).expect("atom variable in domain"))
                .collect()
        };
        Compiled {
            l: cols(a.left()),
            r: cols(a.right()),
            z: cols(a.condition()),
        }
    }

    fn holds(&self, rows: &[Vec<u8>], scratch: &mut Scratch) -> bool {
        let code = |row: &[u8], cols: &[usize]| -> u64 {
            cols.iter().fold(0, |acc, &c| (acc << 4) | row[c] as u64)
        };
        let t = &mut scratch.triples;
        t.clear();
        t.extend(
            rows.iter()
                .map(|s| (code(s, &self.z), code(s, &self.l), code(s, &self.r))),
        );
        t.sort_unstable();
        t.dedup();
        let ys = &mut scratch.ys;
        t.chunk_by(|a, b| a.0 == b.0).all(|block| {
            let nx = 1 + block.windows(2).filter(|w| w[0].1 != w[1].1).count();
            ys.clear();
            ys.extend(block.iter().map(|t| t.2));
            ys.sort_unstable();
            ys.dedup();
            block.len() == nx * ys.len()
        })
    }
}

#[derive(Default)]
struct Scratch {
    triples: Vec<(u64, u64, u64)>,
    ys: Vec<u64>,
}

/// Enumerates teams over `n` columns in canonical order: value count first,
/// then row count, then the lexicographic order of the sorted row sequence.
/// Within each column values first appear in increasing order, so every
/// team is reached up to a per-column relabelling of values. At value count
/// `k` only teams using the value `k - 1` are visited.
fn enumerate_teams<F>(
    n: usize,
    max_values: usize,
    max_rows: usize,
    budget: Option<u64>,
    mut visit: F,
) -> SearchOutcome
where
    F: FnMut(&[Vec<u8>]) -> ControlFlow<Team>,
{
    let mut seen = 0u64;
    for k in 1..=max_values.min(MAX_SEARCH_VALUES) {
        let cells = (k as u64).checked_pow(n as u32).unwrap_or(u64::MAX);
        for r in 1..=max_rows {
            if (r as u64) > cells {
                break;
            }
            let mut e = Enumerator {
                n,
                k,
                cells,
                target: r,
                rows: Vec::with_capacity(r),
                col_max: vec![vec![-1i16; n]],
                seen: &mut seen,
                budget,
            };
            match e.dfs(0, &mut visit) {
                Step::Continue => {}
                Step::Found(t) => return SearchOutcome::Found(t),
                Step::Budget => return SearchOutcome::BudgetExceeded,
            }
        }
    }
    SearchOutcome::Exhausted
}

enum Step {
    Continue,
    Found(Team),
    Budget,
}

struct Enumerator<'a> {
    n: usize,
    k: usize,
    cells: u64,
    target: usize,
    rows: Vec<Vec<u8>>,
    col_max: Vec<Vec<i16>>,
    seen: &'a mut u64,
    budget: Option<u64>,
}

impl Enumerator<'_> {
    fn decode(&self, mut cell: u64) -> Vec<u8> {
        let mut digits = vec![0u8; self.n];
        for d in digits.iter_mut().rev() {
            *d = (cell % self.k as u64) as u8;
            cell /= self.k as u64;
        }
        digits
    }

    fn dfs<F>(&mut self, from: u64, visit: &mut F) -> Step
    where
        F: FnMut(&[Vec<u8>]) -> ControlFlow<Team>,
    {
        if self.rows.len() == self.target {
            let top = self.col_max.last().expect("nonempty");
            if self.k > 1 && !top.iter().any(|&m| m == self.k as i16 - 1) {
                return Step::Continue;
            }
            *self.seen += 1;
            if self.budget.is_some_and(|b| *self.seen > b) {
                return Step::Budget;
            }
            return match visit(&self.rows) {
                ControlFlow::Break(t) => Step::Found(t),
                ControlFlow::Continue(()) => Step::Continue,
            };
        }
        let left = (self.target - self.rows.len()) as u64;
        let mut cell = from;
        while cell + left <= self.cells {
            let digits = self.decode(cell);
            let maxes = self.col_max.last().expect("nonempty");
            // first column whose value would skip ahead of the next unused label
            if let Some(j) = (0..self.n).find(|&j| digits[j] as i16 > maxes[j] + 1) {
                // jump past every cell sharing this prefix
                let weight = (self.k as u64).pow((self.n - 1 - j) as u32);
                cell = (cell / weight + 1) * weight;
                continue;
            }
            let next: Vec<i16> = maxes
                .iter()
                .zip(&digits)
                .map(|(&m, &d)| m.max(d as i16))
                .collect();
            self.col_max.push(next);
            self.rows.push(digits);
            let step = self.dfs(cell + 1, visit);
            self.rows.pop();
            self.col_max.pop();
            match step {
                Step::Continue => {}
                other => return other,
            }
            cell += 1;
        }
        Step::Continue
    }
}

fn to_team(dom: &[Variable], rows: &[Vec<u8>]) -> Team {
    Team::new(
        dom.to_vec(),
        rows.iter()
            .map(|r| r.iter().map(|&v| v as i64).collect())
            .collect(),
    )
    .expect("well-formed search team")
}

/// Value count actually searched. Marginal independence is preserved by
/// value maps, and a failing marginal goal stays failing under a suitable
/// two-valued coarsening of each column, so two values suffice when every
/// atom is marginal.
fn effective_values(sigma: &AtomSet, goal: &Atom, max_values: usize) -> usize {
    if sigma.all_marginal() && goal.is_marginal() {
        max_values.min(2)
    } else {
        max_values
    }
}

/// Searches for the canonically least team over the variables of Σ and the
/// goal that satisfies Σ and refutes the goal.
pub fn search_counterexample_team(
    sigma: &AtomSet,
    goal: &Atom,
    bounds: SearchBounds,
) -> SearchOutcome {
    let mut dom_set = sigma.occurring_vars();
    dom_set.extend(goal.vars());
    let dom: Vec<Variable> = dom_set.into_iter().collect();
    let goal_c = Compiled::new(goal, &dom);
    let sigma_c: Vec<Compiled> = sigma.iter().map(|a| Compiled::new(a, &dom)).collect();
    let mut scratch = Scratch::default();
    let values = effective_values(sigma, goal, bounds.max_values);
    let outcome = enumerate_teams(
        dom.len(),
        values,
        bounds.max_rows,
        bounds.max_teams,
        |rows| {
            if !goal_c.holds(rows, &mut scratch)
                && sigma_c.iter().all(|a| a.holds(rows, &mut scratch))
            {
                ControlFlow::Break(to_team(&dom, rows))
            } else {
                ControlFlow::Continue(())
            }
        },
    );
    if let SearchOutcome::Found(t) = &outcome {
        assert!(
            satisfies_set(t, sigma).expect("domain covers Σ")
                && !satisfies(t, goal).expect("domain covers goal"),
            "countermodel search produced an unverified team"
        );
    }
    outcome
}

/// A verified team satisfying Σ and refuting the goal, if one exists within
/// the bounds.
pub fn find_counterexample_team(
    sigma: &AtomSet,
    goal: &Atom,
    bounds: SearchBounds,
) -> Option<Team> {
    search_counterexample_team(sigma, goal, bounds).team()
}

/// Answers many marginal countermodel queries over one fixed domain. Teams
/// are visited in the same order as [`search_counterexample_team`], keeping
/// the first team for each distinct set of satisfied atoms, so a query
/// returns exactly the team the direct search would return.
#[derive(Debug, Clone)]
pub struct CountermodelIndex {
    dom: Vec<Variable>,
    words: usize,
    entries: Vec<(Vec<u64>, Team)>,
    outcome_exhaustive: bool,
}

/// Largest domain accepted by [`CountermodelIndex`] (4^n marginal atoms).
pub const MAX_INDEX_VARS: usize = 6;

impl CountermodelIndex {
    pub fn new(dom: &VarSet, bounds: SearchBounds) -> Result<Self> {
        if dom.len() > MAX_INDEX_VARS {
            return Err(Error::UniverseTooLarge {
                size: dom.len(),
                max: MAX_INDEX_VARS,
            });
        }
        let dom: Vec<Variable> = dom.iter().cloned().collect();
        let n = dom.len();
        let atoms: Vec<Compiled> = (0..1usize << (2 * n))
            .map(|id| {
                let (l, r) = (id & ((1 << n) - 1), id >> n);
                let bits = |m: usize| (0..n).filter(|i| m & (1 << i) != 0).collect();
                Compiled {
                    l: bits(l),
                    r: bits(r),
                    z: vec![],
                }
            })
            .collect();
        let words = atoms.len().div_ceil(64);
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut entries = Vec::new();
        let mut scratch = Scratch::default();
        let outcome = enumerate_teams(
            n,
            bounds.max_values.min(2),
            bounds.max_rows,
            bounds.max_teams,
            |rows| {
                let mut mask = vec![0u64; words];
                for (id, a) in atoms.iter().enumerate() {
                    if a.holds(rows, &mut scratch) {
                        mask[id / 64] |= 1 << (id % 64);
                    }
                }
                if seen.insert(mask.clone()) {
                    entries.push((mask, to_team(&dom, rows)));
                }
                ControlFlow::Continue(())
            },
        );
        Ok(CountermodelIndex {
            dom,
            words,
            entries,
            outcome_exhaustive: outcome == SearchOutcome::Exhausted,
        })
    }

    pub fn dom(&self) -> &[Variable] {
        &self.dom
    }

    /// Number of distinct satisfaction profiles found.
    pub fn profiles(&self) -> usize {
        self.entries.len()
    }

    fn id(&self, a: &Atom) -> Result<usize> {
        let n = self.dom.len();
        let mask = |s: &VarSet| -> Result<usize> {
            s.iter().try_fold(0, |m, v| {
                self.dom
                    .binary_search(v)
                    .map(|i| m | (1 << i))
                    .map_err(|_| Error::UnboundVariable(v.to_string()))
            })
        };
        Ok(mask(a.left())? | (mask(a.right())? << n))
    }

    /// The team [`search_counterexample_team`] returns for this marginal
    /// query. The variables of Σ and the goal must be exactly the domain.
    pub fn query(&self, sigma: &AtomSet, goal: &Atom) -> Result<SearchOutcome> {
        let mut vars = sigma.occurring_vars();
        vars.extend(goal.vars());
        if !vars.iter().eq(self.dom.iter()) || !sigma.all_marginal() || !goal.is_marginal() {
            return Err(Error::Invalid(
                "index queries need marginal atoms spanning exactly the index domain".into(),
            ));
        }
        let mut need = vec![0u64; self.words];
        for a in sigma.iter() {
            let id = self.id(a)?;
            need[id / 64] |= 1 << (id % 64);
        }
        let g = self.id(goal)?;
        let hit = self.entries.iter().find(|(mask, _)| {
            mask[g / 64] & (1 << (g % 64)) == 0 && mask.iter().zip(&need).all(|(m, n)| m & n == *n)
        });
        Ok(match hit {
            Some((_, t)) => SearchOutcome::Found(t.clone()),
            None if self.outcome_exhaustive => SearchOutcome::Exhausted,
            None => SearchOutcome::BudgetExceeded,
        })
    }
}

/// Random team over `dom` for fuzzing: a few rows over a small value set,
/// with some columns held constant so that independence premises hold
/// often enough to matter.
pub fn random_team<R: Rng>(
    dom: &[Variable],
    max_values: usize,
    max_rows: usize,
    rng: &mut R,
) -> Team {
    let k = rng.gen_range(1..=max_values.max(1)) as i64;
    let rows = rng.gen_range(1..=max_rows.max(1));
    let constant: Vec<bool> = dom.iter().map(|_| rng.gen_bool(0.25)).collect();
    let data = (0..rows)
        .map(|_| {
            constant
                .iter()
                .map(|&c| if c { 0 } else { rng.gen_range(0..k) })
                .collect()
        })
        .collect();
    Team::new(dom.to_vec(), data).expect("well-formed random team")
}

/// Checks every rule of `family` on `trials` random instances, each against
/// a fresh random team over four variables.
pub fn team_soundness_fuzz(family: RuleFamily, trials: usize, seed: u64) -> SoundnessReport {
    let dom = crate::atoms::vars(["a", "b", "c", "d"]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SoundnessReport::default();
    for &rule in family.rules() {
        for _ in 0..trials {
            let team = random_team(&dom, 3, 6, &mut rng);
            let inst = sample_instance(rule, &dom, &mut rng);
            let held = inst
                .premises
                .iter()
                .all(|p| satisfies(&team, p).expect("fuzz atoms lie in the team domain"));
            report.record(rule, held);
            if held
                && !satisfies(&team, &inst.conclusion).expect("fuzz atoms lie in the team domain")
            {
                report.violations.push(Violation {
                    rule,
                    premises: inst.premises,
                    conclusion: inst.conclusion,
                    witness: team.to_csv(),
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atoms::{parse_atom, vars};
    use proptest::prelude::*;

    fn atom(s: &str) -> Atom {
        parse_atom(s).unwrap()
    }

    fn team(dom: &[&str], rows: &[&[i64]]) -> Team {
        Team::new(
            vars(dom.iter().copied()),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .unwrap()
    }

    fn sigma(atoms: &[&str]) -> AtomSet {
        AtomSet::new(atoms.iter().map(|s| atom(s)))
    }

    #[test]
    fn marginal_examples() {
        let t = team(&["x", "y"], &[&[0, 0], &[0, 1]]);
        assert!(satisfies_marginal(&t, &atom("x _|_ y")).unwrap());
        let t = team(&["x", "y", "z"], &[&[0, 0, 0], &[1, 0, 1]]);
        assert!(!satisfies_marginal(&t, &atom("x _|_ z")).unwrap());
        let single = team(&["x", "y"], &[&[3, 4]]);
        for a in ["x _|_ y", "x _|_ x", "x,y _|_ x,y", "() _|_ ()"] {
            assert!(satisfies_marginal(&single, &atom(a)).unwrap());
        }
    }

    #[test]
    fn conditional_examples() {
        let t = team(&["x", "y", "z"], &[&[0, 0, 0], &[1, 1, 1]]);
        assert!(satisfies_conditional(&t, &atom("x _|_{z} y")).unwrap());
        let t = team(&["x", "y", "z"], &[&[0, 0, 0], &[1, 1, 0]]);
        assert!(!satisfies_conditional(&t, &atom("x _|_{z} y")).unwrap());
        assert!(satisfies_conditional(&t, &atom("x _|_{x} y")).unwrap());
    }

    #[test]
    fn set_examples() {
        let t = team(&["x", "z"], &[&[0, 0], &[1, 1]]);
        assert!(satisfies_set(&t, &AtomSet::default()).unwrap());
        assert!(!satisfies_set(&t, &sigma(&["x _|_ z"])).unwrap());
        let single = team(&["x", "y", "z"], &[&[0, 0, 0]]);
        assert!(satisfies_set(&single, &sigma(&["x _|_ y", "x _|_{z} y"])).unwrap());
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let t = team(&["x"], &[&[0]]);
        assert!(matches!(
            satisfies(&t, &atom("x _|_ y")),
            Err(Error::UnboundVariable(v)) if v == "y"
        ));
    }

    #[test]
    fn csv_round_trip_reorders_columns() {
        let t = Team::from_csv("y,x\n1,0\n0,0\n1,0\n").unwrap();
        assert_eq!(t.dom(), vars(["x", "y"]).as_slice());
        assert_eq!(t.rows(), &[vec![0, 0], vec![0, 1]]);
        assert_eq!(t.to_csv(), "x,y\n0,0\n0,1\n");
        assert_eq!(Team::from_csv(&t.to_csv()).unwrap(), t);
    }

    #[test]
    fn csv_errors_name_lines() {
        let err = Team::from_csv("x,y\n0,1\n0,a\n").unwrap_err();
        assert!(matches!(err, Error::Line { line: 3, .. }), "{err}");
        assert!(Team::from_csv("x,x\n0,0\n").is_err());
    }

    #[test]
    fn search_finds_least_team() {
        let t = find_counterexample_team(
            &sigma(&["x _|_ y"]),
            &atom("x _|_ z"),
            SearchBounds::new(2, 4),
        )
        .unwrap();
        assert_eq!(t, team(&["x", "y", "z"], &[&[0, 0, 0], &[1, 0, 1]]));
    }

    #[test]
    fn search_finds_nothing_for_valid_goals() {
        assert_eq!(
            search_counterexample_team(
                &AtomSet::default(),
                &atom("x _|_ ()"),
                SearchBounds::default()
            ),
            SearchOutcome::Exhausted
        );
        assert_eq!(
            find_counterexample_team(
                &sigma(&["x _|_ x"]),
                &atom("x _|_ y"),
                SearchBounds::default()
            ),
            None
        );
    }

    #[test]
    fn conditional_search() {
        let t = find_counterexample_team(
            &sigma(&["x _|_{z} y"]),
            &atom("x _|_{w} y"),
            SearchBounds::default(),
        )
        .unwrap();
        assert!(satisfies(&t, &atom("x _|_{z} y")).unwrap());
        assert!(!satisfies(&t, &atom("x _|_{w} y")).unwrap());
    }

    #[test]
    fn budget_is_reported() {
        let bounds = SearchBounds {
            max_teams: Some(3),
            ..SearchBounds::default()
        };
        let out = search_counterexample_team(&AtomSet::default(), &atom("x,y _|_ ()"), bounds);
        assert_eq!(out, SearchOutcome::BudgetExceeded);
    }

    fn canonical(rows: &[Vec<u8>], perms: &[Vec<u8>]) -> Vec<Vec<u8>> {
        let n = rows[0].len();
        let mut best: Option<Vec<Vec<u8>>> = None;
        let mut choice = vec![0usize; n];
        loop {
            let mut image: Vec<Vec<u8>> = rows
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .map(|(j, &v)| perms[choice[j]][v as usize])
                        .collect()
                })
                .collect();
            image.sort();
            if best.as_ref().map_or(true, |b| image < *b) {
                best = Some(image);
            }
            let mut j = 0;
            while j < n {
                choice[j] += 1;
                if choice[j] < perms.len() {
                    break;
                }
                choice[j] = 0;
                j += 1;
            }
            if j == n {
                return best.expect("at least one relabelling");
            }
        }
    }

    fn permutations(k: usize) -> Vec<Vec<u8>> {
        let mut out = vec![vec![]];
        for _ in 0..k {
            out = out
                .into_iter()
                .flat_map(|p: Vec<u8>| {
                    (0..k as u8)
                        .filter(|v| !p.contains(v))
                        .map(|v| {
                            let mut q = p.clone();
                            q.push(v);
                            q
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        out
    }

    #[test]
    fn enumeration_reaches_every_orbit() {
        for (n, k, r) in [(2, 2, 4), (2, 3, 5), (3, 2, 8), (1, 3, 3)] {
            let perms = permutations(k);
            let mut visited = Vec::new();
            enumerate_teams(n, k, r, None, |rows| {
                visited.push(canonical(rows, &perms));
                ControlFlow::Continue(())
            });
            let cells: Vec<Vec<u8>> = (0..k.pow(n as u32))
                .map(|mut c| {
                    let mut d = vec![0u8; n];
                    for x in d.iter_mut().rev() {
                        *x = (c % k) as u8;
                        c /= k;
                    }
                    d
                })
                .collect();
            let mut orbits = HashSet::new();
            for subset in 1u32..(1 << cells.len()) {
                if subset.count_ones() as usize <= r {
                    let rows: Vec<Vec<u8>> = (0..cells.len())
                        .filter(|i| subset & (1 << i) != 0)
                        .map(|i| cells[i].clone())
                        .collect();
                    orbits.insert(canonical(&rows, &perms));
                }
            }
            let distinct: HashSet<Vec<Vec<u8>>> = visited.iter().cloned().collect();
            assert_eq!(distinct, orbits, "n={n} k={k} r={r}");
        }
    }

    #[test]
    fn two_values_suffice_for_marginal_queries() {
        // compare against a direct three-valued search on every query over
        // two variables with up to two hypotheses
        let dom = vars(["x", "y"]);
        let all: Vec<Atom> = (0..16)
            .map(|id| {
                let pick = |m: usize| {
                    dom.iter()
                        .enumerate()
                        .filter(move |(i, _)| m & (1 << i) != 0)
                        .map(|(_, v)| v.clone())
                };
                Atom::marginal(pick(id & 3), pick(id >> 2))
            })
            .collect();
        let full = |sigma: &AtomSet, goal: &Atom| -> bool {
            let dom: Vec<Variable> = {
                let mut d = sigma.occurring_vars();
                d.extend(goal.vars());
                d.into_iter().collect()
            };
            let g = Compiled::new(goal, &dom);
            let s: Vec<Compiled> = sigma.iter().map(|a| Compiled::new(a, &dom)).collect();
            let mut scratch = Scratch::default();
            matches!(
                enumerate_teams(dom.len(), 3, 9, None, |rows| {
                    if !g.holds(rows, &mut scratch) && s.iter().all(|a| a.holds(rows, &mut scratch))
                    {
                        ControlFlow::Break(to_team(&dom, rows))
                    } else {
                        ControlFlow::Continue(())
                    }
                }),
                SearchOutcome::Found(_)
            )
        };
        for i in 0..16 {
            for j in i..16 {
                let s = AtomSet::new([all[i].clone(), all[j].clone()]);
                for g in &all {
                    let reduced =
                        find_counterexample_team(&s, g, SearchBounds::new(3, 9)).is_some();
                    assert_eq!(reduced, full(&s, g), "Σ={:?} goal={g}", s.atoms());
                }
            }
        }
    }

    #[test]
    fn index_agrees_with_direct_search() {
        let dom: VarSet = vars(["x", "y", "z"]).into_iter().collect();
        let index = CountermodelIndex::new(&dom, SearchBounds::default()).unwrap();
        let cases = [
            (vec!["x _|_ y"], "x _|_ z"),
            (vec!["x _|_ y", "x,y _|_ z"], "x _|_ y,z"),
            (vec!["x _|_ x"], "x _|_ y,z"),
            (vec!["x,y _|_ z"], "x _|_ y"),
        ];
        for (s, g) in cases {
            let s = sigma(&s);
            let g = atom(g);
            assert_eq!(
                index.query(&s, &g).unwrap(),
                search_counterexample_team(&s, &g, SearchBounds::default()),
                "{g}"
            );
        }
    }

    #[test]
    fn team_fuzz_is_sound() {
        for family in [RuleFamily::Marginal, RuleFamily::Conditional] {
            let report = team_soundness_fuzz(family, 300, 11);
            assert!(report.is_sound(), "{:?}", report.violations.first());
            assert!(report.per_rule.values().all(|s| s.premises_held > 0));
        }
    }

    fn arb_team() -> impl Strategy<Value = Team> {
        (1usize..=4, 1i64..=3, 1usize..=8).prop_flat_map(|(n, k, r)| {
            prop::collection::vec(prop::collection::vec(0..k, n), 1..=r).prop_map(move |rows| {
                let dom: Vec<Variable> = ["a", "b", "c", "d"][..n]
                    .iter()
                    .map(|s| Variable::new(*s).unwrap())
                    .collect();
                Team::new(dom, rows).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn product_matches_forall_exists(t in arb_team(), lm in 0usize..16, rm in 0usize..16) {
            let n = t.dom().len();
            let pick = |m: usize| t.dom().iter().take(n).enumerate().filter(move |(i, _)| m & (1 << i) != 0).map(|(_, v)| v.clone()).collect::<Vec<_>>();
            let l = pick(lm);
            let r: Vec<Variable> = pick(rm).into_iter().filter(|v| !l.contains(v)).collect();
            let a = Atom::marginal(l, r);
            prop_assert_eq!(
                satisfies_marginal_product(&t, &a).unwrap(),
                satisfies_marginal_forall_exists(&t, &a).unwrap()
            );
        }

        #[test]
        fn self_independence_means_constant(t in arb_team()) {
            for v in t.dom() {
                let a = Atom::marginal([v.clone()], [v.clone()]);
                prop_assert_eq!(satisfies(&t, &a).unwrap(), t.is_constant(v).unwrap());
            }
        }

        #[test]
        fn conditional_with_empty_condition_matches_marginal(t in arb_team(), lm in 0usize..16, rm in 0usize..16) {
            let pick = |m: usize| t.dom().iter().enumerate().filter(move |(i, _)| m & (1 << i) != 0).map(|(_, v)| v.clone()).collect::<Vec<_>>();
            let a = Atom::marginal(pick(lm), pick(rm));
            prop_assert_eq!(
                satisfies_conditional(&t, &a.lifted()).unwrap(),
                satisfies_marginal_forall_exists(&t, &a).unwrap()
            );
        }

        #[test]
        fn overlap_reduces_to_disjoint_parts(t in arb_team(), lm in 0usize..16, rm in 0usize..16) {
            let pick = |m: usize| t.dom().iter().enumerate().filter(move |(i, _)| m & (1 << i) != 0).map(|(_, v)| v.clone()).collect::<VarSet>();
            let (l, r) = (pick(lm), pick(rm));
            let shared_constant = l.intersection(&r).all(|v| t.is_constant(v).unwrap());
            let parts = Atom::marginal(l.difference(&r).cloned(), r.difference(&l).cloned());
            let whole = Atom::marginal(l, r);
            prop_assert_eq!(
                satisfies(&t, &whole).unwrap(),
                shared_constant && satisfies(&t, &parts).unwrap()
            );
        }
    }
}
