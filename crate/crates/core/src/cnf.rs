//! Monotone CNF formulation of the identifying-code problem.
//!
//! Variable `i` is true iff vertex `i` belongs to the code. Every clause is a
//! set of positive literals: one domination clause per ball and one separation
//! clause per pair of vertices, over the symmetric difference of their balls.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::idcode::{detect_twins, CodeCandidate};

/// Sorted, duplicate-free variable indices.
pub type Clause = Vec<usize>;

/// Monotone CNF with variables fixed to true recorded as assumptions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cnf {
    var_count: usize,
    clauses: Vec<Clause>,
    assumptions: BTreeSet<usize>,
}

fn clause_order(a: &Clause, b: &Clause) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl Cnf {
    /// Builds a formula from raw clauses. Clauses are sorted internally but
    /// neither deduplicated nor subsumption-reduced; see [`simplify`].
    pub fn new(var_count: usize, clauses: Vec<Clause>) -> Result<Self> {
        let mut out = Vec::with_capacity(clauses.len());
        for mut c in clauses {
            c.sort_unstable();
            c.dedup();
            if c.is_empty() {
                return Err(Error::Unsatisfiable);
            }
            if let Some(&v) = c.iter().find(|&&v| v >= var_count) {
                return Err(Error::VertexOutOfRange {
                    index: v,
                    count: var_count,
                });
            }
            out.push(c);
        }
        Ok(Cnf {
            var_count,
            clauses: out,
            assumptions: BTreeSet::new(),
        })
    }

    pub fn var_count(&self) -> usize {
        self.var_count
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn assumptions(&self) -> &BTreeSet<usize> {
        &self.assumptions
    }

    /// Variables that are neither assumed nor absent from every clause.
    pub fn clause_variables(&self) -> BTreeSet<usize> {
        self.clauses.iter().flatten().copied().collect()
    }

    /// Variables not fixed by an assumption.
    pub fn free_variables(&self) -> Vec<usize> {
        (0..self.var_count)
            .filter(|v| !self.assumptions.contains(v))
            .collect()
    }

    /// True iff `set` (a true-set over all variables) hits every clause and
    /// contains every assumption.
    pub fn is_satisfied_by(&self, set: &VertexSet) -> bool {
        self.assumptions.iter().all(|&v| set.contains(v))
            && self
                .clauses
                .iter()
                .all(|c| c.iter().any(|&v| set.contains(v)))
    }
}

/// Domination clause per vertex plus a separation clause per unordered pair.
/// Errors with the twin pair when some symmetric difference is empty.
pub fn build_formula(g: &Graph) -> Result<Cnf> {
    if let Some((u, v)) = detect_twins(g) {
        return Err(Error::Twins(u, v));
    }
    let balls = g.balls();
    let n = balls.len();
    let mut clauses: Vec<Clause> = balls.iter().map(VertexSet::to_vec).collect();
    for i in 0..n {
        for j in i + 1..n {
            clauses.push(balls[i].symmetric_difference(&balls[j]).to_vec());
        }
    }
    Cnf::new(n, clauses)
}

/// Removes duplicate clauses and every clause that strictly contains another.
/// The result is sorted by (length, content).
pub fn simplify(f: &Cnf) -> Cnf {
    let mut clauses = f.clauses.clone();
    clauses.sort_by(clause_order);
    clauses.dedup();
    let sets: Vec<VertexSet> = clauses
        .iter()
        .map(|c| VertexSet::from_indices(f.var_count, c.iter().copied()))
        .collect();
    let mut keep: Vec<usize> = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        // Sorted by length, so any subsuming clause has already been kept.
        if !keep.iter().any(|&k| sets[k].is_subset(s)) {
            keep.push(i);
        }
    }
    Cnf {
        var_count: f.var_count,
        clauses: keep.into_iter().map(|i| clauses[i].clone()).collect(),
        assumptions: f.assumptions.clone(),
    }
}

/// Fixes `vars` to true: satisfied clauses disappear and the variables are
/// recorded as assumptions. The result is simplified.
pub fn assign_true(f: &Cnf, vars: &[usize]) -> Result<Cnf> {
    if let Some(&v) = vars.iter().find(|&&v| v >= f.var_count) {
        return Err(Error::VertexOutOfRange {
            index: v,
            count: f.var_count,
        });
    }
    let mut assumptions = f.assumptions.clone();
    assumptions.extend(vars.iter().copied());
    let clauses = f
        .clauses
        .iter()
        .filter(|c| !c.iter().any(|v| vars.contains(v)))
        .cloned()
        .collect();
    Ok(simplify(&Cnf {
        var_count: f.var_count,
        clauses,
        assumptions,
    }))
}

/// Unit clauses fixed to true until none remain.
pub fn propagate_units(f: &Cnf) -> Cnf {
    let mut f = f.clone();
    loop {
        let units: Vec<usize> = f
            .clauses
            .iter()
            .filter(|c| c.len() == 1)
            .map(|c| c[0])
            .collect();
        if units.is_empty() {
            return f;
        }
        f = assign_true(&f, &units).expect("units are in range");
    }
}

/// One sub-formula per combination of pivot literals.
#[derive(Clone, Debug)]
pub struct CaseSplit {
    pub cases: Vec<Case>,
}

#[derive(Clone, Debug)]
pub struct Case {
    /// Variables chosen true for this case (in pivot order).
    pub chosen: Vec<usize>,
    pub formula: Cnf,
}

/// Splits on one literal from each 2-clause pivot, giving `2^p` cases. Their
/// solution sets together cover the parent's.
pub fn case_split(f: &Cnf, pivots: &[[usize; 2]]) -> Result<CaseSplit> {
    for p in pivots {
        let mut c = p.to_vec();
        c.sort_unstable();
        if !f.clauses.contains(&c) {
            return Err(Error::InvalidArgument(format!(
                "pivot {p:?} is not a clause of the formula"
            )));
        }
    }
    let mut cases = Vec::with_capacity(1 << pivots.len());
    for bits in 0..1usize << pivots.len() {
        // Earlier pivots vary slowest.
        let chosen: Vec<usize> = pivots
            .iter()
            .enumerate()
            .map(|(i, p)| p[(bits >> (pivots.len() - 1 - i)) & 1])
            .collect();
        let formula = if chosen.is_empty() {
            f.clone()
        } else {
            assign_true(f, &chosen)?
        };
        cases.push(Case { chosen, formula });
    }
    Ok(CaseSplit { cases })
}

/// Up to `count` two-literal clauses, shortest first then smallest variable.
pub fn choose_pivots(f: &Cnf, count: usize) -> Vec<[usize; 2]> {
    let mut twos: Vec<&Clause> = f.clauses.iter().filter(|c| c.len() == 2).collect();
    twos.sort();
    twos.into_iter().take(count).map(|c| [c[0], c[1]]).collect()
}

/// Clauses in export order: by (length, content), assumptions first as units.
fn export_clauses(f: &Cnf) -> Vec<Clause> {
    let mut clauses = f.clauses.clone();
    clauses.sort_by(clause_order);
    let mut out: Vec<Clause> = f.assumptions.iter().map(|&v| vec![v]).collect();
    out.extend(clauses);
    out
}

/// DIMACS text, 1-based variables, assumptions emitted as unit clauses.
pub fn to_dimacs(f: &Cnf) -> String {
    let clauses = export_clauses(f);
    let mut s = format!("p cnf {} {}\n", f.var_count, clauses.len());
    for c in &clauses {
        for v in c {
            write!(s, "{} ", v + 1).unwrap();
        }
        s.push_str("0\n");
    }
    s
}

pub fn export_dimacs(f: &Cnf, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_dimacs(f))?;
    Ok(())
}

/// Parses monotone DIMACS. Unit clauses are kept as clauses, not assumptions.
pub fn parse_dimacs(text: &str) -> Result<Cnf> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: ln + 1, msg };
        if line.starts_with('p') {
            let parts: Vec<_> = line.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(err(format!("bad header {line:?}")));
            }
            let v = parts[2].parse().map_err(|_| err("bad variable count".into()))?;
            let c = parts[3].parse().map_err(|_| err("bad clause count".into()))?;
            header = Some((v, c));
            continue;
        }
        if header.is_none() {
            return Err(err("clause before header".into()));
        }
        for tok in line.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| err(format!("bad literal {tok:?}")))?;
            match lit {
                0 => clauses.push(std::mem::take(&mut current)),
                l if l < 0 => return Err(err("negative literal in monotone formula".into())),
                l => current.push(l as usize - 1),
            }
        }
    }
    let (vars, count) = header.ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    if !current.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "unterminated clause".into(),
        });
    }
    if clauses.len() != count {
        return Err(Error::Parse {
            line: 0,
            msg: format!("header declares {count} clauses, found {}", clauses.len()),
        });
    }
    Cnf::new(vars, clauses)
}

/// Constraint excluding exactly one assignment: at least one variable must
/// differ from `code`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockingClause {
    code: VertexSet,
}

impl BlockingClause {
    pub fn new(code: &CodeCandidate) -> Self {
        BlockingClause {
            code: code.members().clone(),
        }
    }

    /// True iff `assignment` is the blocked one.
    pub fn is_violated_by(&self, assignment: &VertexSet) -> bool {
        *assignment == self.code
    }

    pub fn code(&self) -> &VertexSet {
        &self.code
    }

    pub fn to_smtlib(&self) -> String {
        let lits: Vec<String> = (0..self.code.len())
            .map(|v| {
                if self.code.contains(v) {
                    format!("(not x{v})")
                } else {
                    format!("x{v}")
                }
            })
            .collect();
        format!("(assert (or {}))", lits.join(" "))
    }
}

pub fn blocking_clause(code: &CodeCandidate) -> BlockingClause {
    BlockingClause::new(code)
}

/// SMT-LIB2 (QF_LIA) text: one boolean per vertex, the clauses, a 0/1
/// integer shadow per boolean, and the cardinality equality `Σ n_i = k`.
pub fn to_smtlib(f: &Cnf, target_size: usize, blocked: &[BlockingClause]) -> String {
    let mut s = String::from("(set-logic QF_LIA)\n");
    for v in 0..f.var_count {
        writeln!(s, "(declare-fun x{v} () Bool)").unwrap();
    }
    for v in &f.assumptions {
        writeln!(s, "(assert x{v})").unwrap();
    }
    let mut clauses = f.clauses.clone();
    clauses.sort_by(clause_order);
    for c in &clauses {
        let lits: Vec<String> = c.iter().map(|v| format!("x{v}")).collect();
        if lits.len() == 1 {
            writeln!(s, "(assert {})", lits[0]).unwrap();
        } else {
            writeln!(s, "(assert (or {}))", lits.join(" ")).unwrap();
        }
    }
    for v in 0..f.var_count {
        writeln!(s, "(declare-fun n{v} () Int)").unwrap();
        writeln!(s, "(assert (and (>= n{v} 0) (<= n{v} 1)))").unwrap();
        writeln!(s, "(assert (= (= n{v} 1) x{v}))").unwrap();
    }
    let sum = match f.var_count {
        0 => "0".to_string(),
        1 => "n0".to_string(),
        _ => format!(
            "(+ {})",
            (0..f.var_count)
                .map(|v| format!("n{v}"))
                .collect::<Vec<_>>()
                .join(" ")
        ),
    };
    writeln!(s, "(assert (= {sum} {target_size}))").unwrap();
    for b in blocked {
        writeln!(s, "{}", b.to_smtlib()).unwrap();
    }
    s.push_str("(check-sat)\n(get-model)\n");
    s
}

pub fn export_smtlib(f: &Cnf, target_size: usize, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, to_smtlib(f, target_size, &[]))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{debruijn, DeBruijnParams};
    use crate::idcode::is_identifying;
    use proptest::prelude::*;

    fn db(d: usize, n: usize) -> Graph {
        debruijn(DeBruijnParams::new(d, n).unwrap()).unwrap()
    }

    fn set_of(n: usize, mask: u64) -> VertexSet {
        VertexSet::from_indices(n, (0..n).filter(|v| mask >> v & 1 == 1))
    }

    fn solutions(f: &Cnf) -> Vec<u64> {
        (0..1u64 << f.var_count())
            .filter(|&m| f.is_satisfied_by(&set_of(f.var_count(), m)))
            .collect()
    }

    #[test]
    fn b24_raw_and_simplified_counts() {
        let f = build_formula(&db(2, 4)).unwrap();
        assert_eq!(f.clauses().len(), 136);
        assert_eq!(f.var_count(), 16);
        assert!(f.clauses().contains(&vec![3, 11]));
        assert!(f.clauses().contains(&vec![4, 12]));
        let p = simplify(&f);
        assert_eq!(p.clauses().len(), 50);
        assert_eq!(p.clause_variables().len(), 16);
        let reduced = assign_true(&p, &[3, 4]).unwrap();
        assert_eq!(reduced.clauses().len(), 24);
        assert_eq!(reduced.clause_variables().len(), 14);
        assert_eq!(reduced.free_variables().len(), 14);
    }

    #[test]
    fn single_vertex_formula() {
        let g = Graph::from_edges(1, &[], None).unwrap();
        assert_eq!(build_formula(&g).unwrap().clauses(), &[vec![0]]);
    }

    #[test]
    fn twins_rejected() {
        let g = Graph::from_edges(2, &[(0, 1)], None).unwrap();
        assert!(matches!(build_formula(&g), Err(Error::Twins(0, 1))));
    }

    #[test]
    fn subsumption_small() {
        let f = Cnf::new(3, vec![vec![1], vec![1, 2]]).unwrap();
        assert_eq!(simplify(&f).clauses(), &[vec![1]]);
    }

    #[test]
    fn assign_edge_cases() {
        let f = Cnf::new(4, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let g = assign_true(&f, &[3]).unwrap();
        assert_eq!(g.clauses(), f.clauses());
        assert!(g.assumptions().contains(&3));
        let all = assign_true(&f, &[0, 1, 2, 3]).unwrap();
        assert!(all.clauses().is_empty());
        assert!(assign_true(&f, &[9]).is_err());
    }

    #[test]
    fn b24_case_split_matches_hand_cases() {
        let p = simplify(&build_formula(&db(2, 4)).unwrap());
        let split = case_split(&p, &[[3, 11], [4, 12]]).unwrap();
        let chosen: Vec<Vec<usize>> = split.cases.iter().map(|c| c.chosen.clone()).collect();
        assert_eq!(chosen, vec![vec![3, 4], vec![3, 12], vec![11, 4], vec![11, 12]]);
        assert_eq!(choose_pivots(&p, 2), vec![[2, 3], [3, 11]]);
        let none = case_split(&p, &[]).unwrap();
        assert_eq!(none.cases.len(), 1);
        assert_eq!(none.cases[0].formula, p);
        assert!(case_split(&p, &[[0, 15]]).is_err());
    }

    #[test]
    fn case_split_union_is_parent_solution_set() {
        let p = simplify(&build_formula(&db(2, 4)).unwrap());
        let split = case_split(&p, &[[3, 11], [4, 12]]).unwrap();
        let parent: BTreeSet<u64> = solutions(&p).into_iter().collect();
        let mut union = BTreeSet::new();
        for case in &split.cases {
            union.extend(solutions(&case.formula));
        }
        assert_eq!(union, parent);
    }

    #[test]
    fn formula_semantics_match_verifier() {
        let graphs = [
            db(2, 3),
            db(3, 2),
            Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)], None).unwrap(),
            Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 5)], None).unwrap(),
        ];
        for g in &graphs {
            let f = build_formula(g).unwrap();
            let n = g.vertex_count();
            for m in 0..1u64 << n {
                let s = set_of(n, m);
                let ok = is_identifying(g, &CodeCandidate::new(s.clone())).unwrap().is_ok();
                assert_eq!(f.is_satisfied_by(&s), ok);
                assert_eq!(simplify(&f).is_satisfied_by(&s), ok);
            }
        }
    }

    #[test]
    fn dimacs_header_and_round_trip() {
        let p = simplify(&build_formula(&db(2, 3)).unwrap());
        let text = to_dimacs(&p);
        assert!(text.starts_with(&format!("p cnf 8 {}\n", p.clauses().len())));
        assert_eq!(parse_dimacs(&text).unwrap().clauses(), p.clauses());
        let empty = Cnf::new(3, vec![]).unwrap();
        assert_eq!(to_dimacs(&empty), "p cnf 3 0\n");
        assert!(parse_dimacs("p cnf 2 1\n-1 2 0\n").is_err());
        assert!(parse_dimacs("p cnf 2 2\n1 2 0\n").is_err());
    }

    #[test]
    fn dimacs_emits_assumptions_as_units() {
        let f = assign_true(&Cnf::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap(), &[0]).unwrap();
        assert_eq!(to_dimacs(&f), "p cnf 3 2\n1 0\n2 3 0\n");
    }

    #[test]
    fn smtlib_shape() {
        let p = simplify(&build_formula(&db(2, 3)).unwrap());
        let text = to_smtlib(&p, 4, &[]);
        assert!(text.contains("(declare-fun x7 () Bool)"));
        assert!(text.contains("(assert (= (+ n0 n1 n2 n3 n4 n5 n6 n7) 4))"));
        assert!(text.contains("(assert (= (= n3 1) x3))"));
        assert!(text.ends_with("(check-sat)\n(get-model)\n"));
    }

    #[test]
    fn blocking_excludes_exactly_one_assignment() {
        let b = blocking_clause(&CodeCandidate::from_vertices(3, &[0, 1]));
        for m in 0..8u64 {
            assert_eq!(b.is_violated_by(&set_of(3, m)), m == 0b011);
        }
        assert_eq!(b.to_smtlib(), "(assert (or (not x0) (not x1) x2))");
    }

    fn arb_cnf() -> impl Strategy<Value = Cnf> {
        (1usize..=10).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::btree_set(0..n, 1..=4), 0..12)
                .prop_map(move |cs| Cnf::new(n, cs.into_iter().map(|c| c.into_iter().collect()).collect()).unwrap())
        })
    }

    proptest! {
        #[test]
        fn simplify_idempotent_and_preserving(f in arb_cnf()) {
            let s = simplify(&f);
            prop_assert_eq!(simplify(&s), s.clone());
            prop_assert_eq!(solutions(&s), solutions(&f));
            // Monotone: all-true satisfies.
            prop_assert!(f.is_satisfied_by(&VertexSet::full(f.var_count())));
        }
    }
}
