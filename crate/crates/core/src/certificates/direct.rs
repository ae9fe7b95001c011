//! Bounded brute-force solution search, the semantic oracle the certificate
//! machinery is tested against. It enumerates assignments of freely reduced
//! words up to a length bound and never claims unsolvability.

use std::collections::HashMap;

use crate::equations::{RawEquation, StandardForm, StdAssignment, StdVar};
use crate::words::{Alphabet, Word};

/// One variable-disjoint factor of a standard-form body.
enum Block {
    Commutator(usize),
    Square(usize),
    Conjugate(usize, Word),
    Constant(Word),
}

/// Enumerates assignments over one alphabet with one length bound. Building
/// the searcher precomputes the word list; the commutator and square value
/// tables are filled on first use and reused across equations.
pub struct DirectSearcher {
    alphabet: Alphabet,
    words: Vec<Word>,
    commutators: Option<HashMap<Word, (Word, Word)>>,
    squares: Option<HashMap<Word, Word>>,
}

impl DirectSearcher {
    pub fn new(alphabet: &Alphabet, max_len: usize) -> DirectSearcher {
        DirectSearcher {
            alphabet: alphabet.clone(),
            words: alphabet.reduced_words_up_to(max_len),
            commutators: None,
            squares: None,
        }
    }

    /// Full product enumeration over all variables of a raw equation.
    /// Returns the first satisfying assignment in enumeration order.
    pub fn search_raw(&self, eq: &RawEquation) -> Option<HashMap<String, Word>> {
        assert_eq!(eq.alphabet(), &self.alphabet);
        let vars = eq.variables();
        let mut assignment: HashMap<String, Word> =
            vars.iter().map(|v| (v.clone(), Word::empty())).collect();
        self.search_raw_inner(eq, vars, 0, &mut assignment)
    }

    fn search_raw_inner(
        &self,
        eq: &RawEquation,
        vars: &[String],
        depth: usize,
        assignment: &mut HashMap<String, Word>,
    ) -> Option<HashMap<String, Word>> {
        if depth == vars.len() {
            return eq
                .check_solution(assignment)
                .expect("assignment covers all variables")
                .then(|| assignment.clone());
        }
        for word in &self.words {
            assignment.insert(vars[depth].clone(), word.clone());
            if let Some(found) = self.search_raw_inner(eq, vars, depth + 1, assignment) {
                return Some(found);
            }
        }
        None
    }

    fn commutator_table(&mut self) -> &HashMap<Word, (Word, Word)> {
        if self.commutators.is_none() {
            let mut table = HashMap::new();
            for u in &self.words {
                for v in &self.words {
                    let value = u.inverse().concat(&v.inverse()).concat(u).concat(v);
                    table.entry(value).or_insert_with(|| (u.clone(), v.clone()));
                }
            }
            self.commutators = Some(table);
        }
        self.commutators.as_ref().unwrap()
    }

    fn square_table(&mut self) -> &HashMap<Word, Word> {
        if self.squares.is_none() {
            let mut table = HashMap::new();
            for u in &self.words {
                table.entry(u.concat(u)).or_insert_with(|| u.clone());
            }
            self.squares = Some(table);
        }
        self.squares.as_ref().unwrap()
    }

    /// Search on a standard form. The body splits into variable-disjoint
    /// factors (commutators, squares, conjugated coefficients, the constant
    /// tail), so assignments are enumerated factor-wise: the product is
    /// rotated to put the factor with the largest value table last, every
    /// combination of the other factors is enumerated, and the last factor
    /// becomes a single table lookup. The answer set is identical to plain
    /// enumeration of all variables.
    pub fn search_std(&mut self, sf: &StandardForm) -> Option<StdAssignment> {
        assert_eq!(sf.alphabet(), &self.alphabet);

        let mut blocks: Vec<Block> = Vec::new();
        for i in 0..sf.genus() {
            blocks.push(if sf.orientable() { Block::Commutator(i) } else { Block::Square(i) });
        }
        for (j, w) in sf.coefficients().iter().enumerate() {
            blocks.push(Block::Conjugate(j, w.representative().clone()));
        }
        if let Some(d) = sf.last_coefficient() {
            blocks.push(Block::Constant(d.representative().clone()));
        }
        if blocks.is_empty() {
            return Some(StdAssignment::default());
        }

        let word_count = self.words.len();
        let table_size = |b: &Block| match b {
            Block::Commutator(_) => word_count * word_count,
            Block::Square(_) | Block::Conjugate(..) => word_count,
            Block::Constant(_) => 1,
        };
        let pivot = (0..blocks.len())
            .max_by_key(|&i| (table_size(&blocks[i]), i))
            .expect("nonempty");
        // B₁…Bᵣ = 1 iff B₂…BᵣB₁ = 1 under the same assignment, so the
        // product may be rotated freely.
        let shift = (pivot + 1) % blocks.len();
        blocks.rotate_left(shift);

        let mut assignment = StdAssignment::default();
        let found = self.search_blocks(&blocks, Word::empty(), &mut assignment)?;
        debug_assert!(sf.check_solution(&found).unwrap_or(false));
        Some(found)
    }

    fn search_blocks(
        &mut self,
        blocks: &[Block],
        prefix: Word,
        assignment: &mut StdAssignment,
    ) -> Option<StdAssignment> {
        let (head, tail) = blocks.split_first().expect("called with blocks left");
        if tail.is_empty() {
            // Final factor: it must evaluate to prefix⁻¹.
            let needed = prefix.inverse();
            return match head {
                Block::Constant(d) => (*d == needed).then(|| assignment.clone()),
                Block::Conjugate(j, w) => {
                    let z = self.words.iter().find(|z| z.inverse().concat(w).concat(z) == needed)?;
                    assignment.set(StdVar::Z(*j), z.clone());
                    Some(assignment.clone())
                }
                Block::Square(i) => {
                    let u = self.square_table().get(&needed)?.clone();
                    assignment.set(StdVar::X(*i), u);
                    Some(assignment.clone())
                }
                Block::Commutator(i) => {
                    let (u, v) = self.commutator_table().get(&needed)?.clone();
                    assignment.set(StdVar::X(*i), u);
                    assignment.set(StdVar::Y(*i), v);
                    Some(assignment.clone())
                }
            };
        }
        match head {
            Block::Constant(d) => self.search_blocks(tail, prefix.concat(d), assignment),
            Block::Conjugate(j, w) => {
                for z in self.words.clone() {
                    let value = z.inverse().concat(w).concat(&z);
                    assignment.set(StdVar::Z(*j), z);
                    if let Some(found) = self.search_blocks(tail, prefix.concat(&value), assignment)
                    {
                        return Some(found);
                    }
                }
                None
            }
            Block::Square(i) => {
                for u in self.words.clone() {
                    let value = u.concat(&u);
                    assignment.set(StdVar::X(*i), u);
                    if let Some(found) = self.search_blocks(tail, prefix.concat(&value), assignment)
                    {
                        return Some(found);
                    }
                }
                None
            }
            Block::Commutator(i) => {
                for u in self.words.clone() {
                    for v in self.words.clone() {
                        let value = u.inverse().concat(&v.inverse()).concat(&u).concat(&v);
                        assignment.set(StdVar::X(*i), u.clone());
                        assignment.set(StdVar::Y(*i), v);
                        if let Some(found) =
                            self.search_blocks(tail, prefix.concat(&value), assignment)
                        {
                            return Some(found);
                        }
                    }
                }
                None
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::parse_equation;
    use crate::words::CyclicWord;

    fn ab() -> Alphabet {
        Alphabet::new("ab").unwrap()
    }

    fn cyc(s: &str) -> CyclicWord {
        CyclicWord::canonical(&Word::parse(s).unwrap())
    }

    #[test]
    fn finds_trivial_solution_at_length_zero() {
        let eq = parse_equation("x a x^-1 a^-1 = 1", &ab()).unwrap();
        let searcher = DirectSearcher::new(&ab(), 0);
        let solution = searcher.search_raw(&eq).unwrap();
        assert!(solution["x"].is_empty());
    }

    #[test]
    fn finds_square_root() {
        // x₁² a⁻² = 1 → x₁ = a.
        let sf = StandardForm::new(ab(), false, 1, vec![], Some(cyc("AA"))).unwrap();
        let mut searcher = DirectSearcher::new(&ab(), 1);
        let solution = searcher.search_std(&sf).unwrap();
        assert_eq!(solution.get(StdVar::X(0)).unwrap().to_string(), "a");
    }

    #[test]
    fn reports_unknown_when_no_short_solution_exists() {
        // x₁² = ab has no solution at all.
        let sf = StandardForm::new(ab(), false, 1, vec![], Some(cyc("BA"))).unwrap();
        let mut searcher = DirectSearcher::new(&ab(), 3);
        assert!(searcher.search_std(&sf).is_none());
    }

    #[test]
    fn raw_search_matches_known_solvability() {
        let cases = [
            ("x y x^-1 y^-1 a b a^-1 b^-1 = 1", true),
            ("z^-1 a b z b^-1 a^-1 = 1", true),
            ("z^-1 a z b = 1", false),
        ];
        for (text, solvable) in cases {
            let eq = parse_equation(text, &ab()).unwrap();
            let searcher = DirectSearcher::new(&ab(), 2);
            assert_eq!(searcher.search_raw(&eq).is_some(), solvable, "{text}");
        }
    }

    #[test]
    fn block_search_agrees_with_raw_enumeration() {
        // The same equation in raw and standard clothing must agree for
        // every small bound. z⁻¹ a b z a⁻¹ b⁻¹ already is the standard form
        // with w₁ = "ab" and d = "AB", both in canonical rotation.
        for max_len in 0..=2 {
            let raw = parse_equation("z^-1 a b z a^-1 b^-1 = 1", &ab()).unwrap();
            let sf = StandardForm::new(ab(), true, 0, vec![cyc("ab")], Some(cyc("AB"))).unwrap();
            let searcher = DirectSearcher::new(&ab(), max_len);
            let mut std_searcher = DirectSearcher::new(&ab(), max_len);
            assert_eq!(
                searcher.search_raw(&raw).is_some(),
                std_searcher.search_std(&sf).is_some(),
                "max_len {max_len}"
            );
        }
    }

    #[test]
    fn std_search_solution_checks_out() {
        let sf = StandardForm::new(ab(), true, 1, vec![cyc("ab")], Some(cyc("BA"))).unwrap();
        let mut searcher = DirectSearcher::new(&ab(), 2);
        if let Some(solution) = searcher.search_std(&sf) {
            assert!(sf.check_solution(&solution).unwrap());
        }
    }
}
