//! Normalization of raw quadratic equations to standard form.
//!
//! The equation body is rewritten by a sequence of elementary changes of
//! variables: same-sign pairs are collected into squares, linked
//! opposite-sign pairs into commutator blocks, the remaining pairs become
//! conjugated coefficients, and with both squares and commutators present
//! each commutator is converted into two further squares. Blocks are then
//! shuffled into the standard order and the coefficients canonicalized.
//!
//! Every step is a substitution `old ↦ expr` where `expr` mentions exactly
//! one fresh variable. The recorded list of substitutions transports
//! assignments in both directions: backward (standard-form solution → raw
//! solution, by replaying records last to first) and forward (raw solution →
//! standard-form solution, by solving each record for its fresh variable).

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use super::{RawEquation, StandardForm, StdVar, Token};
use crate::words::{free_reduce, CyclicWord, Letter, Sign, Word};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Atom {
    Var { id: usize, sign: Sign },
    Const(Letter),
}

impl Atom {
    fn inverse(self) -> Atom {
        match self {
            Atom::Var { id, sign } => Atom::Var { id, sign: sign.flip() },
            Atom::Const(l) => Atom::Const(l.inverse()),
        }
    }

    fn cancels(self, other: Atom) -> bool {
        self == other.inverse()
    }

    fn var_id(self) -> Option<usize> {
        match self {
            Atom::Var { id, .. } => Some(id),
            Atom::Const(_) => None,
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Var { id, sign: Sign::Plus } => write!(f, "v{id}"),
            Atom::Var { id, sign: Sign::Minus } => write!(f, "v{id}^-1"),
            Atom::Const(l) => write!(f, "{l:?}"),
        }
    }
}

fn invert_atoms(atoms: &[Atom]) -> Vec<Atom> {
    atoms.iter().rev().map(|a| a.inverse()).collect()
}

fn reduce_atoms(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        if out.last().is_some_and(|&last| last.cancels(a)) {
            out.pop();
        } else {
            out.push(a);
        }
    }
    out
}

/// One recorded change of variables: `old` equals `expr` evaluated over the
/// variables alive after the move. `fresh` is the single new variable
/// introduced by the move, if any.
#[derive(Clone, Debug)]
struct Record {
    old: usize,
    expr: Vec<Atom>,
    fresh: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BlockKind {
    Square,
    Commutator,
    Coefficient,
}

#[derive(Clone, Debug)]
struct Block {
    kind: BlockKind,
    /// One var for squares and coefficients, the pair for commutators.
    vars: Vec<usize>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("assignment is missing standard-form variable {0}")]
    MissingStandard(String),
    #[error("assignment is missing raw variable {0}")]
    MissingRaw(String),
    #[error("internal transport inconsistency at variable id {0}")]
    Incomplete(usize),
}

/// Assignment of the standard-form variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StdAssignment {
    map: BTreeMap<StdVar, Word>,
}

impl StdAssignment {
    pub fn set(&mut self, var: StdVar, value: Word) {
        self.map.insert(var, value);
    }

    pub fn get(&self, var: StdVar) -> Option<&Word> {
        self.map.get(&var)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StdVar, &Word)> {
        self.map.iter()
    }

    pub fn from_named(names: &HashMap<String, Word>) -> Option<StdAssignment> {
        let mut out = StdAssignment::default();
        for (name, value) in names {
            out.set(StdVar::parse(name)?, value.clone());
        }
        Some(out)
    }
}

/// Transports assignments between the raw equation and its standard form.
#[derive(Clone, Debug)]
pub struct BackMap {
    records: Vec<Record>,
    raw_ids: Vec<(String, usize)>,
    final_ids: Vec<(StdVar, usize)>,
}

impl BackMap {
    /// Maps a solution of the standard form to a solution of the raw
    /// equation by replaying the recorded substitutions last to first.
    pub fn transport(&self, assignment: &StdAssignment) -> Result<HashMap<String, Word>, TransportError> {
        let mut values: HashMap<usize, Word> = HashMap::new();
        for (var, id) in &self.final_ids {
            let value = assignment
                .get(*var)
                .ok_or_else(|| TransportError::MissingStandard(var.to_string()))?;
            values.insert(*id, value.clone());
        }
        for record in self.records.iter().rev() {
            let value = eval_atoms(&record.expr, &values)?;
            values.insert(record.old, value);
        }
        let mut out = HashMap::new();
        for (name, id) in &self.raw_ids {
            let value = values.get(id).ok_or(TransportError::Incomplete(*id))?;
            out.insert(name.clone(), value.clone());
        }
        Ok(out)
    }

    /// Maps a solution of the raw equation to a solution of the standard
    /// form by solving each record for its fresh variable in order.
    pub fn transport_forward(
        &self,
        assignment: &HashMap<String, Word>,
    ) -> Result<StdAssignment, TransportError> {
        let mut values: HashMap<usize, Word> = HashMap::new();
        for (name, id) in &self.raw_ids {
            let value = assignment
                .get(name)
                .ok_or_else(|| TransportError::MissingRaw(name.clone()))?;
            values.insert(*id, value.clone());
        }
        for record in &self.records {
            let Some(fresh) = record.fresh else { continue };
            let at = record
                .expr
                .iter()
                .position(|a| a.var_id() == Some(fresh))
                .ok_or(TransportError::Incomplete(fresh))?;
            let prefix = eval_atoms(&record.expr[..at], &values)?;
            let suffix = eval_atoms(&record.expr[at + 1..], &values)?;
            let old = values.get(&record.old).ok_or(TransportError::Incomplete(record.old))?;
            // old = prefix · fresh^s · suffix
            let core = prefix.inverse().concat(old).concat(&suffix.inverse());
            let value = match record.expr[at] {
                Atom::Var { sign: Sign::Plus, .. } => core,
                Atom::Var { sign: Sign::Minus, .. } => core.inverse(),
                Atom::Const(_) => unreachable!("fresh position is a variable"),
            };
            values.insert(fresh, value);
        }
        let mut out = StdAssignment::default();
        for (var, id) in &self.final_ids {
            let value = values.get(id).ok_or(TransportError::Incomplete(*id))?;
            out.set(*var, value.clone());
        }
        Ok(out)
    }
}

fn eval_atoms(atoms: &[Atom], values: &HashMap<usize, Word>) -> Result<Word, TransportError> {
    let mut letters: Vec<Letter> = Vec::new();
    for atom in atoms {
        match *atom {
            Atom::Const(l) => letters.push(l),
            Atom::Var { id, sign } => {
                let value = values.get(&id).ok_or(TransportError::Incomplete(id))?;
                let piece = match sign {
                    Sign::Plus => value.clone(),
                    Sign::Minus => value.inverse(),
                };
                letters.extend_from_slice(piece.letters());
            }
        }
    }
    Ok(free_reduce(letters))
}

struct Normalizer {
    body: Vec<Atom>,
    records: Vec<Record>,
    blocks: Vec<Block>,
    next_var: usize,
    moves: usize,
}

const MOVE_LIMIT: usize = 1_000_000;

impl Normalizer {
    fn fresh(&mut self) -> usize {
        let id = self.next_var;
        self.next_var += 1;
        id
    }

    fn occurrences(&self, id: usize) -> Vec<usize> {
        self.body
            .iter()
            .enumerate()
            .filter(|(_, a)| a.var_id() == Some(id))
            .map(|(i, _)| i)
            .collect()
    }

    fn live_vars(&self) -> Vec<usize> {
        let mut seen = Vec::new();
        for a in &self.body {
            if let Some(id) = a.var_id() {
                if !seen.contains(&id) {
                    seen.push(id);
                }
            }
        }
        seen
    }

    fn retired(&self, id: usize) -> bool {
        self.blocks.iter().any(|b| b.vars.contains(&id))
    }

    fn bump(&mut self) {
        self.moves += 1;
        assert!(self.moves < MOVE_LIMIT, "normalization failed to terminate");
    }

    /// Reduces the body and records `v ↦ ε` for every variable whose
    /// occurrences all cancelled away (such a variable is unconstrained).
    fn reduce_and_record(&mut self, body: Vec<Atom>) {
        let mut before = Vec::new();
        for a in &body {
            if let Some(id) = a.var_id() {
                if !before.contains(&id) {
                    before.push(id);
                }
            }
        }
        self.body = reduce_atoms(body);
        let after = self.live_vars();
        for id in before {
            if !after.contains(&id) {
                self.records.push(Record { old: id, expr: vec![], fresh: None });
            }
        }
    }

    /// Replaces both occurrences of `old` by `expr` (inverted at the negative
    /// occurrence), reduces, and records the move.
    fn substitute(&mut self, old: usize, expr: Vec<Atom>, fresh: Option<usize>) {
        self.bump();
        let mut body = Vec::with_capacity(self.body.len() + 2 * expr.len());
        for &atom in &self.body.clone() {
            match atom {
                Atom::Var { id, sign } if id == old => match sign {
                    Sign::Plus => body.extend_from_slice(&expr),
                    Sign::Minus => body.extend(invert_atoms(&expr)),
                },
                other => body.push(other),
            }
        }
        self.records.push(Record { old, expr, fresh });
        self.reduce_and_record(body);
    }

    /// Renames `old` to a fresh variable, inverting it when `invert` is set.
    fn rename(&mut self, old: usize, invert: bool) -> usize {
        let fresh = self.fresh();
        let sign = if invert { Sign::Minus } else { Sign::Plus };
        self.substitute(old, vec![Atom::Var { id: fresh, sign }], Some(fresh));
        fresh
    }

    fn rotate(&mut self, k: usize) {
        if !self.body.is_empty() {
            let k = k % self.body.len();
            self.body.rotate_left(k);
        }
    }

    /// Rotates away mutually inverse first/last atoms so the body is also
    /// cyclically reduced.
    fn cyclic_trim(&mut self) {
        loop {
            match (self.body.first(), self.body.last()) {
                (Some(&f), Some(&l)) if self.body.len() >= 2 && f.cancels(l) => {
                    self.bump();
                    self.rotate(1);
                    let body = std::mem::take(&mut self.body);
                    self.reduce_and_record(body);
                }
                _ => return,
            }
        }
    }

    /// Collects every same-sign pair into an adjacent square block.
    fn collect_squares(&mut self) {
        loop {
            self.cyclic_trim();
            let candidate = self.live_vars().into_iter().find(|&id| {
                if self.retired(id) {
                    return false;
                }
                let occ = self.occurrences(id);
                occ.len() == 2 && self.body[occ[0]] == self.body[occ[1]]
            });
            let Some(mut id) = candidate else { return };
            let occ = self.occurrences(id);
            if matches!(self.body[occ[0]], Atom::Var { sign: Sign::Minus, .. }) {
                id = self.rename(id, true);
            }
            let occ = self.occurrences(id);
            let (p1, p2) = (occ[0], occ[1]);
            let adjacent = p2 == p1 + 1 || (p1 == 0 && p2 == self.body.len() - 1);
            if adjacent {
                if p2 != p1 + 1 {
                    // Wrapping pair: rotate it contiguous.
                    self.rotate(p2);
                }
                self.blocks.push(Block { kind: BlockKind::Square, vars: vec![id] });
                continue;
            }
            // x A x B  ↦  x' x' A⁻¹ B  via  x = x'·A⁻¹.
            let arc: Vec<Atom> = self.body[p1 + 1..p2].to_vec();
            let fresh = self.fresh();
            let mut expr = vec![Atom::Var { id: fresh, sign: Sign::Plus }];
            expr.extend(invert_atoms(&arc));
            self.substitute(id, expr, Some(fresh));
            self.blocks.push(Block { kind: BlockKind::Square, vars: vec![fresh] });
        }
    }

    /// Collects every linked pair of opposite-sign variables into an adjacent
    /// commutator block `x y x⁻¹ y⁻¹`.
    fn collect_commutators(&mut self) {
        loop {
            self.cyclic_trim();
            let live = self.live_vars();
            let linked = live.iter().find_map(|&x| {
                if self.retired(x) {
                    return None;
                }
                let xo = self.occurrences(x);
                let partner = live.iter().copied().find(|&y| {
                    if y == x || self.retired(y) {
                        return false;
                    }
                    let yo = self.occurrences(y);
                    let inside =
                        yo.iter().filter(|&&p| xo[0] < p && p < xo[1]).count();
                    inside == 1
                })?;
                Some((x, partner))
            });
            let Some((mut x, mut y)) = linked else { return };

            // Orient x positive-first and the inner y occurrence positive.
            let xo = self.occurrences(x);
            if matches!(self.body[xo[0]], Atom::Var { sign: Sign::Minus, .. }) {
                x = self.rename(x, true);
            }
            let xo = self.occurrences(x);
            let yo = self.occurrences(y);
            let inner = *yo.iter().find(|&&p| xo[0] < p && p < xo[1]).expect("linked pair");
            if matches!(self.body[inner], Atom::Var { sign: Sign::Minus, .. }) {
                y = self.rename(y, true);
            }

            // Body reads … x A y B x⁻¹ C y⁻¹ D …; three arc absorptions leave
            // the block x₂ y₁ x₂⁻¹ y₁⁻¹ with the arcs reassembled outside.
            for _ in 0..3 {
                let xo = self.occurrences(x);
                let yo = self.occurrences(y);
                debug_assert!(xo[0] < yo[0] && yo[0] < xo[1] && xo[1] < yo[1]);
                let (a, b, c) = (xo[0], yo[0], xo[1]);
                if b > a + 1 {
                    // x = x₁ · A⁻¹ swallows A = body(a+1..b).
                    let arc: Vec<Atom> = self.body[a + 1..b].to_vec();
                    let fresh = self.fresh();
                    let mut expr = vec![Atom::Var { id: fresh, sign: Sign::Plus }];
                    expr.extend(invert_atoms(&arc));
                    self.substitute(x, expr, Some(fresh));
                    x = fresh;
                } else if c > b + 1 {
                    // y = y₁ · B⁻¹ swallows B = body(b+1..c).
                    let arc: Vec<Atom> = self.body[b + 1..c].to_vec();
                    let fresh = self.fresh();
                    let mut expr = vec![Atom::Var { id: fresh, sign: Sign::Plus }];
                    expr.extend(invert_atoms(&arc));
                    self.substitute(y, expr, Some(fresh));
                    y = fresh;
                } else {
                    let yo2 = self.occurrences(y);
                    let d = yo2[1];
                    if d > c + 1 {
                        // x₁ = C · x₂ moves C = body(c+1..d) before the block.
                        let arc: Vec<Atom> = self.body[c + 1..d].to_vec();
                        let fresh = self.fresh();
                        let mut expr = arc.clone();
                        expr.push(Atom::Var { id: fresh, sign: Sign::Plus });
                        self.substitute(x, expr, Some(fresh));
                        x = fresh;
                    }
                }
            }
            let xo = self.occurrences(x);
            let yo = self.occurrences(y);
            debug_assert_eq!(
                (xo[1] - xo[0], yo[1] - yo[0], yo[0] - xo[0]),
                (2, 2, 1),
                "commutator block is contiguous"
            );
            self.blocks.push(Block { kind: BlockKind::Commutator, vars: vec![x, y] });
        }
    }

    /// Range of the contiguous run occupied by a block.
    fn locate(&self, block: usize) -> std::ops::Range<usize> {
        let vars = &self.blocks[block].vars;
        let mut positions: Vec<usize> = self
            .body
            .iter()
            .enumerate()
            .filter(|(_, a)| a.var_id().is_some_and(|id| vars.contains(&id)))
            .map(|(i, _)| i)
            .collect();
        positions.sort_unstable();
        let expected = match self.blocks[block].kind {
            BlockKind::Commutator => 4,
            BlockKind::Square => 2,
            BlockKind::Coefficient => 0, // computed below
        };
        if self.blocks[block].kind == BlockKind::Coefficient {
            // z⁻¹ w z with constants between the two z occurrences.
            debug_assert_eq!(positions.len(), 2);
            debug_assert!(self.body[positions[0] + 1..positions[1]]
                .iter()
                .all(|a| matches!(a, Atom::Const(_))));
            return positions[0]..positions[1] + 1;
        }
        debug_assert_eq!(positions.len(), expected);
        debug_assert_eq!(positions[expected - 1] - positions[0], expected - 1, "block contiguous");
        positions[0]..positions[0] + expected
    }

    fn block_at(&self, pos: usize) -> Option<usize> {
        let id = self.body[pos].var_id()?;
        self.blocks.iter().position(|b| b.vars.contains(&id))
    }

    /// Shifts a block one unit to the left (across the constant, lone
    /// variable atom, or whole block immediately before it), renaming its
    /// variables so the equation is preserved.
    fn shift_block_left(&mut self, block: usize) {
        let range = self.locate(block);
        assert!(range.start > 0, "cannot shift past the start");
        let unit: Vec<Atom> = match self.block_at(range.start - 1) {
            Some(other) if other != block => {
                let r = self.locate(other);
                self.body[r].to_vec()
            }
            _ => vec![self.body[range.start - 1]],
        };
        let kind = self.blocks[block].kind;
        let vars = self.blocks[block].vars.clone();
        for (slot, var) in vars.iter().enumerate() {
            let fresh = self.fresh();
            let expr = match kind {
                // E · β ↦ β' · E via v = E⁻¹ v' E.
                BlockKind::Square | BlockKind::Commutator => {
                    let mut e = invert_atoms(&unit);
                    e.push(Atom::Var { id: fresh, sign: Sign::Plus });
                    e.extend_from_slice(&unit);
                    e
                }
                // E · z⁻¹wz ↦ z'⁻¹wz' · E via z = z' E.
                BlockKind::Coefficient => {
                    let mut e = vec![Atom::Var { id: fresh, sign: Sign::Plus }];
                    e.extend_from_slice(&unit);
                    e
                }
            };
            self.substitute(*var, expr, Some(fresh));
            self.blocks[block].vars[slot] = fresh;
        }
    }

    /// Turns every remaining variable pair into a conjugated-coefficient
    /// block `z⁻¹ w z` (or cancels it when it wraps nothing).
    fn extract_coefficients(&mut self) {
        loop {
            self.cyclic_trim();
            let unprocessed: Vec<usize> =
                self.live_vars().into_iter().filter(|&id| !self.retired(id)).collect();
            if unprocessed.is_empty() {
                return;
            }
            // Innermost pair: no unprocessed occurrence strictly inside its
            // span. Pairs are unlinked here, so spans nest and one exists.
            let innermost = unprocessed
                .iter()
                .copied()
                .filter(|&id| {
                    let occ = self.occurrences(id);
                    !self.body[occ[0] + 1..occ[1]]
                        .iter()
                        .any(|a| a.var_id().is_some_and(|v| unprocessed.contains(&v) && v != id))
                })
                .min_by_key(|&id| {
                    let occ = self.occurrences(id);
                    occ[1] - occ[0]
                })
                .expect("unlinked pairs nest");

            let mut z = innermost;
            // Clear retired blocks out of the span by shifting them left
            // past the opening occurrence. The pair may cancel outright once
            // its span empties; the vanish is recorded by the reduction.
            loop {
                self.bump();
                if !self.live_vars().contains(&z) {
                    break;
                }
                let occ = self.occurrences(z);
                let inside = (occ[0] + 1..occ[1]).find_map(|p| self.block_at(p));
                match inside {
                    Some(b) => self.shift_block_left(b),
                    None => break,
                }
            }
            if !self.live_vars().contains(&z) {
                continue;
            }
            let occ = self.occurrences(z);
            if matches!(self.body[occ[0]], Atom::Var { sign: Sign::Plus, .. }) {
                z = self.rename(z, true);
            }
            if !self.live_vars().contains(&z) {
                continue;
            }
            let occ = self.occurrences(z);
            debug_assert!(occ[1] > occ[0] + 1, "adjacent inverse pairs cannot survive reduction");
            self.blocks.push(Block { kind: BlockKind::Coefficient, vars: vec![z] });
        }
    }

    /// While squares and commutators coexist, converts one commutator at a
    /// time into two extra squares. With `u u` placed immediately before
    /// `p q p⁻¹ q⁻¹`, the fixed substitution chain
    ///
    ///   u ↦ u₁ q⁻¹ p⁻¹,  p ↦ P⁻¹,  P ↦ P₂ u₁⁻¹,  q ↦ Q⁻¹,
    ///   Q ↦ Q₂ u₁ P₂⁻¹ P₂⁻¹,  u₁ ↦ U Q₂⁻¹ Q₂⁻¹
    ///
    /// rewrites the six atoms to U U Q₂⁻¹ Q₂⁻¹ P₂⁻¹ P₂⁻¹.
    fn convert_mixed_genus(&mut self) {
        loop {
            let square = self.blocks.iter().position(|b| b.kind == BlockKind::Square);
            let comm = self.blocks.iter().position(|b| b.kind == BlockKind::Commutator);
            let (Some(square), Some(comm)) = (square, comm) else { return };

            // Make the square immediately precede the commutator.
            loop {
                self.bump();
                let sr = self.locate(square);
                let cr = self.locate(comm);
                if sr.end == cr.start {
                    break;
                }
                if sr.start < cr.start {
                    self.shift_block_left(comm);
                } else {
                    self.shift_block_left(square);
                }
            }

            // Orient all three variables positive-first.
            let mut u = self.blocks[square].vars[0];
            let uo = self.occurrences(u);
            if matches!(self.body[uo[0]], Atom::Var { sign: Sign::Minus, .. }) {
                u = self.rename(u, true);
                self.blocks[square].vars[0] = u;
            }
            for slot in 0..2 {
                let v = self.blocks[comm].vars[slot];
                let vo = self.occurrences(v);
                if matches!(self.body[vo[0]], Atom::Var { sign: Sign::Minus, .. }) {
                    let fresh = self.rename(v, true);
                    self.blocks[comm].vars[slot] = fresh;
                }
            }
            // The block may read p q p⁻¹ q⁻¹ with (p, q) stored in either
            // order; normalize the stored order to body order.
            let cr = self.locate(comm);
            let first_id = self.body[cr.start].var_id().expect("commutator starts with a var");
            if self.blocks[comm].vars[0] != first_id {
                self.blocks[comm].vars.swap(0, 1);
            }
            let p = self.blocks[comm].vars[0];
            let q = self.blocks[comm].vars[1];
            self.blocks.retain(|b| {
                !(b.kind == BlockKind::Square && b.vars == vec![u])
                    && !(b.kind == BlockKind::Commutator
                        && (b.vars == vec![p, q] || b.vars == vec![q, p]))
            });

            let plus = |id: usize| Atom::Var { id, sign: Sign::Plus };
            let minus = |id: usize| Atom::Var { id, sign: Sign::Minus };

            let u1 = self.fresh();
            self.substitute(u, vec![plus(u1), minus(q), minus(p)], Some(u1));
            let p_flip = self.fresh();
            self.substitute(p, vec![minus(p_flip)], Some(p_flip));
            let p2 = self.fresh();
            self.substitute(p_flip, vec![plus(p2), minus(u1)], Some(p2));
            let q_flip = self.fresh();
            self.substitute(q, vec![minus(q_flip)], Some(q_flip));
            let q2 = self.fresh();
            self.substitute(q_flip, vec![plus(q2), plus(u1), minus(p2), minus(p2)], Some(q2));
            let u_final = self.fresh();
            self.substitute(u1, vec![plus(u_final), minus(q2), minus(q2)], Some(u_final));

            for id in [u_final, q2, p2] {
                let occ = self.occurrences(id);
                debug_assert_eq!(occ.len(), 2);
                debug_assert_eq!(occ[1], occ[0] + 1, "conversion leaves adjacent squares");
                self.blocks.push(Block { kind: BlockKind::Square, vars: vec![id] });
            }
        }
    }

    /// Bubbles blocks into the order genus… coefficients… constants.
    fn assemble(&mut self) {
        if self.blocks.is_empty() {
            return;
        }
        let category = |b: &Block| match b.kind {
            BlockKind::Square | BlockKind::Commutator => 0usize,
            BlockKind::Coefficient => 1,
        };
        // Anchor the rotation at the first block so nothing wraps.
        let first = (0..self.blocks.len())
            .map(|b| (self.locate(b).start, b))
            .min()
            .expect("has blocks")
            .1;
        let start = self.locate(first).start;
        self.rotate(start);

        loop {
            self.bump();
            // Scan units left to right tracking the category high-water mark;
            // shift the first unit that sits after something bigger.
            let mut pos = 0;
            let mut mark = 0usize;
            let mut fixed = true;
            while pos < self.body.len() {
                match self.block_at(pos) {
                    Some(b) => {
                        let cat = category(&self.blocks[b]);
                        if cat < mark {
                            self.shift_block_left(b);
                            fixed = false;
                            break;
                        }
                        mark = mark.max(cat);
                        pos = self.locate(b).end;
                    }
                    None => {
                        // Constants sort last.
                        mark = mark.max(2);
                        pos += 1;
                    }
                }
            }
            if fixed {
                return;
            }
        }
    }

    /// Cyclically reduces each coefficient and rotates it to the canonical
    /// representative, absorbing the adjustment into the conjugator.
    fn canonicalize_coefficients(&mut self) {
        for b in 0..self.blocks.len() {
            if self.blocks[b].kind != BlockKind::Coefficient {
                continue;
            }
            loop {
                self.bump();
                let z = self.blocks[b].vars[0];
                if !self.live_vars().contains(&z) {
                    break; // coefficient degenerated to ε and cancelled
                }
                let occ = self.occurrences(z);
                let w: Vec<Atom> = self.body[occ[0] + 1..occ[1]].to_vec();
                if w.is_empty() {
                    let body = std::mem::take(&mut self.body);
                    self.reduce_and_record(body);
                    break;
                }
                let shift: Vec<Atom> = if w.len() >= 2 && w[0].cancels(*w.last().unwrap()) {
                    vec![w[0]]
                } else {
                    let word = atoms_to_word(&w);
                    let canon = CyclicWord::canonical(&word);
                    let k = crate::words::cyclic_match(&word, &canon)
                        .expect("cyclically reduced word matches its canonical form");
                    if k == 0 {
                        break;
                    }
                    w[..k].to_vec()
                };
                // z⁻¹ s w₀ s⁻¹ z  (or a rotation) ↦ z'⁻¹ · adjusted · z'
                // via z = s·z'.
                let fresh = self.fresh();
                let mut expr = shift;
                expr.push(Atom::Var { id: fresh, sign: Sign::Plus });
                self.substitute(z, expr, Some(fresh));
                self.blocks[b].vars[0] = fresh;
            }
        }
        self.blocks.retain(|b| {
            b.kind != BlockKind::Coefficient || self.body.iter().any(|a| a.var_id() == Some(b.vars[0]))
        });
    }

    /// Trailing constant run after the last block (the candidate for the
    /// last coefficient).
    fn trailing_constants(&self) -> usize {
        let last_var = self
            .body
            .iter()
            .rposition(|a| matches!(a, Atom::Var { .. }))
            .map_or(0, |p| p + 1);
        self.body.len() - last_var
    }

    /// Ensures the body ends with a nonempty, cyclically reduced, canonical
    /// last coefficient — or has none at all when the body is coefficient
    /// free.
    fn fix_last_coefficient(&mut self) {
        if self.trailing_constants() == 0 {
            let last_coef = self
                .blocks
                .iter()
                .rposition(|b| b.kind == BlockKind::Coefficient);
            let Some(last_coef) = last_coef else { return };
            // … z⁻¹ w z = 1  ⟺  conjugated-by-z equation ending in bare w.
            let z = self.blocks[last_coef].vars[0];
            let genus_vars: Vec<usize> = self
                .blocks
                .iter()
                .filter(|b| b.kind != BlockKind::Coefficient)
                .flat_map(|b| b.vars.clone())
                .collect();
            let coef_vars: Vec<usize> = self
                .blocks
                .iter()
                .enumerate()
                .filter(|(i, b)| *i != last_coef && b.kind == BlockKind::Coefficient)
                .map(|(_, b)| b.vars[0])
                .collect();
            for v in genus_vars {
                let fresh = self.fresh();
                let expr = vec![
                    Atom::Var { id: z, sign: Sign::Minus },
                    Atom::Var { id: fresh, sign: Sign::Plus },
                    Atom::Var { id: z, sign: Sign::Plus },
                ];
                self.substitute(v, expr, Some(fresh));
                for b in &mut self.blocks {
                    for slot in &mut b.vars {
                        if *slot == v {
                            *slot = fresh;
                        }
                    }
                }
            }
            for zj in coef_vars {
                let fresh = self.fresh();
                let expr = vec![
                    Atom::Var { id: fresh, sign: Sign::Plus },
                    Atom::Var { id: z, sign: Sign::Plus },
                ];
                self.substitute(zj, expr, Some(fresh));
                for b in &mut self.blocks {
                    for slot in &mut b.vars {
                        if *slot == zj {
                            *slot = fresh;
                        }
                    }
                }
            }
            // Body is now z⁻¹ (…) z: the trim cancels the pair and records
            // z ↦ ε (any value of z works).
            self.blocks.remove(last_coef);
            self.cyclic_trim();
            debug_assert!(!self.live_vars().contains(&z));
            return;
        }

        // Nonempty trailing run: conjugate the whole equation by constant
        // prefixes until the run is cyclically reduced and canonical.
        loop {
            self.bump();
            let tail = self.trailing_constants();
            if tail == 0 {
                // Fully cancelled into the blocks' seams; rerun.
                return self.fix_last_coefficient();
            }
            let run: Vec<Atom> = self.body[self.body.len() - tail..].to_vec();
            let word = atoms_to_word(&run);
            let prefix: Vec<Atom> = if word.len() >= 2
                && run[0].cancels(*run.last().unwrap())
            {
                vec![run[0]]
            } else {
                let canon = CyclicWord::canonical(&word);
                let k = crate::words::cyclic_match(&word, &canon)
                    .expect("cyclically reduced run matches its canonical form");
                if k == 0 {
                    return;
                }
                run[..k].to_vec()
            };
            self.conjugate_all(&prefix);
        }
    }

    /// Conjugates the whole equation by a constant word: `W = 1 ⟺
    /// c⁻¹Wc = 1`, with every block variable renamed to absorb the wrappers.
    fn conjugate_all(&mut self, c: &[Atom]) {
        debug_assert!(c.iter().all(|a| matches!(a, Atom::Const(_))));
        for b in 0..self.blocks.len() {
            let kind = self.blocks[b].kind;
            for slot in 0..self.blocks[b].vars.len() {
                let v = self.blocks[b].vars[slot];
                let fresh = self.fresh();
                let expr = match kind {
                    BlockKind::Square | BlockKind::Commutator => {
                        let mut e = c.to_vec();
                        e.push(Atom::Var { id: fresh, sign: Sign::Plus });
                        e.extend(invert_atoms(c));
                        e
                    }
                    BlockKind::Coefficient => {
                        let mut e = vec![Atom::Var { id: fresh, sign: Sign::Plus }];
                        e.extend(invert_atoms(c));
                        e
                    }
                };
                self.substitute(v, expr, Some(fresh));
                self.blocks[b].vars[slot] = fresh;
            }
        }
        let mut body = invert_atoms(c);
        body.extend_from_slice(&self.body);
        body.extend_from_slice(c);
        self.reduce_and_record(body);
    }
}

fn atoms_to_word(atoms: &[Atom]) -> Word {
    let letters: Vec<Letter> = atoms
        .iter()
        .map(|a| match a {
            Atom::Const(l) => *l,
            Atom::Var { .. } => panic!("expected constants"),
        })
        .collect();
    free_reduce(letters)
}

/// Brings a raw quadratic equation to standard form. The returned [`BackMap`]
/// transports any solution of the standard form to a solution of the raw
/// equation (and raw solutions forward to standard-form solutions).
pub fn normalize(raw: &RawEquation) -> (StandardForm, BackMap) {
    let mut raw_ids = Vec::new();
    for (i, name) in raw.variables().iter().enumerate() {
        raw_ids.push((name.clone(), i));
    }
    let body: Vec<Atom> = raw
        .body()
        .iter()
        .map(|t| match t {
            Token::Variable(name, sign) => {
                let id = raw.variables().iter().position(|n| n == name).expect("known variable");
                Atom::Var { id, sign: *sign }
            }
            Token::Constant(l) => Atom::Const(*l),
        })
        .collect();

    let mut norm = Normalizer {
        body: vec![],
        records: vec![],
        blocks: vec![],
        next_var: raw.variables().len(),
        moves: 0,
    };
    norm.reduce_and_record(body);
    norm.collect_squares();
    norm.collect_commutators();
    norm.extract_coefficients();
    norm.convert_mixed_genus();
    norm.assemble();
    norm.canonicalize_coefficients();
    norm.fix_last_coefficient();

    // Rename block variables to their standard names and read the shape off
    // the body.
    let mut final_ids: Vec<(StdVar, usize)> = Vec::new();
    let squares: Vec<usize> = (0..norm.blocks.len())
        .filter(|&b| norm.blocks[b].kind == BlockKind::Square)
        .collect();
    let commutators: Vec<usize> = (0..norm.blocks.len())
        .filter(|&b| norm.blocks[b].kind == BlockKind::Commutator)
        .collect();
    debug_assert!(squares.is_empty() || commutators.is_empty());
    let orientable = squares.is_empty();
    let genus = squares.len() + commutators.len();

    // Order genus blocks by body position.
    let mut genus_blocks: Vec<usize> = squares.iter().chain(commutators.iter()).copied().collect();
    genus_blocks.sort_by_key(|&b| norm.locate(b).start);
    for (j, &b) in genus_blocks.iter().enumerate() {
        match norm.blocks[b].kind {
            BlockKind::Square => {
                let v = norm.blocks[b].vars[0];
                let occ = norm.occurrences(v);
                let sign = match norm.body[occ[0]] {
                    Atom::Var { sign, .. } => sign,
                    Atom::Const(_) => unreachable!(),
                };
                let fresh = norm.fresh();
                norm.substitute(v, vec![Atom::Var { id: fresh, sign }], Some(fresh));
                final_ids.push((StdVar::X(j), fresh));
            }
            BlockKind::Commutator => {
                // Body order r s r⁻¹ s⁻¹ (up to signs) renames to the block
                // x⁻¹ y⁻¹ x y.
                let range = norm.locate(b);
                let (r_id, r_sign) = match norm.body[range.start] {
                    Atom::Var { id, sign } => (id, sign),
                    Atom::Const(_) => unreachable!(),
                };
                let (s_id, s_sign) = match norm.body[range.start + 1] {
                    Atom::Var { id, sign } => (id, sign),
                    Atom::Const(_) => unreachable!(),
                };
                let x = norm.fresh();
                norm.substitute(r_id, vec![Atom::Var { id: x, sign: r_sign.flip() }], Some(x));
                let y = norm.fresh();
                norm.substitute(s_id, vec![Atom::Var { id: y, sign: s_sign.flip() }], Some(y));
                final_ids.push((StdVar::X(j), x));
                final_ids.push((StdVar::Y(j), y));
            }
            BlockKind::Coefficient => unreachable!(),
        }
    }

    let mut coef_blocks: Vec<usize> = (0..norm.blocks.len())
        .filter(|&b| norm.blocks[b].kind == BlockKind::Coefficient)
        .collect();
    coef_blocks.sort_by_key(|&b| norm.locate(b).start);
    let mut coefficients: Vec<CyclicWord> = Vec::new();
    for (j, &b) in coef_blocks.iter().enumerate() {
        let z = norm.blocks[b].vars[0];
        let occ = norm.occurrences(z);
        let w = atoms_to_word(&norm.body[occ[0] + 1..occ[1]]);
        coefficients.push(CyclicWord::canonical(&w));
        let fresh = norm.fresh();
        norm.substitute(z, vec![Atom::Var { id: fresh, sign: Sign::Plus }], Some(fresh));
        final_ids.push((StdVar::Z(j), fresh));
    }

    let tail = norm.trailing_constants();
    let d = if tail > 0 {
        let run = atoms_to_word(&norm.body[norm.body.len() - tail..]);
        Some(CyclicWord::canonical(&run))
    } else {
        None
    };

    let sf = StandardForm::new(raw.alphabet().clone(), orientable, genus, coefficients, d)
        .expect("normalization produces a valid standard form");
    let back = BackMap { records: norm.records, raw_ids, final_ids };
    (sf, back)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equations::parse_equation;
    use crate::words::Alphabet;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ab() -> Alphabet {
        Alphabet::new("ab").unwrap()
    }

    fn norm(text: &str) -> (StandardForm, BackMap) {
        normalize(&parse_equation(text, &ab()).unwrap())
    }

    #[test]
    fn conjugated_constant_splits_into_coefficient_and_last() {
        let (sf, back) = norm("x a x^-1 b = 1");
        assert!(sf.orientable());
        assert_eq!(sf.genus(), 0);
        assert_eq!(sf.coefficient_count(), 2);
        assert_eq!(sf.coefficients()[0].to_string(), "a");
        assert_eq!(sf.last_coefficient().unwrap().to_string(), "b");

        // The raw equation is unsolvable, like its standard form; transport
        // must still be structurally sound, so check it on the commutator
        // cousin that is solvable.
        let (sf2, back2) = norm("x a x^-1 a^-1 = 1");
        assert_eq!(sf2.coefficient_count(), 2);
        let mut assignment = StdAssignment::default();
        assignment.set(StdVar::Z(0), Word::parse("ba").unwrap());
        if sf2.check_solution(&assignment).unwrap() {
            let raw_solution = back2.transport(&assignment).unwrap();
            let eq = parse_equation("x a x^-1 a^-1 = 1", &ab()).unwrap();
            assert!(eq.check_solution(&raw_solution).unwrap());
        }
        let _ = back;
    }

    #[test]
    fn commutator_equation_is_genus_one() {
        let (sf, back) = norm("x y x^-1 y^-1 = 1");
        assert!(sf.orientable());
        assert_eq!(sf.genus(), 1);
        assert_eq!(sf.coefficient_count(), 0);
        assert!(sf.trivially_solvable());

        // Any pair of words solves the standard form with x = y.
        let mut assignment = StdAssignment::default();
        assignment.set(StdVar::X(0), Word::parse("ab").unwrap());
        assignment.set(StdVar::Y(0), Word::parse("ab").unwrap());
        assert!(sf.check_solution(&assignment).unwrap());
        let raw_solution = back.transport(&assignment).unwrap();
        let eq = parse_equation("x y x^-1 y^-1 = 1", &ab()).unwrap();
        assert!(eq.check_solution(&raw_solution).unwrap());
    }

    #[test]
    fn same_sign_pair_normalizes_non_orientable() {
        // x y x y = 1: substituting x = x'y⁻¹ reduces the body to x'x', so
        // the quadratic word is equivalent to a single square (the companion
        // pair cancels and is unconstrained).
        let (sf, back) = norm("x y x y = 1");
        assert!(!sf.orientable());
        assert_eq!(sf.genus(), 1);
        assert_eq!(sf.coefficient_count(), 0);

        let mut assignment = StdAssignment::default();
        assignment.set(StdVar::X(0), Word::empty());
        assert!(sf.check_solution(&assignment).unwrap());
        let raw_solution = back.transport(&assignment).unwrap();
        let eq = parse_equation("x y x y = 1", &ab()).unwrap();
        assert!(eq.check_solution(&raw_solution).unwrap());
    }

    #[test]
    fn squares_with_constants() {
        let (sf, _) = norm("x x a a = 1");
        assert!(!sf.orientable());
        assert_eq!(sf.genus(), 1);
        assert_eq!(sf.coefficient_count(), 1);
        assert_eq!(sf.last_coefficient().unwrap().to_string(), "aa");
    }

    #[test]
    fn mixed_square_and_commutator_becomes_squares() {
        let (sf, back) = norm("u u p q p^-1 q^-1 = 1");
        assert!(!sf.orientable());
        assert_eq!(sf.genus(), 3);
        assert_eq!(sf.coefficient_count(), 0);

        // x₁ = ε, x₂ = w, x₃ = w⁻¹ solves ∏xᵢ² = 1 only when w² (w⁻¹)² = 1,
        // so use the all-trivial solution plus a nontrivial inverse pair.
        let mut assignment = StdAssignment::default();
        assignment.set(StdVar::X(0), Word::empty());
        assignment.set(StdVar::X(1), Word::parse("ab").unwrap());
        assignment.set(StdVar::X(2), Word::parse("BA").unwrap());
        assert!(sf.check_solution(&assignment).unwrap());
        let raw_solution = back.transport(&assignment).unwrap();
        let eq = parse_equation("u u p q p^-1 q^-1 = 1", &ab()).unwrap();
        assert!(eq.check_solution(&raw_solution).unwrap());
    }

    #[test]
    fn nested_conjugates_become_two_coefficients() {
        let (sf, _) = norm("x a y b b y^-1 a x^-1 = 1");
        assert!(sf.orientable());
        assert_eq!(sf.genus(), 0);
        assert_eq!(sf.coefficient_count(), 2);
    }

    #[test]
    fn adjacent_inverse_pair_cancels() {
        let (sf, back) = norm("x x^-1 a = 1");
        assert_eq!(sf.genus(), 0);
        assert_eq!(sf.coefficient_count(), 1);
        assert_eq!(sf.last_coefficient().unwrap().to_string(), "a");
        // x is unconstrained and must still transport.
        let assignment = StdAssignment::default();
        // The equation a = 1 has no solution; transport still yields words.
        let raw_solution = back.transport(&assignment).unwrap();
        assert!(raw_solution.contains_key("x"));
    }

    #[test]
    fn constants_only_equation() {
        let (sf, _) = norm("a b = 1");
        assert_eq!(sf.genus(), 0);
        assert_eq!(sf.coefficient_count(), 1);
        assert_eq!(sf.last_coefficient().unwrap().to_string(), "ab");

        let (sf, _) = norm("a a^-1 = 1");
        assert_eq!(sf.coefficient_count(), 0);
        assert!(sf.trivially_solvable());
    }

    #[test]
    fn empty_body_is_trivially_solvable() {
        let (sf, _) = norm("= 1");
        assert_eq!(sf.genus(), 0);
        assert_eq!(sf.coefficient_count(), 0);
        assert!(sf.trivially_solvable());
    }

    #[test]
    fn degenerate_conjugate_piece_is_dropped() {
        // y wraps a piece that freely cancels, so its coefficient is ε and
        // the factor disappears.
        let (sf, _) = norm("y a a^-1 y^-1 b = 1");
        assert_eq!(sf.coefficient_count(), 1);
        assert_eq!(sf.last_coefficient().unwrap().to_string(), "b");
    }

    fn random_assignment(rng: &mut StdRng, alphabet: &Alphabet, max_len: usize) -> Word {
        let words = alphabet.reduced_words_up_to(max_len);
        words[rng.gen_range(0..words.len())].clone()
    }

    /// Random raw equation that is solvable by construction: a random
    /// quadratic body evaluated at a random assignment, with the inverse of
    /// the value appended as constants.
    pub(crate) fn random_solvable_equation(
        rng: &mut StdRng,
        max_vars: usize,
        max_const: usize,
    ) -> (RawEquation, HashMap<String, Word>) {
        let alphabet = ab();
        loop {
            let vars = rng.gen_range(0..=max_vars);
            let names: Vec<String> = (0..vars).map(|i| format!("v{i}")).collect();
            let mut tokens: Vec<Token> = Vec::new();
            for name in &names {
                for _ in 0..2 {
                    let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
                    tokens.push(Token::Variable(name.clone(), sign));
                }
            }
            for _ in 0..rng.gen_range(0..=3usize) {
                let sym = if rng.gen_bool(0.5) { b'a' } else { b'b' };
                let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
                tokens.push(Token::Constant(Letter::new(sym, sign)));
            }
            for i in (1..tokens.len()).rev() {
                let j = rng.gen_range(0..=i);
                tokens.swap(i, j);
            }
            let mut assignment = HashMap::new();
            for name in &names {
                assignment.insert(name.clone(), random_assignment(rng, &alphabet, 2));
            }
            let probe = RawEquation::new(alphabet.clone(), tokens.clone());
            let Ok(probe) = probe else { continue };
            // Evaluate and append the inverse of the value as constants.
            let mut letters = Vec::new();
            for t in probe.body() {
                match t {
                    Token::Variable(name, sign) => {
                        let v = &assignment[name];
                        let piece = match sign {
                            Sign::Plus => v.clone(),
                            Sign::Minus => v.inverse(),
                        };
                        letters.extend_from_slice(piece.letters());
                    }
                    Token::Constant(l) => letters.push(*l),
                }
            }
            let value = free_reduce(letters);
            if value.len() > max_const {
                continue;
            }
            for &l in value.inverse().letters() {
                tokens.push(Token::Constant(l));
            }
            let eq = RawEquation::new(alphabet, tokens).expect("still quadratic");
            debug_assert!(eq.check_solution(&assignment).unwrap());
            return (eq, assignment);
        }
    }

    #[test]
    fn round_trip_on_random_solvable_equations() {
        let mut rng = StdRng::seed_from_u64(41);
        for _ in 0..300 {
            let (eq, raw_solution) = random_solvable_equation(&mut rng, 3, 6);
            let (sf, back) = normalize(&eq);
            // Raw solution → standard-form solution…
            let std_solution = back.transport_forward(&raw_solution).unwrap();
            assert!(
                sf.check_solution(&std_solution).unwrap(),
                "forward transport must solve the standard form: {eq:?}"
            );
            // …and back again.
            let transported = back.transport(&std_solution).unwrap();
            assert!(
                eq.check_solution(&transported).unwrap(),
                "backward transport must solve the raw equation: {eq:?}"
            );
        }
    }

    #[test]
    fn normalized_coefficients_are_cyclically_reduced_and_nonempty() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..300 {
            let (eq, _) = random_solvable_equation(&mut rng, 3, 6);
            let (sf, _) = normalize(&eq);
            for c in sf.coefficients() {
                assert!(!c.is_empty());
                assert!(c.representative().is_cyclically_reduced());
            }
            if let Some(d) = sf.last_coefficient() {
                assert!(!d.is_empty());
                assert!(d.representative().is_cyclically_reduced());
            }
            if sf.genus() == 0 {
                assert!(sf.orientable());
            }
        }
    }
}
