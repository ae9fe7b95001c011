//! Exhaustive certificate search within the edge bound.
//!
//! Every acceptable certificate reads each coefficient without cancellation
//! around its disc, so its boundary words are segmentations of coefficient
//! rotations into variable images. The search therefore enumerates, disc by
//! disc, a rotation of the coefficient and a set of cut points, matching the
//! resulting arcs into variable pairs (equal content pairs the label with
//! the same exponent twice, mutually inverse content with opposite
//! exponents; orientable equations only admit the inverse kind). Candidates
//! are handed to the verifier; unsolvability is reported only once every
//! candidate up to the edge bound is exhausted.
//!
//! Pairings that create a mergeable degree-2 vertex are skipped: such a
//! certificate is a subdivision of a smaller one that is enumerated on its
//! own, and consolidation shows an accepted certificate always exists in
//! subdivision-free form within the bound.

use std::collections::HashSet;
use std::time::Instant;

use crate::equations::StandardForm;
use crate::words::{CyclicWord, Sign, Word};

use super::{edge_bound, verify, Certificate};

/// Resource limits for [`search`]. With no deadline and no variable cap the
/// search is complete and UNSAT answers are definitive.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchBudget {
    pub deadline: Option<Instant>,
    pub max_n: Option<usize>,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Sat(Certificate),
    Unsat,
    Unknown,
}

impl SearchOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SearchOutcome::Sat(_))
    }
}

/// Decides solvability of a standard-form equation with at least one
/// coefficient by bounded certificate enumeration, smallest variable counts
/// first.
pub fn search(sf: &StandardForm, budget: &SearchBudget) -> SearchOutcome {
    let m = sf.coefficient_count();
    assert!(m >= 1, "coefficient-free equations are trivially solvable upstream");

    let mut targets: Vec<CyclicWord> = sf.coefficients().to_vec();
    targets.push(sf.last_coefficient().expect("m ≥ 1").clone());
    // Longest (most constraining) coefficients first, identical coefficients
    // adjacent so their interchange symmetry can be broken.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(targets[i].len()), targets[i].clone(), i));
    let targets: Vec<CyclicWord> = order.iter().map(|&i| targets[i].clone()).collect();
    let total_letters: usize = targets.iter().map(|t| t.len()).sum();

    // Images are nonempty, so n can never exceed half the total reading
    // length; independently the edge bound caps admissible certificates.
    let n_complete = edge_bound(sf).min(total_letters / 2);
    let n_cap = budget.max_n.map_or(n_complete, |cap| cap.min(n_complete));

    if budget.deadline.is_some_and(|d| Instant::now() >= d) {
        return SearchOutcome::Unknown;
    }
    let mut dfs = Dfs::new(sf, targets, budget.deadline);
    for n_target in 1..=n_cap {
        dfs.n_target = n_target;
        if dfs.disc_start(0) {
            let cert = dfs.found.take().expect("found certificate stored");
            let cert = unpermute(cert, &order);
            return SearchOutcome::Sat(cert);
        }
        if dfs.aborted {
            return SearchOutcome::Unknown;
        }
    }
    if n_cap == n_complete {
        SearchOutcome::Unsat
    } else {
        SearchOutcome::Unknown
    }
}

/// Restores the original disc order of a certificate found with reordered
/// coefficients, renaming variables into first-use order.
fn unpermute(cert: Certificate, order: &[usize]) -> Certificate {
    let mut boundaries = vec![Vec::new(); order.len()];
    for (processed, &original) in order.iter().enumerate() {
        boundaries[original] = cert.boundaries()[processed].clone();
    }
    let mut rename: Vec<Option<u32>> = vec![None; cert.variable_count()];
    let mut images = Vec::with_capacity(cert.variable_count());
    for boundary in &mut boundaries {
        for (var, _) in boundary.iter_mut() {
            let id = match rename[*var as usize] {
                Some(id) => id,
                None => {
                    let id = images.len() as u32;
                    images.push(cert.images()[*var as usize].clone());
                    rename[*var as usize] = Some(id);
                    id
                }
            };
            *var = id;
        }
    }
    Certificate::from_parts(images, boundaries)
}

#[derive(Clone, Copy)]
struct Arc {
    disc: usize,
    start: usize,
    end: usize,
    var: u32,
    sign: Sign,
}

struct Open {
    var: u32,
    content: Word,
    arc: usize,
}

/// Union-find over boundary corners with an undo log, used to bound the
/// final vertex count of the glued complex while the matching is partial.
#[derive(Default)]
struct CornerClasses {
    parent: Vec<usize>,
    size: Vec<usize>,
    classes: usize,
    merges: Vec<(usize, usize)>,
    slots: std::collections::HashMap<(usize, usize), usize>,
    created: Vec<(usize, usize)>,
}

impl CornerClasses {
    fn snapshot(&self) -> (usize, usize) {
        (self.merges.len(), self.created.len())
    }

    fn rollback(&mut self, (merges, created): (usize, usize)) {
        while self.merges.len() > merges {
            let (child, parent) = self.merges.pop().expect("logged merge");
            self.parent[child] = child;
            self.size[parent] -= self.size[child];
            self.classes += 1;
        }
        while self.created.len() > created {
            let key = self.created.pop().expect("logged slot");
            self.slots.remove(&key);
            self.parent.pop();
            self.size.pop();
            self.classes -= 1;
        }
    }

    fn slot(&mut self, disc: usize, gap: usize) -> usize {
        if let Some(&s) = self.slots.get(&(disc, gap)) {
            return s;
        }
        let s = self.parent.len();
        self.parent.push(s);
        self.size.push(1);
        self.classes += 1;
        self.slots.insert((disc, gap), s);
        self.created.push((disc, gap));
        s
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.merges.push((rb, ra));
        self.classes -= 1;
    }
}

struct Dfs<'a> {
    sf: &'a StandardForm,
    targets: Vec<CyclicWord>,
    orientable: bool,
    n_target: usize,
    /// Substrings of every coefficient rotation; partner contents outside
    /// this set can never close.
    cyclic_substrings: HashSet<Word>,
    deadline: Option<Instant>,
    nodes: u64,
    aborted: bool,
    // per-disc choices and partial output
    readings: Vec<Word>,
    rotations: Vec<usize>,
    boundaries: Vec<Vec<(u32, Sign)>>,
    images: Vec<Word>,
    opens: Vec<Open>,
    arcs: Vec<Arc>,
    /// Arc ids per disc, in boundary order.
    disc_arcs: Vec<Vec<usize>>,
    /// The two arc ids of each variable.
    var_arcs: Vec<Vec<usize>>,
    corners: CornerClasses,
    chi_bar: i64,
    found: Option<Certificate>,
}

impl<'a> Dfs<'a> {
    fn new(sf: &'a StandardForm, targets: Vec<CyclicWord>, deadline: Option<Instant>) -> Dfs<'a> {
        let mut cyclic_substrings = HashSet::new();
        for t in &targets {
            let rep = t.representative();
            for k in 0..rep.len() {
                let rot = rep.rotate_left(k);
                for len in 1..=rep.len() {
                    cyclic_substrings
                        .insert(crate::words::free_reduce(rot.letters()[..len].to_vec()));
                }
            }
        }
        Dfs {
            sf,
            targets,
            orientable: sf.orientable(),
            n_target: 0,
            cyclic_substrings,
            deadline,
            nodes: 0,
            aborted: false,
            readings: Vec::new(),
            rotations: Vec::new(),
            boundaries: Vec::new(),
            images: Vec::new(),
            opens: Vec::new(),
            arcs: Vec::new(),
            disc_arcs: Vec::new(),
            var_arcs: Vec::new(),
            corners: CornerClasses::default(),
            chi_bar: sf.reduced_euler_characteristic(),
            found: None,
        }
    }

    /// Admissible certificates satisfy Σχ − 2l ≥ χ̄ with Σχ = V − n + m, so
    /// the final vertex count obeys V ≥ n − m + χ̄. Corner classes only ever
    /// merge, which bounds the final count from above by the current classes
    /// plus the corners not yet materialized.
    fn vertex_bound_violated(&self) -> bool {
        let v_upper = self.corners.classes as i64
            + (2 * self.n_target - self.corners.slots.len()) as i64;
        let m = self.targets.len() as i64;
        v_upper < self.n_target as i64 - m + self.chi_bar
    }

    /// Materializes the two corners of an arc; for a completed pair also
    /// identifies heads with heads and tails with tails.
    fn record_arc_corners(&mut self, arc: Arc) -> (usize, usize) {
        let len = self.targets[arc.disc].len();
        let start = self.corners.slot(arc.disc, arc.start);
        let end = self.corners.slot(arc.disc, arc.end % len);
        match arc.sign {
            Sign::Plus => (end, start),  // (head, tail)
            Sign::Minus => (start, end),
        }
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes % 1024 == 0 {
            if let Some(deadline) = self.deadline {
                if Instant::now() >= deadline {
                    self.aborted = true;
                }
            }
        }
        self.aborted
    }

    fn remaining_letters_from(&self, disc: usize, pos: usize) -> usize {
        let current = self.targets[disc].len() - pos;
        let future: usize = self.targets[disc + 1..].iter().map(|t| t.len()).sum();
        current + future
    }

    fn disc_start(&mut self, disc: usize) -> bool {
        if self.tick() {
            return false;
        }
        if disc == self.targets.len() {
            if !self.opens.is_empty() || self.images.len() != self.n_target {
                return false;
            }
            let cert = Certificate::from_parts(self.images.clone(), self.boundaries.clone());
            let verdict = verify(self.sf, &cert);
            if verdict.accepted {
                self.found = Some(cert);
                return true;
            }
            return false;
        }

        // Arc/letter budget: every remaining disc needs at least one arc and
        // every arc at least one letter.
        let arcs_left = 2 * self.n_target - self.arcs.len();
        let discs_left = self.targets.len() - disc;
        let letters_left = self.remaining_letters_from(disc, 0);
        if arcs_left < self.opens.len()
            || (arcs_left - self.opens.len()) % 2 != 0
            || arcs_left < discs_left
            || arcs_left > letters_left
        {
            return false;
        }
        let open_letters: usize = self.opens.iter().map(|o| o.content.len()).sum();
        if open_letters > letters_left {
            return false;
        }

        let len = self.targets[disc].len();
        for rot in 0..len {
            // Discs with equal coefficients are interchangeable; keep only
            // non-decreasing rotation choices.
            if disc > 0
                && self.targets[disc] == self.targets[disc - 1]
                && rot < self.rotations[disc - 1]
            {
                continue;
            }
            let reading = self.targets[disc].representative().rotate_left(rot);
            self.readings.push(reading);
            self.rotations.push(rot);
            self.boundaries.push(Vec::new());
            self.disc_arcs.push(Vec::new());
            if self.advance(disc, 0, 1) {
                return true;
            }
            self.disc_arcs.pop();
            self.boundaries.pop();
            self.rotations.pop();
            self.readings.pop();
            if self.aborted {
                return false;
            }
        }
        false
    }

    /// Processes the gap before `pos` on `disc`; the arc in progress starts
    /// at `arc_start`.
    fn advance(&mut self, disc: usize, arc_start: usize, pos: usize) -> bool {
        if self.tick() {
            return false;
        }
        let len = self.targets[disc].len();
        if pos == len {
            return self.close_arc(disc, arc_start, len, true);
        }
        // Cut here (unless the cut would beat the rotation anchor: each
        // cyclic cut pattern is enumerated exactly once, anchored at its
        // minimal cut position in the coefficient frame)…
        let canonical_anchor = (self.rotations[disc] + pos) % len >= self.rotations[disc];
        if canonical_anchor && self.close_arc(disc, arc_start, pos, false) {
            return true;
        }
        // …or extend the arc across the gap.
        self.advance(disc, arc_start, pos + 1)
    }

    fn close_arc(&mut self, disc: usize, start: usize, end: usize, last: bool) -> bool {
        if self.arcs.len() + 1 > 2 * self.n_target {
            return false;
        }
        // A substring of a rotation of a cyclically reduced word is reduced.
        let content =
            crate::words::free_reduce(self.readings[disc].letters()[start..end].to_vec());
        debug_assert_eq!(content.len(), end - start);
        let after = |dfs: &mut Dfs<'a>, disc: usize| -> bool {
            if last {
                dfs.disc_start(disc + 1)
            } else {
                dfs.advance(disc, end, end + 1)
            }
        };

        // Match against an open arc: equal content glues the label with the
        // same exponent twice (non-orientable only), inverse content with
        // opposite exponents.
        for oi in 0..self.opens.len() {
            let open = &self.opens[oi];
            let sign = if open.content == content && !self.orientable {
                Some(Sign::Plus)
            } else if open.content == content.inverse() {
                Some(Sign::Minus)
            } else {
                None
            };
            let Some(sign) = sign else { continue };
            let open = self.opens.remove(oi);
            let var = open.var;
            let arc_id = self.arcs.len();
            let arc = Arc { disc, start, end, var, sign };
            self.arcs.push(arc);
            self.disc_arcs[disc].push(arc_id);
            self.var_arcs[var as usize].push(arc_id);
            self.boundaries[disc].push((var, sign));

            let mark = self.corners.snapshot();
            let (head2, tail2) = self.record_arc_corners(arc);
            let partner = self.arcs[open.arc];
            let (head1, tail1) = self.record_arc_corners(partner);
            self.corners.union(head1, head2);
            self.corners.union(tail1, tail2);

            if !self.vertex_bound_violated()
                && !self.pair_makes_mergeable_vertex(var)
                && after(self, disc)
            {
                return true;
            }

            self.corners.rollback(mark);
            self.boundaries[disc].pop();
            self.var_arcs[var as usize].pop();
            self.disc_arcs[disc].pop();
            self.arcs.pop();
            self.opens.insert(oi, open);
            if self.aborted {
                return false;
            }
        }

        // Or open a fresh variable, if one is left and a partner is possible.
        if self.images.len() < self.n_target {
            let partner_possible = self.cyclic_substrings.contains(&content.inverse())
                || (!self.orientable && self.cyclic_substrings.contains(&content));
            if partner_possible {
                let var = self.images.len() as u32;
                let arc_id = self.arcs.len();
                let arc = Arc { disc, start, end, var, sign: Sign::Plus };
                self.arcs.push(arc);
                self.disc_arcs[disc].push(arc_id);
                self.var_arcs.push(vec![arc_id]);
                self.images.push(content.clone());
                self.opens.push(Open { var, content, arc: arc_id });
                self.boundaries[disc].push((var, Sign::Plus));
                let mark = self.corners.snapshot();
                self.record_arc_corners(arc);
                if after(self, disc) {
                    return true;
                }
                self.corners.rollback(mark);
                self.boundaries[disc].pop();
                self.opens.pop();
                self.images.pop();
                self.var_arcs.pop();
                self.disc_arcs[disc].pop();
                self.arcs.pop();
            }
        }
        false
    }

    /// Arc ending at the corner (disc, gap), when already enumerated. The
    /// wrap corner (gap 0) closes with the disc's final arc.
    fn arc_ending_at(&self, disc: usize, gap: usize) -> Option<usize> {
        let len = self.targets[disc].len();
        let gap = if gap == 0 { len } else { gap };
        self.disc_arcs[disc].iter().copied().find(|&a| self.arcs[a].end == gap)
    }

    fn arc_starting_at(&self, disc: usize, gap: usize) -> Option<usize> {
        self.disc_arcs[disc].iter().copied().find(|&a| self.arcs[a].start == gap)
    }

    /// After completing the pair of `var`, detects whether any corner of its
    /// two arcs has degree 2 with two distinct edges — the configuration
    /// edge consolidation would merge. Such pairings are subdivisions of
    /// certificates already enumerated with fewer variables.
    fn pair_makes_mergeable_vertex(&self, var: u32) -> bool {
        let arcs = &self.var_arcs[var as usize];
        debug_assert_eq!(arcs.len(), 2);
        for &a in arcs {
            let arc = self.arcs[a];
            let len = self.targets[arc.disc].len();
            // Corner before the arc and corner after it.
            let corners = [(arc.disc, arc.start), (arc.disc, arc.end % len)];
            for (disc, gap) in corners {
                let Some(inc) = self.arc_ending_at(disc, gap) else { continue };
                let Some(out) = self.arc_starting_at(disc, gap) else { continue };
                if self.corner_mergeable(inc, out) {
                    return true;
                }
            }
        }
        false
    }

    /// A corner with incoming arc `inc` and outgoing arc `out` (distinct
    /// variables, both paired) is mergeable iff the other occurrences of the
    /// two variables are consecutive somewhere, reading the same path in
    /// either direction.
    fn corner_mergeable(&self, inc: usize, out: usize) -> bool {
        let p = self.arcs[inc];
        let f = self.arcs[out];
        if inc == out || p.var == f.var {
            // A single wrapped arc or both ends of one edge: consolidation
            // cannot merge these.
            return false;
        }
        let (Some(&p2), Some(&f2)) = (
            self.var_arcs[p.var as usize].iter().find(|&&a| a != inc),
            self.var_arcs[f.var as usize].iter().find(|&&a| a != out),
        ) else {
            return false; // one of the pairs is still open
        };
        let p2 = self.arcs[p2];
        let f2 = self.arcs[f2];
        // Same reading p then f…
        if p2.disc == f2.disc
            && p2.sign == p.sign
            && f2.sign == f.sign
            && p2.end % self.targets[p2.disc].len() == f2.start
        {
            return true;
        }
        // …or the inverse reading f⁻¹ then p⁻¹.
        if p2.disc == f2.disc
            && f2.sign == f.sign.flip()
            && p2.sign == p.sign.flip()
            && f2.end % self.targets[f2.disc].len() == p2.start
        {
            return true;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::DirectSearcher;
    use crate::words::Alphabet;

    fn ab() -> Alphabet {
        Alphabet::new("ab").unwrap()
    }

    fn cyc(s: &str) -> CyclicWord {
        CyclicWord::canonical(&Word::parse(s).unwrap())
    }

    fn decide(sf: &StandardForm) -> SearchOutcome {
        search(sf, &SearchBudget::default())
    }

    #[test]
    fn finds_sphere_certificate() {
        let sf = StandardForm::new(ab(), true, 0, vec![cyc("ab")], Some(cyc("BA"))).unwrap();
        match decide(&sf) {
            SearchOutcome::Sat(cert) => {
                assert!(verify(&sf, &cert).accepted);
                assert_eq!(cert.variable_count(), 1);
            }
            other => panic!("expected SAT, got {other:?}"),
        }
    }

    #[test]
    fn refutes_non_square() {
        // x₁² = ab is unsolvable.
        let sf = StandardForm::new(ab(), false, 1, vec![], Some(cyc("BA"))).unwrap();
        assert!(matches!(decide(&sf), SearchOutcome::Unsat));
        // Cross-check: brute force finds nothing short either.
        let mut direct = DirectSearcher::new(&ab(), 4);
        assert!(direct.search_std(&sf).is_none());
    }

    #[test]
    fn finds_projective_plane() {
        let sf = StandardForm::new(ab(), false, 1, vec![], Some(cyc("AA"))).unwrap();
        match decide(&sf) {
            SearchOutcome::Sat(cert) => {
                assert!(verify(&sf, &cert).accepted);
            }
            other => panic!("expected SAT, got {other:?}"),
        }
    }

    #[test]
    fn finds_same_exponent_gluing_for_non_orientable() {
        // x₁² · (ab)² = 1 is solved by x₁ = (ab)⁻¹; the certificate glues
        // the two same-content halves of the reading.
        let sf = StandardForm::new(ab(), false, 1, vec![], Some(cyc("abab"))).unwrap();
        match decide(&sf) {
            SearchOutcome::Sat(cert) => assert!(verify(&sf, &cert).accepted),
            other => panic!("expected SAT, got {other:?}"),
        }
    }

    #[test]
    fn conjugacy_decision_through_spheres() {
        // z⁻¹ w z d = 1 is solvable iff d⁻¹ is conjugate to w, i.e. iff d is
        // a rotation of w⁻¹.
        let cases = [
            ("ab", "BA", true),
            ("ab", "ab", false),
            ("aab", "ABA", true),
            ("aab", "aab", false),
        ];
        for (w, d, expected) in cases {
            let sf = StandardForm::new(ab(), true, 0, vec![cyc(w)], Some(cyc(d))).unwrap();
            assert_eq!(decide(&sf).is_sat(), expected, "w={w} d={d}");
        }
    }

    #[test]
    fn genus_absorbs_commutator_values() {
        // [x₁,y₁]·d = 1 with d a commutator value: solvable at genus one
        // through a torus certificate, unsolvable at genus zero.
        let d = cyc("aBAb");
        let with_genus = StandardForm::new(ab(), true, 1, vec![], Some(d.clone())).unwrap();
        let without = StandardForm::new(ab(), true, 0, vec![], Some(d)).unwrap();
        match decide(&with_genus) {
            SearchOutcome::Sat(cert) => {
                assert!(verify(&with_genus, &cert).accepted);
                // One torus square.
                assert_eq!(cert.variable_count(), 2);
            }
            other => panic!("expected SAT, got {other:?}"),
        }
        assert!(!decide(&without).is_sat());
    }

    #[test]
    fn budget_cap_yields_unknown() {
        let sf = StandardForm::new(ab(), true, 0, vec![cyc("ab")], Some(cyc("ab"))).unwrap();
        // This instance is UNSAT; capping n below the bound must refuse to
        // claim so.
        let capped = search(&sf, &SearchBudget { deadline: None, max_n: Some(1) });
        assert!(matches!(capped, SearchOutcome::Unknown));
        assert!(matches!(decide(&sf), SearchOutcome::Unsat));
    }

    #[test]
    fn exhausted_deadline_yields_unknown() {
        let sf = StandardForm::new(
            ab(),
            true,
            0,
            vec![cyc("abab"), cyc("abab"), cyc("abab")],
            Some(cyc("abababab")),
        )
        .unwrap();
        let out = search(&sf, &SearchBudget { deadline: Some(Instant::now()), max_n: None });
        assert!(matches!(out, SearchOutcome::Unknown));
    }
}
