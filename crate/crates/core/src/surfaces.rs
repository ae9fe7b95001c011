//! Combinatorial closed surfaces built by gluing discs along labeled edges.
//!
//! A complex is a list of discs, each carrying a cyclic boundary word of
//! signed edge labels, where every label occurs exactly twice in the union of
//! all boundaries. Gluing the matching labels (head to head, tail to tail)
//! yields a disjoint union of closed surfaces. The module computes connected
//! components, orientability by parity propagation, and the Euler
//! characteristic twice: by counting cells and through the combinatorial
//! Gauss-Bonnet formula with exact rational angles.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::words::Sign;

/// Edge label, interned by the caller. Each label names one abstract edge of
/// the glued complex.
pub type Label = u32;

/// One disc with its clockwise boundary word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Disc {
    pub boundary: Vec<(Label, Sign)>,
}

impl Disc {
    pub fn sides(&self) -> usize {
        self.boundary.len()
    }
}

/// A single edge occurrence inside some boundary word.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Occurrence {
    pub disc: usize,
    pub pos: usize,
    pub sign: Sign,
}

/// The two occurrences of one label.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgePair {
    pub label: Label,
    pub occ: [Occurrence; 2],
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("label {0} occurs {1} times in the union of boundaries, expected exactly 2")]
    BadMultiplicity(Label, usize),
    #[error("disc {0} has an empty boundary")]
    EmptyBoundary(usize),
}

/// Discs together with the derived gluing data: edge pairs, vertex classes
/// and the partition of discs into connected components. Immutable once
/// built; all queries are pure.
#[derive(Clone, Debug)]
pub struct GluedComplex {
    discs: Vec<Disc>,
    edges: Vec<EdgePair>,
    /// vertex_class[disc][pos] = id of the vertex between boundary positions
    /// pos-1 and pos (cyclically) of that disc.
    vertex_class: Vec<Vec<usize>>,
    vertex_count: usize,
    /// Disc indices grouped by connected component, each group sorted.
    components: Vec<Vec<usize>>,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Resolves edge pairs, vertex classes and components for the given
/// boundaries. Fails if some label does not occur exactly twice.
pub fn build_complex(boundaries: &[Vec<(Label, Sign)>]) -> Result<GluedComplex, ComplexError> {
    for (i, b) in boundaries.iter().enumerate() {
        if b.is_empty() {
            return Err(ComplexError::EmptyBoundary(i));
        }
    }
    let discs: Vec<Disc> = boundaries.iter().map(|b| Disc { boundary: b.clone() }).collect();

    let mut occurrences: BTreeMap<Label, Vec<Occurrence>> = BTreeMap::new();
    for (d, disc) in discs.iter().enumerate() {
        for (p, &(label, sign)) in disc.boundary.iter().enumerate() {
            occurrences.entry(label).or_default().push(Occurrence { disc: d, pos: p, sign });
        }
    }
    let mut edges = Vec::with_capacity(occurrences.len());
    for (label, occ) in &occurrences {
        if occ.len() != 2 {
            return Err(ComplexError::BadMultiplicity(*label, occ.len()));
        }
        edges.push(EdgePair { label: *label, occ: [occ[0], occ[1]] });
    }

    // Vertex slots: one per boundary position of each disc; slot (d, p) is
    // the point between positions p-1 and p.
    let mut offset = Vec::with_capacity(discs.len());
    let mut total = 0;
    for disc in &discs {
        offset.push(total);
        total += disc.sides();
    }
    let slot = |d: usize, p: usize| offset[d] + p;

    // The start point of an occurrence is the tail of the edge when traversed
    // positively and the head when traversed negatively.
    let start_slot = |o: &Occurrence| slot(o.disc, o.pos);
    let end_slot = |o: &Occurrence, discs: &[Disc]| {
        slot(o.disc, (o.pos + 1) % discs[o.disc].sides())
    };
    let head_slot = |o: &Occurrence, discs: &[Disc]| match o.sign {
        Sign::Plus => end_slot(o, discs),
        Sign::Minus => start_slot(o),
    };
    let tail_slot = |o: &Occurrence, discs: &[Disc]| match o.sign {
        Sign::Plus => start_slot(o),
        Sign::Minus => end_slot(o, discs),
    };

    let mut uf = UnionFind::new(total);
    for pair in &edges {
        uf.union(head_slot(&pair.occ[0], &discs), head_slot(&pair.occ[1], &discs));
        uf.union(tail_slot(&pair.occ[0], &discs), tail_slot(&pair.occ[1], &discs));
    }
    let mut class_ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vertex_class = Vec::with_capacity(discs.len());
    for (d, disc) in discs.iter().enumerate() {
        let mut row = Vec::with_capacity(disc.sides());
        for p in 0..disc.sides() {
            let root = uf.find(slot(d, p));
            let next = class_ids.len();
            row.push(*class_ids.entry(root).or_insert(next));
        }
        vertex_class.push(row);
    }

    // Components via a spanning forest of the disc graph, labels ascending.
    let mut duf = UnionFind::new(discs.len());
    for pair in &edges {
        duf.union(pair.occ[0].disc, pair.occ[1].disc);
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for d in 0..discs.len() {
        groups.entry(duf.find(d)).or_default().push(d);
    }
    let components: Vec<Vec<usize>> = groups.into_values().collect();

    Ok(GluedComplex {
        discs,
        edges,
        vertex_class,
        vertex_count: class_ids.len(),
        components,
    })
}

/// Per-component classification plus the global component count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurfaceSummary {
    pub component_count: usize,
    pub components: Vec<ComponentSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComponentSummary {
    pub discs: Vec<usize>,
    pub chi: i64,
    pub orientable: bool,
}

impl SurfaceSummary {
    /// Σχ(Σᵢ) − 2l, the quantity compared against the reduced Euler
    /// characteristic of an equation.
    pub fn chi_sum_minus_2l(&self) -> i64 {
        let sum: i64 = self.components.iter().map(|c| c.chi).sum();
        sum - 2 * (self.component_count as i64 - 1)
    }

    pub fn all_orientable(&self) -> bool {
        self.components.iter().all(|c| c.orientable)
    }
}

/// Outcome of the orientability decision for one component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrientabilityWitness {
    /// A consistent choice of disc signs: gluing respects them all.
    Signs(BTreeMap<usize, i8>),
    /// A label whose gluing contradicts every sign assignment.
    ViolatingLabel(Label),
}

impl GluedComplex {
    pub fn discs(&self) -> &[Disc] {
        &self.discs
    }

    pub fn edges(&self) -> &[EdgePair] {
        &self.edges
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn vertex_class(&self, disc: usize, pos: usize) -> usize {
        self.vertex_class[disc][pos]
    }

    fn component_edges<'a>(&'a self, component: &'a [usize]) -> impl Iterator<Item = &'a EdgePair> {
        self.edges.iter().filter(move |e| component.contains(&e.occ[0].disc))
    }

    /// Euler characteristic by counting cells: vertex classes − edge pairs +
    /// discs, restricted to one component.
    pub fn euler_characteristic_vef(&self, component: &[usize]) -> i64 {
        let mut vertices: Vec<usize> = component
            .iter()
            .flat_map(|&d| self.vertex_class[d].iter().copied())
            .collect();
        vertices.sort_unstable();
        vertices.dedup();
        let v = vertices.len() as i64;
        let e = self.component_edges(component).count() as i64;
        let f = component.len() as i64;
        v - e + f
    }

    /// Euler characteristic through the combinatorial Gauss-Bonnet formula:
    /// 2πχ = Σ_f κ(f) + Σ_v κ(v), with each corner of an N-gon assigned the
    /// angle π(N−2)/N. All arithmetic is exact rational in units of π; the
    /// result must come out as an exact integer.
    pub fn euler_characteristic_gb(&self, component: &[usize]) -> i64 {
        // Face curvatures vanish under this angle assignment by construction;
        // computed anyway as a structural check.
        let mut total = Ratio::<i64>::zero();
        let mut angle_at_vertex: BTreeMap<usize, Ratio<i64>> = BTreeMap::new();
        let mut vertices: Vec<usize> = Vec::new();
        for &d in component {
            let n = self.discs[d].sides() as i64;
            let corner = Ratio::new(n - 2, n);
            let mut face = Ratio::<i64>::zero();
            for p in 0..self.discs[d].sides() {
                face += corner;
                let v = self.vertex_class[d][p];
                *angle_at_vertex.entry(v).or_insert_with(Ratio::zero) += corner;
                vertices.push(v);
            }
            face -= Ratio::from_integer(n - 2);
            assert!(face.is_zero(), "face curvature must vanish");
            total += face;
        }
        vertices.sort_unstable();
        vertices.dedup();
        for v in vertices {
            let angles = angle_at_vertex.get(&v).copied().unwrap_or_else(Ratio::zero);
            total += Ratio::from_integer(2) - angles;
        }
        let chi = total / Ratio::from_integer(2);
        assert!(chi.is_integer(), "Gauss-Bonnet total is not an integer multiple of 2π");
        chi.to_integer()
    }

    /// Decides orientability of one component by propagating disc signs over
    /// a spanning tree (labels ascending) and checking the remaining pairs.
    /// A pair glued on discs i, j with exponents ε, ε′ forces sᵢ·ε = −sⱼ·ε′.
    pub fn orientability(&self, component: &[usize]) -> (bool, OrientabilityWitness) {
        let mut signs: BTreeMap<usize, i8> = BTreeMap::new();
        let root = *component.first().expect("component is nonempty");
        signs.insert(root, 1);
        // Repeated sweeps in ascending label order until stable; the
        // component is small and this keeps tie-breaking deterministic.
        loop {
            let mut changed = false;
            for pair in self.component_edges(component) {
                let [o1, o2] = pair.occ;
                let (s1, s2) = (signs.get(&o1.disc).copied(), signs.get(&o2.disc).copied());
                let forced = |s: i8, from: Sign, to: Sign| -s * from.as_i8() * to.as_i8();
                match (s1, s2) {
                    (Some(s), None) => {
                        signs.insert(o2.disc, forced(s, o1.sign, o2.sign));
                        changed = true;
                    }
                    (None, Some(s)) => {
                        signs.insert(o1.disc, forced(s, o2.sign, o1.sign));
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
        for pair in self.component_edges(component) {
            let [o1, o2] = pair.occ;
            let s1 = signs[&o1.disc];
            let s2 = signs[&o2.disc];
            if s1 * o1.sign.as_i8() != -(s2 * o2.sign.as_i8()) {
                return (false, OrientabilityWitness::ViolatingLabel(pair.label));
            }
        }
        (true, OrientabilityWitness::Signs(signs))
    }

    /// True iff the all-(+1) sign assignment is consistent, i.e. every label
    /// occurs once with each exponent: the discs as written (boundaries read
    /// clockwise) are coherently oriented.
    pub fn coherent_clockwise(&self) -> bool {
        self.edges.iter().all(|pair| pair.occ[0].sign != pair.occ[1].sign)
    }

    /// Classifies every component.
    pub fn summarize(&self) -> SurfaceSummary {
        let components = self
            .components
            .iter()
            .map(|comp| ComponentSummary {
                discs: comp.clone(),
                chi: self.euler_characteristic_gb(comp),
                orientable: self.orientability(comp).0,
            })
            .collect();
        SurfaceSummary { component_count: self.components.len(), components }
    }

    /// Degree of a vertex class: the number of edge ends identified there,
    /// which equals the number of boundary corners in the class.
    fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.vertex_count];
        for row in &self.vertex_class {
            for &v in row {
                deg[v] += 1;
            }
        }
        deg
    }

    /// JSON debug dump of the complex and its classification.
    pub fn debug_dump(&self, names: impl Fn(Label) -> String) -> serde_json::Value {
        let summary = self.summarize();
        serde_json::json!({
            "discs": self
                .discs
                .iter()
                .map(|d| d
                    .boundary
                    .iter()
                    .map(|&(l, s)| match s {
                        Sign::Plus => names(l),
                        Sign::Minus => format!("{}^-1", names(l)),
                    })
                    .collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "components": summary.components.iter().map(|c| c.discs.clone()).collect::<Vec<_>>(),
            "chi": summary.components.iter().map(|c| c.chi).collect::<Vec<_>>(),
            "orientable": summary.components.iter().map(|c| c.orientable).collect::<Vec<_>>(),
        })
    }
}

/// One edge merge performed by [`consolidate`]: the two halves, with the
/// signs they were traversed with, concatenate to the new edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeMerge {
    pub new_label: Label,
    pub first: (Label, Sign),
    pub second: (Label, Sign),
}

/// Repeatedly merges the two distinct edges meeting at any vertex class of
/// degree two into a single edge. Preserves Euler characteristic,
/// orientability and components. The merge log lets callers concatenate any
/// payload attached to edge labels.
pub fn consolidate(boundaries: &[Vec<(Label, Sign)>]) -> (GluedComplex, Vec<EdgeMerge>) {
    let mut boundaries: Vec<Vec<(Label, Sign)>> = boundaries.to_vec();
    let mut next_label: Label =
        boundaries.iter().flatten().map(|&(l, _)| l).max().map_or(0, |m| m + 1);
    let mut merges = Vec::new();

    loop {
        let complex = build_complex(&boundaries).expect("consolidation preserves validity");
        let degrees = complex.vertex_degrees();
        let Some(target) = find_mergeable_vertex(&complex, &degrees) else {
            return (complex, merges);
        };
        let (first_corner, second_corner) = target;
        let merge = apply_merge(&mut boundaries, first_corner, second_corner, next_label);
        merges.push(merge);
        next_label += 1;
    }
}

/// A corner is addressed by (disc, vertex position); the incident edge
/// occurrences are at positions pos-1 and pos.
type Corner = (usize, usize);

fn find_mergeable_vertex(complex: &GluedComplex, degrees: &[usize]) -> Option<(Corner, Corner)> {
    for v in 0..degrees.len() {
        if degrees[v] != 2 {
            continue;
        }
        let mut corners: Vec<Corner> = Vec::new();
        for (d, row) in complex.vertex_class.iter().enumerate() {
            for (p, &class) in row.iter().enumerate() {
                if class == v {
                    corners.push((d, p));
                }
            }
        }
        debug_assert_eq!(corners.len(), 2);
        let (d1, p1) = corners[0];
        let (d2, p2) = corners[1];
        let n1 = complex.discs[d1].sides();
        let n2 = complex.discs[d2].sides();
        let in1 = (p1 + n1 - 1) % n1;
        let in2 = (p2 + n2 - 1) % n2;
        let (e1, _) = complex.discs[d1].boundary[in1];
        let (f1, _) = complex.discs[d1].boundary[p1];
        // Both ends at the vertex must belong to two distinct edges, and the
        // four involved occurrence slots must be distinct.
        if e1 == f1 {
            continue;
        }
        let slots = [(d1, in1), (d1, p1), (d2, in2), (d2, p2)];
        let mut unique = slots.to_vec();
        unique.sort_unstable();
        unique.dedup();
        if unique.len() != 4 {
            continue;
        }
        return Some(((d1, p1), (d2, p2)));
    }
    None
}

fn apply_merge(
    boundaries: &mut [Vec<(Label, Sign)>],
    first: Corner,
    second: Corner,
    new_label: Label,
) -> EdgeMerge {
    let (d1, p1) = first;
    let (d2, p2) = second;
    let n1 = boundaries[d1].len();
    let in1 = (p1 + n1 - 1) % n1;
    let (e, es) = boundaries[d1][in1];
    let (f, fs) = boundaries[d1][p1];

    let n2 = boundaries[d2].len();
    let in2 = (p2 + n2 - 1) % n2;
    let (x, xs) = boundaries[d2][in2];
    let (y, ys) = boundaries[d2][p2];

    // The second traversal reads either the same path e^es f^fs or its
    // inverse f^-fs e^-es.
    let second_sign = if (x, xs, y, ys) == (e, es, f, fs) {
        Sign::Plus
    } else {
        debug_assert_eq!(
            (x, xs, y, ys),
            (f, fs.flip(), e, es.flip()),
            "degree-2 vertex with inconsistent traversals"
        );
        Sign::Minus
    };

    // Replace each two-occurrence run by the fresh label: drop the outgoing
    // slot, write the new label at the incoming slot. Both corners may sit
    // on the same disc, so rewrite each disc in a single pass.
    let mut replacements: Vec<(usize, Vec<(usize, usize, (Label, Sign))>)> = vec![(
        d1,
        vec![(in1, p1, (new_label, Sign::Plus))],
    )];
    if d2 == d1 {
        replacements[0].1.push((in2, p2, (new_label, second_sign)));
    } else {
        replacements.push((d2, vec![(in2, p2, (new_label, second_sign))]));
    }
    for (disc, spots) in replacements {
        let old = &boundaries[disc];
        let mut fresh = Vec::with_capacity(old.len() - spots.len());
        for (i, &entry) in old.iter().enumerate() {
            if spots.iter().any(|&(_, out, _)| out == i) {
                continue;
            }
            match spots.iter().find(|&&(input, _, _)| input == i) {
                Some(&(_, _, label)) => fresh.push(label),
                None => fresh.push(entry),
            }
        }
        boundaries[disc] = fresh;
    }

    EdgeMerge { new_label, first: (e, es), second: (f, fs) }
}

/// Test oracle for orientability: glue only the spanning-tree pairs of a
/// component, read the boundary word of the resulting tree of discs, and
/// call the component orientable iff every label appearing in that word
/// appears with both exponents.
pub fn tree_boundary_orientability(complex: &GluedComplex, component: &[usize]) -> bool {
    // Boundary words of partially glued pieces, one per merged group.
    let mut piece_of: BTreeMap<usize, usize> = BTreeMap::new();
    let mut pieces: Vec<Option<Vec<(Label, Sign)>>> = Vec::new();
    for &d in component {
        piece_of.insert(d, pieces.len());
        pieces.push(Some(complex.discs[d].boundary.clone()));
    }

    // Tree edges in ascending label order: merge the two pieces (or skip if
    // already merged — non-tree edge).
    for pair in complex.component_edges(component) {
        let [o1, o2] = pair.occ;
        let (g1, g2) = (piece_of[&o1.disc], piece_of[&o2.disc]);
        if g1 == g2 {
            continue;
        }
        let w1 = pieces[g1].take().expect("piece present");
        let w2 = pieces[g2].take().expect("piece present");
        let merged = splice(&w1, &w2, pair.label);
        let target = g1.min(g2);
        pieces[target] = Some(merged);
        for v in piece_of.values_mut() {
            if *v == g1.max(g2) {
                *v = target;
            }
        }
    }

    let remaining: Vec<Vec<(Label, Sign)>> = pieces.into_iter().flatten().collect();
    debug_assert_eq!(remaining.len(), 1, "tree gluing leaves one piece per component");
    let word = &remaining[0];
    word.iter().all(|&(l, s)| word.contains(&(l, s.flip())))
}

/// Splices two boundary words along one occurrence of `label` in each: the
/// occurrence in the first word is replaced by the second word rotated to
/// start right after its own occurrence (inverted first when the exponents
/// match, which mirrors flipping the glued disc over).
fn splice(w1: &[(Label, Sign)], w2: &[(Label, Sign)], label: Label) -> Vec<(Label, Sign)> {
    let i1 = w1.iter().position(|&(l, _)| l == label).expect("label in first word");
    let (_, s1) = w1[i1];
    let flip_needed = {
        let (_, s2) = w2[w2.iter().position(|&(l, _)| l == label).expect("label in second word")];
        s1 == s2
    };
    let w2: Vec<(Label, Sign)> = if flip_needed {
        w2.iter().rev().map(|&(l, s)| (l, s.flip())).collect()
    } else {
        w2.to_vec()
    };
    let i2 = w2.iter().position(|&(l, _)| l == label).expect("label in second word");
    let mut out = Vec::with_capacity(w1.len() + w2.len() - 2);
    out.extend_from_slice(&w1[..i1]);
    out.extend_from_slice(&w2[i2 + 1..]);
    out.extend_from_slice(&w2[..i2]);
    out.extend_from_slice(&w1[i1 + 1..]);
    out
}

impl fmt::Display for GluedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.debug_dump(|l| format!("e{l}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn boundary(spec: &[(u32, i8)]) -> Vec<(Label, Sign)> {
        spec.iter()
            .map(|&(l, s)| (l, if s > 0 { Sign::Plus } else { Sign::Minus }))
            .collect()
    }

    /// C₁ = p, C₂ = p⁻¹: the two-monogon sphere.
    fn sphere() -> GluedComplex {
        build_complex(&[boundary(&[(0, 1)]), boundary(&[(0, -1)])]).unwrap()
    }

    /// C₁ = p q p⁻¹ q⁻¹: the torus square.
    fn torus() -> GluedComplex {
        build_complex(&[boundary(&[(0, 1), (1, 1), (0, -1), (1, -1)])]).unwrap()
    }

    /// C₁ = p p: the projective plane.
    fn projective_plane() -> GluedComplex {
        build_complex(&[boundary(&[(0, 1), (0, 1)])]).unwrap()
    }

    /// C₁ = p q p q⁻¹: the Klein bottle.
    fn klein_bottle() -> GluedComplex {
        build_complex(&[boundary(&[(0, 1), (1, 1), (0, 1), (1, -1)])]).unwrap()
    }

    #[test]
    fn build_complex_examples() {
        let s = sphere();
        assert_eq!(s.components().len(), 1);
        assert_eq!(s.discs().len(), 2);
        assert_eq!(s.edges().len(), 1);
        assert_eq!(s.vertex_count(), 1);

        let t = torus();
        assert_eq!(t.components().len(), 1);
        assert_eq!(t.edges().len(), 2);
        assert_eq!(t.vertex_count(), 1);

        let p = projective_plane();
        assert_eq!(p.components().len(), 1);
        assert_eq!(p.edges().len(), 1);
        assert_eq!(p.vertex_count(), 1);
    }

    #[test]
    fn build_complex_rejects_bad_multiplicity() {
        let err = build_complex(&[boundary(&[(0, 1)])]).unwrap_err();
        assert_eq!(err, ComplexError::BadMultiplicity(0, 1));
        let err =
            build_complex(&[boundary(&[(0, 1), (0, 1), (0, -1)])]).unwrap_err();
        assert_eq!(err, ComplexError::BadMultiplicity(0, 3));
    }

    #[test]
    fn euler_characteristic_canonical_surfaces() {
        for (complex, chi) in [(sphere(), 2), (torus(), 0), (projective_plane(), 1)] {
            let comp = complex.components()[0].clone();
            assert_eq!(complex.euler_characteristic_gb(&comp), chi);
            assert_eq!(complex.euler_characteristic_vef(&comp), chi);
        }
    }

    #[test]
    fn orientability_canonical_surfaces() {
        let t = torus();
        assert!(t.orientability(&t.components()[0]).0);

        let p = projective_plane();
        let (orientable, witness) = p.orientability(&p.components()[0]);
        assert!(!orientable);
        assert_eq!(witness, OrientabilityWitness::ViolatingLabel(0));

        let k = klein_bottle();
        let comp = k.components()[0].clone();
        assert!(!k.orientability(&comp).0);
        assert_eq!(k.euler_characteristic_gb(&comp), 0);
    }

    #[test]
    fn coherence_examples() {
        assert!(sphere().coherent_clockwise());
        assert!(!projective_plane().coherent_clockwise());
        assert!(torus().coherent_clockwise());
    }

    #[test]
    fn consolidate_merges_bigon_chain() {
        // C₁ = p q, C₂ = q⁻¹ p⁻¹: both seam vertices have degree 2; the
        // result is the single-edge sphere.
        let before = [boundary(&[(0, 1), (1, 1)]), boundary(&[(1, -1), (0, -1)])];
        let (after, merges) = consolidate(&before);
        assert_eq!(after.edges().len(), 1);
        assert_eq!(after.discs()[0].boundary.len(), 1);
        assert_eq!(merges.len(), 1);
        let comp = after.components()[0].clone();
        assert_eq!(after.euler_characteristic_gb(&comp), 2);
    }

    #[test]
    fn consolidate_keeps_torus() {
        let before = [boundary(&[(0, 1), (1, 1), (0, -1), (1, -1)])];
        let (after, merges) = consolidate(&before);
        assert!(merges.is_empty());
        assert_eq!(after.edges().len(), 2);
    }

    #[test]
    fn tree_boundary_oracle_on_canonical_surfaces() {
        for (complex, expect) in [
            (sphere(), true),
            (torus(), true),
            (projective_plane(), false),
            (klein_bottle(), false),
        ] {
            let comp = complex.components()[0].clone();
            assert_eq!(tree_boundary_orientability(&complex, &comp), expect);
        }
    }

    pub(crate) fn random_boundaries(rng: &mut StdRng) -> Vec<Vec<(Label, Sign)>> {
        // Random valid complex: ≤ 6 discs, boundary length ≤ 8, every label
        // twice.
        loop {
            let discs = rng.gen_range(1..=6);
            let mut lengths: Vec<usize> = (0..discs).map(|_| rng.gen_range(1..=8)).collect();
            if lengths.iter().sum::<usize>() % 2 == 1 {
                lengths[0] += 1;
                if lengths[0] > 8 {
                    continue;
                }
            }
            let total: usize = lengths.iter().sum();
            let mut slots: Vec<(usize, usize)> = Vec::new();
            for (d, &len) in lengths.iter().enumerate() {
                for p in 0..len {
                    slots.push((d, p));
                }
            }
            // Random pairing of slots.
            for i in (1..slots.len()).rev() {
                let j = rng.gen_range(0..=i);
                slots.swap(i, j);
            }
            let mut boundaries: Vec<Vec<(Label, Sign)>> =
                lengths.iter().map(|&len| vec![(0, Sign::Plus); len]).collect();
            for (label, pair) in slots.chunks(2).enumerate() {
                for &(d, p) in pair {
                    let sign = if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus };
                    boundaries[d][p] = (label as Label, sign);
                }
            }
            debug_assert_eq!(total % 2, 0);
            return boundaries;
        }
    }

    #[test]
    fn gauss_bonnet_agrees_with_cell_count_on_random_complexes() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..400 {
            let boundaries = random_boundaries(&mut rng);
            let complex = build_complex(&boundaries).unwrap();
            for comp in complex.components() {
                assert_eq!(
                    complex.euler_characteristic_gb(comp),
                    complex.euler_characteristic_vef(comp),
                    "boundaries: {boundaries:?}"
                );
            }
        }
    }

    #[test]
    fn orientability_invariants_on_random_complexes() {
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..400 {
            let boundaries = random_boundaries(&mut rng);
            let complex = build_complex(&boundaries).unwrap();
            let coherent = complex.coherent_clockwise();
            for comp in complex.components() {
                let chi = complex.euler_characteristic_gb(comp);
                let (orientable, _) = complex.orientability(comp);
                assert!(chi <= 2);
                if orientable {
                    assert_eq!(chi % 2, 0);
                }
                if chi == 2 {
                    assert!(orientable);
                }
                if coherent {
                    assert!(orientable);
                }
                // The tree-of-discs boundary-word criterion agrees.
                assert_eq!(tree_boundary_orientability(&complex, comp), orientable);
            }
        }
    }

    #[test]
    fn consolidate_preserves_classification_on_random_complexes() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..300 {
            let boundaries = random_boundaries(&mut rng);
            let complex = build_complex(&boundaries).unwrap();
            let (merged, _) = consolidate(&boundaries);
            assert_eq!(complex.components().len(), merged.components().len());
            let before = complex.summarize();
            let after = merged.summarize();
            for (b, a) in before.components.iter().zip(after.components.iter()) {
                assert_eq!(b.chi, a.chi);
                assert_eq!(b.orientable, a.orientable);
            }
        }
    }

    #[test]
    fn consolidated_edge_count_meets_bound_when_degrees_allow() {
        let mut rng = StdRng::seed_from_u64(10);
        for _ in 0..300 {
            let boundaries = random_boundaries(&mut rng);
            let (merged, _) = consolidate(&boundaries);
            let degrees = merged.vertex_degrees();
            for comp in merged.components() {
                let mut vertices: Vec<usize> = comp
                    .iter()
                    .flat_map(|&d| merged.vertex_class[d].iter().copied())
                    .collect();
                vertices.sort_unstable();
                vertices.dedup();
                if vertices.iter().all(|&v| degrees[v] >= 3) {
                    let e = merged.component_edges(comp).count() as i64;
                    let f = comp.len() as i64;
                    let chi = merged.euler_characteristic_vef(comp);
                    assert!(e <= 3 * (f - chi), "E={e} F={f} chi={chi}");
                }
            }
        }
    }

    #[test]
    fn random_mutual_inverse_discs_glue_to_spheres() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let len = rng.gen_range(1..=8);
            let word: Vec<(Label, Sign)> = (0..len)
                .map(|l| (l as Label, if rng.gen_bool(0.5) { Sign::Plus } else { Sign::Minus }))
                .collect();
            let inverse: Vec<(Label, Sign)> =
                word.iter().rev().map(|&(l, s)| (l, s.flip())).collect();
            let complex = build_complex(&[word, inverse]).unwrap();
            assert_eq!(complex.components().len(), 1);
            let comp = complex.components()[0].clone();
            assert_eq!(complex.euler_characteristic_gb(&comp), 2);
            assert!(complex.orientability(&comp).0);
        }
    }
}
