//! Letter-labeled disc tilings: ribbons, a-patterns and peeling.
//!
//! A tiled disc is a planar complex of coherently oriented faces, each an
//! [a,bⁿ]-disc whose clockwise boundary reads a⁻¹ b⁻ⁿ a bⁿ. Interior edges
//! glue one positive to one negative occurrence of the same letter; the
//! unglued occurrences form the boundary circle. A ribbon is a single row
//! glued along a-edges; a disc with boundary [a^N,b^B] decomposes into N
//! stacked width-B ribbons, recovered here by tracing a-tracks from the
//! top-left corner.

use thiserror::Error;

use crate::words::{Letter, Sign};

/// One [a,bⁿ]-face. Boundary positions run clockwise: position 0 is the
/// left edge a⁻¹, positions 1..=n the top b⁻ⁿ, position n+1 the right edge
/// a, positions n+2..=2n+1 the bottom bⁿ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Face {
    pub param: u64,
    /// Which instance item this face carries, 1-based.
    pub item: Option<usize>,
}

impl Face {
    pub fn sides(&self) -> usize {
        2 * self.param as usize + 2
    }

    pub fn letter_at(&self, pos: usize) -> Letter {
        let n = self.param as usize;
        match pos {
            0 => Letter::new(b'a', Sign::Minus),
            p if p <= n => Letter::new(b'b', Sign::Minus),
            p if p == n + 1 => Letter::new(b'a', Sign::Plus),
            _ => Letter::new(b'b', Sign::Plus),
        }
    }

    /// Position of the left (0) and right (n+1) a-edges.
    pub fn a_positions(&self) -> [usize; 2] {
        [0, self.param as usize + 1]
    }
}

/// Occurrence address: (face index, boundary position).
pub type Occ = (usize, usize);

#[derive(Clone, Debug)]
pub struct TiledDisc {
    faces: Vec<Face>,
    /// pairing[f][p] = partner occurrence, or None on the boundary.
    pairing: Vec<Vec<Option<Occ>>>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TilingError {
    #[error("ribbon parameters must be nonempty and positive")]
    BadRibbonParams,
    #[error("stacked ribbons must share one width")]
    WidthMismatch,
    #[error("gluing does not respect letters and directions at {0:?}")]
    BadGluing(Occ),
    #[error("boundary is not a single circle")]
    BoundaryNotACircle,
    #[error("boundary does not read a commutator of letter powers")]
    BoundaryNotARectangle,
    #[error("an a-track escapes the disc or revisits a face")]
    BrokenTrack,
    #[error("a peeled row is not a width-matching ribbon")]
    RowMismatch,
    #[error("faces remain after the last row was peeled")]
    LeftoverFaces,
}

/// One row of the decomposition: face parameters left to right with their
/// item tags.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ribbon {
    pub params: Vec<u64>,
    pub items: Vec<Option<usize>>,
}

impl Ribbon {
    pub fn width(&self) -> u64 {
        self.params.iter().sum()
    }

    /// Realizes the ribbon as a tiled disc (single row).
    pub fn tiled_disc(&self) -> TiledDisc {
        TiledDisc::ribbon_disc(&self.params, &self.items).expect("ribbon params validated")
    }
}

/// Builds the row of [a,b^{n₁}]..[a,b^{nₛ}]-faces glued along their
/// a-edges; its boundary reads [a, b^{Σnⱼ}].
pub fn build_ribbon(params: &[u64]) -> Result<Ribbon, TilingError> {
    if params.is_empty() || params.iter().any(|&p| p == 0) {
        return Err(TilingError::BadRibbonParams);
    }
    Ok(Ribbon { params: params.to_vec(), items: vec![None; params.len()] })
}

impl TiledDisc {
    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn pairing(&self, occ: Occ) -> Option<Occ> {
        self.pairing[occ.0][occ.1]
    }

    /// Assembles a tiled disc from faces and a symmetric pairing, checking
    /// that every gluing joins mutually inverse letters.
    pub fn from_parts(
        faces: Vec<Face>,
        pairing: Vec<Vec<Option<Occ>>>,
    ) -> Result<TiledDisc, TilingError> {
        let disc = TiledDisc { faces, pairing };
        for (f, row) in disc.pairing.iter().enumerate() {
            if row.len() != disc.faces[f].sides() {
                return Err(TilingError::BadGluing((f, 0)));
            }
            for (p, partner) in row.iter().enumerate() {
                let Some((g, q)) = partner else { continue };
                let symmetric = disc.pairing.get(*g).and_then(|r| r.get(*q)).copied().flatten();
                if symmetric != Some((f, p))
                    || disc.faces[f].letter_at(p) != disc.faces[*g].letter_at(*q).inverse()
                {
                    return Err(TilingError::BadGluing((f, p)));
                }
            }
        }
        Ok(disc)
    }

    fn ribbon_disc(params: &[u64], items: &[Option<usize>]) -> Result<TiledDisc, TilingError> {
        if params.is_empty() || params.iter().any(|&p| p == 0) {
            return Err(TilingError::BadRibbonParams);
        }
        let faces: Vec<Face> = params
            .iter()
            .zip(items)
            .map(|(&param, &item)| Face { param, item })
            .collect();
        let mut disc = TiledDisc {
            pairing: faces.iter().map(|f| vec![None; f.sides()]).collect(),
            faces,
        };
        for j in 0..disc.faces.len().saturating_sub(1) {
            let right = disc.faces[j].a_positions()[1];
            disc.glue((j, right), (j + 1, 0))?;
        }
        Ok(disc)
    }

    fn glue(&mut self, x: Occ, y: Occ) -> Result<(), TilingError> {
        let lx = self.faces[x.0].letter_at(x.1);
        let ly = self.faces[y.0].letter_at(y.1);
        if lx != ly.inverse() || self.pairing[x.0][x.1].is_some() || self.pairing[y.0][y.1].is_some()
        {
            return Err(TilingError::BadGluing(x));
        }
        self.pairing[x.0][x.1] = Some(y);
        self.pairing[y.0][y.1] = Some(x);
        Ok(())
    }

    /// Boundary occurrences in clockwise order, starting from an arbitrary
    /// unglued occurrence. Fails unless the boundary is one circle.
    pub fn boundary_cycle(&self) -> Result<Vec<Occ>, TilingError> {
        let total_unglued: usize = self
            .pairing
            .iter()
            .map(|row| row.iter().filter(|p| p.is_none()).count())
            .sum();
        let start = self
            .pairing
            .iter()
            .enumerate()
            .find_map(|(f, row)| row.iter().position(|p| p.is_none()).map(|p| (f, p)))
            .ok_or(TilingError::BoundaryNotACircle)?;
        let mut cycle = Vec::with_capacity(total_unglued);
        let mut current = start;
        loop {
            cycle.push(current);
            // Walk clockwise: step to the next position on this face, then
            // rotate through glued corners until an unglued edge shows up.
            let (mut f, mut p) = current;
            p = (p + 1) % self.faces[f].sides();
            while let Some((g, q)) = self.pairing[f][p] {
                f = g;
                p = (q + 1) % self.faces[f].sides();
                if cycle.len() > 4 * total_unglued + 4 {
                    return Err(TilingError::BoundaryNotACircle);
                }
            }
            current = (f, p);
            if current == start {
                break;
            }
            if cycle.len() > total_unglued {
                return Err(TilingError::BoundaryNotACircle);
            }
        }
        if cycle.len() != total_unglued {
            return Err(TilingError::BoundaryNotACircle);
        }
        Ok(cycle)
    }

    pub fn boundary_letters(&self) -> Result<Vec<Letter>, TilingError> {
        Ok(self
            .boundary_cycle()?
            .iter()
            .map(|&(f, p)| self.faces[f].letter_at(p))
            .collect())
    }
}

/// Stacks rows top to bottom: the bottom of each row is glued to the top of
/// the row below, column by column.
pub fn stack_ribbons(rows: &[Ribbon]) -> Result<TiledDisc, TilingError> {
    if rows.is_empty() {
        return Err(TilingError::BadRibbonParams);
    }
    let width = rows[0].width();
    if rows.iter().any(|r| r.width() != width) {
        return Err(TilingError::WidthMismatch);
    }

    let mut faces: Vec<Face> = Vec::new();
    let mut row_offsets = Vec::new();
    for row in rows {
        row_offsets.push(faces.len());
        for (j, &param) in row.params.iter().enumerate() {
            faces.push(Face { param, item: row.items[j] });
        }
    }
    let mut disc = TiledDisc {
        pairing: faces.iter().map(|f| vec![None; f.sides()]).collect(),
        faces,
    };

    // Horizontal gluings within each row.
    for (r, row) in rows.iter().enumerate() {
        for j in 0..row.params.len() - 1 {
            let f = row_offsets[r] + j;
            let right = disc.faces[f].a_positions()[1];
            disc.glue((f, right), (f + 1, 0))?;
        }
    }

    // Vertical gluings: bottom edge of row r at column c meets the top edge
    // of row r+1 at column c.
    let locate_top = |r: usize, c: u64, rows: &[Ribbon]| -> Occ {
        let mut offset = 0u64;
        for (j, &param) in rows[r].params.iter().enumerate() {
            if c < offset + param {
                let within = (c - offset) as usize;
                return (row_offsets[r] + j, 1 + within);
            }
            offset += param;
        }
        unreachable!("column within width");
    };
    let locate_bottom = |r: usize, c: u64, rows: &[Ribbon]| -> Occ {
        let mut offset = 0u64;
        for (j, &param) in rows[r].params.iter().enumerate() {
            if c < offset + param {
                let within = (c - offset) as usize;
                let n = param as usize;
                // Bottom positions run right to left.
                return (row_offsets[r] + j, n + 2 + (n - 1 - within));
            }
            offset += param;
        }
        unreachable!("column within width");
    };
    for r in 0..rows.len() - 1 {
        for c in 0..width {
            let bottom = locate_bottom(r, c, rows);
            let top = locate_top(r + 1, c, rows);
            disc.glue(bottom, top)?;
        }
    }
    Ok(disc)
}

/// The a-pattern: one vertex in the middle of each a-labeled edge, one edge
/// through each face joining its two a-edge midpoints. Connected components
/// are the a-tracks.
#[derive(Clone, Debug, Default)]
pub struct TrackGraph {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
}

pub fn a_pattern(disc: &TiledDisc) -> TrackGraph {
    // Abstract a-edges: one per glued pair, one per boundary occurrence.
    let mut vertex_of: std::collections::BTreeMap<Occ, usize> = std::collections::BTreeMap::new();
    let mut vertex_count = 0;
    for (f, face) in disc.faces().iter().enumerate() {
        for p in face.a_positions() {
            let canonical = match disc.pairing((f, p)) {
                Some(partner) => std::cmp::min((f, p), partner),
                None => (f, p),
            };
            if let std::collections::btree_map::Entry::Vacant(e) = vertex_of.entry(canonical) {
                e.insert(vertex_count);
                vertex_count += 1;
            }
        }
    }
    let vertex = |occ: Occ| {
        let canonical = match disc.pairing(occ) {
            Some(partner) => std::cmp::min(occ, partner),
            None => occ,
        };
        vertex_of[&canonical]
    };
    let edges = disc
        .faces()
        .iter()
        .enumerate()
        .map(|(f, face)| {
            let [l, r] = face.a_positions();
            (vertex((f, l)), vertex((f, r)))
        })
        .collect();
    TrackGraph { vertex_count, edges }
}

/// Connected components of a track graph, each reported as (vertices,
/// edge count).
fn components(graph: &TrackGraph) -> Vec<(Vec<usize>, usize)> {
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); graph.vertex_count];
    for (i, &(u, v)) in graph.edges.iter().enumerate() {
        adjacency[u].push(i);
        if u != v {
            adjacency[v].push(i);
        }
    }
    let mut seen = vec![false; graph.vertex_count];
    let mut out = Vec::new();
    for start in 0..graph.vertex_count {
        if seen[start] {
            continue;
        }
        let mut stack = vec![start];
        seen[start] = true;
        let mut vertices = Vec::new();
        let mut edge_set = std::collections::BTreeSet::new();
        while let Some(v) = stack.pop() {
            vertices.push(v);
            for &e in &adjacency[v] {
                edge_set.insert(e);
                let (x, y) = graph.edges[e];
                for next in [x, y] {
                    if !seen[next] {
                        seen[next] = true;
                        stack.push(next);
                    }
                }
            }
        }
        out.push((vertices, edge_set.len()));
    }
    out
}

/// All circular tracks of the graph. Valid finite tilings have none; a
/// nonempty answer flags corrupted input.
pub fn find_circular_tracks(graph: &TrackGraph) -> Vec<Vec<usize>> {
    components(graph)
        .into_iter()
        .filter(|(vertices, edge_count)| *edge_count >= vertices.len())
        .map(|(vertices, _)| vertices)
        .collect()
}

/// Decomposes a tiled disc with boundary [a^N, b^B] into its N rows, top to
/// bottom, by repeatedly tracing the a-track that starts at the top-left
/// a-edge and removing the ribbon it crosses.
pub fn peel_decomposition(disc: &TiledDisc) -> Result<Vec<Ribbon>, TilingError> {
    let mut current = disc.clone();
    let mut rows = Vec::new();
    loop {
        let cycle = current.boundary_cycle()?;
        let letters: Vec<Letter> = cycle.iter().map(|&(f, p)| current.faces[f].letter_at(p)).collect();
        let (n, b, start) = rectangle_shape(&letters).ok_or(TilingError::BoundaryNotARectangle)?;

        // The boundary reads a⁻ᴺ b⁻ᴮ aᴺ bᴮ from `start`; the top-left
        // a-edge is the last of the a⁻¹ run.
        let top_left = cycle[(start + n - 1) % cycle.len()];
        let top_right = cycle[(start + n + b) % cycle.len()];

        // Trace the a-track through the faces.
        let mut row_faces: Vec<usize> = Vec::new();
        let mut edge = top_left;
        loop {
            let f = edge.0;
            if row_faces.contains(&f) {
                return Err(TilingError::BrokenTrack);
            }
            row_faces.push(f);
            let [l, r] = current.faces[f].a_positions();
            let other = if edge.1 == l { (f, r) } else { (f, l) };
            match current.pairing(other) {
                Some(next) => edge = next,
                None => {
                    if other != top_right {
                        return Err(TilingError::BrokenTrack);
                    }
                    break;
                }
            }
        }
        let params: Vec<u64> = row_faces.iter().map(|&f| current.faces[f].param).collect();
        if params.iter().sum::<u64>() != b as u64 {
            return Err(TilingError::RowMismatch);
        }
        let items: Vec<Option<usize>> = row_faces.iter().map(|&f| current.faces[f].item).collect();
        rows.push(Ribbon { params, items });

        if n == 1 {
            if row_faces.len() != current.faces.len() {
                return Err(TilingError::LeftoverFaces);
            }
            return Ok(rows);
        }
        current = remove_faces(&current, &row_faces);
    }
}

/// Checks that the cyclic letter sequence reads a⁻ᴺ b⁻ᴮ aᴺ bᴮ and returns
/// (N, B, start index of the a⁻ᴺ run).
fn rectangle_shape(letters: &[Letter]) -> Option<(usize, usize, usize)> {
    let len = letters.len();
    let a_minus = Letter::new(b'a', Sign::Minus);
    let neg_a: usize = letters.iter().filter(|&&l| l == a_minus).count();
    let n = neg_a;
    if n == 0 || len < 2 * n + 2 {
        return None;
    }
    let b = len / 2 - n;
    if b == 0 {
        return None;
    }
    for start in 0..len {
        // Runs: N × a⁻¹, B × b⁻¹, N × a, B × b.
        let expect = |offset: usize, count: usize, letter: Letter| -> bool {
            (0..count).all(|i| letters[(start + offset + i) % len] == letter)
        };
        if expect(0, n, a_minus)
            && expect(n, b, Letter::new(b'b', Sign::Minus))
            && expect(n + b, n, Letter::new(b'a', Sign::Plus))
            && expect(n + b + n, b, Letter::new(b'b', Sign::Plus))
        {
            return Some((n, b, start));
        }
    }
    None
}

fn remove_faces(disc: &TiledDisc, removed: &[usize]) -> TiledDisc {
    let mut remap = vec![usize::MAX; disc.faces.len()];
    let mut faces = Vec::new();
    for (f, face) in disc.faces.iter().enumerate() {
        if !removed.contains(&f) {
            remap[f] = faces.len();
            faces.push(face.clone());
        }
    }
    let mut pairing: Vec<Vec<Option<Occ>>> = faces.iter().map(|f| vec![None; f.sides()]).collect();
    for (f, row) in disc.pairing.iter().enumerate() {
        if remap[f] == usize::MAX {
            continue;
        }
        for (p, partner) in row.iter().enumerate() {
            if let Some((g, q)) = partner {
                if remap[*g] != usize::MAX {
                    pairing[remap[f]][p] = Some((remap[*g], *q));
                }
            }
        }
    }
    TiledDisc { faces, pairing }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letters_to_string(letters: &[Letter]) -> String {
        letters.iter().map(|l| l.to_char()).collect()
    }

    fn cyclic_eq(a: &str, b: &str) -> bool {
        a.len() == b.len() && [a, a].concat().contains(b)
    }

    #[test]
    fn single_disc_is_a_ribbon() {
        let r = build_ribbon(&[3]).unwrap();
        let boundary = letters_to_string(&r.tiled_disc().boundary_letters().unwrap());
        assert!(cyclic_eq(&boundary, "ABBBabbb"), "{boundary}");
    }

    #[test]
    fn ribbon_boundary_reads_total_width() {
        for params in [vec![1, 2], vec![1, 1, 1], vec![2, 3, 1]] {
            let r = build_ribbon(&params).unwrap();
            let total: u64 = params.iter().sum();
            let expected = {
                let w = crate::reduction::commutator_word(b'a', 1, b'b', total);
                w.to_string()
            };
            let boundary = letters_to_string(&r.tiled_disc().boundary_letters().unwrap());
            assert!(cyclic_eq(&boundary, &expected), "{boundary} vs {expected}");
        }
    }

    #[test]
    fn build_ribbon_rejects_bad_params() {
        assert_eq!(build_ribbon(&[]).unwrap_err(), TilingError::BadRibbonParams);
        assert_eq!(build_ribbon(&[1, 0]).unwrap_err(), TilingError::BadRibbonParams);
    }

    #[test]
    fn stack_boundary_is_a_rectangle() {
        let rows = vec![build_ribbon(&[1, 2]).unwrap(), build_ribbon(&[3]).unwrap()];
        let disc = stack_ribbons(&rows).unwrap();
        let boundary = letters_to_string(&disc.boundary_letters().unwrap());
        assert!(cyclic_eq(&boundary, "AABBBaabbb"), "{boundary}");
        // Corollary check: the boundary contains the letter a.
        assert!(boundary.to_ascii_lowercase().contains('a'));
    }

    #[test]
    fn a_pattern_counts_tracks_per_row() {
        let single = build_ribbon(&[3]).unwrap().tiled_disc();
        let graph = a_pattern(&single);
        assert_eq!(graph.vertex_count, 2);
        assert_eq!(graph.edges.len(), 1);
        assert!(find_circular_tracks(&graph).is_empty());

        let rows = vec![build_ribbon(&[1, 2]).unwrap(), build_ribbon(&[3]).unwrap()];
        let disc = stack_ribbons(&rows).unwrap();
        let graph = a_pattern(&disc);
        let track_count = components(&graph).len();
        assert_eq!(track_count, 2);
        assert!(find_circular_tracks(&graph).is_empty());
    }

    #[test]
    fn synthetic_cycle_is_detected() {
        let graph = TrackGraph { vertex_count: 3, edges: vec![(0, 1), (1, 2), (2, 0)] };
        let cycles = find_circular_tracks(&graph);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].len(), 3);
    }

    #[test]
    fn peel_recovers_rows() {
        let rows = vec![build_ribbon(&[1, 2]).unwrap(), build_ribbon(&[3]).unwrap()];
        let disc = stack_ribbons(&rows).unwrap();
        let peeled = peel_decomposition(&disc).unwrap();
        assert_eq!(peeled.len(), 2);
        assert_eq!(peeled[0].params, vec![1, 2]);
        assert_eq!(peeled[1].params, vec![3]);
    }

    #[test]
    fn peel_single_ribbon_base_case() {
        let rows = vec![build_ribbon(&[2, 1]).unwrap()];
        let disc = stack_ribbons(&rows).unwrap();
        let peeled = peel_decomposition(&disc).unwrap();
        assert_eq!(peeled.len(), 1);
        assert_eq!(peeled[0].params, vec![2, 1]);
    }

    /// All compositions of `total` into ordered positive parts.
    pub(crate) fn compositions(total: u64) -> Vec<Vec<u64>> {
        if total == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in 1..=total {
            for mut rest in compositions(total - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn peel_inverts_stack_exhaustively() {
        // All stacks with N ≤ 3 rows of width B ≤ 4.
        for b in 1..=4u64 {
            let rows_choices = compositions(b);
            let mut stacks: Vec<Vec<Vec<u64>>> =
                rows_choices.iter().map(|r| vec![r.clone()]).collect();
            for _ in 0..2 {
                let mut next = Vec::new();
                for stack in &stacks {
                    for row in &rows_choices {
                        let mut s = stack.clone();
                        s.push(row.clone());
                        next.push(s);
                    }
                }
                stacks.extend(next);
            }
            for stack in stacks {
                if stack.len() > 3 {
                    continue;
                }
                let rows: Vec<Ribbon> =
                    stack.iter().map(|params| build_ribbon(params).unwrap()).collect();
                let disc = stack_ribbons(&rows).unwrap();
                let peeled = peel_decomposition(&disc).unwrap();
                let got: Vec<Vec<u64>> = peeled.iter().map(|r| r.params.clone()).collect();
                assert_eq!(got, stack, "B={b}");
                // No circular tracks on any stack.
                assert!(find_circular_tracks(&a_pattern(&disc)).is_empty());
                // The boundary always contains the letter a.
                let boundary = disc.boundary_letters().unwrap();
                assert!(boundary.iter().any(|l| l.sym == b'a'));
            }
        }
    }
}
