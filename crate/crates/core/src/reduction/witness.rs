//! The two witness translations: an exact packing builds a sphere
//! certificate, and an accepted certificate peels back into a packing.

use std::collections::HashMap;

use thiserror::Error;

use crate::certificates::{verify, Certificate};
use crate::surfaces::{build_complex, consolidate, Label};
use crate::words::{free_reduce, substitute, Letter, Sign, Word};

use super::tiling::{peel_decomposition, stack_ribbons, Face, Occ, Ribbon, TiledDisc, TilingError};
use super::{to_equation, BinPackingInstance, Partition, PartitionError};

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Tiling(#[from] TilingError),
    #[error("certificate rejected: {0}")]
    Rejected(String),
    #[error("certificate does not glue into a single sphere")]
    NotASphere,
}

/// Builds the sphere certificate witnessing an exact packing: the bins
/// become ribbons, the ribbons stack into a disc with boundary [a^N,b^B],
/// and the closing disc reads the last coefficient. The letter-level edges
/// are consolidated before output so the certificate meets the edge bound.
pub fn packing_to_certificate(
    inst: &BinPackingInstance,
    partition: &Partition,
) -> Result<Certificate, ReductionError> {
    partition.validate_exact(inst)?;
    let k = inst.items.len();

    let rows: Vec<Ribbon> = partition
        .blocks
        .iter()
        .map(|block| Ribbon {
            params: block.iter().map(|&j| inst.items[j - 1]).collect(),
            items: block.iter().map(|&j| Some(j)).collect(),
        })
        .collect();
    let hemisphere = stack_ribbons(&rows)?;
    let cycle = hemisphere.boundary_cycle()?;

    // One label per glued pair plus one per boundary occurrence (shared
    // with the closing disc).
    let mut label_of: HashMap<Occ, Label> = HashMap::new();
    let mut next: Label = 0;
    let mut label = |occ: Occ, partner: Option<Occ>, next: &mut Label| -> Label {
        let canonical = partner.map_or(occ, |p| occ.min(p));
        if let Some(&l) = label_of.get(&canonical) {
            return l;
        }
        let l = *next;
        *next += 1;
        label_of.insert(canonical, l);
        l
    };

    // Boundary words for the item discs, in item order.
    let mut item_boundaries: Vec<Vec<(Label, Sign)>> = vec![Vec::new(); k];
    let mut face_of_item = vec![usize::MAX; k + 1];
    for (f, face) in hemisphere.faces().iter().enumerate() {
        face_of_item[face.item.expect("faces are tagged")] = f;
    }
    for item in 1..=k {
        let f = face_of_item[item];
        let face = &hemisphere.faces()[f];
        let word: Vec<(Label, Sign)> = (0..face.sides())
            .map(|p| {
                let l = label((f, p), hemisphere.pairing((f, p)), &mut next);
                (l, face.letter_at(p).sign)
            })
            .collect();
        item_boundaries[item - 1] = word;
    }

    // The closing disc reads the hemisphere boundary backwards with letters
    // inverted.
    let closing: Vec<(Label, Sign)> = cycle
        .iter()
        .rev()
        .map(|&(f, p)| {
            let l = label((f, p), None, &mut next);
            (l, hemisphere.faces()[f].letter_at(p).sign.flip())
        })
        .collect();

    let mut boundaries = item_boundaries;
    boundaries.push(closing);

    // Single-letter images: every label stands for the positive letter of
    // its symbol.
    let mut images: HashMap<Label, Word> = HashMap::new();
    for (&occ, &l) in &label_of {
        let letter = hemisphere.faces()[occ.0].letter_at(occ.1);
        images.insert(l, Word::letter(Letter::new(letter.sym, Sign::Plus)));
    }

    // Merge away the letter-level seams.
    let (complex, merges) = consolidate(&boundaries);
    for merge in merges {
        let apply = |images: &HashMap<Label, Word>, (l, s): (Label, Sign)| -> Word {
            let w = images.get(&l).expect("merged labels have images");
            match s {
                Sign::Plus => w.clone(),
                Sign::Minus => w.inverse(),
            }
        };
        let word = apply(&images, merge.first).concat(&apply(&images, merge.second));
        images.insert(merge.new_label, word);
    }

    // Remap surviving labels onto 0..n.
    let mut dense: HashMap<Label, u32> = HashMap::new();
    for disc in complex.discs() {
        for &(l, _) in &disc.boundary {
            let id = dense.len() as u32;
            dense.entry(l).or_insert(id);
        }
    }
    let mut final_images = vec![Word::empty(); dense.len()];
    for (&l, &id) in &dense {
        final_images[id as usize] = images[&l].clone();
    }
    let final_boundaries: Vec<Vec<(u32, Sign)>> = complex
        .discs()
        .iter()
        .map(|d| d.boundary.iter().map(|&(l, s)| (dense[&l], s)).collect())
        .collect();
    Ok(Certificate::from_parts(final_images, final_boundaries))
}

/// Recovers an exact packing from an accepted certificate: refine the edges
/// to letters, drop the closing disc, and peel the remaining tiled disc into
/// ribbons, one bin per ribbon.
pub fn certificate_to_packing(
    inst: &BinPackingInstance,
    cert: &Certificate,
) -> Result<Partition, ReductionError> {
    let sf = to_equation(inst);
    let verdict = verify(&sf, cert);
    if !verdict.accepted {
        return Err(ReductionError::Rejected(format!(
            "{} ({})",
            verdict.detail,
            verdict.failed_condition.map(|c| c.to_string()).unwrap_or_default()
        )));
    }
    let k = inst.items.len();

    // Subdivide every edge into unit letter edges. Euler characteristic,
    // orientability and components are all invariant under subdivision.
    let mut base = vec![0u32; cert.variable_count() + 1];
    for v in 0..cert.variable_count() {
        base[v + 1] = base[v] + cert.images()[v].len() as u32;
    }
    let letter_boundaries: Vec<Vec<(u32, Sign)>> = cert
        .boundaries()
        .iter()
        .map(|boundary| {
            let mut word = Vec::new();
            for &(v, sign) in boundary {
                let r = cert.images()[v as usize].len() as u32;
                match sign {
                    Sign::Plus => word.extend((0..r).map(|t| (base[v as usize] + t, Sign::Plus))),
                    Sign::Minus => {
                        word.extend((0..r).rev().map(|t| (base[v as usize] + t, Sign::Minus)))
                    }
                }
            }
            word
        })
        .collect();

    let complex = build_complex(&letter_boundaries).expect("accepted certificates glue");
    let summary = complex.summarize();
    if summary.component_count != 1 || summary.components[0].chi != 2 {
        return Err(ReductionError::NotASphere);
    }

    // Letter words of the item discs, used to align each disc with the
    // canonical face layout.
    let images: HashMap<u32, Word> = (0..cert.variable_count() as u32)
        .map(|v| (v, cert.images()[v as usize].clone()))
        .collect();
    let mut face_offset = vec![0usize; k];
    let mut faces = Vec::with_capacity(k);
    for i in 0..k {
        let (letters, graphical) =
            substitute(&images, &cert.boundaries()[i]).expect("verified certificate");
        debug_assert!(graphical);
        let word = free_reduce(letters);
        let face = Face { param: inst.items[i], item: Some(i + 1) };
        // The reading is a rotation of a⁻¹ b⁻ⁿ a bⁿ; locate its unique a⁻¹.
        let p0 = word
            .letters()
            .iter()
            .position(|&l| l == Letter::new(b'a', Sign::Minus))
            .expect("verified coefficient contains a⁻¹");
        face_offset[i] = p0;
        faces.push(face);
    }

    let mut pairing: Vec<Vec<Option<Occ>>> = faces.iter().map(|f| vec![None; f.sides()]).collect();
    let to_face_pos = |disc: usize, pos: usize| -> usize {
        let len = faces[disc].sides();
        (pos + len - face_offset[disc]) % len
    };
    for pair in complex.edges() {
        let [o1, o2] = pair.occ;
        if o1.disc == k || o2.disc == k {
            continue; // seam with the closing disc stays on the boundary
        }
        let p1 = (o1.disc, to_face_pos(o1.disc, o1.pos));
        let p2 = (o2.disc, to_face_pos(o2.disc, o2.pos));
        pairing[p1.0][p1.1] = Some(p2);
        pairing[p2.0][p2.1] = Some(p1);
    }
    let tiled = TiledDisc::from_parts(faces, pairing)?;

    let ribbons = peel_decomposition(&tiled)?;
    let blocks: Vec<Vec<usize>> = ribbons
        .iter()
        .map(|r| r.items.iter().map(|i| i.expect("faces are tagged")).collect())
        .collect();
    let partition = Partition::canonical(blocks);
    partition.validate_exact(inst)?;
    Ok(partition)
}
