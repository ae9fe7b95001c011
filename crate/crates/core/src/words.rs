//! Free monoid with involution over a finite alphabet.
//!
//! Words are sequences of signed generators. A lowercase letter stands for a
//! generator, the same letter uppercase for its inverse, and the empty string
//! for the identity; this encoding is used verbatim in every JSON file the
//! crate reads or writes. [`Word`] values are always freely reduced, so the
//! unreduced output of a substitution is kept as a plain `Vec<Letter>`.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exponent carried by a single letter or boundary symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn from_i64(v: i64) -> Option<Sign> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }
}

/// One signed generator. `sym` is the lowercase ASCII name of the generator;
/// `Minus` marks its formal inverse. The derived order (`a < A < b < B < …`)
/// is the total order used for canonical rotations of cyclic words.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub sym: u8,
    pub sign: Sign,
}

impl Letter {
    pub fn new(sym: u8, sign: Sign) -> Letter {
        Letter { sym, sign }
    }

    pub fn inverse(self) -> Letter {
        Letter { sym: self.sym, sign: self.sign.flip() }
    }

    /// Decodes one character of the text encoding.
    pub fn from_char(c: char) -> Option<Letter> {
        if c.is_ascii_lowercase() {
            Some(Letter::new(c as u8, Sign::Plus))
        } else if c.is_ascii_uppercase() {
            Some(Letter::new(c.to_ascii_lowercase() as u8, Sign::Minus))
        } else {
            None
        }
    }

    pub fn to_char(self) -> char {
        match self.sign {
            Sign::Plus => self.sym as char,
            Sign::Minus => (self.sym as char).to_ascii_uppercase(),
        }
    }

    fn cancels(self, other: Letter) -> bool {
        self.sym == other.sym && self.sign != other.sign
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("unknown generator symbol {symbol:?} at position {position}")]
    UnknownSymbol { symbol: char, position: usize },
    #[error("alphabet symbols must be distinct lowercase ASCII letters")]
    BadAlphabet,
}

/// Ordered set of generator symbols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Alphabet {
    symbols: Vec<u8>,
}

impl Alphabet {
    pub fn new(symbols: &str) -> Result<Alphabet, WordError> {
        let bytes: Vec<u8> = symbols.bytes().collect();
        if bytes.is_empty() || !bytes.iter().all(|b| b.is_ascii_lowercase()) {
            return Err(WordError::BadAlphabet);
        }
        let mut seen = bytes.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != bytes.len() {
            return Err(WordError::BadAlphabet);
        }
        Ok(Alphabet { symbols: bytes })
    }

    pub fn contains(&self, sym: u8) -> bool {
        self.symbols.contains(&sym)
    }

    pub fn symbols(&self) -> impl Iterator<Item = u8> + '_ {
        self.symbols.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Decodes a text-encoded word, checking every symbol against the
    /// alphabet. The result is a raw letter sequence, not yet reduced.
    pub fn parse_letters(&self, text: &str) -> Result<Vec<Letter>, WordError> {
        text.chars()
            .enumerate()
            .map(|(i, c)| {
                let letter = Letter::from_char(c)
                    .filter(|l| self.contains(l.sym))
                    .ok_or(WordError::UnknownSymbol { symbol: c, position: i })?;
                Ok(letter)
            })
            .collect()
    }

    pub fn parse_word(&self, text: &str) -> Result<Word, WordError> {
        Ok(free_reduce(self.parse_letters(text)?))
    }

    /// All freely reduced words of length at most `max_len`, in length-then-
    /// lexicographic order. Intended for bounded searches.
    pub fn reduced_words_up_to(&self, max_len: usize) -> Vec<Word> {
        let letters: Vec<Letter> = self
            .symbols
            .iter()
            .flat_map(|&s| [Letter::new(s, Sign::Plus), Letter::new(s, Sign::Minus)])
            .collect();
        let mut out = vec![Word::empty()];
        let mut frontier: Vec<Vec<Letter>> = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for stem in &frontier {
                for &l in &letters {
                    if stem.last().is_some_and(|&last| last.cancels(l)) {
                        continue;
                    }
                    let mut w = stem.clone();
                    w.push(l);
                    next.push(w);
                }
            }
            out.extend(next.iter().cloned().map(Word));
            frontier = next;
        }
        out
    }
}

impl TryFrom<String> for Alphabet {
    type Error = WordError;
    fn try_from(s: String) -> Result<Alphabet, WordError> {
        Alphabet::new(&s)
    }
}

impl From<Alphabet> for String {
    fn from(a: Alphabet) -> String {
        a.symbols.iter().map(|&b| b as char).collect()
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.symbols {
            write!(f, "{}", b as char)?;
        }
        Ok(())
    }
}

/// A freely reduced word. The reduction invariant is maintained by every
/// constructor, so two words are equal in the free group iff they are equal
/// as values.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Word {
        Word(vec![l])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    /// Parses the text encoding without an alphabet check; any ASCII letter
    /// is accepted. Used when the surrounding structure carries the alphabet.
    pub fn parse(text: &str) -> Result<Word, WordError> {
        let letters = text
            .chars()
            .enumerate()
            .map(|(i, c)| {
                Letter::from_char(c).ok_or(WordError::UnknownSymbol { symbol: c, position: i })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(free_reduce(letters))
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    /// Free product with reduction.
    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        for &l in &other.0 {
            if out.last().is_some_and(|&last| last.cancels(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn pow(&self, exp: i64) -> Word {
        let base = if exp < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::empty();
        for _ in 0..exp.unsigned_abs() {
            out = out.concat(&base);
        }
        out
    }

    /// Is the word cyclically reduced (first and last letters not mutually
    /// inverse)?
    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&a), Some(&b)) if self.0.len() > 1 => !a.cancels(b),
            _ => true,
        }
    }

    pub fn rotate_left(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return Word::empty();
        }
        let k = k % self.0.len();
        let mut v = self.0.clone();
        v.rotate_left(k);
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "ε")
        } else {
            write!(f, "{self}")
        }
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Word, D::Error> {
        let text = String::deserialize(d)?;
        Word::parse(&text).map_err(serde::de::Error::custom)
    }
}

/// Reduces a raw letter sequence to the unique freely reduced word equal to
/// it in the free group. Idempotent.
pub fn free_reduce(letters: Vec<Letter>) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
    for l in letters {
        if out.last().is_some_and(|&last| last.cancels(l)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

/// Splits a freely reduced word as `conjugator · core · conjugator⁻¹` with a
/// cyclically reduced core.
pub fn cyclic_reduce(w: &Word) -> (Word, Word) {
    let letters = &w.0;
    let mut lo = 0;
    let mut hi = letters.len();
    while hi - lo >= 2 && letters[lo].cancels(letters[hi - 1]) {
        lo += 1;
        hi -= 1;
    }
    (Word(letters[lo..hi].to_vec()), Word(letters[..lo].to_vec()))
}

/// A cyclic word stored as its canonical representative: the
/// lexicographically minimal rotation of its cyclic reduction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "Word", into = "Word")]
pub struct CyclicWord {
    representative: Word,
}

impl CyclicWord {
    /// Canonicalizes an arbitrary freely reduced word: cyclically reduces it
    /// (dropping the conjugator) and picks the minimal rotation.
    pub fn canonical(w: &Word) -> CyclicWord {
        let (core, _) = cyclic_reduce(w);
        if core.is_empty() {
            return CyclicWord { representative: core };
        }
        let best = (0..core.len())
            .map(|k| core.rotate_left(k))
            .min()
            .expect("nonempty word has a rotation");
        CyclicWord { representative: best }
    }

    pub fn representative(&self) -> &Word {
        &self.representative
    }

    pub fn len(&self) -> usize {
        self.representative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representative.is_empty()
    }

    pub fn inverse(&self) -> CyclicWord {
        CyclicWord::canonical(&self.representative.inverse())
    }
}

impl From<Word> for CyclicWord {
    fn from(w: Word) -> CyclicWord {
        CyclicWord::canonical(&w)
    }
}

impl From<CyclicWord> for Word {
    fn from(c: CyclicWord) -> Word {
        c.representative
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.representative.fmt(f)
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?})", self.representative)
    }
}

/// Returns the offset `k` such that rotating `u` left by `k` letters equals
/// the representative of `v` exactly as strings, if one exists.
pub fn cyclic_match(u: &Word, v: &CyclicWord) -> Option<usize> {
    let rep = v.representative();
    if u.len() != rep.len() {
        return None;
    }
    if u.is_empty() {
        return Some(0);
    }
    (0..u.len()).find(|&k| &u.rotate_left(k) == rep)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubstituteError {
    #[error("no image for symbol {0}")]
    MissingImage(String),
}

/// Applies a substitution to a word over abstract symbols, concatenating the
/// images with exponents but performing no reduction. The flag reports
/// whether the concatenation is already freely reduced, i.e. whether the
/// image can be read off without cancellations.
pub fn substitute<K: Eq + Hash + fmt::Display>(
    images: &HashMap<K, Word>,
    word: &[(K, Sign)],
) -> Result<(Vec<Letter>, bool), SubstituteError> {
    let mut out: Vec<Letter> = Vec::new();
    let mut graphical = true;
    for (sym, sign) in word {
        let image = images
            .get(sym)
            .ok_or_else(|| SubstituteError::MissingImage(sym.to_string()))?;
        let piece: Vec<Letter> = match sign {
            Sign::Plus => image.letters().to_vec(),
            Sign::Minus => image.inverse().letters().to_vec(),
        };
        for l in piece {
            if out.last().is_some_and(|&last| last.cancels(l)) {
                graphical = false;
            }
            out.push(l);
        }
    }
    Ok((out, graphical))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(text: &str) -> Word {
        Word::parse(text).unwrap()
    }

    fn letters(text: &str) -> Vec<Letter> {
        text.chars().map(|c| Letter::from_char(c).unwrap()).collect()
    }

    #[test]
    fn free_reduce_examples() {
        assert_eq!(free_reduce(letters("aA")), Word::empty());
        assert_eq!(free_reduce(letters("abBA")), Word::empty());
        assert_eq!(free_reduce(letters("abA")).to_string(), "abA");
        assert_eq!(free_reduce(letters("abA")).len(), 3);
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (core, conj) = cyclic_reduce(&w("abA"));
        assert_eq!(core.to_string(), "b");
        assert_eq!(conj.to_string(), "a");

        let (core, conj) = cyclic_reduce(&w("ab"));
        assert_eq!(core.to_string(), "ab");
        assert!(conj.is_empty());

        let (core, conj) = cyclic_reduce(&Word::empty());
        assert!(core.is_empty() && conj.is_empty());

        let (core, conj) = cyclic_reduce(&w("baB"));
        assert_eq!(core.to_string(), "a");
        assert_eq!(conj.to_string(), "b");
    }

    #[test]
    fn invert_examples() {
        assert_eq!(w("ab").inverse().to_string(), "BA");
        assert_eq!(Word::empty().inverse(), Word::empty());
        assert_eq!(w("aBc").inverse().to_string(), "CbA");
        assert!(w("aBc").concat(&w("aBc").inverse()).is_empty());
    }

    #[test]
    fn substitute_examples() {
        let mut images = HashMap::new();
        images.insert("p", w("a"));
        images.insert("q", w("b"));
        let (out, graphical) =
            substitute(&images, &[("p", Sign::Plus), ("q", Sign::Plus)]).unwrap();
        assert_eq!(free_reduce(out.clone()).to_string(), "ab");
        assert_eq!(out.len(), 2);
        assert!(graphical);

        images.insert("q", w("A"));
        let (out, graphical) =
            substitute(&images, &[("p", Sign::Plus), ("q", Sign::Plus)]).unwrap();
        assert_eq!(out.len(), 2);
        assert!(!graphical);

        let mut images = HashMap::new();
        images.insert("p", w("ab"));
        let (out, graphical) =
            substitute(&images, &[("p", Sign::Plus), ("p", Sign::Minus)]).unwrap();
        assert_eq!(out.len(), 4);
        assert!(!graphical);

        let err = substitute(&images, &[("r", Sign::Plus)]).unwrap_err();
        assert_eq!(err, SubstituteError::MissingImage("r".into()));
    }

    #[test]
    fn cyclic_match_examples() {
        let v = CyclicWord::canonical(&w("abc"));
        let k = cyclic_match(&w("bca"), &v);
        assert!(k.is_some());
        assert_eq!(w("bca").rotate_left(k.unwrap()), v.representative().clone());

        assert_eq!(cyclic_match(&w("abc"), &CyclicWord::canonical(&w("acb"))), None);
        assert_eq!(cyclic_match(&Word::empty(), &CyclicWord::canonical(&Word::empty())), Some(0));
        // Same length, different content.
        assert_eq!(cyclic_match(&w("aa"), &CyclicWord::canonical(&w("bb"))), None);
    }

    #[test]
    fn canonical_rotation_is_minimal() {
        let c = CyclicWord::canonical(&w("ba"));
        assert_eq!(c.representative().to_string(), "ab");
        // a < A < b < B
        let c = CyclicWord::canonical(&w("Ba"));
        assert_eq!(c.representative().to_string(), "aB");
        let c = CyclicWord::canonical(&w("bA"));
        assert_eq!(c.representative().to_string(), "Ab");
    }

    #[test]
    fn alphabet_parsing() {
        let ab = Alphabet::new("ab").unwrap();
        assert!(ab.parse_word("abA").is_ok());
        assert_eq!(
            ab.parse_word("abc").unwrap_err(),
            WordError::UnknownSymbol { symbol: 'c', position: 2 }
        );
        assert!(Alphabet::new("").is_err());
        assert!(Alphabet::new("aa").is_err());
        assert!(Alphabet::new("aB").is_err());
    }

    #[test]
    fn reduced_word_enumeration_counts() {
        let ab = Alphabet::new("ab").unwrap();
        // 1 empty + 4 of length 1 + 4*3 of length 2
        assert_eq!(ab.reduced_words_up_to(2).len(), 17);
        let all = ab.reduced_words_up_to(3);
        assert!(all.iter().all(|w| free_reduce(w.letters().to_vec()) == *w));
    }

    #[test]
    fn word_json_round_trip() {
        for text in ["", "abA", "aBBa"] {
            let word = w(text);
            let json = serde_json::to_string(&word).unwrap();
            let back: Word = serde_json::from_str(&json).unwrap();
            assert_eq!(back, word);
        }
    }

    proptest! {
        #[test]
        fn free_reduce_is_idempotent(s in proptest::collection::vec(0u8..4, 0..64)) {
            let letters: Vec<Letter> = s.iter().map(|&i| Letter {
                sym: b'a' + i / 2,
                sign: if i % 2 == 0 { Sign::Plus } else { Sign::Minus },
            }).collect();
            let once = free_reduce(letters);
            let twice = free_reduce(once.letters().to_vec());
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn concat_length_parity(s in "[abAB]{0,20}", t in "[abAB]{0,20}") {
            let u = w(&s);
            let v = w(&t);
            let prod = u.concat(&v);
            prop_assert!(prod.len() <= u.len() + v.len());
            prop_assert_eq!(prod.len() % 2, (u.len() + v.len()) % 2);
        }

        #[test]
        fn word_times_inverse_is_identity(s in "[abAB]{0,24}") {
            let u = w(&s);
            prop_assert!(u.concat(&u.inverse()).is_empty());
        }

        #[test]
        fn substitution_is_a_homomorphism(
            u in proptest::collection::vec((0u32..3, any::<bool>()), 0..8),
            v in proptest::collection::vec((0u32..3, any::<bool>()), 0..8),
        ) {
            let mut images = HashMap::new();
            images.insert(0u32, w("ab"));
            images.insert(1u32, w("A"));
            images.insert(2u32, w("ba"));
            let sgn = |b: bool| if b { Sign::Plus } else { Sign::Minus };
            let lift = |xs: &[(u32, bool)]| xs.iter().map(|&(k, b)| (k, sgn(b))).collect::<Vec<_>>();
            let (uv, _) = substitute(&images, &[lift(&u), lift(&v)].concat()).unwrap();
            let (us, _) = substitute(&images, &lift(&u)).unwrap();
            let (vs, _) = substitute(&images, &lift(&v)).unwrap();
            prop_assert_eq!(uv, [us, vs].concat());
        }

        #[test]
        fn cyclic_match_finds_every_rotation(s in "[ab]{1,12}", k in 0usize..12) {
            let u = w(&s);
            // over {a,b} with no inverses every word is cyclically reduced
            let v = CyclicWord::canonical(&u);
            prop_assert!(cyclic_match(&u.rotate_left(k % u.len()), &v).is_some());
        }
    }
}
