//! Word-level definitions of the canonical reductions.

use super::ReductionError;
use crate::orders::dec;
use crate::vpl::{mirror_word, Alphabet, Kind, Sym, Word};

/// Splits a word starting with a call into `(c, inside, r, rest)`.
fn split_call<'a>(al: &Alphabet, w: &'a [Sym]) -> Result<(Sym, &'a [Sym], Sym, &'a [Sym]), ReductionError> {
    let mut depth = 0usize;
    for (i, &a) in w.iter().enumerate() {
        match al.kind(a) {
            Kind::Call => depth += 1,
            Kind::Ret => {
                if depth == 0 {
                    return Err(ReductionError::IllMatched(al.show(w)));
                }
                depth -= 1;
                if depth == 0 {
                    return Ok((w[0], &w[1..i], a, &w[i + 1..]));
                }
            }
            Kind::Int => {}
        }
    }
    Err(ReductionError::IllMatched(al.show(w)))
}

fn nc(al: &Alphabet, w1: &[Sym], w2: &[Sym], out: &mut Word) -> Result<(), ReductionError> {
    let Some(&a) = w1.first() else {
        out.extend_from_slice(w2);
        return Ok(());
    };
    match al.kind(a) {
        Kind::Int => {
            out.push(a);
            nc(al, &w1[1..], w2, out)
        }
        Kind::Call => {
            let (c, inner, r, rest) = split_call(al, w1)?;
            out.push(c);
            nc(al, inner, w2, out)?;
            out.push(r);
            out.extend_from_slice(rest);
            Ok(())
        }
        Kind::Ret => Err(ReductionError::IllMatched(al.show(w1))),
    }
}

/// `w₁ ⊕ w₂`: `w₂` runs inside the leftmost innermost call of `w₁`.
pub fn nested_concat_words(al: &Alphabet, w1: &[Sym], w2: &[Sym]) -> Result<Word, ReductionError> {
    let mut out = Vec::with_capacity(w1.len() + w2.len());
    nc(al, w1, w2, &mut out)?;
    Ok(out)
}

/// `w₁ ⊕ (w₂ ⊕ (⋯ ⊕ wₙ))`.
pub fn nested_concat_words_n(al: &Alphabet, ws: &[Word]) -> Result<Word, ReductionError> {
    let mut acc = ws.last().cloned().unwrap_or_default();
    for w in ws.iter().rev().skip(1) {
        acc = nested_concat_words(al, w, &acc)?;
    }
    Ok(acc)
}

fn ls(al: &Alphabet, s: Vec<usize>, t: Vec<usize>, ws: Vec<&[Sym]>, out: &mut Word) -> Result<(), ReductionError> {
    if ws.len() == 1 {
        out.extend_from_slice(ws[0]);
        return Ok(());
    }
    if let Some(j) = ws.iter().position(|w| w.is_empty()) {
        let drop = |v: &[usize]| -> Vec<usize> {
            v.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &x)| x).collect()
        };
        let ws2 = ws.iter().enumerate().filter(|&(i, _)| i != j).map(|(_, &w)| w).collect();
        return ls(al, drop(&s), drop(&t), ws2, out);
    }
    if let Some(m) = ws.iter().position(|w| al.kind(w[0]) == Kind::Int) {
        out.push(ws[m][0]);
        let mut ws2 = ws.clone();
        ws2[m] = &ws[m][1..];
        return ls(al, s, t, ws2, out);
    }
    let mut parts = Vec::with_capacity(ws.len());
    for w in &ws {
        if al.kind(w[0]) == Kind::Ret {
            return Err(ReductionError::IllMatched(al.show(w)));
        }
        parts.push(split_call(al, w)?);
    }
    let t2 = dec(&s, &t);
    match t.iter().position(|&x| x > 0) {
        None => {
            let (c1, in1, r1, _) = parts[0];
            let mut inner: Vec<&[Sym]> = vec![in1];
            for (i, p) in parts.iter().enumerate().skip(1) {
                let first_len = 2 + p.1.len();
                inner.push(&ws[i][..first_len]);
            }
            out.push(c1);
            ls(al, s.clone(), t2, inner, out)?;
            out.push(r1);
            let rests: Vec<&[Sym]> = parts.iter().map(|p| p.3).collect();
            ls(al, s, t, rests, out)
        }
        Some(m) => {
            let (cm, inm, rm, restm) = parts[m];
            let mut inner = ws.clone();
            inner[m] = inm;
            out.push(cm);
            ls(al, s, t2, inner, out)?;
            out.push(rm);
            out.extend_from_slice(restm);
            Ok(())
        }
    }
}

/// `LS_{s⃗,0⃗}(w₁, …, wₙ)`.
pub fn lockstep_words(al: &Alphabet, speeds: &[usize], ws: &[Word]) -> Result<Word, ReductionError> {
    if speeds.len() != ws.len() || speeds.iter().any(|&x| x == 0) || ws.is_empty() {
        return Err(ReductionError::Arity(format!(
            "{} speeds for {} words",
            speeds.len(),
            ws.len()
        )));
    }
    let mut out = Vec::new();
    let refs: Vec<&[Sym]> = ws.iter().map(|w| w.as_slice()).collect();
    ls(al, speeds.to_vec(), vec![0; speeds.len()], refs, &mut out)?;
    Ok(out)
}

pub fn concat_words(ws: &[Word]) -> Word {
    ws.concat()
}

/// Applies a left-aligned word operation through the mirror image of its inputs.
pub fn right_aligned(
    al: &Alphabet,
    ws: &[Word],
    op: impl Fn(&Alphabet, &[Word]) -> Result<Word, ReductionError>,
) -> Result<Word, ReductionError> {
    let m = al.mirrored();
    let rev: Vec<Word> = ws.iter().map(|w| mirror_word(w)).collect();
    Ok(mirror_word(&op(&m, &rev)?))
}
