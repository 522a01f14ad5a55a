use crate::corpus::tokens::{is_structural, TokenVocab, EOS, LINE_SEP};
use crate::error::{DmgError, Result};

/// Constrained token choice for step `j`:
/// - if the source token there is `|` or `_EOS_`, emit exactly that token;
/// - otherwise, if the distribution's argmax is structural, emit the
///   highest-probability non-structural token instead;
/// - otherwise emit the argmax.
pub fn force_decode_filter(src_token: &str, p: &[f64], vocab: &TokenVocab) -> Result<usize> {
    match src_token {
        LINE_SEP => return Ok(vocab.sep_idx()),
        EOS => return Ok(vocab.eos_idx()),
        _ => {}
    }
    let structural = vocab.structural_indices();
    let argmax = |allow_structural: bool| -> Option<usize> {
        p.iter()
            .enumerate()
            .filter(|(i, _)| allow_structural || !structural.contains(i))
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
    };
    let top = argmax(true)
        .ok_or_else(|| DmgError::invalid("empty distribution in force_decode_filter"))?;
    if !structural.contains(&top) {
        return Ok(top);
    }
    argmax(false).ok_or_else(|| {
        DmgError::invalid("vocabulary has no non-structural token to fall back on")
    })
}

/// True when the vocabulary can always satisfy the filter.
pub fn has_non_structural(vocab: &TokenVocab) -> bool {
    (0..vocab.len()).any(|i| !is_structural(vocab.token(i)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab() -> TokenVocab {
        let mut v = TokenVocab::new();
        v.intern("60"); // 4
        v.intern("62"); // 5
        v
    }

    #[test]
    fn structural_source_forces_that_token() {
        let v = vocab();
        let p = vec![0.9, 0.02, 0.02, 0.02, 0.02, 0.02];
        assert_eq!(force_decode_filter("|", &p, &v).unwrap(), v.sep_idx());
        assert_eq!(force_decode_filter(EOS, &p, &v).unwrap(), v.eos_idx());
    }

    #[test]
    fn structural_argmax_falls_to_best_non_structural() {
        let v = vocab();
        // top-1 is _EOS_ (idx 1), top-2 is "60" (idx 4)
        let p = vec![0.05, 0.5, 0.05, 0.05, 0.3, 0.05];
        assert_eq!(force_decode_filter("ni", &p, &v).unwrap(), 4);
    }

    #[test]
    fn plain_argmax_passes_through() {
        let v = vocab();
        let p = vec![0.05, 0.1, 0.05, 0.05, 0.6, 0.15];
        assert_eq!(force_decode_filter("ni", &p, &v).unwrap(), 4);
    }

    #[test]
    fn output_is_structural_iff_source_is() {
        let v = vocab();
        let mut rng = crate::numcore::Rng::new(2);
        for _ in 0..500 {
            let raw: Vec<f64> = (0..v.len()).map(|_| rng.next_f64()).collect();
            let sum: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / sum).collect();
            for src in ["ni", "|", EOS] {
                let out = force_decode_filter(src, &p, &v).unwrap();
                let out_structural = v.structural_indices().contains(&out);
                assert_eq!(out_structural, is_structural(src));
                if is_structural(src) {
                    assert_eq!(v.token(out), src);
                }
            }
        }
    }
}
