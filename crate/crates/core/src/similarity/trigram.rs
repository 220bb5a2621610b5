use super::{SimilarityError, SimilarityProvider};

pub const EMBEDDING_DIM: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ u64::from(b)).wrapping_mul(FNV_PRIME))
}

/// A unit-norm hashed character-trigram vector.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenEmbedding(Box<[f64; EMBEDDING_DIM]>);

impl TokenEmbedding {
    pub fn as_slice(&self) -> &[f64] {
        &self.0[..]
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Embeds a token by hashing the character trigrams of `^token$`
/// (FNV-1a 64 over their UTF-8 bytes, bucket = hash mod 256) and
/// L2-normalizing the bucket counts.
pub fn trigram_embed(token: &str) -> TokenEmbedding {
    let padded: Vec<char> = std::iter::once('^')
        .chain(token.chars())
        .chain(std::iter::once('$'))
        .collect();
    let mut v = Box::new([0.0f64; EMBEDDING_DIM]);
    let mut buf = [0u8; 12];
    for window in padded.windows(3) {
        let mut len = 0;
        for c in window {
            len += c.encode_utf8(&mut buf[len..]).len();
        }
        v[(fnv1a(&buf[..len]) % EMBEDDING_DIM as u64) as usize] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
    TokenEmbedding(v)
}

pub fn cosine(a: &TokenEmbedding, b: &TokenEmbedding) -> f64 {
    a.0.iter()
        .zip(b.0.iter())
        .map(|(x, y)| x * y)
        .sum::<f64>()
        .clamp(-1.0, 1.0)
}

/// Greedy token alignment in the style of BERTScore-F1.
///
/// Each token of one string is matched to its most similar token in the
/// other; the two directional means are combined by harmonic mean when both
/// are positive and by `min` otherwise.
pub fn greedy_match_score<E>(a: &str, b: &str, embed: E) -> Result<f64, SimilarityError>
where
    E: Fn(&str) -> TokenEmbedding,
{
    let ta: Vec<&str> = a.split_whitespace().collect();
    let tb: Vec<&str> = b.split_whitespace().collect();
    if ta.is_empty() {
        return Err(SimilarityError::UnscorablePredicate(a.to_string()));
    }
    if tb.is_empty() {
        return Err(SimilarityError::UnscorablePredicate(b.to_string()));
    }
    let ea: Vec<TokenEmbedding> = ta.iter().map(|t| embed(t)).collect();
    let eb: Vec<TokenEmbedding> = tb.iter().map(|t| embed(t)).collect();

    let sim = |i: usize, j: usize| {
        if ta[i] == tb[j] {
            1.0
        } else {
            cosine(&ea[i], &eb[j])
        }
    };
    let recall = (0..ta.len())
        .map(|i| (0..tb.len()).map(|j| sim(i, j)).fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / ta.len() as f64;
    let precision = (0..tb.len())
        .map(|j| (0..ta.len()).map(|i| sim(i, j)).fold(f64::NEG_INFINITY, f64::max))
        .sum::<f64>()
        / tb.len() as f64;

    let score = if recall > 0.0 && precision > 0.0 {
        2.0 * (recall * precision) / (recall + precision)
    } else {
        recall.min(precision)
    };
    Ok(score.clamp(-1.0, 1.0))
}

/// Deterministic hashed-trigram baseline.
#[derive(Debug, Clone, Copy, Default)]
pub struct TrigramProvider;

impl SimilarityProvider for TrigramProvider {
    fn name(&self) -> &str {
        "trigram"
    }

    fn score(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        greedy_match_score(a, b, trigram_embed)
    }
}
