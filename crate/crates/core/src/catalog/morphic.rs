//! Fixed points of binary morphisms, with an append-only prefix cache.

use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{CfError, Result};

/// Fixed point `σ^∞(seed)` of a morphism on `{0, 1}`.
#[derive(Debug)]
pub struct MorphicWord {
    name: String,
    images: [Vec<u8>; 2],
    seed: u8,
    cache: RwLock<Vec<u8>>,
}

impl MorphicWord {
    /// Requires `σ(seed)` to start with `seed` and be longer than one letter.
    pub fn new(name: impl Into<String>, image0: Vec<u8>, image1: Vec<u8>, seed: u8) -> Result<Self> {
        let images = [image0, image1];
        if seed > 1 || images.iter().flatten().any(|&l| l > 1) {
            return Err(CfError::InvalidValue(
                "morphic words are over the letters 0 and 1".into(),
            ));
        }
        let own = &images[seed as usize];
        if own.first() != Some(&seed) || own.len() < 2 {
            return Err(CfError::InvalidValue(format!(
                "morphism is not prolongable at {seed}: image {own:?}"
            )));
        }
        if images[1 - seed as usize].is_empty() {
            return Err(CfError::InvalidValue("erasing morphisms are not supported".into()));
        }
        Ok(MorphicWord {
            name: name.into(),
            images,
            seed,
            cache: RwLock::new(vec![seed]),
        })
    }

    /// `0 → 01`, `1 → 10`.
    pub fn thue_morse() -> &'static MorphicWord {
        static WORD: OnceLock<MorphicWord> = OnceLock::new();
        WORD.get_or_init(|| MorphicWord::new("thue_morse", vec![0, 1], vec![1, 0], 0).expect("valid morphism"))
    }

    /// `0 → 01`, `1 → 0`.
    pub fn fibonacci() -> &'static MorphicWord {
        static WORD: OnceLock<MorphicWord> = OnceLock::new();
        WORD.get_or_init(|| MorphicWord::new("fibonacci", vec![0, 1], vec![0], 0).expect("valid morphism"))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn seed(&self) -> u8 {
        self.seed
    }

    fn ensure(&self, n: usize) {
        if self.cache.read().unwrap_or_else(|p| p.into_inner()).len() >= n {
            return;
        }
        let mut cache = self.cache.write().unwrap_or_else(|p| p.into_inner());
        while cache.len() < n {
            // the image of a prefix of the fixed point is a longer prefix
            let grown: Vec<u8> = cache
                .iter()
                .flat_map(|&l| self.images[l as usize].iter().copied())
                .collect();
            debug_assert!(grown.starts_with(&cache));
            *cache = grown;
        }
    }

    /// First `n` letters.
    pub fn prefix(&self, n: usize) -> Vec<u8> {
        self.ensure(n);
        self.cache.read().unwrap_or_else(|p| p.into_inner())[..n].to_vec()
    }

    /// Letter at 1-based position `n`.
    pub fn letter(&self, n: usize) -> u8 {
        assert!(n >= 1, "positions start at 1");
        self.ensure(n);
        self.cache.read().unwrap_or_else(|p| p.into_inner())[n - 1]
    }

    pub fn count_ones(&self, n: usize) -> usize {
        self.ensure(n);
        self.cache.read().unwrap_or_else(|p| p.into_inner())[..n]
            .iter()
            .filter(|&&l| l == 1)
            .count()
    }
}

pub fn word_prefix(word: &MorphicWord, n: usize) -> Result<Vec<u8>> {
    if n == 0 {
        return Err(CfError::InvalidValue("prefix length must be at least 1".into()));
    }
    Ok(word.prefix(n))
}

/// Proportion of ones among the first `n` letters.
pub fn density(word: &MorphicWord, n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(CfError::InvalidValue("prefix length must be at least 1".into()));
    }
    Ok(BigRational::new(BigInt::from(word.count_ones(n)), BigInt::from(n)))
}
