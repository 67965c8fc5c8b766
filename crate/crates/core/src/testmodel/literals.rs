use rand::seq::SliceRandom;
use rand::Rng;

use crate::lang::{CheckedProgram, Type};

use super::Literal;

/// Integers every pool starts with.
pub const SEED_INTS: [i64; 6] = [-1, 0, 1, 2, 7, 100];

/// Bounds for freshly drawn random integers.
pub const RANDOM_INT_RANGE: std::ops::RangeInclusive<i64> = -1000..=1000;

const RANDOM_CHARS: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789.$ ";

/// Probability of drawing from the seeded constants rather than a fresh
/// random value.
const SEEDED_BIAS: f64 = 0.8;

/// Seeded constants per primitive type.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiteralPool {
    pub ints: Vec<i64>,
    pub strings: Vec<String>,
}

impl LiteralPool {
    /// Seeds strings from every literal in the program source.
    pub fn from_program(program: &CheckedProgram) -> Self {
        let mut strings: Vec<String> = program.string_literals.clone();
        for extra in ["", "a"] {
            if !strings.iter().any(|s| s == extra) {
                strings.push(extra.to_string());
            }
        }
        LiteralPool {
            ints: SEED_INTS.to_vec(),
            strings,
        }
    }

    /// The seeded constants of type `ty`, without random extras.
    pub fn seeded(&self, ty: Type) -> Vec<Literal> {
        match ty {
            Type::Int => self.ints.iter().map(|&n| Literal::Int(n)).collect(),
            Type::Bool => vec![Literal::Bool(false), Literal::Bool(true)],
            Type::Str => self.strings.iter().cloned().map(Literal::Str).collect(),
            Type::Ref(_) | Type::Null => vec![Literal::Null],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, ty: Type, rng: &mut R) -> Literal {
        match ty {
            Type::Int => Literal::Int(if rng.gen_bool(SEEDED_BIAS) {
                *self.ints.choose(rng).expect("non-empty int pool")
            } else {
                rng.gen_range(RANDOM_INT_RANGE)
            }),
            Type::Bool => Literal::Bool(rng.gen()),
            Type::Str => Literal::Str(if rng.gen_bool(SEEDED_BIAS) {
                self.strings.choose(rng).expect("non-empty string pool").clone()
            } else {
                random_string(rng)
            }),
            Type::Ref(_) | Type::Null => Literal::Null,
        }
    }

    /// Small random change to a literal: ints move by 1..=10, strings gain,
    /// lose or replace one character, booleans flip.
    pub fn perturb<R: Rng + ?Sized>(&self, lit: &Literal, rng: &mut R) -> Literal {
        match lit {
            Literal::Int(n) => {
                let delta = rng.gen_range(1..=10);
                Literal::Int(if rng.gen() {
                    n.saturating_add(delta)
                } else {
                    n.saturating_sub(delta)
                })
            }
            Literal::Bool(b) => Literal::Bool(!b),
            Literal::Str(s) => Literal::Str(perturb_string(s, rng)),
            Literal::Null => Literal::Null,
        }
    }
}

fn random_char<R: Rng + ?Sized>(rng: &mut R) -> char {
    *RANDOM_CHARS.choose(rng).unwrap() as char
}

fn random_string<R: Rng + ?Sized>(rng: &mut R) -> String {
    let len = rng.gen_range(1..=5);
    (0..len).map(|_| random_char(rng)).collect()
}

fn perturb_string<R: Rng + ?Sized>(s: &str, rng: &mut R) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    let op = if chars.is_empty() { 0 } else { rng.gen_range(0..3) };
    match op {
        0 => {
            let at = rng.gen_range(0..=chars.len());
            chars.insert(at, random_char(rng));
        }
        1 => {
            let at = rng.gen_range(0..chars.len());
            chars.remove(at);
        }
        _ => {
            let at = rng.gen_range(0..chars.len());
            chars[at] = random_char(rng);
        }
    }
    chars.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_have_the_requested_type() {
        let pool = LiteralPool {
            ints: SEED_INTS.to_vec(),
            strings: vec!["x".into()],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            for ty in [Type::Int, Type::Bool, Type::Str] {
                assert_eq!(pool.sample(ty, &mut rng).ty(), ty);
            }
            if let Literal::Int(n) = pool.sample(Type::Int, &mut rng) {
                assert!(RANDOM_INT_RANGE.contains(&n));
            }
            if let Literal::Str(s) = pool.sample(Type::Str, &mut rng) {
                assert!(s == "x" || (1..=5).contains(&s.chars().count()));
            }
        }
    }

    #[test]
    fn perturbation_changes_ints_by_at_most_ten() {
        let pool = LiteralPool {
            ints: vec![0],
            strings: vec![],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let Literal::Int(n) = pool.perturb(&Literal::Int(50), &mut rng) else {
                unreachable!()
            };
            assert!(n != 50 && (n - 50).abs() <= 10);
            let Literal::Str(s) = pool.perturb(&Literal::Str("ab".into()), &mut rng) else {
                unreachable!()
            };
            assert!((1..=3).contains(&s.chars().count()));
        }
    }
}
