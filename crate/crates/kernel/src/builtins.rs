//! The shipped function library.
//!
//! Every objective here is deliberately the simplest formula with the
//! structural property its system needs: zero-sum scores for predator/prey,
//! a combined score for co-operation, a non-negative leftover for carcasses.

use mpead_core::InfoKind::{self, Evaluative as Eval, Phenotypic as Pheno};

use crate::ea::AlgoConfig;
use crate::genome::Value;
use crate::registry::{Port, Registry, Signature};
use crate::{select, FnError};

/// Tunable constants of the built-in functions.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinParams {
    /// Bits per decoded phenotype gene.
    pub decode_chunk: usize,
    /// Range each decoded gene is scaled into.
    pub decode_range: (f64, f64),
    /// Weight of the modifier's ones-count in `modify`.
    pub modify_weight: f64,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        BuiltinParams {
            decode_chunk: 1,
            decode_range: (0.0, 1.0),
            modify_weight: 1.0,
        }
    }
}

fn vector(args: &[Value], position: usize) -> Result<&Value, FnError> {
    let v = &args[position];
    match v {
        Value::Scalar(_) => Err(FnError::ArgType { position, expected: "vector", got: v.type_name() }),
        _ => Ok(v),
    }
}

fn scalar(args: &[Value], position: usize) -> Result<f64, FnError> {
    args[position]
        .as_scalar()
        .ok_or(FnError::ArgType { position, expected: "scalar", got: args[position].type_name() })
}

/// Ones-count of a bit vector; sum of a real vector.
pub fn ones(v: &Value) -> f64 {
    match v {
        Value::Bits(b) => b.iter().filter(|x| **x).count() as f64,
        Value::Reals(r) => r.iter().sum(),
        Value::Scalar(x) => *x,
    }
}

fn numeric(v: &Value) -> Option<Vec<f64>> {
    match v {
        Value::Bits(b) => Some(b.iter().map(|&x| x as u8 as f64).collect()),
        Value::Reals(r) => Some(r.clone()),
        Value::Scalar(_) => None,
    }
}

/// Number of equal positions between two vectors of the same length. A bit
/// vector compares with a real vector as zeros and ones, so a decoded
/// phenotype can meet a raw genotype.
pub fn matching(a: &Value, b: &Value) -> Result<usize, FnError> {
    let count = |x: &[f64], y: &[f64]| x.iter().zip(y).filter(|(p, q)| p == q).count();
    let (Some(x), Some(y)) = (numeric(a), numeric(b)) else {
        let (position, got) = if a.as_scalar().is_some() { (0, a) } else { (1, b) };
        return Err(FnError::ArgType { position, expected: "vector", got: got.type_name() });
    };
    if x.len() != y.len() {
        return Err(FnError::LengthMismatch { left: x.len(), right: y.len() });
    }
    Ok(match (a, b) {
        (Value::Bits(p), Value::Bits(q)) => p.iter().zip(q).filter(|(s, t)| s == t).count(),
        _ => count(&x, &y),
    })
}

/// Bits to unsigned integers, `chunk` bits per gene (most significant first),
/// each scaled into `range`. A trailing partial chunk is scaled by its own
/// width.
pub fn decode_binary(bits: &[bool], chunk: usize, range: (f64, f64)) -> Vec<f64> {
    let chunk = chunk.max(1);
    bits.chunks(chunk)
        .map(|c| {
            let v = c.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64) as f64;
            let max = ((1u128 << c.len()) - 1) as f64;
            range.0 + (range.1 - range.0) * v / max
        })
        .collect()
}

fn one(v: f64) -> Result<Vec<Value>, FnError> {
    Ok(vec![Value::Scalar(v)])
}

fn sig(inputs: &[Port], outputs: &[InfoKind]) -> Signature {
    Signature::new(inputs.to_vec(), outputs.to_vec())
}

/// Registers the built-in functions, selectors (`rand`, `best`, `tourn2`)
/// and algorithms (`ga`, `ga_noelite`).
pub fn install(r: &mut Registry, params: &BuiltinParams) {
    use Port::{Evaluative as E, Genetic as G};
    let add = |r: &mut Registry, name: &str, s: Signature, f: fn(&[Value], &BuiltinParams) -> Result<Vec<Value>, FnError>| {
        let p = params.clone();
        r.register_function(name, s, move |args| f(args, &p)).expect("builtin names are unique");
    };

    add(r, "onemax", sig(&[G], &[Eval]), |a, _| one(ones(vector(a, 0)?)));
    add(r, "pheno_sum", sig(&[G], &[Eval]), |a, _| one(ones(vector(a, 0)?)));
    add(r, "decode_binary", sig(&[G], &[Pheno]), |a, p| match vector(a, 0)? {
        Value::Bits(b) => Ok(vec![Value::Reals(decode_binary(b, p.decode_chunk, p.decode_range))]),
        other => Ok(vec![other.clone()]),
    });
    add(r, "pred_score", sig(&[G, G], &[Eval]), |a, _| one(matching(vector(a, 0)?, vector(a, 1)?)? as f64));
    add(r, "prey_score", sig(&[G, G], &[Eval]), |a, _| {
        let len = vector(a, 0)?.len().unwrap_or(0);
        one((len - matching(vector(a, 0)?, vector(a, 1)?)?) as f64)
    });
    add(r, "compete", sig(&[G, G], &[Eval, Eval]), |a, _| {
        let len = vector(a, 0)?.len().unwrap_or(0);
        let m = matching(vector(a, 0)?, vector(a, 1)?)?;
        Ok(vec![Value::Scalar(m as f64), Value::Scalar((len - m) as f64)])
    });
    add(r, "coop_eval", sig(&[G, G], &[Eval]), |a, _| one(ones(vector(a, 0)?) + ones(vector(a, 1)?)));
    add(r, "modify", sig(&[E, G], &[Eval]), |a, p| one(scalar(a, 0)? + p.modify_weight * ones(vector(a, 1)?)));
    add(r, "F_carc", sig(&[E, E], &[Eval]), |a, _| one((scalar(a, 0)? - scalar(a, 1)?).max(0.0)));
    add(r, "scav_eval", sig(&[E, G, G], &[Eval]), |a, _| {
        let (prey, scav) = (vector(a, 1)?, vector(a, 2)?);
        let len = prey.len().unwrap_or(0);
        let edibility = if len == 0 { 0.0 } else { matching(prey, scav)? as f64 / len as f64 };
        one(scalar(a, 0)? * edibility)
    });

    r.register_selector("rand", select::uniform);
    r.register_selector("best", select::best);
    r.register_selector("tourn2", select::tournament2);

    r.register_algo("ga", AlgoConfig::default());
    r.register_algo("ga_noelite", AlgoConfig::without_elitism());
}

impl Registry {
    /// A registry holding the built-in library with default parameters.
    pub fn with_builtins() -> Registry {
        Registry::with_builtin_params(&BuiltinParams::default())
    }

    pub fn with_builtin_params(params: &BuiltinParams) -> Registry {
        let mut r = Registry::new();
        install(&mut r, params);
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Value {
        Value::Bits(s.chars().map(|c| c == '1').collect())
    }

    fn call(name: &str, args: &[Value]) -> Vec<Value> {
        Registry::with_builtins().function(name).unwrap().call(args).unwrap()
    }

    fn score(name: &str, args: &[Value]) -> f64 {
        call(name, args)[0].as_scalar().unwrap()
    }

    #[test]
    fn onemax_counts_ones() {
        assert_eq!(score("onemax", &[bits("101101")]), 4.0);
        assert_eq!(score("onemax", &[bits("00000000")]), 0.0);
        assert_eq!(score("onemax", &[bits("11111111")]), 8.0);
    }

    #[test]
    fn predator_and_prey_scores() {
        assert_eq!(score("pred_score", &[bits("1100"), bits("1010")]), 2.0);
        assert_eq!(score("prey_score", &[bits("1100"), bits("1010")]), 2.0);
        assert_eq!(score("pred_score", &[bits("1011"), bits("1011")]), 4.0);
        assert_eq!(score("prey_score", &[bits("1011"), bits("0100")]), 4.0);
        let both = call("compete", &[bits("1110"), bits("1000")]);
        assert_eq!(both, vec![Value::Scalar(2.0), Value::Scalar(2.0)]);
    }

    #[test]
    fn decode_then_sum_matches_onemax() {
        let g = bits("1101001");
        let ph = call("decode_binary", std::slice::from_ref(&g));
        assert_eq!(ph[0], Value::Reals(vec![1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0]));
        assert_eq!(score("pheno_sum", &ph), score("onemax", &[g]));
    }

    #[test]
    fn decode_scales_chunks() {
        let b: Vec<bool> = "1111000010".chars().map(|c| c == '1').collect();
        assert_eq!(decode_binary(&b, 4, (0.0, 15.0)), vec![15.0, 0.0, 2.0 * 15.0 / 3.0]);
        assert_eq!(decode_binary(&b[..4], 4, (-1.0, 1.0)), vec![1.0]);
    }

    #[test]
    fn co_operative_and_modified() {
        assert_eq!(score("coop_eval", &[bits("110"), bits("011")]), 4.0);
        assert_eq!(score("modify", &[Value::Scalar(2.5), bits("0111")]), 5.5);
    }

    #[test]
    fn carcass_is_a_non_negative_leftover() {
        assert_eq!(score("F_carc", &[Value::Scalar(7.0), Value::Scalar(3.0)]), 4.0);
        assert_eq!(score("F_carc", &[Value::Scalar(3.0), Value::Scalar(7.0)]), 0.0);
        // edible fraction: 3 of 4 positions match
        assert_eq!(score("scav_eval", &[Value::Scalar(8.0), bits("1010"), bits("1011")]), 6.0);
    }

    #[test]
    fn type_errors_are_reported() {
        let r = Registry::with_builtins();
        let f = r.function("pred_score").unwrap();
        assert!(matches!(f.call(&[bits("10"), bits("101")]), Err(FnError::LengthMismatch { left: 2, right: 3 })));
        assert!(matches!(f.call(&[bits("10"), Value::Scalar(1.0)]), Err(FnError::ArgType { .. })));
        let m = r.function("modify").unwrap();
        assert!(matches!(m.call(&[bits("10"), bits("10")]), Err(FnError::ArgType { position: 0, .. })));
        // decoded phenotypes compare with raw bits
        assert_eq!(f.call(&[Value::Reals(vec![1.0, 0.0, 0.5]), bits("101")]).unwrap(), vec![Value::Scalar(2.0)]);
    }

    #[test]
    fn shipped_names() {
        let r = Registry::with_builtins();
        let names: Vec<&str> = r.function_names().collect();
        for n in ["onemax", "decode_binary", "pheno_sum", "pred_score", "prey_score", "coop_eval", "modify", "F_carc", "scav_eval"] {
            assert!(names.contains(&n), "{n}");
        }
        assert_eq!(r.selector_names().collect::<Vec<_>>(), vec!["best", "rand", "tourn2"]);
        assert_eq!(r.algo("ga").unwrap().elitism, 1);
        assert_eq!(r.algo("ga_noelite").unwrap().elitism, 0);
    }
}
