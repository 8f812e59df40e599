use mpead_core::GenomeSpec;
use rand::Rng;
use serde::Serialize;

/// An encoded candidate solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "genes", rename_all = "lowercase")]
pub enum Genome {
    Bits(Vec<bool>),
    Reals(Vec<f64>),
}

impl Genome {
    /// Uniform random genome: fair coin bits, or reals in `[0, 1)`.
    pub fn random(spec: &GenomeSpec, rng: &mut impl Rng) -> Genome {
        match *spec {
            GenomeSpec::Bits(n) => Genome::Bits((0..n).map(|_| rng.random_bool(0.5)).collect()),
            GenomeSpec::Reals(n) => Genome::Reals((0..n).map(|_| rng.random::<f64>()).collect()),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Genome::Bits(b) => b.len(),
            Genome::Reals(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn matches_spec(&self, spec: &GenomeSpec) -> bool {
        matches!(
            (self, spec),
            (Genome::Bits(b), GenomeSpec::Bits(n)) if b.len() == *n
        ) || matches!(
            (self, spec),
            (Genome::Reals(r), GenomeSpec::Reals(n)) if r.len() == *n
        )
    }

    /// Number of positions at which the two genomes differ. Genomes of
    /// different type or length differ everywhere past the shared prefix.
    pub fn hamming(&self, other: &Genome) -> usize {
        let differing = match (self, other) {
            (Genome::Bits(a), Genome::Bits(b)) => a.iter().zip(b).filter(|(x, y)| x != y).count(),
            (Genome::Reals(a), Genome::Reals(b)) => a.iter().zip(b).filter(|(x, y)| x != y).count(),
            _ => 0,
        };
        let shared = match (self, other) {
            (Genome::Bits(_), Genome::Bits(_)) | (Genome::Reals(_), Genome::Reals(_)) => self.len().min(other.len()),
            _ => 0,
        };
        differing + self.len().max(other.len()) - shared
    }
}

/// Information carried along an edge: a genome-like vector or a scalar
/// fitness value.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Value {
    Bits(Vec<bool>),
    Reals(Vec<f64>),
    Scalar(f64),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Bits(_) => "bits",
            Value::Reals(_) => "reals",
            Value::Scalar(_) => "scalar",
        }
    }

    /// Length of a vector value; `None` for scalars.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match self {
            Value::Bits(b) => Some(b.len()),
            Value::Reals(r) => Some(r.len()),
            Value::Scalar(_) => None,
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match *self {
            Value::Scalar(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_genome(&self) -> Option<Genome> {
        match self {
            Value::Bits(b) => Some(Genome::Bits(b.clone())),
            Value::Reals(r) => Some(Genome::Reals(r.clone())),
            Value::Scalar(_) => None,
        }
    }
}

impl From<Genome> for Value {
    fn from(g: Genome) -> Value {
        match g {
            Genome::Bits(b) => Value::Bits(b),
            Genome::Reals(r) => Value::Reals(r),
        }
    }
}

impl From<&Genome> for Value {
    fn from(g: &Genome) -> Value {
        g.clone().into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Individual {
    pub genome: Genome,
    /// Set only by an evaluative write.
    pub fitness: Option<f64>,
    /// Set only by a phenotypic write.
    pub phenotype: Option<Value>,
}

impl Individual {
    pub fn new(genome: Genome) -> Self {
        Individual { genome, fitness: None, phenotype: None }
    }
}

/// Mean pairwise Hamming distance over the first `sample` individuals.
pub fn diversity(individuals: &[Individual], sample: usize) -> f64 {
    let s = &individuals[..individuals.len().min(sample)];
    if s.len() < 2 {
        return 0.0;
    }
    let mut total = 0usize;
    for (a, x) in s.iter().enumerate() {
        for y in &s[a + 1..] {
            total += x.genome.hamming(&y.genome);
        }
    }
    total as f64 / (s.len() * (s.len() - 1) / 2) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn random_genomes_follow_the_spec() {
        let mut rng = stream(0, "t", 0);
        let g = Genome::random(&GenomeSpec::Bits(30), &mut rng);
        assert!(g.matches_spec(&GenomeSpec::Bits(30)));
        assert!(!g.matches_spec(&GenomeSpec::Reals(30)));
        let r = Genome::random(&GenomeSpec::Reals(4), &mut rng);
        let Genome::Reals(v) = &r else { panic!() };
        assert!(v.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn hamming_distance() {
        let a = Genome::Bits(vec![true, true, false, false]);
        let b = Genome::Bits(vec![true, false, true, false]);
        assert_eq!(a.hamming(&b), 2);
        assert_eq!(a.hamming(&a), 0);
        assert_eq!(a.hamming(&Genome::Bits(vec![true])), 3);
    }

    #[test]
    fn diversity_of_identical_and_complementary() {
        let ind = |bits: &[bool]| Individual::new(Genome::Bits(bits.to_vec()));
        assert_eq!(diversity(&[ind(&[true; 4]), ind(&[true; 4])], 16), 0.0);
        assert_eq!(diversity(&[ind(&[true; 4]), ind(&[false; 4]), ind(&[true; 4])], 16), 8.0 / 3.0);
        assert_eq!(diversity(&[ind(&[true; 4])], 16), 0.0);
    }
}
