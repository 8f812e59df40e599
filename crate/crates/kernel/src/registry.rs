use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use mpead_core::InfoKind;

use crate::ea::AlgoConfig;
use crate::genome::Value;
use crate::rng::StreamRng;
use crate::{FnError, KernelError};

/// What an input port accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    /// Genotypic or phenotypic information.
    Genetic,
    Evaluative,
}

impl Port {
    pub fn accepts(self, kind: InfoKind) -> bool {
        match self {
            Port::Genetic => kind.is_genetic(),
            Port::Evaluative => kind == InfoKind::Evaluative,
        }
    }
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Port::Genetic => "genetic",
            Port::Evaluative => "eval",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub inputs: Vec<Port>,
    /// One value per entry is returned by every call, in this order.
    pub outputs: Vec<InfoKind>,
}

impl Signature {
    pub fn new(inputs: impl Into<Vec<Port>>, outputs: impl Into<Vec<InfoKind>>) -> Self {
        Signature { inputs: inputs.into(), outputs: outputs.into() }
    }
}

pub type Procedure = Arc<dyn Fn(&[Value]) -> Result<Vec<Value>, FnError> + Send + Sync>;

/// Picks `k` indices from a population given its fitness values.
pub type Selector = Arc<dyn Fn(&[Option<f64>], usize, &mut StreamRng) -> Vec<usize> + Send + Sync>;

/// A named pure function. It keeps no state between calls.
pub struct RegisteredFunction {
    pub name: String,
    pub signature: Signature,
    procedure: Procedure,
}

impl fmt::Debug for RegisteredFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RegisteredFunction")
            .field("name", &self.name)
            .field("signature", &self.signature)
            .finish_non_exhaustive()
    }
}

impl RegisteredFunction {
    pub fn call(&self, args: &[Value]) -> Result<Vec<Value>, FnError> {
        if args.len() != self.signature.inputs.len() {
            return Err(FnError::Arity { expected: self.signature.inputs.len(), got: args.len() });
        }
        let out = (self.procedure)(args)?;
        if out.len() != self.signature.outputs.len() {
            return Err(FnError::Outputs { expected: self.signature.outputs.len(), got: out.len() });
        }
        Ok(out)
    }
}

pub type FunctionHandle = Arc<RegisteredFunction>;

/// Resolves the function, selector and algorithm names used in diagrams.
#[derive(Default, Clone)]
pub struct Registry {
    functions: BTreeMap<String, FunctionHandle>,
    selectors: BTreeMap<String, Selector>,
    algos: BTreeMap<String, AlgoConfig>,
}

impl fmt::Debug for Registry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("functions", &self.functions.keys().collect::<Vec<_>>())
            .field("selectors", &self.selectors.keys().collect::<Vec<_>>())
            .field("algos", &self.algos.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl Registry {
    pub fn new() -> Self {
        Registry::default()
    }

    pub fn register_function<F>(&mut self, name: &str, signature: Signature, procedure: F) -> Result<FunctionHandle, KernelError>
    where
        F: Fn(&[Value]) -> Result<Vec<Value>, FnError> + Send + Sync + 'static,
    {
        if self.functions.contains_key(name) {
            return Err(KernelError::DuplicateFunction(name.to_string()));
        }
        let handle = Arc::new(RegisteredFunction {
            name: name.to_string(),
            signature,
            procedure: Arc::new(procedure),
        });
        self.functions.insert(name.to_string(), handle.clone());
        Ok(handle)
    }

    /// Adds or replaces a selector.
    pub fn register_selector<F>(&mut self, name: &str, selector: F)
    where
        F: Fn(&[Option<f64>], usize, &mut StreamRng) -> Vec<usize> + Send + Sync + 'static,
    {
        self.selectors.insert(name.to_string(), Arc::new(selector));
    }

    /// Adds or replaces an algorithm configuration.
    pub fn register_algo(&mut self, name: &str, cfg: AlgoConfig) {
        self.algos.insert(name.to_string(), cfg);
    }

    pub fn function(&self, name: &str) -> Option<&FunctionHandle> {
        self.functions.get(name)
    }

    pub fn selector(&self, name: &str) -> Option<&Selector> {
        self.selectors.get(name)
    }

    pub fn algo(&self, name: &str) -> Option<&AlgoConfig> {
        self.algos.get(name)
    }

    pub fn function_names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(String::as_str)
    }

    pub fn selector_names(&self) -> impl Iterator<Item = &str> {
        self.selectors.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_names_are_rejected() {
        let mut r = Registry::new();
        let sig = Signature::new([Port::Genetic], [InfoKind::Evaluative]);
        r.register_function("f", sig.clone(), |_| Ok(vec![Value::Scalar(0.0)])).unwrap();
        let err = r.register_function("f", sig, |_| Ok(vec![Value::Scalar(1.0)])).unwrap_err();
        assert_eq!(err, KernelError::DuplicateFunction("f".into()));
        assert!(r.function("f").is_some());
        assert!(r.function("g").is_none());
    }

    #[test]
    fn call_checks_arity_and_output_count() {
        let mut r = Registry::new();
        let f = r
            .register_function("two", Signature::new([Port::Genetic], [InfoKind::Evaluative, InfoKind::Evaluative]), |_| {
                Ok(vec![Value::Scalar(1.0)])
            })
            .unwrap();
        assert_eq!(f.call(&[]).unwrap_err(), FnError::Arity { expected: 1, got: 0 });
        assert_eq!(f.call(&[Value::Scalar(0.0)]).unwrap_err(), FnError::Outputs { expected: 2, got: 1 });
    }

    #[test]
    fn ports_accept_kinds() {
        assert!(Port::Genetic.accepts(InfoKind::Phenotypic));
        assert!(Port::Genetic.accepts(InfoKind::Genotypic));
        assert!(!Port::Genetic.accepts(InfoKind::Evaluative));
        assert!(Port::Evaluative.accepts(InfoKind::Evaluative));
    }
}
