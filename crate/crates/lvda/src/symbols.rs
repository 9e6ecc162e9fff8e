//! Interned symbols and the declaration context shared by all modules.
//!
//! Every name that can appear in an expression — a dynamical variable, a
//! parameter of the coefficient field, a differential-tower generator, or a
//! formal differential indeterminate — is interned once in a [`Context`] and
//! referred to by its [`Symbol`] id afterwards. Polynomials store only ids,
//! so arithmetic never touches the string table.

use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

/// Interned symbol id, valid within the [`Context`] that created it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u32);

/// What a declared symbol means to the derivation engine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolRole {
    /// A dynamical variable of a planar system (`X`, `Y`). Differentiated
    /// only through the system derivation, never through a tower.
    DynamicalVar,
    /// A transcendental constant of the coefficient field; derivative 0.
    Parameter,
    /// A tower generator with a prescribed derivative (`t' = 1`, `z' = b*z`).
    TowerGen,
    /// A formal differential indeterminate `a0`, `a0'`, …; the derivative of
    /// order k is the fresh symbol of order k+1.
    FormalIndet,
}

struct Inner {
    names: Vec<String>,
    roles: Vec<SymbolRole>,
    index: HashMap<String, Symbol>,
}

/// Symbol table with interior mutability so that derivations can mint the
/// next-order formal indeterminate on demand.
pub struct Context {
    inner: RwLock<Inner>,
}

impl Default for Context {
    fn default() -> Self {
        Self::new()
    }
}

impl Context {
    pub fn new() -> Self {
        Context {
            inner: RwLock::new(Inner {
                names: Vec::new(),
                roles: Vec::new(),
                index: HashMap::new(),
            }),
        }
    }

    /// Declares `name` with the given role, or returns the existing symbol.
    ///
    /// Re-declaring with a conflicting role is a programming error and
    /// panics; callers validate user input before declaring.
    pub fn declare(&self, name: &str, role: SymbolRole) -> Symbol {
        let mut inner = self.inner.write().unwrap();
        if let Some(&sym) = inner.index.get(name) {
            assert_eq!(
                inner.roles[sym.0 as usize], role,
                "symbol `{name}` re-declared with a different role"
            );
            return sym;
        }
        let sym = Symbol(inner.names.len() as u32);
        inner.names.push(name.to_string());
        inner.roles.push(role);
        inner.index.insert(name.to_string(), sym);
        sym
    }

    /// Looks up a declared symbol by name.
    pub fn lookup(&self, name: &str) -> Option<Symbol> {
        self.inner.read().unwrap().index.get(name).copied()
    }

    pub fn name(&self, sym: Symbol) -> String {
        self.inner.read().unwrap().names[sym.0 as usize].clone()
    }

    pub fn role(&self, sym: Symbol) -> SymbolRole {
        self.inner.read().unwrap().roles[sym.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All declared symbols with a given role, in declaration order.
    pub fn with_role(&self, role: SymbolRole) -> Vec<Symbol> {
        let inner = self.inner.read().unwrap();
        (0..inner.names.len() as u32)
            .map(Symbol)
            .filter(|s| inner.roles[s.0 as usize] == role)
            .collect()
    }

    /// The formal indeterminate one derivative order above `sym`.
    ///
    /// Formal indeterminates follow the naming scheme `base`, `base'`,
    /// `base''`, …; the next order is interned on first use.
    pub fn formal_derivative(&self, sym: Symbol) -> Symbol {
        let name = {
            let inner = self.inner.read().unwrap();
            assert_eq!(
                inner.roles[sym.0 as usize],
                SymbolRole::FormalIndet,
                "formal_derivative on a non-formal symbol"
            );
            format!("{}'", inner.names[sym.0 as usize])
        };
        self.declare(&name, SymbolRole::FormalIndet)
    }
}

impl fmt::Debug for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inner = self.inner.read().unwrap();
        f.debug_struct("Context")
            .field("symbols", &inner.names)
            .finish()
    }
}
