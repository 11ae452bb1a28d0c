use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymbolKind {
    Independent,
    /// Base name of a dependent variable; its jet coordinates are `name_k`.
    Dependent,
    Param,
    Function(usize),
}

/// Declared names for parsing.
#[derive(Clone, Debug, Default)]
pub struct SymbolTable {
    entries: BTreeMap<String, SymbolKind>,
    independent: Option<String>,
}

impl SymbolTable {
    pub fn new() -> SymbolTable {
        SymbolTable::default()
    }

    pub fn declare(&mut self, name: &str, kind: SymbolKind) -> &mut Self {
        if kind == SymbolKind::Independent {
            self.independent = Some(name.to_string());
        }
        self.entries.insert(name.to_string(), kind);
        self
    }

    pub fn kind(&self, name: &str) -> Option<SymbolKind> {
        self.entries.get(name).copied()
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.entries.iter().filter_map(|(k, v)| match v {
            SymbolKind::Function(n) => Some((k.as_str(), *n)),
            _ => None,
        })
    }

    /// Canonical symbol name for an identifier, resolving jet aliases
    /// (`u_x`, `u_xx` to `u_1`, `u_2`; `u_0` to `u`).
    pub fn resolve(&self, ident: &str) -> Option<String> {
        if let Some((base, suffix)) = ident.split_once('_') {
            if self.kind(base) != Some(SymbolKind::Dependent) || suffix.is_empty() {
                return None;
            }
            let order = if suffix.bytes().all(|b| b.is_ascii_digit()) {
                suffix.parse::<usize>().ok()?
            } else {
                let ind = self.independent.as_deref()?;
                if ind.len() != 1 || !suffix.chars().all(|c| c.to_string() == ind) {
                    return None;
                }
                suffix.len()
            };
            return Some(if order == 0 { base.to_string() } else { format!("{}_{}", base, order) });
        }
        match self.kind(ident) {
            Some(SymbolKind::Independent | SymbolKind::Dependent | SymbolKind::Param) => Some(ident.to_string()),
            _ => None,
        }
    }
}
