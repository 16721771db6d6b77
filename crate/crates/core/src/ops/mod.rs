//! The operation catalog: every energy operation and library function the
//! mini-language can produce, in a fixed documented order.
//!
//! Energy-operation ids encode operand types, e.g. `Addition_int_int`,
//! `Multi_float_float`, `Equal_Object_null`, `Assign_char[]_char[]`. The
//! catalog is the single source of truth for column order in count files;
//! `docs/op-catalog` is its on-disk rendering and a test keeps them in sync.
//!
//! `!=` counts as an equality test plus a boolean negation, so only
//! `Equal_*` comparison ops exist. `x += e` decomposes into its underlying
//! arithmetic op plus an assignment. `Increment`/`Decrement` are their own
//! ops (implicitly int) and are not double-counted as addition + assignment.

mod identify;

pub use identify::{build_plan, identify_expr_ops, identify_stmt_ops, OpPlan, UncataloguedConstruct};

use std::collections::BTreeMap;
use std::sync::OnceLock;

use crate::minilang::library::{LibFuncKey, LIB_FUNCS};

/// The eight reporting classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum OpClass {
    Assignments,
    Declarations,
    ControlOps,
    FunctionOps,
    BooleanOps,
    ArithmeticOps,
    LibFunctions,
    ArrayOps,
}

impl OpClass {
    pub const ALL: [OpClass; 8] = [
        OpClass::Assignments,
        OpClass::Declarations,
        OpClass::ControlOps,
        OpClass::FunctionOps,
        OpClass::BooleanOps,
        OpClass::ArithmeticOps,
        OpClass::LibFunctions,
        OpClass::ArrayOps,
    ];

    /// Column-head style abbreviation.
    pub fn abbrev(self) -> &'static str {
        match self {
            OpClass::Assignments => "Assi.",
            OpClass::Declarations => "Decl.",
            OpClass::ControlOps => "Cont.",
            OpClass::FunctionOps => "Func.",
            OpClass::BooleanOps => "Bool.",
            OpClass::ArithmeticOps => "Arit.",
            OpClass::LibFunctions => "Libr.",
            OpClass::ArrayOps => "Arra.",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OpClass::Assignments => "Assignments",
            OpClass::Declarations => "Declarations",
            OpClass::ControlOps => "ControlOps",
            OpClass::FunctionOps => "FunctionOps",
            OpClass::BooleanOps => "BooleanOps",
            OpClass::ArithmeticOps => "ArithmeticOps",
            OpClass::LibFunctions => "LibFunctions",
            OpClass::ArrayOps => "ArrayOps",
        }
    }
}

/// Index into the catalog; doubles as the column index in count vectors and
/// count files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId(pub u16);

impl OpId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    EnergyOp,
    LibFunc(LibFuncKey),
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub class: OpClass,
    pub kind: EntryKind,
    /// Operand signature for the docs, e.g. `(int, float)` or `arity 2`.
    pub signature: String,
}

/// The full, deterministic operation list. Obtain via [`catalog()`].
#[derive(Debug)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    by_name: BTreeMap<String, OpId>,
    lib_ids: Vec<OpId>,
    pub method_invocation: OpId,
    pub blockgoto_if: OpId,
    pub blockgoto_for: OpId,
    pub blockgoto_while: OpId,
    pub field_reference: OpId,
    pub array_reference: OpId,
    pub new_object: OpId,
    pub new_array: OpId,
    pub increment: OpId,
    pub decrement: OpId,
    pub not_op: OpId,
    pub and_op: OpId,
    pub or_op: OpId,
}

impl Catalog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn entry(&self, id: OpId) -> &CatalogEntry {
        &self.entries[id.index()]
    }

    pub fn name(&self, id: OpId) -> &str {
        &self.entries[id.index()].name
    }

    /// The reporting class of an operation (total over the catalog).
    pub fn classify(&self, id: OpId) -> OpClass {
        self.entries[id.index()].class
    }

    pub fn find(&self, name: &str) -> Option<OpId> {
        self.by_name.get(name).copied()
    }

    /// Catalog id of a library function.
    pub fn lib_op(&self, key: LibFuncKey) -> OpId {
        self.lib_ids[key.index()]
    }

    /// Typed operation like `Addition_int_int`; errors are catalog gaps.
    pub fn typed2(&self, base: &str, t1: &str, t2: &str) -> Result<OpId, UncataloguedConstruct> {
        let name = format!("{base}_{t1}_{t2}");
        self.find(&name).ok_or(UncataloguedConstruct { name })
    }

    pub fn typed1(&self, base: &str, t: &str) -> Result<OpId, UncataloguedConstruct> {
        let name = format!("{base}_{t}");
        self.find(&name).ok_or(UncataloguedConstruct { name })
    }

    /// One line per op: `name<TAB>class<TAB>signature`. This text is what
    /// ships as `docs/op-catalog`.
    pub fn doc_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# MJ operation catalog: id, class, signature\n");
        out.push_str(&format!(
            "# {} entries ({} energy operations, {} library functions)\n",
            self.len(),
            self.entries
                .iter()
                .filter(|e| e.kind == EntryKind::EnergyOp)
                .count(),
            LIB_FUNCS.len()
        ));
        for e in &self.entries {
            out.push_str(&format!("{}\t{}\t{}\n", e.name, e.class.name(), e.signature));
        }
        out
    }
}

/// The shared catalog instance. Stable across runs by construction: the
/// entry list is a fixed enumeration, never data-dependent.
pub fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

const NUMERIC_PAIRS: [(&str, &str); 4] = [
    ("int", "int"),
    ("int", "float"),
    ("float", "int"),
    ("float", "float"),
];

/// Value-type tokens in catalog order; `Object` covers classes, lists and
/// buffers.
const VALUE_TOKENS: [&str; 5] = ["int", "float", "bool", "char", "Object"];
const ARRAY_TOKENS: [&str; 5] = ["int[]", "float[]", "bool[]", "char[]", "Object[]"];

/// Assignable (target, source) token pairs the grammar permits.
fn assign_pairs() -> Vec<(String, String)> {
    let mut pairs = vec![
        ("int".to_string(), "int".to_string()),
        ("float".to_string(), "float".to_string()),
        ("float".to_string(), "int".to_string()),
        ("bool".to_string(), "bool".to_string()),
        ("char".to_string(), "char".to_string()),
        ("Object".to_string(), "Object".to_string()),
        ("Object".to_string(), "null".to_string()),
    ];
    for t in ARRAY_TOKENS {
        pairs.push((t.to_string(), t.to_string()));
    }
    for t in ARRAY_TOKENS {
        pairs.push((t.to_string(), "null".to_string()));
    }
    pairs
}

/// Equality-comparable token pairs (null normalized to the right).
fn equal_pairs() -> Vec<(String, String)> {
    let mut pairs: Vec<(String, String)> = NUMERIC_PAIRS
        .iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect();
    pairs.push(("bool".to_string(), "bool".to_string()));
    pairs.push(("char".to_string(), "char".to_string()));
    pairs.push(("Object".to_string(), "Object".to_string()));
    pairs.push(("Object".to_string(), "null".to_string()));
    for t in ARRAY_TOKENS {
        pairs.push((t.to_string(), t.to_string()));
    }
    for t in ARRAY_TOKENS {
        pairs.push((t.to_string(), "null".to_string()));
    }
    pairs
}

fn build_catalog() -> Catalog {
    let mut entries: Vec<CatalogEntry> = Vec::new();
    let mut push_op = |name: String, class: OpClass, signature: String| {
        entries.push(CatalogEntry {
            name,
            class,
            kind: EntryKind::EnergyOp,
            signature,
        });
    };

    // arithmetic
    for base in ["Addition", "Subtraction", "Multi", "Div"] {
        for (a, b) in NUMERIC_PAIRS {
            push_op(
                format!("{base}_{a}_{b}"),
                OpClass::ArithmeticOps,
                format!("({a}, {b})"),
            );
        }
    }
    push_op(
        "Mod_int_int".to_string(),
        OpClass::ArithmeticOps,
        "(int, int)".to_string(),
    );
    push_op("Neg_int".to_string(), OpClass::ArithmeticOps, "(int)".to_string());
    push_op(
        "Neg_float".to_string(),
        OpClass::ArithmeticOps,
        "(float)".to_string(),
    );
    push_op(
        "Increment".to_string(),
        OpClass::ArithmeticOps,
        "(int)".to_string(),
    );
    push_op(
        "Decrement".to_string(),
        OpClass::ArithmeticOps,
        "(int)".to_string(),
    );

    // comparisons and booleans
    for base in ["Less", "LessEq", "Greater", "GreaterEq"] {
        for (a, b) in NUMERIC_PAIRS {
            push_op(
                format!("{base}_{a}_{b}"),
                OpClass::BooleanOps,
                format!("({a}, {b})"),
            );
        }
    }
    for (a, b) in equal_pairs() {
        push_op(
            format!("Equal_{a}_{b}"),
            OpClass::BooleanOps,
            format!("({a}, {b})"),
        );
    }
    push_op("And".to_string(), OpClass::BooleanOps, "(bool, bool)".to_string());
    push_op("Or".to_string(), OpClass::BooleanOps, "(bool, bool)".to_string());
    push_op("Not".to_string(), OpClass::BooleanOps, "(bool)".to_string());

    // assignments
    for (a, b) in assign_pairs() {
        push_op(
            format!("Assign_{a}_{b}"),
            OpClass::Assignments,
            format!("({a}, {b})"),
        );
    }

    // declarations and object creation
    for t in VALUE_TOKENS {
        push_op(
            format!("Declaration_{t}"),
            OpClass::Declarations,
            format!("({t})"),
        );
    }
    for t in ARRAY_TOKENS {
        push_op(
            format!("Declaration_{t}"),
            OpClass::Declarations,
            format!("({t})"),
        );
    }
    push_op(
        "New_Object".to_string(),
        OpClass::Declarations,
        "(Object)".to_string(),
    );

    // function ops
    for t in VALUE_TOKENS.iter().chain(ARRAY_TOKENS.iter()) {
        push_op(
            format!("Parameter_{t}"),
            OpClass::FunctionOps,
            format!("({t})"),
        );
    }
    for t in VALUE_TOKENS.iter().chain(ARRAY_TOKENS.iter()) {
        push_op(format!("Return_{t}"), OpClass::FunctionOps, format!("({t})"));
    }

    // control ops
    push_op(
        "Method_Invocation".to_string(),
        OpClass::ControlOps,
        "()".to_string(),
    );
    push_op("BlockGoto_if".to_string(), OpClass::ControlOps, "()".to_string());
    push_op("BlockGoto_for".to_string(), OpClass::ControlOps, "()".to_string());
    push_op(
        "BlockGoto_while".to_string(),
        OpClass::ControlOps,
        "()".to_string(),
    );
    push_op(
        "Field_Reference".to_string(),
        OpClass::ControlOps,
        "()".to_string(),
    );

    // array ops
    push_op(
        "Array_Reference".to_string(),
        OpClass::ArrayOps,
        "()".to_string(),
    );
    push_op("New_Array".to_string(), OpClass::ArrayOps, "()".to_string());

    // library functions, one atomic unit each
    let mut lib_ids = Vec::with_capacity(LIB_FUNCS.len());
    for (i, spec) in LIB_FUNCS.iter().enumerate() {
        lib_ids.push(OpId(entries.len() as u16));
        entries.push(CatalogEntry {
            name: spec.qualified.to_string(),
            class: OpClass::LibFunctions,
            kind: EntryKind::LibFunc(LibFuncKey(i as u16)),
            signature: format!("arity {}", spec.arity),
        });
    }

    let mut by_name = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        let prev = by_name.insert(e.name.clone(), OpId(i as u16));
        assert!(prev.is_none(), "duplicate catalog id {}", e.name);
    }

    let get = |name: &str| *by_name.get(name).expect("anchor op present");
    Catalog {
        method_invocation: get("Method_Invocation"),
        blockgoto_if: get("BlockGoto_if"),
        blockgoto_for: get("BlockGoto_for"),
        blockgoto_while: get("BlockGoto_while"),
        field_reference: get("Field_Reference"),
        array_reference: get("Array_Reference"),
        new_object: get("New_Object"),
        new_array: get("New_Array"),
        increment: get("Increment"),
        decrement: get("Decrement"),
        not_op: get("Not"),
        and_op: get("And"),
        or_op: get("Or"),
        entries,
        by_name,
        lib_ids,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_contains_paper_examples() {
        let c = catalog();
        for name in [
            "Method_Invocation",
            "Parameter_Object",
            "Return_Object",
            "Addition_int_int",
            "Multi_float_float",
            "Increment",
            "And",
            "Less_int_float",
            "Equal_Object_null",
            "Declaration_int",
            "Assign_Object_null",
            "Assign_char[]_char[]",
            "Array_Reference",
            "BlockGoto_if",
            "BlockGoto_for",
            "BlockGoto_while",
            "Buffer.put",
            "List.size",
            "Math.random",
        ] {
            assert!(c.find(name).is_some(), "missing {name}");
        }
    }

    #[test]
    fn classification_matches_reporting_rules() {
        let c = catalog();
        let class_of = |n: &str| c.classify(c.find(n).unwrap());
        assert_eq!(class_of("Method_Invocation"), OpClass::ControlOps);
        assert_eq!(class_of("BlockGoto_while"), OpClass::ControlOps);
        assert_eq!(class_of("Field_Reference"), OpClass::ControlOps);
        assert_eq!(class_of("Parameter_Object"), OpClass::FunctionOps);
        assert_eq!(class_of("Return_int"), OpClass::FunctionOps);
        assert_eq!(class_of("Equal_Object_null"), OpClass::BooleanOps);
        assert_eq!(class_of("Not"), OpClass::BooleanOps);
        assert_eq!(class_of("Multi_float_float"), OpClass::ArithmeticOps);
        assert_eq!(class_of("Assign_float_int"), OpClass::Assignments);
        assert_eq!(class_of("Declaration_Object"), OpClass::Declarations);
        assert_eq!(class_of("List.add"), OpClass::LibFunctions);
        assert_eq!(class_of("Array_Reference"), OpClass::ArrayOps);
    }

    #[test]
    fn ids_unique_and_order_stable() {
        let c = catalog();
        assert_eq!(c.by_name.len(), c.len());
        // order is part of the file-format contract: spot-check the first
        // and last entries
        assert_eq!(c.name(OpId(0)), "Addition_int_int");
        assert_eq!(
            c.name(OpId((c.len() - 1) as u16)),
            "IO.readInputFloat"
        );
    }

    #[test]
    fn every_class_is_populated() {
        let c = catalog();
        for class in OpClass::ALL {
            assert!(
                c.entries().iter().any(|e| e.class == class),
                "class {class:?} has no ops"
            );
        }
    }
}
