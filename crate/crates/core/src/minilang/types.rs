//! Semantic types and the rules that govern them.

use std::fmt;

/// Index of a class in `Program::classes`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u32);

impl ClassId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Resolved semantic type of an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemType {
    Int,
    Float,
    Bool,
    Char,
    Void,
    /// Type of the `null` literal; assignable to any reference type.
    Null,
    Object(ClassId),
    List(Box<SemType>),
    Buffer,
    Array(Box<SemType>),
}

impl SemType {
    pub fn is_numeric(&self) -> bool {
        matches!(self, SemType::Int | SemType::Float)
    }

    /// Reference types: objects, builtin containers and arrays.
    pub fn is_reference(&self) -> bool {
        matches!(
            self,
            SemType::Object(_) | SemType::List(_) | SemType::Buffer | SemType::Array(_)
        )
    }

    /// Is a value of `src` assignable to a slot of type `self`? Equal types
    /// always are; `int` widens to `float`; `null` goes to any reference.
    pub fn assignable_from(&self, src: &SemType) -> bool {
        if self == src {
            return !matches!(self, SemType::Void | SemType::Null);
        }
        match (self, src) {
            (SemType::Float, SemType::Int) => true,
            (t, SemType::Null) => t.is_reference(),
            _ => false,
        }
    }

    /// Token used in operation names: class and container types erase to
    /// `Object`, arrays render as `elem[]`.
    pub fn op_token(&self) -> String {
        match self {
            SemType::Int => "int".to_string(),
            SemType::Float => "float".to_string(),
            SemType::Bool => "bool".to_string(),
            SemType::Char => "char".to_string(),
            SemType::Void => "void".to_string(),
            SemType::Null => "null".to_string(),
            SemType::Object(_) | SemType::List(_) | SemType::Buffer => "Object".to_string(),
            SemType::Array(e) => format!("{}[]", e.op_token()),
        }
    }

    /// Human-readable rendering for diagnostics (class ids are resolved by
    /// the caller when a name is available).
    pub fn describe(&self) -> String {
        match self {
            SemType::Object(id) => format!("object(class #{})", id.0),
            SemType::List(e) => format!("List<{}>", e.describe()),
            SemType::Array(e) => format!("{}[]", e.describe()),
            other => other.op_token(),
        }
    }
}

impl fmt::Display for SemType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.describe())
    }
}

/// Result type of numeric binary operators: float if either side is float.
pub fn numeric_join(a: &SemType, b: &SemType) -> SemType {
    if matches!(a, SemType::Float) || matches!(b, SemType::Float) {
        SemType::Float
    } else {
        SemType::Int
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_assignable_only_to_references() {
        assert!(SemType::Object(ClassId(0)).assignable_from(&SemType::Null));
        assert!(SemType::Array(Box::new(SemType::Int)).assignable_from(&SemType::Null));
        assert!(SemType::Buffer.assignable_from(&SemType::Null));
        assert!(!SemType::Int.assignable_from(&SemType::Null));
        assert!(!SemType::Bool.assignable_from(&SemType::Null));
    }

    #[test]
    fn int_widens_to_float_not_back() {
        assert!(SemType::Float.assignable_from(&SemType::Int));
        assert!(!SemType::Int.assignable_from(&SemType::Float));
    }

    #[test]
    fn op_tokens_erase_classes() {
        assert_eq!(SemType::Object(ClassId(3)).op_token(), "Object");
        assert_eq!(
            SemType::List(Box::new(SemType::Object(ClassId(0)))).op_token(),
            "Object"
        );
        assert_eq!(SemType::Array(Box::new(SemType::Char)).op_token(), "char[]");
    }
}
