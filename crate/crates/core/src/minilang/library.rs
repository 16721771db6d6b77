//! Built-in library surface: `List`, `Buffer`, `Math` and bare I/O
//! functions. Each entry is one atomic modeling unit with a declared purity
//! bit and an effect summary used by the refactoring advisor.

/// Index into [`LIB_FUNCS`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LibFuncKey(pub u16);

impl LibFuncKey {
    pub fn index(self) -> usize {
        self.0 as usize
    }
    pub fn spec(self) -> &'static LibFuncSpec {
        &LIB_FUNCS[self.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LibClass {
    List,
    Buffer,
    Math,
    Io,
}

/// What a library function reads and writes on its receiver, plus whether it
/// touches the outside world (output stream, input stream, RNG).
#[derive(Debug, Clone, Copy, Default)]
pub struct LibEffects {
    pub reads_len: bool,
    pub reads_content: bool,
    pub reads_pos: bool,
    pub writes_len: bool,
    pub writes_content: bool,
    pub writes_pos: bool,
    pub io: bool,
}

impl LibEffects {
    pub fn writes_anything(&self) -> bool {
        self.writes_len || self.writes_content || self.writes_pos
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LibFuncSpec {
    pub class: LibClass,
    pub name: &'static str,
    /// Qualified id used in the catalog and count files, e.g. `Buffer.put`.
    pub qualified: &'static str,
    pub arity: usize,
    pub pure: bool,
    pub effects: LibEffects,
}

const PURE_LEN: LibEffects = LibEffects {
    reads_len: true,
    reads_content: false,
    reads_pos: false,
    writes_len: false,
    writes_content: false,
    writes_pos: false,
    io: false,
};

const PURE_CONTENT: LibEffects = LibEffects {
    reads_len: true,
    reads_content: true,
    reads_pos: false,
    writes_len: false,
    writes_content: false,
    writes_pos: false,
    io: false,
};

const PURE_POS: LibEffects = LibEffects {
    reads_len: false,
    reads_content: false,
    reads_pos: true,
    writes_len: false,
    writes_content: false,
    writes_pos: false,
    io: false,
};

const PURE_VALUE: LibEffects = LibEffects {
    reads_len: false,
    reads_content: false,
    reads_pos: false,
    writes_len: false,
    writes_content: false,
    writes_pos: false,
    io: false,
};

const MUTATE_LEN: LibEffects = LibEffects {
    reads_len: true,
    reads_content: true,
    reads_pos: false,
    writes_len: true,
    writes_content: true,
    writes_pos: false,
    io: false,
};

const MUTATE_POS: LibEffects = LibEffects {
    reads_len: true,
    reads_content: true,
    reads_pos: true,
    writes_len: false,
    writes_content: true,
    writes_pos: true,
    io: false,
};

const IO_ONLY: LibEffects = LibEffects {
    reads_len: false,
    reads_content: false,
    reads_pos: false,
    writes_len: false,
    writes_content: false,
    writes_pos: false,
    io: true,
};

/// The complete library table, in catalog order.
pub const LIB_FUNCS: &[LibFuncSpec] = &[
    LibFuncSpec { class: LibClass::List, name: "add", qualified: "List.add", arity: 1, pure: false, effects: MUTATE_LEN },
    LibFuncSpec { class: LibClass::List, name: "get", qualified: "List.get", arity: 1, pure: true, effects: PURE_CONTENT },
    LibFuncSpec { class: LibClass::List, name: "size", qualified: "List.size", arity: 0, pure: true, effects: PURE_LEN },
    LibFuncSpec { class: LibClass::List, name: "isEmpty", qualified: "List.isEmpty", arity: 0, pure: true, effects: PURE_LEN },
    LibFuncSpec { class: LibClass::List, name: "remove", qualified: "List.remove", arity: 1, pure: false, effects: MUTATE_LEN },
    LibFuncSpec { class: LibClass::Buffer, name: "put", qualified: "Buffer.put", arity: 1, pure: false, effects: MUTATE_POS },
    LibFuncSpec { class: LibClass::Buffer, name: "putAll", qualified: "Buffer.putAll", arity: 1, pure: false, effects: MUTATE_POS },
    LibFuncSpec { class: LibClass::Buffer, name: "get", qualified: "Buffer.get", arity: 1, pure: true, effects: PURE_CONTENT },
    LibFuncSpec { class: LibClass::Buffer, name: "limit", qualified: "Buffer.limit", arity: 0, pure: true, effects: PURE_LEN },
    LibFuncSpec { class: LibClass::Buffer, name: "position", qualified: "Buffer.position", arity: 0, pure: true, effects: PURE_POS },
    LibFuncSpec { class: LibClass::Buffer, name: "clear", qualified: "Buffer.clear", arity: 0, pure: false, effects: MUTATE_POS },
    LibFuncSpec { class: LibClass::Math, name: "max", qualified: "Math.max", arity: 2, pure: true, effects: PURE_VALUE },
    LibFuncSpec { class: LibClass::Math, name: "pow", qualified: "Math.pow", arity: 2, pure: true, effects: PURE_VALUE },
    LibFuncSpec { class: LibClass::Math, name: "sqrt", qualified: "Math.sqrt", arity: 1, pure: true, effects: PURE_VALUE },
    LibFuncSpec { class: LibClass::Math, name: "random", qualified: "Math.random", arity: 0, pure: false, effects: IO_ONLY },
    LibFuncSpec { class: LibClass::Io, name: "print", qualified: "IO.print", arity: 1, pure: false, effects: IO_ONLY },
    LibFuncSpec { class: LibClass::Io, name: "readInput", qualified: "IO.readInput", arity: 0, pure: false, effects: IO_ONLY },
    LibFuncSpec { class: LibClass::Io, name: "readInputFloat", qualified: "IO.readInputFloat", arity: 0, pure: false, effects: IO_ONLY },
];

pub fn lookup(class: LibClass, name: &str) -> Option<LibFuncKey> {
    LIB_FUNCS
        .iter()
        .position(|f| f.class == class && f.name == name)
        .map(|i| LibFuncKey(i as u16))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qualified_names_unique() {
        let mut names: Vec<&str> = LIB_FUNCS.iter().map(|f| f.qualified).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), LIB_FUNCS.len());
    }

    #[test]
    fn lookup_finds_buffer_put() {
        let key = lookup(LibClass::Buffer, "put").unwrap();
        assert_eq!(key.spec().qualified, "Buffer.put");
        assert!(!key.spec().pure);
    }
}
