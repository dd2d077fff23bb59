//! The example programs shipped with the library.

pub struct Program {
    pub name: &'static str,
    pub source: &'static str,
}

pub const PROGRAMS: &[Program] = &[
    Program { name: "hadamard", source: include_str!("../corpus/hadamard.hyrql") },
    Program { name: "len", source: include_str!("../corpus/len.hyrql") },
    Program { name: "ackermann", source: include_str!("../corpus/ackermann.hyrql") },
    Program { name: "map", source: include_str!("../corpus/map.hyrql") },
    Program { name: "keygen", source: include_str!("../corpus/keygen.hyrql") },
    Program { name: "qs", source: include_str!("../corpus/qs.hyrql") },
    Program { name: "remark", source: include_str!("../corpus/remark.hyrql") },
];

pub fn get(name: &str) -> Option<&'static Program> {
    PROGRAMS.iter().find(|p| p.name == name)
}

/// Parses a shipped program; they are known to be well formed.
pub fn load(name: &str) -> crate::parser::SourceFile {
    let p = get(name).unwrap_or_else(|| panic!("no corpus program `{name}`"));
    crate::parser::parse(p.source).unwrap_or_else(|e| panic!("{name}: {e}"))
}
