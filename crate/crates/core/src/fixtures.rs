//! Small hand-written Java corpora shipped with the crate, used by tests,
//! the acceptance suite and the benches.

use std::path::PathBuf;

use crate::parse::{load_grammar, Forest, SourceFile};

pub struct Fixture {
    pub name: &'static str,
    pub files: &'static [(&'static str, &'static str)],
}

macro_rules! source {
    ($path:literal) => {
        include_str!(concat!("../fixtures/", $path))
    };
}

pub const BASIC: &str = source!("basic/Foo.java");
pub const DISPATCH: &str = source!("dispatch/Bar.java");
pub const OVERLOADS: &str = source!("overloads/Bar.java");
pub const RECEIVERS: &str = source!("receivers/Receivers.java");
pub const STATIC_INIT: &str = source!("static_init/K.java");
pub const SHADOWING: &str = source!("shadowing/S.java");
pub const VARARGS: &str = source!("varargs/V.java");

pub const ALL: &[Fixture] = &[
    Fixture {
        name: "basic",
        files: &[("Foo.java", BASIC)],
    },
    Fixture {
        name: "dispatch",
        files: &[("Bar.java", DISPATCH)],
    },
    Fixture {
        name: "overloads",
        files: &[("Bar.java", OVERLOADS)],
    },
    Fixture {
        name: "receivers",
        files: &[("Receivers.java", RECEIVERS)],
    },
    Fixture {
        name: "static_init",
        files: &[("K.java", STATIC_INIT)],
    },
    Fixture {
        name: "shadowing",
        files: &[("S.java", SHADOWING)],
    },
    Fixture {
        name: "varargs",
        files: &[("V.java", VARARGS)],
    },
    Fixture {
        name: "packages",
        files: &[
            ("app/Main.java", source!("packages/app/Main.java")),
            ("lib/Util.java", source!("packages/lib/Util.java")),
            ("model/Circle.java", source!("packages/model/Circle.java")),
            ("model/Shape.java", source!("packages/model/Shape.java")),
        ],
    },
];

impl Fixture {
    pub fn by_name(name: &str) -> Option<&'static Fixture> {
        ALL.iter().find(|f| f.name == name)
    }

    pub fn forest(&self) -> Forest {
        let grammar = load_grammar("java").expect("java grammar");
        let sources = self
            .files
            .iter()
            .map(|(p, c)| SourceFile::java(*p, *c))
            .collect();
        Forest::from_sources(&grammar, sources).expect("fixture paths are unique")
    }

    /// On-disk directory of the fixture inside the source tree.
    pub fn dir(&self) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join(self.name)
    }
}

/// Parses an ad-hoc set of Java files.
pub fn java_forest(files: &[(&str, &str)]) -> Forest {
    let grammar = load_grammar("java").expect("java grammar");
    let sources = files
        .iter()
        .map(|(p, c)| SourceFile::java(*p, *c))
        .collect();
    Forest::from_sources(&grammar, sources).expect("unique paths")
}
