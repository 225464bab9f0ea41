//! Parses the same function in Java, C++ and Python and shows how the
//! unification table brings the three trees onto shared kind names.

use uast::frontend::{parse_source, unify_ast, GrammarRegistry, UnificationTable};
use uast::lang::Language;

const SNIPPETS: [(Language, &str); 3] = [
    (Language::Java, "public class Add {\n    public static int add(int a, int b) {\n        return a + b;\n    }\n}\n"),
    (Language::Cpp, "int add(int a, int b) {\n    return a + b;\n}\n"),
    (Language::Python, "def add(a, b):\n    return a + b\n"),
];

fn main() -> anyhow::Result<()> {
    let registry = GrammarRegistry::with_builtin();
    let table = UnificationTable::builtin();
    println!("table hash {}", table.hash());
    for (lang, code) in SNIPPETS {
        let parsed = parse_source(&registry, code, lang)?;
        let unified = unify_ast(&parsed.root, lang, &table);
        println!("\n== {lang}");
        println!("raw:     {}", parsed.root.to_sexpr());
        println!("unified: {}", unified.root().to_sexpr());
    }
    Ok(())
}
