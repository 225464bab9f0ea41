//! Small synthetic corpora of algorithm implementations.
//!
//! Each class is one algorithm; every file is a fresh surface variant
//! (identifier names, loop forms, swap and increment styles, recursion
//! versus iteration, extra statements, literals and comments), so the
//! classifier has to pick up structure rather than memorize text.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DatasetError;
use crate::lang::Language;

/// Algorithm classes the generator can write, in order.
pub const CLASSES: [&str; 4] = ["binary_search", "bubble_sort", "factorial", "gcd"];

/// Languages the generator has templates for.
pub const LANGUAGES: [Language; 2] = [Language::Java, Language::Python];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthOptions {
    /// How many of [`CLASSES`] to use, from the front.
    pub classes: usize,
    pub languages: Vec<Language>,
    pub per_cell: usize,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            classes: 3,
            languages: LANGUAGES.to_vec(),
            per_cell: 60,
            seed: 42,
        }
    }
}

const ARRAYS: [&str; 8] = ["a", "arr", "nums", "values", "data", "xs", "items", "seq"];
const INDEXES: [&str; 6] = ["i", "k", "p", "idx", "pos", "u"];
const INNER: [&str; 5] = ["j", "m", "q", "w", "v"];
const SCALARS: [&str; 8] = ["n", "x", "y", "num", "val", "left", "right", "z"];
const TEMPS: [&str; 5] = ["tmp", "t", "swap", "hold", "aux"];
const FUNCS: [&str; 8] = [
    "solve", "run", "compute", "work", "helper", "process", "calc", "go",
];
const CLASS_NAMES: [&str; 6] = ["Main", "Solution", "Program", "App", "Task", "Runner"];
const COMMENTS: [&str; 5] = [
    "simple version",
    "TODO: tidy up",
    "iterative",
    "from class notes",
    "quick check",
];

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn pick<'a>(&mut self, options: &[&'a str]) -> &'a str {
        options.choose(&mut self.rng).expect("non-empty options")
    }

    fn coin(&mut self) -> bool {
        self.rng.random_bool(0.5)
    }

    fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.random_range(lo..=hi)
    }

    fn literals(&mut self) -> String {
        let n = self.int(4, 9);
        (0..n)
            .map(|_| self.int(-50, 99).to_string())
            .collect::<Vec<_>>()
            .join(", ")
    }

    /// Distinct names for a set of roles.
    fn names(&mut self, pools: &[&[&'static str]]) -> Vec<&'static str> {
        let mut out: Vec<&'static str> = Vec::new();
        for pool in pools {
            let free: Vec<&'static str> =
                pool.iter().copied().filter(|n| !out.contains(n)).collect();
            out.push(
                free.choose(&mut self.rng)
                    .copied()
                    .expect("pools are large enough"),
            );
        }
        out
    }
}

fn fill(template: &str, vars: &[(&str, String)]) -> String {
    let mut out = template.to_string();
    for (k, v) in vars {
        out = out.replace(&format!("@{k}@"), v);
    }
    out
}

fn java_incr(g: &mut Gen, var: &str) -> String {
    match g.int(0, 2) {
        0 => format!("{var}++"),
        1 => format!("{var} += 1"),
        _ => format!("{var} = {var} + 1"),
    }
}

fn py_incr(g: &mut Gen, var: &str) -> String {
    if g.coin() {
        format!("{var} += 1")
    } else {
        format!("{var} = {var} + 1")
    }
}

fn java_comment(g: &mut Gen) -> String {
    if g.coin() {
        format!("    // {}\n", g.pick(&COMMENTS))
    } else {
        String::new()
    }
}

fn py_comment(g: &mut Gen) -> String {
    if g.coin() {
        format!("# {}\n", g.pick(&COMMENTS))
    } else {
        String::new()
    }
}

fn java_print(g: &mut Gen, expr: &str) -> String {
    match g.int(0, 2) {
        0 => format!("System.out.println({expr});"),
        1 => format!("System.out.println(\"result: \" + {expr});"),
        _ => format!("System.out.printf(\"%s%n\", {expr});"),
    }
}

fn py_print(g: &mut Gen, expr: &str) -> String {
    match g.int(0, 2) {
        0 => format!("print({expr})"),
        1 => format!("print(\"result:\", {expr})"),
        _ => format!("print(f\"{{{expr}}}\")"),
    }
}

fn java_file(g: &mut Gen, body: String, main_body: String) -> String {
    let class = g.pick(&CLASS_NAMES);
    let import = if g.coin() {
        "import java.util.*;\n\n"
    } else {
        ""
    };
    format!(
        "{import}public class {class} {{\n{}{body}\n    public static void main(String[] args) {{\n{main_body}    }}\n}}\n",
        java_comment(g)
    )
}

fn py_file(g: &mut Gen, body: String, main_body: String) -> String {
    let comment = py_comment(g);
    if g.coin() {
        let indented: String = main_body.lines().map(|l| format!("    {l}\n")).collect();
        format!("{comment}{body}\n\nif __name__ == \"__main__\":\n{indented}")
    } else {
        format!("{comment}{body}\n\n{main_body}")
    }
}

fn bubble_java(g: &mut Gen) -> String {
    let v = g.names(&[&ARRAYS, &INDEXES, &INNER, &SCALARS, &TEMPS, &FUNCS, &ARRAYS]);
    let (a, i, j, n, t, f, d) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    let cmp = if g.coin() { ">" } else { "<" };
    let swap = if g.coin() {
        "                    int @t@ = @a@[@j@];\n                    @a@[@j@] = @a@[@j@ + 1];\n                    @a@[@j@ + 1] = @t@;\n"
    } else {
        "                    int @t@ = @a@[@j@ + 1];\n                    @a@[@j@ + 1] = @a@[@j@];\n                    @a@[@j@] = @t@;\n"
    };
    let flag = g.coin();
    let inner = format!(
        "            for (int @j@ = 0; @j@ < @n@ - @i@ - 1; {}) {{\n                if (@a@[@j@] {cmp} @a@[@j@ + 1]) {{\n{swap}{}                }}\n            }}\n",
        java_incr(g, j),
        if flag { "                    swapped = true;\n" } else { "" }
    );
    let outer = if g.coin() {
        format!(
            "        for (int @i@ = 0; @i@ < @n@ - 1; {}) {{\n{}{inner}{}        }}\n",
            java_incr(g, i),
            if flag {
                "            boolean swapped = false;\n"
            } else {
                ""
            },
            if flag {
                "            if (!swapped) break;\n"
            } else {
                ""
            }
        )
    } else {
        format!(
            "        int @i@ = 0;\n        while (@i@ < @n@ - 1) {{\n{}{inner}{}            {};\n        }}\n",
            if flag { "            boolean swapped = false;\n" } else { "" },
            if flag { "            if (!swapped) break;\n" } else { "" },
            java_incr(g, i)
        )
    };
    let body = format!(
        "    static void @f@(int[] @a@) {{\n        int @n@ = @a@.length;\n{outer}    }}\n"
    );
    let print = if g.coin() {
        format!("        {}\n", java_print(g, "Arrays.toString(@d@)"))
    } else {
        "        for (int @i@ = 0; @i@ < @d@.length; @i@++) {\n            System.out.print(@d@[@i@] + \" \");\n        }\n        System.out.println();\n".to_string()
    };
    let main_body = format!(
        "        int[] @d@ = {{{}}};\n        @f@(@d@);\n{print}",
        g.literals()
    );
    let vars = [
        ("a", a),
        ("i", i),
        ("j", j),
        ("n", n),
        ("t", t),
        ("f", f),
        ("d", d),
    ]
    .map(|(k, v)| (k, v.to_string()));
    fill(&java_file(g, body, main_body), &vars)
}

fn bubble_py(g: &mut Gen) -> String {
    let v = g.names(&[&ARRAYS, &INDEXES, &INNER, &SCALARS, &TEMPS, &FUNCS, &ARRAYS]);
    let (a, i, j, n, t, f, d) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    let cmp = if g.coin() { ">" } else { "<" };
    let swap = if g.coin() {
        "                @a@[@j@], @a@[@j@ + 1] = @a@[@j@ + 1], @a@[@j@]\n".to_string()
    } else {
        "                @t@ = @a@[@j@]\n                @a@[@j@] = @a@[@j@ + 1]\n                @a@[@j@ + 1] = @t@\n".to_string()
    };
    let flag = g.coin();
    let inner = format!(
        "        for @j@ in range(@n@ - @i@ - 1):\n            if @a@[@j@] {cmp} @a@[@j@ + 1]:\n{swap}{}",
        if flag { "                swapped = True\n" } else { "" }
    );
    let pre = if flag {
        "        swapped = False\n"
    } else {
        ""
    };
    let post = if flag {
        "        if not swapped:\n            break\n"
    } else {
        ""
    };
    let outer = if g.coin() {
        format!("    for @i@ in range(@n@ - 1):\n{pre}{inner}{post}")
    } else {
        format!(
            "    @i@ = 0\n    while @i@ < @n@ - 1:\n{pre}{inner}{post}        {}\n",
            py_incr(g, i)
        )
    };
    let ret = if g.coin() { "    return @a@\n" } else { "" };
    let body = format!("def @f@(@a@):\n    @n@ = len(@a@)\n{outer}{ret}");
    let main_body = format!(
        "@d@ = [{}]\n@f@(@d@)\n{}\n",
        g.literals(),
        py_print(g, "@d@")
    );
    let vars = [
        ("a", a),
        ("i", i),
        ("j", j),
        ("n", n),
        ("t", t),
        ("f", f),
        ("d", d),
    ]
    .map(|(k, v)| (k, v.to_string()));
    fill(&py_file(g, body, main_body), &vars)
}

fn search_java(g: &mut Gen) -> String {
    let v = g.names(&[
        &ARRAYS, &SCALARS, &SCALARS, &SCALARS, &INDEXES, &FUNCS, &ARRAYS,
    ]);
    let (a, lo, hi, key, mid, f, d) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    let mid_expr = if g.coin() {
        "(@lo@ + @hi@) / 2"
    } else {
        "@lo@ + (@hi@ - @lo@) / 2"
    };
    let body = if g.coin() {
        let decl = if g.coin() {
            "        int @lo@ = 0, @hi@ = @a@.length - 1;\n"
        } else {
            "        int @lo@ = 0;\n        int @hi@ = @a@.length - 1;\n"
        };
        let branch = if g.coin() {
            "            if (@a@[@mid@] == @key@) {\n                return @mid@;\n            } else if (@a@[@mid@] < @key@) {\n                @lo@ = @mid@ + 1;\n            } else {\n                @hi@ = @mid@ - 1;\n            }\n"
        } else {
            "            if (@a@[@mid@] == @key@) return @mid@;\n            if (@a@[@mid@] < @key@) @lo@ = @mid@ + 1;\n            else @hi@ = @mid@ - 1;\n"
        };
        format!(
            "    static int @f@(int[] @a@, int @key@) {{\n{decl}        while (@lo@ <= @hi@) {{\n            int @mid@ = {mid_expr};\n{branch}        }}\n        return -1;\n    }}\n"
        )
    } else {
        format!(
            "    static int @f@(int[] @a@, int @key@, int @lo@, int @hi@) {{\n        if (@lo@ > @hi@) {{\n            return -1;\n        }}\n        int @mid@ = {mid_expr};\n        if (@a@[@mid@] == @key@) {{\n            return @mid@;\n        }}\n        if (@a@[@mid@] < @key@) {{\n            return @f@(@a@, @key@, @mid@ + 1, @hi@);\n        }}\n        return @f@(@a@, @key@, @lo@, @mid@ - 1);\n    }}\n\n    static int @f@(int[] @a@, int @key@) {{\n        return @f@(@a@, @key@, 0, @a@.length - 1);\n    }}\n"
        )
    };
    let mut sorted: Vec<i64> = (0..g.int(5, 10)).map(|_| g.int(-20, 120)).collect();
    sorted.sort_unstable();
    let lits = sorted
        .iter()
        .map(i64::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    let target = g.int(-20, 120);
    let main_body = format!(
        "        int[] @d@ = {{{lits}}};\n        int @mid@ = @f@(@d@, {target});\n        {}\n",
        java_print(g, "@mid@")
    );
    let vars = [
        ("a", a),
        ("lo", lo),
        ("hi", hi),
        ("key", key),
        ("mid", mid),
        ("f", f),
        ("d", d),
    ]
    .map(|(k, v)| (k, v.to_string()));
    fill(&java_file(g, body, main_body), &vars)
}

fn search_py(g: &mut Gen) -> String {
    let v = g.names(&[
        &ARRAYS, &SCALARS, &SCALARS, &SCALARS, &INDEXES, &FUNCS, &ARRAYS,
    ]);
    let (a, lo, hi, key, mid, f, d) = (v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
    let mid_expr = if g.coin() {
        "(@lo@ + @hi@) // 2"
    } else {
        "@lo@ + (@hi@ - @lo@) // 2"
    };
    let body = if g.coin() {
        let init = if g.coin() {
            "    @lo@, @hi@ = 0, len(@a@) - 1\n"
        } else {
            "    @lo@ = 0\n    @hi@ = len(@a@) - 1\n"
        };
        format!(
            "def @f@(@a@, @key@):\n{init}    while @lo@ <= @hi@:\n        @mid@ = {mid_expr}\n        if @a@[@mid@] == @key@:\n            return @mid@\n        elif @a@[@mid@] < @key@:\n            @lo@ = @mid@ + 1\n        else:\n            @hi@ = @mid@ - 1\n    return -1\n"
        )
    } else {
        format!(
            "def @f@(@a@, @key@, @lo@=0, @hi@=None):\n    if @hi@ is None:\n        @hi@ = len(@a@) - 1\n    if @lo@ > @hi@:\n        return -1\n    @mid@ = {mid_expr}\n    if @a@[@mid@] == @key@:\n        return @mid@\n    if @a@[@mid@] < @key@:\n        return @f@(@a@, @key@, @mid@ + 1, @hi@)\n    return @f@(@a@, @key@, @lo@, @mid@ - 1)\n"
        )
    };
    let mut sorted: Vec<i64> = (0..g.int(5, 10)).map(|_| g.int(-20, 120)).collect();
    sorted.sort_unstable();
    let lits = sorted
        .iter()
        .map(i64::to_string)
        .collect::<Vec<_>>()
        .join(", ");
    let target = g.int(-20, 120);
    let main_body = format!(
        "@d@ = [{lits}]\n{}\n",
        py_print(g, &format!("@f@(@d@, {target})"))
    );
    let vars = [
        ("a", a),
        ("lo", lo),
        ("hi", hi),
        ("key", key),
        ("mid", mid),
        ("f", f),
        ("d", d),
    ]
    .map(|(k, v)| (k, v.to_string()));
    fill(&py_file(g, body, main_body), &vars)
}

fn factorial_java(g: &mut Gen) -> String {
    let v = g.names(&[&SCALARS, &SCALARS, &INDEXES, &FUNCS]);
    let (n, r, i, f) = (v[0], v[1], v[2], v[3]);
    let ty = if g.coin() { "long" } else { "int" };
    let body = match g.int(0, 2) {
        0 => format!(
            "    static {ty} @f@(int @n@) {{\n        {ty} @r@ = 1;\n        for (int @i@ = 2; @i@ <= @n@; {}) {{\n            @r@ *= @i@;\n        }}\n        return @r@;\n    }}\n",
            java_incr(g, i)
        ),
        1 => format!(
            "    static {ty} @f@(int @n@) {{\n        {ty} @r@ = 1;\n        int @i@ = @n@;\n        while (@i@ > 1) {{\n            @r@ = @r@ * @i@;\n            @i@--;\n        }}\n        return @r@;\n    }}\n"
        ),
        _ => {
            if g.coin() {
                format!("    static {ty} @f@(int @n@) {{\n        if (@n@ <= 1) {{\n            return 1;\n        }}\n        return @n@ * @f@(@n@ - 1);\n    }}\n")
            } else {
                format!("    static {ty} @f@(int @n@) {{\n        return @n@ <= 1 ? 1 : @n@ * @f@(@n@ - 1);\n    }}\n")
            }
        }
    };
    let arg = g.int(3, 12);
    let main_body = if g.coin() {
        format!("        {}\n", java_print(g, &format!("@f@({arg})")))
    } else {
        format!(
            "        for (int @i@ = 1; @i@ <= {arg}; @i@++) {{\n            {}\n        }}\n",
            java_print(g, "@f@(@i@)")
        )
    };
    let vars = [("n", n), ("r", r), ("i", i), ("f", f)].map(|(k, v)| (k, v.to_string()));
    fill(&java_file(g, body, main_body), &vars)
}

fn factorial_py(g: &mut Gen) -> String {
    let v = g.names(&[&SCALARS, &SCALARS, &INDEXES, &FUNCS]);
    let (n, r, i, f) = (v[0], v[1], v[2], v[3]);
    let body = match g.int(0, 2) {
        0 => "def @f@(@n@):\n    @r@ = 1\n    for @i@ in range(2, @n@ + 1):\n        @r@ *= @i@\n    return @r@\n".to_string(),
        1 => "def @f@(@n@):\n    @r@ = 1\n    @i@ = @n@\n    while @i@ > 1:\n        @r@ = @r@ * @i@\n        @i@ -= 1\n    return @r@\n".to_string(),
        _ => {
            if g.coin() {
                "def @f@(@n@):\n    if @n@ <= 1:\n        return 1\n    return @n@ * @f@(@n@ - 1)\n".to_string()
            } else {
                "def @f@(@n@):\n    return 1 if @n@ <= 1 else @n@ * @f@(@n@ - 1)\n".to_string()
            }
        }
    };
    let arg = g.int(3, 12);
    let main_body = if g.coin() {
        format!("{}\n", py_print(g, &format!("@f@({arg})")))
    } else {
        format!(
            "for @i@ in range(1, {}):\n    {}\n",
            arg + 1,
            py_print(g, "@f@(@i@)")
        )
    };
    let vars = [("n", n), ("r", r), ("i", i), ("f", f)].map(|(k, v)| (k, v.to_string()));
    fill(&py_file(g, body, main_body), &vars)
}

fn gcd_java(g: &mut Gen) -> String {
    let v = g.names(&[&SCALARS, &SCALARS, &TEMPS, &FUNCS]);
    let (x, y, t, f) = (v[0], v[1], v[2], v[3]);
    let body = match g.int(0, 2) {
        0 => "    static int @f@(int @x@, int @y@) {\n        while (@y@ != 0) {\n            int @t@ = @y@;\n            @y@ = @x@ % @y@;\n            @x@ = @t@;\n        }\n        return @x@;\n    }\n".to_string(),
        1 => "    static int @f@(int @x@, int @y@) {\n        if (@y@ == 0) {\n            return @x@;\n        }\n        return @f@(@y@, @x@ % @y@);\n    }\n".to_string(),
        _ => "    static int @f@(int @x@, int @y@) {\n        return @y@ == 0 ? @x@ : @f@(@y@, @x@ % @y@);\n    }\n".to_string(),
    };
    let (p, q) = (g.int(2, 500), g.int(2, 500));
    let main_body = if g.coin() {
        format!("        {}\n", java_print(g, &format!("@f@({p}, {q})")))
    } else {
        format!(
            "        int @t@ = @f@({p}, {q});\n        {}\n",
            java_print(g, "@t@")
        )
    };
    let vars = [("x", x), ("y", y), ("t", t), ("f", f)].map(|(k, v)| (k, v.to_string()));
    fill(&java_file(g, body, main_body), &vars)
}

fn gcd_py(g: &mut Gen) -> String {
    let v = g.names(&[&SCALARS, &SCALARS, &TEMPS, &FUNCS]);
    let (x, y, t, f) = (v[0], v[1], v[2], v[3]);
    let body = match g.int(0, 2) {
        0 => "def @f@(@x@, @y@):\n    while @y@ != 0:\n        @x@, @y@ = @y@, @x@ % @y@\n    return @x@\n".to_string(),
        1 => "def @f@(@x@, @y@):\n    while @y@:\n        @t@ = @y@\n        @y@ = @x@ % @y@\n        @x@ = @t@\n    return @x@\n".to_string(),
        _ => "def @f@(@x@, @y@):\n    if @y@ == 0:\n        return @x@\n    return @f@(@y@, @x@ % @y@)\n".to_string(),
    };
    let (p, q) = (g.int(2, 500), g.int(2, 500));
    let main_body = format!("{}\n", py_print(g, &format!("@f@({p}, {q})")));
    let vars = [("x", x), ("y", y), ("t", t), ("f", f)].map(|(k, v)| (k, v.to_string()));
    fill(&py_file(g, body, main_body), &vars)
}

/// One random implementation of `class` in `language`.
pub fn generate_source(class: &str, language: Language, rng: &mut ChaCha8Rng) -> Option<String> {
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(rng.random()),
    };
    let text = match (class, language) {
        ("bubble_sort", Language::Java) => bubble_java(&mut g),
        ("bubble_sort", Language::Python) => bubble_py(&mut g),
        ("binary_search", Language::Java) => search_java(&mut g),
        ("binary_search", Language::Python) => search_py(&mut g),
        ("factorial", Language::Java) => factorial_java(&mut g),
        ("factorial", Language::Python) => factorial_py(&mut g),
        ("gcd", Language::Java) => gcd_java(&mut g),
        ("gcd", Language::Python) => gcd_py(&mut g),
        _ => return None,
    };
    Some(text)
}

/// Writes `root/<class>/<language>/<nnn>.<ext>` and returns the paths.
///
/// Byte-identical variants are regenerated so every file survives dedup.
pub fn generate_corpus(root: &Path, options: &SynthOptions) -> Result<Vec<PathBuf>, DatasetError> {
    if options.classes == 0 || options.classes > CLASSES.len() {
        return Err(DatasetError::EmptyCorpus);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut written = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for class in &CLASSES[..options.classes] {
        for &lang in &options.languages {
            let dir = root.join(class).join(lang.id());
            fs::create_dir_all(&dir).map_err(|e| DatasetError::Io {
                path: dir.display().to_string(),
                reason: e.to_string(),
            })?;
            for n in 0..options.per_cell {
                let text = loop {
                    let text = generate_source(class, lang, &mut rng)
                        .ok_or_else(|| DatasetError::UnknownExtension(format!("{class}/{lang}")))?;
                    if seen.insert(text.clone()) {
                        break text;
                    }
                };
                let path = dir.join(format!("{n:03}.{}", lang.extension()));
                fs::write(&path, text).map_err(|e| DatasetError::Io {
                    path: path.display().to_string(),
                    reason: e.to_string(),
                })?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

#[cfg(all(test, feature = "grammars"))]
mod tests {
    use super::*;
    use crate::frontend::GrammarRegistry;

    #[test]
    fn every_variant_parses_cleanly() {
        let registry = GrammarRegistry::with_builtin();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for class in CLASSES {
            for lang in LANGUAGES {
                for _ in 0..40 {
                    let text = generate_source(class, lang, &mut rng).unwrap();
                    let parsed = registry.parse_source(&text, lang).unwrap();
                    assert!(!parsed.has_errors, "{class}/{lang}:\n{text}");
                }
            }
        }
    }

    #[test]
    fn generation_is_seeded() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let opts = SynthOptions {
            per_cell: 3,
            ..Default::default()
        };
        let pa = generate_corpus(a.path(), &opts).unwrap();
        let pb = generate_corpus(b.path(), &opts).unwrap();
        assert_eq!(pa.len(), 18);
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap());
        }
    }
}
