use std::fmt;

use super::FrontendError;

/// Rooted, ordered tree of grammar node-kind labels.
///
/// Token text is not stored; a node is identified by its kind alone.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AstNode {
    kind: String,
    children: Vec<AstNode>,
}

impl AstNode {
    /// # Panics
    /// If `kind` is empty.
    pub fn new(kind: impl Into<String>, children: Vec<AstNode>) -> Self {
        let kind = kind.into();
        assert!(!kind.is_empty(), "AST node kind must be non-empty");
        Self { kind, children }
    }

    pub fn leaf(kind: impl Into<String>) -> Self {
        Self::new(kind, Vec::new())
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn children(&self) -> &[AstNode] {
        &self.children
    }

    /// Builds a tree from nodes listed in pre-order as `(kind, parent)`,
    /// where `parent` indexes an earlier entry. Entry 0 is the root.
    pub(crate) fn from_preorder(nodes: Vec<(String, Option<usize>)>) -> Self {
        let mut pending: Vec<Vec<AstNode>> = vec![Vec::new(); nodes.len()];
        let mut root = None;
        for (i, (kind, parent)) in nodes.into_iter().enumerate().rev() {
            let mut children = std::mem::take(&mut pending[i]);
            children.reverse();
            let node = AstNode { kind, children };
            match parent {
                Some(p) => pending[p].push(node),
                None => root = Some(node),
            }
        }
        root.expect("pre-order list has a root")
    }

    /// Nodes in pre-order (node, then children left to right).
    pub fn preorder(&self) -> Preorder<'_> {
        Preorder { stack: vec![self] }
    }

    pub fn node_count(&self) -> usize {
        self.preorder().count()
    }

    pub fn depth(&self) -> usize {
        let mut max = 0;
        let mut stack = vec![(self, 1)];
        while let Some((n, d)) = stack.pop() {
            max = max.max(d);
            stack.extend(n.children.iter().map(|c| (c, d + 1)));
        }
        max
    }

    /// Copy of the tree with every kind passed through `f`.
    pub fn map_kinds(&self, mut f: impl FnMut(&str) -> String) -> AstNode {
        let nodes = self
            .preorder_with_parents()
            .into_iter()
            .map(|(n, p)| (f(n.kind()), p))
            .collect();
        Self::from_preorder(nodes)
    }

    /// Pre-order list of nodes with the pre-order index of each parent.
    pub fn preorder_with_parents(&self) -> Vec<(&AstNode, Option<usize>)> {
        let mut out = Vec::new();
        let mut stack: Vec<(&AstNode, Option<usize>)> = vec![(self, None)];
        while let Some((n, parent)) = stack.pop() {
            let idx = out.len();
            out.push((n, parent));
            stack.extend(n.children.iter().rev().map(|c| (c, Some(idx))));
        }
        out
    }

    pub fn contains_kind(&self, kind: &str) -> bool {
        self.preorder().any(|n| n.kind == kind)
    }

    /// Parenthesized form, `(kind child child ...)`.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        enum Step<'a> {
            Open(&'a AstNode),
            Close,
        }
        let mut stack = vec![Step::Open(self)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Open(n) => {
                    if !out.is_empty() && !out.ends_with('(') {
                        out.push(' ');
                    }
                    out.push('(');
                    out.push_str(&n.kind);
                    stack.push(Step::Close);
                    stack.extend(n.children.iter().rev().map(Step::Open));
                }
                Step::Close => out.push(')'),
            }
        }
        out
    }

    /// Parses `(kind child child ...)`. Tokens ending in `:` directly before a
    /// child (tree-sitter field names) are ignored.
    pub fn from_sexpr(text: &str) -> Result<AstNode, FrontendError> {
        SexprParser {
            src: text.as_bytes(),
            pos: 0,
        }
        .parse()
    }
}

impl Drop for AstNode {
    // Iterative teardown; the derived drop recurses once per tree level.
    fn drop(&mut self) {
        let mut stack = std::mem::take(&mut self.children);
        while let Some(mut n) = stack.pop() {
            stack.append(&mut n.children);
        }
    }
}

impl fmt::Debug for AstNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

impl fmt::Display for AstNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_sexpr())
    }
}

pub struct Preorder<'a> {
    stack: Vec<&'a AstNode>,
}

impl<'a> Iterator for Preorder<'a> {
    type Item = &'a AstNode;

    fn next(&mut self) -> Option<Self::Item> {
        let n = self.stack.pop()?;
        self.stack.extend(n.children.iter().rev());
        Some(n)
    }
}

struct SexprParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl SexprParser<'_> {
    fn err(&self, offset: usize, reason: &str) -> FrontendError {
        FrontendError::MalformedSExpr {
            offset,
            reason: reason.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn atom(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            if b.is_ascii_whitespace() || b == b'(' || b == b')' {
                break;
            }
            self.pos += 1;
        }
        // Atom boundaries are ASCII bytes, so the slice stays valid UTF-8.
        std::str::from_utf8(&self.src[start..self.pos]).expect("utf-8 input")
    }

    fn parse(mut self) -> Result<AstNode, FrontendError> {
        let mut nodes: Vec<(String, Option<usize>)> = Vec::new();
        let mut open: Vec<usize> = Vec::new();
        self.skip_ws();
        if self.pos >= self.src.len() {
            return Err(self.err(self.pos, "empty input"));
        }
        loop {
            self.skip_ws();
            if self.pos >= self.src.len() {
                return Err(self.err(self.pos, "unbalanced parentheses: missing ')'"));
            }
            match self.src[self.pos] {
                b'(' => {
                    if open.is_empty() && !nodes.is_empty() {
                        return Err(self.err(self.pos, "more than one tree"));
                    }
                    self.pos += 1;
                    let at = self.pos;
                    let kind = self.atom().to_string();
                    if kind.is_empty() {
                        return Err(self.err(at, "empty kind"));
                    }
                    nodes.push((kind, open.last().copied()));
                    open.push(nodes.len() - 1);
                }
                b')' => {
                    if open.pop().is_none() {
                        return Err(self.err(self.pos, "unbalanced parentheses: unexpected ')'"));
                    }
                    self.pos += 1;
                    if open.is_empty() {
                        self.skip_ws();
                        if self.pos < self.src.len() {
                            return Err(self.err(self.pos, "trailing input after tree"));
                        }
                        return Ok(AstNode::from_preorder(nodes));
                    }
                }
                _ => {
                    let at = self.pos;
                    if open.is_empty() {
                        return Err(self.err(at, "expected '('"));
                    }
                    let token = self.atom();
                    if !token.ends_with(':') {
                        return Err(self.err(at, "bare atom; children must be parenthesized"));
                    }
                }
            }
        }
    }
}
