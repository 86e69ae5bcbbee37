//! A recognizer for the DOT language as published with Graphviz:
//!
//! ```text
//! graph     : [strict] (graph | digraph) [ID] '{' stmt_list '}'
//! stmt_list : [stmt [';'] stmt_list]
//! stmt      : node_stmt | edge_stmt | attr_stmt | ID '=' ID | subgraph
//! attr_stmt : (graph | node | edge) attr_list
//! attr_list : '[' [a_list] ']' [attr_list]
//! a_list    : ID '=' ID [(';' | ',')] [a_list]
//! edge_stmt : (node_id | subgraph) edgeRHS [attr_list]
//! edgeRHS   : edgeop (node_id | subgraph) [edgeRHS]
//! node_stmt : node_id [attr_list]
//! node_id   : ID [port]
//! port      : ':' ID [':' ID]
//! subgraph  : [subgraph [ID]] '{' stmt_list '}'
//! ```
//!
//! IDs are identifiers, numerals, double-quoted strings or HTML strings.
#![allow(dead_code)]

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Id(String),
    Keyword(String),
    Punct(char),
    EdgeOp(&'static str),
}

const KEYWORDS: [&str; 6] = ["strict", "graph", "digraph", "node", "edge", "subgraph"];

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let cs: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && cs.get(i + 1) == Some(&'/') || c == '#' {
            while i < cs.len() && cs[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && cs.get(i + 1) == Some(&'*') {
            i += 2;
            while i + 1 < cs.len() && !(cs[i] == '*' && cs[i + 1] == '/') {
                i += 1;
            }
            i += 2;
        } else if c == '-' && matches!(cs.get(i + 1), Some('>') | Some('-')) {
            out.push(Tok::EdgeOp(if cs[i + 1] == '>' { "->" } else { "--" }));
            i += 2;
        } else if "{}[];,=:".contains(c) {
            out.push(Tok::Punct(c));
            i += 1;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match cs.get(i) {
                    None => return Err("unterminated string".into()),
                    Some('\\') if cs.get(i + 1).is_some() => {
                        s.push(cs[i]);
                        s.push(cs[i + 1]);
                        i += 2;
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some(&ch) => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push(Tok::Id(s));
        } else if c == '<' {
            let mut depth = 0;
            let start = i;
            loop {
                match cs.get(i) {
                    None => return Err("unterminated HTML string".into()),
                    Some('<') => depth += 1,
                    Some('>') => {
                        depth -= 1;
                        if depth == 0 {
                            i += 1;
                            break;
                        }
                    }
                    _ => {}
                }
                i += 1;
            }
            out.push(Tok::Id(cs[start..i].iter().collect()));
        } else if c == '-' || c == '.' || c.is_ascii_digit() {
            let start = i;
            if c == '-' {
                i += 1;
            }
            let mut digits = 0;
            let mut dots = 0;
            while i < cs.len() && (cs[i].is_ascii_digit() || cs[i] == '.') {
                if cs[i] == '.' {
                    dots += 1;
                } else {
                    digits += 1;
                }
                i += 1;
            }
            if digits == 0 || dots > 1 {
                return Err(format!("bad numeral at {start}"));
            }
            out.push(Tok::Id(cs[start..i].iter().collect()));
        } else if c.is_alphabetic() || c == '_' || (c as u32) >= 0x80 {
            let start = i;
            while i < cs.len() && (cs[i].is_alphanumeric() || cs[i] == '_' || (cs[i] as u32) >= 0x80) {
                i += 1;
            }
            let word: String = cs[start..i].iter().collect();
            let lower = word.to_ascii_lowercase();
            out.push(if KEYWORDS.contains(&lower.as_str()) {
                Tok::Keyword(lower)
            } else {
                Tok::Id(word)
            });
        } else {
            return Err(format!("unexpected character {c:?} at {i}"));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    edge_op: &'static str,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), String> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(format!("expected {t:?} at token {}, found {:?}", self.pos, self.peek()))
        }
    }

    fn id(&mut self) -> Result<(), String> {
        match self.peek() {
            Some(Tok::Id(_)) => {
                self.pos += 1;
                Ok(())
            }
            other => Err(format!("expected ID at token {}, found {other:?}", self.pos)),
        }
    }

    fn keyword(&mut self, k: &str) -> bool {
        self.eat(&Tok::Keyword(k.into()))
    }

    fn graph(&mut self) -> Result<(), String> {
        self.keyword("strict");
        self.edge_op = if self.keyword("digraph") {
            "->"
        } else if self.keyword("graph") {
            "--"
        } else {
            return Err("expected graph or digraph".into());
        };
        if matches!(self.peek(), Some(Tok::Id(_))) {
            self.pos += 1;
        }
        self.expect(Tok::Punct('{'))?;
        self.stmt_list()?;
        self.expect(Tok::Punct('}'))?;
        if self.pos != self.toks.len() {
            return Err(format!("trailing tokens from {}", self.pos));
        }
        Ok(())
    }

    fn stmt_list(&mut self) -> Result<(), String> {
        while !matches!(self.peek(), Some(Tok::Punct('}')) | None) {
            self.stmt()?;
            self.eat(&Tok::Punct(';'));
        }
        Ok(())
    }

    fn stmt(&mut self) -> Result<(), String> {
        for k in ["graph", "node", "edge"] {
            if self.keyword(k) {
                return self.attr_list(true);
            }
        }
        if matches!(self.peek(), Some(Tok::Id(_))) && self.toks.get(self.pos + 1) == Some(&Tok::Punct('=')) {
            self.pos += 2;
            return self.id();
        }
        self.operand()?;
        while let Some(Tok::EdgeOp(op)) = self.peek() {
            if *op != self.edge_op {
                return Err(format!("edge operator {op} in a graph using {}", self.edge_op));
            }
            self.pos += 1;
            self.operand()?;
        }
        self.attr_list(false)
    }

    fn operand(&mut self) -> Result<(), String> {
        if matches!(self.peek(), Some(Tok::Keyword(k)) if k == "subgraph") || self.peek() == Some(&Tok::Punct('{')) {
            return self.subgraph();
        }
        self.id()?;
        if self.eat(&Tok::Punct(':')) {
            self.id()?;
            if self.eat(&Tok::Punct(':')) {
                self.id()?;
            }
        }
        Ok(())
    }

    fn subgraph(&mut self) -> Result<(), String> {
        if self.keyword("subgraph") && matches!(self.peek(), Some(Tok::Id(_))) {
            self.pos += 1;
        }
        self.expect(Tok::Punct('{'))?;
        self.stmt_list()?;
        self.expect(Tok::Punct('}'))
    }

    fn attr_list(&mut self, required: bool) -> Result<(), String> {
        if required && self.peek() != Some(&Tok::Punct('[')) {
            return Err(format!("expected attribute list at token {}", self.pos));
        }
        while self.eat(&Tok::Punct('[')) {
            while !self.eat(&Tok::Punct(']')) {
                self.id()?;
                self.expect(Tok::Punct('='))?;
                self.id()?;
                if !self.eat(&Tok::Punct(',')) {
                    self.eat(&Tok::Punct(';'));
                }
            }
        }
        Ok(())
    }
}

/// Accepts `src` iff it derives from the DOT `graph` production.
pub fn check(src: &str) -> Result<(), String> {
    let toks = lex(src)?;
    Parser { toks, pos: 0, edge_op: "->" }.graph()
}

#[cfg(test)]
mod tests {
    use super::check;

    #[test]
    fn recognizer_sanity() {
        assert!(check("digraph { a -> b [label=\"x\"]; }").is_ok());
        assert!(check("strict graph g { node [shape=box] a -- b -- c; x = y }").is_ok());
        assert!(check("digraph { a -- b }").is_err());
        assert!(check("digraph { a -> }").is_err());
        assert!(check("digraph { a [label=\"open] }").is_err());
    }
}
