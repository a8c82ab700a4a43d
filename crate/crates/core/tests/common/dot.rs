//! A small checker for the DOT language: tokenizer plus recursive-descent
//! parser over graph, subgraph, node, edge and attribute statements.

#[derive(Debug, Clone, PartialEq)]
enum T {
    Id(String),
    Quoted(String),
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Eq,
    Colon,
    Arrow,
    Line,
}

#[derive(Debug, Default)]
pub struct DotStats {
    pub directed: bool,
    pub edges: usize,
    pub dashed_edges: usize,
    pub nodes: Vec<String>,
    /// Subgraph name and the name of the subgraph directly enclosing it.
    pub subgraphs: Vec<(String, Option<String>)>,
    /// `label` attributes of subgraphs, by subgraph name.
    pub labels: Vec<(String, String)>,
}

impl DotStats {
    pub fn parent_of(&self, name: &str) -> Option<&str> {
        self.subgraphs.iter().find(|(n, _)| n == name).and_then(|(_, p)| p.as_deref())
    }
}

fn tokenize(src: &str) -> Result<Vec<T>, String> {
    let c: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < c.len() {
        let ch = c[i];
        match ch {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '{' => {
                out.push(T::LBrace);
                i += 1
            }
            '}' => {
                out.push(T::RBrace);
                i += 1
            }
            '[' => {
                out.push(T::LBracket);
                i += 1
            }
            ']' => {
                out.push(T::RBracket);
                i += 1
            }
            ';' => {
                out.push(T::Semi);
                i += 1
            }
            ',' => {
                out.push(T::Comma);
                i += 1
            }
            '=' => {
                out.push(T::Eq);
                i += 1
            }
            ':' => {
                out.push(T::Colon);
                i += 1
            }
            '-' if c.get(i + 1) == Some(&'>') => {
                out.push(T::Arrow);
                i += 2
            }
            '-' if c.get(i + 1) == Some(&'-') => {
                out.push(T::Line);
                i += 2
            }
            '"' => {
                let mut s = String::new();
                i += 1;
                loop {
                    match c.get(i) {
                        None => return Err("unterminated string".into()),
                        Some('"') => {
                            i += 1;
                            break;
                        }
                        Some('\\') => {
                            let next = *c.get(i + 1).ok_or("dangling escape")?;
                            if next != '"' && next != '\\' {
                                s.push('\\');
                            }
                            s.push(next);
                            i += 2;
                        }
                        Some(&x) => {
                            s.push(x);
                            i += 1
                        }
                    }
                }
                out.push(T::Quoted(s));
            }
            x if x.is_alphanumeric() || x == '_' || x == '.' || x == '-' => {
                let start = i;
                let numeric = x.is_ascii_digit() || x == '.' || x == '-';
                while i < c.len() && (c[i].is_alphanumeric() || c[i] == '_' || c[i] == '.') {
                    i += 1;
                }
                if x == '-' {
                    i = i.max(start + 1);
                }
                let word: String = c[start..i].iter().collect();
                if numeric && word.parse::<f64>().is_err() {
                    return Err(format!("bad numeral `{word}`"));
                }
                if !numeric && word.contains('.') {
                    return Err(format!("unquoted id `{word}` contains a dot"));
                }
                out.push(T::Id(word));
            }
            other => return Err(format!("unexpected character `{other}`")),
        }
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &["node", "edge", "graph", "digraph", "subgraph", "strict"];

struct P {
    t: Vec<T>,
    i: usize,
    stats: DotStats,
    stack: Vec<String>,
    anon: usize,
}

impl P {
    fn peek(&self) -> Option<&T> {
        self.t.get(self.i)
    }

    fn next(&mut self) -> Option<T> {
        let t = self.t.get(self.i).cloned();
        self.i += 1;
        t
    }

    fn expect(&mut self, want: T) -> Result<(), String> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(format!("expected {want:?}, found {other:?} at token {}", self.i - 1)),
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(T::Id(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn id(&mut self) -> Result<String, String> {
        match self.next() {
            Some(T::Id(w)) if !KEYWORDS.iter().any(|k| w.eq_ignore_ascii_case(k)) => Ok(w),
            Some(T::Quoted(s)) => Ok(s),
            other => Err(format!("expected an ID, found {other:?} at token {}", self.i - 1)),
        }
    }

    fn at_id(&self) -> bool {
        match self.peek() {
            Some(T::Id(w)) => !KEYWORDS.iter().any(|k| w.eq_ignore_ascii_case(k)),
            Some(T::Quoted(_)) => true,
            _ => false,
        }
    }

    fn graph(&mut self) -> Result<(), String> {
        if self.is_kw("strict") {
            self.next();
        }
        if self.is_kw("digraph") {
            self.stats.directed = true;
        } else if !self.is_kw("graph") {
            return Err("expected graph or digraph".into());
        }
        self.next();
        if self.at_id() {
            self.id()?;
        }
        self.expect(T::LBrace)?;
        self.stmt_list()?;
        self.expect(T::RBrace)?;
        if self.i != self.t.len() {
            return Err("trailing tokens after graph".into());
        }
        Ok(())
    }

    fn stmt_list(&mut self) -> Result<(), String> {
        while !matches!(self.peek(), Some(T::RBrace) | None) {
            self.stmt()?;
            if matches!(self.peek(), Some(T::Semi)) {
                self.next();
            }
        }
        Ok(())
    }

    /// Parses `[a=b, …][…]`, returning the pairs.
    fn attr_list(&mut self) -> Result<Vec<(String, String)>, String> {
        let mut out = Vec::new();
        while matches!(self.peek(), Some(T::LBracket)) {
            self.next();
            while !matches!(self.peek(), Some(T::RBracket)) {
                let k = self.id()?;
                self.expect(T::Eq)?;
                let v = self.id()?;
                out.push((k, v));
                if matches!(self.peek(), Some(T::Semi | T::Comma)) {
                    self.next();
                }
            }
            self.expect(T::RBracket)?;
        }
        Ok(out)
    }

    fn subgraph(&mut self) -> Result<(), String> {
        let name = if self.is_kw("subgraph") {
            self.next();
            if self.at_id() {
                Some(self.id()?)
            } else {
                None
            }
        } else {
            None
        };
        let name = name.unwrap_or_else(|| {
            self.anon += 1;
            format!("#anon{}", self.anon)
        });
        self.stats.subgraphs.push((name.clone(), self.stack.last().cloned()));
        self.stack.push(name);
        self.expect(T::LBrace)?;
        self.stmt_list()?;
        self.expect(T::RBrace)?;
        self.stack.pop();
        Ok(())
    }

    fn node_id(&mut self) -> Result<String, String> {
        let id = self.id()?;
        if matches!(self.peek(), Some(T::Colon)) {
            self.next();
            self.id()?;
            if matches!(self.peek(), Some(T::Colon)) {
                self.next();
                self.id()?;
            }
        }
        Ok(id)
    }

    fn stmt(&mut self) -> Result<(), String> {
        if self.is_kw("graph") || self.is_kw("node") || self.is_kw("edge") {
            self.next();
            if !matches!(self.peek(), Some(T::LBracket)) {
                return Err("attribute statement without attribute list".into());
            }
            self.attr_list()?;
            return Ok(());
        }
        if self.is_kw("subgraph") || matches!(self.peek(), Some(T::LBrace)) {
            self.subgraph()?;
            return self.edge_rhs(false);
        }
        let first = self.node_id()?;
        if matches!(self.peek(), Some(T::Eq)) {
            self.next();
            let v = self.id()?;
            if first == "label" {
                if let Some(g) = self.stack.last() {
                    self.stats.labels.push((g.clone(), v));
                }
            }
            return Ok(());
        }
        if matches!(self.peek(), Some(T::Arrow | T::Line)) {
            return self.edge_rhs(true);
        }
        self.attr_list()?;
        self.stats.nodes.push(first);
        Ok(())
    }

    fn edge_rhs(&mut self, required: bool) -> Result<(), String> {
        let mut ops = 0;
        while let Some(op) = self.peek().cloned() {
            match op {
                T::Arrow if !self.stats.directed => return Err("`->` in an undirected graph".into()),
                T::Line if self.stats.directed => return Err("`--` in a directed graph".into()),
                T::Arrow | T::Line => {}
                _ => break,
            }
            self.next();
            ops += 1;
            if self.is_kw("subgraph") || matches!(self.peek(), Some(T::LBrace)) {
                self.subgraph()?;
            } else {
                self.node_id()?;
            }
        }
        if required && ops == 0 {
            return Err("edge without operator".into());
        }
        if ops > 0 {
            let attrs = self.attr_list()?;
            self.stats.edges += ops;
            if attrs.iter().any(|(k, v)| k == "style" && v == "dashed") {
                self.stats.dashed_edges += ops;
            }
        }
        Ok(())
    }
}

/// Parses DOT text, returning counts or the first syntax error.
pub fn check(src: &str) -> Result<DotStats, String> {
    let t = tokenize(src)?;
    let mut p = P { t, i: 0, stats: DotStats::default(), stack: Vec::new(), anon: 0 };
    p.graph()?;
    Ok(p.stats)
}
