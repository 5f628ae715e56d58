//! Recursive-descent recogniser for the cnf/fof subset of TPTP we emit:
//! `%` comments, annotated formulas, `~ | & => <=>`, `!`/`?` quantifiers,
//! lower/quoted functors, upper variables, `$true`/`$false`.
//!
//! fof formulas must be closed; cnf variables are implicitly universal.

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Lower(String),
    Upper(String),
    Quoted(String),
    Dollar(String),
    Int(String),
    Punct(&'static str),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, String> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_alphabetic() || c == '$' {
            let start = i;
            i += 1;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let tok = if c == '$' {
                Tok::Dollar(word)
            } else if c.is_ascii_uppercase() {
                Tok::Upper(word)
            } else {
                Tok::Lower(word)
            };
            out.push((line, tok));
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push((line, Tok::Int(chars[start..i].iter().collect())));
        } else if c == '\'' {
            let start = i;
            i += 1;
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(format!("line {line}: unterminated quoted atom")),
                    Some('\\') => i += 2,
                    Some('\'') => {
                        i += 1;
                        break;
                    }
                    Some(ch) if (' '..='~').contains(ch) => i += 1,
                    Some(ch) => return Err(format!("line {line}: non-printable {ch:?} in quoted atom")),
                }
            }
            if i - start == 2 {
                return Err(format!("line {line}: empty quoted atom"));
            }
            out.push((line, Tok::Quoted(chars[start..i].iter().collect())));
        } else {
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            let p = ["<=>", "=>", "(", ")", "[", "]", ",", ".", ":", "~", "|", "&", "!", "?"]
                .into_iter()
                .find(|p| rest.starts_with(p))
                .ok_or_else(|| format!("line {line}: unexpected character {c:?}"))?;
            i += p.chars().count();
            out.push((line, Tok::Punct(p)));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    bound: Vec<String>,
    fof: bool,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(0, |t| t.0)
    }

    fn err<T>(&self, msg: &str) -> Result<T, String> {
        Err(format!("line {}: {msg} (found {:?})", self.line(), self.peek()))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, p: &str) -> Result<(), String> {
        if self.eat(p) { Ok(()) } else { self.err(&format!("expected `{p}`")) }
    }

    fn annotated(&mut self) -> Result<(), String> {
        self.fof = match self.next() {
            Some(Tok::Lower(w)) if w == "cnf" => false,
            Some(Tok::Lower(w)) if w == "fof" => true,
            _ => {
                self.pos -= 1;
                return self.err("expected cnf or fof");
            }
        };
        self.expect("(")?;
        match self.next() {
            Some(Tok::Lower(_)) | Some(Tok::Int(_)) | Some(Tok::Quoted(_)) => {}
            _ => {
                self.pos -= 1;
                return self.err("bad formula name");
            }
        }
        self.expect(",")?;
        match self.next() {
            Some(Tok::Lower(r))
                if ["axiom", "hypothesis", "definition", "lemma", "theorem", "conjecture", "negated_conjecture", "plain"]
                    .contains(&r.as_str()) => {}
            _ => {
                self.pos -= 1;
                return self.err("bad role");
            }
        }
        self.expect(",")?;
        if self.fof {
            self.fof_formula()?;
        } else {
            self.cnf_formula()?;
        }
        self.expect(")")?;
        self.expect(".")
    }

    fn cnf_formula(&mut self) -> Result<(), String> {
        if self.eat("(") {
            self.disjunction()?;
            self.expect(")")
        } else {
            self.disjunction()
        }
    }

    fn disjunction(&mut self) -> Result<(), String> {
        self.cnf_literal()?;
        while self.eat("|") {
            self.cnf_literal()?;
        }
        Ok(())
    }

    fn cnf_literal(&mut self) -> Result<(), String> {
        self.eat("~");
        self.atom()
    }

    fn fof_formula(&mut self) -> Result<(), String> {
        self.unitary()?;
        let op = match self.peek() {
            Some(Tok::Punct(p)) if ["|", "&", "=>", "<=>"].contains(p) => *p,
            _ => return Ok(()),
        };
        self.pos += 1;
        self.unitary()?;
        if op == "|" || op == "&" {
            while self.eat(op) {
                self.unitary()?;
            }
        }
        // mixing connectives without parentheses is not TPTP
        match self.peek() {
            Some(Tok::Punct(p)) if ["|", "&", "=>", "<=>"].contains(p) => self.err("mixed connectives need parentheses"),
            _ => Ok(()),
        }
    }

    fn unitary(&mut self) -> Result<(), String> {
        if self.eat("(") {
            self.fof_formula()?;
            return self.expect(")");
        }
        if self.eat("~") {
            return self.unitary();
        }
        if self.eat("!") || self.eat("?") {
            self.expect("[")?;
            let mark = self.bound.len();
            loop {
                match self.next() {
                    Some(Tok::Upper(v)) => self.bound.push(v),
                    _ => {
                        self.pos -= 1;
                        return self.err("expected variable");
                    }
                }
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("]")?;
            self.expect(":")?;
            self.unitary()?;
            self.bound.truncate(mark);
            return Ok(());
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<(), String> {
        match self.next() {
            Some(Tok::Dollar(d)) if d == "$true" || d == "$false" => Ok(()),
            Some(Tok::Lower(_)) | Some(Tok::Quoted(_)) => self.args(),
            _ => {
                self.pos -= 1;
                self.err("expected atom")
            }
        }
    }

    fn args(&mut self) -> Result<(), String> {
        if !self.eat("(") {
            return Ok(());
        }
        loop {
            self.term()?;
            if !self.eat(",") {
                break;
            }
        }
        self.expect(")")
    }

    fn term(&mut self) -> Result<(), String> {
        match self.next() {
            Some(Tok::Upper(v)) => {
                if self.fof && !self.bound.contains(&v) {
                    self.pos -= 1;
                    return self.err("free variable in fof formula");
                }
                Ok(())
            }
            Some(Tok::Lower(_)) | Some(Tok::Quoted(_)) | Some(Tok::Int(_)) => self.args(),
            _ => {
                self.pos -= 1;
                self.err("expected term")
            }
        }
    }
}

/// Number of annotated formulas, or the first syntax error.
pub fn check(src: &str) -> Result<usize, String> {
    let mut p = Parser { toks: lex(src)?, pos: 0, bound: Vec::new(), fof: false };
    let mut count = 0;
    while p.peek().is_some() {
        p.annotated()?;
        count += 1;
    }
    Ok(count)
}

