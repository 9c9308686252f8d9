//! Text formats LUK v1, PAREN v1 and SIN v1.
//!
//! ```text
//! LUK v1            PAREN v1          SIN v1
//! 2 1 0 0           ((())())          2 2 [0]
//!                                     1 1
//! ```
//!
//! LUK lists the DFS child counts. PAREN prints a vertex as `(`, its
//! children's prints, then `)`; the whole string is the root's print. SIN has
//! one line per spine vertex: `k j` followed by the k-1 bushes in birth
//! order, each as bracketed LUK counts.

use super::{OrderedTree, SinTree, SpineRecord};
use crate::error::{Error, ParseError, Result};

const LUK_HEADER: &str = "LUK v1";
const PAREN_HEADER: &str = "PAREN v1";
const SIN_HEADER: &str = "SIN v1";

/// A decoded file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Encoded {
    Tree(OrderedTree),
    Sin(SinTree),
}

fn fail(offset: usize, expected: impl Into<String>) -> Error {
    Error::Parse(ParseError {
        offset,
        expected: expected.into(),
    })
}

fn join_counts(kids: &[u32]) -> String {
    let parts: Vec<String> = kids.iter().map(u32::to_string).collect();
    parts.join(" ")
}

pub fn to_luk(t: &OrderedTree) -> String {
    format!("{LUK_HEADER}\n{}\n", join_counts(t.kids()))
}

pub fn to_paren_body(t: &OrderedTree) -> String {
    let mut out = String::with_capacity(2 * t.size());
    let mut open: Vec<u32> = Vec::new();
    for &k in t.kids() {
        out.push('(');
        if k > 0 {
            open.push(k);
            continue;
        }
        out.push(')');
        // Close every ancestor whose last child just finished.
        while let Some(top) = open.last_mut() {
            *top -= 1;
            if *top > 0 {
                break;
            }
            open.pop();
            out.push(')');
        }
    }
    out
}

pub fn to_paren(t: &OrderedTree) -> String {
    format!("{PAREN_HEADER}\n{}\n", to_paren_body(t))
}

pub fn to_sin(st: &SinTree) -> String {
    let mut out = format!("{SIN_HEADER}\n");
    for r in st.spine() {
        out.push_str(&format!("{} {}", r.k, r.j));
        for bush in r.left.iter().chain(&r.right) {
            out.push_str(&format!(" [{}]", join_counts(bush.kids())));
        }
        out.push('\n');
    }
    out
}

/// Byte cursor over the input.
struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, pos: usize) -> Self {
        Self { src, pos }
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn skip_spaces(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r')) {
            self.pos += 1;
        }
    }

    fn expect_header(&mut self, header: &str) -> Result<()> {
        let rest = &self.src[self.pos..];
        if !rest.starts_with(header) {
            return Err(fail(self.pos, format!("header `{header}`")));
        }
        self.pos += header.len();
        self.skip_spaces();
        self.newline()
    }

    fn newline(&mut self) -> Result<()> {
        match self.peek() {
            Some(b'\n') => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(fail(self.pos, "newline")),
        }
    }

    /// Accepts an optional final newline, then requires end of input.
    fn finish(&mut self) -> Result<()> {
        self.skip_spaces();
        if self.peek() == Some(b'\n') {
            self.pos += 1;
        }
        if !self.at_end() {
            return Err(fail(self.pos, "end of input"));
        }
        Ok(())
    }

    fn number(&mut self) -> Result<(u32, usize)> {
        let start = self.pos;
        while self.peek().is_some_and(|b| b.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(fail(start, "a decimal child count"));
        }
        let n = self.src[start..self.pos]
            .parse::<u32>()
            .map_err(|_| fail(start, "a child count below 2^32"))?;
        Ok((n, start))
    }

    /// Child counts of one tree, separated by spaces, stopping as soon as
    /// the tree is complete.
    fn tree_counts(&mut self) -> Result<OrderedTree> {
        let mut kids = Vec::new();
        let mut need: u64 = 1;
        while need > 0 {
            self.skip_spaces();
            let (k, _) = self.number()?;
            kids.push(k);
            need = need - 1 + u64::from(k);
            if need > 0 && !matches!(self.peek(), Some(b' ' | b'\t')) {
                return Err(fail(self.pos, format!("{need} more child count(s)")));
            }
        }
        Ok(OrderedTree::from_kids_unchecked(kids))
    }
}

fn luk_body(c: &mut Cursor) -> Result<OrderedTree> {
    let t = c.tree_counts()?;
    c.finish()?;
    Ok(t)
}

pub fn parse_luk(s: &str) -> Result<OrderedTree> {
    let mut c = Cursor::new(s, 0);
    c.expect_header(LUK_HEADER)?;
    luk_body(&mut c)
}

fn paren_body(c: &mut Cursor) -> Result<OrderedTree> {
    c.skip_spaces();
    let mut kids: Vec<u32> = Vec::new();
    let mut open: Vec<usize> = Vec::new();
    loop {
        match c.peek() {
            Some(b'(') => {
                if let Some(&parent) = open.last() {
                    kids[parent] += 1;
                }
                open.push(kids.len());
                kids.push(0);
            }
            Some(b')') => {
                if open.pop().is_none() {
                    return Err(fail(c.pos, "`(`"));
                }
            }
            _ => break,
        }
        c.pos += 1;
        if open.is_empty() {
            break;
        }
    }
    if kids.is_empty() {
        return Err(fail(c.pos, "`(`"));
    }
    if !open.is_empty() {
        return Err(fail(c.pos, "`(` or `)`"));
    }
    c.finish()?;
    Ok(OrderedTree::from_kids_unchecked(kids))
}

/// Parses a bare parenthesis string such as `((())())`.
pub fn parse_paren_body(s: &str) -> Result<OrderedTree> {
    paren_body(&mut Cursor::new(s, 0))
}

pub fn parse_paren(s: &str) -> Result<OrderedTree> {
    let mut c = Cursor::new(s, 0);
    c.expect_header(PAREN_HEADER)?;
    paren_body(&mut c)
}

fn sin_body(c: &mut Cursor) -> Result<SinTree> {
    let mut spine = Vec::new();
    loop {
        c.skip_spaces();
        if c.at_end() {
            break;
        }
        let (k, k_at) = c.number()?;
        c.skip_spaces();
        let (j, j_at) = c.number()?;
        if k == 0 {
            return Err(fail(k_at, "k >= 1"));
        }
        if j == 0 || j > k {
            return Err(fail(j_at, format!("a rank j with 1 <= j <= {k}")));
        }
        let mut bushes = Vec::with_capacity(k as usize - 1);
        for _ in 1..k {
            c.skip_spaces();
            if c.peek() != Some(b'[') {
                return Err(fail(c.pos, format!("`[` opening bush {}", bushes.len() + 1)));
            }
            c.pos += 1;
            bushes.push(c.tree_counts()?);
            c.skip_spaces();
            if c.peek() != Some(b']') {
                return Err(fail(c.pos, "`]`"));
            }
            c.pos += 1;
        }
        c.skip_spaces();
        if !c.at_end() {
            c.newline()?;
        }
        let right = bushes.split_off(j as usize - 1);
        spine.push(SpineRecord {
            k,
            j,
            left: bushes,
            right,
        });
    }
    Ok(SinTree::new(spine))
}

pub fn parse_sin(s: &str) -> Result<SinTree> {
    let mut c = Cursor::new(s, 0);
    c.expect_header(SIN_HEADER)?;
    sin_body(&mut c)
}

/// Detects the format from the header; headerless input is read as LUK
/// counts or, if it starts with `(`, as a PAREN body.
pub fn parse_any(s: &str) -> Result<Encoded> {
    if s.starts_with(SIN_HEADER) {
        return parse_sin(s).map(Encoded::Sin);
    }
    if s.starts_with(LUK_HEADER) {
        return parse_luk(s).map(Encoded::Tree);
    }
    if s.starts_with(PAREN_HEADER) {
        return parse_paren(s).map(Encoded::Tree);
    }
    let start = s.len() - s.trim_start().len();
    let mut c = Cursor::new(s, start);
    if c.peek() == Some(b'(') {
        paren_body(&mut c).map(Encoded::Tree)
    } else {
        luk_body(&mut c).map(Encoded::Tree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> OrderedTree {
        OrderedTree::from_kids(vec![2, 1, 0, 0]).unwrap()
    }

    #[test]
    fn luk_golden() {
        assert_eq!(to_luk(&example()), "LUK v1\n2 1 0 0\n");
        assert_eq!(parse_luk("LUK v1\n2 1 0 0\n").unwrap(), example());
        assert_eq!(parse_luk("LUK v1\n2 1 0 0").unwrap(), example());
    }

    #[test]
    fn paren_golden() {
        assert_eq!(to_paren_body(&example()), "((())())");
        assert_eq!(to_paren_body(&OrderedTree::leaf()), "()");
        assert_eq!(to_paren(&example()), "PAREN v1\n((())())\n");
        assert_eq!(parse_paren("PAREN v1\n((())())\n").unwrap(), example());
    }

    #[test]
    fn sin_golden() {
        let st = SinTree::new(vec![
            SpineRecord::new(3, 2, vec![OrderedTree::leaf()], vec![example()]).unwrap(),
            SpineRecord::bare(),
        ]);
        let text = to_sin(&st);
        assert_eq!(text, "SIN v1\n3 2 [0] [2 1 0 0]\n1 1\n");
        assert_eq!(parse_sin(&text).unwrap(), st);
        assert_eq!(parse_any(&text).unwrap(), Encoded::Sin(st));
    }

    #[test]
    fn parse_errors_carry_offsets() {
        let err = |r: Result<OrderedTree>| match r {
            Err(Error::Parse(p)) => p.offset,
            other => panic!("{other:?}"),
        };
        assert_eq!(err(parse_luk("LUK v2\n0\n")), 0);
        assert_eq!(err(parse_luk("LUK v1\n2 1 0\n")), 12);
        assert_eq!(err(parse_luk("LUK v1\n0 0\n")), 9);
        assert_eq!(err(parse_luk("LUK v1\n1 x\n")), 9);
        assert_eq!(err(parse_paren_body("(()")), 3);
        assert_eq!(err(parse_paren_body("()()")), 2);
        assert_eq!(err(parse_paren_body(")")), 0);
        assert!(matches!(
            parse_sin("SIN v1\n2 3 [0]\n"),
            Err(Error::Parse(ParseError { offset: 9, .. }))
        ));
    }

    #[test]
    fn headerless_input() {
        assert_eq!(parse_any("2 1 0 0\n").unwrap(), Encoded::Tree(example()));
        assert_eq!(parse_any("((())())").unwrap(), Encoded::Tree(example()));
    }
}
