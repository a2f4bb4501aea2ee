//! Minimal CSV emission: comma separated, LF line endings, numbers in
//! Rust's shortest round-trip decimal form (never exponent notation).

pub fn num(x: f64) -> String {
    format!("{x}")
}

/// Appends one row; fields are written verbatim, quoted only if needed.
pub fn push_row<S: AsRef<str>>(out: &mut String, fields: &[S]) {
    for (k, f) in fields.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        let f = f.as_ref();
        if f.contains([',', '"', '\n']) {
            out.push('"');
            out.push_str(&f.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(f);
        }
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_plain_decimals() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(1e-9), "0.000000001");
        assert_eq!(num(4.0), "4");
    }

    #[test]
    fn quoting() {
        let mut s = String::new();
        push_row(&mut s, &["a", "b,c", "say \"hi\""]);
        assert_eq!(s, "a,\"b,c\",\"say \"\"hi\"\"\"\n");
    }
}
