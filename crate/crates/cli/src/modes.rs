use std::fmt;
use std::str::FromStr;

/// Comma-separated integers and inclusive `a:b` ranges, e.g. `-3:3` or `0,2,5:7`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntList(pub Vec<i64>);

impl FromStr for IntList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = Vec::new();
        for item in s.split(',') {
            let item = item.trim();
            let bad = || format!("invalid list item '{item}' (expected N or A:B)");
            // The range separator cannot be confused with a sign.
            match item.split_once(':') {
                Some((a, b)) => {
                    let a: i64 = a.trim().parse().map_err(|_| bad())?;
                    let b: i64 = b.trim().parse().map_err(|_| bad())?;
                    if b < a {
                        return Err(format!("empty range '{item}'"));
                    }
                    if b - a > 1 << 16 {
                        return Err(format!("range '{item}' is too long"));
                    }
                    out.extend(a..=b);
                }
                None => out.push(item.parse().map_err(|_| bad())?),
            }
        }
        Ok(Self(out))
    }
}

impl fmt::Display for IntList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}
