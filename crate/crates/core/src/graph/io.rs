use std::io::{BufRead, Write};

use super::SocialGraph;
use crate::error::Error;
use crate::Result;

/// Parameters recorded in the first line of an edge-list file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeListHeader {
    pub n: usize,
    pub gamma: f64,
    pub epsilon: f64,
    pub seed: u64,
}

/// Writes `# n=.. gamma=.. epsilon=.. seed=..` followed by `u v` lines, `u < v`.
pub fn write_edge_list<W: Write>(mut w: W, header: &EdgeListHeader, graph: &SocialGraph) -> Result<()> {
    writeln!(
        w,
        "# n={} gamma={} epsilon={} seed={}",
        header.n, header.gamma, header.epsilon, header.seed
    )?;
    for (u, v) in graph.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_edge_list<R: BufRead>(r: R) -> Result<(EdgeListHeader, SocialGraph)> {
    let mut lines = r.lines();
    let first = lines.next().ok_or_else(|| Error::parse(1, "missing header"))??;
    let header = parse_header(&first)?;
    let mut edges = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let lineno = i + 2;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(lineno, format!("expected `u v`, got `{line}`")));
        };
        let u: u32 = a.parse().map_err(|_| Error::parse(lineno, format!("bad node id `{a}`")))?;
        let v: u32 = b.parse().map_err(|_| Error::parse(lineno, format!("bad node id `{b}`")))?;
        if u as usize >= header.n || v as usize >= header.n || u == v {
            return Err(Error::parse(lineno, format!("invalid edge ({u}, {v}) for n={}", header.n)));
        }
        edges.push((u, v));
    }
    Ok((header, SocialGraph::from_edges(header.n, edges)?))
}

fn parse_header(line: &str) -> Result<EdgeListHeader> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::parse(1, "header must start with `#`"))?;
    let (mut n, mut gamma, mut epsilon, mut seed) = (None, None, None, None);
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("malformed header field `{field}`")))?;
        let bad = || Error::parse(1, format!("bad value for `{key}`: `{value}`"));
        match key {
            "n" => n = Some(value.parse().map_err(|_| bad())?),
            "gamma" => gamma = Some(value.parse().map_err(|_| bad())?),
            "epsilon" => epsilon = Some(value.parse().map_err(|_| bad())?),
            "seed" => seed = Some(value.parse().map_err(|_| bad())?),
            _ => return Err(Error::parse(1, format!("unknown header field `{key}`"))),
        }
    }
    match (n, gamma, epsilon, seed) {
        (Some(n), Some(gamma), Some(epsilon), Some(seed)) => Ok(EdgeListHeader {
            n,
            gamma,
            epsilon,
            seed,
        }),
        _ => Err(Error::parse(1, "header needs n, gamma, epsilon and seed")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let g = SocialGraph::from_edges(5, [(3, 1), (0, 4), (1, 2)]).unwrap();
        let h = EdgeListHeader {
            n: 5,
            gamma: 2.5,
            epsilon: 2.7,
            seed: 17,
        };
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &h, &g).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text, "# n=5 gamma=2.5 epsilon=2.7 seed=17\n0 4\n1 2\n1 3\n");
        let (h2, g2) = read_edge_list(&buf[..]).unwrap();
        assert_eq!(h2, h);
        assert_eq!(g2, g);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "# n=3 gamma=2.5 epsilon=2.5 seed=1\n0 1\n1 x\n";
        match read_edge_list(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(read_edge_list("0 1\n".as_bytes()).is_err());
        assert!(read_edge_list("# n=2 gamma=2.5 epsilon=2.5 seed=1\n0 2\n".as_bytes()).is_err());
    }
}
