//! Versioned structured-text formats for instances and solutions. Numeric
//! fields round-trip bit-exactly: floats are printed with Rust's shortest
//! representation and re-parsed to the same bits.

use std::fmt::Write as _;

use crate::covariance::Covariance;
use crate::error::{Error, Result};
use crate::instance::{FeasibleSet, MeanRiskInstance, Solution};
use crate::linalg::Matrix;
use crate::netflow::{NetArc, Network};

const INSTANCE_HEADER: &str = "meanrisk-instance v1";
const SOLUTION_HEADER: &str = "meanrisk-solution v1";

fn fmt_f64(v: f64) -> String {
    if v.is_infinite() {
        "inf".to_string()
    } else {
        format!("{v}")
    }
}

/// Instance document. `epsilon` is optional calibration metadata; `omega` is
/// authoritative for the solve.
pub fn serialize_instance(instance: &MeanRiskInstance<f64>, epsilon: Option<f64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{INSTANCE_HEADER}");
    match instance.feasible() {
        FeasibleSet::Interdiction(net) => {
            let _ = writeln!(out, "kind network");
            let _ = writeln!(out, "nodes {}", net.node_count);
            let _ = writeln!(out, "source {}", net.source);
            let _ = writeln!(out, "sink {}", net.sink);
            let _ = writeln!(out, "budget {}", fmt_f64(net.budget));
            if let Some(eps) = epsilon {
                let _ = writeln!(out, "epsilon {}", fmt_f64(eps));
            }
            let _ = writeln!(out, "omega {}", fmt_f64(instance.omega()));
            let _ = writeln!(out, "arcs {}", net.arcs.len());
            for a in &net.arcs {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {} {}",
                    a.tail,
                    a.head,
                    fmt_f64(a.mean),
                    fmt_f64(a.variance),
                    fmt_f64(a.cost),
                    u8::from(a.interdictable)
                );
            }
            write_covariance(&mut out, instance.covariance(), false);
        }
        FeasibleSet::Explicit(points) => {
            let _ = writeln!(out, "kind explicit");
            let _ = writeln!(out, "dim {}", instance.dim());
            let cost: Vec<String> = instance.cost().iter().map(|&v| fmt_f64(v)).collect();
            let _ = writeln!(out, "cost {}", cost.join(" "));
            if let Some(eps) = epsilon {
                let _ = writeln!(out, "epsilon {}", fmt_f64(eps));
            }
            let _ = writeln!(out, "omega {}", fmt_f64(instance.omega()));
            write_covariance(&mut out, instance.covariance(), true);
            let _ = writeln!(out, "points {}", points.len());
            for p in points {
                let row: Vec<String> = p.iter().map(|b| b.to_string()).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
    }
    let _ = writeln!(out, "end");
    out
}

fn write_covariance(out: &mut String, cov: &Covariance<f64>, explicit_diag: bool) {
    match cov {
        Covariance::Diagonal { q } => {
            let _ = writeln!(out, "covariance diagonal");
            if explicit_diag {
                let row: Vec<String> = q.iter().map(|&v| fmt_f64(v)).collect();
                let _ = writeln!(out, "q {}", row.join(" "));
            }
        }
        Covariance::Factor {
            sigma2,
            exposure,
            factor_root,
        } => {
            let _ = writeln!(out, "covariance factor {}", factor_root.rows());
            let row: Vec<String> = sigma2.iter().map(|&v| fmt_f64(v)).collect();
            let _ = writeln!(out, "sigma2 {}", row.join(" "));
            let _ = writeln!(out, "exposure");
            for i in 0..exposure.rows() {
                let row: Vec<String> = exposure.row(i).iter().map(|&v| fmt_f64(v)).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
            let _ = writeln!(out, "factor_root");
            for i in 0..factor_root.rows() {
                let row: Vec<String> = factor_root.row(i).iter().map(|&v| fmt_f64(v)).collect();
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        Covariance::Dense { .. } => {
            unreachable!("dense covariance has no file representation")
        }
    }
}

struct Cursor<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            lines: text.lines().collect(),
            pos: 0,
        }
    }

    /// Next non-empty, non-comment line with its 1-based number.
    fn next(&mut self, expected: &str) -> Result<(usize, &'a str)> {
        while self.pos < self.lines.len() {
            let lineno = self.pos + 1;
            let line = self.lines[self.pos].trim();
            self.pos += 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Ok((lineno, line));
        }
        Err(Error::parse(
            self.lines.len(),
            format!("unexpected end of file: expected {expected}"),
        ))
    }

    fn keyword_line(&mut self, keyword: &str) -> Result<(usize, Vec<&'a str>)> {
        let (lineno, line) = self.next(&format!("'{keyword}'"))?;
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap_or_default();
        if head != keyword {
            return Err(Error::parse(
                lineno,
                format!("expected '{keyword}', found '{head}'"),
            ));
        }
        Ok((lineno, parts.collect()))
    }
}

fn parse_f64(lineno: usize, token: &str, field: &str) -> Result<f64> {
    if token == "inf" {
        return Ok(f64::INFINITY);
    }
    token
        .parse::<f64>()
        .map_err(|_| Error::parse(lineno, format!("{field}: invalid number '{token}'")))
}

fn parse_usize(lineno: usize, token: &str, field: &str) -> Result<usize> {
    token
        .parse::<usize>()
        .map_err(|_| Error::parse(lineno, format!("{field}: invalid integer '{token}'")))
}

fn one_token<'a>(lineno: usize, args: &[&'a str], field: &str) -> Result<&'a str> {
    if args.len() != 1 {
        return Err(Error::parse(
            lineno,
            format!("{field}: expected exactly one value"),
        ));
    }
    Ok(args[0])
}

fn float_row(lineno: usize, args: &[&str], want: usize, field: &str) -> Result<Vec<f64>> {
    if args.len() != want {
        return Err(Error::parse(
            lineno,
            format!("{field}: expected {want} values, found {}", args.len()),
        ));
    }
    args.iter().map(|t| parse_f64(lineno, t, field)).collect()
}

/// Parse an instance document; returns the instance and the recorded epsilon.
pub fn parse_instance(text: &str) -> Result<(MeanRiskInstance<f64>, Option<f64>)> {
    let mut cur = Cursor::new(text);
    let (lineno, header) = cur.next("header")?;
    if header != INSTANCE_HEADER {
        return Err(Error::parse(lineno, format!("unknown header '{header}'")));
    }
    let (lineno, kind_args) = cur.keyword_line("kind")?;
    match one_token(lineno, &kind_args, "kind")? {
        "network" => parse_network_instance(&mut cur),
        "explicit" => parse_explicit_instance(&mut cur),
        other => Err(Error::parse(lineno, format!("unknown kind '{other}'"))),
    }
}

fn parse_network_instance(cur: &mut Cursor) -> Result<(MeanRiskInstance<f64>, Option<f64>)> {
    let (ln, args) = cur.keyword_line("nodes")?;
    let nodes = parse_usize(ln, one_token(ln, &args, "nodes")?, "nodes")?;
    let (ln, args) = cur.keyword_line("source")?;
    let source = parse_usize(ln, one_token(ln, &args, "source")?, "source")?;
    let (ln, args) = cur.keyword_line("sink")?;
    let sink = parse_usize(ln, one_token(ln, &args, "sink")?, "sink")?;
    let (ln, args) = cur.keyword_line("budget")?;
    let budget = parse_f64(ln, one_token(ln, &args, "budget")?, "budget")?;

    let (mut ln, mut line) = cur.next("'epsilon', 'omega'")?;
    let mut epsilon = None;
    if line.starts_with("epsilon ") {
        let tok = line.split_whitespace().nth(1).unwrap_or_default();
        epsilon = Some(parse_f64(ln, tok, "epsilon")?);
        let (l2, next) = cur.next("'omega'")?;
        ln = l2;
        line = next;
    }
    let omega = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["omega", tok] => parse_f64(ln, tok, "omega")?,
        _ => return Err(Error::parse(ln, "expected 'omega <value>'".to_string())),
    };

    let (ln, args) = cur.keyword_line("arcs")?;
    let arc_count = parse_usize(ln, one_token(ln, &args, "arcs")?, "arcs")?;
    let mut arcs = Vec::with_capacity(arc_count);
    for k in 0..arc_count {
        let (ln, line) = cur.next(&format!("arc row {k}"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 6 {
            return Err(Error::parse(
                ln,
                format!("arc row needs 6 fields, found {}", toks.len()),
            ));
        }
        let interdictable = match toks[5] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(
                    ln,
                    format!("interdictable flag must be 0 or 1, found '{other}'"),
                ))
            }
        };
        arcs.push(NetArc {
            tail: parse_usize(ln, toks[0], "tail")?,
            head: parse_usize(ln, toks[1], "head")?,
            mean: parse_f64(ln, toks[2], "mean")?,
            variance: parse_f64(ln, toks[3], "variance")?,
            cost: parse_f64(ln, toks[4], "alpha")?,
            interdictable,
        });
    }
    let network = Network::new(nodes, source, sink, arcs, budget)?;
    let ids = network.interdictable_arcs();
    let n = ids.len();

    let (ln, args) = cur.keyword_line("covariance")?;
    let cov = match args.as_slice() {
        ["diagonal"] => {
            Covariance::diagonal(ids.iter().map(|&a| network.arcs[a].variance).collect())?
        }
        ["factor", m_tok] => {
            let m = parse_usize(ln, m_tok, "factor count")?;
            let (ln2, args) = cur.keyword_line("sigma2")?;
            let sigma2 = float_row(ln2, &args, n, "sigma2")?;
            for (k, &a) in ids.iter().enumerate() {
                if sigma2[k] != network.arcs[a].variance {
                    return Err(Error::parse(
                        ln2,
                        format!("sigma2[{k}] disagrees with arc {a}'s variance"),
                    ));
                }
            }
            let exposure = read_matrix(cur, "exposure", n, m)?;
            let root = read_matrix(cur, "factor_root", m, m)?;
            Covariance::factor(sigma2, exposure, root)?
        }
        _ => {
            return Err(Error::parse(
                ln,
                "covariance must be 'diagonal' or 'factor <m>'".to_string(),
            ))
        }
    };
    expect_end(cur)?;
    let instance = MeanRiskInstance::interdiction(network, cov, omega)?;
    Ok((instance, epsilon))
}

fn parse_explicit_instance(cur: &mut Cursor) -> Result<(MeanRiskInstance<f64>, Option<f64>)> {
    let (ln, args) = cur.keyword_line("dim")?;
    let n = parse_usize(ln, one_token(ln, &args, "dim")?, "dim")?;
    let (ln, args) = cur.keyword_line("cost")?;
    let cost = float_row(ln, &args, n, "cost")?;

    let (mut ln, mut line) = cur.next("'epsilon', 'omega'")?;
    let mut epsilon = None;
    if line.starts_with("epsilon ") {
        let tok = line.split_whitespace().nth(1).unwrap_or_default();
        epsilon = Some(parse_f64(ln, tok, "epsilon")?);
        let (l2, next) = cur.next("'omega'")?;
        ln = l2;
        line = next;
    }
    let omega = match line.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["omega", tok] => parse_f64(ln, tok, "omega")?,
        _ => return Err(Error::parse(ln, "expected 'omega <value>'".to_string())),
    };

    let (ln, args) = cur.keyword_line("covariance")?;
    let cov = match args.as_slice() {
        ["diagonal"] => {
            let (ln2, args) = cur.keyword_line("q")?;
            Covariance::diagonal(float_row(ln2, &args, n, "q")?)?
        }
        ["factor", m_tok] => {
            let m = parse_usize(ln, m_tok, "factor count")?;
            let (ln2, args) = cur.keyword_line("sigma2")?;
            let sigma2 = float_row(ln2, &args, n, "sigma2")?;
            let exposure = read_matrix(cur, "exposure", n, m)?;
            let root = read_matrix(cur, "factor_root", m, m)?;
            Covariance::factor(sigma2, exposure, root)?
        }
        _ => {
            return Err(Error::parse(
                ln,
                "covariance must be 'diagonal' or 'factor <m>'".to_string(),
            ))
        }
    };

    let (ln, args) = cur.keyword_line("points")?;
    let count = parse_usize(ln, one_token(ln, &args, "points")?, "points")?;
    let mut points = Vec::with_capacity(count);
    for k in 0..count {
        let (ln, line) = cur.next(&format!("point row {k}"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != n {
            return Err(Error::parse(
                ln,
                format!("point row needs {n} fields, found {}", toks.len()),
            ));
        }
        let mut p = Vec::with_capacity(n);
        for t in toks {
            match t {
                "0" => p.push(0u8),
                "1" => p.push(1u8),
                other => {
                    return Err(Error::parse(
                        ln,
                        format!("point entries must be 0 or 1, found '{other}'"),
                    ))
                }
            }
        }
        points.push(p);
    }
    expect_end(cur)?;
    let instance = MeanRiskInstance::explicit(cost, cov, omega, points)?;
    Ok((instance, epsilon))
}

fn read_matrix(cur: &mut Cursor, keyword: &str, rows: usize, cols: usize) -> Result<Matrix<f64>> {
    cur.keyword_line(keyword)?;
    let mut data = Vec::with_capacity(rows * cols);
    for k in 0..rows {
        let (ln, line) = cur.next(&format!("{keyword} row {k}"))?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let row = float_row(ln, &toks, cols, keyword)?;
        data.extend(row);
    }
    Matrix::new(rows, cols, data)
}

fn expect_end(cur: &mut Cursor) -> Result<()> {
    let (ln, line) = cur.next("'end'")?;
    if line != "end" {
        return Err(Error::parse(ln, format!("expected 'end', found '{line}'")));
    }
    // Nothing but comments/blank lines may follow.
    if let Ok((ln, line)) = cur.next("end of file") {
        return Err(Error::parse(ln, format!("unexpected trailing content '{line}'")));
    }
    Ok(())
}

/// Solve report written next to a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionDocument {
    pub value: f64,
    pub mean: f64,
    pub stdev: f64,
    pub t_at: Option<f64>,
    pub gap_certificate: Option<f64>,
    pub approximate: bool,
    pub iterations: usize,
    pub wall_ms: f64,
    /// Coordinates set to one (interdictable-arc ordinals for networks).
    pub x_support: Vec<usize>,
    /// Interdicted arc indices (network instances).
    pub interdicted: Vec<usize>,
    pub trace: Option<String>,
}

impl SolutionDocument {
    pub fn from_solution(
        solution: &Solution<f64>,
        iterations: usize,
        wall_ms: f64,
        interdicted: Vec<usize>,
        trace: Option<String>,
    ) -> Self {
        SolutionDocument {
            value: solution.value,
            mean: solution.mean,
            stdev: solution.stdev,
            t_at: solution.t_at,
            gap_certificate: solution.gap_certificate,
            approximate: solution.approximate,
            iterations,
            wall_ms,
            x_support: solution
                .x
                .iter()
                .enumerate()
                .filter(|(_, &b)| b == 1)
                .map(|(i, _)| i)
                .collect(),
            interdicted,
            trace,
        }
    }
}

pub fn serialize_solution(doc: &SolutionDocument) -> String {
    let mut out = String::new();
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "-".to_string());
    let _ = writeln!(out, "{SOLUTION_HEADER}");
    let _ = writeln!(out, "value {}", fmt_f64(doc.value));
    let _ = writeln!(out, "mean {}", fmt_f64(doc.mean));
    let _ = writeln!(out, "stdev {}", fmt_f64(doc.stdev));
    let _ = writeln!(out, "t_at {}", opt(doc.t_at));
    let _ = writeln!(out, "gap_certificate {}", opt(doc.gap_certificate));
    let _ = writeln!(out, "approximate {}", u8::from(doc.approximate));
    let _ = writeln!(out, "iterations {}", doc.iterations);
    let _ = writeln!(out, "wall_ms {}", fmt_f64(doc.wall_ms));
    let support: Vec<String> = doc.x_support.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(out, "x_support {}", support.join(" "));
    let ints: Vec<String> = doc.interdicted.iter().map(|i| i.to_string()).collect();
    let _ = writeln!(out, "interdicted {}", ints.join(" "));
    let _ = writeln!(out, "trace {}", doc.trace.as_deref().unwrap_or("-"));
    let _ = writeln!(out, "end");
    out
}

pub fn parse_solution(text: &str) -> Result<SolutionDocument> {
    let mut cur = Cursor::new(text);
    let (ln, header) = cur.next("header")?;
    if header != SOLUTION_HEADER {
        return Err(Error::parse(ln, format!("unknown header '{header}'")));
    }
    let scalar = |cur: &mut Cursor, kw: &str| -> Result<f64> {
        let (ln, args) = cur.keyword_line(kw)?;
        parse_f64(ln, one_token(ln, &args, kw)?, kw)
    };
    let optional = |cur: &mut Cursor, kw: &str| -> Result<Option<f64>> {
        let (ln, args) = cur.keyword_line(kw)?;
        let tok = one_token(ln, &args, kw)?;
        if tok == "-" {
            Ok(None)
        } else {
            parse_f64(ln, tok, kw).map(Some)
        }
    };
    let value = scalar(&mut cur, "value")?;
    let mean = scalar(&mut cur, "mean")?;
    let stdev = scalar(&mut cur, "stdev")?;
    let t_at = optional(&mut cur, "t_at")?;
    let gap_certificate = optional(&mut cur, "gap_certificate")?;
    let (ln, args) = cur.keyword_line("approximate")?;
    let approximate = match one_token(ln, &args, "approximate")? {
        "0" => false,
        "1" => true,
        other => {
            return Err(Error::parse(
                ln,
                format!("approximate must be 0 or 1, found '{other}'"),
            ))
        }
    };
    let (ln, args) = cur.keyword_line("iterations")?;
    let iterations = parse_usize(ln, one_token(ln, &args, "iterations")?, "iterations")?;
    let wall_ms = scalar(&mut cur, "wall_ms")?;
    let (ln, args) = cur.keyword_line("x_support")?;
    let x_support = args
        .iter()
        .map(|t| parse_usize(ln, t, "x_support"))
        .collect::<Result<Vec<_>>>()?;
    let (ln, args) = cur.keyword_line("interdicted")?;
    let interdicted = args
        .iter()
        .map(|t| parse_usize(ln, t, "interdicted"))
        .collect::<Result<Vec<_>>>()?;
    let (_, args) = cur.keyword_line("trace")?;
    let trace = match args.as_slice() {
        ["-"] | [] => None,
        [path] => Some((*path).to_string()),
        _ => None,
    };
    expect_end(&mut cur)?;
    Ok(SolutionDocument {
        value,
        mean,
        stdev,
        t_at,
        gap_certificate,
        approximate,
        iterations,
        wall_ms,
        x_support,
        interdicted,
        trace,
    })
}
