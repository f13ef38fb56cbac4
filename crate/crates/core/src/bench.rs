//! Reading and writing ISCAS85 `.bench` netlists.

use std::fmt::Write as _;

use crate::error::ParseError;
use crate::netlist::{is_identifier, Gate, GateFunction, Netlist, Positions};

const DEFAULT_NAME: &str = "netlist";

/// Parses a `.bench` document.
///
/// The design name is taken from a leading `# <name>` comment when present.
pub fn parse_bench(text: &str) -> Result<Netlist, ParseError> {
    let mut name: Option<String> = None;
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut gates = Vec::new();
    let mut pos = Positions::default();
    let mut seen_statement = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let (body, comment) = match raw.find('#') {
            Some(at) => (&raw[..at], Some(&raw[at + 1..])),
            None => (raw, None),
        };
        let body = body.trim();
        if body.is_empty() {
            if let (None, false, Some(c)) = (&name, seen_statement, comment) {
                let words: Vec<&str> = c.split_whitespace().collect();
                if let [only] = words[..] {
                    if is_identifier(only) {
                        name = Some(only.to_string());
                    }
                }
            }
            continue;
        }
        seen_statement = true;
        let syntax = || ParseError::Syntax {
            line,
            text: body.to_string(),
        };

        if let Some(eq) = body.find('=') {
            let id = body[..eq].trim();
            let rhs = body[eq + 1..].trim();
            let (func, args) = split_call(rhs).ok_or_else(syntax)?;
            if !is_identifier(id) {
                return Err(syntax());
            }
            let function: GateFunction = func.parse().map_err(|name| ParseError::UnknownFunction { line, name })?;
            let fanins = split_args(args).ok_or_else(syntax)?;
            gates.push(Gate::new(id, function, fanins));
            pos.gates.push(line);
        } else {
            let (keyword, args) = split_call(body).ok_or_else(syntax)?;
            let args = split_args(args).ok_or_else(syntax)?;
            let [net] = <[String; 1]>::try_from(args).map_err(|_| syntax())?;
            match keyword.to_ascii_uppercase().as_str() {
                "INPUT" => {
                    inputs.push(net);
                    pos.inputs.push(line);
                }
                "OUTPUT" => {
                    outputs.push(net);
                    pos.outputs.push(line);
                }
                _ => return Err(syntax()),
            }
        }
    }

    Netlist::checked(
        name.unwrap_or_else(|| DEFAULT_NAME.to_string()),
        inputs,
        outputs,
        gates,
        &pos,
    )
}

/// Splits `FUNC(args)` into its head and the text between the parentheses.
fn split_call(s: &str) -> Option<(&str, &str)> {
    let open = s.find('(')?;
    let inner = s[open + 1..].strip_suffix(')')?;
    let head = s[..open].trim();
    if head.is_empty() || !head.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
        return None;
    }
    Some((head, inner))
}

fn split_args(s: &str) -> Option<Vec<String>> {
    s.split(',')
        .map(|a| {
            let a = a.trim();
            is_identifier(a).then(|| a.to_string())
        })
        .collect()
}

/// Serializes a netlist in canonical `.bench` form.
pub fn write_bench(netlist: &Netlist) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# {}", netlist.name());
    let _ = writeln!(
        out,
        "# {} inputs, {} outputs, {} gates",
        netlist.inputs().len(),
        netlist.outputs().len(),
        netlist.gates().len()
    );
    out.push('\n');
    for input in netlist.inputs() {
        let _ = writeln!(out, "INPUT({input})");
    }
    out.push('\n');
    for output in netlist.outputs() {
        let _ = writeln!(out, "OUTPUT({output})");
    }
    out.push('\n');
    for gate in netlist.gates() {
        let _ = writeln!(out, "{} = {}({})", gate.id, gate.function, gate.fanins.join(", "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::C17;

    #[test]
    fn parses_c17() {
        let n = parse_bench(C17).unwrap();
        assert_eq!(n.name(), "c17");
        assert_eq!(n.inputs().len(), 5);
        assert_eq!(n.outputs().len(), 2);
        assert_eq!(n.gates().len(), 6);
        assert_eq!(n.gates()[0].fanins, vec!["N1", "N3"]);
    }

    #[test]
    fn empty_document_has_no_inputs() {
        assert_eq!(parse_bench(""), Err(ParseError::NoInputs));
        assert_eq!(parse_bench("# just a comment\n\n"), Err(ParseError::NoInputs));
    }

    #[test]
    fn arity_rules() {
        let one_input_nand = parse_bench("INPUT(a)\nOUTPUT(z)\nz = NAND(a)\n").unwrap();
        assert_eq!(one_input_nand.gates()[0].function, GateFunction::Nand);

        let err = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(z)\nz = NOT(a, b)\n").unwrap_err();
        assert!(matches!(err, ParseError::Arity { line: 4, got: 2, .. }), "{err:?}");
    }

    #[test]
    fn keywords_are_case_insensitive() {
        let n = parse_bench("input(a)\noutput(z)\nz = nand(a, a)  # trailing\n").unwrap();
        assert_eq!(n.outputs(), &["z".to_string()]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("INPUT(a)\nz = MUX(a, a)\n", 2, "unknown gate function"),
            ("INPUT(a)\nINPUT(a)\n", 2, "defined more than once"),
            ("INPUT(a)\n\nz = AND(a, q)\n", 3, "undefined net"),
            ("INPUT(a)\nx = AND(a, y)\ny = NOT(x)\n", 2, "cycle"),
            ("INPUT(a)\nOUTPUT(nope)\n", 2, "undefined net"),
            ("INPUT(a)\nz = AND(a,, a)\n", 2, "malformed"),
            ("INPUT(a)\nINPUTS(b)\n", 2, "malformed"),
            ("INPUT(a)\na = BUFF(a)\n", 2, "defined more than once"),
        ];
        for (text, line, msg) in cases {
            let err = parse_bench(text).unwrap_err();
            assert_eq!(err.line(), Some(line), "{text:?}: {err}");
            assert!(err.to_string().contains(msg), "{text:?}: {err}");
        }
    }

    #[test]
    fn writes_canonical_spelling() {
        let n = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(p)\nq = xor(a, b)\np = BUF(q)\n").unwrap();
        let text = write_bench(&n);
        assert!(text.contains("q = XOR(a, b)\n"), "{text}");
        assert!(text.contains("p = BUFF(q)\n"), "{text}");
    }

    #[test]
    fn c17_round_trip() {
        let n = parse_bench(C17).unwrap();
        let again = parse_bench(&write_bench(&n)).unwrap();
        assert!(n.isomorphic_by_name(&again));
        assert_eq!(again.name(), "c17");
        assert_eq!((again.inputs().len(), again.outputs().len(), again.gates().len()), (5, 2, 6));
    }
}
