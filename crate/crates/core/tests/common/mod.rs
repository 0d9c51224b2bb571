//! Test-only oracles, independent of the library's implementation paths.
#![allow(dead_code)]

/// One block found by the naive scanner: (span_start, span_end, raw).
pub type NaiveBlock = (usize, usize, Vec<u8>);

fn find_ci(haystack: &[u8], needle: &[u8], from: usize) -> Option<usize> {
    if from > haystack.len() || needle.len() > haystack.len() - from {
        return None;
    }
    (from..=haystack.len() - needle.len())
        .find(|&i| haystack[i..i + needle.len()].eq_ignore_ascii_case(needle))
}

/// Repeatedly finds the next case-insensitive open tag, then the next
/// case-insensitive close tag after it.
pub fn naive_scan(content: &[u8], tag: &str) -> Vec<NaiveBlock> {
    let open = format!("[{tag}]").into_bytes();
    let close = format!("[/{tag}]").into_bytes();
    let mut blocks = Vec::new();
    let mut pos = 0;
    while let Some(start) = find_ci(content, &open, pos) {
        let inner = start + open.len();
        let Some(close_at) = find_ci(content, &close, inner) else {
            break;
        };
        let end = close_at + close.len();
        blocks.push((start, end, content[inner..close_at].to_vec()));
        pos = end;
    }
    blocks
}

#[derive(Debug, PartialEq, Eq)]
pub enum Token {
    Open(String),
    Close(String),
    /// Raw text of a script element.
    ScriptText(Vec<u8>),
    Text(Vec<u8>),
}

#[derive(Clone, Copy, PartialEq)]
enum ScriptState {
    Data,
    Escaped,
    DoubleEscaped,
}

fn at_ci(s: &[u8], i: usize, lit: &[u8]) -> bool {
    s.len() >= i + lit.len() && s[i..i + lit.len()].eq_ignore_ascii_case(lit)
}

fn tag_delimited(s: &[u8], i: usize, lit: &[u8]) -> bool {
    at_ci(s, i, lit)
        && matches!(
            s.get(i + lit.len()),
            Some(b'\t' | b'\n' | b'\x0c' | b' ' | b'/' | b'>')
        )
}

/// Returns the offset of the `</script` that really ends a script element
/// whose raw text starts at `from`, following the HTML script-data states
/// (plain, escaped after `<!--`, double-escaped after a nested `<script`).
pub fn script_end(s: &[u8], from: usize) -> Option<usize> {
    let mut state = ScriptState::Data;
    let mut i = from;
    while i < s.len() {
        match state {
            ScriptState::Data => {
                if tag_delimited(s, i, b"</script") {
                    return Some(i);
                }
                if at_ci(s, i, b"<!--") {
                    state = ScriptState::Escaped;
                    i += 4;
                    continue;
                }
            }
            ScriptState::Escaped => {
                if at_ci(s, i, b"-->") {
                    state = ScriptState::Data;
                    i += 3;
                    continue;
                }
                if tag_delimited(s, i, b"</script") {
                    return Some(i);
                }
                if tag_delimited(s, i, b"<script") {
                    state = ScriptState::DoubleEscaped;
                    i += 7;
                    continue;
                }
            }
            ScriptState::DoubleEscaped => {
                if at_ci(s, i, b"-->") {
                    state = ScriptState::Data;
                    i += 3;
                    continue;
                }
                if tag_delimited(s, i, b"</script") {
                    state = ScriptState::Escaped;
                    i += 8;
                    continue;
                }
            }
        }
        i += 1;
    }
    None
}

/// Minimal tokenizer: tags with quoted attributes, end tags, raw script text.
pub fn tokenize(html: &[u8]) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut text = Vec::new();
    let mut i = 0;
    while i < html.len() {
        if html[i] == b'<'
            && i + 1 < html.len()
            && (html[i + 1].is_ascii_alphabetic() || html[i + 1] == b'/')
        {
            if !text.is_empty() {
                tokens.push(Token::Text(std::mem::take(&mut text)));
            }
            let closing = html[i + 1] == b'/';
            let name_start = i + 1 + closing as usize;
            let mut j = name_start;
            while j < html.len() && html[j].is_ascii_alphanumeric() {
                j += 1;
            }
            let name = String::from_utf8_lossy(&html[name_start..j]).to_ascii_lowercase();
            let mut quote = None;
            while j < html.len() {
                match (quote, html[j]) {
                    (None, b'"' | b'\'') => quote = Some(html[j]),
                    (Some(q), c) if c == q => quote = None,
                    (None, b'>') => break,
                    _ => {}
                }
                j += 1;
            }
            if j >= html.len() {
                return Err(format!("unterminated tag at {i}"));
            }
            i = j + 1;
            if closing {
                tokens.push(Token::Close(name));
            } else if name == "script" {
                tokens.push(Token::Open(name.clone()));
                let end = script_end(html, i).ok_or("script element never closed")?;
                tokens.push(Token::ScriptText(html[i..end].to_vec()));
                i = end;
            } else {
                tokens.push(Token::Open(name));
            }
        } else {
            text.push(html[i]);
            i += 1;
        }
    }
    if !text.is_empty() {
        tokens.push(Token::Text(text));
    }
    Ok(tokens)
}

/// Every opened element is closed in order.
pub fn is_balanced(tokens: &[Token]) -> bool {
    let mut stack = Vec::new();
    for t in tokens {
        match t {
            Token::Open(name) => stack.push(name.as_str()),
            Token::Close(name) if stack.pop() != Some(name.as_str()) => return false,
            _ => {}
        }
    }
    stack.is_empty()
}

/// The three-phase AC network model, as typed into the editor.
pub const AC_MODEL_LINES: &[&str] = &[
    "# модель трифазної мережі змінного струму",
    "var('t')          # часова змінна",
    "A0=380*sqrt(2)   # амплітуда",
    "w0=2*pi*50      # частота",
    "T0=2*pi/w0     # період відображення",
    "@interact",
    "def model(A=A0,w=w0,T=T0):",
    "    # побудова графіків",
    "    show(plot(A*sin(w*t), t, 0, T, rgbcolor=(1,0,0), \\",
    "             thickness=2, legend_label=\"Phase A\") + \\",
    "          plot(A*sin(w*t+2*pi/3), t, 0, T, rgbcolor=(0,1,0), \\",
    "             linestyle=\"--\", thickness=2, legend_label=\"Phase B\") \\",
    "          + plot(A*sin(w*t-2*pi/3), t, 0, T, rgbcolor=(0,0,1), \\",
    "             linestyle=\":\", thickness=2, legend_label=\"Phase C\"))",
];

/// The listing as a rich-text editor stores it: a heading paragraph, one
/// paragraph per line with `&nbsp;` indentation, quotes entity-encoded and
/// the pseudotags on their own paragraphs.
pub fn ac_model_editor_html() -> String {
    let mut html = String::from("<p>Модель трифазного змінного струму:</p>\n<p>[sage]</p>");
    for line in AC_MODEL_LINES {
        let indent = line.len() - line.trim_start().len();
        let body = line.trim_start().replace('"', "&quot;");
        html.push_str("<p>");
        html.push_str(&"&nbsp;".repeat(indent));
        html.push_str(&body);
        html.push_str("</p>");
    }
    html.push_str("<p>[/sage]</p>\n<p>Кінець.</p>");
    html
}

/// Expected code after normalization: one line per paragraph, paragraphs
/// separated by a blank line.
pub fn ac_model_expected_code() -> String {
    AC_MODEL_LINES.join("\n\n")
}

use sagecell_filter::{emitter, FilterConfig, RenderedOutput};

/// Removes the header and every emitted fragment from `output.html`, splicing
/// the original block spans back in. Returns `None` if the output does not
/// have the expected shape.
pub fn reconstruct(
    input: &[u8],
    output: &RenderedOutput,
    config: &FilterConfig,
) -> Option<Vec<u8>> {
    let spans = naive_scan(input, config.tag_name());
    if spans.len() != output.cell_count() {
        return None;
    }
    let html = &output.html;
    let mut rebuilt = Vec::with_capacity(input.len());
    let (mut at_in, mut at_out) = (0, 0);
    for (k, ((start, end, _), cell)) in spans.iter().zip(&output.cells).enumerate() {
        let outside = &input[at_in..*start];
        if !html[at_out..].starts_with(outside) {
            return None;
        }
        rebuilt.extend_from_slice(outside);
        at_out += outside.len();
        if k == 0 {
            let header = emitter::render_header(config);
            if !html[at_out..].starts_with(header.as_bytes()) {
                return None;
            }
            at_out += header.len();
        }
        let fragment = emitter::render_cell(&cell.code, k + 1, config).ok()?;
        if !html[at_out..].starts_with(&fragment) {
            return None;
        }
        at_out += fragment.len();
        rebuilt.extend_from_slice(&input[*start..*end]);
        at_in = *end;
    }
    if html[at_out..] != input[at_in..] {
        return None;
    }
    rebuilt.extend_from_slice(&input[at_in..]);
    Some(rebuilt)
}
