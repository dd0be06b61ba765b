from __future__ import annotations

from centriscan.lexer import EOF, IDENT, KEYWORD, NUMBER, PUNCT, STRING, lex
from centriscan.source import SourceFile


def lex_text(text: str):
    return lex(SourceFile.from_string(text))


def kinds_and_texts(tokens):
    return [(t.kind, t.text) for t in tokens if t.kind != EOF]


def test_selfdestruct_statement_tokens():
    tokens, diags = lex_text("selfdestruct(_owner);")
    assert not diags
    assert kinds_and_texts(tokens) == [
        (KEYWORD, "selfdestruct"),
        (PUNCT, "("),
        (IDENT, "_owner"),
        (PUNCT, ")"),
        (PUNCT, ";"),
    ]


def test_empty_input_yields_only_eof():
    tokens, diags = lex_text("")
    assert not diags
    assert [t.kind for t in tokens] == [EOF]


# Hand-tokenized identifier spelling list for the mint example contract,
# written down before wiring the assertion (order of first appearance).
MINT_EXAMPLE = """\
contract Contract_Mint{
    mapping(address => uint256) private _balances;
    address public owner;
    modifier onlyOwner() {
        require(_msgSender() == _owner, "Only owner can perform this operation");
        _;
    }
    function mint(address account, uint256 amount) public onlyOwner{
        require(account != address(0), "ERC20: mint to the zero address");
        uint256 now_balances = _balances[account];
        _balances[account] = now_balances.add(amount);
    } }
"""

MINT_EXAMPLE_IDENTIFIERS = [
    "Contract_Mint",
    "_balances",
    "owner",
    "onlyOwner",
    "_msgSender",
    "_owner",
    "_",
    "mint",
    "account",
    "amount",
    "onlyOwner",
    "account",
    "account",
    "now_balances",
    "_balances",
    "account",
    "_balances",
    "account",
    "now_balances",
    "add",
    "amount",
]


def test_mint_example_identifier_round_trip():
    tokens, diags = lex_text(MINT_EXAMPLE)
    assert not diags
    idents = [t.text for t in tokens if t.kind == IDENT]
    assert idents == MINT_EXAMPLE_IDENTIFIERS


def test_keywords_distinguished_from_identifiers():
    tokens, _ = lex_text("contract uint256 uint boolFlag mapping bytes32 bytesData msg block")
    table = {t.text: t.kind for t in tokens if t.kind != EOF}
    assert table["contract"] == KEYWORD
    assert table["uint256"] == KEYWORD
    assert table["uint"] == KEYWORD
    assert table["mapping"] == KEYWORD
    assert table["bytes32"] == KEYWORD
    assert table["msg"] == KEYWORD
    assert table["block"] == KEYWORD
    assert table["boolFlag"] == IDENT
    assert table["bytesData"] == IDENT


def test_comments_and_whitespace_dropped_spans_preserved():
    tokens, diags = lex_text("a // comment\n/* block */ b")
    assert not diags
    named = [(t.text, t.span.line) for t in tokens if t.kind == IDENT]
    assert named == [("a", 1), ("b", 2)]
    a, b = (t for t in tokens if t.kind == IDENT)
    assert a.span.start == 0 and a.span.end == 1
    assert b.span.end - b.span.start == 1


def test_unterminated_string_diagnostic_carries_span():
    tokens, diags = lex_text('x = "oops\ny = 1;')
    assert any(d.code == "unterminated-string" for d in diags)
    (diag,) = [d for d in diags if d.code == "unterminated-string"]
    assert diag.span.line == 1
    # lexing continues on the next line
    assert ("y", NUMBER) != ()
    assert any(t.text == "y" for t in tokens)


def test_invalid_character_diagnostic():
    tokens, diags = lex_text("a # b")
    assert any(d.code == "invalid-character" for d in diags)
    assert [t.text for t in tokens if t.kind == IDENT] == ["a", "b"]


def test_string_escapes_and_hex_numbers():
    tokens, diags = lex_text(r'"a\"b" 0x360894a13ba1 1_000 2e10')
    assert not diags
    s = [t for t in tokens if t.kind == STRING][0]
    assert s.text == 'a"b'
    nums = [t.text for t in tokens if t.kind == NUMBER]
    assert nums == ["0x360894a13ba1", "1_000", "2e10"]


def test_two_char_operators():
    tokens, _ = lex_text("a => b ** c <= d != e += f")
    ops = [t.text for t in tokens if t.kind == PUNCT]
    assert ops == ["=>", "**", "<=", "!=", "+="]


def test_tokens_cover_full_input_offsets_monotone():
    text = "function f(uint a) public { return a + 1; }"
    tokens, _ = lex_text(text)
    last = 0
    for t in tokens:
        assert t.span.start >= last
        last = t.span.start
    assert tokens[-1].span.end == len(text)
