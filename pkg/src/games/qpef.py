"""
.qpef game files, profile files and result documents.

Games are S-expressions:

    (game :players 2 :names ("Row" "Col")
      (decision :player 1 :infoset R :actions (U D)
        (U (leaf (1 -1)))
        (D (chance (h 1/2 (leaf (0 0))) (t 1/2 (leaf (2 -2)))))))

Numbers are integers or ``p/q`` rationals; decimals are rejected.
"""
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from eps_field.field import EpsRat
from errors import GameValidationError, QpefSyntaxError
from games.tree import CHANCE, DECISION, LEAF, BehaviorProfile, GameTree, Node, RawGame, validate
from utils.logger import get_logger

logger = get_logger(__name__)

RESULT_HEADER = "# qpe-result 1"

_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")
_DECIMAL = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+[eE][+-]?\d+)")
_DELIMS = set('()";')


# ----------------------------------------------------------------------
# S-expression reader
# ----------------------------------------------------------------------

@dataclass
class Atom:
    text: str
    line: int
    column: int
    quoted: bool = False


@dataclass
class SList:
    items: List[Union["SList", Atom]]
    line: int
    column: int


SExpr = Union[SList, Atom]


def _read_string(text: str, start: int) -> Tuple[int, str]:
    """Index of the closing quote and the unescaped contents; -1 if the line ends first.

    Inside quotes, a backslash escapes the next character.
    """
    chars = []
    i = start + 1
    while i < len(text) and text[i] != "\n":
        ch = text[i]
        if ch == "\\" and i + 1 < len(text) and text[i + 1] != "\n":
            chars.append(text[i + 1])
            i += 2
            continue
        if ch == '"':
            return i, "".join(chars)
        chars.append(ch)
        i += 1
    return -1, ""


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def _tokenize(text: str) -> List[Atom]:
    tokens: List[Atom] = []
    line, col, i = 1, 1, 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col, i = line + 1, 1, i + 1
            continue
        if ch.isspace():
            col, i = col + 1, i + 1
            continue
        if ch == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            tokens.append(Atom(ch, line, col))
            col, i = col + 1, i + 1
            continue
        if ch == '"':
            end, value = _read_string(text, i)
            if end < 0:
                raise QpefSyntaxError(line, col, "closing quote")
            tokens.append(Atom(value, line, col, quoted=True))
            col += end - i + 1
            i = end + 1
            continue
        start = i
        while i < len(text) and not text[i].isspace() and text[i] not in _DELIMS:
            i += 1
        tokens.append(Atom(text[start:i], line, col))
        col += i - start
    return tokens


def read_sexpr(text: str) -> SExpr:
    """Read exactly one S-expression from ``text``."""
    tokens = _tokenize(text)
    if not tokens:
        raise QpefSyntaxError(1, 1, "'('", "end of input")
    pos = 0

    def read() -> SExpr:
        nonlocal pos
        if pos >= len(tokens):
            last = tokens[-1]
            raise QpefSyntaxError(last.line, last.column, "')'", "end of input")
        tok = tokens[pos]
        pos += 1
        if tok.quoted or tok.text not in "()":
            return tok
        if tok.text == ")":
            raise QpefSyntaxError(tok.line, tok.column, "expression", ")")
        items = []
        while True:
            if pos >= len(tokens):
                raise QpefSyntaxError(tok.line, tok.column, "')' closing this list", "end of input")
            nxt = tokens[pos]
            if not nxt.quoted and nxt.text == ")":
                pos += 1
                return SList(items, tok.line, tok.column)
            items.append(read())

    expr = read()
    if pos != len(tokens):
        extra = tokens[pos]
        raise QpefSyntaxError(extra.line, extra.column, "end of input", extra.text)
    return expr


def parse_rational(atom: SExpr) -> Fraction:
    if not isinstance(atom, Atom) or atom.quoted:
        line, col = atom.line, atom.column
        raise QpefSyntaxError(line, col, "rational number", _describe(atom))
    if _RATIONAL.match(atom.text):
        try:
            return Fraction(atom.text)
        except ZeroDivisionError:
            raise QpefSyntaxError(atom.line, atom.column, "nonzero denominator", atom.text) from None
    if _DECIMAL.match(atom.text):
        raise QpefSyntaxError(atom.line, atom.column, "rational p/q or integer (decimals are not allowed)", atom.text)
    raise QpefSyntaxError(atom.line, atom.column, "rational number", atom.text)


def _describe(expr: SExpr) -> str:
    if isinstance(expr, Atom):
        return f'"{expr.text}"' if expr.quoted else expr.text
    return "list"


def _symbol(expr: SExpr, what: str) -> str:
    if not isinstance(expr, Atom) or expr.quoted or expr.text.startswith(":"):
        raise QpefSyntaxError(expr.line, expr.column, what, _describe(expr))
    return expr.text


def _label(expr: SExpr, what: str) -> str:
    """An action or outcome label; '/' separates labels in default node ids."""
    text = _symbol(expr, what)
    if "/" in text:
        raise QpefSyntaxError(expr.line, expr.column, f"{what} without '/'", text)
    return text


def _head(expr: SExpr, expected: str) -> str:
    if not isinstance(expr, SList) or not expr.items:
        raise QpefSyntaxError(expr.line, expr.column, expected, _describe(expr))
    first = expr.items[0]
    if not isinstance(first, Atom) or first.quoted:
        raise QpefSyntaxError(first.line, first.column, expected, _describe(first))
    return first.text


def _split_options(expr: SList, start: int) -> Tuple[Dict[str, SExpr], List[SExpr]]:
    """Leading ``:key value`` pairs, then the remaining positional items."""
    options: Dict[str, SExpr] = {}
    i = start
    items = expr.items
    while i < len(items) and isinstance(items[i], Atom) and not items[i].quoted \
            and items[i].text.startswith(":"):
        key = items[i]
        if i + 1 >= len(items):
            raise QpefSyntaxError(key.line, key.column, f"value after {key.text}", "')'")
        if key.text in options:
            raise QpefSyntaxError(key.line, key.column, "each option once", key.text)
        options[key.text] = items[i + 1]
        i += 2
    return options, items[i:]


def _reject_unknown(options: Dict[str, SExpr], allowed: Tuple[str, ...]) -> None:
    for key, value in options.items():
        if key not in allowed:
            raise QpefSyntaxError(value.line, value.column, f"one of {', '.join(allowed)}", key)


# ----------------------------------------------------------------------
# Games
# ----------------------------------------------------------------------

@dataclass
class GameDocument:
    """Header plus node expressions of a parsed .qpef file."""
    players: int
    player_names: Tuple[str, ...]
    body: SExpr
    source: Optional[str] = None


def parse(text: str, source: Optional[str] = None) -> Tuple[GameDocument, GameTree]:
    """Parse .qpef text into its document and the validated game.

    Raises:
        QpefSyntaxError: malformed text.
        GameValidationError: structural check failed; carries a source location.
    """
    expr = read_sexpr(text)
    if _head(expr, "(game ...)") != "game":
        raise QpefSyntaxError(expr.line, expr.column, "game", expr.items[0].text)
    options, rest = _split_options(expr, 1)
    _reject_unknown(options, (":players", ":names"))
    if ":players" not in options:
        raise QpefSyntaxError(expr.line, expr.column, ":players")
    players_atom = options[":players"]
    players = parse_rational(players_atom)
    if players.denominator != 1 or players < 1:
        raise QpefSyntaxError(players_atom.line, players_atom.column, "positive integer",
                              _describe(players_atom))
    players = int(players)

    names: Tuple[str, ...] = ()
    if ":names" in options:
        names_expr = options[":names"]
        if not isinstance(names_expr, SList) or len(names_expr.items) != players:
            raise QpefSyntaxError(names_expr.line, names_expr.column, f"list of {players} names",
                                  _describe(names_expr))
        for item in names_expr.items:
            if not isinstance(item, Atom):
                raise QpefSyntaxError(item.line, item.column, "player name", "list")
        names = tuple(item.text for item in names_expr.items)

    if len(rest) != 1:
        where = rest[1] if len(rest) > 1 else expr
        raise QpefSyntaxError(where.line, where.column, "exactly one root node",
                              _describe(where) if len(rest) > 1 else "')'")

    nodes: Dict[str, Node] = {}
    root = _read_node(rest[0], "/", players, nodes)
    raw = RawGame(players=players, root=root, nodes=nodes, player_names=names)
    try:
        game = validate(raw)
    except GameValidationError as exc:
        if exc.location is None:
            raise exc.with_location((expr.line, expr.column)) from exc
        raise
    logger.debug("game parsed", source=source, players=players, nodes=len(nodes))
    return GameDocument(players, game.player_names, rest[0], source), game


def _child_path(path: str, action: str) -> str:
    return f"/{action}" if path == "/" else f"{path}/{action}"


def _read_node(expr: SExpr, path: str, players: int, nodes: Dict[str, Node]) -> str:
    kind = _head(expr, "(chance ...), (decision ...) or (leaf ...)")
    location = (expr.line, expr.column)

    if kind == LEAF:
        options, rest = _split_options(expr, 1)
        _reject_unknown(options, (":id",))
        node_id = _symbol(options[":id"], "node id") if ":id" in options else path
        if len(rest) != 1 or not isinstance(rest[0], SList):
            raise QpefSyntaxError(expr.line, expr.column, "payoff list (u1 ... un)")
        payoffs = tuple(parse_rational(a) for a in rest[0].items)
        _register(nodes, Node(node_id, LEAF, payoffs=payoffs, location=location), expr)
        return node_id

    if kind == CHANCE:
        options, rest = _split_options(expr, 1)
        _reject_unknown(options, (":id",))
        node_id = _symbol(options[":id"], "node id") if ":id" in options else path
        actions, children, probs = [], {}, {}
        for branch in rest:
            if not isinstance(branch, SList) or len(branch.items) != 3:
                raise QpefSyntaxError(branch.line, branch.column, "(outcome probability node)",
                                      _describe(branch))
            label = _label(branch.items[0], "outcome label")
            probs[label] = parse_rational(branch.items[1])
            actions.append(label)
            children[label] = _read_node(branch.items[2], _child_path(path, label), players, nodes)
        _register(nodes, Node(node_id, CHANCE, tuple(actions), children, probs=probs,
                              location=location), expr)
        return node_id

    if kind == DECISION:
        options, rest = _split_options(expr, 1)
        _reject_unknown(options, (":id", ":player", ":infoset", ":actions"))
        for key in (":player", ":infoset", ":actions"):
            if key not in options:
                raise QpefSyntaxError(expr.line, expr.column, key)
        node_id = _symbol(options[":id"], "node id") if ":id" in options else path
        player_atom = options[":player"]
        player = parse_rational(player_atom)
        if player.denominator != 1:
            raise QpefSyntaxError(player_atom.line, player_atom.column, "player number", player_atom.text)
        infoset = _symbol(options[":infoset"], "infoset label")
        actions_expr = options[":actions"]
        if not isinstance(actions_expr, SList):
            raise QpefSyntaxError(actions_expr.line, actions_expr.column, "action list",
                                  _describe(actions_expr))
        actions = tuple(_label(a, "action label") for a in actions_expr.items)
        children = {}
        for branch in rest:
            if not isinstance(branch, SList) or len(branch.items) != 2:
                raise QpefSyntaxError(branch.line, branch.column, "(action node)", _describe(branch))
            label = _label(branch.items[0], "action label")
            if label in children:
                raise QpefSyntaxError(branch.line, branch.column, "each action once", label)
            children[label] = _read_node(branch.items[1], _child_path(path, label), players, nodes)
        _register(nodes, Node(node_id, DECISION, actions, children, player=int(player) - 1,
                              infoset=infoset, location=location), expr)
        return node_id

    first = expr.items[0]
    raise QpefSyntaxError(first.line, first.column, "chance, decision or leaf", kind)


def _register(nodes: Dict[str, Node], node: Node, expr: SExpr) -> None:
    if node.id in nodes:
        raise QpefSyntaxError(expr.line, expr.column, "unique node id", node.id)
    nodes[node.id] = node


def load_game(path: Union[str, Path]) -> GameTree:
    """Read and validate a .qpef file."""
    path = Path(path)
    _, game = parse(path.read_text(encoding="utf-8"), source=str(path))
    return game


def serialize(game: GameTree) -> str:
    """Canonical .qpef text for ``game``."""
    header = f"(game :players {game.players}"
    default_names = tuple(str(i + 1) for i in range(game.players))
    if game.player_names != default_names:
        header += " :names (" + " ".join(_quote(n) for n in game.player_names) + ")"
    lines = [header]
    _write_node(game, game.root, "/", 1, lines)
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


def _write_node(game: GameTree, node_id: str, path: str, depth: int, lines: List[str],
                prefix: str = "") -> None:
    node = game.nodes[node_id]
    indent = "  " * depth
    id_part = "" if node_id == path else f" :id {node_id}"

    if node.is_leaf:
        payoffs = " ".join(str(u) for u in node.payoffs)
        lines.append(f"{indent}{prefix}(leaf{id_part} ({payoffs}))")
        return

    if node.kind == CHANCE:
        lines.append(f"{indent}{prefix}(chance{id_part}")
        for a in node.actions:
            _write_node(game, node.children[a], _child_path(path, a), depth + 1, lines,
                        prefix=f"({a} {node.probs[a]} ")
            lines[-1] += ")"
    else:
        actions = " ".join(node.actions)
        lines.append(f"{indent}{prefix}(decision{id_part} :player {node.player + 1} "
                     f":infoset {node.infoset} :actions ({actions})")
        for a in node.actions:
            _write_node(game, node.children[a], _child_path(path, a), depth + 1, lines,
                        prefix=f"({a} ")
            lines[-1] += ")"
    lines[-1] += ")"


# ----------------------------------------------------------------------
# Profiles: (profile (H (a p) (b q)) ...)
# ----------------------------------------------------------------------

def parse_profile(text: str, game: GameTree) -> BehaviorProfile:
    """Parse a profile file against ``game``; the result is checked to sum to 1."""
    expr = read_sexpr(text)
    if _head(expr, "(profile ...)") != "profile":
        raise QpefSyntaxError(expr.line, expr.column, "profile", expr.items[0].text)
    strategies: Dict[str, Dict[str, Fraction]] = {}
    for entry in expr.items[1:]:
        if not isinstance(entry, SList) or not entry.items:
            raise QpefSyntaxError(entry.line, entry.column, "(infoset (action p) ...)",
                                  _describe(entry))
        infoset = _symbol(entry.items[0], "infoset label")
        if infoset in strategies:
            raise QpefSyntaxError(entry.line, entry.column, "each infoset once", infoset)
        local: Dict[str, Fraction] = {}
        for pair in entry.items[1:]:
            if not isinstance(pair, SList) or len(pair.items) != 2:
                raise QpefSyntaxError(pair.line, pair.column, "(action probability)", _describe(pair))
            local[_symbol(pair.items[0], "action label")] = parse_rational(pair.items[1])
        strategies[infoset] = local
    return BehaviorProfile(strategies).check(game)


def serialize_profile(profile: BehaviorProfile, game: GameTree) -> str:
    lines = ["(profile"]
    for player in range(game.players):
        for h in game.infosets_of(player):
            pairs = " ".join(f"({a} {profile.prob(h, a)})" for a in game.infosets[h].actions)
            lines.append(f"  ({h} {pairs})")
    lines[-1] += ")"
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Result documents
# ----------------------------------------------------------------------

@dataclass
class ResultDocument:
    """Solver output: symbolic behavior, limits, value and verification checks.

    ``checks`` maps a check label (``nash``, ``eps.1/100`` ...) to its fields.
    """
    mode: str
    behavior: Dict[str, Dict[str, EpsRat]] = field(default_factory=dict)
    limit: Dict[str, Dict[str, Fraction]] = field(default_factory=dict)
    value: Optional[EpsRat] = None
    checks: Dict[str, Dict[str, str]] = field(default_factory=dict)
    extras: Dict[str, str] = field(default_factory=dict)


def format_coefficients(coeffs) -> str:
    return "[" + ", ".join(str(Fraction(c)) for c in coeffs) + "]"


def emit_result(doc: ResultDocument) -> str:
    """Flat ``key = value`` text with sorted keys after a version header."""
    entries: Dict[str, str] = {"mode": doc.mode}
    for h, local in doc.behavior.items():
        for a, prob in local.items():
            num, den = prob.to_arrays()
            entries[f"behavior.{h}.{a}.num"] = format_coefficients(num)
            entries[f"behavior.{h}.{a}.den"] = format_coefficients(den)
    for h, local in doc.limit.items():
        for a, prob in local.items():
            entries[f"limit.{h}.{a}"] = str(prob)
    if doc.value is not None:
        num, den = doc.value.to_arrays()
        entries["value.num"] = format_coefficients(num)
        entries["value.den"] = format_coefficients(den)
        entries["value.limit"] = str(doc.value.limit_at_zero())
    for label, fields in doc.checks.items():
        for key, text in fields.items():
            entries[f"verify.{label}.{key}"] = text
    for key, text in doc.extras.items():
        entries[key] = text
    lines = [RESULT_HEADER] + [f"{key} = {entries[key]}" for key in sorted(entries)]
    return "\n".join(lines) + "\n"


def read_result(text: str) -> Dict[str, str]:
    """Key/value pairs of an emitted result document."""
    lines = text.splitlines()
    if not lines or lines[0] != RESULT_HEADER:
        raise QpefSyntaxError(1, 1, RESULT_HEADER, lines[0] if lines else "end of input")
    entries: Dict[str, str] = {}
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        key, sep, value = line.partition(" = ")
        if not sep:
            raise QpefSyntaxError(number, 1, "key = value", line)
        entries[key] = value
    return entries


def parse_coefficients(text: str) -> List[Fraction]:
    inner = text.strip()
    if not (inner.startswith("[") and inner.endswith("]")):
        raise QpefSyntaxError(1, 1, "[c0, c1, ...]", text)
    inner = inner[1:-1].strip()
    return [Fraction(part.strip()) for part in inner.split(",")] if inner else []
